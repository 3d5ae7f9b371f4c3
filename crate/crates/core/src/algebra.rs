//! Commutative semirings used as tensor entry types.
//!
//! | Kind          | add        | mul                         | zero  | one    |
//! |---------------|------------|-----------------------------|-------|--------|
//! | Boolean (PA)  | or         | and                         | false | true   |
//! | SolutionSet   | set union  | concatenating product       | `{}`  | `{()}` |
//! | Counting      | `+`        | `*`                         | 0     | 1      |
//!
//! Counting only exists so tests can check cardinalities against brute force.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("tuple lengths differ within one solution set: {expected} vs {found}")]
    RaggedTuples { expected: usize, found: usize },
}

/// Runtime tag for the entry semiring of a contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemiringKind {
    Boolean,
    SolutionSet,
    Counting,
}

pub trait Semiring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// Bounds the payload size. Only meaningful for set-valued semirings.
    fn truncate(&mut self, _cap: usize) {}

    /// Entry placed at a feasible tensor position. `owner` is the bin-center
    /// value contributed by the cell, or `None` for cells that own a hidden
    /// variable.
    fn feasible(owner: Option<f64>) -> Self;
}

impl Semiring for bool {
    fn zero() -> Self {
        false
    }
    fn one() -> Self {
        true
    }
    fn is_zero(&self) -> bool {
        !*self
    }
    fn add_assign(&mut self, other: &Self) {
        *self |= *other;
    }
    fn mul(&self, other: &Self) -> Self {
        *self && *other
    }
    fn feasible(_owner: Option<f64>) -> Self {
        true
    }
}

/// Natural-number semiring (saturating).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Count(pub u64);

impl Semiring for Count {
    fn zero() -> Self {
        Count(0)
    }
    fn one() -> Self {
        Count(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add_assign(&mut self, other: &Self) {
        self.0 = self.0.saturating_add(other.0);
    }
    fn mul(&self, other: &Self) -> Self {
        Count(self.0.saturating_mul(other.0))
    }
    fn feasible(_owner: Option<f64>) -> Self {
        Count(1)
    }
}

/// A fixed-length tuple of bin-center values, totally ordered lexicographically.
#[derive(Clone, PartialEq)]
pub struct Tuple(Box<[f64]>);

impl Tuple {
    pub fn new(values: impl Into<Box<[f64]>>) -> Self {
        Tuple(values.into())
    }

    pub fn empty() -> Self {
        Tuple(Box::new([]))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Tuple(v.into_boxed_slice())
    }

    pub fn reversed(&self) -> Tuple {
        Tuple(self.0.iter().rev().copied().collect())
    }
}

impl Eq for Tuple {}

impl Ord for Tuple {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Tuple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<f64>> for Tuple {
    fn from(v: Vec<f64>) -> Self {
        Tuple(v.into_boxed_slice())
    }
}

/// Finite set of equal-length tuples; the PASS entry type.
///
/// Iteration order is lexicographic, which makes every serialization canonical.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SolutionSet {
    tuples: BTreeSet<Tuple>,
}

impl SolutionSet {
    /// `{}`
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{()}`
    pub fn unit() -> Self {
        Self::singleton(Tuple::empty())
    }

    pub fn singleton(t: Tuple) -> Self {
        let mut tuples = BTreeSet::new();
        tuples.insert(t);
        Self { tuples }
    }

    pub fn new<I, T>(tuples: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = T>,
        T: Into<Tuple>,
    {
        let mut set = BTreeSet::new();
        let mut arity = None;
        for t in tuples {
            let t = t.into();
            match arity {
                None => arity = Some(t.len()),
                Some(a) if a != t.len() => {
                    return Err(AlgebraError::RaggedTuples {
                        expected: a,
                        found: t.len(),
                    })
                }
                _ => {}
            }
            set.insert(t);
        }
        Ok(Self { tuples: set })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Common tuple length, `None` for the empty set.
    pub fn arity(&self) -> Option<usize> {
        self.tuples.first().map(Tuple::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.tuples.contains(t)
    }

    /// Set union.
    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        if let (Some(a), Some(b)) = (self.arity(), other.arity()) {
            assert_eq!(a, b, "union of solution sets with different arities");
        }
        if self.tuples.is_empty() {
            self.tuples = other.tuples.clone();
        } else {
            self.tuples.extend(other.tuples.iter().cloned());
        }
    }

    /// `{ s ++ t : s in self, t in other }`.
    pub fn product(&self, other: &Self) -> Self {
        let mut tuples = BTreeSet::new();
        for s in &self.tuples {
            for t in &other.tuples {
                tuples.insert(s.concat(t));
            }
        }
        Self { tuples }
    }

    /// Keeps the `cap` lexicographically smallest tuples.
    pub fn truncate_to(&mut self, cap: usize) {
        if self.tuples.len() <= cap {
            return;
        }
        if cap == 0 {
            self.tuples.clear();
            return;
        }
        let pivot = self.tuples.iter().nth(cap).cloned().unwrap();
        self.tuples.split_off(&pivot);
    }

    /// Applies `f` to every tuple and collects the results.
    pub fn map_tuples(&self, f: impl Fn(&Tuple) -> Tuple) -> Self {
        Self {
            tuples: self.tuples.iter().map(f).collect(),
        }
    }
}

impl fmt::Debug for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.tuples.iter()).finish()
    }
}

impl FromIterator<Tuple> for SolutionSet {
    fn from_iter<I: IntoIterator<Item = Tuple>>(iter: I) -> Self {
        Self::new(iter).expect("ragged tuples")
    }
}

impl Semiring for SolutionSet {
    fn zero() -> Self {
        Self::empty()
    }
    fn one() -> Self {
        Self::unit()
    }
    fn is_zero(&self) -> bool {
        self.is_empty()
    }
    fn add_assign(&mut self, other: &Self) {
        self.union_with(other);
    }
    fn mul(&self, other: &Self) -> Self {
        self.product(other)
    }
    fn truncate(&mut self, cap: usize) {
        self.truncate_to(cap);
    }
    fn feasible(owner: Option<f64>) -> Self {
        match owner {
            Some(v) => Self::singleton(Tuple::new(vec![v])),
            None => Self::unit(),
        }
    }
}
