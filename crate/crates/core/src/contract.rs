//! Labeled sparse tensors over a semiring and the chain contraction sweep.
//!
//! Chain layout for `n` visible variables `u_1..u_n`: one hidden variable on
//! each side (`u_0`, `u_{n+1}`), or two with `hidden_equations`, so that the
//! hidden cells carry equations as well. Three-point cells sit at every
//! position whose neighbours exist; two-point cells sit on every adjacent
//! pair. A cell owns the variable at its position (the middle one for
//! three-point cells, the left one for two-point cells); cells owning a hidden
//! variable contribute `{()}` instead of a value.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::Semiring;

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("duplicate label {0} in tensor")]
    DuplicateLabel(VarId),
    #[error("extent mismatch on label {label}: {left} vs {right}")]
    ExtentMismatch {
        label: VarId,
        left: usize,
        right: usize,
    },
    #[error("label {0} not present in tensor")]
    UnknownLabel(VarId),
    #[error("index {index:?} out of bounds for extents {extents:?}")]
    IndexOutOfBounds {
        index: Vec<usize>,
        extents: Vec<usize>,
    },
    #[error("cell tensors do not match the chain plan: {0}")]
    PlanMismatch(String),
    #[error("stencil arity must be 2 or 3, got {0}")]
    BadArity(usize),
    #[error("chain needs at least 2 visible variables, got {0}")]
    TooFewVisible(usize),
    #[error("intermediate truncation is only sound for left-to-right sweeps")]
    CapRequiresForward,
}

/// Sparse tensor whose axes are named chain variables.
///
/// Absent entries are the semiring zero; stored entries never are.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTensor<S> {
    labels: Vec<VarId>,
    extents: Vec<usize>,
    entries: BTreeMap<Box<[u32]>, S>,
}

impl<S: Semiring> LabeledTensor<S> {
    pub fn new(labels: Vec<VarId>, extents: Vec<usize>) -> Result<Self, ContractError> {
        assert_eq!(
            labels.len(),
            extents.len(),
            "labels/extents length mismatch"
        );
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ContractError::DuplicateLabel(*l));
            }
        }
        Ok(Self {
            labels,
            extents,
            entries: BTreeMap::new(),
        })
    }

    /// Rank-0 tensor holding `value`.
    pub fn scalar(value: S) -> Self {
        let mut t = Self {
            labels: vec![],
            extents: vec![],
            entries: BTreeMap::new(),
        };
        if !value.is_zero() {
            t.entries.insert(Box::new([]), value);
        }
        t
    }

    pub fn labels(&self) -> &[VarId] {
        &self.labels
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn extent_of(&self, label: VarId) -> Option<usize> {
        self.axis_of(label).map(|a| self.extents[a])
    }

    fn axis_of(&self, label: VarId) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn check_index(&self, index: &[usize]) -> Result<(), ContractError> {
        if index.len() != self.labels.len() || index.iter().zip(&self.extents).any(|(i, e)| i >= e)
        {
            return Err(ContractError::IndexOutOfBounds {
                index: index.to_vec(),
                extents: self.extents.clone(),
            });
        }
        Ok(())
    }

    /// Sets an entry; zeros are dropped.
    pub fn insert(&mut self, index: &[usize], value: S) -> Result<(), ContractError> {
        self.check_index(index)?;
        let key: Box<[u32]> = index.iter().map(|&i| i as u32).collect();
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    pub fn get(&self, index: &[usize]) -> Option<&S> {
        let key: Vec<u32> = index.iter().map(|&i| i as u32).collect();
        self.entries.get(key.as_slice())
    }

    /// Entry value with zero for absent positions.
    pub fn value(&self, index: &[usize]) -> S {
        self.get(index).cloned().unwrap_or_else(S::zero)
    }

    /// Stored entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &S)> {
        self.entries
            .iter()
            .map(|(k, v)| (k.iter().map(|&i| i as usize).collect(), v))
    }

    /// Pointwise product over shared labels (outer product over the rest).
    ///
    /// Result labels are `self`'s followed by `other`'s labels not in `self`.
    pub fn multiply_aligned(&self, other: &Self) -> Result<Self, ContractError> {
        let mut shared = Vec::new();
        let mut other_only = Vec::new();
        for (bi, &l) in other.labels.iter().enumerate() {
            match self.axis_of(l) {
                Some(ai) => {
                    if self.extents[ai] != other.extents[bi] {
                        return Err(ContractError::ExtentMismatch {
                            label: l,
                            left: self.extents[ai],
                            right: other.extents[bi],
                        });
                    }
                    shared.push((ai, bi));
                }
                None => other_only.push(bi),
            }
        }
        let mut labels = self.labels.clone();
        let mut extents = self.extents.clone();
        for &bi in &other_only {
            labels.push(other.labels[bi]);
            extents.push(other.extents[bi]);
        }

        let mut by_shared: HashMap<Vec<u32>, Vec<(&[u32], &S)>> = HashMap::new();
        for (kb, vb) in &other.entries {
            let sk = shared.iter().map(|&(_, bi)| kb[bi]).collect();
            by_shared.entry(sk).or_default().push((kb, vb));
        }

        let left: Vec<(&Box<[u32]>, &S)> = self.entries.iter().collect();
        let products: Vec<(Box<[u32]>, S)> = left
            .par_iter()
            .flat_map_iter(|(ka, va)| {
                let sk: Vec<u32> = shared.iter().map(|&(ai, _)| ka[ai]).collect();
                let matches = by_shared.get(&sk).map(Vec::as_slice).unwrap_or(&[]);
                let other_only = &other_only;
                matches.iter().filter_map(move |(kb, vb)| {
                    let v = va.mul(vb);
                    if v.is_zero() {
                        return None;
                    }
                    let mut key = Vec::with_capacity(ka.len() + other_only.len());
                    key.extend_from_slice(ka);
                    key.extend(other_only.iter().map(|&bi| kb[bi]));
                    Some((key.into_boxed_slice(), v))
                })
            })
            .collect();

        Ok(Self {
            labels,
            extents,
            entries: products.into_iter().collect(),
        })
    }

    /// Sums out one axis.
    pub fn marginalize(&self, label: VarId) -> Result<Self, ContractError> {
        let axis = self
            .axis_of(label)
            .ok_or(ContractError::UnknownLabel(label))?;
        let mut labels = self.labels.clone();
        let mut extents = self.extents.clone();
        labels.remove(axis);
        extents.remove(axis);

        let mut reduced: Vec<(Box<[u32]>, &S)> = self
            .entries
            .iter()
            .map(|(k, v)| {
                let mut rk = k.to_vec();
                rk.remove(axis);
                (rk.into_boxed_slice(), v)
            })
            .collect();
        // stable: keeps the summed axis in ascending order within each group
        reduced.sort_by(|a, b| a.0.cmp(&b.0));

        type Group<'a, S> = [(Box<[u32]>, &'a S)];
        let mut groups: Vec<&Group<S>> = Vec::new();
        let mut start = 0;
        for i in 1..=reduced.len() {
            if i == reduced.len() || reduced[i].0 != reduced[start].0 {
                groups.push(&reduced[start..i]);
                start = i;
            }
        }
        let sums: Vec<(Box<[u32]>, S)> = groups
            .par_iter()
            .filter_map(|g| {
                let mut acc = g[0].1.clone();
                for (_, v) in &g[1..] {
                    acc.add_assign(v);
                }
                (!acc.is_zero()).then(|| (g[0].0.clone(), acc))
            })
            .collect();

        Ok(Self {
            labels,
            extents,
            entries: sums.into_iter().collect(),
        })
    }

    /// Reorders axes to `order` (a permutation of the labels).
    pub fn permute(&self, order: &[VarId]) -> Result<Self, ContractError> {
        if order.len() != self.labels.len() {
            return Err(ContractError::PlanMismatch(format!(
                "permutation {order:?} does not match labels {:?}",
                self.labels
            )));
        }
        let axes = order
            .iter()
            .map(|&l| self.axis_of(l).ok_or(ContractError::UnknownLabel(l)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            labels: order.to_vec(),
            extents: axes.iter().map(|&a| self.extents[a]).collect(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (axes.iter().map(|&a| k[a]).collect(), v.clone()))
                .collect(),
        })
    }

    /// Drops entries whose index along `label` is not kept.
    pub fn restrict(&self, label: VarId, keep: &[bool]) -> Result<Self, ContractError> {
        let axis = self
            .axis_of(label)
            .ok_or(ContractError::UnknownLabel(label))?;
        Ok(Self {
            labels: self.labels.clone(),
            extents: self.extents.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep.get(k[axis] as usize).copied().unwrap_or(false))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        })
    }

    /// Applies `f` to every stored entry, dropping results that become zero.
    pub fn map_entries<T: Semiring>(&self, f: impl Fn(&S) -> T + Sync) -> LabeledTensor<T>
    where
        S: Sync,
    {
        LabeledTensor {
            labels: self.labels.clone(),
            extents: self.extents.clone(),
            entries: self
                .entries
                .iter()
                .filter_map(|(k, v)| {
                    let t = f(v);
                    (!t.is_zero()).then(|| (k.clone(), t))
                })
                .collect(),
        }
    }

    fn truncate_entries(&mut self, cap: usize) {
        self.entries.values_mut().for_each(|v| v.truncate(cap));
        self.entries.retain(|_, v| !v.is_zero());
    }
}

/// One equation node of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSpec {
    /// Chain position of the cell (may be `<= 0` or `> n` for hidden cells).
    pub position: i64,
    /// Variables in stencil argument order.
    pub vars: Vec<VarId>,
    /// Visible variable contributed to tuples; `None` if the cell owns a hidden one.
    pub owner: Option<VarId>,
}

/// Wiring of a 1-D chain with hidden boundary variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPlan {
    n_visible: usize,
    arity: usize,
    hidden_equations: bool,
    /// Chain position of each variable id; ids ascend with position.
    positions: Vec<i64>,
    cells: Vec<CellSpec>,
}

impl ChainPlan {
    pub fn new(
        n_visible: usize,
        arity: usize,
        hidden_equations: bool,
    ) -> Result<Self, ContractError> {
        if arity != 2 && arity != 3 {
            return Err(ContractError::BadArity(arity));
        }
        if n_visible < 2 {
            return Err(ContractError::TooFewVisible(n_visible));
        }
        let n = n_visible as i64;
        let margin: i64 = if hidden_equations { 2 } else { 1 };
        let first = 1 - margin;
        let last = n + margin;
        let positions: Vec<i64> = (first..=last).collect();
        let id = |p: i64| (p - first) as VarId;
        let visible = |p: i64| (1..=n).contains(&p);

        let cells = if arity == 3 {
            (first + 1..last)
                .map(|p| CellSpec {
                    position: p,
                    vars: vec![id(p - 1), id(p), id(p + 1)],
                    owner: visible(p).then(|| id(p)),
                })
                .collect()
        } else {
            (first..last)
                .map(|p| CellSpec {
                    position: p,
                    vars: vec![id(p), id(p + 1)],
                    owner: visible(p).then(|| id(p)),
                })
                .collect()
        };
        Ok(Self {
            n_visible,
            arity,
            hidden_equations,
            positions,
            cells,
        })
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn hidden_equations(&self) -> bool {
        self.hidden_equations
    }

    pub fn n_vars(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, var: VarId) -> i64 {
        self.positions[var]
    }

    /// Variable id of `u_p`.
    pub fn var_at(&self, position: i64) -> Option<VarId> {
        let first = self.positions[0];
        let id = position - first;
        (id >= 0 && (id as usize) < self.positions.len()).then_some(id as usize)
    }

    pub fn is_visible(&self, var: VarId) -> bool {
        (1..=self.n_visible as i64).contains(&self.positions[var])
    }

    /// Visible variable ids `u_1..u_n` in order.
    pub fn visible_vars(&self) -> Vec<VarId> {
        (1..=self.n_visible as i64)
            .filter_map(|p| self.var_at(p))
            .collect()
    }

    pub fn cells(&self) -> &[CellSpec] {
        &self.cells
    }

    /// `(u_1, u_n)`.
    pub fn exposed(&self) -> [VarId; 2] {
        [
            self.var_at(1).unwrap(),
            self.var_at(self.n_visible as i64).unwrap(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Absorb cells right-to-left instead of left-to-right.
    pub reverse: bool,
    /// Truncate every frontier entry to this many elements after each step.
    ///
    /// For solution sets this keeps the lexicographically smallest tuples;
    /// because coordinates are appended left to right, the final entries then
    /// equal the `cap` smallest tuples of the untruncated result.
    pub entry_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput<S> {
    /// Two-axis tensor over `(u_1, u_n)`.
    pub tensor: LabeledTensor<S>,
    /// Largest number of labels the frontier held.
    pub peak_labels: usize,
}

fn check_cells<S: Semiring>(
    cells: &[LabeledTensor<S>],
    plan: &ChainPlan,
) -> Result<(), ContractError> {
    if cells.len() != plan.cells.len() {
        return Err(ContractError::PlanMismatch(format!(
            "expected {} cell tensors, got {}",
            plan.cells.len(),
            cells.len()
        )));
    }
    for (t, spec) in cells.iter().zip(&plan.cells) {
        if t.labels != spec.vars {
            return Err(ContractError::PlanMismatch(format!(
                "cell at position {} has labels {:?}, expected {:?}",
                spec.position, t.labels, spec.vars
            )));
        }
    }
    Ok(())
}

/// Contracts the chain down to the exposed pair `(u_1, u_n)`.
///
/// A frontier tensor absorbs cells one at a time; each variable is summed out
/// as soon as no unabsorbed cell references it, unless it is exposed. The
/// frontier never holds more than `arity + 1` labels.
pub fn sweep_contract<S: Semiring>(
    cells: &[LabeledTensor<S>],
    plan: &ChainPlan,
    opts: SweepOptions,
) -> Result<SweepOutput<S>, ContractError> {
    check_cells(cells, plan)?;
    if opts.reverse && opts.entry_cap.is_some() {
        return Err(ContractError::CapRequiresForward);
    }
    let exposed = plan.exposed();
    let order: Vec<usize> = if opts.reverse {
        (0..cells.len()).rev().collect()
    } else {
        (0..cells.len()).collect()
    };

    // remaining[v] = number of unabsorbed cells referencing v
    let mut remaining = vec![0usize; plan.n_vars()];
    for spec in &plan.cells {
        for &v in &spec.vars {
            remaining[v] += 1;
        }
    }

    let mut frontier: Option<LabeledTensor<S>> = None;
    let mut peak = 0;
    for &ci in &order {
        // variables private to this cell can be summed out before the product
        let mut cell = cells[ci].clone();
        for &v in &plan.cells[ci].vars {
            let in_frontier = frontier.as_ref().is_some_and(|f| f.axis_of(v).is_some());
            if remaining[v] == 1 && !exposed.contains(&v) && !in_frontier {
                cell = cell.marginalize(v)?;
            }
        }
        let cell = &cell;
        let mut next = match frontier.take() {
            None => cell.clone(),
            // keep tuple coordinates in ascending chain order
            Some(f) if opts.reverse => cell.multiply_aligned(&f)?,
            Some(f) => f.multiply_aligned(cell)?,
        };
        peak = peak.max(next.labels.len());
        for &v in &plan.cells[ci].vars {
            remaining[v] -= 1;
        }
        let mut done: Vec<VarId> = next
            .labels
            .iter()
            .copied()
            .filter(|&v| remaining[v] == 0 && !exposed.contains(&v))
            .collect();
        done.sort_unstable();
        for v in done {
            next = next.marginalize(v)?;
        }
        if let Some(cap) = opts.entry_cap {
            next.truncate_entries(cap);
        }
        frontier = Some(next);
    }

    let tensor = frontier
        .expect("plan has at least one cell")
        .permute(&exposed)?;
    Ok(SweepOutput {
        tensor,
        peak_labels: peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Count, SolutionSet};

    fn ss(ts: &[&[f64]]) -> SolutionSet {
        SolutionSet::new(ts.iter().map(|t| t.to_vec())).unwrap()
    }

    #[test]
    fn aligned_singletons_concatenate() {
        let mut a = LabeledTensor::<SolutionSet>::new(vec![0], vec![2]).unwrap();
        let mut b = LabeledTensor::<SolutionSet>::new(vec![0], vec![2]).unwrap();
        a.insert(&[1], ss(&[&[1.0]])).unwrap();
        b.insert(&[1], ss(&[&[2.0]])).unwrap();
        let p = a.multiply_aligned(&b).unwrap();
        assert_eq!(p.labels(), &[0]);
        assert_eq!(p.value(&[1]), ss(&[&[1.0, 2.0]]));
        assert!(p.value(&[0]).is_empty());
    }

    #[test]
    fn zero_tensor_annihilates() {
        let mut a = LabeledTensor::<bool>::new(vec![0, 1], vec![3, 3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                a.insert(&[i, j], true).unwrap();
            }
        }
        let z = LabeledTensor::<bool>::new(vec![1, 2], vec![3, 3]).unwrap();
        assert_eq!(a.multiply_aligned(&z).unwrap().nnz(), 0);
    }

    #[test]
    fn boolean_outer_product() {
        let mut a = LabeledTensor::<bool>::new(vec![0], vec![2]).unwrap();
        let mut b = LabeledTensor::<bool>::new(vec![1], vec![2]).unwrap();
        a.insert(&[0], true).unwrap();
        b.insert(&[0], true).unwrap();
        b.insert(&[1], true).unwrap();
        let p = a.multiply_aligned(&b).unwrap();
        assert_eq!(p.labels(), &[0, 1]);
        let dense: Vec<Vec<bool>> = (0..2)
            .map(|i| (0..2).map(|j| p.value(&[i, j])).collect())
            .collect();
        assert_eq!(dense, vec![vec![true, true], vec![false, false]]);
    }

    #[test]
    fn extent_mismatch_is_an_error() {
        let a = LabeledTensor::<bool>::new(vec![0], vec![2]).unwrap();
        let b = LabeledTensor::<bool>::new(vec![0], vec![3]).unwrap();
        assert_eq!(
            a.multiply_aligned(&b).unwrap_err(),
            ContractError::ExtentMismatch {
                label: 0,
                left: 2,
                right: 3
            }
        );
        assert_eq!(
            LabeledTensor::<bool>::new(vec![1, 1], vec![2, 2]).unwrap_err(),
            ContractError::DuplicateLabel(1)
        );
    }

    #[test]
    fn marginalize_or_and_union() {
        let mut t = LabeledTensor::<bool>::new(vec![0, 1], vec![2, 2]).unwrap();
        t.insert(&[0, 0], true).unwrap();
        let m = t.marginalize(1).unwrap();
        assert_eq!(m.labels(), &[0]);
        assert!(m.value(&[0]));
        assert!(!m.value(&[1]));
        assert_eq!(
            t.marginalize(7).unwrap_err(),
            ContractError::UnknownLabel(7)
        );

        let mut s = LabeledTensor::<SolutionSet>::new(vec![4], vec![2]).unwrap();
        s.insert(&[0], ss(&[&[1.0]])).unwrap();
        s.insert(&[1], ss(&[&[2.0]])).unwrap();
        let scalar = s.marginalize(4).unwrap();
        assert!(scalar.labels().is_empty());
        assert_eq!(scalar.value(&[]), ss(&[&[1.0], &[2.0]]));
    }

    #[test]
    fn counting_marginal_matches_enumeration() {
        // t[x, y] = x + y over 3x4; sum over y
        let mut t = LabeledTensor::<Count>::new(vec![0, 1], vec![3, 4]).unwrap();
        for x in 0..3 {
            for y in 0..4 {
                t.insert(&[x, y], Count((x + y) as u64)).unwrap();
            }
        }
        let m = t.marginalize(1).unwrap();
        for x in 0..3 {
            let brute: u64 = (0..4).map(|y| (x + y) as u64).sum();
            assert_eq!(m.value(&[x]), Count(brute));
        }
    }

    #[test]
    fn permute_and_restrict() {
        let mut t = LabeledTensor::<Count>::new(vec![3, 5], vec![2, 3]).unwrap();
        t.insert(&[1, 2], Count(7)).unwrap();
        t.insert(&[0, 1], Count(2)).unwrap();
        let p = t.permute(&[5, 3]).unwrap();
        assert_eq!(p.extents(), &[3, 2]);
        assert_eq!(p.value(&[2, 1]), Count(7));
        let r = t.restrict(3, &[false, true]).unwrap();
        assert_eq!(r.nnz(), 1);
        assert!(t.insert(&[2, 0], Count(1)).is_err());
    }

    #[test]
    fn plan_layouts() {
        let p = ChainPlan::new(5, 3, false).unwrap();
        assert_eq!(p.n_vars(), 7);
        assert_eq!(p.cells().len(), 5);
        assert_eq!(p.cells()[0].vars, vec![0, 1, 2]);
        assert!(p.cells().iter().all(|c| c.owner.is_some()));
        assert_eq!(p.exposed(), [1, 5]);

        let p = ChainPlan::new(5, 3, true).unwrap();
        assert_eq!(p.n_vars(), 9);
        assert_eq!(p.cells().len(), 7);
        assert_eq!(p.cells()[0].owner, None);
        assert_eq!(p.cells()[6].owner, None);
        assert_eq!(p.exposed(), [2, 6]);

        let p = ChainPlan::new(4, 2, false).unwrap();
        assert_eq!(p.cells().len(), 5);
        assert_eq!(p.cells()[0].owner, None);
        assert_eq!(p.cells()[1].owner, Some(1));
        assert_eq!(p.cells()[4].vars, vec![4, 5]);
        let owned: Vec<_> = p.cells().iter().filter_map(|c| c.owner).collect();
        assert_eq!(owned, p.visible_vars());

        assert_eq!(
            ChainPlan::new(1, 3, false).unwrap_err(),
            ContractError::TooFewVisible(1)
        );
        assert_eq!(
            ChainPlan::new(4, 4, false).unwrap_err(),
            ContractError::BadArity(4)
        );
    }

    /// Full tensors: every entry feasible, every owner visible.
    fn full_cells(plan: &ChainPlan, bins: usize) -> Vec<LabeledTensor<SolutionSet>> {
        plan.cells()
            .iter()
            .map(|spec| {
                let k = spec.vars.len();
                let mut t = LabeledTensor::new(spec.vars.clone(), vec![bins; k]).unwrap();
                let total = bins.pow(k as u32);
                for flat in 0..total {
                    let idx: Vec<usize> = (0..k)
                        .map(|a| flat / bins.pow((k - 1 - a) as u32) % bins)
                        .collect();
                    let owner = spec.owner.map(|o| {
                        let a = spec.vars.iter().position(|&v| v == o).unwrap();
                        idx[a] as f64
                    });
                    t.insert(&idx, SolutionSet::feasible(owner)).unwrap();
                }
                t
            })
            .collect()
    }

    #[test]
    fn all_feasible_chain_counts() {
        let bins = 5;
        for n in 2..=4 {
            let plan = ChainPlan::new(n, 3, false).unwrap();
            let out =
                sweep_contract(&full_cells(&plan, bins), &plan, SweepOptions::default()).unwrap();
            assert!(out.peak_labels <= 4);
            for l in 0..bins {
                for r in 0..bins {
                    let set = out.tensor.value(&[l, r]);
                    assert_eq!(set.len(), bins.pow(n as u32 - 2));
                    for t in set.iter() {
                        assert_eq!(t.values()[0], l as f64);
                        assert_eq!(t.values()[n - 1], r as f64);
                    }
                }
            }
        }
    }

    #[test]
    fn one_zero_cell_zeroes_everything() {
        let plan = ChainPlan::new(4, 3, false).unwrap();
        let mut cells = full_cells(&plan, 3);
        cells[2] = LabeledTensor::new(cells[2].labels().to_vec(), vec![3; 3]).unwrap();
        let out = sweep_contract(&cells, &plan, SweepOptions::default()).unwrap();
        assert_eq!(out.tensor.nnz(), 0);
    }

    #[test]
    fn reverse_sweep_matches_forward() {
        for (arity, hidden) in [(3, false), (3, true), (2, false), (2, true)] {
            let plan = ChainPlan::new(3, arity, hidden).unwrap();
            let cells = full_cells(&plan, 3);
            let fwd = sweep_contract(&cells, &plan, SweepOptions::default()).unwrap();
            let rev = sweep_contract(
                &cells,
                &plan,
                SweepOptions {
                    reverse: true,
                    entry_cap: None,
                },
            )
            .unwrap();
            assert_eq!(fwd.tensor, rev.tensor);
            assert!(rev.peak_labels <= arity + 1);
            assert!(fwd.peak_labels <= arity + 1);
        }
    }

    #[test]
    fn capped_sweep_keeps_smallest_tuples() {
        let plan = ChainPlan::new(4, 3, false).unwrap();
        let cells = full_cells(&plan, 4);
        let full = sweep_contract(&cells, &plan, SweepOptions::default()).unwrap();
        let capped = sweep_contract(
            &cells,
            &plan,
            SweepOptions {
                reverse: false,
                entry_cap: Some(5),
            },
        )
        .unwrap();
        for (idx, set) in full.tensor.iter() {
            let mut want = set.clone();
            want.truncate_to(5);
            assert_eq!(capped.tensor.value(&idx), want);
        }
        assert_eq!(
            sweep_contract(
                &cells,
                &plan,
                SweepOptions {
                    reverse: true,
                    entry_cap: Some(5)
                }
            )
            .unwrap_err(),
            ContractError::CapRequiresForward
        );
    }

    #[test]
    fn plan_mismatch_detected() {
        let plan = ChainPlan::new(3, 3, false).unwrap();
        let mut cells = full_cells(&plan, 2);
        cells.pop();
        assert!(matches!(
            sweep_contract(&cells, &plan, SweepOptions::default()),
            Err(ContractError::PlanMismatch(_))
        ));
    }

    #[test]
    fn hidden_owner_tuples_have_visible_length() {
        let plan = ChainPlan::new(3, 2, true).unwrap();
        let out = sweep_contract(&full_cells(&plan, 2), &plan, SweepOptions::default()).unwrap();
        for (_, set) in out.tensor.iter() {
            assert_eq!(set.arity(), Some(3));
        }
    }
}
