//! Per-cell feasibility tensors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::Semiring;
use crate::contract::{CellSpec, LabeledTensor};
use crate::grid::{round_half_up, Binning};
use crate::stencil::Stencil;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorizeError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("residual offset must be finite, got {0}")]
    NonFiniteOffset(f64),
    #[error("unknown feasibility method '{0}' (expected epsilon or binround)")]
    UnknownMethod(String),
    #[error("cell has {cell} variables but the stencil takes {stencil}")]
    ArityMismatch { cell: usize, stencil: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Accept when `|f(center)|` is within the subcube's gradient-times-radius.
    #[default]
    Epsilon,
    /// Accept when the residual and 0 round to the same residual bin.
    BinRound,
}

impl FromStr for Method {
    type Err = TensorizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "epsilon" => Ok(Method::Epsilon),
            "binround" => Ok(Method::BinRound),
            other => Err(TensorizeError::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Epsilon => "epsilon",
            Method::BinRound => "binround",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeasibilityParams {
    method: Method,
    epsilon_override: Option<f64>,
    residual_offset: f64,
}

impl FeasibilityParams {
    pub fn new(
        method: Method,
        epsilon_override: Option<f64>,
        residual_offset: f64,
    ) -> Result<Self, TensorizeError> {
        if let Some(e) = epsilon_override {
            if e <= 0.0 || e.is_nan() {
                return Err(TensorizeError::NonPositiveEpsilon(e));
            }
        }
        if !residual_offset.is_finite() {
            return Err(TensorizeError::NonFiniteOffset(residual_offset));
        }
        Ok(Self {
            method,
            epsilon_override,
            residual_offset,
        })
    }

    pub fn epsilon() -> Self {
        Self::default()
    }

    pub fn binround() -> Self {
        Self {
            method: Method::BinRound,
            ..Self::default()
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn epsilon_override(&self) -> Option<f64> {
        self.epsilon_override
    }

    pub fn residual_offset(&self) -> f64 {
        self.residual_offset
    }
}

fn centers(binning: &Binning, idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&j| binning.center_unchecked(j)).collect()
}

/// The epsilon threshold used for the subcube at `idx`.
pub fn epsilon_for(
    stencil: &Stencil,
    binning: &Binning,
    idx: &[usize],
    params: &FeasibilityParams,
) -> f64 {
    if let Some(e) = params.epsilon_override {
        return e;
    }
    let sub = binning.subcube(idx).expect("bin index out of range");
    stencil.gradient_bound(&sub) * sub.radius()
}

/// `|r| <= eps`.
pub fn epsilon_accepts(residual: f64, eps: f64) -> bool {
    residual.abs() <= eps
}

/// Whether `residual` and 0 land in the same residual bin `b*j + offset`.
pub fn binround_accepts(residual: f64, bin_size: f64, offset: f64) -> bool {
    round_half_up((residual - offset) / bin_size) == round_half_up(-offset / bin_size)
}

pub fn epsilon_feasible(
    stencil: &Stencil,
    binning: &Binning,
    idx: &[usize],
    params: &FeasibilityParams,
) -> bool {
    let r = stencil.residual(&centers(binning, idx));
    epsilon_accepts(r, epsilon_for(stencil, binning, idx, params))
}

pub fn binround_feasible(
    stencil: &Stencil,
    binning: &Binning,
    idx: &[usize],
    params: &FeasibilityParams,
) -> bool {
    let r = stencil.residual(&centers(binning, idx));
    binround_accepts(r, binning.bin_size(), params.residual_offset)
}

pub fn is_feasible(
    stencil: &Stencil,
    binning: &Binning,
    idx: &[usize],
    params: &FeasibilityParams,
) -> bool {
    match params.method {
        Method::Epsilon => epsilon_feasible(stencil, binning, idx, params),
        Method::BinRound => binround_feasible(stencil, binning, idx, params),
    }
}

/// Dense feasibility of every subcube, shared by all cells of a chain.
///
/// Flat index is row-major with the first stencil argument most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityTable {
    arity: usize,
    bins: usize,
    bits: Vec<bool>,
}

impl FeasibilityTable {
    pub fn build(stencil: &Stencil, binning: &Binning, params: &FeasibilityParams) -> Self {
        let (arity, bins) = (stencil.arity(), binning.count());
        let bits = (0..bins.pow(arity as u32))
            .into_par_iter()
            .map(|flat| is_feasible(stencil, binning, &unflatten(flat, arity, bins), params))
            .collect();
        Self { arity, bins, bits }
    }

    pub fn build_sequential(
        stencil: &Stencil,
        binning: &Binning,
        params: &FeasibilityParams,
    ) -> Self {
        let (arity, bins) = (stencil.arity(), binning.count());
        let bits = (0..bins.pow(arity as u32))
            .map(|flat| is_feasible(stencil, binning, &unflatten(flat, arity, bins), params))
            .collect();
        Self { arity, bins, bits }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn get(&self, idx: &[usize]) -> bool {
        debug_assert_eq!(idx.len(), self.arity);
        let flat = idx.iter().fold(0, |acc, &i| acc * self.bins + i);
        self.bits[flat]
    }

    pub fn count_feasible(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Feasible index tuples in ascending order.
    pub fn feasible_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(flat, _)| unflatten(flat, self.arity, self.bins))
    }
}

fn unflatten(mut flat: usize, arity: usize, bins: usize) -> Vec<usize> {
    let mut idx = vec![0; arity];
    for slot in idx.iter_mut().rev() {
        *slot = flat % bins;
        flat /= bins;
    }
    idx
}

/// Semiring tensor for one chain cell.
///
/// Feasible entries become `S::feasible(owner value)`; the owner is the
/// variable `cell.owner`, or none for cells owning a hidden variable.
pub fn build_cell_tensor<S: Semiring>(
    table: &FeasibilityTable,
    binning: &Binning,
    cell: &CellSpec,
) -> Result<LabeledTensor<S>, TensorizeError> {
    if cell.vars.len() != table.arity {
        return Err(TensorizeError::ArityMismatch {
            cell: cell.vars.len(),
            stencil: table.arity,
        });
    }
    let owner_axis = cell.owner.map(|o| {
        cell.vars
            .iter()
            .position(|&v| v == o)
            .expect("owner is a cell variable")
    });
    let mut t = LabeledTensor::new(cell.vars.clone(), vec![table.bins; table.arity])
        .expect("cell variables are distinct");
    for idx in table.feasible_indices() {
        let value = S::feasible(owner_axis.map(|a| binning.center_unchecked(idx[a])));
        t.insert(&idx, value).expect("index within extents");
    }
    Ok(t)
}
