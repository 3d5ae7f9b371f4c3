//! End-to-end solves over the boundary-pair grid, plus the brute-force oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{Semiring, SolutionSet, Tuple};
use crate::contract::{
    sweep_contract, ChainPlan, ContractError, LabeledTensor, SweepOptions, VarId,
};
use crate::grid::Binning;
use crate::stencil::Stencil;
use crate::tensorize::{
    build_cell_tensor, epsilon_for, is_feasible, FeasibilityParams, FeasibilityTable, Method,
    TensorizeError,
};

pub const DEFAULT_MAX_SOLUTIONS: usize = 10_000;

/// Largest `bins^variables` the brute-force oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("cells must be at least 2, got {0}")]
    TooFewVisible(usize),
    #[error("max_solutions_per_pixel must be at least 1")]
    ZeroMaxSolutions,
    #[error("boundary value {0} is not a bin center")]
    NotABinCenter(f64),
    #[error("brute force over {vars} variables with {bins} bins exceeds the enumeration limit")]
    TooLarge { bins: usize, vars: usize },
    #[error("operation needs a {expected} result")]
    WrongMode { expected: &'static str },
    #[error("unknown mode '{0}' (expected pa, pass or hybrid)")]
    UnknownMode(String),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Tensorize(#[from] TensorizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Boolean pixel array only.
    Pa,
    /// Solution sets for every pixel in one sweep.
    Pass,
    /// Boolean prepass, then solution sets for the nonempty pixels.
    #[default]
    Hybrid,
}

impl FromStr for Mode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pa" => Ok(Mode::Pa),
            "pass" => Ok(Mode::Pass),
            "hybrid" => Ok(Mode::Hybrid),
            other => Err(PipelineError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Pa => "pa",
            Mode::Pass => "pass",
            Mode::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    stencil: Stencil,
    binning: Binning,
    n_visible: usize,
    feasibility: FeasibilityParams,
    mode: Mode,
    max_solutions_per_pixel: usize,
    /// Boundary pairs as bin indices.
    boundaries: Option<BTreeSet<(usize, usize)>>,
    hidden_equations: bool,
}

impl Problem {
    /// A problem with default feasibility (epsilon), mode (hybrid) and cap.
    pub fn new(
        stencil: Stencil,
        binning: Binning,
        n_visible: usize,
    ) -> Result<Self, PipelineError> {
        if n_visible < 2 {
            return Err(PipelineError::TooFewVisible(n_visible));
        }
        Ok(Self {
            stencil,
            binning,
            n_visible,
            feasibility: FeasibilityParams::default(),
            mode: Mode::default(),
            max_solutions_per_pixel: DEFAULT_MAX_SOLUTIONS,
            boundaries: None,
            hidden_equations: false,
        })
    }

    pub fn with_feasibility(mut self, params: FeasibilityParams) -> Self {
        self.feasibility = params;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_hidden_equations(mut self, on: bool) -> Self {
        self.hidden_equations = on;
        self
    }

    pub fn with_max_solutions(mut self, cap: usize) -> Result<Self, PipelineError> {
        if cap == 0 {
            return Err(PipelineError::ZeroMaxSolutions);
        }
        self.max_solutions_per_pixel = cap;
        Ok(self)
    }

    /// Restricts reported pixels to the given `(left, right)` values, which
    /// must be exact bin centers.
    pub fn with_boundaries(mut self, pairs: &[(f64, f64)]) -> Result<Self, PipelineError> {
        let idx = |v: f64| {
            self.binning
                .exact_index_of(v)
                .ok_or(PipelineError::NotABinCenter(v))
        };
        let set = pairs
            .iter()
            .map(|&(l, r)| Ok((idx(l)?, idx(r)?)))
            .collect::<Result<_, PipelineError>>()?;
        self.boundaries = Some(set);
        Ok(self)
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn feasibility(&self) -> &FeasibilityParams {
        &self.feasibility
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn max_solutions_per_pixel(&self) -> usize {
        self.max_solutions_per_pixel
    }

    pub fn boundaries(&self) -> Option<&BTreeSet<(usize, usize)>> {
        self.boundaries.as_ref()
    }

    pub fn hidden_equations(&self) -> bool {
        self.hidden_equations
    }

    pub fn plan(&self) -> Result<ChainPlan, PipelineError> {
        Ok(ChainPlan::new(
            self.n_visible,
            self.stencil.arity(),
            self.hidden_equations,
        )?)
    }

    fn reports(&self, l: usize, r: usize) -> bool {
        self.boundaries.as_ref().is_none_or(|b| b.contains(&(l, r)))
    }
}

/// Solutions found at one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSolutions {
    pub set: SolutionSet,
    /// More tuples existed than the per-pixel cap.
    pub truncated: bool,
}

pub type PixelMap = BTreeMap<(usize, usize), PixelSolutions>;

#[derive(Debug, Clone, PartialEq)]
pub enum PixelPayload {
    /// Row-major `left * bins + right`.
    Boolean(Vec<bool>),
    /// Nonempty pixels keyed by `(left index, right index)`.
    Solutions(PixelMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub feasible_subcubes: usize,
    pub peak_frontier_labels: usize,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelResult {
    binning: Binning,
    mode: Mode,
    n_visible: usize,
    payload: PixelPayload,
    stats: SolveStats,
}

impl PixelResult {
    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn payload(&self) -> &PixelPayload {
        &self.payload
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn solutions(&self) -> Option<&PixelMap> {
        match &self.payload {
            PixelPayload::Solutions(m) => Some(m),
            PixelPayload::Boolean(_) => None,
        }
    }

    pub fn is_nonempty(&self, left: usize, right: usize) -> bool {
        match &self.payload {
            PixelPayload::Boolean(v) => v[left * self.binning.count() + right],
            PixelPayload::Solutions(m) => m.contains_key(&(left, right)),
        }
    }

    /// Row-major nonemptiness of every pixel.
    pub fn nonempty_map(&self) -> Vec<bool> {
        let n = self.binning.count();
        match &self.payload {
            PixelPayload::Boolean(v) => v.clone(),
            PixelPayload::Solutions(m) => {
                let mut v = vec![false; n * n];
                for &(l, r) in m.keys() {
                    v[l * n + r] = true;
                }
                v
            }
        }
    }

    pub fn nonempty_pixels(&self) -> usize {
        self.nonempty_map().iter().filter(|&&b| b).count()
    }

    /// Whether both results report the same pixels and tuples.
    pub fn same_pixels(&self, other: &PixelResult) -> bool {
        self.binning == other.binning && self.payload == other.payload
    }
}

fn restrict_cells<S: Semiring>(
    cells: Vec<LabeledTensor<S>>,
    var: VarId,
    keep: &[bool],
) -> Result<Vec<LabeledTensor<S>>, ContractError> {
    cells
        .into_iter()
        .map(|t| {
            if t.labels().contains(&var) {
                t.restrict(var, keep)
            } else {
                Ok(t)
            }
        })
        .collect()
}

struct Prepared {
    plan: ChainPlan,
    table: FeasibilityTable,
}

fn prepare(problem: &Problem) -> Result<Prepared, PipelineError> {
    let plan = problem.plan()?;
    let table = FeasibilityTable::build(&problem.stencil, &problem.binning, &problem.feasibility);
    Ok(Prepared { plan, table })
}

fn cell_tensors<S: Semiring>(
    p: &Prepared,
    binning: &Binning,
) -> Result<Vec<LabeledTensor<S>>, PipelineError> {
    p.plan
        .cells()
        .iter()
        .map(|c| build_cell_tensor(&p.table, binning, c).map_err(Into::into))
        .collect()
}

fn boolean_sweep(problem: &Problem, p: &Prepared) -> Result<(Vec<bool>, usize), PipelineError> {
    let n = problem.binning.count();
    let cells = cell_tensors::<bool>(p, &problem.binning)?;
    let out = sweep_contract(&cells, &p.plan, SweepOptions::default())?;
    let mut map = vec![false; n * n];
    for (idx, _) in out.tensor.iter() {
        if problem.reports(idx[0], idx[1]) {
            map[idx[0] * n + idx[1]] = true;
        }
    }
    Ok((map, out.peak_labels))
}

/// Solution-set sweep with `u_1` and `u_n` restricted to the kept bins.
fn set_sweep(
    problem: &Problem,
    p: &Prepared,
    base: &[LabeledTensor<SolutionSet>],
    left_keep: &[bool],
    right_keep: &[bool],
) -> Result<(PixelMap, usize), PipelineError> {
    let [u1, un] = p.plan.exposed();
    let cells = restrict_cells(base.to_vec(), u1, left_keep)?;
    let cells = restrict_cells(cells, un, right_keep)?;
    let cap = problem.max_solutions_per_pixel;
    // One spare tuple per entry tells a pixel that hit the cap from one that
    // had exactly `cap` solutions.
    let opts = SweepOptions {
        reverse: false,
        entry_cap: Some(cap + 1),
    };
    let out = sweep_contract(&cells, &p.plan, opts)?;
    let mut pixels = BTreeMap::new();
    for (idx, set) in out.tensor.iter() {
        if !problem.reports(idx[0], idx[1]) {
            continue;
        }
        let mut set = set.clone();
        let truncated = set.len() > cap;
        set.truncate_to(cap);
        pixels.insert((idx[0], idx[1]), PixelSolutions { set, truncated });
    }
    Ok((pixels, out.peak_labels))
}

fn filter_masks(problem: &Problem) -> (Vec<bool>, Vec<bool>) {
    let n = problem.binning.count();
    match &problem.boundaries {
        None => (vec![true; n], vec![true; n]),
        Some(pairs) => {
            let (mut l, mut r) = (vec![false; n], vec![false; n]);
            for &(a, b) in pairs {
                l[a] = true;
                r[b] = true;
            }
            (l, r)
        }
    }
}

/// Runs the problem in its configured mode.
pub fn solve(problem: &Problem) -> Result<PixelResult, PipelineError> {
    let p = prepare(problem)?;
    let n = problem.binning.count();
    let mut stats = SolveStats {
        feasible_subcubes: p.table.count_feasible(),
        ..SolveStats::default()
    };
    let payload = match problem.mode {
        Mode::Pa => {
            let (map, peak) = boolean_sweep(problem, &p)?;
            stats.peak_frontier_labels = peak;
            stats.sweeps = 1;
            PixelPayload::Boolean(map)
        }
        Mode::Pass => {
            let base = cell_tensors::<SolutionSet>(&p, &problem.binning)?;
            let (lk, rk) = filter_masks(problem);
            let (pixels, peak) = set_sweep(problem, &p, &base, &lk, &rk)?;
            stats.peak_frontier_labels = peak;
            stats.sweeps = 1;
            PixelPayload::Solutions(pixels)
        }
        Mode::Hybrid => {
            let (map, peak) = boolean_sweep(problem, &p)?;
            let base = cell_tensors::<SolutionSet>(&p, &problem.binning)?;
            // one restricted sweep per nonempty left boundary
            let rows: Vec<(usize, Vec<bool>)> = (0..n)
                .filter_map(|l| {
                    let rights = map[l * n..(l + 1) * n].to_vec();
                    rights.iter().any(|&b| b).then_some((l, rights))
                })
                .collect();
            let results = rows
                .par_iter()
                .map(|(l, rights)| {
                    let mut left = vec![false; n];
                    left[*l] = true;
                    set_sweep(problem, &p, &base, &left, rights)
                })
                .collect::<Result<Vec<_>, _>>()?;
            stats.sweeps = 1 + results.len();
            stats.peak_frontier_labels = results.iter().map(|r| r.1).fold(peak, usize::max);
            PixelPayload::Solutions(results.into_iter().flat_map(|r| r.0).collect())
        }
    };
    Ok(PixelResult {
        binning: problem.binning,
        mode: problem.mode,
        n_visible: problem.n_visible,
        payload,
        stats,
    })
}

struct Enumeration<'a> {
    problem: &'a Problem,
    plan: &'a ChainPlan,
    /// Cells to check once the variable at each depth is assigned.
    ready: &'a [Vec<usize>],
    centers: &'a [f64],
    visible: &'a [VarId],
    exposed: [VarId; 2],
    assign: Vec<usize>,
    found: BTreeMap<(usize, usize), BTreeSet<Tuple>>,
}

impl Enumeration<'_> {
    fn descend(&mut self, depth: usize) {
        let [u1, un] = self.exposed;
        if depth == self.assign.len() {
            let (l, r) = (self.assign[u1], self.assign[un]);
            if self.problem.reports(l, r) {
                let t: Vec<f64> = self
                    .visible
                    .iter()
                    .map(|&v| self.centers[self.assign[v]])
                    .collect();
                self.found.entry((l, r)).or_default().insert(Tuple::from(t));
            }
            return;
        }
        for b in 0..self.centers.len() {
            self.assign[depth] = b;
            let p = self.problem;
            let ok = self.ready[depth].iter().all(|&ci| {
                let idx: Vec<usize> = self.plan.cells()[ci]
                    .vars
                    .iter()
                    .map(|&v| self.assign[v])
                    .collect();
                is_feasible(&p.stencil, &p.binning, &idx, &p.feasibility)
            });
            if ok {
                self.descend(depth + 1);
            }
        }
    }
}

/// Exhaustive enumeration of every chain assignment, testing each cell with
/// the stencil directly.
pub fn brute_force_solve(problem: &Problem) -> Result<PixelResult, PipelineError> {
    let plan = problem.plan()?;
    let bins = problem.binning.count();
    let vars = plan.n_vars();
    if (bins as f64).powi(vars as i32) > BRUTE_FORCE_LIMIT {
        return Err(PipelineError::TooLarge { bins, vars });
    }
    // cells become checkable once their highest variable is assigned
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); vars];
    for (ci, c) in plan.cells().iter().enumerate() {
        ready[*c.vars.iter().max().unwrap()].push(ci);
    }
    let centers = problem.binning.centers();
    let visible = plan.visible_vars();
    let [u1, un] = plan.exposed();

    let mut search = Enumeration {
        problem,
        plan: &plan,
        ready: &ready,
        centers: &centers,
        visible: &visible,
        exposed: [u1, un],
        assign: vec![0; vars],
        found: BTreeMap::new(),
    };
    search.descend(0);
    let found = search.found;
    let mut feasible_subcubes = 0;
    if let Some(c) = plan.cells().first() {
        let k = c.vars.len();
        feasible_subcubes = (0..bins.pow(k as u32))
            .filter(|&flat| {
                let idx: Vec<usize> = (0..k)
                    .map(|a| flat / bins.pow((k - 1 - a) as u32) % bins)
                    .collect();
                is_feasible(
                    &problem.stencil,
                    &problem.binning,
                    &idx,
                    &problem.feasibility,
                )
            })
            .count();
    }

    let payload = match problem.mode {
        Mode::Pa => {
            let mut map = vec![false; bins * bins];
            for &(l, r) in found.keys() {
                map[l * bins + r] = true;
            }
            PixelPayload::Boolean(map)
        }
        Mode::Pass | Mode::Hybrid => {
            let cap = problem.max_solutions_per_pixel;
            PixelPayload::Solutions(
                found
                    .into_iter()
                    .map(|(k, tuples)| {
                        let truncated = tuples.len() > cap;
                        let set = tuples.into_iter().take(cap).collect();
                        (k, PixelSolutions { set, truncated })
                    })
                    .collect(),
            )
        }
    };
    Ok(PixelResult {
        binning: problem.binning,
        mode: problem.mode,
        n_visible: problem.n_visible,
        payload,
        stats: SolveStats {
            feasible_subcubes,
            peak_frontier_labels: 0,
            sweeps: 0,
        },
    })
}

/// Boolean view of a solution-set result.
pub fn project_boolean(r: &PixelResult) -> Result<PixelResult, PipelineError> {
    if r.solutions().is_none() {
        return Err(PipelineError::WrongMode {
            expected: "pass or hybrid",
        });
    }
    Ok(PixelResult {
        binning: r.binning,
        mode: Mode::Pa,
        n_visible: r.n_visible,
        payload: PixelPayload::Boolean(r.nonempty_map()),
        stats: r.stats,
    })
}

/// Euclidean distance from `values` to the straight line joining `left`
/// (first cell) and `right` (last cell).
pub fn modified_l2(values: &[f64], left: f64, right: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return values.first().map_or(0.0, |v| (v - left).abs());
    }
    let step = (right - left) / (n - 1) as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = v - (left + step * i as f64);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `eps * ceil(n/2)^(5/2)`.
pub fn l2_bound(epsilon: f64, n: usize) -> f64 {
    epsilon * (n.div_ceil(2) as f64).powf(2.5)
}

/// The epsilon threshold if it is the same for every subcube.
///
/// True for an explicit override, and for stencils whose gradient bound does
/// not depend on position (such as the heat stencil).
pub fn uniform_epsilon(problem: &Problem) -> Option<f64> {
    if problem.feasibility.method() != Method::Epsilon {
        return None;
    }
    let k = problem.stencil.arity();
    let bins = problem.binning.count();
    let eps = |j: usize| {
        epsilon_for(
            &problem.stencil,
            &problem.binning,
            &vec![j; k],
            &problem.feasibility,
        )
    };
    let e0 = eps(0);
    (0..bins).all(|j| eps(j) == e0).then_some(e0)
}
