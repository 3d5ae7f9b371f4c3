//! Pixel-array solver for steady states of discretized 1-D PDEs.
//!
//! The pipeline: bin every chain variable ([`grid`]), turn the local
//! finite-difference condition ([`stencil`]) into a feasibility tensor per
//! cell ([`tensorize`]), and contract the chain of cell tensors over a
//! semiring ([`algebra`], [`contract`]). Over the Boolean semiring this yields
//! the pixel array of boundary pairs that admit a steady state; over the
//! solution-set semiring every pixel also carries the steady states
//! themselves ([`pipeline`]).

pub mod algebra;
pub mod cli;
pub mod contract;
pub mod grid;
pub mod pipeline;
pub mod stencil;
pub mod tensorize;

pub use algebra::{Count, Semiring, SemiringKind, SolutionSet, Tuple};
pub use contract::{ChainPlan, ContractError, LabeledTensor, SweepOptions};
pub use grid::{Binning, GridError, Subcube};
pub use pipeline::{Mode, PipelineError, PixelResult, Problem};
pub use stencil::{Stencil, StencilError, StencilParams};
pub use tensorize::{FeasibilityParams, FeasibilityTable, Method, TensorizeError};
