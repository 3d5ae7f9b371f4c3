//! Discrete steady-state conditions.
//!
//! A [`Stencil`] is a residual `f(u_{i-1}, u_i, u_{i+1})` (or `f(u_i, u_{i+1})`
//! for two-point stencils) whose zero set is the local steady-state
//! condition. Besides point evaluation it can bound `|grad f|` over a
//! subcube, which drives the epsilon feasibility test.

pub mod expr;
pub mod interval;

use std::fmt;

use thiserror::Error;

use crate::grid::Subcube;
use expr::Expr;
use interval::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StencilError {
    #[error(
        "unknown equation '{0}' (expected heat, fisher, bbm, sine_gordon or reaction_diffusion)"
    )]
    UnknownEquation(String),
    #[error("equation '{equation}' requires parameter '{param}'")]
    MissingParam {
        equation: &'static str,
        param: &'static str,
    },
    #[error("parameter '{param}' must be positive, got {value}")]
    NonPositiveParam { param: &'static str, value: f64 },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("two-point stencil references um1 at position {pos}")]
    Um1InTwoPoint { pos: usize },
    #[error("reaction term may only reference u0")]
    ReactionNotLocal,
    #[error("stencil arity must be 2 or 3, got {0}")]
    BadArity(usize),
}

/// Named coefficients for the builtin equations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StencilParams {
    /// Intrinsic growth rate (Fisher).
    pub mu: Option<f64>,
    /// Spatial step.
    pub h: Option<f64>,
    /// Diffusion coefficient (reaction-diffusion).
    pub d: Option<f64>,
    /// Constant source term (reaction-diffusion).
    pub f: Option<f64>,
    /// Reaction term `R(u0)` as expression text (reaction-diffusion).
    pub reaction: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Heat,
    Fisher {
        mu: f64,
        h: f64,
    },
    Bbm {
        h: f64,
    },
    SineGordon {
        h: f64,
    },
    ReactionDiffusion {
        d: f64,
        h: f64,
        f: f64,
        reaction: Expr,
    },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    name: String,
    arity: usize,
    form: Form,
    expr: Expr,
    gradient: Vec<Expr>,
    source: String,
}

fn require(
    equation: &'static str,
    param: &'static str,
    v: Option<f64>,
) -> Result<f64, StencilError> {
    v.ok_or(StencilError::MissingParam { equation, param })
}

fn positive(param: &'static str, v: f64) -> Result<f64, StencilError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(StencilError::NonPositiveParam { param, value: v })
    }
}

impl Stencil {
    /// Builds one of the named equations.
    ///
    /// | name                 | residual                                         |
    /// |----------------------|--------------------------------------------------|
    /// | `heat`               | `c - 2m + a`                                     |
    /// | `fisher`             | `(c - 2m + a)/h^2 + mu*m*(1 - m)`                |
    /// | `bbm`                | `((c - m)/h) * (1 + m)` (two-point)              |
    /// | `sine_gordon`        | `sin(m) - (c - 2m + a)/h^2`                      |
    /// | `reaction_diffusion` | `(D/h^2)(c - 2m + a) + R(m) + f`                 |
    pub fn builtin(name: &str, params: &StencilParams) -> Result<Self, StencilError> {
        let (form, arity, source) = match name {
            "heat" => (Form::Heat, 3, "up1 - 2*u0 + um1".to_string()),
            "fisher" => {
                let mu = require("fisher", "mu", params.mu)?;
                let h = positive("h", require("fisher", "h", params.h)?)?;
                let src = format!("(up1 - 2*u0 + um1)/{h:?}^2 + {mu:?}*u0*(1 - u0)");
                (Form::Fisher { mu, h }, 3, src)
            }
            "bbm" => {
                let h = positive("h", require("bbm", "h", params.h)?)?;
                (Form::Bbm { h }, 2, format!("(up1 - u0)/{h:?}*(1 + u0)"))
            }
            "sine_gordon" => {
                let h = positive("h", require("sine_gordon", "h", params.h)?)?;
                let src = format!("sin(u0) - (up1 - 2*u0 + um1)/{h:?}^2");
                (Form::SineGordon { h }, 3, src)
            }
            "reaction_diffusion" => {
                let eq = "reaction_diffusion";
                let d = require(eq, "D", params.d)?;
                let h = positive("h", require(eq, "h", params.h)?)?;
                let f = params.f.unwrap_or(0.0);
                let text = params
                    .reaction
                    .as_deref()
                    .ok_or(StencilError::MissingParam {
                        equation: eq,
                        param: "reaction",
                    })?;
                let reaction = expr::parse(text, 3)?;
                if reaction.references(0) || reaction.references(2) {
                    return Err(StencilError::ReactionNotLocal);
                }
                let src = format!("{d:?}/{h:?}^2*(up1 - 2*u0 + um1) + ({text}) + {f:?}");
                (Form::ReactionDiffusion { d, h, f, reaction }, 3, src)
            }
            other => return Err(StencilError::UnknownEquation(other.to_string())),
        };
        let expr = expr::parse(&source, arity)?;
        Ok(Self::assemble(name.to_string(), arity, form, expr, source))
    }

    /// Builds a stencil from residual expression text.
    pub fn parse(source: &str, arity: usize) -> Result<Self, StencilError> {
        let expr = expr::parse(source, arity)?;
        Ok(Self::assemble(
            "custom".to_string(),
            arity,
            Form::Custom,
            expr,
            source.to_string(),
        ))
    }

    fn assemble(name: String, arity: usize, form: Form, expr: Expr, source: String) -> Self {
        let gradient = (0..arity).map(|slot| expr.derivative(slot)).collect();
        Self {
            name,
            arity,
            form,
            expr,
            gradient,
            source,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Position of the variable this stencil's cell contributes to tuples.
    pub fn owner_offset(&self) -> usize {
        if self.arity == 3 {
            1
        } else {
            0
        }
    }

    /// Expression text equivalent to the residual.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Residual at a point; `args` has length [`arity`](Self::arity).
    pub fn residual(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        match &self.form {
            Form::Heat => {
                let (a, m, c) = (args[0], args[1], args[2]);
                c - 2.0 * m + a
            }
            Form::Fisher { mu, h } => {
                let (a, m, c) = (args[0], args[1], args[2]);
                (c - 2.0 * m + a) / (h * h) + mu * m * (1.0 - m)
            }
            Form::Bbm { h } => {
                let (m, c) = (args[0], args[1]);
                (c - m) / h * (1.0 + m)
            }
            Form::SineGordon { h } => {
                let (a, m, c) = (args[0], args[1], args[2]);
                m.sin() - (c - 2.0 * m + a) / (h * h)
            }
            Form::ReactionDiffusion { d, h, f, reaction } => {
                let (a, m, c) = (args[0], args[1], args[2]);
                d / (h * h) * (c - 2.0 * m + a) + reaction.eval(args) + f
            }
            Form::Custom => self.expr.eval(args),
        }
    }

    /// Encloses each partial derivative over the subcube.
    pub fn gradient_enclosure(&self, sub: &Subcube) -> Vec<Interval> {
        debug_assert_eq!(sub.dim(), self.arity);
        let boxes: Vec<Interval> = sub.bounds().map(|(lo, hi)| Interval::new(lo, hi)).collect();
        self.gradient
            .iter()
            .map(|g| g.eval_interval(&boxes))
            .collect()
    }

    /// Upper bound on `sup |grad f|_2` over the subcube.
    pub fn gradient_bound(&self, sub: &Subcube) -> f64 {
        let sq: f64 = self
            .gradient_enclosure(sub)
            .iter()
            .map(|iv| {
                let m = iv.mag();
                m * m
            })
            .sum();
        if sq.is_nan() {
            f64::INFINITY
        } else {
            sq.sqrt().next_up()
        }
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.source)
    }
}
