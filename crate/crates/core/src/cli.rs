//! Command-line front end: config loading, output writers, dispatch.
//!
//! Config files are flat TOML:
//!
//! ```toml
//! equation = "heat"
//! range = [0, 1]
//! bin_size = 0.05
//! cells = 8
//! method = "epsilon"
//! mode = "pass"
//! ```

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::grid::Binning;
use crate::pipeline::{self, Mode, PipelineError, PixelResult, Problem, DEFAULT_MAX_SOLUTIONS};
use crate::stencil::{Stencil, StencilError, StencilParams};
use crate::tensorize::{FeasibilityParams, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

const KEYS: &[&str] = &[
    "equation",
    "expression",
    "arity",
    "mu",
    "h",
    "D",
    "f",
    "reaction",
    "range",
    "bin_size",
    "cells",
    "method",
    "mode",
    "max_solutions_per_pixel",
    "boundaries",
    "hidden_equations",
    "out_dir",
    "epsilon",
    "residual_offset",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("invalid value for '{key}': {msg}")]
    Invalid { key: &'static str, msg: String },
}

fn invalid(key: &'static str, msg: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key,
        msg: msg.to_string(),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Threads(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Validated contents of a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub equation: String,
    pub expression: Option<String>,
    pub arity: usize,
    pub params: StencilParams,
    pub range: (f64, f64),
    pub bin_size: f64,
    pub cells: usize,
    pub method: Method,
    pub mode: Mode,
    pub max_solutions_per_pixel: usize,
    pub boundaries: Option<Vec<(f64, f64)>>,
    pub hidden_equations: bool,
    pub out_dir: PathBuf,
    pub epsilon: Option<f64>,
    pub residual_offset: f64,
}

fn real(table: &toml::Table, key: &'static str) -> Result<Option<f64>, ConfigError> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(v)) => Ok(Some(*v)),
        Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(other) => Err(invalid(
            key,
            format!("expected a number, got {}", other.type_str()),
        )),
    }
}

fn string(table: &toml::Table, key: &'static str) -> Result<Option<String>, ConfigError> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(invalid(
            key,
            format!("expected a string, got {}", other.type_str()),
        )),
    }
}

fn positive_int(table: &toml::Table, key: &'static str) -> Result<Option<usize>, ConfigError> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(v)) if *v > 0 => Ok(Some(*v as usize)),
        Some(toml::Value::Integer(v)) => Err(invalid(key, format!("must be positive, got {v}"))),
        Some(other) => Err(invalid(
            key,
            format!("expected an integer, got {}", other.type_str()),
        )),
    }
}

fn pair(v: &toml::Value, key: &'static str) -> Result<(f64, f64), ConfigError> {
    let num = |x: &toml::Value| match x {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => match (num(a), num(b)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(invalid(key, "expected two numbers")),
        },
        _ => Err(invalid(key, "expected a two-element list")),
    }
}

impl RunConfig {
    /// Parses config text; `line` numbers in errors are 1-based.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(1);
            ConfigError::Parse {
                line,
                msg: e.message().to_string(),
            }
        })?;
        if let Some(k) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }

        let equation = string(&table, "equation")?.ok_or(ConfigError::Missing("equation"))?;
        let range = pair(
            table.get("range").ok_or(ConfigError::Missing("range"))?,
            "range",
        )?;
        let bin_size = real(&table, "bin_size")?.ok_or(ConfigError::Missing("bin_size"))?;
        let cells = positive_int(&table, "cells")?.ok_or(ConfigError::Missing("cells"))?;
        let method = match string(&table, "method")? {
            Some(s) => s.parse().map_err(|e| invalid("method", e))?,
            None => Method::default(),
        };
        let mode = match string(&table, "mode")? {
            Some(s) => s.parse().map_err(|e| invalid("mode", e))?,
            None => Mode::default(),
        };
        let boundaries = match table.get("boundaries") {
            None => None,
            Some(v) => Some(
                v.as_array()
                    .ok_or_else(|| invalid("boundaries", "expected a list of [left, right] pairs"))?
                    .iter()
                    .map(|p| pair(p, "boundaries"))
                    .collect::<Result<_, _>>()?,
            ),
        };
        let hidden_equations = match table.get("hidden_equations") {
            None => false,
            Some(toml::Value::Boolean(b)) => *b,
            Some(_) => return Err(invalid("hidden_equations", "expected true or false")),
        };

        Ok(Self {
            equation,
            expression: string(&table, "expression")?,
            arity: positive_int(&table, "arity")?.unwrap_or(3),
            params: StencilParams {
                mu: real(&table, "mu")?,
                h: real(&table, "h")?,
                d: real(&table, "D")?,
                f: real(&table, "f")?,
                reaction: string(&table, "reaction")?,
            },
            range,
            bin_size,
            cells,
            method,
            mode,
            max_solutions_per_pixel: positive_int(&table, "max_solutions_per_pixel")?
                .unwrap_or(DEFAULT_MAX_SOLUTIONS),
            boundaries,
            hidden_equations,
            out_dir: string(&table, "out_dir")?
                .unwrap_or_else(|| "out".into())
                .into(),
            epsilon: real(&table, "epsilon")?,
            residual_offset: real(&table, "residual_offset")?.unwrap_or(0.0),
        })
    }

    pub fn stencil(&self) -> Result<Stencil, ConfigError> {
        if self.equation == "custom" {
            let src = self
                .expression
                .as_deref()
                .ok_or(ConfigError::Missing("expression"))?;
            return Stencil::parse(src, self.arity).map_err(|e| match e {
                StencilError::BadArity(_) => invalid("arity", e),
                _ => invalid("expression", e),
            });
        }
        Stencil::builtin(&self.equation, &self.params).map_err(|e| match e {
            StencilError::MissingParam { param, .. }
            | StencilError::NonPositiveParam { param, .. } => invalid(config_key(param), e),
            StencilError::UnknownEquation(_) => invalid("equation", e),
            _ => invalid("reaction", e),
        })
    }

    pub fn to_problem(&self) -> Result<Problem, ConfigError> {
        let binning = Binning::new(self.range.0, self.range.1, self.bin_size).map_err(|e| {
            use crate::grid::GridError::*;
            match e {
                NonPositiveBinSize(_) | NotMultiple { .. } => invalid("bin_size", e),
                _ => invalid("range", e),
            }
        })?;
        let feasibility = FeasibilityParams::new(self.method, self.epsilon, self.residual_offset)
            .map_err(|e| {
            use crate::tensorize::TensorizeError::*;
            match e {
                NonPositiveEpsilon(_) => invalid("epsilon", e),
                _ => invalid("residual_offset", e),
            }
        })?;
        let mut problem = Problem::new(self.stencil()?, binning, self.cells)
            .map_err(|e| invalid("cells", e))?
            .with_feasibility(feasibility)
            .with_mode(self.mode)
            .with_hidden_equations(self.hidden_equations)
            .with_max_solutions(self.max_solutions_per_pixel)
            .map_err(|e| invalid("max_solutions_per_pixel", e))?;
        if let Some(b) = &self.boundaries {
            problem = problem
                .with_boundaries(b)
                .map_err(|e| invalid("boundaries", e))?;
        }
        Ok(problem)
    }
}

fn config_key(param: &str) -> &'static str {
    match param {
        "mu" => "mu",
        "h" => "h",
        "D" | "d" => "D",
        "f" => "f",
        "reaction" => "reaction",
        _ => "equation",
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text)
}

/// `%.10g`-style rendering: 10 significant digits, trailing zeros dropped.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..10).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (9 - exp) as usize, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Shade {
    /// 1 for nonempty pixels.
    #[default]
    Binary,
    /// Tuple count per pixel, capped at 255.
    Counts,
}

pub fn pixel_image(r: &PixelResult, shade: Shade) -> String {
    let n = r.binning().count();
    let values: Vec<usize> = match (shade, r.solutions()) {
        (Shade::Counts, Some(sols)) => {
            let mut v = vec![0; n * n];
            for (&(a, b), s) in sols {
                v[a * n + b] = s.set.len().min(255);
            }
            v
        }
        _ => r.nonempty_map().into_iter().map(usize::from).collect(),
    };
    let maxval = values.iter().copied().max().unwrap_or(0).max(1);
    let mut out = format!("P2\n{n} {n}\n{maxval}\n");
    for row in values.chunks(n) {
        let line: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a P2 graymap back into `(width, height, maxval, values)`.
pub fn parse_pixel_image(text: &str) -> Option<(usize, usize, usize, Vec<usize>)> {
    let mut tok = text.split_ascii_whitespace();
    if tok.next()? != "P2" {
        return None;
    }
    let mut num = || tok.next()?.parse::<usize>().ok();
    let (w, h, maxval) = (num()?, num()?, num()?);
    let values: Vec<usize> = (0..w * h).map(|_| num()).collect::<Option<_>>()?;
    Some((w, h, maxval, values))
}

pub fn solutions_jsonl(r: &PixelResult) -> Result<String, PipelineError> {
    let sols = r.solutions().ok_or(PipelineError::WrongMode {
        expected: "pass or hybrid",
    })?;
    let centers = r.binning().centers();
    let mut out = String::new();
    for (&(a, b), s) in sols {
        let tuples: Vec<String> = s
            .set
            .iter()
            .map(|t| {
                let vals: Vec<String> = t.values().iter().map(|&v| format_real(v)).collect();
                format!("[{}]", vals.join(", "))
            })
            .collect();
        writeln!(
            out,
            "{{\"left\": {}, \"right\": {}, \"count\": {}, \"truncated\": {}, \"tuples\": [{}]}}",
            format_real(centers[a]),
            format_real(centers[b]),
            s.set.len(),
            s.truncated,
            tuples.join(", ")
        )
        .expect("write to string");
    }
    Ok(out)
}

/// Deterministic run summary (no timings).
pub fn summary(problem: &Problem, r: &PixelResult, command: &str) -> serde_json::Value {
    let n = problem.binning().count();
    let epsilon = pipeline::uniform_epsilon(problem);
    let (tuples, truncated, max_l2) = match r.solutions() {
        Some(sols) => {
            let centers = problem.binning().centers();
            let max_l2 = sols
                .iter()
                .flat_map(|(&(a, b), s)| {
                    let (l, rt) = (centers[a], centers[b]);
                    s.set
                        .iter()
                        .map(move |t| pipeline::modified_l2(t.values(), l, rt))
                })
                .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
            (
                Some(sols.values().map(|s| s.set.len()).sum::<usize>()),
                Some(sols.values().filter(|s| s.truncated).count()),
                max_l2,
            )
        }
        None => (None, None, None),
    };
    json!({
        "command": command,
        "equation": problem.stencil().name(),
        "residual": problem.stencil().source(),
        "mode": problem.mode().to_string(),
        "method": problem.feasibility().method().to_string(),
        "range": [problem.binning().lo(), problem.binning().hi()],
        "bin_size": problem.binning().bin_size(),
        "bins": n,
        "cells": problem.n_visible(),
        "hidden_equations": problem.hidden_equations(),
        "max_solutions_per_pixel": problem.max_solutions_per_pixel(),
        "pixels": problem.boundaries().map_or(n * n, |b| b.len()),
        "nonempty_pixels": r.nonempty_pixels(),
        "tuples": tuples,
        "truncated_pixels": truncated,
        "feasible_subcubes": r.stats().feasible_subcubes,
        "peak_frontier_labels": r.stats().peak_frontier_labels,
        "epsilon": epsilon,
        "max_modified_l2": max_l2,
        "l2_bound": epsilon.map(|e| pipeline::l2_bound(e, problem.n_visible())),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `pixels.pgm`, `solutions.jsonl` (solution modes only),
/// `summary.json` and `timing.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    problem: &Problem,
    r: &PixelResult,
    command: &str,
    shade: Shade,
    wall_seconds: f64,
) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    write_file(&dir.join("pixels.pgm"), &pixel_image(r, shade))?;
    if r.solutions().is_some() {
        write_file(&dir.join("solutions.jsonl"), &solutions_jsonl(r)?)?;
    }
    let mut s = serde_json::to_string_pretty(&summary(problem, r, command)).expect("serializable");
    s.push('\n');
    write_file(&dir.join("summary.json"), &s)?;
    write_file(
        &dir.join("timing.json"),
        &format!("{}\n", json!({ "wall_seconds": wall_seconds })),
    )
}

#[derive(Debug, Parser)]
#[command(
    name = "pixel-pass",
    version,
    about = "Steady states of discretized 1-D PDEs on a pixel grid of boundary values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Contract the chain and write outputs.
    Solve(CommonArgs),
    /// Brute-force enumeration with the same outputs.
    Oracle(CommonArgs),
    /// Compare solve against the oracle; exit 3 on any difference.
    Check(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    max_solutions: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Shade::Binary)]
    shade: Shade,
}

fn configure(args: &CommonArgs) -> Result<(RunConfig, Problem), ConfigError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(m) = &args.mode {
        cfg.mode = m.parse().map_err(|e| invalid("mode", e))?;
    }
    if let Some(m) = &args.method {
        cfg.method = m.parse().map_err(|e| invalid("method", e))?;
    }
    if let Some(d) = &args.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(m) = args.max_solutions {
        cfg.max_solutions_per_pixel = m;
    }
    let problem = cfg.to_problem()?;
    Ok((cfg, problem))
}

fn execute(command: &Command) -> Result<i32, RunError> {
    let (name, args) = match command {
        Command::Solve(a) => ("solve", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Check(a) => ("check", a),
    };
    let (cfg, problem) = configure(args)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| RunError::Threads(e.to_string()))?;

    pool.install(|| {
        let start = Instant::now();
        match name {
            "check" => {
                let fast = pipeline::solve(&problem)?;
                let slow = pipeline::brute_force_solve(&problem)?;
                if fast.same_pixels(&slow) {
                    println!("check: ok ({} nonempty pixels)", fast.nonempty_pixels());
                    Ok(EXIT_OK)
                } else {
                    println!(
                        "check: MISMATCH (solve {} vs oracle {} nonempty pixels)",
                        fast.nonempty_pixels(),
                        slow.nonempty_pixels()
                    );
                    Ok(EXIT_MISMATCH)
                }
            }
            _ => {
                let r = if name == "solve" {
                    pipeline::solve(&problem)?
                } else {
                    pipeline::brute_force_solve(&problem)?
                };
                let wall = start.elapsed().as_secs_f64();
                write_outputs(&cfg.out_dir, &problem, &r, name, args.shade, wall)?;
                println!(
                    "{name}: {}/{} pixels nonempty, outputs in {}",
                    r.nonempty_pixels(),
                    problem.binning().count().pow(2),
                    cfg.out_dir.display()
                );
                Ok(EXIT_OK)
            }
        }
    })
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
equation = "heat"
range = [0, 1]
bin_size = 0.05
cells = 8
method = "epsilon"
mode = "pass"
"#;

    #[test]
    fn heat_config() {
        let cfg = RunConfig::parse(HEAT).unwrap();
        let p = cfg.to_problem().unwrap();
        assert_eq!(p.binning().count(), 21);
        assert_eq!(p.n_visible(), 8);
        assert_eq!(p.mode(), Mode::Pass);
        assert_eq!(p.stencil().name(), "heat");
    }

    #[test]
    fn fisher_config() {
        let cfg = RunConfig::parse(
            "equation = \"fisher\"\nmu = 0.2\nh = 1\nrange = [0, 2]\nbin_size = 0.05\ncells = 16\nmethod = \"binround\"\n",
        )
        .unwrap();
        let p = cfg.to_problem().unwrap();
        assert_eq!(p.binning().count(), 41);
        assert_eq!(p.feasibility().method(), Method::BinRound);
        assert_eq!(p.mode(), Mode::Hybrid);
    }

    fn key_of(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { key, .. } => key.to_string(),
            ConfigError::Missing(k) => k.to_string(),
            ConfigError::UnknownKey(k) => k,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_key() {
        let bad = |text: &str| {
            RunConfig::parse(text)
                .and_then(|c| c.to_problem().map(|_| ()))
                .unwrap_err()
        };
        let base = "equation = \"heat\"\nrange = [0, 1]\ncells = 8\n";
        assert_eq!(key_of(bad(&format!("{base}bin_size = -1\n"))), "bin_size");
        assert_eq!(key_of(bad(&format!("{base}bin_size = 0.3\n"))), "bin_size");
        assert_eq!(key_of(bad(base)), "bin_size");
        assert_eq!(
            key_of(bad(&format!("{base}bin_size = 0.5\ncolour = 1\n"))),
            "colour"
        );
        assert_eq!(
            key_of(bad(&format!("{base}bin_size = 0.5\nmode = \"fast\"\n"))),
            "mode"
        );
        assert_eq!(
            key_of(bad(&format!(
                "{base}bin_size = 0.5\nboundaries = [[0.25, 0.5]]\n"
            ))),
            "boundaries"
        );
        assert_eq!(
            key_of(bad(
                "equation = \"fisher\"\nrange = [0, 1]\ncells = 8\nbin_size = 0.5\n"
            )),
            "mu"
        );
        assert_eq!(
            key_of(bad(
                "equation = \"custom\"\nrange = [0, 1]\ncells = 8\nbin_size = 0.5\n"
            )),
            "expression"
        );
        assert_eq!(
            key_of(bad(&format!("{base}bin_size = 0.5\nepsilon = 0\n"))),
            "epsilon"
        );
        assert_eq!(
            key_of(bad(&format!("{base}bin_size = 0.5\ncells = 0\n").replacen(
                "cells = 8\n",
                "",
                1
            ))),
            "cells"
        );
    }

    #[test]
    fn parse_error_reports_line() {
        match RunConfig::parse("equation = \"heat\"\nrange = [0, 1\nbin_size = 0.5\n").unwrap_err()
        {
            ConfigError::Parse { line, .. } => assert!((2..=3).contains(&line), "{line}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn custom_config() {
        let cfg = RunConfig::parse(
            "equation = \"custom\"\nexpression = \"up1 - u0\"\narity = 2\nrange = [0, 1]\nbin_size = 0.25\ncells = 3\nhidden_equations = true\nboundaries = [[0.5, 0.5]]\n",
        )
        .unwrap();
        let p = cfg.to_problem().unwrap();
        assert_eq!(p.stencil().arity(), 2);
        assert!(p.hidden_equations());
        assert_eq!(p.boundaries().unwrap().len(), 1);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(-0.0), "0");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(0.15000000000000002), "0.15");
        assert_eq!(format_real(std::f64::consts::PI), "3.141592654");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(1e-7), "1e-07");
        assert_eq!(format_real(12345678901.0), "1.23456789e+10");
        assert_eq!(format_real(0.0001), "0.0001");
        assert_eq!(format_real(1234567890.0), "1234567890");
    }

    #[test]
    fn image_round_trip() {
        let cfg = RunConfig::parse(
            "equation = \"bbm\"\nh = 0.5\nrange = [0, 1]\nbin_size = 0.25\ncells = 3\nmethod = \"binround\"\nmode = \"pass\"\n",
        )
        .unwrap();
        let p = cfg.to_problem().unwrap();
        let r = pipeline::solve(&p).unwrap();
        let img = pixel_image(&r, Shade::Binary);
        assert!(img.starts_with("P2\n5 5\n1\n"));
        let (w, h, maxval, vals) = parse_pixel_image(&img).unwrap();
        assert_eq!((w, h, maxval), (5, 5, 1));
        let map: Vec<bool> = vals.iter().map(|&v| v == 1).collect();
        assert_eq!(map, r.nonempty_map());
        let counts = pixel_image(&r, Shade::Counts);
        assert!(parse_pixel_image(&counts).is_some());
    }

    #[test]
    fn jsonl_records() {
        let cfg = RunConfig::parse(
            "equation = \"bbm\"\nh = 0.5\nrange = [0, 1]\nbin_size = 0.25\ncells = 3\nmethod = \"binround\"\nmode = \"pass\"\n",
        )
        .unwrap();
        let p = cfg.to_problem().unwrap();
        let r = pipeline::solve(&p).unwrap();
        let text = solutions_jsonl(&r).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            "{\"left\": 0, \"right\": 0, \"count\": 1, \"truncated\": false, \"tuples\": [[0, 0, 0]]}"
        );
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(
                v["count"].as_u64().unwrap() as usize,
                v["tuples"].as_array().unwrap().len()
            );
        }
        let pa = pipeline::solve(&p.with_mode(Mode::Pa)).unwrap();
        assert!(solutions_jsonl(&pa).is_err());
    }
}
