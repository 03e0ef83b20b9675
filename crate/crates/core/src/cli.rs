//! The `fracmax` command line.
//!
//! Exit codes: 0 on success, 1 when an asserted gate fails or an operation
//! fails at run time, 2 on a usage error (bad flags, unreadable or malformed
//! input, parameters a module refuses up front).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::capacity::{solve_capacity, CapacityProblemDocument};
use crate::error::{Error, Result};
use crate::experiments::{resolved_config, run_experiment, NAMES};
use crate::geometry::{build_cantor, build_gap_set, porosity_check};
use crate::grid::{DomainMask, Grid, NodeSet, RadiusField, ScalarField};
use crate::maxop::{local_maximal, local_maximal_fast};
use crate::report::{emit_report, ExperimentReport};
use crate::seminorm::{lp_norm, sobolev_norm, weighted_seminorm, SeminormParams};
use crate::weights::Weight;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "fracmax", version, about = "Local maximal operators, weighted fractional seminorms and nonlocal capacities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local maximal function of a field
    Maxop {
        #[command(subcommand)]
        op: MaxopCmd,
    },
    /// Weighted fractional seminorm of a field
    Seminorm {
        #[command(subcommand)]
        op: SeminormCmd,
    },
    /// Relative or global capacity
    Capacity {
        #[command(subcommand)]
        op: CapacityCmd,
    },
    /// Gap sets, Cantor sets and porosity
    Geometry {
        #[command(subcommand)]
        op: GeometryCmd,
    },
    /// Named end-to-end experiments
    Experiments {
        #[command(subcommand)]
        op: ExperimentsCmd,
    },
}

#[derive(Debug, Subcommand)]
enum MaxopCmd {
    Run {
        /// field document
        #[arg(long)]
        f: PathBuf,
        /// zero | const:c | boundary | holder:alpha,L | lipschitz:L | file:path
        #[arg(long)]
        radius: String,
        #[arg(long, conflicts_with = "reference")]
        fast: bool,
        /// brute force over every radius (default)
        #[arg(long)]
        reference: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SeminormCmd {
    Eval {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        /// const:c | pow:eps=e | powdist:eps=e,set=<file>
        #[arg(long)]
        weight: String,
        #[arg(long)]
        radius: Option<String>,
        /// output path; `json` or `-` prints to stdout
        #[arg(long, default_value = "json")]
        out: String,
    },
}

#[derive(Debug, Subcommand)]
enum CapacityCmd {
    Solve {
        /// problem document: grid, inside, e, [h], s, p, weight, [radius]
        #[arg(long)]
        problem: PathBuf,
        /// output path; `json` or `-` prints to stdout
        #[arg(long, default_value = "json")]
        out: String,
        /// where to write φ; defaults to `<problem>.minimizer.json`
        #[arg(long)]
        minimizer: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GeometryCmd {
    Build {
        /// gapset:M=2,N=4 | cantor:level=6
        #[arg(long)]
        kind: String,
        /// `lo,hi,h` with h possibly written as 2^-k or 3^-k
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    Porosity {
        /// set document: a field whose positive values mark the set
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        kappa: f64,
        /// comma-separated radii; default 8h, 16h, ... up to diam/2
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentsCmd {
    /// Prints the experiment names
    List,
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    name: String,
    /// TOML or JSON, chosen by extension
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `--key value` pairs overriding the config
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    overrides: Vec<String>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::Parse(_)
            | Error::Io { .. }
            | Error::InadmissibleParameters(_)
            | Error::ResolutionInsufficient(_)
            | Error::ProblemTooLarge(_)
            | Error::MaskMismatch => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs one operation and returns the
/// exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Maxop {
            op: MaxopCmd::Run { f, radius, fast, out, .. },
        } => {
            let f = ScalarField::read_json(&f)?;
            let r = RadiusField::parse_mode(&radius, f.mask())?;
            let m = if fast { local_maximal_fast(&f, &r)? } else { local_maximal(&f, &r)? };
            m.values.write_json(&out)?;
            Ok(true)
        }
        Command::Seminorm {
            op: SeminormCmd::Eval { f, s, p, weight, radius, out },
        } => {
            let f = ScalarField::read_json(&f)?;
            let w = Weight::parse(&weight, f.grid().dim())?;
            let mut params = SeminormParams::new(s, p, w)?;
            if let Some(spec) = radius {
                params = params.with_radius(RadiusField::parse_mode(&spec, f.mask())?);
            }
            let body = json!({
                "seminorm": weighted_seminorm(&f, &params)?,
                "lp_norm": lp_norm(&f, p)?,
                "sobolev_norm": sobolev_norm(&f, &params)?,
            });
            write_output(&out, &body)?;
            Ok(true)
        }
        Command::Capacity {
            op: CapacityCmd::Solve { problem, out, minimizer },
        } => {
            let doc: CapacityProblemDocument = serde_json::from_str(&read(&problem)?).map_err(Error::from)?;
            let prob = doc.into_problem()?;
            let sol = solve_capacity(&prob)?;
            let mpath = minimizer.unwrap_or_else(|| problem.with_extension("minimizer.json"));
            sol.minimizer.write_json(&mpath)?;
            let body = json!({
                "value": sol.value,
                "converged": sol.converged,
                "iterations": sol.iterations,
                "minimizer_file": mpath.display().to_string(),
            });
            write_output(&out, &body)?;
            Ok(sol.converged)
        }
        Command::Geometry {
            op: GeometryCmd::Build { kind, grid, out },
        } => {
            let set = build_set(&kind, grid.as_deref())?;
            set.write_json(&out)?;
            Ok(true)
        }
        Command::Geometry {
            op: GeometryCmd::Porosity { set, kappa, scales },
        } => {
            let field = ScalarField::read_json(&set)?;
            let members = field.mask().nodes().iter().copied().filter(|&i| field.get(i) > 0.0);
            let e = NodeSet::from_indices(field.grid().len(), members)?;
            let scales = scales.unwrap_or_else(|| default_scales(&e, field.grid()));
            let rep = porosity_check(&e, field.grid(), kappa, &scales)?;
            println!("{}", serde_json::to_string_pretty(&rep).map_err(Error::from)?);
            Ok(rep.holds)
        }
        Command::Experiments { op: ExperimentsCmd::List } => {
            for n in NAMES {
                println!("{n}");
            }
            Ok(true)
        }
        Command::Experiments { op: ExperimentsCmd::Run(args) } => run(args),
    }
}

fn run(mut args: RunArgs) -> Outcome {
    // clap stops at the first override, so the run's own flags may follow it
    let mut rest = Vec::new();
    let mut it = std::mem::take(&mut args.overrides).into_iter();
    while let Some(tok) = it.next() {
        let (key, inline) = match tok.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (tok.clone(), None),
        };
        if matches!(key.as_str(), "--out" | "--config" | "--seed") {
            let v = inline
                .or_else(|| it.next())
                .ok_or_else(|| Failure::Usage(format!("{key} needs a value")))?;
            match key.as_str() {
                "--out" => args.out = v.into(),
                "--config" => args.config = Some(v.into()),
                _ => args.seed = Some(v.parse().map_err(|_| Failure::Usage(format!("--seed: not an integer: '{v}'")))?),
            }
        } else {
            rest.push(tok);
        }
    }
    args.overrides = rest;
    let defaults = resolved_config(&args.name, &json!({}))?;
    let mut params = match &args.config {
        Some(path) => load_config(path)?,
        None => Map::new(),
    };
    for (k, v) in parse_overrides(&args.overrides, &defaults)? {
        params.insert(k, v);
    }
    if let Some(seed) = args.seed {
        if defaults.get("seed").is_some() {
            params.insert("seed".into(), json!(seed));
        }
    }
    let params = Value::Object(params);
    let resolved = resolved_config(&args.name, &params)?;
    let seed = resolved.get("seed").and_then(Value::as_u64).or(args.seed).unwrap_or(DEFAULT_SEED);
    let start = Instant::now();
    let report = run_experiment(&args.name, &params)?;
    emit_report(&report, &args.out, &resolved, seed, start.elapsed())?;
    for g in report.gates() {
        println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    Ok(report.passed())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_output(out: &str, body: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(body)?;
    if out == "json" || out == "-" {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(out, text).map_err(|e| Error::io(out, e))
    }
}

/// Reads a config file; `.toml` is TOML, anything else JSON.
pub fn load_config(path: &Path) -> Result<Map<String, Value>> {
    let text = read(path)?;
    let value: Value = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        let t: toml::Value = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t)?
    } else {
        serde_json::from_str(&text)?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(Error::Parse(format!("{}: config must be a table", path.display()))),
    }
}

/// Turns `--key value` pairs into JSON. Values are read as JSON when they
/// parse as such, comma lists become arrays, and a scalar given for a key
/// whose default is a list becomes a one-element list.
pub fn parse_overrides(tokens: &[String], defaults: &Value) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    let mut it = tokens.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| Error::Parse(format!("expected --key, found '{flag}'")))?;
        let (key, raw) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::Parse(format!("--{key} needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        let mut v = scalar_or_list(&raw);
        if defaults.get(&key).is_some_and(Value::is_array) && !v.is_array() {
            v = Value::Array(vec![v]);
        }
        out.push((key, v));
    }
    Ok(out)
}

fn scalar_or_list(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|t| scalar_or_list(t.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Parses `2^-10`, `3^-7` or a plain number.
pub fn parse_real(text: &str) -> Result<f64> {
    let text = text.trim();
    if let Some((b, e)) = text.split_once('^') {
        let b: f64 = b.parse().map_err(|_| Error::Parse(format!("bad base in '{text}'")))?;
        let e: i32 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in '{text}'")))?;
        return Ok(b.powi(e));
    }
    text.parse().map_err(|_| Error::Parse(format!("not a number: '{text}'")))
}

fn parse_grid(spec: &str) -> Result<(f64, f64, f64)> {
    match spec.split(',').map(parse_real).collect::<Result<Vec<_>>>()?.as_slice() {
        &[lo, hi, h] => Ok((lo, hi, h)),
        _ => Err(Error::Parse(format!("grid '{spec}': expected lo,hi,h"))),
    }
}

fn kind_params(rest: &str) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    for kv in rest.split(',').filter(|t| !t.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, found '{kv}'")))?;
        m.insert(k.trim().to_string(), json!(parse_real(v)?));
    }
    Ok(m)
}

fn uint(m: &Map<String, Value>, key: &str) -> Result<u32> {
    let v = m
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("missing {key}=")))?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::Parse(format!("{key} must be a nonnegative integer")));
    }
    Ok(v as u32)
}

/// Builds the set named by `kind` and returns its indicator as a field.
/// Gap sets default to the grid (-8, 9) with h = 2^-(MN+2); Cantor sets
/// live on [0, 1] and default to (-2, 3) with h = 3^-(level+1).
pub fn build_set(kind: &str, grid: Option<&str>) -> Result<ScalarField> {
    let (name, rest) = kind.split_once(':').unwrap_or((kind, ""));
    let m = kind_params(rest)?;
    let (mask, set) = match name {
        "gapset" => {
            let (mm, nn) = (uint(&m, "M")?, uint(&m, "N")?);
            let (lo, hi, h) = match grid {
                Some(g) => parse_grid(g)?,
                None => (-8.0, 9.0, 2f64.powi(-(mm as i32 * nn as i32 + 2))),
            };
            let mask = DomainMask::open_interval(lo, hi, h)?;
            let gap = build_gap_set(mm, nn, &mask)?;
            (mask, gap.set)
        }
        "cantor" => {
            let level = uint(&m, "level")?;
            let (lo, hi, h) = match grid {
                Some(g) => parse_grid(g)?,
                None => (-2.0, 3.0, 3f64.powi(-(level as i32 + 1))),
            };
            let mask = DomainMask::open_interval(lo, hi, h)?;
            let set = build_cantor(level, mask.grid(), 0.0, 1.0)?;
            (mask, set)
        }
        _ => return Err(Error::Parse(format!("unknown set kind '{name}'; use gapset:M=..,N=.. or cantor:level=.."))),
    };
    if set.universe() != mask.grid().len() {
        return Err(Error::MaskMismatch);
    }
    let values = set.flags().iter().map(|&b| f64::from(u8::from(b))).collect();
    ScalarField::new(&mask, values)
}

fn default_scales(e: &NodeSet, grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    let (lo, hi) = e
        .iter()
        .map(|i| grid.coord(i)[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    // below a few cells a sampled set is never porous
    let top = ((hi - lo) / 2.0).max(8.0 * h);
    std::iter::successors(Some(8.0 * h), |r| Some(2.0 * r)).take_while(|&r| r <= top).collect()
}

