//! Command-line front end: argument parsing, file I/O and output formatting.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{self, bound_dim2, bound_highdim, conjectured_bound, f_of_n, Ratio, ThetaVariant};
use crate::covering::{self, certified_bound, verify_cover, Covering, VerifyMode};
use crate::delta::{delta_discrete, delta_monte_carlo};
use crate::measures::{DiscreteMeasure, SamplerMethod, SamplerSpec};
use crate::norms::NormSpec;
use crate::optimize::{maximize_weights, perturb_atoms};
use crate::{Error, Result};

pub const MAX_REPORT_N: u64 = 1_000_000;

#[derive(Debug, Parser, Serialize)]
#[command(name = "selfdist", version, about = "Averaged self-distance of measures on unit balls")]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; affects speed only.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write a run manifest describing this invocation.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact or Monte Carlo averaged self-distance.
    Delta(DeltaArgs),
    /// One closed-form upper bound.
    Bound(BoundArgs),
    /// Table of every bound per dimension.
    Report(ReportArgs),
    /// Search for measures with large self-distance.
    Optimize(OptimizeArgs),
    /// Check that a family of homothets covers the unit ball.
    VerifyCover(VerifyArgs),
    /// Bound certified by a covering for a given measure.
    Certify(CertifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DeltaArgs {
    #[arg(long)]
    pub norm: PathBuf,
    #[arg(long, conflicts_with = "sampler")]
    pub measure: Option<PathBuf>,
    #[arg(long, value_parser = ["vertex", "ball", "boundary"])]
    pub sampler: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pairs: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value = "eq1")]
    pub theta: String,
    #[arg(long, default_value = "optimal")]
    pub ratio: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub n_max: u64,
    /// Density bound used for the bound and f(n) columns.
    #[arg(long, default_value = "eq1")]
    pub theta: String,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub norm: PathBuf,
    /// JSON list of points, or a measure whose atoms are used.
    #[arg(long)]
    pub atoms: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub restarts: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: u64,
    #[arg(long)]
    pub seed: u64,
    /// Atom-position search, e.g. `rounds=100,step=0.1`.
    #[arg(long)]
    pub perturb: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cover: PathBuf,
    /// Grid spacing for exhaustive verification.
    #[arg(long, conflicts_with = "count")]
    pub grid: Option<f64>,
    /// Number of ball-uniform sample points.
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long)]
    pub measure: PathBuf,
}

/// Record of one invocation; re-running it reproduces the outputs exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments plus the parsed contents of every input file.
    pub inputs: Value,
    pub seed: Option<u64>,
    pub artifact_version: String,
    pub outputs: Vec<String>,
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub seed: Option<u64>,
    /// Input files read, with their parsed JSON.
    pub files: BTreeMap<String, Value>,
}

struct Inputs {
    files: BTreeMap<String, Value>,
}

impl Inputs {
    fn new() -> Self {
        Inputs { files: BTreeMap::new() }
    }

    fn read<T: for<'de> Deserialize<'de>>(&mut self, path: &Path) -> Result<T> {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        let parsed = serde_json::from_value(value.clone())?;
        self.files.insert(path.display().to_string(), value);
        Ok(parsed)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Executes a parsed command and renders its output.
pub fn execute(cli: &Cli) -> Result<Output> {
    let mut inputs = Inputs::new();
    let csv = cli.format == Format::Csv;
    if csv && !matches!(cli.command, Command::Report(_)) {
        return Err(Error::input("csv output is only available for `report`"));
    }
    let (text, seed) = match &cli.command {
        Command::Delta(a) => (cmd_delta(a, &mut inputs)?, a.seed),
        Command::Bound(a) => (cmd_bound(a)?, None),
        Command::Report(a) => (cmd_report(a, cli.format)?, None),
        Command::Optimize(a) => (cmd_optimize(a, &mut inputs)?, Some(a.seed)),
        Command::VerifyCover(a) => (cmd_verify(a, &mut inputs)?, a.seed),
        Command::Certify(a) => (cmd_certify(a, &mut inputs)?, None),
    };
    Ok(Output { text, seed, files: inputs.files })
}

fn cmd_delta(a: &DeltaArgs, inputs: &mut Inputs) -> Result<String> {
    let norm: NormSpec = inputs.read(&a.norm)?;
    let estimate = match (&a.measure, &a.sampler) {
        (Some(path), None) => {
            let m: DiscreteMeasure = inputs.read(path)?;
            delta_discrete(&norm, &m)?
        }
        (None, Some(method)) => {
            let seed = a.seed.ok_or_else(|| Error::input("--sampler requires --seed"))?;
            let pairs = a.pairs.ok_or_else(|| Error::input("--sampler requires --pairs"))?;
            let method: SamplerMethod = method.parse()?;
            delta_monte_carlo(&SamplerSpec::new(norm, method, seed)?, pairs)?
        }
        _ => return Err(Error::input("give exactly one of --measure or --sampler")),
    };
    to_json(&estimate)
}

fn cmd_bound(a: &BoundArgs) -> Result<String> {
    let variant: ThetaVariant = a.theta.parse()?;
    let ratio: Ratio = a.ratio.parse()?;
    let report = match a.n {
        2 => bound_dim2().1,
        n => bound_highdim(n, variant, ratio)?,
    };
    to_json(&report)
}

/// One row of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub theta_eq1: Option<f64>,
    pub theta_eq2: Option<f64>,
    pub theta_eq3: Option<f64>,
    pub theta_eq4: Option<f64>,
    pub r_opt: f64,
    pub bound_highdim_opt: f64,
    pub bound_highdim_simpl: f64,
    pub f_n: f64,
    pub conjecture_value: f64,
}

pub const REPORT_HEADER: &str = "n,theta_eq1,theta_eq2,theta_eq3,theta_eq4,r_opt,\
bound_highdim_opt,bound_highdim_simpl,f_n,conjecture_value";

/// Rows for `n = 2..=n_max`. The `n = 2` row carries the planar bounds:
/// the fixed-point value in the `opt` column and the mean-inequality value
/// in the `simpl` column.
pub fn report_rows(n_max: u64, variant: ThetaVariant) -> Result<Vec<ReportRow>> {
    if !(2..=MAX_REPORT_N).contains(&n_max) {
        return Err(Error::input(format!("--n-max must lie in 2..={MAX_REPORT_N}, got {n_max}")));
    }
    (2..=n_max)
        .into_par_iter()
        .map(|n| {
            if n == 2 {
                let (weak, refined) = bound_dim2();
                return Ok(ReportRow {
                    n,
                    theta_eq1: None,
                    theta_eq2: None,
                    theta_eq3: None,
                    theta_eq4: None,
                    r_opt: bounds::DIM2_RATIO,
                    bound_highdim_opt: refined.value,
                    bound_highdim_simpl: weak.value,
                    f_n: f_of_n(2, variant)?,
                    conjecture_value: conjectured_bound(2),
                });
            }
            let theta = |v| bounds::theta_n(n, v).map(Some);
            Ok(ReportRow {
                n,
                theta_eq1: theta(ThetaVariant::Eq1Optimized)?,
                theta_eq2: theta(ThetaVariant::Eq2Explicit)?,
                theta_eq3: theta(ThetaVariant::Eq3)?,
                theta_eq4: theta(ThetaVariant::Eq4)?,
                r_opt: bounds::optimal_r(n)?,
                bound_highdim_opt: bound_highdim(n, variant, Ratio::Optimal)?.value,
                bound_highdim_simpl: bound_highdim(n, variant, Ratio::Simplified)?.value,
                f_n: f_of_n(n, variant)?,
                conjecture_value: conjectured_bound(n),
            })
        })
        .collect()
}

/// Formats with 15 significant digits, positional notation where that stays
/// short and scientific otherwise.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

fn cmd_report(a: &ReportArgs, format: Format) -> Result<String> {
    let variant: ThetaVariant = a.theta.parse()?;
    let rows = report_rows(a.n_max, variant)?;
    match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let cell = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
            let mut out = String::from(REPORT_HEADER);
            out.push('\n');
            for r in rows {
                let cells = [
                    r.n.to_string(),
                    cell(r.theta_eq1),
                    cell(r.theta_eq2),
                    cell(r.theta_eq3),
                    cell(r.theta_eq4),
                    format_sig(r.r_opt),
                    format_sig(r.bound_highdim_opt),
                    format_sig(r.bound_highdim_simpl),
                    format_sig(r.f_n),
                    format_sig(r.conjecture_value),
                ];
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Parses `rounds=100,step=0.1`.
pub fn parse_perturb(spec: &str) -> Result<(u64, f64)> {
    let mut rounds = None;
    let mut step = None;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::input(format!("expected key=value in --perturb, got {part:?}")))?;
        let bad = |_| Error::input(format!("bad value in --perturb: {part:?}"));
        match key.trim() {
            "rounds" => rounds = Some(value.trim().parse::<u64>().map_err(|e| bad(e.to_string()))?),
            "step" => step = Some(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
            other => return Err(Error::input(format!("unknown --perturb key {other:?}"))),
        }
    }
    match (rounds, step) {
        (Some(r), Some(s)) => Ok((r, s)),
        _ => Err(Error::input("--perturb needs both rounds= and step=")),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AtomsFile {
    Points(Vec<Vec<f64>>),
    Measure(DiscreteMeasure),
}

fn cmd_optimize(a: &OptimizeArgs, inputs: &mut Inputs) -> Result<String> {
    let norm: NormSpec = inputs.read(&a.norm)?;
    let atoms = match inputs.read::<AtomsFile>(&a.atoms)? {
        AtomsFile::Points(p) => p,
        AtomsFile::Measure(m) => m.atoms().to_vec(),
    };
    let result = match &a.perturb {
        None => maximize_weights(&norm, &atoms, a.restarts, a.max_iters, a.seed)?,
        Some(spec) => {
            let (rounds, step) = parse_perturb(spec)?;
            let start = DiscreteMeasure::uniform(atoms)?;
            perturb_atoms(&norm, &start, rounds, step, a.seed)?
        }
    };
    to_json(&result)
}

fn cmd_verify(a: &VerifyArgs, inputs: &mut Inputs) -> Result<String> {
    let cover: Covering = inputs.read(&a.cover)?;
    let mode = match (a.grid, a.count) {
        (Some(resolution), None) => VerifyMode::Grid { resolution },
        (None, Some(count)) => VerifyMode::Sample {
            count,
            seed: a.seed.ok_or_else(|| Error::input("sample verification requires --seed"))?,
        },
        _ => return Err(Error::input("give exactly one of --grid or --count")),
    };
    to_json(&verify_cover(&cover, mode)?)
}

fn cmd_certify(a: &CertifyArgs, inputs: &mut Inputs) -> Result<String> {
    let cover: Covering = inputs.read(&a.cover)?;
    let measure: DiscreteMeasure = inputs.read(&a.measure)?;
    let partition = covering::partition_masses(&cover, &measure)?;
    let report = certified_bound(&cover, &measure)?;
    to_json(&json!({ "report": report, "masses": partition.masses }))
}

/// Runs the command line, writes outputs, and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(threads) = cli.threads {
        // Only the first configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match execute(&cli).and_then(|out| write_outputs(&cli, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("selfdist: {e}");
            e.exit_code()
        }
    }
}

fn write_outputs(cli: &Cli, out: Output) -> Result<()> {
    let mut outputs = Vec::new();
    match &cli.output {
        Some(path) => {
            fs::write(path, &out.text)?;
            outputs.push(path.display().to_string());
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.text.as_bytes())?;
            outputs.push("-".into());
        }
    }
    if let Some(path) = &cli.manifest {
        let manifest = manifest_for(cli, &out, outputs)?;
        fs::write(path, to_json(&manifest)?)?;
    }
    Ok(())
}

pub fn manifest_for(cli: &Cli, out: &Output, outputs: Vec<String>) -> Result<RunManifest> {
    let command = match &cli.command {
        Command::Delta(_) => "delta",
        Command::Bound(_) => "bound",
        Command::Report(_) => "report",
        Command::Optimize(_) => "optimize",
        Command::VerifyCover(_) => "verify-cover",
        Command::Certify(_) => "certify",
    };
    Ok(RunManifest {
        command: command.into(),
        inputs: json!({ "args": serde_json::to_value(cli)?, "files": out.files }),
        seed: out.seed,
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        outputs,
    })
}
