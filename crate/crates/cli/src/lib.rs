//! Command-line interface for the comb recovery toolkit.
//!
//! Subcommands: `analyze`, `erase`, `recover (dra | ls | oracle)`,
//! `restriction (exact | empirical | generic-set)`, and `sweep`. Exit codes:
//! 0 on success, 1 on a domain error, 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use combrec_core::harness::{emit_plot_data, run_sweep, write_csv, Caps, ExperimentConfig};
use combrec_core::{
    bourgain_generic_set, brute_force_unique, decompose, dra_recover, empirical_cpq, erase,
    exact_c22_with_cap, ls_support_search, sample_erasure_set, uncertainty_report,
    CoefficientSet, EqualMassConstraint, Grid, LatticeSet, LsOptions, ObservedSpectrum,
    OracleFamily, Signal, Spectrum,
};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "combrec",
    version,
    about = "Dirac comb analysis and recovery from partially erased spectra on Z_N^d"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a signal into a comb and report its uncertainty product.
    Analyze(AnalyzeArgs),
    /// Drop a set of frequencies from a spectrum.
    Erase(EraseArgs),
    /// Reconstruct a comb from an observed spectrum.
    #[command(subcommand)]
    Recover(RecoverCommand),
    /// Restriction constants and generic frequency sets.
    #[command(subcommand)]
    Restriction(RestrictionCommand),
    /// Run a deterministic experiment sweep from a config file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Signal JSON file ({"N", "d", "values": [[re, im], ...]}).
    #[arg(long)]
    input: PathBuf,
    /// Effective-support exponent.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Value-clustering tolerance for the decomposition.
    #[arg(long, default_value_t = 0.0)]
    decompose_tol: f64,
    /// Spectrum-support tolerance.
    #[arg(long, default_value_t = 1e-9)]
    support_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EraseArgs {
    /// Spectrum JSON file (same dense format as signals).
    #[arg(long)]
    input: PathBuf,
    /// Erasure set as a JSON array of coordinate tuples.
    #[arg(long, conflicts_with_all = ["size", "seed"])]
    set: Option<PathBuf>,
    /// Sample a uniform erasure set of this size instead.
    #[arg(long, requires = "seed")]
    size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RecoverCommand {
    /// Direct rounding against a known coefficient set.
    Dra {
        /// Observed-spectrum JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Coefficient set JSON ({"values": [[re, im], ...]}, optional
        /// "delta" and "M").
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares search over candidate supports.
    Ls {
        #[arg(long)]
        input: PathBuf,
        /// Candidate support size.
        #[arg(long)]
        k: usize,
        /// Search all sizes up to k instead of exactly k.
        #[arg(long)]
        all_sizes: bool,
        /// Cap on the number of candidate supports.
        #[arg(long)]
        cap: Option<u64>,
        /// Required ratio between runner-up and best residuals.
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive enumeration of consistent combs.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        max_gamma: usize,
        /// Constrain candidates to this effective mass at exponent --mass-p.
        #[arg(long, requires = "mass_p")]
        mass: Option<f64>,
        #[arg(long, requires = "mass")]
        mass_p: Option<f64>,
        /// Cap on enumerated candidates.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RestrictionCommand {
    /// Exact (2,2) constant from the sampled-transform singular values.
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Frequency set as a JSON array of coordinate tuples.
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical lower bound for a (p, q) constant.
    Empirical {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniformly random frequency set of size ceil(N^(2d/q)).
    GenericSet {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Trial CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Per-erasure-size plot-data CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Success-curve SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Summary JSON (also printed to stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Parse arguments and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn execute(command: Command) -> Result<(), String> {
    match command {
        Command::Analyze(args) => analyze(args),
        Command::Erase(args) => run_erase(args),
        Command::Recover(command) => recover(command),
        Command::Restriction(command) => restriction(command),
        Command::Sweep(args) => sweep(args),
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_set(path: &Path, grid: Grid) -> Result<LatticeSet, String> {
    let value: serde_json::Value =
        serde_json::from_str(&read_file(path)?).map_err(|e| e.to_string())?;
    let rows = value
        .as_array()
        .ok_or_else(|| format!("{}: expected a JSON array of coordinate tuples", path.display()))?;
    let mut coords = Vec::with_capacity(rows.len());
    for row in rows {
        let tuple = row
            .as_array()
            .ok_or_else(|| format!("{}: each entry must be a coordinate tuple", path.display()))?
            .iter()
            .map(|c| {
                c.as_i64()
                    .ok_or_else(|| format!("{}: coordinates must be integers", path.display()))
            })
            .collect::<Result<Vec<i64>, String>>()?;
        coords.push(tuple);
    }
    LatticeSet::from_coords(grid, &coords).map_err(|e| e.to_string())
}

fn parse_coefficient_set(path: &Path) -> Result<CoefficientSet, String> {
    let value: serde_json::Value =
        serde_json::from_str(&read_file(path)?).map_err(|e| e.to_string())?;
    let entries = value
        .get("values")
        .and_then(|v| v.as_array())
        .ok_or_else(|| format!("{}: expected {{\"values\": [[re, im], ...]}}", path.display()))?;
    let mut values = Vec::with_capacity(entries.len());
    for entry in entries {
        let pair = entry
            .as_array()
            .filter(|pair| pair.len() == 2)
            .ok_or_else(|| format!("{}: each value must be an [re, im] pair", path.display()))?;
        let re = pair[0].as_f64().ok_or("coefficient parts must be numbers")?;
        let im = pair[1].as_f64().ok_or("coefficient parts must be numbers")?;
        values.push(Complex64::new(re, im));
    }
    let delta = value.get("delta").and_then(|v| v.as_f64());
    let m = value.get("M").and_then(|v| v.as_f64());
    match (delta, m) {
        (Some(delta), Some(m)) => {
            CoefficientSet::with_parameters(&values, delta, m).map_err(|e| e.to_string())
        }
        _ => CoefficientSet::new(&values).map_err(|e| e.to_string()),
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), String> {
    let signal = Signal::from_json(&read_file(&args.input)?).map_err(|e| e.to_string())?;
    let comb = decompose(&signal, args.decompose_tol).map_err(|e| e.to_string())?;
    let report =
        uncertainty_report(&comb, args.p, None, args.support_tol).map_err(|e| e.to_string())?;
    let triple = &report.effective;
    let output = serde_json::json!({
        "gamma": comb.gamma(),
        "delta": comb.delta(),
        "M": comb.m_bound(),
        "p": report.p,
        "effective": {
            "weight": [triple.weight.re, triple.weight.im],
            "support": triple.support.coord_rows(),
            "mass": triple.mass,
        },
        "sigma_size": report.sigma.len(),
        "product": report.product,
        "lower_bound": report.lower_bound,
        "holds": report.holds,
        "comb": serde_json::from_str::<serde_json::Value>(&comb.to_json()).unwrap(),
    });
    emit(&output.to_string(), args.out.as_deref())
}

fn run_erase(args: EraseArgs) -> Result<(), String> {
    let spectrum = Spectrum::from_json(&read_file(&args.input)?).map_err(|e| e.to_string())?;
    let grid = spectrum.grid();
    let erased = match (&args.set, args.size) {
        (Some(path), None) => parse_set(path, grid)?,
        (None, Some(size)) => {
            sample_erasure_set(grid, size, args.seed.expect("clap enforces --seed"))
                .map_err(|e| e.to_string())?
        }
        _ => return Err("exactly one of --set or --size/--seed is required".into()),
    };
    let observed = erase(&spectrum, &erased).map_err(|e| e.to_string())?;
    emit(&observed.to_json(), args.out.as_deref())
}

fn recover(command: RecoverCommand) -> Result<(), String> {
    let caps = Caps::default().with_env_override();
    match command {
        RecoverCommand::Dra { input, coeffs, out } => {
            let observed =
                ObservedSpectrum::from_json(&read_file(&input)?).map_err(|e| e.to_string())?;
            let coefficients = parse_coefficient_set(&coeffs)?;
            let outcome = dra_recover(&observed, &coefficients).map_err(|e| e.to_string())?;
            emit(&outcome.to_json(), out.as_deref())
        }
        RecoverCommand::Ls { input, k, all_sizes, cap, separation, out } => {
            let observed =
                ObservedSpectrum::from_json(&read_file(&input)?).map_err(|e| e.to_string())?;
            let options = LsOptions {
                all_sizes_up_to: all_sizes,
                candidate_cap: cap.unwrap_or(caps.support_search) as u128,
                separation_factor: separation,
                ..LsOptions::default()
            };
            let outcome = ls_support_search(&observed, k, &options).map_err(|e| e.to_string())?;
            emit(&outcome.to_json(), out.as_deref())
        }
        RecoverCommand::Oracle { input, coeffs, max_gamma, mass, mass_p, cap, out } => {
            let observed =
                ObservedSpectrum::from_json(&read_file(&input)?).map_err(|e| e.to_string())?;
            let coefficients = parse_coefficient_set(&coeffs)?;
            let mut family = OracleFamily::new(coefficients, max_gamma)
                .with_cap(cap.unwrap_or(caps.enumeration) as u128);
            if let (Some(mass), Some(p)) = (mass, mass_p) {
                family = family.with_equal_mass(EqualMassConstraint::new(p, mass));
            }
            let found = brute_force_unique(&observed, &family).map_err(|e| e.to_string())?;
            let combs: Vec<serde_json::Value> = found
                .consistent
                .iter()
                .map(|c| serde_json::from_str(&c.to_json()).unwrap())
                .collect();
            let output = serde_json::json!({
                "consistent": combs,
                "count": found.consistent.len(),
                "candidates": found.candidates.to_string(),
                "near_mass_boundary": found.near_mass_boundary,
            });
            emit(&output.to_string(), out.as_deref())
        }
    }
}

fn restriction(command: RestrictionCommand) -> Result<(), String> {
    match command {
        RestrictionCommand::Exact { n, d, set, cap, out } => {
            let grid = Grid::new(n, d).map_err(|e| e.to_string())?;
            let sigma = parse_set(&set, grid)?;
            let estimate = exact_c22_with_cap(
                &sigma,
                cap.unwrap_or(combrec_core::restriction::DEFAULT_LINALG_CAP),
            )
            .map_err(|e| e.to_string())?;
            emit(&estimate.to_json(), out.as_deref())
        }
        RestrictionCommand::Empirical { n, d, set, p, q, trials, seed, out } => {
            let grid = Grid::new(n, d).map_err(|e| e.to_string())?;
            let sigma = parse_set(&set, grid)?;
            let estimate = empirical_cpq(&sigma, p, q, trials, seed).map_err(|e| e.to_string())?;
            emit(&estimate.to_json(), out.as_deref())
        }
        RestrictionCommand::GenericSet { n, d, q, seed, out } => {
            let grid = Grid::new(n, d).map_err(|e| e.to_string())?;
            let sigma = bourgain_generic_set(grid, q, seed).map_err(|e| e.to_string())?;
            emit(&serde_json::to_string(&sigma).unwrap(), out.as_deref())
        }
    }
}

fn sweep(args: SweepArgs) -> Result<(), String> {
    let config =
        ExperimentConfig::from_json(&read_file(&args.config)?).map_err(|e| e.to_string())?;
    let output = run_sweep(&config).map_err(|e| e.to_string())?;
    emit(&write_csv(&output.records), Some(&args.out))?;
    if args.plot.is_some() || args.svg.is_some() {
        let plot = emit_plot_data(&output.records);
        if let Some(path) = &args.plot {
            emit(&plot.csv, Some(path))?;
        }
        if let Some(path) = &args.svg {
            emit(&plot.svg, Some(path))?;
        }
    }
    let summary = serde_json::to_string(&output.summary).unwrap();
    if let Some(path) = &args.summary {
        emit(&summary, Some(path))?;
    }
    println!("{summary}");
    Ok(())
}
