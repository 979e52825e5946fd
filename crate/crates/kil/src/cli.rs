//! Command-line front end: configuration resolution and CSV/JSON artifacts
//! for every experiment the library supports.
//!
//! Configuration comes from flags, optionally backed by a flat `key=value`
//! file (`--config`); flags override file values, file values override
//! defaults, and unknown file keys are rejected. Every CSV artifact carries a
//! header row and a trailing `# config:` comment with the fully resolved
//! configuration sorted by key, so a run can be reproduced from its output
//! alone. Identical configurations produce byte-identical artifacts: nothing
//! here depends on thread scheduling, hash-map order, or locale.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::density;
use crate::error::{Error, Result};
use crate::geometry::{self, Region};
use crate::interpolate::{self, ScalarField};
use crate::kernels::{self, Kernel};
use crate::rates::{self, Target};
use crate::sampling;
use crate::spectral;

/// Trial functions drawn per `(level, theta)` pair in `bernstein` runs.
const BERNSTEIN_TRIALS: u32 = 5;

/// Quadrature level used by refinement studies: `n_max` plus this offset.
const RATES_QUAD_OFFSET: u32 = 3;

// ---------------------------------------------------------------------------
// command line grammar
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "kil",
    version,
    about = "Numerical laboratory for kernel-based approximation with finitely smooth kernels",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a refinement study, fit the error-decay exponent, and classify it
    Rates(CommonArgs),
    /// Build grid-offset density profiles, one CSV per level
    Density(CommonArgs),
    /// Eigenvalues of the kernel integral operator and their decay slope
    Spectrum(CommonArgs),
    /// Power-norm ratios of random trial functions across grid levels
    Bernstein(CommonArgs),
    /// Smallest Gram eigenvalue against separation, per grid level
    Gram(CommonArgs),
    /// Fit one interpolant and dump its values on the quadrature nodes
    Interp(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rates(_) => "rates",
            Command::Density(_) => "density",
            Command::Spectrum(_) => "spectrum",
            Command::Bernstein(_) => "bernstein",
            Command::Gram(_) => "gram",
            Command::Interp(_) => "interp",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Rates(a)
            | Command::Density(a)
            | Command::Spectrum(a)
            | Command::Bernstein(a)
            | Command::Gram(a)
            | Command::Interp(a) => a,
        }
    }
}

/// Flags shared by every subcommand; unset values fall back to the config
/// file and then to the defaults named here.
#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// Flat key=value configuration file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Kernel descriptor, e.g. wendland-hat:1 or matern-three-half:0.5 [default: wendland-hat]
    #[arg(long)]
    kernel: Option<String>,
    /// Region descriptor: interval:a,b | box:x0,y0,w,h | disk:cx,cy,r | lshape:x0,y0,s [default: interval:0,1]
    #[arg(long)]
    region: Option<String>,
    /// Target descriptor: abs-power:g,c | tv-power:p | kernel-translate:x | exp | sin:w | zero [default: exp]
    #[arg(long)]
    target: Option<String>,
    /// Grid levels, e.g. 3..7 or 3,4,5 or 4 [default: 3..6]
    #[arg(long)]
    n: Option<String>,
    /// Quadrature level for spectrum, bernstein, density, and interp;
    /// rates always integrate at their finest level plus 3 [default: 8]
    #[arg(long = "quad-level")]
    quad_level: Option<u32>,
    /// Ridge regularizer added to the Gram diagonal [default: 0]
    #[arg(long)]
    ridge: Option<f64>,
    /// Density offsets per axis [default: 8 in 1D, 3 in 2D]
    #[arg(long)]
    nb: Option<usize>,
    /// Comma-separated smoothness indices for bernstein runs [default: 0.6,1,1.3]
    #[arg(long)]
    theta: Option<String>,
    /// Base seed for randomized trial functions [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (density appends _n<level>; rates also write
    /// a .json summary next to it) [default: stdout]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Spectral-model cache directory; overrides KIL_CACHE_DIR [default: no cache]
    #[arg(long = "cache-dir", value_name = "DIR")]
    cache_dir: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// configuration resolution
// ---------------------------------------------------------------------------

/// Config-file keys mirroring the flags.
const KNOWN_KEYS: &[&str] = &[
    "kernel",
    "region",
    "target",
    "n",
    "quad-level",
    "ridge",
    "nb",
    "theta",
    "seed",
    "output",
    "cache-dir",
];

/// A fully resolved experiment: every field has its final value and the
/// descriptors are canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub kernel: String,
    pub region: String,
    pub target: String,
    pub levels: Vec<u32>,
    pub quad_level: u32,
    pub ridge: f64,
    pub nb: usize,
    pub thetas: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidInput(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidInput(format!(
                "{}:{}: unknown configuration key {key:?}",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn typed_from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match file.get(key) {
        None => Ok(None),
        Some(text) => text.parse::<T>().map(Some).map_err(|_| {
            Error::InvalidInput(format!("config key {key}: bad value {text:?}"))
        }),
    }
}

/// Parse a level argument: `a..b` (inclusive), a comma list, or one
/// level. The result is ascending and duplicate-free.
fn parse_levels(text: &str) -> Result<Vec<u32>> {
    let bad = |why: &str| Error::InvalidInput(format!("level argument {text:?}: {why}"));
    let mut levels: Vec<u32> = if let Some((a, b)) = text.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| bad("bad start"))?;
        let hi: u32 = b.trim().parse().map_err(|_| bad("bad end"))?;
        if lo > hi {
            return Err(bad("start exceeds end"));
        }
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|part| part.trim().parse::<u32>().map_err(|_| bad("bad level")))
            .collect::<Result<_>>()?
    };
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() {
        return Err(bad("empty"));
    }
    if levels[0] == 0 {
        return Err(bad("levels start at 1"));
    }
    Ok(levels)
}

/// Canonical rendering of a level list (round-trips through
/// [`parse_levels`]).
fn levels_descriptor(levels: &[u32]) -> String {
    let contiguous = levels.len() >= 2
        && levels.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}..{}", levels[0], levels[levels.len() - 1])
    } else {
        levels
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Merge flags over the config file over the defaults, canonicalize the
/// descriptors, and validate everything that does not need a fitted model.
fn resolve_config(
    command: &'static str,
    args: &CommonArgs,
) -> Result<(ExperimentConfig, Kernel, Region, Target)> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let pick = |flag: &Option<String>, key: &str| -> Option<String> {
        flag.clone().or_else(|| file.get(key).cloned())
    };

    let region_text =
        pick(&args.region, "region").unwrap_or_else(|| "interval:0,1".to_string());
    let region = Region::parse(&region_text)?;
    let dim = region.dimension();

    let kernel_text =
        pick(&args.kernel, "kernel").unwrap_or_else(|| "wendland-hat".to_string());
    let kernel = Kernel::parse(&kernel_text, dim)?;

    let target_text = pick(&args.target, "target").unwrap_or_else(|| "exp".to_string());
    let target = Target::parse(&target_text)?;

    let levels = parse_levels(&pick(&args.n, "n").unwrap_or_else(|| "3..6".to_string()))?;

    let quad_level = args
        .quad_level
        .or(typed_from_file(&file, "quad-level")?)
        .unwrap_or(8);
    if quad_level < 1 {
        return Err(Error::InvalidInput("quadrature level must be at least 1".into()));
    }

    let ridge = args.ridge.or(typed_from_file(&file, "ridge")?).unwrap_or(0.0);
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ridge must be a finite nonnegative number, got {ridge}"
        )));
    }

    let nb = args
        .nb
        .or(typed_from_file(&file, "nb")?)
        .unwrap_or(if dim == 1 { 8 } else { 3 });

    let thetas = match pick(&args.theta, "theta") {
        Some(text) => {
            let parsed: Result<Vec<f64>> = text
                .split(',')
                .map(|part| {
                    part.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!("theta list: bad number {part:?}"))
                    })
                })
                .collect();
            parsed?
        }
        None => vec![0.6, 1.0, 1.3],
    };

    let seed = args.seed.or(typed_from_file(&file, "seed")?).unwrap_or(0);

    let output = args
        .output
        .clone()
        .or_else(|| file.get("output").map(PathBuf::from));

    let cache_dir = args
        .cache_dir
        .clone()
        .or_else(|| file.get("cache-dir").map(PathBuf::from))
        .or_else(|| std::env::var_os("KIL_CACHE_DIR").map(PathBuf::from));

    let config = ExperimentConfig {
        command,
        kernel: kernel.descriptor(),
        region: region.descriptor(),
        target: target.descriptor(),
        levels,
        quad_level,
        ridge,
        nb,
        thetas,
        seed,
        output,
        cache_dir,
    };
    Ok((config, kernel, region, target))
}

impl ExperimentConfig {
    /// The trailing CSV comment: every resolved setting, sorted by key.
    fn comment(&self) -> String {
        let path_or_dash =
            |p: &Option<PathBuf>| p.as_deref().map_or("-".to_string(), |v| v.display().to_string());
        let mut entries = BTreeMap::new();
        entries.insert("cache-dir", path_or_dash(&self.cache_dir));
        entries.insert("command", self.command.to_string());
        entries.insert("kernel", self.kernel.clone());
        entries.insert("n", levels_descriptor(&self.levels));
        entries.insert("nb", self.nb.to_string());
        entries.insert("output", path_or_dash(&self.output));
        entries.insert("quad-level", self.quad_level.to_string());
        entries.insert("region", self.region.clone());
        entries.insert("ridge", self.ridge.to_string());
        entries.insert("seed", self.seed.to_string());
        entries.insert("target", self.target.clone());
        entries.insert("theta", join_floats(&self.thetas));
        let body = entries
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        format!("# config: {body}\n")
    }
}

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------

/// Write through a temporary in the same directory and rename into place, so
/// readers never observe a half-written artifact.
fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&parent)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Write to the path, or stream to stdout when no path was given.
fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => atomic_write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// The per-level variant of a density output path: `out.csv` → `out_n4.csv`.
fn level_path(path: &Path, n: u32) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned());
    let name = match (stem, ext) {
        (Some(stem), Some(ext)) => format!("{stem}_n{n}.{ext}"),
        (Some(stem), None) => format!("{stem}_n{n}"),
        _ => format!("density_n{n}.csv"),
    };
    path.with_file_name(name)
}

fn coordinate_headers(prefix: &str, dim: usize) -> String {
    if dim == 1 {
        prefix.to_string()
    } else {
        (1..=dim)
            .map(|i| format!("{prefix}{i}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn join_row(xs: &[f64]) -> String {
    xs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Tabulate a field at every point of a set, rejecting non-finite values.
fn checked_values(field: &dyn ScalarField, pts: &geometry::PointSet) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(pts.len());
    for p in pts.iter() {
        let v = field.value(p);
        if !v.is_finite() {
            return Err(Error::EvaluationFailure {
                point: p.to_vec(),
                value: v,
            });
        }
        out.push(v);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

/// JSON summary of a rate study. NaN statistics (the exact-reproduction
/// case) serialize as null.
#[derive(Serialize)]
struct RatesSummary<'a> {
    kernel: &'a str,
    region: &'a str,
    target: &'a str,
    beta: Option<f64>,
    stderr: Option<f64>,
    theta_hat: Option<f64>,
    regime: &'a str,
    flags: &'a [String],
}

fn number_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn run_rates(
    config: &ExperimentConfig,
    kernel: &Kernel,
    region: &Region,
    target: &Target,
) -> Result<()> {
    let levels = &config.levels;
    let contiguous = levels.windows(2).all(|w| w[1] == w[0] + 1);
    if !contiguous {
        return Err(Error::InvalidInput(format!(
            "rate studies need a contiguous level range, got {}",
            levels_descriptor(levels)
        )));
    }
    let samples = rates::refinement_study(
        target,
        kernel,
        region,
        levels[0],
        levels[levels.len() - 1],
        config.ridge,
        RATES_QUAD_OFFSET,
    )?;
    let fit = rates::fit_rate(&samples, kernel.tau)?;
    let report = rates::classify(&fit, kernel.tau, target);

    let mut csv = String::from("n,num_points,q,h,rho,l2_error,linf_error\n");
    for s in &samples {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.n, s.num_points, s.q, s.h, s.rho, s.l2_error, s.linf_error
        ));
    }
    csv.push_str(&config.comment());

    let summary = RatesSummary {
        kernel: &config.kernel,
        region: &config.region,
        target: &config.target,
        beta: number_or_null(report.beta),
        stderr: number_or_null(report.stderr),
        theta_hat: number_or_null(report.theta_hat),
        regime: report.regime.as_str(),
        flags: &report.flags,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serialization");
    json.push('\n');

    match &config.output {
        Some(path) => {
            atomic_write(path, &csv)?;
            atomic_write(&path.with_extension("json"), &json)?;
            print!("{json}");
        }
        None => {
            print!("{csv}");
            print!("{json}");
        }
    }
    Ok(())
}

fn run_density(
    config: &ExperimentConfig,
    kernel: &Kernel,
    region: &Region,
    target: &Target,
) -> Result<()> {
    let field = target.resolve(kernel, region, config.quad_level)?;
    let dim = region.dimension();
    for &n in &config.levels {
        let d = density::build_density(&*field, kernel, region, n, config.nb, config.ridge)?;
        let mut csv = format!(
            "{},{},{},value\n",
            coordinate_headers("x", dim),
            coordinate_headers("cell_corner", dim),
            coordinate_headers("offset", dim)
        );
        for cell in 0..d.corners().len() {
            let corner = d.corners().point(cell);
            for (oi, offset) in d.offsets().iter().enumerate() {
                let x: Vec<f64> = corner.iter().zip(offset).map(|(c, b)| c + b).collect();
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    join_row(&x),
                    join_row(corner),
                    join_row(offset),
                    d.value(cell, oi)
                ));
            }
        }
        csv.push_str(&config.comment());
        let path = config.output.as_deref().map(|p| level_path(p, n));
        emit(path.as_deref(), &csv)?;
    }
    Ok(())
}

/// OLS slope of `ln λ_j` against `ln j` over `3 ≤ j ≤ min(30, J)`.
fn decay_slope(eigenvalues: &[f64]) -> Option<(f64, [usize; 2])> {
    let hi = eigenvalues.len().min(30);
    if hi < 5 {
        return None;
    }
    let xs: Vec<f64> = (3..=hi).map(|j| (j as f64).ln()).collect();
    let ys: Vec<f64> = (3..=hi).map(|j| eigenvalues[j - 1].ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some((sxy / sxx, [3, hi]))
}

#[derive(Serialize)]
struct SpectrumSummary<'a> {
    kernel: &'a str,
    region: &'a str,
    quad_level: u32,
    num_modes: usize,
    decay_slope: Option<f64>,
    decay_window: Option<[usize; 2]>,
}

fn run_spectrum(config: &ExperimentConfig, kernel: &Kernel, region: &Region) -> Result<()> {
    let model = spectral::load_or_build(
        kernel,
        region,
        config.quad_level,
        spectral::DEFAULT_DROP_TOL,
        config.cache_dir.as_deref(),
    )?;
    let mut csv = String::from("j,lambda\n");
    for (j, lambda) in model.eigenvalues.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", j + 1, lambda));
    }
    csv.push_str(&config.comment());
    emit(config.output.as_deref(), &csv)?;

    let fitted = decay_slope(&model.eigenvalues);
    let summary = SpectrumSummary {
        kernel: &config.kernel,
        region: &config.region,
        quad_level: config.quad_level,
        num_modes: model.num_modes(),
        decay_slope: fitted.map(|(s, _)| s),
        decay_window: fitted.map(|(_, w)| w),
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serialization");
    json.push('\n');
    print!("{json}");
    Ok(())
}

fn run_bernstein(config: &ExperimentConfig, kernel: &Kernel, region: &Region) -> Result<()> {
    let model = spectral::load_or_build(
        kernel,
        region,
        config.quad_level,
        spectral::DEFAULT_DROP_TOL,
        config.cache_dir.as_deref(),
    )?;
    let mut csv = String::from("n,theta,trial,ratio\n");
    for &n in &config.levels {
        let grid = geometry::grid_set(region, n)?;
        let q = geometry::separation_distance(&grid)?;
        for &theta in &config.thetas {
            for trial in 0..BERNSTEIN_TRIALS {
                let values = sampling::trial_values(config.seed, n, trial, grid.len());
                let u = interpolate::fit(kernel, &grid, &values, config.ridge)?;
                let ratio = model.bernstein_ratio(&u, theta, q)?;
                csv.push_str(&format!("{n},{theta},{trial},{ratio}\n"));
            }
        }
    }
    csv.push_str(&config.comment());
    emit(config.output.as_deref(), &csv)
}

fn run_gram(config: &ExperimentConfig, kernel: &Kernel, region: &Region) -> Result<()> {
    let mut csv = String::from("n,q,lambda_min\n");
    for &n in &config.levels {
        let grid = geometry::grid_set(region, n)?;
        let q = geometry::separation_distance(&grid)?;
        let a = kernels::gram(kernel, &grid)?;
        let lambda_min = kernels::min_eigenvalue(&a)?;
        csv.push_str(&format!("{n},{q},{lambda_min}\n"));
    }
    csv.push_str(&config.comment());
    emit(config.output.as_deref(), &csv)
}

fn run_interp(
    config: &ExperimentConfig,
    kernel: &Kernel,
    region: &Region,
    target: &Target,
) -> Result<()> {
    let [n] = config.levels[..] else {
        return Err(Error::InvalidInput(format!(
            "interp takes a single level, got {}",
            levels_descriptor(&config.levels)
        )));
    };
    let field = target.resolve(kernel, region, config.quad_level)?;
    let grid = geometry::grid_set(region, n)?;
    let values = checked_values(&*field, &grid)?;
    let s = interpolate::fit(kernel, &grid, &values, config.ridge)?;
    let quad = geometry::quadrature(region, config.quad_level)?;
    let mut csv = format!("{},value\n", coordinate_headers("x", region.dimension()));
    for node in quad.nodes.iter() {
        csv.push_str(&format!("{},{}\n", join_row(node), s.value_at(node)));
    }
    csv.push_str(&config.comment());
    emit(config.output.as_deref(), &csv)
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

fn dispatch(cli: &Cli) -> Result<()> {
    let (config, kernel, region, target) = resolve_config(cli.command.name(), cli.command.args())?;
    match cli.command {
        Command::Rates(_) => run_rates(&config, &kernel, &region, &target),
        Command::Density(_) => run_density(&config, &kernel, &region, &target),
        Command::Spectrum(_) => run_spectrum(&config, &kernel, &region),
        Command::Bernstein(_) => run_bernstein(&config, &kernel, &region),
        Command::Gram(_) => run_gram(&config, &kernel, &region),
        Command::Interp(_) => run_interp(&config, &kernel, &region, &target),
    }
}

/// Parse the arguments, run the experiment, and return the process exit
/// code: 0 on success, 2 on configuration or validation errors, 3 on
/// numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
