//! Command-line front end: argument grammar, grid CSV files, run manifests
//! and Monte Carlo result files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sle_densities::densities::{self, DensityGrid, DensityKind, Region};
use sle_densities::lattice_mc::{self, McConfig, McEstimate};
use sle_densities::verify::{self, Status};
use sle_densities::{solutions, Error};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SCHEMA: &str = "sle-densities/v1";
pub const THREADS_VAR: &str = "SLE_DENSITIES_THREADS";

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DOMAIN: i32 = 2;
    pub const VERIFY: i32 = 3;
}

/// A failure with its exit code, printed as one JSON line.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: impl Into<String>, message: impl Into<String>) -> Self {
        Failure { code, kind: kind.into(), message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(exit::DOMAIN, "io", format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        json!({"error": self.kind, "message": self.message, "exit_code": self.code}).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Invalid(_)) { exit::USAGE } else { exit::DOMAIN };
        Failure::new(code, e.kind(), e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// A point of the upper half-plane written `RE,IM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub C);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got '{s}'"))?;
        let re = a.trim().parse::<f64>().map_err(|e| format!("{a}: {e}"))?;
        let im = b.trim().parse::<f64>().map_err(|e| format!("{b}: {e}"))?;
        Ok(Point(C::new(re, im)))
    }
}

#[derive(Debug, Parser)]
#[command(name = "sle-densities", version, about = "Anchored-cluster densities, SLE observables and lattice checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure constants as JSON.
    Constants {
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
    },
    /// One density value.
    Density {
        #[arg(long)]
        kind: DensityKind,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: Point,
    },
    /// Density sampled on a grid of cell centres, written as CSV.
    Grid(GridArgs),
    /// Left-passage probability.
    Lpp {
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: Point,
    },
    /// Green's function of the chordal curve.
    Greens {
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: Point,
    },
    /// Residual, crossing and invariant checks.
    Verify {
        /// Defaults to 5.3 and 6.7.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
    },
    /// Percolation Monte Carlo at κ = 6.
    Mc(McArgs),
    /// Fit an MC result against the closed form.
    Compare {
        #[arg(long)]
        mc: PathBuf,
        /// A density kind, or `lpp`.
        #[arg(long)]
        kind: String,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub kind: DensityKind,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ymin: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ymax: f64,
    #[arg(long)]
    pub nx: usize,
    #[arg(long)]
    pub ny: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McKind {
    Connectivity,
    Lpp,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(value_enum)]
    pub kind: McKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub samples: usize,
    /// Box width and height in sites.
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub r#box: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Description of one output file, written beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub code_version: String,
    pub outputs: Vec<String>,
    pub status: RunStatus,
    pub error_count: usize,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>) -> Self {
        RunManifest {
            schema: SCHEMA.into(),
            command: command.into(),
            parameters,
            code_version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            status: RunStatus::Ok,
            error_count: 0,
        }
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    let mp = manifest_path(path);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    text.push('\n');
    fs::write(&mp, text).map_err(|e| Failure::io(&mp, e))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, Failure> {
    let mp = manifest_path(path);
    let text = fs::read_to_string(&mp).map_err(|e| Failure::io(&mp, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(exit::DOMAIN, "parse", format!("{}: {e}", mp.display())))
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header, then `x,y,value` rows in the grid's row-major order.
pub fn grid_csv(grid: &DensityGrid) -> String {
    let mut out = format!("# {SCHEMA} kind={} kappa={} L={}\nx,y,value\n", grid.kind, grid.kappa, grid.l);
    for (j, &y) in grid.ys.iter().enumerate() {
        for (i, &x) in grid.xs.iter().enumerate() {
            let v = grid.values[j * grid.nx + i];
            out.push_str(&format!("{},{},{}\n", sig17(x), sig17(y), sig17(v)));
        }
    }
    out
}

/// Writes the CSV and its manifest. The manifest is written even if the
/// CSV cannot be.
pub fn write_grid(grid: &DensityGrid, path: &Path, manifest: RunManifest) -> Result<(), Failure> {
    let mut manifest = manifest;
    manifest.error_count = grid.error_count;
    let written = fs::File::create(path).and_then(|mut f| f.write_all(grid_csv(grid).as_bytes()));
    match written {
        Ok(()) => {
            manifest.outputs = vec![path.display().to_string()];
            write_manifest(path, &manifest)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error_count += 1;
            let _ = write_manifest(path, &manifest);
            Err(Failure::io(path, e))
        }
    }
}

fn parse_failure(path: &Path, msg: impl fmt::Display) -> Failure {
    Failure::new(exit::DOMAIN, "parse", format!("{}: {msg}", path.display()))
}

/// Reads a grid written by [`write_grid`].
pub fn read_grid(path: &Path) -> Result<DensityGrid, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_failure(path, "empty file"))?;
    let mut fields = header.strip_prefix("# ").unwrap_or("").split_whitespace();
    if fields.next() != Some(SCHEMA) {
        return Err(parse_failure(path, format!("missing {SCHEMA} header")));
    }
    let mut tags = BTreeMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| parse_failure(path, format!("bad header field '{f}'")))?;
        tags.insert(k, v);
    }
    let tag = |k: &str| tags.get(k).copied().ok_or_else(|| parse_failure(path, format!("header lacks {k}")));
    let kind: DensityKind = tag("kind")?.parse().map_err(|e: Error| parse_failure(path, e))?;
    let num = |k: &str| -> Result<f64, Failure> { tag(k)?.parse().map_err(|e| parse_failure(path, e)) };
    let (kappa, l) = (num("kappa")?, num("L")?);
    if lines.next() != Some("x,y,value") {
        return Err(parse_failure(path, "missing column header"));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_failure(path, format!("row {}: {e}", n + 1)))?;
        if cells.len() != 3 {
            return Err(parse_failure(path, format!("row {} has {} cells", n + 1, cells.len())));
        }
        rows.push([cells[0], cells[1], cells[2]]);
    }
    let mut xs: Vec<f64> = Vec::new();
    for r in &rows {
        if r[1].to_bits() != rows[0][1].to_bits() {
            break;
        }
        xs.push(r[0]);
    }
    let nx = xs.len();
    if nx == 0 || rows.len() % nx != 0 {
        return Err(parse_failure(path, "rows do not form a rectangular grid"));
    }
    let ny = rows.len() / nx;
    let ys: Vec<f64> = (0..ny).map(|j| rows[j * nx][1]).collect();
    for (k, r) in rows.iter().enumerate() {
        if r[0].to_bits() != xs[k % nx].to_bits() || r[1].to_bits() != ys[k / nx].to_bits() {
            return Err(parse_failure(path, "rows do not form a rectangular grid"));
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    // cell centres determine the region
    let half = |v: &[f64]| if v.len() > 1 { 0.5 * (v[1] - v[0]) } else { f64::NAN };
    let (hx, hy) = (half(&xs), half(&ys));
    let region = Region { xmin: xs[0] - hx, xmax: xs[nx - 1] + hx, ymin: ys[0] - hy, ymax: ys[ny - 1] + hy };
    let error_count = values.iter().filter(|v| !v.is_finite()).count();
    Ok(DensityGrid { kind, kappa, l, region, nx, ny, xs, ys, values, error_count })
}

/// Monte Carlo result file: the configuration and the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub schema: String,
    pub kind: McKind,
    pub config: McConfig,
    pub estimate: McEstimate,
}

/// Anchor length of the connectivity runs: an eighth of the box width.
pub fn connectivity_anchor(width: usize, spacing: f64) -> f64 {
    (width / 8) as f64 * spacing
}

/// 5 × 5 probes above the anchor segment.
pub fn connectivity_probes(l: f64) -> Vec<C> {
    let mut out = Vec::new();
    for y in [0.2, 0.4, 0.6, 0.8, 1.0] {
        for x in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            out.push(C::new(x * l, y * l));
        }
    }
    out
}

/// Probes at an eighth of the exploration radius.
pub fn lpp_probes(radius: f64) -> Vec<C> {
    [0.1, 0.25, 0.5, 0.75, 0.9].iter().map(|t| C::from_polar(radius / 8.0, t * std::f64::consts::PI)).collect()
}

pub fn run_mc(kind: McKind, seed: u64, samples: usize, width: usize, height: usize) -> Result<McRun, Failure> {
    let (config, estimate) = match kind {
        McKind::Connectivity => {
            let l = connectivity_anchor(width, 1.0);
            let config = McConfig::new(width, height, (-0.5 * l, 0.5 * l), seed, samples);
            let est = lattice_mc::sample_connectivity(&config, &connectivity_probes(l))?;
            (config, est)
        }
        McKind::Lpp => {
            let config = McConfig::new(width, height, (0.0, 0.0), seed, samples);
            let est = lattice_mc::trace_interface_lpp(&config, &lpp_probes(config.exploration_radius()))?;
            (config, est)
        }
    };
    Ok(McRun { schema: SCHEMA.into(), kind, config, estimate })
}

/// Closed-form values at the probes of an MC run.
pub fn formula_values(run: &McRun, kind: &str) -> Result<Vec<f64>, Failure> {
    let probes = run.estimate.probe_points();
    match (run.kind, kind) {
        (McKind::Lpp, "lpp") => Ok(probes.iter().map(|&z| densities::left_passage(z, 6.0)).collect::<Result<_, _>>()?),
        (McKind::Connectivity, k) => {
            let kind: DensityKind = k.parse()?;
            let (a, b) = run.config.wired_interval;
            let offset = 0.5 * (a + b);
            Ok(probes
                .iter()
                .map(|&z| densities::density(kind, b - a, z - offset, 6.0))
                .collect::<Result<_, _>>()?)
        }
        (McKind::Lpp, k) => {
            Err(Failure::new(exit::USAGE, "usage", format!("an lpp run compares against 'lpp', not '{k}'")))
        }
    }
}

pub fn compare(run: &McRun, kind: &str) -> Result<Value, Failure> {
    let f = formula_values(run, kind)?;
    let (c, rms) = lattice_mc::fit_shape(&run.estimate, &f)?;
    let points: Vec<Value> = run
        .estimate
        .probes
        .iter()
        .zip(&run.estimate.means)
        .zip(&run.estimate.std_errors)
        .zip(&f)
        .map(|(((p, m), s), f)| json!({"z": p, "mean": m, "std_error": s, "formula": f}))
        .collect();
    Ok(json!({"kind": kind, "constant": c, "rms_rel_error": rms, "n_samples": run.estimate.n_samples, "points": points}))
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

fn print_json(v: &Value) {
    emit(&v.to_string());
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn write_json_output(path: &Path, value: &impl Serialize, manifest: RunManifest) -> Result<(), Failure> {
    let mut manifest = manifest;
    let mut text = serde_json::to_string_pretty(value).expect("output serialises");
    text.push('\n');
    match fs::write(path, text) {
        Ok(()) => {
            manifest.outputs = vec![path.display().to_string()];
            write_manifest(path, &manifest)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error_count += 1;
            let _ = write_manifest(path, &manifest);
            Err(Failure::io(path, e))
        }
    }
}

fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Constants { kappa } => {
            let s = if kappa == 6.0 { solutions::structure_constants_kappa6() } else { solutions::structure_constants(kappa)? };
            print_json(&serde_json::to_value(s).expect("constants serialise"));
        }
        Command::Density { kind, kappa, l, z } => {
            let v = densities::density(kind, l, z.0, kappa)?;
            print_json(&json!({"kind": kind, "kappa": kappa, "L": l, "z": [z.0.re, z.0.im], "value": v}));
        }
        Command::Lpp { kappa, z } => {
            let v = densities::left_passage(z.0, kappa)?;
            print_json(&json!({"kappa": kappa, "z": [z.0.re, z.0.im], "value": v}));
        }
        Command::Greens { kappa, z } => {
            let v = densities::greens(z.0, kappa)?;
            print_json(&json!({"kappa": kappa, "z": [z.0.re, z.0.im], "value": v}));
        }
        Command::Grid(a) => {
            let region = Region { xmin: a.xmin, xmax: a.xmax, ymin: a.ymin, ymax: a.ymax };
            let mut manifest = RunManifest::new(
                "grid",
                params(&[
                    ("kind", json!(a.kind)),
                    ("kappa", json!(a.kappa)),
                    ("L", json!(a.l)),
                    ("region", json!(region)),
                    ("nx", json!(a.nx)),
                    ("ny", json!(a.ny)),
                ]),
            );
            match densities::grid_eval(a.kind, a.kappa, a.l, region, a.nx, a.ny) {
                Ok(grid) => {
                    write_grid(&grid, &a.out, manifest)?;
                    print_json(&json!({"out": a.out.display().to_string(), "error_count": grid.error_count}));
                }
                Err(e) => {
                    manifest.status = RunStatus::Failed;
                    manifest.error_count = 1;
                    write_manifest(&a.out, &manifest)?;
                    return Err(e.into());
                }
            }
        }
        Command::Verify { kappa } => {
            let kappas = kappa.map_or(vec![5.3, 6.7], |k| vec![k]);
            let mut checks = Vec::new();
            for k in kappas {
                checks.extend(verify::run(k));
            }
            for c in &checks {
                emit(&serde_json::to_string(c).expect("check serialises"));
            }
            let failed: Vec<&str> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(Failure::new(exit::VERIFY, "verification", format!("failed: {}", failed.join("; "))));
            }
        }
        Command::Mc(a) => {
            let (w, h) = (a.r#box[0], a.r#box[1]);
            let mut manifest = RunManifest::new(
                "mc",
                params(&[("kind", json!(a.kind)), ("seed", json!(a.seed)), ("samples", json!(a.samples)), ("box", json!([w, h]))]),
            );
            match run_mc(a.kind, a.seed, a.samples, w, h) {
                Ok(run) => write_json_output(&a.out, &run, manifest)?,
                Err(e) => {
                    manifest.status = RunStatus::Failed;
                    manifest.error_count = 1;
                    write_manifest(&a.out, &manifest)?;
                    return Err(e);
                }
            }
            print_json(&json!({"out": a.out.display().to_string()}));
        }
        Command::Compare { mc, kind } => {
            let text = fs::read_to_string(&mc).map_err(|e| Failure::io(&mc, e))?;
            let run: McRun = serde_json::from_str(&text).map_err(|e| parse_failure(&mc, e))?;
            print_json(&compare(&run, &kind)?);
        }
    }
    Ok(exit::OK)
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(None) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::new(exit::USAGE, "usage", format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure::new(exit::DOMAIN, "threads", e.to_string()))
}

/// Parses argv and runs the command; returns the exit code. Diagnostics go
/// to stderr as single JSON lines.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            emit(e.to_string().trim_end());
            return exit::OK;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", Failure::new(exit::USAGE, "usage", first).to_json());
            return exit::USAGE;
        }
    };
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| execute(cli.command)),
        Ok(None) => execute(cli.command),
        Err(f) => Err(f),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.code
        }
    }
}
