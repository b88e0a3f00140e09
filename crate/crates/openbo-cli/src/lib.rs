//! Command-line driver: configuration resolution, scan execution, CSV
//! emission. The binary in `main.rs` is a thin wrapper over [`run`].
//!
//! Configuration precedence: command-line flags > key=value config file >
//! built-in defaults. Exit codes: 0 success, 2 configuration/usage error,
//! 3 numeric failure.

use clap::{Args, Parser, Subcommand};
use openbo::neutron::{
    gamma_point, hst_matrix, pz_final, spectrum_analytic, steady_state, GammaParams, RunSpec,
};
use openbo::liouville::expectation;
use openbo::scan::ScanTable;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Keys accepted in a config file (everything a flag can set, minus --out).
const KNOWN_KEYS: &[&str] = &[
    "theta", "period", "mass", "muB", "g", "g-min", "g-max", "g-steps", "T-min", "T-max",
    "T-steps", "steps", "alpha", "beta", "jobs", "phi", "phi-a", "gamma1", "gamma2", "nmax",
];

/// Errors surfaced to the user, tagged with the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage (exit 2).
    Config(String),
    /// Numeric failure in the library layer (exit 3).
    Numeric(openbo::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<openbo::Error> for CliError {
    fn from(e: openbo::Error) -> Self {
        CliError::Numeric(e)
    }
}

/// Parse a flat key=value config file: one `key = value` pair per line,
/// blank lines and `#` comments ignored, unknown or repeated keys rejected.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("line {}: unknown key {key:?}", lineno + 1));
        }
        if value.is_empty() {
            return Err(format!("line {}: empty value for {key:?}", lineno + 1));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(format!("line {}: repeated key {key:?}", lineno + 1));
        }
    }
    Ok(map)
}

#[derive(Parser, Debug)]
#[command(
    name = "openbo",
    version,
    about = "Open-system Born-Oppenheimer scans: helical-field spin relaxation and validity measures"
)]
pub struct Cli {
    /// Optional flat key=value config file; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<String>,

    /// Output CSV path (stdout if omitted).
    #[arg(long, global = true)]
    pub out: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonOpts {
    /// Helix cone angle θ (radians).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Traversal time T of one helix turn, units 1/μB.
    #[arg(long)]
    pub period: Option<f64>,
    /// Neutron mass M (only enters the validity measure directly; for
    /// gamma-scan it is derived from --alpha instead).
    #[arg(long)]
    pub mass: Option<f64>,
    /// Magnetic energy scale μB.
    #[arg(long = "muB")]
    pub mu_b: Option<f64>,
    /// Dimensionless decay strength g = γ/μB (single value).
    #[arg(long)]
    pub g: Option<f64>,
    /// g-grid lower edge.
    #[arg(long = "g-min")]
    pub g_min: Option<f64>,
    /// g-grid upper edge.
    #[arg(long = "g-max")]
    pub g_max: Option<f64>,
    /// Number of g-grid points.
    #[arg(long = "g-steps")]
    pub g_steps: Option<usize>,
    /// T-grid lower edge (exclusive), units 1/μB.
    #[arg(long = "T-min")]
    pub t_min: Option<f64>,
    /// T-grid upper edge (inclusive), units 1/μB.
    #[arg(long = "T-max")]
    pub t_max: Option<f64>,
    /// Number of T-grid points.
    #[arg(long = "T-steps")]
    pub t_steps: Option<usize>,
    /// RK4 steps per unit time 1/μB.
    #[arg(long)]
    pub steps: Option<f64>,
    /// 1/(μB·M²·L), fixes the mass scale of the validity measure.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// k_z/(μB·M·L), fixes the axial momentum of the validity measure.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Worker threads for scan cells (result order is independent of this).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// System helix phase φ (spectrum/steady evaluation point).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Ancilla helix phase φ^A.
    #[arg(long = "phi-a")]
    pub phi_a: Option<f64>,
    /// Position-monitoring rate γ₁ (disscom-check).
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Cross rate γ₂ (disscom-check).
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Oscillator ladder truncation (disscom-check).
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Doubled-space eigenvalues over a g-grid at fixed (φ, φ^A).
    Spectrum(CommonOpts),
    /// Steady state (zero mode) at φ = φ^A.
    Steady(CommonOpts),
    /// Final polarization over a (g, T) grid.
    PzScan(CommonOpts),
    /// Final polarization against gT for a set of g values.
    PzGt(CommonOpts),
    /// Validity measure Γ(g), normalized to Γ(0).
    GammaScan(CommonOpts),
    /// Monitored-oscillator validity report.
    DisscomCheck(CommonOpts),
}

/// Flag/file/default resolution for one run.
struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn new(config_path: Option<&str>) -> Result<Self, CliError> {
        let file = match config_path {
            None => BTreeMap::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
                parse_config(&text).map_err(CliError::Config)?
            }
        };
        Ok(Self { file })
    }

    fn f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("key {key:?}: not a number: {s:?}"))),
            None => Ok(default),
        }
    }

    fn usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("key {key:?}: not an integer: {s:?}"))),
            None => Ok(default),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn grid(min: f64, max: f64, n: usize, include_min: bool) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Config("empty grid (zero steps)".into()));
    }
    if max < min {
        return Err(CliError::Config(format!(
            "grid not monotone: max {max} < min {min}"
        )));
    }
    if include_min {
        if n == 1 {
            return Ok(vec![min]);
        }
        let h = (max - min) / (n - 1) as f64;
        Ok((0..n).map(|k| min + h * k as f64).collect())
    } else {
        // (min, max], n points.
        let h = (max - min) / n as f64;
        Ok((1..=n).map(|k| min + h * k as f64).collect())
    }
}

/// Map over scan cells on a dedicated pool of `jobs` threads; results come
/// back in input order, so the CSV is identical for any job count.
fn ordered_parallel<T: Send + Sync, U: Send>(
    jobs: usize,
    items: Vec<T>,
    f: impl Fn(&T) -> Result<U, CliError> + Sync,
) -> Result<Vec<U>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn common_tags(table: &mut ScanTable, sub: &str, opts: &[(&str, String)]) {
    table.tag("tool", format!("openbo {}", env!("CARGO_PKG_VERSION")));
    table.tag("subcommand", sub);
    for (k, v) in opts {
        table.tag(k, v);
    }
}

pub fn run(cli: &Cli) -> Result<ScanTable, CliError> {
    let opts = match &cli.command {
        Command::Spectrum(o)
        | Command::Steady(o)
        | Command::PzScan(o)
        | Command::PzGt(o)
        | Command::GammaScan(o)
        | Command::DisscomCheck(o) => o,
    };
    let r = Resolver::new(cli.config.as_deref())?;
    let theta = positive("theta", r.f64(opts.theta, "theta", PI / 2.0)?)?;
    let mu_b = positive("muB", r.f64(opts.mu_b, "muB", 1.0)?)?;
    let jobs = r.usize(opts.jobs, "jobs", 1).map(|j| j.max(1))?;
    let steps = positive("steps", r.f64(opts.steps, "steps", 2000.0)?)?;

    match &cli.command {
        Command::Spectrum(_) => {
            let phi = r.f64(opts.phi, "phi", 0.0)?;
            let phi_a = r.f64(opts.phi_a, "phi-a", 0.0)?;
            let gs = g_grid(&r, opts, 0.0, 0.5, 26)?;
            let mut table = ScanTable::new(&[
                "phi_rad", "phiA_rad", "g", "re_E1_muB", "im_E1_muB", "re_E2_muB", "im_E2_muB",
                "re_E3_muB", "im_E3_muB", "re_E4_muB", "im_E4_muB",
            ]);
            common_tags(
                &mut table,
                "spectrum",
                &[
                    ("theta", theta.to_string()),
                    ("phi", phi.to_string()),
                    ("phi-a", phi_a.to_string()),
                    ("muB", mu_b.to_string()),
                    ("g-grid", format!("{:?}", (gs.first(), gs.last(), gs.len()))),
                ],
            );
            for &g in &gs {
                let es: Vec<openbo::C64> = if (theta - PI / 2.0).abs() < 1e-12 {
                    spectrum_analytic(g, phi - phi_a).to_vec()
                } else {
                    let m = hst_matrix(theta, phi, phi_a, g, 1.0);
                    openbo::linalg::eig_general(&m, &openbo::linalg::EigOptions::default())?
                        .values
                };
                let mut row = vec![phi, phi_a, g];
                for e in es {
                    row.push(e.re);
                    row.push(e.im);
                }
                table.push(row).map_err(CliError::Numeric)?;
            }
            Ok(table)
        }
        Command::Steady(_) => {
            // g ≤ 0 is left to the library: it is a well-formed input that
            // has no unique zero mode, which is a numeric failure (exit 3),
            // not a usage error.
            let g = r.f64(opts.g, "g", 0.5)?;
            let rho = steady_state(theta, g, 1.0)?;
            let pz = expectation(&openbo::neutron::sigma_z(), &rho).re;
            let mut table = ScanTable::new(&[
                "g", "re_rho_uu", "im_rho_uu", "re_rho_ud", "im_rho_ud", "re_rho_du",
                "im_rho_du", "re_rho_dd", "im_rho_dd", "pz",
            ]);
            common_tags(
                &mut table,
                "steady",
                &[("theta", theta.to_string()), ("g", g.to_string()), ("muB", mu_b.to_string())],
            );
            let mut row = vec![g];
            for i in 0..2 {
                for j in 0..2 {
                    row.push(rho[[i, j]].re);
                    row.push(rho[[i, j]].im);
                }
            }
            row.push(pz);
            table.push(row).map_err(CliError::Numeric)?;
            Ok(table)
        }
        Command::PzScan(_) => {
            let gs = g_grid(&r, opts, 0.0, 0.5, 26)?;
            let t_min = r.f64(opts.t_min, "T-min", 0.0)?;
            let t_max = positive("T-max", r.f64(opts.t_max, "T-max", 3.0 * PI)?)?;
            let t_steps = r.usize(opts.t_steps, "T-steps", 121)?;
            let ts = grid(t_min, t_max, t_steps, false)?;
            let cells: Vec<(f64, f64)> = gs
                .iter()
                .flat_map(|&g| ts.iter().map(move |&t| (g, t)))
                .collect();
            let rows = ordered_parallel(jobs, cells, |&(g, t)| {
                let mut spec = RunSpec::new(theta, t / mu_b, g);
                spec.mu_b = mu_b;
                spec.steps_per_unit = steps;
                Ok(vec![g, t, pz_final(&spec)?])
            })?;
            let mut table = ScanTable::new(&["g", "T_inv_muB", "pz"]);
            common_tags(
                &mut table,
                "pz-scan",
                &[
                    ("theta", theta.to_string()),
                    ("muB", mu_b.to_string()),
                    ("steps-per-unit", steps.to_string()),
                    ("g-grid", format!("{:?}", (gs.first(), gs.last(), gs.len()))),
                    ("T-grid", format!("{:?}", (t_min, t_max, t_steps))),
                    ("jobs", jobs.to_string()),
                ],
            );
            for row in rows {
                table.push(row).map_err(CliError::Numeric)?;
            }
            Ok(table)
        }
        Command::PzGt(_) => {
            let gs: Vec<f64> = match opts.g {
                Some(g) => vec![positive("g", g)?],
                None => vec![0.5, 2.0, 10.0, 50.0],
            };
            let gt_max = positive("T-max", r.f64(opts.t_max, "T-max", 10.0 * PI)?)?;
            let n = r.usize(opts.t_steps, "T-steps", 201)?;
            let gts = grid(0.0, gt_max, n, false)?;
            let cells: Vec<(f64, f64)> = gs
                .iter()
                .flat_map(|&g| gts.iter().map(move |&gt| (g, gt)))
                .collect();
            let rows = ordered_parallel(jobs, cells, |&(g, gt)| {
                let mut spec = RunSpec::new(theta, gt / g / mu_b, g);
                spec.mu_b = mu_b;
                spec.steps_per_unit = steps;
                Ok(vec![g, gt, pz_final(&spec)?])
            })?;
            let mut table = ScanTable::new(&["g", "gT_inv_muB", "pz"]);
            common_tags(
                &mut table,
                "pz-gt",
                &[
                    ("theta", theta.to_string()),
                    ("muB", mu_b.to_string()),
                    ("steps-per-unit", steps.to_string()),
                    ("g-values", format!("{gs:?}")),
                    ("gT-grid", format!("{:?}", (0.0, gt_max, n))),
                    ("jobs", jobs.to_string()),
                ],
            );
            for row in rows {
                table.push(row).map_err(CliError::Numeric)?;
            }
            Ok(table)
        }
        Command::GammaScan(_) => {
            let gs = g_grid(&r, opts, 0.0, 1.0, 51)?;
            let mut params = GammaParams {
                alpha: positive("alpha", r.f64(opts.alpha, "alpha", 1e-6)?)?,
                beta: positive("beta", r.f64(opts.beta, "beta", 2e-4)?)?,
                ..GammaParams::default()
            };
            // --mass overrides the mass scale implied by --alpha.
            if let Some(m) = opts.mass {
                let m = positive("mass", m)?;
                params.alpha = 1.0 / (m * m * params.length);
            }
            let g0 = gamma_point(0.0, &params)?.gamma;
            let rows = ordered_parallel(jobs, gs.clone(), |&g| {
                let rep = gamma_point(g, &params)?;
                Ok(vec![g, rep.gamma, rep.gamma / g0])
            })?;
            let mut table = ScanTable::new(&["g", "gamma", "gamma_normalized"]);
            common_tags(
                &mut table,
                "gamma-scan",
                &[
                    ("alpha", params.alpha.to_string()),
                    ("beta", params.beta.to_string()),
                    ("fd-step", params.fd_step.to_string()),
                    ("phi0", params.phi0.to_string()),
                    ("g-grid", format!("{:?}", (gs.first(), gs.last(), gs.len()))),
                    ("jobs", jobs.to_string()),
                ],
            );
            for row in rows {
                table.push(row).map_err(CliError::Numeric)?;
            }
            Ok(table)
        }
        Command::DisscomCheck(_) => {
            use openbo::disscom::{disscom_validity, DisscomParams};
            let params = DisscomParams {
                gamma1: positive("gamma1", r.f64(opts.gamma1, "gamma1", 0.01)?)?,
                gamma2: r.f64(opts.gamma2, "gamma2", 0.002)?,
                n_max: r.usize(opts.nmax, "nmax", 16)?,
            };
            if params.gamma2 < 0.0 {
                return Err(CliError::Config("gamma2 must be nonnegative".into()));
            }
            let rep = disscom_validity(&params)?;
            let mut table = ScanTable::new(&[
                "target_m", "target_n", "re_num", "im_num", "re_den", "im_den", "ratio",
            ]);
            common_tags(
                &mut table,
                "disscom-check",
                &[
                    ("gamma1", params.gamma1.to_string()),
                    ("gamma2", params.gamma2.to_string()),
                    ("nmax", params.n_max.to_string()),
                    ("gamma-max", format!("{:.6e}", rep.gamma)),
                ],
            );
            for ch in &rep.channels {
                let m = (ch.to / params.n_max) as f64;
                let n = (ch.to % params.n_max) as f64;
                table
                    .push(vec![
                        m,
                        n,
                        ch.numerator.re,
                        ch.numerator.im,
                        ch.denominator.re,
                        ch.denominator.im,
                        ch.ratio(),
                    ])
                    .map_err(CliError::Numeric)?;
            }
            Ok(table)
        }
    }
}

fn g_grid(
    r: &Resolver,
    opts: &CommonOpts,
    def_min: f64,
    def_max: f64,
    def_steps: usize,
) -> Result<Vec<f64>, CliError> {
    if let Some(g) = opts.g {
        return Ok(vec![g]);
    }
    if let Some(s) = r.file.get("g") {
        let g: f64 = s
            .parse()
            .map_err(|_| CliError::Config(format!("key \"g\": not a number: {s:?}")))?;
        return Ok(vec![g]);
    }
    let g_min = r.f64(opts.g_min, "g-min", def_min)?;
    let g_max = r.f64(opts.g_max, "g-max", def_max)?;
    let g_steps = r.usize(opts.g_steps, "g-steps", def_steps)?;
    grid(g_min, g_max, g_steps, true)
}

/// Execute a run and write the table to `--out` (or stdout); prints a
/// one-line summary to stderr.
pub fn run_and_emit(cli: &Cli) -> Result<(), CliError> {
    let start = std::time::Instant::now();
    let table = run(cli)?;
    let last_col = table.columns.len() - 1;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &table.rows {
        lo = lo.min(row[last_col]);
        hi = hi.max(row[last_col]);
    }
    match &cli.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
            table
                .write_csv(&mut f)
                .map_err(|e| CliError::Config(format!("write error: {e}")))?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            table
                .write_csv(&mut out)
                .map_err(|e| CliError::Config(format!("write error: {e}")))?;
        }
    }
    eprintln!(
        "{} rows; {} in [{lo:.6e}, {hi:.6e}]; {:.2}s",
        table.rows.len(),
        table.columns[last_col],
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parser_accepts_known_keys() {
        let map = parse_config("# comment\n theta = 1.5\n\ng-steps=26\n").unwrap();
        assert_eq!(map["theta"], "1.5");
        assert_eq!(map["g-steps"], "26");
    }

    #[test]
    fn config_parser_rejects_garbage() {
        assert!(parse_config("nonsense").is_err());
        assert!(parse_config("unknown = 1").is_err());
        assert!(parse_config("theta = 1\ntheta = 2").is_err());
        assert!(parse_config("theta =").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(grid(0.0, 1.0, 3, true).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid(0.0, 3.0, 3, false).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(grid(0.0, 1.0, 0, true).is_err());
        assert!(grid(1.0, 0.0, 5, true).is_err());
    }
}
