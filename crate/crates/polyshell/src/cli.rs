//! Command-line front end.
//!
//! Subcommands: `indent`, `relax`, `sweep`, `table1`, `converge`,
//! `verify`. Experiment parameters come from built-in defaults, an
//! optional flat `key = value` config file, and command-line flags, in
//! that order (flags win). CSV output schemas are fixed; floating-point
//! values are printed with 17 significant digits so identical
//! configurations produce byte-identical files.
//!
//! Exit codes: 0 on success, 1 on solver failure, 2 on configuration
//! errors.

use crate::analysis::{
    apparent_height, convergence_study, fit_free_sector, force_sweep, relaxation_study,
};
use crate::contact::{indent, relax, ContactOptions, DeformedConfig};
use crate::energy::ElasticParams;
use crate::geometry::{Polygon, Vec2};
use crate::svg;
use crate::verify::run_suite;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Fully resolved experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub circumradius: f64,
    pub stretching: f64,
    pub bending: f64,
    pub f: f64,
    pub f_max: f64,
    pub steps: usize,
    pub total_force: f64,
    pub n_list: Vec<usize>,
    pub counts: Vec<usize>,
    pub contact_tol: Option<f64>,
    pub seed: u64,
    pub instances: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 10,
            circumradius: 1.0,
            stretching: 1.0,
            bending: 1.0,
            f: 0.25,
            f_max: 1.0,
            steps: 50,
            total_force: 2.25,
            n_list: vec![10, 15, 20, 25, 30, 35, 40],
            counts: vec![3, 5, 7],
            contact_tol: None,
            seed: 42,
            instances: 100,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug)]
struct ConfigError(String);

impl ExperimentConfig {
    fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
        value.trim().parse().map_err(|_| {
            ConfigError(format!(
                "invalid value for field `{key}`: `{}`",
                value.trim()
            ))
        })
    }

    fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
        value
            .split(',')
            .map(|tok| Self::parse_field::<usize>(key, tok))
            .collect()
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n" => self.n = Self::parse_field(key, value)?,
            "r0" | "circumradius" => self.circumradius = Self::parse_field(key, value)?,
            "k" => self.stretching = Self::parse_field(key, value)?,
            "kappa" => self.bending = Self::parse_field(key, value)?,
            "f" => self.f = Self::parse_field(key, value)?,
            "f_max" => self.f_max = Self::parse_field(key, value)?,
            "steps" => self.steps = Self::parse_field(key, value)?,
            "total_force" => self.total_force = Self::parse_field(key, value)?,
            "n_list" => self.n_list = Self::parse_list(key, value)?,
            "counts" => self.counts = Self::parse_list(key, value)?,
            "contact_tol" => self.contact_tol = Some(Self::parse_field(key, value)?),
            "seed" => self.seed = Self::parse_field(key, value)?,
            "instances" => self.instances = Self::parse_field(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            other => return Err(ConfigError(format!("unknown field `{other}`"))),
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "config line {} is not `key = value`: `{line}`",
                    lineno + 1
                )));
            };
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 3 {
            return Err(ConfigError(format!(
                "field `n` must be >= 3, got {}",
                self.n
            )));
        }
        if !self.circumradius.is_finite() || self.circumradius <= 0.0 {
            return Err(ConfigError(format!(
                "field `r0` must be positive, got {}",
                self.circumradius
            )));
        }
        if !self.stretching.is_finite() || self.stretching <= 0.0 {
            return Err(ConfigError(format!(
                "field `k` must be positive, got {}",
                self.stretching
            )));
        }
        if !self.bending.is_finite() || self.bending <= 0.0 {
            return Err(ConfigError(format!(
                "field `kappa` must be positive, got {}",
                self.bending
            )));
        }
        if !self.f.is_finite() || self.f < 0.0 {
            return Err(ConfigError(format!(
                "field `f` must be >= 0, got {}",
                self.f
            )));
        }
        if !self.f_max.is_finite() || self.f_max <= 0.0 {
            return Err(ConfigError(format!(
                "field `f_max` must be positive, got {}",
                self.f_max
            )));
        }
        if self.steps < 2 {
            return Err(ConfigError(format!(
                "field `steps` must be >= 2, got {}",
                self.steps
            )));
        }
        if let Some(tol) = self.contact_tol {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(ConfigError(format!(
                    "field `contact_tol` must be positive, got {tol}"
                )));
            }
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] > w[1]) {
            return Err(ConfigError(
                "field `n_list` must be a nonempty ascending list".into(),
            ));
        }
        Ok(())
    }

    fn params(&self) -> crate::Result<ElasticParams> {
        ElasticParams::new(self.stretching, self.bending)
    }

    fn contact_options(&self) -> ContactOptions {
        ContactOptions {
            contact_tol: self.contact_tol,
            ..Default::default()
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "polyshell",
    about = "Elastic regular polygon pressed on a rigid surface: indentation, \
             adhesion relaxation, and derived observables",
    version
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Overrides {
    /// Flat `key = value` config file (flags given here win over it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of polygon vertices
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Circumradius of the undeformed polygon
    #[arg(long, global = true)]
    r0: Option<f64>,
    /// Stretching elastic constant
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Bending elastic constant
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Contact detection tolerance (default 1e-7 * r0)
    #[arg(long, global = true)]
    contact_tol: Option<f64>,
    /// Directory for CSV output
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for the randomized verification suite
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single indentation solve; writes vertices.csv
    Indent {
        /// Downward force per vertex
        #[arg(long)]
        f: Option<f64>,
        /// Also render the configuration to this SVG file
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Two-phase run (indent, then relax under irreversible adhesion);
    /// writes vertices.csv for the relaxed state
    Relax {
        /// Downward force per vertex for the indentation phase
        #[arg(long)]
        f: Option<f64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Force sweep; writes sweep.csv
    Sweep {
        /// Largest force on the grid
        #[arg(long)]
        f_max: Option<f64>,
        /// Number of grid points
        #[arg(long)]
        steps: Option<usize>,
        /// Interpret the force axis as total force split evenly over the
        /// loaded vertices (default: per-vertex force)
        #[arg(long)]
        total_force: bool,
    },
    /// Relaxation study over target contact counts; writes table1.csv
    Table1 {
        /// Comma-separated contact counts
        #[arg(long)]
        counts: Option<String>,
    },
    /// Convergence study over vertex counts at fixed total force;
    /// writes converge.csv
    Converge {
        /// Comma-separated ascending vertex counts
        #[arg(long)]
        n_list: Option<String>,
        /// Total vertical force, split as total/(n-1) per vertex
        #[arg(long)]
        total: Option<f64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Randomized self-verification (oracle equivalence, KKT and
    /// variational-inequality properties); exit 0 iff all checks pass
    Verify {
        /// Number of randomized solver instances
        #[arg(long)]
        instances: Option<usize>,
    },
}

/// 17 significant digits; enough for bit-exact round trips of f64.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn configure_thread_pool() {
    if let Ok(value) = std::env::var("POLYSHELL_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                // ignore the error if a global pool already exists
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn resolve_config(overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &overrides.config {
        cfg.apply_file(path)?;
    }
    if let Some(n) = overrides.n {
        cfg.n = n;
    }
    if let Some(r0) = overrides.r0 {
        cfg.circumradius = r0;
    }
    if let Some(k) = overrides.k {
        cfg.stretching = k;
    }
    if let Some(kappa) = overrides.kappa {
        cfg.bending = kappa;
    }
    if let Some(tol) = overrides.contact_tol {
        cfg.contact_tol = Some(tol);
    }
    if let Some(dir) = &overrides.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> crate::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                crate::Error::Domain(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| crate::Error::Domain(format!("cannot write {}: {e}", path.display())))
}

/// Emitter invariant: never write an infeasible configuration.
fn assert_feasible(cfg: &DeformedConfig) -> crate::Result<()> {
    let floor = -1e-9 * cfg.polygon().circumradius();
    if cfg.min_y() < floor {
        return Err(crate::Error::Domain(format!(
            "refusing to emit infeasible configuration (min y = {})",
            cfg.min_y()
        )));
    }
    Ok(())
}

fn vertices_csv(cfg: &DeformedConfig) -> crate::Result<String> {
    assert_feasible(cfg)?;
    let mut out = String::from("index,x_ref,y_ref,x_def,y_def,in_contact\n");
    for label in 1..=cfg.polygon().vertex_count() {
        let r = cfg.polygon().vertex(label);
        let d = cfg.deformed_vertex(label);
        let contact = u8::from(cfg.contact_set().contains(&label));
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{contact}",
            fmt17(r.x),
            fmt17(r.y),
            fmt17(d.x),
            fmt17(d.y)
        );
    }
    Ok(out)
}

fn print_summary(tag: &str, cfg: &DeformedConfig) {
    let height = apparent_height(cfg);
    let drop = cfg.polygon().height() - height;
    println!(
        "{tag}: contacts = {} {:?}, height = {:.6}, height drop = {:.6}",
        cfg.contact_count(),
        cfg.contact_set().iter().collect::<Vec<_>>(),
        height,
        drop
    );
    match fit_free_sector(cfg) {
        Some(fit) => println!(
            "{tag}: free-sector circle: radius = {:.6} ({:.4} R0), center = ({:.6}, {:.6}), rms = {:.3e} over {} points",
            fit.radius,
            fit.radius / cfg.polygon().circumradius(),
            fit.center.x,
            fit.center.y,
            fit.rms_residual,
            fit.point_count
        ),
        None => println!("{tag}: free sector too small for a circle fit"),
    }
    println!(
        "{tag}: solver: {} iterations, method {:?}, max KKT violation {:.3e}",
        cfg.solve().iterations,
        cfg.solve().method,
        cfg.solve().kkt.max_violation()
    );
}

fn render_config_svg(cfg: &DeformedConfig, path: &Path) -> crate::Result<()> {
    let scene = svg::Scene {
        reference: cfg.polygon().vertices().to_vec(),
        deformed: vec![cfg.deformed_vertices().to_vec()],
        fitted_circle: fit_free_sector(cfg),
        circumscribed: None,
    };
    write_file(path, &svg::render(&scene))
}

fn run_indent(cfg: &ExperimentConfig, f: f64, svg_path: Option<&Path>) -> crate::Result<()> {
    let polygon = Polygon::regular(cfg.n, cfg.circumradius)?;
    let state = indent(&polygon, &cfg.params()?, f, &cfg.contact_options())?;
    print_summary("indented", &state);
    write_file(&cfg.out_dir.join("vertices.csv"), &vertices_csv(&state)?)?;
    if let Some(path) = svg_path {
        render_config_svg(&state, path)?;
    }
    Ok(())
}

fn run_relax(cfg: &ExperimentConfig, f: f64, svg_path: Option<&Path>) -> crate::Result<()> {
    let polygon = Polygon::regular(cfg.n, cfg.circumradius)?;
    let opts = cfg.contact_options();
    let indented = indent(&polygon, &cfg.params()?, f, &opts)?;
    print_summary("indented", &indented);
    let relaxed = relax(&indented, &opts)?;
    print_summary("relaxed", &relaxed);
    write_file(&cfg.out_dir.join("vertices.csv"), &vertices_csv(&relaxed)?)?;
    if let Some(path) = svg_path {
        render_config_svg(&relaxed, path)?;
    }
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, total_axis: bool) -> crate::Result<()> {
    let polygon = Polygon::regular(cfg.n, cfg.circumradius)?;
    let split = if total_axis { cfg.n as f64 - 1.0 } else { 1.0 };
    let grid: Vec<f64> = (0..cfg.steps)
        .map(|i| cfg.f_max * i as f64 / (cfg.steps as f64 - 1.0) / split)
        .collect();
    let records = force_sweep(&polygon, &cfg.params()?, &grid, &cfg.contact_options())?;
    let mut out = String::from("f,height,height_drop,contacts\n");
    for r in &records {
        let axis = r.f * split;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt17(axis),
            fmt17(r.height),
            fmt17(r.height_drop),
            r.contacts
        );
    }
    write_file(&cfg.out_dir.join("sweep.csv"), &out)?;
    println!(
        "sweep: {} points, contacts {} -> {}, height {:.6} -> {:.6}",
        records.len(),
        records.first().map_or(0, |r| r.contacts),
        records.last().map_or(0, |r| r.contacts),
        records.first().map_or(0.0, |r| r.height),
        records.last().map_or(0.0, |r| r.height),
    );
    Ok(())
}

fn run_table1(cfg: &ExperimentConfig) -> crate::Result<()> {
    let polygon = Polygon::regular(cfg.n, cfg.circumradius)?;
    let rows = relaxation_study(
        &polygon,
        &cfg.params()?,
        &cfg.counts,
        &cfg.contact_options(),
    )?;
    let mut out = String::from("contacts,f_used,R_over_R0,rms\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.contacts,
            fmt17(r.f_used),
            fmt17(r.r_over_r0),
            fmt17(r.rms)
        );
    }
    write_file(&cfg.out_dir.join("table1.csv"), &out)?;
    for r in &rows {
        println!(
            "contacts {}: f = {:.6}, R/R0 = {:.4}, rms = {:.3e}",
            r.contacts, r.f_used, r.r_over_r0, r.rms
        );
    }
    let missing: Vec<usize> = cfg
        .counts
        .iter()
        .copied()
        .filter(|c| !rows.iter().any(|r| r.contacts == *c))
        .collect();
    if !missing.is_empty() {
        println!("unreachable contact counts (absent from table1.csv): {missing:?}");
    }
    Ok(())
}

fn run_converge(cfg: &ExperimentConfig, svg_path: Option<&Path>) -> crate::Result<()> {
    let records = convergence_study(
        &cfg.n_list,
        cfg.total_force,
        cfg.circumradius,
        &cfg.params()?,
        &cfg.contact_options(),
    )?;
    let mut out = String::from("n,apex_height,discrepancy\n");
    for r in &records {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.n,
            fmt17(r.apex_height),
            fmt17(r.discrepancy)
        );
    }
    write_file(&cfg.out_dir.join("converge.csv"), &out)?;
    for r in &records {
        println!(
            "n = {:3}: apex height = {:.6}, discrepancy vs n = {} shape = {:.6}",
            r.n,
            r.apex_height,
            records.last().map_or(0, |l| l.n),
            r.discrepancy
        );
    }
    if let Some(path) = svg_path {
        let reference = Polygon::regular(*cfg.n_list.last().unwrap(), cfg.circumradius)?;
        let scene = svg::Scene {
            reference: reference.vertices().to_vec(),
            deformed: records.iter().map(|r| r.shape.clone()).collect(),
            fitted_circle: None,
            circumscribed: Some((Vec2::new(0.0, cfg.circumradius), cfg.circumradius)),
        };
        write_file(path, &svg::render(&scene))?;
    }
    Ok(())
}

fn run_verify(cfg: &ExperimentConfig) -> i32 {
    let report = run_suite(cfg.seed, cfg.instances);
    for check in &report.checks {
        println!(
            "check {:<24} {}  ({})",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    if report.all_passed() {
        println!(
            "verify: all {} checks passed (seed {})",
            report.checks.len(),
            cfg.seed
        );
        0
    } else {
        println!("verify: FAILURES present (seed {})", cfg.seed);
        1
    }
}

/// Entry point used by the `polyshell` binary. Returns the process exit
/// code: 0 success, 1 solver/runtime failure, 2 configuration error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    configure_thread_pool();

    let cfg = match resolve_config(&cli.overrides) {
        Ok(cfg) => cfg,
        Err(ConfigError(msg)) => {
            eprintln!("configuration error: {msg}");
            return 2;
        }
    };

    // subcommand-level overrides and dispatch
    let outcome: crate::Result<()> = match &cli.command {
        Command::Indent { f, svg } => {
            let mut cfg = cfg;
            if let Some(f) = f {
                cfg.f = *f;
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            run_indent(&cfg, cfg.f, svg.as_deref())
        }
        Command::Relax { f, svg } => {
            let mut cfg = cfg;
            if let Some(f) = f {
                cfg.f = *f;
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            run_relax(&cfg, cfg.f, svg.as_deref())
        }
        Command::Sweep {
            f_max,
            steps,
            total_force,
        } => {
            let mut cfg = cfg;
            if let Some(f_max) = f_max {
                cfg.f_max = *f_max;
            }
            if let Some(steps) = steps {
                cfg.steps = *steps;
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            run_sweep(&cfg, *total_force)
        }
        Command::Table1 { counts } => {
            let mut cfg = cfg;
            if let Some(raw) = counts {
                match ExperimentConfig::parse_list("counts", raw) {
                    Ok(list) => cfg.counts = list,
                    Err(ConfigError(msg)) => {
                        eprintln!("configuration error: {msg}");
                        return 2;
                    }
                }
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            run_table1(&cfg)
        }
        Command::Converge { n_list, total, svg } => {
            let mut cfg = cfg;
            if let Some(raw) = n_list {
                match ExperimentConfig::parse_list("n_list", raw) {
                    Ok(list) => cfg.n_list = list,
                    Err(ConfigError(msg)) => {
                        eprintln!("configuration error: {msg}");
                        return 2;
                    }
                }
            }
            if let Some(total) = total {
                cfg.total_force = *total;
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            run_converge(&cfg, svg.as_deref())
        }
        Command::Verify { instances } => {
            let mut cfg = cfg;
            if let Some(instances) = instances {
                cfg.instances = *instances;
            }
            if let Err(ConfigError(msg)) = cfg.validate() {
                eprintln!("configuration error: {msg}");
                return 2;
            }
            return run_verify(&cfg);
        }
    };

    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
