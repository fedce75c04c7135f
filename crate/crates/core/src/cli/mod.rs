//! The `evykit` command line.
//!
//! `evykit <evy|kernel|fit|simulate|msy|audit> --config <path> [--data <csv>] [--out <dir>]`
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 domain or
//! precondition failure (including audit violations and catch floors above
//! the viable yields), 4 I/O error. Every output file starts with the line
//! `# evykit <version> config_sha256=<hex>`.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use sha2::{Digest, Sha256};

use crate::ecosystem::ConstraintSet;
use crate::error::Error;
use crate::estimation::{fit, ObservationSeries, Weights};
use crate::lotka_volterra::{lv_evy_closed_form, LvModel};
use crate::simulate::{audit, run, AuditReport, Trajectory};
use crate::viability::{favorable_conditions, grid_kernel, AnalyticKernel};
use crate::yields::{self, equilibrium_catches, msy_for_species, msy_schaefer, BindingBranch};
use config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Evy,
    Kernel,
    Fit,
    Simulate,
    Msy,
    Audit,
}

#[derive(Debug, Parser)]
#[command(name = "evykit", version, about = "Ecosystem viable yields of harvested prey-predator fisheries")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// INI run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Observation CSV for `fit`, trajectory CSV for `audit`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`, default `.`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: msg.into() }
    }

    fn domain(msg: impl Into<String>) -> Self {
        Self { code: EXIT_DOMAIN, message: msg.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CliError::config(e.to_string()),
            Error::Domain(_) | Error::Numerical(_) => CliError::domain(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code, printing diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("evykit: {}", e.message);
            e.code
        }
    }
}

/// Output sink: the directory plus the provenance line.
struct Outputs {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, body: &[u8]) -> CliResult<()> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let path = self.dir.join(name);
        let mut bytes = self.header.clone().into_bytes();
        bytes.extend_from_slice(body);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

fn provenance(config_bytes: &[u8]) -> String {
    let hash = hex::encode(Sha256::digest(config_bytes));
    format!("# evykit {} config_sha256={hash}\n", env!("CARGO_PKG_VERSION"))
}

/// Runs one command; returns the text printed on success.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let bytes = fs::read(&cli.config).map_err(|e| CliError::io(&cli.config, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::config(format!("{}: not UTF-8", cli.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let mut out = Outputs { dir, header: provenance(&bytes), written: Vec::new() };
    let outcome = match cli.command {
        Command::Evy => cmd_evy(&cfg, &mut out),
        Command::Kernel => cmd_kernel(&cfg, &mut out),
        Command::Fit => cmd_fit(&cfg, cli.data.as_deref(), &mut out),
        Command::Simulate => cmd_simulate(&cfg, &mut out),
        Command::Msy => cmd_msy(&cfg, &mut out),
        Command::Audit => cmd_audit(&cfg, cli.data.as_deref(), &mut out),
    };
    let mut summary = outcome?;
    for p in &out.written {
        let _ = writeln!(summary, "wrote {}", p.display());
    }
    Ok(summary)
}

/// `x` rounded to three significant figures.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.2e}").parse().expect("valid float");
    if rounded.abs() >= 100.0 {
        format!("{rounded:.0}")
    } else {
        format!("{rounded}")
    }
}

const SPECIES: [&str; 2] = ["prey", "pred"];

fn floors_of(c: &ConstraintSet) -> CliResult<ConstraintSet> {
    Ok(ConstraintSet::biomass_only(c.min_biomass().to_vec())?)
}

fn cmd_evy(cfg: &RunConfig, out: &mut Outputs) -> CliResult<String> {
    let p = *cfg.require_model()?;
    let c = cfg.require_constraints()?;
    let model = LvModel::new(p);
    let floors = floors_of(c)?;
    let eq = equilibrium_catches(&model, &floors)?;
    let (evy, binding, generic) = match &cfg.state0 {
        Some(x0) => {
            let cf = lv_evy_closed_form(&p, &floors, x0)?;
            let g = yields::evy(&model, &floors, x0)?;
            (
                vec![cf.prey, cf.predator],
                vec![cf.prey_branch, BindingBranch::EquilibriumCapped],
                Some(g.evy),
            )
        }
        None => (eq.catches.clone(), vec![BindingBranch::EquilibriumCapped; 2], None),
    };
    let favorable_requested = favorable_conditions(&model, c)?;
    let favorable_at_evy = favorable_conditions(&model, &floors.with_min_catch(evy.clone())?)?;
    let exceeded: Vec<usize> = (0..2).filter(|&i| c.min_catch()[i] > evy[i]).collect();

    let mut r = String::new();
    let _ = writeln!(r, "command = evy");
    let start = match &cfg.state0 {
        Some(x) => format!("{},{}", x[0], x[1]),
        None => "equilibrium".into(),
    };
    let _ = writeln!(r, "state0 = {start}");
    for i in 0..2 {
        let s = SPECIES[i];
        let _ = writeln!(r, "min_biomass_{s} = {}", floors.min_biomass()[i]);
        let _ = writeln!(r, "equilibrium_catch_{s} = {}", eq.catches[i]);
        let _ = writeln!(r, "evy_{s} = {}", evy[i]);
        let _ = writeln!(r, "binding_{s} = {}", binding[i].as_str());
        if let Some(g) = &generic {
            let _ = writeln!(r, "evy_bisection_{s} = {}", g[i]);
        }
    }
    let _ = writeln!(r, "favorable_conditions_requested = {favorable_requested}");
    let _ = writeln!(r, "favorable_conditions_at_evy = {favorable_at_evy}");
    for i in 0..2 {
        let _ = writeln!(r, "evy_{}_t_per_year ~ {}", SPECIES[i], sig3(evy[i]));
    }
    for &i in &exceeded {
        let _ = writeln!(
            r,
            "audit: min_catch_{} = {} exceeds the viable yield {}",
            SPECIES[i],
            c.min_catch()[i],
            evy[i]
        );
    }
    out.write("evy_report.txt", r.as_bytes())?;
    let mut csv = String::from(
        "evy_prey,evy_pred,equilibrium_catch_prey,equilibrium_catch_pred,binding_prey,binding_pred,favorable_at_evy\n",
    );
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        evy[0],
        evy[1],
        eq.catches[0],
        eq.catches[1],
        binding[0].as_str(),
        binding[1].as_str(),
        favorable_at_evy
    );
    out.write("evy.csv", csv.as_bytes())?;
    if !exceeded.is_empty() {
        let names: Vec<&str> = exceeded.iter().map(|&i| SPECIES[i]).collect();
        return Err(CliError::domain(format!(
            "requested catch floor above the viable yield for: {}",
            names.join(", ")
        )));
    }
    Ok(r)
}

fn cmd_kernel(cfg: &RunConfig, out: &mut Outputs) -> CliResult<String> {
    let p = *cfg.require_model()?;
    let c = cfg.require_constraints()?;
    let model = LvModel::new(p);
    let geometry = cfg.grid.geometry(&p)?;
    let grid = grid_kernel(&model, c, &geometry, cfg.grid.max_iters)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv).map_err(|e| CliError::io(Path::new("kernel.csv"), e))?;
    out.write("kernel.csv", &csv)?;

    let last = grid.layers.len() - 1;
    let mut r = String::new();
    let _ = writeln!(r, "command = kernel");
    let _ = writeln!(r, "cells = {}x{}", geometry.cells()[0], geometry.cells()[1]);
    let _ = writeln!(r, "members = {}", grid.member_count(last));
    let _ = writeln!(r, "empty = {}", grid.is_empty());
    let _ = writeln!(r, "layers = {}", grid.layers.len());
    match grid.stationary_at {
        Some(k) => writeln!(r, "stationary_at = {k}"),
        None => writeln!(r, "stationary_at = none"),
    }
    .ok();
    match AnalyticKernel::new(&model, c.clone()) {
        Ok(k) => {
            let _ = writeln!(r, "agreement_pct = {}", 100.0 * grid.agreement(&k));
        }
        Err(e) => {
            let _ = writeln!(r, "agreement_pct = n/a ({e})");
        }
    }
    out.write("kernel_summary.txt", r.as_bytes())?;
    Ok(r)
}

fn cmd_fit(cfg: &RunConfig, data: Option<&Path>, out: &mut Outputs) -> CliResult<String> {
    let data = data.ok_or_else(|| CliError::config("fit needs --data <observations.csv>"))?;
    let mut fc = cfg
        .fit
        .clone()
        .ok_or_else(|| CliError::config("fit needs an initial guess in [fit] or [model]"))?;
    let file = fs::File::open(data).map_err(|e| CliError::io(data, e))?;
    let series = ObservationSeries::read_csv(file)?;
    if cfg.uniform_weights {
        fc.weights = Some(Weights::uniform(series.len()));
    }
    let res = fit(&series, &fc)?;
    let p = res.params;
    let mut r = String::new();
    let _ = writeln!(r, "command = fit");
    for (name, v) in ["r", "l", "k", "alpha", "beta"].iter().zip(p.to_array()) {
        let _ = writeln!(r, "{name} = {v}");
    }
    let _ = writeln!(r, "kappa = {}", p.kappa());
    let _ = writeln!(r, "objective = {}", res.objective);
    let _ = writeln!(r, "initial_objective = {}", res.initial_objective);
    let _ = writeln!(r, "converged = {}", res.converged);
    let _ = writeln!(r, "iterations = {}", res.iterations);
    out.write("fit_params.txt", r.as_bytes())?;
    let mut csv = String::from("year,biomass_prey_obs,biomass_pred_obs,biomass_prey_fit,biomass_pred_fit\n");
    for t in 0..series.len() {
        let (o, f) = (series.biomass()[t], res.trajectory[t]);
        let _ = writeln!(csv, "{},{},{},{},{}", series.years()[t], o[0], o[1], f[0], f[1]);
    }
    out.write("fit_trajectory.csv", csv.as_bytes())?;
    Ok(r)
}

fn simulate_from_config(cfg: &RunConfig) -> CliResult<(Trajectory, ConstraintSet)> {
    let p = *cfg.require_model()?;
    let c = cfg.require_constraints()?.clone();
    let x0 = cfg.require_state0()?;
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::config("missing [simulate] section (policy)"))?;
    let t = run(&LvModel::new(p), x0, &sim.policy, &c, sim.horizon)?;
    Ok((t, c))
}

fn audit_text(a: &AuditReport) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "[audit]");
    let _ = writeln!(r, "violations = {}", a.violations.len());
    let _ = writeln!(r, "biomass_ok = {}", a.biomass_ok);
    let _ = writeln!(r, "catch_ok = {}", a.catch_ok);
    match a.first_violation_year {
        Some(y) => writeln!(r, "first_violation_year = {y}"),
        None => writeln!(r, "first_violation_year = none"),
    }
    .ok();
    for v in &a.violations {
        let _ = writeln!(
            r,
            "year {} {} {}: {} < {}",
            v.year,
            SPECIES.get(v.species).copied().unwrap_or("?"),
            v.kind.as_str(),
            v.value,
            v.floor
        );
    }
    r
}

fn cmd_simulate(cfg: &RunConfig, out: &mut Outputs) -> CliResult<String> {
    let (t, c) = simulate_from_config(cfg)?;
    let mut csv = Vec::new();
    t.write_csv(&mut csv).map_err(|e| CliError::io(Path::new("trajectory.csv"), e))?;
    out.write("trajectory.csv", &csv)?;
    let mut r = String::new();
    let _ = writeln!(r, "command = simulate");
    let _ = writeln!(r, "policy = {}", t.policy);
    let _ = writeln!(r, "horizon = {}", t.horizon());
    let fin = t.final_state();
    let _ = writeln!(r, "final_state = {},{}", fin[0], fin[1]);
    let _ = writeln!(r, "extinction = {}", t.rows.iter().any(|row| row.extinction));
    r.push_str(&audit_text(&audit(&t, &c)));
    out.write("simulate_report.txt", r.as_bytes())?;
    Ok(r)
}

fn cmd_audit(cfg: &RunConfig, data: Option<&Path>, out: &mut Outputs) -> CliResult<String> {
    let (t, c) = match data {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            (Trajectory::read_csv(file)?, cfg.require_constraints()?.clone())
        }
        None => simulate_from_config(cfg)?,
    };
    let a = audit(&t, &c);
    let mut r = String::from("command = audit\n");
    r.push_str(&audit_text(&a));
    out.write("audit_report.txt", r.as_bytes())?;
    if !a.is_clean() {
        return Err(CliError::domain(format!(
            "{} constraint violation(s), first in year {}",
            a.violations.len(),
            a.first_violation_year.expect("nonempty")
        )));
    }
    Ok(r)
}

fn cmd_msy(cfg: &RunConfig, out: &mut Outputs) -> CliResult<String> {
    let p = *cfg.require_model()?;
    let c = match &cfg.constraints {
        Some(c) => c.clone(),
        None => ConstraintSet::biomass_only(vec![0.0, 0.0])?,
    };
    let model = LvModel::new(p);
    let bounds = cfg.msy.effort_box(&p)?;
    let mut r = String::from("command = msy\n");
    let mut csv = String::from(
        "objective,msy,catch_prey,catch_pred,biomass_prey,biomass_pred,effort_prey,effort_pred,viable\n",
    );
    for i in 0..2 {
        let s = SPECIES[i];
        match msy_for_species(&model, &c, &bounds, i, &cfg.msy.search)? {
            Some(m) => {
                let (x, e) = (&m.equilibrium.state, &m.equilibrium.efforts);
                let _ = writeln!(r, "msy_{s} = {}", m.value());
                let _ = writeln!(r, "msy_{s}_t_per_year ~ {}", sig3(m.value()));
                let _ = writeln!(r, "msy_{s}_state = {},{}", x[0], x[1]);
                let _ = writeln!(r, "msy_{s}_efforts = {},{}", e[0], e[1]);
                let _ = writeln!(r, "msy_{s}_viable = {}", m.viable);
                let _ = writeln!(
                    csv,
                    "{s},{},{},{},{},{},{},{},{}",
                    m.value(),
                    m.msy[0],
                    m.msy[1],
                    x[0],
                    x[1],
                    e[0],
                    e[1],
                    m.viable
                );
            }
            None => {
                let _ = writeln!(r, "msy_{s} = none");
            }
        }
    }
    if p.alpha() == 0.0 && p.beta() == 0.0 {
        let sch = msy_schaefer(&p);
        let _ = writeln!(r, "schaefer_msy_prey = {}", sch.msy);
        let _ = writeln!(r, "schaefer_biomass_prey = {}", sch.biomass);
    }
    out.write("msy_report.txt", r.as_bytes())?;
    out.write("msy.csv", csv.as_bytes())?;
    Ok(r)
}
