//! The `foliant` command line.
//!
//! Each subcommand loads a [`ProblemConfig`], runs one computation and
//! writes a [`Report`] to `--out` or standard output. `check` exits with the
//! verdict's code; any usage or configuration error exits with 1.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::checker::{
    check_cid, check_hyperplane, check_main, check_stettner_nowak, UniquenessReport,
};
use crate::config::{load_config, parse_reals, ConfigError, FoliationSpec, ProblemConfig};
use crate::field::{Ivp, ScalarMap};
use crate::linalg::{LinalgError, Vector};
use crate::modulus::{modulus_gradient, modulus_sample, ModulusError, ModulusQuery};
use crate::ode::{funnel_traced, integrate_rk4, OdeError};
use crate::projective::{hyperplane_basis, ProjectivePoint};
use crate::report::{real, Report};
use crate::rotation::rotation_between;
use crate::transform::LipschitzEstimate;

pub const CONFIG_ERROR_CODE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "foliant",
    version,
    about = "Uniqueness checks for autonomous ODEs along transversal foliations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transversality and Lipschitz checks; exit code reports the verdict.
    Check(CheckArgs),
    /// Modulus of continuity at a point across a hyperplane.
    Modulus(ModulusArgs),
    /// Perturbation funnels around p0, with optional CSV trajectories.
    Funnel(FunnelArgs),
    /// Prints the rotation sending u to v.
    Rotate(RotateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Base point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Hyperplane normal, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FunnelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory for trajectory CSV files.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RotateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a).and_then(|o| emit(o, a.common.out.as_deref())),
        Command::Modulus(a) => cmd_modulus(a).and_then(|o| emit(o, a.common.out.as_deref())),
        Command::Funnel(a) => cmd_funnel(a).and_then(|o| emit(o, a.common.out.as_deref())),
        Command::Rotate(a) => cmd_rotate(a).and_then(|o| emit(o, None)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("foliant: {e}");
            CONFIG_ERROR_CODE
        }
    }
}

fn emit(outcome: Outcome, out: Option<&Path>) -> Result<i32, CliError> {
    match out {
        Some(path) => write_file(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.code)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(common: &Common) -> Result<ProblemConfig, CliError> {
    let mut config = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        config.check.seed = seed;
    }
    Ok(config)
}

fn header(report: &mut Report, command: &str, config: &ProblemConfig) {
    report
        .section("run")
        .text("tool", "foliant")
        .text("version", env!("CARGO_PKG_VERSION"))
        .text("command", command)
        .text("config_sha256", &config.sha256)
        .text("seed", config.check.seed);
    report
        .section("problem")
        .text("dimension", config.dimension)
        .text("field", &config.field_source)
        .reals("p0", &config.p0)
        .real("t0", config.t0);
}

fn foliation_section(report: &mut Report, spec: &FoliationSpec) {
    let s = report.section("foliation");
    s.text("kind", spec.kind());
    match spec {
        FoliationSpec::Identity => {}
        FoliationSpec::Affine { normal } => {
            s.reals("normal", normal);
        }
        FoliationSpec::Graph { g } => {
            s.text("g", g);
        }
        FoliationSpec::Curve {
            gamma1,
            gamma2,
            interval,
            samples,
        } => {
            s.text("gamma1", gamma1.join("; "))
                .text("gamma2", gamma2.join("; "))
                .reals("interval", &[interval.0, interval.1])
                .text("samples", samples);
        }
        FoliationSpec::Map { forward, inverse } => {
            s.text("forward", forward.join("; "));
            s.text(
                "inverse",
                inverse
                    .as_ref()
                    .map_or("none".to_string(), |i| i.join("; ")),
            );
        }
        FoliationSpec::Registry { name } => {
            s.text("name", name);
        }
        FoliationSpec::Direction { u } => {
            s.reals("u", u);
        }
    }
}

/// Runs the check selected by the foliation kind.
pub fn run_check(config: &ProblemConfig) -> UniquenessReport {
    let params = &config.check;
    match (&config.foliation_spec, &config.foliation) {
        (_, Some(phi)) => check_main(&config.field, phi, params),
        (FoliationSpec::Affine { normal }, None) => {
            let point = ProjectivePoint::new(normal).expect("validated on load");
            check_hyperplane(&config.field, &config.p0, &hyperplane_basis(&point), params)
        }
        (FoliationSpec::Direction { u }, None) => {
            let field = config.field.clone();
            let f = ScalarMap::from_fn(
                format!("{} (second component)", field.name()),
                2,
                move |z| Ok(field.eval(z)?[1]),
            );
            check_stettner_nowak(&f, &config.p0, u, params)
        }
        _ => check_cid(&config.field, &config.p0, params),
    }
}

fn lipschitz_section(report: &mut Report, name: &str, est: &Option<LipschitzEstimate>) {
    let Some(e) = est else {
        report.section(name).text("status", "not computed");
        return;
    };
    report
        .section(name)
        .real("constant", e.constant)
        .real("region", e.region)
        .text("pairs_used", e.pairs_used)
        .text("blowup", e.blowup)
        .real("growth", e.growth)
        .text("seed", e.seed);
    report.strata(&format!("{name}.strata"), &e.strata);
}

/// Renders a [`UniquenessReport`] with the run header.
pub fn check_report(config: &ProblemConfig, r: &UniquenessReport) -> Report {
    let mut report = Report::new();
    header(&mut report, "check", config);
    foliation_section(&mut report, &config.foliation_spec);
    report
        .section("parameters")
        .real("radius", r.params.radius)
        .text("budget", r.params.budget)
        .text("seed", r.params.seed)
        .real("threshold", r.params.threshold);
    report
        .section("result")
        .text("theorem", r.theorem.as_str())
        .text("field", &r.field)
        .text("foliation", &r.foliation)
        .reals("p0", &r.p0)
        .opt_real("transversality", r.transversality_value)
        .text(
            "normal_at_p0",
            r.normal_at_p0
                .as_ref()
                .map_or("none".to_string(), |n| crate::report::reals(n)),
        )
        .text("verdict", r.verdict)
        .text("exit_code", r.verdict.exit_code());
    lipschitz_section(&mut report, "lip_f_phi", &r.lip_f_phi);
    lipschitz_section(&mut report, "lip_inv_jac", &r.lip_inv_jac);
    let d = report.section("diagnostics");
    d.text("count", r.diagnostics.len());
    for (i, msg) in r.diagnostics.iter().enumerate() {
        d.text(&format!("d{}", i + 1), msg);
    }
    report
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let mut config = load(&args.common)?;
    if let Some(b) = args.budget {
        config.check.budget = b;
    }
    let r = run_check(&config);
    Ok(Outcome {
        code: r.verdict.exit_code(),
        text: check_report(&config, &r).render(),
    })
}

fn cli_vector(text: &str, dim: usize, what: &str) -> Result<Vector, CliError> {
    let v = parse_reals(text).map_err(|m| CliError::Usage(format!("--{what}: {m}")))?;
    if v.len() != dim {
        return Err(CliError::Usage(format!(
            "--{what}: expected {dim} entries, found {}",
            v.len()
        )));
    }
    Ok(Vector::new(v)?)
}

pub fn cmd_modulus(args: &ModulusArgs) -> Result<Outcome, CliError> {
    let mut config = load(&args.common)?;
    let dim = config.dimension;
    if let Some(b) = args.budget {
        config.check.budget = b;
    }
    if let Some(p) = &args.p {
        config.modulus.p = cli_vector(p, dim, "p")?;
    }
    if let Some(v) = &args.v {
        config.modulus.v = cli_vector(v, dim, "v")?;
    }
    if let Some(d) = args.delta {
        config.modulus.delta = d;
    }
    let m = &config.modulus;
    let v = ProjectivePoint::new(&m.v)?;
    let query = ModulusQuery::new(config.field.clone(), m.p.clone(), v.clone(), m.delta)?
        .budget(config.check.budget)
        .seed(config.check.seed);
    let est = modulus_sample(&query)?;
    let gradient = modulus_gradient(&config.field, &m.p, &v);

    let mut report = Report::new();
    header(&mut report, "modulus", &config);
    report
        .section("parameters")
        .reals("p", &m.p)
        .reals("v", &m.v)
        .reals("v_canonical", v.rep())
        .real("delta", m.delta)
        .text("budget", config.check.budget)
        .text("seed", config.check.seed);
    let s = report.section("modulus");
    s.real("sampled", est.value)
        .text("pairs_used", est.pairs_used)
        .text("blowup", est.blowup)
        .real("growth", est.growth);
    match gradient {
        Ok(g) => s.real("gradient", g),
        Err(e) => s.text("gradient", format!("unavailable: {e}")),
    };
    report.strata("modulus.strata", &est.strata);
    Ok(Outcome {
        code: 0,
        text: report.render(),
    })
}

pub fn cmd_funnel(args: &FunnelArgs) -> Result<Outcome, CliError> {
    let config = load(&args.common)?;
    let f = &config.funnel;
    let ivp = Ivp::new(config.field.clone(), config.p0.clone(), config.t0)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let reference = integrate_rk4(&ivp, f.t_end, f.step)?;
    let bundles = funnel_traced(
        &ivp,
        &f.epsilons,
        f.t_end,
        f.step,
        f.directions,
        config.check.seed,
    )?;

    if let Some(dir) = &args.csv {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_file(&dir.join("reference.csv"), &reference.to_csv())?;
        for (i, (_, runs)) in bundles.iter().enumerate() {
            for (j, tr) in runs.iter().enumerate() {
                write_file(&dir.join(format!("eps{i}_dir{j}.csv")), &tr.to_csv())?;
            }
        }
        let mut csv = String::from("t");
        for (r, _) in &bundles {
            csv.push_str(&format!(",diameter_{}", real(r.epsilon)));
        }
        csv.push('\n');
        for (k, t) in reference.times().iter().enumerate() {
            csv.push_str(&real(*t));
            for (r, _) in &bundles {
                csv.push(',');
                csv.push_str(&real(r.diameter[k]));
            }
            csv.push('\n');
        }
        write_file(&dir.join("diameters.csv"), &csv)?;
    }

    let mut report = Report::new();
    header(&mut report, "funnel", &config);
    report
        .section("parameters")
        .real("t_end", f.t_end)
        .real("step", f.step)
        .reals("epsilons", &f.epsilons)
        .text("directions", f.directions)
        .text("method", reference.method());
    report
        .section("reference")
        .real("step_used", reference.step())
        .text("samples", reference.len())
        .reals("terminal", reference.terminal());
    for (i, (r, _)) in bundles.iter().enumerate() {
        report
            .section(&format!("funnel.{i}"))
            .real("epsilon", r.epsilon)
            .text("trajectories", r.trajectories)
            .real(
                "initial_diameter",
                r.diameter[if reference.is_backward() {
                    r.diameter.len() - 1
                } else {
                    0
                }],
            )
            .real("final_diameter", r.final_diameter)
            .real(
                "max_diameter",
                r.diameter.iter().cloned().fold(0.0, f64::max),
            )
            .opt_real(
                "final_over_epsilon",
                (r.epsilon > 0.0).then(|| r.final_diameter / r.epsilon),
            );
    }
    Ok(Outcome {
        code: 0,
        text: report.render(),
    })
}

pub fn cmd_rotate(args: &RotateArgs) -> Result<Outcome, CliError> {
    let u = parse_reals(&args.u).map_err(|m| CliError::Usage(format!("--u: {m}")))?;
    let v = parse_reals(&args.v).map_err(|m| CliError::Usage(format!("--v: {m}")))?;
    if u.len() != v.len() || u.len() < 2 {
        return Err(CliError::Usage(format!(
            "--u and --v need the same dimension of at least 2, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let u = Vector::new(u)?.normalized()?;
    let v = Vector::new(v)?.normalized()?;
    let r = rotation_between(&u, &v)?;
    let mut report = Report::new();
    report
        .section("rotation")
        .reals("u", &u)
        .reals("v", &v)
        .real("det", r.det()?)
        .real("residual", r.mul_vec(&u).distance(&v));
    let s = report.section("matrix");
    for i in 0..r.rows() {
        s.reals(&format!("row{}", i + 1), r.row(i).as_slice());
    }
    Ok(Outcome {
        code: 0,
        text: report.render(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rotate_prints_a_quarter_turn() {
        let out = cmd_rotate(&RotateArgs {
            u: "1,0".into(),
            v: "0,1".into(),
        })
        .unwrap();
        assert!(
            out.text
                .contains("row1 = 0.0000000000000000e0, -1.0000000000000000e0"),
            "{}",
            out.text
        );
        assert!(out
            .text
            .contains("row2 = 1.0000000000000000e0, 0.0000000000000000e0"));
    }

    #[test]
    fn rotate_refuses_antipodes() {
        let err = cmd_rotate(&RotateArgs {
            u: "1,0,0".into(),
            v: "-1,0,0".into(),
        });
        assert!(matches!(
            err,
            Err(CliError::Linalg(LinalgError::Antipodal { .. }))
        ));
    }

    #[test]
    fn parse_accepts_negative_vectors() {
        let cli = Cli::try_parse_from(["foliant", "rotate", "--u", "-1,0", "--v", "0,1"]).unwrap();
        assert!(matches!(cli.command, Command::Rotate(RotateArgs { ref u, .. }) if u == "-1,0"));
        assert!(Cli::try_parse_from(["foliant", "check"]).is_err());
    }
}
