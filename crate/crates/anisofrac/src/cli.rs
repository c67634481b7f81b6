//! Command-line driver.
//!
//! Subcommands: `constants`, `apply`, `solve`, `barriers`, `verify-main`,
//! `verify-holder`, `localize-check`. Exit codes: 0 all checks passed,
//! 1 a check failed, 2 configuration error, 3 internal error.
//!
//! Runs are reproducible: with the same configuration, seed and a single
//! thread (the default), reports are byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{field_spec_from_path, probes_from_path, ProblemConfig};
use crate::constants::{CTildeVariant, KernelConstants};
use crate::decomposition::BoxDomain;
use crate::error::{Error, Result};
use crate::fields::presets::FieldSpec;
use crate::fields::ScalarField;
use crate::operator::apply_l;
use crate::report::CheckReport;
use crate::solver::{solve, CollocationProblem, DEFAULT_NODE_CAP};
use crate::verification::{
    estimate_parameters_for, log_spaced_probes, probe_holder_ratio, verify_gradient_estimate,
    HolderInstance, Localization, Provenance,
};

#[derive(Parser, Debug)]
#[command(
    name = "anisofrac",
    version,
    about = "Anisotropic mixed local/nonlocal operator toolkit"
)]
pub struct Cli {
    /// Worker threads (1 keeps reports byte-reproducible).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the kernel constants for one (N, s) pair as JSON.
    Constants {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        s: f64,
    },
    /// Evaluate the operator on a field at points read from CSV.
    Apply {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the exterior-data Dirichlet problem described by the config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the barrier checks on a field.
    Barriers {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 25)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the log-Lipschitz gradient estimate.
    VerifyMain {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// probes.json with explicit {"ys": [...]} offsets
        #[arg(long)]
        probes: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Additionally write (y, lhs, rhs) rows as CSV for plotting.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
    },
    /// Probe the interior Hoelder bound for du/dx_n.
    VerifyHolder {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the cut-off localization identity L v = g on B_{1/2}.
    LocalizeCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse the process arguments and execute; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    run_cli(cli)
}

pub fn run_cli(cli: Cli) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Json(_) | Error::Io(_) => 2,
                _ => 3,
            }
        }
    }
}

fn load_problem(path: &Option<PathBuf>) -> Result<ProblemConfig> {
    match path {
        Some(p) => ProblemConfig::from_path(p),
        None => Ok(ProblemConfig::default_two_group()),
    }
}

/// Named preset shorthands for `--preset`; parameters derive from the
/// problem configuration.
fn preset_by_name(name: &str, cfg: &ProblemConfig) -> Result<FieldSpec> {
    let decomp = cfg.decomposition()?;
    match name {
        "affine" => Ok(FieldSpec::Affine { constant: 0.0, slope: 1.0, taper: (1.5, 2.0) }),
        "quadratic-taper" => Ok(FieldSpec::QuadraticTaper { taper: (1.5, 2.0) }),
        "separable-bump" => Ok(FieldSpec::SeparableBump {
            amplitude: 1.0,
            widths: Some(vec![0.9; decomp.num_groups()]),
        }),
        "wide-bump" => Ok(FieldSpec::SeparableBump {
            amplitude: 1.0,
            widths: Some(vec![1.2; decomp.num_groups()]),
        }),
        "fractional-bump" => Ok(FieldSpec::FractionalBump {
            group: 1,
            s: decomp.order(0),
            radius: cfg.radii[0],
        }),
        other => Err(Error::Config(format!(
            "unknown preset \"{other}\" (expected affine, quadratic-taper, separable-bump, wide-bump, fractional-bump)"
        ))),
    }
}

fn load_field(
    field: &Option<PathBuf>,
    preset: &Option<String>,
    cfg: &ProblemConfig,
    default_preset: &str,
) -> Result<ScalarField> {
    let decomp = cfg.decomposition()?;
    let spec = match (field, preset) {
        (Some(path), _) => field_spec_from_path(path)?,
        (None, Some(name)) => preset_by_name(name, cfg)?,
        (None, None) => preset_by_name(default_preset, cfg)?,
    };
    spec.build(&decomp)
}

fn write_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn summarize(reports: &[CheckReport], out_was_file: bool) {
    for r in reports {
        if out_was_file {
            println!("{}", r.summary_line());
        } else {
            eprintln!("{}", r.summary_line());
        }
    }
}

#[derive(Serialize)]
struct CheckBundle {
    checks: Vec<CheckReport>,
    pass: bool,
}

fn bundle(checks: Vec<CheckReport>) -> CheckBundle {
    let pass = checks.iter().all(|c| c.pass);
    CheckBundle { checks, pass }
}

fn parse_points_csv(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let coords =
            coords.map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if coords.len() != dim {
            return Err(Error::Config(format!(
                "{}:{}: expected {dim} coordinates, got {}",
                path.display(),
                lineno + 1,
                coords.len()
            )));
        }
        points.push(coords);
    }
    Ok(points)
}

pub fn execute(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Constants { n, s } => {
            let k = KernelConstants::compute(*n, *s)?;
            let text = serde_json::to_string_pretty(&k)?;
            println!("{text}");
            Ok(true)
        }

        Command::Apply {
            config,
            field,
            points,
            out,
        } => {
            let cfg = ProblemConfig::from_path(config)?;
            let decomp = cfg.decomposition()?;
            let quad = cfg.quadrature_spec()?;
            let u = field_spec_from_path(field)?.build(&decomp)?;
            let pts = parse_points_csv(points, decomp.dim())?;
            let mut csv = String::new();
            for x in &pts {
                let r = apply_l(&u, &decomp, x, &quad)?;
                for c in x {
                    csv.push_str(&format!("{c},"));
                }
                csv.push_str(&format!("{},{}\n", r.value, r.error_estimate));
            }
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => {
                    std::io::stdout().write_all(csv.as_bytes())?;
                }
            }
            Ok(true)
        }

        Command::Solve { config, out } => {
            let cfg = ProblemConfig::from_path(config)?;
            let decomp = cfg.decomposition()?;
            let domain = cfg.domain()?;
            let quad = cfg.quadrature_spec()?;
            let spacing = cfg.spacing()?;
            let rhs_spec = cfg
                .rhs
                .clone()
                .ok_or_else(|| Error::Config("solver needs key \"rhs\"".into()))?;
            let ext_spec = cfg
                .exterior
                .clone()
                .ok_or_else(|| Error::Config("solver needs key \"exterior\"".into()))?;
            let rhs = rhs_spec.build(&decomp)?;
            let exterior = ext_spec.build(&decomp)?;
            let problem = CollocationProblem {
                decomp: &decomp,
                domain: &domain,
                rhs: &rhs,
                exterior: &exterior,
                spacing,
                quad,
                node_cap: cfg.node_cap.unwrap_or(DEFAULT_NODE_CAP),
            };
            let sol = solve(&problem)?;
            #[derive(Serialize)]
            struct SolutionJson<'a> {
                origin: &'a [f64],
                spacing: &'a [f64],
                shape: &'a [usize],
                values: &'a [f64],
                residual: f64,
                condition_estimate: f64,
                condition_warning: bool,
            }
            write_json(
                &SolutionJson {
                    origin: &sol.field.origin,
                    spacing: &sol.field.spacing,
                    shape: &sol.field.shape,
                    values: &sol.field.values,
                    residual: sol.residual,
                    condition_estimate: sol.condition_estimate,
                    condition_warning: sol.condition_warning,
                },
                &Some(out.clone()),
            )?;
            println!(
                "solved {} unknowns, residual {:.3e}{}",
                sol.interior_values.len(),
                sol.residual,
                if sol.condition_warning {
                    " (conditioning warning)"
                } else {
                    ""
                }
            );
            Ok(true)
        }

        Command::Barriers {
            config,
            field,
            preset,
            probes,
            seed,
            out,
        } => {
            let cfg = load_problem(config)?;
            let decomp = cfg.decomposition()?;
            let domain = cfg.domain()?;
            let quad = cfg.quadrature_spec()?;
            let u = load_field(field, preset, &cfg, "separable-bump")?;
            let (params, norms) =
                estimate_parameters_for(&u, &decomp, &domain, CTildeVariant::Standard, 31, &quad)?;
            let mut checks = crate::barriers::check_phi_properties(
                &u,
                &decomp,
                &domain,
                norms.sup_dnu,
                *probes,
                20 * probes,
                *seed,
                &quad,
            )?;
            checks.extend(crate::barriers::check_psi_supersolution(
                &u,
                &params,
                &decomp,
                &domain,
                4 * probes,
                10 * probes,
                *seed,
                &quad,
            )?);
            let b = bundle(checks);
            write_json(&b, out)?;
            summarize(&b.checks, out.is_some());
            Ok(b.pass)
        }

        Command::VerifyMain {
            config,
            field,
            preset,
            probes,
            seed: _,
            out,
            emit_plot_data,
        } => {
            let cfg = load_problem(config)?;
            let decomp = cfg.decomposition()?;
            let domain = cfg.domain()?;
            let quad = cfg.quadrature_spec()?;
            let u = load_field(field, preset, &cfg, "separable-bump")?;
            let ys = match probes {
                Some(path) => probes_from_path(path)?.ys,
                None => log_spaced_probes(1e-3, 0.96 * domain.local_radius() / 4.0, 20),
            };
            let report = verify_gradient_estimate(
                &u,
                &decomp,
                &domain,
                &ys,
                CTildeVariant::Standard,
                Provenance::Manufactured,
                61,
                &quad,
            )?;
            if let Some(plot) = emit_plot_data {
                let mut csv = String::from("y,lhs,rhs\n");
                for p in &report.probes {
                    csv.push_str(&format!("{},{},{}\n", p.input[0], p.lhs, p.rhs));
                }
                std::fs::write(plot, csv)?;
            }
            write_json(&report, out)?;
            summarize(std::slice::from_ref(&report), out.is_some());
            Ok(report.pass)
        }

        Command::VerifyHolder {
            config,
            field,
            alpha,
            pairs,
            seed,
            out,
        } => {
            let cfg = load_problem(config)?;
            let decomp = cfg.decomposition()?;
            let outer = cfg.domain()?;
            let inner = BoxDomain::with_dilation(
                outer.radii.iter().map(|r| r / 2.0).collect(),
                outer.dilation,
            )?;
            let quad = cfg.quadrature_spec()?;
            let fields: Vec<(String, ScalarField)> = match field {
                Some(path) => {
                    vec![(
                        "field".to_string(),
                        field_spec_from_path(path)?.build(&decomp)?,
                    )]
                }
                None => ["separable-bump", "quadratic-taper", "affine"]
                    .iter()
                    .map(|name| {
                        Ok((
                            name.to_string(),
                            preset_by_name(name, &cfg)?.build(&decomp)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            let instances: Vec<HolderInstance> = fields
                .iter()
                .map(|(name, u)| HolderInstance { name, u })
                .collect();
            let report = probe_holder_ratio(
                &instances, &decomp, &outer, &inner, *alpha, *pairs, *seed, &quad,
            )?;
            write_json(&report, out)?;
            summarize(std::slice::from_ref(&report), out.is_some());
            Ok(report.pass)
        }

        Command::LocalizeCheck {
            config,
            field,
            probes,
            seed,
            out,
        } => {
            let cfg = load_problem(config)?;
            let decomp = cfg.decomposition()?;
            let quad = cfg.quadrature_spec()?;
            let u = load_field(field, preset_none(), &cfg, "wide-bump")?;
            let loc = Localization::new(&u, &decomp)?;
            let checks = vec![
                loc.check_identity(*probes, *seed, &quad)?,
                loc.check_tail_bounds(*probes, seed ^ 1, &quad)?,
            ];
            let b = bundle(checks);
            write_json(&b, out)?;
            summarize(&b.checks, out.is_some());
            Ok(b.pass)
        }
    }
}

fn preset_none() -> &'static Option<String> {
    &None
}

/// Verify that the binary exists for the declared interface; the heavier
/// contract tests live in the integration suite.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_subcommands() {
        let cli =
            Cli::try_parse_from(["anisofrac", "constants", "--N", "1", "--s", "0.5"]).unwrap();
        match cli.command {
            Command::Constants { n, s } => {
                assert_eq!(n, 1);
                assert_eq!(s, 0.5);
            }
            _ => panic!("wrong subcommand"),
        }
        assert_eq!(cli.threads, 1);

        let cli = Cli::try_parse_from([
            "anisofrac",
            "verify-main",
            "--preset",
            "separable-bump",
            "--threads",
            "2",
        ])
        .unwrap();
        assert_eq!(cli.threads, 2);
        assert!(matches!(cli.command, Command::VerifyMain { .. }));
    }

    #[test]
    fn unknown_preset_is_config_error() {
        let cfg = ProblemConfig::default_two_group();
        let err = preset_by_name("no-such", &cfg).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
