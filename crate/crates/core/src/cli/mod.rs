//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input, 3 when a
//! numerical operation fails.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::branches::{
    branch_catalog, classify_stratum, equilibria_of_truncated_nf, linear_eigenvalues, BranchCatalog, BranchKind,
    NfEquilibria, DEFAULT_STRATUM_TOL,
};
use crate::error::{Error, Result};
use crate::normal_form::{homological_solve_with, reduce_with, ComplementRegistry, NormalFormCoeffs, DEFAULT_COMPLEMENT};
use crate::simulate::{integrate, integrate_normal_form, Trajectory};
use crate::torus::{classify_attractor, dominant_frequencies, poincare_section, ClassifyConfig};
use crate::versal::{
    centralizer_basis, codimension, commutator_nullity, miniversal_deformation, physical_to_unfolding,
    DeformationFamily, JordanSpec, PhysicalParams, SquareMatrix, UnfoldingPoint, DEFAULT_RANK_TOL,
};

use config::{CoefficientRecord, Model, ReduceRecord, RunConfig};
use output::{emit, to_csv, to_json};

#[derive(Debug, Parser)]
#[command(name = "hopf-takens", version, about = "Hopf / Bogdanov-Takens interaction in symmetric coupled oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Codimension and centralizer dimension of a Jordan structure, e.g. "0:2; i:1; -i:1".
    Codim {
        spec: String,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
    },
    /// Orthonormal centralizer basis of the matrix in a text file.
    Centralizer {
        matrix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The real miniversal families of the singular linear part.
    Versal {
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
    },
    /// Unfolding parameters of physical parameters (Ω, δ₁, δ₂).
    Map {
        #[arg(allow_negative_numbers = true)]
        omega: f64,
        #[arg(allow_negative_numbers = true)]
        delta1: f64,
        #[arg(allow_negative_numbers = true)]
        delta2: f64,
    },
    /// Cubic normal-form coefficients of a configured system, as JSON.
    Reduce {
        config: PathBuf,
        #[arg(long)]
        complement: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratum label and linear eigenvalues at an unfolding point.
    Classify {
        #[arg(allow_negative_numbers = true)]
        alpha1: f64,
        #[arg(allow_negative_numbers = true)]
        alpha2: f64,
        #[arg(allow_negative_numbers = true)]
        alpha3: f64,
        #[arg(long, default_value_t = DEFAULT_STRATUM_TOL)]
        tol: f64,
    },
    /// Full branch catalog at one unfolding point, as JSON.
    Branches {
        config: PathBuf,
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["A1", "A2", "A3"])]
        alpha: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_STRATUM_TOL)]
        stratum_tol: f64,
        /// Skip polishing the equilibria of the truncated normal form.
        #[arg(long)]
        no_equilibria: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrates the system (or normal form) and writes the trajectory as CSV.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Poincaré section of a simulated trajectory: return map CSV and attractor JSON.
    Section {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Return-map CSV destination.
        #[arg(long)]
        map_out: Option<PathBuf>,
        /// Attractor JSON destination (standard output when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[arg(long)]
        scatter_ratio: Option<f64>,
    },
    /// Dominant angular frequencies of one state component, as CSV.
    Spectrum {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Zero-based state component.
        #[arg(long, default_value_t = 2)]
        component: usize,
        /// Start of the analysed window (default: the section transient).
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, default_value_t = 16384)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratum and branch records over a cubic grid of unfolding points, as CSV.
    Atlas {
        config: PathBuf,
        /// Points per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_STRATUM_TOL)]
        stratum_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Initial state (x, x', y, y') or (y1, y2, r, theta).
    #[arg(long, num_args = 4, allow_negative_numbers = true)]
    pub initial: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["A1", "A2", "A3"])]
    pub alpha: Option<Vec<f64>>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn alpha_arg(v: &Option<Vec<f64>>) -> Option<UnfoldingPoint> {
    v.as_ref().map(|a| UnfoldingPoint::new(a[0], a[1], a[2]))
}

fn registry_complement(name: Option<&str>) -> Result<std::sync::Arc<dyn crate::normal_form::ResonantComplement>> {
    ComplementRegistry::default().get(name.unwrap_or(DEFAULT_COMPLEMENT))
}

/// Normal-form coefficients of the configured model.
fn coefficients(cfg: &RunConfig) -> Result<NormalFormCoeffs> {
    match &cfg.model {
        Model::Coefficients(c) => Ok(*c),
        Model::System(s) => {
            let comp = registry_complement(cfg.complement.as_deref())?;
            reduce_with(s, &comp)
        }
    }
}

fn default_initial(model: &Model) -> Vec<f64> {
    match model {
        Model::System(_) => vec![0.1, 0.0, 0.1, 0.0],
        Model::Coefficients(_) => vec![0.01, 0.0, 0.01, 0.0],
    }
}

/// Default integration horizon in time units.
pub const DEFAULT_T_END: f64 = 500.0;

fn simulate_model(cfg: &RunConfig, run: &RunArgs) -> Result<Trajectory> {
    let initial = run
        .initial
        .clone()
        .or_else(|| cfg.initial.clone())
        .unwrap_or_else(|| default_initial(&cfg.model));
    if initial.len() != 4 {
        return Err(Error::validation("initial state needs four components"));
    }
    let y0 = [initial[0], initial[1], initial[2], initial[3]];
    let t_end = run.t_end.or(cfg.t_end).unwrap_or(DEFAULT_T_END);
    match &cfg.model {
        Model::System(s) => {
            if run.alpha.is_some() {
                return Err(Error::validation(
                    "--alpha applies to coefficient configurations; set [system] parameters instead",
                ));
            }
            integrate(s, y0, t_end, &cfg.integrator)
        }
        Model::Coefficients(c) => {
            let alpha = match alpha_arg(&run.alpha) {
                Some(a) => a,
                None => cfg.unfolding_point()?,
            };
            integrate_normal_form(c, alpha, y0, t_end, &cfg.integrator)
        }
    }
}

fn state_names(model: &Model) -> [&'static str; 5] {
    match model {
        Model::System(_) => ["t", "x", "xdot", "y", "ydot"],
        Model::Coefficients(_) => ["t", "y1", "y2", "r", "theta"],
    }
}

fn trajectory_csv(traj: &Trajectory, header: &[&str]) -> String {
    to_csv(
        header,
        traj.iter().map(|(t, y)| {
            let mut row = vec![t];
            row.extend_from_slice(y);
            row
        }),
    )
}

#[derive(Serialize)]
struct BranchesOutput {
    coefficients: CoefficientRecord,
    catalog: BranchCatalog,
    equilibria: Option<NfEquilibria>,
}

fn family_json(f: &DeformationFamily, tol: f64) -> Result<serde_json::Value> {
    let n = f.base.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f.base[(i, j)]).collect()).collect();
    Ok(json!({
        "parameters": f.parameter_count,
        "base": rows,
        "slots": f.slots,
        "transversality_rank": f.transversality_rank(tol)?,
        "full_rank": n * n,
    }))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Codim { spec, tol } => {
            let js = JordanSpec::parse(&spec)?;
            let nullity = commutator_nullity(&js.jordan_matrix(), tol)?;
            let out = json!({
                "dimension": js.dimension(),
                "codimension": codimension(&js),
                "centralizer_dimension": nullity,
            });
            emit(None, &to_json(&out)?)
        }
        Command::Centralizer { matrix, tol, out } => {
            let text = std::fs::read_to_string(&matrix)
                .map_err(|e| Error::parse(matrix.display().to_string(), format!("cannot read file: {e}")))?;
            let m = SquareMatrix::parse(&text).map_err(|e| match e {
                Error::Parse { location, message } => {
                    Error::parse(format!("{}: {}", matrix.display(), location), message)
                }
                other => other,
            })?;
            let value = match &m {
                SquareMatrix::Real(a) => {
                    let c = centralizer_basis(a, tol)?;
                    let basis: Vec<Vec<Vec<f64>>> = c
                        .basis
                        .iter()
                        .map(|b| (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b[(i, j)]).collect()).collect())
                        .collect();
                    json!({
                        "field": "real",
                        "dimension": c.dimension(),
                        "singular_values": c.singular_values,
                        "warning": c.warning,
                        "basis": basis,
                    })
                }
                SquareMatrix::Complex(a) => {
                    let c = centralizer_basis(a, tol)?;
                    let basis: Vec<Vec<Vec<[f64; 2]>>> = c
                        .basis
                        .iter()
                        .map(|b| {
                            (0..b.nrows())
                                .map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect())
                                .collect()
                        })
                        .collect();
                    json!({
                        "field": "complex",
                        "dimension": c.dimension(),
                        "singular_values": c.singular_values,
                        "warning": c.warning,
                        "basis": basis,
                    })
                }
            };
            emit(out.as_deref(), &to_json(&value)?)
        }
        Command::Versal { tol } => {
            let (four, three) = miniversal_deformation();
            let a0 = crate::versal::oscillator_linear_part();
            let out = json!({
                "centralizer_dimension": commutator_nullity(&a0, tol)?,
                "four_parameter": family_json(&four, tol)?,
                "three_parameter": family_json(&three, tol)?,
            });
            emit(None, &to_json(&out)?)
        }
        Command::Map { omega, delta1, delta2 } => {
            let mu = PhysicalParams::new(omega, delta1, delta2);
            if ![omega, delta1, delta2].iter().all(|v| v.is_finite()) {
                return Err(Error::validation("parameters must be finite"));
            }
            emit(None, &to_json(&physical_to_unfolding(mu))?)
        }
        Command::Reduce { config, complement, out } => {
            let cfg = config::load(&config)?;
            let sys = match &cfg.model {
                Model::System(s) => s,
                Model::Coefficients(_) => {
                    return Err(Error::parse(
                        config.display().to_string(),
                        "reduce needs a [system] configuration",
                    ))
                }
            };
            let name = complement.or(cfg.complement.clone());
            let comp = registry_complement(name.as_deref())?;
            let coeffs = reduce_with(sys, &comp)?;
            let field = sys.cubic_field();
            let tol = 1e-10 * field.max_abs_coefficient().max(1.0);
            let residual = homological_solve_with(&field, comp.as_ref(), tol)?.residual;
            let rec = ReduceRecord {
                complement: comp.name().to_string(),
                alpha: Some(cfg.unfolding_point()?),
                coefficients: CoefficientRecord::from(&coeffs),
                homological_residual: Some(residual),
            };
            emit(out.as_deref(), &to_json(&rec)?)
        }
        Command::Classify { alpha1, alpha2, alpha3, tol } => {
            let a = UnfoldingPoint::new(alpha1, alpha2, alpha3);
            let label = classify_stratum(a, tol)?;
            let ev: Vec<[f64; 2]> = linear_eigenvalues(a).iter().map(|z| [z.re, z.im]).collect();
            let out = json!({
                "label": label.kind,
                "signs": label.signs,
                "eigenvalues": ev,
            });
            emit(None, &to_json(&out)?)
        }
        Command::Branches {
            config,
            alpha,
            stratum_tol,
            no_equilibria,
            out,
        } => {
            let cfg = config::load(&config)?;
            let coeffs = coefficients(&cfg)?;
            let a = match alpha_arg(&alpha) {
                Some(a) => a,
                None => cfg.unfolding_point()?,
            };
            let catalog = branch_catalog(a, &coeffs, stratum_tol)?;
            let equilibria = (!no_equilibria).then(|| equilibria_of_truncated_nf(a, &coeffs));
            let rec = BranchesOutput {
                coefficients: CoefficientRecord::from(&coeffs),
                catalog,
                equilibria,
            };
            emit(out.as_deref(), &to_json(&rec)?)
        }
        Command::Simulate { config, run, out } => {
            let cfg = config::load(&config)?;
            let header = state_names(&cfg.model);
            match simulate_model(&cfg, &run) {
                Ok(traj) => emit(out.as_deref(), &trajectory_csv(&traj, &header)),
                Err(Error::Divergence { t, norm, partial }) => {
                    emit(out.as_deref(), &trajectory_csv(&partial, &header))?;
                    Err(Error::Divergence { t, norm, partial })
                }
                Err(e) => Err(e),
            }
        }
        Command::Section {
            config,
            run,
            map_out,
            out,
            cluster_tol,
            scatter_ratio,
        } => {
            let cfg = config::load(&config)?;
            let traj = simulate_model(&cfg, &run)?;
            let section = cfg.section_config();
            let map = poincare_section(&traj, &section)?;
            let mut ccfg = ClassifyConfig::default();
            if let Some(t) = cluster_tol {
                ccfg.cluster_tol = t;
            }
            if let Some(s) = scatter_ratio {
                ccfg.scatter_ratio = s;
            }
            let class = classify_attractor(&map, &ccfg);
            if let Some(p) = &map_out {
                let dim = map.points.first().map_or(3, |p| p.len());
                let mut header = vec!["t".to_string()];
                header.extend((1..=dim).map(|k| format!("s{k}")));
                header.push("residual".into());
                header.push("tangential".into());
                let h: Vec<&str> = header.iter().map(String::as_str).collect();
                let rows = (0..map.len()).map(|i| {
                    let mut row = vec![map.times[i]];
                    row.extend_from_slice(&map.points[i]);
                    row.push(map.residuals[i]);
                    row.push(if map.tangential[i] { 1.0 } else { 0.0 });
                    row
                });
                output::write_atomic(p, &to_csv(&h, rows))?;
            }
            emit(out.as_deref(), &to_json(&class)?)
        }
        Command::Spectrum {
            config,
            run,
            component,
            t0,
            samples,
            count,
            out,
        } => {
            let cfg = config::load(&config)?;
            let traj = simulate_model(&cfg, &run)?;
            let start = t0.unwrap_or_else(|| cfg.section_config().transient_skip.min(0.5 * traj.t_end()));
            let peaks = dominant_frequencies(&traj, component, start, traj.t_end(), samples, count)?;
            let csv = to_csv(
                &["frequency", "amplitude"],
                peaks.iter().map(|p| vec![p.frequency, p.amplitude]),
            );
            emit(out.as_deref(), &csv)
        }
        Command::Atlas {
            config,
            grid,
            range,
            stratum_tol,
            out,
        } => {
            let cfg = config::load(&config)?;
            let coeffs = coefficients(&cfg)?;
            let (lo, hi) = match &range {
                Some(r) => (r[0], r[1]),
                None => (-0.5, 0.5),
            };
            if grid < 2 || !(hi > lo) {
                return Err(Error::validation("atlas needs grid >= 2 and lo < hi"));
            }
            emit(out.as_deref(), &atlas_csv(&coeffs, grid, lo, hi, stratum_tol)?)
        }
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One CSV row per grid point, evaluated in parallel and written in grid order.
pub fn atlas_csv(coeffs: &NormalFormCoeffs, grid: usize, lo: f64, hi: f64, stratum_tol: f64) -> Result<String> {
    let step = (hi - lo) / (grid - 1) as f64;
    let rows: Vec<Result<String>> = (0..grid * grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (grid * grid), (idx / grid) % grid, idx % grid);
            let a = UnfoldingPoint::new(lo + step * i as f64, lo + step * j as f64, lo + step * k as f64);
            let cat = branch_catalog(a, coeffs, stratum_tol)?;
            let max_re = cat.eigenvalues.iter().map(|z| z[0]).fold(f64::NEG_INFINITY, f64::max);
            let exists = |kind: BranchKind, list: &[crate::branches::Branch]| {
                list.iter().any(|b| b.kind == kind && b.exists)
            };
            let torus = cat.hopf_hopf.iter().find(|b| b.kind == BranchKind::Torus2HH);
            Ok(format!(
                "{},{},{},{:?},{},{},{},{},{},{},{:?}",
                output::format_float(a.alpha1),
                output::format_float(a.alpha2),
                output::format_float(a.alpha3),
                cat.stratum.kind,
                output::format_float(max_re),
                flag(cat.pitchfork.exists),
                flag(cat.hopf_fast.exists),
                flag(cat.hopf_slow.as_ref().is_some_and(|b| b.exists)),
                flag(exists(BranchKind::MixedModePH, &cat.pitchfork_hopf)),
                flag(torus.is_some_and(|b| b.exists)),
                torus.map(|b| b.stability).unwrap_or(crate::branches::Stability::Undetermined),
            ))
        })
        .collect();
    let mut out = String::from(
        "alpha1,alpha2,alpha3,stratum,max_real_part,p_exists,h1_exists,h0_exists,mixed_exists,torus_exists,torus_stability\n",
    );
    for r in rows {
        out.push_str(&r?);
        out.push('\n');
    }
    Ok(out)
}

/// Convenience for callers that already hold a path.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    config::load(path)
}
