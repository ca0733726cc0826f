//! Command-line front end. Every subcommand is a single reproducible
//! experiment driven by a `RunConfig`.
//!
//! Exit codes: 0 success, 2 validation failure (admissibility, configuration,
//! or a negative verification verdict), 3 runtime failure (instability,
//! non-convergence, i/o), 64 usage error.

use std::path::PathBuf;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::admissibility::{derive_params, validate, AdmissibleParams, Overrides};
use crate::config::RunConfig;
use crate::error::{DwError, Result};
use crate::grid::Grid;
use crate::kernel::CutoffSpec;
use crate::solver;
use crate::verify::{
    self, default_window, fit_decay, EnsembleSpec, InequalityKind, LinearCase,
};
use crate::io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "dwlab",
    version,
    about = "Pseudospectral laboratory for a semilinear damped wave equation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Config file (flat `key = value` lines)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (DWLAB_OUT overrides)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override one config entry, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Derive and validate the parameter set for (n, p)
    Admissible(CommonArgs),
    /// Propagate the linear flow and record norm decay
    Linear(CommonArgs),
    /// Run the nonlinear solver and record norm decay
    Solve(CommonArgs),
    /// Fixed-point iteration with contraction monitoring
    Picard(CommonArgs),
    /// Scan the closed-form kernel identity residual
    KernelVerify(CommonArgs),
    /// Ratio-boundedness checks for the linear decay estimates
    LemmaVerify(CommonArgs),
    /// Ensemble checks of the four fractional inequalities
    IneqVerify(CommonArgs),
    /// Fit decay slopes from a completed run directory
    DecayFit(CommonArgs),
}

impl Cmd {
    fn common(&self) -> &CommonArgs {
        match self {
            Cmd::Admissible(c)
            | Cmd::Linear(c)
            | Cmd::Solve(c)
            | Cmd::Picard(c)
            | Cmd::KernelVerify(c)
            | Cmd::LemmaVerify(c)
            | Cmd::IneqVerify(c)
            | Cmd::DecayFit(c) => c,
        }
    }
}

fn build_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    for kv in &args.sets {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            DwError::Config(format!("--set expects KEY=VALUE, got {kv:?}"))
        })?;
        cfg.set(k, v)?;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Ok(env_out) = std::env::var("DWLAB_OUT") {
        if !env_out.is_empty() {
            cfg.out = Some(PathBuf::from(env_out));
        }
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("dwlab-out"))
}

fn exit_code_for(err: &DwError) -> i32 {
    match err {
        DwError::InvalidGrid(_)
        | DwError::InvalidArgument(_)
        | DwError::Admissibility(_)
        | DwError::Config(_)
        | DwError::HashMismatch { .. }
        | DwError::SupportViolation { .. }
        | DwError::Fit(_)
        | DwError::Snapshot(_) => EXIT_VALIDATION,
        DwError::CorruptSpectral(_)
        | DwError::Instability { .. }
        | DwError::NonConvergence { .. }
        | DwError::Io { .. } => EXIT_RUNTIME,
    }
}

fn derive(cfg: &RunConfig) -> Result<AdmissibleParams> {
    derive_params(
        cfg.dim as u32,
        cfg.p,
        Overrides {
            s: cfg.s,
            kappa: cfg.kappa,
            gamma_inv: cfg.gamma_inv,
        },
    )
}

fn make_grid(cfg: &RunConfig) -> Result<Arc<Grid>> {
    Grid::new(cfg.dim, cfg.grid_points(), cfg.grid_half_length())
}

/// Parse argv and run; the returned code is the process exit status.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match build_config(cli.cmd.common()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Admissible(_) => cmd_admissible(&cfg),
        Cmd::Linear(_) => cmd_linear(&cfg),
        Cmd::Solve(_) => cmd_solve(&cfg),
        Cmd::Picard(_) => cmd_picard(&cfg),
        Cmd::KernelVerify(_) => cmd_kernel_verify(&cfg),
        Cmd::LemmaVerify(_) => cmd_lemma_verify(&cfg),
        Cmd::IneqVerify(_) => cmd_ineq_verify(&cfg),
        Cmd::DecayFit(_) => cmd_decay_fit(&cfg),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_admissible(cfg: &RunConfig) -> Result<i32> {
    let params = derive(cfg)?;
    let report = validate(&params);
    println!("{params}");
    println!("{report}");
    Ok(if report.pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_linear(cfg: &RunConfig) -> Result<i32> {
    let params = derive(cfg)?;
    let grid = make_grid(cfg)?;
    let state0 = solver::make_initial(cfg.initial_kind()?, cfg.eps, grid)?;
    let schedule = solver::log_schedule(cfg.t_end(), cfg.samples_per_decade);
    let dir = out_dir(cfg);
    io::write_meta(cfg, &dir)?;
    let traj = solver::linear_trajectory(&state0, &schedule, &params.space_weights())?;
    let csv = io::write_trajectory(&traj, cfg, &dir)?;
    println!("linear run: {} samples -> {}", traj.samples.len(), csv.display());
    Ok(EXIT_OK)
}

fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let params = derive(cfg)?;
    let grid = make_grid(cfg)?;
    let state0 = solver::make_initial(cfg.initial_kind()?, cfg.eps, grid)?;
    let schedule = solver::log_schedule(cfg.t_end(), cfg.samples_per_decade);
    let dir = out_dir(cfg);
    io::write_meta(cfg, &dir)?;
    let traj = solver::solve(
        &state0,
        cfg.t_end(),
        cfg.dt,
        params.p,
        &schedule,
        &params.space_weights(),
    )?;
    let csv = io::write_trajectory(&traj, cfg, &dir)?;
    io::write_snapshot(&traj.final_state, params.p, &dir.join("final.snap"))?;
    println!("solve: {} samples -> {}", traj.samples.len(), csv.display());
    println!("X(T) = {:.6e}, Y(T) = {:.6e}", traj.x_norm()?, traj.y_norm()?);
    Ok(EXIT_OK)
}

fn cmd_picard(cfg: &RunConfig) -> Result<i32> {
    let params = derive(cfg)?;
    let grid = make_grid(cfg)?;
    let state0 = solver::make_initial(cfg.initial_kind()?, cfg.eps, grid)?;
    let dir = out_dir(cfg);
    io::write_meta(cfg, &dir)?;
    let (traj, report) = solver::picard_solve(
        &state0,
        cfg.t_end(),
        cfg.picard_nodes,
        params.p,
        cfg.picard_max_iter,
        cfg.picard_tol,
        &params.space_weights(),
    )?;
    let csv = io::write_trajectory(&traj, cfg, &dir)?;
    let verdict = verify::contraction_report(&report)?;
    let mut text = String::new();
    text.push_str(&format!("iterates = {}\n", report.iterates));
    text.push_str(&format!("converged = {}\n", report.converged));
    text.push_str(&format!("tol = {:e}\n", report.tol));
    for (i, (d, r)) in report
        .y_diffs
        .iter()
        .zip(report.ratios.iter().map(Some).chain(std::iter::repeat(None)))
        .enumerate()
    {
        match r {
            Some(r) => text.push_str(&format!("diff[{i}] = {d:.6e}, ratio = {r:.4}\n")),
            None => text.push_str(&format!("diff[{i}] = {d:.6e}\n")),
        }
    }
    text.push_str(&format!(
        "contraction = {} (max ratio {:.4}, monotone {})\n",
        verdict.pass, verdict.max_ratio, verdict.monotone
    ));
    let report_path = dir.join("picard.txt");
    std::fs::write(&report_path, &text).map_err(|e| DwError::io(&report_path, e))?;
    print!("{text}");
    println!("-> {}", csv.display());
    Ok(if verdict.pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_kernel_verify(cfg: &RunConfig) -> Result<i32> {
    let grid = make_grid(cfg)?;
    let mut xi_sqs: Vec<f64> = grid.freq().iter().map(|f| f * f).collect();
    if cfg.dim == 2 {
        // cover the corner of the frequency lattice too
        let extra: Vec<f64> = xi_sqs.iter().map(|x| 2.0 * x).collect();
        xi_sqs.extend(extra);
    }
    xi_sqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xi_sqs.dedup();
    let worst = verify::kernel_residual_scan(&xi_sqs, 100.0, 0.01);
    println!(
        "kernel identity residual: max {worst:.3e} over {} frequencies, t in [0, 100] step 0.01",
        xi_sqs.len()
    );
    Ok(if worst < 1e-9 { EXIT_OK } else { EXIT_VALIDATION })
}

fn verify_grid(cfg: &RunConfig) -> Result<Arc<Grid>> {
    // desk-scale grids for the statistical checks
    match cfg.dim {
        2 => Grid::new(2, 128, 20.0),
        _ => Grid::new(1, 2048, 100.0),
    }
}

fn cmd_lemma_verify(cfg: &RunConfig) -> Result<i32> {
    let grid = verify_grid(cfg)?;
    let cases = [
        LinearCase { rho: 1.0, q: 2.0, s1: 0.0, s2: 0.0, derivative: false },
        LinearCase { rho: 1.0, q: 2.0, s1: 0.0, s2: 0.0, derivative: true },
        LinearCase { rho: 2.0, q: 2.0, s1: 1.0, s2: 0.0, derivative: false },
    ];
    let ensemble = EnsembleSpec {
        members: 20,
        seed: cfg.seed,
        ..EnsembleSpec::default()
    };
    let t_grid: Vec<f64> = (1..=30).map(|i| 2.0 * i as f64).collect();
    let reports =
        verify::verify_linear_estimates(&cases, &ensemble, &t_grid, &grid, &CutoffSpec::default())?;
    let mut all_bounded = true;
    for r in &reports {
        println!("{r}");
        all_bounded &= r.bounded;
    }
    Ok(if all_bounded { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_ineq_verify(cfg: &RunConfig) -> Result<i32> {
    let grid = verify_grid(cfg)?;
    let kinds: Vec<InequalityKind> = if cfg.dim == 2 {
        vec![
            InequalityKind::GagliardoNirenberg { theta: 0.5, a: 1.0, p: 2.0, p0: 2.0, p1: 2.0 },
            InequalityKind::Powers { p: 2.0, r: 2.0, s: 1.5 },
            InequalityKind::Embedding { q: 2.0, s1: 0.5, s2: 1.5 },
            InequalityKind::ChainRule { p: 3.0, s: 1.5, r: 2.0, r1: 8.0, r2: 4.0 },
        ]
    } else {
        vec![
            InequalityKind::GagliardoNirenberg { theta: 0.5, a: 1.0, p: 2.0, p0: 2.0, p1: 2.0 },
            InequalityKind::Powers { p: 2.0, r: 2.0, s: 0.75 },
            InequalityKind::Embedding { q: 2.0, s1: 0.25, s2: 0.75 },
            InequalityKind::ChainRule { p: 2.0, s: 0.75, r: 2.0, r1: 8.0, r2: 8.0 / 3.0 },
        ]
    };
    let ensemble = EnsembleSpec {
        members: 200,
        seed: cfg.seed,
        ..EnsembleSpec::default()
    };
    let mut all_bounded = true;
    for kind in &kinds {
        let report = verify::verify_inequality(kind, &ensemble, &grid)?;
        println!("{report}");
        all_bounded &= report.bounded;
    }
    Ok(if all_bounded { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_decay_fit(cfg: &RunConfig) -> Result<i32> {
    let params = derive(cfg)?;
    let dir = out_dir(cfg);
    let found = io::read_meta_hash(&dir)?;
    let expected = cfg.hash();
    if found != expected {
        return Err(DwError::HashMismatch {
            expected,
            found,
            path: dir.join("meta.txt"),
        });
    }
    let rows = io::read_norms_csv(&dir.join("norms.csv"))?;
    let window = default_window(cfg.t_end());
    let l_alpha: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let hs: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[3])).collect();
    let fit_l = fit_decay(&l_alpha, window, params.l_alpha_decay_exponent())?;
    let fit_h = fit_decay(&hs, window, params.hs_decay_exponent())?;
    println!("L^alpha: {fit_l}");
    println!("Hdot^s:  {fit_h}");
    Ok(EXIT_OK)
}
