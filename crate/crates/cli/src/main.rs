use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use helmfov::assembly::{assemble, LossProfile};
use helmfov::fov::{compute_enclosure, diagnostics};
use helmfov::matrixmarket::export_matrixmarket;
use helmfov::mesh::build_mesh;
use helmfov::precond::PrecondSpec;

use helmfov_cli::config::load_config;
use helmfov_cli::experiments::{
    check_stability_scalar, exp_gmres_sweep, exp_laplace_fov, exp_perturbation_decay,
    exp_two_level_stagnation, GmresSweepConfig, LaplaceFovConfig, PerturbationConfig,
    TwoLevelConfig,
};
use helmfov_cli::setup::{parse_sigma_box, SolverContext};
use helmfov_cli::svg::Plot;

#[derive(Parser)]
#[command(name = "helmfov", version, about = "Lossy-Helmholtz preconditioner workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mesh utilities
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// Assemble K, M, M_sigma, A and export them as MatrixMarket files
    Assemble(AssembleArgs),
    /// Solve the constant-load problem with right-preconditioned GMRES
    Solve(SolveArgs),
    /// Compute an FOV enclosure of the preconditioned operator
    Fov(FovArgs),
    /// Run a named experiment (laplace-fov | gmres-sweep |
    /// perturbation-decay | two-level-stagnation)
    Experiment(ExperimentArgs),
    /// Verification checks
    Check {
        #[command(subcommand)]
        cmd: CheckCmd,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Print a JSON summary of one mesh level
    Info {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        level: u32,
    },
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    level: u32,
    #[arg(long, default_value_t = 0.0)]
    kappa2: f64,
    /// Constant absorption sigma
    #[arg(long)]
    sigma: Option<f64>,
    /// Box absorption `x0,y0[,z0]:x1,y1[,z1]:value`
    #[arg(long, conflicts_with = "sigma")]
    sigma_box: Option<String>,
}

impl ProblemArgs {
    fn loss(&self) -> Result<LossProfile> {
        match (&self.sigma, &self.sigma_box) {
            (_, Some(spec)) => parse_sigma_box(spec),
            (Some(s), None) => Ok(LossProfile::constant(*s)?),
            (None, None) => Ok(LossProfile::constant(0.0)?),
        }
    }
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// laplace | mg:N | twolevel:L
    #[arg(long, default_value = "laplace")]
    precond: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Constant load value f
    #[arg(long, default_value_t = 1.0)]
    load: f64,
    /// Directory for the residual-history JSON and CSV row
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FovArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "laplace")]
    precond: String,
    #[arg(long, default_value_t = 64)]
    angles: usize,
    #[arg(long, default_value_t = 1e-9)]
    eig_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// laplace-fov | gmres-sweep | perturbation-decay | two-level-stagnation
    name: String,
    /// TOML file with the experiment's configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Fine mesh level
    #[arg(long)]
    level: Option<u32>,
    /// Coarse levels (two-level experiment)
    #[arg(long, value_delimiter = ',')]
    coarse_level: Option<Vec<u32>>,
    /// Mesh levels of an FOV sweep
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    kappa2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    precond: Option<String>,
    /// V-cycle counts (perturbation experiment)
    #[arg(long, value_delimiter = ',')]
    cycles: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    eig_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Brute-force check of the scalar stability bound sqrt(k^4+s^2)/s
    Stability {
        #[arg(long)]
        kappa2: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 100_000)]
        grid_points: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Treat help/version as success, everything else as usage error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Mesh { cmd: MeshCmd::Info { dim, level } } => {
            let mesh = build_mesh(dim, level)?;
            println!("{}", mesh.summary_json());
        }
        Cmd::Assemble(args) => {
            let mesh = build_mesh(args.problem.dim, args.problem.level)?;
            let loss = args.problem.loss()?;
            let p = assemble(&mesh, args.problem.kappa2, &loss)?;
            std::fs::create_dir_all(&args.out)?;
            export_matrixmarket(&p.k, args.out.join("K.mtx"))?;
            export_matrixmarket(&p.m, args.out.join("M.mtx"))?;
            export_matrixmarket(&p.m_sigma, args.out.join("Msigma.mtx"))?;
            export_matrixmarket(&p.a, args.out.join("A.mtx"))?;
            std::fs::write(args.out.join("problem.json"), p.summary_json())?;
            println!("{}", p.summary_json());
        }
        Cmd::Solve(args) => {
            let spec: PrecondSpec = args.precond.parse()?;
            let loss = args.problem.loss()?;
            let ctx = SolverContext::build(
                args.problem.dim,
                args.problem.level,
                args.problem.kappa2,
                &loss,
                spec,
            )?;
            let (_, rep) = ctx.solve_constant_load(args.load, args.tol, args.max_iter);
            let out = serde_json::json!({
                "params": serde_json::from_str::<serde_json::Value>(&ctx.problem.summary_json())?,
                "precond": args.precond,
                "tol": args.tol,
                "max_iter": args.max_iter,
                "load": args.load,
                "report": serde_json::from_str::<serde_json::Value>(&rep.to_json())?,
            });
            println!("{out}");
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("solve.json"), out.to_string())?;
                let csv = format!(
                    "dim,level,kappa2,precond,tol,{}\n{},{},{},{},{},{}\n",
                    helmfov::SolveReport::CSV_HEADER,
                    args.problem.dim,
                    args.problem.level,
                    args.problem.kappa2,
                    args.precond,
                    args.tol,
                    rep.csv_fields()
                );
                std::fs::write(dir.join("solve.csv"), csv)?;
            }
            if !rep.converged {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Fov(args) => {
            let spec: PrecondSpec = args.precond.parse()?;
            let loss = args.problem.loss()?;
            let ctx = SolverContext::build(
                args.problem.dim,
                args.problem.level,
                args.problem.kappa2,
                &loss,
                spec,
            )?;
            let b = ctx.preconditioner();
            let ab = ctx.preconditioned_operator(b.as_ref());
            let enc = compute_enclosure(&ab, args.angles, args.eig_tol);
            let d = diagnostics(
                &enc,
                ctx.problem.mesh.h(),
                args.problem.dim,
                args.problem.kappa2,
                loss.constant_sigma().filter(|&s| s > 0.0),
            );
            let out = serde_json::json!({
                "rect": d.rect,
                "rect_scaled": d.rect_scaled,
                "strip_witness": d.strip_witness,
                "dist_origin": d.dist_origin,
                "disc_center": [d.disc_center.re, d.disc_center.im],
                "disc_radius": d.disc_radius,
                "bound_applicable": d.bound_applicable,
                "origin_excluded": enc.origin_excluded(),
                "scale": enc.scale(),
            });
            println!("{out}");
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("fov.csv"), enc.to_csv())?;
                let mut plot = Plot::new(
                    &format!(
                        "FOV enclosure ({}D level {}, {})",
                        args.problem.dim, args.problem.level, args.precond
                    ),
                    "Re",
                    "Im",
                );
                plot.polygon(&enc.polygon, "enclosure");
                let witness_pts: Vec<(f64, f64)> =
                    enc.witnesses.iter().map(|w| (w.re, w.im)).collect();
                plot.polyline(&witness_pts, "witnesses");
                plot.save(dir.join("fov.svg"))?;
            }
        }
        Cmd::Experiment(args) => run_experiment(args)?,
        Cmd::Check { cmd: CheckCmd::Stability { kappa2, sigma, grid_points } } => {
            let r = check_stability_scalar(kappa2, sigma, grid_points);
            println!("{}", serde_json::to_string(&r)?);
            if !r.ok {
                bail!("grid maximum {} exceeds the bound {}", r.grid_max, r.bound);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    match args.name.as_str() {
        "laplace-fov" => {
            let mut cfg: LaplaceFovConfig = load_config(args.config.as_deref())?;
            if let Some(v) = args.dim {
                cfg.dim = v;
            }
            if let Some(v) = args.levels {
                cfg.levels = v;
            }
            if let Some(v) = args.kappa2 {
                cfg.kappa2 = v;
            }
            if let Some(v) = args.sigma {
                cfg.sigma = v;
            }
            if let Some(v) = args.angles {
                cfg.angles = v;
            }
            if let Some(v) = args.eig_tol {
                cfg.eig_tol = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if args.out.is_some() {
                cfg.out = args.out;
            }
            let rows = exp_laplace_fov(&cfg)?;
            println!("laplace-fov: {} rows", rows.len());
        }
        "gmres-sweep" => {
            let mut cfg: GmresSweepConfig = load_config(args.config.as_deref())?;
            if let Some(v) = args.dim {
                cfg.dim = v;
            }
            if let Some(v) = args.level {
                cfg.fine_level = v;
            }
            if let Some(v) = args.kappa2 {
                cfg.kappa2 = v;
            }
            if let Some(v) = args.sigma {
                cfg.sigma = v;
            }
            if let Some(v) = args.precond {
                cfg.precond = v;
            }
            if let Some(v) = args.tol {
                cfg.tol = v;
            }
            if let Some(v) = args.max_iter {
                cfg.max_iter = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if args.out.is_some() {
                cfg.out = args.out;
            }
            let (rows, fits) = exp_gmres_sweep(&cfg)?;
            println!("gmres-sweep: {} rows, {} fits", rows.len(), fits.len());
            for f in &fits {
                println!(
                    "  sigma {}: iterations ~ {:.4}*kappa2 + {:.2} (R^2 = {:.4})",
                    f.sigma, f.fit.slope, f.fit.intercept, f.fit.r2
                );
            }
        }
        "perturbation-decay" => {
            let mut cfg: PerturbationConfig = load_config(args.config.as_deref())?;
            if let Some(v) = args.dim {
                cfg.dim = v;
            }
            if let Some(v) = args.level {
                cfg.fine_level = v;
            }
            if let Some(v) = args.kappa2 {
                cfg.kappa2 = v.into_iter().next().context("kappa2 must not be empty")?;
            }
            if let Some(v) = args.sigma {
                cfg.sigma = v.into_iter().next().context("sigma must not be empty")?;
            }
            if let Some(v) = args.cycles {
                cfg.cycles = v;
            }
            if let Some(v) = args.angles {
                cfg.angles = v;
            }
            if let Some(v) = args.eig_tol {
                cfg.eig_tol = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if args.out.is_some() {
                cfg.out = args.out;
            }
            let (rows, summary) = exp_perturbation_decay(&cfg)?;
            println!(
                "perturbation-decay: {} rows; rate {:.4} per cycle (R^2 = {:.4}), gamma0 = {:.4}, gamma1 = {:.4}",
                rows.len(),
                summary.rate,
                summary.fit.r2,
                summary.gamma0,
                summary.gamma1
            );
        }
        "two-level-stagnation" => {
            let mut cfg: TwoLevelConfig = load_config(args.config.as_deref())?;
            if let Some(v) = args.dim {
                cfg.dim = v;
            }
            if let Some(v) = args.level {
                cfg.fine_level = v;
            }
            if let Some(v) = args.coarse_level {
                cfg.coarse_levels = v;
            }
            if let Some(v) = args.kappa2 {
                cfg.kappa2 = v;
            }
            if let Some(v) = args.sigma {
                cfg.sigma = v.into_iter().next().context("sigma must not be empty")?;
            }
            if let Some(v) = args.tol {
                cfg.tol = v;
            }
            if let Some(v) = args.max_iter {
                cfg.max_iter = v;
            }
            if let Some(v) = args.angles {
                cfg.fov_angles = v;
            }
            if let Some(v) = args.eig_tol {
                cfg.eig_tol = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if args.out.is_some() {
                cfg.out = args.out;
            }
            let rows = exp_two_level_stagnation(&cfg)?;
            println!("two-level-stagnation: {} rows", rows.len());
            for r in &rows {
                println!(
                    "  kappa {:.3} coarse {}: {} iterations{}",
                    r.kappa2.sqrt(),
                    r.coarse_level,
                    r.iterations,
                    if r.converged { "" } else { " (n.c.)" }
                );
            }
        }
        other => bail!("unknown experiment `{other}`"),
    }
    Ok(())
}
