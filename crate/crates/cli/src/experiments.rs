//! The experiment engine: each study sweeps a parameter grid, emits one CSV
//! row per grid point (fixed columns, no missing cells) and an SVG figure.
//! All randomness is seeded, so a fixed seed reproduces byte-identical CSV.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use helmfov::assembly::LossProfile;
use helmfov::fov::{compute_enclosure, diagnostics, strip_intercepts};
use helmfov::operator::dot;
use helmfov::precond::PrecondSpec;
use helmfov::C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::setup::SolverContext;
use crate::svg::Plot;
use crate::{linear_fit, LinFit};

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content).with_context(|| format!("writing {name}"))?;
    Ok(())
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nrm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / nrm).collect()
}

// ---------------------------------------------------------------------
// Laplace-preconditioner FOV sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LaplaceFovConfig {
    pub dim: usize,
    pub levels: Vec<u32>,
    pub kappa2: Vec<f64>,
    pub sigma: Vec<f64>,
    pub angles: usize,
    pub eig_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for LaplaceFovConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            levels: vec![1, 2, 3, 4],
            kappa2: vec![1.0, 10.0, 50.0],
            sigma: vec![1.0],
            angles: 64,
            eig_tol: 1e-9,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaplaceFovRow {
    pub level: u32,
    pub h: f64,
    pub kappa2: f64,
    pub sigma: f64,
    /// re_min, re_max, im_min, im_max divided by h^d.
    pub rect_scaled: [f64; 4],
    /// Exact strip intercepts (eigenvalue extremes of the tilted Hermitian
    /// combination), h^d-scaled; κ-independent by the strip identity.
    pub strip_exact_scaled: (f64, f64),
    /// Witness-based strip intercepts, h^d-scaled.
    pub strip_witness_scaled: (f64, f64),
    pub dist_origin: f64,
    pub disc_center: C64,
    pub disc_radius: f64,
    pub bound_applicable: bool,
    pub polygon_scaled: Vec<(f64, f64)>,
}

pub const LAPLACE_FOV_HEADER: &str = "dim,level,h,kappa2,sigma,angles,re_min_s,re_max_s,im_min_s,im_max_s,strip_lo_s,strip_hi_s,strip_w_lo_s,strip_w_hi_s,dist_origin,disc_re,disc_im,disc_radius,bound_applicable";

pub fn exp_laplace_fov(cfg: &LaplaceFovConfig) -> Result<Vec<LaplaceFovRow>> {
    let mut rows = Vec::new();
    for &sigma in &cfg.sigma {
        ensure!(sigma > 0.0, "the Laplace FOV sweep requires constant sigma > 0");
    }
    for &level in &cfg.levels {
        for &kappa2 in &cfg.kappa2 {
            for &sigma in &cfg.sigma {
                let loss = LossProfile::constant(sigma)?;
                let ctx = SolverContext::build(
                    cfg.dim,
                    level,
                    kappa2,
                    &loss,
                    PrecondSpec::ExactLaplace,
                )?;
                let b = ctx.preconditioner();
                let ab = ctx.preconditioned_operator(b.as_ref());
                let enc = compute_enclosure(&ab, cfg.angles, cfg.eig_tol);
                let h = ctx.problem.mesh.h();
                let d = diagnostics(&enc, h, cfg.dim, kappa2, Some(sigma));
                let (slo, shi) = strip_intercepts(&ab, kappa2, sigma, cfg.eig_tol);
                let hd = d.hd;
                rows.push(LaplaceFovRow {
                    level,
                    h,
                    kappa2,
                    sigma,
                    rect_scaled: d.rect_scaled,
                    strip_exact_scaled: (slo / hd, shi / hd),
                    strip_witness_scaled: d.strip_witness_scaled.expect("constant sigma"),
                    dist_origin: d.dist_origin,
                    disc_center: d.disc_center,
                    disc_radius: d.disc_radius,
                    bound_applicable: d.bound_applicable,
                    polygon_scaled: enc
                        .polygon
                        .iter()
                        .map(|&(x, y)| (x / hd, y / hd))
                        .collect(),
                });
            }
        }
    }

    if let Some(dir) = &cfg.out {
        let mut csv = String::from(LAPLACE_FOV_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                cfg.dim,
                r.level,
                fmt(r.h),
                fmt(r.kappa2),
                fmt(r.sigma),
                cfg.angles,
                fmt(r.rect_scaled[0]),
                fmt(r.rect_scaled[1]),
                fmt(r.rect_scaled[2]),
                fmt(r.rect_scaled[3]),
                fmt(r.strip_exact_scaled.0),
                fmt(r.strip_exact_scaled.1),
                fmt(r.strip_witness_scaled.0),
                fmt(r.strip_witness_scaled.1),
                fmt(r.dist_origin),
                fmt(r.disc_center.re),
                fmt(r.disc_center.im),
                fmt(r.disc_radius),
                r.bound_applicable
            ));
        }
        write_file(dir, "laplace_fov.csv", &csv)?;

        for &kappa2 in &cfg.kappa2 {
            for &sigma in &cfg.sigma {
                let mut plot = Plot::new(
                    &format!("h^d-scaled FOV, Laplace preconditioner, kappa2={kappa2}, sigma={sigma}"),
                    "Re (scaled)",
                    "Im (scaled)",
                );
                let mut im_span: (f64, f64) = (0.0, 0.0);
                for r in rows.iter().filter(|r| r.kappa2 == kappa2 && r.sigma == sigma) {
                    plot.polygon(&r.polygon_scaled, &format!("level {}", r.level));
                    im_span.0 = im_span.0.min(r.rect_scaled[2]);
                    im_span.1 = im_span.1.max(r.rect_scaled[3]);
                }
                // Theoretical overlays: Im = 0 and the strip boundaries of
                // slope -kappa2/sigma through the exact intercepts.
                if let Some(r) = rows
                    .iter()
                    .filter(|r| r.kappa2 == kappa2 && r.sigma == sigma)
                    .last()
                {
                    let re_span = (r.rect_scaled[0], r.rect_scaled[1]);
                    plot.line((re_span.0, 0.0), (re_span.1, 0.0), "Im = 0");
                    let slope = kappa2 / sigma;
                    let (lo, hi) = r.strip_exact_scaled;
                    plot.line(
                        (lo - slope * im_span.0, im_span.0),
                        (lo - slope * im_span.1, im_span.1),
                        "strip lo",
                    );
                    plot.line(
                        (hi - slope * im_span.0, im_span.0),
                        (hi - slope * im_span.1, im_span.1),
                        "strip hi",
                    );
                }
                plot.save(cfg.out.as_ref().unwrap().join(format!(
                    "laplace_fov_k{kappa2}_s{sigma}.svg"
                )))?;
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------
// GMRES iteration sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GmresSweepConfig {
    pub dim: usize,
    pub fine_level: u32,
    pub kappa2: Vec<f64>,
    pub sigma: Vec<f64>,
    pub precond: String,
    pub tol: f64,
    pub max_iter: usize,
    pub load: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for GmresSweepConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            fine_level: 6,
            kappa2: (1..=10).map(|i| 100.0 * i as f64).collect(),
            sigma: vec![5.0, 10.0],
            precond: "laplace".into(),
            tol: 1e-6,
            max_iter: 200,
            load: 1.0,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresSweepRow {
    pub kappa2: f64,
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SweepFit {
    pub sigma: f64,
    pub fit: LinFit,
}

pub const GMRES_SWEEP_HEADER: &str =
    "dim,level,precond,kappa2,sigma,tol,iterations,converged,final_residual";

pub fn exp_gmres_sweep(cfg: &GmresSweepConfig) -> Result<(Vec<GmresSweepRow>, Vec<SweepFit>)> {
    let spec: PrecondSpec = cfg.precond.parse()?;
    let mut rows = Vec::new();
    for &sigma in &cfg.sigma {
        for &kappa2 in &cfg.kappa2 {
            let loss = LossProfile::constant(sigma)?;
            let ctx = SolverContext::build(cfg.dim, cfg.fine_level, kappa2, &loss, spec)?;
            let (_, rep) = ctx.solve_constant_load(cfg.load, cfg.tol, cfg.max_iter);
            for w in rep.residual_history.windows(2) {
                ensure!(w[1] <= w[0] * (1.0 + 1e-12), "GMRES residual history not monotone");
            }
            rows.push(GmresSweepRow {
                kappa2,
                sigma,
                iterations: rep.iterations,
                converged: rep.converged,
                final_residual: rep.true_final_residual,
            });
        }
    }
    // Iterations vs kappa^2, one fit per sigma over the converged rows.
    let mut fits = Vec::new();
    for &sigma in &cfg.sigma {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.sigma == sigma && r.converged)
            .map(|r| (r.kappa2, r.iterations as f64))
            .collect();
        if pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            fits.push(SweepFit { sigma, fit: linear_fit(&xs, &ys) });
        }
    }

    if let Some(dir) = &cfg.out {
        let mut csv = String::from(GMRES_SWEEP_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                cfg.dim,
                cfg.fine_level,
                cfg.precond,
                fmt(r.kappa2),
                fmt(r.sigma),
                fmt(cfg.tol),
                r.iterations,
                r.converged,
                fmt(r.final_residual)
            ));
        }
        write_file(dir, "gmres_sweep.csv", &csv)?;

        let mut fit_csv = String::from("sigma,slope,intercept,r2\n");
        for f in &fits {
            fit_csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt(f.sigma),
                fmt(f.fit.slope),
                fmt(f.fit.intercept),
                fmt(f.fit.r2)
            ));
        }
        write_file(dir, "gmres_sweep_fits.csv", &fit_csv)?;

        let mut plot = Plot::new(
            &format!("GMRES iterations vs kappa^2 ({})", cfg.precond),
            "kappa^2",
            "iterations",
        );
        for &sigma in &cfg.sigma {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.sigma == sigma)
                .map(|r| (r.kappa2, r.iterations as f64))
                .collect();
            plot.polyline(&pts, &format!("sigma {sigma}"));
        }
        plot.save(dir.join("gmres_sweep.svg"))?;
    }
    Ok((rows, fits))
}

// ---------------------------------------------------------------------
// Perturbation-set decay in the number of V-cycles

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationConfig {
    pub dim: usize,
    pub fine_level: u32,
    pub kappa2: f64,
    pub sigma: f64,
    pub cycles: Vec<usize>,
    pub angles: usize,
    pub eig_tol: f64,
    pub gamma_samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            fine_level: 4,
            kappa2: 1000.0,
            sigma: 5.0,
            cycles: (1..=8).collect(),
            angles: 32,
            eig_tol: 1e-9,
            gamma_samples: 1,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationRow {
    pub cycles: usize,
    /// max_k |support_k| / h^d: the enclosure radius of the perturbation set.
    pub radius_scaled: f64,
    pub rect_scaled: [f64; 4],
    /// max over sampled x of |Im(x*M(K̃⁻ᴺ−K⁻¹)Mx)| / |x*M(K̃⁻ᴺ−K⁻¹)Mx|.
    pub reality_residue: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationSummary {
    pub fit: LinFit,
    /// Per-cycle decay rate exp(fit.slope) of the enclosure radius.
    pub rate: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

pub const PERTURBATION_HEADER: &str =
    "dim,level,kappa2,sigma,cycles,radius_scaled,re_min_s,re_max_s,im_min_s,im_max_s,reality_residue";

pub fn exp_perturbation_decay(
    cfg: &PerturbationConfig,
) -> Result<(Vec<PerturbationRow>, PerturbationSummary)> {
    ensure!(!cfg.cycles.is_empty(), "need at least one cycle count");
    let loss = LossProfile::constant(cfg.sigma)?;
    // The multigrid hierarchy is needed regardless of problem size.
    let ctx = SolverContext::build(
        cfg.dim,
        cfg.fine_level,
        cfg.kappa2,
        &loss,
        PrecondSpec::MgLaplace { cycles: 1 },
    )?;
    let h = ctx.problem.mesh.h();
    let hd = h.powi(cfg.dim as i32);
    let n = ctx.problem.num_dofs();

    let mut rows = Vec::new();
    for &cycles in &cfg.cycles {
        let pert = ctx.perturbation(cycles)?;
        let enc = compute_enclosure(&pert, cfg.angles, cfg.eig_tol);
        let d = diagnostics(&enc, h, cfg.dim, cfg.kappa2, Some(cfg.sigma));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E3779B9);
        let mut residue = 0.0f64;
        for _ in 0..5 {
            let x = random_unit(n, &mut rng);
            let mx = ctx.problem.m.mul_vec(&x);
            let diff = {
                let inexact = ctx.mg.as_ref().unwrap().apply_n_cycles(&mx, cycles);
                let exact = ctx.k_solver().solve(&mx);
                inexact
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            };
            let sandwich = dot(&x, &ctx.problem.m.mul_vec(&diff));
            residue = residue.max(sandwich.im.abs() / sandwich.norm().max(1e-300));
        }
        rows.push(PerturbationRow {
            cycles,
            radius_scaled: enc.scale() / hd,
            rect_scaled: d.rect_scaled,
            reality_residue: residue,
        });
    }

    let xs: Vec<f64> = rows.iter().map(|r| r.cycles as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.radius_scaled.max(1e-300).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    let m = &ctx.problem.m;
    let est = ctx.mg.as_ref().unwrap().measure_gamma(m, cfg.gamma_samples);
    let summary = PerturbationSummary {
        fit,
        rate: fit.slope.exp(),
        gamma0: est.gamma0,
        gamma1: est.gamma1,
    };

    if let Some(dir) = &cfg.out {
        let mut csv = String::from(PERTURBATION_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                cfg.dim,
                cfg.fine_level,
                fmt(cfg.kappa2),
                fmt(cfg.sigma),
                r.cycles,
                fmt(r.radius_scaled),
                fmt(r.rect_scaled[0]),
                fmt(r.rect_scaled[1]),
                fmt(r.rect_scaled[2]),
                fmt(r.rect_scaled[3]),
                fmt(r.reality_residue)
            ));
        }
        write_file(dir, "perturbation_decay.csv", &csv)?;
        let fit_csv = format!(
            "slope,intercept,r2,rate,gamma0,gamma1\n{},{},{},{},{},{}\n",
            fmt(summary.fit.slope),
            fmt(summary.fit.intercept),
            fmt(summary.fit.r2),
            fmt(summary.rate),
            fmt(summary.gamma0),
            fmt(summary.gamma1)
        );
        write_file(dir, "perturbation_decay_fit.csv", &fit_csv)?;

        let mut plot = Plot::new(
            &format!(
                "Perturbation enclosure radius vs V-cycles (kappa2={}, sigma={})",
                cfg.kappa2, cfg.sigma
            ),
            "V-cycles N",
            "log10(radius / h^d)",
        );
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.cycles as f64, r.radius_scaled.max(1e-300).log10()))
            .collect();
        plot.polyline(&pts, "radius");
        plot.save(dir.join("perturbation_decay.svg"))?;
    }
    Ok((rows, summary))
}

// ---------------------------------------------------------------------
// Two-level stagnation in the coarse level

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoLevelConfig {
    pub dim: usize,
    pub fine_level: u32,
    pub coarse_levels: Vec<u32>,
    pub kappa2: Vec<f64>,
    pub sigma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub load: f64,
    /// 0 disables the FOV witness computation.
    pub fov_angles: usize,
    pub eig_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for TwoLevelConfig {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        Self {
            dim: 2,
            fine_level: 6,
            coarse_levels: vec![2, 3, 4, 5],
            kappa2: vec![(4.0 * pi).powi(2), (6.0 * pi).powi(2)],
            sigma: 7.0,
            tol: 1e-6,
            max_iter: 200,
            load: 1.0,
            fov_angles: 0,
            eig_tol: 1e-8,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoLevelRow {
    pub kappa2: f64,
    pub coarse_level: u32,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// min over FOV witnesses of Re z, when fov_angles > 0.
    pub min_re_witness: Option<f64>,
}

pub const TWO_LEVEL_HEADER: &str =
    "dim,fine_level,coarse_level,kappa,kappa2,sigma,tol,iterations,converged,final_residual";
pub const TWO_LEVEL_WITNESS_HEADER: &str =
    "dim,fine_level,coarse_level,kappa,kappa2,sigma,angles,min_re_witness";

pub fn exp_two_level_stagnation(cfg: &TwoLevelConfig) -> Result<Vec<TwoLevelRow>> {
    let loss = LossProfile::constant(cfg.sigma)?;
    let mut rows = Vec::new();
    for &kappa2 in &cfg.kappa2 {
        for &coarse in &cfg.coarse_levels {
            let ctx = SolverContext::build(
                cfg.dim,
                cfg.fine_level,
                kappa2,
                &loss,
                PrecondSpec::TwoLevel { coarse_level: coarse },
            )?;
            let (_, rep) = ctx.solve_constant_load(cfg.load, cfg.tol, cfg.max_iter);
            let min_re_witness = if cfg.fov_angles > 0 {
                let b = ctx.preconditioner();
                let ab = ctx.preconditioned_operator(b.as_ref());
                let enc = compute_enclosure(&ab, cfg.fov_angles, cfg.eig_tol);
                Some(
                    enc.witnesses
                        .iter()
                        .map(|w| w.re)
                        .fold(f64::INFINITY, f64::min),
                )
            } else {
                None
            };
            rows.push(TwoLevelRow {
                kappa2,
                coarse_level: coarse,
                iterations: rep.iterations,
                converged: rep.converged,
                final_residual: rep.true_final_residual,
                min_re_witness,
            });
        }
    }

    if let Some(dir) = &cfg.out {
        let mut csv = String::from(TWO_LEVEL_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                cfg.dim,
                cfg.fine_level,
                r.coarse_level,
                fmt(r.kappa2.sqrt()),
                fmt(r.kappa2),
                fmt(cfg.sigma),
                fmt(cfg.tol),
                r.iterations,
                r.converged,
                fmt(r.final_residual)
            ));
        }
        write_file(dir, "two_level_stagnation.csv", &csv)?;

        if cfg.fov_angles > 0 {
            let mut wcsv = String::from(TWO_LEVEL_WITNESS_HEADER);
            wcsv.push('\n');
            for r in &rows {
                wcsv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    cfg.dim,
                    cfg.fine_level,
                    r.coarse_level,
                    fmt(r.kappa2.sqrt()),
                    fmt(r.kappa2),
                    fmt(cfg.sigma),
                    cfg.fov_angles,
                    fmt(r.min_re_witness.unwrap())
                ));
            }
            write_file(dir, "two_level_witness.csv", &wcsv)?;
        }

        let mut plot = Plot::new(
            &format!("Two-level GMRES iterations vs coarse level (fine={})", cfg.fine_level),
            "coarse level",
            "iterations",
        );
        for &kappa2 in &cfg.kappa2 {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.kappa2 == kappa2)
                .map(|r| (r.coarse_level as f64, r.iterations as f64))
                .collect();
            plot.polyline(&pts, &format!("kappa = {:.3}", kappa2.sqrt()));
        }
        plot.save(dir.join("two_level_stagnation.svg"))?;

        if cfg.fov_angles > 0 {
            let mut plot = Plot::new(
                "Smallest FOV witness real part vs coarse level",
                "coarse level",
                "min Re witness",
            );
            for &kappa2 in &cfg.kappa2 {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.kappa2 == kappa2)
                    .map(|r| (r.coarse_level as f64, r.min_re_witness.unwrap()))
                    .collect();
                plot.polyline(&pts, &format!("kappa = {:.3}", kappa2.sqrt()));
            }
            plot.save(dir.join("two_level_witness.svg"))?;
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------
// Scalar stability bound

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub kappa2: f64,
    pub sigma: f64,
    pub grid_points: usize,
    pub x_max: f64,
    pub bound: f64,
    pub grid_max: f64,
    pub argmax: f64,
    pub ok: bool,
}

/// Brute-force check of sup_{x>0} x/|x − κ² + iσ| ≤ √(κ⁴+σ²)/σ on a uniform
/// grid over (0, 10·max(κ²,1)].
pub fn check_stability_scalar(kappa2: f64, sigma: f64, grid_points: usize) -> StabilityReport {
    assert!(sigma > 0.0, "stability bound requires sigma > 0");
    assert!(grid_points >= 10_000, "grid must have at least 1e4 points");
    let x_max = 10.0 * kappa2.max(1.0);
    let bound = (kappa2 * kappa2 + sigma * sigma).sqrt() / sigma;
    let dx = x_max / grid_points as f64;
    let mut grid_max = 0.0f64;
    let mut argmax = dx;
    for i in 1..=grid_points {
        let x = i as f64 * dx;
        let v = x / ((x - kappa2).powi(2) + sigma * sigma).sqrt();
        if v > grid_max {
            grid_max = v;
            argmax = x;
        }
    }
    StabilityReport {
        kappa2,
        sigma,
        grid_points,
        x_max,
        bound,
        grid_max,
        argmax,
        ok: grid_max <= bound * (1.0 + 1e-12),
    }
}
