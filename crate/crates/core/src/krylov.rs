//! Iterative solvers: full right-preconditioned GMRES with modified
//! Gram-Schmidt Arnoldi (one reorthogonalization pass) and Givens-rotation
//! least squares, preconditioned conjugate gradients for SPD systems, and a
//! fully reorthogonalized Lanczos iteration for the largest eigenvalue of an
//! implicitly given Hermitian operator.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::operator::{axpy, dot, norm, LinearOperator};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("operator is not positive definite: curvature {curvature} at iteration {iteration}")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },
}

/// Outcome of one Krylov solve.
///
/// For GMRES the recurrence residuals are non-increasing by construction and
/// equal the true residuals of the original system (right preconditioning);
/// CG reports plain residual norms, which need not decrease monotonically.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Residual norms, starting with ‖r_0‖ = ‖b‖.
    pub residual_history: Vec<f64>,
    pub true_final_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solve report serializes")
    }

    /// Measurement columns of a CSV row; the harness prepends parameters.
    pub fn csv_fields(&self) -> String {
        format!("{},{:e},{}", self.iterations, self.true_final_residual, self.converged)
    }

    pub const CSV_HEADER: &'static str = "iterations,final_residual,converged";
}

fn complex_givens(a: C64, b: C64) -> (C64, C64) {
    if b.norm() == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / r, b / r)
}

/// Full (non-restarted) right-preconditioned GMRES for A·B·x̃ = b with zero
/// initial guess; returns x = B·x̃.
///
/// The recurrence residual |g_{k+1}| is the actual residual ‖b − A·x_k‖, so
/// the relative stopping criterion tol·‖b‖ applies to the original system.
/// Exceeding `max_iter` yields a non-converged report, not an error; an
/// Arnoldi breakdown triggers the exact solve from the invariant subspace.
pub fn gmres_right(
    a: &dyn LinearOperator,
    b_prec: &dyn LinearOperator,
    rhs: &[C64],
    tol_rel: f64,
    max_iter: usize,
) -> (Vec<C64>, SolveReport) {
    let start = Instant::now();
    let n = a.dim();
    assert_eq!(b_prec.dim(), n, "gmres: preconditioner dimension mismatch");
    assert_eq!(rhs.len(), n, "gmres: rhs dimension mismatch");
    assert!(tol_rel > 0.0, "gmres: tolerance must be positive");

    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return (
            vec![C64::new(0.0, 0.0); n],
            SolveReport {
                iterations: 0,
                residual_history: vec![0.0],
                true_final_residual: 0.0,
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        );
    }

    let kmax = max_iter.min(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(kmax + 1);
    basis.push(rhs.iter().map(|v| v / bnorm).collect());
    // Column k of the transformed Hessenberg matrix, entries 0..=k.
    let mut hcols: Vec<Vec<C64>> = Vec::with_capacity(kmax);
    let mut cs: Vec<C64> = Vec::with_capacity(kmax);
    let mut sn: Vec<C64> = Vec::with_capacity(kmax);
    let mut g: Vec<C64> = vec![C64::new(bnorm, 0.0)];
    let mut history = vec![bnorm];
    let mut converged = false;
    let mut iterations = 0;

    let mut z = vec![C64::new(0.0, 0.0); n];
    for k in 0..kmax {
        b_prec.apply(&basis[k], &mut z);
        let mut w = vec![C64::new(0.0, 0.0); n];
        a.apply(&z, &mut w);
        let w_initial = norm(&w);

        let mut col = vec![C64::new(0.0, 0.0); k + 2];
        for j in 0..=k {
            let h = dot(&basis[j], &w);
            axpy(&mut w, -h, &basis[j]);
            col[j] = h;
        }
        // One reorthogonalization pass.
        for j in 0..=k {
            let dh = dot(&basis[j], &w);
            axpy(&mut w, -dh, &basis[j]);
            col[j] += dh;
        }
        let wn = norm(&w);
        let breakdown = wn <= 1e-14 * w_initial.max(1e-300);
        col[k + 1] = C64::new(wn, 0.0);

        for j in 0..k {
            let t = cs[j].conj() * col[j] + sn[j].conj() * col[j + 1];
            col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
            col[j] = t;
        }
        let (c, s) = if breakdown {
            complex_givens(col[k], C64::new(0.0, 0.0))
        } else {
            complex_givens(col[k], col[k + 1])
        };
        let t = c.conj() * col[k] + s.conj() * col[k + 1];
        col[k] = t;
        col[k + 1] = C64::new(0.0, 0.0);
        cs.push(c);
        sn.push(s);
        g.push(-s * g[k]);
        g[k] = c.conj() * g[k];

        hcols.push(col);
        iterations = k + 1;
        let res = g[k + 1].norm();
        history.push(res);
        if res <= tol_rel * bnorm || breakdown {
            converged = res <= tol_rel * bnorm || breakdown;
            break;
        }
        basis.push(w.iter().map(|v| v / wn).collect());
    }

    // Back-substitute the triangular system R y = g.
    let m = iterations;
    let mut y = vec![C64::new(0.0, 0.0); m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for j in i + 1..m {
            acc -= hcols[j][i] * y[j];
        }
        if hcols[i][i].norm() > 0.0 {
            y[i] = acc / hcols[i][i];
        }
    }
    let mut xt = vec![C64::new(0.0, 0.0); n];
    for j in 0..m {
        axpy(&mut xt, y[j], &basis[j]);
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    b_prec.apply(&xt, &mut x);

    let mut ax = vec![C64::new(0.0, 0.0); n];
    a.apply(&x, &mut ax);
    let true_final: f64 = ax
        .iter()
        .zip(rhs)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt();

    (
        x,
        SolveReport {
            iterations,
            residual_history: history,
            true_final_residual: true_final,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    )
}

/// Preconditioned conjugate gradients for Hermitian positive definite
/// systems. `precond` must itself be Hermitian positive definite; pass
/// `None` for plain CG. Detected non-positive curvature is an error.
pub fn cg_spd(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    rhs: &[C64],
    tol_rel: f64,
    max_iter: usize,
) -> Result<(Vec<C64>, SolveReport), SolveError> {
    let start = Instant::now();
    let n = a.dim();
    assert_eq!(rhs.len(), n, "cg: rhs dimension mismatch");
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((
            vec![C64::new(0.0, 0.0); n],
            SolveReport {
                iterations: 0,
                residual_history: vec![0.0],
                true_final_residual: 0.0,
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }
    let apply_prec = |r: &[C64], z: &mut Vec<C64>| match precond {
        Some(p) => p.apply(r, z),
        None => z.copy_from_slice(r),
    };

    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut r = rhs.to_vec();
    let mut z = vec![C64::new(0.0, 0.0); n];
    apply_prec(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut history = vec![bnorm];
    let mut converged = false;
    let mut iterations = 0;
    let mut ap = vec![C64::new(0.0, 0.0); n];

    for k in 0..max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap).re;
        if pap <= 0.0 {
            return Err(SolveError::NotPositiveDefinite { iteration: k, curvature: pap });
        }
        let alpha = C64::new(rz / pap, 0.0);
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rn = norm(&r);
        history.push(rn);
        iterations = k + 1;
        if rn <= tol_rel * bnorm {
            converged = true;
            break;
        }
        apply_prec(&r, &mut z);
        let rz_new = dot(&r, &z).re;
        let beta = C64::new(rz_new / rz, 0.0);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    let mut ax = vec![C64::new(0.0, 0.0); n];
    a.apply(&x, &mut ax);
    let true_final: f64 = ax
        .iter()
        .zip(rhs)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((
        x,
        SolveReport {
            iterations,
            residual_history: history,
            true_final_residual: true_final,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Result of a Lanczos largest-eigenvalue iteration.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub lambda: f64,
    pub vector: Vec<C64>,
    pub converged: bool,
    /// Ritz pair residual estimate ‖Hv − λv‖.
    pub residual: f64,
    pub iterations: usize,
    /// Largest Ritz value per iteration (non-decreasing).
    pub ritz_history: Vec<f64>,
}

/// Number of eigenvalues of the symmetric tridiagonal (alpha, beta) below x.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = alpha[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..alpha.len() {
        let denom = if d == 0.0 { 1e-300 } else { d };
        d = alpha[i] - x - beta[i - 1] * beta[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the symmetric tridiagonal via Sturm bisection.
fn tridiag_max_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let radius = |i: usize| {
        let mut r = 0.0;
        if i > 0 {
            r += beta[i - 1].abs();
        }
        if i < k - 1 {
            r += beta[i].abs();
        }
        r
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        lo = lo.min(alpha[i] - radius(i));
        hi = hi.max(alpha[i] + radius(i));
    }
    if lo == hi {
        return lo;
    }
    for _ in 0..110 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(alpha, beta, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * (hi.abs().max(lo.abs()).max(1.0)) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the symmetric tridiagonal for eigenvalue `theta`, via
/// inverse iteration with a pivoted tridiagonal solve.
fn tridiag_eigvec(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let k = alpha.len();
    if k == 1 {
        return vec![1.0];
    }
    let scale = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let shift = theta + 1e-14 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7211D1A6);
    let mut y: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() - 0.5).collect();
    for _ in 0..3 {
        y = tridiag_solve(alpha, beta, shift, &y);
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            y = vec![1.0 / (k as f64).sqrt(); k];
            break;
        }
        for v in &mut y {
            *v /= nrm;
        }
    }
    y
}

/// Solve (T - shift·I) x = b by Gaussian elimination with partial pivoting.
/// Row swaps introduce a second superdiagonal, stored in `f2`.
///
/// Invariant before step i: row i holds (d[i], e[i], 0) starting at column i
/// and row i+1 is still its original (beta[i], d[i+1], beta[i+1]).
fn tridiag_solve(alpha: &[f64], beta: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let mut d: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    let mut e: Vec<f64> = beta.to_vec();
    let mut f2: Vec<f64> = vec![0.0; k.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..k - 1 {
        let s = beta[i];
        let l;
        if s.abs() > d[i].abs() {
            let (d_old, e_old) = (d[i], e[i]);
            d[i] = s;
            e[i] = d[i + 1];
            if i + 2 < k {
                f2[i] = e[i + 1];
            }
            l = d_old / d[i];
            d[i + 1] = e_old - l * e[i];
            if i + 2 < k {
                e[i + 1] = -l * f2[i];
            }
            x.swap(i, i + 1);
        } else {
            let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
            l = s / piv;
            d[i + 1] -= l * e[i];
        }
        x[i + 1] -= l * x[i];
    }
    let piv = if d[k - 1] == 0.0 { 1e-300 } else { d[k - 1] };
    x[k - 1] /= piv;
    for i in (0..k - 1).rev() {
        let mut acc = x[i] - e[i] * x[i + 1];
        if i + 2 < k {
            acc -= f2[i] * x[i + 2];
        }
        let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
        x[i] = acc / piv;
    }
    x
}

/// Largest eigenvalue of a Hermitian operator by Lanczos with full
/// reorthogonalization. Non-convergence within `max_iter` returns the best
/// estimate with `converged = false`.
pub fn lanczos_max_eig(h: &dyn LinearOperator, tol: f64, max_iter: usize) -> LanczosResult {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x174A11CE);
    let mut v0: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nrm = norm(&v0);
    for v in &mut v0 {
        *v /= nrm;
    }

    let kmax = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<C64>> = vec![v0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut ritz_history: Vec<f64> = Vec::new();
    let mut scale_est = 0.0f64;
    let mut converged = false;
    let (mut lambda, mut residual) = (0.0, f64::INFINITY);
    let mut y: Vec<f64> = vec![1.0];

    for k in 0..kmax {
        let mut w = h.apply_vec(&basis[k]);
        let a_k = dot(&basis[k], &w).re;
        alpha.push(a_k);
        axpy(&mut w, C64::new(-a_k, 0.0), &basis[k]);
        if k > 0 {
            axpy(&mut w, C64::new(-beta[k - 1], 0.0), &basis[k - 1]);
        }
        // Full reorthogonalization against the whole basis.
        for vb in &basis {
            let c = dot(vb, &w);
            axpy(&mut w, -c, vb);
        }
        let b_k = norm(&w);
        scale_est = scale_est.max(a_k.abs()).max(b_k);

        lambda = tridiag_max_eig(&alpha, &beta);
        ritz_history.push(lambda);
        y = tridiag_eigvec(&alpha, &beta, lambda);
        // Ritz residual ‖Hv − λv‖ = sqrt(‖(T−λ)y‖² + (β_k y_k)²).
        let mut ty: f64 = 0.0;
        for i in 0..alpha.len() {
            let mut acc = (alpha[i] - lambda) * y[i];
            if i > 0 {
                acc += beta[i - 1] * y[i - 1];
            }
            if i + 1 < alpha.len() {
                acc += beta[i] * y[i + 1];
            }
            ty += acc * acc;
        }
        let tail = b_k * y[alpha.len() - 1];
        residual = (ty + tail * tail).sqrt();

        if residual <= tol * lambda.abs().max(1.0) || b_k <= 1e-14 * scale_est.max(1e-300) {
            converged = true;
            break;
        }
        if k + 1 == kmax {
            break;
        }
        beta.push(b_k);
        basis.push(w.iter().map(|v| v / b_k).collect());
    }

    let mut vector = vec![C64::new(0.0, 0.0); n];
    for (j, vb) in basis.iter().enumerate().take(y.len()) {
        axpy(&mut vector, C64::new(y[j], 0.0), vb);
    }
    let vnorm = norm(&vector);
    if vnorm > 0.0 {
        for v in &mut vector {
            *v /= vnorm;
        }
    }
    LanczosResult {
        lambda,
        vector,
        converged,
        residual,
        iterations: alpha.len(),
        ritz_history,
    }
}
