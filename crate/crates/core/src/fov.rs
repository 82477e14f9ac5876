//! Field-of-values enclosures via the rotation sweep.
//!
//! For each angle θ the FOV of B lies in the half plane
//! `Re(e^{iθ} z) ≤ λ_max(H(e^{iθ}B))` with `H(C) = (C + C*)/2`; sweeping θ
//! over a uniform grid and intersecting the half planes encloses the FOV in
//! a convex polygon. The extreme Ritz vectors provide witness points on or
//! near the FOV boundary, i.e. an inner approximation to pair with the
//! outer polygon.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::krylov::lanczos_max_eig;
use crate::operator::{dot, HermitianPartOperator, LinearOperator, ScaledOperator};

const LANCZOS_MAX_ITER: usize = 500;

/// Half-plane enclosure of a field of values.
#[derive(Debug, Clone)]
pub struct FovEnclosure {
    /// Sweep angles.
    pub angles: Vec<f64>,
    /// Support values: FOV ⊂ { z : Re(e^{iθ_k} z) ≤ s_k }.
    pub supports: Vec<f64>,
    /// Rayleigh quotients of the extreme Ritz vectors (inner approximation).
    pub witnesses: Vec<C64>,
    /// Angles where Lanczos did not converge; their supports are padded by
    /// the residual bound.
    pub flagged: Vec<bool>,
    /// Vertices of the half-plane intersection, counterclockwise.
    pub polygon: Vec<(f64, f64)>,
}

impl FovEnclosure {
    /// Tolerance scale of the enclosure.
    pub fn scale(&self) -> f64 {
        self.supports.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// Support-function containment test with additive tolerance.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.angles.iter().zip(&self.supports).all(|(&theta, &s)| {
            (C64::from_polar(1.0, theta) * z).re <= s + tol
        })
    }

    /// The origin lies outside the enclosure iff some support is negative.
    pub fn origin_excluded(&self) -> bool {
        self.supports.iter().any(|&s| s < 0.0)
    }

    /// CSV dump: one row per sweep angle.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,support,witness_re,witness_im,flagged\n");
        for k in 0..self.angles.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                self.angles[k],
                self.supports[k],
                self.witnesses[k].re,
                self.witnesses[k].im,
                self.flagged[k]
            ));
        }
        out
    }
}

pub fn compute_enclosure(b: &dyn LinearOperator, n_angles: usize, eig_tol: f64) -> FovEnclosure {
    compute_enclosure_offset(b, n_angles, eig_tol, 0.0)
}

/// Enclosure with the angle grid `offset + 2πk/n`; the offset grid is what
/// makes the rotation property testable without grid mismatch.
pub fn compute_enclosure_offset(
    b: &dyn LinearOperator,
    n_angles: usize,
    eig_tol: f64,
    offset: f64,
) -> FovEnclosure {
    assert!(n_angles >= 8, "need at least 8 sweep angles");
    let angles: Vec<f64> =
        (0..n_angles).map(|k| offset + std::f64::consts::TAU * k as f64 / n_angles as f64).collect();
    let max_iter = LANCZOS_MAX_ITER.min(b.dim()).max(1);
    let results: Vec<(f64, C64, bool)> = angles
        .par_iter()
        .map(|&theta| {
            let h = HermitianPartOperator { op: b, phase: C64::from_polar(1.0, theta) };
            let r = lanczos_max_eig(&h, eig_tol, max_iter);
            let support = if r.converged { r.lambda } else { r.lambda + r.residual };
            let v = &r.vector;
            let vn = dot(v, v).re;
            let witness = if vn > 0.0 { dot(v, &b.apply_vec(v)) / vn } else { C64::new(0.0, 0.0) };
            (support, witness, !r.converged)
        })
        .collect();
    let supports: Vec<f64> = results.iter().map(|r| r.0).collect();
    let witnesses: Vec<C64> = results.iter().map(|r| r.1).collect();
    let flagged: Vec<bool> = results.iter().map(|r| r.2).collect();
    let polygon = halfplane_polygon(&angles, &supports, &witnesses);
    FovEnclosure { angles, supports, witnesses, flagged, polygon }
}

/// Intersect the support half planes into a convex polygon. Clipping is
/// done in coordinates shifted to the witness centroid so that very small
/// sets (e.g. perturbation operators at large N) keep full relative
/// precision.
fn halfplane_polygon(angles: &[f64], supports: &[f64], witnesses: &[C64]) -> Vec<(f64, f64)> {
    let m = witnesses.len() as f64;
    let cx = witnesses.iter().map(|w| w.re).sum::<f64>() / m;
    let cy = witnesses.iter().map(|w| w.im).sum::<f64>() / m;
    // Half plane in shifted coordinates: n·p ≤ s − n·c.
    let normals: Vec<(f64, f64)> = angles.iter().map(|&t| (t.cos(), -t.sin())).collect();
    let shifted: Vec<f64> = normals
        .iter()
        .zip(supports)
        .map(|(&(nx, ny), &s)| s - nx * cx - ny * cy)
        .collect();
    let smax = shifted.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let big = 4.0 * smax + 1e-12 * (1.0 + cx.abs() + cy.abs()) + 1e-300;
    let eps = 1e-13 * smax.max(1e-300);
    let mut poly = vec![(-big, -big), (big, -big), (big, big), (-big, big)];
    for (&(nx, ny), &s) in normals.iter().zip(&shifted) {
        poly = clip(&poly, nx, ny, s, eps);
        if poly.is_empty() {
            return vec![(cx, cy)];
        }
    }
    // Merge duplicate vertices produced by near-coincident support lines.
    let size = poly
        .iter()
        .map(|p| (p.0 * p.0 + p.1 * p.1).sqrt())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(poly.len());
    for p in poly {
        if let Some(&last) = dedup.last() {
            if (p.0 - last.0).hypot(p.1 - last.1) <= 1e-12 * size {
                continue;
            }
        }
        dedup.push(p);
    }
    if dedup.len() > 1 {
        let (first, last) = (dedup[0], dedup[dedup.len() - 1]);
        if (first.0 - last.0).hypot(first.1 - last.1) <= 1e-12 * size {
            dedup.pop();
        }
    }
    dedup.iter().map(|p| (p.0 + cx, p.1 + cy)).collect()
}

fn clip(poly: &[(f64, f64)], nx: f64, ny: f64, s: f64, eps: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let side = |p: (f64, f64)| nx * p.0 + ny * p.1 - s;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (dp, dq) = (side(p), side(q));
        if dp <= eps {
            out.push(p);
        }
        if (dp <= eps) != (dq <= eps) {
            let t = dp / (dp - dq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Shape diagnostics of an enclosure: bounding rectangle, strip intercepts
/// (constant-σ Laplace case), distance from origin and the best disc for
/// the GMRES convergence bound, raw and h^d-scaled.
#[derive(Debug, Clone)]
pub struct FovDiagnostics {
    /// re_min, re_max, im_min, im_max of the polygon.
    pub rect: [f64; 4],
    pub rect_scaled: [f64; 4],
    /// min/max over witnesses of Re z + (κ²/σ)·Im z; constant σ > 0 only.
    pub strip_witness: Option<(f64, f64)>,
    pub strip_witness_scaled: Option<(f64, f64)>,
    pub dist_origin: f64,
    pub disc_center: C64,
    pub disc_radius: f64,
    /// True when the origin lies outside the polygon and radius < |center|,
    /// i.e. the disc convergence bound applies.
    pub bound_applicable: bool,
    /// The h^d divisor used for the scaled variants.
    pub hd: f64,
}

pub fn diagnostics(
    enc: &FovEnclosure,
    h: f64,
    dim: usize,
    kappa2: f64,
    sigma_const: Option<f64>,
) -> FovDiagnostics {
    let hd = h.powi(dim as i32);
    let poly = &enc.polygon;
    let mut rect = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for &(x, y) in poly {
        rect[0] = rect[0].min(x);
        rect[1] = rect[1].max(x);
        rect[2] = rect[2].min(y);
        rect[3] = rect[3].max(y);
    }
    let strip_witness = sigma_const.filter(|&s| s > 0.0).map(|sigma| {
        let slope = kappa2 / sigma;
        let vals: Vec<f64> = enc.witnesses.iter().map(|w| w.re + slope * w.im).collect();
        (
            vals.iter().cloned().fold(f64::INFINITY, f64::min),
            vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    });
    let (cx, cy) = polygon_centroid(poly);
    let disc_center = C64::new(cx, cy);
    let disc_radius = poly
        .iter()
        .map(|&(x, y)| (x - cx).hypot(y - cy))
        .fold(0.0f64, f64::max);
    let excluded = enc.origin_excluded();
    let dist_origin =
        if excluded { dist_point_convex((0.0, 0.0), poly) } else { 0.0 };
    FovDiagnostics {
        rect,
        rect_scaled: [rect[0] / hd, rect[1] / hd, rect[2] / hd, rect[3] / hd],
        strip_witness,
        strip_witness_scaled: strip_witness.map(|(a, b)| (a / hd, b / hd)),
        dist_origin,
        disc_center,
        disc_radius,
        bound_applicable: excluded && disc_radius < disc_center.norm(),
        hd,
    }
}

/// Hermitian combination H(B) + t·S(B) = ½(1−it)B + ½(1+it)B*.
///
/// For the Laplace-preconditioned operator with constant σ and t = κ²/σ the
/// combination collapses to the mass matrix, so its eigenvalue extremes are
/// the exact strip intercepts, independent of κ.
pub struct TiltedHermitian<'a> {
    pub op: &'a dyn LinearOperator,
    pub slope: f64,
    pub negate: bool,
}

impl LinearOperator for TiltedHermitian<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut adj = vec![C64::new(0.0, 0.0); x.len()];
        self.op.apply(x, y);
        self.op.apply_adjoint(x, &mut adj);
        let p = 0.5 * C64::new(1.0, -self.slope);
        let q = p.conj();
        let sign = if self.negate { -1.0 } else { 1.0 };
        for (v, a) in y.iter_mut().zip(&adj) {
            *v = sign * (p * *v + q * a);
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y);
    }
}

/// Exact strip intercept extremes of the FOV of `b`: min and max of
/// Re z + (κ²/σ)·Im z over the FOV, via two Lanczos solves on the tilted
/// Hermitian combination.
pub fn strip_intercepts(
    b: &dyn LinearOperator,
    kappa2: f64,
    sigma: f64,
    eig_tol: f64,
) -> (f64, f64) {
    assert!(sigma > 0.0, "strip intercepts require constant sigma > 0");
    let slope = kappa2 / sigma;
    let max_iter = LANCZOS_MAX_ITER.min(b.dim()).max(1);
    let hi = lanczos_max_eig(&TiltedHermitian { op: b, slope, negate: false }, eig_tol, max_iter);
    let lo = lanczos_max_eig(&TiltedHermitian { op: b, slope, negate: true }, eig_tol, max_iter);
    (-lo.lambda, hi.lambda)
}

/// Result of numerically checking F(e^{iθ}B) = e^{iθ}F(B).
#[derive(Debug, Clone)]
pub struct RotationCheck {
    pub hausdorff: f64,
    pub scale: f64,
    pub ok: bool,
}

/// Compare the enclosure of e^{iθ}B on the base angle grid against the
/// rotation of the enclosure of B computed on the shifted grid; the two use
/// the same support directions, so they must agree up to solver tolerance.
pub fn rotation_check(
    b: &dyn LinearOperator,
    theta: f64,
    n_angles: usize,
    eig_tol: f64,
) -> RotationCheck {
    let rotated_op = ScaledOperator { op: b, factor: C64::from_polar(1.0, theta) };
    let enc_rot = compute_enclosure_offset(&rotated_op, n_angles, eig_tol, 0.0);
    let enc_base = compute_enclosure_offset(b, n_angles, eig_tol, theta);
    let phase = C64::from_polar(1.0, theta);
    let rotated_base: Vec<(f64, f64)> = enc_base
        .polygon
        .iter()
        .map(|&(x, y)| {
            let z = phase * C64::new(x, y);
            (z.re, z.im)
        })
        .collect();
    let hausdorff = hausdorff_points(&enc_rot.polygon, &rotated_base);
    let scale = enc_rot.scale().max(enc_base.scale()).max(1e-300);
    RotationCheck { hausdorff, scale, ok: hausdorff <= 1e-7 * scale }
}

// ---------------------------------------------------------------------
// Planar geometry helpers.

/// Area centroid; falls back to the vertex mean for degenerate polygons.
pub fn polygon_centroid(poly: &[(f64, f64)]) -> (f64, f64) {
    let n = poly.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = (
        poly.iter().map(|p| p.0).sum::<f64>() / n as f64,
        poly.iter().map(|p| p.1).sum::<f64>() / n as f64,
    );
    if n < 3 {
        return mean;
    }
    let mut area2 = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let cross = p.0 * q.1 - q.0 * p.1;
        area2 += cross;
        cx += (p.0 + q.0) * cross;
        cy += (p.1 + q.1) * cross;
    }
    let size: f64 = poly.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
    if area2.abs() <= 1e-24 * size * size {
        return mean;
    }
    (cx / (3.0 * area2), cy / (3.0 * area2))
}

pub fn dist_point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Distance from a point to a convex polygon (0 when inside).
pub fn dist_point_convex(p: (f64, f64), poly: &[(f64, f64)]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (p.0 - poly[0].0).hypot(p.1 - poly[0].1),
        2 => dist_point_segment(p, poly[0], poly[1]),
        n => {
            let mut inside = true;
            for i in 0..n {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross < 0.0 {
                    inside = false;
                    break;
                }
            }
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| dist_point_segment(p, poly[i], poly[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Convex hull by monotone chain, counterclockwise. Collinear input yields
/// the two extreme points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All points collinear: keep the extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    lower
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_points(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let one_way = |from: &[(f64, f64)], to: &[(f64, f64)]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p.0 - q.0).hypot(p.1 - q.1))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Hausdorff distance between a point set and a convex region given by its
/// hull vertices (a point, a segment, or a polygon).
pub fn hausdorff_to_convex(points: &[(f64, f64)], hull: &[(f64, f64)]) -> f64 {
    let d1 = points
        .iter()
        .map(|&p| dist_point_convex(p, hull))
        .fold(0.0f64, f64::max);
    let poly_region = points;
    let d2 = hull
        .iter()
        .map(|&hp| dist_point_convex(hp, poly_region))
        .fold(0.0f64, f64::max);
    d1.max(d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::DenseMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_op(d: &[C64]) -> DenseMatrix {
        DenseMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { c(0.0, 0.0) })
    }

    #[test]
    fn scalar_operator_collapses_to_point() {
        let z0 = c(0.121, 0.0039);
        let b = diag_op(&[z0]);
        for n_angles in [8usize, 64] {
            let enc = compute_enclosure(&b, n_angles, 1e-12);
            for &(x, y) in &enc.polygon {
                assert!((x - z0.re).hypot(y - z0.im) <= 1e-9, "vertex ({x},{y}) far from z0");
            }
            for w in &enc.witnesses {
                assert!((w - z0).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn diag_01_is_thin_segment() {
        let b = diag_op(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let enc = compute_enclosure(&b, 64, 1e-11);
        for &(x, y) in &enc.polygon {
            assert!(y.abs() <= 1e-9, "polygon thickness {y}");
            assert!((-1e-9..=1.0 + 1e-9).contains(&x));
        }
        for w in &enc.witnesses {
            assert!(w.im.abs() <= 1e-9);
            assert!((-1e-9..=1.0 + 1e-9).contains(&w.re));
        }
        // Hull match for a normal (here Hermitian) operator.
        let hull = vec![(0.0, 0.0), (1.0, 0.0)];
        let hd = hausdorff_to_convex(&enc.polygon, &hull);
        assert!(hd <= 10.0 * 1e-11 + 1e-12, "hull mismatch {hd}");
    }

    #[test]
    fn nilpotent_disc_radius_half() {
        let b = DenseMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let enc = compute_enclosure(&b, 64, 1e-12);
        // Supports are all exactly 1/2; witnesses sit on the boundary circle.
        for &s in &enc.supports {
            assert!((s - 0.5).abs() <= 1e-9);
        }
        let max_w = enc.witnesses.iter().map(|w| w.norm()).fold(0.0f64, f64::max);
        assert!((max_w - 0.5).abs() <= 1e-6, "witness radius {max_w}");

        // Dense Rayleigh-quotient sampling oracle from below.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let x = [c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                     c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)];
            let n2 = x[0].norm_sqr() + x[1].norm_sqr();
            let q = (x[0].conj() * x[1]) / n2;
            best = best.max(q.norm());
        }
        assert!(best <= max_w + 1e-6, "oracle {best} exceeds witness radius {max_w}");
        assert!(best >= 0.49, "sampling oracle unexpectedly weak: {best}");
    }

    #[test]
    fn witnesses_inside_polygon_and_contains() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 20;
        let b = DenseMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let enc = compute_enclosure(&b, 32, 1e-10);
        let tol = 1e-8 * enc.scale();
        for w in &enc.witnesses {
            assert!(enc.contains(*w, tol), "witness {w} outside enclosure");
        }
        // Random Rayleigh quotients stay inside as well.
        for _ in 0..1000 {
            let x: Vec<C64> = (0..n)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let q = dot(&x, &b.mul_vec(&x)) / dot(&x, &x).re;
            assert!(enc.contains(q, tol), "rayleigh quotient {q} outside");
        }
    }

    #[test]
    fn polygon_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 12;
        let b = DenseMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let enc = compute_enclosure(&b, 48, 1e-10);
        let poly = &enc.polygon;
        assert!(poly.len() >= 3);
        let scale = enc.scale();
        for i in 0..poly.len() {
            let a = poly[i];
            let b_ = poly[(i + 1) % poly.len()];
            let cvert = poly[(i + 2) % poly.len()];
            let cross =
                (b_.0 - a.0) * (cvert.1 - a.1) - (b_.1 - a.1) * (cvert.0 - a.0);
            assert!(cross >= -1e-10 * scale * scale, "non-convex corner at {i}");
        }
    }

    #[test]
    fn monotone_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 10;
        let b = DenseMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let coarse = compute_enclosure(&b, 16, 1e-10);
        let fine = compute_enclosure(&b, 32, 1e-10);
        let tol = 1e-9 * coarse.scale().max(1.0);
        for &(x, y) in &fine.polygon {
            assert!(
                coarse.contains(c(x, y), tol),
                "refined polygon vertex ({x},{y}) escapes the coarse polygon"
            );
        }
    }

    #[test]
    fn rotation_check_identity_and_pi() {
        let b = diag_op(&[c(-1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        let chk0 = rotation_check(&b, 0.0, 32, 1e-11);
        assert!(chk0.ok, "theta=0: {}", chk0.hausdorff);
        let chk_pi = rotation_check(&b, std::f64::consts::PI, 32, 1e-11);
        assert!(chk_pi.ok, "theta=pi: {}", chk_pi.hausdorff);
        // Reflection sanity: enclosure of -B spans [-2, 1] on the real axis.
        let neg = ScaledOperator { op: &b, factor: c(-1.0, 0.0) };
        let enc = compute_enclosure(&neg, 32, 1e-11);
        let (lo, hi) = enc
            .polygon
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
        assert!((lo + 2.0).abs() < 1e-8 && (hi - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rotation_check_random_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 20;
        let b = DenseMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let chk = rotation_check(&b, std::f64::consts::FRAC_PI_3, 32, 1e-11);
        assert!(
            chk.ok,
            "hausdorff {} vs scale {} at theta=pi/3",
            chk.hausdorff, chk.scale
        );
    }

    #[test]
    fn diagnostics_scalar_point() {
        let z0 = c(0.121, 0.0039);
        let b = diag_op(&[z0]);
        let enc = compute_enclosure(&b, 32, 1e-12);
        let d = diagnostics(&enc, 0.5, 2, 1.0, Some(1.0));
        assert!((d.rect_scaled[1] - 0.484).abs() < 1e-6);
        assert!((d.rect_scaled[3] - 0.0156).abs() < 1e-6);
        assert!(d.bound_applicable);
        assert!((d.disc_center - z0).norm() < 1e-9);
        assert!(d.disc_radius < 1e-9);
        let (lo, hi) = d.strip_witness.unwrap();
        assert!((lo - (z0.re + z0.im)).abs() < 1e-12);
        assert!((hi - lo).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_symmetric_spectrum() {
        // Eigenvalues symmetric about the real axis give im_min = -im_max.
        let b = diag_op(&[c(1.0, 0.5), c(1.0, -0.5), c(2.0, 0.0)]);
        let enc = compute_enclosure(&b, 64, 1e-11);
        let d = diagnostics(&enc, 0.25, 2, 0.0, None);
        assert!((d.rect[2] + d.rect[3]).abs() <= 1e-8);
        assert!(d.strip_witness.is_none());
    }

    #[test]
    fn hull_and_geometry_helpers() {
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert_eq!(dist_point_convex((0.5, 0.5), &hull), 0.0);
        assert!((dist_point_convex((2.0, 0.5), &hull) - 1.0).abs() < 1e-15);
        let seg = convex_hull(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        assert_eq!(seg.len(), 2);
        assert!((dist_point_segment((0.5, 1.0), seg[0], seg[1]) - 1.0).abs() < 1e-15);
        assert_eq!(hausdorff_points(&[(0.0, 0.0)], &[(3.0, 4.0)]), 5.0);
    }
}
