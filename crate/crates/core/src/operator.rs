//! Implicit linear operator contract used by the Krylov solvers, the
//! preconditioners and the FOV sweep.

use num_complex::Complex64 as C64;

use crate::sparse::{DenseMatrix, SparseComplexMatrix};

/// An n×n operator given by its action and the action of its adjoint.
///
/// The adjoint must satisfy ⟨Bx, y⟩ = ⟨x, B*y⟩ in the Hermitian inner
/// product ⟨x, y⟩ = Σ conj(x_i)·y_i. GMRES only uses `apply`; the FOV
/// rotation sweep needs both.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// y = B x
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// y = B* x
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        y
    }

    fn apply_adjoint_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_adjoint(x, &mut y);
        y
    }
}

impl LinearOperator for SparseComplexMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator matrices must be square");
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.spmv(x, y);
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.spmv_conj_transpose(x, y);
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator matrices must be square");
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.mul_vec(x));
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.mul_vec_conj_transpose(x));
    }
}

pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
}

/// factor · B
pub struct ScaledOperator<'a> {
    pub op: &'a dyn LinearOperator,
    pub factor: C64,
}

impl LinearOperator for ScaledOperator<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply(x, y);
        for v in y.iter_mut() {
            *v *= self.factor;
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply_adjoint(x, y);
        let f = self.factor.conj();
        for v in y.iter_mut() {
            *v *= f;
        }
    }
}

/// Hermitian part of a rotated operator: x ↦ ½(phase·Bx + conj(phase)·B*x).
pub struct HermitianPartOperator<'a> {
    pub op: &'a dyn LinearOperator,
    pub phase: C64,
}

impl LinearOperator for HermitianPartOperator<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut adj = vec![C64::new(0.0, 0.0); x.len()];
        self.op.apply(x, y);
        self.op.apply_adjoint(x, &mut adj);
        let (p, q) = (0.5 * self.phase, 0.5 * self.phase.conj());
        for (v, a) in y.iter_mut().zip(&adj) {
            *v = p * *v + q * a;
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y);
    }
}

pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (t, s) in y.iter_mut().zip(x) {
        *t += alpha * s;
    }
}
