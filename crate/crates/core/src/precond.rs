//! The three right preconditioners as linear operators with adjoints:
//!
//! * exact Laplace        B  = K⁻¹M
//! * multigrid Laplace    B̃  = K̃⁻ᴺM
//! * two-level            B₂ = R A_H⁻¹ Rᵀ M + K⁻¹(I − A R A_H⁻¹ Rᵀ)M
//!
//! plus the perturbation operator A(K̃⁻ᴺ − K⁻¹)M whose FOV measures the
//! inexactness of the multigrid Laplace solve. "Exact" K⁻¹ is a dense LU
//! for small systems and multigrid-preconditioned CG to 1e-12 otherwise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::assembly::HelmholtzProblem;
use crate::krylov::cg_spd;
use crate::mesh::MeshHierarchy;
use crate::multigrid::{MgHierarchy, VcycleOperator};
use crate::operator::LinearOperator;
use crate::sparse::{DenseLu, LinAlgError, SparseComplexMatrix};

/// Largest system where "exact" K solves use a dense LU; above this the
/// multigrid-CG route takes over (and doubles as the production path that
/// the LU route can cross-check).
pub const DENSE_K_SOLVE_MAX: usize = 2000;

/// Relative tolerance of inner "exact" solves.
pub const INNER_SOLVE_TOL: f64 = 1e-12;
pub const INNER_SOLVE_MAX_ITER: usize = 2000;

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error("cannot parse preconditioner spec `{0}` (expected laplace | mg:N | twolevel:L)")]
    BadSpec(String),
    #[error("coarse level {coarse} must lie in the hierarchy below the fine level {fine}")]
    BadCoarseLevel { coarse: u32, fine: u32 },
    #[error("loss box is not aligned with the coarse grid (h = {h})")]
    BoxNotAligned { h: f64 },
    #[error("coarse system factorization failed: {0}")]
    CoarseFactor(#[from] LinAlgError),
}

/// Preconditioner selection, parseable from `laplace`, `mg:N`, `twolevel:L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondSpec {
    ExactLaplace,
    MgLaplace { cycles: usize },
    TwoLevel { coarse_level: u32 },
}

impl FromStr for PrecondSpec {
    type Err = PrecondError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PrecondError::BadSpec(s.to_string());
        match s.split_once(':') {
            None if s == "laplace" => Ok(Self::ExactLaplace),
            Some(("mg", n)) => {
                let cycles: usize = n.parse().map_err(|_| bad())?;
                if cycles == 0 {
                    return Err(bad());
                }
                Ok(Self::MgLaplace { cycles })
            }
            Some(("twolevel", l)) => {
                let coarse_level: u32 = l.parse().map_err(|_| bad())?;
                Ok(Self::TwoLevel { coarse_level })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExactLaplace => write!(f, "laplace"),
            Self::MgLaplace { cycles } => write!(f, "mg:{cycles}"),
            Self::TwoLevel { coarse_level } => write!(f, "twolevel:{coarse_level}"),
        }
    }
}

/// How K⁻¹ is realized in the preconditioners.
#[derive(Clone, Copy)]
pub enum KSolver<'a> {
    Lu(&'a DenseLu),
    MgCg { mg: &'a MgHierarchy, tol: f64, max_iter: usize },
}

impl<'a> KSolver<'a> {
    pub fn mg_cg(mg: &'a MgHierarchy) -> Self {
        Self::MgCg { mg, tol: INNER_SOLVE_TOL, max_iter: INNER_SOLVE_MAX_ITER }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Lu(lu) => lu.dim(),
            Self::MgCg { mg, .. } => mg.fine_dim(),
        }
    }

    /// x = K⁻¹ b. K is real symmetric, so the same solve serves the adjoint.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        match self {
            Self::Lu(lu) => lu.solve(b),
            Self::MgCg { mg, tol, max_iter } => {
                let prec = VcycleOperator(mg);
                let (x, rep) = cg_spd(mg.fine_k(), Some(&prec), b, *tol, *max_iter)
                    .expect("stiffness matrix must be SPD");
                if !rep.converged {
                    panic!(
                        "inner Poisson solve did not converge: residual {} after {} iterations",
                        rep.true_final_residual, rep.iterations
                    );
                }
                x
            }
        }
    }
}

/// B = K⁻¹M with adjoint M·K⁻¹.
pub struct ExactLaplace<'a> {
    pub k_solver: KSolver<'a>,
    pub m: &'a SparseComplexMatrix,
}

impl LinearOperator for ExactLaplace<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.k_solver.solve(&self.m.mul_vec(x)));
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.m.spmv(&self.k_solver.solve(x), y);
    }
}

/// B̃ = K̃⁻ᴺM with adjoint M·K̃⁻ᴺ (the V-cycle is symmetric).
pub struct MgLaplace<'a> {
    pub mg: &'a MgHierarchy,
    pub m: &'a SparseComplexMatrix,
    pub cycles: usize,
}

impl LinearOperator for MgLaplace<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.mg.apply_n_cycles(&self.m.mul_vec(x), self.cycles));
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.m.spmv(&self.mg.apply_n_cycles(x, self.cycles), y);
    }
}

/// Coarse-space data of the two-level preconditioner: the coarse system
/// assembled directly on V_H (the Galerkin identity RᵀAR = A_H is asserted
/// in tests, not used as the definition) and the composite prolongation.
pub struct TwoLevelSetup {
    pub coarse_level: u32,
    pub r: SparseComplexMatrix,
    pub a_h: SparseComplexMatrix,
    pub a_h_lu: DenseLu,
}

impl TwoLevelSetup {
    pub fn new(
        hier: &MeshHierarchy,
        fine: &HelmholtzProblem,
        coarse_level: u32,
    ) -> Result<Self, PrecondError> {
        let fine_level = fine.mesh.level();
        if coarse_level < hier.coarsest_level() || coarse_level > fine_level {
            return Err(PrecondError::BadCoarseLevel { coarse: coarse_level, fine: fine_level });
        }
        let coarse_mesh = hier.level(coarse_level);
        if !fine.loss.aligned_with_grid(coarse_mesh.h(), coarse_mesh.dim()) {
            return Err(PrecondError::BoxNotAligned { h: coarse_mesh.h() });
        }
        let coarse = crate::assembly::assemble(coarse_mesh, fine.kappa2, &fine.loss)
            .expect("coarse assembly");
        let a_h_lu = DenseLu::factor_owned(coarse.a.to_dense())?;
        let r = hier.composite_prolongation(coarse_level, fine_level);
        Ok(Self { coarse_level, r, a_h: coarse.a, a_h_lu })
    }
}

/// B₂ = R A_H⁻¹ Rᵀ M + K⁻¹(I − A R A_H⁻¹ Rᵀ)M.
pub struct TwoLevel<'a> {
    pub a: &'a SparseComplexMatrix,
    pub m: &'a SparseComplexMatrix,
    pub setup: &'a TwoLevelSetup,
    pub k_solver: KSolver<'a>,
}

impl LinearOperator for TwoLevel<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let t = self.m.mul_vec(x);
        let c = self.setup.a_h_lu.solve(&self.setup.r.mul_vec_conj_transpose(&t));
        let y1 = self.setup.r.mul_vec(&c);
        let ay1 = self.a.mul_vec(&y1);
        let w: Vec<C64> = t.iter().zip(&ay1).map(|(a, b)| a - b).collect();
        let y2 = self.k_solver.solve(&w);
        for i in 0..y.len() {
            y[i] = y1[i] + y2[i];
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        // B₂* = M R A_H⁻* Rᵀ + M (I − R A_H⁻* Rᵀ A*) K⁻¹
        let z = self.k_solver.solve(x);
        let t1 = self.setup.a_h_lu.solve_conj_transpose(&self.setup.r.mul_vec_conj_transpose(x));
        let az = self.a.mul_vec_conj_transpose(&z);
        let t2 = self.setup.a_h_lu.solve_conj_transpose(&self.setup.r.mul_vec_conj_transpose(&az));
        let diff: Vec<C64> = t1.iter().zip(&t2).map(|(a, b)| a - b).collect();
        let rd = self.setup.r.mul_vec(&diff);
        let sum: Vec<C64> = rd.iter().zip(&z).map(|(a, b)| a + b).collect();
        self.m.spmv(&sum, y);
    }
}

/// The a(·,·)-orthogonal coarse projection I_H with matrix R A_H⁻* Rᵀ A*.
pub struct CoarseProjection<'a> {
    pub a: &'a SparseComplexMatrix,
    pub setup: &'a TwoLevelSetup,
}

impl LinearOperator for CoarseProjection<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let ax = self.a.mul_vec_conj_transpose(x);
        let c = self.setup.a_h_lu.solve_conj_transpose(&self.setup.r.mul_vec_conj_transpose(&ax));
        y.copy_from_slice(&self.setup.r.mul_vec(&c));
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let c = self.setup.a_h_lu.solve(&self.setup.r.mul_vec_conj_transpose(x));
        self.a.spmv(&self.setup.r.mul_vec(&c), y);
    }
}

/// A(K̃⁻ᴺ − K⁻¹)M, the perturbation introduced by the inexact Laplace solve.
pub struct PerturbationOperator<'a> {
    pub a: &'a SparseComplexMatrix,
    pub m: &'a SparseComplexMatrix,
    pub mg: &'a MgHierarchy,
    pub cycles: usize,
    pub k_solver: KSolver<'a>,
}

impl PerturbationOperator<'_> {
    fn difference(&self, t: &[C64]) -> Vec<C64> {
        let inexact = self.mg.apply_n_cycles(t, self.cycles);
        let exact = self.k_solver.solve(t);
        inexact.iter().zip(&exact).map(|(a, b)| a - b).collect()
    }
}

impl LinearOperator for PerturbationOperator<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = self.difference(&self.m.mul_vec(x));
        self.a.spmv(&d, y);
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let d = self.difference(&self.a.mul_vec_conj_transpose(x));
        self.m.spmv(&d, y);
    }
}

/// The right-preconditioned system operator A·B.
pub struct Preconditioned<'a> {
    pub a: &'a SparseComplexMatrix,
    pub b: &'a dyn LinearOperator,
}

impl LinearOperator for Preconditioned<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.a.spmv(&self.b.apply_vec(x), y);
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.b.apply_adjoint(&self.a.mul_vec_conj_transpose(x), y);
    }
}
