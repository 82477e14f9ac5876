//! Finite element machinery for the lossy Helmholtz Dirichlet problem
//! `Δu + (κ² - iσ)u = f` on the unit square/cube, together with the
//! iterative solvers and field-of-values (FOV) tooling needed to study
//! Laplace, multigrid-Laplace and two-level preconditioners for GMRES.
//!
//! The crate is organized bottom-up:
//!
//! * [`sparse`] — complex CSR matrices, dense LU, dense Hermitian eigensolve
//! * [`mesh`] — nested uniform simplicial meshes of `(0,1)^d`, `d = 2, 3`
//! * [`assembly`] — P1 stiffness/mass/weighted-mass matrices and loads
//! * [`matrixmarket`] — MatrixMarket coordinate-complex I/O
//! * [`operator`] — the implicit [`LinearOperator`] contract and adapters
//! * [`krylov`] — full right-preconditioned GMRES, CG, Lanczos
//! * [`multigrid`] — geometric V-cycle for the Poisson matrix
//! * [`precond`] — the three preconditioners and the perturbation operator
//! * [`fov`] — rotation-sweep FOV enclosures and their diagnostics

pub mod assembly;
pub mod fov;
pub mod krylov;
pub mod matrixmarket;
pub mod mesh;
pub mod multigrid;
pub mod operator;
pub mod precond;
pub mod sparse;

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use assembly::{assemble, assemble_load_constant, HelmholtzProblem, LossProfile};
pub use krylov::{cg_spd, gmres_right, lanczos_max_eig, SolveReport};
pub use mesh::{build_hierarchy, build_mesh, MeshHierarchy, MeshLevel};
pub use multigrid::MgHierarchy;
pub use operator::LinearOperator;
pub use precond::{KSolver, PrecondSpec};
pub use sparse::{DenseLu, DenseMatrix, SparseComplexMatrix};
