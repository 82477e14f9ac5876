//! Construction of a complete solver stack for one (mesh, parameters,
//! preconditioner) combination: hierarchy, assembled problem, multigrid,
//! the K-solver and the requested preconditioner.

use anyhow::{bail, Context, Result};
use helmfov::assembly::{assemble, assemble_load_constant, HelmholtzProblem, LossProfile};
use helmfov::krylov::{gmres_right, SolveReport};
use helmfov::mesh::{build_hierarchy, build_mesh, MeshHierarchy};
use helmfov::multigrid::MgHierarchy;
use helmfov::operator::LinearOperator;
use helmfov::precond::{
    ExactLaplace, KSolver, MgLaplace, PerturbationOperator, PrecondSpec, Preconditioned, TwoLevel,
    TwoLevelSetup, DENSE_K_SOLVE_MAX,
};
use helmfov::sparse::{DenseLu, SparseComplexMatrix};
use helmfov::C64;

/// Everything owned that a preconditioned solve needs; operators borrow
/// from this.
pub struct SolverContext {
    pub spec: PrecondSpec,
    pub hierarchy: Option<MeshHierarchy>,
    pub problem: HelmholtzProblem,
    pub mg: Option<MgHierarchy>,
    pub k_lu: Option<DenseLu>,
    pub two_level: Option<TwoLevelSetup>,
}

impl SolverContext {
    pub fn build(
        dim: usize,
        fine_level: u32,
        kappa2: f64,
        loss: &LossProfile,
        spec: PrecondSpec,
    ) -> Result<Self> {
        let hierarchy = if fine_level > 1 {
            Some(build_hierarchy(dim, 1, fine_level)?)
        } else {
            None
        };
        let mesh = match &hierarchy {
            Some(h) => h.level(fine_level).clone(),
            None => build_mesh(dim, fine_level)?,
        };
        let problem = assemble(&mesh, kappa2, loss)?;
        let n = problem.num_dofs();

        let needs_mg = matches!(spec, PrecondSpec::MgLaplace { .. }) || n > DENSE_K_SOLVE_MAX;
        let mg = if needs_mg {
            Some(match &hierarchy {
                Some(h) => MgHierarchy::poisson(h)?,
                None => MgHierarchy::new(vec![problem.k.clone()], vec![])?,
            })
        } else {
            None
        };
        let k_lu = if n <= DENSE_K_SOLVE_MAX {
            Some(DenseLu::factor_owned(problem.k.to_dense())?)
        } else {
            None
        };

        let two_level = match spec {
            PrecondSpec::TwoLevel { coarse_level } => Some(match &hierarchy {
                Some(h) => TwoLevelSetup::new(h, &problem, coarse_level)?,
                None => {
                    if coarse_level != fine_level {
                        bail!("fine level 1 admits only coarse level 1");
                    }
                    TwoLevelSetup {
                        coarse_level,
                        r: SparseComplexMatrix::identity(n),
                        a_h: problem.a.clone(),
                        a_h_lu: DenseLu::factor_owned(problem.a.to_dense())?,
                    }
                }
            }),
            _ => None,
        };

        Ok(Self { spec, hierarchy, problem, mg, k_lu, two_level })
    }

    /// The "exact" Poisson solver: dense LU when small, MG-CG otherwise.
    pub fn k_solver(&self) -> KSolver<'_> {
        match &self.k_lu {
            Some(lu) => KSolver::Lu(lu),
            None => KSolver::mg_cg(self.mg.as_ref().expect("mg built for large systems")),
        }
    }

    pub fn preconditioner(&self) -> Box<dyn LinearOperator + '_> {
        match self.spec {
            PrecondSpec::ExactLaplace => Box::new(ExactLaplace {
                k_solver: self.k_solver(),
                m: &self.problem.m,
            }),
            PrecondSpec::MgLaplace { cycles } => Box::new(MgLaplace {
                mg: self.mg.as_ref().expect("mg built for mg preconditioner"),
                m: &self.problem.m,
                cycles,
            }),
            PrecondSpec::TwoLevel { .. } => Box::new(TwoLevel {
                a: &self.problem.a,
                m: &self.problem.m,
                setup: self.two_level.as_ref().expect("two-level setup built"),
                k_solver: self.k_solver(),
            }),
        }
    }

    /// The preconditioned system operator A·B, for FOV sweeps.
    pub fn preconditioned_operator<'a>(
        &'a self,
        b: &'a dyn LinearOperator,
    ) -> Preconditioned<'a> {
        Preconditioned { a: &self.problem.a, b }
    }

    /// The perturbation operator A(K̃⁻ᴺ − K⁻¹)M for a given cycle count.
    pub fn perturbation(&self, cycles: usize) -> Result<PerturbationOperator<'_>> {
        let mg = self
            .mg
            .as_ref()
            .context("perturbation operator needs a multigrid hierarchy")?;
        Ok(PerturbationOperator {
            a: &self.problem.a,
            m: &self.problem.m,
            mg,
            cycles,
            k_solver: self.k_solver(),
        })
    }

    /// Right-preconditioned GMRES for the constant load f.
    pub fn solve_constant_load(
        &self,
        f_value: f64,
        tol: f64,
        max_iter: usize,
    ) -> (Vec<C64>, SolveReport) {
        let rhs = assemble_load_constant(&self.problem.mesh, f_value);
        let b = self.preconditioner();
        gmres_right(&self.problem.a, b.as_ref(), &rhs, tol, max_iter)
    }
}

/// Parse `x0,y0[,z0]:x1,y1[,z1]:value` into a box loss profile.
pub fn parse_sigma_box(s: &str) -> Result<LossProfile> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("expected x0,y0[,z0]:x1,y1[,z1]:value, got `{s}`");
    }
    let parse_point = |p: &str| -> Result<[f64; 3]> {
        let cs: Vec<f64> = p
            .split(',')
            .map(|v| v.trim().parse::<f64>().context("bad coordinate"))
            .collect::<Result<_>>()?;
        match cs.len() {
            2 => Ok([cs[0], cs[1], 0.0]),
            3 => Ok([cs[0], cs[1], cs[2]]),
            _ => bail!("corner needs 2 or 3 coordinates, got {}", cs.len()),
        }
    };
    let mut lo = parse_point(parts[0])?;
    let mut hi = parse_point(parts[1])?;
    // 2D boxes span the z axis trivially.
    if parts[0].split(',').count() == 2 {
        lo[2] = 0.0;
        hi[2] = 1.0;
    }
    let value: f64 = parts[2].trim().parse().context("bad box value")?;
    Ok(LossProfile::boxed(value, lo, hi)?)
}
