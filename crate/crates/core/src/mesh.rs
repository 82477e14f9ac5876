//! Nested uniform simplicial meshes of the unit square/cube with Dirichlet
//! boundary handling and coarse-to-fine prolongation.
//!
//! Level `l` has `n = 2^l` cells per axis and mesh size `h = 1/n`. In 2D each
//! square cell is split into two right triangles by the diagonal from the
//! cell's min corner to its max corner; in 3D each cube is split into six
//! tetrahedra by the Kuhn subdivision (all sharing the main diagonal). Only
//! interior nodes carry degrees of freedom; homogeneous Dirichlet data is
//! eliminated before assembly.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::sparse::SparseComplexMatrix;

/// Default cap on the number of interior DOFs per level.
pub const DEFAULT_DOF_CAP: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("spatial dimension must be 2 or 3, got {0}")]
    InvalidDim(usize),
    #[error("mesh level must be >= 1, got {0}")]
    InvalidLevel(u32),
    #[error("level {level} in {dim}D has {dofs} interior DOFs, exceeding the cap {cap}")]
    TooManyDofs { level: u32, dim: usize, dofs: usize, cap: usize },
    #[error("hierarchy requires 1 <= coarsest < finest, got {coarsest}..{finest}")]
    InvalidSpan { coarsest: u32, finest: u32 },
}

/// One uniformly refined mesh of `(0,1)^d`.
#[derive(Debug, Clone)]
pub struct MeshLevel {
    dim: usize,
    level: u32,
    n: usize,
    h: f64,
    /// All grid nodes, ordered lexicographically by coordinates (z = 0 in 2D).
    vertices: Vec<[f64; 3]>,
    /// Flattened element-node connectivity, `dim + 1` nodes per simplex.
    elem_nodes: Vec<usize>,
    /// Interior DOF index per node, `None` on the boundary.
    node_dof: Vec<Option<usize>>,
    /// Node index per interior DOF.
    dof_nodes: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct MeshSummary {
    pub dim: usize,
    pub level: u32,
    pub cells_per_axis: usize,
    pub h: f64,
    pub interior_dofs: usize,
    pub elements: usize,
}

impl MeshLevel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cells per axis, `2^level`.
    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elem_nodes.len() / (self.dim + 1)
    }

    pub fn node_coord(&self, node: usize) -> [f64; 3] {
        self.vertices[node]
    }

    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    pub fn dof_node(&self, dof: usize) -> usize {
        self.dof_nodes[dof]
    }

    /// Coordinates of the interior node carrying `dof`.
    pub fn dof_coord(&self, dof: usize) -> [f64; 3] {
        self.vertices[self.dof_nodes[dof]]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.elem_nodes[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.elem_nodes.chunks(self.dim + 1)
    }

    /// Signed volume of element `e` (area in 2D).
    pub fn signed_volume(&self, e: usize) -> f64 {
        let nodes = self.element(e);
        let p0 = self.vertices[nodes[0]];
        if self.dim == 2 {
            let a = sub(self.vertices[nodes[1]], p0);
            let b = sub(self.vertices[nodes[2]], p0);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        } else {
            let a = sub(self.vertices[nodes[1]], p0);
            let b = sub(self.vertices[nodes[2]], p0);
            let c = sub(self.vertices[nodes[3]], p0);
            det3(a, b, c) / 6.0
        }
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            dim: self.dim,
            level: self.level,
            cells_per_axis: self.n,
            h: self.h,
            interior_dofs: self.num_dofs(),
            elements: self.num_elements(),
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string(&self.summary()).expect("mesh summary serializes")
    }


    /// Barycentric coordinates of `p` in element `e`, ordered like the
    /// element's nodes.
    fn barycentric(&self, e: usize, p: [f64; 3]) -> [f64; 4] {
        let nodes = self.element(e);
        let p0 = self.vertices[nodes[0]];
        let d = sub(p, p0);
        if self.dim == 2 {
            let a = sub(self.vertices[nodes[1]], p0);
            let b = sub(self.vertices[nodes[2]], p0);
            let det = a[0] * b[1] - a[1] * b[0];
            let l1 = (d[0] * b[1] - d[1] * b[0]) / det;
            let l2 = (a[0] * d[1] - a[1] * d[0]) / det;
            [1.0 - l1 - l2, l1, l2, 0.0]
        } else {
            let a = sub(self.vertices[nodes[1]], p0);
            let b = sub(self.vertices[nodes[2]], p0);
            let c = sub(self.vertices[nodes[3]], p0);
            let det = det3(a, b, c);
            let l1 = det3(d, b, c) / det;
            let l2 = det3(a, d, c) / det;
            let l3 = det3(a, b, d) / det;
            [1.0 - l1 - l2 - l3, l1, l2, l3]
        }
    }

    /// Element containing `p` together with its barycentric coordinates.
    /// Points on shared faces resolve to the first matching element.
    pub fn locate(&self, p: [f64; 3]) -> (usize, [f64; 4]) {
        let cell: Vec<usize> = (0..self.dim)
            .map(|a| ((p[a] / self.h).floor() as isize).clamp(0, self.n as isize - 1) as usize)
            .collect();
        let per_cell = if self.dim == 2 { 2 } else { 6 };
        let cell_lin = if self.dim == 2 {
            cell[0] * self.n + cell[1]
        } else {
            (cell[0] * self.n + cell[1]) * self.n + cell[2]
        };
        let mut best = (0usize, [0.0; 4], f64::NEG_INFINITY);
        for e in cell_lin * per_cell..(cell_lin + 1) * per_cell {
            let lam = self.barycentric(e, p);
            let min_l = lam[..self.dim + 1].iter().cloned().fold(f64::INFINITY, f64::min);
            if min_l >= -1e-12 {
                return (e, lam);
            }
            if min_l > best.2 {
                best = (e, lam, min_l);
            }
        }
        // Roundoff can push a face point just outside every candidate; the
        // closest element is still correct to ~1e-12.
        (best.0, best.1)
    }

    /// Evaluate the FE function with interior coefficients `coeffs`
    /// (boundary values zero) at an arbitrary point of the closed domain.
    pub fn eval_fe(&self, coeffs: &[C64], p: [f64; 3]) -> C64 {
        assert_eq!(coeffs.len(), self.num_dofs(), "eval_fe: dimension mismatch");
        let (e, lam) = self.locate(p);
        let mut acc = C64::new(0.0, 0.0);
        for (v, &node) in self.element(e).iter().enumerate() {
            if let Some(dof) = self.node_dof[node] {
                acc += coeffs[dof] * lam[v];
            }
        }
        acc
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Lexicographic order of the six permutations of (0,1,2) used for the Kuhn
/// subdivision; odd permutations get their last two vertices swapped so that
/// every tetrahedron is positively oriented.
const KUHN_PERMS: [([usize; 3], bool); 6] = [
    ([0, 1, 2], true),
    ([0, 2, 1], false),
    ([1, 0, 2], false),
    ([1, 2, 0], true),
    ([2, 0, 1], true),
    ([2, 1, 0], false),
];

pub fn build_mesh(dim: usize, level: u32) -> Result<MeshLevel, MeshError> {
    build_mesh_with_cap(dim, level, DEFAULT_DOF_CAP)
}

pub fn build_mesh_with_cap(dim: usize, level: u32, cap: usize) -> Result<MeshLevel, MeshError> {
    if dim != 2 && dim != 3 {
        return Err(MeshError::InvalidDim(dim));
    }
    if level < 1 {
        return Err(MeshError::InvalidLevel(level));
    }
    let n: usize = 1usize
        .checked_shl(level)
        .filter(|&n| n.checked_pow(dim as u32).is_some())
        .ok_or(MeshError::TooManyDofs { level, dim, dofs: usize::MAX, cap })?;
    let dofs = (n - 1).pow(dim as u32);
    if dofs > cap {
        return Err(MeshError::TooManyDofs { level, dim, dofs, cap });
    }
    let h = 1.0 / n as f64;
    let stride = n + 1;

    let mut vertices = Vec::with_capacity(stride.pow(dim as u32));
    let mut node_dof = Vec::with_capacity(vertices.capacity());
    let mut dof_nodes = Vec::with_capacity(dofs);
    let mut push_node = |idx: &[usize]| {
        let interior = idx.iter().all(|&c| c > 0 && c < n);
        let coord = match idx.len() {
            2 => [idx[0] as f64 * h, idx[1] as f64 * h, 0.0],
            _ => [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h],
        };
        let node = vertices.len();
        vertices.push(coord);
        if interior {
            node_dof.push(Some(dof_nodes.len()));
            dof_nodes.push(node);
        } else {
            node_dof.push(None);
        }
    };
    if dim == 2 {
        for i in 0..=n {
            for j in 0..=n {
                push_node(&[i, j]);
            }
        }
    } else {
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    push_node(&[i, j, k]);
                }
            }
        }
    }

    let mut elem_nodes = Vec::new();
    let node2 = |i: usize, j: usize| i * stride + j;
    let node3 = |i: usize, j: usize, k: usize| (i * stride + j) * stride + k;
    if dim == 2 {
        for ci in 0..n {
            for cj in 0..n {
                let v00 = node2(ci, cj);
                let v10 = node2(ci + 1, cj);
                let v01 = node2(ci, cj + 1);
                let v11 = node2(ci + 1, cj + 1);
                elem_nodes.extend_from_slice(&[v00, v10, v11]);
                elem_nodes.extend_from_slice(&[v00, v11, v01]);
            }
        }
    } else {
        for ci in 0..n {
            for cj in 0..n {
                for ck in 0..n {
                    let corner = |o: [usize; 3]| node3(ci + o[0], cj + o[1], ck + o[2]);
                    for (perm, even) in KUHN_PERMS {
                        let mut offs = [[0usize; 3]; 4];
                        for step in 0..3 {
                            offs[step + 1] = offs[step];
                            offs[step + 1][perm[step]] += 1;
                        }
                        let mut tet =
                            [corner(offs[0]), corner(offs[1]), corner(offs[2]), corner(offs[3])];
                        if !even {
                            tet.swap(2, 3);
                        }
                        elem_nodes.extend_from_slice(&tet);
                    }
                }
            }
        }
    }

    Ok(MeshLevel { dim, level, n, h, vertices, elem_nodes, node_dof, dof_nodes })
}

/// A nested family of meshes, coarsest first, with the P1 interpolation
/// matrices between adjacent levels.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    levels: Vec<MeshLevel>,
    /// prolongations[i] maps DOFs of levels[i] to DOFs of levels[i+1].
    prolongations: Vec<SparseComplexMatrix>,
}

impl MeshHierarchy {
    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn coarsest_level(&self) -> u32 {
        self.levels[0].level()
    }

    pub fn finest_level(&self) -> u32 {
        self.levels[self.levels.len() - 1].level()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[MeshLevel] {
        &self.levels
    }

    /// Mesh at the given level number.
    pub fn level(&self, level: u32) -> &MeshLevel {
        &self.levels[self.index_of(level)]
    }

    fn index_of(&self, level: u32) -> usize {
        assert!(
            level >= self.coarsest_level() && level <= self.finest_level(),
            "level {level} outside hierarchy {}..={}",
            self.coarsest_level(),
            self.finest_level()
        );
        (level - self.coarsest_level()) as usize
    }

    /// Prolongation from `level` to `level + 1`.
    pub fn prolongation(&self, level: u32) -> &SparseComplexMatrix {
        &self.prolongations[self.index_of(level)]
    }

    /// Composite prolongation matrix from `from_level` to `to_level`.
    pub fn composite_prolongation(&self, from_level: u32, to_level: u32) -> SparseComplexMatrix {
        assert!(from_level <= to_level, "composite prolongation requires from <= to");
        let from = self.index_of(from_level);
        let to = self.index_of(to_level);
        if from == to {
            return SparseComplexMatrix::identity(self.levels[from].num_dofs());
        }
        let mut r = self.prolongations[from].clone();
        for i in from + 1..to {
            r = self.prolongations[i].matmul(&r);
        }
        r
    }

    /// Nodal values of the coarse FE function at the fine interior nodes.
    pub fn prolongate(&self, from_level: u32, to_level: u32, x: &[C64]) -> Vec<C64> {
        assert!(from_level <= to_level, "prolongate requires from <= to");
        let from = self.index_of(from_level);
        let to = self.index_of(to_level);
        assert_eq!(x.len(), self.levels[from].num_dofs(), "prolongate: dimension mismatch");
        let mut v = x.to_vec();
        for i in from..to {
            v = self.prolongations[i].mul_vec(&v);
        }
        v
    }
}

pub fn build_hierarchy(dim: usize, coarsest: u32, finest: u32) -> Result<MeshHierarchy, MeshError> {
    build_hierarchy_with_cap(dim, coarsest, finest, DEFAULT_DOF_CAP)
}

pub fn build_hierarchy_with_cap(
    dim: usize,
    coarsest: u32,
    finest: u32,
    cap: usize,
) -> Result<MeshHierarchy, MeshError> {
    if coarsest < 1 || coarsest >= finest {
        return Err(MeshError::InvalidSpan { coarsest, finest });
    }
    let levels: Vec<MeshLevel> = (coarsest..=finest)
        .map(|l| build_mesh_with_cap(dim, l, cap))
        .collect::<Result<_, _>>()?;
    let prolongations = levels
        .windows(2)
        .map(|w| prolongation_matrix(&w[0], &w[1]))
        .collect();
    Ok(MeshHierarchy { levels, prolongations })
}

/// Interpolation matrix from the coarse to the fine space: column `c` holds
/// the coarse basis function of DOF `c` sampled at the fine interior nodes.
fn prolongation_matrix(coarse: &MeshLevel, fine: &MeshLevel) -> SparseComplexMatrix {
    let mut triplets = Vec::new();
    for fdof in 0..fine.num_dofs() {
        let p = fine.dof_coord(fdof);
        let (e, lam) = coarse.locate(p);
        for (v, &node) in coarse.element(e).iter().enumerate() {
            if let Some(cdof) = coarse.node_dof(node) {
                if lam[v].abs() > 1e-14 {
                    triplets.push((fdof, cdof, C64::new(lam[v], 0.0)));
                }
            }
        }
    }
    SparseComplexMatrix::from_triplets(fine.num_dofs(), coarse.num_dofs(), &triplets)
}
