use std::f64::consts::PI;

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::constants::CODATA;
use crate::device::LayerRole;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodeKind, Region};

use super::charge::ChargeState;

const NOT_UNKNOWN: usize = usize::MAX;

/// Geometry of the box scheme: edge conductances and control volumes.
///
/// Conductances are `ε_r · face area / edge length` in nm, with the face
/// split between the two cells it crosses (arithmetic, area-weighted). Every
/// edge lies inside a single material row or column, so no averaging across
/// an interface happens along an edge. Volumes are in nm³ and include the
/// 2π azimuthal factor.
#[derive(Debug, Clone)]
pub struct FvOperator {
    /// (node a, node b, conductance); at least one endpoint is free.
    pub edges: Vec<(usize, usize, f64)>,
    pub volume: Vec<f64>,
    /// Part of each control volume inside the quantum well.
    pub well_volume: Vec<f64>,
    pub kind: Vec<NodeKind>,
    /// Free nodes in unknown order.
    pub unknowns: Vec<usize>,
    unknown_of: Vec<usize>,
}

impl FvOperator {
    pub fn new(mesh: &Mesh) -> Self {
        let (nr, nz) = (mesh.nr(), mesh.nz());
        let r = &mesh.radial_nodes;
        let z = &mesh.axial_nodes;
        let eps = |i: usize, j: usize| mesh.cell_permittivity[mesh.cell_index(i, j)];
        let is_well = |i: usize, j: usize| {
            mesh.cell_region[mesh.cell_index(i, j)] == Region::Layer(LayerRole::QuantumWell)
        };

        let r_lo = |i: usize| if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
        let r_hi = |i: usize| {
            if i + 1 == nr {
                r[i]
            } else {
                0.5 * (r[i] + r[i + 1])
            }
        };
        let area_left = |i: usize| PI * (r[i] * r[i] - r_lo(i).powi(2));
        let area_right = |i: usize| PI * (r_hi(i).powi(2) - r[i] * r[i]);

        let n_nodes = nr * nz;
        let mut kind = Vec::with_capacity(n_nodes);
        let mut volume = vec![0.0; n_nodes];
        let mut well_volume = vec![0.0; n_nodes];
        for j in 0..nz {
            let below = if j > 0 { 0.5 * (z[j] - z[j - 1]) } else { 0.0 };
            let above = if j + 1 < nz {
                0.5 * (z[j + 1] - z[j])
            } else {
                0.0
            };
            for i in 0..nr {
                let n = mesh.node_index(i, j);
                kind.push(mesh.node_kind(i, j));
                let quadrants = [
                    (
                        i > 0 && j > 0,
                        i.wrapping_sub(1),
                        j.wrapping_sub(1),
                        area_left(i) * below,
                    ),
                    (
                        i + 1 < nr && j > 0,
                        i,
                        j.wrapping_sub(1),
                        area_right(i) * below,
                    ),
                    (
                        i > 0 && j + 1 < nz,
                        i.wrapping_sub(1),
                        j,
                        area_left(i) * above,
                    ),
                    (i + 1 < nr && j + 1 < nz, i, j, area_right(i) * above),
                ];
                for (exists, ci, cj, vol) in quadrants {
                    if exists {
                        volume[n] += vol;
                        if is_well(ci, cj) {
                            well_volume[n] += vol;
                        }
                    }
                }
            }
        }

        let mut edges = Vec::with_capacity(2 * n_nodes);
        let mut push = |a: usize, b: usize, g: f64| {
            if kind[a] == NodeKind::Free || kind[b] == NodeKind::Free {
                edges.push((a, b, g));
            }
        };
        for j in 0..nz {
            let below = if j > 0 { 0.5 * (z[j] - z[j - 1]) } else { 0.0 };
            let above = if j + 1 < nz {
                0.5 * (z[j + 1] - z[j])
            } else {
                0.0
            };
            for i in 0..nr {
                let n = mesh.node_index(i, j);
                if i + 1 < nr {
                    let mut face = 0.0;
                    if j > 0 {
                        face += eps(i, j - 1) * below;
                    }
                    if j + 1 < nz {
                        face += eps(i, j) * above;
                    }
                    let g = 2.0 * PI * 0.5 * (r[i] + r[i + 1]) * face / (r[i + 1] - r[i]);
                    push(n, mesh.node_index(i + 1, j), g);
                }
                if j + 1 < nz {
                    let mut face = 0.0;
                    if i > 0 {
                        face += eps(i - 1, j) * area_left(i);
                    }
                    if i + 1 < nr {
                        face += eps(i, j) * area_right(i);
                    }
                    let g = face / (z[j + 1] - z[j]);
                    push(n, mesh.node_index(i, j + 1), g);
                }
            }
        }

        let mut unknowns = Vec::new();
        let mut unknown_of = vec![NOT_UNKNOWN; n_nodes];
        for (n, k) in kind.iter().enumerate() {
            if *k == NodeKind::Free {
                unknown_of[n] = unknowns.len();
                unknowns.push(n);
            }
        }

        Self {
            edges,
            volume,
            well_volume,
            kind,
            unknowns,
            unknown_of,
        }
    }

    pub fn unknown_index(&self, node: usize) -> Option<usize> {
        let u = self.unknown_of[node];
        (u != NOT_UNKNOWN).then_some(u)
    }

    /// Net outward flux `Σ g (V_n − V_nb)` for every node.
    pub fn flux_out(&self, potential: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; potential.len()];
        for &(a, b, g) in &self.edges {
            let f = g * (potential[a] - potential[b]);
            out[a] += f;
            out[b] -= f;
        }
        out
    }

    /// Triplets of the free-node block plus the index of each diagonal.
    pub(crate) fn free_block(&self) -> Result<(SparseColMat<usize, f64>, Vec<usize>)> {
        let m = self.unknowns.len();
        if m == 0 {
            return Err(Error::Assembly("mesh has no free nodes".into()));
        }
        if self.kind.iter().all(|k| *k == NodeKind::Free) {
            return Err(Error::Assembly(
                "no Dirichlet boundary; operator is singular".into(),
            ));
        }
        let mut diag = vec![0.0; m];
        let mut triplets = Vec::with_capacity(2 * self.edges.len() + m);
        for &(a, b, g) in &self.edges {
            match (self.unknown_index(a), self.unknown_index(b)) {
                (Some(ua), Some(ub)) => {
                    diag[ua] += g;
                    diag[ub] += g;
                    triplets.push(Triplet::new(ua, ub, -g));
                    triplets.push(Triplet::new(ub, ua, -g));
                }
                (Some(ua), None) => diag[ua] += g,
                (None, Some(ub)) => diag[ub] += g,
                (None, None) => {}
            }
        }
        if let Some(u) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Assembly(format!(
                "isolated node {}",
                self.unknowns[u]
            )));
        }
        for (u, d) in diag.into_iter().enumerate() {
            triplets.push(Triplet::new(u, u, d));
        }
        let mat = SparseColMat::try_new_from_triplets(m, m, &triplets)
            .map_err(|e| Error::Assembly(format!("{e:?}")))?;
        let diag_pos = (0..m)
            .map(|c| {
                let start = mat.col_ptr()[c];
                let rows = mat.row_idx_of_col_raw(c);
                start + rows.iter().position(|&r| r == c).expect("diagonal present")
            })
            .collect();
        Ok((mat, diag_pos))
    }
}

/// Linear Poisson problem on the free nodes with fixed charge.
pub struct LinearProblem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// Potential on every node; Dirichlet entries are final, free entries 0.
    pub boundary: Vec<f64>,
    pub operator: FvOperator,
}

/// Assembles `−∇·(ε∇V) = ρ/ε₀` for fixed charge: Dirichlet `V = bias (+ gate
/// offset)` on the gate and `V = 0` on the substrate, zero normal
/// displacement elsewhere.
pub fn assemble_system(mesh: &Mesh, bias: f64, charge: &ChargeState) -> Result<LinearProblem> {
    if !bias.is_finite() {
        return Err(Error::Contract("bias must be finite".into()));
    }
    if charge.net_volume_charge.len() != mesh.node_count() {
        return Err(Error::Contract("charge vector does not match mesh".into()));
    }
    let operator = FvOperator::new(mesh);
    let (matrix, _) = operator.free_block()?;
    let gate_v = bias + mesh.device.gate.offset_v;
    let boundary: Vec<f64> = operator
        .kind
        .iter()
        .map(|k| if *k == NodeKind::Gate { gate_v } else { 0.0 })
        .collect();
    let k = CODATA.charge_to_flux();
    let mut rhs: Vec<f64> = operator
        .unknowns
        .iter()
        .map(|&n| {
            // C/m³ -> e/nm³
            let rho = charge.net_volume_charge[n] / CODATA.elementary_charge * 1e-27;
            k * rho * operator.volume[n]
        })
        .collect();
    for &(a, b, g) in &operator.edges {
        match (operator.unknown_index(a), operator.unknown_index(b)) {
            (Some(ua), None) => rhs[ua] += g * boundary[b],
            (None, Some(ub)) => rhs[ub] += g * boundary[a],
            _ => {}
        }
    }
    Ok(LinearProblem {
        matrix,
        rhs,
        boundary,
        operator,
    })
}

impl LinearProblem {
    /// Direct sparse Cholesky solve; returns the potential on every node.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let x = solve_spd(&self.matrix, &self.rhs)?;
        let mut v = self.boundary.clone();
        for (u, &n) in self.operator.unknowns.iter().enumerate() {
            v[n] = x[u];
        }
        Ok(v)
    }
}

pub(crate) fn solve_spd(matrix: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let symbolic = SymbolicLlt::try_new(matrix.symbolic(), Side::Lower)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    solve_with_symbolic(&symbolic, matrix, rhs)
}

pub(crate) fn solve_with_symbolic(
    symbolic: &SymbolicLlt<usize>,
    matrix: &SparseColMat<usize, f64>,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let llt = Llt::try_new_with_symbolic(symbolic.clone(), matrix.as_ref(), Side::Lower)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = llt.solve(&b);
    Ok((0..rhs.len()).map(|i| x[(i, 0)]).collect())
}
