use std::sync::Arc;

use faer::sparse::linalg::solvers::SymbolicLlt;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::Side;
use serde::{Deserialize, Serialize};

use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodeKind};

use super::charge::{charge_density_with, ChargeState, WellStatistics};
use super::operator::{solve_with_symbolic, FvOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relative residual at which the Newton iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Optional C¹ rounding of the density kink at the band edges, eV.
    /// Zero keeps the exact zero-temperature densities; the line search
    /// handles the kink.
    pub smoothing_width_ev: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            smoothing_width_ev: 0.0,
        }
    }
}

/// Potential and band edges for one gate bias.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub mesh: Arc<Mesh>,
    /// V per node.
    pub potential: Vec<f64>,
    /// E_c − E_F per node in eV; NaN on gate and vacuum nodes.
    pub conduction_band_edge: Vec<f64>,
    pub valence_band_edge: Vec<f64>,
    pub gate_bias: f64,
    pub converged: bool,
    /// Final relative residual.
    pub residual_norm: f64,
    pub newton_iterations: usize,
    /// Relative residual before each step and after the last.
    pub residual_history: Vec<f64>,
    pub smoothing_width_ev: f64,
}

/// Charge on each conductor and in the semiconductor, in units of e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussBalance {
    pub gate_charge: f64,
    pub substrate_charge: f64,
    pub semiconductor_charge: f64,
    /// |gate + substrate + semiconductor| over the largest magnitude.
    pub relative_imbalance: f64,
}

impl PotentialField {
    /// Exact zero-temperature carrier densities for this field.
    pub fn charge_state(&self) -> ChargeState {
        let op = FvOperator::new(&self.mesh);
        charge_density_with(
            &self.mesh,
            &op,
            &self.conduction_band_edge,
            &self.valence_band_edge,
        )
        .expect("solver band edges are defined on the well")
    }

    /// E_c − E_F at the well midplane, meV, one value per radial node.
    pub fn midplane_conduction_edge_mev(&self) -> Vec<f64> {
        let m = &self.mesh;
        let zm = m.well_midplane_z();
        let z = &m.axial_nodes;
        let j = (m.well_bottom_plane..m.well_top_plane)
            .find(|&j| z[j] <= zm && zm <= z[j + 1])
            .expect("midplane lies inside the well");
        let t = (zm - z[j]) / (z[j + 1] - z[j]);
        (0..m.nr())
            .map(|i| {
                let lo = self.conduction_band_edge[m.node_index(i, j)];
                let hi = self.conduction_band_edge[m.node_index(i, j + 1)];
                1e3 * (lo + t * (hi - lo))
            })
            .collect()
    }

    /// Minimum over r of the midplane conduction edge, meV.
    pub fn min_conduction_edge_mev(&self) -> f64 {
        self.midplane_conduction_edge_mev()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Discrete Gauss's law: conductor charges from the boundary fluxes and
    /// the semiconductor charge from the statistics the solve used.
    pub fn gauss_balance(&self) -> GaussBalance {
        let op = FvOperator::new(&self.mesh);
        let stats = WellStatistics::new(&self.mesh.device, self.smoothing_width_ev);
        let k = CODATA.charge_to_flux();
        let flux = op.flux_out(&self.potential);
        let (mut gate, mut sub, mut semi) = (0.0, 0.0, 0.0);
        for (n, kind) in op.kind.iter().enumerate() {
            match kind {
                NodeKind::Gate => gate += flux[n] / k,
                NodeKind::Substrate => sub += flux[n] / k,
                NodeKind::Free => {
                    if op.well_volume[n] > 0.0 {
                        semi += op.well_volume[n] * stats.charge(self.potential[n]).0;
                    }
                }
            }
        }
        // Below a milli-electron the charges are round-off.
        let scale = gate.abs().max(sub.abs()).max(semi.abs()).max(1e-3);
        let relative_imbalance = (gate + sub + semi).abs() / scale;
        GaussBalance {
            gate_charge: gate,
            substrate_charge: sub,
            semiconductor_charge: semi,
            relative_imbalance,
        }
    }

    /// Electrons in the well from the Thomas–Fermi density, integrated over
    /// the mesa disk.
    pub fn electron_count(&self) -> f64 {
        let cs = self.charge_state();
        let r = &self.mesh.radial_nodes;
        let nr = r.len();
        (0..nr)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
                let hi = if i + 1 == nr {
                    r[i]
                } else {
                    0.5 * (r[i] + r[i + 1])
                };
                std::f64::consts::PI * (hi * hi - lo * lo) * cs.electron_sheet_density[i] * 1e-14
            })
            .sum()
    }
}

/// Damped Newton solver bound to one mesh; the sparsity pattern and its
/// symbolic Cholesky factorization are shared by every solve.
pub struct PoissonSolver {
    mesh: Arc<Mesh>,
    op: FvOperator,
    stats: WellStatistics,
    options: SolverOptions,
    pattern: SymbolicSparseColMat<usize>,
    base_values: Vec<f64>,
    diag_pos: Vec<usize>,
    symbolic: SymbolicLlt<usize>,
}

impl PoissonSolver {
    pub fn new(mesh: Arc<Mesh>, options: SolverOptions) -> Result<Self> {
        let op = FvOperator::new(&mesh);
        let (mat, diag_pos) = op.free_block()?;
        let symbolic = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let stats = WellStatistics::new(&mesh.device, options.smoothing_width_ev);
        let (pattern, base_values) = mat.into_parts();
        Ok(Self {
            mesh,
            op,
            stats,
            options,
            pattern,
            base_values,
            diag_pos,
            symbolic,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    fn gate_potential(&self, bias: f64) -> f64 {
        bias + self.mesh.device.gate.offset_v
    }

    /// Residual on free nodes: `Σ g (V − V_nb) − (e/ε₀) Q(V)`.
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let k = CODATA.charge_to_flux();
        let flux = self.op.flux_out(v);
        self.op
            .unknowns
            .iter()
            .map(|&n| {
                let wv = self.op.well_volume[n];
                let q = if wv > 0.0 {
                    wv * self.stats.charge(v[n]).0
                } else {
                    0.0
                };
                flux[n] - k * q
            })
            .collect()
    }

    /// Normalization of the residual: the Dirichlet drive plus the fixed
    /// acceptor charge.
    fn residual_scale(&self, v: &[f64]) -> f64 {
        let k = CODATA.charge_to_flux();
        let mut drive = vec![0.0; self.op.unknowns.len()];
        for &(a, b, g) in &self.op.edges {
            match (self.op.unknown_index(a), self.op.unknown_index(b)) {
                (Some(ua), None) => drive[ua] += g * v[b],
                (None, Some(ub)) => drive[ub] += g * v[a],
                _ => {}
            }
        }
        let na = self.stats.acceptor_volume_density;
        let fixed: f64 = self
            .op
            .unknowns
            .iter()
            .map(|&n| (k * na * self.op.well_volume[n]).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = norm(&drive) + fixed;
        if scale > 0.0 {
            scale
        } else {
            1.0
        }
    }

    fn jacobian(&self, v: &[f64]) -> SparseColMat<usize, f64> {
        let k = CODATA.charge_to_flux();
        let mut values = self.base_values.clone();
        for (u, &n) in self.op.unknowns.iter().enumerate() {
            let wv = self.op.well_volume[n];
            if wv > 0.0 {
                values[self.diag_pos[u]] -= k * wv * self.stats.charge(v[n]).1;
            }
        }
        SparseColMat::new(self.pattern.clone(), values)
    }

    /// Solves at `bias`, starting from `initial_guess` when given.
    pub fn solve(
        &self,
        bias: f64,
        initial_guess: Option<&PotentialField>,
    ) -> Result<PotentialField> {
        if !bias.is_finite() {
            return Err(Error::Contract("bias must be finite".into()));
        }
        let gate_v = self.gate_potential(bias);
        let mut v: Vec<f64> = match initial_guess {
            Some(g) if Arc::ptr_eq(&g.mesh, &self.mesh) || *g.mesh == *self.mesh => {
                g.potential.clone()
            }
            Some(_) => {
                return Err(Error::Contract(
                    "initial guess lives on a different mesh".into(),
                ))
            }
            None => vec![0.0; self.mesh.node_count()],
        };
        for (n, kind) in self.op.kind.iter().enumerate() {
            match kind {
                NodeKind::Gate => v[n] = gate_v,
                NodeKind::Substrate => v[n] = 0.0,
                NodeKind::Free => {}
            }
        }

        let scale = self.residual_scale(&v);
        let mut f = self.residual(&v);
        let mut rel = norm(&f) / scale;
        let mut history = vec![rel];
        let mut iterations = 0;
        while rel > self.options.tolerance && iterations < self.options.max_iterations {
            let jac = self.jacobian(&v);
            let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
            let step = solve_with_symbolic(&self.symbolic, &jac, &neg_f)?;
            // Backtrack until the residual norm decreases.
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha >= 1.0 / 1_048_576.0 {
                let mut trial = v.clone();
                for (u, &n) in self.op.unknowns.iter().enumerate() {
                    trial[n] += alpha * step[u];
                }
                let f_trial = self.residual(&trial);
                let rel_trial = norm(&f_trial) / scale;
                if rel_trial < (1.0 - 1e-4 * alpha) * rel || rel_trial <= self.options.tolerance {
                    accepted = Some((trial, f_trial, rel_trial));
                    break;
                }
                alpha *= 0.5;
            }
            iterations += 1;
            match accepted {
                Some((trial, f_trial, rel_trial)) => {
                    v = trial;
                    f = f_trial;
                    rel = rel_trial;
                    history.push(rel);
                }
                // stagnated at round-off level
                None => break,
            }
        }

        Ok(self.field_from_potential(v, bias, rel, iterations, history))
    }

    fn field_from_potential(
        &self,
        v: Vec<f64>,
        bias: f64,
        rel: f64,
        iterations: usize,
        history: Vec<f64>,
    ) -> PotentialField {
        let m = &self.mesh;
        let shift = m.device.fermi_shift_ev();
        let mut ec = vec![f64::NAN; m.node_count()];
        let mut ev = vec![f64::NAN; m.node_count()];
        for j in 0..m.nz() {
            for i in 0..m.nr() {
                if let Some(role) = m.node_layer(i, j) {
                    let mat = m.device.material(role);
                    let n = m.node_index(i, j);
                    ec[n] = mat.conduction_band_offset_ev + shift - v[n];
                    ev[n] = ec[n] - mat.bandgap_ev;
                }
            }
        }
        PotentialField {
            mesh: Arc::clone(&self.mesh),
            potential: v,
            conduction_band_edge: ec,
            valence_band_edge: ev,
            gate_bias: bias,
            converged: rel <= self.options.tolerance,
            residual_norm: rel,
            newton_iterations: iterations,
            residual_history: history,
            smoothing_width_ev: self.options.smoothing_width_ev,
        }
    }
}

/// One-shot solve; builds a [`PoissonSolver`] for `mesh`.
pub fn newton_solve(
    mesh: &Arc<Mesh>,
    bias: f64,
    initial_guess: Option<&PotentialField>,
    options: &SolverOptions,
) -> Result<PotentialField> {
    PoissonSolver::new(Arc::clone(mesh), options.clone())?.solve(bias, initial_guess)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
