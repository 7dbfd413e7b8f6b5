//! Axisymmetric (r, z) tensor-product mesh for the device.
//!
//! `z` runs upward from the bottom of the substrate; `r = 0` is the gate
//! axis. Every layer interface, the gate bottom and the gate flank radius
//! are node planes, so material properties are constant inside each cell.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceSpec, LayerRole};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinementSpec {
    /// Largest spacing allowed inside the well (axially), under the gate
    /// (radially, r <= 2 gate radii) and at the gate bottom.
    pub min_spacing_nm: f64,
    /// Geometric growth of the spacing away from the refined zones.
    pub growth_ratio: f64,
    pub max_spacing_nm: f64,
    pub max_nodes: usize,
}

impl Default for RefinementSpec {
    fn default() -> Self {
        Self {
            min_spacing_nm: 1.0,
            growth_ratio: 1.15,
            max_spacing_nm: 25.0,
            max_nodes: 400_000,
        }
    }
}

impl RefinementSpec {
    pub fn with_min_spacing(mut self, h: f64) -> Self {
        self.min_spacing_nm = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_spacing_nm > 0.0) {
            return Err(Error::Config("min_spacing_nm must be positive".into()));
        }
        if !(self.growth_ratio >= 1.0) {
            return Err(Error::Config("growth_ratio must be >= 1".into()));
        }
        if !(self.max_spacing_nm >= self.min_spacing_nm) {
            return Err(Error::Config(
                "max_spacing_nm must be >= min_spacing_nm".into(),
            ));
        }
        Ok(())
    }
}

/// What occupies a mesh cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Layer(LayerRole),
    Vacuum,
    Gate,
}

/// How a node enters the Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Free,
    /// Dirichlet at the gate potential.
    Gate,
    /// Dirichlet at 0 V (grounded substrate).
    Substrate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub radial_nodes: Vec<f64>,
    pub axial_nodes: Vec<f64>,
    /// Relative permittivity per cell, `cell_index(i, j)`.
    pub cell_permittivity: Vec<f64>,
    pub cell_region: Vec<Region>,
    pub refinement: RefinementSpec,
    pub device: DeviceSpec,
    pub substrate_top_plane: usize,
    pub well_bottom_plane: usize,
    pub well_top_plane: usize,
    pub gate_bottom_plane: usize,
    pub gate_radius_index: usize,
}

impl Mesh {
    pub fn nr(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn nz(&self) -> usize {
        self.axial_nodes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nr() * self.nz()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nr() + i
    }

    #[inline]
    pub fn node_coords(&self, n: usize) -> (usize, usize) {
        (n % self.nr(), n / self.nr())
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * (self.nr() - 1) + i
    }

    pub fn node_kind(&self, i: usize, j: usize) -> NodeKind {
        if j <= self.substrate_top_plane {
            NodeKind::Substrate
        } else if j >= self.gate_bottom_plane && i <= self.gate_radius_index {
            NodeKind::Gate
        } else {
            NodeKind::Free
        }
    }

    /// Semiconductor layer a node belongs to for band-edge purposes. Nodes on
    /// the well boundary planes count as well nodes; gate and vacuum nodes
    /// have none.
    pub fn node_layer(&self, i: usize, j: usize) -> Option<LayerRole> {
        if j <= self.substrate_top_plane {
            Some(LayerRole::Substrate)
        } else if j < self.well_bottom_plane {
            Some(LayerRole::Buffer)
        } else if j <= self.well_top_plane {
            Some(LayerRole::QuantumWell)
        } else if j < self.gate_bottom_plane
            || (j == self.gate_bottom_plane && i > self.gate_radius_index)
        {
            Some(LayerRole::GateDielectric)
        } else {
            None
        }
    }

    pub fn well_midplane_z(&self) -> f64 {
        0.5 * (self.axial_nodes[self.well_bottom_plane] + self.axial_nodes[self.well_top_plane])
    }
}

/// Spacing target: `min` inside the refined set, growing geometrically with
/// distance from it, capped at `max`.
fn target_spacing(distance: f64, spec: &RefinementSpec) -> f64 {
    (spec.min_spacing_nm + (spec.growth_ratio - 1.0) * distance).min(spec.max_spacing_nm)
}

/// Nodes for `[a, b]` (both included) equidistributed against `h(x)`.
fn segment_nodes(a: f64, b: f64, h: &dyn Fn(f64) -> f64) -> Vec<f64> {
    const SAMPLES: usize = 4096;
    let dx = (b - a) / SAMPLES as f64;
    let mut cumulative = Vec::with_capacity(SAMPLES + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    let mut prev = 1.0 / h(a);
    for k in 1..=SAMPLES {
        let cur = 1.0 / h(a + k as f64 * dx);
        acc += 0.5 * (prev + cur) * dx;
        cumulative.push(acc);
        prev = cur;
    }
    let cells = ((acc - 1e-9).ceil() as usize).max(1);
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(a);
    let mut s = 0;
    for k in 1..cells {
        let target = acc * k as f64 / cells as f64;
        while cumulative[s + 1] < target {
            s += 1;
        }
        let frac = (target - cumulative[s]) / (cumulative[s + 1] - cumulative[s]);
        nodes.push(a + (s as f64 + frac) * dx);
    }
    nodes.push(b);
    nodes
}

fn join_segments(breaks: &[f64], h: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let mut nodes = vec![breaks[0]];
    for w in breaks.windows(2) {
        let seg = segment_nodes(w[0], w[1], h);
        nodes.extend_from_slice(&seg[1..]);
    }
    nodes
}

/// Builds the axisymmetric simulation mesh.
pub fn generate_mesh(spec: &DeviceSpec, refinement: &RefinementSpec) -> Result<Mesh> {
    spec.validate()?;
    refinement.validate()?;

    // Axial breakpoints, bottom to top.
    let t = |role| spec.layer(role).thickness_nm;
    let z_sub_top = t(LayerRole::Substrate);
    let z_well_bot = z_sub_top + t(LayerRole::Buffer);
    let z_well_top = z_well_bot + t(LayerRole::QuantumWell);
    let z_gate = z_well_top + t(LayerRole::GateDielectric);
    let z_top = z_gate + spec.gate.height_nm;

    let axial_distance = |z: f64| {
        let to_well = if z < z_well_bot {
            z_well_bot - z
        } else if z > z_well_top {
            z - z_well_top
        } else {
            0.0
        };
        to_well.min((z - z_gate).abs())
    };
    let hz = |z: f64| target_spacing(axial_distance(z), refinement);
    // The substrate is a grounded conductor; a single cell spans it.
    let mut axial = vec![0.0];
    axial.extend(join_segments(
        &[z_sub_top, z_well_bot, z_well_top, z_gate, z_top],
        &hz,
    ));

    let r_gate = spec.gate.radius_nm;
    let r_max = spec.mesa_radius_nm;
    let r_fine = (2.0 * r_gate).min(r_max);
    let hr = |r: f64| target_spacing((r - r_fine).max(0.0), refinement);
    let mut breaks = vec![0.0, r_gate];
    if r_fine > r_gate {
        breaks.push(r_fine);
    }
    if r_max > r_fine {
        breaks.push(r_max);
    }
    let radial = join_segments(&breaks, &hr);

    let required = radial.len() * axial.len();
    if required > refinement.max_nodes {
        return Err(Error::Resource {
            required,
            limit: refinement.max_nodes,
        });
    }

    let plane = |nodes: &[f64], x: f64| {
        nodes
            .iter()
            .position(|&v| v == x)
            .expect("breakpoints are node planes")
    };
    let substrate_top_plane = plane(&axial, z_sub_top);
    let well_bottom_plane = plane(&axial, z_well_bot);
    let well_top_plane = plane(&axial, z_well_top);
    let gate_bottom_plane = plane(&axial, z_gate);
    let gate_radius_index = plane(&radial, r_gate);

    let (nr, nz) = (radial.len(), axial.len());
    let mut cell_region = Vec::with_capacity((nr - 1) * (nz - 1));
    let mut cell_permittivity = Vec::with_capacity((nr - 1) * (nz - 1));
    for j in 0..nz - 1 {
        for i in 0..nr - 1 {
            let region = if j < substrate_top_plane {
                Region::Layer(LayerRole::Substrate)
            } else if j < well_bottom_plane {
                Region::Layer(LayerRole::Buffer)
            } else if j < well_top_plane {
                Region::Layer(LayerRole::QuantumWell)
            } else if j < gate_bottom_plane {
                Region::Layer(LayerRole::GateDielectric)
            } else if i < gate_radius_index {
                Region::Gate
            } else {
                Region::Vacuum
            };
            let eps = match region {
                Region::Layer(role) => spec.material(role).dielectric_constant,
                Region::Vacuum | Region::Gate => 1.0,
            };
            cell_region.push(region);
            cell_permittivity.push(eps);
        }
    }

    Ok(Mesh {
        radial_nodes: radial,
        axial_nodes: axial,
        cell_permittivity,
        cell_region,
        refinement: refinement.clone(),
        device: spec.clone(),
        substrate_top_plane,
        well_bottom_plane,
        well_top_plane,
        gate_bottom_plane,
        gate_radius_index,
    })
}
