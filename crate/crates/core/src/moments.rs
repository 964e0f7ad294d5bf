//! Velocity moments, the initial electric field and the Ampere update.

use crate::boundary::{extended_value, InflowCache};
use crate::error::{Result, SheathError};
use crate::interp::lagrange_weights;
use crate::mesh::{DistributionField, Mesh1D, PhysicalParams, SimState};
use crate::quadrature::gauss_legendre;

/// Trapezoid weights on the nodes of `mesh`.
pub fn trapezoid_weights(mesh: &Mesh1D) -> Vec<f64> {
    let mut w = vec![mesh.delta; mesh.n_nodes()];
    w[0] *= 0.5;
    w[mesh.n_cells] *= 0.5;
    w
}

/// Trapezoid integral of nodal values with spacing `delta`.
pub fn trapezoid(values: &[f64], delta: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    delta * (0.5 * values[0] + inner + 0.5 * values[n - 1])
}

/// Per-species density and signed first moment.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub density: Vec<f64>,
    pub current: Vec<f64>,
}

pub fn moment_density(f: &DistributionField) -> Vec<f64> {
    let dv = f.grid.v_mesh.delta;
    f.rows().map(|row| trapezoid(row, dv)).collect()
}

/// `int v f dv` at every x-node.
pub fn first_moment(f: &DistributionField) -> Vec<f64> {
    let w: Vec<f64> = trapezoid_weights(&f.grid.v_mesh)
        .iter()
        .enumerate()
        .map(|(j, w)| w * f.grid.v_mesh.node(j))
        .collect();
    f.rows().map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum()).collect()
}

pub fn species_moments(f: &DistributionField) -> MomentVector {
    MomentVector { density: moment_density(f), current: first_moment(f) }
}

/// `J = int v (f_i - f_e) dv`, each species on its own velocity mesh.
pub fn moment_current(f_i: &DistributionField, f_e: &DistributionField) -> Result<Vec<f64>> {
    if f_i.grid.x_mesh != f_e.grid.x_mesh {
        return Err(SheathError::GridMismatch("current needs a shared x-mesh".into()));
    }
    let ji = first_moment(f_i);
    let je = first_moment(f_e);
    Ok(ji.iter().zip(&je).map(|(a, b)| a - b).collect())
}

/// Nodal profile on `0..=n` extended by `pad` ghost nodes on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedProfile {
    pub values: Vec<f64>,
    pub pad: usize,
}

impl PaddedProfile {
    pub fn from_fn(n: usize, pad: usize, f: impl Fn(isize) -> f64) -> Self {
        let p = pad as isize;
        PaddedProfile { values: (-p..=n as isize + p).map(f).collect(), pad }
    }

    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        self.values[(i + self.pad as isize) as usize]
    }

    /// Number of cells of the underlying mesh.
    pub fn n_cells(&self) -> usize {
        self.values.len() - 2 * self.pad - 1
    }
}

/// Density including ghost nodes, integrating ghost distribution values with
/// the same trapezoid rule as interior rows.
pub fn padded_density(f: &DistributionField, inflow: &[f64], pad: usize) -> Result<PaddedProfile> {
    let nx = f.grid.nx() as isize;
    let nvp = f.grid.v_mesh.n_nodes();
    let dv = f.grid.v_mesh.delta;
    let p = pad as isize;
    let mut values = Vec::with_capacity(f.grid.nx() + 1 + 2 * pad);
    let mut row = vec![0.0; nvp];
    for i in -p..=nx + p {
        if (0..=nx).contains(&i) {
            values.push(trapezoid(f.row(i as usize), dv));
        } else {
            for (j, r) in row.iter_mut().enumerate() {
                *r = extended_value(f, i, j, inflow)?;
            }
            values.push(trapezoid(&row, dv));
        }
    }
    Ok(PaddedProfile { values, pad })
}

/// `n_h(x) = sum_k n[i + k] L_k(alpha)` for `x = x_i + alpha dx`.
pub fn reconstruct_density(n: &PaddedProfile, x: f64, d: usize) -> f64 {
    let cells = n.n_cells();
    let pos = x * cells as f64;
    let i = (pos.floor().max(0.0) as usize).min(cells - 1);
    let alpha = pos - i as f64;
    let w = lagrange_weights(d, alpha);
    let di = d as isize;
    (-di..=di + 1).zip(&w).map(|(k, w)| n.at(i as isize + k) * w).sum()
}

/// Piecewise Lagrange reconstruction of `(n_i - n_e) / eps^2` with its exact
/// primitive, giving the initial field `E = P - phi_w - int_0^1 P`.
#[derive(Clone, Debug)]
pub struct FieldReconstruction {
    pub charge: PaddedProfile,
    pub d: usize,
    pub phi_w: f64,
    /// `P(x_i)` at every node.
    pub primitive: Vec<f64>,
    pub mean_primitive: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl FieldReconstruction {
    pub fn new(n_i: &PaddedProfile, n_e: &PaddedProfile, eps: f64, phi_w: f64, d: usize) -> Result<Self> {
        if n_i.values.len() != n_e.values.len() || n_i.pad != n_e.pad {
            return Err(SheathError::GridMismatch("ion and electron density profiles differ".into()));
        }
        if n_i.pad < d + 1 {
            return Err(SheathError::Config(format!("density profile needs {} ghost nodes, has {}", d + 1, n_i.pad)));
        }
        let inv = 1.0 / (eps * eps);
        let charge = PaddedProfile {
            values: n_i.values.iter().zip(&n_e.values).map(|(a, b)| (a - b) * inv).collect(),
            pad: n_i.pad,
        };
        let nx = charge.n_cells();
        let dx = 1.0 / nx as f64;

        // exact moments of the elementary polynomials over one cell
        let (gx, gw) = gauss_legendre(d + 2);
        let width = 2 * d + 2;
        let mut cell_weight = vec![0.0; width];
        let mut mean_weight = vec![0.0; width];
        for (x, w) in gx.iter().zip(&gw) {
            let s = 0.5 * (x + 1.0);
            let l = lagrange_weights(d, s);
            for k in 0..width {
                cell_weight[k] += 0.5 * w * l[k];
                mean_weight[k] += 0.5 * w * (1.0 - s) * l[k];
            }
        }

        let di = d as isize;
        let stencil_sum = |i: usize, weights: &[f64]| -> f64 {
            (-di..=di + 1).zip(weights).map(|(k, w)| charge.at(i as isize + k) * w).sum()
        };
        let mut primitive = vec![0.0; nx + 1];
        let mut mean_primitive = 0.0;
        for i in 0..nx {
            primitive[i + 1] = primitive[i] + dx * stencil_sum(i, &cell_weight);
            mean_primitive += dx * (primitive[i] + dx * stencil_sum(i, &mean_weight));
        }
        Ok(FieldReconstruction { charge, d, phi_w, primitive, mean_primitive, gl_nodes: gx, gl_weights: gw })
    }

    pub fn n_cells(&self) -> usize {
        self.primitive.len() - 1
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let nx = self.n_cells();
        let pos = x * nx as f64;
        let i = (pos.floor().max(0.0) as usize).min(nx - 1);
        (i, pos - i as f64)
    }

    /// Reconstructed `(n_i - n_e) / eps^2` at `x`.
    pub fn charge_at(&self, x: f64) -> f64 {
        reconstruct_density(&self.charge, x, self.d)
    }

    /// Exact `int_0^x` of the reconstructed charge.
    pub fn primitive_at(&self, x: f64) -> f64 {
        let (i, alpha) = self.locate(x);
        if alpha == 0.0 {
            return self.primitive[i];
        }
        let dx = 1.0 / self.n_cells() as f64;
        let di = self.d as isize;
        let mut partial = 0.0;
        for (gx, gw) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let s = 0.5 * alpha * (gx + 1.0);
            let l = lagrange_weights(self.d, s);
            let value: f64 = (-di..=di + 1).zip(&l).map(|(k, w)| self.charge.at(i as isize + k) * w).sum();
            partial += 0.5 * alpha * gw * value;
        }
        self.primitive[i] + dx * partial
    }

    pub fn field_at(&self, x: f64) -> f64 {
        self.primitive_at(x) - self.phi_w - self.mean_primitive
    }

    pub fn nodal_field(&self) -> Vec<f64> {
        self.primitive.iter().map(|p| p - self.phi_w - self.mean_primitive).collect()
    }
}

pub fn init_electric_field(
    n_i: &PaddedProfile,
    n_e: &PaddedProfile,
    p: &PhysicalParams,
    phi_w: f64,
    d: usize,
) -> Result<Vec<f64>> {
    Ok(FieldReconstruction::new(n_i, n_e, p.eps, phi_w, d)?.nodal_field())
}

/// Initial field of `state` from its discrete densities and the frozen
/// inflow trace used for the entrance ghosts.
pub fn initial_field_for_state(
    state: &SimState,
    inflow: &InflowCache,
    p: &PhysicalParams,
    phi_w: f64,
    d: usize,
) -> Result<Vec<f64>> {
    let n_i = padded_density(&state.f_i, &inflow.ions, d + 1)?;
    let n_e = padded_density(&state.f_e, &inflow.electrons, d + 1)?;
    init_electric_field(&n_i, &n_e, p, phi_w, d)
}

/// Crank-Nicolson step of `eps^2 dE/dt = -J`.
pub fn ampere_update(efield: &mut [f64], j_old: &[f64], j_new: &[f64], tau: f64, p: &PhysicalParams) {
    let scale = tau / (p.eps * p.eps);
    for ((e, a), b) in efield.iter_mut().zip(j_old).zip(j_new) {
        *e -= scale * 0.5 * (a + b);
    }
}
