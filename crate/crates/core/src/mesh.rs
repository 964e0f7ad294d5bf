//! Uniform meshes, per-species phase grids and the dense field containers.
//!
//! Storage layout: every [`DistributionField`] is row-major with `x` as the
//! slow index, so `values[i * (nv + 1) + j]` holds `f(x_i, v_j)` and the
//! velocity row at a fixed `x_i` is contiguous. Space advection gathers
//! strided columns (fixed `j`); velocity advection works on contiguous rows.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SheathError};

/// Dimensionless physical constants and the shape of the ion inflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Electron to ion mass ratio.
    pub mu: f64,
    /// Debye length.
    pub eps: f64,
    /// Charge density at the entrance.
    pub rho0: f64,
    /// Low-velocity cutoff of the ion inflow, `min(1, v^2 / eta)`.
    pub eta: f64,
    /// Thermal width of the ion inflow.
    pub sigma: f64,
    /// Drift velocity of the ion inflow.
    pub drift: f64,
}

impl Default for PhysicalParams {
    /// Deuterium sheath test case.
    fn default() -> Self {
        PhysicalParams {
            mu: 1.0 / 3672.0,
            eps: 0.01,
            rho0: 0.0,
            eta: 0.1,
            sigma: 0.5,
            drift: 1.5,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("mu", self.mu),
            ("eps", self.eps),
            ("eta", self.eta),
            ("sigma", self.sigma),
        ];
        for (name, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SheathError::Parameter(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.rho0.is_finite() || !self.drift.is_finite() {
            return Err(SheathError::Parameter("rho0 and drift must be finite".into()));
        }
        Ok(())
    }
}

/// Uniform vertex-centred mesh of `n_cells + 1` nodes on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    pub lo: f64,
    pub hi: f64,
    pub n_cells: usize,
    pub delta: f64,
}

impl Mesh1D {
    pub fn new(lo: f64, hi: f64, n_cells: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(SheathError::Config(format!("invalid mesh bounds [{lo}, {hi}]")));
        }
        if n_cells < 2 {
            return Err(SheathError::Config(format!("mesh needs at least 2 cells, got {n_cells}")));
        }
        Ok(Mesh1D { lo, hi, n_cells, delta: (hi - lo) / n_cells as f64 })
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.delta
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.node(i))
    }
}

/// Phase-space grid for one species: `x` in `[0, 1]` and a species-specific
/// velocity range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    pub x_mesh: Mesh1D,
    pub v_mesh: Mesh1D,
}

impl PhaseGrid {
    #[inline]
    pub fn nx(&self) -> usize {
        self.x_mesh.n_cells
    }

    #[inline]
    pub fn nv(&self) -> usize {
        self.v_mesh.n_cells
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x_mesh.n_nodes() * self.v_mesh.n_nodes()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn make_phase_grid(nx: usize, nv: usize, v_lo: f64, v_hi: f64) -> Result<PhaseGrid> {
    Ok(PhaseGrid {
        x_mesh: Mesh1D::new(0.0, 1.0, nx)?,
        v_mesh: Mesh1D::new(v_lo, v_hi, nv)?,
    })
}

/// Nodal values of one species' distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(grid: PhaseGrid) -> Self {
        DistributionField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SheathError::GridMismatch(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.x_mesh.n_nodes(),
                grid.v_mesh.n_nodes(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let nvp = grid.v_mesh.n_nodes();
            return Err(SheathError::Init { i: k / nvp, j: k % nvp, msg: "non-finite value".into() });
        }
        Ok(DistributionField { grid, values })
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.grid.v_mesh.n_nodes()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.stride() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.stride();
        self.values[i * s + j] = value;
    }

    /// Velocity row at `x_i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.values[i * s..(i + 1) * s]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.stride())
    }

    /// First non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        let s = self.stride();
        self.values.iter().position(|v| !v.is_finite()).map(|k| (k / s, k % s))
    }
}

/// Sample `func(x_i, v_j)` on every node of `grid`.
pub fn sample_function<F>(grid: &PhaseGrid, func: F) -> Result<DistributionField>
where
    F: Fn(f64, f64) -> f64,
{
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.x_mesh.n_nodes() {
        let x = grid.x_mesh.node(i);
        for j in 0..grid.v_mesh.n_nodes() {
            let value = func(x, grid.v_mesh.node(j));
            if !value.is_finite() {
                return Err(SheathError::Init { i, j, msg: format!("sample is {value} at (x={x}, v={})", grid.v_mesh.node(j)) });
            }
            values.push(value);
        }
    }
    Ok(DistributionField { grid: *grid, values })
}

/// Full state of the time-dependent problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub f_e: DistributionField,
    pub f_i: DistributionField,
    /// Electric field at `x_i`.
    pub efield: Vec<f64>,
    pub time: f64,
    /// Number of completed time steps.
    pub step: u64,
}

impl SimState {
    pub fn new(f_e: DistributionField, f_i: DistributionField, efield: Vec<f64>, time: f64) -> Result<Self> {
        if f_e.grid.x_mesh != f_i.grid.x_mesh {
            return Err(SheathError::GridMismatch("electron and ion x-meshes differ".into()));
        }
        if efield.len() != f_e.grid.x_mesh.n_nodes() {
            return Err(SheathError::GridMismatch(format!(
                "electric field has {} nodes, x-mesh has {}",
                efield.len(),
                f_e.grid.x_mesh.n_nodes()
            )));
        }
        Ok(SimState { f_e, f_i, efield, time, step: 0 })
    }

    pub fn x_mesh(&self) -> Mesh1D {
        self.f_e.grid.x_mesh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_spacing() {
        let g = make_phase_grid(4, 4, -1.0, 1.0).unwrap();
        assert_eq!(g.x_mesh.delta, 0.25);
        assert_eq!(g.v_mesh.delta, 0.5);
        assert_eq!(g.v_mesh.node(2), 0.0);
        assert_eq!(g.x_mesh.node(4), 1.0);
    }

    #[test]
    fn paper_grids() {
        let e = make_phase_grid(2048, 4096, -200.0, 500.0).unwrap();
        assert_eq!(e.len(), 2049 * 4097);
        assert!((e.v_mesh.delta - 700.0 / 4096.0).abs() < 1e-15);
        let i = make_phase_grid(2048, 4096, -5.0, 5.0).unwrap();
        assert_eq!(i.v_mesh.node(2048), 0.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(make_phase_grid(1, 4, -1.0, 1.0).is_err());
        assert!(make_phase_grid(4, 1, -1.0, 1.0).is_err());
        assert!(make_phase_grid(4, 4, 1.0, 1.0).is_err());
        assert!(make_phase_grid(4, 4, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn node_round_trip() {
        let m = Mesh1D::new(0.0, 1.0, 1 << 20).unwrap();
        for i in (0..=(1usize << 20)).step_by(97).chain([1 << 20]) {
            assert_eq!(((m.node(i) - m.lo) / m.delta).round() as usize, i);
        }
        let m = Mesh1D::new(-200.0, 500.0, 4096).unwrap();
        for i in 0..=4096 {
            assert_eq!(((m.node(i) - m.lo) / m.delta).round() as usize, i);
        }
    }

    #[test]
    fn sampling() {
        let g = make_phase_grid(2, 2, -1.0, 1.0).unwrap();
        let ones = sample_function(&g, |_, _| 1.0).unwrap();
        assert!(ones.values.iter().all(|&v| v == 1.0));

        let f = sample_function(&g, |_, v| v).unwrap();
        for i in 0..3 {
            assert_eq!(f.row(i), &[-1.0, 0.0, 1.0]);
        }
        assert_eq!(f, sample_function(&g, |_, v| v).unwrap());
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let g = make_phase_grid(2, 2, -1.0, 1.0).unwrap();
        let err = sample_function(&g, |x, v| if x == 0.5 && v == 1.0 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            SheathError::Init { i, j, .. } => assert_eq!((i, j), (1, 2)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn state_requires_matching_meshes() {
        let ge = make_phase_grid(4, 8, -10.0, 10.0).unwrap();
        let gi = make_phase_grid(4, 6, -1.0, 1.0).unwrap();
        let gbad = make_phase_grid(5, 6, -1.0, 1.0).unwrap();
        let fe = DistributionField::zeros(ge);
        assert!(SimState::new(fe.clone(), DistributionField::zeros(gi), vec![0.0; 5], 0.0).is_ok());
        assert!(SimState::new(fe.clone(), DistributionField::zeros(gbad), vec![0.0; 5], 0.0).is_err());
        assert!(SimState::new(fe, DistributionField::zeros(gi), vec![0.0; 4], 0.0).is_err());
    }
}
