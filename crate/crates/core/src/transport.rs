//! Split advection operators and the Strang time loop.
//!
//! One step is `U(dt/2) . T(dt) . U(dt/2)`:
//!
//! * `T` shifts every velocity column in `x` by `v_j tau` with centred
//!   Lagrange interpolation of degree `2d + 1`, reading ghost values from
//!   [`crate::boundary`], then advances `E` with a Crank-Nicolson Ampere step
//!   using the current before and after the shift.
//! * `U` shifts every spatial row in `v` by the local acceleration, `E` for
//!   ions and `-E / mu` for electrons, periodically in velocity.
//!
//! Rows and columns are independent within a sub-step and run on the rayon
//! pool; no reduction crosses threads, so results do not depend on the
//! thread count.

use rayon::prelude::*;

use crate::boundary::{check_stencil_reach, extended_value, InflowCache};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Result, SheathError};
use crate::interp::{periodic_lagrange_shift, shift_row_into, LagrangeStencil, PeriodicSplineSolver, ShiftSplit, SplineCoeffs};
use crate::equilibrium::{eval_equilibrium_electron, eval_equilibrium_ion, EquilibriumSolution};
use crate::mesh::{sample_function, DistributionField, PhaseGrid, PhysicalParams, SimState};
use crate::moments::{ampere_update, initial_field_for_state, moment_current};

/// Interpolation used for the velocity advection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityScheme {
    PeriodicSpline,
    Lagrange,
}

impl std::str::FromStr for VelocityScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spline" | "periodic-spline" => Ok(VelocityScheme::PeriodicSpline),
            "lagrange" => Ok(VelocityScheme::Lagrange),
            other => Err(format!("unknown velocity scheme '{other}' (expected spline or lagrange)")),
        }
    }
}

impl std::fmt::Display for VelocityScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VelocityScheme::PeriodicSpline => "spline",
            VelocityScheme::Lagrange => "lagrange",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitConfig {
    /// Lagrange half-width: interpolation degree is `2d + 1`.
    pub d: usize,
    pub v_scheme: VelocityScheme,
    pub dt: f64,
    pub t_final: f64,
    /// Keep `E` fixed instead of advancing it with the Ampere equation.
    pub freeze_field: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { d: 8, v_scheme: VelocityScheme::PeriodicSpline, dt: 1e-5, t_final: 8.03478, freeze_field: false }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SheathError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(SheathError::Config(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_final`.
    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }
}

/// Which interior step indices produce snapshots and checkpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cadence {
    pub dt: f64,
    pub snapshot_interval: Option<f64>,
    pub checkpoint_interval: Option<f64>,
}

impl Cadence {
    pub fn none(dt: f64) -> Self {
        Cadence { dt, snapshot_interval: None, checkpoint_interval: None }
    }

    // multiples k * interval mapped to the nearest step index
    fn hits(interval: Option<f64>, dt: f64, step: u64) -> bool {
        match interval {
            Some(iv) if iv > 0.0 => {
                let k = (step as f64 * dt / iv).round();
                (k * iv / dt).round() as u64 == step
            }
            _ => false,
        }
    }

    pub fn is_snapshot(&self, step: u64) -> bool {
        Self::hits(self.snapshot_interval, self.dt, step)
    }

    pub fn is_checkpoint(&self, step: u64) -> bool {
        step > 0 && Self::hits(self.checkpoint_interval, self.dt, step)
    }
}

/// Receives the outputs of [`Stepper::run`].
pub trait RunSinks {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()>;

    fn snapshot(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }

    fn checkpoint(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }
}

/// Collects records in memory.
#[derive(Default, Debug)]
pub struct RecordBuffer {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<SimState>,
}

impl RunSinks for RecordBuffer {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.records.push(*record);
        Ok(())
    }

    fn snapshot(&mut self, state: &SimState) -> Result<()> {
        self.snapshots.push(state.clone());
        Ok(())
    }
}

/// Time integrator for one problem setup.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub cfg: SplitConfig,
    pub params: PhysicalParams,
    pub inflow: InflowCache,
    spline_e: Option<PeriodicSplineSolver>,
    spline_i: Option<PeriodicSplineSolver>,
}

impl Stepper {
    pub fn new(cfg: SplitConfig, params: PhysicalParams, inflow: InflowCache, template: &SimState) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        check_stencil_reach(template.f_e.grid.nx(), cfg.d)?;
        if inflow.electrons.len() != template.f_e.grid.v_mesh.n_nodes()
            || inflow.ions.len() != template.f_i.grid.v_mesh.n_nodes()
        {
            return Err(SheathError::GridMismatch("inflow trace does not match the velocity meshes".into()));
        }
        let (spline_e, spline_i) = match cfg.v_scheme {
            VelocityScheme::PeriodicSpline => (
                Some(PeriodicSplineSolver::new(template.f_e.grid.nv())?),
                Some(PeriodicSplineSolver::new(template.f_i.grid.nv())?),
            ),
            VelocityScheme::Lagrange => (None, None),
        };
        Ok(Stepper { cfg, params, inflow, spline_e, spline_i })
    }

    /// Space transport `T` over `tau`, followed by the Ampere update.
    pub fn advect_x(&self, state: &mut SimState, tau: f64) -> Result<()> {
        let j_old = moment_current(&state.f_i, &state.f_e)?;
        state.f_e = shift_in_x(&state.f_e, tau, self.cfg.d, &self.inflow.electrons)?;
        state.f_i = shift_in_x(&state.f_i, tau, self.cfg.d, &self.inflow.ions)?;
        if !self.cfg.freeze_field {
            let j_new = moment_current(&state.f_i, &state.f_e)?;
            ampere_update(&mut state.efield, &j_old, &j_new, tau, &self.params);
        }
        Ok(())
    }

    /// Velocity transport `U` over `tau`; `E` is unchanged.
    pub fn advect_v(&self, state: &mut SimState, tau: f64) {
        let inv_mu = 1.0 / self.params.mu;
        let efield = &state.efield;
        let scheme = self.cfg.v_scheme;
        let d = self.cfg.d;
        // foot of v_j is v_j - a tau, a the acceleration: ions E, electrons -E / mu
        shift_in_v(&mut state.f_i, efield, 1.0 * tau, scheme, d, self.spline_i.as_ref());
        shift_in_v(&mut state.f_e, efield, -inv_mu * tau, scheme, d, self.spline_e.as_ref());
    }

    pub fn strang_step(&self, state: &mut SimState) -> Result<()> {
        let dt = self.cfg.dt;
        self.advect_v(state, 0.5 * dt);
        self.advect_x(state, dt)?;
        self.advect_v(state, 0.5 * dt);
        state.step += 1;
        state.time = state.step as f64 * dt;
        check_finite(state)
    }

    /// Steps from `state` to `t_final`, reporting a record for the starting
    /// state and after every step.
    pub fn run(&self, state: SimState, cadence: &Cadence, sinks: &mut dyn RunSinks) -> Result<SimState> {
        sinks.record(&DiagnosticsRecord::from_state(&state))?;
        if cadence.is_snapshot(state.step) {
            sinks.snapshot(&state)?;
        }
        self.resume(state, cadence, sinks)
    }

    /// Continues from a checkpointed state; outputs for the starting step
    /// were already produced by the interrupted run.
    pub fn resume(&self, mut state: SimState, cadence: &Cadence, sinks: &mut dyn RunSinks) -> Result<SimState> {
        let n_steps = self.cfg.n_steps();
        while state.step < n_steps {
            self.strang_step(&mut state)?;
            sinks.record(&DiagnosticsRecord::from_state(&state))?;
            if cadence.is_snapshot(state.step) {
                sinks.snapshot(&state)?;
            }
            if cadence.is_checkpoint(state.step) {
                sinks.checkpoint(&state)?;
            }
        }
        Ok(state)
    }
}

/// Samples the stationary distributions on the phase grids, freezes their
/// entrance trace and computes the matching initial field.
pub fn initial_state(
    eq: &EquilibriumSolution,
    grid_e: &PhaseGrid,
    grid_i: &PhaseGrid,
    d: usize,
) -> Result<(SimState, InflowCache)> {
    let p = &eq.params;
    if grid_e.x_mesh != grid_i.x_mesh {
        return Err(SheathError::GridMismatch("electron and ion grids must share the x-mesh".into()));
    }
    check_stencil_reach(grid_e.nx(), d)?;
    let f_e = sample_function(grid_e, |x, v| eval_equilibrium_electron(x, v, eq, p))?;
    let f_i = sample_function(grid_i, |x, v| eval_equilibrium_ion(x, v, eq, p))?;
    let nodes = grid_e.x_mesh.n_nodes();
    let mut state = SimState::new(f_e, f_i, vec![0.0; nodes], 0.0)?;
    let inflow = InflowCache::from_initial(&state);
    state.efield = initial_field_for_state(&state, &inflow, p, eq.phi_w, d)?;
    Ok((state, inflow))
}

fn check_finite(state: &SimState) -> Result<()> {
    if let Some((i, j)) = state.f_e.find_non_finite() {
        return Err(SheathError::NonFinite { field: "f_e", step: state.step, i, j });
    }
    if let Some((i, j)) = state.f_i.find_non_finite() {
        return Err(SheathError::NonFinite { field: "f_i", step: state.step, i, j });
    }
    if let Some(i) = state.efield.iter().position(|e| !e.is_finite()) {
        return Err(SheathError::NonFinite { field: "E", step: state.step, i, j: 0 });
    }
    Ok(())
}

/// Shifts each velocity column of `f` by `v_j tau / dx` cells.
pub fn shift_in_x(f: &DistributionField, tau: f64, d: usize, inflow: &[f64]) -> Result<DistributionField> {
    let nxp = f.grid.x_mesh.n_nodes();
    let nvp = f.grid.v_mesh.n_nodes();
    let dx = f.grid.x_mesh.delta;
    let columns: Vec<Vec<f64>> = (0..nvp)
        .into_par_iter()
        .map(|j| {
            let shift = f.grid.v_mesh.node(j) * tau / dx;
            let split = ShiftSplit::new(shift);
            let stencil = LagrangeStencil::new(d, split.alpha);
            let column: Vec<f64> = (0..nxp).map(|i| f.get(i, j)).collect();
            let mut out = vec![0.0; nxp];
            shift_row_into(&column, split, &stencil, |i| extended_value(f, i, j, inflow), &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; f.values.len()];
    for (j, column) in columns.iter().enumerate() {
        for (i, v) in column.iter().enumerate() {
            values[i * nvp + j] = *v;
        }
    }
    Ok(DistributionField { grid: f.grid, values })
}

/// Shifts row `i` of `f` by `accel_tau * E_i / dv` cells, periodically over
/// the `nv` distinct nodes; node `nv` mirrors node 0.
pub fn shift_in_v(
    f: &mut DistributionField,
    efield: &[f64],
    accel_tau: f64,
    scheme: VelocityScheme,
    d: usize,
    spline: Option<&PeriodicSplineSolver>,
) {
    let nv = f.grid.nv();
    let stride = f.stride();
    let dv = f.grid.v_mesh.delta;
    let half_width = 0.5 * (f.grid.v_mesh.hi - f.grid.v_mesh.lo);
    let too_far = efield.iter().any(|e| (accel_tau * e).abs() > half_width);
    if too_far {
        log::warn!("velocity shift exceeds half the velocity domain; periodic wrap-around is unphysical");
    }
    f.values.par_chunks_mut(stride).zip(efield.par_iter()).for_each(|(row, &e)| {
        let shift = accel_tau * e / dv;
        if shift == 0.0 {
            return;
        }
        let mut out = vec![0.0; nv];
        match (scheme, spline) {
            (VelocityScheme::PeriodicSpline, Some(solver)) => {
                let mut coeffs = row[..nv].to_vec();
                solver.solve_in_place(&mut coeffs);
                SplineCoeffs { coeffs }.eval_shifted_into(shift, &mut out);
            }
            _ => periodic_lagrange_shift(&row[..nv], shift, d, &mut out),
        }
        row[..nv].copy_from_slice(&out);
        row[nv] = row[0];
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_phase_grid, sample_function};

    fn state(nx: usize, nv: usize, f: impl Fn(f64, f64) -> f64 + Copy, e: impl Fn(f64) -> f64) -> SimState {
        let ge = make_phase_grid(nx, nv, -4.0, 4.0).unwrap();
        let gi = make_phase_grid(nx, nv, -2.0, 2.0).unwrap();
        let efield = (0..=nx).map(|i| e(i as f64 / nx as f64)).collect();
        SimState::new(sample_function(&ge, f).unwrap(), sample_function(&gi, f).unwrap(), efield, 0.0).unwrap()
    }

    fn stepper(s: &SimState, d: usize, dt: f64, scheme: VelocityScheme) -> Stepper {
        let cfg = SplitConfig { d, v_scheme: scheme, dt, t_final: 0.0, freeze_field: false };
        let params = PhysicalParams { mu: 0.25, eps: 1.0, ..Default::default() };
        Stepper::new(cfg, params, InflowCache::from_initial(s), s).unwrap()
    }

    fn bump(x: f64, v: f64) -> f64 {
        (-((x - 0.5) / 0.1).powi(2) - v * v).exp()
    }

    #[test]
    fn zero_velocity_row_is_untouched() {
        let s0 = state(32, 16, |x, v| x * x + v, |_| 0.0);
        let st = stepper(&s0, 3, 0.01, VelocityScheme::PeriodicSpline);
        let mut s = s0.clone();
        st.advect_x(&mut s, 0.013).unwrap();
        let j0 = 8; // v = 0 on both grids
        for i in 0..=32 {
            assert_eq!(s.f_e.get(i, j0), s0.f_e.get(i, j0));
            assert_eq!(s.f_i.get(i, j0), s0.f_i.get(i, j0));
        }
    }

    #[test]
    fn zero_tau_is_identity() {
        let s0 = state(16, 16, bump, |x| x);
        let st = stepper(&s0, 2, 0.01, VelocityScheme::PeriodicSpline);
        let mut s = s0.clone();
        st.advect_x(&mut s, 0.0).unwrap();
        assert_eq!(s, s0);
        st.advect_v(&mut s, 0.0);
        assert_eq!(s, s0);
    }

    #[test]
    fn zero_field_velocity_step_is_identity() {
        let s0 = state(16, 16, bump, |_| 0.0);
        let st = stepper(&s0, 2, 0.01, VelocityScheme::PeriodicSpline);
        let mut s = s0.clone();
        st.advect_v(&mut s, 0.3);
        assert_eq!(s, s0);
    }

    #[test]
    fn integer_velocity_shift_rotates_columns() {
        // E tau / dv = 2 cells for ions; electrons move -2 / mu = -8 cells
        let nv = 32;
        let s0 = state(8, nv, |x, v| (1.0 + x) * (v * 1.3).sin(), |_| 0.25);
        let st = stepper(&s0, 2, 0.01, VelocityScheme::Lagrange);
        let mut s = s0.clone();
        let tau = 2.0 * s0.f_i.grid.v_mesh.delta / 0.25;
        st.advect_v(&mut s, tau);
        for i in 0..=8 {
            for j in 0..nv {
                assert_eq!(s.f_i.get(i, j), s0.f_i.get(i, (j + nv - 2) % nv));
            }
            let mass_before: f64 = s0.f_i.row(i)[..nv].iter().sum();
            let mass_after: f64 = s.f_i.row(i)[..nv].iter().sum();
            assert!((mass_before - mass_after).abs() < 1e-13);
        }
        // electrons: -E tau / (mu dv_e) = -4 cells (1/mu larger, dv_e = 2 dv_i, opposite sign)
        for j in 0..nv {
            assert_eq!(s.f_e.get(3, j), s0.f_e.get(3, (j + 4) % nv));
        }
    }

    #[test]
    fn free_streaming_of_polynomials_is_exact_inside() {
        let d = 2;
        let poly = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(5);
        let s0 = state(64, 8, move |x, _| poly(x), |_| 0.0);
        let st = stepper(&s0, d, 0.01, VelocityScheme::PeriodicSpline);
        let mut s = s0.clone();
        let tau = 0.0137;
        st.advect_x(&mut s, tau).unwrap();
        let g = s.f_i.grid;
        for j in 0..=8 {
            let v = g.v_mesh.node(j);
            // skip nodes whose stencil touches ghosts
            let reach = ((v * tau).abs() / g.x_mesh.delta).ceil() as usize + d + 1;
            for i in reach..=(64 - reach) {
                let x = g.x_mesh.node(i);
                assert!((s.f_i.get(i, j) - poly(x - v * tau)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn strang_without_field_is_pure_streaming() {
        let s0 = state(32, 16, |x, v| bump(x, v) * (v * v + 0.1), |_| 0.0);
        let mut st = stepper(&s0, 3, 0.01, VelocityScheme::PeriodicSpline);
        st.cfg.freeze_field = true;
        let mut a = s0.clone();
        st.strang_step(&mut a).unwrap();
        let mut b = s0.clone();
        st.advect_x(&mut b, 0.01).unwrap();
        assert_eq!(a.f_e, b.f_e);
        assert_eq!(a.f_i, b.f_i);
        assert_eq!(a.step, 1);
    }

    #[test]
    fn run_counts_steps_and_records() {
        let s0 = state(16, 16, bump, |_| 0.1);
        let mut st = stepper(&s0, 1, 0.01, VelocityScheme::PeriodicSpline);
        let mut sink = RecordBuffer::default();
        let out = st.run(s0.clone(), &Cadence::none(0.01), &mut sink).unwrap();
        assert_eq!(sink.records.len(), 1);
        assert_eq!(out, s0);

        st.cfg.t_final = 0.03;
        let mut sink = RecordBuffer::default();
        let out = st.run(s0, &Cadence::none(0.01), &mut sink).unwrap();
        assert_eq!(sink.records.len(), 4);
        assert_eq!(out.step, 3);
        assert_eq!(out.time, 3.0 * 0.01);
    }

    #[test]
    fn non_finite_aborts() {
        let mut s0 = state(16, 16, bump, |_| 0.0);
        s0.f_i.set(5, 3, f64::NAN);
        let mut st = stepper(&s0, 1, 0.01, VelocityScheme::PeriodicSpline);
        // with a live field the NaN would reach f_e through the current
        st.cfg.freeze_field = true;
        let err = st.strang_step(&mut s0).unwrap_err();
        assert!(matches!(err, SheathError::NonFinite { field: "f_i", step: 1, .. }), "{err}");
    }

    #[test]
    fn cadence_hits_multiples() {
        let c = Cadence { dt: 1e-4, snapshot_interval: Some(0.01), checkpoint_interval: Some(0.05) };
        let snaps: Vec<u64> = (0..=5000).filter(|&s| c.is_snapshot(s)).collect();
        assert_eq!(snaps.len(), 51);
        assert_eq!(snaps[1], 100);
        let checks: Vec<u64> = (0..=5000).filter(|&s| c.is_checkpoint(s)).collect();
        assert_eq!(checks, (1..=10).map(|k| k * 500).collect::<Vec<_>>());
    }

    #[test]
    fn coarse_grid_rejected_for_high_degree() {
        let s0 = state(8, 16, bump, |_| 0.0);
        let cfg = SplitConfig { d: 8, ..Default::default() };
        assert!(Stepper::new(cfg, PhysicalParams::default(), InflowCache::from_initial(&s0), &s0).is_err());
    }
}
