//! Time diagnostics: entry current, energy, total density and norms.
//!
//! All integrals use trapezoid weights in `v` and then in `x`, summed in
//! ascending index order.

use crate::error::{Result, SheathError};
use crate::mesh::{DistributionField, SimState};
use crate::moments::{trapezoid, trapezoid_weights};

/// Kinetic and field parts of the total energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub field: f64,
    pub total: f64,
}

/// Phase-space integrals of `f`, `|f|` and `f^2` (the last reported as its
/// square root).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub total_density: f64,
    pub l1: f64,
    pub l2: f64,
}

/// One row of the time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub entry_current: f64,
    pub energy: Energy,
    pub electrons: Norms,
    pub ions: Norms,
}

impl DiagnosticsRecord {
    pub fn from_state(state: &SimState) -> Self {
        DiagnosticsRecord {
            t: state.time,
            entry_current: entry_current(state),
            energy: total_energy(state),
            electrons: norms(&state.f_e),
            ions: norms(&state.f_i),
        }
    }
}

fn phase_integral(f: &DistributionField, g: impl Fn(f64, f64) -> f64) -> f64 {
    let wv = trapezoid_weights(&f.grid.v_mesh);
    let v: Vec<f64> = f.grid.v_mesh.nodes().collect();
    let per_x: Vec<f64> = f
        .rows()
        .map(|row| row.iter().zip(&wv).zip(&v).map(|((f, w), v)| w * g(*f, *v)).sum())
        .collect();
    trapezoid(&per_x, f.grid.x_mesh.delta)
}

pub fn kinetic_energy(f: &DistributionField) -> f64 {
    0.5 * phase_integral(f, |f, v| v * v * f)
}

pub fn field_energy(efield: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = efield.iter().map(|e| e * e).collect();
    0.5 * trapezoid(&sq, dx)
}

pub fn total_energy(state: &SimState) -> Energy {
    let kinetic = kinetic_energy(&state.f_e) + kinetic_energy(&state.f_i);
    let field = field_energy(&state.efield, state.x_mesh().delta);
    Energy { kinetic, field, total: kinetic + field }
}

pub fn norms(f: &DistributionField) -> Norms {
    Norms {
        total_density: phase_integral(f, |f, _| f),
        l1: phase_integral(f, |f, _| f.abs()),
        l2: phase_integral(f, |f, _| f * f).sqrt(),
    }
}

/// Current density `J(t, 0)`.
pub fn entry_current(state: &SimState) -> f64 {
    first_moment_row0(&state.f_i) - first_moment_row0(&state.f_e)
}

fn first_moment_row0(f: &DistributionField) -> f64 {
    let wv = trapezoid_weights(&f.grid.v_mesh);
    f.row(0).iter().zip(&wv).enumerate().map(|(j, (val, w))| w * f.grid.v_mesh.node(j) * val).sum()
}

/// `reference - state` for electrons and ions.
pub fn error_field(state: &SimState, reference: &SimState) -> Result<(DistributionField, DistributionField)> {
    let diff = |cur: &DistributionField, refr: &DistributionField| -> Result<DistributionField> {
        if cur.grid != refr.grid {
            return Err(SheathError::GridMismatch("error field needs identical grids".into()));
        }
        let values = refr.values.iter().zip(&cur.values).map(|(r, c)| r - c).collect();
        Ok(DistributionField { grid: cur.grid, values })
    };
    Ok((diff(&state.f_e, &reference.f_e)?, diff(&state.f_i, &reference.f_i)?))
}

/// Node `(i, j)` and value of the largest `|f|`.
pub fn argmax_abs(f: &DistributionField) -> (usize, usize, f64) {
    let s = f.stride();
    let (k, v) = f
        .values
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bk, bv), (k, v)| if v.abs() > bv { (k, v.abs()) } else { (bk, bv) });
    (k / s, k % s, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_phase_grid, sample_function};

    fn state(f_e: impl Fn(f64, f64) -> f64, f_i: impl Fn(f64, f64) -> f64, e: f64) -> SimState {
        let ge = make_phase_grid(8, 10, -2.0, 3.0).unwrap();
        let gi = make_phase_grid(8, 6, 0.0, 1.0).unwrap();
        SimState::new(sample_function(&ge, f_e).unwrap(), sample_function(&gi, f_i).unwrap(), vec![e; 9], 0.0)
            .unwrap()
    }

    #[test]
    fn field_only_energy() {
        let s = state(|_, _| 0.0, |_, _| 0.0, 3.0);
        let en = total_energy(&s);
        assert_eq!(en.kinetic, 0.0);
        assert!((en.total - 4.5).abs() < 1e-14);
    }

    #[test]
    fn single_node_energy_uses_cell_weights() {
        let mut s = state(|_, _| 0.0, |_, _| 0.0, 0.0);
        // interior x node, interior v node: weight dx * dv
        s.f_i.set(3, 2, 1.0);
        let (dx, dv) = (1.0 / 8.0, 1.0 / 6.0);
        let v = s.f_i.grid.v_mesh.node(2);
        assert!((total_energy(&s).kinetic - 0.5 * v * v * dx * dv).abs() < 1e-16);
        // boundary node in x: half weight
        s.f_i.set(3, 2, 0.0);
        s.f_i.set(0, 2, 1.0);
        assert!((total_energy(&s).kinetic - 0.25 * v * v * dx * dv).abs() < 1e-16);
    }

    #[test]
    fn unit_box_norms() {
        let s = state(|_, _| 0.0, |_, _| 1.0, 0.0);
        let n = norms(&s.f_i);
        for q in [n.total_density, n.l1, n.l2] {
            assert!((q - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_cell_raises_l1_above_density() {
        let mut s = state(|_, _| 0.0, |_, _| 1.0, 0.0);
        s.f_i.set(4, 3, -2.0);
        let n = norms(&s.f_i);
        assert!(n.l1 > n.total_density);
        let pos = norms(&state(|x, v| (x + v).exp(), |_, _| 0.0, 0.0).f_e);
        assert!((pos.l1 - pos.total_density).abs() <= 1e-12 * pos.l1);
    }

    #[test]
    fn entry_current_cases() {
        let same = |x: f64, v: f64| (1.0 + x) * (v - 0.2).powi(2);
        let mut s = state(same, same, 0.0);
        // identical grids needed for f_i = f_e
        s.f_i = s.f_e.clone();
        assert_eq!(entry_current(&s), 0.0);

        // odd in v: mirrored data flips the sign
        let g = make_phase_grid(8, 10, -2.0, 2.0).unwrap();
        let f = |x: f64, v: f64| (1.0 + x) * (v + 1.0).exp();
        let flip = |x: f64, v: f64| (1.0 + x) * (-v + 1.0).exp();
        let zero = sample_function(&g, |_, _| 0.0).unwrap();
        let a = SimState::new(zero.clone(), sample_function(&g, f).unwrap(), vec![0.0; 9], 0.0).unwrap();
        let b = SimState::new(zero, sample_function(&g, flip).unwrap(), vec![0.0; 9], 0.0).unwrap();
        assert!((entry_current(&a) + entry_current(&b)).abs() < 1e-13);
        assert!(entry_current(&a) > 0.0);
    }

    #[test]
    fn error_field_is_zero_on_self_and_linear() {
        let s = state(|x, v| x * v, |x, v| x + v, 1.0);
        let (de, di) = error_field(&s, &s).unwrap();
        assert!(de.values.iter().chain(&di.values).all(|v| *v == 0.0));

        let mut p = s.clone();
        p.f_i.set(7, 1, p.f_i.get(7, 1) - 0.5);
        let (_, di) = error_field(&p, &s).unwrap();
        assert_eq!(argmax_abs(&di), (7, 1, 0.5));
        let mut p2 = s.clone();
        p2.f_i.set(7, 1, p2.f_i.get(7, 1) - 1.0);
        let (_, di2) = error_field(&p2, &s).unwrap();
        assert_eq!(di2.get(7, 1), 2.0 * di.get(7, 1));
    }

    #[test]
    fn error_field_rejects_grid_mismatch() {
        let s = state(|_, _| 0.0, |_, _| 0.0, 0.0);
        let mut t = s.clone();
        std::mem::swap(&mut t.f_e, &mut t.f_i);
        assert!(error_field(&s, &t).is_err());
    }
}
