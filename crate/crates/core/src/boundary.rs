//! Fictitious values of the distribution outside `[0, 1]`.
//!
//! Entry (`x < 0`): incoming velocities (`v >= 0`) take the frozen inflow
//! trace, outgoing ones are extended by imparity about `f(0, v)`.
//! Wall (`x > 1`): outgoing velocities (`v >= 0`) use the same odd
//! ("butterfly") extension about `f(1, v)`; incoming ones are zero since the
//! wall absorbs everything and emits nothing.

use crate::error::{Result, SheathError};
use crate::mesh::{DistributionField, SimState};

/// Entrance trace `f_s(0, 0, v_j)` of both species at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InflowCache {
    pub electrons: Vec<f64>,
    pub ions: Vec<f64>,
}

impl InflowCache {
    /// Freezes row `x = 0` of the initial state. Entries for `v_j < 0` are
    /// never read and are stored as zero.
    pub fn from_initial(state: &SimState) -> Self {
        InflowCache { electrons: entrance_trace(&state.f_e), ions: entrance_trace(&state.f_i) }
    }
}

fn entrance_trace(f: &DistributionField) -> Vec<f64> {
    let v = &f.grid.v_mesh;
    f.row(0).iter().enumerate().map(|(j, &val)| if v.node(j) >= 0.0 { val } else { 0.0 }).collect()
}

fn reflected(f: &DistributionField, mirror: usize, i: isize) -> Result<usize> {
    let r = 2 * mirror as isize - i;
    if r < 0 || r > f.grid.nx() as isize {
        return Err(SheathError::Config(format!(
            "stencil reaches index {i}, whose mirror {r} lies outside the {}-cell x-mesh; refine the grid or lower d",
            f.grid.nx()
        )));
    }
    Ok(r as usize)
}

/// Ghost value left of the entrance, `i < 0`.
pub fn ghost_left(f: &DistributionField, i: isize, j: usize, inflow: &[f64]) -> Result<f64> {
    debug_assert!(i < 0);
    if f.grid.v_mesh.node(j) >= 0.0 {
        Ok(inflow[j])
    } else {
        let r = reflected(f, 0, i)?;
        Ok(2.0 * f.get(0, j) - f.get(r, j))
    }
}

/// Ghost value right of the wall, `i > N_x`.
pub fn ghost_right(f: &DistributionField, i: isize, j: usize) -> Result<f64> {
    let nx = f.grid.nx();
    debug_assert!(i > nx as isize);
    if f.grid.v_mesh.node(j) >= 0.0 {
        let r = reflected(f, nx, i)?;
        Ok(2.0 * f.get(nx, j) - f.get(r, j))
    } else {
        Ok(0.0)
    }
}

/// Value at any `x` index: interior nodes read the field, others are ghosts.
pub fn extended_value(f: &DistributionField, i: isize, j: usize, inflow: &[f64]) -> Result<f64> {
    let nx = f.grid.nx() as isize;
    if i < 0 {
        ghost_left(f, i, j, inflow)
    } else if i > nx {
        ghost_right(f, i, j)
    } else {
        Ok(f.get(i as usize, j))
    }
}

/// Grids must leave room for every mirrored stencil point.
pub fn check_stencil_reach(nx: usize, d: usize) -> Result<()> {
    if nx < d + 2 {
        return Err(SheathError::Config(format!("N_x = {nx} is too coarse for d = {d}; need N_x >= d + 2")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_phase_grid, sample_function};

    fn field(f: impl Fn(f64, f64) -> f64) -> DistributionField {
        let g = make_phase_grid(10, 4, -2.0, 2.0).unwrap();
        sample_function(&g, f).unwrap()
    }

    #[test]
    fn entry_incoming_uses_inflow() {
        let f = field(|x, v| x + v);
        let inflow = vec![9.0; 5];
        // v_j = 0 counts as incoming
        assert_eq!(ghost_left(&f, -1, 2, &inflow).unwrap(), 9.0);
        assert_eq!(ghost_left(&f, -3, 4, &inflow).unwrap(), 9.0);
    }

    #[test]
    fn odd_extension_preserves_affine_data() {
        let f = field(|x, v| 3.0 * x - 0.5 * v + 1.0);
        let inflow = vec![0.0; 5];
        for i in 1..=4isize {
            let x = -(i as f64) * 0.1;
            let left = ghost_left(&f, -i, 0, &inflow).unwrap();
            assert!((left - (3.0 * x + 1.0 + 1.0)).abs() < 1e-14);
            let x = 1.0 + i as f64 * 0.1;
            let right = ghost_right(&f, 10 + i, 4, ).unwrap();
            assert!((right - (3.0 * x - 1.0 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_extend_as_constants() {
        let f = field(|_, _| 2.5);
        assert_eq!(ghost_left(&f, -2, 0, &[0.0; 5]).unwrap(), 2.5);
        assert_eq!(ghost_right(&f, 12, 3).unwrap(), 2.5);
    }

    #[test]
    fn wall_absorbs_incoming() {
        let f = field(|_, _| 1.0);
        assert_eq!(ghost_right(&f, 11, 0).unwrap(), 0.0);
        assert_eq!(ghost_right(&f, 40, 1).unwrap(), 0.0);
    }

    #[test]
    fn mirror_beyond_mesh_is_an_error() {
        let f = field(|_, _| 1.0);
        assert!(ghost_left(&f, -11, 0, &[0.0; 5]).is_err());
        assert!(ghost_right(&f, 21, 4).is_err());
        assert!(ghost_right(&f, 20, 4).is_ok());
        assert!(check_stencil_reach(9, 8).is_err());
        assert!(check_stencil_reach(10, 8).is_ok());
    }

    #[test]
    fn butterfly_keeps_smooth_data_smooth() {
        // second difference across the wall for a smooth profile shrinks like dx^2
        let jump = |nx: usize| {
            let g = make_phase_grid(nx, 2, 0.0, 1.0).unwrap();
            let f = sample_function(&g, |x, _| (1.3 * x).sin() + x * x).unwrap();
            let j = 2;
            let at = |i: isize| extended_value(&f, i, j, &[0.0; 3]).unwrap();
            let n = nx as isize;
            let inside = at(n) - 2.0 * at(n - 1) + at(n - 2);
            let across = at(n + 1) - 2.0 * at(n) + at(n - 1);
            (across - inside).abs()
        };
        let (a, b) = (jump(32), jump(64));
        assert!(a / b > 3.5, "ratio {}", a / b);
    }

    #[test]
    fn ghosts_leave_interior_untouched() {
        let f = field(|x, v| x * v);
        let before = f.clone();
        for i in 1..4 {
            let _ = ghost_left(&f, -i, 0, &[0.0; 5]).unwrap();
            let _ = ghost_right(&f, 10 + i, 4).unwrap();
        }
        assert_eq!(f, before);
    }
}
