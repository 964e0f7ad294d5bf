//! Interpolation kernels for the semi-Lagrangian steps.
//!
//! Shift convention shared by every routine here: a shift of `s` cells means
//! the value at node `i` is replaced by the interpolant evaluated at
//! `i - s`, the foot of the backward characteristic. The foot is split as
//! `i - s = i* + alpha` with `alpha` in `[0, 1)`.

use crate::error::{Result, SheathError};

/// Decomposition of a constant shift: foot of node `i` is `i + offset + alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftSplit {
    pub offset: isize,
    pub alpha: f64,
}

impl ShiftSplit {
    pub fn new(shift: f64) -> Self {
        let foot = -shift;
        let base = foot.floor();
        let mut alpha = foot - base;
        let mut offset = base as isize;
        // foot just below an integer can round alpha up to exactly 1
        if alpha >= 1.0 {
            alpha = 0.0;
            offset += 1;
        }
        ShiftSplit { offset, alpha }
    }
}

/// Elementary Lagrange polynomials of degree `2d + 1` on the nodes
/// `-d..=d+1`, evaluated at `alpha`. Entry `k + d` holds `L_k(alpha)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeStencil {
    pub d: usize,
    pub weights: Vec<f64>,
}

impl LagrangeStencil {
    pub fn new(d: usize, alpha: f64) -> Self {
        LagrangeStencil { d, weights: lagrange_weights(d, alpha) }
    }

    #[inline]
    pub fn width(&self) -> usize {
        2 * self.d + 2
    }

    /// `sum_k values[k] * L_k` where `values[0]` sits at offset `-d`.
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

pub fn lagrange_weights(d: usize, alpha: f64) -> Vec<f64> {
    let lo = -(d as isize);
    let hi = d as isize + 1;
    (lo..=hi)
        .map(|k| {
            let mut w = 1.0;
            for i in lo..=hi {
                if i != k {
                    w *= (alpha - i as f64) / (k - i) as f64;
                }
            }
            w
        })
        .collect()
}

/// Shifted interpolation of a row whose out-of-range values come from
/// `ghost`. Indices passed to `ghost` are always outside `0..values.len()`.
pub fn interpolate_shifted_row<G>(values: &[f64], shift: f64, d: usize, ghost: G) -> Result<Vec<f64>>
where
    G: FnMut(isize) -> Result<f64>,
{
    let split = ShiftSplit::new(shift);
    let stencil = LagrangeStencil::new(d, split.alpha);
    let mut out = vec![0.0; values.len()];
    shift_row_into(values, split, &stencil, ghost, &mut out)?;
    Ok(out)
}

/// Same as [`interpolate_shifted_row`] with a precomputed split and
/// stencil, writing into `out`.
pub fn shift_row_into<G>(
    values: &[f64],
    split: ShiftSplit,
    stencil: &LagrangeStencil,
    mut ghost: G,
    out: &mut [f64],
) -> Result<()>
where
    G: FnMut(isize) -> Result<f64>,
{
    let n = values.len() as isize;
    if split.alpha == 0.0 {
        for (i, o) in out.iter_mut().enumerate() {
            let src = i as isize + split.offset;
            *o = if (0..n).contains(&src) { values[src as usize] } else { ghost(src)? };
        }
        return Ok(());
    }
    let d = stencil.d as isize;
    // extended copy covering every index any stencil touches
    let first = (split.offset - d).min(0);
    let last = (n - 1 + split.offset + d + 1).max(n - 1);
    let mut ext = Vec::with_capacity((last - first + 1) as usize);
    for idx in first..=last {
        ext.push(if (0..n).contains(&idx) { values[idx as usize] } else { ghost(idx)? });
    }
    let width = stencil.width();
    for (i, o) in out.iter_mut().enumerate() {
        let start = (i as isize + split.offset - d - first) as usize;
        *o = stencil.apply(&ext[start..start + width]);
    }
    Ok(())
}

/// Periodic shifted Lagrange interpolation on `period` distinct points.
pub fn periodic_lagrange_shift(values: &[f64], shift: f64, d: usize, out: &mut [f64]) {
    let n = values.len() as isize;
    let split = ShiftSplit::new(shift);
    let stencil = LagrangeStencil::new(d, split.alpha);
    let di = d as isize;
    let width = stencil.width();
    for (i, o) in out.iter_mut().enumerate() {
        let base = i as isize + split.offset - di;
        let mut acc = 0.0;
        for k in 0..width {
            acc += values[(base + k as isize).rem_euclid(n) as usize] * stencil.weights[k];
        }
        *o = acc;
    }
}

/// Uniform cubic B-spline weights for a point `alpha` past node `q`,
/// multiplying coefficients `q-1, q, q+1, q+2`.
#[inline]
pub fn bspline_weights(alpha: f64) -> [f64; 4] {
    let a2 = alpha * alpha;
    let a3 = a2 * alpha;
    let b = 1.0 - alpha;
    [
        b * b * b / 6.0,
        (4.0 - 6.0 * a2 + 3.0 * a3) / 6.0,
        (1.0 + 3.0 * alpha + 3.0 * a2 - 3.0 * a3) / 6.0,
        a3 / 6.0,
    ]
}

/// Coefficients of the periodic cubic spline interpolant on a uniform mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineCoeffs {
    pub coeffs: Vec<f64>,
}

impl SplineCoeffs {
    /// Interpolates `row` treated as one full period (no repeated endpoint).
    pub fn periodic(row: &[f64]) -> Result<Self> {
        let mut coeffs = row.to_vec();
        PeriodicSplineSolver::new(row.len())?.solve_in_place(&mut coeffs);
        Ok(SplineCoeffs { coeffs })
    }

    pub fn eval_shifted(&self, shift: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.coeffs.len()];
        self.eval_shifted_into(shift, &mut out);
        out
    }

    pub fn eval_shifted_into(&self, shift: f64, out: &mut [f64]) {
        let n = self.coeffs.len() as isize;
        let split = ShiftSplit::new(shift);
        let w = bspline_weights(split.alpha);
        let c = &self.coeffs;
        for (i, o) in out.iter_mut().enumerate() {
            let q = i as isize + split.offset;
            let at = |k: isize| c[(q + k).rem_euclid(n) as usize];
            *o = w[0] * at(-1) + w[1] * at(0) + w[2] * at(1) + w[3] * at(2);
        }
    }

    /// Second derivative (per cell squared) on segment `[q, q + 1]` at `alpha`.
    pub fn second_derivative(&self, q: isize, alpha: f64) -> f64 {
        let n = self.coeffs.len() as isize;
        let w = [1.0 - alpha, -2.0 + 3.0 * alpha, 1.0 - 3.0 * alpha, alpha];
        (0..4).map(|k| w[k] * self.coeffs[(q - 1 + k as isize).rem_euclid(n) as usize]).sum()
    }

    /// Spline value at fractional node position `p` (in cells).
    pub fn eval_at(&self, p: f64) -> f64 {
        let n = self.coeffs.len() as isize;
        let q = p.floor();
        let w = bspline_weights(p - q);
        let q = q as isize;
        (0..4).map(|k| w[k] * self.coeffs[(q - 1 + k as isize).rem_euclid(n) as usize]).sum()
    }
}

/// Factorisation of the circulant system `(c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i]`,
/// solved by Thomas elimination plus a Sherman-Morrison correction.
#[derive(Clone, Debug)]
pub struct PeriodicSplineSolver {
    n: usize,
    // forward-elimination factors for the tridiagonal part
    cprime: Vec<f64>,
    denom: Vec<f64>,
    // solution of the correction system and its projection factor
    z: Vec<f64>,
    gamma: f64,
    zfactor: f64,
}

impl PeriodicSplineSolver {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(SheathError::Config(format!("periodic spline needs at least 4 points, got {n}")));
        }
        let (a, b, c) = (1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);
        let gamma = -b;
        let mut diag = vec![b; n];
        diag[0] = b - gamma;
        diag[n - 1] = b - a * c / gamma;
        let mut cprime = vec![0.0; n];
        let mut denom = vec![0.0f64; n];
        denom[0] = diag[0];
        cprime[0] = c / denom[0];
        for i in 1..n {
            denom[i] = diag[i] - a * cprime[i - 1];
            if denom[i].abs() < 1e-14 {
                return Err(SheathError::Config("singular periodic spline system".into()));
            }
            cprime[i] = c / denom[i];
        }
        let mut solver = PeriodicSplineSolver { n, cprime, denom, z: vec![0.0; n], gamma, zfactor: 0.0 };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = c;
        solver.thomas(&mut u);
        let vz = u[0] + a / gamma * u[n - 1];
        solver.zfactor = 1.0 / (1.0 + vz);
        solver.z = u;
        Ok(solver)
    }

    fn thomas(&self, rhs: &mut [f64]) {
        let a = 1.0 / 6.0;
        rhs[0] /= self.denom[0];
        for i in 1..self.n {
            rhs[i] = (rhs[i] - a * rhs[i - 1]) / self.denom[i];
        }
        for i in (0..self.n - 1).rev() {
            rhs[i] -= self.cprime[i] * rhs[i + 1];
        }
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        let a = 1.0 / 6.0;
        self.thomas(rhs);
        let vy = rhs[0] + a / self.gamma * rhs[self.n - 1];
        let scale = vy * self.zfactor;
        for (r, z) in rhs.iter_mut().zip(&self.z) {
            *r -= scale * z;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}
