//! Stationary sheath: floating wall potential, electron density parameter,
//! kinetic Bohm criterion and the nonlinear Poisson problem for the sheath
//! potential, plus the closed-form stationary distributions.
//!
//! Densities as functions of the local potential `phi` (with `phi_w <= phi <= 0`):
//!
//! * ions: `n_i(phi) = int_0^inf f_in(u) u / sqrt(u^2 - 2 phi) du`
//! * electrons: `n_e(phi) = n0 e^phi (1 + erf(sqrt(phi - phi_w)))`, the
//!   closed form of the reflected-Maxwellian velocity integral.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use crate::error::{Result, SheathError};
use crate::interp::lagrange_weights;
use crate::mesh::PhysicalParams;
use crate::quadrature::{gauss_legendre, integrate, QuadratureSpec};

/// Lower end of the bracket searched for the wall potential.
pub const WALL_POTENTIAL_FLOOR: f64 = -50.0;

/// Incoming ion distribution at the entrance.
pub fn ion_inflow(v: f64, p: &PhysicalParams) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let cutoff = (v * v / p.eta).min(1.0);
    let z = (v - p.drift) / p.sigma;
    cutoff * (-0.5 * z * z).exp() / (2.0 * PI * p.sigma * p.sigma).sqrt()
}

/// Maxwellian electron profile `n0 sqrt(2 mu / pi) exp(-mu v^2 / 2)`.
pub fn electron_maxwellian(v: f64, mu: f64, n0: f64) -> f64 {
    n0 * (2.0 * mu / PI).sqrt() * (-0.5 * mu * v * v).exp()
}

/// Incoming electron distribution at the entrance (positive velocities only).
pub fn electron_inflow(v: f64, mu: f64, n0: f64) -> f64 {
    if v > 0.0 {
        electron_maxwellian(v, mu, n0)
    } else {
        0.0
    }
}

/// `int_a^inf exp(-v^2 / 2) dv`.
pub fn gaussian_tail(a: f64) -> f64 {
    (PI / 2.0).sqrt() * libm::erfc(a / SQRT_2)
}

/// Upper velocity used for ion integrals; the Gaussian is below 1e-21 past it.
pub fn ion_velocity_cutoff(p: &PhysicalParams) -> f64 {
    (p.drift + 10.0 * p.sigma).max(10.0 * p.sigma)
}

fn ion_breakpoints(p: &PhysicalParams) -> [f64; 2] {
    [p.eta.sqrt(), p.drift]
}

/// Velocity moments of the ion inflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonMoments {
    pub density: f64,
    pub flux: f64,
    pub inv_v2: f64,
}

pub fn ion_moments(p: &PhysicalParams, quad: &QuadratureSpec) -> Result<IonMoments> {
    let hi = ion_velocity_cutoff(p);
    let bp = ion_breakpoints(p);
    let density = integrate(|v| ion_inflow(v, p), 0.0, hi, &bp, quad)?;
    let flux = integrate(|v| v * ion_inflow(v, p), 0.0, hi, &bp, quad)?;
    let inv_v2 = integrate(
        |v| if v > 0.0 { ion_inflow(v, p) / (v * v) } else { 0.0 },
        0.0,
        hi,
        &bp,
        quad,
    )?;
    Ok(IonMoments { density, flux, inv_v2 })
}

/// Zero-current condition at the wall written as a function of the wall
/// potential. Increasing in `phi_w`; its root on `(-inf, 0]` is the floating
/// potential.
pub fn wall_potential_residual(phi_w: f64, m: &IonMoments, p: &PhysicalParams) -> f64 {
    let admitted = (2.0 * PI).sqrt() - gaussian_tail((-2.0 * phi_w).sqrt());
    phi_w.exp() * (m.density - p.rho0) / p.mu.sqrt() - m.flux * admitted
}

pub fn solve_wall_potential(m: &IonMoments, p: &PhysicalParams) -> Result<f64> {
    let net = m.density - p.rho0;
    if !(m.flux > 0.0) || !(net > 0.0) {
        return Err(SheathError::NoSolution(format!(
            "ion flux {} and net entrance density {} must both be positive",
            m.flux, net
        )));
    }
    let bound = (2.0 / (p.mu * PI)).sqrt();
    if m.flux / net > bound {
        return Err(SheathError::NoSolution(format!(
            "flux / (density - rho0) = {} exceeds sqrt(2 / (mu pi)) = {bound}",
            m.flux / net
        )));
    }
    let f = |phi: f64| wall_potential_residual(phi, m, p);
    let (mut lo, mut hi) = (WALL_POTENTIAL_FLOOR, 0.0);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if fhi == 0.0 {
        return Ok(0.0);
    }
    if flo > 0.0 {
        return Err(SheathError::NoSolution(format!("residual positive at phi_w = {lo}")));
    }
    // bracketed secant with bisection fallback
    for _ in 0..500 {
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        let trial = if secant > lo && secant < hi && (secant - mid).abs() < 0.49 * (hi - lo) {
            secant
        } else {
            mid
        };
        let ft = f(trial);
        if ft == 0.0 {
            return Ok(trial);
        }
        if ft < 0.0 {
            lo = trial;
            flo = ft;
        } else {
            hi = trial;
            fhi = ft;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(1.0) {
            return Ok(if flo.abs() < fhi.abs() { lo } else { hi });
        }
    }
    Err(SheathError::RootFinder { lo, hi, iterations: 500 })
}

pub fn compute_n0(m: &IonMoments, p: &PhysicalParams, phi_w: f64) -> Result<f64> {
    if phi_w > 0.0 {
        return Err(SheathError::Parameter(format!("wall potential must be <= 0, got {phi_w}")));
    }
    let denom = (2.0 * PI).sqrt() - gaussian_tail((-2.0 * phi_w).sqrt());
    if !(denom > 0.0) {
        return Err(SheathError::Parameter(format!("n0 denominator {denom} is not positive")));
    }
    let n0 = (PI / 2.0).sqrt() * (m.density - p.rho0) / denom;
    if !(n0 > 0.0) {
        return Err(SheathError::Parameter(format!("n0 = {n0} is not positive")));
    }
    Ok(n0)
}

/// Outcome of the kinetic Bohm criterion check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BohmCheck {
    pub satisfied: bool,
    /// `rhs - lhs`; positive when the criterion holds.
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Both sides of the criterion, the electron integral by adaptive quadrature.
pub fn check_bohm_criterion(m: &IonMoments, phi_w: f64, quad: &QuadratureSpec) -> Result<BohmCheck> {
    if phi_w > 0.0 {
        return Err(SheathError::Parameter(format!("wall potential must be <= 0, got {phi_w}")));
    }
    let lhs = m.inv_v2 / m.density;
    let a = (-2.0 * phi_w).sqrt();
    if a == 0.0 {
        // the 1/v^2 integral diverges at zero drop
        return Ok(BohmCheck { satisfied: true, margin: f64::INFINITY, lhs, rhs: f64::INFINITY });
    }
    let top = a + 40.0;
    let inv_tail = integrate(|v| (-0.5 * v * v).exp() / (v * v), a, top, &[], quad)?;
    let tail = integrate(|v| (-0.5 * v * v).exp(), a, top, &[], quad)?;
    let rhs = ((2.0 * PI).sqrt() + inv_tail) / ((2.0 * PI).sqrt() - tail);
    Ok(BohmCheck { satisfied: lhs < rhs, margin: rhs - lhs, lhs, rhs })
}

/// Ion density and its derivative with respect to the local potential.
pub fn ion_density(phi: f64, p: &PhysicalParams, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let hi = ion_velocity_cutoff(p);
    let bp = ion_breakpoints(p);
    let s = -2.0 * phi;
    let n = integrate(
        |u| if u > 0.0 { ion_inflow(u, p) * u / (u * u + s).sqrt() } else { 0.0 },
        0.0,
        hi,
        &bp,
        quad,
    )?;
    let dn = integrate(
        |u| {
            let q = u * u + s;
            if u > 0.0 && q > 0.0 {
                ion_inflow(u, p) * u / (q * q.sqrt())
            } else {
                0.0
            }
        },
        0.0,
        hi,
        &bp,
        quad,
    )?;
    Ok((n, dn))
}

/// Electron density and its derivative with respect to the local potential.
pub fn electron_density(phi: f64, phi_w: f64, n0: f64) -> (f64, f64) {
    let gap = (phi - phi_w).max(0.0);
    let s = gap.sqrt();
    let n = n0 * phi.exp() * (1.0 + libm::erf(s));
    let dn = if s > 0.0 { n + n0 * phi_w.exp() * FRAC_2_SQRT_PI / (2.0 * s) } else { f64::INFINITY };
    (n, dn)
}

/// Ion density `n_i(phi)` by a fixed composite Gauss-Legendre rule.
///
/// Adaptive quadrature chooses different partitions for neighbouring
/// potentials, so its error jumps from node to node; near the entrance the
/// exact potential is exponentially small and that noise would dominate it.
/// A fixed rule makes the discrete charge a smooth function of `phi`.
#[derive(Clone, Debug)]
pub struct IonDensityRule {
    nodes_sq: Vec<f64>,
    // w_k f_in(u_k) u_k
    weights: Vec<f64>,
}

impl IonDensityRule {
    /// `panels` Gauss panels of `points` nodes between consecutive
    /// breakpoints of the inflow (twice as many on the upper tail).
    pub fn new(p: &PhysicalParams, panels: usize, points: usize) -> Self {
        let (gx, gw) = gauss_legendre(points);
        let hi = ion_velocity_cutoff(p);
        let mut edges = vec![0.0];
        edges.extend(ion_breakpoints(p).into_iter().filter(|b| *b > 0.0 && *b < hi));
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges.push(hi);
        let mut nodes_sq = Vec::new();
        let mut weights = Vec::new();
        let last = edges.len() - 2;
        for (seg, pair) in edges.windows(2).enumerate() {
            let count = if seg == last { 2 * panels } else { panels };
            let width = (pair[1] - pair[0]) / count as f64;
            for c in 0..count {
                let a = pair[0] + c as f64 * width;
                for (x, w) in gx.iter().zip(&gw) {
                    let u = a + 0.5 * width * (x + 1.0);
                    nodes_sq.push(u * u);
                    weights.push(0.5 * width * w * ion_inflow(u, p) * u);
                }
            }
        }
        IonDensityRule { nodes_sq, weights }
    }

    /// `(n_i, dn_i/dphi)` at potential `phi <= 0`. The slope is only
    /// approximate for `|phi| < 1e-4`, which is enough for a Jacobian.
    pub fn density(&self, phi: f64) -> (f64, f64) {
        let s = -2.0 * phi;
        let (mut n, mut dn) = (0.0, 0.0);
        for (u2, w) in self.nodes_sq.iter().zip(&self.weights) {
            let q = u2 + s;
            let r = q.sqrt();
            n += w / r;
            dn += w / (q * r);
        }
        (n, dn)
    }
}

/// Knobs for the nonlinear Poisson solve.
#[derive(Clone, Copy, Debug)]
pub struct PoissonOptions {
    pub tol: f64,
    pub max_newton: usize,
    pub max_fixed_point: usize,
    pub relaxation: f64,
    /// Panels per inflow segment of the ion density rule.
    pub ion_panels: usize,
    /// Gauss points per panel.
    pub ion_points: usize,
    /// Extra Newton steps taken after the tolerance is met.
    pub polish_steps: usize,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        PoissonOptions { tol: 1e-10, max_newton: 100, max_fixed_point: 2000, relaxation: 0.1, ion_panels: 32, ion_points: 20, polish_steps: 3 }
    }
}

/// Stationary sheath state stored on `grid_n + 1` uniform nodes of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumSolution {
    pub params: PhysicalParams,
    pub phi: Vec<f64>,
    pub phi_w: f64,
    pub n0: f64,
    /// `-dphi/dx` by second-order finite differences.
    pub efield: Vec<f64>,
    pub grid_n: usize,
    /// False if the computed potential increases anywhere.
    pub monotone: bool,
}

/// Local charge density and its slope as used by the Poisson solve.
///
/// The charge is written as `rho0 + (n_i(phi) - n_i(0)) - (n_e(phi) - n_e(0))`
/// with both increments evaluated without cancellation. It is then exactly
/// `rho0` at the entrance, as for the exact densities, and keeps full relative
/// precision in the nearly neutral region where `|phi|` is tiny.
struct ChargeModel<'a> {
    rule: IonDensityRule,
    phi_w: f64,
    n0: f64,
    p: &'a PhysicalParams,
    gl: (Vec<f64>, Vec<f64>),
}

impl<'a> ChargeModel<'a> {
    fn new(p: &'a PhysicalParams, phi_w: f64, n0: f64, opts: &PoissonOptions) -> Self {
        let rule = IonDensityRule::new(p, opts.ion_panels, opts.ion_points);
        ChargeModel { rule, phi_w, n0, p, gl: gauss_legendre(12) }
    }

    // erf(b) - erf(a) without cancellation for close arguments
    fn erf_increment(&self, a: f64, b: f64) -> f64 {
        if (b - a).abs() > 0.25 {
            return libm::erf(b) - libm::erf(a);
        }
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        let sum: f64 = self.gl.0.iter().zip(&self.gl.1).map(|(x, w)| w * (-(mid + half * x).powi(2)).exp()).sum();
        FRAC_2_SQRT_PI * half * sum
    }

    fn charge(&self, phi: f64) -> (f64, f64) {
        let s = -2.0 * phi;
        let mut dni = 0.0;
        for (u2, w) in self.rule.nodes_sq.iter().zip(&self.rule.weights) {
            let (u, r) = (u2.sqrt(), (u2 + s).sqrt());
            dni -= w * s / (u * r * (r + u));
        }
        let a0 = (-self.phi_w).sqrt();
        let a = (phi - self.phi_w).max(0.0).sqrt();
        let dne = self.n0 * (phi.exp_m1() * (1.0 + libm::erf(a)) + self.erf_increment(a0, a));
        let (_, slope_i) = self.rule.density(phi);
        let (_, slope_e) = electron_density(phi, self.phi_w, self.n0);
        (self.p.rho0 + dni - dne, slope_i - slope_e)
    }
}

/// Discrete nonlinear residual `-eps^2 phi'' - rho(phi)` at the interior
/// nodes (entries 0 and N are zero), together with the nodal charge
/// derivative `rho'(phi)`.
fn residual_and_slope(phi: &[f64], model: &ChargeModel) -> (Vec<f64>, Vec<f64>) {
    let n = phi.len() - 1;
    let h = 1.0 / n as f64;
    let k = model.p.eps * model.p.eps / (h * h);
    let mut res = vec![0.0; n + 1];
    let mut slope = vec![0.0; n + 1];
    for j in 1..n {
        let (rho, drho) = model.charge(phi[j]);
        res[j] = -k * (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) - rho;
        slope[j] = drho;
    }
    (res, slope)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `a[j] x[j-1] + b[j] x[j] + c[j] x[j+1] = r[j]` in place; `None` on a
/// vanishing pivot.
fn solve_tridiagonal(a: f64, b: &[f64], c: f64, r: &mut [f64]) -> Option<()> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(c.abs());
    let mut denom = b[0];
    if denom.abs() <= 1e-14 * scale {
        return None;
    }
    cp[0] = c / denom;
    r[0] /= denom;
    for j in 1..n {
        denom = b[j] - a * cp[j - 1];
        if denom.abs() <= 1e-14 * scale {
            return None;
        }
        cp[j] = c / denom;
        r[j] = (r[j] - a * r[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        r[j] -= cp[j] * r[j + 1];
    }
    Some(())
}

pub fn solve_sheath_potential(
    m: &IonMoments,
    p: &PhysicalParams,
    phi_w: f64,
    n0: f64,
    n: usize,
) -> Result<EquilibriumSolution> {
    solve_sheath_potential_with(m, p, phi_w, n0, n, &PoissonOptions::default())
}

pub fn solve_sheath_potential_with(
    _m: &IonMoments,
    p: &PhysicalParams,
    phi_w: f64,
    n0: f64,
    n: usize,
    opts: &PoissonOptions,
) -> Result<EquilibriumSolution> {
    if n < 2 {
        return Err(SheathError::Config(format!("equilibrium grid needs at least 2 cells, got {n}")));
    }
    if phi_w > 0.0 {
        return Err(SheathError::Parameter(format!("wall potential must be <= 0, got {phi_w}")));
    }
    let h = 1.0 / n as f64;
    let k = p.eps * p.eps / (h * h);
    let mut phi: Vec<f64> = (0..=n).map(|j| phi_w * (j as f64 * h)).collect();
    phi[0] = 0.0;
    phi[n] = phi_w;
    let project = |x: f64| x.clamp(phi_w, 0.0);

    let model = ChargeModel::new(p, phi_w, n0, opts);
    let (mut res, mut slope) = residual_and_slope(&phi, &model);
    let mut norm = max_abs(&res);
    let mut iterations = 0;
    let mut fixed_point_budget = opts.max_fixed_point;
    while norm > opts.tol {
        iterations += 1;
        if iterations > opts.max_newton + opts.max_fixed_point {
            return Err(SheathError::Solver { iterations, residual: norm });
        }
        let diag: Vec<f64> = (1..n).map(|j| 2.0 * k - slope[j]).collect();
        let mut step: Vec<f64> = (1..n).map(|j| -res[j]).collect();
        let newton_ok = iterations <= opts.max_newton
            && diag.iter().all(|d| d.is_finite())
            && solve_tridiagonal(-k, &diag, -k, &mut step).is_some();

        let mut accepted = false;
        if newton_ok {
            let mut lambda = 1.0;
            for _ in 0..40 {
                let mut trial = phi.clone();
                for j in 1..n {
                    trial[j] = project(phi[j] + lambda * step[j - 1]);
                }
                let (tres, tslope) = residual_and_slope(&trial, &model);
                let tnorm = max_abs(&tres);
                if tnorm < (1.0 - 1e-4 * lambda) * norm {
                    phi = trial;
                    res = tres;
                    slope = tslope;
                    norm = tnorm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            // relaxed fixed point: solve the linear Poisson problem for the
            // current charge and move a fraction of the way there
            if fixed_point_budget == 0 {
                return Err(SheathError::Solver { iterations, residual: norm });
            }
            fixed_point_budget -= 1;
            let mut target: Vec<f64> = (1..n).map(|j| k * (2.0 * phi[j] - phi[j - 1] - phi[j + 1]) - res[j]).collect();
            target[0] += k * phi[0];
            target[n - 2] += k * phi[n];
            let lap = vec![2.0 * k; n - 1];
            solve_tridiagonal(-k, &lap, -k, &mut target)
                .ok_or(SheathError::Solver { iterations, residual: norm })?;
            // target now holds psi with -eps^2 psi'' = rho(phi)
            for j in 1..n {
                phi[j] = project(phi[j] + opts.relaxation * (target[j - 1] - phi[j]));
            }
            let (r, s) = residual_and_slope(&phi, &model);
            res = r;
            slope = s;
            norm = max_abs(&res);
        }
        if !norm.is_finite() {
            return Err(SheathError::Solver { iterations, residual: norm });
        }
    }

    // Converged in max-norm, which the steep wall layer dominates; a few more
    // full Newton steps remove the smooth leftover error in the nearly
    // neutral region, where the exact potential is exponentially small.
    for _ in 0..opts.polish_steps {
        let diag: Vec<f64> = (1..n).map(|j| 2.0 * k - slope[j]).collect();
        let mut step: Vec<f64> = (1..n).map(|j| -res[j]).collect();
        if !diag.iter().all(|d| d.is_finite()) || solve_tridiagonal(-k, &diag, -k, &mut step).is_none() {
            break;
        }
        let mut trial = phi.clone();
        for j in 1..n {
            trial[j] = project(phi[j] + step[j - 1]);
        }
        let (tres, tslope) = residual_and_slope(&trial, &model);
        if max_abs(&tres) > opts.tol {
            break;
        }
        phi = trial;
        res = tres;
        slope = tslope;
    }

    let monotone = phi.windows(2).all(|w| w[1] <= w[0]);
    if !monotone {
        log::warn!("sheath potential is not monotone");
    }
    let efield = finite_difference_field(&phi);
    Ok(EquilibriumSolution { params: *p, phi, phi_w, n0, efield, grid_n: n, monotone })
}

/// `-dphi/dx` with centred differences inside and second-order one-sided
/// differences at both ends.
pub fn finite_difference_field(phi: &[f64]) -> Vec<f64> {
    let n = phi.len() - 1;
    let h = 1.0 / n as f64;
    let mut e = vec![0.0; n + 1];
    for j in 1..n {
        e[j] = -(phi[j + 1] - phi[j - 1]) / (2.0 * h);
    }
    if n >= 2 {
        e[0] = -(-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h);
        e[n] = -(3.0 * phi[n] - 4.0 * phi[n - 1] + phi[n - 2]) / (2.0 * h);
    } else {
        e[0] = -(phi[1] - phi[0]) / h;
        e[1] = e[0];
    }
    e
}

/// Full stationary pipeline: moments, wall potential, `n0`, Bohm check and
/// the potential on `n` cells.
pub fn solve_equilibrium(p: &PhysicalParams, n: usize) -> Result<EquilibriumSolution> {
    p.validate()?;
    let quad = QuadratureSpec::default();
    let m = ion_moments(p, &quad)?;
    let phi_w = solve_wall_potential(&m, p)?;
    let n0 = compute_n0(&m, p, phi_w)?;
    let bohm = check_bohm_criterion(&m, phi_w, &quad)?;
    if !bohm.satisfied {
        return Err(SheathError::NoSolution(format!(
            "kinetic Bohm criterion violated: {} >= {}",
            bohm.lhs, bohm.rhs
        )));
    }
    solve_sheath_potential(&m, p, phi_w, n0, n)
}

impl EquilibriumSolution {
    /// Potential at `x`, exact at stored nodes and cubic Lagrange between them.
    pub fn phi_at(&self, x: f64) -> f64 {
        let n = self.grid_n;
        let pos = x.clamp(0.0, 1.0) * n as f64;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-10 {
            return self.phi[nearest as usize];
        }
        if n < 3 {
            let i = (pos.floor() as usize).min(n - 1);
            let a = pos - i as f64;
            return self.phi[i] * (1.0 - a) + self.phi[i + 1] * a;
        }
        let cell = (pos.floor() as usize).min(n - 1);
        let start = (cell as isize - 1).clamp(0, n as isize - 3) as usize;
        let w = lagrange_weights(1, pos - start as f64 - 1.0);
        (0..4).map(|k| w[k] * self.phi[start + k]).sum()
    }

    /// Ion entrance density minus electron entrance density.
    pub fn entrance_charge(&self, quad: &QuadratureSpec) -> Result<f64> {
        let (ni, _) = ion_density(0.0, &self.params, quad)?;
        let (ne, _) = electron_density(0.0, self.phi_w, self.n0);
        Ok(ni - ne)
    }
}

pub fn eval_equilibrium_ion(x: f64, v: f64, eq: &EquilibriumSolution, p: &PhysicalParams) -> f64 {
    let phi = eq.phi_at(x).min(0.0);
    if v > (-2.0 * phi).sqrt() {
        ion_inflow((v * v + 2.0 * phi).sqrt(), p)
    } else {
        0.0
    }
}

pub fn eval_equilibrium_electron(x: f64, v: f64, eq: &EquilibriumSolution, p: &PhysicalParams) -> f64 {
    let phi = eq.phi_at(x).min(0.0);
    let gap = (phi - eq.phi_w).max(0.0);
    if v >= -(2.0 / p.mu * gap).sqrt() {
        let energy = v * v - 2.0 / p.mu * phi;
        eq.n0 * (2.0 * p.mu / PI).sqrt() * (-0.5 * p.mu * energy).exp()
    } else {
        0.0
    }
}
