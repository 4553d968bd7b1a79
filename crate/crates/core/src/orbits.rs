//! Relative equilibria by quadrature, helix families with their Galilean and
//! scaling transforms, and the traveling-wave branch on the line lattice
//! `{(l, lk)}`, which carries no small divisors.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the radial problem `c²(∂_θρ)² + V(ρ) = E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialOrbitParams {
    pub c: f64,
    pub omega: f64,
    pub energy: f64,
}

/// `V(ρ) = c²ρ² − ln ρ² − ωρ⁻²` and `V'(ρ)`.
pub fn effective_potential(rho: f64, p: &RadialOrbitParams) -> (f64, f64) {
    let c2 = p.c * p.c;
    let v = c2 * rho * rho - (rho * rho).ln() - p.omega / (rho * rho);
    let dv = 2.0 * c2 * rho - 2.0 / rho + 2.0 * p.omega / rho.powi(3);
    (v, dv)
}

/// `V''(ρ)`.
pub fn potential_curvature(rho: f64, p: &RadialOrbitParams) -> f64 {
    2.0 * p.c * p.c + 2.0 / (rho * rho) - 6.0 * p.omega / rho.powi(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Equilibria {
    /// `ρ_±² = (1 ± √(1 − 4c²ω))/(2c²)`; equal on the boundary `ω = 1/(4c²)`.
    Pair { rho_plus: f64, rho_minus: f64 },
    /// `c = 0`: the straight filament of amplitude `r = ω^{−1/2}` (`ρ = 1/r`).
    Single { amplitude: f64 },
}

/// Critical points of `V`, mapped to the helices `u = ρ⁻¹e^{i(ωt + cρ²s)}`.
pub fn equilibria(c: f64, omega: f64) -> Result<Equilibria> {
    if !(omega > 0.0) {
        return Err(Error::NoEquilibria(format!("ω must be positive, got {omega}")));
    }
    if c == 0.0 {
        return Ok(Equilibria::Single { amplitude: omega.powf(-0.5) });
    }
    let c2 = c * c;
    let disc = 1.0 - 4.0 * c2 * omega;
    if disc < 0.0 {
        return Err(Error::NoEquilibria(format!("ω = {omega} exceeds 1/(4c²) = {}", 0.25 / c2)));
    }
    let root = disc.sqrt();
    Ok(Equilibria::Pair { rho_plus: ((1.0 + root) / (2.0 * c2)).sqrt(), rho_minus: ((1.0 - root) / (2.0 * c2)).sqrt() })
}

/// Helix `(amplitude a, pitch σ)` of an equilibrium radius: `a = ρ⁻¹`, `σ = cρ²`.
pub fn helix_of_equilibrium(c: f64, rho: f64) -> (f64, f64) {
    (1.0 / rho, c * rho * rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOrbit {
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub energy: f64,
    /// `max |c²ρ'² + V(ρ) − E|` along the orbit.
    pub energy_drift: f64,
    /// Mean radial period from upward crossings of the orbit's mean radius.
    pub period: Option<f64>,
    /// The orbit crossed the barrier at `ρ₋` and fell towards `ρ = 0`.
    pub escaped: bool,
    /// Orbits approaching `ρ = 0` lie outside the regime the model describes.
    pub outside_validity: bool,
}

/// Sixth-order symmetric composition of the leapfrog step.
const COMPOSITION: [f64; 7] = {
    let w1 = -1.177_679_984_178_87;
    let w2 = 0.235_573_213_359_357;
    let w3 = 0.784_513_610_477_560;
    let w0 = 1.0 - 2.0 * (w1 + w2 + w3);
    [w3, w2, w1, w0, w1, w2, w3]
};

/// Integrates `c²ρ'' + c²ρ − ρ⁻¹ + ωρ⁻³ = 0` from `(ρ₀, ρ'₀)` over `[0, theta_span]`.
///
/// The energy `E` of `params` is ignored in favour of the initial data; use
/// [`radial_start`] to start on a given level.
pub fn integrate_radial(
    params: &RadialOrbitParams,
    rho0: f64,
    drho0: f64,
    theta_span: f64,
    steps: usize,
) -> Result<RadialOrbit> {
    if params.c == 0.0 {
        return Err(Error::InvalidParameter("the radial quadrature in θ needs c ≠ 0".into()));
    }
    if !(rho0 > 0.0) || steps == 0 {
        return Err(Error::InvalidParameter("need ρ₀ > 0 and at least one step".into()));
    }
    let c2 = params.c * params.c;
    let force = |q: f64| -effective_potential(q, params).1 / (2.0 * c2);
    let energy_of = |q: f64, v: f64| c2 * v * v + effective_potential(q, params).0;
    let barrier = match equilibria(params.c, params.omega) {
        Ok(Equilibria::Pair { rho_minus, .. }) => rho_minus,
        _ => 0.0,
    };
    let h = theta_span / steps as f64;
    let (mut q, mut v) = (rho0, drho0);
    let energy = energy_of(q, v);
    let mut theta = vec![0.0];
    let mut rho = vec![q];
    let mut drift = 0.0f64;
    let mut escaped = false;
    for n in 0..steps {
        for w in COMPOSITION {
            let dt = w * h;
            v += 0.5 * dt * force(q);
            q += dt * v;
            v += 0.5 * dt * force(q);
        }
        if !(q > 0.0) || !q.is_finite() || (barrier > 0.0 && q < barrier && rho0 > barrier) {
            escaped = true;
            break;
        }
        drift = drift.max((energy_of(q, v) - energy).abs());
        theta.push((n + 1) as f64 * h);
        rho.push(q);
    }
    let period = crossing_period(&theta, &rho);
    Ok(RadialOrbit { theta, rho, energy, energy_drift: drift, period, escaped, outside_validity: escaped })
}

/// Initial data `(ρ₊, √((E − V(ρ₊))/c²))` on the energy level of `params`.
pub fn radial_start(params: &RadialOrbitParams) -> Result<(f64, f64)> {
    let Equilibria::Pair { rho_plus, .. } = equilibria(params.c, params.omega)? else {
        return Err(Error::InvalidParameter("the radial quadrature in θ needs c ≠ 0".into()));
    };
    let excess = params.energy - effective_potential(rho_plus, params).0;
    if excess < 0.0 {
        return Err(Error::InvalidParameter(format!("energy lies {:.3e} below V(ρ₊)", -excess)));
    }
    Ok((rho_plus, (excess / (params.c * params.c)).sqrt()))
}

/// Harmonic period `2π/√(V''(ρ₊)/(2c²))` of small oscillations about `ρ₊`.
pub fn harmonic_period(c: f64, omega: f64) -> Result<f64> {
    let Equilibria::Pair { rho_plus, .. } = equilibria(c, omega)? else {
        return Err(Error::InvalidParameter("needs c ≠ 0".into()));
    };
    let p = RadialOrbitParams { c, omega, energy: 0.0 };
    Ok(2.0 * PI / (potential_curvature(rho_plus, &p) / (2.0 * c * c)).sqrt())
}

fn crossing_period(theta: &[f64], rho: &[f64]) -> Option<f64> {
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    let crossings: Vec<f64> = (1..rho.len())
        .filter(|&i| rho[i - 1] < mean && rho[i] >= mean)
        .map(|i| {
            let t = (mean - rho[i - 1]) / (rho[i] - rho[i - 1]);
            theta[i - 1] + t * (theta[i] - theta[i - 1])
        })
        .collect();
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Helix `a e^{i(ωt + σs)}` of the scalar reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Helix {
    pub amplitude: f64,
    pub sigma: f64,
    pub omega: f64,
}

impl Helix {
    /// `ω = −σ² + a⁻²`.
    pub fn new(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!("helix amplitude must be positive, got {amplitude}")));
        }
        Ok(Helix { amplitude, sigma, omega: -sigma * sigma + amplitude.powi(-2) })
    }

    /// Image under `w ↦ e^{−iα²t}e^{iαs}w(t, s − 2αt)`.
    pub fn galilei(&self, alpha: f64) -> Helix {
        Helix {
            amplitude: self.amplitude,
            sigma: self.sigma + alpha,
            omega: self.omega - alpha * alpha - 2.0 * alpha * self.sigma,
        }
    }

    /// Image under `w ↦ τ⁻¹w(τ²t, τs)`.
    pub fn scale(&self, tau: f64) -> Helix {
        Helix { amplitude: self.amplitude / tau, sigma: self.sigma * tau, omega: self.omega * tau * tau }
    }

    pub fn evaluate(&self, t: f64, s: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.omega * t + self.sigma * s)
    }
}

/// Helix frequency and its image under the Galilean transform with parameter `α`.
pub fn helix_and_galilei(amplitude: f64, sigma: f64, alpha: f64) -> Result<(Helix, Helix)> {
    let h = Helix::new(amplitude, sigma)?;
    Ok((h, h.galilei(alpha)))
}

/// Scaling `τ = P/2π` mapping spatial period `P` to `2π`.
pub fn period_scaling(period: f64) -> f64 {
    period / (2.0 * PI)
}

/// `V(θ) = Σ_{|l|≤L} v_l e^{ilθ}` with real `v_l`, stored as `v[l + L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineLatticeField {
    pub k: usize,
    pub radius: usize,
    pub coeffs: Vec<f64>,
}

impl LineLatticeField {
    pub fn constant(k: usize, radius: usize) -> Self {
        let mut coeffs = vec![0.0; 2 * radius + 1];
        coeffs[radius] = 1.0;
        LineLatticeField { k, radius, coeffs }
    }

    pub fn get(&self, l: i64) -> f64 {
        let i = l + self.radius as i64;
        if i < 0 || i as usize >= self.coeffs.len() {
            0.0
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn evaluate_phase(&self, theta: f64) -> Complex64 {
        let r = self.radius as i64;
        (-r..=r).map(|l| self.get(l) * Complex64::from_polar(1.0, l as f64 * theta)).sum()
    }

    /// `v(t, s) = V(t + ks)`.
    pub fn evaluate(&self, t: f64, s: f64) -> Complex64 {
        self.evaluate_phase(t + self.k as f64 * s)
    }
}

/// One point `(amplitude, Ω, V)` of the traveling branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelingPoint {
    pub amplitude: f64,
    pub big_omega: f64,
    pub field: LineLatticeField,
    /// Max-norm of the coefficients of `F(V)`.
    pub residual: f64,
    pub newton_iterations: usize,
}

impl TravelingPoint {
    /// `u_j(t, s) = a_j e^{iωt}V(Ωt + ks)`.
    pub fn filament(&self, a: Complex64, omega: f64, t: f64, s: f64) -> Complex64 {
        a * Complex64::from_polar(1.0, omega * t) * self.field.evaluate_phase(self.big_omega * t + self.field.k as f64 * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelingBranch {
    pub omega: f64,
    pub k: usize,
    pub big_omega0: f64,
    pub points: Vec<TravelingPoint>,
    /// Set when continuation stopped early (Newton failure or a fold in the amplitude).
    pub truncated: Option<String>,
}

/// `Ω₀ = k√(k² + 2ω)`.
pub fn traveling_omega0(omega: f64, k: usize) -> f64 {
    let k = k as f64;
    k * (k * k + 2.0 * omega).sqrt()
}

/// Unit kernel direction `(ψ₁, ψ₋₁)` of `[[k² + Ω₀ + ω, ω], [ω, k² − Ω₀ + ω]]`.
pub fn traveling_kernel(omega: f64, k: usize) -> (f64, f64) {
    let k2 = (k * k) as f64;
    let w0 = traveling_omega0(omega, k);
    let (x, y) = (omega, -(k2 + w0 + omega));
    let n = x.hypot(y);
    (x / n, y / n)
}

struct LineSolver {
    omega: f64,
    k: usize,
    radius: usize,
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LineSolver {
    fn new(omega: f64, k: usize, radius: usize) -> Self {
        let grid = (8 * radius + 8).next_power_of_two();
        let mut planner = FftPlanner::new();
        LineSolver { omega, k, radius, grid, forward: planner.plan_fft_forward(grid), inverse: planner.plan_fft_inverse(grid) }
    }

    /// Fourier coefficients of `g(V̄)` for `|l| ≤ 2L`.
    fn transform_conj(&self, v: &[f64], g: impl Fn(Complex64) -> Complex64) -> Vec<f64> {
        let n = self.grid;
        let r = self.radius as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for l in -r..=r {
            // V̄(θ) = Σ v_l e^{−ilθ}
            let idx = ((-l).rem_euclid(n as i64)) as usize;
            buf[idx] += v[(l + r) as usize];
        }
        self.inverse.process(&mut buf);
        buf.iter_mut().for_each(|z| *z = g(*z));
        self.forward.process(&mut buf);
        let m = 2 * r;
        (-m..=m).map(|l| buf[l.rem_euclid(n as i64) as usize].re / n as f64).collect()
    }

    /// Coefficients of `F(V) = −iΩV' − k²V'' + ω(V − 1/V̄)`.
    fn residual(&self, v: &[f64], big_omega: f64) -> Vec<f64> {
        let r = self.radius as i64;
        let k2 = (self.k * self.k) as f64;
        let inv = self.transform_conj(v, |z| 1.0 / z);
        (-r..=r)
            .map(|l| {
                let lf = l as f64;
                let vl = v[(l + r) as usize];
                (big_omega * lf + k2 * lf * lf + self.omega) * vl - self.omega * inv[(l + 2 * r) as usize]
            })
            .collect()
    }

    /// `∂F_l/∂v_m = (Ωl + k²l² + ω)δ_{lm} + ωW_{l+m}`, `W` the coefficients of `1/V̄²`.
    fn jacobian(&self, v: &[f64], big_omega: f64) -> DMatrix<f64> {
        let r = self.radius as i64;
        let k2 = (self.k * self.k) as f64;
        let w = self.transform_conj(v, |z| 1.0 / (z * z));
        let dim = 2 * self.radius + 1;
        let mut j = DMatrix::zeros(dim, dim);
        for l in -r..=r {
            for m in -r..=r {
                let mut x = self.omega * w[(l + m + 2 * r) as usize];
                if l == m {
                    let lf = l as f64;
                    x += big_omega * lf + k2 * lf * lf + self.omega;
                }
                j[((l + r) as usize, (m + r) as usize)] = x;
            }
        }
        j
    }
}

/// Newton continuation of the traveling branch in the amplitude
/// `A = ψ₁v₁ + ψ₋₁v₋₁` along the kernel direction.
pub fn traveling_branch(omega: f64, k: usize, amplitude_grid: &[f64], radius: usize) -> Result<TravelingBranch> {
    if !(omega > 0.0) || k == 0 || radius < 2 {
        return Err(Error::InvalidParameter("need ω > 0, k ≥ 1 and truncation L ≥ 2".into()));
    }
    let solver = LineSolver::new(omega, k, radius);
    let w0 = traveling_omega0(omega, k);
    let (p1, pm1) = traveling_kernel(omega, k);
    let dim = 2 * radius + 1;
    let (i1, im1) = (radius + 1, radius - 1);
    let mut points = Vec::new();
    let mut truncated = None;
    let mut prev: Option<(f64, Vec<f64>, f64)> = None;
    let mut prev2: Option<(f64, Vec<f64>, f64)> = None;
    let mut last_slope: Option<f64> = None;
    for &amp in amplitude_grid {
        // predictor: secant through the last two points, else the linear kernel solution
        let (mut v, mut big) = match (&prev, &prev2) {
            (Some((a1, v1, o1)), Some((a0, v0, o0))) if a1 != a0 => {
                let t = (amp - a1) / (a1 - a0);
                (v1.iter().zip(v0).map(|(x, y)| x + t * (x - y)).collect::<Vec<_>>(), o1 + t * (o1 - o0))
            }
            (Some((a1, v1, o1)), _) => {
                let mut v = v1.clone();
                v[i1] += (amp - a1) * p1;
                v[im1] += (amp - a1) * pm1;
                (v, *o1)
            }
            _ => {
                let mut v = vec![0.0; dim];
                v[radius] = 1.0;
                v[i1] = amp * p1;
                v[im1] = amp * pm1;
                (v, w0)
            }
        };
        let mut converged = false;
        let mut iterations = 0;
        let mut res_norm = f64::INFINITY;
        for it in 0..50 {
            let f = solver.residual(&v, big);
            let c = p1 * v[i1] + pm1 * v[im1] - amp;
            res_norm = f.iter().map(|x| x.abs()).fold(c.abs(), f64::max);
            iterations = it;
            if res_norm <= 1e-13 {
                converged = true;
                break;
            }
            let mut jac = DMatrix::zeros(dim + 1, dim + 1);
            jac.view_mut((0, 0), (dim, dim)).copy_from(&solver.jacobian(&v, big));
            for l in -(radius as i64)..=(radius as i64) {
                jac[((l + radius as i64) as usize, dim)] = l as f64 * v[(l + radius as i64) as usize];
            }
            jac[(dim, i1)] = p1;
            jac[(dim, im1)] = pm1;
            let mut rhs = DVector::from_vec(f);
            rhs = rhs.push(c);
            let Some(step) = jac.lu().solve(&rhs) else { break };
            for (x, d) in v.iter_mut().zip(step.iter()) {
                *x -= d;
            }
            big -= step[dim];
            if !v.iter().all(|x| x.is_finite()) || !big.is_finite() {
                break;
            }
        }
        if !converged {
            truncated = Some(format!("Newton failure at amplitude {amp} (residual {res_norm:e})"));
            break;
        }
        if let Some((a1, _, o1)) = &prev {
            let slope = (big - o1) / (amp - a1);
            if let Some(s0) = last_slope {
                if amp.abs() > 1e-12 && slope.abs() > 1e3 * s0.abs().max(1.0) {
                    truncated = Some(format!("fold suspected near amplitude {amp}"));
                    break;
                }
            }
            last_slope = Some(slope);
        }
        points.push(TravelingPoint {
            amplitude: amp,
            big_omega: big,
            field: LineLatticeField { k, radius, coeffs: v.clone() },
            residual: res_norm,
            newton_iterations: iterations,
        });
        prev2 = prev.take();
        prev = Some((amp, v, big));
    }
    Ok(TravelingBranch { omega, k, big_omega0: w0, points, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibria_examples() {
        let Equilibria::Pair { rho_plus, rho_minus } = equilibria(1.0, 0.2).unwrap() else { panic!() };
        assert!((rho_plus - 0.85065).abs() < 1e-5 && (rho_minus - 0.52573).abs() < 1e-5);
        let p = RadialOrbitParams { c: 1.0, omega: 0.2, energy: 0.0 };
        for r in [rho_plus, rho_minus] {
            assert!(effective_potential(r, &p).1.abs() <= 1e-12);
            assert!((-r.powi(4) + r * r - 0.2).abs() <= 1e-14);
        }
        assert_eq!(equilibria(0.0, 4.0).unwrap(), Equilibria::Single { amplitude: 0.5 });
        let Equilibria::Pair { rho_plus, rho_minus } = equilibria(2.0, 1.0 / 16.0).unwrap() else { panic!() };
        assert!((rho_plus - rho_minus).abs() < 1e-15 && (rho_plus * rho_plus - 1.0 / 8.0).abs() < 1e-15);
        assert!(matches!(equilibria(1.0, 0.3), Err(Error::NoEquilibria(_))));
    }

    #[test]
    fn potential_falls_off_near_zero() {
        let p = RadialOrbitParams { c: 1.0, omega: 0.2, energy: 0.0 };
        assert!(effective_potential(1e-3, &p).0 < -1e4);
    }

    #[test]
    fn derivative_matches_difference() {
        let p = RadialOrbitParams { c: 0.7, omega: 0.3, energy: 0.0 };
        let h = 1e-6;
        for r in [0.4, 0.9, 1.7] {
            let fd = (effective_potential(r + h, &p).0 - effective_potential(r - h, &p).0) / (2.0 * h);
            assert!((fd - effective_potential(r, &p).1).abs() < 1e-7);
            let fd2 = (effective_potential(r + h, &p).1 - effective_potential(r - h, &p).1) / (2.0 * h);
            assert!((fd2 - potential_curvature(r, &p)).abs() < 1e-6);
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = RadialOrbitParams { c: 1.0, omega: 0.2, energy: 0.0 };
        let Equilibria::Pair { rho_plus, .. } = equilibria(1.0, 0.2).unwrap() else { panic!() };
        let o = integrate_radial(&p, rho_plus, 0.0, 50.0, 5000).unwrap();
        assert!(o.rho.iter().all(|r| (r - rho_plus).abs() < 1e-12));
    }

    #[test]
    fn helix_examples() {
        let (h, g) = helix_and_galilei(1.0, 0.5, -0.5).unwrap();
        assert!((h.omega - 0.75).abs() < 1e-15);
        assert_eq!(g.sigma, 0.0);
        assert!((g.omega - 1.0).abs() < 1e-15);
        let tau = period_scaling(4.0 * PI);
        assert!((tau - 2.0).abs() < 1e-15);
        let s = h.scale(tau);
        assert!((s.omega - (-s.sigma * s.sigma + s.amplitude.powi(-2))).abs() < 1e-14);
    }

    #[test]
    fn equilibria_are_helices() {
        let Equilibria::Pair { rho_plus, .. } = equilibria(1.0, 0.2).unwrap() else { panic!() };
        let (a, sigma) = helix_of_equilibrium(1.0, rho_plus);
        assert!((Helix::new(a, sigma).unwrap().omega - 0.2).abs() < 1e-14);
    }

    #[test]
    fn traveling_bifurcation_frequency() {
        assert!((traveling_omega0(std::f64::consts::SQRT_2, 1) - 1.95664).abs() < 1e-5);
        let (x, y) = traveling_kernel(1.3, 2);
        let k2 = 4.0;
        let w0 = traveling_omega0(1.3, 2);
        assert!(((k2 + w0 + 1.3) * x + 1.3 * y).abs() < 1e-14);
        assert!((1.3 * x + (k2 - w0 + 1.3) * y).abs() < 1e-14);
    }

    #[test]
    fn zero_amplitude_is_constant() {
        let b = traveling_branch(std::f64::consts::SQRT_2, 1, &[0.0], 8).unwrap();
        let p = &b.points[0];
        assert_eq!(p.big_omega, b.big_omega0);
        assert_eq!(p.field, LineLatticeField::constant(1, 8));
    }
}
