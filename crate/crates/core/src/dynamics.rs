//! Time-domain simulation of the near-parallel filament system
//! `∂_t u_j = i(∂_ss u_j + Σ_{i≠j}(u_j − u_i)/|u_j − u_i|²)`.
//!
//! Each filament is a 2π-periodic curve stored by its Fourier coefficients
//! (`|m| ≤ M`) on a collocation grid of `4M` points. The dispersive part is
//! integrated exactly (integrating factor) and the interaction by classical RK4,
//! evaluated pointwise on the grid and projected back onto `|m| ≤ M`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SymmetricField;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Seed for [`central_configuration`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// Regular polygon of radius `R`.
    Polygon,
    /// Newton refinement from the given points.
    Custom(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralConfiguration {
    pub points: Vec<Complex64>,
    pub omega: f64,
    pub residual: f64,
}

/// `Σ_{i≠j}(a_j − a_i)/|a_j − a_i|²`.
fn interaction_field(points: &[Complex64]) -> Vec<Complex64> {
    points
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            points
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, &ai)| {
                    let d = aj - ai;
                    d / d.norm_sqr()
                })
                .sum()
        })
        .collect()
}

/// `max_j |ω a_j − Σ_{i≠j}(a_j − a_i)/|a_j − a_i|²|`.
pub fn configuration_residual(points: &[Complex64], omega: f64) -> f64 {
    interaction_field(points)
        .iter()
        .zip(points)
        .map(|(f, a)| (omega * a - f).norm())
        .fold(0.0, f64::max)
}

/// Least-squares rotation rate `ω = Σ Re(ā_j F_j) / Σ|a_j|²`.
fn best_omega(points: &[Complex64]) -> f64 {
    let f = interaction_field(points);
    let num: f64 = points.iter().zip(&f).map(|(a, f)| (a.conj() * f).re).sum();
    let den: f64 = points.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// Points with `ω a_j = Σ_{i≠j}(a_j − a_i)/|a_j − a_i|²`.
///
/// A regular `n`-gon of radius `R` has `ω = (n−1)/(2R²)`. Custom seeds are refined
/// by Gauss–Newton at the seed's least-squares `ω` (rotations and scalings of a
/// solution form its null directions, handled by the pseudo-inverse).
pub fn central_configuration(n: usize, shape: &Shape, radius: f64) -> Result<CentralConfiguration> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two filaments, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    match shape {
        Shape::Polygon => {
            let points: Vec<Complex64> =
                (0..n).map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64)).collect();
            let omega = (n as f64 - 1.0) / (2.0 * radius * radius);
            let residual = configuration_residual(&points, omega);
            Ok(CentralConfiguration { points, omega, residual })
        }
        Shape::Custom(seed) => {
            if seed.len() != n {
                return Err(Error::InvalidParameter(format!("seed has {} points, expected {n}", seed.len())));
            }
            refine_configuration(seed)
        }
    }
}

fn refine_configuration(seed: &[Complex64]) -> Result<CentralConfiguration> {
    let n = seed.len();
    let centroid: Complex64 = seed.iter().sum::<Complex64>() / n as f64;
    let mut pts: Vec<Complex64> = seed.iter().map(|a| a - centroid).collect();
    let omega = best_omega(&pts);
    if !(omega > 0.0) {
        return Err(Error::NewtonFailure("seed has no positive rotation rate".into()));
    }
    let pack = |p: &[Complex64]| -> DVector<f64> {
        let r: Vec<f64> = interaction_field(p)
            .iter()
            .zip(p)
            .flat_map(|(f, a)| {
                let d = omega * a - f;
                [d.re, d.im]
            })
            .collect();
        DVector::from_vec(r)
    };
    for _ in 0..60 {
        let f = pack(&pts);
        if f.amax() <= 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for c in 0..2 * n {
            let mut q = pts.clone();
            let dz = if c % 2 == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
            q[c / 2] += dz;
            let fp = pack(&q);
            q[c / 2] -= 2.0 * dz;
            let fm = pack(&q);
            jac.set_column(c, &((fp - fm) / (2.0 * h)));
        }
        let step = jac
            .svd(true, true)
            .solve(&f, 1e-10)
            .map_err(|e| Error::NewtonFailure(format!("configuration Newton step: {e}")))?;
        for (j, p) in pts.iter_mut().enumerate() {
            *p -= Complex64::new(step[2 * j], step[2 * j + 1]);
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::NewtonFailure("configuration Newton diverged".into()));
        }
    }
    let residual = configuration_residual(&pts, omega);
    if residual > 1e-12 {
        return Err(Error::NewtonFailure(format!("configuration residual {residual:e}")));
    }
    Ok(CentralConfiguration { points: pts, omega, residual })
}

/// Filaments `u_j(s)` as Fourier coefficients `û_{j,m}` (`|m| ≤ M`, FFT ordering on `4M` points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilamentEnsemble {
    pub modes: usize,
    pub coeffs: Vec<Vec<Complex64>>,
    pub time: f64,
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

/// Signed frequency of FFT index `i` on `n` points.
fn frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl FilamentEnsemble {
    /// Samples `f(j, s)` on the collocation grid and projects onto `|m| ≤ modes`.
    pub fn from_fn(count: usize, modes: usize, f: impl Fn(usize, f64) -> Complex64) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParameter(format!("need at least two filaments, got {count}")));
        }
        if modes == 0 {
            return Err(Error::InvalidParameter("need at least one Fourier mode".into()));
        }
        let n = 4 * modes;
        let grid: Vec<Vec<Complex64>> =
            (0..count).map(|j| (0..n).map(|p| f(j, 2.0 * PI * p as f64 / n as f64)).collect()).collect();
        Ok(Self::from_grid(modes, &grid, 0.0))
    }

    fn from_grid(modes: usize, grid: &[Vec<Complex64>], time: f64) -> Self {
        let n = 4 * modes;
        let tf = Transforms::new(n);
        let coeffs = grid
            .iter()
            .map(|g| {
                let mut c = g.clone();
                tf.forward.process(&mut c);
                project(&mut c, modes);
                c.iter_mut().for_each(|x| *x /= n as f64);
                c
            })
            .collect();
        FilamentEnsemble { modes, coeffs, time }
    }

    pub fn count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn grid_size(&self) -> usize {
        4 * self.modes
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let n = self.grid_size();
        (0..n).map(|p| 2.0 * PI * p as f64 / n as f64).collect()
    }

    /// Curve values on the collocation grid.
    pub fn grid_values(&self) -> Vec<Vec<Complex64>> {
        let tf = Transforms::new(self.grid_size());
        self.coeffs.iter().map(|c| to_grid(c, &tf)).collect()
    }

    /// `u_j(s)` by Fourier summation.
    pub fn evaluate(&self, j: usize, s: f64) -> Complex64 {
        let n = self.grid_size();
        self.coeffs[j]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, c)| c * Complex64::from_polar(1.0, frequency(i, n) as f64 * s))
            .sum()
    }
}

fn project(c: &mut [Complex64], modes: usize) {
    let n = c.len();
    for (i, x) in c.iter_mut().enumerate() {
        if frequency(i, n).unsigned_abs() as usize > modes {
            *x = Complex64::new(0.0, 0.0);
        }
    }
}

fn to_grid(c: &[Complex64], tf: &Transforms) -> Vec<Complex64> {
    let mut g = c.to_vec();
    tf.inverse.process(&mut g);
    g
}

/// Exact evaluator of `u_j(t,s) = a_j e^{iωt}(1 + u(Ωt, s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandingWave {
    pub points: Vec<Complex64>,
    pub omega: f64,
    pub big_omega: f64,
    pub profile: SymmetricField,
}

impl StandingWave {
    pub fn at(&self, j: usize, t: f64, s: f64) -> Complex64 {
        self.points[j] * Complex64::from_polar(1.0, self.omega * t) * (1.0 + self.profile.evaluate(self.big_omega * t, s))
    }

    /// The ensemble at time `t` on `modes` Fourier modes.
    pub fn ensemble(&self, t: f64, modes: usize) -> Result<FilamentEnsemble> {
        let mut e = FilamentEnsemble::from_fn(self.points.len(), modes, |j, s| self.at(j, t, s))?;
        e.time = t;
        Ok(e)
    }
}

/// Filaments `a_j e^{iωt}(1 + u(Ωt, s))` built from a standing wave `u` at frequency `Ω`.
pub fn reconstruct(
    points: &[Complex64],
    omega: f64,
    profile: &SymmetricField,
    big_omega: f64,
    modes: usize,
) -> Result<(FilamentEnsemble, StandingWave)> {
    let wave = StandingWave { points: points.to_vec(), omega, big_omega, profile: profile.clone() };
    Ok((wave.ensemble(0.0, modes)?, wave))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub value: f64,
    pub pair: (usize, usize),
    pub s: f64,
}

/// Minimum of `|u_i − u_j|` over pairs and collocation points.
pub fn min_separation(ens: &FilamentEnsemble) -> Separation {
    separation_on_grid(&ens.grid_values(), &ens.grid_points())
}

fn separation_on_grid(values: &[Vec<Complex64>], s: &[f64]) -> Separation {
    let mut best = Separation { value: f64::INFINITY, pair: (0, 1), s: 0.0 };
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            for (p, (a, b)) in values[i].iter().zip(&values[j]).enumerate() {
                let d = (a - b).norm();
                if d < best.value || d.is_nan() {
                    best = Separation { value: d, pair: (i, j), s: s[p] };
                }
            }
        }
    }
    best
}

/// `H = ∫|w_s|² − ln|w|² ds`, `I = ∫|w|² ds`, `W = ∫ Re(w̄ · i w_s) ds` of a scalar profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarInvariants {
    pub h: f64,
    pub i: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedSet {
    /// `Σ_j∫|∂_s u_j|² ds − Σ_{i<j}∫ln|u_j − u_i|² ds`.
    pub h_total: f64,
    /// `Σ_j ∫u_j ds`.
    pub center: Complex64,
    /// Invariants of `w = u_j/a_j` when the ensemble is homographic over `points`.
    pub scalar: Option<ScalarInvariants>,
    /// `max_j sup_s |u_j − a_j w|`, when `points` are given.
    pub homographic_defect: Option<f64>,
}

/// Spectral quadrature of the conserved quantities.
pub fn invariants(ens: &FilamentEnsemble, points: Option<&[Complex64]>) -> ConservedSet {
    let n = ens.grid_size();
    let values = ens.grid_values();
    let ds = 2.0 * PI / n as f64;
    let kinetic = |c: &[Complex64]| -> f64 {
        c.iter().enumerate().map(|(i, x)| (frequency(i, n) as f64).powi(2) * x.norm_sqr()).sum::<f64>() * 2.0 * PI
    };
    let mut h_total: f64 = ens.coeffs.iter().map(|c| kinetic(c)).sum();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            h_total -= values[i].iter().zip(&values[j]).map(|(a, b)| (a - b).norm_sqr().ln()).sum::<f64>() * ds;
        }
    }
    let center = ens.coeffs.iter().map(|c| c[0]).sum::<Complex64>() * 2.0 * PI;
    let (scalar, homographic_defect) = match points {
        Some(pts) => {
            let j0 = (0..pts.len()).max_by(|&a, &b| pts[a].norm().total_cmp(&pts[b].norm())).unwrap_or(0);
            let w: Vec<Complex64> = ens.coeffs[j0].iter().map(|c| c / pts[j0]).collect();
            let defect = ens
                .coeffs
                .iter()
                .zip(pts)
                .map(|(c, a)| c.iter().zip(&w).map(|(x, y)| (x - a * y).norm()).sum::<f64>())
                .fold(0.0, f64::max);
            let wg = &values[j0].iter().map(|v| v / pts[j0]).collect::<Vec<_>>();
            let i_val = w.iter().map(|x| x.norm_sqr()).sum::<f64>() * 2.0 * PI;
            let w_val = w
                .iter()
                .enumerate()
                .map(|(i, x)| -(frequency(i, n) as f64) * x.norm_sqr())
                .sum::<f64>()
                * 2.0
                * PI;
            let h_val = kinetic(&w) - wg.iter().map(|v| v.norm_sqr().ln()).sum::<f64>() * ds;
            (Some(ScalarInvariants { h: h_val, i: i_val, w: w_val }), Some(defect))
        }
        None => (None, None),
    };
    ConservedSet { h_total, center, scalar, homographic_defect }
}

struct Stepper {
    modes: usize,
    tf: Transforms,
}

impl Stepper {
    /// `i·P_M[Σ_{i≠j}(u_j − u_i)/|u_j − u_i|²]` in Fourier space.
    fn interaction(&self, coeffs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let n = 4 * self.modes;
        let grid: Vec<Vec<Complex64>> = coeffs.iter().map(|c| to_grid(c, &self.tf)).collect();
        (0..grid.len())
            .map(|j| {
                let mut f: Vec<Complex64> = (0..n)
                    .map(|p| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (i, gi) in grid.iter().enumerate() {
                            if i != j {
                                let d = grid[j][p] - gi[p];
                                acc += d / d.norm_sqr();
                            }
                        }
                        I * acc
                    })
                    .collect();
                self.tf.forward.process(&mut f);
                project(&mut f, self.modes);
                f.iter_mut().for_each(|x| *x /= n as f64);
                f
            })
            .collect()
    }

    fn step(&self, u: &[Vec<Complex64>], h: f64) -> Vec<Vec<Complex64>> {
        let n = 4 * self.modes;
        let phase = |dt: f64| -> Vec<Complex64> {
            (0..n).map(|i| Complex64::from_polar(1.0, -(frequency(i, n) as f64).powi(2) * dt)).collect()
        };
        let (e_half, e_full) = (phase(0.5 * h), phase(h));
        let mul = |e: &[Complex64], x: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            x.iter().map(|c| c.iter().zip(e).map(|(a, b)| a * b).collect()).collect()
        };
        let comb = |x: &[Vec<Complex64>], c: f64, y: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            x.iter().zip(y).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + c * q).collect()).collect()
        };
        let u_half = mul(&e_half, u);
        let k1 = self.interaction(u);
        let k2 = self.interaction(&comb(&u_half, 0.5 * h, &mul(&e_half, &k1)));
        let k3 = self.interaction(&comb(&u_half, 0.5 * h, &k2));
        let k4 = self.interaction(&comb(&mul(&e_full, u), h, &mul(&e_half, &k3)));
        let k23: Vec<Vec<Complex64>> = comb(&k2, 1.0, &k3);
        let mut out = mul(&e_full, u);
        out = comb(&out, h / 6.0, &mul(&e_full, &k1));
        out = comb(&out, h / 3.0, &mul(&e_half, &k23));
        comb(&out, h / 6.0, &k4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub dt: f64,
    /// Store every `sample_every`-th state (the final state is always stored).
    pub sample_every: usize,
    /// Separation floor as a fraction of the initial minimum separation.
    pub floor_fraction: f64,
    /// Absolute separation floor, applied together with the relative one.
    pub floor_absolute: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { dt: 1e-3, sample_every: 0, floor_fraction: 1e-3, floor_absolute: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub frames: Vec<FilamentEnsemble>,
    pub final_state: FilamentEnsemble,
    pub initial: ConservedSet,
    /// `max |H(t) − H(0)|/|H(0)|` over stored and final states.
    pub energy_drift: f64,
    /// `max |center(t) − center(0)|`.
    pub center_drift: f64,
    pub min_separation: f64,
    /// Set when the separation floor was breached; the trajectory stops there.
    pub breach: Option<Separation>,
}

impl Trajectory {
    /// Error if the run stopped on a separation breach.
    pub fn ensure_separated(&self) -> Result<()> {
        match self.breach {
            Some(b) => Err(Error::SeparationBreach { value: b.value, pair: b.pair, time: self.final_state.time }),
            None => Ok(()),
        }
    }
}

/// Integrates from `ens.time` to `ens.time + duration`.
pub fn integrate(ens: &FilamentEnsemble, duration: f64, options: &IntegrateOptions) -> Result<Trajectory> {
    if !(options.dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidParameter("time step and duration must be positive".into()));
    }
    let stepper = Stepper { modes: ens.modes, tf: Transforms::new(ens.grid_size()) };
    let initial = invariants(ens, None);
    let start = min_separation(ens);
    let floor = (options.floor_fraction * start.value).max(options.floor_absolute);
    let steps = (duration / options.dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { duration / steps as f64 };
    let mut state = ens.clone();
    let mut frames = vec![ens.clone()];
    let (mut energy_drift, mut center_drift, mut min_sep) = (0.0f64, 0.0f64, start.value);
    let h0 = initial.h_total.abs().max(f64::MIN_POSITIVE);
    let record = |s: &FilamentEnsemble, e: &mut f64, c: &mut f64| {
        let inv = invariants(s, None);
        *e = e.max((inv.h_total - initial.h_total).abs() / h0);
        *c = c.max((inv.center - initial.center).norm());
    };
    let mut breach = if !(start.value > floor) { Some(start) } else { None };
    for step in 0..steps {
        if breach.is_some() {
            break;
        }
        state.coeffs = stepper.step(&state.coeffs, h);
        state.time = ens.time + (step + 1) as f64 * h;
        let sep = min_separation(&state);
        min_sep = min_sep.min(sep.value);
        if !(sep.value > floor) {
            breach = Some(sep);
        }
        if options.sample_every > 0 && (step + 1) % options.sample_every == 0 {
            record(&state, &mut energy_drift, &mut center_drift);
            frames.push(state.clone());
        }
    }
    if breach.is_none() {
        record(&state, &mut energy_drift, &mut center_drift);
    }
    Ok(Trajectory { frames, final_state: state, initial, energy_drift, center_drift, min_separation: min_sep, breach })
}

/// `sup_{j,s} |e^{−iωT}u_j(T, s) − u_j(0, s)|` after one period `T = 2π/Ω`.
pub fn periodicity_defect(wave: &StandingWave, modes: usize, steps: usize) -> Result<(f64, Trajectory)> {
    let start = wave.ensemble(0.0, modes)?;
    let period = 2.0 * PI / wave.big_omega;
    let traj = integrate(&start, period, &IntegrateOptions { dt: period / steps as f64, ..Default::default() })?;
    traj.ensure_separated()?;
    let rot = Complex64::from_polar(1.0, -wave.omega * period);
    let end = traj.final_state.grid_values();
    let begin = start.grid_values();
    let defect = end
        .iter()
        .zip(&begin)
        .flat_map(|(e, b)| e.iter().zip(b).map(move |(x, y)| (rot * x - y).norm()))
        .fold(0.0, f64::max);
    Ok((defect, traj))
}

/// `e^{−iα²t}e^{iαs}u_j(t, s − 2αt)` applied to an ensemble at time `t = ens.time`.
pub fn galilean_transform(ens: &FilamentEnsemble, alpha: i64) -> Result<FilamentEnsemble> {
    let n = ens.grid_size();
    let t = ens.time;
    let mut out = ens.clone();
    let scale = ens.coeffs.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    for (c, o) in ens.coeffs.iter().zip(out.coeffs.iter_mut()) {
        o.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (i, x) in c.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            let m = frequency(i, n);
            let target = m + alpha;
            if target.unsigned_abs() as usize > ens.modes {
                if x.norm() <= 1e-14 * scale {
                    continue;
                }
                return Err(Error::InvalidParameter(format!("Galilean shift {alpha} leaves the mode range")));
            }
            let phase = -(alpha * alpha) as f64 * t - 2.0 * alpha as f64 * m as f64 * t;
            let idx = if target >= 0 { target as usize } else { (n as i64 + target) as usize };
            o[idx] = x * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(out)
}

/// Largest coefficient difference between two ensembles.
pub fn ensemble_distance(a: &FilamentEnsemble, b: &FilamentEnsemble) -> f64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}
