//! Range-equation solver on doubling Fourier balls, with excision bookkeeping.
//!
//! The amplitude `r` and frequency `Ω` are inputs; the unknown is the range part
//! `w ⟂ e_{1,1,−1}(Ω)` of `u = r e_{1,1,−1}(Ω) + w`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{annulus, build_lattice, LatticeSite, NormParams, SymmetricField};
use crate::operator::{
    assemble_hamiltonian, assemble_preconditioner, invert_block, min_abs_eigenvalue, residual, restrict_block,
    weighted_norm, Decomposition, PreconditionerNorms,
};
use crate::spectrum::{cluster_radius, eigenvalue, omega0, Convention, EigenBasis, KERNEL_SITE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSchedule {
    pub l0: usize,
    pub n_max: usize,
    pub beta: f64,
    pub sigma0: f64,
    pub s_weight: f64,
    pub kappa: f64,
    /// Singular threshold.
    pub d0: f64,
    /// `C` in the excision half-width `C d_n / L_n`.
    pub band_constant: f64,
    /// Abort with "defect too large" when `‖K_n‖_σ > 3/4`.
    pub enforce_defect: bool,
    /// Use the dense inverse of `H_{E_n}` instead of the preconditioner (oracle runs).
    pub dense_inverse: bool,
    /// Compare the preconditioned inverse with the dense inverse at each stage.
    pub verify_inverse: bool,
    /// Residual target on the final ball.
    pub tol: f64,
}

impl Default for SolverSchedule {
    fn default() -> Self {
        SolverSchedule {
            l0: 8,
            n_max: 2,
            beta: 2.0,
            sigma0: 0.1,
            s_weight: 2.0,
            kappa: 1.5,
            d0: 0.05,
            band_constant: 4.0,
            enforce_defect: true,
            dense_inverse: false,
            verify_inverse: false,
            tol: 1e-10,
        }
    }
}

impl SolverSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.l0 < 3 {
            return bad("L0 must be at least 3 so the ball contains (1,1)");
        }
        if !(self.beta > 1.5) {
            return bad("beta must exceed 3/2");
        }
        if !(self.sigma0 > 0.0) || !(self.s_weight > 1.0) {
            return bad("sigma0 > 0 and s_weight > 1 required");
        }
        if !(self.kappa > 1.0 && self.kappa < 2.0) {
            return bad("kappa must lie in (1,2)");
        }
        if !(self.d0 > 0.0) || !(self.band_constant > 0.0) || !(self.tol > 0.0) {
            return bad("d0, band constant and tolerance must be positive");
        }
        if self.n_max > 16 {
            return bad("n_max too large");
        }
        Ok(())
    }

    /// `L_n = 2ⁿ L₀`.
    pub fn radius(&self, n: usize) -> usize {
        self.l0 << n
    }

    /// `d_n = L_n^{−β}`.
    pub fn d(&self, n: usize) -> f64 {
        (self.radius(n) as f64).powf(-self.beta)
    }

    /// `γ_n = σ₀/2^{n+2}`.
    pub fn gamma(&self, n: usize) -> f64 {
        self.sigma0 / 2f64.powi(n as i32 + 2)
    }

    /// `σ_n = σ₀ − Σ_{m≤n} 2γ_m`.
    pub fn sigma(&self, n: usize) -> f64 {
        self.sigma0 - (1..=n).map(|m| 2.0 * self.gamma(m)).sum::<f64>()
    }

    pub fn ell(&self, n: usize) -> usize {
        cluster_radius(self.radius(n))
    }

    pub fn norm(&self, n: usize) -> NormParams {
        NormParams { sigma: self.sigma(n), s_weight: self.s_weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    pub radius: usize,
    pub sites: usize,
    pub residual_before: f64,
    pub residual_after: f64,
    pub dw_norm: f64,
    pub norms: Option<PreconditionerNorms>,
    pub singular: Vec<LatticeSite>,
    pub min_cluster_eigenvalue: Option<f64>,
    /// `‖G_pre − H⁻¹‖_σ / ‖H⁻¹‖_σ`.
    pub inverse_mismatch: Option<f64>,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SolveDiagnostics {
    pub stages: Vec<StageDiagnostics>,
    pub kappa_fit: Option<f64>,
    pub final_residual: f64,
    pub excisions: Vec<(usize, usize, usize)>,
}

/// `r e_{1,1,−1}(Ω)` on the given radius.
pub fn kernel_profile(r: f64, big_omega: f64, omega: f64, radius: usize) -> SymmetricField {
    EigenBasis::new(big_omega, omega, Convention::Physical).basis_field(KERNEL_SITE, radius).scale(r)
}

/// Removes the `e_{1,1,−1}(Ω)` component.
pub fn project_out_kernel(w: &SymmetricField, big_omega: f64, omega: f64) -> SymmetricField {
    let basis = EigenBasis::new(big_omega, omega, Convention::Physical);
    let c = basis.coord(w, KERNEL_SITE);
    w.axpy(-c, &basis.basis_field(KERNEL_SITE, w.radius()))
}

/// `P_{B\N} f` as a field on `radius`.
pub fn range_residual(u: &SymmetricField, big_omega: f64, omega: f64, radius: usize) -> Result<SymmetricField> {
    let f = residual(u, big_omega, omega, radius)?;
    Ok(project_out_kernel(&f, big_omega, omega))
}

fn range_sites(radius: usize) -> Vec<LatticeSite> {
    build_lattice(radius).into_iter().filter(|s| *s != KERNEL_SITE).collect()
}

/// Window `|Ω−Ω₀| < m/(2L₀)` with `m = min_{B₀\N} |λ(Ω₀)|`; inside it every `|λ| ≥ m/2`.
pub fn initial_window(omega: f64, l0: usize) -> f64 {
    let w0 = omega0(omega);
    let m = range_sites(l0)
        .iter()
        .map(|s| eigenvalue(*s, w0, omega).abs())
        .fold(f64::INFINITY, f64::min);
    m / (2.0 * l0 as f64)
}

/// Damped Newton for `P_{E} f(v + w) = 0` with dense Jacobians on `E = B_radius \ N`.
fn ball_newton(
    r: f64,
    big_omega: f64,
    omega: f64,
    radius: usize,
    guess: &SymmetricField,
    p: &NormParams,
    tol: f64,
) -> Result<SymmetricField> {
    let sites = range_sites(radius);
    let basis = EigenBasis::new(big_omega, omega, Convention::Physical);
    let v = kernel_profile(r, big_omega, omega, radius);
    let mut w = project_out_kernel(&guess.with_radius(radius), big_omega, omega);
    let mut res = range_residual(&v.add(&w), big_omega, omega, radius)?;
    let mut norm = res.sigma_norm(p);
    for _ in 0..40 {
        if norm <= tol {
            return Ok(w);
        }
        let h = assemble_hamiltonian(&v.add(&w), big_omega, omega, &sites)?;
        let rhs = DVector::from_vec(basis.coords(&res, &sites));
        let delta = h
            .matrix
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoContraction("singular Jacobian on the initial ball".into()))?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=5 {
            let trial = w.axpy(-step, &basis.field(&sites, delta.as_slice(), radius));
            let tres = range_residual(&v.add(&trial), big_omega, omega, radius)?;
            let tnorm = tres.sigma_norm(p);
            if tnorm < norm || tnorm <= tol {
                w = trial;
                res = tres;
                norm = tnorm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoContraction(format!("Newton stall on the initial ball (residual {norm:e})")));
        }
    }
    if norm <= tol {
        Ok(w)
    } else {
        Err(Error::NoContraction(format!("initial step did not converge (residual {norm:e})")))
    }
}

/// Solves `P_{B₀\N} f(v(r) + w₀; Ω) = 0`.
pub fn initial_step(r: f64, big_omega: f64, omega: f64, schedule: &SolverSchedule) -> Result<SymmetricField> {
    initial_step_from(r, big_omega, omega, schedule, &SymmetricField::zeros(schedule.l0))
}

pub fn initial_step_from(
    r: f64,
    big_omega: f64,
    omega: f64,
    schedule: &SolverSchedule,
    guess: &SymmetricField,
) -> Result<SymmetricField> {
    schedule.validate()?;
    if r == 0.0 {
        return Ok(SymmetricField::zeros(schedule.l0));
    }
    let window = initial_window(omega, schedule.l0);
    let offset = (big_omega - omega0(omega)).abs();
    if offset >= window {
        return Err(Error::InitialWindow { offset, window });
    }
    ball_newton(r, big_omega, omega, schedule.l0, guess, &schedule.norm(0), 1e-13)
}

fn singular_in_annulus(big_omega: f64, omega: f64, inner: usize, outer: usize, d0: f64) -> Vec<LatticeSite> {
    annulus(inner, outer)
        .into_iter()
        .filter(|s| s.l < 0 && *s != KERNEL_SITE && eigenvalue(*s, big_omega, omega).abs() <= d0)
        .collect()
}

fn excised(site: Option<LatticeSite>, stage: usize) -> Error {
    let s = site.unwrap_or(KERNEL_SITE);
    Error::Excised { j: s.j, k: s.k, stage }
}

/// One Newton correction `δw = −G P_{E} f` on `E = B_n \ N`.
#[allow(clippy::too_many_arguments)]
fn stage_step(
    r: f64,
    big_omega: f64,
    omega: f64,
    schedule: &SolverSchedule,
    n: usize,
    w: &SymmetricField,
) -> Result<(SymmetricField, StageDiagnostics)> {
    let radius = schedule.radius(n);
    let prev = schedule.radius(n - 1);
    let p = schedule.norm(n);
    let sites = range_sites(radius);
    let basis = EigenBasis::new(big_omega, omega, Convention::Physical);
    let v = kernel_profile(r, big_omega, omega, radius);
    let w = w.with_radius(radius);
    let res = range_residual(&v.add(&w), big_omega, omega, radius)?;
    let before = res.sigma_norm(&p);
    let h = assemble_hamiltonian(&v.add(&w), big_omega, omega, &sites)?;
    let singular = singular_in_annulus(big_omega, omega, prev, radius, schedule.d0);
    let ell = schedule.ell(n);
    let dec = Decomposition::new(&sites, prev, singular.iter().map(|s| vec![*s]).collect(), ell)?;
    let d_n = schedule.d(n);
    let mut min_cluster: Option<f64> = None;
    for c in &dec.neighborhoods {
        let block = restrict_block(&h, c, c)?;
        let m = min_abs_eigenvalue(&block.matrix);
        min_cluster = Some(min_cluster.map_or(m, |x| x.min(m)));
    }
    let rhs = DVector::from_vec(basis.coords(&res, &sites));
    let (delta, norms, mismatch) = if schedule.dense_inverse {
        let g = invert_block(&h, d_n).map_err(|e| match e {
            Error::SpectrumTooClose { site, .. } => excised(site, n),
            e => e,
        })?;
        (g.apply(&rhs), None, None)
    } else {
        let pc = assemble_preconditioner(&h, &dec, d_n, d_n, &p, schedule.enforce_defect).map_err(|e| match e {
            Error::SpectrumTooClose { site, .. } => excised(site, n),
            e => e,
        })?;
        let delta = pc.solve(&rhs).ok_or(Error::DefectTooLarge(pc.norms.k_norm))?;
        let mismatch = if schedule.verify_inverse {
            let g = pc.inverse().ok_or(Error::DefectTooLarge(pc.norms.k_norm))?;
            let dense = h
                .matrix
                .clone()
                .lu()
                .try_inverse()
                .ok_or_else(|| Error::NoContraction("dense inverse failed".into()))?;
            let diff: DMatrix<f64> = &g.matrix - &dense;
            Some(weighted_norm(&diff, &sites, &sites, &p) / weighted_norm(&dense, &sites, &sites, &p))
        } else {
            None
        };
        (delta, Some(pc.norms), mismatch)
    };
    let dw = basis.field(&sites, delta.as_slice(), radius);
    let mut step = 1.0;
    for halvings in 0..=5 {
        let trial = w.axpy(-step, &dw);
        let after = range_residual(&v.add(&trial), big_omega, omega, radius)?.sigma_norm(&p);
        if after < before || after <= schedule.tol * 1e-2 {
            let diag = StageDiagnostics {
                stage: n,
                radius,
                sites: sites.len(),
                residual_before: before,
                residual_after: after,
                dw_norm: dw.scale(step).sigma_norm(&p),
                norms,
                singular,
                min_cluster_eigenvalue: min_cluster,
                inverse_mismatch: mismatch,
                halvings,
            };
            return Ok((trial, diag));
        }
        step *= 0.5;
    }
    Err(Error::NoContraction(format!("stage {n}: residual {before:e} not reduced")))
}

/// Staged Newton iteration from `w₀` through the balls `B_1, …, B_{n_max}`.
pub fn iterate(
    r: f64,
    big_omega: f64,
    omega: f64,
    schedule: &SolverSchedule,
    w0: &SymmetricField,
) -> Result<(SymmetricField, SolveDiagnostics)> {
    schedule.validate()?;
    let final_radius = schedule.radius(schedule.n_max);
    let mut diag = SolveDiagnostics::default();
    if r == 0.0 {
        return Ok((SymmetricField::zeros(final_radius), diag));
    }
    let p0 = schedule.norm(0);
    let mut w = w0.with_radius(schedule.l0);
    let stage0 = StageDiagnostics {
        stage: 0,
        radius: schedule.l0,
        sites: range_sites(schedule.l0).len(),
        residual_before: f64::NAN,
        residual_after: range_residual(&kernel_profile(r, big_omega, omega, schedule.l0).add(&w), big_omega, omega, schedule.l0)?
            .sigma_norm(&p0),
        dw_norm: w.sigma_norm(&p0),
        norms: None,
        singular: vec![],
        min_cluster_eigenvalue: None,
        inverse_mismatch: None,
        halvings: 0,
    };
    diag.stages.push(stage0);
    let mut n = 1;
    let mut polish = 0;
    while n <= schedule.n_max {
        let (next, sd) = match stage_step(r, big_omega, omega, schedule, n, &w) {
            Ok(x) => x,
            Err(Error::Excised { j, k, stage }) => {
                diag.excisions.push((j, k, stage));
                return Err(Error::Excised { j, k, stage });
            }
            Err(e) => return Err(e),
        };
        w = next;
        let after = sd.residual_after;
        diag.stages.push(sd);
        if n == schedule.n_max && after > schedule.tol && polish < 4 {
            polish += 1;
            continue;
        }
        n += 1;
    }
    let pf = schedule.norm(schedule.n_max);
    let v = kernel_profile(r, big_omega, omega, final_radius);
    let f = residual(&v.add(&w), big_omega, omega, final_radius)?;
    diag.final_residual = project_out_kernel(&f, big_omega, omega).sigma_norm(&pf);
    diag.kappa_fit = kappa_fit(&diag.stages.iter().map(|s| s.dw_norm).collect::<Vec<_>>());
    if diag.final_residual > schedule.tol {
        return Err(Error::NoContraction(format!("final residual {:e}", diag.final_residual)));
    }
    Ok((w, diag))
}

/// Fits `ln ln(‖δw₀‖/‖δw_n‖) ≈ c + n ln κ̂` over stages with a nonzero correction.
pub fn kappa_fit(dw: &[f64]) -> Option<f64> {
    let base = *dw.first()?;
    let pts: Vec<(f64, f64)> = dw
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &d)| d > 0.0 && d < base)
        .map(|(n, &d)| (n as f64, (base / d).ln().ln()))
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((num / den).exp())
}

/// `⟨f(v(r)+w; Ω), e_{1,1,−1}(Ω)⟩`.
pub fn kernel_component(r: f64, big_omega: f64, omega: f64, w: &SymmetricField) -> Result<f64> {
    let radius = w.radius().max(3);
    let u = kernel_profile(r, big_omega, omega, radius).add(&w.with_radius(radius));
    let f = residual(&u, big_omega, omega, radius)?;
    Ok(EigenBasis::new(big_omega, omega, Convention::Physical).coord(&f, KERNEL_SITE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcisionRecord {
    pub site: (usize, usize),
    pub stage: usize,
    /// Samples `(r, Ω_z(r))`.
    pub center: Vec<(f64, f64)>,
    pub half_width: f64,
    pub doubled_half_width: f64,
    /// `|∂_Ω e|` at the root for the largest sampled `r`.
    pub slope: f64,
    /// `|∂_Ω e| / L_n`.
    pub slope_constant: f64,
    /// `max |Ω_z(r) − Ω_z(0)| L_n / r²`.
    pub flatness_constant: f64,
    /// Linear coefficient of a fit `Ω_z(r) − Ω_z(0) ≈ αr + βr²`.
    pub linear_coefficient: f64,
}

impl ExcisionRecord {
    pub fn center_at(&self, r: f64) -> f64 {
        let c = &self.center;
        if r <= c[0].0 {
            return c[0].1;
        }
        for w in c.windows(2) {
            if r <= w[1].0 {
                let t = (r - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        c[c.len() - 1].1
    }

    pub fn contains(&self, r: f64, big_omega: f64, doubled: bool) -> bool {
        let hw = if doubled { self.doubled_half_width } else { self.half_width };
        (big_omega - self.center_at(r)).abs() < hw
    }
}

/// Local eigenvalue of `H_{C(x)}` continuing `λ_x`, at the state solved on `B₀`.
fn local_eigenvalue(
    site: LatticeSite,
    r: f64,
    big_omega: f64,
    omega: f64,
    schedule: &SolverSchedule,
    reach: usize,
) -> Result<f64> {
    let w = if r == 0.0 {
        SymmetricField::zeros(schedule.l0)
    } else {
        ball_newton(r, big_omega, omega, schedule.l0, &SymmetricField::zeros(schedule.l0), &schedule.norm(0), 1e-14)?
    };
    let u = kernel_profile(r, big_omega, omega, schedule.l0).add(&w);
    let sites: Vec<LatticeSite> = build_neighborhood(site, reach);
    let h = assemble_hamiltonian(&u, big_omega, omega, &sites)?;
    let target = eigenvalue(site, big_omega, omega);
    let eig = nalgebra::SymmetricEigen::new(h.matrix.clone());
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(target))
}

/// Lattice sites within ℓ¹ distance `reach` of `site`.
pub fn build_neighborhood(site: LatticeSite, reach: usize) -> Vec<LatticeSite> {
    let mut out = Vec::new();
    let (j0, k0) = (site.j as i64, site.k as i64);
    let reach = reach as i64;
    for dj in -reach..=reach {
        for dk in -(reach - dj.abs())..=(reach - dj.abs()) {
            let (j, k) = (j0 + dj, k0 + dk);
            if j < 0 || k < 0 {
                continue;
            }
            let (j, k) = (j as usize, k as usize);
            let s = LatticeSite { j, k, l: 1 };
            if s != KERNEL_SITE {
                out.push(s);
            }
            let s = LatticeSite { j, k, l: -1 };
            if j >= 1 && s != KERNEL_SITE {
                out.push(s);
            }
        }
    }
    out.sort();
    out
}

/// Neighbourhood radius used when tracing `Ω_z(r)`: `min(ℓ_n, 4)`.
pub fn trace_reach(schedule: &SolverSchedule, n: usize) -> usize {
    schedule.ell(n).min(4)
}

/// Singular sites of annulus `n` near the branch frequency band `[Ω₀ + min(0,Ω₂)r², Ω₀ + max(0,Ω₂)r²]`.
pub fn stage_candidates(omega: f64, r_max: f64, n: usize, omega2: f64, schedule: &SolverSchedule) -> Vec<LatticeSite> {
    let w0 = omega0(omega);
    let spread = (omega2 * r_max * r_max).abs();
    let inner = if n == 0 { 0 } else { schedule.radius(n - 1) };
    annulus(inner, schedule.radius(n))
        .into_iter()
        .filter(|s| {
            s.l < 0
                && *s != KERNEL_SITE
                && eigenvalue(*s, w0, omega).abs()
                    <= schedule.d0 + crate::spectrum::eigenvalue_slope(*s, w0, omega).abs() * spread
        })
        .collect()
}

/// Traces `Ω_z(r)` for every singular site of annulus `n` and records the bands.
pub fn excision_neighborhoods(
    omega: f64,
    r_max: f64,
    n: usize,
    omega2: f64,
    schedule: &SolverSchedule,
    samples: usize,
) -> Result<Vec<ExcisionRecord>> {
    let ln = schedule.radius(n) as f64;
    let reach = trace_reach(schedule, n);
    let mut out = Vec::new();
    for site in stage_candidates(omega, r_max, n, omega2, schedule) {
        let start = crate::spectrum::resonance_frequency(site.j, site.k, omega)?;
        let mut center = Vec::new();
        let mut slope = 0.0;
        let mut guess = start;
        for i in 0..=samples {
            let r = r_max * i as f64 / samples as f64;
            let e = |om: f64| local_eigenvalue(site, r, om, omega, schedule, reach);
            let (root, s) = secant_root(e, guess, 1e-7 / ln)?;
            center.push((r, root));
            slope = s;
            guess = root;
        }
        let z0 = center[0].1;
        let flatness = center
            .iter()
            .skip(1)
            .map(|&(r, z)| (z - z0).abs() * ln / (r * r))
            .fold(0.0, f64::max);
        let linear = fit_linear_quadratic(&center);
        let half_width = schedule.band_constant * schedule.d(n) / ln;
        out.push(ExcisionRecord {
            site: (site.j, site.k),
            stage: n,
            center,
            half_width,
            doubled_half_width: 2.0 * half_width,
            slope: slope.abs(),
            slope_constant: slope.abs() / ln,
            flatness_constant: flatness,
            linear_coefficient: linear,
        });
    }
    Ok(out)
}

fn secant_root(f: impl Fn(f64) -> Result<f64>, x0: f64, h: f64) -> Result<(f64, f64)> {
    let mut a = x0;
    let mut fa = f(a)?;
    let mut b = x0 + h;
    let mut fb = f(b)?;
    for _ in 0..60 {
        if fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        let fc = f(c)?;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if fb.abs() < 1e-15 || (b - a).abs() < 1e-15 {
            break;
        }
    }
    let slope = (f(b + h)? - f(b - h)?) / (2.0 * h);
    if fb.abs() > 1e-10 {
        return Err(Error::NewtonFailure(format!("eigenvalue root not found near Ω = {x0}")));
    }
    Ok((b, slope))
}

/// Least-squares `α` in `z(r) − z(0) ≈ αr + βr²`.
fn fit_linear_quadratic(c: &[(f64, f64)]) -> f64 {
    let z0 = c[0].1;
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r, z) in &c[1..] {
        let y = z - z0;
        s11 += r * r;
        s12 += r * r * r;
        s22 += r.powi(4);
        t1 += r * y;
        t2 += r * r * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det == 0.0 {
        return 0.0;
    }
    (t1 * s22 - t2 * s12) / det
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub r0: f64,
    pub empirical_measure: f64,
    pub excluded_fraction: f64,
    /// Per-site constant `C = max ℓ √|Ω₂| √L_n / d_n` with `ℓ = √(2h/|Ω₂|)`, the longest
    /// `r`-set a band of doubled half-width `h` can cut from the branch parabola.
    pub site_constant: f64,
    /// The same ratio with `ℓ` the measured excluded length of each band.
    pub measured_constant: f64,
    pub c_beta: f64,
    /// `r₀(1 − r₀C_β)`.
    pub lower_bound: f64,
    pub per_site: Vec<((usize, usize), usize, f64, f64)>,
}

/// Measures `{r ≤ r₀ : (r, Ω(r)) outside every doubled band}` by a fine sweep.
pub fn cantor_measure(
    r0: f64,
    schedule: &SolverSchedule,
    omega2: f64,
    branch: impl Fn(f64) -> f64,
    excisions: &[ExcisionRecord],
    stages: usize,
) -> Result<MeasureReport> {
    if omega2.abs() < 1e-10 {
        return Err(Error::DegenerateBranch(omega2));
    }
    let samples = 200_000usize;
    let dr = r0 / samples as f64;
    let mut excluded = vec![false; samples];
    let mut per_site = Vec::new();
    let mut worst_case: f64 = 0.0;
    for rec in excisions {
        let mut len = 0.0;
        for (i, flag) in excluded.iter_mut().enumerate() {
            let r = (i as f64 + 0.5) * dr;
            if rec.contains(r, branch(r), true) {
                *flag = true;
                len += dr;
            }
        }
        let ln = schedule.radius(rec.stage) as f64;
        let bound_unit = schedule.d(rec.stage) / ln.sqrt() / omega2.abs().sqrt();
        per_site.push((rec.site, rec.stage, len, bound_unit));
        worst_case = worst_case.max((2.0 * rec.doubled_half_width / omega2.abs()).sqrt() / bound_unit);
    }
    let excluded_len = excluded.iter().filter(|x| **x).count() as f64 * dr;
    let measured_constant = per_site.iter().map(|p| p.2 / p.3).fold(0.0, f64::max);
    let site_constant = worst_case.max(measured_constant);
    let sum: f64 = (1..=stages).map(|n| (schedule.radius(n) as f64).powf(1.5 - schedule.beta)).sum();
    let c_beta = site_constant / omega2.abs().sqrt() * sum;
    Ok(MeasureReport {
        r0,
        empirical_measure: r0 - excluded_len,
        excluded_fraction: excluded_len / r0,
        site_constant,
        measured_constant,
        c_beta,
        lower_bound: r0 * (1.0 - r0 * c_beta),
        per_site,
    })
}
