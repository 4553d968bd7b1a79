//! The kernel (bifurcation) equation along the branch, the perturbation series
//! around the bifurcation point and curvature fits of solved branches.
//!
//! Two conventions are carried side by side (see [`Convention`]). The printed
//! curvature formula is reproduced exactly in [`Convention::Printed`]; the branch
//! of the residual map actually solved here follows [`Convention::Physical`], whose
//! curvature is [`omega2_physical`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeSite, SymmetricField};
use crate::nash_moser::{
    excision_neighborhoods, initial_step, iterate, kernel_component, kernel_profile, ExcisionRecord, SolveDiagnostics,
    SolverSchedule,
};
use crate::operator::residual;
use crate::spectrum::{diophantine_margin, eigenpair, omega0, Convention, DiophantineParams, EigenBasis, KERNEL_SITE};

/// Printed curvature `(1/6)·ω²/((ω+1)(ω+2)√(2ω+1))·(4ω³+29ω²+33ω−6)`.
pub fn omega2_closed_form(omega: f64) -> f64 {
    let w = omega;
    w * w / ((w + 1.0) * (w + 2.0) * (2.0 * w + 1.0).sqrt()) * exceptional_cubic(w) / 6.0
}

/// Curvature of the solved branch, `−ω²(ω+14)/(6(ω+1)(ω+2)√(2ω+1))`.
pub fn omega2_physical(omega: f64) -> f64 {
    let w = omega;
    -w * w * (w + 14.0) / (6.0 * (w + 1.0) * (w + 2.0) * (2.0 * w + 1.0).sqrt())
}

/// Branch curvature in the given convention.
pub fn omega2_for(omega: f64, conv: Convention) -> f64 {
    match conv {
        Convention::Physical => omega2_physical(omega),
        Convention::Printed => omega2_closed_form(omega),
    }
}

/// `4ω³ + 29ω² + 33ω − 6`.
pub fn exceptional_cubic(omega: f64) -> f64 {
    ((4.0 * omega + 29.0) * omega + 33.0) * omega - 6.0
}

/// The unique positive root of `4ω³ + 29ω² + 33ω − 6`.
///
/// The coefficients change sign once, so there is exactly one positive root; it is
/// bracketed in `(0.1, 0.2)`, narrowed by bisection and polished by Newton.
pub fn exceptional_omega0() -> f64 {
    let (mut lo, mut hi) = (0.1, 0.2);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if exceptional_cubic(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..5 {
        let d = (12.0 * x + 58.0) * x + 33.0;
        let step = exceptional_cubic(x) / d;
        x -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    x
}

/// Coefficients of `u = r u₁ + r² u₂ + …`, `Ω = Ω₀ + rΩ₁ + r²Ω₂ + …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCoefficients {
    pub omega: f64,
    pub convention: Convention,
    pub big_omega0: f64,
    /// Kernel eigenvector `(a, b)`.
    pub a: f64,
    pub b: f64,
    /// Eigenvectors of the `(2,2)` block, eigenvalues `4 + ω ± Q`.
    pub a_plus: f64,
    pub b_plus: f64,
    pub a_minus: f64,
    pub b_minus: f64,
    /// `√(ω² + 8ω + 4)`.
    pub q: f64,
    #[serde(skip)]
    pub u1: Option<SymmetricField>,
    #[serde(skip)]
    pub u2: Option<SymmetricField>,
    pub omega1: f64,
    pub omega2: f64,
    /// `⟨i∂_t u₁, u₁⟩`.
    pub dt_pairing: f64,
    /// `⟨ū₁², u₁⟩`, zero by parity.
    pub quadratic_pairing: f64,
    /// `⟨ū₁³, u₁⟩`.
    pub cubic_pairing: f64,
    /// `⟨L⁻¹u₁², u₁²⟩` and its `j = 0` and `j = 2` parts.
    pub resolvent_pairing: f64,
    pub resolvent_j0: f64,
    pub resolvent_j2: f64,
    /// Sup-norm residual of the order-`r²` equation satisfied by `u₂`.
    pub order2_residual: f64,
}

/// `L⁻¹g` on the sites of `radius`, excluding the kernel.
fn resolvent(g: &SymmetricField, basis: &EigenBasis, radius: usize) -> SymmetricField {
    let sites: Vec<LatticeSite> = build_lattice(radius).into_iter().filter(|s| *s != KERNEL_SITE).collect();
    let coords: Vec<f64> = sites.iter().map(|&s| basis.coord(g, s) / basis.pair(s).lambda).collect();
    basis.field(&sites, &coords, radius)
}

/// `L u` for the linear part in the given convention.
fn linear_part(u: &SymmetricField, big_omega: f64, omega: f64, conv: Convention) -> SymmetricField {
    let sign = match conv {
        Convention::Physical => -1.0,
        Convention::Printed => 1.0,
    };
    u.i_dt().scale(sign * big_omega).add(&u.neg_dss()).add(&u.add(&u.conj()).scale(omega))
}

/// Builds `u₁ = e_{1,1,−1}(Ω₀)` and `u₂`, and assembles every pairing by exact Fourier algebra.
///
/// Physical: `u₂ = ωL⁻¹ū₁²` and `Ω₂ = ω(⟨ū₁³,u₁⟩ − 2⟨ū₁ū₂,u₁⟩)/⟨i∂_t u₁,u₁⟩`.
/// Printed: `u₂ = conj(−ωL⁻¹u₁²)` and `Ω₂ = (ω/2ab)(⟨ū₁³,u₁⟩ + 2ω⟨L⁻¹u₁²,u₁²⟩)`.
pub fn perturbation_series(omega: f64, radius: usize, conv: Convention) -> Result<PerturbationCoefficients> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("ω must be positive, got {omega}")));
    }
    if radius < 5 {
        return Err(Error::InvalidParameter(format!(
            "truncation radius {radius} excludes the second harmonics (need at least 5)"
        )));
    }
    let w0 = omega0(omega);
    let basis = EigenBasis::new(w0, omega, conv);
    let kernel = eigenpair(KERNEL_SITE, w0, omega, conv);
    let [a, b] = kernel.vector;
    let plus = eigenpair(LatticeSite { j: 2, k: 2, l: 1 }, w0, omega, conv).vector;
    let minus = eigenpair(LatticeSite { j: 2, k: 2, l: -1 }, w0, omega, conv).vector;

    let u1 = basis.basis_field(KERNEL_SITE, radius);
    let u1c = u1.conj();
    let u1_sq = u1.multiply_exact(&u1).with_radius(radius);
    let u1c_sq = u1c.multiply_exact(&u1c).with_radius(radius);

    let dt_pairing = u1.i_dt().inner(&u1);
    let quadratic_pairing = u1c_sq.inner(&u1);
    let cubic_pairing = u1c_sq.multiply_exact(&u1c).inner(&u1);

    let inv_sq = resolvent(&u1_sq, &basis, radius);
    let part = |j: usize| {
        let mut g = SymmetricField::zeros(radius);
        for k in 0..radius {
            if j + k < radius {
                let (x, y) = u1_sq.get(j, k);
                g.set(j, k, x, y);
            }
        }
        resolvent(&g, &basis, radius).inner(&g)
    };
    let resolvent_pairing = inv_sq.inner(&u1_sq);
    let (resolvent_j0, resolvent_j2) = (part(0), part(2));

    let (u2, omega2, order2) = match conv {
        Convention::Physical => {
            let u2 = resolvent(&u1c_sq, &basis, radius).scale(omega);
            let cross = u1c.multiply_exact(&u2.conj()).inner(&u1);
            let omega2 = omega * (cubic_pairing - 2.0 * cross) / dt_pairing;
            let res = linear_part(&u2, w0, omega, conv).sub(&u1c_sq.scale(omega));
            (u2, omega2, res)
        }
        Convention::Printed => {
            let u2 = inv_sq.scale(-omega).conj();
            let omega2 = omega / (2.0 * a * b) * (cubic_pairing + 2.0 * omega * resolvent_pairing);
            let res = linear_part(&u2, w0, omega, conv).add(&u1c_sq.scale(omega));
            (u2, omega2, res)
        }
    };

    Ok(PerturbationCoefficients {
        omega,
        convention: conv,
        big_omega0: w0,
        a,
        b,
        a_plus: plus[0],
        b_plus: plus[1],
        a_minus: minus[0],
        b_minus: minus[1],
        q: (omega * omega + 8.0 * omega + 4.0).sqrt(),
        u1: Some(u1),
        u2: Some(u2),
        omega1: quadratic_pairing * omega / dt_pairing,
        omega2,
        dt_pairing,
        quadratic_pairing,
        cubic_pairing,
        resolvent_pairing,
        resolvent_j0,
        resolvent_j2,
        order2_residual: order2.max_abs(),
    })
}

/// One solved (or excised) point of the branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub r: f64,
    pub big_omega: f64,
    /// Range part on the final ball; absent for excised points.
    #[serde(skip)]
    pub w: Option<SymmetricField>,
    /// `‖P_{B_n} f(v(r) + w; Ω)‖_σ`, kernel component included.
    pub residual: f64,
    pub excised: bool,
    /// `(j, k, stage)` that triggered an excision, if any.
    pub excision: Option<(usize, usize, usize)>,
    pub w_norm: f64,
    pub kernel_iterations: usize,
    pub diagnostics: Option<SolveDiagnostics>,
}

impl BranchPoint {
    /// Full profile `u = r e_{1,1,−1}(Ω) + w`.
    pub fn profile(&self, omega: f64) -> Option<SymmetricField> {
        let w = self.w.as_ref()?;
        Some(kernel_profile(self.r, self.big_omega, omega, w.radius()).add(w))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub omega: f64,
    pub big_omega0: f64,
    pub diophantine_margin: f64,
    pub points: Vec<BranchPoint>,
    pub excisions: Vec<ExcisionRecord>,
}

/// Joint tolerance of the kernel equation: `|⟨f, e_N⟩| ≤ KERNEL_TOL`.
const KERNEL_TOL: f64 = 1e-13;

fn kernel_on_ball(r: f64, big_omega: f64, omega: f64, schedule: &SolverSchedule) -> Result<f64> {
    let w0 = initial_step(r, big_omega, omega, schedule)?;
    Ok(kernel_component(r, big_omega, omega, &w0)? / r)
}

/// Solves the kernel equation in `Ω` at fixed `r`, starting from `seed`.
///
/// A secant solve on the initial ball fixes `Ω` and the slope; the full staged
/// solve is then corrected by chord steps with that slope.
pub fn solve_point(r: f64, omega: f64, schedule: &SolverSchedule, seed: f64) -> Result<BranchPoint> {
    let final_radius = schedule.radius(schedule.n_max);
    if r == 0.0 {
        return Ok(BranchPoint {
            r,
            big_omega: omega0(omega),
            w: Some(SymmetricField::zeros(final_radius)),
            residual: 0.0,
            excised: false,
            excision: None,
            w_norm: 0.0,
            kernel_iterations: 0,
            diagnostics: None,
        });
    }
    if r < 0.0 {
        return Err(Error::InvalidParameter(format!("amplitude must be non-negative, got {r}")));
    }
    let h = 1e-6;
    let (mut x0, mut x1) = (seed, seed + h);
    let (mut g0, mut g1) = (kernel_on_ball(r, x0, omega, schedule)?, kernel_on_ball(r, x1, omega, schedule)?);
    let mut iterations = 2;
    for _ in 0..40 {
        if g1 == g0 || g1.abs() * r <= KERNEL_TOL * 1e-2 {
            break;
        }
        let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = kernel_on_ball(r, x1, omega, schedule)?;
        iterations += 1;
        if (x1 - x0).abs() < 1e-15 {
            break;
        }
    }
    let slope = (kernel_on_ball(r, x1 + h, omega, schedule)? - kernel_on_ball(r, x1 - h, omega, schedule)?) / (2.0 * h);
    if !(slope.abs() > 0.0) {
        return Err(Error::NewtonFailure("kernel equation has zero slope in Ω".into()));
    }

    let mut big = x1;
    let excised_point = |big: f64, j, k, stage, iterations| BranchPoint {
        r,
        big_omega: big,
        w: None,
        residual: f64::NAN,
        excised: true,
        excision: Some((j, k, stage)),
        w_norm: f64::NAN,
        kernel_iterations: iterations,
        diagnostics: None,
    };
    for _ in 0..8 {
        let w0 = initial_step(r, big, omega, schedule)?;
        let (w, diag) = match iterate(r, big, omega, schedule, &w0) {
            Ok(x) => x,
            Err(Error::Excised { j, k, stage }) => return Ok(excised_point(big, j, k, stage, iterations)),
            Err(e) => return Err(e),
        };
        iterations += 1;
        let g = kernel_component(r, big, omega, &w)?;
        if g.abs() <= KERNEL_TOL {
            let p = schedule.norm(schedule.n_max);
            let u = kernel_profile(r, big, omega, final_radius).add(&w);
            let res = residual(&u, big, omega, final_radius)?.sigma_norm(&p);
            if res > schedule.tol {
                return Err(Error::NoContraction(format!("joint residual {res:e} at r = {r}")));
            }
            return Ok(BranchPoint {
                r,
                big_omega: big,
                w_norm: w.sigma_norm(&p),
                w: Some(w),
                residual: res,
                excised: false,
                excision: None,
                kernel_iterations: iterations,
                diagnostics: Some(diag),
            });
        }
        big -= g / r / slope;
    }
    Err(Error::NewtonFailure(format!("kernel equation did not converge at r = {r}")))
}

/// Excision bands of stages `1..=n_max` along the branch up to `r_max`.
pub fn branch_excisions(omega: f64, r_max: f64, schedule: &SolverSchedule) -> Result<Vec<ExcisionRecord>> {
    let omega2 = omega2_physical(omega);
    let mut out = Vec::new();
    for n in 1..=schedule.n_max {
        out.extend(excision_neighborhoods(omega, r_max, n, omega2, schedule, 8)?);
    }
    Ok(out)
}

/// Solves the branch on `r_grid` with the bands of [`branch_excisions`].
pub fn solve_branch(omega: f64, r_grid: &[f64], schedule: &SolverSchedule) -> Result<Branch> {
    let r_max = r_grid.iter().copied().fold(0.0, f64::max);
    let excisions = if r_max > 0.0 { branch_excisions(omega, r_max, schedule)? } else { Vec::new() };
    solve_branch_with(omega, r_grid, schedule, excisions)
}

/// Solves the branch on `r_grid`; points inside a doubled band are marked excised.
pub fn solve_branch_with(
    omega: f64,
    r_grid: &[f64],
    schedule: &SolverSchedule,
    excisions: Vec<ExcisionRecord>,
) -> Result<Branch> {
    schedule.validate()?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("ω must be positive, got {omega}")));
    }
    let omega2 = omega2_physical(omega);
    if omega2.abs() < 1e-10 {
        return Err(Error::DegenerateBranch(omega2));
    }
    let w0 = omega0(omega);
    let solve = |&r: &f64| -> Result<BranchPoint> {
        let mut point = solve_point(r, omega, schedule, w0 + omega2 * r * r)?;
        if r > 0.0 && !point.excised && excisions.iter().any(|e| e.contains(r, point.big_omega, true)) {
            let rec = excisions.iter().find(|e| e.contains(r, point.big_omega, true)).unwrap();
            point.excised = true;
            point.excision = Some((rec.site.0, rec.site.1, rec.stage));
            point.w = None;
        }
        Ok(point)
    };
    #[cfg(feature = "parallel")]
    let points: Result<Vec<BranchPoint>> = {
        use rayon::prelude::*;
        r_grid.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let points: Result<Vec<BranchPoint>> = r_grid.iter().map(solve).collect();
    Ok(Branch {
        omega,
        big_omega0: w0,
        diophantine_margin: diophantine_margin(omega, &DiophantineParams::default())?,
        points: points?,
        excisions,
    })
}

/// Largest amplitude used by [`fit_curvature`].
pub const FIT_R_MAX: f64 = 0.05;

/// Least-squares fit of `(Ω(r) − Ω₀)/r² ≈ c₀ + c₁r` over non-excised points with
/// `0 < r ≤ 0.05`; returns `c₀`.
pub fn fit_curvature(points: &[BranchPoint], big_omega0: f64) -> Result<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.excised && p.r > 0.0 && p.r <= FIT_R_MAX + 1e-15)
        .map(|p| (p.r, (p.big_omega - big_omega0) / (p.r * p.r)))
        .collect();
    if data.len() < 4 {
        return Err(Error::InsufficientPoints(format!(
            "curvature fit needs 4 non-excised points with r ≤ {FIT_R_MAX}, got {}",
            data.len()
        )));
    }
    let m = data.len() as f64;
    let (sx, sy) = data.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = data.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = data.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(my - slope * mx)
}

/// Coefficient `c` of the leading profile `c·cos s·(cos t − iΩ₀ sin t)`, by projecting
/// the `(1,1)` mode of `u` onto `(1, −Ω₀)`.
pub fn profile_coefficient(u: &SymmetricField, omega: f64) -> f64 {
    let w0 = omega0(omega);
    let (a, b) = u.get(1, 1);
    (a - w0 * b) / (1.0 + w0 * w0)
}

/// Amplitude of `e_{1,1,−1}(Ω₀)` along `cos s·(cos t − iΩ₀ sin t)`: `√(2/(1+ω))`, equal to 1 at `ω = 1`.
pub fn kernel_amplitude(omega: f64) -> f64 {
    (2.0 / (1.0 + omega)).sqrt()
}

/// Sup-norm defects on a grid of the symmetries `u(t,−s) = u(t,s)`, `u(−t,s) = ū(t,s)`
/// and `u(t+π, s+π) = u(t,s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDefects {
    pub reflection: f64,
    pub reversal: f64,
    pub half_shift: f64,
}

pub fn symmetry_defects(u: &SymmetricField, grid: usize) -> SymmetryDefects {
    use std::f64::consts::PI;
    let mut d = SymmetryDefects { reflection: 0.0, reversal: 0.0, half_shift: 0.0 };
    for i in 0..grid {
        for j in 0..grid {
            let t = 2.0 * PI * (i as f64 + 0.37) / grid as f64;
            let s = 2.0 * PI * (j as f64 + 0.61) / grid as f64;
            let z = u.evaluate(t, s);
            d.reflection = d.reflection.max((u.evaluate(t, -s) - z).norm());
            d.reversal = d.reversal.max((u.evaluate(-t, s) - z.conj()).norm());
            d.half_shift = d.half_shift.max((u.evaluate(t + PI, s + PI) - z).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_at_one() {
        assert!((omega2_closed_form(1.0) - 5.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((omega2_closed_form(1.0) - 0.962250).abs() < 1e-6);
        assert!((omega2_physical(1.0) + 0.2405626).abs() < 1e-7);
        assert!(omega2_closed_form(1e-8).abs() < 1e-15);
    }

    #[test]
    fn printed_curvature_changes_sign_at_the_exceptional_value() {
        let w = exceptional_omega0();
        assert!(w > 0.1 && w < 0.2);
        assert!(exceptional_cubic(w).abs() <= 1e-12);
        assert!(omega2_closed_form(0.1) < 0.0 && omega2_closed_form(0.2) > 0.0);
        // 4ω³+29ω²+33ω−6 is increasing on ω > 0, so the root is unique.
        for i in 0..100 {
            let x = i as f64 * 0.1;
            assert!((12.0 * x + 58.0) * x + 33.0 > 0.0);
        }
    }

    #[test]
    fn physical_curvature_never_vanishes() {
        for i in 1..200 {
            assert!(omega2_physical(i as f64 * 0.05) < 0.0);
        }
    }

    #[test]
    fn printed_series_reproduces_printed_values() {
        let c = perturbation_series(1.0, 8, Convention::Printed).unwrap();
        assert!((c.dt_pairing + 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((c.dt_pairing + 2.0 * c.a * c.b).abs() < 1e-14);
        assert!((c.cubic_pairing - 9.0 / 16.0).abs() < 1e-14);
        assert_eq!(c.quadratic_pairing, 0.0);
        assert!((c.resolvent_pairing - 39.0 / 288.0).abs() < 1e-14);
        assert!((c.resolvent_j0 - 7.0 / 48.0).abs() < 1e-14);
        assert!((c.resolvent_j2 + 1.0 / 96.0).abs() < 1e-14);
        assert!((c.omega2 - omega2_closed_form(1.0)).abs() < 1e-12);
        assert_eq!(c.omega1, 0.0);
    }

    #[test]
    fn kernel_vector_identities() {
        for &w in &[0.5, 1.0, std::f64::consts::SQRT_2, 2.0] {
            let c = perturbation_series(w, 8, Convention::Printed).unwrap();
            assert!((c.a * c.a + c.b * c.b - 1.0).abs() < 1e-14);
            assert!((2.0 * c.a * c.b - (1.0 + 2.0 * w).sqrt() / (1.0 + w)).abs() < 1e-14);
            assert!(((c.a * c.a - c.b * c.b).powi(2) - (w / (1.0 + w)).powi(2)).abs() < 1e-14);
            assert!((c.omega2 - omega2_closed_form(w)).abs() < 1e-10);
        }
    }

    #[test]
    fn physical_series_matches_corrected_closed_form() {
        for &w in &[0.5, 1.0, std::f64::consts::SQRT_2, 2.0] {
            let c = perturbation_series(w, 8, Convention::Physical).unwrap();
            assert!((c.omega2 - omega2_physical(w)).abs() < 1e-12, "ω={w}: {}", c.omega2);
            assert!(c.order2_residual < 1e-13);
            assert_eq!(c.quadratic_pairing, 0.0);
        }
    }

    #[test]
    fn printed_second_order_term_leaves_a_residual() {
        let c = perturbation_series(1.0, 8, Convention::Printed).unwrap();
        assert!(c.order2_residual > 1e-3);
    }

    #[test]
    fn truncation_too_small_is_rejected() {
        assert!(perturbation_series(1.0, 4, Convention::Physical).is_err());
    }

    #[test]
    fn synthetic_fit_is_exact() {
        let w0 = omega0(1.0);
        let pts: Vec<BranchPoint> = [0.01, 0.02, 0.03, 0.04, 0.05]
            .iter()
            .map(|&r| BranchPoint {
                r,
                big_omega: w0 + 0.5 * r * r,
                w: None,
                residual: 0.0,
                excised: false,
                excision: None,
                w_norm: 0.0,
                kernel_iterations: 0,
                diagnostics: None,
            })
            .collect();
        assert!((fit_curvature(&pts, w0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(fit_curvature(&pts[..3], w0), Err(Error::InsufficientPoints(_))));
    }

    #[test]
    fn zero_amplitude_is_the_bifurcation_point() {
        let p = solve_point(0.0, 1.0, &SolverSchedule::default(), 1.0).unwrap();
        assert_eq!(p.big_omega, 3f64.sqrt());
        assert_eq!(p.w.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn kernel_profile_is_the_leading_term() {
        let u = kernel_profile(0.3, omega0(1.0), 1.0, 4);
        assert!((profile_coefficient(&u, 1.0) - 0.3 * kernel_amplitude(1.0)).abs() < 1e-14);
        let d = symmetry_defects(&u, 12);
        assert!(d.reflection < 1e-14 && d.reversal < 1e-14 && d.half_shift < 1e-14);
    }
}
