//! One function per subcommand; each writes its artifacts into the run directory.

use std::f64::consts::PI;

use filament_core::bifurcation::{
    fit_curvature, omega2_closed_form, omega2_physical, perturbation_series, solve_branch, solve_point,
};
use filament_core::dynamics::{
    central_configuration, ensemble_distance, integrate, invariants, reconstruct, FilamentEnsemble, IntegrateOptions,
    Shape,
};
use filament_core::lattice::build_lattice;
use filament_core::nash_moser::{cantor_measure, excision_neighborhoods};
use filament_core::orbits::{
    effective_potential, equilibria, harmonic_period, helix_of_equilibrium, integrate_radial, radial_start,
    traveling_branch, Equilibria, RadialOrbitParams,
};
use filament_core::spectrum::{
    classify_and_cluster, eigenpair, eigenvalue_slope, kernel_sites, omega0, stage_of, Convention,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, ScenarioKind};
use crate::output::RunDir;
use crate::CliError;

/// Outcome of a command whose artifacts were written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Excised,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Excised => "excised",
        }
    }
}

fn frequency(config: &RunConfig) -> f64 {
    config.big_omega.unwrap_or_else(|| omega0(config.omega))
}

#[derive(Serialize)]
struct SpectrumRow {
    j: usize,
    k: usize,
    l: i8,
    lambda: f64,
    a: f64,
    b: f64,
    slope: f64,
}

pub fn spectrum(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let (big, omega) = (frequency(config), config.omega);
    let rows: Vec<SpectrumRow> = build_lattice(config.radius)
        .into_iter()
        .map(|s| {
            let e = eigenpair(s, big, omega, Convention::Physical);
            SpectrumRow {
                j: s.j,
                k: s.k,
                l: s.l,
                lambda: e.lambda,
                a: e.vector[0],
                b: e.vector[1],
                slope: eigenvalue_slope(s, big, omega),
            }
        })
        .collect();
    out.csv("spectrum.csv", &rows)?;
    let kernel = kernel_sites(big, omega, config.radius, 1e-9);
    out.json(
        "kernel.json",
        &json!({ "omega": omega, "big_omega": big, "radius": config.radius, "tolerance": 1e-9, "kernel": kernel }),
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct SingularRow {
    j: usize,
    k: usize,
    l: i8,
    lambda: f64,
    stage: usize,
}

pub fn classify(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let (big, omega) = (frequency(config), config.omega);
    let c = classify_and_cluster(big, omega, config.radius, config.schedule.d0)?;
    let rows: Vec<SingularRow> = c
        .singular()
        .into_iter()
        .map(|s| SingularRow {
            j: s.j,
            k: s.k,
            l: s.l,
            lambda: filament_core::spectrum::eigenvalue(s, big, omega),
            stage: stage_of(s.radius(), config.schedule.l0),
        })
        .collect();
    out.csv("singular.csv", &rows)?;
    out.json(
        "classification.json",
        &json!({
            "omega": omega,
            "big_omega": big,
            "radius": config.radius,
            "d0": c.d0,
            "regular_sites": c.regular.len(),
            "clusters": c.clusters,
            "separation_constant": c.separation_constant,
        }),
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct BranchRow {
    r: f64,
    big_omega: f64,
    residual: f64,
    excised: bool,
    site_j: Option<usize>,
    site_k: Option<usize>,
    stage: Option<usize>,
    w_norm: f64,
    kernel_iterations: usize,
}

pub fn branch(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let omega = config.omega;
    let grid = config.r_grid.values();
    let b = solve_branch(omega, &grid, &config.schedule)?;
    let rows: Vec<BranchRow> = b
        .points
        .iter()
        .map(|p| BranchRow {
            r: p.r,
            big_omega: p.big_omega,
            residual: p.residual,
            excised: p.excised,
            site_j: p.excision.map(|e| e.0),
            site_k: p.excision.map(|e| e.1),
            stage: p.excision.map(|e| e.2),
            w_norm: p.w_norm,
            kernel_iterations: p.kernel_iterations,
        })
        .collect();
    out.csv("branch.csv", &rows)?;
    let omega2 = omega2_physical(omega);
    let fitted = fit_curvature(&b.points, b.big_omega0).ok();
    let w0 = b.big_omega0;
    let measure = cantor_measure(config.r0, &config.schedule, omega2, |r| w0 + omega2 * r * r, &b.excisions, config.schedule.n_max)?;
    out.json(
        "branch.json",
        &json!({
            "omega": omega,
            "big_omega0": b.big_omega0,
            "fitted_curvature": fitted,
            "closed_form_curvature": omega2,
            "printed_closed_form_curvature": omega2_closed_form(omega),
            "diophantine_margin": b.diophantine_margin,
            "points": b.points,
            "excisions": b.excisions,
            "measure": measure,
        }),
    )?;
    Ok(if b.points.iter().any(|p| p.excised) { Status::Excised } else { Status::Ok })
}

#[derive(Serialize)]
struct Omega2Row {
    omega: f64,
    closed_form: f64,
    series: f64,
    difference: f64,
    physical_closed_form: f64,
    physical_series: f64,
}

pub fn omega2(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let omegas = if config.omega_table.is_empty() { vec![config.omega] } else { config.omega_table.clone() };
    let mut rows = Vec::new();
    for &omega in &omegas {
        let printed = perturbation_series(omega, 8, Convention::Printed)?;
        let physical = perturbation_series(omega, 8, Convention::Physical)?;
        let closed = omega2_closed_form(omega);
        rows.push(Omega2Row {
            omega,
            closed_form: closed,
            series: printed.omega2,
            difference: (printed.omega2 - closed).abs(),
            physical_closed_form: omega2_physical(omega),
            physical_series: physical.omega2,
        });
    }
    out.csv("omega2.csv", &rows)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct ExcisionRow {
    j: usize,
    k: usize,
    stage: usize,
    center_at_zero: f64,
    center_at_rmax: f64,
    half_width: f64,
    doubled_half_width: f64,
    slope: f64,
    flatness_constant: f64,
    linear_coefficient: f64,
}

pub fn excisions(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let omega = config.omega;
    let omega2 = omega2_physical(omega);
    let mut records = Vec::new();
    for n in 1..=config.schedule.n_max {
        records.extend(excision_neighborhoods(omega, config.r_grid.r_max, n, omega2, &config.schedule, 8)?);
    }
    let rows: Vec<ExcisionRow> = records
        .iter()
        .map(|r| ExcisionRow {
            j: r.site.0,
            k: r.site.1,
            stage: r.stage,
            center_at_zero: r.center[0].1,
            center_at_rmax: r.center[r.center.len() - 1].1,
            half_width: r.half_width,
            doubled_half_width: r.doubled_half_width,
            slope: r.slope,
            flatness_constant: r.flatness_constant,
            linear_coefficient: r.linear_coefficient,
        })
        .collect();
    out.csv("excisions.csv", &rows)?;
    out.json("excisions.json", &records)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct FrameRow {
    time: f64,
    filament: usize,
    re: f64,
    im: f64,
}

pub fn simulate(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let s = &config.scenario;
    let (start, period, reference): (FilamentEnsemble, f64, Box<dyn Fn(f64) -> filament_core::Result<FilamentEnsemble>>) =
        match s.kind {
            ScenarioKind::TwoFilamentStanding => {
                let c = central_configuration(2, &Shape::Polygon, 1.0)?;
                let omega = c.omega;
                let p = solve_point(s.r, omega, &config.schedule, omega0(omega) + omega2_physical(omega) * s.r * s.r)?;
                if p.excised {
                    out.json("simulate.json", &json!({ "scenario": s, "excised": p.excision }))?;
                    return Ok(Status::Excised);
                }
                let profile = p.profile(omega).expect("solved point has a profile");
                let (start, wave) = reconstruct(&c.points, omega, &profile, p.big_omega, s.modes)?;
                let modes = s.modes;
                (start, 2.0 * PI / p.big_omega, Box::new(move |t| wave.ensemble(t, modes)))
            }
            ScenarioKind::PolygonRotation => {
                let c = central_configuration(s.filaments, &Shape::Polygon, 1.0)?;
                let start = FilamentEnsemble::from_fn(s.filaments, s.modes, |j, _| c.points[j])?;
                let (points, rate, count, modes) = (c.points.clone(), c.omega, s.filaments, s.modes);
                let reference = move |t: f64| {
                    let mut e = FilamentEnsemble::from_fn(count, modes, |j, _| points[j] * Complex64::from_polar(1.0, rate * t))?;
                    e.time = t;
                    Ok(e)
                };
                (start, 2.0 * PI / c.omega, Box::new(reference))
            }
        };
    let duration = s.periods * period;
    let dt = period / s.steps as f64;
    let sample_every = (s.steps / 20).max(1);
    let traj = integrate(&start, duration, &IntegrateOptions { dt, sample_every, ..Default::default() })?;
    let expected = reference(traj.final_state.time)?;
    let defect = ensemble_distance(&traj.final_state, &expected);
    let frames: Vec<FrameRow> = traj
        .frames
        .iter()
        .flat_map(|f| {
            (0..f.count()).map(move |j| {
                let z = f.evaluate(j, 0.0);
                FrameRow { time: f.time, filament: j, re: z.re, im: z.im }
            })
        })
        .collect();
    out.csv("trajectory.csv", &frames)?;
    let final_invariants = invariants(&traj.final_state, None);
    out.json(
        "simulate.json",
        &json!({
            "scenario": s,
            "period": period,
            "duration": duration,
            "dt": dt,
            "periodicity_defect": defect,
            "energy_drift": traj.energy_drift,
            "center_drift": traj.center_drift,
            "min_separation": traj.min_separation,
            "breach": traj.breach,
            "initial_invariants": traj.initial,
            "final_invariants": final_invariants,
        }),
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct OrbitRow {
    theta: f64,
    rho: f64,
}

pub fn orbits(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let o = &config.orbits;
    let eq = equilibria(o.c, o.rate)?;
    let base = RadialOrbitParams { c: o.c, omega: o.rate, energy: 0.0 };
    let Equilibria::Pair { rho_plus, rho_minus } = eq else {
        out.json("orbits.json", &json!({ "equilibria": eq }))?;
        return Ok(Status::Ok);
    };
    let energy = effective_potential(rho_plus, &base).0 + o.energy_offset;
    let params = RadialOrbitParams { energy, ..base };
    let period = harmonic_period(o.c, o.rate)?;
    let (r0, v0) = radial_start(&params)?;
    let steps = (o.periods * o.steps_per_period as f64).ceil() as usize;
    let orbit = integrate_radial(&params, r0, v0, o.periods * period, steps.max(1))?;
    let stride = (orbit.theta.len() / 2000).max(1);
    let rows: Vec<OrbitRow> = orbit
        .theta
        .iter()
        .zip(&orbit.rho)
        .step_by(stride)
        .map(|(&theta, &rho)| OrbitRow { theta, rho })
        .collect();
    out.csv("orbit.csv", &rows)?;
    let helix = |rho: f64| {
        let (amplitude, sigma) = helix_of_equilibrium(o.c, rho);
        json!({ "rho": rho, "potential_derivative": effective_potential(rho, &base).1, "amplitude": amplitude, "sigma": sigma })
    };
    out.json(
        "orbits.json",
        &json!({
            "equilibria": eq,
            "helices": [helix(rho_plus), helix(rho_minus)],
            "energy": energy,
            "harmonic_period": period,
            "measured_period": orbit.period,
            "energy_drift": orbit.energy_drift,
            "escaped": orbit.escaped,
            "outside_validity": orbit.outside_validity,
        }),
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct TravelingRow {
    amplitude: f64,
    big_omega: f64,
    residual: f64,
    newton_iterations: usize,
}

pub fn traveling(config: &RunConfig, out: &mut RunDir) -> Result<Status, CliError> {
    let t = &config.traveling;
    let grid: Vec<f64> = if t.points == 1 {
        vec![t.amplitude_max]
    } else {
        (0..t.points).map(|i| t.amplitude_max * i as f64 / (t.points - 1) as f64).collect()
    };
    let b = traveling_branch(config.omega, t.k, &grid, t.truncation)?;
    let rows: Vec<TravelingRow> = b
        .points
        .iter()
        .map(|p| TravelingRow {
            amplitude: p.amplitude,
            big_omega: p.big_omega,
            residual: p.residual,
            newton_iterations: p.newton_iterations,
        })
        .collect();
    out.csv("traveling.csv", &rows)?;
    out.json("traveling.json", &b)?;
    Ok(Status::Ok)
}

