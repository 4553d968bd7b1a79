//! Browser bindings: curvature curves, single branch points and filament animations.
//!
//! Results cross the boundary as flat `Float64Array`s or JSON strings; errors
//! become JavaScript exceptions carrying the solver's message. Each export is a
//! thin wrapper over a plain Rust function so the logic also runs natively.

use std::f64::consts::PI;

use filament_core::bifurcation::{omega2_closed_form, omega2_physical, solve_point};
use filament_core::dynamics::{
    central_configuration, integrate, reconstruct, FilamentEnsemble, IntegrateOptions, Shape,
};
use filament_core::nash_moser::SolverSchedule;
use filament_core::spectrum::omega0;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Rows `[ω, Ω₂ printed, Ω₂ physical]`, flattened, for `points` values of `ω`
/// evenly spaced in `[omega_min, omega_max]`.
#[wasm_bindgen]
pub fn curvature_curves(
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    to_js(curves(omega_min, omega_max, points))
}

pub fn curves(omega_min: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(omega_min > 0.0) || !(omega_max > omega_min) || points < 2 {
        return Err(msg(
            "need 0 < omega_min < omega_max and at least two points",
        ));
    }
    let step = (omega_max - omega_min) / (points - 1) as f64;
    Ok((0..points)
        .flat_map(|i| {
            let w = omega_min + step * i as f64;
            [w, omega2_closed_form(w), omega2_physical(w)]
        })
        .collect())
}

/// Solves one branch point at amplitude `r` with `n_max` refinement stages.
///
/// Returns JSON with the frequency, residual, excision flag and the quadratic
/// prediction from the physical curvature.
#[wasm_bindgen]
pub fn branch_point(omega: f64, r: f64, n_max: usize) -> Result<String, JsValue> {
    to_js(solve_branch_point(omega, r, n_max))
}

pub fn solve_branch_point(omega: f64, r: f64, n_max: usize) -> Result<String, String> {
    if !(omega > 0.0) || !(r >= 0.0) {
        return Err(msg(format!(
            "need ω > 0 and r ≥ 0, got ω = {omega}, r = {r}"
        )));
    }
    let schedule = SolverSchedule {
        n_max,
        ..SolverSchedule::default()
    };
    schedule.validate().map_err(msg)?;
    let predicted = omega0(omega) + omega2_physical(omega) * r * r;
    let p = solve_point(r, omega, &schedule, predicted).map_err(msg)?;
    Ok(json!({
        "omega": omega,
        "r": r,
        "n_max": n_max,
        "big_omega0": omega0(omega),
        "big_omega": p.big_omega,
        "predicted": predicted,
        "residual": p.residual,
        "w_norm": p.w_norm,
        "excised": p.excised,
        "excision": p.excision,
    })
    .to_string())
}

/// Cross-section positions `u_j(t, 0)` and a displacement profile along `s`.
struct Frames {
    count: usize,
    samples: usize,
    data: Vec<f64>,
}

const PROFILE_SAMPLES: usize = 64;

fn push_frame(f: &mut Frames, e: &FilamentEnsemble) {
    f.data.push(e.time);
    for j in 0..e.count() {
        let z = e.evaluate(j, 0.0);
        f.data.extend([z.re, z.im]);
    }
    for j in 0..e.count() {
        for i in 0..PROFILE_SAMPLES {
            let s = 2.0 * PI * i as f64 / PROFILE_SAMPLES as f64;
            let z = e.evaluate(j, s);
            f.data.extend([z.re, z.im]);
        }
    }
    f.samples += 1;
}

/// Integrates `filaments` vortices over one period.
///
/// With `r > 0` and two filaments the start is the standing wave of amplitude
/// `r`; otherwise it is the rotating regular polygon. The result is a flat
/// array: `[count, profile_samples, frames, period,` then per frame
/// `t, (x, y)` at `s = 0` for each filament and `(x, y)` at each profile sample
/// for each filament`]`.
#[wasm_bindgen]
pub fn simulate(
    filaments: usize,
    r: f64,
    modes: usize,
    steps: usize,
    frames: usize,
) -> Result<Vec<f64>, JsValue> {
    to_js(simulate_frames(filaments, r, modes, steps, frames))
}

pub fn simulate_frames(
    filaments: usize,
    r: f64,
    modes: usize,
    steps: usize,
    frames: usize,
) -> Result<Vec<f64>, String> {
    if filaments < 2 || modes < 2 || steps == 0 || frames == 0 {
        return Err(msg(
            "need at least two filaments, two modes, one step and one frame",
        ));
    }
    let c = central_configuration(filaments, &Shape::Polygon, 1.0).map_err(msg)?;
    let (start, period) = if r > 0.0 && filaments == 2 {
        let schedule = SolverSchedule {
            n_max: 1,
            ..SolverSchedule::default()
        };
        let seed = omega0(c.omega) + omega2_physical(c.omega) * r * r;
        let p = solve_point(r, c.omega, &schedule, seed).map_err(msg)?;
        let profile = p
            .profile(c.omega)
            .ok_or_else(|| msg(format!("amplitude {r} is excised at this frequency")))?;
        let (start, _) =
            reconstruct(&c.points, c.omega, &profile, p.big_omega, modes).map_err(msg)?;
        (start, 2.0 * PI / p.big_omega)
    } else {
        let start =
            FilamentEnsemble::from_fn(filaments, modes, |j, _| c.points[j]).map_err(msg)?;
        (start, 2.0 * PI / c.omega)
    };
    let sample_every = (steps / frames).max(1);
    let options = IntegrateOptions {
        dt: period / steps as f64,
        sample_every,
        ..IntegrateOptions::default()
    };
    let traj = integrate(&start, period, &options).map_err(msg)?;
    traj.ensure_separated().map_err(msg)?;
    let mut out = Frames {
        count: filaments,
        samples: 0,
        data: Vec::new(),
    };
    for f in &traj.frames {
        push_frame(&mut out, f);
    }
    let mut header = vec![
        out.count as f64,
        PROFILE_SAMPLES as f64,
        out.samples as f64,
        period,
    ];
    header.append(&mut out.data);
    Ok(header)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn curves_match_the_closed_forms() {
        let v = curves(1.0, 2.0, 3).unwrap();
        assert_eq!(v.len(), 9);
        assert!((v[1] - omega2_closed_form(1.0)).abs() < 1e-15);
        assert!((v[2] + 0.2405626).abs() < 1e-6);
    }

    #[test]
    fn branch_point_reports_a_small_residual() {
        let text = solve_branch_point(std::f64::consts::SQRT_2, 0.02, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["excised"], false);
        assert!(v["residual"].as_f64().unwrap() < 1e-10);
        let shift = v["big_omega"].as_f64().unwrap() - v["predicted"].as_f64().unwrap();
        assert!(shift.abs() < 1e-4 * 0.02);
        assert!(solve_branch_point(-1.0, 0.02, 0).is_err());
    }

    #[test]
    fn polygon_frames_keep_their_radius() {
        let v = simulate_frames(3, 0.0, 4, 400, 10).unwrap();
        let (count, samples, frames) = (v[0] as usize, v[1] as usize, v[2] as usize);
        assert_eq!(count, 3);
        let stride = 1 + 2 * count + 2 * count * samples;
        assert_eq!(v.len(), 4 + frames * stride);
        let last = &v[4 + (frames - 1) * stride..];
        let radius = Complex64::new(last[1], last[2]).norm();
        assert!((radius - 1.0).abs() < 1e-8);
    }
}
