//! Run configuration: a JSON file, overridden field by field from the command line.

use std::path::{Path, PathBuf};

use filament_core::lattice::NormParams;
use filament_core::nash_moser::SolverSchedule;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmplitudeGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for AmplitudeGrid {
    fn default() -> Self {
        AmplitudeGrid { r_min: 0.0, r_max: 0.05, points: 6 }
    }
}

impl AmplitudeGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.r_min];
        }
        let step = (self.r_max - self.r_min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.r_min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    TwoFilamentStanding,
    PolygonRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Branch amplitude of the standing wave.
    pub r: f64,
    /// Number of filaments for the polygon scenario.
    pub filaments: usize,
    /// Fourier modes per filament.
    pub modes: usize,
    /// Time steps per period.
    pub steps: usize,
    pub periods: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario { kind: ScenarioKind::TwoFilamentStanding, r: 0.02, filaments: 3, modes: 16, steps: 4000, periods: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitSettings {
    /// Helix pitch parameter `c`.
    pub c: f64,
    /// Rotation rate of the relative equilibrium.
    pub rate: f64,
    /// Energy above the stable equilibrium.
    pub energy_offset: f64,
    pub periods: f64,
    pub steps_per_period: usize,
}

impl Default for OrbitSettings {
    fn default() -> Self {
        OrbitSettings { c: 1.0, rate: 0.2, energy_offset: 1e-3, periods: 10.0, steps_per_period: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TravelingSettings {
    pub k: usize,
    pub amplitude_max: f64,
    pub points: usize,
    pub truncation: usize,
}

impl Default for TravelingSettings {
    fn default() -> Self {
        TravelingSettings { k: 1, amplitude_max: 0.2, points: 11, truncation: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub omega: f64,
    /// Frequency for `spectrum`/`classify`; `None` means `Ω₀ = √(1+2ω)`.
    pub big_omega: Option<f64>,
    /// Ball radius for `spectrum`/`classify`.
    pub radius: usize,
    pub schedule: SolverSchedule,
    pub r0: f64,
    pub r_grid: AmplitudeGrid,
    pub norm: NormParams,
    pub scenario: Scenario,
    pub orbits: OrbitSettings,
    pub traveling: TravelingSettings,
    /// Values of `ω` tabulated by `omega2`; empty means `[omega]`.
    pub omega_table: Vec<f64>,
    /// Output directory; defaults to `<output root>/<command>-<hash>`.
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega: std::f64::consts::SQRT_2,
            big_omega: None,
            radius: 64,
            schedule: SolverSchedule::default(),
            r0: 0.05,
            r_grid: AmplitudeGrid::default(),
            norm: NormParams::default(),
            scenario: Scenario::default(),
            orbits: OrbitSettings::default(),
            traveling: TravelingSettings::default(),
            omega_table: Vec::new(),
            output: None,
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return fail(format!("omega must be positive, got {}", self.omega));
        }
        if let Some(b) = self.big_omega {
            if !(b > 0.0) {
                return fail(format!("big_omega must be positive, got {b}"));
            }
        }
        if self.radius < 2 || self.radius > 512 {
            return fail(format!("radius must lie in [2, 512], got {}", self.radius));
        }
        self.schedule.validate().map_err(|e| ConfigError(e.to_string()))?;
        NormParams::new(self.norm.sigma, self.norm.s_weight).map_err(|e| ConfigError(e.to_string()))?;
        let g = &self.r_grid;
        if g.points == 0 || !(g.r_min >= 0.0) || !(g.r_max >= g.r_min) || (g.points > 1 && g.r_max == g.r_min) {
            return fail(format!("r_grid needs 0 ≤ r_min < r_max and points ≥ 1, got {g:?}"));
        }
        if !(self.r0 > 0.0) {
            return fail(format!("r0 must be positive, got {}", self.r0));
        }
        let s = &self.scenario;
        if !(s.r >= 0.0) || s.modes < 2 || s.steps == 0 || !(s.periods > 0.0) || s.filaments < 2 {
            return fail(format!("invalid scenario {s:?}"));
        }
        let o = &self.orbits;
        if !(o.c > 0.0) || !(o.rate > 0.0) || !(o.energy_offset >= 0.0) || !(o.periods > 0.0) || o.steps_per_period == 0 {
            return fail(format!("invalid orbit settings {o:?}"));
        }
        let t = &self.traveling;
        if t.k == 0 || t.points == 0 || t.truncation < 2 || !(t.amplitude_max >= 0.0) {
            return fail(format!("invalid traveling settings {t:?}"));
        }
        if self.omega_table.iter().any(|w| !(*w > 0.0)) {
            return fail("omega_table entries must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
