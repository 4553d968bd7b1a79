use thiserror::Error;

use crate::lattice::LatticeSite;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("threshold too large: {0}")]
    ThresholdTooLarge(String),
    #[error("spectrum within {d_floor:e} of zero (min |eigenvalue| = {min_abs:e}) near site {site:?}")]
    SpectrumTooClose { d_floor: f64, min_abs: f64, site: Option<LatticeSite> },
    #[error("state too large for the nonlinearity series (sup |u| = {0})")]
    StateTooLarge(f64),
    #[error("defect too large: ‖K‖ = {0}")]
    DefectTooLarge(f64),
    #[error("initial window violated: |Ω−Ω₀| = {offset:e} exceeds {window:e}")]
    InitialWindow { offset: f64, window: f64 },
    #[error("excised: site ({j},{k}) at stage {stage}")]
    Excised { j: usize, k: usize, stage: usize },
    #[error("no contraction: {0}")]
    NoContraction(String),
    #[error("degenerate branch: Ω₂ = {0:e}")]
    DegenerateBranch(f64),
    #[error("insufficient points: {0}")]
    InsufficientPoints(String),
    #[error("separation floor breached: {value:e} between filaments {pair:?} at t = {time}")]
    SeparationBreach { value: f64, pair: (usize, usize), time: f64 },
    #[error("no equilibria: {0}")]
    NoEquilibria(String),
    #[error("newton failure: {0}")]
    NewtonFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
