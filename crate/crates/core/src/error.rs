use crate::plant::PlantState;

/// Errors produced by the model transformation, synthesis and simulation layers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An Euler angle left the open interior region where the kinematics are
    /// defined (|phi|, |theta| < pi/2 minus a small guard).
    #[error("kinematic singularity: |{angle}| = {value:.9} rad reaches the pi/2 boundary")]
    KinematicSingularity { angle: &'static str, value: f64 },

    /// Same as `KinematicSingularity` but raised inside an integrator stage;
    /// carries the offending stage state.
    #[error("kinematic singularity at Runge-Kutta stage {stage}: {source}")]
    StageSingularity {
        stage: usize,
        state: PlantState,
        #[source]
        source: Box<Error>,
    },

    /// The lateral input matrix lost rank (u0 at or near zero).
    #[error("lateral input matrix near singular: det = {det:.3e} (u0 = {u0:.3e}), tolerance {tolerance:.1e}")]
    NearSingularInputMatrix { det: f64, u0: f64, tolerance: f64 },

    /// The parameter pair (Z, F) produced a V matrix below the conditioning floor.
    #[error(
        "singular parameterization: |det V| = {det:.3e} below floor {floor:.3e} for Z = {z:?}, F diag = {f:?}"
    )]
    SingularParameterization {
        det: f64,
        floor: f64,
        z: Vec<f64>,
        f: Vec<f64>,
    },

    /// A run aborted mid-simulation; wraps the underlying failure with its timestamp.
    #[error("simulation aborted at t = {t:.6} s: {source}")]
    SimulationAborted {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// A caller-supplied argument violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested operation is outside the supported parameterization.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
