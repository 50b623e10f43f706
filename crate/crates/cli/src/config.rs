//! Experiment configuration: a single TOML file parsed into a fully
//! validated in-memory form before anything runs. Unknown keys are rejected
//! and every semantic failure names the offending field.

use std::path::Path;

use serde::Deserialize;

use ucfas_core::feasibility::{GridAxis, RoeaSettings, SamplingSpec, Subsystem};
use ucfas_core::{
    ActuatorLimits, ControllerGains, InputConstraintSet, Interval, ParametricDesign, PlantState,
    QuadrotorParams, SingularityPolicy, SpiralSpec,
};

use crate::CliError;

/// Built-in configuration reproducing the reference experiment; selected by
/// passing `paper_defaults` instead of a config path.
pub const PAPER_DEFAULTS_NAME: &str = "paper_defaults";
pub const PAPER_DEFAULTS_TOML: &str = include_str!("../configs/paper_defaults.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synthesize,
    Simulate,
    Track,
    Roea,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Synthesize => "synthesize",
            Mode::Simulate => "simulate",
            Mode::Track => "track",
            Mode::Roea => "roea",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mode: Option<Mode>,
    quadrotor: QuadrotorSection,
    actuator_limits: ActuatorSection,
    virtual_constraints: ConstraintSection,
    design: Option<DesignSection>,
    gains: Option<GainsSection>,
    #[serde(default)]
    trajectory: TrajectorySection,
    #[serde(default)]
    setpoint: SetpointSection,
    #[serde(default)]
    initial_state: InitialStateSection,
    run: RunSection,
    #[serde(default)]
    output: OutputSection,
    roea: Option<RoeaSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadrotorSection {
    mass: f64,
    gravity: f64,
    jx: f64,
    jy: f64,
    jz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActuatorSection {
    thrust_min: f64,
    thrust_max: f64,
    torque_min: f64,
    torque_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintSection {
    u0: [f64; 2],
    u0_dot: [f64; 2],
    u0_ddot: [f64; 2],
    u1: [f64; 2],
    u2_x: [f64; 2],
    u2_y: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignSection {
    altitude: DesignEntry,
    yaw: DesignEntry,
    lateral_x: DesignEntry,
    lateral_y: DesignEntry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignEntry {
    z: Vec<f64>,
    f: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsSection {
    altitude: [f64; 2],
    yaw: [f64; 2],
    lateral_x: [f64; 4],
    lateral_y: [f64; 4],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TrajectorySection {
    radius: f64,
    angular_rate: f64,
    climb_rate: f64,
    center: [f64; 2],
    yaw_amplitude: f64,
    yaw_rate: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        let spec = SpiralSpec::default();
        Self {
            radius: spec.radius,
            angular_rate: spec.angular_rate,
            climb_rate: spec.climb_rate,
            center: spec.center,
            yaw_amplitude: spec.yaw_amplitude,
            yaw_rate: spec.yaw_rate,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SetpointSection {
    z: f64,
    psi: f64,
    x: f64,
    y: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InitialStateSection {
    x: f64,
    y: f64,
    z: f64,
    vx: f64,
    vy: f64,
    vz: f64,
    phi: f64,
    theta: f64,
    psi: f64,
    p: f64,
    q: f64,
    r: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    horizon: f64,
    dt: f64,
    #[serde(default = "default_on_singular")]
    on_singular: String,
    #[serde(default = "default_rmse_tail")]
    rmse_tail: f64,
}

fn default_on_singular() -> String {
    "abort".to_string()
}

fn default_rmse_tail() -> f64 {
    20.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: String,
    csv: String,
    summary: String,
    gains: String,
    plot: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".to_string(),
            csv: "trajectory.csv".to_string(),
            summary: "summary.txt".to_string(),
            gains: "gains.toml".to_string(),
            plot: Some("plot.gp".to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoeaSection {
    subsystem: String,
    #[serde(default = "default_roea_horizon")]
    horizon: f64,
    #[serde(default = "default_roea_dt")]
    dt: f64,
    grid_min: Vec<f64>,
    grid_max: Vec<f64>,
    grid_points: Vec<usize>,
}

fn default_roea_horizon() -> f64 {
    10.0
}

fn default_roea_dt() -> f64 {
    1e-3
}

/// The four per-subsystem parameter pairs.
#[derive(Debug, Clone)]
pub struct DesignSet {
    pub altitude: ParametricDesign,
    pub yaw: ParametricDesign,
    pub lateral_x: ParametricDesign,
    pub lateral_y: ParametricDesign,
}

/// Where the controller rows come from.
#[derive(Debug, Clone)]
pub enum GainSource {
    Designs(Box<DesignSet>),
    Explicit(ControllerGains),
}

#[derive(Debug, Clone, Copy)]
pub struct Setpoint {
    pub z: f64,
    pub psi: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone)]
pub struct OutputNames {
    pub dir: String,
    pub csv: String,
    pub summary: String,
    pub gains: String,
    pub plot: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RoeaConfig {
    pub subsystem: Subsystem,
    pub settings: RoeaSettings,
    pub sampling: SamplingSpec,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub params: QuadrotorParams,
    pub limits: ActuatorLimits,
    pub constraints: InputConstraintSet,
    pub gain_source: GainSource,
    pub spiral: SpiralSpec,
    pub setpoint: Setpoint,
    pub initial: PlantState,
    pub horizon: f64,
    pub dt: f64,
    pub on_singular: SingularityPolicy,
    pub rmse_tail: f64,
    pub output: OutputNames,
    pub roea: Option<RoeaConfig>,
}

fn field<T>(name: &str, result: ucfas_core::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn interval(name: &str, bounds: [f64; 2]) -> Result<Interval, CliError> {
    field(name, Interval::new(bounds[0], bounds[1]))
}

/// Reads and validates a config file, or the built-in defaults when `source`
/// is the literal `paper_defaults`.
pub fn load(source: &str) -> Result<ExperimentConfig, CliError> {
    let text = if source == PAPER_DEFAULTS_NAME {
        PAPER_DEFAULTS_TOML.to_string()
    } else {
        std::fs::read_to_string(Path::new(source)).map_err(|e| {
            CliError::Config(format!("cannot read config file {source}: {e}"))
        })?
    };
    parse(&text)
}

/// Parses and validates config text.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;

    let params = field(
        "quadrotor",
        QuadrotorParams::new(
            file.quadrotor.mass,
            file.quadrotor.gravity,
            file.quadrotor.jx,
            file.quadrotor.jy,
            file.quadrotor.jz,
        ),
    )?;
    let limits = field(
        "actuator_limits",
        ActuatorLimits::new(
            file.actuator_limits.thrust_min,
            file.actuator_limits.thrust_max,
            file.actuator_limits.torque_min,
            file.actuator_limits.torque_max,
        ),
    )?;

    let constraints = InputConstraintSet {
        u0: interval("virtual_constraints.u0", file.virtual_constraints.u0)?,
        u0_dot: interval("virtual_constraints.u0_dot", file.virtual_constraints.u0_dot)?,
        u0_ddot: interval(
            "virtual_constraints.u0_ddot",
            file.virtual_constraints.u0_ddot,
        )?,
        u1: interval("virtual_constraints.u1", file.virtual_constraints.u1)?,
        u2: [
            interval("virtual_constraints.u2_x", file.virtual_constraints.u2_x)?,
            interval("virtual_constraints.u2_y", file.virtual_constraints.u2_y)?,
        ],
    };
    field("virtual_constraints", constraints.validate())?;

    let gain_source = match (file.design, file.gains) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "specify either [design] or [gains], not both".to_string(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "one of [design] or [gains] is required".to_string(),
            ))
        }
        (Some(design), None) => {
            let make = |name: &str, entry: &DesignEntry| {
                field(name, ParametricDesign::scalar(&entry.z, &entry.f))
            };
            GainSource::Designs(Box::new(DesignSet {
                altitude: make("design.altitude", &design.altitude)?,
                yaw: make("design.yaw", &design.yaw)?,
                lateral_x: make("design.lateral_x", &design.lateral_x)?,
                lateral_y: make("design.lateral_y", &design.lateral_y)?,
            }))
        }
        (None, Some(gains)) => GainSource::Explicit(ControllerGains {
            altitude: gains.altitude,
            yaw: gains.yaw,
            lateral_x: gains.lateral_x,
            lateral_y: gains.lateral_y,
        }),
    };

    let spiral = SpiralSpec {
        radius: file.trajectory.radius,
        angular_rate: file.trajectory.angular_rate,
        climb_rate: file.trajectory.climb_rate,
        center: file.trajectory.center,
        yaw_amplitude: file.trajectory.yaw_amplitude,
        yaw_rate: file.trajectory.yaw_rate,
    };
    field("trajectory", spiral.validate())?;

    if !(file.run.horizon > 0.0) || !(file.run.dt > 0.0) {
        return Err(CliError::Config(format!(
            "run: horizon and dt must be > 0, got horizon = {}, dt = {}",
            file.run.horizon, file.run.dt
        )));
    }
    if !(file.run.rmse_tail > 0.0) || file.run.rmse_tail > file.run.horizon {
        return Err(CliError::Config(format!(
            "run.rmse_tail: must be in (0, horizon], got {}",
            file.run.rmse_tail
        )));
    }
    let on_singular = match file.run.on_singular.as_str() {
        "abort" => SingularityPolicy::Abort,
        "hold" => SingularityPolicy::HoldPrevious,
        other => {
            return Err(CliError::Config(format!(
                "run.on_singular: expected \"abort\" or \"hold\", got \"{other}\""
            )))
        }
    };

    let s = &file.initial_state;
    let initial = PlantState {
        x: s.x,
        y: s.y,
        z: s.z,
        vx: s.vx,
        vy: s.vy,
        vz: s.vz,
        phi: s.phi,
        theta: s.theta,
        psi: s.psi,
        p: s.p,
        q: s.q,
        r: s.r,
    };
    if !initial.is_finite() {
        return Err(CliError::Config(
            "initial_state: all fields must be finite".to_string(),
        ));
    }
    if !initial.is_interior() {
        return Err(CliError::Config(
            "initial_state: roll and pitch must lie strictly inside (-pi/2, pi/2)".to_string(),
        ));
    }

    let roea = match file.roea {
        None => None,
        Some(section) => {
            let subsystem = match section.subsystem.as_str() {
                "altitude" => Subsystem::Altitude,
                "yaw" => Subsystem::Yaw,
                "lateral" => Subsystem::Lateral,
                other => {
                    return Err(CliError::Config(format!(
                        "roea.subsystem: expected altitude | yaw | lateral, got \"{other}\""
                    )))
                }
            };
            let dim = subsystem.dimension();
            if section.grid_min.len() != dim
                || section.grid_max.len() != dim
                || section.grid_points.len() != dim
            {
                return Err(CliError::Config(format!(
                    "roea.grid_*: expected {dim} entries per axis list for the {} subsystem",
                    subsystem.name()
                )));
            }
            let axes = (0..dim)
                .map(|i| {
                    if !(section.grid_min[i] <= section.grid_max[i]) {
                        return Err(CliError::Config(format!(
                            "roea.grid_min[{i}] must be <= roea.grid_max[{i}]"
                        )));
                    }
                    if section.grid_points[i] == 0 {
                        return Err(CliError::Config(format!(
                            "roea.grid_points[{i}] must be >= 1"
                        )));
                    }
                    Ok(GridAxis {
                        min: section.grid_min[i],
                        max: section.grid_max[i],
                        points: section.grid_points[i],
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !(section.horizon > 0.0) || !(section.dt > 0.0) {
                return Err(CliError::Config(
                    "roea: horizon and dt must be > 0".to_string(),
                ));
            }
            Some(RoeaConfig {
                subsystem,
                settings: RoeaSettings {
                    horizon: section.horizon,
                    dt: section.dt,
                    ..RoeaSettings::default()
                },
                sampling: SamplingSpec::Grid(axes),
            })
        }
    };

    Ok(ExperimentConfig {
        mode: file.mode,
        params,
        limits,
        constraints,
        gain_source,
        spiral,
        setpoint: Setpoint {
            z: file.setpoint.z,
            psi: file.setpoint.psi,
            x: file.setpoint.x,
            y: file.setpoint.y,
        },
        initial,
        horizon: file.run.horizon,
        dt: file.run.dt,
        on_singular,
        rmse_tail: file.run.rmse_tail,
        output: OutputNames {
            dir: file.output.dir,
            csv: file.output.csv,
            summary: file.output.summary,
            gains: file.output.gains,
            plot: file.output.plot,
        },
        roea,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults_parse_and_validate() {
        let config = load(PAPER_DEFAULTS_NAME).unwrap();
        assert_eq!(config.mode, Some(Mode::Track));
        assert_eq!(config.params.mass, 0.625);
        assert_eq!(config.params.jx, 0.0019005);
        assert_eq!(config.limits.thrust_max, 100.0);
        assert_eq!(config.initial.x, 0.5);
        assert_eq!(config.horizon, 100.0);
        assert!(config.roea.is_some());
        assert!(matches!(config.gain_source, GainSource::Designs { .. }));
    }

    #[test]
    fn swapped_thrust_limits_name_the_field() {
        let text = PAPER_DEFAULTS_TOML
            .replace("thrust_min = -100.0", "thrust_min = 100.0")
            .replace("thrust_max = 100.0", "thrust_max = -100.0");
        let err = parse(&text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("actuator_limits"), "message: {message}");
        assert!(message.contains("thrust"), "message: {message}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{PAPER_DEFAULTS_TOML}\n[mystery]\nvalue = 1\n");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn design_and_gains_are_mutually_exclusive() {
        let text = format!(
            "{PAPER_DEFAULTS_TOML}\n[gains]\naltitude = [20.0, 9.0]\nyaw = [20.0, 9.0]\nlateral_x = [1680.0, 1066.0, 251.0, 26.0]\nlateral_y = [1680.0, 1066.0, 251.0, 26.0]\n"
        );
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn zero_spanning_u0_box_is_rejected() {
        let text = PAPER_DEFAULTS_TOML.replace("u0 = [0.5, 50.0]", "u0 = [-1.0, 50.0]");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("u0"), "{err}");
    }
}
