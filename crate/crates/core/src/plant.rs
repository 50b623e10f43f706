//! Physical 6-DOF quadrotor: rigid-body dynamics under thrust and body
//! torques, actuator saturation, and a fixed-step integrator with a
//! deterministic trajectory log.
//!
//! The attitude kinematics keep roll and pitch inside the open interval
//! (-pi/2, pi/2); every operation that evaluates tan/sec terms checks that
//! region first and reports a [`Error::KinematicSingularity`] instead of
//! overflowing.

use std::f64::consts::FRAC_PI_2;

use nalgebra::SVector;

use crate::control::ReferenceSample;
use crate::error::{Error, Result};
use crate::fas_model::VirtualInputs;

/// Margin kept between |phi|, |theta| and pi/2 before the kinematics are
/// treated as singular. Keeps tan/sec bounded (~1e6) instead of overflowing.
pub const ANGLE_GUARD: f64 = 1e-6;

/// Mass, gravity and principal moments of inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorParams {
    /// Mass [kg].
    pub mass: f64,
    /// Gravitational acceleration [m/s^2].
    pub gravity: f64,
    /// Moment of inertia about the body x-axis [kg m^2].
    pub jx: f64,
    /// Moment of inertia about the body y-axis [kg m^2].
    pub jy: f64,
    /// Moment of inertia about the body z-axis [kg m^2].
    pub jz: f64,
}

impl QuadrotorParams {
    /// All parameters must be strictly positive.
    pub fn new(mass: f64, gravity: f64, jx: f64, jy: f64, jz: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("gravity", gravity),
            ("jx", jx),
            ("jy", jy),
            ("jz", jz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            mass,
            gravity,
            jx,
            jy,
            jz,
        })
    }
}

/// Full rigid-body state: position, velocity, Euler angles, body rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    /// Roll [rad].
    pub phi: f64,
    /// Pitch [rad].
    pub theta: f64,
    /// Yaw [rad].
    pub psi: f64,
    /// Body rate about x [rad/s].
    pub p: f64,
    /// Body rate about y [rad/s].
    pub q: f64,
    /// Body rate about z [rad/s].
    pub r: f64,
}

impl PlantState {
    pub fn to_vector(self) -> SVector<f64, 12> {
        SVector::from([
            self.x, self.y, self.z, self.vx, self.vy, self.vz, self.phi, self.theta, self.psi,
            self.p, self.q, self.r,
        ])
    }

    pub fn from_vector(v: &SVector<f64, 12>) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            vx: v[3],
            vy: v[4],
            vz: v[5],
            phi: v[6],
            theta: v[7],
            psi: v[8],
            p: v[9],
            q: v[10],
            r: v[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }

    /// True iff roll and pitch are strictly inside the guarded interior region.
    pub fn is_interior(&self) -> bool {
        self.phi.abs() < FRAC_PI_2 - ANGLE_GUARD && self.theta.abs() < FRAC_PI_2 - ANGLE_GUARD
    }

    /// Errors with the first offending angle when the state is not interior.
    pub fn require_interior(&self) -> Result<()> {
        check_interior(self.phi, self.theta)
    }
}

/// Shared interior-region check for every operation that evaluates tan/sec.
pub fn check_interior(phi: f64, theta: f64) -> Result<()> {
    if !(phi.abs() < FRAC_PI_2 - ANGLE_GUARD) {
        return Err(Error::KinematicSingularity {
            angle: "phi",
            value: phi,
        });
    }
    if !(theta.abs() < FRAC_PI_2 - ANGLE_GUARD) {
        return Err(Error::KinematicSingularity {
            angle: "theta",
            value: theta,
        });
    }
    Ok(())
}

/// Actuator-level command: total rotor thrust and the three body torques.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicalInput {
    /// Total rotor thrust [N].
    pub thrust: f64,
    /// Roll torque [N m].
    pub tau_phi: f64,
    /// Pitch torque [N m].
    pub tau_theta: f64,
    /// Yaw torque [N m].
    pub tau_psi: f64,
}

/// Box limits for the thrust channel and a shared box for the three torques.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorLimits {
    pub thrust_min: f64,
    pub thrust_max: f64,
    pub torque_min: f64,
    pub torque_max: f64,
}

impl ActuatorLimits {
    pub fn new(thrust_min: f64, thrust_max: f64, torque_min: f64, torque_max: f64) -> Result<Self> {
        if !(thrust_min < thrust_max) {
            return Err(Error::InvalidArgument(format!(
                "thrust limits: min {thrust_min} must be < max {thrust_max}"
            )));
        }
        if !(torque_min < torque_max) {
            return Err(Error::InvalidArgument(format!(
                "torque limits: min {torque_min} must be < max {torque_max}"
            )));
        }
        Ok(Self {
            thrust_min,
            thrust_max,
            torque_min,
            torque_max,
        })
    }
}

/// Clamps every channel to its box. Idempotent.
pub fn saturate(input: PhysicalInput, limits: &ActuatorLimits) -> PhysicalInput {
    PhysicalInput {
        thrust: input.thrust.clamp(limits.thrust_min, limits.thrust_max),
        tau_phi: input.tau_phi.clamp(limits.torque_min, limits.torque_max),
        tau_theta: input.tau_theta.clamp(limits.torque_min, limits.torque_max),
        tau_psi: input.tau_psi.clamp(limits.torque_min, limits.torque_max),
    }
}

/// Time-derivative of the full state under the given actuator input.
///
/// Translational acceleration, Euler-angle rates and body-rate dynamics follow
/// the rigid-body model verbatim, including its sign convention in the
/// Euler-rate rows (`-r cos(phi) tan(theta)` and `-q sin(phi)/cos(theta)`),
/// which differs from the common ZYX kinematics; see the crate README.
pub fn plant_derivative(
    state: &PlantState,
    input: &PhysicalInput,
    params: &QuadrotorParams,
) -> Result<PlantState> {
    state.require_interior()?;

    let (sin_phi, cos_phi) = state.phi.sin_cos();
    let (sin_theta, cos_theta) = state.theta.sin_cos();
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    let tan_theta = sin_theta / cos_theta;

    let thrust_acc = input.thrust / params.mass;

    let ax = thrust_acc * (cos_phi * sin_theta * cos_psi + sin_phi * sin_psi);
    let ay = thrust_acc * (cos_phi * sin_theta * sin_psi - sin_phi * cos_psi);
    let az = thrust_acc * cos_phi * cos_theta - params.gravity;

    let phi_dot = state.p + state.q * sin_phi * tan_theta - state.r * cos_phi * tan_theta;
    let theta_dot = state.q * cos_phi + state.r * sin_phi;
    let psi_dot = -state.q * sin_phi / cos_theta + state.r * cos_phi / cos_theta;

    let p_dot = (params.jy - params.jz) / params.jx * state.q * state.r + input.tau_phi / params.jx;
    let q_dot =
        (params.jz - params.jx) / params.jy * state.p * state.r + input.tau_theta / params.jy;
    let r_dot = (params.jx - params.jy) / params.jz * state.p * state.q + input.tau_psi / params.jz;

    Ok(PlantState {
        x: state.vx,
        y: state.vy,
        z: state.vz,
        vx: ax,
        vy: ay,
        vz: az,
        phi: phi_dot,
        theta: theta_dot,
        psi: psi_dot,
        p: p_dot,
        q: q_dot,
        r: r_dot,
    })
}

/// One classical fourth-order Runge-Kutta step with the input held constant.
///
/// Any stage that leaves the interior region aborts with the offending stage
/// state attached.
pub fn step_rk4(
    state: &PlantState,
    input: &PhysicalInput,
    params: &QuadrotorParams,
    dt: f64,
) -> Result<PlantState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }

    let stage = |stage_idx: usize, s: &PlantState| -> Result<SVector<f64, 12>> {
        match plant_derivative(s, input, params) {
            Ok(d) => Ok(d.to_vector()),
            Err(e) => Err(Error::StageSingularity {
                stage: stage_idx,
                state: *s,
                source: Box::new(e),
            }),
        }
    };

    let x0 = state.to_vector();
    let k1 = stage(1, state)?;
    let k2 = stage(2, &PlantState::from_vector(&(x0 + 0.5 * dt * k1)))?;
    let k3 = stage(3, &PlantState::from_vector(&(x0 + 0.5 * dt * k2)))?;
    let k4 = stage(4, &PlantState::from_vector(&(x0 + dt * k3)))?;

    Ok(PlantState::from_vector(
        &(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)),
    ))
}

/// Controller-side bookkeeping attached to a log sample by closed-loop runs.
#[derive(Debug, Clone, Copy)]
pub struct LoopData {
    pub virtuals: VirtualInputs,
    pub reference: ReferenceSample,
    /// Euclidean norm of the (x, y, z) tracking error [m].
    pub err_pos: f64,
    /// Absolute yaw tracking error [rad].
    pub err_psi: f64,
    /// True when any virtual-input constraint box was violated this step.
    pub feasibility_violation: bool,
}

/// One logged simulation sample.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub state: PlantState,
    /// Controller output before saturation.
    pub raw: PhysicalInput,
    /// Input actually applied to the plant.
    pub saturated: PhysicalInput,
    /// True when saturation clipped any channel this step.
    pub saturation_active: bool,
    /// Present only for closed-loop runs.
    pub loop_data: Option<LoopData>,
}

/// Uniform-step simulation record. All per-sample data share one length and
/// the time grid is `t_k = k * dt` by construction.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn saturation_events(&self) -> usize {
        self.samples.iter().filter(|s| s.saturation_active).count()
    }

    pub fn feasibility_violation_events(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.loop_data.map(|l| l.feasibility_violation).unwrap_or(false))
            .count()
    }
}

/// What a step controller hands back to the simulator: the raw actuator
/// command plus optional closed-loop bookkeeping for the log.
#[derive(Debug, Clone, Copy)]
pub struct StepCommand {
    pub input: PhysicalInput,
    pub loop_data: Option<LoopData>,
}

impl From<PhysicalInput> for StepCommand {
    fn from(input: PhysicalInput) -> Self {
        Self {
            input,
            loop_data: None,
        }
    }
}

/// What to do when the controller or integrator fails mid-run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbortPolicy {
    /// Return the error (no log).
    #[default]
    Fail,
    /// Return the log accumulated so far together with the abort record.
    TruncateLog,
}

/// A finished (or truncated) run.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub log: TrajectoryLog,
    /// Set when the run stopped early; carries the abort time and cause.
    pub abort: Option<(f64, Error)>,
}

/// Number of integration steps covering `horizon` at step `dt`.
///
/// Plain floor of the ratio, with a relative epsilon so that exactly
/// representable ratios (100 / 1e-3) do not lose a step to rounding.
pub fn step_count(horizon: f64, dt: f64) -> usize {
    (horizon / dt * (1.0 + 1e-12)).floor() as usize
}

/// Fixed-step closed-loop simulation with the input held constant over each
/// step (zero-order hold): the controller is invoked once per step, before
/// integration, and saturation is applied to its output. The log gets
/// `step_count(horizon, dt) + 1` samples; the final sample's input columns
/// hold the command evaluated at the final state.
pub fn simulate<C>(
    initial: PlantState,
    mut controller: C,
    limits: &ActuatorLimits,
    params: &QuadrotorParams,
    horizon: f64,
    dt: f64,
    policy: AbortPolicy,
) -> Result<SimOutcome>
where
    C: FnMut(&PlantState, f64) -> Result<StepCommand>,
{
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon and dt must be > 0, got horizon = {horizon}, dt = {dt}"
        )));
    }

    let n_steps = step_count(horizon, dt);
    let mut log = TrajectoryLog {
        dt,
        samples: Vec::with_capacity(n_steps + 1),
    };
    let mut state = initial;

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        let command = match controller(&state, t) {
            Ok(c) => c,
            Err(e) => return abort(log, t, e, policy),
        };
        let saturated = saturate(command.input, limits);
        log.samples.push(Sample {
            t,
            state,
            raw: command.input,
            saturated,
            saturation_active: saturated != command.input,
            loop_data: command.loop_data,
        });

        if k == n_steps {
            break;
        }
        state = match step_rk4(&state, &saturated, params, dt) {
            Ok(s) => s,
            Err(e) => return abort(log, t, e, policy),
        };
    }

    Ok(SimOutcome { log, abort: None })
}

fn abort(log: TrajectoryLog, t: f64, cause: Error, policy: AbortPolicy) -> Result<SimOutcome> {
    let err = Error::SimulationAborted {
        t,
        source: Box::new(cause),
    };
    match policy {
        AbortPolicy::Fail => Err(err),
        AbortPolicy::TruncateLog => Ok(SimOutcome {
            log,
            abort: Some((t, err)),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> QuadrotorParams {
        QuadrotorParams::new(0.625, 9.8, 0.0019005, 0.0019536, 0.0036894).unwrap()
    }

    fn wide_limits() -> ActuatorLimits {
        ActuatorLimits::new(-1e6, 1e6, -1e6, 1e6).unwrap()
    }

    #[test]
    fn level_hover_has_zero_derivative() {
        let state = PlantState::default();
        let input = PhysicalInput {
            thrust: 0.625 * 9.8,
            ..Default::default()
        };
        let d = plant_derivative(&state, &input, &params()).unwrap();
        for v in d.to_vector().iter() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn free_fall_accelerates_down_only() {
        let d =
            plant_derivative(&PlantState::default(), &PhysicalInput::default(), &params()).unwrap();
        assert_eq!(d.vz, -9.8);
        let mut rest = d.to_vector();
        rest[5] = 0.0;
        assert_eq!(rest.norm(), 0.0);
    }

    #[test]
    fn pure_roll_torque_gives_unit_roll_acceleration() {
        let input = PhysicalInput {
            tau_phi: 0.0019005,
            ..Default::default()
        };
        let d = plant_derivative(&PlantState::default(), &input, &params()).unwrap();
        assert_eq!(d.p, 1.0);
        assert_eq!(d.q, 0.0);
        assert_eq!(d.r, 0.0);
    }

    #[test]
    fn tilt_compensated_thrust_holds_altitude() {
        // T = m g / (cos(phi) cos(theta)) cancels gravity at any constant
        // interior attitude with zero rates.
        let p = params();
        let mut rng = crate::test_util::seeded_rng(21);
        for _ in 0..100 {
            let angles = crate::test_util::interior_angles(&mut rng, 0.1);
            let state = PlantState {
                phi: angles.phi,
                theta: angles.theta,
                psi: angles.psi,
                ..Default::default()
            };
            let input = PhysicalInput {
                thrust: p.mass * p.gravity / (state.phi.cos() * state.theta.cos()),
                ..Default::default()
            };
            let d = plant_derivative(&state, &input, &p).unwrap();
            assert!(d.vz.abs() < 1e-12, "residual vertical acceleration {}", d.vz);
            assert_eq!((d.phi, d.theta, d.psi), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn derivative_rejects_non_interior_state() {
        let state = PlantState {
            theta: FRAC_PI_2,
            ..Default::default()
        };
        let err = plant_derivative(&state, &PhysicalInput::default(), &params()).unwrap_err();
        assert!(matches!(
            err,
            Error::KinematicSingularity { angle: "theta", .. }
        ));
    }

    #[test]
    fn saturate_clamps_to_box() {
        let limits = ActuatorLimits::new(-100.0, 100.0, -0.5, 0.5).unwrap();
        let sat = saturate(
            PhysicalInput {
                thrust: 150.0,
                tau_phi: -0.7,
                tau_theta: 0.2,
                tau_psi: 0.0,
            },
            &limits,
        );
        assert_eq!(sat.thrust, 100.0);
        assert_eq!(sat.tau_phi, -0.5);
        assert_eq!(sat.tau_theta, 0.2);
        assert_eq!(sat.tau_psi, 0.0);

        let inside = PhysicalInput {
            thrust: 6.125,
            tau_phi: 0.1,
            tau_theta: -0.2,
            tau_psi: 0.3,
        };
        assert_eq!(saturate(inside, &limits), inside);
    }

    #[test]
    fn rk4_hover_is_a_fixed_point() {
        let state = PlantState::default();
        let input = PhysicalInput {
            thrust: 0.625 * 9.8,
            ..Default::default()
        };
        let next = step_rk4(&state, &input, &params(), 0.05).unwrap();
        assert_eq!(next, state);
    }

    #[test]
    fn rk4_free_fall_matches_constant_acceleration() {
        let p = params();
        let mut state = PlantState::default();
        let dt = 1e-3;
        for _ in 0..1000 {
            state = step_rk4(&state, &PhysicalInput::default(), &p, dt).unwrap();
        }
        assert_relative_eq!(state.z, -4.9, epsilon = 1e-9);
        assert_relative_eq!(state.vz, -9.8, epsilon = 1e-12);
    }

    #[test]
    fn rk4_single_axis_torque_matches_linear_ramp() {
        let p = params();
        let tau = 5e-4;
        let input = PhysicalInput {
            tau_phi: tau,
            ..Default::default()
        };
        let mut state = PlantState::default();
        let dt = 1e-3;
        for _ in 0..1000 {
            state = step_rk4(&state, &input, &p, dt).unwrap();
        }
        let expected = tau / p.jx * 1.0;
        assert!(
            ((state.p - expected) / expected).abs() < 1e-10,
            "p = {}, expected {}",
            state.p,
            expected
        );
    }

    #[test]
    fn rk4_reports_offending_stage_state() {
        // Fast pitch rate: the half-step stage leaves the interior region.
        let p = params();
        let state = PlantState {
            theta: FRAC_PI_2 - 0.01,
            q: 10.0,
            ..Default::default()
        };
        let err = step_rk4(&state, &PhysicalInput::default(), &p, 0.1).unwrap_err();
        match err {
            Error::StageSingularity { stage, state, .. } => {
                assert!(stage >= 2);
                assert!(state.theta.abs() >= FRAC_PI_2 - ANGLE_GUARD);
            }
            other => panic!("expected stage singularity, got {other:?}"),
        }
    }

    #[test]
    fn simulate_hover_stays_put() {
        let p = params();
        let hover = PhysicalInput {
            thrust: p.mass * p.gravity,
            ..Default::default()
        };
        let out = simulate(
            PlantState::default(),
            |_, _| Ok(hover.into()),
            &wide_limits(),
            &p,
            10.0,
            1e-3,
            AbortPolicy::Fail,
        )
        .unwrap();
        let max_dev = out
            .log
            .samples
            .iter()
            .map(|s| (s.state.x.powi(2) + s.state.y.powi(2) + s.state.z.powi(2)).sqrt())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-9, "max deviation {max_dev}");
    }

    #[test]
    fn simulate_ballistic_matches_closed_form() {
        let p = params();
        let out = simulate(
            PlantState::default(),
            |_, _| Ok(PhysicalInput::default().into()),
            &wide_limits(),
            &p,
            2.0,
            1e-3,
            AbortPolicy::Fail,
        )
        .unwrap();
        for s in &out.log.samples {
            assert_relative_eq!(s.state.z, -0.5 * 9.8 * s.t * s.t, epsilon = 1e-9);
            assert_relative_eq!(s.state.vz, -9.8 * s.t, epsilon = 1e-10);
        }
    }

    #[test]
    fn simulate_log_length_is_floor_plus_one() {
        let p = params();
        let out = simulate(
            PlantState::default(),
            |_, _| Ok(PhysicalInput::default().into()),
            &wide_limits(),
            &p,
            100.0,
            1e-3,
            AbortPolicy::Fail,
        )
        .unwrap();
        assert_eq!(out.log.len(), 100_001);
        // A ratio that is not exactly representable must not lose a step.
        assert_eq!(step_count(0.1, 1e-3), 100);
    }

    #[test]
    fn simulate_truncates_log_on_singularity() {
        let p = params();
        // Strong pitch torque drives theta through pi/2 in well under a second.
        let input = PhysicalInput {
            thrust: p.mass * p.gravity,
            tau_theta: 0.05,
            ..Default::default()
        };
        let out = simulate(
            PlantState::default(),
            |_, _| Ok(input.into()),
            &wide_limits(),
            &p,
            5.0,
            1e-3,
            AbortPolicy::TruncateLog,
        )
        .unwrap();
        let (t, err) = out.abort.expect("run should abort");
        assert!(t > 0.0 && t < 5.0);
        assert!(matches!(err, Error::SimulationAborted { .. }));
        assert!(!out.log.is_empty());
        assert!(out.log.len() < 5001);

        let failing = simulate(
            PlantState::default(),
            |_, _| Ok(input.into()),
            &wide_limits(),
            &p,
            5.0,
            1e-3,
            AbortPolicy::Fail,
        );
        assert!(failing.is_err());
    }

    #[test]
    fn rk4_global_order_is_four() {
        // Constant-input run with all channels active; halving dt must shrink
        // the error against a fine-step reference by ~16x (>= 15x required).
        let p = params();
        let input = PhysicalInput {
            thrust: 7.0,
            tau_phi: 1e-3,
            tau_theta: -2e-3,
            tau_psi: 5e-4,
        };
        let initial = PlantState {
            phi: 0.05,
            theta: -0.04,
            psi: 0.3,
            p: 0.1,
            q: -0.05,
            r: 0.08,
            ..Default::default()
        };

        let run = |dt: f64| -> SVector<f64, 12> {
            let steps = step_count(1.0, dt);
            let mut s = initial;
            for _ in 0..steps {
                s = step_rk4(&s, &input, &p, dt).unwrap();
            }
            s.to_vector()
        };

        let reference = run(1.0 / 81920.0);
        let err_coarse = (run(1.0 / 100.0) - reference).norm();
        let err_fine = (run(1.0 / 200.0) - reference).norm();
        assert!(
            err_coarse / err_fine >= 15.0,
            "order check: {err_coarse:.3e} / {err_fine:.3e} = {:.2}",
            err_coarse / err_fine
        );
    }
}
