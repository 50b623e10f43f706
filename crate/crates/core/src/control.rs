//! Cascaded control laws for the transformed model: altitude, yaw and lateral
//! channels, assembled into a single control step that maps plant state and
//! reference to actuator commands.
//!
//! The thrust-channel derivatives are propagated analytically through the
//! closed loop (no observers): u0_dot and u0_ddot follow from re-substituting
//! the closed-loop altitude dynamics, which is what makes the fourth-order
//! lateral law implementable from (position, velocity, attitude, rates) alone.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::fas_model::{
    euler_rate_matrix, lateral_drift, lateral_input_matrix, thrust_direction,
    thrust_direction_jacobian, virtual_to_physical, ConstraintViolation, EulerAngles, EulerRates,
    InputConstraintSet, VirtualInputs,
};
use crate::plant::{
    plant_derivative, saturate, step_count, ActuatorLimits, LoopData, PhysicalInput, PlantState,
    QuadrotorParams, Sample, SimOutcome, TrajectoryLog,
};

/// Reference signals with the analytic derivatives each channel consumes:
/// altitude and lateral positions to order four, yaw to order two. Index is
/// the derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub z: [f64; 5],
    pub psi: [f64; 3],
    pub x: [f64; 5],
    pub y: [f64; 5],
}

/// Feedback rows for the three subsystems. The lateral channel uses one row
/// per axis, applied block-diagonally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    /// Altitude row (position, velocity).
    pub altitude: [f64; 2],
    /// Yaw row (angle, rate).
    pub yaw: [f64; 2],
    /// Lateral x row (orders 0..=3).
    pub lateral_x: [f64; 4],
    /// Lateral y row (orders 0..=3).
    pub lateral_y: [f64; 4],
}

/// Transformed thrust input with its two analytic time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThrustChain {
    pub u0: f64,
    pub u0_dot: f64,
    pub u0_ddot: f64,
}

/// Altitude law with the closed-loop derivative chain.
///
/// u0 feeds back altitude error and adds gravity plus the reference
/// acceleration; its derivatives re-substitute the closed-loop error
/// dynamics, so no numerical differentiation or observer is involved.
pub fn altitude_law(
    z: f64,
    vz: f64,
    reference: &ReferenceSample,
    gain: &[f64; 2],
    gravity: f64,
) -> ThrustChain {
    let e0 = z - reference.z[0];
    let e1 = vz - reference.z[1];
    let u0 = -(gain[0] * e0 + gain[1] * e1) + gravity + reference.z[2];
    let e2 = u0 - gravity - reference.z[2];
    let u0_dot = -(gain[0] * e1 + gain[1] * e2) + reference.z[3];
    let e3 = u0_dot - reference.z[3];
    let u0_ddot = -(gain[0] * e2 + gain[1] * e3) + reference.z[4];
    ThrustChain {
        u0,
        u0_dot,
        u0_ddot,
    }
}

/// Yaw law: error feedback plus reference acceleration feedforward.
pub fn yaw_law(psi: f64, psi_rate: f64, reference: &ReferenceSample, gain: &[f64; 2]) -> f64 {
    -(gain[0] * (psi - reference.psi[0]) + gain[1] * (psi_rate - reference.psi[1]))
        + reference.psi[2]
}

/// Model-based lateral state chain (x, y) with derivative orders 0..=3.
/// Orders two and three come from the model equations, not from
/// differentiating measurements.
pub fn lateral_state_chain(
    state: &PlantState,
    rates: &EulerRates,
    u0: f64,
    u0_dot: f64,
) -> Result<[Vector2<f64>; 4]> {
    let angles = EulerAngles::from_state(state);
    let (fx, fy) = thrust_direction(&angles)?;
    let jac = thrust_direction_jacobian(&angles)?;
    let rate_vec = rates.as_vector();
    Ok([
        Vector2::new(state.x, state.y),
        Vector2::new(state.vx, state.vy),
        Vector2::new(u0 * fx, u0 * fy),
        Vector2::new(
            u0_dot * fx + u0 * jac.x.dot(&rate_vec.transpose()),
            u0_dot * fy + u0 * jac.y.dot(&rate_vec.transpose()),
        ),
    ])
}

/// Lateral law: cancels the drift term and assigns the fourth-order error
/// dynamics through the inverse input matrix.
#[allow(clippy::too_many_arguments)]
pub fn lateral_law(
    x_chain: &[Vector2<f64>; 4],
    angles: &EulerAngles,
    rates: &EulerRates,
    thrust: &ThrustChain,
    u1: f64,
    reference: &ReferenceSample,
    gain_x: &[f64; 4],
    gain_y: &[f64; 4],
) -> Result<Vector2<f64>> {
    let drift = lateral_drift(angles, rates, thrust.u0, thrust.u0_dot, thrust.u0_ddot, u1)?;
    let input_matrix = lateral_input_matrix(angles, thrust.u0)?;

    let mut feedback = Vector2::zeros();
    for k in 0..4 {
        feedback[0] += gain_x[k] * (x_chain[k][0] - reference.x[k]);
        feedback[1] += gain_y[k] * (x_chain[k][1] - reference.y[k]);
    }
    let rhs = feedback + drift - Vector2::new(reference.x[4], reference.y[4]);
    Ok(-input_matrix.solve(&rhs))
}

/// One evaluated control step: raw and saturated actuator commands, the
/// virtual inputs behind them, and any violated virtual-input boxes.
#[derive(Debug, Clone)]
pub struct ControlStep {
    pub raw: PhysicalInput,
    pub saturated: PhysicalInput,
    pub virtuals: VirtualInputs,
    pub violations: Vec<ConstraintViolation>,
}

/// Full cascade: altitude and yaw laws, Euler rates from the state, the
/// model-based lateral chain, the lateral law, then the algebraic map back
/// to thrust and torques with hardware saturation.
///
/// Virtual-box violations are recorded, never enforced: the boxes define
/// feasibility, the actuator limits define hardware.
pub fn control_step(
    state: &PlantState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    params: &QuadrotorParams,
    limits: &ActuatorLimits,
    constraints: &InputConstraintSet,
) -> Result<ControlStep> {
    state.require_interior()?;

    let thrust = altitude_law(
        state.z,
        state.vz,
        reference,
        &gains.altitude,
        params.gravity,
    );

    let m = euler_rate_matrix(state.phi, state.theta)?;
    let rates_vec = m * Vector3::new(state.p, state.q, state.r);
    let rates = EulerRates::from_vector(&rates_vec);

    let u1 = yaw_law(state.psi, rates.psi, reference, &gains.yaw);

    let angles = EulerAngles::from_state(state);
    let chain = lateral_state_chain(state, &rates, thrust.u0, thrust.u0_dot)?;
    let u2 = lateral_law(
        &chain,
        &angles,
        &rates,
        &thrust,
        u1,
        reference,
        &gains.lateral_x,
        &gains.lateral_y,
    )?;

    let virtuals = VirtualInputs {
        u0: thrust.u0,
        u0_dot: thrust.u0_dot,
        u0_ddot: thrust.u0_ddot,
        u1,
        u2,
    };
    let raw = virtual_to_physical(&virtuals, state, params)?;
    let saturated = saturate(raw, limits);
    let violations = constraints.violations(&virtuals);

    Ok(ControlStep {
        raw,
        saturated,
        virtuals,
        violations,
    })
}

/// How the closed-loop runner reacts when the control law hits the
/// input-matrix singularity (u0 through zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularityPolicy {
    /// Stop the run (subject to the log policy).
    #[default]
    Abort,
    /// Keep the previous saturated command for this step and flag the sample
    /// as a feasibility violation.
    HoldPrevious,
}

/// What to do with the log when a closed-loop run stops early.
pub use crate::plant::AbortPolicy;

/// Closed-loop simulation with the control law evaluated at every integrator
/// stage (continuous-feedback realization).
///
/// Holding the input constant over a step instead would shift the assigned
/// closed-loop poles by O(dt) and break the exact linearity of the error
/// dynamics; stage-wise evaluation keeps the simulated loop within integrator
/// accuracy of the assigned linear system. One log sample is recorded per
/// step from the step-start evaluation.
pub fn simulate_closed_loop<C>(
    initial: PlantState,
    mut command: C,
    params: &QuadrotorParams,
    horizon: f64,
    dt: f64,
    singularity: SingularityPolicy,
    abort_policy: AbortPolicy,
) -> Result<SimOutcome>
where
    C: FnMut(&PlantState, f64) -> Result<ControlStep>,
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
    let mut previous: Option<Sample> = None;

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        let sample = match command(&state, t) {
            Ok(step) => Sample {
                t,
                state,
                raw: step.raw,
                saturated: step.saturated,
                saturation_active: step.saturated != step.raw,
                loop_data: Some(LoopData {
                    virtuals: step.virtuals,
                    reference: ReferenceSample::default(),
                    err_pos: 0.0,
                    err_psi: 0.0,
                    feasibility_violation: !step.violations.is_empty(),
                }),
            },
            Err(cause) => match (singularity, &previous) {
                (SingularityPolicy::HoldPrevious, Some(prev))
                    if matches!(cause, Error::NearSingularInputMatrix { .. }) =>
                {
                    let mut held = *prev;
                    held.t = t;
                    held.state = state;
                    if let Some(loop_data) = held.loop_data.as_mut() {
                        loop_data.feasibility_violation = true;
                    }
                    held
                }
                _ => return abort(log, t, cause, abort_policy),
            },
        };
        log.samples.push(sample);
        previous = Some(sample);

        if k == n_steps {
            break;
        }

        match rk4_with_feedback(&state, t, dt, &mut command, params) {
            Ok(next) => state = next,
            Err(cause) => {
                let held_ok = singularity == SingularityPolicy::HoldPrevious
                    && matches!(
                        cause,
                        Error::NearSingularInputMatrix { .. }
                            | Error::StageSingularity { .. }
                    );
                if held_ok {
                    // Fall back to holding the step-start command across the step.
                    match crate::plant::step_rk4(&state, &sample.saturated, params, dt) {
                        Ok(next) => state = next,
                        Err(c2) => return abort(log, t, c2, abort_policy),
                    }
                } else {
                    return abort(log, t, cause, abort_policy);
                }
            }
        }
    }

    Ok(SimOutcome { log, abort: None })
}

fn rk4_with_feedback<C>(
    state: &PlantState,
    t: f64,
    dt: f64,
    command: &mut C,
    params: &QuadrotorParams,
) -> Result<PlantState>
where
    C: FnMut(&PlantState, f64) -> Result<ControlStep>,
{
    let derivative = |command: &mut C, s: &PlantState, st: f64| -> Result<PlantState> {
        let step = command(s, st)?;
        plant_derivative(s, &step.saturated, params)
    };

    let x0 = state.to_vector();
    let k1 = derivative(command, state, t)?.to_vector();
    let k2 = derivative(
        command,
        &PlantState::from_vector(&(x0 + 0.5 * dt * k1)),
        t + 0.5 * dt,
    )?
    .to_vector();
    let k3 = derivative(
        command,
        &PlantState::from_vector(&(x0 + 0.5 * dt * k2)),
        t + 0.5 * dt,
    )?
    .to_vector();
    let k4 = derivative(command, &PlantState::from_vector(&(x0 + dt * k3)), t + dt)?.to_vector();

    Ok(PlantState::from_vector(
        &(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)),
    ))
}

fn abort(
    log: TrajectoryLog,
    t: f64,
    cause: Error,
    policy: AbortPolicy,
) -> Result<SimOutcome> {
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

/// Bundles the control law with its reference source and fills per-sample
/// tracking errors into the log.
pub struct TrackingController<R> {
    pub gains: ControllerGains,
    pub params: QuadrotorParams,
    pub limits: ActuatorLimits,
    pub constraints: InputConstraintSet,
    pub reference: R,
}

impl<R> TrackingController<R>
where
    R: Fn(f64) -> ReferenceSample,
{
    /// One control evaluation at (state, t).
    pub fn command(&self, state: &PlantState, t: f64) -> Result<ControlStep> {
        control_step(
            state,
            &(self.reference)(t),
            &self.gains,
            &self.params,
            &self.limits,
            &self.constraints,
        )
    }

    /// Closed-loop run over the horizon; the log carries the reference and
    /// tracking-error columns per sample.
    pub fn simulate(
        &self,
        initial: PlantState,
        horizon: f64,
        dt: f64,
        singularity: SingularityPolicy,
        abort_policy: AbortPolicy,
    ) -> Result<SimOutcome> {
        let mut outcome = simulate_closed_loop(
            initial,
            |state, t| self.command(state, t),
            &self.params,
            horizon,
            dt,
            singularity,
            abort_policy,
        )?;
        for sample in &mut outcome.log.samples {
            let reference = (self.reference)(sample.t);
            if let Some(loop_data) = sample.loop_data.as_mut() {
                let state = &sample.state;
                loop_data.reference = reference;
                loop_data.err_pos = ((state.x - reference.x[0]).powi(2)
                    + (state.y - reference.y[0]).powi(2)
                    + (state.z - reference.z[0]).powi(2))
                .sqrt();
                loop_data.err_psi = (state.psi - reference.psi[0]).abs();
            }
        }
        Ok(outcome)
    }
}
