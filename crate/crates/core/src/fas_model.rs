//! Exact transformation between actuator-level inputs (thrust, torques) and
//! the virtual inputs of the fully actuated form: the Euler-rate matrix and
//! its time derivative, the lateral thrust-direction functions with their
//! angle Jacobian rows, the drift and input-matrix terms of the fourth-order
//! lateral dynamics, and the bidirectional input maps.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix3, RowVector3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::plant::{check_interior, PhysicalInput, PlantState, QuadrotorParams, ANGLE_GUARD};

/// |det| threshold below which the lateral input matrix is treated as singular.
pub const INPUT_MATRIX_DET_TOLERANCE: f64 = 1e-9;

/// Roll, pitch, yaw [rad].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    pub fn from_state(state: &PlantState) -> Self {
        Self {
            phi: state.phi,
            theta: state.theta,
            psi: state.psi,
        }
    }
}

/// Euler-angle rates (phi_dot, theta_dot, psi_dot) [rad/s].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerRates {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerRates {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self {
            phi: v[0],
            theta: v[1],
            psi: v[2],
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.phi, self.theta, self.psi)
    }
}

/// Transformed inputs of the fully actuated form: the thrust channel with its
/// first two time derivatives, the yaw channel, and the two-component lateral
/// channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualInputs {
    /// Transformed thrust input [m/s^2].
    pub u0: f64,
    /// First time derivative of `u0` [m/s^3].
    pub u0_dot: f64,
    /// Second time derivative of `u0` [m/s^4].
    pub u0_ddot: f64,
    /// Yaw virtual input (commanded yaw-angle acceleration) [rad/s^2].
    pub u1: f64,
    /// Lateral virtual input (commanded roll/pitch-angle accelerations) [rad/s^2].
    pub u2: Vector2<f64>,
}

impl VirtualInputs {
    /// Commanded Euler-angle acceleration vector (roll, pitch, yaw).
    pub fn euler_accel(&self) -> Vector3<f64> {
        Vector3::new(self.u2[0], self.u2[1], self.u1)
    }
}

/// Matrix mapping body rates to Euler-angle rates. Invertible for
/// |theta| < pi/2 (|det| = 1/cos(theta)).
pub fn euler_rate_matrix(phi: f64, theta: f64) -> Result<Matrix3<f64>> {
    if !(theta.abs() < FRAC_PI_2 - ANGLE_GUARD) {
        return Err(Error::KinematicSingularity {
            angle: "theta",
            value: theta,
        });
    }
    let (sin_phi, cos_phi) = phi.sin_cos();
    let (sin_theta, cos_theta) = theta.sin_cos();
    let tan_theta = sin_theta / cos_theta;

    Ok(Matrix3::new(
        1.0,
        sin_phi * tan_theta,
        -cos_phi * tan_theta,
        0.0,
        cos_phi,
        sin_phi,
        0.0,
        -sin_phi / cos_theta,
        cos_phi / cos_theta,
    ))
}

/// Time derivative of [`euler_rate_matrix`] along (phi_dot, theta_dot),
/// assembled from the analytic partials with respect to each angle.
pub fn euler_rate_matrix_dot(
    phi: f64,
    theta: f64,
    phi_dot: f64,
    theta_dot: f64,
) -> Result<Matrix3<f64>> {
    if !(theta.abs() < FRAC_PI_2 - ANGLE_GUARD) {
        return Err(Error::KinematicSingularity {
            angle: "theta",
            value: theta,
        });
    }
    let (sin_phi, cos_phi) = phi.sin_cos();
    let (sin_theta, cos_theta) = theta.sin_cos();
    let tan_theta = sin_theta / cos_theta;
    let sec_theta = 1.0 / cos_theta;
    let sec2_theta = sec_theta * sec_theta;

    let d_phi = Matrix3::new(
        0.0,
        cos_phi * tan_theta,
        sin_phi * tan_theta,
        0.0,
        -sin_phi,
        cos_phi,
        0.0,
        -cos_phi * sec_theta,
        -sin_phi * sec_theta,
    );
    let d_theta = Matrix3::new(
        0.0,
        sin_phi * sec2_theta,
        -cos_phi * sec2_theta,
        0.0,
        0.0,
        0.0,
        0.0,
        -sin_phi * sec_theta * tan_theta,
        cos_phi * sec_theta * tan_theta,
    );

    Ok(d_phi * phi_dot + d_theta * theta_dot)
}

/// Lateral acceleration per unit transformed thrust: x and y components of
/// the tilted thrust direction.
pub fn thrust_direction(angles: &EulerAngles) -> Result<(f64, f64)> {
    check_interior(angles.phi, angles.theta)?;
    let (sin_psi, cos_psi) = angles.psi.sin_cos();
    let tan_phi = angles.phi.tan();
    let tan_theta = angles.theta.tan();
    let sec_theta = 1.0 / angles.theta.cos();

    let fx = tan_theta * cos_psi + tan_phi * sec_theta * sin_psi;
    let fy = tan_theta * sin_psi - tan_phi * sec_theta * cos_psi;
    Ok((fx, fy))
}

/// Rows of partial derivatives of the two [`thrust_direction`] components
/// with respect to (phi, theta, psi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionJacobian {
    pub x: RowVector3<f64>,
    pub y: RowVector3<f64>,
}

/// Angle Jacobian of [`thrust_direction`].
pub fn thrust_direction_jacobian(angles: &EulerAngles) -> Result<DirectionJacobian> {
    check_interior(angles.phi, angles.theta)?;
    let (sin_psi, cos_psi) = angles.psi.sin_cos();
    let tan_phi = angles.phi.tan();
    let sec_phi = 1.0 / angles.phi.cos();
    let sec2_phi = sec_phi * sec_phi;
    let tan_theta = angles.theta.tan();
    let sec_theta = 1.0 / angles.theta.cos();
    let sec2_theta = sec_theta * sec_theta;

    let x = RowVector3::new(
        sec2_phi * sec_theta * sin_psi,
        sec2_theta * cos_psi + tan_phi * sec_theta * tan_theta * sin_psi,
        -tan_theta * sin_psi + tan_phi * sec_theta * cos_psi,
    );
    let y = RowVector3::new(
        -sec2_phi * sec_theta * cos_psi,
        sec2_theta * sin_psi - tan_phi * sec_theta * tan_theta * cos_psi,
        tan_theta * cos_psi + tan_phi * sec_theta * sin_psi,
    );
    Ok(DirectionJacobian { x, y })
}

/// Time derivative of [`thrust_direction_jacobian`] along the given
/// Euler-angle rates.
pub fn thrust_direction_jacobian_rate(
    angles: &EulerAngles,
    rates: &EulerRates,
) -> Result<DirectionJacobian> {
    check_interior(angles.phi, angles.theta)?;
    let (sin_psi, cos_psi) = angles.psi.sin_cos();
    let tan_phi = angles.phi.tan();
    let sec_phi = 1.0 / angles.phi.cos();
    let sec2_phi = sec_phi * sec_phi;
    let tan_theta = angles.theta.tan();
    let tan2_theta = tan_theta * tan_theta;
    let sec_theta = 1.0 / angles.theta.cos();
    let sec2_theta = sec_theta * sec_theta;
    let sec3_theta = sec2_theta * sec_theta;
    let (pd, td, yd) = (rates.phi, rates.theta, rates.psi);

    let x1 = 2.0 * pd * sec2_phi * tan_phi * sec_theta * sin_psi
        + td * sec2_phi * sec_theta * tan_theta * sin_psi
        + yd * sec2_phi * sec_theta * cos_psi;
    let x2 = 2.0 * td * sec2_theta * tan_theta * cos_psi - yd * sec2_theta * sin_psi
        + pd * sec2_phi * sec_theta * tan_theta * sin_psi
        + td * tan_phi * sec_theta * tan2_theta * sin_psi
        + td * tan_phi * sec3_theta * sin_psi
        + yd * tan_phi * sec_theta * tan_theta * cos_psi;
    let x3 = -td * sec2_theta * sin_psi - yd * tan_theta * cos_psi
        + pd * sec2_phi * sec_theta * cos_psi
        + td * tan_phi * sec_theta * tan_theta * cos_psi
        - yd * tan_phi * sec_theta * sin_psi;

    let y1 = -2.0 * pd * sec2_phi * tan_phi * sec_theta * cos_psi
        - td * sec2_phi * sec_theta * tan_theta * cos_psi
        + yd * sec2_phi * sec_theta * sin_psi;
    let y2 = 2.0 * td * sec2_theta * tan_theta * sin_psi + yd * sec2_theta * cos_psi
        - pd * sec2_phi * sec_theta * tan_theta * cos_psi
        - td * tan_phi * sec_theta * tan2_theta * cos_psi
        - td * tan_phi * sec3_theta * cos_psi
        + yd * tan_phi * sec_theta * tan_theta * sin_psi;
    let y3 = td * sec2_theta * cos_psi - yd * tan_theta * sin_psi
        + pd * sec2_phi * sec_theta * sin_psi
        + td * tan_phi * sec_theta * tan_theta * sin_psi
        + yd * tan_phi * sec_theta * cos_psi;

    Ok(DirectionJacobian {
        x: RowVector3::new(x1, x2, x3),
        y: RowVector3::new(y1, y2, y3),
    })
}

/// Drift term of the fourth-order lateral dynamics: everything in
/// x'''' and y'''' that does not multiply the lateral virtual input.
pub fn lateral_drift(
    angles: &EulerAngles,
    rates: &EulerRates,
    u0: f64,
    u0_dot: f64,
    u0_ddot: f64,
    u1: f64,
) -> Result<Vector2<f64>> {
    let (fx, fy) = thrust_direction(angles)?;
    let jac = thrust_direction_jacobian(angles)?;
    let jac_rate = thrust_direction_jacobian_rate(angles, rates)?;
    let rate_vec = rates.as_vector();

    let gx = u0_ddot * fx
        + (2.0 * u0_dot * jac.x + u0 * jac_rate.x).dot(&rate_vec.transpose())
        + u0 * jac.x[2] * u1;
    let gy = u0_ddot * fy
        + (2.0 * u0_dot * jac.y + u0 * jac_rate.y).dot(&rate_vec.transpose())
        + u0 * jac.y[2] * u1;
    Ok(Vector2::new(gx, gy))
}

/// Input matrix of the fourth-order lateral dynamics, with its determinant
/// computed by two independent routes.
///
/// `det` is the u0-linear singularity measure used everywhere downstream:
/// the cofactor expansion of the direction-Jacobian block scaled once by u0.
/// `det_closed_form` is the same quantity from the trigonometric closed form
/// u0 / (cos^3(theta) cos^2(phi)); the two must always agree. The literal
/// determinant of `matrix` is `u0 * det`; both vanish exactly when u0 = 0,
/// so the singularity condition is identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralInputMatrix {
    pub matrix: Matrix2<f64>,
    pub det: f64,
    pub det_closed_form: f64,
}

impl LateralInputMatrix {
    /// Exact 2x2 solve of `matrix * x = rhs`.
    pub fn solve(&self, rhs: &Vector2<f64>) -> Vector2<f64> {
        let m = &self.matrix;
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        Vector2::new(
            (m[(1, 1)] * rhs[0] - m[(0, 1)] * rhs[1]) / det,
            (m[(0, 0)] * rhs[1] - m[(1, 0)] * rhs[0]) / det,
        )
    }
}

/// Builds the lateral input matrix. Errors when |det| falls below
/// [`INPUT_MATRIX_DET_TOLERANCE`] (u0 at or near zero); callers decide how to
/// treat that infeasibility.
pub fn lateral_input_matrix(angles: &EulerAngles, u0: f64) -> Result<LateralInputMatrix> {
    let jac = thrust_direction_jacobian(angles)?;
    let matrix = u0
        * Matrix2::new(
            jac.x[0], jac.x[1], //
            jac.y[0], jac.y[1],
        );
    let det = u0 * (jac.x[0] * jac.y[1] - jac.x[1] * jac.y[0]);

    let cos_theta = angles.theta.cos();
    let cos_phi = angles.phi.cos();
    let det_closed_form = u0 / (cos_theta.powi(3) * cos_phi.powi(2));

    if det.abs() < INPUT_MATRIX_DET_TOLERANCE {
        return Err(Error::NearSingularInputMatrix {
            det,
            u0,
            tolerance: INPUT_MATRIX_DET_TOLERANCE,
        });
    }
    Ok(LateralInputMatrix {
        matrix,
        det,
        det_closed_form,
    })
}

/// Gyroscopic body-rate coupling accelerations.
fn gyroscopic_accel(state: &PlantState, params: &QuadrotorParams) -> Vector3<f64> {
    Vector3::new(
        (params.jy - params.jz) / params.jx * state.q * state.r,
        (params.jz - params.jx) / params.jy * state.p * state.r,
        (params.jx - params.jy) / params.jz * state.p * state.q,
    )
}

/// Euler-angle rates implied by the current state: M(phi, theta) * (p, q, r).
pub fn euler_rates(state: &PlantState) -> Result<EulerRates> {
    let m = euler_rate_matrix(state.phi, state.theta)?;
    let rates = m * Vector3::new(state.p, state.q, state.r);
    Ok(EulerRates::from_vector(&rates))
}

/// Maps virtual inputs (transformed thrust plus commanded Euler-angle
/// accelerations) back to thrust and body torques by exact algebraic
/// inversion of the input transformation.
pub fn virtual_to_physical(
    virtuals: &VirtualInputs,
    state: &PlantState,
    params: &QuadrotorParams,
) -> Result<PhysicalInput> {
    state.require_interior()?;
    let m = euler_rate_matrix(state.phi, state.theta)?;
    let body_rates = Vector3::new(state.p, state.q, state.r);
    let phi_rates = m * body_rates;
    let m_dot = euler_rate_matrix_dot(state.phi, state.theta, phi_rates[0], phi_rates[1])?;
    let m_inv = m.try_inverse().ok_or(Error::KinematicSingularity {
        angle: "theta",
        value: state.theta,
    })?;

    let torque_accel =
        m_inv * (virtuals.euler_accel() - m_dot * body_rates) - gyroscopic_accel(state, params);

    Ok(PhysicalInput {
        thrust: params.mass * virtuals.u0 / (state.phi.cos() * state.theta.cos()),
        tau_phi: params.jx * torque_accel[0],
        tau_theta: params.jy * torque_accel[1],
        tau_psi: params.jz * torque_accel[2],
    })
}

/// Forward input transformation: thrust and torques to the transformed
/// thrust input and the commanded Euler-angle acceleration vector.
pub fn physical_to_virtual(
    input: &PhysicalInput,
    state: &PlantState,
    params: &QuadrotorParams,
) -> Result<(f64, Vector3<f64>)> {
    state.require_interior()?;
    let m = euler_rate_matrix(state.phi, state.theta)?;
    let body_rates = Vector3::new(state.p, state.q, state.r);
    let phi_rates = m * body_rates;
    let m_dot = euler_rate_matrix_dot(state.phi, state.theta, phi_rates[0], phi_rates[1])?;

    let torque_accel = Vector3::new(
        input.tau_phi / params.jx,
        input.tau_theta / params.jy,
        input.tau_psi / params.jz,
    );
    let u0 = input.thrust / params.mass * state.phi.cos() * state.theta.cos();
    let euler_accel = m_dot * body_rates + m * (gyroscopic_accel(state, params) + torque_accel);
    Ok((u0, euler_accel))
}

/// Closed interval bound for one virtual-input channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "interval: lo {lo} must be < hi {hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Signed distance to the nearest bound: positive inside, negative outside.
    pub fn margin(&self, v: f64) -> f64 {
        (v - self.lo).min(self.hi - v)
    }
}

/// Which virtual-input channel a constraint applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    U0,
    U0Dot,
    U0Ddot,
    U1,
    U2X,
    U2Y,
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::U0 => "u0",
            ConstraintKind::U0Dot => "u0_dot",
            ConstraintKind::U0Ddot => "u0_ddot",
            ConstraintKind::U1 => "u1",
            ConstraintKind::U2X => "u2_x",
            ConstraintKind::U2Y => "u2_y",
        }
    }
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One violated constraint with the offending value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintViolation {
    pub kind: ConstraintKind,
    pub value: f64,
}

/// Box constraints on the virtual inputs. The zero exclusion on the thrust
/// channel is realized by requiring its box not to contain zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputConstraintSet {
    pub u0: Interval,
    pub u0_dot: Interval,
    pub u0_ddot: Interval,
    pub u1: Interval,
    pub u2: [Interval; 2],
}

impl InputConstraintSet {
    pub fn validate(&self) -> Result<()> {
        if self.u0.contains(0.0) {
            return Err(Error::InvalidArgument(format!(
                "u0 box [{}, {}] must exclude zero (sign-restricted thrust channel)",
                self.u0.lo, self.u0.hi
            )));
        }
        Ok(())
    }

    fn channels(&self, v: &VirtualInputs) -> [(ConstraintKind, Interval, f64); 6] {
        [
            (ConstraintKind::U0, self.u0, v.u0),
            (ConstraintKind::U0Dot, self.u0_dot, v.u0_dot),
            (ConstraintKind::U0Ddot, self.u0_ddot, v.u0_ddot),
            (ConstraintKind::U1, self.u1, v.u1),
            (ConstraintKind::U2X, self.u2[0], v.u2[0]),
            (ConstraintKind::U2Y, self.u2[1], v.u2[1]),
        ]
    }

    /// Every violated channel, in declaration order.
    pub fn violations(&self, v: &VirtualInputs) -> Vec<ConstraintViolation> {
        self.channels(v)
            .into_iter()
            .filter(|(_, interval, value)| !interval.contains(*value))
            .map(|(kind, _, value)| ConstraintViolation { kind, value })
            .collect()
    }

    /// Smallest signed margin across all channels, with its channel.
    pub fn worst_margin(&self, v: &VirtualInputs) -> (ConstraintKind, f64) {
        self.channels(v)
            .into_iter()
            .map(|(kind, interval, value)| (kind, interval.margin(value)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("constraint set is non-empty")
    }
}
