//! Analytic reference generators: a circular spiral with linear climb and a
//! sinusoidal yaw wave, plus constant setpoints. Every derivative order the
//! controller consumes is produced in closed form.

use crate::control::ReferenceSample;
use crate::error::{Error, Result};

/// Geometry and rates of the spiral reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralSpec {
    /// Circle radius [m].
    pub radius: f64,
    /// Angular rate of the circle [rad/s].
    pub angular_rate: f64,
    /// Vertical climb rate [m/s].
    pub climb_rate: f64,
    /// Circle center offset [m].
    pub center: [f64; 2],
    /// Yaw wave amplitude [rad].
    pub yaw_amplitude: f64,
    /// Yaw wave rate [rad/s].
    pub yaw_rate: f64,
}

impl Default for SpiralSpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            angular_rate: 0.2,
            climb_rate: 0.05,
            center: [0.0, 0.0],
            yaw_amplitude: 0.3,
            yaw_rate: 0.1,
        }
    }
}

impl SpiralSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spiral radius must be >= 0, got {}",
                self.radius
            )));
        }
        for (name, v) in [
            ("radius", self.radius),
            ("angular_rate", self.angular_rate),
            ("climb_rate", self.climb_rate),
            ("center_x", self.center[0]),
            ("center_y", self.center[1]),
            ("yaw_amplitude", self.yaw_amplitude),
            ("yaw_rate", self.yaw_rate),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "spiral {name} must be finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Spiral sample at time `t`: circle plus climb for position, sine wave for
/// yaw, all derivatives closed-form.
pub fn spiral_reference(t: f64, spec: &SpiralSpec) -> ReferenceSample {
    let w = spec.angular_rate;
    let (sin_wt, cos_wt) = (w * t).sin_cos();
    let r = spec.radius;

    let x = [
        spec.center[0] + r * cos_wt,
        -r * w * sin_wt,
        -r * w * w * cos_wt,
        r * w.powi(3) * sin_wt,
        r * w.powi(4) * cos_wt,
    ];
    let y = [
        spec.center[1] + r * sin_wt,
        r * w * cos_wt,
        -r * w * w * sin_wt,
        -r * w.powi(3) * cos_wt,
        r * w.powi(4) * sin_wt,
    ];
    let z = [spec.climb_rate * t, spec.climb_rate, 0.0, 0.0, 0.0];

    let wy = spec.yaw_rate;
    let (sin_yt, cos_yt) = (wy * t).sin_cos();
    let a = spec.yaw_amplitude;
    let psi = [a * sin_yt, a * wy * cos_yt, -a * wy * wy * sin_yt];

    ReferenceSample { z, psi, x, y }
}

/// Time-independent setpoint: all derivative orders above zero vanish, which
/// reduces the tracking laws to plain state feedback around the setpoint.
pub fn constant_reference(z: f64, psi: f64, x: f64, y: f64) -> ReferenceSample {
    ReferenceSample {
        z: [z, 0.0, 0.0, 0.0, 0.0],
        psi: [psi, 0.0, 0.0],
        x: [x, 0.0, 0.0, 0.0, 0.0],
        y: [y, 0.0, 0.0, 0.0, 0.0],
    }
}
