//! Numerical feasibility and region-of-attraction estimation: simulate the
//! assigned closed loops from sampled initial conditions and check the
//! virtual-input boxes and interior-angle bounds along each response.
//!
//! The altitude and yaw subsystems evolve as small linear systems, so their
//! responses and reconstructed control signals come from dense fixed-step
//! linear propagation. The lateral subsystem depends on nonlinear quantities
//! (attitude, the thrust-input chain), so its check runs the full nonlinear
//! closed loop instead of a linear shortcut.
//!
//! The overall feasible region is the direct sum of the per-subsystem
//! regions: a joint initial condition belongs to it exactly when each
//! subsystem check passes on its own coordinates.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::control::{ControllerGains, SingularityPolicy, TrackingController};
use crate::error::{Error, Result};
use crate::fas_model::{InputConstraintSet, Interval};
use crate::plant::{
    step_count, AbortPolicy, ActuatorLimits, PlantState, QuadrotorParams, ANGLE_GUARD,
};
use crate::synthesis::companion_from_row;
use crate::trajectory::constant_reference;

/// Check horizon, integration step and the tolerance band around constraint
/// boundaries inside which samples are labeled marginal instead of member or
/// non-member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeaSettings {
    pub horizon: f64,
    pub dt: f64,
    pub boundary_band: f64,
}

impl Default for RoeaSettings {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            dt: 1e-3,
            boundary_band: 1e-6,
        }
    }
}

/// Default grid resolution per axis.
pub const DEFAULT_GRID_POINTS: usize = 21;

/// Which closed-loop subsystem a check applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// Altitude error state (position, velocity); checks the thrust-input
    /// chain boxes.
    Altitude,
    /// Yaw error state (angle, rate); checks the yaw-input box.
    Yaw,
    /// Lateral position offsets (x, y) at rest; checks the lateral-input
    /// boxes and the interior-angle bounds through the nonlinear loop.
    Lateral,
}

impl Subsystem {
    pub fn name(&self) -> &'static str {
        match self {
            Subsystem::Altitude => "altitude",
            Subsystem::Yaw => "yaw",
            Subsystem::Lateral => "lateral",
        }
    }

    /// Dimension of the sampled initial-condition space.
    pub fn dimension(&self) -> usize {
        2
    }
}

/// Outcome of one membership check.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Member,
    /// Worst margin within the boundary band: too close to call.
    Marginal,
    NonMember { t: f64, constraint: String },
}

/// One checked initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipEntry {
    pub coords: Vec<f64>,
    pub membership: Membership,
    /// Smallest signed constraint margin seen along the response. Units are
    /// those of the binding channel.
    pub worst_margin: f64,
}

impl MembershipEntry {
    pub fn is_member(&self) -> bool {
        matches!(self.membership, Membership::Member)
    }
}

/// Everything a membership check needs besides the initial condition.
#[derive(Debug, Clone, Copy)]
pub struct FeasibilityContext<'a> {
    pub gains: &'a ControllerGains,
    pub constraints: &'a InputConstraintSet,
    pub params: &'a QuadrotorParams,
    pub limits: &'a ActuatorLimits,
    pub settings: RoeaSettings,
}

/// Dense fixed-step propagation of `x_dot = system * x`.
///
/// The one-step transition matrix is the fourth-order Taylor polynomial of
/// the exponential, which is exactly what a Runge-Kutta step produces for a
/// constant linear system; the global error is O(dt^4).
pub fn linear_response(
    system: &DMatrix<f64>,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<Vec<DVector<f64>>> {
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon and dt must be > 0, got horizon = {horizon}, dt = {dt}"
        )));
    }
    if system.nrows() != system.ncols() || system.nrows() != x0.len() {
        return Err(Error::InvalidArgument(format!(
            "system must be square and match x0: {}x{} vs {}",
            system.nrows(),
            system.ncols(),
            x0.len()
        )));
    }

    let n = system.nrows();
    let identity = DMatrix::<f64>::identity(n, n);
    let a1 = system * dt;
    let a2 = &a1 * &a1;
    let a3 = &a2 * &a1;
    let a4 = &a3 * &a1;
    let transition = identity + &a1 + &a2 / 2.0 + &a3 / 6.0 + &a4 / 24.0;

    let steps = step_count(horizon, dt);
    let mut path = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    path.push(x.clone());
    for _ in 0..steps {
        x = &transition * &x;
        path.push(x.clone());
    }
    Ok(path)
}

struct MarginTracker {
    band: f64,
    worst: f64,
    first_violation: Option<(f64, String)>,
}

impl MarginTracker {
    fn new(band: f64) -> Self {
        Self {
            band,
            worst: f64::INFINITY,
            first_violation: None,
        }
    }

    fn observe(&mut self, t: f64, constraint: &str, margin: f64) {
        if margin < self.worst {
            self.worst = margin;
        }
        if margin < -self.band && self.first_violation.is_none() {
            self.first_violation = Some((t, constraint.to_string()));
        }
    }

    fn finish(self, coords: Vec<f64>) -> MembershipEntry {
        let membership = match self.first_violation {
            Some((t, constraint)) => Membership::NonMember { t, constraint },
            None if self.worst.abs() <= self.band => Membership::Marginal,
            None => Membership::Member,
        };
        MembershipEntry {
            coords,
            membership,
            worst_margin: self.worst,
        }
    }
}

/// Checks whether one initial condition belongs to the sampled region of
/// exponential attraction of the given subsystem: the closed-loop response
/// must respect every matching constraint box over the whole check horizon.
pub fn check_membership(
    ctx: &FeasibilityContext,
    subsystem: Subsystem,
    coords: &[f64],
) -> Result<MembershipEntry> {
    if coords.len() != subsystem.dimension() {
        return Err(Error::InvalidArgument(format!(
            "{} subsystem expects {} coordinates, got {}",
            subsystem.name(),
            subsystem.dimension(),
            coords.len()
        )));
    }
    match subsystem {
        Subsystem::Altitude => check_altitude(ctx, coords),
        Subsystem::Yaw => check_yaw(ctx, coords),
        Subsystem::Lateral => check_lateral(ctx, coords),
    }
}

fn check_altitude(ctx: &FeasibilityContext, coords: &[f64]) -> Result<MembershipEntry> {
    let row = RowDVector::from_row_slice(&ctx.gains.altitude);
    let system = companion_from_row(&ctx.gains.altitude);
    let path = linear_response(
        &system,
        &DVector::from_row_slice(coords),
        ctx.settings.horizon,
        ctx.settings.dt,
    )?;

    // Along the assigned loop: u0 = g - row * x, and each time derivative
    // multiplies one more system matrix.
    let row_dot = &row * &system;
    let row_ddot = &row_dot * &system;

    let mut tracker = MarginTracker::new(ctx.settings.boundary_band);
    for (k, x) in path.iter().enumerate() {
        let t = k as f64 * ctx.settings.dt;
        let u0 = ctx.params.gravity - (&row * x)[0];
        let u0_dot = -(&row_dot * x)[0];
        let u0_ddot = -(&row_ddot * x)[0];
        tracker.observe(t, "u0", ctx.constraints.u0.margin(u0));
        tracker.observe(t, "u0_dot", ctx.constraints.u0_dot.margin(u0_dot));
        tracker.observe(t, "u0_ddot", ctx.constraints.u0_ddot.margin(u0_ddot));
    }
    Ok(tracker.finish(coords.to_vec()))
}

fn check_yaw(ctx: &FeasibilityContext, coords: &[f64]) -> Result<MembershipEntry> {
    let row = RowDVector::from_row_slice(&ctx.gains.yaw);
    let system = companion_from_row(&ctx.gains.yaw);
    let path = linear_response(
        &system,
        &DVector::from_row_slice(coords),
        ctx.settings.horizon,
        ctx.settings.dt,
    )?;

    let mut tracker = MarginTracker::new(ctx.settings.boundary_band);
    for (k, x) in path.iter().enumerate() {
        let t = k as f64 * ctx.settings.dt;
        let u1 = -(&row * x)[0];
        tracker.observe(t, "u1", ctx.constraints.u1.margin(u1));
    }
    Ok(tracker.finish(coords.to_vec()))
}

fn check_lateral(ctx: &FeasibilityContext, coords: &[f64]) -> Result<MembershipEntry> {
    let controller = TrackingController {
        gains: *ctx.gains,
        params: *ctx.params,
        limits: *ctx.limits,
        constraints: *ctx.constraints,
        reference: |_t: f64| constant_reference(0.0, 0.0, 0.0, 0.0),
    };
    let initial = PlantState {
        x: coords[0],
        y: coords[1],
        ..Default::default()
    };
    let outcome = controller.simulate(
        initial,
        ctx.settings.horizon,
        ctx.settings.dt,
        SingularityPolicy::Abort,
        AbortPolicy::TruncateLog,
    )?;

    let angle_bound = FRAC_PI_2 - ANGLE_GUARD;
    let mut tracker = MarginTracker::new(ctx.settings.boundary_band);
    for sample in &outcome.log.samples {
        let t = sample.t;
        if let Some(loop_data) = &sample.loop_data {
            let u2 = loop_data.virtuals.u2;
            tracker.observe(t, "u2_x", ctx.constraints.u2[0].margin(u2[0]));
            tracker.observe(t, "u2_y", ctx.constraints.u2[1].margin(u2[1]));
        }
        tracker.observe(t, "phi_interior", angle_bound - sample.state.phi.abs());
        tracker.observe(t, "theta_interior", angle_bound - sample.state.theta.abs());
    }
    if let Some((t, cause)) = &outcome.abort {
        if tracker.first_violation.is_none() {
            let constraint = match cause {
                Error::SimulationAborted { source, .. } => match source.as_ref() {
                    Error::NearSingularInputMatrix { .. } => "input_matrix_singular",
                    _ => "interior_angles",
                },
                _ => "interior_angles",
            };
            tracker.first_violation = Some((*t, constraint.to_string()));
            if tracker.worst == f64::INFINITY {
                tracker.worst = f64::NEG_INFINITY;
            }
        }
    }
    Ok(tracker.finish(coords.to_vec()))
}

/// Linearly spaced grid axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridAxis {
    fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidArgument("grid axis needs >= 1 point".into()));
        }
        if !(self.min <= self.max) {
            return Err(Error::InvalidArgument(format!(
                "grid axis: min {} must be <= max {}",
                self.min, self.max
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.min + i as f64 * step).collect())
    }
}

/// How initial conditions are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingSpec {
    /// Cartesian product of linearly spaced axes, first axis slowest.
    Grid(Vec<GridAxis>),
    /// Seeded uniform draws inside per-axis bounds.
    Uniform {
        bounds: Vec<(f64, f64)>,
        count: usize,
        seed: u64,
    },
}

impl SamplingSpec {
    /// Default grid over symmetric bounds.
    pub fn symmetric_grid(half_widths: &[f64]) -> Self {
        SamplingSpec::Grid(
            half_widths
                .iter()
                .map(|&w| GridAxis {
                    min: -w,
                    max: w,
                    points: DEFAULT_GRID_POINTS,
                })
                .collect(),
        )
    }

    fn generate(&self, dimension: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            SamplingSpec::Grid(axes) => {
                if axes.len() != dimension {
                    return Err(Error::InvalidArgument(format!(
                        "sampling spec has {} axes, subsystem needs {dimension}",
                        axes.len()
                    )));
                }
                let values: Vec<Vec<f64>> =
                    axes.iter().map(|a| a.values()).collect::<Result<_>>()?;
                let total: usize = values.iter().map(Vec::len).product();
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; axes.len()];
                loop {
                    out.push(idx.iter().zip(&values).map(|(&i, v)| v[i]).collect());
                    let mut axis = axes.len();
                    loop {
                        if axis == 0 {
                            return Ok(out);
                        }
                        axis -= 1;
                        idx[axis] += 1;
                        if idx[axis] < values[axis].len() {
                            break;
                        }
                        idx[axis] = 0;
                    }
                }
            }
            SamplingSpec::Uniform {
                bounds,
                count,
                seed,
            } => {
                if bounds.len() != dimension {
                    return Err(Error::InvalidArgument(format!(
                        "sampling spec has {} bounds, subsystem needs {dimension}",
                        bounds.len()
                    )));
                }
                for (lo, hi) in bounds {
                    if !(lo < hi) {
                        return Err(Error::InvalidArgument(format!(
                            "uniform bound: lo {lo} must be < hi {hi}"
                        )));
                    }
                }
                let mut rng = StdRng::seed_from_u64(*seed);
                Ok((0..*count)
                    .map(|_| {
                        bounds
                            .iter()
                            .map(|&(lo, hi)| rng.random_range(lo..hi))
                            .collect()
                    })
                    .collect())
            }
        }
    }
}

/// Membership over a sampled set of initial conditions with summary
/// statistics. `member_fraction` counts strict members only; marginal samples
/// are reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub subsystem: Subsystem,
    pub entries: Vec<MembershipEntry>,
    pub member_count: usize,
    pub marginal_count: usize,
    pub member_fraction: f64,
    /// Per-axis bounding box of the member set; None when no sample is a
    /// member.
    pub member_bounds: Option<Vec<Interval>>,
}

/// Runs [`check_membership`] for every sampled initial condition.
pub fn estimate_roea(
    ctx: &FeasibilityContext,
    subsystem: Subsystem,
    sampling: &SamplingSpec,
) -> Result<FeasibilityReport> {
    let samples = sampling.generate(subsystem.dimension())?;
    let mut entries = Vec::with_capacity(samples.len());
    for coords in samples {
        entries.push(check_membership(ctx, subsystem, &coords)?);
    }

    let member_count = entries.iter().filter(|e| e.is_member()).count();
    let marginal_count = entries
        .iter()
        .filter(|e| matches!(e.membership, Membership::Marginal))
        .count();
    let member_fraction = if entries.is_empty() {
        0.0
    } else {
        member_count as f64 / entries.len() as f64
    };

    let member_bounds = if member_count == 0 {
        None
    } else {
        let dim = subsystem.dimension();
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for entry in entries.iter().filter(|e| e.is_member()) {
            for (axis, &v) in entry.coords.iter().enumerate() {
                bounds[axis].0 = bounds[axis].0.min(v);
                bounds[axis].1 = bounds[axis].1.max(v);
            }
        }
        Some(
            bounds
                .into_iter()
                .map(|(lo, hi)| Interval { lo, hi })
                .collect(),
        )
    };

    Ok(FeasibilityReport {
        subsystem,
        entries,
        member_count,
        marginal_count,
        member_fraction,
        member_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> QuadrotorParams {
        QuadrotorParams::new(0.625, 9.8, 0.0019005, 0.0019536, 0.0036894).unwrap()
    }

    fn limits() -> ActuatorLimits {
        ActuatorLimits::new(-100.0, 100.0, -0.5, 0.5).unwrap()
    }

    fn constraints() -> InputConstraintSet {
        InputConstraintSet {
            u0: Interval::new(0.5, 50.0).unwrap(),
            u0_dot: Interval::new(-500.0, 500.0).unwrap(),
            u0_ddot: Interval::new(-5000.0, 5000.0).unwrap(),
            u1: Interval::new(-0.5, 0.5).unwrap(),
            u2: [Interval::new(-250.0, 250.0).unwrap(); 2],
        }
    }

    fn gains() -> ControllerGains {
        ControllerGains {
            altitude: [20.0, 9.0],
            yaw: [20.0, 9.0],
            lateral_x: [1680.0, 1066.0, 251.0, 26.0],
            lateral_y: [1680.0, 1066.0, 251.0, 26.0],
        }
    }

    fn context<'a>(
        g: &'a ControllerGains,
        c: &'a InputConstraintSet,
        p: &'a QuadrotorParams,
        l: &'a ActuatorLimits,
    ) -> FeasibilityContext<'a> {
        FeasibilityContext {
            gains: g,
            constraints: c,
            params: p,
            limits: l,
            settings: RoeaSettings::default(),
        }
    }

    #[test]
    fn linear_response_from_origin_stays_zero() {
        let system = companion_from_row(&[20.0, 9.0]);
        let path = linear_response(&system, &DVector::zeros(2), 1.0, 1e-2).unwrap();
        assert_eq!(path.len(), 101);
        assert!(path.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn linear_response_matches_two_pole_closed_form() {
        let system = companion_from_row(&[20.0, 9.0]);
        let path = linear_response(&system, &DVector::from_row_slice(&[1.0, 0.0]), 5.0, 1e-3)
            .unwrap();
        let mut max_err = 0.0f64;
        for (k, x) in path.iter().enumerate() {
            let t = k as f64 * 1e-3;
            let expected = 5.0 * (-4.0 * t).exp() - 4.0 * (-5.0 * t).exp();
            max_err = max_err.max((x[0] - expected).abs());
        }
        assert!(max_err < 1e-8, "max err {max_err}");
    }

    #[test]
    fn linear_response_decays_for_assigned_pole_sets() {
        for row in [vec![20.0, 9.0], vec![1680.0, 1066.0, 251.0, 26.0]] {
            let system = companion_from_row(&row);
            let mut x0 = DVector::zeros(row.len());
            x0[0] = 1.0;
            let path = linear_response(&system, &x0, 10.0, 1e-3).unwrap();
            let final_norm = path.last().unwrap().norm();
            assert!(final_norm < 1e-6, "final norm {final_norm}");
        }
    }

    #[test]
    fn yaw_membership_examples() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let ctx = context(&g, &c, &p, &l);

        let member = check_membership(&ctx, Subsystem::Yaw, &[0.01, 0.0]).unwrap();
        assert!(member.is_member());
        // Peak command magnitude 0.2 at t = 0 leaves margin 0.3 to the box.
        assert_relative_eq!(member.worst_margin, 0.3, epsilon = 1e-9);

        let outside = check_membership(&ctx, Subsystem::Yaw, &[1.0, 0.0]).unwrap();
        match &outside.membership {
            Membership::NonMember { t, constraint } => {
                assert_eq!(*t, 0.0);
                assert_eq!(constraint, "u1");
            }
            other => panic!("expected non-member, got {other:?}"),
        }
        // u1(0) = -20: margin to the lower bound -0.5 is -19.5.
        assert_relative_eq!(outside.worst_margin, -19.5, epsilon = 1e-9);
    }

    #[test]
    fn altitude_equilibrium_is_member() {
        let (g, p, l) = (gains(), params(), limits());
        let c = InputConstraintSet {
            u0: Interval::new(0.1, 100.0).unwrap(),
            ..constraints()
        };
        let ctx = context(&g, &c, &p, &l);
        let entry = check_membership(&ctx, Subsystem::Altitude, &[0.0, 0.0]).unwrap();
        assert!(entry.is_member());
    }

    #[test]
    fn lateral_offset_membership() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let mut ctx = context(&g, &c, &p, &l);
        ctx.settings.horizon = 3.0;

        let near = check_membership(&ctx, Subsystem::Lateral, &[0.3, -0.2]).unwrap();
        assert!(near.is_member(), "near offset: {:?}", near.membership);

        let far = check_membership(&ctx, Subsystem::Lateral, &[50.0, 0.0]).unwrap();
        match &far.membership {
            Membership::NonMember { t, constraint } => {
                assert_eq!(*t, 0.0);
                assert_eq!(constraint, "u2_y");
            }
            other => panic!("expected non-member, got {other:?}"),
        }
    }

    #[test]
    fn single_sample_grid_reduces_to_check_membership() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let ctx = context(&g, &c, &p, &l);
        let spec = SamplingSpec::Grid(vec![
            GridAxis {
                min: 0.01,
                max: 0.01,
                points: 1,
            },
            GridAxis {
                min: 0.0,
                max: 0.0,
                points: 1,
            },
        ]);
        let report = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        assert_eq!(report.entries.len(), 1);
        let direct = check_membership(&ctx, Subsystem::Yaw, &[0.01, 0.0]).unwrap();
        assert_eq!(report.entries[0], direct);
        assert_eq!(report.member_fraction, 1.0);
    }

    #[test]
    fn grid_report_is_deterministic() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let ctx = context(&g, &c, &p, &l);
        let spec = SamplingSpec::Grid(vec![
            GridAxis {
                min: -0.03,
                max: 0.03,
                points: 9,
            },
            GridAxis {
                min: -0.1,
                max: 0.1,
                points: 9,
            },
        ]);
        let a = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        let b = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.member_fraction > 0.0 && a.member_fraction < 1.0);
        assert!(a.member_bounds.is_some());
    }

    #[test]
    fn classification_is_invariant_to_dt_halving() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let spec = SamplingSpec::Grid(vec![
            GridAxis {
                min: -0.03,
                max: 0.03,
                points: 7,
            },
            GridAxis {
                min: -0.1,
                max: 0.1,
                points: 7,
            },
        ]);

        let mut ctx = context(&g, &c, &p, &l);
        let coarse = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        ctx.settings.dt /= 2.0;
        let fine = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        for (a, b) in coarse.entries.iter().zip(&fine.entries) {
            let same = matches!(
                (&a.membership, &b.membership),
                (Membership::Member, Membership::Member)
                    | (Membership::Marginal, Membership::Marginal)
                    | (Membership::NonMember { .. }, Membership::NonMember { .. })
            );
            assert!(
                same || a.worst_margin.abs() <= 1e-6,
                "classification flipped away from the boundary: {:?} vs {:?}",
                a,
                b
            );
        }
    }

    #[test]
    fn uniform_sampling_is_seeded_and_in_bounds() {
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let ctx = context(&g, &c, &p, &l);
        let spec = SamplingSpec::Uniform {
            bounds: vec![(-0.02, 0.02), (-0.05, 0.05)],
            count: 25,
            seed: 7,
        };
        let a = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        let b = estimate_roea(&ctx, Subsystem::Yaw, &spec).unwrap();
        assert_eq!(a, b);
        for e in &a.entries {
            assert!((-0.02..0.02).contains(&e.coords[0]));
            assert!((-0.05..0.05).contains(&e.coords[1]));
        }
    }

    #[test]
    fn small_ball_around_origin_is_fully_member() {
        // Shrinking the sampled box eventually yields fraction 1 for boxes
        // containing the equilibrium command.
        let (g, c, p, l) = (gains(), constraints(), params(), limits());
        let ctx = context(&g, &c, &p, &l);
        let mut half_width = 0.1;
        let mut fraction = 0.0;
        for _ in 0..8 {
            let spec = SamplingSpec::Grid(vec![
                GridAxis {
                    min: -half_width,
                    max: half_width,
                    points: 5,
                },
                GridAxis {
                    min: -half_width,
                    max: half_width,
                    points: 5,
                },
            ]);
            fraction = estimate_roea(&ctx, Subsystem::Yaw, &spec)
                .unwrap()
                .member_fraction;
            if fraction == 1.0 {
                break;
            }
            half_width /= 2.0;
        }
        assert_eq!(fraction, 1.0, "no fully-member ball found");
    }
}
