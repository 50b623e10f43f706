//! Artifact writers: trajectory CSV, run summary, gains file and the
//! feasibility report. All floating-point text uses 17 significant digits so
//! every number round-trips exactly and repeated runs are byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ucfas_core::feasibility::{FeasibilityReport, Membership, Subsystem};
use ucfas_core::TrajectoryLog;

use crate::runner::GainRecord;
use crate::CliError;

/// Fixed trajectory CSV column order.
pub const COLUMNS: [&str; 37] = [
    "t",
    "x",
    "y",
    "z",
    "vx",
    "vy",
    "vz",
    "phi",
    "theta",
    "psi",
    "p",
    "q",
    "r",
    "x_ref",
    "y_ref",
    "z_ref",
    "psi_ref",
    "z_ref_dot",
    "psi_ref_dot",
    "thrust_raw",
    "tau_phi_raw",
    "tau_theta_raw",
    "tau_psi_raw",
    "thrust_sat",
    "tau_phi_sat",
    "tau_theta_sat",
    "tau_psi_sat",
    "u0",
    "u0_dot",
    "u0_ddot",
    "u1",
    "u2_x",
    "u2_y",
    "err_pos",
    "err_psi",
    "sat_flag",
    "feas_flag",
];

/// 17 significant digits: exact f64 round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_log_csv(log: &TrajectoryLog, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", COLUMNS.join(","))?;

    let mut fields: Vec<String> = Vec::with_capacity(COLUMNS.len());
    for sample in &log.samples {
        let loop_data = sample.loop_data.as_ref().ok_or_else(|| {
            CliError::Internal("trajectory log is missing controller records".to_string())
        })?;
        let s = &sample.state;
        let reference = &loop_data.reference;
        let v = &loop_data.virtuals;

        fields.clear();
        for value in [
            sample.t,
            s.x,
            s.y,
            s.z,
            s.vx,
            s.vy,
            s.vz,
            s.phi,
            s.theta,
            s.psi,
            s.p,
            s.q,
            s.r,
            reference.x[0],
            reference.y[0],
            reference.z[0],
            reference.psi[0],
            reference.z[1],
            reference.psi[1],
            sample.raw.thrust,
            sample.raw.tau_phi,
            sample.raw.tau_theta,
            sample.raw.tau_psi,
            sample.saturated.thrust,
            sample.saturated.tau_phi,
            sample.saturated.tau_theta,
            sample.saturated.tau_psi,
            v.u0,
            v.u0_dot,
            v.u0_ddot,
            v.u1,
            v.u2[0],
            v.u2[1],
            loop_data.err_pos,
            loop_data.err_psi,
        ] {
            fields.push(format_float(value));
        }
        fields.push(u8::from(sample.saturation_active).to_string());
        fields.push(u8::from(loop_data.feasibility_violation).to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Per-run summary. Every number here is recomputable from the CSV alone.
pub struct RunSummary {
    pub mode: &'static str,
    pub horizon: f64,
    pub dt: f64,
    pub rmse_tail: f64,
    pub abort: Option<(f64, String)>,
}

pub fn write_run_summary(
    log: &TrajectoryLog,
    meta: &RunSummary,
    path: &Path,
) -> Result<(), CliError> {
    let mut rmse = [0.0f64; 4];
    let mut tail_count = 0usize;
    let tail_start = meta.horizon - meta.rmse_tail;
    let mut max_err = [0.0f64; 4];
    let mut first_violation: Option<f64> = None;
    let mut last_violation: Option<f64> = None;

    for sample in &log.samples {
        let Some(loop_data) = sample.loop_data.as_ref() else {
            continue;
        };
        let reference = &loop_data.reference;
        let errors = [
            sample.state.x - reference.x[0],
            sample.state.y - reference.y[0],
            sample.state.z - reference.z[0],
            sample.state.psi - reference.psi[0],
        ];
        for (slot, e) in max_err.iter_mut().zip(errors) {
            *slot = slot.max(e.abs());
        }
        if sample.t >= tail_start {
            tail_count += 1;
            for (slot, e) in rmse.iter_mut().zip(errors) {
                *slot += e * e;
            }
        }
        if loop_data.feasibility_violation {
            first_violation.get_or_insert(sample.t);
            last_violation = Some(sample.t);
        }
    }
    let rmse = rmse.map(|sum| (sum / tail_count.max(1) as f64).sqrt());

    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "mode = \"{}\"", meta.mode)?;
    writeln!(out, "samples = {}", log.len())?;
    writeln!(out, "horizon_s = {}", format_float(meta.horizon))?;
    writeln!(out, "dt_s = {}", format_float(meta.dt))?;
    match &meta.abort {
        None => writeln!(out, "aborted = false")?,
        Some((t, reason)) => {
            writeln!(out, "aborted = true")?;
            writeln!(out, "abort_time_s = {}", format_float(*t))?;
            writeln!(out, "abort_reason = \"{reason}\"")?;
        }
    }
    writeln!(out, "rmse_window_s = {}", format_float(meta.rmse_tail))?;
    writeln!(out, "rmse_tail_samples = {tail_count}")?;
    for (name, value) in ["rmse_x_m", "rmse_y_m", "rmse_z_m", "rmse_psi_rad"]
        .iter()
        .zip(rmse)
    {
        writeln!(out, "{name} = {}", format_float(value))?;
    }
    for (name, value) in ["max_err_x_m", "max_err_y_m", "max_err_z_m", "max_err_psi_rad"]
        .iter()
        .zip(max_err)
    {
        writeln!(out, "{name} = {}", format_float(value))?;
    }
    writeln!(out, "saturation_events = {}", log.saturation_events())?;
    writeln!(
        out,
        "feasibility_violation_events = {}",
        log.feasibility_violation_events()
    )?;
    for (name, value) in [
        ("first_feasibility_violation_s", first_violation),
        ("last_feasibility_violation_s", last_violation),
    ] {
        match value {
            Some(t) => writeln!(out, "{name} = {}", format_float(t))?,
            None => writeln!(out, "{name} = \"none\"")?,
        }
    }
    out.flush()?;
    Ok(())
}

fn float_list(values: &[f64]) -> String {
    let rendered: Vec<String> = values.iter().map(|&v| format_float(v)).collect();
    format!("[{}]", rendered.join(", "))
}

pub fn write_gains(records: &[GainRecord], path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        writeln!(out, "[{}]", record.name)?;
        match (&record.z, &record.f) {
            (Some(z), Some(f)) => {
                writeln!(out, "z = {}", float_list(z))?;
                writeln!(out, "f = {}", float_list(f))?;
            }
            _ => writeln!(out, "source = \"explicit\"")?,
        }
        writeln!(out, "gains = {}", float_list(&record.gains))?;
        if let Some(mismatch) = record.spectrum_mismatch {
            writeln!(out, "spectrum_mismatch = {}", format_float(mismatch))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_roea_report(report: &FeasibilityReport, path: &Path) -> Result<(), CliError> {
    let axis_names: [&str; 2] = match report.subsystem {
        Subsystem::Altitude => ["z_err", "vz_err"],
        Subsystem::Yaw => ["psi_err", "psi_rate_err"],
        Subsystem::Lateral => ["x_err", "y_err"],
    };
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "{},{},membership,worst_margin,violation_t,violation_constraint",
        axis_names[0], axis_names[1]
    )?;
    for entry in &report.entries {
        let (label, t, constraint) = match &entry.membership {
            Membership::Member => ("member", String::new(), String::new()),
            Membership::Marginal => ("marginal", String::new(), String::new()),
            Membership::NonMember { t, constraint } => {
                ("nonmember", format_float(*t), constraint.clone())
            }
        };
        writeln!(
            out,
            "{},{},{label},{},{t},{constraint}",
            format_float(entry.coords[0]),
            format_float(entry.coords[1]),
            format_float(entry.worst_margin),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_roea_summary(report: &FeasibilityReport, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "mode = \"roea\"")?;
    writeln!(out, "subsystem = \"{}\"", report.subsystem.name())?;
    writeln!(out, "samples = {}", report.entries.len())?;
    writeln!(out, "member_count = {}", report.member_count)?;
    writeln!(out, "marginal_count = {}", report.marginal_count)?;
    writeln!(
        out,
        "member_fraction = {}",
        format_float(report.member_fraction)
    )?;
    match &report.member_bounds {
        None => writeln!(out, "member_bounds = \"none\"")?,
        Some(bounds) => {
            for (axis, interval) in bounds.iter().enumerate() {
                writeln!(
                    out,
                    "member_bounds_axis{axis} = {}",
                    float_list(&[interval.lo, interval.hi])
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
