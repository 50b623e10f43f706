//! Mode dispatch: gain synthesis, stabilization/tracking runs and
//! feasibility sampling, each leaving its artifacts in the output directory.

use std::path::{Path, PathBuf};

use ucfas_core::feasibility::{estimate_roea, FeasibilityContext};
use ucfas_core::trajectory::{constant_reference, spiral_reference};
use ucfas_core::{
    synthesize_gains, verify_spectrum, AbortPolicy, ControllerGains, ParametricDesign,
    ReferenceSample, TrackingController,
};

use crate::config::{ExperimentConfig, GainSource, Mode};
use crate::output::{
    write_gains, write_log_csv, write_roea_report, write_roea_summary, write_run_summary,
    RunSummary,
};
use crate::plot::emit_plot_script;
use crate::CliError;

/// One synthesized (or echoed) gain row for the gains file.
pub struct GainRecord {
    pub name: &'static str,
    pub z: Option<Vec<f64>>,
    pub f: Option<Vec<f64>>,
    pub gains: Vec<f64>,
    pub spectrum_mismatch: Option<f64>,
}

fn synthesize_row(
    name: &'static str,
    design: &ParametricDesign,
) -> Result<(Vec<f64>, GainRecord), CliError> {
    let row = synthesize_gains(design)
        .map_err(|e| CliError::Config(format!("design.{name}: {e}")))?;
    let f_diag: Vec<f64> = design.f().diagonal().as_slice().to_vec();
    let mismatch = verify_spectrum(&row, &f_diag)
        .map_err(|e| CliError::Config(format!("design.{name}: {e}")))?;
    let coeffs = row.as_row().to_vec();
    Ok((
        coeffs.clone(),
        GainRecord {
            name,
            z: Some(design.z().as_slice().to_vec()),
            f: Some(f_diag),
            gains: coeffs,
            spectrum_mismatch: Some(mismatch),
        },
    ))
}

/// Controller rows plus the provenance records for the gains file.
pub fn resolve_gains(
    source: &GainSource,
) -> Result<(ControllerGains, Vec<GainRecord>), CliError> {
    match source {
        GainSource::Designs(set) => {
            let (a0, rec0) = synthesize_row("altitude", &set.altitude)?;
            let (a1, rec1) = synthesize_row("yaw", &set.yaw)?;
            let (a2x, rec2) = synthesize_row("lateral_x", &set.lateral_x)?;
            let (a2y, rec3) = synthesize_row("lateral_y", &set.lateral_y)?;
            let fixed = |v: Vec<f64>, n: usize, name: &str| -> Result<Vec<f64>, CliError> {
                if v.len() != n {
                    return Err(CliError::Config(format!(
                        "design.{name}: expected a length-{n} gain row, got {}",
                        v.len()
                    )));
                }
                Ok(v)
            };
            let a0 = fixed(a0, 2, "altitude")?;
            let a1 = fixed(a1, 2, "yaw")?;
            let a2x = fixed(a2x, 4, "lateral_x")?;
            let a2y = fixed(a2y, 4, "lateral_y")?;
            Ok((
                ControllerGains {
                    altitude: [a0[0], a0[1]],
                    yaw: [a1[0], a1[1]],
                    lateral_x: [a2x[0], a2x[1], a2x[2], a2x[3]],
                    lateral_y: [a2y[0], a2y[1], a2y[2], a2y[3]],
                },
                vec![rec0, rec1, rec2, rec3],
            ))
        }
        GainSource::Explicit(gains) => {
            let records = vec![
                GainRecord {
                    name: "altitude",
                    z: None,
                    f: None,
                    gains: gains.altitude.to_vec(),
                    spectrum_mismatch: None,
                },
                GainRecord {
                    name: "yaw",
                    z: None,
                    f: None,
                    gains: gains.yaw.to_vec(),
                    spectrum_mismatch: None,
                },
                GainRecord {
                    name: "lateral_x",
                    z: None,
                    f: None,
                    gains: gains.lateral_x.to_vec(),
                    spectrum_mismatch: None,
                },
                GainRecord {
                    name: "lateral_y",
                    z: None,
                    f: None,
                    gains: gains.lateral_y.to_vec(),
                    spectrum_mismatch: None,
                },
            ];
            Ok((*gains, records))
        }
    }
}

/// Runs one mode end to end and reports the artifacts written.
pub fn execute(mode: Mode, config: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let (gains, records) = resolve_gains(&config.gain_source)?;

    let gains_path = out_dir.join(&config.output.gains);
    write_gains(&records, &gains_path)?;
    println!("wrote {}", gains_path.display());

    match mode {
        Mode::Synthesize => Ok(()),
        Mode::Track => {
            let spec = config.spiral;
            run_closed_loop(mode, config, gains, out_dir, move |t| {
                spiral_reference(t, &spec)
            })
        }
        Mode::Simulate => {
            let sp = config.setpoint;
            let sample = constant_reference(sp.z, sp.psi, sp.x, sp.y);
            run_closed_loop(mode, config, gains, out_dir, move |_| sample)
        }
        Mode::Roea => {
            let roea = config.roea.as_ref().ok_or_else(|| {
                CliError::Config("a [roea] section is required for roea mode".to_string())
            })?;
            let ctx = FeasibilityContext {
                gains: &gains,
                constraints: &config.constraints,
                params: &config.params,
                limits: &config.limits,
                settings: roea.settings,
            };
            let report = estimate_roea(&ctx, roea.subsystem, &roea.sampling)
                .map_err(|e| CliError::Runtime(e.to_string()))?;

            let report_path = out_dir.join(&config.output.csv);
            write_roea_report(&report, &report_path)?;
            println!("wrote {}", report_path.display());
            let summary_path = out_dir.join(&config.output.summary);
            write_roea_summary(&report, &summary_path)?;
            println!("wrote {}", summary_path.display());
            Ok(())
        }
    }
}

fn run_closed_loop<R>(
    mode: Mode,
    config: &ExperimentConfig,
    gains: ControllerGains,
    out_dir: &Path,
    reference: R,
) -> Result<(), CliError>
where
    R: Fn(f64) -> ReferenceSample,
{
    let controller = TrackingController {
        gains,
        params: config.params,
        limits: config.limits,
        constraints: config.constraints,
        reference,
    };
    let outcome = controller
        .simulate(
            config.initial,
            config.horizon,
            config.dt,
            config.on_singular,
            AbortPolicy::TruncateLog,
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let csv_path = out_dir.join(&config.output.csv);
    write_log_csv(&outcome.log, &csv_path)?;
    println!("wrote {}", csv_path.display());

    let abort = outcome
        .abort
        .as_ref()
        .map(|(t, e)| (*t, e.to_string()));
    let summary_path = out_dir.join(&config.output.summary);
    write_run_summary(
        &outcome.log,
        &RunSummary {
            mode: mode.name(),
            horizon: config.horizon,
            dt: config.dt,
            rmse_tail: config.rmse_tail,
            abort: abort.clone(),
        },
        &summary_path,
    )?;
    println!("wrote {}", summary_path.display());

    if let Some(plot_name) = &config.output.plot {
        let plot_path: PathBuf = out_dir.join(plot_name);
        emit_plot_script(&csv_path, &plot_path)?;
        println!("wrote {}", plot_path.display());
    }

    match abort {
        Some((t, reason)) => Err(CliError::Runtime(format!(
            "run aborted at t = {t} s (partial log flushed): {reason}"
        ))),
        None => Ok(()),
    }
}
