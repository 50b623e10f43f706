//! Gnuplot script generation: a 3-D path plot and six time-series panels,
//! driven entirely by the trajectory CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::output::COLUMNS;
use crate::CliError;

fn column_index(name: &str) -> usize {
    1 + COLUMNS
        .iter()
        .position(|&c| c == name)
        .expect("known column")
}

/// Writes a self-contained gnuplot script that renders the CSV into two PNG
/// files next to the script. The CSV header must match the writer's column
/// order exactly.
pub fn emit_plot_script(csv_path: &Path, out_path: &Path) -> Result<(), CliError> {
    let mut header = String::new();
    BufReader::new(File::open(csv_path)?).read_line(&mut header)?;
    let found: Vec<&str> = header.trim_end().split(',').collect();
    if found != COLUMNS {
        return Err(CliError::Config(format!(
            "{}: CSV header mismatch; expected columns: {}",
            csv_path.display(),
            COLUMNS.join(",")
        )));
    }

    let stem = out_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory");
    let csv = csv_path.to_string_lossy().replace('\'', "''");

    let t = column_index("t");
    let (x, y, z) = (column_index("x"), column_index("y"), column_index("z"));
    let (xr, yr, zr) = (
        column_index("x_ref"),
        column_index("y_ref"),
        column_index("z_ref"),
    );
    let (phi, theta, psi, psir) = (
        column_index("phi"),
        column_index("theta"),
        column_index("psi"),
        column_index("psi_ref"),
    );

    let mut out = BufWriter::new(File::create(out_path)?);
    writeln!(out, "# Renders '{csv}' into {stem}_3d.png and {stem}_panels.png")?;
    writeln!(out, "set datafile separator comma")?;
    writeln!(out)?;
    writeln!(out, "set terminal pngcairo size 1100,800")?;
    writeln!(out, "set output '{stem}_3d.png'")?;
    writeln!(out, "set title 'Flight path'")?;
    writeln!(out, "set xlabel 'x [m]'")?;
    writeln!(out, "set ylabel 'y [m]'")?;
    writeln!(out, "set zlabel 'z [m]'")?;
    writeln!(out, "set view 60, 30")?;
    writeln!(
        out,
        "splot '{csv}' skip 1 using {x}:{y}:{z} with lines lw 2 lc rgb 'blue' title 'state', \\"
    )?;
    writeln!(
        out,
        "      '{csv}' skip 1 using {xr}:{yr}:{zr} with lines dashtype 2 lc rgb 'red' title 'reference'"
    )?;
    writeln!(out)?;
    writeln!(out, "set terminal pngcairo size 1400,900")?;
    writeln!(out, "set output '{stem}_panels.png'")?;
    writeln!(out, "set multiplot layout 3,2 title 'Tracking response'")?;
    writeln!(out, "set xlabel 't [s]'")?;
    for (label, state_col, ref_col) in [
        ("x [m]", x, Some(xr)),
        ("y [m]", y, Some(yr)),
        ("z [m]", z, Some(zr)),
        ("phi [rad]", phi, None),
        ("theta [rad]", theta, None),
        ("psi [rad]", psi, Some(psir)),
    ] {
        writeln!(out, "set ylabel '{label}'")?;
        match ref_col {
            Some(r) => writeln!(
                out,
                "plot '{csv}' skip 1 using {t}:{state_col} with lines lc rgb 'blue' title 'state', \
                 '{csv}' skip 1 using {t}:{r} with lines dashtype 2 lc rgb 'red' title 'reference'"
            )?,
            None => writeln!(
                out,
                "plot '{csv}' skip 1 using {t}:{state_col} with lines lc rgb 'blue' title 'state'"
            )?,
        }
    }
    writeln!(out, "unset multiplot")?;
    out.flush()?;
    Ok(())
}
