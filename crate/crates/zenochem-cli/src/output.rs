//! CSV serialization and gnuplot script emission. The CSV layout is a fixed
//! contract: `time_us,singlet,triplet,trace,population,absorption[,mfe]`,
//! one value per cell at 17 significant digits, `\n` line endings — enough
//! precision that parsing a file back reproduces the in-memory doubles
//! bit-for-bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use zenochem_core::propagation::Trajectory;

use crate::CliError;

pub const CSV_HEADER: &str = "time_us,singlet,triplet,trace,population,absorption";

/// Formats one CSV cell: scientific notation, 17 significant digits.
fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a trajectory (plus optional MFE column) to CSV text.
pub fn csv_text(traj: &Trajectory, mfe: Option<&[f64]>) -> String {
    let mut out = String::with_capacity(traj.len() * 160);
    out.push_str(CSV_HEADER);
    if mfe.is_some() {
        out.push_str(",mfe");
    }
    out.push('\n');
    for i in 0..traj.len() {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            cell(traj.times[i]),
            cell(traj.singlet[i]),
            cell(traj.triplet[i]),
            cell(traj.trace[i]),
            cell(traj.population[i]),
            cell(traj.population[i]),
        );
        if let Some(col) = mfe {
            out.push(',');
            out.push_str(&cell(col[i]));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(
    traj: &Trajectory,
    mfe: Option<&[f64]>,
    path: &Path,
) -> Result<(), CliError> {
    if traj.is_empty() {
        return Err(CliError::runtime(format!(
            "refusing to write empty series to {}",
            path.display()
        )));
    }
    std::fs::write(path, csv_text(traj, mfe))
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Number rendering for file names: integral values lose the decimal point,
/// anything else swaps '.' for 'p' to stay filesystem-friendly.
pub fn fname_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v}").replace('.', "p").replace('-', "m")
    }
}

/// `mfe_49uT.csv`, `absorption_8000uT_quantum.csv`,
/// `mfe_49uT_ksr10_phenomenological.csv`, ...
pub fn series_file_name(
    kind: &str,
    field_ut: f64,
    k_sr: Option<f64>,
    theory: Option<&str>,
) -> String {
    let mut name = format!("{kind}_{}uT", fname_num(field_ut));
    if let Some(k) = k_sr {
        let _ = write!(name, "_ksr{}", fname_num(k));
    }
    if let Some(t) = theory {
        let _ = write!(name, "_{t}");
    }
    name.push_str(".csv");
    name
}

/// One emitted CSV, as the plot script needs to know it: file name (relative
/// to the output directory), curve label, and which column carries the data.
pub struct PlotEntry {
    pub file: String,
    pub label: String,
    /// 1-based CSV column to plot against time.
    pub column: usize,
    pub is_mfe: bool,
}

impl PlotEntry {
    pub fn absorption(file: String, label: String) -> Self {
        PlotEntry { file, label, column: 6, is_mfe: false }
    }
    pub fn mfe(file: String, label: String) -> Self {
        PlotEntry { file, label, column: 7, is_mfe: true }
    }
}

/// Writes a self-contained gnuplot script rendering one panel per output
/// kind present (absorption traces, MFE curves). The script references the
/// CSVs by relative path, so it can be run from inside the output directory.
pub fn write_plot_script(
    title: &str,
    entries: &[PlotEntry],
    path: &Path,
) -> Result<(), CliError> {
    let absorption: Vec<&PlotEntry> = entries.iter().filter(|e| !e.is_mfe).collect();
    let mfe: Vec<&PlotEntry> = entries.iter().filter(|e| e.is_mfe).collect();
    let panels = [!absorption.is_empty(), !mfe.is_empty()]
        .iter()
        .filter(|p| **p)
        .count();
    if panels == 0 {
        return Err(CliError::runtime("no curves to plot".into()));
    }

    let mut s = String::new();
    let _ = writeln!(s, "# {title}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size {},480", 640 * panels);
    let _ = writeln!(s, "set output 'panels.png'");
    let _ = writeln!(s, "set xlabel 'time (us)'");
    let _ = writeln!(s, "set key top right");
    if panels == 2 {
        let _ = writeln!(s, "set multiplot layout 1,2 title '{title}'");
    } else {
        let _ = writeln!(s, "set title '{title}'");
    }
    let panel = |curves: &[&PlotEntry], ylabel: &str, out: &mut String| {
        let _ = writeln!(out, "set ylabel '{ylabel}'");
        let plots: Vec<String> = curves
            .iter()
            .map(|e| {
                format!(
                    "'{}' skip 1 using 1:{} with lines title '{}'",
                    e.file, e.column, e.label
                )
            })
            .collect();
        let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    };
    if !absorption.is_empty() {
        panel(&absorption, "surviving-pair population", &mut s);
    }
    if !mfe.is_empty() {
        panel(&mfe, "magnetic field effect", &mut s);
    }
    if panels == 2 {
        let _ = writeln!(s, "unset multiplot");
    }
    std::fs::write(path, s)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn join(dir: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zenochem_core::model::Theory;

    fn tiny_trajectory() -> Trajectory {
        Trajectory {
            theory: Theory::Quantum,
            times: vec![0.0, 0.1],
            singlet: vec![1.0, 0.75],
            triplet: vec![0.0, 0.25],
            trace: vec![1.0, 1.0],
            population: vec![1.0, 0.5],
            rho_samples: vec![],
        }
    }

    #[test]
    fn csv_layout_and_roundtrip() {
        let text = csv_text(&tiny_trajectory(), Some(&[0.0, -0.125]));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time_us,singlet,triplet,trace,population,absorption,mfe"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[1], "1.0000000000000000e0");
        let row2: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        // 17 significant digits round-trip exactly
        assert_eq!(row2[6].parse::<f64>().unwrap().to_bits(), (-0.125f64).to_bits());
        assert_eq!(row2[4], row2[5], "absorption mirrors population");
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn file_names() {
        assert_eq!(series_file_name("mfe", 49.0, None, None), "mfe_49uT.csv");
        assert_eq!(
            series_file_name("absorption", 8000.0, None, Some("quantum")),
            "absorption_8000uT_quantum.csv"
        );
        assert_eq!(
            series_file_name("mfe", 49.0, Some(10.0), Some("phenomenological")),
            "mfe_49uT_ksr10_phenomenological.csv"
        );
        assert_eq!(series_file_name("mfe", 49.5, Some(0.5), None), "mfe_49p5uT_ksr0p5.csv");
    }

    #[test]
    fn plot_script_references_relative_paths_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.gp");
        let entries = vec![
            PlotEntry::absorption("absorption_0uT.csv".into(), "B=0".into()),
            PlotEntry::mfe("mfe_49uT.csv".into(), "49 uT".into()),
        ];
        write_plot_script("demo", &entries, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("multiplot layout 1,2"));
        assert!(text.contains("'mfe_49uT.csv' skip 1 using 1:7"));
        assert!(text.contains("'absorption_0uT.csv' skip 1 using 1:6"));
        assert!(!text.contains(dir.path().to_str().unwrap()), "absolute path leaked");
    }
}
