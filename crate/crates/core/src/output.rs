//! CSV emission for trajectories, sweeps and threshold searches.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{CriticalValue, PointResult, SweepAxis, SweepResult};
use crate::config::RunConfig;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

pub const TRAJECTORY_COLUMNS: [&str; 8] = [
    "lambda_t",
    "E_batt",
    "E_i_batt",
    "E_c_batt",
    "meanE_batt",
    "erg_charger",
    "meanE_charger",
    "n_pseudomode",
];

pub const SWEEP_COLUMNS: [&str; 8] = [
    "t_bar",
    "E_bar",
    "E_i_bar",
    "E_c_bar",
    "P_eff",
    "Pcal_eff",
    "which_maximum",
    "flags",
];

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_trajectory(traj: &Trajectory, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{}", TRAJECTORY_COLUMNS.join(","))?;
    for k in 0..traj.len() {
        let b = &traj.battery[k];
        let c = &traj.charger[k];
        let row = [
            traj.times[k],
            b.total,
            b.incoherent,
            b.coherent,
            b.mean_energy,
            c.total,
            c.mean_energy,
            traj.pseudomode_occupation[k],
        ];
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn point_flags(point: &PointResult) -> String {
    let mut flags = Vec::new();
    if !point.report.has_interior_maximum() {
        flags.push("no-interior-maximum");
    }
    if point.p_eff.value().is_none() {
        flags.push("P-undefined");
    }
    if point.pcal_eff.value().is_none() {
        flags.push("Pcal-undefined");
    }
    if flags.is_empty() {
        "ok".into()
    } else {
        flags.join(";")
    }
}

fn point_cells(point: &PointResult) -> Vec<String> {
    let r = &point.report;
    vec![
        num(r.t_bar),
        num(r.ergotropy_at_tbar),
        num(r.breakdown_at_tbar.incoherent),
        num(r.breakdown_at_tbar.coherent),
        point.p_eff.to_string(),
        point.pcal_eff.to_string(),
        r.which_maximum.map_or_else(|| "none".into(), |k| k.to_string()),
        point_flags(point),
    ]
}

pub fn write_sweep(result: &SweepResult, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{},{}", result.axis.name(), SWEEP_COLUMNS.join(","))?;
    for point in &result.points {
        let cells = match &point.outcome {
            Ok(p) => point_cells(p),
            Err(e) => {
                let mut cells = vec![String::new(); SWEEP_COLUMNS.len() - 1];
                cells.push(format!("error:{}", e.category()));
                cells
            }
        };
        writeln!(w, "{},{}", num(point.value), cells.join(","))?;
    }
    Ok(())
}

pub fn write_critical(axis: SweepAxis, found: &CriticalValue, w: &mut impl Write) -> Result<()> {
    writeln!(w, "axis,value,lo,hi,evaluations")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        axis.name(),
        num(found.value),
        num(found.lo),
        num(found.hi),
        found.evaluations
    )?;
    Ok(())
}

/// Path of one trajectory file inside a gridded trajectory run.
pub fn grid_member_path(out: &Path, axis: SweepAxis, value: f64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_{}{value}.{ext}", axis.name()))
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.toml");
    PathBuf::from(name)
}

/// Sidecar text: a version comment followed by the run config, which is
/// itself a valid `--config` file.
pub fn sidecar_text(cfg: &RunConfig) -> String {
    format!("# qbcharge {}\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml())
}

pub fn write_sidecar(out: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    let path = sidecar_path(out);
    std::fs::write(&path, sidecar_text(cfg)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Write `render`'s bytes to `path`, creating parent directories.
pub fn write_file(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut bytes = Vec::new();
    render(&mut bytes)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{run_point, sweep, IntegratorSettings};
    use crate::dynamics::{evolve, IntegratorConfig};
    use crate::model::{ModelSpec, Scenario};

    #[test]
    fn three_steps_four_lines() {
        let spec = ModelSpec::new(1, 1, 2.0).unwrap();
        let cfg = IntegratorConfig {
            dt: 0.001,
            t_max: 0.002,
            record_stride: 1,
        };
        let traj = evolve(&spec, &Scenario::Product { c: vec![1.0] }, &cfg).unwrap();
        assert_eq!(traj.len(), 3);
        let mut out = Vec::new();
        write_trajectory(&traj, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], TRAJECTORY_COLUMNS.join(","));
        assert!(lines[1].starts_with("0.00000000000e0,"));
    }

    #[test]
    fn undefined_efficiency_token() {
        let spec = ModelSpec::new(1, 1, 0.0).unwrap();
        let settings = IntegratorSettings {
            t_max: Some(0.5),
            ..Default::default()
        };
        let result = sweep(
            SweepAxis::C1,
            &[1.0],
            &spec,
            &Scenario::Product { c: vec![1.0] },
            &settings,
        )
        .unwrap();
        let mut out = Vec::new();
        write_sweep(&result, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.contains(",undefined,undefined,"), "{row}");
        assert!(!row.to_lowercase().contains("nan"));
        let point = run_point(&spec, &Scenario::Product { c: vec![1.0] }, &settings).unwrap();
        assert!(point_flags(&point).contains("no-interior-maximum"));
    }

    #[test]
    fn paths() {
        let out = Path::new("runs/fig2.csv");
        assert_eq!(grid_member_path(out, SweepAxis::C1, 0.4), Path::new("runs/fig2_c10.4.csv"));
        assert_eq!(sidecar_path(out), Path::new("runs/fig2.csv.meta.toml"));
    }
}
