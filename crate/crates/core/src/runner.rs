//! Execute a [`RunConfig`] and write its results.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::analysis::{self, CriticalValue, PointResult, SweepAxis, SweepResult};
use crate::config::{Mode, RunConfig};
use crate::dynamics::{self, Trajectory};
use crate::error::Result;
use crate::output;

#[derive(Clone, Debug)]
pub enum RunOutput {
    /// One trajectory per grid value, or a single one without a grid.
    Trajectories(Vec<(Option<(SweepAxis, f64)>, Trajectory)>),
    Report(PointResult),
    Sweep(SweepResult),
    Critical(SweepAxis, CriticalValue),
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.mode {
        Mode::Trajectory => {
            let run = |axis_value: Option<(SweepAxis, f64)>| -> Result<_> {
                let (spec, scen) = match axis_value {
                    Some((axis, v)) => axis.apply(v, &cfg.spec, &cfg.scenario)?,
                    None => (cfg.spec.clone(), cfg.scenario.clone()),
                };
                let traj = dynamics::evolve(&spec, &scen, &cfg.integrator.resolve(&spec))?;
                Ok((axis_value, traj))
            };
            let trajectories = match &cfg.sweep {
                Some(s) => analysis::with_thread_pool(|| {
                    s.grid
                        .par_iter()
                        .map(|&v| run(Some((s.axis, v))))
                        .collect::<Result<Vec<_>>>()
                })?,
                None => vec![run(None)?],
            };
            Ok(RunOutput::Trajectories(trajectories))
        }
        Mode::Report => analysis::run_point(&cfg.spec, &cfg.scenario, &cfg.integrator).map(RunOutput::Report),
        Mode::Sweep => {
            let s = cfg.sweep.as_ref().expect("validated sweep section");
            analysis::sweep(s.axis, &s.grid, &cfg.spec, &cfg.scenario, &cfg.integrator).map(RunOutput::Sweep)
        }
        Mode::Critical => {
            let c = cfg.critical.as_ref().expect("validated critical section");
            let found = analysis::critical_search(
                c.axis,
                c.bracket,
                c.tolerance,
                c.criterion,
                &cfg.spec,
                &cfg.scenario,
                &cfg.integrator,
            )?;
            Ok(RunOutput::Critical(c.axis, found))
        }
    }
}

fn write_report(point: &PointResult, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{}", output::SWEEP_COLUMNS.join(","))?;
    let r = &point.report;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        output::num(r.t_bar),
        output::num(r.ergotropy_at_tbar),
        output::num(r.breakdown_at_tbar.incoherent),
        output::num(r.breakdown_at_tbar.coherent),
        point.p_eff,
        point.pcal_eff,
        r.which_maximum.map_or_else(|| "none".into(), |k| k.to_string()),
        output::point_flags(point),
    )?;
    Ok(())
}

/// Render a single-file result as CSV bytes.
pub fn render(result: &RunOutput, w: &mut impl Write) -> Result<()> {
    match result {
        RunOutput::Trajectories(list) => {
            for (k, (axis_value, traj)) in list.iter().enumerate() {
                if k > 0 {
                    writeln!(w)?;
                }
                if let Some((axis, v)) = axis_value {
                    writeln!(w, "# {} = {}", axis.name(), v)?;
                }
                output::write_trajectory(traj, w)?;
            }
            Ok(())
        }
        RunOutput::Report(point) => write_report(point, w),
        RunOutput::Sweep(s) => output::write_sweep(s, w),
        RunOutput::Critical(axis, found) => output::write_critical(*axis, found, w),
    }
}

/// Write results to `cfg.output` (plus sidecar) or to `stdout`. Returns the
/// files written.
pub fn emit(cfg: &RunConfig, result: &RunOutput, stdout: &mut impl Write) -> Result<Vec<PathBuf>> {
    let Some(out) = &cfg.output else {
        render(result, stdout)?;
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    match result {
        RunOutput::Trajectories(list) if list.len() > 1 || list[0].0.is_some() => {
            for (axis_value, traj) in list {
                let (axis, v) = axis_value.expect("gridded trajectory");
                let path = output::grid_member_path(out, axis, v);
                output::write_file(&path, |buf| output::write_trajectory(traj, buf))?;
                written.push(path);
            }
        }
        _ => {
            output::write_file(out, |buf| render(result, buf))?;
            written.push(out.clone());
        }
    }
    written.push(output::write_sidecar(out, cfg)?);
    Ok(written)
}

/// Short human-readable summary for the terminal.
pub fn summary(result: &RunOutput) -> Vec<String> {
    match result {
        RunOutput::Trajectories(list) => list
            .iter()
            .map(|(axis_value, traj)| {
                let label = axis_value.map_or_else(String::new, |(a, v)| format!("{} = {v}: ", a.name()));
                let peak = analysis::charging_report(traj);
                format!(
                    "{label}{} steps to lambda_t = {:.6}, max ergotropy {:.6} at {:.6}",
                    traj.len(),
                    traj.times.last().copied().unwrap_or(0.0),
                    peak.ergotropy_at_tbar,
                    peak.t_bar
                )
            })
            .collect(),
        RunOutput::Report(p) => vec![
            format!("t_bar = {:.6}", p.report.t_bar),
            format!(
                "E_bar = {:.6} (incoherent {:.6}, coherent {:.6})",
                p.report.ergotropy_at_tbar, p.report.breakdown_at_tbar.incoherent, p.report.breakdown_at_tbar.coherent
            ),
            format!("P_eff = {}, Pcal_eff = {}", p.p_eff, p.pcal_eff),
            format!("flags = {}", output::point_flags(p)),
        ],
        RunOutput::Sweep(s) => {
            let failed = s.points.iter().filter(|p| p.outcome.is_err()).count();
            vec![format!("{} points over {}, {failed} failed", s.points.len(), s.axis.name())]
        }
        RunOutput::Critical(axis, c) => vec![format!(
            "critical {} = {:.6} (bracket [{:.6}, {:.6}], {} evaluations)",
            axis.name(),
            c.value,
            c.lo,
            c.hi,
            c.evaluations
        )],
    }
}
