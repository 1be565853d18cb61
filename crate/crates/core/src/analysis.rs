//! Figures of merit extracted from trajectories, parameter sweeps, and
//! threshold searches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, IntegratorConfig, Trajectory};
use crate::ergotropy::ErgotropyBreakdown;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Scenario};

/// Environment variable holding the sweep worker count.
pub const THREADS_ENV: &str = "QBCHARGE_THREADS";

/// Energy changes at or below this are treated as "no energy moved".
pub const EFFICIENCY_FLOOR: f64 = 1e-12;

/// Bisection tolerance on the swept parameter.
pub const CRITICAL_TOL: f64 = 1e-3;

/// Ergotropy samples must exceed this to count as a maximum.
const MAXIMUM_FLOOR: f64 = 1e-12;

/// Maxima below this fraction of the selected one are ripples: listed in
/// [`ChargingReport::local_maxima`] but skipped by `which_maximum`.
pub const RIPPLE_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMaximum {
    pub time: f64,
    pub ergotropy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChargingReport {
    /// Charging time `lambda t_bar`.
    pub t_bar: f64,
    pub ergotropy_at_tbar: f64,
    pub breakdown_at_tbar: ErgotropyBreakdown,
    /// Charger breakdown (incl. mean energy) interpolated at `t_bar`.
    pub charger_at_tbar: ErgotropyBreakdown,
    pub local_maxima: Vec<LocalMaximum>,
    /// 1-based ordinal of the selected maximum among the non-ripple maxima;
    /// `None` when the ergotropy has no interior maximum and the horizon
    /// endpoint is reported instead.
    pub which_maximum: Option<usize>,
}

impl ChargingReport {
    pub fn has_interior_maximum(&self) -> bool {
        self.which_maximum.is_some()
    }
}

/// Three-point quadratic through samples `k-1, k, k+1` evaluated at `t`.
fn quadratic_at(times: &[f64], values: &[f64], k: usize, t: f64) -> f64 {
    let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    y0 * (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2))
        + y1 * (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2))
        + y2 * (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1))
}

/// Vertex of the parabola through the three samples around `k`.
fn refine_peak(times: &[f64], values: &[f64], k: usize) -> (f64, f64) {
    let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    let a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom;
    let b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom;
    if a >= 0.0 {
        return (t1, y1);
    }
    let t = (-b / (2.0 * a)).clamp(t0, t2);
    (t, quadratic_at(times, values, k, t))
}

fn breakdown_at(series: &[ErgotropyBreakdown], times: &[f64], k: usize, t: f64) -> ErgotropyBreakdown {
    let pick = |f: fn(&ErgotropyBreakdown) -> f64| -> f64 {
        let values: Vec<f64> = series[k - 1..=k + 1].iter().map(f).collect();
        quadratic_at(&times[k - 1..=k + 1], &values, 1, t)
    };
    ErgotropyBreakdown {
        total: pick(|b| b.total),
        incoherent: pick(|b| b.incoherent),
        coherent: pick(|b| b.coherent),
        mean_energy: pick(|b| b.mean_energy),
    }
}

/// Locate the charging time as the global maximum of the battery ergotropy
/// over the recorded horizon.
pub fn charging_report(traj: &Trajectory) -> ChargingReport {
    let times = &traj.times;
    let erg = traj.battery_ergotropy();
    let mut peaks: Vec<(usize, LocalMaximum)> = Vec::new();
    for k in 1..erg.len().saturating_sub(1) {
        if erg[k] > erg[k - 1] && erg[k] > erg[k + 1] && erg[k] > MAXIMUM_FLOOR {
            let (time, ergotropy) = refine_peak(times, &erg, k);
            peaks.push((k, LocalMaximum { time, ergotropy }));
        }
    }

    let best = peaks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.ergotropy.total_cmp(&b.1 .1.ergotropy));
    match best {
        Some((index, &(k, peak))) => {
            let ordinal = peaks[..index]
                .iter()
                .filter(|(_, p)| p.ergotropy >= RIPPLE_FRACTION * peak.ergotropy)
                .count();
            let mut battery = breakdown_at(&traj.battery, times, k, peak.time);
            battery.total = peak.ergotropy;
            ChargingReport {
                t_bar: peak.time,
                ergotropy_at_tbar: peak.ergotropy,
                breakdown_at_tbar: battery,
                charger_at_tbar: breakdown_at(&traj.charger, times, k, peak.time),
                local_maxima: peaks.iter().map(|&(_, p)| p).collect(),
                which_maximum: Some(ordinal + 1),
            }
        }
        None => {
            let last = erg.len() - 1;
            ChargingReport {
                t_bar: times[last],
                ergotropy_at_tbar: erg[last],
                breakdown_at_tbar: traj.battery[last],
                charger_at_tbar: traj.charger[last],
                local_maxima: Vec::new(),
                which_maximum: None,
            }
        }
    }
}

/// Efficiency ratio, or `Undefined` when its denominator is not positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Efficiency {
    Value(f64),
    Undefined,
}

impl Efficiency {
    pub fn value(self) -> Option<f64> {
        match self {
            Efficiency::Value(v) => Some(v),
            Efficiency::Undefined => None,
        }
    }
}

impl std::fmt::Display for Efficiency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Efficiency::Value(v) => write!(f, "{v:.11e}"),
            Efficiency::Undefined => f.write_str("undefined"),
        }
    }
}

fn net_gain(traj: &Trajectory, report: &ChargingReport) -> f64 {
    (report.ergotropy_at_tbar - traj.battery[0].total).max(0.0)
}

fn ratio(numerator: f64, denominator: f64) -> Efficiency {
    if denominator <= EFFICIENCY_FLOOR {
        Efficiency::Undefined
    } else {
        Efficiency::Value(numerator / denominator)
    }
}

/// Net charged ergotropy per unit of energy released by the chargers.
pub fn efficiency_output(traj: &Trajectory, report: &ChargingReport) -> Efficiency {
    let released = traj.charger[0].mean_energy - report.charger_at_tbar.mean_energy;
    ratio(net_gain(traj, report), released)
}

/// Net charged ergotropy per unit of energy gained by the battery.
pub fn efficiency_input(traj: &Trajectory, report: &ChargingReport) -> Efficiency {
    let gained = report.breakdown_at_tbar.mean_energy - traj.battery[0].mean_energy;
    ratio(net_gain(traj, report), gained)
}

/// Integrator settings where unset fields fall back to per-model defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            dt: None,
            t_max: None,
            record_stride: 1,
        }
    }
}

impl IntegratorSettings {
    pub fn resolve(&self, spec: &ModelSpec) -> IntegratorConfig {
        let default = IntegratorConfig::default_for(spec);
        IntegratorConfig {
            dt: self.dt.unwrap_or(default.dt),
            t_max: self.t_max.unwrap_or(default.t_max),
            record_stride: self.record_stride,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "R")]
    R,
    #[serde(rename = "c1")]
    C1,
    #[serde(rename = "e1")]
    E1,
    #[serde(rename = "n")]
    Chargers,
    #[serde(rename = "m")]
    Cells,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::R => "R",
            SweepAxis::C1 => "c1",
            SweepAxis::E1 => "e1",
            SweepAxis::Chargers => "n",
            SweepAxis::Cells => "m",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "R" | "r" => Some(SweepAxis::R),
            "c1" | "c" => Some(SweepAxis::C1),
            "e1" => Some(SweepAxis::E1),
            "n" => Some(SweepAxis::Chargers),
            "m" => Some(SweepAxis::Cells),
            _ => None,
        }
    }

    /// Set this axis to `value` on a copy of the model and scenario.
    pub fn apply(self, value: f64, spec: &ModelSpec, scen: &Scenario) -> Result<(ModelSpec, Scenario)> {
        let mut spec = spec.clone();
        let mut scen = scen.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidModel(format!("{} = {v} is not a positive integer", self.name())))
            }
        };
        let extra_photons = spec.ncut - spec.n_qubits();
        match self {
            SweepAxis::R => spec.set_r(value),
            SweepAxis::C1 => match &mut scen {
                Scenario::Product { c } => c.iter_mut().for_each(|ci| *ci = value),
                Scenario::Bell { c1, .. } | Scenario::MixedCharger { c1 } => *c1 = value,
                other => {
                    return Err(Error::IncompatibleScenario(format!(
                        "axis c1 does not apply to {}",
                        other.label()
                    )))
                }
            },
            SweepAxis::E1 => match &mut scen {
                Scenario::Residual { e1 } | Scenario::MixedBattery { e1 } => *e1 = value,
                other => {
                    return Err(Error::IncompatibleScenario(format!(
                        "axis e1 does not apply to {}",
                        other.label()
                    )))
                }
            },
            SweepAxis::Chargers => {
                let n = count(value)?;
                if let Scenario::Product { c } = &mut scen {
                    let first = c.first().copied().unwrap_or(1.0);
                    if c.iter().any(|&x| x != first) {
                        return Err(Error::IncompatibleScenario(
                            "axis n needs identical charger coefficients".into(),
                        ));
                    }
                    *c = vec![first; n];
                }
                spec.n_chargers = n;
                spec.ncut = spec.n_qubits() + extra_photons;
            }
            SweepAxis::Cells => {
                spec.m_cells = count(value)?;
                spec.ncut = spec.n_qubits() + extra_photons;
            }
        }
        spec.validate()?;
        scen.validate(&spec)?;
        Ok((spec, scen))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub report: ChargingReport,
    pub initial_ergotropy: f64,
    pub p_eff: Efficiency,
    pub pcal_eff: Efficiency,
}

pub fn analyze(traj: &Trajectory) -> PointResult {
    let report = charging_report(traj);
    PointResult {
        initial_ergotropy: traj.battery[0].total,
        p_eff: efficiency_output(traj, &report),
        pcal_eff: efficiency_input(traj, &report),
        report,
    }
}

/// Evolve and analyze a single configuration.
pub fn run_point(spec: &ModelSpec, scen: &Scenario, settings: &IntegratorSettings) -> Result<PointResult> {
    let cfg = settings.resolve(spec);
    let traj = dynamics::evolve(spec, scen, &cfg)?;
    Ok(analyze(&traj))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<PointResult, Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub base_spec: ModelSpec,
    pub base_scenario: Scenario,
    pub settings: IntegratorSettings,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("sweep.grid", "grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("sweep.grid", "grid has non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sweep.grid", "grid must be strictly increasing"));
    }
    Ok(())
}

/// Run `f` inside a pool sized by [`THREADS_ENV`] when it is set.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Evolve and analyze every grid point. Failing points are recorded, not fatal.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    base_spec: &ModelSpec,
    base_scenario: &Scenario,
    settings: &IntegratorSettings,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let points = with_thread_pool(|| {
        grid.par_iter()
            .map(|&value| {
                let outcome = axis
                    .apply(value, base_spec, base_scenario)
                    .and_then(|(spec, scen)| run_point(&spec, &scen, settings));
                SweepPoint { value, outcome }
            })
            .collect()
    });
    Ok(SweepResult {
        axis,
        grid: grid.to_vec(),
        points,
        base_spec: base_spec.clone(),
        base_scenario: base_scenario.clone(),
        settings: *settings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalValue {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Bisect for the point where `predicate` flips, to absolute tolerance `tol`.
pub fn critical_parameter(
    mut predicate: impl FnMut(f64) -> Result<bool>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<CriticalValue> {
    let (mut lo, mut hi) = bracket;
    let at_lo = predicate(lo)?;
    let at_hi = predicate(hi)?;
    let mut evaluations = 2;
    if at_lo == at_hi {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if predicate(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        evaluations += 1;
    }
    Ok(CriticalValue {
        value: 0.5 * (lo + hi),
        lo,
        hi,
        evaluations,
    })
}

/// Threshold criteria understood by [`critical_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalCriterion {
    /// Charged ergotropy exceeds the battery's initial ergotropy.
    ExceedsInitial,
    /// The model's charger count beats `baseline_n` chargers of the same kind.
    MoreChargersWin { baseline_n: usize },
}

pub fn criterion_holds(
    criterion: CriticalCriterion,
    spec: &ModelSpec,
    scen: &Scenario,
    settings: &IntegratorSettings,
) -> Result<bool> {
    let point = run_point(spec, scen, settings)?;
    match criterion {
        CriticalCriterion::ExceedsInitial => {
            Ok(point.report.ergotropy_at_tbar > point.initial_ergotropy)
        }
        CriticalCriterion::MoreChargersWin { baseline_n } => {
            let (base_spec, base_scen) =
                SweepAxis::Chargers.apply(baseline_n as f64, spec, scen)?;
            let baseline = run_point(&base_spec, &base_scen, settings)?;
            Ok(point.report.ergotropy_at_tbar > baseline.report.ergotropy_at_tbar)
        }
    }
}

/// Bisect along `axis` for the flip of `criterion`.
pub fn critical_search(
    axis: SweepAxis,
    bracket: (f64, f64),
    tol: f64,
    criterion: CriticalCriterion,
    spec: &ModelSpec,
    scen: &Scenario,
    settings: &IntegratorSettings,
) -> Result<CriticalValue> {
    critical_parameter(
        |value| {
            let (spec, scen) = axis.apply(value, spec, scen)?;
            criterion_holds(criterion, &spec, &scen, settings)
        },
        bracket,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(times: Vec<f64>, erg: Vec<f64>) -> Trajectory {
        let spec = ModelSpec::new(1, 1, 1.0).unwrap();
        let b = |e: f64| ErgotropyBreakdown {
            total: e,
            incoherent: e,
            coherent: 0.0,
            mean_energy: e,
        };
        let n = times.len();
        Trajectory {
            config: IntegratorConfig {
                dt: times[1] - times[0],
                t_max: *times.last().unwrap(),
                record_stride: 1,
            },
            spec,
            battery: erg.iter().map(|&e| b(e)).collect(),
            charger: erg.iter().map(|&e| b(1.0 - e)).collect(),
            times,
            battery_states: Vec::new(),
            charger_states: Vec::new(),
            pseudomode_occupation: vec![0.0; n],
            excitation_number: vec![0.0; n],
            trace_deviation: vec![0.0; n],
        }
    }

    #[test]
    fn quadratic_refinement_recovers_parabola_vertex() {
        let times: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        let erg: Vec<f64> = times.iter().map(|t| 0.8 - (t - 2.03) * (t - 2.03)).collect();
        let report = charging_report(&synthetic(times, erg));
        assert!((report.t_bar - 2.03).abs() < 1e-12);
        assert!((report.ergotropy_at_tbar - 0.8).abs() < 1e-12);
        assert_eq!(report.which_maximum, Some(1));
    }

    #[test]
    fn global_maximum_selects_later_peak() {
        let times: Vec<f64> = (0..400).map(|k| 0.01 * k as f64).collect();
        let erg: Vec<f64> = times
            .iter()
            .map(|t| (t * 5.0).sin().powi(2) * (0.5 + 0.1 * t))
            .collect();
        let report = charging_report(&synthetic(times, erg));
        assert!(report.local_maxima.len() >= 3);
        let best = report
            .local_maxima
            .iter()
            .map(|p| p.ergotropy)
            .fold(f64::MIN, f64::max);
        assert_eq!(report.ergotropy_at_tbar, best);
        assert_eq!(report.which_maximum, Some(report.local_maxima.len()));
    }

    #[test]
    fn ripples_are_not_counted() {
        let times: Vec<f64> = (0..300).map(|k| 0.01 * k as f64).collect();
        let bump = |t: f64, c: f64, h: f64| h * (-(t - c) * (t - c) / 0.01).exp();
        let erg: Vec<f64> = times
            .iter()
            .map(|&t| bump(t, 0.5, 1.0) + bump(t, 1.2, 0.01) + bump(t, 2.0, 1.2))
            .collect();
        let report = charging_report(&synthetic(times, erg));
        assert_eq!(report.local_maxima.len(), 3);
        assert_eq!(report.which_maximum, Some(2));
        assert!((report.t_bar - 2.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_curve_reports_endpoint() {
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let erg: Vec<f64> = times.iter().map(|t| 0.01 * t).collect();
        let report = charging_report(&synthetic(times, erg));
        assert_eq!(report.which_maximum, None);
        assert_eq!(report.t_bar, 19.0);
        assert!((report.ergotropy_at_tbar - 0.19).abs() < 1e-15);
    }

    #[test]
    fn flat_zero_curve_has_no_maximum() {
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let report = charging_report(&synthetic(times, vec![0.0; 20]));
        assert!(!report.has_interior_maximum());
    }

    #[test]
    fn undefined_efficiency_when_nothing_moves() {
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let traj = synthetic(times, vec![0.0; 20]);
        let report = charging_report(&traj);
        assert_eq!(efficiency_output(&traj, &report), Efficiency::Undefined);
        assert_eq!(efficiency_input(&traj, &report), Efficiency::Undefined);
        assert_eq!(Efficiency::Undefined.to_string(), "undefined");
    }

    #[test]
    fn bisection_finds_threshold() {
        let found = critical_parameter(|x| Ok(x < 0.4321), (0.0, 1.0), 1e-3).unwrap();
        assert!((found.value - 0.4321).abs() <= 1e-3);
        assert!(found.hi - found.lo <= 1e-3);
        assert!(matches!(
            critical_parameter(|x| Ok(x < 2.0), (0.0, 1.0), 1e-3),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[0.1, 1.0, 2.0]).is_ok());
        assert!(check_grid(&[1.0, 1.0]).is_err());
        assert!(check_grid(&[2.0, 1.0]).is_err());
        assert!(check_grid(&[]).is_err());
    }

    #[test]
    fn axis_application() {
        let spec = ModelSpec::new(1, 1, 5.0).unwrap();
        let scen = Scenario::Product { c: vec![0.7] };
        let (s, c) = SweepAxis::Chargers.apply(3.0, &spec, &scen).unwrap();
        assert_eq!(s.n_chargers, 3);
        assert_eq!(s.ncut, 4);
        assert_eq!(c, Scenario::Product { c: vec![0.7; 3] });
        let (s, _) = SweepAxis::R.apply(12.0, &spec, &scen).unwrap();
        assert!((s.r() - 12.0).abs() < 1e-12);
        assert!(SweepAxis::E1.apply(0.3, &spec, &scen).is_err());
        assert!(SweepAxis::Cells.apply(1.5, &spec, &scen).is_err());
    }

    #[test]
    fn sweep_flags_failing_points() {
        let spec = ModelSpec::new(1, 1, 5.0).unwrap();
        let scen = Scenario::Product { c: vec![1.0] };
        let settings = IntegratorSettings {
            t_max: Some(0.5),
            ..Default::default()
        };
        let result = sweep(SweepAxis::C1, &[0.5, 1.0, 1.5], &spec, &scen, &settings).unwrap();
        assert_eq!(result.points.len(), 3);
        assert!(result.points[0].outcome.is_ok());
        assert!(result.points[1].outcome.is_ok());
        assert!(result.points[2].outcome.is_err());
    }
}
