//! Run configuration: TOML files, presets and flag overrides layered into a
//! validated [`RunConfig`].

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, CriticalCriterion, IntegratorSettings, SweepAxis, CRITICAL_TOL};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::model::{BellKind, ModelSpec, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Trajectory,
    Report,
    Sweep,
    Critical,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(Mode::Trajectory),
            "report" => Some(Mode::Report),
            "sweep" => Some(Mode::Sweep),
            "critical" => Some(Mode::Critical),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Trajectory => "trajectory",
            Mode::Report => "report",
            Mode::Sweep => "sweep",
            Mode::Critical => "critical",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ncut: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// One configuration layer as written in a file; every key optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalSection>,
}

fn over<T>(low: &mut Option<T>, high: Option<T>) {
    if high.is_some() {
        *low = high;
    }
}

fn merge_sections<S: Default>(low: &mut Option<S>, high: Option<S>, merge: impl FnOnce(&mut S, S)) {
    if let Some(high) = high {
        merge(low.get_or_insert_with(S::default), high);
    }
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = unknown_key(&message).unwrap_or_else(|| "<file>".into());
            Error::config(key, message)
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Overlay `high` on top of `self`. A new scenario kind discards the
    /// parameters that belonged to the old one.
    pub fn merge(&mut self, high: PartialConfig) {
        over(&mut self.mode, high.mode);
        over(&mut self.output, high.output);

        let m = high.model;
        over(&mut self.model.n, m.n);
        over(&mut self.model.m, m.m);
        over(&mut self.model.r, m.r);
        over(&mut self.model.ncut, m.ncut);

        let s = high.scenario;
        if s.kind.is_some() && s.kind != self.scenario.kind {
            self.scenario = ScenarioSection::default();
        }
        over(&mut self.scenario.kind, s.kind);
        over(&mut self.scenario.c, s.c);
        over(&mut self.scenario.c1, s.c1);
        over(&mut self.scenario.e1, s.e1);

        let i = high.integrator;
        over(&mut self.integrator.dt, i.dt);
        over(&mut self.integrator.t_max, i.t_max);
        over(&mut self.integrator.record_stride, i.record_stride);

        merge_sections(&mut self.sweep, high.sweep, |low, high| {
            over(&mut low.axis, high.axis);
            over(&mut low.grid, high.grid);
        });
        merge_sections(&mut self.critical, high.critical, |low, high| {
            over(&mut low.axis, high.axis);
            over(&mut low.lo, high.lo);
            over(&mut low.hi, high.hi);
            over(&mut low.criterion, high.criterion);
            over(&mut low.baseline_n, high.baseline_n);
            over(&mut low.tolerance, high.tolerance);
        });
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepDef {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalDef {
    pub axis: SweepAxis,
    pub bracket: (f64, f64),
    pub criterion: CriticalCriterion,
    pub tolerance: f64,
}

/// Fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub spec: ModelSpec,
    pub scenario: Scenario,
    pub integrator: IntegratorSettings,
    pub sweep: Option<SweepDef>,
    pub critical: Option<CriticalDef>,
    pub output: Option<PathBuf>,
}

fn required<T: Clone>(value: &Option<T>, key: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::config(key, "missing required key"))
}

fn unit_interval(key: &str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::config(key, format!("{x} outside [0, 1]")))
    }
}

fn parse_axis(key: &str, s: &str) -> Result<SweepAxis> {
    SweepAxis::parse(s).ok_or_else(|| Error::config(key, format!("unknown axis `{s}` (R, c1, e1, n, m)")))
}

pub const SCENARIO_KINDS: [&str; 8] = [
    "scenario-i",
    "scenario-ii",
    "bell-psi-plus",
    "bell-psi-minus",
    "bell-phi-plus",
    "bell-phi-minus",
    "mixed-charger",
    "mixed-battery",
];

fn reject_extra(key: &str, value: bool) -> Result<()> {
    if value {
        Err(Error::config(key, "not used by this scenario kind"))
    } else {
        Ok(())
    }
}

fn build_scenario(s: &ScenarioSection, n: usize, axis_seed: Option<(SweepAxis, f64)>) -> Result<Scenario> {
    let kind = required(&s.kind, "scenario.kind")?;
    let seed = |axis: SweepAxis| axis_seed.filter(|(a, _)| *a == axis).map(|(_, v)| v);
    let c1 = |s: &ScenarioSection| -> Result<f64> {
        let c1 = match (s.c1, seed(SweepAxis::C1)) {
            (Some(c1), _) | (None, Some(c1)) => c1,
            (None, None) => return Err(Error::config("scenario.c1", "missing required key")),
        };
        unit_interval("scenario.c1", c1)
    };
    let e1 = |s: &ScenarioSection| -> Result<f64> {
        let e1 = match (s.e1, seed(SweepAxis::E1)) {
            (Some(e1), _) | (None, Some(e1)) => e1,
            (None, None) => return Err(Error::config("scenario.e1", "missing required key")),
        };
        unit_interval("scenario.e1", e1)
    };
    let bell = |kind: BellKind| -> Result<Scenario> {
        reject_extra("scenario.c", s.c.is_some())?;
        reject_extra("scenario.e1", s.e1.is_some())?;
        Ok(Scenario::Bell { kind, c1: c1(s)? })
    };
    match kind.as_str() {
        "scenario-i" => {
            reject_extra("scenario.e1", s.e1.is_some())?;
            if s.c.is_some() && s.c1.is_some() {
                return Err(Error::config("scenario.c1", "give either `c` or `c1`, not both"));
            }
            let c = match &s.c {
                Some(c) if c.len() == 1 => vec![c[0]; n],
                Some(c) if c.len() == n => c.clone(),
                Some(c) => {
                    return Err(Error::config(
                        "scenario.c",
                        format!("{} coefficients for {n} chargers", c.len()),
                    ))
                }
                None => vec![c1(s)?; n],
            };
            for &x in &c {
                unit_interval("scenario.c", x)?;
            }
            Ok(Scenario::Product { c })
        }
        "scenario-ii" | "mixed-battery" => {
            reject_extra("scenario.c", s.c.is_some())?;
            reject_extra("scenario.c1", s.c1.is_some())?;
            let e1 = e1(s)?;
            Ok(if kind == "scenario-ii" {
                Scenario::Residual { e1 }
            } else {
                Scenario::MixedBattery { e1 }
            })
        }
        "bell-psi-plus" => bell(BellKind::PsiPlus),
        "bell-psi-minus" => bell(BellKind::PsiMinus),
        "bell-phi-plus" => bell(BellKind::PhiPlus),
        "bell-phi-minus" => bell(BellKind::PhiMinus),
        "mixed-charger" => {
            reject_extra("scenario.c", s.c.is_some())?;
            reject_extra("scenario.e1", s.e1.is_some())?;
            Ok(Scenario::MixedCharger { c1: c1(s)? })
        }
        other => Err(Error::config(
            "scenario.kind",
            format!("unknown kind `{other}` (one of {})", SCENARIO_KINDS.join(", ")),
        )),
    }
}

fn scenario_section(scen: &Scenario) -> ScenarioSection {
    let mut s = ScenarioSection {
        kind: Some(scen.label().to_string()),
        ..Default::default()
    };
    match scen {
        Scenario::Product { c } => s.c = Some(c.clone()),
        Scenario::Residual { e1 } | Scenario::MixedBattery { e1 } => s.e1 = Some(*e1),
        Scenario::Bell { c1, .. } | Scenario::MixedCharger { c1 } => s.c1 = Some(*c1),
    }
    s
}

fn criterion_name(c: CriticalCriterion) -> &'static str {
    match c {
        CriticalCriterion::ExceedsInitial => "exceeds-initial",
        CriticalCriterion::MoreChargersWin { .. } => "more-chargers",
    }
}

impl RunConfig {
    /// Validate a merged layer stack into a run description.
    pub fn from_partial(p: &PartialConfig) -> Result<Self> {
        let mode_name = required(&p.mode, "mode")?;
        let mode = Mode::parse(&mode_name).ok_or_else(|| {
            Error::config("mode", format!("unknown mode `{mode_name}` (trajectory, report, sweep, critical)"))
        })?;

        let n = required(&p.model.n, "model.n")?;
        let m = required(&p.model.m, "model.m")?;
        let r = required(&p.model.r, "model.R")?;
        if n == 0 {
            return Err(Error::config("model.n", "need at least one charger"));
        }
        if m == 0 {
            return Err(Error::config("model.m", "need at least one cell"));
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::config("model.R", format!("{r} is not a finite non-negative number")));
        }
        let mut spec = ModelSpec::new(n, m, r).map_err(|e| Error::config("model", e.to_string()))?;
        if let Some(ncut) = p.model.ncut {
            spec = spec
                .with_ncut(ncut)
                .map_err(|e| Error::config("model.ncut", e.to_string()))?;
        }

        let sweep = match (&p.sweep, mode) {
            (Some(s), Mode::Sweep | Mode::Trajectory) => {
                let axis_name = required(&s.axis, "sweep.axis")?;
                let axis = parse_axis("sweep.axis", &axis_name)?;
                let grid = required(&s.grid, "sweep.grid")?;
                analysis::check_grid(&grid)?;
                Some(SweepDef { axis, grid })
            }
            (None, Mode::Sweep) => return Err(Error::config("sweep", "missing required section for mode sweep")),
            (Some(_), _) => {
                return Err(Error::config("sweep", format!("not used in mode {}", mode.name())))
            }
            (None, _) => None,
        };

        let critical = match (&p.critical, mode) {
            (Some(c), Mode::Critical) => {
                let axis = parse_axis("critical.axis", &required(&c.axis, "critical.axis")?)?;
                let lo = required(&c.lo, "critical.lo")?;
                let hi = required(&c.hi, "critical.hi")?;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::config("critical.hi", format!("bracket [{lo}, {hi}] is not increasing")));
                }
                let criterion = match required(&c.criterion, "critical.criterion")?.as_str() {
                    "exceeds-initial" => {
                        reject_extra("critical.baseline_n", c.baseline_n.is_some())?;
                        CriticalCriterion::ExceedsInitial
                    }
                    "more-chargers" => CriticalCriterion::MoreChargersWin {
                        baseline_n: required(&c.baseline_n, "critical.baseline_n")?,
                    },
                    other => {
                        return Err(Error::config(
                            "critical.criterion",
                            format!("unknown criterion `{other}` (exceeds-initial, more-chargers)"),
                        ))
                    }
                };
                let tolerance = c.tolerance.unwrap_or(CRITICAL_TOL);
                if !(tolerance > 0.0) {
                    return Err(Error::config("critical.tolerance", "must be positive"));
                }
                Some(CriticalDef {
                    axis,
                    bracket: (lo, hi),
                    criterion,
                    tolerance,
                })
            }
            (None, Mode::Critical) => {
                return Err(Error::config("critical", "missing required section for mode critical"))
            }
            (Some(_), _) => {
                return Err(Error::config("critical", format!("not used in mode {}", mode.name())))
            }
            (None, _) => None,
        };

        let seed = sweep
            .as_ref()
            .map(|s| (s.axis, s.grid[0]))
            .or_else(|| critical.as_ref().map(|c| (c.axis, c.bracket.0)));
        let scenario = build_scenario(&p.scenario, n, seed)?;
        scenario
            .validate(&spec)
            .map_err(|e| Error::config("scenario", e.to_string()))?;

        let integrator = IntegratorSettings {
            dt: p.integrator.dt,
            t_max: p.integrator.t_max,
            record_stride: p.integrator.record_stride.unwrap_or(1),
        };
        if integrator.record_stride == 0 {
            return Err(Error::config("integrator.record_stride", "must be at least 1"));
        }
        if let Some(dt) = integrator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::config("integrator.dt", format!("{dt} is not positive")));
            }
        }
        if let Some(t) = integrator.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("integrator.t_max", format!("{t} is not positive")));
            }
        }
        if sweep.is_none() && critical.is_none() {
            integrator
                .resolve(&spec)
                .validate(&spec)
                .map_err(|e| Error::config("integrator.dt", e.to_string()))?;
        }

        Ok(RunConfig {
            mode,
            spec,
            scenario,
            integrator,
            sweep,
            critical,
            output: p.output.as_ref().map(PathBuf::from),
        })
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        Self::from_partial(&PartialConfig::from_toml(text)?)
    }

    /// Layer representation with every resolved key filled in.
    pub fn to_partial(&self) -> PartialConfig {
        PartialConfig {
            mode: Some(self.mode.name().to_string()),
            output: self.output.as_ref().map(|p| p.display().to_string()),
            model: ModelSection {
                n: Some(self.spec.n_chargers),
                m: Some(self.spec.m_cells),
                r: Some(self.spec.r()),
                ncut: Some(self.spec.ncut),
            },
            scenario: scenario_section(&self.scenario),
            integrator: IntegratorSection {
                dt: self.integrator.dt,
                t_max: self.integrator.t_max,
                record_stride: Some(self.integrator.record_stride),
            },
            sweep: self.sweep.as_ref().map(|s| SweepSection {
                axis: Some(s.axis.name().to_string()),
                grid: Some(s.grid.clone()),
            }),
            critical: self.critical.as_ref().map(|c| CriticalSection {
                axis: Some(c.axis.name().to_string()),
                lo: Some(c.bracket.0),
                hi: Some(c.bracket.1),
                criterion: Some(criterion_name(c.criterion).to_string()),
                baseline_n: match c.criterion {
                    CriticalCriterion::MoreChargersWin { baseline_n } => Some(baseline_n),
                    CriticalCriterion::ExceedsInitial => None,
                },
                tolerance: Some(c.tolerance),
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        self.to_partial().to_toml()
    }

    /// Integrator settings for the base model with defaults filled in.
    pub fn resolved_integrator(&self) -> IntegratorConfig {
        self.integrator.resolve(&self.spec)
    }

    /// `key = value` lines describing every setting, defaults included.
    pub fn header(&self) -> Vec<String> {
        let cfg = self.resolved_integrator();
        let tag = |given: bool| if given { "" } else { " (default)" };
        let mut lines = vec![
            format!("qbcharge {}", env!("CARGO_PKG_VERSION")),
            format!("mode = {}", self.mode.name()),
            format!("model.n = {}", self.spec.n_chargers),
            format!("model.m = {}", self.spec.m_cells),
            format!("model.R = {}", self.spec.r()),
            format!("model.ncut = {}", self.spec.ncut),
            format!("model.omega0 = {}", self.spec.omega0),
            format!("model.lambda = {}", self.spec.lambda),
            format!("scenario = {:?}", self.scenario),
            format!("integrator.dt = {}{}", cfg.dt, tag(self.integrator.dt.is_some())),
            format!("integrator.t_max = {}{}", cfg.t_max, tag(self.integrator.t_max.is_some())),
            format!("integrator.record_stride = {}", cfg.record_stride),
        ];
        if self.sweep.is_some() || self.critical.is_some() {
            lines.push("integrator defaults are re-resolved at each sweep point".into());
        }
        if let Some(s) = &self.sweep {
            lines.push(format!("sweep.axis = {}", s.axis.name()));
            lines.push(format!("sweep.grid = {:?}", s.grid));
        }
        if let Some(c) = &self.critical {
            lines.push(format!("critical.axis = {}", c.axis.name()));
            lines.push(format!("critical.bracket = [{}, {}]", c.bracket.0, c.bracket.1));
            lines.push(format!("critical.criterion = {:?}", c.criterion));
            lines.push(format!("critical.tolerance = {}", c.tolerance));
        }
        let threads = std::env::var(analysis::THREADS_ENV).unwrap_or_else(|_| "auto".into());
        lines.push(format!("threads = {threads}"));
        if let Some(out) = &self.output {
            lines.push(format!("output = {}", out.display()));
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
mode = "report"

[model]
n = 1
m = 1
R = 20.0

[scenario]
kind = "scenario-i"
c = [1.0]
"#;

    #[test]
    fn parses_basic_config() {
        let cfg = RunConfig::parse_toml(BASIC).unwrap();
        assert_eq!(cfg.mode, Mode::Report);
        assert_eq!(cfg.spec.ncut, 2);
        assert!((cfg.spec.r() - 20.0).abs() < 1e-12);
        assert_eq!(cfg.scenario, Scenario::Product { c: vec![1.0] });
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASIC.replace("R = 20.0\n", "");
        match RunConfig::parse_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "model.R"),
            other => panic!("unexpected {other:?}"),
        }
        let text = BASIC.replace("kind = \"scenario-i\"\n", "");
        match RunConfig::parse_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "scenario.kind"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = BASIC.replace("m = 1", "m = 1\nRR = 3.0");
        match RunConfig::parse_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "RR"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn range_violation_names_key() {
        let text = BASIC.replace("c = [1.0]", "c = [1.5]");
        match RunConfig::parse_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "scenario.c"),
            other => panic!("unexpected {other:?}"),
        }
        let text = BASIC.replace("R = 20.0", "R = -1.0");
        match RunConfig::parse_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "model.R"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scenario_change_drops_old_parameters() {
        let mut p = PartialConfig::from_toml(BASIC).unwrap();
        p.merge(PartialConfig {
            scenario: ScenarioSection {
                kind: Some("scenario-ii".into()),
                e1: Some(0.4),
                ..Default::default()
            },
            ..Default::default()
        });
        let cfg = RunConfig::from_partial(&p).unwrap();
        assert_eq!(cfg.scenario, Scenario::Residual { e1: 0.4 });
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::parse_toml(BASIC).unwrap();
        assert_eq!(RunConfig::parse_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
