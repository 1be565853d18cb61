//! Named run configurations, one per figure reproduction.

use crate::config::PartialConfig;
use crate::error::{Error, Result};

const R_GRID: &str = "[0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 50.0, 100.0]";
const UNIT_GRID: &str =
    "[0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]";
const E1_GRID: &str =
    "[0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]";

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    body: fn() -> String,
}

impl Preset {
    pub fn toml(&self) -> String {
        (self.body)()
    }

    pub fn partial(&self) -> Result<PartialConfig> {
        PartialConfig::from_toml(&self.toml())
    }
}

fn model(n: usize, m: usize, r: f64) -> String {
    format!("[model]\nn = {n}\nm = {m}\nR = {r:?}\n")
}

fn sweep(axis: &str, grid: &str) -> String {
    format!("[sweep]\naxis = \"{axis}\"\ngrid = {grid}\n")
}

fn product() -> String {
    "[scenario]\nkind = \"scenario-i\"\nc1 = 1.0\n".into()
}

fn residual(e1: f64) -> String {
    format!("[scenario]\nkind = \"scenario-ii\"\ne1 = {e1:?}\n")
}

fn scenario_kind(kind: &str) -> String {
    format!("[scenario]\nkind = \"{kind}\"\n")
}

fn join(mode: &str, parts: &[String]) -> String {
    let mut text = format!("mode = \"{mode}\"\n");
    for part in parts {
        text.push('\n');
        text.push_str(part);
    }
    text
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2-left",
        summary: "one charger, R = 20, product charger, trajectories over c1",
        body: || join("trajectory", &[model(1, 1, 20.0), scenario_kind("scenario-i"), sweep("c1", "[0.4, 0.6, 0.8, 1.0]")]),
    },
    Preset {
        name: "fig2-right",
        summary: "one charger, R = 20, active battery, trajectories over e1",
        body: || join("trajectory", &[model(1, 1, 20.0), scenario_kind("scenario-ii"), sweep("e1", "[0.0, 0.3, 0.6, 0.9]")]),
    },
    Preset {
        name: "fig3-left",
        summary: "one charger, R = 0.1, product charger, trajectories over c1",
        body: || join("trajectory", &[model(1, 1, 0.1), scenario_kind("scenario-i"), sweep("c1", "[0.4, 0.6, 0.8, 1.0]")]),
    },
    Preset {
        name: "fig3-right",
        summary: "one charger, R = 0.1, active battery, trajectories over e1",
        body: || join("trajectory", &[model(1, 1, 0.1), scenario_kind("scenario-ii"), sweep("e1", "[0.0, 0.3, 0.6, 0.9]")]),
    },
    Preset {
        name: "fig4",
        summary: "one charger, excited, charging time and ergotropy over R",
        body: || join("sweep", &[model(1, 1, 1.0), product(), sweep("R", R_GRID)]),
    },
    Preset {
        name: "fig4-right",
        summary: "one charger, active battery e1 = 0.5, charging time and ergotropy over R",
        body: || join("sweep", &[model(1, 1, 1.0), residual(0.5), sweep("R", R_GRID)]),
    },
    Preset {
        name: "fig5",
        summary: "one charger, R = 20, charged ergotropy split over c1",
        body: || join("sweep", &[model(1, 1, 20.0), scenario_kind("scenario-i"), sweep("c1", UNIT_GRID)]),
    },
    Preset {
        name: "fig6",
        summary: "one charger, R = 20, charged ergotropy split over e1",
        body: || join("sweep", &[model(1, 1, 20.0), scenario_kind("scenario-ii"), sweep("e1", E1_GRID)]),
    },
    Preset {
        name: "fig7-left",
        summary: "two chargers, R = 20, product chargers, trajectories over c1",
        body: || join("trajectory", &[model(2, 1, 20.0), scenario_kind("scenario-i"), sweep("c1", "[0.4, 0.6, 0.8, 1.0]")]),
    },
    Preset {
        name: "fig7-right",
        summary: "two chargers, R = 20, active battery, trajectories over e1",
        body: || join("trajectory", &[model(2, 1, 20.0), scenario_kind("scenario-ii"), sweep("e1", "[0.0, 0.3, 0.6, 0.9]")]),
    },
    Preset {
        name: "fig8",
        summary: "two excited chargers, charging time and ergotropy over R",
        body: || join("sweep", &[model(2, 1, 1.0), product(), sweep("R", R_GRID)]),
    },
    Preset {
        name: "fig9",
        summary: "two chargers in Psi+, R = 20, charged ergotropy over c1",
        body: || join("sweep", &[model(2, 1, 20.0), scenario_kind("bell-psi-plus"), sweep("c1", UNIT_GRID)]),
    },
    Preset {
        name: "fig9-product",
        summary: "two product chargers c1 = c2, R = 20, charged ergotropy over c1",
        body: || join("sweep", &[model(2, 1, 20.0), scenario_kind("scenario-i"), sweep("c1", UNIT_GRID)]),
    },
    Preset {
        name: "fig10",
        summary: "two excited chargers, empty battery, charged ergotropy over R",
        body: || join("sweep", &[model(2, 1, 1.0), residual(0.0), sweep("R", R_GRID)]),
    },
    Preset {
        name: "fig11",
        summary: "two excited chargers, efficiencies over R",
        body: || join("sweep", &[model(2, 1, 1.0), product(), sweep("R", R_GRID)]),
    },
    Preset {
        name: "fig12",
        summary: "one charger c1 = 0.8, R = 20, charging over the cell count",
        body: || {
            join(
                "sweep",
                &[model(1, 1, 20.0), "[scenario]\nkind = \"scenario-i\"\nc1 = 0.8\n".into(), sweep("m", "[1.0, 2.0, 3.0, 4.0]")],
            )
        },
    },
    Preset {
        name: "threshold-e1",
        summary: "one charger, R = 20, largest e1 the charger can still improve",
        body: || {
            join(
                "critical",
                &[
                    model(1, 1, 20.0),
                    scenario_kind("scenario-ii"),
                    "[critical]\naxis = \"e1\"\nlo = 0.001\nhi = 0.999\ncriterion = \"exceeds-initial\"\n".into(),
                ],
            )
        },
    },
    Preset {
        name: "crossover-n",
        summary: "excited chargers, largest R where two chargers beat one",
        body: || {
            join(
                "critical",
                &[
                    model(2, 1, 10.0),
                    product(),
                    "[critical]\naxis = \"R\"\nlo = 5.0\nhi = 15.0\ncriterion = \"more-chargers\"\nbaseline_n = 1\n".into(),
                ],
            )
        },
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::config("preset", format!("unknown preset `{name}` (one of {})", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::SweepAxis;
    use crate::config::{Mode, RunConfig};
    use crate::model::Scenario;

    #[test]
    fn every_preset_validates() {
        for preset in PRESETS {
            let cfg = RunConfig::from_partial(&preset.partial().unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", preset.name));
            assert_eq!(RunConfig::parse_toml(&cfg.to_toml()).unwrap(), cfg, "{}", preset.name);
        }
    }

    #[test]
    fn fig2_left() {
        let cfg = RunConfig::from_partial(&find("fig2-left").unwrap().partial().unwrap()).unwrap();
        assert_eq!((cfg.spec.n_chargers, cfg.spec.m_cells), (1, 1));
        assert!((cfg.spec.r() - 20.0).abs() < 1e-15);
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.axis, SweepAxis::C1);
        assert_eq!(sweep.grid, vec![0.4, 0.6, 0.8, 1.0]);
        assert!(matches!(cfg.scenario, Scenario::Product { .. }));
    }

    #[test]
    fn fig4_grid() {
        let cfg = RunConfig::from_partial(&find("fig4").unwrap().partial().unwrap()).unwrap();
        assert_eq!(cfg.mode, Mode::Sweep);
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.axis, SweepAxis::R);
        assert_eq!(&sweep.grid[..5], &[0.1, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn unknown_preset() {
        assert!(find("fig99").is_err());
    }
}
