use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qbcharge::config::{CriticalSection, PartialConfig, RunConfig, SweepSection};
use qbcharge::error::{Error, Result};
use qbcharge::{presets, runner};

/// Wireless charging of a qubit quantum battery through a lossy pseudomode.
#[derive(Parser, Debug)]
#[command(name = "qbcharge", version)]
struct Cli {
    /// Named preset; see --list-presets
    #[arg(long)]
    preset: Option<String>,
    /// TOML config file, applied over the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// trajectory, report, sweep or critical
    #[arg(long)]
    mode: Option<String>,
    /// scenario-i, scenario-ii, bell-psi-plus, bell-psi-minus, bell-phi-plus,
    /// bell-phi-minus, mixed-charger, mixed-battery
    #[arg(long)]
    scenario: Option<String>,
    /// Number of chargers
    #[arg(long)]
    n: Option<usize>,
    /// Number of battery cells
    #[arg(long)]
    m: Option<usize>,
    /// Coupling ratio sqrt(2) Omega / lambda
    #[arg(long = "R")]
    r: Option<f64>,
    /// Pseudomode truncation (highest Fock state)
    #[arg(long)]
    ncut: Option<usize>,
    /// Charger excitation weight; repeat for per-charger values
    #[arg(long = "c")]
    c: Vec<f64>,
    /// Initial excited weight of the first cell
    #[arg(long)]
    e1: Option<f64>,
    /// Horizon lambda t_max
    #[arg(long)]
    tmax: Option<f64>,
    /// Step lambda dt
    #[arg(long)]
    dt: Option<f64>,
    /// Record every k-th step
    #[arg(long)]
    stride: Option<usize>,
    /// R, c1, e1, n or m
    #[arg(long)]
    sweep_axis: Option<String>,
    /// Comma-separated increasing values
    #[arg(long, value_delimiter = ',')]
    sweep_grid: Option<Vec<f64>>,
    /// Bisection bracket `lo,hi` for mode critical
    #[arg(long, value_delimiter = ',', num_args = 1)]
    bracket: Option<Vec<f64>>,
    /// Output CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    list_presets: bool,
}

impl Cli {
    fn overrides(&self) -> Result<PartialConfig> {
        let mut p = PartialConfig {
            mode: self.mode.clone(),
            output: self.out.as_ref().map(|p| p.display().to_string()),
            ..Default::default()
        };
        p.model.n = self.n;
        p.model.m = self.m;
        p.model.r = self.r;
        p.model.ncut = self.ncut;
        p.scenario.kind = self.scenario.clone();
        p.scenario.e1 = self.e1;
        p.integrator.dt = self.dt;
        p.integrator.t_max = self.tmax;
        p.integrator.record_stride = self.stride;
        if self.sweep_axis.is_some() || self.sweep_grid.is_some() {
            p.sweep = Some(SweepSection {
                axis: self.sweep_axis.clone(),
                grid: self.sweep_grid.clone(),
            });
        }
        if let Some(b) = &self.bracket {
            let [lo, hi] = b[..] else {
                return Err(Error::config("critical.bracket", "expected `lo,hi`"));
            };
            p.critical = Some(CriticalSection {
                lo: Some(lo),
                hi: Some(hi),
                ..Default::default()
            });
        }
        Ok(p)
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut layers = match &cli.preset {
        Some(name) => presets::find(name)?.partial()?,
        None => PartialConfig::default(),
    };
    if let Some(path) = &cli.config {
        layers.merge(PartialConfig::from_file(path)?);
    }
    layers.merge(cli.overrides()?);
    match cli.c.len() {
        0 => {}
        1 => {
            layers.scenario.c = None;
            layers.scenario.c1 = Some(cli.c[0]);
        }
        _ => {
            layers.scenario.c = Some(cli.c.clone());
            layers.scenario.c1 = None;
        }
    }
    RunConfig::from_partial(&layers)
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        "config" => 2,
        "validation" => 3,
        "io" => 4,
        "numerics" => 5,
        "integration" => 6,
        _ => 7,
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.list_presets {
        for p in presets::PRESETS {
            println!("{:<14} {}", p.name, p.summary);
        }
        return Ok(());
    }
    let cfg = build_config(cli)?;
    for line in cfg.header() {
        eprintln!("# {line}");
    }
    let result = runner::execute(&cfg)?;
    for line in runner::summary(&result) {
        eprintln!("{line}");
    }
    let mut stdout = std::io::stdout().lock();
    for path in runner::emit(&cfg, &result, &mut stdout)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
