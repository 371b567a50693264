use std::path::PathBuf;

use clap::Parser;

use super::config::{parse_config, Format, RunConfig, ScenarioParams};
use super::emit::{emit_csv, emit_json, write_output};
use super::{run, verify};
use crate::error::{Error, Result};
use crate::network::GridSpec;
use crate::scenarios::ScenarioId;
use crate::specalg::Units;

/// Quantum noise budgets for interferometers with locked mirrors.
#[derive(Debug, Parser)]
#[command(name = "qlock", version, about)]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario id to run; repeatable. Replaces the scenarios of --config.
    #[arg(long = "scenario", value_name = "ID")]
    pub scenarios: Vec<String>,
    /// Built-in run; `fig3` is the sensitivity-figure curve set.
    #[arg(long)]
    pub preset: Option<String>,
    /// Frequency grid `min:max:n[:log]`.
    #[arg(long)]
    pub grid: Option<String>,
    /// `si` or `normalized`.
    #[arg(long)]
    pub units: Option<String>,
    /// `off`, `fixed=<re>,<im>`, `infinite` or `optimized`.
    #[arg(long)]
    pub gain: Option<String>,
    /// `phase`, `fixed=<rad>`, `evading`, `evading-cavity` or `optimal`.
    #[arg(long)]
    pub angle: Option<String>,
    /// Sensor output loss in [0, 1).
    #[arg(long)]
    pub loss: Option<f64>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check optimized gains against the grid-search oracle.
    #[arg(long)]
    pub verify: bool,
    /// Interferometer coupling for --scenario runs.
    #[arg(long = "xi-a")]
    pub xi_a: Option<f64>,
    /// Sensor coupling for --scenario runs; defaults to xi_a.
    #[arg(long = "xi-b")]
    pub xi_b: Option<f64>,
}

impl Args {
    /// Merges the configuration file, preset and flags.
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, self.preset.as_deref()) {
            (Some(_), Some(_)) => return Err(Error::config("--config and --preset are exclusive")),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config(&text)?
            }
            (None, Some("fig3")) => RunConfig::fig3(),
            (None, Some(other)) => {
                return Err(Error::config_key(None, "preset", format!("unknown preset `{other}`")))
            }
            (None, None) => RunConfig::default(),
        };

        if let Some(u) = &self.units {
            let units: Units = u.parse()?;
            config.units = units;
            config.grid.units = units;
        }
        if let Some(g) = &self.grid {
            config.grid = GridSpec::parse(g, config.units)?;
        }
        if let Some(f) = &self.format {
            config.format = f.parse::<Format>()?;
        }
        if self.out.is_some() {
            config.out = self.out.clone();
        }
        config.verify |= self.verify;

        if !self.scenarios.is_empty() {
            config.scenarios = self
                .scenarios
                .iter()
                .map(|s| {
                    let id: ScenarioId = s.parse()?;
                    // sensor coupling defaults to the interferometer's
                    let xi_b = if id.uses_sensor() {
                        self.xi_b.or(self.xi_a).or(match config.units {
                            Units::Normalized => Some(std::f64::consts::FRAC_1_SQRT_2),
                            Units::Si => None,
                        })
                    } else {
                        None
                    };
                    Ok((
                        id.name().to_owned(),
                        ScenarioParams {
                            id: Some(id),
                            xi_a: self.xi_a,
                            xi_b,
                            ..ScenarioParams::default()
                        },
                    ))
                })
                .collect::<Result<_>>()?;
        } else if self.xi_a.is_some() || self.xi_b.is_some() {
            return Err(Error::config("--xi-a and --xi-b apply to --scenario runs"));
        }

        for (_, p) in &mut config.scenarios {
            let id = p.id.ok_or_else(|| Error::config_key(None, "id", "missing scenario id"))?;
            if id.uses_sensor() {
                if self.gain.is_some() && id != ScenarioId::SignalCorrection {
                    p.gain = self.gain.clone();
                }
                if self.loss.is_some() {
                    p.loss = self.loss;
                }
            }
            if self.angle.is_some() && id != ScenarioId::SqlEnvelope {
                p.angle = self.angle.clone();
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(args: &Args) -> Result<()> {
    let config = args.to_config()?;
    let budgets = run(&config)?;
    if config.verify {
        for c in verify(&config, &budgets, 20)? {
            eprintln!(
                "verify {} omega={:.6e} eigen={:.9e} grid={:.9e} gap={:+.2e}{}",
                c.scenario,
                c.omega,
                c.sigma_eigen,
                c.sigma_grid,
                c.relative_gap(),
                if c.on_boundary { " (boundary)" } else { "" }
            );
        }
    }
    let text = match config.format {
        Format::Csv => emit_csv(&budgets)?,
        Format::Json => emit_json(&budgets)?,
    };
    write_output(config.out.as_deref(), &text)
}

/// Entry point of the binary. Returns the process exit code.
pub fn main_with_args(args: &Args) -> i32 {
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qlock: {e}");
            e.exit_code()
        }
    }
}
