//! Configuration, sweeps and output for the `qlock` binary.

mod args;
pub mod config;
pub mod emit;

use num_complex::Complex64;

pub use args::{main_with_args, Args};
pub use config::{build_scenario, parse_config, Format, RunConfig, ScenarioParams};
pub use emit::{emit_csv, emit_json, parse_json, write_output, BudgetDocument};

use crate::elements::Gain;
use crate::error::{Error, Result};
use crate::network::{budget, NoiseBudget};
use crate::optimizer::{refine_oracle, GainRegion};
use crate::scenarios::Scenario;
use crate::specalg::Units;

/// Runs every scenario of `config` over its grid, in order.
pub fn run(config: &RunConfig) -> Result<Vec<NoiseBudget>> {
    if config.scenarios.is_empty() {
        return Err(Error::config("no scenarios"));
    }
    let grid = config.grid.frequencies()?;
    config
        .build_scenarios()?
        .iter()
        .map(|sc| budget(sc, &grid))
        .collect()
}

/// Eigen solution compared with the grid oracle at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub scenario: String,
    pub omega: f64,
    pub sigma_eigen: f64,
    pub sigma_grid: f64,
    pub on_boundary: bool,
}

impl OracleCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.sigma_grid - self.sigma_eigen) / self.sigma_eigen
    }
}

/// Points per axis of the verification grid.
pub const ORACLE_POINTS: usize = 201;

/// Re-derives optimized gains with the grid oracle at up to `samples`
/// frequencies per optimized budget. Fails when an eigen solution is more
/// than 0.1% away from the oracle.
pub fn verify(config: &RunConfig, budgets: &[NoiseBudget], samples: usize) -> Result<Vec<OracleCheck>> {
    let scenarios: Vec<Scenario> = config.build_scenarios()?;
    let mut checks = Vec::new();
    for (sc, b) in scenarios.iter().zip(budgets) {
        let Some(gains) = &b.gain else { continue };
        let n = b.omega.len();
        let stride = n.div_ceil(samples.max(1)).max(1);
        for i in (0..n).step_by(stride) {
            let omega = match b.units {
                Units::Si => b.omega[i],
                Units::Normalized => b.omega[i] * sc.omega_sql_a(),
            };
            let reference = match gains[i] {
                Gain::Finite(g) => Some(g),
                Gain::Off => Some(Complex64::default()),
                Gain::Infinite => None,
            };
            let region = GainRegion::around(sc, omega, reference);
            let grid = refine_oracle(sc, omega, region, ORACLE_POINTS, 3)?;
            let scale = b.total[i] / crate::network::sigma_at(sc, omega, gains[i])?;
            let check = OracleCheck {
                scenario: b.name.clone(),
                omega: b.omega[i],
                sigma_eigen: b.total[i],
                sigma_grid: grid.sigma_opt * scale,
                on_boundary: grid.on_boundary,
            };
            if check.relative_gap().abs() > 1e-3 {
                return Err(Error::Numeric {
                    omega,
                    detail: format!(
                        "`{}`: eigen optimum {:e} disagrees with grid oracle {:e}",
                        b.name, check.sigma_eigen, check.sigma_grid
                    ),
                });
            }
            checks.push(check);
        }
    }
    Ok(checks)
}
