//! CSV and JSON output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elements::Gain;
use crate::error::{Error, Result};
use crate::network::NoiseBudget;
use crate::specalg::Units;

/// Version string recorded in JSON output.
pub fn generator() -> String {
    format!("qlock {}", env!("CARGO_PKG_VERSION"))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn gain_parts(g: &Gain) -> (f64, f64) {
    match g {
        Gain::Off => (0.0, 0.0),
        Gain::Finite(z) => (z.re, z.im),
        Gain::Infinite => (f64::INFINITY, f64::INFINITY),
    }
}

fn shared_grid(budgets: &[NoiseBudget]) -> Result<&[f64]> {
    let first = budgets.first().ok_or_else(|| Error::config("no scenarios"))?;
    for b in &budgets[1..] {
        if b.units != first.units || b.omega != first.omega {
            return Err(Error::config(format!(
                "budgets `{}` and `{}` are on different frequency grids",
                first.name, b.name
            )));
        }
    }
    Ok(&first.omega)
}

/// One row per frequency: `omega`, every total, then `<name>_<source>` and
/// `<name>_gain_re`/`<name>_gain_im` columns. 12 significant digits.
pub fn emit_csv(budgets: &[NoiseBudget]) -> Result<String> {
    let omega = shared_grid(budgets)?;
    let mut header = vec!["omega".to_owned()];
    header.extend(budgets.iter().map(|b| b.name.clone()));
    for b in budgets {
        header.extend(b.per_source.keys().map(|id| format!("{}_{}", b.name, id)));
    }
    for b in budgets.iter().filter(|b| b.gain.is_some()) {
        header.push(format!("{}_gain_re", b.name));
        header.push(format!("{}_gain_im", b.name));
    }

    let mut out = header.join(",");
    out.push('\n');
    for (i, w) in omega.iter().enumerate() {
        let mut row = vec![num(*w)];
        row.extend(budgets.iter().map(|b| num(b.total[i])));
        for b in budgets {
            row.extend(b.per_source.values().map(|v| num(v[i])));
        }
        for b in budgets {
            if let Some(g) = &b.gain {
                let (re, im) = gain_parts(&g[i]);
                row.push(num(re));
                row.push(num(im));
            }
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    Ok(out)
}

/// JSON document: the budgets with their parameters, full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetDocument {
    pub generator: String,
    pub units: Units,
    pub budgets: Vec<NoiseBudget>,
}

pub fn emit_json(budgets: &[NoiseBudget]) -> Result<String> {
    shared_grid(budgets)?;
    let doc = BudgetDocument {
        generator: generator(),
        units: budgets[0].units,
        budgets: budgets.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<BudgetDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Writes to `path`, or to stdout when there is none.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, content).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(content.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::budget;
    use crate::scenarios::{self, Setup};
    use crate::specalg::AngularFrequency;

    fn grid3() -> Vec<AngularFrequency> {
        [0.5, 1.0, 2.0].iter().map(|w| AngularFrequency::normalized(*w).unwrap()).collect()
    }

    #[test]
    fn three_points_give_header_and_three_rows() {
        let b = budget(&scenarios::free(&Setup::normalized(1.0)).unwrap(), &grid3()).unwrap();
        let csv = emit_csv(&[b]).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "omega,free,free_a0,free_a90");
        assert_eq!(lines[2], "1.00000000000e0,1.00000000000e0,5.00000000000e-1,5.00000000000e-1");
    }

    #[test]
    fn json_round_trip() {
        let b = budget(&scenarios::free(&Setup::normalized(1.0)).unwrap(), &grid3()).unwrap();
        let doc = parse_json(&emit_json(&[b.clone()]).unwrap()).unwrap();
        assert_eq!(doc.budgets[0], b);
        assert!(doc.generator.starts_with("qlock "));
    }

    #[test]
    fn empty_budget_list() {
        assert!(emit_csv(&[]).unwrap_err().to_string().contains("no scenarios"));
    }

    #[test]
    fn unwritable_path_is_io() {
        let err = write_output(Some(Path::new("/nonexistent-dir/x.csv")), "x").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
