//! Writes the sensitivity-figure curve set as CSV, like `qlock --preset fig3`.
//!
//! ```
//! cargo run --release --example figure3_csv > fig3.csv
//! ```

use qlock::cli::{emit_csv, run, RunConfig};

fn main() -> qlock::Result<()> {
    let budgets = run(&RunConfig::fig3())?;
    print!("{}", emit_csv(&budgets)?);
    Ok(())
}
