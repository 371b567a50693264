//! Per-frequency optimal feedback gain, cross-checked against a brute-force
//! search over a grid of complex gains.

use qlock::elements::GainMode;
use qlock::optimizer::{grid_search_oracle, optimize_gain, GainRegion};
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let sc = scenarios::locking(&Setup::normalized(0.2), GainMode::Optimized)?;
    for w in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let best = optimize_gain(&sc, w)?;
        let region = GainRegion::around(&sc, w, best.gain_value());
        let grid = grid_search_oracle(&sc, w, region, 101)?;
        println!(
            "omega={w:<4} gain={:<24} sigma={:.6e} grid={:.6e}{}",
            best.gain_value().map_or("infinite".to_owned(), |g| format!("{:.4e}{:+.4e}i", g.re, g.im)),
            best.sigma_opt,
            grid.sigma_opt,
            if grid.on_boundary { " (grid edge)" } else { "" }
        );
    }
    Ok(())
}
