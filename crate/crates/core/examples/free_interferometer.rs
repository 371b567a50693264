//! Noise of a single cavity with a free end mirror, split into shot noise
//! (phase quadrature a90) and radiation pressure (amplitude quadrature a0).
//!
//! ```
//! cargo run --example free_interferometer
//! ```

use qlock::network::{budget, GridSpec};
use qlock::scenarios::{self, Setup};
use qlock::specalg::SourceId;

fn main() -> qlock::Result<()> {
    let grid = GridSpec::parse("0.1:10:9:log", qlock::Units::Normalized)?.frequencies()?;
    let b = budget(&scenarios::free(&Setup::normalized(1.0))?, &grid)?;

    println!("{:>8} {:>12} {:>12} {:>12}", "omega", "total", "shot", "radiation");
    for (i, w) in b.omega.iter().enumerate() {
        let shot = b.per_source[&SourceId::A90][i];
        let rp = b.per_source[&SourceId::A0][i];
        println!("{w:>8.4} {:>12.5e} {shot:>12.5e} {rp:>12.5e}", b.total[i]);
    }
    Ok(())
}
