//! Whole-cavity locking: the sensor estimate of the end mirror drives the
//! input mirror, with the sensor read out at its evading angle.

use qlock::network::{budget, GridSpec};
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    let grid = GridSpec::parse("0.1:10:5:log", qlock::Units::Normalized)?.frequencies()?;
    let b = budget(&scenarios::cavity_locking(&setup)?, &grid)?;
    for (w, s) in b.omega.iter().zip(&b.total) {
        println!("omega={w:<8.4} sigma={s:.9}");
    }
    println!("expected {:.9}", scenarios::cavity_locking_sigma(&setup));
    Ok(())
}
