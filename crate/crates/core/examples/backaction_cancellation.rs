//! Evading readout of the sensor cancels the sensor's own back-action, so
//! infinite-gain locking leaves only the two shot-noise terms.

use qlock::elements::{Gain, GainMode};
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    let sc = scenarios::backaction_cancel(&setup, GainMode::Infinite, 0.0)?;
    for w in [0.01, 0.1, 1.0, 10.0] {
        println!("omega={w:<5} sigma={:.9}", sigma_at(&sc, w, Gain::Infinite)?);
    }
    println!("expected {:.9}", scenarios::backaction_cancel_sigma(&setup));
    Ok(())
}
