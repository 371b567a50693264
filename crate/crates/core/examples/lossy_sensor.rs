//! Sweeps the sensor output loss. Loss leaks vacuum into the sensor estimate
//! and spoils the cancellation most where the readout angle is small.

use qlock::elements::{Gain, GainMode};
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    println!("{:>6} {:>12} {:>12}", "loss", "omega=0.1", "omega=1");
    for loss in [0.0, 0.001, 0.01, 0.05, 0.1] {
        let sc = scenarios::backaction_cancel(&setup, GainMode::Infinite, loss)?;
        let low = sigma_at(&sc, 0.1, Gain::Infinite)?;
        let mid = sigma_at(&sc, 1.0, Gain::Infinite)?;
        println!("{loss:>6} {low:>12.4} {mid:>12.4}");
    }
    Ok(())
}
