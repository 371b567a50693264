//! Subtracting the sensor estimate from the interferometer signal gives the
//! same noise as actuating the mirror.

use qlock::elements::Gain;
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    let actuated = scenarios::cavity_locking(&setup)?;
    let k = scenarios::equivalent_correction_gain(&actuated);
    let corrected = scenarios::signal_correction(&actuated, k)?;
    for w in [0.2, 1.0, 4.0] {
        let gain = actuated.control.and_then(|c| c.resolved()).unwrap_or(Gain::Off);
        let a = sigma_at(&actuated, w, gain)?;
        let c = scenarios::signal_correction_sigma(&corrected, w)?;
        println!("omega={w:<4} actuated={a:.12} corrected={c:.12}");
    }
    Ok(())
}
