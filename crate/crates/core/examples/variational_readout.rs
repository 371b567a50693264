//! Reading out at the frequency-dependent angle removes radiation pressure
//! from the estimate: the noise is flat at the shot-noise level.

use qlock::elements::Gain;
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    let sc = scenarios::variational_readout(&setup)?;
    for w in [0.1, 0.5, 1.0, 5.0] {
        println!("omega={w:<4} sigma={:.9}", sigma_at(&sc, w, Gain::Off)?);
    }
    println!("expected {:.9}", scenarios::variational_sigma(&setup));
    Ok(())
}
