//! Locks the end mirror on a reference mirror watched by a weaker sensor
//! cavity, and compares gain settings at a few frequencies.

use num_complex::Complex64;
use qlock::elements::{Gain, GainMode};
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(0.2);
    let sc = scenarios::locking(&setup, GainMode::Infinite)?;
    let gains = [
        ("off", Gain::Off),
        ("g=10", Gain::Finite(Complex64::new(10.0, 0.0))),
        ("infinite", Gain::Infinite),
    ];
    for w in [0.1, 1.0, 10.0] {
        print!("omega={w:<5}");
        for (label, g) in gains {
            print!(" {label}={:.5e}", sigma_at(&sc, w, g)?);
        }
        println!(" free={:.5e}", scenarios::free_sigma(&setup, w, 0.0));
    }
    Ok(())
}
