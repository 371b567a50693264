//! Frequency-dependent squeezing at the interferometer input, compared with
//! the closed form `e^{-2r} (1 + cot^2 theta) / (4 xi_a^2)`.

use qlock::elements::Gain;
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup, SqueezeAngle};

fn main() -> qlock::Result<()> {
    let setup = Setup::normalized(1.0);
    let r = 1.0; // about 8.7 dB
    let sc = scenarios::squeezed_input(&setup, r, SqueezeAngle::Tracking)?;
    for w in [0.3, 1.0, 3.0] {
        let net = sigma_at(&sc, w, Gain::Off)?;
        let closed = scenarios::squeezed_input_sigma(&setup, w, r);
        let free = scenarios::free_sigma(&setup, w, 0.0);
        println!("omega={w:<4} squeezed={net:.6} closed={closed:.6} free={free:.6}");
    }
    Ok(())
}
