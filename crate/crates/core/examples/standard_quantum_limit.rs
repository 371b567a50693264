//! The free-mirror noise touches the SQL envelope at the frequency set by the
//! coupling. Sweeping the coupling moves the tangent point.

use qlock::elements::Gain;
use qlock::network::sigma_at;
use qlock::scenarios::{self, Setup};

fn main() -> qlock::Result<()> {
    let omega = 1.0;
    println!("{:>8} {:>12} {:>12}", "xi_a", "sigma", "sigma/sql");
    for k in -4..=4 {
        let mut setup = Setup::normalized(1.0);
        setup.xi_a *= 2f64.powf(k as f64 / 2.0);
        let sigma = sigma_at(&scenarios::free(&setup)?, omega, Gain::Off)?;
        let sql = scenarios::sql_envelope(&setup, omega);
        println!("{:>8.4} {sigma:>12.5e} {:>12.6}", setup.xi_a, sigma / sql);
    }
    Ok(())
}
