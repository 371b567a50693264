//! Sizes a high-finesse sensor cavity so that its coupling matches a
//! large-scale interferometer arm, and prints the laser power it needs.

use qlock::elements::{incident_power_for, Beam, FieldChannel};
use qlock::specalg::Constants;

fn main() -> qlock::Result<()> {
    let c = Constants::SI;
    let wavelength = 1.064e-6;
    let arm = FieldChannel::from_optics(Beam::Interferometer, wavelength, 600.0, 15e3, &c)?;

    // xi grows as sqrt(P F): 1e5 finesse needs 600/1e5 of the arm power
    let (finesse_b, power_b) = (1e5, 15e3 * 600.0 / 1e5);
    let sensor = FieldChannel::from_optics(Beam::Sensor, wavelength, finesse_b, power_b, &c)?;

    println!("arm    xi = {:.6e} m^-1 Hz^-1/2", arm.xi);
    println!("sensor xi = {:.6e} (ratio {:.9})", sensor.xi, sensor.xi / arm.xi);
    println!("sensor intracavity power {power_b} W");
    println!("incident power {:.4} mW", incident_power_for(power_b, finesse_b)? * 1e3);
    Ok(())
}
