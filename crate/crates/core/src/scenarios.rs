//! Measurement configurations and their closed-form noise spectra.
//!
//! Builders return a [`Scenario`] ready for the network solver; the
//! `*_sigma` functions give the same equivalent input noise analytically and
//! serve as oracles for the solver. Closed forms assume identical suspended
//! mirrors and neglect classical forces.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::{
    sql_frequency, Beam, ControlKind, ControlLaw, DetectionPolicy, DetectionRule, FieldChannel,
    Gain, GainMode, Impedance, MechanicalMode,
};
use crate::error::{Error, Result};
use crate::network;
use crate::specalg::{Constants, MirrorId, Units};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    Free,
    SqlEnvelope,
    SqueezedInput,
    VariationalReadout,
    Locking,
    BackactionCancel,
    CavityLocking,
    SignalCorrection,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 8] = [
        ScenarioId::Free,
        ScenarioId::SqlEnvelope,
        ScenarioId::SqueezedInput,
        ScenarioId::VariationalReadout,
        ScenarioId::Locking,
        ScenarioId::BackactionCancel,
        ScenarioId::CavityLocking,
        ScenarioId::SignalCorrection,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioId::Free => "free",
            ScenarioId::SqlEnvelope => "sql-envelope",
            ScenarioId::SqueezedInput => "squeezed-input",
            ScenarioId::VariationalReadout => "variational-readout",
            ScenarioId::Locking => "locking",
            ScenarioId::BackactionCancel => "backaction-cancel",
            ScenarioId::CavityLocking => "cavity-locking",
            ScenarioId::SignalCorrection => "signal-correction",
        }
    }

    /// Whether the configuration includes the sensor cavity.
    pub fn uses_sensor(&self) -> bool {
        matches!(
            self,
            ScenarioId::Locking
                | ScenarioId::BackactionCancel
                | ScenarioId::CavityLocking
                | ScenarioId::SignalCorrection
        )
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = ScenarioId::ALL.iter().map(|i| i.name()).collect();
                Error::config(format!(
                    "unknown scenario id `{s}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

/// Squeezed interferometer input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Squeezing {
    pub r: f64,
    pub angle: SqueezeAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezeAngle {
    /// Squeezes `a_{-theta}` with `cot theta = (Omega_a_SQL / Omega)^2`.
    Tracking,
    Fixed(f64),
}

/// Shared physical parameters for the built-in configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub constants: Constants,
    pub xi_a: f64,
    pub xi_b: f64,
    /// Mass of every mirror.
    pub mass: f64,
}

impl Setup {
    /// Natural units where `Omega_a_SQL = 1` and `1/(2 xi_a^2) = 1`.
    pub fn normalized(xi_b_over_xi_a: f64) -> Self {
        Self {
            constants: Constants::NATURAL,
            xi_a: FRAC_1_SQRT_2,
            xi_b: FRAC_1_SQRT_2 * xi_b_over_xi_a,
            mass: 1.0,
        }
    }

    pub fn omega_sql_a(&self) -> f64 {
        sql_frequency(self.xi_a, self.mass, &self.constants)
    }

    pub fn omega_sql_b(&self) -> f64 {
        sql_frequency(self.xi_b, self.mass, &self.constants)
    }

    /// Factor converting a spectrum to units of `1/(2 xi_a^2)`.
    pub fn sigma_scale(&self) -> f64 {
        2.0 * self.xi_a * self.xi_a
    }

    fn mirror(&self, id: MirrorId) -> Result<MechanicalMode> {
        MechanicalMode::suspended(id, self.mass)
    }
}

/// One measurement configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub id: ScenarioId,
    pub constants: Constants,
    pub interferometer: FieldChannel,
    pub sensor: Option<FieldChannel>,
    pub end: MechanicalMode,
    pub reference: Option<MechanicalMode>,
    pub input: Option<MechanicalMode>,
    pub control: Option<ControlLaw>,
    pub interferometer_readout: DetectionPolicy,
    pub sensor_readout: DetectionPolicy,
    /// Fractional power loss at the sensor output.
    pub sensor_loss: f64,
    pub squeezing: Option<Squeezing>,
}

impl Scenario {
    fn base(id: ScenarioId, setup: &Setup) -> Result<Self> {
        Ok(Self {
            name: id.name().to_owned(),
            id,
            constants: setup.constants,
            interferometer: FieldChannel::from_coupling(Beam::Interferometer, setup.xi_a)?,
            sensor: None,
            end: setup.mirror(MirrorId::End)?,
            reference: None,
            input: None,
            control: None,
            interferometer_readout: DetectionPolicy::new(DetectionRule::Phase, Beam::Interferometer),
            sensor_readout: DetectionPolicy::new(DetectionRule::Phase, Beam::Sensor),
            sensor_loss: 0.0,
            squeezing: None,
        })
    }

    fn with_sensor(mut self, setup: &Setup) -> Result<Self> {
        self.sensor = Some(FieldChannel::from_coupling(Beam::Sensor, setup.xi_b)?);
        self.reference = Some(setup.mirror(MirrorId::Reference)?);
        Ok(self)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn xi_a(&self) -> f64 {
        self.interferometer.xi
    }

    pub fn xi_b(&self) -> Option<f64> {
        self.sensor.as_ref().map(|s| s.xi)
    }

    pub fn omega_sql_a(&self) -> f64 {
        sql_frequency(self.interferometer.xi, self.end.mass, &self.constants)
    }

    /// Sensor SQL frequency, defined with the reference mirror mass.
    pub fn omega_sql_b(&self) -> Option<f64> {
        let sensor = self.sensor.as_ref()?;
        let mass = self.reference.as_ref().map_or(self.end.mass, |r| r.mass);
        Some(sql_frequency(sensor.xi, mass, &self.constants))
    }

    /// Factor converting a spectrum to units of `1/(2 xi_a^2)`.
    pub fn sigma_scale(&self) -> f64 {
        2.0 * self.interferometer.xi * self.interferometer.xi
    }

    pub fn mirrors(&self) -> impl Iterator<Item = &MechanicalMode> {
        std::iter::once(&self.end)
            .chain(self.reference.as_ref())
            .chain(self.input.as_ref())
    }

    pub fn mirror(&self, id: MirrorId) -> Option<&MechanicalMode> {
        self.mirrors().find(|m| m.mirror == id)
    }

    pub fn mirror_mut(&mut self, id: MirrorId) -> Option<&mut MechanicalMode> {
        match id {
            MirrorId::End => Some(&mut self.end),
            MirrorId::Reference => self.reference.as_mut(),
            MirrorId::Input => self.input.as_mut(),
        }
    }

    /// Whether every mirror is a suspended mass of equal weight, the
    /// condition under which the closed forms apply.
    pub fn has_identical_mirrors(&self) -> bool {
        self.mirrors()
            .all(|m| m.impedance == Impedance::Suspended && m.mass == self.end.mass)
    }

    /// Returns a copy with the control gain replaced.
    pub fn with_gain(&self, mode: GainMode) -> Self {
        let mut s = self.clone();
        if let Some(c) = s.control.as_mut() {
            c.mode = mode;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let err = |key: &str, msg: &str| Err(Error::config_key(Some(&self.name), key, msg));

        if self.interferometer.beam != Beam::Interferometer {
            return err("xi_a", "interferometer channel must carry beam a");
        }
        if !(self.interferometer.xi > 0.0) {
            return err("xi_a", "coupling must be > 0");
        }
        if let Some(s) = &self.sensor {
            if !(s.xi > 0.0) {
                return err("xi_b", "coupling must be > 0");
            }
            if self.reference.is_none() {
                return err("xi_b", "a sensor cavity needs a reference mirror");
            }
        }
        if self.end.mirror != MirrorId::End
            || self.reference.as_ref().is_some_and(|m| m.mirror != MirrorId::Reference)
            || self.input.as_ref().is_some_and(|m| m.mirror != MirrorId::Input)
        {
            return err("mass", "mirror slots hold the wrong mirrors");
        }
        for m in self.mirrors() {
            if !(m.mass > 0.0) {
                return err("mass", "mirror mass must be > 0");
            }
            if let Some(f) = &m.classical_force {
                f.spectrum
                    .validate()
                    .map_err(|e| Error::config_key(Some(&self.name), "force_noise", e.to_string()))?;
            }
        }
        if !(0.0..1.0).contains(&self.sensor_loss) {
            return err("loss", "loss must lie in [0, 1)");
        }
        if self.sensor_loss > 0.0 && self.sensor.is_none() {
            return err("loss", "loss applies to the sensor output but there is no sensor");
        }
        if let Some(sq) = &self.squeezing {
            if !(sq.r >= 0.0 && sq.r.is_finite()) {
                return err("squeeze_r", "squeeze parameter must be finite and >= 0");
            }
        }
        if self.interferometer_readout.rule.needs_sensor() {
            return err("angle", "sensor-based angle rule applied to the interferometer");
        }
        if let DetectionRule::Fixed(t) = self.interferometer_readout.rule {
            if t.sin().abs() < 1e-12 {
                return err("angle", "interferometer angle must have sin(theta) != 0");
            }
        }
        if let DetectionRule::Fixed(t) = self.sensor_readout.rule {
            if t.sin().abs() < 1e-12 {
                return err("angle", "sensor angle must have sin(theta) != 0");
            }
        }

        if let Some(control) = &self.control {
            if self.sensor.is_none() {
                return err("gain", "control requires a sensor channel (xi_b)");
            }
            match (control.kind, control.mode) {
                (ControlKind::FeedforwardToInput, _) if self.input.is_none() => {
                    return err("gain", "feedforward requires the input mirror");
                }
                (ControlKind::FeedforwardToInput | ControlKind::SignalSubtraction, GainMode::Infinite) => {
                    return err("gain", "infinite gain is only defined for feedback");
                }
                (ControlKind::SignalSubtraction, GainMode::Fixed(k)) if k.im != 0.0 => {
                    return err("correction_gain", "correction gain must be real");
                }
                _ => {}
            }
        }

        let needs = |cond: bool, key: &str, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::config_key(Some(&self.name), key, msg))
            }
        };
        match self.id {
            ScenarioId::Free | ScenarioId::SqlEnvelope | ScenarioId::VariationalReadout => {
                needs(self.sensor.is_none(), "xi_b", "this scenario has no sensor")?;
                needs(self.squeezing.is_none(), "squeeze_r", "use squeezed-input for squeezing")?;
            }
            ScenarioId::SqueezedInput => {
                needs(self.sensor.is_none(), "xi_b", "this scenario has no sensor")?;
                needs(self.squeezing.is_some(), "squeeze_r", "missing squeeze parameter")?;
            }
            ScenarioId::Locking | ScenarioId::BackactionCancel => {
                needs(self.sensor.is_some(), "xi_b", "missing sensor coupling")?;
                needs(
                    self.control.is_some_and(|c| c.kind == ControlKind::FeedbackToEnd),
                    "gain",
                    "requires feedback to the end mirror",
                )?;
            }
            ScenarioId::CavityLocking => {
                needs(self.sensor.is_some(), "xi_b", "missing sensor coupling")?;
                needs(self.input.is_some(), "mass", "requires three mirrors")?;
                needs(
                    self.sensor_readout.rule == DetectionRule::EvadingCavity,
                    "angle",
                    "requires the evading-cavity angle rule",
                )?;
                needs(
                    self.control.is_some_and(|c| c.kind == ControlKind::FeedforwardToInput),
                    "gain",
                    "requires feedforward to the input mirror",
                )?;
            }
            ScenarioId::SignalCorrection => {
                needs(self.sensor.is_some(), "xi_b", "missing sensor coupling")?;
                needs(
                    self.control.is_some_and(|c| c.kind == ControlKind::SignalSubtraction),
                    "correction_gain",
                    "requires signal subtraction",
                )?;
            }
        }
        Ok(())
    }
}

/// Single cavity with a free end mirror and phase readout.
pub fn free(setup: &Setup) -> Result<Scenario> {
    Scenario::base(ScenarioId::Free, setup)
}

/// Closed-form-only scenario: the SQL envelope.
pub fn sql(setup: &Setup) -> Result<Scenario> {
    Scenario::base(ScenarioId::SqlEnvelope, setup)
}

pub fn squeezed_input(setup: &Setup, r: f64, angle: SqueezeAngle) -> Result<Scenario> {
    let mut s = Scenario::base(ScenarioId::SqueezedInput, setup)?;
    s.squeezing = Some(Squeezing { r, angle });
    Ok(s)
}

/// Free cavity read out at the frequency-dependent angle that cancels back-action.
pub fn variational_readout(setup: &Setup) -> Result<Scenario> {
    let mut s = Scenario::base(ScenarioId::VariationalReadout, setup)?;
    s.interferometer_readout =
        DetectionPolicy::new(DetectionRule::InterferometerOptimal, Beam::Interferometer);
    Ok(s)
}

/// End mirror locked on the reference mirror through a phase-readout sensor.
pub fn locking(setup: &Setup, gain: GainMode) -> Result<Scenario> {
    let mut s = Scenario::base(ScenarioId::Locking, setup)?.with_sensor(setup)?;
    s.control = Some(ControlLaw::new(ControlKind::FeedbackToEnd, gain));
    Ok(s)
}

/// Locking with a back-action-evading sensor readout and optional sensor loss.
pub fn backaction_cancel(setup: &Setup, gain: GainMode, loss: f64) -> Result<Scenario> {
    let mut s = Scenario::base(ScenarioId::BackactionCancel, setup)?.with_sensor(setup)?;
    s.control = Some(ControlLaw::new(ControlKind::FeedbackToEnd, gain));
    s.sensor_readout = DetectionPolicy::new(DetectionRule::Evading, Beam::Sensor);
    s.sensor_loss = loss;
    Ok(s)
}

/// Feedforward gain that locks the input mirror on the end mirror.
pub const CAVITY_FEEDFORWARD_GAIN: f64 = 2.0;

/// Whole-cavity locking: the sensor's differential-motion estimate drives the input mirror.
pub fn cavity_locking(setup: &Setup) -> Result<Scenario> {
    let mut s = Scenario::base(ScenarioId::CavityLocking, setup)?.with_sensor(setup)?;
    s.input = Some(setup.mirror(MirrorId::Input)?);
    s.sensor_readout = DetectionPolicy::new(DetectionRule::EvadingCavity, Beam::Sensor);
    s.control = Some(ControlLaw::new(
        ControlKind::FeedforwardToInput,
        GainMode::Fixed(Complex64::new(CAVITY_FEEDFORWARD_GAIN, 0.0)),
    ));
    Ok(s)
}

/// Replaces the actuation of `base` by numerical subtraction of `gain` times
/// the sensor estimate from the interferometer output.
pub fn signal_correction(base: &Scenario, gain: f64) -> Result<Scenario> {
    if base.sensor.is_none() {
        return Err(Error::config_key(
            Some(&base.name),
            "base",
            "signal correction needs a scenario with a sensor",
        ));
    }
    let mut s = base.clone();
    s.id = ScenarioId::SignalCorrection;
    s.name = ScenarioId::SignalCorrection.name().to_owned();
    s.control = Some(ControlLaw::new(
        ControlKind::SignalSubtraction,
        GainMode::Fixed(Complex64::new(gain, 0.0)),
    ));
    Ok(s)
}

/// Subtraction gain equivalent to the actuation of `base`: the feedforward
/// gain for whole-cavity locking, 1 for infinite-gain feedback.
pub fn equivalent_correction_gain(base: &Scenario) -> f64 {
    match base.control.map(|c| (c.kind, c.mode)) {
        Some((ControlKind::FeedforwardToInput, GainMode::Fixed(g))) => g.re,
        _ => 1.0,
    }
}

/// `1/(4 xi_a^2) + (hbar^2 xi_a^2 + S_F) / (Omega^2 |Z_m|^2)` for a suspended mirror.
pub fn free_sigma(setup: &Setup, omega: f64, force_psd: f64) -> f64 {
    let hbar = setup.constants.hbar;
    let z2 = (omega * setup.mass).powi(2);
    1.0 / (4.0 * setup.xi_a.powi(2))
        + (hbar * hbar * setup.xi_a.powi(2) + force_psd) / (omega * omega * z2)
}

/// Minimum of [`free_sigma`] over `xi_a` at fixed frequency: `hbar / (M Omega^2)`.
pub fn sql_envelope(setup: &Setup, omega: f64) -> f64 {
    setup.constants.hbar / (setup.mass * omega * omega)
}

/// Frequency-tracking squeezed input: `e^{-2r} / (4 xi_a^2 sin^2 theta)`.
pub fn squeezed_input_sigma(setup: &Setup, omega: f64, r: f64) -> f64 {
    let cot = (setup.omega_sql_a() / omega).powi(2);
    (-2.0 * r).exp() * (1.0 + cot * cot) / (4.0 * setup.xi_a.powi(2))
}

/// Back-action-free variational readout: `1/(4 xi_a^2)` at every frequency.
pub fn variational_sigma(setup: &Setup) -> f64 {
    1.0 / (4.0 * setup.xi_a.powi(2))
}

/// Infinite-gain locking with phase readout of the sensor.
pub fn locking_sigma_inf(setup: &Setup, omega: f64) -> f64 {
    let hbar = setup.constants.hbar;
    let z2 = (omega * setup.mass).powi(2);
    1.0 / (4.0 * setup.xi_a.powi(2))
        + 1.0 / (4.0 * setup.xi_b.powi(2))
        + hbar * hbar * setup.xi_b.powi(2) / (omega * omega * z2)
}

/// Infinite-gain locking with back-action-evading sensor readout.
pub fn backaction_cancel_sigma(setup: &Setup) -> f64 {
    1.0 / (4.0 * setup.xi_a.powi(2)) + 1.0 / (4.0 * setup.xi_b.powi(2))
}

/// Whole-cavity locking: `1/(4 xi_a^2) + 1/xi_b^2`.
pub fn cavity_locking_sigma(setup: &Setup) -> f64 {
    1.0 / (4.0 * setup.xi_a.powi(2)) + 1.0 / setup.xi_b.powi(2)
}

/// Sensor angle for whole-cavity locking, `cot theta = 3/2 (Omega_b_SQL/Omega)^2`.
pub fn cavity_locking_angle(omega: f64, omega_sql_b: f64) -> f64 {
    1f64.atan2(1.5 * (omega_sql_b / omega).powi(2))
}

/// Equivalent input noise when the sensor estimate is subtracted numerically
/// instead of actuating a mirror.
pub fn signal_correction_sigma(scenario: &Scenario, omega: f64) -> Result<f64> {
    if scenario.control.map(|c| c.kind) != Some(ControlKind::SignalSubtraction) {
        return Err(Error::config_key(
            Some(&scenario.name),
            "correction_gain",
            "scenario does not use signal subtraction",
        ));
    }
    let gain = scenario
        .control
        .and_then(|c| c.resolved())
        .unwrap_or(Gain::Off);
    network::sigma_at(scenario, omega, gain)
}

/// Spectrum unit label for a run.
pub fn sigma_units_label(units: Units) -> &'static str {
    match units {
        Units::Si => "m^2/Hz",
        Units::Normalized => "1/(2 xi_a^2)",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn closed_form_spot_values() {
        let s = Setup::normalized(1.0);
        assert!(close(free_sigma(&s, 1.0, 0.0), 1.0, 1e-15));
        assert!(close(free_sigma(&s, 10.0, 0.0), 0.50005, 1e-13));
        assert!(close(free_sigma(&s, 0.1, 0.0), 5000.5, 1e-13));
        assert!(close(sql_envelope(&s, 1.0), 1.0, 1e-15));
        assert!(close(sql_envelope(&s, 0.1), 100.0, 1e-13));
        assert!(close(variational_sigma(&s), 0.5, 1e-15));
        assert!(close(backaction_cancel_sigma(&s), 1.0, 1e-15));
        assert!(close(cavity_locking_sigma(&s), 2.5, 1e-15));

        let two = Setup::normalized(2.0);
        assert!(close(cavity_locking_sigma(&two), 1.0, 1e-15));
        let five = Setup::normalized(5.0);
        assert!(close(backaction_cancel_sigma(&five), 0.52, 1e-14));

        let fifth = Setup::normalized(0.2);
        assert!(close(locking_sigma_inf(&fifth, 0.1), 213.0, 1e-12));
        // back-action ratio free / locked = (xi_a / xi_b)^2
        let ba_free = free_sigma(&fifth, 0.1, 0.0) - 0.5;
        let ba_lock = locking_sigma_inf(&fifth, 0.1) - 13.0;
        assert!(close(ba_free / ba_lock, 25.0, 1e-10));
    }

    #[test]
    fn cavity_locking_limit_is_interferometer_phase_noise() {
        let huge = Setup::normalized(1e6);
        assert!(close(cavity_locking_sigma(&huge), 0.5, 1e-11));
    }

    #[test]
    fn squeezing_identities() {
        let s = Setup::normalized(1.0);
        for w in [0.1, 0.5, 1.0, 3.0, 10.0] {
            assert!(close(squeezed_input_sigma(&s, w, 0.0), free_sigma(&s, w, 0.0), 1e-12));
        }
        let r = 10f64.sqrt().ln();
        assert!(close(squeezed_input_sigma(&s, 1.0, r), free_sigma(&s, 1.0, 0.0) / 10.0, 1e-12));
        assert!(squeezed_input_sigma(&s, 1.0, 40.0) < 1e-30);
    }

    #[test]
    fn sql_is_tangent_to_free_curve() {
        let s = Setup::normalized(1.0);
        // both equal and equal slope (-2 for sql) at Omega = Omega_SQL
        let h = 1e-6;
        let slope = |f: &dyn Fn(f64) -> f64| {
            ((f(1.0 + h)).ln() - (f(1.0 - h)).ln()) / ((1.0 + h).ln() - (1.0 - h).ln())
        };
        let s_free = slope(&|w| free_sigma(&s, w, 0.0));
        let s_sql = slope(&|w| sql_envelope(&s, w));
        assert!((s_free - s_sql).abs() < 1e-6);
        assert!((s_sql + 2.0).abs() < 1e-6);
    }

    #[test]
    fn low_frequency_slope_of_backaction_is_minus_four() {
        let s = Setup::normalized(1.0);
        let ba = |w: f64| free_sigma(&s, w, 0.0) - variational_sigma(&s);
        let slope = (ba(1e-3).ln() - ba(1e-2).ln()) / ((1e-3f64).ln() - (1e-2f64).ln());
        assert!((slope + 4.0).abs() < 1e-9);
    }

    #[test]
    fn cavity_angle_values() {
        let t = cavity_locking_angle(1.0, 1.0);
        assert!((t - (2.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((t - 0.5880).abs() < 1e-4);
        assert!((cavity_locking_angle(1e9, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_inconsistent_scenarios() {
        let setup = Setup::normalized(1.0);
        let mut s = cavity_locking(&setup).unwrap();
        s.input = None;
        assert!(s.validate().is_err());

        let mut s = locking(&setup, GainMode::Infinite).unwrap();
        s.sensor = None;
        let e = s.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);

        let mut s = cavity_locking(&setup).unwrap();
        s.control = Some(ControlLaw::new(ControlKind::FeedforwardToInput, GainMode::Infinite));
        assert!(s.validate().is_err());

        let mut s = free(&setup).unwrap();
        s.sensor_loss = 0.01;
        assert!(s.validate().is_err());

        for sc in [
            free(&setup).unwrap(),
            variational_readout(&setup).unwrap(),
            squeezed_input(&setup, 0.5, SqueezeAngle::Tracking).unwrap(),
            locking(&setup, GainMode::Infinite).unwrap(),
            backaction_cancel(&setup, GainMode::Optimized, 0.01).unwrap(),
            cavity_locking(&setup).unwrap(),
            signal_correction(&cavity_locking(&setup).unwrap(), 2.0).unwrap(),
        ] {
            sc.validate().unwrap();
        }
    }

    #[test]
    fn scenario_id_names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
        }
        assert!("fig9".parse::<ScenarioId>().is_err());
    }
}
