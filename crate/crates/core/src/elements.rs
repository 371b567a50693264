//! Optomechanical building blocks.
//!
//! All cavities are resonant, single-ended and lossless, and every analysis
//! frequency is assumed to lie well inside the cavity bandwidth, so the
//! reflection is frequency independent.
//!
//! Sign conventions:
//!
//! | cavity      | length          | pressure on first mirror | on second |
//! |-------------|-----------------|--------------------------|-----------|
//! | a (interf.) | `X_m - X_i`     | `m`: `+hbar xi_a a0`     | `i`: `-hbar xi_a a0` |
//! | b (sensor)  | `X_r - X_m`     | `r`: `+hbar xi_b b0`     | `m`: `-hbar xi_b b0` |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specalg::{rotate_quadrature, Constants, LinearForm, MirrorId, NoiseSource, SourceId};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which optical beam a channel carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beam {
    /// Interferometer beam `a`.
    #[serde(rename = "a")]
    Interferometer,
    /// Sensor beam `b`.
    #[serde(rename = "b")]
    Sensor,
}

/// An optical probe beam and the cavity it resonates in.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldChannel {
    pub beam: Beam,
    /// Optomechanical coupling `xi`.
    pub xi: f64,
    pub wavelength: Option<f64>,
    pub finesse: Option<f64>,
    /// Intracavity mean amplitude, `|alpha|^2` = intracavity photon flux.
    pub alpha: Option<f64>,
}

impl FieldChannel {
    pub fn from_coupling(beam: Beam, xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::Domain(format!("coupling xi must be > 0, got {xi}")));
        }
        Ok(Self {
            beam,
            xi,
            wavelength: None,
            finesse: None,
            alpha: None,
        })
    }

    /// Builds a channel from its optical design: wavelength, finesse and
    /// circulating power.
    pub fn from_optics(
        beam: Beam,
        wavelength: f64,
        finesse: f64,
        intracavity_power: f64,
        constants: &Constants,
    ) -> Result<Self> {
        let alpha = intracavity_amplitude(intracavity_power, wavelength, constants)?;
        let xi = optomech_coupling(wavelength, finesse, alpha)?;
        let mut ch = Self::from_coupling(beam, xi)?;
        ch.wavelength = Some(wavelength);
        ch.finesse = Some(finesse);
        ch.alpha = Some(alpha);
        Ok(ch)
    }
}

/// Mechanical impedance model of a mirror, `-i Omega Z X = F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Impedance {
    /// Free mass above the pendulum resonance: `Z = -i Omega M`.
    Suspended,
    /// Damped harmonic oscillator `M (Omega0^2 - Omega^2 - i Omega Omega0 / Q) X = F`.
    Oscillator { resonance: f64, quality: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalMode {
    pub mirror: MirrorId,
    pub mass: f64,
    pub impedance: Impedance,
    pub classical_force: Option<NoiseSource>,
}

impl MechanicalMode {
    pub fn suspended(mirror: MirrorId, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Domain(format!("mirror mass must be > 0, got {mass}")));
        }
        Ok(Self {
            mirror,
            mass,
            impedance: Impedance::Suspended,
            classical_force: None,
        })
    }

    pub fn force_source_id(&self) -> SourceId {
        match self.mirror {
            MirrorId::End => SourceId::ForceEnd,
            MirrorId::Reference => SourceId::ForceReference,
            MirrorId::Input => SourceId::ForceInput,
        }
    }

    pub fn impedance_at(&self, omega: f64) -> Complex64 {
        match self.impedance {
            Impedance::Suspended => -I * omega * self.mass,
            Impedance::Oscillator {
                resonance,
                quality,
            } => {
                let restoring = Complex64::new(
                    resonance * resonance - omega * omega,
                    -omega * resonance / quality,
                );
                restoring * self.mass / (-I * omega)
            }
        }
    }
}

/// How the control signal acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlKind {
    /// Force `i Omega Z_fb Xhat` on the end mirror.
    FeedbackToEnd,
    /// Force `-i Omega Z_i g Xhat` on the input mirror, i.e. a displacement `g Xhat`.
    FeedforwardToInput,
    /// No actuation: `k Xhat` is subtracted from the interferometer estimator.
    SignalSubtraction,
}

/// Gain policy of a control law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainMode {
    Off,
    Fixed(Complex64),
    /// Closed-form large-gain limit.
    Infinite,
    /// Chosen per frequency by the optimizer.
    Optimized,
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainMode::Off => f.write_str("off"),
            GainMode::Fixed(g) => write!(f, "fixed={},{}", g.re, g.im),
            GainMode::Infinite => f.write_str("infinite"),
            GainMode::Optimized => f.write_str("optimized"),
        }
    }
}

impl FromStr for GainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(GainMode::Off),
            "infinite" => Ok(GainMode::Infinite),
            "optimized" => Ok(GainMode::Optimized),
            _ => {
                let body = s.strip_prefix("fixed=").ok_or_else(|| {
                    Error::config(format!(
                        "unknown gain `{s}` (expected off, infinite, optimized or fixed=<re>,<im>)"
                    ))
                })?;
                let mut parts = body.split(',');
                let parse = |p: Option<&str>| -> Result<f64> {
                    p.unwrap_or("0")
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config(format!("malformed gain `{s}`")))
                };
                let re = parse(parts.next())?;
                let im = parse(parts.next())?;
                if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
                    return Err(Error::config(format!("malformed gain `{s}`")));
                }
                Ok(GainMode::Fixed(Complex64::new(re, im)))
            }
        }
    }
}

/// A gain value resolved at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    Off,
    Finite(Complex64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlLaw {
    pub kind: ControlKind,
    pub mode: GainMode,
}

impl ControlLaw {
    pub fn new(kind: ControlKind, mode: GainMode) -> Self {
        Self { kind, mode }
    }

    /// Mirror receiving the actuation force, if any.
    pub fn target(&self) -> Option<MirrorId> {
        match self.kind {
            ControlKind::FeedbackToEnd => Some(MirrorId::End),
            ControlKind::FeedforwardToInput => Some(MirrorId::Input),
            ControlKind::SignalSubtraction => None,
        }
    }

    /// The gain at one frequency; `None` when the optimizer must supply it.
    pub fn resolved(&self) -> Option<Gain> {
        match self.mode {
            GainMode::Off => Some(Gain::Off),
            GainMode::Fixed(g) => Some(Gain::Finite(g)),
            GainMode::Infinite => Some(Gain::Infinite),
            GainMode::Optimized => None,
        }
    }
}

/// Homodyne detection angle rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionRule {
    /// `theta = pi/2` at every frequency.
    Phase,
    Fixed(f64),
    /// `cot theta = (Omega_b_SQL / Omega)^2`.
    Evading,
    /// `cot theta = 3/2 (Omega_b_SQL / Omega)^2`.
    EvadingCavity,
    /// `cot theta = (Omega_a_SQL / Omega)^2`.
    InterferometerOptimal,
}

impl DetectionRule {
    pub fn needs_sensor(&self) -> bool {
        matches!(self, DetectionRule::Evading | DetectionRule::EvadingCavity)
    }
}

impl fmt::Display for DetectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectionRule::Phase => f.write_str("phase"),
            DetectionRule::Fixed(t) => write!(f, "fixed={t}"),
            DetectionRule::Evading => f.write_str("evading"),
            DetectionRule::EvadingCavity => f.write_str("evading-cavity"),
            DetectionRule::InterferometerOptimal => f.write_str("optimal"),
        }
    }
}

impl FromStr for DetectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(DetectionRule::Phase),
            "evading" => Ok(DetectionRule::Evading),
            "evading-cavity" => Ok(DetectionRule::EvadingCavity),
            "optimal" => Ok(DetectionRule::InterferometerOptimal),
            _ => s
                .strip_prefix("fixed=")
                .and_then(|t| t.trim().parse::<f64>().ok())
                .filter(|t| t.is_finite())
                .map(DetectionRule::Fixed)
                .ok_or_else(|| {
                    Error::config(format!(
                        "unknown angle `{s}` (expected phase, fixed=<rad>, evading, evading-cavity or optimal)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPolicy {
    pub rule: DetectionRule,
    pub channel: Beam,
}

impl DetectionPolicy {
    pub fn new(rule: DetectionRule, channel: Beam) -> Self {
        Self { rule, channel }
    }

    /// Detection angle at `omega`. `sql_b` is required by the sensor-based rules.
    pub fn angle(&self, omega: f64, sql_a: f64, sql_b: Option<f64>) -> Result<f64> {
        let from_cot = |cot: f64| 1f64.atan2(cot);
        let sensor_sql = || {
            sql_b.ok_or_else(|| {
                Error::config(format!("angle rule `{}` requires a sensor channel", self.rule))
            })
        };
        let theta = match self.rule {
            DetectionRule::Phase => PI / 2.0,
            DetectionRule::Fixed(t) => t,
            DetectionRule::Evading => from_cot((sensor_sql()? / omega).powi(2)),
            DetectionRule::EvadingCavity => from_cot(1.5 * (sensor_sql()? / omega).powi(2)),
            DetectionRule::InterferometerOptimal => from_cot((sql_a / omega).powi(2)),
        };
        Ok(theta)
    }
}

/// A field's two quadrature fluctuations `(a_0, a_{pi/2})` as linear forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratures {
    pub amplitude: LinearForm,
    pub phase: LinearForm,
}

impl Quadratures {
    pub fn vacuum(amplitude: SourceId, phase: SourceId) -> Self {
        Self {
            amplitude: LinearForm::symbol(amplitude),
            phase: LinearForm::symbol(phase),
        }
    }
}

/// Reflection on a resonant lossless cavity whose length varies by `length`:
/// the amplitude quadrature is unchanged and the phase quadrature picks up
/// `2 xi X`.
pub fn cavity_reflect(input: &Quadratures, length: &LinearForm, xi: f64) -> Quadratures {
    Quadratures {
        amplitude: input.amplitude.clone(),
        phase: input.phase.clone() + length.scale(2.0 * xi),
    }
}

/// `xi = (4 pi / lambda) alpha sqrt(2 F / pi)`.
pub fn optomech_coupling(wavelength: f64, finesse: f64, alpha: f64) -> Result<f64> {
    if !(wavelength > 0.0 && finesse > 0.0 && alpha >= 0.0)
        || !(wavelength.is_finite() && finesse.is_finite() && alpha.is_finite())
    {
        return Err(Error::Domain(format!(
            "optomechanical coupling needs wavelength > 0, finesse > 0, alpha >= 0 \
             (got {wavelength}, {finesse}, {alpha})"
        )));
    }
    Ok(4.0 * PI / wavelength * alpha * (2.0 * finesse / PI).sqrt())
}

/// Intracavity amplitude with `|alpha|^2 = P_cav / (hbar omega_L)`.
pub fn intracavity_amplitude(power: f64, wavelength: f64, constants: &Constants) -> Result<f64> {
    if !(power >= 0.0 && wavelength > 0.0 && power.is_finite() && wavelength.is_finite()) {
        return Err(Error::Domain(format!(
            "intracavity power must be >= 0 and wavelength > 0 (got {power}, {wavelength})"
        )));
    }
    let laser_omega = 2.0 * PI * constants.c / wavelength;
    Ok((power / (constants.hbar * laser_omega)).sqrt())
}

/// Incident power needed for circulating power `p_cav` in a resonant
/// single-ended cavity with buildup `2F/pi`.
pub fn incident_power_for(p_cav: f64, finesse: f64) -> Result<f64> {
    if !(p_cav > 0.0 && finesse > 0.0) {
        return Err(Error::Domain(format!(
            "power and finesse must be > 0 (got {p_cav}, {finesse})"
        )));
    }
    Ok(p_cav * PI / (2.0 * finesse))
}

/// Displacement driven by `forces`: `X = F / (-i Omega Z)`.
pub fn mirror_response(z: Complex64, omega: f64, forces: &LinearForm) -> Result<LinearForm> {
    let denom = -I * omega * z;
    if denom.norm() == 0.0 || !denom.is_finite() {
        return Err(Error::SingularDynamics {
            omega,
            scenario: String::new(),
            detail: format!("mechanical impedance {z} has no inverse"),
        });
    }
    Ok(forces.scale(denom.inv()))
}

/// Frequency where phase noise and back-action are equal: `sqrt(2 hbar xi^2 / M)`.
pub fn sql_frequency(xi: f64, mass: f64, constants: &Constants) -> f64 {
    (2.0 * constants.hbar * xi * xi / mass).sqrt()
}

/// Displacement estimator `a_theta / (2 xi sin theta)`.
pub fn homodyne(output: &Quadratures, theta: f64, xi: f64) -> Result<LinearForm> {
    let s = theta.sin();
    if s.abs() < 1e-12 {
        return Err(Error::DegenerateReadout { theta });
    }
    let (rotated, _) = rotate_quadrature(output.amplitude.clone(), output.phase.clone(), theta);
    Ok(rotated.scale(1.0 / (2.0 * xi * s)))
}

/// Output-port beamsplitter of transmission `1 - loss` admitting fresh vacuum.
pub fn lossy_sensor_port(output: &Quadratures, loss: f64) -> Result<Quadratures> {
    if !(0.0..1.0).contains(&loss) {
        return Err(Error::Domain(format!("loss must lie in [0, 1), got {loss}")));
    }
    if loss == 0.0 {
        return Ok(output.clone());
    }
    let t = (1.0 - loss).sqrt();
    let r = loss.sqrt();
    Ok(Quadratures {
        amplitude: output.amplitude.scale(t) + LinearForm::symbol(SourceId::LossVac0).scale(r),
        phase: output.phase.scale(t) + LinearForm::symbol(SourceId::LossVac90).scale(r),
    })
}
