//! TOML run configuration.
//!
//! ```toml
//! units = "normalized"      # or "si"
//! format = "csv"            # or "json"
//!
//! [grid]
//! min = 0.1
//! max = 10.0
//! points = 400
//! log = true
//!
//! [scenario.curve_c]
//! id = "locking"
//! xi_b = 0.1414
//! gain = "infinite"
//! ```

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::elements::{Beam, DetectionRule, FieldChannel, GainMode, Impedance};
use crate::error::{Error, Result};
use crate::network::GridSpec;
use crate::scenarios::{self, Scenario, ScenarioId, Setup, SqueezeAngle};
use crate::specalg::{Constants, MirrorId, NoiseSource, Spectrum, Units};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config_key(None, "format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

/// Parameters of one `[scenario.<name>]` section. Unset keys take the
/// defaults of the scenario id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub id: Option<ScenarioId>,
    pub xi_a: Option<f64>,
    pub xi_b: Option<f64>,
    /// Mass of every mirror.
    pub mass: Option<f64>,
    /// Laser wavelength shared by both cavities (SI only).
    pub wavelength: Option<f64>,
    pub finesse_a: Option<f64>,
    /// Intracavity power of the interferometer.
    pub power_a: Option<f64>,
    pub finesse_b: Option<f64>,
    pub power_b: Option<f64>,
    /// `off`, `infinite`, `optimized` or `fixed=<re>,<im>`.
    pub gain: Option<String>,
    /// Detection rule of the sensor, or of the interferometer when there is no sensor.
    pub angle: Option<String>,
    pub loss: Option<f64>,
    pub squeeze_r: Option<f64>,
    /// `tracking` or `fixed=<rad>`.
    pub squeeze_angle: Option<String>,
    pub correction_gain: Option<f64>,
    /// Actuated scenario a signal correction stands in for.
    pub base: Option<ScenarioId>,
    /// White force noise on each mirror, in model units.
    pub force_noise_m: Option<f64>,
    pub force_noise_r: Option<f64>,
    pub force_noise_i: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    log: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    units: Option<Units>,
    format: Option<Format>,
    out: Option<PathBuf>,
    #[serde(default)]
    verify: bool,
    grid: Option<RawGrid>,
    #[serde(default)]
    scenario: IndexMap<String, ScenarioParams>,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: Units,
    pub grid: GridSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub verify: bool,
    /// Named scenario sections in document order.
    pub scenarios: Vec<(String, ScenarioParams)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: Units::Normalized,
            grid: GridSpec::default(),
            format: Format::Csv,
            out: None,
            verify: false,
            scenarios: Vec::new(),
        }
    }
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end()))?;
    let units = raw.units.unwrap_or(Units::Normalized);
    let g = raw.grid.unwrap_or_default();
    let default = GridSpec {
        units,
        ..GridSpec::default()
    };
    let grid = GridSpec {
        min: g.min.unwrap_or(default.min),
        max: g.max.unwrap_or(default.max),
        points: g.points.unwrap_or(default.points),
        log: g.log.unwrap_or(default.log),
        units,
    };
    let config = RunConfig {
        units,
        grid,
        format: raw.format.unwrap_or_default(),
        out: raw.out,
        verify: raw.verify,
        scenarios: raw.scenario.into_iter().collect(),
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.grid.units != self.units {
            return Err(Error::UnitsMismatch);
        }
        self.build_scenarios().map(|_| ())
    }

    pub fn build_scenarios(&self) -> Result<Vec<Scenario>> {
        self.scenarios
            .iter()
            .map(|(name, p)| build_scenario(name, p, self.units))
            .collect()
    }

    /// The sensitivity-figure curve set in normalized units: free (`a`), SQL
    /// envelope (`b`), infinite-gain and optimized locking with
    /// `xi_b = xi_a / 5` (`c`, `d`), back-action cancellation with
    /// `xi_b = xi_a` at infinite and optimized gain (`e`, `e_opt`), and the
    /// same with 1% sensor loss (`f`).
    pub fn fig3() -> Self {
        let xi_a = FRAC_1_SQRT_2;
        let p = |id: ScenarioId, ratio: Option<f64>, gain: Option<&str>, loss: Option<f64>| ScenarioParams {
            id: Some(id),
            xi_a: Some(xi_a),
            xi_b: ratio.map(|r| xi_a * r),
            gain: gain.map(str::to_owned),
            loss,
            ..ScenarioParams::default()
        };
        let scenarios = vec![
            ("a".into(), p(ScenarioId::Free, None, None, None)),
            ("b".into(), p(ScenarioId::SqlEnvelope, None, None, None)),
            ("c".into(), p(ScenarioId::Locking, Some(0.2), Some("infinite"), None)),
            ("d".into(), p(ScenarioId::Locking, Some(0.2), Some("optimized"), None)),
            ("e".into(), p(ScenarioId::BackactionCancel, Some(1.0), Some("infinite"), None)),
            ("e_opt".into(), p(ScenarioId::BackactionCancel, Some(1.0), Some("optimized"), None)),
            ("f".into(), p(ScenarioId::BackactionCancel, Some(1.0), Some("infinite"), Some(0.01))),
        ];
        Self {
            scenarios,
            ..Self::default()
        }
    }
}

fn key_err(name: &str, key: &str, msg: impl Into<String>) -> Error {
    Error::config_key(Some(name), key, msg)
}

fn coupling(
    name: &str,
    key: &str,
    direct: Option<f64>,
    optics: (Option<f64>, Option<f64>, Option<f64>),
    beam: Beam,
    units: Units,
    constants: &Constants,
) -> Result<Option<f64>> {
    let (wavelength, finesse, power) = optics;
    let any_optics = finesse.is_some() || power.is_some();
    match (direct, any_optics) {
        (Some(_), true) => Err(key_err(
            name,
            key,
            "give either the coupling or finesse and power, not both",
        )),
        (Some(xi), false) => {
            if !(xi.is_finite() && xi > 0.0) {
                return Err(key_err(name, key, format!("must be > 0, got {xi}")));
            }
            Ok(Some(xi))
        }
        (None, true) => {
            if units != Units::Si {
                return Err(key_err(name, key, "optical parameters need units = \"si\""));
            }
            let missing = |k: &str| key_err(name, k, format!("needed to compute {key}"));
            let wavelength = wavelength.ok_or_else(|| missing("wavelength"))?;
            let (finesse_key, power_key) = match beam {
                Beam::Interferometer => ("finesse_a", "power_a"),
                Beam::Sensor => ("finesse_b", "power_b"),
            };
            let finesse = finesse.ok_or_else(|| missing(finesse_key))?;
            let power = power.ok_or_else(|| missing(power_key))?;
            let ch = FieldChannel::from_optics(beam, wavelength, finesse, power, constants)
                .map_err(|e| key_err(name, key, e.to_string()))?;
            Ok(Some(ch.xi))
        }
        (None, false) => Ok(None),
    }
}

fn parse_with<T: FromStr<Err = Error>>(name: &str, key: &str, s: &str) -> Result<T> {
    s.parse().map_err(|e: Error| match e {
        Error::Config { message, .. } => key_err(name, key, message),
        other => other,
    })
}

/// Builds one scenario from its section.
pub fn build_scenario(name: &str, p: &ScenarioParams, units: Units) -> Result<Scenario> {
    let id = p.id.ok_or_else(|| key_err(name, "id", "missing scenario id"))?;
    let constants = Constants::for_units(units);

    let xi_a = coupling(
        name,
        "xi_a",
        p.xi_a,
        (p.wavelength, p.finesse_a, p.power_a),
        Beam::Interferometer,
        units,
        &constants,
    )?;
    let xi_a = match (xi_a, units) {
        (Some(x), _) => x,
        (None, Units::Normalized) => FRAC_1_SQRT_2,
        (None, Units::Si) => {
            return Err(key_err(name, "xi_a", "missing (or give wavelength, finesse_a and power_a)"))
        }
    };
    let xi_b = coupling(
        name,
        "xi_b",
        p.xi_b,
        (p.wavelength, p.finesse_b, p.power_b),
        Beam::Sensor,
        units,
        &constants,
    )?;
    let xi_b = match (xi_b, id.uses_sensor()) {
        (Some(x), true) => x,
        (None, true) => {
            return Err(key_err(name, "xi_b", "missing sensor coupling (or give wavelength, finesse_b and power_b)"))
        }
        (Some(_), false) => return Err(key_err(name, "xi_b", format!("`{id}` has no sensor cavity"))),
        (None, false) => xi_a,
    };
    let mass = match (p.mass, units) {
        (Some(m), _) => m,
        (None, Units::Normalized) => 1.0,
        (None, Units::Si) => return Err(key_err(name, "mass", "missing mirror mass")),
    };
    if !(mass.is_finite() && mass > 0.0) {
        return Err(key_err(name, "mass", format!("must be > 0, got {mass}")));
    }
    if p.wavelength.is_some() && p.finesse_a.is_none() && p.finesse_b.is_none() {
        return Err(key_err(name, "wavelength", "unused without finesse and power"));
    }
    let setup = Setup {
        constants,
        xi_a,
        xi_b,
        mass,
    };

    let gain = p
        .gain
        .as_deref()
        .map(|g| parse_with::<GainMode>(name, "gain", g))
        .transpose()?;
    let reject = |key: &str, present: bool| {
        if present {
            Err(key_err(name, key, format!("not used by `{id}`")))
        } else {
            Ok(())
        }
    };
    if !id.uses_sensor() {
        reject("gain", gain.is_some())?;
        reject("loss", p.loss.is_some())?;
    }
    if id != ScenarioId::SqueezedInput {
        reject("squeeze_angle", p.squeeze_angle.is_some())?;
    }
    if id != ScenarioId::SignalCorrection {
        reject("correction_gain", p.correction_gain.is_some())?;
        reject("base", p.base.is_some())?;
    }
    let loss = p.loss.unwrap_or(0.0);

    let mut sc = match id {
        ScenarioId::Free => scenarios::free(&setup)?,
        ScenarioId::SqlEnvelope => scenarios::sql(&setup)?,
        ScenarioId::VariationalReadout => scenarios::variational_readout(&setup)?,
        ScenarioId::SqueezedInput => {
            let r = p
                .squeeze_r
                .ok_or_else(|| key_err(name, "squeeze_r", "missing squeeze parameter"))?;
            let angle = match p.squeeze_angle.as_deref() {
                None | Some("tracking") => SqueezeAngle::Tracking,
                Some(s) => s
                    .strip_prefix("fixed=")
                    .and_then(|t| t.trim().parse::<f64>().ok())
                    .filter(|t| t.is_finite())
                    .map(SqueezeAngle::Fixed)
                    .ok_or_else(|| {
                        key_err(name, "squeeze_angle", format!("expected tracking or fixed=<rad>, got `{s}`"))
                    })?,
            };
            scenarios::squeezed_input(&setup, r, angle)?
        }
        ScenarioId::Locking => scenarios::locking(&setup, gain.unwrap_or(GainMode::Infinite))?,
        ScenarioId::BackactionCancel => {
            scenarios::backaction_cancel(&setup, gain.unwrap_or(GainMode::Infinite), loss)?
        }
        ScenarioId::CavityLocking => {
            let mut sc = scenarios::cavity_locking(&setup)?;
            if let Some(g) = gain {
                sc = sc.with_gain(g);
            }
            sc.sensor_loss = loss;
            sc
        }
        ScenarioId::SignalCorrection => {
            let base_id = p.base.unwrap_or(ScenarioId::CavityLocking);
            let mut base = match base_id {
                ScenarioId::Locking => scenarios::locking(&setup, GainMode::Infinite)?,
                ScenarioId::BackactionCancel => {
                    scenarios::backaction_cancel(&setup, GainMode::Infinite, loss)?
                }
                ScenarioId::CavityLocking => scenarios::cavity_locking(&setup)?,
                other => {
                    return Err(key_err(name, "base", format!("`{other}` has no actuated sensor loop")))
                }
            };
            if let Some(g) = gain {
                if base_id != ScenarioId::CavityLocking {
                    return Err(key_err(name, "gain", "set correction_gain for feedback bases"));
                }
                base = base.with_gain(g);
            }
            base.sensor_loss = loss;
            let k = p
                .correction_gain
                .unwrap_or_else(|| scenarios::equivalent_correction_gain(&base));
            if !k.is_finite() {
                return Err(key_err(name, "correction_gain", "must be finite"));
            }
            scenarios::signal_correction(&base, k)?
        }
    };
    if id != ScenarioId::SqueezedInput {
        if let Some(r) = p.squeeze_r {
            sc.squeezing = Some(scenarios::Squeezing {
                r,
                angle: SqueezeAngle::Tracking,
            });
        }
    }

    if let Some(a) = p.angle.as_deref() {
        let rule = parse_with::<DetectionRule>(name, "angle", a)?;
        if sc.sensor.is_some() {
            sc.sensor_readout.rule = rule;
        } else {
            sc.interferometer_readout.rule = rule;
        }
    }

    for (key, mirror, psd) in [
        ("force_noise_m", MirrorId::End, p.force_noise_m),
        ("force_noise_r", MirrorId::Reference, p.force_noise_r),
        ("force_noise_i", MirrorId::Input, p.force_noise_i),
    ] {
        let Some(psd) = psd else { continue };
        if !(psd.is_finite() && psd >= 0.0) {
            return Err(key_err(name, key, format!("must be >= 0, got {psd}")));
        }
        let m = sc
            .mirror_mut(mirror)
            .ok_or_else(|| key_err(name, key, format!("`{id}` has no mirror {mirror}")))?;
        debug_assert_eq!(m.impedance, Impedance::Suspended);
        let source = m.force_source_id();
        m.classical_force = Some(NoiseSource::with_spectrum(source, Spectrum::Constant(psd)));
    }
    let sc = sc.named(name);
    sc.validate()?;
    Ok(sc)
}
