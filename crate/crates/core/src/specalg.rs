//! Spectral bookkeeping for linear quantum-noise models.
//!
//! Every observable is a [`LinearForm`] over a small set of [`Symbol`]s:
//! mirror displacements that are still to be solved for, the length signal,
//! an open actuator input, and statistically independent noise sources.
//! Once the displacements are eliminated, the spectrum of an observable is the
//! weighted sum of squared moduli of its source coefficients.
//!
//! Spectra are one-sided and symmetrized. A coherent or vacuum quadrature has
//! spectrum exactly 1.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit system of frequencies and spectra.
///
/// `Normalized` expresses frequencies in units of the interferometer's SQL
/// frequency and spectra in units of `1/(2 xi_a^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Si,
    Normalized,
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Si => "si",
            Units::Normalized => "normalized",
        })
    }
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "si" | "SI" => Ok(Units::Si),
            "normalized" => Ok(Units::Normalized),
            other => Err(Error::config(format!(
                "unknown units `{other}` (expected `si` or `normalized`)"
            ))),
        }
    }
}

/// A strictly positive analysis frequency tagged with its unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularFrequency {
    value: f64,
    units: Units,
}

impl AngularFrequency {
    pub fn new(value: f64, units: Units) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "angular frequency must be finite and > 0, got {value}"
            )));
        }
        Ok(Self { value, units })
    }

    pub fn si(value: f64) -> Result<Self> {
        Self::new(value, Units::Si)
    }

    pub fn normalized(value: f64) -> Result<Self> {
        Self::new(value, Units::Normalized)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn units(&self) -> Units {
        self.units
    }

    /// Frequency in the model's own units, given the interferometer SQL
    /// frequency used for normalization.
    pub fn physical(&self, omega_sql: f64) -> f64 {
        match self.units {
            Units::Si => self.value,
            Units::Normalized => self.value * omega_sql,
        }
    }
}

/// Returns the unit system shared by all frequencies, or an error when they mix.
pub fn common_units(freqs: &[AngularFrequency]) -> Result<Option<Units>> {
    let mut iter = freqs.iter().map(AngularFrequency::units);
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    if iter.any(|u| u != first) {
        return Err(Error::UnitsMismatch);
    }
    Ok(Some(first))
}

/// Physical constants for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Speed of light.
    pub c: f64,
}

impl Constants {
    pub const SI: Constants = Constants {
        hbar: 1.054_571_8e-34,
        c: 299_792_458.0,
    };

    /// Natural units with `hbar = 1`, used for normalized runs.
    pub const NATURAL: Constants = Constants { hbar: 1.0, c: 1.0 };

    pub fn for_units(units: Units) -> Constants {
        match units {
            Units::Si => Constants::SI,
            Units::Normalized => Constants::NATURAL,
        }
    }
}

/// The three mirrors a scenario may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MirrorId {
    /// End mirror of the interferometer cavity, shared with the sensor cavity.
    #[serde(rename = "m")]
    End,
    /// Reference mirror of the sensor cavity.
    #[serde(rename = "r")]
    Reference,
    /// Input mirror of the interferometer cavity.
    #[serde(rename = "i")]
    Input,
}

impl fmt::Display for MirrorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MirrorId::End => "m",
            MirrorId::Reference => "r",
            MirrorId::Input => "i",
        })
    }
}

/// Identifiers of independent noise inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceId {
    /// Incident amplitude quadrature of the interferometer beam.
    #[serde(rename = "a0")]
    A0,
    /// Incident phase quadrature of the interferometer beam.
    #[serde(rename = "a90")]
    A90,
    /// Squeezed quadrature of a squeezed interferometer input.
    #[serde(rename = "a_sqz")]
    ASqueezed,
    /// Anti-squeezed quadrature conjugate to [`SourceId::ASqueezed`].
    #[serde(rename = "a_asqz")]
    AAntiSqueezed,
    #[serde(rename = "b0")]
    B0,
    #[serde(rename = "b90")]
    B90,
    /// Amplitude quadrature of vacuum admitted by sensor loss.
    #[serde(rename = "v0")]
    LossVac0,
    /// Phase quadrature of vacuum admitted by sensor loss.
    #[serde(rename = "v90")]
    LossVac90,
    #[serde(rename = "f_m")]
    ForceEnd,
    #[serde(rename = "f_r")]
    ForceReference,
    #[serde(rename = "f_i")]
    ForceInput,
}

impl SourceId {
    pub const ALL: [SourceId; 11] = [
        SourceId::A0,
        SourceId::A90,
        SourceId::ASqueezed,
        SourceId::AAntiSqueezed,
        SourceId::B0,
        SourceId::B90,
        SourceId::LossVac0,
        SourceId::LossVac90,
        SourceId::ForceEnd,
        SourceId::ForceReference,
        SourceId::ForceInput,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SourceId::A0 => "a0",
            SourceId::A90 => "a90",
            SourceId::ASqueezed => "a_sqz",
            SourceId::AAntiSqueezed => "a_asqz",
            SourceId::B0 => "b0",
            SourceId::B90 => "b90",
            SourceId::LossVac0 => "v0",
            SourceId::LossVac90 => "v90",
            SourceId::ForceEnd => "f_m",
            SourceId::ForceReference => "f_r",
            SourceId::ForceInput => "f_i",
        }
    }

    pub fn kind(&self) -> SourceKind {
        match self {
            SourceId::LossVac0 | SourceId::LossVac90 => SourceKind::VacuumLoss,
            SourceId::ForceEnd | SourceId::ForceReference | SourceId::ForceInput => {
                SourceKind::ClassicalForce
            }
            _ => SourceKind::QuantumQuadrature,
        }
    }

    pub fn is_quantum(&self) -> bool {
        self.kind() != SourceKind::ClassicalForce
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SourceId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::config(format!("unknown noise source `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    QuantumQuadrature,
    ClassicalForce,
    VacuumLoss,
}

/// A non-negative spectral density evaluated lazily at each frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spectrum {
    Constant(f64),
    /// `(omega, density)` samples in ascending `omega`, interpolated linearly
    /// in log-log coordinates and held constant beyond the end points.
    Table(Vec<(f64, f64)>),
}

impl Spectrum {
    pub const UNIT: Spectrum = Spectrum::Constant(1.0);

    pub fn validate(&self) -> Result<()> {
        match self {
            Spectrum::Constant(v) if !(v.is_finite() && *v >= 0.0) => Err(Error::Domain(
                format!("spectral density must be finite and >= 0, got {v}"),
            )),
            Spectrum::Constant(_) => Ok(()),
            Spectrum::Table(rows) => {
                if rows.is_empty() {
                    return Err(Error::Domain("spectrum table is empty".into()));
                }
                for (w, s) in rows {
                    if !(w.is_finite() && *w > 0.0 && s.is_finite() && *s >= 0.0) {
                        return Err(Error::Domain(format!(
                            "spectrum table row ({w}, {s}) needs omega > 0 and density >= 0"
                        )));
                    }
                }
                if rows.windows(2).any(|p| p[1].0 <= p[0].0) {
                    return Err(Error::Domain(
                        "spectrum table frequencies must be strictly ascending".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, omega: f64) -> f64 {
        match self {
            Spectrum::Constant(v) => *v,
            Spectrum::Table(rows) => {
                let first = rows[0];
                let last = rows[rows.len() - 1];
                if omega <= first.0 {
                    return first.1;
                }
                if omega >= last.0 {
                    return last.1;
                }
                let k = rows.partition_point(|(w, _)| *w <= omega);
                let (w0, s0) = rows[k - 1];
                let (w1, s1) = rows[k];
                if s0 > 0.0 && s1 > 0.0 {
                    let t = (omega / w0).ln() / (w1 / w0).ln();
                    (s0.ln() + t * (s1 / s0).ln()).exp()
                } else {
                    s0 + (s1 - s0) * (omega - w0) / (w1 - w0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSource {
    pub id: SourceId,
    pub kind: SourceKind,
    pub spectrum: Spectrum,
}

impl NoiseSource {
    /// Coherent-state or vacuum quadrature.
    pub fn vacuum(id: SourceId) -> Self {
        Self {
            id,
            kind: id.kind(),
            spectrum: Spectrum::UNIT,
        }
    }

    pub fn with_spectrum(id: SourceId, spectrum: Spectrum) -> Self {
        Self {
            id,
            kind: id.kind(),
            spectrum,
        }
    }
}

/// Ideal squeezed vacuum: quadrature `angle` carries `e^{-2r}`, its conjugate `e^{2r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedVacuum {
    pub r: f64,
    pub angle: f64,
}

impl SqueezedVacuum {
    pub fn squeezed_spectrum(&self) -> f64 {
        (-2.0 * self.r).exp()
    }

    pub fn anti_squeezed_spectrum(&self) -> f64 {
        (2.0 * self.r).exp()
    }

    /// Spectrum of the quadrature `a_theta`.
    pub fn quadrature_spectrum(&self, theta: f64) -> f64 {
        let (s, c) = (theta - self.angle).sin_cos();
        self.squeezed_spectrum() * c * c + self.anti_squeezed_spectrum() * s * s
    }
}

/// The noise sources present in one model, keyed by identifier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceRegistry {
    sources: BTreeMap<SourceId, NoiseSource>,
}

impl SourceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: NoiseSource) {
        self.sources.insert(source.id, source);
    }

    pub fn get(&self, id: SourceId) -> Result<&NoiseSource> {
        self.sources.get(&id).ok_or(Error::UnresolvedSource(id))
    }

    pub fn contains(&self, id: SourceId) -> bool {
        self.sources.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NoiseSource> {
        self.sources.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = SourceId> + '_ {
        self.sources.keys().copied()
    }
}

/// Unknowns and inputs a linear form can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Length signal to be measured.
    Signal,
    Displacement(MirrorId),
    Source(SourceId),
    /// Force of an open (not yet closed) control loop.
    Actuator,
}

impl From<SourceId> for Symbol {
    fn from(id: SourceId) -> Self {
        Symbol::Source(id)
    }
}

impl From<MirrorId> for Symbol {
    fn from(id: MirrorId) -> Self {
        Symbol::Displacement(id)
    }
}

/// Complex linear combination of symbols.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    terms: BTreeMap<Symbol, Complex64>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(sym: impl Into<Symbol>) -> Self {
        Self::term(sym, Complex64::new(1.0, 0.0))
    }

    pub fn term(sym: impl Into<Symbol>, coeff: Complex64) -> Self {
        let mut f = Self::zero();
        f.add_term(sym, coeff);
        f
    }

    pub fn add_term(&mut self, sym: impl Into<Symbol>, coeff: Complex64) {
        *self.terms.entry(sym.into()).or_default() += coeff;
    }

    pub fn coeff(&self, sym: impl Into<Symbol>) -> Complex64 {
        self.terms.get(&sym.into()).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Symbol, Complex64)> + '_ {
        self.terms.iter().map(|(s, c)| (*s, *c))
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let factor = factor.into();
        Self {
            terms: self.terms.iter().map(|(s, c)| (*s, c * factor)).collect(),
        }
    }

    /// Replaces `sym` by `value` everywhere it appears.
    pub fn substitute(&self, sym: Symbol, value: &LinearForm) -> Self {
        let Some(c) = self.terms.get(&sym).copied() else {
            return self.clone();
        };
        let mut out = self.clone();
        out.terms.remove(&sym);
        out + value.scale(c)
    }

    /// True when no displacement or actuator symbol remains.
    pub fn is_closed(&self) -> bool {
        self.terms
            .keys()
            .all(|s| matches!(s, Symbol::Signal | Symbol::Source(_)))
    }

    pub fn source_coefficients(&self) -> Vec<QuadratureCoefficient> {
        self.terms
            .iter()
            .filter_map(|(s, c)| match s {
                Symbol::Source(id) => Some(QuadratureCoefficient {
                    source: *id,
                    coeff: *c,
                }),
                _ => None,
            })
            .collect()
    }

    /// Largest coefficient modulus, for relative tolerances.
    pub fn max_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for LinearForm {
    type Output = LinearForm;

    fn add(mut self, rhs: LinearForm) -> LinearForm {
        for (s, c) in rhs.terms {
            *self.terms.entry(s).or_default() += c;
        }
        self
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;

    fn sub(self, rhs: LinearForm) -> LinearForm {
        self + (-rhs)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;

    fn neg(self) -> LinearForm {
        self.scale(-1.0)
    }
}

impl Mul<f64> for LinearForm {
    type Output = LinearForm;

    fn mul(self, rhs: f64) -> LinearForm {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for LinearForm {
    type Output = LinearForm;

    fn mul(self, rhs: Complex64) -> LinearForm {
        self.scale(rhs)
    }
}

/// Transfer amplitude from one noise source to an observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCoefficient {
    pub source: SourceId,
    pub coeff: Complex64,
}

/// Rotates a quadrature pair: returns `(a_theta, a_{theta + pi/2})` given
/// `(a_0, a_{pi/2})`, with `a_theta = cos(theta) a_0 + sin(theta) a_{pi/2}`.
pub fn rotate_quadrature<T>(amplitude: T, phase: T, theta: f64) -> (T, T)
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let (s, c) = theta.sin_cos();
    let rotated = amplitude.clone() * c + phase.clone() * s;
    let conjugate = phase * c - amplitude * s;
    (rotated, conjugate)
}

/// Per-source contributions `|coeff|^2 S(omega)`, in the order given.
pub fn contributions(
    observable: &[QuadratureCoefficient],
    sources: &SourceRegistry,
    omega: f64,
) -> Result<Vec<(SourceId, f64)>> {
    observable
        .iter()
        .map(|q| {
            let src = sources.get(q.source)?;
            Ok((q.source, q.coeff.norm_sqr() * src.spectrum.at(omega)))
        })
        .collect()
}

/// Spectrum of an observable made of uncorrelated sources.
pub fn spectrum_of(
    observable: &[QuadratureCoefficient],
    sources: &SourceRegistry,
    omega: f64,
) -> Result<f64> {
    Ok(contributions(observable, sources, omega)?
        .into_iter()
        .map(|(_, v)| v)
        .sum())
}
