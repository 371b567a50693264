//! Per-frequency linear network: assembly, dense solve and noise budgets.
//!
//! A scenario becomes one linear relation per mirror,
//! `X_k - F_k / (-i Omega Z_k) = 0`, where the forces `F_k` may themselves
//! depend on displacements through the sensor estimate. Infinite feedback
//! gain replaces the end-mirror relation by its algebraic limit
//! `Xhat_m = 0` instead of inserting a large number.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::{
    cavity_reflect, homodyne, lossy_sensor_port, mirror_response, ControlKind, Gain, Quadratures,
};
use crate::error::{Error, Result};
use crate::optimizer;
use crate::scenarios::{Scenario, ScenarioId, SqueezeAngle};
use crate::specalg::{
    common_units, contributions, rotate_quadrature, AngularFrequency, LinearForm, MirrorId,
    NoiseSource, QuadratureCoefficient, SourceId, SourceRegistry, Spectrum, Symbol, Units,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative residual accepted from the dense solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// How the control loop is represented in an assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Actuation {
    Resolved(Gain),
    /// The control force is left as the free input [`Symbol::Actuator`].
    Open,
}

/// Linear relations of one scenario at one frequency.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub omega: f64,
    pub scenario: String,
    pub unknowns: Vec<MirrorId>,
    /// Each row is a form that vanishes.
    pub rows: Vec<LinearForm>,
    /// Interferometer displacement estimate, normalized so the signal has unit gain.
    pub estimator: LinearForm,
    /// Sensor estimate of the end-mirror motion, when there is a sensor.
    pub sensor_estimator: Option<LinearForm>,
    pub interferometer_output: Quadratures,
    pub registry: SourceRegistry,
}

/// Solved system: every observable expressed on inputs only.
#[derive(Debug, Clone)]
pub struct Solution {
    pub omega: f64,
    pub displacements: BTreeMap<MirrorId, LinearForm>,
    pub estimator: LinearForm,
    pub sensor_estimator: Option<LinearForm>,
    pub interferometer_output: Quadratures,
    pub registry: SourceRegistry,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

impl Solution {
    pub fn noise_coefficients(&self) -> Vec<QuadratureCoefficient> {
        self.estimator.source_coefficients()
    }

    pub fn contributions(&self) -> Result<Vec<(SourceId, f64)>> {
        contributions(&self.noise_coefficients(), &self.registry, self.omega)
    }

    /// Equivalent input noise of the interferometer estimate.
    pub fn sigma(&self) -> Result<f64> {
        Ok(self.contributions()?.into_iter().map(|(_, v)| v).sum())
    }

    pub fn displacement(&self, id: MirrorId) -> Option<&LinearForm> {
        self.displacements.get(&id)
    }
}

fn squeeze_rotation(sc: &Scenario, omega: f64, angle: SqueezeAngle) -> f64 {
    match angle {
        // squeeze a_{-theta}, cot theta = (Omega_SQL/Omega)^2
        SqueezeAngle::Tracking => -(1f64.atan2((sc.omega_sql_a() / omega).powi(2))),
        SqueezeAngle::Fixed(psi) => psi,
    }
}

/// Assembles a scenario whose gain does not need optimizing.
pub fn assemble(sc: &Scenario, omega: f64) -> Result<LinearSystem> {
    let gain = match sc.control {
        None => Gain::Off,
        Some(c) => c.resolved().ok_or_else(|| {
            Error::config_key(
                Some(&sc.name),
                "gain",
                "an optimized gain has to be resolved per frequency (use `budget` or the optimizer)",
            )
        })?,
    };
    assemble_with(sc, omega, Actuation::Resolved(gain))
}

pub fn assemble_with(sc: &Scenario, omega: f64, actuation: Actuation) -> Result<LinearSystem> {
    sc.validate()?;
    if sc.id == ScenarioId::SqlEnvelope {
        return Err(Error::config_key(
            Some(&sc.name),
            "id",
            "the SQL envelope is a closed form and has no network",
        ));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    let hbar = sc.constants.hbar;
    let xi_a = sc.interferometer.xi;
    let sql_a = sc.omega_sql_a();
    let sql_b = sc.omega_sql_b();
    let x = |id: MirrorId| LinearForm::symbol(id);
    let mut registry = SourceRegistry::new();

    let a_in = match sc.squeezing {
        Some(sq) => {
            let psi = squeeze_rotation(sc, omega, sq.angle);
            registry.insert(NoiseSource::with_spectrum(
                SourceId::ASqueezed,
                Spectrum::Constant((-2.0 * sq.r).exp()),
            ));
            registry.insert(NoiseSource::with_spectrum(
                SourceId::AAntiSqueezed,
                Spectrum::Constant((2.0 * sq.r).exp()),
            ));
            let (amplitude, phase) = rotate_quadrature(
                LinearForm::symbol(SourceId::ASqueezed),
                LinearForm::symbol(SourceId::AAntiSqueezed),
                -psi,
            );
            Quadratures { amplitude, phase }
        }
        None => {
            registry.insert(NoiseSource::vacuum(SourceId::A0));
            registry.insert(NoiseSource::vacuum(SourceId::A90));
            Quadratures::vacuum(SourceId::A0, SourceId::A90)
        }
    };

    let mut forces: BTreeMap<MirrorId, LinearForm> =
        sc.mirrors().map(|m| (m.mirror, LinearForm::zero())).collect();
    let mut push = |id: MirrorId, f: LinearForm| {
        let slot = forces.get_mut(&id).expect("mirror present");
        *slot = std::mem::take(slot) + f;
    };

    let pressure_a = a_in.amplitude.scale(hbar * xi_a);
    push(MirrorId::End, pressure_a.clone());
    if sc.input.is_some() {
        push(MirrorId::Input, -pressure_a);
    }

    let sensor_estimator = match &sc.sensor {
        Some(sensor) => {
            let xi_b = sensor.xi;
            registry.insert(NoiseSource::vacuum(SourceId::B0));
            registry.insert(NoiseSource::vacuum(SourceId::B90));
            let b_in = Quadratures::vacuum(SourceId::B0, SourceId::B90);
            let pressure_b = b_in.amplitude.scale(hbar * xi_b);
            push(MirrorId::End, -pressure_b.clone());
            push(MirrorId::Reference, pressure_b);

            let length_b = x(MirrorId::Reference) - x(MirrorId::End);
            let mut out = cavity_reflect(&b_in, &length_b, xi_b);
            if sc.sensor_loss > 0.0 {
                registry.insert(NoiseSource::vacuum(SourceId::LossVac0));
                registry.insert(NoiseSource::vacuum(SourceId::LossVac90));
                out = lossy_sensor_port(&out, sc.sensor_loss)?;
            }
            let theta = sc.sensor_readout.angle(omega, sql_a, sql_b)?;
            Some(-homodyne(&out, theta, xi_b)?)
        }
        None => None,
    };

    for m in sc.mirrors() {
        if let Some(src) = &m.classical_force {
            let id = m.force_source_id();
            registry.insert(NoiseSource::with_spectrum(id, src.spectrum.clone()));
            push(m.mirror, LinearForm::symbol(id));
        }
    }

    let mut length_a = LinearForm::symbol(Symbol::Signal) + x(MirrorId::End);
    if sc.input.is_some() {
        length_a = length_a - x(MirrorId::Input);
    }
    let interferometer_output = cavity_reflect(&a_in, &length_a, xi_a);
    let theta_a = sc.interferometer_readout.angle(omega, sql_a, sql_b)?;
    let mut estimator = homodyne(&interferometer_output, theta_a, xi_a)?;

    let mut replaced_end_row = None;
    if let Some(control) = sc.control {
        let sensed = sensor_estimator
            .clone()
            .expect("validated scenarios with control have a sensor");
        let invalid = || {
            Error::config_key(Some(&sc.name), "gain", "infinite gain is only defined for feedback")
        };
        match (control.kind, actuation) {
            (_, Actuation::Resolved(Gain::Off)) => {}
            (ControlKind::FeedbackToEnd, Actuation::Resolved(Gain::Finite(g))) => {
                push(MirrorId::End, sensed.scale(I * omega * g));
            }
            (ControlKind::FeedbackToEnd, Actuation::Resolved(Gain::Infinite)) => {
                replaced_end_row = Some(sensed);
            }
            (ControlKind::FeedforwardToInput, Actuation::Resolved(Gain::Finite(g))) => {
                let z_i = sc.input.as_ref().expect("validated").impedance_at(omega);
                push(MirrorId::Input, sensed.scale(-I * omega * z_i * g));
            }
            (ControlKind::SignalSubtraction, Actuation::Resolved(Gain::Finite(k))) => {
                estimator = estimator - sensed.scale(k);
            }
            (ControlKind::FeedforwardToInput | ControlKind::SignalSubtraction, Actuation::Resolved(Gain::Infinite)) => {
                return Err(invalid());
            }
            (ControlKind::SignalSubtraction, Actuation::Open) => {
                estimator = estimator - LinearForm::symbol(Symbol::Actuator);
            }
            (kind, Actuation::Open) => {
                let target = if kind == ControlKind::FeedbackToEnd {
                    MirrorId::End
                } else {
                    MirrorId::Input
                };
                push(target, LinearForm::symbol(Symbol::Actuator));
            }
        }
    }

    let mut unknowns = Vec::new();
    let mut rows = Vec::new();
    for m in sc.mirrors() {
        unknowns.push(m.mirror);
        let row = match (&replaced_end_row, m.mirror) {
            (Some(sensed), MirrorId::End) => sensed.clone(),
            _ => {
                let z = m.impedance_at(omega);
                let response = mirror_response(z, omega, &forces[&m.mirror]).map_err(|e| {
                    match e {
                        Error::SingularDynamics { omega, detail, .. } => Error::SingularDynamics {
                            omega,
                            scenario: sc.name.clone(),
                            detail: format!("mirror {}: {detail}", m.mirror),
                        },
                        other => other,
                    }
                })?;
                x(m.mirror) - response
            }
        };
        rows.push(row);
    }

    Ok(LinearSystem {
        omega,
        scenario: sc.name.clone(),
        unknowns,
        rows,
        estimator,
        sensor_estimator,
        interferometer_output,
        registry,
    })
}

/// Dense Gaussian elimination with partial pivoting on row-equilibrated
/// matrices. Returns `None` when a pivot vanishes.
fn lu_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Vec<Complex64>>) -> Option<Vec<Vec<Complex64>>> {
    let n = a.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))?;
        if a[p][k].norm() < 1e-13 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        let pivot = a[k][k];
        for i in (k + 1)..n {
            let factor = a[i][k] / pivot;
            if factor == Complex64::default() {
                continue;
            }
            for j in k..n {
                let akj = a[k][j];
                a[i][j] -= factor * akj;
            }
            for j in 0..b[k].len() {
                let bkj = b[k][j];
                b[i][j] -= factor * bkj;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..b[k].len() {
            let mut acc = b[k][j];
            for c in (k + 1)..n {
                acc -= a[k][c] * b[c][j];
            }
            b[k][j] = acc / a[k][k];
        }
    }
    Some(b)
}

/// Solves for the displacements and substitutes them into every observable.
pub fn solve(system: &LinearSystem) -> Result<Solution> {
    let n = system.unknowns.len();
    let index: BTreeMap<MirrorId, usize> =
        system.unknowns.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let inputs: Vec<Symbol> = system
        .rows
        .iter()
        .flat_map(|r| r.terms().map(|(s, _)| s))
        .filter(|s| !matches!(s, Symbol::Displacement(_)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut a = vec![vec![Complex64::default(); n]; n];
    let mut b = vec![vec![Complex64::default(); inputs.len()]; n];
    for (r, row) in system.rows.iter().enumerate() {
        for (sym, c) in row.terms() {
            match sym {
                Symbol::Displacement(m) => {
                    let &k = index.get(&m).ok_or_else(|| Error::Numeric {
                        omega: system.omega,
                        detail: format!("row {r} references absent mirror {m}"),
                    })?;
                    a[r][k] += c;
                }
                other => {
                    let j = inputs.binary_search(&other).expect("collected above");
                    b[r][j] -= c;
                }
            }
        }
        let scale = a[r].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            a[r].iter_mut().for_each(|c| *c /= scale);
            b[r].iter_mut().for_each(|c| *c /= scale);
        }
    }

    let singular = || Error::SingularDynamics {
        omega: system.omega,
        scenario: system.scenario.clone(),
        detail: "the mirror equations are linearly dependent".into(),
    };
    let x = lu_solve(a.clone(), b.clone()).ok_or_else(singular)?;

    let max_abs = |m: &Vec<Vec<Complex64>>| {
        m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    };
    let mut worst = 0.0f64;
    for r in 0..n {
        for j in 0..inputs.len() {
            let lhs: Complex64 = (0..n).map(|k| a[r][k] * x[k][j]).sum();
            worst = worst.max((lhs - b[r][j]).norm());
        }
    }
    let scale = max_abs(&a) * max_abs(&x) + max_abs(&b);
    let residual = if scale > 0.0 { worst / scale } else { 0.0 };
    if !(residual < SOLVE_RESIDUAL_TOL) {
        return Err(Error::Numeric {
            omega: system.omega,
            detail: format!("linear solve residual {residual:e} in `{}`", system.scenario),
        });
    }

    let displacements: BTreeMap<MirrorId, LinearForm> = system
        .unknowns
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut f = LinearForm::zero();
            for (j, sym) in inputs.iter().enumerate() {
                f.add_term(*sym, x[k][j]);
            }
            (*m, f)
        })
        .collect();

    let close = |form: &LinearForm| {
        displacements.iter().fold(form.clone(), |acc, (m, value)| {
            acc.substitute(Symbol::Displacement(*m), value)
        })
    };
    Ok(Solution {
        omega: system.omega,
        estimator: close(&system.estimator),
        sensor_estimator: system.sensor_estimator.as_ref().map(close),
        interferometer_output: Quadratures {
            amplitude: close(&system.interferometer_output.amplitude),
            phase: close(&system.interferometer_output.phase),
        },
        displacements,
        registry: system.registry.clone(),
        residual,
    })
}

/// Closed-loop equivalent input noise at one gain value.
pub fn sigma_at(sc: &Scenario, omega: f64, gain: Gain) -> Result<f64> {
    solve(&assemble_with(sc, omega, Actuation::Resolved(gain))?)?.sigma()
}

/// Frequency grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
    pub units: Units,
}

impl Default for GridSpec {
    /// 400 log-spaced points over `[0.1, 10]` Omega_SQL.
    fn default() -> Self {
        Self {
            min: 0.1,
            max: 10.0,
            points: 400,
            log: true,
            units: Units::Normalized,
        }
    }
}

impl GridSpec {
    /// Parses `min:max:n[:log]`.
    pub fn parse(s: &str, units: Units) -> Result<Self> {
        let bad = || Error::config_key(None, "grid", format!("expected min:max:n[:log], got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let min = f64::from_str(parts[0].trim()).map_err(|_| bad())?;
        let max = f64::from_str(parts[1].trim()).map_err(|_| bad())?;
        let points = usize::from_str(parts[2].trim()).map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        let g = Self {
            min,
            max,
            points,
            log,
            units,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::config_key(None, "grid", m));
        if !(self.min.is_finite() && self.max.is_finite() && self.min > 0.0) {
            return err("grid bounds must be finite and > 0");
        }
        if !(self.min < self.max) {
            return err("grid min must be below max");
        }
        if self.points < 2 {
            return err("grid needs at least 2 points");
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Result<Vec<AngularFrequency>> {
        self.validate()?;
        let n = self.points;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                let v = if k == n - 1 {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                };
                AngularFrequency::new(v, self.units)
            })
            .collect()
    }
}

/// Parameters recorded alongside a budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetMeta {
    pub hbar: f64,
    pub xi_a: f64,
    pub xi_b: Option<f64>,
    pub mass: f64,
    /// Interferometer SQL frequency in model units.
    pub omega_sql_a: f64,
    /// `2 xi_a^2`, the normalization of spectra.
    pub sigma_scale: f64,
    pub sensor_loss: f64,
    pub squeeze_r: Option<f64>,
    pub gain_mode: Option<String>,
    pub interferometer_angle: String,
    pub sensor_angle: Option<String>,
}

impl BudgetMeta {
    fn of(sc: &Scenario) -> Self {
        Self {
            hbar: sc.constants.hbar,
            xi_a: sc.xi_a(),
            xi_b: sc.xi_b(),
            mass: sc.end.mass,
            omega_sql_a: sc.omega_sql_a(),
            sigma_scale: sc.sigma_scale(),
            sensor_loss: sc.sensor_loss,
            squeeze_r: sc.squeezing.map(|s| s.r),
            gain_mode: sc.control.map(|c| c.mode.to_string()),
            interferometer_angle: sc.interferometer_readout.rule.to_string(),
            sensor_angle: sc.sensor.as_ref().map(|_| sc.sensor_readout.rule.to_string()),
        }
    }
}

/// Equivalent input noise over a frequency grid, with its per-source decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub name: String,
    pub scenario: ScenarioId,
    pub units: Units,
    pub omega: Vec<f64>,
    pub total: Vec<f64>,
    pub per_source: BTreeMap<SourceId, Vec<f64>>,
    /// Control gain used at each frequency when it was optimized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Vec<Gain>>,
    pub meta: BudgetMeta,
}

impl NoiseBudget {
    /// Re-expresses the budget in another unit system.
    pub fn to_units(&self, units: Units) -> NoiseBudget {
        let (w, s) = match (self.units, units) {
            (a, b) if a == b => (1.0, 1.0),
            (Units::Si, Units::Normalized) => (1.0 / self.meta.omega_sql_a, self.meta.sigma_scale),
            (Units::Normalized, Units::Si) => (self.meta.omega_sql_a, 1.0 / self.meta.sigma_scale),
            _ => unreachable!(),
        };
        NoiseBudget {
            units,
            omega: self.omega.iter().map(|v| v * w).collect(),
            total: self.total.iter().map(|v| v * s).collect(),
            per_source: self
                .per_source
                .iter()
                .map(|(k, v)| (*k, v.iter().map(|x| x * s).collect()))
                .collect(),
            ..self.clone()
        }
    }

    /// Largest relative gap between `total` and the sum of `per_source`.
    pub fn decomposition_defect(&self) -> f64 {
        (0..self.total.len())
            .map(|i| {
                let sum: f64 = self.per_source.values().map(|v| v[i]).sum();
                (sum - self.total[i]).abs() / self.total[i].abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

struct Point {
    total: f64,
    parts: Vec<(SourceId, f64)>,
    gain: Option<Gain>,
}

fn budget_point(sc: &Scenario, omega: f64) -> Result<Point> {
    if sc.id == ScenarioId::SqlEnvelope {
        // on the envelope shot noise and back-action are equal
        let sigma = sc.constants.hbar / (sc.end.mass * omega * omega);
        return Ok(Point {
            total: sigma,
            parts: vec![(SourceId::A0, sigma / 2.0), (SourceId::A90, sigma / 2.0)],
            gain: None,
        });
    }
    let (gain, optimized) = match sc.control.map(|c| c.resolved()) {
        None => (Gain::Off, None),
        Some(Some(g)) => (g, None),
        Some(None) => {
            let sol = optimizer::optimize_gain(sc, omega)?;
            (sol.optimal_gain, Some(sol.sigma_opt))
        }
    };
    let solution = solve(&assemble_with(sc, omega, Actuation::Resolved(gain))?)?;
    let parts = solution.contributions()?;
    let total: f64 = parts.iter().map(|(_, v)| v).sum();
    if let Some(expected) = optimized {
        if (total - expected).abs() > 1e-6 * expected.abs() {
            return Err(Error::Numeric {
                omega,
                detail: format!(
                    "optimized gain gives {total:e} in the network but {expected:e} from the eigen solution"
                ),
            });
        }
    }
    Ok(Point {
        total,
        parts,
        gain: optimized.map(|_| gain),
    })
}

/// Sweeps a scenario over `grid`. Normalized grids give normalized output.
pub fn budget(sc: &Scenario, grid: &[AngularFrequency]) -> Result<NoiseBudget> {
    let units = common_units(grid)?
        .ok_or_else(|| Error::config_key(Some(&sc.name), "grid", "grid is empty"))?;
    if grid.windows(2).any(|w| w[1].value() <= w[0].value()) {
        return Err(Error::config_key(Some(&sc.name), "grid", "grid must be strictly ascending"));
    }
    sc.validate()?;
    let sql_a = sc.omega_sql_a();
    let s_scale = match units {
        Units::Si => 1.0,
        Units::Normalized => sc.sigma_scale(),
    };

    let points: Vec<Point> = grid
        .par_iter()
        .map(|f| budget_point(sc, f.physical(sql_a)).map_err(|e| e.in_scenario(&sc.name)))
        .collect::<Result<_>>()?;

    let mut per_source: BTreeMap<SourceId, Vec<f64>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        for (id, v) in &p.parts {
            per_source.entry(*id).or_insert_with(|| vec![0.0; points.len()])[i] = v * s_scale;
        }
    }
    let gain = points
        .iter()
        .map(|p| p.gain)
        .collect::<Option<Vec<_>>>()
        .filter(|g| !g.is_empty());

    Ok(NoiseBudget {
        name: sc.name.clone(),
        scenario: sc.id,
        units,
        omega: grid.iter().map(|f| f.value()).collect(),
        total: points.iter().map(|p| p.total * s_scale).collect(),
        per_source,
        gain,
        meta: BudgetMeta::of(sc),
    })
}
