//! Per-frequency choice of the control gain.
//!
//! With the control force left open as an input `f`, the network is linear in
//! `f`: the estimator is `o_s + o_f f` and the sensor estimate `x_s + x_f f`.
//! Closing the loop with `f = kappa g Xhat` gives, per noise source `s`,
//!
//! ```text
//! estimator_s = (u_s + g v_s) / (1 - kappa x_f g)
//! u = o_s,   v = kappa (o_f x_s - x_f o_s)
//! ```
//!
//! so `Sigma(g) = w^H N w / w^H D w` with `w = (1, g)`, `N` the
//! spectrum-weighted Gram matrix of `(u, v)` and `D = conj(e) e^T`,
//! `e = (1, -kappa x_f)`. `D` has rank one, so the minimum of the quotient is
//! `1 / (e^T N^-1 conj(e))`, reached at `w = N^-1 conj(e)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::{ControlKind, Gain, GainMode};
use crate::error::{Error, Result};
use crate::network::{assemble_with, sigma_at, solve, Actuation};
use crate::scenarios::Scenario;
use crate::specalg::{SourceId, Symbol};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Residual accepted for the 2x2 eigen solution.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Eigen,
    Grid,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSolution {
    pub omega: f64,
    pub optimal_gain: Gain,
    pub sigma_opt: f64,
    pub method: Method,
    /// Set by the grid oracle when the best sample lies on the region edge.
    pub on_boundary: bool,
}

impl GainSolution {
    pub fn gain_value(&self) -> Option<Complex64> {
        match self.optimal_gain {
            Gain::Off => Some(Complex64::default()),
            Gain::Finite(g) => Some(g),
            Gain::Infinite => None,
        }
    }
}

/// Quadratic-form description of `Sigma(g)` at one frequency.
#[derive(Debug, Clone)]
pub struct GainQuotient {
    pub omega: f64,
    /// Rows of `(u_s, v_s)` with the spectrum `S_s`.
    pub sources: Vec<(SourceId, f64, Complex64, Complex64)>,
    /// `e = (1, -kappa x_f)`.
    pub e1: Complex64,
}

type Mat2 = [[Complex64; 2]; 2];

impl GainQuotient {
    /// `N_jk = sum_s S_s conj(c_j) c_k` with `c = (u, v)`.
    pub fn numerator(&self) -> Mat2 {
        let mut n = [[Complex64::default(); 2]; 2];
        for &(_, s, u, v) in &self.sources {
            let c = [u, v];
            for j in 0..2 {
                for k in 0..2 {
                    n[j][k] += c[j].conj() * c[k] * s;
                }
            }
        }
        n
    }

    pub fn denominator(&self) -> Mat2 {
        let e = [Complex64::new(1.0, 0.0), self.e1];
        [[e[0].conj() * e[0], e[0].conj() * e[1]], [e[1].conj() * e[0], e[1].conj() * e[1]]]
    }

    /// `Sigma` at a finite gain.
    pub fn sigma(&self, g: Complex64) -> f64 {
        let num: f64 = self.sources.iter().map(|&(_, s, u, v)| s * (u + g * v).norm_sqr()).sum();
        num / (Complex64::new(1.0, 0.0) + self.e1 * g).norm_sqr()
    }

    /// `Sigma` in the infinite-gain limit; infinite when the loop cannot close.
    pub fn sigma_infinite(&self) -> f64 {
        let num: f64 = self.sources.iter().map(|&(_, s, _, v)| s * v.norm_sqr()).sum();
        let den = self.e1.norm_sqr();
        if den == 0.0 {
            if num == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            num / den
        }
    }
}

fn loop_factor(sc: &Scenario, omega: f64) -> Result<Complex64> {
    let control = sc.control.ok_or_else(|| {
        Error::config_key(Some(&sc.name), "gain", "scenario has no control law to optimize")
    })?;
    Ok(match control.kind {
        ControlKind::FeedbackToEnd => I * omega,
        ControlKind::FeedforwardToInput => {
            let input = sc.input.as_ref().ok_or_else(|| {
                Error::config_key(Some(&sc.name), "id", "feedforward needs an input mirror")
            })?;
            -I * omega * input.impedance_at(omega)
        }
        ControlKind::SignalSubtraction => Complex64::new(1.0, 0.0),
    })
}

/// Splits the open-loop network into the `(u, v, e)` description.
pub fn decompose(sc: &Scenario, omega: f64) -> Result<GainQuotient> {
    let kappa = loop_factor(sc, omega)?;
    let open = solve(&assemble_with(sc, omega, Actuation::Open)?)?;
    let sensed = open.sensor_estimator.as_ref().ok_or_else(|| {
        Error::config_key(Some(&sc.name), "id", "gain optimization needs a sensor")
    })?;
    let o_f = open.estimator.coeff(Symbol::Actuator);
    let x_f = sensed.coeff(Symbol::Actuator);
    let mut sources = Vec::new();
    for src in open.registry.iter() {
        let o_s = open.estimator.coeff(src.id);
        let x_s = sensed.coeff(src.id);
        let v = kappa * (o_f * x_s - x_f * o_s);
        sources.push((src.id, src.spectrum.at(omega), o_s, v));
    }
    Ok(GainQuotient {
        omega,
        sources,
        e1: -kappa * x_f,
    })
}

/// Minimizes `Sigma` over one complex gain at one frequency.
pub fn optimize_gain(sc: &Scenario, omega: f64) -> Result<GainSolution> {
    if let Some(c) = sc.control {
        if c.mode != GainMode::Optimized {
            return Err(Error::config_key(
                Some(&sc.name),
                "gain",
                format!("gain mode is `{}`, not `optimized`", c.mode),
            ));
        }
    }
    let q = decompose(sc, omega)?;
    let numeric = |detail: String| Error::Numeric { omega, detail };

    let n = q.numerator();
    let d = q.denominator();
    let scale = (n[0][0].re + n[1][1].re).max(f64::MIN_POSITIVE);
    let ns = n.map(|row| row.map(|c| c / scale));
    let det = (ns[0][0] * ns[1][1] - ns[0][1] * ns[1][0]).re;
    if !(ns[0][0].re > 0.0 && det > 1e-14) {
        return Err(numeric(format!(
            "noise form is not positive definite (trace {scale:e}, scaled determinant {det:e}); \
             the sensor estimate carries no independent information"
        )));
    }
    // w = adj(N) conj(e)
    let e = [Complex64::new(1.0, 0.0), q.e1];
    let ec = [e[0].conj(), e[1].conj()];
    let w = [
        ns[1][1] * ec[0] - ns[0][1] * ec[1],
        -ns[1][0] * ec[0] + ns[0][0] * ec[1],
    ];
    let ew = e[0] * w[0] + e[1] * w[1];
    let lambda = det / ew.re * scale;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(numeric(format!("pencil eigenvalue {lambda:e} is not positive")));
    }

    // (N - lambda D) w = 0
    let wn = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let mut resid = 0.0f64;
    for j in 0..2 {
        let r: Complex64 = (0..2)
            .map(|k| (ns[j][k] - d[j][k] * (lambda / scale)) * w[k])
            .sum();
        resid = resid.max(r.norm());
    }
    let dn = d.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let resid = resid / (wn * (1.0 + dn * lambda / scale));
    if resid > EIGEN_RESIDUAL_TOL {
        return Err(numeric(format!("eigenvector residual {resid:e}")));
    }

    let sigma_zero = q.sigma(Complex64::default());
    let sigma_inf = q.sigma_infinite();
    let tie = lambda * (1.0 + 1e-12);
    if sigma_zero <= tie {
        return Ok(GainSolution {
            omega,
            optimal_gain: Gain::Finite(Complex64::default()),
            sigma_opt: sigma_zero,
            method: Method::Eigen,
            on_boundary: false,
        });
    }

    let (gain, sigma) = if w[0].norm() <= 1e-13 * wn {
        (Gain::Infinite, sigma_inf)
    } else {
        let g = w[1] / w[0];
        (Gain::Finite(g), q.sigma(g))
    };
    if matches!(gain, Gain::Infinite)
        && sc.control.map(|c| c.kind) != Some(ControlKind::FeedbackToEnd)
    {
        return Err(numeric("optimum lies at infinite gain, which only feedback can realize".into()));
    }
    if (sigma - lambda).abs() > 1e-9 * lambda || sigma > sigma_zero * (1.0 + 1e-9) || sigma > sigma_inf * (1.0 + 1e-9) {
        return Err(numeric(format!(
            "eigen solution {lambda:e} does not match Sigma(g*) = {sigma:e} \
             (Sigma(0) = {sigma_zero:e}, Sigma(inf) = {sigma_inf:e})"
        )));
    }
    Ok(GainSolution {
        omega,
        optimal_gain: gain,
        sigma_opt: sigma,
        method: Method::Eigen,
        on_boundary: false,
    })
}

/// Axis-aligned rectangle in the complex gain plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRegion {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl GainRegion {
    pub fn square(center: Complex64, half_width: f64) -> Self {
        Self {
            re: (center.re - half_width, center.re + half_width),
            im: (center.im - half_width, center.im + half_width),
        }
    }

    /// Square centred on 0 reaching ten times the magnitude of `reference`.
    /// Falls back to the end-mirror impedance scale when there is no finite reference.
    pub fn around(sc: &Scenario, omega: f64, reference: Option<Complex64>) -> Self {
        let fallback = sc.end.impedance_at(omega).norm();
        let half = match reference {
            Some(g) if g.norm() > 0.0 && g.norm().is_finite() => 10.0 * g.norm(),
            _ => 10.0 * fallback,
        };
        Self::square(Complex64::default(), half)
    }

    fn sample(&self, n: usize, i: usize, j: usize) -> Complex64 {
        let t = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        Complex64::new(t(self.re.0, self.re.1, i), t(self.im.0, self.im.1, j))
    }
}

fn grid_min(sc: &Scenario, omega: f64, region: &GainRegion, n: usize) -> Result<(Complex64, f64, bool)> {
    let best = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let g = region.sample(n, i, j);
            sigma_at(sc, omega, Gain::Finite(g)).map(|s| (k, g, s))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        // ties go to the smaller gain, then to the lower index
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.1.norm().total_cmp(&b.1.norm())).then(a.0.cmp(&b.0)))
        .expect("n >= 2");
    let (i, j) = (best.0 / n, best.0 % n);
    let edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
    Ok((best.1, best.2, edge))
}

/// Brute-force minimum of the closed-loop network over `n x n` samples of `region`.
pub fn grid_search_oracle(sc: &Scenario, omega: f64, region: GainRegion, n: usize) -> Result<GainSolution> {
    if n < 2 {
        return Err(Error::config_key(Some(&sc.name), "grid", "oracle needs n >= 2"));
    }
    let (g, sigma, edge) = grid_min(sc, omega, &region, n)?;
    Ok(GainSolution {
        omega,
        optimal_gain: Gain::Finite(g),
        sigma_opt: sigma,
        method: Method::Grid,
        on_boundary: edge,
    })
}

/// Grid search followed by `levels` zooms around the best sample.
pub fn refine_oracle(
    sc: &Scenario,
    omega: f64,
    region: GainRegion,
    n: usize,
    levels: usize,
) -> Result<GainSolution> {
    let first = grid_search_oracle(sc, omega, region, n)?;
    let mut best = first;
    let mut g = first.gain_value().expect("grid gains are finite");
    let mut step = (
        (region.re.1 - region.re.0) / (n - 1) as f64,
        (region.im.1 - region.im.0) / (n - 1) as f64,
    );
    for _ in 0..levels {
        let zoom = GainRegion {
            re: (g.re - step.0, g.re + step.0),
            im: (g.im - step.1, g.im + step.1),
        };
        let m = 21;
        let (gz, sz, _) = grid_min(sc, omega, &zoom, m)?;
        if sz < best.sigma_opt {
            best.sigma_opt = sz;
            best.optimal_gain = Gain::Finite(gz);
            g = gz;
        }
        step = (2.0 * step.0 / (m - 1) as f64, 2.0 * step.1 / (m - 1) as f64);
    }
    best.method = Method::Refine;
    best.on_boundary = first.on_boundary;
    Ok(best)
}

/// Golden-section minimum of a unimodal function on `[lo, hi]`.
pub fn minimize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (c.abs() + d.abs()).max(tol) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}
