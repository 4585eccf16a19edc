//! ARIMA and seasonal ARIMA models
//!
//! `Φ(B) Φ_s(B^s) ∇^d ∇_s^D y_t = c + Θ(B) Θ_s(B^s) e_t`, with every lag
//! polynomial written as `1 - c_1 B - ... - c_n B^n`.
//!
//! Fitting maximizes the conditional Gaussian likelihood of the
//! differenced series: pre-sample residuals are zero, the innovation
//! variance is concentrated out, and AR/MA coefficients are optimized in
//! partial-autocorrelation coordinates so every candidate is stationary
//! and invertible. Starting values come from a Hannan-Rissanen regression.

mod diff;
pub mod poly;

use std::fmt::Write as _;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use diff::{difference, integrate};

use crate::error::{Error, Result};
use crate::forecast::Forecaster;
use crate::optim::{self, BfgsOptions, Deadline};

/// Smallest admissible root modulus of any fitted lag polynomial.
pub const ROOT_MARGIN: f64 = 1.001;

/// Largest |partial autocorrelation| reachable by the optimizer.
const MAX_PARTIAL: f64 = 0.999_999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    /// Season length in steps, 0 for a non-seasonal model.
    pub season: usize,
    pub include_constant: bool,
}

impl ArimaSpec {
    pub const fn arima(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            season: 0,
            include_constant: true,
        }
    }

    pub const fn sarima(
        (p, d, q): (usize, usize, usize),
        (seasonal_p, seasonal_d, seasonal_q): (usize, usize, usize),
        season: usize,
    ) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            season,
            include_constant: true,
        }
    }

    pub const fn without_constant(mut self) -> Self {
        self.include_constant = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.season == 0 && (self.seasonal_p + self.seasonal_d + self.seasonal_q) > 0 {
            return Err(Error::Config("seasonal orders need a season length".into()));
        }
        if self.season == 1 {
            return Err(Error::Config(
                "a season of one step duplicates the non-seasonal part".into(),
            ));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q + usize::from(self.include_constant)
    }

    /// Values lost to differencing.
    pub fn differencing_loss(&self) -> usize {
        self.d + self.seasonal_d * self.season
    }

    /// Training length required before fitting is attempted.
    pub fn min_training_len(&self) -> usize {
        10 * (self.p + self.q + self.seasonal_p + self.seasonal_q + 1) + self.differencing_loss()
    }

    fn ar_order(&self) -> usize {
        self.p + self.seasonal_p * self.season
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaCoefficients {
    pub constant: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
}

impl ArimaCoefficients {
    pub fn zeros(spec: &ArimaSpec) -> Self {
        Self {
            constant: 0.0,
            phi: vec![0.0; spec.p],
            theta: vec![0.0; spec.q],
            seasonal_phi: vec![0.0; spec.seasonal_p],
            seasonal_theta: vec![0.0; spec.seasonal_q],
        }
    }

    fn check_shape(&self, spec: &ArimaSpec) -> Result<()> {
        let shape = [
            (self.phi.len(), spec.p),
            (self.theta.len(), spec.q),
            (self.seasonal_phi.len(), spec.seasonal_p),
            (self.seasonal_theta.len(), spec.seasonal_q),
        ];
        for (found, expected) in shape {
            if found != expected {
                return Err(Error::Dimension { expected, found });
            }
        }
        Ok(())
    }
}

/// Products of the factor polynomials, as right-hand-side terms.
#[derive(Debug, Clone)]
struct Expanded {
    constant: f64,
    /// `(lag, a)` in `w_t = c + Σ a w_{t-lag} + e_t - Σ b e_{t-lag}`.
    ar: Vec<(usize, f64)>,
    /// `(lag, b)`.
    ma: Vec<(usize, f64)>,
    ar_order: usize,
}

impl Expanded {
    fn new(spec: &ArimaSpec, coefs: &ArimaCoefficients) -> Self {
        let ar = poly::multiply(
            &poly::lag_polynomial(&coefs.phi),
            &poly::seasonal_lag_polynomial(&coefs.seasonal_phi, spec.season.max(1)),
        );
        let ma = poly::multiply(
            &poly::lag_polynomial(&coefs.theta),
            &poly::seasonal_lag_polynomial(&coefs.seasonal_theta, spec.season.max(1)),
        );
        Self {
            constant: coefs.constant,
            ar: poly::rhs_terms(&ar),
            ma: poly::rhs_terms(&ma),
            ar_order: ar.len() - 1,
        }
    }

    /// Residuals of `w` (zero before `ar_order`) and the sum of squares over
    /// the positions selected by `mask`.
    fn residuals(&self, w: &[f64], mask: Option<&[bool]>) -> (Vec<f64>, f64, usize) {
        let mut e = vec![0.0; w.len()];
        let mut sse = 0.0;
        let mut count = 0;
        for t in self.ar_order..w.len() {
            let mut pred = self.constant;
            for &(lag, a) in &self.ar {
                pred += a * w[t - lag];
            }
            // Θ(B) e_t = e_t - Σ b e_{t-lag}, so e_t = w_t - pred + Σ b e_{t-lag}
            let mut resid = w[t] - pred;
            for &(lag, b) in &self.ma {
                if lag <= t {
                    resid += b * e[t - lag];
                }
            }
            e[t] = resid;
            if mask.map_or(true, |m| m[t]) {
                sse += resid * resid;
                count += 1;
            }
        }
        (e, sse, count)
    }
}

/// Conditional Gaussian log-likelihood (variance concentrated out) of
/// `series` under `coefs`, with only the positions in `mask` counted.
pub fn conditional_log_likelihood(
    series: &[f64],
    mask: Option<&[bool]>,
    spec: &ArimaSpec,
    coefs: &ArimaCoefficients,
) -> Result<f64> {
    coefs.check_shape(spec)?;
    let w = difference(series, spec.d, spec.seasonal_d, spec.season)?;
    let w_mask = mask.map(|m| m[spec.differencing_loss()..].to_vec());
    let (_, sse, n) = Expanded::new(spec, coefs).residuals(&w, w_mask.as_deref());
    Ok(log_likelihood(sse, n))
}

fn log_likelihood(sse: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let n = n as f64;
    let sigma2 = (sse / n).max(f64::MIN_POSITIVE);
    -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0)
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub timeout: Option<Duration>,
    pub bfgs: BfgsOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            timeout: Some(Duration::from_secs(60)),
            bfgs: BfgsOptions::default(),
        }
    }
}

/// A fitted (S)ARIMA model, immutable after fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub coefficients: ArimaCoefficients,
    pub residual_variance: f64,
    pub log_likelihood: f64,
    level_lags: Vec<usize>,
    level_coefs: Vec<f64>,
    ma_lags: Vec<usize>,
    ma_coefs: Vec<f64>,
}

struct Layout {
    spec: ArimaSpec,
}

impl Layout {
    fn len(&self) -> usize {
        self.spec.parameter_count()
    }

    fn unpack(&self, u: &[f64]) -> ArimaCoefficients {
        let s = &self.spec;
        let mut at = 0;
        let mut take = |n: usize| {
            let part = &u[at..at + n];
            at += n;
            part
        };
        let constant = if s.include_constant { take(1)[0] } else { 0.0 };
        let group = |part: &[f64]| {
            poly::pacf_to_coefficients(
                &part
                    .iter()
                    .map(|v| v.tanh().clamp(-MAX_PARTIAL, MAX_PARTIAL))
                    .collect::<Vec<_>>(),
            )
        };
        let phi = group(take(s.p));
        let theta = group(take(s.q));
        let seasonal_phi = group(take(s.seasonal_p));
        let seasonal_theta = group(take(s.seasonal_q));
        ArimaCoefficients {
            constant,
            phi,
            theta,
            seasonal_phi,
            seasonal_theta,
        }
    }

    fn pack(&self, coefs: &ArimaCoefficients) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.len());
        if self.spec.include_constant {
            u.push(coefs.constant);
        }
        for group in [&coefs.phi, &coefs.theta, &coefs.seasonal_phi, &coefs.seasonal_theta] {
            match poly::coefficients_to_pacf(group) {
                Some(partials) => u.extend(partials.iter().map(|r| r.clamp(-0.95, 0.95).atanh())),
                None => u.extend(std::iter::repeat(0.0).take(group.len())),
            }
        }
        u
    }
}

fn least_squares(rows: &[Vec<f64>], targets: &[f64]) -> Option<Vec<f64>> {
    let cols = rows.first()?.len();
    if cols == 0 || rows.len() <= cols {
        return None;
    }
    let x = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(targets);
    let beta = x.svd(true, true).solve(&y, 1e-12).ok()?;
    beta.iter()
        .all(|v| v.is_finite())
        .then(|| beta.iter().copied().collect())
}

/// Hannan-Rissanen starting values for the non-seasonal part.
fn initial_coefficients(w: &[f64], spec: &ArimaSpec) -> ArimaCoefficients {
    let mut coefs = ArimaCoefficients::zeros(spec);
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let centered: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let (p, q) = (spec.p, spec.q);

    let mut innovations = vec![0.0; w.len()];
    if q > 0 {
        let long = (p + q + 5).max(10).min(w.len() / 10);
        if long > 0 {
            let rows: Vec<Vec<f64>> = (long..w.len())
                .map(|t| (1..=long).map(|l| centered[t - l]).collect())
                .collect();
            if let Some(ar) = least_squares(&rows, &centered[long..]) {
                for t in long..w.len() {
                    let pred: f64 = (1..=long).map(|l| ar[l - 1] * centered[t - l]).sum();
                    innovations[t] = centered[t] - pred;
                }
            }
        }
    }
    if p + q > 0 {
        let start = (p.max(q) + if q > 0 { (p + q + 5).max(10) } else { 0 }).min(w.len());
        let rows: Vec<Vec<f64>> = (start..w.len())
            .map(|t| {
                (1..=p)
                    .map(|l| centered[t - l])
                    .chain((1..=q).map(|l| innovations[t - l]))
                    .collect()
            })
            .collect();
        if let Some(beta) = least_squares(&rows, &centered[start..]) {
            coefs.phi = beta[..p].to_vec();
            // e_t - θ e_{t-1}: regression coefficient on e_{t-1} is -θ
            coefs.theta = beta[p..].iter().map(|b| -b).collect();
        }
    }
    for group in [&mut coefs.phi, &mut coefs.theta] {
        if poly::max_inverse_root(group) >= 0.99 {
            group.iter_mut().for_each(|c| *c = 0.0);
        }
    }
    if spec.include_constant {
        coefs.constant = mean * (1.0 - coefs.phi.iter().sum::<f64>());
    }
    coefs
}

/// Fits `spec` to `series` by conditional maximum likelihood. When `mask`
/// is given, only residuals at positions marked true enter the objective;
/// masked values still act as lagged inputs.
pub fn fit_arima(series: &[f64], mask: Option<&[bool]>, spec: &ArimaSpec, options: &FitOptions) -> Result<ArimaModel> {
    spec.validate()?;
    if let Some(m) = mask {
        if m.len() != series.len() {
            return Err(Error::Dimension {
                expected: series.len(),
                found: m.len(),
            });
        }
    }
    if series.len() < spec.min_training_len() {
        return Err(Error::Range(format!(
            "ARIMA fit needs {} training values, got {}",
            spec.min_training_len(),
            series.len()
        )));
    }
    let w = difference(series, spec.d, spec.seasonal_d, spec.season)?;
    if w.len() <= spec.ar_order() + spec.parameter_count() {
        return Err(Error::Range(format!(
            "{} differenced values do not cover AR order {}",
            w.len(),
            spec.ar_order()
        )));
    }
    let w_mask = mask.map(|m| m[spec.differencing_loss()..].to_vec());
    // scale to unit variance so tolerances are meaningful for W/m² and
    // transmissivity alike
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
    let scale = if sd > 1e-12 { sd } else { 1.0 };
    let scaled: Vec<f64> = w.iter().map(|v| v / scale).collect();

    let layout = Layout { spec: *spec };
    let start = layout.pack(&initial_coefficients(&scaled, spec));
    let deadline = Deadline::after(options.timeout);
    let objective = |u: &[f64]| -> Result<f64> {
        deadline.check()?;
        let coefs = layout.unpack(u);
        let (_, sse, n) = Expanded::new(spec, &coefs).residuals(&scaled, w_mask.as_deref());
        if n == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(sse / n as f64)
    };
    let minimum = optim::minimize_bfgs(objective, &start, &options.bfgs)?;
    if !minimum.converged || !minimum.value.is_finite() {
        return Err(Error::UnstableModel(format!(
            "optimizer did not converge after {} iterations",
            minimum.iterations
        )));
    }
    let mut coefficients = layout.unpack(&minimum.x);
    coefficients.constant *= scale;
    for (name, group) in [
        ("AR", &coefficients.phi),
        ("MA", &coefficients.theta),
        ("seasonal AR", &coefficients.seasonal_phi),
        ("seasonal MA", &coefficients.seasonal_theta),
    ] {
        let inverse = poly::max_inverse_root(group);
        if !(inverse * ROOT_MARGIN <= 1.0) {
            return Err(Error::UnstableModel(format!(
                "{name} polynomial has a root of modulus {:.6}",
                1.0 / inverse
            )));
        }
    }
    let (_, sse, n) = Expanded::new(spec, &coefficients).residuals(&w, w_mask.as_deref());
    if n == 0 || !sse.is_finite() {
        return Err(Error::UnstableModel("no residuals to evaluate".into()));
    }
    let mut model = ArimaModel::from_coefficients(*spec, coefficients)?;
    model.residual_variance = (sse / n as f64).max(f64::MIN_POSITIVE);
    model.log_likelihood = log_likelihood(sse, n);
    Ok(model)
}

impl ArimaModel {
    /// Model with given coefficients (no fitting). Residual variance is set
    /// to 1 and the log-likelihood to NaN until known.
    pub fn from_coefficients(spec: ArimaSpec, coefficients: ArimaCoefficients) -> Result<Self> {
        spec.validate()?;
        coefficients.check_shape(&spec)?;
        let expanded = Expanded::new(&spec, &coefficients);
        let stationary_part = poly::multiply(
            &poly::lag_polynomial(&coefficients.phi),
            &poly::seasonal_lag_polynomial(&coefficients.seasonal_phi, spec.season.max(1)),
        );
        let level = poly::multiply(
            &stationary_part,
            &poly::differencing_polynomial(spec.d, spec.seasonal_d, spec.season),
        );
        let (level_lags, level_coefs) = poly::rhs_terms(&level).into_iter().map(|(lag, c)| (lag - 1, c)).unzip();
        // stored negated so that predictions add `ma_coefs · e`
        let (ma_lags, ma_coefs) = expanded.ma.iter().map(|&(lag, b)| (lag - 1, -b)).unzip();
        Ok(Self {
            spec,
            coefficients,
            residual_variance: 1.0,
            log_likelihood: f64::NAN,
            level_lags,
            level_coefs,
            ma_lags,
            ma_coefs,
        })
    }

    /// One-step conditional expectation from level lags and past
    /// innovations (ordered as [`Forecaster::required_lags`] and
    /// [`Forecaster::innovation_lags`]).
    pub fn predict_one(&self, lags: &[f64], innovations: &[f64]) -> f64 {
        let ar: f64 = self.level_coefs.iter().zip(lags).map(|(a, y)| a * y).sum();
        let ma: f64 = self.ma_coefs.iter().zip(innovations).map(|(b, e)| b * e).sum();
        self.coefficients.constant + ar + ma
    }

    /// Multi-step forecast in the differenced domain, integrated back to
    /// levels. An independent route to the level-space recursion used by
    /// [`Forecaster`].
    pub fn forecast_via_differences(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let s = &self.spec;
        let w = difference(history, s.d, s.seasonal_d, s.season)?;
        let expanded = Expanded::new(s, &self.coefficients);
        let (e, _, _) = expanded.residuals(&w, None);
        let mut w_ext = w.clone();
        let mut e_ext = e;
        for _ in 0..horizon {
            let t = w_ext.len();
            let mut pred = expanded.constant;
            for &(lag, a) in &expanded.ar {
                pred += a * w_ext[t - lag];
            }
            for &(lag, b) in &expanded.ma {
                if lag <= t {
                    pred -= b * e_ext[t - lag];
                }
            }
            w_ext.push(pred);
            e_ext.push(0.0);
        }
        integrate(&w_ext[w.len()..], history, s.d, s.seasonal_d, s.season)
    }

    /// Self-describing single-line text record.
    pub fn to_record(&self) -> String {
        let s = &self.spec;
        let list = |v: &[f64]| {
            let mut out = String::from("[");
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{x:?}").unwrap();
            }
            out.push(']');
            out
        };
        let c = &self.coefficients;
        format!(
            "arima p={} d={} q={} P={} D={} Q={} s={} constant={} c={:?} phi={} theta={} sphi={} stheta={} sigma2={:?}",
            s.p,
            s.d,
            s.q,
            s.seasonal_p,
            s.seasonal_d,
            s.seasonal_q,
            s.season,
            s.include_constant,
            c.constant,
            list(&c.phi),
            list(&c.theta),
            list(&c.seasonal_phi),
            list(&c.seasonal_theta),
            self.residual_variance
        )
    }

    pub fn from_record(record: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse {
            line: 1,
            message: format!("ARIMA record: {what}"),
        };
        let mut fields = record.split_whitespace();
        if fields.next() != Some("arima") {
            return Err(bad("missing 'arima' tag"));
        }
        let mut map = std::collections::HashMap::new();
        for field in fields {
            let (k, v) = field.split_once('=').ok_or_else(|| bad(field))?;
            map.insert(k, v);
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
        let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(k)) };
        let float = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(k)) };
        let list = |k: &str| -> Result<Vec<f64>> {
            let text = get(k)?;
            let inner = text
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| bad(k))?;
            if inner.is_empty() {
                return Ok(Vec::new());
            }
            inner.split(',').map(|x| x.parse().map_err(|_| bad(k))).collect()
        };
        let spec = ArimaSpec {
            p: int("p")?,
            d: int("d")?,
            q: int("q")?,
            seasonal_p: int("P")?,
            seasonal_d: int("D")?,
            seasonal_q: int("Q")?,
            season: int("s")?,
            include_constant: get("constant")?.parse().map_err(|_| bad("constant"))?,
        };
        let coefficients = ArimaCoefficients {
            constant: float("c")?,
            phi: list("phi")?,
            theta: list("theta")?,
            seasonal_phi: list("sphi")?,
            seasonal_theta: list("stheta")?,
        };
        let mut model = Self::from_coefficients(spec, coefficients)?;
        model.residual_variance = float("sigma2")?;
        Ok(model)
    }
}

impl Forecaster for ArimaModel {
    fn required_lags(&self) -> &[usize] {
        &self.level_lags
    }

    fn innovation_lags(&self) -> &[usize] {
        &self.ma_lags
    }

    fn predict_one(&self, lags: &[f64], innovations: &[f64]) -> Result<f64> {
        if lags.len() != self.level_lags.len() {
            return Err(Error::Dimension {
                expected: self.level_lags.len(),
                found: lags.len(),
            });
        }
        if innovations.len() != self.ma_lags.len() {
            return Err(Error::Dimension {
                expected: self.ma_lags.len(),
                found: innovations.len(),
            });
        }
        Ok(ArimaModel::predict_one(self, lags, innovations))
    }

    /// Level-space one-step residuals; zero until the full lag window is
    /// available.
    fn innovations(&self, series: &[f64]) -> Vec<f64> {
        let mut e = vec![0.0; series.len()];
        let start = self.level_lags.iter().max().map_or(0, |m| m + 1);
        for t in start..series.len() {
            let mut pred = self.coefficients.constant;
            for (&lag, &a) in self.level_lags.iter().zip(&self.level_coefs) {
                pred += a * series[t - 1 - lag];
            }
            for (&lag, &b) in self.ma_lags.iter().zip(&self.ma_coefs) {
                if lag < t {
                    pred += b * e[t - 1 - lag];
                }
            }
            e[t] = series[t] - pred;
        }
        e
    }

    fn history_len(&self) -> usize {
        self.level_lags.iter().max().map_or(1, |m| m + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{recursive_forecast, Persistence};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    #[test]
    fn random_walk_equals_persistence() {
        let model = ArimaModel::from_coefficients(
            ArimaSpec::arima(0, 1, 0).without_constant(),
            ArimaCoefficients::zeros(&ArimaSpec::arima(0, 1, 0)),
        )
        .unwrap();
        let history = noise(50, 3);
        let innov = model.innovations(&history);
        let a = recursive_forecast(&model, &history, &innov, 12).unwrap();
        let b = recursive_forecast(&Persistence, &history, &[], 12).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn ar1_linear_recursion() {
        let spec = ArimaSpec::arima(1, 0, 0);
        let mut coefs = ArimaCoefficients::zeros(&spec);
        coefs.phi = vec![0.5];
        let model = ArimaModel::from_coefficients(spec, coefs).unwrap();
        assert_eq!(model.predict_one(&[2.0], &[]), 1.0);
    }

    #[test]
    fn ma1_with_zero_shock_predicts_constant() {
        let spec = ArimaSpec::arima(0, 0, 1);
        let mut coefs = ArimaCoefficients::zeros(&spec);
        coefs.theta = vec![0.4];
        coefs.constant = 2.5;
        let model = ArimaModel::from_coefficients(spec, coefs).unwrap();
        assert_eq!(model.required_lags(), &[] as &[usize]);
        assert_eq!(model.innovation_lags(), &[0]);
        assert_eq!(model.predict_one(&[], &[0.0]), 2.5);
        // e_t - 0.4 e_{t-1}: a unit shock lowers the next prediction by 0.4
        assert!((model.predict_one(&[], &[1.0]) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn white_noise_gives_small_ar_coefficient() {
        let y = noise(10_000, 11);
        let model = fit_arima(&y, None, &ArimaSpec::arima(1, 0, 0), &FitOptions::default()).unwrap();
        assert!(model.coefficients.phi[0].abs() < 0.05, "{:?}", model.coefficients);
    }

    #[test]
    fn short_training_is_a_range_error() {
        let y = noise(15, 1);
        assert!(matches!(
            fit_arima(&y, None, &ArimaSpec::arima(1, 0, 0), &FitOptions::default()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn explosive_series_is_unstable() {
        let y: Vec<f64> = (0..300).map(|t| 1.05_f64.powi(t)).collect();
        let err = fit_arima(&y, None, &ArimaSpec::arima(1, 0, 0), &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnstableModel(_)), "{err}");
    }

    #[test]
    fn record_round_trip() {
        let spec = ArimaSpec::sarima((1, 0, 1), (1, 1, 0), 4);
        let coefs = ArimaCoefficients {
            constant: -0.125,
            phi: vec![0.3],
            theta: vec![0.1 + 0.2],
            seasonal_phi: vec![-0.7],
            seasonal_theta: vec![],
        };
        let mut model = ArimaModel::from_coefficients(spec, coefs).unwrap();
        model.residual_variance = 0.123456789;
        let back = ArimaModel::from_record(&model.to_record()).unwrap();
        assert_eq!(back.spec, model.spec);
        assert_eq!(back.coefficients, model.coefficients);
        assert_eq!(back.residual_variance, model.residual_variance);
        assert!(ArimaModel::from_record("arima p=1").is_err());
    }

    #[test]
    fn seasonal_spec_validation() {
        assert!(ArimaSpec::sarima((1, 0, 0), (1, 0, 0), 0).validate().is_err());
        assert!(ArimaSpec::sarima((1, 0, 0), (0, 0, 0), 96).validate().is_ok());
    }
}
