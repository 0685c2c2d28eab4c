//! Negative-binomial generalized additive model with a penalized
//! cubic-spline smooth of weekly post counts and a lag-2 linear
//! covariate of observed incidence.
//!
//! Fitting is penalized IRLS with step halving, so the penalized
//! log-likelihood never decreases between iterations. The smoothing
//! parameter comes from GCV, the dispersion from a golden-section
//! search on the profile likelihood, and the smooth carries a
//! sum-to-zero constraint so the intercept stays identifiable.

pub mod basis;

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Region, Week, WeeklySeries};
use crate::special::ln_gamma;
pub use basis::SplineBasis;

/// ILI percentages are multiplied by this before fitting so the
/// response has count-like magnitudes.
pub const RESPONSE_SCALE: f64 = 100.0;
pub const DEFAULT_BASIS_DIM: usize = 10;

const MAX_IRLS_ITER: usize = 200;
const COEF_TOL: f64 = 1e-8;
const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GamError {
    #[error("basis dimension must be at least 3, got {k}")]
    BasisTooSmall { k: usize },
    #[error("need {need} distinct covariate values, got {have}")]
    InsufficientDistinctValues { have: usize, need: usize },
    #[error("series has {usable} usable weeks after dropping the first two, need {need}")]
    SeriesTooShort { usable: usize, need: usize },
    #[error("adjusted counts missing; run the carry-forward adjustment first")]
    MissingAdjusted,
    #[error("response must be strictly positive for log-scale metrics")]
    NonPositiveResponse,
    #[error("lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("fits were made on different responses")]
    ResponseMismatch,
    #[error("null deviance is zero")]
    NullDevianceZero,
    #[error(
        "no convergence after {iterations} iterations (last relative change {last_change:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        /// Penalized log-likelihood per iteration, for diagnosis.
        trace: Vec<f64>,
    },
    #[error("linear solve failed (singular working system)")]
    SingularSystem,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The four model forms compared in the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    LagOnly,
    SmoothOnly,
    SmoothLag,
    AdjustedSmoothLag,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 4] = [
        ModelSpec::LagOnly,
        ModelSpec::SmoothOnly,
        ModelSpec::SmoothLag,
        ModelSpec::AdjustedSmoothLag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::LagOnly => "lag_only",
            ModelSpec::SmoothOnly => "smooth_only",
            ModelSpec::SmoothLag => "smooth_lag",
            ModelSpec::AdjustedSmoothLag => "adjusted_smooth_lag",
        }
    }

    pub fn parse(s: &str) -> Option<ModelSpec> {
        ModelSpec::ALL.into_iter().find(|spec| spec.name() == s)
    }

    fn has_smooth(self) -> bool {
        !matches!(self, ModelSpec::LagOnly)
    }

    fn has_lag(self) -> bool {
        !matches!(self, ModelSpec::SmoothOnly)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Negative-binomial log-likelihood with dispersion `kappa`
/// (variance mu + mu^2/kappa), continuous in y via the gamma function.
pub fn nb_loglik(y: &[f64], mu: &[f64], kappa: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            ln_gamma(y + kappa) - ln_gamma(kappa) - ln_gamma(y + 1.0)
                + kappa * kappa.ln()
                + y * m.ln()
                - (y + kappa) * (m + kappa).ln()
        })
        .sum()
}

fn nb_unit_deviance(y: f64, mu: f64, kappa: f64) -> f64 {
    let term1 = if y > 0.0 { y * (y / mu).ln() } else { 0.0 };
    // (y+kappa)*ln((y+kappa)/(mu+kappa)) via ln_1p for the Poisson limit
    let term2 = (y + kappa) * ((y - mu) / (mu + kappa)).ln_1p();
    2.0 * (term1 - term2)
}

/// Total negative-binomial deviance; reduces to the Poisson deviance as
/// kappa grows.
pub fn nb_deviance(y: &[f64], mu: &[f64], kappa: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| nb_unit_deviance(y, m, kappa))
        .sum()
}

/// Root-mean-square error of ln(observed) against ln(fitted).
pub fn log_rmse(observed: &[f64], fitted: &[f64]) -> Result<f64, GamError> {
    if observed.len() != fitted.len() {
        return Err(GamError::LengthMismatch {
            left: observed.len(),
            right: fitted.len(),
        });
    }
    let mut sum = 0.0;
    for (&y, &m) in observed.iter().zip(fitted) {
        if y <= 0.0 || m <= 0.0 {
            return Err(GamError::NonPositiveResponse);
        }
        let d = y.ln() - m.ln();
        sum += d * d;
    }
    Ok((sum / observed.len() as f64).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct FitMetrics {
    pub deviance_explained: f64,
    /// Absent when the response contains non-positive values.
    pub rmse: Option<f64>,
    pub aic: f64,
}

/// The smooth's covariate and its centered contribution per week.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothCurve {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GamFit {
    pub beta0: f64,
    /// Spline coefficients as values at the k knots; absent without a smooth.
    pub spline_coef: Option<Vec<f64>>,
    /// Lag coefficient; absent without a lag covariate.
    pub beta2: Option<f64>,
    pub kappa: f64,
    pub lambda: f64,
    pub edf: f64,
    pub weeks: Vec<Week>,
    /// Response on the fitting scale (ILI percent times RESPONSE_SCALE).
    pub observed: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Deviance residuals (signed square roots of unit deviances).
    pub residuals: Vec<f64>,
    pub smooth: Option<SmoothCurve>,
    pub deviance: f64,
    pub null_deviance: f64,
    pub loglik: f64,
    pub metrics: FitMetrics,
    /// Penalized log-likelihood per IRLS iteration of the final fit.
    pub penalized_trace: Vec<f64>,
}

pub(crate) struct FitRequest {
    pub weeks: Vec<Week>,
    pub y: Vec<f64>,
    pub smooth_x: Option<Vec<f64>>,
    pub lag: Option<Vec<f64>>,
    pub k: usize,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
}

struct Design {
    x: DMatrix<f64>,
    penalty: DMatrix<f64>,
    basis: Option<SplineBasis>,
    /// k x (k-1) sum-to-zero reparameterization of the smooth block.
    z: Option<DMatrix<f64>>,
    smooth_cols: Option<std::ops::Range<usize>>,
    lag_col: Option<usize>,
}

fn build_design(req: &FitRequest) -> Result<Design, GamError> {
    let n = req.y.len();
    for (name, len) in [
        ("weeks", req.weeks.len()),
        ("smooth", req.smooth_x.as_ref().map_or(n, Vec::len)),
        ("lag", req.lag.as_ref().map_or(n, Vec::len)),
    ] {
        if len != n {
            log::debug!("{name} length {len} differs from response {n}");
            return Err(GamError::LengthMismatch {
                left: len,
                right: n,
            });
        }
    }

    let mut basis = None;
    let mut z_opt = None;
    let mut smooth_cols = None;
    let smooth_width = if let Some(xs) = &req.smooth_x {
        let b = SplineBasis::new(xs, req.k)?;
        let k = b.k();
        let raw = b.design(xs);
        // Householder reflection sending the column-sum vector to an
        // axis; the remaining columns span the sum-to-zero subspace.
        let c = raw.transpose() * DVector::from_element(n, 1.0);
        let norm = c.norm();
        let z = if norm > 1e-10 {
            let mut v = c;
            v[0] += if v[0] >= 0.0 { norm } else { -norm };
            let vtv = v.dot(&v);
            let h = DMatrix::identity(k, k) - (&v * v.transpose()) * (2.0 / vtv);
            h.columns(1, k - 1).into_owned()
        } else {
            DMatrix::identity(k, k).columns(1, k - 1).into_owned()
        };
        z_opt = Some(z);
        basis = Some(b);
        k - 1
    } else {
        0
    };

    let has_lag = req.lag.is_some();
    let p = 1 + smooth_width + usize::from(has_lag);
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    let mut penalty = DMatrix::zeros(p, p);
    if let (Some(b), Some(z)) = (&basis, &z_opt) {
        let xs = req.smooth_x.as_ref().expect("smooth present");
        let constrained = b.design(xs) * z;
        let cols = 1..1 + smooth_width;
        x.view_mut((0, 1), (n, smooth_width))
            .copy_from(&constrained);
        let s = z.transpose() * b.penalty() * z;
        penalty
            .view_mut((1, 1), (smooth_width, smooth_width))
            .copy_from(&s);
        smooth_cols = Some(cols);
    }
    let lag_col = if let Some(lag) = &req.lag {
        let col = p - 1;
        for (i, &v) in lag.iter().enumerate() {
            x[(i, col)] = v;
        }
        Some(col)
    } else {
        None
    };

    Ok(Design {
        x,
        penalty,
        basis,
        z: z_opt,
        smooth_cols,
        lag_col,
    })
}

struct Irls {
    beta: DVector<f64>,
    mu: Vec<f64>,
    edf: f64,
    deviance: f64,
    loglik: f64,
    trace: Vec<f64>,
}

fn eta_to_mu(eta: &DVector<f64>) -> Vec<f64> {
    eta.iter()
        .map(|&e| e.clamp(-40.0, 40.0).exp().max(1e-10))
        .collect()
}

fn solve_sym(a: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, GamError> {
    if let Some(chol) = a.clone().cholesky() {
        return Ok(chol.solve(rhs));
    }
    let ridge = a.diagonal().mean().abs().max(1e-12) * 1e-10;
    let bumped = &a + DMatrix::identity(a.nrows(), a.ncols()) * ridge;
    if let Some(chol) = bumped.cholesky() {
        return Ok(chol.solve(rhs));
    }
    a.lu().solve(rhs).ok_or(GamError::SingularSystem)
}

fn irls(
    x: &DMatrix<f64>,
    y: &[f64],
    penalty: &DMatrix<f64>,
    lambda: f64,
    kappa: f64,
) -> Result<Irls, GamError> {
    let n = x.nrows();
    let p = x.ncols();
    let ybar = (y.iter().sum::<f64>() / n as f64).max(1e-8);
    let mut beta = DVector::zeros(p);
    beta[0] = ybar.ln();
    let mut mu = eta_to_mu(&(x * &beta));

    let penalized = |beta: &DVector<f64>, mu: &[f64]| {
        let s_beta = penalty * beta;
        nb_loglik(y, mu, kappa) - 0.5 * lambda * s_beta.dot(beta)
    };
    let mut current = penalized(&beta, &mu);
    let mut trace = vec![current];
    let mut converged = false;
    let mut last_change = f64::INFINITY;

    for _ in 0..MAX_IRLS_ITER {
        // Fisher weights and working response
        let mut a = DMatrix::zeros(p, p);
        let mut rhs = DVector::zeros(p);
        for i in 0..n {
            let m = mu[i];
            let w = (kappa * m / (kappa + m)).max(1e-12);
            let z = m.ln() + (y[i] - m) / m;
            let row = x.row(i);
            for r in 0..p {
                rhs[r] += w * z * row[r];
                for c in r..p {
                    a[(r, c)] += w * row[r] * row[c];
                }
            }
        }
        for r in 0..p {
            for c in 0..r {
                a[(r, c)] = a[(c, r)];
            }
        }
        let a_pen = &a + penalty * lambda;
        let candidate = solve_sym(a_pen, &rhs)?;

        // step halving keeps the penalized log-likelihood monotone
        let delta = &candidate - &beta;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &beta + &delta * step;
            let trial_mu = eta_to_mu(&(x * &trial));
            let pll = penalized(&trial, &trial_mu);
            if pll.is_finite() && pll >= current - 1e-12 {
                accepted = Some((trial, trial_mu, pll, step));
                break;
            }
            step *= 0.5;
        }
        let Some((new_beta, new_mu, pll, step)) = accepted else {
            // no improving step exists: already at the optimum
            converged = true;
            break;
        };
        last_change = (&delta * step).norm() / (beta.norm() + 1e-10);
        let gain = pll - current;
        beta = new_beta;
        mu = new_mu;
        current = pll;
        trace.push(current);

        // score of the penalized log-likelihood; the tolerance scales with
        // the two opposing terms because their cancellation bounds the
        // attainable residual in floating point
        let u = DVector::from_iterator(
            n,
            y.iter()
                .zip(&mu)
                .map(|(&yi, &mi)| kappa * (yi - mi) / (kappa + mi)),
        );
        let score = x.transpose() * u;
        let shrink = penalty * &beta * lambda;
        let grad = &score - &shrink;
        let grad_scale = 1.0 + score.amax().max(shrink.amax());
        let stalled = gain.abs() <= (current.abs() + 1.0) * 1e-14;
        if last_change < COEF_TOL && (grad.amax() < GRAD_TOL * grad_scale || stalled) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GamError::NoConvergence {
            iterations: MAX_IRLS_ITER,
            last_change,
            trace,
        });
    }

    // edf = tr((X'WX + lambda*S)^-1 X'WX) at the converged weights
    let mut xtwx = DMatrix::zeros(p, p);
    for (i, &m) in mu.iter().enumerate() {
        let w = (kappa * m / (kappa + m)).max(1e-12);
        let row = x.row(i);
        for r in 0..p {
            for c in 0..p {
                xtwx[(r, c)] += w * row[r] * row[c];
            }
        }
    }
    let a_pen = &xtwx + penalty * lambda;
    let edf = match a_pen.clone().cholesky() {
        Some(chol) => chol.solve(&xtwx).trace(),
        None => a_pen
            .lu()
            .solve(&xtwx)
            .ok_or(GamError::SingularSystem)?
            .trace(),
    };

    Ok(Irls {
        deviance: nb_deviance(y, &mu, kappa),
        loglik: nb_loglik(y, &mu, kappa),
        beta,
        mu,
        edf,
        trace,
    })
}

/// Golden-section maximization on [lo, hi].
fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
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
    (a + b) / 2.0
}

const KAPPA_LN_RANGE: (f64, f64) = (-4.605170185988091, 18.420680743952367); // 1e-2 .. 1e8

fn profile_kappa(x: &DMatrix<f64>, y: &[f64], penalty: &DMatrix<f64>, lambda: f64) -> f64 {
    let t = golden_max(
        |ln_k| match irls(x, y, penalty, lambda, ln_k.exp()) {
            Ok(fit) => fit.loglik,
            Err(_) => f64::NEG_INFINITY,
        },
        KAPPA_LN_RANGE.0,
        KAPPA_LN_RANGE.1,
        40,
    );
    t.exp()
}

fn gcv_lambda(x: &DMatrix<f64>, y: &[f64], penalty: &DMatrix<f64>, kappa: f64) -> f64 {
    let n = x.nrows() as f64;
    let gcv_of = |log10_l: f64| -> f64 {
        match irls(x, y, penalty, 10f64.powf(log10_l), kappa) {
            Ok(fit) => {
                let denom = n - fit.edf;
                if denom <= 0.0 {
                    f64::INFINITY
                } else {
                    n * fit.deviance / (denom * denom)
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    let mut best = (f64::INFINITY, 0.0);
    for i in -6..=10 {
        let l10 = i as f64;
        let g = gcv_of(l10);
        if g < best.0 {
            best = (g, l10);
        }
    }
    let refined = golden_max(|l10| -gcv_of(l10), best.1 - 1.0, best.1 + 1.0, 30);
    let refined_g = gcv_of(refined);
    10f64.powf(if refined_g <= best.0 { refined } else { best.1 })
}

pub(crate) fn fit_request(req: FitRequest) -> Result<GamFit, GamError> {
    let design = build_design(&req)?;
    let x = &design.x;
    let y = &req.y;
    let penalty = &design.penalty;

    let fixed_lambda = if design.basis.is_some() {
        req.lambda
    } else {
        Some(0.0)
    };
    let (lambda, kappa) = match (fixed_lambda, req.kappa) {
        (Some(l), Some(k)) => (l, k),
        (Some(l), None) => (l, profile_kappa(x, y, penalty, l)),
        (None, Some(k)) => (gcv_lambda(x, y, penalty, k), k),
        (None, None) => {
            // alternate the two searches from a neutral dispersion
            let mut kappa = 10.0;
            let mut lambda = gcv_lambda(x, y, penalty, kappa);
            kappa = profile_kappa(x, y, penalty, lambda);
            lambda = gcv_lambda(x, y, penalty, kappa);
            kappa = profile_kappa(x, y, penalty, lambda);
            (lambda, kappa)
        }
    };
    let fit = irls(x, y, penalty, lambda, kappa)?;

    let n = y.len();
    let beta0 = fit.beta[0];
    let (spline_coef, smooth) = match (&design.basis, &design.z, &design.smooth_cols) {
        (Some(basis), Some(z), Some(cols)) => {
            let coef_tilde = fit.beta.rows(cols.start, cols.len()).into_owned();
            let coef = z * &coef_tilde;
            let xs = req.smooth_x.clone().expect("smooth present");
            let value: Vec<f64> = xs.iter().map(|&v| basis.row(v).dot(&coef)).collect();
            (
                Some(coef.iter().copied().collect()),
                Some(SmoothCurve { x: xs, value }),
            )
        }
        _ => (None, None),
    };
    let beta2 = design.lag_col.map(|c| fit.beta[c]);

    let ybar = y.iter().sum::<f64>() / n as f64;
    let null_mu = vec![ybar; n];
    let null_deviance = nb_deviance(y, &null_mu, kappa);
    let deviance_explained = if null_deviance > 0.0 {
        (null_deviance - fit.deviance) / null_deviance
    } else {
        0.0
    };
    let rmse = log_rmse(y, &fit.mu).ok();
    let aic = -2.0 * fit.loglik + 2.0 * (fit.edf + 1.0);
    let residuals: Vec<f64> = y
        .iter()
        .zip(&fit.mu)
        .map(|(&yi, &mi)| {
            let d = nb_unit_deviance(yi, mi, kappa).max(0.0);
            (yi - mi).signum() * d.sqrt()
        })
        .collect();

    Ok(GamFit {
        beta0,
        spline_coef,
        beta2,
        kappa,
        lambda,
        edf: fit.edf,
        weeks: req.weeks,
        observed: req.y,
        fitted: fit.mu,
        residuals,
        smooth,
        deviance: fit.deviance,
        null_deviance,
        loglik: fit.loglik,
        metrics: FitMetrics {
            deviance_explained,
            rmse,
            aic,
        },
        penalized_trace: fit.trace,
    })
}

/// Fits one model form to a weekly series. The first two weeks are
/// dropped for every form so all candidates share one week set; the lag
/// covariate is the observed response two weeks earlier. `lambda`
/// overrides GCV when given; dispersion is always profiled.
pub fn fit_nbgam(
    series: &WeeklySeries,
    spec: ModelSpec,
    k: usize,
    lambda: Option<f64>,
) -> Result<GamFit, GamError> {
    let n = series.len();
    let usable = n.saturating_sub(2);
    if usable < k + 5 {
        return Err(GamError::SeriesTooShort {
            usable,
            need: k + 5,
        });
    }
    let y_full: Vec<f64> = series.ili.iter().map(|&v| v * RESPONSE_SCALE).collect();
    let weeks = series.weeks[2..].to_vec();
    let y = y_full[2..].to_vec();
    let smooth_x = if spec.has_smooth() {
        let counts = match spec {
            ModelSpec::AdjustedSmoothLag => series
                .adjusted_irt
                .as_ref()
                .ok_or(GamError::MissingAdjusted)?,
            _ => &series.irt,
        };
        Some(counts[2..].iter().map(|&v| v as f64).collect())
    } else {
        None
    };
    let lag = if spec.has_lag() {
        Some(y_full[..n - 2].to_vec())
    } else {
        None
    };
    fit_request(FitRequest {
        weeks,
        y,
        smooth_x,
        lag,
        k,
        lambda,
        kappa: None,
    })
}

/// Fraction of the null deviance removed by the model, both deviances
/// evaluated at the model's dispersion.
pub fn deviance_explained(fit: &GamFit, null_fit: &GamFit) -> Result<f64, GamError> {
    if fit.observed != null_fit.observed {
        return Err(GamError::ResponseMismatch);
    }
    let dev_model = nb_deviance(&fit.observed, &fit.fitted, fit.kappa);
    let dev_null = nb_deviance(&fit.observed, &null_fit.fitted, fit.kappa);
    if dev_null == 0.0 {
        return Err(GamError::NullDevianceZero);
    }
    Ok((dev_null - dev_model) / dev_null)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub region: Region,
    pub spec: ModelSpec,
    pub deviance_explained: f64,
    pub rmse: f64,
    pub aic: f64,
    pub edf: f64,
    pub kappa: f64,
    pub lambda: f64,
}

pub struct ModelSuite {
    pub rows: Vec<SuiteRow>,
    pub fits: Vec<(Region, ModelSpec, GamFit)>,
}

/// Fits all four model forms per region: 8 rows, north first.
pub fn run_model_suite(
    north: &WeeklySeries,
    south: &WeeklySeries,
    k: usize,
) -> Result<ModelSuite, GamError> {
    let mut rows = Vec::with_capacity(8);
    let mut fits = Vec::with_capacity(8);
    for (region, series) in [(Region::North, north), (Region::South, south)] {
        for spec in ModelSpec::ALL {
            let fit = fit_nbgam(series, spec, k, None)?;
            rows.push(SuiteRow {
                region,
                spec,
                deviance_explained: fit.metrics.deviance_explained,
                rmse: fit.metrics.rmse.ok_or(GamError::NonPositiveResponse)?,
                aic: fit.metrics.aic,
                edf: fit.edf,
                kappa: fit.kappa,
                lambda: fit.lambda,
            });
            fits.push((region, spec, fit));
        }
    }
    Ok(ModelSuite { rows, fits })
}

/// CSV export `region,spec,deviance_explained,rmse,aic,edf,kappa,lambda`.
pub fn write_suite_csv(suite: &ModelSuite, path: &Path) -> Result<(), GamError> {
    let mut out = String::from("region,spec,deviance_explained,rmse,aic,edf,kappa,lambda\n");
    for row in &suite.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.region,
            row.spec,
            row.deviance_explained,
            row.rmse,
            row.aic,
            row.edf,
            row.kappa,
            row.lambda
        ));
    }
    fs::write(path, out).map_err(|source| GamError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Fitted-curve export `week,observed,fitted` on the ILI percent scale.
pub fn write_fitted_csv(fit: &GamFit, path: &Path) -> Result<(), GamError> {
    let mut out = String::from("week,observed,fitted\n");
    for ((week, &obs), &mu) in fit.weeks.iter().zip(&fit.observed).zip(&fit.fitted) {
        out.push_str(&format!(
            "{},{},{}\n",
            week,
            obs / RESPONSE_SCALE,
            mu / RESPONSE_SCALE
        ));
    }
    fs::write(path, out).map_err(|source| GamError::Io {
        path: path.display().to_string(),
        source,
    })
}
