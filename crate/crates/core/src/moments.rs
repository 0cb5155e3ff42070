//! Unconditional mean, variance and autocovariance from the truncated
//! MA(∞) representation
//!
//! ```text
//! y_t = Σ_{r>=0} ξ_{t,r} φ_0(t-r) + Σ_{r>=0} ξ*_{t,r} ε_{t-r}
//! ```
//!
//! All three moments depend on `t` only through its season.

use thiserror::Error;

use crate::greens::SeasonTables;
use crate::model::PeriodicModel;

/// Default relative margin on the per-step growth factor.
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// |ξ| at the probe lag must stay below this to pass.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e6;
/// Truncation stops once the last period of weights is below this fraction
/// of the largest weight.
pub const TRUNCATION_RELATIVE_TAIL: f64 = 1e-14;
pub const MAX_TRUNCATION: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MomentsError {
    #[error("Green weights do not decay (growth factor {rho_hat:.6} at lag {probe_lag}); unconditional moments do not exist")]
    NotConvergent { rho_hat: f64, probe_lag: usize },
    #[error("season {season} outside 1..={period}")]
    SeasonOutOfRange { season: usize, period: usize },
}

/// Numerical check that the ξ weights are square summable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceDiagnostic {
    /// Estimated per-step growth factor of |ξ|, maximised over seasons.
    pub rho_hat: f64,
    /// max over seasons of |ξ_{t,R}|
    pub tail: f64,
    pub probe_lag: usize,
    pub margin: f64,
    pub passed: bool,
}

impl ConvergenceDiagnostic {
    /// Growth per full period, ρ̂^l.
    pub fn period_factor(&self, period: usize) -> f64 {
        self.rho_hat.powi(period as i32)
    }
}

/// Probe lag used when the caller does not pick one.
pub fn default_probe_lag(period: usize) -> usize {
    (100 * period).max(2 * period).max(400)
}

/// Estimates the decay rate of ξ_{t,r} in `r` for every anchor season.
///
/// The rate for one season is `(‖x_R‖ / ‖x_{R-span}‖)^{1/span}` where `x_k`
/// is the window (ξ_k, …, ξ_{k-p+1}) and `span` is the largest multiple of
/// `l` not exceeding `R/2`. For a PAR(1) model this is exactly
/// |ξ_{t,R} / ξ_{t,R-l}|^{1/l}. The window is rescaled as it goes so long
/// probes neither underflow nor overflow.
pub fn check_convergence(
    model: &PeriodicModel,
    probe_lag: usize,
    margin: f64,
) -> ConvergenceDiagnostic {
    let l = model.period();
    assert!(probe_lag >= 2 * l, "probe lag must be at least two periods");
    let span = ((probe_lag / 2) / l).max(1) * l;
    let mut rho_hat: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for s in 1..=l as i64 {
        let (growth, last) = log_growth(model, s, probe_lag, span);
        rho_hat = rho_hat.max(growth);
        tail = tail.max(last);
    }
    ConvergenceDiagnostic {
        rho_hat,
        tail,
        probe_lag,
        margin,
        passed: rho_hat < 1.0 - margin && tail < DEFAULT_TAIL_THRESHOLD,
    }
}

/// Returns (per-step growth over the last `span` lags, |ξ_{t,R}|).
fn log_growth(model: &PeriodicModel, t: i64, probe_lag: usize, span: usize) -> (f64, f64) {
    let p = model.ar_order();
    if p == 0 {
        return (0.0, 0.0);
    }
    // window[i] = ξ_{k-i}, scaled by exp(-log_scale)
    let mut window = vec![0.0; p];
    window[0] = 1.0;
    let mut log_scale = 0.0f64;
    let mut log_norm_at_start = f64::NAN;
    let window_log_norm = |w: &[f64], scale: f64| {
        let m = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.ln() + scale
        }
    };
    for k in 1..=probe_lag {
        let mut next = 0.0;
        for i in 1..=p.min(k) {
            next += model.phi(i, t - k as i64 + i as i64) * window[i - 1];
        }
        window.rotate_right(1);
        window[0] = next;
        let m = window.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 {
            return (0.0, 0.0);
        }
        if !(1e-100..=1e100).contains(&m) {
            window.iter_mut().for_each(|x| *x /= m);
            log_scale += m.ln();
        }
        if k == probe_lag - span {
            log_norm_at_start = window_log_norm(&window, log_scale);
        }
    }
    let end = window_log_norm(&window, log_scale);
    let growth = ((end - log_norm_at_start) / span as f64).exp();
    let last = if window[0] == 0.0 {
        0.0
    } else {
        (window[0].abs().ln() + log_scale).exp()
    };
    (growth, last)
}

/// Smallest multiple of `l` (capped at [`MAX_TRUNCATION`]) at which the
/// last period of ξ* weights of every season falls below
/// [`TRUNCATION_RELATIVE_TAIL`] times the largest weight.
pub fn default_truncation(model: &PeriodicModel) -> usize {
    let l = model.period();
    let cap = (MAX_TRUNCATION / l).max(1) * l;
    let mut horizon = (64 * l).min(cap);
    loop {
        let tables = SeasonTables::new(model, horizon);
        let mut worst_period = 0;
        for table in tables.iter() {
            let c = table.xi_star_values();
            let mut peak: f64 = 0.0;
            let mut found = None;
            for period in 1..=horizon / l {
                let block = &c[(period - 1) * l + 1..=period * l];
                let block_max = block.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                peak = peak.max(block_max).max(c[0].abs());
                if block_max < TRUNCATION_RELATIVE_TAIL * peak {
                    found = Some(period);
                    break;
                }
            }
            match found {
                Some(period) => worst_period = worst_period.max(period),
                None => {
                    worst_period = usize::MAX;
                    break;
                }
            }
        }
        if worst_period != usize::MAX {
            return (worst_period * l).max(l);
        }
        if horizon >= cap {
            return cap;
        }
        horizon = (horizon * 4).min(cap);
    }
}

/// Mean, variance and autocovariances for every season.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentProfile {
    pub truncation: usize,
    pub diagnostic: ConvergenceDiagnostic,
    pub seasons: Vec<SeasonMoments>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeasonMoments {
    pub season: usize,
    pub mean: f64,
    pub variance: f64,
    /// γ(s, k) = Cov(y_t, y_{t-k}) for k = 0..=K, t in season s
    pub autocovariance: Vec<f64>,
    /// Bounds on the truncation error of `mean` and of the second moments.
    pub mean_tail_bound: f64,
    pub covariance_tail_bound: f64,
}

/// Truncated MA(∞) sums for a fixed truncation lag.
struct Series {
    tables: SeasonTables,
    truncation: usize,
}

impl Series {
    fn new(model: &PeriodicModel, truncation: usize, max_lag: usize) -> Self {
        Self {
            tables: SeasonTables::new(model, truncation + max_lag),
            truncation,
        }
    }

    fn mean(&self, model: &PeriodicModel, t: i64) -> f64 {
        let table = self.tables.for_time(t);
        (0..=self.truncation as i64)
            .map(|r| table.xi(r) * model.phi0(t - r))
            .sum()
    }

    fn autocovariance(&self, model: &PeriodicModel, t: i64, k: usize) -> f64 {
        let now = self.tables.for_time(t);
        let then = self.tables.for_time(t - k as i64);
        (0..=self.truncation as i64)
            .map(|r| now.xi_star(k as i64 + r) * then.xi_star(r) * model.sigma2(t - k as i64 - r))
            .sum()
    }

    /// Largest |ξ*| over the final period before the truncation lag.
    fn tail_weight(&self, l: usize) -> f64 {
        let from = self.truncation.saturating_sub(l - 1);
        self.tables
            .iter()
            .flat_map(|t| t.xi_star_values()[from..=self.truncation].iter())
            .fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

fn check_season(model: &PeriodicModel, season: usize) -> Result<(), MomentsError> {
    if !(1..=model.period()).contains(&season) {
        return Err(MomentsError::SeasonOutOfRange {
            season,
            period: model.period(),
        });
    }
    Ok(())
}

fn require_convergence(model: &PeriodicModel) -> Result<ConvergenceDiagnostic, MomentsError> {
    let diag = check_convergence(model, default_probe_lag(model.period()), DEFAULT_MARGIN);
    if diag.passed {
        Ok(diag)
    } else {
        Err(MomentsError::NotConvergent {
            rho_hat: diag.rho_hat,
            probe_lag: diag.probe_lag,
        })
    }
}

/// E(y_t) for `t` in `season`, truncated at lag `truncation` (default:
/// [`default_truncation`]).
pub fn unconditional_mean(
    model: &PeriodicModel,
    season: usize,
    truncation: Option<usize>,
) -> Result<f64, MomentsError> {
    check_season(model, season)?;
    require_convergence(model)?;
    let r = truncation.unwrap_or_else(|| default_truncation(model));
    Ok(Series::new(model, r, 0).mean(model, season as i64))
}

/// Var(y_t) for `t` in `season`.
pub fn unconditional_variance(
    model: &PeriodicModel,
    season: usize,
    truncation: Option<usize>,
) -> Result<f64, MomentsError> {
    autocovariance(model, season, 0, truncation)
}

/// γ(s, k) = Cov(y_t, y_{t-k}) for `t` in `season`.
pub fn autocovariance(
    model: &PeriodicModel,
    season: usize,
    lag: usize,
    truncation: Option<usize>,
) -> Result<f64, MomentsError> {
    check_season(model, season)?;
    require_convergence(model)?;
    let r = truncation.unwrap_or_else(|| default_truncation(model));
    Ok(Series::new(model, r, lag).autocovariance(model, season as i64, lag))
}

/// γ(s, k) rebuilt from earlier-time moments through the general solution:
///
/// ```text
/// γ(t,k) = ξ_{t,k} Var(y_{t-k})
///        + Σ_{m=1}^{p-1} Σ_{i=1}^{p-m} φ_{m+i}(t-k+i) ξ_{t,k-i} γ(t-k, m)
///        + Σ_{r=0}^{q-1} ξ*_{t-k,r} ξ'_{t,k+r} σ²(t-k-r)
/// ```
///
/// The right-hand moments come from the direct series, so agreement with
/// [`autocovariance`] is a consistency check between the two forms.
pub fn autocovariance_by_recursion(
    model: &PeriodicModel,
    season: usize,
    lag: usize,
    truncation: usize,
) -> Result<f64, MomentsError> {
    check_season(model, season)?;
    let p = model.ar_order();
    let q = model.ma_order();
    let series = Series::new(model, truncation, lag.max(p));
    let t = season as i64;
    let tau = t - lag as i64;
    let now = series.tables.for_time(t);
    let then = series.tables.for_time(tau);
    let k = lag as i64;

    let mut acc = now.xi(k) * series.autocovariance(model, tau, 0);
    for m in 1..p {
        let mut coef = 0.0;
        for i in 1..=p - m {
            coef += model.phi(m + i, tau + i as i64) * now.xi(k - i as i64);
        }
        acc += coef * series.autocovariance(model, tau, m);
    }
    if q > 0 && lag > 0 {
        let prime = now.xi_prime(model, lag);
        for (r, w) in prime.iter().enumerate() {
            acc += then.xi_star(r as i64) * w * model.sigma2(tau - r as i64);
        }
    }
    Ok(acc)
}

impl MomentProfile {
    /// Moments of every season for lags `0..=max_lag`.
    pub fn compute(
        model: &PeriodicModel,
        max_lag: usize,
        truncation: Option<usize>,
        diagnostic: ConvergenceDiagnostic,
    ) -> Result<Self, MomentsError> {
        if !diagnostic.passed {
            return Err(MomentsError::NotConvergent {
                rho_hat: diagnostic.rho_hat,
                probe_lag: diagnostic.probe_lag,
            });
        }
        let l = model.period();
        let r = truncation.unwrap_or_else(|| default_truncation(model));
        let series = Series::new(model, r, max_lag);

        let g = diagnostic.period_factor(l).min(1.0 - f64::EPSILON);
        let w = series.tail_weight(l);
        let max_drift = model
            .drift_schedule()
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        let max_var = model
            .sigma2_schedule()
            .iter()
            .fold(0.0f64, |a, x| a.max(*x));
        let mean_tail_bound = l as f64 * w * max_drift / (1.0 - g);
        let covariance_tail_bound = l as f64 * w * w * max_var / (1.0 - g * g);

        let seasons = (1..=l)
            .map(|s| {
                let t = s as i64;
                let autocovariance: Vec<f64> = (0..=max_lag)
                    .map(|k| series.autocovariance(model, t, k))
                    .collect();
                SeasonMoments {
                    season: s,
                    mean: series.mean(model, t),
                    variance: autocovariance[0],
                    autocovariance,
                    mean_tail_bound,
                    covariance_tail_bound,
                }
            })
            .collect();
        Ok(Self {
            truncation: r,
            diagnostic,
            seasons,
        })
    }
}
