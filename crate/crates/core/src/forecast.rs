//! Optimal multi-step linear predictors and their mean-square errors.
//!
//! The h-step predictor of y_t from origin τ = t - h is the general solution
//! with every future innovation replaced by zero. Known pre-origin
//! innovations enter a PARMA predictor through the ξ' weights, and the
//! forecast error is Σ_{r<h} ξ*_{t,r} ε_{t-r}. Note that the weights are
//! anchored at the target time t, not at the origin.

use thiserror::Error;

use crate::greens::{GreenTable, SeasonTables};
use crate::model::PeriodicModel;
use crate::solution::{drift_part, homogeneous};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ForecastError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("forecast origin needs {expected} past values (one per AR lag), got {found}")]
    TailLength { expected: usize, found: usize },
    #[error("MA order is {q} but no pre-origin innovations were supplied")]
    MissingInnovationTail { q: usize },
    #[error("forecast origin needs {expected} pre-origin innovations, got {found}")]
    InnovationTailLength { expected: usize, found: usize },
}

/// Information available at the forecast origin τ.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastOrigin {
    pub time: i64,
    /// y_τ, y_{τ-1}, …, y_{τ-p+1}
    pub y_tail: Vec<f64>,
    /// ε_τ, ε_{τ-1}, …, ε_{τ-q+1}; empty for a pure AR model
    pub eps_tail: Vec<f64>,
}

impl ForecastOrigin {
    pub fn new(time: i64, y_tail: Vec<f64>, eps_tail: Vec<f64>) -> Self {
        Self {
            time,
            y_tail,
            eps_tail,
        }
    }

    fn check(&self, model: &PeriodicModel) -> Result<(), ForecastError> {
        let p = model.ar_order();
        let q = model.ma_order();
        if self.y_tail.len() != p {
            return Err(ForecastError::TailLength {
                expected: p,
                found: self.y_tail.len(),
            });
        }
        if q > 0 && self.eps_tail.is_empty() {
            return Err(ForecastError::MissingInnovationTail { q });
        }
        if self.eps_tail.len() != q {
            return Err(ForecastError::InnovationTailLength {
                expected: q,
                found: self.eps_tail.len(),
            });
        }
        Ok(())
    }
}

/// Forecast for a single horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizonForecast {
    pub h: usize,
    pub target_time: i64,
    pub target_season: usize,
    pub point: f64,
    /// ξ*_{t,0..h-1}, anchored at the target time
    pub fe_coeffs: Vec<f64>,
    pub mse: f64,
    /// Σ ξ'_{t,r} ε_{t-r}; zero for a pure AR model
    pub ma_adjustment: f64,
}

impl HorizonForecast {
    /// Gaussian-innovation interval `point ± z·sqrt(mse)`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        let half = z * self.mse.sqrt();
        (self.point - half, self.point + half)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastReport {
    pub origin: i64,
    pub horizons: Vec<HorizonForecast>,
}

impl ForecastReport {
    pub fn points(&self) -> Vec<f64> {
        self.horizons.iter().map(|h| h.point).collect()
    }

    pub fn mse(&self) -> Vec<f64> {
        self.horizons.iter().map(|h| h.mse).collect()
    }
}

/// Predictors for horizons `1..=horizon` from `origin`.
pub fn predict(
    model: &PeriodicModel,
    origin: &ForecastOrigin,
    horizon: usize,
) -> Result<ForecastReport, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    origin.check(model)?;
    let tables = SeasonTables::new(model, horizon);
    let tau = origin.time;
    let horizons = (1..=horizon)
        .map(|h| {
            let t = tau + h as i64;
            let table = tables.for_time(t);
            let hom = homogeneous(model, table, tau, h, |m| origin.y_tail[m]);
            let drift = drift_part(model, table, h);
            let ma_adjustment = if model.ma_order() > 0 {
                table
                    .xi_prime(model, h)
                    .iter()
                    .zip(&origin.eps_tail)
                    .map(|(w, e)| w * e)
                    .sum()
            } else {
                0.0
            };
            let fe_coeffs = table.xi_star_values()[..h].to_vec();
            HorizonForecast {
                h,
                target_time: t,
                target_season: model.clock().season(t),
                point: hom + drift + ma_adjustment,
                mse: weighted_square_sum(model, t, &fe_coeffs),
                fe_coeffs,
                ma_adjustment,
            }
        })
        .collect();
    Ok(ForecastReport {
        origin: tau,
        horizons,
    })
}

fn weighted_square_sum(model: &PeriodicModel, t: i64, coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(r, c)| c * c * model.sigma2(t - r as i64))
        .sum()
}

/// Forecast-error weights for target `t` at horizon `h`: ξ (PAR) or ξ* (PARMA).
pub fn forecast_error_coeffs(model: &PeriodicModel, t: i64, h: usize) -> Vec<f64> {
    assert!(h >= 1, "horizon must be at least 1");
    GreenTable::new(model, t, h - 1).xi_star_values().to_vec()
}

/// Mean-square errors for horizons `1..=horizon` from origin `tau`.
pub fn mse_profile(model: &PeriodicModel, tau: i64, horizon: usize) -> Vec<f64> {
    assert!(horizon >= 1, "horizon must be at least 1");
    let tables = SeasonTables::new(model, horizon);
    (1..=horizon)
        .map(|h| {
            let t = tau + h as i64;
            weighted_square_sum(model, t, &tables.for_time(t).xi_star_values()[..h])
        })
        .collect()
}
