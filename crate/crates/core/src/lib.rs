//! Periodic ARMA (PARMA) analysis in the univariate time-varying form.
//!
//! A PARMA(p,q;l) process
//!
//! ```text
//! y_t = φ_0(t) + Σ_{m=1}^p φ_m(t) y_{t-m} + ε_t + Σ_{j=1}^q θ_j(t) ε_{t-j}
//! ```
//!
//! has coefficients that repeat every `l` steps. Instead of stacking one
//! period into an `l`-vector, this crate works with the scalar equation
//! directly: the Green-function weights ξ_{t,r} (determinants of banded
//! lower Hessenberg matrices, computed by a p-term recurrence) give the
//! exact solution, multi-step predictors and their mean-square errors, and
//! the unconditional moments. The vector-of-seasons form is kept as an
//! independent cross-check.

pub mod bench;
pub mod forecast;
pub mod greens;
pub mod model;
pub mod moments;
pub mod numfmt;
pub mod sim;
pub mod solution;
pub mod vsform;

pub use forecast::{predict, ForecastError, ForecastOrigin, ForecastReport};
pub use greens::{build_fundamental, xi_recurrence, GreenTable, SeasonTables};
pub use model::{validate, ModelSpec, PeriodicModel, SeasonClock, ValidationError};
