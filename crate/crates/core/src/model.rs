//! PARMA(p,q;l) model definition and season arithmetic.
//!
//! Seasons are 1-based at every public boundary (`1..=l`, matching the usual
//! `t = T·l + s` notation) and 0-based inside the coefficient tables. All
//! conversion between the two happens in this module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Decomposition of absolute time into period and season, `t = T·l + s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeasonClock {
    period: usize,
}

impl SeasonClock {
    /// # Panics
    ///
    /// Panics if `period == 0`.
    pub fn new(period: usize) -> Self {
        assert!(period >= 1, "season clock needs a period of at least 1");
        Self { period }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Returns `(T, s)` with `1 <= s <= l` and `t = T·l + s`. Negative times
    /// use floor division so the season stays in range.
    pub fn decompose(&self, t: i64) -> (i64, usize) {
        let l = self.period as i64;
        let big_t = (t - 1).div_euclid(l);
        let s = (t - 1).rem_euclid(l) + 1;
        (big_t, s as usize)
    }

    pub fn compose(&self, big_t: i64, season: usize) -> i64 {
        debug_assert!((1..=self.period).contains(&season));
        big_t * self.period as i64 + season as i64
    }

    /// 1-based season of `t`.
    pub fn season(&self, t: i64) -> usize {
        self.decompose(t).1
    }

    /// 0-based season of `t`, for table lookups.
    #[inline]
    pub(crate) fn index(&self, t: i64) -> usize {
        (t - 1).rem_euclid(self.period as i64) as usize
    }
}

/// Unvalidated model description, as read from a model file.
///
/// `ar[m - 1][s - 1]` is φ_{m,s}: one row per lag, one column per season.
/// `ma` uses the same layout for θ_{j,s}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub l: usize,
    pub p: usize,
    pub q: usize,
    pub drift: Vec<f64>,
    #[serde(default)]
    pub ar: Vec<Vec<f64>>,
    #[serde(default)]
    pub ma: Vec<Vec<f64>>,
    pub sigma2: Vec<f64>,
}

/// A single reason a [`ModelSpec`] was rejected.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("period l must be at least 1")]
    ZeroPeriod,
    #[error("{field}: expected {expected}, found {found}")]
    ShapeMismatch {
        field: String,
        expected: String,
        found: String,
    },
    #[error("{field} is not finite ({value})")]
    NonFiniteCoefficient { field: String, value: f64 },
    #[error("sigma2[season {season}] = {value} must be strictly positive")]
    NonPositiveVariance { season: usize, value: f64 },
}

/// Every violation found in a model description.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("invalid model: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

/// A validated PARMA(p,q;l) model. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicModel {
    clock: SeasonClock,
    p: usize,
    q: usize,
    drift: Vec<f64>,
    // ar[(m - 1) * l + s0]
    ar: Vec<f64>,
    ma: Vec<f64>,
    sigma2: Vec<f64>,
}

/// Checks every model invariant, collecting all violations rather than
/// stopping at the first.
pub fn validate(spec: ModelSpec) -> Result<PeriodicModel, ValidationError> {
    let mut violations = Vec::new();
    let l = spec.l;
    if l == 0 {
        violations.push(Violation::ZeroPeriod);
        return Err(ValidationError { violations });
    }

    let check_vec = |name: &str, v: &[f64], violations: &mut Vec<Violation>| {
        if v.len() != l {
            violations.push(Violation::ShapeMismatch {
                field: name.to_string(),
                expected: format!("{l} values"),
                found: format!("{} values", v.len()),
            });
        }
        for (i, x) in v.iter().enumerate() {
            if !x.is_finite() {
                violations.push(Violation::NonFiniteCoefficient {
                    field: format!("{name}[season {}]", i + 1),
                    value: *x,
                });
            }
        }
    };
    check_vec("drift", &spec.drift, &mut violations);
    check_vec("sigma2", &spec.sigma2, &mut violations);

    let check_table =
        |name: &str, rows: &[Vec<f64>], order: usize, violations: &mut Vec<Violation>| {
            if rows.len() != order {
                violations.push(Violation::ShapeMismatch {
                    field: name.to_string(),
                    expected: format!("{order} rows"),
                    found: format!("{} rows", rows.len()),
                });
            }
            for (m, row) in rows.iter().enumerate() {
                if row.len() != l {
                    violations.push(Violation::ShapeMismatch {
                        field: format!("{name}[lag {}]", m + 1),
                        expected: format!("{l} seasons"),
                        found: format!("{} seasons", row.len()),
                    });
                }
                for (s, x) in row.iter().enumerate() {
                    if !x.is_finite() {
                        violations.push(Violation::NonFiniteCoefficient {
                            field: format!("{name}[lag {}][season {}]", m + 1, s + 1),
                            value: *x,
                        });
                    }
                }
            }
        };
    check_table("ar", &spec.ar, spec.p, &mut violations);
    check_table("ma", &spec.ma, spec.q, &mut violations);

    for (i, v) in spec.sigma2.iter().enumerate() {
        if v.is_finite() && *v <= 0.0 {
            violations.push(Violation::NonPositiveVariance {
                season: i + 1,
                value: *v,
            });
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    Ok(PeriodicModel {
        clock: SeasonClock::new(l),
        p: spec.p,
        q: spec.q,
        drift: spec.drift,
        ar: spec.ar.into_iter().flatten().collect(),
        ma: spec.ma.into_iter().flatten().collect(),
        sigma2: spec.sigma2,
    })
}

impl PeriodicModel {
    /// Convenience constructor; see [`ModelSpec`] for the table layout.
    pub fn new(
        drift: Vec<f64>,
        ar: Vec<Vec<f64>>,
        ma: Vec<Vec<f64>>,
        sigma2: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        validate(ModelSpec {
            l: sigma2.len(),
            p: ar.len(),
            q: ma.len(),
            drift,
            ar,
            ma,
            sigma2,
        })
    }

    /// Periodic AR model with zero drift and unit variance.
    pub fn par(ar: Vec<Vec<f64>>) -> Result<Self, ValidationError> {
        let l = ar.first().map_or(1, Vec::len);
        Self::new(vec![0.0; l], ar, Vec::new(), vec![1.0; l])
    }

    /// Constant-coefficient ARMA(p,q) seen as a single-season model.
    pub fn constant(
        drift: f64,
        ar: &[f64],
        ma: &[f64],
        sigma2: f64,
    ) -> Result<Self, ValidationError> {
        Self::new(
            vec![drift],
            ar.iter().map(|&a| vec![a]).collect(),
            ma.iter().map(|&b| vec![b]).collect(),
            vec![sigma2],
        )
    }

    pub fn clock(&self) -> SeasonClock {
        self.clock
    }

    pub fn period(&self) -> usize {
        self.clock.period
    }

    pub fn ar_order(&self) -> usize {
        self.p
    }

    pub fn ma_order(&self) -> usize {
        self.q
    }

    /// φ_{m,s} with 1-based lag and season.
    pub fn ar_coef(&self, m: usize, season: usize) -> f64 {
        assert!(
            (1..=self.p).contains(&m),
            "AR lag {m} outside 1..={}",
            self.p
        );
        assert!((1..=self.period()).contains(&season));
        self.ar[(m - 1) * self.period() + season - 1]
    }

    /// θ_{j,s} with 1-based lag and season.
    pub fn ma_coef(&self, j: usize, season: usize) -> f64 {
        assert!(
            (1..=self.q).contains(&j),
            "MA lag {j} outside 1..={}",
            self.q
        );
        assert!((1..=self.period()).contains(&season));
        self.ma[(j - 1) * self.period() + season - 1]
    }

    pub fn drift_coef(&self, season: usize) -> f64 {
        self.drift[season - 1]
    }

    pub fn sigma2_coef(&self, season: usize) -> f64 {
        self.sigma2[season - 1]
    }

    /// φ_m(t). Lags outside `1..=p` are a contract violation.
    #[inline]
    pub fn phi(&self, m: usize, t: i64) -> f64 {
        assert!(
            (1..=self.p).contains(&m),
            "AR lag {m} outside 1..={}",
            self.p
        );
        self.ar[(m - 1) * self.period() + self.clock.index(t)]
    }

    /// θ_j(t). Lags outside `1..=q` are a contract violation.
    #[inline]
    pub fn theta(&self, j: usize, t: i64) -> f64 {
        assert!(
            (1..=self.q).contains(&j),
            "MA lag {j} outside 1..={}",
            self.q
        );
        self.ma[(j - 1) * self.period() + self.clock.index(t)]
    }

    /// φ_0(t).
    #[inline]
    pub fn phi0(&self, t: i64) -> f64 {
        self.drift[self.clock.index(t)]
    }

    /// σ²(t).
    #[inline]
    pub fn sigma2(&self, t: i64) -> f64 {
        self.sigma2[self.clock.index(t)]
    }

    pub fn drift_schedule(&self) -> &[f64] {
        &self.drift
    }

    pub fn sigma2_schedule(&self) -> &[f64] {
        &self.sigma2
    }

    /// True when every coefficient (drift, AR, MA, variance) is the same in
    /// all seasons, i.e. the model is an ordinary ARMA(p,q).
    pub fn is_constant(&self) -> bool {
        let l = self.period();
        let flat = |v: &[f64]| v.chunks(l).all(|row| row.iter().all(|x| *x == row[0]));
        flat(&self.drift) && flat(&self.sigma2) && flat(&self.ar) && flat(&self.ma)
    }

    /// Round-trips back to the file representation.
    pub fn to_spec(&self) -> ModelSpec {
        let l = self.period();
        ModelSpec {
            l,
            p: self.p,
            q: self.q,
            drift: self.drift.clone(),
            ar: self.ar.chunks(l).map(<[f64]>::to_vec).collect(),
            ma: self.ma.chunks(l).map(<[f64]>::to_vec).collect(),
            sigma2: self.sigma2.clone(),
        }
    }

    /// Same model with the drift replaced, used by the moment and
    /// forecast tests that need a drift-free copy.
    pub fn with_drift(&self, drift: Vec<f64>) -> Result<Self, ValidationError> {
        let mut spec = self.to_spec();
        spec.drift = drift;
        validate(spec)
    }
}
