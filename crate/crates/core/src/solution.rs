//! Closed-form general solution of the periodic difference equation.
//!
//! For `t = τ + nl` the value y_t splits into a homogeneous part carried by
//! the `p` free constants y_τ, …, y_{τ-p+1} and a particular part driven by
//! the drifts and the MA-filtered innovations u_s = ε_s + Σ θ_j(s) ε_{s-j}:
//!
//! ```text
//! hom = ξ_{t,nl} y_τ + Σ_{m=1}^{p-1} Σ_{i=1}^{p-m} φ_{m+i}(τ+i) ξ_{t,nl-i} y_{τ-m}
//! par = Σ_{r=0}^{nl-1} ξ_{t,r} φ_0(t-r) + Σ_{r=0}^{nl-1} ξ_{t,r} u_{t-r}
//! ```

use thiserror::Error;

use crate::greens::GreenTable;
use crate::model::PeriodicModel;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("expected {expected} initial values (one per AR lag), got {found}")]
    InitialValues { expected: usize, found: usize },
    #[error("expected {expected} innovations (lead + q), got {found}")]
    Innovations { expected: usize, found: usize },
}

/// Free constants and innovation path for one solution evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionInput {
    origin: i64,
    lead: usize,
    initial: Vec<f64>,
    innovations: Vec<f64>,
}

impl SolutionInput {
    /// `initial` holds y_τ, y_{τ-1}, …, y_{τ-p+1} (newest first).
    /// `innovations` holds ε_{τ-q+1}, …, ε_{τ+lead} (oldest first).
    pub fn new(
        model: &PeriodicModel,
        origin: i64,
        lead: usize,
        initial: Vec<f64>,
        innovations: Vec<f64>,
    ) -> Result<Self, SolutionError> {
        let p = model.ar_order();
        let q = model.ma_order();
        if initial.len() != p {
            return Err(SolutionError::InitialValues {
                expected: p,
                found: initial.len(),
            });
        }
        if innovations.len() != lead + q {
            return Err(SolutionError::Innovations {
                expected: lead + q,
                found: innovations.len(),
            });
        }
        Ok(Self {
            origin,
            lead,
            initial,
            innovations,
        })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn lead(&self) -> usize {
        self.lead
    }

    pub fn target(&self) -> i64 {
        self.origin + self.lead as i64
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn innovations(&self) -> &[f64] {
        &self.innovations
    }

    /// y_{τ-m} for `m < p`.
    fn y_before(&self, m: usize) -> f64 {
        self.initial[m]
    }

    /// ε_s for `τ-q+1 <= s <= τ+lead`.
    fn eps(&self, q: usize, s: i64) -> f64 {
        let first = self.origin - q as i64 + 1;
        self.innovations[(s - first) as usize]
    }

    /// u_s = ε_s + Σ_j θ_j(s) ε_{s-j} for `s > τ`.
    fn u(&self, model: &PeriodicModel, s: i64) -> f64 {
        let q = model.ma_order();
        let mut acc = self.eps(q, s);
        for j in 1..=q {
            acc += model.theta(j, s) * self.eps(q, s - j as i64);
        }
        acc
    }
}

/// The two parts of the general solution. `total = hom + par_drift + par_noise`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionDecomposition {
    pub hom: f64,
    pub par_drift: f64,
    pub par_noise: f64,
    pub total: f64,
}

/// Homogeneous part for a target with Green table `table` and lead `lead`.
/// `y_before(m)` returns y_{τ-m}.
pub(crate) fn homogeneous(
    model: &PeriodicModel,
    table: &GreenTable,
    origin: i64,
    lead: usize,
    y_before: impl Fn(usize) -> f64,
) -> f64 {
    let p = model.ar_order();
    if p == 0 {
        return 0.0;
    }
    let nl = lead as i64;
    // m = 0 term collapses to ξ_{t,nl} by the first-column expansion
    let mut acc = table.xi(nl) * y_before(0);
    for m in 1..p {
        let mut coef = 0.0;
        for i in 1..=p - m {
            coef += model.phi(m + i, origin + i as i64) * table.xi(nl - i as i64);
        }
        acc += coef * y_before(m);
    }
    acc
}

/// Sum of ξ_{t,r} φ_0(t-r) over `r < lead`.
pub(crate) fn drift_part(model: &PeriodicModel, table: &GreenTable, lead: usize) -> f64 {
    let t = table.anchor();
    (0..lead as i64)
        .map(|r| table.xi(r) * model.phi0(t - r))
        .sum()
}

/// Evaluates the general solution at `t = τ + lead`.
pub fn general_solution(model: &PeriodicModel, input: &SolutionInput) -> SolutionDecomposition {
    let t = input.target();
    let table = GreenTable::new(model, t, input.lead);
    let hom = homogeneous(model, &table, input.origin, input.lead, |m| {
        input.y_before(m)
    });
    let par_drift = drift_part(model, &table, input.lead);
    let par_noise = (0..input.lead as i64)
        .map(|r| table.xi(r) * input.u(model, t - r))
        .sum();
    SolutionDecomposition {
        hom,
        par_drift,
        par_noise,
        total: hom + par_drift + par_noise,
    }
}

/// Iterates the difference equation forward `lead` steps from the origin.
pub fn direct_recursion(model: &PeriodicModel, input: &SolutionInput) -> f64 {
    let p = model.ar_order();
    // history, oldest first: y_{τ-p+1}, …, y_τ
    let mut y: Vec<f64> = input.initial.iter().rev().copied().collect();
    // with p = 0 and lead = 0 the solution is the empty sum
    let mut last = input.initial.first().copied().unwrap_or(0.0);
    for k in 1..=input.lead {
        let s = input.origin + k as i64;
        let n = y.len();
        let mut next = model.phi0(s) + input.u(model, s);
        for m in 1..=p {
            next += model.phi(m, s) * y[n - m];
        }
        y.push(next);
        last = next;
    }
    last
}
