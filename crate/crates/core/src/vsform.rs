//! Vector-of-seasons form: one period of observations stacked into an
//! l-vector `Y_T = (y_{Tl+1}, …, y_{Tl+l})`, giving the constant-coefficient
//! VARMA
//!
//! ```text
//! Φ_0 Y_T = d + Σ_{M=1}^{P} Φ_M Y_{T-M} + Θ_0 E_T + Σ_{N=1}^{Q} Θ_N E_{T-N}
//! ```
//!
//! with P = ceil(p/l) and Q = ceil(q/l).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::PeriodicModel;

/// Width of the band around the unit circle where no verdict is given.
pub const BOUNDARY_BAND: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum VsError {
    #[error("operation needs a PAR({p};{l}) model, got PARMA({got_p},{got_q};{got_l})")]
    WrongShape {
        p: usize,
        l: usize,
        got_p: usize,
        got_q: usize,
        got_l: usize,
    },
    #[error("VS forecast needs p <= l and q <= l (P, Q <= 1); got p={p}, q={q}, l={l}")]
    OrderTooLarge { p: usize, q: usize, l: usize },
    #[error("expected {expected} values, got {found}")]
    Length { expected: usize, found: usize },
    #[error("forecast horizon must be at least one period")]
    ZeroHorizon,
    #[error("Φ(1) is singular; the stacked process has no finite mean")]
    SingularMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VsForm {
    pub period: usize,
    /// Φ_0, Φ_1, …, Φ_P
    pub phi: Vec<DMatrix<f64>>,
    /// Θ_0, Θ_1, …, Θ_Q
    pub theta: Vec<DMatrix<f64>>,
    /// drift of each season
    pub drift: DVector<f64>,
}

impl VsForm {
    pub fn ar_blocks(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn ma_blocks(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn phi0(&self) -> &DMatrix<f64> {
        &self.phi[0]
    }

    /// Φ_0⁻¹ Φ_M for M = 1..=P.
    pub fn reduced_ar(&self) -> Vec<DMatrix<f64>> {
        let inv = unit_lower_inverse(self.phi0());
        self.phi[1..].iter().map(|m| &inv * m).collect()
    }

    /// Companion matrix of the reduced AR polynomial, size Pl × Pl.
    pub fn companion(&self) -> DMatrix<f64> {
        let l = self.period;
        let blocks = self.reduced_ar();
        let n = blocks.len() * l;
        let mut c = DMatrix::zeros(n, n);
        for (m, b) in blocks.iter().enumerate() {
            c.view_mut((0, m * l), (l, l)).copy_from(b);
        }
        for i in l..n {
            c[(i, i - l)] = 1.0;
        }
        c
    }
}

/// Builds the stacked coefficient matrices of `model`.
pub fn build_vsform(model: &PeriodicModel) -> VsForm {
    let l = model.period();
    let (p, q) = (model.ar_order(), model.ma_order());
    let big_p = p.div_ceil(l);
    let big_q = q.div_ceil(l);

    // row i, column j (1-based) of block M pairs season i with lag i + lM - j
    let ar = |lag: usize, i: usize| {
        if (1..=p).contains(&lag) {
            model.ar_coef(lag, i)
        } else {
            0.0
        }
    };
    let ma = |lag: usize, i: usize| {
        if (1..=q).contains(&lag) {
            model.ma_coef(lag, i)
        } else {
            0.0
        }
    };

    let mut phi = Vec::with_capacity(big_p + 1);
    phi.push(DMatrix::from_fn(l, l, |r, c| {
        let (i, j) = (r + 1, c + 1);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => -ar(i - j, i),
            std::cmp::Ordering::Less => 0.0,
        }
    }));
    for big_m in 1..=big_p {
        phi.push(DMatrix::from_fn(l, l, |r, c| {
            let (i, j) = (r + 1, c + 1);
            ar(i + l * big_m - j, i)
        }));
    }

    let mut theta = Vec::with_capacity(big_q + 1);
    theta.push(DMatrix::from_fn(l, l, |r, c| {
        let (i, j) = (r + 1, c + 1);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => ma(i - j, i),
            std::cmp::Ordering::Less => 0.0,
        }
    }));
    for big_n in 1..=big_q {
        theta.push(DMatrix::from_fn(l, l, |r, c| {
            let (i, j) = (r + 1, c + 1);
            ma(i + l * big_n - j, i)
        }));
    }

    VsForm {
        period: l,
        phi,
        theta,
        drift: DVector::from_column_slice(model.drift_schedule()),
    }
}

/// Forward substitution inverse of a unit lower-triangular matrix.
fn unit_lower_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    debug_assert!((0..n).all(|i| a[(i, i)] == 1.0 && (i + 1..n).all(|j| a[(i, j)] == 0.0)));
    let mut inv = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= a[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s;
        }
    }
    inv
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stationary,
    NonStationary,
    /// Largest root modulus within [`BOUNDARY_BAND`] of one.
    Indeterminate,
}

impl Verdict {
    pub fn from_radius(radius: f64) -> Self {
        if (radius - 1.0).abs() < BOUNDARY_BAND {
            Verdict::Indeterminate
        } else if radius < 1.0 {
            Verdict::Stationary
        } else {
            Verdict::NonStationary
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityVerdict {
    /// Largest modulus of the roots of |Φ(z⁻¹)| = 0.
    pub max_root_modulus: f64,
    pub stationary: bool,
    pub verdict: Verdict,
    /// |det Φ(l)| when p <= l
    pub det_phi_l: Option<f64>,
}

/// Root-based stationarity: eigenvalues of the companion of Φ_0⁻¹(Φ_1, …, Φ_P).
pub fn stationarity(vs: &VsForm) -> StationarityVerdict {
    let radius = if vs.ar_blocks() == 0 {
        0.0
    } else {
        vs.companion()
            .complex_eigenvalues()
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
    };
    let det_phi_l = (vs.ar_blocks() <= 1).then(|| phi_l_matrix(vs).determinant().abs());
    StationarityVerdict {
        max_root_modulus: radius,
        stationary: radius < 1.0,
        verdict: Verdict::from_radius(radius),
        det_phi_l,
    }
}

/// Order-l Hessenberg matrix whose determinant is ξ_{t,l} for t in season
/// l, assembled from the VS blocks (requires P <= 1).
///
/// Row i carries -1 on the superdiagonal and the coefficients of season i
/// on and below the diagonal: entry (i, j) is φ_{i-j+1, i}.
pub fn phi_l_matrix(vs: &VsForm) -> DMatrix<f64> {
    assert!(vs.ar_blocks() <= 1, "Φ(l) is defined for p <= l");
    let l = vs.period;
    let phi0 = vs.phi0();
    let phi1 = vs.phi.get(1);
    DMatrix::from_fn(l, l, |r, c| {
        if c == r + 1 {
            -1.0
        } else if c <= r {
            // lag r - c + 1 of season r + 1; lags up to i - 1 sit in Φ_0,
            // lag i in Φ_1 (column l)
            let lag = r - c + 1;
            if lag <= r {
                -phi0[(r, r - lag)]
            } else {
                phi1.map_or(0.0, |m| m[(r, l - 1)])
            }
        } else {
            0.0
        }
    })
}

/// The explicit scalar stationarity condition of a PAR(2;4) model; the model
/// is declared stationary when the value is below one.
pub fn par24_restriction(model: &PeriodicModel) -> Result<f64, VsError> {
    if model.period() != 4 || model.ar_order() != 2 || model.ma_order() != 0 {
        return Err(VsError::WrongShape {
            p: 2,
            l: 4,
            got_p: model.ar_order(),
            got_q: model.ma_order(),
            got_l: model.period(),
        });
    }
    let a = |s| model.ar_coef(1, s);
    let b = |s| model.ar_coef(2, s);
    let value = b(2) * a(3) * a(4)
        + b(2) * b(4)
        + b(1) * a(2) * a(3)
        + b(1) * b(3)
        + a(1) * a(2) * a(3) * a(4)
        + a(1) * a(2) * b(4)
        + a(1) * a(4) * b(3)
        - b(1) * b(2) * b(3) * b(4);
    Ok(value.abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiCrossCheck {
    /// ξ_{t,l} from the recurrence, t in season l
    pub xi_l: f64,
    pub det_phi_l: f64,
    /// |ξ_{t,l}| = |det Φ(l)| within tolerance and, for PAR(1;l), both
    /// `< 1` verdicts agree with the root verdict.
    pub consistent: bool,
}

/// Compares ξ_{t,l} from the Green recurrence with det Φ(l) from the VS
/// blocks.
pub fn xi_cross_check(model: &PeriodicModel, tolerance: f64) -> XiCrossCheck {
    let l = model.period();
    assert!(model.ar_order() <= l, "cross-check needs p <= l");
    let xi_l = crate::greens::xi_recurrence(model, l as i64, l).xi(l as i64);
    let vs = build_vsform(model);
    let det_phi_l = phi_l_matrix(&vs).determinant();
    let mut consistent = (xi_l.abs() - det_phi_l.abs()).abs() <= tolerance;
    if model.ar_order() == 1 {
        let verdict = stationarity(&vs).verdict;
        if verdict != Verdict::Indeterminate {
            let root_says = verdict == Verdict::Stationary;
            consistent &= (xi_l.abs() < 1.0) == root_says && (det_phi_l.abs() < 1.0) == root_says;
        }
    }
    XiCrossCheck {
        xi_l,
        det_phi_l,
        consistent,
    }
}

/// Stacked n-period forecasts `Ŷ_{T+1}, …, Ŷ_{T+n}` for P, Q <= 1.
///
/// `y_last` is `Y_T` and `eps_last` is `E_T` (only read when q > 0); the
/// origin is the last time of period T.
pub fn vs_forecast(
    model: &PeriodicModel,
    y_last: &[f64],
    eps_last: &[f64],
    periods: usize,
) -> Result<Vec<DVector<f64>>, VsError> {
    let l = model.period();
    let (p, q) = (model.ar_order(), model.ma_order());
    if p > l || q > l {
        return Err(VsError::OrderTooLarge { p, q, l });
    }
    if periods == 0 {
        return Err(VsError::ZeroHorizon);
    }
    if y_last.len() != l {
        return Err(VsError::Length {
            expected: l,
            found: y_last.len(),
        });
    }
    if q > 0 && eps_last.len() != l {
        return Err(VsError::Length {
            expected: l,
            found: eps_last.len(),
        });
    }
    let vs = build_vsform(model);
    let inv = unit_lower_inverse(vs.phi0());
    let a1 = vs
        .reduced_ar()
        .into_iter()
        .next()
        .unwrap_or_else(|| DMatrix::zeros(l, l));
    let c = &inv * &vs.drift;

    let mut out = Vec::with_capacity(periods);
    let mut y = DVector::from_column_slice(y_last);
    let mut first = &c + &a1 * &y;
    if q > 0 {
        first += &inv * (&vs.theta[1] * DVector::from_column_slice(eps_last));
    }
    y = first;
    out.push(y.clone());
    for _ in 1..periods {
        y = &c + &a1 * &y;
        out.push(y.clone());
    }
    Ok(out)
}

/// Stationary mean of the stacked process, (Φ_0 − Σ Φ_M)⁻¹ d.
pub fn vs_mean(vs: &VsForm) -> Result<DVector<f64>, VsError> {
    let mut lhs = vs.phi0().clone();
    for m in &vs.phi[1..] {
        lhs -= m;
    }
    lhs.lu().solve(&vs.drift).ok_or(VsError::SingularMean)
}
