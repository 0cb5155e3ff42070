//! Green-function coefficients ξ_{t,r} of the periodic AR operator.
//!
//! ξ_{t,k} is the determinant of the k×k fundamental solution matrix
//! anchored at `t`: a lower Hessenberg band matrix with `-1` on the
//! superdiagonal and φ_{1+m}(t-k+i) on the m-th subdiagonal. Expanding that
//! determinant along its first column gives the p-term recurrence
//!
//! ```text
//! ξ_{t,k} = Σ_{i=1}^{min(p,k)} φ_i(t-k+i) · ξ_{t,k-i},   ξ_{t,0} = 1,  ξ_{t,-m} = 0
//! ```
//!
//! which is what every production path uses. Dense determinants live in
//! [`oracle`] and are only used for verification and benchmarking.

pub mod oracle;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::model::PeriodicModel;

/// |ξ| above this is flagged as numerically explosive.
pub const OVERFLOW_THRESHOLD: f64 = 1e100;

/// The k×k fundamental solution matrix anchored at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalMatrix {
    anchor: i64,
    ar_order: usize,
    matrix: DMatrix<f64>,
}

impl FundamentalMatrix {
    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ar_order(&self) -> usize {
        self.ar_order
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The matrix with its first `r` rows and columns removed. This is the
    /// fundamental matrix of order `k - r` at the same anchor.
    pub fn trailing(&self, r: usize) -> FundamentalMatrix {
        let k = self.order();
        assert!(r < k);
        FundamentalMatrix {
            anchor: self.anchor,
            ar_order: self.ar_order,
            matrix: self.matrix.view((r, r), (k - r, k - r)).into_owned(),
        }
    }
}

/// Builds the fundamental solution matrix of order `k` anchored at `t`.
///
/// Entry `(i, j)` (1-based) is `-1` when `i = j - 1`, φ_{1+m}(t-k+i) when
/// `i = j + m` with `0 <= m <= p - 1`, and zero otherwise.
pub fn build_fundamental(model: &PeriodicModel, t: i64, k: usize) -> FundamentalMatrix {
    assert!(k >= 1, "fundamental matrix order must be at least 1");
    let p = model.ar_order();
    let mut matrix = DMatrix::zeros(k, k);
    for i in 1..=k {
        if i < k {
            matrix[(i - 1, i)] = -1.0;
        }
        let time = t - k as i64 + i as i64;
        for m in 0..p.min(i) {
            let j = i - m;
            matrix[(i - 1, j - 1)] = model.phi(m + 1, time);
        }
    }
    FundamentalMatrix {
        anchor: t,
        ar_order: p,
        matrix,
    }
}

/// ξ, ξ* for one anchor season, lags `0..=horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenTable {
    anchor: i64,
    anchor_season: usize,
    xi: Vec<f64>,
    xi_star: Vec<f64>,
}

impl GreenTable {
    /// Builds the table by the first-column recurrence, O(p·H).
    pub fn new(model: &PeriodicModel, t: i64, horizon: usize) -> Self {
        Self::from_xi(model, t, recurrence(model, t, horizon))
    }

    fn from_xi(model: &PeriodicModel, t: i64, xi: Vec<f64>) -> Self {
        // left empty for a pure AR model, where ξ* = ξ
        let xi_star = if model.ma_order() == 0 {
            Vec::new()
        } else {
            ma_adjust(model, t, &xi)
        };
        Self {
            anchor: t,
            anchor_season: model.clock().season(t),
            xi,
            xi_star,
        }
    }

    /// A representative anchor time; every time in the same season yields
    /// an identical table.
    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn anchor_season(&self) -> usize {
        self.anchor_season
    }

    pub fn horizon(&self) -> usize {
        self.xi.len() - 1
    }

    /// ξ_{t,r}; negative lags return the zero seed values.
    #[inline]
    pub fn xi(&self, r: i64) -> f64 {
        if r < 0 {
            0.0
        } else {
            self.xi[r as usize]
        }
    }

    /// ξ*_{t,r}; equal to ξ_{t,r} for a pure AR model.
    #[inline]
    pub fn xi_star(&self, r: i64) -> f64 {
        if r < 0 {
            0.0
        } else {
            self.xi_star_values()[r as usize]
        }
    }

    pub fn xi_values(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi_star_values(&self) -> &[f64] {
        if self.xi_star.is_empty() {
            &self.xi
        } else {
            &self.xi_star
        }
    }

    /// ξ'_{t,r} for `r = lead..lead+q-1`: weights of the pre-origin
    /// innovations ε_{t-r} in the `lead`-step PARMA predictor.
    pub fn xi_prime(&self, model: &PeriodicModel, lead: usize) -> Vec<f64> {
        assert!(lead >= 1, "lead must be at least 1");
        assert!(
            lead <= self.horizon() + 1,
            "table too short for lead {lead}"
        );
        let q = model.ma_order();
        let t = self.anchor;
        (lead..lead + q)
            .map(|r| {
                (r - lead + 1..=q)
                    .map(|j| self.xi(r as i64 - j as i64) * model.theta(j, t - r as i64 + j as i64))
                    .sum()
            })
            .collect()
    }

    /// True when |ξ_{t,H}| exceeds [`OVERFLOW_THRESHOLD`] (or is not finite).
    pub fn is_overflowing(&self) -> bool {
        let last = *self.xi.last().unwrap();
        !last.is_finite() || last.abs() > OVERFLOW_THRESHOLD
    }
}

fn recurrence(model: &PeriodicModel, t: i64, horizon: usize) -> Vec<f64> {
    let [xi] = recurrence_lanes(
        model,
        &extended_ar(model),
        [model.clock().index(t)],
        horizon,
    );
    xi
}

/// ext[s * p + i - 1] = φ_i at season index s mod l, for s < l + p. A row of
/// the recurrence then never wraps: its terms sit at stride p + 1.
fn extended_ar(model: &PeriodicModel) -> Vec<f64> {
    let (l, p) = (model.period(), model.ar_order());
    (0..l + p)
        .flat_map(|s| (1..=p).map(move |i| model.ar_coef(i, s % l + 1)))
        .collect()
}

/// Runs the recurrence for `N` anchor seasons in lockstep so their
/// dependency chains overlap. Each lane performs exactly the operations of
/// a single-lane run.
fn recurrence_lanes<const N: usize>(
    model: &PeriodicModel,
    ext: &[f64],
    anchors: [usize; N],
    horizon: usize,
) -> [Vec<f64>; N] {
    let (l, p) = (model.period(), model.ar_order());
    let mut xi: [Vec<f64>; N] = std::array::from_fn(|_| {
        let mut v = vec![0.0; horizon + 1];
        v[0] = 1.0;
        v
    });
    if p == 0 {
        return xi;
    }
    // season index of t - k + 1, the time paired with φ_1 in row k
    let mut season = anchors;
    for k in 1..=horizon {
        let mut acc = [0.0; N];
        // farthest lag first so ξ_{k-1} enters last and the dependency
        // chain between steps is a single multiply-add
        for i in (1..=p.min(k)).rev() {
            for w in 0..N {
                acc[w] += ext[season[w] * p + (i - 1) * (p + 1)] * xi[w][k - i];
            }
        }
        for w in 0..N {
            xi[w][k] = acc[w];
            season[w] = if season[w] == 0 { l - 1 } else { season[w] - 1 };
        }
    }
    xi
}

fn ma_adjust(model: &PeriodicModel, t: i64, xi: &[f64]) -> Vec<f64> {
    let q = model.ma_order();
    if q == 0 {
        return xi.to_vec();
    }
    (0..xi.len())
        .map(|r| {
            let mut acc = xi[r];
            for j in 1..=q.min(r) {
                acc += xi[r - j] * model.theta(j, t - r as i64 + j as i64);
            }
            acc
        })
        .collect()
}

/// ξ_{t,0..=H} by the first-column recurrence.
pub fn xi_recurrence(model: &PeriodicModel, t: i64, horizon: usize) -> GreenTable {
    GreenTable::new(model, t, horizon)
}

/// ξ*_{t,0..H-1}: forecast-error weights of a PARMA model.
pub fn xi_star(model: &PeriodicModel, t: i64, horizon: usize) -> Vec<f64> {
    assert!(horizon >= 1);
    let xi = recurrence(model, t, horizon - 1);
    ma_adjust(model, t, &xi)
}

/// ξ'_{t,lead..lead+q-1}. Empty when q = 0.
pub fn xi_prime(model: &PeriodicModel, t: i64, lead: usize) -> Vec<f64> {
    GreenTable::new(model, t, lead.saturating_sub(1)).xi_prime(model, lead)
}

/// One [`GreenTable`] per anchor season, all with the same horizon.
///
/// Tables for `t` and `t + l` coincide, so `l` tables cover every time.
#[derive(Clone, Debug)]
pub struct SeasonTables {
    tables: Vec<GreenTable>,
}

impl SeasonTables {
    pub fn new(model: &PeriodicModel, horizon: usize) -> Self {
        const LANES: usize = 4;
        let l = model.period();
        let ext = extended_ar(model);
        let tables = (0..l.div_ceil(LANES))
            .into_par_iter()
            .flat_map_iter(|block| {
                let first = block * LANES;
                // lanes past the last season recompute season l and are dropped
                let anchors: [usize; LANES] = std::array::from_fn(|w| (first + w).min(l - 1));
                let lanes = recurrence_lanes(model, &ext, anchors, horizon);
                let used = LANES.min(l - first);
                lanes
                    .into_iter()
                    .take(used)
                    .enumerate()
                    .map(move |(w, xi)| {
                        let t = (first + w + 1) as i64;
                        GreenTable::from_xi(model, t, xi)
                    })
            })
            .collect();
        Self { tables }
    }

    pub fn for_time(&self, t: i64) -> &GreenTable {
        let l = self.tables.len() as i64;
        &self.tables[(t - 1).rem_euclid(l) as usize]
    }

    pub fn for_season(&self, season: usize) -> &GreenTable {
        &self.tables[season - 1]
    }

    pub fn horizon(&self) -> usize {
        self.tables[0].horizon()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GreenTable> {
        self.tables.iter()
    }
}
