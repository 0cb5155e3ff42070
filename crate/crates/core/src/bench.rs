//! Wall-clock comparison of the ξ recurrence with determinant evaluation.

use std::hint::black_box;
use std::time::{Duration, Instant};

use crate::greens::oracle::{banded_lu_det, lu_det};
use crate::greens::{build_fundamental, xi_recurrence};
use crate::model::PeriodicModel;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub order: usize,
    /// all of ξ_{t,0..=k} by the recurrence
    pub recurrence: Duration,
    /// one dense LU determinant of the order-k matrix
    pub dense_lu: Duration,
    /// one banded LU determinant of the order-k matrix
    pub banded_lu: Duration,
    pub xi: f64,
    pub det: f64,
}

impl BenchRow {
    pub fn speedup(&self) -> f64 {
        self.dense_lu.as_secs_f64() / self.recurrence.as_secs_f64().max(1e-12)
    }
}

/// Fastest of `reps` runs.
fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let v = black_box(f());
        best = best.min(start.elapsed());
        out = Some(v);
    }
    (best, out.unwrap())
}

/// Times both methods at each order, anchoring at season `l`.
pub fn run(model: &PeriodicModel, orders: &[usize], reps: usize) -> Vec<BenchRow> {
    let t = model.period() as i64;
    let lower = model.ar_order().saturating_sub(1);
    orders
        .iter()
        .map(|&k| {
            let (recurrence, table) = best_of(reps, || xi_recurrence(black_box(model), t, k));
            let f = build_fundamental(model, t, k);
            let (dense_lu, det) = best_of(reps, || lu_det(black_box(f.matrix())));
            let (banded_lu, _) = best_of(reps, || banded_lu_det(black_box(f.matrix()), lower, 1));
            BenchRow {
                order: k,
                recurrence,
                dense_lu,
                banded_lu,
                xi: table.xi(k as i64),
                det,
            }
        })
        .collect()
}
