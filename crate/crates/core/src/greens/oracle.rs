//! Determinant evaluators used to cross-check the ξ recurrence.
//!
//! None of these exploit the Hessenberg structure the recurrence relies on:
//! [`laplace_det`] is a plain cofactor expansion, [`banded_lu_det`] is
//! Gaussian elimination with partial pivoting restricted to a band, and
//! [`lu_det`] is dense LU.

use nalgebra::DMatrix;

use super::FundamentalMatrix;

/// Largest order accepted by [`laplace_det`].
pub const LAPLACE_MAX_ORDER: usize = 20;
/// Largest order [`DeterminantOracle`] evaluates.
pub const LU_MAX_ORDER: usize = 512;

/// Cofactor expansion along successive first columns.
///
/// Minors are memoised by the set of remaining rows, so the cost is
/// O(2^k · k) instead of O(k!).
pub fn laplace_det(a: &DMatrix<f64>) -> f64 {
    let k = a.nrows();
    assert_eq!(k, a.ncols(), "determinant of a non-square matrix");
    assert!(
        k <= LAPLACE_MAX_ORDER,
        "Laplace expansion limited to order {LAPLACE_MAX_ORDER}"
    );
    if k == 0 {
        return 1.0;
    }
    let full = (1usize << k) - 1;
    let mut memo = vec![f64::NAN; 1 << k];
    memo[0] = 1.0;
    expand(a, full, &mut memo)
}

fn expand(a: &DMatrix<f64>, rows: usize, memo: &mut [f64]) -> f64 {
    if !memo[rows].is_nan() {
        return memo[rows];
    }
    let k = a.nrows();
    let col = k - rows.count_ones() as usize;
    let mut det = 0.0;
    let mut position = 0;
    for i in 0..k {
        if rows & (1 << i) == 0 {
            continue;
        }
        let entry = a[(i, col)];
        if entry != 0.0 {
            let minor = expand(a, rows & !(1 << i), memo);
            let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * entry * minor;
        }
        position += 1;
    }
    memo[rows] = det;
    det
}

/// Dense LU with partial pivoting.
pub fn lu_det(a: &DMatrix<f64>) -> f64 {
    a.clone().determinant()
}

/// LU with partial pivoting for a matrix with `lower` nonzero subdiagonals
/// and `upper` nonzero superdiagonals. Entries outside the band are assumed
/// zero. Cost is O(k · lower · (lower + upper)).
pub fn banded_lu_det(a: &DMatrix<f64>, lower: usize, upper: usize) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // row pivoting can push fill up to lower + upper above the diagonal
    let width = 2 * lower + upper + 1;
    let mut band = vec![0.0; n * width];
    let at = |i: usize, j: usize| i * width + (j + lower - i);
    for i in 0..n {
        let lo = i.saturating_sub(lower);
        let hi = (i + upper).min(n - 1);
        for j in lo..=hi {
            band[at(i, j)] = a[(i, j)];
        }
    }
    let mut det = 1.0;
    for j in 0..n {
        let last_row = (j + lower).min(n - 1);
        let mut pivot = j;
        let mut best = band[at(j, j)].abs();
        for i in j + 1..=last_row {
            let v = band[at(i, j)].abs();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        let last_col = (j + lower + upper).min(n - 1);
        if pivot != j {
            for c in j..=last_col {
                band.swap(at(j, c), at(pivot, c));
            }
            det = -det;
        }
        let d = band[at(j, j)];
        det *= d;
        for i in j + 1..=last_row {
            let factor = band[at(i, j)] / d;
            if factor == 0.0 {
                continue;
            }
            band[at(i, j)] = 0.0;
            for c in j + 1..=last_col {
                band[at(i, c)] -= factor * band[at(j, c)];
            }
        }
    }
    det
}

/// Picks an evaluator by order: Laplace up to 14, banded LU up to 512.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeterminantOracle;

impl DeterminantOracle {
    pub fn det(&self, f: &FundamentalMatrix) -> f64 {
        let k = f.order();
        if k <= 14 {
            laplace_det(f.matrix())
        } else {
            assert!(k <= LU_MAX_ORDER, "oracle limited to order {LU_MAX_ORDER}");
            banded_lu_det(f.matrix(), f.ar_order().saturating_sub(1), 1)
        }
    }
}
