//! Independent numerical oracles. Nothing here calls into the eigensolver
//! or the secular solver under test.
#![allow(dead_code, clippy::needless_range_loop)]

use wellcond_core::DenseMatrix;

/// Number of eigenvalues of symmetric `a` strictly below `sigma`, from the
/// signs of the pivots of an unpivoted LDL^t of `a - sigma I`
/// (Sylvester's law of inertia).
pub fn count_below(a: &DenseMatrix, sigma: f64) -> usize {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i)).collect();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -f64::MIN_POSITIVE;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let f = m[i][k] / pivot;
            for j in (k + 1)..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

/// Eigenvalues (descending) by bisection on the inertia count.
pub fn bisection_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut lo_bound = f64::INFINITY;
    let mut hi_bound = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        lo_bound = lo_bound.min(a[(i, i)] - radius);
        hi_bound = hi_bound.max(a[(i, i)] + radius);
    }
    lo_bound -= 1.0;
    hi_bound += 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (lo_bound, hi_bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(a, mid) >= n - k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i)).collect();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    d
}

pub fn shifted(a: &DenseMatrix, lambda: f64) -> DenseMatrix {
    let mut s = a.clone();
    for i in 0..a.rows() {
        s[(i, i)] -= lambda;
    }
    s
}

/// `Y^t Y` by the textbook triple loop.
pub fn naive_gram(y: &DenseMatrix) -> DenseMatrix {
    let r = y.cols();
    let mut g = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let mut s = 0.0;
            for k in 0..y.rows() {
                s += y[(k, i)] * y[(k, j)];
            }
            g[(i, j)] = s;
        }
    }
    g
}

/// Random symmetric matrix with entries from a fixed LCG, independent of the
/// library's generators.
pub fn lcg_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = next();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}
