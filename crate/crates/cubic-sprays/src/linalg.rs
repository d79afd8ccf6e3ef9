//! Small dense linear algebra: fraction-free exact elimination for the
//! rational backend, one-sided Jacobi SVD for the complex backend, and a
//! generic pivoted solver. Everything here is desk scale (matrices of a
//! few dozen entries), so robustness wins over speed.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::{clear_denominators, Cx, Rat, Scalar};

/// Rank decision together with the evidence that certifies it.
#[derive(Debug, Clone)]
pub struct RankResult {
    pub rank: usize,
    pub evidence: RankEvidence,
}

#[derive(Debug, Clone)]
pub enum RankEvidence {
    /// Exact backend: a nonzero maximal minor and where it sits.
    ExactMinor {
        minor: Rat,
        rows: Vec<usize>,
        cols: Vec<usize>,
    },
    /// Numeric backend: the singular values, largest first.
    SingularValues(Vec<f64>),
}

impl RankEvidence {
    pub fn singular_values(&self) -> Option<&[f64]> {
        match self {
            RankEvidence::SingularValues(s) => Some(s),
            _ => None,
        }
    }
}

/// Exact rank of a rational matrix by fraction-free (Bareiss) elimination on
/// the denominator-cleared rows. Returns the pivot rows/columns and the exact
/// value of the corresponding maximal minor.
pub fn rational_rank(rows: &[Vec<Rat>]) -> RankResult {
    assert!(!rows.is_empty());
    let ncols = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
    let nrows = m.len();
    let mut row_of = (0..nrows).collect::<Vec<_>>();
    let mut pivot_rows = Vec::new();
    let mut pivot_cols = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0usize;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        row_of.swap(r, p);
        pivot_rows.push(row_of[r]);
        pivot_cols.push(c);
        for i in (r + 1)..nrows {
            for j in (c + 1)..ncols {
                let num = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = num / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == nrows {
            break;
        }
    }
    let rank = pivot_rows.len();
    let minor = if rank == 0 {
        Rat::zero()
    } else {
        let sub: Vec<Vec<Rat>> = pivot_rows
            .iter()
            .map(|&i| pivot_cols.iter().map(|&j| rows[i][j].clone()).collect())
            .collect();
        rational_det(&sub)
    };
    debug_assert!(rank == 0 || !minor.is_zero());
    RankResult {
        rank,
        evidence: RankEvidence::ExactMinor {
            minor,
            rows: pivot_rows,
            cols: pivot_cols,
        },
    }
}

/// Exact determinant of a square rational matrix (plain pivoted elimination).
pub fn rational_det(rows: &[Vec<Rat>]) -> Rat {
    let n = rows.len();
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det = det * m[c][c].clone();
        let inv_pivot = Rat::one() / m[c][c].clone();
        for i in (c + 1)..n {
            let factor = m[i][c].clone() * inv_pivot.clone();
            for j in c..n {
                let sub = factor.clone() * m[c][j].clone();
                m[i][j] = m[i][j].clone() - sub;
            }
        }
    }
    det
}

/// Reduced row echelon form over the rationals; returns (rank, pivot columns).
pub fn rational_rref(m: &mut Vec<Vec<Rat>>) -> (usize, Vec<usize>) {
    let nrows = m.len();
    let ncols = if nrows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rat::one() / m[r][c].clone();
        for j in c..ncols {
            m[r][j] = m[r][j].clone() * inv.clone();
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..ncols {
                    let sub = factor.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    (r, pivots)
}

/// Basis of the right nullspace of a rational matrix.
pub fn rational_nullspace(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let ncols = rows[0].len();
    let mut m = rows.to_vec();
    let (_, pivots) = rational_rref(&mut m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (pr, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[pr][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Singular values (descending) of a complex matrix by one-sided Jacobi,
/// optionally with the right singular vectors.
pub fn complex_svd(rows: &[Vec<Cx>], want_v: bool) -> (Vec<f64>, Option<Vec<Vec<Cx>>>) {
    let nrows = rows.len();
    let ncols = rows[0].len();
    // Work on columns; if the matrix is wide and V is not needed, transpose
    // (singular values are shared).
    let transpose = ncols > nrows && !want_v;
    let (m, n) = if transpose { (ncols, nrows) } else { (nrows, ncols) };
    let mut a = vec![vec![Cx::new(0.0, 0.0); n]; m];
    for i in 0..nrows {
        for j in 0..ncols {
            if transpose {
                a[j][i] = rows[i][j];
            } else {
                a[i][j] = rows[i][j];
            }
        }
    }
    let mut v: Vec<Vec<Cx>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Cx::new(1.0, 0.0) } else { Cx::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = Cx::new(0.0, 0.0);
                for i in 0..m {
                    app += a[i][p].norm_sqr();
                    aqq += a[i][q].norm_sqr();
                    apq += a[i][p].conj() * a[i][q];
                }
                let napq = apq.norm();
                if napq <= eps * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                off = off.max(napq / (app * aqq).sqrt().max(1e-300));
                // Phase-rotate column q so the Gram off-diagonal is real,
                // then apply the real Jacobi rotation.
                let phase = apq / napq;
                let tau = (aqq - app) / (2.0 * napq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let ph = phase.conj();
                for i in 0..m {
                    let cp = a[i][p];
                    let cq = a[i][q] * ph;
                    a[i][p] = cp * cs - cq * sn;
                    a[i][q] = cp * sn + cq * cs;
                }
                for i in 0..n {
                    let vp = v[i][p];
                    let vq = v[i][q] * ph;
                    v[i][p] = vp * cs - vq * sn;
                    v[i][q] = vp * sn + vq * cs;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
    }
    let mut sigma: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let s = (0..m).map(|i| a[i][j].norm_sqr()).sum::<f64>().sqrt();
            (s, j)
        })
        .collect();
    sigma.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values: Vec<f64> = sigma.iter().map(|(s, _)| *s).collect();
    let vectors = if want_v {
        Some(
            sigma
                .iter()
                .map(|&(_, j)| (0..n).map(|i| v[i][j]).collect())
                .collect(),
        )
    } else {
        None
    };
    (values, vectors)
}

/// Numeric rank: count of singular values above `tol * sigma_max`.
pub fn complex_rank(rows: &[Vec<Cx>], tol: f64) -> RankResult {
    let (sv, _) = complex_svd(rows, false);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let rank = if sigma_max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > tol * sigma_max).count()
    };
    RankResult {
        rank,
        evidence: RankEvidence::SingularValues(sv),
    }
}

/// Determinant over any scalar backend, pivoting on magnitude.
pub fn det<K: Scalar>(rows: &[Vec<K>]) -> K {
    let n = rows.len();
    let mut m: Vec<Vec<K>> = rows.to_vec();
    let mut sign_flip = false;
    let mut det = K::one();
    for c in 0..n {
        let mut best = c;
        let mut best_mag = m[c][c].mag();
        for i in (c + 1)..n {
            let mag = m[i][c].mag();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if m[best][c].is_zero() {
            return K::zero();
        }
        if best != c {
            m.swap(c, best);
            sign_flip = !sign_flip;
        }
        det = det * m[c][c].clone();
        let inv = K::one() / m[c][c].clone();
        for i in (c + 1)..n {
            let factor = m[i][c].clone() * inv.clone();
            for j in c..n {
                let sub = factor.clone() * m[c][j].clone();
                m[i][j] = m[i][j].clone() - sub;
            }
        }
    }
    if sign_flip {
        -det
    } else {
        det
    }
}

/// Solve the (possibly overdetermined, assumed consistent) system
/// `sum_k coeff_k * cols[k] = target` by pivoted elimination. Returns the
/// coefficients and the worst relative residual row.
pub fn solve_in_span<K: Scalar>(cols: &[Vec<K>], target: &[K]) -> Option<(Vec<K>, f64)> {
    let nrows = target.len();
    let ncols = cols.len();
    debug_assert!(cols.iter().all(|c| c.len() == nrows));
    // Augmented [cols | target], eliminate with row pivoting on magnitude.
    let mut aug: Vec<Vec<K>> = (0..nrows)
        .map(|i| {
            let mut row: Vec<K> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let scale = aug
        .iter()
        .flat_map(|r| r.iter().map(|x| x.mag()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut pivot_rows = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        let mut best = None;
        let mut best_mag = 0.0;
        for i in r..nrows {
            let mag = aug[i][c].mag();
            if mag > best_mag {
                best = Some(i);
                best_mag = mag;
            }
        }
        let p = best?;
        if aug[p][c].is_zero() {
            return None;
        }
        aug.swap(r, p);
        let inv = K::one() / aug[r][c].clone();
        for i in 0..nrows {
            if i != r && !aug[i][c].is_zero() {
                let factor = aug[i][c].clone() * inv.clone();
                for j in c..=ncols {
                    let sub = factor.clone() * aug[r][j].clone();
                    aug[i][j] = aug[i][j].clone() - sub;
                }
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    if pivot_rows.len() < ncols {
        return None;
    }
    let mut coeffs = vec![K::zero(); ncols];
    for (c, &pr) in pivot_rows.iter().enumerate() {
        coeffs[c] = aug[pr][ncols].clone() / aug[pr][c].clone();
    }
    // Residual over the non-pivot rows.
    let mut worst = 0.0f64;
    for i in 0..nrows {
        let mut acc = target[i].clone();
        for (k, col) in cols.iter().enumerate() {
            acc = acc - coeffs[k].clone() * col[i].clone();
        }
        worst = worst.max(acc.mag() / scale);
    }
    Some((coeffs, worst))
}
