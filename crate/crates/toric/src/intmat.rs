//! Small exact integer matrix routines (i128 internally).

use num_integer::Integer;
use num_rational::Ratio;

pub type Rat = Ratio<i128>;

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows: echelon form, positive pivots, entries above each
/// pivot reduced into `[0, pivot)`.
pub fn hnf_rows(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prow = 0;
    for col in 0..ncols {
        if prow >= m.len() {
            break;
        }
        // gcd-eliminate column `col` among rows prow..
        loop {
            let mut best: Option<usize> = None;
            for r in prow..m.len() {
                if m[r][col] != 0 && best.map_or(true, |b| m[r][col].abs() < m[b][col].abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(prow, b);
            let mut done = true;
            for r in prow + 1..m.len() {
                if m[r][col] != 0 {
                    let q = Integer::div_floor(&m[r][col], &m[prow][col]);
                    for c in 0..ncols {
                        m[r][c] -= q * m[prow][c];
                    }
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[prow][col] == 0 {
            continue;
        }
        if m[prow][col] < 0 {
            for c in 0..ncols {
                m[prow][c] = -m[prow][c];
            }
        }
        pivots.push((prow, col));
        prow += 1;
    }
    m.truncate(prow);
    for &(r, col) in &pivots {
        let p = m[r][col];
        for r2 in 0..r {
            let q = Integer::div_floor(&m[r2][col], &p);
            if q != 0 {
                for c in 0..ncols {
                    m[r2][c] -= q * m[r][c];
                }
            }
        }
    }
    m.into_iter()
        .map(|r| r.into_iter().map(|x| x as i64).collect())
        .collect()
}

/// Rank of an integer matrix.
pub fn rank(rows: &[Vec<i64>], ncols: usize) -> usize {
    hnf_rows(rows, ncols).len()
}

/// Dimension of the affine hull of a point set (-1 for empty input encoded as 0 here).
pub fn affine_dim(points: &[Vec<i64>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let p0 = &points[0];
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs, p0.len())
}

/// Exact determinant by fraction-free elimination.
pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(s) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

/// Exact rational inverse by Gauss-Jordan. `None` if singular.
pub fn inverse_rational(m: &[Vec<i64>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<Rat> = r.iter().map(|&x| Rat::from_integer(x as i128)).collect();
            row.extend((0..n).map(|j| Rat::from_integer((i == j) as i128)));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&r| a[r][k] != Rat::from_integer(0))?;
        a.swap(k, p);
        let piv = a[k][k];
        for c in 0..2 * n {
            a[k][c] /= piv;
        }
        for r in 0..n {
            if r != k && a[r][k] != Rat::from_integer(0) {
                let f = a[r][k];
                for c in 0..2 * n {
                    let v = a[k][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Divide by the gcd of the entries. Zero stays zero.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_vec(v);
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized cross product: a vector orthogonal to the `m-1` given vectors in `Z^m`
/// (signed maximal minors).
pub fn cross(vs: &[Vec<i64>], m: usize) -> Vec<i64> {
    debug_assert_eq!(vs.len() + 1, m);
    (0..m)
        .map(|j| {
            let minor: Vec<Vec<i64>> = vs
                .iter()
                .map(|v| (0..m).filter(|&c| c != j).map(|c| v[c]).collect())
                .collect();
            let d = det(&minor) as i64;
            if j % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

/// Unimodular `P` whose first row is the primitive vector `xi`.
///
/// For a point `p`, `P p = (xi·p, c)` where `c` are integer coordinates in a
/// basis of the lattice `xi^⊥ ∩ Z^m`.
pub fn complete_primitive(xi: &[i64]) -> Vec<Vec<i64>> {
    let m = xi.len();
    // column operations on the row xi tracked as C (xi·C) and its inverse P = C^{-1}
    let mut row: Vec<i128> = xi.iter().map(|&x| x as i128).collect();
    let mut p: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| (i == j) as i128).collect())
        .collect();
    // column op: col_j -= q col_k  (C ← C E); P ← E^{-1} P i.e. row_k(P) += q row_j(P)
    loop {
        let nz: Vec<usize> = (0..m).filter(|&j| row[j] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let k = *nz.iter().min_by_key(|&&j| row[j].abs()).unwrap();
        for &j in &nz {
            if j != k {
                let q = Integer::div_floor(&row[j], &row[k]);
                row[j] -= q * row[k];
                for c in 0..m {
                    let v = p[j][c];
                    p[k][c] += q * v;
                }
            }
        }
    }
    let k = (0..m).find(|&j| row[j] != 0).expect("xi must be nonzero");
    debug_assert_eq!(row[k].abs(), 1, "xi must be primitive");
    if row[k] < 0 {
        // negate column k of C, i.e. row k of P
        row[k] = -row[k];
        for c in 0..m {
            p[k][c] = -p[k][c];
        }
    }
    // swap columns 0 and k of C, i.e. rows of P
    p.swap(0, k);
    p.into_iter()
        .map(|r| r.into_iter().map(|x| x as i64).collect())
        .collect()
}

pub fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|r| dot(r, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_diagonal() {
        let h = hnf_rows(&[vec![2, 0], vec![0, 2], vec![2, 2]], 2);
        assert_eq!(h, vec![vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn hnf_reduces_above_pivot() {
        let h = hnf_rows(&[vec![1, 4], vec![0, 3]], 2);
        assert_eq!(h, vec![vec![1, 1], vec![0, 3]]);
    }

    #[test]
    fn det_by_cofactor() {
        assert_eq!(det(&[vec![1, 1], vec![0, 3]]), 3);
        assert_eq!(det(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]), -5);
    }

    #[test]
    fn completion_first_row() {
        for xi in [vec![2, -3], vec![-1, 2, 5], vec![0, 0, 1], vec![6, 10, 15]] {
            let p = complete_primitive(&xi);
            assert_eq!(p[0], xi);
            assert_eq!(det(&p).abs(), 1);
        }
    }

    #[test]
    fn cross_is_orthogonal() {
        let vs = vec![vec![1, 2, 3], vec![0, 1, 4]];
        let c = cross(&vs, 3);
        assert_eq!(dot(&c, &vs[0]), 0);
        assert_eq!(dot(&c, &vs[1]), 0);
        assert!(c.iter().any(|&x| x != 0));
    }
}
