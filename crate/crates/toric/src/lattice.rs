//! The lattice spanned by support differences, its dual, and canonical
//! representatives of points of `C^n / 2πi Λ*`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::intmat::{self, Rat};

/// Hermite normal form basis of a full rank lattice in `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub rank: usize,
    /// Rows form a basis; upper triangular with positive pivots.
    pub basis_rows: Vec<Vec<i64>>,
}

/// Columns are a basis of the dual lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DualBasis {
    pub columns: Vec<Vec<Rat>>,
}

impl LatticeBasis {
    /// HNF of the lattice spanned by arbitrary integer generators.
    pub fn from_generators(gens: &[Vec<i64>], n: usize) -> Result<Self> {
        let rows = intmat::hnf_rows(gens, n);
        if rows.len() < n {
            return Err(Error::RankDeficient { rank: rows.len(), n });
        }
        Ok(LatticeBasis { rank: n, basis_rows: rows })
    }

    pub fn det(&self) -> i64 {
        (0..self.rank).map(|i| self.basis_rows[i][i]).product()
    }

    /// Rational matrix `D` with `U D = I`. Entry `[i][j]` is row `i` of column `j`.
    pub fn dual_matrix(&self) -> Vec<Vec<Rat>> {
        intmat::inverse_rational(&self.basis_rows).expect("full rank basis")
    }

    pub fn dual_basis(&self) -> DualBasis {
        let d = self.dual_matrix();
        let n = self.rank;
        DualBasis {
            columns: (0..n).map(|j| (0..n).map(|i| d[i][j]).collect()).collect(),
        }
    }

    /// Coordinates of `Im z` in the basis `2π D`: `c = U Im z / 2π`.
    pub fn dual_coordinates(&self, im: &[f64]) -> Vec<f64> {
        self.basis_rows
            .iter()
            .map(|r| r.iter().zip(im).map(|(&u, &y)| u as f64 * y).sum::<f64>() / (2.0 * PI))
            .collect()
    }

    fn from_dual_coordinates(&self, c: &[f64]) -> Vec<f64> {
        let d = self.dual_matrix();
        let n = self.rank;
        (0..n)
            .map(|i| {
                2.0 * PI
                    * (0..n)
                        .map(|j| rat_f64(d[i][j]) * c[j])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Canonical representative: real part unchanged, imaginary part in the
    /// half-open fundamental cell `2π D [0,1)^n`.
    pub fn canonicalize(&self, z: &[Complex64]) -> Vec<Complex64> {
        let im: Vec<f64> = z.iter().map(|w| w.im).collect();
        let c: Vec<f64> = self
            .dual_coordinates(&im)
            .into_iter()
            .map(|x| {
                let r = x - x.floor();
                if r >= 1.0 || r.abs() < 1e-15 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        let y = self.from_dual_coordinates(&c);
        z.iter().zip(y).map(|(w, y)| Complex64::new(w.re, y)).collect()
    }

    /// Representative of `z - w` with imaginary dual coordinates in `[-1/2, 1/2)`.
    pub fn reduce_difference(&self, z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        let d: Vec<Complex64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
        let im: Vec<f64> = d.iter().map(|x| x.im).collect();
        let c: Vec<f64> = self
            .dual_coordinates(&im)
            .into_iter()
            .map(|x| x - x.round())
            .collect();
        let y = self.from_dual_coordinates(&c);
        d.iter().zip(y).map(|(a, y)| Complex64::new(a.re, y)).collect()
    }

    /// Euclidean distance in `C^n / 2πi Λ*` (exact for nearby points).
    pub fn torus_distance(&self, z: &[Complex64], w: &[Complex64]) -> f64 {
        self.reduce_difference(z, w)
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

pub fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lattice spanned by all differences `a - a'` within each support.
pub fn lattice_from_points(supports: &[Vec<Vec<i64>>], n: usize) -> Result<LatticeBasis> {
    let mut gens = Vec::new();
    for (i, a) in supports.iter().enumerate() {
        if a.len() < 2 {
            return Err(Error::TooFewPoints(i));
        }
        for p in &a[1..] {
            gens.push(p.iter().zip(&a[0]).map(|(x, y)| x - y).collect());
        }
    }
    LatticeBasis::from_generators(&gens, n)
}
