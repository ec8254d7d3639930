//! Exact values of the form `Σ q_r √r` with rational `q_r` and squarefree `r`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::intmat::Rat;
use crate::lattice::rat_f64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SqrtSum {
    terms: BTreeMap<i64, Rat>,
}

/// Split `n = s² r` with `r` squarefree.
pub fn split_square(n: i64) -> (i64, i64) {
    assert!(n > 0);
    let (mut s, mut r) = (1i64, n);
    let mut p = 2i64;
    while p * p <= r {
        while r % (p * p) == 0 {
            r /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, r)
}

impl SqrtSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: Rat) -> Self {
        let mut s = Self::zero();
        s.add_term(q, 1);
        s
    }

    /// Adds `q·√n`.
    pub fn add_term(&mut self, q: Rat, n: i64) {
        if q.is_zero() {
            return;
        }
        let (s, r) = split_square(n);
        let e = self.terms.entry(r).or_insert_with(Rat::zero);
        *e += q * Rat::from_integer(s as i128);
        if e.is_zero() {
            self.terms.remove(&r);
        }
    }

    pub fn add(&mut self, other: &SqrtSum) {
        for (&r, &q) in &other.terms {
            self.add_term(q, r);
        }
    }

    pub fn scale(&self, q: Rat) -> SqrtSum {
        let mut s = Self::zero();
        for (&r, &c) in &self.terms {
            s.add_term(c * q, r);
        }
        s
    }

    /// The rational part when no irrational term is present.
    pub fn as_rational(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&1).copied(),
            _ => None,
        }
    }

    pub fn coefficient(&self, r: i64) -> Rat {
        self.terms.get(&r).copied().unwrap_or_else(Rat::zero)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&r, &q)| rat_f64(q) * (r as f64).sqrt())
            .sum()
    }
}

impl fmt::Display for SqrtSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&r, q)| if r == 1 { format!("{q}") } else { format!("{q}*sqrt({r})") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
