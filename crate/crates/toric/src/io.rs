//! JSON file formats for systems and certified roots.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::condition::Certificate;
use crate::error::{Error, Result};
use crate::expsum::{ExpSumSystem, SupportTuple, C64};
use crate::polytope::Point;
use crate::solver::CertifiedSolutionSet;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(c: C64) -> Self {
        ComplexJson { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> Self {
        C64::new(c.re, c.im)
    }
}

/// A system, or just its supports when `coefficients` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub version: String,
    pub n: usize,
    pub supports: Vec<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<ComplexJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl SystemFile {
    pub fn from_system(f: &ExpSumSystem) -> Self {
        let st = &f.supports;
        SystemFile {
            version: FORMAT_VERSION.into(),
            n: st.n,
            supports: st.points().to_vec(),
            weights: (!st.unit_weights()).then(|| st.weights().to_vec()),
            coefficients: Some(f.coeffs.iter().map(|r| r.iter().map(|&c| c.into()).collect()).collect()),
            labels: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SystemFile = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {:?}", self.version)));
        }
        if self.supports.len() != self.n {
            return Err(bad(format!("expected {} supports, found {}", self.n, self.supports.len())));
        }
        for (i, a) in self.supports.iter().enumerate() {
            if a.iter().any(|p| p.len() != self.n) {
                return Err(bad(format!("support {i} has a point of the wrong dimension")));
            }
        }
        let sizes: Vec<usize> = self.supports.iter().map(Vec::len).collect();
        let shape_ok = |rows: usize, lens: Vec<usize>| rows == self.n && lens == sizes;
        if let Some(w) = &self.weights {
            if !shape_ok(w.len(), w.iter().map(Vec::len).collect()) {
                return Err(bad("weights do not match supports"));
            }
            if w.iter().flatten().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(bad("weights must be positive"));
            }
        }
        if let Some(c) = &self.coefficients {
            if !shape_ok(c.len(), c.iter().map(Vec::len).collect()) {
                return Err(bad("coefficients do not match supports"));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.n {
                return Err(bad("one label per equation expected"));
            }
        }
        Ok(())
    }

    pub fn support_tuple(&self) -> Result<SupportTuple> {
        SupportTuple::new(self.supports.clone(), self.weights.clone())
    }

    pub fn system(&self) -> Result<ExpSumSystem> {
        let c = self.coefficients.as_ref().ok_or_else(|| bad("file has no coefficients"))?;
        let coeffs = c.iter().map(|r| r.iter().map(|&z| z.into()).collect()).collect();
        ExpSumSystem::new(Arc::new(self.support_tuple()?), coeffs)
    }

    /// SHA-256 of the compact JSON, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plain data serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub certificate: Certificate,
}

impl RootEntry {
    pub fn new(z: &[C64], certificate: Certificate) -> Self {
        RootEntry { re: z.iter().map(|c| c.re).collect(), im: z.iter().map(|c| c.im).collect(), certificate }
    }

    pub fn point(&self) -> Vec<C64> {
        self.re.iter().zip(&self.im).map(|(&a, &b)| C64::new(a, b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsFile {
    pub version: String,
    pub system_hash: String,
    pub roots: Vec<RootEntry>,
}

impl RootsFile {
    pub fn from_solution(system: &SystemFile, sol: &CertifiedSolutionSet) -> Self {
        RootsFile {
            version: FORMAT_VERSION.into(),
            system_hash: system.hash(),
            roots: sol.roots.iter().map(|r| RootEntry::new(&r.point, r.certificate)).collect(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: RootsFile = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
        if f.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {:?}", f.version)));
        }
        for (k, r) in f.roots.iter().enumerate() {
            if r.re.len() != r.im.len() {
                return Err(bad(format!("root {k}: re and im lengths differ")));
            }
            let c = &r.certificate;
            let expect = c.beta * c.mu * c.nu / 2.0;
            if c.alpha_hat.is_finite() && (c.alpha_hat - expect).abs() > 1e-12 * expect.abs().max(1e-300) {
                return Err(bad(format!("root {k}: certificate is inconsistent")));
            }
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Non-finite floats are written as `null` and read back as `+∞`.
pub mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
