//! Small dense linear algebra and periodic finite differences.

mod grid;
mod matrix;
mod stencil;

pub use grid::Grid;
pub use matrix::{svd_small, sym_eigen, SmallMatrix, Svd, SymEigen, MAX_DIM};
pub use stencil::{periodic_derivative, periodic_mixed_derivative, StencilOrder, StencilSpec};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureKind {
    Euclidean,
    PseudoEuclidean,
}

/// Ambient signature: `m` tangent-side coordinates with `+1`, `n` normal-side
/// coordinates with `+1` (Euclidean) or `-1` (pseudo-Euclidean).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub m: usize,
    pub n: usize,
    pub kind: SignatureKind,
}

impl Signature {
    pub fn new(m: usize, n: usize, kind: SignatureKind) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid(format!("signature needs m, n >= 1 (got m={m}, n={n})")));
        }
        if m > crate::MAX_M || m + n > crate::MAX_AMBIENT {
            return Err(invalid(format!(
                "signature m={m}, n={n} exceeds supported size (m <= {}, m+n <= {})",
                crate::MAX_M,
                crate::MAX_AMBIENT
            )));
        }
        Ok(Self { m, n, kind })
    }

    pub fn euclidean(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, SignatureKind::Euclidean)
    }

    pub fn pseudo(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, SignatureKind::PseudoEuclidean)
    }

    pub fn ambient_dim(&self) -> usize {
        self.m + self.n
    }

    pub fn is_pseudo(&self) -> bool {
        self.kind == SignatureKind::PseudoEuclidean
    }

    /// Sign of the normal-side coordinates.
    pub fn normal_sign(&self) -> f64 {
        match self.kind {
            SignatureKind::Euclidean => 1.0,
            SignatureKind::PseudoEuclidean => -1.0,
        }
    }

    /// Diagonal entry of the ambient metric for coordinate `c`.
    #[inline]
    pub fn eta(&self, c: usize) -> f64 {
        if c < self.m {
            1.0
        } else {
            self.normal_sign()
        }
    }

    /// Ambient inner product of two vectors of length `m + n`.
    #[inline]
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.ambient_dim();
        let mut s = 0.0;
        for c in 0..d {
            s += self.eta(c) * a[c] * b[c];
        }
        s
    }
}
