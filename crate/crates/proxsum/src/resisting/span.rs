//! Incremental orthonormal tracking of everything a deterministic
//! algorithm has "seen": basis vectors already revealed plus every point
//! it has queried. Fresh adversary directions are drawn orthogonal to the
//! whole of it.

use crate::error::{Error, Result};
use crate::tol;
use crate::vector::Vector;

pub struct KnowledgeSpan {
    dim: usize,
    ortho: Vec<Vector>,
}

impl KnowledgeSpan {
    pub fn new(dim: usize) -> Self {
        KnowledgeSpan {
            dim,
            ortho: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.ortho.len()
    }

    fn project_out(&self, x: &Vector) -> Vector {
        let mut r = x.clone();
        for w in &self.ortho {
            r.axpy(-r.dot(w), w);
        }
        r
    }

    /// Adds x's new direction (if any) to the span. Two orthogonalization
    /// passes keep the basis orthonormal to 1e−10 and beyond.
    pub fn absorb(&mut self, x: &Vector) {
        let scale = x.norm();
        if scale == 0.0 {
            return;
        }
        let r1 = self.project_out(x);
        if r1.norm() <= 1e-12 * scale {
            return;
        }
        let r2 = self.project_out(&r1);
        let n = r2.norm();
        if n <= 1e-12 * scale {
            return;
        }
        self.ortho.push(r2.scale(1.0 / n));
    }

    /// Draws a unit vector orthogonal to the span (and absorbs it). The
    /// candidate is the standard basis direction with the largest residual,
    /// re-orthogonalized twice, so the draw is deterministic.
    pub fn fresh_direction(&mut self) -> Result<Vector> {
        let k = self.ortho.len();
        // residual² of e_j is 1 − Σ_i W_i[j]²: O(rank) per candidate
        let mut best_j = 0;
        let mut best_res = f64::NEG_INFINITY;
        for j in 0..self.dim {
            let mut proj = 0.0;
            for w in &self.ortho {
                proj += w[j] * w[j];
            }
            let res = 1.0 - proj;
            if res > best_res {
                best_res = res;
                best_j = j;
            }
        }
        let _ = k;
        if best_res.max(0.0).sqrt() < tol::DIMENSION_EXHAUSTED {
            return Err(Error::DimensionExhausted {
                residual: best_res.max(0.0).sqrt(),
            });
        }
        let e = Vector::basis(self.dim, best_j);
        let r1 = self.project_out(&e);
        let r2 = self.project_out(&r1);
        let n = r2.norm();
        if n < tol::DIMENSION_EXHAUSTED {
            return Err(Error::DimensionExhausted { residual: n });
        }
        let v = r2.scale(1.0 / n);
        self.ortho.push(v.clone());
        Ok(v)
    }
}
