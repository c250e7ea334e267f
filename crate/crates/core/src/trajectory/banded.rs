//! Symmetric block-tridiagonal systems with 2x2 blocks.
//!
//! Block elimination without pivoting; valid for positive-definite systems,
//! where every Schur complement stays positive definite. Cost is linear in
//! the number of blocks.

use crate::error::{Error, Result};

/// Row-major 2x2 block.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block2 {
    pub m: [[f64; 2]; 2],
}

impl Block2 {
    pub const ZERO: Self = Self { m: [[0.0; 2]; 2] };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::new(s, 0.0, 0.0, s)
    }

    /// `alpha I + beta v v^T`.
    pub fn identity_plus_outer(alpha: f64, beta: f64, v: [f64; 2]) -> Self {
        Self::new(
            alpha + beta * v[0] * v[0],
            beta * v[0] * v[1],
            beta * v[1] * v[0],
            alpha + beta * v[1] * v[1],
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if !(det.is_finite() && det != 0.0) {
            return None;
        }
        let [[a, b], [c, d]] = self.m;
        Some(Self::new(d / det, -b / det, -c / det, a / det))
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a, c, b, d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (x, y) = (&self.m, &o.m);
        Self::new(
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += o.m[r][c];
            }
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] -= o.m[r][c];
            }
        }
        out
    }
}

/// Symmetric matrix given by its diagonal blocks and the blocks directly
/// above the diagonal (`upper[k]` couples block rows `k` and `k + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    pub diag: Vec<Block2>,
    pub upper: Vec<Block2>,
}

impl BlockTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![Block2::ZERO; n],
            upper: vec![Block2::ZERO; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds the Hessian contribution `[[h, -h], [-h, h]]` of a function of
    /// `v[k + 1] - v[k]`.
    pub fn add_difference_term(&mut self, k: usize, h: &Block2) {
        self.diag[k] = self.diag[k].add(h);
        self.diag[k + 1] = self.diag[k + 1].add(h);
        self.upper[k] = self.upper[k].sub(h);
    }

    pub fn mul_vec(&self, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = self.len();
        let mut out: Vec<[f64; 2]> = (0..n).map(|k| self.diag[k].apply(x[k])).collect();
        for k in 0..n.saturating_sub(1) {
            let up = self.upper[k].apply(x[k + 1]);
            let lo = self.upper[k].transpose().apply(x[k]);
            out[k][0] += up[0];
            out[k][1] += up[1];
            out[k + 1][0] += lo[0];
            out[k + 1][1] += lo[1];
        }
        out
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        let n = self.len();
        if rhs.len() != n || self.upper.len() != n.saturating_sub(1) {
            return Err(Error::InvalidArgument("block system dimension mismatch".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let singular = |k: usize| Error::Precondition(format!("block system singular at block {k}"));

        let mut schur_inv = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let s0 = self.diag[0];
        if s0.det() <= 0.0 || s0.m[0][0] <= 0.0 {
            return Err(singular(0));
        }
        schur_inv.push(s0.inverse().ok_or_else(|| singular(0))?);
        y.push(rhs[0]);
        for k in 1..n {
            let u = &self.upper[k - 1];
            let w = u.transpose().mul(&schur_inv[k - 1]);
            let s = self.diag[k].sub(&w.mul(u));
            if s.det() <= 0.0 || s.m[0][0] <= 0.0 {
                return Err(singular(k));
            }
            schur_inv.push(s.inverse().ok_or_else(|| singular(k))?);
            let wy = w.apply(y[k - 1]);
            y.push([rhs[k][0] - wy[0], rhs[k][1] - wy[1]]);
        }

        let mut x = vec![[0.0; 2]; n];
        x[n - 1] = schur_inv[n - 1].apply(y[n - 1]);
        for k in (0..n - 1).rev() {
            let ux = self.upper[k].apply(x[k + 1]);
            x[k] = schur_inv[k].apply([y[k][0] - ux[0], y[k][1] - ux[1]]);
        }
        Ok(x)
    }
}
