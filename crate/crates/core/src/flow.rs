//! Flow (time) vectors.
//!
//! A [`FlowVector`] holds the KP times `t = (t_1, …, t_K)`; every time past
//! the truncation index `K` is identically zero.  With `B` an `N×N` matrix
//! the flow enters through `exp(Σ_{i=1..K} t_i B^i)`, so any finite
//! truncation gives a well-defined finite-dimensional model.

use crate::scalar::{powi, Scalar};

/// KP times `(t_1, …, t_K)`, `K ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVector<S> {
    t: Vec<S>,
}

impl<S: Scalar> FlowVector<S> {
    /// Build from components `t_1, …, t_K`.  Panics if empty.
    pub fn new(t: Vec<S>) -> Self {
        assert!(!t.is_empty(), "flow vector needs at least t_1");
        FlowVector { t }
    }

    /// The zero flow with truncation `k`.
    pub fn zero(k: usize) -> Self {
        Self::new(vec![S::zero(); k.max(1)])
    }

    /// Convenience constructor from f64 components.
    pub fn from_f64s(ts: &[f64]) -> Self {
        Self::new(ts.iter().map(|&x| S::from_re_im(x, 0.0)).collect())
    }

    /// Truncation index `K`.
    pub fn k(&self) -> usize {
        self.t.len()
    }

    /// `t_i` with 1-based `i`; zero beyond the truncation.
    pub fn get(&self, i: usize) -> S {
        assert!(i >= 1, "flow indices are 1-based");
        self.t.get(i - 1).cloned().unwrap_or_else(S::zero)
    }

    /// Replace `t_i` (1-based), extending with zeros if needed.
    pub fn with_component(&self, i: usize, value: S) -> Self {
        assert!(i >= 1, "flow indices are 1-based");
        let mut t = self.t.clone();
        if i > t.len() {
            t.resize(i, S::zero());
        }
        t[i - 1] = value;
        FlowVector { t }
    }

    /// Add `delta` to `t_i` (1-based).
    pub fn nudged(&self, i: usize, delta: S) -> Self {
        self.with_component(i, self.get(i) + delta)
    }

    pub fn components(&self) -> &[S] {
        &self.t
    }

    /// Round-trip the components through complex doubles into another
    /// backend (lossy when leaving the exact backend).
    pub fn convert<T: Scalar>(&self) -> FlowVector<T> {
        FlowVector::new(
            self.t
                .iter()
                .map(|x| {
                    let c = x.to_c64();
                    T::from_re_im(c.re, c.im)
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        FlowVector {
            t: self.t.iter().map(|x| -x.clone()).collect(),
        }
    }

    /// ξ(z, t) = Σ_{i=1..K} t_i z^i.
    pub fn xi(&self, z: &S) -> S {
        // Horner form: (((t_K z + t_{K-1}) z + …) z + t_1) z
        let mut acc = S::zero();
        for ti in self.t.iter().rev() {
            acc = (acc + ti.clone()) * z.clone();
        }
        acc
    }

    /// The Miwa substitution `t_i ↦ t_i − 1/(i z^i)` applied through the
    /// truncation index only.  This is a *test oracle*: it reproduces the
    /// true shifted tau function only when powers of the spec matrices
    /// beyond `K` vanish (nilpotent specs with `K` large enough).
    pub fn miwa_substituted(&self, z: &S) -> Self {
        let t = self
            .t
            .iter()
            .enumerate()
            .map(|(idx, ti)| {
                let i = idx + 1;
                ti.clone() - S::one() / (S::from_i64(i as i64) * powi(z, i))
            })
            .collect();
        FlowVector { t }
    }
}
