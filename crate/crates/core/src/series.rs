//! Truncated Taylor-series arithmetic.
//!
//! A series is a coefficient vector `c[0..=ord]` representing
//! `c[0] + c[1] ε + … + c[ord] ε^ord`.  These helpers are the workhorse
//! behind every "derivatives of a function at a Jordan eigenvalue" formula:
//! flow exponentials, characteristic polynomials evaluated on Jordan
//! matrices, and the residue calculus that defines the K(D) and A(B,D)
//! matrices.  Everything here is exact on the exact backend.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncate (or zero-pad) to exactly `ord + 1` coefficients.
pub fn resize<S: Scalar>(mut a: Vec<S>, ord: usize) -> Vec<S> {
    a.resize(ord + 1, S::zero());
    a
}

/// Product truncated at order `ord`.
pub fn mul_trunc<S: Scalar>(a: &[S], b: &[S], ord: usize) -> Vec<S> {
    let mut out = vec![S::zero(); ord + 1];
    for (i, ai) in a.iter().enumerate().take(ord + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > ord {
                break;
            }
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

/// Multiply by the linear factor `(c + ε)`, truncated at `ord`.
pub fn mul_linear_trunc<S: Scalar>(a: &[S], c: &S, ord: usize) -> Vec<S> {
    let mut out = vec![S::zero(); ord + 1];
    for (i, ai) in a.iter().enumerate().take(ord + 1) {
        out[i] = out[i].clone() + ai.clone() * c.clone();
        if i + 1 <= ord {
            out[i + 1] = out[i + 1].clone() + ai.clone();
        }
    }
    out
}

/// `(c + ε)^m` truncated at `ord`.
pub fn linear_pow_trunc<S: Scalar>(c: &S, m: usize, ord: usize) -> Vec<S> {
    let mut out = resize(vec![S::one()], ord);
    for _ in 0..m {
        out = mul_linear_trunc(&out, c, ord);
    }
    out
}

/// Multiplicative inverse of a series with nonzero constant term.
pub fn inv_trunc<S: Scalar>(a: &[S], ord: usize) -> Result<Vec<S>> {
    let a0 = a.first().cloned().unwrap_or_else(S::zero);
    if a0.is_zero() {
        return Err(Error::Singular(
            "series inverse requires a nonzero constant term".into(),
        ));
    }
    let mut out = vec![S::zero(); ord + 1];
    out[0] = S::one() / a0.clone();
    for k in 1..=ord {
        // a0 * out[k] = -(a1*out[k-1] + ... + ak*out[0])
        let mut acc = S::zero();
        for j in 1..=k {
            let aj = if j < a.len() { a[j].clone() } else { S::zero() };
            if !aj.is_zero() {
                acc = acc + aj * out[k - j].clone();
            }
        }
        out[k] = -acc / a0.clone();
    }
    Ok(out)
}

/// Exponential of a series with zero constant term.
///
/// Uses the recurrence `k·e_k = Σ_{j=1..k} j·g_j·e_{k-j}` (differentiate
/// `E = exp(g)`), which is exact in any field of characteristic zero.
pub fn exp_trunc<S: Scalar>(g: &[S], ord: usize) -> Result<Vec<S>> {
    if let Some(g0) = g.first() {
        if !g0.is_zero() {
            return Err(Error::Singular(
                "series exponential requires a zero constant term".into(),
            ));
        }
    }
    let mut e = vec![S::zero(); ord + 1];
    e[0] = S::one();
    for k in 1..=ord {
        let mut acc = S::zero();
        for j in 1..=k {
            let gj = if j < g.len() { g[j].clone() } else { S::zero() };
            if !gj.is_zero() {
                acc = acc + S::from_i64(j as i64) * gj * e[k - j].clone();
            }
        }
        e[k] = acc / S::from_i64(k as i64);
    }
    Ok(e)
}
