//! Partitions, Schur polynomials in the flow times, and Plücker coordinates.
//!
//! Two coordinate systems are provided:
//!
//! * **column minors** — for data of the form `A = [Id_n | 0]`, `B = Λ_N`,
//!   the flow determinant expands as the finite sum
//!   `det(A·E(t)·Cᵀ) = Σ_{λ ⊂ (kⁿ)} π_λ(C)·S_λ(t)` where `π_λ(C)` is the
//!   `n×n` minor of `C` on the ascending column set `{λ_i − i + n + 1}`;
//! * **Frobenius determinants** — for a general rank-one system with chart
//!   matrix `M = Cᵀ(F·A·Cᵀ)⁻¹F`, the normalized coefficient of `S_λ` in
//!   `τ(t)/det(F·A·Cᵀ)` is
//!   `π_{(a|b)} = (−1)^{Σ b_q} det( gᵀB^{a_p} M (Dᵀ)^{b_q} f )_{p,q}`
//!   over the Frobenius coordinates `λ = (a₁,…,a_r | b₁,…,b_r)`.
//!
//! Schur polynomials are evaluated by the Jacobi–Trudi determinant over the
//! complete homogeneous basis `h_k(t)`, generated by `Σ h_k ε^k =
//! e^{Σ t_i ε^i}`.

use crate::error::{Error, Result};
use crate::flow::FlowVector;
use crate::matrix::{mat_vec, vec_mat, Matrix};
use crate::rankone::RankOneSystem;
use crate::scalar::Scalar;
use crate::series;
use crate::tau::{m_big_cell, tau_origin};

/// An integer partition: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Build from a weakly decreasing sequence; trailing zeros are stripped.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::BadPartition(format!(
                "parts must be weakly decreasing, got {:?}",
                parts
            )));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `λ_i` with 0-based `i`, zero beyond the last part.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// `|λ| = Σ λ_i`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Whether the diagram fits in the `n × k` box (at most `n` rows, each
    /// at most `k`).
    pub fn fits_in_box(&self, n: usize, k: usize) -> bool {
        self.parts.len() <= n && self.parts.first().map_or(true, |&p| p <= k)
    }

    /// Conjugate (transpose) partition.
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(0);
        let parts = (1..=cols)
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count())
            .collect();
        Partition { parts }
    }

    /// Frobenius coordinates `(a₁ > … > a_r | b₁ > … > b_r)`: `a_p` counts
    /// boxes strictly right of the `p`-th diagonal box, `b_p` strictly below.
    pub fn frobenius(&self) -> (Vec<usize>, Vec<usize>) {
        let conj = self.conjugate();
        let mut arms = Vec::new();
        let mut legs = Vec::new();
        let mut p = 0;
        while self.part(p) >= p + 1 {
            arms.push(self.part(p) - (p + 1));
            legs.push(conj.part(p) - (p + 1));
            p += 1;
        }
        (arms, legs)
    }

    /// Rebuild a partition from Frobenius coordinates.
    pub fn from_frobenius(arms: &[usize], legs: &[usize]) -> Result<Partition> {
        if arms.len() != legs.len() {
            return Err(Error::BadPartition(format!(
                "{} arms vs {} legs",
                arms.len(),
                legs.len()
            )));
        }
        if arms.windows(2).any(|w| w[0] <= w[1]) || legs.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::BadPartition(
                "Frobenius coordinates must be strictly decreasing".into(),
            ));
        }
        let r = arms.len();
        let mut parts = Vec::new();
        for p in 0..r {
            parts.push(arms[p] + p + 1);
        }
        // Row i (0-based, i ≥ r) collects the columns whose legs still reach it.
        let depth = legs.first().map_or(0, |&b| b + 1);
        for i in r..depth {
            let row = (0..r).filter(|&q| legs[q] + q >= i).count();
            if row == 0 {
                break;
            }
            parts.push(row);
        }
        Partition::new(parts)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")")
    }
}

/// Graded-lexicographic order: by weight, then lexicographically by parts.
fn graded_lex(a: &Partition, b: &Partition) -> std::cmp::Ordering {
    a.weight()
        .cmp(&b.weight())
        .then_with(|| a.parts.cmp(&b.parts))
}

fn push_partitions(n_rows: usize, max_part: usize, target: usize, out: &mut Vec<Partition>) {
    fn rec(remaining: usize, max_part: usize, rows_left: usize, acc: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: acc.clone() });
            return;
        }
        if rows_left == 0 {
            return;
        }
        let hi = remaining.min(max_part);
        for p in (1..=hi).rev() {
            acc.push(p);
            rec(remaining - p, p, rows_left - 1, acc, out);
            acc.pop();
        }
    }
    let mut acc = Vec::new();
    rec(target, max_part, n_rows, &mut acc, out);
}

/// All partitions fitting in the `n × k` box, graded-lexicographically.
pub fn partitions_in_box(n: usize, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for w in 0..=(n * k) {
        push_partitions(n, k, w, &mut out);
    }
    let mut start = 0;
    // Each weight class was appended contiguously; sort within classes.
    while start < out.len() {
        let w = out[start].weight();
        let end = out[start..]
            .iter()
            .position(|p| p.weight() != w)
            .map_or(out.len(), |off| start + off);
        out[start..end].sort_by(|a, b| graded_lex(a, b));
        start = end;
    }
    out
}

/// All partitions of weight at most `w`, graded-lexicographically.
pub fn partitions_up_to_weight(w: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for target in 0..=w {
        let mut cls = Vec::new();
        push_partitions(target.max(1), target, target, &mut cls);
        cls.sort_by(|a, b| graded_lex(a, b));
        out.extend(cls);
    }
    out
}

/// `h_0, …, h_max` with `Σ h_k ε^k = exp(Σ t_i ε^i)`.
pub fn h_sequence<S: Scalar>(t: &FlowVector<S>, max: usize) -> Vec<S> {
    let mut gen = vec![S::zero(); max + 1];
    for i in 1..=t.k().min(max) {
        gen[i] = t.get(i);
    }
    series::exp_trunc(&gen, max).expect("flow generating series has zero constant term")
}

/// Schur polynomial `S_λ(t)` by the Jacobi–Trudi determinant
/// `det(h_{λ_i − i + j})_{i,j=1..ℓ}`.
pub fn schur_eval<S: Scalar>(lambda: &Partition, t: &FlowVector<S>) -> S {
    let l = lambda.len();
    if l == 0 {
        return S::one();
    }
    let h = h_sequence(t, lambda.part(0) + l - 1);
    let m = Matrix::from_fn(l, l, |i, j| {
        let idx = lambda.part(i) as isize - (i as isize + 1) + (j as isize + 1);
        if idx < 0 {
            S::zero()
        } else {
            h[idx as usize].clone()
        }
    });
    m.det().expect("Jacobi-Trudi determinant is total")
}

/// Ascending column set `S(λ) = {λ_i − i + n + 1 : i = 1..n}` of the
/// rational-model minor expansion (1-based columns in `1..=n+k`).
pub fn rational_columns(lambda: &Partition, n: usize) -> Vec<usize> {
    let mut cols: Vec<usize> = (0..n)
        .map(|i| (lambda.part(i) + n + 1 - (i + 1)) as usize)
        .collect();
    cols.sort_unstable();
    cols
}

/// Plücker coordinate of the rational model: the `n×n` minor of `C`
/// (`n×(n+k)`) on the ascending column set of `λ`.  `λ` must fit in the
/// `n × k` box.
pub fn plucker_rational<S: Scalar>(lambda: &Partition, c: &Matrix<S>) -> Result<S> {
    let n = c.rows();
    if c.cols() < n {
        return Err(Error::Shape(format!(
            "C must be n×(n+k) with k ≥ 0, got {}x{}",
            n,
            c.cols()
        )));
    }
    let k = c.cols() - n;
    if !lambda.fits_in_box(n, k) {
        return Err(Error::OutsideBox(format!(
            "partition {} exceeds the {}x{} box",
            lambda, n, k
        )));
    }
    let cols = rational_columns(lambda, n);
    let sub = Matrix::from_fn(n, n, |r, j| c[(r, cols[j] - 1)].clone());
    sub.det()
}

/// Cached powers for Frobenius-coordinate evaluation: the row covectors
/// `gᵀB^j M` and column vectors `(Dᵀ)^i f`.
struct AffineChart<S> {
    rows: Vec<Vec<S>>,
    cols: Vec<Vec<S>>,
}

impl<S: Scalar> AffineChart<S> {
    fn new(sys: &RankOneSystem<S>, max_arm: usize, max_leg: usize) -> Result<Self> {
        let m = m_big_cell(sys)?;
        let jb = sys.bspec.matrix();
        let dt = sys.dspec.matrix().transpose();
        let mut rows = Vec::with_capacity(max_arm + 1);
        let mut gpow = sys.g.clone();
        for _ in 0..=max_arm {
            rows.push(vec_mat(&gpow, &m));
            gpow = vec_mat(&gpow, &jb);
        }
        let mut cols = Vec::with_capacity(max_leg + 1);
        let mut fpow = sys.f.clone();
        for _ in 0..=max_leg {
            cols.push(fpow.clone());
            fpow = mat_vec(&dt, &fpow);
        }
        Ok(AffineChart { rows, cols })
    }

    /// `gᵀ B^j M (Dᵀ)^i f`.
    fn pairing(&self, j: usize, i: usize) -> S {
        self.rows[j]
            .iter()
            .zip(self.cols[i].iter())
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    fn frobenius_coefficient(&self, arms: &[usize], legs: &[usize]) -> Result<S> {
        let r = arms.len();
        if r == 0 {
            return Ok(S::one());
        }
        let m = Matrix::from_fn(r, r, |p, q| self.pairing(arms[p], legs[q]));
        let det = m.det()?;
        let sign_exp: usize = legs.iter().sum();
        Ok(if sign_exp % 2 == 0 { det } else { -det })
    }
}

/// The affine chart entry `𝒜_{ij} = gᵀ B^j M (Dᵀ)^i f` with
/// `M = Cᵀ(F·A·Cᵀ)⁻¹F` (errors with [`Error::SingularAtOrigin`] when the
/// chart matrix does not exist).
pub fn affine_coord<S: Scalar>(sys: &RankOneSystem<S>, i: usize, j: usize) -> Result<S> {
    let chart = AffineChart::new(sys, j, i).map_err(|_| Error::SingularAtOrigin)?;
    Ok(chart.pairing(j, i))
}

/// Normalized Schur coefficient of `λ` for a rank-one system, through the
/// Frobenius-coordinate determinant.
pub fn plucker_frobenius<S: Scalar>(sys: &RankOneSystem<S>, lambda: &Partition) -> Result<S> {
    let (arms, legs) = lambda.frobenius();
    let max_arm = arms.first().copied().unwrap_or(0);
    let max_leg = legs.first().copied().unwrap_or(0);
    let chart = AffineChart::new(sys, max_arm, max_leg).map_err(|_| Error::SingularAtOrigin)?;
    chart.frobenius_coefficient(&arms, &legs)
}

/// A truncated Schur-function expansion of `τ(t)`:
/// `τ(t) = origin · Σ_λ coeff(λ) · S_λ(t)` over `|λ| ≤ max_weight`,
/// with `origin = det(F·A·Cᵀ)` and `coeff(∅) = 1`.
#[derive(Debug, Clone)]
pub struct SchurExpansion<S> {
    pub origin: S,
    pub max_weight: usize,
    pub terms: Vec<(Partition, S)>,
}

impl<S: Scalar> SchurExpansion<S> {
    /// Normalized coefficient of `S_λ` (zero if `|λ|` exceeds the cutoff).
    pub fn coefficient(&self, lambda: &Partition) -> S {
        self.terms
            .iter()
            .find(|(p, _)| p == lambda)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(S::zero)
    }

    /// Un-normalized coefficient `origin · π_λ`.
    pub fn unnormalized(&self, lambda: &Partition) -> S {
        self.origin.clone() * self.coefficient(lambda)
    }

    /// `origin · Σ_λ π_λ S_λ(t)` — equals `τ(t)` exactly whenever the
    /// expansion is finite (nilpotent flows), else up to the truncation.
    pub fn evaluate(&self, t: &FlowVector<S>) -> S {
        let mut acc = S::zero();
        for (lambda, coeff) in &self.terms {
            acc = acc + coeff.clone() * schur_eval(lambda, t);
        }
        self.origin.clone() * acc
    }

    /// Drop terms whose coefficient is exactly zero.
    pub fn nonzero_terms(&self) -> impl Iterator<Item = &(Partition, S)> {
        self.terms.iter().filter(|(_, c)| !c.is_zero())
    }
}

/// Expand `τ` in Schur polynomials through the Frobenius-coordinate minors,
/// over all partitions of weight ≤ `max_weight`.
pub fn schur_expansion<S: Scalar>(
    sys: &RankOneSystem<S>,
    max_weight: usize,
) -> Result<SchurExpansion<S>> {
    let origin = tau_origin(sys)?;
    if origin.is_zero() {
        return Err(Error::SingularAtOrigin);
    }
    // Arms and legs are bounded by max_weight − 1 for |λ| ≤ max_weight.
    let bound = max_weight.saturating_sub(1);
    let chart = AffineChart::new(sys, bound, bound).map_err(|_| Error::SingularAtOrigin)?;
    let mut terms = Vec::new();
    for lambda in partitions_up_to_weight(max_weight) {
        let (arms, legs) = lambda.frobenius();
        let coeff = chart.frobenius_coefficient(&arms, &legs)?;
        terms.push((lambda, coeff));
    }
    Ok(SchurExpansion {
        origin,
        max_weight,
        terms,
    })
}

/// Residual of the minimal-polynomial annihilation property: for
/// `μ_D` the minimal polynomial of `D`, the pairings
/// `gᵀB^j M μ_D(Dᵀ) f` must vanish for all `0 ≤ j ≤ 2N`.  Returns the
/// worst scale-normalized residual.
pub fn annihilation_residual<S: Scalar>(sys: &RankOneSystem<S>) -> Result<f64> {
    let coeffs = sys.dspec.min_poly_coeffs();
    let deg = coeffs.len() - 1;
    let jmax = 2 * sys.big_n();
    let chart = AffineChart::new(sys, jmax, deg).map_err(|_| Error::SingularAtOrigin)?;
    let mut worst = 0.0_f64;
    for j in 0..=jmax {
        let mut acc = S::zero();
        let mut scale = 0.0_f64;
        for (i, ci) in coeffs.iter().enumerate() {
            let term = ci.clone() * chart.pairing(j, i);
            scale = scale.max(term.modulus());
            acc = acc + term;
        }
        worst = worst.max(acc.modulus() / scale.max(1.0));
    }
    Ok(worst)
}
