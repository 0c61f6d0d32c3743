//! Jordan-form specifications and their flows.
//!
//! A [`JordanSpec`] lists Jordan blocks `J_{N_j}(β_j) = β_j·Id + Λ_{N_j}`
//! (eigenvalue on the diagonal, ones on the superdiagonal) with pairwise
//! distinct eigenvalues.  The block-diagonal matrix it denotes is never
//! needed in factored form: flows, characteristic polynomials of matrices,
//! and residue formulas all reduce to truncated Taylor data per block.
//!
//! Rows and columns of the assembled matrix are addressed by the canonical
//! multi-index order `(1,1), …, (1,N_1), (2,1), …` — block index first,
//! position inside the block second.

use crate::error::{Error, Result};
use crate::flow::FlowVector;
use crate::matrix::Matrix;
use crate::scalar::{powi, Scalar};
use crate::series;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlock<S> {
    pub eigenvalue: S,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanSpec<S> {
    blocks: Vec<JordanBlock<S>>,
}

impl<S: Scalar> JordanSpec<S> {
    /// Build a spec; block sizes must be positive and eigenvalues pairwise
    /// distinct (the nondegeneracy assumption behind every construction in
    /// this crate).
    pub fn new(blocks: Vec<JordanBlock<S>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Shape("a Jordan spec needs at least one block".into()));
        }
        if blocks.iter().any(|b| b.size == 0) {
            return Err(Error::Shape("Jordan blocks must have positive size".into()));
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if blocks[i].eigenvalue == blocks[j].eigenvalue {
                    return Err(Error::EigenvalueCollision(format!(
                        "blocks {} and {} share an eigenvalue",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(JordanSpec { blocks })
    }

    pub fn from_pairs(pairs: Vec<(S, usize)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(eigenvalue, size)| JordanBlock { eigenvalue, size })
                .collect(),
        )
    }

    /// Single block.
    pub fn single(eigenvalue: S, size: usize) -> Self {
        Self::new(vec![JordanBlock { eigenvalue, size }]).expect("single block is valid")
    }

    /// The nilpotent single block Λ_n (zero eigenvalue, ones above the
    /// diagonal).
    pub fn nilpotent(n: usize) -> Self {
        Self::single(S::zero(), n)
    }

    /// Diagonal spec from distinct eigenvalues.
    pub fn diagonal(eigenvalues: Vec<S>) -> Result<Self> {
        Self::new(
            eigenvalues
                .into_iter()
                .map(|eigenvalue| JordanBlock { eigenvalue, size: 1 })
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[JordanBlock<S>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(0)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].eigenvalue.is_zero()
    }

    /// Reinterpret the spec over another backend by round-tripping the
    /// eigenvalues through complex doubles (lossy when leaving the exact
    /// backend).  Fails if two eigenvalues collide after conversion.
    pub fn convert<T: Scalar>(&self) -> Result<JordanSpec<T>> {
        JordanSpec::new(
            self.blocks
                .iter()
                .map(|b| {
                    let c = b.eigenvalue.to_c64();
                    JordanBlock {
                        eigenvalue: T::from_re_im(c.re, c.im),
                        size: b.size,
                    }
                })
                .collect(),
        )
    }

    pub fn eigenvalues(&self) -> Vec<S> {
        self.blocks.iter().map(|b| b.eigenvalue.clone()).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.eigenvalue.modulus())
            .fold(0.0, f64::max)
    }

    pub fn contains_eigenvalue(&self, z: &S) -> bool {
        self.blocks.iter().any(|b| &b.eigenvalue == z)
    }

    /// Error if this spec shares an eigenvalue with `other`.
    pub fn check_disjoint_from(&self, other: &JordanSpec<S>) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            if other.contains_eigenvalue(&b.eigenvalue) {
                return Err(Error::EigenvalueCollision(format!(
                    "eigenvalue of block {} appears in both specs",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// The canonical multi-index order: `(j, ν)` with 1-based block index
    /// `j` and 1-based inner index `ν`, blocks in declaration order.
    pub fn multi_indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (j, b) in self.blocks.iter().enumerate() {
            for nu in 1..=b.size {
                out.push((j + 1, nu));
            }
        }
        out
    }

    /// Assemble the block-diagonal upper-triangular Jordan matrix.
    pub fn matrix(&self) -> Matrix<S> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut offset = 0;
        for b in &self.blocks {
            for i in 0..b.size {
                m[(offset + i, offset + i)] = b.eigenvalue.clone();
                if i + 1 < b.size {
                    m[(offset + i, offset + i + 1)] = S::one();
                }
            }
            offset += b.size;
        }
        m
    }

    /// The flow exponential `exp(Σ_{i=1..K} t_i J^i)`, computed blockwise
    /// in closed form: for a block with eigenvalue β and size s the entry
    /// `(μ, ν)` is `(1/(ν−μ)!) ∂_β^{ν−μ} e^{ξ(β,t)}` for `ν ≥ μ` and zero
    /// below the diagonal, where `ξ(β,t) = Σ t_i β^i`.
    ///
    /// On the exact backend this requires `ξ(β,t)`'s exponential to be
    /// algebraic, i.e. a nilpotent block (β = 0); otherwise
    /// [`Error::BackendUnsupported`] is reported.
    pub fn flow_exp(&self, t: &FlowVector<S>) -> Result<Matrix<S>> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut offset = 0;
        for b in &self.blocks {
            let ord = b.size - 1;
            // e^{ξ(β,t)} — the only transcendental ingredient.
            let lead = t.xi(&b.eigenvalue).exp()?;
            // g(ε) = ξ(β+ε, t) − ξ(β, t): a polynomial in ε with zero
            // constant term; exp(g) truncated gives the Taylor column.
            let mut g = vec![S::zero(); ord + 1];
            for i in 1..=t.k() {
                let ti = t.get(i);
                if ti.is_zero() {
                    continue;
                }
                let p = series::linear_pow_trunc(&b.eigenvalue, i, ord);
                for (d, coeff) in p.into_iter().enumerate().skip(1) {
                    g[d] = g[d].clone() + ti.clone() * coeff;
                }
            }
            let taylor = series::exp_trunc(&g, ord)?;
            for mu in 0..b.size {
                for nu in mu..b.size {
                    m[(offset + mu, offset + nu)] =
                        lead.clone() * taylor[nu - mu].clone();
                }
            }
            offset += b.size;
        }
        Ok(m)
    }

    /// Characteristic polynomial `r(z) = Π_j (z − β_j)^{N_j}` at a point.
    pub fn char_poly_at(&self, z: &S) -> S {
        self.blocks.iter().fold(S::one(), |acc, b| {
            acc * powi(&(z.clone() - b.eigenvalue.clone()), b.size)
        })
    }

    /// Minimal polynomial at a point.  Eigenvalues are pairwise distinct by
    /// invariant, so each contributes its own block's full exponent and the
    /// minimal polynomial coincides with the characteristic one.
    pub fn min_poly_at(&self, z: &S) -> S {
        self.char_poly_at(z)
    }

    /// Monic coefficient vector (degree = dim) of the characteristic
    /// polynomial, constant term first.
    pub fn char_poly_coeffs(&self) -> Vec<S> {
        let n = self.dim();
        let mut coeffs = vec![S::zero(); n + 1];
        coeffs[0] = S::one();
        let mut deg = 0;
        for b in &self.blocks {
            for _ in 0..b.size {
                // multiply by (z − β)
                let mut next = vec![S::zero(); n + 1];
                for d in 0..=deg {
                    let c = coeffs[d].clone();
                    if c.is_zero() {
                        continue;
                    }
                    next[d + 1] = next[d + 1].clone() + c.clone();
                    next[d] = next[d].clone() - b.eigenvalue.clone() * c;
                }
                coeffs = next;
                deg += 1;
            }
        }
        coeffs
    }

    /// Minimal-polynomial coefficients; equal to the characteristic ones
    /// under the distinct-eigenvalue invariant.
    pub fn min_poly_coeffs(&self) -> Vec<S> {
        self.char_poly_coeffs()
    }

    /// Taylor coefficients of `r(center + ε)` up to `ε^ord`, where `r` is
    /// this spec's characteristic polynomial.
    pub fn char_poly_series_at(&self, center: &S, ord: usize) -> Vec<S> {
        let mut acc = series::resize(vec![S::one()], ord);
        for b in &self.blocks {
            let shifted = center.clone() - b.eigenvalue.clone();
            for _ in 0..b.size {
                acc = series::mul_linear_trunc(&acc, &shifted, ord);
            }
        }
        acc
    }

    /// Evaluate this spec's characteristic polynomial on the matrix of
    /// `other`: entry `(μ,ν)` of each block is `r^{(ν−μ)}(β)/(ν−μ)!`.
    pub fn char_poly_on(&self, other: &JordanSpec<S>) -> Matrix<S> {
        let n = other.dim();
        let mut m = Matrix::zeros(n, n);
        let mut offset = 0;
        for b in &other.blocks {
            let taylor = self.char_poly_series_at(&b.eigenvalue, b.size - 1);
            for mu in 0..b.size {
                for nu in mu..b.size {
                    m[(offset + mu, offset + nu)] = taylor[nu - mu].clone();
                }
            }
            offset += b.size;
        }
        m
    }

    /// `tr(J^i) = Σ_j N_j β_j^i` (the nilpotent parts are traceless in
    /// every power mixed with the diagonal).
    pub fn trace_power(&self, i: usize) -> S {
        self.blocks.iter().fold(S::zero(), |acc, b| {
            acc + S::from_i64(b.size as i64) * powi(&b.eigenvalue, i)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{C64, CQ, Scalar};

    fn q(n: i64, d: i64) -> CQ {
        CQ::from_ratio(n, d)
    }

    #[test]
    fn constructor_rejects_collisions_and_empty_blocks() {
        assert!(JordanSpec::from_pairs(vec![(q(1, 1), 2), (q(1, 1), 1)]).is_err());
        assert!(JordanSpec::from_pairs(vec![(q(1, 1), 0)]).is_err());
        assert!(JordanSpec::<CQ>::from_pairs(vec![]).is_err());
    }

    #[test]
    fn matrix_layout() {
        let spec = JordanSpec::from_pairs(vec![(q(2, 1), 2), (q(-1, 1), 1)]).unwrap();
        let m = spec.matrix();
        assert_eq!(m[(0, 0)], q(2, 1));
        assert_eq!(m[(0, 1)], q(1, 1));
        assert_eq!(m[(1, 1)], q(2, 1));
        assert_eq!(m[(2, 2)], q(-1, 1));
        assert_eq!(m[(1, 0)], q(0, 1));
        assert_eq!(
            spec.multi_indices(),
            vec![(1, 1), (1, 2), (2, 1)]
        );
    }

    #[test]
    fn flow_exp_nilpotent_block_gives_homogeneous_coefficients() {
        // For Λ_3 and t = (t1, t2): exp(t1 Λ + t2 Λ²) has (1,3) entry
        // t2 + t1²/2.
        let spec = JordanSpec::<CQ>::nilpotent(3);
        let t = FlowVector::new(vec![q(1, 3), q(1, 5)]);
        let e = spec.flow_exp(&t).unwrap();
        assert_eq!(e[(0, 0)], q(1, 1));
        assert_eq!(e[(0, 1)], q(1, 3));
        assert_eq!(e[(0, 2)], q(1, 5) + q(1, 18));
        assert_eq!(e[(1, 2)], q(1, 3));
        assert_eq!(e[(2, 0)], q(0, 1));
    }

    #[test]
    fn flow_exp_matches_series_oracle_float() {
        // Oracle: exp(M) by scaled Taylor summation on the assembled
        // matrix M = Σ t_i J^i.
        let spec = JordanSpec::<C64>::from_pairs(vec![
            (C64::from_re_im(0.3, 0.1), 2),
            (C64::from_re_im(-0.2, 0.0), 2),
        ])
        .unwrap();
        let t = FlowVector::new(vec![
            C64::from_re_im(0.11, 0.0),
            C64::from_re_im(-0.07, 0.02),
            C64::from_re_im(0.05, 0.0),
        ]);
        let j = spec.matrix();
        let mut m = Matrix::<C64>::zeros(4, 4);
        for i in 1..=3 {
            m = m.add(&j.pow(i).scale(&t.get(i)));
        }
        // Taylor series of exp(m): converges fast at these magnitudes.
        let mut term = Matrix::<C64>::identity(4);
        let mut sum = Matrix::<C64>::identity(4);
        for k in 1..60 {
            term = term.mul(&m).scale(&C64::from_ratio(1, k as i64));
            sum = sum.add(&term);
        }
        let closed = spec.flow_exp(&t).unwrap();
        assert!(closed.max_abs_diff(&sum) < 1e-13);
    }

    #[test]
    fn flow_exp_exact_backend_requires_nilpotent() {
        let spec = JordanSpec::<CQ>::single(q(1, 2), 2);
        let t = FlowVector::new(vec![q(1, 1)]);
        assert!(matches!(
            spec.flow_exp(&t),
            Err(Error::BackendUnsupported(_))
        ));
    }

    #[test]
    fn flow_exp_single_block_closed_form() {
        // [(β,2)] with t = (t1): e^{t1 β} [[1, t1],[0, 1]].
        let beta = C64::from_re_im(0.4, -0.3);
        let spec = JordanSpec::single(beta, 2);
        let t1 = C64::from_re_im(0.8, 0.1);
        let t = FlowVector::new(vec![t1]);
        let e = spec.flow_exp(&t).unwrap();
        let lead = (t1 * beta).exp();
        assert!((e[(0, 0)] - lead).norm() < 1e-15);
        assert!((e[(0, 1)] - lead * t1).norm() < 1e-15);
        assert!((e[(1, 1)] - lead).norm() < 1e-15);
        assert_eq!(e[(1, 0)], C64::from_i64(0));
    }

    #[test]
    fn char_poly_values_and_coeffs() {
        // r(z) = (z−1)²(z+2): at z=2 → 1·4 = 4.
        let spec = JordanSpec::from_pairs(vec![(q(1, 1), 2), (q(-2, 1), 1)]).unwrap();
        assert_eq!(spec.char_poly_at(&q(2, 1)), q(4, 1));
        assert_eq!(spec.min_poly_at(&q(2, 1)), q(4, 1));
        // (z−1)²(z+2) = z³ − 3z + 2
        assert_eq!(
            spec.char_poly_coeffs(),
            vec![q(2, 1), q(-3, 1), q(0, 1), q(1, 1)]
        );
    }

    #[test]
    fn char_poly_on_other_spec() {
        // r_D(z) = z − δ on B = [(β,2)]: entries r(β) on the diagonal and
        // r'(β)/1! = 1 above it.
        let d = JordanSpec::single(q(1, 3), 1);
        let b = JordanSpec::single(q(2, 1), 2);
        let m = d.char_poly_on(&b);
        assert_eq!(m[(0, 0)], q(5, 3));
        assert_eq!(m[(0, 1)], q(1, 1));
        assert_eq!(m[(1, 1)], q(5, 3));
        // Oracle: direct evaluation r_D(J_B) on the assembled matrix.
        let jb = b.matrix();
        let direct = jb.sub(&Matrix::identity(2).scale(&q(1, 3)));
        assert_eq!(m, direct);
    }

    #[test]
    fn char_poly_on_matches_matrix_polynomial_oracle() {
        // Multi-block exact oracle: evaluate Π (J_B − δ Id)^{n_δ} directly.
        let d = JordanSpec::from_pairs(vec![(q(1, 2), 2), (q(-1, 1), 1)]).unwrap();
        let b = JordanSpec::from_pairs(vec![(q(0, 1), 2), (q(2, 1), 2)]).unwrap();
        let jb = b.matrix();
        let id = Matrix::<CQ>::identity(4);
        let factor1 = jb.sub(&id.scale(&q(1, 2)));
        let factor2 = jb.sub(&id.scale(&q(-1, 1)));
        let oracle = factor1.mul(&factor1).mul(&factor2);
        assert_eq!(d.char_poly_on(&b), oracle);
    }

    #[test]
    fn trace_powers() {
        let spec = JordanSpec::from_pairs(vec![(q(2, 1), 2), (q(-1, 1), 3)]).unwrap();
        // tr(J) = 2·2 + 3·(−1) = 1; tr(J²) = 2·4 + 3·1 = 11.
        assert_eq!(spec.trace_power(1), q(1, 1));
        assert_eq!(spec.trace_power(2), q(11, 1));
        // Oracle against the assembled matrix.
        let j2 = spec.matrix().pow(2);
        let tr: CQ = (0..5).fold(q(0, 1), |acc, i| acc + j2[(i, i)].clone());
        assert_eq!(tr, q(11, 1));
    }

    #[test]
    fn disjointness_check() {
        let a = JordanSpec::from_pairs(vec![(q(1, 1), 1), (q(2, 1), 1)]).unwrap();
        let b = JordanSpec::from_pairs(vec![(q(3, 1), 1)]).unwrap();
        assert!(a.check_disjoint_from(&b).is_ok());
        let c = JordanSpec::from_pairs(vec![(q(2, 1), 2)]).unwrap();
        assert!(matches!(
            a.check_disjoint_from(&c),
            Err(Error::EigenvalueCollision(_))
        ));
    }

    #[test]
    fn spectral_radius_and_nilpotency() {
        let spec = JordanSpec::<C64>::from_pairs(vec![
            (C64::from_re_im(0.3, 0.4), 1),
            (C64::from_re_im(-0.2, 0.0), 1),
        ])
        .unwrap();
        assert!((spec.spectral_radius() - 0.5).abs() < 1e-15);
        assert!(JordanSpec::<CQ>::nilpotent(3).is_nilpotent());
        assert!(!spec.is_nilpotent());
    }
}
