//! Rank-one intertwining systems and the canonical `A`-matrices.
//!
//! Given Jordan specs `B` (`N×N`) and `D` (`n×n`) with disjoint spectra,
//! this module builds the canonical matrices
//!
//! * `A⁰(B,D)` — entrywise binomial/partial-fraction formula,
//! * `A(B,D) = A⁰(B,D)·r_D(B)` — also available independently through the
//!   residue formula `A_{(iμ),(jν)} = res_{z=β_j} r_D(z)/((z−δ_i)^μ (z−β_j)^ν)`,
//! * `A(B) = A(B,Λ_n)` — the shift-spec special case,
//! * `K(D)` — the residue (Lagrange-interpolation) change of basis with
//!   `A(B) = K(D)·A(B,D)`,
//!
//! together with the canonical vectors `f_D`, `g_B`, `k(D)`, and it
//! verifies the rank-one intertwining identities
//!
//! ```text
//! A(B)·B − Λ_nᵀ·A(B)      = f_Λ · g_Bᵀ Bⁿ
//! A⁰·B   − Dᵀ·A⁰          = f_D · g_Bᵀ
//! A(B,D)·B − Dᵀ·A(B,D)    = f_D · g_Bᵀ r_D(B)
//! ```
//!
//! and the equivalent geometric statement `rank(A·B·(A^⊥)ᵀ) ≤ 1`.

use crate::error::{Error, Result};
use crate::jordan::JordanSpec;
use crate::matrix::{outer, unit_vector, vec_mat, vec_max_abs, Matrix};
use crate::scalar::{binomial, powi, Scalar, C64, Tolerance};
use crate::series;

/// Coefficients of `(c + ε)^{-m}` up to `ε^ord` (requires `c ≠ 0`):
/// `coeff_k = (−1)^k C(m+k−1, k) c^{−m−k}`.
fn neg_linear_pow_trunc<S: Scalar>(c: &S, m: usize, ord: usize) -> Vec<S> {
    let c_inv = S::one() / c.clone();
    let mut out = Vec::with_capacity(ord + 1);
    let mut lead = powi(&c_inv, m);
    for k in 0..=ord {
        let coeff = binomial::<S>(m + k - 1, k);
        let signed = if k % 2 == 0 { coeff } else { -coeff };
        out.push(signed * lead.clone());
        lead = lead * c_inv.clone();
    }
    out
}

/// The `n×N` matrix `A⁰(B,D)` with entries
/// `C(μ+ν−2, ν−1) (−1)^{ν+1} / (β_j − δ_i)^{μ+ν−1}`.
pub fn build_a0<S: Scalar>(b: &JordanSpec<S>, d: &JordanSpec<S>) -> Result<Matrix<S>> {
    b.check_disjoint_from(d)?;
    let bidx = b.multi_indices();
    let didx = d.multi_indices();
    let bev = b.eigenvalues();
    let dev = d.eigenvalues();
    Ok(Matrix::from_fn(d.dim(), b.dim(), |r, c| {
        let (i, mu) = didx[r];
        let (j, nu) = bidx[c];
        let diff = bev[j - 1].clone() - dev[i - 1].clone();
        let coeff = binomial::<S>(mu + nu - 2, nu - 1);
        let signed = if (nu + 1) % 2 == 0 { coeff } else { -coeff };
        signed / powi(&diff, mu + nu - 1)
    }))
}

/// `A(B,D) = A⁰(B,D) · r_D(B)`.
pub fn build_a<S: Scalar>(b: &JordanSpec<S>, d: &JordanSpec<S>) -> Result<Matrix<S>> {
    Ok(build_a0(b, d)?.mul(&d.char_poly_on(b)))
}

/// `A(B,D)` through the residue formula, entry by entry — an independent
/// route used to cross-check [`build_a`].
pub fn build_a_residue<S: Scalar>(b: &JordanSpec<S>, d: &JordanSpec<S>) -> Result<Matrix<S>> {
    b.check_disjoint_from(d)?;
    let didx = d.multi_indices();
    let dev = d.eigenvalues();
    let mut out = Matrix::zeros(d.dim(), b.dim());
    let mut col = 0;
    for bb in b.blocks() {
        let ord = bb.size - 1;
        // r_D(β_j + ε) truncated at the block order.
        let rd = d.char_poly_series_at(&bb.eigenvalue, ord);
        for (r, &(i, mu)) in didx.iter().enumerate() {
            let c = bb.eigenvalue.clone() - dev[i - 1].clone();
            let denom = neg_linear_pow_trunc(&c, mu, ord);
            let prod = series::mul_trunc(&rd, &denom, ord);
            for nu in 1..=bb.size {
                out[(r, col + nu - 1)] = prod[nu - 1].clone();
            }
        }
        col += bb.size;
    }
    Ok(out)
}

/// `A(B) = A(B, Λ_n)`: entries `C(n−a, ν−1) β_j^{n−ν−a+1}` (zero when the
/// binomial vanishes), rows `a = 1..n`.
pub fn build_a_shift<S: Scalar>(b: &JordanSpec<S>, n: usize) -> Matrix<S> {
    let bidx = b.multi_indices();
    let bev = b.eigenvalues();
    Matrix::from_fn(n, b.dim(), |r, c| {
        let a = r + 1;
        let (j, nu) = bidx[c];
        if nu - 1 > n - a {
            return S::zero();
        }
        let coeff = binomial::<S>(n - a, nu - 1);
        coeff * powi(&bev[j - 1], n - a - (nu - 1))
    })
}

/// The `n×n` matrix `K(D)` with entries
/// `K_{a,(iμ)} = res_{z=δ_i} z^{n−a} (z−δ_i)^{μ−1} / r_D(z)`,
/// realized as Taylor coefficients of `(δ_i+ε)^{n−a} / q_i(ε)` where
/// `q_i(ε) = Π_{j≠i} (δ_i − δ_j + ε)^{n_j}`.
pub fn build_k<S: Scalar>(d: &JordanSpec<S>) -> Result<Matrix<S>> {
    k_like(d, 0)
}

/// The canonical vector `k(D)` with entries
/// `res_{z=δ_i} z^n (z−δ_i)^{μ−1} / r_D(z)`.
pub fn k_vector<S: Scalar>(d: &JordanSpec<S>) -> Result<Vec<S>> {
    let m = k_like(d, 1)?;
    Ok((0..d.dim()).map(|c| m[(0, c)].clone()).collect())
}

/// Shared residue engine: rows `a = 1..n` give powers `z^{n−a}`;
/// `extra = 1` instead produces the single row of `z^n` residues.
fn k_like<S: Scalar>(d: &JordanSpec<S>, extra: usize) -> Result<Matrix<S>> {
    let n = d.dim();
    let rows = if extra == 0 { n } else { 1 };
    let mut out = Matrix::zeros(rows, n);
    let mut col = 0;
    for (i, db) in d.blocks().iter().enumerate() {
        let ord = db.size - 1;
        // q_i(ε) = Π_{j≠i} ((δ_i − δ_j) + ε)^{n_j}
        let mut q = series::resize(vec![S::one()], ord);
        for (j, other) in d.blocks().iter().enumerate() {
            if j == i {
                continue;
            }
            let c = db.eigenvalue.clone() - other.eigenvalue.clone();
            for _ in 0..other.size {
                q = series::mul_linear_trunc(&q, &c, ord);
            }
        }
        let q_inv = series::inv_trunc(&q, ord)?;
        for r in 0..rows {
            let power = if extra == 0 { n - (r + 1) } else { n };
            let p = series::linear_pow_trunc(&db.eigenvalue, power, ord);
            let prod = series::mul_trunc(&p, &q_inv, ord);
            for mu in 1..=db.size {
                out[(r, col + mu - 1)] = prod[db.size - mu].clone();
            }
        }
        col += db.size;
    }
    Ok(out)
}

/// The canonical vectors attached to a pair of specs.
#[derive(Debug, Clone)]
pub struct CanonicalVectors<S> {
    /// Indicator of the `μ = 1` slots of `D` (length `n`).
    pub f_d: Vec<S>,
    /// Indicator of the `ν = 1` slots of `B` (length `N`).
    pub g_b: Vec<S>,
    /// The residue vector `k(D)` (length `n`).
    pub k_d: Vec<S>,
}

/// Indicator of the first slot of each block.
pub fn block_head_indicator<S: Scalar>(spec: &JordanSpec<S>) -> Vec<S> {
    spec.multi_indices()
        .iter()
        .map(|&(_, nu)| if nu == 1 { S::one() } else { S::zero() })
        .collect()
}

pub fn canonical_vectors<S: Scalar>(
    b: &JordanSpec<S>,
    d: &JordanSpec<S>,
) -> Result<CanonicalVectors<S>> {
    Ok(CanonicalVectors {
        f_d: block_head_indicator(d),
        g_b: block_head_indicator(b),
        k_d: k_vector(d)?,
    })
}

/// A full tau-function model: the rank-one intertwined data
/// `(A, B, C, D, F, f, g)` with `A·B − Dᵀ·A = f·gᵀ`.
///
/// Shapes: `A: n×N`, `C: l×N`, `F: l×n`, `f ∈ ℂ^n`, `g ∈ ℂ^N`.  The
/// constructor enforces shapes only.  Spectral disjointness of `B` and `D`
/// is *not* required here — the rational models use nilpotent specs on
/// both sides — it is enforced by the constructions that genuinely need it
/// (`build_a0`, Miwa shifts, the intertwining solver).  The rank-one
/// identity itself is the business of [`verify_rank_one`] (family
/// constructors satisfy it by construction, and deliberately corrupted
/// systems must remain constructible so the verifier can catch them).
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSystem<S: Scalar> {
    pub a: Matrix<S>,
    pub bspec: JordanSpec<S>,
    pub c: Matrix<S>,
    pub dspec: JordanSpec<S>,
    pub fmat: Matrix<S>,
    pub f: Vec<S>,
    pub g: Vec<S>,
}

impl<S: Scalar> RankOneSystem<S> {
    pub fn new(
        a: Matrix<S>,
        bspec: JordanSpec<S>,
        c: Matrix<S>,
        dspec: JordanSpec<S>,
        fmat: Matrix<S>,
        f: Vec<S>,
        g: Vec<S>,
    ) -> Result<Self> {
        let n = dspec.dim();
        let big_n = bspec.dim();
        if a.rows() != n || a.cols() != big_n {
            return Err(Error::Shape(format!(
                "A must be {}x{}, got {}x{}",
                n,
                big_n,
                a.rows(),
                a.cols()
            )));
        }
        if c.cols() != big_n {
            return Err(Error::Shape(format!(
                "C must have {} columns, got {}",
                big_n,
                c.cols()
            )));
        }
        let l = c.rows();
        if fmat.rows() != l || fmat.cols() != n {
            return Err(Error::Shape(format!(
                "F must be {}x{}, got {}x{}",
                l,
                n,
                fmat.rows(),
                fmat.cols()
            )));
        }
        if f.len() != n {
            return Err(Error::Shape(format!(
                "f must have length {}, got {}",
                n,
                f.len()
            )));
        }
        if g.len() != big_n {
            return Err(Error::Shape(format!(
                "g must have length {}, got {}",
                big_n,
                g.len()
            )));
        }
        Ok(RankOneSystem {
            a,
            bspec,
            c,
            dspec,
            fmat,
            f,
            g,
        })
    }

    /// Dimension of the `D` side.
    pub fn n(&self) -> usize {
        self.dspec.dim()
    }

    /// Dimension of the `B` side.
    pub fn big_n(&self) -> usize {
        self.bspec.dim()
    }

    /// Number of rows of `C` and `F` (the determinant size).
    pub fn l(&self) -> usize {
        self.c.rows()
    }

    /// Round-trip every piece of data through complex doubles into another
    /// backend (lossy when leaving the exact backend).  Fails if distinct
    /// eigenvalues collide after conversion.
    pub fn convert<T: Scalar>(&self) -> Result<RankOneSystem<T>> {
        let conv = |x: &S| {
            let c = x.to_c64();
            T::from_re_im(c.re, c.im)
        };
        RankOneSystem::new(
            self.a.map(conv),
            self.bspec.convert()?,
            self.c.map(conv),
            self.dspec.convert()?,
            self.fmat.map(conv),
            self.f.iter().map(conv).collect(),
            self.g.iter().map(conv).collect(),
        )
    }
}

/// Residuals of the rank-one identities, normalized by the scale of the
/// terms involved (max entry modulus, clamped below by 1).
#[derive(Debug, Clone)]
pub struct RankOneReport {
    /// `A(B)·B − Λₙᵀ·A(B) − f_Λ g_Bᵀ Bⁿ`, from the specs alone.
    pub shift_identity: f64,
    /// `A⁰·B − Dᵀ·A⁰ − f_D g_Bᵀ` — `None` when `B` and `D` share an
    /// eigenvalue, which puts `A⁰` outside its domain.
    pub a0_identity: Option<f64>,
    /// `A(B,D)·B − Dᵀ·A(B,D) − f_D g_Bᵀ r_D(B)` — `None` under the same
    /// domain restriction.
    pub abd_identity: Option<f64>,
    /// The system's own data: `A·B − Dᵀ·A − f·gᵀ`.
    pub system_identity: f64,
    /// Numerical rank of `A·B·(A^⊥)ᵀ`.
    pub product_rank: usize,
    /// Exact backend: largest 2×2 minor modulus of `A·B·(A^⊥)ᵀ` (exactly
    /// 0.0 when the rank condition holds).  Float backend: the Frobenius
    /// norm of the matrix after deflating its top singular direction — an
    /// upper bound for the second singular value, equal to it when
    /// rank ≤ 2 — normalized by max(σ₁, 1).
    pub rank_one_excess: f64,
}

impl RankOneReport {
    pub fn worst(&self) -> f64 {
        [
            Some(self.shift_identity),
            self.a0_identity,
            self.abd_identity,
            Some(self.system_identity),
            Some(self.rank_one_excess),
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: &Tolerance) -> bool {
        self.worst() <= tol.rel && self.product_rank <= 1
    }
}

/// Relative residual of `x − y = 0`.
fn rel_residual<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>) -> f64 {
    let scale = x.max_abs().max(y.max_abs()).max(1.0);
    x.max_abs_diff(y) / scale
}

/// σ₁ estimate and Frobenius tail of a float matrix (see
/// [`RankOneReport::rank_one_excess`]).
fn sigma_tail(m: &Matrix<C64>) -> (f64, f64) {
    let (r, c) = (m.rows(), m.cols());
    if r == 0 || c == 0 || m.max_abs() == 0.0 {
        return (0.0, 0.0);
    }
    // H = MᴴM (c×c Hermitian PSD).
    let mh = m.map(|z| Scalar::conj(z)).transpose();
    let h = mh.mul(m);
    let frob2: f64 = (0..c).map(|i| h[(i, i)].re).sum();
    // Power iteration for the top eigenvalue of H.
    let mut v: Vec<C64> = (0..c)
        .map(|i| C64::from_re_im(1.0 / (i as f64 + 1.0), 0.3 / (i as f64 + 2.0)))
        .collect();
    let mut lambda = 0.0_f64;
    for _ in 0..200 {
        let w = crate::matrix::mat_vec(&h, &v);
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            lambda = 0.0;
            break;
        }
        v = w.iter().map(|z| z / norm).collect();
        lambda = norm;
    }
    // After normalization |Hv| ≈ λ₁; Rayleigh quotient refines it.
    let hv = crate::matrix::mat_vec(&h, &v);
    let rq: f64 = v
        .iter()
        .zip(&hv)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    lambda = lambda.max(rq).max(0.0);
    let sigma1 = lambda.sqrt();
    if sigma1 == 0.0 {
        return (0.0, frob2.sqrt());
    }
    // Tail via deflation: ‖P(Id − v vᴴ)‖_F = sqrt(Σ_{i≥2} σᵢ²).  Subtracting
    // the top direction entrywise keeps the tail accurate to ~ε·σ₁, whereas
    // sqrt(frob² − λ₁) floors it at √ε·σ₁ through cancellation.
    let pv = crate::matrix::mat_vec(m, &v);
    let mut tail2 = 0.0_f64;
    for i in 0..r {
        for j in 0..c {
            let deflated = m[(i, j)] - pv[i] * v[j].conj();
            tail2 += deflated.norm_sqr();
        }
    }
    (sigma1, tail2.sqrt())
}

/// Largest 2×2 minor modulus (exact-backend rank-≤-1 witness).
fn max_two_minor<S: Scalar>(m: &Matrix<S>) -> f64 {
    let mut worst = 0.0_f64;
    for r1 in 0..m.rows() {
        for r2 in r1 + 1..m.rows() {
            for c1 in 0..m.cols() {
                for c2 in c1 + 1..m.cols() {
                    let det = m[(r1, c1)].clone() * m[(r2, c2)].clone()
                        - m[(r1, c2)].clone() * m[(r2, c1)].clone();
                    worst = worst.max(det.modulus());
                }
            }
        }
    }
    worst
}

/// Check the rank-one identities for a system, at relative tolerance
/// `rel_tol` for internal rank decisions.
pub fn verify_rank_one<S: Scalar>(
    sys: &RankOneSystem<S>,
    rel_tol: f64,
) -> Result<RankOneReport> {
    let n = sys.n();
    let b = &sys.bspec;
    let d = &sys.dspec;
    let jb = b.matrix();
    let dt = d.matrix().transpose();
    let shift_t = JordanSpec::<S>::nilpotent(n).matrix().transpose();
    let vecs = canonical_vectors(b, d)?;
    let f_shift = unit_vector::<S>(n, 0);

    // A(B)·B − Λₙᵀ·A(B) = f_Λ g_Bᵀ Bⁿ  (valid for any B, nilpotent included)
    let a_shift = build_a_shift(b, n);
    let lhs = a_shift.mul(&jb).sub(&shift_t.mul(&a_shift));
    let rhs = outer(&f_shift, &vec_mat(&vecs.g_b, &jb.pow(n)));
    let shift_identity = rel_residual(&lhs, &rhs);

    let disjoint = b.check_disjoint_from(d).is_ok();

    // A⁰·B − Dᵀ·A⁰ = f_D g_Bᵀ
    let a0_identity = if disjoint {
        let a0 = build_a0(b, d)?;
        let lhs = a0.mul(&jb).sub(&dt.mul(&a0));
        let rhs = outer(&vecs.f_d, &vecs.g_b);
        Some(rel_residual(&lhs, &rhs))
    } else {
        None
    };

    // A(B,D)·B − Dᵀ·A(B,D) = f_D g_Bᵀ r_D(B)
    let abd_identity = if disjoint {
        let abd = build_a(b, d)?;
        let lhs = abd.mul(&jb).sub(&dt.mul(&abd));
        let rhs = outer(&vecs.f_d, &vec_mat(&vecs.g_b, &d.char_poly_on(b)));
        Some(rel_residual(&lhs, &rhs))
    } else {
        None
    };

    // The system's own witness equation.
    let lhs = sys.a.mul(&jb).sub(&dt.mul(&sys.a));
    let rhs = outer(&sys.f, &sys.g);
    let system_identity = rel_residual(&lhs, &rhs);

    // Geometric form: A·B·(A^⊥)ᵀ has rank ≤ 1.
    let perp = sys.a.row_annihilator(rel_tol)?;
    let product = sys.a.mul(&jb).mul(&perp.transpose());
    let product_rank = product.rank(rel_tol);
    let rank_one_excess = if S::EXACT {
        let scale = product.max_abs().max(1.0);
        max_two_minor(&product) / (scale * scale)
    } else {
        let pf = product.map(|z| z.to_c64());
        let (sigma1, tail) = sigma_tail(&pf);
        tail / sigma1.max(1.0)
    };

    Ok(RankOneReport {
        shift_identity,
        a0_identity,
        abd_identity,
        system_identity,
        product_rank,
        rank_one_excess,
    })
}

/// Residuals of the structural lemmas tying the three `A`-matrices and
/// `K(D)` together.
#[derive(Debug, Clone)]
pub struct LemmaReport<S> {
    /// `A⁰(B,D)·r_D(B)` versus the entrywise residue formula for `A(B,D)`.
    pub product_vs_residue: f64,
    /// `K(D)·A(B,D) = A(B)`.
    pub k_factorization: f64,
    /// `Λₙᵀ·K(D) = K(D)·Dᵀ − f_Λ·k(D)ᵀ`.
    pub shift_intertwine: f64,
    /// `K(D)·f_D = f_Λ`.
    pub k_canonical_vector: f64,
    /// `κ(D) = det K(D)`.
    pub kappa: S,
}

impl<S: Scalar> LemmaReport<S> {
    pub fn worst(&self) -> f64 {
        [
            self.product_vs_residue,
            self.k_factorization,
            self.shift_intertwine,
            self.k_canonical_vector,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: &Tolerance) -> bool {
        self.worst() <= tol.rel && !self.kappa.is_zero()
    }
}

pub fn lemma_identities<S: Scalar>(
    b: &JordanSpec<S>,
    d: &JordanSpec<S>,
) -> Result<LemmaReport<S>> {
    let n = d.dim();
    let abd_prod = build_a(b, d)?;
    let abd_res = build_a_residue(b, d)?;
    let product_vs_residue = rel_residual(&abd_prod, &abd_res);

    let k = build_k(d)?;
    let a_shift = build_a_shift(b, n);
    let k_factorization = rel_residual(&k.mul(&abd_prod), &a_shift);

    let vecs = canonical_vectors(b, d)?;
    let shift_t = JordanSpec::<S>::nilpotent(n).matrix().transpose();
    let dt = d.matrix().transpose();
    let f_shift = unit_vector::<S>(n, 0);
    let lhs = shift_t.mul(&k);
    let rhs = k.mul(&dt).sub(&outer(&f_shift, &vecs.k_d));
    let shift_intertwine = rel_residual(&lhs, &rhs);

    let mapped = crate::matrix::mat_vec(&k, &vecs.f_d);
    let diff: Vec<S> = mapped
        .iter()
        .zip(&f_shift)
        .map(|(x, y)| x.clone() - y.clone())
        .collect();
    let k_canonical_vector = vec_max_abs(&diff) / vec_max_abs(&mapped).max(1.0);

    let kappa = k.det()?;
    Ok(LemmaReport {
        product_vs_residue,
        k_factorization,
        shift_intertwine,
        k_canonical_vector,
        kappa,
    })
}
