//! Ready-made rank-one systems: the rational (polynomial), soliton, Cauchy,
//! Calogero–Moser and generic-Jordan families, plus their family-specific
//! identity checks.
//!
//! All factories return a [`RankOneSystem`] whose data satisfies the
//! intertwining identity `A·B − Dᵀ·A = f·gᵀ` exactly, normalized so that `D`
//! is in upper Jordan form.  Models written in the literature with a
//! lower-shift `D` are conjugated by the reversal permutation, which leaves
//! every τ evaluation unchanged.

use crate::error::{Error, Result};
use crate::flow::FlowVector;
use crate::jordan::JordanSpec;
use crate::matrix::{mat_vec, vec_mat, Matrix};
use crate::rankone::{
    block_head_indicator, build_a0, build_a, build_a_shift, build_k, RankOneSystem,
};
use crate::scalar::Scalar;
use crate::schur::{partitions_in_box, plucker_rational, rational_columns, Partition};
use crate::tau::tau_gk;

/// Rank tolerance used by the factories when validating coefficient
/// matrices on the floating backend.
const RANK_TOL: f64 = 1e-10;

fn require_full_rank<S: Scalar>(c: &Matrix<S>, what: &str) -> Result<()> {
    if c.rank(RANK_TOL) < c.rows() {
        return Err(Error::Rank(format!(
            "{} matrix must have full row rank {}",
            what,
            c.rows()
        )));
    }
    Ok(())
}

/// Reversal permutation matrix `J` (ones on the anti-diagonal).
fn reversal<S: Scalar>(n: usize) -> Matrix<S> {
    Matrix::from_fn(n, n, |r, c| {
        if r + c == n - 1 {
            S::one()
        } else {
            S::zero()
        }
    })
}

/// The polynomial (rational) family: `B = Λ_{n+k}`, `D = Λ_n`,
/// `A = [J | 0]`, `F = J` with `J` the reversal permutation, `f = e₁`,
/// `g = e_{n+1}`.  τ is a polynomial in the flow times; at `t = 0` it equals
/// the minor of `C` on the first `n` columns.
pub fn rational_family<S: Scalar>(n: usize, k: usize, c: Matrix<S>) -> Result<RankOneSystem<S>> {
    if n == 0 {
        return Err(Error::BadInput("n must be positive".into()));
    }
    let big_n = n + k;
    if c.rows() != n || c.cols() != big_n {
        return Err(Error::Shape(format!(
            "C must be {}x{}, got {}x{}",
            n,
            big_n,
            c.rows(),
            c.cols()
        )));
    }
    require_full_rank(&c, "rational family C")?;
    let j = reversal::<S>(n);
    let a = j.hstack(&Matrix::zeros(n, k));
    let mut f = vec![S::zero(); n];
    f[0] = S::one();
    let mut g = vec![S::zero(); big_n];
    g[n] = S::one();
    RankOneSystem::new(
        a,
        JordanSpec::nilpotent(big_n),
        c,
        JordanSpec::nilpotent(n),
        j,
        f,
        g,
    )
}

/// The soliton family: `B = diag(β₁,…,β_N)`, `D = Λ_n`,
/// `A` the `n×N` Vandermonde with rows `β^{n-1}, …, β, 1`, `f = e₁`,
/// `g = (β₁ⁿ, …, β_Nⁿ)`, `F = Id`.
pub fn soliton_family<S: Scalar>(betas: &[S], c: Matrix<S>) -> Result<RankOneSystem<S>> {
    let n = c.rows();
    let big_n = betas.len();
    if n == 0 || c.cols() != big_n {
        return Err(Error::Shape(format!(
            "C must be n x {} with n >= 1, got {}x{}",
            big_n,
            c.rows(),
            c.cols()
        )));
    }
    require_full_rank(&c, "soliton family C")?;
    let bspec = JordanSpec::diagonal(betas.to_vec())?;
    let a = build_a_shift(&bspec, n);
    let mut f = vec![S::zero(); n];
    f[0] = S::one();
    let g: Vec<S> = betas.iter().map(|b| crate::scalar::powi(b, n)).collect();
    RankOneSystem::new(
        a,
        bspec,
        c,
        JordanSpec::nilpotent(n),
        Matrix::identity(n),
        f,
        g,
    )
}

/// Direct exponential-sum evaluation of the soliton τ:
/// `Σ_{λ ⊂ (kⁿ)} π_λ(C) · det(V_S) · e^{T_λ}` over ascending column sets
/// `S = S(λ)`, where `V_S` is the Vandermonde minor on `S` and
/// `T_λ = Σ_i t_i Σ_{j∈S} β_j^i`.
pub fn soliton_tau_direct<S: Scalar>(
    betas: &[S],
    c: &Matrix<S>,
    t: &FlowVector<S>,
) -> Result<S> {
    let n = c.rows();
    let big_n = betas.len();
    if c.cols() != big_n || big_n < n {
        return Err(Error::Shape(format!(
            "C must be {}xN with N >= {}, got {}x{}",
            n,
            n,
            c.rows(),
            c.cols()
        )));
    }
    let bspec = JordanSpec::diagonal(betas.to_vec())?;
    let v = build_a_shift(&bspec, n);
    let mut total = S::zero();
    for lambda in partitions_in_box(n, big_n - n) {
        let cols = rational_columns(&lambda, n);
        let pi = plucker_rational(&lambda, c)?;
        if pi.is_zero() {
            continue;
        }
        let v_minor = Matrix::from_fn(n, n, |r, j| v[(r, cols[j] - 1)].clone()).det()?;
        let mut phase = S::zero();
        for &col in &cols {
            phase = phase + t.xi(&betas[col - 1]);
        }
        total = total + pi * v_minor * phase.exp()?;
    }
    Ok(total)
}

/// Report on the total-nonnegativity conditions for a regular (nonsingular
/// for all real flow times) soliton model.
#[derive(Debug, Clone)]
pub struct RegularityReport<S> {
    /// β values are real and strictly decreasing.
    pub spectrum_ordered: bool,
    /// Minors of `C` that are negative, complex, or otherwise invalid,
    /// with their partitions.
    pub violations: Vec<(Partition, S)>,
}

impl<S> RegularityReport<S> {
    pub fn is_regular(&self) -> bool {
        self.spectrum_ordered && self.violations.is_empty()
    }
}

/// Check the sufficient regularity condition for the soliton family:
/// strictly decreasing real `β` and all ascending-column minors of `C`
/// nonnegative (totally nonnegative `C`).
pub fn is_regular_soliton<S: Scalar>(betas: &[S], c: &Matrix<S>) -> Result<RegularityReport<S>> {
    let n = c.rows();
    let big_n = betas.len();
    if c.cols() != big_n || big_n < n {
        return Err(Error::Shape(format!(
            "C must be {}xN with N >= {}, got {}x{}",
            n,
            n,
            c.rows(),
            c.cols()
        )));
    }
    let imag_tol = 1e-12;
    let mut spectrum_ordered = true;
    for b in betas {
        if b.to_c64().im.abs() > imag_tol {
            spectrum_ordered = false;
        }
    }
    for w in betas.windows(2) {
        if w[0].to_c64().re <= w[1].to_c64().re {
            spectrum_ordered = false;
        }
    }
    let mut violations = Vec::new();
    for lambda in partitions_in_box(n, big_n - n) {
        let pi = plucker_rational(&lambda, c)?;
        let val = pi.to_c64();
        if val.im.abs() > imag_tol || val.re < -imag_tol {
            violations.push((lambda, pi));
        }
    }
    Ok(RegularityReport {
        spectrum_ordered,
        violations,
    })
}

/// The Cauchy family: `B = diag(β)`, `D = diag(δ)` (all `n + N` values
/// distinct), `A` the Cauchy matrix `1/(β_j − δ_i)`, `f = g = (1,…,1)`,
/// `F = Id`.
pub fn cauchy_family<S: Scalar>(
    betas: &[S],
    deltas: &[S],
    c: Matrix<S>,
) -> Result<RankOneSystem<S>> {
    let n = deltas.len();
    let big_n = betas.len();
    if c.rows() != n || c.cols() != big_n {
        return Err(Error::Shape(format!(
            "C must be {}x{}, got {}x{}",
            n,
            big_n,
            c.rows(),
            c.cols()
        )));
    }
    require_full_rank(&c, "Cauchy family C")?;
    let bspec = JordanSpec::diagonal(betas.to_vec())?;
    let dspec = JordanSpec::diagonal(deltas.to_vec())?;
    let a = build_a0(&bspec, &dspec)?;
    RankOneSystem::new(
        a,
        bspec,
        c,
        dspec,
        Matrix::identity(n),
        vec![S::one(); n],
        vec![S::one(); big_n],
    )
}

/// Residual of the change-of-basis identity tying the Vandermonde matrix to
/// the Cauchy matrix: `V(β) = K(δ) · A⁰(β,δ) · r_δ(B)` with `r_δ` the
/// characteristic polynomial of `diag(δ)`.
pub fn kar_identity_check<S: Scalar>(betas: &[S], deltas: &[S]) -> Result<f64> {
    let n = deltas.len();
    let bspec = JordanSpec::diagonal(betas.to_vec())?;
    let dspec = JordanSpec::diagonal(deltas.to_vec())?;
    let v = build_a_shift(&bspec, n);
    let k = build_k(&dspec)?;
    let a0 = build_a0(&bspec, &dspec)?;
    let rhs = k.mul(&a0).mul(&dspec.char_poly_on(&bspec));
    let scale = v.max_abs().max(rhs.max_abs()).max(1.0);
    Ok(v.max_abs_diff(&rhs) / scale)
}

/// The Calogero–Moser family from pole positions `z` (pairwise distinct)
/// and coupling values `ξ`: `B` has a 2×2 Jordan block at each `z_i`,
/// `A = [V-columns | V′-columns]` interleaved per block, `C` pairs `e_i`
/// with `ξ_i e_i`, `D = Λ_n`, `f = e₁`, `g = (Bᵀ)ⁿ·(block heads)`.
pub fn calogero_moser_family<S: Scalar>(z: &[S], xi: &[S]) -> Result<RankOneSystem<S>> {
    let n = z.len();
    if n == 0 || xi.len() != n {
        return Err(Error::Shape(format!(
            "need equally many pole positions and couplings, got {} and {}",
            n,
            xi.len()
        )));
    }
    let bspec = JordanSpec::from_pairs(z.iter().map(|b| (b.clone(), 2)).collect())?;
    vandermonde_inverse(z)?; // surface near-coincident poles early
    let a = build_a_shift(&bspec, n);
    let c = Matrix::from_fn(n, 2 * n, |r, col| {
        let (block, inner) = (col / 2, col % 2);
        if r == block {
            if inner == 0 {
                S::one()
            } else {
                xi[block].clone()
            }
        } else {
            S::zero()
        }
    });
    let mut f = vec![S::zero(); n];
    f[0] = S::one();
    let heads = block_head_indicator(&bspec);
    let bt_pow = bspec.matrix().transpose().pow(n);
    let g = mat_vec(&bt_pow, &heads);
    RankOneSystem::new(
        a,
        bspec,
        c,
        JordanSpec::nilpotent(n),
        Matrix::identity(n),
        f,
        g,
    )
}

/// Inverse of the square Vandermonde `V(z)` (rows `z^{n-1}, …, z, 1`),
/// reported as [`Error::DegenerateVandermonde`] when singular.
fn vandermonde_inverse<S: Scalar>(z: &[S]) -> Result<Matrix<S>> {
    let n = z.len();
    let spec = JordanSpec::diagonal(z.to_vec())
        .map_err(|e| Error::DegenerateVandermonde(e.to_string()))?;
    let v = build_a_shift(&spec, n);
    v.solve(&Matrix::identity(n))
        .map_err(|e| Error::DegenerateVandermonde(e.to_string()))
}

/// Relative residual of the closed-form determinant reading of the
/// Calogero–Moser τ:
/// `τ(t) = Π_j e^{ξ(z_j,t)} · det V · det(X₀ + Σ_i i·t_i·Z^{i-1}·Ξ)` with
/// `X₀ = Id + V⁻¹V′Ξ`, `Z = diag(z)`, `Ξ = diag(ξ)`.
pub fn cm_tau_identity<S: Scalar>(z: &[S], xi: &[S], t: &FlowVector<S>) -> Result<f64> {
    let n = z.len();
    let sys = calogero_moser_family(z, xi)?;
    let lhs = tau_gk(&sys.a, &sys.bspec, &sys.c, t)?;

    let diag_spec = JordanSpec::diagonal(z.to_vec())?;
    let v = build_a_shift(&diag_spec, n);
    // V′ row a has entries (n−a)·z^{n−a−1}: differentiate each Vandermonde row.
    let vprime = Matrix::from_fn(n, n, |r, c| {
        let e = n - (r + 1); // exponent in V's row r
        if e == 0 {
            S::zero()
        } else {
            S::from_i64(e as i64) * crate::scalar::powi(&z[c], e - 1)
        }
    });
    let xi_mat = Matrix::from_fn(n, n, |r, c| {
        if r == c {
            xi[r].clone()
        } else {
            S::zero()
        }
    });
    let vinv = vandermonde_inverse(z)?;
    let x0 = Matrix::identity(n).add(&vinv.mul(&vprime).mul(&xi_mat));
    // S(t) = Σ_i i·t_i·Z^{i−1} is diagonal with entries ∂_z ξ(z_j, t).
    let s_mat = Matrix::from_fn(n, n, |r, c| {
        if r != c {
            return S::zero();
        }
        let mut acc = S::zero();
        for i in 1..=t.k() {
            acc = acc + S::from_i64(i as i64) * t.get(i) * crate::scalar::powi(&z[r], i - 1);
        }
        acc
    });
    let mut phase = S::zero();
    for zj in z {
        phase = phase + t.xi(zj);
    }
    let rhs = phase.exp()? * v.det()? * x0.add(&s_mat.mul(&xi_mat)).det()?;
    let (l, r) = (lhs.to_c64(), rhs.to_c64());
    Ok((l - r).norm() / l.norm().max(r.norm()).max(1.0))
}

/// A rank-one system from arbitrary disjoint Jordan data, using the
/// canonical intertwiner `A(B,D)` and its vectors `f = f_D`,
/// `gᵀ = g_Bᵀ·r_D(B)`.
pub fn generic_jordan_family<S: Scalar>(
    bspec: JordanSpec<S>,
    dspec: JordanSpec<S>,
    c: Matrix<S>,
    fmat: Matrix<S>,
) -> Result<RankOneSystem<S>> {
    let n = dspec.dim();
    let big_n = bspec.dim();
    if c.rows() != n || c.cols() != big_n {
        return Err(Error::Shape(format!(
            "C must be {}x{}, got {}x{}",
            n,
            big_n,
            c.rows(),
            c.cols()
        )));
    }
    require_full_rank(&c, "generic Jordan family C")?;
    let a = build_a(&bspec, &dspec)?;
    let f = block_head_indicator(&dspec);
    let g = vec_mat(&block_head_indicator(&bspec), &dspec.char_poly_on(&bspec));
    RankOneSystem::new(a, bspec, c, dspec, fmat, f, g)
}

/// A family selector carrying exactly the data needed to build one system;
/// the single entry point used by the command-line interface.
#[derive(Debug, Clone)]
pub enum FamilySpec<S: Scalar> {
    Rational {
        n: usize,
        k: usize,
        c: Matrix<S>,
    },
    Soliton {
        betas: Vec<S>,
        c: Matrix<S>,
    },
    Cauchy {
        betas: Vec<S>,
        deltas: Vec<S>,
        c: Matrix<S>,
    },
    CalogeroMoser {
        z: Vec<S>,
        xi: Vec<S>,
    },
    GenericJordan {
        bspec: JordanSpec<S>,
        dspec: JordanSpec<S>,
        c: Matrix<S>,
        fmat: Matrix<S>,
    },
}

impl<S: Scalar> FamilySpec<S> {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Rational { .. } => "rational",
            FamilySpec::Soliton { .. } => "soliton",
            FamilySpec::Cauchy { .. } => "cauchy",
            FamilySpec::CalogeroMoser { .. } => "calogero-moser",
            FamilySpec::GenericJordan { .. } => "generic-jordan",
        }
    }

    pub fn build(&self) -> Result<RankOneSystem<S>> {
        match self {
            FamilySpec::Rational { n, k, c } => rational_family(*n, *k, c.clone()),
            FamilySpec::Soliton { betas, c } => soliton_family(betas, c.clone()),
            FamilySpec::Cauchy { betas, deltas, c } => {
                cauchy_family(betas, deltas, c.clone())
            }
            FamilySpec::CalogeroMoser { z, xi } => calogero_moser_family(z, xi),
            FamilySpec::GenericJordan {
                bspec,
                dspec,
                c,
                fmat,
            } => generic_jordan_family(bspec.clone(), dspec.clone(), c.clone(), fmat.clone()),
        }
    }

    /// Whether every τ evaluation of this family is polynomial, making the
    /// exact backend fully usable at nonzero flow times.
    pub fn is_polynomial(&self) -> bool {
        match self {
            FamilySpec::Rational { .. } => true,
            FamilySpec::GenericJordan { bspec, dspec, .. } => {
                bspec.is_nilpotent() && dspec.is_nilpotent()
            }
            _ => false,
        }
    }
}
