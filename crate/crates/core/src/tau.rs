//! Evaluation of the finite determinantal τ-functions.
//!
//! The central object is
//!
//! ```text
//! τ(t) = det( F · e^{−Σ tᵢ (Dᵀ)ⁱ} · A · e^{Σ tⱼ Bʲ} · Cᵀ )      (l×l)
//! ```
//!
//! for a rank-one intertwined system `(A, B, C, D, F, f, g)`, together with
//!
//! * the plain flow determinant `det(A·e^{Σ tᵢBⁱ}·Cᵀ)`,
//! * the three equivalent spec-driven forms built from `A(B,D)`, `A⁰(B,D)`
//!   and `A(B)` (agreeing up to the constant `κ(D) = det K(D)`),
//! * Miwa shifts `τ(t − Σ_a [z_a⁻¹])` realized by exact resolvent factors,
//! * the Baker–Akhiezer function,
//! * the big-cell geometric form `det(Id_n + Ê_D(t)(A E_B(t) − E_{Dᵀ}(t) A) M)`
//!   whose `A` is recovered internally from `(f, g, B, D)` by solving the
//!   intertwining (Sylvester) equation,
//! * the scalar gauge factor `e^{Σ tᵢ tr(Dⁱ)}` tying the two pictures.

use crate::error::{Error, Result};
use crate::flow::FlowVector;
use crate::jordan::JordanSpec;
use crate::matrix::Matrix;
use crate::rankone::{build_a, build_a0, build_a_shift, build_k, RankOneSystem};
use crate::scalar::{Scalar, C64};

/// `E_B(t) = e^{Σ tᵢ Bⁱ}` for the spec's Jordan matrix.
fn e_b<S: Scalar>(bspec: &JordanSpec<S>, t: &FlowVector<S>) -> Result<Matrix<S>> {
    bspec.flow_exp(t)
}

/// `Ê_D(t) = e^{−Σ tᵢ (Dᵀ)ⁱ}` — the left flow factor of the general form.
fn e_d_hat<S: Scalar>(dspec: &JordanSpec<S>, t: &FlowVector<S>) -> Result<Matrix<S>> {
    Ok(dspec.flow_exp(&t.neg())?.transpose())
}

/// `E_{Dᵀ}(t) = e^{+Σ tᵢ (Dᵀ)ⁱ}`.
fn e_dt<S: Scalar>(dspec: &JordanSpec<S>, t: &FlowVector<S>) -> Result<Matrix<S>> {
    Ok(dspec.flow_exp(t)?.transpose())
}

/// The flow determinant `det(A · e^{Σ tᵢBⁱ} · Cᵀ)` with `A, C` both `n×N`.
pub fn tau_gk<S: Scalar>(
    a: &Matrix<S>,
    bspec: &JordanSpec<S>,
    c: &Matrix<S>,
    t: &FlowVector<S>,
) -> Result<S> {
    let n_big = bspec.dim();
    if a.cols() != n_big || c.cols() != n_big {
        return Err(Error::Shape(format!(
            "A and C must have {} columns, got {} and {}",
            n_big,
            a.cols(),
            c.cols()
        )));
    }
    if a.rows() != c.rows() {
        return Err(Error::Shape(format!(
            "A and C must have equal row counts, got {} and {}",
            a.rows(),
            c.rows()
        )));
    }
    a.mul(&e_b(bspec, t)?).mul(&c.transpose()).det()
}

/// The general `l×l` determinant `det(F·Ê_D(t)·A·E_B(t)·Cᵀ)`.
pub fn tau_general<S: Scalar>(sys: &RankOneSystem<S>, t: &FlowVector<S>) -> Result<S> {
    let left = sys.fmat.mul(&e_d_hat(&sys.dspec, t)?);
    left.mul(&sys.a)
        .mul(&e_b(&sys.bspec, t)?)
        .mul(&sys.c.transpose())
        .det()
}

/// `det(F·A·Cᵀ)` — the τ value at `t = 0` (the big-cell certificate).
pub fn tau_origin<S: Scalar>(sys: &RankOneSystem<S>) -> Result<S> {
    sys.fmat.mul(&sys.a).mul(&sys.c.transpose()).det()
}

/// The three equal expressions for the spec-driven τ, plus `κ(D)`.
#[derive(Debug, Clone)]
pub struct ThreeFormTau<S> {
    /// `det(A(B,D)·E(t)·Cᵀ)`.
    pub via_abd: S,
    /// `det(A⁰(B,D)·E(t)·r_D(B)·Cᵀ)`.
    pub via_a0: S,
    /// `κ(D)⁻¹·det(A(B)·E(t)·Cᵀ)`.
    pub via_shift: S,
    /// `κ(D) = det K(D)`.
    pub kappa: S,
}

impl<S: Scalar> ThreeFormTau<S> {
    /// Largest pairwise relative disagreement among the three values.
    pub fn max_rel_disagreement(&self) -> f64 {
        let vals = [
            self.via_abd.to_c64(),
            self.via_a0.to_c64(),
            self.via_shift.to_c64(),
        ];
        let scale = vals.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((vals[i] - vals[j]).norm() / scale);
            }
        }
        worst
    }
}

/// Evaluate the three equivalent determinant forms built from the canonical
/// matrices of `(Bspec, Dspec)` and the coefficient matrix `C` (`n×N`).
pub fn tau_w_bcd<S: Scalar>(
    bspec: &JordanSpec<S>,
    c: &Matrix<S>,
    dspec: &JordanSpec<S>,
    t: &FlowVector<S>,
) -> Result<ThreeFormTau<S>> {
    let n = dspec.dim();
    let n_big = bspec.dim();
    if c.rows() != n || c.cols() != n_big {
        return Err(Error::Shape(format!(
            "C must be {}x{}, got {}x{}",
            n,
            n_big,
            c.rows(),
            c.cols()
        )));
    }
    let kappa = build_k(dspec)?.det()?;
    if kappa.is_zero() {
        return Err(Error::DegenerateK);
    }
    let e = e_b(bspec, t)?;
    let ct = c.transpose();
    let via_abd = build_a(bspec, dspec)?.mul(&e).mul(&ct).det()?;
    let via_a0 = build_a0(bspec, dspec)?
        .mul(&e)
        .mul(&dspec.char_poly_on(bspec))
        .mul(&ct)
        .det()?;
    let via_shift = build_a_shift(bspec, n).mul(&e).mul(&ct).det()? / kappa.clone();
    Ok(ThreeFormTau {
        via_abd,
        via_a0,
        via_shift,
        kappa,
    })
}

/// A Miwa evaluation point `z` for the substitution `tᵢ ↦ tᵢ − 1/(i zⁱ)`,
/// realized on matrices by the exact factors `Id − B/z` and `(Id − Dᵀ/z)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiwaPoint<S> {
    z: S,
}

impl<S: Scalar> MiwaPoint<S> {
    /// A point for rational-continuation semantics: any nonzero `z`.
    pub fn new(z: S) -> Result<Self> {
        if z.is_zero() {
            return Err(Error::ShiftDomain("Miwa point must be nonzero".into()));
        }
        Ok(MiwaPoint { z })
    }

    /// A point in the analytic regime: `|z|` must strictly exceed the
    /// spectral radii of both `B` and `D`, so that the resolvent factors
    /// genuinely sum the series `e^{−Σ (X/z)ⁱ/i}`.
    pub fn analytic(z: S, bspec: &JordanSpec<S>, dspec: &JordanSpec<S>) -> Result<Self> {
        let rho = bspec.spectral_radius().max(dspec.spectral_radius());
        if z.modulus() <= rho {
            return Err(Error::ShiftDomain(format!(
                "|z| = {} not above the spectral radius {}",
                z.modulus(),
                rho
            )));
        }
        Self::new(z)
    }
}

impl<S> MiwaPoint<S> {
    pub fn z(&self) -> &S {
        &self.z
    }
}

/// `τ(t − Σ_a [z_a⁻¹])` through the factor identity
/// `det(F·Ê_D(t)·Π_a(Id−Dᵀ/z_a)⁻¹·A·Π_a(Id−B/z_a)·E_B(t)·Cᵀ)`.
///
/// Each `z_a` must avoid the spectrum of `D` (the left factors are inverted);
/// points inside the spectral-radius disk are accepted as rational
/// continuations — use [`MiwaPoint::analytic`] to insist on convergence.
pub fn miwa_shift_tau<S: Scalar>(
    sys: &RankOneSystem<S>,
    t: &FlowVector<S>,
    shifts: &[MiwaPoint<S>],
) -> Result<S> {
    let n = sys.n();
    let n_big = sys.big_n();
    let mut left_prod: Matrix<S> = Matrix::identity(n);
    let mut right_prod: Matrix<S> = Matrix::identity(n_big);
    let dt = sys.dspec.matrix().transpose();
    let jb = sys.bspec.matrix();
    for p in shifts {
        if sys.dspec.contains_eigenvalue(&p.z) {
            return Err(Error::ShiftDomain(
                "Miwa point coincides with an eigenvalue of D".into(),
            ));
        }
        let zinv = S::one() / p.z.clone();
        let left = Matrix::identity(n).sub(&dt.scale(&zinv));
        let right = Matrix::identity(n_big).sub(&jb.scale(&zinv));
        left_prod = left_prod.mul(&left);
        right_prod = right_prod.mul(&right);
    }
    // A ↦ (Π left)⁻¹ · A · (Π right), applied by solving instead of inverting.
    let shifted_a = left_prod.solve(&sys.a)?.mul(&right_prod);
    let left = sys.fmat.mul(&e_d_hat(&sys.dspec, t)?);
    left.mul(&shifted_a)
        .mul(&e_b(&sys.bspec, t)?)
        .mul(&sys.c.transpose())
        .det()
}

/// Baker–Akhiezer function `ψ(z, t) = e^{ξ(z,t)} τ(t − [z⁻¹]) / τ(t)`.
pub fn baker_akhiezer<S: Scalar>(
    sys: &RankOneSystem<S>,
    point: &MiwaPoint<S>,
    t: &FlowVector<S>,
) -> Result<S> {
    let denom = tau_general(sys, t)?;
    if denom.is_zero() {
        return Err(Error::ZeroTau);
    }
    let shifted = miwa_shift_tau(sys, t, std::slice::from_ref(point))?;
    let phase = t.xi(point.z()).exp()?;
    Ok(phase * shifted / denom)
}

/// Solve the intertwining equation `A·B − Dᵀ·A = f·gᵀ` for `A` (`n×N`).
/// The solution is unique precisely when `B` and `D` have disjoint spectra.
pub fn sylvester_solve_a<S: Scalar>(
    f: &[S],
    g: &[S],
    bspec: &JordanSpec<S>,
    dspec: &JordanSpec<S>,
) -> Result<Matrix<S>> {
    bspec.check_disjoint_from(dspec)?;
    let n = dspec.dim();
    let n_big = bspec.dim();
    if f.len() != n || g.len() != n_big {
        return Err(Error::Shape(format!(
            "f, g must have lengths {}, {}; got {}, {}",
            n,
            n_big,
            f.len(),
            g.len()
        )));
    }
    let jb = bspec.matrix();
    let jd = dspec.matrix();
    // Unknowns vec(A) in row-major order: index (r, c) ↦ r·N + c.
    let dim = n * n_big;
    let mut lhs: Matrix<S> = Matrix::zeros(dim, dim);
    let mut rhs: Matrix<S> = Matrix::zeros(dim, 1);
    for r in 0..n {
        for c in 0..n_big {
            let row = r * n_big + c;
            // (A·B)_{rc} = Σ_k A_{rk} B_{kc}
            for k in 0..n_big {
                let cur = lhs[(row, r * n_big + k)].clone();
                lhs[(row, r * n_big + k)] = cur + jb[(k, c)].clone();
            }
            // (Dᵀ·A)_{rc} = Σ_k D_{kr} A_{kc}
            for k in 0..n {
                let cur = lhs[(row, k * n_big + c)].clone();
                lhs[(row, k * n_big + c)] = cur - jd[(k, r)].clone();
            }
            rhs[(row, 0)] = f[r].clone() * g[c].clone();
        }
    }
    let sol = lhs.solve(&rhs).map_err(|_| {
        Error::EigenvalueCollision(
            "intertwining equation is singular; spectra must be disjoint".into(),
        )
    })?;
    Ok(Matrix::from_fn(n, n_big, |r, c| sol[(r * n_big + c, 0)].clone()))
}

/// Both Weinstein–Aronszajn-equivalent determinants of the big-cell
/// geometric form.
#[derive(Debug, Clone)]
pub struct GeometricTau<S> {
    /// `det(Id_n + Ê_D(t)·(A·E_B(t) − E_{Dᵀ}(t)·A)·M)`.
    pub small_form: S,
    /// `det(Id_N + M·Ê_D(t)·(A·E_B(t) − E_{Dᵀ}(t)·A))`.
    pub large_form: S,
}

impl<S: Scalar> GeometricTau<S> {
    pub fn value(&self) -> &S {
        &self.small_form
    }

    /// Relative disagreement between the `n×n` and `N×N` evaluations.
    pub fn agreement(&self) -> f64 {
        let a = self.small_form.to_c64();
        let b = self.large_form.to_c64();
        (a - b).norm() / a.norm().max(b.norm()).max(1.0)
    }
}

/// Geometric big-cell τ for the data `(f, g, B, D, M)`; the intertwining
/// matrix `A` is recovered internally from `(f, g)`.
pub fn tau_geometric<S: Scalar>(
    f: &[S],
    g: &[S],
    bspec: &JordanSpec<S>,
    dspec: &JordanSpec<S>,
    m: &Matrix<S>,
    t: &FlowVector<S>,
) -> Result<GeometricTau<S>> {
    let n = dspec.dim();
    let n_big = bspec.dim();
    if m.rows() != n_big || m.cols() != n {
        return Err(Error::Shape(format!(
            "M must be {}x{}, got {}x{}",
            n_big,
            n,
            m.rows(),
            m.cols()
        )));
    }
    let a = sylvester_solve_a(f, g, bspec, dspec)?;
    let bracket = a.mul(&e_b(bspec, t)?).sub(&e_dt(dspec, t)?.mul(&a));
    let core = e_d_hat(dspec, t)?.mul(&bracket);
    let small_form = Matrix::identity(n).add(&core.mul(m)).det()?;
    let large_form = Matrix::identity(n_big).add(&m.mul(&core)).det()?;
    Ok(GeometricTau {
        small_form,
        large_form,
    })
}

/// `M = Cᵀ(F·A·Cᵀ)⁻¹F` — the big-cell chart matrix at `t = 0`.
pub fn m_big_cell<S: Scalar>(sys: &RankOneSystem<S>) -> Result<Matrix<S>> {
    let core = sys.fmat.mul(&sys.a).mul(&sys.c.transpose());
    let x = core.solve(&sys.fmat).map_err(|_| Error::ZeroTau)?;
    Ok(sys.c.transpose().mul(&x))
}

/// `M(t) = E_B(t)Cᵀ · (F·Ê_D(t)·A·E_B(t)·Cᵀ)⁻¹ · F·Ê_D(t)` — the flowed
/// chart matrix, well defined wherever `τ(t) ≠ 0`.
pub fn m_of_t<S: Scalar>(
    sys: &RankOneSystem<S>,
    t: &FlowVector<S>,
) -> Result<Matrix<S>> {
    let ct_t = e_b(&sys.bspec, t)?.mul(&sys.c.transpose());
    let f_t = sys.fmat.mul(&e_d_hat(&sys.dspec, t)?);
    let core = f_t.mul(&sys.a).mul(&ct_t);
    let x = core.solve(&f_t).map_err(|_| Error::ZeroTau)?;
    Ok(ct_t.mul(&x))
}

/// The scalar gauge factor `e^{Σ tᵢ tr(Dⁱ)}`.
pub fn gauge_factor<S: Scalar>(dspec: &JordanSpec<S>, t: &FlowVector<S>) -> Result<S> {
    let mut s = S::zero();
    for i in 1..=t.k() {
        s = s + t.get(i) * dspec.trace_power(i);
    }
    s.exp()
}

/// Relative residual of the gauge relation
/// `det(A·E_B(t)·Cᵀ) = e^{Σ tᵢ tr(Dⁱ)}·det(A·Cᵀ)·τ_geom(t)`
/// with `M = Cᵀ(A·Cᵀ)⁻¹` (the `l = n`, `F = Id` chart).
pub fn gk_gauge_relation<S: Scalar>(
    sys: &RankOneSystem<S>,
    t: &FlowVector<S>,
) -> Result<f64> {
    if sys.l() != sys.n() {
        return Err(Error::Shape(format!(
            "gauge relation needs square C-pairing (l = n), got l = {}, n = {}",
            sys.l(),
            sys.n()
        )));
    }
    let lhs = tau_gk(&sys.a, &sys.bspec, &sys.c, t)?;
    let act = sys.a.mul(&sys.c.transpose());
    let origin = act.det()?;
    let x = act.solve(&Matrix::identity(sys.n())).map_err(|_| Error::ZeroTau)?;
    let m = sys.c.transpose().mul(&x);
    let geo = tau_geometric(&sys.f, &sys.g, &sys.bspec, &sys.dspec, &m, t)?;
    let rhs = gauge_factor(&sys.dspec, t)? * origin * geo.small_form;
    let l = lhs.to_c64();
    let r = rhs.to_c64();
    Ok((l - r).norm() / l.norm().max(r.norm()).max(1.0))
}

/// Cross-check of the closed-form flow bracket against its contour-integral
/// representation: the bracket `A·E_B(t) − E_{Dᵀ}(t)·A` equals
/// `(2πi)⁻¹ ∮ e^{ξ(z,t)} (z−Dᵀ)⁻¹ f gᵀ (z−B)⁻¹ dz` over any circle
/// enclosing both spectra.  Quadrature by the trapezoid rule on `|z| = radius`.
pub fn decoupling_contour_residual(
    f: &[C64],
    g: &[C64],
    bspec: &JordanSpec<C64>,
    dspec: &JordanSpec<C64>,
    t: &FlowVector<C64>,
    radius: f64,
    nodes: usize,
) -> Result<f64> {
    let rho = bspec.spectral_radius().max(dspec.spectral_radius());
    if radius <= rho {
        return Err(Error::ShiftDomain(format!(
            "contour radius {} must exceed the spectral radius {}",
            radius, rho
        )));
    }
    let n = dspec.dim();
    let n_big = bspec.dim();
    let a = sylvester_solve_a(f, g, bspec, dspec)?;
    let bracket = a
        .mul(&bspec.flow_exp(t)?)
        .sub(&dspec.flow_exp(t)?.transpose().mul(&a));

    let dt = dspec.matrix().transpose();
    let jb = bspec.matrix();
    let fcol = Matrix::from_fn(n, 1, |r, _| f[r]);
    let grow = Matrix::from_fn(1, n_big, |_, c| g[c]);
    let mut quad: Matrix<C64> = Matrix::zeros(n, n_big);
    for m in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * (m as f64) / (nodes as f64);
        let z = C64::from_re_im(radius * theta.cos(), radius * theta.sin());
        // (z − Dᵀ)⁻¹ f  and  gᵀ (z − B)⁻¹, via linear solves.
        let zd = Matrix::<C64>::identity(n).scale(&z).sub(&dt);
        let left = zd.solve(&fcol)?;
        let zb = Matrix::<C64>::identity(n_big).scale(&z).sub(&jb);
        let right = zb.transpose().solve(&grow.transpose())?.transpose();
        let weight = t.xi(&z).exp() * z / C64::from_i64(nodes as i64);
        quad = quad.add(&left.mul(&right).scale(&weight));
    }
    let scale = bracket.max_abs().max(quad.max_abs()).max(1.0);
    Ok(bracket.max_abs_diff(&quad) / scale)
}
