//! Acceptance battery: eleven end-to-end checks, one per release criterion.
//! Each test prints a single pass/fail line with the measured residual and
//! the tolerance it is judged against; tolerances are pinned here so a
//! regression anywhere in the stack turns the line red.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the eleven lines in order.

use std::process::Command;

use kptau::families::{
    calogero_moser_family, cauchy_family, generic_jordan_family, kar_identity_check,
    rational_family, soliton_family, soliton_tau_direct,
};
use kptau::hirota::{
    kp_halving, plucker_combination, plucker_relation_residual, xi_matrix, xi_rank2_check,
};
use kptau::rankone::{lemma_identities, verify_rank_one};
use kptau::sampling::Sampler;
use kptau::schur::{annihilation_residual, schur_expansion};
use kptau::tau::{
    gk_gauge_relation, m_big_cell, sylvester_solve_a, tau_general, tau_geometric, tau_origin,
    tau_w_bcd,
};
use kptau::{
    FlowVector, JordanSpec, Matrix, MiwaPoint, RankOneSystem, Scalar, C64, CDD, CQ,
};

// Pinned pass/fail thresholds, one per criterion.
const TOL_IDENTITY_FLOAT: f64 = 1e-10; // 1: intertwining identities, float backend
const TOL_LEMMA: f64 = 1e-12; //          2: construction lemmas + diagonal residue identity
const TOL_THREE_FORM: f64 = 1e-10; //     3: pairwise agreement of the three tau forms
const TOL_D_INDEPENDENCE: f64 = 1e-9; //  4: spread of the ratio across flow points
const TOL_CAUCHY_BINET: f64 = 1e-11; //   5: determinant vs. exponential-sum soliton tau
const TOL_SCHUR_SOLITON: f64 = 1e-8; //   6: truncated expansion at weight 12, |t_i| <= 0.1
const TOL_PLUCKER: f64 = 1e-9; //         7: four-point relation and wedge factorization
const TOL_GAUGE: f64 = 1e-10; //          8: big-cell factorization and gauge relation
const TOL_ANNIHILATION: f64 = 1e-12; //   9: vanishing moments of the big-cell kernel
const TOL_KP: f64 = 1e-5; //             10: bilinear residual at the pinned step
const KP_STEP: f64 = 1e-3;
const KP_RATIO_WINDOW: (f64, f64) = (3.5, 4.5); // halving ratio for a second-order stencil

/// Print the one-line verdict, then enforce it.
fn report(index: usize, label: &str, pass: bool, detail: &str) {
    println!(
        "criterion {:02} {} — {} ({})",
        index,
        if pass { "PASS" } else { "FAIL" },
        label,
        detail
    );
    assert!(pass, "criterion {:02} {} failed: {}", index, label, detail);
}

fn q(n: i64, d: i64) -> CQ {
    CQ::from_ratio(n, d)
}

fn cf(re: f64, im: f64) -> C64 {
    C64::from_re_im(re, im)
}

fn rel<S: Scalar>(a: &S, b: &S) -> f64 {
    let diff = (a.clone() - b.clone()).modulus();
    diff / a.modulus().max(b.modulus()).max(1e-300)
}

/// A random Jordan spec whose eigenvalues are all nonzero, so it is
/// disjoint from any nilpotent spec.
fn nonzero_spec<S: Scalar>(s: &mut Sampler, dim: usize, max_block: usize) -> JordanSpec<S> {
    loop {
        let spec: JordanSpec<S> = s.jordan_spec(dim, max_block);
        if spec.eigenvalues().iter().all(|e| e.modulus() > 0.0) {
            return spec;
        }
    }
}

/// An intertwined system with nilpotent left spec: polynomial flows, so the
/// exact backend evaluates everything without transcendental input.
fn exact_system(s: &mut Sampler, n: usize, big_n: usize) -> RankOneSystem<CQ> {
    let bspec: JordanSpec<CQ> = nonzero_spec(s, big_n, 2);
    let dspec = JordanSpec::<CQ>::nilpotent(n);
    let f: Vec<CQ> = (0..n).map(|_| s.nonzero_rational(3, 2)).collect();
    let g: Vec<CQ> = (0..big_n).map(|_| s.nonzero_rational(3, 2)).collect();
    let a = sylvester_solve_a(&f, &g, &bspec, &dspec).unwrap();
    let c = s.full_rank_matrix(n, big_n);
    let fm = s.full_rank_matrix(n, n);
    RankOneSystem::new(a, bspec, c, dspec, fm, f, g).unwrap()
}

/// A disjoint spec pair with eigenvalues of modulus at most sqrt(2), one
/// size-2 block per spec where the dimension allows.  Flow-dependent
/// checks need spectra at this scale: eigenvalue powers feed exponentials,
/// and the determinant forms lose their shared digits once those factors
/// dwarf the data.
fn modest_disjoint_specs(
    s: &mut Sampler,
    big_n: usize,
    n: usize,
) -> (JordanSpec<C64>, JordanSpec<C64>) {
    let eigs: Vec<C64> = s.distinct_complex(big_n + n, 1, 2);
    let spec = |eigs: &[C64], dim: usize| {
        let mut pairs = Vec::new();
        let mut used = 0usize;
        let mut i = 0usize;
        while used < dim {
            let size = if used == 0 && dim >= 2 { 2 } else { 1 };
            pairs.push((eigs[i].clone(), size));
            used += size;
            i += 1;
        }
        JordanSpec::from_pairs(pairs).unwrap()
    };
    let b = spec(&eigs[..big_n], big_n);
    let d = spec(&eigs[big_n..], n);
    (b, d)
}

/// An intertwined float system on modest spectra, square C-pairing.
fn modest_system(s: &mut Sampler, n: usize, big_n: usize) -> RankOneSystem<C64> {
    let (bspec, dspec) = modest_disjoint_specs(s, big_n, n);
    let f: Vec<C64> = (0..n).map(|_| s.nonzero_rational(3, 2)).collect();
    let g: Vec<C64> = (0..big_n).map(|_| s.nonzero_rational(3, 2)).collect();
    let a = sylvester_solve_a(&f, &g, &bspec, &dspec).unwrap();
    let c = s.full_rank_matrix(n, big_n);
    let fm = s.full_rank_matrix(n, n);
    RankOneSystem::new(a, bspec, c, dspec, fm, f, g).unwrap()
}

/// Four distinct shift points that avoid zero and the spectrum of `D`.
fn shift_points<S: Scalar>(s: &mut Sampler, dspec: &JordanSpec<S>) -> Vec<MiwaPoint<S>> {
    let eigs = dspec.eigenvalues();
    loop {
        let zs: Vec<S> = s.distinct_complex(4, 3, 2);
        let ok = zs.iter().all(|z| {
            z.modulus() > 1e-6 && eigs.iter().all(|e| (z.clone() - e.clone()).modulus() > 1e-3)
        });
        if ok {
            return zs.into_iter().map(|z| MiwaPoint::new(z).unwrap()).collect();
        }
    }
}

/// The five floating-point demonstration systems, one per family.
fn float_family_systems() -> Vec<(&'static str, RankOneSystem<C64>)> {
    let rational = rational_family::<C64>(
        2,
        2,
        Matrix::from_rows(vec![
            vec![cf(1.0, 0.0), cf(0.5, 0.0), cf(-0.25, 0.0), cf(1.0, 0.0)],
            vec![cf(0.0, 0.0), cf(1.0, 0.0), cf(0.25, 0.0), cf(-0.5, 0.0)],
        ]),
    )
    .unwrap();
    let soliton = soliton_family::<C64>(
        &[cf(-0.6, 0.0), cf(-0.2, 0.0), cf(0.3, 0.0), cf(0.55, 0.0)],
        Matrix::from_rows(vec![
            vec![cf(1.0, 0.0), cf(1.0, 0.0), cf(1.0, 0.0), cf(1.0, 0.0)],
            vec![cf(0.25, 0.0), cf(0.5, 0.0), cf(1.0, 0.0), cf(2.0, 0.0)],
        ]),
    )
    .unwrap();
    let cauchy = cauchy_family::<C64>(
        &[cf(0.5, 0.0), cf(-0.3, 0.0), cf(0.2, 0.0)],
        &[cf(2.0, 0.0), cf(3.0, 0.0)],
        Matrix::from_rows(vec![
            vec![cf(1.0, 0.0), cf(1.0, 0.0), cf(0.5, 0.0)],
            vec![cf(0.5, 0.0), cf(1.0, 0.0), cf(1.0, 0.0)],
        ]),
    )
    .unwrap();
    let pole = calogero_moser_family::<C64>(
        &[cf(0.4, 0.3), cf(-0.4, -0.3)],
        &[cf(1.0, 0.0), cf(1.0, 0.0)],
    )
    .unwrap();
    let jordan = generic_jordan_family::<C64>(
        JordanSpec::from_pairs(vec![(cf(0.5, 0.0), 2), (cf(-0.25, 0.1), 1)]).unwrap(),
        JordanSpec::from_pairs(vec![(cf(-1.0, 0.0), 1), (cf(2.0, 0.0), 1)]).unwrap(),
        Matrix::from_rows(vec![
            vec![cf(1.0, 0.0), cf(0.0, 0.0), cf(1.0, 0.0)],
            vec![cf(0.0, 0.0), cf(1.0, 0.0), cf(1.0, 0.0)],
        ]),
        Matrix::identity(2),
    )
    .unwrap();
    vec![
        ("rational", rational),
        ("soliton", soliton),
        ("cauchy", cauchy),
        ("pole", pole),
        ("jordan", jordan),
    ]
}

/// Criterion 1 — the shift-form, resolvent-form, product-form, and
/// system-data intertwining identities hold on at least fifty random
/// admissible spec pairs: exactly on the rational backend, to 1e-10 on the
/// float backend.  The rank of the compressed product never exceeds one.
#[test]
fn criterion_01_intertwining_identities_hold_for_random_systems() {
    let mut s = Sampler::new(101);
    let dims = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (2, 5), (1, 4)];

    let mut exact_worst = 0.0_f64;
    let mut rank_ok = true;
    for i in 0..25 {
        let (n, big_n) = dims[i % dims.len()];
        let sys = exact_system(&mut s, n, big_n);
        let rep = verify_rank_one(&sys, TOL_IDENTITY_FLOAT).unwrap();
        exact_worst = exact_worst.max(rep.worst());
        rank_ok &= rep.product_rank <= 1;
        assert!(rep.a0_identity.is_some() && rep.abd_identity.is_some());
    }

    let mut float_worst = 0.0_f64;
    for i in 0..30 {
        let (n, big_n) = dims[i % dims.len()];
        let l = 1 + i % 3;
        let sys: RankOneSystem<C64> = s.general_system(n, big_n, l).unwrap();
        let rep = verify_rank_one(&sys, TOL_IDENTITY_FLOAT).unwrap();
        float_worst = float_worst.max(rep.worst());
        rank_ok &= rep.product_rank <= 1;
    }

    let pass = exact_worst == 0.0 && float_worst <= TOL_IDENTITY_FLOAT && rank_ok;
    report(
        1,
        "intertwining identities on 55 random systems",
        pass,
        &format!(
            "exact worst {:.1e} (want 0), float worst {:.1e} <= {:.0e}, product rank <= 1: {}",
            exact_worst, float_worst, TOL_IDENTITY_FLOAT, rank_ok
        ),
    );
}

/// Criterion 2 — the two construction lemmas (product form equals the
/// residue form after multiplying by the characteristic polynomial; the
/// triangular change of basis carries the product form to the shift form)
/// hold to 1e-12, exactly on the rational backend, and the residue identity
/// for diagonal data holds to the same tolerance.
#[test]
fn criterion_02_construction_lemmas_and_diagonal_residue_identity() {
    let mut s = Sampler::new(202);

    let mut exact_worst = 0.0_f64;
    for i in 0..10 {
        let big_n = 2 + i % 4;
        let n = 1 + i % 3;
        let b: JordanSpec<CQ> = nonzero_spec(&mut s, big_n, 2);
        let d = JordanSpec::<CQ>::nilpotent(n);
        let rep = lemma_identities(&b, &d).unwrap();
        exact_worst = exact_worst.max(rep.worst());
    }

    let mut float_worst = 0.0_f64;
    for i in 0..15 {
        let big_n = 2 + i % 4;
        let n = 1 + i % 3;
        let (b, d): (JordanSpec<C64>, JordanSpec<C64>) = s.disjoint_specs(big_n, n, 2);
        let rep = lemma_identities(&b, &d).unwrap();
        float_worst = float_worst.max(rep.worst());
    }

    let mut kar_exact = 0.0_f64;
    let mut kar_float = 0.0_f64;
    for i in 0..10 {
        let big_n = 2 + i % 4;
        let n = 1 + i % 3;
        let all: Vec<CQ> = s.distinct_complex(big_n + n, 5, 3);
        kar_exact = kar_exact.max(kar_identity_check(&all[..big_n], &all[big_n..]).unwrap());
        let all: Vec<C64> = s.distinct_complex(big_n + n, 5, 3);
        kar_float = kar_float.max(kar_identity_check(&all[..big_n], &all[big_n..]).unwrap());
    }

    let pass = exact_worst == 0.0
        && kar_exact == 0.0
        && float_worst <= TOL_LEMMA
        && kar_float <= TOL_LEMMA;
    report(
        2,
        "construction lemmas and residue identity",
        pass,
        &format!(
            "exact worst {:.1e} (want 0), float lemmas {:.1e}, float residue identity {:.1e}, tol {:.0e}",
            exact_worst.max(kar_exact),
            float_worst,
            kar_float,
            TOL_LEMMA
        ),
    );
}

/// Criterion 3 — the product-form, resolvent-form, and shift-form tau
/// functions of the same (B, C, D) data agree pairwise to 1e-10 at five
/// random flow points per configuration (and exactly at t = 0 on the
/// rational backend, where no exponentials enter).
#[test]
fn criterion_03_three_tau_forms_agree() {
    let mut s = Sampler::new(303);
    let dims = [(1, 2), (2, 3), (2, 4), (3, 4), (1, 3), (3, 5), (2, 5), (1, 4)];

    let mut exact_worst = 0.0_f64;
    for &(n, big_n) in dims.iter().take(3) {
        let (b, d): (JordanSpec<CQ>, JordanSpec<CQ>) = s.disjoint_specs(big_n, n, 2);
        let c: Matrix<CQ> = s.full_rank_matrix(n, big_n);
        let t0 = FlowVector::new(vec![CQ::from_i64(0); 3]);
        match tau_w_bcd(&b, &c, &d, &t0) {
            Ok(forms) => exact_worst = exact_worst.max(forms.max_rel_disagreement()),
            Err(kptau::Error::DegenerateK) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        }
    }

    let mut float_worst = 0.0_f64;
    let mut configs = 0usize;
    'outer: while configs < 8 {
        let (n, big_n) = dims[configs % dims.len()];
        let (b, d) = modest_disjoint_specs(&mut s, big_n, n);
        let c: Matrix<C64> = s.full_rank_matrix(n, big_n);
        let mut config_worst = 0.0_f64;
        for _ in 0..5 {
            let t: FlowVector<C64> = s.complex_flow(3, 1, 4);
            match tau_w_bcd(&b, &c, &d, &t) {
                Ok(forms) => config_worst = config_worst.max(forms.max_rel_disagreement()),
                Err(kptau::Error::DegenerateK) => continue 'outer, // resample the spec pair
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        float_worst = float_worst.max(config_worst);
        configs += 1;
    }

    let pass = exact_worst == 0.0 && float_worst <= TOL_THREE_FORM;
    report(
        3,
        "three tau constructions agree pairwise",
        pass,
        &format!(
            "exact worst at t=0 {:.1e} (want 0), float worst over 8 configs x 5 flow points {:.1e} <= {:.0e}",
            exact_worst, float_worst, TOL_THREE_FORM
        ),
    );
}

/// Criterion 4 — replacing the auxiliary right spec changes the tau
/// function only by a constant factor: the ratio of the two tau values is
/// flat across five random flow points to 1e-9.
#[test]
fn criterion_04_tau_is_independent_of_the_auxiliary_spec() {
    let mut s = Sampler::new(404);
    let dims = [(1, 2), (2, 3), (2, 4), (3, 4), (1, 3), (2, 5)];

    let mut worst_spread = 0.0_f64;
    let mut configs = 0usize;
    'outer: while configs < 6 {
        let (n, big_n) = dims[configs % dims.len()];
        let b: JordanSpec<C64> = s.jordan_spec(big_n, 2);
        let pick = |s: &mut Sampler, b: &JordanSpec<C64>| loop {
            let cand: JordanSpec<C64> = s.jordan_spec(n, 2);
            if cand.check_disjoint_from(b).is_ok() {
                return cand;
            }
        };
        let d1 = pick(&mut s, &b);
        let d2 = pick(&mut s, &b);
        let c: Matrix<C64> = s.full_rank_matrix(n, big_n);

        let mut ratios: Vec<C64> = Vec::new();
        for _ in 0..5 {
            let t: FlowVector<C64> = s.complex_flow(3, 1, 4);
            let first = match tau_w_bcd(&b, &c, &d1, &t) {
                Ok(f) => f.via_abd,
                Err(_) => continue 'outer,
            };
            let second = match tau_w_bcd(&b, &c, &d2, &t) {
                Ok(f) => f.via_abd,
                Err(_) => continue 'outer,
            };
            if second.modulus() < 1e-12 {
                continue;
            }
            ratios.push(first / second);
        }
        if ratios.len() < 3 {
            continue;
        }
        let base = ratios[0].clone();
        let spread = ratios
            .iter()
            .map(|r| (r.clone() - base.clone()).modulus())
            .fold(0.0_f64, f64::max)
            / base.modulus().max(1e-300);
        worst_spread = worst_spread.max(spread);
        configs += 1;
    }

    let pass = worst_spread <= TOL_D_INDEPENDENCE;
    report(
        4,
        "tau depends on the auxiliary spec only through a constant",
        pass,
        &format!(
            "worst ratio spread over 6 configs x 5 flow points {:.1e} <= {:.0e}",
            worst_spread, TOL_D_INDEPENDENCE
        ),
    );
}

/// Criterion 5 — for every shape 1 <= n < N <= 6 the determinant form of
/// the multisoliton tau equals the expansion into exponential sums over
/// column subsets to 1e-11.
#[test]
fn criterion_05_soliton_determinant_matches_the_exponential_sum() {
    let mut s = Sampler::new(505);
    let mut worst = 0.0_f64;
    let mut shapes = 0usize;

    for big_n in 2..=6usize {
        for n in 1..big_n {
            let betas: Vec<C64> = loop {
                let cand: Vec<C64> = s.distinct_complex(big_n, 1, 2);
                if cand.iter().all(|b| b.modulus() > 1e-9) {
                    break cand;
                }
            };
            let c: Matrix<C64> = s.full_rank_matrix(n, big_n);
            let sys = soliton_family(&betas, c.clone()).unwrap();
            for _ in 0..3 {
                let t: FlowVector<C64> = s.complex_flow(4, 1, 3);
                let det_form = tau_general(&sys, &t).unwrap();
                let sum_form = soliton_tau_direct(&betas, &c, &t).unwrap();
                worst = worst.max(rel(&det_form, &sum_form));
            }
            shapes += 1;
        }
    }

    let pass = worst <= TOL_CAUCHY_BINET && shapes == 15;
    report(
        5,
        "soliton determinant equals the exponential sum",
        pass,
        &format!(
            "worst relative difference over {} shapes x 3 flow points {:.1e} <= {:.0e}",
            shapes, worst, TOL_CAUCHY_BINET
        ),
    );
}

/// Criterion 6 — the expansion of tau into Schur polynomials reproduces the
/// tau function: exactly for the polynomial families (the coefficient box
/// is finite), and to 1e-8 at weight 12 for solitons with spectral radius
/// at most 0.6 evaluated at |t_i| <= 0.1.
#[test]
fn criterion_06_schur_expansion_reproduces_tau() {
    let mut s = Sampler::new(606);

    let mut exact_ok = true;
    for &(n, k) in &[(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let (sys, expansion) = loop {
            let c: Matrix<CQ> = s.full_rank_matrix(n, n + k);
            let sys = rational_family(n, k, c).unwrap();
            match schur_expansion(&sys, n * k) {
                Ok(e) => break (sys, e),
                Err(kptau::Error::SingularAtOrigin) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            }
        };
        for _ in 0..3 {
            let t: FlowVector<CQ> = s.flow(4, 2, 3);
            exact_ok &= expansion.evaluate(&t) == tau_general(&sys, &t).unwrap();
        }
    }

    let fixtures: Vec<(Vec<C64>, Matrix<C64>)> = vec![
        (
            vec![cf(-0.4, 0.0), cf(0.55, 0.0)],
            Matrix::from_rows(vec![vec![cf(1.0, 0.0), cf(2.0, 0.0)]]),
        ),
        (
            vec![cf(-0.5, 0.0), cf(-0.15, 0.0), cf(0.3, 0.0), cf(0.55, 0.0)],
            Matrix::from_rows(vec![
                vec![cf(1.0, 0.0), cf(1.0, 0.0), cf(1.0, 0.0), cf(1.0, 0.0)],
                vec![cf(0.25, 0.0), cf(0.5, 0.0), cf(1.0, 0.0), cf(2.0, 0.0)],
            ]),
        ),
    ];
    let mut float_worst = 0.0_f64;
    for (betas, c) in fixtures {
        let sys = soliton_family(&betas, c).unwrap();
        let expansion = schur_expansion(&sys, 12).unwrap();
        for _ in 0..4 {
            let t = FlowVector::new(
                (0..3)
                    .map(|_| s.complex::<C64>(1, 2) * cf(0.07, 0.0))
                    .collect(),
            );
            let truncated = expansion.evaluate(&t);
            let full = tau_general(&sys, &t).unwrap();
            float_worst = float_worst.max(rel(&truncated, &full));
        }
    }

    let pass = exact_ok && float_worst <= TOL_SCHUR_SOLITON;
    report(
        6,
        "Schur expansion reproduces tau",
        pass,
        &format!(
            "polynomial families exact: {}, soliton truncation at weight 12 {:.1e} <= {:.0e}",
            exact_ok, float_worst, TOL_SCHUR_SOLITON
        ),
    );
}

/// Criterion 7 — the four-point combination of shifted tau products
/// vanishes: exactly on the rational backend for the polynomial family,
/// and to 1e-9 over at least one hundred random shift/flow samples per
/// family on the float backend, where the two-factor wedge structure of
/// the shift matrix holds to the same tolerance wherever tau is nonzero.
#[test]
fn criterion_07_four_point_relation_and_wedge_structure() {
    let mut s = Sampler::new(707);

    let mut exact_ok = true;
    for &(n, k) in &[(1usize, 1usize), (2, 2)] {
        let c: Matrix<CQ> = s.full_rank_matrix(n, n + k);
        let sys = rational_family(n, k, c).unwrap();
        let points: Vec<MiwaPoint<CQ>> = [q(2, 1), q(3, 1), q(-2, 1), q(5, 2)]
            .into_iter()
            .map(|z| MiwaPoint::new(z).unwrap())
            .collect();
        for t in [FlowVector::new(vec![CQ::from_i64(0); 3]), s.flow(3, 1, 2)] {
            let xi = xi_matrix(&sys, &points, &t).unwrap();
            exact_ok &= plucker_combination(&xi).unwrap() == CQ::from_i64(0);
        }
    }

    let mut float_worst = 0.0_f64;
    let mut wedge_worst = 0.0_f64;
    let mut counts: Vec<usize> = Vec::new();
    for (_, sys) in float_family_systems() {
        let mut valid = 0usize;
        let mut attempts = 0usize;
        while valid < 100 && attempts < 500 {
            attempts += 1;
            let points = shift_points(&mut s, &sys.dspec);
            let t: FlowVector<C64> = s.complex_flow(3, 1, 4);
            if tau_general(&sys, &t).unwrap().modulus() < 1e-8 {
                continue; // tau vanishes here; the wedge factors are undefined
            }
            let xi = match xi_matrix(&sys, &points, &t) {
                Ok(x) => x,
                Err(_) => continue,
            };
            float_worst = float_worst.max(plucker_relation_residual(&xi).unwrap());
            wedge_worst = wedge_worst.max(xi_rank2_check(&sys, &points, &t).unwrap());
            valid += 1;
        }
        counts.push(valid);
    }

    let enough = counts.iter().all(|&c| c >= 100);
    let pass = exact_ok && enough && float_worst <= TOL_PLUCKER && wedge_worst <= TOL_PLUCKER;
    report(
        7,
        "four-point relation and wedge factorization",
        pass,
        &format!(
            "exact zero: {}, samples per family {:?}, relation {:.1e} and wedge {:.1e} <= {:.0e}",
            exact_ok, counts, float_worst, wedge_worst, TOL_PLUCKER
        ),
    );
}

/// Criterion 8 — tau factors through the big cell: the origin determinant
/// times the normalized two-block form reproduces the general tau to
/// 1e-10, the two block readings agree, and the trace-gauge relation
/// between the geometric and general normalizations holds to the same
/// tolerance.
#[test]
fn criterion_08_big_cell_factorization_and_gauge_relation() {
    let mut s = Sampler::new(808);
    let dims = [(1, 2), (2, 3), (2, 4), (3, 4), (1, 3), (3, 5)];

    let mut worst_factor = 0.0_f64;
    let mut worst_agreement = 0.0_f64;
    let mut worst_gauge = 0.0_f64;
    let mut configs = 0usize;
    while configs < 12 {
        let (n, big_n) = dims[configs % dims.len()];
        let sys = modest_system(&mut s, n, big_n);
        let origin = tau_origin(&sys).unwrap();
        if origin.modulus() < 1e-6 {
            continue; // stay inside the big cell
        }
        let m = m_big_cell(&sys).unwrap();
        for _ in 0..3 {
            let t: FlowVector<C64> = s.complex_flow(3, 1, 4);
            let geo = tau_geometric(&sys.f, &sys.g, &sys.bspec, &sys.dspec, &m, &t).unwrap();
            let lhs = origin.clone() * geo.value().clone();
            let rhs = tau_general(&sys, &t).unwrap();
            worst_factor = worst_factor.max(rel(&lhs, &rhs));
            worst_agreement = worst_agreement.max(geo.agreement());
            worst_gauge = worst_gauge.max(gk_gauge_relation(&sys, &t).unwrap());
        }
        configs += 1;
    }

    let worst = worst_factor.max(worst_agreement).max(worst_gauge);
    let pass = worst <= TOL_GAUGE;
    report(
        8,
        "big-cell factorization and gauge relation",
        pass,
        &format!(
            "factorization {:.1e}, block agreement {:.1e}, gauge relation {:.1e} <= {:.0e}",
            worst_factor, worst_agreement, worst_gauge, TOL_GAUGE
        ),
    );
}

/// Criterion 9 — the annihilation identities: the big-cell kernel
/// sandwiched between powers of B on the left and the characteristic
/// polynomial of D on the right kills the rank-one vectors for all
/// moments up to twice the system size — exactly on the rational backend,
/// to 1e-12 on the float backend.
#[test]
fn criterion_09_annihilation_identities() {
    let mut s = Sampler::new(909);

    let mut exact_worst = 0.0_f64;
    let mut produced = 0usize;
    while produced < 8 {
        let dims = [(1, 2), (2, 3), (2, 4), (1, 3)];
        let (n, big_n) = dims[produced % dims.len()];
        let sys = exact_system(&mut s, n, big_n);
        match annihilation_residual(&sys) {
            Ok(r) => {
                exact_worst = exact_worst.max(r);
                produced += 1;
            }
            Err(kptau::Error::Singular(_)) => continue, // origin outside the big cell
            Err(e) => panic!("unexpected error: {e}"),
        }
    }

    let mut float_worst = 0.0_f64;
    for (_, sys) in float_family_systems() {
        float_worst = float_worst.max(annihilation_residual(&sys).unwrap());
    }
    let mut produced = 0usize;
    while produced < 6 {
        let dims = [(1, 2), (2, 3), (2, 4), (3, 4)];
        let (n, big_n) = dims[produced % dims.len()];
        let sys: RankOneSystem<C64> = s.general_system(n, big_n, n).unwrap();
        match annihilation_residual(&sys) {
            Ok(r) => {
                float_worst = float_worst.max(r);
                produced += 1;
            }
            Err(kptau::Error::Singular(_)) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        }
    }

    let pass = exact_worst == 0.0 && float_worst <= TOL_ANNIHILATION;
    report(
        9,
        "annihilation identities for the big-cell kernel",
        pass,
        &format!(
            "exact worst {:.1e} (want 0), float worst {:.1e} <= {:.0e}",
            exact_worst, float_worst, TOL_ANNIHILATION
        ),
    );
}

/// Criterion 10 — the first bilinear KP residual, measured with
/// second-order central differences at step 1e-3, stays below 1e-5 and
/// quarters when the step halves, for a polynomial family on the exact
/// backend and for a soliton on the extended-precision float backend.
#[test]
fn criterion_10_kp_bilinear_equation_to_second_order() {
    let c: Matrix<CQ> = Matrix::from_rows(vec![
        vec![q(1, 1), q(1, 2), q(-1, 4), q(1, 1)],
        vec![q(0, 1), q(1, 1), q(1, 4), q(-1, 2)],
    ]);
    let rational = rational_family(2, 2, c).unwrap();
    let t0 = FlowVector::new(vec![q(3, 10), q(1, 5), q(1, 10)]);
    let (r_coarse, _, r_ratio) = kp_halving(&rational, &t0, KP_STEP).unwrap();

    let betas = [CDD::from_ratio(1, 2), CDD::from_ratio(-1, 2)];
    let ones = Matrix::from_rows(vec![vec![CDD::from_i64(1), CDD::from_i64(1)]]);
    let soliton = soliton_family(&betas, ones).unwrap();
    let s0 = FlowVector::new(vec![
        CDD::from_re_im(0.3, 0.0),
        CDD::from_re_im(0.2, 0.0),
        CDD::from_re_im(0.1, 0.0),
    ]);
    let (s_coarse, _, s_ratio) = kp_halving(&soliton, &s0, KP_STEP).unwrap();

    let in_window = |r: f64| r >= KP_RATIO_WINDOW.0 && r <= KP_RATIO_WINDOW.1;
    let pass =
        r_coarse <= TOL_KP && s_coarse <= TOL_KP && in_window(r_ratio) && in_window(s_ratio);
    report(
        10,
        "KP bilinear residual is second-order small",
        pass,
        &format!(
            "rational {:.2e} (ratio {:.2}), soliton {:.2e} (ratio {:.2}), tol {:.0e}, window [{}, {}]",
            r_coarse, r_ratio, s_coarse, s_ratio, TOL_KP, KP_RATIO_WINDOW.0, KP_RATIO_WINDOW.1
        ),
    );
}

/// Criterion 11 — corrupting one entry of A by 1e-3 breaks the
/// intertwining identities by a detectable margin, and the command-line
/// verifier exits nonzero on the same corruption.
#[test]
fn criterion_11_corrupted_data_is_detected() {
    let mut sys = cauchy_family::<C64>(
        &[cf(0.5, 0.0), cf(-0.3, 0.0), cf(0.2, 0.0)],
        &[cf(2.0, 0.0), cf(3.0, 0.0)],
        Matrix::from_rows(vec![
            vec![cf(1.0, 0.0), cf(1.0, 0.0), cf(0.5, 0.0)],
            vec![cf(0.5, 0.0), cf(1.0, 0.0), cf(1.0, 0.0)],
        ]),
    )
    .unwrap();
    let clean = verify_rank_one(&sys, TOL_IDENTITY_FLOAT).unwrap().worst();
    sys.a[(0, 0)] = sys.a[(0, 0)].clone() + cf(1e-3, 0.0);
    let corrupted = verify_rank_one(&sys, TOL_IDENTITY_FLOAT).unwrap().worst();

    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/cauchy.json")
        .canonicalize()
        .unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_kptau"))
        .args([
            "verify",
            config.to_str().unwrap(),
            "--fuzz",
            "1e-3",
            "--samples",
            "6",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    let exit = output.status.code();

    let pass = clean <= TOL_IDENTITY_FLOAT && corrupted > TOL_IDENTITY_FLOAT && exit == Some(1);
    report(
        11,
        "corrupted data fails the identity checks and the CLI verifier",
        pass,
        &format!(
            "clean residual {:.1e}, corrupted residual {:.1e} > {:.0e}, verifier exit code {:?}",
            clean, corrupted, TOL_IDENTITY_FLOAT, exit
        ),
    );
}
