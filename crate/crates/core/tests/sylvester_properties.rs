//! Randomized certification of the commutation-equation solver: residuals,
//! certificate soundness, adjoint antisymmetry, a Kronecker-structured
//! linear-solve oracle, and the contour-integral cross-check.

mod common;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_hermitian, random_matrix};
use floq_core::linalg;
use floq_core::sylvester::{HermitianPair, InterlacingClass};

/// Draw a Hermitian pair with spectral distance at least `gap`; roughly half
/// of the draws are forced non-interlaced by shifting B upward.
fn random_pair_with_gap<R: Rng>(rng: &mut R, gap: f64) -> HermitianPair {
    loop {
        let dy = rng.gen_range(1..=5);
        let dx = rng.gen_range(1..=5);
        let a = random_hermitian(rng, dy);
        let mut b = random_hermitian(rng, dx);
        if rng.gen_bool(0.5) {
            // push Spec(B) above Spec(A)
            let ea = linalg::hermitian_eigenvalues(&a);
            let eb = linalg::hermitian_eigenvalues(&b);
            let shift = ea.last().unwrap() - eb.first().unwrap() + gap + rng.gen_range(0.0..2.0);
            for i in 0..dx {
                b[(i, i)] = b[(i, i)] + linalg::cr(shift);
            }
        }
        let pair = HermitianPair::new(a, b, 1e-12).unwrap();
        if pair.dist() >= gap {
            return pair;
        }
    }
}

#[test]
fn residual_and_certificate_500_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut interlaced_seen = 0;
    let mut non_interlaced_seen = 0;
    for trial in 0..500 {
        let pair = random_pair_with_gap(&mut rng, 0.1);
        let v = random_matrix(&mut rng, pair.dim_y(), pair.dim_x());
        let w = pair.solve(&v).unwrap();
        let scale = pair.eig_a().last().unwrap().abs().max(pair.eig_b().last().unwrap().abs())
            + linalg::spectral_norm(&w);
        let res = pair.residual(&w, &v);
        assert!(
            res <= 1e-10 * scale + 1e-12,
            "trial {trial}: residual {res:e} vs scale {scale:e}"
        );
        let (bound, class) = pair.certificate(&v).unwrap();
        let wn = linalg::spectral_norm(&w);
        assert!(
            wn <= bound * (1.0 + 1e-10),
            "trial {trial}: ‖W‖ = {wn:e} exceeds bound {bound:e} ({class:?})"
        );
        match class {
            InterlacingClass::Interlaced => interlaced_seen += 1,
            InterlacingClass::NonInterlaced => non_interlaced_seen += 1,
            InterlacingClass::Overlapping => unreachable!(),
        }
    }
    assert!(interlaced_seen > 50, "want both classes: {interlaced_seen}");
    assert!(non_interlaced_seen > 50);
}

#[test]
fn kronecker_linear_solve_oracle() {
    // vec(AW - WB) = (I ⊗ A - B^T ⊗ I) vec(W): solve the dense system and
    // compare. Column-major vec; the oracle is independent of the spectral
    // route.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let pair = random_pair_with_gap(&mut rng, 0.1);
        let (dy, dx) = (pair.dim_y(), pair.dim_x());
        let v = random_matrix(&mut rng, dy, dx);
        let w = pair.solve(&v).unwrap();
        let n = dy * dx;
        let mut sys = linalg::zeros(n, n);
        // Build the system column by column from the action on basis
        // matrices; vec index is (col*dy + row).
        for c in 0..dx {
            for r in 0..dy {
                let mut e = linalg::zeros(dy, dx);
                e[(r, c)] = linalg::cr(1.0);
                let img = pair.apply(&e);
                for cc in 0..dx {
                    for rr in 0..dy {
                        sys[(cc * dy + rr, c * dy + r)] = img[(rr, cc)];
                    }
                }
            }
        }
        let mut rhs = linalg::zeros(n, 1);
        for c in 0..dx {
            for r in 0..dy {
                rhs[(c * dy + r, 0)] = v[(r, c)];
            }
        }
        let x = linalg::solve(&sys, &rhs);
        let mut w_oracle = linalg::zeros(dy, dx);
        for c in 0..dx {
            for r in 0..dy {
                w_oracle[(r, c)] = x[(c * dy + r, 0)];
            }
        }
        let dev = linalg::max_abs(&(&w - &w_oracle));
        let scale = linalg::max_abs(&w).max(1.0);
        assert!(dev <= 1e-9 * scale, "oracle deviation {dev:e}");
    }
}

#[test]
fn adjoint_antisymmetry_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let pair = random_pair_with_gap(&mut rng, 0.1);
        let v = random_matrix(&mut rng, pair.dim_y(), pair.dim_x());
        let w = pair.solve(&v).unwrap();
        let rev = HermitianPair::new(pair.b_matrix(), pair.a_matrix(), 1e-12).unwrap();
        let w2 = rev.solve(&linalg::adjoint(&v)).unwrap();
        let dev = linalg::max_abs(&(linalg::adjoint(&w) + &w2));
        let scale = linalg::max_abs(&w).max(1e-30);
        assert!(dev <= 1e-10 * scale.max(1.0), "antisymmetry deviation {dev:e}");
    }
}

#[test]
fn contour_cross_check_50_noninterlaced() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    while checked < 50 {
        let pair = random_pair_with_gap(&mut rng, 0.1);
        if pair.classify() != InterlacingClass::NonInterlaced {
            continue;
        }
        let v = random_matrix(&mut rng, pair.dim_y(), pair.dim_x());
        let w = pair.solve(&v).unwrap();
        let wc = pair.solve_contour(&v, 512).unwrap();
        let dev = linalg::max_abs(&(&w - &wc));
        let scale = linalg::max_abs(&w).max(1.0);
        assert!(dev <= 1e-8 * scale, "contour deviation {dev:e} at case {checked}");
        checked += 1;
    }
}

#[test]
fn certificate_tight_in_scalar_case() {
    let a = Mat::from_fn(1, 1, |_, _| linalg::cr(0.0));
    let b = Mat::from_fn(1, 1, |_, _| linalg::cr(1.0));
    let v = Mat::from_fn(1, 1, |_, _| linalg::cr(1.0));
    let pair = HermitianPair::new(a, b, 1e-12).unwrap();
    let w = pair.solve(&v).unwrap();
    let (bound, _) = pair.certificate(&v).unwrap();
    assert!((linalg::spectral_norm(&w) - bound).abs() < 1e-14);
}
