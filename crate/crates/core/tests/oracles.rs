//! Independent recomputations of library outputs.

use recon_core::dual_picture;
use recon_core::erasure;
use recon_core::geometry;
use recon_core::linalg::{self, CMatrix, CVector, C64};
use recon_core::lr_horn::{lr_coefficient, lr_product, Partition};
use recon_core::rng;
use recon_core::system::reconstruct;
use recon_core::{Parameters, Weights};

fn params(k: &[usize], d: usize) -> Parameters {
    Parameters::new(k.to_vec(), d).unwrap()
}

#[test]
fn canonical_dual_is_the_pseudo_inverse_of_the_analysis_operator() {
    for (t, (k, d)) in [(vec![2, 1, 2], 3), (vec![1; 5], 2), (vec![3, 3], 4)].into_iter().enumerate() {
        let sys = geometry::random_system(&params(&k, d), 40 + t as u64).unwrap();
        let pinv = sys.analysis().pseudo_inverse(1e-12).unwrap();
        let synth = sys.canonical_dual().unwrap().synthesis();
        assert!(linalg::frobenius_norm(&(pinv - synth)) < 1e-10);
    }
}

#[test]
fn frame_bounds_bracket_rayleigh_quotients() {
    let sys = geometry::random_system(&params(&[2, 2, 1], 4), 3).unwrap();
    let b = sys.bounds().unwrap();
    let mut g = rng::stream(3, 1);
    for _ in 0..200 {
        let x: CVector = rng::complex_gaussian(&mut g, 4, 1).column(0).into_owned();
        // Σ ‖V_i x‖² computed block by block
        let energy: f64 = sys.blocks().iter().map(|v| (v * &x).norm_squared()).sum();
        let q = energy / x.norm_squared();
        assert!(q >= b.lower - 1e-12 && q <= b.upper + 1e-12);
    }
}

#[test]
fn duals_reconstruct_vectors() {
    let sys = geometry::random_system(&params(&[1, 2, 2], 3), 8).unwrap();
    let mut g = rng::stream(8, 2);
    for scale in [0.0, 0.3, 2.0] {
        let (w, _) = dual_picture::random_dual(&sys, &mut g, scale).unwrap();
        let x: CVector = rng::complex_gaussian(&mut g, 3, 1).column(0).into_owned();
        let mut y = CVector::zeros(3);
        for (wi, vi) in w.blocks().iter().zip(sys.blocks()) {
            y += wi.adjoint() * (vi * &x);
        }
        assert!((y - &x).norm() < 1e-10);
    }
    let x = CVector::from_element(3, C64::new(0.5, -1.0));
    assert!((reconstruct(&sys, &x).unwrap() - &x).norm() < 1e-10);
}

#[test]
fn erasure_against_direct_restriction() {
    let p = params(&[2, 1, 2, 1], 3);
    let w = Weights::new(vec![1.0, 0.7, 1.3, 0.9]).unwrap();
    let sys = geometry::random_projective(&p, &w, 12).unwrap();
    for j in 0..4 {
        let r = erasure::erase(&sys, &[j]).unwrap();
        let keep: Vec<CMatrix> = (0..4).filter(|&i| i != j).map(|i| sys.block(i).clone()).collect();
        let mut s = CMatrix::zeros(3, 3);
        for b in &keep {
            s += b.adjoint() * b;
        }
        // S_{V_J} = M_J S_V
        assert!(linalg::frobenius_norm(&(&s - &r.m_j * sys.frame_operator())) < 1e-10);
        let lmin = s.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.survives, lmin > 1e-8);
        if let Some(a) = r.exact_a {
            assert!((a - lmin).abs() < 1e-10);
        }
    }
}

#[test]
fn lr_small_values() {
    let p = |v: &[usize]| Partition::new(v.to_vec()).unwrap();
    assert_eq!(lr_coefficient(&p(&[2, 1]), &[p(&[1]), p(&[1]), p(&[1])]), 2);
    assert_eq!(lr_coefficient(&p(&[3, 2, 1]), &[p(&[2, 1]), p(&[2, 1])]), 2);
    // s_(1) s_(1) = s_(2) + s_(1,1)
    let prod = lr_product(&p(&[1]), &p(&[1]), None);
    assert_eq!(prod.len(), 2);
    assert!(prod.values().all(|&c| c == 1));
}
