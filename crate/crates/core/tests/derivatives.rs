//! Cost, derivatives and operators against dense and finite-difference
//! references.

mod common;

use common::*;
use stafshape::manifold::{project, retract, rgrad, rhess_vec};
use stafshape::model::{disturbance_power, sir, staf, NoiseLevel, C64};
use stafshape::quartic::{cost, egrad, ehess_vec, phi_adjoint_apply, phi_apply, PenaltyAnchor, PhiBin, QuarticObjective};
use stafshape::scenarios::p4_code;

#[test]
fn phi_matches_dense_matrix() {
    let mut g = rng(1);
    for k in [1, 2, 7, 16] {
        for r in 0..k {
            let v = unif(&mut g) - 0.5;
            let w = 0.1 + unif(&mut g);
            let bin = PhiBin::new(r, v, w, k).unwrap();
            let dense = dense_phi(k, r, v, w);
            let x = cvec(&mut g, k);
            let ours = phi_apply(&bin, &x).unwrap();
            let theirs = &dense * dvec(&x);
            let adj = phi_adjoint_apply(&bin, &x).unwrap();
            let adj_ref = dense.adjoint() * dvec(&x);
            let scale = norm(&x) * w.sqrt();
            assert!(diff_norm(&ours, theirs.as_slice()) <= 1e-12 * scale);
            assert!(diff_norm(&adj, adj_ref.as_slice()) <= 1e-12 * scale);
        }
    }
}

#[test]
fn cost_matches_dense_sum() {
    let mut g = rng(2);
    for _ in 0..20 {
        let map = random_map(&mut g, 9, 7, 6, true);
        let obj = QuarticObjective::from_map(&map).unwrap();
        let phis = dense_phis(&map);
        let x = cvec(&mut g, 9);
        let anchor_v = cvec(&mut g, 9);
        let anchor = PenaltyAnchor::new(1.7, anchor_v.clone()).unwrap();
        let a = cost(&x, &obj, None).unwrap();
        let b = dense_cost(&x, &phis, None);
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        let a = cost(&x, &obj, Some(&anchor)).unwrap();
        let b = dense_cost(&x, &phis, Some((1.7, &anchor_v)));
        assert!((a - b).abs() <= 1e-12 * b);
    }
}

#[test]
fn euclidean_gradient_and_hessian_match_finite_differences() {
    let mut g = rng(3);
    for _ in 0..20 {
        let map = random_map(&mut g, 8, 8, 5, true);
        let obj = QuarticObjective::from_map(&map).unwrap();
        let phis = dense_phis(&map);
        let v = cvec(&mut g, 8);
        let anchor = PenaltyAnchor::new(3.0, v.clone()).unwrap();
        let x = cvec(&mut g, 8);
        for (a, pen) in [(None, None), (Some(&anchor), Some((3.0, v.as_slice())))] {
            let grad = egrad(&x, &obj, a).unwrap();
            let fd = fd_gradient(|y| dense_cost(y, &phis, pen), &x, 1e-6);
            assert!(diff_norm(&grad, &fd) <= 1e-6 * norm(&grad), "gradient");

            let d = cvec(&mut g, 8);
            let hd = ehess_vec(&x, &d, &obj, a).unwrap();
            let eps = 1e-6;
            let gp = egrad(&axpy(&x, eps, &d), &obj, a).unwrap();
            let gm = egrad(&axpy(&x, -eps, &d), &obj, a).unwrap();
            let fd: Vec<C64> = gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * eps)).collect();
            assert!(diff_norm(&hd, &fd) <= 1e-5 * norm(&hd), "hessian");
        }
    }
}

#[test]
fn riemannian_derivatives_match_retraction_differences() {
    let mut g = rng(4);
    let eps = 1e-6;
    for _ in 0..20 {
        let map = random_map(&mut g, 8, 8, 5, false);
        let obj = QuarticObjective::from_map(&map).unwrap();
        let phis = dense_phis(&map);
        let s = unimodular(&mut g, 8);
        let t = project(&s, &cvec(&mut g, 8)).unwrap();
        let eg = egrad(s.as_slice(), &obj, None).unwrap();
        let rg = rgrad(&s, &eg).unwrap();
        let plus = retract(&s, &t.scaled(eps)).unwrap();
        let minus = retract(&s, &t.scaled(-eps)).unwrap();
        let fd = (dense_cost(plus.as_slice(), &phis, None) - dense_cost(minus.as_slice(), &phis, None)) / (2.0 * eps);
        let analytic = real_dot(rg.dir(), t.dir());
        assert!((fd - analytic).abs() <= 1e-5 * rg.norm() * t.norm());

        let hess = rhess_vec(&s, &eg, &ehess_vec(s.as_slice(), t.dir(), &obj, None).unwrap(), &t).unwrap();
        let grad_at = |c: &stafshape::Code| rgrad(c, &egrad(c.as_slice(), &obj, None).unwrap()).unwrap();
        let diff: Vec<C64> = grad_at(&plus)
            .dir()
            .iter()
            .zip(grad_at(&minus).dir())
            .map(|(p, m)| (p - m) / (2.0 * eps))
            .collect();
        let fd = project(&s, &diff).unwrap();
        assert!(diff_norm(hess.dir(), fd.dir()) <= 1e-4 * hess.norm().max(t.norm()));
    }
}

#[test]
fn staf_matches_dense_definition() {
    let s = p4_code(4).unwrap();
    let a = staf(&s, 2, 0.25).unwrap();
    let b = dense_staf(s.as_slice(), 2, 0.25);
    assert!((a - b).abs() <= 1e-14);
    // zero lag, zero Doppler is the code energy over its norm
    assert!((staf(&s, 0, 0.0).unwrap() - 4.0).abs() <= 1e-14);

    let mut g = rng(5);
    for _ in 0..20 {
        let s = unimodular(&mut g, 12);
        let r = below(&mut g, 12);
        let v = unif(&mut g) - 0.5;
        let a = staf(&s, r, v).unwrap();
        assert!((a - dense_staf(s.as_slice(), r, v)).abs() <= 1e-12 * 12.0);
    }
}

#[test]
fn scene_one_p4_sir_regression() {
    let map = stafshape::scenarios::scene_map(stafshape::scenarios::SceneId::Scene1, 50, 50).unwrap();
    let s = p4_code(50).unwrap();
    let energy: f64 = map
        .active_bins()
        .map(|b| 50.0 * dense_staf(s.as_slice(), b.r, doppler(b.h, 50)))
        .sum();
    let expected = 2500.0 / energy;
    let ours = sir(&s, &map).unwrap();
    assert!((ours - expected).abs() <= 1e-10 * expected);
    // frozen from the dense evaluation above
    assert!((10.0 * ours.log10() - (-2.5528)).abs() < 1e-3, "{}", 10.0 * ours.log10());
    let dist = disturbance_power(&s, &map, NoiseLevel::new(0.0).unwrap()).unwrap();
    assert!((dist - energy).abs() <= 1e-10 * energy);
}
