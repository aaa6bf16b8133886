//! Independent oracles for the worked examples: quadrature for the exponential
//! derivative, Monte-Carlo moments for Haar sampling, closed-form loops and
//! the explicit shortcut on St(3, 2).

mod common;

use std::f64::consts::{PI, SQRT_2};

use common::{dexp_quadrature, gauss_legendre, skew_with_norm};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stiefel_inj::certificate::trial_rng;
use stiefel_inj::stiefel::identity_frame;
use stiefel_inj::{
    curve_length, dexpm, exp_stiefel, expm_skew, fiber_element, haar_rotation, horizontal_lift,
    lemma_blocks, metric_inner, solve_t_root, BetaParam, HorizontalLift, LemmaKind, LogPolicy,
    SkewMatrix, TangentAH,
};

fn block_generator(m: usize, t: f64) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        s[(i, m + i)] = -t;
        s[(m + i, i)] = t;
    }
    s
}

fn d2() -> DMatrix<f64> {
    SkewMatrix::generator(2, 0, 1).into_inner()
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let rule = gauss_legendre(32);
    let total: f64 = rule.iter().map(|(_, w)| w).sum();
    assert!((total - 1.0).abs() < 1e-14);
    for k in [1, 7, 30, 63] {
        let q: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
        assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
    }
}

#[test]
fn dexpm_lemma41_example() {
    let d = d2();
    for (t, w) in [(0.7, 0.3), (2.0, -1.1), (PI, 0.0), (4.0, 2.5)] {
        let s = block_generator(2, t);
        let mut e = DMatrix::zeros(4, 4);
        e.view_mut((0, 0), (2, 2)).copy_from(&(&d * -w));
        e.view_mut((0, 2), (2, 2)).copy_from(&d);
        e.view_mut((2, 0), (2, 2)).copy_from(&d);
        let r = dexpm(
            &SkewMatrix::new(s).unwrap(),
            &SkewMatrix::new(e).unwrap(),
        )
        .unwrap();
        let top = -(w / 2.0) * (t.sin() / t + t.cos());
        let bottom = 0.5 * (-w + 2.0 / t) * t.sin();
        assert!((r.derivative.view((0, 0), (2, 2)) - &d * top).norm() < 1e-13);
        assert!((r.derivative.view((2, 0), (2, 2)) - &d * bottom).norm() < 1e-13);
    }
}

#[test]
fn dexpm_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for norm in [0.5, 3.0, 7.0, 10.0] {
        for dim in [3, 6] {
            let s = skew_with_norm(dim, norm, &mut rng);
            let e = skew_with_norm(dim, 1.0, &mut rng);
            let q = dexp_quadrature(s.as_matrix(), e.as_matrix());
            let d = dexpm(&s, &e).unwrap();
            assert!((d.derivative - q).norm() <= 1e-10, "norm {norm} dim {dim}");
            assert!(
                (d.value.transpose() * &d.value - DMatrix::<f64>::identity(dim, dim)).norm()
                    <= 1e-12
            );
        }
    }
}

#[test]
fn lemma_blocks_match_quadrature() {
    let d = d2();
    let omega = block_generator(2, 1.0);
    for (t, w, alpha) in [(0.9, 0.4, 0.3), (2.2, -0.7, -0.2), (3.7, 1.3, 1.5)] {
        let mut ob = DMatrix::zeros(4, 4);
        ob.view_mut((0, 0), (2, 2)).copy_from(&(&d * -w));
        ob.view_mut((0, 2), (2, 2)).copy_from(&d);
        ob.view_mut((2, 0), (2, 2)).copy_from(&d);
        let first = dexp_quadrature(&(&omega * t), &ob).columns(0, 2).into_owned();
        let e_cols = expm_skew(&SkewMatrix::project(&(&omega * t)))
            .unwrap()
            .as_matrix()
            .columns(0, 2)
            .into_owned();
        let dm = SkewMatrix::new(d.clone()).unwrap();

        let (top, bot) = lemma_blocks(LemmaKind::L41, t, w, alpha, &dm).unwrap();
        assert!((first.rows(0, 2) - top).norm() < 1e-10);
        assert!((first.rows(2, 2) - bot).norm() < 1e-10);

        let with_psi = &first - &e_cols * (&d * (alpha * w));
        let (top, bot) = lemma_blocks(LemmaKind::L42, t, w, alpha, &dm).unwrap();
        assert!((with_psi.rows(0, 2) - top).norm() < 1e-10);
        assert!((with_psi.rows(2, 2) - bot).norm() < 1e-10);
    }
}

#[test]
fn haar_trace_mean_on_so3() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples = 100_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..samples {
        let tr = haar_rotation(3, &mut rng).as_matrix().trace();
        sum += tr;
        sq += tr * tr;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = sq / nf - mean * mean;
    assert!(mean.abs() <= 3.0 * (var / nf).sqrt(), "mean {mean}");
    // E[tr Q²] on SO(3) is 1.
    assert!((var - 1.0).abs() < 0.03, "var {var}");
}

#[test]
fn loops_close_in_unit_time() {
    for beta in [0.2, 0.5, 1.0, 1.7] {
        let mp = BetaParam::new(beta).unwrap();
        for (n, p) in [(4, 2), (5, 3), (6, 2)] {
            let a = SkewMatrix::generator(p, 0, 1).scale(2.0 * PI);
            let u = TangentAH::at_base(a, DMatrix::zeros(n - p, p)).unwrap();
            let x = exp_stiefel(&mp, &u, 1.0).unwrap();
            assert!((x.as_matrix() - identity_frame(n, p)).norm() <= 1e-10);
            let len = metric_inner(&mp, &u, &u).unwrap().sqrt();
            assert!((len - (2.0 * beta).sqrt() * 2.0 * PI).abs() < 1e-12);
            let lift_len = curve_length(&mp, &horizontal_lift(&mp, &u)).unwrap();
            assert!((lift_len - len).abs() < 1e-12);

            let mut h = DMatrix::zeros(n - p, p);
            h[(n - p - 1, 0)] = 2.0 * PI;
            let u = TangentAH::at_base(SkewMatrix::zeros(p), h).unwrap();
            let x = exp_stiefel(&mp, &u, 1.0).unwrap();
            assert!((x.as_matrix() - identity_frame(n, p)).norm() <= 1e-10);
            assert!((metric_inner(&mp, &u, &u).unwrap().sqrt() - 2.0 * PI).abs() < 1e-12);
        }
    }
}

/// Explicit shortcut between the endpoints of a geodesic of length π√3 on
/// St(3, 2) at β = 3/2.
fn shortcut_xi2(beta: f64) -> HorizontalLift {
    let a = 2.0 * beta / (1.0 - 2.0 * beta);
    let b = (2.0 * (1.0 - beta * beta / ((1.0 - 2.0 * beta) * (1.0 - 2.0 * beta)))).sqrt();
    let omega = DMatrix::from_row_slice(3, 3, &[0.0, a, -b, -a, 0.0, -b, b, b, 0.0]) * PI;
    HorizontalLift {
        omega: SkewMatrix::new(omega).unwrap(),
        psi: Some(SkewMatrix::generator(2, 0, 1).scale(PI)),
        p: 2,
    }
}

#[test]
fn st32_every_fiber_log_has_length_rho() {
    let beta = 1.5;
    let mp = BetaParam::new(beta).unwrap();
    let a = SkewMatrix::generator(2, 0, 1).scale(1.0 / (2.0 * beta).sqrt());
    let u = TangentAH::at_base(a, DMatrix::zeros(1, 2)).unwrap();
    assert!((metric_inner(&mp, &u, &u).unwrap() - 1.0).abs() < 1e-15);
    let rho = PI * (2.0 * beta).sqrt();
    let end = exp_stiefel(&mp, &u, rho).unwrap();
    assert!((end.as_matrix() + identity_frame(3, 2)).norm() < 1e-12);
    for k in 0..200 {
        let mut rng = trial_rng(7, k);
        let g = fiber_element(&mp, &u, rho, &mut rng).unwrap();
        let l = curve_length(&mp, &g.log(LogPolicy::Canonical).unwrap()).unwrap();
        assert!((l - rho).abs() <= 1e-9, "draw {k}: {l}");
    }
}

#[test]
fn st32_explicit_shortcut() {
    let mp = BetaParam::new(1.5).unwrap();
    let xi2 = shortcut_xi2(1.5);
    let g = xi2.exp().unwrap();
    assert!((g.q.as_matrix() - DMatrix::<f64>::identity(3, 3)).norm() <= 1e-10);
    assert!((g.v.unwrap().as_matrix() + DMatrix::<f64>::identity(2, 2)).norm() <= 1e-10);
    let l = curve_length(&mp, &xi2).unwrap();
    assert!((l - PI * 2.5f64.sqrt()).abs() < 1e-12);
    assert!(l < PI * 3f64.sqrt());
}

#[test]
fn canonical_bound_constant_from_root() {
    let t = solve_t_root(0.5).unwrap();
    assert!((t * SQRT_2 / PI - 0.91326189159122).abs() < 1e-10);
}
