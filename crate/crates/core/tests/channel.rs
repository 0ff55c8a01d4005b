mod common;

use cogradio::channel::*;
use cogradio::linalg::{self, c, diag_real};
use cogradio::rng::SeedPath;
use common::*;
use proptest::prelude::*;

#[test]
fn reference_channels_are_the_published_constants() {
    let ch = paper_channels();
    assert_eq!(ch.h13[(0, 0)], c(-0.7, 0.28));
    assert_eq!(ch.h24[(1, 1)], c(0.63, 1.12));
    assert_eq!(ch.h14[(0, 0)], c(0.97, -0.66));
    assert_eq!(ch.h23[(1, 0)], c(1.46, -0.92));
    for h in [&ch.h13, &ch.h14, &ch.h23, &ch.h24] {
        assert_eq!(linalg::svd(h).unwrap().rank(1e-9), 2);
    }
    assert_eq!(ch, paper_channels());
}

#[test]
fn channel_json_round_trip() {
    let ch = paper_channels();
    let text = ch.to_json();
    assert_eq!(ChannelSet::from_json(&text).unwrap(), ch);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    // Row-major real and imaginary arrays.
    assert_eq!(doc["h13"]["re"][1].as_f64(), Some(1.82));
    assert_eq!(doc["h13"]["im"][2].as_f64(), Some(-0.67));
    let bad = text.replacen("\"n_t\": 2", "\"n_t\": 3", 1);
    assert!(ChannelSet::from_json(&bad).is_err());
}

#[test]
fn pu_covariance_examples() {
    let s = pu_covariance(&linalg::eye(2), 2.0).unwrap();
    assert!(linalg::max_abs(&(&s.sigma - linalg::eye(2))) < 1e-9);
    let s = pu_covariance(&diag_real(&[2.0, 1.0]), 3.0).unwrap();
    assert!(linalg::max_abs(&(&s.sigma - diag_real(&[1.875, 1.125]))) < 1e-9);
    let pp = 10f64.powf(1.7);
    let s = pu_covariance(&paper_channels().h14, pp).unwrap();
    assert!((linalg::tr(&s.sigma) - pp).abs() < 1e-9);
    assert!(pu_covariance(&linalg::zeros(2, 2), 1.0).is_err());
}

#[test]
fn kronecker_examples() {
    let p = KroneckerParams { d: 1.0, beta: 3.0, gamma_t: 0.0, gamma_r: 0.0 };
    assert_eq!(p.rho(), 0.5);
    assert_eq!(correlation_matrix(3, 0.0), linalg::eye(3));
    let bad = KroneckerParams { gamma_t: 1.5, ..p };
    assert!(gen_kronecker(&bad, 2, &mut rng(0)).is_err());
    assert!(gen_kronecker(&KroneckerParams { d: 0.0, ..p }, 2, &mut rng(0)).is_err());
}

#[test]
fn kronecker_energy_matches_pathloss() {
    let p = KroneckerParams { d: 1.3, beta: 3.0, gamma_t: 0.7, gamma_r: 0.4 };
    let mut r = rng(11);
    let n = 100_000;
    let mean = (0..n).map(|_| linalg::fro2(&gen_kronecker(&p, 2, &mut r).unwrap())).sum::<f64>() / n as f64;
    let expect = p.rho() * 4.0;
    assert!((mean / expect - 1.0).abs() < 0.02, "{mean} vs {expect}");
}

#[test]
fn uncorrelated_kronecker_matches_scaled_iid_moments() {
    let p = KroneckerParams { d: 2.0, beta: 3.0, gamma_t: 0.0, gamma_r: 0.0 };
    let n = 50_000;
    let (mut r1, mut r2) = (rng(21), rng(22));
    let mut m1 = [0.0; 2];
    let mut m2 = [0.0; 2];
    for _ in 0..n {
        let a = gen_kronecker(&p, 2, &mut r1).unwrap();
        let b = gen_iid(2, &mut r2) * c(p.rho().sqrt(), 0.0);
        m1[0] += a[(0, 1)].re;
        m1[1] += b[(0, 1)].re;
        m2[0] += a[(0, 1)].norm_sqr();
        m2[1] += b[(0, 1)].norm_sqr();
    }
    let sd = (p.rho() / 2.0 / n as f64).sqrt();
    assert!((m1[0] / n as f64).abs() < 4.0 * sd && (m1[1] / n as f64).abs() < 4.0 * sd);
    assert!((m2[0] / m2[1] - 1.0).abs() < 0.03);
}

#[test]
fn iid_second_moments() {
    let mut r = rng(31);
    let n = 100_000;
    let mut cov = linalg::zeros(4, 4);
    let mut mean = linalg::zeros(4, 1);
    for _ in 0..n {
        let v = linalg::vec_mat(&gen_iid(2, &mut r));
        cov += &v * v.adjoint();
        mean += &v;
    }
    let cov = cov / c(n as f64, 0.0);
    assert!(linalg::max_abs(&(&cov - linalg::eye(4))) < 0.02);
    let bound = 3.0 / (n as f64).sqrt();
    assert!(mean.iter().all(|z| (z / n as f64).re.abs() < bound && (z / n as f64).im.abs() < bound));
    assert_ne!(gen_iid(2, &mut rng(1)), gen_iid(2, &mut rng(2)));
}

#[test]
fn deployment_geometry() {
    let d = deploy(1, 10.0, &mut rng(0)).unwrap();
    assert_eq!(d.pairs.len(), 1);
    let mut r = rng(41);
    for _ in 0..1000 {
        let d = deploy(3, 10.0, &mut r).unwrap();
        for p in &d.pairs {
            for x in [p.pu_tx, p.pu_rx, p.su_tx, p.su_rx] {
                assert!(x.iter().all(|v| (0.0..10.0).contains(v)));
            }
        }
    }
    assert!(deploy(0, 1.0, &mut r).is_err());
}

#[test]
fn farther_links_are_weaker() {
    let n = 20_000;
    let energy = |d: f64, seed: u64| {
        let mut r = rng(seed);
        let p = KroneckerParams { d, beta: PATHLOSS_EXPONENT, gamma_t: 0.5, gamma_r: 0.5 };
        (0..n).map(|_| linalg::fro2(&gen_kronecker(&p, 2, &mut r).unwrap())).sum::<f64>() / n as f64
    };
    assert!(energy(1.0, 1) > energy(1.5, 2));
}

#[test]
fn pair_channels_share_physical_links() {
    let d = deploy(3, 5.0, &mut rng(5)).unwrap();
    let s = SeedPath::new(9);
    let a = channels_for_pair(&d, 0, 1, 2, &s).unwrap();
    let b = channels_for_pair(&d, 0, 2, 2, &s).unwrap();
    let c2 = channels_for_pair(&d, 2, 1, 2, &s).unwrap();
    assert_eq!(a.h23, b.h23);
    assert_eq!(a.h14, c2.h14);
    assert_ne!(a.h24, b.h24);
    assert!(channels_for_pair(&d, 3, 0, 2, &s).is_err());
}

proptest! {
    #[test]
    fn pu_covariance_shares_eigenbasis(seed in any::<u64>(), n in 1usize..5, pp in 0.0f64..200.0) {
        let mut r = rng(seed);
        let h = gaussian(n, n, &mut r);
        let s = pu_covariance(&h, pp).unwrap();
        prop_assert!((linalg::tr(&s.sigma) - pp).abs() < 1e-9 * pp.max(1.0));
        prop_assert!(linalg::psd_residual(&s.sigma).unwrap() < 1e-9 * pp.max(1.0));
        let v = linalg::svd(&h).unwrap().v;
        let mut rotated = v.adjoint() * &s.sigma * &v;
        rotated.fill_diagonal(c(0.0, 0.0));
        prop_assert!(linalg::max_abs(&rotated) < 1e-9 * pp.max(1.0));
    }
}
