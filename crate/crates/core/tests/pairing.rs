mod common;

use cogradio::channel::{paper_channels, pu_covariance, PuCovariance};
use cogradio::linalg::{self, c};
use cogradio::pairing::*;
use common::*;
use proptest::prelude::*;
use rand::Rng;

/// Root of the scalar balance residual by bisection, independent of the
/// closed form.
fn bisect_alpha(p1: f64, p2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if siso_balance_residual(mid, p1, p2) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn siso_relay_ratio_examples() {
    assert_eq!(siso_relay_ratio(0.0, 3.0).unwrap(), 0.0);
    assert_eq!(siso_relay_ratio(2.0, 0.0).unwrap(), 0.0);
    let a = siso_relay_ratio(1.0, 1.0).unwrap();
    assert!((a - 0.133_975).abs() < 1e-6);
    assert!((a - bisect_alpha(1.0, 1.0)).abs() < 1e-12);
    assert!(siso_relay_ratio(-1.0, 1.0).is_err());
}

#[test]
fn relay_ratio_clamps() {
    let ch = paper_channels();
    let s = pu_covariance(&ch.h14, 10.0).unwrap();
    assert_eq!(relay_ratio_approx(&ch.h14, &linalg::zeros(2, 2), &s, 100.0, None).unwrap(), 0.0);
    // d_min² tr(D14²) ≤ 1/P_T makes the numerator vanish.
    let tiny = &ch.h24 * c(1e-4, 0.0);
    assert_eq!(relay_ratio_approx(&ch.h14, &tiny, &s, 100.0, None).unwrap(), 0.0);
    assert!(relay_ratio_approx(&ch.h14, &ch.h24, &s, 0.0, None).is_err());
}

/// Independently computed with numpy (SVD, closed-form water-filling and
/// the chordal distance of the full left singular bases).
const REFERENCE_ALPHA: f64 = 0.297_701_721_982_479_4;

#[test]
fn reference_relay_ratio() {
    let ch = paper_channels();
    let s = pu_covariance(&ch.h14, 10f64.powf(1.7)).unwrap();
    let a = relay_ratio_approx(&ch.h14, &ch.h24, &s, 100.0, None).unwrap();
    assert!((a - REFERENCE_ALPHA).abs() < 1e-12, "{a}");
    let t = relay_ratio_terms(&ch.h14, &ch.h24, &s, None).unwrap();
    assert!(t.d_c < 1e-7, "full-rank square channels span the same space");
    // Restricting to one direction makes the subspaces differ.
    assert!(channel_chordal_distance(&ch.h14, &ch.h24, Some(1)).unwrap() > 0.1);
}

#[test]
fn pair_metric_examples() {
    let h = paper_channels().h23;
    assert_eq!(pair_rate_metric(&h, 1.0, 50.0).unwrap(), 0.0);
    assert!((pair_rate_metric(&linalg::eye(2), 0.0, 3.0).unwrap() - 4.0).abs() < 1e-12);
    assert!(pair_rate_metric(&h, 1.5, 1.0).is_err());
}

#[test]
fn dual_small_cases() {
    let inst = PairingInstance::from_metric(1, vec![3.0]).unwrap();
    let res = solve_pairing_dual(&inst, &DualConfig::default(), &mut rng(0)).unwrap();
    assert_eq!(res.assignment, vec![0]);

    let m = 6;
    let r: Vec<f64> = (0..m * m).map(|k| if k / m == k % m { 10.0 } else { 0.0 }).collect();
    let inst = PairingInstance::from_metric(m, r).unwrap();
    let ident: Vec<usize> = (0..m).collect();
    assert_eq!(solve_pairing_dual(&inst, &DualConfig::default(), &mut rng(1)).unwrap().assignment, ident);
    assert_eq!(greedy_pairing(&inst, &mut rng(2)).assignment, ident);
    assert_eq!(brute_force_pairing(&inst).unwrap().assignment, ident);

    let big = PairingInstance::from_metric(11, vec![0.0; 121]).unwrap();
    assert!(brute_force_pairing(&big).is_err());
    assert!(PairingInstance::new(2, vec![0.0; 4], vec![0.0, 0.5, 1.0, 2.0]).is_err());
}

#[test]
fn dual_is_near_optimal_on_random_instances() {
    let mut r = rng(3);
    let (mut dual, mut brute) = (0.0, 0.0);
    for _ in 0..100 {
        let vals: Vec<f64> = (0..25).map(|_| r.random::<f64>() * 10.0).collect();
        let inst = PairingInstance::from_metric(5, vals).unwrap();
        dual += solve_pairing_dual(&inst, &DualConfig::default(), &mut r).unwrap().sum_rate;
        brute += brute_force_pairing(&inst).unwrap().sum_rate;
    }
    assert!(dual >= 0.95 * brute, "{dual} vs {brute}");
}

#[test]
fn instance_json_is_row_major_and_one_based() {
    let inst = PairingInstance::new(2, vec![2.0, 1.0, 1.0, 2.0], vec![0.0; 4]).unwrap();
    let res = brute_force_pairing(&inst).unwrap();
    assert_eq!(res.sum_rate, 4.0);
    let doc = serde_json::to_value(&res).unwrap();
    assert_eq!(doc["assignment"], serde_json::json!([1, 2]));
    let back: PairingResult = serde_json::from_value(doc).unwrap();
    assert_eq!(back, res);
}

fn random_sigma(seed: u64) -> (cogradio::linalg::CMat, cogradio::linalg::CMat, PuCovariance) {
    let mut r = rng(seed);
    let h14 = gaussian(2, 2, &mut r);
    let h24 = gaussian(2, 2, &mut r);
    let pp = 10f64.powf(r.random::<f64>() * 3.0);
    let s = pu_covariance(&h14, pp).unwrap();
    (h14, h24, s)
}

proptest! {
    #[test]
    fn siso_balance_and_monotonicity(p1 in 0.0f64..1e3, p2 in 1e-3f64..1e3, bump in 0.0f64..10.0) {
        let a = siso_relay_ratio(p1, p2).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(siso_balance_residual(a, p1, p2).abs() < 1e-9 * p1.max(1.0));
        prop_assert!(siso_relay_ratio(p1 + bump, p2).unwrap() >= a - 1e-15);
    }

    #[test]
    fn relay_ratio_in_unit_interval(seed in any::<u64>(), pt in 1e-2f64..1e4) {
        let (h14, h24, s) = random_sigma(seed);
        let a = relay_ratio_approx(&h14, &h24, &s, pt, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let t = relay_ratio_terms(&h14, &h24, &s, None).unwrap();
        if t.d24_min.powi(2) * t.tr_d14_sq <= 1.0 / pt {
            prop_assert_eq!(a, 0.0);
        }
    }

    /// The metric equals `log2 det(I + (1−α) P_T H23 H23^H)`, the rate
    /// reached with `W = U23^H` and unnormalized `F̃ = V23`.
    #[test]
    fn pair_metric_matches_log_det(seed in any::<u64>(), alpha in 0.0f64..=1.0, pt in 0.1f64..1e3) {
        let h = gaussian(3, 3, &mut rng(seed));
        let m = linalg::eye(3) + &h * h.adjoint() * c((1.0 - alpha) * pt, 0.0);
        let expect = linalg::ln_det_hpd(&m).unwrap() / std::f64::consts::LN_2;
        prop_assert!((pair_rate_metric(&h, alpha, pt).unwrap() - expect).abs() < 1e-9 * expect.max(1.0));
    }

    #[test]
    fn assignments_are_permutations_and_ordered(seed in any::<u64>(), m in 1usize..8) {
        let mut r = rng(seed);
        let vals: Vec<f64> = (0..m * m).map(|_| r.random::<f64>() * 5.0).collect();
        let inst = PairingInstance::from_metric(m, vals).unwrap();
        let dual = solve_pairing_dual(&inst, &DualConfig::default(), &mut r).unwrap();
        let greedy = greedy_pairing(&inst, &mut r);
        let random = random_pairing(&inst, &mut r);
        let brute = brute_force_pairing(&inst).unwrap();
        for res in [&dual, &greedy, &random, &brute] {
            prop_assert!(res.is_bijection());
            prop_assert!((res.sum_rate - inst.sum_rate(&res.assignment)).abs() < 1e-9);
            prop_assert!(res.sum_rate <= brute.sum_rate + 1e-9);
        }
    }
}
