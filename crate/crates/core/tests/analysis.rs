use flattop::analysis::{
    analyze_point, fault_tolerance_margin, find_flattop, fit_exponential, linspace, rms_coupling_error, susceptibility,
    swap_time, ExchangeCurve,
};
use proptest::prelude::*;

fn sampled(f: impl Fn(f64) -> f64, n: usize) -> ExchangeCurve {
    let v = linspace(0.0, 1.1, n);
    ExchangeCurve::new(v.iter().map(|&x| (x, f(x))).collect(), "synthetic").unwrap()
}

#[test]
fn swap_time_convention() {
    let tau = swap_time(0.4).unwrap();
    assert!((4.9..=5.4).contains(&tau), "{tau}");
    assert!((tau - 4.135667696 / 0.8).abs() < 1e-12);
    assert!(swap_time(0.0).is_err());
}

#[test]
fn threshold_margins_are_exact() {
    assert_eq!(fault_tolerance_margin(5e-4, 1e-4).unwrap(), (false, 5.0));
    assert_eq!(fault_tolerance_margin(5e-4, 1e-3).unwrap(), (true, 0.5));
    assert!(fault_tolerance_margin(5e-4, 0.0).is_err());
}

#[test]
fn parabolic_peak_has_quadratic_error_scaling() {
    // J = J*(1 − a((v − v*)/v*)²): rms/δ² = a·std(u²) with u uniform on [−1, 1]
    let (vs, a) = (0.8, 1.5);
    let c = sampled(|v| 0.3 * (1.0 - a * ((v - vs) / vs).powi(2)).max(1e-3), 221);
    let want = a * (1.0f64 / 5.0 - 1.0 / 9.0).sqrt();
    for d in [0.005, 0.01, 0.02] {
        let r = rms_coupling_error(&c, vs, d).unwrap() / (d * d);
        assert!((r / want - 1.0).abs() < 1e-3, "delta {d}: {r} vs {want}");
    }
    let top = find_flattop(&c).unwrap();
    assert!((top.v_star - vs).abs() < 1e-9);
    assert!((top.curvature - a).abs() < 1e-6);
    assert!(susceptibility(&c, vs).unwrap() < 1e-9);
}

#[test]
fn exponential_fit_recovers_the_rate() {
    let pts: Vec<(f64, f64)> = linspace(0.0, 1.0, 11).iter().map(|&v| (v, 0.01 * (7.0 * v).exp())).collect();
    let fit = fit_exponential(&pts).unwrap();
    assert!((fit.slope - 7.0).abs() < 1e-10);
    assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn omega_is_invariant_under_scaling_j(rate in 0.5..12.0f64, scale in 1e-3..1e3f64, v0 in 0.2..0.9f64) {
        let a = sampled(|v| 0.01 * (rate * v).exp(), 23);
        let b = sampled(|v| scale * 0.01 * (rate * v).exp(), 23);
        let (wa, wb) = (susceptibility(&a, v0).unwrap(), susceptibility(&b, v0).unwrap());
        prop_assert!((wa - wb).abs() <= 1e-12 * wa.max(1.0));
        let (ra, rb) = (rms_coupling_error(&a, v0, 0.01).unwrap(), rms_coupling_error(&b, v0, 0.01).unwrap());
        prop_assert!((ra - rb).abs() <= 1e-12 * ra.max(1e-300));
    }

    #[test]
    fn small_window_rms_follows_omega(rate in 0.5..8.0f64, v0 in 0.3..0.9f64) {
        // away from a stationary point, rms/δ → Ω/√3 as δ → 0
        let c = sampled(|v| 0.02 * (rate * v).exp(), 221);
        let omega = susceptibility(&c, v0).unwrap();
        prop_assert!(((omega - rate * v0) / (rate * v0)).abs() < 2e-3);
        let r = rms_coupling_error(&c, v0, 1e-3).unwrap() / 1e-3;
        prop_assert!((r * 3f64.sqrt() / omega - 1.0).abs() < 1e-2, "{} vs {}", r * 3f64.sqrt(), omega);
    }

    #[test]
    fn effective_omega_is_bounded_by_the_window_maximum(vs in 0.5..0.95f64, a in 0.1..4.0f64, v0 in 0.45..0.95f64, d in 0.002..0.05f64) {
        let c = sampled(|v| 0.3 * (1.0 - a * ((v - vs) / vs).powi(2)).max(1e-3), 221);
        let rep = analyze_point(&c, v0, d).unwrap();
        let worst = linspace(v0 * (1.0 - d), v0 * (1.0 + d), 41)
            .into_iter()
            .filter_map(|v| susceptibility(&c, v).ok())
            .fold(0.0f64, f64::max);
        prop_assert!(rep.omega_effective <= 1.1 * worst + 1e-9, "{} vs {}", rep.omega_effective, worst);
    }

    #[test]
    fn analysis_is_deterministic(rate in 0.5..8.0f64, v0 in 0.3..0.9f64) {
        let c = sampled(|v| 0.02 * (rate * v).exp(), 31);
        prop_assert_eq!(analyze_point(&c, v0, 0.01).unwrap(), analyze_point(&c, v0, 0.01).unwrap());
    }
}
