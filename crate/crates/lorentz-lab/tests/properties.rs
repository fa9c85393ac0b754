//! Cross-module invariants: rearrangement algebra, primitive agreement,
//! smoothing bounds, norm monotonicity/homogeneity, class inclusions, and
//! operator identities on sampled families.

use proptest::prelude::*;

use lorentz_lab::classes::{certify_bp, certify_rp};
use lorentz_lab::config::{log_grid, RunConfig};
use lorentz_lab::norms::{gamma_alpha_norm, gamma_norm, gamma_weak_norm, lambda_norm};
use lorentz_lab::operators::{hardy, hardy_adjoint_both_routes};
use lorentz_lab::quad;
use lorentz_lab::realfun::{integrate, DecreasingProfile, RealFunction, StepFunction};
use lorentz_lab::sampling;
use lorentz_lab::weights::{smooth, Weight};

fn cfg() -> RunConfig {
    RunConfig::default()
}

fn step_strategy() -> impl Strategy<Value = StepFunction> {
    proptest::collection::vec((1e-3f64..10.0, 0f64..10.0), 1..8).prop_map(|pieces| {
        let mut edge = 0.0;
        let mut cuts = Vec::with_capacity(pieces.len());
        let mut values = Vec::with_capacity(pieces.len());
        for (len, v) in pieces {
            edge += len;
            cuts.push(edge);
            values.push(v);
        }
        StepFunction::new(cuts, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_preserves_mass_and_distribution(f in step_strategy(), lambda in 0f64..12.0) {
        let r = match f.rearrange() {
            DecreasingProfile::Step(g) => g,
            _ => unreachable!(),
        };
        prop_assert!((f.integral() - r.integral()).abs() <= 1e-12 * f.integral().max(1.0));
        prop_assert!((f.distribution(lambda) - r.distribution(lambda)).abs() <= 1e-12);
        // idempotent
        let rr = match r.rearrange() {
            DecreasingProfile::Step(g) => g,
            _ => unreachable!(),
        };
        prop_assert_eq!(rr, r);
    }

    #[test]
    fn integrate_is_additive_over_breakpoints(f in step_strategy(), split in 0.1f64..0.9) {
        let c = cfg();
        let end = f.support_end() + 1.0;
        let mid = split * end;
        let h = |t: f64| f.eval(t);
        let bps = f.breakpoints();
        let tol = 1e-10;
        let whole = integrate(&h, &bps, 0.0, end, tol, &c).unwrap();
        let left = integrate(&h, &bps, 0.0, mid, tol, &c).unwrap();
        let right = quad::adaptive_split(&h, &bps, mid, end, tol, c.tol_abs);
        let total = left.value + right.value;
        prop_assert!(
            (whole.value - total).abs() <= 2.0 * tol * whole.value.abs().max(1.0),
            "{} vs {}", whole.value, total
        );
    }

    #[test]
    fn norms_are_homogeneous_and_monotone(f in step_strategy(), extra in step_strategy(), c in 0.1f64..10.0) {
        let run = cfg();
        let w = Weight::char_interval(0.0, 2.0).unwrap();
        let fp = f.rearrange();
        // homogeneity under scaling of the profile
        let scaled = DecreasingProfile::scaled(c, fp.clone()).unwrap();
        for p in [1.0, 2.0] {
            let base = lambda_norm(&fp, &w, p, &run);
            let big = lambda_norm(&scaled, &w, p, &run);
            prop_assert!((big.value - c * base.value).abs() <= 1e-8 * (1.0 + c * base.value));
        }
        // monotone under pointwise domination: f <= f + extra
        let dominated = f.add(&extra).rearrange();
        for p in [1.0, 2.0] {
            let small = lambda_norm(&fp, &w, p, &run).value;
            let large = lambda_norm(&dominated, &w, p, &run).value;
            prop_assert!(small <= large * (1.0 + 1e-9) + 1e-12);
            let small_g = gamma_weak_norm(&fp, &w, p, &run).value;
            let large_g = gamma_weak_norm(&dominated, &w, p, &run).value;
            prop_assert!(small_g <= large_g * (1.0 + 1e-6) + 1e-9);
        }
    }

    #[test]
    fn hardy_average_of_decreasing_profile_decreases(f in step_strategy()) {
        let p = f.rearrange();
        let mut prev = f64::INFINITY;
        for t in log_grid(1e-3, 1e3, 16) {
            let v = hardy(&p, t);
            prop_assert!(v <= prev * (1.0 + 1e-13));
            prev = v;
        }
    }
}

#[test]
fn closed_form_primitives_match_quadrature_on_sampled_family() {
    let mut rng = sampling::rng(42);
    for i in 0..50 {
        let w = sampling::family_weight(&mut rng);
        let mut prev = 0.0f64;
        for t in log_grid(1e-6, 1e6, 4) {
            // W nondecreasing with W(0+) = 0 for every weight
            let big = w.primitive(t);
            assert!(big >= prev - 1e-12 * prev.abs(), "instance {i}: W not monotone at {t}");
            prev = big;
        }
        for t in [0.4, 1.9, 23.0] {
            let f = |s: f64| w.eval(s);
            let q = quad::integrate_full(&f, &w.breakpoints(), 0.0, t, 1e-12, 1e-300, 120);
            let exact = w.primitive(t);
            let rel = (exact - q.value).abs() / q.value.abs().max(1e-12);
            assert!(rel < 1e-9, "instance {i} at t={t}: {exact} vs {} ({w:?})", q.value);
        }
    }
}

#[test]
fn smoothing_brackets_the_primitive_for_decreasing_weights() {
    let mut rng = sampling::rng(7);
    for _ in 0..12 {
        let w = sampling::decreasing_family_weight(&mut rng);
        let s = smooth(&w).unwrap();
        let grid = log_grid(1e-4, 1e4, 8);
        for &t in &grid {
            let big = w.primitive(t);
            let phi = s.primitive(t);
            assert!(
                phi >= big * (1.0 - 1e-7) && phi <= 2.0 * big * (1.0 + 1e-7),
                "t={t}: W={big}, Phi={phi} ({w:?})"
            );
        }
        // midpoint concavity of the smoothed primitive
        for pair in grid.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let lhs = s.primitive(mid);
            let rhs = 0.5 * (s.primitive(pair[0]) + s.primitive(pair[1]));
            assert!(lhs >= rhs - 1e-7 * lhs.abs().max(1e-12));
        }
    }
}

#[test]
fn interpolated_norm_at_full_exponent_matches_plain_norm() {
    let c = cfg();
    let mut rng = sampling::rng(11);
    for i in 0..50 {
        let f = DecreasingProfile::step(sampling::decreasing_step(&mut rng, 8)).unwrap();
        let w = sampling::decreasing_family_weight(&mut rng);
        for p in [1.0, 2.0] {
            let a = gamma_alpha_norm(&f, &w, p, p, &c);
            let b = lambda_norm(&f, &w, p, &c);
            assert!(!a.diverged && !b.diverged);
            assert!(
                (a.value - b.value).abs() <= 1e-9 * b.value.max(1e-9),
                "instance {i} p={p}: {} vs {}",
                a.value,
                b.value
            );
        }
    }
}

#[test]
fn tail_class_members_have_quasi_decreasing_primitives() {
    let c = cfg();
    let mut rng = sampling::rng(23);
    let mut members = 0;
    for _ in 0..30 {
        let w = sampling::family_weight(&mut rng);
        for p in [1.0, 2.0] {
            let bp = certify_bp(&w, p, &c);
            if bp.is_member() {
                members += 1;
                let rp = certify_rp(&w, p, &c);
                assert!(rp.is_member(), "tail class member failed the pair condition: {w:?} p={p}");
            }
        }
    }
    assert!(members >= 10, "too few members sampled ({members})");
}

#[test]
fn certifier_verdicts_are_dilation_invariant() {
    let c = cfg();
    let samples = [
        Weight::char_interval(0.0, 1.0).unwrap(),
        Weight::exp_decay(1.0, 1.0).unwrap(),
        Weight::power(-0.5, 0.0, f64::INFINITY).unwrap(),
        Weight::power(0.5, 0.0, f64::INFINITY).unwrap(),
    ];
    for w in &samples {
        for p in [1.0, 2.0] {
            let base_bp = certify_bp(w, p, &c);
            let base_rp = certify_rp(w, p, &c);
            for scale in [0.1, 10.0] {
                let d = w.dilate(scale).unwrap();
                let bp = certify_bp(&d, p, &c);
                let rp = certify_rp(&d, p, &c);
                assert_eq!(bp.is_member(), base_bp.is_member(), "bp {w:?} scale {scale}");
                assert_eq!(rp.is_member(), base_rp.is_member(), "rp {w:?} scale {scale}");
                if let (Some(a), Some(b)) = (bp.constant(), base_bp.constant()) {
                    assert!((a - b).abs() <= 0.05 * b.max(1e-12), "bp constant {a} vs {b}");
                }
                if let (Some(a), Some(b)) = (rp.constant(), base_rp.constant()) {
                    assert!((a - b).abs() <= 0.05 * b.max(1e-12), "rp constant {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn maximal_norm_chain_has_unit_constants_for_decreasing_weights() {
    let c = cfg();
    let mut rng = sampling::rng(31);
    for i in 0..40 {
        let f = DecreasingProfile::step(sampling::decreasing_step(&mut rng, 8)).unwrap();
        let w = sampling::decreasing_family_weight(&mut rng);
        let weak = gamma_weak_norm(&f, &w, 1.0, &c);
        let lam = lambda_norm(&f, &w, 1.0, &c);
        let gam = gamma_norm(&f, &w, 1.0, 1.0, &c);
        let slack = 1.0 + 1e-9;
        assert!(
            weak.value <= lam.value * slack,
            "instance {i}: weak {} vs plain {} ({w:?})",
            weak.value,
            lam.value
        );
        let gam_eff = if gam.diverged { f64::INFINITY } else { gam.value };
        assert!(lam.value <= gam_eff * slack, "instance {i}: plain {} vs maximal {gam_eff}", lam.value);
    }
}

#[test]
fn hardy_and_adjoint_commute_on_step_weights() {
    let mut rng = sampling::rng(17);
    for i in 0..20 {
        let v = sampling::arbitrary_step(&mut rng, 6);
        for r in log_grid(1e-2, 1e2, 12) {
            let (a, b) = hardy_adjoint_both_routes(&v, r);
            assert!(
                (a - b).abs() <= 1e-11 * a.abs().max(1.0),
                "weight {i} at r={r}: {a} vs {b}"
            );
        }
    }
}
