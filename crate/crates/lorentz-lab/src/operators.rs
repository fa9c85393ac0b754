//! The Hardy averaging operator S, its adjoint S*, and the maximal transform
//! f** = S f*.
//!
//! All evaluations route through exact primitives, never through sampled
//! quadrature of the profile itself: downstream norms amplify errors near
//! t → 0, so the maximal function must be exact on steps.

use crate::config::RunConfig;
use crate::realfun::{DecreasingProfile, QuadResult, RealFunction, StepFunction};
use crate::weights::Weight;

/// S f(t) = (1/t)·∫₀ᵗ f. Panics on t <= 0 (the operator is undefined there).
pub fn hardy<F: RealFunction + ?Sized>(f: &F, t: f64) -> f64 {
    assert!(t > 0.0, "the Hardy average needs t > 0");
    f.primitive(t) / t
}

/// S* f(t) = ∫_t^∞ f(s)/s ds, with a divergence flag on non-integrable tails.
pub fn adjoint_hardy(f: &Weight, t: f64, cfg: &RunConfig) -> QuadResult {
    assert!(t > 0.0, "the adjoint Hardy operator needs t > 0");
    f.tail_power_integral(t, 1.0, cfg)
}

/// S* of a step function in closed form: logarithmic pieces.
pub fn adjoint_hardy_step(f: &StepFunction, t: f64) -> f64 {
    assert!(t > 0.0);
    let mut acc = 0.0;
    let mut prev = 0.0f64;
    for (&c, &v) in f.cuts().iter().zip(f.values()) {
        let lo = prev.max(t);
        if c > lo {
            acc += v * (c / lo).ln();
        }
        prev = c;
    }
    acc
}

/// The maximal transform of a decreasing profile: f**(t) = S f*(t).
///
/// Pointwise at least the profile, nonincreasing, continuous, with t·f**(t)
/// nondecreasing.
#[derive(Clone, Debug)]
pub struct MaximalTransform<'a> {
    source: &'a DecreasingProfile,
}

impl<'a> MaximalTransform<'a> {
    pub fn new(source: &'a DecreasingProfile) -> Self {
        MaximalTransform { source }
    }

    pub fn source(&self) -> &DecreasingProfile {
        self.source
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.source.sup_value();
        }
        self.source.primitive(t) / t
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.source.breakpoints()
    }
}

/// f**(t) for a one-off evaluation.
pub fn maximal(f_star: &DecreasingProfile, t: f64) -> f64 {
    MaximalTransform::new(f_star).eval(t)
}

/// w-measure of the level set { S χ₍₀,r₎ > λ }.
///
/// S χ₍₀,r₎(t) = min(1, r/t), so the level set is empty for λ >= 1 and is
/// (0, r/λ) for λ < 1, giving W(r/λ).
pub fn hardy_char_levelset(r: f64, lambda: f64, w: &Weight) -> f64 {
    assert!(r > 0.0 && lambda > 0.0);
    if lambda >= 1.0 {
        0.0
    } else {
        w.primitive(r / lambda)
    }
}

/// Both routes around the commutation S(S*v) = S*(Sv) for a compactly
/// supported step weight v, each evaluated in closed form.
///
/// S(S*v)(r) = V(r)/r + ∫_r^∞ v(s)/s ds, and
/// S*(Sv)(r) = ∫_r^∞ V(s)/s² ds with V piecewise affine.
pub fn hardy_adjoint_both_routes(v: &StepFunction, r: f64) -> (f64, f64) {
    assert!(r > 0.0);
    let s_sstar = v.primitive(r) / r + adjoint_hardy_step(v, r);

    // ∫_r^∞ V(s)/s² with V(s) = α + β s on each piece: α(1/a - 1/b) + β ln(b/a)
    let mut sstar_s = 0.0;
    let mut prev = 0.0f64;
    let mut prim_prev = 0.0f64;
    for (&c, &val) in v.cuts().iter().zip(v.values()) {
        let lo = prev.max(r);
        if c > lo {
            // on [prev, c): V(s) = prim_prev + val·(s - prev)
            let alpha = prim_prev - val * prev;
            let beta = val;
            sstar_s += alpha * (1.0 / lo - 1.0 / c) + beta * (c / lo).ln();
        }
        prim_prev += val * (c - prev);
        prev = c;
    }
    // beyond the support V is constant: ∫_x^∞ V_tot/s² = V_tot/x
    let x = prev.max(r);
    sstar_s += prim_prev / x;
    (s_sstar, sstar_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfun::StepFunction;

    fn char01() -> DecreasingProfile {
        DecreasingProfile::char_interval(1.0)
    }

    #[test]
    fn hardy_of_char() {
        let f = char01();
        assert!((hardy(&f, 0.5) - 1.0).abs() < 1e-15);
        assert!((hardy(&f, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hardy_of_zero_and_constant() {
        let z = DecreasingProfile::zero();
        assert_eq!(hardy(&z, 1.0), 0.0);
        // constant profile c = 2
        let c = DecreasingProfile::decay(2.0, 0.0, 0.0, 0.0, None).unwrap();
        for t in [0.1, 1.0, 100.0] {
            assert!((hardy(&c, t) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    #[should_panic]
    fn hardy_rejects_nonpositive_abscissa() {
        let f = char01();
        hardy(&f, 0.0);
    }

    #[test]
    fn adjoint_on_char_weight() {
        let cfg = RunConfig::default();
        let w = Weight::char_interval(0.0, 1.0).unwrap();
        let r = adjoint_hardy(&w, 0.5, &cfg);
        assert!(!r.diverged);
        assert!((r.value - 2.0f64.ln()).abs() < 1e-12);
        let r = adjoint_hardy(&w, 1.0, &cfg);
        assert_eq!(r.value, 0.0);
        // constant weight: divergent
        let one = Weight::constant(1.0).unwrap();
        assert!(adjoint_hardy(&one, 1.0, &cfg).diverged);
    }

    #[test]
    fn adjoint_step_closed_form() {
        let v = StepFunction::new(vec![1.0], vec![1.0]).unwrap();
        assert!((adjoint_hardy_step(&v, 0.5) - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(adjoint_hardy_step(&v, 1.0), 0.0);
    }

    #[test]
    fn maximal_of_char_block() {
        // f* = χ₍₀,a₎ gives f**(t) = min(1, a/t)
        let a = 2.5;
        let f = DecreasingProfile::char_interval(a);
        let m = MaximalTransform::new(&f);
        for t in [0.1, 1.0, 2.5, 10.0] {
            let expect = (a / t).min(1.0);
            assert!((m.eval(t) - expect).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn maximal_dominates_and_decreases() {
        let f = StepFunction::new(vec![0.5, 2.0, 3.0], vec![4.0, 1.5, 0.5]).unwrap();
        let p = DecreasingProfile::step(f).unwrap();
        let m = MaximalTransform::new(&p);
        let mut prev = f64::INFINITY;
        let mut prev_t_mm = 0.0;
        for t in crate::config::log_grid(1e-3, 1e3, 16) {
            let mm = m.eval(t);
            assert!(mm + 1e-15 >= p.eval(t), "domination at {t}");
            assert!(mm <= prev * (1.0 + 1e-14), "monotone at {t}");
            assert!(t * mm + 1e-15 >= prev_t_mm, "t f** nondecreasing at {t}");
            prev = mm;
            prev_t_mm = t * mm;
        }
    }

    #[test]
    fn subadditivity_on_step_pair() {
        let f = StepFunction::new(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let g = StepFunction::new(vec![0.5, 3.0], vec![3.0, 0.25]).unwrap();
        let sum_star = f.add(&g).rearrange();
        let f_star = f.rearrange();
        let g_star = g.rearrange();
        for t in crate::config::log_grid(1e-3, 1e2, 32) {
            let lhs = maximal(&sum_star, t);
            let rhs = maximal(&f_star, t) + maximal(&g_star, t);
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn levelset_measure_examples() {
        let one = Weight::constant(1.0).unwrap();
        assert!((hardy_char_levelset(1.0, 0.5, &one) - 2.0).abs() < 1e-15);
        assert_eq!(hardy_char_levelset(1.0, 1.0, &one), 0.0);
        let ch = Weight::char_interval(0.0, 1.0).unwrap();
        assert!((hardy_char_levelset(0.5, 0.25, &ch) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn commutation_routes_agree() {
        let v = StepFunction::new(vec![0.5, 1.5, 4.0], vec![2.0, 0.5, 1.0]).unwrap();
        for r in crate::config::log_grid(1e-3, 1e3, 8) {
            let (a, b) = hardy_adjoint_both_routes(&v, r);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "r={r}: {a} vs {b}");
        }
    }
}
