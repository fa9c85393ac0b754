//! The norm functionals on decreasing profiles: Λᵖ, Λ^{p,∞}, Γ^{p,q},
//! Γ^{p,∞}, and the interpolated Γᵖ_α family.
//!
//! Integral norms are exact on step profiles whenever the weight primitive
//! has a closed form; everything else goes through split quadrature with the
//! geometric endpoint treatments. Supremum norms are exact at step
//! breakpoints and use a dense log grid (512 points per decade) with a local
//! refinement pass elsewhere. Divergence of a norm is a first-class result,
//! not an error.

use crate::config::RunConfig;
use crate::operators::MaximalTransform;
use crate::quad;
use crate::realfun::{DecreasingProfile, QuadResult, RealFunction};
use crate::weights::Weight;
use crate::{Error, Result};

/// Exponent triple for the functionals; q = ∞ encodes the weak norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl NormParams {
    pub fn new(p: f64, q: f64, alpha: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < p < ∞, got {p}")));
        }
        if q.is_nan() || q <= 0.0 {
            return Err(Error::InvalidArgument(format!("need 0 < q <= ∞, got {q}")));
        }
        if !(0.0..=p).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("need 0 <= alpha <= p, got {alpha}")));
        }
        Ok(NormParams { p, q, alpha })
    }
}

/// A computed norm; `diverged` means the underlying integral failed the
/// stabilization test and `value` is the partial functional at the horizon
/// (or ∞ for an unbounded supremum).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub diverged: bool,
    pub abs_error: f64,
}

impl NormValue {
    fn from_integral(i: QuadResult, p: f64) -> NormValue {
        let value = if i.value <= 0.0 { 0.0 } else { i.value.powf(1.0 / p) };
        let abs_error = if i.value > 0.0 && i.abs_error.is_finite() {
            value * i.abs_error / (p * i.value)
        } else {
            i.abs_error
        };
        NormValue { value, diverged: i.diverged, abs_error }
    }

    fn finite(value: f64) -> NormValue {
        NormValue { value, diverged: false, abs_error: 0.0 }
    }

    fn unbounded() -> NormValue {
        NormValue { value: f64::INFINITY, diverged: true, abs_error: f64::INFINITY }
    }
}

fn pow_or_one(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

fn merged_breakpoints(f: &DecreasingProfile, w: &Weight) -> Vec<f64> {
    let mut bps = f.breakpoints();
    bps.extend(w.breakpoints());
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    bps
}

fn functional_integral(
    h: &dyn Fn(f64) -> f64,
    bps: &[f64],
    upper: Option<f64>,
    cfg: &RunConfig,
) -> QuadResult {
    match upper {
        Some(u) if u <= 0.0 => QuadResult::exact(0.0),
        Some(u) => quad::integrate_full(h, bps, 0.0, u, cfg.tol_rel.min(1e-11), cfg.tol_abs, cfg.horizon_doublings),
        None => quad::integrate_full(
            h,
            bps,
            0.0,
            f64::INFINITY,
            cfg.tol_rel.min(1e-11),
            cfg.tol_abs,
            cfg.horizon_doublings,
        ),
    }
}

// ---------------------------------------------------------------------------
// Integral norms
// ---------------------------------------------------------------------------

/// ‖f‖ = (∫₀^∞ (f*(t))ᵖ w(t) dt)^{1/p}.
pub fn lambda_norm(f: &DecreasingProfile, w: &Weight, p: f64, cfg: &RunConfig) -> NormValue {
    assert!(p > 0.0, "lambda norm needs p > 0");
    if f.is_zero() {
        return NormValue::finite(0.0);
    }
    if let DecreasingProfile::Step(s) = f {
        // exact: Σ vᵖ·(W(tᵢ) - W(tᵢ₋₁))
        let mut acc = 0.0;
        let mut prev_w = 0.0;
        for (&t, &v) in s.cuts().iter().zip(s.values()) {
            let big = w.primitive(t);
            acc += v.powf(p) * (big - prev_w);
            prev_w = big;
        }
        return NormValue::from_integral(QuadResult::exact(acc), p);
    }
    let h = |t: f64| {
        let wv = w.eval(t);
        if wv == 0.0 {
            0.0
        } else {
            f.eval(t).powf(p) * wv
        }
    };
    let bps = merged_breakpoints(f, w);
    let i = functional_integral(&h, &bps, f.support_end(), cfg);
    NormValue::from_integral(i, p)
}

/// ‖f‖ = (∫₀^∞ (f**(t))^q·W(t)^{q/p-1}·w(t) dt)^{1/q}.
pub fn gamma_norm(f: &DecreasingProfile, w: &Weight, p: f64, q: f64, cfg: &RunConfig) -> NormValue {
    assert!(p > 0.0 && q > 0.0 && q.is_finite(), "gamma norm needs p > 0 and finite q > 0");
    if f.is_zero() {
        return NormValue::finite(0.0);
    }
    let m = MaximalTransform::new(f);
    let e = q / p - 1.0;
    let h = |t: f64| {
        let wv = w.eval(t);
        if wv == 0.0 {
            return 0.0;
        }
        let big = w.primitive(t);
        if big <= 0.0 && e < 0.0 {
            return 0.0;
        }
        m.eval(t).powf(q) * pow_or_one(big, e) * wv
    };
    let bps = merged_breakpoints(f, w);
    let i = functional_integral(&h, &bps, None, cfg);
    NormValue::from_integral(i, q)
}

/// ‖f‖ = (∫₀^∞ (f*(t))^α·(f**(t))^{p-α}·w(t) dt)^{1/p}.
///
/// Reduces to the plain integral norm at α = p and to the maximal-function
/// norm with q = p at α = 0 (both are computed through the same integrand,
/// so the reductions are checked rather than hard-wired).
pub fn gamma_alpha_norm(
    f: &DecreasingProfile,
    w: &Weight,
    p: f64,
    alpha: f64,
    cfg: &RunConfig,
) -> NormValue {
    assert!(p > 0.0 && (0.0..=p).contains(&alpha), "need 0 <= alpha <= p");
    if f.is_zero() {
        return NormValue::finite(0.0);
    }
    let m = MaximalTransform::new(f);
    let h = |t: f64| {
        let wv = w.eval(t);
        if wv == 0.0 {
            return 0.0;
        }
        pow_or_one(f.eval(t), alpha) * pow_or_one(m.eval(t), p - alpha) * wv
    };
    let bps = merged_breakpoints(f, w);
    let upper = if alpha > 0.0 { f.support_end() } else { None };
    let i = functional_integral(&h, &bps, upper, cfg);
    NormValue::from_integral(i, p)
}

// ---------------------------------------------------------------------------
// Supremum norms
// ---------------------------------------------------------------------------

struct SupOutcome {
    value: f64,
    unbounded: bool,
}

/// Dense log-grid scan with golden-section refinement around the running
/// argmax, plus geometric probes toward 0 and ∞. The unbounded flag fires on
/// sustained geometric growth at the horizon.
fn sup_scan(g: &dyn Fn(f64) -> f64, anchors: &[f64], cfg: &RunConfig) -> SupOutcome {
    let pos: Vec<f64> = {
        let mut v: Vec<f64> = anchors.iter().copied().filter(|t| t.is_finite() && *t > 0.0).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let lo = pos.first().map(|v| v * 1e-3).unwrap_or(1e-6).max(1e-12);
    let hi = pos.last().map(|v| v * 1e3).unwrap_or(1e3).max(lo * 1e3);

    let per_decade = 512usize;
    let grid = crate::config::log_grid(lo, hi, per_decade);
    let mut best = (0.0f64, lo);
    for &t in &grid {
        let v = g(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    // refine between the grid neighbours of the argmax
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let (mut a, mut b) = (best.1 / ratio, best.1 * ratio);
    let phi = 0.618_033_988_749_894_9;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..90 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
        let m = 0.5 * (a + b);
        let v = g(m);
        if v > best.0 {
            best = (v, m);
        }
    }

    // probe toward zero
    let mut t = lo;
    for _ in 0..cfg.horizon_doublings {
        t *= 0.5;
        let v = g(t);
        if v > best.0 {
            best = (v, t);
        }
    }

    // probe toward infinity with growth bookkeeping
    let mut t = hi;
    let mut prev = g(hi);
    let mut nonimprove = 0u32;
    let mut history = Vec::with_capacity(cfg.horizon_doublings as usize);
    let mut exhausted = true;
    for _ in 0..cfg.horizon_doublings.max(40) {
        t *= 2.0;
        let v = g(t);
        history.push(v);
        if v > best.0 {
            best = (v, t);
        }
        if v <= prev * (1.0 + 1e-12) {
            nonimprove += 1;
            if nonimprove >= 3 && v <= best.0 {
                exhausted = false;
                break;
            }
        } else {
            nonimprove = 0;
        }
        prev = v;
    }
    let unbounded = exhausted
        && history.len() > 20
        && history.last().copied().unwrap_or(0.0)
            > 2.0 * history[history.len() - 21].max(1e-300)
        && nonimprove == 0;
    SupOutcome { value: best.0, unbounded }
}

/// ‖f‖ = sup f*(t)·W(t)^{1/p}; exact at step breakpoints (the sup over a
/// constant piece of f* sits at the right endpoint, where W is continuous).
pub fn lambda_weak_norm(f: &DecreasingProfile, w: &Weight, p: f64, cfg: &RunConfig) -> NormValue {
    assert!(p > 0.0);
    if f.is_zero() {
        return NormValue::finite(0.0);
    }
    let mut best = 0.0f64;
    for t in f.breakpoints() {
        let v = f.eval_left(t) * w.primitive(t).powf(1.0 / p);
        if v > best {
            best = v;
        }
    }
    if matches!(f, DecreasingProfile::Step(_)) {
        return NormValue::finite(best);
    }
    let g = |t: f64| f.eval(t) * w.primitive(t).powf(1.0 / p);
    let anchors = merged_breakpoints(f, w);
    let sup = sup_scan(&g, &anchors, cfg);
    if sup.unbounded {
        return NormValue::unbounded();
    }
    NormValue::finite(best.max(sup.value))
}

/// ‖f‖ = sup f**(t)·W(t)^{1/p}.
pub fn gamma_weak_norm(f: &DecreasingProfile, w: &Weight, p: f64, cfg: &RunConfig) -> NormValue {
    assert!(p > 0.0);
    if f.is_zero() {
        return NormValue::finite(0.0);
    }
    let m = MaximalTransform::new(f);
    let g = |t: f64| m.eval(t) * w.primitive(t).powf(1.0 / p);
    let anchors = merged_breakpoints(f, w);
    let sup = sup_scan(&g, &anchors, cfg);
    if sup.unbounded {
        return NormValue::unbounded();
    }
    NormValue::finite(sup.value)
}
