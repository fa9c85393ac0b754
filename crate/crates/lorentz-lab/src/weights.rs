//! Weight families on (0, ∞).
//!
//! A weight is a positive, locally integrable function; everything downstream
//! consumes it through eval, the primitive W(t) = ∫₀ᵗ w, tail integrals
//! ∫_r^∞ w(s)/sᵖ ds, and the derivative where one exists. The closed
//! families (power, log-polynomial, characteristic, constant, exponential,
//! shifted power) carry exact closed forms for all of these; combinators and
//! derived weights fall back to the quadrature engine.
//!
//! The averaging smoothing replaces W by Φ(t) = (1/t)∫_t^{2t} W(s) ds, a C²
//! concave surrogate with W ≤ Φ ≤ 2W for decreasing w; applied twice it
//! upgrades a merely measurable weight to a twice-differentiable primitive.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::quad;
use crate::realfun::{QuadResult, RealFunction};
use crate::{Error, Result};

/// Structural smoothness class of a weight on (0, ∞).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    Rough,
    Continuous,
    C1,
}

#[derive(Clone, Debug)]
pub enum Weight {
    /// t^γ on [lo, hi); hi may be ∞.
    Power { gamma: f64, lo: f64, hi: f64 },
    /// (Σ coeffs\[k\]·lnᵏt)·t^γ on \[lo, hi).
    LogPoly { coeffs: Vec<f64>, gamma: f64, lo: f64, hi: f64 },
    /// Indicator of [lo, hi).
    Char { lo: f64, hi: f64 },
    Const { level: f64 },
    /// scale·e^{-rate·t}.
    Exp { scale: f64, rate: f64 },
    /// scale·(offset + t)^exponent.
    ShiftedPower { scale: f64, offset: f64, exponent: f64 },
    Tabulated(TabulatedWeight),
    Sum(Vec<Weight>),
    Product(Vec<Weight>),
    Smoothed(SmoothedWeight),
    /// The derived weight of the two-part representation of W^q; built by
    /// `constructions::build_wq`.
    DerivedWq(DerivedWq),
}

impl Weight {
    pub fn power(gamma: f64, lo: f64, hi: f64) -> Result<Weight> {
        check_support(lo, hi)?;
        if lo == 0.0 && gamma <= -1.0 {
            return Err(Error::Construction(format!(
                "t^{gamma} is not locally integrable at 0; need exponent > -1 on supports touching 0"
            )));
        }
        Ok(Weight::Power { gamma, lo, hi })
    }

    pub fn log_poly(coeffs: Vec<f64>, gamma: f64, lo: f64, hi: f64) -> Result<Weight> {
        check_support(lo, hi)?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Construction("log-polynomial needs finite coefficients".into()));
        }
        if lo == 0.0 && gamma <= -1.0 {
            return Err(Error::Construction(
                "log-polynomial weight is not locally integrable at 0".into(),
            ));
        }
        let w = Weight::LogPoly { coeffs, gamma, lo, hi };
        w.check_nonnegative()?;
        Ok(w)
    }

    pub fn char_interval(lo: f64, hi: f64) -> Result<Weight> {
        check_support(lo, hi)?;
        Ok(Weight::Char { lo, hi })
    }

    pub fn constant(level: f64) -> Result<Weight> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::Construction("constant weight must be nonnegative".into()));
        }
        Ok(Weight::Const { level })
    }

    pub fn exp_decay(scale: f64, rate: f64) -> Result<Weight> {
        if !(scale >= 0.0 && rate > 0.0 && scale.is_finite() && rate.is_finite()) {
            return Err(Error::Construction(
                "exponential weight needs scale >= 0 and rate > 0".into(),
            ));
        }
        Ok(Weight::Exp { scale, rate })
    }

    pub fn shifted_power(scale: f64, offset: f64, exponent: f64) -> Result<Weight> {
        if !(scale >= 0.0 && offset > 0.0) {
            return Err(Error::Construction("shifted power needs scale >= 0 and offset > 0".into()));
        }
        Ok(Weight::ShiftedPower { scale, offset, exponent })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Weight> {
        Ok(Weight::Tabulated(TabulatedWeight::new(grid, values)?))
    }

    pub fn sum(terms: Vec<Weight>) -> Weight {
        Weight::Sum(terms)
    }

    pub fn product(terms: Vec<Weight>) -> Result<Weight> {
        let w = Weight::Product(terms);
        // the factors are locally integrable individually; their product need not be
        let probe = quad::downward_tail(&|t| w.eval(t), 1.0, 1e-9, 1e-14, 80);
        if probe.diverged {
            return Err(Error::Construction(
                "product weight is not locally integrable near 0".into(),
            ));
        }
        Ok(w)
    }

    pub fn scaled(factor: f64, inner: Weight) -> Result<Weight> {
        if factor == 1.0 {
            return Ok(inner);
        }
        Ok(Weight::Product(vec![Weight::constant(factor)?, inner]))
    }

    fn check_nonnegative(&self) -> Result<()> {
        let (lo, hi) = self.probe_range();
        let grid = crate::config::log_grid(lo, hi, 24);
        let mut max_abs = 0.0f64;
        let mut min_val = f64::INFINITY;
        for t in grid {
            let v = self.eval(t);
            max_abs = max_abs.max(v.abs());
            min_val = min_val.min(v);
        }
        if min_val < -1e-9 * max_abs.max(1.0) {
            return Err(Error::Construction(format!(
                "weight takes negative values on its support (min observed {min_val})"
            )));
        }
        Ok(())
    }

    fn probe_range(&self) -> (f64, f64) {
        let bps = self.breakpoints();
        let lo = bps.iter().copied().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        let hi = bps.iter().copied().fold(0.0f64, f64::max);
        let lo = if lo.is_finite() { (lo * 1e-3).max(1e-12) } else { 1e-8 };
        let hi = if hi > 0.0 { (hi * 1e3).min(1e12) } else { 1e8 };
        (lo, hi.max(lo * 1e3))
    }

    /// Whether the primitive is evaluated in closed form rather than by
    /// quadrature (table-backed smoothed weights count as quadrature).
    pub fn has_closed_primitive(&self) -> bool {
        match self {
            Weight::Power { .. }
            | Weight::LogPoly { .. }
            | Weight::Char { .. }
            | Weight::Const { .. }
            | Weight::Exp { .. }
            | Weight::ShiftedPower { .. }
            | Weight::Tabulated(_) => true,
            Weight::Sum(terms) => terms.iter().all(|w| w.has_closed_primitive()),
            Weight::Product(terms) => {
                let (_, rest) = split_const_factors(terms);
                match rest.len() {
                    0 => true,
                    1 => rest[0].has_closed_primitive(),
                    _ => false,
                }
            }
            Weight::Smoothed(_) => false,
            Weight::DerivedWq(_) => false,
        }
    }

    /// Derivative of the weight where the representation provides one.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(0.0);
        }
        match self {
            Weight::Power { gamma, lo, hi } => {
                Some(if t > *lo && t < *hi { gamma * t.powf(gamma - 1.0) } else { 0.0 })
            }
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                if t > *lo && t < *hi {
                    let l = t.ln();
                    let p = poly_eval(coeffs, l);
                    let dp = poly_deriv_eval(coeffs, l);
                    Some(t.powf(gamma - 1.0) * (gamma * p + dp))
                } else {
                    Some(0.0)
                }
            }
            Weight::Char { .. } => None,
            Weight::Const { .. } => Some(0.0),
            Weight::Exp { scale, rate } => Some(-scale * rate * (-rate * t).exp()),
            Weight::ShiftedPower { scale, offset, exponent } => {
                Some(scale * exponent * (offset + t).powf(exponent - 1.0))
            }
            Weight::Tabulated(_) => None,
            Weight::Sum(terms) => {
                let mut acc = 0.0;
                for w in terms {
                    acc += w.derivative(t)?;
                }
                Some(acc)
            }
            Weight::Product(terms) => {
                let evals: Vec<f64> = terms.iter().map(|w| w.eval(t)).collect();
                let mut acc = 0.0;
                for (i, w) in terms.iter().enumerate() {
                    let d = w.derivative(t)?;
                    let others: f64 = evals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| v)
                        .product();
                    acc += d * others;
                }
                Some(acc)
            }
            Weight::Smoothed(s) => Some(s.derivative(t)),
            Weight::DerivedWq(_) => None,
        }
    }

    pub fn differentiable(&self) -> bool {
        match self {
            Weight::Char { .. } | Weight::Tabulated(_) | Weight::DerivedWq(_) => false,
            Weight::Sum(terms) | Weight::Product(terms) => terms.iter().all(|w| w.differentiable()),
            _ => true,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Weight::Power { lo, hi, .. } => {
                if *lo == 0.0 && hi.is_infinite() {
                    Smoothness::C1
                } else {
                    Smoothness::Rough
                }
            }
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
                let cont_at = |edge: f64| -> bool {
                    let l = edge.ln();
                    (edge.powf(*gamma) * poly_eval(coeffs, l)).abs() <= 1e-9 * scale.max(1.0)
                };
                let left_ok = *lo == 0.0 || cont_at(*lo);
                let right_ok = hi.is_infinite() || cont_at(*hi);
                if left_ok && right_ok {
                    Smoothness::Continuous
                } else {
                    Smoothness::Rough
                }
            }
            Weight::Char { .. } => Smoothness::Rough,
            Weight::Const { .. } | Weight::Exp { .. } | Weight::ShiftedPower { .. } => Smoothness::C1,
            Weight::Tabulated(_) => Smoothness::Continuous,
            Weight::Sum(terms) | Weight::Product(terms) => {
                terms.iter().map(|w| w.smoothness()).min().unwrap_or(Smoothness::C1)
            }
            Weight::Smoothed(s) => {
                if s.depth >= 2 || s.inner.smoothness() >= Smoothness::Continuous {
                    Smoothness::C1
                } else {
                    Smoothness::Continuous
                }
            }
            Weight::DerivedWq(d) => {
                if d.inner.smoothness() == Smoothness::C1 {
                    Smoothness::Continuous
                } else {
                    Smoothness::Rough
                }
            }
        }
    }

    /// ∫_r^∞ w(s)/sᵖ ds with divergence detection; closed form on the closed
    /// families.
    pub fn tail_power_integral(&self, r: f64, p: f64, cfg: &RunConfig) -> QuadResult {
        assert!(r > 0.0, "tail integral starts at a positive abscissa");
        match self {
            Weight::Power { gamma, lo, hi } => power_log_tail(&[1.0], *gamma - p, r.max(*lo), *hi),
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                power_log_tail(coeffs, *gamma - p, r.max(*lo), *hi)
            }
            Weight::Char { lo, hi } => power_log_tail(&[1.0], -p, r.max(*lo), *hi),
            Weight::Const { level } => power_log_tail(&[*level], -p, r, f64::INFINITY),
            Weight::Sum(terms) => {
                let mut acc = QuadResult::exact(0.0);
                for w in terms {
                    acc = acc.combine(&w.tail_power_integral(r, p, cfg));
                }
                acc
            }
            _ => {
                let f = |s: f64| self.eval(s) * s.powf(-p);
                let bps = self.breakpoints();
                quad::integrate_full(
                    &f,
                    &bps,
                    r,
                    f64::INFINITY,
                    cfg.tol_rel.min(1e-10),
                    cfg.tol_abs,
                    cfg.horizon_doublings,
                )
            }
        }
    }

    /// The weight dilated in its argument: t ↦ w(c·t), represented exactly.
    pub fn dilate(&self, c: f64) -> Result<Weight> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        let out = match self {
            Weight::Power { gamma, lo, hi } => Weight::scaled(
                c.powf(*gamma),
                Weight::Power { gamma: *gamma, lo: lo / c, hi: hi / c },
            )?,
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                // ln^k(ct) = (ln c + ln t)^k re-expanded in powers of ln t
                let lc = c.ln();
                let mut shifted = vec![0.0; coeffs.len()];
                for (k, &ck) in coeffs.iter().enumerate() {
                    let mut binom = 1.0f64;
                    for (j, slot) in shifted.iter_mut().enumerate().take(k + 1) {
                        *slot += ck * binom * lc.powi((k - j) as i32);
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                Weight::scaled(
                    c.powf(*gamma),
                    Weight::LogPoly { coeffs: shifted, gamma: *gamma, lo: lo / c, hi: hi / c },
                )?
            }
            Weight::Char { lo, hi } => Weight::Char { lo: lo / c, hi: hi / c },
            Weight::Const { level } => Weight::Const { level: *level },
            Weight::Exp { scale, rate } => Weight::Exp { scale: *scale, rate: rate * c },
            Weight::ShiftedPower { scale, offset, exponent } => Weight::ShiftedPower {
                scale: scale * c.powf(*exponent),
                offset: offset / c,
                exponent: *exponent,
            },
            Weight::Tabulated(t) => {
                let grid: Vec<f64> = t.grid.iter().map(|g| g / c).collect();
                Weight::Tabulated(TabulatedWeight::new(grid, t.values.clone())?)
            }
            Weight::Sum(terms) => {
                Weight::Sum(terms.iter().map(|w| w.dilate(c)).collect::<Result<_>>()?)
            }
            Weight::Product(terms) => {
                Weight::Product(terms.iter().map(|w| w.dilate(c)).collect::<Result<_>>()?)
            }
            Weight::Smoothed(s) => smooth_depth(&s.inner.dilate(c)?, s.depth)?,
            Weight::DerivedWq(d) => Weight::DerivedWq(DerivedWq::new(d.inner.dilate(c)?, d.q)?),
        };
        Ok(out)
    }

    /// Monotonicity probe: nonincreasing across 1000 log-spaced pairs.
    /// Sampled evidence, not a proof; certifiers record it.
    pub fn sampled_decreasing(&self) -> bool {
        let grid = crate::config::log_grid(1e-8, 1e8, 63);
        let mut prev = f64::INFINITY;
        for t in grid {
            let v = self.eval(t);
            if v > prev * (1.0 + 1e-12) + 1e-12 {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Boundedness probe near 0 (meaningful for decreasing weights).
    pub fn unbounded_near_zero(&self) -> bool {
        match self {
            Weight::Power { gamma, lo, .. } => *lo == 0.0 && *gamma < 0.0,
            Weight::LogPoly { coeffs, gamma, lo, .. } => {
                *lo == 0.0
                    && (*gamma < 0.0 || (*gamma == 0.0 && coeffs.iter().skip(1).any(|c| *c != 0.0)))
            }
            Weight::Char { .. } | Weight::Const { .. } | Weight::Exp { .. } => false,
            Weight::ShiftedPower { .. } => false,
            Weight::Tabulated(t) => t.lo_pow < 0.0 && t.lo_coeff > 0.0,
            Weight::Sum(terms) => terms.iter().any(|w| w.unbounded_near_zero()),
            Weight::Smoothed(s) => s.inner.unbounded_near_zero(),
            _ => {
                // sampled growth trend toward 0
                let v0 = self.eval(1.0).abs() + 1e-300;
                let mut t = 1.0;
                let mut prev = v0;
                let mut growing = 0;
                for _ in 0..64 {
                    t *= 0.25;
                    let v = self.eval(t);
                    if v > prev {
                        growing += 1;
                    }
                    prev = v;
                }
                growing > 48 && prev > 1e6 * v0
            }
        }
    }

    pub fn primitive_fn(&self) -> PrimitiveW<'_> {
        PrimitiveW { weight: self }
    }

    /// Export view of the weight in the wire format.
    pub fn to_spec(&self) -> WeightSpec {
        match self {
            Weight::Power { gamma, lo, hi } => WeightSpec::Power {
                gamma: *gamma,
                a: *lo,
                b: if hi.is_infinite() { None } else { Some(*hi) },
            },
            Weight::LogPoly { coeffs, gamma, lo, hi } => WeightSpec::LogPoly {
                coeffs: coeffs.clone(),
                gamma: *gamma,
                a: *lo,
                b: if hi.is_infinite() { None } else { Some(*hi) },
            },
            Weight::Char { lo, hi } => WeightSpec::Char { a: *lo, b: *hi },
            Weight::Const { level } => WeightSpec::Const { c: *level },
            Weight::Exp { scale, rate } => WeightSpec::Exp { scale: *scale, rate: *rate },
            Weight::ShiftedPower { scale, offset, exponent } => WeightSpec::ShiftPow {
                scale: *scale,
                offset: *offset,
                gamma: *exponent,
            },
            Weight::Tabulated(t) => {
                WeightSpec::Tabulated { grid: t.grid.clone(), values: t.values.clone() }
            }
            Weight::Sum(terms) => {
                WeightSpec::Sum { terms: terms.iter().map(|w| w.to_spec()).collect() }
            }
            Weight::Product(terms) => {
                WeightSpec::Product { terms: terms.iter().map(|w| w.to_spec()).collect() }
            }
            Weight::Smoothed(s) => {
                WeightSpec::Smoothed { inner: Box::new(s.inner.to_spec()), depth: s.depth }
            }
            Weight::DerivedWq(_) => {
                let tab = materialize_tabulated(self, &RunConfig::default())
                    .expect("derived weight materializes on the default grid");
                WeightSpec::Tabulated { grid: tab.grid, values: tab.values }
            }
        }
    }
}

fn check_support(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Construction(format!(
            "support must satisfy 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    Ok(())
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_deriv_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + c * k as f64;
    }
    acc
}

fn split_const_factors(terms: &[Weight]) -> (f64, Vec<&Weight>) {
    let mut factor = 1.0;
    let mut rest = Vec::new();
    for w in terms {
        match w {
            Weight::Const { level } => factor *= level,
            other => rest.push(other),
        }
    }
    (factor, rest)
}

/// Antiderivative of s^e·lnᵏs at x, with the limit conventions at the ends
/// (0 at x = 0 when e > -1, 0 at x = ∞ when e < -1).
fn power_log_antideriv(x: f64, e: f64, k: usize) -> f64 {
    if x == 0.0 || x.is_infinite() {
        return 0.0;
    }
    if (e + 1.0).abs() < 1e-12 {
        return x.ln().powi(k as i32 + 1) / (k as f64 + 1.0);
    }
    let lead = x.powf(e + 1.0) / (e + 1.0) * if k == 0 { 1.0 } else { x.ln().powi(k as i32) };
    if k == 0 {
        lead
    } else {
        lead - k as f64 / (e + 1.0) * power_log_antideriv(x, e, k - 1)
    }
}

/// ∫ over [x0, hi] of (Σ coeffs[k] lnᵏs)·s^e ds, flagged divergent when hi = ∞
/// and the exponent does not decay fast enough.
fn power_log_tail(coeffs: &[f64], e: f64, x0: f64, hi: f64) -> QuadResult {
    if x0 >= hi {
        return QuadResult::exact(0.0);
    }
    let definite = |a: f64, b: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * (power_log_antideriv(b, e, k) - power_log_antideriv(a, e, k)))
            .sum()
    };
    if hi.is_infinite() && e >= -1.0 - 1e-15 {
        // log-divergent or worse: report the partial at the doubling horizon
        let horizon = x0.max(1.0) * 2f64.powi(60);
        return QuadResult::diverged(definite(x0, horizon), 0);
    }
    QuadResult::exact(definite(x0, hi))
}

impl RealFunction for Weight {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Weight::Power { gamma, lo, hi } => {
                if t >= *lo && t < *hi {
                    t.powf(*gamma)
                } else {
                    0.0
                }
            }
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                if t >= *lo && t < *hi {
                    t.powf(*gamma) * poly_eval(coeffs, t.ln())
                } else {
                    0.0
                }
            }
            Weight::Char { lo, hi } => {
                if t >= *lo && t < *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::Const { level } => *level,
            Weight::Exp { scale, rate } => scale * (-rate * t).exp(),
            Weight::ShiftedPower { scale, offset, exponent } => {
                scale * (offset + t).powf(*exponent)
            }
            Weight::Tabulated(tab) => tab.eval(t),
            Weight::Sum(terms) => terms.iter().map(|w| w.eval(t)).sum(),
            Weight::Product(terms) => terms.iter().map(|w| w.eval(t)).product(),
            Weight::Smoothed(s) => s.eval_weight(t),
            Weight::DerivedWq(d) => d.eval(t),
        }
    }

    fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Weight::Power { gamma, lo, hi } => {
                let x1 = t.min(*hi);
                if x1 <= *lo {
                    0.0
                } else {
                    power_log_antideriv(x1, *gamma, 0) - power_log_antideriv(*lo, *gamma, 0)
                }
            }
            Weight::LogPoly { coeffs, gamma, lo, hi } => {
                let x1 = t.min(*hi);
                if x1 <= *lo {
                    return 0.0;
                }
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| {
                        c * (power_log_antideriv(x1, *gamma, k)
                            - power_log_antideriv(*lo, *gamma, k))
                    })
                    .sum()
            }
            Weight::Char { lo, hi } => (t.min(*hi) - lo).max(0.0),
            Weight::Const { level } => level * t,
            // -expm1 keeps 1 - e^{-rt} fully accurate for small rt
            Weight::Exp { scale, rate } => scale * (-(-rate * t).exp_m1()) / rate,
            Weight::ShiftedPower { scale, offset, exponent } => {
                if (exponent + 1.0).abs() < 1e-12 {
                    scale * ((offset + t) / offset).ln()
                } else {
                    scale * ((offset + t).powf(exponent + 1.0) - offset.powf(exponent + 1.0))
                        / (exponent + 1.0)
                }
            }
            Weight::Tabulated(tab) => tab.primitive(t),
            Weight::Sum(terms) => terms.iter().map(|w| w.primitive(t)).sum(),
            Weight::Product(terms) => {
                let (factor, rest) = split_const_factors(terms);
                match rest.len() {
                    0 => factor * t,
                    1 => factor * rest[0].primitive(t),
                    _ => {
                        let f = |s: f64| self.eval(s);
                        let bps = self.breakpoints();
                        quad::integrate_full(&f, &bps, 0.0, t, 1e-11, 1e-300, 80).value
                    }
                }
            }
            Weight::Smoothed(s) => s.big_primitive(t),
            Weight::DerivedWq(d) => d.primitive(t),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            Weight::Power { lo, hi, .. }
            | Weight::LogPoly { lo, hi, .. }
            | Weight::Char { lo, hi } => {
                let mut v = Vec::new();
                if *lo > 0.0 {
                    v.push(*lo);
                }
                if hi.is_finite() {
                    v.push(*hi);
                }
                v
            }
            Weight::Const { .. } | Weight::Exp { .. } | Weight::ShiftedPower { .. } => Vec::new(),
            Weight::Tabulated(t) => vec![t.grid[0], *t.grid.last().unwrap()],
            Weight::Sum(terms) | Weight::Product(terms) => {
                terms.iter().flat_map(|w| w.breakpoints()).collect()
            }
            Weight::Smoothed(s) => {
                let inner = s.inner.breakpoints();
                let mut v = Vec::with_capacity(inner.len() * 3);
                for b in inner {
                    v.push(b);
                    v.push(b / 2.0);
                    if s.depth == 2 {
                        v.push(b / 4.0);
                    }
                }
                v
            }
            Weight::DerivedWq(d) => d.inner.breakpoints(),
        };
        out.retain(|t| t.is_finite() && *t > 0.0);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

/// The map t ↦ W(t) = ∫₀ᵗ w as a first-class value.
pub struct PrimitiveW<'a> {
    weight: &'a Weight,
}

impl PrimitiveW<'_> {
    pub fn eval(&self, t: f64) -> f64 {
        self.weight.primitive(t)
    }

    pub fn has_closed_form(&self) -> bool {
        self.weight.has_closed_primitive()
    }
}

// ---------------------------------------------------------------------------
// Asymptotic probes
// ---------------------------------------------------------------------------

/// Outcome of the w(∞) probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LimitProbe {
    Value(f64),
    /// The weight was not (sampled-)decreasing, so the grid infimum need not
    /// converge to a limit.
    Inconclusive,
}

impl LimitProbe {
    pub fn value(&self) -> Option<f64> {
        match self {
            LimitProbe::Value(v) => Some(*v),
            LimitProbe::Inconclusive => None,
        }
    }
}

/// Infimum of w over an expanding geometric grid; converges to w(∞) for
/// decreasing weights.
pub fn limit_at_infinity(w: &Weight) -> LimitProbe {
    if !w.sampled_decreasing() {
        return LimitProbe::Inconclusive;
    }
    let mut inf = f64::INFINITY;
    let mut t = 1.0f64;
    for _ in 0..=64 {
        inf = inf.min(w.eval(t));
        t *= 4.0;
    }
    LimitProbe::Value(inf.max(0.0))
}

/// Whether the probe finds w(∞) below the configured zero threshold.
pub fn vanishes_at_infinity(w: &Weight, cfg: &RunConfig) -> Option<bool> {
    limit_at_infinity(w).value().map(|v| v <= cfg.zero_limit_threshold)
}

// ---------------------------------------------------------------------------
// Tabulated weights
// ---------------------------------------------------------------------------

/// Piecewise-linear weight on a strictly increasing grid, with power-law
/// extrapolation fitted on the first and last decade. The fitted rules are
/// part of the value and are reported alongside it.
#[derive(Clone, Debug)]
pub struct TabulatedWeight {
    grid: Vec<f64>,
    values: Vec<f64>,
    cum: Vec<f64>,
    lo_coeff: f64,
    lo_pow: f64,
    hi_coeff: f64,
    hi_pow: f64,
}

impl TabulatedWeight {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::Construction(
                "tabulated weight needs matching grid/values of length >= 2".into(),
            ));
        }
        let mut prev = 0.0;
        for &g in &grid {
            if !(g.is_finite() && g > prev) {
                return Err(Error::Construction(
                    "tabulated grid must be strictly increasing and positive".into(),
                ));
            }
            prev = g;
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Construction(
                "tabulated values must be finite and nonnegative".into(),
            ));
        }
        let (lo_coeff, lo_pow) = fit_power(&grid, &values, true);
        let (hi_coeff, hi_pow) = fit_power(&grid, &values, false);
        // keep the low end locally integrable whatever the fit says
        let lo_pow = lo_pow.max(-0.99);
        let mut cum = Vec::with_capacity(grid.len());
        let low_mass = lo_coeff * grid[0].powf(lo_pow + 1.0) / (lo_pow + 1.0);
        cum.push(low_mass);
        for i in 1..grid.len() {
            let panel = 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
            let last = *cum.last().unwrap();
            cum.push(last + panel);
        }
        Ok(TabulatedWeight { grid, values, cum, lo_coeff, lo_pow, hi_coeff, hi_pow })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The fitted extrapolation rules ((lo_coeff, lo_pow), (hi_coeff, hi_pow)).
    pub fn extrapolation(&self) -> ((f64, f64), (f64, f64)) {
        ((self.lo_coeff, self.lo_pow), (self.hi_coeff, self.hi_pow))
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t < self.grid[0] {
            return self.lo_coeff * t.powf(self.lo_pow);
        }
        if t >= self.grid[n - 1] {
            return self.hi_coeff * t.powf(self.hi_pow);
        }
        let i = self.grid.partition_point(|&g| g <= t);
        let (g0, g1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - g0) / (g1 - g0)
    }

    fn primitive(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t <= 0.0 {
            return 0.0;
        }
        if t < self.grid[0] {
            return self.lo_coeff * t.powf(self.lo_pow + 1.0) / (self.lo_pow + 1.0);
        }
        if t >= self.grid[n - 1] {
            let tail = if (self.hi_pow + 1.0).abs() < 1e-12 {
                self.hi_coeff * (t / self.grid[n - 1]).ln()
            } else {
                self.hi_coeff
                    * (t.powf(self.hi_pow + 1.0) - self.grid[n - 1].powf(self.hi_pow + 1.0))
                    / (self.hi_pow + 1.0)
            };
            return self.cum[n - 1] + tail;
        }
        let i = self.grid.partition_point(|&g| g <= t);
        let (g0, v0) = (self.grid[i - 1], self.values[i - 1]);
        let v_t = self.eval(t);
        self.cum[i - 1] + 0.5 * (v0 + v_t) * (t - g0)
    }
}

fn fit_power(grid: &[f64], values: &[f64], low_end: bool) -> (f64, f64) {
    let n = grid.len();
    let edge = if low_end { grid[0] } else { grid[n - 1] };
    let within = |g: f64| {
        if low_end {
            g <= edge * 10.0
        } else {
            g >= edge / 10.0
        }
    };
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(values)
        .filter(|(g, v)| within(**g) && **v > 0.0)
        .map(|(g, v)| (g.ln(), v.ln()))
        .collect();
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    if pts.len() == 1 {
        return (pts[0].1.exp(), 0.0);
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return (pts[0].1.exp(), 0.0);
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    (intercept.exp(), slope)
}

/// Sample a weight onto the configured grid as a Tabulated weight.
pub fn materialize_tabulated(w: &Weight, cfg: &RunConfig) -> Result<TabulatedWeight> {
    let grid = cfg.grid();
    let values: Vec<f64> = grid.iter().map(|&t| w.eval(t).max(0.0)).collect();
    TabulatedWeight::new(grid, values)
}

// ---------------------------------------------------------------------------
// Smoothing
// ---------------------------------------------------------------------------

const TABLE_LO: f64 = 1e-12;
const TABLE_HI: f64 = 1e12;
const TABLE_PER_DECADE: usize = 256;

/// Cubic Hermite interpolant on a uniform log-abscissa grid.
struct LogInterp {
    u0: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl LogInterp {
    fn build(t_lo: f64, t_hi: f64, per_decade: usize, f: &dyn Fn(f64) -> f64) -> LogInterp {
        let decades = (t_hi / t_lo).log10();
        let n = (decades * per_decade as f64).ceil() as usize;
        let u0 = t_lo.ln();
        let step = (t_hi.ln() - u0) / n as f64;
        let values: Vec<f64> = (0..=n).map(|i| f((u0 + step * i as f64).exp())).collect();
        // fourth-order slope estimates keep the Hermite error at O(h^4)
        let mut slopes = vec![0.0; n + 1];
        for i in 0..=n {
            slopes[i] = if i >= 2 && i + 2 <= n {
                (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2])
                    / (12.0 * step)
            } else if i == 0 {
                (values[1] - values[0]) / step
            } else if i == n {
                (values[n] - values[n - 1]) / step
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * step)
            };
        }
        LogInterp { u0, step, values, slopes }
    }

    fn eval(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return None;
        }
        let u = t.ln();
        let x = (u - self.u0) / self.step;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return None;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let th = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let th2 = th * th;
        let th3 = th2 * th;
        Some(
            y0 * (2.0 * th3 - 3.0 * th2 + 1.0)
                + d0 * (th3 - 2.0 * th2 + th)
                + y1 * (-2.0 * th3 + 3.0 * th2)
                + d1 * (th3 - th2),
        )
    }
}

impl std::fmt::Debug for LogInterp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LogInterp({} points)", self.values.len())
    }
}

#[derive(Debug)]
struct SmoothTables {
    phi: LogInterp,
    psi: Option<LogInterp>,
}

/// Weight obtained by differentiating the averaged primitive Φ (depth 1) or
/// its second averaging Ψ (depth 2). Its primitive is Φ (resp. Ψ) itself.
#[derive(Clone, Debug)]
pub struct SmoothedWeight {
    inner: Box<Weight>,
    depth: u8,
    tables: Arc<SmoothTables>,
}

fn averaged_primitive(primitive: &dyn Fn(f64) -> f64, bps: &[f64], t: f64) -> f64 {
    // (1/t)·∫_t^{2t} of the primitive
    quad::adaptive_split(primitive, bps, t, 2.0 * t, 1e-12, 1e-300).value / t
}

impl SmoothedWeight {
    fn build(inner: Weight, depth: u8) -> Result<SmoothedWeight> {
        if depth != 1 && depth != 2 {
            return Err(Error::InvalidArgument("smoothing depth must be 1 or 2".into()));
        }
        let bps = inner.breakpoints();
        let w_prim = |s: f64| inner.primitive(s);
        let phi_direct = |t: f64| averaged_primitive(&w_prim, &bps, t);
        let phi = LogInterp::build(TABLE_LO, TABLE_HI, TABLE_PER_DECADE, &phi_direct);
        let psi = if depth == 2 {
            let phi_eval = |s: f64| phi.eval(s).unwrap_or_else(|| phi_direct(s));
            let psi_direct = |t: f64| averaged_primitive(&phi_eval, &bps, t);
            Some(LogInterp::build(TABLE_LO, TABLE_HI / 2.0, TABLE_PER_DECADE, &psi_direct))
        } else {
            None
        };
        Ok(SmoothedWeight { inner: Box::new(inner), depth, tables: Arc::new(SmoothTables { phi, psi }) })
    }

    pub fn inner(&self) -> &Weight {
        &self.inner
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    fn phi(&self, t: f64) -> f64 {
        self.tables.phi.eval(t).unwrap_or_else(|| {
            let bps = self.inner.breakpoints();
            let w_prim = |s: f64| self.inner.primitive(s);
            averaged_primitive(&w_prim, &bps, t)
        })
    }

    fn psi(&self, t: f64) -> f64 {
        let table = self.tables.psi.as_ref().expect("depth-2 table");
        table.eval(t).unwrap_or_else(|| {
            let bps = self.inner.breakpoints();
            let phi_eval = |s: f64| self.phi(s);
            averaged_primitive(&phi_eval, &bps, t)
        })
    }

    fn phi_prime(&self, t: f64) -> f64 {
        let (a, b, c) = (2.0 * self.inner.primitive(2.0 * t), self.inner.primitive(t), self.phi(t));
        snap_difference(a - b - c, a + b + c) / t
    }

    fn psi_prime(&self, t: f64) -> f64 {
        let (a, b, c) = (2.0 * self.phi(2.0 * t), self.phi(t), self.psi(t));
        snap_difference(a - b - c, a + b + c) / t
    }

    /// The smoothed primitive: Φ at depth 1, Ψ at depth 2.
    pub fn big_primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.depth {
            1 => self.phi(t),
            _ => self.psi(t),
        }
    }

    /// The smoothed weight itself (derivative of the smoothed primitive).
    pub fn eval_weight(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let v = match self.depth {
            1 => self.phi_prime(t),
            _ => self.psi_prime(t),
        };
        v.max(0.0)
    }

    /// Second derivative of the smoothed primitive.
    pub fn derivative(&self, t: f64) -> f64 {
        match self.depth {
            1 => {
                let (a, b, c) =
                    (4.0 * self.inner.eval(2.0 * t), self.inner.eval(t), 2.0 * self.phi_prime(t));
                snap_difference(a - b - c, a + b + c) / t
            }
            _ => {
                let (a, b, c) =
                    (4.0 * self.phi_prime(2.0 * t), self.phi_prime(t), 2.0 * self.psi_prime(t));
                snap_difference(a - b - c, a + b + c) / t
            }
        }
    }
}

/// Differences of table-backed quantities carry interpolation noise; a
/// difference far below the scale of its terms is taken as an exact zero so
/// plateau regions do not leave a noise floor behind.
fn snap_difference(diff: f64, scale: f64) -> f64 {
    if diff.abs() <= 1e-9 * scale.abs() {
        0.0
    } else {
        diff
    }
}

/// One averaging pass: the returned weight has primitive
/// Φ(t) = (1/t)·∫_t^{2t} W(s) ds, with W ≤ Φ ≤ 2W for decreasing w.
pub fn smooth(w: &Weight) -> Result<Weight> {
    smooth_depth(w, 1)
}

pub fn smooth_depth(w: &Weight, depth: u8) -> Result<Weight> {
    Ok(Weight::Smoothed(SmoothedWeight::build(w.clone(), depth)?))
}

// ---------------------------------------------------------------------------
// The derived two-part weight
// ---------------------------------------------------------------------------

/// Weight w_q(r) = -r^q·d/dr[ W^{q-1}(r)·w(r)/r^{q-1} ], evaluated from the
/// source's closed forms. Nonnegative for decreasing sources; stray negative
/// round-off is clamped at zero (the construction audits the clamping).
#[derive(Clone, Debug)]
pub struct DerivedWq {
    inner: Box<Weight>,
    q: f64,
}

impl DerivedWq {
    pub fn new(inner: Weight, q: f64) -> Result<DerivedWq> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidArgument("derived weight needs q >= 1".into()));
        }
        if !inner.differentiable() {
            return Err(Error::Construction(
                "derived weight needs a differentiable source; smooth the weight first".into(),
            ));
        }
        Ok(DerivedWq { inner: Box::new(inner), q })
    }

    pub fn source(&self) -> &Weight {
        &self.inner
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Unclamped value, used by the construction audit.
    pub fn raw_eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let w = self.inner.eval(r);
        let wp = self.inner.derivative(r).unwrap_or(0.0);
        if self.q == 1.0 {
            return -r * wp;
        }
        let big = self.inner.primitive(r);
        if big <= 0.0 {
            return 0.0;
        }
        (self.q - 1.0) * big.powf(self.q - 2.0) * (big * w - r * w * w)
            - r * big.powf(self.q - 1.0) * wp
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.raw_eval(r).max(0.0)
    }

    fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let f = |s: f64| self.eval(s);
        let bps = self.inner.breakpoints();
        quad::integrate_full(&f, &bps, 0.0, t, 1e-11, 1e-300, 80).value
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

fn default_scale() -> f64 {
    1.0
}

/// JSON wire format for weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Power {
        gamma: f64,
        #[serde(default)]
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    LogPoly {
        coeffs: Vec<f64>,
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    Char { a: f64, b: f64 },
    Const { c: f64 },
    Exp {
        #[serde(default = "default_scale")]
        scale: f64,
        rate: f64,
    },
    ShiftPow {
        #[serde(default = "default_scale")]
        scale: f64,
        offset: f64,
        gamma: f64,
    },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    Sum { terms: Vec<WeightSpec> },
    Product { terms: Vec<WeightSpec> },
    Smoothed { inner: Box<WeightSpec>, depth: u8 },
}

impl WeightSpec {
    pub fn into_weight(self) -> Result<Weight> {
        match self {
            WeightSpec::Power { gamma, a, b } => Weight::power(gamma, a, b.unwrap_or(f64::INFINITY)),
            WeightSpec::LogPoly { coeffs, gamma, a, b } => {
                Weight::log_poly(coeffs, gamma, a, b.unwrap_or(f64::INFINITY))
            }
            WeightSpec::Char { a, b } => Weight::char_interval(a, b),
            WeightSpec::Const { c } => Weight::constant(c),
            WeightSpec::Exp { scale, rate } => Weight::exp_decay(scale, rate),
            WeightSpec::ShiftPow { scale, offset, gamma } => {
                Weight::shifted_power(scale, offset, gamma)
            }
            WeightSpec::Tabulated { grid, values } => Weight::tabulated(grid, values),
            WeightSpec::Sum { terms } => Ok(Weight::sum(
                terms.into_iter().map(|t| t.into_weight()).collect::<Result<_>>()?,
            )),
            WeightSpec::Product { terms } => {
                Weight::product(terms.into_iter().map(|t| t.into_weight()).collect::<Result<_>>()?)
            }
            WeightSpec::Smoothed { inner, depth } => smooth_depth(&inner.into_weight()?, depth),
        }
    }
}

/// Parse a weight from its JSON wire form.
pub fn weight_from_json(text: &str) -> Result<Weight> {
    let spec: WeightSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("weight spec: {e}")))?;
    spec.into_weight()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_closed_forms() {
        let w = Weight::char_interval(0.0, 1.0).unwrap();
        assert_eq!(w.primitive(2.0), 1.0);

        let w = Weight::power(0.5, 0.0, f64::INFINITY).unwrap();
        assert!((w.primitive(4.0) - 16.0 / 3.0).abs() < 1e-12);

        // (1 - log t) on (0,1): ∫₀¹ = 2
        let w = Weight::log_poly(vec![1.0, -1.0], 0.0, 0.0, 1.0).unwrap();
        assert!((w.primitive(1.0) - 2.0).abs() < 1e-12);
        assert!((w.primitive(5.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_squared_weight_primitive() {
        // log t (log t + 2) on (0, e^{-2}) has primitive t·ln²t there
        let w = Weight::log_poly(vec![0.0, 2.0, 1.0], 0.0, 0.0, (-2.0f64).exp()).unwrap();
        for t in [1e-4f64, 1e-3, 0.05, 0.1] {
            let expect = t * t.ln() * t.ln();
            assert!((w.primitive(t) - expect).abs() < 1e-12 * expect.max(1.0), "t={t}");
        }
    }

    #[test]
    fn primitive_matches_quadrature() {
        let samples: Vec<Weight> = vec![
            Weight::power(-0.5, 0.0, f64::INFINITY).unwrap(),
            Weight::power(1.25, 0.0, 3.0).unwrap(),
            Weight::log_poly(vec![1.0, -1.0], 0.0, 0.0, 1.0).unwrap(),
            Weight::exp_decay(2.0, 0.7).unwrap(),
            Weight::shifted_power(1.0, 1.0, -2.0).unwrap(),
            Weight::sum(vec![
                Weight::constant(1.0).unwrap(),
                Weight::power(-0.5, 0.0, f64::INFINITY).unwrap(),
            ]),
        ];
        for w in &samples {
            for t in [0.3, 1.0, 7.7] {
                let f = |s: f64| w.eval(s);
                let q = quad::integrate_full(&f, &w.breakpoints(), 0.0, t, 1e-12, 1e-300, 80);
                let rel = (w.primitive(t) - q.value).abs() / q.value.abs().max(1e-12);
                assert!(rel < 1e-9, "{w:?} at {t}: {} vs {}", w.primitive(t), q.value);
            }
        }
    }

    #[test]
    fn tail_power_integrals() {
        let cfg = RunConfig::default();
        // ∫_r^∞ 1/s ds diverges for the unit weight at p = 1
        let one = Weight::constant(1.0).unwrap();
        assert!(one.tail_power_integral(1.0, 1.0, &cfg).diverged);
        // p = 2 gives 1/r
        let t = one.tail_power_integral(2.0, 2.0, &cfg);
        assert!(!t.diverged);
        assert!((t.value - 0.5).abs() < 1e-12);
        // characteristic tail: ∫_r^1 ds/s = -ln r
        let ch = Weight::char_interval(0.0, 1.0).unwrap();
        let t = ch.tail_power_integral(0.25, 1.0, &cfg);
        assert!((t.value - (4.0f64).ln()).abs() < 1e-12);
        // exponential tail via quadrature: ∫_1^∞ e^{-s} ds = e^{-1}
        let e = Weight::exp_decay(1.0, 1.0).unwrap();
        let t = e.tail_power_integral(1.0, 0.0, &cfg);
        assert!((t.value - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn smoothing_of_unit_weight_is_three_halves() {
        let w = Weight::constant(1.0).unwrap();
        let s = smooth(&w).unwrap();
        for t in [1e-6, 0.01, 1.0, 42.0, 1e6] {
            assert!((s.eval(t) - 1.5).abs() < 1e-8, "t={t}: {}", s.eval(t));
        }
        assert!((s.primitive(2.0) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn smoothing_of_char_vanishes_beyond_one() {
        let w = Weight::char_interval(0.0, 1.0).unwrap();
        let s = smooth(&w).unwrap();
        for t in [1.0, 2.0, 100.0] {
            assert!(s.eval(t).abs() < 1e-8, "t={t}: {}", s.eval(t));
        }
        // and the smoothed primitive sits between W and 2W on a log grid
        for t in crate::config::log_grid(1e-6, 1e6, 16) {
            let big = w.primitive(t);
            let phi = s.primitive(t);
            assert!(phi >= big * (1.0 - 1e-8) && phi <= 2.0 * big * (1.0 + 1e-8), "t={t}");
        }
    }

    #[test]
    fn smoothed_primitive_is_midpoint_concave_for_decreasing_inner() {
        let w = Weight::exp_decay(1.0, 1.0).unwrap();
        let s = smooth(&w).unwrap();
        let grid = crate::config::log_grid(1e-3, 1e3, 8);
        for pair in grid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let lhs = s.primitive(mid);
            let rhs = 0.5 * (s.primitive(a) + s.primitive(b));
            assert!(lhs >= rhs - 1e-9 * lhs.abs().max(1e-12));
        }
    }

    #[test]
    fn limit_probes() {
        let w = Weight::char_interval(0.0, 1.0).unwrap();
        assert_eq!(limit_at_infinity(&w), LimitProbe::Value(0.0));

        let w = Weight::sum(vec![
            Weight::constant(1.0).unwrap(),
            Weight::power(-0.5, 0.0, f64::INFINITY).unwrap(),
        ]);
        match limit_at_infinity(&w) {
            LimitProbe::Value(v) => assert!((v - 1.0).abs() < 1e-9),
            _ => panic!("expected a value"),
        }

        let w = Weight::exp_decay(1.0, 1.0).unwrap();
        assert_eq!(limit_at_infinity(&w), LimitProbe::Value(0.0));

        // t is increasing: the probe is inconclusive
        let w = Weight::power(1.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(limit_at_infinity(&w), LimitProbe::Inconclusive);
    }

    #[test]
    fn primitive_over_t_nonincreasing_for_decreasing_weights() {
        for w in [
            Weight::exp_decay(1.0, 2.0).unwrap(),
            Weight::char_interval(0.0, 1.0).unwrap(),
            Weight::power(-0.5, 0.0, f64::INFINITY).unwrap(),
        ] {
            let grid = crate::config::log_grid(1e-6, 1e6, 32);
            let mut prev = f64::INFINITY;
            for t in grid {
                let v = w.primitive(t) / t;
                assert!(v <= prev * (1.0 + 1e-12), "t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn dilation_is_exact() {
        let w = Weight::log_poly(vec![1.0, -1.0], 0.0, 0.0, 1.0).unwrap();
        let d = w.dilate(2.0).unwrap();
        for t in [0.01, 0.2, 0.4999, 0.7] {
            let expect = w.eval(2.0 * t);
            assert!((d.eval(t) - expect).abs() < 1e-12 * expect.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn non_integrable_rejections() {
        assert!(Weight::power(-1.0, 0.0, 1.0).is_err());
        assert!(Weight::power(-1.5, 0.0, f64::INFINITY).is_err());
        // away from zero the same exponent is fine
        assert!(Weight::power(-1.5, 1.0, f64::INFINITY).is_ok());
        // product of two acceptable singularities can be rejected
        let a = Weight::power(-0.6, 0.0, 1.0).unwrap();
        let b = Weight::power(-0.6, 0.0, 1.0).unwrap();
        assert!(Weight::product(vec![a, b]).is_err());
    }

    #[test]
    fn tabulated_roundtrip_and_extrapolation() {
        // sample t^{-1/2} and check the fitted tails reproduce it
        let grid = crate::config::log_grid(1e-3, 1e3, 32);
        let values: Vec<f64> = grid.iter().map(|t| t.powf(-0.5)).collect();
        let w = Weight::tabulated(grid, values).unwrap();
        for t in [1e-4, 1e4] {
            let rel = (w.eval(t) - t.powf(-0.5)).abs() / t.powf(-0.5);
            assert!(rel < 0.05, "t={t} rel={rel}");
        }
        let rel = (w.primitive(1.0) - 2.0).abs() / 2.0;
        assert!(rel < 1e-3, "primitive rel error {rel}");
    }

    #[test]
    fn weight_spec_parses() {
        let w = weight_from_json(r#"{"kind":"power","gamma":0.5}"#).unwrap();
        assert!((w.eval(4.0) - 2.0).abs() < 1e-12);
        let w = weight_from_json(
            r#"{"kind":"sum","terms":[{"kind":"const","c":1.0},{"kind":"power","gamma":-0.5}]}"#,
        )
        .unwrap();
        assert!((w.eval(4.0) - 1.5).abs() < 1e-12);
        assert!(weight_from_json(r#"{"kind":"power","gama":1}"#).is_err());
    }
}
