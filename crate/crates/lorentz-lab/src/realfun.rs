//! Positive functions on (0, ∞): step functions with exact algebra, the
//! decreasing profiles consumed by the norm functionals, and the shared
//! integration entry point.
//!
//! Step functions are right-continuous with left-closed pieces, so the Hardy
//! average of a step is exactly piecewise (constant or affine-over-t) and
//! breakpoint values never influence an integral.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::quad;
use crate::{Error, Result};

/// Outcome of a (possibly improper) integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadResult {
    /// The integral, or the partial integral at the truncation horizon when
    /// the divergence flag is set.
    pub value: f64,
    /// Estimated absolute error of the reported value.
    pub abs_error: f64,
    /// Set when the doubling test failed to stabilize before the horizon cap.
    pub diverged: bool,
    /// Number of panels consumed.
    pub pieces_used: usize,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        QuadResult { value, abs_error: 0.0, diverged: false, pieces_used: 0 }
    }

    pub fn diverged(partial: f64, pieces: usize) -> Self {
        QuadResult { value: partial, abs_error: f64::INFINITY, diverged: true, pieces_used: pieces }
    }

    pub fn combine(&self, other: &QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            diverged: self.diverged || other.diverged,
            pieces_used: self.pieces_used + other.pieces_used,
        }
    }
}

/// Anything evaluable on (0, ∞) with an exact-or-quadrature primitive.
pub trait RealFunction {
    fn eval(&self, t: f64) -> f64;
    /// ∫₀ᵗ of the function; exact closed form wherever the representation
    /// allows it.
    fn primitive(&self, t: f64) -> f64;
    /// Abscissae where the function changes analytic piece.
    fn breakpoints(&self) -> Vec<f64>;
}

// ---------------------------------------------------------------------------
// Step functions
// ---------------------------------------------------------------------------

/// A finite positive step function: value `values[i]` on [cutsᵢ₋₁, cutsᵢ)
/// with cuts₋₁ = 0, and 0 on [cutsₙ₋₁, ∞).
///
/// Canonical form merges adjacent equal values and drops a trailing zero
/// piece, so two step functions are equal as functions iff their
/// representations are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "step function needs one value per breakpoint, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &breakpoints {
            if !(t.is_finite() && t > prev) {
                return Err(Error::InvalidArgument(format!(
                    "breakpoints must be finite, positive and strictly increasing; offending value {t}"
                )));
            }
            prev = t;
        }
        for &v in &values {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "step values must be finite and nonnegative; offending value {v}"
                )));
            }
        }
        let mut f = StepFunction { cuts: breakpoints, values };
        f.canonicalize();
        Ok(f)
    }

    /// The zero function.
    pub fn zero() -> Self {
        StepFunction { cuts: Vec::new(), values: Vec::new() }
    }

    fn canonicalize(&mut self) {
        // merge pieces separated by a breakpoint where the value does not change
        let mut cuts = Vec::with_capacity(self.cuts.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.cuts.len() {
            if !values.is_empty() && self.values[i] == *values.last().unwrap() {
                *cuts.last_mut().unwrap() = self.cuts[i];
            } else {
                cuts.push(self.cuts[i]);
                values.push(self.values[i]);
            }
        }
        // the implicit tail value is 0
        while values.last() == Some(&0.0) {
            values.pop();
            cuts.pop();
        }
        self.cuts = cuts;
        self.values = values;
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// End of the support (0 for the zero function).
    pub fn support_end(&self) -> f64 {
        self.cuts.last().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Total integral (always finite).
    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&t, &v) in self.cuts.iter().zip(&self.values) {
            acc += v * (t - prev);
            prev = t;
        }
        acc
    }

    /// Lebesgue measure of {f > lambda}; exact.
    pub fn distribution(&self, lambda: f64) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&t, &v) in self.cuts.iter().zip(&self.values) {
            if v > lambda {
                acc += t - prev;
            }
            prev = t;
        }
        acc
    }

    /// Pointwise sum, exact on the merged grid.
    pub fn add(&self, other: &StepFunction) -> StepFunction {
        let mut cuts: Vec<f64> = self.cuts.iter().chain(other.cuts.iter()).copied().collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let values: Vec<f64> = cuts
            .iter()
            .map(|&t| {
                // value on the piece ending at t, i.e. just left of t
                let probe = t;
                self.value_left(probe) + other.value_left(probe)
            })
            .collect();
        let mut f = StepFunction { cuts, values };
        f.canonicalize();
        f
    }

    pub fn scale(&self, c: f64) -> Result<StepFunction> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be nonnegative, got {c}")));
        }
        let mut f = StepFunction {
            cuts: self.cuts.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        };
        f.canonicalize();
        Ok(f)
    }

    /// Value of the piece that has `t` as its right endpoint (left limit).
    pub fn value_left(&self, t: f64) -> f64 {
        match self.cuts.binary_search_by(|c| c.partial_cmp(&t).unwrap()) {
            Ok(i) => self.values[i],
            Err(i) => {
                if i < self.values.len() {
                    self.values[i]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// The decreasing rearrangement: same distribution function, pieces laid
    /// out from the origin in decreasing value order.
    pub fn rearrange(&self) -> DecreasingProfile {
        let mut blocks: Vec<(f64, f64)> = Vec::new(); // (value, length)
        let mut prev = 0.0;
        for (&t, &v) in self.cuts.iter().zip(&self.values) {
            if v > 0.0 {
                blocks.push((v, t - prev));
            }
            prev = t;
        }
        blocks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut cuts = Vec::with_capacity(blocks.len());
        let mut values = Vec::with_capacity(blocks.len());
        let mut edge = 0.0;
        for (v, len) in blocks {
            edge += len;
            cuts.push(edge);
            values.push(v);
        }
        let mut f = StepFunction { cuts, values };
        f.canonicalize();
        DecreasingProfile::Step(f)
    }
}

impl RealFunction for StepFunction {
    fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        // right-continuous: t on a breakpoint belongs to the next piece
        let idx = self.cuts.partition_point(|&c| c <= t);
        if idx < self.values.len() {
            self.values[idx]
        } else {
            0.0
        }
    }

    fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&c, &v) in self.cuts.iter().zip(&self.values) {
            if t <= c {
                acc += v * (t - prev);
                return acc;
            }
            acc += v * (c - prev);
            prev = c;
        }
        acc
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.cuts.clone()
    }
}

// ---------------------------------------------------------------------------
// Decreasing profiles
// ---------------------------------------------------------------------------

/// Analytic decay piece t ↦ c·t^{-a}·(log t)^{-b} on (cut, upper) with the
/// continuous constant cap on (0, cut], and 0 beyond `upper` when truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDecay {
    pub scale: f64,
    pub power: f64,
    pub log_power: f64,
    pub cut: f64,
    pub upper: Option<f64>,
    cap: f64,
}

impl AnalyticDecay {
    pub fn new(scale: f64, power: f64, log_power: f64, cut: f64, upper: Option<f64>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument("decay scale must be positive".into()));
        }
        if power < 0.0 {
            return Err(Error::InvalidArgument("decay power must be nonnegative".into()));
        }
        if log_power != 0.0 && cut <= 1.0 {
            return Err(Error::InvalidArgument(
                "a log-power decay needs its cut above 1 so log t stays positive".into(),
            ));
        }
        if power > 0.0 && cut <= 0.0 {
            return Err(Error::InvalidArgument(
                "a power decay needs a positive cut for a finite cap".into(),
            ));
        }
        if let Some(u) = upper {
            if u < cut {
                return Err(Error::InvalidArgument("truncation must not precede the cut".into()));
            }
        }
        // monotone on (cut, ∞) iff a·log t + b >= 0 there; a >= 0 makes the
        // left side increasing, so the cut is the binding point
        if cut > 0.0 && power * cut.ln() + log_power < -1e-12 {
            return Err(Error::InvalidArgument(
                "decay parameters are increasing near the cut; not a decreasing profile".into(),
            ));
        }
        let cap = if cut > 0.0 {
            scale * cut.powf(-power) * ln_pow(cut, -log_power)
        } else {
            scale // power == 0 and log_power == 0 here
        };
        Ok(AnalyticDecay { scale, power, log_power, cut, upper, cap })
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    fn decay_at(&self, t: f64) -> f64 {
        self.scale * t.powf(-self.power) * ln_pow(t, -self.log_power)
    }

    /// ∫ of the decay expression over [x0, x1] ⊆ (cut, upper); closed form for
    /// the pure-power and the a = 1 families, quadrature otherwise.
    fn decay_integral(&self, x0: f64, x1: f64) -> f64 {
        if x1 <= x0 {
            return 0.0;
        }
        let (c, a, b) = (self.scale, self.power, self.log_power);
        if b == 0.0 {
            if a == 1.0 {
                return c * (x1 / x0).ln();
            }
            return c * (x1.powf(1.0 - a) - x0.powf(1.0 - a)) / (1.0 - a);
        }
        if a == 1.0 {
            let (l0, l1) = (x0.ln(), x1.ln());
            if b == 1.0 {
                return c * (l1.ln() - l0.ln());
            }
            return c * (l1.powf(1.0 - b) - l0.powf(1.0 - b)) / (1.0 - b);
        }
        let f = |t: f64| self.decay_at(t);
        quad::adaptive(&f, x0, x1, 1e-12, 1e-300).value
    }

    /// Whether the total integral over (cut, ∞) is finite (untruncated case).
    fn tail_converges(&self) -> bool {
        let (a, b) = (self.power, self.log_power);
        if a > 1.0 {
            true
        } else if a < 1.0 {
            false
        } else {
            b > 1.0
        }
    }

    /// ∫ of the decay expression over [x0, ∞), assuming it converges.
    fn tail_integral(&self, x0: f64) -> f64 {
        let (c, a, b) = (self.scale, self.power, self.log_power);
        if b == 0.0 && a > 1.0 {
            return c * x0.powf(1.0 - a) / (a - 1.0);
        }
        if a == 1.0 && b > 1.0 {
            return c * x0.ln().powf(1.0 - b) / (b - 1.0);
        }
        let f = |t: f64| self.decay_at(t);
        quad::upward_tail(&f, x0, 1e-12, 1e-300, 120).value
    }
}

fn ln_pow(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        t.ln().powf(e)
    }
}

/// A nonincreasing, right-continuous function on (0, ∞): what the norm
/// functionals consume in place of a general measurable f.
#[derive(Clone, Debug, PartialEq)]
pub enum DecreasingProfile {
    Step(StepFunction),
    Decay(AnalyticDecay),
    Sum(Vec<DecreasingProfile>),
    Scaled { factor: f64, inner: Box<DecreasingProfile> },
}

impl DecreasingProfile {
    pub fn step(f: StepFunction) -> Result<Self> {
        if !f.is_nonincreasing() {
            return Err(Error::InvalidArgument(
                "step profile must have nonincreasing values; rearrange first".into(),
            ));
        }
        Ok(DecreasingProfile::Step(f))
    }

    pub fn char_interval(s: f64) -> Self {
        DecreasingProfile::Step(StepFunction::new(vec![s], vec![1.0]).expect("valid char"))
    }

    pub fn decay(scale: f64, power: f64, log_power: f64, cut: f64, upper: Option<f64>) -> Result<Self> {
        Ok(DecreasingProfile::Decay(AnalyticDecay::new(scale, power, log_power, cut, upper)?))
    }

    pub fn sum(terms: Vec<DecreasingProfile>) -> Self {
        DecreasingProfile::Sum(terms)
    }

    pub fn scaled(factor: f64, inner: DecreasingProfile) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument("profile scale must be nonnegative".into()));
        }
        Ok(DecreasingProfile::Scaled { factor, inner: Box::new(inner) })
    }

    pub fn zero() -> Self {
        DecreasingProfile::Step(StepFunction::zero())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DecreasingProfile::Step(f) => f.is_zero(),
            DecreasingProfile::Decay(_) => false,
            DecreasingProfile::Sum(terms) => terms.iter().all(|p| p.is_zero()),
            DecreasingProfile::Scaled { factor, inner } => *factor == 0.0 || inner.is_zero(),
        }
    }

    /// Left limit at t (differs from eval only at step drops).
    pub fn eval_left(&self, t: f64) -> f64 {
        match self {
            DecreasingProfile::Step(f) => f.value_left(t),
            DecreasingProfile::Decay(d) => {
                if let Some(u) = d.upper {
                    if t == u {
                        return if u <= d.cut { d.cap() } else { d.decay_at(u) };
                    }
                }
                self.eval(t)
            }
            DecreasingProfile::Sum(terms) => terms.iter().map(|p| p.eval_left(t)).sum(),
            DecreasingProfile::Scaled { factor, inner } => factor * inner.eval_left(t),
        }
    }

    /// Supremum of the profile, attained at 0⁺.
    pub fn sup_value(&self) -> f64 {
        match self {
            DecreasingProfile::Step(f) => f.values().first().copied().unwrap_or(0.0),
            DecreasingProfile::Decay(d) => d.cap(),
            DecreasingProfile::Sum(terms) => terms.iter().map(|p| p.sup_value()).sum(),
            DecreasingProfile::Scaled { factor, inner } => factor * inner.sup_value(),
        }
    }

    /// End of support when finite.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            DecreasingProfile::Step(f) => Some(f.support_end()),
            DecreasingProfile::Decay(d) => d.upper,
            DecreasingProfile::Sum(terms) => {
                let mut end = 0.0f64;
                for p in terms {
                    end = end.max(p.support_end()?);
                }
                Some(end)
            }
            DecreasingProfile::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    Some(0.0)
                } else {
                    inner.support_end()
                }
            }
        }
    }

    /// Total integral with divergence classification.
    pub fn total_integral(&self) -> QuadResult {
        match self {
            DecreasingProfile::Step(f) => QuadResult::exact(f.integral()),
            DecreasingProfile::Decay(d) => {
                if let Some(u) = d.upper {
                    QuadResult::exact(self.primitive(u))
                } else if d.tail_converges() {
                    let x0 = d.cut.max(1.0) * 2.0;
                    let head = self.primitive(x0);
                    let tail = d.tail_integral(x0);
                    QuadResult {
                        value: head + tail,
                        abs_error: 1e-12 * (head + tail).abs(),
                        diverged: false,
                        pieces_used: 1,
                    }
                } else {
                    let horizon = d.cut.max(1.0) * 2f64.powi(60);
                    QuadResult::diverged(self.primitive(horizon), 0)
                }
            }
            DecreasingProfile::Sum(terms) => {
                let mut acc = QuadResult::exact(0.0);
                for p in terms {
                    acc = acc.combine(&p.total_integral());
                }
                acc
            }
            DecreasingProfile::Scaled { factor, inner } => {
                let r = inner.total_integral();
                QuadResult { value: factor * r.value, ..r }
            }
        }
    }
}

impl RealFunction for DecreasingProfile {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.sup_value();
        }
        match self {
            DecreasingProfile::Step(f) => f.eval(t),
            DecreasingProfile::Decay(d) => {
                if let Some(u) = d.upper {
                    if t >= u {
                        return 0.0;
                    }
                }
                if t <= d.cut {
                    d.cap()
                } else {
                    d.decay_at(t)
                }
            }
            DecreasingProfile::Sum(terms) => terms.iter().map(|p| p.eval(t)).sum(),
            DecreasingProfile::Scaled { factor, inner } => factor * inner.eval(t),
        }
    }

    fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            DecreasingProfile::Step(f) => f.primitive(t),
            DecreasingProfile::Decay(d) => {
                let x_end = match d.upper {
                    Some(u) => t.min(u),
                    None => t,
                };
                let cap_part = d.cap() * x_end.min(d.cut);
                let decay_part = if x_end > d.cut { d.decay_integral(d.cut, x_end) } else { 0.0 };
                cap_part + decay_part
            }
            DecreasingProfile::Sum(terms) => terms.iter().map(|p| p.primitive(t)).sum(),
            DecreasingProfile::Scaled { factor, inner } => factor * inner.primitive(t),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            DecreasingProfile::Step(f) => f.breakpoints(),
            DecreasingProfile::Decay(d) => {
                let mut out = Vec::new();
                if d.cut > 0.0 {
                    out.push(d.cut);
                }
                if let Some(u) = d.upper {
                    out.push(u);
                }
                out
            }
            DecreasingProfile::Sum(terms) => {
                let mut out: Vec<f64> = terms.iter().flat_map(|p| p.breakpoints()).collect();
                out.sort_by(|a, b| a.partial_cmp(b).unwrap());
                out.dedup();
                out
            }
            DecreasingProfile::Scaled { inner, .. } => inner.breakpoints(),
        }
    }
}

// ---------------------------------------------------------------------------
// Generic integration entry point
// ---------------------------------------------------------------------------

/// Integrate a nonnegative piecewise-smooth handle over (a, b), b possibly ∞,
/// with declared breakpoints and relative tolerance `tol`.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    breakpoints: &[f64],
    a: f64,
    b: f64,
    tol: f64,
    cfg: &RunConfig,
) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() || a < 0.0 || b <= a {
        return Err(Error::InvalidArgument(format!(
            "integration interval must satisfy 0 <= a < b, got [{a}, {b}]"
        )));
    }
    Ok(quad::integrate_full(f, breakpoints, a, b, tol, cfg.tol_abs, cfg.horizon_doublings))
}

// ---------------------------------------------------------------------------
// JSON function specs
// ---------------------------------------------------------------------------

/// Wire format for functions consumed by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionSpec {
    Step { breakpoints: Vec<f64>, values: Vec<f64> },
    Decay {
        c: f64,
        a: f64,
        b: f64,
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t1: Option<f64>,
    },
    Sum { terms: Vec<FunctionSpec> },
}

impl FunctionSpec {
    /// Build the decreasing profile the norms consume. Non-monotone step
    /// inputs are rearranged; sums of steps are summed exactly first.
    pub fn into_profile(self) -> Result<DecreasingProfile> {
        match self {
            FunctionSpec::Step { breakpoints, values } => {
                let f = StepFunction::new(breakpoints, values)?;
                if f.is_nonincreasing() {
                    Ok(DecreasingProfile::Step(f))
                } else {
                    Ok(f.rearrange())
                }
            }
            FunctionSpec::Decay { c, a, b, t0, t1 } => DecreasingProfile::decay(c, a, b, t0, t1),
            FunctionSpec::Sum { terms } => {
                let all_steps = terms.iter().all(|t| matches!(t, FunctionSpec::Step { .. }));
                if all_steps {
                    let mut acc = StepFunction::zero();
                    for t in terms {
                        if let FunctionSpec::Step { breakpoints, values } = t {
                            acc = acc.add(&StepFunction::new(breakpoints, values)?);
                        }
                    }
                    if acc.is_nonincreasing() {
                        Ok(DecreasingProfile::Step(acc))
                    } else {
                        Ok(acc.rearrange())
                    }
                } else {
                    // each term must be decreasing on its own; the sum then is
                    let parts: Result<Vec<_>> = terms.into_iter().map(|t| t.into_profile()).collect();
                    Ok(DecreasingProfile::Sum(parts?))
                }
            }
        }
    }
}
