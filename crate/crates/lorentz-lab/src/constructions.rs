//! Constructive core: the derived weight w_q whose two-part functional
//! reproduces W^q, and the equivalent-norm case split for Λ¹(w).
//!
//! For a C¹ decreasing weight vanishing at infinity the construction
//! w_q(r) = -r^q·(W^{q-1}w/x^{q-1})'(r) satisfies the exact telescoping
//! identity ∫₀^r w_q + r^q·∫_r^∞ w_q/x^q = W^q(r), so the verification
//! constants are 1 up to quadrature error. Rougher weights are smoothed
//! first (once if continuous, twice in general), which distorts the
//! constants by at most 2^{depth·q} on each side.

use serde::Serialize;

use crate::classes::GridMeta;
use crate::config::RunConfig;
use crate::embeddings::{self, EmbeddingVerdict};
use crate::quad;
use crate::realfun::RealFunction;
use crate::weights::{
    self, limit_at_infinity, smooth_depth, DerivedWq, LimitProbe, Smoothness, TabulatedWeight,
    Weight,
};
use crate::{Error, Result};

/// Two-sided constants bounding a ratio of two functionals over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    /// First grid point whose tail integral failed to stabilize, if any.
    pub divergent_at: Option<f64>,
    /// (r, ratio) samples kept for audit.
    pub samples: Vec<(f64, f64)>,
    pub grid: GridMeta,
}

impl EquivalenceReport {
    pub fn spread(&self) -> f64 {
        if self.lower > 0.0 {
            self.upper / self.lower
        } else {
            f64::INFINITY
        }
    }
}

/// Outcome of the w_q construction.
#[derive(Clone, Debug)]
pub struct WqResult {
    pub q: f64,
    pub source: Weight,
    pub produced: Weight,
    /// Smoothing passes applied before differentiating (0 for C¹ sources).
    pub depth: u8,
    /// Fraction of audit-grid points where negative round-off was clamped.
    pub clamped_fraction: f64,
    pub verification: EquivalenceReport,
}

impl WqResult {
    /// Materialized view for export.
    pub fn tabulated(&self, cfg: &RunConfig) -> Result<TabulatedWeight> {
        weights::materialize_tabulated(&self.produced, cfg)
    }
}

fn smoothing_depth_for(w: &Weight) -> u8 {
    match w.smoothness() {
        Smoothness::C1 => 0,
        Smoothness::Continuous => 1,
        Smoothness::Rough => 2,
    }
}

fn derived_weight(w: &Weight, q: f64) -> Result<(Weight, u8)> {
    let depth = smoothing_depth_for(w);
    let base = if depth == 0 { w.clone() } else { smooth_depth(w, depth)? };
    Ok((Weight::DerivedWq(DerivedWq::new(base, q)?), depth))
}

/// Builds w_q for a decreasing weight with w(∞) = 0 and verifies the
/// two-part identity against W^q on the configured grid.
pub fn build_wq(w: &Weight, q: f64, cfg: &RunConfig) -> Result<WqResult> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("the construction needs 1 <= q < ∞, got {q}")));
    }
    match limit_at_infinity(w) {
        LimitProbe::Inconclusive => {
            return Err(Error::Precondition(
                "the construction requires a decreasing weight".into(),
            ))
        }
        LimitProbe::Value(v) if v > cfg.zero_limit_threshold => {
            return Err(Error::Precondition(format!(
                "the construction requires a weight vanishing at infinity; observed w(∞) ≈ {v:.3e}"
            )));
        }
        LimitProbe::Value(_) => {}
    }
    let (produced, depth) = derived_weight(w, q)?;

    // audit the nonnegativity clamp: positivity is exact in exact arithmetic,
    // so clamped points measure numerical error of the differentiation
    let derived = match &produced {
        Weight::DerivedWq(d) => d,
        _ => unreachable!(),
    };
    let base = derived.source();
    let grid = cfg.grid();
    let mut clamped = 0usize;
    for &r in &grid {
        let raw = derived.raw_eval(r);
        if raw < 0.0 {
            let scale = base.primitive(r).powf(q) / r;
            if raw < -1e-8 * scale.max(1e-300) {
                clamped += 1;
            }
        }
    }
    let clamped_fraction = clamped as f64 / grid.len() as f64;
    if clamped_fraction > 0.01 {
        return Err(Error::Construction(format!(
            "derived weight has {:.1}% clamped negative excursions; differentiation accuracy failure",
            100.0 * clamped_fraction
        )));
    }

    let verification = verify_wq_identity(w, &produced, q, cfg);
    Ok(WqResult { q, source: w.clone(), produced, depth, clamped_fraction, verification })
}

/// The same construction with the hypothesis checks and verification skipped;
/// used to produce candidate weights for negative tests.
pub fn build_wq_unchecked(w: &Weight, q: f64) -> Result<Weight> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("the construction needs 1 <= q < ∞, got {q}")));
    }
    Ok(derived_weight(w, q)?.0)
}

/// Checks W^q(r) against ∫₀^r v + r^q·∫_r^∞ v(x)/x^q dx over the configured
/// log grid, by one prefix/suffix accumulation pass.
pub fn verify_wq_identity(w: &Weight, v: &Weight, q: f64, cfg: &RunConfig) -> EquivalenceReport {
    let grid = cfg.grid();
    let n = grid.len();
    let tol = cfg.tol_rel.min(1e-12);
    let v_bps = v.breakpoints();
    let v_eval = |s: f64| v.eval(s);
    let v_kernel = |s: f64| v.eval(s) * s.powf(-q);

    // prefix ∫₀^{r_i} v
    let mut prefix = vec![0.0f64; n];
    let head = quad::integrate_full(&v_eval, &v_bps, 0.0, grid[0], tol, cfg.tol_abs, cfg.horizon_doublings);
    prefix[0] = head.value;
    for i in 1..n {
        prefix[i] = prefix[i - 1] + quad::adaptive_split(&v_eval, &v_bps, grid[i - 1], grid[i], tol, cfg.tol_abs).value;
    }

    // suffix ∫_{r_i}^∞ v/x^q
    let mut suffix = vec![0.0f64; n];
    let tail = quad::upward_tail(&v_kernel, grid[n - 1], tol, cfg.tol_abs, cfg.horizon_doublings);
    let divergent_at = if tail.diverged { Some(grid[n - 1]) } else { None };
    suffix[n - 1] = tail.value;
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1] + quad::adaptive_split(&v_kernel, &v_bps, grid[i], grid[i + 1], tol, cfg.tol_abs).value;
    }

    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let r = grid[i];
        let target = w.primitive(r).powf(q);
        if target <= 0.0 {
            continue;
        }
        let ratio = (prefix[i] + r.powf(q) * suffix[i]) / target;
        lower = lower.min(ratio);
        upper = upper.max(ratio);
        samples.push((r, ratio));
    }
    if samples.is_empty() {
        lower = 0.0;
    }
    let pass = divergent_at.is_none() && lower > 0.0 && upper.is_finite();
    EquivalenceReport {
        lower,
        upper,
        pass,
        divergent_at,
        samples,
        grid: GridMeta {
            min: cfg.grid_min,
            max: cfg.grid_max,
            points_per_decade: cfg.points_per_decade,
            refinement_rounds: 0,
        },
    }
}

// ---------------------------------------------------------------------------
// The Λ¹ equivalent-norm case split
// ---------------------------------------------------------------------------

/// Which equivalent norm Λ¹(w) admits in terms of the maximal function.
#[derive(Debug)]
pub enum Lambda1Case {
    /// w(∞) = 0: Λ¹(w) matches the maximal-function norm built from v = w₁.
    MaximalNorm { construction: WqResult, equivalence: EmbeddingVerdict },
    /// w(∞) > 0 and w bounded: Λ¹(w) is L¹, normed by sup t·f**(t).
    LebesgueL1,
    /// w(∞) > 0 and w unbounded: intersection of the v-norm (from u = w - w(∞))
    /// with L¹.
    MaximalNormIntersectL1 {
        subtracted_limit: f64,
        construction: WqResult,
        equivalence: EmbeddingVerdict,
    },
}

impl Lambda1Case {
    pub fn label(&self) -> &'static str {
        match self {
            Lambda1Case::MaximalNorm { .. } => "maximal-norm",
            Lambda1Case::LebesgueL1 => "lebesgue-l1",
            Lambda1Case::MaximalNormIntersectL1 { .. } => "maximal-norm-intersect-l1",
        }
    }
}

/// Structurally remove the constant part matching the limit at infinity.
fn subtract_limit(w: &Weight, limit: f64) -> Option<Weight> {
    match w {
        Weight::Const { level } => {
            if (level - limit).abs() <= 1e-6 * level.max(1e-300) {
                Some(Weight::Const { level: 0.0 })
            } else {
                None
            }
        }
        Weight::Sum(terms) => {
            let mut consts = 0.0;
            let mut rest = Vec::new();
            for t in terms {
                match t {
                    Weight::Const { level } => consts += level,
                    other => rest.push(other.clone()),
                }
            }
            if (consts - limit).abs() <= 1e-6 * consts.max(1e-300) {
                match rest.len() {
                    0 => Some(Weight::Const { level: 0.0 }),
                    1 => Some(rest.pop().unwrap()),
                    _ => Some(Weight::Sum(rest)),
                }
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Three-way split on (w(∞), boundedness of w) deciding the equivalent norm
/// of Λ¹(w) in terms of the maximal function.
pub fn lambda1_equivalent_norm(w: &Weight, cfg: &RunConfig) -> Result<Lambda1Case> {
    let winf = match limit_at_infinity(w) {
        LimitProbe::Inconclusive => {
            return Err(Error::Precondition(
                "the case split is stated for decreasing weights".into(),
            ))
        }
        LimitProbe::Value(v) => v,
    };
    if winf <= cfg.zero_limit_threshold {
        let construction = build_wq(w, 1.0, cfg)?;
        let equivalence = embeddings::check_gamma1_equivalence(w, &construction.produced, cfg)?;
        return Ok(Lambda1Case::MaximalNorm { construction, equivalence });
    }
    if !w.unbounded_near_zero() {
        return Ok(Lambda1Case::LebesgueL1);
    }
    let u = subtract_limit(w, winf).ok_or_else(|| {
        Error::Construction(format!(
            "cannot structurally subtract w(∞) ≈ {winf:.3e} from this weight representation"
        ))
    })?;
    let construction = build_wq(&u, 1.0, cfg)?;
    let equivalence = embeddings::check_gamma1_equivalence(&u, &construction.produced, cfg)?;
    Ok(Lambda1Case::MaximalNormIntersectL1 { subtracted_limit: winf, construction, equivalence })
}

/// The explicit equivalent-norm generator for w = χ₍₀,₁₎:
/// v(t) = t^{-2}·( log(4t)·χ₍₁/₄,₁/₂₎(t) - log t·χ₍₁/₂,₁₎(t) ).
pub fn char01_equivalent_v() -> Weight {
    let first = Weight::log_poly(vec![4f64.ln(), 1.0], -2.0, 0.25, 0.5)
        .expect("valid on (1/4, 1/2)");
    let second = Weight::log_poly(vec![0.0, -1.0], -2.0, 0.5, 1.0).expect("valid on (1/2, 1)");
    Weight::sum(vec![first, second])
}
