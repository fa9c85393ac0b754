//! Checkers for the embedding and equality conditions between the Λ and Γ
//! scales, plus the witness families that exhibit strict inclusions.
//!
//! Two-sided functional conditions (the sandwich condition and the Γ¹
//! equivalence) report Holds or Fails: those conditions are equivalent to
//! the embeddings they encode, so a stable two-sided constant is a verdict.
//! Norm-ratio scans over witness families only ever report Evidence;
//! strictness of an inclusion is never concluded from sampling alone.

use serde::Serialize;

use crate::config::RunConfig;
use crate::constructions::verify_wq_identity;
use crate::norms;
use crate::quad;
use crate::realfun::{DecreasingProfile, RealFunction, StepFunction};
use crate::weights::Weight;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingVerdict {
    pub relation: String,
    pub status: EmbeddingStatus,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EmbeddingStatus {
    Holds { lower: f64, upper: f64 },
    Fails { witness_r: f64, detail: String },
    Evidence(EvidenceReport),
}

impl EmbeddingVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.status, EmbeddingStatus::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self.status, EmbeddingStatus::Fails { .. })
    }

    pub fn constants(&self) -> Option<(f64, f64)> {
        match &self.status {
            EmbeddingStatus::Holds { lower, upper } => Some((*lower, *upper)),
            _ => None,
        }
    }

    pub fn evidence(&self) -> Option<&EvidenceReport> {
        match &self.status {
            EmbeddingStatus::Evidence(e) => Some(e),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Two-sided functional conditions
// ---------------------------------------------------------------------------

/// Sandwich condition W^q(r) ≈ V(r) + r^q·∫_r^∞ v(x)/x^q dx, encoding
/// Λ¹(w) ⊂ Γ^q(v) ⊂ Γ^{1,∞}(w) for decreasing w.
pub fn check_sandwich(w: &Weight, v: &Weight, q: f64, cfg: &RunConfig) -> Result<EmbeddingVerdict> {
    if q.is_nan() || q <= 1.0 {
        return Err(Error::InvalidArgument("the sandwich condition needs q > 1".into()));
    }
    if !w.sampled_decreasing() {
        return Err(Error::Precondition("the sandwich condition is stated for decreasing weights".into()));
    }
    Ok(two_sided_verdict("sandwich", cfg, &|c| {
        let rep = verify_wq_identity(w, v, q, c);
        (rep.lower, rep.upper, rep.divergent_at)
    }))
}

/// Γ¹-equivalence condition W(r)/r ≈ V(r)/r + ∫_r^∞ v(s)/s ds, encoding
/// Λ¹(w) = Γ¹(v).
pub fn check_gamma1_equivalence(w: &Weight, v: &Weight, cfg: &RunConfig) -> Result<EmbeddingVerdict> {
    Ok(two_sided_verdict("gamma1-equivalence", cfg, &|c| {
        scan_gamma1(w, v, c)
    }))
}

/// Ratio samples (r, [W(r)/r] / S(S*v)(r)) on the configured grid, for
/// inspection and CSV export.
pub fn gamma1_ratio_samples(w: &Weight, v: &Weight, cfg: &RunConfig) -> Vec<(f64, f64)> {
    gamma1_scan_detail(w, v, cfg).3
}

fn scan_gamma1(w: &Weight, v: &Weight, cfg: &RunConfig) -> (f64, f64, Option<f64>) {
    let (lo, hi, div, _) = gamma1_scan_detail(w, v, cfg);
    (lo, hi, div)
}

fn gamma1_scan_detail(
    w: &Weight,
    v: &Weight,
    cfg: &RunConfig,
) -> (f64, f64, Option<f64>, Vec<(f64, f64)>) {
    let grid = cfg.grid();
    let n = grid.len();
    let tol = cfg.tol_rel.min(1e-12);
    let v_bps = v.breakpoints();
    let v_eval = |s: f64| v.eval(s);
    let v_over_s = |s: f64| v.eval(s) / s;

    let mut prefix = vec![0.0f64; n];
    prefix[0] = quad::integrate_full(&v_eval, &v_bps, 0.0, grid[0], tol, cfg.tol_abs, cfg.horizon_doublings).value;
    for i in 1..n {
        prefix[i] = prefix[i - 1]
            + quad::adaptive_split(&v_eval, &v_bps, grid[i - 1], grid[i], tol, cfg.tol_abs).value;
    }
    let mut suffix = vec![0.0f64; n];
    let tail = quad::upward_tail(&v_over_s, grid[n - 1], tol, cfg.tol_abs, cfg.horizon_doublings);
    let mut divergent_at = if tail.diverged { Some(grid[n - 1]) } else { None };
    suffix[n - 1] = tail.value;
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i + 1]
            + quad::adaptive_split(&v_over_s, &v_bps, grid[i], grid[i + 1], tol, cfg.tol_abs).value;
    }

    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let r = grid[i];
        let lhs = w.primitive(r) / r;
        let rhs = prefix[i] / r + suffix[i];
        if rhs <= 0.0 {
            if lhs > 0.0 && divergent_at.is_none() {
                divergent_at = Some(r);
            }
            continue;
        }
        let ratio = lhs / rhs;
        lower = lower.min(ratio);
        upper = upper.max(ratio);
        samples.push((r, ratio));
    }
    if !lower.is_finite() {
        lower = 0.0;
    }
    (lower, upper, divergent_at, samples)
}

/// (lower, upper, first divergent grid point).
type TwoSidedScan = (f64, f64, Option<f64>);

/// Shared Holds/Fails protocol: scan on the base grid, then re-scan with the
/// range extended; the verdict holds when both constants are finite, positive
/// and stable under the extension.
fn two_sided_verdict(
    relation: &str,
    cfg: &RunConfig,
    scan: &dyn Fn(&RunConfig) -> TwoSidedScan,
) -> EmbeddingVerdict {
    let (lo0, hi0, div0) = scan(cfg);
    if let Some(r) = div0 {
        return EmbeddingVerdict {
            relation: relation.into(),
            status: EmbeddingStatus::Fails {
                witness_r: r,
                detail: "tail integral fails to stabilize".into(),
            },
        };
    }
    let ext = cfg.refinement_extension.sqrt();
    let wider = cfg.clone().with_grid(cfg.grid_min / ext, cfg.grid_max * ext);
    let (lo1, hi1, div1) = scan(&wider);
    if let Some(r) = div1 {
        return EmbeddingVerdict {
            relation: relation.into(),
            status: EmbeddingStatus::Fails {
                witness_r: r,
                detail: "tail integral fails to stabilize".into(),
            },
        };
    }
    let margin = 1.0 + cfg.stability_margin;
    let stable = lo0 > 0.0
        && hi0.is_finite()
        && lo1 >= lo0 / margin
        && hi1 <= hi0 * margin;
    if stable {
        EmbeddingVerdict {
            relation: relation.into(),
            status: EmbeddingStatus::Holds { lower: lo0.min(lo1), upper: hi0.max(hi1) },
        }
    } else {
        let (witness_r, detail) = if lo1 < lo0 / margin || lo0 <= 0.0 {
            (cfg.grid_max * ext, format!("lower constant drifts to {lo1:.3e} under extension"))
        } else {
            (cfg.grid_min / ext, format!("upper constant drifts to {hi1:.3e} under extension"))
        };
        EmbeddingVerdict {
            relation: relation.into(),
            status: EmbeddingStatus::Fails { witness_r, detail },
        }
    }
}

// ---------------------------------------------------------------------------
// Norm-ratio evidence over witness families
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum SpaceKind {
    Lambda { p: f64 },
    LambdaWeak { p: f64 },
    Gamma { p: f64, q: f64 },
    GammaWeak { p: f64 },
    GammaAlpha { p: f64, alpha: f64 },
}

impl SpaceKind {
    /// Exponent of the root in the functional; used to linearize ratio fits.
    fn root_exponent(&self) -> f64 {
        match self {
            SpaceKind::Gamma { q, .. } => *q,
            SpaceKind::Lambda { p }
            | SpaceKind::LambdaWeak { p }
            | SpaceKind::GammaWeak { p }
            | SpaceKind::GammaAlpha { p, .. } => *p,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormSpec {
    pub space: SpaceKind,
    pub weight: Weight,
}

impl NormSpec {
    pub fn eval(&self, f: &DecreasingProfile, cfg: &RunConfig) -> norms::NormValue {
        match self.space {
            SpaceKind::Lambda { p } => norms::lambda_norm(f, &self.weight, p, cfg),
            SpaceKind::LambdaWeak { p } => norms::lambda_weak_norm(f, &self.weight, p, cfg),
            SpaceKind::Gamma { p, q } => norms::gamma_norm(f, &self.weight, p, q, cfg),
            SpaceKind::GammaWeak { p } => norms::gamma_weak_norm(f, &self.weight, p, cfg),
            SpaceKind::GammaAlpha { p, alpha } => {
                norms::gamma_alpha_norm(f, &self.weight, p, alpha, cfg)
            }
        }
    }
}

/// Parameterized profile families used as embedding witnesses.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum WitnessFamily {
    /// χ₍₀,s₎ over geometric scales.
    Chars { scales: Vec<f64> },
    /// Mass-one spikes s·χ₍₀,1/s₎ concentrating at 0.
    Spikes { scales: Vec<f64> },
    /// Cap 1 up to a, then a/x out to s·a.
    HyperbolicTails { a: f64, scales: Vec<f64> },
    /// Dyadic staircase tracking the primitive of t ↦ t/W(t) for the source
    /// weight; saturates the maximal-function supremum while its plain
    /// integral against w grows.
    SaturatingStaircase { pieces: Vec<usize> },
}

/// The default geometric parameter ladder 2, 4, ..., 2^20.
pub fn geometric_scales() -> Vec<f64> {
    (1..=20).map(|k| 2f64.powi(k)).collect()
}

impl WitnessFamily {
    fn members(&self, weight_hint: &Weight) -> Result<Vec<(f64, DecreasingProfile)>> {
        match self {
            WitnessFamily::Chars { scales } => scales
                .iter()
                .map(|&s| Ok((s, DecreasingProfile::char_interval(s))))
                .collect(),
            WitnessFamily::Spikes { scales } => scales
                .iter()
                .map(|&s| {
                    let f = StepFunction::new(vec![1.0 / s], vec![s])?;
                    Ok((s, DecreasingProfile::step(f)?))
                })
                .collect(),
            WitnessFamily::HyperbolicTails { a, scales } => scales
                .iter()
                .map(|&s| Ok((s, hyperbolic_tail_witness(*a, s)?)))
                .collect(),
            WitnessFamily::SaturatingStaircase { pieces } => pieces
                .iter()
                .map(|&n| Ok((2f64.powi(n as i32), saturating_staircase(weight_hint, n)?)))
                .collect(),
        }
    }
}

/// Staircase profile on dyadic pieces of (2^{-n}, 1] whose primitive tracks
/// P(t) = t/W(t), so that f** ≈ 1/W stays bounded against W.
fn saturating_staircase(w: &Weight, n: usize) -> Result<DecreasingProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("staircase needs at least one piece".into()));
    }
    let p_of = |t: f64| {
        let big = w.primitive(t);
        if big > 0.0 {
            t / big
        } else {
            0.0
        }
    };
    // piece k lives on [2^{-(k+1)}, 2^{-k})
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let hi = 2f64.powi(-(k as i32));
        let lo = hi / 2.0;
        let v = (p_of(hi) - p_of(lo)).max(0.0) / (hi - lo);
        values.push(v);
    }
    // enforce monotonicity in case the primitive surrogate is not concave
    for k in 1..n {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    let cuts: Vec<f64> = (0..n).rev().map(|k| 2f64.powi(-(k as i32))).collect();
    values.reverse();
    let f = StepFunction::new(cuts, values)?;
    DecreasingProfile::step(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub model: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Natural log of the family parameter at which the fitted model reaches
    /// the threshold (kept in log space: the crossing is often far beyond
    /// floating-point range).
    pub crossing_ln_param: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceReport {
    pub params: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub threshold: f64,
    /// The observed supremum itself crossed the threshold.
    pub observed_crossing: bool,
    pub fit: Option<GrowthFit>,
    /// Strictness demonstrated: observed crossing, or a clean growth fit
    /// whose extrapolation crosses the threshold at a finite parameter.
    pub demonstrated: bool,
    /// The ratios stabilized along the family.
    pub bounded_evidence: bool,
}

fn linear_regression(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((slope, intercept, r2))
}

fn best_growth_fit(params: &[f64], ratios: &[f64], root: f64, threshold: f64) -> Option<GrowthFit> {
    if ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return None;
    }
    // (model name, abscissae, transformed ratios, recover ln(s) at threshold)
    type FitCandidate = (String, Vec<f64>, Vec<f64>, Box<dyn Fn(f64, f64) -> f64>);
    let ln_s: Vec<f64> = params.iter().map(|s| s.ln()).collect();
    let lnln_s: Vec<f64> = params.iter().map(|s| s.ln().ln()).collect();
    // each model linearizes the ratios against a transformed abscissa; the
    // closure recovers ln(s) where the fitted line meets the threshold
    let mut candidates: Vec<FitCandidate> = vec![
        (
            "power".into(),
            ln_s.clone(),
            ratios.iter().map(|r| r.ln()).collect(),
            Box::new(move |a, b| (threshold.ln() - b) / a),
        ),
        (
            "log".into(),
            ln_s.clone(),
            ratios.to_vec(),
            Box::new(move |a, b| (threshold - b) / a),
        ),
        (
            "log-log".into(),
            lnln_s,
            ratios.to_vec(),
            Box::new(move |a, b| ((threshold - b) / a).exp()),
        ),
    ];
    if (root - 1.0).abs() > 1e-12 {
        let powered: Vec<f64> = ratios.iter().map(|r| r.powf(root)).collect();
        let thr = threshold.powf(root);
        candidates.push((
            format!("ratio^{root:.3}-log"),
            ln_s,
            powered,
            Box::new(move |a, b| (thr - b) / a),
        ));
    }
    let mut best: Option<GrowthFit> = None;
    for (model, xs, ys, crossing_ln) in candidates {
        if let Some((slope, intercept, r2)) = linear_regression(&xs, &ys) {
            if slope <= 0.0 {
                continue;
            }
            let better = best.as_ref().map(|b| r2 > b.r2).unwrap_or(true);
            if better {
                let cp = crossing_ln(slope, intercept);
                best = Some(GrowthFit {
                    model,
                    slope,
                    intercept,
                    r2,
                    crossing_ln_param: if cp.is_finite() { Some(cp) } else { None },
                });
            }
        }
    }
    best
}

/// Sup of target-norm over source-norm along a witness family, with growth
/// fitting and the honest Evidence vocabulary.
pub fn norm_ratio_evidence(
    source: &NormSpec,
    target: &NormSpec,
    family: &WitnessFamily,
    cfg: &RunConfig,
) -> Result<EmbeddingVerdict> {
    let members = family.members(&source.weight)?;
    if members.is_empty() {
        return Err(Error::InvalidArgument("witness family is empty".into()));
    }
    let mut params = Vec::with_capacity(members.len());
    let mut ratios = Vec::with_capacity(members.len());
    for (s, f) in &members {
        let ns = source.eval(f, cfg);
        let nt = target.eval(f, cfg);
        if ns.diverged || ns.value <= 0.0 {
            continue;
        }
        let ratio = if nt.diverged && nt.value.is_infinite() {
            f64::INFINITY
        } else {
            nt.value / ns.value
        };
        params.push(*s);
        ratios.push(ratio);
    }
    if ratios.is_empty() {
        return Err(Error::InvalidArgument(
            "no family member produced a finite source norm".into(),
        ));
    }
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let threshold = cfg.blow_up_threshold;
    let observed_crossing = sup_ratio >= threshold;
    let root = target.space.root_exponent();
    let fit = best_growth_fit(&params, &ratios, root, threshold);
    // every candidate model is unbounded, so a clean positive-slope fit
    // extrapolates to a threshold crossing at some finite parameter
    let extrapolated = fit
        .as_ref()
        .map(|f| f.r2 >= 0.99 && f.slope > 0.0)
        .unwrap_or(false);
    let demonstrated = observed_crossing || extrapolated;
    let n = ratios.len();
    let bounded_evidence = !demonstrated
        && n >= 2
        && (ratios[n - 1] / ratios[n - 2] - 1.0).abs() < 0.01;
    Ok(EmbeddingVerdict {
        relation: "norm-ratio".into(),
        status: EmbeddingStatus::Evidence(EvidenceReport {
            params,
            ratios,
            sup_ratio,
            threshold,
            observed_crossing,
            fit,
            demonstrated,
            bounded_evidence,
        }),
    })
}

// ---------------------------------------------------------------------------
// Witness profiles
// ---------------------------------------------------------------------------

/// Profile equal to 1 on (0, a], a/x on (a, s·a], 0 beyond.
pub fn hyperbolic_tail_witness(a: f64, s: f64) -> Result<DecreasingProfile> {
    if !(a > 0.0 && s >= 1.0) {
        return Err(Error::InvalidArgument("hyperbolic witness needs a > 0 and s >= 1".into()));
    }
    DecreasingProfile::decay(a, 1.0, 0.0, a, Some(a * s))
}

/// Profile equal to e^{-1} on (0, e], t^{-1}·(log t)^{-1/α} beyond; bounded,
/// decreasing, continuous at the joint.
pub fn log_decay_witness(alpha: f64) -> Result<DecreasingProfile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("log-decay witness needs 0 < alpha < 1".into()));
    }
    DecreasingProfile::decay(1.0, 1.0, 1.0 / alpha, std::f64::consts::E, None)
}

/// Partial plain integral of the log-decay witness under the unit weight:
/// ∫₀^T f*, in closed form.
pub fn log_decay_l1_partial(alpha: f64, horizon: f64) -> Result<f64> {
    Ok(log_decay_witness(alpha)?.primitive(horizon))
}

/// Partial interpolated functional ∫_e^T (f*)^α·(f**)^{1-α} dt of the
/// log-decay witness under the unit weight, evaluated through the log
/// substitution so huge horizons need no raw quadrature.
pub fn log_decay_interpolated_partial(alpha: f64, horizon: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("need 0 < alpha < 1".into()));
    }
    if horizon <= std::f64::consts::E {
        return Ok(0.0);
    }
    let b = 1.0 / alpha;
    // in u = log t the integrand is P(u)^{1-α}/u with
    // P(u) = 1 + (1 - u^{1-b})/(b - 1) the running integral of f*
    let integrand = |u: f64| {
        let p_run = 1.0 + (1.0 - u.powf(1.0 - b)) / (b - 1.0);
        p_run.powf(1.0 - alpha) / u
    };
    Ok(quad::adaptive(&integrand, 1.0, horizon.ln(), 1e-12, 1e-300).value)
}
