//! Named, reproducible scenarios pinning down the concrete examples,
//! counterexamples and dichotomies the library is built to exhibit.
//!
//! The registry ships as a JSON data file; every scenario is deterministic
//! for a fixed config and records the intermediate certificates it produced.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classes;
use crate::config::{log_grid, RunConfig};
use crate::constructions::{build_wq, char01_equivalent_v};
use crate::embeddings::{self, geometric_scales, NormSpec, SpaceKind, WitnessFamily};
use crate::norms;
use crate::realfun::FunctionSpec;
use crate::weights::WeightSpec;
use crate::{Error, Result};

const REGISTRY: &str = include_str!("../data/gallery.json");

// ---------------------------------------------------------------------------
// Registry schema
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub space: String,
    pub p: f64,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl SpaceSpec {
    fn kind(&self) -> Result<SpaceKind> {
        let k = match self.space.as_str() {
            "lambda" => SpaceKind::Lambda { p: self.p },
            "lambda-weak" => SpaceKind::LambdaWeak { p: self.p },
            "gamma" => SpaceKind::Gamma {
                p: self.p,
                q: self.q.ok_or_else(|| Error::Parse("gamma space needs q".into()))?,
            },
            "gamma-weak" => SpaceKind::GammaWeak { p: self.p },
            "gamma-alpha" => SpaceKind::GammaAlpha {
                p: self.p,
                alpha: self.alpha.ok_or_else(|| Error::Parse("gamma-alpha needs alpha".into()))?,
            },
            other => return Err(Error::Parse(format!("unknown space {other}"))),
        };
        Ok(k)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Chars {
        #[serde(default)]
        scales: Option<Vec<f64>>,
    },
    Spikes {
        #[serde(default)]
        scales: Option<Vec<f64>>,
    },
    HyperbolicTails {
        #[serde(default = "one")]
        a: f64,
        #[serde(default)]
        scales: Option<Vec<f64>>,
    },
    SaturatingStaircase {
        #[serde(default)]
        pieces: Option<Vec<usize>>,
    },
}

fn one() -> f64 {
    1.0
}

impl FamilySpec {
    fn family(&self) -> WitnessFamily {
        match self {
            FamilySpec::Chars { scales } => WitnessFamily::Chars {
                scales: scales.clone().unwrap_or_else(geometric_scales),
            },
            FamilySpec::Spikes { scales } => WitnessFamily::Spikes {
                scales: scales.clone().unwrap_or_else(geometric_scales),
            },
            FamilySpec::HyperbolicTails { a, scales } => WitnessFamily::HyperbolicTails {
                a: *a,
                scales: scales.clone().unwrap_or_else(geometric_scales),
            },
            FamilySpec::SaturatingStaircase { pieces } => WitnessFamily::SaturatingStaircase {
                pieces: pieces.clone().unwrap_or_else(|| (8..=27).collect()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "v-kind", rename_all = "kebab-case")]
pub enum VSource {
    /// The built-in explicit generator for the unit block weight.
    Explicit,
    Spec { spec: WeightSpec },
    BuildWq { q: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckSpec {
    Certify {
        class: String,
        p: f64,
        weight: WeightSpec,
        expect: String,
        #[serde(default)]
        constant_range: Option<(f64, f64)>,
        #[serde(default)]
        min_witness_ratio: Option<f64>,
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default)]
        grid_min: Option<f64>,
        #[serde(default)]
        grid_max: Option<f64>,
    },
    NormStatus {
        space: String,
        p: f64,
        #[serde(default)]
        q: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
        weight: WeightSpec,
        function: FunctionSpec,
        expect_diverged: bool,
        #[serde(default)]
        value_range: Option<(f64, f64)>,
    },
    /// Constant-1 chain sup f**·W <= ∫ f*·w <= ∫ f**·w on seeded decreasing
    /// steps (decreasing weight).
    NormChainSample { weight: WeightSpec, samples: usize },
    RatioEvidence {
        source: SpaceSpec,
        target: SpaceSpec,
        weight: WeightSpec,
        family: FamilySpec,
        expect: String,
    },
    Gamma1Equivalence {
        weight: WeightSpec,
        v: VSource,
        expect_holds: bool,
        #[serde(default)]
        lower_range: Option<(f64, f64)>,
        #[serde(default)]
        upper_range: Option<(f64, f64)>,
    },
    WqIdentity { weight: WeightSpec, qs: Vec<f64>, tol: f64 },
    AdjudicateB1 {
        candidates: Vec<WeightSpec>,
        expect_member_count: usize,
        expect_member_index: usize,
    },
    LogDecayGap {
        alpha: f64,
        cauchy_from: f64,
        cauchy_to: f64,
        cauchy_tol: f64,
        fit_horizons: Vec<f64>,
        r2_min: f64,
    },
}

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub kind: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutcome {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GallerySummary {
    pub total: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub outcomes: Vec<ScenarioOutcome>,
}

pub fn registry() -> Result<Vec<ScenarioSpec>> {
    serde_json::from_str(REGISTRY).map_err(|e| Error::Parse(format!("gallery registry: {e}")))
}

/// Run one scenario by id.
pub fn run(id: &str, cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let scenarios = registry()?;
    let spec = scenarios
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))?;
    run_scenario(&spec, cfg)
}

/// Run every registered scenario (optionally filtered by tag), sorted by id.
pub fn run_all(tag_filter: Option<&str>, cfg: &RunConfig) -> Result<GallerySummary> {
    let mut scenarios = registry()?;
    scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    let mut outcomes = Vec::new();
    for s in &scenarios {
        if let Some(tag) = tag_filter {
            let tag = tag.to_ascii_lowercase();
            if !s.tags.iter().any(|t| t.to_ascii_lowercase() == tag) {
                continue;
            }
        }
        outcomes.push(run_scenario(s, cfg)?);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    Ok(GallerySummary { total: outcomes.len(), failed, all_passed: failed == 0, outcomes })
}

fn run_scenario(spec: &ScenarioSpec, cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let mut checks = Vec::with_capacity(spec.checks.len());
    for c in &spec.checks {
        checks.push(run_check(c, cfg)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ScenarioOutcome {
        id: spec.id.clone(),
        description: spec.description.clone(),
        passed,
        checks,
    })
}

fn in_range(x: f64, range: &Option<(f64, f64)>) -> bool {
    match range {
        Some((lo, hi)) => x >= *lo && x <= *hi,
        None => true,
    }
}

fn run_check(check: &CheckSpec, cfg: &RunConfig) -> Result<CheckOutcome> {
    match check {
        CheckSpec::Certify {
            class,
            p,
            weight,
            expect,
            constant_range,
            min_witness_ratio,
            threshold,
            grid_min,
            grid_max,
        } => {
            let w = weight.clone().into_weight()?;
            let mut local = cfg.clone();
            if let Some(t) = threshold {
                local.blow_up_threshold = *t;
            }
            if let Some(m) = grid_min {
                local.grid_min = *m;
            }
            if let Some(m) = grid_max {
                local.grid_max = *m;
            }
            let cert = match class.as_str() {
                "bp" => classes::certify_bp(&w, *p, &local),
                "rp" => classes::certify_rp(&w, *p, &local),
                "rwt" => classes::check_restricted_weak_type(&w, *p, &local),
                "qdp" => classes::certify_quasi_decreasing_primitive(&w, &local),
                other => return Err(Error::Parse(format!("unknown class {other}"))),
            };
            let passed = match expect.as_str() {
                "member" => {
                    cert.is_member()
                        && cert.constant().map(|c| in_range(c, constant_range)).unwrap_or(false)
                }
                "not-member" => {
                    cert.witness().is_some()
                        && cert
                            .witness()
                            .map(|w| {
                                min_witness_ratio
                                    .map(|m| w.ratio >= m || w.divergent_tail)
                                    .unwrap_or(true)
                            })
                            .unwrap_or(false)
                }
                other => return Err(Error::Parse(format!("unknown expectation {other}"))),
            };
            Ok(CheckOutcome { kind: format!("certify-{class}"), passed, detail: cert.to_json() })
        }
        CheckSpec::NormStatus {
            space,
            p,
            q,
            alpha,
            weight,
            function,
            expect_diverged,
            value_range,
        } => {
            let w = weight.clone().into_weight()?;
            let f = function.clone().into_profile()?;
            let n = match space.as_str() {
                "lambda" => norms::lambda_norm(&f, &w, *p, cfg),
                "lambda-weak" => norms::lambda_weak_norm(&f, &w, *p, cfg),
                "gamma" => norms::gamma_norm(
                    &f,
                    &w,
                    *p,
                    q.ok_or_else(|| Error::Parse("gamma norm needs q".into()))?,
                    cfg,
                ),
                "gamma-weak" => norms::gamma_weak_norm(&f, &w, *p, cfg),
                "gamma-alpha" => norms::gamma_alpha_norm(
                    &f,
                    &w,
                    *p,
                    alpha.ok_or_else(|| Error::Parse("gamma-alpha norm needs alpha".into()))?,
                    cfg,
                ),
                other => return Err(Error::Parse(format!("unknown space {other}"))),
            };
            let passed = n.diverged == *expect_diverged
                && (*expect_diverged || in_range(n.value, value_range));
            Ok(CheckOutcome {
                kind: format!("norm-{space}"),
                passed,
                detail: json!({"value": n.value, "diverged": n.diverged}),
            })
        }
        CheckSpec::NormChainSample { weight, samples } => {
            let w = weight.clone().into_weight()?;
            let mut rng = crate::sampling::rng(cfg.seed);
            let mut max_violation = 0.0f64;
            let slack = 1.0 + 1e-9;
            for _ in 0..*samples {
                let f = crate::realfun::DecreasingProfile::step(
                    crate::sampling::decreasing_step(&mut rng, 8),
                )
                .expect("sampled step is decreasing");
                let weak = norms::gamma_weak_norm(&f, &w, 1.0, cfg);
                let lam = norms::lambda_norm(&f, &w, 1.0, cfg);
                let gam = norms::gamma_norm(&f, &w, 1.0, 1.0, cfg);
                if weak.diverged || lam.diverged || gam.diverged {
                    max_violation = f64::INFINITY;
                    break;
                }
                if weak.value > lam.value * slack {
                    max_violation = max_violation.max(weak.value / lam.value - 1.0);
                }
                if lam.value > gam.value * slack {
                    max_violation = max_violation.max(lam.value / gam.value - 1.0);
                }
            }
            Ok(CheckOutcome {
                kind: "norm-chain-sample".into(),
                passed: max_violation <= 1e-9,
                detail: json!({"samples": samples, "max_violation": max_violation}),
            })
        }
        CheckSpec::RatioEvidence { source, target, weight, family, expect } => {
            let w = weight.clone().into_weight()?;
            let src = NormSpec { space: source.kind()?, weight: w.clone() };
            let tgt = NormSpec { space: target.kind()?, weight: w };
            let verdict = embeddings::norm_ratio_evidence(&src, &tgt, &family.family(), cfg)?;
            let ev = verdict.evidence().expect("ratio check yields evidence");
            let growing = ev.ratios.len() >= 2 && ev.ratios.last() > ev.ratios.first();
            let passed = match expect.as_str() {
                "demonstrated" => ev.demonstrated,
                "bounded" => ev.bounded_evidence,
                "growing" => growing && !ev.bounded_evidence,
                other => return Err(Error::Parse(format!("unknown expectation {other}"))),
            };
            Ok(CheckOutcome {
                kind: "ratio-evidence".into(),
                passed,
                detail: serde_json::to_value(ev).unwrap(),
            })
        }
        CheckSpec::Gamma1Equivalence { weight, v, expect_holds, lower_range, upper_range } => {
            let w = weight.clone().into_weight()?;
            let v_weight = match v {
                VSource::Explicit => char01_equivalent_v(),
                VSource::Spec { spec } => spec.clone().into_weight()?,
                VSource::BuildWq { q } => build_wq(&w, *q, cfg)?.produced,
            };
            let verdict = embeddings::check_gamma1_equivalence(&w, &v_weight, cfg)?;
            let mut passed = verdict.holds() == *expect_holds;
            if let Some((lo, hi)) = verdict.constants() {
                passed = passed && in_range(lo, lower_range) && in_range(hi, upper_range);
            }
            Ok(CheckOutcome {
                kind: "gamma1-equivalence".into(),
                passed,
                detail: serde_json::to_value(&verdict).unwrap(),
            })
        }
        CheckSpec::WqIdentity { weight, qs, tol } => {
            let w = weight.clone().into_weight()?;
            let local = cfg.clone().with_grid(1e-3, 1e3);
            let mut passed = true;
            let mut details = Vec::new();
            for &q in qs {
                let res = build_wq(&w, q, &local)?;
                let ok = res.verification.pass
                    && res.verification.lower >= 1.0 - tol
                    && res.verification.upper <= 1.0 + tol;
                passed = passed && ok;
                details.push(json!({
                    "q": q,
                    "lower": res.verification.lower,
                    "upper": res.verification.upper,
                    "depth": res.depth,
                }));
            }
            Ok(CheckOutcome { kind: "wq-identity".into(), passed, detail: json!(details) })
        }
        CheckSpec::AdjudicateB1 { candidates, expect_member_count, expect_member_index } => {
            let mut members = Vec::new();
            let mut details = Vec::new();
            for (i, spec) in candidates.iter().enumerate() {
                let w = spec.clone().into_weight()?;
                let cert = classes::certify_bp(&w, 1.0, cfg);
                if cert.is_member() {
                    members.push(i);
                }
                details.push(cert.to_json());
            }
            let passed =
                members.len() == *expect_member_count && members.contains(expect_member_index);
            Ok(CheckOutcome {
                kind: "adjudicate-b1".into(),
                passed,
                detail: json!({"members": members, "certificates": details}),
            })
        }
        CheckSpec::LogDecayGap { alpha, cauchy_from, cauchy_to, cauchy_tol, fit_horizons, r2_min } => {
            // plain partial integrals on the default-density geometric grid
            let grid = log_grid(std::f64::consts::E, *cauchy_to, cfg.points_per_decade);
            let partials: Vec<f64> = grid
                .iter()
                .map(|&t| embeddings::log_decay_l1_partial(*alpha, t))
                .collect::<Result<_>>()?;
            let mut cauchy_ok = true;
            let mut worst_diff = 0.0f64;
            for i in 1..grid.len() {
                if grid[i] >= *cauchy_from {
                    let d = (partials[i] - partials[i - 1]).abs();
                    worst_diff = worst_diff.max(d);
                    if d >= *cauchy_tol {
                        cauchy_ok = false;
                    }
                }
            }
            // interpolated partials grow like log log T
            let interp: Vec<f64> = fit_horizons
                .iter()
                .map(|&t| embeddings::log_decay_interpolated_partial(*alpha, t))
                .collect::<Result<_>>()?;
            let monotone = interp.windows(2).all(|w| w[1] > w[0]);
            let xs: Vec<f64> = fit_horizons.iter().map(|t| t.ln().ln()).collect();
            let fit = linreg(&xs, &interp);
            let (slope, r2) = fit.map(|(s, _, r)| (s, r)).unwrap_or((0.0, 0.0));
            let passed = cauchy_ok && monotone && slope > 0.0 && r2 >= *r2_min;
            Ok(CheckOutcome {
                kind: "log-decay-gap".into(),
                passed,
                detail: json!({
                    "worst_cauchy_diff": worst_diff,
                    "interpolated_partials": interp,
                    "growth_slope": slope,
                    "growth_r2": r2,
                }),
            })
        }
    }
}

fn linreg(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy <= 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}
