//! Command-line front end: evaluate norms, certify classes, run the
//! constructions and checks, and execute the gallery.
//!
//! Reports are JSON by default, carry the schema tag, the artifact version
//! and the full config, and are byte-identical across runs for a fixed
//! command line. Exit status: 0 success/pass, 1 verdict-fail, 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::RunConfig;
use crate::constructions::{build_wq, lambda1_equivalent_norm, Lambda1Case};
use crate::embeddings::{self, NormSpec, SpaceKind, WitnessFamily};
use crate::norms::{self, NormParams};
use crate::realfun::FunctionSpec;
use crate::weights::{weight_from_json, Weight};
use crate::{classes, gallery, Error, Result, REPORT_SCHEMA, VERSION};

#[derive(Parser)]
#[command(
    name = "lorentz-lab",
    version,
    about = "Weighted Lorentz-space functionals, weight-class certification, and equivalent-norm constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Lower end of evaluation grids.
    #[arg(long, global = true)]
    grid_min: Option<f64>,
    /// Upper end of evaluation grids.
    #[arg(long, global = true)]
    grid_max: Option<f64>,
    /// Log-spaced points per decade.
    #[arg(long, global = true)]
    grid_per_decade: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Blow-up threshold for certifier witnesses.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Seed for sampled families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a norm functional of a function against a weight.
    Norm {
        /// lambda | lambda-weak | gamma | gamma-weak | gamma-alpha
        #[arg(long)]
        space: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Weight spec JSON.
        #[arg(long)]
        weight: String,
        /// Function spec JSON.
        #[arg(long)]
        function: String,
    },
    /// Certify a weight-class membership.
    Certify {
        /// bp | rp | rwt | qdp
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        weight: String,
    },
    /// Build the derived two-part weight and verify its identity.
    ConstructWq {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        q: f64,
    },
    /// Decide which maximal-function norm is equivalent to the plain p = 1 norm.
    EquivNorm {
        #[arg(long)]
        weight: String,
    },
    /// Run an embedding/equivalence check.
    Check {
        /// sandwich | eqwv | ratio
        #[arg(long)]
        relation: String,
        #[arg(long)]
        weight: String,
        /// Candidate v weight spec JSON (sandwich, eqwv).
        #[arg(long)]
        v: Option<String>,
        #[arg(long)]
        q: Option<f64>,
        /// Source space for ratio checks, e.g. "lambda:1" or "gamma:1:2".
        #[arg(long)]
        source: Option<String>,
        /// Target space for ratio checks.
        #[arg(long)]
        target: Option<String>,
        /// chars | spikes | hyperbolic-tails | saturating-staircase
        #[arg(long)]
        family: Option<String>,
        /// Cap scale for the hyperbolic-tail family.
        #[arg(long, default_value_t = 1.0)]
        family_a: f64,
    },
    /// Run gallery scenarios (all by default, or one by id).
    Gallery {
        id: Option<String>,
        /// Only scenarios carrying this tag.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn build_config(cli: &Cli) -> RunConfig {
    let mut cfg = RunConfig::default();
    if let Some(v) = cli.grid_min {
        cfg.grid_min = v;
    }
    if let Some(v) = cli.grid_max {
        cfg.grid_max = v;
    }
    if let Some(v) = cli.grid_per_decade {
        cfg.points_per_decade = v;
    }
    if let Some(v) = cli.tol {
        cfg.tol_rel = v;
    }
    if let Some(v) = cli.threshold {
        cfg.blow_up_threshold = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    cfg
}

/// Space strings of the form "lambda:1", "gamma:1:2", "gamma-alpha:1:0.5".
fn parse_space(text: &str) -> Result<SpaceKind> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Parse(format!("cannot parse space spec '{text}'"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["lambda", p] => Ok(SpaceKind::Lambda { p: num(p)? }),
        ["lambda-weak", p] => Ok(SpaceKind::LambdaWeak { p: num(p)? }),
        ["gamma", p, q] => Ok(SpaceKind::Gamma { p: num(p)?, q: num(q)? }),
        ["gamma-weak", p] => Ok(SpaceKind::GammaWeak { p: num(p)? }),
        ["gamma-alpha", p, a] => Ok(SpaceKind::GammaAlpha { p: num(p)?, alpha: num(a)? }),
        _ => Err(bad()),
    }
}

fn parse_function(text: &str) -> Result<crate::realfun::DecreasingProfile> {
    let spec: FunctionSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("function spec: {e}")))?;
    spec.into_profile()
}

struct Report {
    command: &'static str,
    result: serde_json::Value,
    text: String,
    /// (t, value) rows for CSV export, when the command is a grid scan.
    samples: Option<Vec<(f64, f64)>>,
    /// Exit 1 when the command's primary verdict is negative.
    verdict_failed: bool,
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Report> {
    match &cli.command {
        Command::Norm { space, p, q, alpha, weight, function } => {
            let params = NormParams::new(*p, q.unwrap_or(f64::INFINITY), alpha.unwrap_or(0.0))?;
            let w = weight_from_json(weight)?;
            let f = parse_function(function)?;
            let n = match space.as_str() {
                "lambda" => norms::lambda_norm(&f, &w, params.p, cfg),
                "lambda-weak" => norms::lambda_weak_norm(&f, &w, params.p, cfg),
                "gamma" => {
                    if !params.q.is_finite() {
                        return Err(Error::InvalidArgument(
                            "gamma needs a finite --q (use gamma-weak for q = ∞)".into(),
                        ));
                    }
                    norms::gamma_norm(&f, &w, params.p, params.q, cfg)
                }
                "gamma-weak" => norms::gamma_weak_norm(&f, &w, params.p, cfg),
                "gamma-alpha" => norms::gamma_alpha_norm(&f, &w, params.p, params.alpha, cfg),
                other => return Err(Error::InvalidArgument(format!("unknown space {other}"))),
            };
            Ok(Report {
                command: "norm",
                result: json!({"value": n.value, "diverged": n.diverged, "abs_error": n.abs_error}),
                text: format!(
                    "{space} norm = {:.12e}{}",
                    n.value,
                    if n.diverged { " (diverged; partial at horizon)" } else { "" }
                ),
                samples: None,
                verdict_failed: false,
            })
        }
        Command::Certify { class, p, weight } => {
            let w = weight_from_json(weight)?;
            let cert = match class.as_str() {
                "bp" => classes::certify_bp(&w, *p, cfg),
                "rp" => classes::certify_rp(&w, *p, cfg),
                "rwt" => classes::check_restricted_weak_type(&w, *p, cfg),
                "qdp" => classes::certify_quasi_decreasing_primitive(&w, cfg),
                other => return Err(Error::InvalidArgument(format!("unknown class {other}"))),
            };
            let text = match (&cert.constant(), &cert.witness()) {
                (Some(c), _) => format!("{class} p={p}: member, observed constant {c:.6e}"),
                (_, Some(wit)) => format!(
                    "{class} p={p}: not a member (witness ratio {:.3e} at r = {:.3e})",
                    wit.ratio, wit.r
                ),
                _ => format!("{class} p={p}: inconclusive"),
            };
            Ok(Report {
                command: "certify",
                result: cert.to_json(),
                text,
                samples: None,
                verdict_failed: false,
            })
        }
        Command::ConstructWq { weight, q } => {
            let w = weight_from_json(weight)?;
            let res = build_wq(&w, *q, cfg)?;
            let tab = res.tabulated(cfg)?;
            let samples = res.verification.samples.clone();
            let verdict_failed = !res.verification.pass;
            let result = json!({
                "q": res.q,
                "depth": res.depth,
                "clamped_fraction": res.clamped_fraction,
                "w_q": Weight::Tabulated(tab).to_spec(),
                "verification": {
                    "lower": res.verification.lower,
                    "upper": res.verification.upper,
                    "pass": res.verification.pass,
                    "divergent_at": res.verification.divergent_at,
                    "grid": res.verification.grid,
                },
            });
            Ok(Report {
                command: "construct-wq",
                text: format!(
                    "derived weight for q = {} (smoothing depth {}): constants [{:.6e}, {:.6e}]{}",
                    res.q,
                    res.depth,
                    res.verification.lower,
                    res.verification.upper,
                    if res.verification.pass { "" } else { " FAIL" }
                ),
                result,
                samples: Some(samples),
                verdict_failed,
            })
        }
        Command::EquivNorm { weight } => {
            let w = weight_from_json(weight)?;
            let case = lambda1_equivalent_norm(&w, cfg)?;
            let (result, text, failed) = match &case {
                Lambda1Case::MaximalNorm { construction, equivalence } => (
                    json!({
                        "case": case.label(),
                        "verification": equivalence,
                        "v": Weight::Tabulated(construction.tabulated(cfg)?).to_spec(),
                    }),
                    format!("case: {} (equivalence holds: {})", case.label(), equivalence.holds()),
                    !equivalence.holds(),
                ),
                Lambda1Case::LebesgueL1 => (
                    json!({"case": case.label(), "norm": "sup t·f**(t)"}),
                    format!("case: {}", case.label()),
                    false,
                ),
                Lambda1Case::MaximalNormIntersectL1 {
                    subtracted_limit,
                    construction,
                    equivalence,
                } => (
                    json!({
                        "case": case.label(),
                        "subtracted_limit": subtracted_limit,
                        "verification": equivalence,
                        "v": Weight::Tabulated(construction.tabulated(cfg)?).to_spec(),
                    }),
                    format!("case: {} (equivalence holds: {})", case.label(), equivalence.holds()),
                    !equivalence.holds(),
                ),
            };
            Ok(Report { command: "equiv-norm", result, text, samples: None, verdict_failed: failed })
        }
        Command::Check { relation, weight, v, q, source, target, family, family_a } => {
            let w = weight_from_json(weight)?;
            match relation.as_str() {
                "sandwich" => {
                    let v = weight_from_json(
                        v.as_deref()
                            .ok_or_else(|| Error::InvalidArgument("sandwich needs --v".into()))?,
                    )?;
                    let q =
                        q.ok_or_else(|| Error::InvalidArgument("sandwich needs --q".into()))?;
                    let verdict = embeddings::check_sandwich(&w, &v, q, cfg)?;
                    let samples = crate::constructions::verify_wq_identity(&w, &v, q, cfg).samples;
                    Ok(Report {
                        command: "check",
                        text: format!("sandwich: {}", verdict_word(&verdict)),
                        verdict_failed: !verdict.holds(),
                        result: serde_json::to_value(&verdict).unwrap(),
                        samples: Some(samples),
                    })
                }
                "eqwv" => {
                    let v = weight_from_json(
                        v.as_deref()
                            .ok_or_else(|| Error::InvalidArgument("eqwv needs --v".into()))?,
                    )?;
                    let verdict = embeddings::check_gamma1_equivalence(&w, &v, cfg)?;
                    let samples = embeddings::gamma1_ratio_samples(&w, &v, cfg);
                    Ok(Report {
                        command: "check",
                        text: format!("eqwv: {}", verdict_word(&verdict)),
                        verdict_failed: !verdict.holds(),
                        result: serde_json::to_value(&verdict).unwrap(),
                        samples: Some(samples),
                    })
                }
                "ratio" => {
                    let src = parse_space(source.as_deref().ok_or_else(|| {
                        Error::InvalidArgument("ratio needs --source".into())
                    })?)?;
                    let tgt = parse_space(target.as_deref().ok_or_else(|| {
                        Error::InvalidArgument("ratio needs --target".into())
                    })?)?;
                    let fam = match family.as_deref().unwrap_or("chars") {
                        "chars" => WitnessFamily::Chars { scales: embeddings::geometric_scales() },
                        "spikes" => {
                            WitnessFamily::Spikes { scales: embeddings::geometric_scales() }
                        }
                        "hyperbolic-tails" => WitnessFamily::HyperbolicTails {
                            a: *family_a,
                            scales: embeddings::geometric_scales(),
                        },
                        "saturating-staircase" => {
                            WitnessFamily::SaturatingStaircase { pieces: (8..=27).collect() }
                        }
                        other => {
                            return Err(Error::InvalidArgument(format!("unknown family {other}")))
                        }
                    };
                    let source_spec = NormSpec { space: src, weight: w.clone() };
                    let target_spec = NormSpec { space: tgt, weight: w };
                    let verdict =
                        embeddings::norm_ratio_evidence(&source_spec, &target_spec, &fam, cfg)?;
                    let ev = verdict.evidence().unwrap();
                    let samples: Vec<(f64, f64)> =
                        ev.params.iter().copied().zip(ev.ratios.iter().copied()).collect();
                    Ok(Report {
                        command: "check",
                        text: format!(
                            "ratio evidence: sup {:.6e}, demonstrated {}, bounded {}",
                            ev.sup_ratio, ev.demonstrated, ev.bounded_evidence
                        ),
                        verdict_failed: false,
                        result: serde_json::to_value(&verdict).unwrap(),
                        samples: Some(samples),
                    })
                }
                other => Err(Error::InvalidArgument(format!("unknown relation {other}"))),
            }
        }
        Command::Gallery { id, filter } => {
            if let Some(id) = id {
                let outcome = gallery::run(id, cfg)?;
                Ok(Report {
                    command: "gallery",
                    text: format!(
                        "{}: {}",
                        outcome.id,
                        if outcome.passed { "pass" } else { "FAIL" }
                    ),
                    verdict_failed: !outcome.passed,
                    result: serde_json::to_value(&outcome).unwrap(),
                    samples: None,
                })
            } else {
                let summary = gallery::run_all(filter.as_deref(), cfg)?;
                let mut text = String::new();
                for o in &summary.outcomes {
                    text.push_str(&format!(
                        "{:<32} {}\n",
                        o.id,
                        if o.passed { "pass" } else { "FAIL" }
                    ));
                }
                text.push_str(&format!("{} scenarios, {} failed", summary.total, summary.failed));
                Ok(Report {
                    command: "gallery",
                    verdict_failed: !summary.all_passed,
                    result: serde_json::to_value(&summary).unwrap(),
                    text,
                    samples: None,
                })
            }
        }
    }
}

fn verdict_word(v: &embeddings::EmbeddingVerdict) -> &'static str {
    if v.holds() {
        "holds"
    } else if v.fails() {
        "fails"
    } else {
        "evidence"
    }
}

fn render(report: &Report, cfg: &RunConfig, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let envelope = json!({
                "schema": REPORT_SCHEMA,
                "version": VERSION,
                "command": report.command,
                "config": cfg,
                "result": report.result,
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&envelope).unwrap()))
        }
        Format::Text => Ok(format!("{}\n", report.text)),
        Format::Csv => {
            let samples = report.samples.as_ref().ok_or_else(|| {
                Error::InvalidArgument(
                    "csv output needs a grid-scan command (check or construct-wq)".into(),
                )
            })?;
            let mut out = String::from("t,value\n");
            for (t, v) in samples {
                out.push_str(&format!("{t:.17e},{v:.17e}\n"));
            }
            Ok(out)
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = build_config(&cli);
    match execute(&cli, &cfg).and_then(|rep| render(&rep, &cfg, cli.format).map(|s| (rep, s))) {
        Ok((rep, rendered)) => {
            let write_result = match &cli.out {
                Some(path) => std::fs::File::create(path)
                    .and_then(|mut f| f.write_all(rendered.as_bytes())),
                None => std::io::stdout().write_all(rendered.as_bytes()),
            };
            if let Err(e) = write_result {
                eprintln!("error: cannot write report: {e}");
                return 2;
            }
            if rep.verdict_failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(_) | Error::Construction(_) => 1,
                _ => 2,
            }
        }
    }
}
