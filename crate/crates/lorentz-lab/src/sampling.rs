//! Deterministic sample families for property scans and gallery checks.
//!
//! Everything is driven by a seeded ChaCha stream so that runs are
//! reproducible byte for byte.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::realfun::StepFunction;
use crate::weights::Weight;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random positive step function with up to `max_pieces` pieces on roughly
/// (10^-2, 10^2).
pub fn arbitrary_step(rng: &mut ChaCha8Rng, max_pieces: usize) -> StepFunction {
    let n = rng.gen_range(1..=max_pieces.max(1));
    let mut cuts = Vec::with_capacity(n);
    let mut edge = 0.0f64;
    for _ in 0..n {
        edge += 10f64.powf(rng.gen_range(-2.0..1.0));
        cuts.push(edge);
    }
    let values: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
    StepFunction::new(cuts, values).expect("sampled step is valid")
}

/// Random decreasing step function.
pub fn decreasing_step(rng: &mut ChaCha8Rng, max_pieces: usize) -> StepFunction {
    let f = arbitrary_step(rng, max_pieces);
    let mut values = f.values().to_vec();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    StepFunction::new(f.cuts().to_vec(), values).expect("sorted step is valid")
}

/// Random weight from the closed families, any monotonicity.
pub fn family_weight(rng: &mut ChaCha8Rng) -> Weight {
    match rng.gen_range(0..7u32) {
        0 => {
            let gamma = rng.gen_range(-0.9..1.5);
            if rng.gen_bool(0.5) {
                Weight::power(gamma, 0.0, f64::INFINITY).unwrap()
            } else {
                Weight::power(gamma, 0.0, 10f64.powf(rng.gen_range(-0.5..1.0))).unwrap()
            }
        }
        1 => Weight::char_interval(0.0, 10f64.powf(rng.gen_range(-1.0..1.0))).unwrap(),
        2 => {
            // (a0 - a1·log t) on (0, b): positive there since log t < log b <= 0
            let a0 = rng.gen_range(0.5..2.0);
            let a1 = rng.gen_range(0.1..1.5);
            Weight::log_poly(vec![a0, -a1], 0.0, 0.0, 1.0).unwrap()
        }
        3 => Weight::exp_decay(rng.gen_range(0.5..2.0), rng.gen_range(0.2..3.0)).unwrap(),
        4 => Weight::shifted_power(
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-2.5..-0.5),
        )
        .unwrap(),
        5 => Weight::constant(rng.gen_range(0.5..2.0)).unwrap(),
        _ => Weight::sum(vec![
            Weight::constant(rng.gen_range(0.2..1.0)).unwrap(),
            Weight::power(rng.gen_range(-0.8..-0.2), 0.0, f64::INFINITY).unwrap(),
        ]),
    }
}

/// Random decreasing weight from the closed families.
pub fn decreasing_family_weight(rng: &mut ChaCha8Rng) -> Weight {
    match rng.gen_range(0..6u32) {
        0 => Weight::char_interval(0.0, 10f64.powf(rng.gen_range(-1.0..1.0))).unwrap(),
        1 => Weight::exp_decay(rng.gen_range(0.5..2.0), rng.gen_range(0.2..3.0)).unwrap(),
        2 => Weight::shifted_power(
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-2.5..-0.5),
        )
        .unwrap(),
        3 => Weight::power(rng.gen_range(-0.9..-0.05), 0.0, f64::INFINITY).unwrap(),
        4 => {
            let a0 = rng.gen_range(0.5..2.0);
            let a1 = rng.gen_range(0.1..1.5);
            Weight::log_poly(vec![a0, -a1], 0.0, 0.0, 1.0).unwrap()
        }
        _ => Weight::constant(rng.gen_range(0.5..2.0)).unwrap(),
    }
}
