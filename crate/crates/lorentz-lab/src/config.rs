//! Run configuration shared by certifiers, constructions and the CLI.

use serde::Serialize;

/// Numeric knobs for grid scans, quadrature and verdict thresholds.
///
/// A fixed config (including the seed) makes every run of the library
/// deterministic: reports are byte-identical across invocations.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Lower end of the base evaluation grid.
    pub grid_min: f64,
    /// Upper end of the base evaluation grid.
    pub grid_max: f64,
    /// Log-spaced points per decade on scan grids.
    pub points_per_decade: usize,
    /// Relative quadrature tolerance.
    pub tol_rel: f64,
    /// Absolute quadrature floor.
    pub tol_abs: f64,
    /// Ratio above which a certifier declares a witness of failure.
    pub blow_up_threshold: f64,
    /// Allowed relative growth of an observed constant under refinement.
    pub stability_margin: f64,
    /// Factor by which each grid end is extended during the refinement round.
    pub refinement_extension: f64,
    /// Cap on geometric-horizon doublings for semi-infinite tails.
    pub horizon_doublings: u32,
    /// Smallest level probed by the restricted weak-type scan.
    pub lambda_min: f64,
    /// Tolerance on observed increases of a mean-value function.
    pub mean_increase_tol: f64,
    /// Values at the horizon below this count as a vanishing limit.
    pub zero_limit_threshold: f64,
    /// Seed for sampled families (property scans, gallery samples).
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_min: 1e-6,
            grid_max: 1e6,
            points_per_decade: 64,
            tol_rel: 1e-9,
            tol_abs: 1e-300,
            blow_up_threshold: 1e3,
            stability_margin: 0.05,
            refinement_extension: 1e6,
            horizon_doublings: 60,
            lambda_min: 1e-4,
            mean_increase_tol: 1e-12,
            zero_limit_threshold: 1e-12,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn with_grid(mut self, min: f64, max: f64) -> Self {
        self.grid_min = min;
        self.grid_max = max;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blow_up_threshold = threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The base scan grid for this config.
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.grid_min, self.grid_max, self.points_per_decade)
    }
}

/// Log-spaced grid over [min, max] with `per_decade` points per decade.
/// Both endpoints are included.
pub fn log_grid(min: f64, max: f64, per_decade: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min, "log grid needs 0 < min < max");
    let decades = (max / min).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (lmin, lmax) = (min.ln(), max.ln());
    let step = (lmax - lmin) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        out.push((lmin + step * k as f64).exp());
    }
    // endpoints exact regardless of rounding
    out[0] = min;
    out[n] = max;
    out
}
