use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the metrics summed into the per-branch flaw score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlawWeights {
    pub align: f64,
    pub ove: f64,
    pub cont: f64,
    pub occ: f64,
}

impl Default for FlawWeights {
    fn default() -> Self {
        Self {
            align: 1.0,
            ove: 1.0,
            cont: 1.0,
            occ: 1.0,
        }
    }
}

/// Tunables of the rectification pipeline. JSON field names match the
/// struct fields; missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RectifyConfig {
    pub lambda_aspect: f64,
    pub lambda_size: f64,
    pub num_exemplars: usize,
    pub outer_iters: usize,
    pub adam_iters: usize,
    pub adam_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub gutter: f64,
    pub align_angle_deg: f64,
    pub snap_lines_per_side: usize,
    pub rng_seed: u64,
    pub flaw_weights: FlawWeights,
    /// Use the negative containment cost exactly as printed
    /// (`1 - IoCA(1 + rho^2/c^2)`) instead of `IoCA(1 - rho^2/c^2)`.
    pub eq3_literal: bool,
}

impl Default for RectifyConfig {
    fn default() -> Self {
        Self {
            lambda_aspect: 10.0,
            lambda_size: 100.0,
            num_exemplars: 5,
            outer_iters: 5,
            adam_iters: 100,
            adam_lr: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            gutter: 0.01,
            align_angle_deg: 18.0,
            snap_lines_per_side: 3,
            rng_seed: 0,
            flaw_weights: FlawWeights::default(),
            eq3_literal: false,
        }
    }
}

impl RectifyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        // adam_iters = 0 leaves only the snapping stage
        if self.num_exemplars < 1 || self.outer_iters < 1 || self.snap_lines_per_side < 1 {
            return bad("exemplar, round and snap-line counts must be at least 1");
        }
        if !(self.lambda_aspect >= 0.0 && self.lambda_size >= 0.0) {
            return bad("lambda values must be non-negative");
        }
        if !(self.align_angle_deg > 0.0 && self.align_angle_deg < 90.0) {
            return bad("align_angle_deg must lie in (0, 90)");
        }
        if !(self.adam_lr > 0.0 && self.adam_eps > 0.0) {
            return bad("adam_lr and adam_eps must be positive");
        }
        if !((0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2)) {
            return bad("adam betas must lie in [0, 1)");
        }
        if !(self.gutter >= 0.0 && self.gutter < 0.25) {
            return bad("gutter must lie in [0, 0.25)");
        }
        let w = &self.flaw_weights;
        if !(w.align >= 0.0 && w.ove >= 0.0 && w.cont >= 0.0 && w.occ >= 0.0) {
            return bad("flaw weights must be non-negative");
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(bytes)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
