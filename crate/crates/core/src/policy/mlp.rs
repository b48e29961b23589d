//! Fully connected tanh network and its on-disk parameter format.

use std::f64::consts::PI;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Policy;
use crate::error::{NavError, Result};
use crate::observation::{AgentVariant, ObservationVector, GOAL_OFFSET};
use crate::sensing::SCAN_BEAMS;
use crate::world::{Action, VelocityLimits};

pub const POLICY_FORMAT: &str = "holonav-policy";
pub const POLICY_VERSION: u32 = 1;

/// Distance scale for goal, subgoal, waypoint and plan-length inputs.
const DISTANCE_SCALE: f64 = 10.0;

/// Layer sizes plus a flat weight vector. Layer `l` stores its
/// `fan_out x fan_in` weight matrix row-major followed by `fan_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub variant: AgentVariant,
    pub layers: Vec<usize>,
    pub weights: Vec<f64>,
    pub max_range: f64,
    pub limits: VelocityLimits,
}

#[derive(Serialize, Deserialize)]
struct PolicyFile {
    format: String,
    version: u32,
    variant: AgentVariant,
    layers: Vec<usize>,
    max_range: f64,
    limits: VelocityLimits,
    /// Little-endian f64 values, base64 encoded.
    weights: String,
}

pub fn weight_count(layers: &[usize]) -> usize {
    layers.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

impl PolicyParams {
    /// Layer sizes for `variant` with the given hidden widths and a 2-wide output.
    pub fn layer_sizes(variant: AgentVariant, hidden: &[usize]) -> Vec<usize> {
        let mut layers = vec![variant.observation_size()];
        layers.extend_from_slice(hidden);
        layers.push(2);
        layers
    }

    pub fn zeros(variant: AgentVariant, hidden: &[usize]) -> Self {
        let layers = Self::layer_sizes(variant, hidden);
        let weights = vec![0.0; weight_count(&layers)];
        Self { variant, layers, weights, max_range: 10.0, limits: VelocityLimits::default() }
    }

    /// Gaussian weights with the per-weight std of [`init_scales`](Self::init_scales) and zero biases.
    pub fn random<R: Rng + ?Sized>(variant: AgentVariant, hidden: &[usize], rng: &mut R) -> Self {
        let mut p = Self::zeros(variant, hidden);
        let scales = p.init_scales();
        for (&(start, len), w) in p.layer_ranges().iter().zip(p.layers.windows(2)) {
            let weights = start..start + len - w[1];
            for (v, s) in p.weights[weights.clone()].iter_mut().zip(&scales[weights]) {
                *v = s * rng.sample::<f64, _>(StandardNormal);
            }
        }
        p
    }

    /// Per-weight scale, `1/sqrt(fan_in)` except in the input layer, where
    /// each input block (scan, goal, subgoal, waypoints, length) gets the same
    /// share of the variance so the few goal inputs are not drowned out by
    /// the 360 scan beams.
    pub fn init_scales(&self) -> Vec<f64> {
        let mut scales = vec![0.0; self.weights.len()];
        let layout = self.variant.layout();
        let mut blocks = vec![(0, SCAN_BEAMS), (GOAL_OFFSET, 2)];
        blocks.extend(layout.subgoal.map(|at| (at, 2)));
        blocks.extend(layout.waypoints.map(|at| (at, 2 * crate::waypoints::WAYPOINT_COUNT)));
        blocks.extend(layout.length.map(|at| (at, 1)));
        let mut column = vec![0.0; self.layers[0]];
        for &(at, len) in &blocks {
            column[at..at + len].fill(1.0 / ((blocks.len() * len) as f64).sqrt());
        }
        for (k, (&(start, len), w)) in self.layer_ranges().iter().zip(self.layers.windows(2)).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let layer = &mut scales[start..start + len];
            if k == 0 {
                for row in layer[..fan_in * fan_out].chunks_exact_mut(fan_in) {
                    row.copy_from_slice(&column);
                }
                layer[fan_in * fan_out..].fill(1.0 / (blocks.len() as f64).sqrt());
            } else {
                layer.fill(1.0 / (fan_in as f64).sqrt());
            }
        }
        scales
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let p = Self { weights, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    /// `(start, len)` of each layer's slice in `weights`, including biases.
    pub fn layer_ranges(&self) -> Vec<(usize, usize)> {
        let mut at = 0;
        self.layers
            .windows(2)
            .map(|w| {
                let len = (w[0] + 1) * w[1];
                let r = (at, len);
                at += len;
                r
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 || self.layers.contains(&0) {
            return Err(NavError::InvalidConfig(format!("bad layer sizes {:?}", self.layers)));
        }
        let expected_in = self.variant.observation_size();
        if self.layers[0] != expected_in {
            return Err(NavError::DimensionMismatch { what: "policy input", expected: expected_in, actual: self.layers[0] });
        }
        if *self.layers.last().unwrap() != 2 {
            return Err(NavError::DimensionMismatch { what: "policy output", expected: 2, actual: *self.layers.last().unwrap() });
        }
        let expected = weight_count(&self.layers);
        if self.weights.len() != expected {
            return Err(NavError::DimensionMismatch { what: "policy weights", expected, actual: self.weights.len() });
        }
        if let Some(i) = self.weights.iter().position(|w| !w.is_finite()) {
            return Err(NavError::InvalidConfig(format!("weight {i} is not finite")));
        }
        if self.max_range.is_nan() || self.max_range <= 0.0 {
            return Err(NavError::InvalidConfig(format!("max_range must be positive, got {}", self.max_range)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let bytes: Vec<u8> = self.weights.iter().flat_map(|w| w.to_le_bytes()).collect();
        let file = PolicyFile {
            format: POLICY_FORMAT.into(),
            version: POLICY_VERSION,
            variant: self.variant,
            layers: self.layers.clone(),
            max_range: self.max_range,
            limits: self.limits,
            weights: B64.encode(bytes),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolicyFile = serde_json::from_str(text)?;
        if file.format != POLICY_FORMAT || file.version != POLICY_VERSION {
            return Err(NavError::InvalidConfig(format!(
                "unsupported policy file {} v{} (expected {POLICY_FORMAT} v{POLICY_VERSION})",
                file.format, file.version
            )));
        }
        let bytes = B64.decode(file.weights.as_bytes()).map_err(|e| NavError::InvalidConfig(format!("weight blob: {e}")))?;
        if bytes.len() % 8 != 0 {
            return Err(NavError::InvalidConfig(format!("weight blob of {} bytes is not a whole number of f64", bytes.len())));
        }
        let weights = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let p = Self { variant: file.variant, layers: file.layers, weights, max_range: file.max_range, limits: file.limits };
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Per-input multipliers: ranges by `1/max_range`, distances by `1/10`,
/// bearings by `1/pi`.
fn input_scale(variant: AgentVariant, max_range: f64) -> Vec<f64> {
    let layout = variant.layout();
    let mut scale = vec![1.0 / max_range; layout.len];
    let polar = |scale: &mut Vec<f64>, at: usize| {
        scale[at] = 1.0 / DISTANCE_SCALE;
        scale[at + 1] = 1.0 / PI;
    };
    polar(&mut scale, GOAL_OFFSET);
    if let Some(at) = layout.subgoal {
        polar(&mut scale, at);
    }
    if let Some(at) = layout.waypoints {
        for k in 0..crate::waypoints::WAYPOINT_COUNT {
            polar(&mut scale, at + 2 * k);
        }
    }
    if let Some(at) = layout.length {
        scale[at] = 1.0 / DISTANCE_SCALE;
    }
    debug_assert!(scale[..SCAN_BEAMS].iter().all(|&s| s == 1.0 / max_range));
    scale
}

#[derive(Debug, Clone)]
pub struct MlpPolicy {
    params: PolicyParams,
    scale: Vec<f64>,
}

impl MlpPolicy {
    pub fn new(params: PolicyParams) -> Result<Self> {
        params.validate()?;
        let scale = input_scale(params.variant, params.max_range);
        Ok(Self { params, scale })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// Raw network output in `[-1, 1]^2`.
    pub fn forward(&self, obs: &ObservationVector) -> Result<[f64; 2]> {
        let width = self.params.layers[0];
        if obs.len() != width || obs.variant != self.params.variant {
            return Err(NavError::DimensionMismatch { what: "observation", expected: width, actual: obs.len() });
        }
        let mut x: Vec<f64> = obs.values.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        let mut at = 0;
        for w in self.params.layers.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let mat = &self.params.weights[at..at + fan_in * fan_out];
            let bias = &self.params.weights[at + fan_in * fan_out..at + (fan_in + 1) * fan_out];
            x = mat
                .chunks_exact(fan_in)
                .zip(bias)
                .map(|(row, b)| (row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() + b).tanh())
                .collect();
            at += (fan_in + 1) * fan_out;
        }
        Ok([x[0], x[1]])
    }
}

impl Policy for MlpPolicy {
    fn act(&self, obs: &ObservationVector) -> Result<Action> {
        let [u, w] = self.forward(obs)?;
        Ok(self.params.limits.clamp(self.params.limits.from_unit(u, w)))
    }

    fn name(&self) -> String {
        format!("mlp-{}", self.params.variant)
    }
}
