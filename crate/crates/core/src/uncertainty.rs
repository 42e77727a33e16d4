//! Position noise models and their discretization onto graph nodes.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Point, TransportGraph, TravelTimeTable};

/// Default truncation threshold for beliefs.
pub const DEFAULT_P_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Gaussian,
    Laplace,
    CircularUniform,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Laplace => "laplace",
            NoiseKind::CircularUniform => "uniform",
        }
    }
}

/// Noise distribution added to true robot positions.
///
/// `scale` is the per-axis standard deviation for `Gaussian`, the per-axis
/// scale `b` for `Laplace` (std `b * sqrt(2)`), and the disk radius for
/// `CircularUniform`. Ignored for `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub scale: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec { kind: NoiseKind::None, scale: 0.0 };

    pub fn new(kind: NoiseKind, scale: f64) -> Result<Self, BeliefError> {
        if kind == NoiseKind::None {
            return Ok(Self::NONE);
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(BeliefError::InvalidNoise(format!("scale must be finite and >= 0, got {scale}")));
        }
        Ok(Self { kind, scale })
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, scale: sigma }
    }

    pub fn laplace(b: f64) -> Self {
        Self { kind: NoiseKind::Laplace, scale: b }
    }

    pub fn circular_uniform(radius: f64) -> Self {
        Self { kind: NoiseKind::CircularUniform, scale: radius }
    }

    /// True when this noise model applies no perturbation at all.
    pub fn is_degenerate(&self) -> bool {
        self.kind == NoiseKind::None || self.scale == 0.0
    }

    /// Per-axis standard deviation of the perturbation.
    pub fn axis_std(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian => self.scale,
            NoiseKind::Laplace => self.scale * std::f64::consts::SQRT_2,
            NoiseKind::CircularUniform => self.scale / 2.0,
        }
    }

    /// Same kind with a different scale; `None` stays `None`.
    pub fn with_scale(&self, scale: f64) -> Self {
        match self.kind {
            NoiseKind::None => Self::NONE,
            kind => Self { kind, scale },
        }
    }

    fn log_density(&self, dx: f64, dy: f64) -> f64 {
        match self.kind {
            NoiseKind::None => unreachable!("point-mass noise has no density"),
            NoiseKind::Gaussian => -(dx * dx + dy * dy) / (2.0 * self.scale * self.scale),
            NoiseKind::Laplace => -(dx.abs() + dy.abs()) / self.scale,
            NoiseKind::CircularUniform => {
                if dx.hypot(dy) <= self.scale {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::NONE
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::None => f.write_str("none"),
            kind => write!(f, "{}:{}", kind.as_str(), self.scale),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = BeliefError;

    /// Accepts `none`, `gaussian:<sigma>`, `laplace:<b>`, `uniform:<radius>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Self::NONE);
        }
        let (kind, scale) = s
            .split_once(':')
            .ok_or_else(|| BeliefError::InvalidNoise(format!("expected `<kind>:<scale>` or `none`, got `{s}`")))?;
        let kind = match kind.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => NoiseKind::Gaussian,
            "laplace" => NoiseKind::Laplace,
            "uniform" | "circular_uniform" => NoiseKind::CircularUniform,
            "none" => NoiseKind::None,
            other => return Err(BeliefError::InvalidNoise(format!("unknown noise kind `{other}`"))),
        };
        let scale: f64 = scale
            .parse()
            .map_err(|_| BeliefError::InvalidNoise(format!("invalid noise scale `{scale}`")))?;
        Self::new(kind, scale)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("p_min must lie in [0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("belief is empty after truncation at p_min={p_min}")]
    Degenerate { p_min: f64 },
    #[error("invalid belief: {0}")]
    InvalidMass(String),
}

/// Draws one reported position around `true_position`.
pub fn sample_reported_position<R: Rng + ?Sized>(true_position: Point, noise: &NoiseSpec, rng: &mut R) -> Point {
    let (dx, dy) = match noise.kind {
        NoiseKind::None => return true_position,
        NoiseKind::Gaussian => {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            (a * noise.scale, b * noise.scale)
        }
        NoiseKind::Laplace => (sample_laplace(noise.scale, rng), sample_laplace(noise.scale, rng)),
        NoiseKind::CircularUniform => {
            let r = noise.scale * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            (r * theta.cos(), r * theta.sin())
        }
    };
    Point::new(true_position.x + dx, true_position.y + dy)
}

fn sample_laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    // inverse CDF on u in (-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Discrete probability mass over graph nodes for one robot's true
/// location. Support is sorted by node id, all masses are positive and
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionBelief {
    support: Vec<(NodeId, f64)>,
}

impl PositionBelief {
    pub fn point_mass(node: NodeId) -> Self {
        Self { support: vec![(node, 1.0)] }
    }

    /// Normalizes the given non-negative masses; zero entries are dropped
    /// and repeated nodes are merged.
    pub fn from_masses(masses: impl IntoIterator<Item = (NodeId, f64)>) -> Result<Self, BeliefError> {
        let mut support: Vec<(NodeId, f64)> = Vec::new();
        for (node, p) in masses {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(BeliefError::InvalidMass(format!("mass {p} at node {node}")));
            }
            if p > 0.0 {
                support.push((node, p));
            }
        }
        support.sort_by_key(|&(n, _)| n);
        support.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        if support.is_empty() {
            return Err(BeliefError::InvalidMass("no positive mass".into()));
        }
        normalize(&mut support);
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(NodeId, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability(&self, node: NodeId) -> f64 {
        self.support
            .binary_search_by_key(&node, |&(n, _)| n)
            .map_or(0.0, |i| self.support[i].1)
    }

    /// Most likely node; ties to the lowest id.
    pub fn mode(&self) -> NodeId {
        let mut best = self.support[0];
        for &(n, p) in &self.support[1..] {
            if p > best.1 {
                best = (n, p);
            }
        }
        best.0
    }
}

fn normalize(support: &mut [(NodeId, f64)]) {
    let total: f64 = support.iter().map(|&(_, p)| p).sum();
    for e in support.iter_mut() {
        e.1 /= total;
    }
}

/// Reverse belief over nodes given a reported position.
///
/// The noise density centred at `reported` is evaluated at every node,
/// normalized, entries with probability `<= p_min` are dropped and the
/// survivors renormalized. Degenerate noise yields a point mass at the
/// node nearest to `reported`.
pub fn node_belief(
    graph: &TransportGraph,
    reported: Point,
    noise: &NoiseSpec,
    p_min: f64,
) -> Result<PositionBelief, BeliefError> {
    if !(0.0..1.0).contains(&p_min) {
        return Err(BeliefError::InvalidThreshold(p_min));
    }
    if noise.is_degenerate() {
        return Ok(PositionBelief::point_mass(graph.nearest_node(reported)));
    }

    let log_w: Vec<f64> = graph
        .positions()
        .iter()
        .map(|p| noise.log_density(p.x - reported.x, p.y - reported.y))
        .collect();
    let peak = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(BeliefError::Degenerate { p_min });
    }
    let mut support: Vec<(NodeId, f64)> = log_w
        .iter()
        .enumerate()
        .map(|(i, &lw)| (NodeId::from(i), (lw - peak).exp()))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    normalize(&mut support);
    support.retain(|&(_, p)| p > p_min);
    if support.is_empty() {
        return Err(BeliefError::Degenerate { p_min });
    }
    normalize(&mut support);
    Ok(PositionBelief { support })
}

/// Expected travel time of a robot with `belief` to goal index `goal`.
pub fn expected_cost(belief: &PositionBelief, table: &TravelTimeTable, goal: usize) -> f64 {
    let row = table.row(goal);
    belief.support.iter().map(|&(v, p)| p * row[v.index()]).sum()
}
