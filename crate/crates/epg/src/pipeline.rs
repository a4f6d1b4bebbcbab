//! End-to-end training: initialization strategies and multi-epoch runs,
//! including the two-epoch hybrid (coarse standard epoch, then a robust
//! epoch with reduced elasticity).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{pca_fit, DataError, Dataset};
use crate::energy::{Embedding, EnergyError, Mode};
use crate::grammar::{self, GrowthConfig, GrowthError, GrowthLog};
use crate::graph::{ElasticGraph, GraphError, NodeId};
use crate::optimizer::{self, FitTrace, OptimizerConfig, SolveError};

/// How the initial 2-node segment is placed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Nodes at the weighted mean +/- half a standard deviation along the
    /// first principal axis.
    PrincipalSegment,
    /// One node on the densest point (smallest k-th neighbor distance), the
    /// other at the mean of that point's k nearest neighbors.
    LocalNeighborhood { seed: u64, k_density: usize },
}

/// One training epoch: moduli, mode/radius, and either a growth phase or a
/// fit of the existing topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochSpec {
    pub mode: Mode,
    pub lambda: f64,
    pub mu: f64,
    /// Robustness radius; absent means infinite (standard fitting).
    #[serde(
        default = "infinity",
        serialize_with = "crate::optimizer::serialize_radius",
        deserialize_with = "crate::optimizer::deserialize_radius"
    )]
    pub r0: f64,
    /// Growth settings, or the literal string `"fit-only"`.
    pub growth: GrowthSetting,
}

fn infinity() -> f64 {
    f64::INFINITY
}

/// Either a growth phase or plain re-fitting of the current topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GrowthSetting {
    FitOnly(FitOnlyTag),
    Grow(GrowthConfig),
}

/// Serialized as the string `"fit-only"`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum FitOnlyTag {
    #[serde(rename = "fit-only")]
    FitOnly,
}

impl GrowthSetting {
    pub fn fit_only() -> Self {
        GrowthSetting::FitOnly(FitOnlyTag::FitOnly)
    }
}

/// Errors raised by initialization and epoch running.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("initialization needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("k_density = {0} must be in 1..{1}")]
    BadNeighborhood(usize, usize),
    #[error("epoch list must not be empty")]
    NoEpochs,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// Phase record of one epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mode: Mode,
    pub lambda: f64,
    pub mu: f64,
    #[serde(
        serialize_with = "crate::optimizer::serialize_radius",
        deserialize_with = "crate::optimizer::deserialize_radius"
    )]
    pub r0: f64,
    pub node_count: usize,
    pub final_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthLog>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitTrace>,
}

/// Builds the initial 2-node, 1-edge graph and its embedding. Moduli are
/// both 1.0; epoch running retags them per epoch.
pub fn initialize(
    dataset: &Dataset,
    strategy: &InitStrategy,
) -> Result<(ElasticGraph, Embedding), PipelineError> {
    let n = dataset.n_points();
    if n < 2 {
        return Err(PipelineError::TooFewPoints(n));
    }
    let m = dataset.dim();
    let graph = ElasticGraph::new(2, &[(0, 1)], 1.0, 1.0, true)?;
    let mut emb = Embedding::new(m);

    match strategy {
        InitStrategy::PrincipalSegment => {
            let model = pca_fit(dataset, 1)?;
            let spread = 0.5 * model.explained_variance[0].sqrt();
            let axis = &model.components[0];
            let a: Vec<f64> = model
                .mean
                .iter()
                .zip(axis)
                .map(|(&mu, &v)| mu - spread * v)
                .collect();
            let b: Vec<f64> = model
                .mean
                .iter()
                .zip(axis)
                .map(|(&mu, &v)| mu + spread * v)
                .collect();
            emb.set(NodeId(0), a)?;
            emb.set(NodeId(1), b)?;
        }
        InitStrategy::LocalNeighborhood { seed: _, k_density } => {
            let k = *k_density;
            if k == 0 || k >= n {
                return Err(PipelineError::BadNeighborhood(k, n));
            }
            // Densest point: smallest distance to its k-th nearest neighbor,
            // ties broken by smallest index.
            let mut best: Option<(f64, usize)> = None;
            let mut dists = Vec::with_capacity(n - 1);
            for i in 0..n {
                dists.clear();
                for j in 0..n {
                    if j != i {
                        dists.push(crate::energy::squared_distance(
                            dataset.point(i),
                            dataset.point(j),
                        ));
                    }
                }
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let kth = dists[k - 1];
                if best.map(|(d, _)| kth < d).unwrap_or(true) {
                    best = Some((kth, i));
                }
            }
            let (_, seed_point) = best.expect("n >= 2");
            let mut neighbors: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != seed_point)
                .map(|j| {
                    (
                        crate::energy::squared_distance(
                            dataset.point(seed_point),
                            dataset.point(j),
                        ),
                        j,
                    )
                })
                .collect();
            neighbors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut mean = vec![0.0; m];
            for &(_, j) in neighbors.iter().take(k) {
                for (s, &x) in mean.iter_mut().zip(dataset.point(j)) {
                    *s += x;
                }
            }
            for v in &mut mean {
                *v /= k as f64;
            }
            emb.set(NodeId(0), dataset.point(seed_point).to_vec())?;
            emb.set(NodeId(1), mean)?;
        }
    }
    Ok((graph, emb))
}

/// Runs the epochs in order: the first starts from [`initialize`], each
/// later epoch starts from the previous epoch's graph and embedding with its
/// own moduli, mode, radius and growth settings.
pub fn run_epochs(
    dataset: &Dataset,
    epochs: &[EpochSpec],
    strategy: &InitStrategy,
) -> Result<(ElasticGraph, Embedding, Vec<EpochLog>), PipelineError> {
    if epochs.is_empty() {
        return Err(PipelineError::NoEpochs);
    }
    let (mut graph, mut emb) = initialize(dataset, strategy)?;
    let mut logs = Vec::with_capacity(epochs.len());

    for (idx, epoch) in epochs.iter().enumerate() {
        graph = graph.with_uniform_moduli(epoch.lambda, epoch.mu)?;
        let log = match &epoch.growth {
            GrowthSetting::Grow(growth) => {
                let growth = GrowthConfig {
                    optimizer: epoch_optimizer(epoch, &growth.optimizer),
                    ..growth.clone()
                };
                let (g, e, glog) = grammar::grow(dataset, &graph, &emb, &growth)?;
                graph = g;
                emb = e;
                EpochLog {
                    epoch: idx + 1,
                    mode: epoch.mode,
                    lambda: epoch.lambda,
                    mu: epoch.mu,
                    r0: epoch.r0,
                    node_count: graph.node_count(),
                    final_energy: glog.final_energy,
                    growth: Some(glog),
                    fit: None,
                }
            }
            GrowthSetting::FitOnly(_) => {
                let cfg = epoch_optimizer(epoch, &OptimizerConfig::default());
                let out = optimizer::fit(&graph, dataset, &emb, &cfg)?;
                emb = out.embedding;
                EpochLog {
                    epoch: idx + 1,
                    mode: epoch.mode,
                    lambda: epoch.lambda,
                    mu: epoch.mu,
                    r0: epoch.r0,
                    node_count: graph.node_count(),
                    final_energy: out.trace.final_total().unwrap_or(f64::NAN),
                    growth: None,
                    fit: Some(out.trace),
                }
            }
        };
        logs.push(log);
    }
    Ok((graph, emb, logs))
}

/// Epoch mode and radius override whatever the growth config carried.
fn epoch_optimizer(epoch: &EpochSpec, base: &OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        mode: epoch.mode,
        r0: epoch.r0,
        ..*base
    }
}

/// The shipped two-epoch hybrid: a coarse standard epoch growing to
/// `max_nodes_coarse`, then a robust epoch with both moduli divided by
/// `soften_factor` growing to `max_nodes_fine`.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_preset(
    lambda: f64,
    mu: f64,
    r0: f64,
    soften_factor: f64,
    max_nodes_coarse: usize,
    max_nodes_fine: usize,
    trial_iterations: usize,
    ridge: f64,
) -> Vec<EpochSpec> {
    let coarse_opt = OptimizerConfig {
        ridge,
        ..OptimizerConfig::standard()
    };
    let fine_opt = OptimizerConfig {
        ridge,
        ..OptimizerConfig::robust(r0)
    };
    vec![
        EpochSpec {
            mode: Mode::Standard,
            lambda,
            mu,
            r0: f64::INFINITY,
            growth: GrowthSetting::Grow(GrowthConfig {
                trial_iterations,
                ..GrowthConfig::new(max_nodes_coarse, coarse_opt)
            }),
        },
        EpochSpec {
            mode: Mode::Robust,
            lambda: lambda / soften_factor,
            mu: mu / soften_factor,
            r0,
            growth: GrowthSetting::Grow(GrowthConfig {
                trial_iterations,
                ..GrowthConfig::new(max_nodes_fine, fine_opt)
            }),
        },
    ]
}
