//! Graph growth by the two-rule grammar: "add a node to a node" and "bisect
//! an edge". Every candidate is trial-fitted and the one with the largest
//! energy descent is committed, until the node budget is reached or the best
//! relative improvement falls below the threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::energy::Embedding;
use crate::graph::{ElasticGraph, GraphError, NodeId};
use crate::optimizer::{self, FitOutcome, OptimizerConfig, SolveError};

/// A grammar production applicable to the current graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrammarOp {
    AddNodeToNode { target: NodeId },
    BisectEdge { a: NodeId, b: NodeId },
}

/// Growth options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthConfig {
    /// Stop once the graph has this many nodes.
    pub max_nodes: usize,
    /// Fit iterations spent on each candidate trial.
    #[serde(default = "default_trial_iterations")]
    pub trial_iterations: usize,
    /// Minimum relative energy improvement required to commit a candidate.
    #[serde(default)]
    pub min_energy_improvement: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_trial_iterations() -> usize {
    10
}

impl GrowthConfig {
    pub fn new(max_nodes: usize, optimizer: OptimizerConfig) -> Self {
        GrowthConfig {
            max_nodes,
            trial_iterations: default_trial_iterations(),
            min_energy_improvement: 0.0,
            optimizer,
        }
    }
}

/// Errors raised while growing.
#[derive(Debug, thiserror::Error)]
pub enum GrowthError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("growth config: {0}")]
    BadConfig(String),
}

/// One committed growth step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthStep {
    pub step: usize,
    pub candidate_count: usize,
    pub chosen: GrammarOp,
    pub node_count: usize,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// The committed-step log of one growth run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GrowthLog {
    pub steps: Vec<GrowthStep>,
    pub initial_energy: f64,
    pub final_energy: f64,
}

/// Adds a fresh node joined to `target`. The new node starts at the weighted
/// mean of the target's close points when there are any; otherwise it is
/// extrapolated past the target away from its first neighbor
/// (`2 phi(target) - phi(neighbor)`), or placed on the target itself when it
/// has no neighbor.
pub fn apply_add_node(
    graph: &ElasticGraph,
    emb: &Embedding,
    target: NodeId,
    dataset: &Dataset,
    partition: &optimizer::Partition,
) -> Result<(ElasticGraph, Embedding), GrowthError> {
    let target_pos = emb.require(target).map_err(SolveError::from)?.to_vec();
    let (graph2, z) = graph.add_leaf(target)?;

    let mut sum = vec![0.0; emb.dim()];
    let mut weight = 0.0;
    for i in partition.points_of(target) {
        if partition.is_close(i) {
            let w = dataset.weight(i);
            weight += w;
            for (s, &x) in sum.iter_mut().zip(dataset.point(i)) {
                *s += w * x;
            }
        }
    }

    let position = if weight > 0.0 {
        sum.iter().map(|s| s / weight).collect()
    } else if let Some(&neighbor) = graph.neighbors(target)?.first() {
        let npos = emb.require(neighbor).map_err(SolveError::from)?;
        target_pos
            .iter()
            .zip(npos)
            .map(|(&t, &n)| 2.0 * t - n)
            .collect()
    } else {
        target_pos.clone()
    };

    let mut emb2 = emb.clone();
    emb2.set(z, position).map_err(SolveError::from)?;
    Ok((graph2, emb2))
}

/// Replaces edge `(a, b)` by two edges through a fresh node placed at the
/// midpoint of the edge's embedded endpoints.
pub fn apply_bisect_edge(
    graph: &ElasticGraph,
    emb: &Embedding,
    a: NodeId,
    b: NodeId,
) -> Result<(ElasticGraph, Embedding), GrowthError> {
    let pa = emb.require(a).map_err(SolveError::from)?;
    let pb = emb.require(b).map_err(SolveError::from)?;
    let midpoint: Vec<f64> = pa.iter().zip(pb).map(|(&x, &y)| 0.5 * (x + y)).collect();
    let (graph2, z) = graph.split_edge(a, b)?;
    let mut emb2 = emb.clone();
    emb2.set(z, midpoint).map_err(SolveError::from)?;
    Ok((graph2, emb2))
}

/// All applicable productions in deterministic order: one add-node per node
/// (ascending id), then one bisect per edge (lexicographic endpoint order).
pub fn enumerate_candidates(graph: &ElasticGraph) -> Vec<GrammarOp> {
    let mut ops = Vec::with_capacity(2 * graph.node_count() - 1);
    for &node in graph.nodes() {
        ops.push(GrammarOp::AddNodeToNode { target: node });
    }
    for edge in graph.edges() {
        ops.push(GrammarOp::BisectEdge {
            a: edge.a,
            b: edge.b,
        });
    }
    ops
}

fn apply_op(
    graph: &ElasticGraph,
    emb: &Embedding,
    op: GrammarOp,
    dataset: &Dataset,
    partition: &optimizer::Partition,
) -> Result<(ElasticGraph, Embedding), GrowthError> {
    match op {
        GrammarOp::AddNodeToNode { target } => {
            apply_add_node(graph, emb, target, dataset, partition)
        }
        GrammarOp::BisectEdge { a, b } => apply_bisect_edge(graph, emb, a, b),
    }
}

fn refit(
    graph: &ElasticGraph,
    dataset: &Dataset,
    emb: &Embedding,
    config: &OptimizerConfig,
    iterations: usize,
) -> Result<FitOutcome, SolveError> {
    let cfg = OptimizerConfig {
        max_iterations: iterations,
        ..*config
    };
    optimizer::fit(graph, dataset, emb, &cfg)
}

/// Grows the graph: every candidate is applied and trial-fitted; the one
/// with the lowest resulting total (ties: first in candidate order) is
/// committed and re-fitted to convergence. Stops at `max_nodes` or when the
/// best relative improvement drops below `min_energy_improvement`.
///
/// Candidate trials run in parallel; the reduction compares by energy and
/// then candidate order, so the result is independent of scheduling.
pub fn grow(
    dataset: &Dataset,
    graph_init: &ElasticGraph,
    emb_init: &Embedding,
    config: &GrowthConfig,
) -> Result<(ElasticGraph, Embedding, GrowthLog), GrowthError> {
    if config.max_nodes < graph_init.node_count() {
        return Err(GrowthError::BadConfig(format!(
            "max_nodes = {} is below the initial node count {}",
            config.max_nodes,
            graph_init.node_count()
        )));
    }
    if config.trial_iterations == 0 {
        return Err(GrowthError::BadConfig(
            "trial_iterations must be >= 1".into(),
        ));
    }
    config.optimizer.validate().map_err(GrowthError::Solve)?;

    let initial = optimizer::fit(graph_init, dataset, emb_init, &config.optimizer)?;
    let mut graph = graph_init.clone();
    let mut emb = initial.embedding;
    let mut partition = initial.partition;
    let mut energy = initial
        .trace
        .final_total()
        .expect("fit records at least one iteration");

    let mut log = GrowthLog {
        initial_energy: energy,
        final_energy: energy,
        ..GrowthLog::default()
    };

    while graph.node_count() < config.max_nodes {
        let candidates = enumerate_candidates(&graph);
        let trials: Vec<Result<f64, GrowthError>> = candidates
            .par_iter()
            .map(|&op| {
                let (g, e) = apply_op(&graph, &emb, op, dataset, &partition)?;
                let out = refit(&g, dataset, &e, &config.optimizer, config.trial_iterations)?;
                Ok(out.trace.final_total().expect("non-empty trace"))
            })
            .collect();

        let mut best: Option<(f64, usize)> = None;
        for (idx, trial) in trials.into_iter().enumerate() {
            let value = trial?;
            let better = match best {
                None => true,
                Some((b, _)) => value < b,
            };
            if better {
                best = Some((value, idx));
            }
        }
        let (best_energy, best_idx) = best.expect("at least one candidate");

        let improvement = if energy > 0.0 {
            (energy - best_energy) / energy
        } else {
            0.0
        };
        if !(improvement >= config.min_energy_improvement) {
            break;
        }

        let op = candidates[best_idx];
        let (g, e) = apply_op(&graph, &emb, op, dataset, &partition)?;
        let committed = optimizer::fit(&g, dataset, &e, &config.optimizer)?;
        let committed_energy = committed
            .trace
            .final_total()
            .expect("non-empty trace");
        graph = g;
        emb = committed.embedding;
        partition = committed.partition;
        log.steps.push(GrowthStep {
            step: log.steps.len() + 1,
            candidate_count: candidates.len(),
            chosen: op,
            node_count: graph.node_count(),
            energy_before: energy,
            energy_after: committed_energy,
        });
        energy = committed_energy;
    }

    log.final_energy = energy;
    Ok((graph, emb, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Mode;
    use crate::optimizer::build_partition;

    fn unit_partition(dataset: &Dataset, emb: &Embedding) -> optimizer::Partition {
        build_partition(dataset, emb, f64::INFINITY).unwrap()
    }

    fn line_dataset() -> Dataset {
        Dataset::from_rows((0..8).map(|i| vec![i as f64, 0.0]).collect()).unwrap()
    }

    fn two_node_state() -> (ElasticGraph, Embedding) {
        let g = ElasticGraph::new(2, &[(0, 1)], 0.01, 0.01, true).unwrap();
        let mut emb = Embedding::new(2);
        emb.set(NodeId(0), vec![0.0, 0.0]).unwrap();
        emb.set(NodeId(1), vec![7.0, 0.0]).unwrap();
        (g, emb)
    }

    #[test]
    fn add_node_to_path_leaf_creates_a_two_star() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let p = unit_partition(&ds, &emb);
        let (g2, e2) = apply_add_node(&g, &emb, NodeId(1), &ds, &p).unwrap();
        assert_eq!(g2.node_count(), 3);
        assert_eq!(g2.stars().len(), 1);
        assert_eq!(g2.stars()[0].center, NodeId(1));
        assert_eq!(e2.len(), 3);
    }

    #[test]
    fn add_node_to_star_center_raises_its_degree() {
        let g = ElasticGraph::new(4, &[(0, 1), (0, 2), (0, 3)], 1.0, 1.0, true).unwrap();
        let mut emb = Embedding::new(2);
        for (i, p) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]
            .iter()
            .enumerate()
        {
            emb.set(NodeId(i as u32), p.to_vec()).unwrap();
        }
        let ds = Dataset::from_rows(vec![vec![100.0, 100.0]]).unwrap();
        let p = build_partition(&ds, &emb, 0.5).unwrap();
        let (g2, _) = apply_add_node(&g, &emb, NodeId(0), &ds, &p).unwrap();
        assert_eq!(g2.stars().iter().find(|s| s.center == NodeId(0)).unwrap().degree(), 4);
    }

    #[test]
    fn empty_close_set_extrapolates_past_the_target() {
        let (g, emb) = two_node_state();
        // All data far from everything under a tiny radius.
        let ds = Dataset::from_rows(vec![vec![100.0, 100.0]]).unwrap();
        let p = build_partition(&ds, &emb, 0.5).unwrap();
        let (_, e2) = apply_add_node(&g, &emb, NodeId(1), &ds, &p).unwrap();
        // target = (7, 0), neighbor = (0, 0) → z = 2 * target - neighbor.
        assert_eq!(e2.get(NodeId(2)).unwrap(), &[14.0, 0.0]);
    }

    #[test]
    fn bisect_places_the_new_node_at_the_midpoint() {
        let (g, emb) = two_node_state();
        let (g2, e2) = apply_bisect_edge(&g, &emb, NodeId(0), NodeId(1)).unwrap();
        assert_eq!(g2.node_count(), 3);
        assert_eq!(g2.edge_count(), 2);
        assert!(g2.is_tree());
        assert_eq!(e2.get(NodeId(2)).unwrap(), &[3.5, 0.0]);
        // Collinear equally spaced nodes have zero star energy.
        let (_, star) = crate::energy::graph_energy(&g2, &e2).unwrap();
        assert!(star.abs() < 1e-15);
    }

    #[test]
    fn unknown_targets_error() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let p = unit_partition(&ds, &emb);
        assert!(apply_add_node(&g, &emb, NodeId(9), &ds, &p).is_err());
        assert!(apply_bisect_edge(&g, &emb, NodeId(0), NodeId(9)).is_err());
    }

    #[test]
    fn candidate_enumeration_is_deterministic_and_complete() {
        let (g, _) = two_node_state();
        let ops = enumerate_candidates(&g);
        assert_eq!(
            ops,
            vec![
                GrammarOp::AddNodeToNode { target: NodeId(0) },
                GrammarOp::AddNodeToNode { target: NodeId(1) },
                GrammarOp::BisectEdge {
                    a: NodeId(0),
                    b: NodeId(1)
                },
            ]
        );
        let g3 = ElasticGraph::new(3, &[(0, 1), (1, 2)], 1.0, 1.0, true).unwrap();
        assert_eq!(enumerate_candidates(&g3).len(), 5);
    }

    #[test]
    fn growth_respects_the_node_budget() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let cfg = GrowthConfig::new(2, OptimizerConfig::standard());
        let (g2, _, log) = grow(&ds, &g, &emb, &cfg).unwrap();
        assert_eq!(g2.node_count(), 2);
        assert!(log.steps.is_empty());
    }

    #[test]
    fn infinite_improvement_threshold_commits_nothing() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let cfg = GrowthConfig {
            min_energy_improvement: f64::INFINITY,
            ..GrowthConfig::new(6, OptimizerConfig::standard())
        };
        let (g2, _, log) = grow(&ds, &g, &emb, &cfg).unwrap();
        assert_eq!(g2.node_count(), 2);
        assert!(log.steps.is_empty());
    }

    #[test]
    fn committed_energies_never_increase() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let cfg = GrowthConfig::new(6, OptimizerConfig::standard());
        let (_, _, log) = grow(&ds, &g, &emb, &cfg).unwrap();
        let mut prev = log.initial_energy;
        for step in &log.steps {
            assert!(step.energy_after <= prev + 1e-12 * prev.max(1.0));
            prev = step.energy_after;
        }
        assert_eq!(log.final_energy, prev);
    }

    #[test]
    fn trees_stay_trees_and_primitive_through_growth() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let cfg = GrowthConfig::new(7, OptimizerConfig::standard());
        let (g2, _, _) = grow(&ds, &g, &emb, &cfg).unwrap();
        assert!(g2.is_tree());
        for &node in g2.nodes() {
            let deg = g2.degree(node).unwrap();
            let has_star = g2.stars().iter().any(|s| s.center == node);
            assert_eq!(has_star, deg >= 2);
        }
    }

    #[test]
    fn growth_is_deterministic() {
        let (g, emb) = two_node_state();
        let ds = line_dataset();
        let cfg = GrowthConfig {
            optimizer: OptimizerConfig {
                mode: Mode::Robust,
                r0: 3.0,
                ..OptimizerConfig::standard()
            },
            ..GrowthConfig::new(6, OptimizerConfig::standard())
        };
        let mut cfg = cfg;
        cfg.optimizer.mode = Mode::Robust;
        let a = grow(&ds, &g, &emb, &cfg).unwrap();
        let b = grow(&ds, &g, &emb, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(
            serde_json::to_string(&a.2).unwrap(),
            serde_json::to_string(&b.2).unwrap()
        );
    }
}
