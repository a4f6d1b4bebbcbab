//! Elastic graph energy and the data-approximation terms.
//!
//! The graph energy penalizes edge stretching and the deviation of each star
//! center from the mean of its leaves; the approximation term is the
//! weight-normalized squared distance of every data point to its nearest
//! node, optionally trimmed at the robustness radius so that distant points
//! contribute a constant instead of an unbounded pull.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::graph::{ElasticGraph, NodeId};
use crate::optimizer::Partition;

/// Approximation-term flavor: plain quadratic or trimmed at the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Robust,
}

/// The map from graph nodes to positions in data space.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dim: usize,
    positions: BTreeMap<NodeId, Vec<f64>>,
}

/// Errors raised by energy evaluation.
#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("node {0} has no position in the embedding")]
    MissingPosition(NodeId),
    #[error("position for node {0} has dimension {1}, expected {2}")]
    DimensionMismatch(NodeId, usize, usize),
    #[error("non-finite coordinate in the position of node {0}")]
    NonFinite(NodeId),
    #[error("partition covers {0} points, dataset has {1}")]
    PartitionSize(usize, usize),
    #[error("partition assigns point {0} to node {1} which is not in the embedding")]
    PartitionNode(usize, NodeId),
    #[error("embedding dimension {0} does not match dataset dimension {1}")]
    DataDimension(usize, usize),
    #[error("robustness radius must be positive, got {0}")]
    BadRadius(f64),
}

impl Embedding {
    pub fn new(dim: usize) -> Self {
        Embedding {
            dim,
            positions: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn set(&mut self, node: NodeId, position: Vec<f64>) -> Result<(), EnergyError> {
        if position.len() != self.dim {
            return Err(EnergyError::DimensionMismatch(
                node,
                position.len(),
                self.dim,
            ));
        }
        if position.iter().any(|v| !v.is_finite()) {
            return Err(EnergyError::NonFinite(node));
        }
        self.positions.insert(node, position);
        Ok(())
    }

    pub fn get(&self, node: NodeId) -> Option<&[f64]> {
        self.positions.get(&node).map(|p| p.as_slice())
    }

    pub fn require(&self, node: NodeId) -> Result<&[f64], EnergyError> {
        self.get(node).ok_or(EnergyError::MissingPosition(node))
    }

    /// Nodes in ascending id order with their positions.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[f64])> + '_ {
        self.positions.iter().map(|(id, p)| (*id, p.as_slice()))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.positions.keys().copied()
    }

    /// Builds an embedding covering `graph` from a closure.
    pub fn from_fn<F>(graph: &ElasticGraph, dim: usize, mut f: F) -> Result<Self, EnergyError>
    where
        F: FnMut(NodeId) -> Vec<f64>,
    {
        let mut emb = Embedding::new(dim);
        for &node in graph.nodes() {
            emb.set(node, f(node))?;
        }
        Ok(emb)
    }
}

/// Decomposed energy values for one graph/embedding/partition state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub edge_energy: f64,
    pub star_energy: f64,
    pub approx_energy: f64,
    pub total: f64,
    pub robust_mode: bool,
    /// Robustness radius; `infinity` in standard mode.
    pub r0: f64,
}

/// Neumaier-compensated accumulator: keeps energy sums exact well beyond
/// plain f64 accumulation, so monotonicity checks are about the algorithm
/// rather than summation noise.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Per-point trimmed contribution: quadratic below the radius, constant
/// `r0^2` above. Continuous with non-negative one-sided derivatives.
pub fn trimmed_contribution(squared_dist: f64, r0: f64) -> f64 {
    squared_dist.min(r0 * r0)
}

/// Edge and star terms of the graph energy.
///
/// Edge term: sum of `lambda * |phi(a) - phi(b)|^2`; star term: sum of
/// `mu * |phi(center) - mean(phi(leaves))|^2`.
pub fn graph_energy(graph: &ElasticGraph, emb: &Embedding) -> Result<(f64, f64), EnergyError> {
    let mut edge_sum = KahanSum::default();
    for edge in graph.edges() {
        let a = emb.require(edge.a)?;
        let b = emb.require(edge.b)?;
        edge_sum.add(edge.lambda * squared_distance(a, b));
    }
    let mut star_sum = KahanSum::default();
    let mut mean = vec![0.0; emb.dim()];
    for star in graph.stars() {
        let center = emb.require(star.center)?;
        mean.iter_mut().for_each(|v| *v = 0.0);
        for leaf in &star.leaves {
            let p = emb.require(*leaf)?;
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += x;
            }
        }
        let k = star.leaves.len() as f64;
        mean.iter_mut().for_each(|v| *v /= k);
        star_sum.add(star.mu * squared_distance(center, &mean));
    }
    Ok((edge_sum.value(), star_sum.value()))
}

fn check_partition(
    dataset: &Dataset,
    emb: &Embedding,
    partition: &Partition,
) -> Result<(), EnergyError> {
    if partition.len() != dataset.n_points() {
        return Err(EnergyError::PartitionSize(
            partition.len(),
            dataset.n_points(),
        ));
    }
    if emb.dim() != dataset.dim() {
        return Err(EnergyError::DataDimension(emb.dim(), dataset.dim()));
    }
    for (i, owner) in partition.owners().iter().enumerate() {
        if emb.get(*owner).is_none() {
            return Err(EnergyError::PartitionNode(i, *owner));
        }
    }
    Ok(())
}

/// Standard approximation energy: weight-normalized sum of squared
/// point-to-owner distances. Summation order is node id, then point index.
pub fn approx_energy(
    dataset: &Dataset,
    emb: &Embedding,
    partition: &Partition,
) -> Result<f64, EnergyError> {
    check_partition(dataset, emb, partition)?;
    let mut sum = KahanSum::default();
    for (node, pos) in emb.iter() {
        for i in partition.points_of(node) {
            sum.add(dataset.weight(i) * squared_distance(dataset.point(i), pos));
        }
    }
    Ok(sum.value() / dataset.total_weight())
}

/// Trimmed approximation energy: per-point contributions are capped at
/// `r0^2`, so the result never exceeds `r0^2` and never exceeds the
/// untrimmed energy.
pub fn robust_approx_energy(
    dataset: &Dataset,
    emb: &Embedding,
    partition: &Partition,
    r0: f64,
) -> Result<f64, EnergyError> {
    if r0.is_nan() || r0 <= 0.0 {
        return Err(EnergyError::BadRadius(r0));
    }
    check_partition(dataset, emb, partition)?;
    let mut sum = KahanSum::default();
    for (node, pos) in emb.iter() {
        for i in partition.points_of(node) {
            let d2 = squared_distance(dataset.point(i), pos);
            sum.add(dataset.weight(i) * trimmed_contribution(d2, r0));
        }
    }
    Ok(sum.value() / dataset.total_weight())
}

/// Full decomposed energy: edge + star + approximation (standard or
/// trimmed).
pub fn total_energy(
    graph: &ElasticGraph,
    emb: &Embedding,
    dataset: &Dataset,
    partition: &Partition,
    mode: Mode,
    r0: f64,
) -> Result<EnergyReport, EnergyError> {
    let (edge_energy, star_energy) = graph_energy(graph, emb)?;
    let approx = match mode {
        Mode::Standard => approx_energy(dataset, emb, partition)?,
        Mode::Robust => robust_approx_energy(dataset, emb, partition, r0)?,
    };
    Ok(EnergyReport {
        edge_energy,
        star_energy,
        approx_energy: approx,
        total: edge_energy + star_energy + approx,
        robust_mode: mode == Mode::Robust,
        r0: match mode {
            Mode::Standard => f64::INFINITY,
            Mode::Robust => r0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::build_partition;

    fn path_graph() -> ElasticGraph {
        ElasticGraph::new(3, &[(0, 1), (1, 2)], 1.0, 1.0, true).unwrap()
    }

    fn path_embedding(points: &[[f64; 2]]) -> Embedding {
        let mut emb = Embedding::new(2);
        for (i, p) in points.iter().enumerate() {
            emb.set(NodeId(i as u32), p.to_vec()).unwrap();
        }
        emb
    }

    #[test]
    fn coincident_nodes_have_zero_energy() {
        let g = path_graph();
        let emb = path_embedding(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]);
        let (e, s) = graph_energy(&g, &emb).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn straight_path_energy_matches_direct_evaluation() {
        let g = path_graph();
        let emb = path_embedding(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let (e, s) = graph_energy(&g, &emb).unwrap();
        assert!((e - 2.0).abs() < 1e-15);
        assert!(s.abs() < 1e-15);
    }

    #[test]
    fn rotation_leaves_energies_unchanged() {
        let g = path_graph();
        let emb = path_embedding(&[[0.0, 0.0], [1.0, 0.3], [2.0, -0.4]]);
        let angle: f64 = 0.7;
        let (c, sn) = (angle.cos(), angle.sin());
        let rotated = path_embedding(&[
            [0.0, 0.0],
            [c * 1.0 - sn * 0.3, sn * 1.0 + c * 0.3],
            [c * 2.0 + sn * 0.4, sn * 2.0 - c * 0.4],
        ]);
        let (e1, s1) = graph_energy(&g, &emb).unwrap();
        let (e2, s2) = graph_energy(&g, &rotated).unwrap();
        assert!((e1 - e2).abs() < 1e-12 * e1.max(1.0));
        assert!((s1 - s2).abs() < 1e-12 * s1.max(1.0));
    }

    #[test]
    fn missing_position_error_names_the_node() {
        let g = path_graph();
        let mut emb = Embedding::new(2);
        emb.set(NodeId(0), vec![0.0, 0.0]).unwrap();
        emb.set(NodeId(1), vec![1.0, 0.0]).unwrap();
        match graph_energy(&g, &emb).unwrap_err() {
            EnergyError::MissingPosition(n) => assert_eq!(n, NodeId(2)),
            other => panic!("unexpected error {other}"),
        }
    }

    fn one_node_setup(points: Vec<Vec<f64>>) -> (Dataset, Embedding, Partition) {
        let ds = Dataset::from_rows(points).unwrap();
        let g = ElasticGraph::new(1, &[], 1.0, 1.0, true).unwrap();
        let mut emb = Embedding::new(ds.dim());
        emb.set(NodeId(0), vec![0.0; ds.dim()]).unwrap();
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let _ = g;
        (ds, emb, part)
    }

    #[test]
    fn coincident_point_contributes_zero() {
        let (ds, emb, part) = one_node_setup(vec![vec![0.0, 0.0]]);
        assert_eq!(approx_energy(&ds, &emb, &part).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_pair_gives_unit_energy() {
        let (ds, emb, part) = one_node_setup(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let e = approx_energy(&ds, &emb, &part).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_weight_scaling_is_invisible() {
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.3, 0.3]];
        let ds1 = Dataset::new(rows.clone(), vec![1.0, 1.0, 1.0], None).unwrap();
        let ds2 = Dataset::new(rows, vec![2.0, 2.0, 2.0], None).unwrap();
        let mut emb = Embedding::new(2);
        emb.set(NodeId(0), vec![0.0, 0.0]).unwrap();
        let p1 = build_partition(&ds1, &emb, f64::INFINITY).unwrap();
        let p2 = build_partition(&ds2, &emb, f64::INFINITY).unwrap();
        let e1 = approx_energy(&ds1, &emb, &p1).unwrap();
        let e2 = approx_energy(&ds2, &emb, &p2).unwrap();
        assert!((e1 - e2).abs() < 1e-14);
    }

    #[test]
    fn trimming_caps_distant_points() {
        let (ds, emb, _) = one_node_setup(vec![vec![3.0, 0.0]]);
        let part = build_partition(&ds, &emb, 1.0).unwrap();
        let e = robust_approx_energy(&ds, &emb, &part, 1.0).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trimming_is_inactive_within_radius() {
        let (ds, emb, _) = one_node_setup(vec![vec![0.5, 0.0], vec![-0.25, 0.1]]);
        let part = build_partition(&ds, &emb, 2.0).unwrap();
        let plain = approx_energy(&ds, &emb, &part).unwrap();
        let robust = robust_approx_energy(&ds, &emb, &part, 2.0).unwrap();
        assert_eq!(plain, robust);
    }

    #[test]
    fn infinite_radius_recovers_standard_energy() {
        let (ds, emb, part) = one_node_setup(vec![vec![10.0, -4.0], vec![0.5, 2.0]]);
        let plain = approx_energy(&ds, &emb, &part).unwrap();
        let robust = robust_approx_energy(&ds, &emb, &part, f64::INFINITY).unwrap();
        assert_eq!(plain, robust);
    }

    #[test]
    fn non_positive_radius_is_rejected() {
        let (ds, emb, part) = one_node_setup(vec![vec![1.0, 0.0]]);
        assert!(robust_approx_energy(&ds, &emb, &part, 0.0).is_err());
        assert!(robust_approx_energy(&ds, &emb, &part, -1.0).is_err());
    }

    #[test]
    fn degenerate_moduli_reduce_total_to_approximation() {
        let g = ElasticGraph::new(2, &[(0, 1)], 0.0, 0.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![4.0, 0.0]]).unwrap();
        let mut emb = Embedding::new(2);
        emb.set(NodeId(0), vec![1.0, 0.0]).unwrap();
        emb.set(NodeId(1), vec![3.0, 0.0]).unwrap();
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let report = total_energy(&g, &emb, &ds, &part, Mode::Standard, f64::INFINITY).unwrap();
        let approx = approx_energy(&ds, &emb, &part).unwrap();
        assert_eq!(report.total, approx);
        assert_eq!(report.edge_energy, 0.0);
        assert_eq!(report.star_energy, 0.0);
    }

    #[test]
    fn report_components_match_individual_evaluations() {
        let g = path_graph();
        let emb = path_embedding(&[[0.0, 0.0], [1.5, 0.5], [2.0, -0.5]]);
        let ds = Dataset::from_rows(vec![vec![0.1, 0.0], vec![1.4, 0.6], vec![2.2, -0.3]]).unwrap();
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let report = total_energy(&g, &emb, &ds, &part, Mode::Standard, f64::INFINITY).unwrap();
        let (e, s) = graph_energy(&g, &emb).unwrap();
        let a = approx_energy(&ds, &emb, &part).unwrap();
        assert_eq!(report.edge_energy, e);
        assert_eq!(report.star_energy, s);
        assert_eq!(report.approx_energy, a);
        assert_eq!(report.total, e + s + a);
    }

    #[test]
    fn robust_total_with_infinite_radius_equals_standard_total() {
        let g = path_graph();
        let emb = path_embedding(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let ds = Dataset::from_rows(vec![vec![0.0, 5.0], vec![2.0, -5.0]]).unwrap();
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let std = total_energy(&g, &emb, &ds, &part, Mode::Standard, f64::INFINITY).unwrap();
        let rob = total_energy(&g, &emb, &ds, &part, Mode::Robust, f64::INFINITY).unwrap();
        assert_eq!(std.total, rob.total);
    }
}
