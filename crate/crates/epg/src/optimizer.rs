//! The splitting algorithm: alternate nearest-node partitioning (with a
//! close/far split at the robustness radius) and exact minimization of the
//! quadratic surrogate over node positions.
//!
//! Within one solve step the close/far classification is frozen; far points
//! contribute a constant to the energy and are absent from the linear
//! system, which is what keeps the trimmed total energy a Lyapunov function
//! of the iteration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::energy::{
    graph_energy, squared_distance, trimmed_contribution, Embedding, EnergyError, EnergyReport,
    KahanSum, Mode,
};
use crate::graph::{ElasticGraph, NodeId};

/// Per-point nearest-node assignment plus the close/far flag.
///
/// `owner(i)` is the node minimizing the distance to point `i` under the
/// positions the partition was built from, ties broken by smallest id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    owners: Vec<NodeId>,
    close: Vec<bool>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn owner(&self, point: usize) -> NodeId {
        self.owners[point]
    }

    pub fn is_close(&self, point: usize) -> bool {
        self.close[point]
    }

    pub fn owners(&self) -> &[NodeId] {
        &self.owners
    }

    pub fn close_flags(&self) -> &[bool] {
        &self.close
    }

    /// Indices of the points owned by `node`, in ascending point order.
    pub fn points_of(&self, node: NodeId) -> impl Iterator<Item = usize> + '_ {
        self.owners
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == node)
            .map(|(i, _)| i)
    }

    /// Total weight of the points flagged close.
    pub fn close_weight(&self, dataset: &Dataset) -> f64 {
        self.close
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| dataset.weight(i))
            .sum()
    }

    /// Number of points whose owner change affects the optimization state:
    /// the point is close in one of the two partitions. A point that stays
    /// beyond the radius contributes a constant wherever it is owned, so its
    /// owner flips neither move nodes nor change the energy.
    pub fn reassigned_from(&self, other: &Partition) -> usize {
        self.owners
            .iter()
            .zip(other.owners.iter())
            .enumerate()
            .filter(|(i, (a, b))| a != b && (self.close[*i] || other.close[*i]))
            .count()
    }

    pub fn flags_differ(&self, other: &Partition) -> bool {
        self.close != other.close
    }
}

/// Errors raised by partitioning and position solving.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("cannot partition against an empty node set")]
    EmptyNodeSet,
    #[error(
        "singular linear system{}; set ridge > 0 to regularize",
        .node.map(|n| format!(" (node {n} is unconstrained)")).unwrap_or_default()
    )]
    Singular { node: Option<NodeId> },
    #[error("invalid optimizer configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Configuration of one splitting run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub mode: Mode,
    /// Robustness radius. Ignored (treated as infinite) in standard mode.
    #[serde(
        default = "default_infinity",
        serialize_with = "serialize_radius",
        deserialize_with = "deserialize_radius"
    )]
    pub r0: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Optional early stop: relative energy decrease below this ends the
    /// run. Zero (the default) disables it, leaving exact assignment
    /// stability as the only convergence test.
    #[serde(default)]
    pub energy_tolerance: f64,
    /// Added to the diagonal of the linear system, with a matching pull
    /// toward the previous positions, so data-free nodes stay put and the
    /// system stays definite.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_infinity() -> f64 {
    f64::INFINITY
}

fn default_ridge() -> f64 {
    1e-9
}

fn default_max_iterations() -> usize {
    100
}

pub(crate) fn serialize_radius<S>(v: &f64, s: S) -> Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

pub(crate) fn deserialize_radius<'de, D>(d: D) -> Result<f64, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::standard()
    }
}

impl OptimizerConfig {
    pub fn standard() -> Self {
        OptimizerConfig {
            mode: Mode::Standard,
            r0: f64::INFINITY,
            max_iterations: default_max_iterations(),
            energy_tolerance: 0.0,
            ridge: default_ridge(),
        }
    }

    pub fn robust(r0: f64) -> Self {
        OptimizerConfig {
            mode: Mode::Robust,
            r0,
            ..OptimizerConfig::standard()
        }
    }

    /// The radius actually applied: standard mode forces infinity.
    pub fn effective_r0(&self) -> f64 {
        match self.mode {
            Mode::Standard => f64::INFINITY,
            Mode::Robust => self.r0,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.mode == Mode::Robust && !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(SolveError::BadConfig(format!(
                "robust mode requires a finite positive r0, got {}",
                self.r0
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::BadConfig("max_iterations must be >= 1".into()));
        }
        if !self.energy_tolerance.is_finite() || self.energy_tolerance < 0.0 {
            return Err(SolveError::BadConfig(format!(
                "energy_tolerance must be non-negative, got {}",
                self.energy_tolerance
            )));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(SolveError::BadConfig(format!(
                "ridge must be non-negative, got {}",
                self.ridge
            )));
        }
        Ok(())
    }
}

/// One iteration record of a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitEntry {
    pub report: EnergyReport,
    pub points_reassigned: usize,
}

/// Per-iteration energy reports; totals are non-increasing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitTrace {
    pub entries: Vec<FitEntry>,
    pub converged: bool,
}

impl FitTrace {
    pub fn final_total(&self) -> Option<f64> {
        self.entries.last().map(|e| e.report.total)
    }

    pub fn iterations(&self) -> usize {
        self.entries.len()
    }
}

/// Result of [`fit`]: final embedding, the partition built from it, and the
/// iteration trace.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub embedding: Embedding,
    pub partition: Partition,
    pub trace: FitTrace,
}

/// Assigns every point to its nearest node (smallest-id tie-break) and flags
/// it close when the distance is within `r0` (boundary counts as close).
pub fn build_partition(
    dataset: &Dataset,
    emb: &Embedding,
    r0: f64,
) -> Result<Partition, SolveError> {
    if emb.is_empty() {
        return Err(SolveError::EmptyNodeSet);
    }
    if emb.dim() != dataset.dim() {
        return Err(EnergyError::DataDimension(emb.dim(), dataset.dim()).into());
    }
    let nodes: Vec<(NodeId, &[f64])> = emb.iter().collect();
    let r0_sq = r0 * r0;
    let n = dataset.n_points();
    let mut owners = Vec::with_capacity(n);
    let mut close = Vec::with_capacity(n);
    for i in 0..n {
        let point = dataset.point(i);
        let mut best = nodes[0].0;
        let mut best_d2 = squared_distance(point, nodes[0].1);
        for (node, pos) in &nodes[1..] {
            let d2 = squared_distance(point, pos);
            if d2 < best_d2 {
                best_d2 = d2;
                best = *node;
            }
        }
        owners.push(best);
        close.push(best_d2 <= r0_sq);
    }
    Ok(Partition { owners, close })
}

/// Minimizes the quadratic surrogate for fixed ownership and close/far
/// flags:
///
/// ```text
/// (1 / W) * sum over close points of w(x) |x - phi(owner)|^2
///   + sum over edges of lambda |phi(a) - phi(b)|^2
///   + sum over stars of mu |phi(center) - mean(phi(leaves))|^2
/// ```
///
/// where `W` is the total weight of the close points (far points contribute
/// only a constant and are absent from the system). One symmetric
/// positive-definite system is factored and solved for all coordinates.
pub fn solve_positions(
    graph: &ElasticGraph,
    dataset: &Dataset,
    partition: &Partition,
    config: &OptimizerConfig,
    emb_prev: &Embedding,
) -> Result<Embedding, SolveError> {
    config.validate()?;
    let w_norm = normalizer(partition.close_weight(dataset));
    solve_with_norm(graph, dataset, partition, config, emb_prev, w_norm)
}

fn normalizer(close_weight: f64) -> f64 {
    if close_weight > 0.0 {
        close_weight
    } else {
        1.0
    }
}

fn solve_with_norm(
    graph: &ElasticGraph,
    dataset: &Dataset,
    partition: &Partition,
    config: &OptimizerConfig,
    emb_prev: &Embedding,
    w_norm: f64,
) -> Result<Embedding, SolveError> {
    let n = graph.node_count();
    let m = dataset.dim();
    if partition.len() != dataset.n_points() {
        return Err(EnergyError::PartitionSize(partition.len(), dataset.n_points()).into());
    }
    if emb_prev.dim() != m {
        return Err(EnergyError::DataDimension(emb_prev.dim(), m).into());
    }
    let nodes = graph.nodes();
    let index_of = |node: NodeId| -> Result<usize, SolveError> {
        nodes
            .binary_search(&node)
            .map_err(|_| EnergyError::PartitionNode(0, node).into())
    };

    let has_coupling = graph.edges().iter().any(|e| w_norm * e.lambda != 0.0)
        || graph.stars().iter().any(|s| w_norm * s.mu != 0.0);

    // Coupled systems are solved in coordinates centered on the previous
    // embedding: the near-null translation mode then carries no payload, so
    // its poor conditioning cannot leak into the solution and translating
    // the whole problem translates the answer exactly.
    let mut center = vec![0.0; m];
    if has_coupling {
        for &node in nodes {
            for (j, &x) in emb_prev.require(node)?.iter().enumerate() {
                center[j] += x / n as f64;
            }
        }
    }

    // The surrogate is scaled by W so the data entries are raw weights; the
    // elastic terms pick up the factor instead. Same minimizer, and the
    // diagonal fast path below reproduces weighted means bit for bit.
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, m);
    for i in 0..dataset.n_points() {
        if !partition.is_close(i) {
            continue;
        }
        let y = index_of(partition.owner(i))?;
        let w = dataset.weight(i);
        a[(y, y)] += w;
        for (j, &x) in dataset.point(i).iter().enumerate() {
            b[(y, j)] += w * (x - center[j]);
        }
    }

    for edge in graph.edges() {
        let c = w_norm * edge.lambda;
        if c == 0.0 {
            continue;
        }
        let (ia, ib) = (index_of(edge.a)?, index_of(edge.b)?);
        a[(ia, ia)] += c;
        a[(ib, ib)] += c;
        a[(ia, ib)] -= c;
        a[(ib, ia)] -= c;
    }
    for star in graph.stars() {
        let c = w_norm * star.mu;
        if c == 0.0 {
            continue;
        }
        let k = star.leaves.len() as f64;
        let ic = index_of(star.center)?;
        a[(ic, ic)] += c;
        let leaf_idx: Vec<usize> = star
            .leaves
            .iter()
            .map(|&l| index_of(l))
            .collect::<Result<_, _>>()?;
        for &il in &leaf_idx {
            a[(ic, il)] -= c / k;
            a[(il, ic)] -= c / k;
        }
        for &il in &leaf_idx {
            for &jl in &leaf_idx {
                a[(il, jl)] += c / (k * k);
            }
        }
    }

    if config.ridge > 0.0 {
        for (i, &node) in nodes.iter().enumerate() {
            let prev = emb_prev.require(node)?;
            a[(i, i)] += config.ridge;
            for (j, &x) in prev.iter().enumerate() {
                b[(i, j)] += config.ridge * (x - center[j]);
            }
        }
    }

    let solution = if !has_coupling {
        // Pure diagonal system: each node is the weighted mean of its close
        // points (plus the ridge pull). Solved by direct division.
        for (i, &node) in nodes.iter().enumerate() {
            if a[(i, i)] == 0.0 {
                return Err(SolveError::Singular { node: Some(node) });
            }
            let d = a[(i, i)];
            for j in 0..m {
                b[(i, j)] /= d;
            }
        }
        b
    } else {
        match a.clone().cholesky() {
            Some(chol) => chol.solve(&b),
            None => {
                let zero_row = (0..n).find(|&i| (0..n).all(|j| a[(i, j)] == 0.0));
                return Err(SolveError::Singular {
                    node: zero_row.map(|i| nodes[i]),
                });
            }
        }
    };

    let mut emb = Embedding::new(m);
    for (i, &node) in nodes.iter().enumerate() {
        let pos: Vec<f64> = if has_coupling {
            (0..m).map(|j| solution[(i, j)] + center[j]).collect()
        } else {
            (0..m).map(|j| solution[(i, j)]).collect()
        };
        emb.set(node, pos)?;
    }
    Ok(emb)
}

/// Energy report used in fit traces: ownership from the given partition,
/// per-point contributions capped at `r0^2`, approximation term normalized
/// by the run normalizer `w_norm`. With all points close at the start of a
/// run this coincides with the plain decomposed energy.
fn trace_report(
    graph: &ElasticGraph,
    emb: &Embedding,
    dataset: &Dataset,
    partition: &Partition,
    mode: Mode,
    r0: f64,
    w_norm: f64,
) -> Result<EnergyReport, SolveError> {
    let (edge_energy, star_energy) = graph_energy(graph, emb)?;
    let mut sum = KahanSum::default();
    for (node, pos) in emb.iter() {
        for i in partition.points_of(node) {
            let d2 = squared_distance(dataset.point(i), pos);
            sum.add(dataset.weight(i) * trimmed_contribution(d2, r0));
        }
    }
    let approx = sum.value() / w_norm;
    Ok(EnergyReport {
        edge_energy,
        star_energy,
        approx_energy: approx,
        total: edge_energy + star_energy + approx,
        robust_mode: mode == Mode::Robust,
        r0,
    })
}

/// Runs the splitting loop: solve positions for the current partition, then
/// re-partition, until the assignment state is unchanged (close flags, and
/// owners of every point close in either partition) or `max_iterations` is
/// reached. Trace totals are non-increasing.
///
/// The data-term normalizer is the close-point weight of the initial
/// partition, frozen for the whole run: points beyond the radius of the
/// initial graph contribute a constant and leave the fitted positions
/// exactly unchanged.
pub fn fit(
    graph: &ElasticGraph,
    dataset: &Dataset,
    emb_init: &Embedding,
    config: &OptimizerConfig,
) -> Result<FitOutcome, SolveError> {
    config.validate()?;
    let r0 = config.effective_r0();

    // Work on an embedding restricted to the graph's nodes.
    let mut emb = Embedding::new(emb_init.dim());
    for &node in graph.nodes() {
        emb.set(node, emb_init.require(node)?.to_vec())?;
    }

    let mut partition = build_partition(dataset, &emb, r0)?;
    let w_norm = normalizer(partition.close_weight(dataset));

    let mut trace = FitTrace::default();
    for _ in 0..config.max_iterations {
        let emb_new = solve_with_norm(graph, dataset, &partition, config, &emb, w_norm)?;
        let partition_new = build_partition(dataset, &emb_new, r0)?;
        let reassigned = partition_new.reassigned_from(&partition);
        let stable = reassigned == 0 && !partition_new.flags_differ(&partition);
        let report = trace_report(
            graph,
            &emb_new,
            dataset,
            &partition_new,
            config.mode,
            r0,
            w_norm,
        )?;
        trace.entries.push(FitEntry {
            report,
            points_reassigned: reassigned,
        });
        emb = emb_new;
        partition = partition_new;
        if stable {
            trace.converged = true;
            break;
        }
        if config.energy_tolerance > 0.0 && trace.entries.len() >= 2 {
            let prev = trace.entries[trace.entries.len() - 2].report.total;
            let last = trace.entries[trace.entries.len() - 1].report.total;
            if (prev - last).abs() <= config.energy_tolerance * prev.abs().max(1.0) {
                trace.converged = true;
                break;
            }
        }
    }

    Ok(FitOutcome {
        embedding: emb,
        partition,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ElasticGraph;

    fn embedding_1d(positions: &[(u32, f64)]) -> Embedding {
        let mut emb = Embedding::new(1);
        for &(id, x) in positions {
            emb.set(NodeId(id), vec![x]).unwrap();
        }
        emb
    }

    fn embedding_2d(positions: &[(u32, [f64; 2])]) -> Embedding {
        let mut emb = Embedding::new(2);
        for &(id, p) in positions {
            emb.set(NodeId(id), p.to_vec()).unwrap();
        }
        emb
    }

    #[test]
    fn nearest_node_with_threshold() {
        let ds = Dataset::from_rows(vec![vec![0.5, 0.0]]).unwrap();
        let emb = embedding_2d(&[(0, [0.0, 0.0]), (1, [2.0, 0.0])]);
        let p = build_partition(&ds, &emb, 0.6).unwrap();
        assert_eq!(p.owner(0), NodeId(0));
        assert!(p.is_close(0));
        let p = build_partition(&ds, &emb, 0.4).unwrap();
        assert!(!p.is_close(0));
    }

    #[test]
    fn equidistant_point_goes_to_smallest_id() {
        let ds = Dataset::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let emb = embedding_2d(&[(0, [0.0, 0.0]), (1, [2.0, 0.0])]);
        let p = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        assert_eq!(p.owner(0), NodeId(0));
    }

    #[test]
    fn infinite_radius_marks_everything_close() {
        let ds = Dataset::from_rows(vec![vec![1e6, 0.0], vec![-3.0, 4.0]]).unwrap();
        let emb = embedding_2d(&[(0, [0.0, 0.0])]);
        let p = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        assert!(p.close_flags().iter().all(|&c| c));
    }

    #[test]
    fn boundary_distance_counts_as_close() {
        let ds = Dataset::from_rows(vec![vec![1.0]]).unwrap();
        let emb = embedding_1d(&[(0, 0.0)]);
        let p = build_partition(&ds, &emb, 1.0).unwrap();
        assert!(p.is_close(0));
    }

    #[test]
    fn empty_embedding_is_rejected() {
        let ds = Dataset::from_rows(vec![vec![0.0]]).unwrap();
        let emb = Embedding::new(1);
        assert!(matches!(
            build_partition(&ds, &emb, 1.0),
            Err(SolveError::EmptyNodeSet)
        ));
    }

    #[test]
    fn lone_node_moves_to_weighted_mean() {
        let g = ElasticGraph::new(1, &[], 0.0, 0.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let emb = embedding_2d(&[(0, [5.0, 5.0])]);
        let p = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::standard()
        };
        let out = solve_positions(&g, &ds, &p, &cfg, &emb).unwrap();
        assert_eq!(out.get(NodeId(0)).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn analytic_two_node_solution() {
        // Two 1-D nodes joined by a unit-lambda edge, one unit-weight point
        // at 0 owned by node 0 and one at 10 owned by node 1. Stationarity
        // gives 3a - 2b = 0 and 3b - 2a = 10, hence (4, 6).
        let g = ElasticGraph::new(2, &[(0, 1)], 1.0, 1.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0], vec![10.0]]).unwrap();
        let emb = embedding_1d(&[(0, 1.0), (1, 9.0)]);
        let p = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::standard()
        };
        let out = solve_positions(&g, &ds, &p, &cfg, &emb).unwrap();
        assert!((out.get(NodeId(0)).unwrap()[0] - 4.0).abs() < 1e-10);
        assert!((out.get(NodeId(1)).unwrap()[0] - 6.0).abs() < 1e-10);
    }

    #[test]
    fn far_points_are_absent_from_the_system() {
        let g = ElasticGraph::new(2, &[(0, 1)], 0.5, 1.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0], vec![10.0]]).unwrap();
        let ds_far = ds
            .clone()
            .with_extra_point(vec![500.0], 1.0, None)
            .unwrap();
        let emb = embedding_1d(&[(0, 1.0), (1, 9.0)]);
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::robust(20.0)
        };
        let p = build_partition(&ds, &emb, 20.0).unwrap();
        let p_far = build_partition(&ds_far, &emb, 20.0).unwrap();
        assert!(!p_far.is_close(2));
        let out = solve_positions(&g, &ds, &p, &cfg, &emb).unwrap();
        let out_far = solve_positions(&g, &ds_far, &p_far, &cfg, &emb).unwrap();
        assert_eq!(out.get(NodeId(0)), out_far.get(NodeId(0)));
        assert_eq!(out.get(NodeId(1)), out_far.get(NodeId(1)));
    }

    #[test]
    fn zero_moduli_empty_node_is_singular_without_ridge() {
        let g = ElasticGraph::new(2, &[(0, 1)], 0.0, 0.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0]]).unwrap();
        let emb = embedding_1d(&[(0, 0.0), (1, 100.0)]);
        let p = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::standard()
        };
        match solve_positions(&g, &ds, &p, &cfg, &emb).unwrap_err() {
            SolveError::Singular { node } => assert_eq!(node, Some(NodeId(1))),
            other => panic!("unexpected error {other}"),
        }
        // With the default ridge the empty node stays where it was.
        let cfg = OptimizerConfig::standard();
        let out = solve_positions(&g, &ds, &p, &cfg, &emb).unwrap();
        assert_eq!(out.get(NodeId(1)).unwrap(), &[100.0]);
    }

    #[test]
    fn data_free_elastic_system_is_singular_without_ridge() {
        // Positive moduli but no close points anywhere: the elastic part is
        // translation invariant, hence singular.
        let g = ElasticGraph::new(2, &[(0, 1)], 1.0, 1.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![1000.0]]).unwrap();
        let emb = embedding_1d(&[(0, 0.0), (1, 1.0)]);
        let p = build_partition(&ds, &emb, 1.0).unwrap();
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::robust(1.0)
        };
        assert!(matches!(
            solve_positions(&g, &ds, &p, &cfg, &emb),
            Err(SolveError::Singular { .. })
        ));
    }

    #[test]
    fn fit_stops_after_one_iteration_at_a_fixed_point() {
        let g = ElasticGraph::new(2, &[(0, 1)], 0.0, 0.0, true).unwrap();
        let ds = Dataset::from_rows(vec![vec![0.0], vec![10.0]]).unwrap();
        let emb = embedding_1d(&[(0, 0.0), (1, 10.0)]);
        let cfg = OptimizerConfig {
            ridge: 0.0,
            ..OptimizerConfig::standard()
        };
        let out = fit(&g, &ds, &emb, &cfg).unwrap();
        assert!(out.trace.converged);
        assert_eq!(out.trace.iterations(), 1);
        assert_eq!(out.trace.entries[0].points_reassigned, 0);
        assert_eq!(out.embedding.get(NodeId(0)).unwrap(), &[0.0]);
    }

    #[test]
    fn fit_trace_totals_never_increase() {
        let g = ElasticGraph::new(3, &[(0, 1), (1, 2)], 0.1, 0.2, true).unwrap();
        let ds = Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.4],
            vec![2.0, -0.2],
            vec![3.0, 0.1],
            vec![4.0, 0.0],
        ])
        .unwrap();
        let emb = embedding_2d(&[(0, [0.0, 2.0]), (1, [2.0, 2.0]), (2, [4.0, 2.0])]);
        let out = fit(&g, &ds, &emb, &OptimizerConfig::standard()).unwrap();
        assert!(out.trace.converged);
        for pair in out.trace.entries.windows(2) {
            let (a, b) = (pair[0].report.total, pair[1].report.total);
            assert!(b <= a + 1e-9 * a.max(1.0), "trace increased: {a} -> {b}");
        }
    }

    #[test]
    fn config_validation_rejects_bad_radii() {
        let mut cfg = OptimizerConfig::robust(f64::INFINITY);
        assert!(cfg.validate().is_err());
        cfg.r0 = -1.0;
        assert!(cfg.validate().is_err());
        cfg.r0 = 2.0;
        assert!(cfg.validate().is_ok());
        assert_eq!(OptimizerConfig::standard().effective_r0(), f64::INFINITY);
    }
}
