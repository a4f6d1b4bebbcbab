//! Elastic graph topology: nodes, edges, k-stars with elasticity moduli, and
//! the primitive star-maintenance rule (every node of degree >= 2 is the
//! center of exactly one star containing all of its neighbors).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a graph node. Ids are allocated monotonically and never
/// reused within one growth run, so partitions stay referentially stable
/// across trial grammar applications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected edge with its stretching elasticity modulus.
///
/// Endpoints are stored normalized with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub lambda: f64,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, lambda: f64) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Edge { a, b, lambda }
    }

    /// True if `node` is one of the endpoints.
    pub fn touches(&self, node: NodeId) -> bool {
        self.a == node || self.b == node
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        if self.a == node {
            Some(self.b)
        } else if self.b == node {
            Some(self.a)
        } else {
            None
        }
    }
}

/// A k-star: one center node joined to k >= 2 leaves, with a bending
/// elasticity modulus penalizing the center's deviation from the leaf mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Star {
    pub center: NodeId,
    pub leaves: Vec<NodeId>,
    pub mu: f64,
}

impl Star {
    /// The star degree k.
    pub fn degree(&self) -> usize {
        self.leaves.len()
    }
}

/// Errors raised by graph construction and queries.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(NodeId, NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    EdgeOutOfRange(NodeId, NodeId, u32),
    #[error("graph is not connected: node {0} is unreachable from node {1}")]
    Disconnected(NodeId, NodeId),
    #[error("negative elasticity modulus {1} for {0}")]
    NegativeModulus(&'static str, f64),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(NodeId, NodeId),
    #[error("star centered at {center} has invalid leaves: {reason}")]
    InvalidStar { center: NodeId, reason: String },
    #[error("graph must have at least one node")]
    Empty,
}

/// An elastic graph: simple connected undirected topology plus per-edge and
/// per-star elasticity moduli.
///
/// Graphs are immutable after construction; grammar operations return new
/// graphs, so a graph can be shared read-only across concurrent trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticGraph {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    stars: Vec<Star>,
    primitive: bool,
    uniform_lambda: f64,
    uniform_mu: f64,
    next_id: u32,
    adjacency: BTreeMap<NodeId, Vec<NodeId>>,
}

impl ElasticGraph {
    /// Builds a graph on nodes `0..node_count` with the given edges, one
    /// shared edge modulus and one shared star modulus. With `primitive`
    /// set, stars are synthesized by the primitive rule: one star per node
    /// of degree >= 2, containing all of its neighbors.
    pub fn new(
        node_count: u32,
        edges: &[(u32, u32)],
        lambda: f64,
        mu: f64,
        primitive: bool,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        check_modulus("lambda", lambda)?;
        check_modulus("mu", mu)?;
        let nodes: Vec<NodeId> = (0..node_count).map(NodeId).collect();
        let edges: Vec<Edge> = edges
            .iter()
            .map(|&(a, b)| Edge::new(NodeId(a), NodeId(b), lambda))
            .collect();
        let mut graph = ElasticGraph {
            nodes,
            edges,
            stars: Vec::new(),
            primitive,
            uniform_lambda: lambda,
            uniform_mu: mu,
            next_id: node_count,
            adjacency: BTreeMap::new(),
        };
        graph.normalize_edges()?;
        graph.check_connected()?;
        if primitive {
            graph.stars = graph.primitive_stars(mu);
        }
        Ok(graph)
    }

    /// Builds a graph from explicit parts (used by JSON import and tests).
    /// Stars are validated against the topology; when `primitive` is set the
    /// star list must equal the primitive rule's output.
    pub fn from_parts(
        nodes: Vec<NodeId>,
        edges: Vec<Edge>,
        stars: Vec<Star>,
        primitive: bool,
        uniform_lambda: f64,
        uniform_mu: f64,
    ) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        check_modulus("lambda", uniform_lambda)?;
        check_modulus("mu", uniform_mu)?;
        let mut nodes = nodes;
        nodes.sort_unstable();
        nodes.dedup();
        let next_id = nodes.last().map(|n| n.0 + 1).unwrap_or(0);
        let mut graph = ElasticGraph {
            nodes,
            edges,
            stars,
            primitive,
            uniform_lambda,
            uniform_mu,
            next_id,
            adjacency: BTreeMap::new(),
        };
        graph.normalize_edges()?;
        graph.check_connected()?;
        graph.check_stars()?;
        if primitive {
            let expected = graph.primitive_stars(uniform_mu);
            let mut got = graph.stars.clone();
            got.sort_by_key(|s| s.center);
            let centers_match = got.len() == expected.len()
                && got
                    .iter()
                    .zip(expected.iter())
                    .all(|(g, e)| g.center == e.center && g.leaves == e.leaves);
            if !centers_match {
                graph.stars = graph.primitive_stars(uniform_mu);
            } else {
                graph.stars = got;
            }
        }
        Ok(graph)
    }

    fn normalize_edges(&mut self) -> Result<(), GraphError> {
        let ids: BTreeSet<NodeId> = self.nodes.iter().copied().collect();
        let mut seen = BTreeSet::new();
        for edge in &mut self.edges {
            if edge.a == edge.b {
                return Err(GraphError::SelfLoop(edge.a, edge.b));
            }
            if !ids.contains(&edge.a) || !ids.contains(&edge.b) {
                return Err(GraphError::EdgeOutOfRange(edge.a, edge.b, self.next_id));
            }
            check_modulus("lambda", edge.lambda)?;
            if !seen.insert((edge.a, edge.b)) {
                return Err(GraphError::DuplicateEdge(edge.a, edge.b));
            }
        }
        self.edges.sort_by_key(|e| (e.a, e.b));
        self.adjacency = BTreeMap::new();
        for node in &self.nodes {
            self.adjacency.insert(*node, Vec::new());
        }
        for edge in &self.edges {
            self.adjacency.get_mut(&edge.a).unwrap().push(edge.b);
            self.adjacency.get_mut(&edge.b).unwrap().push(edge.a);
        }
        for neighbors in self.adjacency.values_mut() {
            neighbors.sort_unstable();
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let start = self.nodes[0];
        let mut visited = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            if !visited.insert(node) {
                continue;
            }
            for &next in &self.adjacency[&node] {
                if !visited.contains(&next) {
                    stack.push(next);
                }
            }
        }
        for node in &self.nodes {
            if !visited.contains(node) {
                return Err(GraphError::Disconnected(*node, start));
            }
        }
        Ok(())
    }

    fn check_stars(&self) -> Result<(), GraphError> {
        for star in &self.stars {
            check_modulus("mu", star.mu)?;
            if star.leaves.len() < 2 {
                return Err(GraphError::InvalidStar {
                    center: star.center,
                    reason: format!("star degree {} < 2", star.leaves.len()),
                });
            }
            let mut seen = BTreeSet::new();
            for leaf in &star.leaves {
                if *leaf == star.center {
                    return Err(GraphError::InvalidStar {
                        center: star.center,
                        reason: "center listed among leaves".into(),
                    });
                }
                if !seen.insert(*leaf) {
                    return Err(GraphError::InvalidStar {
                        center: star.center,
                        reason: format!("duplicate leaf {leaf}"),
                    });
                }
                let adjacent = self
                    .adjacency
                    .get(&star.center)
                    .map(|n| n.binary_search(leaf).is_ok())
                    .unwrap_or(false);
                if !adjacent {
                    return Err(GraphError::InvalidStar {
                        center: star.center,
                        reason: format!("leaf {leaf} is not adjacent to the center"),
                    });
                }
            }
        }
        Ok(())
    }

    fn primitive_stars(&self, mu: f64) -> Vec<Star> {
        self.nodes
            .iter()
            .filter_map(|&node| {
                let neighbors = &self.adjacency[&node];
                if neighbors.len() >= 2 {
                    Some(Star {
                        center: node,
                        leaves: neighbors.clone(),
                        mu,
                    })
                } else {
                    None
                }
            })
            .collect()
    }

    /// Re-synthesizes the star list from the current topology using the
    /// primitive rule with modulus `mu`. Idempotent; the result is marked
    /// primitive.
    pub fn rebuild_stars(&self, mu: f64) -> Result<Self, GraphError> {
        check_modulus("mu", mu)?;
        let mut graph = self.clone();
        graph.stars = graph.primitive_stars(mu);
        graph.uniform_mu = mu;
        graph.primitive = true;
        Ok(graph)
    }

    /// Returns a copy with every edge modulus set to `lambda` and every star
    /// modulus set to `mu`. Topology and node ids are unchanged.
    pub fn with_uniform_moduli(&self, lambda: f64, mu: f64) -> Result<Self, GraphError> {
        check_modulus("lambda", lambda)?;
        check_modulus("mu", mu)?;
        let mut graph = self.clone();
        for edge in &mut graph.edges {
            edge.lambda = lambda;
        }
        for star in &mut graph.stars {
            star.mu = mu;
        }
        graph.uniform_lambda = lambda;
        graph.uniform_mu = mu;
        Ok(graph)
    }

    /// Number of edges incident to `node`.
    pub fn degree(&self, node: NodeId) -> Result<usize, GraphError> {
        self.adjacency
            .get(&node)
            .map(|n| n.len())
            .ok_or(GraphError::UnknownNode(node))
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> Result<&[NodeId], GraphError> {
        self.adjacency
            .get(&node)
            .map(|n| n.as_slice())
            .ok_or(GraphError::UnknownNode(node))
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.adjacency.contains_key(&node)
    }

    /// Node ids in ascending order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Edges sorted by normalized endpoint pair.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Stars sorted by center id.
    pub fn stars(&self) -> &[Star] {
        &self.stars
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// True when the graph is acyclic (and connected by construction).
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.nodes.len()
    }

    /// Shared edge modulus applied to edges created by grammar operations.
    pub fn uniform_lambda(&self) -> f64 {
        self.uniform_lambda
    }

    /// Shared star modulus applied when stars are rebuilt.
    pub fn uniform_mu(&self) -> f64 {
        self.uniform_mu
    }

    /// Looks up the edge with the given endpoints (order-insensitive).
    pub fn find_edge(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by_key(&(a, b), |e| (e.a, e.b))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Adds node `z` joined to `target` by an edge with the uniform lambda;
    /// stars are rebuilt when the graph is primitive. Returns the new graph
    /// and the id of the added node.
    pub(crate) fn add_leaf(&self, target: NodeId) -> Result<(Self, NodeId), GraphError> {
        if !self.contains(target) {
            return Err(GraphError::UnknownNode(target));
        }
        let z = NodeId(self.next_id);
        let mut graph = self.clone();
        graph.next_id += 1;
        graph.nodes.push(z);
        graph.nodes.sort_unstable();
        graph.edges.push(Edge::new(target, z, self.uniform_lambda));
        graph.normalize_edges()?;
        if graph.primitive {
            graph.stars = graph.primitive_stars(graph.uniform_mu);
        }
        Ok((graph, z))
    }

    /// Replaces edge `(a, b)` by `(a, z), (z, b)` through a fresh node `z`;
    /// both new edges inherit the replaced edge's modulus. Stars are rebuilt
    /// when the graph is primitive. Returns the new graph and `z`.
    pub(crate) fn split_edge(&self, a: NodeId, b: NodeId) -> Result<(Self, NodeId), GraphError> {
        let edge = *self.find_edge(a, b).ok_or(GraphError::UnknownEdge(a, b))?;
        let z = NodeId(self.next_id);
        let mut graph = self.clone();
        graph.next_id += 1;
        graph.nodes.push(z);
        graph.nodes.sort_unstable();
        graph.edges.retain(|e| !(e.a == edge.a && e.b == edge.b));
        graph.edges.push(Edge::new(edge.a, z, edge.lambda));
        graph.edges.push(Edge::new(z, edge.b, edge.lambda));
        graph.normalize_edges()?;
        if graph.primitive {
            graph.stars = graph.primitive_stars(graph.uniform_mu);
        }
        Ok((graph, z))
    }
}

fn check_modulus(name: &'static str, value: f64) -> Result<(), GraphError> {
    if !value.is_finite() || value < 0.0 {
        return Err(GraphError::NegativeModulus(name, value));
    }
    Ok(())
}

/// Serialized form of a graph, optionally extended with node positions in
/// data space, a 2-D layout, per-edge lengths and per-node label counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub stars: Vec<StarRecord>,
    #[serde(default)]
    pub primitive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<PositionRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions2d: Option<Vec<PositionRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_lengths: Option<Vec<EdgeLengthRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compositions: Option<Vec<CompositionRecord>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: u32,
    pub b: u32,
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarRecord {
    pub center: u32,
    pub leaves: Vec<u32>,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionRecord {
    pub id: u32,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeLengthRecord {
    pub a: u32,
    pub b: u32,
    pub data: f64,
    pub layout: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionRecord {
    pub id: u32,
    pub counts: BTreeMap<String, usize>,
}

impl GraphDocument {
    /// Captures topology and moduli (no positions).
    pub fn from_graph(graph: &ElasticGraph) -> Self {
        GraphDocument {
            nodes: graph.nodes().iter().map(|n| NodeRecord { id: n.0 }).collect(),
            edges: graph
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    a: e.a.0,
                    b: e.b.0,
                    lambda: e.lambda,
                })
                .collect(),
            stars: graph
                .stars()
                .iter()
                .map(|s| StarRecord {
                    center: s.center.0,
                    leaves: s.leaves.iter().map(|l| l.0).collect(),
                    mu: s.mu,
                })
                .collect(),
            primitive: graph.is_primitive(),
            positions: None,
            positions2d: None,
            scale: None,
            edge_lengths: None,
            compositions: None,
        }
    }

    /// Reconstructs the elastic graph. Uniform moduli default to the first
    /// edge/star modulus (1.0 for graphs without edges or stars).
    pub fn to_graph(&self) -> Result<ElasticGraph, GraphError> {
        let nodes: Vec<NodeId> = self.nodes.iter().map(|n| NodeId(n.id)).collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge::new(NodeId(e.a), NodeId(e.b), e.lambda))
            .collect();
        let stars: Vec<Star> = self
            .stars
            .iter()
            .map(|s| Star {
                center: NodeId(s.center),
                leaves: s.leaves.iter().map(|&l| NodeId(l)).collect(),
                mu: s.mu,
            })
            .collect();
        let lambda = edges.first().map(|e| e.lambda).unwrap_or(1.0);
        let mu = stars.first().map(|s| s.mu).unwrap_or(1.0);
        ElasticGraph::from_parts(nodes, edges, stars, self.primitive, lambda, mu)
    }
}
