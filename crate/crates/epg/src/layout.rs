//! Metro-map layout of principal trees: planar positions where each star
//! center sits at the mean of its leaves and edge lengths start from their
//! data-space values, plus per-node class composition summaries and SVG/JSON
//! export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::data::Dataset;
use crate::energy::Embedding;
use crate::graph::{
    CompositionRecord, EdgeLengthRecord, ElasticGraph, GraphDocument, NodeId, PositionRecord,
};
use crate::optimizer::Partition;

/// Planar positions for every node plus the display-to-data length scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout2D {
    pub positions2d: BTreeMap<NodeId, [f64; 2]>,
    /// Ratio of total data-space edge length to total layout edge length.
    pub scale: f64,
}

/// Per-node counts of assigned data points by label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeComposition {
    pub counts: BTreeMap<NodeId, BTreeMap<String, usize>>,
}

impl NodeComposition {
    pub fn node_total(&self, node: NodeId) -> usize {
        self.counts
            .get(&node)
            .map(|c| c.values().sum())
            .unwrap_or(0)
    }
}

/// Layout parameters.
#[derive(Debug, Clone, Copy)]
pub struct LayoutParams {
    /// Maximum allowed star-mean residual, relative to the layout diameter.
    /// Absent → 1e-6 of the diameter.
    pub harmonic_tolerance: Option<f64>,
    pub max_rounds: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            harmonic_tolerance: None,
            max_rounds: 10_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("metro layout requires a tree, got {nodes} nodes and {edges} edges")]
    NotATree { nodes: usize, edges: usize },
    #[error("relaxation did not reach the harmonic tolerance: residual {residual}")]
    DidNotConverge { residual: f64 },
    #[error("node {0} has no embedded position")]
    MissingPosition(NodeId),
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("partition covers {0} points, dataset has {1}")]
    PartitionSize(usize, usize),
}

/// Lays out a principal tree in the plane: angular seeding from the tree
/// centroid with sector widths proportional to subtree leaf counts and
/// radial lengths equal to data-space edge lengths, then Gauss-Seidel
/// relaxation of every star center onto its leaf mean with tree leaves held
/// fixed.
pub fn metro_layout(
    graph: &ElasticGraph,
    emb: &Embedding,
    params: &LayoutParams,
) -> Result<Layout2D, LayoutError> {
    if !graph.is_tree() {
        return Err(LayoutError::NotATree {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
        });
    }
    for &node in graph.nodes() {
        if emb.get(node).is_none() {
            return Err(LayoutError::MissingPosition(node));
        }
    }

    let mut positions: BTreeMap<NodeId, [f64; 2]> = BTreeMap::new();
    if graph.node_count() == 1 {
        positions.insert(graph.nodes()[0], [0.0, 0.0]);
        return Ok(Layout2D {
            positions2d: positions,
            scale: 1.0,
        });
    }

    let root = tree_centroid(graph);
    seed_angular(graph, emb, root, &mut positions);

    // Default tolerance is relative to the layout diameter, re-measured as
    // relaxation reshapes the drawing.
    let tol_of = |positions: &BTreeMap<NodeId, [f64; 2]>| {
        params
            .harmonic_tolerance
            .unwrap_or_else(|| 1e-6 * layout_diameter(positions).max(f64::MIN_POSITIVE))
    };

    // Interior nodes relax onto their star's leaf mean; tree leaves stay.
    let movable: Vec<NodeId> = graph
        .stars()
        .iter()
        .map(|s| s.center)
        .filter(|&c| graph.degree(c).unwrap_or(0) >= 2)
        .collect();
    let mut residual = star_residual(graph, &positions);
    if residual > tol_of(&positions) {
        for _ in 0..params.max_rounds {
            for &center in &movable {
                let star = graph
                    .stars()
                    .iter()
                    .find(|s| s.center == center)
                    .expect("movable nodes are star centers");
                let mut mean = [0.0, 0.0];
                for leaf in &star.leaves {
                    let p = positions[leaf];
                    mean[0] += p[0];
                    mean[1] += p[1];
                }
                let k = star.leaves.len() as f64;
                positions.insert(center, [mean[0] / k, mean[1] / k]);
            }
            residual = star_residual(graph, &positions);
            if residual <= tol_of(&positions) {
                break;
            }
        }
    }
    if residual > tol_of(&positions) {
        return Err(LayoutError::DidNotConverge { residual });
    }

    let data_total: f64 = graph
        .edges()
        .iter()
        .map(|e| distance(emb.get(e.a).unwrap(), emb.get(e.b).unwrap()))
        .sum();
    let layout_total: f64 = graph
        .edges()
        .iter()
        .map(|e| distance2(&positions[&e.a], &positions[&e.b]))
        .sum();
    let scale = if layout_total > 0.0 {
        data_total / layout_total
    } else {
        1.0
    };

    Ok(Layout2D {
        positions2d: positions,
        scale,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    crate::energy::squared_distance(a, b).sqrt()
}

fn distance2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Node minimizing the largest remaining component when removed; ties go to
/// the smallest id.
fn tree_centroid(graph: &ElasticGraph) -> NodeId {
    let nodes = graph.nodes();
    let total = nodes.len();
    let mut best = (usize::MAX, nodes[0]);
    for &candidate in nodes {
        let mut largest = 0;
        for &start in graph.neighbors(candidate).unwrap() {
            let size = component_size(graph, start, candidate);
            largest = largest.max(size);
        }
        let _ = total;
        if largest < best.0 {
            best = (largest, candidate);
        }
    }
    best.1
}

fn component_size(graph: &ElasticGraph, start: NodeId, blocked: NodeId) -> usize {
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(node) = stack.pop() {
        for &next in graph.neighbors(node).unwrap() {
            if next != blocked && !seen.contains(&next) {
                seen.push(next);
                stack.push(next);
            }
        }
    }
    seen.len()
}

fn subtree_leaf_count(graph: &ElasticGraph, node: NodeId, parent: Option<NodeId>) -> usize {
    let children: Vec<NodeId> = graph
        .neighbors(node)
        .unwrap()
        .iter()
        .copied()
        .filter(|&n| Some(n) != parent)
        .collect();
    if children.is_empty() {
        1
    } else {
        children
            .iter()
            .map(|&c| subtree_leaf_count(graph, c, Some(node)))
            .sum()
    }
}

fn seed_angular(
    graph: &ElasticGraph,
    emb: &Embedding,
    root: NodeId,
    positions: &mut BTreeMap<NodeId, [f64; 2]>,
) {
    positions.insert(root, [0.0, 0.0]);
    // (node, parent, sector start, sector width)
    let mut stack: Vec<(NodeId, NodeId, f64, f64)> = Vec::new();
    let children: Vec<NodeId> = graph.neighbors(root).unwrap().to_vec();
    let weights: Vec<usize> = children
        .iter()
        .map(|&c| subtree_leaf_count(graph, c, Some(root)))
        .collect();
    let total: usize = weights.iter().sum();
    let mut angle = 0.0;
    for (&child, &w) in children.iter().zip(&weights) {
        let width = std::f64::consts::TAU * w as f64 / total as f64;
        stack.push((child, root, angle, width));
        angle += width;
    }
    while let Some((node, parent, start, width)) = stack.pop() {
        let theta = start + 0.5 * width;
        let len = distance(emb.get(node).unwrap(), emb.get(parent).unwrap());
        let p = positions[&parent];
        positions.insert(node, [p[0] + len * theta.cos(), p[1] + len * theta.sin()]);
        let children: Vec<NodeId> = graph
            .neighbors(node)
            .unwrap()
            .iter()
            .copied()
            .filter(|&n| n != parent)
            .collect();
        if children.is_empty() {
            continue;
        }
        let weights: Vec<usize> = children
            .iter()
            .map(|&c| subtree_leaf_count(graph, c, Some(node)))
            .collect();
        let total: usize = weights.iter().sum();
        let mut angle = start;
        for (&child, &w) in children.iter().zip(&weights) {
            let child_width = width * w as f64 / total as f64;
            stack.push((child, node, angle, child_width));
            angle += child_width;
        }
    }
}

fn star_residual(graph: &ElasticGraph, positions: &BTreeMap<NodeId, [f64; 2]>) -> f64 {
    let mut max = 0.0_f64;
    for star in graph.stars() {
        let mut mean = [0.0, 0.0];
        for leaf in &star.leaves {
            let p = positions[leaf];
            mean[0] += p[0];
            mean[1] += p[1];
        }
        let k = star.leaves.len() as f64;
        mean[0] /= k;
        mean[1] /= k;
        max = max.max(distance2(&positions[&star.center], &mean));
    }
    max
}

/// Maximum star-mean residual of an existing layout (for inspection).
pub fn layout_residual(graph: &ElasticGraph, layout: &Layout2D) -> f64 {
    star_residual(graph, &layout.positions2d)
}

/// Largest pairwise extent of the layout.
pub fn layout_diameter(positions: &BTreeMap<NodeId, [f64; 2]>) -> f64 {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in positions.values() {
        for ax in 0..2 {
            min[ax] = min[ax].min(p[ax]);
            max[ax] = max[ax].max(p[ax]);
        }
    }
    ((max[0] - min[0]).powi(2) + (max[1] - min[1]).powi(2)).sqrt()
}

/// Counts assigned points per node and label. Far points keep their owner
/// and are counted.
pub fn node_compositions(
    dataset: &Dataset,
    partition: &Partition,
) -> Result<NodeComposition, LayoutError> {
    let labels = dataset.labels().ok_or(LayoutError::MissingLabels)?;
    if partition.len() != dataset.n_points() {
        return Err(LayoutError::PartitionSize(
            partition.len(),
            dataset.n_points(),
        ));
    }
    let mut counts: BTreeMap<NodeId, BTreeMap<String, usize>> = BTreeMap::new();
    for (i, owner) in partition.owners().iter().enumerate() {
        *counts
            .entry(*owner)
            .or_default()
            .entry(labels[i].clone())
            .or_insert(0) += 1;
    }
    Ok(NodeComposition { counts })
}

/// Pie segments for one node: `(label, start_degrees, sweep_degrees)` in
/// label order, starting at 12 o'clock and proceeding clockwise.
pub fn pie_segments(counts: &BTreeMap<String, usize>) -> Vec<(String, f64, f64)> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(counts.len());
    let mut start = 0.0;
    for (label, &count) in counts {
        let sweep = 360.0 * count as f64 / total as f64;
        out.push((label.clone(), start, sweep));
        start += sweep;
    }
    out
}

/// Render style for [`export_svg`].
#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    pub palette: Vec<String>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 800.0,
            height: 800.0,
            margin: 40.0,
            min_radius: 3.0,
            max_radius: 16.0,
            palette: [
                "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7", "#a463f2",
                "#97bbf5", "#9c6b4e", "#9498a0",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.4}")
}

/// Renders the layout as an SVG 1.1 document: edges as lines, nodes as
/// circles sized by occupancy, or pie charts when compositions are given.
pub fn export_svg(
    layout: &Layout2D,
    graph: &ElasticGraph,
    compositions: Option<&NodeComposition>,
    style: &SvgStyle,
) -> String {
    let positions = &layout.positions2d;
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in positions.values() {
        for ax in 0..2 {
            min[ax] = min[ax].min(p[ax]);
            max[ax] = max[ax].max(p[ax]);
        }
    }
    let span = [(max[0] - min[0]).max(1e-9), (max[1] - min[1]).max(1e-9)];
    let scale = ((style.width - 2.0 * style.margin) / span[0])
        .min((style.height - 2.0 * style.margin) / span[1]);
    let to_screen = |p: &[f64; 2]| -> [f64; 2] {
        [
            style.margin + (p[0] - min[0]) * scale,
            // Flip y so larger data y points up.
            style.height - style.margin - (p[1] - min[1]) * scale,
        ]
    };

    let labels: Vec<String> = compositions
        .map(|c| {
            let mut set: Vec<String> = c
                .counts
                .values()
                .flat_map(|m| m.keys().cloned())
                .collect();
            set.sort();
            set.dedup();
            set
        })
        .unwrap_or_default();
    let color_of = |label: &str| -> &str {
        let idx = labels.iter().position(|l| l == label).unwrap_or(0);
        &style.palette[idx % style.palette.len()]
    };

    let max_count = compositions
        .map(|c| {
            graph
                .nodes()
                .iter()
                .map(|&n| c.node_total(n))
                .max()
                .unwrap_or(0)
        })
        .unwrap_or(0);
    let radius_of = |count: usize| -> f64 {
        if max_count == 0 {
            return style.min_radius * 2.0;
        }
        let t = (count as f64 / max_count as f64).sqrt();
        style.min_radius + t * (style.max_radius - style.min_radius)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(svg, "  <g stroke=\"#555555\" stroke-width=\"1.5\">");
    for edge in graph.edges() {
        let a = to_screen(&positions[&edge.a]);
        let b = to_screen(&positions[&edge.b]);
        let _ = writeln!(
            svg,
            "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            fmt_coord(a[0]),
            fmt_coord(a[1]),
            fmt_coord(b[0]),
            fmt_coord(b[1])
        );
    }
    let _ = writeln!(svg, "  </g>");

    for &node in graph.nodes() {
        let center = to_screen(&positions[&node]);
        let (cx, cy) = (center[0], center[1]);
        match compositions {
            Some(comp) => {
                let counts = comp.counts.get(&node);
                let total = counts.map(|c| c.values().sum()).unwrap_or(0usize);
                let r = radius_of(total);
                match counts {
                    Some(counts) if total > 0 => {
                        let segments = pie_segments(counts);
                        if segments.len() == 1 {
                            let _ = writeln!(
                                svg,
                                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"#333333\"><title>node {}: {}</title></circle>",
                                fmt_coord(cx), fmt_coord(cy), fmt_coord(r),
                                color_of(&segments[0].0), node, total
                            );
                        } else {
                            let _ = writeln!(svg, "  <g stroke=\"#333333\" stroke-width=\"0.5\">");
                            for (label, start, sweep) in &segments {
                                let a0 = (start - 90.0).to_radians();
                                let a1 = (start + sweep - 90.0).to_radians();
                                let large = if *sweep > 180.0 { 1 } else { 0 };
                                let x0 = cx + r * a0.cos();
                                let y0 = cy + r * a0.sin();
                                let x1 = cx + r * a1.cos();
                                let y1 = cy + r * a1.sin();
                                let _ = writeln!(
                                    svg,
                                    "    <path d=\"M {} {} L {} {} A {} {} 0 {} 1 {} {} Z\" fill=\"{}\"><title>node {} {}: {}</title></path>",
                                    fmt_coord(cx), fmt_coord(cy),
                                    fmt_coord(x0), fmt_coord(y0),
                                    fmt_coord(r), fmt_coord(r), large,
                                    fmt_coord(x1), fmt_coord(y1),
                                    color_of(label), node, label,
                                    counts[label]
                                );
                            }
                            let _ = writeln!(svg, "  </g>");
                        }
                    }
                    _ => {
                        let _ = writeln!(
                            svg,
                            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#ffffff\" stroke=\"#333333\"/>",
                            fmt_coord(cx),
                            fmt_coord(cy),
                            fmt_coord(style.min_radius)
                        );
                    }
                }
            }
            None => {
                let _ = writeln!(
                    svg,
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#ffffff\" stroke=\"#333333\"/>",
                    fmt_coord(cx),
                    fmt_coord(cy),
                    fmt_coord(style.min_radius * 2.0)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Serializes graph, embedding and optional layout/compositions into the
/// shared JSON document.
pub fn export_json(
    graph: &ElasticGraph,
    emb: &Embedding,
    layout: Option<&Layout2D>,
    compositions: Option<&NodeComposition>,
) -> GraphDocument {
    let mut doc = GraphDocument::from_graph(graph);
    doc.positions = Some(
        emb.iter()
            .map(|(id, p)| PositionRecord {
                id: id.0,
                coords: p.to_vec(),
            })
            .collect(),
    );
    if let Some(layout) = layout {
        doc.positions2d = Some(
            layout
                .positions2d
                .iter()
                .map(|(id, p)| PositionRecord {
                    id: id.0,
                    coords: p.to_vec(),
                })
                .collect(),
        );
        doc.scale = Some(layout.scale);
        doc.edge_lengths = Some(
            graph
                .edges()
                .iter()
                .map(|e| EdgeLengthRecord {
                    a: e.a.0,
                    b: e.b.0,
                    data: distance(emb.get(e.a).unwrap(), emb.get(e.b).unwrap()),
                    layout: distance2(
                        &layout.positions2d[&e.a],
                        &layout.positions2d[&e.b],
                    ),
                })
                .collect(),
        );
    }
    if let Some(comp) = compositions {
        doc.compositions = Some(
            comp.counts
                .iter()
                .map(|(id, counts)| CompositionRecord {
                    id: id.0,
                    counts: counts.clone(),
                })
                .collect(),
        );
    }
    doc
}

/// Reads back a document exported with positions into graph and embedding.
pub fn import_json(doc: &GraphDocument) -> Result<(ElasticGraph, Option<Embedding>), crate::graph::GraphError> {
    let graph = doc.to_graph()?;
    let emb = match &doc.positions {
        Some(records) => {
            let dim = records.first().map(|r| r.coords.len()).unwrap_or(0);
            let mut emb = Embedding::new(dim);
            for record in records {
                emb.set(NodeId(record.id), record.coords.clone())
                    .map_err(|_| crate::graph::GraphError::UnknownNode(NodeId(record.id)))?;
            }
            Some(emb)
        }
        None => None,
    };
    Ok((graph, emb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::build_partition;

    fn embedding(points: &[(u32, Vec<f64>)]) -> Embedding {
        let dim = points[0].1.len();
        let mut emb = Embedding::new(dim);
        for (id, p) in points {
            emb.set(NodeId(*id), p.clone()).unwrap();
        }
        emb
    }

    #[test]
    fn equal_path_lays_out_collinear_with_midpoint() {
        let g = ElasticGraph::new(3, &[(0, 1), (1, 2)], 1.0, 1.0, true).unwrap();
        let emb = embedding(&[
            (0, vec![0.0, 0.0, 0.0]),
            (1, vec![1.0, 0.0, 0.0]),
            (2, vec![2.0, 0.0, 0.0]),
        ]);
        let layout = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        let p0 = layout.positions2d[&NodeId(0)];
        let p1 = layout.positions2d[&NodeId(1)];
        let p2 = layout.positions2d[&NodeId(2)];
        let mid = [(p0[0] + p2[0]) / 2.0, (p0[1] + p2[1]) / 2.0];
        assert!(distance2(&p1, &mid) < 1e-6);
    }

    #[test]
    fn symmetric_three_star_centers_on_the_centroid() {
        let g = ElasticGraph::new(4, &[(0, 1), (0, 2), (0, 3)], 1.0, 1.0, true).unwrap();
        let sq3 = 3.0_f64.sqrt() / 2.0;
        let emb = embedding(&[
            (0, vec![0.0, 0.0]),
            (1, vec![1.0, 0.0]),
            (2, vec![-0.5, sq3]),
            (3, vec![-0.5, -sq3]),
        ]);
        let layout = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        let center = layout.positions2d[&NodeId(0)];
        let mut centroid = [0.0, 0.0];
        for id in [1, 2, 3] {
            let p = layout.positions2d[&NodeId(id)];
            centroid[0] += p[0] / 3.0;
            centroid[1] += p[1] / 3.0;
        }
        assert!(distance2(&center, &centroid) < 1e-6);
        // Unit-length arms at 120 degree spacing.
        let angles: Vec<f64> = [1, 2, 3]
            .iter()
            .map(|&id| {
                let p = layout.positions2d[&NodeId(id)];
                (p[1] - center[1]).atan2(p[0] - center[0])
            })
            .collect();
        let mut sorted = angles.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let gaps = [
            sorted[1] - sorted[0],
            sorted[2] - sorted[1],
            std::f64::consts::TAU - (sorted[2] - sorted[0]),
        ];
        for gap in gaps {
            assert!((gap - std::f64::consts::TAU / 3.0).abs() < 1e-6, "{gaps:?}");
        }
    }

    #[test]
    fn cyclic_graphs_are_rejected() {
        let g = ElasticGraph::new(3, &[(0, 1), (1, 2), (0, 2)], 1.0, 1.0, false).unwrap();
        let emb = embedding(&[
            (0, vec![0.0, 0.0]),
            (1, vec![1.0, 0.0]),
            (2, vec![0.5, 1.0]),
        ]);
        assert!(matches!(
            metro_layout(&g, &emb, &LayoutParams::default()),
            Err(LayoutError::NotATree { .. })
        ));
    }

    #[test]
    fn compositions_count_everything_once() {
        let ds = Dataset::new(
            vec![vec![0.0], vec![0.1], vec![9.9], vec![10.0], vec![10.1]],
            vec![1.0; 5],
            Some(vec![
                "a".into(),
                "a".into(),
                "b".into(),
                "b".into(),
                "b".into(),
            ]),
        )
        .unwrap();
        let emb = embedding(&[(0, vec![0.0]), (1, vec![10.0])]);
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        let comp = node_compositions(&ds, &part).unwrap();
        let total: usize = comp.counts.values().flat_map(|m| m.values()).sum();
        assert_eq!(total, 5);
        // Well-separated labels give pure nodes.
        assert_eq!(comp.counts[&NodeId(0)].len(), 1);
        assert_eq!(comp.counts[&NodeId(1)].len(), 1);
        assert_eq!(comp.counts[&NodeId(1)]["b"], 3);
    }

    #[test]
    fn missing_labels_error() {
        let ds = Dataset::from_rows(vec![vec![0.0]]).unwrap();
        let emb = embedding(&[(0, vec![0.0])]);
        let part = build_partition(&ds, &emb, f64::INFINITY).unwrap();
        assert!(matches!(
            node_compositions(&ds, &part),
            Err(LayoutError::MissingLabels)
        ));
    }

    #[test]
    fn pie_segments_are_proportional() {
        let mut counts = BTreeMap::new();
        counts.insert("a".to_string(), 3);
        counts.insert("b".to_string(), 1);
        let segments = pie_segments(&counts);
        assert_eq!(segments.len(), 2);
        assert_eq!(segments[0], ("a".to_string(), 0.0, 270.0));
        assert_eq!(segments[1], ("b".to_string(), 270.0, 90.0));
    }

    #[test]
    fn svg_renders_plain_circles_without_compositions() {
        let g = ElasticGraph::new(2, &[(0, 1)], 1.0, 1.0, true).unwrap();
        let emb = embedding(&[(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0])]);
        let layout = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        let svg = export_svg(&layout, &g, None, &SvgStyle::default());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("<path"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = ElasticGraph::new(3, &[(0, 1), (1, 2)], 0.3, 0.7, true).unwrap();
        let emb = embedding(&[
            (0, vec![0.25, -1.0]),
            (1, vec![1.125, 0.5]),
            (2, vec![2.0625, 0.0]),
        ]);
        let layout = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        let doc = export_json(&g, &emb, Some(&layout), None);
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back: GraphDocument = serde_json::from_str(&text).unwrap();
        let (g2, emb2) = import_json(&back).unwrap();
        assert_eq!(g, g2);
        assert_eq!(emb, emb2.unwrap());
    }

    #[test]
    fn layout_is_deterministic() {
        let g = ElasticGraph::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)], 1.0, 1.0, true).unwrap();
        let emb = embedding(&[
            (0, vec![0.0, 0.0]),
            (1, vec![1.0, 0.2]),
            (2, vec![2.0, -0.3]),
            (3, vec![1.5, 1.0]),
            (4, vec![2.5, 1.4]),
        ]);
        let a = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        let b = metro_layout(&g, &emb, &LayoutParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
