//! Elastic principal graphs: graph-structured data approximators grown by a
//! topological grammar and fitted by minimizing an elastic energy with an
//! optionally trimmed (robust) data-approximation term.
//!
//! The crate is organized around a small number of building blocks:
//!
//! - [`graph`] — elastic graph topology: nodes, edges, k-stars and their
//!   elasticity moduli, plus the primitive star-maintenance rule.
//! - [`energy`] — the elastic energy of an embedded graph, the standard and
//!   trimmed data-approximation terms, and decomposed energy reports.
//! - [`optimizer`] — the splitting algorithm: alternate nearest-node
//!   partitioning and exact minimization of a quadratic surrogate.
//! - [`grammar`] — graph growth by the two-rule grammar ("add a node to a
//!   node", "bisect an edge") with largest-energy-descent selection.
//! - [`pipeline`] — initialization strategies and multi-epoch training,
//!   including the two-epoch coarse-then-robust hybrid.
//! - [`data`] — dataset ingestion (CSV, genotype tables), PCA, and synthetic
//!   pattern generators.
//! - [`layout`] — metro-map layout of principal trees and SVG/JSON export.

#![forbid(unsafe_code)]

pub mod data;
pub mod energy;
pub mod grammar;
pub mod graph;
pub mod layout;
pub mod optimizer;
pub mod pipeline;

pub use data::Dataset;
pub use energy::{Embedding, EnergyReport, Mode};
pub use graph::{ElasticGraph, NodeId};
pub use optimizer::{FitOutcome, OptimizerConfig, Partition};
