//! Detection-event extraction, detector-graph construction, and exact
//! minimum-weight perfect-matching decoding.

mod graph;
mod logical;
mod matching;

pub use graph::{build_graph, build_graph_from_pij, DecodeResult, DetectorGraph, GraphEdge, GraphWarnings};
pub use logical::{
    decode_shot, extract_detection_events, logical_error_probability, EventMatrix, LogicalStats,
};
pub use matching::min_weight_perfect_matching;
