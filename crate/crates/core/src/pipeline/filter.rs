//! Sketch-edge congestion filter.

use std::collections::BTreeMap;

use crate::tiling::{SketchEdge, SketchPath};

/// Largest sketch-edge load a surviving request may see: `2λk`.
pub fn filter_threshold(k: i64, lambda: f64) -> f64 {
    2.0 * lambda * k as f64
}

/// Number of sketch paths crossing each sketch edge.
pub fn sketch_loads<'a>(sketches: impl IntoIterator<Item = &'a SketchPath>) -> BTreeMap<SketchEdge, usize> {
    let mut loads = BTreeMap::new();
    for s in sketches {
        for e in s.edges() {
            *loads.entry(e).or_insert(0) += 1;
        }
    }
    loads
}

/// Ids whose every sketch edge carries at most `2λk` of the given sketch paths.
pub fn filter(sketches: &BTreeMap<usize, SketchPath>, k: i64, lambda: f64) -> Vec<usize> {
    let loads = sketch_loads(sketches.values());
    let limit = filter_threshold(k, lambda);
    sketches
        .iter()
        .filter(|(_, s)| s.edges().all(|e| loads[&e] as f64 <= limit))
        .map(|(&id, _)| id)
        .collect()
}
