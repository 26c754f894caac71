//! Path-length bounding: every path is cut at the first slab boundary it reaches and
//! finished by forwarding only, which keeps all paths within `2d` moves.
//!
//! Slabs are measured in original time: slab `j` spans times `[(j−1)d, jd]` and its
//! boundary vertices are those at time `jd`. A request whose origin is at time `t` lives in
//! slab `⌈t/d⌉`. A forward-only suffix keeps its untilted column, so it stays in slab `j+1`
//! and two suffixes can only meet if they leave the same boundary vertex.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flow::{FractionalMCF, IntegralPacking, SingleFlow};
use crate::grid::{GridPath, GridVertex, Move};

/// Index `⌈time/d⌉` of the slab containing a vertex at `time` as an origin.
pub fn slab_of(time: i64, d: i64) -> i64 {
    -(-time).div_euclid(d)
}

/// A path split at the slab boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncated {
    pub path: GridPath,
    /// Moves that belong to the original path; the rest is the forward-only suffix.
    pub prefix_len: usize,
    /// Boundary vertex where the suffix starts, if the path was cut.
    pub boundary: Option<GridVertex>,
}

impl Truncated {
    pub fn suffix_len(&self) -> usize {
        self.path.len() - self.prefix_len
    }
}

/// Cuts `p` at the first vertex on its slab boundary and forwards straight to the destination row.
/// Paths that reach their destination before the boundary are returned unchanged.
pub fn truncate_path(p: &GridPath, d: i64) -> Truncated {
    let dest = p.end().row;
    let t0 = p.origin.time();
    let cut = slab_of(t0, d) * d - t0;
    let cut = cut as usize;
    if cut >= p.len() {
        return Truncated {
            path: p.clone(),
            prefix_len: p.len(),
            boundary: None,
        };
    }
    let boundary = p.vertices().nth(cut).expect("cut within path");
    let mut moves = p.moves[..cut].to_vec();
    moves.extend(std::iter::repeat_n(Move::Forward, (dest - boundary.row) as usize));
    Truncated {
        path: GridPath::new(p.origin, moves),
        prefix_len: cut,
        boundary: Some(boundary),
    }
}

fn check_distance(origin: GridVertex, dest_row: i64, d: i64, id: usize) -> Result<()> {
    if d < 1 {
        return Err(Error::Precondition(format!("slab width must be >= 1, got {d}")));
    }
    if dest_row - origin.row > d {
        return Err(Error::Precondition(format!(
            "request {id} has distance {} > d = {d}",
            dest_row - origin.row
        )));
    }
    Ok(())
}

/// `c / (B + 2c)`.
pub fn fractional_ratio(buffer: u32, link: u32) -> f64 {
    link as f64 / (buffer as f64 + 2.0 * link as f64)
}

/// Truncates every flow path and scales the result by `c/(B+2c)`.
pub fn truncate_fractional(mcf: &FractionalMCF, d: i64, buffer: u32, link: u32) -> Result<FractionalMCF> {
    let rho = fractional_ratio(buffer, link);
    let mut flows = Vec::with_capacity(mcf.flows.len());
    for f in &mcf.flows {
        check_distance(f.origin, f.dest_row, d, f.id)?;
        let mut merged: BTreeMap<GridPath, f64> = BTreeMap::new();
        for (p, w) in &f.paths {
            *merged.entry(truncate_path(p, d).path).or_insert(0.0) += w * rho;
        }
        flows.push(SingleFlow::from_paths(f.id, f.origin, f.dest_row, merged.into_iter().collect()));
    }
    Ok(FractionalMCF {
        flows,
        upper_bound: mcf.upper_bound,
    })
}

/// Integral truncation: keep the parity class of origin slabs with more paths (ties keep
/// even), truncate, then let at most `c` suffixes leave each boundary vertex, keeping the
/// smallest ids. Survivors number at least `c/(2(B+c))` of the input.
pub fn truncate_integral(packing: &IntegralPacking, d: i64, link: u32) -> Result<IntegralPacking> {
    for (&id, p) in &packing.paths {
        check_distance(p.origin, p.end().row, d, id)?;
    }
    let parity = |p: &GridPath| slab_of(p.origin.time(), d).rem_euclid(2);
    let even = packing.paths.values().filter(|p| parity(p) == 0).count();
    let keep = if even * 2 >= packing.len() { 0 } else { 1 };

    let mut out = IntegralPacking::default();
    let mut per_boundary: BTreeMap<GridVertex, usize> = BTreeMap::new();
    // BTreeMap iteration is by increasing id, so the smallest ids win each boundary vertex.
    for (&id, p) in &packing.paths {
        if parity(p) != keep {
            continue;
        }
        let t = truncate_path(p, d);
        if let Some(v) = t.boundary.filter(|_| t.suffix_len() > 0) {
            let used = per_boundary.entry(v).or_insert(0);
            if *used >= link as usize {
                continue;
            }
            *used += 1;
        }
        out.paths.insert(id, t.path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Move::{Forward as F, Store as S};

    #[test]
    fn slab_indices() {
        assert_eq!(slab_of(1, 4), 1);
        assert_eq!(slab_of(4, 4), 1);
        assert_eq!(slab_of(5, 4), 2);
        assert_eq!(slab_of(0, 4), 0);
        assert_eq!(slab_of(-3, 4), 0);
        assert_eq!(slab_of(-4, 4), -1);
    }

    #[test]
    fn confined_path_unchanged() {
        // Origin at time 1, d = 4: boundary at time 4, path ends at time 3.
        let p = GridPath::new(GridVertex::new(0, 1), vec![S, F]);
        let t = truncate_path(&p, 4);
        assert_eq!(t.path, p);
        assert_eq!(t.boundary, None);
    }

    #[test]
    fn cut_at_boundary() {
        // Origin (0, 1) at time 1, d = 2: boundary time 2 reached after one move.
        let p = GridPath::new(GridVertex::new(0, 1), vec![S, S, F, F]);
        let t = truncate_path(&p, 2);
        assert_eq!(t.boundary, Some(GridVertex::new(0, 2)));
        assert_eq!(t.path.moves, vec![S, F, F]);
        assert!(t.path.len() <= p.len());
        assert_eq!(t.prefix_len, 1);
    }

    #[test]
    fn origin_on_boundary_goes_straight() {
        let p = GridPath::new(GridVertex::new(1, 3), vec![S, F]);
        let t = truncate_path(&p, 4);
        assert_eq!(t.path.moves, vec![F]);
        assert_eq!(t.prefix_len, 0);
    }

    #[test]
    fn distance_precondition() {
        let mut pk = IntegralPacking::default();
        pk.paths.insert(0, GridPath::new(GridVertex::new(0, 1), vec![F, F, F]));
        assert!(truncate_integral(&pk, 2, 1).is_err());
        assert!(truncate_integral(&pk, 3, 1).is_ok());
    }

    #[test]
    fn ratio_at_unit_caps() {
        assert!((fractional_ratio(1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }
}
