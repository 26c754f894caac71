//! Square tilings of the untilted grid, SW-quadrant classes and sketch paths.
//!
//! A tiling has side `k` and shifts `φx, φy ∈ {0, k/2}`. Tile `(i, j)` covers rows
//! `[i·k+φy, (i+1)·k+φy)` and columns `[j·k+φx, (j+1)·k+φx)`. Each tile splits into four
//! `(k/2)×(k/2)` quadrants; south is low rows and west is low columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{to_grid_request, GridPath, GridVertex};
use crate::model::PacketRequest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tiling {
    pub k: i64,
    pub phi_x: i64,
    pub phi_y: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileId {
    pub i: i64,
    pub j: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuadrantKind {
    SW,
    NW,
    SE,
    NE,
}

impl QuadrantKind {
    /// Processing order inside a tile: every quadrant only receives paths from earlier ones.
    pub const ORDER: [QuadrantKind; 4] = [QuadrantKind::SW, QuadrantKind::NW, QuadrantKind::SE, QuadrantKind::NE];

    fn upper(self) -> bool {
        matches!(self, QuadrantKind::NW | QuadrantKind::NE)
    }

    fn east(self) -> bool {
        matches!(self, QuadrantKind::SE | QuadrantKind::NE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadrant {
    pub tile: TileId,
    pub which: QuadrantKind,
}

/// Inclusive rectangle of grid vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row0: i64,
    pub col0: i64,
    pub rows: i64,
    pub cols: i64,
}

impl Rect {
    pub fn row1(&self) -> i64 {
        self.row0 + self.rows - 1
    }

    pub fn col1(&self) -> i64 {
        self.col0 + self.cols - 1
    }

    /// South-west corner.
    pub fn corner(&self) -> GridVertex {
        GridVertex::new(self.row0, self.col0)
    }

    pub fn contains(&self, v: GridVertex) -> bool {
        (self.row0..=self.row1()).contains(&v.row) && (self.col0..=self.col1()).contains(&v.col)
    }
}

impl Tiling {
    pub fn new(k: i64, phi_x: i64, phi_y: i64) -> Result<Self> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::Precondition(format!("tile side must be even and >= 4, got {k}")));
        }
        for phi in [phi_x, phi_y] {
            if phi != 0 && phi != k / 2 {
                return Err(Error::Precondition(format!("shift {phi} not in {{0, {}}}", k / 2)));
            }
        }
        Ok(Self { k, phi_x, phi_y })
    }

    /// Tiling of class `idx ∈ 0..4`: bit 0 shifts columns, bit 1 shifts rows.
    pub fn for_class(k: i64, idx: usize) -> Result<Self> {
        let h = k / 2;
        Self::new(k, if idx & 1 != 0 { h } else { 0 }, if idx & 2 != 0 { h } else { 0 })
    }

    pub fn class_index(&self) -> usize {
        usize::from(self.phi_x != 0) + 2 * usize::from(self.phi_y != 0)
    }

    pub fn half(&self) -> i64 {
        self.k / 2
    }

    pub fn tile_of(&self, v: GridVertex) -> TileId {
        TileId {
            i: (v.row - self.phi_y).div_euclid(self.k),
            j: (v.col - self.phi_x).div_euclid(self.k),
        }
    }

    pub fn tile_rect(&self, t: TileId) -> Rect {
        Rect {
            row0: t.i * self.k + self.phi_y,
            col0: t.j * self.k + self.phi_x,
            rows: self.k,
            cols: self.k,
        }
    }

    pub fn quadrant_of(&self, v: GridVertex) -> Quadrant {
        let tile = self.tile_of(v);
        let r = self.tile_rect(tile);
        let h = self.half();
        let which = match (v.row - r.row0 >= h, v.col - r.col0 >= h) {
            (false, false) => QuadrantKind::SW,
            (true, false) => QuadrantKind::NW,
            (false, true) => QuadrantKind::SE,
            (true, true) => QuadrantKind::NE,
        };
        Quadrant { tile, which }
    }

    pub fn quadrant_rect(&self, q: Quadrant) -> Rect {
        let r = self.tile_rect(q.tile);
        let h = self.half();
        Rect {
            row0: r.row0 + if q.which.upper() { h } else { 0 },
            col0: r.col0 + if q.which.east() { h } else { 0 },
            rows: h,
            cols: h,
        }
    }

    pub fn project(&self, p: &GridPath) -> SketchPath {
        let mut tiles: Vec<TileId> = Vec::new();
        for v in p.vertices() {
            let t = self.tile_of(v);
            if tiles.last() != Some(&t) {
                tiles.push(t);
            }
        }
        SketchPath { tiles }
    }
}

/// The shift under which `origin` lies in a SW quadrant.
pub fn classify_shift(origin: GridVertex, k: i64) -> (i64, i64) {
    let h = k / 2;
    let axis = |x: i64| if x.rem_euclid(k) < h { 0 } else { h };
    (axis(origin.col), axis(origin.row))
}

/// Class index of a request: the index of the tiling placing its origin in a SW quadrant.
pub fn class_of(req: &PacketRequest, k: i64) -> usize {
    let (phi_x, phi_y) = classify_shift(to_grid_request(req).0, k);
    usize::from(phi_x != 0) + 2 * usize::from(phi_y != 0)
}

/// Splits requests into the four shift classes, preserving input order.
pub fn partition_classes(reqs: &[PacketRequest], k: i64) -> [Vec<PacketRequest>; 4] {
    let mut out: [Vec<PacketRequest>; 4] = Default::default();
    for r in reqs {
        out[class_of(r, k)].push(r.clone());
    }
    out
}

/// Tile sequence visited by a grid path, consecutive duplicates collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SketchPath {
    pub tiles: Vec<TileId>,
}

/// A step between adjacent tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SketchEdge {
    pub from: TileId,
    pub to: TileId,
}

impl SketchPath {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = SketchEdge> + '_ {
        self.tiles.windows(2).map(|w| SketchEdge { from: w[0], to: w[1] })
    }

    /// Tile following `t` on this sketch path, if any.
    pub fn next_after(&self, t: TileId) -> Option<TileId> {
        let pos = self.tiles.iter().position(|&x| x == t)?;
        self.tiles.get(pos + 1).copied()
    }

    pub fn is_prefix_of(&self, other: &SketchPath) -> bool {
        other.tiles.starts_with(&self.tiles)
    }
}

/// Tile side for the short solver: `4·ℓ_S` rounded to the nearest multiple of 6, raised
/// until `k/2 ≥ 2⌊ℓ_S⌋` so that every path of length at most `2⌊ℓ_S⌋` from a SW origin
/// stays in its tile.
pub fn short_tile_side(ell_s: f64) -> i64 {
    let mut k = ((4.0 * ell_s / 6.0).round() as i64 * 6).max(6);
    let need = 2 * ell_s.floor() as i64;
    while k / 2 < need {
        k += 6;
    }
    k
}

/// Tile side for the medium/long pipeline: the largest multiple of 6 not above
/// `6·ln d_max`, at least 6. Rounding down keeps `k/2 ≤ d_min = 3·ln d_max`, so no
/// request can finish inside its SW quadrant.
pub fn pipeline_tile_side(d_max: f64) -> i64 {
    (((6.0 * d_max.ln()) / 6.0).floor() as i64 * 6).max(6)
}
