//! The robot's workspace as a weighted finite transition system over a labeled grid.
//!
//! Cells are addressed by `(x, y)` with the origin at `(0, 0)`; every iteration is row-major
//! (`y` outer, `x` inner). Regions are inclusive rectangles and label the cells they cover with
//! their name. Because regions are pairwise disjoint a cell carries at most one label.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STRAIGHT_WEIGHT: f64 = 1.0;
/// The map format's literal, not `SQRT_2`.
#[allow(clippy::approx_constant)]
pub const DEFAULT_DIAGONAL_WEIGHT: f64 = 1.41421356;
pub const DEFAULT_STAY_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Named inclusive rectangle `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub name: String,
    pub rect: [i64; 4],
}

impl Region {
    pub fn new(name: impl Into<String>, rect: [i64; 4]) -> Self {
        Region {
            name: name.into(),
            rect,
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        let [x0, y0, x1, y1] = self.rect;
        let (x, y) = (c.x as i64, c.y as i64);
        x0 <= x && x <= x1 && y0 <= y && y <= y1
    }

    fn intersects(&self, other: &Region) -> bool {
        let [ax0, ay0, ax1, ay1] = self.rect;
        let [bx0, by0, bx1, by1] = other.rect;
        ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn from_degree(degree: u8) -> Result<Self> {
        match degree {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::InvalidConnectivity(other)),
        }
    }

    pub fn degree(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    /// Number of moves needed to go from `a` to `b`, ignoring labels.
    pub fn hop_distance(self, a: Cell, b: Cell) -> usize {
        let dx = a.x.abs_diff(b.x);
        let dy = a.y.abs_diff(b.y);
        match self {
            Connectivity::Four => dx + dy,
            Connectivity::Eight => dx.max(dy),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    pub straight: f64,
    pub diagonal: f64,
    /// Self-loop weight; `None` disables staying in place.
    pub stay: Option<f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            straight: DEFAULT_STRAIGHT_WEIGHT,
            diagonal: DEFAULT_DIAGONAL_WEIGHT,
            stay: Some(DEFAULT_STAY_WEIGHT),
        }
    }
}

impl WeightConfig {
    pub fn without_stay(self) -> Self {
        WeightConfig { stay: None, ..self }
    }

    fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidWeight { name, value })
            }
        };
        check("straight_weight", self.straight)?;
        check("diagonal_weight", self.diagonal)?;
        if let Some(stay) = self.stay {
            check("stay_weight", stay)?;
        }
        Ok(())
    }
}

/// One outgoing edge of the transition relation, addressed by destination cell index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub to: usize,
    pub weight: f64,
}

/// Validated, immutable grid workspace.
#[derive(Debug, Clone)]
pub struct GridMap {
    width: usize,
    height: usize,
    connectivity: Connectivity,
    weights: WeightConfig,
    regions: Vec<Region>,
    labels: Vec<Option<usize>>,
    offsets: Vec<usize>,
    moves: Vec<Move>,
}

impl PartialEq for GridMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.connectivity == other.connectivity
            && self.weights == other.weights
            && self.regions == other.regions
    }
}

impl GridMap {
    pub fn new(
        width: usize,
        height: usize,
        regions: Vec<Region>,
        connectivity: Connectivity,
        weights: WeightConfig,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        weights.validate()?;

        let mut names = HashSet::new();
        for region in &regions {
            if !names.insert(region.name.as_str()) {
                return Err(Error::DuplicateRegion(region.name.clone()));
            }
            let [x0, y0, x1, y1] = region.rect;
            let in_bounds = 0 <= x0
                && x0 <= x1
                && (x1 as u64) < width as u64
                && 0 <= y0
                && y0 <= y1
                && (y1 as u64) < height as u64;
            if !in_bounds {
                return Err(Error::RegionOutOfBounds {
                    name: region.name.clone(),
                    rect: region.rect,
                });
            }
        }
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                if a.intersects(b) {
                    return Err(Error::RegionsOverlap {
                        first: a.name.clone(),
                        second: b.name.clone(),
                    });
                }
            }
        }

        let mut labels = vec![None; width * height];
        for (index, region) in regions.iter().enumerate() {
            let [x0, y0, x1, y1] = region.rect;
            for y in y0 as usize..=y1 as usize {
                for x in x0 as usize..=x1 as usize {
                    labels[y * width + x] = Some(index);
                }
            }
        }

        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut moves = Vec::new();
        offsets.push(0);
        for y in 0..height {
            for x in 0..width {
                // Row-major order over destinations: dy outer, dx inner.
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                            continue;
                        }
                        let weight = match (dx, dy) {
                            (0, 0) => match weights.stay {
                                Some(w) => w,
                                None => continue,
                            },
                            (0, _) | (_, 0) => weights.straight,
                            _ if connectivity == Connectivity::Eight => weights.diagonal,
                            _ => continue,
                        };
                        moves.push(Move {
                            to: ny as usize * width + nx as usize,
                            weight,
                        });
                    }
                }
                offsets.push(moves.len());
            }
        }

        Ok(GridMap {
            width,
            height,
            connectivity,
            weights,
            regions,
            labels,
            offsets,
            moves,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn weights(&self) -> WeightConfig {
        self.weights
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Proposition names in declaration order.
    pub fn propositions(&self) -> impl Iterator<Item = &str> {
        self.regions.iter().map(|r| r.name.as_str())
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn index_of(&self, c: Cell) -> Result<usize> {
        if self.contains(c) {
            Ok(c.y * self.width + c.x)
        } else {
            Err(Error::CellOutOfBounds(c))
        }
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count()).map(|i| self.cell_at(i))
    }

    /// Outgoing moves of a cell by index, including the self-loop when configured.
    pub fn moves(&self, index: usize) -> &[Move] {
        &self.moves[self.offsets[index]..self.offsets[index + 1]]
    }

    /// Total number of directed edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.moves.len()
    }

    pub fn neighbors(&self, c: Cell) -> Result<Vec<(Cell, f64)>> {
        let index = self.index_of(c)?;
        Ok(self
            .moves(index)
            .iter()
            .map(|m| (self.cell_at(m.to), m.weight))
            .collect())
    }

    /// Weight of the move `from -> to`, if it exists.
    pub fn move_weight(&self, from: usize, to: usize) -> Option<f64> {
        self.moves(from)
            .iter()
            .find(|m| m.to == to)
            .map(|m| m.weight)
    }

    /// Region index labeling a cell, by cell index.
    pub fn label_index(&self, index: usize) -> Option<usize> {
        self.labels[index]
    }

    pub fn label_of(&self, c: Cell) -> Result<BTreeSet<String>> {
        let index = self.index_of(c)?;
        Ok(self.labels[index]
            .map(|r| self.regions[r].name.clone())
            .into_iter()
            .collect())
    }

    /// Same map with the self-loop removed.
    pub fn without_stay(&self) -> GridMap {
        GridMap::new(
            self.width,
            self.height,
            self.regions.clone(),
            self.connectivity,
            self.weights.without_stay(),
        )
        .expect("a valid map stays valid without self-loops")
    }

    pub fn to_json(&self) -> String {
        let file = MapFile {
            width: self.width,
            height: self.height,
            connectivity: self.connectivity.degree(),
            straight_weight: self.weights.straight,
            diagonal_weight: self.weights.diagonal,
            stay_weight: Some(self.weights.stay),
            regions: self.regions.clone(),
        };
        serde_json::to_string_pretty(&file).expect("map serialization cannot fail")
    }
}

fn default_connectivity() -> u8 {
    8
}

fn default_straight() -> f64 {
    DEFAULT_STRAIGHT_WEIGHT
}

fn default_diagonal() -> f64 {
    DEFAULT_DIAGONAL_WEIGHT
}

// Distinguishes an absent key (outer None) from an explicit null (Some(None)).
fn explicit_option<'de, D>(de: D) -> std::result::Result<Option<Option<f64>>, D::Error>
where
    D: Deserializer<'de>,
{
    Option::<f64>::deserialize(de).map(Some)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    width: usize,
    height: usize,
    #[serde(default = "default_connectivity")]
    connectivity: u8,
    #[serde(default = "default_straight")]
    straight_weight: f64,
    #[serde(default = "default_diagonal")]
    diagonal_weight: f64,
    #[serde(default, deserialize_with = "explicit_option")]
    stay_weight: Option<Option<f64>>,
    regions: Vec<Region>,
}

/// Decodes a JSON map document.
pub fn parse_map_file(text: &str) -> Result<GridMap> {
    let file: MapFile = serde_json::from_str(text).map_err(|e| Error::MapSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let weights = WeightConfig {
        straight: file.straight_weight,
        diagonal: file.diagonal_weight,
        stay: file.stay_weight.unwrap_or(Some(DEFAULT_STAY_WEIGHT)),
    };
    GridMap::new(
        file.width,
        file.height,
        file.regions,
        Connectivity::from_degree(file.connectivity)?,
        weights,
    )
}
