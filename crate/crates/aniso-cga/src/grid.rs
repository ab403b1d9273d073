//! Toroidal 2-D population grid with Von Neumann neighborhoods and strictly
//! synchronous stepping.
//!
//! The grid wraps in both axes. A synchronous step computes every cell of
//! the next generation from an immutable snapshot of the previous one; the
//! per-cell random streams come from [`RunStream`](crate::rng::RunStream),
//! so the outcome does not depend on the order cells are visited in.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rng::{CellRng, RunStream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyShape { width: u32, height: u32 },
    #[error("invalid grid shape `{0}`, expected WIDTHxHEIGHT")]
    MalformedShape(String),
}

/// Grid dimensions. `width` is the East-West extent, `height` North-South.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    width: u32,
    height: u32,
}

impl GridShape {
    pub fn new(width: u32, height: u32) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyShape { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn population(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn shortest_side(&self) -> u32 {
        self.width.min(self.height)
    }

    pub fn longest_side(&self) -> u32 {
        self.width.max(self.height)
    }

    /// shortest side / longest side, in (0, 1].
    pub fn side_ratio(&self) -> f64 {
        self.shortest_side() as f64 / self.longest_side() as f64
    }

    pub fn center(&self) -> CellCoord {
        CellCoord { x: self.width / 2, y: self.height / 2 }
    }

    /// Canonical coordinate congruent to `(x, y)` modulo the torus.
    #[inline]
    pub fn wrap(&self, x: i64, y: i64) -> CellCoord {
        CellCoord {
            x: x.rem_euclid(self.width as i64) as u32,
            y: y.rem_euclid(self.height as i64) as u32,
        }
    }

    #[inline]
    pub fn index_of(&self, c: CellCoord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    #[inline]
    pub fn coord_of(&self, index: usize) -> CellCoord {
        debug_assert!(index < self.population());
        CellCoord {
            x: (index % self.width as usize) as u32,
            y: (index / self.width as usize) as u32,
        }
    }

    /// The cell itself plus its four axis neighbors, toroidally wrapped.
    ///
    /// North is `y - 1`, South `y + 1`, East `x + 1`, West `x - 1`; on a
    /// degenerate 1x1 torus all five entries coincide.
    #[inline]
    pub fn von_neumann(&self, cell: CellCoord) -> Neighborhood {
        let CellCoord { x, y } = cell;
        let w = self.width;
        let h = self.height;
        let north = CellCoord { x, y: if y == 0 { h - 1 } else { y - 1 } };
        let south = CellCoord { x, y: if y + 1 == h { 0 } else { y + 1 } };
        let east = CellCoord { x: if x + 1 == w { 0 } else { x + 1 }, y };
        let west = CellCoord { x: if x == 0 { w - 1 } else { x - 1 }, y };
        Neighborhood { cells: [cell, north, south, east, west] }
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl fmt::Debug for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridShape({}x{})", self.width, self.height)
    }
}

impl FromStr for GridShape {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| GridError::MalformedShape(s.to_string()))?;
        let width = w.trim().parse().map_err(|_| GridError::MalformedShape(s.to_string()))?;
        let height = h.trim().parse().map_err(|_| GridError::MalformedShape(s.to_string()))?;
        GridShape::new(width, height)
    }
}

/// Canonical cell coordinate: `0 <= x < width`, `0 <= y < height`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct CellCoord {
    pub x: u32,
    pub y: u32,
}

/// The five Von Neumann directions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Direction {
    Center,
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 5] = [
        Direction::Center,
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// A cell with its four wrapped axis neighbors, indexable by [`Direction`].
#[derive(Clone, Copy, Debug)]
pub struct Neighborhood {
    cells: [CellCoord; 5],
}

impl Neighborhood {
    #[inline]
    pub fn get(&self, dir: Direction) -> CellCoord {
        self.cells[dir.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Direction, CellCoord)> + '_ {
        Direction::ALL.iter().map(move |&d| (d, self.get(d)))
    }
}

/// Dense row-major toroidal grid of values.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid<V> {
    shape: GridShape,
    cells: Vec<V>,
}

impl<V> TorusGrid<V> {
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(CellCoord) -> V) -> Self {
        let cells = (0..shape.population()).map(|i| f(shape.coord_of(i))).collect();
        Self { shape, cells }
    }

    pub fn filled(shape: GridShape, value: V) -> Self
    where
        V: Clone,
    {
        Self { shape, cells: vec![value; shape.population()] }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, c: CellCoord) -> &V {
        &self.cells[self.shape.index_of(c)]
    }

    pub fn set(&mut self, c: CellCoord, value: V) {
        let idx = self.shape.index_of(c);
        self.cells[idx] = value;
    }

    pub fn cells(&self) -> &[V] {
        &self.cells
    }

    pub fn coords(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.shape.population()).map(move |i| self.shape.coord_of(i))
    }

    /// One synchronous generation: every output cell is `rule` applied to
    /// the immutable pre-step snapshot and that cell's private stream for
    /// `generation`. Writes into `dst`, which must have the same shape.
    pub fn synchronous_step_into<F>(
        &self,
        dst: &mut TorusGrid<V>,
        stream: &RunStream,
        generation: u64,
        mut rule: F,
    ) where
        F: FnMut(&TorusGrid<V>, CellCoord, &mut CellRng) -> V,
    {
        assert_eq!(self.shape, dst.shape, "stepping between mismatched grid shapes");
        for idx in 0..self.cells.len() {
            let coord = self.shape.coord_of(idx);
            let mut rng = stream.rng(generation, idx as u64);
            dst.cells[idx] = rule(self, coord, &mut rng);
        }
    }

    /// Allocating variant of [`synchronous_step_into`](Self::synchronous_step_into).
    pub fn synchronous_step<F>(&self, stream: &RunStream, generation: u64, rule: F) -> TorusGrid<V>
    where
        F: FnMut(&TorusGrid<V>, CellCoord, &mut CellRng) -> V,
        V: Clone,
    {
        let mut dst = self.clone();
        self.synchronous_step_into(&mut dst, stream, generation, rule);
        dst
    }

    /// Fallible step; stops at the first failing cell and reports its
    /// coordinate alongside the rule's error.
    pub fn try_synchronous_step<F, E>(
        &self,
        stream: &RunStream,
        generation: u64,
        mut rule: F,
    ) -> Result<TorusGrid<V>, (CellCoord, E)>
    where
        F: FnMut(&TorusGrid<V>, CellCoord, &mut CellRng) -> Result<V, E>,
    {
        let mut cells = Vec::with_capacity(self.cells.len());
        for idx in 0..self.cells.len() {
            let coord = self.shape.coord_of(idx);
            let mut rng = stream.rng(generation, idx as u64);
            cells.push(rule(self, coord, &mut rng).map_err(|e| (coord, e))?);
        }
        Ok(TorusGrid { shape: self.shape, cells })
    }
}
