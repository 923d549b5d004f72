//! Uniform rectangular sample grids and functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

/// `count` equally spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let g = Grid1D { lo, hi, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Grid(format!(
                "count must be >= 2, got {}",
                self.count
            )));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Grid(format!(
                "need finite lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// True when the grid is symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi).abs() <= 1e-12 * self.hi.abs().max(1.0)
    }
}

/// Tensor product of two axes; flat index is `ix * y.count + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Result<Self> {
        x.validate()?;
        y.validate()?;
        Ok(Grid2D { x, y })
    }

    pub fn square(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let axis = Grid1D::new(lo, hi, count)?;
        Ok(Grid2D { x: axis, y: axis })
    }

    pub fn len(&self) -> usize {
        self.x.count * self.y.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        (
            self.x.point(i / self.y.count),
            self.y.point(i % self.y.count),
        )
    }

    pub fn cell_area(&self) -> f64 {
        self.x.step() * self.y.step()
    }
}

/// A 1D or 2D sample grid whose points are signal-space [`State`]s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim")]
pub enum Grid {
    #[serde(rename = "1")]
    D1(Grid1D),
    #[serde(rename = "2")]
    D2(Grid2D),
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self {
            Grid::D1(_) => 1,
            Grid::D2(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::D1(g) => g.count,
            Grid::D2(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> State {
        match self {
            Grid::D1(g) => State::scalar(g.point(i)),
            Grid::D2(g) => {
                let (x, y) = g.point(i);
                State::new(&[x, y]).expect("two components")
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Volume element of the trapezoid rule, ignoring edge halving.
    pub fn cell_volume(&self) -> f64 {
        match self {
            Grid::D1(g) => g.step(),
            Grid::D2(g) => g.cell_area(),
        }
    }

    /// Trapezoid weight of flat index `i` (cell volume times edge factors).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let edge = |g: &Grid1D, k: usize| if k == 0 || k + 1 == g.count { 0.5 } else { 1.0 };
        match self {
            Grid::D1(g) => g.step() * edge(g, i),
            Grid::D2(g) => {
                let (ix, iy) = (i / g.y.count, i % g.y.count);
                g.cell_area() * edge(&g.x, ix) * edge(&g.y, iy)
            }
        }
    }

    /// Flat indices on the outer boundary.
    pub fn boundary_indices(&self) -> Vec<usize> {
        match self {
            Grid::D1(g) => vec![0, g.count - 1],
            Grid::D2(g) => (0..g.len())
                .filter(|&i| {
                    let (ix, iy) = (i / g.y.count, i % g.y.count);
                    ix == 0 || iy == 0 || ix + 1 == g.x.count || iy + 1 == g.y.count
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Grid::D1(g) => g.validate(),
            Grid::D2(g) => {
                g.x.validate()?;
                g.y.validate()
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Grid::D1(g) => g.is_symmetric(),
            Grid::D2(g) => g.x.is_symmetric() && g.y.is_symmetric(),
        }
    }
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::D1(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::D2(g)
    }
}

/// Samples of a function on a [`Grid`], in flat-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T> {
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T> GridFunction<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, &T)> + '_ {
        self.grid.points().zip(self.values.iter())
    }
}

impl GridFunction<f64> {
    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.trapezoid_weight(i))
            .sum()
    }
}
