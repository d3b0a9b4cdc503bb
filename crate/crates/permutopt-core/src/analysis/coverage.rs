//! Grid-based measurement of how much of the domain the iterate cubes
//! cover, and whether any iterate cube meets the global-optimum cube.
//!
//! A cell counts as covered once its center lies inside the closed cube
//! `B(iterate, delta)` of some processed iterate, so the covered fraction
//! can only grow. Grids are limited to three dimensions; cell counts are
//! exponential in the dimension.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::optimizers::RunRecord;
use crate::problems::DomainBox;

pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub cells_per_dim: usize,
    /// Cube radius; `None` selects twice the run's median per-step
    /// displacement.
    pub delta: Option<f64>,
    /// Radius of the global-optimum cube; defaults to `delta`.
    pub delta_gbest: Option<f64>,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            cells_per_dim: 50,
            delta: None,
            delta_gbest: None,
        }
    }
}

/// Default cube radius for a run: twice the median per-step displacement,
/// tying cube size to the optimizer's own scale.
pub fn default_cube_radius(record: &RunRecord) -> f64 {
    let mut d = record.displacement_norms.clone();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_unstable_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 1 {
        d[mid]
    } else {
        0.5 * (d[mid - 1] + d[mid])
    };
    2.0 * median
}

#[derive(Debug, Clone)]
pub struct CoverageGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells_per_dim: usize,
    delta: f64,
    visited: Vec<bool>,
    visited_count: usize,
}

impl CoverageGrid {
    pub fn new(domain: &DomainBox, cells_per_dim: usize, delta: f64) -> Result<Self, CoreError> {
        let dim = domain.dim();
        if dim > MAX_GRID_DIM {
            return Err(CoreError::UnsupportedDimension {
                dim,
                max: MAX_GRID_DIM,
            });
        }
        if cells_per_dim == 0 {
            return Err(CoreError::Parameter("cells_per_dim must be positive".into()));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(CoreError::Parameter(format!(
                "cube radius must be finite and nonnegative, got {delta}"
            )));
        }
        let total = cells_per_dim.pow(dim as u32);
        Ok(CoverageGrid {
            lo: domain.lo.clone(),
            hi: domain.hi.clone(),
            cells_per_dim,
            delta,
            visited: vec![false; total],
            visited_count: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn total_cells(&self) -> usize {
        self.visited.len()
    }

    pub fn visited_cells(&self) -> usize {
        self.visited_count
    }

    pub fn covered_fraction(&self) -> f64 {
        self.visited_count as f64 / self.visited.len() as f64
    }

    fn cell_width(&self, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / self.cells_per_dim as f64
    }

    /// Center coordinate of cell index `i` along dimension `d`.
    pub fn center(&self, d: usize, i: usize) -> f64 {
        self.lo[d] + (i as f64 + 0.5) * self.cell_width(d)
    }

    /// True when the center of the multi-index cell lies in the closed cube
    /// around `point`.
    pub fn cell_in_cube(&self, cell: &[usize], point: &[f64]) -> bool {
        cell.iter()
            .enumerate()
            .all(|(d, &i)| libm::fabs(self.center(d, i) - point[d]) <= self.delta)
    }

    fn flat_index(&self, cell: &[usize]) -> usize {
        let mut ix = 0;
        for &c in cell {
            ix = ix * self.cells_per_dim + c;
        }
        ix
    }

    /// Marks every cell whose center lies within the closed cube around the
    /// iterate. Out-of-box iterates are clipped onto the box boundary and
    /// still counted.
    pub fn update(&mut self, iterate: &[f64]) -> Result<(), CoreError> {
        if iterate.len() != self.dim() {
            return Err(CoreError::ShapeMismatch {
                context: "coverage_update",
                left: format!("grid dim {}", self.dim()),
                right: format!("iterate dim {}", iterate.len()),
            });
        }
        let domain = DomainBox {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        };
        let (point, _) = domain.clamp(iterate);
        // Conservative per-dimension candidate ranges, then the exact
        // closed-cube predicate on each candidate center.
        let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let w = self.cell_width(d);
            let lo_f = (point[d] - self.delta - self.lo[d]) / w - 1.5;
            let hi_f = (point[d] + self.delta - self.lo[d]) / w + 0.5;
            let lo_i = if lo_f < 0.0 { 0 } else { lo_f as usize };
            let hi_i = (if hi_f < 0.0 { 0.0 } else { hi_f } as usize).min(self.cells_per_dim - 1);
            if lo_i > hi_i {
                return Ok(());
            }
            ranges.push((lo_i, hi_i));
        }
        let mut cell: Vec<usize> = ranges.iter().map(|&(lo, _)| lo).collect();
        loop {
            if self.cell_in_cube(&cell, &point) {
                let ix = self.flat_index(&cell);
                if !self.visited[ix] {
                    self.visited[ix] = true;
                    self.visited_count += 1;
                }
            }
            // Odometer over the candidate ranges.
            let mut d = self.dim();
            loop {
                if d == 0 {
                    return Ok(());
                }
                d -= 1;
                if cell[d] < ranges[d].1 {
                    cell[d] += 1;
                    break;
                }
                cell[d] = ranges[d].0;
            }
        }
    }
}

/// Coverage trajectory of one recorded run plus the global-optimum-cube
/// hit flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Covered fraction after each iteration.
    pub fractions: Vec<f64>,
    pub final_fraction: f64,
    pub delta: f64,
    /// Some iterate cube intersects the global-optimum cube.
    pub gbest_hit: bool,
    pub gbest_hit_iteration: Option<usize>,
    /// Stricter: some iterate lies inside the global-optimum cube itself.
    pub gbest_reached: bool,
    pub gbest_reached_iteration: Option<usize>,
}

/// Replays a recorded trajectory through a fresh grid. The record must have
/// been produced with trajectory capture enabled.
pub fn coverage_report(
    record: &RunRecord,
    domain: &DomainBox,
    gbest: Option<&[f64]>,
    config: &CoverageConfig,
) -> Result<CoverageReport, CoreError> {
    let trajectory = record.trajectory.as_ref().ok_or_else(|| {
        CoreError::Parameter("coverage_report needs a record with a stored trajectory".into())
    })?;
    let delta = config.delta.unwrap_or_else(|| default_cube_radius(record));
    let delta_gbest = config.delta_gbest.unwrap_or(delta);
    let mut grid = CoverageGrid::new(domain, config.cells_per_dim, delta)?;
    if let Some(g) = gbest {
        if g.len() != domain.dim() {
            return Err(CoreError::ShapeMismatch {
                context: "coverage_report",
                left: format!("domain dim {}", domain.dim()),
                right: format!("gbest dim {}", g.len()),
            });
        }
    }
    let mut fractions = Vec::with_capacity(trajectory.len());
    let mut hit_iteration = None;
    let mut reached_iteration = None;
    for (i, point) in trajectory.iter().enumerate() {
        grid.update(point)?;
        fractions.push(grid.covered_fraction());
        if let Some(g) = gbest {
            let linf = point
                .iter()
                .zip(g)
                .map(|(&p, &q)| libm::fabs(p - q))
                .fold(0.0f64, f64::max);
            if hit_iteration.is_none() && linf <= delta + delta_gbest {
                hit_iteration = Some(i + 1);
            }
            if reached_iteration.is_none() && linf <= delta_gbest {
                reached_iteration = Some(i + 1);
            }
        }
    }
    Ok(CoverageReport {
        final_fraction: fractions.last().copied().unwrap_or(0.0),
        fractions,
        delta,
        gbest_hit: hit_iteration.is_some(),
        gbest_hit_iteration: hit_iteration,
        gbest_reached: reached_iteration.is_some(),
        gbest_reached_iteration: reached_iteration,
    })
}
