//! Gradient-field heatmaps for two-dimensional problems.
//!
//! The feasible box is discretized into a grid of cell centers. Each cell
//! gets the combined normalized gradient of the bi-objective problem; a
//! discrete flow follows the neighbor best aligned with its descent
//! direction. Accumulating the combined gradient norms along the flow gives
//! each cell a height above the locally efficient sets (the flow's sinks),
//! which is what the heatmap visualizes. Sinks are grouped into basins, and
//! cells whose neighboring flow drains into a different basin mark the
//! ridges between basins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biobj::{self, BiObjectiveProblem, DEFAULT_EPS_MO};
use crate::mogsa::TraceEvent;
use crate::problems::GradMode;
use crate::vecmath;
use crate::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 301;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Cells per axis; the grid samples cell centers, not corners.
    pub resolution: usize,
    /// Combined-gradient norm below which a cell is a sink by itself.
    pub eps_mo: f64,
    pub grad_mode: GradMode,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            eps_mo: DEFAULT_EPS_MO,
            grad_mode: GradMode::Analytic,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasinInfo {
    pub id: usize,
    /// Number of sink cells forming the basin's efficient set.
    pub sink_cells: usize,
    /// Number of grid cells draining into this basin.
    pub cells: usize,
    /// True when no ridge cell touches the basin's sinks: the whole
    /// efficient set can be traversed without crossing into another basin.
    pub ridge_free: bool,
}

/// The computed field over the grid, stored row-major with `x` fastest:
/// `index = iy * resolution + ix`.
#[derive(Debug, Clone)]
pub struct LandscapeGrid {
    pub resolution: usize,
    /// Cell-center coordinates along each axis.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub mo_norm: Vec<f64>,
    /// Accumulated combined-gradient norm down the discrete flow; zero at
    /// sinks.
    pub height: Vec<f64>,
    pub basin_id: Vec<usize>,
    /// True for sink cells (the discretized locally efficient sets).
    pub efficient: Vec<bool>,
    /// True for cells bordering a different basin.
    pub ridge: Vec<bool>,
    pub basins: Vec<BasinInfo>,
}

impl LandscapeGrid {
    fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.resolution + ix
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.xs[ix], self.ys[iy])
    }

    /// `ln(1 + height)`: compresses the dynamic range for plotting.
    pub fn height_log(&self, i: usize) -> f64 {
        self.height[i].ln_1p()
    }
}

const NEIGHBORS8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Computes the gradient-field grid for a two-dimensional problem.
pub fn compute_field(p: &BiObjectiveProblem, spec: &GridSpec) -> Result<LandscapeGrid> {
    if p.dim() != 2 {
        return Err(Error::RequiresDim2(p.dim()));
    }
    let n = spec.resolution;
    if n < 2 {
        return Err(Error::InvalidConfig("grid resolution must be at least 2".into()));
    }
    let (x_lo, x_hi) = p.f1.bounds[0];
    let (y_lo, y_hi) = p.f1.bounds[1];
    let dx = (x_hi - x_lo) / n as f64;
    let dy = (y_hi - y_lo) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| x_lo + (i as f64 + 0.5) * dx).collect();
    let ys: Vec<f64> = (0..n).map(|i| y_lo + (i as f64 + 0.5) * dy).collect();
    let total = n * n;

    // combined gradient per cell, in parallel
    let field: Vec<(Vec<f64>, f64, bool)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = (i % n, i / n);
            let pair = biobj::mo_gradient(p, &[xs[ix], ys[iy]], spec.grad_mode)?;
            Ok((pair.mo.clone(), pair.mo_norm(), pair.degenerate()))
        })
        .collect::<Result<_>>()?;
    let mo_norm: Vec<f64> = field.iter().map(|(_, nrm, _)| *nrm).collect();

    // sinks: cells with a vanishing combined gradient, plus mutually
    // attracting neighbor pairs — descent directions pointing at each other
    // across an obtuse combined-gradient angle mean an efficient set passes
    // between the two cells (the same rule the solver uses to detect set
    // crossings); without this, diagonal sections of the set leave gaps in
    // the sink chains
    let mut is_sink: Vec<bool> = field
        .iter()
        .map(|(_, nrm, degenerate)| *degenerate || *nrm < spec.eps_mo)
        .collect();
    for i in 0..total {
        let (ix, iy) = ((i % n) as isize, (i / n) as isize);
        for (ox, oy) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
            let (jx, jy) = (ix + ox, iy + oy);
            if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                continue;
            }
            let j = (jy as usize) * n + jx as usize;
            let (mi, ni, di) = &field[i];
            let (mj, nj, dj) = &field[j];
            if *di || *dj || *ni < spec.eps_mo || *nj < spec.eps_mo {
                continue;
            }
            let step = [ox as f64 * dx, oy as f64 * dy];
            if vecmath::dot(mi, mj) < 0.0
                && vecmath::dot(mi, &step) < 0.0
                && vecmath::dot(mj, &step) > 0.0
            {
                is_sink[i] = true;
                is_sink[j] = true;
            }
        }
    }

    // discrete flow: each remaining cell points at the 8-neighbor best
    // aligned with its descent direction; no aligned neighbor means the
    // cell is a sink after all
    const SINK: usize = usize::MAX;
    let mut successor = vec![SINK; total];
    for i in 0..total {
        if is_sink[i] {
            continue;
        }
        let (mo, nrm, _) = &field[i];
        let (ix, iy) = ((i % n) as isize, (i / n) as isize);
        let mut best_align = 0.0f64;
        let mut best = SINK;
        for (ox, oy) in NEIGHBORS8 {
            let (jx, jy) = (ix + ox, iy + oy);
            if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                continue;
            }
            let step = [ox as f64 * dx, oy as f64 * dy];
            let align = -vecmath::dot(mo, &step) / (vecmath::norm(&step) * nrm);
            if align > best_align {
                best_align = align;
                best = (jy as usize) * n + jx as usize;
            }
        }
        successor[i] = best;
    }

    // collapse flow cycles into sinks: opposing cells straddling an
    // efficient set point at each other and would otherwise never terminate
    let mut state = vec![0u8; total]; // 0 unvisited, 1 on stack, 2 resolved
    for start in 0..total {
        if state[start] != 0 {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        while state[cur] == 0 && successor[cur] != SINK {
            state[cur] = 1;
            chain.push(cur);
            cur = successor[cur];
        }
        if state[cur] == 1 {
            // found a cycle: everything from its first occurrence onward
            let pos = chain.iter().position(|&c| c == cur).unwrap();
            for &c in &chain[pos..] {
                successor[c] = SINK;
            }
        }
        for c in chain {
            state[c] = 2;
        }
        state[cur] = 2;
    }

    let efficient: Vec<bool> = successor.iter().map(|&s| s == SINK).collect();

    // heights by chasing successors, memoized
    let mut height = vec![f64::NAN; total];
    for i in 0..total {
        if !height[i].is_nan() {
            continue;
        }
        let mut chain = vec![i];
        let mut cur = i;
        while successor[cur] != SINK && height[successor[cur]].is_nan() {
            cur = successor[cur];
            chain.push(cur);
        }
        let mut h = if successor[cur] == SINK { 0.0 } else { height[successor[cur]] };
        for &c in chain.iter().rev() {
            if successor[c] != SINK {
                h += mo_norm[c];
            } else {
                h = 0.0;
            }
            height[c] = h;
        }
    }

    // basins: 8-connected components of sink cells, ids ordered by the
    // smallest member cell index
    let mut basin_of_sink = vec![usize::MAX; total];
    let mut basin_count = 0usize;
    for i in 0..total {
        if !efficient[i] || basin_of_sink[i] != usize::MAX {
            continue;
        }
        let id = basin_count;
        basin_count += 1;
        let mut stack = vec![i];
        basin_of_sink[i] = id;
        while let Some(c) = stack.pop() {
            let (ix, iy) = ((c % n) as isize, (c / n) as isize);
            for (ox, oy) in NEIGHBORS8 {
                let (jx, jy) = (ix + ox, iy + oy);
                if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                    continue;
                }
                let j = (jy as usize) * n + jx as usize;
                if efficient[j] && basin_of_sink[j] == usize::MAX {
                    basin_of_sink[j] = id;
                    stack.push(j);
                }
            }
        }
    }

    // every cell inherits the basin of its terminal sink
    let mut basin_id = vec![usize::MAX; total];
    for i in 0..total {
        if basin_id[i] != usize::MAX {
            continue;
        }
        let mut chain = vec![i];
        let mut cur = i;
        while successor[cur] != SINK && basin_id[successor[cur]] == usize::MAX {
            cur = successor[cur];
            chain.push(cur);
        }
        let id = if successor[cur] == SINK {
            basin_of_sink[cur]
        } else {
            basin_id[successor[cur]]
        };
        for c in chain {
            basin_id[c] = id;
        }
    }

    // ridges: non-sink cells with a 4-neighbor draining elsewhere
    let mut ridge = vec![false; total];
    for i in 0..total {
        if efficient[i] {
            continue;
        }
        let (ix, iy) = ((i % n) as isize, (i / n) as isize);
        for (ox, oy) in [(0, -1), (-1, 0), (1, 0), (0, 1)] {
            let (jx, jy) = (ix + ox, iy + oy);
            if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                continue;
            }
            let j = (jy as usize) * n + jx as usize;
            if basin_id[j] != basin_id[i] {
                ridge[i] = true;
                break;
            }
        }
    }

    // a basin is ridge-free when no ridge cell touches its sinks
    let mut ridge_free = vec![true; basin_count];
    let mut sink_cells = vec![0usize; basin_count];
    let mut cells = vec![0usize; basin_count];
    for i in 0..total {
        cells[basin_id[i]] += 1;
        if !efficient[i] {
            continue;
        }
        sink_cells[basin_id[i]] += 1;
        let (ix, iy) = ((i % n) as isize, (i / n) as isize);
        for (ox, oy) in NEIGHBORS8 {
            let (jx, jy) = (ix + ox, iy + oy);
            if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                continue;
            }
            let j = (jy as usize) * n + jx as usize;
            if ridge[j] {
                ridge_free[basin_id[i]] = false;
            }
        }
    }

    let basins = (0..basin_count)
        .map(|id| BasinInfo {
            id,
            sink_cells: sink_cells[id],
            cells: cells[id],
            ridge_free: ridge_free[id],
        })
        .collect();

    Ok(LandscapeGrid {
        resolution: n,
        xs,
        ys,
        mo_norm,
        height,
        basin_id,
        efficient,
        ridge,
        basins,
    })
}

/// Writes the grid as CSV with the header
/// `x,y,height,height_log,basin_id,efficient,ridge`, one row per cell,
/// `y` outer and `x` inner.
pub fn write_grid_csv<W: std::io::Write>(grid: &LandscapeGrid, mut w: W) -> Result<()> {
    writeln!(w, "x,y,height,height_log,basin_id,efficient,ridge")?;
    let n = grid.resolution;
    for iy in 0..n {
        for ix in 0..n {
            let i = grid.idx(ix, iy);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                grid.xs[ix],
                grid.ys[iy],
                grid.height[i],
                grid.height_log(i),
                grid.basin_id[i],
                grid.efficient[i] as u8,
                grid.ridge[i] as u8,
            )?;
        }
    }
    Ok(())
}

/// Writes the basin summary as JSON.
pub fn write_basin_report<W: std::io::Write>(grid: &LandscapeGrid, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &grid.basins)
        .map_err(|e| Error::Parse { what: "basin report".into(), detail: e.to_string() })
}

/// Writes a solver trace as a CSV overlay for plotting on top of the grid.
pub fn write_trace_overlay_csv<W: std::io::Write>(trace: &[TraceEvent], mut w: W) -> Result<()> {
    writeln!(w, "step,phase,x,y,f1,f2,mo_norm,note")?;
    for ev in trace {
        if ev.x.len() != 2 {
            return Err(Error::RequiresDim2(ev.x.len()));
        }
        writeln!(
            w,
            "{},{:?},{},{},{},{},{},{:?}",
            ev.step,
            ev.phase,
            ev.x[0],
            ev.x[1],
            ev.f1,
            ev.f2,
            ev.mo_norm.map(|v| v.to_string()).unwrap_or_default(),
            ev.note,
        )?;
    }
    Ok(())
}
