//! Boundary and half-space grids plus sampled grid functions.

use num_complex::Complex64;

use crate::testfn::SmoothComplexFn;
use crate::{Error, Result};

/// Uniform tensor lattice of cell centers on `[−L, L]^d`.
///
/// The `n^d` nodes sit at cell centers `−L + (k + ½)h` with `h = 2L/n`,
/// so cell weights `h^d` sum exactly to the box measure.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryGrid {
    pub dim: usize,
    pub extent: f64,
    pub n: usize,
}

impl BoundaryGrid {
    pub fn new(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::invalid("d", "boundary dimension must be 1 or 2"));
        }
        if n < 8 {
            return Err(Error::invalid("n", "need at least 8 points per axis"));
        }
        if extent <= 0.0 {
            return Err(Error::invalid("L", "extent must be positive"));
        }
        Ok(BoundaryGrid { dim, extent, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.extent * (self.dim as f64).sqrt()
    }

    /// Coordinates of the lattice node with flat index `idx`
    /// (row-major, first axis fastest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut out = Vec::with_capacity(self.dim);
        let mut rest = idx;
        for _ in 0..self.dim {
            let k = rest % self.n;
            rest /= self.n;
            out.push(-self.extent + (k as f64 + 0.5) * h);
        }
        out
    }

    pub fn cell_weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn iter_points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Sample an analytic function on the lattice.
    pub fn sample(&self, f: &dyn SmoothComplexFn) -> GridFunction {
        assert_eq!(f.dim(), self.dim);
        let values = self.iter_points().map(|p| f.value(&p)).collect();
        GridFunction {
            grid: GridKind::Boundary(self.clone()),
            values,
            boundary_row: None,
        }
    }
}

/// Half-space grid: a boundary lattice crossed with geometrically graded
/// `t`-nodes `t_k = T·r^{K−k}` for `k = 1, …, K`, weighted by `t^γ`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HalfSpaceGrid {
    pub base: BoundaryGrid,
    pub t_nodes: Vec<f64>,
    pub grading: f64,
    pub gamma: f64,
}

impl HalfSpaceGrid {
    pub fn new(base: BoundaryGrid, t_max: f64, t_count: usize, grading: f64, gamma: f64) -> Result<Self> {
        if t_count < 2 {
            return Err(Error::SingleTNode);
        }
        if !(0.0 < grading && grading < 1.0) {
            return Err(Error::invalid("grading", "ratio must lie in (0, 1)"));
        }
        if gamma <= -1.0 {
            return Err(Error::invalid(
                "gamma",
                "t^γ must be integrable near 0: need γ > −1",
            ));
        }
        if t_max <= 0.0 {
            return Err(Error::invalid("T", "slab height must be positive"));
        }
        let t_nodes: Vec<f64> = (1..=t_count)
            .map(|k| t_max * grading.powi((t_count - k) as i32))
            .collect();
        Ok(HalfSpaceGrid {
            base,
            t_nodes,
            grading,
            gamma,
        })
    }

    pub fn t_max(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.base.len() * self.t_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell width `Δt_k` around each node: midpoints between neighbours,
    /// the bottom cell reaching down to 0, the top one up to `T`.
    pub fn t_cell_widths(&self) -> Vec<f64> {
        let t = &self.t_nodes;
        let k = t.len();
        (0..k)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { 0.5 * (t[i - 1] + t[i]) };
                let hi = if i == k - 1 {
                    t[k - 1]
                } else {
                    0.5 * (t[i] + t[i + 1])
                };
                hi - lo
            })
            .collect()
    }

    /// Quadrature weights `t_k^γ · Δt_k` for the `t` direction.
    pub fn t_weights(&self) -> Vec<f64> {
        self.t_nodes
            .iter()
            .zip(self.t_cell_widths())
            .map(|(t, dt)| t.powf(self.gamma) * dt)
            .collect()
    }

    /// Flat index layout: boundary index varies fastest.
    pub fn flat_index(&self, space_idx: usize, t_idx: usize) -> usize {
        t_idx * self.base.len() + space_idx
    }

    pub fn point(&self, space_idx: usize, t_idx: usize) -> Vec<f64> {
        let mut p = self.base.point(space_idx);
        p.push(self.t_nodes[t_idx]);
        p
    }

    pub fn sample(&self, f: &dyn SmoothComplexFn) -> GridFunction {
        assert_eq!(f.dim(), self.base.dim + 1);
        let mut values = vec![Complex64::default(); self.len()];
        for ti in 0..self.t_nodes.len() {
            for si in 0..self.base.len() {
                values[self.flat_index(si, ti)] = f.value(&self.point(si, ti));
            }
        }
        GridFunction {
            grid: GridKind::HalfSpace(self.clone()),
            values,
            boundary_row: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    Boundary(BoundaryGrid),
    HalfSpace(HalfSpaceGrid),
}

/// Complex samples on a grid, in lattice order.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: GridKind,
    pub values: Vec<Complex64>,
    /// For half-space functions built by the extension operator: the exact
    /// `t = 0` row, which the trace returns verbatim.
    pub boundary_row: Option<Vec<Complex64>>,
}

impl GridFunction {
    pub fn boundary(grid: BoundaryGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length must match lattice size"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(GridFunction {
            grid: GridKind::Boundary(grid),
            values,
            boundary_row: None,
        })
    }

    pub fn half_space(grid: HalfSpaceGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length must match lattice size"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(GridFunction {
            grid: GridKind::HalfSpace(grid),
            values,
            boundary_row: None,
        })
    }

    pub fn as_boundary(&self) -> Option<&BoundaryGrid> {
        match &self.grid {
            GridKind::Boundary(b) => Some(b),
            GridKind::HalfSpace(_) => None,
        }
    }

    pub fn as_half_space(&self) -> Option<&HalfSpaceGrid> {
        match &self.grid {
            GridKind::HalfSpace(h) => Some(h),
            GridKind::Boundary(_) => None,
        }
    }

    /// Serialize as CSV. Boundary grids in `d` dimensions write
    /// `i[,j],re,im`; half-space grids add the `t` index `k` before the
    /// value columns.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.grid {
            GridKind::Boundary(g) => {
                writeln!(
                    w,
                    "{},re,im",
                    if g.dim == 1 { "i" } else { "i,j" }
                )?;
                for (idx, v) in self.values.iter().enumerate() {
                    if g.dim == 1 {
                        writeln!(w, "{},{:.17e},{:.17e}", idx, v.re, v.im)?;
                    } else {
                        writeln!(
                            w,
                            "{},{},{:.17e},{:.17e}",
                            idx % g.n,
                            idx / g.n,
                            v.re,
                            v.im
                        )?;
                    }
                }
            }
            GridKind::HalfSpace(g) => {
                writeln!(
                    w,
                    "{},k,re,im",
                    if g.base.dim == 1 { "i" } else { "i,j" }
                )?;
                for ti in 0..g.t_nodes.len() {
                    for si in 0..g.base.len() {
                        let v = self.values[g.flat_index(si, ti)];
                        if g.base.dim == 1 {
                            writeln!(w, "{},{},{:.17e},{:.17e}", si, ti, v.re, v.im)?;
                        } else {
                            writeln!(
                                w,
                                "{},{},{},{:.17e},{:.17e}",
                                si % g.base.n,
                                si / g.base.n,
                                ti,
                                v.re,
                                v.im
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Read values back into an existing grid layout (the CSV carries
    /// indices and values, not the grid geometry).
    pub fn read_csv<R: std::io::BufRead>(grid: GridKind, r: R) -> Result<Self> {
        let len = match &grid {
            GridKind::Boundary(g) => g.len(),
            GridKind::HalfSpace(g) => g.len(),
        };
        let mut values = vec![Complex64::default(); len];
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::invalid("csv", e.to_string()))?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid("csv", format!("line {lineno}: {e}")))
            };
            let (flat, re, im) = match (&grid, cols.len()) {
                (GridKind::Boundary(_), 3) => (
                    cols[0]
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| Error::invalid("csv", e.to_string()))?,
                    parse(cols[1])?,
                    parse(cols[2])?,
                ),
                (GridKind::Boundary(g), 4) => {
                    let i: usize = cols[0].trim().parse().unwrap_or(0);
                    let j: usize = cols[1].trim().parse().unwrap_or(0);
                    (j * g.n + i, parse(cols[2])?, parse(cols[3])?)
                }
                (GridKind::HalfSpace(g), 4) => {
                    let i: usize = cols[0].trim().parse().unwrap_or(0);
                    let k: usize = cols[1].trim().parse().unwrap_or(0);
                    (g.flat_index(i, k), parse(cols[2])?, parse(cols[3])?)
                }
                (GridKind::HalfSpace(g), 5) => {
                    let i: usize = cols[0].trim().parse().unwrap_or(0);
                    let j: usize = cols[1].trim().parse().unwrap_or(0);
                    let k: usize = cols[2].trim().parse().unwrap_or(0);
                    (g.flat_index(j * g.base.n + i, k), parse(cols[3])?, parse(cols[4])?)
                }
                _ => return Err(Error::invalid("csv", format!("line {lineno}: bad arity"))),
            };
            if flat >= len {
                return Err(Error::invalid("csv", format!("index {flat} out of range")));
            }
            values[flat] = Complex64::new(re, im);
        }
        Ok(GridFunction {
            grid,
            values,
            boundary_row: None,
        })
    }

    /// Verify a ring of (near-)zeros on the outermost cells of a boundary
    /// grid, the precondition for quantified truncation.
    pub fn check_zero_ring(&self, rings: usize, tol: f64) -> Result<()> {
        let g = match &self.grid {
            GridKind::Boundary(b) => b,
            GridKind::HalfSpace(_) => {
                return Err(Error::invalid("grid", "zero-ring check is for boundary grids"))
            }
        };
        for idx in 0..g.len() {
            let mut rest = idx;
            let mut on_ring = false;
            for _ in 0..g.dim {
                let k = rest % g.n;
                rest /= g.n;
                if k < rings || k >= g.n - rings {
                    on_ring = true;
                }
            }
            if on_ring && self.values[idx].norm() > tol {
                return Err(Error::SupportTouchesEdge);
            }
        }
        Ok(())
    }
}
