//! Offset-shell quadrature for singular pair integrals
//! `∬ f(x, y) dx dy` with `|y − x| ≥ h_min`.
//!
//! The outer variable runs over the grid lattice with cell weights; the
//! offset `z = y − x` is integrated in polar-type coordinates over
//! geometric radius bands. Every reduction runs in a fixed shell-major
//! order (parallelism cannot change the sum), and the stratified Monte
//! Carlo fallback for large 2-D tensors draws from a counter-seeded
//! ChaCha stream per `(lattice point, shell)` stratum.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::grid::BoundaryGrid;
use crate::numeric::KahanSum;
use crate::quad::gauss_legendre_unit;
use crate::{Error, Result};

/// How offsets are drawn inside each radius band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSampling {
    /// Tensor product: Gauss–Legendre radially, uniform midpoint angles.
    Tensor,
    /// Stratified Monte Carlo with `samples` draws per `(x, shell)`
    /// stratum, area-uniform on the annulus; only meaningful in d = 2.
    MonteCarlo { samples: usize, seed: u64 },
}

/// One offset node: the displacement `z` and its quadrature weight.
pub type OffsetNode = (Vec<f64>, f64);

/// Geometric radius bands covering `[h_min, 2·diameter]`.
#[derive(Debug, Clone)]
pub struct PairQuadrature {
    pub h_min: f64,
    pub bands: Vec<(f64, f64)>,
    pub radial_order: usize,
    pub angular_count: usize,
    pub sampling: PairSampling,
}

impl PairQuadrature {
    /// Default scheme for a grid: inner cutoff `h/2`, bands growing by
    /// factor 2 out to twice the box diameter.
    pub fn for_grid(grid: &BoundaryGrid) -> Result<Self> {
        Self::with_orders(grid, 12, 16)
    }

    pub fn with_orders(
        grid: &BoundaryGrid,
        radial_order: usize,
        angular_count: usize,
    ) -> Result<Self> {
        Self::with_h_min(grid, grid.spacing() / 2.0, radial_order, angular_count)
    }

    pub fn with_h_min(
        grid: &BoundaryGrid,
        h_min: f64,
        radial_order: usize,
        angular_count: usize,
    ) -> Result<Self> {
        if h_min < grid.spacing() / 2.0 {
            return Err(Error::CutoffTooSmall {
                h_min,
                spacing: grid.spacing(),
            });
        }
        let z_max = 2.0 * grid.diameter();
        let mut bands = vec![];
        let mut lo = h_min;
        while lo < z_max {
            let hi = (lo * 2.0).min(z_max);
            bands.push((lo, hi));
            lo = hi;
        }
        // geometric ratio-2 growth normally yields plenty of bands; tiny
        // configurations get bisected until the minimum of 4 holds
        while bands.len() < 4 {
            let mut split = Vec::with_capacity(bands.len() * 2);
            for (a, b) in bands {
                let m = 0.5 * (a + b);
                split.push((a, m));
                split.push((m, b));
            }
            bands = split;
        }
        Ok(PairQuadrature {
            h_min,
            bands,
            radial_order,
            angular_count,
            sampling: PairSampling::Tensor,
        })
    }

    pub fn with_sampling(mut self, sampling: PairSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn z_max(&self) -> f64 {
        self.bands.last().map(|b| b.1).unwrap_or(self.h_min)
    }

    /// Offsets and weights for one shell in dimension `dim` (tensor path);
    /// shell weights sum to the annulus measure exactly.
    pub fn tensor_offsets(&self, shell: usize, dim: usize) -> Vec<OffsetNode> {
        let (lo, hi) = self.bands[shell];
        let radial = gauss_legendre_unit(self.radial_order);
        let mut out = vec![];
        match dim {
            1 => {
                for &(t, w) in &radial {
                    let rho = lo + t * (hi - lo);
                    let wr = w * (hi - lo);
                    out.push((vec![-rho], wr));
                    out.push((vec![rho], wr));
                }
            }
            2 => {
                let na = self.angular_count.max(4);
                let dtheta = std::f64::consts::TAU / na as f64;
                for &(t, w) in &radial {
                    let rho = lo + t * (hi - lo);
                    let wr = w * (hi - lo) * rho * dtheta;
                    for j in 0..na {
                        let theta = (j as f64 + 0.5) * dtheta;
                        out.push((vec![rho * theta.cos(), rho * theta.sin()], wr));
                    }
                }
            }
            _ => panic!("pair quadrature supports d = 1, 2"),
        }
        out
    }

    /// Area-uniform Monte Carlo offsets in one `(x, shell)` stratum, d = 2.
    fn mc_offsets(
        &self,
        shell: usize,
        x_index: usize,
        samples: usize,
        seed: u64,
        out: &mut Vec<OffsetNode>,
    ) {
        let (lo, hi) = self.bands[shell];
        let area = std::f64::consts::PI * (hi * hi - lo * lo);
        let w = area / samples as f64;
        let stream = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((x_index as u64) << 20)
            .wrapping_add(shell as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        out.clear();
        for _ in 0..samples {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let rho = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
            let theta = std::f64::consts::TAU * v;
            out.push((vec![rho * theta.cos(), rho * theta.sin()], w));
        }
    }

    /// Total shell weight (the annulus measure) in dimension `dim`.
    pub fn shell_measure(&self, shell: usize, dim: usize) -> f64 {
        let (lo, hi) = self.bands[shell];
        match dim {
            1 => 2.0 * (hi - lo),
            2 => std::f64::consts::PI * (hi * hi - lo * lo),
            _ => unreachable!(),
        }
    }
}

/// Visit every pair node `(x, y, weight)` in shell-major order within
/// each lattice point. The weight combines the cell weight of `x` with
/// the offset weight of `z = y − x`; summing `weight · f(x, y)` over the
/// stream is exactly what [`integrate_pairs`] computes in parallel.
#[allow(clippy::needless_range_loop)]
pub fn pair_nodes<F>(grid: &BoundaryGrid, scheme: &PairQuadrature, mut visit: F)
where
    F: FnMut(&[f64], &[f64], f64),
{
    let d = grid.dim;
    let cell = grid.cell_weight();
    let tensor: Vec<Vec<OffsetNode>> = match scheme.sampling {
        PairSampling::Tensor => (0..scheme.bands.len())
            .map(|s| scheme.tensor_offsets(s, d))
            .collect(),
        PairSampling::MonteCarlo { .. } => vec![],
    };
    let mut y = vec![0.0; d];
    let mut mc_buf: Vec<OffsetNode> = vec![];
    for xi in 0..grid.len() {
        let x = grid.point(xi);
        for s in 0..scheme.bands.len() {
            let offsets: &[OffsetNode] = match scheme.sampling {
                PairSampling::Tensor => &tensor[s],
                PairSampling::MonteCarlo { samples, seed } => {
                    scheme.mc_offsets(s, xi, samples, seed, &mut mc_buf);
                    &mc_buf
                }
            };
            for (z, w) in offsets {
                for k in 0..d {
                    y[k] = x[k] + z[k];
                }
                visit(&x, &y, cell * w);
            }
        }
    }
}

/// `Σ_x h^d Σ_shells Σ_z w_z · f(x, x + z)` over the grid lattice.
///
/// Chunked over `x` for parallelism; chunk results are reduced in index
/// order so the value is independent of the worker count.
#[allow(clippy::needless_range_loop)]
pub fn integrate_pairs<F>(grid: &BoundaryGrid, scheme: &PairQuadrature, f: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let d = grid.dim;
    let cell = grid.cell_weight();
    let n_points = grid.len();
    let chunk = 16.max(n_points / 256);

    let tensor: Vec<Vec<OffsetNode>> = match scheme.sampling {
        PairSampling::Tensor => (0..scheme.bands.len())
            .map(|s| scheme.tensor_offsets(s, d))
            .collect(),
        PairSampling::MonteCarlo { .. } => vec![],
    };

    let starts: Vec<usize> = (0..n_points).step_by(chunk).collect();
    let partials: Vec<f64> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + chunk).min(n_points);
            let mut acc = KahanSum::new();
            let mut y = vec![0.0; d];
            let mut mc_buf: Vec<OffsetNode> = vec![];
            for xi in start..end {
                let x = grid.point(xi);
                for s in 0..scheme.bands.len() {
                    let offsets: &[OffsetNode] = match scheme.sampling {
                        PairSampling::Tensor => &tensor[s],
                        PairSampling::MonteCarlo { samples, seed } => {
                            scheme.mc_offsets(s, xi, samples, seed, &mut mc_buf);
                            &mc_buf
                        }
                    };
                    for (z, w) in offsets {
                        for k in 0..d {
                            y[k] = x[k] + z[k];
                        }
                        acc.add(cell * w * f(&x, &y));
                    }
                }
            }
            acc.value()
        })
        .collect();

    let mut total = KahanSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}
