//! Small dense-vector helpers and compensated summation.
//!
//! Points and covectors are plain `&[f64]` slices; the ambient dimension
//! never exceeds 3, so no linear-algebra crate is warranted.

/// Axis-aligned box, the working domain for field sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl WorkBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> crate::Result<Self> {
        if lo.len() != hi.len() {
            return Err(crate::Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(crate::Error::EmptyBox);
        }
        Ok(WorkBox { lo, hi })
    }

    /// Cube `[−half, half]^dim`.
    pub fn centered(half: f64, dim: usize) -> Self {
        WorkBox {
            lo: vec![-half; dim],
            hi: vec![half; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Uniform sample lattice including the corners; lattices for
    /// `n` and `2n − 1` points per axis are nested.
    pub fn lattice(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let n = per_axis.max(2);
        let mut out = Vec::with_capacity(n.pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            let point: Vec<f64> = (0..d)
                .map(|k| {
                    let t = idx[k] as f64 / (n - 1) as f64;
                    self.lo[k] + t * (self.hi[k] - self.lo[k])
                })
                .collect();
            out.push(point);
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    return out;
                }
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(1 − t)·a + t·b`, written so both orientations hit identical points.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x + t * (y - x))
        .collect()
}

/// Neumaier-compensated accumulator; summation order fixes the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Surface measure of the unit sphere boundary in `ℝ^d` (d = 1 or 2).
pub fn unit_sphere_measure(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::TAU,
        _ => panic!("boundary dimension {d} not supported"),
    }
}
