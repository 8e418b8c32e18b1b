//! The explicit mollifier-with-phase extension operator, the boundary
//! trace, whole-space extension, and the reflection construction.
//!
//! For a boundary datum `u` the extension is
//!
//! `U(x, t) = θ(t) ∫ φ_t(x − y) e^{iI_A((x,t), y)} u(y) dy`,
//!
//! with `φ` a normalized bump of support radius 1 and `θ` a smooth cutoff
//! equal to 1 on `[0, a/2]` and 0 beyond `a = β^{−1/2}`. Substituting
//! `y = x + tξ` turns the integral into a fixed-domain quadrature over
//! `[−1, 1]^d`, which makes `U` smooth in `(x, t)` and lets the covariant
//! gradient be evaluated by exact differentiation under the integral: the
//! endpoint derivatives of the phase carry explicit `dA` correction
//! integrals, so no step-size enters and gauge covariance holds to
//! rounding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::PotentialField;
use crate::grid::{BoundaryGrid, GridFunction, HalfSpaceGrid};
use crate::numeric::KahanSum;
use crate::quad::SegmentRule;
use crate::testfn::{bump_profile, bump_unit_mass, SmoothComplexFn};
use crate::{Error, Result};

/// Mollifier profile, cutoff, and the magnetic length `a = β^{−1/2}`.
#[derive(Debug, Clone)]
pub struct ExtensionKernel {
    dim: usize,
    a: f64,
    phi_scale: f64,
}

impl ExtensionKernel {
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::invalid("beta", "kernel needs a positive field bound"));
        }
        Ok(ExtensionKernel {
            dim,
            a: beta.powf(-0.5),
            phi_scale: 1.0 / bump_unit_mass(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cutoff height `a = β^{−1/2}`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Normalized mollifier `φ(ζ)`, `∫_{ℝ^d} φ = 1`, support `|ζ| < 1`.
    pub fn phi(&self, zeta: &[f64]) -> f64 {
        let s2: f64 = zeta.iter().map(|z| z * z).sum();
        self.phi_scale * bump_profile(s2)
    }

    /// Smooth cutoff: 1 on `[0, a/2]`, 0 beyond `a`, transitioning through
    /// the standard `exp(−1/s)` step, with `sup|θ'| ≤ 4/a`.
    pub fn theta(&self, t: f64) -> f64 {
        smooth_step_down((2.0 * t - self.a) / self.a)
    }

    pub fn theta_prime(&self, t: f64) -> f64 {
        smooth_step_down_prime((2.0 * t - self.a) / self.a) * 2.0 / self.a
    }
}

fn exp_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// 1 for `s ≤ 0`, 0 for `s ≥ 1`, smooth and monotone in between.
fn smooth_step_down(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let up = exp_step(1.0 - s);
        up / (up + exp_step(s))
    }
}

fn smooth_step_down_prime(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        let h = 1e-7;
        (smooth_step_down(s + h) - smooth_step_down(s - h)) / (2.0 * h)
    }
}

/// The extension of one boundary datum by one field, evaluable anywhere.
pub struct Extension<'a> {
    u: &'a dyn SmoothComplexFn,
    field: &'a PotentialField,
    kernel: &'a ExtensionKernel,
    rule: &'a SegmentRule,
    ball_nodes: Vec<(f64, f64)>,
}

impl<'a> Extension<'a> {
    pub fn new(
        u: &'a dyn SmoothComplexFn,
        field: &'a PotentialField,
        kernel: &'a ExtensionKernel,
        rule: &'a SegmentRule,
    ) -> Result<Self> {
        // the flat edge of the mollifier wants composite panels
        let (order, panels) = if u.dim() == 1 { (16, 4) } else { (12, 2) };
        Self::with_ball_rule(u, field, kernel, rule, order, panels)
    }

    pub fn with_ball_rule(
        u: &'a dyn SmoothComplexFn,
        field: &'a PotentialField,
        kernel: &'a ExtensionKernel,
        rule: &'a SegmentRule,
        ball_order: usize,
        ball_panels: usize,
    ) -> Result<Self> {
        let d = u.dim();
        if field.dim() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                got: field.dim(),
            });
        }
        if kernel.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: kernel.dim(),
            });
        }
        // composite nodes on [−1, 1] per axis
        let ball_nodes = SegmentRule::new(ball_order, ball_panels)
            .nodes()
            .iter()
            .map(|&(t, w)| (2.0 * t - 1.0, 2.0 * w))
            .collect();
        Ok(Extension {
            u,
            field,
            kernel,
            rule,
            ball_nodes,
        })
    }

    pub fn datum(&self) -> &dyn SmoothComplexFn {
        self.u
    }

    pub fn field(&self) -> &PotentialField {
        self.field
    }

    pub fn kernel(&self) -> &ExtensionKernel {
        self.kernel
    }

    fn for_each_ball_node(&self, mut body: impl FnMut(&[f64], f64)) {
        let d = self.u.dim();
        match d {
            1 => {
                for &(z, w) in &self.ball_nodes {
                    body(&[z], w);
                }
            }
            2 => {
                for &(z1, w1) in &self.ball_nodes {
                    for &(z2, w2) in &self.ball_nodes {
                        body(&[z1, z2], w1 * w2);
                    }
                }
            }
            _ => panic!("extension supports boundary dimension 1 or 2"),
        }
    }

    /// `U(x, t)`; `t = 0` returns `u(x)` by definition.
    pub fn value(&self, x: &[f64], t: f64) -> Complex64 {
        if t == 0.0 {
            return self.u.value(x);
        }
        let th = self.kernel.theta(t);
        if th == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let d = self.u.dim();
        let mut from = x.to_vec();
        from.push(t);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut y = vec![0.0; d + 1];
        self.for_each_ball_node(|zeta, w| {
            let phi = self.kernel.phi(zeta);
            if phi == 0.0 {
                return;
            }
            for k in 0..d {
                y[k] = x[k] + t * zeta[k];
            }
            y[d] = 0.0;
            let uy = self.u.value(&y[..d]);
            if uy == Complex64::new(0.0, 0.0) {
                return;
            }
            let phase = crate::potential::segment_potential(self.field, &from, &y, self.rule);
            acc += Complex64::from_polar(w * phi, phase) * uy;
        });
        th * acc
    }

    /// `∇_A U(x, t)` for `t > 0` by differentiation under the integral.
    ///
    /// Writing `Y(ξ) = (x + tξ, 0)` and `X = (x, t)`, the phase derivative
    /// splits into endpoint values of `A` plus the curvature moments
    /// `K, M`; the `−A_j(X)` endpoint term cancels the `+iA_j U` of the
    /// covariant gradient node by node, which is what makes the result
    /// exactly gauge covariant.
    pub fn covariant_gradient(&self, x: &[f64], t: f64) -> Result<Vec<Complex64>> {
        if t <= 0.0 {
            return Err(Error::invalid("t", "gradient formula needs t > 0"));
        }
        let d = self.u.dim();
        let th = self.kernel.theta(t);
        let thp = self.kernel.theta_prime(t);
        if th == 0.0 && thp == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); d + 1]);
        }
        let mut from = x.to_vec();
        from.push(t);
        let mut grad = vec![Complex64::new(0.0, 0.0); d + 1];
        let mut plain = Complex64::new(0.0, 0.0);
        let mut y = vec![0.0; d + 1];
        let mut ay = vec![0.0; d + 1];
        let mut err: Option<Error> = None;
        self.for_each_ball_node(|zeta, w| {
            if err.is_some() {
                return;
            }
            let phi = self.kernel.phi(zeta);
            if phi == 0.0 {
                return;
            }
            for k in 0..d {
                y[k] = x[k] + t * zeta[k];
            }
            y[d] = 0.0;
            let uy = self.u.value(&y[..d]);
            let gy = self.u.gradient(&y[..d]);
            let phase = crate::potential::segment_potential(self.field, &from, &y, self.rule);
            let rot = Complex64::from_polar(w * phi, phase);
            plain += rot * uy;
            let (kk, mm) =
                match crate::potential::curvature_segment_moments(self.field, &from, &y, self.rule)
                {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
            self.field.eval_into(&y, &mut ay);
            for j in 0..d {
                let dphase = kk[j] + mm[j] + ay[j];
                grad[j] += rot * (Complex64::i() * dphase * uy + gy[j]);
            }
            let mut dphase_t = kk[d];
            let mut transport = Complex64::new(0.0, 0.0);
            for k in 0..d {
                dphase_t += zeta[k] * (ay[k] + mm[k]);
                transport += zeta[k] * gy[k];
            }
            grad[d] += rot * (Complex64::i() * dphase_t * uy + transport);
        });
        if let Some(e) = err {
            return Err(e);
        }
        for g in grad.iter_mut() {
            *g *= th;
        }
        grad[d] += thp * plain;
        Ok(grad)
    }

    /// Plain gradient `∇U = ∇_A U − iAU`.
    pub fn plain_gradient(&self, x: &[f64], t: f64) -> Result<Vec<Complex64>> {
        let cg = self.covariant_gradient(x, t)?;
        let mut p = x.to_vec();
        p.push(t);
        let a = self.field.eval(&p)?;
        let v = self.value(x, t);
        Ok(cg
            .into_iter()
            .zip(a)
            .map(|(g, ai)| g - Complex64::i() * ai * v)
            .collect())
    }
}

/// Sample the extension on a half-space grid; the exact `t = 0` row is
/// stored so the trace recovers the datum verbatim.
pub fn extend_grid(ext: &Extension, grid: &HalfSpaceGrid) -> Result<GridFunction> {
    if grid.t_max() < ext.kernel.a() {
        return Err(Error::SlabTooShallow {
            t_max: grid.t_max(),
            a: ext.kernel.a(),
        });
    }
    let nb = grid.base.len();
    let nt = grid.t_nodes.len();
    let values: Vec<Complex64> = (0..nb * nt)
        .into_par_iter()
        .map(|flat| {
            let ti = flat / nb;
            let si = flat % nb;
            let x = grid.base.point(si);
            ext.value(&x, grid.t_nodes[ti])
        })
        .collect();
    let boundary_row = (0..nb)
        .map(|si| ext.u.value(&grid.base.point(si)))
        .collect();
    let mut gf = GridFunction::half_space(grid.clone(), values)?;
    gf.boundary_row = Some(boundary_row);
    Ok(gf)
}

/// Boundary trace of half-space data: the stored `t = 0` row when present,
/// otherwise linear extrapolation from the two smallest `t` rows (flagged
/// if those rows differ by more than 10% in `L²`).
pub fn trace(u: &GridFunction) -> Result<GridFunction> {
    let grid = u
        .as_half_space()
        .ok_or_else(|| Error::invalid("u", "trace needs half-space data"))?;
    if let Some(row) = &u.boundary_row {
        return GridFunction::boundary(grid.base.clone(), row.clone());
    }
    let t = &grid.t_nodes;
    if t.len() < 2 {
        return Err(Error::SingleTNode);
    }
    let nb = grid.base.len();
    let (t1, t2) = (t[0], t[1]);
    let mut diff2 = 0.0;
    let mut norm2 = 0.0;
    for si in 0..nb {
        let a = u.values[grid.flat_index(si, 0)];
        let b = u.values[grid.flat_index(si, 1)];
        diff2 += (a - b).norm_sqr();
        norm2 += a.norm_sqr();
    }
    let rel = (diff2 / norm2.max(1e-300)).sqrt();
    if rel > 0.10 {
        return Err(Error::DiscontinuousTrace { rel: rel * 100.0 });
    }
    let c1 = t2 / (t2 - t1);
    let c2 = -t1 / (t2 - t1);
    let row = (0..nb)
        .map(|si| {
            u.values[grid.flat_index(si, 0)] * c1 + u.values[grid.flat_index(si, 1)] * c2
        })
        .collect();
    GridFunction::boundary(grid.base.clone(), row)
}

/// Sampled boundary data promoted to a smooth-function interface through
/// multilinear interpolation; gradients are central differences at the
/// grid scale.
pub struct SampledBoundaryFn<'a> {
    gf: &'a GridFunction,
    dim: usize,
    fd_step: f64,
    lip: f64,
    sup: f64,
    support: (Vec<f64>, f64),
}

impl<'a> SampledBoundaryFn<'a> {
    pub fn new(gf: &'a GridFunction) -> Result<Self> {
        let g = gf
            .as_boundary()
            .ok_or_else(|| Error::invalid("u", "sampled datum must be boundary data"))?;
        let data = crate::norms::BoundaryData::Sampled(gf);
        let sup = gf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let h = g.spacing();
        let n = g.n;
        let mut lip = 0.0f64;
        for idx in 0..gf.values.len() {
            if idx % n + 1 < n {
                lip = lip.max((gf.values[idx + 1] - gf.values[idx]).norm() / h);
            }
            if g.dim == 2 && idx / n + 1 < n {
                lip = lip.max((gf.values[idx + n] - gf.values[idx]).norm() / h);
            }
        }
        // reuse the seminorm support-ball extraction
        let support = match data {
            crate::norms::BoundaryData::Sampled(s) => {
                let mut lo = vec![f64::INFINITY; g.dim];
                let mut hi = vec![f64::NEG_INFINITY; g.dim];
                let mut any = false;
                for (idx, v) in s.values.iter().enumerate() {
                    if v.norm() > 0.0 {
                        any = true;
                        let p = g.point(idx);
                        for k in 0..g.dim {
                            lo[k] = lo[k].min(p[k]);
                            hi[k] = hi[k].max(p[k]);
                        }
                    }
                }
                if any {
                    let center: Vec<f64> =
                        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                    let radius = lo
                        .iter()
                        .zip(&hi)
                        .map(|(a, b)| (0.5 * (b - a)).powi(2))
                        .sum::<f64>()
                        .sqrt()
                        + h;
                    (center, radius)
                } else {
                    (vec![0.0; g.dim], 0.0)
                }
            }
            _ => unreachable!(),
        };
        Ok(SampledBoundaryFn {
            gf,
            dim: g.dim,
            fd_step: h,
            lip: lip * 1.5,
            sup,
            support,
        })
    }
}

impl SmoothComplexFn for SampledBoundaryFn<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        crate::norms::BoundaryData::Sampled(self.gf).value(p)
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let h = self.fd_step;
        let data = crate::norms::BoundaryData::Sampled(self.gf);
        (0..self.dim)
            .map(|k| {
                let mut pp = p.to_vec();
                let mut pm = p.to_vec();
                pp[k] += h;
                pm[k] -= h;
                (data.value(&pp) - data.value(&pm)) / (2.0 * h)
            })
            .collect()
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        Some(self.support.clone())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lip
    }

    fn sup_bound(&self) -> f64 {
        self.sup
    }
}

/// Two-sided slab data: the lower side stores values at `(x, −t_k)`
/// indexed by the same graded `t_k`.
#[derive(Debug, Clone)]
pub struct TwoSidedGridFunction {
    pub upper: GridFunction,
    pub lower: GridFunction,
}

impl TwoSidedGridFunction {
    /// CSV export with a side column (`+`/`−`).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = self.upper.as_half_space().expect("two-sided slab data");
        writeln!(
            w,
            "side,{},k,re,im",
            if g.base.dim == 1 { "i" } else { "i,j" }
        )?;
        for (side, gf) in [("+", &self.upper), ("-", &self.lower)] {
            let grid = gf.as_half_space().unwrap();
            for ti in 0..grid.t_nodes.len() {
                for si in 0..grid.base.len() {
                    let v = gf.values[grid.flat_index(si, ti)];
                    if grid.base.dim == 1 {
                        writeln!(w, "{side},{si},{ti},{:.17e},{:.17e}", v.re, v.im)?;
                    } else {
                        writeln!(
                            w,
                            "{side},{},{},{ti},{:.17e},{:.17e}",
                            si % grid.base.n,
                            si / grid.base.n,
                            v.re,
                            v.im
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Whole-space extension: the upper side is kept, the lower side is the
/// phase extension of the trace run with the reflected field
/// `(S^*A)(x, t) = (A^∥, −A_{d+1})(x, −t)`.
pub fn extend_whole_space(
    upper: &GridFunction,
    field: &PotentialField,
    kernel: &ExtensionKernel,
    rule: &SegmentRule,
) -> Result<TwoSidedGridFunction> {
    let grid = upper
        .as_half_space()
        .ok_or_else(|| Error::invalid("U", "whole-space extension needs half-space data"))?
        .clone();
    let tr = trace(upper)?;
    let datum = SampledBoundaryFn::new(&tr)?;
    let reflected = field.reflect_normal();
    let ext = Extension::new(&datum, &reflected, kernel, rule)?;
    let lower = extend_grid(&ext, &grid)?;
    Ok(TwoSidedGridFunction {
        upper: upper.clone(),
        lower,
    })
}

/// Reflection extension `Ū(x, −t) = U(x, t)`: both sides carry the same
/// values. Used as the counterexample construction.
pub fn reflection_extension(upper: &GridFunction) -> Result<TwoSidedGridFunction> {
    if upper.as_half_space().is_none() {
        return Err(Error::invalid("U", "reflection needs half-space data"));
    }
    Ok(TwoSidedGridFunction {
        upper: upper.clone(),
        lower: upper.clone(),
    })
}

/// Largest deviation `sup_x |U(x, t) − u(x)|` over the base lattice.
pub fn boundary_deviation(ext: &Extension, grid: &BoundaryGrid, t: f64) -> f64 {
    let mut max = 0.0f64;
    for si in 0..grid.len() {
        let x = grid.point(si);
        max = max.max((ext.value(&x, t) - ext.datum().value(&x)).norm());
    }
    max
}

/// Weighted covariant energy `∬ |∇_A U|^p t^γ` of an extension sampled
/// analytically on a half-space grid, plus the zero-order part
/// `∬ |U|^p t^γ`. Returns `(gradient_energy, value_energy)`.
pub fn extension_energies(
    ext: &Extension,
    grid: &HalfSpaceGrid,
    p: f64,
) -> Result<(f64, f64)> {
    let nb = grid.base.len();
    let tw = grid.t_weights();
    let wcell = grid.base.cell_weight();
    let rows: Vec<(f64, f64)> = (0..grid.t_nodes.len())
        .into_par_iter()
        .map(|ti| {
            let mut ge = KahanSum::new();
            let mut ve = KahanSum::new();
            for si in 0..nb {
                let x = grid.base.point(si);
                let t = grid.t_nodes[ti];
                let v = ext.value(&x, t);
                let cg = ext.covariant_gradient(&x, t).expect("gradient in range");
                let g2: f64 = cg.iter().map(|c| c.norm_sqr()).sum();
                ge.add(wcell * tw[ti] * g2.sqrt().powf(p));
                ve.add(wcell * tw[ti] * v.norm().powf(p));
            }
            (ge.value(), ve.value())
        })
        .collect();
    let mut ge = KahanSum::new();
    let mut ve = KahanSum::new();
    for (g, v) in rows {
        ge.add(g);
        ve.add(v);
    }
    Ok((ge.value(), ve.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaugeFunction;
    use crate::poly::{Monomial, Polynomial};
    use crate::testfn::Bump;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    struct ConstFn(Complex64, usize);
    impl SmoothComplexFn for ConstFn {
        fn dim(&self) -> usize {
            self.1
        }
        fn value(&self, _: &[f64]) -> Complex64 {
            self.0
        }
        fn gradient(&self, _: &[f64]) -> Vec<Complex64> {
            vec![Complex64::new(0.0, 0.0); self.1]
        }
        fn lipschitz_bound(&self) -> f64 {
            0.0
        }
        fn sup_bound(&self) -> f64 {
            self.0.norm()
        }
    }

    fn rule() -> SegmentRule {
        SegmentRule::default()
    }

    #[test]
    fn kernel_mollifier_has_unit_mass() {
        for d in [1usize, 2] {
            let kernel = ExtensionKernel::new(d, 1.0).unwrap();
            // independent composite tensor quadrature of φ over the cube
            let nodes: Vec<(f64, f64)> = SegmentRule::new(24, 6)
                .nodes()
                .iter()
                .map(|&(t, w)| (2.0 * t - 1.0, 2.0 * w))
                .collect();
            let mut total = 0.0;
            match d {
                1 => {
                    for &(z, w) in &nodes {
                        total += w * kernel.phi(&[z]);
                    }
                }
                2 => {
                    for &(z1, w1) in &nodes {
                        for &(z2, w2) in &nodes {
                            total += w1 * w2 * kernel.phi(&[z1, z2]);
                        }
                    }
                }
                _ => unreachable!(),
            }
            assert!((total - 1.0).abs() < 1e-8, "d={d}: {total}");
        }
    }

    #[test]
    fn cutoff_profile_constraints() {
        let beta = 4.0;
        let kernel = ExtensionKernel::new(1, beta).unwrap();
        let a = kernel.a();
        assert!((a - 0.5).abs() < 1e-15);
        assert_eq!(kernel.theta(0.0), 1.0);
        assert_eq!(kernel.theta(0.49 * a), 1.0);
        assert_eq!(kernel.theta(a), 0.0);
        assert_eq!(kernel.theta(1.7 * a), 0.0);
        let mut prev = 1.0;
        let mut max_slope = 0.0f64;
        for k in 0..=400 {
            let t = a * k as f64 / 400.0;
            let v = kernel.theta(t);
            assert!(v <= prev + 1e-12, "θ must be nonincreasing");
            prev = v;
            max_slope = max_slope.max(kernel.theta_prime(t).abs());
        }
        assert!(max_slope * a <= 6.0, "|θ'|·a = {}", max_slope * a);
    }

    #[test]
    fn value_at_t_zero_is_the_datum() {
        let u = Bump::new(vec![0.0], 0.5, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        for x in [-0.3, 0.0, 0.2, 0.8] {
            assert_eq!(ext.value(&[x], 0.0), u.value(&[x]));
        }
    }

    #[test]
    fn constant_datum_is_reproduced_below_half_a() {
        let u = ConstFn(Complex64::new(1.0, 0.0), 1);
        let field = PotentialField::zero(2);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        for t in [0.05, 0.2, 0.45] {
            let v = ext.value(&[0.3], t);
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-8, "t={t}: {v}");
        }
    }

    #[test]
    fn extension_is_linear_in_the_datum() {
        let u1 = Bump::new(vec![0.0], 0.5, false);
        let u2 = Bump::new(vec![0.2], 0.4, false);
        struct Combo<'a>(&'a Bump, &'a Bump, Complex64);
        impl SmoothComplexFn for Combo<'_> {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, p: &[f64]) -> Complex64 {
                self.2 * self.0.value(p) + self.1.value(p)
            }
            fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
                self.0
                    .gradient(p)
                    .into_iter()
                    .zip(self.1.gradient(p))
                    .map(|(a, b)| self.2 * a + b)
                    .collect()
            }
            fn lipschitz_bound(&self) -> f64 {
                self.2.norm() * self.0.lipschitz_bound() + self.1.lipschitz_bound()
            }
            fn sup_bound(&self) -> f64 {
                self.2.norm() * self.0.sup_bound() + self.1.sup_bound()
            }
        }
        let alpha = Complex64::new(1.3, -0.4);
        let combo = Combo(&u1, &u2, alpha);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let e1 = Extension::new(&u1, &field, &kernel, &r).unwrap();
        let e2 = Extension::new(&u2, &field, &kernel, &r).unwrap();
        let ec = Extension::new(&combo, &field, &kernel, &r).unwrap();
        for (x, t) in [(0.1, 0.2), (-0.4, 0.5), (0.3, 0.05)] {
            let direct = ec.value(&[x], t);
            let assembled = alpha * e1.value(&[x], t) + e2.value(&[x], t);
            assert!((direct - assembled).norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_covariance_of_the_extension() {
        let u = Bump::new(vec![0.0], 0.5, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let phi = Polynomial::new(
                2,
                vec![
                    Monomial {
                        powers: vec![1, 0],
                        coeff: rng.gen_range(-1.0..1.0),
                    },
                    Monomial {
                        powers: vec![2, 1],
                        coeff: rng.gen_range(-0.5..0.5),
                    },
                    Monomial {
                        powers: vec![0, 3],
                        coeff: rng.gen_range(-0.5..0.5),
                    },
                ],
            );
            let gauge = GaugeFunction::polynomial(phi.clone());
            let gauged_field = field.gauge_transform(&gauge).unwrap();
            let boundary_gauge = gauge.restrict_to_boundary();
            let gauged_u = crate::testfn::GaugedFn {
                inner: &u,
                gauge: boundary_gauge,
            };
            let base = Extension::new(&u, &field, &kernel, &r).unwrap();
            let turned = Extension::new(&gauged_u, &gauged_field, &kernel, &r).unwrap();
            for (x, t) in [(0.15, 0.3), (-0.2, 0.6), (0.4, 0.1)] {
                let expected =
                    Complex64::from_polar(1.0, -phi.eval(&[x, t])) * base.value(&[x], t);
                let got = turned.value(&[x], t);
                assert!(
                    (got - expected).norm() < 1e-10,
                    "gauge covariance broke: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn covariant_gradient_matches_finite_differences() {
        let u = Bump::new(vec![0.0], 0.6, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let h = 1e-5;
        for (x, t) in [(0.1, 0.25), (-0.3, 0.4), (0.2, 0.66)] {
            let cg = ext.covariant_gradient(&[x], t).unwrap();
            let fd_x = (ext.value(&[x + h], t) - ext.value(&[x - h], t)) / (2.0 * h);
            let fd_t = (ext.value(&[x], t + h) - ext.value(&[x], t - h)) / (2.0 * h);
            let a = field.eval(&[x, t]).unwrap();
            let v = ext.value(&[x], t);
            let expect_x = fd_x + Complex64::i() * a[0] * v;
            let expect_t = fd_t + Complex64::i() * a[1] * v;
            assert!((cg[0] - expect_x).norm() < 1e-7, "x: {} vs {}", cg[0], expect_x);
            assert!((cg[1] - expect_t).norm() < 1e-7, "t: {} vs {}", cg[1], expect_t);
        }
    }

    #[test]
    fn gauge_covariance_of_the_gradient() {
        let u = Bump::new(vec![0.0], 0.5, false);
        let field = PotentialField::landau_halfspace(2, 2.0);
        let kernel = ExtensionKernel::new(1, 2.0).unwrap();
        let r = rule();
        let phi = Polynomial::new(
            2,
            vec![
                Monomial {
                    powers: vec![2, 0],
                    coeff: 0.4,
                },
                Monomial {
                    powers: vec![1, 1],
                    coeff: -0.7,
                },
            ],
        );
        let gauge = GaugeFunction::polynomial(phi.clone());
        let gauged_field = field.gauge_transform(&gauge).unwrap();
        let gauged_u = crate::testfn::GaugedFn {
            inner: &u,
            gauge: gauge.restrict_to_boundary(),
        };
        let base = Extension::new(&u, &field, &kernel, &r).unwrap();
        let turned = Extension::new(&gauged_u, &gauged_field, &kernel, &r).unwrap();
        for (x, t) in [(0.1, 0.3), (-0.25, 0.15)] {
            let g0 = base.covariant_gradient(&[x], t).unwrap();
            let g1 = turned.covariant_gradient(&[x], t).unwrap();
            let rot = Complex64::from_polar(1.0, -phi.eval(&[x, t]));
            for (a, b) in g0.iter().zip(&g1) {
                assert!((rot * a - b).norm() < 1e-11, "{a} vs {b}");
            }
        }
    }

    fn test_halfspace_grid(n: usize, nt: usize, t_max: f64) -> HalfSpaceGrid {
        HalfSpaceGrid::new(
            BoundaryGrid::new(1, 1.0, n).unwrap(),
            t_max,
            nt,
            0.85,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn grid_extension_vanishes_beyond_the_cutoff() {
        let u = Bump::new(vec![0.0], 0.4, false);
        let field = PotentialField::landau_halfspace(2, 4.0);
        let kernel = ExtensionKernel::new(1, 4.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let grid = test_halfspace_grid(16, 24, 1.0);
        let gf = extend_grid(&ext, &grid).unwrap();
        let a = kernel.a();
        for ti in 0..grid.t_nodes.len() {
            if grid.t_nodes[ti] >= a {
                for si in 0..grid.base.len() {
                    assert_eq!(gf.values[grid.flat_index(si, ti)], Complex64::new(0.0, 0.0));
                }
            }
        }
        // and beyond the lateral support radius + a
        for ti in 0..grid.t_nodes.len() {
            for si in 0..grid.base.len() {
                let x = grid.base.point(si);
                if x[0].abs() > 0.4 + a {
                    assert_eq!(gf.values[grid.flat_index(si, ti)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn shallow_grid_is_rejected() {
        let u = Bump::new(vec![0.0], 0.4, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let grid = test_halfspace_grid(16, 16, 0.5);
        assert!(matches!(
            extend_grid(&ext, &grid),
            Err(Error::SlabTooShallow { .. })
        ));
    }

    #[test]
    fn trace_recovers_extended_datum_exactly() {
        let u = Bump::new(vec![0.1], 0.4, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let grid = test_halfspace_grid(24, 20, 1.0);
        let gf = extend_grid(&ext, &grid).unwrap();
        let tr = trace(&gf).unwrap();
        for si in 0..grid.base.len() {
            let x = grid.base.point(si);
            assert!((tr.values[si] - u.value(&x)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_extrapolates_linear_profiles_exactly() {
        // U(x, t) = b(x)(1 + t): two-row extrapolation is exact on linear data
        let grid = test_halfspace_grid(16, 12, 1.0);
        let b = Bump::new(vec![0.0], 0.5, false);
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for ti in 0..grid.t_nodes.len() {
            for si in 0..grid.base.len() {
                let x = grid.base.point(si);
                values[grid.flat_index(si, ti)] =
                    b.value(&x) * (1.0 + grid.t_nodes[ti]);
            }
        }
        let gf = GridFunction::half_space(grid.clone(), values).unwrap();
        let tr = trace(&gf).unwrap();
        for si in 0..grid.base.len() {
            let x = grid.base.point(si);
            assert!((tr.values[si] - b.value(&x)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_of_constant_slab_is_the_constant() {
        let grid = test_halfspace_grid(8, 8, 1.0);
        let c = Complex64::new(0.7, -0.2);
        let gf = GridFunction::half_space(grid.clone(), vec![c; grid.len()]).unwrap();
        let tr = trace(&gf).unwrap();
        for v in &tr.values {
            assert!((v - c).norm() < 1e-14);
        }
    }

    #[test]
    fn trace_flags_discontinuous_data() {
        let grid = test_halfspace_grid(8, 8, 1.0);
        let mut values = vec![Complex64::new(1.0, 0.0); grid.len()];
        for si in 0..grid.base.len() {
            values[grid.flat_index(si, 0)] = Complex64::new(10.0, 0.0);
        }
        let gf = GridFunction::half_space(grid.clone(), values).unwrap();
        assert!(matches!(trace(&gf), Err(Error::DiscontinuousTrace { .. })));
    }

    #[test]
    fn trace_recovery_rate_is_at_least_linear() {
        let u = Bump::new(vec![0.0], 0.5, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let grid = BoundaryGrid::new(1, 1.0, 64).unwrap();
        let ts: Vec<f64> = (0..6).map(|k| 0.2 * 0.5f64.powi(k)).collect();
        let points: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| (t.ln(), boundary_deviation(&ext, &grid, t).ln()))
            .collect();
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope >= 0.9, "recovery rate {slope}");
    }

    #[test]
    fn whole_space_sides_agree_on_the_boundary() {
        let u = Bump::new(vec![0.0], 0.4, false);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let ext = Extension::new(&u, &field, &kernel, &r).unwrap();
        let grid = test_halfspace_grid(24, 16, 1.0);
        let upper = extend_grid(&ext, &grid).unwrap();
        let two = extend_whole_space(&upper, &field, &kernel, &r).unwrap();
        let tr_up = trace(&two.upper).unwrap();
        let tr_low = trace(&two.lower).unwrap();
        for (a, b) in tr_up.values.iter().zip(&tr_low.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn whole_space_of_zero_is_zero() {
        let grid = test_halfspace_grid(8, 8, 2.0);
        let mut zero =
            GridFunction::half_space(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()])
                .unwrap();
        zero.boundary_row = Some(vec![Complex64::new(0.0, 0.0); grid.base.len()]);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let kernel = ExtensionKernel::new(1, 1.0).unwrap();
        let r = rule();
        let two = extend_whole_space(&zero, &field, &kernel, &r).unwrap();
        for v in two.lower.values.iter().chain(&two.upper.values) {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn two_sided_csv_has_side_column() {
        let grid = test_halfspace_grid(8, 8, 1.0);
        let gf = GridFunction::half_space(
            grid.clone(),
            vec![Complex64::new(1.0, 0.0); grid.len()],
        )
        .unwrap();
        let two = reflection_extension(&gf).unwrap();
        let mut buf = Vec::new();
        two.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("side,i,k,re,im"));
        assert!(text.contains("\n+,0,0,"));
        assert!(text.contains("\n-,0,0,"));
    }
}
