//! Chart pull-backs of potentials, the covariant chain rule, and
//! geodesic boundary potentials on round spheres.
//!
//! The pull-back of a covector field under a chart `ψ` is
//! `(ψ*A)(x) = Dψ(x)ᵀ A(ψ(x))`. On a sphere the boundary potential is the
//! line integral of `A` along the minimizing great-circle arc; comparing
//! it with the straight-segment potential of `ψ*A` in the chart isolates
//! the transport defect, cubic in the separation.

use std::sync::Arc;

use num_complex::Complex64;

use crate::field::PotentialField;
use crate::numeric;
use crate::potential::segment_potential;
use crate::quad::SegmentRule;
use crate::testfn::SmoothComplexFn;
use crate::{Error, Result};

/// Anything that evaluates an ambient covector field; lets sphere fields
/// given in spherical components and flat polynomial fields share the
/// pull-back machinery.
pub trait AmbientField: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn eval_ambient(&self, p: &[f64], out: &mut [f64]);
}

impl AmbientField for PotentialField {
    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn eval_ambient(&self, p: &[f64], out: &mut [f64]) {
        self.eval_into(p, out);
    }
}

/// Tangential field on the sphere `|p| = R`, specified in spherical
/// components `A = f_θ e_θ + f_φ e_φ` with `(θ, φ)` polar/azimuthal.
pub struct TangentialField {
    f_theta: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    f_phi: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl TangentialField {
    pub fn new(
        f_theta: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f_phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TangentialField {
            f_theta: Arc::new(f_theta),
            f_phi: Arc::new(f_phi),
        }
    }

    /// Rotationally symmetric azimuthal unit form `c · e_φ`.
    pub fn azimuthal(c: f64) -> Self {
        Self::new(|_, _| 0.0, move |_, _| c)
    }
}

impl AmbientField for TangentialField {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn eval_ambient(&self, p: &[f64], out: &mut [f64]) {
        let r = numeric::norm(p);
        let theta = (p[2] / r).clamp(-1.0, 1.0).acos();
        let phi = p[1].atan2(p[0]);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let e_theta = [ct * cp, ct * sp, -st];
        let e_phi = [-sp, cp, 0.0];
        let ft = (self.f_theta)(theta, phi);
        let fp = (self.f_phi)(theta, phi);
        for k in 0..3 {
            out[k] = ft * e_theta[k] + fp * e_phi[k];
        }
    }
}

/// Ambient rotation field `A(p) = c·(−p₂, p₁, 0)`, tangential on every
/// sphere about the origin, smooth at the poles, with `dA ≠ 0`.
pub struct RotorField {
    pub strength: f64,
}

impl AmbientField for RotorField {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn eval_ambient(&self, p: &[f64], out: &mut [f64]) {
        out[0] = -self.strength * p[1];
        out[1] = self.strength * p[0];
        out[2] = 0.0;
    }
}

type ForwardFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type DifferentialFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// A chart with its differential. Flat diffeomorphisms map `ℝ^m → ℝ^m`;
/// sphere and circle charts parametrize caps of the round boundary.
pub enum ChartMap {
    Flat {
        dim: usize,
        forward: ForwardFn,
        /// `differential(x)[i][j] = ∂ψ_i/∂x_j` (ambient row, chart column).
        differential: DifferentialFn,
    },
    /// Stereographic projection from the south pole of the sphere of the
    /// given radius, restricted to the cap `|w| ≤ radius·cap` (the default
    /// cap 1/√3 is the geodesic ball of angular radius π/3).
    StereographicSphere { radius: f64, cap: f64 },
    /// Angle chart `θ ↦ R(cos θ, sin θ)` on `|θ| < 2π/3`.
    Circle { radius: f64 },
}

impl ChartMap {
    pub fn flat(
        dim: usize,
        forward: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        differential: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        ChartMap::Flat {
            dim,
            forward: Arc::new(forward),
            differential: Arc::new(differential),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::flat(
            dim,
            |x| x.to_vec(),
            move |x| {
                let m = x.len();
                (0..m)
                    .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect()
            },
        )
    }

    pub fn sphere(radius: f64) -> Self {
        ChartMap::StereographicSphere {
            radius,
            cap: 1.0 / 3f64.sqrt(),
        }
    }

    pub fn chart_dim(&self) -> usize {
        match self {
            ChartMap::Flat { dim, .. } => *dim,
            ChartMap::StereographicSphere { .. } => 2,
            ChartMap::Circle { .. } => 1,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ChartMap::Flat { dim, .. } => *dim,
            ChartMap::StereographicSphere { .. } => 3,
            ChartMap::Circle { .. } => 2,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self {
            ChartMap::Flat { .. } => f64::INFINITY,
            ChartMap::StereographicSphere { radius, .. } | ChartMap::Circle { radius } => {
                std::f64::consts::PI * radius
            }
        }
    }

    pub fn check_domain(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.chart_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.chart_dim(),
                got: w.len(),
            });
        }
        let ok = match self {
            ChartMap::Flat { .. } => true,
            ChartMap::StereographicSphere { radius, cap } => {
                numeric::norm(w) <= radius * cap * (1.0 + 1e-12)
            }
            ChartMap::Circle { .. } => w[0].abs() < 2.0 * std::f64::consts::FRAC_PI_3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ChartDomain)
        }
    }

    pub fn forward(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(w)?;
        Ok(match self {
            ChartMap::Flat { forward, .. } => forward(w),
            ChartMap::StereographicSphere { radius, .. } => {
                let v1 = w[0] / radius;
                let v2 = w[1] / radius;
                let den = 1.0 + v1 * v1 + v2 * v2;
                vec![
                    radius * 2.0 * v1 / den,
                    radius * 2.0 * v2 / den,
                    radius * (2.0 - den) / den,
                ]
            }
            ChartMap::Circle { radius } => vec![radius * w[0].cos(), radius * w[0].sin()],
        })
    }

    /// Differential `Dψ(w)` as an `ambient × chart` matrix.
    pub fn differential(&self, w: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_domain(w)?;
        Ok(match self {
            ChartMap::Flat { differential, .. } => differential(w),
            ChartMap::StereographicSphere { radius, .. } => {
                let v1 = w[0] / radius;
                let v2 = w[1] / radius;
                let den = 1.0 + v1 * v1 + v2 * v2;
                let d2 = den * den;
                vec![
                    vec![2.0 * (1.0 + v2 * v2 - v1 * v1) / d2, -4.0 * v1 * v2 / d2],
                    vec![-4.0 * v1 * v2 / d2, 2.0 * (1.0 + v1 * v1 - v2 * v2) / d2],
                    vec![-4.0 * v1 / d2, -4.0 * v2 / d2],
                ]
            }
            ChartMap::Circle { radius } => {
                vec![vec![-radius * w[0].sin()], vec![radius * w[0].cos()]]
            }
        })
    }
}

/// `(ψ*A)(x) = Dψ(x)ᵀ A(ψ(x))` as a potential field on the chart domain.
///
/// The differential is evaluated per call, so the result has no analytic
/// jacobian; exterior derivatives fall back to finite differences.
pub fn pullback_potential(
    chart: &ChartMap,
    field: Arc<dyn AmbientField>,
) -> Result<PotentialField> {
    if field.ambient_dim() != chart.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: chart.ambient_dim(),
            got: field.ambient_dim(),
        });
    }
    let chart_dim = chart.chart_dim();
    let ambient_dim = chart.ambient_dim();
    let chart = match chart {
        ChartMap::Flat {
            dim,
            forward,
            differential,
        } => ChartMap::Flat {
            dim: *dim,
            forward: forward.clone(),
            differential: differential.clone(),
        },
        ChartMap::StereographicSphere { radius, cap } => ChartMap::StereographicSphere {
            radius: *radius,
            cap: *cap,
        },
        ChartMap::Circle { radius } => ChartMap::Circle { radius: *radius },
    };
    Ok(PotentialField::custom(
        chart_dim,
        move |w, out| {
            let p = chart.forward(w).expect("pull-back point in chart domain");
            let dpsi = chart.differential(w).expect("differential in domain");
            let mut a = vec![0.0; ambient_dim];
            field.eval_ambient(&p, &mut a);
            for j in 0..chart_dim {
                let mut acc = 0.0;
                for i in 0..ambient_dim {
                    acc += dpsi[i][j] * a[i];
                }
                out[j] = acc;
            }
        },
        None,
    ))
}

/// Residual of the covariant chain rule on a flat chart:
/// `|∇_{ψ*A}(U∘ψ)(x) − Dψ(x)ᵀ[(∇_A U)(ψ(x))]|`, the left side by central
/// differences at step `h`, decaying at O(h²).
pub fn chain_rule_residual(
    chart: &ChartMap,
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    if !matches!(chart, ChartMap::Flat { .. }) {
        return Err(Error::invalid("chart", "chain rule check runs on flat charts"));
    }
    let m = chart.chart_dim();
    let field_arc: Arc<dyn AmbientField> = Arc::new(field.clone());
    let pulled = pullback_potential(chart, field_arc)?;
    let value_at = |w: &[f64]| -> Result<Complex64> { Ok(u.value(&chart.forward(w)?)) };

    let a_pulled = pulled.eval(x)?;
    let v = value_at(x)?;
    let mut lhs = Vec::with_capacity(m);
    for k in 0..m {
        let mut wp = x.to_vec();
        let mut wm = x.to_vec();
        wp[k] += h;
        wm[k] -= h;
        let grad = (value_at(&wp)? - value_at(&wm)?) / (2.0 * h);
        lhs.push(grad + Complex64::i() * a_pulled[k] * v);
    }

    let p = chart.forward(x)?;
    let cov = crate::norms::covariant_gradient(field, u, &p)?;
    let dpsi = chart.differential(x)?;
    let mut resid2 = 0.0;
    for j in 0..m {
        let mut rhs = Complex64::new(0.0, 0.0);
        for i in 0..field.dim() {
            rhs += dpsi[i][j] * cov[i];
        }
        resid2 += (lhs[j] - rhs).norm_sqr();
    }
    Ok(resid2.sqrt())
}

/// Line integral of an ambient field along the minimizing great-circle
/// arc between two points of the round boundary (sphere or circle).
pub fn geodesic_potential(
    field: &dyn AmbientField,
    radius: f64,
    from: &[f64],
    to: &[f64],
    rule: &SegmentRule,
) -> Result<f64> {
    let m = field.ambient_dim();
    if from.len() != m || to.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: from.len(),
        });
    }
    let xu: Vec<f64> = from.iter().map(|v| v / radius).collect();
    let yu: Vec<f64> = to.iter().map(|v| v / radius).collect();
    let cosa = numeric::dot(&xu, &yu).clamp(-1.0, 1.0);
    let alpha = cosa.acos();
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if alpha >= std::f64::consts::PI * (1.0 - 1e-9) {
        return Err(Error::AntipodalPoints);
    }
    let sina = alpha.sin();
    let mut gamma = vec![0.0; m];
    let mut speed = vec![0.0; m];
    let mut a = vec![0.0; m];
    let mut acc = numeric::KahanSum::new();
    for &(t, w) in rule.nodes() {
        let c0 = ((1.0 - t) * alpha).sin() / sina;
        let c1 = (t * alpha).sin() / sina;
        let d0 = -alpha * ((1.0 - t) * alpha).cos() / sina;
        let d1 = alpha * (t * alpha).cos() / sina;
        for k in 0..m {
            gamma[k] = radius * (c0 * xu[k] + c1 * yu[k]);
            speed[k] = radius * (d0 * xu[k] + d1 * yu[k]);
        }
        field.eval_ambient(&gamma, &mut a);
        acc.add(w * numeric::dot(&a, &speed));
    }
    Ok(acc.value())
}

/// `|I_{ψ*A}(x, y) − I^{geo}_A(ψx, ψy)|`: the straight-segment potential
/// of the pulled-back field in the chart against the geodesic boundary
/// potential on the manifold.
pub fn transport_gap(
    chart: &ChartMap,
    field: Arc<dyn AmbientField>,
    x: &[f64],
    y: &[f64],
    rule: &SegmentRule,
) -> Result<f64> {
    let radius = match chart {
        ChartMap::StereographicSphere { radius, .. } | ChartMap::Circle { radius } => *radius,
        ChartMap::Flat { .. } => {
            return Err(Error::invalid("chart", "transport gap compares round charts"))
        }
    };
    chart.check_domain(x)?;
    chart.check_domain(y)?;
    let px = chart.forward(x)?;
    let py = chart.forward(y)?;
    // enforce the injectivity bound on the geodesic side
    let cosa = (numeric::dot(&px, &py) / (radius * radius)).clamp(-1.0, 1.0);
    if radius * cosa.acos() >= chart.injectivity_radius() * (1.0 - 1e-9) {
        return Err(Error::AntipodalPoints);
    }
    let pulled = pullback_potential(chart, field.clone())?;
    let chart_side = segment_potential(&pulled, x, y, rule);
    let geo_side = geodesic_potential(field.as_ref(), radius, &px, &py, rule)?;
    Ok((chart_side - geo_side).abs())
}
