//! Vector potentials, exterior derivatives, and gauge transformations.
//!
//! A potential is a covector field `A` on `ℝ^m`. Polynomial components are
//! kept as coefficient tables so the exterior derivative `dA` is exact and
//! the degree needed for exact quadrature is known; arbitrary smooth fields
//! go through the `custom` constructor and fall back to central finite
//! differences for `dA`.

use std::sync::Arc;

use crate::numeric::{self, WorkBox};
use crate::poly::Polynomial;
use crate::{Error, Result};

/// Default finite-difference step factor relative to the box diameter.
pub const FD_STEP_FACTOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Zero,
    Constant,
    Landau,
    Polynomial,
    Custom,
}

type VecFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

enum Components {
    Poly {
        comps: Vec<Polynomial>,
        /// jac[i][j] = ∂_i A_j, precomputed once.
        jac: Vec<Vec<Polynomial>>,
    },
    Custom {
        eval: VecFn,
        /// Optional analytic jacobian writing ∂_i A_j into out[i][j].
        jacobian: Option<JacobianFn>,
    },
}

/// A magnetic vector potential on `ℝ^m`.
pub struct PotentialField {
    dim: usize,
    kind: FieldKind,
    components: Components,
}

impl std::fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialField")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Clone for PotentialField {
    fn clone(&self) -> Self {
        let components = match &self.components {
            Components::Poly { comps, jac } => Components::Poly {
                comps: comps.clone(),
                jac: jac.clone(),
            },
            Components::Custom { eval, jacobian } => Components::Custom {
                eval: eval.clone(),
                jacobian: jacobian.clone(),
            },
        };
        PotentialField {
            dim: self.dim,
            kind: self.kind,
            components,
        }
    }
}

impl PotentialField {
    fn from_polys(kind: FieldKind, comps: Vec<Polynomial>) -> Self {
        let dim = comps.len();
        let jac = (0..dim)
            .map(|i| (0..dim).map(|j| comps[j].partial(i)).collect())
            .collect();
        PotentialField {
            dim,
            kind,
            components: Components::Poly { comps, jac },
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_polys(FieldKind::Zero, (0..dim).map(|_| Polynomial::zero(dim)).collect())
    }

    pub fn constant(values: Vec<f64>) -> Self {
        let dim = values.len();
        Self::from_polys(
            FieldKind::Constant,
            values
                .into_iter()
                .map(|c| Polynomial::constant(dim, c))
                .collect(),
        )
    }

    /// Landau gauge with the flux attached to the first two coordinates:
    /// `A(x) = β·(0, x₁, 0, …)`, so `dA` has the single entry
    /// `(1,2) = β`. Natural on boundary grids where `dA^∥ ≠ 0` is wanted.
    pub fn landau_boundary(dim: usize, beta: f64) -> Self {
        assert!(dim >= 2, "Landau gauge needs at least two coordinates");
        let mut comps: Vec<Polynomial> = (0..dim).map(|_| Polynomial::zero(dim)).collect();
        comps[1] = Polynomial::linear(dim, 0, beta);
        Self::from_polys(FieldKind::Landau, comps)
    }

    /// Landau gauge leaning on the last (normal) coordinate:
    /// `A(x, t) = (−β t, 0, …, 0)`, odd in `t`, with `dA[e₁, e_m] = β`.
    /// Its boundary restriction `A^∥` vanishes identically.
    pub fn landau_halfspace(dim: usize, beta: f64) -> Self {
        assert!(dim >= 2);
        let mut comps: Vec<Polynomial> = (0..dim).map(|_| Polynomial::zero(dim)).collect();
        comps[0] = Polynomial::linear(dim, dim - 1, -beta);
        Self::from_polys(FieldKind::Landau, comps)
    }

    pub fn polynomial(comps: Vec<Polynomial>) -> Self {
        assert!(!comps.is_empty());
        let dim = comps[0].dim();
        assert!(comps.iter().all(|p| p.dim() == dim));
        assert_eq!(comps.len(), dim, "one component per coordinate");
        Self::from_polys(FieldKind::Polynomial, comps)
    }

    pub fn custom(
        dim: usize,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: Option<JacobianFn>,
    ) -> Self {
        PotentialField {
            dim,
            kind: FieldKind::Custom,
            components: Components::Custom {
                eval: Arc::new(eval),
                jacobian,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Largest polynomial degree across components; `None` for custom fields.
    pub fn degree(&self) -> Option<u32> {
        match &self.components {
            Components::Poly { comps, .. } => {
                Some(comps.iter().map(|p| p.degree()).max().unwrap_or(0))
            }
            Components::Custom { .. } => None,
        }
    }

    pub fn check_dim(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        Ok(())
    }

    /// `A(point)` written into `out` (no allocation).
    pub fn eval_into(&self, point: &[f64], out: &mut [f64]) {
        debug_assert_eq!(point.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.components {
            Components::Poly { comps, .. } => {
                for (o, c) in out.iter_mut().zip(comps) {
                    *o = c.eval(point);
                }
            }
            Components::Custom { eval, .. } => eval(point, out),
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(point)?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(point, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(out)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        match &self.components {
            Components::Poly { .. } => true,
            Components::Custom { jacobian, .. } => jacobian.is_some(),
        }
    }

    /// Jacobian entries `J[i][j] = ∂_i A_j`; finite differences with step
    /// `h` when no analytic jacobian is available.
    pub fn jacobian(&self, point: &[f64], h: f64) -> Vec<Vec<f64>> {
        match &self.components {
            Components::Poly { jac, .. } => jac
                .iter()
                .map(|row| row.iter().map(|p| p.eval(point)).collect())
                .collect(),
            Components::Custom { eval, jacobian } => {
                if let Some(j) = jacobian {
                    return j(point);
                }
                let m = self.dim;
                let mut out = vec![vec![0.0; m]; m];
                let mut plus = vec![0.0; m];
                let mut minus = vec![0.0; m];
                let mut p = point.to_vec();
                for i in 0..m {
                    let orig = p[i];
                    p[i] = orig + h;
                    eval(&p, &mut plus);
                    p[i] = orig - h;
                    eval(&p, &mut minus);
                    p[i] = orig;
                    for j in 0..m {
                        out[i][j] = (plus[j] - minus[j]) / (2.0 * h);
                    }
                }
                out
            }
        }
    }

    /// Exterior derivative `dA` at `point`:
    /// `components[i][j] = ∂_i A_j − ∂_j A_i`. Analytic when the field has
    /// a jacobian, otherwise central differences at step `h`.
    pub fn exterior_derivative(&self, point: &[f64], h: f64) -> Result<TwoForm> {
        self.check_dim(point)?;
        let jac = self.jacobian(point, h);
        if jac.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(TwoForm::from_jacobian(&jac))
    }

    /// `A ↦ A + ∇Φ`. Polynomial gauges on polynomial fields stay
    /// polynomial; anything else becomes a custom field.
    pub fn gauge_transform(&self, gauge: &GaugeFunction) -> Result<PotentialField> {
        if gauge.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: gauge.dim(),
            });
        }
        match (&self.components, &gauge.repr) {
            (Components::Poly { comps, .. }, GaugeRepr::Poly(phi)) => {
                let grad = phi.gradient();
                let new = comps
                    .iter()
                    .zip(grad)
                    .map(|(a, g)| a.add(&g))
                    .collect();
                Ok(PotentialField::from_polys(FieldKind::Polynomial, new))
            }
            _ => {
                let base = self.clone();
                let gauge = gauge.clone();
                let dim = self.dim;
                Ok(PotentialField::custom(
                    dim,
                    move |p, out| {
                        base.eval_into(p, out);
                        let g = gauge.gradient(p);
                        for (o, gi) in out.iter_mut().zip(g) {
                            *o += gi;
                        }
                    },
                    None,
                ))
            }
        }
    }

    /// `sup` over a sample lattice of the max-entry norm of `dA`; a lower
    /// bound for the true sup, monotone for nested lattices.
    pub fn sup_norm_da(&self, work: &WorkBox, samples_per_axis: usize) -> Result<f64> {
        if samples_per_axis < 2 {
            return Err(Error::invalid("samples", "need at least 2 per axis"));
        }
        let h = FD_STEP_FACTOR * work.diameter();
        let mut max = 0.0f64;
        for p in work.lattice(samples_per_axis) {
            let da = self.exterior_derivative(&p, h)?;
            max = max.max(da.max_norm());
        }
        Ok(max)
    }

    /// `sup` over a sample lattice of the euclidean norm `|A(x)|`.
    pub fn sup_component_norm(&self, work: &WorkBox, samples_per_axis: usize) -> f64 {
        let mut out = vec![0.0; self.dim];
        let mut max = 0.0f64;
        for p in work.lattice(samples_per_axis.max(2)) {
            self.eval_into(&p, &mut out);
            max = max.max(numeric::norm(&out));
        }
        max
    }

    /// Boundary restriction `A^∥(x) = (A₁, …, A_d)(x, 0)` of a field on
    /// `ℝ^{d+1}`, as a field on `ℝ^d`.
    pub fn restrict_to_boundary(&self) -> PotentialField {
        assert!(self.dim >= 2);
        let d = self.dim - 1;
        match &self.components {
            Components::Poly { comps, .. } => {
                let restricted = comps[..d]
                    .iter()
                    .map(restrict_poly_last_zero)
                    .collect();
                PotentialField::from_polys(self.kind, restricted)
            }
            Components::Custom { eval, .. } => {
                let eval = eval.clone();
                let m = self.dim;
                PotentialField::custom(
                    d,
                    move |x, out| {
                        let mut full = vec![0.0; m];
                        let mut point = x.to_vec();
                        point.push(0.0);
                        eval(&point, &mut full);
                        out.copy_from_slice(&full[..d]);
                    },
                    None,
                )
            }
        }
    }

    /// Pull-back under the reflection `(x, t) ↦ (x, −t)`:
    /// `B(x, t) = (A₁, …, A_d, −A_{d+1})(x, −t)`. Used to run the
    /// extension machinery on the lower half-space.
    pub fn reflect_normal(&self) -> PotentialField {
        let m = self.dim;
        match &self.components {
            Components::Poly { comps, .. } => {
                let mut out: Vec<Polynomial> =
                    comps.iter().map(|p| p.reflect_axis(m - 1)).collect();
                out[m - 1] = out[m - 1].scale(-1.0);
                PotentialField::from_polys(
                    if self.kind == FieldKind::Zero {
                        FieldKind::Zero
                    } else {
                        FieldKind::Polynomial
                    },
                    out,
                )
            }
            Components::Custom { eval, .. } => {
                let eval = eval.clone();
                PotentialField::custom(
                    m,
                    move |p, out| {
                        let mut q = p.to_vec();
                        q[m - 1] = -q[m - 1];
                        eval(&q, out);
                        out[m - 1] = -out[m - 1];
                    },
                    None,
                )
            }
        }
    }

    /// Check by sampling that `dA` is constant over the box; returns the
    /// constant form or an error carrying the observed deviation.
    pub fn constant_curvature(&self, work: &WorkBox, samples_per_axis: usize) -> Result<TwoForm> {
        let h = FD_STEP_FACTOR * work.diameter();
        let lattice = work.lattice(samples_per_axis.max(3));
        let reference = self.exterior_derivative(&lattice[0], h)?;
        let scale = reference.max_norm().max(1.0);
        let mut deviation = 0.0f64;
        for p in &lattice[1..] {
            let da = self.exterior_derivative(p, h)?;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    deviation =
                        deviation.max((da.components[i][j] - reference.components[i][j]).abs());
                }
            }
        }
        let tol = if self.has_analytic_jacobian() {
            1e-9
        } else {
            1e-5
        };
        if deviation > tol * scale {
            return Err(Error::NonConstantCurvature { deviation });
        }
        Ok(reference)
    }
}

fn restrict_poly_last_zero(p: &Polynomial) -> Polynomial {
    let d = p.dim() - 1;
    let terms = p
        .terms()
        .iter()
        .filter(|t| t.powers[d] == 0)
        .map(|t| crate::poly::Monomial {
            powers: t.powers[..d].to_vec(),
            coeff: t.coeff,
        })
        .collect();
    Polynomial::new(d, terms)
}

/// Antisymmetric matrix of a 2-form, `components[i][j] = ∂_i A_j − ∂_j A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    pub components: Vec<Vec<f64>>,
}

impl TwoForm {
    pub fn from_jacobian(jac: &[Vec<f64>]) -> Self {
        let m = jac.len();
        let mut components = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                components[i][j] = jac[i][j] - jac[j][i];
            }
        }
        TwoForm { components }
    }

    pub fn zero(dim: usize) -> Self {
        TwoForm {
            components: vec![vec![0.0; dim]; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `dA[u, v] = Σ_{ij} M_{ij} u_i v_j`.
    pub fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.components.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                acc += m * u[i] * v[j];
            }
        }
        acc
    }

    /// Max-entry norm of the antisymmetric matrix.
    pub fn max_norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum GaugeRepr {
    Poly(Polynomial),
    Custom {
        eval: ScalarFn,
        gradient: GradientFn,
    },
}

/// A real phase `Φ` with its gradient, defining `A ↦ A + ∇Φ`,
/// `U ↦ e^{−iΦ} U`.
#[derive(Clone)]
pub struct GaugeFunction {
    dim: usize,
    repr: GaugeRepr,
}

impl GaugeFunction {
    pub fn polynomial(phi: Polynomial) -> Self {
        GaugeFunction {
            dim: phi.dim(),
            repr: GaugeRepr::Poly(phi),
        }
    }

    pub fn custom(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        GaugeFunction {
            dim,
            repr: GaugeRepr::Custom {
                eval: Arc::new(eval),
                gradient: Arc::new(gradient),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        match &self.repr {
            GaugeRepr::Poly(p) => p.eval(point),
            GaugeRepr::Custom { eval, .. } => eval(point),
        }
    }

    pub fn gradient(&self, point: &[f64]) -> Vec<f64> {
        match &self.repr {
            GaugeRepr::Poly(p) => p.gradient().iter().map(|g| g.eval(point)).collect(),
            GaugeRepr::Custom { gradient, .. } => gradient(point),
        }
    }

    pub fn polynomial_degree(&self) -> Option<u32> {
        match &self.repr {
            GaugeRepr::Poly(p) => Some(p.degree()),
            GaugeRepr::Custom { .. } => None,
        }
    }

    /// Boundary restriction `Φ(·, 0)` of a gauge on `ℝ^{d+1}`.
    pub fn restrict_to_boundary(&self) -> GaugeFunction {
        match &self.repr {
            GaugeRepr::Poly(p) => GaugeFunction::polynomial(restrict_poly_last_zero(p)),
            GaugeRepr::Custom { eval, gradient } => {
                let (e, g) = (eval.clone(), gradient.clone());
                let d = self.dim - 1;
                GaugeFunction::custom(
                    d,
                    move |x| {
                        let mut p = x.to_vec();
                        p.push(0.0);
                        e(&p)
                    },
                    move |x| {
                        let mut p = x.to_vec();
                        p.push(0.0);
                        g(&p)[..d].to_vec()
                    },
                )
            }
        }
    }
}

impl std::fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugeFunction").field("dim", &self.dim).finish()
    }
}
