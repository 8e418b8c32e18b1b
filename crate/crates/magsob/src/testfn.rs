//! Smooth compactly-supported test functions with analytic gradients.
//!
//! Seminorm and extension code evaluates these analytically at quadrature
//! nodes; grids only enter when a computation is explicitly sample-based.

use num_complex::Complex64;

use crate::quad::SegmentRule;

/// A smooth complex function on `ℝ^m` with an analytic gradient.
pub trait SmoothComplexFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, p: &[f64]) -> Complex64;
    fn gradient(&self, p: &[f64]) -> Vec<Complex64>;

    /// Support ball `(center, radius)` when compactly supported.
    fn support(&self) -> Option<(Vec<f64>, f64)> {
        None
    }

    /// Upper bound for `sup |∇f|`.
    fn lipschitz_bound(&self) -> f64;

    /// Upper bound for `sup |f|`.
    fn sup_bound(&self) -> f64;
}

/// Radial profile `exp(−1/(1 − s²))` on `|s| < 1`, zero outside.
pub fn bump_profile(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

/// `d/d(s²)` of the profile: `−profile/(1 − s²)²`.
fn bump_profile_ds2(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s2;
        -(-1.0 / q).exp() / (q * q)
    }
}

/// `∫_{|z| < 1} exp(−1/(1 − |z|²)) dz` in dimension `d`.
pub fn bump_unit_mass(d: usize) -> f64 {
    let rule = SegmentRule::new(48, 6);
    match d {
        1 => 2.0 * rule.integrate(|r| bump_profile(r * r)),
        2 => std::f64::consts::TAU * rule.integrate(|r| r * bump_profile(r * r)),
        _ => panic!("bump mass only tabulated for d = 1, 2"),
    }
}

/// The standard smooth bump
/// `b(x) = c · exp(−1/(1 − |x − center|²/radius²))` on its support ball.
#[derive(Debug, Clone)]
pub struct Bump {
    center: Vec<f64>,
    radius: f64,
    amplitude: f64,
    lipschitz: f64,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64, normalized: bool) -> Self {
        assert!(radius > 0.0);
        let d = center.len();
        let amplitude = if normalized {
            1.0 / (radius.powi(d as i32) * bump_unit_mass(d))
        } else {
            1.0
        };
        // sup |∇b| over a fine radial grid; the profile is radial so a 1-D
        // scan is exact up to grid resolution, padded by 1%.
        let mut max_slope = 0.0f64;
        for k in 1..20_000 {
            let s = k as f64 / 20_000.0;
            let slope = (2.0 * s / radius) * bump_profile_ds2(s * s).abs();
            max_slope = max_slope.max(slope);
        }
        Bump {
            center,
            radius,
            amplitude,
            lipschitz: amplitude * max_slope * 1.01,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn real_value(&self, p: &[f64]) -> f64 {
        let s2 = crate::numeric::dist(p, &self.center).powi(2) / (self.radius * self.radius);
        self.amplitude * bump_profile(s2)
    }

    pub fn real_gradient(&self, p: &[f64]) -> Vec<f64> {
        let r2 = self.radius * self.radius;
        let s2 = crate::numeric::dist(p, &self.center).powi(2) / r2;
        let dprof = bump_profile_ds2(s2);
        p.iter()
            .zip(&self.center)
            .map(|(x, c)| self.amplitude * dprof * 2.0 * (x - c) / r2)
            .collect()
    }
}

impl SmoothComplexFn for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        Complex64::new(self.real_value(p), 0.0)
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        self.real_gradient(p)
            .into_iter()
            .map(|g| Complex64::new(g, 0.0))
            .collect()
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        Some((self.center.clone(), self.radius))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    fn sup_bound(&self) -> f64 {
        self.amplitude * (-1.0f64).exp()
    }
}

/// `bump(x) · e^{i k·x}`.
#[derive(Debug, Clone)]
pub struct ModulatedBump {
    bump: Bump,
    wavevector: Vec<f64>,
}

impl ModulatedBump {
    pub fn new(center: Vec<f64>, radius: f64, wavevector: Vec<f64>, normalized: bool) -> Self {
        assert_eq!(center.len(), wavevector.len());
        ModulatedBump {
            bump: Bump::new(center, radius, normalized),
            wavevector,
        }
    }
}

impl SmoothComplexFn for ModulatedBump {
    fn dim(&self) -> usize {
        self.bump.dim()
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        let phase = crate::numeric::dot(&self.wavevector, p);
        Complex64::from_polar(self.bump.real_value(p), phase)
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let phase = crate::numeric::dot(&self.wavevector, p);
        let rot = Complex64::from_polar(1.0, phase);
        let b = self.bump.real_value(p);
        let gb = self.bump.real_gradient(p);
        gb.iter()
            .zip(&self.wavevector)
            .map(|(g, k)| rot * (Complex64::new(*g, 0.0) + Complex64::i() * k * b))
            .collect()
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        self.bump.support()
    }

    fn lipschitz_bound(&self) -> f64 {
        self.bump.lipschitz_bound()
            + crate::numeric::norm(&self.wavevector) * self.bump.sup_bound()
    }

    fn sup_bound(&self) -> f64 {
        self.bump.sup_bound()
    }
}

/// `amplitude · exp(−|x − center|²/width²)`, not compactly supported.
#[derive(Debug, Clone)]
pub struct Gaussian {
    center: Vec<f64>,
    width: f64,
    amplitude: Complex64,
}

impl Gaussian {
    pub fn new(center: Vec<f64>, width: f64, amplitude: Complex64) -> Self {
        assert!(width > 0.0);
        Gaussian {
            center,
            width,
            amplitude,
        }
    }
}

impl SmoothComplexFn for Gaussian {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        let r2 = crate::numeric::dist(p, &self.center).powi(2);
        self.amplitude * (-r2 / (self.width * self.width)).exp()
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let v = self.value(p);
        p.iter()
            .zip(&self.center)
            .map(|(x, c)| v * (-2.0 * (x - c) / (self.width * self.width)))
            .collect()
    }

    fn lipschitz_bound(&self) -> f64 {
        // max of |g'| = amp·√(2/e)/width for the 1-D profile
        self.amplitude.norm() * (2.0f64 / std::f64::consts::E).sqrt() / self.width
    }

    fn sup_bound(&self) -> f64 {
        self.amplitude.norm()
    }
}

/// `e^{−i a·x}`, the zero mode of the constant field `A = a`.
#[derive(Debug, Clone)]
pub struct PlaneWave {
    wavevector: Vec<f64>,
}

impl PlaneWave {
    pub fn new(wavevector: Vec<f64>) -> Self {
        PlaneWave { wavevector }
    }
}

impl SmoothComplexFn for PlaneWave {
    fn dim(&self) -> usize {
        self.wavevector.len()
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, -crate::numeric::dot(&self.wavevector, p))
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let v = self.value(p);
        self.wavevector
            .iter()
            .map(|a| -Complex64::i() * a * v)
            .collect()
    }

    fn lipschitz_bound(&self) -> f64 {
        crate::numeric::norm(&self.wavevector)
    }

    fn sup_bound(&self) -> f64 {
        1.0
    }
}

/// Half-space product `U(x, t) = u(x) · c(t)` with the smooth ramp
/// `c(t) = e · exp(−1/(1 − (t/τ)²))` on `|t| < τ`, normalized so `c(0) = 1`.
pub struct HalfSpaceProduct<B: SmoothComplexFn> {
    boundary: B,
    t_extent: f64,
}

impl<B: SmoothComplexFn> HalfSpaceProduct<B> {
    pub fn new(boundary: B, t_extent: f64) -> Self {
        assert!(t_extent > 0.0);
        HalfSpaceProduct { boundary, t_extent }
    }

    fn ramp(&self, t: f64) -> f64 {
        std::f64::consts::E * bump_profile((t / self.t_extent).powi(2))
    }

    fn ramp_derivative(&self, t: f64) -> f64 {
        let tau2 = self.t_extent * self.t_extent;
        std::f64::consts::E * bump_profile_ds2(t * t / tau2) * 2.0 * t / tau2
    }

    pub fn boundary(&self) -> &B {
        &self.boundary
    }
}

impl<B: SmoothComplexFn> SmoothComplexFn for HalfSpaceProduct<B> {
    fn dim(&self) -> usize {
        self.boundary.dim() + 1
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        let d = self.boundary.dim();
        self.boundary.value(&p[..d]) * self.ramp(p[d])
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let d = self.boundary.dim();
        let c = self.ramp(p[d]);
        let mut g: Vec<Complex64> = self
            .boundary
            .gradient(&p[..d])
            .into_iter()
            .map(|v| v * c)
            .collect();
        g.push(self.boundary.value(&p[..d]) * self.ramp_derivative(p[d]));
        g
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        self.boundary.support().map(|(mut c, r)| {
            c.push(0.0);
            (c, (r * r + self.t_extent * self.t_extent).sqrt())
        })
    }

    fn lipschitz_bound(&self) -> f64 {
        // e·max|profile'| / τ for the ramp factor
        self.boundary.lipschitz_bound()
            + self.boundary.sup_bound() * std::f64::consts::E * 1.1 / self.t_extent
    }

    fn sup_bound(&self) -> f64 {
        self.boundary.sup_bound()
    }
}

/// Config-facing test-function dispatch.
pub enum TestFunction {
    Bump(Bump),
    Modulated(ModulatedBump),
    Gaussian(Gaussian),
}

impl SmoothComplexFn for TestFunction {
    fn dim(&self) -> usize {
        match self {
            TestFunction::Bump(b) => b.dim(),
            TestFunction::Modulated(m) => m.dim(),
            TestFunction::Gaussian(g) => g.dim(),
        }
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        match self {
            TestFunction::Bump(b) => b.value(p),
            TestFunction::Modulated(m) => m.value(p),
            TestFunction::Gaussian(g) => g.value(p),
        }
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        match self {
            TestFunction::Bump(b) => b.gradient(p),
            TestFunction::Modulated(m) => m.gradient(p),
            TestFunction::Gaussian(g) => g.gradient(p),
        }
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            TestFunction::Bump(b) => b.support(),
            TestFunction::Modulated(m) => m.support(),
            TestFunction::Gaussian(g) => g.support(),
        }
    }

    fn lipschitz_bound(&self) -> f64 {
        match self {
            TestFunction::Bump(b) => b.lipschitz_bound(),
            TestFunction::Modulated(m) => m.lipschitz_bound(),
            TestFunction::Gaussian(g) => g.lipschitz_bound(),
        }
    }

    fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Bump(b) => b.sup_bound(),
            TestFunction::Modulated(m) => m.sup_bound(),
            TestFunction::Gaussian(g) => g.sup_bound(),
        }
    }
}

/// Gauge-pair data `e^{−iΦ(·)} u`, used everywhere gauge invariance is
/// exercised.
pub struct GaugedFn<'a> {
    pub inner: &'a dyn SmoothComplexFn,
    pub gauge: crate::field::GaugeFunction,
}

impl SmoothComplexFn for GaugedFn<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, -self.gauge.eval(p)) * self.inner.value(p)
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let rot = Complex64::from_polar(1.0, -self.gauge.eval(p));
        let dphi = self.gauge.gradient(p);
        let v = self.inner.value(p);
        self.inner
            .gradient(p)
            .into_iter()
            .zip(dphi)
            .map(|(g, dp)| rot * (g - Complex64::i() * dp * v))
            .collect()
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        self.inner.support()
    }

    fn lipschitz_bound(&self) -> f64 {
        // |∇(e^{−iΦ}u)| ≤ |∇u| + |∇Φ||u|; the gauge gradient is unbounded
        // globally, so callers relying on tail bounds use support-local
        // sups instead. This keeps a usable default.
        self.inner.lipschitz_bound()
    }

    fn sup_bound(&self) -> f64 {
        self.inner.sup_bound()
    }
}
