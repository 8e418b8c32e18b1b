//! Gauss–Legendre quadrature on `[0, 1]`, composite panels, and the
//! Duffy-mapped tensor rule on the unit triangle.

/// Composite Gauss–Legendre rule on `[0, 1]`.
///
/// Nodes are mirror-symmetric about `1/2` by construction (each node is
/// computed once and reflected), which downstream code relies on for exact
/// antisymmetry of oriented segment integrals. Exact for polynomials of
/// degree `≤ 2·order − 1` on each panel.
#[derive(Debug, Clone)]
pub struct SegmentRule {
    order: usize,
    panels: usize,
    /// Nodes and weights on [0, 1] including panel subdivision.
    nodes: Vec<(f64, f64)>,
}

impl SegmentRule {
    pub fn new(order: usize, panels: usize) -> Self {
        assert!(order >= 1 && panels >= 1);
        let base = gauss_legendre_unit(order);
        let mut nodes = Vec::with_capacity(order * panels);
        let w_scale = 1.0 / panels as f64;
        for p in 0..panels {
            let lo = p as f64 / panels as f64;
            for &(t, w) in &base {
                nodes.push((lo + t * w_scale, w * w_scale));
            }
        }
        SegmentRule {
            order,
            panels,
            nodes,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Doubled order, same panels.
    pub fn refined(&self) -> SegmentRule {
        SegmentRule::new(self.order * 2, self.panels)
    }

    /// ∫₀¹ f(t) dt.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = crate::numeric::KahanSum::new();
        for &(t, w) in &self.nodes {
            acc.add(w * f(t));
        }
        acc.value()
    }

    /// Refine until two successive refinements agree to `rel_tol`
    /// relative, starting from this rule. Caps at order 512.
    pub fn integrate_adaptive(&self, f: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
        let mut rule = self.clone();
        let mut prev = rule.integrate(&f);
        loop {
            rule = rule.refined();
            let next = rule.integrate(&f);
            let scale = next.abs().max(prev.abs()).max(1e-300);
            if (next - prev).abs() <= rel_tol * scale || rule.order > 512 {
                return next;
            }
            prev = next;
        }
    }
}

impl Default for SegmentRule {
    fn default() -> Self {
        SegmentRule::new(16, 1)
    }
}

/// Gauss–Legendre nodes/weights on `[0, 1]`, exactly mirror-symmetric.
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    let mut pairs = vec![(0.0f64, 0.0f64); order];
    let n = order;
    // Newton iteration on P_n over [−1, 1]; only the positive half is
    // computed, the other half is its exact mirror image.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to [0, 1]: t = (1 + x)/2, weight halves
        let hi = n - 1 - i;
        pairs[i] = ((1.0 - x) / 2.0, w / 2.0);
        pairs[hi] = ((1.0 + x) / 2.0, w / 2.0);
        if 2 * i + 1 == n {
            pairs[i] = (0.5, w / 2.0);
        }
    }
    pairs
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss rule mapped to the simplex `{(t, s): 0 ≤ s ≤ 1, 0 ≤ t ≤ 1 − s}`
/// through `t = u(1 − s)`; the Jacobian `(1 − s)` keeps polynomial
/// integrands exactly integrable at sufficient order.
pub fn triangle_nodes(order: usize) -> Vec<(f64, f64, f64)> {
    let base = gauss_legendre_unit(order);
    let mut out = Vec::with_capacity(order * order);
    for &(s, ws) in &base {
        for &(u, wu) in &base {
            let t = u * (1.0 - s);
            out.push((t, s, ws * wu * (1.0 - s)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_mirror_symmetric() {
        for order in [2, 5, 16, 31] {
            let nodes = gauss_legendre_unit(order);
            for i in 0..order {
                let (t, w) = nodes[i];
                let (t2, w2) = nodes[order - 1 - i];
                assert_eq!(w, w2);
                assert!((t + t2 - 1.0).abs() <= f64::EPSILON, "order {order} node {i}");
            }
        }
    }

    #[test]
    fn exact_for_monomials_up_to_design_degree() {
        let rule = SegmentRule::new(8, 1);
        for k in 0..=15u32 {
            let exact = 1.0 / (k as f64 + 1.0);
            let got = rule.integrate(|t| t.powi(k as i32));
            assert!(
                (got - exact).abs() < 1e-14,
                "degree {k}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn composite_panels_preserve_exactness() {
        let rule = SegmentRule::new(4, 3);
        let got = rule.integrate(|t| t.powi(7));
        assert!((got - 0.125).abs() < 1e-14);
    }

    #[test]
    fn adaptive_reaches_tolerance_on_oscillatory_integrand() {
        let rule = SegmentRule::default();
        let got = rule.integrate_adaptive(|t| (20.0 * t).sin(), 1e-13);
        let exact = (1.0 - (20.0f64).cos()) / 20.0;
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn triangle_rule_integrates_polynomials_exactly() {
        // ∬_simplex 1 = 1/2, ∬ t = 1/6, ∬ t·s = 1/24, ∬ t² s = 1/60
        let nodes = triangle_nodes(6);
        let integral = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            nodes.iter().map(|&(t, s, w)| w * f(t, s)).sum::<f64>()
        };
        assert!((integral(&|_, _| 1.0) - 0.5).abs() < 1e-14);
        assert!((integral(&|t, _| t) - 1.0 / 6.0).abs() < 1e-14);
        assert!((integral(&|t, s| t * s) - 1.0 / 24.0).abs() < 1e-14);
        assert!((integral(&|t, s| t * t * s) - 1.0 / 60.0).abs() < 1e-15);
    }
}
