//! Finite quadrature measures on `[0, 1]` driving seminorm phase variants.

/// A finite measure `μ` on `[0, 1]`: weighted atoms plus an optional
/// multiple of Lebesgue measure. The four named instances all have mass 1.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureMeasure {
    /// `(node t ∈ [0, 1], weight)` pairs.
    pub atoms: Vec<(f64, f64)>,
    /// Mass assigned to Lebesgue measure on `[0, 1]`.
    pub continuous_weight: f64,
    pub name_tag: MeasureTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureTag {
    Lebesgue,
    Midpoint,
    Endpoints,
    Simpson,
    Custom,
}

impl QuadratureMeasure {
    pub fn lebesgue() -> Self {
        QuadratureMeasure {
            atoms: vec![],
            continuous_weight: 1.0,
            name_tag: MeasureTag::Lebesgue,
        }
    }

    /// `δ_{1/2}`.
    pub fn midpoint() -> Self {
        QuadratureMeasure {
            atoms: vec![(0.5, 1.0)],
            continuous_weight: 0.0,
            name_tag: MeasureTag::Midpoint,
        }
    }

    /// `(δ₀ + δ₁)/2`.
    pub fn endpoints() -> Self {
        QuadratureMeasure {
            atoms: vec![(0.0, 0.5), (1.0, 0.5)],
            continuous_weight: 0.0,
            name_tag: MeasureTag::Endpoints,
        }
    }

    /// `δ₀/6 + 2δ_{1/2}/3 + δ₁/6`, the Simpson-rule measure.
    pub fn simpson() -> Self {
        QuadratureMeasure {
            atoms: vec![(0.0, 1.0 / 6.0), (0.5, 2.0 / 3.0), (1.0, 1.0 / 6.0)],
            continuous_weight: 0.0,
            name_tag: MeasureTag::Simpson,
        }
    }

    pub fn custom(atoms: Vec<(f64, f64)>, continuous_weight: f64) -> Self {
        QuadratureMeasure {
            atoms,
            continuous_weight,
            name_tag: MeasureTag::Custom,
        }
    }

    pub fn named(tag: MeasureTag) -> Self {
        match tag {
            MeasureTag::Lebesgue => Self::lebesgue(),
            MeasureTag::Midpoint => Self::midpoint(),
            MeasureTag::Endpoints => Self::endpoints(),
            MeasureTag::Simpson => Self::simpson(),
            MeasureTag::Custom => panic!("custom measures need explicit atoms"),
        }
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum::<f64>() + self.continuous_weight
    }

    /// Exact `j`-th moment `∫₀¹ t^j dμ(t)`: atoms summed directly, the
    /// continuous part contributes `1/(j + 1)` in closed form.
    pub fn moment(&self, j: usize) -> f64 {
        let atom_part: f64 = self
            .atoms
            .iter()
            .map(|&(t, w)| w * t.powi(j as i32))
            .sum();
        atom_part + self.continuous_weight / (j as f64 + 1.0)
    }

    pub fn moments(&self, up_to: usize) -> Vec<f64> {
        (0..=up_to).map(|j| self.moment(j)).collect()
    }

    /// Largest `k` such that moments `0, …, k − 1` of the two measures all
    /// agree to `tol`; this is the matching order in the variant gap law.
    pub fn matching_order(&self, other: &QuadratureMeasure, tol: f64, cap: usize) -> usize {
        for j in 0..cap {
            if (self.moment(j) - other.moment(j)).abs() > tol {
                return j;
            }
        }
        cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_measures_have_unit_mass() {
        for m in [
            QuadratureMeasure::lebesgue(),
            QuadratureMeasure::midpoint(),
            QuadratureMeasure::endpoints(),
            QuadratureMeasure::simpson(),
        ] {
            assert!((m.mass() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_closed_forms() {
        let leb = QuadratureMeasure::lebesgue();
        assert_eq!(leb.moments(2), vec![1.0, 0.5, 1.0 / 3.0]);

        let mid = QuadratureMeasure::midpoint();
        assert_eq!(mid.moments(2), vec![1.0, 0.5, 0.25]);

        let end = QuadratureMeasure::endpoints();
        assert_eq!(end.moments(2), vec![1.0, 0.5, 0.5]);

        // 1/6·0^j + 2/3·(1/2)^j + 1/6 for j = 0..4 → 1, 1/2, 1/3, 1/4, 5/24
        let simpson = QuadratureMeasure::simpson();
        let m = simpson.moments(4);
        let expected = [1.0, 0.5, 1.0 / 3.0, 0.25, 5.0 / 24.0];
        for (got, want) in m.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn matching_orders_between_named_measures() {
        let tol = 1e-12;
        let leb = QuadratureMeasure::lebesgue();
        // lebesgue vs midpoint: j=0,1 agree, j=2 differs (1/3 vs 1/4)
        assert_eq!(leb.matching_order(&QuadratureMeasure::midpoint(), tol, 8), 2);
        // lebesgue vs endpoints: j=2 differs (1/3 vs 1/2)
        assert_eq!(leb.matching_order(&QuadratureMeasure::endpoints(), tol, 8), 2);
        // lebesgue vs simpson: j=0..3 agree, j=4 differs (1/5 vs 5/24)
        assert_eq!(leb.matching_order(&QuadratureMeasure::simpson(), tol, 8), 4);
    }
}
