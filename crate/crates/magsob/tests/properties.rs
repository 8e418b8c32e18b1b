//! Property tests for the exact identities: antisymmetry, gauge shifts,
//! measure independence on affine fields, and norm homogeneity.

use proptest::prelude::*;

use magsob::field::{GaugeFunction, PotentialField};
use magsob::poly::{Monomial, Polynomial};
use magsob::potential::{measure_potential, segment_potential};
use magsob::quad::SegmentRule;
use magsob::QuadratureMeasure;

fn small_coeff() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_filter("finite", |v| v.is_finite())
}

fn poly_field_2d() -> impl Strategy<Value = PotentialField> {
    // quadratic two-component fields with bounded coefficients
    proptest::collection::vec(small_coeff(), 12).prop_map(|c| {
        let comp = |k: usize| {
            Polynomial::new(
                2,
                vec![
                    Monomial {
                        powers: vec![0, 0],
                        coeff: c[6 * k],
                    },
                    Monomial {
                        powers: vec![1, 0],
                        coeff: c[6 * k + 1],
                    },
                    Monomial {
                        powers: vec![0, 1],
                        coeff: c[6 * k + 2],
                    },
                    Monomial {
                        powers: vec![2, 0],
                        coeff: c[6 * k + 3],
                    },
                    Monomial {
                        powers: vec![1, 1],
                        coeff: c[6 * k + 4],
                    },
                    Monomial {
                        powers: vec![0, 2],
                        coeff: c[6 * k + 5],
                    },
                ],
            )
        };
        PotentialField::polynomial(vec![comp(0), comp(1)])
    })
}

fn point_2d() -> impl Strategy<Value = [f64; 2]> {
    ((-1.5f64..1.5), (-1.5f64..1.5)).prop_map(|(a, b)| [a, b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Canonical orientation makes the segment potential antisymmetric to
    /// the last bit.
    #[test]
    fn segment_potential_is_bit_antisymmetric(
        field in poly_field_2d(),
        x in point_2d(),
        y in point_2d(),
    ) {
        let rule = SegmentRule::default();
        let fwd = segment_potential(&field, &x, &y, &rule);
        let bwd = segment_potential(&field, &y, &x, &rule);
        prop_assert_eq!(fwd.to_bits(), (-bwd).to_bits());
    }

    /// Adding an exact gradient shifts the potential by the phase
    /// difference: `I_{A+∇Φ} − I_A = Φ(Y) − Φ(X)`.
    #[test]
    fn gauge_shift_identity(
        field in poly_field_2d(),
        phi_coeffs in proptest::collection::vec(small_coeff(), 4),
        x in point_2d(),
        y in point_2d(),
    ) {
        let phi = Polynomial::new(2, vec![
            Monomial { powers: vec![1, 0], coeff: phi_coeffs[0] },
            Monomial { powers: vec![0, 1], coeff: phi_coeffs[1] },
            Monomial { powers: vec![2, 1], coeff: phi_coeffs[2] },
            Monomial { powers: vec![0, 3], coeff: phi_coeffs[3] },
        ]);
        let rule = SegmentRule::default();
        let gauged = field.gauge_transform(&GaugeFunction::polynomial(phi.clone())).unwrap();
        let shift = segment_potential(&gauged, &x, &y, &rule)
            - segment_potential(&field, &x, &y, &rule);
        let expected = phi.eval(&y) - phi.eval(&x);
        prop_assert!((shift - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    /// Measures of mass 1 with first moment 1/2 agree on affine fields.
    #[test]
    fn affine_fields_are_measure_blind(
        coeffs in proptest::collection::vec(small_coeff(), 6),
        x in point_2d(),
        y in point_2d(),
    ) {
        let affine = PotentialField::polynomial(vec![
            Polynomial::new(2, vec![
                Monomial { powers: vec![0, 0], coeff: coeffs[0] },
                Monomial { powers: vec![1, 0], coeff: coeffs[1] },
                Monomial { powers: vec![0, 1], coeff: coeffs[2] },
            ]),
            Polynomial::new(2, vec![
                Monomial { powers: vec![0, 0], coeff: coeffs[3] },
                Monomial { powers: vec![1, 0], coeff: coeffs[4] },
                Monomial { powers: vec![0, 1], coeff: coeffs[5] },
            ]),
        ]);
        let rule = SegmentRule::default();
        let reference = measure_potential(
            &affine, &QuadratureMeasure::lebesgue(), &x, &y, &rule);
        for mu in [
            QuadratureMeasure::midpoint(),
            QuadratureMeasure::endpoints(),
            QuadratureMeasure::simpson(),
        ] {
            let v = measure_potential(&affine, &mu, &x, &y, &rule);
            prop_assert!((v - reference).abs() <= 1e-12 * (1.0 + reference.abs()));
        }
    }

    /// Exterior derivatives are blind to gauge transformations.
    #[test]
    fn curvature_is_gauge_invariant(
        field in poly_field_2d(),
        phi_coeffs in proptest::collection::vec(small_coeff(), 3),
        x in point_2d(),
    ) {
        let phi = Polynomial::new(2, vec![
            Monomial { powers: vec![2, 0], coeff: phi_coeffs[0] },
            Monomial { powers: vec![1, 2], coeff: phi_coeffs[1] },
            Monomial { powers: vec![0, 2], coeff: phi_coeffs[2] },
        ]);
        let gauged = field.gauge_transform(&GaugeFunction::polynomial(phi)).unwrap();
        let d0 = field.exterior_derivative(&x, 1e-4).unwrap();
        let d1 = gauged.exterior_derivative(&x, 1e-4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((d0.components[i][j] - d1.components[i][j]).abs() <= 1e-10);
            }
        }
    }

    /// Moments interpolate linearly under measure mixtures.
    #[test]
    fn moments_are_linear_in_the_measure(w in 0.0f64..1.0, j in 0usize..6) {
        let mix = QuadratureMeasure::custom(
            vec![(0.5, w)],
            1.0 - w,
        );
        let expected = w * QuadratureMeasure::midpoint().moment(j)
            + (1.0 - w) * QuadratureMeasure::lebesgue().moment(j);
        prop_assert!((mix.moment(j) - expected).abs() <= 1e-14);
    }
}
