//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantity so failures are diagnosable from the log.

use std::sync::Arc;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use magsob::extension::{boundary_deviation, extend_grid, trace, Extension, ExtensionKernel};
use magsob::field::{GaugeFunction, PotentialField};
use magsob::geometry::{transport_gap, AmbientField, ChartMap, RotorField};
use magsob::grid::BoundaryGrid;
use magsob::lab::{
    gauge_check, loglog_slope, measure_moments, poincare_scaling, reflection_demo,
    trace_inequality_report, extension_inequality_report, variant_gap, whole_space_report,
    LabSetup, RatioReport,
};
use magsob::norms::{magnetic_gagliardo, BoundaryData};
use magsob::pairquad::PairQuadrature;
use magsob::poly::{Monomial, Polynomial};
use magsob::potential::{covariant_ftc_residual, triangle_residual};
use magsob::quad::SegmentRule;
use magsob::testfn::{Bump, HalfSpaceProduct, SmoothComplexFn};
use magsob::QuadratureMeasure;

fn pass(criterion: &str, detail: String) {
    println!("ACCEPTANCE {criterion}: PASS ({detail})");
}

fn budget(criterion: &str, start: Instant, seconds: u64) {
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < seconds,
        "{criterion} exceeded its runtime budget: {elapsed:?} > {seconds}s"
    );
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, degree: u32, scale: f64) -> Polynomial {
    let mut pool: Vec<Vec<u32>> = vec![];
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for p in 0..=left {
            cur.push(p);
            rec(dim, left - p, cur, out);
            cur.pop();
        }
    }
    rec(dim, degree, &mut vec![], &mut pool);
    let terms = pool
        .into_iter()
        .map(|powers| Monomial {
            powers,
            coeff: rng.gen_range(-scale..scale),
        })
        .collect();
    Polynomial::new(dim, terms)
}

fn random_cubic_field(rng: &mut ChaCha8Rng, dim: usize) -> PotentialField {
    PotentialField::polynomial((0..dim).map(|_| random_poly(rng, dim, 3, 1.0)).collect())
}

/// Criterion 1: Stokes triangle identity: 100 seeded random triangles
/// with cubic polynomial fields, residual ≤ 1e−10.
#[test]
fn criterion_1_stokes_triangle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let rule = SegmentRule::new(16, 1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let field = random_cubic_field(&mut rng, 2);
        let pts: Vec<[f64; 2]> = (0..3)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let r = triangle_residual(&field, &pts[0], &pts[1], &pts[2], &rule).unwrap();
        worst = worst.max(r);
        assert!(r <= 1e-10, "triangle residual {r}");
    }
    budget("criterion 1", start, 5);
    pass("1 stokes_triangle", format!("worst residual {worst:.2e}"));
}

/// Criterion 2: Covariant FTC along 50 seeded random segments with a
/// bump datum and a Landau field, residual ≤ 1e−8 at order 32.
#[test]
fn criterion_2_covariant_ftc() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let field = PotentialField::landau_boundary(2, 1.0);
    let u = Bump::new(vec![0.0, 0.0], 1.2, false);
    let rule = SegmentRule::new(32, 1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let y = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let r = covariant_ftc_residual(&field, &u, &x, &y, &rule).unwrap();
        worst = worst.max(r);
        assert!(r <= 1e-8, "FTC residual {r} on segment {x:?} -> {y:?}");
    }
    budget("criterion 2", start, 10);
    pass("2 covariant_ftc", format!("worst residual {worst:.2e}"));
}

/// Criterion 3: gauge invariance of the seminorm, the weighted norm, and
/// both inequality reports under 5 random polynomial gauges (degree ≤ 3),
/// each drift < 1e−8 relative.
#[test]
fn criterion_3_gauge_invariance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
    let field = PotentialField::landau_halfspace(2, 1.0);
    let u = Bump::new(vec![0.0], 0.45, false);
    let datum = HalfSpaceProduct::new(Bump::new(vec![0.0], 0.45, false), 0.6);
    let mut worst = 0.0f64;
    for k in 0..5 {
        let gauge = GaugeFunction::polynomial(random_poly(&mut rng, 2, 3, 0.5));
        let drift = gauge_check(&setup, &field, &u, &datum, &gauge, 20, 16).unwrap();
        worst = worst.max(drift.max());
        assert!(
            drift.max() < 1e-8,
            "gauge {k}: drift {:?} exceeds 1e-8",
            drift
        );
    }
    budget("criterion 3", start, 120);
    pass("3 gauge_invariance", format!("worst drift {worst:.2e}"));
}

/// Criterion 4: trace recovery: `Tr ∘ Ext = id` exactly at `t = 0` and
/// fitted boundary-approach rate ≥ 0.9.
#[test]
fn criterion_4_trace_recovery() {
    let start = Instant::now();
    let u = Bump::new(vec![0.0], 0.5, false);
    let field = PotentialField::landau_halfspace(2, 1.0);
    let kernel = ExtensionKernel::new(1, 1.0).unwrap();
    let rule = SegmentRule::default();
    let ext = Extension::new(&u, &field, &kernel, &rule).unwrap();

    let bgrid = BoundaryGrid::new(1, 1.0, 64).unwrap();
    let hgrid = magsob::grid::HalfSpaceGrid::new(bgrid.clone(), 1.0, 32, 0.85, 0.0).unwrap();
    let gf = extend_grid(&ext, &hgrid).unwrap();
    let tr = trace(&gf).unwrap();
    let mut sup_err = 0.0f64;
    for (si, v) in tr.values.iter().enumerate() {
        sup_err = sup_err.max((v - u.value(&bgrid.point(si))).norm());
    }
    assert!(sup_err <= 1e-8, "trace sup error {sup_err}");

    let ts: Vec<f64> = (0..6).map(|k| 0.2 * 0.5f64.powi(k)).collect();
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| (t, boundary_deviation(&ext, &bgrid, t)))
        .collect();
    let fit = loglog_slope(&pts).unwrap();
    assert!(fit.slope >= 0.9, "recovery rate {}", fit.slope);
    budget("criterion 4", start, 60);
    pass(
        "4 trace_recovery",
        format!("sup error {sup_err:.2e}, rate {:.2}", fit.slope),
    );
}

/// Criterion 5: trace and extension inequalities at d = 1, s = 1/2,
/// p = 2 for β ∈ {1, 4, 16}: every report converged, ratios finite and
/// within a factor 3 of the β = 1 ratio.
#[test]
fn criterion_5_trace_and_extension_inequalities() {
    let start = Instant::now();
    let levels = [(32usize, 32usize), (48, 48)];
    let u = Bump::new(vec![0.0], 0.45, false);
    let mut trace_ratios = vec![];
    let mut ext_ratios = vec![];
    for &beta in &[1.0, 4.0, 16.0] {
        let setup = LabSetup::new(1, 0.5, 2.0, beta);
        let field = PotentialField::landau_halfspace(2, beta);
        let datum = HalfSpaceProduct::new(Bump::new(vec![0.0], 0.45, false), 0.5);

        let tr = trace_inequality_report(&setup, &field, &datum, &levels).unwrap();
        assert!(tr.converged(), "trace report β={beta}: {:?}", tr.verdict);
        assert!(tr.ratio.is_finite() && tr.ratio > 0.0);
        trace_ratios.push(tr.ratio);

        let ex = extension_inequality_report(&setup, &field, &u, &levels).unwrap();
        assert!(ex.converged(), "extension report β={beta}: {:?}", ex.verdict);
        assert!(ex.ratio.is_finite() && ex.ratio > 0.0);
        ext_ratios.push(ex.ratio);
    }
    for ratios in [&trace_ratios, &ext_ratios] {
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            max <= 3.0 * ratios[0],
            "cross-β spread too wide: {ratios:?}"
        );
    }
    budget("criterion 5", start, 600);
    pass(
        "5 trace_extension_inequalities",
        format!("trace ratios {trace_ratios:?}, extension ratios {ext_ratios:?}"),
    );
}

/// Criterion 6: magnetic Poincaré scaling on a d = 2 boundary with the
/// Landau family over β ∈ {1, 2, 4, 8, 16}: slope ≥ 0.35 (theory sp/2 =
/// 0.5), r² ≥ 0.9, Monte Carlo pairs with the fixed seed.
#[test]
fn criterion_6_poincare_scaling() {
    let start = Instant::now();
    // the magnetic length at β = 1 must sit inside the datum's support,
    // otherwise the sweep never leaves the classical regime
    let mut setup = LabSetup::new(2, 0.5, 2.0, 1.0);
    setup.extent = 3.0;
    let u = Bump::new(vec![0.0, 0.0], 2.0, false);
    let betas = [1.0, 2.0, 4.0, 8.0, 16.0];
    let fit = poincare_scaling(
        &setup,
        &u,
        |beta| PotentialField::landau_boundary(2, beta),
        &betas,
        32,
    )
    .unwrap();
    assert!(fit.slope >= 0.35, "Poincaré slope {}", fit.slope);
    assert!(fit.r_squared >= 0.9, "fit quality r² = {}", fit.r_squared);
    budget("criterion 6", start, 600);
    pass(
        "6 poincare_scaling",
        format!("slope {:.3}, r² {:.4}", fit.slope, fit.r_squared),
    );
}

/// Criterion 7: seminorm-variant gap law: affine fields give zero gap,
/// the λ-sweep slopes clear their thresholds, and the Simpson moment
/// table is exact.
#[test]
fn criterion_7_variant_gap_law() {
    let start = Instant::now();
    let s = 0.5;
    let setup = LabSetup::new(1, s, 2.0, 1.0);
    let u = Bump::new(vec![0.0], 0.5, false);
    let scales: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();

    // affine field: lebesgue and midpoint coincide at every λ
    let affine = PotentialField::polynomial(vec![Polynomial::linear(1, 0, 1.2)]);
    let affine_report = variant_gap(
        &setup,
        &u,
        &affine,
        &QuadratureMeasure::lebesgue(),
        &QuadratureMeasure::midpoint(),
        &scales,
        48,
    )
    .unwrap();
    let max_affine = affine_report.gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    assert!(max_affine <= 1e-10, "affine gap {max_affine}");

    // quadratic field: moments match below j = 2, slope ≥ s/3 − 0.15
    let quadratic = PotentialField::polynomial(vec![Polynomial::new(
        1,
        vec![Monomial {
            powers: vec![2],
            coeff: 1.5,
        }],
    )]);
    let mid_report = variant_gap(
        &setup,
        &u,
        &quadratic,
        &QuadratureMeasure::lebesgue(),
        &QuadratureMeasure::midpoint(),
        &scales,
        48,
    )
    .unwrap();
    assert_eq!(mid_report.matching_order, 2);
    let mid_fit = mid_report.slope.expect("nonzero gaps");
    assert!(
        mid_fit.slope >= s / 3.0 - 0.15,
        "lebesgue-midpoint slope {}",
        mid_fit.slope
    );

    // quartic field: Simpson matches through j = 3, slope ≥ s/5 − 0.15
    let quartic = PotentialField::polynomial(vec![Polynomial::new(
        1,
        vec![Monomial {
            powers: vec![4],
            coeff: 2.0,
        }],
    )]);
    let simpson_report = variant_gap(
        &setup,
        &u,
        &quartic,
        &QuadratureMeasure::lebesgue(),
        &QuadratureMeasure::simpson(),
        &scales,
        48,
    )
    .unwrap();
    assert_eq!(simpson_report.matching_order, 4);
    let simpson_fit = simpson_report.slope.expect("nonzero gaps");
    assert!(
        simpson_fit.slope >= s / 5.0 - 0.15,
        "lebesgue-simpson slope {}",
        simpson_fit.slope
    );

    let moments = measure_moments(&QuadratureMeasure::simpson(), 4);
    let expected = [1.0, 0.5, 1.0 / 3.0, 0.25, 5.0 / 24.0];
    for (j, (got, want)) in moments.iter().zip(expected).enumerate() {
        assert!(
            (got - want).abs() <= 1e-15,
            "Simpson moment {j}: {got} vs {want}"
        );
    }
    budget("criterion 7", start, 300);
    pass(
        "7 variant_gap_law",
        format!(
            "affine gap {max_affine:.1e}, slopes {:.2}/{:.2}",
            mid_fit.slope, simpson_fit.slope
        ),
    );
}

/// Criterion 8: chart-transport cubic law on the stereographic sphere
/// chart (slope ≥ 2.85) and exact degeneration on a circle chart.
#[test]
fn criterion_8_transport_cubic_law() {
    let start = Instant::now();
    let rule = SegmentRule::new(32, 1);
    let chart = ChartMap::sphere(1.0);
    let field: Arc<dyn AmbientField> = Arc::new(RotorField { strength: 1.0 });
    let x = [0.15, 0.1];
    let dir = [0.6, 0.8];
    let pts: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let r = 0.32 * 0.5f64.powi(k);
            let y = [x[0] + r * dir[0], x[1] + r * dir[1]];
            let gap = transport_gap(&chart, field.clone(), &x, &y, &rule).unwrap();
            (r, gap)
        })
        .collect();
    let fit = loglog_slope(&pts).unwrap();
    assert!(fit.slope >= 2.85, "transport slope {}", fit.slope);

    let circle = ChartMap::Circle { radius: 1.0 };
    struct PlaneField;
    impl AmbientField for PlaneField {
        fn ambient_dim(&self) -> usize {
            2
        }
        fn eval_ambient(&self, p: &[f64], out: &mut [f64]) {
            out[0] = -0.8 * p[1] + 0.1 * p[0];
            out[1] = 0.8 * p[0];
        }
    }
    let plane: Arc<dyn AmbientField> = Arc::new(PlaneField);
    let mut worst_circle = 0.0f64;
    for (a, b) in [(0.0, 1.2), (-0.7, 0.5), (-1.5, 1.4)] {
        let gap = transport_gap(&circle, plane.clone(), &[a], &[b], &rule).unwrap();
        worst_circle = worst_circle.max(gap);
        assert!(gap <= 1e-10, "circle-chart gap {gap}");
    }
    budget("criterion 8", start, 60);
    pass(
        "8 transport_cubic_law",
        format!("slope {:.2}, circle gap {worst_circle:.1e}", fit.slope),
    );
}

/// Criterion 9: whole-space extension: two-sided traces agree to 1e−8,
/// and for the odd-in-t Landau field at β ≥ 4 the phase-based extension
/// has strictly lower covariant energy than the reflection.
#[test]
fn criterion_9_whole_space_and_reflection() {
    let start = Instant::now();
    let u = Bump::new(vec![0.0], 0.45, false);

    let setup = LabSetup::new(1, 0.5, 2.0, 4.0);
    let field = PotentialField::landau_halfspace(2, 4.0);
    let whole = whole_space_report(&setup, &field, &u, 32, 32).unwrap();
    let agreement = whole.extras["trace_agreement_sup"];
    assert!(agreement <= 1e-8, "two-sided trace agreement {agreement}");

    let mut ratios = vec![];
    for &beta in &[4.0, 16.0] {
        let setup = LabSetup::new(1, 0.5, 2.0, beta);
        let field = PotentialField::landau_halfspace(2, beta);
        let demo = reflection_demo(&setup, &field, &u, 32, 32).unwrap();
        let phase = demo.extras["phase_energy"];
        let refl = demo.extras["reflection_energy"];
        assert!(
            phase < refl,
            "β={beta}: phase extension {phase} not below reflection {refl}"
        );
        ratios.push(phase / refl);
    }
    budget("criterion 9", start, 120);
    pass(
        "9 whole_space_reflection",
        format!(
            "trace agreement {agreement:.1e}, whole-space C {:.2}, phase/reflection {ratios:?}",
            whole.ratio
        ),
    );
}

/// Criterion 10: determinism: identical values from 1-thread and
/// 4-thread runs of the parallel pipelines (tensor and Monte Carlo).
#[test]
fn criterion_10_thread_determinism() {
    let run_everything = || -> (f64, f64, RatioReport) {
        // d = 2 Monte Carlo seminorm
        let setup2 = LabSetup::new(2, 0.5, 2.0, 1.0);
        let grid2 = setup2.boundary_grid(16).unwrap();
        let scheme2 = setup2.scheme(&grid2).unwrap();
        let u2 = Bump::new(vec![0.0, 0.0], 0.5, false);
        let field2 = PotentialField::landau_boundary(2, 2.0);
        let sem = magnetic_gagliardo(
            &BoundaryData::Analytic(&u2),
            &field2,
            0.5,
            2.0,
            &QuadratureMeasure::lebesgue(),
            &grid2,
            &scheme2,
            &setup2.rule,
        )
        .unwrap()
        .value;

        // d = 1 tensor seminorm
        let setup1 = LabSetup::new(1, 0.5, 2.0, 1.0);
        let grid1 = setup1.boundary_grid(48).unwrap();
        let scheme1 = PairQuadrature::for_grid(&grid1).unwrap();
        let u1 = Bump::new(vec![0.0], 0.45, false);
        let sem1 = magnetic_gagliardo(
            &BoundaryData::Analytic(&u1),
            &PotentialField::zero(1),
            0.5,
            2.0,
            &QuadratureMeasure::lebesgue(),
            &grid1,
            &scheme1,
            &setup1.rule,
        )
        .unwrap()
        .value;

        // extension pipeline
        let field = PotentialField::landau_halfspace(2, 1.0);
        let report =
            extension_inequality_report(&setup1, &field, &u1, &[(24, 24)]).unwrap();
        (sem, sem1, report)
    };

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run_everything);
    let quad = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run_everything);

    assert_eq!(single.0.to_bits(), quad.0.to_bits(), "MC seminorm differs");
    assert_eq!(single.1.to_bits(), quad.1.to_bits(), "tensor seminorm differs");
    assert_eq!(
        single.2.lhs.to_bits(),
        quad.2.lhs.to_bits(),
        "extension energy differs"
    );
    assert_eq!(single.2.rhs.to_bits(), quad.2.rhs.to_bits());
    pass(
        "10 determinism",
        format!("1-thread == 4-thread on {} values", 4),
    );
}
