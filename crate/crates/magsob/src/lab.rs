//! Empirical verification of the trace, extension, Poincaré-scaling, and
//! seminorm-variant estimates: each inequality becomes a report carrying
//! both sides, their ratio across a refinement trace, and, where a
//! scaling law is predicted, a fitted log-log slope.
//!
//! Constants are never taken from theory; an inequality "passes" when its
//! ratio stays bounded and stable under refinement.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::extension::{extension_energies, Extension, ExtensionKernel};
use crate::field::PotentialField;
use crate::grid::{BoundaryGrid, HalfSpaceGrid};
use crate::measure::QuadratureMeasure;
use crate::norms::{magnetic_gagliardo, shifted_gagliardo, BoundaryData};
use crate::numeric::{self, KahanSum, WorkBox};
use crate::pairquad::{integrate_pairs, PairQuadrature, PairSampling};
use crate::quad::SegmentRule;
use crate::testfn::SmoothComplexFn;
use crate::{Error, Result};

/// Convergence verdict for a refinement trace: the last two ratios must
/// agree within 15% before a report may be called converged.
pub const CONVERGENCE_DRIFT: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converged,
    Unconverged,
    ZeroData,
}

/// Both sides of one inequality at the finest resolution, with the ratio
/// history over the refinement trace.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    /// `(resolution n, ratio)` per refinement level.
    pub refinement_trace: Vec<(usize, f64)>,
    pub params: BTreeMap<String, f64>,
    pub extras: BTreeMap<String, f64>,
}

impl RatioReport {
    fn assemble(
        trace: Vec<(usize, f64, f64)>,
        params: BTreeMap<String, f64>,
        extras: BTreeMap<String, f64>,
    ) -> RatioReport {
        let (_, lhs, rhs) = *trace.last().expect("at least one level");
        let ratios: Vec<(usize, f64)> = trace
            .iter()
            .map(|&(n, l, r)| (n, if r > 0.0 { l / r } else { 0.0 }))
            .collect();
        let zero = lhs == 0.0 && rhs == 0.0;
        let verdict = if zero {
            Verdict::ZeroData
        } else if ratios.len() >= 2 {
            let last = ratios[ratios.len() - 1].1;
            let prev = ratios[ratios.len() - 2].1;
            if last > 0.0 && ((last - prev) / last).abs() <= CONVERGENCE_DRIFT {
                Verdict::Converged
            } else {
                Verdict::Unconverged
            }
        } else {
            Verdict::Unconverged
        };
        let ratio = if zero {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            f64::INFINITY
        };
        RatioReport {
            lhs,
            rhs,
            ratio,
            verdict,
            refinement_trace: ratios,
            params,
            extras,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self.verdict, Verdict::Converged | Verdict::ZeroData)
    }
}

/// Least-squares slope of `log y` against `log x`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SlopeReport {
    /// `(log x, log y)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on log-log pairs from raw positive `(x, y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<SlopeReport> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            required: 4,
            got: points.len(),
        });
    }
    for &(x, y) in points {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::NonPositiveValue { value: x.min(y) });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::invalid("points", "abscissae are all equal"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot <= 1e-300 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(SlopeReport {
        points: logs,
        slope,
        r_squared,
    })
}

/// Exact moments `∫ t^j dμ` for `j = 0, …, up_to`.
pub fn measure_moments(mu: &QuadratureMeasure, up_to: usize) -> Vec<f64> {
    mu.moments(up_to)
}

/// Shared experiment geometry: boundary extent, fractional parameters,
/// magnetic bound, grading, and the Monte Carlo switch for 2-D pairs.
#[derive(Debug, Clone)]
pub struct LabSetup {
    pub d: usize,
    pub extent: f64,
    pub s: f64,
    pub p: f64,
    pub beta: f64,
    pub grading: f64,
    pub seed: u64,
    /// Tensor pair-node budget; beyond it, d = 2 switches to stratified
    /// Monte Carlo with the setup seed.
    pub mc_budget: usize,
    pub rule: SegmentRule,
    /// Overrides the derived weight exponent `γ = 1 − (1 − s)p`.
    pub gamma_override: Option<f64>,
    /// Overrides the default slab height `max(1, 2β^{−1/2})`.
    pub t_max_override: Option<f64>,
}

impl LabSetup {
    pub fn new(d: usize, s: f64, p: f64, beta: f64) -> Self {
        LabSetup {
            d,
            extent: 1.0,
            s,
            p,
            beta,
            grading: 0.85,
            seed: 42,
            mc_budget: 500_000,
            rule: SegmentRule::default(),
            gamma_override: None,
            t_max_override: None,
        }
    }

    /// Weight exponent `γ = 1 − (1 − s)p` unless explicitly overridden.
    pub fn gamma(&self) -> f64 {
        self.gamma_override
            .unwrap_or(1.0 - (1.0 - self.s) * self.p)
    }

    /// Slab height `T = max(1, 2β^{−1/2})` so the cutoff support resolves.
    pub fn t_max(&self) -> f64 {
        self.t_max_override
            .unwrap_or((2.0 * self.beta.max(1e-12).powf(-0.5)).max(1.0))
    }

    pub fn boundary_grid(&self, n: usize) -> Result<BoundaryGrid> {
        BoundaryGrid::new(self.d, self.extent, n)
    }

    pub fn half_grid(&self, n: usize, t_count: usize) -> Result<HalfSpaceGrid> {
        HalfSpaceGrid::new(
            self.boundary_grid(n)?,
            self.t_max(),
            t_count,
            self.grading,
            self.gamma(),
        )
    }

    pub fn scheme(&self, grid: &BoundaryGrid) -> Result<PairQuadrature> {
        let scheme = PairQuadrature::for_grid(grid)?;
        if grid.dim == 2 {
            let per_x = scheme.bands.len() * scheme.radial_order * scheme.angular_count;
            if grid.len() * per_x > self.mc_budget {
                let samples = (self.mc_budget / (grid.len() * scheme.bands.len())).max(16);
                return Ok(scheme.with_sampling(PairSampling::MonteCarlo {
                    samples,
                    seed: self.seed,
                }));
            }
        }
        Ok(scheme)
    }

    fn work_box(&self) -> WorkBox {
        let mut lo = vec![-self.extent; self.d];
        let mut hi = vec![self.extent; self.d];
        lo.push(0.0);
        hi.push(self.t_max());
        WorkBox::new(lo, hi).expect("valid work box")
    }
}

/// Boundary restriction `U(·, 0)` of a half-space function.
pub struct BoundarySlice<'a> {
    pub inner: &'a dyn SmoothComplexFn,
}

impl SmoothComplexFn for BoundarySlice<'_> {
    fn dim(&self) -> usize {
        self.inner.dim() - 1
    }

    fn value(&self, p: &[f64]) -> Complex64 {
        let mut q = p.to_vec();
        q.push(0.0);
        self.inner.value(&q)
    }

    fn gradient(&self, p: &[f64]) -> Vec<Complex64> {
        let mut q = p.to_vec();
        q.push(0.0);
        let mut g = self.inner.gradient(&q);
        g.pop();
        g
    }

    fn support(&self) -> Option<(Vec<f64>, f64)> {
        self.inner.support().map(|(mut c, r)| {
            c.pop();
            (c, r)
        })
    }

    fn lipschitz_bound(&self) -> f64 {
        self.inner.lipschitz_bound()
    }

    fn sup_bound(&self) -> f64 {
        self.inner.sup_bound()
    }
}

/// Discrete `‖u‖_p^p` of an analytic boundary function on a grid.
fn boundary_lp_pow(u: &dyn SmoothComplexFn, grid: &BoundaryGrid, p: f64) -> f64 {
    let w = grid.cell_weight();
    let mut acc = KahanSum::new();
    for idx in 0..grid.len() {
        acc.add(w * u.value(&grid.point(idx)).norm().powf(p));
    }
    acc.value()
}

/// Weighted half-space energies `(∬|∇_A U|^p t^γ, ∬|U|^p t^γ)` of an
/// analytic function on a graded grid.
fn halfspace_energies(
    u: &dyn SmoothComplexFn,
    field: &PotentialField,
    grid: &HalfSpaceGrid,
    p: f64,
) -> Result<(f64, f64)> {
    let wcell = grid.base.cell_weight();
    let tw = grid.t_weights();
    let mut ge = KahanSum::new();
    let mut ve = KahanSum::new();
    for (ti, twk) in tw.iter().enumerate() {
        for si in 0..grid.base.len() {
            let pt = grid.point(si, ti);
            let v = u.value(&pt);
            let cg = crate::norms::covariant_gradient(field, u, &pt)?;
            let g2: f64 = cg.iter().map(|c| c.norm_sqr()).sum();
            ge.add(wcell * twk * g2.sqrt().powf(p));
            ve.add(wcell * twk * v.norm().powf(p));
        }
    }
    Ok((ge.value(), ve.value()))
}

fn base_params(setup: &LabSetup, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("d".into(), setup.d as f64);
    m.insert("s".into(), setup.s);
    m.insert("p".into(), setup.p);
    m.insert("beta".into(), setup.beta);
    m.insert("gamma".into(), setup.gamma());
    m.insert("L".into(), setup.extent);
    m.insert("seed".into(), setup.seed as f64);
    for (k, v) in extra {
        m.insert((*k).into(), *v);
    }
    m
}

/// Trace estimate: seminorm of the boundary restriction against the
/// weighted covariant energy of the half-space datum,
/// `|U(·,0)|^p ≤ C (∬ (|∇_A U|^p + β^{p/2}|U|^p) t^γ)`,
/// plus the `L^p` interpolation ratio
/// `‖U(·,0)‖_p^p / (E_grad^{1−s} E_u^s)` in the extras.
pub fn trace_inequality_report(
    setup: &LabSetup,
    field: &PotentialField,
    datum: &dyn SmoothComplexFn,
    levels: &[(usize, usize)],
) -> Result<RatioReport> {
    if levels.is_empty() {
        return Err(Error::invalid("levels", "need at least one resolution"));
    }
    let measured = field.sup_norm_da(&setup.work_box(), 6)?;
    if setup.beta < measured * (1.0 - 1e-9) {
        return Err(Error::invalid(
            "beta",
            format!("below measured sup|dA| = {measured}"),
        ));
    }
    let u0 = BoundarySlice { inner: datum };
    let parallel = field.restrict_to_boundary();
    let mut trace = vec![];
    let mut extras = BTreeMap::new();
    for &(n, t_count) in levels {
        let bgrid = setup.boundary_grid(n)?;
        let scheme = setup.scheme(&bgrid)?;
        let sem = magnetic_gagliardo(
            &BoundaryData::Analytic(&u0),
            &parallel,
            setup.s,
            setup.p,
            &QuadratureMeasure::lebesgue(),
            &bgrid,
            &scheme,
            &setup.rule,
        )?;
        let lhs = sem.value.powf(setup.p);

        let hgrid = setup.half_grid(n, t_count)?;
        let (e_grad, e_u) = halfspace_energies(datum, field, &hgrid, setup.p)?;
        let rhs = e_grad + setup.beta.powf(setup.p / 2.0) * e_u;

        let boundary_lp = boundary_lp_pow(&u0, &bgrid, setup.p);
        let lp_rhs = e_grad.powf(1.0 - setup.s) * e_u.powf(setup.s);
        extras.insert("lp_lhs".into(), boundary_lp);
        extras.insert("lp_rhs".into(), lp_rhs);
        extras.insert(
            "lp_ratio".into(),
            if lp_rhs > 0.0 { boundary_lp / lp_rhs } else { 0.0 },
        );
        extras.insert("seminorm_tail".into(), sem.tail_bound);
        trace.push((n, lhs, rhs));
    }
    Ok(RatioReport::assemble(
        trace,
        base_params(setup, &[]),
        extras,
    ))
}

/// Extension estimate: weighted covariant energy of the phase extension
/// against `|u|^p + β^{sp/2}‖u‖_p^p`, with the zero-order bound
/// `∬|U|^p t^γ ≤ C β^{−(1−s)p/2} ‖u‖_p^p` as a second ratio.
pub fn extension_inequality_report(
    setup: &LabSetup,
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    levels: &[(usize, usize)],
) -> Result<RatioReport> {
    if levels.is_empty() {
        return Err(Error::invalid("levels", "need at least one resolution"));
    }
    let measured = field.sup_norm_da(&setup.work_box(), 6)?;
    if setup.beta < measured * (1.0 - 1e-9) {
        return Err(Error::invalid(
            "beta",
            format!("below measured sup|dA| = {measured}"),
        ));
    }
    let kernel = ExtensionKernel::new(setup.d, setup.beta)?;
    let parallel = field.restrict_to_boundary();
    let mut trace = vec![];
    let mut extras = BTreeMap::new();
    for &(n, t_count) in levels {
        let bgrid = setup.boundary_grid(n)?;
        let scheme = setup.scheme(&bgrid)?;
        let ext = Extension::new(u, field, &kernel, &setup.rule)?;
        let hgrid = setup.half_grid(n, t_count)?;
        let (e_grad, e_u) = extension_energies(&ext, &hgrid, setup.p)?;

        let sem = magnetic_gagliardo(
            &BoundaryData::Analytic(u),
            &parallel,
            setup.s,
            setup.p,
            &QuadratureMeasure::lebesgue(),
            &bgrid,
            &scheme,
            &setup.rule,
        )?;
        let up = boundary_lp_pow(u, &bgrid, setup.p);
        let sp = setup.s * setup.p;
        let lhs = e_grad;
        let rhs = sem.value.powf(setup.p) + setup.beta.powf(sp / 2.0) * up;

        let lp_lhs = e_u;
        let lp_rhs = setup.beta.powf(-(1.0 - setup.s) * setup.p / 2.0) * up;
        extras.insert("lp_lhs".into(), lp_lhs);
        extras.insert("lp_rhs".into(), lp_rhs);
        extras.insert(
            "lp_ratio".into(),
            if lp_rhs > 0.0 { lp_lhs / lp_rhs } else { 0.0 },
        );
        extras.insert("seminorm_tail".into(), sem.tail_bound);
        trace.push((n, lhs, rhs));
    }
    Ok(RatioReport::assemble(
        trace,
        base_params(setup, &[]),
        extras,
    ))
}

/// Fractional magnetic Poincaré scaling: for a family of fields with
/// constant `dA = β`, fit `log(seminorm^p/‖u‖_p^p)` against `log β`.
/// Theory forces growth at least `β^{sp/2}`.
pub fn poincare_scaling(
    setup: &LabSetup,
    u: &dyn SmoothComplexFn,
    family: impl Fn(f64) -> PotentialField,
    betas: &[f64],
    n: usize,
) -> Result<SlopeReport> {
    if betas.len() < 5 {
        return Err(Error::TooFewPoints {
            required: 5,
            got: betas.len(),
        });
    }
    let bgrid = setup.boundary_grid(n)?;
    let scheme = setup.scheme(&bgrid)?;
    let work = WorkBox::centered(setup.extent, setup.d);
    let up = boundary_lp_pow(u, &bgrid, setup.p);
    let mut pts = vec![];
    for &beta in betas {
        let field = family(beta);
        if field.dim() != setup.d {
            return Err(Error::DimensionMismatch {
                expected: setup.d,
                got: field.dim(),
            });
        }
        let da = field.constant_curvature(&work, 4)?;
        let measured = da.max_norm();
        if (measured - beta).abs() > 1e-8 * beta.max(1.0) {
            return Err(Error::invalid(
                "beta",
                format!("family member has |dA| = {measured}, expected {beta}"),
            ));
        }
        let sem = magnetic_gagliardo(
            &BoundaryData::Analytic(u),
            &field,
            setup.s,
            setup.p,
            &QuadratureMeasure::lebesgue(),
            &bgrid,
            &scheme,
            &setup.rule,
        )?;
        pts.push((beta, sem.value.powf(setup.p) / up));
    }
    loglog_slope(&pts)
}

/// Constant-field trace estimate assembled the way the proof does it:
/// `lhs = |u|^p + ‖dA^∥‖^{sp/2}‖u‖_p^p` against the pure covariant energy
/// (no zero-order β term). The λ = 1, 2 shifted seminorms and the
/// phase-gap integral they control are reported in the extras.
pub fn constant_field_trace_report(
    setup: &LabSetup,
    field: &PotentialField,
    datum: &dyn SmoothComplexFn,
    levels: &[(usize, usize)],
) -> Result<RatioReport> {
    if levels.is_empty() {
        return Err(Error::invalid("levels", "need at least one resolution"));
    }
    let work = setup.work_box();
    let da = field.constant_curvature(&work, 4)?;
    let parallel = field.restrict_to_boundary();
    let da_parallel = parallel.constant_curvature(&WorkBox::centered(setup.extent, setup.d), 4)?;
    let u0 = BoundarySlice { inner: datum };
    let sp = setup.s * setup.p;

    let mut trace = vec![];
    let mut extras = BTreeMap::new();
    for &(n, t_count) in levels {
        let bgrid = setup.boundary_grid(n)?;
        let scheme = setup.scheme(&bgrid)?;
        let run_shift = |lambda: f64| {
            shifted_gagliardo(
                &BoundaryData::Analytic(&u0),
                field,
                lambda,
                setup.s,
                setup.p,
                &bgrid,
                &scheme,
                &setup.rule,
            )
            .map(|r| r.value.powf(setup.p))
        };
        let s0 = run_shift(0.0)?;
        let s1 = run_shift(1.0)?;
        let s2 = run_shift(2.0)?;

        // phase-gap integral ∬ |e^{iν_A(y−x)} − 1|^p |u(y)|^p / |y−x|^{d+sp}
        let (center, radius) = datum
            .support()
            .map(|(mut c, r)| {
                c.pop();
                (c, r)
            })
            .ok_or_else(|| Error::invalid("U", "datum must be compactly supported"))?;
        let kernel_pow = setup.d as f64 + sp;
        let p_exp = setup.p;
        let gap = integrate_pairs(&bgrid, &scheme, |x, y| {
            let dy = numeric::dist(y, &center);
            if dy > radius {
                return 0.0;
            }
            let uy = u0.value(y).norm();
            if uy == 0.0 {
                return 0.0;
            }
            let mut z = numeric::sub(y, x);
            z.push(0.0);
            let mut normal = vec![0.0; setup.d + 1];
            normal[setup.d] = 1.0;
            let nu = numeric::dist(x, y) * da.apply(&z, &normal);
            let phase_gap = (Complex64::from_polar(1.0, nu) - Complex64::new(1.0, 0.0)).norm();
            phase_gap.powf(p_exp) * uy.powf(p_exp) / numeric::dist(x, y).powf(kernel_pow)
        });

        let up = boundary_lp_pow(&u0, &bgrid, setup.p);
        let lhs = s0 + da_parallel.max_norm().powf(sp / 2.0) * up;

        let hgrid = setup.half_grid(n, t_count)?;
        let (e_grad, _) = halfspace_energies(datum, field, &hgrid, setup.p)?;
        let rhs = e_grad;

        extras.insert("shifted_lambda0".into(), s0);
        extras.insert("shifted_lambda1".into(), s1);
        extras.insert("shifted_lambda2".into(), s2);
        extras.insert("phase_gap".into(), gap);
        extras.insert(
            "phase_gap_bound".into(),
            2f64.powf(setup.p - 1.0) * (s1 + s2),
        );
        extras.insert("da_parallel".into(), da_parallel.max_norm());
        extras.insert("da_ambient".into(), da.max_norm());
        trace.push((n, lhs, rhs));
    }
    Ok(RatioReport::assemble(
        trace,
        base_params(setup, &[]),
        extras,
    ))
}

/// Gap law between two seminorm variants under field scaling.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct VariantGapReport {
    /// `(λ, |‖u‖_{μ2}(λA) − ‖u‖_{μ1}(λA)|)` pairs.
    pub gaps: Vec<(f64, f64)>,
    /// Number of leading moments on which the two measures agree.
    pub matching_order: usize,
    /// Fit of `log gap` against `log λ`; absent when the gap vanishes
    /// identically (measures coincide on all relevant moments).
    pub slope: Option<SlopeReport>,
}

/// Seminorm-variant gap under field scaling `λ → 0`: with measures
/// matching `k` moments, the gap decays at least like `λ^{s/(k+1)}`.
pub fn variant_gap(
    setup: &LabSetup,
    u: &dyn SmoothComplexFn,
    base_field: &PotentialField,
    mu1: &QuadratureMeasure,
    mu2: &QuadratureMeasure,
    scales: &[f64],
    n: usize,
) -> Result<VariantGapReport> {
    if scales.len() < 4 {
        return Err(Error::TooFewPoints {
            required: 4,
            got: scales.len(),
        });
    }
    let matching_order = mu1.matching_order(mu2, 1e-12, 8);
    if (mu1.mass() - mu2.mass()).abs() > 1e-12 {
        return Err(Error::MomentMismatch {
            moment: 0,
            lhs: mu1.mass(),
            rhs: mu2.mass(),
            required: 1,
        });
    }
    let bgrid = setup.boundary_grid(n)?;
    let scheme = setup.scheme(&bgrid)?;
    let scale_field = |lambda: f64| -> Result<PotentialField> {
        // scaling a polynomial field is a gauge-free rescaling of the data
        let base = base_field.clone();
        Ok(PotentialField::custom(
            base.dim(),
            move |p, out| {
                base.eval_into(p, out);
                for v in out.iter_mut() {
                    *v *= lambda;
                }
            },
            None,
        ))
    };
    let mut gaps = vec![];
    for &lambda in scales {
        let field = scale_field(lambda)?;
        let run = |mu: &QuadratureMeasure| {
            magnetic_gagliardo(
                &BoundaryData::Analytic(u),
                &field,
                setup.s,
                setup.p,
                mu,
                &bgrid,
                &scheme,
                &setup.rule,
            )
            .map(|r| r.value)
        };
        let v1 = run(mu1)?;
        let v2 = run(mu2)?;
        gaps.push((lambda, (v2 - v1).abs()));
    }
    let max_gap = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    let slope = if max_gap <= 1e-13 {
        None
    } else {
        Some(loglog_slope(&gaps)?)
    };
    Ok(VariantGapReport {
        gaps,
        matching_order,
        slope,
    })
}

/// Whole-space extension quality: two-sided weighted norm against the
/// one-sided one, plus the boundary agreement of the two traces.
pub fn whole_space_report(
    setup: &LabSetup,
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    n: usize,
    t_count: usize,
) -> Result<RatioReport> {
    let kernel = ExtensionKernel::new(setup.d, setup.beta)?;
    let hgrid = setup.half_grid(n, t_count)?;
    let upper_ext = Extension::new(u, field, &kernel, &setup.rule)?;
    let upper = crate::extension::extend_grid(&upper_ext, &hgrid)?;

    let reflected_field = field.reflect_normal();
    let lower_ext = Extension::new(u, &reflected_field, &kernel, &setup.rule)?;

    let (up_grad, up_val) = extension_energies(&upper_ext, &hgrid, setup.p)?;
    let (lo_grad, lo_val) = extension_energies(&lower_ext, &hgrid, setup.p)?;
    let bp2 = setup.beta.powf(setup.p / 2.0);
    let one_sided = up_grad + bp2 * up_val;
    let two_sided = one_sided + lo_grad + bp2 * lo_val;

    // boundary agreement through the grid-level composition
    let two = crate::extension::extend_whole_space(&upper, field, &kernel, &setup.rule)?;
    let tr_up = crate::extension::trace(&two.upper)?;
    let tr_low = crate::extension::trace(&two.lower)?;
    let mut max_dev = 0.0f64;
    for (a, b) in tr_up.values.iter().zip(&tr_low.values) {
        max_dev = max_dev.max((a - b).norm());
    }

    let mut extras = BTreeMap::new();
    extras.insert("trace_agreement_sup".into(), max_dev);
    extras.insert("upper_energy".into(), one_sided);
    extras.insert("lower_energy".into(), lo_grad + bp2 * lo_val);
    let trace = vec![(n, two_sided, one_sided)];
    Ok(RatioReport::assemble(
        trace,
        base_params(setup, &[("t_count", t_count as f64)]),
        extras,
    ))
}

/// Reflection counterexample: lower-side covariant energies of the
/// phase-based extension and of the plain reflection, under the pulled
/// back field `S^*A`. For fields odd in `t` the reflection pays the
/// `i(A − S^*A)U` penalty and the ratio drops below 1 as β grows.
pub fn reflection_demo(
    setup: &LabSetup,
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    n: usize,
    t_count: usize,
) -> Result<RatioReport> {
    let kernel = ExtensionKernel::new(setup.d, setup.beta)?;
    let hgrid = setup.half_grid(n, t_count)?;
    let upper_ext = Extension::new(u, field, &kernel, &setup.rule)?;
    let reflected_field = field.reflect_normal();

    // phase-based lower side: extend the (identical) trace with S*A
    let phase_ext = Extension::new(u, &reflected_field, &kernel, &setup.rule)?;
    let (phase_energy, _) = extension_energies(&phase_ext, &hgrid, setup.p)?;

    // reflection lower side: same values as above, gradient picks up the
    // field mismatch i(S*A − A)U
    let wcell = hgrid.base.cell_weight();
    let tw = hgrid.t_weights();
    let mut refl = KahanSum::new();
    let mut a_up = vec![0.0; setup.d + 1];
    let mut a_lo = vec![0.0; setup.d + 1];
    for (ti, twk) in tw.iter().enumerate() {
        for si in 0..hgrid.base.len() {
            let x = hgrid.base.point(si);
            let t = hgrid.t_nodes[ti];
            let v = upper_ext.value(&x, t);
            let cg = upper_ext.covariant_gradient(&x, t)?;
            let mut pt = x.clone();
            pt.push(t);
            field.eval_into(&pt, &mut a_up);
            reflected_field.eval_into(&pt, &mut a_lo);
            let mut g2 = 0.0;
            for k in 0..=setup.d {
                let penalty = Complex64::i() * (a_lo[k] - a_up[k]) * v;
                g2 += (cg[k] + penalty).norm_sqr();
            }
            refl.add(wcell * twk * g2.sqrt().powf(setup.p));
        }
    }
    let reflection_energy = refl.value();

    let mut extras = BTreeMap::new();
    extras.insert("phase_energy".into(), phase_energy);
    extras.insert("reflection_energy".into(), reflection_energy);
    let trace = vec![(n, phase_energy, reflection_energy)];
    Ok(RatioReport::assemble(
        trace,
        base_params(setup, &[("t_count", t_count as f64)]),
        extras,
    ))
}

/// Random polynomial in `dim` variables with all terms of total degree
/// `≤ degree` and coefficients uniform in `(−scale, scale)`.
pub fn random_polynomial(
    rng: &mut rand_chacha::ChaCha8Rng,
    dim: usize,
    degree: u32,
    scale: f64,
) -> crate::poly::Polynomial {
    use rand::Rng;
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
    let mut pool = vec![];
    rec(dim, degree, &mut vec![], &mut pool);
    let terms = pool
        .into_iter()
        .map(|powers| crate::poly::Monomial {
            powers,
            coeff: rng.gen_range(-scale..scale),
        })
        .collect();
    crate::poly::Polynomial::new(dim, terms)
}

/// Seeded random polynomial gauge with terms up to the given total degree.
pub fn random_polynomial_gauge(
    dim: usize,
    degree: u32,
    scale: f64,
    seed: u64,
) -> crate::field::GaugeFunction {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    crate::field::GaugeFunction::polynomial(random_polynomial(&mut rng, dim, degree, scale))
}

/// Worst Stokes-triangle residual over seeded random triangles; when no
/// field is supplied, a fresh random cubic field is drawn per triangle.
pub fn stokes_triangle_residuals(
    field: Option<&PotentialField>,
    dim: usize,
    samples: usize,
    box_half: f64,
    seed: u64,
    rule: &SegmentRule,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let random_field;
        let f = match field {
            Some(f) => f,
            None => {
                random_field = PotentialField::polynomial(
                    (0..dim)
                        .map(|_| random_polynomial(&mut rng, dim, 3, 1.0))
                        .collect(),
                );
                &random_field
            }
        };
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..dim)
                    .map(|_| rng.gen_range(-box_half..box_half))
                    .collect()
            })
            .collect();
        let r = crate::potential::triangle_residual(f, &pts[0], &pts[1], &pts[2], rule)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Worst covariant-FTC residual over seeded random segments.
pub fn covariant_ftc_residuals(
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    samples: usize,
    box_half: f64,
    seed: u64,
    rule: &SegmentRule,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = field.dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-box_half..box_half)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-box_half..box_half)).collect();
        let r = crate::potential::covariant_ftc_residual(field, u, &x, &y, rule)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Relative drifts of the gauge-invariant quantities under one gauge:
/// seminorm, weighted covariant norm, and both inequality ratios.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GaugeDrift {
    pub seminorm: f64,
    pub weighted_norm: f64,
    pub trace_ratio: f64,
    pub extension_ratio: f64,
}

impl GaugeDrift {
    pub fn max(&self) -> f64 {
        self.seminorm
            .max(self.weighted_norm)
            .max(self.trace_ratio)
            .max(self.extension_ratio)
    }
}

/// Run the four gauge-sensitive pipelines with and without the gauge and
/// report the relative drifts. All four must be far below any tolerance a
/// report cares about; the default acceptance bar is 1e−8.
pub fn gauge_check(
    setup: &LabSetup,
    field: &PotentialField,
    u: &dyn SmoothComplexFn,
    datum: &dyn SmoothComplexFn,
    gauge: &crate::field::GaugeFunction,
    n: usize,
    t_count: usize,
) -> Result<GaugeDrift> {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
    let bgrid = setup.boundary_grid(n)?;
    let scheme = setup.scheme(&bgrid)?;
    let parallel = field.restrict_to_boundary();
    let boundary_gauge = gauge.restrict_to_boundary();
    let gauged_field = field.gauge_transform(gauge)?;
    let gauged_parallel = parallel.gauge_transform(&boundary_gauge)?;

    let gauged_u = crate::testfn::GaugedFn {
        inner: u,
        gauge: boundary_gauge.clone(),
    };
    let run_sem = |f: &PotentialField, data: &dyn SmoothComplexFn| {
        magnetic_gagliardo(
            &BoundaryData::Analytic(data),
            f,
            setup.s,
            setup.p,
            &QuadratureMeasure::lebesgue(),
            &bgrid,
            &scheme,
            &setup.rule,
        )
        .map(|r| r.value)
    };
    let sem0 = run_sem(&parallel, u)?;
    let sem1 = run_sem(&gauged_parallel, &gauged_u)?;

    let hgrid = setup.half_grid(n, t_count)?;
    let gauged_datum = crate::testfn::GaugedFn {
        inner: datum,
        gauge: gauge.clone(),
    };
    let w0 = crate::norms::weighted_w1p_norm_fn(datum, field, &hgrid, setup.p)?;
    let w1 = crate::norms::weighted_w1p_norm_fn(&gauged_datum, &gauged_field, &hgrid, setup.p)?;

    let levels = [(n, t_count)];
    let t0 = trace_inequality_report(setup, field, datum, &levels)?;
    let t1 = trace_inequality_report(setup, &gauged_field, &gauged_datum, &levels)?;
    let e0 = extension_inequality_report(setup, field, u, &levels)?;
    let e1 = extension_inequality_report(setup, &gauged_field, &gauged_u, &levels)?;

    Ok(GaugeDrift {
        seminorm: rel(sem0, sem1),
        weighted_norm: rel(w0, w1),
        trace_ratio: rel(t0.ratio, t1.ratio),
        extension_ratio: rel(e0.ratio, e1.ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{Bump, HalfSpaceProduct};

    #[test]
    fn loglog_slope_exact_square_law() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, (k * k) as f64)).collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn loglog_slope_constant_series() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, 3.0)).collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn loglog_slope_noisy_half_power() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|k| {
                let x = 1.5f64.powi(k);
                let noise = 1.0 + 0.01 * rng.gen_range(-1.0..1.0);
                (x, 3.0 * x.sqrt() * noise)
            })
            .collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!(fit.slope > 0.45 && fit.slope < 0.55, "slope {}", fit.slope);
    }

    #[test]
    fn loglog_slope_input_validation() {
        assert!(matches!(
            loglog_slope(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            loglog_slope(&[(1.0, 1.0), (2.0, -2.0), (3.0, 1.0), (4.0, 1.0)]),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn ratio_report_zero_data_convention() {
        let report = RatioReport::assemble(
            vec![(16, 0.0, 0.0), (32, 0.0, 0.0)],
            BTreeMap::new(),
            BTreeMap::new(),
        );
        assert_eq!(report.ratio, 0.0);
        assert_eq!(report.verdict, Verdict::ZeroData);
    }

    #[test]
    fn ratio_report_convergence_flagging() {
        let good = RatioReport::assemble(
            vec![(16, 1.0, 1.0), (32, 1.05, 1.0)],
            BTreeMap::new(),
            BTreeMap::new(),
        );
        assert_eq!(good.verdict, Verdict::Converged);
        let bad = RatioReport::assemble(
            vec![(16, 1.0, 1.0), (32, 2.0, 1.0)],
            BTreeMap::new(),
            BTreeMap::new(),
        );
        assert_eq!(bad.verdict, Verdict::Unconverged);
    }

    #[test]
    fn trace_report_classical_sanity() {
        // A = 0 needs a conventional β for the weights; use β = 1
        let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
        let field = PotentialField::zero(2);
        let datum = HalfSpaceProduct::new(Bump::new(vec![0.0], 0.45, false), 0.6);
        let report =
            trace_inequality_report(&setup, &field, &datum, &[(24, 24), (32, 32)]).unwrap();
        assert!(report.converged(), "verdict {:?}", report.verdict);
        assert!(report.ratio > 0.01 && report.ratio < 100.0, "ratio {}", report.ratio);
        let lp_ratio = report.extras["lp_ratio"];
        assert!(lp_ratio > 0.0 && lp_ratio.is_finite());
    }

    #[test]
    fn trace_report_rejects_undersized_beta() {
        let setup = LabSetup::new(1, 0.5, 2.0, 0.5);
        let field = PotentialField::landau_halfspace(2, 4.0);
        let datum = HalfSpaceProduct::new(Bump::new(vec![0.0], 0.45, false), 0.6);
        assert!(trace_inequality_report(&setup, &field, &datum, &[(16, 16)]).is_err());
    }

    #[test]
    fn extension_report_zero_data() {
        let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
        let field = PotentialField::landau_halfspace(2, 1.0);
        struct Zero;
        impl SmoothComplexFn for Zero {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, _: &[f64]) -> Complex64 {
                Complex64::new(0.0, 0.0)
            }
            fn gradient(&self, _: &[f64]) -> Vec<Complex64> {
                vec![Complex64::new(0.0, 0.0)]
            }
            fn support(&self) -> Option<(Vec<f64>, f64)> {
                Some((vec![0.0], 0.1))
            }
            fn lipschitz_bound(&self) -> f64 {
                0.0
            }
            fn sup_bound(&self) -> f64 {
                0.0
            }
        }
        let report = extension_inequality_report(&setup, &field, &Zero, &[(16, 16)]).unwrap();
        assert_eq!(report.verdict, Verdict::ZeroData);
        assert_eq!(report.ratio, 0.0);
    }

    #[test]
    fn variant_gap_identical_measures() {
        let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
        let u = Bump::new(vec![0.0], 0.5, false);
        let field = PotentialField::polynomial(vec![crate::poly::Polynomial::new(
            1,
            vec![crate::poly::Monomial {
                powers: vec![2],
                coeff: 0.8,
            }],
        )]);
        let report = variant_gap(
            &setup,
            &u,
            &field,
            &QuadratureMeasure::midpoint(),
            &QuadratureMeasure::midpoint(),
            &[1.0, 0.5, 0.25, 0.125],
            32,
        )
        .unwrap();
        for (_, g) in &report.gaps {
            assert_eq!(*g, 0.0);
        }
        assert!(report.slope.is_none());
    }

    #[test]
    fn variant_gap_affine_fields_vanish_across_measures() {
        let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
        let u = Bump::new(vec![0.0], 0.5, false);
        let affine = PotentialField::polynomial(vec![crate::poly::Polynomial::linear(
            1, 0, 1.1,
        )]);
        let report = variant_gap(
            &setup,
            &u,
            &affine,
            &QuadratureMeasure::lebesgue(),
            &QuadratureMeasure::midpoint(),
            &[1.0, 0.5, 0.25, 0.125],
            32,
        )
        .unwrap();
        for (_, g) in &report.gaps {
            assert!(*g <= 1e-10, "affine gap {g}");
        }
    }

    #[test]
    fn gauge_drift_is_negligible() {
        let setup = LabSetup::new(1, 0.5, 2.0, 1.0);
        let field = PotentialField::landau_halfspace(2, 1.0);
        let u = Bump::new(vec![0.0], 0.45, false);
        let datum = HalfSpaceProduct::new(Bump::new(vec![0.0], 0.45, false), 0.6);
        let phi = crate::poly::Polynomial::new(
            2,
            vec![
                crate::poly::Monomial {
                    powers: vec![2, 1],
                    coeff: 0.35,
                },
                crate::poly::Monomial {
                    powers: vec![1, 0],
                    coeff: -0.6,
                },
            ],
        );
        let gauge = crate::field::GaugeFunction::polynomial(phi);
        let drift = gauge_check(&setup, &field, &u, &datum, &gauge, 20, 16).unwrap();
        assert!(drift.max() < 1e-8, "{drift:?}");
    }
}
