//! Experiment configuration: one JSON document describing the field, the
//! test data, the grids, and the experiment-specific knobs.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use magsob::field::{GaugeFunction, PotentialField};
use magsob::lab::LabSetup;
use magsob::measure::MeasureTag;
use magsob::poly::{Monomial, Polynomial};
use magsob::quad::SegmentRule;
use magsob::testfn::{Bump, Gaussian, ModulatedBump, TestFunction};
use magsob::QuadratureMeasure;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero { dim: usize },
    Constant { values: Vec<f64> },
    /// `A = β(0, x₁, 0, …)`: boundary Landau gauge with `dA^∥ ≠ 0`.
    LandauBoundary { dim: usize, beta: f64 },
    /// `A = (−βt, 0, …)`: half-space Landau gauge, odd in `t`.
    #[serde(alias = "landau")]
    LandauHalfspace { dim: usize, beta: f64 },
    Polynomial { components: Vec<Vec<TermSpec>> },
}

impl FieldSpec {
    pub fn build(&self) -> anyhow::Result<PotentialField> {
        Ok(match self {
            FieldSpec::Zero { dim } => PotentialField::zero(*dim),
            FieldSpec::Constant { values } => PotentialField::constant(values.clone()),
            FieldSpec::LandauBoundary { dim, beta } => {
                PotentialField::landau_boundary(*dim, *beta)
            }
            FieldSpec::LandauHalfspace { dim, beta } => {
                PotentialField::landau_halfspace(*dim, *beta)
            }
            FieldSpec::Polynomial { components } => {
                if components.is_empty() {
                    bail!("field: polynomial needs at least one component");
                }
                let dim = components.len();
                let comps = components
                    .iter()
                    .map(|terms| {
                        Polynomial::new(
                            dim,
                            terms
                                .iter()
                                .map(|t| Monomial {
                                    powers: t.powers.clone(),
                                    coeff: t.coeff,
                                })
                                .collect(),
                        )
                    })
                    .collect();
                PotentialField::polynomial(comps)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    Bump {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        normalized: bool,
    },
    ModulatedBump {
        center: Vec<f64>,
        radius: f64,
        wavevector: Vec<f64>,
        #[serde(default)]
        normalized: bool,
    },
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl TestFunctionSpec {
    pub fn build(&self) -> TestFunction {
        match self {
            TestFunctionSpec::Bump {
                center,
                radius,
                normalized,
            } => TestFunction::Bump(Bump::new(center.clone(), *radius, *normalized)),
            TestFunctionSpec::ModulatedBump {
                center,
                radius,
                wavevector,
                normalized,
            } => TestFunction::Modulated(ModulatedBump::new(
                center.clone(),
                *radius,
                wavevector.clone(),
                *normalized,
            )),
            TestFunctionSpec::Gaussian {
                center,
                width,
                amplitude,
            } => TestFunction::Gaussian(Gaussian::new(
                center.clone(),
                *width,
                magsob::num_complex::Complex64::new(*amplitude, 0.0),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    #[serde(default = "default_t_count")]
    pub t_count: usize,
    /// Slab height; defaults to `max(1, 2β^{−1/2})`.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_grading")]
    pub grading: f64,
    /// The weight exponent is `γ = 1 − (1 − s)p`, derived from `(s, p)`;
    /// setting this overrides it.
    #[serde(default)]
    pub gamma_override: Option<f64>,
}

fn default_t_count() -> usize {
    32
}

fn default_grading() -> f64 {
    0.85
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "one")]
    pub rotor_strength: f64,
    #[serde(default = "default_base_point")]
    pub base_point: Vec<f64>,
    #[serde(default = "default_direction")]
    pub direction: Vec<f64>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

fn default_base_point() -> Vec<f64> {
    vec![0.15, 0.1]
}

fn default_direction() -> Vec<f64> {
    vec![0.6, 0.8]
}

fn default_radii() -> Vec<f64> {
    (0..6).map(|k| 0.32 * 0.5f64.powi(k)).collect()
}

impl Default for ChartSpec {
    fn default() -> Self {
        ChartSpec {
            radius: 1.0,
            rotor_strength: 1.0,
            base_point: default_base_point(),
            direction: default_direction(),
            radii: default_radii(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub beta_list: Option<Vec<f64>>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    /// Optional polynomial gauge `Φ`.
    #[serde(default)]
    pub gauge: Option<Vec<TermSpec>>,
    #[serde(default)]
    pub test_function: Option<TestFunctionSpec>,
    /// `t`-extent of the product datum used by trace-type experiments.
    #[serde(default = "default_t_extent")]
    pub datum_t_extent: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub mu: Option<String>,
    #[serde(default)]
    pub mu2: Option<String>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    /// Refinement plan as `(n, t_count)` pairs; defaults to
    /// `[(n, t_count), (3n/2, 3t_count/2)]`.
    #[serde(default)]
    pub levels: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_up_to")]
    pub up_to: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: String,
}

fn default_s() -> f64 {
    0.5
}

fn default_p() -> f64 {
    2.0
}

fn default_t_extent() -> f64 {
    0.5
}

fn default_up_to() -> usize {
    4
}

fn default_seed() -> u64 {
    42
}

fn default_output() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).context("parsing config JSON")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(0.0 < self.s && self.s < 1.0) {
            bail!("config field `s`: must lie in (0, 1), got {}", self.s);
        }
        if self.p < 1.0 {
            bail!("config field `p`: must be ≥ 1, got {}", self.p);
        }
        if self.grid.d == 0 || self.grid.d > 2 {
            bail!("config field `grid.d`: boundary dimension must be 1 or 2");
        }
        if self.grid.n < 8 {
            bail!("config field `grid.n`: need at least 8 points per axis");
        }
        if !(0.0 < self.grid.grading && self.grid.grading < 1.0) {
            bail!("config field `grid.grading`: ratio must lie in (0, 1)");
        }
        if let Some(gamma) = self.grid.gamma_override {
            if gamma <= -1.0 {
                bail!("config field `grid.gamma_override`: need γ > −1");
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0)
    }

    pub fn measure(&self, name: &Option<String>) -> anyhow::Result<QuadratureMeasure> {
        let tag = match name.as_deref() {
            None | Some("lebesgue") => MeasureTag::Lebesgue,
            Some("midpoint") => MeasureTag::Midpoint,
            Some("endpoints") => MeasureTag::Endpoints,
            Some("simpson") => MeasureTag::Simpson,
            Some(other) => bail!("config field `mu`: unknown measure `{other}`"),
        };
        Ok(QuadratureMeasure::named(tag))
    }

    pub fn setup(&self, beta: f64) -> LabSetup {
        let mut setup = LabSetup::new(self.grid.d, self.s, self.p, beta);
        setup.extent = self.grid.extent;
        setup.grading = self.grid.grading;
        setup.seed = self.seed;
        setup.rule = SegmentRule::default();
        setup.gamma_override = self.grid.gamma_override;
        setup.t_max_override = self.grid.t_max;
        setup
    }

    pub fn levels(&self, multiplier: f64) -> Vec<(usize, usize)> {
        let scale = |v: usize| ((v as f64 * multiplier).round() as usize).max(8);
        match &self.levels {
            Some(levels) => levels
                .iter()
                .map(|&(n, t)| (scale(n), scale(t)))
                .collect(),
            None => {
                let n = scale(self.grid.n);
                let t = scale(self.grid.t_count);
                vec![(n, t), (n * 3 / 2, t * 3 / 2)]
            }
        }
    }

    pub fn gauge_function(&self, dim: usize) -> anyhow::Result<Option<GaugeFunction>> {
        match &self.gauge {
            None => Ok(None),
            Some(terms) => {
                let poly = Polynomial::new(
                    dim,
                    terms
                        .iter()
                        .map(|t| {
                            if t.powers.len() != dim {
                                bail!(
                                    "config field `gauge`: term arity {} != dim {dim}",
                                    t.powers.len()
                                );
                            }
                            Ok(Monomial {
                                powers: t.powers.clone(),
                                coeff: t.coeff,
                            })
                        })
                        .collect::<anyhow::Result<Vec<_>>>()?,
                );
                Ok(Some(GaugeFunction::polynomial(poly)))
            }
        }
    }

    /// Canonical JSON used for the parameter hash (field order is fixed
    /// by the struct definition).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
