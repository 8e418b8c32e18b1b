//! The experiment registry: names, one-line descriptions, and the config
//! keys each experiment requires beyond the common block.

pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub required_keys: &'static [&'static str],
}

/// Sorted lexicographically by name.
pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "constant_field_trace",
        description: "trace estimate for constant dA via λ-shifted seminorms plus the Poincaré term",
        required_keys: &["field", "test_function", "grid", "s", "p"],
    },
    ExperimentInfo {
        name: "covariant_ftc",
        description: "residual of the covariant fundamental theorem of calculus on random segments",
        required_keys: &["field", "test_function", "seed"],
    },
    ExperimentInfo {
        name: "extension_ineq",
        description: "weighted covariant energy of the phase extension against seminorm + β^{sp/2}·L^p",
        required_keys: &["field", "test_function", "grid", "beta", "s", "p"],
    },
    ExperimentInfo {
        name: "gauge_check",
        description: "relative drift of all gauge-invariant quantities under a polynomial gauge",
        required_keys: &["field", "test_function", "grid"],
    },
    ExperimentInfo {
        name: "moments",
        description: "exact moment table of a quadrature measure",
        required_keys: &["mu", "up_to"],
    },
    ExperimentInfo {
        name: "poincare",
        description: "fractional magnetic Poincaré scaling: seminorm growth in β for a Landau family",
        required_keys: &["beta_list", "test_function", "grid", "s", "p"],
    },
    ExperimentInfo {
        name: "reflection_demo",
        description: "phase-based vs reflection extension energies under an odd-in-t field",
        required_keys: &["field", "test_function", "grid", "beta"],
    },
    ExperimentInfo {
        name: "seminorm",
        description: "magnetic Gagliardo seminorm of a test function with a refinement trace",
        required_keys: &["field", "test_function", "grid", "s", "p", "mu"],
    },
    ExperimentInfo {
        name: "stokes_triangle",
        description: "circulation vs curvature flux residual on random triangles",
        required_keys: &["seed"],
    },
    ExperimentInfo {
        name: "trace_ineq",
        description: "boundary seminorm against the weighted covariant half-space energy",
        required_keys: &["field", "test_function", "grid", "beta", "s", "p"],
    },
    ExperimentInfo {
        name: "transport_gap",
        description: "chart-segment vs geodesic potential gap on the stereographic sphere chart",
        required_keys: &["chart"],
    },
    ExperimentInfo {
        name: "variant_gap",
        description: "seminorm gap between two quadrature measures under field scaling",
        required_keys: &["field", "test_function", "grid", "mu", "mu2", "scales"],
    },
    ExperimentInfo {
        name: "whole_space_ext",
        description: "two-sided extension: boundary agreement and two-sided vs one-sided energy",
        required_keys: &["field", "test_function", "grid", "beta"],
    },
];

pub fn lookup(name: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}
