//! Numerical kernels for magnetic Sobolev spaces on the half-space.
//!
//! The library evaluates the objects that appear in gauge-invariant trace
//! theory for magnetic Sobolev spaces:
//!
//! * vector potentials `A`, their exterior derivatives `dA`, and gauge
//!   transformations `A ↦ A + ∇Φ` ([`field`]);
//! * line-integral phase potentials `I_A(X, Y)` along segments, against
//!   quadrature measures on `[0, 1]`, and along great-circle geodesics
//!   ([`potential`], [`geometry`]);
//! * magnetic Gagliardo seminorms
//!   `|u|^p = ∬ |e^{iI}u(y) − u(x)|^p / |y−x|^{d+sp}` and weighted covariant
//!   Sobolev norms on graded half-space grids ([`norms`]);
//! * the explicit mollifier-with-phase extension operator, the boundary
//!   trace, and whole-space extensions ([`extension`]);
//! * empirical verification of trace/extension inequalities, magnetic
//!   Poincaré scaling, and seminorm-variant gap laws ([`lab`]).
//!
//! Everything is deterministic: quadratures sum in fixed order with
//! compensated summation, and the Monte Carlo pair sampler is
//! counter-seeded, so results are independent of thread count.

pub mod error;
pub mod extension;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod lab;
pub mod measure;
pub mod norms;
pub mod numeric;
pub mod pairquad;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod testfn;

pub use error::{Error, Result};
pub use num_complex;
pub use field::{GaugeFunction, PotentialField, TwoForm};
pub use grid::{BoundaryGrid, GridFunction, HalfSpaceGrid};
pub use measure::QuadratureMeasure;
pub use quad::SegmentRule;
