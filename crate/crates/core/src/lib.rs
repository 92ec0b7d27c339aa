//! Metric-free distributional differential forms on four-dimensional spacetime.

pub mod chains;
pub mod chart;
pub mod conservation;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod levelset;
pub mod parse;
pub mod quadrature;
pub mod scenarios;
pub mod singular;

pub use chains::{
    collapse_integrate, integrate_regular, mollified_integrate, mollified_ladder, total_charge,
    transversality_check, Chain, CollapseResult, QuadratureSpec,
};
pub use error::{Error, Result};
pub use exterior::{dualize3, pullback, LeviCivita, Parity, Region, RegularForm, ScalarField, SmoothMap};
pub use expr::{Expr, Func};
pub use parse::{parse_expr, ParseError};
pub use singular::{
    d_singular, delta, gauge_reduce, point_current, string_current, surface_current, wedge_singular,
    weak_equal, DeltaFactor, SingularForm,
};
