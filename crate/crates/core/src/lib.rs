//! Coordinate-chart exterior calculus and numerical certification of
//! contact structures on exact symplectic fibrations.
//!
//! The crate is organized bottom-up:
//!
//! * [`expr`], [`parse`], [`chart`], [`form`], [`map`]: symbolic exterior
//!   calculus on coordinate charts.
//! * [`grid`], [`contact`]: sample grids and pointwise certification of
//!   contact, symplectic and Liouville conditions.
//! * [`bundle`]: the cut-off patching construction `σ = Kμ + β + f dΨ`
//!   on a partitioned base, with the search for an admissible `K`.
//! * [`isotopy`]: one-parameter families of bundle contact forms.
//! * [`fiber_sum`]: the annulus gluing of two bundles along fibers.
//! * [`harness`]: scenario documents, task runner and reports.

pub mod bundle;
pub mod chart;
pub mod contact;
pub mod error;
pub mod expr;
pub mod fiber_sum;
pub mod form;
pub mod grid;
pub mod harness;
pub mod isotopy;
pub mod map;
pub mod parse;

pub use chart::Chart;
pub use error::{Error, Result};
pub use expr::ScalarExpr;
pub use form::{DifferentialForm, FormValue, VectorField};
pub use map::SmoothMap;
