//! Exact differential polynomial algebra in m commuting derivations over
//! Q(z1..zm), with truncated power-series jets and a formal solver for PDE
//! systems in Cauchy-Kovalevskaya normal form.
//!
//! The crate is organized bottom-up:
//! - [`multiindex`]: exponent vectors and the graded lexicographic order
//! - [`poly`], [`ratfunc`]: the exact coefficient field Q(z1..zm)
//! - [`series`]: truncated multivariate power series with certified order
//! - [`diffpoly`]: differential polynomials, leaders, separants, jets
//! - [`derivation`]: integer changes of the derivation basis
//! - [`reduction`]: rewriting away excess d1-derivatives modulo a relation
//! - [`ck`]: point jets, Taylor expansion, prolongation, and the solver
//! - [`parse`], [`sysfile`], [`document`], [`pipeline`]: text frontend
//!
//! All arithmetic is exact rational arithmetic; nothing is ever rounded.
//! Every value is immutable and operations return fresh values, so the
//! types are safe to share across threads.

pub mod ck;
pub mod derivation;
pub mod diffpoly;
pub mod document;
pub mod error;
pub mod multiindex;
pub mod parse;
pub mod pipeline;
pub mod poly;
pub mod ratfunc;
pub mod reduction;
pub mod series;
pub mod sysfile;

pub use ck::{
    ck_solve, extend_dimension, jet_prolongation, residual, taylor_homomorphism,
    validate_normal_form, GeneratorSpec, InitialData, PDESystem, PointEvaluation, ResidualRecord,
    Solution,
};
pub use derivation::{
    coordinate_change_series, find_integral_change, symbolic_lambda_separant, transform,
    DerivationMatrix, LambdaPoly, LambdaVector,
};
pub use diffpoly::{
    default_names, format_derivative_var, format_diffpoly, is_integral, prolongation_step,
    DerivativeVar, DiffMonomial, DiffPoly, DiffRationalFunction, ProlongationStep,
};
pub use document::{SeriesDocument, SERIES_FORMAT};
pub use error::{Error, Result};
pub use multiindex::{grlex_compare, indices_up_to, MultiIndex};
pub use parse::{parse_coefficient, parse_diff_rational, parse_diffpoly, parse_rational};
pub use poly::{MPoly, Rat};
pub use ratfunc::RatFunc;
pub use reduction::{fingen_generators, reduce_delta1, GeneratorSet, IntegralRelation};
pub use series::{expand_ratfunc, TruncatedSeries};
pub use sysfile::SystemFile;
