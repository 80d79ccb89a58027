//! Equisingularity of reduced plane curve singularities over fields of
//! arbitrary characteristic: resolution trees, first-order deformation
//! spaces, and equations of the (weak) equisingular stratum in a
//! semiuniversal deformation.

pub mod coeffield;
pub mod corpus;
pub mod error;
pub mod hensel;
pub mod linalg;
pub mod localalg;
pub mod report;
pub mod resolution;
pub mod series;
pub mod spec;
pub mod strata;
pub mod tangent;
pub mod upoly;

pub use coeffield::{make_field, Elem, Field, FieldElem};
pub use error::{Error, Result};
pub use resolution::{resolve, resolve_with, NumericInvariants, ResolutionTree, ResolveOptions};
pub use series::{BiSeries, Branch, UniSeries};
pub use spec::{parse_spec, CurveInput, CurveSpec};
pub use strata::{semiuniversal_family, stratum_report, wes_conditions, wes_dimension, DeformationFamily, StratumReport, WesConditions};
pub use tangent::{t1_es_suite, EsTangentReport};
