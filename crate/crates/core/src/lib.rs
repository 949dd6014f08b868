//! Computable layer of differential algebraic K-theory of number rings: point classes over
//! orders in number fields, secondary classes of torsion modules, Reidemeister torsion and
//! polylogarithmic torsion forms of cyclotomic circle bundles.

pub mod circlebundle;
pub mod error;
pub mod flatmodel;
pub mod linalg;
pub mod modtors;
pub mod mp;
pub mod numfield;
pub mod poly;
pub mod polylog;
pub mod rtorsion;

pub use error::{Error, Result};
pub use flatmodel::{FormElement, KContext, PointClass, RegulatorLattice, TorusElement};
pub use mp::Precision;
pub use numfield::{FieldDescriptor, FieldElement, NumberField};
