//! Finite-field Fourier analysis, pinned line families and third-moment
//! energies, with exact checks of the sum-product bound
//! `|BA + C|, |B(A + C)| >> min{q, sqrt(|B||C|) |A| / sqrt(q)}` on concrete
//! instances over `F_q`.

pub mod bounds;
pub mod error;
pub mod explorer;
pub mod field;
pub mod setstats;
pub mod spectral;
pub mod verify;

pub use bounds::{verify_instance, BoundReport, Mode};
pub use error::{Error, Result};
pub use field::{make_field, Elem, FieldSpec};
pub use setstats::{LineFamily, RepFunction, SubsetFq};
pub use spectral::{DensityFn, Spectrum};
