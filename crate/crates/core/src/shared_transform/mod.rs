//! Alternating minimization of the coupled shared-transform objective and
//! encoding through the learned transform.
//!
//! Each outer iteration runs three exact block updates: the transform (both
//! domains stacked side by side), the skull codes and the face codes.

mod codes;
mod fit;
mod model;

pub use codes::{update_code_face, update_code_skull};
pub use fit::{fit, fit_detailed, CodeSchedule, FitReport, FitState, InitPolicy};
pub use model::{encode, SharedTransformModel};
