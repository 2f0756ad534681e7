//! Review service for choosing between two candidate masks per sample:
//! the two castings of RotMaybe, or ground truth against a model prediction
//! shown blind. Decisions are event-logged and can be applied as a new mask
//! variant of the dataset.

pub mod apply;
pub mod clock;
pub mod error;
pub mod http;
pub mod model;
pub mod service;
pub mod state;

pub use apply::{plan_variant, write_variant, ApplySummary, VariantPlan};
pub use clock::{Clock, SteppingClock, SystemClock};
pub use error::{CurationError, Result};
pub use service::{CreateSession, DecisionRequest, Service, ServiceConfig};
pub use state::{DecisionLog, Event, State};
