pub mod collective;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod rates;
pub mod scenario;
pub mod spectrum;
pub mod steady;

pub use error::{Error, Result};
pub use params::{Branch, ModulationTarget, SystemParams};
