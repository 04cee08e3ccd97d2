//! Entanglement concentration of two-mode squeezed vacuum by local photon
//! subtraction, with optional local displacement or squeezing, simulated in
//! a truncated Fock basis.

pub mod cli;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod measures;
pub mod optimize;
pub mod protocols;
pub mod states;
pub mod validate;

pub use error::{Error, Result};
pub use measures::{log_negativity, EntanglementReport};
pub use optimize::{optimize_displacement, Optimum, SweepGrid};
pub use protocols::{
    run_bruteforce_oracle, run_realistic, ConcentrationOutcome, DetectorModel, LocalOp, ProtocolParams,
};
