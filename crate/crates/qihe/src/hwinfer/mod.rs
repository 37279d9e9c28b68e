//! Hardware-structure inference: clock-tree membership, register
//! classification with driving clocks, and reset-logic extraction.
//!
//! These analyses predict the physical role of signals from the elaborated
//! IR alone, so downstream clients can reason about registers, their
//! driving clocks, and their reset logic without vendor metadata.

mod clocks;
mod regs;
mod resets;

pub use clocks::{infer_clocks, ClockInfo, ClockSet};
pub use regs::{infer_regs, RegInfo, RegMap};
pub use resets::{infer_resets, Confidence, Polarity, ResetInfo, ResetMap};

use crate::dataflow::{CfgSet, ConstMap, DefChain, Guards};
use crate::manager::{AnalysisDescriptor, AnalysisOutput, Manager, ManagerError};

/// Registers the hardware-inference analyses.
pub fn register(m: &mut Manager) -> Result<(), ManagerError> {
    m.register(
        AnalysisDescriptor::new(
            "clocks",
            &["fi-def-chain", "reaching-guards"],
            true,
            |input| {
                let chain = input.dep_arc::<DefChain>("fi-def-chain");
                let guards = input.dep_arc::<Guards>("reaching-guards");
                Ok(AnalysisOutput::new(infer_clocks(input.design(), chain, guards)))
            },
        )
        .with_dump::<ClockSet>(clocks::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("regs", &["reaching-guards", "clocks"], true, |input| {
            let guards = input.dep_arc::<Guards>("reaching-guards");
            let clocks = input.dep_arc::<ClockSet>("clocks");
            let regs = infer_regs(input.design(), guards, clocks);
            let warnings = regs.warnings.clone();
            Ok(AnalysisOutput::new(regs).with_reports(warnings))
        })
        .with_dump::<RegMap>(regs::dump),
    )?;
    m.register(
        AnalysisDescriptor::new(
            "resets",
            &["regs", "fi-const-prop", "cfg"],
            true,
            |input| {
                let regs = input.dep_arc::<RegMap>("regs");
                let consts = input.dep_arc::<ConstMap>("fi-const-prop");
                let cfg = input.dep_arc::<CfgSet>("cfg");
                Ok(AnalysisOutput::new(infer_resets(input.design(), regs, consts, cfg)))
            },
        )
        .with_dump::<ResetMap>(resets::dump),
    )?;
    Ok(())
}
