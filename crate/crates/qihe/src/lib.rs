//! Static analysis framework for a synthesizable subset of Verilog.
//!
//! The crate compiles Verilog into a hierarchical three-address-code IR,
//! then runs interdependent analyses over it: fundamental dataflow analyses
//! (control flow, def-use, flow-insensitive def chains, reaching guards,
//! process dependencies, bit-level constant propagation), hardware-structure
//! inference (clocks, registers, resets), and client analyses that detect
//! real hardware bugs (missing resets, unreachable states, process
//! deadlocks, X propagation, taint leaks, and several connectivity lints).
//!
//! Entry points:
//!
//! - [`frontend::compile`] turns `.v` sources into an [`ir::Design`].
//! - [`ir::parse_text`] / [`ir::emit_text`] read and write the `.qh` text
//!   form of the IR.
//! - [`manager::Manager`] plans and executes analyses by name; built-in
//!   analyses are registered by [`manager::builtin_manager`].
//! - [`cli`] implements the `qihe compile | run | list` commands used by the
//!   thin binary.
//!
//! The `examples/` directory contains one runnable example per major
//! capability; start with `examples/compile_to_ir.rs`.

pub mod bitvec;
pub mod cli;
pub mod clients;
pub mod dataflow;
pub mod frontend;
pub mod hwinfer;
pub mod ir;
pub mod manager;
pub mod report;

pub(crate) mod graph;
