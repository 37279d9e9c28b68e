//! Four-valued bit vectors and their abstract counterparts.
//!
//! [`LogicVec`] is the concrete value domain: a fixed-width vector of
//! [`LogicBit`]s (`0`, `1`, `x`, `z`) with Verilog evaluation semantics for
//! the full operator set of the IR ([`eval_unop`], [`eval_binop`],
//! [`eval_mux`], [`select`], widening and casts).
//!
//! [`AbsVec`] is the abstract domain used by constant propagation: one
//! [`AbsBit`] per position, drawn from the lattice
//!
//! ```text
//!         T
//!      / / \ \
//!     X B   Z \        B = {0,1}
//!     |/ \  |  \       X and Z are NOT below B
//!     0    1    |
//!      \   |   /
//!        U (bottom)
//! ```
//!
//! with [`abs_join`], the transfer functions ([`abs_transfer`] and the
//! per-shape functions it dispatches to), and [`may_equal`].

mod abs;
mod logic;

pub use abs::{
    abs_binop, abs_cast, abs_join, abs_mux, abs_select, abs_sext, abs_transfer, abs_unop,
    abs_zext, may_equal, AbsBit, AbsVec, TransferOp,
};
pub use logic::{
    eval_binop, eval_cast, eval_mux, eval_select, eval_sext, eval_unop, eval_zext, select,
    BinaryOp, BitvecError, LogicBit, LogicVec, UnaryOp,
};
