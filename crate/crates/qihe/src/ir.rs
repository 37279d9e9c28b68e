//! The hierarchical IR: designs, modules, processes, and three-address
//! statements, with a canonical text form (`.qh`).
//!
//! A design is a flat list of modules; hierarchy is expressed by `inst`
//! items naming other modules. Processes hold straight-line three-address
//! statements with labels and gotos; there are no nested expressions.
//! [`emit_text`] and [`parse_text`] convert to and from the text form and
//! round-trip exactly, [`validate`] checks structural invariants, and
//! [`resolve`] walks hierarchical names.

mod emit;
mod parse;
mod resolve;
mod types;
mod validate;

pub use emit::emit_text;
pub use parse::parse_text;
pub use resolve::{resolve, Entity, Resolved};
pub use types::{
    Access, Assign, AssignOp, AttrMap, AttrValue, CaseKind, Compute, ConstDecl, Design, Dir,
    Edge, EventExpr, Func, Guard, Inst, IrError, Module, NetDecl, NetKind, Proc, Rvalue,
    Selector, Statement, Stmt, Type, VarDecl,
};
pub use validate::validate;
