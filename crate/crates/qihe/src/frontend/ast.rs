//! Syntax tree for the supported Verilog subset, faithful to the source;
//! desugaring happens in lowering, not here.

use std::rc::Rc;

use crate::bitvec::LogicVec;
use crate::ir::{CaseKind, Dir, NetKind};

/// A source position carried through elaboration for locations in
/// diagnostics and `loc` attributes.
#[derive(Clone, Debug)]
pub(crate) struct Pos {
    pub file: Rc<str>,
    pub line: u32,
}

/// A parsed module declaration.
#[derive(Clone, Debug)]
pub(crate) struct ModuleAst {
    pub name: String,
    pub pos: Pos,
    /// Header port order; resolves positional connections.
    pub port_order: Vec<String>,
    pub items: Vec<Item>,
}

/// Kind of a declared signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum DeclKind {
    Net(NetKind),
    Reg,
}

/// One body or header item.
#[derive(Clone, Debug)]
pub(crate) enum Item {
    /// wire/reg/input/output declaration line (one per declared name).
    Decl(DeclAst),
    /// parameter / localparam (one per declared name).
    Param(ParamAst),
    /// `assign lhs = rhs;`
    Assign(AssignAst),
    Always(AlwaysAst),
    Initial(InitialAst),
    Instance(InstanceAst),
    /// Gate primitive such as `and g (o, a, b);`.
    Gate(GateAst),
}

/// A declaration of one name. Direction-only declarations (`input a;`)
/// leave `kind` as None and merge with a same-name wire/reg declaration,
/// defaulting to wire.
#[derive(Clone, Debug)]
pub(crate) struct DeclAst {
    pub name: String,
    pub pos: Pos,
    pub dir: Option<Dir>,
    pub kind: Option<DeclKind>,
    pub signed: bool,
    /// Packed range `[msb:lsb]`.
    pub range: Option<(Expr, Expr)>,
    /// Unpacked (array) range `[lo:hi]`.
    pub array: Option<(Expr, Expr)>,
    /// `wire w = expr;` initializer, desugared to a continuous assign.
    pub init: Option<Expr>,
}

#[derive(Clone, Debug)]
pub(crate) struct ParamAst {
    pub name: String,
    pub pos: Pos,
    pub value: Expr,
    /// localparam: not overridable at instantiation.
    pub local: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct AssignAst {
    pub pos: Pos,
    pub lhs: Expr,
    pub rhs: Expr,
}

#[derive(Clone, Debug)]
pub(crate) struct AlwaysAst {
    pub pos: Pos,
    pub body: Stmt,
}

#[derive(Clone, Debug)]
pub(crate) struct InitialAst {
    pub pos: Pos,
    pub body: Stmt,
}

#[derive(Clone, Debug)]
pub(crate) struct InstanceAst {
    pub pos: Pos,
    pub module: String,
    pub name: String,
    /// `#(...)` parameter overrides: positional (None keys) or named.
    pub params: Vec<(Option<String>, Expr)>,
    pub conns: Vec<Connection>,
}

/// One port connection. Positional entries have no name; named entries
/// come from `.port(expr)`. `expr` is None for explicitly unconnected
/// ports (`.port()` or an empty positional slot).
#[derive(Clone, Debug)]
pub(crate) struct Connection {
    pub name: Option<String>,
    pub expr: Option<Expr>,
    pub pos: Pos,
}

/// Gate primitive flavors in the subset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum GateKind {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Buf,
    Not,
}

impl GateKind {
    pub fn from_keyword(kw: &str) -> Option<GateKind> {
        Some(match kw {
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "xor" => GateKind::Xor,
            "nand" => GateKind::Nand,
            "nor" => GateKind::Nor,
            "xnor" => GateKind::Xnor,
            "buf" => GateKind::Buf,
            "not" => GateKind::Not,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct GateAst {
    pub pos: Pos,
    pub kind: GateKind,
    /// Terminals in source order: outputs first, then inputs (buf/not may
    /// list several outputs; the rest have one output and 2+ inputs).
    pub terms: Vec<Expr>,
}

/// Procedural statements.
#[derive(Clone, Debug)]
pub(crate) enum Stmt {
    Block(Vec<Stmt>),
    If {
        pos: Pos,
        cond: Expr,
        then_s: Box<Stmt>,
        else_s: Option<Box<Stmt>>,
    },
    Case {
        pos: Pos,
        kind: CaseKind,
        subject: Expr,
        /// Each arm: its patterns and body.
        arms: Vec<(Vec<Expr>, Stmt)>,
        default: Option<Box<Stmt>>,
    },
    Assign {
        pos: Pos,
        blocking: bool,
        lhs: Expr,
        rhs: Expr,
    },
    /// `@(...) stmt?` or `#n stmt?`.
    Timed {
        pos: Pos,
        control: TimingAst,
        body: Option<Box<Stmt>>,
    },
    /// `$name(args);`
    Syscall {
        pos: Pos,
        name: String,
        args: Vec<Expr>,
    },
    Empty,
}

#[derive(Clone, Debug)]
pub(crate) enum TimingAst {
    Delay(Expr),
    Events(Vec<EventAst>),
    /// `@*` / `@(*)`: all identifiers read by the governed statement.
    Star,
}

#[derive(Clone, Debug)]
pub(crate) struct EventAst {
    pub edge: EdgeAst,
    pub expr: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum EdgeAst {
    Any,
    Pos,
    Neg,
}

/// Expressions. Every variant keeps its position for error reports.
#[derive(Clone, Debug)]
pub(crate) enum Expr {
    Ident(String, Pos),
    Sized(LogicVec, Pos),
    Unsized(u64, Pos),
    Str(String, Pos),
    Real(f64, Pos),
    Unary(VUnary, Box<Expr>, Pos),
    Binary(VBinary, Box<Expr>, Box<Expr>, Pos),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>, Pos),
    Concat(Vec<Expr>, Pos),
    /// `{n{parts...}}`.
    Repl(Box<Expr>, Vec<Expr>, Pos),
    /// `base[index]`: array index or bit select, decided by base type.
    Index(Box<Expr>, Box<Expr>, Pos),
    /// `base[msb:lsb]`.
    Range(Box<Expr>, Box<Expr>, Box<Expr>, Pos),
    /// `base[start +: width]` (up true) or `[start -: width]`.
    IndexedRange {
        base: Box<Expr>,
        start: Box<Expr>,
        width: Box<Expr>,
        up: bool,
        pos: Pos,
    },
}

impl Expr {
    pub fn pos(&self) -> &Pos {
        match self {
            Expr::Ident(_, p)
            | Expr::Sized(_, p)
            | Expr::Unsized(_, p)
            | Expr::Str(_, p)
            | Expr::Real(_, p)
            | Expr::Unary(_, _, p)
            | Expr::Binary(_, _, _, p)
            | Expr::Ternary(_, _, _, p)
            | Expr::Concat(_, p)
            | Expr::Repl(_, _, p)
            | Expr::Index(_, _, p)
            | Expr::Range(_, _, _, p)
            | Expr::IndexedRange { pos: p, .. } => p,
        }
    }
}

/// Verilog unary operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum VUnary {
    Plus,
    Minus,
    Not,
    LogicNot,
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
}

/// Verilog binary operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum VBinary {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    And,
    Or,
    Xor,
    Xnor,
    LogicAnd,
    LogicOr,
    Eq,
    Neq,
    CaseEq,
    CaseNeq,
    Lt,
    Gt,
    Le,
    Ge,
    Shl,
    Shr,
    Ashl,
    Ashr,
}
