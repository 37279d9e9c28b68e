//! IR data types shared by the emitter, parser, and analyses.

use std::fmt;

use crate::bitvec::{BinaryOp, LogicVec, UnaryOp};

/// Errors from parsing, validation, and name resolution.
#[derive(Debug, thiserror::Error)]
pub enum IrError {
    #[error("{file}:{line}:{col}: syntax error: {msg}")]
    Syntax { file: String, line: u32, col: u32, msg: String },
    #[error("invalid design: {0}")]
    Invalid(String),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown instance `{inst}` in module `{module}`")]
    UnknownInstance { module: String, inst: String },
    #[error("unknown name `{name}` in module `{module}`")]
    UnknownName { module: String, name: String },
}

/// An attribute value: quoted text, a sized bit vector, or a real number.
#[derive(Clone, Debug, PartialEq)]
pub enum AttrValue {
    Text(String),
    Bits(LogicVec),
    Real(f64),
}

impl AttrValue {
    /// The text payload, when the value is text.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> AttrValue {
        AttrValue::Text(s.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> AttrValue {
        AttrValue::Text(s)
    }
}

/// An insertion-ordered key/value attribute map.
///
/// Key order is preserved so emission reproduces declaration order; inserting
/// an existing key replaces its value in place.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AttrMap(Vec<(String, AttrValue)>);

impl AttrMap {
    pub fn new() -> AttrMap {
        AttrMap::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<AttrValue>) {
        let key = key.into();
        let value = value.into();
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&AttrValue> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// The value for `key` when present and text.
    pub fn get_text(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(AttrValue::as_text)
    }

    pub fn remove(&mut self, key: &str) -> Option<AttrValue> {
        let i = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(i).1)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AttrValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Parses a `loc="file:line"` attribute into its parts.
    pub fn loc(&self) -> Option<(&str, u32)> {
        let text = self.get_text("loc")?;
        let (file, line) = text.rsplit_once(':')?;
        Some((file, line.parse().ok()?))
    }

    /// Sets the `loc` attribute from its parts.
    pub fn set_loc(&mut self, file: &str, line: u32) {
        self.insert("loc", format!("{file}:{line}"));
    }
}

impl<K: Into<String>, V: Into<AttrValue>> FromIterator<(K, V)> for AttrMap {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> AttrMap {
        let mut m = AttrMap::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

/// A value type: bit vector, real, or array of a scalar element type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bv { width: usize, signed: bool },
    Real,
    Array { elem: Box<Type>, len: usize },
}

impl Type {
    pub fn bv(width: usize) -> Type {
        Type::Bv { width, signed: false }
    }

    pub fn sbv(width: usize) -> Type {
        Type::Bv { width, signed: true }
    }

    /// The bit width of a scalar bit-vector type.
    pub fn width(&self) -> Option<usize> {
        match self {
            Type::Bv { width, .. } => Some(*width),
            _ => None,
        }
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, Type::Bv { signed: true, .. })
    }

    /// The element type of an array, or the type itself for scalars.
    pub fn element(&self) -> &Type {
        match self {
            Type::Array { elem, .. } => elem,
            other => other,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bv { width, signed: false } => write!(f, "bv<{width}>"),
            Type::Bv { width, signed: true } => write!(f, "sbv<{width}>"),
            Type::Real => write!(f, "real"),
            Type::Array { elem, len } => write!(f, "{elem}[{len}]"),
        }
    }
}

/// Port direction. Presence of a direction is what makes a declaration a
/// port; the text form writes the `port` prefix plus a `dir` attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Input,
    Output,
}

impl Dir {
    pub fn keyword(self) -> &'static str {
        match self {
            Dir::Input => "input",
            Dir::Output => "output",
        }
    }
}

/// Net kinds from the Verilog subset. `Wand` and `Wor` resolve multiple
/// drivers by and/or; the others behave as plain wires for analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NetKind {
    Wire,
    Wand,
    Wor,
    Uwire,
    Tri,
    Tri0,
    Tri1,
    Triand,
    Trior,
    Supply0,
    Supply1,
}

impl NetKind {
    pub const ALL: [NetKind; 11] = [
        NetKind::Wire,
        NetKind::Wand,
        NetKind::Wor,
        NetKind::Uwire,
        NetKind::Tri,
        NetKind::Tri0,
        NetKind::Tri1,
        NetKind::Triand,
        NetKind::Trior,
        NetKind::Supply0,
        NetKind::Supply1,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            NetKind::Wire => "wire",
            NetKind::Wand => "wand",
            NetKind::Wor => "wor",
            NetKind::Uwire => "uwire",
            NetKind::Tri => "tri",
            NetKind::Tri0 => "tri0",
            NetKind::Tri1 => "tri1",
            NetKind::Triand => "triand",
            NetKind::Trior => "trior",
            NetKind::Supply0 => "supply0",
            NetKind::Supply1 => "supply1",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<NetKind> {
        NetKind::ALL.into_iter().find(|k| k.keyword() == kw)
    }
}

/// A net declaration, optionally a port.
#[derive(Clone, Debug, PartialEq)]
pub struct NetDecl {
    pub id: String,
    pub kind: NetKind,
    pub ty: Type,
    pub dir: Option<Dir>,
    pub attrs: AttrMap,
}

/// A variable declaration, optionally a port. Variables mark procedural
/// assignment targets; whether one is a physical register is decided by
/// analysis, not declaration.
#[derive(Clone, Debug, PartialEq)]
pub struct VarDecl {
    pub id: String,
    pub ty: Type,
    pub dir: Option<Dir>,
    pub attrs: AttrMap,
}

/// A named constant with a fully defined value.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstDecl {
    pub id: String,
    pub value: LogicVec,
    pub attrs: AttrMap,
}

/// A module instantiation. Port connections are not stored here; the
/// frontend lowers each connection to its own continuous-assignment Proc
/// marked with a `portConn` attribute.
#[derive(Clone, Debug, PartialEq)]
pub struct Inst {
    pub id: String,
    pub module: String,
    pub attrs: AttrMap,
}

/// A constant-range or indexed part-select.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Selector {
    /// `[msb:lsb]` with msb >= lsb.
    Range(usize, usize),
    /// `[base +: width]`.
    IndexedUp(String, usize),
    /// `[base -: width]`.
    IndexedDown(String, usize),
}

/// A storage access: a local or hierarchical base, an optional array index
/// (an identifier), and an optional part-select.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Access {
    /// Path segments; one segment is a local access, more are hierarchical.
    pub path: Vec<String>,
    pub index: Option<String>,
    pub sel: Option<Selector>,
}

impl Access {
    pub fn local(id: impl Into<String>) -> Access {
        Access { path: vec![id.into()], index: None, sel: None }
    }

    pub fn hier(path: Vec<String>) -> Access {
        Access { path, index: None, sel: None }
    }

    /// True for a bare local identifier with no index or select.
    pub fn is_plain(&self) -> bool {
        self.path.len() == 1 && self.index.is_none() && self.sel.is_none()
    }

    pub fn is_hier(&self) -> bool {
        self.path.len() > 1
    }

    /// The base identifier (last path segment is the leaf name; for local
    /// accesses it is the only segment).
    pub fn leaf(&self) -> &str {
        self.path.last().expect("access path nonempty")
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.join("."))?;
        if let Some(ix) = &self.index {
            write!(f, "[{ix}]")?;
        }
        match &self.sel {
            Some(Selector::Range(m, n)) => write!(f, "[{m}:{n}]")?,
            Some(Selector::IndexedUp(b, w)) => write!(f, "[{b}+:{w}]")?,
            Some(Selector::IndexedDown(b, w)) => write!(f, "[{b}-:{w}]")?,
            None => {}
        }
        Ok(())
    }
}

/// A computing right-hand side: exactly one operator applied to identifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Compute {
    Unary(UnaryOp, String),
    Binary(BinaryOp, String, String),
    /// `sel ? then : else`.
    Mux(String, String, String),
    Zext(String, Type),
    Sext(String, Type),
    Cast(String, Type),
}

impl Compute {
    /// Identifiers read by this computation, in operand order.
    pub fn operands(&self) -> Vec<&str> {
        match self {
            Compute::Unary(_, a) => vec![a],
            Compute::Binary(_, a, b) => vec![a, b],
            Compute::Mux(s, t, e) => vec![s, t, e],
            Compute::Zext(a, _) | Compute::Sext(a, _) | Compute::Cast(a, _) => vec![a],
        }
    }
}

/// Assignment operator: procedural blocking, procedural non-blocking, or
/// continuous drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssignOp {
    /// `=`
    Blocking,
    /// `<=`
    NonBlocking,
    /// `<-`
    Continuous,
}

impl AssignOp {
    pub fn token(self) -> &'static str {
        match self {
            AssignOp::Blocking => "=",
            AssignOp::NonBlocking => "<=",
            AssignOp::Continuous => "<-",
        }
    }
}

/// The right-hand side of an assignment.
#[derive(Clone, Debug, PartialEq)]
pub enum Rvalue {
    Access(Access),
    Compute(Compute),
}

/// An assignment in one of the five three-address shapes: local/hier load,
/// local/hier store, or compute. At most one side carries an index or
/// select, and a compute's left side is a plain identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct Assign {
    pub op: AssignOp,
    pub lhs: Access,
    pub rhs: Rvalue,
}

impl Assign {
    /// Identifiers read by the right-hand side, plus index identifiers on
    /// either side.
    pub fn reads(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match &self.rhs {
            Rvalue::Access(a) => {
                if !a.is_hier() {
                    out.push(a.leaf());
                }
                if let Some(ix) = &a.index {
                    out.push(ix);
                }
                if let Some(Selector::IndexedUp(b, _)) | Some(Selector::IndexedDown(b, _)) = &a.sel {
                    out.push(b);
                }
            }
            Rvalue::Compute(c) => out.extend(c.operands()),
        }
        if let Some(ix) = &self.lhs.index {
            out.push(ix);
        }
        if let Some(Selector::IndexedUp(b, _)) | Some(Selector::IndexedDown(b, _)) = &self.lhs.sel {
            out.push(b);
        }
        out
    }
}

/// Edge qualifier in an event expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    /// Any value change.
    Any,
    Pos,
    Neg,
}

/// One entry of an event list: an optional edge and a watched access.
#[derive(Clone, Debug, PartialEq)]
pub struct EventExpr {
    pub edge: Edge,
    pub access: Access,
}

/// A timing control: an identifier-valued delay, an event wait, or a
/// repeated event wait. Analyses treat `Repeat` as an ordinary event wait.
#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    Delay(String),
    Event(Vec<EventExpr>),
    Repeat(String, Vec<EventExpr>),
}

impl Guard {
    /// The event list, empty for delays.
    pub fn events(&self) -> &[EventExpr] {
        match self {
            Guard::Delay(_) => &[],
            Guard::Event(es) | Guard::Repeat(_, es) => es,
        }
    }
}

/// Case statement flavor; `casex` treats x and z pattern bits as wildcards,
/// `casez` only z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseKind {
    Case,
    Casex,
    Casez,
}

impl CaseKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CaseKind::Case => "case",
            CaseKind::Casex => "casex",
            CaseKind::Casez => "casez",
        }
    }
}

/// A statement body, without attributes.
#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Label(String),
    Assign(Assign),
    Guard(Guard),
    If { cond: String, target: String },
    Case {
        kind: CaseKind,
        subject: String,
        arms: Vec<(LogicVec, String)>,
        default: Option<String>,
    },
    Goto(String),
    Invoke { callee: Vec<String>, params: Vec<String> },
    Receive { params: Vec<String> },
    Syscall { name: String, ins: Vec<String>, outs: Vec<String> },
    Return,
    Pass,
}

/// A statement with its attributes (`loc`, markers, and the like).
#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub stmt: Stmt,
    pub attrs: AttrMap,
}

impl Statement {
    pub fn new(stmt: Stmt) -> Statement {
        Statement { stmt, attrs: AttrMap::new() }
    }

    pub fn with_loc(mut self, file: &str, line: u32) -> Statement {
        self.attrs.set_loc(file, line);
        self
    }

    /// The `loc` attribute parsed as (file, line).
    pub fn loc(&self) -> Option<(&str, u32)> {
        self.attrs.loc()
    }

    /// Control-transfer targets named by this statement.
    pub fn targets(&self) -> Vec<&str> {
        match &self.stmt {
            Stmt::If { target, .. } | Stmt::Goto(target) => vec![target],
            Stmt::Case { arms, default, .. } => {
                let mut t: Vec<&str> = arms.iter().map(|(_, l)| l.as_str()).collect();
                if let Some(d) = default {
                    t.push(d);
                }
                t
            }
            _ => vec![],
        }
    }
}

/// A process: a guarded, labeled statement list. Every always block,
/// continuous assignment, and port connection lowers to one Proc.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Proc {
    pub attrs: AttrMap,
    pub body: Vec<Statement>,
}

impl Proc {
    /// The `origin` attribute: "always" or "assign".
    pub fn origin(&self) -> Option<&str> {
        self.attrs.get_text("origin")
    }

    /// The `loc` attribute parsed as (file, line).
    pub fn loc(&self) -> Option<(&str, u32)> {
        self.attrs.loc()
    }

    /// False only when explicitly marked `synthesizable="false"`.
    pub fn is_synthesizable(&self) -> bool {
        self.attrs.get_text("synthesizable") != Some("false")
    }

    /// Display name for reports: `Process-<line>` when the source line is
    /// known, otherwise `Process-#<index>`.
    pub fn display_name(&self, index: usize) -> String {
        match self.loc() {
            Some((_, line)) => format!("Process-{line}"),
            None => format!("Process-#{index}"),
        }
    }
}

/// A function or task body. Functions take inputs and produce outputs
/// through `invoke`/`receive` pairs; bodies hold no guards and no
/// non-blocking assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct Func {
    pub id: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub vars: Vec<VarDecl>,
    pub consts: Vec<ConstDecl>,
    pub body: Vec<Statement>,
    pub attrs: AttrMap,
}

/// A module definition.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Module {
    pub name: String,
    pub attrs: AttrMap,
    pub nets: Vec<NetDecl>,
    pub vars: Vec<VarDecl>,
    pub consts: Vec<ConstDecl>,
    pub insts: Vec<Inst>,
    pub procs: Vec<Proc>,
    pub funcs: Vec<Func>,
}

impl Module {
    pub fn new(name: impl Into<String>) -> Module {
        Module { name: name.into(), ..Module::default() }
    }

    /// True when marked as an inferred stand-in for a missing definition.
    pub fn is_external(&self) -> bool {
        self.attrs.get_text("external") == Some("true")
    }

    /// The type of a declared net, var, or const.
    pub fn type_of(&self, id: &str) -> Option<Type> {
        if let Some(n) = self.nets.iter().find(|n| n.id == id) {
            return Some(n.ty.clone());
        }
        if let Some(v) = self.vars.iter().find(|v| v.id == id) {
            return Some(v.ty.clone());
        }
        if let Some(c) = self.consts.iter().find(|c| c.id == id) {
            return Some(Type::Bv { width: c.value.width(), signed: c.value.is_signed() });
        }
        None
    }

    pub fn net(&self, id: &str) -> Option<&NetDecl> {
        self.nets.iter().find(|n| n.id == id)
    }

    pub fn var(&self, id: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.id == id)
    }

    pub fn konst(&self, id: &str) -> Option<&ConstDecl> {
        self.consts.iter().find(|c| c.id == id)
    }

    pub fn inst(&self, id: &str) -> Option<&Inst> {
        self.insts.iter().find(|i| i.id == id)
    }

    /// Ports in declaration order: nets first, then vars, as emitted.
    pub fn ports(&self) -> Vec<(&str, Dir, &Type)> {
        let nets = self
            .nets
            .iter()
            .filter_map(|n| n.dir.map(|d| (n.id.as_str(), d, &n.ty)));
        let vars = self
            .vars
            .iter()
            .filter_map(|v| v.dir.map(|d| (v.id.as_str(), d, &v.ty)));
        nets.chain(vars).collect()
    }

    /// All declared identifiers, for uniqueness checks.
    pub fn declared_ids(&self) -> impl Iterator<Item = &str> {
        self.nets
            .iter()
            .map(|n| n.id.as_str())
            .chain(self.vars.iter().map(|v| v.id.as_str()))
            .chain(self.consts.iter().map(|c| c.id.as_str()))
            .chain(self.insts.iter().map(|i| i.id.as_str()))
            .chain(self.funcs.iter().map(|f| f.id.as_str()))
    }
}

/// A whole design: a named, attributed set of modules.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Design {
    pub name: String,
    pub attrs: AttrMap,
    pub modules: Vec<Module>,
}

impl Design {
    pub fn new(name: impl Into<String>) -> Design {
        Design { name: name.into(), ..Design::default() }
    }

    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// Modules not instantiated by any other module, in declaration order.
    pub fn top_modules(&self) -> Vec<&Module> {
        let instantiated: std::collections::BTreeSet<&str> = self
            .modules
            .iter()
            .flat_map(|m| m.insts.iter().map(|i| i.module.as_str()))
            .collect();
        self.modules
            .iter()
            .filter(|m| !instantiated.contains(m.name.as_str()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attr_map_preserves_order_and_replaces() {
        let mut m = AttrMap::new();
        m.insert("z", "1");
        m.insert("a", "2");
        m.insert("z", "3");
        let keys: Vec<&str> = m.iter().map(|(k, _)| k).collect();
        assert_eq!(keys, ["z", "a"]);
        assert_eq!(m.get_text("z"), Some("3"));
    }

    #[test]
    fn loc_attr_round_trip() {
        let mut m = AttrMap::new();
        m.set_loc("top.v", 42);
        assert_eq!(m.loc(), Some(("top.v", 42)));
        m.insert("loc", "dir/a.v:7");
        assert_eq!(m.loc(), Some(("dir/a.v", 7)));
    }

    #[test]
    fn type_display() {
        assert_eq!(Type::bv(8).to_string(), "bv<8>");
        assert_eq!(Type::sbv(3).to_string(), "sbv<3>");
        assert_eq!(Type::Real.to_string(), "real");
        let arr = Type::Array { elem: Box::new(Type::bv(8)), len: 256 };
        assert_eq!(arr.to_string(), "bv<8>[256]");
    }

    #[test]
    fn module_ports_in_declaration_order() {
        let mut m = Module::new("m");
        m.nets.push(NetDecl {
            id: "clk".into(),
            kind: NetKind::Wire,
            ty: Type::bv(1),
            dir: Some(Dir::Input),
            attrs: AttrMap::new(),
        });
        m.nets.push(NetDecl {
            id: "mid".into(),
            kind: NetKind::Wire,
            ty: Type::bv(1),
            dir: None,
            attrs: AttrMap::new(),
        });
        m.vars.push(VarDecl {
            id: "q".into(),
            ty: Type::bv(8),
            dir: Some(Dir::Output),
            attrs: AttrMap::new(),
        });
        let ports: Vec<(&str, Dir)> = m.ports().into_iter().map(|(n, d, _)| (n, d)).collect();
        assert_eq!(ports, [("clk", Dir::Input), ("q", Dir::Output)]);
    }

    #[test]
    fn statement_targets() {
        let s = Statement::new(Stmt::Case {
            kind: CaseKind::Case,
            subject: "s".into(),
            arms: vec![(LogicVec::from_u64(2, 0), "$L1".into())],
            default: Some("$L2".into()),
        });
        assert_eq!(s.targets(), ["$L1", "$L2"]);
    }
}
