//! Lowering of parsed module items to 3AC Procs.
//!
//! [`ModuleCx`] owns one module under construction: its symbol table,
//! interned `$c` constants, `$t` temporaries, and the Procs built so far.
//! Expression lowering flattens every computation into single-operation
//! assignments to fresh temporaries; statement lowering turns structured
//! control flow into labels, `if ... goto`, and `case ... goto`.

use std::collections::{BTreeMap, BTreeSet};

use crate::bitvec::{BinaryOp, LogicBit, LogicVec, UnaryOp};
use crate::ir::{
    Access, Assign, AssignOp, AttrMap, CaseKind, Compute, ConstDecl, Dir, Edge, EventExpr, Guard,
    Inst, Module, NetDecl, NetKind, Proc, Rvalue, Selector, Statement, Stmt as IrStmt, Type,
    VarDecl,
};

use super::ast::{
    AlwaysAst, AssignAst, DeclAst, DeclKind, EdgeAst, Expr, GateAst, GateKind, InitialAst, Pos,
    Stmt, TimingAst, VBinary, VUnary,
};
use super::{FrontendError, Warning};

/// Sanity bound on declared and computed bit widths.
const MAX_WIDTH: usize = 1 << 16;
/// Sanity bound on array lengths.
const MAX_ARRAY: usize = 1 << 20;
/// Sanity bound on replication counts.
const MAX_REPL: usize = 1 << 12;

/// Shape of one declared signal: its IR type plus the source index mapping.
#[derive(Clone, Debug)]
pub(crate) struct SigInfo {
    pub ty: Type,
    /// Low bound of the packed range (0 when none was declared).
    pub lo: usize,
    /// Ascending packed range (`[0:7]`): source bit `lo` is the MSB.
    pub asc: bool,
    /// Low bound of the unpacked (array) range.
    pub arr_lo: usize,
    pub is_net: bool,
    pub dir: Option<Dir>,
}

/// A value flattened to an identifier, with its width and signedness under
/// the source typing rules.
#[derive(Clone, Debug)]
struct Val {
    id: String,
    width: usize,
    signed: bool,
}

/// A resolved assignment target or load source.
struct LoweredAccess {
    access: Access,
    width: usize,
    signed: bool,
}

/// A Proc body under construction.
pub(crate) struct ProcBody {
    stmts: Vec<Statement>,
    label_n: usize,
    nonsynth: bool,
}

impl ProcBody {
    fn new() -> ProcBody {
        ProcBody { stmts: Vec::new(), label_n: 0, nonsynth: false }
    }

    fn fresh_label(&mut self) -> String {
        self.label_n += 1;
        format!("$L{}", self.label_n)
    }

    fn push(&mut self, s: IrStmt, pos: &Pos) {
        self.stmts.push(Statement::new(s).with_loc(&pos.file, pos.line));
    }

    fn push_plain(&mut self, s: IrStmt) {
        self.stmts.push(Statement::new(s));
    }
}

/// One module being lowered.
pub(crate) struct ModuleCx {
    pub name: String,
    attrs: AttrMap,
    nets: Vec<NetDecl>,
    vars: Vec<VarDecl>,
    consts: Vec<ConstDecl>,
    insts: Vec<Inst>,
    procs: Vec<Proc>,
    sigs: BTreeMap<String, SigInfo>,
    /// Parameter and localparam values, also present in `consts`.
    params: BTreeMap<String, LogicVec>,
    /// Non-local parameter names in declaration order, for positional
    /// overrides.
    pub param_order: Vec<String>,
    /// Interned constants: canonical literal text to `$c` id.
    const_ids: BTreeMap<String, String>,
    tmp_n: usize,
    const_n: usize,
    xlit_n: usize,
    /// Source-order port names from the module header.
    pub port_order: Vec<String>,
    pub warnings: Vec<Warning>,
}

fn elab(pos: &Pos, msg: impl Into<String>) -> FrontendError {
    FrontendError::Elab { file: pos.file.to_string(), line: pos.line, msg: msg.into() }
}

/// Resizes a literal: pads with the leading bit's x/z (or the sign bit for
/// signed literals, else zero); truncates from the left.
fn resize_literal(v: &LogicVec, w: usize) -> LogicVec {
    if v.width() == w {
        return v.clone();
    }
    let lead = v.bits()[0];
    let pad = match lead {
        LogicBit::X => LogicBit::X,
        LogicBit::Z => LogicBit::Z,
        _ if v.is_signed() => lead,
        _ => LogicBit::Zero,
    };
    let mut bits = Vec::with_capacity(w);
    if w > v.width() {
        bits.resize(w - v.width(), pad);
        bits.extend_from_slice(v.bits());
    } else {
        bits.extend_from_slice(&v.bits()[v.width() - w..]);
    }
    LogicVec::new(bits, v.is_signed())
}

/// Resizes a case pattern to the subject width; widening follows literal
/// extension, narrowing must not drop information.
fn resize_pattern(v: &LogicVec, w: usize) -> Result<LogicVec, String> {
    if v.width() <= w {
        return Ok(resize_literal(v, w).with_signed(false));
    }
    let dropped = &v.bits()[..v.width() - w];
    let ok = dropped.iter().all(|b| *b == LogicBit::Zero)
        || (matches!(v.bits()[0], LogicBit::X | LogicBit::Z)
            && dropped.iter().all(|b| *b == v.bits()[0]));
    if !ok {
        return Err(format!(
            "case pattern {v} does not fit the {w}-bit subject"
        ));
    }
    Ok(LogicVec::new(v.bits()[v.width() - w..].to_vec(), false))
}

/// Minimal width that represents `v` (at least 1).
fn min_width(v: u64) -> usize {
    (64 - v.leading_zeros() as usize).max(1)
}

fn map_binop(op: VBinary, both_signed: bool, left_signed: bool) -> BinaryOp {
    match op {
        VBinary::Add => BinaryOp::Add,
        VBinary::Sub => BinaryOp::Sub,
        VBinary::Mul => BinaryOp::Mul,
        VBinary::Div => if both_signed { BinaryOp::Sdiv } else { BinaryOp::Udiv },
        VBinary::Mod => if both_signed { BinaryOp::Srem } else { BinaryOp::Urem },
        VBinary::Pow => if both_signed { BinaryOp::Pow } else { BinaryOp::Upow },
        VBinary::And => BinaryOp::And,
        VBinary::Or => BinaryOp::Or,
        VBinary::Xor | VBinary::Xnor => BinaryOp::Xor,
        VBinary::LogicAnd => BinaryOp::And,
        VBinary::LogicOr => BinaryOp::Or,
        VBinary::Eq => BinaryOp::Eq,
        VBinary::Neq => BinaryOp::Neq,
        VBinary::CaseEq => BinaryOp::Equiv,
        VBinary::CaseNeq => BinaryOp::Nequiv,
        VBinary::Lt => if both_signed { BinaryOp::Slt } else { BinaryOp::Ult },
        VBinary::Gt => if both_signed { BinaryOp::Sgt } else { BinaryOp::Ugt },
        VBinary::Le => if both_signed { BinaryOp::Sle } else { BinaryOp::Ule },
        VBinary::Ge => if both_signed { BinaryOp::Sge } else { BinaryOp::Uge },
        VBinary::Shl | VBinary::Ashl => BinaryOp::Shl,
        VBinary::Shr => BinaryOp::Lshr,
        VBinary::Ashr => if left_signed { BinaryOp::Ashr } else { BinaryOp::Lshr },
    }
}

impl ModuleCx {
    pub fn new(name: impl Into<String>, pos: &Pos, port_order: Vec<String>) -> ModuleCx {
        let mut attrs = AttrMap::new();
        attrs.set_loc(&pos.file, pos.line);
        ModuleCx {
            name: name.into(),
            attrs,
            nets: Vec::new(),
            vars: Vec::new(),
            consts: Vec::new(),
            insts: Vec::new(),
            procs: Vec::new(),
            sigs: BTreeMap::new(),
            params: BTreeMap::new(),
            param_order: Vec::new(),
            const_ids: BTreeMap::new(),
            tmp_n: 0,
            const_n: 0,
            xlit_n: 0,
            port_order,
            warnings: Vec::new(),
        }
    }

    pub fn finish(self) -> Module {
        Module {
            name: self.name,
            attrs: self.attrs,
            nets: self.nets,
            vars: self.vars,
            consts: self.consts,
            insts: self.insts,
            procs: self.procs,
            funcs: Vec::new(),
        }
    }

    fn check_fresh(&self, name: &str, pos: &Pos) -> Result<(), FrontendError> {
        if self.sigs.contains_key(name)
            || self.params.contains_key(name)
            || self.insts.iter().any(|i| i.id == name)
        {
            return Err(elab(pos, format!("`{name}` is already declared")));
        }
        Ok(())
    }

    // -- declarations -------------------------------------------------------

    pub fn add_param(
        &mut self,
        name: &str,
        pos: &Pos,
        value: &Expr,
        override_value: Option<&LogicVec>,
    ) -> Result<(), FrontendError> {
        self.check_fresh(name, pos)?;
        let v = match override_value {
            Some(v) => v.clone(),
            None => self.const_eval(value)?,
        };
        if !v.is_fully_defined() {
            return Err(elab(pos, format!("parameter `{name}` has x/z bits ({v})")));
        }
        let mut attrs = AttrMap::new();
        attrs.set_loc(&pos.file, pos.line);
        self.consts.push(ConstDecl { id: name.to_string(), value: v.clone(), attrs });
        self.params.insert(name.to_string(), v);
        Ok(())
    }

    /// Adds one signal from its (possibly merged) declaration lines.
    pub fn add_decls(&mut self, decls: &[&DeclAst]) -> Result<(), FrontendError> {
        let first = decls[0];
        let name = &first.name;
        let pos = &first.pos;
        self.check_fresh(name, pos)?;

        let mut dir = None;
        let mut kind = None;
        let mut signed = false;
        let mut shape: Option<(usize, usize, bool)> = None; // (width, lo, asc)
        let mut array: Option<(usize, usize)> = None; // (len, lo)
        for d in decls {
            if let Some(dd) = d.dir {
                if dir.is_some() {
                    return Err(elab(&d.pos, format!("duplicate direction for `{name}`")));
                }
                dir = Some(dd);
            }
            if let Some(k) = d.kind {
                if kind.is_some() {
                    return Err(elab(&d.pos, format!("`{name}` is declared twice")));
                }
                kind = Some(k);
            }
            signed |= d.signed;
            if let Some((ms, ls)) = &d.range {
                let ms = self.const_usize(ms, "range bound")?;
                let ls = self.const_usize(ls, "range bound")?;
                let (w, lo, asc) = if ms >= ls {
                    (ms - ls + 1, ls, false)
                } else {
                    (ls - ms + 1, ms, true)
                };
                if w > MAX_WIDTH {
                    return Err(elab(&d.pos, format!("`{name}` is {w} bits wide")));
                }
                match shape {
                    None => shape = Some((w, lo, asc)),
                    Some(s) if s == (w, lo, asc) => {}
                    Some(_) => {
                        return Err(elab(
                            &d.pos,
                            format!("conflicting ranges declared for `{name}`"),
                        ));
                    }
                }
            }
            if let Some((a, b)) = &d.array {
                let a = self.const_usize(a, "array bound")?;
                let b = self.const_usize(b, "array bound")?;
                let (len, lo) = (a.abs_diff(b) + 1, a.min(b));
                if len > MAX_ARRAY {
                    return Err(elab(&d.pos, format!("array `{name}` has {len} elements")));
                }
                if array.is_some() {
                    return Err(elab(&d.pos, format!("`{name}` is declared twice")));
                }
                array = Some((len, lo));
            }
        }

        let (w, lo, asc) = shape.unwrap_or((1, 0, false));
        let elem = if signed { Type::sbv(w) } else { Type::bv(w) };
        let ty = match array {
            Some((len, _)) => Type::Array { elem: Box::new(elem), len },
            None => elem,
        };
        let kind = kind.unwrap_or(DeclKind::Net(NetKind::Wire));
        let is_net = matches!(kind, DeclKind::Net(_));
        if dir == Some(Dir::Input) && !is_net {
            return Err(elab(pos, format!("input port `{name}` cannot be a reg")));
        }
        if matches!(ty, Type::Array { .. }) {
            if is_net {
                return Err(elab(pos, format!("net `{name}` cannot be an array")));
            }
            if dir.is_some() {
                return Err(elab(pos, format!("port `{name}` cannot be an array")));
            }
        }

        let mut attrs = AttrMap::new();
        attrs.set_loc(&pos.file, pos.line);
        match kind {
            DeclKind::Net(nk) => self.nets.push(NetDecl {
                id: name.clone(),
                kind: nk,
                ty: ty.clone(),
                dir,
                attrs,
            }),
            DeclKind::Reg => self.vars.push(VarDecl { id: name.clone(), ty: ty.clone(), dir, attrs }),
        }
        let arr_lo = array.map(|(_, lo)| lo).unwrap_or(0);
        self.sigs.insert(name.clone(), SigInfo { ty, lo, asc, arr_lo, is_net, dir });
        Ok(())
    }

    /// Checks header ports against directions after all declarations.
    pub fn check_ports(&self, module_pos: &Pos) -> Result<(), FrontendError> {
        for p in &self.port_order {
            match self.sigs.get(p) {
                Some(si) if si.dir.is_some() => {}
                Some(_) => {
                    return Err(elab(module_pos, format!("port `{p}` has no direction")));
                }
                None => {
                    return Err(elab(module_pos, format!("port `{p}` is not declared")));
                }
            }
        }
        for (name, si) in &self.sigs {
            if si.dir.is_some() && !self.port_order.iter().any(|p| p == name) {
                return Err(elab(
                    module_pos,
                    format!("`{name}` has a direction but is not in the port list"),
                ));
            }
        }
        Ok(())
    }

    pub fn add_inst(&mut self, id: &str, module: &str, pos: &Pos) -> Result<(), FrontendError> {
        self.check_fresh(id, pos)?;
        let mut attrs = AttrMap::new();
        attrs.set_loc(&pos.file, pos.line);
        self.insts.push(Inst { id: id.to_string(), module: module.to_string(), attrs });
        Ok(())
    }

    /// Source-order port signature: (name, type, direction).
    pub fn port_sig(&self) -> Vec<(String, Type, Dir)> {
        self.port_order
            .iter()
            .map(|p| {
                let si = &self.sigs[p];
                (p.clone(), si.ty.clone(), si.dir.unwrap())
            })
            .collect()
    }

    /// Identifiers driven by the Procs lowered so far, plus input ports and
    /// supply nets. Used by signature inference for direction decisions.
    pub fn driven_ids(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for n in &self.nets {
            if n.dir == Some(Dir::Input)
                || matches!(n.kind, NetKind::Supply0 | NetKind::Supply1)
            {
                out.insert(n.id.clone());
            }
        }
        for v in &self.vars {
            if v.dir == Some(Dir::Input) {
                out.insert(v.id.clone());
            }
        }
        for p in &self.procs {
            for st in &p.body {
                if let IrStmt::Assign(a) = &st.stmt {
                    if a.lhs.path.len() == 1 {
                        out.insert(a.lhs.path[0].clone());
                    }
                }
            }
        }
        out
    }

    /// Self-determined width of a source expression.
    pub fn width_of(&self, e: &Expr) -> Result<usize, FrontendError> {
        match e {
            Expr::Ident(n, pos) => {
                if let Some(v) = self.params.get(n) {
                    return Ok(v.width());
                }
                match self.sigs.get(n) {
                    Some(si) => si
                        .ty
                        .width()
                        .ok_or_else(|| elab(pos, format!("array `{n}` used without an index"))),
                    None => Err(elab(pos, format!("undeclared identifier `{n}`"))),
                }
            }
            Expr::Sized(v, _) => Ok(v.width()),
            Expr::Unsized(v, _) => Ok(min_width(*v)),
            Expr::Str(_, pos) => Err(elab(pos, "string literals are only allowed as system task arguments")),
            Expr::Real(v, pos) => Err(elab(pos, format!("real value {v} is not synthesizable"))),
            Expr::Unary(op, a, _) => match op {
                VUnary::Plus | VUnary::Minus | VUnary::Not => self.width_of(a),
                _ => Ok(1),
            },
            Expr::Binary(op, a, b, _) => match op {
                VBinary::Add
                | VBinary::Sub
                | VBinary::Mul
                | VBinary::Div
                | VBinary::Mod
                | VBinary::And
                | VBinary::Or
                | VBinary::Xor
                | VBinary::Xnor => Ok(self.width_of(a)?.max(self.width_of(b)?)),
                VBinary::Pow | VBinary::Shl | VBinary::Shr | VBinary::Ashl | VBinary::Ashr => {
                    self.width_of(a)
                }
                _ => Ok(1),
            },
            Expr::Ternary(_, t, f, _) => Ok(self.width_of(t)?.max(self.width_of(f)?)),
            Expr::Concat(parts, _) => {
                let mut w = 0usize;
                for p in parts {
                    w += self.width_of(p)?;
                }
                Ok(w)
            }
            Expr::Repl(count, parts, pos) => {
                let n = self.const_usize(count, "replication count")?;
                if n == 0 || n > MAX_REPL {
                    return Err(elab(pos, format!("replication count {n} out of range")));
                }
                let mut w = 0usize;
                for p in parts {
                    w += self.width_of(p)?;
                }
                Ok(n * w)
            }
            Expr::Index(base, _, pos) => match &**base {
                Expr::Ident(n, _) if self.array_of(n).is_some() => Ok(self
                    .array_of(n)
                    .unwrap()
                    .0
                    .width()
                    .ok_or_else(|| elab(pos, "nested arrays are not supported"))?),
                _ => Ok(1),
            },
            Expr::Range(_, m, l, _) => {
                let m = self.const_usize(m, "part-select bound")?;
                let l = self.const_usize(l, "part-select bound")?;
                Ok(m.abs_diff(l) + 1)
            }
            Expr::IndexedRange { width, .. } => self.const_usize(width, "part-select width"),
        }
    }

    /// Signedness of a source expression under the usual rules: signed
    /// operands produce signed results except for comparisons, reductions,
    /// concatenations, and selects.
    fn signed_of(&self, e: &Expr) -> bool {
        match e {
            Expr::Ident(n, _) => {
                if let Some(v) = self.params.get(n) {
                    return v.is_signed();
                }
                self.sigs.get(n).map(|si| si.ty.is_signed()).unwrap_or(false)
            }
            Expr::Sized(v, _) => v.is_signed(),
            Expr::Unsized(..) => true,
            Expr::Unary(op, a, _) => {
                matches!(op, VUnary::Plus | VUnary::Minus | VUnary::Not) && self.signed_of(a)
            }
            Expr::Binary(op, a, b, _) => match op {
                VBinary::Add
                | VBinary::Sub
                | VBinary::Mul
                | VBinary::Div
                | VBinary::Mod
                | VBinary::And
                | VBinary::Or
                | VBinary::Xor
                | VBinary::Xnor => self.signed_of(a) && self.signed_of(b),
                VBinary::Pow | VBinary::Shl | VBinary::Shr | VBinary::Ashl | VBinary::Ashr => {
                    self.signed_of(a)
                }
                _ => false,
            },
            Expr::Ternary(_, t, f, _) => self.signed_of(t) && self.signed_of(f),
            _ => false,
        }
    }

    fn array_of(&self, name: &str) -> Option<(Type, usize, SigInfo)> {
        let si = self.sigs.get(name)?;
        match &si.ty {
            Type::Array { elem, len } => Some(((**elem).clone(), *len, si.clone())),
            _ => None,
        }
    }

    // -- compile-time evaluation --------------------------------------------

    /// Evaluates an elaboration-time constant expression. Unsized literals
    /// evaluate at 32 bits; all arithmetic widens to the widest operand.
    pub fn const_eval(&self, e: &Expr) -> Result<LogicVec, FrontendError> {
        use crate::bitvec::{eval_binop, eval_mux, eval_select, eval_unop, eval_sext, eval_zext};
        let err_nc = |pos: &Pos| elab(pos, "not a compile-time constant");
        match e {
            Expr::Ident(n, pos) => {
                self.params.get(n).cloned().ok_or_else(|| err_nc(pos))
            }
            Expr::Sized(v, _) => Ok(v.clone()),
            Expr::Unsized(v, pos) => {
                if *v > u32::MAX as u64 {
                    return Err(elab(pos, format!("literal {v} does not fit in 32 bits")));
                }
                Ok(LogicVec::from_u64(32, *v).with_signed(true))
            }
            Expr::Str(_, pos) | Expr::Real(_, pos) => Err(err_nc(pos)),
            Expr::Unary(op, a, _) => {
                let av = self.const_eval(a)?;
                let sa = av.is_signed();
                Ok(match op {
                    VUnary::Plus => av,
                    VUnary::Minus => eval_unop(UnaryOp::Neg, &av).with_signed(sa),
                    VUnary::Not => eval_unop(UnaryOp::Not, &av).with_signed(sa),
                    VUnary::LogicNot => eval_unop(UnaryOp::Not, &truthy_const(&av)),
                    VUnary::RedAnd => eval_unop(UnaryOp::Rand, &av),
                    VUnary::RedOr => eval_unop(UnaryOp::Ror, &av),
                    VUnary::RedXor => eval_unop(UnaryOp::Rxor, &av),
                    VUnary::RedNand => eval_unop(UnaryOp::Not, &eval_unop(UnaryOp::Rand, &av)),
                    VUnary::RedNor => eval_unop(UnaryOp::Not, &eval_unop(UnaryOp::Ror, &av)),
                    VUnary::RedXnor => eval_unop(UnaryOp::Not, &eval_unop(UnaryOp::Rxor, &av)),
                })
            }
            Expr::Binary(op, a, b, _) => {
                let av = self.const_eval(a)?;
                let bv = self.const_eval(b)?;
                let both = av.is_signed() && bv.is_signed();
                if matches!(op, VBinary::LogicAnd | VBinary::LogicOr) {
                    let ta = truthy_const(&av);
                    let tb = truthy_const(&bv);
                    let o = if *op == VBinary::LogicAnd { BinaryOp::And } else { BinaryOp::Or };
                    return Ok(eval_binop(o, &ta, &tb));
                }
                let w = av.width().max(bv.width());
                let ext = |v: &LogicVec| {
                    if v.is_signed() { eval_sext(v, w) } else { eval_zext(v, w) }
                        .with_signed(v.is_signed())
                };
                let (ax, bx) = (ext(&av), ext(&bv));
                let irop = map_binop(*op, both, av.is_signed());
                // Shift amounts and concat operands stay self-determined.
                let r = match op {
                    VBinary::Shl | VBinary::Shr | VBinary::Ashl | VBinary::Ashr => {
                        eval_binop(irop, &ax, &bv)
                    }
                    _ => eval_binop(irop, &ax, &bx),
                };
                let r = if *op == VBinary::Xnor { eval_unop(UnaryOp::Not, &r) } else { r };
                let signed_result = match op {
                    VBinary::Add
                    | VBinary::Sub
                    | VBinary::Mul
                    | VBinary::Div
                    | VBinary::Mod
                    | VBinary::And
                    | VBinary::Or
                    | VBinary::Xor
                    | VBinary::Xnor => both,
                    VBinary::Pow | VBinary::Shl | VBinary::Shr | VBinary::Ashl | VBinary::Ashr => {
                        av.is_signed()
                    }
                    _ => false,
                };
                Ok(r.with_signed(signed_result))
            }
            Expr::Ternary(c, t, f, _) => {
                let cv = truthy_const(&self.const_eval(c)?);
                let tv = self.const_eval(t)?;
                let fv = self.const_eval(f)?;
                let w = tv.width().max(fv.width());
                let ext = |v: &LogicVec| {
                    if v.is_signed() { eval_sext(v, w) } else { eval_zext(v, w) }
                };
                Ok(eval_mux(&cv, &ext(&tv), &ext(&fv)))
            }
            Expr::Concat(parts, pos) => {
                let mut it = parts.iter();
                let first = it.next().ok_or_else(|| elab(pos, "empty concatenation"))?;
                let mut acc = self.const_eval(first)?.with_signed(false);
                for p in it {
                    let pv = self.const_eval(p)?;
                    acc = eval_binop(BinaryOp::Concat, &acc, &pv);
                }
                Ok(acc)
            }
            Expr::Repl(count, parts, pos) => {
                let n = self.const_usize(count, "replication count")?;
                if n == 0 || n > MAX_REPL {
                    return Err(elab(pos, format!("replication count {n} out of range")));
                }
                let inner = self.const_eval(&Expr::Concat(parts.clone(), pos.clone()))?;
                let mut acc = inner.clone();
                for _ in 1..n {
                    acc = eval_binop(BinaryOp::Concat, &acc, &inner);
                }
                Ok(acc)
            }
            Expr::Index(base, idx, pos) => {
                let bv = self.const_eval(base)?;
                let i = self.const_usize(idx, "bit index")?;
                if i >= bv.width() {
                    return Err(elab(pos, format!("bit index {i} out of range")));
                }
                Ok(eval_select(&bv, i, i))
            }
            Expr::Range(base, m, l, pos) => {
                let bv = self.const_eval(base)?;
                let m = self.const_usize(m, "part-select bound")?;
                let l = self.const_usize(l, "part-select bound")?;
                if m < l || m >= bv.width() {
                    return Err(elab(pos, format!("part select [{m}:{l}] out of range")));
                }
                Ok(eval_select(&bv, m, l))
            }
            Expr::IndexedRange { pos, .. } => Err(err_nc(pos)),
        }
    }

    /// Evaluates a constant expression to a usize, for bounds and counts.
    pub fn const_usize(&self, e: &Expr, what: &str) -> Result<usize, FrontendError> {
        let v = self.const_eval(e)?;
        let n = v
            .to_u64()
            .ok_or_else(|| elab(e.pos(), format!("{what} must be a defined constant ({v})")))?;
        usize::try_from(n).map_err(|_| elab(e.pos(), format!("{what} {n} is too large")))
    }

    // -- identifiers, constants, temporaries --------------------------------

    fn intern_const(&mut self, v: &LogicVec) -> String {
        let key = v.to_string();
        if let Some(id) = self.const_ids.get(&key) {
            return id.clone();
        }
        let id = format!("$c{}", self.const_n);
        self.const_n += 1;
        self.consts.push(ConstDecl { id: id.clone(), value: v.clone(), attrs: AttrMap::new() });
        self.const_ids.insert(key, id.clone());
        id
    }

    fn fresh_tmp(&mut self, width: usize) -> String {
        let id = format!("$t{}", self.tmp_n);
        self.tmp_n += 1;
        self.vars.push(VarDecl { id: id.clone(), ty: Type::bv(width), dir: None, attrs: AttrMap::new() });
        id
    }

    /// A fresh, never-driven net standing in for an `x`/`z` literal; it reads
    /// as unknown forever, which is exactly the literal's value.
    fn fresh_xnet(&mut self, width: usize, kind: char, pos: &Pos) -> String {
        let id = format!("$x{}", self.xlit_n);
        self.xlit_n += 1;
        let mut attrs = AttrMap::new();
        attrs.insert("xlit", kind.to_string());
        attrs.set_loc(&pos.file, pos.line);
        self.nets.push(NetDecl { id: id.clone(), kind: NetKind::Wire, ty: Type::bv(width), dir: None, attrs });
        id
    }

    fn emit_compute(
        &mut self,
        c: Compute,
        width: usize,
        signed: bool,
        pos: &Pos,
        body: &mut ProcBody,
    ) -> Val {
        let id = self.fresh_tmp(width);
        body.push(
            IrStmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local(&id),
                rhs: Rvalue::Compute(c),
            }),
            pos,
        );
        Val { id, width, signed }
    }

    fn extend_to(&mut self, v: Val, w: usize, pos: &Pos, body: &mut ProcBody) -> Val {
        if v.width == w {
            return v;
        }
        debug_assert!(w > v.width);
        let c = if v.signed {
            Compute::Sext(v.id, Type::bv(w))
        } else {
            Compute::Zext(v.id, Type::bv(w))
        };
        self.emit_compute(c, w, v.signed, pos, body)
    }

    fn truncate_to(&mut self, v: Val, w: usize, pos: &Pos, body: &mut ProcBody) -> Val {
        if v.width == w {
            return v;
        }
        debug_assert!(w < v.width);
        self.emit_compute(Compute::Cast(v.id, Type::bv(w)), w, false, pos, body)
    }

    /// Reduces a value to one bit of truthiness (`|v`), as used by `if`,
    /// `?:` selectors, and the logical operators.
    fn truthy(&mut self, v: Val, pos: &Pos, body: &mut ProcBody) -> Val {
        if v.width == 1 {
            return v;
        }
        self.emit_compute(Compute::Unary(UnaryOp::Ror, v.id), 1, false, pos, body)
    }

    /// A literal resized to width `w`. Fully defined literals intern as
    /// constants; x/z segments become never-driven `$x` nets, concatenated
    /// with the defined segments.
    fn literal_val(&mut self, v: &LogicVec, w: usize, pos: &Pos, body: &mut ProcBody) -> Val {
        let rv = resize_literal(v, w);
        if rv.is_fully_defined() {
            let id = self.intern_const(&rv);
            return Val { id, width: w, signed: rv.is_signed() };
        }
        #[derive(PartialEq, Clone, Copy)]
        enum Seg {
            Def,
            X,
            Z,
        }
        let class = |b: LogicBit| match b {
            LogicBit::X => Seg::X,
            LogicBit::Z => Seg::Z,
            _ => Seg::Def,
        };
        let bits = rv.bits();
        let mut segs: Vec<(Seg, Vec<LogicBit>)> = Vec::new();
        for &b in bits {
            match segs.last_mut() {
                Some((c, run)) if *c == class(b) => run.push(b),
                _ => segs.push((class(b), vec![b])),
            }
        }
        let mut acc: Option<Val> = None;
        for (c, run) in segs {
            let width = run.len();
            let id = match c {
                Seg::Def => self.intern_const(&LogicVec::new(run, false)),
                Seg::X => self.fresh_xnet(width, 'x', pos),
                Seg::Z => self.fresh_xnet(width, 'z', pos),
            };
            let part = Val { id, width, signed: false };
            acc = Some(match acc {
                None => part,
                Some(hi) => {
                    let cw = hi.width + part.width;
                    self.emit_compute(
                        Compute::Binary(BinaryOp::Concat, hi.id, part.id),
                        cw,
                        false,
                        pos,
                        body,
                    )
                }
            });
        }
        acc.unwrap()
    }

    // -- expression lowering -------------------------------------------------

    /// Lowers `e` at its self-determined width.
    fn lower_self(&mut self, e: &Expr, body: &mut ProcBody) -> Result<Val, FrontendError> {
        let w = self.width_of(e)?;
        self.lower_expr(e, w, body)
    }

    /// Lowers `e` to an identifier of exactly `w` bits (`w` is at least the
    /// self-determined width; operands widen into their context).
    fn lower_expr(&mut self, e: &Expr, w: usize, body: &mut ProcBody) -> Result<Val, FrontendError> {
        let pos = e.pos().clone();
        match e {
            Expr::Ident(n, _) => {
                if let Some(v) = self.params.get(n) {
                    let val = Val { id: n.clone(), width: v.width(), signed: v.is_signed() };
                    return Ok(self.extend_to(val, w, &pos, body));
                }
                let si = self
                    .sigs
                    .get(n)
                    .ok_or_else(|| elab(&pos, format!("undeclared identifier `{n}`")))?;
                let width = si
                    .ty
                    .width()
                    .ok_or_else(|| elab(&pos, format!("array `{n}` used without an index")))?;
                let val = Val { id: n.clone(), width, signed: si.ty.is_signed() };
                Ok(self.extend_to(val, w, &pos, body))
            }
            Expr::Sized(v, _) => Ok(self.literal_val(v, w, &pos, body)),
            Expr::Unsized(v, _) => {
                let lv = LogicVec::from_u64(min_width(*v), *v);
                Ok(self.literal_val(&lv, w, &pos, body))
            }
            Expr::Str(_, _) | Expr::Real(_, _) => {
                self.width_of(e)?;
                unreachable!("width_of rejects strings and reals")
            }
            Expr::Unary(op, a, _) => match op {
                VUnary::Plus => self.lower_expr(a, w, body),
                VUnary::Minus | VUnary::Not => {
                    let av = self.lower_expr(a, w, body)?;
                    let signed = av.signed;
                    let o = if *op == VUnary::Minus { UnaryOp::Neg } else { UnaryOp::Not };
                    Ok(self.emit_compute(Compute::Unary(o, av.id), w, signed, &pos, body))
                }
                VUnary::LogicNot => {
                    let av = self.lower_self(a, body)?;
                    let t = self.truthy(av, &pos, body);
                    let r = self.emit_compute(Compute::Unary(UnaryOp::Not, t.id), 1, false, &pos, body);
                    Ok(self.extend_to(r, w, &pos, body))
                }
                VUnary::RedAnd | VUnary::RedOr | VUnary::RedXor => {
                    let av = self.lower_self(a, body)?;
                    let o = match op {
                        VUnary::RedAnd => UnaryOp::Rand,
                        VUnary::RedOr => UnaryOp::Ror,
                        _ => UnaryOp::Rxor,
                    };
                    let r = if av.width == 1 {
                        Val { id: av.id, width: 1, signed: false }
                    } else {
                        self.emit_compute(Compute::Unary(o, av.id), 1, false, &pos, body)
                    };
                    Ok(self.extend_to(r, w, &pos, body))
                }
                VUnary::RedNand | VUnary::RedNor | VUnary::RedXnor => {
                    let av = self.lower_self(a, body)?;
                    let o = match op {
                        VUnary::RedNand => UnaryOp::Rand,
                        VUnary::RedNor => UnaryOp::Ror,
                        _ => UnaryOp::Rxor,
                    };
                    let r = if av.width == 1 {
                        av
                    } else {
                        self.emit_compute(Compute::Unary(o, av.id), 1, false, &pos, body)
                    };
                    let n = self.emit_compute(Compute::Unary(UnaryOp::Not, r.id), 1, false, &pos, body);
                    Ok(self.extend_to(n, w, &pos, body))
                }
            },
            Expr::Binary(op, a, b, _) => self.lower_binary(*op, a, b, w, &pos, body),
            Expr::Ternary(c, t, f, _) => {
                let cv = self.lower_self(c, body)?;
                let sel = self.truthy(cv, &pos, body);
                let tv = self.lower_expr(t, w, body)?;
                let fv = self.lower_expr(f, w, body)?;
                let signed = tv.signed && fv.signed;
                Ok(self.emit_compute(Compute::Mux(sel.id, tv.id, fv.id), w, signed, &pos, body))
            }
            Expr::Concat(parts, _) => {
                let mut acc: Option<Val> = None;
                for p in parts {
                    let pv = self.lower_self(p, body)?;
                    acc = Some(match acc {
                        None => pv,
                        Some(hi) => {
                            let cw = hi.width + pv.width;
                            self.emit_compute(
                                Compute::Binary(BinaryOp::Concat, hi.id, pv.id),
                                cw,
                                false,
                                &pos,
                                body,
                            )
                        }
                    });
                }
                let acc = acc.ok_or_else(|| elab(&pos, "empty concatenation"))?;
                Ok(self.extend_to(acc, w, &pos, body))
            }
            Expr::Repl(count, parts, _) => {
                let n = self.const_usize(count, "replication count")?;
                if n == 0 || n > MAX_REPL {
                    return Err(elab(&pos, format!("replication count {n} out of range")));
                }
                let mut iw = 0;
                for p in parts {
                    iw += self.width_of(p)?;
                }
                let inner = self.lower_expr(&Expr::Concat(parts.clone(), pos.clone()), iw, body)?;
                let mut acc = inner.clone();
                for _ in 1..n {
                    let cw = acc.width + inner.width;
                    acc = self.emit_compute(
                        Compute::Binary(BinaryOp::Concat, acc.id, inner.id.clone()),
                        cw,
                        false,
                        &pos,
                        body,
                    );
                }
                Ok(self.extend_to(acc, w, &pos, body))
            }
            Expr::Index(..) | Expr::Range(..) | Expr::IndexedRange { .. } => {
                let la = self.lower_access_expr(e, body)?;
                let v = self.load(la, &pos, body);
                Ok(self.extend_to(v, w, &pos, body))
            }
        }
    }

    fn lower_binary(
        &mut self,
        op: VBinary,
        a: &Expr,
        b: &Expr,
        w: usize,
        pos: &Pos,
        body: &mut ProcBody,
    ) -> Result<Val, FrontendError> {
        match op {
            VBinary::Add
            | VBinary::Sub
            | VBinary::Mul
            | VBinary::Div
            | VBinary::Mod
            | VBinary::And
            | VBinary::Or
            | VBinary::Xor
            | VBinary::Xnor => {
                let av = self.lower_expr(a, w, body)?;
                let bv = self.lower_expr(b, w, body)?;
                let both = av.signed && bv.signed;
                let irop = map_binop(op, both, av.signed);
                let r = self.emit_compute(Compute::Binary(irop, av.id, bv.id), w, both, pos, body);
                if op == VBinary::Xnor {
                    Ok(self.emit_compute(Compute::Unary(UnaryOp::Not, r.id), w, both, pos, body))
                } else {
                    Ok(r)
                }
            }
            VBinary::Pow => {
                // The IR's pow takes equal-width operands.
                let av = self.lower_expr(a, w, body)?;
                let bv = self.lower_expr(b, w, body)?;
                let both = av.signed && bv.signed;
                let irop = map_binop(op, both, av.signed);
                Ok(self.emit_compute(Compute::Binary(irop, av.id, bv.id), w, both, pos, body))
            }
            VBinary::Shl | VBinary::Shr | VBinary::Ashl | VBinary::Ashr => {
                let av = self.lower_expr(a, w, body)?;
                let bv = self.lower_self(b, body)?;
                let signed = av.signed;
                let irop = map_binop(op, signed, signed);
                Ok(self.emit_compute(Compute::Binary(irop, av.id, bv.id), w, signed, pos, body))
            }
            VBinary::Eq
            | VBinary::Neq
            | VBinary::CaseEq
            | VBinary::CaseNeq
            | VBinary::Lt
            | VBinary::Gt
            | VBinary::Le
            | VBinary::Ge => {
                let wc = self.width_of(a)?.max(self.width_of(b)?);
                let av = self.lower_expr(a, wc, body)?;
                let bv = self.lower_expr(b, wc, body)?;
                let both = av.signed && bv.signed;
                let irop = map_binop(op, both, av.signed);
                let r = self.emit_compute(Compute::Binary(irop, av.id, bv.id), 1, false, pos, body);
                Ok(self.extend_to(r, w, pos, body))
            }
            VBinary::LogicAnd | VBinary::LogicOr => {
                let av = self.lower_self(a, body)?;
                let ta = self.truthy(av, pos, body);
                let bv = self.lower_self(b, body)?;
                let tb = self.truthy(bv, pos, body);
                let irop = if op == VBinary::LogicAnd { BinaryOp::And } else { BinaryOp::Or };
                let r = self.emit_compute(Compute::Binary(irop, ta.id, tb.id), 1, false, pos, body);
                Ok(self.extend_to(r, w, pos, body))
            }
        }
    }

    // -- access resolution ----------------------------------------------------

    /// Maps a source bit index to the canonical LSB-zero offset.
    fn map_bit(&self, si: &SigInfo, i: usize, pos: &Pos) -> Result<usize, FrontendError> {
        let w = match &si.ty {
            Type::Array { elem, .. } => elem.width().unwrap_or(1),
            t => t.width().unwrap_or(1),
        };
        let hi = si.lo + w - 1;
        if i < si.lo || i > hi {
            return Err(elab(pos, format!("bit index {i} out of declared range")));
        }
        Ok(if si.asc { hi - i } else { i - si.lo })
    }

    /// Resolves the base of a select: either a scalar signal or an array
    /// element (emitting the index computation).
    fn resolve_base(
        &mut self,
        e: &Expr,
        body: &mut ProcBody,
    ) -> Result<(String, Option<String>, SigInfo), FrontendError> {
        match e {
            Expr::Ident(n, pos) => {
                if self.params.contains_key(n) {
                    return Err(elab(pos, format!("cannot select from parameter `{n}`")));
                }
                let si = self
                    .sigs
                    .get(n)
                    .cloned()
                    .ok_or_else(|| elab(pos, format!("undeclared identifier `{n}`")))?;
                Ok((n.clone(), None, si))
            }
            Expr::Index(base, idx, pos) => {
                let Expr::Ident(n, _) = &**base else {
                    return Err(elab(pos, "unsupported select base"));
                };
                let Some((_, len, si)) = self.array_of(n) else {
                    return Err(elab(pos, "unsupported select base"));
                };
                let idx_id = self.lower_array_index(idx, len, si.arr_lo, pos, body)?;
                Ok((n.clone(), Some(idx_id), si))
            }
            _ => Err(elab(e.pos(), "unsupported select base")),
        }
    }

    /// Lowers an array index, adjusting for a nonzero low bound.
    fn lower_array_index(
        &mut self,
        idx: &Expr,
        len: usize,
        arr_lo: usize,
        pos: &Pos,
        body: &mut ProcBody,
    ) -> Result<String, FrontendError> {
        if let Ok(v) = self.const_eval(idx) {
            let i = v
                .to_u64()
                .ok_or_else(|| elab(pos, format!("array index {v} is not defined")))?
                as usize;
            if i < arr_lo || i - arr_lo >= len {
                return Err(elab(pos, format!("array index {i} out of declared range")));
            }
            return Ok(self.intern_const(&LogicVec::from_u64(32, (i - arr_lo) as u64)));
        }
        let iv = self.lower_self(idx, body)?;
        if arr_lo == 0 {
            return Ok(iv.id);
        }
        let lo = self.intern_const(&LogicVec::from_u64(iv.width, arr_lo as u64));
        Ok(self
            .emit_compute(Compute::Binary(BinaryOp::Sub, iv.id, lo), iv.width, false, pos, body)
            .id)
    }

    /// Computes the canonical offset id for a variable bit position: for a
    /// descending range this is `idx - lo`, for an ascending one `hi - idx`.
    fn offset_id(
        &mut self,
        si: &SigInfo,
        idx: &Expr,
        pos: &Pos,
        body: &mut ProcBody,
    ) -> Result<String, FrontendError> {
        let iv = self.lower_self(idx, body)?;
        let w = match &si.ty {
            Type::Array { elem, .. } => elem.width().unwrap_or(1),
            t => t.width().unwrap_or(1),
        };
        if si.asc {
            let hi = si.lo + w - 1;
            let c = self.intern_const(&LogicVec::from_u64(iv.width.max(min_width(hi as u64)), hi as u64));
            let cw = iv.width.max(min_width(hi as u64));
            let ivx = self.extend_to(iv, cw, pos, body);
            Ok(self
                .emit_compute(Compute::Binary(BinaryOp::Sub, c, ivx.id), cw, false, pos, body)
                .id)
        } else if si.lo == 0 {
            Ok(iv.id)
        } else {
            let c = self.intern_const(&LogicVec::from_u64(iv.width, si.lo as u64));
            Ok(self
                .emit_compute(Compute::Binary(BinaryOp::Sub, iv.id, c), iv.width, false, pos, body)
                .id)
        }
    }

    /// Resolves an access expression (identifier, bit/part select, array
    /// element) to an IR access plus its width.
    fn lower_access_expr(
        &mut self,
        e: &Expr,
        body: &mut ProcBody,
    ) -> Result<LoweredAccess, FrontendError> {
        match e {
            Expr::Ident(n, pos) => {
                if self.params.contains_key(n) {
                    let v = &self.params[n];
                    return Ok(LoweredAccess {
                        access: Access::local(n),
                        width: v.width(),
                        signed: v.is_signed(),
                    });
                }
                let si = self
                    .sigs
                    .get(n)
                    .ok_or_else(|| elab(pos, format!("undeclared identifier `{n}`")))?;
                let w = si
                    .ty
                    .width()
                    .ok_or_else(|| elab(pos, format!("array `{n}` used without an index")))?;
                Ok(LoweredAccess { access: Access::local(n), width: w, signed: si.ty.is_signed() })
            }
            Expr::Index(base, idx, pos) => {
                // Array element access (no bit select)?
                if let Expr::Ident(n, _) = &**base {
                    if let Some((elem, len, si)) = self.array_of(n) {
                        let idx_id = self.lower_array_index(idx, len, si.arr_lo, pos, body)?;
                        let w = elem.width().unwrap_or(1);
                        return Ok(LoweredAccess {
                            access: Access { path: vec![n.clone()], index: Some(idx_id), sel: None },
                            width: w,
                            signed: false,
                        });
                    }
                }
                // Bit select on a scalar or an array element.
                let (sig, index, si) = self.resolve_base(base, body)?;
                if let Ok(v) = self.const_eval(idx) {
                    let i = v
                        .to_u64()
                        .ok_or_else(|| elab(pos, format!("bit index {v} is not defined")))?
                        as usize;
                    let off = self.map_bit(&si, i, pos)?;
                    return Ok(LoweredAccess {
                        access: Access { path: vec![sig], index, sel: Some(Selector::Range(off, off)) },
                        width: 1,
                        signed: false,
                    });
                }
                let off = self.offset_id(&si, idx, pos, body)?;
                Ok(LoweredAccess {
                    access: Access { path: vec![sig], index, sel: Some(Selector::IndexedUp(off, 1)) },
                    width: 1,
                    signed: false,
                })
            }
            Expr::Range(base, m, l, pos) => {
                let (sig, index, si) = self.resolve_base(base, body)?;
                let ms = self.const_usize(m, "part-select bound")?;
                let ls = self.const_usize(l, "part-select bound")?;
                let (hi_off, lo_off) = if si.asc {
                    if ms > ls {
                        return Err(elab(pos, format!("part select [{ms}:{ls}] is reversed")));
                    }
                    (self.map_bit(&si, ms, pos)?, self.map_bit(&si, ls, pos)?)
                } else {
                    if ms < ls {
                        return Err(elab(pos, format!("part select [{ms}:{ls}] is reversed")));
                    }
                    (self.map_bit(&si, ms, pos)?, self.map_bit(&si, ls, pos)?)
                };
                Ok(LoweredAccess {
                    access: Access {
                        path: vec![sig],
                        index,
                        sel: Some(Selector::Range(hi_off, lo_off)),
                    },
                    width: hi_off - lo_off + 1,
                    signed: false,
                })
            }
            Expr::IndexedRange { base, start, width, up, pos } => {
                let (sig, index, si) = self.resolve_base(base, body)?;
                let w = self.const_usize(width, "part-select width")?;
                if w == 0 {
                    return Err(elab(pos, "zero-width part select"));
                }
                // A constant start folds to a plain range. `+:` covers source
                // indices s..=s+w-1 and `-:` covers s-w+1..=s, regardless of
                // the declared direction.
                if let Ok(v) = self.const_eval(start) {
                    let s = v
                        .to_u64()
                        .ok_or_else(|| elab(pos, format!("part-select base {v} is not defined")))?
                        as usize;
                    let (first, last) = if *up {
                        (s, s + w - 1)
                    } else {
                        if s + 1 < w {
                            return Err(elab(pos, "part select extends past the end of the vector"));
                        }
                        (s - (w - 1), s)
                    };
                    let (a, b) = (self.map_bit(&si, first, pos)?, self.map_bit(&si, last, pos)?);
                    let (hi_off, lo_off) = (a.max(b), a.min(b));
                    return Ok(LoweredAccess {
                        access: Access {
                            path: vec![sig],
                            index,
                            sel: Some(Selector::Range(hi_off, lo_off)),
                        },
                        width: w,
                        signed: false,
                    });
                }
                let off = self.offset_id(&si, start, pos, body)?;
                // In canonical offsets, `+:` ascends from the offset for a
                // descending declaration and descends for an ascending one.
                let sel = match (si.asc, *up) {
                    (false, true) | (true, false) => Selector::IndexedUp(off, w),
                    (false, false) | (true, true) => Selector::IndexedDown(off, w),
                };
                Ok(LoweredAccess {
                    access: Access { path: vec![sig], index, sel: Some(sel) },
                    width: w,
                    signed: false,
                })
            }
            _ => Err(elab(e.pos(), "expected a signal, bit select, or part select")),
        }
    }

    /// Loads an access into a value: plain accesses are used directly,
    /// everything else goes through a temporary.
    fn load(&mut self, la: LoweredAccess, pos: &Pos, body: &mut ProcBody) -> Val {
        if la.access.is_plain() {
            return Val { id: la.access.path[0].clone(), width: la.width, signed: la.signed };
        }
        let id = self.fresh_tmp(la.width);
        body.push(
            IrStmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local(&id),
                rhs: Rvalue::Access(la.access),
            }),
            pos,
        );
        Val { id, width: la.width, signed: la.signed }
    }

    // -- assignments ----------------------------------------------------------

    /// Width of an assignment target expression.
    fn lhs_width(&self, lhs: &Expr) -> Result<usize, FrontendError> {
        if let Expr::Concat(parts, _) = lhs {
            let mut w = 0;
            for p in parts {
                w += self.lhs_width(p)?;
            }
            return Ok(w);
        }
        self.width_of(lhs)
    }

    /// Rejects continuous assignment to regs and procedural assignment to
    /// nets; temporaries and hierarchical targets are exempt.
    fn check_store_kind(
        &self,
        access: &Access,
        op: AssignOp,
        pos: &Pos,
    ) -> Result<(), FrontendError> {
        if access.path.len() != 1 {
            return Ok(());
        }
        let Some(si) = self.sigs.get(&access.path[0]) else {
            return Ok(());
        };
        let name = &access.path[0];
        match op {
            AssignOp::Continuous if !si.is_net => {
                Err(elab(pos, format!("continuous assignment to reg `{name}`")))
            }
            AssignOp::Blocking | AssignOp::NonBlocking if si.is_net => {
                Err(elab(pos, format!("procedural assignment to wire `{name}`")))
            }
            _ => Ok(()),
        }
    }

    /// Stores a flattened value into an assignment target (plain signal,
    /// select, array element, or concatenation of targets).
    fn store_val(
        &mut self,
        lhs: &Expr,
        val: Val,
        op: AssignOp,
        pos: &Pos,
        body: &mut ProcBody,
    ) -> Result<(), FrontendError> {
        if let Expr::Concat(parts, _) = lhs {
            let mut hi = val.width;
            for part in parts {
                let la = self.lower_access_expr(part, body)?;
                self.check_store_kind(&la.access, op, pos)?;
                if la.width > hi {
                    return Err(elab(pos, "concatenation target wider than its value"));
                }
                let (phi, plo) = (hi - 1, hi - la.width);
                hi -= la.width;
                if la.access.is_plain() {
                    body.push(
                        IrStmt::Assign(Assign {
                            op,
                            lhs: la.access,
                            rhs: Rvalue::Access(Access {
                                path: vec![val.id.clone()],
                                index: None,
                                sel: Some(Selector::Range(phi, plo)),
                            }),
                        }),
                        pos,
                    );
                } else {
                    let part_val = self.load(
                        LoweredAccess {
                            access: Access {
                                path: vec![val.id.clone()],
                                index: None,
                                sel: Some(Selector::Range(phi, plo)),
                            },
                            width: la.width,
                            signed: false,
                        },
                        pos,
                        body,
                    );
                    body.push(
                        IrStmt::Assign(Assign {
                            op,
                            lhs: la.access,
                            rhs: Rvalue::Access(Access::local(part_val.id)),
                        }),
                        pos,
                    );
                }
            }
            if hi != 0 {
                return Err(elab(pos, "concatenation target narrower than its value"));
            }
            return Ok(());
        }
        let la = self.lower_access_expr(lhs, body)?;
        self.check_store_kind(&la.access, op, pos)?;
        debug_assert_eq!(la.width, val.width);
        body.push(
            IrStmt::Assign(Assign {
                op,
                lhs: la.access,
                rhs: Rvalue::Access(Access::local(val.id)),
            }),
            pos,
        );
        Ok(())
    }

    /// Lowers `lhs <op> rhs` including context sizing and final truncation.
    fn lower_assignment(
        &mut self,
        pos: &Pos,
        op: AssignOp,
        lhs: &Expr,
        rhs: &Expr,
        body: &mut ProcBody,
    ) -> Result<(), FrontendError> {
        let wl = self.lhs_width(lhs)?;
        // Direct copy: plain-enough access on the right at matching width.
        if !matches!(lhs, Expr::Concat(..))
            && matches!(rhs, Expr::Ident(..) | Expr::Index(..) | Expr::Range(..) | Expr::IndexedRange { .. })
            && self.width_of(rhs)? == wl
        {
            let la = self.lower_access_expr(lhs, body)?;
            self.check_store_kind(&la.access, op, pos)?;
            let ra = self.lower_access_expr(rhs, body)?;
            if la.access.is_plain() || ra.access.is_plain() {
                body.push(
                    IrStmt::Assign(Assign { op, lhs: la.access, rhs: Rvalue::Access(ra.access) }),
                    pos,
                );
                return Ok(());
            }
            let v = self.load(ra, pos, body);
            body.push(
                IrStmt::Assign(Assign {
                    op,
                    lhs: la.access,
                    rhs: Rvalue::Access(Access::local(v.id)),
                }),
                pos,
            );
            return Ok(());
        }
        let wr = self.width_of(rhs)?;
        let w = wl.max(wr);
        let v = self.lower_expr(rhs, w, body)?;
        let v = if w > wl { self.truncate_to(v, wl, pos, body) } else { v };
        self.store_val(lhs, v, op, pos, body)
    }

    // -- reads collection -------------------------------------------------------

    /// Collects identifiers read by an expression, in first-occurrence order,
    /// skipping compile-time constants.
    fn expr_reads(&self, e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Ident(n, _) => {
                if !self.params.contains_key(n) && !out.iter().any(|x| x == n) {
                    out.push(n.clone());
                }
            }
            Expr::Sized(..) | Expr::Unsized(..) | Expr::Str(..) | Expr::Real(..) => {}
            Expr::Unary(_, a, _) => self.expr_reads(a, out),
            Expr::Binary(_, a, b, _) => {
                self.expr_reads(a, out);
                self.expr_reads(b, out);
            }
            Expr::Ternary(c, t, f, _) => {
                self.expr_reads(c, out);
                self.expr_reads(t, out);
                self.expr_reads(f, out);
            }
            Expr::Concat(parts, _) => parts.iter().for_each(|p| self.expr_reads(p, out)),
            Expr::Repl(c, parts, _) => {
                self.expr_reads(c, out);
                parts.iter().for_each(|p| self.expr_reads(p, out));
            }
            Expr::Index(b, i, _) => {
                self.expr_reads(b, out);
                self.expr_reads(i, out);
            }
            Expr::Range(b, m, l, _) => {
                self.expr_reads(b, out);
                self.expr_reads(m, out);
                self.expr_reads(l, out);
            }
            Expr::IndexedRange { base, start, width, .. } => {
                self.expr_reads(base, out);
                self.expr_reads(start, out);
                self.expr_reads(width, out);
            }
        }
    }

    /// Identifiers read by an assignment *target*: select and array indices.
    fn lhs_reads(&self, e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Ident(..) => {}
            Expr::Index(b, i, _) => {
                self.lhs_reads(b, out);
                self.expr_reads(i, out);
            }
            Expr::Range(b, ..) => self.lhs_reads(b, out),
            Expr::IndexedRange { base, start, .. } => {
                self.lhs_reads(base, out);
                self.expr_reads(start, out);
            }
            Expr::Concat(parts, _) => parts.iter().for_each(|p| self.lhs_reads(p, out)),
            _ => {}
        }
    }

    /// Identifiers read anywhere in a statement; the `@(*)` expansion.
    fn stmt_reads(&self, s: &Stmt, out: &mut Vec<String>) {
        match s {
            Stmt::Block(ss) => ss.iter().for_each(|s| self.stmt_reads(s, out)),
            Stmt::If { cond, then_s, else_s, .. } => {
                self.expr_reads(cond, out);
                self.stmt_reads(then_s, out);
                if let Some(e) = else_s {
                    self.stmt_reads(e, out);
                }
            }
            Stmt::Case { subject, arms, default, .. } => {
                self.expr_reads(subject, out);
                for (pats, body) in arms {
                    pats.iter().for_each(|p| self.expr_reads(p, out));
                    self.stmt_reads(body, out);
                }
                if let Some(d) = default {
                    self.stmt_reads(d, out);
                }
            }
            Stmt::Assign { lhs, rhs, .. } => {
                self.expr_reads(rhs, out);
                self.lhs_reads(lhs, out);
            }
            Stmt::Timed { body, .. } => {
                if let Some(b) = body {
                    self.stmt_reads(b, out);
                }
            }
            Stmt::Syscall { args, .. } => args.iter().for_each(|a| self.expr_reads(a, out)),
            Stmt::Empty => {}
        }
    }

    fn has_timing(s: &Stmt) -> bool {
        match s {
            Stmt::Timed { .. } => true,
            Stmt::Block(ss) => ss.iter().any(Self::has_timing),
            Stmt::If { then_s, else_s, .. } => {
                Self::has_timing(then_s)
                    || else_s.as_ref().map(|e| Self::has_timing(e)).unwrap_or(false)
            }
            Stmt::Case { arms, default, .. } => {
                arms.iter().any(|(_, b)| Self::has_timing(b))
                    || default.as_ref().map(|d| Self::has_timing(d)).unwrap_or(false)
            }
            _ => false,
        }
    }

    // -- event controls -----------------------------------------------------------

    /// Builds an event access without emitting statements: only simple
    /// signal references and constant selects qualify.
    fn event_access(&mut self, e: &Expr) -> Result<Access, FrontendError> {
        let mut scratch = ProcBody::new();
        let la = self.lower_access_expr(e, &mut scratch)?;
        if !scratch.stmts.is_empty() {
            return Err(elab(
                e.pos(),
                "event expressions must be signals or constant selects",
            ));
        }
        Ok(la.access)
    }

    fn lower_events(
        &mut self,
        evs: &[super::ast::EventAst],
    ) -> Result<Vec<EventExpr>, FrontendError> {
        let mut out = Vec::new();
        for ev in evs {
            let access = self.event_access(&ev.expr)?;
            let edge = match ev.edge {
                EdgeAst::Any => Edge::Any,
                EdgeAst::Pos => Edge::Pos,
                EdgeAst::Neg => Edge::Neg,
            };
            out.push(EventExpr { edge, access });
        }
        Ok(out)
    }

    fn any_edge_events(&self, reads: &[String]) -> Vec<EventExpr> {
        reads
            .iter()
            .map(|r| EventExpr { edge: Edge::Any, access: Access::local(r) })
            .collect()
    }

    // -- statements --------------------------------------------------------------

    fn lower_stmt(&mut self, s: &Stmt, body: &mut ProcBody) -> Result<(), FrontendError> {
        match s {
            Stmt::Block(ss) => {
                for s in ss {
                    self.lower_stmt(s, body)?;
                }
                Ok(())
            }
            Stmt::If { pos, cond, then_s, else_s } => {
                let cv = self.lower_self(cond, body)?;
                let tc = self.truthy(cv, pos, body);
                let l_then = body.fresh_label();
                let l_join = body.fresh_label();
                body.push(IrStmt::If { cond: tc.id, target: l_then.clone() }, pos);
                if let Some(e) = else_s {
                    self.lower_stmt(e, body)?;
                }
                body.push_plain(IrStmt::Goto(l_join.clone()));
                body.push_plain(IrStmt::Label(l_then));
                self.lower_stmt(then_s, body)?;
                body.push_plain(IrStmt::Label(l_join));
                Ok(())
            }
            Stmt::Case { pos, kind, subject, arms, default } => {
                self.lower_case(pos, *kind, subject, arms, default.as_deref(), body)
            }
            Stmt::Assign { pos, blocking, lhs, rhs } => {
                let op = if *blocking { AssignOp::Blocking } else { AssignOp::NonBlocking };
                self.lower_assignment(pos, op, lhs, rhs, body)
            }
            Stmt::Timed { pos, control, body: inner } => {
                let guard = match control {
                    TimingAst::Delay(e) => {
                        let v = self.const_eval(e)?;
                        if !v.is_fully_defined() {
                            return Err(elab(pos, "delay must be a defined constant"));
                        }
                        body.nonsynth = true;
                        Guard::Delay(self.intern_const(&v))
                    }
                    TimingAst::Events(evs) => Guard::Event(self.lower_events(evs)?),
                    TimingAst::Star => {
                        let mut reads = Vec::new();
                        if let Some(b) = inner {
                            self.stmt_reads(b, &mut reads);
                        }
                        Guard::Event(self.any_edge_events(&reads))
                    }
                };
                body.push(IrStmt::Guard(guard), pos);
                if let Some(b) = inner {
                    self.lower_stmt(b, body)?;
                }
                Ok(())
            }
            Stmt::Syscall { pos, name, args } => {
                let mut ins = Vec::new();
                let mut fmt: Option<String> = None;
                for a in args {
                    match a {
                        Expr::Str(s, _) => {
                            if fmt.is_none() {
                                fmt = Some(s.clone());
                            }
                        }
                        _ => {
                            let v = self.lower_self(a, body)?;
                            ins.push(v.id);
                        }
                    }
                }
                let mut st = Statement::new(IrStmt::Syscall {
                    name: name.clone(),
                    ins,
                    outs: Vec::new(),
                })
                .with_loc(&pos.file, pos.line);
                if let Some(f) = fmt {
                    st.attrs.insert("fmt", f);
                }
                body.stmts.push(st);
                Ok(())
            }
            Stmt::Empty => Ok(()),
        }
    }

    fn lower_case(
        &mut self,
        pos: &Pos,
        kind: CaseKind,
        subject: &Expr,
        arms: &[(Vec<Expr>, Stmt)],
        default: Option<&Stmt>,
        body: &mut ProcBody,
    ) -> Result<(), FrontendError> {
        let sv = self.lower_self(subject, body)?;
        let l_join = body.fresh_label();
        let arm_labels: Vec<String> = arms.iter().map(|_| body.fresh_label()).collect();
        let l_default = default.map(|_| body.fresh_label());

        let mut ir_arms: Vec<(LogicVec, String)> = Vec::new();
        for ((pats, _), label) in arms.iter().zip(&arm_labels) {
            for p in pats {
                let v = self.const_eval(p)?;
                let v = resize_pattern(&v, sv.width).map_err(|m| elab(p.pos(), m))?;
                ir_arms.push((v, label.clone()));
            }
        }
        body.push(
            IrStmt::Case {
                kind,
                subject: sv.id,
                arms: ir_arms,
                default: Some(l_default.clone().unwrap_or_else(|| l_join.clone())),
            },
            pos,
        );
        for ((_, arm_body), label) in arms.iter().zip(&arm_labels) {
            body.push_plain(IrStmt::Label(label.clone()));
            self.lower_stmt(arm_body, body)?;
            body.push_plain(IrStmt::Goto(l_join.clone()));
        }
        if let (Some(d), Some(dl)) = (default, l_default) {
            body.push_plain(IrStmt::Label(dl));
            self.lower_stmt(d, body)?;
            body.push_plain(IrStmt::Goto(l_join.clone()));
        }
        body.push_plain(IrStmt::Label(l_join));
        Ok(())
    }

    // -- items ------------------------------------------------------------------

    fn proc_attrs(&self, origin: &str, port_conn: Option<String>, pos: &Pos, nonsynth: bool) -> AttrMap {
        let mut attrs = AttrMap::new();
        attrs.insert("origin", origin);
        if let Some(pc) = port_conn {
            attrs.insert("portConn", pc);
        }
        attrs.set_loc(&pos.file, pos.line);
        if nonsynth {
            attrs.insert("synthesizable", "false");
        }
        attrs
    }

    /// Lowers an always block: an infinite loop of label, guards, body.
    pub fn lower_always(&mut self, a: &AlwaysAst) -> Result<(), FrontendError> {
        if !Self::has_timing(&a.body) {
            return Err(elab(
                &a.pos,
                "always block has no timing control and would never yield",
            ));
        }
        let mut body = ProcBody::new();
        let top = body.fresh_label();
        body.push_plain(IrStmt::Label(top.clone()));
        self.lower_stmt(&a.body, &mut body)?;
        if matches!(body.stmts.last().map(|s| &s.stmt), Some(IrStmt::Guard(_))) {
            body.push_plain(IrStmt::Pass);
        }
        body.push_plain(IrStmt::Goto(top));
        let attrs = self.proc_attrs("always", None, &a.pos, body.nonsynth);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    /// Lowers an initial block to a one-shot, non-synthesizable Proc.
    pub fn lower_initial(&mut self, i: &InitialAst) -> Result<(), FrontendError> {
        let mut body = ProcBody::new();
        self.lower_stmt(&i.body, &mut body)?;
        let attrs = self.proc_attrs("always", None, &i.pos, true);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    /// Lowers `assign lhs = rhs;` to a Proc monitoring the right-hand side's
    /// reads; with no reads it degenerates to a one-shot definition.
    pub fn lower_assign_item(&mut self, a: &AssignAst) -> Result<(), FrontendError> {
        let mut reads = Vec::new();
        self.expr_reads(&a.rhs, &mut reads);
        self.lhs_reads(&a.lhs, &mut reads);
        let mut body = ProcBody::new();
        let top = if reads.is_empty() {
            None
        } else {
            let top = body.fresh_label();
            body.push_plain(IrStmt::Label(top.clone()));
            body.push(IrStmt::Guard(Guard::Event(self.any_edge_events(&reads))), &a.pos);
            Some(top)
        };
        self.lower_assignment(&a.pos, AssignOp::Continuous, &a.lhs, &a.rhs, &mut body)?;
        if let Some(top) = top {
            body.push_plain(IrStmt::Goto(top));
        }
        let attrs = self.proc_attrs("assign", None, &a.pos, body.nonsynth);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    /// Lowers a gate primitive to one continuous-assignment Proc.
    pub fn lower_gate(&mut self, g: &GateAst) -> Result<(), FrontendError> {
        let (outs, ins): (Vec<&Expr>, Vec<&Expr>) = match g.kind {
            GateKind::Buf | GateKind::Not => {
                let n = g.terms.len();
                if n < 2 {
                    return Err(elab(&g.pos, "buffer gates take outputs and one input"));
                }
                (g.terms[..n - 1].iter().collect(), vec![&g.terms[n - 1]])
            }
            _ => {
                if g.terms.len() < 3 {
                    return Err(elab(&g.pos, "logic gates take one output and two or more inputs"));
                }
                (vec![&g.terms[0]], g.terms[1..].iter().collect())
            }
        };
        let mut reads = Vec::new();
        for i in &ins {
            self.expr_reads(i, &mut reads);
        }
        for o in &outs {
            self.lhs_reads(o, &mut reads);
        }
        let mut body = ProcBody::new();
        let top = if reads.is_empty() {
            None
        } else {
            let top = body.fresh_label();
            body.push_plain(IrStmt::Label(top.clone()));
            body.push(IrStmt::Guard(Guard::Event(self.any_edge_events(&reads))), &g.pos);
            Some(top)
        };

        let mut wmax = 1usize;
        for o in &outs {
            wmax = wmax.max(self.lhs_width(o)?);
        }
        for i in &ins {
            wmax = wmax.max(self.width_of(i)?);
        }
        match g.kind {
            GateKind::Buf | GateKind::Not => {
                let v = self.lower_expr(ins[0], wmax, &mut body)?;
                let v = if g.kind == GateKind::Not {
                    self.emit_compute(Compute::Unary(UnaryOp::Not, v.id), wmax, false, &g.pos, &mut body)
                } else {
                    v
                };
                for o in &outs {
                    let wo = self.lhs_width(o)?;
                    let vo = if wo < wmax {
                        self.truncate_to(v.clone(), wo, &g.pos, &mut body)
                    } else {
                        v.clone()
                    };
                    self.store_val(o, vo, AssignOp::Continuous, &g.pos, &mut body)?;
                }
            }
            _ => {
                let irop = match g.kind {
                    GateKind::And | GateKind::Nand => BinaryOp::And,
                    GateKind::Or | GateKind::Nor => BinaryOp::Or,
                    _ => BinaryOp::Xor,
                };
                let mut acc = self.lower_expr(ins[0], wmax, &mut body)?;
                for i in &ins[1..] {
                    let iv = self.lower_expr(i, wmax, &mut body)?;
                    acc = self.emit_compute(
                        Compute::Binary(irop, acc.id, iv.id),
                        wmax,
                        false,
                        &g.pos,
                        &mut body,
                    );
                }
                if matches!(g.kind, GateKind::Nand | GateKind::Nor | GateKind::Xnor) {
                    acc = self.emit_compute(Compute::Unary(UnaryOp::Not, acc.id), wmax, false, &g.pos, &mut body);
                }
                let wo = self.lhs_width(outs[0])?;
                let vo = if wo < wmax { self.truncate_to(acc, wo, &g.pos, &mut body) } else { acc };
                self.store_val(outs[0], vo, AssignOp::Continuous, &g.pos, &mut body)?;
            }
        }
        if let Some(top) = top {
            body.push_plain(IrStmt::Goto(top));
        }
        let attrs = self.proc_attrs("assign", None, &g.pos, body.nonsynth);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    // -- port connections -----------------------------------------------------

    /// Lowers a connection to an instance input: `inst.port <- expr`,
    /// monitoring the expression's reads.
    pub fn lower_port_conn_input(
        &mut self,
        inst: &str,
        port: &str,
        port_ty: &Type,
        conn: &Expr,
        pos: &Pos,
    ) -> Result<(), FrontendError> {
        let mut reads = Vec::new();
        self.expr_reads(conn, &mut reads);
        let mut body = ProcBody::new();
        let top = if reads.is_empty() {
            None
        } else {
            let top = body.fresh_label();
            body.push_plain(IrStmt::Label(top.clone()));
            body.push(IrStmt::Guard(Guard::Event(self.any_edge_events(&reads))), pos);
            Some(top)
        };
        let wp = port_ty.width().unwrap_or(1);
        let w = wp.max(self.width_of(conn)?);
        let v = self.lower_expr(conn, w, &mut body)?;
        let v = if w > wp { self.truncate_to(v, wp, pos, &mut body) } else { v };
        body.push(
            IrStmt::Assign(Assign {
                op: AssignOp::Continuous,
                lhs: Access::hier(vec![inst.to_string(), port.to_string()]),
                rhs: Rvalue::Access(Access::local(v.id)),
            }),
            pos,
        );
        if let Some(top) = top {
            body.push_plain(IrStmt::Goto(top));
        }
        let attrs = self.proc_attrs("assign", Some(format!("to:{inst}")), pos, body.nonsynth);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    /// Lowers a connection from an instance output: `lvalue <- inst.port`,
    /// monitoring the instance port.
    pub fn lower_port_conn_output(
        &mut self,
        inst: &str,
        port: &str,
        port_ty: &Type,
        conn: &Expr,
        pos: &Pos,
    ) -> Result<(), FrontendError> {
        let mut body = ProcBody::new();
        let top = body.fresh_label();
        body.push_plain(IrStmt::Label(top.clone()));
        let hier = Access::hier(vec![inst.to_string(), port.to_string()]);
        body.push(
            IrStmt::Guard(Guard::Event(vec![EventExpr { edge: Edge::Any, access: hier.clone() }])),
            pos,
        );
        let wp = port_ty.width().unwrap_or(1);
        let wl = self.lhs_width(conn)?;
        if wl == wp {
            if let Expr::Ident(n, _) = conn {
                if !self.params.contains_key(n) && self.sigs.contains_key(n) {
                    self.check_store_kind(&Access::local(n), AssignOp::Continuous, pos)?;
                    body.push(
                        IrStmt::Assign(Assign {
                            op: AssignOp::Continuous,
                            lhs: Access::local(n),
                            rhs: Rvalue::Access(hier),
                        }),
                        pos,
                    );
                    body.push_plain(IrStmt::Goto(top));
                    let attrs =
                        self.proc_attrs("assign", Some(format!("from:{inst}")), pos, body.nonsynth);
                    self.procs.push(Proc { attrs, body: body.stmts });
                    return Ok(());
                }
            }
        }
        // General case: load the port into a temporary, adapt the width,
        // then store into the target.
        let tmp = self.fresh_tmp(wp);
        body.push(
            IrStmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local(&tmp),
                rhs: Rvalue::Access(hier),
            }),
            pos,
        );
        let mut v = Val { id: tmp, width: wp, signed: port_ty.is_signed() };
        if wl < wp {
            v = self.truncate_to(v, wl, pos, &mut body);
        } else if wl > wp {
            v = self.extend_to(v, wl, pos, &mut body);
        }
        self.store_val(conn, v, AssignOp::Continuous, pos, &mut body)?;
        body.push_plain(IrStmt::Goto(top));
        let attrs = self.proc_attrs("assign", Some(format!("from:{inst}")), pos, body.nonsynth);
        self.procs.push(Proc { attrs, body: body.stmts });
        Ok(())
    }

    /// Whether a connection expression reads a driven value: a plain signal
    /// (or select of one) counts as driven if some Proc assigns it; computed
    /// expressions always produce a driven value.
    pub fn conn_is_driven(&self, e: &Expr, driven: &BTreeSet<String>) -> bool {
        match e {
            Expr::Ident(n, _) => driven.contains(n) || self.params.contains_key(n),
            Expr::Index(b, _, _) | Expr::Range(b, _, _, _) => self.conn_is_driven(b, driven),
            Expr::IndexedRange { base, .. } => self.conn_is_driven(base, driven),
            Expr::Concat(parts, _) => parts.iter().all(|p| self.conn_is_driven(p, driven)),
            _ => true,
        }
    }

    /// The IR type of a connection expression, for signature inference.
    pub fn conn_type(&self, e: &Expr) -> Result<Type, FrontendError> {
        let w = self.width_of(e)?;
        Ok(if self.signed_of(e) { Type::sbv(w) } else { Type::bv(w) })
    }
}

/// Truthiness of a constant: 1-bit "any bit set".
fn truthy_const(v: &LogicVec) -> LogicVec {
    if v.width() == 1 {
        return v.clone().with_signed(false);
    }
    crate::bitvec::eval_unop(UnaryOp::Ror, v)
}
