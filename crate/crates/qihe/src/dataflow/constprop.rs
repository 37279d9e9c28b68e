//! Flow-insensitive bit-level constant propagation: the least fixpoint of
//! abstract transfers over every assignment in the elaborated design,
//! joining `=`/`<=` drivers and resolving `<-` drivers per net kind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::chain::{resolve_base, DefChain};
use super::defuse::{access_base, stmt_facts_of};
use super::{bodies, BodyRef, Hierarchy, StmtId};
use crate::bitvec::{
    abs_binop, abs_cast, abs_join, abs_mux, abs_select, abs_sext, abs_unop, abs_zext, AbsBit,
    AbsVec, LogicBit,
};
use crate::ir::{
    Access, AssignOp, Compute, Design, Dir, Module, NetKind, Rvalue, Selector, Stmt, Type,
};

/// The abstract state of one signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsState {
    Value(AbsVec),
    /// Arrays and reals are outside the bit-vector domain.
    Unmodeled,
}

impl AbsState {
    pub fn value(&self) -> Option<&AbsVec> {
        match self {
            AbsState::Value(v) => Some(v),
            AbsState::Unmodeled => None,
        }
    }
}

/// Per-signal abstract values for the whole elaborated design.
#[derive(Clone, Debug)]
pub struct ConstMap {
    pub hierarchy: Arc<Hierarchy>,
    /// (instance, signal, state) in instance pre-order, declaration order.
    entries: Vec<(usize, String, AbsState)>,
    index: BTreeMap<(usize, String), usize>,
    /// Value-changing signal updates performed by the fixpoint loop.
    pub iterations: usize,
    /// Total modeled bits, for the iteration bound.
    pub total_bits: usize,
}

impl ConstMap {
    pub fn state(&self, inst: usize, sig: &str) -> Option<&AbsState> {
        let &i = self.index.get(&(inst, sig.to_string()))?;
        Some(&self.entries[i].2)
    }

    /// The signal's abstract value; `None` for unmodeled or unknown names.
    pub fn value(&self, inst: usize, sig: &str) -> Option<&AbsVec> {
        self.state(inst, sig)?.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &AbsState)> {
        self.entries.iter().map(|(i, s, st)| (*i, s.as_str(), st))
    }
}

/// How writes land on a signal.
#[derive(Clone, Copy, PartialEq, Eq)]
enum SigKind {
    Var,
    Net(NetKind),
}

struct SigInfo {
    inst: usize,
    name: String,
    /// Bit width; `None` marks the signal unmodeled.
    width: Option<usize>,
    kind: SigKind,
    seed: Option<AbsVec>,
}

/// One assignment-like statement contributing to a signal.
struct Site {
    stmt: StmtId,
    /// Host instance of the statement.
    inst: usize,
    /// Signal the statement stores into.
    target: usize,
    op: AssignOp,
}

struct Builder<'a> {
    design: &'a Design,
    h: &'a Hierarchy,
    sigs: Vec<SigInfo>,
    index: BTreeMap<(usize, String), usize>,
}

impl<'a> Builder<'a> {
    fn sig_id(&self, inst: usize, base: &str) -> Option<usize> {
        let (i, s) = resolve_base(self.h, self.design, inst, base)?;
        self.index.get(&(i, s)).copied()
    }
}

/// Computes the constant map. `top_inputs_any` widens top-module input
/// ports from "driven logic levels" (all-B) to fully unknown (all-T).
pub fn analyze_const_prop(
    design: &Design,
    chain: Arc<DefChain>,
    top_inputs_any: bool,
) -> ConstMap {
    let hierarchy = chain.hierarchy.clone();
    let h = &*hierarchy;

    // Signal table: every declared net and var of every instance,
    // temporaries included.
    let mut sigs: Vec<SigInfo> = Vec::new();
    let mut index: BTreeMap<(usize, String), usize> = BTreeMap::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let m = &design.modules[inst.module];
        let decls = m
            .nets
            .iter()
            .map(|n| (n.id.as_str(), &n.ty, SigKind::Net(n.kind), n.dir, n.attrs.get_text("xlit")))
            .chain(m.vars.iter().map(|v| (v.id.as_str(), &v.ty, SigKind::Var, v.dir, None)));
        for (name, ty, kind, _dir, _xlit) in decls {
            index.insert((ii, name.to_string()), sigs.len());
            sigs.push(SigInfo {
                inst: ii,
                name: name.to_string(),
                width: match ty {
                    Type::Bv { width, .. } => Some(*width),
                    Type::Real | Type::Array { .. } => None,
                },
                kind,
                seed: None,
            });
        }
    }

    // Contribution sites: every def found in any body, resolved to its
    // target signal.
    let b = Builder { design, h, sigs, index };
    let mut sites: Vec<Site> = Vec::new();
    let mut drivers: Vec<Vec<usize>> = vec![Vec::new(); b.sigs.len()];
    let mut site_reads: Vec<Vec<usize>> = Vec::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let m = &design.modules[mi];
        for (body_ref, body) in bodies(m) {
            for (si, s) in body.iter().enumerate() {
                let facts = stmt_facts_of(m, &s.stmt);
                if facts.defs.is_empty() {
                    continue;
                }
                let reads: Vec<usize> =
                    facts.uses.iter().filter_map(|u| b.sig_id(ii, u)).collect();
                for (acc, op) in &facts.defs {
                    let Some(target) = b.sig_id(ii, &access_base(acc)) else { continue };
                    sites.push(Site {
                        stmt: StmtId::new(mi, body_ref, si),
                        inst: ii,
                        target,
                        op: *op,
                    });
                    drivers[target].push(sites.len() - 1);
                    site_reads.push(reads.clone());
                }
            }
        }
    }
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); b.sigs.len()];
    for (si, reads) in site_reads.iter().enumerate() {
        for &r in reads {
            readers[r].push(si);
        }
    }

    // Seeds. An input port is "driven from outside" when some site targets
    // it (a parent port connection); otherwise its value is environmental.
    let mut sigs = b.sigs;
    for (ii, inst) in h.instances.iter().enumerate() {
        let m = &design.modules[inst.module];
        for n in &m.nets {
            let id = b.index[&(ii, n.id.clone())];
            let Some(w) = sigs[id].width else { continue };
            if let Some(kind) = n.attrs.get_text("xlit") {
                let fill = if kind == "z" { AbsBit::Z } else { AbsBit::X };
                sigs[id].seed = Some(AbsVec::filled(w, fill));
                continue;
            }
            seed_port(&mut sigs[id], n.dir, w, ii, h, m, &drivers[id], top_inputs_any);
        }
        for v in &m.vars {
            let id = b.index[&(ii, v.id.clone())];
            let Some(w) = sigs[id].width else { continue };
            seed_port(&mut sigs[id], v.dir, w, ii, h, m, &drivers[id], top_inputs_any);
        }
    }

    // Fixpoint. Values start at seed-or-bottom; contributions at bottom.
    let mut values: Vec<AbsState> = sigs
        .iter()
        .map(|s| match s.width {
            Some(_) => AbsState::Value(recombine(s, &[])),
            None => AbsState::Unmodeled,
        })
        .collect();
    let mut contribs: Vec<Option<AbsVec>> = vec![None; sites.len()];
    let mut iterations = 0usize;
    let total_bits: usize = sigs.iter().map(|s| s.width.unwrap_or(0)).sum();
    // Each modeled bit can rise at most 3 times (U -> fixed -> B -> T); 7x
    // leaves slack for resolution effects. Overrunning it means a transfer
    // is not monotone.
    let bound = 7 * total_bits.max(1);

    let mut work: BTreeSet<usize> = (0..sites.len()).collect();
    while let Some(&site_id) = work.iter().next() {
        work.remove(&site_id);
        let site = &sites[site_id];
        let target = &sigs[site.target];
        let Some(w) = target.width else { continue };
        let new_contrib = eval_site(design, h, site, w, &b.index, &values);
        if contribs[site_id].as_ref() == Some(&new_contrib) {
            continue;
        }
        contribs[site_id] = Some(new_contrib);
        let parts: Vec<(AssignOp, &AbsVec)> = drivers[site.target]
            .iter()
            .filter_map(|&d| contribs[d].as_ref().map(|c| (sites[d].op, c)))
            .collect();
        let combined = recombine(target, &parts);
        if values[site.target].value() != Some(&combined) {
            iterations += 1;
            assert!(
                iterations <= bound,
                "constant propagation exceeded its monotone iteration bound"
            );
            values[site.target] = AbsState::Value(combined);
            work.extend(readers[site.target].iter().copied());
        }
    }

    // The fixpoint must be stable: one more application of every transfer
    // changes nothing.
    for (site_id, site) in sites.iter().enumerate() {
        let target = &sigs[site.target];
        let Some(w) = target.width else { continue };
        let again = eval_site(design, h, site, w, &b.index, &values);
        assert_eq!(
            contribs[site_id].as_ref(),
            Some(&again),
            "constant propagation did not reach a fixpoint"
        );
    }

    let mut entries = Vec::with_capacity(sigs.len());
    let mut out_index = BTreeMap::new();
    for (id, s) in sigs.iter().enumerate() {
        out_index.insert((s.inst, s.name.clone()), entries.len());
        entries.push((s.inst, s.name.clone(), values[id].clone()));
    }
    ConstMap { hierarchy, entries, index: out_index, iterations, total_bits }
}

/// Environmental seeds for ports: top inputs carry driven logic levels,
/// undriven non-top inputs and external-module outputs are fully unknown.
#[allow(clippy::too_many_arguments)]
fn seed_port(
    sig: &mut SigInfo,
    dir: Option<Dir>,
    w: usize,
    inst: usize,
    h: &Hierarchy,
    m: &Module,
    drivers: &[usize],
    top_inputs_any: bool,
) {
    match dir {
        Some(Dir::Input) => {
            if h.instances[inst].parent.is_none() {
                let fill = if top_inputs_any { AbsBit::T } else { AbsBit::B };
                sig.seed = Some(AbsVec::filled(w, fill));
            } else if drivers.is_empty() {
                sig.seed = Some(AbsVec::filled(w, AbsBit::T));
            }
        }
        Some(Dir::Output) => {
            if m.is_external() {
                sig.seed = Some(AbsVec::filled(w, AbsBit::T));
            }
        }
        None => {}
    }
}

/// Joins and resolves all current contributions into a signal value.
fn recombine(sig: &SigInfo, parts: &[(AssignOp, &AbsVec)]) -> AbsVec {
    let w = sig.width.expect("recombine only on modeled signals");
    let mut acc = sig.seed.clone().unwrap_or_else(|| AbsVec::bottom(w));
    // Procedural writes join; they model one location holding the last
    // written value.
    for (op, c) in parts {
        if *op != AssignOp::Continuous {
            acc = abs_join(&acc, c);
        }
    }
    // Continuous drivers all push at once; the net kind resolves them.
    let cont: Vec<&AbsVec> = parts
        .iter()
        .filter(|(op, _)| *op == AssignOp::Continuous)
        .map(|(_, c)| *c)
        .collect();
    let kind = match sig.kind {
        SigKind::Net(k) => k,
        SigKind::Var => NetKind::Wire,
    };
    let resolved = match kind {
        NetKind::Supply0 => Some(AbsVec::filled(w, AbsBit::Zero)),
        NetKind::Supply1 => Some(AbsVec::filled(w, AbsBit::One)),
        NetKind::Tri0 | NetKind::Tri1 => {
            let mut r = AbsVec::filled(w, AbsBit::Z);
            for c in &cont {
                r = resolve_vec(LogicBit::resolve_wire, &r, c);
            }
            let pull = if kind == NetKind::Tri0 { LogicBit::Zero } else { LogicBit::One };
            Some(map_bits(&r, |b| {
                gamma_fold(b, |v| if v == LogicBit::Z { pull } else { v })
            }))
        }
        NetKind::Wand | NetKind::Triand => {
            fold_drivers(&cont, LogicBit::resolve_wand)
        }
        NetKind::Wor | NetKind::Trior => fold_drivers(&cont, LogicBit::resolve_wor),
        NetKind::Wire | NetKind::Uwire | NetKind::Tri => {
            fold_drivers(&cont, LogicBit::resolve_wire)
        }
    };
    if let Some(r) = resolved {
        acc = abs_join(&acc, &r);
    }
    acc
}

fn fold_drivers(cont: &[&AbsVec], table: fn(LogicBit, LogicBit) -> LogicBit) -> Option<AbsVec> {
    let mut it = cont.iter();
    let first = (*it.next()?).clone();
    Some(it.fold(first, |acc, c| resolve_vec(table, &acc, c)))
}

/// Exact abstract lift of a concrete two-driver resolution table.
fn resolve_vec(table: fn(LogicBit, LogicBit) -> LogicBit, a: &AbsVec, b: &AbsVec) -> AbsVec {
    debug_assert_eq!(a.width(), b.width());
    let bits: Vec<AbsBit> = (0..a.width())
        .rev()
        .map(|i| {
            let (x, y) = (a.bit(i), b.bit(i));
            let mut out = AbsBit::U;
            for &cx in x.gamma() {
                for &cy in y.gamma() {
                    out = out.join(AbsBit::alpha(table(cx, cy)));
                }
            }
            out
        })
        .collect();
    AbsVec::new(bits, false)
}

fn map_bits(a: &AbsVec, f: impl Fn(AbsBit) -> AbsBit) -> AbsVec {
    let bits: Vec<AbsBit> = (0..a.width()).rev().map(|i| f(a.bit(i))).collect();
    AbsVec::new(bits, false)
}

fn gamma_fold(b: AbsBit, f: impl Fn(LogicBit) -> LogicBit) -> AbsBit {
    let mut out = AbsBit::U;
    for &v in b.gamma() {
        out = out.join(AbsBit::alpha(f(v)));
    }
    out
}

/// Evaluates one contribution at target width `w`.
fn eval_site(
    design: &Design,
    h: &Hierarchy,
    site: &Site,
    w: usize,
    index: &BTreeMap<(usize, String), usize>,
    values: &[AbsState],
) -> AbsVec {
    let m = &design.modules[h.instances[site.inst].module];
    let body = match site.stmt.body {
        BodyRef::Proc(p) => &m.procs[p as usize].body,
        BodyRef::Func(f) => &m.funcs[f as usize].body,
    };
    let env = Env { design, h, inst: site.inst, index, values };
    match &body[site.stmt.stmt as usize].stmt {
        Stmt::Assign(a) => {
            let rhs = match &a.rhs {
                Rvalue::Access(src) => env.read_access(src),
                Rvalue::Compute(c) => env.eval_compute(c),
            };
            embed(&env, &a.lhs, rhs, w)
        }
        // Receives and syscalls produce values the domain cannot see.
        _ => AbsVec::filled(w, AbsBit::T),
    }
}

struct Env<'a> {
    design: &'a Design,
    h: &'a Hierarchy,
    inst: usize,
    index: &'a BTreeMap<(usize, String), usize>,
    values: &'a [AbsState],
}

impl<'a> Env<'a> {
    /// The value of an identifier operand: a named constant or a signal.
    /// `None` means unmodeled.
    fn read_ident(&self, id: &str) -> Option<AbsVec> {
        let (bi, sig) = resolve_base(self.h, self.design, self.inst, id)?;
        let bm = &self.design.modules[self.h.instances[bi].module];
        if let Some(c) = bm.konst(&sig) {
            return Some(AbsVec::alpha(&c.value));
        }
        let &sid = self.index.get(&(bi, sig))?;
        match &self.values[sid] {
            AbsState::Value(v) => Some(v.clone()),
            AbsState::Unmodeled => None,
        }
    }

    /// A constant index/select base with a single fixed unsigned value.
    fn fixed_index(&self, id: &str) -> Option<u64> {
        self.read_ident(id)?.to_u64()
    }

    fn read_access(&self, a: &Access) -> Option<AbsVec> {
        let (bi, sig) = resolve_base(self.h, self.design, self.inst, &access_base(a))?;
        let bm = &self.design.modules[self.h.instances[bi].module];
        let ty = bm.type_of(&sig)?;
        if a.index.is_some() {
            // Array reads are unmodeled; surface element-width unknown.
            let ew = ty.element().width()?;
            return Some(AbsVec::filled(ew, AbsBit::T));
        }
        let base = if let Some(c) = bm.konst(&sig) {
            AbsVec::alpha(&c.value)
        } else {
            let &sid = self.index.get(&(bi, sig))?;
            match &self.values[sid] {
                AbsState::Value(v) => v.clone(),
                AbsState::Unmodeled => return None,
            }
        };
        match &a.sel {
            None => Some(base),
            Some(Selector::Range(msb, lsb)) => Some(abs_select(&base, *msb, *lsb)),
            Some(Selector::IndexedUp(b, sw)) => match self.fixed_index(b) {
                Some(lsb) => {
                    let lsb = lsb as usize;
                    Some(abs_select(&base, lsb + sw - 1, lsb))
                }
                None => Some(AbsVec::filled(*sw, AbsBit::T)),
            },
            Some(Selector::IndexedDown(b, sw)) => match self.fixed_index(b) {
                Some(msb) => {
                    let msb = msb as usize;
                    if msb + 1 >= *sw {
                        Some(abs_select(&base, msb, msb + 1 - sw))
                    } else {
                        Some(AbsVec::filled(*sw, AbsBit::T))
                    }
                }
                None => Some(AbsVec::filled(*sw, AbsBit::T)),
            },
        }
    }

    fn eval_compute(&self, c: &Compute) -> Option<AbsVec> {
        Some(match c {
            Compute::Unary(op, a) => abs_unop(*op, &self.read_ident(a)?),
            Compute::Binary(op, a, b) => {
                abs_binop(*op, &self.read_ident(a)?, &self.read_ident(b)?)
            }
            Compute::Mux(s, t, e) => abs_mux(
                &self.read_ident(s)?,
                &self.read_ident(t)?,
                &self.read_ident(e)?,
            ),
            Compute::Zext(a, ty) => abs_zext(&self.read_ident(a)?, ty.width()?),
            Compute::Sext(a, ty) => abs_sext(&self.read_ident(a)?, ty.width()?),
            Compute::Cast(a, ty) => {
                abs_cast(&self.read_ident(a)?, ty.width()?, ty.is_signed())
            }
        })
    }
}

/// Fits `rhs` (None = unmodeled) into the written slice of a `w`-bit
/// target; unwritten bits contribute bottom.
fn embed(env: &Env, lhs: &Access, rhs: Option<AbsVec>, w: usize) -> AbsVec {
    // Dynamic array element writes never reach here (arrays are
    // unmodeled), but a dynamic part-select write can touch any position.
    let dynamic_sel = match &lhs.sel {
        Some(Selector::IndexedUp(b, _)) | Some(Selector::IndexedDown(b, _)) => {
            env.fixed_index(b).is_none()
        }
        _ => false,
    };
    if dynamic_sel {
        return AbsVec::filled(w, AbsBit::T);
    }
    let (msb, lsb) = match &lhs.sel {
        None => (w - 1, 0),
        Some(Selector::Range(m, l)) => (*m, *l),
        Some(Selector::IndexedUp(b, sw)) => {
            let lsb = env.fixed_index(b).expect("static by dynamic_sel check") as usize;
            (lsb + sw - 1, lsb)
        }
        Some(Selector::IndexedDown(b, sw)) => {
            let msb = env.fixed_index(b).expect("static by dynamic_sel check") as usize;
            (msb, msb.saturating_sub(sw - 1))
        }
    };
    let slice_w = msb - lsb + 1;
    let v = match rhs {
        Some(v) => adapt(&v, slice_w),
        None => AbsVec::filled(slice_w, AbsBit::T),
    };
    let bits: Vec<AbsBit> = (0..w)
        .rev()
        .map(|i| {
            if i >= lsb && i <= msb {
                v.bit(i - lsb)
            } else {
                AbsBit::U
            }
        })
        .collect();
    AbsVec::new(bits, false)
}

/// Verilog assignment resizing: truncate high bits, or extend per the
/// source's signedness.
fn adapt(v: &AbsVec, w: usize) -> AbsVec {
    if v.width() == w {
        v.clone()
    } else if v.is_signed() {
        abs_sext(v, w)
    } else {
        abs_zext(v, w)
    }
}

/// Deterministic text rendering: one `value` record per signal.
pub fn dump(_design: &Design, c: &ConstMap) -> String {
    let mut out = String::new();
    for (inst, sig, state) in c.iter() {
        let q = c.hierarchy.qualified(inst, sig);
        match state {
            AbsState::Value(v) => writeln!(out, "value {q} {v}").unwrap(),
            AbsState::Unmodeled => writeln!(out, "value {q} unmodeled").unwrap(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::{BinaryOp, LogicVec};
    use crate::ir::{
        Assign, ConstDecl, EventExpr, Guard, Inst, NetDecl, Proc,
        Statement, VarDecl,
    };

    fn var(id: &str, width: usize) -> VarDecl {
        VarDecl { id: id.into(), ty: Type::bv(width), dir: None, attrs: Default::default() }
    }

    fn port_var(id: &str, width: usize, dir: Dir) -> VarDecl {
        VarDecl { id: id.into(), ty: Type::bv(width), dir: Some(dir), attrs: Default::default() }
    }

    fn net(id: &str, width: usize, kind: NetKind) -> NetDecl {
        NetDecl { id: id.into(), kind, ty: Type::bv(width), dir: None, attrs: Default::default() }
    }

    fn konst(id: &str, width: usize, value: u64) -> ConstDecl {
        ConstDecl { id: id.into(), value: LogicVec::from_u64(width, value), attrs: Default::default() }
    }

    fn proc_of(stmts: Vec<Stmt>) -> Proc {
        let mut p = Proc::default();
        p.body = stmts.into_iter().map(Statement::new).collect();
        p
    }

    fn cont(lhs: &str, rhs: &str) -> Stmt {
        Stmt::Assign(Assign {
            op: AssignOp::Continuous,
            lhs: Access::local(lhs),
            rhs: Rvalue::Access(Access::local(rhs)),
        })
    }

    fn analyze(d: &Design) -> ConstMap {
        analyze_with(d, false)
    }

    fn analyze_with(d: &Design, any: bool) -> ConstMap {
        let du = Arc::new(super::super::analyze_def_use(d));
        let h = Arc::new(super::super::analyze_hierarchy(d).unwrap());
        let chain = Arc::new(super::super::build_def_chain(d, du, h));
        analyze_const_prop(d, chain, any)
    }

    fn abs(text: &str) -> AbsVec {
        let bits: Vec<AbsBit> = text
            .chars()
            .map(|c| match c {
                'U' => AbsBit::U,
                '0' => AbsBit::Zero,
                '1' => AbsBit::One,
                'X' => AbsBit::X,
                'Z' => AbsBit::Z,
                'B' => AbsBit::B,
                'T' => AbsBit::T,
                _ => panic!("bad abs char {c}"),
            })
            .collect();
        AbsVec::new(bits, false)
    }

    #[test]
    fn constant_drive_is_the_constant() {
        let mut m = Module::new("m");
        m.nets.push(net("w", 1, NetKind::Wire));
        m.consts.push(konst("$c1", 1, 1));
        m.procs.push(proc_of(vec![cont("w", "$c1")]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "w"), Some(&abs("1")));
    }

    #[test]
    fn conflicting_wire_drivers_read_x() {
        let mut m = Module::new("m");
        m.nets.push(net("w", 1, NetKind::Wire));
        m.consts.push(konst("$c1", 1, 1));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![cont("w", "$c1")]));
        m.procs.push(proc_of(vec![cont("w", "$c0")]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "w"), Some(&abs("X")));
    }

    #[test]
    fn wand_and_wor_resolve_dominantly() {
        let mut m = Module::new("m");
        m.nets.push(net("wa", 1, NetKind::Wand));
        m.nets.push(net("wo", 1, NetKind::Wor));
        m.consts.push(konst("$c1", 1, 1));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![cont("wa", "$c1"), cont("wo", "$c1")]));
        m.procs.push(proc_of(vec![cont("wa", "$c0"), cont("wo", "$c0")]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "wa"), Some(&abs("0")), "0 wins on wand");
        assert_eq!(c.value(0, "wo"), Some(&abs("1")), "1 wins on wor");
    }

    /// The reset/increment counter: drivers are the reset constant and the
    /// incremented previous value; the fixpoint climbs to all-B.
    fn counter_design() -> Design {
        let mut m = Module::new("m");
        m.vars.push(port_var("clk", 1, Dir::Input));
        m.vars.push(port_var("rst", 1, Dir::Input));
        m.vars.push(var("count", 5));
        m.vars.push(var("wide", 6));
        m.vars.push(var("$t0", 5));
        m.vars.push(var("$t1", 6));
        m.consts.push(konst("$c0", 5, 0));
        m.consts.push(konst("$c1", 5, 1));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: crate::ir::Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::If { cond: "rst".into(), target: "$Lr".into() },
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t0"),
                rhs: Rvalue::Compute(Compute::Binary(
                    BinaryOp::Add,
                    "count".into(),
                    "$c1".into(),
                )),
            }),
            Stmt::Assign(Assign {
                op: AssignOp::NonBlocking,
                lhs: Access::local("count"),
                rhs: Rvalue::Access(Access::local("$t0")),
            }),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$Lr".into()),
            Stmt::Assign(Assign {
                op: AssignOp::NonBlocking,
                lhs: Access::local("count"),
                rhs: Rvalue::Access(Access::local("$c0")),
            }),
            Stmt::Goto("$L1".into()),
        ]));
        m.procs.push(proc_of(vec![
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t1"),
                rhs: Rvalue::Compute(Compute::Zext("count".into(), Type::bv(6))),
            }),
            Stmt::Assign(Assign {
                op: AssignOp::Continuous,
                lhs: Access::local("wide"),
                rhs: Rvalue::Access(Access::local("$t1")),
            }),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        d
    }

    #[test]
    fn reset_and_increment_climb_to_all_boolean() {
        let d = counter_design();
        let c = analyze(&d);
        assert_eq!(c.value(0, "count"), Some(&abs("BBBBB")));
        assert_eq!(c.value(0, "wide"), Some(&abs("0BBBBB")), "zero extension pins the top bit");
    }

    /// Independent oracle: enumerate the concrete values reachable from the
    /// reset value through the two drivers; the bitwise envelope of that
    /// set must match the abstract result.
    #[test]
    fn counter_envelope_matches_brute_force_reachability() {
        let mut reach: BTreeSet<u64> = BTreeSet::new();
        let mut frontier = vec![0u64];
        while let Some(v) = frontier.pop() {
            if !reach.insert(v) {
                continue;
            }
            frontier.push((v + 1) & 0x1f);
            frontier.push(0);
        }
        let mut envelope = AbsVec::bottom(5);
        for v in &reach {
            envelope = abs_join(&envelope, &AbsVec::alpha(&LogicVec::from_u64(5, *v)));
        }
        let d = counter_design();
        let c = analyze(&d);
        assert_eq!(c.value(0, "count"), Some(&envelope));
        assert_eq!(envelope, abs("BBBBB"));
    }

    #[test]
    fn iteration_count_stays_within_monotone_bound() {
        let d = counter_design();
        let c = analyze(&d);
        assert!(c.iterations <= 7 * c.total_bits, "{} > 7x{}", c.iterations, c.total_bits);
    }

    #[test]
    fn top_input_seeding_is_a_knob() {
        let d = counter_design();
        let c = analyze(&d);
        assert_eq!(c.value(0, "rst"), Some(&abs("B")));
        let c = analyze_with(&d, true);
        assert_eq!(c.value(0, "rst"), Some(&abs("T")));
    }

    #[test]
    fn xz_literal_nets_read_as_their_literal() {
        let mut m = Module::new("m");
        let mut xn = net("$x0", 2, NetKind::Wire);
        xn.attrs.insert("xlit", "x");
        let mut zn = net("$x1", 1, NetKind::Wire);
        zn.attrs.insert("xlit", "z");
        m.nets.push(xn);
        m.nets.push(zn);
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "$x0"), Some(&abs("XX")));
        assert_eq!(c.value(0, "$x1"), Some(&abs("Z")));
    }

    #[test]
    fn child_input_flows_from_parent_and_external_output_is_unknown() {
        let mut top = Module::new("top");
        top.nets.push(net("y", 4, NetKind::Wire));
        top.consts.push(konst("$c5", 4, 5));
        top.insts.push(Inst { id: "i".into(), module: "ext".into(), attrs: Default::default() });
        top.procs.push(proc_of(vec![Stmt::Assign(Assign {
            op: AssignOp::Continuous,
            lhs: Access::hier(vec!["i".into(), "a".into()]),
            rhs: Rvalue::Access(Access::local("$c5")),
        })]));
        top.procs.push(proc_of(vec![Stmt::Assign(Assign {
            op: AssignOp::Continuous,
            lhs: Access::local("y"),
            rhs: Rvalue::Access(Access::hier(vec!["i".into(), "b".into()])),
        })]));
        let mut ext = Module::new("ext");
        ext.attrs.insert("external", "true");
        let mut a = net("a", 4, NetKind::Wire);
        a.dir = Some(Dir::Input);
        let mut bn = net("b", 4, NetKind::Wire);
        bn.dir = Some(Dir::Output);
        ext.nets.push(a);
        ext.nets.push(bn);
        let mut d = Design::new("t");
        d.modules = vec![top, ext];
        let c = analyze(&d);
        assert_eq!(c.value(1, "a"), Some(&abs("0101")), "parent connection reaches the child");
        assert_eq!(c.value(1, "b"), Some(&abs("TTTT")), "external outputs are unknown");
        assert_eq!(c.value(0, "y"), Some(&abs("TTTT")));
    }

    #[test]
    fn unconnected_child_input_is_unknown_not_bottom() {
        let mut top = Module::new("top");
        top.insts.push(Inst { id: "i".into(), module: "leaf".into(), attrs: Default::default() });
        let mut leaf = Module::new("leaf");
        leaf.vars.push(port_var("a", 2, Dir::Input));
        let mut d = Design::new("t");
        d.modules = vec![top, leaf];
        let c = analyze(&d);
        assert_eq!(c.value(1, "a"), Some(&abs("TT")));
    }

    #[test]
    fn partial_width_write_leaves_other_bits_bottom() {
        let mut m = Module::new("m");
        m.vars.push(var("r", 8));
        m.consts.push(konst("$c9", 4, 9));
        m.procs.push(proc_of(vec![Stmt::Assign(Assign {
            op: AssignOp::NonBlocking,
            lhs: Access { path: vec!["r".into()], index: None, sel: Some(Selector::Range(3, 0)) },
            rhs: Rvalue::Access(Access::local("$c9")),
        })]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "r"), Some(&abs("UUUU1001")));
    }

    #[test]
    fn undriven_tri0_reads_zero_and_arrays_stay_unmodeled() {
        let mut m = Module::new("m");
        m.nets.push(net("t0", 2, NetKind::Tri0));
        m.vars.push(VarDecl {
            id: "mem".into(),
            ty: Type::Array { elem: Box::new(Type::bv(8)), len: 4 },
            dir: None,
            attrs: Default::default(),
        });
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(c.value(0, "t0"), Some(&abs("00")));
        assert!(matches!(c.state(0, "mem"), Some(AbsState::Unmodeled)));
        assert_eq!(c.value(0, "mem"), None);
    }

    #[test]
    fn dump_is_one_record_per_line() {
        let mut m = Module::new("m");
        m.nets.push(net("w", 1, NetKind::Wire));
        m.consts.push(konst("$c1", 1, 1));
        m.procs.push(proc_of(vec![cont("w", "$c1")]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let c = analyze(&d);
        assert_eq!(dump(&d, &c), "value m.w 1\n");
    }
}
