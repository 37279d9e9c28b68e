//! Reset-logic extraction: for each register, a branch on a one-bit signal
//! where one side stores a constant into the register.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use super::regs::RegMap;
use crate::bitvec::{
    eval_binop, eval_cast, eval_mux, eval_select, eval_sext, eval_unop, eval_zext, BinaryOp,
    LogicBit, LogicVec, UnaryOp,
};
use crate::dataflow::{
    is_temp, resolve_base, BodyRef, CfgSet, ConstMap, EdgeKind, Hierarchy, StmtId,
};
use crate::ir::{Access, Compute, Design, Module, Rvalue, Selector, Statement, Stmt};

/// Which level of the reset signal asserts the reset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    ActiveHigh,
    ActiveLow,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::ActiveHigh => "high",
            Polarity::ActiveLow => "low",
        })
    }
}

/// Reported strength of the classification; never used to filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Low => "low",
            Confidence::Medium => "medium",
            Confidence::High => "high",
        })
    }
}

/// One register's extracted reset logic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetInfo {
    /// The controlling signal as (instance, signal).
    pub signal: (usize, String),
    pub polarity: Polarity,
    /// The constant stored on the resetting side.
    pub value: LogicVec,
    /// The evidencing assignment.
    pub site: StmtId,
    pub confidence: Confidence,
}

/// Reset logic per register; registers without one are absent.
#[derive(Clone, Debug)]
pub struct ResetMap {
    pub hierarchy: Arc<Hierarchy>,
    resets: BTreeMap<(usize, String), ResetInfo>,
}

impl ResetMap {
    pub fn reset_of(&self, inst: usize, sig: &str) -> Option<&ResetInfo> {
        self.resets.get(&(inst, sig.to_string()))
    }

    pub fn len(&self) -> usize {
        self.resets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &ResetInfo)> {
        self.resets.iter().map(|((i, s), info)| (*i, s.as_str(), info))
    }
}

struct Candidate {
    signal: (usize, String),
    polarity: Polarity,
    value: LogicVec,
    site: StmtId,
    name_hit: bool,
}

/// Extracts reset logic for every register: search the branches of each
/// updating Proc for a one-bit condition whose one side stores a constant
/// (per const-prop) into the register.
pub fn infer_resets(
    design: &Design,
    regs: Arc<RegMap>,
    consts: Arc<ConstMap>,
    cfg: Arc<CfgSet>,
) -> ResetMap {
    let hierarchy = regs.hierarchy.clone();
    let h = &*hierarchy;

    let mut chosen: BTreeMap<(usize, String), Candidate> = BTreeMap::new();
    for (ri, rsig, info) in regs.iter() {
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut searched: Vec<(usize, StmtId)> = Vec::new();
        for &(hi, site) in &info.sites {
            let body_key = (hi, StmtId::new(site.module as usize, site.body, 0));
            if searched.contains(&body_key) {
                continue;
            }
            searched.push(body_key);
            let mi = site.module as usize;
            let m = &design.modules[mi];
            let BodyRef::Proc(pi) = site.body else { continue };
            let body = &m.procs[pi as usize].body;
            let c = cfg.cfg(mi, site.body);
            for node in 0..body.len() {
                let Some(bi) = c.branch_info(body, node) else { continue };
                let Some((cond, invert)) = unwrap_cond(m, body, node, &bi.subject) else {
                    continue;
                };
                let Some((ci, csig)) = resolve_base(h, design, hi, &cond) else { continue };
                let cm = &design.modules[h.instances[ci].module];
                if cm.konst(&csig).is_some()
                    || is_temp(cm, &csig)
                    || cm.type_of(&csig).and_then(|t| t.width()) != Some(1)
                {
                    continue;
                }
                for arm in &bi.arms {
                    let side_high = match arm.kind {
                        EdgeKind::IfTaken => true,
                        EdgeKind::IfNotTaken => false,
                        EdgeKind::CaseArm(_) => match &arm.pattern {
                            Some(p) if p.width() == 1 && p.bit(0) == LogicBit::One => true,
                            Some(p) if p.width() == 1 && p.bit(0) == LogicBit::Zero => false,
                            _ => continue,
                        },
                        _ => continue,
                    };
                    for &sj in &arm.exclusive {
                        let Stmt::Assign(a) = &body[sj].stmt else { continue };
                        if !(a.lhs.index.is_none() && a.lhs.sel.is_none()) {
                            continue;
                        }
                        let base = a.lhs.path.join(".");
                        if resolve_base(h, design, hi, &base) != Some((ri, rsig.to_string()))
                        {
                            continue;
                        }
                        let Some(value) = fixed_rvalue(design, h, &consts, hi, &a.rhs) else {
                            continue;
                        };
                        candidates.push(Candidate {
                            signal: (ci, csig.clone()),
                            polarity: if side_high != invert {
                                Polarity::ActiveHigh
                            } else {
                                Polarity::ActiveLow
                            },
                            value,
                            site: StmtId::new(mi, site.body, sj),
                            name_hit: names_reset(&csig),
                        });
                    }
                }
            }
        }
        // Convention-named signals outrank, else first discovery wins.
        candidates.sort_by(|a, b| b.name_hit.cmp(&a.name_hit));
        if let Some(best) = candidates.into_iter().next() {
            chosen.insert((ri, rsig.to_string()), best);
        }
    }

    // A signal that resets several registers is more likely a real reset.
    let mut uses: BTreeMap<&(usize, String), usize> = BTreeMap::new();
    for cand in chosen.values() {
        *uses.entry(&cand.signal).or_insert(0) += 1;
    }
    let resets = chosen
        .iter()
        .map(|(key, cand)| {
            let score = cand.name_hit as usize + (uses[&cand.signal] >= 2) as usize;
            let confidence = match score {
                0 => Confidence::Low,
                1 => Confidence::Medium,
                _ => Confidence::High,
            };
            (
                key.clone(),
                ResetInfo {
                    signal: cand.signal.clone(),
                    polarity: cand.polarity,
                    value: cand.value.clone(),
                    site: cand.site,
                    confidence,
                },
            )
        })
        .collect();
    ResetMap { hierarchy, resets }
}

fn names_reset(sig: &str) -> bool {
    let lower = sig.to_ascii_lowercase();
    lower.contains("rst") || lower.contains("reset")
}

/// Chases a branch condition through frontend temporaries: copies and
/// buffers pass through, `not` flips the sense, and comparison against a
/// one-bit constant reduces to the compared signal.
fn unwrap_cond(
    m: &Module,
    body: &[Statement],
    node: usize,
    start: &str,
) -> Option<(String, bool)> {
    let mut sig = start.to_string();
    let mut invert = false;
    for _ in 0..16 {
        if m.konst(&sig).is_some() {
            return None;
        }
        if !is_temp(m, &sig) {
            return Some((sig, invert));
        }
        let def = body[..node].iter().rposition(|s| {
            matches!(&s.stmt, Stmt::Assign(a) if a.lhs.is_plain() && a.lhs.leaf() == sig)
        })?;
        let Stmt::Assign(a) = &body[def].stmt else { unreachable!() };
        match &a.rhs {
            Rvalue::Access(src) if src.is_plain() => sig = src.leaf().to_string(),
            Rvalue::Compute(Compute::Unary(UnaryOp::Buf, x)) => sig = x.clone(),
            Rvalue::Compute(Compute::Unary(UnaryOp::Not, x)) => {
                invert = !invert;
                sig = x.clone();
            }
            Rvalue::Compute(Compute::Binary(op @ (BinaryOp::Eq | BinaryOp::Neq), x, y)) => {
                let (other, k) = match (m.konst(x), m.konst(y)) {
                    (None, Some(k)) => (x, k),
                    (Some(k), None) => (y, k),
                    _ => return None,
                };
                if k.value.width() != 1 || !k.value.is_fully_defined() {
                    return None;
                }
                let one = k.value.bit(0) == LogicBit::One;
                // `== 0` and `!= 1` flip the sense; `== 1` and `!= 0` keep it.
                if one == (*op == BinaryOp::Neq) {
                    invert = !invert;
                }
                sig = other.clone();
            }
            _ => return None,
        }
    }
    None
}

/// The concrete constant an rvalue holds at the fixpoint, if it is fixed:
/// named constants and const-prop-fixed signals, through pure computes.
fn fixed_rvalue(
    design: &Design,
    h: &Hierarchy,
    consts: &ConstMap,
    inst: usize,
    rv: &Rvalue,
) -> Option<LogicVec> {
    let of_ident = |id: &str| -> Option<LogicVec> {
        let (bi, sig) = resolve_base(h, design, inst, id)?;
        let bm = &design.modules[h.instances[bi].module];
        if let Some(c) = bm.konst(&sig) {
            return if c.value.is_fully_defined() { Some(c.value.clone()) } else { None };
        }
        consts.value(bi, &sig)?.fixed_value()
    };
    let v = match rv {
        Rvalue::Access(a) => {
            if a.index.is_some() {
                return None;
            }
            let base = of_ident(&a.path.join("."))?;
            match &a.sel {
                None => base,
                Some(Selector::Range(msb, lsb)) => eval_select(&base, *msb, *lsb),
                Some(_) => return None,
            }
        }
        Rvalue::Compute(c) => match c {
            Compute::Unary(op, a) => eval_unop(*op, &of_ident(a)?),
            Compute::Binary(op, a, b) => eval_binop(*op, &of_ident(a)?, &of_ident(b)?),
            Compute::Mux(s, t, e) => eval_mux(&of_ident(s)?, &of_ident(t)?, &of_ident(e)?),
            Compute::Zext(a, ty) => eval_zext(&of_ident(a)?, ty.width()?),
            Compute::Sext(a, ty) => eval_sext(&of_ident(a)?, ty.width()?),
            Compute::Cast(a, ty) => eval_cast(&of_ident(a)?, ty.width()?, ty.is_signed()),
        },
    };
    if v.is_fully_defined() {
        Some(v)
    } else {
        None
    }
}

/// Deterministic text rendering: one `reset` record per register.
pub fn dump(design: &Design, r: &ResetMap) -> String {
    let mut out = String::new();
    for (inst, sig, info) in r.iter() {
        let q = r.hierarchy.qualified(inst, sig);
        let qs = r.hierarchy.qualified(info.signal.0, &info.signal.1);
        writeln!(
            out,
            "reset {q} signal {qs} {} value {} confidence {} site {}",
            info.polarity,
            info.value,
            info.confidence,
            info.site.render(design)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{
        analyze_const_prop, analyze_def_use, analyze_hierarchy, analyze_reaching_guards,
        build_cfg, build_def_chain,
    };
    use crate::hwinfer::{infer_clocks, infer_regs};
    use crate::ir::{
        Assign, AssignOp, CaseKind, ConstDecl, Design, Dir, Edge, EventExpr, Guard, Module,
        Proc, Type, VarDecl,
    };

    fn var(id: &str, width: usize, dir: Option<Dir>) -> VarDecl {
        VarDecl { id: id.into(), ty: Type::bv(width), dir, attrs: Default::default() }
    }

    fn konst(id: &str, width: usize, value: u64) -> ConstDecl {
        ConstDecl {
            id: id.into(),
            value: LogicVec::from_u64(width, value),
            attrs: Default::default(),
        }
    }

    fn proc_of(stmts: Vec<Stmt>) -> Proc {
        let mut p = Proc::default();
        p.body = stmts.into_iter().map(Statement::new).collect();
        p
    }

    fn nb(lhs: &str, rhs: &str) -> Stmt {
        Stmt::Assign(Assign {
            op: AssignOp::NonBlocking,
            lhs: Access::local(lhs),
            rhs: Rvalue::Access(Access::local(rhs)),
        })
    }

    fn infer(d: &Design) -> ResetMap {
        let du = Arc::new(analyze_def_use(d));
        let h = Arc::new(analyze_hierarchy(d).unwrap());
        let chain = Arc::new(build_def_chain(d, du, h));
        let cfg = Arc::new(build_cfg(d));
        let guards = Arc::new(analyze_reaching_guards(d, cfg.clone()));
        let clocks = Arc::new(infer_clocks(d, chain.clone(), guards.clone()));
        let regs = Arc::new(infer_regs(d, guards, clocks));
        let consts = Arc::new(analyze_const_prop(d, chain, false));
        infer_resets(d, regs, consts, cfg)
    }

    /// `if (rst) x <= 1; else begin x <= d; y <= d2; end` under a clock:
    /// x has reset logic, y has none.
    fn one_reset_one_bare() -> Design {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("rst", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("d2", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.vars.push(var("y", 1, None));
        m.consts.push(konst("$c1", 1, 1));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::If { cond: "rst".into(), target: "$LR".into() },
            nb("x", "d"),
            nb("y", "d2"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LR".into()),
            nb("x", "$c1"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        d
    }

    #[test]
    fn guarded_constant_store_yields_reset_entry() {
        let d = one_reset_one_bare();
        let r = infer(&d);
        let x = r.reset_of(0, "x").unwrap();
        assert_eq!(x.signal, (0, "rst".to_string()));
        assert_eq!(x.polarity, Polarity::ActiveHigh);
        assert_eq!(x.value, LogicVec::from_u64(1, 1));
        assert_eq!(x.confidence, Confidence::Medium, "named rst, resets one register");
        assert!(r.reset_of(0, "y").is_none(), "y stores no constant under the branch");
        assert_eq!(
            dump(&d, &r),
            "reset m.x signal m.rst high value 1'b1 confidence medium site m/proc0/s7\n"
        );
    }

    #[test]
    fn else_side_constant_reads_as_active_low() {
        // if (en) x <= d; else x <= 0  --  reset asserts when en is 0.
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("en", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::If { cond: "en".into(), target: "$LD".into() },
            nb("x", "$c0"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LD".into()),
            nb("x", "d"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        let x = r.reset_of(0, "x").unwrap();
        assert_eq!(x.signal, (0, "en".to_string()));
        assert_eq!(x.polarity, Polarity::ActiveLow);
        assert_eq!(x.confidence, Confidence::Low, "no naming convention, one register");
    }

    #[test]
    fn negated_condition_flips_polarity() {
        // $t0 = not rstn; if ($t0) x <= 0  --  active low on rstn.
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("rstn", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.vars.push(var("$t0", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t0"),
                rhs: Rvalue::Compute(Compute::Unary(UnaryOp::Not, "rstn".into())),
            }),
            Stmt::If { cond: "$t0".into(), target: "$LR".into() },
            nb("x", "d"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LR".into()),
            nb("x", "$c0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        let x = r.reset_of(0, "x").unwrap();
        assert_eq!(x.signal, (0, "rstn".to_string()));
        assert_eq!(x.polarity, Polarity::ActiveLow);
    }

    #[test]
    fn comparison_with_zero_flips_polarity() {
        // $t0 = eq rstn 0; if ($t0) x <= 0  --  active low.
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("rstn", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.vars.push(var("$t0", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t0"),
                rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Eq, "rstn".into(), "$c0".into())),
            }),
            Stmt::If { cond: "$t0".into(), target: "$LR".into() },
            nb("x", "d"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LR".into()),
            nb("x", "$c0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        let x = r.reset_of(0, "x").unwrap();
        assert_eq!(x.signal, (0, "rstn".to_string()));
        assert_eq!(x.polarity, Polarity::ActiveLow);
    }

    #[test]
    fn unconditional_constant_store_is_no_reset() {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            nb("x", "$c0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert!(r.is_empty(), "no guarding branch, no reset entry");
    }

    #[test]
    fn case_arm_pattern_sets_polarity() {
        // case (rst): 1 -> x <= 0; default -> x <= d.
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("rst", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::Case {
                kind: CaseKind::Case,
                subject: "rst".into(),
                arms: vec![(LogicVec::from_u64(1, 1), "$LR".into())],
                default: Some("$LD".into()),
            },
            Stmt::Label("$LR".into()),
            nb("x", "$c0"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LD".into()),
            nb("x", "d"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        let x = r.reset_of(0, "x").unwrap();
        assert_eq!(x.signal, (0, "rst".to_string()));
        assert_eq!(x.polarity, Polarity::ActiveHigh);
    }

    #[test]
    fn shared_reset_signal_raises_confidence() {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("rst", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.vars.push(var("y", 1, None));
        m.consts.push(konst("$c0", 1, 0));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::If { cond: "rst".into(), target: "$LR".into() },
            nb("x", "d"),
            nb("y", "d"),
            Stmt::Goto("$L1".into()),
            Stmt::Label("$LR".into()),
            nb("x", "$c0"),
            nb("y", "$c0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert_eq!(r.reset_of(0, "x").unwrap().confidence, Confidence::High);
        assert_eq!(r.reset_of(0, "y").unwrap().confidence, Confidence::High);
    }

    #[test]
    fn every_reset_entry_is_a_register() {
        let d = one_reset_one_bare();
        let du = Arc::new(analyze_def_use(&d));
        let h = Arc::new(analyze_hierarchy(&d).unwrap());
        let chain = Arc::new(build_def_chain(&d, du, h));
        let cfg = Arc::new(build_cfg(&d));
        let guards = Arc::new(analyze_reaching_guards(&d, cfg.clone()));
        let clocks = Arc::new(infer_clocks(&d, chain.clone(), guards.clone()));
        let regs = Arc::new(infer_regs(&d, guards, clocks));
        let consts = Arc::new(analyze_const_prop(&d, chain, false));
        let r = infer_resets(&d, regs.clone(), consts, cfg);
        for (i, s, _) in r.iter() {
            assert!(regs.is_register(i, s));
        }
    }
}
