//! Def-use relations: which storage each statement defines and which
//! identifiers it reads, with hierarchical accesses rendered as dotted
//! paths. Named constants are values, not signals, and never appear as
//! uses; temporaries are kept (the def-chain collapses them later).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{bodies, BodyRef, StmtId};
use crate::ir::{Access, AssignOp, Design, Module, Rvalue, Selector, Stmt};

/// Defs and uses of one statement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StmtFacts {
    /// Stored-to accesses with the operator that stores them.
    pub defs: Vec<(Access, AssignOp)>,
    /// Data reads: rhs identifiers, indices, and select bases. Sorted,
    /// deduped, dotted for hierarchical paths.
    pub uses: Vec<String>,
    /// Control reads: `if` conditions, `case` subjects, and guard event
    /// signals. Sorted, deduped.
    pub cond_uses: Vec<String>,
}

impl StmtFacts {
    pub fn is_empty(&self) -> bool {
        self.defs.is_empty() && self.uses.is_empty() && self.cond_uses.is_empty()
    }

    /// Data and control reads together, sorted and deduped.
    pub fn all_uses(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .uses
            .iter()
            .chain(self.cond_uses.iter())
            .map(String::as_str)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Def-use facts for one module, with per-base site indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDefUse {
    /// Per body, per statement, in body order.
    pub bodies: Vec<(BodyRef, Vec<StmtFacts>)>,
    def_sites: BTreeMap<String, Vec<StmtId>>,
    use_sites: BTreeMap<String, Vec<StmtId>>,
}

impl ModuleDefUse {
    pub fn facts(&self, body: BodyRef, stmt: usize) -> &StmtFacts {
        &self
            .bodies
            .iter()
            .find(|(b, _)| *b == body)
            .expect("facts built for every body")
            .1[stmt]
    }

    /// Statements defining `base` (a local identifier or dotted path),
    /// whole or in part, in body order.
    pub fn defs_of(&self, base: &str) -> &[StmtId] {
        self.def_sites.get(base).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Statements reading `base`, as data or control, in body order.
    pub fn uses_of(&self, base: &str) -> &[StmtId] {
        self.use_sites.get(base).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn defined_bases(&self) -> impl Iterator<Item = &str> {
        self.def_sites.keys().map(String::as_str)
    }

    pub fn used_bases(&self) -> impl Iterator<Item = &str> {
        self.use_sites.keys().map(String::as_str)
    }
}

/// Def-use facts for every module of a design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefUse {
    pub modules: Vec<ModuleDefUse>,
}

impl DefUse {
    pub fn facts(&self, id: StmtId) -> &StmtFacts {
        self.modules[id.module as usize].facts(id.body, id.stmt as usize)
    }
}

/// The def/use key of an access: the dotted path without index or select.
/// Array writes count as whole-array defs, part-selects as partial defs of
/// the full signal.
pub fn access_base(a: &Access) -> String {
    a.path.join(".")
}

fn push_use(m: &Module, out: &mut Vec<String>, id: impl Into<String>) {
    let id = id.into();
    // Constants are compile-time values; reading one is not a signal use.
    if !id.contains('.') && m.konst(&id).is_some() {
        return;
    }
    out.push(id);
}

fn access_reads(m: &Module, a: &Access, out: &mut Vec<String>) {
    push_use(m, out, access_base(a));
    if let Some(ix) = &a.index {
        push_use(m, out, ix.clone());
    }
    if let Some(Selector::IndexedUp(b, _)) | Some(Selector::IndexedDown(b, _)) = &a.sel {
        push_use(m, out, b.clone());
    }
}

pub(super) fn stmt_facts_of(m: &Module, stmt: &Stmt) -> StmtFacts {
    let mut f = StmtFacts::default();
    match stmt {
        Stmt::Assign(a) => {
            f.defs.push((a.lhs.clone(), a.op));
            match &a.rhs {
                Rvalue::Access(src) => access_reads(m, src, &mut f.uses),
                Rvalue::Compute(c) => {
                    for op in c.operands() {
                        push_use(m, &mut f.uses, op);
                    }
                }
            }
            if let Some(ix) = &a.lhs.index {
                push_use(m, &mut f.uses, ix.clone());
            }
            if let Some(Selector::IndexedUp(b, _)) | Some(Selector::IndexedDown(b, _)) =
                &a.lhs.sel
            {
                push_use(m, &mut f.uses, b.clone());
            }
        }
        Stmt::Guard(g) => {
            for ev in g.events() {
                push_use(m, &mut f.cond_uses, access_base(&ev.access));
                if let Some(ix) = &ev.access.index {
                    push_use(m, &mut f.cond_uses, ix.clone());
                }
            }
            if let crate::ir::Guard::Delay(d) | crate::ir::Guard::Repeat(d, _) = g {
                push_use(m, &mut f.uses, d.clone());
            }
        }
        Stmt::If { cond, .. } => push_use(m, &mut f.cond_uses, cond.clone()),
        Stmt::Case { subject, .. } => push_use(m, &mut f.cond_uses, subject.clone()),
        Stmt::Invoke { params, .. } => {
            for p in params {
                push_use(m, &mut f.uses, p.clone());
            }
        }
        Stmt::Receive { params } => {
            for p in params {
                f.defs.push((Access::local(p.clone()), AssignOp::Blocking));
            }
        }
        Stmt::Syscall { ins, outs, .. } => {
            for p in ins {
                push_use(m, &mut f.uses, p.clone());
            }
            for p in outs {
                f.defs.push((Access::local(p.clone()), AssignOp::Blocking));
            }
        }
        Stmt::Label(_) | Stmt::Goto(_) | Stmt::Return | Stmt::Pass => {}
    }
    f.uses.sort_unstable();
    f.uses.dedup();
    f.cond_uses.sort_unstable();
    f.cond_uses.dedup();
    f
}

/// Computes per-statement def-use facts for every module.
pub fn analyze_def_use(design: &Design) -> DefUse {
    let modules = design
        .modules
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let mut mdu = ModuleDefUse {
                bodies: Vec::new(),
                def_sites: BTreeMap::new(),
                use_sites: BTreeMap::new(),
            };
            for (body_ref, body) in bodies(m) {
                let facts: Vec<StmtFacts> =
                    body.iter().map(|s| stmt_facts_of(m, &s.stmt)).collect();
                for (si, f) in facts.iter().enumerate() {
                    let id = StmtId::new(mi, body_ref, si);
                    for (acc, _) in &f.defs {
                        mdu.def_sites.entry(access_base(acc)).or_default().push(id);
                    }
                    for u in f.uses.iter().chain(f.cond_uses.iter()) {
                        let sites = mdu.use_sites.entry(u.clone()).or_default();
                        if sites.last() != Some(&id) {
                            sites.push(id);
                        }
                    }
                }
                mdu.bodies.push((body_ref, facts));
            }
            mdu
        })
        .collect();
    DefUse { modules }
}

/// Deterministic text rendering: one line per statement with any facts.
pub fn dump(design: &Design, du: &DefUse) -> String {
    let join = |v: &[String]| if v.is_empty() { "-".to_string() } else { v.join(",") };
    let mut out = String::new();
    for (mi, mdu) in du.modules.iter().enumerate() {
        for (body_ref, facts) in &mdu.bodies {
            for (si, f) in facts.iter().enumerate() {
                if f.is_empty() {
                    continue;
                }
                let id = StmtId::new(mi, *body_ref, si);
                let defs: Vec<String> = f
                    .defs
                    .iter()
                    .map(|(a, op)| format!("{}{}", access_base(a), op.token()))
                    .collect();
                writeln!(
                    out,
                    "stmt {} defs {} uses {} conds {}",
                    id.render(design),
                    join(&defs),
                    join(&f.uses),
                    join(&f.cond_uses),
                )
                .unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::{BinaryOp, LogicVec};
    use crate::ir::{
        Assign, Compute, ConstDecl, Guard as IrGuard, Module, Proc,
        Statement,
    };

    fn proc_design(m: Module) -> Design {
        let mut d = Design::new("t");
        d.modules.push(m);
        d
    }

    fn module_of(body: Vec<Stmt>) -> Module {
        let mut m = Module::new("m");
        let mut p = Proc::default();
        p.body = body.into_iter().map(Statement::new).collect();
        m.procs.push(p);
        m
    }

    fn cont(lhs: Access, rhs: Rvalue) -> Stmt {
        Stmt::Assign(Assign { op: AssignOp::Continuous, lhs, rhs })
    }

    #[test]
    fn compute_defines_temp_and_uses_operand_once() {
        // $t = mul acc acc; sqr <- $t
        let m = module_of(vec![
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t"),
                rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Mul, "acc".into(), "acc".into())),
            }),
            cont(Access::local("sqr"), Rvalue::Access(Access::local("$t"))),
        ]);
        let du = analyze_def_use(&proc_design(m));
        let f0 = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(f0.defs, vec![(Access::local("$t"), AssignOp::Blocking)]);
        assert_eq!(f0.uses, vec!["acc"]);
        let f1 = du.modules[0].facts(BodyRef::Proc(0), 1);
        assert_eq!(f1.defs, vec![(Access::local("sqr"), AssignOp::Continuous)]);
        assert_eq!(f1.uses, vec!["$t"]);
        assert_eq!(du.modules[0].defs_of("sqr").len(), 1);
        assert_eq!(du.modules[0].uses_of("acc").len(), 1);
    }

    #[test]
    fn pass_has_no_facts() {
        let m = module_of(vec![Stmt::Pass]);
        let du = analyze_def_use(&proc_design(m));
        assert!(du.modules[0].facts(BodyRef::Proc(0), 0).is_empty());
    }

    #[test]
    fn hier_store_defines_dotted_port_and_uses_source() {
        // i.$t1 <- sqr
        let m = module_of(vec![cont(
            Access::hier(vec!["i".into(), "$t1".into()]),
            Rvalue::Access(Access::local("sqr")),
        )]);
        let du = analyze_def_use(&proc_design(m));
        let f = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(access_base(&f.defs[0].0), "i.$t1");
        assert_eq!(f.uses, vec!["sqr"]);
        assert_eq!(du.modules[0].defs_of("i.$t1").len(), 1);
    }

    #[test]
    fn hier_load_uses_dotted_path() {
        // local <- i.p
        let m = module_of(vec![cont(
            Access::local("local"),
            Rvalue::Access(Access::hier(vec!["i".into(), "p".into()])),
        )]);
        let du = analyze_def_use(&proc_design(m));
        let f = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(f.uses, vec!["i.p"]);
    }

    #[test]
    fn array_write_uses_index_and_defines_base() {
        // mem[i] = d
        let m = module_of(vec![Stmt::Assign(Assign {
            op: AssignOp::Blocking,
            lhs: Access { path: vec!["mem".into()], index: Some("i".into()), sel: None },
            rhs: Rvalue::Access(Access::local("d")),
        })]);
        let du = analyze_def_use(&proc_design(m));
        let f = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(access_base(&f.defs[0].0), "mem");
        assert_eq!(f.uses, vec!["d", "i"]);
    }

    #[test]
    fn control_reads_are_kept_separate() {
        let m = module_of(vec![
            Stmt::Guard(IrGuard::Event(vec![crate::ir::EventExpr {
                edge: crate::ir::Edge::Pos,
                access: Access::local("clk"),
            }])),
            Stmt::If { cond: "c".into(), target: "$L".into() },
            Stmt::Label("$L".into()),
            Stmt::Case {
                kind: crate::ir::CaseKind::Case,
                subject: "s".into(),
                arms: vec![(LogicVec::from_u64(1, 0), "$L".into())],
                default: None,
            },
        ]);
        let du = analyze_def_use(&proc_design(m));
        let mdu = &du.modules[0];
        assert_eq!(mdu.facts(BodyRef::Proc(0), 0).cond_uses, vec!["clk"]);
        assert_eq!(mdu.facts(BodyRef::Proc(0), 1).cond_uses, vec!["c"]);
        assert_eq!(mdu.facts(BodyRef::Proc(0), 3).cond_uses, vec!["s"]);
        assert!(mdu.facts(BodyRef::Proc(0), 1).uses.is_empty());
        // Control reads still count as uses at module level.
        assert_eq!(mdu.uses_of("clk").len(), 1);
    }

    #[test]
    fn named_constants_are_not_uses() {
        let mut m = module_of(vec![Stmt::Assign(Assign {
            op: AssignOp::Blocking,
            lhs: Access::local("x"),
            rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Add, "x".into(), "K".into())),
        })]);
        m.consts.push(ConstDecl {
            id: "K".into(),
            value: LogicVec::from_u64(8, 1),
            attrs: Default::default(),
        });
        let du = analyze_def_use(&proc_design(m));
        let f = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(f.uses, vec!["x"]);
    }

    #[test]
    fn syscall_and_receive_sides() {
        let m = module_of(vec![
            Stmt::Syscall {
                name: "$display".into(),
                ins: vec!["msg".into()],
                outs: vec!["r".into()],
            },
            Stmt::Receive { params: vec!["a".into(), "b".into()] },
        ]);
        let du = analyze_def_use(&proc_design(m));
        let f0 = du.modules[0].facts(BodyRef::Proc(0), 0);
        assert_eq!(f0.uses, vec!["msg"]);
        assert_eq!(access_base(&f0.defs[0].0), "r");
        let f1 = du.modules[0].facts(BodyRef::Proc(0), 1);
        assert_eq!(f1.defs.len(), 2);
        assert_eq!(f1.defs[0].1, AssignOp::Blocking);
    }

    #[test]
    fn dump_renders_one_line_per_nonempty_statement() {
        let m = module_of(vec![
            Stmt::Pass,
            cont(Access::local("sqr"), Rvalue::Access(Access::local("$t"))),
        ]);
        let d = proc_design(m);
        let du = analyze_def_use(&d);
        let text = dump(&d, &du);
        assert_eq!(text, "stmt m/proc0/s1 defs sqr<- uses $t conds -\n");
    }
}
