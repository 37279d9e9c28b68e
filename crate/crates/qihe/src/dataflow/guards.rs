//! Reaching guards: a forward may-analysis over each body's CFG. A guard g
//! reaches statement s when some CFG path from g to s contains no other
//! guard; s is governed by every guard that reaches it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use super::{BodyRef, Cfg, CfgSet};
use crate::ir::{Design, Stmt};

/// A guard position: the synthetic body entry, or a guard statement.
/// Treating entry as a guard gives pre-first-guard statements a
/// well-defined set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardSite {
    Entry,
    Stmt(usize),
}

/// Reaching-guard sets for one body, indexed by statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyGuards {
    sets: Vec<BTreeSet<GuardSite>>,
}

impl BodyGuards {
    pub fn at(&self, stmt: usize) -> &BTreeSet<GuardSite> {
        &self.sets[stmt]
    }

    pub fn stmt_count(&self) -> usize {
        self.sets.len()
    }
}

/// Reaching guards for every body of a design.
#[derive(Clone, Debug)]
pub struct Guards {
    modules: Vec<Vec<(BodyRef, BodyGuards)>>,
    pub cfg: Arc<CfgSet>,
}

impl Guards {
    pub fn body(&self, module: usize, body: BodyRef) -> &BodyGuards {
        &self.modules[module]
            .iter()
            .find(|(b, _)| *b == body)
            .expect("guards computed for every body")
            .1
    }

    /// Guards reaching one statement.
    pub fn at(&self, module: usize, body: BodyRef, stmt: usize) -> &BTreeSet<GuardSite> {
        self.body(module, body).at(stmt)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, BodyRef, &BodyGuards)> {
        self.modules
            .iter()
            .enumerate()
            .flat_map(|(m, list)| list.iter().map(move |(b, g)| (m, *b, g)))
    }
}

fn body_guards(cfg: &Cfg) -> BodyGuards {
    let n = cfg.stmt_count();
    // in-set per node, plus entry and exit slots for uniform indexing.
    let mut ins: Vec<BTreeSet<GuardSite>> = vec![BTreeSet::new(); n + 2];
    let out_of = |node: usize, ins: &[BTreeSet<GuardSite>]| -> BTreeSet<GuardSite> {
        if node == cfg.entry() {
            BTreeSet::from([GuardSite::Entry])
        } else if node < n && cfg.is_guard(node) {
            BTreeSet::from([GuardSite::Stmt(node)])
        } else {
            ins[node].clone()
        }
    };
    let mut work: BTreeSet<usize> = (0..n + 2).collect();
    while let Some(&node) = work.iter().next() {
        work.remove(&node);
        let mut new_in = BTreeSet::new();
        for &(p, _) in cfg.preds(node) {
            new_in.extend(out_of(p, &ins));
        }
        if new_in != ins[node] {
            ins[node] = new_in;
            for &(s, _) in cfg.succs(node) {
                work.insert(s);
            }
        }
    }
    ins.truncate(n);
    BodyGuards { sets: ins }
}

/// Computes reaching guards for every body.
pub fn analyze_reaching_guards(design: &Design, cfg: Arc<CfgSet>) -> Guards {
    let modules = design
        .modules
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            super::bodies(m)
                .map(|(body_ref, _)| (body_ref, body_guards(cfg.cfg(mi, body_ref))))
                .collect()
        })
        .collect();
    Guards { modules, cfg }
}

/// Deterministic text rendering: one line per statement.
pub fn dump(design: &Design, g: &Guards) -> String {
    let mut out = String::new();
    for (mi, body_ref, bg) in g.iter() {
        for s in 0..bg.stmt_count() {
            let id = super::StmtId::new(mi, body_ref, s);
            let sites: Vec<String> = bg
                .at(s)
                .iter()
                .map(|site| match site {
                    GuardSite::Entry => "entry".to_string(),
                    GuardSite::Stmt(i) => format!("s{i}"),
                })
                .collect();
            let joined = if sites.is_empty() { "-".to_string() } else { sites.join(",") };
            writeln!(out, "guards {} {}", id.render(design), joined).unwrap();
        }
    }
    out
}

/// True when a statement does real work under a guard: it stores, calls, or
/// performs I/O, as opposed to pure control flow.
pub fn is_effectful(stmt: &Stmt) -> bool {
    matches!(
        stmt,
        Stmt::Assign(_) | Stmt::Invoke { .. } | Stmt::Receive { .. } | Stmt::Syscall { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Access, Assign, AssignOp, Edge, EventExpr, Guard, Module, Proc, Rvalue,
        Statement};

    fn event(sig: &str, edge: Edge) -> Stmt {
        Stmt::Guard(Guard::Event(vec![EventExpr { edge, access: Access::local(sig) }]))
    }

    fn assign(lhs: &str, rhs: &str, op: AssignOp) -> Stmt {
        Stmt::Assign(Assign {
            op,
            lhs: Access::local(lhs),
            rhs: Rvalue::Access(Access::local(rhs)),
        })
    }

    fn analyze(body: Vec<Stmt>) -> Guards {
        let mut m = Module::new("m");
        let mut p = Proc::default();
        p.body = body.into_iter().map(Statement::new).collect();
        m.procs.push(p);
        let mut d = Design::new("t");
        d.modules.push(m);
        let cfg = Arc::new(super::super::build_cfg(&d));
        analyze_reaching_guards(&d, cfg)
    }

    #[test]
    fn later_guard_replaces_earlier_one() {
        // @(posedge clock1); x<=1; @(negedge clock2); y<=0;
        let g = analyze(vec![
            event("clock1", Edge::Pos),
            assign("x", "one", AssignOp::NonBlocking),
            event("clock2", Edge::Neg),
            assign("y", "zero", AssignOp::NonBlocking),
        ]);
        assert_eq!(*g.at(0, BodyRef::Proc(0), 1), BTreeSet::from([GuardSite::Stmt(0)]));
        assert_eq!(
            *g.at(0, BodyRef::Proc(0), 3),
            BTreeSet::from([GuardSite::Stmt(2)]),
            "the second store is governed by the later guard only"
        );
    }

    #[test]
    fn single_guard_governs_all_following_statements() {
        let g = analyze(vec![
            event("clk", Edge::Pos),
            assign("a", "x", AssignOp::NonBlocking),
            assign("b", "a", AssignOp::NonBlocking),
        ]);
        for s in 1..=2 {
            assert_eq!(*g.at(0, BodyRef::Proc(0), s), BTreeSet::from([GuardSite::Stmt(0)]));
        }
        assert_eq!(*g.at(0, BodyRef::Proc(0), 0), BTreeSet::from([GuardSite::Entry]));
    }

    #[test]
    fn guard_in_one_branch_makes_joins_may_sets() {
        // s0 if c goto $L; s1 guard; s2 $L; s3 a=x
        let g = analyze(vec![
            Stmt::If { cond: "c".into(), target: "$L".into() },
            event("e", Edge::Any),
            Stmt::Label("$L".into()),
            assign("a", "x", AssignOp::Blocking),
        ]);
        assert_eq!(
            *g.at(0, BodyRef::Proc(0), 3),
            BTreeSet::from([GuardSite::Entry, GuardSite::Stmt(1)]),
            "both paths into the join contribute"
        );
    }

    #[test]
    fn loop_back_edge_reaches_fixpoint() {
        // $L1: guard; q<=d; goto $L1 — the store is governed by the guard,
        // the label sees both entry (first arrival) and the guard (loop).
        let g = analyze(vec![
            Stmt::Label("$L1".into()),
            event("clk", Edge::Pos),
            assign("q", "d", AssignOp::NonBlocking),
            Stmt::Goto("$L1".into()),
        ]);
        assert_eq!(*g.at(0, BodyRef::Proc(0), 2), BTreeSet::from([GuardSite::Stmt(1)]));
        assert_eq!(
            *g.at(0, BodyRef::Proc(0), 0),
            BTreeSet::from([GuardSite::Entry, GuardSite::Stmt(1)])
        );
    }
}
