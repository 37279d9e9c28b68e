//! Register classification: signals stored to with `<=` under an
//! edge-sensitive wait on an inferred clock.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::clocks::ClockSet;
use crate::dataflow::{
    access_base, is_temp, resolve_base, BodyRef, GuardSite, Guards, Hierarchy, StmtId,
};
use crate::ir::{AssignOp, Design, Edge, Stmt};
use crate::report::{Report, Severity};

/// Evidence for one register.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegInfo {
    /// Driving clocks as (instance, signal), unioned over update sites.
    pub clocks: BTreeSet<(usize, String)>,
    /// Evidencing non-blocking assignments with their host instance.
    pub sites: Vec<(usize, StmtId)>,
}

/// The inferred registers, per instance.
#[derive(Clone, Debug)]
pub struct RegMap {
    pub hierarchy: Arc<Hierarchy>,
    regs: BTreeMap<(usize, String), RegInfo>,
    /// Lint findings: blocking stores under an edge-sensitive wait are bad
    /// practice and deliberately not classified as registers.
    pub warnings: Vec<Report>,
}

impl RegMap {
    pub fn is_register(&self, inst: usize, sig: &str) -> bool {
        self.regs.contains_key(&(inst, sig.to_string()))
    }

    pub fn info(&self, inst: usize, sig: &str) -> Option<&RegInfo> {
        self.regs.get(&(inst, sig.to_string()))
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &RegInfo)> {
        self.regs.iter().map(|((i, s), info)| (*i, s.as_str(), info))
    }
}

/// Classifies registers: a signal is a register iff it is the target base
/// of a non-blocking assignment whose reaching guards include an
/// edge-sensitive wait on a clock.
pub fn infer_regs(design: &Design, guards: Arc<Guards>, clocks: Arc<ClockSet>) -> RegMap {
    let hierarchy = clocks.hierarchy.clone();
    let h = &*hierarchy;
    let mut regs: BTreeMap<(usize, String), RegInfo> = BTreeMap::new();

    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let m = &design.modules[mi];
        for (pi, p) in m.procs.iter().enumerate() {
            let body_ref = BodyRef::Proc(pi as u32);
            for (si, s) in p.body.iter().enumerate() {
                let Stmt::Assign(a) = &s.stmt else { continue };
                if a.op != AssignOp::NonBlocking {
                    continue;
                }
                let base = access_base(&a.lhs);
                let Some((ti, tsig)) = resolve_base(h, design, ii, &base) else { continue };
                if is_temp(&design.modules[h.instances[ti].module], &tsig) {
                    continue;
                }
                let mut driving: BTreeSet<(usize, String)> = BTreeSet::new();
                for g in guards.at(mi, body_ref, si) {
                    let GuardSite::Stmt(gi) = g else { continue };
                    let Stmt::Guard(gd) = &p.body[*gi].stmt else { continue };
                    for e in gd.events() {
                        if e.edge == Edge::Any {
                            continue;
                        }
                        let cb = e.access.path.join(".");
                        let Some((ci, csig)) = resolve_base(h, design, ii, &cb) else {
                            continue;
                        };
                        if clocks.is_clock(ci, &csig) {
                            driving.insert((ci, csig));
                        }
                    }
                }
                if driving.is_empty() {
                    continue;
                }
                let info = regs.entry((ti, tsig)).or_default();
                info.clocks.extend(driving);
                info.sites.push((ii, StmtId::new(mi, body_ref, si)));
            }
        }
    }

    // Lint pass, per module: blocking stores to named signals under an
    // edge-sensitive wait. Such state escapes register classification.
    let mut warnings = Vec::new();
    for (mi, m) in design.modules.iter().enumerate() {
        for (pi, p) in m.procs.iter().enumerate() {
            let body_ref = BodyRef::Proc(pi as u32);
            for (si, s) in p.body.iter().enumerate() {
                let Stmt::Assign(a) = &s.stmt else { continue };
                if a.op != AssignOp::Blocking {
                    continue;
                }
                let base = access_base(&a.lhs);
                if a.lhs.is_hier() || is_temp(m, &base) {
                    continue;
                }
                let under_edge = guards.at(mi, body_ref, si).iter().any(|g| {
                    let GuardSite::Stmt(gi) = g else { return false };
                    let Stmt::Guard(gd) = &p.body[*gi].stmt else { return false };
                    gd.events().iter().any(|e| e.edge != Edge::Any)
                });
                if !under_edge {
                    continue;
                }
                let id = StmtId::new(mi, body_ref, si);
                let (file, line) = id.loc(design);
                warnings.push(Report::new(
                    "regs",
                    "blocking-under-edge",
                    Severity::Warning,
                    &m.name,
                    file,
                    line,
                    format!(
                        "blocking assignment to {base} under an edge-sensitive wait; \
                         state held this way is not classified as a register"
                    ),
                ));
            }
        }
    }

    RegMap { hierarchy, regs, warnings }
}

/// Deterministic text rendering: one `reg` record per register.
pub fn dump(design: &Design, r: &RegMap) -> String {
    let mut out = String::new();
    for (inst, sig, info) in r.iter() {
        let q = r.hierarchy.qualified(inst, sig);
        let cks: Vec<String> =
            info.clocks.iter().map(|(i, s)| r.hierarchy.qualified(*i, s)).collect();
        let sites: Vec<String> = info.sites.iter().map(|(_, s)| s.render(design)).collect();
        writeln!(out, "reg {q} clocks {} sites {}", cks.join(","), sites.join(",")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::BinaryOp;
    use crate::ir::{
        Access, Assign, Compute, Dir, EventExpr, Guard, Module, Proc, Rvalue, Statement,
        Type, VarDecl,
    };

    fn var(id: &str, width: usize, dir: Option<Dir>) -> VarDecl {
        VarDecl { id: id.into(), ty: Type::bv(width), dir, attrs: Default::default() }
    }

    fn proc_of(stmts: Vec<Stmt>) -> Proc {
        let mut p = Proc::default();
        p.body = stmts.into_iter().map(Statement::new).collect();
        p
    }

    fn edge_wait(edge: Edge, sig: &str) -> Stmt {
        Stmt::Guard(Guard::Event(vec![EventExpr { edge, access: Access::local(sig) }]))
    }

    fn assign(op: AssignOp, lhs: &str, rhs: &str) -> Stmt {
        Stmt::Assign(Assign {
            op,
            lhs: Access::local(lhs),
            rhs: Rvalue::Access(Access::local(rhs)),
        })
    }

    fn infer(d: &Design) -> RegMap {
        let du = Arc::new(crate::dataflow::analyze_def_use(d));
        let h = Arc::new(crate::dataflow::analyze_hierarchy(d).unwrap());
        let chain = Arc::new(crate::dataflow::build_def_chain(d, du, h));
        let cfg = Arc::new(crate::dataflow::build_cfg(d));
        let guards = Arc::new(crate::dataflow::analyze_reaching_guards(d, cfg));
        let clocks = Arc::new(super::super::infer_clocks(d, chain, guards.clone()));
        infer_regs(d, guards, clocks)
    }

    /// The accumulator pattern: add through a temporary, then a clocked
    /// store. Only the named signal is a register; the temporary's blocking
    /// write draws no lint.
    #[test]
    fn clocked_accumulator_is_a_register_with_its_clock() {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("in", 8, Some(Dir::Input)));
        m.vars.push(var("acc", 8, None));
        m.vars.push(var("$t0", 8, None));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            edge_wait(Edge::Pos, "clk"),
            Stmt::Assign(Assign {
                op: AssignOp::Blocking,
                lhs: Access::local("$t0"),
                rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Add, "acc".into(), "in".into())),
            }),
            assign(AssignOp::NonBlocking, "acc", "$t0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert!(r.is_register(0, "acc"));
        assert!(!r.is_register(0, "$t0"));
        let info = r.info(0, "acc").unwrap();
        assert_eq!(info.clocks.iter().cloned().collect::<Vec<_>>(), vec![(0, "clk".into())]);
        assert!(r.warnings.is_empty(), "temporaries draw no lint");
        assert_eq!(dump(&d, &r), "reg m.acc clocks m.clk sites m/proc0/s3\n");
    }

    /// Two waits in one Proc: each store is governed by the nearest
    /// preceding wait, so x and y get different driving clocks.
    #[test]
    fn second_wait_redirects_the_driving_clock() {
        let mut m = Module::new("m");
        m.vars.push(var("clock1", 1, Some(Dir::Input)));
        m.vars.push(var("clock2", 1, Some(Dir::Input)));
        m.vars.push(var("x", 1, None));
        m.vars.push(var("y", 1, None));
        m.consts.push(crate::ir::ConstDecl {
            id: "$c1".into(),
            value: crate::bitvec::LogicVec::from_u64(1, 1),
            attrs: Default::default(),
        });
        m.consts.push(crate::ir::ConstDecl {
            id: "$c0".into(),
            value: crate::bitvec::LogicVec::from_u64(1, 0),
            attrs: Default::default(),
        });
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            edge_wait(Edge::Pos, "clock1"),
            assign(AssignOp::NonBlocking, "x", "$c1"),
            edge_wait(Edge::Neg, "clock2"),
            assign(AssignOp::NonBlocking, "y", "$c0"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert_eq!(
            r.info(0, "x").unwrap().clocks.iter().cloned().collect::<Vec<_>>(),
            vec![(0, "clock1".into())]
        );
        assert_eq!(
            r.info(0, "y").unwrap().clocks.iter().cloned().collect::<Vec<_>>(),
            vec![(0, "clock2".into())]
        );
    }

    #[test]
    fn blocking_store_under_edge_is_linted_not_classified() {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("q", 1, None));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            edge_wait(Edge::Pos, "clk"),
            assign(AssignOp::Blocking, "q", "d"),
            assign(AssignOp::NonBlocking, "d2", "d"),
            Stmt::Goto("$L1".into()),
        ]));
        m.vars.push(var("d2", 1, None));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert!(!r.is_register(0, "q"));
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].category, "blocking-under-edge");
        assert_eq!(r.warnings[0].severity, Severity::Warning);
        assert!(r.warnings[0].message.contains("q"));
    }

    #[test]
    fn combinational_store_is_not_a_register() {
        let mut m = Module::new("m");
        m.vars.push(var("a", 1, Some(Dir::Input)));
        m.vars.push(var("y", 1, None));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            Stmt::Guard(Guard::Event(vec![EventExpr {
                edge: Edge::Any,
                access: Access::local("a"),
            }])),
            assign(AssignOp::NonBlocking, "y", "a"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let r = infer(&d);
        assert!(r.is_empty(), "no edge, no register");
        assert!(r.warnings.is_empty(), "blocking lint needs an edge too");
    }

    #[test]
    fn every_driving_clock_is_in_the_clock_set() {
        let mut m = Module::new("m");
        m.vars.push(var("clk", 1, Some(Dir::Input)));
        m.vars.push(var("d", 1, Some(Dir::Input)));
        m.vars.push(var("q", 1, None));
        m.procs.push(proc_of(vec![
            Stmt::Label("$L1".into()),
            edge_wait(Edge::Pos, "clk"),
            assign(AssignOp::NonBlocking, "q", "d"),
            Stmt::Goto("$L1".into()),
        ]));
        let mut d = Design::new("t");
        d.modules.push(m);
        let du = Arc::new(crate::dataflow::analyze_def_use(&d));
        let h = Arc::new(crate::dataflow::analyze_hierarchy(&d).unwrap());
        let chain = Arc::new(crate::dataflow::build_def_chain(&d, du, h));
        let cfg = Arc::new(crate::dataflow::build_cfg(&d));
        let guards = Arc::new(crate::dataflow::analyze_reaching_guards(&d, cfg));
        let clocks = Arc::new(super::super::infer_clocks(&d, chain, guards.clone()));
        let r = infer_regs(&d, guards, clocks.clone());
        for (_, _, info) in r.iter() {
            assert!(!info.clocks.is_empty(), "every register has a driving clock");
            for (ci, cs) in &info.clocks {
                assert!(clocks.is_clock(*ci, cs), "referential closure into ClockSet");
            }
        }
    }
}
