//! Per-body control-flow graphs. Nodes are statement indices; two synthetic
//! nodes, entry and exit, bracket the body.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::BodyRef;
use crate::bitvec::LogicVec;
use crate::ir::{Design, Statement, Stmt};

/// Why control may move along a CFG edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    /// Sequential fall-through (including a case with no default falling
    /// past its arms, and a `return`'s edge to exit).
    Fall,
    Goto,
    IfTaken,
    IfNotTaken,
    /// Taken when the subject matches arm `k` (declaration order).
    CaseArm(u32),
    CaseDefault,
}

impl EdgeKind {
    fn token(self) -> String {
        match self {
            EdgeKind::Fall => "fall".into(),
            EdgeKind::Goto => "goto".into(),
            EdgeKind::IfTaken => "taken".into(),
            EdgeKind::IfNotTaken => "not-taken".into(),
            EdgeKind::CaseArm(k) => format!("arm{k}"),
            EdgeKind::CaseDefault => "default".into(),
        }
    }
}

/// The control-flow graph of one statement body. Node `i` is statement `i`
/// for `i < stmt_count`; `entry()` and `exit()` are synthetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    stmt_count: usize,
    succs: Vec<Vec<(usize, EdgeKind)>>,
    preds: Vec<Vec<(usize, EdgeKind)>>,
    /// Statement indices holding guards, ascending.
    guard_nodes: Vec<usize>,
}

impl Cfg {
    pub fn stmt_count(&self) -> usize {
        self.stmt_count
    }

    pub fn entry(&self) -> usize {
        self.stmt_count
    }

    pub fn exit(&self) -> usize {
        self.stmt_count + 1
    }

    /// Total node count including entry and exit.
    pub fn node_count(&self) -> usize {
        self.stmt_count + 2
    }

    pub fn succs(&self, node: usize) -> &[(usize, EdgeKind)] {
        &self.succs[node]
    }

    pub fn preds(&self, node: usize) -> &[(usize, EdgeKind)] {
        &self.preds[node]
    }

    /// All edges in (source, then insertion) order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(from, outs)| outs.iter().map(move |&(to, kind)| (from, to, kind)))
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    /// True when statement `node` is a guard (entry/exit are not).
    pub fn is_guard(&self, node: usize) -> bool {
        self.guard_nodes.binary_search(&node).is_ok()
    }

    /// Nodes reachable from `from` (inclusive) without traversing past a
    /// guard: a guard node may be reached but its successors are not
    /// followed. Guards separate clock cycles, so this bounds the region a
    /// branch controls within one activation.
    pub fn reach_within_cycle(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut work = vec![from];
        while let Some(n) = work.pop() {
            if !seen.insert(n) {
                continue;
            }
            if self.is_guard(n) {
                continue;
            }
            for &(s, _) in &self.succs[n] {
                if !seen.contains(&s) {
                    work.push(s);
                }
            }
        }
        seen
    }

    /// Branch structure at `node`, if it is an `if` or `case`. `body` must
    /// be the statement list this CFG was built from.
    pub fn branch_info(&self, body: &[Statement], node: usize) -> Option<BranchInfo> {
        let arms: Vec<(EdgeKind, usize)> = match &body.get(node)?.stmt {
            Stmt::If { .. } | Stmt::Case { .. } => self.succs[node]
                .iter()
                .map(|&(to, kind)| (kind, to))
                .collect(),
            _ => return None,
        };
        let subject = match &body[node].stmt {
            Stmt::If { cond, .. } => cond.clone(),
            Stmt::Case { subject, .. } => subject.clone(),
            _ => unreachable!(),
        };
        let reaches: Vec<BTreeSet<usize>> =
            arms.iter().map(|&(_, to)| self.reach_within_cycle(to)).collect();
        let arms = arms
            .into_iter()
            .enumerate()
            .map(|(k, (kind, entry))| {
                let exclusive = reaches[k]
                    .iter()
                    .copied()
                    .filter(|n| {
                        *n < self.stmt_count
                            && reaches.iter().enumerate().all(|(j, r)| j == k || !r.contains(n))
                    })
                    .collect();
                let pattern = match (kind, &body[node].stmt) {
                    (EdgeKind::CaseArm(i), Stmt::Case { arms, .. }) => {
                        Some(arms[i as usize].0.clone())
                    }
                    _ => None,
                };
                BranchArm { kind, entry, pattern, exclusive }
            })
            .collect();
        Some(BranchInfo { node, subject, arms })
    }
}

/// One side of a branch: the edge kind leaving the branch node, the side's
/// first node, its case pattern (arms only), and the statement nodes only
/// this side reaches within the activation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchArm {
    pub kind: EdgeKind,
    pub entry: usize,
    pub pattern: Option<LogicVec>,
    pub exclusive: Vec<usize>,
}

/// An `if` or `case` node with its per-side exclusive regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchInfo {
    pub node: usize,
    /// The `if` condition or `case` subject identifier.
    pub subject: String,
    pub arms: Vec<BranchArm>,
}

/// CFGs for every Proc and Func body in a design, addressed by module index
/// and body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgSet {
    // Outer Vec parallels design.modules; inner holds procs then funcs.
    modules: Vec<Vec<(BodyRef, Cfg)>>,
}

impl CfgSet {
    pub fn cfg(&self, module: usize, body: BodyRef) -> &Cfg {
        &self.modules[module]
            .iter()
            .find(|(b, _)| *b == body)
            .expect("cfg built for every body")
            .1
    }

    /// All CFGs in (module, body) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, BodyRef, &Cfg)> {
        self.modules
            .iter()
            .enumerate()
            .flat_map(|(m, list)| list.iter().map(move |(b, c)| (m, *b, c)))
    }
}

/// Builds one CFG per statement body. Statement order fixes node numbering.
pub fn build_cfg(design: &Design) -> CfgSet {
    let modules = design
        .modules
        .iter()
        .map(|m| {
            super::bodies(m)
                .map(|(body_ref, body)| (body_ref, body_cfg(body)))
                .collect()
        })
        .collect();
    CfgSet { modules }
}

fn body_cfg(body: &[Statement]) -> Cfg {
    let n = body.len();
    let entry = n;
    let exit = n + 1;
    let label_at = |name: &str| {
        body.iter()
            .position(|s| matches!(&s.stmt, Stmt::Label(l) if l == name))
            .expect("validated body resolves every label")
    };

    let mut succs: Vec<Vec<(usize, EdgeKind)>> = vec![Vec::new(); n + 2];
    succs[entry].push((if n == 0 { exit } else { 0 }, EdgeKind::Fall));
    for (i, s) in body.iter().enumerate() {
        let next = if i + 1 < n { i + 1 } else { exit };
        match &s.stmt {
            Stmt::Goto(t) => succs[i].push((label_at(t), EdgeKind::Goto)),
            Stmt::If { target, .. } => {
                succs[i].push((label_at(target), EdgeKind::IfTaken));
                succs[i].push((next, EdgeKind::IfNotTaken));
            }
            Stmt::Case { arms, default, .. } => {
                for (k, (_, t)) in arms.iter().enumerate() {
                    succs[i].push((label_at(t), EdgeKind::CaseArm(k as u32)));
                }
                match default {
                    Some(t) => succs[i].push((label_at(t), EdgeKind::CaseDefault)),
                    None => succs[i].push((next, EdgeKind::Fall)),
                }
            }
            Stmt::Return => succs[i].push((exit, EdgeKind::Fall)),
            _ => succs[i].push((next, EdgeKind::Fall)),
        }
    }

    let mut preds: Vec<Vec<(usize, EdgeKind)>> = vec![Vec::new(); n + 2];
    for (from, outs) in succs.iter().enumerate() {
        for &(to, kind) in outs {
            preds[to].push((from, kind));
        }
    }
    let guard_nodes = body
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.stmt, Stmt::Guard(_)))
        .map(|(i, _)| i)
        .collect();
    Cfg { stmt_count: n, succs, preds, guard_nodes }
}

/// Deterministic text rendering: one `body`/`edge` record per line.
pub fn dump(design: &Design, set: &CfgSet) -> String {
    let mut out = String::new();
    for (m, body_ref, cfg) in set.iter() {
        let name = match body_ref {
            BodyRef::Proc(p) => format!("{}/proc{}", design.modules[m].name, p),
            BodyRef::Func(f) => {
                format!("{}/func.{}", design.modules[m].name, design.modules[m].funcs[f as usize].id)
            }
        };
        writeln!(out, "body {} nodes {}", name, cfg.node_count()).unwrap();
        let tag = |n: usize| {
            if n == cfg.entry() {
                "entry".to_string()
            } else if n == cfg.exit() {
                "exit".to_string()
            } else {
                format!("s{n}")
            }
        };
        for (from, to, kind) in cfg.edges() {
            writeln!(out, "edge {} {} {} {}", name, tag(from), tag(to), kind.token()).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Access, Assign, AssignOp, Guard, Rvalue};

    fn stmt(s: Stmt) -> Statement {
        Statement::new(s)
    }

    fn assign(lhs: &str, rhs: &str) -> Statement {
        stmt(Stmt::Assign(Assign {
            op: AssignOp::Blocking,
            lhs: Access::local(lhs),
            rhs: Rvalue::Access(Access::local(rhs)),
        }))
    }

    #[test]
    fn straight_line_three_statements_has_four_edges() {
        let body = vec![assign("a", "x"), assign("b", "a"), assign("c", "b")];
        let cfg = body_cfg(&body);
        assert_eq!(cfg.node_count(), 5);
        assert_eq!(cfg.edge_count(), 4);
        assert_eq!(cfg.succs(cfg.entry()), &[(0, EdgeKind::Fall)]);
        assert_eq!(cfg.succs(2), &[(cfg.exit(), EdgeKind::Fall)]);
    }

    #[test]
    fn if_goto_diamond_branches_and_rejoins() {
        // s0 if c goto $Lelse; s1 a=x; s2 goto $Ljoin; s3 $Lelse; s4 a=y;
        // s5 $Ljoin; s6 b=a
        let body = vec![
            stmt(Stmt::If { cond: "c".into(), target: "$Lelse".into() }),
            assign("a", "x"),
            stmt(Stmt::Goto("$Ljoin".into())),
            stmt(Stmt::Label("$Lelse".into())),
            assign("a", "y"),
            stmt(Stmt::Label("$Ljoin".into())),
            assign("b", "a"),
        ];
        let cfg = body_cfg(&body);
        assert_eq!(cfg.succs(0), &[(3, EdgeKind::IfTaken), (1, EdgeKind::IfNotTaken)]);
        assert_eq!(cfg.succs(2), &[(5, EdgeKind::Goto)]);
        // Join label has two predecessors: the goto and the else side.
        let mut pred_nodes: Vec<usize> = cfg.preds(5).iter().map(|&(p, _)| p).collect();
        pred_nodes.sort_unstable();
        assert_eq!(pred_nodes, [2, 4]);
    }

    #[test]
    fn case_with_three_arms_and_default_has_four_successors() {
        let arm = |v: u64, l: &str| (LogicVec::from_u64(2, v), l.to_string());
        let body = vec![
            stmt(Stmt::Case {
                kind: crate::ir::CaseKind::Case,
                subject: "s".into(),
                arms: vec![arm(0, "$L0"), arm(1, "$L1"), arm(2, "$L2")],
                default: Some("$Ld".into()),
            }),
            stmt(Stmt::Label("$L0".into())),
            stmt(Stmt::Label("$L1".into())),
            stmt(Stmt::Label("$L2".into())),
            stmt(Stmt::Label("$Ld".into())),
        ];
        let cfg = body_cfg(&body);
        assert_eq!(cfg.succs(0).len(), 4);
        assert_eq!(cfg.succs(0)[3], (4, EdgeKind::CaseDefault));
    }

    #[test]
    fn case_without_default_falls_through() {
        let arm = |v: u64, l: &str| (LogicVec::from_u64(1, v), l.to_string());
        let body = vec![
            stmt(Stmt::Case {
                kind: crate::ir::CaseKind::Case,
                subject: "s".into(),
                arms: vec![arm(0, "$L0"), arm(1, "$L1")],
                default: None,
            }),
            stmt(Stmt::Label("$L0".into())),
            stmt(Stmt::Label("$L1".into())),
        ];
        let cfg = body_cfg(&body);
        assert_eq!(
            cfg.succs(0),
            &[
                (1, EdgeKind::CaseArm(0)),
                (2, EdgeKind::CaseArm(1)),
                (1, EdgeKind::Fall),
            ]
        );
    }

    #[test]
    fn empty_body_wires_entry_to_exit() {
        let cfg = body_cfg(&[]);
        assert_eq!(cfg.succs(cfg.entry()), &[(cfg.exit(), EdgeKind::Fall)]);
        assert_eq!(cfg.edge_count(), 1);
    }

    #[test]
    fn return_jumps_to_exit() {
        let body = vec![assign("a", "x"), stmt(Stmt::Return), assign("b", "y")];
        let cfg = body_cfg(&body);
        assert_eq!(cfg.succs(1), &[(cfg.exit(), EdgeKind::Fall)]);
    }

    #[test]
    fn reach_within_cycle_stops_at_guards() {
        // $L1: guard; if c goto $Lset; goto $L1; $Lset: q=1; goto $L1
        let body = vec![
            stmt(Stmt::Label("$L1".into())),
            stmt(Stmt::Guard(Guard::Event(vec![]))),
            stmt(Stmt::If { cond: "c".into(), target: "$Lset".into() }),
            stmt(Stmt::Goto("$L1".into())),
            stmt(Stmt::Label("$Lset".into())),
            assign("q", "one"),
            stmt(Stmt::Goto("$L1".into())),
        ];
        let cfg = body_cfg(&body);
        // From the taken side: label, assign, goto, loop label, then stop at
        // the guard without passing it.
        let r = cfg.reach_within_cycle(4);
        assert!(r.contains(&5) && r.contains(&1) && r.contains(&0));
        assert!(!r.contains(&2), "must not wrap past the guard back to the branch");
    }

    #[test]
    fn branch_info_separates_exclusive_sides() {
        let body = vec![
            stmt(Stmt::Label("$L1".into())),
            stmt(Stmt::Guard(Guard::Event(vec![]))),
            stmt(Stmt::If { cond: "rst".into(), target: "$Lrst".into() }),
            assign("q", "d"),
            stmt(Stmt::Goto("$L1".into())),
            stmt(Stmt::Label("$Lrst".into())),
            assign("q", "zero"),
            stmt(Stmt::Goto("$L1".into())),
        ];
        let cfg = body_cfg(&body);
        let info = cfg.branch_info(&body, 2).unwrap();
        assert_eq!(info.subject, "rst");
        assert_eq!(info.arms.len(), 2);
        let taken = &info.arms[0];
        assert_eq!(taken.kind, EdgeKind::IfTaken);
        assert!(taken.exclusive.contains(&6), "reset store is taken-only");
        let fall = &info.arms[1];
        assert!(fall.exclusive.contains(&3), "data store is fall-only");
        assert!(!taken.exclusive.contains(&0), "shared loop label is in neither");
        assert!(cfg.branch_info(&body, 3).is_none());
    }
}
