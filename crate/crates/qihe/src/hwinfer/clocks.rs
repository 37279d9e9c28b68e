//! Clock-tree membership: signals waited on at an edge before state
//! updates, closed over the wiring that merely forwards them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::dataflow::{
    bodies, resolve_base, BodyRef, DefChain, GuardSite, Guards, Hierarchy, StmtId,
};
use crate::ir::{AssignOp, Compute, Design, Rvalue, Stmt};
use crate::{bitvec::UnaryOp, ir::Edge};

/// Evidence for one clock-tree member.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClockInfo {
    /// Guard statements where the signal is waited on at an edge; empty for
    /// members that only join through wiring.
    pub edge_sites: Vec<StmtId>,
    /// The clock also feeds a non-identity computation ("integrated into
    /// complex logic").
    pub complex_use: bool,
}

/// The inferred clock tree, per instance.
#[derive(Clone, Debug)]
pub struct ClockSet {
    pub hierarchy: Arc<Hierarchy>,
    members: BTreeMap<(usize, String), ClockInfo>,
}

impl ClockSet {
    pub fn is_clock(&self, inst: usize, sig: &str) -> bool {
        self.members.contains_key(&(inst, sig.to_string()))
    }

    pub fn info(&self, inst: usize, sig: &str) -> Option<&ClockInfo> {
        self.members.get(&(inst, sig.to_string()))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &ClockInfo)> {
        self.members.iter().map(|((i, s), info)| (*i, s.as_str(), info))
    }
}

/// Infers clock-tree membership. Seeds are signals waited on at an edge by
/// a guard that governs at least one non-blocking assignment; membership
/// closes over identity def-chain edges in both directions, since a wire or
/// buffer between two points of a clock tree makes both ends clocks.
pub fn infer_clocks(design: &Design, chain: Arc<DefChain>, guards: Arc<Guards>) -> ClockSet {
    let hierarchy = chain.hierarchy.clone();
    let h = &*hierarchy;
    let mut members: BTreeMap<(usize, String), ClockInfo> = BTreeMap::new();

    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let m = &design.modules[mi];
        for (pi, p) in m.procs.iter().enumerate() {
            let body_ref = BodyRef::Proc(pi as u32);
            // Which statements each guard governs comes from reaching-guards;
            // a guard counts only when some governed statement is a
            // non-blocking store.
            let governs_nb = |gi: usize| {
                p.body.iter().enumerate().any(|(sj, s)| {
                    matches!(&s.stmt, Stmt::Assign(a) if a.op == AssignOp::NonBlocking)
                        && guards.at(mi, body_ref, sj).contains(&GuardSite::Stmt(gi))
                })
            };
            for (si, s) in p.body.iter().enumerate() {
                let Stmt::Guard(g) = &s.stmt else { continue };
                if g.events().iter().all(|e| e.edge == Edge::Any) || !governs_nb(si) {
                    continue;
                }
                for e in g.events() {
                    if e.edge == Edge::Any {
                        continue;
                    }
                    let base = e.access.path.join(".");
                    let Some(key) = resolve_base(h, design, ii, &base) else { continue };
                    members
                        .entry(key)
                        .or_default()
                        .edge_sites
                        .push(StmtId::new(mi, body_ref, si));
                }
            }
        }
    }

    // Closure over identity edges, undirected: wiring does not create or
    // consume a clock, it extends one.
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in &chain.edges {
        if e.identity {
            adj.entry(e.src).or_default().insert(e.dst);
            adj.entry(e.dst).or_default().insert(e.src);
        }
    }
    let mut queue: VecDeque<usize> = members
        .keys()
        .filter_map(|(i, s)| chain.node_id(*i, s))
        .collect();
    let mut seen: BTreeSet<usize> = queue.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        let node = &chain.nodes[n];
        members.entry((node.inst, node.sig.clone())).or_default();
        if let Some(next) = adj.get(&n) {
            for &to in next {
                if seen.insert(to) {
                    queue.push_back(to);
                }
            }
        }
    }

    // Flag clocks fed into real logic: a data operand of any computation
    // other than a buffer.
    for (ii, inst) in h.instances.iter().enumerate() {
        let m = &design.modules[inst.module];
        for (_, body) in bodies(m) {
            for s in body {
                let Stmt::Assign(a) = &s.stmt else { continue };
                let Rvalue::Compute(c) = &a.rhs else { continue };
                if matches!(c, Compute::Unary(UnaryOp::Buf, _)) {
                    continue;
                }
                for opnd in c.operands() {
                    if let Some(key) = resolve_base(h, design, ii, opnd) {
                        if let Some(info) = members.get_mut(&key) {
                            info.complex_use = true;
                        }
                    }
                }
            }
        }
    }

    ClockSet { hierarchy, members }
}

/// Deterministic text rendering: one `clock` record per member.
pub fn dump(design: &Design, c: &ClockSet) -> String {
    let mut out = String::new();
    for (inst, sig, info) in c.iter() {
        let q = c.hierarchy.qualified(inst, sig);
        let sites = if info.edge_sites.is_empty() {
            "-".to_string()
        } else {
            let rs: Vec<String> = info.edge_sites.iter().map(|s| s.render(design)).collect();
            rs.join(",")
        };
        writeln!(out, "clock {q} sites {sites} complex {}", info.complex_use).unwrap();
    }
    out
}
