//! The process dependency graph: Proc_i depends on Proc_j when a signal
//! used in a branch or guard condition of i is defined by an assignment in
//! j. Cycles in this graph are how circular wait deadlocks surface.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::defuse::DefUse;
use super::guards::{is_effectful, Guards};
use super::{is_temp, BodyRef, Hierarchy, StmtId};
use crate::ir::{Design, Stmt};

/// One node: Proc `proc` of the module at instance `inst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProcNode {
    pub inst: usize,
    pub proc: usize,
}

/// One dependency: `from` branches or waits on `signal`, which `to`
/// assigns. Statement ids give one use and one def as evidence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProcDepEdge {
    pub from: usize,
    pub to: usize,
    /// Fully qualified signal name.
    pub signal: String,
    pub use_stmt: StmtId,
    pub def_stmt: StmtId,
}

/// The process dependency graph over all instances.
#[derive(Clone, Debug)]
pub struct ProcDeps {
    pub hierarchy: Arc<Hierarchy>,
    pub nodes: Vec<ProcNode>,
    pub edges: Vec<ProcDepEdge>,
}

impl ProcDeps {
    /// Report name of a node: the Proc display name, prefixed with its
    /// instance path when the design has more than one instance.
    pub fn node_name(&self, design: &Design, node: usize) -> String {
        let ProcNode { inst, proc } = self.nodes[node];
        let m = self.hierarchy.instances[inst].module;
        let name = design.modules[m].procs[proc].display_name(proc);
        if self.hierarchy.instances.len() > 1 {
            format!("{}/{}", self.hierarchy.instances[inst].path, name)
        } else {
            name
        }
    }

    /// The signal's name inside its owning instance (the last path
    /// segment), as source code spells it.
    pub fn short_signal(signal: &str) -> &str {
        signal.rsplit('.').next().unwrap_or(signal)
    }
}

/// Builds the process dependency graph.
pub fn build_proc_dep_graph(
    design: &Design,
    def_use: Arc<DefUse>,
    guards: Arc<Guards>,
    hierarchy: Arc<Hierarchy>,
) -> ProcDeps {
    let h = &*hierarchy;
    let mut nodes = Vec::new();
    let mut node_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        for p in 0..design.modules[inst.module].procs.len() {
            node_of.insert((ii, p), nodes.len());
            nodes.push(ProcNode { inst: ii, proc: p });
        }
    }

    // Qualified defs: signal -> (defining node, def site). Only Proc bodies
    // assign concurrently; Func bodies run inside their caller.
    let mut def_map: BTreeMap<String, Vec<(usize, StmtId)>> = BTreeMap::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let mdu = &def_use.modules[mi];
        for (body_ref, facts) in &mdu.bodies {
            let BodyRef::Proc(p) = *body_ref else { continue };
            let node = node_of[&(ii, p as usize)];
            for (si, f) in facts.iter().enumerate() {
                for (acc, _) in &f.defs {
                    let base = super::defuse::access_base(acc);
                    let Some((di, sig)) = super::chain::resolve_base(h, design, ii, &base)
                    else {
                        continue;
                    };
                    def_map
                        .entry(h.qualified(di, &sig))
                        .or_default()
                        .push((node, StmtId::new(mi, *body_ref, si)));
                }
            }
        }
    }

    let mut edges = Vec::new();
    let mut seen: BTreeSet<(usize, usize, String)> = BTreeSet::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let m = &design.modules[mi];
        let mdu = &def_use.modules[mi];
        for (pi, proc) in m.procs.iter().enumerate() {
            let node = node_of[&(ii, pi)];
            let body_ref = BodyRef::Proc(pi as u32);
            for (si, stmt) in proc.body.iter().enumerate() {
                let facts = mdu.facts(body_ref, si);
                if facts.cond_uses.is_empty() {
                    continue;
                }
                // A guard whose governed statements do no real work cannot
                // block anything observable; skip its events.
                if matches!(stmt.stmt, Stmt::Guard(_)) {
                    let governs_work = proc.body.iter().enumerate().any(|(ti, t)| {
                        is_effectful(&t.stmt)
                            && guards
                                .at(mi, body_ref, ti)
                                .contains(&super::GuardSite::Stmt(si))
                    });
                    if !governs_work {
                        continue;
                    }
                }
                let use_stmt = StmtId::new(mi, body_ref, si);
                // Conditions are often frontend temps; expand to the named
                // signals they compute from.
                let mut sources: Vec<String> = Vec::new();
                let mut work: Vec<String> = facts.cond_uses.clone();
                let mut visited = BTreeSet::new();
                while let Some(u) = work.pop() {
                    if is_temp(m, &u) {
                        if visited.insert(u.clone()) {
                            for tid in mdu.defs_of(&u) {
                                if tid.body == body_ref {
                                    work.extend(def_use.facts(*tid).uses.iter().cloned());
                                }
                            }
                        }
                    } else {
                        sources.push(u);
                    }
                }
                sources.sort_unstable();
                sources.dedup();
                for s in sources {
                    let Some((si2, sig)) = super::chain::resolve_base(h, design, ii, &s)
                    else {
                        continue;
                    };
                    let q = h.qualified(si2, &sig);
                    let Some(defs) = def_map.get(&q) else { continue };
                    for &(to, def_stmt) in defs {
                        if to == node {
                            continue;
                        }
                        if seen.insert((node, to, q.clone())) {
                            edges.push(ProcDepEdge {
                                from: node,
                                to,
                                signal: q.clone(),
                                use_stmt,
                                def_stmt,
                            });
                        }
                    }
                }
            }
        }
    }
    edges.sort();

    ProcDeps { hierarchy, nodes, edges }
}

/// Deterministic text rendering: nodes then edges, one record per line.
pub fn dump(design: &Design, g: &ProcDeps) -> String {
    let mut out = String::new();
    for i in 0..g.nodes.len() {
        writeln!(out, "node {} {}", i, g.node_name(design, i)).unwrap();
    }
    for e in &g.edges {
        writeln!(
            out,
            "edge {} -> {} signal {} use {} def {}",
            g.node_name(design, e.from),
            g.node_name(design, e.to),
            e.signal,
            e.use_stmt.render(design),
            e.def_stmt.render(design),
        )
        .unwrap();
    }
    out
}
