//! The flow-insensitive def-chain graph: signal-level value flow across the
//! elaborated design. Nodes are instance-qualified signals; frontend
//! temporaries are collapsed through, so an edge a -> b means some statement
//! chain computes b from a without passing through another named signal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::defuse::{access_base, DefUse};
use super::{is_temp, BodyRef, Hierarchy, StmtId};
use crate::bitvec::{BinaryOp, UnaryOp};
use crate::ir::{Compute, Design, Module, Rvalue, Statement, Stmt};

/// One node: signal `sig` of the module at instance `inst`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalNode {
    pub inst: usize,
    pub sig: String,
    /// Dotted path from the top, e.g. `accSqrDouble.i.$t1`.
    pub qualified: String,
}

/// One value-flow edge between signals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChainEdge {
    pub src: usize,
    pub dst: usize,
    /// Instance hosting the defining statement.
    pub host: usize,
    /// The statement that stores into `dst`.
    pub stmt: StmtId,
    /// Whole chain is plain equal-width copies (or `buf`): the two signals
    /// carry the same value.
    pub identity: bool,
    /// The defining statement belongs to a port-connection Proc.
    pub port_conn: bool,
    /// No hop is a case-equality compare, so an x/z on `src` can surface in
    /// `dst`.
    pub x_preserving: bool,
}

/// The def-chain graph over all instances.
#[derive(Clone, Debug)]
pub struct DefChain {
    pub hierarchy: Arc<Hierarchy>,
    pub nodes: Vec<SignalNode>,
    pub edges: Vec<ChainEdge>,
    index: BTreeMap<(usize, String), usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl DefChain {
    pub fn node_id(&self, inst: usize, sig: &str) -> Option<usize> {
        self.index.get(&(inst, sig.to_string())).copied()
    }

    pub fn edges_from(&self, node: usize) -> impl Iterator<Item = &ChainEdge> {
        self.out_edges[node].iter().map(move |&e| &self.edges[e])
    }

    pub fn edges_to(&self, node: usize) -> impl Iterator<Item = &ChainEdge> {
        self.in_edges[node].iter().map(move |&e| &self.edges[e])
    }
}

/// Splits a dotted base into (instance, signal) starting from `inst`:
/// leading segments name child instances, the last names the signal.
pub fn resolve_base(
    h: &Hierarchy,
    design: &Design,
    inst: usize,
    base: &str,
) -> Option<(usize, String)> {
    let mut at = inst;
    let segs: Vec<&str> = base.split('.').collect();
    for seg in &segs[..segs.len() - 1] {
        // Only instantiation names traverse; anything else is not a path.
        design.modules[h.instances[at].module].inst(seg)?;
        at = h.child_instance(at, seg)?;
    }
    Some((at, segs[segs.len() - 1].to_string()))
}

#[derive(Clone, Copy)]
struct HopFlags {
    identity: bool,
    x_preserving: bool,
}

/// Flags for one defining statement considered as a chain hop.
fn hop_flags(design: &Design, h: &Hierarchy, inst: usize, stmt: &Stmt) -> HopFlags {
    let width_of = |base: &str| -> Option<usize> {
        let (bi, sig) = resolve_base(h, design, inst, base)?;
        design.modules[h.instances[bi].module].type_of(&sig)?.width()
    };
    match stmt {
        Stmt::Assign(a) => {
            let x_preserving = !matches!(
                &a.rhs,
                Rvalue::Compute(Compute::Binary(BinaryOp::Equiv | BinaryOp::Nequiv, _, _))
            );
            let identity = match &a.rhs {
                Rvalue::Access(src)
                    if src.index.is_none()
                        && src.sel.is_none()
                        && a.lhs.index.is_none()
                        && a.lhs.sel.is_none() =>
                {
                    let lw = width_of(&access_base(&a.lhs));
                    let rw = width_of(&access_base(src));
                    lw.is_some() && lw == rw
                }
                Rvalue::Compute(Compute::Unary(UnaryOp::Buf, _))
                    if a.lhs.index.is_none() && a.lhs.sel.is_none() =>
                {
                    true
                }
                _ => false,
            };
            HopFlags { identity, x_preserving }
        }
        _ => HopFlags { identity: false, x_preserving: true },
    }
}

fn combine(a: HopFlags, b: HopFlags) -> HopFlags {
    HopFlags {
        identity: a.identity && b.identity,
        x_preserving: a.x_preserving && b.x_preserving,
    }
}

/// Builds the def-chain graph.
pub fn build_def_chain(
    design: &Design,
    def_use: Arc<DefUse>,
    hierarchy: Arc<Hierarchy>,
) -> DefChain {
    let h = &*hierarchy;
    let mut nodes = Vec::new();
    let mut index = BTreeMap::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let m = &design.modules[inst.module];
        let sigs = m
            .nets
            .iter()
            .map(|n| n.id.as_str())
            .chain(m.vars.iter().map(|v| v.id.as_str()));
        for sig in sigs {
            if is_temp(m, sig) {
                continue;
            }
            index.insert((ii, sig.to_string()), nodes.len());
            nodes.push(SignalNode {
                inst: ii,
                sig: sig.to_string(),
                qualified: h.qualified(ii, sig),
            });
        }
    }

    let mut edges: BTreeSet<ChainEdge> = BTreeSet::new();
    for (ii, inst) in h.instances.iter().enumerate() {
        let mi = inst.module;
        let m = &design.modules[mi];
        let mdu = &def_use.modules[mi];
        for (body_ref, facts) in &mdu.bodies {
            let body = match *body_ref {
                BodyRef::Proc(p) => &m.procs[p as usize].body,
                BodyRef::Func(f) => &m.funcs[f as usize].body,
            };
            let port_conn = match *body_ref {
                BodyRef::Proc(p) => m.procs[p as usize].attrs.contains("portConn"),
                BodyRef::Func(_) => false,
            };
            for (si, f) in facts.iter().enumerate() {
                let id = StmtId::new(mi, *body_ref, si);
                for (acc, _) in &f.defs {
                    let base = access_base(acc);
                    if is_temp(m, &base) || is_func_local(m, *body_ref, &base) {
                        continue;
                    }
                    let Some((di, dsig)) = resolve_base(h, design, ii, &base) else {
                        continue;
                    };
                    let Some(&dst) = index.get(&(di, dsig)) else { continue };
                    let flags = hop_flags(design, h, ii, &body[si].stmt);
                    // Receive defs draw from the paired invoke and from the
                    // callee's module-level reads.
                    let sources = if matches!(body[si].stmt, Stmt::Receive { .. }) {
                        invoke_sources(m, body, si)
                    } else {
                        f.uses.iter().map(|u| (u.clone(), flags)).collect()
                    };
                    let mut seen = BTreeSet::new();
                    let mut work: Vec<(String, HopFlags)> = sources;
                    while let Some((u, fl)) = work.pop() {
                        let func_local = is_func_local(m, *body_ref, &u);
                        if is_temp(m, &u) || func_local {
                            if !seen.insert(u.clone()) {
                                continue;
                            }
                            // Func locals resolve only inside their own
                            // body; module temps module-wide.
                            let sites: Vec<StmtId> = mdu
                                .defs_of(&u)
                                .iter()
                                .copied()
                                .filter(|t| !func_local || t.body == *body_ref)
                                .collect();
                            for tid in sites {
                                let tbody = match tid.body {
                                    BodyRef::Proc(p) => &m.procs[p as usize].body,
                                    BodyRef::Func(fx) => &m.funcs[fx as usize].body,
                                };
                                let tstmt = &tbody[tid.stmt as usize].stmt;
                                let hop = hop_flags(design, h, ii, tstmt);
                                if matches!(tstmt, Stmt::Receive { .. }) {
                                    for (src, sfl) in
                                        invoke_sources(m, tbody, tid.stmt as usize)
                                    {
                                        work.push((src, combine(fl, sfl)));
                                    }
                                } else {
                                    for u2 in &def_use.facts(tid).uses {
                                        work.push((u2.clone(), combine(fl, hop)));
                                    }
                                }
                            }
                            continue;
                        }
                        let Some((si2, ssig)) = resolve_base(h, design, ii, &u) else {
                            continue;
                        };
                        let Some(&src) = index.get(&(si2, ssig)) else { continue };
                        edges.insert(ChainEdge {
                            src,
                            dst,
                            host: ii,
                            stmt: id,
                            identity: fl.identity,
                            port_conn,
                            x_preserving: fl.x_preserving,
                        });
                    }
                }
            }
        }
    }

    let edges: Vec<ChainEdge> = edges.into_iter().collect();
    let mut out_edges = vec![Vec::new(); nodes.len()];
    let mut in_edges = vec![Vec::new(); nodes.len()];
    for (ei, e) in edges.iter().enumerate() {
        out_edges[e.src].push(ei);
        in_edges[e.dst].push(ei);
    }
    DefChain { hierarchy, nodes, edges, index, out_edges, in_edges }
}

/// True when `id` is local to the Func a statement lives in (param, output,
/// var, or const of that Func); such names never form graph nodes.
fn is_func_local(m: &Module, body: BodyRef, id: &str) -> bool {
    let BodyRef::Func(f) = body else { return false };
    let f = &m.funcs[f as usize];
    f.inputs.iter().any(|x| x == id)
        || f.outputs.iter().any(|x| x == id)
        || f.vars.iter().any(|v| v.id == id)
        || f.consts.iter().any(|c| c.id == id)
}

/// Sources feeding a `receive` at `si`: the params of the nearest preceding
/// `invoke`, plus every module-level signal the callee's body reads.
fn invoke_sources(m: &Module, body: &[Statement], si: usize) -> Vec<(String, HopFlags)> {
    let flags = HopFlags { identity: false, x_preserving: true };
    let mut out = Vec::new();
    let Some(inv) = body[..si]
        .iter()
        .rev()
        .find_map(|s| match &s.stmt {
            Stmt::Invoke { callee, params } => Some((callee, params)),
            _ => None,
        })
    else {
        return out;
    };
    let (callee, params) = inv;
    for p in params {
        out.push((p.clone(), flags));
    }
    // Local callee: harvest module-level reads from its body.
    if let [fname] = callee.as_slice() {
        if let Some(f) = m.funcs.iter().find(|f| &f.id == fname) {
            let local = |id: &str| {
                f.inputs.iter().any(|x| x == id)
                    || f.outputs.iter().any(|x| x == id)
                    || f.vars.iter().any(|v| v.id == id)
                    || f.consts.iter().any(|c| c.id == id)
            };
            for s in &f.body {
                let facts = super::defuse::stmt_facts_of(m, &s.stmt);
                for u in facts.uses.iter().chain(facts.cond_uses.iter()) {
                    if !local(u) {
                        out.push((u.clone(), flags));
                    }
                }
            }
        }
    }
    out
}

/// Deterministic text rendering: nodes then edges, one record per line.
pub fn dump(design: &Design, c: &DefChain) -> String {
    let mut out = String::new();
    for n in &c.nodes {
        writeln!(out, "node {}", n.qualified).unwrap();
    }
    for e in &c.edges {
        let mut tags = Vec::new();
        if e.identity {
            tags.push("identity");
        }
        if e.port_conn {
            tags.push("port-conn");
        }
        if !e.x_preserving {
            tags.push("x-stop");
        }
        let tagtext = if tags.is_empty() { String::new() } else { format!(" [{}]", tags.join(",")) };
        writeln!(
            out,
            "edge {} -> {}{} stmt {}",
            c.nodes[e.src].qualified,
            c.nodes[e.dst].qualified,
            tagtext,
            e.stmt.render(design),
        )
        .unwrap();
    }
    out
}
