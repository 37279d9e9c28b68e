//! Fundamental analyses over the IR: module hierarchy, per-Proc control-flow
//! graphs, def-use relations, the flow-insensitive inter-module def-chain
//! graph, reaching guards, the process dependency graph, and flow-insensitive
//! bit-level constant propagation.
//!
//! Results are immutable once produced and may embed upstream results (via
//! `Arc`) so each stays self-describing for dumps and downstream clients.

mod cfg;
mod chain;
mod constprop;
mod defuse;
mod guards;
mod hierarchy;
mod procdep;

pub use cfg::{build_cfg, BranchArm, BranchInfo, Cfg, CfgSet, EdgeKind};
pub use chain::{build_def_chain, resolve_base, ChainEdge, DefChain, SignalNode};
pub use constprop::{analyze_const_prop, AbsState, ConstMap};
pub use defuse::{access_base, analyze_def_use, DefUse, ModuleDefUse, StmtFacts};
pub use guards::{analyze_reaching_guards, BodyGuards, GuardSite, Guards};
pub use hierarchy::{analyze_hierarchy, HierEdge, Hierarchy, Instance};
pub use procdep::{build_proc_dep_graph, ProcDepEdge, ProcDeps, ProcNode};

use crate::ir::{Design, Module, Statement};
use crate::manager::{AnalysisDescriptor, AnalysisOutput, Manager, ManagerError};

/// Which statement list of a module a statement lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyRef {
    Proc(u32),
    Func(u32),
}

/// A statement address: module index in the design, body within the module,
/// statement index within the body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtId {
    pub module: u32,
    pub body: BodyRef,
    pub stmt: u32,
}

impl StmtId {
    pub fn new(module: usize, body: BodyRef, stmt: usize) -> StmtId {
        StmtId { module: module as u32, body, stmt: stmt as u32 }
    }

    /// The statement this id addresses. Panics on a stale id; ids are only
    /// meaningful against the design they were built from.
    pub fn resolve<'a>(&self, design: &'a Design) -> &'a Statement {
        let m = &design.modules[self.module as usize];
        let body = match self.body {
            BodyRef::Proc(p) => &m.procs[p as usize].body,
            BodyRef::Func(f) => &m.funcs[f as usize].body,
        };
        &body[self.stmt as usize]
    }

    /// The `file:line` of the statement, falling back to its Proc and then
    /// to the module name.
    pub fn loc<'a>(&self, design: &'a Design) -> (&'a str, u32) {
        let m = &design.modules[self.module as usize];
        if let Some((f, l)) = self.resolve(design).loc() {
            return (f, l);
        }
        if let BodyRef::Proc(p) = self.body {
            if let Some((f, l)) = m.procs[p as usize].loc() {
                return (f, l);
            }
        }
        (&m.name, 0)
    }

    /// Compact `module/body/stmt` rendering for dumps.
    pub fn render(&self, design: &Design) -> String {
        let m = &design.modules[self.module as usize];
        match self.body {
            BodyRef::Proc(p) => format!("{}/proc{}/s{}", m.name, p, self.stmt),
            BodyRef::Func(f) => {
                format!("{}/func.{}/s{}", m.name, m.funcs[f as usize].id, self.stmt)
            }
        }
    }
}

/// All statement bodies of a module, procs first, in declaration order.
pub fn bodies(m: &Module) -> impl Iterator<Item = (BodyRef, &[Statement])> {
    let procs = m
        .procs
        .iter()
        .enumerate()
        .map(|(i, p)| (BodyRef::Proc(i as u32), p.body.as_slice()));
    let funcs = m
        .funcs
        .iter()
        .enumerate()
        .map(|(i, f)| (BodyRef::Func(i as u32), f.body.as_slice()));
    procs.chain(funcs)
}

/// True for frontend-generated temporaries, which def-chain-level results
/// collapse through: local `$t…` names that are not ports. Inferred external
/// modules name their ports `$t1…`, so port declarations never count.
pub fn is_temp(m: &Module, id: &str) -> bool {
    if !id.starts_with("$t") {
        return false;
    }
    if let Some(n) = m.net(id) {
        return n.dir.is_none();
    }
    if let Some(v) = m.var(id) {
        return v.dir.is_none();
    }
    false
}

/// Registers the fundamental analyses.
pub fn register(m: &mut Manager) -> Result<(), ManagerError> {
    m.register(
        AnalysisDescriptor::new("hierarchy", &[], true, |input| {
            let h = analyze_hierarchy(input.design())?;
            Ok(AnalysisOutput::new(h))
        })
        .with_dump::<Hierarchy>(hierarchy::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("cfg", &[], true, |input| {
            Ok(AnalysisOutput::new(build_cfg(input.design())))
        })
        .with_dump::<CfgSet>(cfg::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("def-use", &[], true, |input| {
            Ok(AnalysisOutput::new(analyze_def_use(input.design())))
        })
        .with_dump::<DefUse>(defuse::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("fi-def-chain", &["def-use", "hierarchy"], true, |input| {
            let def_use = input.dep_arc::<DefUse>("def-use");
            let hierarchy = input.dep_arc::<Hierarchy>("hierarchy");
            Ok(AnalysisOutput::new(build_def_chain(input.design(), def_use, hierarchy)))
        })
        .with_dump::<DefChain>(chain::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("reaching-guards", &["cfg"], true, |input| {
            let cfg = input.dep_arc::<CfgSet>("cfg");
            Ok(AnalysisOutput::new(analyze_reaching_guards(input.design(), cfg)))
        })
        .with_dump::<Guards>(guards::dump),
    )?;
    m.register(
        AnalysisDescriptor::new(
            "proc-deps",
            &["def-use", "reaching-guards", "hierarchy"],
            true,
            |input| {
                let def_use = input.dep_arc::<DefUse>("def-use");
                let guards = input.dep_arc::<Guards>("reaching-guards");
                let hierarchy = input.dep_arc::<Hierarchy>("hierarchy");
                Ok(AnalysisOutput::new(build_proc_dep_graph(
                    input.design(),
                    def_use,
                    guards,
                    hierarchy,
                )))
            },
        )
        .with_dump::<ProcDeps>(procdep::dump),
    )?;
    m.register(
        AnalysisDescriptor::new("fi-const-prop", &["fi-def-chain"], true, |input| {
            let chain = input.dep_arc::<DefChain>("fi-def-chain");
            let top_inputs_any = match input.option("fi-const-prop.top-inputs") {
                None | Some("driven") => false,
                Some("any") => true,
                Some(other) => {
                    return Err(format!(
                        "unknown value `{other}` for fi-const-prop.top-inputs \
                         (expected `driven` or `any`)"
                    ))
                }
            };
            Ok(AnalysisOutput::new(analyze_const_prop(input.design(), chain, top_inputs_any)))
        })
        .with_dump::<ConstMap>(constprop::dump),
    )?;
    Ok(())
}
