//! Elaboration: instantiates the parsed modules into a flat design.
//!
//! Declared modules are lowered in declaration order. Instances with
//! parameter overrides clone-and-specialize the target under a derived name
//! (`adder$1`), deduplicated by override values. Instances of undefined
//! modules get a signature inferred from every connection site: positional
//! ports are named `$t1..$tN`, connection types merge to the widest, and a
//! port is an input exactly when some host drives the connected value.

use std::collections::{BTreeMap, BTreeSet};

use crate::bitvec::LogicVec;
use crate::ir::{AttrMap, Design, Dir, Module, NetDecl, NetKind, Type};

use super::ast::{
    AssignAst, Connection, DeclKind, Expr, InitialAst, Item, ModuleAst, Pos, Stmt,
};
use super::lower::ModuleCx;
use super::{CompileOutput, FrontendError, InferredSignature, Warning};

fn elab(pos: &Pos, msg: impl Into<String>) -> FrontendError {
    FrontendError::Elab { file: pos.file.to_string(), line: pos.line, msg: msg.into() }
}

/// A connection to a not-yet-defined module, lowered after inference.
struct Pending {
    host: String,
    inst: String,
    module: String,
    conns: Vec<Connection>,
    pos: Pos,
}

/// Accumulated evidence about one inferred port.
#[derive(Default)]
struct PortInfo {
    ty: Option<Type>,
    /// Some connection expression carries a host-driven value into the port.
    input: bool,
}

struct Elab {
    asts: BTreeMap<String, ModuleAst>,
    decl_order: Vec<String>,
    /// Lowered modules, kept open until pending connections are resolved.
    done: BTreeMap<String, ModuleCx>,
    /// Base names currently being lowered, for recursion detection.
    in_progress: BTreeSet<String>,
    /// Override-value key to specialized module name.
    spec_cache: BTreeMap<String, String>,
    spec_order: Vec<String>,
    spec_count: BTreeMap<String, usize>,
    pending: Vec<Pending>,
    missing_order: Vec<String>,
    warnings: Vec<Warning>,
    inferred: Vec<InferredSignature>,
}

pub(crate) fn elaborate(
    design_name: String,
    modules: Vec<ModuleAst>,
) -> Result<CompileOutput, FrontendError> {
    let mut asts = BTreeMap::new();
    let mut decl_order = Vec::new();
    for m in modules {
        if asts.contains_key(&m.name) {
            return Err(elab(
                &m.pos,
                format!("conflicting definitions of module `{}`", m.name),
            ));
        }
        decl_order.push(m.name.clone());
        asts.insert(m.name.clone(), m);
    }
    let mut e = Elab {
        asts,
        decl_order,
        done: BTreeMap::new(),
        in_progress: BTreeSet::new(),
        spec_cache: BTreeMap::new(),
        spec_order: Vec::new(),
        spec_count: BTreeMap::new(),
        pending: Vec::new(),
        missing_order: Vec::new(),
        warnings: Vec::new(),
        inferred: Vec::new(),
    };

    for name in e.decl_order.clone() {
        e.ensure_lowered(&name, &BTreeMap::new(), None)?;
    }
    let externals = e.infer_missing()?;
    e.lower_pending()?;

    // Assembly: declared modules in declaration order, then parameter
    // specializations in creation order, then inferred externals.
    let mut design = Design::new(design_name);
    let decl_order = std::mem::take(&mut e.decl_order);
    let spec_order = std::mem::take(&mut e.spec_order);
    for name in decl_order.iter().chain(&spec_order) {
        let mut cx = e.done.remove(name).expect("lowered module");
        e.warnings.append(&mut cx.warnings);
        design.modules.push(cx.finish());
    }
    design.modules.extend(externals);
    Ok(CompileOutput { design, warnings: e.warnings, inferred: e.inferred })
}

/// Non-local parameter names of a module, in declaration order.
fn param_names(ast: &ModuleAst) -> Vec<String> {
    ast.items
        .iter()
        .filter_map(|i| match i {
            Item::Param(p) if !p.local => Some(p.name.clone()),
            _ => None,
        })
        .collect()
}

/// Matches instance connections against a port signature; returns the
/// connected ports as (port, type, dir, expression, position).
fn match_conns(
    sig: &[(String, Type, Dir)],
    conns: &[Connection],
    module: &str,
    pos: &Pos,
) -> Result<Vec<(String, Type, Dir, Expr, Pos)>, FrontendError> {
    let named = conns.first().map(|c| c.name.is_some()).unwrap_or(false);
    let mut out = Vec::new();
    if named {
        let mut seen = BTreeSet::new();
        for c in conns {
            let n = c.name.as_ref().expect("named connection");
            if !seen.insert(n.clone()) {
                return Err(elab(&c.pos, format!("port `{n}` connected twice")));
            }
            let Some((_, ty, dir)) = sig.iter().find(|(p, _, _)| p == n) else {
                return Err(elab(&c.pos, format!("module `{module}` has no port `{n}`")));
            };
            if let Some(e) = &c.expr {
                out.push((n.clone(), ty.clone(), *dir, e.clone(), c.pos.clone()));
            }
        }
    } else {
        if conns.len() > sig.len() {
            return Err(elab(
                pos,
                format!(
                    "module `{module}` has {} ports but {} connections",
                    sig.len(),
                    conns.len()
                ),
            ));
        }
        for (c, (p, ty, dir)) in conns.iter().zip(sig) {
            if let Some(e) = &c.expr {
                out.push((p.clone(), ty.clone(), *dir, e.clone(), c.pos.clone()));
            }
        }
    }
    Ok(out)
}

impl Elab {
    /// Lowers `base` (or a parameter specialization of it) if not already
    /// done, returning the final module name.
    fn ensure_lowered(
        &mut self,
        base: &str,
        overrides: &BTreeMap<String, LogicVec>,
        ref_pos: Option<&Pos>,
    ) -> Result<String, FrontendError> {
        let recursion_err = |s: &Elab, pos: Option<&Pos>| {
            let p = pos.unwrap_or(&s.asts[base].pos);
            elab(p, format!("recursive instantiation of module `{base}`"))
        };
        if overrides.is_empty() {
            if self.done.contains_key(base) {
                return Ok(base.to_string());
            }
            if self.in_progress.contains(base) {
                return Err(recursion_err(self, ref_pos));
            }
            let ast = self.asts[base].clone();
            self.in_progress.insert(base.to_string());
            let cx = self.lower_module(ast, base.to_string(), overrides);
            self.in_progress.remove(base);
            self.done.insert(base.to_string(), cx?);
            return Ok(base.to_string());
        }
        let mut key = String::from(base);
        for (k, v) in overrides {
            key.push_str(&format!("|{k}={v}"));
        }
        if let Some(n) = self.spec_cache.get(&key) {
            return Ok(n.clone());
        }
        if self.in_progress.contains(base) {
            return Err(recursion_err(self, ref_pos));
        }
        let mut k = self.spec_count.get(base).copied().unwrap_or(0);
        let name = loop {
            k += 1;
            let cand = format!("{base}${k}");
            if !self.asts.contains_key(&cand) && !self.done.contains_key(&cand) {
                break cand;
            }
        };
        self.spec_count.insert(base.to_string(), k);
        let ast = self.asts[base].clone();
        self.in_progress.insert(base.to_string());
        let cx = self.lower_module(ast, name.clone(), overrides);
        self.in_progress.remove(base);
        self.done.insert(name.clone(), cx?);
        self.spec_cache.insert(key, name.clone());
        self.spec_order.push(name.clone());
        Ok(name)
    }

    fn lower_module(
        &mut self,
        ast: ModuleAst,
        final_name: String,
        overrides: &BTreeMap<String, LogicVec>,
    ) -> Result<ModuleCx, FrontendError> {
        let mut cx = ModuleCx::new(final_name, &ast.pos, ast.port_order.clone());
        // Parameters first: later ranges and initializers may use them.
        for item in &ast.items {
            if let Item::Param(p) = item {
                let ov = if p.local { None } else { overrides.get(&p.name) };
                cx.add_param(&p.name, &p.pos, &p.value, ov)?;
                if !p.local {
                    cx.param_order.push(p.name.clone());
                }
            }
        }
        // Declarations next, merging repeated lines for one name
        // (`input a;` plus `wire a;`).
        let mut groups: Vec<(&str, Vec<&super::ast::DeclAst>)> = Vec::new();
        for item in &ast.items {
            if let Item::Decl(d) = item {
                match groups.iter_mut().find(|(n, _)| *n == d.name) {
                    Some((_, v)) => v.push(d),
                    None => groups.push((&d.name, vec![d])),
                }
            }
        }
        for (_, g) in &groups {
            cx.add_decls(g)?;
        }
        cx.check_ports(&ast.pos)?;
        // Behavior last, in source order.
        for item in &ast.items {
            match item {
                Item::Param(_) => {}
                Item::Decl(d) => {
                    if let Some(init) = &d.init {
                        let lhs = Expr::Ident(d.name.clone(), d.pos.clone());
                        if matches!(d.kind, Some(DeclKind::Reg)) {
                            // A reg initializer runs once at time zero.
                            cx.lower_initial(&InitialAst {
                                pos: d.pos.clone(),
                                body: Stmt::Assign {
                                    pos: d.pos.clone(),
                                    blocking: true,
                                    lhs,
                                    rhs: init.clone(),
                                },
                            })?;
                        } else {
                            cx.lower_assign_item(&AssignAst {
                                pos: d.pos.clone(),
                                lhs,
                                rhs: init.clone(),
                            })?;
                        }
                    }
                }
                Item::Assign(a) => cx.lower_assign_item(a)?,
                Item::Always(a) => cx.lower_always(a)?,
                Item::Initial(i) => cx.lower_initial(i)?,
                Item::Gate(g) => cx.lower_gate(g)?,
                Item::Instance(inst) => self.process_instance(&mut cx, inst)?,
            }
        }
        Ok(cx)
    }

    fn process_instance(
        &mut self,
        cx: &mut ModuleCx,
        inst: &super::ast::InstanceAst,
    ) -> Result<(), FrontendError> {
        if !self.asts.contains_key(&inst.module) {
            if !inst.params.is_empty() {
                return Err(elab(
                    &inst.pos,
                    format!("parameter override on undefined module `{}`", inst.module),
                ));
            }
            cx.add_inst(&inst.name, &inst.module, &inst.pos)?;
            if !self.missing_order.contains(&inst.module) {
                self.missing_order.push(inst.module.clone());
            }
            self.pending.push(Pending {
                host: cx.name.clone(),
                inst: inst.name.clone(),
                module: inst.module.clone(),
                conns: inst.conns.clone(),
                pos: inst.pos.clone(),
            });
            return Ok(());
        }
        let overrides = self.eval_overrides(cx, inst)?;
        let final_name = self.ensure_lowered(&inst.module, &overrides, Some(&inst.pos))?;
        cx.add_inst(&inst.name, &final_name, &inst.pos)?;
        let sig = self.done[&final_name].port_sig();
        for (port, ty, dir, expr, cpos) in match_conns(&sig, &inst.conns, &inst.module, &inst.pos)? {
            match dir {
                Dir::Input => cx.lower_port_conn_input(&inst.name, &port, &ty, &expr, &cpos)?,
                Dir::Output => cx.lower_port_conn_output(&inst.name, &port, &ty, &expr, &cpos)?,
            }
        }
        Ok(())
    }

    /// Evaluates `#(...)` overrides in the host context, mapping positional
    /// values onto the target's parameter order.
    fn eval_overrides(
        &self,
        cx: &ModuleCx,
        inst: &super::ast::InstanceAst,
    ) -> Result<BTreeMap<String, LogicVec>, FrontendError> {
        if inst.params.is_empty() {
            return Ok(BTreeMap::new());
        }
        let names = param_names(&self.asts[&inst.module]);
        let named = inst.params.iter().any(|(n, _)| n.is_some());
        let positional = inst.params.iter().any(|(n, _)| n.is_none());
        if named && positional {
            return Err(elab(&inst.pos, "cannot mix positional and named parameter overrides"));
        }
        let mut out = BTreeMap::new();
        for (i, (name, expr)) in inst.params.iter().enumerate() {
            let pname = match name {
                Some(n) => {
                    if !names.iter().any(|x| x == n) {
                        return Err(elab(
                            expr.pos(),
                            format!("module `{}` has no parameter `{n}`", inst.module),
                        ));
                    }
                    n.clone()
                }
                None => names.get(i).cloned().ok_or_else(|| {
                    elab(
                        expr.pos(),
                        format!("module `{}` takes {} parameters", inst.module, names.len()),
                    )
                })?,
            };
            let v = cx.const_eval(expr)?;
            if !v.is_fully_defined() {
                return Err(elab(
                    expr.pos(),
                    format!("parameter `{pname}` override has x/z bits ({v})"),
                ));
            }
            if out.insert(pname.clone(), v).is_some() {
                return Err(elab(expr.pos(), format!("parameter `{pname}` overridden twice")));
            }
        }
        Ok(out)
    }

    /// Builds external stand-in modules for every instantiated-but-undefined
    /// module, merging evidence from all connection sites.
    fn infer_missing(&mut self) -> Result<Vec<Module>, FrontendError> {
        let mut externals = Vec::new();
        // Driven identifiers per host, computed once over the lowered Procs;
        // connections added for inferred outputs later do not count.
        let mut driven: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for p in &self.pending {
            if !driven.contains_key(&p.host) {
                driven.insert(p.host.clone(), self.done[&p.host].driven_ids());
            }
        }
        for module in self.missing_order.clone() {
            let pendings: Vec<&Pending> =
                self.pending.iter().filter(|p| p.module == module).collect();
            let first_pos = &pendings[0].pos;
            // Positional ports first ($t1..$tN for the widest instance),
            // then named ports in first-seen order.
            let max_pos = pendings
                .iter()
                .map(|p| match p.conns.first() {
                    Some(c) if c.name.is_none() => p.conns.len(),
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            let mut order: Vec<String> = (1..=max_pos).map(|i| format!("$t{i}")).collect();
            let mut ports: BTreeMap<String, PortInfo> = order
                .iter()
                .map(|n| (n.clone(), PortInfo::default()))
                .collect();
            let mut new_warnings = Vec::new();
            for p in &pendings {
                let host = &self.done[&p.host];
                let host_driven = &driven[&p.host];
                for (i, c) in p.conns.iter().enumerate() {
                    let pname = match &c.name {
                        Some(n) => n.clone(),
                        None => format!("$t{}", i + 1),
                    };
                    if !ports.contains_key(&pname) {
                        order.push(pname.clone());
                        ports.insert(pname.clone(), PortInfo::default());
                    }
                    let Some(expr) = &c.expr else { continue };
                    let ty = host.conn_type(expr)?;
                    let info = ports.get_mut(&pname).expect("port just ensured");
                    info.ty = Some(match info.ty.take() {
                        None => ty,
                        Some(prev) => {
                            let (wp, wn) = (prev.width().unwrap_or(1), ty.width().unwrap_or(1));
                            if wp != wn {
                                new_warnings.push(Warning {
                                    file: c.pos.file.to_string(),
                                    line: c.pos.line,
                                    msg: format!(
                                        "port `{pname}` of `{module}` is connected at both {} and {} bits; assuming {}",
                                        wp.min(wn),
                                        wp.max(wn),
                                        wp.max(wn)
                                    ),
                                });
                            }
                            let w = wp.max(wn);
                            if prev.is_signed() && ty.is_signed() {
                                Type::sbv(w)
                            } else {
                                Type::bv(w)
                            }
                        }
                    });
                    if host.conn_is_driven(expr, host_driven) {
                        info.input = true;
                    }
                }
            }
            self.warnings.push(Warning {
                file: first_pos.file.to_string(),
                line: first_pos.line,
                msg: format!(
                    "module `{module}` is not defined; inferred a signature with {} ports",
                    order.len()
                ),
            });
            self.warnings.append(&mut new_warnings);

            let mut m = Module::new(module.clone());
            m.attrs.insert("external", "true");
            m.attrs.set_loc(&first_pos.file, first_pos.line);
            let mut sig = Vec::new();
            for name in &order {
                let info = &ports[name];
                let ty = info.ty.clone().unwrap_or_else(|| Type::bv(1));
                let dir = if info.input { Dir::Input } else { Dir::Output };
                m.nets.push(NetDecl {
                    id: name.clone(),
                    kind: NetKind::Wire,
                    ty: ty.clone(),
                    dir: Some(dir),
                    attrs: AttrMap::new(),
                });
                sig.push((name.clone(), ty, dir));
            }
            self.inferred.push(InferredSignature { module: module.clone(), ports: sig });
            externals.push(m);
        }
        Ok(externals)
    }

    /// Lowers the recorded connections to inferred modules into their hosts.
    fn lower_pending(&mut self) -> Result<(), FrontendError> {
        let pending = std::mem::take(&mut self.pending);
        for p in pending {
            let sig = self
                .inferred
                .iter()
                .find(|i| i.module == p.module)
                .expect("signature inferred for every pending module")
                .ports
                .clone();
            let matched = match_conns(&sig, &p.conns, &p.module, &p.pos)?;
            let cx = self.done.get_mut(&p.host).expect("host stays open");
            for (port, ty, dir, expr, cpos) in matched {
                match dir {
                    Dir::Input => cx.lower_port_conn_input(&p.inst, &port, &ty, &expr, &cpos)?,
                    Dir::Output => cx.lower_port_conn_output(&p.inst, &port, &ty, &expr, &cpos)?,
                }
            }
        }
        Ok(())
    }
}
