//! Structural validation: one diagnostic string per invariant violation.

use std::collections::BTreeSet;

use super::types::*;

/// Checks a design's structural invariants and returns a diagnostic per
/// violation. An empty result means the design is well-formed.
pub fn validate(d: &Design) -> Vec<String> {
    let mut out = Vec::new();
    if d.attrs.contains("name") {
        out.push("design attributes use the reserved key `name`".to_string());
    }
    let mut module_names = BTreeSet::new();
    for m in &d.modules {
        if !module_names.insert(m.name.as_str()) {
            out.push(format!("duplicate module `{}`", m.name));
        }
    }
    for m in &d.modules {
        validate_module(d, m, &mut out);
    }
    out
}

fn validate_module(d: &Design, m: &Module, out: &mut Vec<String>) {
    let mut ids = BTreeSet::new();
    for id in m.declared_ids() {
        if !ids.insert(id) {
            out.push(format!("module `{}`: duplicate declaration `{}`", m.name, id));
        }
    }
    for n in &m.nets {
        validate_type(&n.ty, &format!("module `{}`: net `{}`", m.name, n.id), out);
        if n.dir.is_some() && n.attrs.contains("dir") {
            out.push(format!(
                "module `{}`: port `{}` uses the reserved attribute key `dir`",
                m.name, n.id
            ));
        }
    }
    for v in &m.vars {
        validate_type(&v.ty, &format!("module `{}`: var `{}`", m.name, v.id), out);
        if v.dir.is_some() && v.attrs.contains("dir") {
            out.push(format!(
                "module `{}`: port `{}` uses the reserved attribute key `dir`",
                m.name, v.id
            ));
        }
    }
    for c in &m.consts {
        if !c.value.is_fully_defined() {
            out.push(format!(
                "module `{}`: const `{}` has undefined bits ({})",
                m.name, c.id, c.value
            ));
        }
    }
    for i in &m.insts {
        if d.module(&i.module).is_none() {
            out.push(format!(
                "module `{}`: instance `{}` references unknown module `{}`",
                m.name, i.id, i.module
            ));
        }
    }
    for (pi, p) in m.procs.iter().enumerate() {
        let name = p.display_name(pi);
        let types = |id: &str| m.type_of(id);
        validate_body(m, &name, &p.body, false, &types, out);
    }
    for f in &m.funcs {
        let name = format!("func `{}`", f.id);
        let mut local_ids: BTreeSet<&str> = BTreeSet::new();
        for v in &f.vars {
            if !local_ids.insert(&v.id) {
                out.push(format!(
                    "module `{}`: {name}: duplicate local `{}`",
                    m.name, v.id
                ));
            }
            validate_type(&v.ty, &format!("module `{}`: {name}: var `{}`", m.name, v.id), out);
        }
        for c in &f.consts {
            if !local_ids.insert(&c.id) {
                out.push(format!(
                    "module `{}`: {name}: duplicate local `{}`",
                    m.name, c.id
                ));
            }
        }
        for arg in f.inputs.iter().chain(&f.outputs) {
            if !f.vars.iter().any(|v| v.id == *arg) {
                out.push(format!(
                    "module `{}`: {name}: argument `{arg}` has no local var declaration",
                    m.name
                ));
            }
        }
        // Function locals shadow module declarations.
        let types = |id: &str| {
            if let Some(v) = f.vars.iter().find(|v| v.id == id) {
                return Some(v.ty.clone());
            }
            if let Some(c) = f.consts.iter().find(|c| c.id == id) {
                return Some(Type::Bv { width: c.value.width(), signed: c.value.is_signed() });
            }
            m.type_of(id)
        };
        validate_body(m, &name, &f.body, true, &types, out);
    }
}

fn validate_type(ty: &Type, what: &str, out: &mut Vec<String>) {
    match ty {
        Type::Bv { width, .. } => {
            if *width == 0 {
                out.push(format!("{what}: zero-width type"));
            }
        }
        Type::Real => {}
        Type::Array { elem, len } => {
            if *len == 0 {
                out.push(format!("{what}: zero-length array"));
            }
            match elem.as_ref() {
                Type::Array { .. } => out.push(format!("{what}: nested array type")),
                other => validate_type(other, what, out),
            }
        }
    }
}

fn validate_body(
    m: &Module,
    ctx: &str,
    body: &[Statement],
    in_func: bool,
    types: &dyn Fn(&str) -> Option<Type>,
    out: &mut Vec<String>,
) {
    let mut labels = BTreeSet::new();
    for s in body {
        if let Stmt::Label(l) = &s.stmt {
            if !labels.insert(l.as_str()) {
                out.push(format!("module `{}`: {ctx}: duplicate label `{l}`", m.name));
            }
            if !s.attrs.is_empty() {
                out.push(format!(
                    "module `{}`: {ctx}: label `{l}` carries attributes",
                    m.name
                ));
            }
        }
    }
    for s in body {
        for t in s.targets() {
            if !labels.contains(t) {
                out.push(format!(
                    "module `{}`: {ctx}: unresolved label `{t}`",
                    m.name
                ));
            }
        }
        match &s.stmt {
            Stmt::Guard(_) if in_func => {
                out.push(format!("module `{}`: {ctx}: guard inside function", m.name));
            }
            Stmt::Assign(a) => {
                if in_func && a.op == AssignOp::NonBlocking {
                    out.push(format!(
                        "module `{}`: {ctx}: non-blocking assignment inside function",
                        m.name
                    ));
                }
                validate_assign(m, ctx, a, types, out);
            }
            Stmt::If { cond, .. } => {
                if let Some(ty) = types(cond) {
                    if ty.width() != Some(1) {
                        out.push(format!(
                            "module `{}`: {ctx}: if condition `{cond}` is {ty}, not bv<1>",
                            m.name
                        ));
                    }
                }
            }
            Stmt::Case { subject, arms, .. } => {
                if let Some(w) = types(subject).and_then(|t| t.width()) {
                    for (pat, _) in arms {
                        if pat.width() != w {
                            out.push(format!(
                                "module `{}`: {ctx}: case pattern {pat} is {} bits, subject `{subject}` is {w}",
                                m.name,
                                pat.width()
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

fn validate_assign(
    m: &Module,
    ctx: &str,
    a: &Assign,
    types: &dyn Fn(&str) -> Option<Type>,
    out: &mut Vec<String>,
) {
    if let Some(Selector::Range(msb, lsb)) = &a.lhs.sel {
        if msb < lsb {
            out.push(format!(
                "module `{}`: {ctx}: select [{msb}:{lsb}] has msb < lsb",
                m.name
            ));
        }
    }
    match &a.rhs {
        Rvalue::Access(acc) => {
            if let Some(Selector::Range(msb, lsb)) = &acc.sel {
                if msb < lsb {
                    out.push(format!(
                        "module `{}`: {ctx}: select [{msb}:{lsb}] has msb < lsb",
                        m.name
                    ));
                }
            }
            // At most one side may carry an access form; the other must be a
            // plain identifier (the grammar's load/store shapes).
            if !a.lhs.is_plain() && !acc.is_plain() {
                out.push(format!(
                    "module `{}`: {ctx}: `{} {} {}` has access forms on both sides",
                    m.name,
                    a.lhs,
                    a.op.token(),
                    acc
                ));
            }
        }
        Rvalue::Compute(c) => {
            if !a.lhs.is_plain() {
                out.push(format!(
                    "module `{}`: {ctx}: compute target `{}` must be a plain identifier",
                    m.name, a.lhs
                ));
            }
            validate_compute(m, ctx, &a.lhs, c, types, out);
        }
    }
}

fn validate_compute(
    m: &Module,
    ctx: &str,
    lhs: &Access,
    c: &Compute,
    types: &dyn Fn(&str) -> Option<Type>,
    out: &mut Vec<String>,
) {
    let width_of = |id: &str| types(id).and_then(|t| t.width());
    match c {
        Compute::Binary(op, a, b) => {
            if op.requires_equal_widths() {
                if let (Some(wa), Some(wb)) = (width_of(a), width_of(b)) {
                    if wa != wb {
                        out.push(format!(
                            "module `{}`: {ctx}: `{}` operands `{a}` ({wa} bits) and `{b}` ({wb} bits) differ in width",
                            m.name,
                            op.keyword()
                        ));
                    }
                }
            }
            if let (Some(wa), Some(wb), Some(wl)) =
                (width_of(a), width_of(b), lhs.path.first().and_then(|l| width_of(l)))
            {
                let rw = op.result_width(wa, wb);
                if wl != rw {
                    out.push(format!(
                        "module `{}`: {ctx}: `{}` result is {rw} bits but target `{lhs}` is {wl}",
                        m.name,
                        op.keyword()
                    ));
                }
            }
        }
        Compute::Mux(sel, t, e) => {
            if let Some(w) = width_of(sel) {
                if w != 1 {
                    out.push(format!(
                        "module `{}`: {ctx}: mux selector `{sel}` is {w} bits, not 1",
                        m.name
                    ));
                }
            }
            if let (Some(wt), Some(we)) = (width_of(t), width_of(e)) {
                if wt != we {
                    out.push(format!(
                        "module `{}`: {ctx}: mux arms `{t}` ({wt} bits) and `{e}` ({we} bits) differ in width",
                        m.name
                    ));
                }
            }
        }
        Compute::Zext(_, ty) | Compute::Sext(_, ty) | Compute::Cast(_, ty) => {
            if ty.width().is_none() {
                out.push(format!(
                    "module `{}`: {ctx}: extension target type {ty} is not a scalar bit vector",
                    m.name
                ));
            }
        }
        Compute::Unary(..) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::super::emit::tests::sample_design;
    use super::*;
    use crate::bitvec::{BinaryOp, LogicVec};

    #[test]
    fn sample_design_is_valid() {
        assert_eq!(validate(&sample_design()), Vec::<String>::new());
    }

    #[test]
    fn duplicate_modules_and_ids() {
        let mut d = sample_design();
        let clone = d.modules[0].clone();
        d.modules.push(clone);
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("duplicate module")));

        let mut d = sample_design();
        let var = d.modules[0].vars[0].clone();
        d.modules[0].vars.push(var);
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("duplicate declaration")));
    }

    #[test]
    fn unresolved_case_target() {
        let mut d = sample_design();
        d.modules[0].procs[0].body.push(Statement::new(Stmt::Case {
            kind: CaseKind::Case,
            subject: "acc".into(),
            arms: vec![(LogicVec::from_u64(8, 1), "$Lmissing".into())],
            default: None,
        }));
        let problems = validate(&d);
        assert!(
            problems.iter().any(|p| p.contains("unresolved label `$Lmissing`")),
            "{problems:?}"
        );
    }

    #[test]
    fn unknown_instance_module() {
        let mut d = sample_design();
        d.modules[0].insts.push(Inst {
            id: "u9".into(),
            module: "nothere".into(),
            attrs: AttrMap::new(),
        });
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("unknown module `nothere`")));
    }

    #[test]
    fn undefined_const_bits() {
        let mut d = sample_design();
        d.modules[0].consts.push(ConstDecl {
            id: "$c9".into(),
            value: LogicVec::parse_literal("4'b10xz").unwrap(),
            attrs: AttrMap::new(),
        });
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("undefined bits")));
    }

    #[test]
    fn width_mismatches_flagged() {
        let mut d = sample_design();
        // acc is 8 bits, clk is 1: add requires equal widths.
        d.modules[0].procs[0].body.push(Statement::new(Stmt::Assign(Assign {
            op: AssignOp::Blocking,
            lhs: Access::local("acc"),
            rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Add, "acc".into(), "clk".into())),
        })));
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("differ in width")), "{problems:?}");
    }

    #[test]
    fn guard_in_function_rejected() {
        let mut d = sample_design();
        d.modules[0].funcs.push(Func {
            id: "f".into(),
            inputs: vec!["x".into()],
            outputs: vec!["y".into()],
            vars: vec![
                VarDecl { id: "x".into(), ty: Type::bv(4), dir: None, attrs: AttrMap::new() },
                VarDecl { id: "y".into(), ty: Type::bv(4), dir: None, attrs: AttrMap::new() },
            ],
            consts: vec![],
            body: vec![
                Statement::new(Stmt::Guard(Guard::Delay("x".into()))),
                Statement::new(Stmt::Return),
            ],
            attrs: AttrMap::new(),
        });
        let problems = validate(&d);
        assert!(problems.iter().any(|p| p.contains("guard inside function")));
    }
}
