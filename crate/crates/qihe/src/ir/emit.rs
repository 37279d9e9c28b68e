//! Canonical text emission. Same design in, byte-identical text out.

use std::fmt::Write;

use super::types::*;

/// Renders a design in the canonical text form.
///
/// Layout: the design attribute line (the design name is injected as a
/// leading `name` pair), then modules separated by blank lines. Inside a
/// module, declarations sit at indent 2, each proc and func is preceded by
/// a blank line, statements sit at indent 4, and case arms at indent 6.
/// Attributes follow their owner on the same line. Bit vectors are written
/// as binary literals.
pub fn emit_text(d: &Design) -> String {
    let mut out = String::new();
    let mut header = String::new();
    if !d.name.is_empty() {
        header.push_str(&attr_pair("name", &AttrValue::Text(d.name.clone())));
    }
    for (k, v) in d.attrs.iter() {
        if !header.is_empty() {
            header.push_str(", ");
        }
        header.push_str(&attr_pair(k, v));
    }
    if !header.is_empty() {
        out.push_str(&format!("(* {header} *)\n"));
    }
    for m in &d.modules {
        if !out.is_empty() {
            out.push('\n');
        }
        emit_module(&mut out, m);
    }
    out
}

fn emit_module(out: &mut String, m: &Module) {
    out.push_str("module ");
    out.push_str(&m.name);
    push_attrs(out, &m.attrs, " ");
    out.push_str(" {\n");
    for n in &m.nets {
        if n.dir.is_some() {
            out.push_str("  port ");
        } else {
            out.push_str("  ");
        }
        let _ = write!(out, "{} {} : {};", n.kind.keyword(), n.id, n.ty);
        push_attrs(out, &decl_attrs(&n.attrs, n.dir), " ");
        out.push('\n');
    }
    for v in &m.vars {
        if v.dir.is_some() {
            out.push_str("  port ");
        } else {
            out.push_str("  ");
        }
        let _ = write!(out, "var {} : {};", v.id, v.ty);
        push_attrs(out, &decl_attrs(&v.attrs, v.dir), " ");
        out.push('\n');
    }
    for c in &m.consts {
        let _ = write!(out, "  const {} = {};", c.id, c.value);
        push_attrs(out, &c.attrs, " ");
        out.push('\n');
    }
    for i in &m.insts {
        let _ = write!(out, "  inst {} : {};", i.id, i.module);
        push_attrs(out, &i.attrs, " ");
        out.push('\n');
    }
    for p in &m.procs {
        out.push_str("\n  proc");
        push_attrs(out, &p.attrs, " ");
        out.push_str(" {\n");
        for s in &p.body {
            emit_statement(out, s, 4);
        }
        out.push_str("  }\n");
    }
    for f in &m.funcs {
        out.push_str("\n  func ");
        out.push_str(&f.id);
        out.push_str(" (");
        out.push_str(&f.inputs.join(", "));
        out.push_str(") -> (");
        out.push_str(&f.outputs.join(", "));
        out.push(')');
        push_attrs(out, &f.attrs, " ");
        out.push_str(" {\n");
        for v in &f.vars {
            let _ = write!(out, "    var {} : {};", v.id, v.ty);
            push_attrs(out, &decl_attrs(&v.attrs, v.dir), " ");
            out.push('\n');
        }
        for c in &f.consts {
            let _ = write!(out, "    const {} = {};", c.id, c.value);
            push_attrs(out, &c.attrs, " ");
            out.push('\n');
        }
        for s in &f.body {
            emit_statement(out, s, 4);
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
}

fn emit_statement(out: &mut String, s: &Statement, indent: usize) {
    let pad = " ".repeat(indent);
    match &s.stmt {
        Stmt::Label(l) => {
            let _ = writeln!(out, "{pad}{l}:");
            return;
        }
        Stmt::Case { kind, subject, arms, default } => {
            let _ = write!(out, "{pad}{} {} {{\n", kind.keyword(), subject);
            let arm_pad = " ".repeat(indent + 2);
            for (pat, label) in arms {
                let _ = writeln!(out, "{arm_pad}{pat}: goto {label};");
            }
            if let Some(d) = default {
                let _ = writeln!(out, "{arm_pad}default: goto {d};");
            }
            let _ = write!(out, "{pad}}}");
            push_attrs(out, &s.attrs, " ");
            out.push('\n');
            return;
        }
        _ => {}
    }
    out.push_str(&pad);
    match &s.stmt {
        Stmt::Assign(a) => {
            let _ = write!(out, "{} {} ", a.lhs, a.op.token());
            match &a.rhs {
                Rvalue::Access(acc) => {
                    let _ = write!(out, "{acc}");
                }
                Rvalue::Compute(c) => emit_compute(out, c),
            }
            out.push(';');
        }
        Stmt::Guard(g) => {
            match g {
                Guard::Delay(d) => {
                    let _ = write!(out, "# {d}");
                }
                Guard::Event(es) => {
                    out.push_str("@(");
                    emit_events(out, es);
                    out.push(')');
                }
                Guard::Repeat(n, es) => {
                    let _ = write!(out, "repeat ({n}) @(");
                    emit_events(out, es);
                    out.push(')');
                }
            }
            out.push(';');
        }
        Stmt::If { cond, target } => {
            let _ = write!(out, "if {cond} goto {target};");
        }
        Stmt::Goto(l) => {
            let _ = write!(out, "goto {l};");
        }
        Stmt::Invoke { callee, params } => {
            let _ = write!(out, "invoke {} ({});", callee.join("."), params.join(", "));
        }
        Stmt::Receive { params } => {
            let _ = write!(out, "receive ({});", params.join(", "));
        }
        Stmt::Syscall { name, ins, outs } => {
            let _ = write!(out, "syscall {} ({})", name, ins.join(", "));
            if !outs.is_empty() {
                let _ = write!(out, " -> ({})", outs.join(", "));
            }
            out.push(';');
        }
        Stmt::Return => out.push_str("return;"),
        Stmt::Pass => out.push_str("pass;"),
        Stmt::Label(_) | Stmt::Case { .. } => unreachable!("handled above"),
    }
    push_attrs(out, &s.attrs, " ");
    out.push('\n');
}

fn emit_compute(out: &mut String, c: &Compute) {
    match c {
        Compute::Unary(op, a) => {
            let _ = write!(out, "{} {}", op.keyword(), a);
        }
        Compute::Binary(op, a, b) => {
            let _ = write!(out, "{} {} {}", op.keyword(), a, b);
        }
        Compute::Mux(s, t, e) => {
            let _ = write!(out, "{s} ? {t} : {e}");
        }
        Compute::Zext(a, ty) => {
            let _ = write!(out, "zext {a} to {ty}");
        }
        Compute::Sext(a, ty) => {
            let _ = write!(out, "sext {a} to {ty}");
        }
        Compute::Cast(a, ty) => {
            let _ = write!(out, "cast {a} to {ty}");
        }
    }
}

fn emit_events(out: &mut String, es: &[EventExpr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(" or ");
        }
        match e.edge {
            Edge::Any => {}
            Edge::Pos => out.push_str("posedge "),
            Edge::Neg => out.push_str("negedge "),
        }
        let _ = write!(out, "{}", e.access);
    }
}

/// Declaration attributes with the port direction injected as a leading
/// `dir` pair.
fn decl_attrs(attrs: &AttrMap, dir: Option<Dir>) -> AttrMap {
    match dir {
        None => attrs.clone(),
        Some(d) => {
            let mut m = AttrMap::new();
            m.insert("dir", d.keyword());
            for (k, v) in attrs.iter() {
                if k != "dir" {
                    m.insert(k, v.clone());
                }
            }
            m
        }
    }
}

fn push_attrs(out: &mut String, attrs: &AttrMap, sep: &str) {
    if attrs.is_empty() {
        return;
    }
    out.push_str(sep);
    out.push_str("(* ");
    for (i, (k, v)) in attrs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&attr_pair(k, v));
    }
    out.push_str(" *)");
}

fn attr_pair(k: &str, v: &AttrValue) -> String {
    match v {
        AttrValue::Text(s) => format!("{k}=\"{}\"", escape_text(s)),
        AttrValue::Bits(b) => format!("{k}={b}"),
        AttrValue::Real(r) => format!("{k}={}", format_real(*r)),
    }
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Formats a real so it always re-parses as a real (keeps a decimal point).
pub(super) fn format_real(r: f64) -> String {
    if r.fract() == 0.0 && r.is_finite() && r.abs() < 1e15 {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::bitvec::{BinaryOp, LogicVec};

    fn lv(s: &str) -> LogicVec {
        LogicVec::parse_literal(s).unwrap()
    }

    /// Builds a small two-module design exercising every item kind.
    pub(crate) fn sample_design() -> Design {
        let mut d = Design::new("demo");
        let mut m = Module::new("accSqrDouble");
        m.attrs.set_loc("demo.v", 1);
        m.nets.push(NetDecl {
            id: "clk".into(),
            kind: NetKind::Wire,
            ty: Type::bv(1),
            dir: Some(Dir::Input),
            attrs: AttrMap::new(),
        });
        m.nets.push(NetDecl {
            id: "in".into(),
            kind: NetKind::Wire,
            ty: Type::bv(8),
            dir: Some(Dir::Input),
            attrs: AttrMap::new(),
        });
        m.nets.push(NetDecl {
            id: "sqr".into(),
            kind: NetKind::Wire,
            ty: Type::bv(8),
            dir: None,
            attrs: AttrMap::new(),
        });
        m.vars.push(VarDecl {
            id: "out".into(),
            ty: Type::bv(8),
            dir: Some(Dir::Output),
            attrs: AttrMap::new(),
        });
        m.vars.push(VarDecl {
            id: "acc".into(),
            ty: Type::bv(8),
            dir: None,
            attrs: AttrMap::new(),
        });
        m.consts.push(ConstDecl { id: "$c1".into(), value: lv("8'd0"), attrs: AttrMap::new() });
        m.insts.push(Inst { id: "i".into(), module: "doubler".into(), attrs: AttrMap::new() });
        let mut p = Proc::default();
        p.attrs.insert("origin", "always");
        p.attrs.set_loc("demo.v", 4);
        p.body.push(Statement::new(Stmt::Label("$L1".into())));
        p.body.push(Statement::new(Stmt::Guard(Guard::Event(vec![EventExpr {
            edge: Edge::Pos,
            access: Access::local("clk"),
        }]))));
        p.body.push(
            Statement::new(Stmt::Assign(Assign {
                op: AssignOp::NonBlocking,
                lhs: Access::local("acc"),
                rhs: Rvalue::Compute(Compute::Binary(BinaryOp::Add, "acc".into(), "in".into())),
            }))
            .with_loc("demo.v", 5),
        );
        p.body.push(Statement::new(Stmt::Goto("$L1".into())));
        m.procs.push(p);
        d.modules.push(m);

        let mut ext = Module::new("doubler");
        ext.attrs.insert("external", "true");
        ext.nets.push(NetDecl {
            id: "$t1".into(),
            kind: NetKind::Wire,
            ty: Type::bv(8),
            dir: Some(Dir::Input),
            attrs: AttrMap::new(),
        });
        ext.nets.push(NetDecl {
            id: "$t2".into(),
            kind: NetKind::Wire,
            ty: Type::bv(8),
            dir: Some(Dir::Output),
            attrs: AttrMap::new(),
        });
        d.modules.push(ext);
        d
    }

    #[test]
    fn golden_emission() {
        let got = emit_text(&sample_design());
        let want = "\
(* name=\"demo\" *)

module accSqrDouble (* loc=\"demo.v:1\" *) {
  port wire clk : bv<1>; (* dir=\"input\" *)
  port wire in : bv<8>; (* dir=\"input\" *)
  wire sqr : bv<8>;
  port var out : bv<8>; (* dir=\"output\" *)
  var acc : bv<8>;
  const $c1 = 8'b00000000;
  inst i : doubler;

  proc (* origin=\"always\", loc=\"demo.v:4\" *) {
    $L1:
    @(posedge clk);
    acc <= add acc in; (* loc=\"demo.v:5\" *)
    goto $L1;
  }
}

module doubler (* external=\"true\" *) {
  port wire $t1 : bv<8>; (* dir=\"input\" *)
  port wire $t2 : bv<8>; (* dir=\"output\" *)
}
";
        assert_eq!(got, want);
    }

    #[test]
    fn determinism() {
        let d = sample_design();
        assert_eq!(emit_text(&d), emit_text(&d));
    }

    #[test]
    fn real_formatting_keeps_decimal_point() {
        assert_eq!(format_real(3.0), "3.0");
        assert_eq!(format_real(3.25), "3.25");
        assert_eq!(format_real(-1.0), "-1.0");
    }
}
