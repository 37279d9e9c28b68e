//! Recursive-descent parser for the supported Verilog subset.

use crate::ir::{CaseKind, Dir, NetKind};

use super::ast::*;
use super::lex::{Tok, Token};
use super::FrontendError;

/// Constructs that exist in Verilog but are outside the supported subset;
/// naming them yields a clear rejection instead of a confusing parse error.
const UNSUPPORTED_ITEMS: [&str; 16] = [
    "function", "task", "generate", "genvar", "for", "while", "repeat", "forever", "wait",
    "fork", "defparam", "specify", "real", "integer", "time", "inout",
];

/// Words that never act as user identifiers in the subset.
const RESERVED: [&str; 34] = [
    "module", "endmodule", "input", "output", "inout", "wire", "wand", "wor", "uwire", "tri",
    "tri0", "tri1", "triand", "trior", "supply0", "supply1", "reg", "parameter", "localparam",
    "assign", "always", "initial", "begin", "end", "if", "else", "case", "casex", "casez",
    "endcase", "default", "posedge", "negedge", "signed",
];

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Parser {
        Parser { toks, at: 0 }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at.min(self.toks.len() - 1)].clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn pos(&self) -> Pos {
        let t = self.peek();
        Pos { file: t.file.clone(), line: t.line }
    }

    fn err_at(&self, t: &Token, msg: impl Into<String>) -> FrontendError {
        FrontendError::Syntax {
            file: t.file.to_string(),
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> FrontendError {
        self.err_at(self.peek(), msg)
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, FrontendError> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.err(format!("expected `{p}`, found {}", self.peek().describe())))
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos), FrontendError> {
        let pos = self.pos();
        match &self.peek().tok {
            Tok::Id(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok((s, pos))
            }
            Tok::Id(s) => Err(self.err(format!("`{s}` is a keyword, not an identifier"))),
            _ => Err(self.err(format!("expected an identifier, found {}", self.peek().describe()))),
        }
    }

    /// Skips a Verilog `(* ... *)` attribute instance, which the subset
    /// accepts and ignores.
    fn skip_attributes(&mut self) -> Result<(), FrontendError> {
        while self.peek().is_punct("(") && self.peek2().is_punct("*") {
            let open = self.bump();
            self.bump();
            loop {
                match &self.peek().tok {
                    Tok::Punct("*") if self.peek2().is_punct(")") => {
                        self.bump();
                        self.bump();
                        break;
                    }
                    Tok::Eof => return Err(self.err_at(&open, "unterminated `(*` attribute")),
                    _ => {
                        self.bump();
                    }
                }
            }
        }
        Ok(())
    }

    // ---- modules ----

    pub fn parse_design(&mut self) -> Result<Vec<ModuleAst>, FrontendError> {
        let mut modules = Vec::new();
        loop {
            self.skip_attributes()?;
            match &self.peek().tok {
                Tok::Eof => return Ok(modules),
                Tok::Id(s) if s == "module" || s == "macromodule" => {
                    modules.push(self.parse_module()?);
                }
                Tok::Id(s) if s == "primitive" => {
                    return Err(self.err("user-defined primitives are not supported"))
                }
                _ => {
                    return Err(self.err(format!(
                        "expected `module`, found {}",
                        self.peek().describe()
                    )))
                }
            }
        }
    }

    fn parse_module(&mut self) -> Result<ModuleAst, FrontendError> {
        let pos = self.pos();
        self.bump();
        let (name, _) = self.expect_ident()?;
        let mut items: Vec<Item> = Vec::new();
        let mut port_order: Vec<String> = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            self.parse_header_params(&mut items)?;
            self.expect_punct(")")?;
        }
        if self.eat_punct("(") {
            if !self.peek().is_punct(")") {
                self.parse_port_list(&mut items, &mut port_order)?;
            }
            self.expect_punct(")")?;
        }
        self.expect_punct(";")?;
        loop {
            self.skip_attributes()?;
            if self.peek().is_kw("endmodule") {
                self.bump();
                break;
            }
            if matches!(self.peek().tok, Tok::Eof) {
                return Err(self.err(format!("missing `endmodule` for module `{name}`")));
            }
            self.parse_item(&mut items)?;
        }
        Ok(ModuleAst { name, pos, port_order, items })
    }

    /// `#(parameter W = 8, D = 4, parameter X = 1)` in a module header.
    fn parse_header_params(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        loop {
            if self.peek().is_kw("parameter") {
                self.bump();
            }
            self.skip_decl_shape()?;
            let (pname, ppos) = self.expect_ident()?;
            self.expect_punct("=")?;
            let value = self.parse_expr()?;
            items.push(Item::Param(ParamAst { name: pname, pos: ppos, value, local: false }));
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    /// Optional `signed` and `[msb:lsb]` on a parameter header, which the
    /// subset accepts and folds into the evaluated value.
    fn skip_decl_shape(&mut self) -> Result<(), FrontendError> {
        if self.peek().is_kw("signed") {
            self.bump();
        }
        if self.peek().is_punct("[") {
            self.bump();
            self.parse_expr()?;
            self.expect_punct(":")?;
            self.parse_expr()?;
            self.expect_punct("]")?;
        }
        Ok(())
    }

    /// Header port list: either plain names (declarations follow in the
    /// body) or ANSI declarations.
    fn parse_port_list(
        &mut self,
        items: &mut Vec<Item>,
        port_order: &mut Vec<String>,
    ) -> Result<(), FrontendError> {
        // ANSI style starts with a direction keyword.
        let ansi = matches!(&self.peek().tok, Tok::Id(s) if s == "input" || s == "output" || s == "inout");
        if !ansi {
            loop {
                let (name, _) = self.expect_ident()?;
                port_order.push(name);
                if !self.eat_punct(",") {
                    return Ok(());
                }
            }
        }
        // ANSI: direction/type prefixes carry over commas until replaced.
        let mut dir: Option<Dir> = None;
        let mut kind: Option<DeclKind> = None;
        let mut signed = false;
        let mut range: Option<(Expr, Expr)> = None;
        loop {
            self.skip_attributes()?;
            let mut fresh = false;
            if let Tok::Id(s) = &self.peek().tok {
                if s == "inout" {
                    return Err(self.err("`inout` ports are not supported"));
                }
                if s == "input" || s == "output" {
                    dir = Some(if s == "input" { Dir::Input } else { Dir::Output });
                    kind = None;
                    signed = false;
                    range = None;
                    fresh = true;
                    self.bump();
                }
            }
            if fresh {
                if let Tok::Id(s) = &self.peek().tok {
                    if let Some(nk) = NetKind::from_keyword(s) {
                        kind = Some(DeclKind::Net(nk));
                        self.bump();
                    } else if s == "reg" {
                        kind = Some(DeclKind::Reg);
                        self.bump();
                    }
                }
                if self.peek().is_kw("signed") {
                    self.bump();
                    signed = true;
                }
                if self.peek().is_punct("[") {
                    self.bump();
                    let msb = self.parse_expr()?;
                    self.expect_punct(":")?;
                    let lsb = self.parse_expr()?;
                    self.expect_punct("]")?;
                    range = Some((msb, lsb));
                }
            }
            let (name, pos) = self.expect_ident()?;
            let d = dir.ok_or_else(|| {
                self.err_at(
                    &self.toks[self.at - 1],
                    "ANSI port lists must not mix with plain port names",
                )
            })?;
            port_order.push(name.clone());
            items.push(Item::Decl(DeclAst {
                name,
                pos,
                dir: Some(d),
                kind,
                signed,
                range: range.clone(),
                array: None,
                init: None,
            }));
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    // ---- items ----

    fn parse_item(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        let t = self.peek().clone();
        let word = match &t.tok {
            Tok::Id(s) => s.as_str(),
            _ => {
                return Err(self.err(format!(
                    "expected a module item, found {}",
                    t.describe()
                )))
            }
        };
        if UNSUPPORTED_ITEMS.contains(&word) {
            return Err(self.err(format!("unsupported construct `{word}`")));
        }
        match word {
            "input" | "output" => self.parse_decl_line(items),
            "reg" => self.parse_decl_line(items),
            _ if NetKind::from_keyword(word).is_some() => self.parse_decl_line(items),
            "parameter" | "localparam" => self.parse_param_line(items, word == "localparam"),
            "assign" => self.parse_assign_line(items),
            "always" => {
                let pos = self.pos();
                self.bump();
                let body = self.parse_stmt()?;
                items.push(Item::Always(AlwaysAst { pos, body }));
                Ok(())
            }
            "initial" => {
                let pos = self.pos();
                self.bump();
                let body = self.parse_stmt()?;
                items.push(Item::Initial(InitialAst { pos, body }));
                Ok(())
            }
            _ if GateKind::from_keyword(word).is_some() => self.parse_gate_line(items),
            _ if RESERVED.contains(&word) => {
                Err(self.err(format!("unexpected `{word}` at module level")))
            }
            _ => self.parse_instance_line(items),
        }
    }

    /// input/output/wire/reg declaration line covering several names.
    fn parse_decl_line(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        let mut dir: Option<Dir> = None;
        let mut kind: Option<DeclKind> = None;
        if let Tok::Id(s) = &self.peek().tok {
            if s == "input" || s == "output" {
                dir = Some(if s == "input" { Dir::Input } else { Dir::Output });
                self.bump();
            }
        }
        if let Tok::Id(s) = &self.peek().tok {
            if let Some(nk) = NetKind::from_keyword(s) {
                kind = Some(DeclKind::Net(nk));
                self.bump();
            } else if s == "reg" {
                kind = Some(DeclKind::Reg);
                self.bump();
            }
        }
        let mut signed = false;
        if self.peek().is_kw("signed") {
            self.bump();
            signed = true;
        }
        let mut range = None;
        if self.peek().is_punct("[") {
            self.bump();
            let msb = self.parse_expr()?;
            self.expect_punct(":")?;
            let lsb = self.parse_expr()?;
            self.expect_punct("]")?;
            range = Some((msb, lsb));
        }
        loop {
            let (name, pos) = self.expect_ident()?;
            let mut array = None;
            if self.peek().is_punct("[") {
                self.bump();
                let lo = self.parse_expr()?;
                self.expect_punct(":")?;
                let hi = self.parse_expr()?;
                self.expect_punct("]")?;
                array = Some((lo, hi));
            }
            let mut init = None;
            if self.peek().is_punct("=") {
                if kind == Some(DeclKind::Reg) {
                    return Err(self.err("variable initializers are not supported"));
                }
                self.bump();
                init = Some(self.parse_expr()?);
            }
            items.push(Item::Decl(DeclAst {
                name,
                pos,
                dir,
                kind,
                signed,
                range: range.clone(),
                array,
                init,
            }));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn parse_param_line(
        &mut self,
        items: &mut Vec<Item>,
        local: bool,
    ) -> Result<(), FrontendError> {
        self.bump();
        self.skip_decl_shape()?;
        loop {
            let (name, pos) = self.expect_ident()?;
            self.expect_punct("=")?;
            let value = self.parse_expr()?;
            items.push(Item::Param(ParamAst { name, pos, value, local }));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn parse_assign_line(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        self.bump();
        if self.peek().is_punct("#") {
            return Err(self.err("delayed continuous assignments are not supported"));
        }
        loop {
            let pos = self.pos();
            let lhs = self.parse_expr()?;
            self.expect_punct("=")?;
            let rhs = self.parse_expr()?;
            items.push(Item::Assign(AssignAst { pos, lhs, rhs }));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn parse_gate_line(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        let kw = self.bump();
        let kind = GateKind::from_keyword(kw.id().unwrap()).unwrap();
        loop {
            let pos = self.pos();
            // Optional instance name (ignored; gates lower to assigns).
            if self.peek().id().is_some() && !RESERVED.contains(&self.peek().id().unwrap()) {
                self.bump();
            }
            self.expect_punct("(")?;
            let mut terms = Vec::new();
            loop {
                terms.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
            if terms.len() < 2 {
                return Err(self.err_at(&kw, "gate needs at least two terminals"));
            }
            items.push(Item::Gate(GateAst { pos, kind, terms }));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn parse_instance_line(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        let (module, _) = self.expect_ident()?;
        let mut params: Vec<(Option<String>, Expr)> = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            if !self.peek().is_punct(")") {
                loop {
                    if self.peek().is_punct(".") {
                        self.bump();
                        let (pname, _) = self.expect_ident()?;
                        self.expect_punct("(")?;
                        let v = self.parse_expr()?;
                        self.expect_punct(")")?;
                        params.push((Some(pname), v));
                    } else {
                        params.push((None, self.parse_expr()?));
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        loop {
            let (name, pos) = self.expect_ident()?;
            self.expect_punct("(")?;
            let conns = self.parse_connections()?;
            self.expect_punct(")")?;
            items.push(Item::Instance(InstanceAst {
                pos,
                module: module.clone(),
                name,
                params: params.clone(),
                conns,
            }));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn parse_connections(&mut self) -> Result<Vec<Connection>, FrontendError> {
        let mut conns = Vec::new();
        if self.peek().is_punct(")") {
            return Ok(conns);
        }
        let named = self.peek().is_punct(".");
        loop {
            let pos = self.pos();
            if named {
                self.expect_punct(".")?;
                let (pname, _) = self.expect_ident()?;
                self.expect_punct("(")?;
                let expr = if self.peek().is_punct(")") {
                    None
                } else {
                    Some(self.parse_expr()?)
                };
                self.expect_punct(")")?;
                conns.push(Connection { name: Some(pname), expr, pos });
            } else {
                if self.peek().is_punct(".") {
                    return Err(self.err("cannot mix positional and named connections"));
                }
                let expr = if self.peek().is_punct(",") || self.peek().is_punct(")") {
                    None
                } else {
                    Some(self.parse_expr()?)
                };
                conns.push(Connection { name: None, expr, pos });
            }
            if !self.eat_punct(",") {
                return Ok(conns);
            }
        }
    }

    // ---- statements ----

    fn parse_stmt(&mut self) -> Result<Stmt, FrontendError> {
        self.skip_attributes()?;
        let t = self.peek().clone();
        match &t.tok {
            Tok::Punct(";") => {
                self.bump();
                Ok(Stmt::Empty)
            }
            Tok::Punct("@") => {
                let pos = self.pos();
                self.bump();
                let control = self.parse_event_control()?;
                let body = self.parse_timed_body()?;
                Ok(Stmt::Timed { pos, control, body })
            }
            Tok::Punct("#") => {
                let pos = self.pos();
                self.bump();
                let e = if self.eat_punct("(") {
                    let e = self.parse_expr()?;
                    self.expect_punct(")")?;
                    e
                } else {
                    self.parse_primary()?
                };
                let body = self.parse_timed_body()?;
                Ok(Stmt::Timed { pos, control: TimingAst::Delay(e), body })
            }
            Tok::SysId(name) => {
                let pos = self.pos();
                let name = name.clone();
                self.bump();
                let mut args = Vec::new();
                if self.eat_punct("(") {
                    if !self.peek().is_punct(")") {
                        loop {
                            args.push(self.parse_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                }
                self.expect_punct(";")?;
                Ok(Stmt::Syscall { pos, name, args })
            }
            Tok::Id(s) => match s.as_str() {
                "begin" => {
                    self.bump();
                    // An optional block label `begin : name` is accepted and
                    // ignored.
                    if self.eat_punct(":") {
                        self.expect_ident()?;
                    }
                    let mut stmts = Vec::new();
                    while !self.peek().is_kw("end") {
                        if matches!(self.peek().tok, Tok::Eof) {
                            return Err(self.err_at(&t, "unterminated `begin` block"));
                        }
                        stmts.push(self.parse_stmt()?);
                    }
                    self.bump();
                    Ok(Stmt::Block(stmts))
                }
                "if" => {
                    let pos = self.pos();
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.parse_expr()?;
                    self.expect_punct(")")?;
                    let then_s = Box::new(self.parse_stmt()?);
                    let else_s = if self.peek().is_kw("else") {
                        self.bump();
                        Some(Box::new(self.parse_stmt()?))
                    } else {
                        None
                    };
                    Ok(Stmt::If { pos, cond, then_s, else_s })
                }
                "case" | "casex" | "casez" => self.parse_case(),
                kw if UNSUPPORTED_ITEMS.contains(&kw) => {
                    Err(self.err(format!("unsupported construct `{kw}`")))
                }
                kw if RESERVED.contains(&kw) => {
                    Err(self.err(format!("unexpected `{kw}` in a statement")))
                }
                _ => self.parse_assign_stmt(),
            },
            Tok::Punct("{") => self.parse_assign_stmt(),
            _ => Err(self.err(format!("expected a statement, found {}", t.describe()))),
        }
    }

    /// The statement governed by a timing control, if any (`@(clk);` has
    /// none).
    fn parse_timed_body(&mut self) -> Result<Option<Box<Stmt>>, FrontendError> {
        if self.eat_punct(";") {
            Ok(None)
        } else {
            Ok(Some(Box::new(self.parse_stmt()?)))
        }
    }

    fn parse_event_control(&mut self) -> Result<TimingAst, FrontendError> {
        if self.eat_punct("*") {
            return Ok(TimingAst::Star);
        }
        self.expect_punct("(")?;
        if self.eat_punct("*") {
            self.expect_punct(")")?;
            return Ok(TimingAst::Star);
        }
        let mut events = Vec::new();
        loop {
            let edge = if self.peek().is_kw("posedge") {
                self.bump();
                EdgeAst::Pos
            } else if self.peek().is_kw("negedge") {
                self.bump();
                EdgeAst::Neg
            } else {
                EdgeAst::Any
            };
            let expr = self.parse_expr()?;
            events.push(EventAst { edge, expr });
            if self.peek().is_kw("or") {
                self.bump();
                continue;
            }
            if self.eat_punct(",") {
                continue;
            }
            break;
        }
        self.expect_punct(")")?;
        Ok(TimingAst::Events(events))
    }

    fn parse_case(&mut self) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        let kw = self.bump();
        let kind = match kw.id().unwrap() {
            "case" => CaseKind::Case,
            "casex" => CaseKind::Casex,
            _ => CaseKind::Casez,
        };
        self.expect_punct("(")?;
        let subject = self.parse_expr()?;
        self.expect_punct(")")?;
        let mut arms = Vec::new();
        let mut default = None;
        loop {
            if self.peek().is_kw("endcase") {
                self.bump();
                return Ok(Stmt::Case { pos, kind, subject, arms, default });
            }
            if matches!(self.peek().tok, Tok::Eof) {
                return Err(self.err_at(&kw, "unterminated case statement"));
            }
            if self.peek().is_kw("default") {
                self.bump();
                self.eat_punct(":");
                if default.is_some() {
                    return Err(self.err("duplicate `default` arm"));
                }
                default = Some(Box::new(self.parse_stmt()?));
                continue;
            }
            let mut pats = vec![self.parse_expr()?];
            while self.eat_punct(",") {
                pats.push(self.parse_expr()?);
            }
            self.expect_punct(":")?;
            let body = self.parse_stmt()?;
            arms.push((pats, body));
        }
    }

    fn parse_assign_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        let lhs = if self.peek().is_punct("{") {
            self.parse_primary()?
        } else {
            self.parse_access()?
        };
        let blocking = if self.eat_punct("=") {
            true
        } else if self.eat_punct("<=") {
            false
        } else {
            return Err(self.err(format!(
                "expected `=` or `<=`, found {}",
                self.peek().describe()
            )));
        };
        // Intra-assignment timing controls carry no time semantics in the
        // subset and are rejected for clarity.
        if self.peek().is_punct("#") || self.peek().is_punct("@") {
            return Err(self.err("intra-assignment timing controls are not supported"));
        }
        let rhs = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Assign { pos, blocking, lhs, rhs })
    }

    // ---- expressions ----

    pub fn parse_expr(&mut self) -> Result<Expr, FrontendError> {
        self.parse_ternary()
    }

    fn parse_ternary(&mut self) -> Result<Expr, FrontendError> {
        let cond = self.parse_binary(0)?;
        if self.eat_punct("?") {
            let pos = cond.pos().clone();
            let t = self.parse_ternary()?;
            self.expect_punct(":")?;
            let e = self.parse_ternary()?;
            Ok(Expr::Ternary(Box::new(cond), Box::new(t), Box::new(e), pos))
        } else {
            Ok(cond)
        }
    }

    /// Binary operators by precedence level, lowest first.
    fn binop_at(level: usize, p: &str) -> Option<VBinary> {
        let op = match (level, p) {
            (0, "||") => VBinary::LogicOr,
            (1, "&&") => VBinary::LogicAnd,
            (2, "|") => VBinary::Or,
            (3, "^") => VBinary::Xor,
            (3, "~^") | (3, "^~") => VBinary::Xnor,
            (4, "&") => VBinary::And,
            (5, "==") => VBinary::Eq,
            (5, "!=") => VBinary::Neq,
            (5, "===") => VBinary::CaseEq,
            (5, "!==") => VBinary::CaseNeq,
            (6, "<") => VBinary::Lt,
            (6, ">") => VBinary::Gt,
            (6, "<=") => VBinary::Le,
            (6, ">=") => VBinary::Ge,
            (7, "<<") => VBinary::Shl,
            (7, ">>") => VBinary::Shr,
            (7, "<<<") => VBinary::Ashl,
            (7, ">>>") => VBinary::Ashr,
            (8, "+") => VBinary::Add,
            (8, "-") => VBinary::Sub,
            (9, "*") => VBinary::Mul,
            (9, "/") => VBinary::Div,
            (9, "%") => VBinary::Mod,
            (10, "**") => VBinary::Pow,
            _ => return None,
        };
        Some(op)
    }

    fn parse_binary(&mut self, level: usize) -> Result<Expr, FrontendError> {
        if level > 10 {
            return self.parse_unary();
        }
        let mut lhs = self.parse_binary(level + 1)?;
        loop {
            let op = match &self.peek().tok {
                Tok::Punct(p) => match Self::binop_at(level, p) {
                    Some(op) => op,
                    None => return Ok(lhs),
                },
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.parse_binary(level + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        let op = match &self.peek().tok {
            Tok::Punct("+") => Some(VUnary::Plus),
            Tok::Punct("-") => Some(VUnary::Minus),
            Tok::Punct("~") => Some(VUnary::Not),
            Tok::Punct("!") => Some(VUnary::LogicNot),
            Tok::Punct("&") => Some(VUnary::RedAnd),
            Tok::Punct("|") => Some(VUnary::RedOr),
            Tok::Punct("^") => Some(VUnary::RedXor),
            Tok::Punct("~&") => Some(VUnary::RedNand),
            Tok::Punct("~|") => Some(VUnary::RedNor),
            Tok::Punct("~^") | Tok::Punct("^~") => Some(VUnary::RedXnor),
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                let e = self.parse_unary()?;
                Ok(Expr::Unary(op, Box::new(e), pos))
            }
            None => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        let t = self.peek().clone();
        match &t.tok {
            Tok::Sized(v) => {
                self.bump();
                Ok(self.parse_selects(Expr::Sized(v.clone(), pos))?)
            }
            Tok::Unsized(v) => {
                self.bump();
                Ok(Expr::Unsized(*v, pos))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::Real(*r, pos))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s.clone(), pos))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_punct(")")?;
                self.parse_selects(e)
            }
            Tok::Punct("{") => {
                self.bump();
                let first = self.parse_expr()?;
                if self.peek().is_punct("{") {
                    // Replication `{n{a, b}}`.
                    self.bump();
                    let mut parts = vec![self.parse_expr()?];
                    while self.eat_punct(",") {
                        parts.push(self.parse_expr()?);
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    return Ok(Expr::Repl(Box::new(first), parts, pos));
                }
                let mut parts = vec![first];
                while self.eat_punct(",") {
                    parts.push(self.parse_expr()?);
                }
                self.expect_punct("}")?;
                Ok(Expr::Concat(parts, pos))
            }
            Tok::Id(_) => self.parse_access(),
            _ => Err(self.err(format!("expected an expression, found {}", t.describe()))),
        }
    }

    /// An identifier with optional select suffixes.
    fn parse_access(&mut self) -> Result<Expr, FrontendError> {
        let (name, pos) = self.expect_ident()?;
        if self.peek().is_punct(".") {
            return Err(self.err("hierarchical references are not supported in expressions"));
        }
        self.parse_selects(Expr::Ident(name, pos))
    }

    /// Parses `[i]`, `[m:n]`, `[s+:w]`, `[s-:w]` suffixes.
    fn parse_selects(&mut self, mut base: Expr) -> Result<Expr, FrontendError> {
        while self.peek().is_punct("[") {
            let pos = self.pos();
            self.bump();
            let first = self.parse_expr()?;
            if self.eat_punct(":") {
                let lsb = self.parse_expr()?;
                self.expect_punct("]")?;
                base = Expr::Range(Box::new(base), Box::new(first), Box::new(lsb), pos);
            } else if self.eat_punct("+:") {
                let w = self.parse_expr()?;
                self.expect_punct("]")?;
                base = Expr::IndexedRange {
                    base: Box::new(base),
                    start: Box::new(first),
                    width: Box::new(w),
                    up: true,
                    pos,
                };
            } else if self.eat_punct("-:") {
                let w = self.parse_expr()?;
                self.expect_punct("]")?;
                base = Expr::IndexedRange {
                    base: Box::new(base),
                    start: Box::new(first),
                    width: Box::new(w),
                    up: false,
                    pos,
                };
            } else {
                self.expect_punct("]")?;
                base = Expr::Index(Box::new(base), Box::new(first), pos);
            }
        }
        Ok(base)
    }
}

/// Parses token stream into module declarations.
pub(crate) fn parse_tokens(toks: Vec<Token>) -> Result<Vec<ModuleAst>, FrontendError> {
    Parser::new(toks).parse_design()
}

#[cfg(test)]
mod tests {
    use super::super::lex::lex;
    use super::super::preprocess::preprocess;
    use super::*;

    fn parse(text: &str) -> Result<Vec<ModuleAst>, FrontendError> {
        let lines = preprocess(
            &[("t.v".to_string(), text.to_string())],
            &|_: &str, _: &str| Err("no includes".to_string()),
        )
        .unwrap();
        parse_tokens(lex(&lines).unwrap())
    }

    #[test]
    fn empty_module() {
        let ms = parse("module m;\nendmodule\n").unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].name, "m");
        assert!(ms[0].items.is_empty());
    }

    #[test]
    fn ansi_ports_carry_shape_over_commas() {
        let ms = parse(
            "module m(input wire clk, input [7:0] a, b, output reg [7:0] q);\nendmodule\n",
        )
        .unwrap();
        assert_eq!(ms[0].port_order, ["clk", "a", "b", "q"]);
        let decls: Vec<&DeclAst> = ms[0]
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Decl(d) => Some(d),
                _ => None,
            })
            .collect();
        assert_eq!(decls.len(), 4);
        assert_eq!(decls[1].dir, Some(Dir::Input));
        assert!(decls[1].range.is_some());
        assert!(decls[2].range.is_some(), "range carries to `b`");
        assert_eq!(decls[3].kind, Some(DeclKind::Reg));
        assert_eq!(decls[3].dir, Some(Dir::Output));
    }

    #[test]
    fn always_if_else_and_case_parse() {
        let ms = parse(
            "module m(input clk);\nreg [1:0] s;\nalways @(posedge clk) begin\n  if (s == 2'b00) s <= 2'b01; else s <= 2'b00;\n  case (s)\n    2'b00: s <= 2'b01;\n    default: s <= 2'b00;\n  endcase\nend\nendmodule\n",
        )
        .unwrap();
        let always = ms[0]
            .items
            .iter()
            .find_map(|i| match i {
                Item::Always(a) => Some(a),
                _ => None,
            })
            .unwrap();
        match &always.body {
            Stmt::Timed { control: TimingAst::Events(evs), body: Some(b), .. } => {
                assert_eq!(evs.len(), 1);
                assert_eq!(evs[0].edge, EdgeAst::Pos);
                assert!(matches!(**b, Stmt::Block(ref ss) if ss.len() == 2));
            }
            other => panic!("unexpected body {other:?}"),
        }
    }

    #[test]
    fn instance_with_named_conns_and_params() {
        let ms = parse(
            "module m;\nwire a, b;\nctr #(.N(4)) u0 (.clk(a), .q(b), .en());\nendmodule\n",
        )
        .unwrap();
        let inst = ms[0]
            .items
            .iter()
            .find_map(|i| match i {
                Item::Instance(x) => Some(x),
                _ => None,
            })
            .unwrap();
        assert_eq!(inst.module, "ctr");
        assert_eq!(inst.name, "u0");
        assert_eq!(inst.params.len(), 1);
        assert_eq!(inst.conns.len(), 3);
        assert_eq!(inst.conns[2].name.as_deref(), Some("en"));
        assert!(inst.conns[2].expr.is_none());
    }

    #[test]
    fn unsupported_constructs_named() {
        for (src, what) in [
            ("module m;\nfunction f; endfunction\nendmodule\n", "function"),
            ("module m;\ngenerate endgenerate\nendmodule\n", "generate"),
            ("module m(inout w);\nendmodule\n", "inout"),
            ("module m;\nalways begin : x for (;;) ; end\nendmodule\n", "for"),
        ] {
            let err = parse(src).unwrap_err();
            assert!(err.to_string().contains(what), "{src}: {err}");
        }
    }

    #[test]
    fn nonblocking_vs_relational_disambiguates() {
        let ms = parse(
            "module m(input clk, input [3:0] a, b);\nreg r;\nalways @(posedge clk) r <= a <= b;\nendmodule\n",
        )
        .unwrap();
        let always = ms[0]
            .items
            .iter()
            .find_map(|i| match i {
                Item::Always(a) => Some(a),
                _ => None,
            })
            .unwrap();
        match &always.body {
            Stmt::Timed { body: Some(b), .. } => match &**b {
                Stmt::Assign { blocking: false, rhs, .. } => {
                    assert!(matches!(rhs, Expr::Binary(VBinary::Le, ..)));
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn attributes_are_skipped() {
        let ms = parse(
            "(* keep *) module m;\n(* full_case, parallel_case *) reg r;\nendmodule\n",
        )
        .unwrap();
        assert_eq!(ms[0].items.len(), 1);
    }
}
