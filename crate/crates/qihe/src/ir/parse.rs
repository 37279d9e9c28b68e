//! Text-form parser: a hand-rolled lexer and recursive-descent parser.
//!
//! The parser is whitespace-insensitive and accepts module items in any
//! order; emission canonicalizes layout and section order. `//` comments
//! are skipped. Keyword-lookalike identifiers (a signal named `pass`) are
//! disambiguated by statement-shape lookahead.

use crate::bitvec::{BinaryOp, LogicVec, UnaryOp};

use super::types::*;
use super::validate::validate;

/// Parses `.qh` text into a design and checks structural invariants.
pub fn parse_text(text: &str) -> Result<Design, IrError> {
    parse_text_named("<input>", text)
}

/// As [`parse_text`], with a source name used in error messages.
pub fn parse_text_named(name: &str, text: &str) -> Result<Design, IrError> {
    let tokens = lex(name, text)?;
    let mut p = Parser { file: name.to_string(), tokens, pos: 0 };
    let d = p.design()?;
    let problems = validate(&d);
    if let Some(first) = problems.into_iter().next() {
        return Err(IrError::Invalid(first));
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    /// Sized bit-vector literal, e.g. `4'b10x0`.
    Lit(LogicVec),
    /// Bare unsigned integer.
    Int(u64),
    Real(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAttr,
    RAttr,
    Lt,
    Gt,
    Colon,
    Semi,
    Comma,
    Dot,
    Question,
    Hash,
    At,
    Plus,
    Minus,
    Eq,
    NonBlocking,
    Continuous,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Id(s) => format!("`{s}`"),
            Tok::Lit(v) => format!("literal `{v}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Real(r) => format!("real `{r}`"),
            Tok::Str(_) => "string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LAttr => "`(*`".into(),
            Tok::RAttr => "`*)`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Question => "`?`".into(),
            Tok::Hash => "`#`".into(),
            Tok::At => "`@`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eq => "`=`".into(),
            Tok::NonBlocking => "`<=`".into(),
            Tok::Continuous => "`<-`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn syntax(file: &str, line: u32, col: u32, msg: impl Into<String>) -> IrError {
    IrError::Syntax { file: file.to_string(), line, col, msg: msg.into() }
}

struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.i + 1).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.i += 1;
        c
    }

    fn err(&self, line: u32, col: u32, msg: impl Into<String>) -> IrError {
        syntax(self.file, line, col, msg)
    }

    /// Lexes a number starting at a digit: a sized literal (`8'hff`), a
    /// real (`3.25`), or a bare integer.
    fn number(&mut self, negative: bool) -> Result<Tok, IrError> {
        let (line, col) = (self.line, self.col);
        let mut head = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '_' {
                head.push(self.bump());
            } else {
                break;
            }
        }
        match self.peek() {
            Some('\'') => {
                if negative {
                    return Err(self.err(line, col, "literal cannot be negative"));
                }
                let mut text = head;
                text.push(self.bump());
                if matches!(self.peek(), Some('s') | Some('S')) {
                    text.push(self.bump());
                }
                match self.peek() {
                    Some(b) if "bodhBODH".contains(b) => text.push(self.bump()),
                    _ => return Err(self.err(line, col, "expected literal base")),
                }
                let mut digits = 0;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '?' {
                        text.push(self.bump());
                        digits += 1;
                    } else {
                        break;
                    }
                }
                if digits == 0 {
                    return Err(self.err(line, col, "expected literal digits"));
                }
                let v = LogicVec::parse_literal(&text)
                    .map_err(|e| self.err(line, col, e.to_string()))?;
                Ok(Tok::Lit(v))
            }
            Some('.') if self.peek2().is_some_and(|c| c.is_ascii_digit()) => {
                let mut text = head;
                text.push(self.bump());
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() || c == '_' {
                        text.push(self.bump());
                    } else {
                        break;
                    }
                }
                let text = text.replace('_', "");
                let r: f64 = text
                    .parse()
                    .map_err(|_| self.err(line, col, format!("bad real `{text}`")))?;
                Ok(Tok::Real(if negative { -r } else { r }))
            }
            _ => {
                if negative {
                    return Err(self.err(line, col, "unexpected negative integer"));
                }
                let text = head.replace('_', "");
                let n: u64 = text
                    .parse()
                    .map_err(|_| self.err(line, col, format!("integer `{text}` too large")))?;
                Ok(Tok::Int(n))
            }
        }
    }
}

fn lex(file: &str, text: &str) -> Result<Vec<Spanned>, IrError> {
    let mut lx = Lexer { file, chars: text.chars().collect(), i: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = lx.peek() {
        let (line, col) = (lx.line, lx.col);
        if c.is_whitespace() {
            lx.bump();
            continue;
        }
        if c == '/' && lx.peek2() == Some('/') {
            while let Some(c) = lx.peek() {
                if c == '\n' {
                    break;
                }
                lx.bump();
            }
            continue;
        }
        let tok = match c {
            '{' => {
                lx.bump();
                Tok::LBrace
            }
            '}' => {
                lx.bump();
                Tok::RBrace
            }
            '(' => {
                lx.bump();
                if lx.peek() == Some('*') {
                    lx.bump();
                    Tok::LAttr
                } else {
                    Tok::LParen
                }
            }
            ')' => {
                lx.bump();
                Tok::RParen
            }
            '*' => {
                lx.bump();
                if lx.peek() == Some(')') {
                    lx.bump();
                    Tok::RAttr
                } else {
                    return Err(lx.err(line, col, "unexpected `*`"));
                }
            }
            '[' => {
                lx.bump();
                Tok::LBracket
            }
            ']' => {
                lx.bump();
                Tok::RBracket
            }
            '<' => {
                lx.bump();
                match lx.peek() {
                    Some('=') => {
                        lx.bump();
                        Tok::NonBlocking
                    }
                    Some('-') => {
                        lx.bump();
                        Tok::Continuous
                    }
                    _ => Tok::Lt,
                }
            }
            '>' => {
                lx.bump();
                Tok::Gt
            }
            ':' => {
                lx.bump();
                Tok::Colon
            }
            ';' => {
                lx.bump();
                Tok::Semi
            }
            ',' => {
                lx.bump();
                Tok::Comma
            }
            '.' => {
                lx.bump();
                Tok::Dot
            }
            '?' => {
                lx.bump();
                Tok::Question
            }
            '#' => {
                lx.bump();
                Tok::Hash
            }
            '@' => {
                lx.bump();
                Tok::At
            }
            '+' => {
                lx.bump();
                Tok::Plus
            }
            '=' => {
                lx.bump();
                Tok::Eq
            }
            '-' => {
                lx.bump();
                match lx.peek() {
                    Some('>') => {
                        lx.bump();
                        Tok::Arrow
                    }
                    Some(d) if d.is_ascii_digit() => lx.number(true)?,
                    _ => Tok::Minus,
                }
            }
            '"' => {
                lx.bump();
                let mut s = String::new();
                loop {
                    match lx.peek() {
                        None => return Err(lx.err(line, col, "unterminated string")),
                        Some('"') => {
                            lx.bump();
                            break;
                        }
                        Some('\\') => {
                            lx.bump();
                            let esc = lx
                                .peek()
                                .ok_or_else(|| lx.err(line, col, "unterminated string"))?;
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                '"' => '"',
                                '\\' => '\\',
                                other => {
                                    return Err(lx.err(
                                        lx.line,
                                        lx.col,
                                        format!("bad escape `\\{other}`"),
                                    ))
                                }
                            });
                            lx.bump();
                        }
                        Some(_) => s.push(lx.bump()),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => lx.number(false)?,
            c if c.is_ascii_alphabetic() || c == '_' || c == '$' => {
                let mut s = String::new();
                while let Some(c) = lx.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                        s.push(lx.bump());
                    } else {
                        break;
                    }
                }
                Tok::Id(s)
            }
            other => return Err(lx.err(line, col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, line, col });
    }
    Ok(out)
}

struct Parser {
    file: String,
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|s| &s.tok)
    }

    fn is_id(&self, k: usize, want: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Id(s)) if s == want)
    }

    fn here(&self) -> (u32, u32) {
        match self.tokens.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => self
                .tokens
                .last()
                .map(|s| (s.line, s.col))
                .unwrap_or((1, 1)),
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> IrError {
        let (line, col) = self.here();
        syntax(&self.file, line, col, msg)
    }

    fn next(&mut self) -> Result<Spanned, IrError> {
        let s = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(s)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), IrError> {
        let got = self.next()?;
        if got.tok == t {
            Ok(())
        } else {
            Err(syntax(
                &self.file,
                got.line,
                got.col,
                format!("expected {}, found {}", t.describe(), got.tok.describe()),
            ))
        }
    }

    fn expect_id(&mut self, what: &str) -> Result<String, IrError> {
        let got = self.next()?;
        match got.tok {
            Tok::Id(s) => Ok(s),
            other => Err(syntax(
                &self.file,
                got.line,
                got.col,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), IrError> {
        let got = self.next()?;
        match got.tok {
            Tok::Id(ref s) if s == kw => Ok(()),
            other => Err(syntax(
                &self.file,
                got.line,
                got.col,
                format!("expected `{kw}`, found {}", other.describe()),
            )),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<usize, IrError> {
        let got = self.next()?;
        match got.tok {
            Tok::Int(n) => Ok(n as usize),
            other => Err(syntax(
                &self.file,
                got.line,
                got.col,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn design(&mut self) -> Result<Design, IrError> {
        let mut d = Design::default();
        if self.peek() == Some(&Tok::LAttr) {
            let mut attrs = self.attrs()?;
            if let Some(AttrValue::Text(name)) = attrs.remove("name") {
                d.name = name;
            }
            d.attrs = attrs;
        }
        while self.peek().is_some() {
            if self.is_id(0, "module") {
                d.modules.push(self.module()?);
            } else {
                return Err(self.err_here("expected `module`"));
            }
        }
        Ok(d)
    }

    fn attrs(&mut self) -> Result<AttrMap, IrError> {
        self.expect(Tok::LAttr)?;
        let mut m = AttrMap::new();
        loop {
            let key = self.expect_id("attribute key")?;
            self.expect(Tok::Eq)?;
            let got = self.next()?;
            let value = match got.tok {
                Tok::Str(s) => AttrValue::Text(s),
                Tok::Lit(v) => AttrValue::Bits(v),
                Tok::Real(r) => AttrValue::Real(r),
                other => {
                    return Err(syntax(
                        &self.file,
                        got.line,
                        got.col,
                        format!("expected attribute value, found {}", other.describe()),
                    ))
                }
            };
            m.insert(key, value);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RAttr)?;
        Ok(m)
    }

    fn opt_attrs(&mut self) -> Result<AttrMap, IrError> {
        if self.peek() == Some(&Tok::LAttr) {
            self.attrs()
        } else {
            Ok(AttrMap::new())
        }
    }

    fn ty(&mut self) -> Result<Type, IrError> {
        let base = match self.expect_id("type")?.as_str() {
            "real" => Type::Real,
            kw @ ("bv" | "sbv") => {
                self.expect(Tok::Lt)?;
                let width = self.expect_int("bit width")?;
                self.expect(Tok::Gt)?;
                Type::Bv { width, signed: kw == "sbv" }
            }
            other => return Err(self.err_here(format!("unknown type `{other}`"))),
        };
        if self.peek() == Some(&Tok::LBracket) && matches!(self.peek_at(1), Some(Tok::Int(_))) {
            self.expect(Tok::LBracket)?;
            let len = self.expect_int("array length")?;
            self.expect(Tok::RBracket)?;
            return Ok(Type::Array { elem: Box::new(base), len });
        }
        Ok(base)
    }

    fn module(&mut self) -> Result<Module, IrError> {
        self.expect_kw("module")?;
        let name = self.expect_id("module name")?;
        let mut m = Module::new(name);
        m.attrs = self.opt_attrs()?;
        self.expect(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            let port = if self.is_id(0, "port") {
                self.pos += 1;
                true
            } else {
                false
            };
            let head = match self.peek() {
                Some(Tok::Id(s)) => s.clone(),
                _ => return Err(self.err_here("expected module item")),
            };
            if let Some(kind) = NetKind::from_keyword(&head) {
                self.pos += 1;
                let id = self.expect_id("net name")?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Semi)?;
                let mut attrs = self.opt_attrs()?;
                let dir = self.take_dir(&mut attrs, port, &id)?;
                m.nets.push(NetDecl { id, kind, ty, dir, attrs });
                continue;
            }
            match head.as_str() {
                "var" => {
                    self.pos += 1;
                    let id = self.expect_id("var name")?;
                    self.expect(Tok::Colon)?;
                    let ty = self.ty()?;
                    self.expect(Tok::Semi)?;
                    let mut attrs = self.opt_attrs()?;
                    let dir = self.take_dir(&mut attrs, port, &id)?;
                    m.vars.push(VarDecl { id, ty, dir, attrs });
                }
                _ if port => {
                    return Err(self.err_here("`port` must prefix a net or var declaration"))
                }
                "const" => {
                    self.pos += 1;
                    let id = self.expect_id("const name")?;
                    self.expect(Tok::Eq)?;
                    let got = self.next()?;
                    let value = match got.tok {
                        Tok::Lit(v) => v,
                        Tok::Real(_) => {
                            return Err(syntax(
                                &self.file,
                                got.line,
                                got.col,
                                "real constants are not supported",
                            ))
                        }
                        other => {
                            return Err(syntax(
                                &self.file,
                                got.line,
                                got.col,
                                format!("expected literal, found {}", other.describe()),
                            ))
                        }
                    };
                    self.expect(Tok::Semi)?;
                    let attrs = self.opt_attrs()?;
                    m.consts.push(ConstDecl { id, value, attrs });
                }
                "inst" => {
                    self.pos += 1;
                    let id = self.expect_id("instance name")?;
                    self.expect(Tok::Colon)?;
                    let module = self.expect_id("module name")?;
                    self.expect(Tok::Semi)?;
                    let attrs = self.opt_attrs()?;
                    m.insts.push(Inst { id, module, attrs });
                }
                "proc" => {
                    self.pos += 1;
                    let attrs = self.opt_attrs()?;
                    self.expect(Tok::LBrace)?;
                    let mut body = Vec::new();
                    while !self.eat(&Tok::RBrace) {
                        body.push(self.statement()?);
                    }
                    m.procs.push(Proc { attrs, body });
                }
                "func" => {
                    self.pos += 1;
                    m.funcs.push(self.func()?);
                }
                other => return Err(self.err_here(format!("unexpected module item `{other}`"))),
            }
        }
        Ok(m)
    }

    /// Pops the `dir` attribute for port-prefixed declarations.
    fn take_dir(&self, attrs: &mut AttrMap, port: bool, id: &str) -> Result<Option<Dir>, IrError> {
        if !port {
            return Ok(None);
        }
        match attrs.remove("dir").as_ref().and_then(AttrValue::as_text) {
            Some("input") => Ok(Some(Dir::Input)),
            Some("output") => Ok(Some(Dir::Output)),
            Some(other) => Err(self.err_here(format!("bad dir `{other}` on port `{id}`"))),
            None => Err(self.err_here(format!("port `{id}` is missing a dir attribute"))),
        }
    }

    fn func(&mut self) -> Result<Func, IrError> {
        let id = self.expect_id("function name")?;
        self.expect(Tok::LParen)?;
        let inputs = self.params(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        self.expect(Tok::LParen)?;
        let outputs = self.params(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        let attrs = self.opt_attrs()?;
        self.expect(Tok::LBrace)?;
        let mut f = Func { id, inputs, outputs, vars: vec![], consts: vec![], body: vec![], attrs };
        loop {
            if self.is_id(0, "var") && matches!(self.peek_at(2), Some(Tok::Colon)) {
                self.pos += 1;
                let id = self.expect_id("var name")?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Semi)?;
                let attrs = self.opt_attrs()?;
                f.vars.push(VarDecl { id, ty, dir: None, attrs });
            } else if self.is_id(0, "const") && matches!(self.peek_at(2), Some(Tok::Eq)) {
                self.pos += 1;
                let id = self.expect_id("const name")?;
                self.expect(Tok::Eq)?;
                let got = self.next()?;
                let value = match got.tok {
                    Tok::Lit(v) => v,
                    other => {
                        return Err(syntax(
                            &self.file,
                            got.line,
                            got.col,
                            format!("expected literal, found {}", other.describe()),
                        ))
                    }
                };
                self.expect(Tok::Semi)?;
                let attrs = self.opt_attrs()?;
                f.consts.push(ConstDecl { id, value, attrs });
            } else {
                break;
            }
        }
        while !self.eat(&Tok::RBrace) {
            f.body.push(self.statement()?);
        }
        Ok(f)
    }

    fn params(&mut self, terminator: Tok) -> Result<Vec<String>, IrError> {
        let mut out = Vec::new();
        if self.peek() == Some(&terminator) {
            return Ok(out);
        }
        loop {
            out.push(self.expect_id("parameter")?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn statement(&mut self) -> Result<Statement, IrError> {
        // Label: identifier directly followed by `:`.
        if matches!(self.peek(), Some(Tok::Id(_))) && self.peek_at(1) == Some(&Tok::Colon) {
            let label = self.expect_id("label")?;
            self.expect(Tok::Colon)?;
            return Ok(Statement::new(Stmt::Label(label)));
        }
        if self.peek() == Some(&Tok::Hash) {
            self.pos += 1;
            let id = self.expect_id("delay identifier")?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Guard(Guard::Delay(id)), attrs });
        }
        if self.peek() == Some(&Tok::At) {
            let events = self.event_wait()?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Guard(Guard::Event(events)), attrs });
        }
        if self.is_id(0, "repeat") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 1;
            self.expect(Tok::LParen)?;
            let count = self.expect_id("repeat count identifier")?;
            self.expect(Tok::RParen)?;
            let events = self.event_wait()?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Guard(Guard::Repeat(count, events)), attrs });
        }
        if self.is_id(0, "if")
            && matches!(self.peek_at(1), Some(Tok::Id(_)))
            && self.is_id(2, "goto")
        {
            self.pos += 1;
            let cond = self.expect_id("condition")?;
            self.expect_kw("goto")?;
            let target = self.expect_id("label")?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::If { cond, target }, attrs });
        }
        if (self.is_id(0, "case") || self.is_id(0, "casex") || self.is_id(0, "casez"))
            && matches!(self.peek_at(1), Some(Tok::Id(_)))
            && self.peek_at(2) == Some(&Tok::LBrace)
        {
            return self.case_statement();
        }
        if self.is_id(0, "goto") && matches!(self.peek_at(1), Some(Tok::Id(_))) && self.peek_at(2) == Some(&Tok::Semi) {
            self.pos += 1;
            let label = self.expect_id("label")?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Goto(label), attrs });
        }
        if self.is_id(0, "return") && self.peek_at(1) == Some(&Tok::Semi) {
            self.pos += 2;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Return, attrs });
        }
        if self.is_id(0, "pass") && self.peek_at(1) == Some(&Tok::Semi) {
            self.pos += 2;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Pass, attrs });
        }
        if self.is_id(0, "invoke") && matches!(self.peek_at(1), Some(Tok::Id(_))) {
            self.pos += 1;
            let mut callee = vec![self.expect_id("callee")?];
            while self.eat(&Tok::Dot) {
                callee.push(self.expect_id("callee segment")?);
            }
            self.expect(Tok::LParen)?;
            let params = self.params(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Invoke { callee, params }, attrs });
        }
        if self.is_id(0, "receive") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 1;
            self.expect(Tok::LParen)?;
            let params = self.params(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Receive { params }, attrs });
        }
        if self.is_id(0, "syscall")
            && matches!(self.peek_at(1), Some(Tok::Id(_)))
            && self.peek_at(2) == Some(&Tok::LParen)
        {
            self.pos += 1;
            let name = self.expect_id("syscall name")?;
            self.expect(Tok::LParen)?;
            let ins = self.params(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            let outs = if self.eat(&Tok::Arrow) {
                self.expect(Tok::LParen)?;
                let outs = self.params(Tok::RParen)?;
                self.expect(Tok::RParen)?;
                outs
            } else {
                Vec::new()
            };
            self.expect(Tok::Semi)?;
            let attrs = self.opt_attrs()?;
            return Ok(Statement { stmt: Stmt::Syscall { name, ins, outs }, attrs });
        }
        // Everything else is an assignment.
        let lhs = self.access()?;
        let op = match self.next()? {
            Spanned { tok: Tok::Eq, .. } => AssignOp::Blocking,
            Spanned { tok: Tok::NonBlocking, .. } => AssignOp::NonBlocking,
            Spanned { tok: Tok::Continuous, .. } => AssignOp::Continuous,
            got => {
                return Err(syntax(
                    &self.file,
                    got.line,
                    got.col,
                    format!("expected assignment operator, found {}", got.tok.describe()),
                ))
            }
        };
        let rhs = self.rvalue()?;
        self.expect(Tok::Semi)?;
        let attrs = self.opt_attrs()?;
        return Ok(Statement { stmt: Stmt::Assign(Assign { op, lhs, rhs }), attrs });
    }

    fn case_statement(&mut self) -> Result<Statement, IrError> {
        let kind = match self.expect_id("case keyword")?.as_str() {
            "case" => CaseKind::Case,
            "casex" => CaseKind::Casex,
            "casez" => CaseKind::Casez,
            _ => unreachable!("guarded by caller"),
        };
        let subject = self.expect_id("case subject")?;
        self.expect(Tok::LBrace)?;
        let mut arms = Vec::new();
        let mut default = None;
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.is_id(0, "default") {
                self.pos += 1;
                self.expect(Tok::Colon)?;
                self.expect_kw("goto")?;
                let label = self.expect_id("label")?;
                self.expect(Tok::Semi)?;
                default = Some(label);
                self.expect(Tok::RBrace)?;
                break;
            }
            let got = self.next()?;
            let pattern = match got.tok {
                Tok::Lit(v) => v,
                other => {
                    return Err(syntax(
                        &self.file,
                        got.line,
                        got.col,
                        format!("expected case pattern literal, found {}", other.describe()),
                    ))
                }
            };
            self.expect(Tok::Colon)?;
            self.expect_kw("goto")?;
            let label = self.expect_id("label")?;
            self.expect(Tok::Semi)?;
            arms.push((pattern, label));
        }
        let attrs = self.opt_attrs()?;
        Ok(Statement { stmt: Stmt::Case { kind, subject, arms, default }, attrs })
    }

    fn event_wait(&mut self) -> Result<Vec<EventExpr>, IrError> {
        self.expect(Tok::At)?;
        self.expect(Tok::LParen)?;
        let mut events = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(events);
        }
        loop {
            let edge = if self.is_id(0, "posedge") && matches!(self.peek_at(1), Some(Tok::Id(_))) {
                self.pos += 1;
                Edge::Pos
            } else if self.is_id(0, "negedge") && matches!(self.peek_at(1), Some(Tok::Id(_))) {
                self.pos += 1;
                Edge::Neg
            } else {
                Edge::Any
            };
            let access = self.access()?;
            events.push(EventExpr { edge, access });
            if self.is_id(0, "or") {
                self.pos += 1;
                continue;
            }
            self.expect(Tok::RParen)?;
            break;
        }
        Ok(events)
    }

    fn access(&mut self) -> Result<Access, IrError> {
        let mut path = vec![self.expect_id("identifier")?];
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            path.push(self.expect_id("path segment")?);
        }
        let mut access = Access { path, index: None, sel: None };
        if self.peek() == Some(&Tok::LBracket) {
            match (self.peek_at(1), self.peek_at(2)) {
                (Some(Tok::Id(_)), Some(Tok::RBracket)) => {
                    self.pos += 1;
                    access.index = Some(self.expect_id("array index")?);
                    self.expect(Tok::RBracket)?;
                }
                _ => {
                    access.sel = Some(self.selector()?);
                    return Ok(access);
                }
            }
        }
        if self.peek() == Some(&Tok::LBracket) {
            access.sel = Some(self.selector()?);
        }
        Ok(access)
    }

    fn selector(&mut self) -> Result<Selector, IrError> {
        self.expect(Tok::LBracket)?;
        let got = self.next()?;
        let sel = match got.tok {
            Tok::Int(m) => {
                self.expect(Tok::Colon)?;
                let n = self.expect_int("select low bit")?;
                Selector::Range(m as usize, n)
            }
            Tok::Id(base) => {
                let dirn = self.next()?;
                let up = match dirn.tok {
                    Tok::Plus => true,
                    Tok::Minus => false,
                    other => {
                        return Err(syntax(
                            &self.file,
                            dirn.line,
                            dirn.col,
                            format!("expected `+:` or `-:`, found {}", other.describe()),
                        ))
                    }
                };
                self.expect(Tok::Colon)?;
                let width = self.expect_int("select width")?;
                if up {
                    Selector::IndexedUp(base, width)
                } else {
                    Selector::IndexedDown(base, width)
                }
            }
            other => {
                return Err(syntax(
                    &self.file,
                    got.line,
                    got.col,
                    format!("expected select, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::RBracket)?;
        Ok(sel)
    }

    fn rvalue(&mut self) -> Result<Rvalue, IrError> {
        if let Some(Tok::Id(word)) = self.peek() {
            let word = word.clone();
            let two_ids = matches!(self.peek_at(1), Some(Tok::Id(_)))
                && matches!(self.peek_at(2), Some(Tok::Id(_)));
            let id_then_end = matches!(self.peek_at(1), Some(Tok::Id(_)))
                && self.peek_at(2) == Some(&Tok::Semi);
            if let Some(op) = BinaryOp::from_keyword(&word) {
                if two_ids {
                    self.pos += 1;
                    let a = self.expect_id("operand")?;
                    let b = self.expect_id("operand")?;
                    return Ok(Rvalue::Compute(Compute::Binary(op, a, b)));
                }
            }
            if let Some(op) = UnaryOp::from_keyword(&word) {
                if id_then_end {
                    self.pos += 1;
                    let a = self.expect_id("operand")?;
                    return Ok(Rvalue::Compute(Compute::Unary(op, a)));
                }
            }
            if matches!(word.as_str(), "zext" | "sext" | "cast")
                && matches!(self.peek_at(1), Some(Tok::Id(_)))
                && self.is_id(2, "to")
            {
                self.pos += 1;
                let a = self.expect_id("operand")?;
                self.expect_kw("to")?;
                let ty = self.ty()?;
                return Ok(Rvalue::Compute(match word.as_str() {
                    "zext" => Compute::Zext(a, ty),
                    "sext" => Compute::Sext(a, ty),
                    _ => Compute::Cast(a, ty),
                }));
            }
            if self.peek_at(1) == Some(&Tok::Question) {
                let sel = self.expect_id("selector")?;
                self.expect(Tok::Question)?;
                let t = self.expect_id("operand")?;
                self.expect(Tok::Colon)?;
                let e = self.expect_id("operand")?;
                return Ok(Rvalue::Compute(Compute::Mux(sel, t, e)));
            }
        }
        Ok(Rvalue::Access(self.access()?))
    }
}
