//! Tokenizer for the supported Verilog subset, running over preprocessed,
//! origin-tagged source lines.

use std::rc::Rc;

use crate::bitvec::LogicVec;

use super::preprocess::SourceLine;
use super::FrontendError;

/// Token payloads. Words lex as `Id`; the parser decides which are
/// keywords. Sized literals become `Sized`, unsized numbers `Unsized`
/// (kept as a value with a minimal width), reals `Real` (always rejected
/// later, with a good location).
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Id(String),
    /// `$display` and friends.
    SysId(String),
    Sized(LogicVec),
    Unsized(u64),
    Real(f64),
    Str(String),
    /// Operators and punctuation, as their source spelling.
    Punct(&'static str),
    Eof,
}

/// A token with its source origin.
#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub file: Rc<str>,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn id(&self) -> Option<&str> {
        match &self.tok {
            Tok::Id(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.tok, Tok::Punct(q) if *q == p)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Id(s) if s == kw)
    }

    /// Short rendering for error messages.
    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Id(s) => format!("`{s}`"),
            Tok::SysId(s) => format!("`${s}`"),
            Tok::Sized(v) => format!("literal `{v}`"),
            Tok::Unsized(v) => format!("literal `{v}`"),
            Tok::Real(r) => format!("real literal `{r}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

/// Multi-character operators, longest first so prefixes never shadow them.
const PUNCTS: [&str; 45] = [
    "<<<", ">>>", "===", "!==", "**", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&", "~|",
    "~^", "^~", "+:", "-:", "(", ")", "[", "]", "{", "}", ";", ",", ".", ":", "?", "@", "#", "=",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">",
];

/// Lexes preprocessed lines into a token stream ending with `Eof`.
pub(crate) fn lex(lines: &[SourceLine]) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    for sl in lines {
        lex_line(sl, &mut out)?;
    }
    let (file, line) = match lines.last() {
        Some(sl) => (Rc::clone(&sl.file), sl.line),
        None => (Rc::from(""), 0),
    };
    out.push(Token { tok: Tok::Eof, file, line, col: 1 });
    Ok(out)
}

fn lex_line(sl: &SourceLine, out: &mut Vec<Token>) -> Result<(), FrontendError> {
    let text = sl.text.as_str();
    let err = |col: usize, msg: String| FrontendError::Syntax {
        file: sl.file.to_string(),
        line: sl.line,
        col: col as u32 + 1,
        msg,
    };
    let bytes = text.as_bytes();
    let mut i = 0usize;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let col = (i + 1) as u32;
        let push = |out: &mut Vec<Token>, tok: Tok| {
            out.push(Token { tok, file: Rc::clone(&sl.file), line: sl.line, col });
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ident_char(bytes[i] as char) {
                i += 1;
            }
            push(out, Tok::Id(text[start..i].to_string()));
            continue;
        }
        if c == '$' {
            let start = i + 1;
            i += 1;
            while i < bytes.len() && ident_char(bytes[i] as char) {
                i += 1;
            }
            if i == start {
                return Err(err(start - 1, "stray `$`".to_string()));
            }
            push(out, Tok::SysId(text[start..i].to_string()));
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            while i < bytes.len() {
                let ch = bytes[i] as char;
                i += 1;
                match ch {
                    '"' => {
                        push(out, Tok::Str(s));
                        continue 'outer;
                    }
                    '\\' => {
                        let esc = *bytes.get(i).ok_or_else(|| {
                            err(i, "unterminated string escape".to_string())
                        })? as char;
                        i += 1;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    other => s.push(other),
                }
            }
            return Err(err(bytes.len(), "unterminated string literal".to_string()));
        }
        if c.is_ascii_digit() || c == '\'' {
            i = lex_number(text, i, sl, out).map_err(|(at, m)| err(at, m))?;
            continue;
        }
        for p in PUNCTS {
            if text[i..].starts_with(p) {
                push(out, Tok::Punct(p));
                i += p.len();
                continue 'outer;
            }
        }
        return Err(err(i, format!("unexpected character `{c}`")));
    }
    Ok(())
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Lexes a number starting at `i`: an unsized decimal, a sized literal
/// `<n>'<s?><base><digits>`, an unsized based literal `'<base><digits>`
/// (width = digit count times bits per digit), or a real.
fn lex_number(
    text: &str,
    mut i: usize,
    sl: &SourceLine,
    out: &mut Vec<Token>,
) -> Result<usize, (usize, String)> {
    let bytes = text.as_bytes();
    let start = i;
    let col = (i + 1) as u32;
    let mut dec_end = i;
    while dec_end < bytes.len()
        && ((bytes[dec_end] as char).is_ascii_digit() || bytes[dec_end] == b'_')
    {
        dec_end += 1;
    }
    // Real literal: digits followed by `.` or an exponent.
    if dec_end > i && dec_end < bytes.len() {
        let next = bytes[dec_end] as char;
        let is_real = (next == '.'
            && dec_end + 1 < bytes.len()
            && (bytes[dec_end + 1] as char).is_ascii_digit())
            || next == 'e'
            || next == 'E';
        if is_real {
            let mut j = dec_end + 1;
            while j < bytes.len()
                && ((bytes[j] as char).is_ascii_digit()
                    || matches!(bytes[j] as char, '.' | 'e' | 'E' | '+' | '-'))
            {
                j += 1;
            }
            let lit: String = text[i..j].chars().filter(|&c| c != '_').collect();
            let val: f64 = lit
                .parse()
                .map_err(|_| (i, format!("malformed real literal `{lit}`")))?;
            out.push(Token {
                tok: Tok::Real(val),
                file: Rc::clone(&sl.file),
                line: sl.line,
                col,
            });
            return Ok(j);
        }
    }
    i = dec_end;
    let has_base = i < bytes.len() && bytes[i] == b'\'';
    if !has_base {
        if i == start {
            return Err((i, "expected a number".to_string()));
        }
        let digits: String = text[start..i].chars().filter(|&c| c != '_').collect();
        let val: u64 = digits
            .parse()
            .map_err(|_| (start, format!("decimal literal `{digits}` out of range")))?;
        out.push(Token {
            tok: Tok::Unsized(val),
            file: Rc::clone(&sl.file),
            line: sl.line,
            col,
        });
        return Ok(i);
    }
    // Based literal. Collect `'[s]<base><digits>` where `?` reads as `z`.
    let mut j = i + 1;
    if j < bytes.len() && matches!(bytes[j] as char, 's' | 'S') {
        j += 1;
    }
    let base = *bytes
        .get(j)
        .ok_or_else(|| (j, "missing base after `'`".to_string()))? as char;
    let bits_per_digit = match base.to_ascii_lowercase() {
        'b' => 1,
        'o' => 3,
        'h' => 4,
        'd' => 0,
        _ => return Err((j, format!("unknown literal base `{base}`"))),
    };
    j += 1;
    let dig_start = j;
    while j < bytes.len()
        && ((bytes[j] as char).is_ascii_hexdigit()
            || matches!(bytes[j] as char, '_' | 'x' | 'X' | 'z' | 'Z' | '?'))
    {
        j += 1;
    }
    let digits: String = text[dig_start..j]
        .chars()
        .filter(|&c| c != '_')
        .map(|c| if c == '?' { 'z' } else { c })
        .collect();
    if digits.is_empty() {
        return Err((j, "missing digits after base".to_string()));
    }
    let width = if start == i {
        // No size prefix: width from the digit count (decimal uses the
        // value's minimal width).
        if bits_per_digit == 0 {
            let v: u64 = digits
                .parse()
                .map_err(|_| (dig_start, "bad decimal digits".to_string()))?;
            64 - v.leading_zeros() as usize
        } else {
            digits.len() * bits_per_digit
        }
        .max(1)
    } else {
        let w: String = text[start..i].chars().filter(|&c| c != '_').collect();
        w.parse()
            .map_err(|_| (start, "bad width prefix".to_string()))?
    };
    let canonical = format!(
        "{width}'{}{}{digits}",
        if matches!(bytes[i + 1] as char, 's' | 'S') { "s" } else { "" },
        base.to_ascii_lowercase()
    );
    let v = LogicVec::parse_literal(&canonical)
        .map_err(|e| (start, format!("malformed literal: {e}")))?;
    out.push(Token {
        tok: Tok::Sized(v),
        file: Rc::clone(&sl.file),
        line: sl.line,
        col,
    });
    Ok(j)
}
