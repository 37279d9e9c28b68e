//! Minimal Verilog preprocessing: comment stripping, `` `define ``
//! substitution, and `` `include `` splicing.
//!
//! Output is a list of source lines, each tagged with the file and line it
//! came from, so later stages report locations through includes unchanged.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use super::FrontendError;

/// One preprocessed source line with its origin.
#[derive(Clone, Debug)]
pub(crate) struct SourceLine {
    pub file: Rc<str>,
    pub line: u32,
    pub text: String,
}

/// Preprocesses in-memory sources. Each entry is (file name, text); later
/// entries may reference macros defined by earlier ones. `` `include `` is
/// resolved by `read` (given the including file and the quoted path), so
/// tests can run without a filesystem.
pub(crate) fn preprocess(
    sources: &[(String, String)],
    read: &dyn Fn(&str, &str) -> Result<(String, String), String>,
) -> Result<Vec<SourceLine>, FrontendError> {
    let mut defines: BTreeMap<String, String> = BTreeMap::new();
    let mut out = Vec::new();
    for (file, text) in sources {
        process_file(file, text, read, &mut defines, &mut out, 0)?;
    }
    Ok(out)
}

/// An include resolver over the real filesystem: paths are taken relative
/// to the including file's directory.
pub(crate) fn fs_reader() -> impl Fn(&str, &str) -> Result<(String, String), String> {
    |from: &str, path: &str| {
        let base = Path::new(from).parent().unwrap_or(Path::new(""));
        let full: PathBuf = base.join(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| format!("cannot read `{}`: {e}", full.display()))?;
        Ok((full.display().to_string(), text))
    }
}

fn process_file(
    file: &str,
    text: &str,
    read: &dyn Fn(&str, &str) -> Result<(String, String), String>,
    defines: &mut BTreeMap<String, String>,
    out: &mut Vec<SourceLine>,
    depth: usize,
) -> Result<(), FrontendError> {
    if depth > 16 {
        return Err(FrontendError::Preprocess {
            file: file.to_string(),
            line: 0,
            msg: "include nesting deeper than 16 levels".to_string(),
        });
    }
    let file_rc: Rc<str> = Rc::from(file);
    let stripped = strip_comments(text);
    for (i, raw) in stripped.lines().enumerate() {
        let line_no = (i + 1) as u32;
        let err = |msg: String| FrontendError::Preprocess {
            file: file.to_string(),
            line: line_no,
            msg,
        };
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix('`') {
            let (word, tail) = split_ident(rest);
            match word {
                "define" => {
                    let (name, body) = split_ident(tail.trim_start());
                    if name.is_empty() {
                        return Err(err("`define without a macro name".to_string()));
                    }
                    if body.starts_with('(') {
                        return Err(err(format!(
                            "function-like macro `{name}` is not supported"
                        )));
                    }
                    defines.insert(name.to_string(), body.trim().to_string());
                    continue;
                }
                "include" => {
                    let path = tail.trim();
                    let unquoted = path
                        .strip_prefix('"')
                        .and_then(|p| p.strip_suffix('"'))
                        .ok_or_else(|| err("`include expects a quoted path".to_string()))?;
                    let (inc_name, inc_text) = read(file, unquoted).map_err(|e| err(e))?;
                    process_file(&inc_name, &inc_text, read, defines, out, depth + 1)?;
                    continue;
                }
                "undef" => {
                    defines.remove(split_ident(tail.trim_start()).0);
                    continue;
                }
                _ => {
                    // Macro use at line start falls through to substitution;
                    // unknown directives are rejected below.
                    if !defines.contains_key(word) {
                        return Err(err(format!("unsupported directive ``{word}`")));
                    }
                }
            }
        }
        let text = substitute(raw, defines, 0)
            .map_err(|m| err(m))?;
        out.push(SourceLine { file: Rc::clone(&file_rc), line: line_no, text });
    }
    Ok(())
}

/// Replaces `` `NAME `` macro uses, rescanning replacements up to a fixed
/// depth to catch self-referential definitions.
fn substitute(
    line: &str,
    defines: &BTreeMap<String, String>,
    depth: usize,
) -> Result<String, String> {
    if !line.contains('`') {
        return Ok(line.to_string());
    }
    if depth > 32 {
        return Err("macro expansion deeper than 32 levels".to_string());
    }
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while let Some(pos) = rest.find('`') {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 1..];
        let (name, tail) = split_ident(after);
        if name.is_empty() {
            return Err("stray ` without a macro name".to_string());
        }
        match defines.get(name) {
            Some(body) => out.push_str(&substitute(body, defines, depth + 1)?),
            None => return Err(format!("undefined macro ``{name}`")),
        }
        rest = tail;
    }
    out.push_str(rest);
    Ok(out)
}

/// Leading identifier of `s` and the remainder.
fn split_ident(s: &str) -> (&str, &str) {
    let end = s
        .char_indices()
        .find(|(_, c)| !c.is_ascii_alphanumeric() && *c != '_' && *c != '$')
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    s.split_at(end)
}

/// Blanks `//` and `/* */` comments while preserving line structure and
/// string literals.
fn strip_comments(text: &str) -> String {
    #[derive(PartialEq)]
    enum St {
        Code,
        Str,
        Line,
        Block,
    }
    let mut st = St::Code;
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match st {
            St::Code => {
                if c == '/' && chars.peek() == Some(&'/') {
                    chars.next();
                    st = St::Line;
                    out.push_str("  ");
                } else if c == '/' && chars.peek() == Some(&'*') {
                    chars.next();
                    st = St::Block;
                    out.push_str("  ");
                } else {
                    if c == '"' {
                        st = St::Str;
                    }
                    out.push(c);
                }
            }
            St::Str => {
                out.push(c);
                if c == '\\' {
                    if let Some(&n) = chars.peek() {
                        out.push(n);
                        chars.next();
                    }
                } else if c == '"' {
                    st = St::Code;
                }
            }
            St::Line => {
                if c == '\n' {
                    out.push('\n');
                    st = St::Code;
                } else {
                    out.push(' ');
                }
            }
            St::Block => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    out.push_str("  ");
                    st = St::Code;
                } else if c == '\n' {
                    out.push('\n');
                } else {
                    out.push(' ');
                }
            }
        }
    }
    out
}
