//! Text format for custom tableaus.
//!
//! ```text
//! # comment
//! name = heun-like
//! order = 2
//! c = 0, 1
//! a[2][1] = scale:1 phi:1 w:1
//! b[1] = scale:1 phi:1 w:1 + scale:1 phi:2 w:-1
//! b[2] = scale:1 phi:2 w:1
//! ```
//!
//! Stage indices start at 1 and `a[i][j]` requires `j < i`. Omitted
//! coefficients are zero, as is the literal `0`. Terms are separated by a
//! `+` surrounded by whitespace. The optional `s` must equal the node count.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exprk::{ExpRKTableau, PhiCombo, PhiTerm};

struct Diag<'a> {
    path: &'a str,
}

impl Diag<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }
}

/// Whitespace-separated tokens of `s` with their 1-based columns, offset by `base`.
fn tokens(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push((base + st, &s[st..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((base + st, &s[st..]));
    }
    out
}

fn parse_combo(d: &Diag, line: usize, value: &str, base: usize) -> Result<PhiCombo> {
    let toks = tokens(value, base);
    if toks.len() == 1 && toks[0].1 == "0" {
        return Ok(PhiCombo::zero());
    }
    if toks.is_empty() {
        return Err(d.err(line, base, "empty coefficient (write 0 for zero)"));
    }
    let mut terms = Vec::new();
    for group in toks.split(|(_, t)| *t == "+") {
        let Some(&(col0, _)) = group.first() else {
            return Err(d.err(line, base, "dangling '+'"));
        };
        let (mut scale, mut order, mut weight) = (None, None, None);
        for &(col, tok) in group {
            let (key, val) = tok
                .split_once(':')
                .ok_or_else(|| d.err(line, col, format!("expected key:value, got '{tok}'")))?;
            let bad = || d.err(line, col + key.len() + 1, format!("invalid number '{val}'"));
            match key {
                "scale" if scale.is_none() => scale = Some(val.parse::<f64>().map_err(|_| bad())?),
                "phi" if order.is_none() => order = Some(val.parse::<usize>().map_err(|_| bad())?),
                "w" if weight.is_none() => weight = Some(val.parse::<f64>().map_err(|_| bad())?),
                "scale" | "phi" | "w" => {
                    return Err(d.err(line, col, format!("repeated '{key}' in term")))
                }
                _ => {
                    return Err(d.err(
                        line,
                        col,
                        format!("unknown term field '{key}' (expected scale, phi, w)"),
                    ))
                }
            }
        }
        match (scale, order, weight) {
            (Some(s), Some(k), Some(w)) => terms.push(PhiTerm::new(s, k, w)),
            _ => {
                return Err(d.err(line, col0, "term needs scale:, phi: and w:"));
            }
        }
    }
    Ok(PhiCombo::new(terms))
}

/// Leading `[<index>]` of `s` and the remainder.
fn bracket_index(s: &str) -> Option<(usize, &str)> {
    let s = s.strip_prefix('[')?;
    let end = s.find(']')?;
    Some((s[..end].trim().parse().ok()?, &s[end + 1..]))
}

/// Parses `a[i][j]` / `b[i]` keys into 1-based indices.
fn parse_index_key(key: &str) -> Option<(char, usize, Option<usize>)> {
    let mut chars = key.chars();
    let head = chars.next()?;
    let rest = chars.as_str();
    match head {
        'b' => {
            let (i, rest) = bracket_index(rest)?;
            rest.is_empty().then_some(('b', i, None))
        }
        'a' => {
            let (i, rest) = bracket_index(rest)?;
            let (j, rest) = bracket_index(rest)?;
            rest.is_empty().then_some(('a', i, Some(j)))
        }
        _ => None,
    }
}

/// Parses a tableau description; `path` labels diagnostics.
pub fn parse_tableau(text: &str, path: &str) -> Result<ExpRKTableau> {
    let d = Diag { path };
    let mut name = None;
    let mut order = None;
    let mut declared_s = None;
    let mut nodes: Option<(usize, Vec<f64>)> = None;
    let mut a_entries: Vec<(usize, usize, usize, usize, PhiCombo)> = Vec::new();
    let mut b_entries: Vec<(usize, usize, usize, PhiCombo)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(d.err(line, col, "expected 'key = value'"));
        };
        let key_col = content.len() - content.trim_start().len() + 1;
        let key = content[..eq].trim();
        let value = &content[eq + 1..];
        let value_col = eq + 2 + (value.len() - value.trim_start().len());
        let value_t = value.trim();
        match key {
            "name" => name = Some(value_t.to_string()),
            "order" => {
                order =
                    Some(value_t.parse::<u8>().map_err(|_| {
                        d.err(line, value_col, format!("invalid order '{value_t}'"))
                    })?)
            }
            "s" => {
                declared_s = Some((
                    line,
                    value_t.parse::<usize>().map_err(|_| {
                        d.err(line, value_col, format!("invalid stage count '{value_t}'"))
                    })?,
                ))
            }
            "c" => {
                if nodes.is_some() {
                    return Err(d.err(line, key_col, "duplicate 'c'"));
                }
                let mut vals = Vec::new();
                let mut offset = eq + 1;
                for part in value.split(',') {
                    let lead = part.len() - part.trim_start().len();
                    let col = offset + lead + 1;
                    let v = part.trim();
                    vals.push(
                        v.parse::<f64>()
                            .map_err(|_| d.err(line, col, format!("invalid node '{v}'")))?,
                    );
                    offset += part.len() + 1;
                }
                nodes = Some((line, vals));
            }
            _ => match parse_index_key(key) {
                Some(('a', i, Some(j))) => {
                    let combo = parse_combo(&d, line, value, eq + 2)?;
                    a_entries.push((line, key_col, i, j, combo));
                }
                Some(('b', i, None)) => {
                    let combo = parse_combo(&d, line, value, eq + 2)?;
                    b_entries.push((line, key_col, i, combo));
                }
                _ => return Err(d.err(line, key_col, format!("unknown key '{key}'"))),
            },
        }
    }

    let (c_line, c) = nodes.ok_or_else(|| d.err(1, 1, "missing node list 'c = ...'"))?;
    let s = c.len();
    if let Some((line, ds)) = declared_s {
        if ds != s {
            return Err(d.err(line, 1, format!("s = {ds} but {s} nodes given")));
        }
    }
    let mut a: Vec<Vec<Option<PhiCombo>>> = (0..s).map(|i| vec![None; i]).collect();
    for (line, col, i, j, combo) in a_entries {
        if i < 2 || i > s || j < 1 || j >= i {
            return Err(d.err(
                line,
                col,
                format!("a[{i}][{j}] out of range for {s} stages (need 1 <= j < i <= {s})"),
            ));
        }
        let slot = &mut a[i - 1][j - 1];
        if slot.is_some() {
            return Err(d.err(line, col, format!("duplicate a[{i}][{j}]")));
        }
        *slot = Some(combo);
    }
    let mut b: Vec<Option<PhiCombo>> = vec![None; s];
    for (line, col, i, combo) in b_entries {
        if i < 1 || i > s {
            return Err(d.err(line, col, format!("b[{i}] out of range for {s} stages")));
        }
        if b[i - 1].is_some() {
            return Err(d.err(line, col, format!("duplicate b[{i}]")));
        }
        b[i - 1] = Some(combo);
    }
    let a = a
        .into_iter()
        .map(|row| row.into_iter().map(Option::unwrap_or_default).collect())
        .collect();
    let b = b.into_iter().map(Option::unwrap_or_default).collect();
    ExpRKTableau::new(
        name.unwrap_or_else(|| "custom".to_string()),
        c,
        a,
        b,
        order.unwrap_or(0),
    )
    .map_err(|e| d.err(c_line, 1, e.to_string()))
}

pub fn load_tableau(path: &Path) -> Result<ExpRKTableau> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read tableau file {}: {e}", path.display())))?;
    parse_tableau(&text, &path.display().to_string())
}

/// Inverse of [`parse_tableau`].
pub fn format_tableau(tab: &ExpRKTableau) -> String {
    let mut out = format!(
        "name = {}\norder = {}\ns = {}\n",
        tab.name(),
        tab.order(),
        tab.stages()
    );
    let nodes: Vec<String> = tab.c().iter().map(f64::to_string).collect();
    out.push_str(&format!("c = {}\n", nodes.join(", ")));
    for i in 1..tab.stages() {
        for j in 0..i {
            out.push_str(&format!("a[{}][{}] = {}\n", i + 1, j + 1, tab.a(i, j)));
        }
    }
    for i in 0..tab.stages() {
        out.push_str(&format!("b[{}] = {}\n", i + 1, tab.b(i)));
    }
    out
}
