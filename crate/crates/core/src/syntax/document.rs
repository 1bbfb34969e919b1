// Line-oriented model documents:
//
//   # comment
//   dimension 1
//   fields 1
//   gauge 1
//   bounds jet=2 deg=2
//   lagrangian 1/2*u[1; 1]^2
//   generator 1 1 1 = 1          (field, gauge, jet indices, coefficient)
//   structure 3 1 2 = 1          (output, left, right)
//   closure 1 2 1 2 = 1          (a, b, left, right)
//
// Declarations are read first, so expression lines may appear in any order.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use super::expr::{parse_at, ParseError, Scope};
use crate::algebra::{GeneratorKind, LocalFunction};
use crate::model::{Bounds, ModelSpec};

const KEYWORDS: [&str; 8] =
    ["dimension", "fields", "gauge", "bounds", "lagrangian", "generator", "structure", "closure"];

struct Line<'a> {
    number: usize,
    keyword: &'a str,
    rest: &'a str,
    rest_column: usize,
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let kw_len = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        out.push(Line {
            number: i + 1,
            keyword: &trimmed[..kw_len],
            rest: &trimmed[kw_len..],
            rest_column: indent + kw_len + 1,
        });
    }
    out
}

/// Whitespace-separated words of `text` with their 1-based columns.
fn words(text: &str, first_column: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((first_column + s, &text[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((first_column + s, &text[s..]));
    }
    out
}

fn syntax(line: usize, column: usize, found: &str, expected: &str) -> ParseError {
    let found = if found.is_empty() { "end of line".to_string() } else { format!("`{found}`") };
    ParseError::Syntax { line, column, found, expected: expected.into() }
}

fn semantic(line: usize, column: usize, message: String) -> ParseError {
    ParseError::Semantic { line, column, message }
}

fn is_name(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_usize(line: usize, (col, w): (usize, &str), what: &str) -> Result<usize, ParseError> {
    w.parse().map_err(|_| syntax(line, col, w, what))
}

/// Parses `jet=<p> deg=<d>`; commas may separate the two settings.
pub fn parse_bounds(text: &str, line: usize, first_column: usize, base: Bounds) -> Result<Bounds, ParseError> {
    let mut bounds = base;
    let spaced = text.replace(',', " ");
    for (col, w) in words(&spaced, first_column) {
        let (key, value) = w.split_once('=').ok_or_else(|| syntax(line, col, w, "`jet=<p>` or `deg=<d>`"))?;
        let v = parse_usize(line, (col + key.len() + 1, value), "a nonnegative integer")?;
        match key {
            "jet" => bounds.max_jet_order = v,
            "deg" => bounds.max_poly_degree = v,
            _ => return Err(syntax(line, col, key, "`jet` or `deg`")),
        }
    }
    Ok(bounds)
}

/// Splits `<words> = <expr>`, returning the words and the expression with its column.
fn split_assignment<'a>(
    l: &Line<'a>,
    expected_words: &str,
) -> Result<(Vec<(usize, &'a str)>, &'a str, usize), ParseError> {
    let Some(eq) = l.rest.find('=') else {
        let end = l.rest_column + l.rest.len();
        return Err(syntax(l.number, end, "", &format!("{expected_words} followed by `=`")));
    };
    let head = words(&l.rest[..eq], l.rest_column);
    Ok((head, &l.rest[eq + 1..], l.rest_column + eq + 1))
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ModelSpec, ParseError> {
    let lines = split_lines(text);
    let mut m = ModelSpec::new(0, &[], &[], Default::default());
    let mut seen = BTreeSet::new();
    for l in &lines {
        if !KEYWORDS.contains(&l.keyword) {
            return Err(syntax(
                l.number,
                l.rest_column - l.keyword.len(),
                l.keyword,
                &KEYWORDS.map(|k| format!("`{k}`")).join(", "),
            ));
        }
        let once = matches!(l.keyword, "dimension" | "fields" | "gauge" | "bounds" | "lagrangian");
        if once && !seen.insert(l.keyword) {
            return Err(semantic(l.number, 1, format!("`{}` declared twice", l.keyword)));
        }
        match l.keyword {
            "dimension" => {
                let ws = words(l.rest, l.rest_column);
                let [w] = ws[..] else {
                    let col = ws.get(1).map(|w| w.0).unwrap_or(l.rest_column);
                    return Err(syntax(l.number, col, ws.get(1).map(|w| w.1).unwrap_or(""), "a single integer"));
                };
                m.dim = parse_usize(l.number, w, "a nonnegative integer")?;
            }
            "fields" | "gauge" => {
                let mut names = Vec::new();
                for (col, w) in words(l.rest, l.rest_column) {
                    if !is_name(w) {
                        return Err(syntax(l.number, col, w, "a name made of letters, digits and `_`"));
                    }
                    if names.contains(&w.to_string()) {
                        return Err(semantic(l.number, col, format!("`{w}` declared twice")));
                    }
                    names.push(w.to_string());
                }
                if l.keyword == "fields" {
                    m.fields = names;
                } else {
                    m.gauge = names;
                }
            }
            "bounds" => m.bounds = parse_bounds(l.rest, l.number, l.rest_column, m.bounds)?,
            _ => {}
        }
    }
    let scope =
        Scope { dim: m.dim, fields: m.fields.clone(), gauge: m.gauge.clone(), max_jet_order: m.bounds.max_jet_order };
    let declared = |l: &Line, (col, w): (usize, &str), list: &[String], what: &str| -> Result<String, ParseError> {
        if list.iter().any(|x| x == w) {
            Ok(w.to_string())
        } else if is_name(w) {
            Err(semantic(l.number, col, format!("unknown {what} `{w}`")))
        } else {
            Err(syntax(l.number, col, w, &format!("a {what}")))
        }
    };
    for l in &lines {
        match l.keyword {
            "lagrangian" => {
                let f = parse_at(l.rest, Some(&scope), l.number, l.rest_column)?;
                check_coefficient(l.number, l.rest_column, &f)?;
                m.lagrangian = f;
            }
            "generator" => {
                let (head, expr, col) = split_assignment(l, "a field, a gauge index and jet indices")?;
                if head.len() < 2 {
                    return Err(syntax(l.number, col - 1, "=", "a field and a gauge index"));
                }
                let a = declared(l, head[0], &m.fields, "field")?;
                let alpha = declared(l, head[1], &m.gauge, "gauge index")?;
                let mut jet = Vec::new();
                for &(c, w) in &head[2..] {
                    let i: u16 = w.parse().map_err(|_| syntax(l.number, c, w, "a spatial index"))?;
                    if i == 0 || i as usize > m.dim {
                        return Err(semantic(l.number, c, format!("index {i} outside 1..={}", m.dim)));
                    }
                    jet.push(i);
                }
                if jet.len() > m.bounds.max_jet_order {
                    return Err(semantic(
                        l.number,
                        head[2].0,
                        format!("jet order {} exceeds the bound {}", jet.len(), m.bounds.max_jet_order),
                    ));
                }
                let f = parse_at(expr, Some(&scope), l.number, col)?;
                check_coefficient(l.number, col, &f)?;
                m = m.with_generator(&a, &alpha, &jet, f);
            }
            "structure" | "closure" => {
                if l.rest.trim().is_empty() {
                    if l.keyword == "structure" {
                        m.structure.get_or_insert_with(Default::default);
                    } else {
                        m.closure.get_or_insert_with(Default::default);
                    }
                    continue;
                }
                let (head, expr, col) = split_assignment(l, "indices")?;
                let arity = if l.keyword == "structure" { 3 } else { 4 };
                if head.len() != arity {
                    let c = head.get(arity).map(|w| w.0).unwrap_or(col - 1);
                    return Err(syntax(
                        l.number,
                        c,
                        head.get(arity).map(|w| w.1).unwrap_or("="),
                        &format!("exactly {arity} indices"),
                    ));
                }
                let f = parse_at(expr, Some(&scope), l.number, col)?;
                check_coefficient(l.number, col, &f)?;
                if l.keyword == "structure" {
                    let g: Vec<String> =
                        head.iter().map(|&w| declared(l, w, &m.gauge, "gauge index")).collect::<Result<_, _>>()?;
                    m = m.with_structure(&g[0], &g[1], &g[2], f);
                } else {
                    let a = declared(l, head[0], &m.fields, "field")?;
                    let b = declared(l, head[1], &m.fields, "field")?;
                    let al = declared(l, head[2], &m.gauge, "gauge index")?;
                    let be = declared(l, head[3], &m.gauge, "gauge index")?;
                    m = m.with_closure(&a, &b, &al, &be, f);
                }
            }
            _ => {}
        }
    }
    // remaining invariants concern the document as a whole, reported at line 0
    m.validate().map_err(|e| semantic(0, 0, e.to_string()))?;
    Ok(m)
}

fn check_coefficient(line: usize, column: usize, f: &LocalFunction) -> Result<(), ParseError> {
    match f.generators().into_iter().find(|g| !matches!(g.kind, GeneratorKind::Field | GeneratorKind::BaseCoordinate)) {
        Some(g) => Err(semantic(line, column, format!("{g} is not allowed in a coefficient"))),
        None => Ok(()),
    }
}

/// Canonical text of a model; `parse_model(print_model(m)) == m` for valid models.
pub fn print_model(m: &ModelSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("dimension {}\n", m.dim));
    out.push_str(&format!("fields {}\n", m.fields.join(" ")).replace("fields \n", "fields\n"));
    out.push_str(&format!("gauge {}\n", m.gauge.join(" ")).replace("gauge \n", "gauge\n"));
    out.push_str(&format!("bounds jet={} deg={}\n", m.bounds.max_jet_order, m.bounds.max_poly_degree));
    out.push_str(&format!("lagrangian {}\n", m.lagrangian));
    for (k, r) in &m.generators {
        let mut head = vec![k.field.clone(), k.gauge.clone()];
        head.extend(k.jet.entries().iter().map(|i| i.to_string()));
        out.push_str(&format!("generator {} = {}\n", head.join(" "), r));
    }
    if let Some(c) = &m.structure {
        let entries: Vec<_> = c.iter().filter(|(k, _)| k.left < k.right).collect();
        if entries.is_empty() {
            out.push_str("structure\n");
        }
        for (k, f) in entries {
            out.push_str(&format!("structure {} {} {} = {}\n", k.out, k.left, k.right, f));
        }
    }
    if let Some(nu) = &m.closure {
        let entries: Vec<_> = nu.iter().filter(|(k, _)| k.a < k.b && k.left < k.right).collect();
        if entries.is_empty() {
            out.push_str("closure\n");
        }
        for (k, f) in entries {
            out.push_str(&format!("closure {} {} {} {} = {}\n", k.a, k.b, k.left, k.right, f));
        }
    }
    out
}

/// Lowercase hexadecimal SHA-256 of the canonical text.
pub fn model_digest(m: &ModelSpec) -> String {
    let hash = Sha256::digest(print_model(m).as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}
