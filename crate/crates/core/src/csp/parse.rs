use serde::{Deserialize, Serialize};

use super::generate::sat_predicates;
use super::{Constraint, Instance, Predicate};
use crate::error::{Error, Result};

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Whitespace-separated tokens of one line with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn number(line: usize, (col, tok): (usize, &str)) -> Result<i64> {
    tok.parse().map_err(|_| parse_error(line, col, format!("expected an integer, found {tok:?}")))
}

/// `n m` followed by `m` lines `u v`, 1-indexed.
pub fn parse_edge_list(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_error(1, 1, "empty edge list"))?;
    let ht = tokens(header);
    if ht.len() != 2 {
        return Err(parse_error(hl, 1, "header must be \"n m\""));
    }
    let n = number(hl, ht[0])?;
    let m = number(hl, ht[1])?;
    if n < 1 || n > 64 {
        return Err(parse_error(hl, ht[0].0, format!("vertex count {n} outside [1, 64]")));
    }
    if m < 1 {
        return Err(parse_error(hl, ht[1].0, "edge count must be positive"));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut last_line = hl;
    for (ln, line) in lines {
        last_line = ln;
        let t = tokens(line);
        if edges.len() as i64 == m {
            return Err(parse_error(ln, t[0].0, format!("more than {m} edges")));
        }
        if t.len() != 2 {
            let col = t.get(2).map_or(1, |x| x.0);
            return Err(parse_error(ln, col, "edge line must be \"u v\""));
        }
        let mut ends = [0usize; 2];
        for k in 0..2 {
            let v = number(ln, t[k])?;
            if v < 1 || v > n {
                return Err(parse_error(ln, t[k].0, format!("vertex {v} outside [1, {n}]")));
            }
            ends[k] = (v - 1) as usize;
        }
        if ends[0] == ends[1] {
            return Err(parse_error(ln, t[1].0, format!("self-loop at vertex {}", ends[0] + 1)));
        }
        let key = (ends[0].min(ends[1]), ends[0].max(ends[1]));
        if edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == key) {
            return Err(parse_error(ln, t[0].0, format!("duplicate edge {} {}", key.0 + 1, key.1 + 1)));
        }
        edges.push((ends[0], ends[1]));
    }
    if (edges.len() as i64) < m {
        return Err(parse_error(last_line + 1, 1, format!("expected {m} edges, found {}", edges.len())));
    }
    Instance::max_cut(n as usize, &edges)
}

pub fn write_edge_list(inst: &Instance) -> Result<String> {
    let edges = inst
        .cut_edges()
        .ok_or_else(|| Error::MalformedInput("only Max Cut instances have an edge-list form".into()))?;
    let mut out = format!("{} {}\n", inst.n(), edges.len());
    for (u, v) in edges {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    Ok(out)
}

/// DIMACS CNF with clauses of exactly three literals on distinct
/// variables. A positive literal is true at `-1`.
pub fn parse_dimacs_cnf(text: &str) -> Result<Instance> {
    let mut header: Option<(usize, usize)> = None;
    let mut constraints = Vec::new();
    let mut clause: Vec<(usize, usize, i64)> = Vec::new();
    let mut last = (1, 1);
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let t = tokens(line);
        if t.is_empty() || t[0].1.starts_with('c') {
            continue;
        }
        if t[0].1 == "p" {
            if header.is_some() {
                return Err(parse_error(ln, t[0].0, "second problem line"));
            }
            if t.len() != 4 || t[1].1 != "cnf" {
                return Err(parse_error(ln, t[0].0, "problem line must be \"p cnf n m\""));
            }
            let n = number(ln, t[2])?;
            let m = number(ln, t[3])?;
            if n < 3 || n > 64 {
                return Err(parse_error(ln, t[2].0, format!("variable count {n} outside [3, 64]")));
            }
            if m < 1 {
                return Err(parse_error(ln, t[3].0, "clause count must be positive"));
            }
            header = Some((n as usize, m as usize));
            continue;
        }
        let (n, m) = header.ok_or_else(|| parse_error(ln, t[0].0, "clause before the problem line"))?;
        for tok in t {
            last = (ln, tok.0);
            let lit = number(ln, tok)?;
            if lit == 0 {
                if clause.len() != 3 {
                    return Err(parse_error(ln, tok.0, format!("clause has {} literals, expected 3", clause.len())));
                }
                if constraints.len() == m {
                    return Err(parse_error(ln, tok.0, format!("more than {m} clauses")));
                }
                let signs = clause.iter().enumerate().fold(0, |a, (b, l)| a | usize::from(l.2 < 0) << b);
                constraints.push(Constraint { predicate: signs, vars: clause.iter().map(|l| (l.2.unsigned_abs() - 1) as usize).collect() });
                clause.clear();
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(parse_error(ln, tok.0, format!("literal {lit} outside the {n} variables")));
            }
            if clause.iter().any(|l| l.2.abs() == lit.abs()) {
                return Err(parse_error(ln, tok.0, format!("variable {} repeats in a clause", lit.abs())));
            }
            if clause.len() == 3 {
                return Err(parse_error(ln, tok.0, "clause has more than 3 literals"));
            }
            clause.push((ln, tok.0, lit));
        }
    }
    let (n, m) = header.ok_or_else(|| parse_error(1, 1, "missing problem line"))?;
    if !clause.is_empty() {
        return Err(parse_error(last.0, last.1, "last clause is not terminated by 0"));
    }
    if constraints.len() != m {
        return Err(parse_error(last.0, last.1, format!("expected {m} clauses, found {}", constraints.len())));
    }
    Instance::new(n, sat_predicates(), constraints)
}

pub fn write_dimacs_cnf(inst: &Instance) -> Result<String> {
    let sat = sat_predicates();
    let mut body = String::new();
    for c in inst.constraints() {
        let p = &inst.predicates()[c.predicate];
        let signs = sat
            .iter()
            .position(|q| q.table == p.table)
            .ok_or_else(|| Error::MalformedInput(format!("predicate {:?} is not a 3-literal disjunction", p.name)))?;
        for (b, v) in c.vars.iter().enumerate() {
            let lit = (*v + 1) as i64;
            body.push_str(&format!("{} ", if signs >> b & 1 == 1 { -lit } else { lit }));
        }
        body.push_str("0\n");
    }
    Ok(format!("p cnf {} {}\n{body}", inst.n(), inst.m()))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    predicate: usize,
    vars: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    predicates: Vec<Predicate>,
    constraints: Vec<RawConstraint>,
}

impl Instance {
    /// JSON form with 1-indexed variables.
    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            n: self.n(),
            predicates: self.predicates().to_vec(),
            constraints: self
                .constraints()
                .iter()
                .map(|c| RawConstraint { predicate: c.predicate, vars: c.vars.iter().map(|v| v + 1).collect() })
                .collect(),
        };
        serde_json::to_string(&raw).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let raw: RawInstance = serde_json::from_str(text)?;
        let mut preds = Vec::new();
        for p in raw.predicates {
            preds.push(Predicate::new(p.name, p.arity, p.table)?);
        }
        let mut constraints = Vec::new();
        for (i, c) in raw.constraints.into_iter().enumerate() {
            if c.vars.iter().any(|&v| v == 0) {
                return Err(Error::MalformedInput(format!("constraint {} uses variable 0; variables are 1-indexed", i + 1)));
            }
            constraints.push(Constraint { predicate: c.predicate, vars: c.vars.iter().map(|v| v - 1).collect() });
        }
        Instance::new(raw.n, preds, constraints)
    }
}

/// Detect the format: JSON object, DIMACS CNF, or edge list.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    if first.starts_with('{') {
        Instance::from_json(text)
    } else if first.starts_with('p') || first.starts_with('c') {
        parse_dimacs_cnf(text)
    } else {
        parse_edge_list(text)
    }
}
