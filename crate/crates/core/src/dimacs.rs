//! DIMACS readers and writers.
//!
//! Graph files (`edge` format):
//!
//! ```text
//! c optional comment lines, anywhere
//! p edge <n> <m>
//! e <u> <v>        (m lines, 1-based vertex ids)
//! ```
//!
//! CNF files:
//!
//! ```text
//! c optional comment lines
//! p cnf <vars> <clauses>
//! <lit> <lit> ... 0   (clauses may span lines; literals are non-zero
//!                      1-based integers, negative for negation)
//! ```
//!
//! Writers emit the canonical form: no comments, header first, edges sorted
//! with `u < v`, one clause per line in stored order.

use std::io::{BufRead, Write};

use crate::cnf::{CnfFormula, Literal};
use crate::error::{Error, Result};
use crate::graph::Graph;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("malformed {what}")))
}

pub fn read_dimacs_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(parse_err(lineno, "duplicate problem line"));
                }
                match toks.next() {
                    Some("edge") | Some("col") => {}
                    _ => return Err(parse_err(lineno, "expected 'p edge <n> <m>'")),
                }
                let n = parse_num(toks.next(), lineno, "vertex count")?;
                let m = parse_num(toks.next(), lineno, "edge count")?;
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or_else(|| parse_err(lineno, "edge before header"))?;
                let u: usize = parse_num(toks.next(), lineno, "endpoint")?;
                let v: usize = parse_num(toks.next(), lineno, "endpoint")?;
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(parse_err(
                        lineno,
                        format!("vertex id out of range 1..={n}: ({u},{v})"),
                    ));
                }
                edges.push((u - 1, v - 1));
            }
            Some(tok) => return Err(parse_err(lineno, format!("unexpected token '{tok}'"))),
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing problem line"))?;
    if edges.len() != m {
        return Err(parse_err(
            0,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Graph::new(n, edges)
}

pub fn write_dimacs_graph<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "p edge {} {}", g.vertex_count(), g.edge_count())?;
    for e in g.edges() {
        writeln!(out, "e {} {}", e.u + 1, e.v + 1)?;
    }
    Ok(())
}

pub fn read_dimacs_cnf<R: BufRead>(reader: R) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let mut toks = trimmed.split_whitespace().skip(1);
            if toks.next() != Some("cnf") {
                return Err(parse_err(lineno, "expected 'p cnf <vars> <clauses>'"));
            }
            let n = parse_num(toks.next(), lineno, "variable count")?;
            let m = parse_num(toks.next(), lineno, "clause count")?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| parse_err(lineno, "clause before header"))?;
        for tok in trimmed.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("malformed literal '{tok}'")))?;
            match Literal::from_dimacs(x) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) if l.var >= n => {
                    return Err(parse_err(
                        lineno,
                        format!("literal {x} out of range for {n} variables"),
                    ))
                }
                Some(l) => current.push(l),
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing problem line"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != m {
        return Err(parse_err(
            0,
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses)
}

pub fn write_dimacs_cnf<W: Write>(phi: &CnfFormula, mut out: W) -> Result<()> {
    writeln!(out, "p cnf {} {}", phi.num_vars(), phi.num_clauses())?;
    for clause in phi.clauses() {
        for l in clause {
            write!(out, "{} ", l.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

pub fn graph_to_string(g: &Graph) -> String {
    let mut buf = Vec::new();
    write_dimacs_graph(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub fn cnf_to_string(phi: &CnfFormula) -> String {
    let mut buf = Vec::new();
    write_dimacs_cnf(phi, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    read_dimacs_graph(text.as_bytes())
}

pub fn parse_cnf(text: &str) -> Result<CnfFormula> {
    read_dimacs_cnf(text.as_bytes())
}
