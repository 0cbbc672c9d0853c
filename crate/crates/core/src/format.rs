//! Text formats: interconnections with optional weights and oscillator
//! system, and sign witnesses.
//!
//! ```text
//! q 4
//! d 1 3
//! r 1 2
//! w d 1 3 0.5
//! w r 1 2 2/5
//! n 1
//! M 1
//! K 1
//! B 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::dynamics::OscillatorSystem;
use crate::error::{Error, Result};
use crate::graphs::{Edge, EdgeKind, Interconnection};
use crate::laplacians::{WeightMap, WeightedLaplacian};
use crate::structural::SignWitness;

#[derive(Debug, Clone, PartialEq)]
pub struct InterconnectionFile {
    pub interconnection: Interconnection,
    /// Present when the file has weight lines for that edge kind.
    pub dissipative_weights: Option<WeightMap>,
    pub restorative_weights: Option<WeightMap>,
    pub system: Option<OscillatorSystem>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| err(line, format!("expected {what}, found '{tok}'")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(line, format!("expected a number, found '{tok}'"))),
    }
}

/// Rational in `a/b` form or a plain integer.
pub fn parse_rational(tok: &str, line: usize) -> Result<BigRational> {
    let bad = || err(line, format!("expected a rational, found '{tok}'"));
    let (n, d) = match tok.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(err(line, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

enum Weight {
    Float(f64),
    Exact(BigRational),
}

fn parse_weight(tok: &str, line: usize) -> Result<Weight> {
    if tok.contains('/') {
        let r = parse_rational(tok, line)?;
        if !r.is_positive() {
            return Err(err(line, format!("weight {tok} is not positive")));
        }
        return Ok(Weight::Exact(r));
    }
    let v = parse_f64(tok, line)?;
    if v <= 0.0 {
        return Err(err(line, format!("weight {tok} is not positive")));
    }
    Ok(Weight::Float(v))
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn edge_at(toks: &[&str], line: usize, q: usize) -> Result<Edge> {
    let i = parse_usize(toks[0], line, "a vertex index")?;
    let j = parse_usize(toks[1], line, "a vertex index")?;
    for v in [i, j] {
        if v == 0 || v > q {
            return Err(err(line, format!("vertex {v} out of range 1..={q}")));
        }
    }
    Edge::new(i, j).map_err(|e| err(line, e.to_string()))
}

fn kind_of(tok: &str, line: usize) -> Result<EdgeKind> {
    match tok {
        "d" => Ok(EdgeKind::Dissipative),
        "r" => Ok(EdgeKind::Restorative),
        _ => Err(err(line, format!("expected 'd' or 'r', found '{tok}'"))),
    }
}

fn expect_len(toks: &[&str], n: usize, line: usize, form: &str) -> Result<()> {
    if toks.len() != n {
        return Err(err(line, format!("expected '{form}'")));
    }
    Ok(())
}

pub fn parse_interconnection(text: &str) -> Result<InterconnectionFile> {
    let mut q: Option<usize> = None;
    let mut edges: [Vec<Edge>; 2] = [Vec::new(), Vec::new()];
    let mut weights: [BTreeMap<Edge, (usize, Weight)>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let mut n: Option<(usize, usize)> = None;
    let mut blocks: BTreeMap<&str, (usize, Vec<f64>)> = BTreeMap::new();
    let mut last_line = 0;

    for (line, toks) in meaningful_lines(text) {
        last_line = line;
        let key = toks[0];
        if key != "q" && q.is_none() {
            return Err(err(line, "the first entry must be 'q <vertex count>'"));
        }
        match key {
            "q" => {
                expect_len(&toks, 2, line, "q <int>")?;
                if q.is_some() {
                    return Err(err(line, "duplicate 'q' line"));
                }
                let v = parse_usize(toks[1], line, "a vertex count")?;
                if v < 2 {
                    return Err(err(
                        line,
                        format!("vertex count must be at least 2, got {v}"),
                    ));
                }
                q = Some(v);
            }
            "d" | "r" => {
                expect_len(&toks, 3, line, "d|r <i> <j>")?;
                let kind = kind_of(key, line)?;
                let e = edge_at(&toks[1..], line, q.expect("checked"))?;
                let list = &mut edges[kind as usize];
                if list.contains(&e) {
                    return Err(err(line, format!("duplicate {kind} edge {e}")));
                }
                list.push(e);
            }
            "w" => {
                expect_len(&toks, 5, line, "w d|r <i> <j> <weight>")?;
                let kind = kind_of(toks[1], line)?;
                let e = edge_at(&toks[2..4], line, q.expect("checked"))?;
                let w = parse_weight(toks[4], line)?;
                if weights[kind as usize].insert(e, (line, w)).is_some() {
                    return Err(err(line, format!("duplicate weight for {kind} edge {e}")));
                }
            }
            "n" => {
                expect_len(&toks, 2, line, "n <int>")?;
                if n.is_some() {
                    return Err(err(line, "duplicate 'n' line"));
                }
                let v = parse_usize(toks[1], line, "a system order")?;
                if v == 0 {
                    return Err(err(line, "system order must be positive"));
                }
                n = Some((line, v));
            }
            "M" | "K" | "B" => {
                let Some((_, order)) = n else {
                    return Err(err(line, format!("'{key}' before 'n'")));
                };
                let want = if key == "B" { order } else { order * order };
                if toks.len() != want + 1 {
                    return Err(err(
                        line,
                        format!("'{key}' needs {want} entries, found {}", toks.len() - 1),
                    ));
                }
                let vals = toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, line))
                    .collect::<Result<Vec<_>>>()?;
                if blocks.insert(key, (line, vals)).is_some() {
                    return Err(err(line, format!("duplicate '{key}' block")));
                }
            }
            other => return Err(err(line, format!("unknown entry '{other}'"))),
        }
    }

    let q = q.ok_or_else(|| err(last_line.max(1), "missing 'q' line"))?;
    let [d_edges, r_edges] = edges;
    let interconnection =
        Interconnection::new(q, d_edges, r_edges).map_err(|e| err(last_line, e.to_string()))?;

    let mut maps = [None, None];
    for kind in [EdgeKind::Dissipative, EdgeKind::Restorative] {
        let given = &mut weights[kind as usize];
        if given.is_empty() {
            continue;
        }
        let list = interconnection.edges(kind);
        for (e, (line, _)) in given.iter() {
            if !list.contains(e) {
                return Err(err(*line, format!("weight for undeclared {kind} edge {e}")));
            }
        }
        if let Some(missing) = list.iter().find(|e| !given.contains_key(e)) {
            return Err(err(
                last_line,
                format!("no weight for {kind} edge {missing}"),
            ));
        }
        let ordered: Vec<Weight> = list
            .iter()
            .map(|e| given.remove(e).expect("checked").1)
            .collect();
        let all_exact = ordered.iter().all(|w| matches!(w, Weight::Exact(_)));
        maps[kind as usize] = Some(if all_exact {
            WeightMap::from_exact(
                ordered
                    .into_iter()
                    .map(|w| match w {
                        Weight::Exact(r) => r,
                        Weight::Float(_) => unreachable!(),
                    })
                    .collect(),
            )?
        } else {
            WeightMap::new(
                ordered
                    .iter()
                    .map(|w| match w {
                        Weight::Float(v) => *v,
                        Weight::Exact(r) => crate::laplacians::rational_to_f64(r),
                    })
                    .collect(),
            )?
        });
    }
    let [dissipative_weights, restorative_weights] = maps;

    let system = match n {
        None => None,
        Some((line, order)) => {
            let get = |k: &str| {
                blocks
                    .get(k)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| err(line, format!("system block is missing '{k}'")))
            };
            let m = DMatrix::from_row_slice(order, order, &get("M")?);
            let k = DMatrix::from_row_slice(order, order, &get("K")?);
            let b = DVector::from_vec(get("B")?);
            Some(OscillatorSystem::new(m, k, b).map_err(|e| err(line, e.to_string()))?)
        }
    };
    if n.is_none() {
        if let Some((k, (line, _))) = blocks.iter().next() {
            return Err(err(*line, format!("'{k}' without 'n'")));
        }
    }

    Ok(InterconnectionFile {
        interconnection,
        dissipative_weights,
        restorative_weights,
        system,
    })
}

fn weight_token(w: &WeightMap, i: usize) -> String {
    if w.is_exact() {
        let r = &w.exact_values()[i];
        if r.denom() == &BigInt::from(1) {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    } else {
        format!("{}", w.values()[i])
    }
}

pub fn write_interconnection(ic: &Interconnection) -> String {
    let mut out = format!("q {}\n", ic.q());
    for e in ic.dissipative() {
        let _ = writeln!(out, "d {} {}", e.lo(), e.hi());
    }
    for e in ic.restorative() {
        let _ = writeln!(out, "r {} {}", e.lo(), e.hi());
    }
    out
}

/// Interconnection plus `w` lines for both laplacians.
pub fn write_weighted(
    ic: &Interconnection,
    d: &WeightedLaplacian,
    r: &WeightedLaplacian,
) -> String {
    let mut out = write_interconnection(ic);
    for (tag, l) in [("d", d), ("r", r)] {
        for (i, e) in l.edges().iter().enumerate() {
            let _ = writeln!(
                out,
                "w {tag} {} {} {}",
                e.lo(),
                e.hi(),
                weight_token(l.weights(), i)
            );
        }
    }
    out
}

pub fn write_system(sys: &OscillatorSystem) -> String {
    let row = |vals: Vec<f64>| {
        vals.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let n = sys.order();
    let flat = |m: &DMatrix<f64>| {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| m[(i, j)]))
            .collect()
    };
    format!(
        "n {n}\nM {}\nK {}\nB {}\n",
        row(flat(sys.m())),
        row(flat(sys.k())),
        row(sys.b().iter().copied().collect())
    )
}

/// `witness` header and one `x <index> <num>/<den>` line per restorative edge.
pub fn write_witness(w: &SignWitness) -> String {
    let mut out = String::from("witness\n");
    for (i, x) in w.entries().iter().enumerate() {
        let _ = writeln!(out, "x {} {x}/1", i + 1);
    }
    out
}

/// Witness entries indexed by restorative edge; unlisted entries are zero.
pub fn parse_witness(text: &str, restorative_edges: usize) -> Result<Vec<BigRational>> {
    let mut lines = meaningful_lines(text);
    match lines.next() {
        Some((_, toks)) if toks == ["witness"] => {}
        Some((line, _)) => return Err(err(line, "expected 'witness' header")),
        None => return Err(err(1, "empty witness file")),
    }
    let mut x: Vec<Option<BigRational>> = vec![None; restorative_edges];
    for (line, toks) in lines {
        if toks[0] != "x" || toks.len() != 3 {
            return Err(err(line, "expected 'x <edge-index> <num>/<den>'"));
        }
        let k = parse_usize(toks[1], line, "an edge index")?;
        if k == 0 || k > restorative_edges {
            return Err(err(
                line,
                format!("edge index {k} out of range 1..={restorative_edges}"),
            ));
        }
        if x[k - 1].is_some() {
            return Err(err(line, format!("duplicate entry for edge {k}")));
        }
        x[k - 1] = Some(parse_rational(toks[2], line)?);
    }
    Ok(x.into_iter()
        .map(|v| v.unwrap_or_else(BigRational::zero))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacians::ratio;

    const EXAMPLE1: &str = "# one chord\nq 4\nd 1 3\nr 1 2\nr 2 3\nr 3 4\n";

    #[test]
    fn parses_and_round_trips() {
        let f = parse_interconnection(EXAMPLE1).unwrap();
        assert_eq!(f.interconnection, crate::fixtures::example1());
        assert!(f.dissipative_weights.is_none() && f.system.is_none());
        let again = parse_interconnection(&write_interconnection(&f.interconnection)).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn weights_and_system() {
        let text = format!(
            "{EXAMPLE1}w d 1 3 0.5\nw r 1 2 2/5\nw r 2 3 1/5\nw r 3 4 1/3\nn 1\nM 1\nK 2\nB 1\n"
        );
        let f = parse_interconnection(&text).unwrap();
        assert_eq!(f.dissipative_weights.unwrap().values(), &[0.5]);
        let r = f.restorative_weights.unwrap();
        assert_eq!(
            r.exact_values(),
            vec![ratio(2, 5), ratio(1, 5), ratio(1, 3)]
        );
        assert_eq!(f.system.unwrap().k()[(0, 0)], 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("d 1 2\n", 1, "first entry"),
            ("q 3\nd 1 4\n", 2, "out of range"),
            ("q 3\nd 1 1\n", 2, "self-loop"),
            ("q 3\nd 1 2\nd 2 1\n", 3, "duplicate"),
            ("q 3\nd 1 2\nw d 1 2 -1\n", 3, "not positive"),
            ("q 3\nd 1 2\nw r 1 2 1\n", 3, "undeclared"),
            ("q 3\nd 1 2\nz\n", 3, "unknown"),
            ("q 3\nM 1\n", 2, "before 'n'"),
            ("q x\n", 1, "vertex count"),
        ];
        for (text, line, needle) in cases {
            match parse_interconnection(text) {
                Err(Error::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{text:?}: {message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn witness_round_trip() {
        let w =
            SignWitness::from_integers(vec![BigInt::from(2), BigInt::from(-1), BigInt::from(1)])
                .unwrap();
        let text = write_witness(&w);
        assert_eq!(text, "witness\nx 1 2/1\nx 2 -1/1\nx 3 1/1\n");
        assert_eq!(parse_witness(&text, 3).unwrap(), w.to_rationals());
        assert!(parse_witness("x 1 1/1\n", 3).is_err());
        assert!(parse_witness("witness\nx 4 1/1\n", 3).is_err());
        assert_eq!(
            parse_witness("witness\nx 2 3\n", 3).unwrap()[1],
            ratio(3, 1)
        );
    }
}
