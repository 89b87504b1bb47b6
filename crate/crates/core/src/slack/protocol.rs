use num_traits::{One, Zero};
use serde::Serialize;

use crate::caps::{self, SizeCaps};
use crate::csp::{brute_force_opt, Instance};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sa::{edge_index, edge_pairs};

/// `M_{ℑ,x} = c − ℑ(x)` over instances certified to have `opt ≤ s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackMatrix {
    pub rows: Vec<Instance>,
    pub cols: Vec<u64>,
    pub c: Rational,
    pub s: Rational,
    pub entries: Vec<Vec<Rational>>,
}

pub fn build_slack_matrix(instances: Vec<Instance>, assignments: Vec<u64>, c: Rational, s: Rational) -> Result<SlackMatrix> {
    if c <= s {
        return Err(Error::Parameter(format!(
            "c = {} must exceed s = {}",
            rational::format(&c),
            rational::format(&s)
        )));
    }
    let n = instances.first().map(Instance::n).ok_or_else(|| Error::MalformedInput("no instances".into()))?;
    for (i, inst) in instances.iter().enumerate() {
        if inst.n() != n {
            return Err(Error::MalformedInput(format!("instance {} has {} variables, expected {n}", i + 1, inst.n())));
        }
        let opt = brute_force_opt(inst)?.value;
        if opt > s {
            return Err(Error::Certification {
                instance: format!("row {}", i + 1),
                reason: format!("opt = {} exceeds s = {}", rational::format(&opt), rational::format(&s)),
            });
        }
    }
    if let Some(x) = assignments.iter().find(|&&x| n < 64 && x >> n != 0) {
        return Err(Error::MalformedInput(format!("assignment {x} outside the {n}-variable cube")));
    }
    let entries = instances.iter().map(|g| assignments.iter().map(|&x| &c - g.value_at(x)).collect()).collect();
    Ok(SlackMatrix { rows: instances, cols: assignments, c, s, entries })
}

impl SlackMatrix {
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.cols, &self.entries)
    }
}

fn matrix_csv(cols: &[u64], entries: &[Vec<Rational>]) -> String {
    let mut out = String::from("row");
    for x in cols {
        out.push_str(&format!(",{x}"));
    }
    out.push('\n');
    for (i, row) in entries.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for v in row {
            out.push(',');
            out.push_str(&rational::format(v));
        }
        out.push('\n');
    }
    out
}

/// Every graph on `n` vertices with at least one edge and `opt ≤ s`, in
/// increasing order of edge subset bitmask.
pub fn low_value_graphs(n: usize, s: &Rational) -> Result<Vec<Instance>> {
    let pairs = edge_pairs(n);
    caps::check("graph enumeration edges", pairs.len(), 20)?;
    let mut out = Vec::new();
    for mask in 1u64..1 << pairs.len() {
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(e, _)| mask >> e & 1 == 1).map(|(_, p)| *p).collect();
        let g = Instance::max_cut(n, &edges)?;
        if brute_force_opt(&g)?.value <= *s {
            out.push(g);
        }
    }
    Ok(out)
}

/// `M′` with its error terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolMatrix {
    pub t: usize,
    pub entries: Vec<Vec<Rational>>,
    /// `E[(θ − c)⁺] = M′ − M`
    pub excess: Vec<Vec<Rational>>,
    /// `Pr[θ > c]`
    pub tail: Vec<Vec<Rational>>,
}

impl ProtocolMatrix {
    pub fn to_csv(&self, cols: &[u64]) -> String {
        matrix_csv(cols, &self.entries)
    }
}

fn check_protocol(sm: &SlackMatrix, t: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if t == 0 {
        return Err(Error::Parameter("sample count T must be at least 1".into()));
    }
    sm.rows
        .iter()
        .enumerate()
        .map(|(i, g)| g.cut_edges().ok_or_else(|| Error::MalformedInput(format!("row {} is not a Max Cut instance", i + 1))))
        .collect()
}

/// Bob's output on `k` cut edges out of `T`: `c − θ` if `θ ≤ c`, else 0.
fn bob(c: &Rational, k: usize, t: usize) -> Rational {
    let theta = rational::rat(k as i64, t as i64);
    if theta > *c {
        Rational::zero()
    } else {
        c - theta
    }
}

pub fn protocol_matrix(sm: &SlackMatrix, t: usize) -> Result<ProtocolMatrix> {
    check_protocol(sm, t)?;
    let mut entries = Vec::new();
    let mut excess = Vec::new();
    let mut tail = Vec::new();
    for (g, mrow) in sm.rows.iter().zip(&sm.entries) {
        let (mut er, mut xr, mut tr) = (Vec::new(), Vec::new(), Vec::new());
        for (&x, m) in sm.cols.iter().zip(mrow) {
            let p = g.value_at(x);
            let q = Rational::one() - &p;
            let (mut out, mut pr) = (Rational::zero(), Rational::zero());
            for k in 0..=t {
                let w = Rational::from_integer(rational::binomial(t as u64, k as u64))
                    * num_traits::pow(p.clone(), k)
                    * num_traits::pow(q.clone(), t - k);
                if rational::rat(k as i64, t as i64) > sm.c {
                    pr += w;
                } else {
                    out += w * bob(&sm.c, k, t);
                }
            }
            xr.push(&out - m);
            er.push(out);
            tr.push(pr);
        }
        entries.push(er);
        excess.push(xr);
        tail.push(tr);
    }
    Ok(ProtocolMatrix { t, entries, excess, tail })
}

/// `M′ = U·V` through the message space of ordered `T`-tuples of pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolFactorization {
    pub t: usize,
    pub n: usize,
    /// Rows by messages; each row is the uniform distribution on the
    /// instance's own edge tuples.
    pub u: Vec<Vec<Rational>>,
    /// Messages by assignments.
    pub v: Vec<Vec<Rational>>,
    pub cols: Vec<u64>,
}

#[derive(Serialize)]
struct FactorManifest<'a> {
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "messageSpace")]
    message_space: usize,
    rows: usize,
    cols: &'a [u64],
}

impl ProtocolFactorization {
    pub fn message_space(&self) -> usize {
        self.v.len()
    }

    /// `i-j|k-l|…`, 1-indexed.
    pub fn message_label(&self, msg: usize) -> String {
        let pairs = edge_pairs(self.n);
        decode(msg, pairs.len(), self.t)
            .iter()
            .map(|e| format!("{}-{}", pairs[*e].0 + 1, pairs[*e].1 + 1))
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn product(&self) -> Vec<Vec<Rational>> {
        self.u
            .iter()
            .map(|urow| {
                (0..self.cols.len())
                    .map(|j| urow.iter().zip(&self.v).filter(|(a, _)| !a.is_zero()).map(|(a, vrow)| a * &vrow[j]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn u_csv(&self) -> String {
        let mut out = String::from("row");
        for m in 0..self.message_space() {
            out.push(',');
            out.push_str(&self.message_label(m));
        }
        out.push('\n');
        for (i, row) in self.u.iter().enumerate() {
            out.push_str(&(i + 1).to_string());
            for v in row {
                out.push(',');
                out.push_str(&rational::format(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn v_csv(&self) -> String {
        let mut out = String::from("message");
        for x in &self.cols {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
        for (m, row) in self.v.iter().enumerate() {
            out.push_str(&self.message_label(m));
            for v in row {
                out.push(',');
                out.push_str(&rational::format(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn manifest_json(&self) -> String {
        serde_json::to_string(&FactorManifest {
            t: self.t,
            message_space: self.message_space(),
            rows: self.u.len(),
            cols: &self.cols,
        })
        .expect("serialisable")
    }
}

fn decode(mut msg: usize, base: usize, t: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        out.push(msg % base);
        msg /= base;
    }
    out
}

pub fn protocol_factorization(sm: &SlackMatrix, t: usize) -> Result<ProtocolFactorization> {
    let edge_lists = check_protocol(sm, t)?;
    let n = sm.rows[0].n();
    let base = edge_pairs(n).len();
    let limit = SizeCaps::global().protocol_messages;
    let space = (0..t).try_fold(1usize, |acc, _| acc.checked_mul(base).filter(|v| *v <= limit));
    let space = match space {
        Some(s) => s,
        None => {
            return Err(Error::SizeCap { what: "protocol messages", actual: usize::MAX, limit });
        }
    };
    caps::check("protocol messages", space, limit)?;

    let mut u = Vec::new();
    for edges in &edge_lists {
        let own: Vec<bool> = {
            let mut v = vec![false; base];
            for &(i, j) in edges {
                v[edge_index(n, i, j)] = true;
            }
            v
        };
        let w = num_traits::pow(rational::rat(1, edges.len() as i64), t);
        u.push((0..space).map(|m| if decode(m, base, t).iter().all(|e| own[*e]) { w.clone() } else { Rational::zero() }).collect());
    }
    let pairs = edge_pairs(n);
    let v = (0..space)
        .map(|m| {
            let tuple = decode(m, base, t);
            sm.cols
                .iter()
                .map(|&x| {
                    let k = tuple.iter().filter(|e| (x >> pairs[**e].0 ^ x >> pairs[**e].1) & 1 == 1).count();
                    bob(&sm.c, k, t)
                })
                .collect()
        })
        .collect();
    Ok(ProtocolFactorization { t, n, u, v, cols: sm.cols.clone() })
}
