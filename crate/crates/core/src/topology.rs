//! Current/potential distributions and closed-form tests for paths, cycles
//! and trees.

use std::collections::VecDeque;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graphs::{self, incidence, Edge, EdgeKind, Interconnection};
use crate::structural::{self, SssOptions};

/// Currents on the restorative edges (positive means flow from the lower to
/// the higher numbered endpoint) and the potentials they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub currents: Vec<BigRational>,
    pub potentials: Vec<BigRational>,
}

impl Distribution {
    pub fn is_trivial(&self) -> bool {
        self.currents.iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Potential equals outgoing minus incoming current.
    Balance,
    /// Potentials sum to zero.
    ZeroSum,
    /// Dissipative edges join equal potentials.
    Dissipative,
    /// Current runs from higher to lower potential.
    Direction,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Balance => "A1",
            Rule::ZeroSum => "zero-sum",
            Rule::Dissipative => "A2",
            Rule::Direction => "A3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionCheck {
    pub failed: Option<(Rule, usize)>,
    pub trivial: bool,
}

impl DistributionCheck {
    pub fn holds(&self) -> bool {
        self.failed.is_none()
    }
}

/// Exact check of the distribution rules. A failure carries the rule and
/// the 1-based vertex or edge index where it first breaks.
pub fn verify_distribution(ic: &Interconnection, d: &Distribution) -> Result<DistributionCheck> {
    let br = ic.restorative();
    if d.currents.len() != br.len() {
        return Err(Error::DimensionMismatch {
            expected: br.len(),
            got: d.currents.len(),
        });
    }
    if d.potentials.len() != ic.q() {
        return Err(Error::DimensionMismatch {
            expected: ic.q(),
            got: d.potentials.len(),
        });
    }
    let trivial = d.is_trivial();
    let fail = |rule, at| {
        Ok(DistributionCheck {
            failed: Some((rule, at)),
            trivial,
        })
    };
    let induced = incidence(ic.q(), br)?.apply(&d.currents);
    if let Some(i) = (0..ic.q()).find(|&i| induced[i] != d.potentials[i]) {
        return fail(Rule::Balance, i + 1);
    }
    if !d.potentials.iter().sum::<BigRational>().is_zero() {
        return fail(Rule::ZeroSum, 0);
    }
    let p = |v: usize| &d.potentials[v - 1];
    if let Some(i) = ic.dissipative().iter().position(|e| p(e.lo()) != p(e.hi())) {
        return fail(Rule::Dissipative, i + 1);
    }
    let dir = br.iter().zip(&d.currents).position(|(e, c)| {
        let drop = p(e.lo()) - p(e.hi());
        drop.signum() != c.signum()
    });
    if let Some(i) = dir {
        return fail(Rule::Direction, i + 1);
    }
    Ok(DistributionCheck {
        failed: None,
        trivial,
    })
}

/// A nontrivial distribution when one exists, read off the sign witness.
pub fn find_distribution(
    ic: &Interconnection,
    options: SssOptions,
) -> Result<Option<Distribution>> {
    let ss = structural::is_ss(ic);
    if !ss.is_ss {
        return Err(Error::NotSs(ss.reason));
    }
    let verdict = structural::is_sss(ic, options)?;
    let Some(w) = verdict.witness else {
        return Ok(None);
    };
    let currents = w.to_rationals();
    let potentials = incidence(ic.q(), ic.restorative())?.apply(&currents);
    Ok(Some(Distribution {
        currents,
        potentials,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Path,
    Cycle,
    /// A tree that is not a path.
    Tree,
    General,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::Path => "path",
            TopologyKind::Cycle => "cycle",
            TopologyKind::Tree => "tree",
            TopologyKind::General => "general",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyClass {
    pub kind: TopologyKind,
    /// Degree-one vertices (trees and paths).
    pub leaves: Vec<usize>,
    /// `relabeling[k]` is the original vertex placed at position `k + 1`:
    /// walk order for paths and cycles, BFS order for trees.
    pub relabeling: Vec<usize>,
}

pub fn classify(q: usize, edges: &[Edge]) -> Result<TopologyClass> {
    let mut unique: Vec<Edge> = edges.to_vec();
    unique.sort();
    unique.dedup();
    if !graphs::is_connected(q, &unique)? {
        return Err(Error::Disconnected);
    }
    let adj = graphs::adjacency(q, &unique);
    let degree = |v: usize| adj[v].len();
    let leaves: Vec<usize> = (1..=q).filter(|&v| degree(v) == 1).collect();
    let p = unique.len();

    if p + 1 == q {
        let is_path = (1..=q).all(|v| degree(v) <= 2);
        if is_path {
            let start = leaves.first().copied().unwrap_or(1);
            return Ok(TopologyClass {
                kind: TopologyKind::Path,
                relabeling: walk(&adj, start, q),
                leaves,
            });
        }
        return Ok(TopologyClass {
            kind: TopologyKind::Tree,
            relabeling: bfs_order(&adj, 1, q),
            leaves,
        });
    }
    if p == q && q >= 3 && (1..=q).all(|v| degree(v) == 2) {
        return Ok(TopologyClass {
            kind: TopologyKind::Cycle,
            relabeling: walk(&adj, 1, q),
            leaves: Vec::new(),
        });
    }
    Ok(TopologyClass {
        kind: TopologyKind::General,
        leaves: Vec::new(),
        relabeling: (1..=q).collect(),
    })
}

// Follows a degree-at-most-two graph from `start`, taking the smaller
// neighbour first.
fn walk(adj: &[Vec<usize>], start: usize, q: usize) -> Vec<usize> {
    let mut order = vec![start];
    let mut seen = vec![false; q + 1];
    seen[start] = true;
    let mut cur = start;
    while let Some(&next) = adj[cur].iter().find(|&&u| !seen[u]) {
        seen[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

fn bfs_order(adj: &[Vec<usize>], start: usize, q: usize) -> Vec<usize> {
    let mut seen = vec![false; q + 1];
    let mut order = Vec::with_capacity(q);
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    order
}

fn require(
    ic: &Interconnection,
    allowed: &[TopologyKind],
    expected: &'static str,
) -> Result<(Interconnection, TopologyClass)> {
    let reduced = graphs::reduce(ic);
    let class = classify(reduced.q(), &reduced.union_edges())?;
    if !allowed.contains(&class.kind) {
        return Err(Error::WrongTopology {
            expected,
            found: class.kind.to_string(),
        });
    }
    Ok((reduced, class))
}

fn uncovered(ic: &Interconnection, kind: EdgeKind) -> bool {
    ic.covered(kind).len() < ic.q()
}

/// Strong synchronization of a path: some vertex meets no restorative edge.
pub fn path_sss(ic: &Interconnection) -> Result<bool> {
    let (reduced, _) = require(ic, &[TopologyKind::Path], "path")?;
    Ok(uncovered(&reduced, EdgeKind::Restorative))
}

/// Strong synchronization of a cycle: some vertex meets no restorative
/// edge, or else every vertex meets a dissipative edge and `q / 2` is odd.
pub fn cycle_sss(ic: &Interconnection) -> Result<bool> {
    let (reduced, _) = require(ic, &[TopologyKind::Cycle], "cycle")?;
    if uncovered(&reduced, EdgeKind::Restorative) {
        return Ok(true);
    }
    if uncovered(&reduced, EdgeKind::Dissipative) {
        return Ok(false);
    }
    // Both kinds cover every vertex of a cycle only when they alternate.
    assert!(reduced.q() % 2 == 0, "alternating cycle with odd length");
    Ok((reduced.q() / 2) % 2 == 1)
}

/// `Some(true)` when at most one leaf meets a restorative edge; `None`
/// otherwise, since the condition is only sufficient.
pub fn tree_sss_sufficient(ic: &Interconnection) -> Result<Option<bool>> {
    let (reduced, class) = require(ic, &[TopologyKind::Tree, TopologyKind::Path], "tree")?;
    let covered = reduced.covered(EdgeKind::Restorative);
    let hit = class.leaves.iter().filter(|v| covered.contains(v)).count();
    Ok((hit <= 1).then_some(true))
}

/// The closed-form verdict for the topology, if there is one.
pub fn fast_path(ic: &Interconnection) -> Result<Option<bool>> {
    let class = classify(ic.q(), &ic.union_edges())?;
    match class.kind {
        TopologyKind::Path => path_sss(ic).map(Some),
        TopologyKind::Cycle => cycle_sss(ic).map(Some),
        TopologyKind::Tree => tree_sss_sufficient(ic),
        TopologyKind::General => Ok(None),
    }
}
