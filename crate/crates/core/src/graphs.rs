//! Interconnections of `q` oscillators with two edge sets, their incidence
//! matrices and connectivity.
//!
//! Vertices are dense 1-based integers. Every edge is stored with its lower
//! endpoint first, which fixes the incidence column of `{k, l}` (k < l) as
//! `e_k - e_l`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num_traits::Zero;

use crate::error::{Error, Result};

/// Unordered pair of distinct vertices, stored as `(lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(Edge {
            lo: i.min(j),
            hi: i.max(j),
        })
    }

    /// The endpoint carrying `+1` in the incidence column.
    pub fn lo(&self) -> usize {
        self.lo
    }

    /// The endpoint carrying `-1` in the incidence column.
    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn touches(&self, v: usize) -> bool {
        self.lo == v || self.hi == v
    }

    pub fn other(&self, v: usize) -> Option<usize> {
        if v == self.lo {
            Some(self.hi)
        } else if v == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Dissipative,
    Restorative,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Dissipative => "dissipative",
            EdgeKind::Restorative => "restorative",
        })
    }
}

/// Checks an edge list against a vertex count: endpoints in range, no
/// repeated pair.
pub fn validate_edges(q: usize, edges: &[Edge], kind: EdgeKind) -> Result<()> {
    let mut seen = BTreeSet::new();
    for e in edges {
        if e.hi > q || e.lo == 0 {
            let vertex = if e.lo == 0 { 0 } else { e.hi };
            return Err(Error::VertexOutOfRange { vertex, q });
        }
        if !seen.insert(*e) {
            return Err(Error::DuplicateEdge { kind, edge: *e });
        }
    }
    Ok(())
}

/// The triple (vertices, dissipative edges, restorative edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interconnection {
    q: usize,
    dissipative: Vec<Edge>,
    restorative: Vec<Edge>,
}

impl Interconnection {
    pub fn new(q: usize, dissipative: Vec<Edge>, restorative: Vec<Edge>) -> Result<Self> {
        if q < 2 {
            return Err(Error::TooFewVertices { min: 2, got: q });
        }
        validate_edges(q, &dissipative, EdgeKind::Dissipative)?;
        validate_edges(q, &restorative, EdgeKind::Restorative)?;
        Ok(Interconnection {
            q,
            dissipative,
            restorative,
        })
    }

    /// Builds from raw `(i, j)` pairs.
    pub fn from_pairs(
        q: usize,
        dissipative: &[(usize, usize)],
        restorative: &[(usize, usize)],
    ) -> Result<Self> {
        let d = dissipative
            .iter()
            .map(|&(i, j)| Edge::new(i, j))
            .collect::<Result<Vec<_>>>()?;
        let r = restorative
            .iter()
            .map(|&(i, j)| Edge::new(i, j))
            .collect::<Result<Vec<_>>>()?;
        Self::new(q, d, r)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dissipative(&self) -> &[Edge] {
        &self.dissipative
    }

    pub fn restorative(&self) -> &[Edge] {
        &self.restorative
    }

    pub fn edges(&self, kind: EdgeKind) -> &[Edge] {
        match kind {
            EdgeKind::Dissipative => &self.dissipative,
            EdgeKind::Restorative => &self.restorative,
        }
    }

    /// Dissipative edges followed by the restorative edges not already
    /// present, without duplicates.
    pub fn union_edges(&self) -> Vec<Edge> {
        let mut seen: BTreeSet<Edge> = self.dissipative.iter().copied().collect();
        let mut out = self.dissipative.clone();
        for e in &self.restorative {
            if seen.insert(*e) {
                out.push(*e);
            }
        }
        out
    }

    pub fn is_disjoint(&self) -> bool {
        let d: BTreeSet<Edge> = self.dissipative.iter().copied().collect();
        self.restorative.iter().all(|e| !d.contains(e))
    }

    /// Vertices touched by at least one edge of the given kind.
    pub fn covered(&self, kind: EdgeKind) -> BTreeSet<usize> {
        self.edges(kind).iter().flat_map(|e| [e.lo, e.hi]).collect()
    }
}

/// Incidence matrix of an edge list: `q` rows, one column per edge in input
/// order, column of `{k, l}` with `k < l` equal to `e_k - e_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    q: usize,
    columns: Vec<Edge>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.q
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.columns
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> i8 {
        let e = &self.columns[col];
        if row + 1 == e.lo {
            1
        } else if row + 1 == e.hi {
            -1
        } else {
            0
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.q, self.cols(), |r, c| f64::from(self.entry(r, c)))
    }

    /// `G x` for a vector indexed by edges.
    pub fn apply<T>(&self, x: &[T]) -> Vec<T>
    where
        T: Clone + Zero + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>,
    {
        assert_eq!(x.len(), self.cols(), "edge vector length");
        let mut out = vec![T::zero(); self.q];
        for (e, xi) in self.columns.iter().zip(x) {
            out[e.lo - 1] += xi;
            out[e.hi - 1] -= xi;
        }
        out
    }

    /// `G^T v` for a vector indexed by vertices.
    pub fn apply_transpose<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Clone + for<'a> SubAssign<&'a T>,
    {
        assert_eq!(v.len(), self.q, "vertex vector length");
        self.columns
            .iter()
            .map(|e| {
                let mut d = v[e.lo - 1].clone();
                d -= &v[e.hi - 1];
                d
            })
            .collect()
    }
}

pub fn incidence(q: usize, edges: &[Edge]) -> Result<IncidenceMatrix> {
    validate_edges(q, edges, EdgeKind::Dissipative)?;
    Ok(IncidenceMatrix {
        q,
        columns: edges.to_vec(),
    })
}

/// Partition of the vertices into connected components. Component ids are
/// 1-based and ordered by their smallest member vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    count: usize,
    assignment: Vec<usize>,
}

impl ComponentPartition {
    pub fn count(&self) -> usize {
        self.count
    }

    /// Component id of the 1-based vertex `v`.
    pub fn component_of(&self, v: usize) -> usize {
        self.assignment[v - 1]
    }

    /// Members of each component, in ascending vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c - 1].push(i + 1);
        }
        out
    }
}

pub(crate) fn adjacency(q: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); q + 1];
    for e in edges {
        adj[e.lo].push(e.hi);
        adj[e.hi].push(e.lo);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

pub fn components(q: usize, edges: &[Edge]) -> Result<ComponentPartition> {
    validate_edges(q, edges, EdgeKind::Dissipative)?;
    let adj = adjacency(q, edges);
    let mut assignment = vec![0usize; q];
    let mut count = 0;
    for start in 1..=q {
        if assignment[start - 1] != 0 {
            continue;
        }
        count += 1;
        assignment[start - 1] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if assignment[u - 1] == 0 {
                    assignment[u - 1] = count;
                    queue.push_back(u);
                }
            }
        }
    }
    Ok(ComponentPartition { count, assignment })
}

pub fn is_connected(q: usize, edges: &[Edge]) -> Result<bool> {
    Ok(components(q, edges)?.count() == 1)
}

/// Removes from the restorative set every edge that is also dissipative.
/// Strong structural synchronization is invariant under this map.
pub fn reduce(ic: &Interconnection) -> Interconnection {
    let d: BTreeSet<Edge> = ic.dissipative.iter().copied().collect();
    Interconnection {
        q: ic.q,
        dissipative: ic.dissipative.clone(),
        restorative: ic
            .restorative
            .iter()
            .copied()
            .filter(|e| !d.contains(e))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(pairs: &[(usize, usize)]) -> Vec<Edge> {
        pairs
            .iter()
            .map(|&(i, j)| Edge::new(i, j).unwrap())
            .collect()
    }

    #[test]
    fn incidence_of_short_path() {
        let g = incidence(3, &edges(&[(1, 2), (2, 3)])).unwrap();
        let dense: Vec<Vec<i8>> = (0..2)
            .map(|c| (0..3).map(|r| g.entry(r, c)).collect())
            .collect();
        assert_eq!(dense, vec![vec![1, -1, 0], vec![0, 1, -1]]);
    }

    #[test]
    fn incidence_orientation_ignores_input_order() {
        let g = incidence(3, &edges(&[(3, 1)])).unwrap();
        assert_eq!((g.entry(0, 0), g.entry(1, 0), g.entry(2, 0)), (1, 0, -1));
    }

    #[test]
    fn empty_incidence() {
        let g = incidence(4, &[]).unwrap();
        assert_eq!((g.rows(), g.cols()), (4, 0));
        assert_eq!(g.apply::<i64>(&[]), vec![0; 4]);
    }

    #[test]
    fn chain_incidence_matches_example_one() {
        let g = incidence(4, &edges(&[(1, 2), (2, 3), (3, 4)])).unwrap();
        let cols: Vec<Vec<i8>> = (0..3)
            .map(|c| (0..4).map(|r| g.entry(r, c)).collect())
            .collect();
        assert_eq!(
            cols,
            vec![vec![1, -1, 0, 0], vec![0, 1, -1, 0], vec![0, 0, 1, -1]]
        );
    }

    #[test]
    fn incidence_rejects_bad_edges() {
        assert_eq!(Edge::new(2, 2), Err(Error::SelfLoop(2)));
        assert!(matches!(
            incidence(3, &edges(&[(1, 4)])),
            Err(Error::VertexOutOfRange { vertex: 4, q: 3 })
        ));
        assert!(matches!(
            incidence(3, &edges(&[(1, 2), (2, 1)])),
            Err(Error::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn connectivity_examples() {
        assert!(is_connected(4, &edges(&[(1, 3), (1, 2), (2, 3), (3, 4)])).unwrap());
        assert!(!is_connected(2, &[]).unwrap());
        assert!(is_connected(5, &edges(&[(1, 2), (2, 3), (3, 4), (4, 5)])).unwrap());
    }

    #[test]
    fn component_partitions() {
        let p = components(4, &edges(&[(1, 2), (3, 4)])).unwrap();
        assert_eq!(p.count(), 2);
        assert_eq!(p.members(), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(components(3, &[]).unwrap().count(), 3);
        let p = components(4, &edges(&[(3, 4), (1, 3), (1, 2)])).unwrap();
        assert_eq!(p.count(), 1);
        let p = components(5, &edges(&[(4, 5), (2, 3)])).unwrap();
        assert_eq!(p.members(), vec![vec![1], vec![2, 3], vec![4, 5]]);
        assert_eq!(p.component_of(5), 3);
    }

    #[test]
    fn reduce_removes_shared_restorative_edges() {
        let ic = Interconnection::from_pairs(3, &[(1, 2)], &[(1, 2), (2, 3)]).unwrap();
        let red = reduce(&ic);
        assert_eq!(red.restorative(), edges(&[(2, 3)]).as_slice());
        assert!(red.is_disjoint());

        let disjoint = Interconnection::from_pairs(4, &[(1, 3)], &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(reduce(&disjoint), disjoint);
    }

    #[test]
    fn interconnection_validation() {
        assert!(matches!(
            Interconnection::from_pairs(1, &[], &[]),
            Err(Error::TooFewVertices { .. })
        ));
        assert!(Interconnection::from_pairs(3, &[(1, 2)], &[(1, 2)]).is_ok());
        assert!(matches!(
            Interconnection::from_pairs(3, &[], &[(1, 2), (1, 2)]),
            Err(Error::DuplicateEdge {
                kind: EdgeKind::Restorative,
                ..
            })
        ));
    }

    #[test]
    fn incidence_transpose_kills_ones() {
        let g = incidence(5, &edges(&[(1, 2), (2, 5), (3, 4), (1, 4)])).unwrap();
        assert!(g.apply_transpose(&[1i64; 5]).iter().all(|&v| v == 0));
    }
}
