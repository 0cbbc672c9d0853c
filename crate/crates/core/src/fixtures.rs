//! Named interconnections and generators for paths, cycles and trees.

use std::collections::BTreeSet;

use rand::Rng;

use crate::graphs::{Edge, Interconnection};

fn build(q: usize, d: &[(usize, usize)], r: &[(usize, usize)]) -> Interconnection {
    Interconnection::from_pairs(q, d, r).expect("fixture is valid")
}

/// One dissipative chord on a restorative chain; not strongly synchronizing.
pub fn example1() -> Interconnection {
    build(4, &[(1, 3)], &[(1, 2), (2, 3), (3, 4)])
}

/// Strongly synchronizing four-node interconnection.
pub fn example2() -> Interconnection {
    build(4, &[(1, 4), (2, 3)], &[(1, 2), (1, 3), (4, 3)])
}

pub fn dissipative_pair() -> Interconnection {
    build(2, &[(1, 2)], &[])
}

/// Cycle `1-2-...-q-1` whose edges alternate dissipative, restorative.
pub fn alternating_cycle(q: usize) -> Interconnection {
    assert!(
        q >= 4 && q.is_multiple_of(2),
        "alternating cycle needs even q >= 4"
    );
    let edges = cycle_edges(q);
    let (d, r): (Vec<_>, Vec<_>) = edges.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    Interconnection::new(
        q,
        d.into_iter().map(|(_, e)| *e).collect(),
        r.into_iter().map(|(_, e)| *e).collect(),
    )
    .expect("valid")
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub interconnection: Interconnection,
    /// Strong synchronization as stated for the gallery.
    pub expected_sss: bool,
}

/// Representative instances for each topology in the gallery figure. The
/// drawings themselves are not available, so each is an instance matching
/// the stated properties; all are also decided by the general test.
pub fn gallery() -> Vec<GalleryEntry> {
    vec![
        GalleryEntry {
            name: "a",
            description: "alternating 4-cycle",
            interconnection: alternating_cycle(4),
            expected_sss: false,
        },
        GalleryEntry {
            name: "b",
            description: "alternating 6-cycle",
            interconnection: alternating_cycle(6),
            expected_sss: true,
        },
        GalleryEntry {
            name: "c",
            description: "tree with two restorative leaves",
            interconnection: build(6, &[(1, 3), (2, 4)], &[(1, 2), (2, 5), (2, 6)]),
            expected_sss: false,
        },
        GalleryEntry {
            name: "d",
            description: "tree with one restorative leaf",
            interconnection: build(6, &[(1, 3), (2, 4), (2, 5)], &[(1, 2), (2, 6)]),
            expected_sss: true,
        },
        GalleryEntry {
            name: "e",
            description: "path covered by restorative edges",
            interconnection: build(5, &[(2, 3)], &[(1, 2), (3, 4), (4, 5)]),
            expected_sss: false,
        },
        GalleryEntry {
            name: "f",
            description: "path with one vertex off the restorative edges",
            interconnection: build(5, &[(1, 2), (3, 4)], &[(2, 3), (4, 5)]),
            expected_sss: true,
        },
        GalleryEntry {
            name: "g",
            description: "path with a dissipative end segment",
            interconnection: build(5, &[(3, 4), (4, 5)], &[(1, 2), (2, 3)]),
            expected_sss: true,
        },
    ]
}

pub fn path_edges(q: usize) -> Vec<Edge> {
    (1..q)
        .map(|i| Edge::new(i, i + 1).expect("distinct"))
        .collect()
}

pub fn cycle_edges(q: usize) -> Vec<Edge> {
    let mut e = path_edges(q);
    e.push(Edge::new(1, q).expect("distinct"));
    e
}

/// Splits `edges` by `mask`: bit `i` set makes edge `i` dissipative.
pub fn labeling(q: usize, edges: &[Edge], mask: u64) -> Interconnection {
    let mut d = Vec::new();
    let mut r = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if mask >> i & 1 == 1 {
            d.push(*e);
        } else {
            r.push(*e);
        }
    }
    Interconnection::new(q, d, r).expect("distinct edges")
}

/// Every dissipative/restorative labeling of an edge list.
pub fn all_labelings(q: usize, edges: &[Edge]) -> impl Iterator<Item = Interconnection> + '_ {
    (0..1u64 << edges.len()).map(move |m| labeling(q, edges, m))
}

// Canonical string of a rooted tree (parenthesized, children sorted).
fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&u| u != parent)
        .map(|&u| rooted_code(adj, u, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn tree_adjacency(q: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); q + 1];
    for e in edges {
        adj[e.lo()].push(e.hi());
        adj[e.hi()].push(e.lo());
    }
    adj
}

fn centers(q: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (1..=q).filter(|&v| degree[v] <= 1).collect();
    let mut left = q;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &u in &adj[v] {
                degree[u] -= 1;
                if degree[u] == 1 {
                    next.push(u);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Isomorphism-invariant code of an unrooted tree.
pub fn tree_code(q: usize, edges: &[Edge]) -> String {
    let adj = tree_adjacency(q, edges);
    centers(q, &adj)
        .into_iter()
        .map(|c| rooted_code(&adj, c, 0))
        .min()
        .unwrap_or_default()
}

fn prufer_edges(q: usize, seq: &[usize]) -> Vec<Edge> {
    let mut degree = vec![1usize; q + 1];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(q - 1);
    for &v in seq {
        let leaf = (1..=q).find(|&u| degree[u] == 1).expect("a leaf remains");
        edges.push(Edge::new(leaf, v).expect("distinct"));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (1..=q).filter(|&u| degree[u] == 1).collect();
    edges.push(Edge::new(rest[0], rest[1]).expect("distinct"));
    edges
}

// Relabels a tree in BFS order from its first center, children visited in
// canonical order, so each isomorphism class has one fixed labeling.
fn canonical_labeling(q: usize, edges: &[Edge]) -> Vec<Edge> {
    let adj = tree_adjacency(q, edges);
    let root = centers(q, &adj)
        .into_iter()
        .min_by_key(|&c| rooted_code(&adj, c, 0))
        .expect("nonempty tree");
    let mut label = vec![0usize; q + 1];
    let mut order = vec![(root, 0usize)];
    label[root] = 1;
    let mut next = 2;
    let mut out = Vec::with_capacity(q - 1);
    let mut i = 0;
    while i < order.len() {
        let (v, parent) = order[i];
        let mut kids: Vec<usize> = adj[v].iter().copied().filter(|&u| u != parent).collect();
        kids.sort_by_key(|&u| rooted_code(&adj, u, v));
        for u in kids {
            label[u] = next;
            next += 1;
            out.push(Edge::new(label[v], label[u]).expect("distinct"));
            order.push((u, v));
        }
        i += 1;
    }
    out
}

/// One representative of every unlabeled tree on `q >= 2` vertices.
pub fn trees(q: usize) -> Vec<Vec<Edge>> {
    assert!(q >= 2, "trees need at least two vertices");
    if q == 2 {
        return vec![vec![Edge::new(1, 2).expect("distinct")]];
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let len = q - 2;
    let mut seq = vec![1usize; len];
    loop {
        let edges = prufer_edges(q, &seq);
        if seen.insert(tree_code(q, &edges)) {
            out.push(canonical_labeling(q, &edges));
        }
        // next sequence in lexicographic order
        let mut k = len;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if seq[k] < q {
                seq[k] += 1;
                for s in &mut seq[k + 1..] {
                    *s = 1;
                }
                break;
            }
        }
    }
}

/// A random interconnection whose union graph is connected and which has at
/// least one dissipative edge. Some edges may carry both kinds.
pub fn random_ss<R: Rng + ?Sized>(rng: &mut R, max_q: usize) -> Interconnection {
    let q = rng.random_range(2..=max_q.max(2));
    let mut union: BTreeSet<Edge> = BTreeSet::new();
    // random spanning tree by attaching each vertex to an earlier one
    for v in 2..=q {
        let u = rng.random_range(1..v);
        union.insert(Edge::new(u, v).expect("distinct"));
    }
    let extra = rng.random_range(0..=q);
    for _ in 0..extra {
        let a = rng.random_range(1..=q);
        let b = rng.random_range(1..=q);
        if a != b {
            union.insert(Edge::new(a, b).expect("distinct"));
        }
    }
    let mut d = Vec::new();
    let mut r = Vec::new();
    for e in union {
        match rng.random_range(0..10) {
            0 => {
                d.push(e);
                r.push(e);
            }
            1..=4 => d.push(e),
            _ => r.push(e),
        }
    }
    if d.is_empty() {
        d.push(r.remove(0));
    }
    Interconnection::new(q, d, r).expect("distinct edges")
}
