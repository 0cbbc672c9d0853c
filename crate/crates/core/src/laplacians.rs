//! Weighted laplacians `L = G diag(w) G^T` of an edge set.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::{self, Edge, EdgeKind};
use crate::linalg::{spectral_norm, symmetric_eigen};

/// Tolerance for exact structural identities (row sums, symmetry, pattern).
pub const TAU_LAP: f64 = 1e-9;
/// Relative tolerance for spectral statements; multiply by a matrix norm.
pub const TAU_EIG_REL: f64 = 1e-9;

/// Absolute eigenvalue tolerance for a matrix of Frobenius norm `norm`.
pub fn tau_eig(norm: f64) -> f64 {
    TAU_EIG_REL * norm
}

/// Positive weights aligned with an edge list. Weights given as rationals
/// keep their exact value next to the float mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    weights: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl WeightMap {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositiveWeight {
                    edge: placeholder_edge(i),
                    value: w,
                });
            }
        }
        Ok(WeightMap {
            weights,
            exact: None,
        })
    }

    pub fn from_exact(exact: Vec<BigRational>) -> Result<Self> {
        let mut weights = Vec::with_capacity(exact.len());
        for (i, w) in exact.iter().enumerate() {
            let f = rational_to_f64(w);
            if !w.is_positive() || !(f.is_finite() && f > 0.0) {
                return Err(Error::NonPositiveWeight {
                    edge: placeholder_edge(i),
                    value: f,
                });
            }
            weights.push(f);
        }
        Ok(WeightMap {
            weights,
            exact: Some(exact),
        })
    }

    pub fn uniform(len: usize, w: f64) -> Result<Self> {
        Self::new(vec![w; len])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact weights; float weights convert without rounding.
    pub fn exact_values(&self) -> Vec<BigRational> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self
                .weights
                .iter()
                .map(|&w| BigRational::from_float(w).expect("finite weight"))
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidScale(alpha));
        }
        match &self.exact {
            Some(e) => {
                let a = BigRational::from_float(alpha).expect("finite scale");
                Self::from_exact(e.iter().map(|w| w * &a).collect())
            }
            None => Self::new(self.weights.iter().map(|w| w * alpha).collect()),
        }
    }
}

// Weight errors raised before the edge list is known report the position.
fn placeholder_edge(i: usize) -> Edge {
    Edge::new(i + 1, i + 2).expect("distinct endpoints")
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// A laplacian together with the edge list and weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian {
    q: usize,
    edges: Vec<Edge>,
    weights: WeightMap,
    matrix: DMatrix<f64>,
}

impl WeightedLaplacian {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &WeightMap {
        &self.weights
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The laplacian recomputed in exact arithmetic from the exact weights.
    pub fn exact_matrix(&self) -> Vec<Vec<BigRational>> {
        let mut m = vec![vec![BigRational::zero(); self.q]; self.q];
        for (e, w) in self.edges.iter().zip(self.weights.exact_values()) {
            let (a, b) = (e.lo() - 1, e.hi() - 1);
            m[a][a] += &w;
            m[b][b] += &w;
            m[a][b] -= &w;
            m[b][a] -= &w;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Sorted eigenvalues of the float mirror.
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigen(&self.matrix).0
    }
}

pub fn laplacian(q: usize, edges: &[Edge], weights: &WeightMap) -> Result<WeightedLaplacian> {
    graphs::validate_edges(q, edges, EdgeKind::Dissipative)?;
    if weights.len() != edges.len() {
        return Err(Error::WeightCount {
            expected: edges.len(),
            got: weights.len(),
        });
    }
    let mut m = DMatrix::zeros(q, q);
    for (e, &w) in edges.iter().zip(weights.values()) {
        let (a, b) = (e.lo() - 1, e.hi() - 1);
        m[(a, a)] += w;
        m[(b, b)] += w;
        m[(a, b)] -= w;
        m[(b, a)] -= w;
    }
    Ok(WeightedLaplacian {
        q,
        edges: edges.to_vec(),
        weights: weights.clone(),
        matrix: m,
    })
}

/// Laplacian with every weight equal to one, `G G^T`.
pub fn unit_laplacian(q: usize, edges: &[Edge]) -> Result<WeightedLaplacian> {
    laplacian(q, edges, &WeightMap::uniform(edges.len(), 1.0)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    Asymmetric { row: usize, col: usize },
    RowSum { row: usize, value: f64 },
    OffDiagonalSign { row: usize, col: usize, value: f64 },
    EdgePattern { row: usize, col: usize },
    NotPsd { min_eigenvalue: f64 },
    NotFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => write!(f, "not square ({rows}x{cols})"),
            Violation::Asymmetric { row, col } => write!(f, "asymmetric at ({row},{col})"),
            Violation::RowSum { row, value } => write!(f, "row sum {value:e} in row {row}"),
            Violation::OffDiagonalSign { row, col, value } => {
                write!(f, "off-diagonal sign {value} at ({row},{col})")
            }
            Violation::EdgePattern { row, col } => {
                write!(f, "edge pattern mismatch at ({row},{col})")
            }
            Violation::NotPsd { min_eigenvalue } => {
                write!(
                    f,
                    "not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            Violation::NotFinite => f.write_str("non-finite entry"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianDiagnostics {
    pub violations: Vec<Violation>,
}

impl LaplacianDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for LaplacianDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_laplacian(matrix: &DMatrix<f64>, edges: &[Edge]) -> LaplacianDiagnostics {
    validate_laplacian_with(matrix, edges, TAU_LAP)
}

/// Checks symmetry, zero row sums, nonpositive off-diagonals, the sparsity
/// pattern of `edges` (which makes `L = G diag(w) G^T` with `w > 0`) and
/// positive semidefiniteness. Vertex indices in diagnostics are 1-based.
pub fn validate_laplacian_with(
    matrix: &DMatrix<f64>,
    edges: &[Edge],
    tau_lap: f64,
) -> LaplacianDiagnostics {
    let mut violations = Vec::new();
    let (rows, cols) = matrix.shape();
    if rows != cols {
        violations.push(Violation::NotSquare { rows, cols });
        return LaplacianDiagnostics { violations };
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        violations.push(Violation::NotFinite);
        return LaplacianDiagnostics { violations };
    }
    let n = rows;
    let mut is_edge = vec![vec![false; n]; n];
    for e in edges {
        if e.hi() <= n {
            is_edge[e.lo() - 1][e.hi() - 1] = true;
            is_edge[e.hi() - 1][e.lo() - 1] = true;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > tau_lap {
                violations.push(Violation::Asymmetric {
                    row: i + 1,
                    col: j + 1,
                });
            }
            let v = matrix[(i, j)];
            if v > tau_lap {
                violations.push(Violation::OffDiagonalSign {
                    row: i + 1,
                    col: j + 1,
                    value: v,
                });
            } else if is_edge[i][j] != (v < -tau_lap) {
                violations.push(Violation::EdgePattern {
                    row: i + 1,
                    col: j + 1,
                });
            }
        }
    }
    for i in 0..n {
        let s: f64 = matrix.row(i).sum();
        if s.abs() > tau_lap {
            violations.push(Violation::RowSum {
                row: i + 1,
                value: s,
            });
        }
    }
    if n > 0 {
        let sym = (matrix + matrix.transpose()) * 0.5;
        let min = symmetric_eigen(&sym).0[0];
        if min < -tau_eig(matrix.norm()) {
            violations.push(Violation::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    LaplacianDiagnostics { violations }
}

/// Closed interval `[lo, hi]` with `0 < lo <= hi` for log-uniform weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRange {
    lo: f64,
    hi: f64,
}

impl WeightRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::InvalidRange { lo, hi });
        }
        Ok(WeightRange { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let t: f64 = rng.random();
        (self.lo.ln() + t * (self.hi.ln() - self.lo.ln()))
            .exp()
            .clamp(self.lo, self.hi)
    }
}

pub fn sample_weights<R: Rng + ?Sized>(rng: &mut R, len: usize, range: WeightRange) -> WeightMap {
    WeightMap::new((0..len).map(|_| range.sample(rng)).collect()).expect("positive samples")
}

/// Laplacian with i.i.d. log-uniform weights from a seeded generator.
pub fn sample_laplacian(
    q: usize,
    edges: &[Edge],
    seed: u64,
    range: WeightRange,
) -> Result<WeightedLaplacian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    laplacian(q, edges, &sample_weights(&mut rng, edges.len(), range))
}

pub fn rescale(l: &WeightedLaplacian, alpha: f64) -> Result<WeightedLaplacian> {
    let weights = l.weights.scaled(alpha)?;
    Ok(WeightedLaplacian {
        q: l.q,
        edges: l.edges.clone(),
        weights,
        matrix: &l.matrix * alpha,
    })
}

/// How `generic_laplacian` picks the weight of each added edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenericStrategy {
    /// Half of the perturbation bound that guarantees the property. The
    /// bound shrinks doubly exponentially with the number of steps, so this
    /// is only usable in floating point for very small graphs.
    ProofBound,
    /// Scan a fixed set of weights in `[0.5, 1.5)` and keep the one that
    /// maximizes the smaller of the relative eigenvalue gap and the smallest
    /// eigenvector entry; the bound is still computed and reported.
    #[default]
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// First edge of the spanning order.
    Seed,
    /// Edge to a vertex not yet in the graph.
    NewVertex,
    /// Edge between two vertices already in the graph.
    Chord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericStep {
    pub edge: Edge,
    pub kind: StepKind,
    pub weight: f64,
    /// Minimum pairwise eigenvalue gap before the step.
    pub c1: Option<f64>,
    /// Minimum absolute eigenvector entry before the step.
    pub c2: Option<f64>,
    /// Perturbation bound for this step (absent for the seed edge).
    pub bound: Option<f64>,
}

impl GenericStep {
    pub fn within_bound(&self) -> bool {
        self.bound.is_none_or(|b| self.weight < b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericLaplacianTrace {
    pub strategy: GenericStrategy,
    pub steps: Vec<GenericStep>,
    pub min_gap: f64,
    pub min_abs_entry: f64,
}

impl GenericLaplacianTrace {
    /// Distinct eigenvalues and no zero eigenvector entry at tolerance `tol`.
    pub fn certified(&self, tol: f64) -> bool {
        self.min_gap > tol && self.min_abs_entry > tol
    }
}

pub(crate) const GENERIC_TOL: f64 = 1e-8;

/// Minimum adjacent eigenvalue gap and minimum absolute eigenvector entry.
pub fn eigen_separation(m: &DMatrix<f64>) -> (f64, f64) {
    let n = m.nrows();
    if n <= 1 {
        return (f64::INFINITY, if n == 1 { 1.0 } else { f64::INFINITY });
    }
    let (vals, vecs) = symmetric_eigen(m);
    let gap = vals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let entry = vecs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    (gap, entry)
}

/// Spanning order: BFS tree edges from the lowest vertex (neighbors in
/// ascending order) followed by the remaining edges in input order.
fn spanning_order(q: usize, edges: &[Edge]) -> Vec<(Edge, StepKind)> {
    let adj = graphs::adjacency(q, edges);
    let mut seen = vec![false; q + 1];
    let mut order = Vec::with_capacity(edges.len());
    let mut tree = std::collections::BTreeSet::new();
    let mut queue = std::collections::VecDeque::from([1usize]);
    seen[1] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                let e = Edge::new(v, u).expect("distinct");
                let kind = if order.is_empty() {
                    StepKind::Seed
                } else {
                    StepKind::NewVertex
                };
                order.push((e, kind));
                tree.insert(e);
                queue.push_back(u);
            }
        }
    }
    for e in edges {
        if !tree.contains(e) {
            order.push((*e, StepKind::Chord));
        }
    }
    order
}

fn sub_laplacian(members: &[usize], pos: &[Option<usize>], added: &[(Edge, f64)]) -> DMatrix<f64> {
    let n = members.len();
    let mut m = DMatrix::zeros(n, n);
    for (e, w) in added {
        let a = pos[e.lo()].expect("vertex added");
        let b = pos[e.hi()].expect("vertex added");
        m[(a, a)] += w;
        m[(b, b)] += w;
        m[(a, b)] -= w;
        m[(b, a)] -= w;
    }
    m
}

/// Laplacian of a connected graph none of whose eigenvectors has a zero
/// entry, built edge by edge along a BFS spanning order.
pub fn generic_laplacian(
    q: usize,
    edges: &[Edge],
) -> Result<(WeightedLaplacian, GenericLaplacianTrace)> {
    let (l, trace) = generic_laplacian_with(q, edges, GenericStrategy::Numeric)?;
    if !trace.certified(GENERIC_TOL) {
        return Err(Error::Numerical(format!(
            "generic laplacian not separated (gap {:e}, min entry {:e})",
            trace.min_gap, trace.min_abs_entry
        )));
    }
    Ok((l, trace))
}

/// As [`generic_laplacian`] with an explicit weight strategy. The separation
/// achieved is reported in the trace rather than enforced.
pub fn generic_laplacian_with(
    q: usize,
    edges: &[Edge],
    strategy: GenericStrategy,
) -> Result<(WeightedLaplacian, GenericLaplacianTrace)> {
    if q == 0 {
        return Err(Error::TooFewVertices { min: 1, got: 0 });
    }
    if !graphs::is_connected(q, edges)? {
        return Err(Error::Disconnected);
    }
    let mut members = vec![1usize];
    let mut pos: Vec<Option<usize>> = vec![None; q + 1];
    pos[1] = Some(0);
    let mut added: Vec<(Edge, f64)> = Vec::with_capacity(edges.len());
    let mut steps = Vec::with_capacity(edges.len());

    for (edge, kind) in spanning_order(q, edges) {
        let current = sub_laplacian(&members, &pos, &added);
        let new_vertex = match kind {
            StepKind::Chord => None,
            _ => Some(if pos[edge.lo()].is_none() {
                edge.lo()
            } else {
                edge.hi()
            }),
        };
        if let Some(v) = new_vertex {
            pos[v] = Some(members.len());
            members.push(v);
        }
        let (c1, c2, bound) = if kind == StepKind::Seed {
            (None, None, None)
        } else {
            let (c1, c2) = eigen_separation(&current);
            let n = current.nrows() as f64;
            let bound = match kind {
                StepKind::NewVertex => c1 * c2 / (8.0 * (1.0 + n + c2 * c2).sqrt()),
                _ => c1 * c2 / (8.0 * (1.0 + c2 * c2).sqrt()),
            };
            (Some(c1), Some(c2), Some(bound))
        };
        let weight = match (kind, strategy) {
            (StepKind::Seed, _) => 1.0,
            (_, GenericStrategy::ProofBound) => 0.5 * bound.expect("bound for non-seed step"),
            (_, GenericStrategy::Numeric) => best_numeric_weight(&members, &pos, &added, edge),
        };
        added.push((edge, weight));
        steps.push(GenericStep {
            edge,
            kind,
            weight,
            c1,
            c2,
            bound,
        });
    }

    // Assemble in the caller's edge order.
    let weights: Vec<f64> = edges
        .iter()
        .map(|e| {
            added
                .iter()
                .find(|(a, _)| a == e)
                .expect("every edge added")
                .1
        })
        .collect();
    let l = laplacian(q, edges, &WeightMap::new(weights)?)?;
    let (min_gap, min_abs_entry) = eigen_separation(l.matrix());
    Ok((
        l,
        GenericLaplacianTrace {
            strategy,
            steps,
            min_gap,
            min_abs_entry,
        },
    ))
}

const NUMERIC_CANDIDATES: usize = 24;

fn best_numeric_weight(
    members: &[usize],
    pos: &[Option<usize>],
    added: &[(Edge, f64)],
    edge: Edge,
) -> f64 {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut trial: Vec<(Edge, f64)> = added.to_vec();
    trial.push((edge, 0.0));
    let mut best = (f64::NEG_INFINITY, 1.0);
    for k in 1..=NUMERIC_CANDIDATES {
        let w = 0.5 + (k as f64 * golden).fract();
        trial.last_mut().expect("pushed").1 = w;
        let m = sub_laplacian(members, pos, &trial);
        let (gap, entry) = eigen_separation(&m);
        let scale = spectral_norm(&m).max(f64::MIN_POSITIVE);
        let score = (gap / scale).min(entry);
        if score > best.0 {
            best = (score, w);
        }
    }
    best.1
}

/// Exact value of `v` as a rational with the given denominator.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
