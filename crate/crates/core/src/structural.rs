//! Structural synchronization: the connectivity test, a constructive
//! certificate of positive margin, and the exact sign-pattern search that
//! decides the strong property.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{self, incidence, Edge, Interconnection};
use crate::laplacians::{
    generic_laplacian, laplacian, rational_to_f64, sample_weights, WeightMap, WeightRange,
    WeightedLaplacian,
};
use crate::linalg::{spectral_norm, symmetric_eigen};
use crate::lp::{self, Constraint, Outcome, Problem, Relation, SmallRational};
use crate::spectral::{spectrum, MarginClass};

/// Why an interconnection fails structural synchronization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SsReason {
    DisconnectedUnion,
    EmptyDissipative,
    Ok,
}

impl fmt::Display for SsReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SsReason::DisconnectedUnion => "disconnected-union",
            SsReason::EmptyDissipative => "empty-dissipative",
            SsReason::Ok => "ok",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SsVerdict {
    pub is_ss: bool,
    pub reason: SsReason,
    pub witness_weights: Option<SynchronizingWeights>,
}

pub fn is_ss(ic: &Interconnection) -> SsVerdict {
    let connected =
        graphs::is_connected(ic.q(), &ic.union_edges()).expect("interconnection edges are valid");
    let reason = if !connected {
        SsReason::DisconnectedUnion
    } else if ic.dissipative().is_empty() {
        SsReason::EmptyDissipative
    } else {
        SsReason::Ok
    };
    SsVerdict {
        is_ss: reason == SsReason::Ok,
        reason,
        witness_weights: None,
    }
}

/// [`is_ss`] with a positive-margin weight pair attached when the answer is
/// yes.
pub fn certify_ss(ic: &Interconnection) -> Result<SsVerdict> {
    let mut v = is_ss(ic);
    if v.is_ss {
        v.witness_weights = Some(construct_synchronizing_weights(ic)?);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionCase {
    /// Restorative graph disconnected: block-diagonal generic laplacians.
    Blocks { components: usize },
    /// Two vertices joined by both edge kinds.
    Pair,
    /// Restorative graph connected: two generic blocks split across a
    /// dissipative edge, joined by weak crossing edges.
    Split { split_edge: Edge },
}

/// Crossing-edge weight and the quantities that bound it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingStep {
    pub weight: f64,
    pub bound: f64,
    pub c1: f64,
    pub c2: f64,
    pub b_norm: f64,
    pub d_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SynchronizingWeights {
    pub d: WeightedLaplacian,
    pub r: WeightedLaplacian,
    pub case: ConstructionCase,
    pub coupling: Option<CouplingStep>,
    pub margin: f64,
}

/// A block: generic laplacian weights on a vertex subset, with the block's
/// spectrum in global coordinates.
struct Block {
    members: Vec<usize>,
    weights: Vec<(Edge, f64)>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn generic_block(members: &[usize], edges: &[Edge]) -> Result<Block> {
    let mut local = BTreeMap::new();
    for (i, &v) in members.iter().enumerate() {
        local.insert(v, i + 1);
    }
    let inner: Vec<Edge> = edges
        .iter()
        .filter(|e| local.contains_key(&e.lo()) && local.contains_key(&e.hi()))
        .copied()
        .collect();
    let local_edges = inner
        .iter()
        .map(|e| Edge::new(local[&e.lo()], local[&e.hi()]))
        .collect::<Result<Vec<_>>>()?;
    let n = members.len();
    let (weights, matrix) = if n == 1 {
        (Vec::new(), DMatrix::zeros(1, 1))
    } else {
        let (l, _) = generic_laplacian(n, &local_edges)?;
        let w = inner
            .iter()
            .copied()
            .zip(l.weights().values().iter().copied())
            .collect();
        (w, l.matrix().clone())
    };
    let (values, vectors) = symmetric_eigen(&matrix);
    Ok(Block {
        members: members.to_vec(),
        weights,
        values,
        vectors,
    })
}

impl Block {
    fn scale(&mut self, alpha: f64) {
        for (_, w) in &mut self.weights {
            *w *= alpha;
        }
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    fn nonzero_values(&self) -> impl Iterator<Item = f64> + '_ {
        // The zero eigenvalue of a connected block is simple and sorts first.
        self.values.iter().skip(1).copied()
    }
}

// Picks a scale for each block in turn so that its nonzero eigenvalues stay
// away from those of the blocks already placed.
fn separate_spectra(blocks: &mut [Block]) {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut placed: Vec<f64> = Vec::new();
    for block in blocks.iter_mut() {
        let own: Vec<f64> = block.nonzero_values().collect();
        if !placed.is_empty() && !own.is_empty() {
            let score = |alpha: f64| {
                own.iter()
                    .flat_map(|&s| {
                        placed
                            .iter()
                            .map(move |&p| (alpha * s - p).abs() / (alpha * s).max(p))
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let mut best = (score(1.0), 1.0);
            for k in 1..=24 {
                let alpha = 0.5 + (k as f64 * golden).fract();
                let s = score(alpha);
                if s > best.0 {
                    best = (s, alpha);
                }
            }
            block.scale(best.1);
        }
        placed.extend(block.nonzero_values());
    }
}

/// Weights with positive margin for a structurally synchronizable
/// interconnection, following the constructive sufficiency argument.
pub fn construct_synchronizing_weights(ic: &Interconnection) -> Result<SynchronizingWeights> {
    let verdict = is_ss(ic);
    if !verdict.is_ss {
        return Err(Error::NotSs(verdict.reason));
    }
    let q = ic.q();
    let d = laplacian(
        q,
        ic.dissipative(),
        &WeightMap::uniform(ic.dissipative().len(), 1.0)?,
    )?;
    let br = ic.restorative();
    let parts = graphs::components(q, br)?;

    let (r_weights, case, coupling): (BTreeMap<Edge, f64>, _, _) = if parts.count() > 1 {
        let mut blocks = parts
            .members()
            .iter()
            .map(|m| generic_block(m, br))
            .collect::<Result<Vec<_>>>()?;
        separate_spectra(&mut blocks);
        let w = blocks.into_iter().flat_map(|b| b.weights).collect();
        (
            w,
            ConstructionCase::Blocks {
                components: parts.count(),
            },
            None,
        )
    } else if q == 2 {
        (
            br.iter().map(|&e| (e, 1.0)).collect(),
            ConstructionCase::Pair,
            None,
        )
    } else {
        let split_edge = ic.dissipative()[0];
        let (v1, v2) = split_vertices(q, br, split_edge);
        let mut blocks = vec![generic_block(&v1, br)?, generic_block(&v2, br)?];
        separate_spectra(&mut blocks);
        let side: Vec<u8> = {
            let mut s = vec![0u8; q + 1];
            for &v in &v2 {
                s[v] = 1;
            }
            s
        };
        let crossing: Vec<Edge> = br
            .iter()
            .filter(|e| side[e.lo()] != side[e.hi()])
            .copied()
            .collect();
        let step = coupling_weight(q, &blocks, d.matrix(), &crossing)?;
        let mut w: BTreeMap<Edge, f64> = blocks.into_iter().flat_map(|b| b.weights).collect();
        for e in crossing {
            w.insert(e, step.weight);
        }
        (w, ConstructionCase::Split { split_edge }, Some(step))
    };

    let weights: Vec<f64> = br.iter().map(|e| r_weights[e]).collect();
    let r = laplacian(q, br, &WeightMap::new(weights)?)?;
    let report = spectrum(&d, &r)?;
    if report.classify() != MarginClass::Positive {
        return Err(Error::Numerical(format!(
            "constructed weights have margin {:e}, tolerance {:e}",
            report.margin(),
            report.tau()
        )));
    }
    Ok(SynchronizingWeights {
        d,
        r,
        case,
        coupling,
        margin: report.margin(),
    })
}

// Grows two restorative-connected vertex sets from the endpoints of `edge`,
// one BFS layer at a time in alternation, until they cover every vertex.
fn split_vertices(q: usize, br: &[Edge], edge: Edge) -> (Vec<usize>, Vec<usize>) {
    let adj = graphs::adjacency(q, br);
    let mut owner = vec![0u8; q + 1];
    owner[edge.lo()] = 1;
    owner[edge.hi()] = 2;
    let mut fronts = [VecDeque::from([edge.lo()]), VecDeque::from([edge.hi()])];
    while fronts.iter().any(|f| !f.is_empty()) {
        for (k, tag) in [(0usize, 1u8), (1, 2)] {
            let layer: Vec<usize> = fronts[k].drain(..).collect();
            for v in layer {
                for &u in &adj[v] {
                    if owner[u] == 0 {
                        owner[u] = tag;
                        fronts[k].push_back(u);
                    }
                }
            }
        }
    }
    let pick = |t| (1..=q).filter(|&v| owner[v] == t).collect::<Vec<_>>();
    (pick(1), pick(2))
}

fn coupling_weight(
    q: usize,
    blocks: &[Block],
    d: &DMatrix<f64>,
    crossing: &[Edge],
) -> Result<CouplingStep> {
    let mut all_values: Vec<f64> = Vec::new();
    let mut vectors: Vec<DVector<f64>> = Vec::new();
    for block in blocks {
        all_values.extend(block.values.iter().copied());
        for k in 1..block.values.len() {
            let mut z = DVector::zeros(q);
            for (i, &v) in block.members.iter().enumerate() {
                z[v - 1] = block.vectors[(i, k)];
            }
            vectors.push(z);
        }
    }
    // Null vector of the block matrix orthogonal to the all-ones vector.
    let (q1, q2) = (
        blocks[0].members.len() as f64,
        blocks[1].members.len() as f64,
    );
    let mut z0 = DVector::zeros(q);
    for &v in &blocks[0].members {
        z0[v - 1] = 1.0 / q1;
    }
    for &v in &blocks[1].members {
        z0[v - 1] = -1.0 / q2;
    }
    vectors.push(z0.normalize());

    all_values.sort_by(f64::total_cmp);
    let tol = 1e-9 * all_values.last().copied().unwrap_or(1.0).max(1.0);
    let c1 = all_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > tol)
        .fold(f64::INFINITY, f64::min);
    let c1 = if c1.is_finite() { c1 } else { 1.0 };
    let c2 = vectors
        .iter()
        .map(|z| (d * z).norm())
        .fold(f64::INFINITY, f64::min);
    let b = incidence(q, crossing)?.to_dense();
    let b_norm = spectral_norm(&b);
    let d_norm = spectral_norm(d);
    let bound = c1 * c2 / (4.0 * b_norm * b_norm * (c2 * c2 + d_norm * d_norm).sqrt());
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::Numerical(format!(
            "coupling bound not positive (c1 {c1:e}, c2 {c2:e})"
        )));
    }
    Ok(CouplingStep {
        weight: 0.5 * bound,
        bound,
        c1,
        c2,
        b_norm,
        d_norm,
    })
}

/// Integer vector over the restorative edges whose sign pattern is
/// reproduced by `G_r^T G_r` and whose image `G_r x` lies in `null G_d^T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignWitness {
    x: Vec<BigInt>,
}

impl SignWitness {
    /// Normalizes to coprime integers with the first nonzero entry positive.
    pub fn from_rationals(x: &[BigRational]) -> Result<Self> {
        if x.iter().all(Zero::is_zero) {
            return Err(Error::InvalidWitness("zero vector".into()));
        }
        let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints: Vec<BigInt> = x.iter().map(|v| (v * &lcm).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let first_negative = ints
            .iter()
            .find(|v| !v.is_zero())
            .is_some_and(Signed::is_negative);
        let sign = if first_negative {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        Ok(SignWitness {
            x: ints.iter().map(|v| v / &gcd * &sign).collect(),
        })
    }

    pub fn from_integers(x: Vec<BigInt>) -> Result<Self> {
        let r: Vec<BigRational> = x.into_iter().map(BigRational::from_integer).collect();
        Self::from_rationals(&r)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sign_pattern(&self) -> Vec<i8> {
        self.x.iter().map(sign_of).collect()
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.x
            .iter()
            .cloned()
            .map(BigRational::from_integer)
            .collect()
    }
}

impl fmt::Display for SignWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.x.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn sign_of<T: Signed>(v: &T) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SssReason {
    NotSs(SsReason),
    NoRestorative,
    Exhausted,
    Witness,
}

impl fmt::Display for SssReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SssReason::NotSs(r) => write!(f, "not-SS ({r})"),
            SssReason::NoRestorative => f.write_str("no-restorative-edges"),
            SssReason::Exhausted => f.write_str("all-patterns-infeasible"),
            SssReason::Witness => f.write_str("witness"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SssVerdict {
    pub is_sss: bool,
    pub reason: SssReason,
    /// Indexed by the restorative edges of the input interconnection.
    pub witness: Option<SignWitness>,
    /// Patterns shown infeasible; all of them when the answer is yes.
    pub refuted_patterns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SssOptions {
    /// Largest restorative edge count (after reduction) that will be searched.
    pub budget: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

pub const DEFAULT_BUDGET: usize = 14;

impl Default for SssOptions {
    fn default() -> Self {
        SssOptions {
            budget: DEFAULT_BUDGET,
            jobs: None,
        }
    }
}

/// Number of sign patterns with first nonzero entry positive.
pub fn pattern_count(p: usize) -> u64 {
    (3u64.pow(p as u32) - 1) / 2
}

/// Digits of a pattern index, most significant first. Digit order
/// `0 -> +1, 1 -> 0, 2 -> -1`, so increasing indices list patterns
/// lexicographically with `+1` before `0` before `-1`.
pub fn pattern_from_index(mut k: u64, p: usize) -> Vec<i8> {
    let mut s = vec![0i8; p];
    for i in (0..p).rev() {
        s[i] = match k % 3 {
            0 => 1,
            1 => 0,
            _ => -1,
        };
        k /= 3;
    }
    s
}

fn canonical(pattern: &[i8]) -> bool {
    pattern.iter().find(|&&s| s != 0) == Some(&1)
}

/// Integer matrices of the sign test: `M = G_r^T G_r` and `N = G_d^T G_r`.
struct SignSystem {
    m: Vec<Vec<i64>>,
    n: Vec<Vec<i64>>,
}

impl SignSystem {
    fn new(ic: &Interconnection) -> Result<Self> {
        let gr = incidence(ic.q(), ic.restorative())?;
        let gd = incidence(ic.q(), ic.dissipative())?;
        let p = ic.restorative().len();
        let mut m = vec![vec![0i64; p]; p];
        let mut n = vec![vec![0i64; p]; ic.dissipative().len()];
        for j in 0..p {
            let mut e = vec![0i64; p];
            e[j] = 1;
            let col = gr.apply(&e);
            for (i, v) in gr.apply_transpose(&col).into_iter().enumerate() {
                m[i][j] = v;
            }
            for (i, v) in gd.apply_transpose(&col).into_iter().enumerate() {
                n[i][j] = v;
            }
        }
        Ok(SignSystem { m, n })
    }

    /// Feasibility problem in `z >= 0` with `x_i = s_i (1 + z_i)` on the
    /// support of `s`; strict signs become `>= 1` by homogeneity.
    fn problem<T: lp::Exact>(&self, s: &[i8], minimize: bool) -> Problem<T> {
        let support: Vec<usize> = (0..s.len()).filter(|&i| s[i] != 0).collect();
        let k = support.len();
        let row = |coeffs: &[i64], scale: i64, relation: Relation, base: i64| {
            let mut c = Vec::with_capacity(k);
            let mut offset = 0i64;
            for &j in &support {
                let a = scale * coeffs[j] * i64::from(s[j]);
                c.push(T::from_i64(a));
                offset += a;
            }
            Constraint {
                coeffs: c,
                relation,
                rhs: T::from_i64(base - offset),
            }
        };
        let mut constraints = Vec::new();
        for (i, mi) in self.m.iter().enumerate() {
            if s[i] == 0 {
                constraints.push(row(mi, 1, Relation::Eq, 0));
            } else {
                constraints.push(row(mi, i64::from(s[i]), Relation::Ge, 1));
            }
        }
        for ni in &self.n {
            constraints.push(row(ni, 1, Relation::Eq, 0));
        }
        Problem {
            n_vars: k,
            constraints,
            objective: minimize.then(|| vec![T::one(); k]),
        }
    }

    fn feasible(&self, s: &[i8]) -> bool {
        match lp::solve(&self.problem::<SmallRational>(s, false)) {
            Some(o) => o != Outcome::Infeasible,
            None => lp::solve_exact(&self.problem::<BigRational>(s, false)) != Outcome::Infeasible,
        }
    }

    /// Minimum-`l1` solution for a feasible pattern.
    fn solve(&self, s: &[i8]) -> Option<Vec<BigRational>> {
        let Outcome::Solved(z) = lp::solve_exact(&self.problem::<BigRational>(s, true)) else {
            return None;
        };
        let mut x = vec![BigRational::zero(); s.len()];
        let support = (0..s.len()).filter(|&i| s[i] != 0);
        for (zi, i) in z.into_iter().zip(support) {
            x[i] = (zi + BigRational::one()) * BigRational::from_integer(BigInt::from(s[i]));
        }
        Some(x)
    }
}

/// Decides the strong property by exhausting sign patterns on the reduced
/// interconnection. The first feasible pattern in index order wins, which
/// keeps the witness independent of the number of workers.
pub fn is_sss(ic: &Interconnection, options: SssOptions) -> Result<SssVerdict> {
    let ss = is_ss(ic);
    if !ss.is_ss {
        return Ok(SssVerdict {
            is_sss: false,
            reason: SssReason::NotSs(ss.reason),
            witness: None,
            refuted_patterns: 0,
        });
    }
    let reduced = graphs::reduce(ic);
    let p = reduced.restorative().len();
    if p == 0 {
        return Ok(SssVerdict {
            is_sss: true,
            reason: SssReason::NoRestorative,
            witness: None,
            refuted_patterns: 0,
        });
    }
    if p > options.budget {
        return Err(Error::BudgetExceeded {
            restorative: p,
            budget: options.budget,
        });
    }
    let system = SignSystem::new(&reduced)?;
    let total = 3u64.pow(p as u32);
    let search = || {
        (0..total).into_par_iter().find_first(|&k| {
            let s = pattern_from_index(k, p);
            canonical(&s) && system.feasible(&s)
        })
    };
    let found = match options.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(search),
        None => search(),
    };
    let Some(k) = found else {
        return Ok(SssVerdict {
            is_sss: true,
            reason: SssReason::Exhausted,
            witness: None,
            refuted_patterns: pattern_count(p),
        });
    };
    let s = pattern_from_index(k, p);
    let refuted = (0..k)
        .filter(|&j| canonical(&pattern_from_index(j, p)))
        .count() as u64;
    let x = system
        .solve(&s)
        .ok_or_else(|| Error::Numerical("feasible pattern has no optimum".into()))?;

    // Lift back to the original restorative list; removed edges get zero.
    let pos: BTreeMap<Edge, usize> = reduced
        .restorative()
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i))
        .collect();
    let lifted: Vec<BigRational> = ic
        .restorative()
        .iter()
        .map(|e| pos.get(e).map_or_else(BigRational::zero, |&i| x[i].clone()))
        .collect();
    let witness = SignWitness::from_rationals(&lifted)?;
    debug_assert!(verify_witness(ic, &witness.to_rationals()).unwrap_or(false));
    Ok(SssVerdict {
        is_sss: false,
        reason: SssReason::Witness,
        witness: Some(witness),
        refuted_patterns: refuted,
    })
}

/// Exact values of `G_r x`, `G_r^T G_r x` and `G_d^T G_r x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessImages {
    pub potentials: Vec<BigRational>,
    pub feedback: Vec<BigRational>,
    pub dissipative_mismatch: Vec<BigRational>,
}

pub fn witness_images(ic: &Interconnection, x: &[BigRational]) -> Result<WitnessImages> {
    if x.len() != ic.restorative().len() {
        return Err(Error::DimensionMismatch {
            expected: ic.restorative().len(),
            got: x.len(),
        });
    }
    let gr = incidence(ic.q(), ic.restorative())?;
    let gd = incidence(ic.q(), ic.dissipative())?;
    let potentials = gr.apply(x);
    Ok(WitnessImages {
        feedback: gr.apply_transpose(&potentials),
        dissipative_mismatch: gd.apply_transpose(&potentials),
        potentials,
    })
}

/// Exact check that `x` is a nonzero vector with `sgn(G_r^T G_r x) = sgn(x)`
/// and `G_d^T G_r x = 0`.
pub fn verify_witness(ic: &Interconnection, x: &[BigRational]) -> Result<bool> {
    let img = witness_images(ic, x)?;
    if x.iter().all(Zero::is_zero) {
        return Ok(false);
    }
    let signs_match = x
        .iter()
        .zip(&img.feedback)
        .all(|(a, b)| sign_of(a) == sign_of(b));
    Ok(signs_match && img.dissipative_mismatch.iter().all(Zero::is_zero))
}

/// Laplacians realizing a witness: `R = G_r diag(l) G_r^T` with
/// `l_i = x_i / (G_r^T G_r x)_i` (one where `x_i = 0`), so `R v = v` and
/// `D v = 0` for `v = G_r x` whatever the dissipative weights.
pub fn witness_to_laplacians(
    ic: &Interconnection,
    x: &[BigRational],
    d_weights: &WeightMap,
) -> Result<(WeightedLaplacian, WeightedLaplacian)> {
    if !verify_witness(ic, x)? {
        return Err(Error::InvalidWitness(
            "sign or dissipative-balance condition fails".into(),
        ));
    }
    let img = witness_images(ic, x)?;
    let lambda: Vec<BigRational> = x
        .iter()
        .zip(&img.feedback)
        .map(|(a, b)| {
            if a.is_zero() {
                BigRational::one()
            } else {
                a / b
            }
        })
        .collect();
    let d = laplacian(ic.q(), ic.dissipative(), d_weights)?;
    let r = laplacian(ic.q(), ic.restorative(), &WeightMap::from_exact(lambda)?)?;
    Ok((d, r))
}

/// `R v - v` and `D v` in exact arithmetic for `v = G_r x`; both vanish for a
/// valid witness.
pub fn witness_residuals(
    ic: &Interconnection,
    x: &[BigRational],
    d: &WeightedLaplacian,
    r: &WeightedLaplacian,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let v = witness_images(ic, x)?.potentials;
    let mul = |m: &Vec<Vec<BigRational>>| -> Vec<BigRational> {
        m.iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect()
    };
    let rv: Vec<BigRational> = mul(&r.exact_matrix())
        .into_iter()
        .zip(&v)
        .map(|(a, b)| a - b)
        .collect();
    Ok((rv, mul(&d.exact_matrix())))
}

#[derive(Debug, Clone)]
pub struct FalsifyOptions {
    pub range: WeightRange,
    /// Pairs tried before any random sample.
    pub seeded: Vec<(WeightedLaplacian, WeightedLaplacian)>,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        FalsifyOptions {
            range: WeightRange::new(0.1, 10.0).expect("valid range"),
            seeded: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub d: WeightedLaplacian,
    pub r: WeightedLaplacian,
    pub margin: f64,
    /// Index into the seeded list, or `seeded.len() + k` for random sample k.
    pub trial: usize,
}

/// Looks for a weight pair whose margin is not above `10 tau`.
pub fn falsify_by_sampling(
    ic: &Interconnection,
    trials: usize,
    seed: u64,
    options: &FalsifyOptions,
) -> Result<Option<Counterexample>> {
    let v = is_ss(ic);
    if !v.is_ss {
        return Err(Error::NotSs(v.reason));
    }
    for (i, (d, r)) in options.seeded.iter().enumerate() {
        let rep = spectrum(d, r)?;
        if rep.classify() != MarginClass::Positive {
            return Ok(Some(Counterexample {
                d: d.clone(),
                r: r.clone(),
                margin: rep.margin(),
                trial: i,
            }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..trials {
        let d = laplacian(
            ic.q(),
            ic.dissipative(),
            &sample_weights(&mut rng, ic.dissipative().len(), options.range),
        )?;
        let r = laplacian(
            ic.q(),
            ic.restorative(),
            &sample_weights(&mut rng, ic.restorative().len(), options.range),
        )?;
        let rep = spectrum(&d, &r)?;
        if rep.classify() != MarginClass::Positive {
            return Ok(Some(Counterexample {
                d,
                r,
                margin: rep.margin(),
                trial: options.seeded.len() + k,
            }));
        }
    }
    Ok(None)
}

/// Float view of exact witness entries.
pub fn witness_as_f64(x: &[BigRational]) -> Vec<f64> {
    x.iter().map(rational_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacians::ratio;

    fn ic(q: usize, d: &[(usize, usize)], r: &[(usize, usize)]) -> Interconnection {
        Interconnection::from_pairs(q, d, r).unwrap()
    }

    fn example1() -> Interconnection {
        ic(4, &[(1, 3)], &[(1, 2), (2, 3), (3, 4)])
    }

    fn example2() -> Interconnection {
        ic(4, &[(1, 4), (2, 3)], &[(1, 2), (1, 3), (4, 3)])
    }

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&a| ratio(a, 1)).collect()
    }

    #[test]
    fn ss_verdicts() {
        assert!(is_ss(&example1()).is_ss);
        let v = is_ss(&ic(4, &[], &[(1, 2), (2, 3), (3, 4)]));
        assert_eq!((v.is_ss, v.reason), (false, SsReason::EmptyDissipative));
        let v = is_ss(&ic(4, &[(1, 2)], &[(3, 4)]));
        assert_eq!((v.is_ss, v.reason), (false, SsReason::DisconnectedUnion));
        // disconnection is reported even when dissipation is also missing
        let v = is_ss(&ic(4, &[], &[(3, 4)]));
        assert_eq!(v.reason, SsReason::DisconnectedUnion);
    }

    #[test]
    fn construction_on_a_single_edge() {
        let w = construct_synchronizing_weights(&ic(2, &[(1, 2)], &[])).unwrap();
        assert_eq!(
            w.d.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        assert_eq!(w.r.matrix(), &DMatrix::zeros(2, 2));
        assert!((w.margin - 2.0).abs() < 1e-12);
    }

    #[test]
    fn construction_on_examples() {
        for x in [example1(), example2()] {
            let w = construct_synchronizing_weights(&x).unwrap();
            assert!(w.margin > 0.0);
            let c = w.coupling.expect("restorative graph is connected");
            assert!(c.weight < c.bound);
        }
        let w = construct_synchronizing_weights(&ic(3, &[(1, 2), (2, 3)], &[(1, 3)])).unwrap();
        assert_eq!(w.case, ConstructionCase::Blocks { components: 2 });
    }

    #[test]
    fn construction_rejects_non_ss() {
        assert!(matches!(
            construct_synchronizing_weights(&ic(4, &[(1, 2)], &[(3, 4)])),
            Err(Error::NotSs(SsReason::DisconnectedUnion))
        ));
    }

    #[test]
    fn example1_witness() {
        let v = is_sss(&example1(), SssOptions::default()).unwrap();
        assert!(!v.is_sss);
        let w = v.witness.unwrap();
        assert_eq!(
            w.entries(),
            &[BigInt::from(2), BigInt::from(-1), BigInt::from(1)]
        );
        assert_eq!(w.sign_pattern(), vec![1, -1, 1]);
    }

    #[test]
    fn example1_images() {
        let img = witness_images(&example1(), &ints(&[2, -1, 1])).unwrap();
        assert_eq!(img.potentials, ints(&[2, -3, 2, -1]));
        assert_eq!(img.feedback, ints(&[5, -5, 3]));
        assert!(verify_witness(&example1(), &ints(&[2, -1, 1])).unwrap());
        assert!(!verify_witness(&example1(), &ints(&[1, 1, 1])).unwrap());
        assert!(!verify_witness(&example1(), &ints(&[0, 0, 0])).unwrap());
        assert!(verify_witness(&example1(), &ints(&[1, 1])).is_err());
    }

    #[test]
    fn example1_laplacians() {
        let d_w = WeightMap::uniform(1, 1.0).unwrap();
        let x = ints(&[2, -1, 1]);
        let (d, r) = witness_to_laplacians(&example1(), &x, &d_w).unwrap();
        assert_eq!(
            r.weights().exact_values(),
            vec![ratio(2, 5), ratio(1, 5), ratio(1, 3)]
        );
        let (rv, dv) = witness_residuals(&example1(), &x, &d, &r).unwrap();
        assert!(rv.iter().chain(&dv).all(Zero::is_zero));
        let rep = spectrum(&d, &r).unwrap();
        assert!(rep.margin() <= 10.0 * rep.tau());
    }

    #[test]
    fn example2_is_sss() {
        let v = is_sss(&example2(), SssOptions::default()).unwrap();
        assert!(v.is_sss);
        assert_eq!(v.refuted_patterns, 13);
    }

    #[test]
    fn alternating_four_cycle_is_not_sss() {
        let c4 = ic(4, &[(1, 2), (3, 4)], &[(2, 3), (1, 4)]);
        let v = is_sss(&c4, SssOptions::default()).unwrap();
        let w = v.witness.unwrap();
        assert!(verify_witness(&c4, &w.to_rationals()).unwrap());
    }

    #[test]
    fn non_ss_and_trivial_cases() {
        let v = is_sss(&ic(4, &[(1, 2)], &[(3, 4)]), SssOptions::default()).unwrap();
        assert_eq!(v.reason, SssReason::NotSs(SsReason::DisconnectedUnion));
        assert!(!v.is_sss && v.witness.is_none());
        let v = is_sss(&ic(3, &[(1, 2), (2, 3)], &[]), SssOptions::default()).unwrap();
        assert!(v.is_sss);
        // every restorative edge is also dissipative
        let v = is_sss(&ic(2, &[(1, 2)], &[(1, 2)]), SssOptions::default()).unwrap();
        assert_eq!(v.reason, SssReason::NoRestorative);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = SssOptions {
            budget: 2,
            jobs: None,
        };
        assert_eq!(
            is_sss(&example1(), opts).unwrap_err(),
            Error::BudgetExceeded {
                restorative: 3,
                budget: 2
            }
        );
    }

    #[test]
    fn witness_is_independent_of_worker_count() {
        let base = is_sss(
            &example1(),
            SssOptions {
                budget: 14,
                jobs: Some(1),
            },
        )
        .unwrap();
        for jobs in [2, 4] {
            let v = is_sss(
                &example1(),
                SssOptions {
                    budget: 14,
                    jobs: Some(jobs),
                },
            )
            .unwrap();
            assert_eq!(v, base);
        }
    }

    #[test]
    fn pattern_enumeration() {
        assert_eq!(pattern_from_index(0, 3), vec![1, 1, 1]);
        assert_eq!(pattern_from_index(26, 3), vec![-1, -1, -1]);
        let canon = (0..27)
            .filter(|&k| canonical(&pattern_from_index(k, 3)))
            .count() as u64;
        assert_eq!(canon, pattern_count(3));
    }

    #[test]
    fn witness_normalization() {
        let w = SignWitness::from_rationals(&[ratio(-4, 3), ratio(2, 3), ratio(-2, 3)]).unwrap();
        assert_eq!(
            w.entries(),
            &[BigInt::from(2), BigInt::from(-1), BigInt::from(1)]
        );
        assert!(SignWitness::from_rationals(&[ratio(0, 1)]).is_err());
    }

    #[test]
    fn falsification() {
        let opts = FalsifyOptions::default();
        assert!(falsify_by_sampling(&example2(), 300, 1, &opts)
            .unwrap()
            .is_none());
        assert!(falsify_by_sampling(&ic(2, &[(1, 2)], &[]), 50, 1, &opts)
            .unwrap()
            .is_none());
        let x = ints(&[2, -1, 1]);
        let pair =
            witness_to_laplacians(&example1(), &x, &WeightMap::uniform(1, 1.0).unwrap()).unwrap();
        let opts = FalsifyOptions {
            seeded: vec![pair],
            ..FalsifyOptions::default()
        };
        let found = falsify_by_sampling(&example1(), 10, 1, &opts)
            .unwrap()
            .unwrap();
        assert_eq!(found.trial, 0);
    }
}
