//! Direct simulation of coupled second-order oscillators
//! `M x_i'' + K x_i + b u_i = 0` with `u = D y' + R y`, `y_i = b^T x_i`.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::Interconnection;
use crate::laplacians::{laplacian, sample_weights, WeightMap, WeightRange, WeightedLaplacian};
use crate::linalg::{spectral_norm, symmetric_eigen};
use crate::spectral::{spectrum, MarginClass};

/// Tail deviation below which a run counts as synchronized.
pub const SYNC_TAIL: f64 = 1e-4;
/// Tail deviation above which a run counts as not synchronized.
pub const NO_SYNC_TAIL: f64 = 1e-2;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSystem {
    m: DMatrix<f64>,
    k: DMatrix<f64>,
    b: DVector<f64>,
}

fn check_spd(name: &str, a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let tol = 1e-12 * a.norm().max(1.0);
    let symmetric = (0..n).all(|i| (0..n).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol));
    if !symmetric {
        return Err(Error::InvalidSystem(format!("{name} is not symmetric")));
    }
    if symmetric_eigen(a).0[0] <= 0.0 {
        return Err(Error::InvalidSystem(format!(
            "{name} is not positive definite"
        )));
    }
    Ok(())
}

impl OscillatorSystem {
    pub fn new(m: DMatrix<f64>, k: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::InvalidSystem("order must be positive".into()));
        }
        for (name, a) in [("M", &m), ("K", &k)] {
            if a.shape() != (n, n) {
                return Err(Error::InvalidSystem(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSystem(format!(
                    "{name} has non-finite entries"
                )));
            }
            check_spd(name, a)?;
        }
        if b.iter().all(|v| *v == 0.0) || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSystem("B must be finite and nonzero".into()));
        }
        Ok(OscillatorSystem { m, k, b })
    }

    /// Unit-mass, unit-stiffness scalar oscillator.
    pub fn harmonic() -> Self {
        let one = DMatrix::from_element(1, 1, 1.0);
        OscillatorSystem::new(one.clone(), one, DVector::from_element(1, 1.0)).expect("valid")
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Generalized eigenpairs of `(K, M)` with `M`-orthonormal vectors.
    pub fn modes(&self) -> (Vec<f64>, DMatrix<f64>) {
        let chol = self.m.clone().cholesky().expect("M is positive definite");
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .expect("triangular factor is invertible");
        let a = &l_inv * &self.k * l_inv.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let (vals, y) = symmetric_eigen(&a);
        (vals, l_inv.transpose() * y)
    }
}

/// `rank [K - w^2 M; B^T] = n` for every `w > 0`. The stacked matrix can only
/// drop rank at generalized eigenvalues of `(K, M)`; with a single input
/// this needs each eigenvalue to be simple and its mode to be seen by `B`.
pub fn check_controllability(sys: &OscillatorSystem) -> bool {
    let (vals, vecs) = sys.modes();
    let scale = vals
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let n = vals.len();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && vals[j] - vals[j - 1] <= tol {
            j += 1;
        }
        if j - i > 1 {
            return false;
        }
        let v = vecs.column(i);
        let seen = sys.b.dot(&v).abs();
        if seen <= 1e-9 * sys.b.norm() * v.norm() {
            return false;
        }
        i = j;
    }
    true
}

/// Positions and velocities of every node, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayState {
    pub t: f64,
    pub x: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
}

impl ArrayState {
    pub fn new(x: Vec<DVector<f64>>, v: Vec<DVector<f64>>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: v.len(),
            });
        }
        let s = ArrayState { t: 0.0, x, v };
        if !s.is_finite() {
            return Err(Error::InvalidSimulation("non-finite initial state".into()));
        }
        Ok(s)
    }

    /// Entries uniform in `[-1, 1]` from a seeded generator.
    pub fn random(q: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let x = (0..q).map(|_| draw()).collect();
        let v = (0..q).map(|_| draw()).collect();
        ArrayState { t: 0.0, x, v }
    }

    /// Every node in the same state.
    pub fn uniform(q: usize, x: DVector<f64>, v: DVector<f64>) -> Self {
        ArrayState {
            t: 0.0,
            x: vec![x; q],
            v: vec![v; q],
        }
    }

    pub fn nodes(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.v)
            .all(|z| z.iter().all(|a| a.is_finite()))
    }

    /// Largest pairwise `|x_k - x_l| + |v_k - v_l|`.
    pub fn deviation(&self) -> f64 {
        let q = self.nodes();
        let mut worst = 0.0f64;
        for k in 0..q {
            for l in (k + 1)..q {
                let d = (&self.x[k] - &self.x[l]).norm() + (&self.v[k] - &self.v[l]).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn mean(&self) -> (DVector<f64>, DVector<f64>) {
        let q = self.nodes() as f64;
        let n = self.x.first().map_or(0, DVector::len);
        let sum = |zs: &[DVector<f64>]| zs.iter().fold(DVector::zeros(n), |a, z| a + z) / q;
        (sum(&self.x), sum(&self.v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncTrace {
    pub times: Vec<f64>,
    pub deviations: Vec<f64>,
    /// `y_i = b^T x_i` per node at each sample.
    pub outputs: Vec<Vec<f64>>,
    /// Largest deviation over the last fifth of the horizon.
    pub tail: f64,
    pub controllable: bool,
    pub final_state: ArrayState,
}

impl SyncTrace {
    /// `t,delta,y1,...,yq` rows.
    pub fn to_csv(&self) -> String {
        let q = self.outputs.first().map_or(0, Vec::len);
        let mut out = String::from("t,delta");
        for i in 1..=q {
            let _ = write!(out, ",y{i}");
        }
        out.push('\n');
        for ((t, d), ys) in self.times.iter().zip(&self.deviations).zip(&self.outputs) {
            let _ = write!(out, "{t},{d}");
            for y in ys {
                let _ = write!(out, ",{y}");
            }
            out.push('\n');
        }
        out
    }
}

/// Upper estimate of the largest natural frequency of the coupled array.
pub fn frequency_bound(sys: &OscillatorSystem, d: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
    let m_inv = sys.m.clone().try_inverse().expect("M is positive definite");
    let a = &m_inv * &sys.k;
    let c = &m_inv * &sys.b;
    let cb = c.norm() * sys.b.norm();
    (spectral_norm(&a) + spectral_norm(r) * cb).sqrt() + spectral_norm(d) * cb
}

struct Rhs {
    a: DMatrix<f64>,
    c: DVector<f64>,
    b: DVector<f64>,
    d: DMatrix<f64>,
    r: DMatrix<f64>,
    q: usize,
    n: usize,
}

impl Rhs {
    // State layout: q*n positions, then q*n velocities.
    fn eval(&self, s: &DVector<f64>, out: &mut DVector<f64>) {
        let (q, n) = (self.q, self.n);
        let qn = q * n;
        let mut y = DVector::zeros(q);
        let mut ydot = DVector::zeros(q);
        for i in 0..q {
            y[i] = self.b.dot(&s.rows(i * n, n));
            ydot[i] = self.b.dot(&s.rows(qn + i * n, n));
        }
        let u = &self.d * ydot + &self.r * y;
        for i in 0..q {
            out.rows_mut(i * n, n).copy_from(&s.rows(qn + i * n, n));
            let acc = -(&self.a * s.rows(i * n, n)) - &self.c * u[i];
            out.rows_mut(qn + i * n, n).copy_from(&acc);
        }
    }
}

fn pack(state: &ArrayState, n: usize) -> DVector<f64> {
    let q = state.nodes();
    let mut s = DVector::zeros(2 * q * n);
    for i in 0..q {
        s.rows_mut(i * n, n).copy_from(&state.x[i]);
        s.rows_mut(q * n + i * n, n).copy_from(&state.v[i]);
    }
    s
}

fn unpack(s: &DVector<f64>, q: usize, n: usize, t: f64) -> ArrayState {
    ArrayState {
        t,
        x: (0..q).map(|i| s.rows(i * n, n).into_owned()).collect(),
        v: (0..q)
            .map(|i| s.rows(q * n + i * n, n).into_owned())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    pub horizon: f64,
    pub step: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            horizon: DEFAULT_HORIZON,
            step: DEFAULT_STEP,
        }
    }
}

pub fn simulate(
    sys: &OscillatorSystem,
    ic: &Interconnection,
    d_weights: &WeightMap,
    r_weights: &WeightMap,
    initial: &ArrayState,
    params: SimulationParams,
) -> Result<SyncTrace> {
    let d = laplacian(ic.q(), ic.dissipative(), d_weights)?;
    let r = laplacian(ic.q(), ic.restorative(), r_weights)?;
    simulate_laplacians(sys, &d, &r, initial, params)
}

/// Classical fixed-step RK4 over `[0, horizon]`.
pub fn simulate_laplacians(
    sys: &OscillatorSystem,
    d: &WeightedLaplacian,
    r: &WeightedLaplacian,
    initial: &ArrayState,
    params: SimulationParams,
) -> Result<SyncTrace> {
    let SimulationParams { horizon, step: h } = params;
    let q = d.q();
    let n = sys.order();
    if r.q() != q || initial.nodes() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            got: if r.q() != q { r.q() } else { initial.nodes() },
        });
    }
    if initial.x.iter().chain(&initial.v).any(|z| z.len() != n) {
        return Err(Error::InvalidSimulation(format!(
            "node states must have length {n}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSimulation(format!(
            "step {h} must be positive"
        )));
    }
    if !(horizon.is_finite() && horizon >= 100.0 * h) {
        return Err(Error::InvalidSimulation(format!(
            "horizon {horizon} must be at least 100 steps"
        )));
    }
    let omega = frequency_bound(sys, d.matrix(), r.matrix());
    if h > 0.1 / omega {
        return Err(Error::InvalidSimulation(format!(
            "step {h} exceeds stability limit {:e} (frequency bound {omega:e})",
            0.1 / omega
        )));
    }

    let m_inv = sys.m.clone().try_inverse().expect("M is positive definite");
    let rhs = Rhs {
        a: &m_inv * &sys.k,
        c: &m_inv * &sys.b,
        b: sys.b.clone(),
        d: d.matrix().clone(),
        r: r.matrix().clone(),
        q,
        n,
    };
    let steps = (horizon / h).round() as usize;
    let every = ((horizon / (1000.0 * h)).round() as usize).max(1);
    let tail_from = 0.8 * horizon;

    let mut s = pack(initial, n);
    let dim = s.len();
    let (mut k1, mut k2, mut k3, mut k4) = (
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
    );
    let mut trace = SyncTrace {
        times: Vec::new(),
        deviations: Vec::new(),
        outputs: Vec::new(),
        tail: 0.0,
        controllable: check_controllability(sys),
        final_state: initial.clone(),
    };
    let record = |s: &DVector<f64>, t: f64, trace: &mut SyncTrace| {
        let st = unpack(s, q, n, t);
        let dev = st.deviation();
        trace.times.push(t);
        trace.deviations.push(dev);
        trace
            .outputs
            .push(st.x.iter().map(|x| sys.b.dot(x)).collect());
        if t >= tail_from - 0.5 * h {
            trace.tail = trace.tail.max(dev);
        }
    };
    record(&s, 0.0, &mut trace);
    for step in 1..=steps {
        rhs.eval(&s, &mut k1);
        rhs.eval(&(&s + &k1 * (0.5 * h)), &mut k2);
        rhs.eval(&(&s + &k2 * (0.5 * h)), &mut k3);
        rhs.eval(&(&s + &k3 * h), &mut k4);
        s += (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        let t = step as f64 * h;
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { time: t });
        }
        if step % every == 0 || step == steps {
            record(&s, t, &mut trace);
        }
    }
    trace.final_state = unpack(&s, q, n, steps as f64 * h);
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncClass {
    Synchronized,
    NotSynchronized,
    Undecided,
}

impl fmt::Display for SyncClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyncClass::Synchronized => "synchronized",
            SyncClass::NotSynchronized => "not synchronized",
            SyncClass::Undecided => "undecided",
        })
    }
}

pub fn classify_tail(tail: f64) -> SyncClass {
    if tail < SYNC_TAIL {
        SyncClass::Synchronized
    } else if tail > NO_SYNC_TAIL {
        SyncClass::NotSynchronized
    } else {
        SyncClass::Undecided
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckEntry {
    pub margin: f64,
    pub margin_class: MarginClass,
    pub tail: f64,
    pub sync_class: SyncClass,
}

impl CrosscheckEntry {
    /// `None` when the tail falls between the two thresholds.
    pub fn agrees(&self) -> Option<bool> {
        match (self.margin_class, self.sync_class) {
            (MarginClass::Negative, _) => Some(false),
            (_, SyncClass::Undecided) => None,
            (MarginClass::Positive, s) => Some(s == SyncClass::Synchronized),
            (MarginClass::Borderline, s) => Some(s == SyncClass::NotSynchronized),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub entries: Vec<CrosscheckEntry>,
}

impl CrosscheckReport {
    /// Counts indexed by margin class (positive, borderline, negative) and
    /// sync class (synchronized, not synchronized, undecided).
    pub fn matrix(&self) -> [[usize; 3]; 3] {
        let mut m = [[0; 3]; 3];
        for e in &self.entries {
            let row = match e.margin_class {
                MarginClass::Positive => 0,
                MarginClass::Borderline => 1,
                MarginClass::Negative => 2,
            };
            let col = match e.sync_class {
                SyncClass::Synchronized => 0,
                SyncClass::NotSynchronized => 1,
                SyncClass::Undecided => 2,
            };
            m[row][col] += 1;
        }
        m
    }

    pub fn agreements(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.agrees() == Some(true))
            .count()
    }

    pub fn disagreements(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.agrees() == Some(false))
            .count()
    }

    pub fn all_agree(&self) -> bool {
        self.entries.iter().all(|e| e.agrees() == Some(true))
    }
}

#[derive(Debug, Clone)]
pub struct CrosscheckOptions {
    pub d_range: WeightRange,
    pub r_range: WeightRange,
    pub params: SimulationParams,
    /// Pairs run before the sampled ones.
    pub seeded: Vec<(WeightedLaplacian, WeightedLaplacian)>,
}

impl Default for CrosscheckOptions {
    fn default() -> Self {
        CrosscheckOptions {
            d_range: WeightRange::new(1.0, 2.0).expect("valid range"),
            r_range: WeightRange::new(8.0, 16.0).expect("valid range"),
            params: SimulationParams::default(),
            seeded: Vec::new(),
        }
    }
}

fn crosscheck_pair(
    sys: &OscillatorSystem,
    d: &WeightedLaplacian,
    r: &WeightedLaplacian,
    seed: u64,
    params: SimulationParams,
) -> Result<CrosscheckEntry> {
    let rep = spectrum(d, r)?;
    let initial = ArrayState::random(d.q(), sys.order(), seed);
    let trace = simulate_laplacians(sys, d, r, &initial, params)?;
    Ok(CrosscheckEntry {
        margin: rep.margin(),
        margin_class: rep.classify(),
        tail: trace.tail,
        sync_class: classify_tail(trace.tail),
    })
}

/// Compares the sign of the spectral margin with simulated synchronization
/// for the seeded pairs and then `trials` sampled weight pairs.
pub fn verdict_crosscheck(
    sys: &OscillatorSystem,
    ic: &Interconnection,
    trials: usize,
    seed: u64,
    options: &CrosscheckOptions,
) -> Result<CrosscheckReport> {
    use rayon::prelude::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = options.seeded.clone();
    for _ in 0..trials {
        let dw = sample_weights(&mut rng, ic.dissipative().len(), options.d_range);
        let rw = sample_weights(&mut rng, ic.restorative().len(), options.r_range);
        pairs.push((
            laplacian(ic.q(), ic.dissipative(), &dw)?,
            laplacian(ic.q(), ic.restorative(), &rw)?,
        ));
    }
    let entries = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (d, r))| crosscheck_pair(sys, d, r, seed.wrapping_add(i as u64), options.params))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrosscheckReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    fn ic(q: usize, d: &[(usize, usize)], r: &[(usize, usize)]) -> Interconnection {
        Interconnection::from_pairs(q, d, r).unwrap()
    }

    // Rank of the stacked matrix at w^2 = mu via singular values.
    fn stacked_rank(sys: &OscillatorSystem, mu: f64) -> usize {
        let n = sys.order();
        let top = sys.k() - sys.m() * mu;
        let mut s = DMatrix::zeros(n + 1, n);
        s.view_mut((0, 0), (n, n)).copy_from(&top);
        s.row_mut(n).copy_from(&sys.b().transpose());
        let sv = s.singular_values();
        let tol = 1e-9 * sv.max().max(1.0);
        sv.iter().filter(|v| **v > tol).count()
    }

    #[test]
    fn controllability_examples() {
        assert!(check_controllability(&OscillatorSystem::harmonic()));
        let eye = DMatrix::identity(2, 2);
        let s = OscillatorSystem::new(eye.clone(), eye.clone(), DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        assert!(!check_controllability(&s));
        assert_eq!(stacked_rank(&s, 1.0), 1);
        let s = OscillatorSystem::new(
            eye,
            mat(2, &[1.0, 0.0, 0.0, 2.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap();
        assert!(check_controllability(&s));
        assert_eq!(stacked_rank(&s, 1.0), 2);
        assert_eq!(stacked_rank(&s, 2.0), 2);
    }

    #[test]
    fn controllability_matches_rank_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(1..=3);
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = &g * g.transpose() + DMatrix::identity(n, n);
            let k = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| (i + 1) as f64));
            let b = DVector::from_fn(n, |_, _| f64::from(rng.random_range(-1i32..=1)));
            let Ok(sys) = OscillatorSystem::new(m, k, b) else {
                continue;
            };
            let (mus, _) = sys.modes();
            let oracle = mus.iter().all(|&mu| stacked_rank(&sys, mu) == n);
            assert_eq!(check_controllability(&sys), oracle);
        }
    }

    #[test]
    fn invalid_systems() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let neg = DMatrix::from_element(1, 1, -1.0);
        assert!(OscillatorSystem::new(neg, one.clone(), DVector::from_element(1, 1.0)).is_err());
        assert!(OscillatorSystem::new(one.clone(), one, DVector::from_element(1, 0.0)).is_err());
    }

    #[test]
    fn synchronization_manifold_is_invariant() {
        let x = ic(4, &[(1, 3)], &[(1, 2), (2, 3), (3, 4)]);
        let init = ArrayState::uniform(
            4,
            DVector::from_element(1, 0.3),
            DVector::from_element(1, -0.7),
        );
        let tr = simulate(
            &OscillatorSystem::harmonic(),
            &x,
            &WeightMap::uniform(1, 1.0).unwrap(),
            &WeightMap::uniform(3, 1.0).unwrap(),
            &init,
            SimulationParams {
                horizon: 20.0,
                step: 1e-3,
            },
        )
        .unwrap();
        assert!(tr.deviations.iter().all(|d| *d <= 1e-10));
    }

    #[test]
    fn two_node_dissipative_pair_synchronizes() {
        let x = ic(2, &[(1, 2)], &[]);
        let tr = simulate(
            &OscillatorSystem::harmonic(),
            &x,
            &WeightMap::uniform(1, 1.0).unwrap(),
            &WeightMap::new(vec![]).unwrap(),
            &ArrayState::random(2, 1, 1),
            SimulationParams::default(),
        )
        .unwrap();
        assert!(tr.tail < SYNC_TAIL, "tail {}", tr.tail);
        assert_eq!(tr.times.len(), 1001);
        assert_eq!(tr.to_csv().lines().next(), Some("t,delta,y1,y2"));
    }

    #[test]
    fn uncoupled_energy_is_conserved() {
        let sys = OscillatorSystem::new(
            mat(2, &[2.0, 0.5, 0.5, 1.0]),
            mat(2, &[3.0, -1.0, -1.0, 2.0]),
            DVector::from_vec(vec![1.0, 0.5]),
        )
        .unwrap();
        let init = ArrayState::random(3, 2, 9);
        let d = laplacian(3, &[], &WeightMap::new(vec![]).unwrap()).unwrap();
        let params = SimulationParams {
            horizon: 10.0,
            step: 1e-3,
        };
        let tr = simulate_laplacians(&sys, &d, &d, &init, params).unwrap();
        let energy = |x: &DVector<f64>, v: &DVector<f64>| {
            0.5 * v.dot(&(sys.m() * v)) + 0.5 * x.dot(&(sys.k() * x))
        };
        for i in 0..3 {
            let e0 = energy(&init.x[i], &init.v[i]);
            let e1 = energy(&tr.final_state.x[i], &tr.final_state.v[i]);
            assert!(((e1 - e0) / e0).abs() <= 1e-6);
        }
    }

    #[test]
    fn mean_mode_follows_the_uncoupled_oscillator() {
        let x = ic(4, &[(1, 4), (2, 3)], &[(1, 2), (1, 3), (3, 4)]);
        let sys = OscillatorSystem::harmonic();
        let init = ArrayState::random(4, 1, 5);
        let params = SimulationParams {
            horizon: 10.0,
            step: 1e-3,
        };
        let tr = simulate(
            &sys,
            &x,
            &WeightMap::new(vec![1.3, 0.7]).unwrap(),
            &WeightMap::new(vec![2.0, 0.5, 1.1]).unwrap(),
            &init,
            params,
        )
        .unwrap();
        let (mx, mv) = init.mean();
        let single = ic(2, &[(1, 2)], &[]);
        let alone = simulate(
            &sys,
            &single,
            &WeightMap::uniform(1, 1.0).unwrap(),
            &WeightMap::new(vec![]).unwrap(),
            &ArrayState::uniform(2, mx, mv),
            params,
        )
        .unwrap();
        let (fx, fv) = tr.final_state.mean();
        let resid = (&fx - &alone.final_state.x[0]).norm() + (&fv - &alone.final_state.v[0]).norm();
        assert!(resid <= 1e-6, "residual {resid}");
    }

    #[test]
    fn step_and_horizon_are_checked() {
        let x = ic(2, &[(1, 2)], &[]);
        let run = |h: f64, t: f64| {
            simulate(
                &OscillatorSystem::harmonic(),
                &x,
                &WeightMap::uniform(1, 1.0).unwrap(),
                &WeightMap::new(vec![]).unwrap(),
                &ArrayState::random(2, 1, 1),
                SimulationParams {
                    horizon: t,
                    step: h,
                },
            )
        };
        assert!(matches!(run(0.0, 1.0), Err(Error::InvalidSimulation(_))));
        assert!(matches!(run(1e-3, 0.05), Err(Error::InvalidSimulation(_))));
        assert!(matches!(run(0.5, 100.0), Err(Error::InvalidSimulation(_))));
    }
}
