//! Dense two-phase simplex over exact rationals.
//!
//! Variables are nonnegative. Pivoting follows Bland's rule, so the method
//! terminates and is deterministic. The solver is generic over [`Exact`] so
//! the common case runs on `Ratio<i128>` with checked arithmetic; an overflow
//! surfaces as `None` and callers retry on `BigRational`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

pub type Rational = BigRational;
pub(crate) type SmallRational = Ratio<i128>;

pub trait Exact: Clone + PartialOrd + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn to_big(&self) -> BigRational;
}

impl Exact for SmallRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(i128::from(v))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Exact for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `minimize objective · x` subject to the constraints and `x >= 0`. Without
/// an objective the solver stops after establishing feasibility.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub n_vars: usize,
    pub constraints: Vec<Constraint<T>>,
    pub objective: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Infeasible,
    Unbounded,
    /// A basic feasible point; optimal when an objective was given.
    Solved(Vec<T>),
}

struct Tableau<T> {
    rows: Vec<Vec<T>>, // each row: columns then rhs
    cost: Vec<T>,      // reduced costs then -objective value
    basis: Vec<usize>,
    n_cols: usize,
}

impl<T: Exact> Tableau<T> {
    fn rhs(&self, r: usize) -> &T {
        &self.rows[r][self.n_cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) -> Option<()> {
        let p = self.rows[pr][pc].clone();
        if p != T::one() {
            for v in self.rows[pr].iter_mut() {
                if !v.is_zero() {
                    *v = v.div(&p)?;
                }
            }
        }
        let pivot_row = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            eliminate(row, &pivot_row, pc)?;
        }
        eliminate(&mut self.cost, &pivot_row, pc)?;
        self.basis[pr] = pc;
        Some(())
    }

    /// Runs Bland's rule over the columns allowed by `allowed`. Returns
    /// `Some(false)` when unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> Option<bool> {
        loop {
            let entering = (0..self.n_cols).find(|&c| allowed[c] && self.cost[c].is_negative());
            let Some(pc) = entering else {
                return Some(true);
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][pc];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r).div(a)?;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        if ratio < bv || (ratio == bv && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
            let Some((pr, _)) = best else {
                return Some(false);
            };
            self.pivot(pr, pc)?;
        }
    }
}

fn eliminate<T: Exact>(row: &mut [T], pivot_row: &[T], pc: usize) -> Option<()> {
    let factor = row[pc].clone();
    if factor.is_zero() {
        return Some(());
    }
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if p.is_zero() {
            continue;
        }
        *v = v.sub(&factor.mul(p)?)?;
    }
    Some(())
}

/// Solves `problem`; `None` means the scalar type overflowed.
pub fn solve<T: Exact>(problem: &Problem<T>) -> Option<Outcome<T>> {
    let n = problem.n_vars;
    let m = problem.constraints.len();

    // Normalize to nonnegative right-hand sides.
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::with_capacity(m);
    for c in &problem.constraints {
        assert_eq!(c.coeffs.len(), n, "constraint width");
        if c.rhs.is_negative() {
            let coeffs = c
                .coeffs
                .iter()
                .map(|v| T::zero().sub(v))
                .collect::<Option<Vec<_>>>()?;
            let relation = match c.relation {
                Relation::Eq => Relation::Eq,
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
            };
            rows.push((coeffs, relation, T::zero().sub(&c.rhs)?));
        } else {
            rows.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
        }
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let n_cols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        cost: vec![T::zero(); n_cols + 1],
        basis: vec![0; m],
        n_cols,
    };
    let mut slack = n;
    let mut art = art_start;
    for (r, (coeffs, relation, rhs)) in rows.into_iter().enumerate() {
        let mut row = coeffs;
        row.resize(n_cols + 1, T::zero());
        row[n_cols] = rhs;
        match relation {
            Relation::Le => {
                row[slack] = T::one();
                tab.basis[r] = slack;
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = T::zero().sub(&T::one())?;
                slack += 1;
                row[art] = T::one();
                tab.basis[r] = art;
                art += 1;
            }
            Relation::Eq => {
                row[art] = T::one();
                tab.basis[r] = art;
                art += 1;
            }
        }
        tab.rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    for c in art_start..n_cols {
        tab.cost[c] = T::one();
    }
    for r in 0..m {
        if tab.basis[r] >= art_start {
            let row = tab.rows[r].clone();
            for (v, p) in tab.cost.iter_mut().zip(&row) {
                *v = v.sub(p)?;
            }
        }
    }
    let all = vec![true; n_cols];
    tab.optimize(&all)?;
    if !tab.cost[n_cols].is_zero() {
        return Some(Outcome::Infeasible);
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= art_start {
            match (0..art_start).find(|&c| !tab.rows[r][c].is_zero()) {
                Some(c) => {
                    tab.pivot(r, c)?;
                    r += 1;
                }
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    let allowed: Vec<bool> = (0..n_cols).map(|c| c < art_start).collect();
    if let Some(objective) = &problem.objective {
        assert_eq!(objective.len(), n, "objective width");
        tab.cost = vec![T::zero(); n_cols + 1];
        tab.cost[..n].clone_from_slice(objective);
        for r in 0..tab.rows.len() {
            let b = tab.basis[r];
            let factor = tab.cost[b].clone();
            if factor.is_zero() {
                continue;
            }
            let row = tab.rows[r].clone();
            for (v, p) in tab.cost.iter_mut().zip(&row) {
                if !p.is_zero() {
                    *v = v.sub(&factor.mul(p)?)?;
                }
            }
        }
        if !tab.optimize(&allowed)? {
            return Some(Outcome::Unbounded);
        }
    }

    let mut x = vec![T::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r).clone();
        }
    }
    Some(Outcome::Solved(x))
}

/// Solves on `Ratio<i128>` first and falls back to arbitrary precision on
/// overflow.
pub fn solve_exact(problem: &Problem<BigRational>) -> Outcome<BigRational> {
    if let Some(small) = to_small(problem) {
        if let Some(out) = solve(&small) {
            return match out {
                Outcome::Infeasible => Outcome::Infeasible,
                Outcome::Unbounded => Outcome::Unbounded,
                Outcome::Solved(x) => Outcome::Solved(x.iter().map(Exact::to_big).collect()),
            };
        }
    }
    solve(problem).expect("arbitrary-precision simplex cannot overflow")
}

fn to_small_value(v: &BigRational) -> Option<SmallRational> {
    let n: i128 = v.numer().try_into().ok()?;
    let d: i128 = v.denom().try_into().ok()?;
    Some(Ratio::new(n, d))
}

fn to_small(problem: &Problem<BigRational>) -> Option<Problem<SmallRational>> {
    let conv = |v: &[BigRational]| v.iter().map(to_small_value).collect::<Option<Vec<_>>>();
    let constraints = problem
        .constraints
        .iter()
        .map(|c| {
            Some(Constraint {
                coeffs: conv(&c.coeffs)?,
                relation: c.relation,
                rhs: to_small_value(&c.rhs)?,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    let objective = match &problem.objective {
        Some(o) => Some(conv(o)?),
        None => None,
    };
    Some(Problem {
        n_vars: problem.n_vars,
        constraints,
        objective,
    })
}
