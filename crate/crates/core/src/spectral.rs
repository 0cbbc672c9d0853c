//! Spectrum of `D + jR` and the real part of its second eigenvalue.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::laplacians::{tau_eig, WeightedLaplacian};
use crate::linalg::{complex_eigen, null_space, range_basis, symmetric_eigen, C64};

/// Eigenpairs of `D + jR`, sorted by real part with near-ties broken by
/// imaginary part.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    eigenvalues: Vec<C64>,
    eigenvectors: DMatrix<C64>,
    tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginClass {
    Positive,
    Borderline,
    /// Impossible for laplacian pairs; indicates an eigensolver problem.
    Negative,
}

impl fmt::Display for MarginClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarginClass::Positive => "positive",
            MarginClass::Borderline => "borderline",
            MarginClass::Negative => "negative",
        })
    }
}

impl SpectralReport {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    /// Real part of the second eigenvalue; zero when `q < 2`.
    pub fn lambda2_real(&self) -> f64 {
        self.eigenvalues.get(1).map_or(0.0, |z| z.re)
    }

    pub fn margin(&self) -> f64 {
        self.lambda2_real()
    }

    /// Eigenvalue tolerance used for this pair.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn classify(&self) -> MarginClass {
        classify_margin(self.margin(), self.tau)
    }

    pub fn min_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// `re,im` rows in sorted order followed by a `margin,<value>` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for z in &self.eigenvalues {
            let _ = writeln!(out, "{},{}", clean(z.re), clean(z.im));
        }
        let _ = writeln!(out, "margin,{}", clean(self.margin()));
        out
    }
}

// Avoid printing "-0".
fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

pub fn classify_margin(margin: f64, tau: f64) -> MarginClass {
    if margin > 10.0 * tau {
        MarginClass::Positive
    } else if margin < -10.0 * tau {
        MarginClass::Negative
    } else {
        MarginClass::Borderline
    }
}

/// Eigenvalue tolerance for the pair: `1e-9 * sqrt(|D|_F^2 + |R|_F^2)`.
pub fn pair_tau(d: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
    tau_eig((d.norm_squared() + r.norm_squared()).sqrt())
}

pub fn spectrum(d: &WeightedLaplacian, r: &WeightedLaplacian) -> Result<SpectralReport> {
    spectrum_of(d.matrix(), r.matrix())
}

/// As [`spectrum`] on raw matrices; no laplacian validation is done.
pub fn spectrum_of(d: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<SpectralReport> {
    check_pair_dims(d, r)?;
    let q = d.nrows();
    let a = DMatrix::from_fn(q, q, |i, j| C64::new(d[(i, j)], r[(i, j)]));
    let (vals, vecs) = complex_eigen(&a)?;
    let tau = pair_tau(d, r);
    let order = sorted_order(&vals, tau);
    Ok(SpectralReport {
        eigenvalues: order.iter().map(|&i| vals[i]).collect(),
        eigenvectors: DMatrix::from_fn(q, q, |row, c| vecs[(row, order[c])]),
        tau,
    })
}

fn check_pair_dims(d: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<()> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d.nrows(),
            got: d.ncols(),
        });
    }
    if r.shape() != d.shape() {
        return Err(Error::DimensionMismatch {
            expected: d.nrows(),
            got: r.nrows(),
        });
    }
    Ok(())
}

// Sort by real part, then reorder each run of real parts within `tau` of
// its neighbour by imaginary part.
fn sorted_order(vals: &[C64], tau: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .re
            .total_cmp(&vals[b].re)
            .then(vals[a].im.total_cmp(&vals[b].im))
    });
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && vals[order[end]].re - vals[order[end - 1]].re <= tau {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| vals[a].im.total_cmp(&vals[b].im).then(a.cmp(&b)));
        start = end;
    }
    order
}

fn check_psd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let tol = tau_eig(m.norm()).max(1e-12);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidLaplacian(format!("{name} is not symmetric")));
            }
        }
    }
    if m.nrows() > 0 && symmetric_eigen(m).0[0] < -tol {
        return Err(Error::InvalidLaplacian(format!(
            "{name} is not positive semidefinite"
        )));
    }
    Ok(())
}

/// No eigenvalue of `D + jR` lies left of `-tau`. Both inputs must be
/// symmetric positive semidefinite.
pub fn lhp_free(d: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<bool> {
    check_pair_dims(d, r)?;
    check_psd("D", d)?;
    check_psd("R", r)?;
    let report = spectrum_of(d, r)?;
    Ok(report.min_real() >= -report.tau())
}

/// An eigenvector of `R` in `null D` orthogonal to the all-ones vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction {
    /// Unit vector; real because `R` is symmetric.
    pub vector: DVector<f64>,
    pub eigenvalue: f64,
    pub d_residual: f64,
    pub r_residual: f64,
    pub ones_component: f64,
}

impl Obstruction {
    pub fn to_complex(&self) -> DVector<C64> {
        self.vector.map(|v| C64::new(v, 0.0))
    }
}

/// Searches `null D` minus the span of the all-ones vector for an
/// eigenvector of `R`, independently of the complex eigensolver.
pub fn eigenvector_obstruction(
    d: &WeightedLaplacian,
    r: &WeightedLaplacian,
) -> Result<Option<Obstruction>> {
    eigenvector_obstruction_of(d.matrix(), r.matrix())
}

pub fn eigenvector_obstruction_of(
    d: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<Option<Obstruction>> {
    check_pair_dims(d, r)?;
    let q = d.nrows();
    if q < 2 {
        return Ok(None);
    }
    let tau = pair_tau(d, r).max(f64::MIN_POSITIVE);

    let (dvals, dvecs) = symmetric_eigen(d);
    let keep: Vec<usize> = (0..q).filter(|&i| dvals[i].abs() <= tau).collect();
    let null_d = DMatrix::from_fn(q, keep.len(), |row, c| dvecs[(row, keep[c])]);
    let ones = DVector::from_element(q, 1.0 / (q as f64).sqrt());
    let projected = &null_d - &ones * (ones.transpose() * &null_d);
    let mut s = range_basis(&projected, 1e-6);

    // Largest R-invariant subspace of span(s): drop directions that R maps
    // outside span(s) until nothing changes.
    loop {
        if s.ncols() == 0 {
            return Ok(None);
        }
        let rs = r * &s;
        let leak = &rs - &s * (s.transpose() * &rs);
        let keep = null_space(&leak, tau.max(1e-9 * r.norm()));
        if keep.ncols() == s.ncols() {
            break;
        }
        s = range_basis(&(&s * keep), 1e-6);
    }

    let small = s.transpose() * r * &s;
    let small = (&small + small.transpose()) * 0.5;
    let (vals, vecs) = symmetric_eigen(&small);
    let mut best: Option<Obstruction> = None;
    for (k, &lambda) in vals.iter().enumerate() {
        let mut z = &s * vecs.column(k);
        let n = z.norm();
        if n == 0.0 {
            continue;
        }
        z /= n;
        // First nonzero entry positive for a deterministic direction.
        if let Some(first) = z.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                z = -z;
            }
        }
        let cand = Obstruction {
            eigenvalue: lambda,
            d_residual: (d * &z).norm(),
            r_residual: (r * &z - &z * lambda).norm(),
            ones_component: z.sum().abs(),
            vector: z,
        };
        let ok = cand.d_residual <= tau
            && cand.r_residual <= tau
            && cand.ones_component <= tau * (q as f64).sqrt();
        if ok {
            best = Some(cand);
            break;
        }
    }
    Ok(best)
}
