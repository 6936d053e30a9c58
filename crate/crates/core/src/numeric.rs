//! Dense complex Hermitian linear algebra under an explicit tolerance policy.

use std::ops::{Add, Mul, Neg, Range, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Largest absolute entry.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_norm(&(m - m.adjoint()))
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A self-adjoint element of `B(Cⁿ)`.
///
/// The stored matrix is always exactly Hermitian: inputs within `eps_proj`
/// of Hermitian are replaced by `(A + A*)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let residual = hermitian_residual(&m);
        if !(residual <= tol.eps_proj) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    /// Symmetrizes unconditionally. Only for matrices that are Hermitian up
    /// to rounding by construction.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m: symmetrize(&m) }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(m, &ToleranceConfig::default())
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            m: CMatrix::from_fn(
                n,
                n,
                |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO },
            ),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Self::identity(n).scale(c)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m.map(|z| z * c),
        }
    }

    /// `U x U*` for any square `U` of matching size.
    pub fn congruence(&self, u: &CMatrix) -> Self {
        Self::from_raw(u * &self.m * u.adjoint())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_raw(&self.m + &other.m))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_raw(&self.m - &other.m))
    }

    /// Max-norm distance; infinite on dimension mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_norm(&(&self.m - &other.m))
    }

    pub fn approx_eq(&self, other: &Self, tol: &ToleranceConfig) -> bool {
        self.max_diff(other) <= tol.eps_recon
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Max-norm of the (not necessarily Hermitian) product `self · other`.
    pub fn product_norm(&self, other: &Self) -> f64 {
        max_norm(&(&self.m * &other.m))
    }

    pub fn max_abs(&self) -> f64 {
        max_norm(&self.m)
    }

    pub fn is_scalar(&self, tol: &ToleranceConfig) -> Option<f64> {
        let n = self.dim();
        if n == 0 {
            return None;
        }
        let c = self.trace() / n as f64;
        (self.max_diff(&Self::scalar(n, c)) <= tol.eps_proj).then_some(c)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_raw(&self.m + &rhs.m)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_raw(&self.m - &rhs.m)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, c: f64) -> HermitianMatrix {
        self.scale(c)
    }
}

pub(crate) fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Spectral decomposition `x = V diag(λ) V*` with eigenvalues ascending and
/// grouped into clusters of width at most `eps_eig` between neighbours.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
    pub clusters: Vec<Range<usize>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Mean eigenvalue of a cluster (all members have multiplicity one, so
    /// this is the rank-weighted mean).
    pub fn cluster_value(&self, c: usize) -> f64 {
        let r = self.clusters[c].clone();
        let len = r.len() as f64;
        self.eigenvalues[r].iter().sum::<f64>() / len
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.dim();
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.eigenvalues[i], 0.0)
            } else {
                ZERO
            }
        });
        HermitianMatrix::from_raw(&self.vectors * d * self.vectors.adjoint())
    }

    /// Orthonormal basis of the span of the first `k` eigenvectors.
    pub fn leading_columns(&self, k: usize) -> CMatrix {
        self.vectors.columns(0, k).into_owned()
    }
}

/// Hermitian eigensolver with deterministic output.
///
/// Eigenvalues come back ascending. Each eigenvector is rotated so that its
/// first component of modulus above `eps_proj` is real and positive; columns
/// with bitwise-equal eigenvalues are ordered by the index of that
/// component.
pub fn eigh(x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<EigenSystem> {
    let n = x.dim();
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: vec![],
            vectors: CMatrix::zeros(0, 0),
            clusters: vec![],
        });
    }
    let budget = 1000 * n.max(8);
    let se = SymmetricEigen::try_new(x.matrix().clone(), f64::EPSILON, budget)
        .ok_or(Error::NoConvergence)?;
    if se.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence);
    }

    let mut cols: Vec<(f64, usize, CVector)> = (0..n)
        .map(|i| {
            let (lead, v) = normalize_phase(se.eigenvectors.column(i).into_owned(), tol.eps_proj);
            (se.eigenvalues[i], lead, v)
        })
        .collect();
    cols.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let eigenvalues: Vec<f64> = cols.iter().map(|c| c.0).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, (_, _, v)) in cols.iter().enumerate() {
        vectors.set_column(j, v);
    }
    let clusters = cluster_sorted(&eigenvalues, tol.eps_eig);
    Ok(EigenSystem {
        eigenvalues,
        vectors,
        clusters,
    })
}

fn normalize_phase(mut v: CVector, threshold: f64) -> (usize, CVector) {
    let lead = v.iter().position(|z| z.norm() > threshold).unwrap_or(0);
    let z = v[lead];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        v *= phase;
        // the leading component is real by construction; drop rounding noise
        v[lead] = C64::new(v[lead].re, 0.0);
    }
    (lead, v)
}

/// Splits an ascending list into maximal runs whose consecutive gaps are at
/// most `eps`.
pub fn cluster_sorted(values: &[f64], eps: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > eps {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

pub fn min_eigenvalue(x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<f64> {
    let es = eigh(x, tol)?;
    Ok(es.eigenvalues.first().copied().unwrap_or(0.0))
}

/// Membership in `M₊`: smallest eigenvalue at least `-eps_proj`.
pub fn is_psd(x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<bool> {
    Ok(min_eigenvalue(x, tol)? >= -tol.eps_proj)
}

/// An orthogonal projection, stored both as a matrix and as an orthonormal
/// basis of its range.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: CMatrix,
    basis: CMatrix,
}

impl PartialEq for Projection {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Projection {
    pub fn zero(n: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(n, n),
            basis: CMatrix::zeros(n, 0),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
            basis: CMatrix::identity(n, n),
        }
    }

    /// Builds the projection onto the span of the given orthonormal columns.
    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        let matrix = symmetrize(&(&basis * basis.adjoint()));
        Self { matrix, basis }
    }

    /// Validates an explicit matrix: Hermitian, idempotent within
    /// `eps_proj`, and with trace within 0.1 of an integer.
    pub fn from_matrix(m: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let h = HermitianMatrix::new(m, tol)?;
        let p = h.matrix();
        let idem = max_norm(&(p * p - p));
        if idem > tol.eps_proj {
            return Err(Error::NotProjection(format!(
                "max |P² - P| = {idem:e} exceeds {:e}",
                tol.eps_proj
            )));
        }
        let trace = h.trace();
        let rank = trace.round();
        if (trace - rank).abs() > 0.1 {
            return Err(Error::NotProjection(format!(
                "trace {trace} is not an integer"
            )));
        }
        let es = eigh(&h, tol)?;
        let n = h.dim();
        let rank = rank as usize;
        let basis = es.vectors.columns(n - rank, rank).into_owned();
        Ok(Self::from_orthonormal(basis))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Orthonormal columns spanning the range.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn as_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix {
            m: self.matrix.clone(),
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_norm(&(&self.matrix - &other.matrix))
    }

    /// Projection onto the orthogonal complement of the range.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        let r = self.rank();
        if r == 0 {
            return Self::identity(n);
        }
        if r == n {
            return Self::zero(n);
        }
        // eigenvectors of P with eigenvalue 0 span ker P = range(1 - P)
        let es = SymmetricEigen::new(self.matrix.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| se_val(&es, a).total_cmp(&se_val(&es, b)));
        let mut basis = CMatrix::zeros(n, n - r);
        for (j, &i) in idx.iter().take(n - r).enumerate() {
            basis.set_column(j, &es.eigenvectors.column(i));
        }
        Self::from_orthonormal(basis)
    }
}

fn se_val(es: &SymmetricEigen<C64, nalgebra::Dyn>, i: usize) -> f64 {
    es.eigenvalues[i]
}

/// Projection onto the span of the columns of `cols` (which may be linearly
/// dependent). Singular values at or below `eps_proj` times the largest one
/// are treated as zero.
pub fn orthonormal_range(cols: &CMatrix, tol: &ToleranceConfig) -> Result<Projection> {
    let n = cols.nrows();
    if n == 0 {
        return Err(Error::Empty("vectors must have positive dimension"));
    }
    if cols.ncols() == 0 {
        return Ok(Projection::zero(n));
    }
    let mut work = cols.clone();
    let scale = (0..work.ncols())
        .map(|j| work.column(j).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Projection::zero(n));
    }
    // Gram-Schmidt with column pivoting: always take the column with the
    // largest remaining norm and stop once it falls below the threshold.
    let mut found: Vec<CVector> = Vec::new();
    while found.len() < n {
        let (j, norm) = (0..work.ncols())
            .map(|j| (j, work.column(j).norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if norm <= tol.eps_proj * scale {
            break;
        }
        let mut q: CVector = work.column(j) / C64::new(norm, 0.0);
        for _ in 0..2 {
            for b in &found {
                let c = b.dotc(&q);
                q -= b * c;
            }
            let qn = q.norm();
            q /= C64::new(qn, 0.0);
        }
        for k in 0..work.ncols() {
            let c = q.dotc(&work.column(k));
            let mut col = work.column_mut(k);
            col -= &q * c;
        }
        found.push(q);
    }
    let basis = if found.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&found)
    };
    Ok(Projection::from_orthonormal(basis))
}

/// Projection onto the span of a list of vectors.
pub fn span(vectors: &[CVector], tol: &ToleranceConfig) -> Result<Projection> {
    let n = vectors
        .first()
        .map(|v| v.len())
        .ok_or(Error::Empty("no vectors given"))?;
    for v in vectors {
        same_dim(n, v.len())?;
    }
    orthonormal_range(&CMatrix::from_columns(vectors), tol)
}

pub fn real_vector(entries: &[f64]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&r| C64::new(r, 0.0)))
}

pub fn unit_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = ONE;
    v
}

/// `max |U*U - I|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_norm(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn eigh_diagonal_input() {
        let es = eigh(&HermitianMatrix::from_real_diag(&[2.0, 1.0]), &tol()).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 2.0]);
        assert!((es.vectors.column(0) - unit_vector(2, 1)).norm() < 1e-15);
        assert!((es.vectors.column(1) - unit_vector(2, 0)).norm() < 1e-15);
        assert_eq!(es.clusters, vec![0..1, 1..2]);
    }

    #[test]
    fn eigh_swap_matrix() {
        let x = HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let es = eigh(&x, &tol()).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        assert!((es.vectors.column(0) - real_vector(&[s, -s])).norm() < 1e-14);
        assert!((es.vectors.column(1) - real_vector(&[s, s])).norm() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = sample::hermitian(&mut rng, 4, 2.0);
            let es = eigh(&x, &tol()).unwrap();
            assert!(es.reconstruct().max_diff(&x) <= 1e-10);
            assert!(unitarity_residual(&es.vectors) <= tol().eps_proj);
            assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_is_deterministic_and_clusters() {
        let x = HermitianMatrix::from_real_diag(&[1.0, 1.0 + 1e-10, 3.0, 1.0]);
        let a = eigh(&x, &tol()).unwrap();
        let b = eigh(&x, &tol()).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.vectors, b.vectors);
        assert_eq!(a.clusters, vec![0..3, 3..4]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(
            HermitianMatrix::new(m, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn range_examples() {
        let t = tol();
        let p = span(&[unit_vector(2, 0)], &t).unwrap();
        assert!(
            max_norm(&(p.matrix() - HermitianMatrix::from_real_diag(&[1.0, 0.0]).matrix())) < 1e-15
        );
        let p = span(&[unit_vector(2, 0), unit_vector(2, 0)], &t).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(
            max_norm(&(p.matrix() - HermitianMatrix::from_real_diag(&[1.0, 0.0]).matrix())) < 1e-15
        );
        // Gram-Schmidt by hand: (1,1)/√2 and (1,-1)/√2 are already orthogonal
        let p = span(&[real_vector(&[1.0, 1.0]), real_vector(&[1.0, -1.0])], &t).unwrap();
        assert_eq!(p.rank(), 2);
        assert!(max_norm(&(p.matrix() - CMatrix::identity(2, 2))) < 1e-14);
        assert!(orthonormal_range(&CMatrix::zeros(0, 1), &t).is_err());
    }

    #[test]
    fn psd_examples() {
        let t = tol();
        assert!(is_psd(&HermitianMatrix::from_real_diag(&[0.0, 3.0]), &t).unwrap());
        let x = HermitianMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(!is_psd(&x, &t).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b = sample::ginibre(&mut rng, 4);
            let x = HermitianMatrix::from_raw(b.adjoint() * &b);
            assert!(is_psd(&x, &t).unwrap());
        }
    }

    #[test]
    fn projection_from_matrix_validates() {
        let t = tol();
        let p = Projection::from_matrix(
            HermitianMatrix::from_real_diag(&[1.0, 0.0, 1.0]).into_matrix(),
            &t,
        )
        .unwrap();
        assert_eq!(p.rank(), 2);
        assert!(Projection::from_matrix(
            HermitianMatrix::from_real_diag(&[0.5, 0.0]).into_matrix(),
            &t
        )
        .is_err());
        let c = p.complement();
        assert_eq!(c.rank(), 1);
        assert!(
            max_norm(&(c.matrix() - HermitianMatrix::from_real_diag(&[0.0, 1.0, 0.0]).matrix()))
                < 1e-14
        );
    }
}
