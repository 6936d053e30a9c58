//! Bounded spectral families of Hermitian matrices as exact step functions.
//!
//! A family is stored as breakpoints `λ₁ < … < λ_m` together with the
//! cumulative projections `P₁ < … < P_m = 1` taken *after* each jump, so
//! `E_λ = P_i` on `[λ_i, λ_{i+1})` and `E_λ = 0` below `λ₁`. Right
//! continuity is therefore structural.

use crate::error::{Error, Result};
use crate::lattice::{leq_residual, proj_leq};
use crate::numeric::{eigh, same_dim, CMatrix, HermitianMatrix, Projection, C64};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone)]
pub struct SpectralFamily {
    n: usize,
    breakpoints: Vec<f64>,
    cumulative: Vec<Projection>,
}

impl SpectralFamily {
    /// Validates monotonicity, strictly growing rank and `P_m = 1`.
    pub fn new(
        breakpoints: Vec<f64>,
        cumulative: Vec<Projection>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidFamily("no breakpoints".into()));
        }
        if breakpoints.len() != cumulative.len() {
            return Err(Error::InvalidFamily(format!(
                "{} breakpoints but {} projections",
                breakpoints.len(),
                cumulative.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidFamily("non-finite breakpoint".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFamily(format!(
                "breakpoints not strictly ascending at {} >= {}",
                w[0], w[1]
            )));
        }
        let n = cumulative[0].dim();
        for p in &cumulative {
            same_dim(n, p.dim())?;
        }
        for (i, w) in cumulative.windows(2).enumerate() {
            if w[0].rank() >= w[1].rank() || !proj_leq(&w[0], &w[1], tol)? {
                return Err(Error::InvalidFamily(format!(
                    "cumulative projections not strictly increasing at step {}",
                    i + 1
                )));
            }
        }
        let last = cumulative.last().expect("nonempty");
        if last.rank() != n {
            return Err(Error::InvalidFamily(
                "last cumulative projection is not the identity".into(),
            ));
        }
        if cumulative[0].rank() == 0 {
            return Err(Error::InvalidFamily(
                "first cumulative projection is zero".into(),
            ));
        }
        Ok(Self {
            n,
            breakpoints,
            cumulative,
        })
    }

    /// Builds a family from `(λ, E_λ)` samples at ascending `λ`, dropping
    /// samples whose projection does not grow in rank.
    pub(crate) fn from_samples(
        samples: Vec<(f64, Projection)>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let mut breakpoints = Vec::new();
        let mut cumulative: Vec<Projection> = Vec::new();
        for (lambda, p) in samples {
            let prev = cumulative.last().map(Projection::rank).unwrap_or(0);
            if p.rank() > prev {
                breakpoints.push(lambda);
                cumulative.push(p);
            }
        }
        Self::new(breakpoints, cumulative, tol)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cumulative(&self) -> &[Projection] {
        &self.cumulative
    }

    /// `E_λ`: zero below the first breakpoint, identity from the last one on.
    pub fn evaluate(&self, lambda: f64) -> Projection {
        let idx = self.breakpoints.partition_point(|&b| b <= lambda);
        if idx == 0 {
            Projection::zero(self.n)
        } else {
            self.cumulative[idx - 1].clone()
        }
    }

    /// Same family with every breakpoint moved through `f`, which must be
    /// strictly increasing on the breakpoints.
    pub fn map_breakpoints(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let breakpoints: Vec<f64> = self.breakpoints.iter().map(|&b| f(b)).collect();
        if breakpoints.windows(2).any(|w| !(w[0] < w[1]))
            || breakpoints.iter().any(|b| !b.is_finite())
        {
            return Err(Error::InvalidFamily(
                "mapped breakpoints are not strictly ascending".into(),
            ));
        }
        Ok(Self {
            n: self.n,
            breakpoints,
            cumulative: self.cumulative.clone(),
        })
    }

    /// Same breakpoints, each cumulative projection replaced by `g(P_i)`.
    pub fn map_projections(
        &self,
        g: impl Fn(&Projection) -> Result<Projection>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let cumulative = self.cumulative.iter().map(g).collect::<Result<Vec<_>>>()?;
        Self::new(self.breakpoints.clone(), cumulative, tol)
    }

    /// Largest violation of `P_i ≤ P_{i+1}` (zero for a valid family).
    pub fn monotonicity_residual(&self) -> f64 {
        self.cumulative
            .windows(2)
            .map(|w| leq_residual(&w[0], &w[1]))
            .fold(0.0, f64::max)
    }
}

/// The spectral family of `x`: breakpoints are the clustered eigenvalues and
/// `P_i` projects onto the eigenvectors with eigenvalue at most `λ_i`.
pub fn family_of(x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<SpectralFamily> {
    let n = x.dim();
    if n == 0 {
        return Err(Error::Empty("zero-dimensional matrix"));
    }
    let es = eigh(x, tol)?;
    let mut breakpoints = Vec::with_capacity(es.clusters.len());
    let mut cumulative = Vec::with_capacity(es.clusters.len());
    for (c, range) in es.clusters.iter().enumerate() {
        breakpoints.push(es.cluster_value(c));
        cumulative.push(if range.end == n {
            Projection::identity(n)
        } else {
            Projection::from_orthonormal(es.leading_columns(range.end))
        });
    }
    // cluster means of adjacent clusters are separated by more than eps_eig
    Ok(SpectralFamily {
        n,
        breakpoints,
        cumulative,
    })
}

/// `Σ_i λ_i (P_i − P_{i−1})` with `P₀ = 0`.
pub fn element_of(family: &SpectralFamily) -> HermitianMatrix {
    let n = family.n;
    let mut acc = CMatrix::zeros(n, n);
    let mut prev = CMatrix::zeros(n, n);
    for (lambda, p) in family.breakpoints.iter().zip(&family.cumulative) {
        acc += (p.matrix() - &prev) * C64::new(*lambda, 0.0);
        prev = p.matrix().clone();
    }
    HermitianMatrix::from_raw(acc)
}

/// Sorted union of the breakpoints of several families, grouped so that
/// values within `eps` of their neighbour form one group. Returned as
/// `(min, max)` of each group.
pub fn merged_breakpoints(families: &[&SpectralFamily], eps: f64) -> Vec<(f64, f64)> {
    let mut all: Vec<f64> = families
        .iter()
        .flat_map(|f| f.breakpoints.iter().copied())
        .collect();
    all.sort_by(f64::total_cmp);
    crate::numeric::cluster_sorted(&all, eps)
        .into_iter()
        .map(|r| (all[r.start], all[r.end - 1]))
        .collect()
}
