//! The spectral order `x ⪯ y ⇔ E^y_λ ≤ E^x_λ for all λ` and the lattice
//! operations it induces.
//!
//! All comparisons are made on merged breakpoints. Breakpoints of the
//! operands closer than `eps_eig` are treated as one jump, which is the
//! only place where the step-function representation is inexact.

use std::fmt;

use crate::direct_sum::BlockProfile;
use crate::error::{Error, Result};
use crate::family::{element_of, family_of, merged_breakpoints, SpectralFamily};
use crate::lattice::{proj_join, proj_leq, proj_meet};
use crate::monotone::MonotoneBijection;
use crate::numeric::{eigh, max_norm, same_dim, CMatrix, HermitianMatrix, Projection, C64};
use crate::tolerance::ToleranceConfig;

/// Which spectral sublattice an element is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeTag {
    /// `M_sa`
    SelfAdjoint,
    /// `M₊`
    Positive,
    /// `E(M)`: `0 ≤ x ≤ 1`
    Effect,
}

impl ConeTag {
    pub const ALL: [ConeTag; 3] = [ConeTag::SelfAdjoint, ConeTag::Positive, ConeTag::Effect];

    pub fn short_name(self) -> &'static str {
        match self {
            ConeTag::SelfAdjoint => "sa",
            ConeTag::Positive => "pos",
            ConeTag::Effect => "eff",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.short_name() == s)
    }

    pub fn contains(self, x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<bool> {
        if self == ConeTag::SelfAdjoint {
            return Ok(true);
        }
        let es = eigh(x, tol)?;
        let lo = es.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = es.eigenvalues.last().copied().unwrap_or(0.0);
        Ok(match self {
            ConeTag::SelfAdjoint => true,
            ConeTag::Positive => lo >= -tol.eps_proj,
            ConeTag::Effect => lo >= -tol.eps_proj && hi <= 1.0 + tol.eps_proj,
        })
    }

    pub fn check(self, x: &HermitianMatrix, tol: &ToleranceConfig) -> Result<()> {
        if self.contains(x, tol)? {
            return Ok(());
        }
        let es = eigh(x, tol)?;
        Err(Error::NotInCone {
            cone: self,
            detail: format!(
                "spectrum spans [{}, {}]",
                es.eigenvalues.first().copied().unwrap_or(0.0),
                es.eigenvalues.last().copied().unwrap_or(0.0)
            ),
        })
    }

    /// Scalar domain of the cone's monotone bijections, as `(lo, hi)`.
    pub fn scalar_domain(self) -> (f64, f64) {
        match self {
            ConeTag::SelfAdjoint => (f64::NEG_INFINITY, f64::INFINITY),
            ConeTag::Positive => (0.0, f64::INFINITY),
            ConeTag::Effect => (0.0, 1.0),
        }
    }
}

impl fmt::Display for ConeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeTag::SelfAdjoint => "self-adjoint",
            ConeTag::Positive => "positive",
            ConeTag::Effect => "effect",
        })
    }
}

/// `x ⪯ y`.
pub fn spec_leq(x: &HermitianMatrix, y: &HermitianMatrix, tol: &ToleranceConfig) -> Result<bool> {
    same_dim(x.dim(), y.dim())?;
    spec_leq_families(&family_of(x, tol)?, &family_of(y, tol)?, tol)
}

/// `x ⪯ y` on precomputed families.
pub fn spec_leq_families(
    fx: &SpectralFamily,
    fy: &SpectralFamily,
    tol: &ToleranceConfig,
) -> Result<bool> {
    same_dim(fx.dim(), fy.dim())?;
    for (_, hi) in merged_breakpoints(&[fx, fy], tol.eps_eig) {
        if !proj_leq(&fy.evaluate(hi), &fx.evaluate(hi), tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lattice_inputs(
    xs: &[HermitianMatrix],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<Vec<SpectralFamily>> {
    let n = xs
        .first()
        .ok_or(Error::Empty("lattice operation on an empty list"))?
        .dim();
    for x in xs {
        same_dim(n, x.dim())?;
        cone.check(x, tol)?;
    }
    xs.iter().map(|x| family_of(x, tol)).collect()
}

/// Supremum: `E^{∨x}_λ = ∧_x E^x_λ`.
pub fn spec_join(
    xs: &[HermitianMatrix],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<HermitianMatrix> {
    let families = lattice_inputs(xs, cone, tol)?;
    Ok(element_of(&join_families(&families, tol)?))
}

pub fn join_families(families: &[SpectralFamily], tol: &ToleranceConfig) -> Result<SpectralFamily> {
    let refs: Vec<&SpectralFamily> = families.iter().collect();
    let mut samples = Vec::new();
    // a grouped jump takes effect at the last member of the group
    for (_, hi) in merged_breakpoints(&refs, tol.eps_eig) {
        let ps: Vec<Projection> = families.iter().map(|f| f.evaluate(hi)).collect();
        samples.push((hi, proj_meet(&ps, tol)?));
    }
    SpectralFamily::from_samples(samples, tol)
}

/// Infimum: `E^{∧x}_λ = ∧_{μ>λ} ∨_x E^x_μ`.
///
/// The joined step function is constant between merged breakpoints, so the
/// right limit at a breakpoint is its value at the midpoint to the next one.
pub fn spec_meet(
    xs: &[HermitianMatrix],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<HermitianMatrix> {
    let families = lattice_inputs(xs, cone, tol)?;
    Ok(element_of(&meet_families(&families, tol)?))
}

pub fn meet_families(families: &[SpectralFamily], tol: &ToleranceConfig) -> Result<SpectralFamily> {
    let refs: Vec<&SpectralFamily> = families.iter().collect();
    let groups = merged_breakpoints(&refs, tol.eps_eig);
    let mut samples = Vec::with_capacity(groups.len());
    for (i, &(lo, hi)) in groups.iter().enumerate() {
        let probe = match groups.get(i + 1) {
            Some(&(next, _)) => 0.5 * (hi + next),
            None => hi + 1.0,
        };
        let ps: Vec<Projection> = families.iter().map(|f| f.evaluate(probe)).collect();
        // a grouped jump takes effect at the first member of the group
        samples.push((lo, proj_join(&ps, tol)?));
    }
    SpectralFamily::from_samples(samples, tol)
}

/// `(x⁺, x⁻)` with `x = x⁺ − x⁻`, `x⁺x⁻ = 0`, both positive.
pub fn pos_neg_parts(
    x: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let es = eigh(x, tol)?;
    let v = &es.vectors;
    let n = x.dim();
    let part = |keep: &dyn Fn(f64) -> f64| {
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(keep(es.eigenvalues[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        HermitianMatrix::from_raw(v * d * v.adjoint())
    };
    Ok((part(&|l| l.max(0.0)), part(&|l| (-l).max(0.0))))
}

/// `f(x)`: same spectral projections, eigenvalues pushed through `f`.
pub fn apply_monotone(
    f: &MonotoneBijection,
    x: &HermitianMatrix,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<HermitianMatrix> {
    f.check_cone(cone)?;
    cone.check(x, tol)?;
    let family = family_of(x, tol)?.map_breakpoints(|t| f.eval(t))?;
    Ok(element_of(&family))
}

/// Writes `x = α e` with `e` a rank-one projection, if possible.
///
/// Rank-one detection is the ground truth here; the order-theoretic
/// characterization (all `y, z ⪯ x` comparable) is only checked
/// statistically in tests.
pub fn atom_scalar_decompose(
    x: &HermitianMatrix,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<Option<(f64, Projection)>> {
    if cone == ConeTag::SelfAdjoint {
        return Err(Error::UnsupportedCone(cone));
    }
    cone.check(x, tol)?;
    if x.max_abs() <= tol.eps_recon {
        return Err(Error::Empty("zero element has no atomic decomposition"));
    }
    let es = eigh(x, tol)?;
    let support: Vec<usize> = (0..x.dim())
        .filter(|&i| es.eigenvalues[i] > tol.eps_eig)
        .collect();
    if support.len() != 1 {
        return Ok(None);
    }
    let i = support[0];
    let alpha = es.eigenvalues[i];
    let e = Projection::from_orthonormal(es.vectors.columns(i, 1).into_owned());
    if max_norm(&(x.matrix() - e.matrix().map(|z| z * alpha))) > tol.eps_recon {
        return Ok(None);
    }
    Ok(Some((alpha, e)))
}

/// Membership in the self-adjoint center of `⊕ B(C^{m_j})`: block diagonal
/// with a real scalar in each block.
pub fn is_central(
    z: &HermitianMatrix,
    profile: &BlockProfile,
    tol: &ToleranceConfig,
) -> Result<bool> {
    same_dim(profile.total(), z.dim())?;
    let m = z.matrix();
    for (j, range) in profile.ranges().enumerate() {
        let len = range.len();
        let block = m.view((range.start, range.start), (len, len));
        let c = block.trace().re / len as f64;
        let dev = (0..len)
            .flat_map(|a| (0..len).map(move |b| (a, b)))
            .map(|(a, b)| {
                let want = if a == b { c } else { 0.0 };
                (block[(a, b)] - C64::new(want, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        if dev > tol.eps_proj {
            return Ok(false);
        }
        for (k, other) in profile.ranges().enumerate() {
            if k == j {
                continue;
            }
            let off = m.view((range.start, other.start), (len, other.len()));
            if off.iter().any(|z| z.norm() > tol.eps_proj) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `‖z ∨ (x ∧ y) − (z ∨ x) ∧ (z ∨ y)‖` in max-norm.
pub fn distributive_residual(
    z: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<f64> {
    same_dim(z.dim(), x.dim())?;
    same_dim(z.dim(), y.dim())?;
    let lhs = spec_join(
        &[z.clone(), spec_meet(&[x.clone(), y.clone()], cone, tol)?],
        cone,
        tol,
    )?;
    let zx = spec_join(&[z.clone(), x.clone()], cone, tol)?;
    let zy = spec_join(&[z.clone(), y.clone()], cone, tol)?;
    let rhs = spec_meet(&[zx, zy], cone, tol)?;
    Ok(lhs.max_diff(&rhs))
}

/// `z ∨ (x ∧ y) = (z ∨ x) ∧ (z ∨ y)` within `eps_recon`.
pub fn distributive_check(
    z: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<bool> {
    Ok(distributive_residual(z, x, y, cone, tol)? <= tol.eps_recon)
}
