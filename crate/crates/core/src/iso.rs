//! Canonical spectral order isomorphisms: `Θ_τ`, Jordan maps, and their
//! blockwise assembly over direct sums with a block permutation.

use crate::direct_sum::{BlockProfile, DirectSumElement};
use crate::error::{Error, Result};
use crate::family::{element_of, family_of};
use crate::monotone::MonotoneBijection;
use crate::numeric::{max_norm, unitarity_residual, CMatrix, HermitianMatrix, Projection};
use crate::order::{apply_monotone, ConeTag};
use crate::tolerance::ToleranceConfig;

/// `τ(p) = proj(T · range p)`, with coordinates conjugated first when
/// `antilinear` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionIsomorphism {
    t: CMatrix,
    t_inv: CMatrix,
    antilinear: bool,
}

impl ProjectionIsomorphism {
    pub fn new(t: CMatrix, antilinear: bool, tol: &ToleranceConfig) -> Result<Self> {
        let n = t.nrows();
        if t.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: t.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::Empty("zero-dimensional map"));
        }
        let sv = t.singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|&&s| s > tol.eps_proj * smax).count();
        if rank < n || !smax.is_finite() {
            return Err(Error::SingularMap { rank, n });
        }
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMap { rank, n })?;
        Ok(Self {
            t,
            t_inv,
            antilinear,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            t: CMatrix::identity(n, n),
            t_inv: CMatrix::identity(n, n),
            antilinear: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    /// The underlying (anti)linear map on column vectors.
    pub fn map_vectors(&self, v: &CMatrix) -> CMatrix {
        if self.antilinear {
            &self.t * v.conjugate()
        } else {
            &self.t * v
        }
    }

    pub fn apply(&self, p: &Projection) -> Result<Projection> {
        crate::numeric::same_dim(self.dim(), p.dim())?;
        let n = self.dim();
        match p.rank() {
            0 => Ok(Projection::zero(n)),
            r if r == n => Ok(Projection::identity(n)),
            // T is invertible, so the image has exactly rank r and a thin QR
            // gives an orthonormal basis without any rank decision
            _ => Ok(Projection::from_orthonormal(
                self.map_vectors(p.basis()).qr().q(),
            )),
        }
    }

    /// `τ⁻¹`: for antilinear `τ`, `v ↦ conj(T⁻¹ v) = conj(T⁻¹) conj(v)`.
    pub fn inverse(&self) -> Self {
        if self.antilinear {
            Self {
                t: self.t_inv.conjugate(),
                t_inv: self.t.conjugate(),
                antilinear: true,
            }
        } else {
            Self {
                t: self.t_inv.clone(),
                t_inv: self.t.clone(),
                antilinear: false,
            }
        }
    }

    /// `max |T*T / s − I|` with `s` the mean of the diagonal of `T*T`; zero
    /// iff `T` is a multiple of a unitary.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.t.adjoint() * &self.t;
        let n = self.dim();
        let s = g.trace().re / n as f64;
        max_norm(&(g.unscale(s) - CMatrix::identity(n, n)))
    }
}

/// `E^{Θ_τ(x)}_λ = τ(E^x_λ)`.
pub fn theta_apply(
    tau: &ProjectionIsomorphism,
    x: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<HermitianMatrix> {
    crate::numeric::same_dim(tau.dim(), x.dim())?;
    let family = family_of(x, tol)?.map_projections(|p| tau.apply(p), tol)?;
    Ok(element_of(&family))
}

/// `x ↦ u x u*`, or `x ↦ u xᵀ u*` with `transpose`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanIso {
    u: CMatrix,
    transpose: bool,
}

impl JordanIso {
    pub fn new(u: CMatrix, transpose: bool, tol: &ToleranceConfig) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        let residual = unitarity_residual(&u);
        if residual > tol.eps_proj {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { u, transpose })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            u: CMatrix::identity(n, n),
            transpose: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn is_transpose(&self) -> bool {
        self.transpose
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        crate::numeric::same_dim(self.dim(), x.dim())?;
        let inner = if self.transpose {
            x.matrix().transpose()
        } else {
            x.matrix().clone()
        };
        Ok(HermitianMatrix::from_raw(
            &self.u * inner * self.u.adjoint(),
        ))
    }

    /// For the transpose case `x = (u* y u)ᵀ = uᵀ yᵀ conj(u)`.
    pub fn inverse(&self) -> Self {
        Self {
            u: if self.transpose {
                self.u.transpose()
            } else {
                self.u.adjoint()
            },
            transpose: self.transpose,
        }
    }

    /// The same map written as `Θ_τ`: a Hermitian `xᵀ` is `conj(x)`, whose
    /// eigenvectors are conjugated, so the transpose case is antilinear.
    pub fn as_projection_iso(&self) -> ProjectionIsomorphism {
        ProjectionIsomorphism {
            t: self.u.clone(),
            t_inv: self.u.adjoint(),
            antilinear: self.transpose,
        }
    }
}

/// `x ↦ Θ_τ(f(x))` on a single factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCanonicalIso {
    pub f: MonotoneBijection,
    pub tau: ProjectionIsomorphism,
}

impl FactorCanonicalIso {
    pub fn identity(n: usize) -> Self {
        Self {
            f: MonotoneBijection::identity(),
            tau: ProjectionIsomorphism::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.tau.dim()
    }

    pub fn apply(
        &self,
        x: &HermitianMatrix,
        cone: ConeTag,
        tol: &ToleranceConfig,
    ) -> Result<HermitianMatrix> {
        theta_apply(&self.tau, &apply_monotone(&self.f, x, cone, tol)?, tol)
    }

    /// `Θ_τ` and `f` act on projections and breakpoints separately, so the
    /// inverse is `f⁻¹ ∘ Θ_{τ⁻¹}`.
    pub fn inverse(&self) -> Self {
        Self {
            f: self.f.inverse(),
            tau: self.tau.inverse(),
        }
    }
}

/// How one domain block is carried to its codomain block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockMap {
    Canonical(FactorCanonicalIso),
    /// `x ↦ ψ(f(x))` with `ψ` a Jordan map.
    Jordan {
        jordan: JordanIso,
        f: MonotoneBijection,
    },
}

impl BlockMap {
    pub fn dim(&self) -> usize {
        match self {
            BlockMap::Canonical(c) => c.dim(),
            BlockMap::Jordan { jordan, .. } => jordan.dim(),
        }
    }

    pub fn scalar_map(&self) -> &MonotoneBijection {
        match self {
            BlockMap::Canonical(c) => &c.f,
            BlockMap::Jordan { f, .. } => f,
        }
    }

    pub fn apply(
        &self,
        x: &HermitianMatrix,
        cone: ConeTag,
        tol: &ToleranceConfig,
    ) -> Result<HermitianMatrix> {
        match self {
            BlockMap::Canonical(c) => c.apply(x, cone, tol),
            BlockMap::Jordan { jordan, f } => jordan.apply(&apply_monotone(f, x, cone, tol)?),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            BlockMap::Canonical(c) => BlockMap::Canonical(c.inverse()),
            BlockMap::Jordan { jordan, f } => BlockMap::Jordan {
                jordan: jordan.inverse(),
                f: f.inverse(),
            },
        }
    }

    /// The `Θ_τ(f(·))` form of this block map.
    pub fn to_canonical(&self) -> FactorCanonicalIso {
        match self {
            BlockMap::Canonical(c) => c.clone(),
            BlockMap::Jordan { jordan, f } => FactorCanonicalIso {
                f: f.clone(),
                tau: jordan.as_projection_iso(),
            },
        }
    }
}

/// `Φ((x_j))_k = φ_{π(k)}(x_{π(k)}) + c_k`.
///
/// `pi[k]` is the domain block feeding codomain block `k` (0-based) and
/// `blocks[j]` is the map applied to domain block `j`. The central shift
/// `c` is only allowed on the self-adjoint cone.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumIso {
    domain: BlockProfile,
    codomain: BlockProfile,
    cone: ConeTag,
    pi: Vec<usize>,
    blocks: Vec<BlockMap>,
    shift: Vec<f64>,
}

impl DirectSumIso {
    pub fn new(
        domain: BlockProfile,
        codomain: BlockProfile,
        cone: ConeTag,
        pi: Vec<usize>,
        blocks: Vec<BlockMap>,
        shift: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_permutation(&pi, domain.len())?;
        if codomain.len() != domain.len() {
            return Err(Error::InvalidPermutation(format!(
                "{} domain blocks but {} codomain blocks",
                domain.len(),
                codomain.len()
            )));
        }
        for (k, &j) in pi.iter().enumerate() {
            if domain.dims()[j] != codomain.dims()[k] {
                return Err(Error::InvalidPermutation(format!(
                    "codomain block {} has size {} but is fed by domain block {} of size {}",
                    k + 1,
                    codomain.dims()[k],
                    j + 1,
                    domain.dims()[j]
                )));
            }
        }
        if blocks.len() != domain.len() {
            return Err(Error::InvalidProfile(format!(
                "{} block maps for {} domain blocks",
                blocks.len(),
                domain.len()
            )));
        }
        for (j, b) in blocks.iter().enumerate() {
            crate::numeric::same_dim(domain.dims()[j], b.dim())?;
            b.scalar_map().check_cone(cone)?;
        }
        let shift = shift.unwrap_or_else(|| vec![0.0; codomain.len()]);
        if shift.len() != codomain.len() {
            return Err(Error::InvalidProfile(format!(
                "shift has {} entries for {} codomain blocks",
                shift.len(),
                codomain.len()
            )));
        }
        if cone != ConeTag::SelfAdjoint && shift.iter().any(|&c| c != 0.0) {
            return Err(Error::UnsupportedCone(cone));
        }
        Ok(Self {
            domain,
            codomain,
            cone,
            pi,
            blocks,
            shift,
        })
    }

    /// Identity blocks on the given profile.
    pub fn identity(profile: &BlockProfile, cone: ConeTag) -> Self {
        Self {
            domain: profile.clone(),
            codomain: profile.clone(),
            cone,
            pi: (0..profile.len()).collect(),
            blocks: profile
                .dims()
                .iter()
                .map(|&m| BlockMap::Canonical(FactorCanonicalIso::identity(m)))
                .collect(),
            shift: vec![0.0; profile.len()],
        }
    }

    pub fn domain(&self) -> &BlockProfile {
        &self.domain
    }

    pub fn codomain(&self) -> &BlockProfile {
        &self.codomain
    }

    pub fn cone(&self) -> ConeTag {
        self.cone
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn blocks(&self) -> &[BlockMap] {
        &self.blocks
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn apply(&self, x: &DirectSumElement, tol: &ToleranceConfig) -> Result<DirectSumElement> {
        self.domain.check_same(x.profile())?;
        let mut out = Vec::with_capacity(self.codomain.len());
        for (k, &j) in self.pi.iter().enumerate() {
            let y = self.blocks[j].apply(x.block(j), self.cone, tol)?;
            out.push(&y + &HermitianMatrix::scalar(y.dim(), self.shift[k]));
        }
        DirectSumElement::new(self.codomain.clone(), out)
    }

    pub fn apply_inverse(
        &self,
        y: &DirectSumElement,
        tol: &ToleranceConfig,
    ) -> Result<DirectSumElement> {
        self.codomain.check_same(y.profile())?;
        let mut out = vec![HermitianMatrix::zeros(0); self.domain.len()];
        for (k, &j) in self.pi.iter().enumerate() {
            let unshifted = y.block(k) - &HermitianMatrix::scalar(y.block(k).dim(), self.shift[k]);
            out[j] = self.blocks[j].inverse().apply(&unshifted, self.cone, tol)?;
        }
        DirectSumElement::new(self.domain.clone(), out)
    }
}

pub fn ds_iso_apply(
    phi: &DirectSumIso,
    x: &DirectSumElement,
    tol: &ToleranceConfig,
) -> Result<DirectSumElement> {
    phi.apply(x, tol)
}

pub(crate) fn check_permutation(pi: &[usize], n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "{} entries for {} blocks",
            pi.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &j in pi {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidPermutation(format!(
                "{pi:?} is not a bijection of 0..{n}"
            )));
        }
    }
    Ok(())
}
