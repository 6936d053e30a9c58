//! Direct sums `⊕_j B(C^{m_j})` of full matrix algebras.
//!
//! Elements are stored blockwise. Every order-theoretic operation on a direct
//! sum acts block by block, and the block-diagonal assembly is kept around
//! only as an independent cross-check.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::family::{family_of, SpectralFamily};
use crate::numeric::{CMatrix, HermitianMatrix};
use crate::order::{
    distributive_residual, is_central, pos_neg_parts, spec_join, spec_leq, spec_meet, ConeTag,
};
use crate::tolerance::ToleranceConfig;

/// Block dimensions `(m_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockProfile {
    dims: Vec<usize>,
}

impl BlockProfile {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidProfile("profile has no blocks".into()));
        }
        if let Some(j) = dims.iter().position(|&m| m == 0) {
            return Err(Error::InvalidProfile(format!(
                "block {} has dimension zero",
                j + 1
            )));
        }
        Ok(Self { dims })
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offset(&self, j: usize) -> usize {
        self.dims[..j].iter().sum()
    }

    pub fn range(&self, j: usize) -> Range<usize> {
        let start = self.offset(j);
        start..start + self.dims[j]
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.dims.iter().scan(0, |start, &m| {
            let r = *start..*start + m;
            *start += m;
            Some(r)
        })
    }

    /// Whether any summand is `B(C²)`.
    pub fn has_dim_two_block(&self) -> bool {
        self.dims.contains(&2)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::InvalidProfile(format!(
                "profile {:?} does not match {:?}",
                other.dims, self.dims
            )))
        }
    }
}

/// `(x_j)_j` with `x_j` Hermitian of size `m_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumElement {
    profile: BlockProfile,
    blocks: Vec<HermitianMatrix>,
}

impl DirectSumElement {
    pub fn new(profile: BlockProfile, blocks: Vec<HermitianMatrix>) -> Result<Self> {
        if blocks.len() != profile.len() {
            return Err(Error::InvalidProfile(format!(
                "{} blocks given for a profile with {} summands",
                blocks.len(),
                profile.len()
            )));
        }
        for (j, (b, &m)) in blocks.iter().zip(profile.dims()).enumerate() {
            if b.dim() != m {
                return Err(Error::InvalidProfile(format!(
                    "block {} has size {} but the profile says {}",
                    j + 1,
                    b.dim(),
                    m
                )));
            }
        }
        Ok(Self { profile, blocks })
    }

    /// The profile is read off the block sizes.
    pub fn from_blocks(blocks: Vec<HermitianMatrix>) -> Result<Self> {
        let profile = BlockProfile::new(blocks.iter().map(HermitianMatrix::dim).collect())?;
        Ok(Self { profile, blocks })
    }

    pub fn zeros(profile: &BlockProfile) -> Self {
        Self::central(profile, &vec![0.0; profile.len()])
    }

    pub fn identity(profile: &BlockProfile) -> Self {
        Self::central(profile, &vec![1.0; profile.len()])
    }

    /// `(c_j · 1)_j`. Panics if `cs` has the wrong length.
    pub fn central(profile: &BlockProfile, cs: &[f64]) -> Self {
        assert_eq!(cs.len(), profile.len(), "one scalar per block");
        Self {
            profile: profile.clone(),
            blocks: profile
                .dims()
                .iter()
                .zip(cs)
                .map(|(&m, &c)| HermitianMatrix::scalar(m, c))
                .collect(),
        }
    }

    /// `x` in slot `j`, zero elsewhere.
    pub fn embed(profile: &BlockProfile, j: usize, x: HermitianMatrix) -> Result<Self> {
        if j >= profile.len() {
            return Err(Error::InvalidProfile(format!(
                "no block {} in a profile of {}",
                j + 1,
                profile.len()
            )));
        }
        let mut out = Self::zeros(profile);
        out.set_block(j, x)?;
        Ok(out)
    }

    /// Reads the diagonal blocks of a block-diagonal matrix; off-diagonal
    /// blocks must vanish within `eps_proj`.
    pub fn from_assembled(
        profile: &BlockProfile,
        x: &HermitianMatrix,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        crate::numeric::same_dim(profile.total(), x.dim())?;
        let m = x.matrix();
        let ranges: Vec<_> = profile.ranges().collect();
        let mut blocks = Vec::with_capacity(ranges.len());
        for (j, r) in ranges.iter().enumerate() {
            for (k, s) in ranges.iter().enumerate() {
                if k != j
                    && m.view((r.start, s.start), (r.len(), s.len()))
                        .iter()
                        .any(|z| z.norm() > tol.eps_proj)
                {
                    return Err(Error::InvalidProfile(format!(
                        "matrix couples blocks {} and {}",
                        j + 1,
                        k + 1
                    )));
                }
            }
            blocks.push(HermitianMatrix::from_raw(
                m.view((r.start, r.start), (r.len(), r.len())).into_owned(),
            ));
        }
        Self::new(profile.clone(), blocks)
    }

    pub fn profile(&self) -> &BlockProfile {
        &self.profile
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &HermitianMatrix {
        &self.blocks[j]
    }

    pub fn into_blocks(self) -> Vec<HermitianMatrix> {
        self.blocks
    }

    pub fn set_block(&mut self, j: usize, x: HermitianMatrix) -> Result<()> {
        crate::numeric::same_dim(self.profile.dims()[j], x.dim())?;
        self.blocks[j] = x;
        Ok(())
    }

    /// The block-diagonal matrix of size `Σ m_j`.
    pub fn assemble(&self) -> HermitianMatrix {
        let n = self.profile.total();
        let mut m = CMatrix::zeros(n, n);
        for (r, b) in self.profile.ranges().zip(&self.blocks) {
            m.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(b.matrix());
        }
        HermitianMatrix::from_raw(m)
    }

    /// `sup_j ‖x_j‖` in operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                b.matrix()
                    .clone()
                    .symmetric_eigenvalues()
                    .iter()
                    .fold(0.0f64, |acc, l| acc.max(l.abs()))
            })
            .fold(0.0, f64::max)
    }

    /// Entrywise max-norm of the difference; profiles must agree.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.profile, other.profile, "profiles differ");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.profile.check_same(&other.profile)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.profile.check_same(&other.profile)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_blocks(|b| b.scale(c))
    }

    pub fn map_blocks(&self, f: impl Fn(&HermitianMatrix) -> HermitianMatrix) -> Self {
        Self {
            profile: self.profile.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&HermitianMatrix, &HermitianMatrix) -> HermitianMatrix,
    ) -> Self {
        Self {
            profile: self.profile.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Blockwise product, which need not be Hermitian; returns its max-norm.
    pub fn product_norm(&self, other: &Self) -> f64 {
        assert_eq!(self.profile, other.profile, "profiles differ");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.product_norm(b))
            .fold(0.0, f64::max)
    }

    pub fn in_cone(&self, cone: ConeTag, tol: &ToleranceConfig) -> Result<bool> {
        for b in &self.blocks {
            if !cone.contains(b, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn check_cone(&self, cone: ConeTag, tol: &ToleranceConfig) -> Result<()> {
        self.blocks.iter().try_for_each(|b| cone.check(b, tol))
    }

    /// The scalar `c_j` of each block when the element is central.
    pub fn central_scalars(&self, tol: &ToleranceConfig) -> Option<Vec<f64>> {
        self.blocks.iter().map(|b| b.is_scalar(tol)).collect()
    }
}

/// `E^{(x_j)}_λ = (E^{x_j}_λ)_j`, one family per block.
pub fn ds_family(x: &DirectSumElement, tol: &ToleranceConfig) -> Result<Vec<SpectralFamily>> {
    x.blocks.iter().map(|b| family_of(b, tol)).collect()
}

/// `(x_j) ⪯ (y_j)` iff `x_j ⪯ y_j` for every `j`.
pub fn ds_spec_leq(
    x: &DirectSumElement,
    y: &DirectSumElement,
    tol: &ToleranceConfig,
) -> Result<bool> {
    x.profile.check_same(&y.profile)?;
    for (a, b) in x.blocks.iter().zip(&y.blocks) {
        if !spec_leq(a, b, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn blockwise(
    xs: &[DirectSumElement],
    op: impl Fn(&[HermitianMatrix]) -> Result<HermitianMatrix>,
) -> Result<DirectSumElement> {
    let profile = xs
        .first()
        .ok_or(Error::Empty("lattice operation on an empty list"))?
        .profile
        .clone();
    for x in xs {
        profile.check_same(&x.profile)?;
    }
    let blocks = (0..profile.len())
        .map(|j| op(&xs.iter().map(|x| x.blocks[j].clone()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    DirectSumElement::new(profile, blocks)
}

pub fn ds_spec_join(
    xs: &[DirectSumElement],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<DirectSumElement> {
    blockwise(xs, |bs| spec_join(bs, cone, tol))
}

pub fn ds_spec_meet(
    xs: &[DirectSumElement],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<DirectSumElement> {
    blockwise(xs, |bs| spec_meet(bs, cone, tol))
}

pub fn ds_pos_neg_parts(
    x: &DirectSumElement,
    tol: &ToleranceConfig,
) -> Result<(DirectSumElement, DirectSumElement)> {
    let (pos, neg): (Vec<_>, Vec<_>) = x
        .blocks
        .iter()
        .map(|b| pos_neg_parts(b, tol))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((
        DirectSumElement::new(x.profile.clone(), pos)?,
        DirectSumElement::new(x.profile.clone(), neg)?,
    ))
}

pub fn ds_is_central(z: &DirectSumElement, tol: &ToleranceConfig) -> Result<bool> {
    is_central(&z.assemble(), &z.profile, tol)
}

pub fn ds_distributive_residual(
    z: &DirectSumElement,
    x: &DirectSumElement,
    y: &DirectSumElement,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<f64> {
    z.profile.check_same(&x.profile)?;
    z.profile.check_same(&y.profile)?;
    let mut worst = 0.0f64;
    for j in 0..z.profile.len() {
        worst = worst.max(distributive_residual(
            &z.blocks[j],
            &x.blocks[j],
            &y.blocks[j],
            cone,
            tol,
        )?);
    }
    Ok(worst)
}

pub fn ds_distributive_check(
    z: &DirectSumElement,
    x: &DirectSumElement,
    y: &DirectSumElement,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<bool> {
    Ok(ds_distributive_residual(z, x, y, cone, tol)? <= tol.eps_recon)
}

/// `z_j = (δ_{jl} 1)_l`.
pub fn central_atoms(profile: &BlockProfile) -> Vec<DirectSumElement> {
    (0..profile.len())
        .map(|j| {
            let cs: Vec<f64> = (0..profile.len())
                .map(|l| if l == j { 1.0 } else { 0.0 })
                .collect();
            DirectSumElement::central(profile, &cs)
        })
        .collect()
}
