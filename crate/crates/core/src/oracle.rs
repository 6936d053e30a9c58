//! Black-box access to a spectral order isomorphism between direct sums.

use crate::direct_sum::{BlockProfile, DirectSumElement};
use crate::error::Result;
use crate::iso::DirectSumIso;
use crate::order::ConeTag;
use crate::tolerance::ToleranceConfig;

/// A bijection between the `cone` parts of two direct sums, queried only
/// through `forward` and `inverse`. Implementations must be stateless.
pub trait OrderIsoOracle {
    fn domain_profile(&self) -> &BlockProfile;
    fn codomain_profile(&self) -> &BlockProfile;
    fn cone(&self) -> ConeTag;
    fn forward(&self, x: &DirectSumElement) -> Result<DirectSumElement>;
    fn inverse(&self, y: &DirectSumElement) -> Result<DirectSumElement>;
}

/// A known [`DirectSumIso`] seen as an oracle.
#[derive(Debug, Clone)]
pub struct IsoOracle<'a> {
    iso: &'a DirectSumIso,
    tol: ToleranceConfig,
}

impl<'a> IsoOracle<'a> {
    pub fn new(iso: &'a DirectSumIso, tol: &ToleranceConfig) -> Self {
        Self { iso, tol: *tol }
    }
}

impl OrderIsoOracle for IsoOracle<'_> {
    fn domain_profile(&self) -> &BlockProfile {
        self.iso.domain()
    }

    fn codomain_profile(&self) -> &BlockProfile {
        self.iso.codomain()
    }

    fn cone(&self) -> ConeTag {
        self.iso.cone()
    }

    fn forward(&self, x: &DirectSumElement) -> Result<DirectSumElement> {
        self.iso.apply(x, &self.tol)
    }

    fn inverse(&self, y: &DirectSumElement) -> Result<DirectSumElement> {
        self.iso.apply_inverse(y, &self.tol)
    }
}

type MapFn<'a> = Box<dyn Fn(&DirectSumElement) -> Result<DirectSumElement> + 'a>;

/// An oracle made of two closures.
pub struct FnOracle<'a> {
    domain: BlockProfile,
    codomain: BlockProfile,
    cone: ConeTag,
    forward: MapFn<'a>,
    inverse: MapFn<'a>,
}

impl<'a> FnOracle<'a> {
    pub fn new(
        domain: BlockProfile,
        codomain: BlockProfile,
        cone: ConeTag,
        forward: impl Fn(&DirectSumElement) -> Result<DirectSumElement> + 'a,
        inverse: impl Fn(&DirectSumElement) -> Result<DirectSumElement> + 'a,
    ) -> Self {
        Self {
            domain,
            codomain,
            cone,
            forward: Box::new(forward),
            inverse: Box::new(inverse),
        }
    }
}

impl OrderIsoOracle for FnOracle<'_> {
    fn domain_profile(&self) -> &BlockProfile {
        &self.domain
    }

    fn codomain_profile(&self) -> &BlockProfile {
        &self.codomain
    }

    fn cone(&self) -> ConeTag {
        self.cone
    }

    fn forward(&self, x: &DirectSumElement) -> Result<DirectSumElement> {
        (self.forward)(x)
    }

    fn inverse(&self, y: &DirectSumElement) -> Result<DirectSumElement> {
        (self.inverse)(y)
    }
}
