//! Seeded random generators for matrices, cone elements and isomorphisms.
//!
//! Everything takes an explicit `Rng` so that callers control
//! reproducibility.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::direct_sum::{BlockProfile, DirectSumElement};
use crate::iso::{BlockMap, DirectSumIso, FactorCanonicalIso, ProjectionIsomorphism};
use crate::monotone::MonotoneBijection;
use crate::numeric::{CMatrix, HermitianMatrix, Projection, C64};
use crate::order::ConeTag;
use crate::recover::{scalar_grid, RecoveryConfig};
use crate::tolerance::ToleranceConfig;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n × k` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre_rect<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, k, |_, _| gaussian(rng))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    ginibre_rect(rng, n, n)
}

/// `scale · (G + G*) / 2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> HermitianMatrix {
    let g = ginibre(rng, n);
    HermitianMatrix::from_raw((&g + g.adjoint()) * C64::new(0.5 * scale, 0.0))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n).qr();
    let (mut q, r) = qr.unpack();
    for i in 0..n {
        let d = r[(i, i)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(i);
        col *= phase;
    }
    q
}

/// `u diag(spectrum) u*` with Haar `u`.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> HermitianMatrix {
    HermitianMatrix::from_real_diag(spectrum).congruence(&unitary(rng, spectrum.len()))
}

/// Uniformly rotated projection of the given rank.
pub fn projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Projection {
    let u = unitary(rng, n);
    Projection::from_orthonormal(u.columns(0, rank).into_owned())
}

pub fn positive<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> HermitianMatrix {
    let spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
    with_spectrum(rng, &spectrum)
}

pub fn effect<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    positive(rng, n, 1.0)
}

/// A random element of the cone: spectrum in `[-2, 2]`, `[0, 3]` or
/// `[0, 1]`. One time in four a repeated eigenvalue is forced.
pub fn in_cone<R: Rng + ?Sized>(rng: &mut R, n: usize, cone: ConeTag) -> HermitianMatrix {
    let (lo, hi) = match cone {
        ConeTag::SelfAdjoint => (-2.0, 2.0),
        ConeTag::Positive => (0.0, 3.0),
        ConeTag::Effect => (0.0, 1.0),
    };
    let mut spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    if n > 1 && rng.gen_bool(0.25) {
        spectrum[1] = spectrum[0];
    }
    with_spectrum(rng, &spectrum)
}

pub fn ds_element<R: Rng + ?Sized>(
    rng: &mut R,
    profile: &BlockProfile,
    cone: ConeTag,
) -> DirectSumElement {
    let blocks = profile
        .dims()
        .iter()
        .map(|&m| in_cone(rng, m, cone))
        .collect();
    DirectSumElement::new(profile.clone(), blocks).expect("blocks follow the profile")
}

/// `1 + s · N` with `N` strictly upper triangular Gaussian: invertible but
/// not a multiple of a unitary (almost surely, for `n ≥ 2`).
pub fn shear<R: Rng + ?Sized>(rng: &mut R, n: usize, s: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else if i < j {
            gaussian(rng) * s
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Random strictly increasing piecewise-linear bijection whose knots lie on
/// the recovery grid, with `f(0) = 0` (and `f(1) = 1` on effects).
pub fn monotone_on_grid<R: Rng + ?Sized>(
    rng: &mut R,
    cone: ConeTag,
    cfg: &RecoveryConfig,
) -> MonotoneBijection {
    let grid = scalar_grid(cone, cfg);
    let zero = grid
        .iter()
        .position(|&t| t == 0.0)
        .expect("grid contains zero");
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.shuffle(rng);
    let mut knots: Vec<usize> = idx.into_iter().take(rng.gen_range(1..=4)).collect();
    knots.extend([0, zero, grid.len() - 1]);
    knots.sort_unstable();
    knots.dedup();
    let xs: Vec<f64> = knots.iter().map(|&i| grid[i]).collect();
    let mut ys = vec![0.0; xs.len()];
    let z = knots
        .iter()
        .position(|&i| i == zero)
        .expect("zero is a knot");
    for i in z + 1..xs.len() {
        ys[i] = ys[i - 1] + rng.gen_range(0.3..3.0) * (xs[i] - xs[i - 1]);
    }
    for i in (0..z).rev() {
        ys[i] = ys[i + 1] - rng.gen_range(0.3..3.0) * (xs[i + 1] - xs[i]);
    }
    if cone == ConeTag::Effect {
        let top = *ys.last().expect("nonempty");
        ys.iter_mut().for_each(|y| *y /= top);
        *ys.last_mut().expect("nonempty") = 1.0;
    }
    MonotoneBijection::piecewise_linear(xs, ys).expect("increasing by construction")
}

/// A random permutation of the blocks that only exchanges blocks of equal
/// size, so the codomain profile equals the domain profile.
pub fn block_permutation<R: Rng + ?Sized>(rng: &mut R, profile: &BlockProfile) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..profile.len()).collect();
    let mut sizes: Vec<usize> = profile.dims().to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    for m in sizes {
        let slots: Vec<usize> = (0..profile.len())
            .filter(|&j| profile.dims()[j] == m)
            .collect();
        let mut shuffled = slots.clone();
        shuffled.shuffle(rng);
        for (&k, &j) in slots.iter().zip(&shuffled) {
            pi[k] = j;
        }
    }
    pi
}

/// `τ` from a Haar unitary or from a shear times a unitary, linear or
/// antilinear with equal probability.
pub fn projection_iso<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProjectionIsomorphism {
    let u = unitary(rng, n);
    let t = if rng.gen_bool(0.5) {
        u
    } else {
        shear(rng, n, 0.5) * u
    };
    ProjectionIsomorphism::new(t, rng.gen_bool(0.5), &ToleranceConfig::default())
        .expect("well conditioned")
}

/// Random canonical isomorphism on `profile`, with a random central shift
/// on the self-adjoint cone.
pub fn direct_sum_iso<R: Rng + ?Sized>(
    rng: &mut R,
    profile: &BlockProfile,
    cone: ConeTag,
    cfg: &RecoveryConfig,
) -> DirectSumIso {
    let pi = block_permutation(rng, profile);
    let blocks = profile
        .dims()
        .iter()
        .map(|&m| {
            BlockMap::Canonical(FactorCanonicalIso {
                f: monotone_on_grid(rng, cone, cfg),
                tau: projection_iso(rng, m),
            })
        })
        .collect();
    let shift = (cone == ConeTag::SelfAdjoint).then(|| {
        (0..profile.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect()
    });
    DirectSumIso::new(profile.clone(), profile.clone(), cone, pi, blocks, shift)
        .expect("consistent by construction")
}
