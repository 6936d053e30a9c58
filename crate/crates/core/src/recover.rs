//! Recovering the block structure of a spectral order isomorphism between
//! direct sums of matrix factors from black-box queries.
//!
//! Central atoms go to central atoms (up to a positive scalar off the effect
//! cone), which fixes the block permutation. Restricting to one summand at a
//! time then gives a map between single factors, which has the form
//! `Θ_τ(f(·))` and is read off from scalar inputs and from complements of
//! rank-one projections.

use rand::Rng;

use crate::direct_sum::{central_atoms, ds_is_central, BlockProfile, DirectSumElement};
use crate::error::{Error, Result};
use crate::family::family_of;
use crate::iso::{theta_apply, BlockMap, DirectSumIso, FactorCanonicalIso, ProjectionIsomorphism};
use crate::monotone::MonotoneBijection;
use crate::numeric::{is_psd, span, unit_vector, CMatrix, HermitianMatrix, Projection, C64};
use crate::oracle::OrderIsoOracle;
use crate::order::{apply_monotone, ConeTag};
use crate::sample;
use crate::tolerance::ToleranceConfig;

/// Knobs for the sampling parts of recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    /// Points of the uniform grid on which `f` is sampled.
    pub grid_points: usize,
    /// `f` is sampled on `[0, pos_window]` for the positive cone.
    pub pos_window: f64,
    /// `f` is sampled on `[-sa_window, sa_window]` for the self-adjoint cone.
    pub sa_window: f64,
    /// Random inputs used to verify a reconstruction.
    pub verify_samples: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            grid_points: 129,
            pos_window: 4.0,
            sa_window: 4.0,
            verify_samples: 200,
        }
    }
}

/// The uniform grid on which scalar maps are sampled. With an odd number of
/// points the grid contains `0`, `0.5` and `1` exactly for the default
/// windows.
pub fn scalar_grid(cone: ConeTag, cfg: &RecoveryConfig) -> Vec<f64> {
    let (lo, hi) = match cone {
        ConeTag::Effect => (0.0, 1.0),
        ConeTag::Positive => (0.0, cfg.pos_window),
        ConeTag::SelfAdjoint => (-cfg.sa_window, cfg.sa_window),
    };
    let last = (cfg.grid_points.max(2) - 1) as f64;
    (0..cfg.grid_points.max(2))
        .map(|i| lo + (hi - lo) * (i as f64) / last)
        .collect()
}

/// Block permutation and central shift of an isomorphism, together with
/// the residuals of the reassembly check.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub cone: ConeTag,
    /// `pi[k]` is the domain block feeding codomain block `k`.
    pub pi: Vec<usize>,
    /// `Φ(0)` on the self-adjoint cone, zero otherwise.
    pub shift: DirectSumElement,
    /// Worst relative error of the blockwise reassembly on random inputs.
    pub residual: f64,
    /// Worst error of `Φ⁻¹(Φ(x)) = x` on the same inputs.
    pub inverse_residual: f64,
}

impl Decomposition {
    /// Codomain slot of domain block `j`.
    pub fn slot_of(&self, j: usize) -> usize {
        self.pi
            .iter()
            .position(|&d| d == j)
            .expect("pi is a bijection")
    }

    /// `φ_j`: domain block `j` embedded with zeros elsewhere, pushed through
    /// `Φ − Φ(0)` and read off in slot `π⁻¹(j)`.
    pub fn block_oracle<'a, O: OrderIsoOracle + ?Sized>(
        &'a self,
        parent: &'a O,
        j: usize,
    ) -> BlockOracle<'a, O> {
        let k = self.slot_of(j);
        BlockOracle {
            parent,
            shift: &self.shift,
            j,
            k,
            domain: BlockProfile::single(parent.domain_profile().dims()[j])
                .expect("positive block size"),
            codomain: BlockProfile::single(parent.codomain_profile().dims()[k])
                .expect("positive block size"),
        }
    }
}

/// One summand of a decomposed oracle, as a single-factor oracle.
pub struct BlockOracle<'a, O: ?Sized> {
    parent: &'a O,
    shift: &'a DirectSumElement,
    j: usize,
    k: usize,
    domain: BlockProfile,
    codomain: BlockProfile,
}

impl<O: OrderIsoOracle + ?Sized> OrderIsoOracle for BlockOracle<'_, O> {
    fn domain_profile(&self) -> &BlockProfile {
        &self.domain
    }

    fn codomain_profile(&self) -> &BlockProfile {
        &self.codomain
    }

    fn cone(&self) -> ConeTag {
        self.parent.cone()
    }

    fn forward(&self, x: &DirectSumElement) -> Result<DirectSumElement> {
        let full =
            DirectSumElement::embed(self.parent.domain_profile(), self.j, x.block(0).clone())?;
        let y = self.parent.forward(&full)?.checked_sub(self.shift)?;
        DirectSumElement::new(self.codomain.clone(), vec![y.block(self.k).clone()])
    }

    fn inverse(&self, y: &DirectSumElement) -> Result<DirectSumElement> {
        let full =
            DirectSumElement::embed(self.parent.codomain_profile(), self.k, y.block(0).clone())?
                .checked_add(self.shift)?;
        let x = self.parent.inverse(&full)?;
        DirectSumElement::new(self.domain.clone(), vec![x.block(self.j).clone()])
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Scale {
    One,
    Positive,
    Negative,
}

/// The unique codomain block `k` with `y = α w_k`, `α` of the required kind.
fn match_central_atom(y: &DirectSumElement, scale: Scale, tol: &ToleranceConfig) -> Result<usize> {
    let profile = y.profile().clone();
    let atoms = central_atoms(&profile);
    let mut hits = Vec::new();
    for (k, w) in atoms.iter().enumerate() {
        let alpha = y.block(k).trace() / profile.dims()[k] as f64;
        let slack = 10.0 * tol.eps_recon * alpha.abs().max(1.0);
        let right_kind = match scale {
            Scale::One => (alpha - 1.0).abs() <= slack,
            Scale::Positive => alpha > tol.eps_eig,
            Scale::Negative => alpha < -tol.eps_eig,
        };
        if right_kind && y.max_diff(&w.scale(alpha)) <= slack {
            hits.push(k);
        }
    }
    match hits.as_slice() {
        [k] => Ok(*k),
        [] => Err(Error::OracleShape(
            "image of a central atom is not a multiple of a central atom".into(),
        )),
        _ => Err(Error::OracleShape(format!(
            "image of a central atom matches several blocks {hits:?}"
        ))),
    }
}

/// Finds `π` (and `Φ(0)` on the self-adjoint cone) and verifies the
/// blockwise reassembly on random inputs.
pub fn decompose<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<Decomposition> {
    let dom = oracle.domain_profile().clone();
    let cod = oracle.codomain_profile().clone();
    let cone = oracle.cone();
    if dom.len() != cod.len() {
        return Err(Error::OracleShape(format!(
            "{} domain summands but {} codomain summands",
            dom.len(),
            cod.len()
        )));
    }
    let shift = if cone == ConeTag::SelfAdjoint {
        let c = oracle.forward(&DirectSumElement::zeros(&dom))?;
        cod.check_same(c.profile())?;
        if !ds_is_central(&c, tol)? {
            return Err(Error::NotCentral("image of zero is not central".into()));
        }
        c
    } else {
        DirectSumElement::zeros(&cod)
    };
    let shifted = |x: &DirectSumElement| -> Result<DirectSumElement> {
        let y = oracle.forward(x)?;
        cod.check_same(y.profile())?;
        y.checked_sub(&shift)
    };

    let zs = central_atoms(&dom);
    let scale = match cone {
        ConeTag::Effect => Scale::One,
        _ => Scale::Positive,
    };
    let mut slot = Vec::with_capacity(dom.len());
    for z in &zs {
        slot.push(match_central_atom(&shifted(z)?, scale, tol)?);
    }
    if cone == ConeTag::SelfAdjoint {
        for (j, z) in zs.iter().enumerate() {
            let neg = match_central_atom(&shifted(&z.scale(-1.0))?, Scale::Negative, tol)?;
            if neg != slot[j] {
                return Err(Error::OracleShape(format!(
                    "z_{} and -z_{} are sent to different summands {} and {}",
                    j + 1,
                    j + 1,
                    slot[j] + 1,
                    neg + 1
                )));
            }
        }
    }
    let mut pi = vec![usize::MAX; cod.len()];
    for (j, &k) in slot.iter().enumerate() {
        if pi[k] != usize::MAX {
            return Err(Error::OracleShape(format!(
                "central atoms {} and {} are sent to the same summand {}",
                pi[k] + 1,
                j + 1,
                k + 1
            )));
        }
        pi[k] = j;
    }
    for (k, &j) in pi.iter().enumerate() {
        if dom.dims()[j] != cod.dims()[k] {
            return Err(Error::DimensionMismatch {
                expected: dom.dims()[j],
                found: cod.dims()[k],
            });
        }
    }
    if cone == ConeTag::SelfAdjoint {
        // z_k − z_l is neither above nor below zero, and neither may its image be
        for k in 0..zs.len() {
            for l in 0..zs.len() {
                if k == l {
                    continue;
                }
                let d = shifted(&zs[k].checked_sub(&zs[l])?)?.assemble();
                if is_psd(&d, tol)? || is_psd(&-&d, tol)? {
                    return Err(Error::OracleShape(format!(
                        "image of z_{} - z_{} is semidefinite",
                        k + 1,
                        l + 1
                    )));
                }
            }
        }
    }

    let mut dec = Decomposition {
        cone,
        pi,
        shift,
        residual: 0.0,
        inverse_residual: 0.0,
    };
    for _ in 0..cfg.verify_samples {
        let x = sample::ds_element(rng, &dom, cone);
        let y = oracle.forward(&x)?;
        let mut blocks = vec![HermitianMatrix::zeros(0); cod.len()];
        for j in 0..dom.len() {
            let single = DirectSumElement::from_blocks(vec![x.block(j).clone()])?;
            let k = dec.slot_of(j);
            blocks[k] = dec.block_oracle(oracle, j).forward(&single)?.block(0) + dec.shift.block(k);
        }
        let glued = DirectSumElement::new(cod.clone(), blocks)?;
        dec.residual = dec.residual.max(glued.max_diff(&y) / y.norm().max(1.0));
        let back = oracle.inverse(&y)?;
        dom.check_same(back.profile())?;
        dec.inverse_residual = dec
            .inverse_residual
            .max(back.max_diff(&x) / x.norm().max(1.0));
    }
    for (what, residual) in [
        ("blockwise reassembly", dec.residual),
        ("inverse", dec.inverse_residual),
    ] {
        if residual > tol.eps_recon {
            return Err(Error::VerificationFailed {
                what: what.into(),
                residual,
                tolerance: tol.eps_recon,
            });
        }
    }
    Ok(dec)
}

fn require_cone<O: OrderIsoOracle + ?Sized>(oracle: &O, cone: ConeTag) -> Result<()> {
    if oracle.cone() == cone {
        Ok(())
    } else {
        Err(Error::UnsupportedCone(oracle.cone()))
    }
}

/// [`decompose`] for an oracle between effect sets.
pub fn decompose_effect_iso<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<Decomposition> {
    require_cone(oracle, ConeTag::Effect)?;
    decompose(oracle, tol, cfg, rng)
}

/// [`decompose`] for an oracle between positive cones.
pub fn decompose_positive_iso<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<Decomposition> {
    require_cone(oracle, ConeTag::Positive)?;
    decompose(oracle, tol, cfg, rng)
}

/// [`decompose`] for an oracle between self-adjoint parts.
pub fn decompose_sa_iso<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<Decomposition> {
    require_cone(oracle, ConeTag::SelfAdjoint)?;
    decompose(oracle, tol, cfg, rng)
}

/// A single-factor map in canonical form, with the data it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredFactor {
    pub iso: FactorCanonicalIso,
    /// `(t, f(t))` on the sampling grid.
    pub samples: Vec<(f64, f64)>,
    /// Worst relative error of `Θ_τ(f(x))` against the oracle.
    pub residual: f64,
}

fn slope_changes(xs: &[f64], ys: &[f64], i: usize) -> bool {
    let s1 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    let s2 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    (s1 - s2).abs() > 1e-9 * s1.abs().max(s2.abs()).max(1.0)
}

/// Power law if it reproduces every sample, otherwise piecewise linear
/// through the samples with collinear knots dropped.
pub fn fit_monotone(
    xs: &[f64],
    ys: &[f64],
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> Result<MonotoneBijection> {
    let mut ys = ys.to_vec();
    if ys.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OracleShape(
            "scalar action is not strictly increasing".into(),
        ));
    }
    // the cone pins f(0) = 0 and, for effects, f(1) = 1
    if cone != ConeTag::SelfAdjoint && ys[0].abs() <= tol.eps_recon {
        ys[0] = 0.0;
    }
    if cone == ConeTag::Effect {
        let last = ys.len() - 1;
        if (ys[last] - 1.0).abs() <= tol.eps_recon {
            ys[last] = 1.0;
        }
    }
    let keep: Vec<usize> = (0..xs.len())
        .filter(|&i| i == 0 || i == xs.len() - 1 || slope_changes(xs, &ys, i))
        .collect();
    let pl = MonotoneBijection::piecewise_linear(
        keep.iter().map(|&i| xs[i]).collect(),
        keep.iter().map(|&i| ys[i]).collect(),
    )?;
    if keep.len() > 2 {
        let at = |t: f64| xs.iter().position(|&x| x == t).map(|i| ys[i]);
        if let (Some(f0), Some(fh), Some(f1)) = (at(0.0), at(0.5), at(1.0)) {
            if f0.abs() <= tol.eps_recon && fh > 0.0 && f1 > fh {
                if let Ok(power) = MonotoneBijection::power((f1 / fh).log2(), f1) {
                    let fits = xs.iter().zip(&ys).all(|(&x, &y)| {
                        (power.eval(x) - y).abs() <= tol.eps_recon * y.abs().max(1.0)
                    });
                    if fits && power.check_cone(cone).is_ok() {
                        return Ok(power);
                    }
                }
            }
        }
    }
    pl.check_cone(cone)?;
    Ok(pl)
}

/// Reads `f` and `τ` off a single-factor oracle and checks
/// `Θ_τ(f(x)) = Φ(x)` on random inputs.
///
/// `τ(q)` is the cumulative projection of `Φ(1 − q)` on the plateau between
/// `f(0)` and `f(1)`. The images of the coordinate lines and of the lines
/// through `e_1 + e_i` form a projective frame which fixes `T` up to a
/// scalar; whether `τ` is linear or antilinear is decided by the residual.
pub fn recover_factor_canonical<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<RecoveredFactor> {
    let (dom, cod) = (oracle.domain_profile(), oracle.codomain_profile());
    if dom.len() != 1 || cod.len() != 1 {
        return Err(Error::OracleShape(
            "expected a single factor on both sides".into(),
        ));
    }
    let n = dom.dims()[0];
    crate::numeric::same_dim(n, cod.dims()[0])?;
    let cone = oracle.cone();
    let single = |x: HermitianMatrix| DirectSumElement::from_blocks(vec![x]).expect("single block");
    let query = |x: HermitianMatrix| -> Result<HermitianMatrix> {
        Ok(oracle.forward(&single(x))?.block(0).clone())
    };

    let xs = scalar_grid(cone, cfg);
    let mut ys = Vec::with_capacity(xs.len());
    for &t in &xs {
        let y = query(HermitianMatrix::scalar(n, t))?;
        let c = y.trace() / n as f64;
        if y.max_diff(&HermitianMatrix::scalar(n, c)) > tol.eps_recon * c.abs().max(1.0) {
            return Err(Error::OracleShape(format!(
                "image of {t}·1 is not a scalar"
            )));
        }
        ys.push(c);
    }
    let f = fit_monotone(&xs, &ys, cone, tol)?;
    let samples: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();

    let candidates = if n == 1 {
        vec![ProjectionIsomorphism::identity(1)]
    } else {
        let plateau = 0.5 * (f.eval(0.0) + f.eval(1.0));
        let tau_of = |q: &Projection| -> Result<Projection> {
            let y = query(&HermitianMatrix::identity(n) - &q.as_hermitian())?;
            Ok(family_of(&y, tol)?.evaluate(plateau))
        };
        let line = |v: crate::numeric::CVector| -> Result<CMatrix> {
            let p = tau_of(&span(&[v], tol)?)?;
            if p.rank() != 1 {
                return Err(Error::OracleShape(format!(
                    "image of a line has rank {}",
                    p.rank()
                )));
            }
            Ok(p.basis().clone())
        };
        let vs: Vec<CMatrix> = (0..n)
            .map(|i| line(unit_vector(n, i)))
            .collect::<Result<_>>()?;
        let mut t = CMatrix::zeros(n, n);
        t.set_column(0, &vs[0].column(0));
        for i in 1..n {
            let w = line(unit_vector(n, 0) + unit_vector(n, i))?;
            // least squares for w = a v_0 + b v_i
            let mut a = CMatrix::zeros(n, 2);
            a.set_column(0, &vs[0].column(0));
            a.set_column(1, &vs[i].column(0));
            let gram = a.adjoint() * &a;
            let coef = gram.try_inverse().ok_or(Error::OracleShape(
                "images of distinct lines coincide".into(),
            ))? * a.adjoint()
                * &w;
            if coef[0].norm() <= tol.eps_proj {
                return Err(Error::OracleShape("projective frame degenerates".into()));
            }
            let c: C64 = coef[1] / coef[0];
            t.set_column(i, &(vs[i].column(0) * c));
        }
        vec![
            ProjectionIsomorphism::new(t.clone(), false, tol)?,
            ProjectionIsomorphism::new(t, true, tol)?,
        ]
    };

    let inputs: Vec<HermitianMatrix> = (0..cfg.verify_samples)
        .map(|_| sample::in_cone(rng, n, cone))
        .collect();
    let mut outputs = Vec::with_capacity(inputs.len());
    for x in &inputs {
        outputs.push(query(x.clone())?);
    }
    let mut best: Option<(f64, ProjectionIsomorphism)> = None;
    for tau in candidates {
        let mut residual = 0.0f64;
        for (x, y) in inputs.iter().zip(&outputs) {
            let z = theta_apply(&tau, &apply_monotone(&f, x, cone, tol)?, tol)?;
            residual = residual.max(z.max_diff(y) / y.max_abs().max(1.0));
        }
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, tau));
        }
    }
    let (residual, tau) = best.expect("at least one candidate");
    if residual > tol.eps_recon {
        return Err(Error::VerificationFailed {
            what: "canonical form of a single factor".into(),
            residual,
            tolerance: tol.eps_recon,
        });
    }
    Ok(RecoveredFactor {
        iso: FactorCanonicalIso { f, tau },
        samples,
        residual,
    })
}

/// Full reconstruction: block permutation, shift and a canonical map per
/// block, assembled into a [`DirectSumIso`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub decomposition: Decomposition,
    /// Indexed by domain block.
    pub factors: Vec<RecoveredFactor>,
    pub iso: DirectSumIso,
}

pub fn reconstruct<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    tol: &ToleranceConfig,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<Reconstruction> {
    let decomposition = decompose(oracle, tol, cfg, rng)?;
    let factors = (0..oracle.domain_profile().len())
        .map(|j| recover_factor_canonical(&decomposition.block_oracle(oracle, j), tol, cfg, rng))
        .collect::<Result<Vec<_>>>()?;
    let shift = match decomposition.cone {
        ConeTag::SelfAdjoint => Some(
            decomposition
                .shift
                .central_scalars(tol)
                .ok_or_else(|| Error::NotCentral("image of zero is not central".into()))?,
        ),
        _ => None,
    };
    let iso = DirectSumIso::new(
        oracle.domain_profile().clone(),
        oracle.codomain_profile().clone(),
        decomposition.cone,
        decomposition.pi.clone(),
        factors
            .iter()
            .map(|r| BlockMap::Canonical(r.iso.clone()))
            .collect(),
        shift,
    )?;
    Ok(Reconstruction {
        decomposition,
        factors,
        iso,
    })
}

/// A pair on which orthogonality is not preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoWitness {
    pub x: DirectSumElement,
    pub y: DirectSumElement,
    /// `‖xy‖` in max-norm.
    pub domain_product: f64,
    /// `‖Φ(x)Φ(y)‖` in max-norm.
    pub image_product: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoCheck {
    pub holds: bool,
    pub trials: usize,
    pub witness: Option<OrthoWitness>,
    /// Some summand is `B(C²)`, where the structure theory of
    /// orthoisomorphisms needs extra care; informational only.
    pub dim_two_caveat: bool,
}

fn nonzero_eigenvalue<R: Rng + ?Sized>(rng: &mut R, cone: ConeTag) -> f64 {
    match cone {
        ConeTag::Effect => rng.gen_range(0.1..=1.0),
        ConeTag::Positive => rng.gen_range(0.1..3.0),
        ConeTag::SelfAdjoint => {
            let v = rng.gen_range(0.1..2.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        }
    }
}

/// Two cone elements with orthogonal supports in every block.
fn orthogonal_pair<R: Rng + ?Sized>(
    rng: &mut R,
    profile: &BlockProfile,
    cone: ConeTag,
) -> (DirectSumElement, DirectSumElement) {
    let mut xs = Vec::with_capacity(profile.len());
    let mut ys = Vec::with_capacity(profile.len());
    for &m in profile.dims() {
        let u = sample::unitary(rng, m);
        let mut x = CMatrix::zeros(m, m);
        let mut y = CMatrix::zeros(m, m);
        for i in 0..m {
            let target = match rng.gen_range(0..3) {
                0 => &mut x,
                1 => &mut y,
                _ => continue,
            };
            let col = u.column(i);
            *target += col * col.adjoint() * C64::new(nonzero_eigenvalue(rng, cone), 0.0);
        }
        xs.push(HermitianMatrix::from_raw(x));
        ys.push(HermitianMatrix::from_raw(y));
    }
    (
        DirectSumElement::new(profile.clone(), xs).expect("profile-shaped"),
        DirectSumElement::new(profile.clone(), ys).expect("profile-shaped"),
    )
}

/// Samples orthogonal and non-orthogonal pairs and checks that `Φ`
/// preserves `xy = 0` in both directions, stopping at the first violation.
pub fn is_orthoiso<O: OrderIsoOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    trials: usize,
    tol: &ToleranceConfig,
    rng: &mut R,
) -> Result<OrthoCheck> {
    let dom = oracle.domain_profile().clone();
    let cone = oracle.cone();
    let is_zero = |p: f64, a: &DirectSumElement, b: &DirectSumElement| {
        p <= tol.eps_recon * (a.norm() * b.norm()).max(1.0)
    };
    let mut check = OrthoCheck {
        holds: true,
        trials: 0,
        witness: None,
        dim_two_caveat: dom.has_dim_two_block() || oracle.codomain_profile().has_dim_two_block(),
    };
    for trial in 0..trials {
        check.trials = trial + 1;
        let (x, y) = if trial % 2 == 0 {
            orthogonal_pair(rng, &dom, cone)
        } else {
            (
                sample::ds_element(rng, &dom, cone),
                sample::ds_element(rng, &dom, cone),
            )
        };
        let domain_product = x.product_norm(&y);
        let orthogonal = is_zero(domain_product, &x, &y);
        if !orthogonal && domain_product < 1e-6 {
            // too close to orthogonal to say anything
            continue;
        }
        let (fx, fy) = (oracle.forward(&x)?, oracle.forward(&y)?);
        let image_product = fx.product_norm(&fy);
        if orthogonal != is_zero(image_product, &fx, &fy) {
            check.holds = false;
            check.witness = Some(OrthoWitness {
                x,
                y,
                domain_product,
                image_product,
            });
            break;
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::JordanIso;
    use crate::oracle::{FnOracle, IsoOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn prof(d: &[usize]) -> BlockProfile {
        BlockProfile::new(d.to_vec()).unwrap()
    }

    fn quick() -> RecoveryConfig {
        RecoveryConfig {
            verify_samples: 20,
            ..Default::default()
        }
    }

    #[test]
    fn grid_contains_landmarks() {
        for cone in ConeTag::ALL {
            let g = scalar_grid(cone, &RecoveryConfig::default());
            assert_eq!(g.len(), 129);
            for t in [0.0, 0.5, 1.0] {
                assert!(g.contains(&t), "{cone}: {t}");
            }
        }
    }

    #[test]
    fn fit_prefers_power_law_and_affine() {
        let t = tol();
        let xs = scalar_grid(ConeTag::SelfAdjoint, &RecoveryConfig::default());
        let cube: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert_eq!(
            fit_monotone(&xs, &cube, ConeTag::SelfAdjoint, &t).unwrap(),
            MonotoneBijection::power(3.0, 1.0).unwrap()
        );
        let affine: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        match fit_monotone(&xs, &affine, ConeTag::SelfAdjoint, &t).unwrap() {
            MonotoneBijection::PiecewiseLinear { xs, .. } => assert_eq!(xs.len(), 2),
            other => panic!("expected an affine map, got {other:?}"),
        }
        let bad: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!(fit_monotone(&xs, &bad, ConeTag::SelfAdjoint, &t).is_err());
    }

    #[test]
    fn identity_oracle_decomposes_trivially() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for cone in ConeTag::ALL {
            let iso = DirectSumIso::identity(&prof(&[2, 3]), cone);
            let oracle = IsoOracle::new(&iso, &t);
            let rec = reconstruct(&oracle, &t, &quick(), &mut rng).unwrap();
            assert_eq!(rec.decomposition.pi, vec![0, 1]);
            assert!(
                rec.decomposition
                    .shift
                    .max_diff(&DirectSumElement::zeros(&prof(&[2, 3])))
                    == 0.0
            );
            for r in &rec.factors {
                assert!(r.iso.f.identity_residual(&[0.0, 0.25, 1.0]) < 1e-12);
                assert!(r.iso.tau.unitarity_defect() < 1e-9);
            }
        }
    }

    #[test]
    fn swap_and_shift_are_recovered() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let p = prof(&[2, 2]);
        let mut iso = sample::direct_sum_iso(
            &mut rng,
            &p,
            ConeTag::SelfAdjoint,
            &RecoveryConfig::default(),
        );
        iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            ConeTag::SelfAdjoint,
            vec![1, 0],
            iso.blocks().to_vec(),
            Some(vec![1.0, 2.0]),
        )
        .unwrap();
        let oracle = IsoOracle::new(&iso, &t);
        let dec = decompose_sa_iso(&oracle, &t, &quick(), &mut rng).unwrap();
        assert_eq!(dec.pi, vec![1, 0]);
        assert!(
            dec.shift
                .max_diff(&DirectSumElement::central(&p, &[1.0, 2.0]))
                < 1e-12
        );
        assert!(decompose_effect_iso(&oracle, &t, &quick(), &mut rng).is_err());
    }

    #[test]
    fn semidefinite_image_of_central_difference_is_rejected() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let p = prof(&[2, 2]);
        let zs = central_atoms(&p);
        let bad_input = zs[0].checked_sub(&zs[1]).unwrap();
        let plus = zs[0].checked_add(&zs[1]).unwrap();
        let oracle = FnOracle::new(
            p.clone(),
            p.clone(),
            ConeTag::SelfAdjoint,
            |x| {
                Ok(if x.max_diff(&bad_input) == 0.0 {
                    plus.clone()
                } else {
                    x.clone()
                })
            },
            |y| Ok(y.clone()),
        );
        let err = decompose_sa_iso(&oracle, &t, &quick(), &mut rng).unwrap_err();
        assert!(
            matches!(err, Error::OracleShape(ref m) if m.contains("semidefinite")),
            "{err}"
        );
    }

    #[test]
    fn non_central_image_of_zero_is_rejected() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let p = prof(&[2]);
        let c = DirectSumElement::from_blocks(vec![HermitianMatrix::from_real_diag(&[0.0, 1.0])])
            .unwrap();
        let oracle = FnOracle::new(
            p.clone(),
            p,
            ConeTag::SelfAdjoint,
            |x| x.checked_add(&c),
            |y| y.checked_sub(&c),
        );
        assert!(matches!(
            decompose(&oracle, &t, &quick(), &mut rng),
            Err(Error::NotCentral(_))
        ));
    }

    #[test]
    fn squaring_effect_map_is_recovered_on_the_grid() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let p = prof(&[3]);
        let sq = BlockMap::Canonical(FactorCanonicalIso {
            f: MonotoneBijection::power(2.0, 1.0).unwrap(),
            tau: ProjectionIsomorphism::new(sample::unitary(&mut rng, 3), false, &t).unwrap(),
        });
        let iso =
            DirectSumIso::new(p.clone(), p, ConeTag::Effect, vec![0], vec![sq], None).unwrap();
        let r =
            recover_factor_canonical(&IsoOracle::new(&iso, &t), &t, &quick(), &mut rng).unwrap();
        for &(x, _) in &r.samples {
            assert!((r.iso.f.eval(x) - x * x).abs() <= 1e-6);
        }
    }

    #[test]
    fn jordan_maps_are_orthoisomorphisms_and_shears_are_not() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let p = prof(&[3, 2]);
        let jordan = DirectSumIso::new(
            p.clone(),
            p.clone(),
            ConeTag::Effect,
            vec![0, 1],
            vec![
                BlockMap::Jordan {
                    jordan: JordanIso::new(sample::unitary(&mut rng, 3), true, &t).unwrap(),
                    f: MonotoneBijection::identity(),
                },
                BlockMap::Jordan {
                    jordan: JordanIso::new(sample::unitary(&mut rng, 2), false, &t).unwrap(),
                    f: MonotoneBijection::power(2.0, 1.0).unwrap(),
                },
            ],
            None,
        )
        .unwrap();
        let check = is_orthoiso(&IsoOracle::new(&jordan, &t), 200, &t, &mut rng).unwrap();
        assert!(check.holds && check.witness.is_none() && check.dim_two_caveat);
        let sheared = DirectSumIso::new(
            p.clone(),
            p,
            ConeTag::Effect,
            vec![0, 1],
            vec![
                BlockMap::Canonical(FactorCanonicalIso {
                    f: MonotoneBijection::identity(),
                    tau: ProjectionIsomorphism::new(sample::shear(&mut rng, 3, 1.0), false, &t)
                        .unwrap(),
                }),
                BlockMap::Canonical(FactorCanonicalIso::identity(2)),
            ],
            None,
        )
        .unwrap();
        let check = is_orthoiso(&IsoOracle::new(&sheared, &t), 1000, &t, &mut rng).unwrap();
        assert!(!check.holds);
        let w = check.witness.unwrap();
        assert!(w.domain_product <= 1e-8 && w.image_product > 1e-8);
    }
}
