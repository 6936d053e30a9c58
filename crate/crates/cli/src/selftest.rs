//! The invariant suite behind `speclat selftest`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use speclat::direct_sum::{
    central_atoms, ds_distributive_check, ds_pos_neg_parts, ds_spec_join, ds_spec_meet,
};
use speclat::family::{element_of, family_of};
use speclat::lattice::{proj_join, proj_leq};
use speclat::numeric::{is_psd, min_eigenvalue, CMatrix};
use speclat::oracle::IsoOracle;
use speclat::order::{spec_join, spec_leq, spec_meet};
use speclat::recover::{is_orthoiso, reconstruct, RecoveryConfig};
use speclat::{
    sample, BlockMap, BlockProfile, ConeTag, DirectSumElement, DirectSumIso, FactorCanonicalIso,
    HermitianMatrix, JordanIso, MonotoneBijection, OrderIsoOracle, ProjectionIsomorphism, Result,
    ToleranceConfig, C64,
};

use crate::commands::Context;
use crate::report::{Report, Verdict};

const PROFILES: [&[usize]; 4] = [&[2, 2], &[2, 3], &[2, 2, 3], &[3, 3]];

fn profile(rng: &mut ChaCha8Rng) -> BlockProfile {
    BlockProfile::new(PROFILES[rng.gen_range(0..PROFILES.len())].to_vec()).expect("valid")
}

/// Worst residual, or the first error as a failing verdict.
fn check(name: &str, tolerance: f64, body: impl FnOnce() -> Result<f64>) -> Verdict {
    match body() {
        Ok(worst) => Verdict::bounded(name, worst, tolerance),
        Err(e) => Verdict::new(name, false).with_detail(e.to_string()),
    }
}

/// Number of failures, or the first error.
fn count(name: &str, trials: usize, body: impl FnOnce() -> Result<usize>) -> Verdict {
    match body() {
        Ok(0) => Verdict::new(name, true).with_detail(format!("{trials} trials")),
        Ok(k) => Verdict::new(name, false).with_detail(format!("{k} of {trials} trials failed")),
        Err(e) => Verdict::new(name, false).with_detail(e.to_string()),
    }
}

fn hermitian_part(m: CMatrix) -> HermitianMatrix {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    HermitianMatrix::new(h, &ToleranceConfig::default()).expect("symmetrized")
}

fn family_axioms(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=6);
        let x = sample::in_cone(rng, n, ConeTag::SelfAdjoint);
        let fam = family_of(&x, t)?;
        worst = worst.max(element_of(&fam).max_diff(&x));
        let one = CMatrix::identity(n, n);
        for &lambda in fam.breakpoints() {
            let e = fam.evaluate(lambda);
            let e = e.matrix();
            let l = C64::new(lambda, 0.0);
            let below = hermitian_part(e * l - x.matrix() * e);
            let above = hermitian_part(x.matrix() * (&one - e) - (&one - e) * l);
            worst = worst
                .max(-min_eigenvalue(&below, t)?)
                .max(-min_eigenvalue(&above, t)?);
        }
    }
    Ok(worst)
}

fn projection_order(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<usize> {
    let mut bad = 0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let r = rng.gen_range(0..=n);
        let p = sample::projection(rng, n, r);
        let r = rng.gen_range(0..=n);
        let mut q = sample::projection(rng, n, r);
        if rng.gen_bool(0.5) {
            q = proj_join(&[p.clone(), q], t)?;
        }
        bad +=
            (spec_leq(&p.as_hermitian(), &q.as_hermitian(), t)? != proj_leq(&p, &q, t)?) as usize;
    }
    Ok(bad)
}

fn loewner_separation(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<usize> {
    let x = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
    let y = HermitianMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]])?;
    let mut bad = (!is_psd(&y.checked_sub(&x)?, t)? || spec_leq(&x, &y, t)?) as usize;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let x = sample::in_cone(rng, n, ConeTag::SelfAdjoint);
        let y = sample::in_cone(rng, n, ConeTag::SelfAdjoint);
        let y = spec_join(&[x.clone(), y], ConeTag::SelfAdjoint, t)?;
        bad += (spec_leq(&x, &y, t)? && !is_psd(&y.checked_sub(&x)?, t)?) as usize;
    }
    Ok(bad)
}

fn commuting_lattice(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let u = sample::unitary(rng, n);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2..=2) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let d = |v: Vec<f64>| HermitianMatrix::from_real_diag(&v).congruence(&u);
        let lo = d(a.iter().zip(&b).map(|(p, q)| p.min(*q)).collect());
        let hi = d(a.iter().zip(&b).map(|(p, q)| p.max(*q)).collect());
        let xy = [d(a), d(b)];
        worst = worst
            .max(spec_meet(&xy, ConeTag::SelfAdjoint, t)?.max_diff(&lo))
            .max(spec_join(&xy, ConeTag::SelfAdjoint, t)?.max_diff(&hi));
    }
    Ok(worst)
}

fn lattice_bounds(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<usize> {
    let mut bad = 0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let cone = ConeTag::ALL[rng.gen_range(0..3)];
        let xy = [sample::in_cone(rng, n, cone), sample::in_cone(rng, n, cone)];
        let m = spec_meet(&xy, cone, t)?;
        let j = spec_join(&xy, cone, t)?;
        for z in &xy {
            bad += (!spec_leq(&m, z, t)? || !spec_leq(z, &j, t)?) as usize;
        }
    }
    Ok(bad)
}

fn blockwise_scale(x: &DirectSumElement, cs: &[f64]) -> Result<DirectSumElement> {
    let blocks = x
        .blocks()
        .iter()
        .zip(cs)
        .map(|(b, &c)| b.scale(c))
        .collect();
    DirectSumElement::new(x.profile().clone(), blocks)
}

fn central_lemmas(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = profile(rng);
        let cs: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(0..=1) as f64).collect();
        let z = DirectSumElement::central(&p, &cs);
        let x = sample::ds_element(rng, &p, ConeTag::Effect);
        let meet = ds_spec_meet(&[z, x.clone()], ConeTag::Effect, t)?;
        worst = worst.max(meet.max_diff(&blockwise_scale(&x, &cs)?));
        let y = sample::ds_element(rng, &p, ConeTag::Positive);
        let cuts = central_atoms(&p)
            .iter()
            .map(|a| blockwise_scale(&y, &a.central_scalars(t).expect("central")))
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(ds_spec_join(&cuts, ConeTag::Positive, t)?.max_diff(&y));
    }
    Ok(worst)
}

fn pos_neg_lemma(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<f64> {
    let cfg = RecoveryConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = profile(rng);
        let s = sample::direct_sum_iso(rng, &p, ConeTag::SelfAdjoint, &cfg);
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            ConeTag::SelfAdjoint,
            s.pi().to_vec(),
            s.blocks().to_vec(),
            None,
        )?;
        let x = sample::ds_element(rng, &p, ConeTag::SelfAdjoint);
        let (xp, xn) = ds_pos_neg_parts(&x, t)?;
        let (yp, yn) = ds_pos_neg_parts(&iso.apply(&x, t)?, t)?;
        worst = worst
            .max(yp.max_diff(&iso.apply(&xp, t)?))
            .max(yn.max_diff(&iso.apply(&xn.scale(-1.0), t)?.scale(-1.0)));
    }
    Ok(worst)
}

fn center(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<usize> {
    let p = BlockProfile::new(vec![2, 2])?;
    let mut bad = 0;
    for _ in 0..trials.div_ceil(10) {
        let cs = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)];
        let z = DirectSumElement::central(&p, &cs);
        for _ in 0..10 {
            let x = sample::ds_element(rng, &p, ConeTag::Effect);
            let y = sample::ds_element(rng, &p, ConeTag::Effect);
            bad += !ds_distributive_check(&z, &x, &y, ConeTag::Effect, t)? as usize;
        }
        let z = sample::ds_element(rng, &p, ConeTag::Effect);
        let mut found = false;
        for _ in 0..10_000 {
            let x = sample::ds_element(rng, &p, ConeTag::Effect);
            let y = sample::ds_element(rng, &p, ConeTag::Effect);
            if !ds_distributive_check(&z, &x, &y, ConeTag::Effect, t)? {
                found = true;
                break;
            }
        }
        bad += !found as usize;
    }
    Ok(bad)
}

fn recovery(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<f64> {
    let cfg = RecoveryConfig {
        verify_samples: 50,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let p = profile(rng);
        let cone = ConeTag::ALL[i % 3];
        let iso = sample::direct_sum_iso(rng, &p, cone, &cfg);
        let oracle = IsoOracle::new(&iso, t);
        let rec = reconstruct(&oracle, t, &cfg, rng)?;
        if rec.decomposition.pi != iso.pi() {
            return Ok(f64::INFINITY);
        }
        for _ in 0..20 {
            let x = sample::ds_element(rng, &p, cone);
            let y = oracle.forward(&x)?;
            worst = worst.max(rec.iso.apply(&x, t)?.max_diff(&y) / y.norm().max(1.0));
        }
    }
    Ok(worst)
}

fn orthoiso(rng: &mut ChaCha8Rng, trials: usize, t: &ToleranceConfig) -> Result<usize> {
    let mut bad = 0;
    for _ in 0..trials.div_ceil(10) {
        let p = profile(rng);
        let cone = ConeTag::ALL[rng.gen_range(0..3)];
        let jordan = p
            .dims()
            .iter()
            .map(|&m| {
                Ok(BlockMap::Jordan {
                    jordan: JordanIso::new(sample::unitary(rng, m), rng.gen_bool(0.5), t)?,
                    f: MonotoneBijection::identity(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            cone,
            (0..p.len()).collect(),
            jordan,
            None,
        )?;
        bad += !is_orthoiso(&IsoOracle::new(&iso, t), 100, t, rng)?.holds as usize;
        let sheared = p
            .dims()
            .iter()
            .map(|&m| {
                Ok(BlockMap::Canonical(FactorCanonicalIso {
                    f: MonotoneBijection::identity(),
                    tau: ProjectionIsomorphism::new(sample::shear(rng, m, 1.0), false, t)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            cone,
            (0..p.len()).collect(),
            sheared,
            None,
        )?;
        let c = is_orthoiso(&IsoOracle::new(&iso, t), 1000, t, rng)?;
        bad += (c.holds || c.witness.is_none()) as usize;
    }
    Ok(bad)
}

pub(crate) fn run(ctx: &Context, trials: usize) -> Report {
    let t = &ctx.tol;
    let mut r = ctx.report("selftest");
    let mut rng = ctx.rng();
    let rng = &mut *rng;
    let few = trials.div_ceil(5).max(1);
    r.verdicts
        .push(check("spectral family axioms and round trip", 1e-8, || {
            family_axioms(rng, trials, t)
        }));
    r.verdicts.push(count(
        "spectral order agrees with range inclusion on projections",
        trials,
        || projection_order(rng, trials, t),
    ));
    r.verdicts.push(count(
        "spectral order implies Loewner order, not conversely",
        trials,
        || loewner_separation(rng, trials, t),
    ));
    r.verdicts.push(check(
        "meet and join of commuting pairs are pointwise",
        1e-8,
        || commuting_lattice(rng, trials, t),
    ));
    r.verdicts
        .push(count("meet and join bound their inputs", trials, || {
            lattice_bounds(rng, trials, t)
        }));
    r.verdicts.push(check(
        "central projections cut blocks out of meets and joins",
        1e-8,
        || central_lemmas(rng, trials, t),
    ));
    r.verdicts.push(check(
        "canonical maps commute with positive and negative parts",
        1e-8,
        || pos_neg_lemma(rng, few, t),
    ));
    r.verdicts.push(count(
        "central elements and only those are distributive",
        trials.div_ceil(10),
        || center(rng, trials, t),
    ));
    r.verdicts.push(check(
        "random isomorphisms are recovered from black-box queries",
        1e-6,
        || recovery(rng, few, t),
    ));
    r.verdicts.push(count(
        "Jordan maps preserve orthogonality and shears do not",
        trials.div_ceil(10),
        || orthoiso(rng, trials, t),
    ));
    r
}
