//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! always show up in the test output.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclat::direct_sum::{
    central_atoms, ds_distributive_check, ds_family, ds_is_central, ds_pos_neg_parts, ds_spec_join,
    ds_spec_leq, ds_spec_meet,
};
use speclat::family::{element_of, family_of};
use speclat::lattice::{proj_join, proj_leq};
use speclat::numeric::{is_psd, min_eigenvalue, CMatrix};
use speclat::oracle::IsoOracle;
use speclat::order::{spec_join, spec_leq, spec_meet};
use speclat::recover::{is_orthoiso, reconstruct, RecoveryConfig};
use speclat::{
    sample, BlockMap, BlockProfile, ConeTag, DirectSumElement, DirectSumIso, FactorCanonicalIso,
    HermitianMatrix, JordanIso, MonotoneBijection, OrderIsoOracle, ProjectionIsomorphism,
    ToleranceConfig, C64,
};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

fn hermitian_part(m: CMatrix) -> HermitianMatrix {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    HermitianMatrix::new(h, &ToleranceConfig::default()).unwrap()
}

fn family_axioms(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut min_slack = f64::INFINITY;
    let mut worst_round_trip: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let x = sample::in_cone(&mut rng, n, ConeTag::SelfAdjoint);
        let fam = family_of(&x, t).unwrap();
        worst_round_trip = worst_round_trip.max(element_of(&fam).max_diff(&x));
        let one = CMatrix::identity(n, n);
        let mut probes = fam.breakpoints().to_vec();
        probes.extend((0..3).map(|_| rng.gen_range(-2.5..2.5)));
        for lambda in probes {
            let e = fam.evaluate(lambda);
            let e = e.matrix();
            let l = C64::new(lambda, 0.0);
            // xE ≤ λE and λ(1 − E) ≤ x(1 − E)
            let below = hermitian_part(e * l - x.matrix() * e);
            let above = hermitian_part(x.matrix() * (&one - e) - (&one - e) * l);
            min_slack = min_slack
                .min(min_eigenvalue(&below, t).unwrap())
                .min(min_eigenvalue(&above, t).unwrap());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        min_slack >= -1e-8 && worst_round_trip <= 1e-8 && elapsed < Duration::from_secs(10),
        format!(
            "1000 matrices, min PSD slack {min_slack:.2e}, round trip {worst_round_trip:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn projection_order(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut disagree, mut held) = (0, 0);
    for _ in 0..500 {
        let n = rng.gen_range(1..=6);
        let r = rng.gen_range(0..=n);
        let p = sample::projection(&mut rng, n, r);
        let r = rng.gen_range(0..=n);
        let mut q = sample::projection(&mut rng, n, r);
        if rng.gen_bool(0.5) {
            q = proj_join(&[p.clone(), q], t).unwrap();
        }
        let a = spec_leq(&p.as_hermitian(), &q.as_hermitian(), t).unwrap();
        let b = proj_leq(&p, &q, t).unwrap();
        disagree += (a != b) as usize;
        held += b as usize;
    }
    outcome(
        disagree == 0,
        format!("500 pairs ({held} ordered), {disagree} disagreements"),
    )
}

fn loewner_separation(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut violations, mut ordered) = (0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let x = sample::in_cone(&mut rng, n, ConeTag::SelfAdjoint);
        let mut y = sample::in_cone(&mut rng, n, ConeTag::SelfAdjoint);
        if rng.gen_bool(0.5) {
            y = spec_join(&[x.clone(), y], ConeTag::SelfAdjoint, t).unwrap();
        }
        if spec_leq(&x, &y, t).unwrap() {
            ordered += 1;
            violations += !is_psd(&y.checked_sub(&x).unwrap(), t).unwrap() as usize;
        }
    }
    let x = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
    let y = HermitianMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
    let loewner = is_psd(&y.checked_sub(&x).unwrap(), t).unwrap();
    let spectral = spec_leq(&x, &y, t).unwrap();
    outcome(
        violations == 0 && loewner && !spectral,
        format!(
            "{ordered} ordered pairs, {violations} without PSD(y − x); counterexample loewner={loewner} spectral={spectral}"
        ),
    )
}

fn lattice_formulas(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(2..=4);
        let u = sample::unitary(&mut rng, n);
        // coarse values make ties between members common
        let spectra: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-4..=4) as f64 * 0.5).collect())
            .collect();
        let lift = |d: &[f64]| HermitianMatrix::from_real_diag(d).congruence(&u);
        let xs: Vec<HermitianMatrix> = spectra.iter().map(|d| lift(d)).collect();
        let pointwise = |pick: fn(f64, f64) -> f64| -> Vec<f64> {
            (0..n)
                .map(|i| spectra.iter().map(|d| d[i]).reduce(pick).unwrap())
                .collect()
        };
        let lo = lift(&pointwise(f64::min));
        let hi = lift(&pointwise(f64::max));
        worst = worst
            .max(
                spec_meet(&xs, ConeTag::SelfAdjoint, t)
                    .unwrap()
                    .max_diff(&lo),
            )
            .max(
                spec_join(&xs, ConeTag::SelfAdjoint, t)
                    .unwrap()
                    .max_diff(&hi),
            );
    }
    let mut violations = 0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=6);
        let cone = ConeTag::ALL[rng.gen_range(0..3)];
        let x = sample::in_cone(&mut rng, n, cone);
        let y = sample::in_cone(&mut rng, n, cone);
        let z = sample::in_cone(&mut rng, n, cone);
        let xy = [x.clone(), y.clone()];
        let m = spec_meet(&xy, cone, t).unwrap();
        let j = spec_join(&xy, cone, t).unwrap();
        let leq = |a: &HermitianMatrix, b: &HermitianMatrix| spec_leq(a, b, t).unwrap();
        let scalar = |c: f64| HermitianMatrix::scalar(n, c);
        let lmin = min_eigenvalue(&x, t)
            .unwrap()
            .min(min_eigenvalue(&y, t).unwrap());
        let lmax = -min_eigenvalue(&x.scale(-1.0), t)
            .unwrap()
            .min(min_eigenvalue(&y.scale(-1.0), t).unwrap());
        let checks = [
            leq(&m, &x),
            leq(&m, &y),
            leq(&x, &j),
            leq(&y, &j),
            // independent common bounds are dominated
            leq(&scalar(lmin), &m),
            leq(&j, &scalar(lmax)),
            leq(
                &spec_meet(&[x.clone(), y.clone(), z.clone()], cone, t).unwrap(),
                &m,
            ),
            leq(&j, &spec_join(&[x.clone(), y.clone(), z], cone, t).unwrap()),
        ];
        violations += checks.iter().filter(|&&c| !c).count();
    }
    outcome(
        worst <= 1e-8 && violations == 0,
        format!("500 commuting families max error {worst:.2e}; 500 generic pairs, {violations} bound violations"),
    )
}

const LEMMA_PROFILES: [&[usize]; 4] = [&[2, 2], &[2, 3], &[1, 2, 3], &[3, 3]];

fn lemma_profile(rng: &mut ChaCha8Rng) -> BlockProfile {
    BlockProfile::new(LEMMA_PROFILES[rng.gen_range(0..4)].to_vec()).unwrap()
}

fn blockwise_scale(x: &DirectSumElement, cs: &[f64]) -> DirectSumElement {
    let blocks = x
        .blocks()
        .iter()
        .zip(cs)
        .map(|(b, &c)| b.scale(c))
        .collect();
    DirectSumElement::new(x.profile().clone(), blocks).unwrap()
}

fn lemma_suite(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let n = 300;
    let mut worst = [0.0f64; 5];
    let mut failures = [0usize; 5];
    let cfg = RecoveryConfig::default();
    for _ in 0..n {
        let p = lemma_profile(&mut rng);

        // zx = z ∧ x for a central projection z
        let cs: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(0..=1) as f64).collect();
        let z = DirectSumElement::central(&p, &cs);
        let x = sample::ds_element(&mut rng, &p, ConeTag::Effect);
        let m = ds_spec_meet(&[z, x.clone()], ConeTag::Effect, t).unwrap();
        worst[0] = worst[0].max(m.max_diff(&blockwise_scale(&x, &cs)));

        // ⋁_j z_j x = x
        let x = sample::ds_element(&mut rng, &p, ConeTag::Positive);
        let cuts: Vec<DirectSumElement> = central_atoms(&p)
            .iter()
            .map(|a| blockwise_scale(&x, &a.central_scalars(t).unwrap()))
            .collect();
        worst[1] = worst[1].max(
            ds_spec_join(&cuts, ConeTag::Positive, t)
                .unwrap()
                .max_diff(&x),
        );

        // family of a direct sum is the direct sum of the families
        let x = sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint);
        let parts = ds_family(&x, t).unwrap();
        let whole = family_of(&x.assemble(), t).unwrap();
        for _ in 0..5 {
            let lambda = rng.gen_range(-2.5..2.5);
            let blocks = parts
                .iter()
                .map(|f| f.evaluate(lambda).as_hermitian())
                .collect();
            let assembled = DirectSumElement::new(p.clone(), blocks).unwrap().assemble();
            worst[2] = worst[2].max(whole.evaluate(lambda).as_hermitian().max_diff(&assembled));
        }

        // order on a direct sum is blockwise
        let y = if rng.gen_bool(0.5) {
            ds_spec_join(
                &[
                    x.clone(),
                    sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint),
                ],
                ConeTag::SelfAdjoint,
                t,
            )
            .unwrap()
        } else {
            sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint)
        };
        failures[3] += (ds_spec_leq(&x, &y, t).unwrap()
            != spec_leq(&x.assemble(), &y.assemble(), t).unwrap()) as usize;

        // Φ(x)⁺ = Φ(x⁺) and Φ(x)⁻ = −Φ(−x⁻) when Φ(0) = 0
        let s = sample::direct_sum_iso(&mut rng, &p, ConeTag::SelfAdjoint, &cfg);
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            ConeTag::SelfAdjoint,
            s.pi().to_vec(),
            s.blocks().to_vec(),
            None,
        )
        .unwrap();
        let (xp, xn) = ds_pos_neg_parts(&x, t).unwrap();
        let (yp, yn) = ds_pos_neg_parts(&iso.apply(&x, t).unwrap(), t).unwrap();
        let minus = iso.apply(&xn.scale(-1.0), t).unwrap().scale(-1.0);
        worst[4] = worst[4]
            .max(yp.max_diff(&iso.apply(&xp, t).unwrap()))
            .max(yn.max_diff(&minus));
    }
    for i in [0, 1, 2, 4] {
        failures[i] += (worst[i] > 1e-8) as usize;
    }
    outcome(
        failures.iter().all(|&f| f == 0),
        format!(
            "{n} instances each; max residuals meet-with-center {:.1e}, join-of-cuts {:.1e}, family {:.1e}, pos/neg {:.1e}; {} blockwise-order mismatches",
            worst[0], worst[1], worst[2], worst[4], failures[3]
        ),
    )
}

fn center_is_distributive(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut central_failures = 0;
    let profiles = [vec![2, 2], vec![2, 3], vec![1, 3]];
    for i in 0..10 {
        let p = BlockProfile::new(profiles[i % 3].clone()).unwrap();
        let cone = ConeTag::ALL[i % 3];
        let cs: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let z = DirectSumElement::central(&p, &cs);
        assert!(ds_is_central(&z, t).unwrap());
        for _ in 0..200 {
            let x = sample::ds_element(&mut rng, &p, cone);
            let y = sample::ds_element(&mut rng, &p, cone);
            central_failures += !ds_distributive_check(&z, &x, &y, cone, t).unwrap() as usize;
        }
    }
    let p = BlockProfile::new(vec![2, 2]).unwrap();
    let (mut found, mut most) = (0, 0);
    for _ in 0..20 {
        let z = loop {
            let z = sample::ds_element(&mut rng, &p, ConeTag::Effect);
            if !ds_is_central(&z, t).unwrap() {
                break z;
            }
        };
        for k in 1..=10_000 {
            let x = sample::ds_element(&mut rng, &p, ConeTag::Effect);
            let y = sample::ds_element(&mut rng, &p, ConeTag::Effect);
            if !ds_distributive_check(&z, &x, &y, ConeTag::Effect, t).unwrap() {
                found += 1;
                most = most.max(k);
                break;
            }
        }
    }
    outcome(
        central_failures == 0 && found == 20,
        format!(
            "10 central elements x 200 pairs, {central_failures} failures; witnesses for {found}/20 non-central, worst after {most} samples"
        ),
    )
}

fn structure_recovery(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let profiles = [vec![2, 2], vec![2, 3], vec![2, 2, 3], vec![3, 3]];
    let cfg = RecoveryConfig::default();
    let start = Instant::now();
    let (mut pi_ok, mut shift_worst, mut apply_worst, mut errors) = (0, 0.0f64, 0.0f64, 0);
    for i in 0..100 {
        let p = BlockProfile::new(profiles[rng.gen_range(0..4)].clone()).unwrap();
        let cone = ConeTag::ALL[i % 3];
        let iso = sample::direct_sum_iso(&mut rng, &p, cone, &cfg);
        let oracle = IsoOracle::new(&iso, t);
        let rec = match reconstruct(&oracle, t, &cfg, &mut rng) {
            Ok(r) => r,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        pi_ok += (rec.decomposition.pi == iso.pi()) as usize;
        let shift = DirectSumElement::central(&p, iso.shift());
        shift_worst = shift_worst.max(rec.decomposition.shift.max_diff(&shift));
        for _ in 0..200 {
            let x = sample::ds_element(&mut rng, &p, cone);
            let y = oracle.forward(&x).unwrap();
            let z = rec.iso.apply(&x, t).unwrap();
            apply_worst = apply_worst.max(z.max_diff(&y) / y.norm().max(1.0));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        errors == 0
            && pi_ok == 100
            && shift_worst <= 1e-8
            && apply_worst <= 1e-6
            && elapsed < Duration::from_secs(60),
        format!(
            "100 isomorphisms: π exact {pi_ok}/100, {errors} errors, shift error {shift_worst:.1e}, application error {apply_worst:.1e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn orthoiso_discrimination(t: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let profiles = [vec![3], vec![2, 3], vec![3, 3], vec![2, 2, 3]];
    let mut false_negatives = 0;
    for i in 0..20 {
        let p = BlockProfile::new(profiles[i % 4].clone()).unwrap();
        let cone = ConeTag::ALL[i % 3];
        let blocks = p
            .dims()
            .iter()
            .map(|&m| BlockMap::Jordan {
                jordan: JordanIso::new(sample::unitary(&mut rng, m), rng.gen_bool(0.5), t).unwrap(),
                f: sample::monotone_on_grid(&mut rng, cone, &RecoveryConfig::default()),
            })
            .collect();
        let pi = sample::block_permutation(&mut rng, &p);
        let iso = DirectSumIso::new(p.clone(), p.clone(), cone, pi, blocks, None).unwrap();
        false_negatives += !is_orthoiso(&IsoOracle::new(&iso, t), 500, t, &mut rng)
            .unwrap()
            .holds as usize;
    }
    let mut caught = 0;
    let mut most = 0;
    for i in 0..20 {
        let p = BlockProfile::new(profiles[i % 4].clone()).unwrap();
        let cone = ConeTag::ALL[i % 3];
        let blocks = p
            .dims()
            .iter()
            .map(|&m| {
                BlockMap::Canonical(FactorCanonicalIso {
                    f: MonotoneBijection::identity(),
                    tau: ProjectionIsomorphism::new(
                        sample::shear(&mut rng, m, 1.0) * sample::unitary(&mut rng, m),
                        rng.gen_bool(0.5),
                        t,
                    )
                    .unwrap(),
                })
            })
            .collect();
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            cone,
            (0..p.len()).collect(),
            blocks,
            None,
        )
        .unwrap();
        let check = is_orthoiso(&IsoOracle::new(&iso, t), 1000, t, &mut rng).unwrap();
        if !check.holds && check.witness.is_some() {
            caught += 1;
            most = most.max(check.trials);
        }
    }
    outcome(
        false_negatives == 0 && caught >= 18,
        format!(
            "Jordan: {false_negatives}/20 rejected; shear: {caught}/20 caught with witness, worst after {most} trials"
        ),
    )
}

fn motivating_example() -> Outcome {
    let iso =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cube_second_summand.json");
    let out = speclat_cli::run(["speclat", "--json", "decompose", iso.to_str().unwrap()]);
    let Some(report) = out.report else {
        return outcome(false, format!("decompose failed: {}", out.text.trim()));
    };
    let result = &report.result;
    let pi: Vec<u64> = result["pi"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_u64()).collect())
        .unwrap_or_default();
    let deviation = |block: usize, g: fn(f64) -> f64| -> f64 {
        result["blocks"][block]["samples"]
            .as_array()
            .map(|s| {
                s.iter()
                    .map(|pt| {
                        let (x, y) = (pt[0].as_f64().unwrap(), pt[1].as_f64().unwrap());
                        (y - g(x)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY)
    };
    let first = deviation(0, |x| x);
    let second = deviation(1, |x| x * x * x);
    outcome(
        out.code == 0 && pi == [1, 2] && first <= 1e-6 && second <= 1e-6,
        format!(
            "exit {}, π = {pi:?}, |f₁ − t| ≤ {first:.1e}, |f₂ − t³| ≤ {second:.1e}",
            out.code
        ),
    )
}

fn main() {
    let t = ToleranceConfig::default();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        (
            "spectral family axioms",
            Box::new(move || family_axioms(&t)),
        ),
        (
            "order coincides on projections",
            Box::new(move || projection_order(&t)),
        ),
        (
            "Loewner vs spectral separation",
            Box::new(move || loewner_separation(&t)),
        ),
        ("lattice formulas", Box::new(move || lattice_formulas(&t))),
        ("direct-sum lemma suite", Box::new(move || lemma_suite(&t))),
        (
            "center equals distributive elements",
            Box::new(move || center_is_distributive(&t)),
        ),
        (
            "structure recovery",
            Box::new(move || structure_recovery(&t)),
        ),
        (
            "orthoisomorphism discrimination",
            Box::new(move || orthoiso_discrimination(&t)),
        ),
        (
            "(x, y) ↦ (x, y³) via CLI decompose",
            Box::new(motivating_example),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.summary
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
