use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclat::direct_sum::{
    central_atoms, ds_family, ds_pos_neg_parts, ds_spec_join, ds_spec_leq, ds_spec_meet,
};
use speclat::family::family_of;
use speclat::iso::theta_apply;
use speclat::oracle::IsoOracle;
use speclat::order::{apply_monotone, atom_scalar_decompose, spec_leq};
use speclat::recover::RecoveryConfig;
use speclat::{
    sample, BlockProfile, ConeTag, DirectSumElement, DirectSumIso, HermitianMatrix, OrderIsoOracle,
    ToleranceConfig,
};

const PROFILES: [&[usize]; 4] = [&[2, 2], &[2, 3], &[1, 2, 3], &[3, 1]];

fn random_profile(rng: &mut ChaCha8Rng) -> BlockProfile {
    BlockProfile::new(PROFILES[rng.gen_range(0..PROFILES.len())].to_vec()).unwrap()
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

#[test]
fn meet_with_central_projection_is_the_product() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let p = random_profile(&mut rng);
        let cs: Vec<f64> = (0..p.len())
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        let z = DirectSumElement::central(&p, &cs);
        let x = sample::ds_element(&mut rng, &p, ConeTag::Effect);
        let meet = ds_spec_meet(&[z, x.clone()], ConeTag::Effect, &t).unwrap();
        assert!(meet.max_diff(&blockwise_scale(&x, &cs)) <= 1e-8);
    }
}

#[test]
fn join_of_central_cuts_recovers_the_element() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let p = random_profile(&mut rng);
        let x = sample::ds_element(&mut rng, &p, ConeTag::Positive);
        let cuts: Vec<DirectSumElement> = central_atoms(&p)
            .iter()
            .map(|z| blockwise_scale(&x, &z.central_scalars(&t).unwrap()))
            .collect();
        let join = ds_spec_join(&cuts, ConeTag::Positive, &t).unwrap();
        assert!(join.max_diff(&x) <= 1e-8);
    }
}

#[test]
fn family_of_direct_sum_is_blockwise() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let p = random_profile(&mut rng);
        let x = sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint);
        let blocks = ds_family(&x, &t).unwrap();
        let whole = family_of(&x.assemble(), &t).unwrap();
        for _ in 0..10 {
            let lambda = rng.gen_range(-2.5..2.5);
            let parts: Vec<HermitianMatrix> = blocks
                .iter()
                .map(|f| f.evaluate(lambda).as_hermitian())
                .collect();
            let assembled = DirectSumElement::new(p.clone(), parts).unwrap().assemble();
            assert!(whole.evaluate(lambda).as_hermitian().max_diff(&assembled) <= 1e-8);
        }
    }
}

#[test]
fn order_on_direct_sum_is_blockwise() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut held = 0;
    for _ in 0..200 {
        let p = random_profile(&mut rng);
        let x = sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint);
        // half of the pairs are comparable by construction
        let y = if rng.gen_bool(0.5) {
            ds_spec_join(
                &[
                    x.clone(),
                    sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint),
                ],
                ConeTag::SelfAdjoint,
                &t,
            )
            .unwrap()
        } else {
            sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint)
        };
        let blockwise = ds_spec_leq(&x, &y, &t).unwrap();
        let whole = spec_leq(&x.assemble(), &y.assemble(), &t).unwrap();
        assert_eq!(blockwise, whole);
        held += blockwise as usize;
    }
    assert!(held >= 50);
}

#[test]
fn canonical_maps_commute_with_positive_and_negative_parts() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = RecoveryConfig::default();
    for _ in 0..20 {
        let p = random_profile(&mut rng);
        let sampled = sample::direct_sum_iso(&mut rng, &p, ConeTag::SelfAdjoint, &cfg);
        let iso = DirectSumIso::new(
            p.clone(),
            p.clone(),
            ConeTag::SelfAdjoint,
            sampled.pi().to_vec(),
            sampled.blocks().to_vec(),
            None,
        )
        .unwrap();
        let phi = IsoOracle::new(&iso, &t);
        for _ in 0..15 {
            let x = sample::ds_element(&mut rng, &p, ConeTag::SelfAdjoint);
            let (xp, xn) = ds_pos_neg_parts(&x, &t).unwrap();
            let (yp, yn) = ds_pos_neg_parts(&phi.forward(&x).unwrap(), &t).unwrap();
            assert!(yp.max_diff(&phi.forward(&xp).unwrap()) <= 1e-8);
            let minus = phi.forward(&xn.scale(-1.0)).unwrap().scale(-1.0);
            assert!(yn.max_diff(&minus) <= 1e-8);
        }
    }
}

#[test]
fn effect_isomorphisms_preserve_atoms() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = RecoveryConfig::default();
    for _ in 0..30 {
        let p = random_profile(&mut rng);
        let iso = sample::direct_sum_iso(&mut rng, &p, ConeTag::Effect, &cfg);
        let phi = IsoOracle::new(&iso, &t);
        let j = rng.gen_range(0..p.len());
        let atom = sample::projection(&mut rng, p.dims()[j], 1);
        let a = rng.gen_range(0.05..=1.0);
        let x = DirectSumElement::embed(&p, j, atom.as_hermitian().scale(a)).unwrap();
        let y = phi.forward(&x).unwrap();
        let k = iso.pi().iter().position(|&d| d == j).unwrap();
        // everything outside slot k is zero, slot k is a multiple of an atom
        for (l, b) in y.blocks().iter().enumerate() {
            if l != k {
                assert!(b.max_abs() <= 1e-12);
            }
        }
        let (alpha, e) = atom_scalar_decompose(y.block(k), ConeTag::Effect, &t)
            .unwrap()
            .expect("image of a scaled atom is a scaled atom");
        assert_eq!(e.rank(), 1);
        assert!(alpha > 0.0 && alpha <= 1.0 + 1e-12);
        if a == 1.0 {
            assert!((alpha - 1.0).abs() <= 1e-12);
        }
        // the top of the chain of scaled atoms is the atom itself
        let top = DirectSumElement::embed(&p, j, atom.as_hermitian()).unwrap();
        let (top_alpha, _) =
            atom_scalar_decompose(phi.forward(&top).unwrap().block(k), ConeTag::Effect, &t)
                .unwrap()
                .unwrap();
        assert!((top_alpha - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn theta_commutes_with_monotone_maps() {
    let t = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = RecoveryConfig::default();
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let cone = ConeTag::ALL[rng.gen_range(0..3)];
        let tau = sample::projection_iso(&mut rng, n);
        let f = sample::monotone_on_grid(&mut rng, cone, &cfg);
        let x = sample::in_cone(&mut rng, n, cone);
        let lhs = theta_apply(&tau, &apply_monotone(&f, &x, cone, &t).unwrap(), &t).unwrap();
        let rhs = apply_monotone(&f, &theta_apply(&tau, &x, &t).unwrap(), cone, &t).unwrap();
        assert!(lhs.max_diff(&rhs) <= 1e-8 * lhs.max_abs().max(1.0));
    }
}
