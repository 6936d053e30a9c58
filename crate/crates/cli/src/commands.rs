use std::cell::RefCell;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use speclat::direct_sum::{
    ds_distributive_check, ds_family, ds_is_central, ds_pos_neg_parts, ds_spec_join, ds_spec_leq,
    ds_spec_meet,
};
use speclat::family::element_of;
use speclat::numeric::is_psd;
use speclat::oracle::IsoOracle;
use speclat::order::atom_scalar_decompose;
use speclat::recover::{is_orthoiso, reconstruct, RecoveryConfig};
use speclat::{sample, BlockProfile, ConeTag, DirectSumElement, DirectSumIso, ToleranceConfig};

use crate::doc::{
    emit_element, matrix_to_doc, parse_element, parse_iso, ElementDocument, IsoDocument,
    MonotoneDoc,
};
use crate::report::{digest, Report, Verdict, Witness};
use crate::CliError;

pub(crate) struct Context {
    pub tol: ToleranceConfig,
    pub seed: u64,
    rng: RefCell<ChaCha8Rng>,
}

impl Context {
    pub fn new(tol: ToleranceConfig, seed: u64) -> Self {
        Self {
            tol,
            seed,
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn report(&self, command: &str) -> Report {
        Report::new(command, self.seed, &self.tol)
    }

    pub fn rng(&self) -> std::cell::RefMut<'_, ChaCha8Rng> {
        self.rng.borrow_mut()
    }
}

fn core_err(e: speclat::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn same_profile(a: &BlockProfile, b: &BlockProfile, what: &str) -> Result<(), CliError> {
    if a == b {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "profile mismatch between arguments: {what} has {:?}, expected {:?}",
            b.dims(),
            a.dims()
        )))
    }
}

fn element_doc(x: &DirectSumElement, cone: ConeTag) -> serde_json::Value {
    serde_json::to_value(ElementDocument::from_element(x, cone)).expect("documents serialize")
}

fn witness(check: &str, elements: &[(&str, &DirectSumElement, ConeTag)]) -> Witness {
    Witness {
        check: check.into(),
        elements: elements
            .iter()
            .map(|(l, x, c)| (l.to_string(), ElementDocument::from_element(x, *c)))
            .collect(),
    }
}

fn dim_two_flag(report: &mut Report, profiles: &[&BlockProfile]) {
    if profiles.iter().any(|p| p.has_dim_two_block()) {
        report.flags.push(
            "a summand is 2x2: structure results for orthoisomorphisms assume no such summand, \
             checks here are numerical only"
                .into(),
        );
    }
}

pub(crate) fn order(ctx: &Context, x: &Path, y: &Path) -> Result<Report, CliError> {
    let (a, _, ba) = parse_element(x, &ctx.tol)?;
    let (b, _, bb) = parse_element(y, &ctx.tol)?;
    same_profile(a.profile(), b.profile(), "y")?;
    let spectral = ds_spec_leq(&a, &b, &ctx.tol).map_err(core_err)?;
    let diff = b.checked_sub(&a).map_err(core_err)?;
    let loewner = is_psd(&diff.assemble(), &ctx.tol).map_err(core_err)?;
    let mut r = ctx.report("order");
    r.inputs_digest = digest(&[ba, bb]);
    r.verdicts.push(Verdict::new("x ⪯ y", spectral));
    r.result = json!({ "spectral": spectral, "loewner": loewner });
    Ok(r)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum LatticeOp {
    Meet,
    Join,
}

fn parse_all(
    ctx: &Context,
    inputs: &[PathBuf],
) -> Result<(Vec<DirectSumElement>, ConeTag, Vec<Vec<u8>>), CliError> {
    let mut xs = Vec::new();
    let mut bytes = Vec::new();
    let mut cone = None;
    for (i, path) in inputs.iter().enumerate() {
        let (x, c, b) = parse_element(path, &ctx.tol)?;
        if let Some(first) = xs.first() {
            same_profile(
                DirectSumElement::profile(first),
                x.profile(),
                &format!("input {}", i + 1),
            )?;
        }
        // the common cone is the largest one named
        cone = Some(match (cone, c) {
            (None, c) => c,
            (Some(ConeTag::SelfAdjoint), _) | (_, ConeTag::SelfAdjoint) => ConeTag::SelfAdjoint,
            (Some(ConeTag::Positive), _) | (_, ConeTag::Positive) => ConeTag::Positive,
            _ => ConeTag::Effect,
        });
        xs.push(x);
        bytes.push(b);
    }
    Ok((xs, cone.expect("at least one input"), bytes))
}

pub(crate) fn lattice(
    ctx: &Context,
    inputs: &[PathBuf],
    op: LatticeOp,
) -> Result<Report, CliError> {
    let (xs, cone, bytes) = parse_all(ctx, inputs)?;
    let (name, z) = match op {
        LatticeOp::Meet => ("meet", ds_spec_meet(&xs, cone, &ctx.tol)),
        LatticeOp::Join => ("join", ds_spec_join(&xs, cone, &ctx.tol)),
    };
    let z = z.map_err(core_err)?;
    let mut bound = true;
    for x in &xs {
        bound &= match op {
            LatticeOp::Meet => ds_spec_leq(&z, x, &ctx.tol),
            LatticeOp::Join => ds_spec_leq(x, &z, &ctx.tol),
        }
        .map_err(core_err)?;
    }
    let mut r = ctx.report(name);
    r.inputs_digest = digest(&bytes);
    let check = match op {
        LatticeOp::Meet => "meet ⪯ every input",
        LatticeOp::Join => "every input ⪯ join",
    };
    r.verdicts.push(Verdict::new(check, bound));
    r.result = element_doc(&z, cone);
    Ok(r)
}

pub(crate) fn family(ctx: &Context, input: &Path) -> Result<Report, CliError> {
    let (x, _, bytes) = parse_element(input, &ctx.tol)?;
    let fams = ds_family(&x, &ctx.tol).map_err(core_err)?;
    let mut worst: f64 = 0.0;
    let mut blocks = Vec::new();
    for (fam, b) in fams.iter().zip(x.blocks()) {
        worst = worst.max(element_of(fam).max_diff(b));
        blocks.push(json!({
            "breakpoints": fam.breakpoints(),
            "ranks": fam.cumulative().iter().map(|p| p.rank()).collect::<Vec<_>>(),
            "projections": fam.cumulative().iter().map(|p| matrix_to_doc(p.matrix())).collect::<Vec<_>>(),
        }));
    }
    let mut r = ctx.report("family");
    r.inputs_digest = digest(&[bytes]);
    r.verdicts.push(Verdict::bounded(
        "element rebuilt from its family",
        worst,
        ctx.tol.eps_recon * x.norm().max(1.0),
    ));
    r.result = json!({ "blocks": blocks });
    Ok(r)
}

pub(crate) fn posneg(ctx: &Context, input: &Path) -> Result<Report, CliError> {
    let (x, _, bytes) = parse_element(input, &ctx.tol)?;
    let (p, n) = ds_pos_neg_parts(&x, &ctx.tol).map_err(core_err)?;
    let scale = ctx.tol.eps_recon * x.norm().max(1.0);
    let rebuilt = p.checked_sub(&n).map_err(core_err)?.max_diff(&x);
    let mut r = ctx.report("posneg");
    r.inputs_digest = digest(&[bytes]);
    r.verdicts
        .push(Verdict::bounded("x = x⁺ − x⁻", rebuilt, scale));
    r.verdicts.push(Verdict::bounded(
        "x⁺x⁻ = 0",
        p.product_norm(&n),
        scale * x.norm().max(1.0),
    ));
    r.result = json!({
        "positive": element_doc(&p, ConeTag::Positive),
        "negative": element_doc(&n, ConeTag::Positive),
    });
    Ok(r)
}

pub(crate) fn atoms(ctx: &Context, input: &Path) -> Result<Report, CliError> {
    let (x, cone, bytes) = parse_element(input, &ctx.tol)?;
    if cone == ConeTag::SelfAdjoint {
        return Err(CliError::Input(
            "atoms: element must be given on the positive or effect cone".into(),
        ));
    }
    let nonzero: Vec<usize> = (0..x.profile().len())
        .filter(|&j| x.block(j).max_abs() > ctx.tol.eps_recon)
        .collect();
    let mut r = ctx.report("atoms");
    r.inputs_digest = digest(&[bytes]);
    let check = "x is a positive multiple of an atomic projection";
    match nonzero.as_slice() {
        [] => r
            .verdicts
            .push(Verdict::new(check, false).with_detail("x is zero")),
        &[j] => match atom_scalar_decompose(x.block(j), cone, &ctx.tol).map_err(core_err)? {
            Some((alpha, e)) => {
                r.verdicts.push(Verdict::new(check, true));
                r.result = json!({
                    "block": j + 1,
                    "scalar": alpha,
                    "projection": matrix_to_doc(e.matrix()),
                });
            }
            None => r.verdicts.push(
                Verdict::new(check, false)
                    .with_detail(format!("block {} has rank above one", j + 1)),
            ),
        },
        _ => r.verdicts.push(
            Verdict::new(check, false).with_detail(format!("{} nonzero blocks", nonzero.len())),
        ),
    }
    Ok(r)
}

pub(crate) fn center(ctx: &Context, input: &Path, trials: usize) -> Result<Report, CliError> {
    let (z, cone, bytes) = parse_element(input, &ctx.tol)?;
    let central = ds_is_central(&z, &ctx.tol).map_err(core_err)?;
    let mut r = ctx.report("center");
    r.inputs_digest = digest(&[bytes]);
    r.verdicts.push(Verdict::new("x is central", central));
    let mut rng = ctx.rng();
    let mut found = None;
    let mut tried = 0;
    let budget = if central { trials.min(200) } else { trials };
    for _ in 0..budget {
        tried += 1;
        let a = sample::ds_element(&mut *rng, z.profile(), cone);
        let b = sample::ds_element(&mut *rng, z.profile(), cone);
        if !ds_distributive_check(&z, &a, &b, cone, &ctx.tol).map_err(core_err)? {
            found = Some((a, b));
            break;
        }
    }
    if central {
        r.verdicts.push(
            Verdict::new("distributive on all samples", found.is_none())
                .with_detail(format!("{tried} sampled pairs")),
        );
    } else {
        r.verdicts.push(
            Verdict::new("distributivity witness found", found.is_some())
                .with_detail(format!("{tried} sampled pairs")),
        );
    }
    if let Some((a, b)) = &found {
        r.witnesses.push(witness(
            "z ∨ (x ∧ y) = (z ∨ x) ∧ (z ∨ y)",
            &[("x", a, cone), ("y", b, cone)],
        ));
    }
    r.result = json!({ "central_scalars": z.central_scalars(&ctx.tol) });
    Ok(r)
}

fn check_in_cone(
    x: &DirectSumElement,
    iso: &DirectSumIso,
    tol: &ToleranceConfig,
) -> Result<(), CliError> {
    same_profile(iso.domain(), x.profile(), "element")?;
    x.check_cone(iso.cone(), tol).map_err(core_err)
}

pub(crate) fn apply_iso(
    ctx: &Context,
    iso_path: &Path,
    input: &Path,
    out: Option<&Path>,
) -> Result<Report, CliError> {
    let (iso, bi) = parse_iso(iso_path, &ctx.tol)?;
    let (x, _, bx) = parse_element(input, &ctx.tol)?;
    check_in_cone(&x, &iso, &ctx.tol)?;
    let y = iso.apply(&x, &ctx.tol).map_err(core_err)?;
    let back = iso.apply_inverse(&y, &ctx.tol).map_err(core_err)?;
    if let Some(path) = out {
        emit_element(&y, iso.cone(), path)?;
    }
    let mut r = ctx.report("apply-iso");
    r.inputs_digest = digest(&[bi, bx]);
    r.verdicts.push(Verdict::bounded(
        "inverse recovers the input",
        back.max_diff(&x),
        ctx.tol.eps_recon * x.norm().max(1.0),
    ));
    r.result = element_doc(&y, iso.cone());
    Ok(r)
}

pub(crate) fn decompose(ctx: &Context, iso_path: &Path) -> Result<Report, CliError> {
    let (iso, bytes) = parse_iso(iso_path, &ctx.tol)?;
    let mut r = ctx.report("decompose");
    r.inputs_digest = digest(&[bytes]);
    dim_two_flag(&mut r, &[iso.domain(), iso.codomain()]);
    let oracle = IsoOracle::new(&iso, &ctx.tol);
    let cfg = RecoveryConfig::default();
    let rec = match reconstruct(&oracle, &ctx.tol, &cfg, &mut *ctx.rng()) {
        Ok(rec) => rec,
        Err(e) => {
            r.verdicts
                .push(Verdict::new("decomposition", false).with_detail(e.to_string()));
            return Ok(r);
        }
    };
    let dec = &rec.decomposition;
    let pi: Vec<usize> = dec.pi.iter().map(|&j| j + 1).collect();
    r.verdicts.push(
        Verdict::new("π matches the declared permutation", dec.pi == iso.pi())
            .with_detail(format!("π = {pi:?}")),
    );
    let shift_err = dec
        .shift
        .max_diff(&DirectSumElement::central(iso.codomain(), iso.shift()));
    r.verdicts.push(Verdict::bounded(
        "central shift",
        shift_err,
        ctx.tol.eps_recon,
    ));
    r.verdicts.push(Verdict::bounded(
        "blockwise reassembly",
        dec.residual,
        ctx.tol.eps_recon,
    ));
    r.verdicts.push(Verdict::bounded(
        "inverse round trip",
        dec.inverse_residual,
        ctx.tol.eps_recon,
    ));
    let mut blocks = Vec::new();
    for (j, f) in rec.factors.iter().enumerate() {
        r.verdicts.push(Verdict::bounded(
            format!("block {} canonical form", j + 1),
            f.residual,
            ctx.tol.eps_recon,
        ));
        blocks.push(json!({
            "domain_block": j + 1,
            "codomain_block": dec.slot_of(j) + 1,
            "f": MonotoneDoc::from_map(&f.iso.f),
            "samples": f.samples.iter().map(|&(t, v)| [t, v]).collect::<Vec<_>>(),
            "residual": f.residual,
            "tau": {
                "T": matrix_to_doc(f.iso.tau.matrix()),
                "antilinear": f.iso.tau.is_antilinear(),
                "unitarity_defect": f.iso.tau.unitarity_defect(),
            },
        }));
    }
    r.result = json!({
        "pi": pi,
        "shift": dec.shift.central_scalars(&ctx.tol),
        "residual": dec.residual,
        "inverse_residual": dec.inverse_residual,
        "blocks": blocks,
        "iso": IsoDocument::from_iso(&rec.iso),
    });
    Ok(r)
}

/// An input pair, comparable by construction half of the time.
fn sample_pair<R: Rng>(
    rng: &mut R,
    p: &BlockProfile,
    cone: ConeTag,
    tol: &ToleranceConfig,
) -> speclat::Result<(DirectSumElement, DirectSumElement)> {
    let x = sample::ds_element(rng, p, cone);
    let y = sample::ds_element(rng, p, cone);
    if rng.gen_bool(0.5) {
        let j = ds_spec_join(&[x.clone(), y], cone, tol)?;
        Ok((x, j))
    } else {
        Ok((x, y))
    }
}

pub(crate) fn verify_iso(
    ctx: &Context,
    iso_path: &Path,
    ortho: bool,
    trials: usize,
) -> Result<Report, CliError> {
    let (iso, bytes) = parse_iso(iso_path, &ctx.tol)?;
    let tol = &ctx.tol;
    let mut r = ctx.report("verify-iso");
    r.inputs_digest = digest(&[bytes]);
    let cone = iso.cone();
    let mut rng = ctx.rng();
    let mut order_fail = None;
    let mut cone_fail = None;
    let mut worst_inverse: f64 = 0.0;
    let mut comparable = 0;
    for _ in 0..trials {
        let (x, y) = sample_pair(&mut *rng, iso.domain(), cone, tol).map_err(core_err)?;
        let fx = iso.apply(&x, tol).map_err(core_err)?;
        let fy = iso.apply(&y, tol).map_err(core_err)?;
        let before = ds_spec_leq(&x, &y, tol).map_err(core_err)?;
        let after = ds_spec_leq(&fx, &fy, tol).map_err(core_err)?;
        comparable += before as usize;
        if before != after && order_fail.is_none() {
            order_fail = Some((x.clone(), y.clone()));
        }
        if !fx.in_cone(cone, tol).map_err(core_err)? && cone_fail.is_none() {
            cone_fail = Some(x.clone());
        }
        let back = iso.apply_inverse(&fx, tol).map_err(core_err)?;
        worst_inverse = worst_inverse.max(back.max_diff(&x) / x.norm().max(1.0));
    }
    r.verdicts.push(
        Verdict::new("x ⪯ y ⇔ Φ(x) ⪯ Φ(y)", order_fail.is_none())
            .with_detail(format!("{trials} pairs, {comparable} comparable")),
    );
    r.verdicts.push(Verdict::new(
        format!("Φ maps into the {cone} cone"),
        cone_fail.is_none(),
    ));
    r.verdicts.push(Verdict::bounded(
        "Φ⁻¹(Φ(x)) = x",
        worst_inverse,
        tol.eps_recon,
    ));
    if let Some((x, y)) = &order_fail {
        r.witnesses.push(witness(
            "order preservation",
            &[("x", x, cone), ("y", y, cone)],
        ));
    }
    if let Some(x) = &cone_fail {
        r.witnesses
            .push(witness("cone preservation", &[("x", x, cone)]));
    }
    if ortho {
        let check =
            is_orthoiso(&IsoOracle::new(&iso, tol), trials, tol, &mut *rng).map_err(core_err)?;
        r.verdicts.push(
            Verdict::new("xy = 0 ⇔ Φ(x)Φ(y) = 0", check.holds)
                .with_detail(format!("{} trials", check.trials)),
        );
        if let Some(w) = &check.witness {
            r.witnesses.push(witness(
                "orthogonality preservation",
                &[("x", &w.x, cone), ("y", &w.y, cone)],
            ));
            r.result = json!({
                "domain_product": w.domain_product,
                "image_product": w.image_product,
            });
        }
        if check.dim_two_caveat {
            dim_two_flag(&mut r, &[iso.domain(), iso.codomain()]);
        }
    }
    Ok(r)
}
