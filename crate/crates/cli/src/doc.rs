//! JSON documents for elements and isomorphisms.
//!
//! Complex entries are `[re, im]` pairs and matrices are lists of rows.
//! Block permutations are 1-based on disk.

use std::path::Path;

use serde::{Deserialize, Serialize};

use speclat::numeric::CMatrix;
use speclat::{
    BlockMap, BlockProfile, ConeTag, DirectSumElement, DirectSumIso, FactorCanonicalIso,
    HermitianMatrix, JordanIso, MonotoneBijection, ProjectionIsomorphism, ToleranceConfig, C64,
};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc, field: &str) -> Result<CMatrix, CliError> {
    let n = doc.len();
    if n == 0 {
        return Err(CliError::input(field, "empty matrix"));
    }
    if let Some((i, row)) = doc.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(CliError::input(
            format!("{field}[{i}]"),
            format!("row has {} entries, expected {n}", row.len()),
        ));
    }
    if doc.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::input(field, "non-finite entry"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        C64::new(doc[i][j][0], doc[i][j][1])
    }))
}

fn check_version(v: &str) -> Result<(), CliError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::input(
            "schema_version",
            format!("unsupported version {v:?}, expected {SCHEMA_VERSION:?}"),
        ))
    }
}

fn parse_cone(s: &str, field: &str) -> Result<ConeTag, CliError> {
    ConeTag::from_short_name(s).ok_or_else(|| {
        CliError::input(
            field,
            format!("unknown cone {s:?}, expected sa, pos or eff"),
        )
    })
}

fn profile_from(dims: &[usize], field: &str) -> Result<BlockProfile, CliError> {
    BlockProfile::new(dims.to_vec()).map_err(|e| CliError::input(field, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, Vec<u8>), CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let doc = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: malformed JSON: {e}", path.display())))?;
    Ok((doc, bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDocument {
    pub schema_version: String,
    pub profile: Vec<usize>,
    pub blocks: Vec<MatrixDoc>,
    pub cone: String,
}

impl ElementDocument {
    pub fn from_element(x: &DirectSumElement, cone: ConeTag) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            profile: x.profile().dims().to_vec(),
            blocks: x
                .blocks()
                .iter()
                .map(|b| matrix_to_doc(b.matrix()))
                .collect(),
            cone: cone.short_name().into(),
        }
    }

    pub fn to_element(
        &self,
        tol: &ToleranceConfig,
    ) -> Result<(DirectSumElement, ConeTag), CliError> {
        check_version(&self.schema_version)?;
        let cone = parse_cone(&self.cone, "cone")?;
        let profile = profile_from(&self.profile, "profile")?;
        if self.blocks.len() != profile.len() {
            return Err(CliError::input(
                "blocks",
                format!(
                    "{} blocks for a profile of {}",
                    self.blocks.len(),
                    profile.len()
                ),
            ));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (j, (doc, &m)) in self.blocks.iter().zip(profile.dims()).enumerate() {
            let field = format!("blocks[{j}]");
            let a = matrix_from_doc(doc, &field)?;
            if a.nrows() != m {
                return Err(CliError::input(
                    field,
                    format!("{0}x{0} matrix where the profile says {m}", a.nrows()),
                ));
            }
            let h = HermitianMatrix::new(a, tol).map_err(|e| CliError::input(&field, e))?;
            cone.check(&h, tol)
                .map_err(|e| CliError::input(&field, e))?;
            blocks.push(h);
        }
        let x = DirectSumElement::new(profile, blocks).map_err(|e| CliError::input("blocks", e))?;
        Ok((x, cone))
    }
}

pub fn parse_element(
    path: &Path,
    tol: &ToleranceConfig,
) -> Result<(DirectSumElement, ConeTag, Vec<u8>), CliError> {
    let (doc, bytes): (ElementDocument, _) = read_json(path)?;
    let (x, cone) = doc.to_element(tol).map_err(|e| e.in_file(path))?;
    Ok((x, cone, bytes))
}

pub fn emit_element(x: &DirectSumElement, cone: ConeTag, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&ElementDocument::from_element(x, cone))
        .expect("documents serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data")]
pub enum MonotoneDoc {
    #[serde(rename = "pl")]
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64> },
    #[serde(rename = "power")]
    Power { exponent: f64, scale: f64 },
}

impl MonotoneDoc {
    pub fn from_map(f: &MonotoneBijection) -> Self {
        match f {
            MonotoneBijection::PiecewiseLinear { xs, ys } => Self::PiecewiseLinear {
                xs: xs.clone(),
                ys: ys.clone(),
            },
            MonotoneBijection::Power { exponent, scale } => Self::Power {
                exponent: *exponent,
                scale: *scale,
            },
        }
    }

    pub fn to_map(&self, field: &str) -> Result<MonotoneBijection, CliError> {
        match self {
            Self::PiecewiseLinear { xs, ys } => {
                MonotoneBijection::piecewise_linear(xs.clone(), ys.clone())
            }
            Self::Power { exponent, scale } => MonotoneBijection::power(*exponent, *scale),
        }
        .map_err(|e| CliError::input(field, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauDoc {
    #[serde(rename = "T")]
    pub t: MatrixDoc,
    pub antilinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JordanDoc {
    pub u: MatrixDoc,
    pub transpose: bool,
}

/// Either `{f, tau}` or `{jordan, f}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub f: MonotoneDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan: Option<JordanDoc>,
}

impl BlockDoc {
    pub fn from_map(b: &BlockMap) -> Self {
        match b {
            BlockMap::Canonical(c) => Self {
                f: MonotoneDoc::from_map(&c.f),
                tau: Some(TauDoc {
                    t: matrix_to_doc(c.tau.matrix()),
                    antilinear: c.tau.is_antilinear(),
                }),
                jordan: None,
            },
            BlockMap::Jordan { jordan, f } => Self {
                f: MonotoneDoc::from_map(f),
                tau: None,
                jordan: Some(JordanDoc {
                    u: matrix_to_doc(jordan.unitary()),
                    transpose: jordan.is_transpose(),
                }),
            },
        }
    }

    fn to_map(&self, field: &str, tol: &ToleranceConfig) -> Result<BlockMap, CliError> {
        let f = self.f.to_map(&format!("{field}.f"))?;
        match (&self.tau, &self.jordan) {
            (Some(tau), None) => {
                let field = format!("{field}.tau.T");
                let t = matrix_from_doc(&tau.t, &field)?;
                let tau = ProjectionIsomorphism::new(t, tau.antilinear, tol)
                    .map_err(|e| CliError::input(&field, e))?;
                Ok(BlockMap::Canonical(FactorCanonicalIso { f, tau }))
            }
            (None, Some(j)) => {
                let field = format!("{field}.jordan.u");
                let u = matrix_from_doc(&j.u, &field)?;
                let jordan =
                    JordanIso::new(u, j.transpose, tol).map_err(|e| CliError::input(&field, e))?;
                Ok(BlockMap::Jordan { jordan, f })
            }
            _ => Err(CliError::input(
                field,
                "exactly one of \"tau\" and \"jordan\" must be given",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoDocument {
    pub schema_version: String,
    /// Defaults to `"sa"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<String>,
    pub domain_profile: Vec<usize>,
    pub codomain_profile: Vec<usize>,
    /// 1-based: entry `k` is the domain block feeding codomain block `k`.
    pub pi: Vec<usize>,
    /// Indexed by domain block.
    pub blocks: Vec<BlockDoc>,
    /// Central shift per codomain block, self-adjoint cone only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
}

impl IsoDocument {
    pub fn from_iso(iso: &DirectSumIso) -> Self {
        let shift = iso.shift();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            cone: Some(iso.cone().short_name().into()),
            domain_profile: iso.domain().dims().to_vec(),
            codomain_profile: iso.codomain().dims().to_vec(),
            pi: iso.pi().iter().map(|&j| j + 1).collect(),
            blocks: iso.blocks().iter().map(BlockDoc::from_map).collect(),
            shift: shift.iter().any(|&c| c != 0.0).then(|| shift.to_vec()),
        }
    }

    pub fn to_iso(&self, tol: &ToleranceConfig) -> Result<DirectSumIso, CliError> {
        check_version(&self.schema_version)?;
        let cone = match &self.cone {
            Some(s) => parse_cone(s, "cone")?,
            None => ConeTag::SelfAdjoint,
        };
        let domain = profile_from(&self.domain_profile, "domain_profile")?;
        let codomain = profile_from(&self.codomain_profile, "codomain_profile")?;
        if self.pi.iter().any(|&k| k == 0) {
            return Err(CliError::input("pi", "entries are 1-based"));
        }
        let pi = self.pi.iter().map(|&k| k - 1).collect();
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.to_map(&format!("blocks[{j}]"), tol))
            .collect::<Result<Vec<_>, _>>()?;
        DirectSumIso::new(domain, codomain, cone, pi, blocks, self.shift.clone())
            .map_err(|e| CliError::input("iso", e))
    }
}

pub fn parse_iso(path: &Path, tol: &ToleranceConfig) -> Result<(DirectSumIso, Vec<u8>), CliError> {
    let (doc, bytes): (IsoDocument, _) = read_json(path)?;
    let iso = doc.to_iso(tol).map_err(|e| e.in_file(path))?;
    Ok((iso, bytes))
}

pub fn emit_iso(iso: &DirectSumIso, path: &Path) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(&IsoDocument::from_iso(iso)).expect("documents serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
