//! JSON code artifacts.
//!
//! Field elements are written as coefficient lists (constant term first)
//! together with the field they live in, so nothing depends on a choice of
//! generator or log table. The content hash is SHA-256 over the compact JSON
//! of every field except the hash itself.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constructions::{
    build, CodeInstance, Construction, ConstructionError, Guarantee, Layout, LinearizedLayout,
    LocalCodeParams, PointAssignment, Regime, SdH3Layout, VandermondeLayout,
};
use crate::galois::{FieldElement, FieldSpec, GaloisError};
use crate::matrix::{FMatrix, MatrixError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("artifact is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported artifact format version {0}")]
    UnsupportedVersion(u32),
    #[error("content hash mismatch: file says {stored}, contents hash to {computed}")]
    HashMismatch { stored: String, computed: String },
    #[error("invalid artifact: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] GaloisError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ArtifactError>;

type Coeffs = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub p: u32,
    pub m: u32,
    /// Monic modulus, constant term first.
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayoutDoc {
    Linearized {
        base_field: FieldDoc,
        exponents: Vec<u64>,
        leading_one: bool,
    },
    SdH3 {
        prefix_field: FieldDoc,
        suffix_field: FieldDoc,
        combined_field: FieldDoc,
        t: u32,
        prefixes: Vec<Coeffs>,
        subfield: Vec<Coeffs>,
        coset_reps: Vec<Coeffs>,
    },
    Vandermonde {
        t: usize,
        base_field: FieldDoc,
        extension_field: FieldDoc,
        embedding_root: Coeffs,
        alpha: Coeffs,
        a_matrix: Vec<Vec<Coeffs>>,
        null_vectors: Vec<Vec<Coeffs>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        subgroup: Option<Vec<Coeffs>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        shifts: Option<Vec<Coeffs>>,
    },
}

/// Everything covered by the content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactBody {
    pub format_version: u32,
    pub construction: String,
    pub guarantee: Guarantee,
    pub params: LocalCodeParams,
    /// Field of `H`.
    pub field: FieldDoc,
    pub layout: LayoutDoc,
    /// Evaluation points per group. Vandermonde points live in the layout's
    /// base field, all others in `field`.
    pub points: Vec<Vec<Coeffs>>,
    pub parity_check: Vec<Vec<Coeffs>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeArtifactFile {
    #[serde(flatten)]
    pub body: ArtifactBody,
    /// Lowercase hex SHA-256.
    pub content_hash: String,
}

fn field_doc(f: &FieldSpec) -> FieldDoc {
    FieldDoc {
        p: f.characteristic(),
        m: f.degree(),
        modulus: f.modulus().to_vec(),
    }
}

fn elems(v: &[FieldElement]) -> Vec<Coeffs> {
    v.iter().map(FieldElement::coeffs).collect()
}

fn matrix_doc(m: &FMatrix) -> Vec<Vec<Coeffs>> {
    (0..m.rows()).map(|r| elems(m.row(r))).collect()
}

impl FieldDoc {
    fn spec(&self) -> Result<FieldSpec> {
        Ok(FieldSpec::new(self.p, self.m, self.modulus.clone())?)
    }
}

fn parse_elems(field: &FieldSpec, v: &[Coeffs]) -> Result<Vec<FieldElement>> {
    v.iter()
        .map(|c| field.element(c.clone()).map_err(ArtifactError::from))
        .collect()
}

fn parse_matrix(field: &FieldSpec, rows: &[Vec<Coeffs>], cols: usize) -> Result<FMatrix> {
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ArtifactError::Invalid("ragged matrix".into()));
    }
    let data = rows
        .iter()
        .map(|r| parse_elems(field, r))
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(FMatrix::new(field, rows.len(), cols, data)?)
}

impl ArtifactBody {
    pub fn from_instance(instance: &CodeInstance) -> Self {
        let layout = match instance.layout() {
            Layout::Linearized(l) => LayoutDoc::Linearized {
                base_field: field_doc(&l.base_field),
                exponents: l.exponents.clone(),
                leading_one: l.leading_one,
            },
            Layout::SdH3(l) => LayoutDoc::SdH3 {
                prefix_field: field_doc(&l.prefix_field),
                suffix_field: field_doc(&l.suffix_field),
                combined_field: field_doc(&l.combined_field),
                t: l.t,
                prefixes: elems(&l.prefixes),
                subfield: elems(&l.subfield),
                coset_reps: elems(&l.coset_reps),
            },
            Layout::Vandermonde(l) => LayoutDoc::Vandermonde {
                t: l.t,
                base_field: field_doc(&l.base_field),
                extension_field: field_doc(&l.extension_field),
                embedding_root: l.embedding_root.coeffs(),
                alpha: l.alpha.coeffs(),
                a_matrix: matrix_doc(&l.a_matrix),
                null_vectors: l.null_vectors.iter().map(|u| elems(u)).collect(),
                subgroup: l.subgroup.as_deref().map(elems),
                shifts: l.shifts.as_deref().map(elems),
            },
        };
        ArtifactBody {
            format_version: FORMAT_VERSION,
            construction: instance.construction().as_str().to_string(),
            guarantee: instance.guarantee(),
            params: *instance.params(),
            field: field_doc(instance.field()),
            layout,
            points: instance
                .points()
                .groups()
                .iter()
                .map(|g| elems(g))
                .collect(),
            parity_check: matrix_doc(instance.parity_check()),
        }
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("body serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn to_instance(&self) -> Result<CodeInstance> {
        if self.format_version != FORMAT_VERSION {
            return Err(ArtifactError::UnsupportedVersion(self.format_version));
        }
        let construction: Construction = self.construction.parse().map_err(|_| {
            ArtifactError::Invalid(format!("unknown construction {:?}", self.construction))
        })?;
        if construction.guarantee() != self.guarantee {
            return Err(ArtifactError::Invalid(
                "claimed guarantee does not match the construction".into(),
            ));
        }
        let p = self.params;
        let params = LocalCodeParams::from_groups(p.g, p.r, p.h)?;
        if params != p {
            return Err(ArtifactError::Invalid("inconsistent k, r, h, g, n".into()));
        }
        let field = self.field.spec()?;
        let (layout, point_field) = match (&self.layout, construction) {
            (
                LayoutDoc::Linearized {
                    base_field,
                    exponents,
                    leading_one,
                },
                Construction::Linearized,
            ) => (
                Layout::Linearized(LinearizedLayout {
                    base_field: base_field.spec()?,
                    exponents: exponents.clone(),
                    leading_one: *leading_one,
                }),
                field.clone(),
            ),
            (
                LayoutDoc::SdH3 {
                    prefix_field,
                    suffix_field,
                    combined_field,
                    t,
                    prefixes,
                    subfield,
                    coset_reps,
                },
                Construction::SdH3,
            ) => {
                let prefix_field = prefix_field.spec()?;
                let suffix_field = suffix_field.spec()?;
                let layout = SdH3Layout {
                    prefixes: parse_elems(&prefix_field, prefixes)?,
                    subfield: parse_elems(&suffix_field, subfield)?,
                    coset_reps: parse_elems(&suffix_field, coset_reps)?,
                    prefix_field,
                    suffix_field,
                    combined_field: combined_field.spec()?,
                    t: *t,
                };
                (Layout::SdH3(layout), field.clone())
            }
            (
                LayoutDoc::Vandermonde {
                    t,
                    base_field,
                    extension_field,
                    embedding_root,
                    alpha,
                    a_matrix,
                    null_vectors,
                    subgroup,
                    shifts,
                },
                Construction::Vandermonde(regime),
            ) => {
                let base = base_field.spec()?;
                let ext = extension_field.spec()?;
                let dim = p.h + p.g - t;
                let layout = VandermondeLayout {
                    regime,
                    t: *t,
                    embedding_root: ext.element(embedding_root.clone())?,
                    alpha: ext.element(alpha.clone())?,
                    a_matrix: parse_matrix(&ext, a_matrix, dim)?,
                    null_vectors: null_vectors
                        .iter()
                        .map(|u| parse_elems(&ext, u))
                        .collect::<Result<_>>()?,
                    subgroup: subgroup
                        .as_deref()
                        .map(|s| parse_elems(&base, s))
                        .transpose()?,
                    shifts: shifts
                        .as_deref()
                        .map(|s| parse_elems(&base, s))
                        .transpose()?,
                    base_field: base.clone(),
                    extension_field: ext,
                };
                if (regime == Regime::Improved) != layout.subgroup.is_some() {
                    return Err(ArtifactError::Invalid(
                        "subgroup present iff improved regime".into(),
                    ));
                }
                (Layout::Vandermonde(layout), base)
            }
            _ => {
                return Err(ArtifactError::Invalid(
                    "layout kind does not match the construction".into(),
                ))
            }
        };
        let points = PointAssignment::new(
            self.points
                .iter()
                .map(|g| parse_elems(&point_field, g))
                .collect::<Result<_>>()?,
        )?;
        let h = parse_matrix(&field, &self.parity_check, p.n)?;
        Ok(CodeInstance::from_parts(
            params,
            construction,
            h,
            points,
            layout,
            self.guarantee,
        )?)
    }
}

impl CodeArtifactFile {
    pub fn from_instance(instance: &CodeInstance) -> Self {
        Self::seal(ArtifactBody::from_instance(instance))
    }

    /// Attaches a freshly computed hash.
    pub fn seal(body: ArtifactBody) -> Self {
        let content_hash = body.hash();
        CodeArtifactFile { body, content_hash }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    /// Parses and checks the hash; does not rebuild the instance.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodeArtifactFile = serde_json::from_str(text)?;
        let computed = file.body.hash();
        if computed != file.content_hash {
            return Err(ArtifactError::HashMismatch {
                stored: file.content_hash,
                computed,
            });
        }
        Ok(file)
    }

    pub fn hash_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        hex::decode_to_slice(&self.content_hash, &mut out).expect("hash checked on load");
        out
    }

    pub fn instance(&self) -> Result<CodeInstance> {
        self.body.to_instance()
    }
}

/// Recomputes the hash of an edited artifact text.
pub fn reseal(text: &str) -> Result<String> {
    let file: CodeArtifactFile = serde_json::from_str(text)?;
    Ok(CodeArtifactFile::seal(file.body).to_json())
}

pub fn save(instance: &CodeInstance, path: &Path) -> Result<CodeArtifactFile> {
    let file = CodeArtifactFile::from_instance(instance);
    std::fs::write(path, file.to_json()).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(file)
}

pub fn load(path: &Path) -> Result<(CodeArtifactFile, CodeInstance)> {
    let text = std::fs::read_to_string(path).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = CodeArtifactFile::from_json(&text)?;
    let instance = file.instance()?;
    Ok((file, instance))
}

/// Rebuilds the instance from its recorded construction and parameters.
pub fn rebuild(instance: &CodeInstance) -> Result<CodeInstance> {
    Ok(build(instance.params(), instance.construction())?)
}
