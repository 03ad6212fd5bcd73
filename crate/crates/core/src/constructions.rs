//! Parity-check matrices of (k, r, h)-local codes.
//!
//! Every code here has the same shape: `g` indicator rows (one per local
//! group, with ones on the `r + 1` columns of that group's wide column)
//! followed by `h` heavy rows whose entries `v(i, j, b)` depend on the
//! construction. Columns are ordered group-major.
//!
//! Three constructions are provided:
//!
//! * [`build_linearized`]: `v(i, j, b) = x^(2^b)` with BCH-shaped points, MR.
//! * [`build_sd_h3`]: three heavy rows `x, x^2, x^4` with points
//!   `s_j ∘ a_i f_j`, SD.
//! * [`build_vandermonde`]: consecutive powers `x^1 .. x^(t-1)` followed by
//!   kernel combinations of `x^t .. x^(h+g-1)`, MR.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::galois::{
    bch_set, concat_elements, mult_coset_reps, subfield_elements, Embedding, FieldElement,
    FieldSpec, GaloisError,
};
use crate::matrix::{FMatrix, MatrixError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Field(#[from] GaloisError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

fn invalid(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::InvalidParams(msg.into())
}

fn precondition(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::Precondition(msg.into())
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// `(k, r, h)` together with the derived group count `g = (k + h) / r` and
/// length `n = k + h + g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct LocalCodeParams {
    pub k: usize,
    pub r: usize,
    pub h: usize,
    pub g: usize,
    pub n: usize,
}

impl LocalCodeParams {
    pub fn new(k: usize, r: usize, h: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k >= 1"));
        }
        if h == 0 {
            return Err(invalid("h >= 1"));
        }
        if r < 2 {
            return Err(invalid("r >= 2"));
        }
        if !(k + h).is_multiple_of(r) {
            return Err(invalid(format!(
                "r | (k + h): {r} does not divide {}",
                k + h
            )));
        }
        let g = (k + h) / r;
        if g < 2 {
            return Err(invalid("g >= 2"));
        }
        Ok(LocalCodeParams {
            k,
            r,
            h,
            g,
            n: k + h + g,
        })
    }

    /// Parameters for `g` groups of `r + 1` symbols and `h` heavy parities.
    pub fn from_groups(g: usize, r: usize, h: usize) -> Result<Self> {
        if g * r <= h {
            return Err(invalid(format!(
                "k = g*r - h must be positive (g={g}, r={r}, h={h})"
            )));
        }
        Self::new(g * r - h, r, h)
    }

    pub fn group_size(&self) -> usize {
        self.r + 1
    }

    /// Column index of position `j` of group `i` (both zero-based).
    pub fn column(&self, group: usize, position: usize) -> usize {
        group * (self.r + 1) + position
    }

    /// Inverse of [`Self::column`].
    pub fn group_of(&self, column: usize) -> (usize, usize) {
        (column / (self.r + 1), column % (self.r + 1))
    }

    fn check(&self) -> Result<()> {
        let fresh = Self::new(self.k, self.r, self.h)?;
        if fresh != *self {
            return Err(invalid(format!(
                "derived values disagree: expected g={}, n={}",
                fresh.g, fresh.n
            )));
        }
        Ok(())
    }
}

impl fmt::Display for LocalCodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} r={} h={} g={} n={}",
            self.k, self.r, self.h, self.g, self.n
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `t = ceil(h/g) + 1`, any prime-power `n`.
    General,
    /// `t = ceil(h/g) + 2`, additive-coset partition.
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Linearized,
    SdH3,
    Vandermonde(Regime),
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Linearized => "linearized",
            Construction::SdH3 => "sd-h3",
            Construction::Vandermonde(Regime::General) => "vandermonde-general",
            Construction::Vandermonde(Regime::Improved) => "vandermonde-improved",
        }
    }

    pub fn guarantee(&self) -> Guarantee {
        match self {
            Construction::SdH3 => Guarantee::Sd,
            _ => Guarantee::Mr,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construction {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linearized" => Ok(Construction::Linearized),
            "sd-h3" => Ok(Construction::SdH3),
            "vandermonde-general" => Ok(Construction::Vandermonde(Regime::General)),
            "vandermonde-improved" => Ok(Construction::Vandermonde(Regime::Improved)),
            other => Err(invalid(format!("unknown construction {other:?}"))),
        }
    }
}

/// Which erasure-pattern family a construction is claimed to correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantee {
    Mr,
    Sd,
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guarantee::Mr => "mr",
            Guarantee::Sd => "sd",
        })
    }
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjustment {
    pub parameter: &'static str,
    pub from: usize,
    pub to: usize,
}

impl fmt::Display for Adjustment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.parameter, self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub params: LocalCodeParams,
    pub adjustments: Vec<Adjustment>,
}

impl Normalized {
    pub fn unchanged(&self) -> bool {
        self.adjustments.is_empty()
    }
}

/// `Some((p, e))` with `value = p^e`, `e >= 1`.
pub fn prime_power(value: usize) -> Option<(usize, u32)> {
    if value < 2 {
        return None;
    }
    let p = (2..=value).find(|d| value.is_multiple_of(*d))?;
    let mut rest = value;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn power_of(value: usize, p: usize) -> Option<u32> {
    match prime_power(value) {
        Some((q, e)) if q == p => Some(e),
        _ => None,
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Vandermonde `t` for a regime.
pub fn vandermonde_t(params: &LocalCodeParams, regime: Regime) -> usize {
    let base = ceil_div(params.h, params.g);
    match regime {
        Regime::General => base + 1,
        Regime::Improved => base + 2,
    }
}

/// Checks the preconditions of a construction on already-valid parameters.
pub fn check_preconditions(params: &LocalCodeParams, construction: Construction) -> Result<()> {
    params.check()?;
    match construction {
        Construction::Linearized => {
            if power_of(params.r + 1, 2).is_none() {
                return Err(precondition("r+1 must be a power of 2"));
            }
            if power_of(params.g, 2).is_none() {
                return Err(precondition("g must be a power of 2"));
            }
        }
        Construction::SdH3 => {
            if params.h != 3 {
                return Err(precondition("h = 3"));
            }
            let Some(a) = power_of(params.r + 1, 2) else {
                return Err(precondition("r+1 must be a power of 2"));
            };
            let Some(m) = power_of(params.n, 2) else {
                return Err(precondition("n must be a power of 2"));
            };
            if m % a != 0 {
                return Err(precondition("log2(r+1) must divide log2(n)"));
            }
        }
        Construction::Vandermonde(regime) => {
            let t = vandermonde_t(params, regime);
            match regime {
                Regime::General => {
                    if prime_power(params.n).is_none() {
                        return Err(precondition("n must be a prime power"));
                    }
                }
                Regime::Improved => {
                    let Some((p, _)) = prime_power(params.r + 1) else {
                        return Err(precondition("r+1 must be a power of a prime p"));
                    };
                    if power_of(params.g, p).is_none() {
                        return Err(precondition(format!("g must be a power of p = {p}")));
                    }
                    if params.h % params.g == 1 {
                        return Err(precondition("h ≢ 1 (mod g)"));
                    }
                    if ceil_div(params.h, params.g) % p == p - 1 {
                        return Err(precondition(format!(
                            "ceil(h/g) ≢ p-1 (mod p) with p = {p}"
                        )));
                    }
                }
            }
            if t > params.h {
                return Err(precondition(format!(
                    "t = {t} must not exceed h = {}",
                    params.h
                )));
            }
        }
    }
    Ok(())
}

fn next_pow2(x: usize) -> usize {
    x.next_power_of_two()
}

/// Smallest `r' >= r` with `r' + 1` a prime power.
fn next_prime_power_group(r: usize) -> usize {
    (r + 1..).find(|&s| prime_power(s).is_some()).unwrap() - 1
}

/// Smallest power of `p` (exponent >= 1) that is at least `min`.
fn next_power_of(p: usize, min: usize) -> usize {
    let mut v = p;
    while v < min {
        v *= p;
    }
    v
}

/// Smallest parameters at least as large as the request that satisfy the
/// construction's preconditions. Valid inputs come back unchanged.
pub fn normalize_params(
    k: usize,
    r: usize,
    h: usize,
    construction: Construction,
) -> Result<Normalized> {
    if k == 0 || r == 0 || h == 0 {
        return Err(invalid("k, r, h must be positive"));
    }
    if r < 2 {
        return Err(invalid("r >= 2"));
    }
    let (r2, g, h2) = match construction {
        Construction::Linearized => {
            let r2 = next_pow2(r + 1) - 1;
            let mut g = next_pow2(ceil_div(k + h, r2).max(2));
            while r2 * g <= h {
                g *= 2;
            }
            (r2, g, h)
        }
        Construction::SdH3 => {
            if h > 3 {
                return Err(precondition("h = 3"));
            }
            let r2 = next_pow2(r + 1) - 1;
            let g = next_power_of(r2 + 1, ceil_div(k + 3, r2).max(2));
            (r2, g, 3)
        }
        Construction::Vandermonde(_) => {
            let r2 = next_prime_power_group(r);
            let (p, _) = prime_power(r2 + 1).expect("prime power by construction");
            let g = next_power_of(p, ceil_div(k + h, r2).max(2));
            (r2, g, h)
        }
    };
    let params = LocalCodeParams::from_groups(g, r2, h2)?;
    check_preconditions(&params, construction)?;
    let mut adjustments = Vec::new();
    for (parameter, from, to) in [("k", k, params.k), ("r", r, params.r), ("h", h, params.h)] {
        if from != to {
            adjustments.push(Adjustment {
                parameter,
                from,
                to,
            });
        }
    }
    Ok(Normalized {
        params,
        adjustments,
    })
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

/// `x[i][j]` for group `i` and position `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointAssignment {
    points: Vec<Vec<FieldElement>>,
}

impl PointAssignment {
    pub fn new(points: Vec<Vec<FieldElement>>) -> Result<Self> {
        for (i, group) in points.iter().enumerate() {
            for a in 0..group.len() {
                for b in a + 1..group.len() {
                    if group[a] == group[b] {
                        return Err(ConstructionError::Inconsistent(format!(
                            "points {a} and {b} of group {i} coincide"
                        )));
                    }
                }
            }
        }
        Ok(PointAssignment { points })
    }

    pub fn get(&self, group: usize, position: usize) -> &FieldElement {
        &self.points[group][position]
    }

    pub fn groups(&self) -> &[Vec<FieldElement>] {
        &self.points
    }

    /// All points in column order.
    pub fn flattened(&self) -> Vec<FieldElement> {
        self.points.iter().flatten().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedLayout {
    /// GF(n), the field the BCH strings range over.
    pub base_field: FieldSpec,
    pub exponents: Vec<u64>,
    pub leading_one: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdH3Layout {
    /// GF(2 (r+1)^2), home of the prefixes `s_j`.
    pub prefix_field: FieldSpec,
    /// GF(n), home of the suffixes `a_i f_j`.
    pub suffix_field: FieldSpec,
    /// GF(2^t).
    pub combined_field: FieldSpec,
    pub t: u32,
    pub prefixes: Vec<FieldElement>,
    /// GF(r+1) inside GF(n), index order.
    pub subfield: Vec<FieldElement>,
    pub coset_reps: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VandermondeLayout {
    pub regime: Regime,
    pub t: usize,
    /// GF(n).
    pub base_field: FieldSpec,
    /// GF(q), q = n^(h+g-t).
    pub extension_field: FieldSpec,
    /// Image of the generator of GF(n) inside GF(q).
    pub embedding_root: FieldElement,
    pub alpha: FieldElement,
    /// `(g-1) x (h+g-t)`, `A[i][j] = alpha^(j n^i)`.
    pub a_matrix: FMatrix,
    /// Kernel basis of `A`, `h - t + 1` vectors.
    pub null_vectors: Vec<Vec<FieldElement>>,
    /// Additive subgroup `S` and shifts `delta_i` (improved regime only).
    pub subgroup: Option<Vec<FieldElement>>,
    pub shifts: Option<Vec<FieldElement>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    Linearized(LinearizedLayout),
    SdH3(SdH3Layout),
    Vandermonde(VandermondeLayout),
}

/// A constructed code: parameters, the field of `H`, `H` itself, the point
/// assignment and construction-specific metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeInstance {
    params: LocalCodeParams,
    construction: Construction,
    field: FieldSpec,
    parity_check: FMatrix,
    points: PointAssignment,
    layout: Layout,
    guarantee: Guarantee,
}

impl CodeInstance {
    pub fn from_parts(
        params: LocalCodeParams,
        construction: Construction,
        parity_check: FMatrix,
        points: PointAssignment,
        layout: Layout,
        guarantee: Guarantee,
    ) -> Result<Self> {
        params.check()?;
        if parity_check.rows() != params.g + params.h || parity_check.cols() != params.n {
            return Err(ConstructionError::Inconsistent(format!(
                "H is {}x{}, expected {}x{}",
                parity_check.rows(),
                parity_check.cols(),
                params.g + params.h,
                params.n
            )));
        }
        if points.groups().len() != params.g
            || points.groups().iter().any(|g| g.len() != params.r + 1)
        {
            return Err(ConstructionError::Inconsistent(
                "point assignment does not match g x (r+1)".into(),
            ));
        }
        Ok(CodeInstance {
            params,
            construction,
            field: parity_check.field().clone(),
            parity_check,
            points,
            layout,
            guarantee,
        })
    }

    pub fn params(&self) -> &LocalCodeParams {
        &self.params
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn guarantee(&self) -> Guarantee {
        self.guarantee
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn parity_check(&self) -> &FMatrix {
        &self.parity_check
    }

    pub fn points(&self) -> &PointAssignment {
        &self.points
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn field_order(&self) -> u64 {
        self.field.order()
    }

    /// Same instance with `H` replaced (shape must match).
    pub fn with_parity_check(&self, parity_check: FMatrix) -> Result<Self> {
        Self::from_parts(
            self.params,
            self.construction,
            parity_check,
            self.points.clone(),
            self.layout.clone(),
            self.guarantee,
        )
    }

    /// Field size given by the closed-form expression for this
    /// construction, or `None` on overflow.
    pub fn predicted_field_order(&self) -> Option<u64> {
        predicted_field_order(&self.params, self.construction)
    }
}

/// Closed-form field size of each construction.
pub fn predicted_field_order(params: &LocalCodeParams, construction: Construction) -> Option<u64> {
    let n = params.n as u64;
    let (g, h) = (params.g, params.h);
    match construction {
        Construction::Linearized => {
            if (g + h) % 2 == 0 {
                n.checked_pow(((g + h) / 2) as u32)
            } else {
                n.checked_pow(((g + h - 1) / 2) as u32)?.checked_mul(2)
            }
        }
        Construction::SdH3 => {
            let s = params.r as u64 + 1;
            (2 * s * s).checked_mul(n)
        }
        Construction::Vandermonde(regime) => {
            // floor((1 - 1/g) h) + g - 1 (general) or - 2 (improved)
            let floor = h - ceil_div(h, g);
            let e = match regime {
                Regime::General => floor + g - 1,
                Regime::Improved => (floor + g).checked_sub(2)?,
            };
            n.checked_pow(e as u32)
        }
    }
}

/// Assembles `H`: `g` indicator rows then `h` rows of `v(i, j, b)` with
/// `b` zero-based (`b = 0` is the first heavy row).
pub fn assemble_h<F>(params: &LocalCodeParams, field: &FieldSpec, mut v: F) -> Result<FMatrix>
where
    F: FnMut(usize, usize, usize) -> Result<FieldElement>,
{
    let rows = params.g + params.h;
    let mut h = FMatrix::zeros(field, rows, params.n)?;
    for i in 0..params.g {
        for j in 0..=params.r {
            let col = params.column(i, j);
            h.set(i, col, field.one())?;
            for b in 0..params.h {
                h.set(params.g + b, col, v(i, j, b)?)?;
            }
        }
    }
    Ok(h)
}

fn log2_exact(v: usize) -> u32 {
    debug_assert!(v.is_power_of_two());
    v.trailing_zeros()
}

/// Linearized construction over GF(n^((g+h)/2)) or GF(2 n^((g+h-1)/2)).
pub fn build_linearized(params: &LocalCodeParams) -> Result<CodeInstance> {
    check_preconditions(params, Construction::Linearized)?;
    let m = log2_exact(params.n);
    let gh = params.g + params.h;
    let leading_one = gh % 2 == 1;
    let top = if leading_one { gh - 2 } else { gh - 1 };
    let exponents: Vec<u64> = (1..=top as u64).step_by(2).collect();
    let base = FieldSpec::binary(m)?;
    let degree = leading_one as u32 + m * exponents.len() as u32;
    let field = FieldSpec::binary(degree)?;
    let strings = bch_set(&base, &exponents, leading_one, &field)?;
    let s = params.group_size();
    let points = PointAssignment::new(strings.chunks(s).map(<[_]>::to_vec).collect())?;
    let h = assemble_h(params, &field, |i, j, b| {
        Ok(points.get(i, j).frobenius(b as u32))
    })?;
    CodeInstance::from_parts(
        *params,
        Construction::Linearized,
        h,
        points,
        Layout::Linearized(LinearizedLayout {
            base_field: base,
            exponents,
            leading_one,
        }),
        Guarantee::Mr,
    )
}

/// SD construction with three heavy parities over GF(2 (r+1)^2 n).
pub fn build_sd_h3(params: &LocalCodeParams) -> Result<CodeInstance> {
    check_preconditions(params, Construction::SdH3)?;
    let a = log2_exact(params.r + 1);
    let m = log2_exact(params.n);
    let t = 2 * a + 1 + m;

    let small = FieldSpec::binary(a)?;
    let prefix_field = FieldSpec::binary(2 * a + 1)?;
    let prefixes = bch_set(&small, &[1, 3], true, &prefix_field)?;

    let suffix_field = FieldSpec::binary(m)?;
    let subfield = subfield_elements(&suffix_field, a)?;
    let coset_reps = mult_coset_reps(&suffix_field, &subfield, params.g)?;

    let combined_field = FieldSpec::binary(t)?;
    let mut groups = Vec::with_capacity(params.g);
    for alpha in &coset_reps {
        let group = prefixes
            .iter()
            .zip(subfield.elements())
            .map(|(s, f)| concat_elements(&[s.clone(), alpha * f], &combined_field))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        groups.push(group);
    }
    let points = PointAssignment::new(groups)?;
    let h = assemble_h(params, &combined_field, |i, j, b| {
        Ok(points.get(i, j).frobenius(b as u32))
    })?;
    CodeInstance::from_parts(
        *params,
        Construction::SdH3,
        h,
        points,
        Layout::SdH3(SdH3Layout {
            prefix_field,
            suffix_field,
            combined_field,
            t,
            prefixes,
            subfield: subfield.elements().to_vec(),
            coset_reps,
        }),
        Guarantee::Sd,
    )
}

/// Vandermonde-type MR construction over GF(n^(h+g-t)).
pub fn build_vandermonde(params: &LocalCodeParams, regime: Regime) -> Result<CodeInstance> {
    let construction = Construction::Vandermonde(regime);
    check_preconditions(params, construction)?;
    let (p, m) = prime_power(params.n).expect("checked above");
    let t = vandermonde_t(params, regime);
    let dim = params.h + params.g - t;

    let base = FieldSpec::standard(p as u32, m)?;
    let ext = FieldSpec::standard(p as u32, m * dim as u32)?;
    let embedding = Embedding::new(&base, &ext)?;
    let alpha = ext.generator();

    // A[i][j] = alpha^(j * n^i): the i-fold n-power Frobenius of alpha^j.
    let mut a_data = Vec::with_capacity((params.g - 1) * dim);
    for i in 0..params.g - 1 {
        for j in 0..dim {
            a_data.push(alpha.pow(j as u64).frobenius(m * i as u32));
        }
    }
    let a_matrix = FMatrix::new(&ext, params.g - 1, dim, a_data)?;
    let null_vectors = a_matrix.null_space_basis();
    if null_vectors.len() != params.h - t + 1 {
        return Err(ConstructionError::Inconsistent(format!(
            "kernel of A has dimension {}, expected {}",
            null_vectors.len(),
            params.h - t + 1
        )));
    }

    let s = params.group_size();
    let elements: Vec<FieldElement> = base.elements().collect();
    let (groups, subgroup, shifts) = match regime {
        Regime::General => (
            elements.chunks(s).map(<[_]>::to_vec).collect::<Vec<_>>(),
            None,
            None,
        ),
        Regime::Improved => {
            // S = span of the first log_p(r+1) coordinates: indices below r+1.
            let subgroup: Vec<FieldElement> = elements[..s].to_vec();
            let shifts: Vec<FieldElement> =
                (0..params.g).map(|i| elements[i * s].clone()).collect();
            let groups = shifts
                .iter()
                .map(|d| subgroup.iter().map(|y| y + d).collect())
                .collect();
            (groups, Some(subgroup), Some(shifts))
        }
    };
    let points = PointAssignment::new(groups)?;

    let embedded: Vec<Vec<FieldElement>> = points
        .groups()
        .iter()
        .map(|g| g.iter().map(|x| embedding.apply(x)).collect())
        .collect::<std::result::Result<_, _>>()?;
    let h = assemble_h(params, &ext, |i, j, b| {
        let x = &embedded[i][j];
        let power = b + 1;
        if power < t {
            return Ok(x.pow(power as u64));
        }
        let u = &null_vectors[power - t];
        let mut acc = ext.zero();
        for (offset, coeff) in u.iter().enumerate() {
            acc = &acc + &(coeff * &x.pow((t + offset) as u64));
        }
        Ok(acc)
    })?;

    CodeInstance::from_parts(
        *params,
        construction,
        h,
        points,
        Layout::Vandermonde(VandermondeLayout {
            regime,
            t,
            base_field: base,
            extension_field: ext,
            embedding_root: embedding.root().clone(),
            alpha,
            a_matrix,
            null_vectors,
            subgroup,
            shifts,
        }),
        Guarantee::Mr,
    )
}

/// Dispatches to the builder for `construction`.
pub fn build(params: &LocalCodeParams, construction: Construction) -> Result<CodeInstance> {
    match construction {
        Construction::Linearized => build_linearized(params),
        Construction::SdH3 => build_sd_h3(params),
        Construction::Vandermonde(regime) => build_vandermonde(params, regime),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::is_w_independent;

    fn p(g: usize, r: usize, h: usize) -> LocalCodeParams {
        LocalCodeParams::from_groups(g, r, h).unwrap()
    }

    #[test]
    fn params_identities() {
        let params = LocalCodeParams::new(9, 3, 3).unwrap();
        assert_eq!((params.g, params.n), (4, 16));
        assert_eq!(params.n, params.g * (params.r + 1));
        assert_eq!(LocalCodeParams::new(1, 3, 2), Err(invalid("g >= 2")));
        assert!(LocalCodeParams::new(4, 3, 3).is_err());
        assert_eq!(LocalCodeParams::new(4, 1, 2), Err(invalid("r >= 2")));
    }

    #[test]
    fn normalize_examples() {
        let sd = normalize_params(9, 3, 3, Construction::SdH3).unwrap();
        assert!(sd.unchanged());
        assert_eq!((sd.params.g, sd.params.n), (4, 16));

        let lin = normalize_params(4, 3, 2, Construction::Linearized).unwrap();
        assert!(lin.unchanged());
        let again = normalize_params(
            lin.params.k,
            lin.params.r,
            lin.params.h,
            Construction::Linearized,
        )
        .unwrap();
        assert_eq!(again, lin);

        let bumped = normalize_params(5, 4, 3, Construction::SdH3).unwrap();
        assert_eq!(bumped.params.r, 7);
        assert!(check_preconditions(&bumped.params, Construction::SdH3).is_ok());
        assert!(!bumped.unchanged());

        let imp = normalize_params(2, 3, 4, Construction::Vandermonde(Regime::Improved)).unwrap();
        assert!(imp.unchanged());
        assert_eq!(vandermonde_t(&imp.params, Regime::Improved), 4);

        // h = 3 with g = 2 gives h ≡ 1 (mod g).
        let err =
            normalize_params(3, 3, 3, Construction::Vandermonde(Regime::Improved)).unwrap_err();
        assert_eq!(err, precondition("h ≢ 1 (mod g)"));
        // t = ceil(1/2)+1 = 2 > h = 1
        assert!(normalize_params(5, 3, 1, Construction::Vandermonde(Regime::General)).is_err());
        assert!(normalize_params(9, 3, 4, Construction::SdH3).is_err());
    }

    #[test]
    fn normalization_is_idempotent_across_requests() {
        let all = [
            Construction::Linearized,
            Construction::SdH3,
            Construction::Vandermonde(Regime::General),
            Construction::Vandermonde(Regime::Improved),
        ];
        for c in all {
            for k in 1..12 {
                for r in 2..8 {
                    for h in 1..6 {
                        if let Ok(n1) = normalize_params(k, r, h, c) {
                            assert!(n1.params.k >= k && n1.params.r >= r && n1.params.h >= h);
                            check_preconditions(&n1.params, c).unwrap();
                            let n2 =
                                normalize_params(n1.params.k, n1.params.r, n1.params.h, c).unwrap();
                            assert!(n2.unchanged(), "{c} {k} {r} {h}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn assemble_indicator_structure() {
        let params = p(2, 3, 3);
        let f = FieldSpec::binary(3).unwrap();
        let h = assemble_h(&params, &f, |_, _, _| Ok(f.generator())).unwrap();
        assert_eq!(h.cols(), params.g * (params.r + 1));
        for c in 0..h.cols() {
            let ones = (0..params.g).filter(|&r| h.get(r, c).is_one()).count();
            let nonzero = (0..params.g).filter(|&r| !h.get(r, c).is_zero()).count();
            assert_eq!((ones, nonzero), (1, 1));
        }
        for i in 0..params.g {
            let sum = h.row(i).iter().fold(f.zero(), |acc, e| &acc + e);
            assert_eq!(sum, f.from_int((params.r + 1) as u64));
        }
    }

    #[test]
    fn linearized_desk_instance() {
        let params = p(2, 3, 2);
        let code = build_linearized(&params).unwrap();
        assert_eq!(params.n, 8);
        assert_eq!(code.field_order(), 64);
        assert_eq!(code.predicted_field_order(), Some(64));
        let Layout::Linearized(layout) = code.layout() else {
            panic!()
        };
        assert_eq!(layout.exponents, vec![1, 3]);
        assert!(!layout.leading_one);
        for (beta, x) in layout.base_field.elements().zip(code.points().flattened()) {
            assert_eq!(&x.coeffs()[..3], beta.coeffs());
            assert_eq!(&x.coeffs()[3..], beta.pow(3).coeffs());
        }
        let h = code.parity_check();
        assert_eq!((h.rows(), h.cols()), (4, 8));
        for c in 0..8 {
            let x = h.get(2, c);
            assert_eq!(h.get(3, c), &(x * x));
        }
    }

    #[test]
    fn linearized_odd_shape() {
        let params = p(2, 3, 3);
        let code = build_linearized(&params).unwrap();
        assert_eq!(code.field_order(), 2 * 64);
        assert_eq!(code.predicted_field_order(), Some(128));
        let pts = code.points().flattened();
        assert!(is_w_independent(&pts, 5).unwrap().holds());
    }

    #[test]
    fn sd_h3_desk_instance() {
        let params = LocalCodeParams::new(9, 3, 3).unwrap();
        let code = build_sd_h3(&params).unwrap();
        assert_eq!(code.field_order(), 512);
        assert_eq!(code.predicted_field_order(), Some(2 * 16 * 16));
        let Layout::SdH3(layout) = code.layout() else {
            panic!()
        };
        assert_eq!(layout.t, 9);
        assert!(is_w_independent(&layout.prefixes, 4).unwrap().holds());
        assert_eq!(layout.subfield.len(), 4);
        for f in &layout.subfield {
            assert_eq!(f.frobenius(2), *f);
        }
        // Within a group, suffix differences are nonzero elements of a_i * GF(4).
        for (i, alpha) in layout.coset_reps.iter().enumerate() {
            let coset: Vec<_> = layout.subfield.iter().map(|f| alpha * f).collect();
            for j in 0..4 {
                for jj in j + 1..4 {
                    let d = &(alpha * &layout.subfield[j]) - &(alpha * &layout.subfield[jj]);
                    assert!(!d.is_zero(), "group {i}");
                    assert!(coset.contains(&d));
                }
            }
        }
        for i in 0..params.g {
            for j in 0..=params.r {
                let x = code.points().get(i, j);
                assert_eq!(&x.coeffs()[..5], layout.prefixes[j].coeffs());
            }
        }
    }

    #[test]
    fn vandermonde_general_kernel_and_entries() {
        let params = p(2, 3, 3);
        let code = build_vandermonde(&params, Regime::General).unwrap();
        assert_eq!(code.field_order(), 64);
        assert_eq!(code.predicted_field_order(), Some(64));
        let Layout::Vandermonde(layout) = code.layout() else {
            panic!()
        };
        assert_eq!(layout.t, 3);
        let alpha = &layout.alpha;
        let f = &layout.extension_field;
        assert_eq!(layout.a_matrix.row(0), &[f.one(), alpha.clone()]);
        // Kernel of (1, alpha) with second coordinate free: (alpha, 1) in char 2.
        assert_eq!(layout.null_vectors, vec![vec![alpha.clone(), f.one()]]);
        let emb = Embedding::new(&layout.base_field, f).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                let x = emb.apply(code.points().get(i, j)).unwrap();
                let col = params.column(i, j);
                let h = code.parity_check();
                assert_eq!(h.get(2, col), &x);
                assert_eq!(h.get(3, col), &x.pow(2));
                assert_eq!(h.get(4, col), &(&(alpha * &x.pow(3)) + &x.pow(4)));
            }
        }
    }

    #[test]
    fn vandermonde_improved_cosets() {
        let params = p(2, 3, 4);
        let code = build_vandermonde(&params, Regime::Improved).unwrap();
        assert_eq!(code.field_order(), 64);
        assert_eq!(code.predicted_field_order(), Some(8u64.pow(2)));
        let Layout::Vandermonde(layout) = code.layout() else {
            panic!()
        };
        let s = layout.subgroup.as_ref().unwrap();
        for a in s {
            for b in s {
                assert!(s.contains(&(a + b)));
            }
        }
        for (i, d) in layout.shifts.as_ref().unwrap().iter().enumerate() {
            for y in s {
                assert!(code.points().groups()[i].contains(&(y + d)));
            }
        }
        let mut all: Vec<u64> = code
            .points()
            .flattened()
            .iter()
            .map(|e| e.index())
            .collect();
        all.sort();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn vandermonde_odd_characteristic() {
        let params = p(3, 2, 3);
        let code = build_vandermonde(&params, Regime::Improved).unwrap();
        assert_eq!(code.field_order(), 729);
        assert_eq!(code.predicted_field_order(), Some(729));
    }

    #[test]
    fn precondition_errors_are_named() {
        assert_eq!(
            build_linearized(&p(3, 3, 2)).unwrap_err(),
            precondition("g must be a power of 2")
        );
        assert_eq!(build_sd_h3(&p(4, 3, 2)).unwrap_err(), precondition("h = 3"));
        assert_eq!(
            build_sd_h3(&p(2, 3, 3)).unwrap_err(),
            precondition("log2(r+1) must divide log2(n)")
        );
        assert_eq!(
            build_vandermonde(&p(2, 2, 3), Regime::General).unwrap_err(),
            precondition("n must be a prime power")
        );
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
