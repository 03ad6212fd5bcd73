//! Systematic encoding and erasure decoding against a code's `H`.
//!
//! Each wide column keeps its last position for the local parity; the `h`
//! highest-indexed remaining positions hold heavy parities and everything
//! else is data. Parity positions therefore form an SD-type pattern (same
//! position in every group) plus `h` extra columns, which is full rank on any
//! instance that passed SD verification.

use thiserror::Error;

use crate::constructions::CodeInstance;
use crate::galois::{FieldElement, FieldSpec, GaloisError};
use crate::matrix::{FMatrix, MatrixError};
use crate::verifier::columns_independent;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("parity positions of H are linearly dependent; encoding unavailable")]
    SingularParity,
    #[error("expected {expected} data symbols, got {got}")]
    WrongDataLength { expected: usize, got: usize },
    #[error("expected a stripe of {expected} symbols, got {got}")]
    WrongStripeLength { expected: usize, got: usize },
    #[error("erasure pattern {0:?} is not correctable")]
    Uncorrectable(Vec<usize>),
    #[error("surviving symbols are not consistent with any codeword")]
    Inconsistent,
    #[error("symbol at position {0} belongs to another field")]
    FieldMismatch(usize),
    #[error("bad stripe file: {0}")]
    BadHeader(String),
    #[error("stripe was produced for a different artifact")]
    HashMismatch,
    #[error("symbol bytes {0:?} do not encode an element of the field")]
    BadSymbol(Vec<u8>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] GaloisError),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// Zero-based positions of data, heavy-parity and local-parity symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolLayout {
    pub data: Vec<usize>,
    pub heavy: Vec<usize>,
    pub local: Vec<usize>,
}

impl SymbolLayout {
    /// Heavy then local positions, sorted.
    pub fn parity(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.heavy.iter().chain(&self.local).copied().collect();
        p.sort_unstable();
        p
    }
}

/// Placement rule only; does not check invertibility (see [`Codec::new`]).
pub fn symbol_layout(instance: &CodeInstance) -> SymbolLayout {
    let p = instance.params();
    let local: Vec<usize> = (0..p.g).map(|i| p.column(i, p.r)).collect();
    let rest: Vec<usize> = (0..p.n).filter(|c| !local.contains(c)).collect();
    let split = rest.len() - p.h;
    SymbolLayout {
        data: rest[..split].to_vec(),
        heavy: rest[split..].to_vec(),
        local,
    }
}

/// Layout together with the invertibility check on the parity columns.
pub fn derive_layout(instance: &CodeInstance) -> Result<SymbolLayout> {
    let layout = symbol_layout(instance);
    if !columns_independent(instance, &layout.parity()) {
        return Err(CodecError::SingularParity);
    }
    Ok(layout)
}

/// A codeword (or a codeword with erasures). Erased positions hold zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripe {
    symbols: Vec<FieldElement>,
    erased: Vec<bool>,
}

impl Stripe {
    pub fn new(symbols: Vec<FieldElement>) -> Self {
        let erased = vec![false; symbols.len()];
        Stripe { symbols, erased }
    }

    pub fn with_erasures(symbols: Vec<FieldElement>, erased: Vec<bool>) -> Result<Self> {
        if erased.len() != symbols.len() {
            return Err(CodecError::WrongStripeLength {
                expected: symbols.len(),
                got: erased.len(),
            });
        }
        let mut stripe = Stripe { symbols, erased };
        for i in 0..stripe.len() {
            if stripe.erased[i] {
                stripe.symbols[i] = stripe.symbols[i].field().zero();
            }
        }
        Ok(stripe)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[FieldElement] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> Option<&FieldElement> {
        (!self.erased[i]).then(|| &self.symbols[i])
    }

    pub fn is_erased(&self, i: usize) -> bool {
        self.erased[i]
    }

    pub fn erasure_mask(&self) -> &[bool] {
        &self.erased
    }

    pub fn erasures(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.erased[i]).collect()
    }

    /// Marks positions as erased and zeroes them.
    pub fn erase(&mut self, positions: &[usize]) {
        for &i in positions {
            self.erased[i] = true;
            self.symbols[i] = self.symbols[i].field().zero();
        }
    }

    pub fn erased_copy(&self, positions: &[usize]) -> Stripe {
        let mut s = self.clone();
        s.erase(positions);
        s
    }

    pub fn scaled(&self, factor: &FieldElement) -> Stripe {
        Stripe {
            symbols: self.symbols.iter().map(|s| s * factor).collect(),
            erased: self.erased.clone(),
        }
    }
}

/// Encoder/decoder bound to one instance.
#[derive(Debug, Clone)]
pub struct Codec<'a> {
    instance: &'a CodeInstance,
    layout: SymbolLayout,
    /// `parity = generator * data`, rows in `layout.parity()` order.
    generator: FMatrix,
}

impl<'a> Codec<'a> {
    pub fn new(instance: &'a CodeInstance) -> Result<Self> {
        let layout = derive_layout(instance)?;
        let h = instance.parity_check();
        let parity_inv = h
            .select_columns(&layout.parity())?
            .inverse()
            .map_err(|_| CodecError::SingularParity)?;
        // H_P c_P + H_D c_D = 0  =>  c_P = -(H_P^-1 H_D) c_D
        let mut generator = parity_inv.mul(&h.select_columns(&layout.data)?)?;
        for r in 0..generator.rows() {
            for c in 0..generator.cols() {
                let v = -generator.get(r, c);
                generator.set(r, c, v)?;
            }
        }
        Ok(Codec {
            instance,
            layout,
            generator,
        })
    }

    pub fn instance(&self) -> &CodeInstance {
        self.instance
    }

    pub fn layout(&self) -> &SymbolLayout {
        &self.layout
    }

    /// Number of zero coefficients each heavy parity has on the data
    /// symbols, in `layout.heavy` order.
    pub fn heavy_zero_coefficients(&self) -> Vec<usize> {
        let parity = self.layout.parity();
        self.layout
            .heavy
            .iter()
            .map(|pos| {
                let row = parity
                    .iter()
                    .position(|p| p == pos)
                    .expect("heavy is parity");
                self.generator
                    .row(row)
                    .iter()
                    .filter(|e| e.is_zero())
                    .count()
            })
            .collect()
    }

    pub fn encode(&self, data: &[FieldElement]) -> Result<Stripe> {
        let p = self.instance.params();
        if data.len() != p.k {
            return Err(CodecError::WrongDataLength {
                expected: p.k,
                got: data.len(),
            });
        }
        let field = self.instance.field();
        if let Some(i) = data.iter().position(|d| d.field() != field) {
            return Err(CodecError::FieldMismatch(i));
        }
        let parity = self.generator.mul_vec(data)?;
        let mut symbols = vec![field.zero(); p.n];
        for (&pos, v) in self.layout.data.iter().zip(data) {
            symbols[pos] = v.clone();
        }
        for (pos, v) in self.layout.parity().into_iter().zip(parity) {
            symbols[pos] = v;
        }
        Ok(Stripe::new(symbols))
    }

    pub fn decode(&self, stripe: &Stripe) -> Result<Stripe> {
        decode(self.instance, stripe)
    }

    pub fn extract_data(&self, stripe: &Stripe) -> Vec<FieldElement> {
        self.layout
            .data
            .iter()
            .map(|&i| stripe.symbols[i].clone())
            .collect()
    }
}

pub fn encode(instance: &CodeInstance, data: &[FieldElement]) -> Result<Stripe> {
    Codec::new(instance)?.encode(data)
}

/// Whether the columns of `H` at `erasures` are independent.
pub fn correctable(instance: &CodeInstance, erasures: &[usize]) -> bool {
    let p = instance.params();
    if erasures.len() > p.g + p.h || erasures.iter().any(|&e| e >= p.n) {
        return false;
    }
    columns_independent(instance, erasures)
}

/// Fills erased positions with the unique values giving zero syndrome.
pub fn decode(instance: &CodeInstance, stripe: &Stripe) -> Result<Stripe> {
    let p = instance.params();
    if stripe.len() != p.n {
        return Err(CodecError::WrongStripeLength {
            expected: p.n,
            got: stripe.len(),
        });
    }
    let field = instance.field();
    if let Some(i) = stripe.symbols.iter().position(|s| s.field() != field) {
        return Err(CodecError::FieldMismatch(i));
    }
    let erased = stripe.erasures();
    if erased.is_empty() {
        return Ok(stripe.clone());
    }
    if !correctable(instance, &erased) {
        return Err(CodecError::Uncorrectable(erased));
    }
    let h = instance.parity_check();
    // Known part of the syndrome (erased symbols are zero).
    let known = h.mul_vec(&stripe.symbols)?;
    let rhs: Vec<FieldElement> = known.iter().map(|v| -v).collect();
    let solution = match h.select_columns(&erased)?.solve(&rhs) {
        Ok(s) => s,
        Err(MatrixError::NoSolution) => return Err(CodecError::Inconsistent),
        Err(e) => return Err(e.into()),
    };
    debug_assert!(solution.is_unique());
    let mut out = stripe.clone();
    for (&pos, v) in erased.iter().zip(solution.x) {
        out.symbols[pos] = v;
        out.erased[pos] = false;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Byte encoding
// ---------------------------------------------------------------------------

/// Bytes per symbol: bit-packed for p = 2, one byte per coefficient otherwise.
pub fn symbol_width(field: &FieldSpec) -> usize {
    if field.characteristic() == 2 {
        (field.degree() as usize).div_ceil(8)
    } else {
        field.degree() as usize
    }
}

pub fn pack_symbol(e: &FieldElement, out: &mut Vec<u8>) {
    let field = e.field();
    if field.characteristic() == 2 {
        out.extend_from_slice(&e.bits().to_le_bytes()[..symbol_width(field)]);
    } else {
        out.extend(e.coeffs().into_iter().map(|c| c as u8));
    }
}

pub fn unpack_symbol(field: &FieldSpec, bytes: &[u8]) -> Result<FieldElement> {
    if bytes.len() != symbol_width(field) {
        return Err(CodecError::BadSymbol(bytes.to_vec()));
    }
    if field.characteristic() == 2 {
        let mut word = [0u8; 8];
        word[..bytes.len()].copy_from_slice(bytes);
        let value = u64::from_le_bytes(word);
        field
            .from_index(value)
            .map_err(|_| CodecError::BadSymbol(bytes.to_vec()))
    } else {
        field
            .element(bytes.iter().map(|&b| b as u32).collect())
            .map_err(|_| CodecError::BadSymbol(bytes.to_vec()))
    }
}

pub fn pack_symbols(symbols: &[FieldElement]) -> Vec<u8> {
    let mut out = Vec::new();
    for s in symbols {
        pack_symbol(s, &mut out);
    }
    out
}

pub fn unpack_symbols(field: &FieldSpec, bytes: &[u8]) -> Result<Vec<FieldElement>> {
    let w = symbol_width(field);
    if !bytes.len().is_multiple_of(w) {
        return Err(CodecError::BadHeader(format!(
            "{} bytes is not a multiple of the symbol width {w}",
            bytes.len()
        )));
    }
    bytes.chunks(w).map(|c| unpack_symbol(field, c)).collect()
}

pub const STRIPE_MAGIC: &[u8; 4] = b"MRLS";
pub const STRIPE_VERSION: u8 = 1;

/// Stripe file layout (all integers little-endian):
///
/// ```text
/// magic "MRLS" | version u8 | artifact hash [u8; 32] | n u32 | width u16
/// | erasure bitmap ceil(n/8) bytes (bit i%8 of byte i/8) | n * width symbol bytes
/// ```
pub fn write_stripe(stripe: &Stripe, artifact_hash: &[u8; 32]) -> Vec<u8> {
    let field = stripe.symbols[0].field();
    let n = stripe.len();
    let mut out = Vec::new();
    out.extend_from_slice(STRIPE_MAGIC);
    out.push(STRIPE_VERSION);
    out.extend_from_slice(artifact_hash);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(symbol_width(field) as u16).to_le_bytes());
    let mut mask = vec![0u8; n.div_ceil(8)];
    for i in stripe.erasures() {
        mask[i / 8] |= 1 << (i % 8);
    }
    out.extend_from_slice(&mask);
    out.extend(pack_symbols(&stripe.symbols));
    out
}

pub fn read_stripe(bytes: &[u8], field: &FieldSpec, artifact_hash: &[u8; 32]) -> Result<Stripe> {
    let bad = |msg: &str| CodecError::BadHeader(msg.to_string());
    let header = 4 + 1 + 32 + 4 + 2;
    if bytes.len() < header {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != STRIPE_MAGIC {
        return Err(bad("wrong magic"));
    }
    if bytes[4] != STRIPE_VERSION {
        return Err(bad("unsupported version"));
    }
    if &bytes[5..37] != artifact_hash {
        return Err(CodecError::HashMismatch);
    }
    let n = u32::from_le_bytes(bytes[37..41].try_into().unwrap()) as usize;
    let width = u16::from_le_bytes(bytes[41..43].try_into().unwrap()) as usize;
    if width != symbol_width(field) {
        return Err(bad("symbol width does not match the field"));
    }
    let mask_len = n.div_ceil(8);
    if bytes.len() != header + mask_len + n * width {
        return Err(bad("length does not match header"));
    }
    let mask = &bytes[header..header + mask_len];
    let erased: Vec<bool> = (0..n).map(|i| mask[i / 8] >> (i % 8) & 1 == 1).collect();
    let symbols = unpack_symbols(field, &bytes[header + mask_len..])?;
    Stripe::with_erasures(symbols, erased)
}
