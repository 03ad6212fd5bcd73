//! Desk-scale acceptance checks, runnable from the binary.
//!
//! Every check is deterministic; rendered output carries no timings so two
//! runs print the same bytes. Budgets are still enforced and a check that
//! overruns is reported as failed.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::artifact::{rebuild, CodeArtifactFile};
use crate::codec::{Codec, CodecError};
use crate::constructions::{build, CodeInstance, Construction, Layout, LocalCodeParams, Regime};
use crate::galois::{bch_set, is_w_independent, FieldElement, FieldSpec, Independence};
use crate::matrix::FMatrix;
use crate::verifier::{
    binomial, check_pattern, check_pattern_pruned, unrank_combination, verify, Family,
    PatternSpace, VerifyOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canonical {
    pub label: &'static str,
    pub construction: Construction,
    pub g: usize,
    pub r: usize,
    pub h: usize,
}

impl Canonical {
    pub fn params(&self) -> LocalCodeParams {
        LocalCodeParams::from_groups(self.g, self.r, self.h).expect("canonical params")
    }

    pub fn build(&self) -> CodeInstance {
        build(&self.params(), self.construction).expect("canonical instance builds")
    }

    pub fn family(&self) -> Family {
        match self.construction {
            Construction::SdH3 => Family::Sd,
            _ => Family::Mr,
        }
    }
}

/// The four desk instances, in the order the acceptance criteria use them.
pub const SD_DESK: Canonical = Canonical {
    label: "sd-h3 g=4 r=3 h=3",
    construction: Construction::SdH3,
    g: 4,
    r: 3,
    h: 3,
};
pub const GENERAL_DESK: Canonical = Canonical {
    label: "vandermonde-general g=2 r=3 h=3",
    construction: Construction::Vandermonde(Regime::General),
    g: 2,
    r: 3,
    h: 3,
};
pub const IMPROVED_DESK: Canonical = Canonical {
    label: "vandermonde-improved g=2 r=3 h=4",
    construction: Construction::Vandermonde(Regime::Improved),
    g: 2,
    r: 3,
    h: 4,
};
pub const LINEARIZED_DESK: Canonical = Canonical {
    label: "linearized g=2 r=3 h=2",
    construction: Construction::Linearized,
    g: 2,
    r: 3,
    h: 2,
};

pub fn canonical_instances() -> [Canonical; 4] {
    [SD_DESK, GENERAL_DESK, IMPROVED_DESK, LINEARIZED_DESK]
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub budget: Duration,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_budget()
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}: {} ({})",
            self.id,
            if self.ok() { "PASS" } else { "FAIL" },
            self.title,
            self.detail
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget_ms: u64,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome {
        id,
        title,
        passed,
        detail,
        budget: Duration::from_millis(budget_ms),
        elapsed: start.elapsed(),
    }
}

pub fn criterion_1() -> Outcome {
    timed(1, "sd-h3 desk instance is SD", 5_000, || {
        let code = SD_DESK.build();
        let report = verify(&code, Family::Sd, &VerifyOptions::exhaustive());
        let q = code.field_order();
        let expected = 4 * binomial(12, 3) as u64;
        (
            report.passed && report.patterns_checked == expected && q == 512,
            format!("q = {q}, {report}"),
        )
    })
}

pub fn criterion_2() -> Outcome {
    timed(2, "vandermonde-general desk instance is MR", 2_000, || {
        let code = GENERAL_DESK.build();
        let report = verify(&code, Family::Mr, &VerifyOptions::exhaustive());
        let q = code.field_order();
        let t = vandermonde_t(&code);
        (
            report.passed
                && report.patterns_checked == 16 * binomial(6, 3) as u64
                && q == 64
                && t == 3,
            format!("q = {q}, t = {t}, {report}"),
        )
    })
}

pub fn criterion_3() -> Outcome {
    timed(
        3,
        "vandermonde-improved desk instance is MR at q = n^(h/2)",
        2_000,
        || {
            let code = IMPROVED_DESK.build();
            let report = verify(&code, Family::Mr, &VerifyOptions::exhaustive());
            let q = code.field_order();
            let n = code.params().n as u64;
            let formula = n.pow(code.params().h as u32 / 2);
            let predicted = code.predicted_field_order();
            (
                report.passed
                    && report.patterns_checked == 16 * binomial(6, 4) as u64
                    && q == formula
                    && predicted == Some(q)
                    && vandermonde_t(&code) == 4,
                format!("q = {q}, n^(h/2) = {formula}, {report}"),
            )
        },
    )
}

pub fn criterion_4() -> Outcome {
    timed(
        4,
        "linearized desk instance: 4-independent points and MR",
        2_000,
        || {
            let code = LINEARIZED_DESK.build();
            let q = code.field_order();
            let points = code.points().flattened();
            let independence = is_w_independent(&points, 4).expect("binary field");
            let report = verify(&code, Family::Mr, &VerifyOptions::exhaustive());
            let ind = match &independence {
                Independence::Independent => "points 4-independent".to_string(),
                Independence::Dependent { witness } => {
                    let elements: Vec<u64> = witness.iter().map(|&i| points[i].index()).collect();
                    let nonzero: Vec<FieldElement> =
                        points.iter().filter(|x| !x.is_zero()).cloned().collect();
                    let rest = is_w_independent(&nonzero, 4).expect("binary field").holds();
                    format!(
                    "points NOT 4-independent, witness positions {witness:?} (elements {elements:?}); \
                     nonzero points 4-independent: {rest}"
                )
                }
            };
            (
                independence.holds() && report.passed && report.patterns_checked == 240 && q == 64,
                format!("q = {q}, {ind}, {report}"),
            )
        },
    )
}

pub fn criterion_5() -> Outcome {
    timed(5, "BCH strings 1|b|b^3 are 5-independent", 5_000, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for a in [2u32, 3, 4] {
            let base = FieldSpec::binary(a).expect("small field");
            let target = FieldSpec::binary(2 * a + 1).expect("small field");
            let set = bch_set(&base, &[1, 3], true, &target).expect("bch set");
            let holds = is_w_independent(&set, 5).expect("binary").holds();
            ok &= holds && set.len() == 1 << a;
            parts.push(format!(
                "GF({}): {}",
                1 << a,
                if holds { "yes" } else { "no" }
            ));
        }
        (ok, parts.join(", "))
    })
}

/// Rank of bit vectors over GF(2).
pub fn gf2_rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

pub fn criterion_6() -> Outcome {
    timed(
        6,
        "Moore matrix over GF(32) nonsingular iff GF(2)-independent",
        10_000,
        || {
            let field = FieldSpec::binary(5).expect("GF(32)");
            let nonzero: Vec<FieldElement> = field.elements().skip(1).collect();
            let (mut triples, mut agree, mut singular) = (0u64, 0u64, 0u64);
            for a in 0..nonzero.len() {
                for b in a + 1..nonzero.len() {
                    for c in b + 1..nonzero.len() {
                        let ys = [&nonzero[a], &nonzero[b], &nonzero[c]];
                        let rows = (0..3)
                            .map(|e| ys.iter().map(|y| y.frobenius(e)).collect())
                            .collect();
                        let m = FMatrix::from_rows(&field, rows).expect("3x3");
                        let nonsingular = !m.det().expect("square").is_zero();
                        let independent = gf2_rank(&ys.map(|y| y.bits())) == 3;
                        triples += 1;
                        singular += u64::from(!nonsingular);
                        agree += u64::from(nonsingular == independent);
                    }
                }
            }
            (
                agree == triples && triples == binomial(31, 3) as u64,
                format!("{agree}/{triples} triples agree, {singular} singular"),
            )
        },
    )
}

fn vandermonde_t(code: &CodeInstance) -> usize {
    match code.layout() {
        Layout::Vandermonde(l) => l.t,
        _ => 0,
    }
}

/// `A u = 0`, full rank of the `u`s, and artifact round trips; `None` if
/// the instance is not a Vandermonde one.
pub fn null_space_check(code: &CodeInstance) -> Option<(bool, String)> {
    let Layout::Vandermonde(l) = code.layout() else {
        return None;
    };
    let p = code.params();
    let expected = p.h - l.t + 1;
    let kernel_ok = l.null_vectors.iter().all(|u| {
        l.a_matrix
            .mul_vec(u)
            .map(|v| v.iter().all(FieldElement::is_zero))
            .unwrap_or(false)
    });
    let u = FMatrix::from_rows(&l.extension_field, l.null_vectors.clone()).ok()?;
    let rank = u.rank();
    let text = CodeArtifactFile::from_instance(code).to_json();
    let reloaded = CodeArtifactFile::from_json(&text)
        .and_then(|f| f.instance())
        .ok()?;
    let rebuilt = rebuild(&reloaded).ok()?;
    let bytes_ok = CodeArtifactFile::from_instance(&reloaded).to_json() == text
        && CodeArtifactFile::from_instance(&rebuilt).to_json() == text;
    Some((
        kernel_ok && rank == expected && l.null_vectors.len() == expected && bytes_ok,
        format!("Au=0: {kernel_ok}, rank {rank}/{expected}, artifact identical: {bytes_ok}"),
    ))
}

pub fn criterion_7() -> Outcome {
    timed(7, "null-space vectors and artifact rebuild", 1_000, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for c in [GENERAL_DESK, IMPROVED_DESK] {
            let (pass, detail) = null_space_check(&c.build()).expect("vandermonde");
            ok &= pass;
            parts.push(format!("{}: {detail}", c.label));
        }
        (ok, parts.join("; "))
    })
}

fn random_symbols(field: &FieldSpec, count: usize, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
    (0..count)
        .map(|_| {
            field
                .from_index(rng.random_range(0..field.order()))
                .expect("in range")
        })
        .collect()
}

/// Encode/erase/decode over every guaranteed pattern, then every erasure
/// set of size g+h+1. Returns (recovered, patterns, uncorrectable, oversized).
pub fn codec_round_trip(code: &CodeInstance, family: Family, seed: u64) -> (u64, u64, u64, u64) {
    let codec = Codec::new(code).expect("parity positions invertible");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = code.params();
    let space = PatternSpace::new(p, family);
    let (mut recovered, mut patterns) = (0, 0);
    for pattern in space.iter() {
        let data = random_symbols(code.field(), p.k, &mut rng);
        let stripe = codec.encode(&data).expect("encode");
        let damaged = stripe.erased_copy(&pattern.columns);
        patterns += 1;
        if codec.decode(&damaged).is_ok_and(|s| s == stripe) {
            recovered += 1;
        }
    }
    let data = random_symbols(code.field(), p.k, &mut rng);
    let stripe = codec.encode(&data).expect("encode");
    let size = p.g + p.h + 1;
    let total = binomial(p.n as u64, size as u64);
    let mut uncorrectable = 0;
    for rank in 0..total {
        let e = unrank_combination(p.n, size, rank);
        if matches!(
            codec.decode(&stripe.erased_copy(&e)),
            Err(CodecError::Uncorrectable(_))
        ) {
            uncorrectable += 1;
        }
    }
    (recovered, patterns, uncorrectable, total as u64)
}

pub fn criterion_8() -> Outcome {
    timed(8, "codec round trip on guaranteed patterns", 30_000, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (i, c) in canonical_instances().iter().enumerate() {
            let code = c.build();
            let (rec, pats, unc, over) = codec_round_trip(&code, c.family(), 1000 + i as u64);
            ok &= rec == pats && unc == over && pats > 0;
            parts.push(format!(
                "{}: {rec}/{pats} recovered, {unc}/{over} oversized rejected",
                c.label
            ));
        }
        (ok, parts.join("; "))
    })
}

/// Square matrix with entries drawn uniformly; every fourth one has its last
/// row replaced by a random combination of the others.
pub fn random_square(
    field: &FieldSpec,
    size: usize,
    rng: &mut ChaCha8Rng,
    make_singular: bool,
) -> FMatrix {
    let mut rows: Vec<Vec<FieldElement>> = (0..size)
        .map(|_| random_symbols(field, size, rng))
        .collect();
    if make_singular {
        let coeffs = random_symbols(field, size - 1, rng);
        let mut last = vec![field.zero(); size];
        for (row, c) in rows.iter().zip(&coeffs) {
            for (acc, x) in last.iter_mut().zip(row) {
                *acc = &*acc + &(c * x);
            }
        }
        rows[size - 1] = last;
    }
    FMatrix::from_rows(field, rows).expect("square")
}

pub fn criterion_9() -> Outcome {
    timed(9, "elimination vs Laplace determinants", 10_000, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for m in [3u32, 6, 9] {
            let field = FieldSpec::binary(m).expect("field");
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + m as u64);
            let (mut agree, mut singular) = (0, 0);
            for i in 0..1000 {
                let size = rng.random_range(1..=5);
                let a = random_square(&field, size, &mut rng, i % 4 == 3);
                let det = a.det().expect("square");
                let same = det == a.laplace_det().expect("small");
                let rank_ok = det.is_zero() != (a.rank() == size);
                singular += u64::from(det.is_zero());
                agree += u64::from(same && rank_ok);
            }
            ok &= agree == 1000;
            parts.push(format!(
                "GF({}): {agree}/1000 ({singular} singular)",
                1u64 << m
            ));
        }
        (ok, parts.join(", "))
    })
}

/// Pruned and direct verdicts over the whole family; returns
/// (agreeing, total, failing verdicts).
pub fn pruning_agreement(code: &CodeInstance, family: Family) -> (u64, u64, u64) {
    let space = PatternSpace::new(code.params(), family);
    let (mut agree, mut total, mut failing) = (0, 0, 0);
    for pattern in space.iter() {
        let direct = check_pattern(code, &pattern).expect("well-formed");
        let pruned = check_pattern_pruned(code, &pattern).expect("well-formed");
        total += 1;
        agree += u64::from(direct == pruned);
        failing += u64::from(!direct);
    }
    (agree, total, failing)
}

pub fn criterion_10() -> Outcome {
    timed(10, "pruned and direct rank checks agree", 10_000, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for c in [SD_DESK, GENERAL_DESK] {
            let code = c.build();
            for family in [Family::Sd, Family::Mr] {
                let (agree, total, failing) = pruning_agreement(&code, family);
                ok &= agree == total;
                parts.push(format!(
                    "{} {family}: {agree}/{total} ({failing} dependent)",
                    c.label
                ));
            }
        }
        (ok, parts.join("; "))
    })
}

pub fn run_all() -> Vec<Outcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ]
}

/// Instance table followed by one line per criterion.
pub fn render(outcomes: &[Outcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<36} {:>6} {:>6} {:>9} {:>9}  result",
        "instance", "q", "family", "patterns", "failing"
    );
    for c in canonical_instances() {
        let code = c.build();
        let report = verify(&code, c.family(), &VerifyOptions::exhaustive());
        let _ = writeln!(
            out,
            "{:<36} {:>6} {:>6} {:>9} {:>9}  {}",
            c.label,
            code.field_order(),
            c.family(),
            report.patterns_checked,
            report.failing,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    out.push('\n');
    for o in outcomes {
        let _ = writeln!(out, "{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.ok()).count();
    let _ = writeln!(out, "\n{passed}/{} criteria passed", outcomes.len());
    out
}
