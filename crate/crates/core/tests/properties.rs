mod common;

use std::sync::OnceLock;

use mrlocal::codec::{correctable, decode, Codec, CodecError};
use mrlocal::constructions::{
    build, normalize_params, CodeInstance, Construction, LocalCodeParams, Regime,
};
use mrlocal::galois::{concat_elements, FieldElement, FieldSpec};
use mrlocal::matrix::FMatrix;
use mrlocal::verifier::{check_pattern, ErasurePattern, Family, PatternSpace};
use proptest::prelude::*;

fn fields() -> &'static [FieldSpec] {
    static F: OnceLock<Vec<FieldSpec>> = OnceLock::new();
    F.get_or_init(|| {
        vec![
            FieldSpec::binary(1).unwrap(),
            FieldSpec::binary(6).unwrap(),
            FieldSpec::binary(13).unwrap(),
            FieldSpec::standard(3, 4).unwrap(),
            FieldSpec::standard(5, 3).unwrap(),
            FieldSpec::standard(7, 2).unwrap(),
        ]
    })
}

fn instances() -> &'static [CodeInstance] {
    static I: OnceLock<Vec<CodeInstance>> = OnceLock::new();
    I.get_or_init(|| {
        [
            (Construction::Linearized, 2, 3, 2),
            (Construction::Linearized, 2, 3, 3),
            (Construction::SdH3, 4, 3, 3),
            (Construction::Vandermonde(Regime::General), 2, 3, 3),
            (Construction::Vandermonde(Regime::Improved), 2, 3, 4),
            (Construction::Vandermonde(Regime::Improved), 3, 2, 3),
        ]
        .into_iter()
        .map(|(c, g, r, h)| build(&LocalCodeParams::from_groups(g, r, h).unwrap(), c).unwrap())
        .collect()
    })
}

fn element(field: &FieldSpec, seed: u64) -> FieldElement {
    field.from_index(seed % field.order()).unwrap()
}

proptest! {
    #[test]
    fn field_axioms(f in 0usize..6, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let field = &fields()[f];
        let (a, b, c) = (element(field, a), element(field, b), element(field, c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, field.zero());
        prop_assert_eq!(&a * &field.one(), a.clone());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
            prop_assert!(a.pow(field.order() - 1).is_one());
        }
        let p = field.characteristic() as u64;
        prop_assert_eq!((&a + &b).pow(p), &a.pow(p) + &b.pow(p));
        prop_assert_eq!(a.frobenius(1), a.pow(p));
        prop_assert_eq!(a.frobenius(field.degree()), a.clone());
    }

    #[test]
    fn packed_index_round_trip(f in 0usize..6, a in any::<u64>()) {
        let field = &fields()[f];
        let e = element(field, a);
        prop_assert_eq!(field.element(e.coeffs()).unwrap(), e.clone());
        prop_assert_eq!(field.from_index(e.index()).unwrap(), e);
    }

    #[test]
    fn concatenation_is_additive(a in 0u64..16, b in 0u64..16, c in 0u64..8, d in 0u64..8) {
        let f16 = FieldSpec::binary(4).unwrap();
        let f8 = FieldSpec::binary(3).unwrap();
        let target = FieldSpec::binary(7).unwrap();
        let x = concat_elements(&[element(&f16, a), element(&f8, c)], &target).unwrap();
        let y = concat_elements(&[element(&f16, b), element(&f8, d)], &target).unwrap();
        let sum = concat_elements(
            &[&element(&f16, a) + &element(&f16, b), &element(&f8, c) + &element(&f8, d)],
            &target,
        ).unwrap();
        prop_assert_eq!(&x + &y, sum);
    }

    #[test]
    fn rank_matches_oracle(f in 0usize..6, rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let field = &fields()[f];
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s >> 11 };
        // Small entries so dependencies are common in large fields too.
        let data: Vec<Vec<FieldElement>> = (0..rows)
            .map(|_| (0..cols).map(|_| element(field, next() % 3)).collect())
            .collect();
        let m = FMatrix::from_rows(field, data.clone()).unwrap();
        prop_assert_eq!(m.rank(), common::rank(data));
        prop_assert_eq!(m.rank(), m.transpose().rank());
        for u in m.null_space_basis() {
            prop_assert!(m.mul_vec(&u).unwrap().iter().all(FieldElement::is_zero));
        }
        prop_assert_eq!(m.null_space_basis().len() + m.rank(), cols);
    }

    #[test]
    fn codec_linearity(i in 0usize..6, seed in any::<u64>(), lambda in any::<u64>(), pick in any::<u64>()) {
        let code = &instances()[i];
        let codec = Codec::new(code).unwrap();
        let p = code.params();
        let data: Vec<FieldElement> = (0..p.k as u64)
            .map(|j| element(code.field(), seed.rotate_left(j as u32 * 7) ^ j))
            .collect();
        let lambda = element(code.field(), lambda);
        let stripe = codec.encode(&data).unwrap();
        let scaled_data: Vec<FieldElement> = data.iter().map(|d| &lambda * d).collect();
        prop_assert_eq!(codec.encode(&scaled_data).unwrap(), stripe.scaled(&lambda));

        let family = if code.guarantee() == mrlocal::constructions::Guarantee::Sd { Family::Sd } else { Family::Mr };
        let space = PatternSpace::new(p, family);
        let pattern = space.pattern(pick as u128 % space.len());
        let damaged = stripe.erased_copy(&pattern.columns);
        let decoded = decode(code, &damaged).unwrap();
        prop_assert_eq!(&decoded, &stripe);
        prop_assert_eq!(decode(code, &damaged.scaled(&lambda)).unwrap(), stripe.scaled(&lambda));
    }

    #[test]
    fn correctable_agrees_with_decode(i in 0usize..6, mask in any::<u32>(), seed in any::<u64>()) {
        let code = &instances()[i];
        let p = code.params();
        let erased: Vec<usize> = (0..p.n).filter(|&c| mask >> (c % 32) & 1 == 1 && (mask >> ((c + 7) % 32)) & 1 == 0).collect();
        let codec = Codec::new(code).unwrap();
        let data: Vec<FieldElement> = (0..p.k as u64).map(|j| element(code.field(), seed ^ (j * 977))).collect();
        let stripe = codec.encode(&data).unwrap();
        let result = decode(code, &stripe.erased_copy(&erased));
        if correctable(code, &erased) {
            prop_assert_eq!(result.unwrap(), stripe);
            prop_assert!(check_pattern(code, &ErasurePattern::arbitrary(erased.clone())).unwrap());
        } else {
            prop_assert!(matches!(result, Err(CodecError::Uncorrectable(_))));
            prop_assert!(erased.len() > p.g + p.h || !common::columns_independent(code, &erased));
        }
    }

    #[test]
    fn normalization_is_idempotent(k in 1usize..20, r in 2usize..8, h in 1usize..4, c in 0usize..4) {
        let construction = [
            Construction::Linearized,
            Construction::SdH3,
            Construction::Vandermonde(Regime::General),
            Construction::Vandermonde(Regime::Improved),
        ][c];
        if let Ok(n) = normalize_params(k, r, h, construction) {
            let q = n.params;
            prop_assert!(q.k >= k && q.r >= r && q.h >= h);
            let again = normalize_params(q.k, q.r, q.h, construction).unwrap();
            prop_assert!(again.unchanged());
            prop_assert_eq!(again.params, q);
        }
    }
}
