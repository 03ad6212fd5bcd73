//! Oracles shared by the integration tests. They use only field arithmetic
//! from the library and are written independently of `matrix` and
//! `verifier`.
#![allow(dead_code)]

use mrlocal::constructions::{CodeInstance, LocalCodeParams};
use mrlocal::galois::FieldElement;

/// All `k`-subsets of `items`, in lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut tail in combinations(&items[i + 1..], k - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn choice_tuples(g: usize, s: usize) -> Vec<Vec<usize>> {
    let mut tuples = vec![Vec::new()];
    for _ in 0..g {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..s).map(move |j| {
                    let mut t = t.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    tuples
}

/// One column per group plus `h` more; every (choice, extras) pair.
pub fn mr_patterns(p: &LocalCodeParams) -> Vec<Vec<usize>> {
    let s = p.r + 1;
    let mut out = Vec::new();
    for choice in choice_tuples(p.g, s) {
        let picked: Vec<usize> = choice.iter().enumerate().map(|(i, &j)| i * s + j).collect();
        let rest: Vec<usize> = (0..p.n).filter(|c| !picked.contains(c)).collect();
        for extra in combinations(&rest, p.h) {
            let mut cols: Vec<usize> = picked.iter().chain(&extra).copied().collect();
            cols.sort_unstable();
            out.push(cols);
        }
    }
    out
}

/// Position `j` in every group plus `h` more.
pub fn sd_patterns(p: &LocalCodeParams) -> Vec<Vec<usize>> {
    let s = p.r + 1;
    let mut out = Vec::new();
    for j in 0..s {
        let picked: Vec<usize> = (0..p.g).map(|i| i * s + j).collect();
        let rest: Vec<usize> = (0..p.n).filter(|c| !picked.contains(c)).collect();
        for extra in combinations(&rest, p.h) {
            let mut cols: Vec<usize> = picked.iter().chain(&extra).copied().collect();
            cols.sort_unstable();
            out.push(cols);
        }
    }
    out
}

/// Rank by elimination, pivoting on the bottom-most nonzero entry.
pub fn rank(mut rows: Vec<Vec<FieldElement>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).rev().find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][c].inv().unwrap();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = &rows[r][c] * &inv;
                let pivot_row = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `H` restricted to `columns`, as rows.
pub fn submatrix(code: &CodeInstance, columns: &[usize]) -> Vec<Vec<FieldElement>> {
    let h = code.parity_check();
    (0..h.rows())
        .map(|r| columns.iter().map(|&c| h.get(r, c).clone()).collect())
        .collect()
}

pub fn columns_independent(code: &CodeInstance, columns: &[usize]) -> bool {
    rank(submatrix(code, columns)) == columns.len()
}

/// Cofactor expansion along the last column.
pub fn laplace(m: &[Vec<FieldElement>]) -> FieldElement {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = m[0][0].field().zero();
    for r in 0..n {
        if m[r][n - 1].is_zero() {
            continue;
        }
        let minor: Vec<Vec<FieldElement>> = (0..n)
            .filter(|&i| i != r)
            .map(|i| m[i][..n - 1].to_vec())
            .collect();
        let term = &m[r][n - 1] * &laplace(&minor);
        acc = if (r + n - 1).is_multiple_of(2) {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// True iff no nonempty subset of at most `w` of the bit vectors XORs to 0.
pub fn xor_independent(bits: &[u64], w: usize) -> bool {
    let n = bits.len();
    assert!(n <= 24);
    (1u32..1 << n).all(|mask| {
        mask.count_ones() as usize > w
            || (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .fold(0, |a, i| a ^ bits[i])
                != 0
    })
}
