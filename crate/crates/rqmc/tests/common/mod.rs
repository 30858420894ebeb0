//! Exhaustive scramble enumeration, shared by the CLI and acceptance tests.
#![allow(dead_code)]

use rqmc_core::GeneratorSet;

/// Every choice of the free bits of `M_1..M_s` restricted to rows
/// `1..=rows`, as packed row words per coordinate. Row `l` (one-based) has
/// `min(l - 1, m)` free bits below or left of its diagonal.
pub fn all_scrambles(s: usize, m: usize, rows: usize) -> Vec<Vec<Vec<u64>>> {
    let free: Vec<usize> = (0..rows).map(|r| r.min(m)).collect();
    let per: usize = free.iter().sum();
    let total = per * s;
    assert!(total <= 24, "{total} free bits is too many to enumerate");
    (0u64..1 << total)
        .map(|bits| {
            (0..s)
                .map(|j| {
                    let mut offset = j * per;
                    free.iter()
                        .enumerate()
                        .map(|(r, &f)| {
                            let low = (bits >> offset) & ((1u64 << f) - 1);
                            offset += f;
                            if r < m {
                                low | 1 << r
                            } else {
                                low
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `(hits, total)` for the event `Σ_j k_jᵀ M_j C_j = 0` over `scrambles`,
/// with the product formed row by row from the generator's own rows.
pub fn gain_frequency(g: &GeneratorSet, k: &[u64], scrambles: &[Vec<Vec<u64>>]) -> (u64, u64) {
    let m = g.m();
    let mut hits = 0;
    for ms in scrambles {
        let mut acc = 0u64;
        for (j, mj) in ms.iter().enumerate() {
            assert!(k[j] >> mj.len() == 0, "k exceeds the enumerated rows");
            for (l, &mrow) in mj.iter().enumerate() {
                if k[j] >> l & 1 == 0 {
                    continue;
                }
                for i in 0..m {
                    if mrow >> i & 1 == 1 {
                        acc ^= g.row_word(j, i);
                    }
                }
            }
        }
        if acc == 0 {
            hits += 1;
        }
    }
    (hits, scrambles.len() as u64)
}

/// Whether `hits / total` equals the dyadic string `"0"` or `"2^-r"`.
pub fn frequency_matches(hits: u64, total: u64, probability: &str) -> bool {
    match probability {
        "0" => hits == 0,
        p => {
            let rho: u32 = p.strip_prefix("2^-").and_then(|r| r.parse().ok()).expect("dyadic string");
            u128::from(hits) << rho == u128::from(total)
        }
    }
}
