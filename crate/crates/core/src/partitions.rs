//! Exact counts of frequency vectors by `‖κ‖₁`.
//!
//! `Q(x) = Π (1 + x^n)` counts partitions into distinct parts, which is the
//! number of `k ∈ ℕ` with a given `‖κ‖₁`. Its `s`-th power counts vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `3 ln(2)^2 / π^2`.
pub const LAMBDA: f64 = 3.0 * LN_2 * LN_2 / (PI * PI);

/// Largest table size accepted by [`q_coefficients`].
pub const MAX_TABLE: usize = 1_000_000;

/// `counts[N] = |{k ∈ ℕ₀^s : ‖κ‖₁ = N}|` for `N ≤ n_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTable {
    s: usize,
    counts: Vec<BigUint>,
}

impl PartitionTable {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, n: usize) -> &BigUint {
        &self.counts[n]
    }

    /// `Σ_{n=1}^{N} counts[n]`, the number of nonzero `k` with `‖κ‖₁ ≤ N`.
    pub fn cumulative(&self, n: usize) -> BigUint {
        self.counts[1..=n].iter().sum()
    }

    /// Running cumulative counts for `N = 0..=n_max`.
    pub fn cumulative_all(&self) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        let mut out = Vec::with_capacity(self.counts.len());
        out.push(BigUint::zero());
        for c in &self.counts[1..] {
            acc += c;
            out.push(acc.clone());
        }
        out
    }

    /// Convolution with another table over the common range.
    pub fn convolve(&self, other: &PartitionTable) -> PartitionTable {
        let n_max = self.n_max().min(other.n_max());
        let counts = (0..=n_max)
            .map(|n| {
                (0..=n)
                    .map(|i| &self.counts[i] * &other.counts[n - i])
                    .sum()
            })
            .collect();
        PartitionTable {
            s: self.s + other.s,
            counts,
        }
    }
}

/// Distinct-part partition counts `Q[0..=n_max]`.
pub fn q_coefficients(n_max: usize) -> Result<PartitionTable> {
    if n_max > MAX_TABLE {
        return Err(Error::BudgetExceeded {
            required: n_max as u128,
            limit: MAX_TABLE as u128,
        });
    }
    let mut counts = vec![BigUint::zero(); n_max + 1];
    counts[0] = BigUint::one();
    for part in 1..=n_max {
        for n in (part..=n_max).rev() {
            let (lo, hi) = counts.split_at_mut(n);
            hi[0] += &lo[n - part];
        }
    }
    Ok(PartitionTable { s: 1, counts })
}

/// Coefficients of `Q(x)^s` up to `n_max`.
pub fn qs_coefficients(s: usize, n_max: usize) -> Result<PartitionTable> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1"));
    }
    let q = q_coefficients(n_max)?;
    let mut table = q.clone();
    for _ in 1..s {
        table = table.convolve(&q);
    }
    Ok(table)
}

/// `|{k ∈ ℕ₀^s \ {0} : ‖κ‖₁ ≤ n}|`.
pub fn cumulative_count(s: usize, n: usize) -> Result<BigUint> {
    Ok(qs_coefficients(s, n)?.cumulative(n))
}

/// Strict upper bound on `Q^s[N]`, `N ≥ 1`.
pub fn thm6_bound(s: usize, n: usize) -> f64 {
    let (s, n) = (s as f64, n as f64);
    PI * libm::sqrt(s) / (2.0 * libm::sqrt(3.0 * n)) * libm::exp(PI * libm::sqrt(s * n / 3.0))
}

/// Strict upper bound on the cumulative count up to `N`.
pub fn cor5_bound(s: usize, n: usize) -> f64 {
    libm::exp(PI * libm::sqrt(s as f64 * (n + 1) as f64 / 3.0))
}

/// `R ≥ 2 √(3 (s-1) N) / π`.
pub fn cor6_admissible(s: usize, r: usize, n: usize) -> bool {
    let need = 2.0 * libm::sqrt(3.0 * (s - 1) as f64 * n as f64) / PI;
    r as f64 >= need
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(R+s, s-1) · N · exp(π √(sN/3))`.
pub fn cor6_bound(s: usize, r: usize, n: usize) -> f64 {
    to_f64(&binomial(r + s, s - 1)) * n as f64 * libm::exp(PI * libm::sqrt(s as f64 * n as f64 / 3.0))
}

/// `Σ_{v=R+1}^{N+R} C(v+s-1, s-1) · |{k ∈ ℕ₀^s : ‖κ‖₁ ≤ N+R-v}|`: the
/// count obtained by fixing `⌈κ⌉` and bounding the remaining bits.
pub fn cor6_middle_exact(s: usize, r: usize, n: usize) -> Result<BigUint> {
    let total = n + r;
    let cum = qs_coefficients(s, n)?.cumulative_all();
    Ok((r + 1..=total)
        .map(|v| binomial(v + s - 1, s - 1) * (&cum[total - v] + 1u32))
        .sum())
}

/// The previous sum with each cumulative count replaced by its bound.
pub fn cor6_middle_exp(s: usize, r: usize, n: usize) -> f64 {
    let total = n + r;
    (r + 1..=total)
        .map(|v| to_f64(&binomial(v + s - 1, s - 1)) * cor5_bound(s, total - v))
        .sum()
}

/// `|{k ∈ ℕ₀^s : ‖κ‖₁ ≤ N+R, ‖⌈κ⌉‖₁ > R}|`, counted exactly by a
/// generating function over `(‖⌈κ⌉‖₁, ‖κ‖₁)`.
pub fn restricted_count(s: usize, r: usize, n: usize) -> BigUint {
    let total = n + r;
    // single[top][norm] for one coordinate.
    let mut single = vec![vec![BigUint::zero(); total + 1]; total + 1];
    single[0][0] = BigUint::one();
    // below[x]: partitions of x into distinct parts < top, updated as top grows.
    let mut below = vec![BigUint::zero(); total + 1];
    below[0] = BigUint::one();
    for top in 1..=total {
        single[top][top..].clone_from_slice(&below[..=total - top]);
        for x in (top..=total).rev() {
            let (lo, hi) = below.split_at_mut(x);
            hi[0] += &lo[x - top];
        }
    }
    // joint[c][w]: vectors so far with ceiling sum c and norm w.
    let mut joint = single.clone();
    for _ in 1..s {
        let mut next = vec![vec![BigUint::zero(); total + 1]; total + 1];
        for (c1, row1) in joint.iter().enumerate() {
            for (w1, a) in row1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (c2, row2) in single.iter().enumerate().take(total + 1 - c1) {
                    for (w2, b) in row2.iter().enumerate().take(total + 1 - w1) {
                        if !b.is_zero() {
                            next[c1 + c2][w1 + w2] += a * b;
                        }
                    }
                }
            }
        }
        joint = next;
    }
    joint
        .iter()
        .enumerate()
        .skip(r + 1)
        .flat_map(|(_, row)| row.iter())
        .sum()
}

fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// One row of the finite-`N` bound table.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRow {
    pub s: usize,
    pub n: usize,
    pub count: BigUint,
    pub cumulative: BigUint,
    pub bound_thm6: f64,
    pub bound_cor5: f64,
}

impl CountRow {
    pub fn holds(&self) -> bool {
        to_f64(&self.count) < self.bound_thm6 && to_f64(&self.cumulative) < self.bound_cor5
    }
}

/// Exact counts and both closed-form bounds for `N = 1..=n_max`.
pub fn count_rows(s: usize, n_max: usize) -> Result<Vec<CountRow>> {
    let table = qs_coefficients(s, n_max)?;
    let cum = table.cumulative_all();
    Ok((1..=n_max)
        .map(|n| CountRow {
            s,
            n,
            count: table.get(n).clone(),
            cumulative: cum[n].clone(),
            bound_thm6: thm6_bound(s, n),
            bound_cor5: cor5_bound(s, n),
        })
        .collect())
}

/// Like [`count_rows`], failing on the first `N` where a bound is not strict.
pub fn check_finite_bounds(s: usize, n_max: usize) -> Result<Vec<CountRow>> {
    let rows = count_rows(s, n_max)?;
    for row in &rows {
        if to_f64(&row.count) >= row.bound_thm6 {
            return Err(Error::BoundViolated { s, n: row.n, which: "thm6" });
        }
        if to_f64(&row.cumulative) >= row.bound_cor5 {
            return Err(Error::BoundViolated { s, n: row.n, which: "cor5" });
        }
    }
    Ok(rows)
}

/// The restricted count for one `(s, R, N)` with every layer of its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedCheck {
    pub s: usize,
    pub r: usize,
    pub n: usize,
    pub count: BigUint,
    pub middle_exact: BigUint,
    pub middle_exp: f64,
    pub bound: f64,
}

/// Checks `count ≤ middle_exact ≤ middle_exp < bound` at an admissible triple.
pub fn check_restricted_bound(s: usize, r: usize, n: usize) -> Result<RestrictedCheck> {
    if s == 0 || n == 0 || r == 0 {
        return Err(Error::InvalidParameter("s, R and N must be positive"));
    }
    if !cor6_admissible(s, r, n) {
        return Err(Error::InvalidParameter("R below 2 sqrt(3(s-1)N)/pi"));
    }
    let check = RestrictedCheck {
        s,
        r,
        n,
        count: restricted_count(s, r, n),
        middle_exact: cor6_middle_exact(s, r, n)?,
        middle_exp: cor6_middle_exp(s, r, n),
        bound: cor6_bound(s, r, n),
    };
    let violated = |which| Err(Error::BoundViolated { s, n, which });
    if check.count > check.middle_exact {
        return violated("cor6 middle exact");
    }
    if to_f64(&check.middle_exact) > check.middle_exp {
        return violated("cor6 middle exp");
    }
    if check.middle_exp >= check.bound || to_f64(&check.count) >= check.bound {
        return violated("cor6");
    }
    Ok(check)
}

/// `cumulative_count(s, ⌊λm²/s⌋) · √m / 2^m`.
pub fn lambda_count_ratio(s: usize, m: usize) -> Result<f64> {
    let n = libm::floor(LAMBDA * (m * m) as f64 / s as f64) as usize;
    let cum = cumulative_count(s, n)?;
    Ok(to_f64(&cum) * libm::sqrt(m as f64) * libm::ldexp(1.0, -(m as i32)))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn first_values() {
        let q = q_coefficients(4).unwrap();
        let want: Vec<BigUint> = [1u64, 1, 1, 2, 2].iter().map(|&x| big(x)).collect();
        assert_eq!(q.counts(), &want[..]);
    }

    // Subset-sum enumeration: every subset of {1..N} with sum N.
    fn distinct_brute(n: usize) -> u64 {
        let mut count = 0u64;
        let parts = n.min(24);
        for mask in 0u32..(1u32 << parts) {
            let sum: usize = (0..parts).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).sum();
            if sum == n {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn matches_subset_sum_oracle() {
        let q = q_coefficients(24).unwrap();
        for n in 0..=24 {
            assert_eq!(*q.get(n), big(distinct_brute(n)), "N = {n}");
        }
    }

    // Partitions into odd parts, repetition allowed.
    fn odd_parts(n_max: usize) -> Vec<BigUint> {
        let mut p = vec![BigUint::zero(); n_max + 1];
        p[0] = BigUint::one();
        for part in (1..=n_max).step_by(2) {
            for n in part..=n_max {
                let add = p[n - part].clone();
                p[n] += add;
            }
        }
        p
    }

    #[test]
    fn euler_equivalence() {
        assert_eq!(q_coefficients(200).unwrap().counts(), &odd_parts(200)[..]);
    }

    #[test]
    fn nondecreasing() {
        for s in 1..=5 {
            let t = qs_coefficients(s, 500).unwrap();
            for n in 1..500 {
                assert!(t.get(n) <= t.get(n + 1), "s={s} N={n}");
            }
        }
    }

    #[test]
    fn convolution_consistency() {
        let q = q_coefficients(120).unwrap();
        for s in 2..=4 {
            let prev = qs_coefficients(s - 1, 120).unwrap();
            assert_eq!(prev.convolve(&q), qs_coefficients(s, 120).unwrap());
        }
    }

    fn kappa_norm(mut k: u64) -> usize {
        let mut norm = 0;
        while k != 0 {
            norm += 64 - k.leading_zeros() as usize;
            k &= !(1u64 << (63 - k.leading_zeros()));
        }
        norm
    }

    // Counts vectors of integers whose bits fit below position `n_max`.
    fn brute_vector_counts(s: usize, n_max: usize) -> Vec<u64> {
        let single: Vec<usize> = (0u64..1 << n_max).map(kappa_norm).collect();
        let mut out = vec![0u64; n_max + 1];
        let mut idx = vec![0usize; s];
        loop {
            let norm: usize = idx.iter().map(|&i| single[i]).sum();
            if norm <= n_max {
                out[norm] += 1;
            }
            let mut j = 0;
            loop {
                if j == s {
                    return out;
                }
                idx[j] += 1;
                if idx[j] < single.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn powers_match_brute_force() {
        assert_eq!(*qs_coefficients(2, 2).unwrap().get(2), big(3));
        assert_eq!(*qs_coefficients(3, 0).unwrap().get(0), big(1));
        for (s, n_max) in [(1usize, 16usize), (2, 10), (3, 6)] {
            let t = qs_coefficients(s, n_max).unwrap();
            let want = brute_vector_counts(s, n_max);
            for n in 0..=n_max {
                assert_eq!(*t.get(n), big(want[n]), "s={s} N={n}");
            }
        }
    }

    #[test]
    fn cumulative_examples() {
        assert_eq!(cumulative_count(1, 0).unwrap(), big(0));
        assert_eq!(cumulative_count(1, 4).unwrap(), big(6));
        assert_eq!(cumulative_count(3, 0).unwrap(), big(0));
    }

    #[test]
    fn finite_bounds_hold() {
        check_finite_bounds(1, 500).unwrap();
        check_finite_bounds(2, 300).unwrap();
        check_finite_bounds(3, 300).unwrap();
    }

    // Direct enumeration of the restricted set for small totals.
    fn restricted_brute(s: usize, r: usize, n: usize) -> u64 {
        let total = n + r;
        let bits = total.min(16);
        let single: Vec<(usize, usize)> = (0u64..1 << bits)
            .map(|k| (kappa_norm(k), 64 - k.leading_zeros() as usize))
            .filter(|&(w, _)| w <= total)
            .collect();
        let mut memo: HashMap<(usize, usize, usize), u64> = HashMap::new();
        #[allow(clippy::too_many_arguments)]
        fn go(
            j: usize,
            w: usize,
            c: usize,
            s: usize,
            total: usize,
            r: usize,
            single: &[(usize, usize)],
            memo: &mut HashMap<(usize, usize, usize), u64>,
        ) -> u64 {
            if j == s {
                return u64::from(c > r);
            }
            if let Some(&v) = memo.get(&(j, w, c)) {
                return v;
            }
            let mut acc = 0;
            for &(nw, nc) in single {
                if w + nw <= total {
                    acc += go(j + 1, w + nw, c + nc, s, total, r, single, memo);
                }
            }
            memo.insert((j, w, c), acc);
            acc
        }
        go(0, 0, 0, s, total, r, &single, &mut memo)
    }

    #[test]
    fn restricted_count_matches_enumeration() {
        for (s, r, n) in [(1, 3, 5), (2, 4, 6), (2, 10, 5), (3, 6, 4), (3, 3, 2)] {
            assert_eq!(restricted_count(s, r, n), big(restricted_brute(s, r, n)), "{s} {r} {n}");
        }
    }

    #[test]
    fn restricted_example() {
        assert!(cor6_admissible(2, 10, 8));
        let c = check_restricted_bound(2, 10, 8).unwrap();
        let by_hand = 12.0 * 8.0 * libm::exp(PI * libm::sqrt(16.0 / 3.0));
        assert!((c.bound - by_hand).abs() < 1e-9 * by_hand);
    }

    #[test]
    fn restricted_rejects_inadmissible() {
        assert!(!cor6_admissible(2, 1, 8));
        assert!(check_restricted_bound(2, 1, 8).is_err());
    }

    #[test]
    fn lambda_constant() {
        assert!((LAMBDA - 0.146).abs() < 5e-4);
        let r10 = lambda_count_ratio(1, 10).unwrap();
        let want = 109.0 * libm::sqrt(10.0) / 1024.0;
        // Q[1..14] = 1,1,2,2,3,4,5,6,8,10,12,15,18,22.
        assert_eq!(cumulative_count(1, 14).unwrap(), big(109));
        assert!((r10 - want).abs() < 1e-12);
    }
}
