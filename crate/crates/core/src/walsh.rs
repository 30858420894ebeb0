//! Walsh analysis of scrambled-net errors.
//!
//! A frequency `k ∈ ℕ₀^s` is identified with its bit sets `κ_j`, where
//! `ℓ ∈ κ_j` when bit `ℓ - 1` of `k_j` is set. Position `ℓ` pairs with the
//! `ℓ`-th binary digit of a coordinate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, RowSpace};
use crate::integrand::Integrand;
use crate::net::{f64_to_fraction, t_value, GeneratorSet, Subset};
use crate::partitions::cumulative_count;
use crate::rng::RandomStream;
use crate::scramble::ScrambleSet;

/// A frequency vector with its κ-set norms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KappaIndex {
    k: Vec<u64>,
}

fn top_bit(k: u64) -> usize {
    64 - k.leading_zeros() as usize
}

fn positions(mut k: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if k == 0 {
            return None;
        }
        let p = k.trailing_zeros() as usize;
        k &= k - 1;
        Some(p + 1)
    })
}

impl KappaIndex {
    pub fn new(k: Vec<u64>) -> Self {
        Self { k }
    }

    pub fn zero(s: usize) -> Self {
        Self { k: vec![0; s] }
    }

    pub fn s(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|&k| k == 0)
    }

    /// `κ_j` in increasing order, 1-based, `j` 0-based.
    pub fn kappa(&self, j: usize) -> impl Iterator<Item = usize> {
        positions(self.k[j])
    }

    pub fn kappa_sets(&self) -> Vec<Vec<usize>> {
        self.k.iter().map(|&k| positions(k).collect()).collect()
    }

    /// `‖κ‖₀`, the total number of set bits.
    pub fn norm0(&self) -> usize {
        self.k.iter().map(|k| k.count_ones() as usize).sum()
    }

    /// `‖κ‖₁`, the total of all bit positions.
    pub fn norm1(&self) -> usize {
        self.k.iter().map(|&k| positions(k).sum::<usize>()).sum()
    }

    /// `⌈κ_j⌉`, the highest position in `κ_j`, or 0.
    pub fn ceil(&self, j: usize) -> usize {
        top_bit(self.k[j])
    }

    pub fn ceil_vec(&self) -> Vec<usize> {
        self.k.iter().map(|&k| top_bit(k)).collect()
    }

    /// `‖⌈κ⌉‖₁`.
    pub fn ceil_sum(&self) -> usize {
        self.k.iter().map(|&k| top_bit(k)).sum()
    }

    pub fn max_ceil(&self) -> usize {
        self.k.iter().map(|&k| top_bit(k)).max().unwrap_or(0)
    }

    /// Coordinates with `k_j != 0`.
    pub fn support(&self) -> Subset {
        Subset(
            self.k
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .fold(0, |acc, (j, _)| acc | (1 << j)),
        )
    }
}

impl fmt::Display for KappaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, k) in self.k.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for KappaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{self}")
    }
}

/// `wal_k` at a point given by its 64-bit coordinate fractions.
pub fn wal_fractions(kidx: &KappaIndex, x: &[u64]) -> i8 {
    let parity = kidx
        .k
        .iter()
        .zip(x)
        .map(|(&k, &frac)| (k & frac.reverse_bits()).count_ones())
        .sum::<u32>();
    if parity & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `wal_k(x) = (-1)^{Σ_j Σ_{ℓ ∈ κ_j} x_{jℓ}}`.
pub fn wal(kidx: &KappaIndex, x: &[f64]) -> i8 {
    let parity = kidx
        .k
        .iter()
        .zip(x)
        .map(|(&k, &xj)| (k & f64_to_fraction(xj).reverse_bits()).count_ones())
        .sum::<u32>();
    if parity & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `μ + Σ c_k wal_k` with distinct nonzero `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshPolynomial {
    s: usize,
    constant: f64,
    terms: Vec<(KappaIndex, f64)>,
}

impl WalshPolynomial {
    pub fn new(s: usize, constant: f64, terms: Vec<(KappaIndex, f64)>) -> Result<Self> {
        for (i, (k, _)) in terms.iter().enumerate() {
            if k.s() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    found: k.s(),
                });
            }
            if k.is_zero() {
                return Err(Error::InvalidParameter("use the constant for k = 0"));
            }
            if terms[..i].iter().any(|(other, _)| other == k) {
                return Err(Error::InvalidParameter("repeated Walsh index"));
            }
        }
        Ok(Self { s, constant, terms })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(KappaIndex, f64)] {
        &self.terms
    }

    /// `Σ |c_k|`, a bound on `|μ̂ - μ|` for any point set.
    pub fn error_cap(&self) -> f64 {
        self.terms.iter().map(|(_, c)| libm::fabs(*c)).sum()
    }

    pub fn max_ceil(&self) -> usize {
        self.terms.iter().map(|(k, _)| k.max_ceil()).max().unwrap_or(0)
    }
}

impl Integrand for WalshPolynomial {
    fn dim(&self) -> usize {
        self.s
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let fracs: Vec<u64> = x.iter().map(|&v| f64_to_fraction(v)).collect();
        self.constant
            + self
                .terms
                .iter()
                .map(|(k, c)| c * f64::from(wal_fractions(k, &fracs)))
                .sum::<f64>()
    }

    fn name(&self) -> &str {
        "walsh"
    }

    fn exact_mean(&self) -> Option<f64> {
        Some(self.constant)
    }
}

/// Largest `L·s` accepted by [`walsh_coefficient`].
pub const MAX_QUADRATURE_BITS: usize = 22;

/// `∫ f wal_k` by the midpoint rule on the `2^{Ls}` dyadic cells of side `2^-L`.
pub fn walsh_coefficient<F: Integrand + ?Sized>(f: &F, kidx: &KappaIndex, level: usize) -> Result<f64> {
    let s = f.dim();
    if kidx.s() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: kidx.s(),
        });
    }
    if level < kidx.max_ceil() {
        return Err(Error::InvalidParameter("grid level below max ceil(kappa)"));
    }
    let bits = level * s;
    if bits > MAX_QUADRATURE_BITS {
        return Err(Error::BudgetExceeded {
            required: bits as u128,
            limit: MAX_QUADRATURE_BITS as u128,
        });
    }
    let side = 1usize << level;
    let scale = libm::ldexp(1.0, -(level as i32));
    let mut x = vec![0.0; s];
    let mut sum = 0.0;
    for cell in 0..1usize << bits {
        let mut c = cell;
        for xj in x.iter_mut() {
            *xj = ((c % side) as f64 + 0.5) * scale;
            c /= side;
        }
        let v = f.eval(&x);
        if wal(kidx, &x) > 0 {
            sum += v;
        } else {
            sum -= v;
        }
    }
    Ok(libm::ldexp(sum, -(bits as i32)))
}

/// `2^{-‖κ‖₁-‖κ‖₀} · deriv_sup`.
pub fn yoshiki_bound(kidx: &KappaIndex, deriv_sup: f64) -> f64 {
    libm::ldexp(deriv_sup, -((kidx.norm1() + kidx.norm0()) as i32))
}

/// `Pr(Σ_j k_jᵀ M_j C_j = 0)`, which is either 0 or a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GainProbability {
    Zero,
    /// `2^-ρ`.
    Dyadic(u32),
}

impl GainProbability {
    pub fn to_f64(self) -> f64 {
        match self {
            GainProbability::Zero => 0.0,
            GainProbability::Dyadic(rho) => libm::ldexp(1.0, -(rho as i32)),
        }
    }

    /// Value in units of `2^-m`, exact when `ρ ≤ m`.
    pub fn units(self, m: usize) -> u128 {
        match self {
            GainProbability::Zero => 0,
            GainProbability::Dyadic(rho) => 1u128 << (m as u32 - rho.min(m as u32)),
        }
    }

    /// Whether this is at most `2^-e`; `e ≤ 0` caps nothing.
    pub fn at_most_pow2(self, e: i64) -> bool {
        match self {
            GainProbability::Zero => true,
            GainProbability::Dyadic(rho) => i64::from(rho) >= e,
        }
    }
}

impl fmt::Display for GainProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainProbability::Zero => f.write_str("0"),
            GainProbability::Dyadic(rho) => write!(f, "2^-{rho}"),
        }
    }
}

impl FromStr for GainProbability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "0" {
            return Ok(GainProbability::Zero);
        }
        s.strip_prefix("2^-")
            .and_then(|r| r.parse().ok())
            .map(GainProbability::Dyadic)
            .ok_or(Error::InvalidParameter("probability must be 0 or 2^-r"))
    }
}

fn check_dims(g: &GeneratorSet, kidx: &KappaIndex) -> Result<()> {
    if kidx.s() != g.s() {
        return Err(Error::DimensionMismatch {
            expected: g.s(),
            found: kidx.s(),
        });
    }
    Ok(())
}

/// Exact gain probability from ranks and row-space membership.
///
/// Write `c_j = ⌈κ_j⌉`. Row `c_j` of `M_j C_j` carries row `c_j` of `C_j`
/// with coefficient one (when `c_j ≤ m`) plus a uniform combination of the
/// rows above it, and no other row of `M_j` in `κ_j` touches those
/// coefficients. The event therefore asks a fixed vector to equal a uniform
/// element of a row space.
pub fn gain_probability(g: &GeneratorSet, kidx: &KappaIndex) -> Result<GainProbability> {
    check_dims(g, kidx)?;
    if kidx.is_zero() {
        return Err(Error::InvalidParameter("gain probability needs k != 0"));
    }
    let m = g.m();
    let mut space = RowSpace::new(m);
    let mut target = 0u64;
    for j in 0..g.s() {
        let c = kidx.ceil(j);
        if c == 0 {
            continue;
        }
        for row in 0..(c - 1).min(m) {
            space.insert_words(&[g.row_word(j, row)]);
        }
        if c <= m {
            target ^= g.row_word(j, c - 1);
        }
    }
    Ok(if space.contains_words(&[target]) {
        GainProbability::Dyadic(space.dim() as u32)
    } else {
        GainProbability::Zero
    })
}

/// Largest `‖κ‖₁` for which frequencies fit in `u64`.
pub const MAX_ENUMERATION_NORM: usize = 64;

/// Largest number of frequencies enumerated by one call.
pub const MAX_ENUMERATION: u128 = 10_000_000;

/// Number of nonzero `k ∈ ℕ₀^s` with `‖κ‖₁ ≤ n_max`, failing past the budget.
pub fn enumeration_size(s: usize, n_max: usize) -> Result<u128> {
    if n_max > MAX_ENUMERATION_NORM {
        return Err(Error::BudgetExceeded {
            required: n_max as u128,
            limit: MAX_ENUMERATION_NORM as u128,
        });
    }
    let count = cumulative_count(s, n_max)?
        .to_u128()
        .unwrap_or(u128::MAX);
    if count > MAX_ENUMERATION {
        return Err(Error::BudgetExceeded {
            required: count,
            limit: MAX_ENUMERATION,
        });
    }
    Ok(count)
}

// All k with ‖κ‖₁ ≤ n_max, ascending, paired with their norm.
fn single_coordinate(n_max: usize) -> Vec<(u64, usize)> {
    fn grow(pos: usize, k: u64, norm: usize, n_max: usize, out: &mut Vec<(u64, usize)>) {
        out.push((k, norm));
        for p in pos..=n_max - norm {
            grow(p + 1, k | 1u64 << (p - 1), norm + p, n_max, out);
        }
    }
    let mut out = Vec::new();
    grow(1, 0, 0, n_max, &mut out);
    out.sort_unstable();
    out
}

/// Calls `visit` on every nonzero `k ∈ ℕ₀^s` with `‖κ‖₁ ≤ n_max`, in
/// lexicographic order of `k`.
pub fn for_each_kappa(s: usize, n_max: usize, visit: &mut dyn FnMut(&[u64])) -> Result<()> {
    enumeration_size(s, n_max)?;
    let single = single_coordinate(n_max);
    let mut k = vec![0u64; s];
    fn go(
        j: usize,
        budget: usize,
        k: &mut [u64],
        single: &[(u64, usize)],
        visit: &mut dyn FnMut(&[u64]),
    ) {
        if j == k.len() {
            if k.iter().any(|&v| v != 0) {
                visit(k);
            }
            return;
        }
        for &(v, norm) in single {
            if norm <= budget {
                k[j] = v;
                go(j + 1, budget - norm, k, single, visit);
            }
        }
        k[j] = 0;
    }
    go(0, n_max, &mut k, &single, visit);
    Ok(())
}

/// One row of a gain table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainEntry {
    pub k: KappaIndex,
    pub probability: GainProbability,
    pub within_cap: bool,
}

/// Gain probabilities of every `k` with `‖κ‖₁ ≤ n_cap`, checked against the
/// net-wide cap `2^{-m+t+s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainTable {
    pub s: usize,
    pub m: usize,
    pub t: usize,
    pub n_cap: usize,
    pub source: String,
    pub entries: Vec<GainEntry>,
}

impl GainTable {
    /// The cap is `2^-e` with `e = m - t - s`.
    pub fn cap_exponent(&self) -> i64 {
        self.m as i64 - self.t as i64 - self.s as i64
    }

    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| !e.within_cap).count()
    }
}

pub fn gain_table(g: &GeneratorSet, n_cap: usize) -> Result<GainTable> {
    let t = t_value(g);
    let cap = g.m() as i64 - t as i64 - g.s() as i64;
    let mut entries = Vec::new();
    let mut failure = None;
    for_each_kappa(g.s(), n_cap, &mut |k| {
        let k = KappaIndex::new(k.to_vec());
        match gain_probability(g, &k) {
            Ok(p) => entries.push(GainEntry {
                within_cap: p.at_most_pow2(cap),
                k,
                probability: p,
            }),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GainTable {
        s: g.s(),
        m: g.m(),
        t,
        n_cap,
        source: alloc::format!("{}", g.source()),
        entries,
    })
}

/// Exact union bound `Σ_k Pr(gain)` over `‖κ‖₁ ≤ n_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnionBound {
    pub m: usize,
    pub t: usize,
    /// The sum in units of `2^-m`.
    pub sum_units: u128,
    pub count: u128,
    pub violations: u128,
}

impl UnionBound {
    pub fn sum(&self) -> f64 {
        libm::ldexp(self.sum_units as f64, -(self.m as i32))
    }
}

pub fn union_bound_check(g: &GeneratorSet, n_cap: usize) -> Result<UnionBound> {
    let t = t_value(g);
    let cap = g.m() as i64 - t as i64 - g.s() as i64;
    let mut out = UnionBound {
        m: g.m(),
        t,
        sum_units: 0,
        count: 0,
        violations: 0,
    };
    let mut kidx = KappaIndex::zero(g.s());
    for_each_kappa(g.s(), n_cap, &mut |k| {
        kidx.k.copy_from_slice(k);
        let p = gain_probability(g, &kidx).expect("dimensions checked, k nonzero");
        out.sum_units += p.units(g.m());
        out.count += 1;
        if !p.at_most_pow2(cap) {
            out.violations += 1;
        }
    })?;
    Ok(out)
}

fn check_scramble(g: &GeneratorSet, sc: &ScrambleSet, kidx: &KappaIndex) -> Result<()> {
    check_dims(g, kidx)?;
    if kidx.max_ceil() > sc.precision() {
        return Err(Error::InvalidPrecision {
            precision: sc.precision(),
            m: kidx.max_ceil(),
        });
    }
    Ok(())
}

fn gain_event(scrambled: &[BitMatrix], kidx: &KappaIndex) -> bool {
    let mut acc = 0u64;
    for (j, mat) in scrambled.iter().enumerate() {
        for l in kidx.kappa(j) {
            acc ^= mat.row_words(l - 1)[0];
        }
    }
    acc == 0
}

/// `(-1)^{Σ_j k_jᵀ D_j}`.
pub fn sign_of(kidx: &KappaIndex, sc: &ScrambleSet) -> Result<i8> {
    if kidx.max_ceil() > sc.precision() || kidx.s() != sc.s() {
        return Err(Error::InvalidParameter("frequency does not fit the scramble"));
    }
    let flips = sc
        .shifts()
        .iter()
        .enumerate()
        .map(|(j, d)| kidx.kappa(j).filter(|&l| d.get(l - 1)).count())
        .sum::<usize>();
    Ok(if flips % 2 == 0 { 1 } else { -1 })
}

/// `Σ_k 1{Σ_j k_jᵀ M_j C_j = 0} c_k (-1)^{Σ_j k_jᵀ D_j}`, the exact error
/// of the scrambled-net estimate of a Walsh polynomial.
pub fn error_decomposition(poly: &WalshPolynomial, g: &GeneratorSet, sc: &ScrambleSet) -> Result<f64> {
    if g.m() > 64 {
        return Err(Error::InvalidParameter("m too large"));
    }
    let scrambled = (0..g.s())
        .map(|j| sc.scrambled_generator(g, j))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for (k, c) in poly.terms() {
        check_scramble(g, sc, k)?;
        if gain_event(&scrambled, k) {
            total += c * f64::from(sign_of(k, sc)?);
        }
    }
    Ok(total)
}

/// Chi-square p-value for independence of `S(k1)` and `S(k2)` over
/// `trials` fresh uniform shifts.
pub fn sign_independence_test(
    k1: &KappaIndex,
    k2: &KappaIndex,
    trials: usize,
    stream: &mut RandomStream,
) -> Result<f64> {
    if k1.s() != k2.s() {
        return Err(Error::DimensionMismatch {
            expected: k1.s(),
            found: k2.s(),
        });
    }
    if k1 == k2 || k1.is_zero() || k2.is_zero() {
        return Err(Error::InvalidParameter("need distinct nonzero frequencies"));
    }
    let depth = k1.max_ceil().max(k2.max_ceil());
    let mut table = [[0u64; 2]; 2];
    for _ in 0..trials {
        let shifts: Vec<u64> = (0..k1.s())
            .map(|_| (0..depth).fold(0u64, |acc, l| acc | (u64::from(stream.next_bit()) << l)))
            .collect();
        let sign = |k: &KappaIndex| {
            k.k.iter()
                .zip(&shifts)
                .map(|(&a, &d)| (a & d).count_ones())
                .sum::<u32>() as usize
                & 1
        };
        table[sign(k1)][sign(k2)] += 1;
    }
    Ok(chi_square_2x2(&table))
}

/// Pearson chi-square p-value (one degree of freedom) for a 2x2 table.
pub fn chi_square_2x2(table: &[[u64; 2]; 2]) -> f64 {
    let n = table.iter().flatten().sum::<u64>() as f64;
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0) || cols.contains(&0) {
        return 0.0;
    }
    let mut stat = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let expected = rows[a] as f64 * cols[b] as f64 / n;
            let diff = table[a][b] as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    libm::erfc(libm::sqrt(stat / 2.0))
}

/// `Var(μ̂) = Σ_k Pr(gain) c_k²`.
pub fn variance_of(poly: &WalshPolynomial, g: &GeneratorSet) -> Result<f64> {
    restricted_variance(poly, g, &[])
}

/// The variance sum over `k ∉ excluded`.
pub fn restricted_variance(poly: &WalshPolynomial, g: &GeneratorSet, excluded: &[KappaIndex]) -> Result<f64> {
    let mut total = 0.0;
    for (k, c) in poly.terms() {
        if !excluded.contains(k) {
            total += gain_probability(g, k)?.to_f64() * c * c;
        }
    }
    Ok(total)
}

/// `Σ_{k ∈ K} Pr(gain)`, a union bound on the probability that any `k ∈ K`
/// is gained.
pub fn event_probability_bound(g: &GeneratorSet, frequencies: &[KappaIndex]) -> Result<f64> {
    frequencies
        .iter()
        .map(|k| gain_probability(g, k).map(GainProbability::to_f64))
        .sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k)
        .map(|i| libm::log((n - i) as f64) - libm::log((i + 1) as f64))
        .sum()
}

/// Whether `N` satisfies both concentration inequalities.
pub fn n_star_admits(m: usize, u_size: usize, t_u: usize, t_star_u: usize, delta: f64, n: usize) -> bool {
    let u = u_size as f64;
    let nf = n as f64;
    let lhs = (t_star_u + u_size) as f64 * core::f64::consts::LN_2
        + ln_binomial(m + u_size, u_size - 1)
        + libm::log(nf)
        + core::f64::consts::PI * libm::sqrt(u * nf / 3.0);
    let rhs = libm::log(delta) + m as f64 * core::f64::consts::LN_2;
    let second = libm::sqrt(3.0 * (u - 1.0) * nf) <= core::f64::consts::FRAC_PI_2 * (m as f64 - t_u as f64);
    lhs <= rhs && second
}

/// Largest `N` satisfying both inequalities, or 0. Both sides increase in
/// `N`, so the admissible set is an initial segment.
pub fn n_star(m: usize, u_size: usize, t_u: usize, t_star_u: usize, delta: f64) -> usize {
    assert!(u_size >= 1, "u must be nonempty");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    assert!(m > t_u, "need m > t_u");
    let mut n = 0;
    while n_star_admits(m, u_size, t_u, t_star_u, delta, n + 1) {
        n += 1;
    }
    n
}
