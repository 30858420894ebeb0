//! Generator matrices, net points and net quality parameters.
//!
//! Point `i` of a base-2 digital net has coordinate bits `C_j * bits(i)`,
//! where `bits(i)` lists the binary digits of `i` least significant first
//! and row `l` of `C_j` gives the coefficient of `2^-l`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, RowSpace};

/// Largest precision supported by the fixed-point point representation.
pub const MAX_PRECISION: usize = 64;

/// Largest `m` accepted by the point generators.
pub const MAX_M: usize = 30;

/// Default number of rows: `max(m, 53)`, capped at 64.
pub fn default_precision(m: usize) -> usize {
    m.clamp(53, MAX_PRECISION)
}

/// One line of a Sobol' direction-number table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionNumberRecord {
    pub dimension: usize,
    pub degree: usize,
    /// Interior coefficients of the primitive polynomial, highest first.
    pub poly: u64,
    /// Initial direction integers `m_1 .. m_degree`.
    pub initial: Vec<u64>,
}

impl DirectionNumberRecord {
    pub fn new(dimension: usize, degree: usize, poly: u64, initial: Vec<u64>) -> Result<Self> {
        let bad = |reason| Error::InvalidDirectionRecord { dimension, reason };
        if dimension < 2 {
            return Err(bad("dimension must be at least 2"));
        }
        if degree == 0 || degree >= 64 {
            return Err(bad("degree must be in 1..64"));
        }
        if initial.len() != degree {
            return Err(bad("number of direction integers differs from degree"));
        }
        if degree > 1 && poly >> (degree - 1) != 0 {
            return Err(bad("polynomial code has too many bits for degree"));
        }
        if degree == 1 && poly != 0 {
            return Err(bad("polynomial code must be 0 for degree 1"));
        }
        for (i, &mi) in initial.iter().enumerate() {
            if mi % 2 == 0 {
                return Err(bad("direction integer is even"));
            }
            if mi >> (i + 1) != 0 {
                return Err(bad("direction integer m_i must be below 2^i"));
            }
        }
        Ok(Self {
            dimension,
            degree,
            poly,
            initial,
        })
    }

    /// Direction integers `m_1 .. m_count` from the primitive-polynomial
    /// recurrence.
    pub fn direction_integers(&self, count: usize) -> Vec<u64> {
        let deg = self.degree;
        let mut out: Vec<u64> = self.initial.iter().copied().take(count).collect();
        for k in deg..count {
            let mut next = out[k - deg] ^ (out[k - deg] << deg);
            for i in 1..deg {
                if (self.poly >> (deg - 1 - i)) & 1 == 1 {
                    next ^= out[k - i] << i;
                }
            }
            out.push(next);
        }
        out
    }
}

// Dimensions 2..=10 of the widely used Joe–Kuo table (new-joe-kuo-6.21201).
const BUILTIN_RECORDS: &[(usize, usize, u64, &[u64])] = &[
    (2, 1, 0, &[1]),
    (3, 2, 1, &[1, 3]),
    (4, 3, 1, &[1, 3, 1]),
    (5, 3, 2, &[1, 1, 1]),
    (6, 4, 1, &[1, 1, 3, 3]),
    (7, 4, 4, &[1, 3, 5, 13]),
    (8, 5, 2, &[1, 1, 5, 5, 17]),
    (9, 5, 4, &[1, 1, 5, 5, 5]),
    (10, 5, 7, &[1, 1, 7, 11, 19]),
];

/// Highest dimension available without a direction-number file.
pub const BUILTIN_MAX_DIMENSION: usize = 10;

pub fn builtin_direction_numbers() -> Vec<DirectionNumberRecord> {
    BUILTIN_RECORDS
        .iter()
        .map(|&(d, deg, a, m)| {
            DirectionNumberRecord::new(d, deg, a, m.to_vec()).expect("built-in table is valid")
        })
        .collect()
}

/// Where a generator set came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSource {
    Builtin,
    DirectionFile {
        path: String,
        first_line: usize,
        last_line: usize,
    },
    Matrices(String),
}

impl fmt::Display for GeneratorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSource::Builtin => f.write_str("builtin"),
            GeneratorSource::DirectionFile {
                path,
                first_line,
                last_line,
            } => write!(f, "{path}:{first_line}-{last_line}"),
            GeneratorSource::Matrices(label) => write!(f, "matrices:{label}"),
        }
    }
}

/// Generator matrices `C_1 .. C_s`, each `precision x m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    m: usize,
    precision: usize,
    matrices: Vec<BitMatrix>,
    source: GeneratorSource,
}

impl GeneratorSet {
    /// Wraps arbitrary generator matrices after checking shapes and that
    /// each matrix is nonsingular on its first `m` rows.
    pub fn from_matrices(matrices: Vec<BitMatrix>, source: GeneratorSource) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or(Error::InvalidParameter("at least one generator matrix is required"))?;
        let (precision, m) = (first.rows(), first.cols());
        if m == 0 || m > MAX_M {
            return Err(Error::InvalidParameter("m must be in 1..=30"));
        }
        if precision < m || precision > MAX_PRECISION {
            return Err(Error::InvalidPrecision { precision, m });
        }
        for (j, c) in matrices.iter().enumerate() {
            if c.rows() != precision {
                return Err(Error::DimensionMismatch {
                    expected: precision,
                    found: c.rows(),
                });
            }
            if c.cols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: c.cols(),
                });
            }
            if c.top_rows(m).rank() != m {
                return Err(Error::SingularGenerator { dimension: j + 1, m });
            }
        }
        Ok(Self {
            m,
            precision,
            matrices,
            source,
        })
    }

    /// Sobol' generators from the built-in direction numbers.
    pub fn sobol(s: usize, m: usize, precision: usize) -> Result<Self> {
        build_generators(&builtin_direction_numbers(), s, m, precision, GeneratorSource::Builtin)
    }

    /// `s` copies of the `precision x m` identity extension. Handy as a
    /// worst-case fixture: for `s >= 2` its quality parameter is `m - 1`.
    pub fn repeated_identity(s: usize, m: usize, precision: usize) -> Result<Self> {
        Self::from_matrices(
            vec![BitMatrix::eye(precision, m); s],
            GeneratorSource::Matrices(String::from("repeated identity")),
        )
    }

    pub fn s(&self) -> usize {
        self.matrices.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.matrices[j]
    }

    pub fn source(&self) -> &GeneratorSource {
        &self.source
    }

    /// Row `row` (zero-based) of `C_j`, packed in a word over the `m` columns.
    pub fn row_word(&self, j: usize, row: usize) -> u64 {
        self.matrices[j].row_words(row)[0]
    }

    /// Whether `C^(q)`, the first `q_j` rows of each `C_j` stacked, has
    /// linearly independent rows.
    pub fn profile_full_rank(&self, profile: &[usize]) -> bool {
        debug_assert_eq!(profile.len(), self.s());
        if profile.iter().sum::<usize>() > self.m {
            return false;
        }
        let mut space = RowSpace::new(self.m);
        for (j, &q) in profile.iter().enumerate() {
            for row in 0..q {
                if !space.insert_words(&[self.row_word(j, row)]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds Sobol' generators for dimensions `1..=s`. Dimension 1 is the van
/// der Corput identity; dimension `d >= 2` uses the record for `d`.
pub fn build_generators(
    records: &[DirectionNumberRecord],
    s: usize,
    m: usize,
    precision: usize,
    source: GeneratorSource,
) -> Result<GeneratorSet> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1"));
    }
    if m == 0 || m > MAX_M {
        return Err(Error::InvalidParameter("m must be in 1..=30"));
    }
    if precision < m || precision > MAX_PRECISION {
        return Err(Error::InvalidPrecision { precision, m });
    }
    let mut matrices = vec![BitMatrix::eye(precision, m)];
    for d in 2..=s {
        let record = records
            .iter()
            .find(|r| r.dimension == d)
            .ok_or(Error::MissingDirectionNumbers {
                needed: d,
                available: records.iter().map(|r| r.dimension).max().unwrap_or(1),
            })?;
        let ints = record.direction_integers(m);
        let mut c = BitMatrix::zeros(precision, m);
        for (col, &mk) in ints.iter().enumerate() {
            // v_k = m_k / 2^k: bit l of the fraction is bit (k - l) of m_k.
            let k = col + 1;
            for l in 1..=k {
                if (mk >> (k - l)) & 1 == 1 {
                    c.set(l - 1, col, true);
                }
            }
        }
        matrices.push(c);
    }
    GeneratorSet::from_matrices(matrices, source)
}

/// Column `c` of a `rows x m` matrix as a 64-bit binary fraction, row `l`
/// (one-based) landing on the `2^-l` bit.
pub(crate) fn column_fractions(mat: &BitMatrix, rows: usize) -> Vec<u64> {
    (0..mat.cols())
        .map(|c| {
            (0..rows)
                .filter(|&r| mat.get(r, c))
                .fold(0u64, |acc, r| acc | (1u64 << (63 - r)))
        })
        .collect()
}

/// Converts a 64-bit binary fraction to `f64`, truncating towards zero so
/// the result stays in `[0, 1)`. Exact whenever the fraction has at most 53
/// significant bits.
pub fn fraction_to_f64(frac: u64) -> f64 {
    if frac == 0 {
        return 0.0;
    }
    let significant = 64 - frac.leading_zeros();
    let kept = if significant > 53 {
        frac & !((1u64 << (significant - 53)) - 1)
    } else {
        frac
    };
    kept as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

/// Exact 64-bit fraction of `x` in `[0, 1)`, truncating bits past `2^-64`.
pub fn f64_to_fraction(x: f64) -> u64 {
    debug_assert!((0.0..1.0).contains(&x), "coordinate {x} outside [0,1)");
    (x * 18_446_744_073_709_551_616.0) as u64
}

/// Points of an `s`-dimensional rule, stored both as exact fractions and as
/// floating-point coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    s: usize,
    fractions: Vec<u64>,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn from_fractions(s: usize, fractions: Vec<u64>) -> Self {
        assert!(s > 0 && fractions.len().is_multiple_of(s));
        let coords = fractions.iter().map(|&f| fraction_to_f64(f)).collect();
        Self {
            s,
            fractions,
            coords,
        }
    }

    pub fn from_coords(s: usize, coords: Vec<f64>) -> Self {
        assert!(s > 0 && coords.len().is_multiple_of(s));
        let fractions = coords.iter().map(|&x| f64_to_fraction(x)).collect();
        Self {
            s,
            fractions,
            coords,
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.s
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.s..(i + 1) * self.s]
    }

    pub fn fractions(&self, i: usize) -> &[u64] {
        &self.fractions[i * self.s..(i + 1) * self.s]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.s)
    }
}

/// Emits the `2^m` points of `sum_l 2^-l (C_j i)_l` in index order.
pub fn net_points(g: &GeneratorSet) -> PointSet {
    let columns: Vec<Vec<u64>> = g
        .matrices()
        .iter()
        .map(|c| column_fractions(c, g.precision()))
        .collect();
    PointSet::from_fractions(g.s(), emit_fractions(&columns, g.m()))
}

pub(crate) fn emit_fractions(columns: &[Vec<u64>], m: usize) -> Vec<u64> {
    let s = columns.len();
    let n = 1usize << m;
    let mut out = vec![0u64; n * s];
    for i in 1..n {
        // Point i = point (i with its lowest bit cleared) XOR that bit's column.
        let low = i.trailing_zeros() as usize;
        let prev = i & (i - 1);
        for j in 0..s {
            out[i * s + j] = out[prev * s + j] ^ columns[j][low];
        }
    }
    out
}

/// Calls `visit` with every vector of `parts` nonnegative integers, each at
/// least `min_part`, summing to `total`. Stops early when `visit` returns
/// `false`; the return value reports whether the walk completed.
pub fn for_each_composition(
    total: usize,
    parts: usize,
    min_part: usize,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    fn walk(
        buf: &mut Vec<usize>,
        remaining: usize,
        parts_left: usize,
        min_part: usize,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if parts_left == 1 {
            buf.push(remaining);
            let go = visit(buf);
            buf.pop();
            return go;
        }
        let reserve = min_part * (parts_left - 1);
        if remaining < reserve {
            return true;
        }
        for first in min_part..=remaining - reserve {
            buf.push(first);
            let go = walk(buf, remaining - first, parts_left - 1, min_part, visit);
            buf.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if parts == 0 {
        return if total == 0 { visit(&[]) } else { true };
    }
    if total < min_part * parts {
        return true;
    }
    let mut buf = Vec::with_capacity(parts);
    walk(&mut buf, total, parts, min_part, visit)
}

/// Whether every elementary interval of volume `2^(t-m)` holds exactly `2^t`
/// of the points. Enumerates all interval shapes and buckets the points.
pub fn is_tms_net(points: &PointSet, m: usize, t: usize) -> bool {
    if t > m || points.len() != 1usize << m {
        return false;
    }
    let s = points.s();
    let depth = m - t;
    let expected = 1u32 << t;
    let mut counts = vec![0u32; 1usize << depth];
    for_each_composition(depth, s, 0, &mut |shape| {
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..points.len() {
            let fr = points.fractions(i);
            let mut cell = 0usize;
            for (j, &k) in shape.iter().enumerate() {
                if k > 0 {
                    cell = (cell << k) | (fr[j] >> (64 - k)) as usize;
                }
            }
            counts[cell] += 1;
        }
        counts.iter().all(|&c| c == expected)
    })
}

/// Smallest `t` for which the generators give a `(t, m, s)`-net: every
/// stacked profile `C^(q)` with `sum q = m - t` must have independent rows.
pub fn t_value(g: &GeneratorSet) -> usize {
    let m = g.m();
    for depth in 1..=m {
        let all_full = for_each_composition(depth, g.s(), 0, &mut |q| g.profile_full_rank(q));
        if !all_full {
            return m + 1 - depth;
        }
    }
    0
}

/// A subset of the coordinates `1..=s`, stored as a bit mask (bit `j - 1`
/// for coordinate `j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// From one-based coordinate indices.
    pub fn from_coords(coords: &[usize]) -> Self {
        Subset(coords.iter().fold(0, |acc, &j| acc | (1 << (j - 1))))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Zero-based indices of the members, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |j| (self.0 >> j) & 1 == 1)
    }

    pub fn contains(self, other: Subset) -> bool {
        other.0 & !self.0 == 0
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, j) in self.indices().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        f.write_str("}")
    }
}

/// `t*_u = m + 1 - min { ||ceil(kappa)||_1 : s(k) = u, C^ceil(kappa) rank
/// deficient }`, and `0` for the empty set.
///
/// Profiles are searched by increasing total. A profile with total `m + 1`
/// has more rows than columns and is always deficient, so the search never
/// needs to go past it.
pub fn t_star(g: &GeneratorSet, u: Subset) -> usize {
    if u.is_empty() {
        return 0;
    }
    let members: Vec<usize> = u.indices().collect();
    assert!(
        members.last().is_some_and(|&j| j < g.s()),
        "subset {u} outside 1..={}",
        g.s()
    );
    let m = g.m();
    let mut profile = vec![0usize; g.s()];
    for depth in members.len()..=m {
        let all_full = for_each_composition(depth, members.len(), 1, &mut |v| {
            for (&j, &vj) in members.iter().zip(v) {
                profile[j] = vj;
            }
            g.profile_full_rank(&profile)
        });
        if !all_full {
            return m + 1 - depth;
        }
    }
    0
}

/// `t`, and `(t*_u, t_u)` for every nonempty `u`, where
/// `t_u = max over v ⊆ u of t*_v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetQualityReport {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    pub subsets: Vec<SubsetQuality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsetQuality {
    pub subset: Subset,
    pub t_star: usize,
    pub t_u: usize,
}

impl NetQualityReport {
    pub fn get(&self, u: Subset) -> Option<&SubsetQuality> {
        self.subsets.iter().find(|q| q.subset == u)
    }
}

/// Largest `s` for which [`quality_report`] enumerates all subsets.
pub const MAX_REPORT_DIMENSION: usize = 16;

pub fn quality_report(g: &GeneratorSet) -> Result<NetQualityReport> {
    let s = g.s();
    if s > MAX_REPORT_DIMENSION {
        return Err(Error::InvalidParameter("quality report supports s <= 16"));
    }
    let count = 1usize << s;
    let mut star = vec![0usize; count];
    let mut upper = vec![0usize; count];
    for (mask, slot) in star.iter_mut().enumerate().skip(1) {
        *slot = t_star(g, Subset(mask as u32));
    }
    // Masks increase, so every proper subset is final before `mask`.
    for mask in 1..count {
        upper[mask] = (0..s)
            .filter(|j| (mask >> j) & 1 == 1)
            .map(|j| upper[mask & !(1 << j)])
            .fold(star[mask], usize::max);
    }
    let mut subsets: Vec<SubsetQuality> = (1..count)
        .map(|mask| SubsetQuality {
            subset: Subset(mask as u32),
            t_star: star[mask],
            t_u: upper[mask],
        })
        .collect();
    subsets.sort_by_key(|q| (q.subset.len(), q.subset.indices().collect::<Vec<_>>()));
    Ok(NetQualityReport {
        m: g.m(),
        s,
        t: t_value(g),
        subsets,
    })
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Worst-case error cap `min(range, V_HK * 2^(t-m) * sum_{i<s} C(m-t, i))`.
/// An infinite variation yields the range.
pub fn delta_n(m: usize, t: usize, s: usize, range_f: f64, vhk_f: f64) -> f64 {
    assert!(m >= t, "delta_n needs m >= t");
    assert!(range_f >= 0.0, "range must be nonnegative");
    if vhk_f.is_infinite() {
        return range_f;
    }
    let depth = m - t;
    let binomials: f64 = (0..s).map(|i| binomial_f64(depth, i)).sum();
    let discrepancy = binomials * libm::ldexp(1.0, -(depth as i32));
    range_f.min(vhk_f * discrepancy)
}
