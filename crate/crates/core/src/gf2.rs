//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words, bit `c` of a row living in word
//! `c / 64` at position `c % 64`. Elimination works by XOR on whole words.
//! All operations take `&self` and work on scratch copies.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_core::RngCore;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A vector over GF(2). Addition is XOR.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from 0/1 entries; any nonzero entry is a one.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b != 0);
        }
        v
    }

    /// Unit vector `e_i` (zero-based).
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// The low `len` bits of `word`, bit `i` of the word becoming entry `i`.
    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word & tail_mask(len);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        if other.len != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        if other.len != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Indices of the one entries, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense `rows x cols` matrix over GF(2), stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Ones on the leading diagonal of a possibly rectangular matrix.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_rows_with_cols(rows, cols)
    }

    /// Like [`from_rows`](Self::from_rows) but with an explicit column count,
    /// which also covers the `0 x cols` case.
    pub fn from_rows_with_cols<R: AsRef<[u8]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::RaggedRows {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b != 0);
            }
        }
        Ok(m)
    }

    /// Stacks bit vectors of a common length as rows.
    pub fn from_row_vectors(rows: &[BitVector], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            if v.len() != cols {
                return Err(Error::RaggedRows {
                    row: r,
                    expected: cols,
                    found: v.len(),
                });
            }
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of range");
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "({r},{c}) out of range");
        let mask = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    /// Column `c` as a bit vector of length `rows`.
    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    /// The first `n` rows.
    pub fn top_rows(&self, n: usize) -> BitMatrix {
        assert!(n <= self.rows);
        Self {
            rows: n,
            cols: self.cols,
            stride: self.stride,
            data: self.data[..n * self.stride].to_vec(),
        }
    }

    /// Vertical concatenation of matrices sharing a column count.
    pub fn stack(parts: &[BitMatrix], cols: usize) -> Result<BitMatrix> {
        let mut out = Self::zeros(0, cols);
        for p in parts {
            if p.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: p.cols,
                });
            }
            out.data.extend_from_slice(&p.data);
            out.rows += p.rows;
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        let mut space = RowSpace::new(self.cols);
        (0..self.rows)
            .filter(|&r| space.insert_words(self.row_words(r)))
            .count()
    }

    /// Whether `v` is a GF(2) combination of the rows. The row space of a
    /// matrix with no rows is `{0}`.
    pub fn in_row_space(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut space = RowSpace::new(self.cols);
        for r in 0..self.rows {
            space.insert_words(self.row_words(r));
        }
        Ok(space.contains(v))
    }

    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let ones: u32 = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// `v^T A`, the XOR of the rows selected by `v`.
    pub fn vec_mat(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for r in v.iter_ones() {
            for (a, b) in out.words.iter_mut().zip(self.row_words(r)) {
                *a ^= b;
            }
        }
        Ok(out)
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (dst, src) = (r * out.stride, k * rhs.stride);
                    for w in 0..out.stride {
                        out.data[dst + w] ^= rhs.data[src + w];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Random lower unitriangular matrix: ones on the diagonal, zeros above
    /// it, and independent fair bits strictly below it and in every row past
    /// `cols`.
    pub fn random_lower_unitriangular<R: RngCore + ?Sized>(
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<BitMatrix> {
        if rows < cols {
            return Err(Error::NotTall { rows, cols });
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            let free = r.min(cols);
            let stride = m.stride;
            let row = &mut m.data[r * stride..(r + 1) * stride];
            for (w, word) in row.iter_mut().enumerate() {
                let lo = w * WORD;
                if lo >= free {
                    break;
                }
                let bits = (free - lo).min(WORD);
                let mask = if bits == WORD {
                    u64::MAX
                } else {
                    (1u64 << bits) - 1
                };
                *word = rng.next_u64() & mask;
            }
            if r < cols {
                m.set(r, r, true);
            }
        }
        Ok(m)
    }
}

impl fmt::Display for BitMatrix {
    /// One line of `0`/`1` characters per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) rendering. Blank lines are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (r, line) in s.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
            let row = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(Error::InvalidMatrixText { row: r, found: other }),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

/// Incrementally built row space in reduced form.
///
/// Every stored row has a distinct pivot (its lowest set column) and is zero
/// at the pivots of all rows inserted before it, so reducing a vector against
/// the rows in insertion order clears each pivot exactly once.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    basis: Vec<(usize, Vec<u64>)>,
}

impl RowSpace {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn reduce(&self, v: &mut [u64]) {
        for (pivot, row) in &self.basis {
            if (v[pivot / WORD] >> (pivot % WORD)) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
    }

    /// Adds a row given as packed words; returns whether it was independent.
    pub fn insert_words(&mut self, words: &[u64]) -> bool {
        let mut v = words.to_vec();
        self.reduce(&mut v);
        let pivot = v
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize);
        match pivot {
            Some(p) => {
                self.basis.push((p, v));
                true
            }
            None => false,
        }
    }

    pub fn insert(&mut self, v: &BitVector) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        self.insert_words(v.words())
    }

    pub fn contains_words(&self, words: &[u64]) -> bool {
        let mut v = words.to_vec();
        self.reduce(&mut v);
        v.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.contains_words(v.words())
    }
}

/// Renders a list of matrices separated by blank lines.
pub fn render_matrices(matrices: &[BitMatrix]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, m) in matrices.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "{m}");
    }
    out
}
