//! Random linear scrambling with a digital shift.
//!
//! Scrambled coordinate bits are `M_j C_j bits(i) + D_j`, where `M_j` is a
//! `precision x m` lower unitriangular matrix applied to the top `m x m`
//! block of `C_j` and `D_j` is a uniform shift. Rows of `C_j` past `m` never
//! enter a scrambled point.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::integrand::Integrand;
use crate::net::{column_fractions, emit_fractions, GeneratorSet, PointSet};
use crate::rng::RandomStream;

/// One draw of `(M_j, D_j)` for every coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScrambleSet {
    m: usize,
    precision: usize,
    matrices: Vec<BitMatrix>,
    shifts: Vec<BitVector>,
    seed: u64,
    replicate: u64,
}

impl ScrambleSet {
    /// Assembles a scramble from explicit parts, checking shapes and the
    /// unitriangular pattern of every `M_j`.
    pub fn from_parts(
        matrices: Vec<BitMatrix>,
        shifts: Vec<BitVector>,
        seed: u64,
        replicate: u64,
    ) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or(Error::InvalidParameter("scramble needs at least one coordinate"))?;
        let (precision, m) = (first.rows(), first.cols());
        if precision < m || precision > crate::net::MAX_PRECISION {
            return Err(Error::InvalidPrecision { precision, m });
        }
        if shifts.len() != matrices.len() {
            return Err(Error::DimensionMismatch {
                expected: matrices.len(),
                found: shifts.len(),
            });
        }
        for (mat, d) in matrices.iter().zip(&shifts) {
            if mat.rows() != precision || mat.cols() != m {
                return Err(Error::DimensionMismatch {
                    expected: precision,
                    found: mat.rows(),
                });
            }
            if d.len() != precision {
                return Err(Error::DimensionMismatch {
                    expected: precision,
                    found: d.len(),
                });
            }
            for r in 0..m {
                if !mat.get(r, r) || (r + 1..m).any(|c| mat.get(r, c)) {
                    return Err(Error::InvalidParameter(
                        "scramble matrix must be lower unitriangular on its top block",
                    ));
                }
            }
        }
        Ok(Self {
            m,
            precision,
            matrices,
            shifts,
            seed,
            replicate,
        })
    }

    /// `M_j` the identity extension and `D_j = 0`.
    pub fn identity(g: &GeneratorSet) -> Self {
        let (e, m) = (g.precision(), g.m());
        Self {
            m,
            precision: e,
            matrices: alloc::vec![BitMatrix::eye(e, m); g.s()],
            shifts: alloc::vec![BitVector::zeros(e); g.s()],
            seed: 0,
            replicate: 0,
        }
    }

    /// Same matrices with the shifts replaced.
    pub fn with_shifts(&self, shifts: Vec<BitVector>) -> Result<Self> {
        Self::from_parts(self.matrices.clone(), shifts, self.seed, self.replicate)
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

    pub fn shifts(&self) -> &[BitVector] {
        &self.shifts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    fn check_generators(&self, g: &GeneratorSet) -> Result<()> {
        if g.s() != self.s() {
            return Err(Error::DimensionMismatch {
                expected: g.s(),
                found: self.s(),
            });
        }
        if g.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: g.m(),
                found: self.m,
            });
        }
        Ok(())
    }

    /// `M_j C_j(1:m, :)`, a `precision x m` matrix.
    pub fn scrambled_generator(&self, g: &GeneratorSet, j: usize) -> Result<BitMatrix> {
        self.check_generators(g)?;
        self.matrices[j].mul(&g.matrix(j).top_rows(self.m))
    }
}

/// Draws `M_j` and `D_j` from the stream keyed by `(seed, replicate, j)`.
pub fn draw_scramble(g: &GeneratorSet, seed: u64, replicate: u64) -> ScrambleSet {
    let (e, m) = (g.precision(), g.m());
    let root = RandomStream::new(seed);
    let mut matrices = Vec::with_capacity(g.s());
    let mut shifts = Vec::with_capacity(g.s());
    for j in 0..g.s() {
        let mut stream = root.substream(&[replicate, j as u64]);
        matrices.push(
            BitMatrix::random_lower_unitriangular(e, m, &mut stream)
                .expect("generator sets have precision >= m"),
        );
        let mut d = BitVector::zeros(e);
        for l in 0..e {
            d.set(l, stream.next_bit());
        }
        shifts.push(d);
    }
    ScrambleSet {
        m,
        precision: e,
        matrices,
        shifts,
        seed,
        replicate,
    }
}

fn shift_fraction(d: &BitVector, rows: usize) -> u64 {
    (0..rows)
        .filter(|&l| d.get(l))
        .fold(0u64, |acc, l| acc | (1u64 << (63 - l)))
}

/// The `2^m` scrambled points in index order, keeping the first `e_out`
/// bits of every coordinate.
pub fn scrambled_points(g: &GeneratorSet, s: &ScrambleSet, e_out: usize) -> Result<PointSet> {
    if e_out > s.precision {
        return Err(Error::InvalidPrecision {
            precision: e_out,
            m: s.precision,
        });
    }
    s.check_generators(g)?;
    let mut columns = Vec::with_capacity(g.s());
    let mut shifts = Vec::with_capacity(g.s());
    for j in 0..g.s() {
        columns.push(column_fractions(&s.scrambled_generator(g, j)?, e_out));
        shifts.push(shift_fraction(&s.shifts[j], e_out));
    }
    let mut fractions = emit_fractions(&columns, g.m());
    for (k, f) in fractions.iter_mut().enumerate() {
        *f ^= shifts[k % shifts.len()];
    }
    Ok(PointSet::from_fractions(g.s(), fractions))
}

/// Compensated mean of `f` over a point set.
pub fn mean_over<F: Integrand + ?Sized>(f: &F, points: &PointSet) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in points.iter() {
        let v = f.eval(x);
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    (sum + carry) / points.len() as f64
}

/// `|mu_hat(e1) - mu_hat(e2)|` for one scramble.
pub fn truncation_gap<F: Integrand + ?Sized>(
    g: &GeneratorSet,
    s: &ScrambleSet,
    e1: usize,
    e2: usize,
    f: &F,
) -> Result<f64> {
    if e1 >= e2 {
        return Err(Error::InvalidParameter("truncation gap needs e1 < e2"));
    }
    let coarse = mean_over(f, &scrambled_points(g, s, e1)?);
    let fine = mean_over(f, &scrambled_points(g, s, e2)?);
    Ok(libm::fabs(coarse - fine))
}
