//! Replicated estimates and their median or mean.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::net::GeneratorSet;
use crate::scramble::{draw_scramble, mean_over, scrambled_points, ScrambleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Median,
    Mean,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Median, Method::Mean];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Median => "median",
            Method::Mean => "mean",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Method::Median),
            "mean" => Ok(Method::Mean),
            _ => Err(Error::InvalidParameter("method must be median or mean")),
        }
    }
}

fn check_dim<F: Integrand + ?Sized>(f: &F, g: &GeneratorSet) -> Result<()> {
    if f.dim() != g.s() {
        return Err(Error::DimensionMismatch {
            expected: g.s(),
            found: f.dim(),
        });
    }
    Ok(())
}

/// Mean of `f` over the points of one given scramble.
pub fn estimate_with<F: Integrand + ?Sized>(f: &F, g: &GeneratorSet, sc: &ScrambleSet, e_out: usize) -> Result<f64> {
    check_dim(f, g)?;
    Ok(mean_over(f, &scrambled_points(g, sc, e_out)?))
}

/// Mean of `f` over the net scrambled by replicate `replicate` of `seed`.
pub fn estimate_once<F: Integrand + ?Sized>(
    f: &F,
    g: &GeneratorSet,
    seed: u64,
    replicate: u64,
    e_out: usize,
) -> Result<f64> {
    estimate_with(f, g, &draw_scramble(g, seed, replicate), e_out)
}

/// `2r - 1` independent estimates from one master seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateBatch {
    pub r: usize,
    pub seed: u64,
    pub m: usize,
    pub s: usize,
    pub precision: usize,
    estimates: Vec<f64>,
}

impl ReplicateBatch {
    /// Wraps estimates computed elsewhere, in replicate order.
    pub fn from_estimates(g: &GeneratorSet, seed: u64, precision: usize, estimates: Vec<f64>) -> Result<Self> {
        if estimates.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("a batch holds an odd number of estimates"));
        }
        Ok(Self {
            r: estimates.len().div_ceil(2),
            seed,
            m: g.m(),
            s: g.s(),
            precision,
            estimates,
        })
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }
}

/// Replicates `0..2r-1` of `seed`.
pub fn run_batch<F: Integrand + ?Sized>(
    f: &F,
    g: &GeneratorSet,
    r: usize,
    seed: u64,
    e_out: usize,
) -> Result<ReplicateBatch> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1"));
    }
    let estimates = (0..2 * r as u64 - 1)
        .map(|rep| estimate_once(f, g, seed, rep, e_out))
        .collect::<Result<Vec<_>>>()?;
    ReplicateBatch::from_estimates(g, seed, e_out, estimates)
}

/// Middle order statistic of an odd-length sample.
pub fn median_of(values: &[f64]) -> f64 {
    assert!(values.len() % 2 == 1, "median needs an odd sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[values.len() / 2]
}

pub fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn aggregate(batch: &ReplicateBatch, method: Method) -> f64 {
    match method {
        Method::Median => median_of(&batch.estimates),
        Method::Mean => mean_of(&batch.estimates),
    }
}

/// `⌈m²/4⌉`, at most 50.
pub fn default_r(m: usize) -> usize {
    (m * m).div_ceil(4).clamp(1, 50)
}

/// Both terms of `Pr(Aᶜ)Var(μ̂|Aᶜ)/δ + (8δ)^r Δ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MseBound {
    pub variance_term: f64,
    pub tail_term: f64,
}

impl MseBound {
    pub fn total(&self) -> f64 {
        self.variance_term + self.tail_term
    }
}

/// `var_conditional` bounds `Pr(Aᶜ)Var(μ̂|Aᶜ)` for an event `A` of
/// probability at most `delta`; `delta_n` bounds `|μ̂ - μ|`.
pub fn mse_bound_report(r: usize, delta: f64, var_conditional: f64, delta_n: f64) -> Result<MseBound> {
    if !(delta > 0.0 && delta < 0.125) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1/8)"));
    }
    if r == 0 || var_conditional < 0.0 || delta_n < 0.0 {
        return Err(Error::InvalidParameter("need r >= 1 and nonnegative inputs"));
    }
    Ok(MseBound {
        variance_term: var_conditional / delta,
        tail_term: libm::pow(8.0 * delta, r as f64) * delta_n * delta_n,
    })
}
