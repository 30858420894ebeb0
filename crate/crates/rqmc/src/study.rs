//! Error-versus-`m` experiments over many master seeds.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use rqmc_core::estimator::{aggregate, default_r, estimate_once, median_of, Method, ReplicateBatch};
use rqmc_core::net::default_precision;
use rqmc_core::{GeneratorSet, Integrand};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub m_range: RangeInclusive<usize>,
    /// Fixed `r`, or `default_r(m)` per `m` when `None`.
    pub r: Option<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Generator precision, or `default_precision(m)` when `None`.
    pub precision: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub integrand: String,
    pub s: usize,
    pub m: usize,
    pub n: u64,
    pub method: Method,
    pub r: usize,
    pub seed: u64,
    pub estimate: f64,
    pub abs_error: f64,
}

/// Median over seeds of the absolute error at one `(method, m)`, and the
/// lag-2 local rate `-(log2 err(m) - log2 err(m-2)) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub method: Method,
    pub m: usize,
    pub median_error: f64,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    pub rows: Vec<StudyRow>,
    pub summary: Vec<RatePoint>,
}

impl Study {
    pub fn point(&self, method: Method, m: usize) -> Option<&RatePoint> {
        self.summary.iter().find(|p| p.method == method && p.m == m)
    }

    pub fn errors(&self, method: Method, m: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.m == m)
            .map(|r| r.abs_error)
            .collect()
    }
}

/// Median of any sample; the two middle values are averaged when even.
pub fn sample_median(values: &[f64]) -> f64 {
    if values.len() % 2 == 1 {
        return median_of(values);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    0.5 * (v[h - 1] + v[h])
}

/// One batch of `2r - 1` estimates, replicates evaluated in parallel.
pub fn parallel_batch<F: Integrand + ?Sized>(
    f: &F,
    g: &GeneratorSet,
    r: usize,
    seed: u64,
    e_out: usize,
) -> CliResult<ReplicateBatch> {
    let estimates = (0..2 * r as u64 - 1)
        .into_par_iter()
        .map(|rep| estimate_once(f, g, seed, rep, e_out))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReplicateBatch::from_estimates(g, seed, e_out, estimates)?)
}

/// Runs every `(m, seed)` batch on Sobol' generators and aggregates each by
/// every requested method. Output order is fixed regardless of scheduling.
pub fn convergence_study<F: Integrand + ?Sized>(f: &F, cfg: &StudyConfig) -> CliResult<Study> {
    let mu = f
        .exact_mean()
        .ok_or_else(|| CliError::Input(format!("integrand {} has no known mean", f.name())))?;
    if cfg.seeds.is_empty() || cfg.methods.is_empty() {
        return Err(CliError::Input("need at least one seed and one method".into()));
    }
    if cfg.r == Some(0) {
        return Err(CliError::Input("r must be at least 1".into()));
    }
    let s = f.dim();
    let jobs: Vec<(usize, u64)> = cfg
        .m_range
        .clone()
        .flat_map(|m| cfg.seeds.iter().map(move |&seed| (m, seed)))
        .collect();
    let batches = jobs
        .par_iter()
        .map(|&(m, seed)| {
            let precision = cfg.precision.unwrap_or_else(|| default_precision(m));
            let g = GeneratorSet::sobol(s, m, precision)?;
            let r = cfg.r.unwrap_or_else(|| default_r(m));
            let batch = parallel_batch(f, &g, r, seed, precision)?;
            Ok((m, seed, batch))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut rows = Vec::new();
    for m in cfg.m_range.clone() {
        for &method in &cfg.methods {
            for (bm, seed, batch) in &batches {
                if *bm != m {
                    continue;
                }
                let estimate = aggregate(batch, method);
                rows.push(StudyRow {
                    integrand: f.name().to_string(),
                    s,
                    m,
                    n: 1u64 << m,
                    method,
                    r: batch.r,
                    seed: *seed,
                    estimate,
                    abs_error: (estimate - mu).abs(),
                });
            }
        }
    }
    let mut summary = Vec::new();
    for &method in &cfg.methods {
        for m in cfg.m_range.clone() {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method && r.m == m)
                .map(|r| r.abs_error)
                .collect();
            summary.push(RatePoint {
                method,
                m,
                median_error: sample_median(&errs),
                rate: None,
            });
        }
    }
    let lookup: Vec<(Method, usize, f64)> = summary.iter().map(|p| (p.method, p.m, p.median_error)).collect();
    for p in &mut summary {
        if p.m < 2 {
            continue;
        }
        let earlier = lookup
            .iter()
            .find(|(method, m, _)| *method == p.method && *m == p.m - 2);
        if let Some(&(_, _, prev)) = earlier {
            if prev > 0.0 && p.median_error > 0.0 {
                p.rate = Some(-(p.median_error.log2() - prev.log2()) / 2.0);
            }
        }
    }
    Ok(Study { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rqmc_core::integrand::{Constant, ExpSum};

    fn cfg(m_range: RangeInclusive<usize>, seeds: Vec<u64>) -> StudyConfig {
        StudyConfig {
            m_range,
            r: Some(3),
            seeds,
            methods: Method::ALL.to_vec(),
            precision: None,
        }
    }

    #[test]
    fn constant_has_zero_error() {
        let study = convergence_study(&Constant::new(2, 3.0), &cfg(2..=5, vec![1, 2])).unwrap();
        assert_eq!(study.rows.len(), 4 * 2 * 2);
        assert!(study.rows.iter().all(|r| r.abs_error == 0.0));
        assert!(study.summary.iter().all(|p| p.rate.is_none()));
    }

    #[test]
    fn rates_use_lag_two() {
        let study = convergence_study(&ExpSum::new(1), &cfg(3..=7, vec![1, 2, 3])).unwrap();
        let p = study.point(Method::Median, 7).unwrap();
        let prev = study.point(Method::Median, 5).unwrap().median_error;
        assert_eq!(p.rate, Some(-(p.median_error.log2() - prev.log2()) / 2.0));
        assert_eq!(study.point(Method::Mean, 4).unwrap().rate, None);
    }

    #[test]
    fn deterministic() {
        let a = convergence_study(&ExpSum::new(2), &cfg(3..=5, vec![4, 5])).unwrap();
        let b = convergence_study(&ExpSum::new(2), &cfg(3..=5, vec![4, 5])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_batch_matches_sequential() {
        let g = GeneratorSet::sobol(2, 6, 53).unwrap();
        let f = ExpSum::new(2);
        let par = parallel_batch(&f, &g, 4, 9, 53).unwrap();
        let seq = rqmc_core::run_batch(&f, &g, 4, 9, 53).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn median_even_sample() {
        assert_eq!(sample_median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(sample_median(&[4.0, 1.0, 3.0]), 3.0);
    }
}
