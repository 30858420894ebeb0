//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its runtime; the process exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rqmc::study::{convergence_study, StudyConfig};
use rqmc_core::estimator::{estimate_with, Method};
use rqmc_core::integrand::ExpSum;
use rqmc_core::net::{default_precision, is_tms_net, t_value};
use rqmc_core::partitions::{
    check_finite_bounds, check_restricted_bound, cor6_admissible, lambda_count_ratio, q_coefficients,
    qs_coefficients,
};
use rqmc_core::walsh::{error_decomposition, gain_probability, sign_independence_test, variance_of};
use rqmc_core::{
    draw_scramble, scrambled_points, BitVector, GeneratorSet, KappaIndex, RandomStream, WalshPolynomial,
};

type Outcome = Result<String, String>;

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn five_term() -> WalshPolynomial {
    let k = |a: u64, b: u64| KappaIndex::new(vec![a, b]);
    WalshPolynomial::new(
        2,
        0.75,
        vec![
            (k(1, 0), 0.5),
            (k(0, 3), -0.25),
            (k(5, 2), 0.125),
            (k(16, 0), 0.3),
            (k(17, 9), -0.2),
        ],
    )
    .unwrap()
}

fn gain_exactness() -> Outcome {
    let mut checked = 0usize;
    for s in 1..=2 {
        for m in 2..=3 {
            let rows = m + 1;
            let scrambles = common::all_scrambles(s, m, rows);
            for (label, g) in [
                ("identity", GeneratorSet::repeated_identity(s, m, 8)),
                ("sobol", GeneratorSet::sobol(s, m, 8)),
            ] {
                let g = g.map_err(|e| e.to_string())?;
                let limit = 1u64 << rows;
                for code in 1..limit.pow(s as u32) {
                    let k: Vec<u64> = (0..s).map(|j| code / limit.pow(j as u32) % limit).collect();
                    let p = gain_probability(&g, &KappaIndex::new(k.clone())).map_err(|e| e.to_string())?;
                    let (hits, total) = common::gain_frequency(&g, &k, &scrambles);
                    if !common::frequency_matches(hits, total, &p.to_string()) {
                        return Err(format!("{label} s={s} m={m} k={k:?}: {p} vs {hits}/{total}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} frequencies match exhaustive enumeration"))
}

fn decomposition_identity() -> Outcome {
    let poly = five_term();
    let g = GeneratorSet::sobol(2, 4, 53).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for rep in 0..100 {
        let sc = draw_scramble(&g, 2024, rep);
        let direct = estimate_with(&poly, &g, &sc, 53).map_err(|e| e.to_string())? - poly.constant();
        let predicted = error_decomposition(&poly, &g, &sc).map_err(|e| e.to_string())?;
        worst = worst.max((direct - predicted).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max deviation {worst:e}"))
    } else {
        Err(format!("max deviation {worst:e}"))
    }
}

fn variance_identity() -> Outcome {
    let poly = five_term();
    let g = GeneratorSet::sobol(2, 4, 53).map_err(|e| e.to_string())?;
    let n = 200_000u64;
    let squares: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|rep| {
            let sc = draw_scramble(&g, 77, rep);
            let e = estimate_with(&poly, &g, &sc, 53).unwrap() - poly.constant();
            e * e
        })
        .collect();
    let mean = squares.iter().sum::<f64>() / n as f64;
    let var = squares.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let exact = variance_of(&poly, &g).map_err(|e| e.to_string())?;
    let z = (mean - exact) / se;
    let msg = format!("empirical {mean:.6e}, exact {exact:.6e}, z = {z:.2}");
    if z.abs() <= 3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Histogram of `‖κ‖₁` over all `k ∈ ℕ₀^s` with norm at most `n_max`,
/// by direct enumeration of vectors.
fn brute_counts(s: usize, n_max: usize) -> Vec<u64> {
    let norm = |k: u64| (0..64).filter(|b| k >> b & 1 == 1).map(|b| b + 1).sum::<usize>();
    let singles: Vec<usize> = (0u64..1 << n_max).map(norm).filter(|&w| w <= n_max).collect();
    let mut hist = vec![0u64; n_max + 1];
    let mut stack = vec![(0usize, 0usize)];
    while let Some((depth, sum)) = stack.pop() {
        if depth == s {
            hist[sum] += 1;
            continue;
        }
        for &w in &singles {
            if sum + w <= n_max {
                stack.push((depth + 1, sum + w));
            }
        }
    }
    hist
}

fn partition_counts() -> Outcome {
    let q = q_coefficients(4).map_err(|e| e.to_string())?;
    let first: Vec<String> = q.counts()[1..].iter().map(|c| c.to_string()).collect();
    if first != ["1", "1", "2", "2"] {
        return Err(format!("Q[1..4] = {first:?}"));
    }
    for s in 1..=3 {
        let table = qs_coefficients(s, 16).map_err(|e| e.to_string())?;
        let brute = brute_counts(s, 16);
        for (n, &b) in brute.iter().enumerate() {
            if table.get(n).to_string() != b.to_string() {
                return Err(format!("Q^{s}[{n}] = {} but enumeration gives {b}", table.get(n)));
            }
        }
        check_finite_bounds(s, 300).map_err(|e| e.to_string())?;
    }
    let mut triples = Vec::new();
    'outer: for s in 1..=3 {
        for n in [5, 10, 20, 40, 80] {
            let r_min = (0..).find(|&r| r > 0 && cor6_admissible(s, r, n)).unwrap();
            for r in [r_min, 2 * r_min] {
                if triples.len() == 20 {
                    break 'outer;
                }
                triples.push((s, r, n));
            }
        }
    }
    for &(s, r, n) in &triples {
        check_restricted_bound(s, r, n).map_err(|e| format!("(s={s}, R={r}, N={n}): {e}"))?;
    }
    Ok(format!("brute force s<=3 N<=16, bounds to N=300, {} restricted triples", triples.len()))
}

fn convergence() -> Outcome {
    let cfg = StudyConfig {
        m_range: 4..=14,
        r: Some(15),
        seeds: (1..=20).collect(),
        methods: Method::ALL.to_vec(),
        precision: None,
    };
    let study = convergence_study(&ExpSum::new(1), &cfg).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = (4..=14)
        .map(|m| study.point(Method::Median, m).unwrap().median_error)
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let rate = study.point(Method::Median, 12).unwrap().rate.unwrap_or(f64::NAN);
    let median = study.errors(Method::Median, 12);
    let mean = study.errors(Method::Mean, 12);
    let wins = median.iter().zip(&mean).filter(|(a, b)| **a <= 0.5 * **b).count();
    let msg = format!(
        "(a) decreasing={decreasing} (b) rho(12)={rate:.3} (c) {wins}/20 seeds; errors {}",
        errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
    );
    if decreasing && rate >= 1.7 && wins >= 15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn net_preservation() -> Outcome {
    let mut checked = 0;
    for s in 1..=3 {
        for m in [4, 6] {
            let e = default_precision(m);
            let g = GeneratorSet::sobol(s, m, e).map_err(|e| e.to_string())?;
            let t = t_value(&g);
            for rep in 0..20 {
                let pts = scrambled_points(&g, &draw_scramble(&g, 31, rep), e).map_err(|e| e.to_string())?;
                if !is_tms_net(&pts, m, t) {
                    return Err(format!("s={s} m={m} replicate {rep} is not a ({t},{m},{s})-net"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} scrambled nets"))
}

fn exact_unbiasedness() -> Outcome {
    let k = |a: u64| KappaIndex::new(vec![a]);
    let poly = WalshPolynomial::new(1, 0.375, vec![(k(8), 0.5), (k(24), -0.25), (k(200), 0.125)])
        .map_err(|e| e.to_string())?;
    let g = GeneratorSet::sobol(1, 3, 8).map_err(|e| e.to_string())?;
    let base = draw_scramble(&g, 5, 0);
    let mut sum = 0.0;
    for d in 0u64..256 {
        let shifted = base
            .with_shifts(vec![BitVector::from_word(8, d)])
            .map_err(|e| e.to_string())?;
        sum += estimate_with(&poly, &g, &shifted, 8).map_err(|e| e.to_string())?;
    }
    let average = sum / 256.0;
    if average == poly.constant() {
        Ok(format!("average {average} over 256 shifts"))
    } else {
        Err(format!("average {average}, want {}", poly.constant()))
    }
}

fn sign_independence() -> Outcome {
    let mut stream = RandomStream::new(4242);
    let mut worst = 1.0f64;
    let mut pairs = 0;
    while pairs < 10 {
        let mut draw = || KappaIndex::new((0..2).map(|_| (stream.next_f64() * 1024.0) as u64).collect());
        let (k1, k2) = (draw(), draw());
        if k1 == k2 || k1.is_zero() || k2.is_zero() {
            continue;
        }
        let p = sign_independence_test(&k1, &k2, 10_000, &mut stream).map_err(|e| e.to_string())?;
        if p <= 0.001 {
            return Err(format!("{k1} vs {k2}: p = {p:.2e}"));
        }
        worst = worst.min(p);
        pairs += 1;
    }
    Ok(format!("10 pairs, smallest p = {worst:.3}"))
}

fn lambda_ratio() -> Outcome {
    let ratios = (16..=24)
        .map(|m| lambda_count_ratio(1, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let msg = format!("max/min = {:.3}", hi / lo);
    if hi / lo <= 2.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("gain-probability exactness", gain_exactness, 120),
        ("error-decomposition identity", decomposition_identity, 10),
        ("variance identity", variance_identity, 300),
        ("partition counts and bounds", partition_counts, 120),
        ("median-of-means convergence", convergence, 600),
        ("net preservation", net_preservation, 120),
        ("exact unbiasedness", exact_unbiasedness, 10),
        ("sign independence", sign_independence, 10),
        ("lambda growth ratio", lambda_ratio, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(*budget) => Err(format!("{msg}; over {budget}s budget")),
            other => other,
        };
        let (tag, msg) = match outcome {
            Ok(msg) => ("PASS", msg),
            Err(msg) => {
                failed += 1;
                ("FAIL", msg)
            }
        };
        println!("{tag} {}. {name} ({:.2}s): {msg}", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
