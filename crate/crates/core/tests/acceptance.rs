//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so each criterion reports even when another fails.

use std::time::Instant;

use commsim::algorithms::{canita_schedule, run_adiana, AlgorithmSpec, ParamSchedule, RunOptions};
use commsim::algorithms::preset;
use commsim::compressors::{
    min_bits_lower_bound, random_s_bits, CompressorKind, CompressorSpec, CompressorState, Randomness, Welford,
};
use commsim::harness::{compute_tcc, run_experiment, run_trials, tune_grid_on, ExperimentConfig, GridAxis, GridSpec, ProblemSpec, RunSection};
use commsim::lowerbound::{audit_sc_floor, simulate_progress};
use commsim::problems::{gen_constructed_quadratic, gen_least_squares, gen_zero_chain_sc, LeastSquaresSpec};
use commsim::{ProblemInstance, Trace};

type Outcome = Result<(bool, String), String>;

fn test_vector(d: usize) -> Vec<f64> {
    (0..d).map(|j| ((j * 7919 % 23) as f64 - 11.0) / 3.0 + 0.1 * (j as f64 + 1.0)).collect()
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let d = 20;
    let x = test_vector(d);
    let nx = norm_sq(&x);
    let mut specs: Vec<CompressorSpec> =
        [1, 2, 4].iter().map(|&s| CompressorSpec::random_s(s, Randomness::Independent)).collect();
    specs.push(CompressorSpec::new(CompressorKind::Natural, Randomness::Independent));
    specs.push(CompressorSpec::new(CompressorKind::Quantize { levels: None }, Randomness::Independent));
    let mut ok = true;
    let mut notes = Vec::new();
    for spec in specs {
        let comp = CompressorState::new(spec, d, 11).map_err(err)?;
        let m = comp.empirical_moments(&x, 10_000).map_err(err)?;
        let worst_z = (0..d)
            .map(|j| {
                let dev = (m.mean[j] - x[j]).abs();
                if m.mean_se[j] == 0.0 {
                    if dev == 0.0 { 0.0 } else { f64::INFINITY }
                } else {
                    dev / m.mean_se[j]
                }
            })
            .fold(0.0, f64::max);
        let ratio = m.variance / nx;
        let ratio_se = m.variance_se / nx;
        let omega = spec.omega(d);
        // Random-s attains its ω exactly, so its estimate is tested for equality instead.
        let variance_ok = match spec.kind {
            CompressorKind::RandomS { .. } => (ratio - omega).abs() <= 3.0 * ratio_se,
            _ => ratio <= omega,
        };
        let pass = worst_z <= 4.0 && variance_ok;
        ok &= pass;
        notes.push(format!("{spec}: max|z|={worst_z:.2} var/|x|^2={ratio:.4} (omega={omega:.4})"));
    }
    let exhaustive = exhaustive_random_s()?;
    ok &= exhaustive.0;
    notes.push(exhaustive.1);
    Ok((ok, notes.join("; ")))
}

/// For every `s <= d <= 8`: sampled outputs are exactly the scaled `s`-subsets, every subset occurs,
/// and averaging over all subsets gives mean `x` and variance `(d/s − 1)‖x‖²`.
fn exhaustive_random_s() -> Outcome {
    let mut cases = 0;
    for d in 1..=8usize {
        let x = test_vector(d);
        let nx = norm_sq(&x);
        for s in 1..=d {
            let comp = CompressorState::new(CompressorSpec::random_s(s, Randomness::Independent), d, 3).map_err(err)?;
            let scale = d as f64 / s as f64;
            let mut seen = std::collections::BTreeSet::new();
            for t in 0..4000 {
                let (c, _) = comp.compress(0, t, 0, &x).map_err(err)?;
                let mut mask = 0u32;
                for j in 0..d {
                    if c[j] != 0.0 {
                        if c[j] != scale * x[j] {
                            return Ok((false, format!("d={d} s={s}: entry {j} is {} not {}", c[j], scale * x[j])));
                        }
                        mask |= 1 << j;
                    }
                }
                if mask.count_ones() as usize != s {
                    return Ok((false, format!("d={d} s={s}: support size {}", mask.count_ones())));
                }
                seen.insert(mask);
            }
            let subsets: Vec<u32> = (0u32..1 << d).filter(|m| m.count_ones() as usize == s).collect();
            if seen.len() != subsets.len() {
                return Ok((false, format!("d={d} s={s}: saw {} of {} subsets", seen.len(), subsets.len())));
            }
            let mut mean = vec![0.0; d];
            let mut var = 0.0;
            for &m in &subsets {
                for j in 0..d {
                    let c = if m >> j & 1 == 1 { scale * x[j] } else { 0.0 };
                    mean[j] += c / subsets.len() as f64;
                    var += (c - x[j]).powi(2) / subsets.len() as f64;
                }
            }
            let omega = scale - 1.0;
            let mean_ok = mean.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            if !mean_ok || (var - omega * nx).abs() > 1e-10 * (1.0 + omega * nx) {
                return Ok((false, format!("d={d} s={s}: exact moments off (var={var}, expected {})", omega * nx)));
            }
            cases += 1;
        }
    }
    Ok((true, format!("exhaustive random-s equality on {cases} (d,s) pairs")))
}

fn criterion_2() -> Outcome {
    let (d, n) = (20, 20);
    let x = test_vector(d);
    let nx = norm_sq(&x);
    let ind = CompressorState::new(CompressorSpec::random_s(1, Randomness::Independent), d, 5).map_err(err)?;
    let shared = CompressorState::new(CompressorSpec::random_s(1, Randomness::Shared), d, 5).map_err(err)?;
    let omega = ind.omega();
    let (vi, _) = ind.aggregate_variance(n, &x, 10_000).map_err(err)?;
    let (vs, _) = shared.aggregate_variance(n, &x, 10_000).map_err(err)?;
    let bound = omega / n as f64 * nx * 1.05;
    let target = omega * nx;
    let ok = vi <= bound && (vs - target).abs() <= 0.05 * target;
    Ok((
        ok,
        format!("independent {vi:.3} <= {bound:.3}; shared {vs:.3} vs {target:.3} ({:+.2}%)", 100.0 * (vs / target - 1.0)),
    ))
}

fn tcc_bits(traces: &[Trace], eps: f64) -> Option<f64> {
    compute_tcc(traces, eps).bits
}

fn fmt_bits(b: Option<f64>) -> String {
    b.map_or("unreached".into(), |v| format!("{v:.0}"))
}

fn run_preset(problem: &ProblemInstance, name: &str, opts: &RunOptions, trials: usize, seed: u64) -> Result<Vec<Trace>, String> {
    let p = preset(name).ok_or_else(|| format!("missing preset {name}"))?;
    run_trials(problem, &p.algorithm, &p.compressor, opts, trials, seed).map_err(err)
}

fn criterion_3() -> Outcome {
    let eps = 1e-6;
    let trials = 20;
    let seed = 2024;
    let problem = gen_constructed_quadratic(1.0, 1e4, 20, 400).map_err(err)?;

    let fixture = preset("cq-nesterov").unwrap();
    let fixture_traces = run_trials(&problem, &fixture.algorithm, &fixture.compressor, &RunOptions::new(2000), 1, seed).map_err(err)?;
    let fixture_diverged = fixture_traces[0].diverged;

    // The shipped Nesterov parameters diverge on this instance, so the comparison uses the
    // grid-tuned Nesterov (selected on a truncated horizon, as for every other method).
    let mut cfg = ExperimentConfig {
        problem: ProblemSpec::Constructed { mu: 1.0, l: 1e4, d: 20, n: 400 },
        algorithm: AlgorithmSpec::Nesterov { eta: 1e-4, theta: 1e-2 },
        compressor: CompressorSpec::identity(),
        run: RunSection::new(2000, 1, seed),
    };
    cfg.run.eps = vec![eps];
    let grid = GridSpec::default()
        .axis("eta", GridAxis::Log { min: 2e-5, max: 2e-4, points: 7 })
        .axis("theta", GridAxis::Values(vec![0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.5, 1.0]));
    let tuned = tune_grid_on(&problem, &cfg, &grid, Some(0.2)).map_err(err)?;
    let nesterov = run_trials(&problem, &tuned.best.algorithm, &CompressorSpec::identity(), &RunOptions::new(4000), trials, seed).map_err(err)?;
    let b_nest = tcc_bits(&nesterov, eps);

    let id = run_preset(&problem, "cq-adiana-id-rand1", &RunOptions::new(4000), trials, seed)?;
    let b_id = tcc_bits(&id, eps);

    // The shared-mode run only needs to be followed up to Nesterov's bit count.
    let budget = b_nest.unwrap_or(f64::INFINITY);
    let mut sd_opts = RunOptions::new(20_000);
    if budget.is_finite() {
        sd_opts = sd_opts.with_max_bits(budget);
    }
    let sd = run_preset(&problem, "cq-adiana-sd-rand1", &sd_opts, trials, seed)?;
    let b_sd = tcc_bits(&sd, eps);

    let id_wins = matches!((b_id, b_nest), (Some(a), Some(b)) if a < b);
    let sd_loses = match (b_sd, b_nest) {
        (None, Some(_)) => true,
        (Some(a), Some(b)) => a > b,
        _ => false,
    };
    let (eta, theta) = match tuned.best.algorithm {
        AlgorithmSpec::Nesterov { eta, theta } => (eta, theta),
        _ => (f64::NAN, f64::NAN),
    };
    let sd_text = match b_sd {
        Some(v) => format!("{v:.0}"),
        None => format!("> {budget:.0} (not reached within Nesterov's budget)"),
    };
    Ok((
        id_wins && sd_loses,
        format!(
            "bits to 1e-6: adiana id-rand1 {} < nesterov {} (tuned eta={eta:.3e}, theta={theta}; fixture diverged={fixture_diverged}) < adiana sd-rand1 {sd_text}",
            fmt_bits(b_id),
            fmt_bits(b_nest)
        ),
    ))
}

fn criterion_4() -> Outcome {
    let eps = [1e-2, 1e-4, 1e-6];
    let trials = 20;
    let seed = 7;
    let problem = gen_least_squares(&LeastSquaresSpec::new(400, 25, 20, 0)).map_err(err)?;
    let ad = run_preset(&problem, "ls-adiana-rs", &RunOptions::new(8000), trials, seed)?;
    let b_ad: Vec<Option<f64>> = eps.iter().map(|&e| tcc_bits(&ad, e)).collect();
    let Some(budget) = b_ad.iter().flatten().cloned().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))) else {
        return Ok((false, "ADIANA reached no target".into()));
    };
    // Baselines are followed up to ADIANA's largest TCC: below that budget an unreached target
    // means the baseline needs more bits.
    let opts = RunOptions::new(200_000).with_max_bits(budget);
    let mut ok = b_ad.iter().all(Option::is_some);
    let mut notes = Vec::new();
    for name in ["ls-diana-rs", "ls-ef21-rs"] {
        let traces = run_preset(&problem, name, &opts, trials, seed)?;
        for (k, &e) in eps.iter().enumerate() {
            let b = tcc_bits(&traces, e);
            let win = match (b_ad[k], b) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                _ => false,
            };
            ok &= win;
            notes.push(format!(
                "eps={e:e}: adiana {} vs {} {}{}",
                fmt_bits(b_ad[k]),
                name.trim_start_matches("ls-").trim_end_matches("-rs"),
                b.map_or(format!("> {budget:.0}"), |v| format!("{v:.0}")),
                if win { "" } else { " (LOSS)" }
            ));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn criterion_5() -> Outcome {
    let (n, d) = (400, 20);
    let problem = gen_constructed_quadratic(1.0, 1e4, d, n).map_err(err)?;
    let spec = CompressorSpec::random_s(1, Randomness::Independent);
    let omega = spec.omega(d);
    let schedule = ParamSchedule::strongly_convex(1e4, 1.0, n, omega).map_err(err)?;
    let opts = RunOptions::new(500).with_lyapunov().with_checkpoint_every(1);
    let mut across = Welford::default();
    for seed in 0..50u64 {
        let comp = CompressorState::new(spec, d, seed).map_err(err)?;
        let trace = run_adiana(&problem, &comp, &schedule, &opts).map_err(err)?;
        let psi: Vec<f64> = trace.records().iter().filter_map(|r| r.lyapunov).collect();
        if psi.len() != 501 {
            return Ok((false, format!("seed {seed}: {} Lyapunov values recorded", psi.len())));
        }
        let mean_ratio = psi.windows(2).map(|w| w[1] / w[0]).sum::<f64>() / 500.0;
        across.push(mean_ratio);
    }
    let kappa: f64 = 1e4;
    let rate = 1.0 - 1.0 / (250.0 * (omega + (1.0 + omega / (n as f64).sqrt()) * kappa.sqrt()));
    let limit = rate + 3.0 * across.standard_error();
    Ok((
        across.mean() <= limit,
        format!("mean ratio {:.8} <= {limit:.8} (rate {rate:.8}, se {:.2e})", across.mean(), across.standard_error()),
    ))
}

fn criterion_6() -> Outcome {
    let (n, d, mu) = (8, 200, 1.0);
    let hard = gen_zero_chain_sc(1e4 * mu, mu, n, d, 1.0).map_err(err)?;
    let comp = CompressorState::new(CompressorSpec::random_s(2, Randomness::Independent), d, 99).map_err(err)?;
    let schedule = ParamSchedule::strongly_convex(hard.problem.smoothness, mu, n, comp.omega()).map_err(err)?;
    let checks = audit_sc_floor(&hard, &comp, &schedule, 5000, 1).map_err(err)?;
    let failures = checks.iter().filter(|c| !c.holds(1e-6)).count();
    let last = checks.last().ok_or("no checkpoints")?;
    Ok((
        failures == 0,
        format!(
            "{} checkpoints, {failures} violations; final prog={} subopt={:.3e} floor={:.3e}",
            checks.len(),
            last.prog,
            last.subopt,
            last.floor
        ),
    ))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for omega in [9.0, 19.0] {
        let rounds = 100 * (1 + omega as usize);
        let stats = simulate_progress(omega, 8, rounds, 1000, 31).map_err(err)?;
        let expected = rounds as f64 / (1.0 + omega);
        let frac_ok = stats.frac_below_bound >= 1.0 - (-1.0f64).exp();
        let mean_ok = (stats.mean_final - expected).abs() <= 0.1 * expected;
        ok &= frac_ok && mean_ok;
        notes.push(format!(
            "omega={omega}: frac below bound {:.3}, mean B^T {:.2} vs {expected}",
            stats.frac_below_bound, stats.mean_final
        ));
    }
    Ok((ok, notes.join("; ")))
}

/// `⌈log₂ m⌉` for `m >= 1`.
fn ceil_log2_u128(m: u128) -> u64 {
    if m <= 1 { 0 } else { 128 - u64::from((m - 1).leading_zeros()) }
}

fn binomial_u128(d: usize, s: usize) -> u128 {
    let mut acc: u128 = 1;
    for k in 0..s.min(d - s) {
        acc = acc * (d - k) as u128 / (k + 1) as u128;
    }
    acc
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for d in 1..=64usize {
        let x = test_vector(d);
        for s in 1..=d {
            let expected = 64 * s as u64 + ceil_log2_u128(binomial_u128(d, s));
            if random_s_bits(d, s, 64) != expected {
                return Ok((false, format!("random-s d={d} s={s}: {} != {expected}", random_s_bits(d, s, 64))));
            }
            checked += 1;
        }
        let mut specs: Vec<CompressorSpec> = (1..=d)
            .flat_map(|s| {
                [
                    CompressorSpec::random_s(s, Randomness::Independent),
                    CompressorSpec::new(CompressorKind::UnscaledRandomS { s }, Randomness::Independent),
                ]
            })
            .collect();
        specs.push(CompressorSpec::identity());
        specs.push(CompressorSpec::new(CompressorKind::Natural, Randomness::Independent));
        specs.push(CompressorSpec::new(CompressorKind::Quantize { levels: None }, Randomness::Independent));
        for spec in specs {
            let comp = CompressorState::new(spec, d, 1).map_err(err)?;
            let lb = min_bits_lower_bound(d, spec.omega(d), 64);
            for t in 0..20 {
                let (_, bits) = comp.compress(0, t, 0, &x).map_err(err)?;
                if (bits as f64) < lb {
                    return Ok((false, format!("{spec} on d={d}: {bits} bits < bound {lb:.3}")));
                }
            }
        }
    }
    Ok((true, format!("{checked} random-s (d,s) pairs exact; every compressor above the bound for d <= 64")))
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 { a.abs() } else { ((a - b) / b).abs() }
}

fn criterion_9() -> Outcome {
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    let mut check = |a: f64, b: f64| worst = worst.max(rel(a, b));

    // Reference point L=1e4, μ=1, n=400, ω=19.
    let p = ParamSchedule::strongly_convex(1e4, 1.0, 400, 19.0).map_err(err)?.at(0);
    let theta2 = 1.0 / (60.0 + 1200.0 / 19.0);
    let eta = 400.0 * theta2 / (120.0 * 19.0 * 1e4);
    check(p.theta1, 1.0 / 300.0);
    check(p.theta2, theta2);
    check(p.eta, eta);
    check(p.alpha, 0.05);
    check(p.p, 0.05);
    check(p.beta, (2.0 / 300.0) / (2.0 / 300.0 + eta));
    check(p.gamma, eta / (2.0 / 300.0 + eta));
    // n = ω² balances the two denominator terms.
    let q = ParamSchedule::strongly_convex(1e4, 1.0, 361, 19.0).map_err(err)?.at(0);
    check(q.theta2, 1.0 / (6.0 * 19.0));
    let zero_rejected = ParamSchedule::strongly_convex(1e4, 1.0, 400, 0.0).is_err();

    // CANITA reference values (b = √19 at n=400, ω=19).
    let c = canita_schedule(400, 19.0, 1e4, 0);
    let b = 19f64.sqrt();
    let sum = 1.0 + b + 19.0;
    check(c.b, b);
    check(c.beta0, 9.0 * sum * sum / (2.0 * (1.0 + b)));
    check(c.beta, 48.0 * 19.0 * 20.0 * (1.0 + b + 40.0) / (400.0 * (1.0 + b).powi(2)));
    check(c.beta0, 498.255_674_900_478_8);
    check(c.beta, 72.023_829_959_326_56);
    check(c.p, 1.0 / (1.0 + b));
    check(c.theta, 3.0 * (1.0 + b) / (9.0 * sum));
    check(c.eta, 2.000_977_778_189_592e-7);
    check(canita_schedule(400, 19.0, 1e4, 10).eta, 2.091_836_287_747_508_4e-7);
    // ω = 0 limit.
    let z = canita_schedule(10, 0.0, 1e4, 0);
    check(z.beta0, 4.5);
    check(z.p, 1.0);
    check(z.theta, 1.0 / 3.0);
    check(canita_schedule(10, 0.0, 1e4, 5).theta, 3.0 / 14.0);
    check(canita_schedule(10, 0.0, 1e4, 20_000).eta, 1.0 / 1.5e4);
    let exact_zero = z.b == 0.0 && z.beta == 0.0;

    Ok((
        worst <= tol && zero_rejected && exact_zero,
        format!("max relative error {worst:.2e}; SC schedule rejects omega=0: {zero_rejected}"),
    ))
}

fn criterion_10() -> Outcome {
    let mut cfg = ExperimentConfig::parse(
        r#"
        [algorithm]
        preset = "cq-adiana-id-rand1"
        [run]
        rounds = 400
        trials = 4
        seed = 123
        "#,
    )
    .map_err(err)?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let mut buf = Vec::new();
        run_experiment(&cfg).map_err(err)?.write_raw(&mut buf).map_err(err)?;
        outputs.push(buf);
    }
    cfg.problem = ProblemSpec::LeastSquares { n: 400, m: 25, d: 20, cond: 100.0, seed: 0, gaussian_rhs: false };
    cfg.algorithm = preset("ls-ef21-rs").unwrap().algorithm;
    cfg.compressor = preset("ls-ef21-rs").unwrap().compressor;
    for _ in 0..2 {
        let mut buf = Vec::new();
        run_experiment(&cfg).map_err(err)?.write_raw(&mut buf).map_err(err)?;
        outputs.push(buf);
    }
    let same = outputs[0] == outputs[1] && outputs[2] == outputs[3] && !outputs[0].is_empty();
    Ok((same, format!("raw CSV sizes {} and {} bytes, reruns identical: {same}", outputs[0].len(), outputs[2].len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("compressor unbiasedness and variance", criterion_1),
        ("independence cancellation", criterion_2),
        ("constructed quadratic bit ordering", criterion_3),
        ("least squares bit ordering", criterion_4),
        ("Lyapunov decay", criterion_5),
        ("lower-bound floor", criterion_6),
        ("progress simulation", criterion_7),
        ("bit-cost formulas", criterion_8),
        ("schedule arithmetic", criterion_9),
        ("determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} [{}] {name} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
