//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hyperdiff::covariance::{
    angular_mse_spectral, covariance_legendre, covariance_spectral, holder_bound, memory_classify,
    CovarianceQuery, MemoryClass,
};
use hyperdiff::entropy1d::{
    entropy_at, entropy_trace, experiment_decomposition, front_position, Experiment, ExperimentOptions,
    ModeDecomposition,
};
use hyperdiff::field_sim::{empirical_spectrum, simulate_ensemble, truncation_error_exact, truncation_error_mc};
use hyperdiff::kernel::{h1, h2, transfer, wave_envelope, KernelQuery};
use hyperdiff::measure::{Atom, DiffusionParams, ModelConfig, Segment, SpectralMeasure};
use hyperdiff::spectrum::{
    gap_decay_factor, holder_sum, lommel_weight, spectrum_range, tail_sum_direct, tail_sum_lommel,
    tail_sum_lommel_at, TailOptions,
};
use hyperdiff::special_fn::bessel_half_seq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn params(c: f64, d: f64) -> DiffusionParams {
    DiffusionParams::new(c, d).unwrap()
}

fn atoms(pairs: &[(f64, f64)]) -> SpectralMeasure {
    SpectralMeasure::from_pairs(pairs).unwrap()
}

fn config(name: &str) -> ModelConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ModelConfig::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn within_time(elapsed: Duration, limit: f64, detail: String) -> Outcome {
    if elapsed.as_secs_f64() <= limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; too slow ({:.2} s > {limit} s)", elapsed.as_secs_f64()))
    }
}

fn kernel_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = params(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let mu = rng.gen_range(0.0..3.0) * p.cutoff();
        let t = rng.gen_range(0.0..10.0);
        let q = KernelQuery::new(mu, t, p).map_err(|e| e.to_string())?;
        let (a, b) = (h1(&q), h2(&q));
        worst = worst.max(-a).max(a - 1.0).max(b.abs() - wave_envelope(t, &p));
    }
    if worst > 1e-12 {
        return Err(format!("bound violated by {worst:e}"));
    }
    within_time(start.elapsed(), 1.0, format!("10^4 points, worst excess {worst:.1e}"))
}

fn kernel_ode() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let step = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = params(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let mu = rng.gen_range(0.0..5.0);
        let t = rng.gen_range(0.01..5.0);
        let (hm, h0, hp) = (transfer(mu, t - step, &p), transfer(mu, t, &p), transfer(mu, t + step, &p));
        let d2 = (hp - 2.0 * h0 + hm) / (step * step);
        let d1 = (hp - hm) / (2.0 * step);
        worst = worst.max((d2 / (p.c * p.c) + d1 / p.d + mu * mu * h0).abs());
    }
    if worst > 1e-5 {
        return Err(format!("residual {worst:e}"));
    }
    within_time(start.elapsed(), 1.0, format!("10^3 points, max residual {worst:.1e}"))
}

fn cutoff_continuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = params(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let t = rng.gen_range(0.0..10.0);
        let cut = p.cutoff();
        worst = worst.max((transfer(cut - 1e-8, t, &p) - transfer(cut + 1e-8, t, &p)).abs());
    }
    if worst > 1e-6 {
        return Err(format!("jump {worst:e}"));
    }
    Ok(format!("100 triples, max jump {worst:.1e}"))
}

fn lommel_identity() -> Outcome {
    let start = Instant::now();
    let mut worst_raw = 0.0f64;
    for &mu in &[0.5, 1.0, 5.0, 20.0] {
        let j = bessel_half_seq(200, mu).map_err(|e| e.to_string())?;
        for big_l in 1..=10 {
            let raw: f64 = (big_l..=200).map(|l| (2 * l + 1) as f64 * j[l] * j[l]).sum();
            let closed = lommel_weight(big_l, mu).map_err(|e| e.to_string())?;
            worst_raw = worst_raw.max((raw - closed).abs() / closed.abs());
        }
    }
    let p = params(1.0, 1.0);
    let measures = [
        atoms(&[(1.0, 1.0)]),
        config("example1.json").measure,
        SpectralMeasure::new(
            vec![Atom { mu: 4.0, mass: 0.5 }],
            vec![Segment { lo: 0.1, hi: 3.0, amplitude: 1.0, exponent: 0.5 }],
        )
        .unwrap(),
    ];
    let mut worst_tail = 0.0f64;
    for m in &measures {
        for big_l in [1, 3, 8] {
            let direct = tail_sum_direct(big_l, m, &p, 0.0, TailOptions::default()).map_err(|e| e.to_string())?;
            let closed = tail_sum_lommel(big_l, m, &p).map_err(|e| e.to_string())?;
            worst_tail = worst_tail.max((direct.value - closed).abs() / closed.abs());
        }
    }
    if worst_raw > 1e-10 || worst_tail > 1e-8 {
        return Err(format!("Bessel sums rel {worst_raw:e}, measure tails rel {worst_tail:e}"));
    }
    within_time(
        start.elapsed(),
        5.0,
        format!("Bessel sums rel {worst_raw:.1e}, measure tails rel {worst_tail:.1e}"),
    )
}

fn mixed_measure() -> SpectralMeasure {
    SpectralMeasure::new(
        vec![Atom { mu: 0.4, mass: 0.3 }, Atom { mu: 5.0, mass: 1.0 }, Atom { mu: 7.0, mass: 0.2 }],
        vec![Segment { lo: 0.5, hi: 4.0, amplitude: 0.5, exponent: 1.0 }],
    )
    .unwrap()
}

fn route_agreement() -> Outcome {
    let start = Instant::now();
    let m = mixed_measure();
    let p = params(1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let q = CovarianceQuery::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), &m, p)
            .map_err(|e| e.to_string())?;
        let spectral = covariance_spectral(&q).map_err(|e| e.to_string())?;
        let leg = covariance_legendre(&q, 12).map_err(|e| e.to_string())?;
        worst = worst.max((spectral - leg.value).abs() - leg.remainder);
    }
    if worst > 1e-9 {
        return Err(format!("discrepancy exceeds remainder by {worst:e}"));
    }
    within_time(start.elapsed(), 10.0, format!("100 queries, max excess over remainder {worst:.1e}"))
}

fn variance_identity() -> Outcome {
    let cfg = config("example2.json");
    let (m, p) = (&cfg.measure, &cfg.params);
    let mut worst = 0.0f64;
    for &t in &[0.0, 0.05, 0.1] {
        let q = CovarianceQuery::new(0.0, t, t, m, *p).map_err(|e| e.to_string())?;
        let r = covariance_spectral(&q).map_err(|e| e.to_string())?;
        let sum = tail_sum_direct(0, m, p, t, TailOptions::default()).map_err(|e| e.to_string())?;
        let series = sum.value / (4.0 * PI);
        let rel = (r - series).abs() / r;
        let left = tail_sum_lommel_at(sum.next_degree, t, m, p).map_err(|e| e.to_string())? / (4.0 * PI);
        if !sum.converged || rel > 1e-6 || (r - series).abs() > left + 1e-9 * r {
            return Err(format!("t={t}: rel {rel:e}, tail bound {left:e}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("t in {{0, 0.05, 0.1}}, max rel error {worst:.1e}"))
}

fn holder() -> Outcome {
    let cfg = config("example1.json");
    let (m, p) = (&cfg.measure, &cfg.params);
    let gammas: Vec<f64> = (0..=12).map(|i| 1e-3 * (PI / 1e-3).powf(i as f64 / 12.0)).collect();
    let mut tightest = f64::INFINITY;
    for &alpha in &[0.5, 1.0] {
        for &t in &[0.0, 0.1] {
            for &g in &gammas {
                let mse = angular_mse_spectral(g, t, m, p).map_err(|e| e.to_string())?;
                let bound = holder_bound(g, t, alpha, m, p, TailOptions::default()).map_err(|e| e.to_string())?;
                if mse > bound {
                    return Err(format!("α={alpha}, t={t}, γ={g}: {mse} > {bound}"));
                }
                tightest = tightest.min(bound / mse);
            }
        }
    }
    // bounded support: MSE/(1 − cos γ) tends to a finite limit as γ → 0
    let bounded = atoms(&[(2.0, 1.0), (5.0, 0.5)]);
    let k = holder_sum(0.0, 1.0, &bounded, p, TailOptions::default()).map_err(|e| e.to_string())?.value / PI;
    let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&g| angular_mse_spectral(g, 0.0, &bounded, p).map(|v| v / (1.0 - g.cos())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if hi > k || hi / lo > 1.05 {
        return Err(format!("ratio range [{lo}, {hi}] against constant {k}"));
    }
    Ok(format!("bound/MSE ≥ {tightest:.2}; MSE/(1−cos γ) in [{lo:.4}, {hi:.4}] ≤ {k:.1}"))
}

fn gap_decay() -> Outcome {
    let p = params(1.0, 1.0);
    let cases = [
        (atoms(&[(0.3, 1.0), (0.4, 0.5), (1.0, 2.0), (2.5, 1.0)]), 0.3),
        (atoms(&[(0.7, 1.0), (1.5, 0.5), (3.0, 1.0)]), p.cutoff()),
    ];
    let mut worst = 0.0f64;
    for (m, delta) in &cases {
        let c0 = spectrum_range(0, 51, 0.0, 0.0, m, &p).map_err(|e| e.to_string())?;
        for &t in &[0.5, 1.0, 5.0] {
            let factor = gap_decay_factor(*delta, t, &p).map_err(|e| e.to_string())?;
            let ct = spectrum_range(0, 51, t, t, m, &p).map_err(|e| e.to_string())?;
            for (l, (a, b)) in ct.iter().zip(&c0).enumerate() {
                let bound = factor * b;
                if *a > bound * (1.0 + 1e-12) {
                    return Err(format!("δ={delta}, t={t}, l={l}: {a} > {bound}"));
                }
                if bound > 0.0 {
                    worst = worst.max(a / bound);
                }
            }
        }
    }
    Ok(format!("l ≤ 50, t in {{0.5, 1, 5}}, both gap cases; max C_l(t,t)/bound {worst:.3}"))
}

fn mc_spectrum() -> Outcome {
    let start = Instant::now();
    let m = atoms(&[(1.0, 1.0)]);
    let p = params(1.0, 1.0);
    let times = [0.0, 1.0];
    let ens = simulate_ensemble(2000, 21, &times, &m, &p, 1000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let theory = spectrum_range(0, 21, t, t, &m, &p).map_err(|e| e.to_string())?;
        for (l, c) in theory.iter().enumerate() {
            let e = empirical_spectrum(&ens, l, k).map_err(|e| e.to_string())?;
            let z = (e.value - c).abs() / e.std_error;
            if z > 5.0 {
                return Err(format!("t={t}, l={l}: {} vs {c} ({z:.1} SE)", e.value));
            }
            worst = worst.max(z);
        }
    }
    within_time(start.elapsed(), 60.0, format!("N=2000, l ≤ 20, t in {{0, 1}}, max |z| {worst:.2}"))
}

fn truncation() -> Outcome {
    let m = atoms(&[(2.0, 1.0), (5.0, 1.0), (8.0, 0.5)]);
    let p = params(1.0, 1.0);
    let (li, lo) = (3, 15);
    let ens = simulate_ensemble(2000, lo, &[0.0, 1.0], &m, &p, 77).map_err(|e| e.to_string())?;
    let exact0 = truncation_error_exact(li, lo, 0.0, &m, &p).map_err(|e| e.to_string())?;
    let exact1 = truncation_error_exact(li, lo, 1.0, &m, &p).map_err(|e| e.to_string())?;
    let mc0 = truncation_error_mc(li, lo, &ens, 0).map_err(|e| e.to_string())?;
    let mc1 = truncation_error_mc(li, lo, &ens, 1).map_err(|e| e.to_string())?;
    let z = (mc0.estimate - exact0).abs() / mc0.std_error;
    if z > 5.0 {
        return Err(format!("t=0: MC {} vs {exact0} ({z:.1} SE)", mc0.estimate));
    }
    if exact1 > exact0 || mc1.estimate > exact0 + 5.0 * mc1.std_error {
        return Err(format!("t=1: exact {exact1}, MC {} exceed t=0 value {exact0}", mc1.estimate));
    }
    Ok(format!(
        "t=0 MC {:.4} vs {exact0:.4} ({z:.2} SE); t=1 MC {:.4} ≤ {exact0:.4}",
        mc0.estimate, mc1.estimate
    ))
}

fn memory() -> Outcome {
    let start = Instant::now();
    let seg = |a: f64| SpectralMeasure::new(vec![], vec![Segment { lo: 0.0, hi: 1.0, amplitude: 1.0, exponent: a }]).unwrap();
    let cases = [
        (atoms(&[(0.5, 1.0), (2.0, 1.0)]), MemoryClass::ShortRange),
        (seg(0.5), MemoryClass::LongRange),
        (seg(1.5), MemoryClass::ShortRange),
    ];
    for (m, want) in &cases {
        let got = memory_classify(m).map_err(|e| e.to_string())?.classification;
        if got != *want {
            return Err(format!("{m:?}: {got:?}, expected {want:?}"));
        }
    }
    within_time(start.elapsed(), 1.0, "atoms/short, a=0.5/long, a=1.5/short".into())
}

fn entropy_lab() -> Outcome {
    let start = Instant::now();
    let l = 3.0 * PI;
    let target = (2.0 * l).ln();
    let uniform = ModeDecomposition::new(l, 0.5 / l, vec![]).map_err(|e| e.to_string())?;
    let s_uniform = entropy_at(&uniform, 0.0, 400).ok_or("uniform entropy not computable")?;
    if (s_uniform - target).abs() > 1e-6 {
        return Err(format!("uniform entropy {s_uniform} vs {target}"));
    }

    let opts = ExperimentOptions::default();
    let wave = experiment_decomposition(Experiment::StandingWave, &opts).map_err(|e| e.to_string())?;
    let omega = 7.0f64.sqrt() / 6.0;
    let s_peak = entropy_at(&wave, PI / (2.0 * omega), 400).ok_or("standing wave entropy not computable")?;
    if (s_peak - target).abs() > 1e-3 {
        return Err(format!("standing wave peak {s_peak} vs {target}"));
    }
    // past t ≈ 25 the deficit e^{−t}/4 is at roundoff level
    let times: Vec<f64> = (0..=2500).map(|i| i as f64 * 0.01).collect();
    let trace = entropy_trace(&wave, &times, 400).map_err(|e| e.to_string())?;
    let minima: Vec<f64> = trace
        .entropy
        .windows(3)
        .filter_map(|w| match (w[0], w[1], w[2]) {
            (Some(a), Some(b), Some(c)) if b < a && b <= c && target - b > 1e-12 => Some(b),
            _ => None,
        })
        .collect();
    if minima.len() < 3 || minima.windows(2).any(|w| w[1] <= w[0]) || minima.iter().any(|&s| s > target) {
        return Err(format!("standing wave minima not increasing toward log(2L): {minima:?}"));
    }

    let point = experiment_decomposition(Experiment::PointSource, &opts).map_err(|e| e.to_string())?;
    let cell = 2.0 * l / 400.0;
    let mut worst_front = 0.0f64;
    for i in 1..=8 {
        let t = i as f64;
        worst_front = worst_front.max((front_position(&point, t, 400) - t).abs());
    }
    if worst_front > cell {
        return Err(format!("front off by {worst_front} (cell {cell})"));
    }

    let rect = experiment_decomposition(Experiment::Rectangle, &opts).map_err(|e| e.to_string())?;
    let mut worst_mass = 0.0f64;
    for md in [&wave, &point, &rect] {
        for &t in &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            worst_mass = worst_mass.max((md.mass(t, 400) - 1.0).abs());
        }
    }
    if worst_mass > 1e-8 {
        return Err(format!("mass drift {worst_mass:e}"));
    }
    within_time(
        start.elapsed(),
        30.0,
        format!(
            "S(uniform)={s_uniform:.6}, peak={s_peak:.6}, {} rising minima, front error {worst_front:.3} ≤ {cell:.3}, mass drift {worst_mass:.1e}",
            minima.len()
        ),
    )
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hyperdiff");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example2.json");
    let files = ["field_t0.csv", "field_t1.csv", "coeffs_t0.csv", "coeffs_t1.csv"];
    let run = |threads: &str, args: &[&str]| -> Result<(), String> {
        let status = Command::new(bin)
            .args(args)
            .env("HYPERDIFF_THREADS", threads)
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() {
            Ok(())
        } else {
            Err(format!("hyperdiff {args:?} failed with {status}"))
        }
    };
    let first = dir.path().join("t1");
    run(
        "1",
        &[
            "simulate", "--config", cfg.to_str().unwrap(), "--lmax", "40", "--grid", "24x48",
            "--times", "0,0.05", "--seed", "11", "--out", first.to_str().unwrap(),
        ],
    )?;
    let manifest = first.join("manifest.json");
    let mut dirs = vec![first.clone()];
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("replay{threads}"));
        run(threads, &["replay", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()])?;
        dirs.push(out);
    }
    let reference: Vec<Vec<u8>> =
        files.iter().map(|f| std::fs::read(first.join(f))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for d in &dirs[1..] {
        for (f, want) in files.iter().zip(&reference) {
            let got = std::fs::read(d.join(f)).map_err(|e| e.to_string())?;
            if &got != want {
                return Err(format!("{} differs from the original run", d.join(f).display()));
            }
        }
    }
    Ok(format!("{} files identical across 1 and 8 threads via manifest replay", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("kernel bounds", kernel_bounds),
        ("kernel ODE residual", kernel_ode),
        ("cut-off continuity", cutoff_continuity),
        ("Lommel identity", lommel_identity),
        ("addition-theorem route agreement", route_agreement),
        ("variance identity", variance_identity),
        ("Hölder MSE bound", holder),
        ("support-gap decay", gap_decay),
        ("Monte Carlo spectrum recovery", mc_spectrum),
        ("truncation sharpness", truncation),
        ("memory classification", memory),
        ("entropy lab", entropy_lab),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
