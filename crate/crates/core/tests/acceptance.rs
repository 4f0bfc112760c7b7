//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kcover::covering::naive_cover;
use kcover::kernels::KernelSpec;
use kcover::lowerbound::{
    combinatorial_bound, corner_distance, hamming_count, packing_certificate, sphere_intersection, witness_grid,
    SphereSystem,
};
use kcover::oracle::{
    empirical_rademacher, shatter_search_1d_at, verify_cover, verify_cover_sample, verify_kde_sample,
    verify_terminal,
};
use kcover::pipeline::{build_cover, PipelineConfig};
use kcover::sampling::{cover_sample_size, draw_sample, SampleMode, SampleSizeConfig};
use kcover::signatures::{ddelta, signature, PointSet};
use kcover::terminal_jl::{attempt_seed, build_embedding, EmbeddingConfig};
use kcover::{Construction, Cover, CoverMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn uniform_cloud(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random_range(lo..hi)).collect(), d).unwrap()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn sphere_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for d in 2..=10usize {
        let df = d as f64;
        for _ in 0..200 {
            let r2: f64 = rng.random_range(1.0 + 1.0 / df..3.0);
            let radii: Vec<f64> = (0..d)
                .map(|_| (r2 + 0.99 * rng.random_range(-1.0 / df..1.0 / df)).sqrt())
                .collect();
            let sys = SphereSystem::new(radii).unwrap();
            match sphere_intersection(&sys) {
                Ok(out) if out.points[0] != out.points[1] => worst = worst.max(out.max_residual(&sys)),
                _ => bad += 1,
            }
        }
    }
    let sym = sphere_intersection(&SphereSystem::new(vec![1.0, 1.0]).unwrap()).unwrap();
    let sym_ok = sym.points == [vec![0.0, 0.0], vec![1.0, 1.0]];
    let t = start.elapsed();
    Outcome {
        pass: bad == 0 && worst <= 1e-9 && sym_ok && within(t, 5),
        detail: format!("1800 systems, failures {bad}, max residual {worst:.2e}, symmetric case {sym_ok}, {t:.2?}"),
    }
}

fn naive_certification() -> Outcome {
    let start = Instant::now();
    let g = KernelSpec::default();
    let x = uniform_cloud(50, 2, 0.0, 1.0, 2);
    let cover = naive_cover(&g, &x, 0.3).unwrap();
    let rep = verify_cover(&g, &x, &cover, 0.3, 10_000, 2).unwrap();
    let t = start.elapsed();
    Outcome {
        pass: rep.max_error <= 0.3 && within(t, 60),
        detail: format!("|Q| = {}, max_error {:.4}, {t:.2?}", cover.size(), rep.max_error),
    }
}

fn terminal_embedding() -> (Outcome, Outcome) {
    let start = Instant::now();
    let s = uniform_cloud(100, 50, 0.0, 1.0, 3);
    let queries: Vec<Vec<f64>> = {
        let q = uniform_cloud(1000, 50, 0.0, 1.0, 4);
        q.to_rows()
    };
    let cfg = EmbeddingConfig::default();
    let mut best = None;
    for attempt in 0..=cfg.retries {
        let emb = build_embedding(&s, 0.5, attempt_seed(3, attempt), &cfg).unwrap();
        let rep = verify_terminal(&emb, &queries, 0.5, 1e-6).unwrap();
        let done = rep.passed;
        best = Some(rep);
        if done {
            break;
        }
    }
    let rep = best.unwrap();
    let t = start.elapsed();
    let a = Outcome {
        pass: rep.infeasible == 0 && rep.nearest_rel_error <= 1e-9 && within(t, 300),
        detail: format!(
            "(a) {} queries embedded, {} infeasible, nearest-anchor rel error {:.2e}",
            rep.embedded, rep.infeasible, rep.nearest_rel_error
        ),
    };
    let b = Outcome {
        pass: rep.passed && within(t, 300),
        detail: format!(
            "(b) distortion range [{:.4}, {:.4}] over {} pairs, want [1, 1.5] ± 1e-6, {t:.2?}",
            rep.min_ratio, rep.max_ratio, rep.pairs
        ),
    };
    (a, b)
}

struct SampleTrials {
    size_ok: bool,
    formula_size: usize,
    passing: Vec<PointSet>,
    formula_passing: usize,
    worst: f64,
    elapsed: Duration,
}

fn cover_sample_trials(x: &PointSet) -> SampleTrials {
    let g = KernelSpec::default();
    let cfg = SampleSizeConfig::for_kernel(&g).with_mode(SampleMode::PositiveDefinite).with_delta(0.1);
    let formula_size = cover_sample_size(&g, 0.2, &cfg, x.dim()).unwrap();
    let stated = 58;
    let mut passing = Vec::new();
    let mut formula_passing = 0;
    let mut worst = 0.0f64;
    let mut elapsed = Duration::ZERO;
    for t in 0..20u64 {
        let start = Instant::now();
        let s = draw_sample(x, stated, 100 + t).unwrap();
        let rep = verify_cover_sample(&g, x, &s, 0.2, 10_000, 200 + t).unwrap();
        worst = worst.max(rep.max_error);
        if rep.max_error <= 0.2 {
            passing.push(s);
        }
        elapsed += start.elapsed();
        let s2 = draw_sample(x, formula_size, 100 + t).unwrap();
        if verify_cover_sample(&g, x, &s2, 0.2, 10_000, 200 + t).unwrap().max_error <= 0.2 {
            formula_passing += 1;
        }
    }
    SampleTrials {
        size_ok: formula_size == stated,
        formula_size,
        passing,
        formula_passing,
        worst,
        elapsed,
    }
}

fn separation_example() -> Outcome {
    let g = KernelSpec::default();
    let z = vec![0.3, -0.7];
    let x = PointSet::from_rows(&vec![z.clone(); 64]).unwrap();
    let s = PointSet::from_rows(std::slice::from_ref(&z)).unwrap();
    let sample = verify_cover_sample(&g, &x, &s, 0.05, 2000, 5).unwrap();
    let cover = Cover {
        queries: vec![z],
        far_point: None,
        meta: CoverMeta {
            epsilon: 0.05,
            kernel: g,
            seed: None,
            ambient_dim: 2,
            construction: Construction::Custom,
        },
    };
    let as_cover = verify_cover(&g, &x, &cover, 0.05, 2000, 5).unwrap();
    Outcome {
        pass: sample.max_error == 0.0 && !as_cover.passed && as_cover.max_error > 0.5,
        detail: format!(
            "cover-sample error {:e}, as a cover: max_error {:.4}",
            sample.max_error, as_cover.max_error
        ),
    }
}

fn kde_implication(x: &PointSet, passing: &[PointSet]) -> Outcome {
    let g = KernelSpec::default();
    let mut worst = 0.0f64;
    let mut fails = 0;
    for (i, s) in passing.iter().enumerate() {
        let rep = verify_kde_sample(&g, x, s, 0.2, 0.1, 10_000, 300 + i as u64).unwrap();
        worst = worst.max(rep.max_error);
        if !rep.passed {
            fails += 1;
        }
    }
    Outcome {
        pass: fails == 0 && !passing.is_empty(),
        detail: format!(
            "{} passing samples checked, {fails} failures, worst KDE error {worst:.4} vs 0.22",
            passing.len()
        ),
    }
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let g = KernelSpec::default();
    let x = uniform_cloud(200, 30, 0.0, 1.0, 7);
    let out = build_cover(&g, &x, 0.4, &PipelineConfig::for_kernel(&g), 7).unwrap();
    let rep = verify_cover(&g, &x, &out.cover, 0.4, 10_000, 7).unwrap();
    let r = &out.report;
    let t = start.elapsed();
    Outcome {
        pass: rep.passed && r.q_prime_size <= r.q_size && r.warnings == 0 && within(t, 600),
        detail: format!(
            "|S| = {}, m = {}, |Q| = {}, |Q'| = {}, warnings {}, max_error {:.4}, {t:.2?}",
            r.sample_size, r.m, r.q_size, r.q_prime_size, r.warnings, rep.max_error
        ),
    }
}

fn shattering() -> Outcome {
    let g = KernelSpec::default();
    let four = [-51.0, -50.0, 50.0, 51.0];
    let mut realized = 0;
    for mask in 0..16u32 {
        let labels: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
        if let Some(w) = shatter_search_1d_at(&g, &four, &labels, 1e-2).unwrap() {
            let ok = four.iter().zip(&labels).all(|(x, &l)| {
                let v = (g.profile((w.p - x).abs()) - g.profile((w.q - x).abs())).abs();
                (v >= w.tau) == l
            });
            realized += ok as usize;
        }
    }
    let five = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let alt = [true, false, true, false, true];
    let miss = shatter_search_1d_at(&g, &five, &alt, 1e-2).unwrap().is_none();
    Outcome {
        pass: realized == 16 && miss,
        detail: format!("4 points: {realized}/16 labelings realized; 5-point alternating not found: {miss}"),
    }
}

/// Largest set of corners pairwise more than `need` apart in index L1.
fn brute_force_packing(idx: &[Vec<u64>], need: u64) -> usize {
    fn go(i: usize, idx: &[Vec<u64>], need: u64, chosen: &mut Vec<usize>, best: &mut usize) {
        if chosen.len() + (idx.len() - i) <= *best {
            return;
        }
        if i == idx.len() {
            *best = chosen.len();
            return;
        }
        let l1 = |a: &[u64], b: &[u64]| a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum::<u64>();
        if chosen.iter().all(|&j| l1(&idx[i], &idx[j]) > need) {
            chosen.push(i);
            go(i + 1, idx, need, chosen, best);
            chosen.pop();
        }
        go(i + 1, idx, need, chosen, best);
    }
    let mut best = 0;
    go(0, idx, need, &mut Vec::new(), &mut best);
    best
}

fn witness_grid_check() -> Outcome {
    let g = KernelSpec::default();
    let grid = witness_grid(0.01, 2).unwrap();
    let indices_ok = grid.indices == vec![32, 33, 34, 35, 36];
    let residual = grid.corners.iter().map(|c| c.residual).fold(0.0, f64::max);
    let x = PointSet::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let sigs: Vec<_> = grid.corners.iter().map(|c| signature(&g, &x, &c.point).unwrap()).collect();
    let mut law_err = 0.0f64;
    for i in 0..sigs.len() {
        for j in 0..i {
            law_err = law_err.max((ddelta(&sigs[i], &sigs[j]).unwrap() - corner_distance(&grid, i, j)).abs());
        }
    }
    let greedy = packing_certificate(&grid, 0.01);
    let idx: Vec<Vec<u64>> = grid.corners.iter().map(|c| c.index.clone()).collect();
    // ε·Σ|Δi|/2 > ε  ⇔  Σ|Δi| > 2.
    let optimum = brute_force_packing(&idx, 2);
    Outcome {
        pass: indices_ok && grid.corners.len() == 25 && residual <= 1e-9 && law_err <= 1e-9 && greedy.size == optimum,
        detail: format!(
            "indices {:?}, 25 corners max residual {residual:.2e}, d_Δ law error {law_err:.2e}, greedy {} vs optimum {optimum}",
            grid.indices, greedy.size
        ),
    }
}

fn combinatorial() -> Outcome {
    let m = combinatorial_bound(0.05, 10).unwrap();
    let h = hamming_count(20, 0.1).unwrap();
    let n_ok = h.count == 211u32.into();
    Outcome {
        pass: m.m == 1024.0 && n_ok && h.within_bound,
        detail: format!("M = {}, N = {} ≤ {:.3}", m.m, h.count, h.bound),
    }
}

fn rademacher() -> Outcome {
    let g = KernelSpec::default();
    let grid: Vec<Vec<f64>> = (0..7)
        .flat_map(|i| (0..7).map(move |j| vec![-0.5 + i as f64 / 3.0, -0.5 + j as f64 / 3.0]))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            pairs.push((grid[i].clone(), grid[j].clone()));
        }
    }
    let ms = [25usize, 100, 400];
    let mut est = Vec::new();
    let mut bound_ok = true;
    for (k, &m) in ms.iter().enumerate() {
        let s = uniform_cloud(m, 2, 0.0, 1.0, 11 + k as u64);
        let r = empirical_rademacher(&g, &s, 500, &pairs, 11).unwrap();
        bound_ok &= r <= 2.0 / (m as f64).sqrt() + 0.05;
        est.push(r);
    }
    let lx: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = est.iter().map(|r| r.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 3.0, ly.iter().sum::<f64>() / 3.0);
    let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / lx.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
    Outcome {
        pass: bound_ok && (-0.65..=-0.35).contains(&slope),
        detail: format!("estimates {est:.4?} for m = {ms:?}, log-log slope {slope:.3}"),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let report = |name: &'static str, o: Outcome, results: &mut Vec<(&str, Outcome)>| {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1", sphere_exactness(), &mut results);
    report("2", naive_certification(), &mut results);
    let (a, b) = terminal_embedding();
    report("3a", a, &mut results);
    report("3b", b, &mut results);

    let x = uniform_cloud(2000, 10, 0.0, 1.0, 4);
    let trials = cover_sample_trials(&x);
    let t = trials.elapsed;
    let ok = trials.size_ok && trials.passing.len() >= 16 && within(t, 300);
    report(
        "4",
        Outcome {
            pass: ok,
            detail: format!(
                "formula size {} (stated 58); at size 58: {}/20 trials ≤ 0.2, worst {:.4}; at size {}: {}/20; {t:.2?}",
                trials.formula_size,
                trials.passing.len(),
                trials.worst,
                trials.formula_size,
                trials.formula_passing
            ),
        },
        &mut results,
    );
    report("5", separation_example(), &mut results);
    report("6", kde_implication(&x, &trials.passing), &mut results);
    report("7", end_to_end(), &mut results);
    report("8", shattering(), &mut results);
    report("9", witness_grid_check(), &mut results);
    report("10", combinatorial(), &mut results);
    report("11", rademacher(), &mut results);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
