use kcover::kernels::{dist, KernelSpec};
use kcover::oracle::{verify_cover, QuerySampler};
use kcover::pipeline::{build_cover, PipelineConfig};
use kcover::signatures::{ddelta_values, signature_values, PointSet};
use kcover::terminal_jl::{build_embedding, EmbeddingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
}

#[test]
fn covers_random_instances() {
    let g = KernelSpec::default();
    for (n, d, eps, seed) in [(120, 5, 0.3, 1), (300, 20, 0.4, 2), (500, 50, 0.5, 3)] {
        let x = cube(n, d, seed);
        let out = build_cover(&g, &x, eps, &PipelineConfig::for_kernel(&g), seed).unwrap();
        let r = &out.report;
        assert!(r.sample_size <= n);
        assert!(r.q_prime_size <= r.q_size + r.warnings);
        let rep = verify_cover(&g, &x, &out.cover, eps, 10_000, seed).unwrap();
        assert!(rep.passed, "n={n} d={d} eps={eps}: {}", rep.max_error);
    }
}

#[test]
fn report_is_reproducible() {
    let g = KernelSpec::default();
    let x = cube(80, 6, 4);
    let cfg = PipelineConfig::for_kernel(&g);
    let mut a = build_cover(&g, &x, 0.4, &cfg, 9).unwrap().report;
    let mut b = build_cover(&g, &x, 0.4, &cfg, 9).unwrap().report;
    a.wall_time_secs = 0.0;
    b.wall_time_secs = 0.0;
    assert_eq!(a, b);
}

/// |d_Δ^{f(S)}(f(p), f(q)) − d_Δ^S(p, q)| ≤ ε at ε′ = ε/(2 L r(ε)).
#[test]
fn embedding_preserves_ddelta() {
    let g = KernelSpec::default();
    let eps = 0.4;
    let s = cube(60, 40, 5);
    let eps_prime = eps / (2.0 * g.lipschitz() * g.critical_radius(eps).unwrap());
    let emb = build_embedding(&s, eps_prime, 5, &EmbeddingConfig::default()).unwrap();
    let img = emb.anchor_images().unwrap();
    let sampler = QuerySampler::new(&g, &s, eps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for t in 0..1000 {
        let p = sampler.query(t, &mut rng);
        let q = sampler.query(t + 1, &mut rng);
        let before = ddelta_values(&signature_values(&g, &s, &p), &signature_values(&g, &s, &q));
        let (fp, fq) = (emb.embed(&p).unwrap(), emb.embed(&q).unwrap());
        let after = ddelta_values(&signature_values(&g, &img, &fp), &signature_values(&g, &img, &fq));
        worst = worst.max((before - after).abs());
    }
    assert!(worst <= eps, "worst {worst}");
}

#[test]
fn pulled_back_points_live_in_input_space() {
    let g = KernelSpec::default();
    let x = cube(50, 12, 8);
    let out = build_cover(&g, &x, 0.5, &PipelineConfig::for_kernel(&g), 8).unwrap();
    for q in out.cover.all_points() {
        assert_eq!(q.len(), 12);
    }
    let far = out.cover.far_point.as_ref().unwrap();
    let r = g.critical_radius(0.5 / 8.0).unwrap();
    assert!(x.iter().all(|p| dist(p, far) > r));
}
