use kcover::kernels::dist;
use kcover::signatures::PointSet;
use kcover::terminal_jl::{build_embedding, EmbeddingConfig, ProjectionKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cloud(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(), d).unwrap()
}

#[test]
fn anchors_embed_to_cached_images() {
    for kind in [ProjectionKind::Gaussian, ProjectionKind::Orthogonal] {
        let s = cloud(30, 200, 1);
        let cfg = EmbeddingConfig {
            projection: kind,
            ..EmbeddingConfig::default()
        };
        let emb = build_embedding(&s, 0.9, 2, &cfg).unwrap();
        assert!(emb.m() < 200);
        for i in 0..s.len() {
            assert_eq!(emb.embed(s.point(i)).unwrap(), emb.anchor_image(i));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outer_points_keep_nearest_distance(seed in any::<u64>(), scale in 0.1f64..4.0) {
        let s = cloud(25, 12, seed);
        let emb = build_embedding(&s, 0.5, seed, &EmbeddingConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let q: Vec<f64> = (0..12).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let out = emb.embed_detailed(&q).unwrap();
        let img = &out.image;
        prop_assert_eq!(img.len(), emb.output_dim());
        prop_assert!(img[emb.m()] >= 0.0 && img[emb.m()].is_finite());
        prop_assert!(out.violation <= emb.config().solver.feas_tol);
        let want = dist(&q, s.point(out.nearest));
        let got = dist(img, &emb.anchor_image(out.nearest));
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0));
    }
}
