use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepca::{centered_gamma, draw_samples, embed_random, make_profile, population_gamma, ProfileKind};

/// max |Σ̂ − (I + θvvᵀ)| shrinks like 1/√m.
#[test]
fn sample_covariance_converges_at_root_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let profile = make_profile(&ProfileKind::Flat, 5).unwrap();
    let model = embed_random(&profile, 50, 3.0, true, &mut rng).unwrap();
    let truth = population_gamma(&model);

    let ms = [1_000usize, 10_000, 100_000];
    let mut points = Vec::new();
    for &m in &ms {
        // average a few replicates so the slope is not at the mercy of one draw
        let reps = 4;
        let mut total = 0.0;
        for _ in 0..reps {
            let gamma = centered_gamma(&draw_samples(&model, m, &mut rng).unwrap()).unwrap();
            total += (gamma.matrix() - truth.matrix()).amax();
        }
        points.push(((m as f64).ln(), (total / reps as f64).ln()));
    }
    let max_err_at_largest = points[2].1.exp();
    assert!(max_err_at_largest < 0.05, "{max_err_at_largest}");

    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}
