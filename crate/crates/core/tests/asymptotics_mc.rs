use dirq::asymptotics::{asymptotic_cov, monte_carlo_validate};
use dirq::density::DensityModel;
use dirq::geometry::Direction;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn square() -> (DensityModel, Direction) {
    (DensityModel::uniform_square(), Direction::from_slice(&[1.0, 0.0]).unwrap())
}

#[test]
fn sandwich_variance_and_coverage() {
    let (m, u) = square();
    let c = asymptotic_cov(&m, 0.2, &u).unwrap();
    let r = monte_carlo_validate(&m, &c, 2000, 2000, 101).unwrap();
    assert!((0.93..=0.97).contains(&r.coverage), "coverage {}", r.coverage);
    assert!((r.a_variance_ratio - 1.0).abs() < 0.10, "variance ratio {}", r.a_variance_ratio);
}

#[test]
fn bahadur_remainder_and_root_n_rate() {
    let (m, u) = square();
    let c = asymptotic_cov(&m, 0.2, &u).unwrap();
    let reports: Vec<_> = [500, 2000, 8000].iter().map(|&n| monte_carlo_validate(&m, &c, n, 400, 202).unwrap()).collect();
    for w in reports.windows(2) {
        assert!(w[1].bahadur_median < w[0].bahadur_median, "{} then {}", w[0].bahadur_median, w[1].bahadur_median);
        let ratio = w[1].error_median / w[0].error_median;
        assert!((ratio - 0.5).abs() <= 0.15, "error ratio {ratio}");
    }
}

#[test]
fn lambda_variance_and_skewness() {
    let (m, u) = square();
    let c = asymptotic_cov(&m, 0.2, &u).unwrap();
    let r = monte_carlo_validate(&m, &c, 4000, 2000, 303).unwrap();
    assert!((r.lambda_variance_ratio - 1.0).abs() < 0.15, "lambda variance ratio {}", r.lambda_variance_ratio);
    // The standard error of a sample skewness from R draws is about sqrt(6/R).
    for (model, dir) in [(m.clone(), u.clone()), (DensityModel::Gaussian { k: 2, sigma: 1.0 }, Direction::from_slice(&[0.6, 0.8]).unwrap())] {
        let c = asymptotic_cov(&model, 0.2, &dir).unwrap();
        let reps = 4000;
        let r = monte_carlo_validate(&model, &c, 100, reps, 404).unwrap();
        let predicted = c.lambda_skewness_unit / 10.0;
        let se = (6.0 / reps as f64).sqrt();
        assert!((r.lambda_skewness - predicted).abs() < 3.0 * se, "skewness {} vs {}", r.lambda_skewness, predicted);
    }
}

#[test]
fn score_covariance_matches_simulation() {
    let (m, u) = square();
    let c = asymptotic_cov(&m, 0.2, &u).unwrap();
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let z = m.sample(n, &mut rng);
    let tau = 0.2;
    let xi: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let zi = z.row(i).transpose();
            let below = c.fit.c.dot(&zi) - c.fit.a < 0.0;
            let psi = if below { tau - 1.0 } else { tau };
            DVector::from_vec(vec![-psi, -psi * zi[0], -psi * zi[1]])
        })
        .collect();
    let mean = xi.iter().fold(DVector::zeros(3), |a, x| a + x) / n as f64;
    for p in 0..3 {
        for q in 0..3 {
            let prods: Vec<f64> = xi.iter().map(|x| (x[p] - mean[p]) * (x[q] - mean[q])).collect();
            let est = prods.iter().sum::<f64>() / (n - 1) as f64;
            let sd = (prods.iter().map(|v| (v - est).powi(2)).sum::<f64>() / n as f64).sqrt();
            let se = sd / (n as f64).sqrt();
            assert!((est - c.v_c[(p, q)]).abs() < 3.0 * se + 1e-12, "entry ({p},{q}): {est} vs {}", c.v_c[(p, q)]);
        }
    }
}
