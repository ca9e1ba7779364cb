use convexlab_core::ballbodies::{body_from_function, ExpMeasure};
use convexlab_core::laplace::{klartag_body, log_laplace, KlartagConfig, SearchGoal};
use convexlab_core::linalg::{Matrix, Vector};
use convexlab_core::randgeom::{sample_uniform, SampleConfig};
use convexlab_core::zoo::{cube, simplex};
use convexlab_core::ConvexBody;

fn tilted_moments(k: &ConvexBody, xi: &Vector, samples: usize) -> (f64, Vector, Matrix) {
    let xs = sample_uniform(k, &SampleConfig::new(9, samples)).unwrap();
    let n = k.dim();
    let mut z = 0.0;
    let mut m1 = Vector::zeros(n);
    let mut m2 = Matrix::zeros(n, n);
    for x in &xs {
        let w = xi.dot(x).exp();
        z += w;
        m1 += x * w;
        m2 += x * x.transpose() * w;
    }
    let mean = m1 / z;
    let cov = m2 / z - &mean * mean.transpose();
    ((z / xs.len() as f64).ln(), mean, cov)
}

#[test]
fn gradient_and_hessian_are_tilted_moments() {
    let k = simplex(3);
    let xi = Vector::from_vec(vec![1.5, -0.5, 0.8]);
    let ev = log_laplace(&k, &xi).unwrap();
    let (value, mean, cov) = tilted_moments(&k, &xi, 400_000);
    assert!((ev.value - value).abs() < 5e-3, "{} vs {}", ev.value, value);
    assert!((&ev.grad - mean).amax() < 2e-3);
    assert!((&ev.hess - cov).amax() < 2e-3);
}

#[test]
fn square_log_sinh() {
    let v = log_laplace(&cube(2), &Vector::from_vec(vec![1.0, 0.0])).unwrap().value;
    assert!((v - 0.161439361854).abs() < 1e-9);
    let v = log_laplace(&cube(2), &Vector::from_vec(vec![2.0, -1.0])).unwrap().value;
    let want = ((2f64).sinh() / 2.0).ln() + (1f64.sinh()).ln();
    assert!((v - want).abs() < 1e-12);
}

#[test]
fn gradient_pushes_towards_boundary() {
    // large tilts concentrate the measure near the maximizing vertex
    let k = simplex(2);
    let g = log_laplace(&k, &Vector::from_vec(vec![60.0, 0.0])).unwrap().grad;
    assert!(g[0] > 0.95 && g[1] < 0.05 && k.margin(&g) > 0.0);
}

#[test]
fn tilted_triangle_gives_a_valid_sandwich() {
    let k = simplex(2);
    let mu = ExpMeasure::new(k, Vector::from_vec(vec![0.4, -0.3])).unwrap();
    let fb = body_from_function(&mu, 1f64.exp(), 4).unwrap();
    assert!(fb.sandwich.pass, "{:?}", fb.sandwich);
    assert!(fb.t.barycenter().norm() < 1e-4);
    assert!(fb.l_t < 0.6);
}

#[test]
fn minimizing_search_keeps_the_sandwich() {
    let k = simplex(3);
    let cfg = KlartagConfig {
        goal: SearchGoal::Minimize,
        budget: 80,
        grid: Some(1200),
        ..Default::default()
    };
    let r = klartag_body(&k, &cfg).unwrap();
    assert!(r.certified);
    assert!(r.detcov <= r.target);
    assert!(r.sandwich.pass, "{:?}", r.sandwich);
    assert!(r.l_t <= 0.6);
}
