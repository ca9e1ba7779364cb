use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::rng::{chunk_sizes, map_chunks, substream, SampleConfig, SampleMethod};
use crate::bodies::{BodyRep, ConvexBody, PolytopeData};
use crate::error::{GeomError, Result};
use crate::linalg::{random_unit, Vector};

/// Optional Euclidean ball intersected with the body.
#[derive(Debug, Clone)]
pub struct BallCut {
    pub center: Vector,
    pub radius: f64,
}

/// Parameter interval `[lo, hi]` of the chord `x + t d` inside `K` (and the ball, if any).
pub fn chord(k: &ConvexBody, cut: Option<&BallCut>, x: &Vector, d: &Vector) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let m = e.shape();
            let y = x - e.center();
            let md = m * d;
            let a = d.dot(&md);
            let b = y.dot(&md);
            let c = y.dot(&(m * &y)) - 1.0;
            let disc = (b * b - a * c).max(0.0).sqrt();
            lo = lo.max((-b - disc) / a);
            hi = hi.min((-b + disc) / a);
        }
        _ => {
            let p = k.polytope_data().expect("polytope");
            for (a, o) in p.normals.iter().zip(&p.offsets) {
                let ad = a.dot(d);
                let room = o - a.dot(x);
                if ad > 1e-300 {
                    hi = hi.min(room / ad);
                } else if ad < -1e-300 {
                    lo = lo.max(room / ad);
                }
            }
        }
    }
    if let Some(cut) = cut {
        let y = x - &cut.center;
        let b = y.dot(d);
        let c = y.norm_squared() - cut.radius * cut.radius;
        let disc = (b * b - c).max(0.0).sqrt();
        lo = lo.max(-b - disc);
        hi = hi.min(-b + disc);
    }
    (lo.min(0.0), hi.max(0.0))
}

/// One hit-and-run chain of `count` kept points started from `start`.
pub fn hit_and_run_chain<R: Rng + ?Sized>(
    k: &ConvexBody,
    cut: Option<&BallCut>,
    start: &Vector,
    count: usize,
    burn_in: usize,
    thinning: usize,
    rng: &mut R,
) -> Vec<Vector> {
    let n = k.dim();
    let mut x = start.clone();
    let mut out = Vec::with_capacity(count);
    let step = |x: &mut Vector, rng: &mut R| {
        let d = random_unit(rng, n);
        let (lo, hi) = chord(k, cut, x, &d);
        let t = lo + (hi - lo) * rng.random::<f64>();
        x.axpy(t, &d, 1.0);
    };
    for _ in 0..burn_in {
        step(&mut x, rng);
    }
    for _ in 0..count {
        for _ in 0..thinning {
            step(&mut x, rng);
        }
        out.push(x.clone());
    }
    out
}

struct SimplexSampler<'a> {
    data: &'a PolytopeData,
    cumulative: Vec<f64>,
}

impl<'a> SimplexSampler<'a> {
    fn new(data: &'a PolytopeData) -> Self {
        let mut acc = 0.0;
        let cumulative = data
            .cones()
            .map(|(_, v)| {
                acc += v;
                acc
            })
            .collect();
        SimplexSampler { data, cumulative }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        let cell = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let simplex = self.data.simplex(cell);
        let weights: Vec<f64> = (0..simplex.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = weights.iter().sum();
        let mut x = Vector::zeros(self.data.dim);
        for (w, p) in weights.iter().zip(simplex) {
            x.axpy(w / s, p, 1.0);
        }
        x
    }
}

fn ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    let g = Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let r = rng.random::<f64>().powf(1.0 / n as f64);
    let norm = g.norm().max(1e-300);
    g * (r / norm)
}

fn sample_chunk(k: &ConvexBody, cfg: &SampleConfig, chunk: usize, count: usize) -> Result<Vec<Vector>> {
    let n = k.dim();
    let mut rng = substream(cfg.seed, chunk as u64);
    match cfg.method {
        SampleMethod::Exact => match k.rep() {
            BodyRep::Ellipsoid(e) => Ok((0..count)
                .map(|_| e.center() + e.half_axes() * ball_point(&mut rng, n))
                .collect()),
            _ => {
                let s = SimplexSampler::new(k.polytope_data().expect("polytope"));
                Ok((0..count).map(|_| s.draw(&mut rng)).collect())
            }
        },
        SampleMethod::Rejection => {
            let (lo, hi) = k.bounding_box();
            let mut out = Vec::with_capacity(count);
            let mut misses = 0usize;
            while out.len() < count {
                let x = Vector::from_iterator(n, (0..n).map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>()));
                if k.contains_tol(&x, 0.0) {
                    out.push(x);
                    misses = 0;
                } else {
                    misses += 1;
                    if misses > 10_000_000 {
                        return Err(GeomError::DegenerateSample { attempts: misses });
                    }
                }
            }
            Ok(out)
        }
        SampleMethod::HitAndRun => Ok(hit_and_run_chain(
            k,
            None,
            &k.interior_point(),
            count,
            cfg.burn_in_for(n),
            cfg.thinning_for(n),
            &mut rng,
        )),
    }
}

/// Seeded uniform sample of `K`; identical configs give identical streams.
pub fn sample_uniform(k: &ConvexBody, cfg: &SampleConfig) -> Result<Vec<Vector>> {
    if cfg.n_samples == 0 {
        return Err(GeomError::InvalidBody("n_samples must be at least 1".into()));
    }
    let sizes = chunk_sizes(cfg.n_samples);
    let parts = map_chunks(sizes.len(), |i| sample_chunk(k, cfg, i, sizes[i]));
    let mut out = Vec::with_capacity(cfg.n_samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn unit_square() -> ConvexBody {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        ConvexBody::hpolytope(a, Vector::from_element(4, 0.5)).unwrap()
    }

    #[test]
    fn coordinate_variance_is_one_twelfth() {
        let k = unit_square();
        for method in [SampleMethod::Exact, SampleMethod::Rejection, SampleMethod::HitAndRun] {
            let cfg = SampleConfig::new(5, 100_000).with_method(method);
            let xs = sample_uniform(&k, &cfg).unwrap();
            let m = xs.len() as f64;
            let var = xs.iter().map(|x| x[0] * x[0]).sum::<f64>() / m;
            // var of x^2 for U(-1/2,1/2): 1/80 - 1/144
            let se = ((1.0 / 80.0 - 1.0 / 144.0) / m).sqrt();
            let tol = if method == SampleMethod::HitAndRun { 6.0 * se } else { 3.0 * se };
            assert!((var - 1.0 / 12.0).abs() < tol, "{method:?}: {var}");
            assert!(xs.iter().all(|x| k.contains(x)));
        }
    }

    #[test]
    fn seeds_reproduce() {
        let k = ConvexBody::ball(3, 1.0).unwrap();
        let cfg = SampleConfig::new(11, 9000);
        assert_eq!(sample_uniform(&k, &cfg).unwrap(), sample_uniform(&k, &cfg).unwrap());
        let other = SampleConfig::new(12, 9000);
        assert_ne!(sample_uniform(&k, &cfg).unwrap(), sample_uniform(&k, &other).unwrap());
    }
}
