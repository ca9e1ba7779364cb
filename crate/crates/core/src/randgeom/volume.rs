use rand::Rng;

use super::rng::{chunk_sizes, map_chunks, substream, SampleConfig};
use super::sample::{hit_and_run_chain, BallCut};
use crate::bodies::{BodyRep, ConvexBody};
use crate::error::{GeomError, Result};
use crate::linalg::{unit_ball_volume, Vector};

/// Largest dimension handled by exact triangulated volumes.
pub const MAX_EXACT_DIM: usize = 8;

pub fn exact_volume(k: &ConvexBody) -> Result<f64> {
    if k.dim() > MAX_EXACT_DIM && k.is_polytope() {
        return Err(GeomError::TooHighDimensional { dim: k.dim() });
    }
    Ok(k.volume())
}

/// Monte Carlo volume with its standard error.
///
/// Rejection against the bounding box up to dimension four; above that a
/// telescoping product over `K ∩ r_i B` with `r_{i+1} = 2^{1/n} r_i`.
pub fn mc_volume(k: &ConvexBody, cfg: &SampleConfig) -> Result<(f64, f64)> {
    if k.dim() <= 4 {
        box_rejection(k, cfg)
    } else {
        telescoping(k, cfg)
    }
}

fn box_rejection(k: &ConvexBody, cfg: &SampleConfig) -> Result<(f64, f64)> {
    let n = k.dim();
    let (lo, hi) = k.bounding_box();
    let widths = &hi - &lo;
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(GeomError::DegenerateBody("flat bounding box".into()));
    }
    let boxvol: f64 = widths.iter().product();
    let sizes = chunk_sizes(cfg.n_samples.max(1));
    let hits: usize = map_chunks(sizes.len(), |i| {
        let mut rng = substream(cfg.seed, i as u64);
        let mut h = 0usize;
        for _ in 0..sizes[i] {
            let x = Vector::from_iterator(n, (0..n).map(|j| lo[j] + widths[j] * rng.random::<f64>()));
            if k.contains_tol(&x, 0.0) {
                h += 1;
            }
        }
        h
    })
    .into_iter()
    .sum();
    let m = cfg.n_samples.max(1) as f64;
    let p = hits as f64 / m;
    if hits == 0 {
        return Err(GeomError::DegenerateBody("no sample landed in the body".into()));
    }
    Ok((boxvol * p, boxvol * (p * (1.0 - p) / m).sqrt()))
}

/// Radius of a ball about `c` contained in `K`.
fn inner_radius(k: &ConvexBody, c: &Vector) -> f64 {
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let eig = e.inv_shape().clone().symmetric_eigen();
            eig.eigenvalues.min().sqrt() * (1.0 - e.quad(c).sqrt()).max(0.0)
        }
        _ => k.margin(c),
    }
}

fn outer_radius(k: &ConvexBody, c: &Vector) -> f64 {
    match k.rep() {
        BodyRep::Ellipsoid(e) => {
            let eig = e.inv_shape().clone().symmetric_eigen();
            eig.eigenvalues.max().sqrt() + (e.center() - c).norm()
        }
        _ => k
            .vertices()
            .expect("polytope")
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max),
    }
}

const BATCHES: usize = 20;

fn telescoping(k: &ConvexBody, cfg: &SampleConfig) -> Result<(f64, f64)> {
    let n = k.dim();
    let c = k.exact_moments().barycenter.clone();
    let r0 = inner_radius(k, &c);
    let rmax = outer_radius(k, &c);
    if !(r0 > 0.0) || !(rmax > 0.0) {
        return Err(GeomError::DegenerateBody("no interior ball".into()));
    }
    let mut radii = vec![r0];
    while *radii.last().expect("non-empty") < rmax {
        let next = radii.last().expect("non-empty") * 2f64.powf(1.0 / n as f64);
        radii.push(next.min(rmax));
    }
    let phases = radii.len() - 1;
    if phases == 0 {
        return Ok((unit_ball_volume(n) * r0.powi(n as i32), 0.0));
    }
    let per_phase = (cfg.n_samples / phases).max(BATCHES * 50);
    let per_batch = per_phase / BATCHES;
    let burn = cfg.burn_in_for(n);
    let thin = cfg.thinning_for(n);

    // job (phase, batch) -> fraction of the batch inside the previous ball
    let jobs = phases * BATCHES;
    let fractions = map_chunks(jobs, |j| {
        let phase = j / BATCHES;
        let cut = BallCut {
            center: c.clone(),
            radius: radii[phase + 1],
        };
        let mut rng = substream(cfg.seed, j as u64);
        let pts = hit_and_run_chain(k, Some(&cut), &c, per_batch, burn, thin, &mut rng);
        let inner = radii[phase];
        let inside = pts.iter().filter(|p| (*p - &c).norm() <= inner).count();
        inside as f64 / per_batch as f64
    });

    let mut log_vol = (unit_ball_volume(n) * r0.powi(n as i32)).ln();
    let mut rel_var = 0.0;
    for phase in 0..phases {
        let f = &fractions[phase * BATCHES..(phase + 1) * BATCHES];
        let mean = f.iter().sum::<f64>() / BATCHES as f64;
        if mean <= 0.0 {
            return Err(GeomError::DegenerateSample { attempts: per_phase });
        }
        let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (BATCHES as f64 - 1.0);
        log_vol -= mean.ln();
        rel_var += var / BATCHES as f64 / (mean * mean);
    }
    let est = log_vol.exp();
    Ok((est, est * rel_var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn disc_area() {
        let k = ConvexBody::ball(2, 1.0).unwrap();
        let (v, se) = mc_volume(&k, &SampleConfig::new(7, 1_000_000)).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 3.0 * se, "{v} ± {se}");
    }

    #[test]
    fn telescoping_matches_cube() {
        let n = 5;
        let mut a = Matrix::zeros(2 * n, n);
        for i in 0..n {
            a[(2 * i, i)] = 1.0;
            a[(2 * i + 1, i)] = -1.0;
        }
        let k = ConvexBody::hpolytope(a, Vector::from_element(2 * n, 1.0)).unwrap();
        let (v, se) = mc_volume(&k, &SampleConfig::new(3, 200_000)).unwrap();
        assert!((v - 32.0).abs() < 4.0 * se, "{v} ± {se}");
        assert!(se / v < 0.05);
    }
}
