//! Seeded point sampling and scan configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::levi::DEFAULT_TOL_RANK;
use crate::potential::{CPoint, PolyPotential, C64};

/// Points with `ρ` at or below this value are rejected as outside `M_*`.
pub const RHO_FLOOR: f64 = 1e-12;

/// Knobs shared by grid scans and checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    /// Half-width of the real `2n`-cube samples are drawn from.
    pub box_radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol_rank: f64,
    pub tol_ma: f64,
    /// Integrator step.
    pub step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            box_radius: 1.0,
            samples: 1000,
            seed: 42,
            tol_rank: DEFAULT_TOL_RANK,
            tol_ma: 1e-9,
            step: 1e-3,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        for (name, v) in [
            ("box radius", self.box_radius),
            ("tol-rank", self.tol_rank),
            ("tol-ma", self.tol_ma),
            ("step", self.step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Deterministic sampler; identical seeds give identical point sequences on
/// every platform.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn point_in_box(&mut self, n: usize, radius: f64) -> CPoint {
        CPoint::new(
            (0..n)
                .map(|_| {
                    C64::new(
                        self.rng.random_range(-radius..=radius),
                        self.rng.random_range(-radius..=radius),
                    )
                })
                .collect(),
        )
    }

    pub fn uniform_box(&mut self, n: usize, radius: f64, count: usize) -> Vec<CPoint> {
        (0..count).map(|_| self.point_in_box(n, radius)).collect()
    }

    /// Uniform points of the cube with `ρ > RHO_FLOOR`.
    pub fn uniform_box_in_domain(&mut self, p: &PolyPotential, radius: f64, count: usize) -> Vec<CPoint> {
        self.uniform_box_where(p, radius, count, |rho| rho > RHO_FLOOR)
    }

    /// Rejection sampling on the value of `ρ`. Gives up after `1000 · count`
    /// draws, so the result may be shorter than requested.
    pub fn uniform_box_where<F>(&mut self, p: &PolyPotential, radius: f64, count: usize, accept: F) -> Vec<CPoint>
    where
        F: Fn(f64) -> bool,
    {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count.saturating_mul(1000) {
            if out.len() == count {
                break;
            }
            let z = self.point_in_box(p.dim(), radius);
            if p.evaluate(&z).map(&accept).unwrap_or(false) {
                out.push(z);
            }
        }
        out
    }

    /// Points with `r_min ≤ |z| ≤ r_max`, uniform in direction.
    pub fn shell(&mut self, n: usize, r_min: f64, r_max: f64, count: usize) -> Vec<CPoint> {
        (0..count)
            .map(|_| {
                let d = self.direction(n);
                let r = self.rng.random_range(r_min..=r_max);
                CPoint::new(d.coords().iter().map(|c| c * r).collect())
            })
            .collect()
    }

    /// Uniform direction on the unit sphere of `C^n`.
    pub fn direction(&mut self, n: usize) -> CPoint {
        loop {
            let z = self.point_in_box(n, 1.0);
            let r = z.norm();
            if r > 1e-3 && r <= 1.0 {
                return CPoint::new(z.coords().iter().map(|c| c / r).collect());
            }
        }
    }

    /// Points on `{ρ = level}` found by bisection along random rays from the
    /// origin. Requires `ρ(0) < level` and `ρ` eventually exceeding `level`
    /// along each ray.
    pub fn on_level_set(&mut self, p: &PolyPotential, level: f64, count: usize) -> Result<Vec<CPoint>> {
        let origin = CPoint::new(vec![C64::new(0.0, 0.0); p.dim()]);
        if p.evaluate(&origin)? >= level {
            return Err(Error::Config(format!("rho(0) is not below the level {level}")));
        }
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let d = self.direction(p.dim());
            let at = |t: f64| CPoint::new(d.coords().iter().map(|c| c * t).collect());
            let mut hi = 1.0;
            let mut tries = 0;
            while p.evaluate(&at(hi))? <= level {
                hi *= 2.0;
                tries += 1;
                if tries > 60 {
                    return Err(Error::Config(format!("rho does not reach {level} along a ray")));
                }
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if p.evaluate(&at(mid))? < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(at(0.5 * (lo + hi)));
        }
        Ok(out)
    }
}

/// Complex flow parameters for homogeneity checks; purely imaginary values
/// are always present.
pub fn default_lambdas() -> Vec<C64> {
    vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(1.0, 1.0),
        C64::new(-0.5, 0.0),
        C64::new(0.0, 0.3),
        C64::new(-0.7, 0.2),
        C64::new(0.25, -1.1),
        C64::new(0.0, 2.0),
    ]
}

/// Tensor grid with `per_axis` points per real axis on `[-radius, radius]`.
pub fn tensor_grid(n: usize, radius: f64, per_axis: usize) -> Vec<CPoint> {
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.0]
    } else {
        (0..per_axis)
            .map(|k| -radius + 2.0 * radius * k as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let dims = 2 * n;
    let total = per_axis.pow(dims as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims];
    for _ in 0..total {
        out.push(CPoint::from_parts(
            &(0..n).map(|j| (axis[idx[2 * j]], axis[idx[2 * j + 1]])).collect::<Vec<_>>(),
        ));
        for d in (0..dims).rev() {
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn same_seed_same_points() {
        let a = Sampler::new(3).uniform_box(2, 1.0, 10);
        let b = Sampler::new(3).uniform_box(2, 1.0, 10);
        assert_eq!(a, b);
        assert_ne!(a, Sampler::new(4).uniform_box(2, 1.0, 10));
    }

    #[test]
    fn level_set_points_hit_the_level() {
        let p = catalog::weighted_quartic();
        for z in Sampler::new(1).on_level_set(&p, 1.0, 20).unwrap() {
            assert!((p.evaluate(&z).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_size_and_no_zero_coordinates_for_even_counts() {
        let g = tensor_grid(2, 1.0, 4);
        assert_eq!(g.len(), 256);
        assert!(g.iter().all(|z| z.coords().iter().all(|c| c.re != 0.0 && c.im != 0.0)));
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = ScanConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.samples = 0;
        assert!(cfg.validate().is_err());
        cfg.samples = 1;
        cfg.tol_ma = 0.0;
        assert!(cfg.validate().is_err());
    }
}
