//! Test functions: seeded band-limited fields and smooth bumps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::quad::Rule;

pub const MODES: usize = 8;

/// `Σ_{k=1}^{8} a_k cos(2πkx) + b_k sin(2πkx)` with unit-normal coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandLimited {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl BandLimited {
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = 0.0;
        for k in 0..self.cos.len() {
            let a = 2.0 * std::f64::consts::PI * (k + 1) as f64 * x;
            v += self.cos[k] * a.cos() + self.sin[k] * a.sin();
        }
        v
    }
}

/// `count` fields drawn in order from one ChaCha8 stream, so field `i` is the
/// same whatever `count` is.
pub fn band_limited_family(count: usize, seed: u64) -> Vec<BandLimited> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut draw = || -> Vec<f64> { (0..MODES).map(|_| StandardNormal.sample(&mut rng)).collect() };
            let cos = draw();
            let sin = draw();
            BandLimited { cos, sin }
        })
        .collect()
}

/// `exp(-1/(1-u^2))` on (-1, 1), zero outside.
pub fn standard_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// ∫ standard_bump over (-1, 1).
pub fn standard_bump_mass() -> f64 {
    let rule = Rule::legendre(32);
    let panels = 64;
    (0..panels)
        .map(|k| {
            let a = -1.0 + 2.0 * k as f64 / panels as f64;
            rule.integrate(a, a + 2.0 / panels as f64, standard_bump)
        })
        .sum()
}

/// A smooth bump supported in `(lo, hi)`, scaled so that ∫ ψ = `mass`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64, mass: f64) -> Self {
        Bump { lo, hi, mass }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let half = 0.5 * (self.hi - self.lo);
        let u = (x - 0.5 * (self.lo + self.hi)) / half;
        self.mass / (half * standard_bump_mass()) * standard_bump(u)
    }

    /// `ψ(2^n x)`.
    pub fn dilated(&self, n: u32) -> Bump {
        let k = 2f64.powi(-(n as i32));
        Bump {
            lo: self.lo * k,
            hi: self.hi * k,
            mass: self.mass * k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_a_prefix_stream() {
        let a = band_limited_family(3, 42);
        let b = band_limited_family(5, 42);
        assert_eq!(a[..], b[..3]);
        assert_ne!(a[0], a[1]);
        assert!((a[0].eval(0.25) - a[0].eval(1.25)).abs() < 1e-12);
    }

    #[test]
    fn bump_mass() {
        // reference value of ∫ exp(-1/(1-u^2)) du over (-1, 1)
        assert!((standard_bump_mass() - 0.443_993_816_168_079_4).abs() < 1e-12);
        let b = Bump::new(0.02, 0.98, 4.0).dilated(2);
        let n = 200_000;
        let h = 0.25 / n as f64;
        let riemann: f64 = (0..n).map(|i| b.eval((i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((riemann - 1.0).abs() < 1e-9);
        assert_eq!(b.eval(0.0), 0.0);
    }
}
