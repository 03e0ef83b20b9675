//! Discrete fractional seminorms.
//!
//! Every double sum here has the form
//!
//! ```text
//! Σ_{x ≠ y inside} |f(x) - f(y)|^p K(x, y) h^(2n),
//! K(x, y) = ω(x - y) |x - y|^(-beta) (|x - y| + |R(x) - R(y)|)^(-gamma),
//! ```
//!
//! so one engine serves the weighted seminorm (`beta = 0, gamma = sp`), the
//! classical Gagliardo seminorm (`ω = 1, beta = n + sp`) and the split kernel
//! of the main boundedness theorem (`beta = n - eps, gamma = eps + sp`).
//! The offset-dependent part is tabulated once per grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{boundary_distance, check_same_mask, DomainMask, Grid, RadiusField, ScalarField};
use crate::maxop::ProductField;
use crate::weights::{Weight, WeightKind};

/// `t -> t^p` with the common exponents special-cased.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PowP {
    p: f64,
    kind: u8,
}

impl PowP {
    pub fn new(p: f64) -> Self {
        let kind = if p == 1.0 {
            1
        } else if p == 2.0 {
            2
        } else if p == 3.0 {
            3
        } else if p == 1.5 {
            4
        } else {
            0
        };
        PowP { p, kind }
    }

    #[inline]
    pub fn of(&self, t: f64) -> f64 {
        match self.kind {
            1 => t,
            2 => t * t,
            3 => t * t * t,
            4 => t * t.sqrt(),
            _ => t.powf(self.p),
        }
    }
}

/// Shape of a pair kernel, independent of the grid.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    /// `None` means ω ≡ 1.
    pub weight: Option<Weight>,
    pub beta: f64,
    pub gamma: f64,
}

impl KernelSpec {
    /// ω(x - y) D^(-sp).
    pub fn weighted(s: f64, p: f64, weight: &Weight) -> Self {
        KernelSpec {
            weight: Some(weight.clone()),
            beta: 0.0,
            gamma: s * p,
        }
    }

    /// |x - y|^(-n - sp).
    pub fn classical(dim: usize, s: f64, p: f64) -> Self {
        KernelSpec {
            weight: None,
            beta: dim as f64 + s * p,
            gamma: 0.0,
        }
    }

    /// (|x - y| + |R(x) - R(y)|)^(-eps - sp) |x - y|^(-(n - eps)).
    pub fn split(dim: usize, s: f64, p: f64, eps: f64) -> Self {
        KernelSpec {
            weight: None,
            beta: dim as f64 - eps,
            gamma: eps + s * p,
        }
    }

    fn symmetric(&self) -> bool {
        !matches!(
            self.weight.as_ref().map(|w| w.kind()),
            Some(WeightKind::PowerDist { .. })
        )
    }
}

/// A kernel tabulated on the offsets of one grid.
pub(crate) struct PairKernel<'a> {
    nx: usize,
    ny: usize,
    /// ω |d|^-beta, and |d|^-gamma folded in when there is no radius
    table: Vec<f64>,
    /// |d|^-gamma and |d|, only with a radius
    plain: Vec<f64>,
    len: Vec<f64>,
    gamma: f64,
    radius: Option<&'a [f64]>,
    pub symmetric: bool,
}

impl<'a> PairKernel<'a> {
    pub fn new(grid: &Grid, spec: &KernelSpec, radius: Option<&'a RadiusField>) -> Result<Self> {
        if let Some(w) = &spec.weight {
            if w.dim() != grid.dim() {
                return Err(Error::invalid("weight and grid dimensions differ"));
            }
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let (wx, wy) = (2 * nx - 1, 2 * ny - 1);
        let h = grid.h();
        let with_r = radius.is_some() && spec.gamma != 0.0;
        let mut table = vec![0.0; wx * wy];
        let mut plain = if with_r { vec![0.0; wx * wy] } else { Vec::new() };
        let mut len = if with_r { vec![0.0; wx * wy] } else { Vec::new() };
        for oy in 0..wy {
            for ox in 0..wx {
                let dx = ox as f64 - (nx - 1) as f64;
                let dy = oy as f64 - (ny - 1) as f64;
                let k = ox + wx * oy;
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                let z = [dx * h, dy * h];
                let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let w = match &spec.weight {
                    None => 1.0,
                    Some(w) => {
                        let v = w.value_at(z);
                        if v.is_infinite() {
                            return Err(Error::SingularPoint {
                                point: z[..grid.dim()].to_vec(),
                            });
                        }
                        v
                    }
                };
                let mut t = w * r.powf(-spec.beta);
                if with_r {
                    plain[k] = r.powf(-spec.gamma);
                    len[k] = r;
                } else {
                    t *= r.powf(-spec.gamma);
                }
                table[k] = t;
            }
        }
        Ok(PairKernel {
            nx,
            ny,
            table,
            plain,
            len,
            gamma: spec.gamma,
            radius: if with_r { radius.map(|r| r.values()) } else { None },
            symmetric: spec.symmetric(),
        })
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // offset of j - i
        let (ix, iy) = (i % self.nx, i / self.nx);
        let (jx, jy) = (j % self.nx, j / self.nx);
        let ox = jx + self.nx - 1 - ix;
        let oy = jy + self.ny - 1 - iy;
        ox + (2 * self.nx - 1) * oy
    }

    /// K(x_i, x_j) for i != j. The table is indexed by x_i - x_j, the
    /// argument of ω.
    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        let o = self.offset(j, i);
        match self.radius {
            None => self.table[o],
            Some(r) => {
                let dr = (r[i] - r[j]).abs();
                if dr == 0.0 {
                    self.table[o] * self.plain[o]
                } else {
                    self.table[o] * (self.len[o] + dr).powf(-self.gamma)
                }
            }
        }
    }
}

/// Σ_{x≠y} |f(x) - f(y)|^p K(x, y) h^(2n) over the inside nodes of `mask`.
///
/// When fewer than half the nodes carry a nonzero value the sum is split as
/// S×S plus S×(G∖S) with the zero side factored out, which is exact.
pub(crate) fn pair_energy(mask: &DomainMask, values: &[f64], kernel: &PairKernel, p: f64) -> f64 {
    let pw = PowP::new(p);
    let nodes = mask.nodes();
    let h = mask.grid().h();
    let scale = h.powi(2 * mask.grid().dim() as i32);
    let support: Vec<usize> = nodes.iter().copied().filter(|&i| values[i] != 0.0).collect();
    let mut total = 0.0;
    if support.len() * 2 < nodes.len() {
        let flags: Vec<bool> = {
            let mut f = vec![false; values.len()];
            for &i in &support {
                f[i] = true;
            }
            f
        };
        for &x in &support {
            let fx = values[x];
            let mut row = 0.0;
            for &y in &support {
                if y != x {
                    row += pw.of((fx - values[y]).abs()) * kernel.k(x, y);
                }
            }
            let mut cross = 0.0;
            for &y in nodes {
                if !flags[y] {
                    cross += kernel.k(x, y) + kernel.k(y, x);
                }
            }
            total += row + pw.of(fx.abs()) * cross;
        }
    } else if kernel.symmetric {
        for (a, &x) in nodes.iter().enumerate() {
            let fx = values[x];
            let mut row = 0.0;
            for &y in &nodes[a + 1..] {
                row += pw.of((fx - values[y]).abs()) * kernel.k(x, y);
            }
            total += 2.0 * row;
        }
    } else {
        for &x in nodes {
            let fx = values[x];
            let mut row = 0.0;
            for &y in nodes {
                if y != x {
                    row += pw.of((fx - values[y]).abs()) * kernel.k(x, y);
                }
            }
            total += row;
        }
    }
    total * scale
}

/// Parameters of the weighted seminorm
/// `Σ |f(x) - f(y)|^p D^(-sp) ω(x - y) h^(2n)`, where `D = |x - y|`, or
/// `|x - y| + |R(x) - R(y)|` when a radius is given.
#[derive(Clone, Debug)]
pub struct SeminormParams {
    pub s: f64,
    pub p: f64,
    pub weight: Weight,
    pub radius: Option<RadiusField>,
}

impl SeminormParams {
    pub fn new(s: f64, p: f64, weight: Weight) -> Result<Self> {
        if !(s > 0.0 && s <= 2.0) {
            return Err(Error::invalid(format!("s must lie in (0, 2], got {s}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
        }
        Ok(SeminormParams {
            s,
            p,
            weight,
            radius: None,
        })
    }

    pub fn with_radius(mut self, r: RadiusField) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::weighted(self.s, self.p, &self.weight)
    }
}

/// `(Σ |f|^p h^n)^(1/p)` over the inside nodes.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must lie in [1, inf), got {p}")));
    }
    Ok(lp_norm_pow(f, p).powf(1.0 / p))
}

pub(crate) fn lp_norm_pow(f: &ScalarField, p: f64) -> f64 {
    let pw = PowP::new(p);
    let n = f.grid().dim() as i32;
    f.mask().nodes().iter().map(|&i| pw.of(f.get(i).abs())).sum::<f64>() * f.grid().h().powi(n)
}

/// Double sum with an arbitrary kernel, p-th power.
pub fn kernel_energy(f: &ScalarField, spec: &KernelSpec, p: f64, radius: Option<&RadiusField>) -> Result<f64> {
    if let Some(r) = radius {
        check_same_mask(f.mask(), r.mask())?;
    }
    let kernel = PairKernel::new(f.grid(), spec, radius)?;
    Ok(pair_energy(f.mask(), f.values(), &kernel, p))
}

/// `|f|^p_{W^{s,p,ω}}`, the p-th power of the weighted seminorm.
pub fn weighted_seminorm_pow(f: &ScalarField, params: &SeminormParams) -> Result<f64> {
    kernel_energy(f, &params.kernel(), params.p, params.radius.as_ref())
}

pub fn weighted_seminorm(f: &ScalarField, params: &SeminormParams) -> Result<f64> {
    Ok(weighted_seminorm_pow(f, params)?.powf(1.0 / params.p))
}

/// `(‖f‖_p^p + |f|^p)^(1/p)`.
pub fn sobolev_norm(f: &ScalarField, params: &SeminormParams) -> Result<f64> {
    Ok((lp_norm_pow(f, params.p) + weighted_seminorm_pow(f, params)?).powf(1.0 / params.p))
}

/// Gagliardo seminorm with kernel `|x - y|^(-n - sp)`, p-th power.
pub fn classical_seminorm_pow(f: &ScalarField, s: f64, p: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) || !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("classical seminorm needs 0 < s < 1 and p >= 1, got s={s}, p={p}")));
    }
    kernel_energy(f, &KernelSpec::classical(f.grid().dim(), s, p), p, None)
}

pub fn classical_seminorm(f: &ScalarField, s: f64, p: f64) -> Result<f64> {
    Ok(classical_seminorm_pow(f, s, p)?.powf(1.0 / p))
}

/// `S_R f(x, y) = |f(x) - f(y)| / D^s` on G × G (one-dimensional G), zero on
/// the diagonal.
pub fn difference_field(f: &ScalarField, s: f64, radius: Option<&RadiusField>) -> Result<ProductField> {
    if let Some(r) = radius {
        check_same_mask(f.mask(), r.mask())?;
    }
    if f.grid().dim() != 1 {
        return Err(Error::invalid("difference fields are one-dimensional"));
    }
    let h = f.grid().h();
    let rv = radius.map(|r| r.values());
    ProductField::from_fn(f.mask(), |x, y| {
        if x == y {
            return 0.0;
        }
        let mut d = (x as f64 - y as f64).abs() * h;
        if let Some(r) = rv {
            d += (r[x] - r[y]).abs();
        }
        (f.get(x) - f.get(y)).abs() / d.powf(s)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyPair {
    /// `Σ |f(x)|^p dist(x, ∂I)^(-σp) h`
    pub lhs: f64,
    /// `|f|^p_{σ,p}` on I
    pub rhs: f64,
}

/// Both sides of the fractional Hardy inequality on the interval `interval`
/// (a one-dimensional mask on the grid of `f`).
pub fn hardy_functional(f: &ScalarField, sigma: f64, p: f64, interval: &Arc<DomainMask>) -> Result<HardyPair> {
    if f.grid() != interval.grid() {
        return Err(Error::MaskMismatch);
    }
    if interval.grid().dim() != 1 {
        return Err(Error::invalid("the Hardy functional is one-dimensional"));
    }
    if !(sigma > 0.0 && sigma < 1.0 && p >= 1.0) {
        return Err(Error::invalid("need 0 < sigma < 1 and p >= 1"));
    }
    let g = ScalarField::new(interval, f.values().to_vec())?;
    let dist = boundary_distance(interval);
    let pw = PowP::new(p);
    let h = interval.grid().h();
    let lhs = interval
        .nodes()
        .iter()
        .map(|&i| pw.of(g.get(i).abs()) * dist.get(i).powf(-sigma * p))
        .sum::<f64>()
        * h;
    let rhs = classical_seminorm_pow(&g, sigma, p)?;
    Ok(HardyPair { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainMask;

    fn brute(f: &ScalarField, spec: &KernelSpec, p: f64, r: Option<&RadiusField>) -> f64 {
        let g = f.grid();
        let h = g.h();
        let n = g.dim() as i32;
        let mut s = 0.0;
        for &x in f.mask().nodes() {
            for &y in f.mask().nodes() {
                if x == y {
                    continue;
                }
                let (px, py) = (g.coord(x), g.coord(y));
                let z = [px[0] - py[0], px[1] - py[1]];
                let d = z[0].hypot(z[1]);
                let w = spec.weight.as_ref().map(|w| w.value_at(z)).unwrap_or(1.0);
                let big = d + r.map(|r| (r.get(x) - r.get(y)).abs()).unwrap_or(0.0);
                s += (f.get(x) - f.get(y)).abs().powf(p) * w * d.powf(-spec.beta) * big.powf(-spec.gamma);
            }
        }
        s * h.powi(2 * n)
    }

    #[test]
    fn engine_matches_brute_force() {
        let mask = DomainMask::full(Grid::line(0.0, 0.05, 21).unwrap());
        let f = ScalarField::from_fn(&mask, |p| (4.0 * p[0]).sin() + p[0] * p[0]).unwrap();
        let r = RadiusField::boundary(&mask).unwrap();
        let w = Weight::power_origin(1, 0.4).unwrap();
        let pd = Weight::power_dist(1, 0.6, vec![[0.013, 0.0], [-0.31, 0.0]]).unwrap();
        for spec in [
            KernelSpec::weighted(0.6, 1.5, &w),
            KernelSpec::classical(1, 0.3, 2.0),
            KernelSpec::split(1, 0.7, 3.0, 0.3),
            KernelSpec::weighted(0.5, 2.0, &pd),
        ] {
            for rr in [None, Some(&r)] {
                let fast = kernel_energy(&f, &spec, 1.5, rr).unwrap();
                let slow = brute(&f, &spec, 1.5, rr);
                assert!((fast - slow).abs() < 1e-12 * slow, "{spec:?}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn support_aware_path_is_exact() {
        let mask = DomainMask::full(Grid::plane([0.0, 0.0], 0.1, [9, 8]).unwrap());
        let f = ScalarField::from_fn(&mask, |p| if p[0] < 0.25 && p[1] > 0.3 { 1.0 + p[1] } else { 0.0 }).unwrap();
        let pd = Weight::power_dist(2, 1.5, vec![[0.05, 0.05]]).unwrap();
        let spec = KernelSpec::weighted(0.4, 2.0, &pd);
        let fast = kernel_energy(&f, &spec, 2.0, None).unwrap();
        let slow = brute(&f, &spec, 2.0, None);
        assert!((fast - slow).abs() < 1e-12 * slow);
    }

    #[test]
    fn constant_function_has_zero_seminorm() {
        let mask = DomainMask::full(Grid::line(0.0, 0.1, 10).unwrap());
        let f = ScalarField::from_fn(&mask, |_| 3.0).unwrap();
        let params = SeminormParams::new(0.5, 2.0, Weight::constant(1, 1.0).unwrap()).unwrap();
        assert_eq!(weighted_seminorm(&f, &params).unwrap(), 0.0);
        assert!((lp_norm(&f, 2.0).unwrap() - (9.0f64 * 1.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn classical_equals_weighted_with_shifted_exponent() {
        let mask = DomainMask::full(Grid::line(0.0, 1.0 / 64.0, 64).unwrap());
        let f = ScalarField::from_fn(&mask, |p| (6.0 * p[0]).cos() * p[0]).unwrap();
        let (s, p) = (0.3, 2.0);
        let classical = classical_seminorm_pow(&f, s, p).unwrap();
        for eps in [0.2, 0.5, 0.9] {
            let params = SeminormParams::new(s + eps / p, p, Weight::power_origin(1, eps).unwrap()).unwrap();
            let weighted = weighted_seminorm_pow(&f, &params).unwrap();
            assert!((weighted - classical).abs() < 1e-10 * classical);
        }
    }

    #[test]
    fn singular_offsets_are_errors() {
        let mask = DomainMask::full(Grid::line(0.0, 0.25, 5).unwrap());
        let f = ScalarField::from_fn(&mask, |p| p[0]).unwrap();
        let w = Weight::power_dist(1, 0.5, vec![[0.5, 0.0]]).unwrap();
        let params = SeminormParams::new(0.5, 2.0, w).unwrap();
        assert!(matches!(weighted_seminorm(&f, &params), Err(Error::SingularPoint { .. })));
        assert!(SeminormParams::new(2.5, 2.0, Weight::constant(1, 1.0).unwrap()).is_err());
    }

    #[test]
    fn difference_field_values() {
        let mask = DomainMask::full(Grid::line(0.0, 0.5, 3).unwrap());
        let f = ScalarField::new(&mask, vec![0.0, 1.0, 3.0]).unwrap();
        let d = difference_field(&f, 0.5, None).unwrap();
        assert_eq!(d.get(1, 1), 0.0);
        assert!((d.get(0, 2) - 3.0).abs() < 1e-15);
        assert!((d.get(2, 1) - 2.0 / 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hardy_pair_is_positive() {
        let mask = DomainMask::open_interval(0.0, 1.0, 1.0 / 128.0).unwrap();
        let f = ScalarField::from_fn(&mask, |p| (std::f64::consts::PI * p[0]).sin()).unwrap();
        let pair = hardy_functional(&f, 0.6, 3.0, &mask).unwrap();
        assert!(pair.lhs > 0.0 && pair.rhs > 0.0);
    }
}
