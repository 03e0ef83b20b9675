//! Power-type weights, their dyadic A_p characteristic and tail behaviour.
//!
//! A weight is one of
//! * `const:c`        ω ≡ c,
//! * `pow:eps=e`      ω(z) = |z|^(e - n),
//! * `powdist:eps=e,set=file`  ω(z) = dist(z, E)^(e - n) for a finite E.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Point};
use crate::quad::{gl16, gl20, graded_left};

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    Constant { c: f64 },
    PowerOrigin { eps: f64 },
    PowerDist { eps: f64, set: Vec<Point> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    dim: usize,
    kind: WeightKind,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("weights live in dimension 1 or 2, got {dim}")))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("power weights need eps > 0, got {eps}")))
    }
}

impl Weight {
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("constant weight must be positive, got {c}")));
        }
        Ok(Weight {
            dim,
            kind: WeightKind::Constant { c },
        })
    }

    /// ω(z) = |z|^(eps - n).
    pub fn power_origin(dim: usize, eps: f64) -> Result<Self> {
        check_dim(dim)?;
        check_eps(eps)?;
        Ok(Weight {
            dim,
            kind: WeightKind::PowerOrigin { eps },
        })
    }

    /// ω(z) = dist(z, set)^(eps - n).
    pub fn power_dist(dim: usize, eps: f64, set: Vec<Point>) -> Result<Self> {
        check_dim(dim)?;
        check_eps(eps)?;
        if set.is_empty() {
            return Err(Error::invalid("powdist weight needs a nonempty set"));
        }
        if set.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::invalid("powdist set has a non-finite point"));
        }
        let set = if dim == 1 {
            let mut s: Vec<Point> = set.into_iter().map(|p| [p[0], 0.0]).collect();
            s.sort_by(|a, b| a[0].total_cmp(&b[0]));
            s.dedup();
            s
        } else {
            set
        };
        Ok(Weight {
            dim,
            kind: WeightKind::PowerDist { eps, set },
        })
    }

    /// Parses `const:1.0`, `pow:eps=0.5` or `powdist:eps=0.5,set=<file>`.
    /// The set file is a JSON list of points, `[0.1, 0.4]` or `[[0.1, 0.2], ...]`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("weight '{spec}' has no kind prefix")))?;
        let kv = parse_kv(rest);
        let num = |key: &str| -> Result<f64> {
            kv.iter()
                .find(|(k, _)| k == key)
                .ok_or_else(|| Error::Parse(format!("weight '{spec}' lacks {key}=")))?
                .1
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("weight '{spec}': {e}")))
        };
        match kind {
            "const" => {
                let c = rest
                    .trim()
                    .parse::<f64>()
                    .or_else(|_| num("c"))
                    .map_err(|_| Error::Parse(format!("weight '{spec}': bad constant")))?;
                Weight::constant(dim, c)
            }
            "pow" => Weight::power_origin(dim, num("eps")?),
            "powdist" => {
                let file = kv
                    .iter()
                    .find(|(k, _)| k == "set")
                    .ok_or_else(|| Error::Parse(format!("weight '{spec}' lacks set=")))?
                    .1
                    .clone();
                Weight::power_dist(dim, num("eps")?, read_point_set(&file)?)
            }
            other => Err(Error::Parse(format!("unknown weight kind '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, WeightKind::Constant { .. })
    }

    /// The power `eps - n` of a power weight.
    pub fn exponent(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Constant { .. } => None,
            WeightKind::PowerOrigin { eps } | WeightKind::PowerDist { eps, .. } => {
                Some(eps - self.dim as f64)
            }
        }
    }

    /// Value at `z`, or `SingularPoint` where the weight blows up.
    pub fn evaluate(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::invalid(format!(
                "point of dimension {} for a weight of dimension {}",
                z.len(),
                self.dim
            )));
        }
        let p = [z[0], if self.dim == 2 { z[1] } else { 0.0 }];
        let v = self.value_at(p);
        if v.is_infinite() {
            return Err(Error::SingularPoint { point: z.to_vec() });
        }
        Ok(v)
    }

    /// Value at `p`, `+inf` at a singular point.
    pub(crate) fn value_at(&self, p: Point) -> f64 {
        match &self.kind {
            WeightKind::Constant { c } => *c,
            WeightKind::PowerOrigin { .. } => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                radial_power(r, self.exponent().unwrap())
            }
            WeightKind::PowerDist { set, .. } => {
                let r = set
                    .iter()
                    .map(|e| (p[0] - e[0]).powi(2) + (p[1] - e[1]).powi(2))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                radial_power(r, self.exponent().unwrap())
            }
        }
    }

    /// ω(-z).
    pub fn reflect(&self) -> Weight {
        let kind = match &self.kind {
            WeightKind::PowerDist { eps, set } => {
                let mut s: Vec<Point> = set.iter().map(|p| [-p[0], -p[1]]).collect();
                if self.dim == 1 {
                    s.sort_by(|a, b| a[0].total_cmp(&b[0]));
                }
                WeightKind::PowerDist { eps: *eps, set: s }
            }
            k => k.clone(),
        };
        Weight { dim: self.dim, kind }
    }

    /// Average of ω over the cell `[-h/2, h/2]^n` centred at the origin. Used in
    /// place of ω(0) where a finite diagonal value is needed.
    pub fn cell_average_at_origin(&self, h: f64) -> f64 {
        let cube = Cube {
            lo: [-h / 2.0; 2],
            side: h,
        };
        let vol = h.powi(self.dim as i32);
        cube_integral(self, 1.0, &cube).map(|v| v / vol).unwrap_or(f64::INFINITY)
    }

    /// Compact spec string, the inverse of `parse` for the first two kinds.
    pub fn describe(&self) -> String {
        match &self.kind {
            WeightKind::Constant { c } => format!("const:{c}"),
            WeightKind::PowerOrigin { eps } => format!("pow:eps={eps}"),
            WeightKind::PowerDist { eps, set } => format!("powdist:eps={eps},|set|={}", set.len()),
        }
    }
}

fn radial_power(r: f64, a: f64) -> f64 {
    if r > 0.0 {
        r.powf(a)
    } else if a < 0.0 {
        f64::INFINITY
    } else if a == 0.0 {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn parse_kv(s: &str) -> Vec<(String, String)> {
    s.split(',')
        .filter_map(|part| {
            let (k, v) = part.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointList {
    Line(Vec<f64>),
    Plane(Vec<Vec<f64>>),
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
    let list: PointList = serde_json::from_str(&text)?;
    Ok(match list {
        PointList::Line(v) => v.into_iter().map(|x| [x, 0.0]).collect(),
        PointList::Plane(v) => v
            .into_iter()
            .map(|p| [p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)])
            .collect(),
    })
}

/// An axis-parallel cube `[lo, lo + side]^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub lo: Point,
    pub side: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApEstimate {
    /// Largest A_p product over the tested cubes; `+inf` when some average diverges.
    pub value: f64,
    pub cubes_tested: usize,
    pub worst_cube: Option<Cube>,
}

/// Dyadic estimate of the A_p characteristic
/// `sup_Q (avg_Q ω)(avg_Q ω^(-1/(p-1)))^(p-1)` over the cubes of levels
/// `0..=max_level` inside the bounding cube of `window`.
pub fn ap_constant_estimate(w: &Weight, p: f64, window: &Grid, max_level: usize) -> Result<ApEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("A_p needs 1 < p < inf, got {p}")));
    }
    if window.dim() != w.dim() {
        return Err(Error::invalid("window and weight dimensions differ"));
    }
    if max_level > 12 {
        return Err(Error::invalid("max_level above 12 is not supported"));
    }
    let n = w.dim();
    let side0 = (0..n)
        .map(|a| window.h() * (window.shape()[a] - 1) as f64)
        .fold(0.0, f64::max);
    if side0 <= 0.0 {
        return Err(Error::invalid("window has zero extent"));
    }
    let o = window.origin();
    let lo0 = [o[0], if n == 2 { o[1] } else { 0.0 }];
    let mut tested = 0usize;
    if w.is_constant() {
        for level in 0..=max_level {
            tested += 1usize << (n * level);
        }
        return Ok(ApEstimate {
            value: 1.0,
            cubes_tested: tested,
            worst_cube: Some(Cube { lo: lo0, side: side0 }),
        });
    }
    let dual = -1.0 / (p - 1.0);
    let mut best = f64::NEG_INFINITY;
    let mut worst = None;
    for level in 0..=max_level {
        let k = 1usize << level;
        let side = side0 / k as f64;
        let vol = side.powi(n as i32);
        let ky = if n == 2 { k } else { 1 };
        for j in 0..ky {
            for i in 0..k {
                let cube = Cube {
                    lo: [lo0[0] + side * i as f64, lo0[1] + side * j as f64],
                    side,
                };
                let a = cube_integral(w, 1.0, &cube)? / vol;
                let b = cube_integral(w, dual, &cube)? / vol;
                let prod = if a.is_infinite() || b.is_infinite() {
                    f64::INFINITY
                } else {
                    a * b.powf(p - 1.0)
                };
                tested += 1;
                if prod > best {
                    best = prod;
                    worst = Some(cube);
                }
            }
        }
    }
    Ok(ApEstimate {
        value: best,
        cubes_tested: tested,
        worst_cube: worst,
    })
}

/// ∫_cube ω^q, possibly `+inf`.
pub(crate) fn cube_integral(w: &Weight, q: f64, cube: &Cube) -> Result<f64> {
    let n = w.dim();
    let (x0, x1) = (cube.lo[0], cube.lo[0] + cube.side);
    let (y0, y1) = (cube.lo[1], cube.lo[1] + cube.side);
    match w.kind() {
        WeightKind::Constant { c } => Ok(c.powf(q) * cube.side.powi(n as i32)),
        WeightKind::PowerOrigin { .. } => {
            let a = w.exponent().unwrap() * q;
            Ok(if n == 1 {
                power_interval(a, x0, x1)
            } else {
                power_rect(a, x0, x1, y0, y1)
            })
        }
        WeightKind::PowerDist { set, .. } => {
            let a = w.exponent().unwrap() * q;
            if n == 1 {
                Ok(powdist_interval(a, set, x0, x1))
            } else {
                let fine = powdist_rect(a, set, [x0, x1, y0, y1], 0, 6);
                let coarse = powdist_rect(a, set, [x0, x1, y0, y1], 0, 5);
                if fine.is_infinite() || coarse.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                if (fine - coarse).abs() > 1e-6 * fine.abs() {
                    return Err(Error::QuadratureFailure(format!(
                        "powdist cube integral unresolved on {cube:?}: {fine} vs {coarse}"
                    )));
                }
                Ok(fine)
            }
        }
    }
}

/// ∫_u^v |x|^a dx.
pub(crate) fn power_interval(a: f64, u: f64, v: f64) -> f64 {
    debug_assert!(u <= v);
    if u == v {
        return 0.0;
    }
    let crosses = u <= 0.0 && v >= 0.0;
    if a <= -1.0 && crosses {
        return f64::INFINITY;
    }
    if a == -1.0 {
        return (v.abs().ln() - u.abs().ln()).abs();
    }
    let prim = |x: f64| x.signum() * x.abs().powf(a + 1.0) / (a + 1.0);
    let exact = prim(v) - prim(u);
    // far from the origin the primitive loses digits to cancellation
    let m = u.abs().min(v.abs());
    if !crosses && m > 4.0 * (v - u) {
        gl20().integrate(u, v, |x| x.abs().powf(a))
    } else {
        exact
    }
}

fn powdist_interval(a: f64, set: &[Point], x0: f64, x1: f64) -> f64 {
    // cut at midpoints between consecutive points; on each piece the nearest
    // point is fixed
    let mut total = 0.0;
    let mut lo = x0;
    for (k, e) in set.iter().enumerate() {
        let hi = match set.get(k + 1) {
            Some(next) => 0.5 * (e[0] + next[0]),
            None => f64::INFINITY,
        };
        let (a0, b0) = (lo.max(x0), hi.min(x1));
        if b0 > a0 {
            total += power_interval(a, a0 - e[0], b0 - e[0]);
        }
        lo = hi;
        if lo >= x1 {
            break;
        }
    }
    total
}

/// ∫_0^m (1 + t^2)^(a/2) dt.
fn tangent_integral(a: f64, m: f64) -> f64 {
    let rule = gl20();
    let f = |t: f64| (1.0 + t * t).powf(0.5 * a);
    if m <= 1.0 {
        return rule.integrate(0.0, m, f);
    }
    let mut s = rule.integrate(0.0, 1.0, f);
    let mut lo = 1.0;
    while lo < m {
        let hi = (2.0 * lo).min(m);
        s += rule.integrate(lo, hi, f);
        lo = hi;
    }
    s
}

/// ∫_[0,u]×[0,v] |z|^a dz for a > -2, by the polar formula written in
/// tangent form.
fn corner_integral(a: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    (u.powf(a + 2.0) * tangent_integral(a, v / u) + v.powf(a + 2.0) * tangent_integral(a, u / v)) / (a + 2.0)
}

fn signed_corner(a: f64, x: f64, y: f64) -> f64 {
    x.signum() * y.signum() * corner_integral(a, x.abs(), y.abs())
}

fn rect_dist_to_origin(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let dx = if x0 > 0.0 { x0 } else if x1 < 0.0 { -x1 } else { 0.0 };
    let dy = if y0 > 0.0 { y0 } else if y1 < 0.0 { -y1 } else { 0.0 };
    (dx * dx + dy * dy).sqrt()
}

/// ∫ over a rectangle of |z|^a.
pub(crate) fn power_rect(a: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let side = (x1 - x0).max(y1 - y0);
    let d = rect_dist_to_origin(x0, x1, y0, y1);
    if d >= side {
        return gl16().integrate_rect(x0, x1, y0, y1, |x, y| (x * x + y * y).sqrt().powf(a));
    }
    if a <= -2.0 {
        if d == 0.0 {
            return f64::INFINITY;
        }
        let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        return power_rect(a, x0, xm, y0, ym)
            + power_rect(a, xm, x1, y0, ym)
            + power_rect(a, x0, xm, ym, y1)
            + power_rect(a, xm, x1, ym, y1);
    }
    signed_corner(a, x1, y1) - signed_corner(a, x0, y1) - signed_corner(a, x1, y0) + signed_corner(a, x0, y0)
}

fn rect_minmax_dist(r: [f64; 4], e: Point) -> (f64, f64) {
    let dmin = rect_dist_to_origin(r[0] - e[0], r[1] - e[0], r[2] - e[1], r[3] - e[1]);
    let fx = (r[0] - e[0]).abs().max((r[1] - e[0]).abs());
    let fy = (r[2] - e[1]).abs().max((r[3] - e[1]).abs());
    (dmin, (fx * fx + fy * fy).sqrt())
}

fn powdist_rect(a: f64, set: &[Point], r: [f64; 4], depth: usize, max_depth: usize) -> f64 {
    let c = [0.5 * (r[0] + r[1]), 0.5 * (r[2] + r[3])];
    let (mut owner, mut best) = (0, f64::INFINITY);
    for (k, e) in set.iter().enumerate() {
        let d = (c[0] - e[0]).powi(2) + (c[1] - e[1]).powi(2);
        if d < best {
            best = d;
            owner = k;
        }
    }
    let e = set[owner];
    let (_, far) = rect_minmax_dist(r, e);
    let owned = set
        .iter()
        .enumerate()
        .all(|(k, other)| k == owner || rect_minmax_dist(r, *other).0 > far);
    if owned {
        return power_rect(a, r[0] - e[0], r[1] - e[0], r[2] - e[1], r[3] - e[1]);
    }
    let side = (r[1] - r[0]).max(r[3] - r[2]);
    if depth == max_depth {
        let clear = set.iter().all(|p| rect_minmax_dist(r, *p).0 >= side);
        if clear {
            return gl16().integrate_rect(r[0], r[1], r[2], r[3], |x, y| {
                let d = set
                    .iter()
                    .map(|p| (x - p[0]).powi(2) + (y - p[1]).powi(2))
                    .fold(f64::INFINITY, f64::min);
                d.sqrt().powf(a)
            });
        }
        return power_rect(a, r[0] - e[0], r[1] - e[0], r[2] - e[1], r[3] - e[1]);
    }
    let (xm, ym) = (c[0], c[1]);
    powdist_rect(a, set, [r[0], xm, r[2], ym], depth + 1, max_depth)
        + powdist_rect(a, set, [xm, r[1], r[2], ym], depth + 1, max_depth)
        + powdist_rect(a, set, [r[0], xm, ym, r[3]], depth + 1, max_depth)
        + powdist_rect(a, set, [xm, r[1], ym, r[3]], depth + 1, max_depth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub class: TailClass,
    /// ∫ over `rho < |x| < W_k` of ω(x)|x|^(-sp), one entry per window.
    pub partial_integrals: Vec<f64>,
}

/// Classifies `∫_{|x| > rho} ω(x) |x|^(-sp) dx` from its truncations at the
/// radii in `windows` (increasing, at least three). Finite when successive
/// increments shrink by a factor below 0.9, infinite when they never shrink.
pub fn tail_integrability(w: &Weight, s: f64, p: f64, rho: f64, windows: &[f64]) -> Result<TailReport> {
    if windows.len() < 3 {
        return Err(Error::invalid("tail test needs at least three window radii"));
    }
    if !(rho > 0.0) || windows[0] <= rho || windows.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("window radii must increase and exceed rho"));
    }
    if !(s > 0.0 && p >= 1.0) {
        return Err(Error::invalid("tail test needs s > 0 and p >= 1"));
    }
    let sp = s * p;
    let mut partial = Vec::with_capacity(windows.len());
    let mut acc = 0.0;
    let mut lo = rho;
    for &hi in windows {
        acc += radial_shell(w, sp, lo, hi);
        partial.push(acc);
        lo = hi;
    }
    let mut inc = vec![partial[0]];
    inc.extend(partial.windows(2).map(|w| w[1] - w[0]));
    let inc = &inc[1..];
    let ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let class = if inc.iter().any(|v| v.is_infinite()) || ratios.iter().all(|&r| r >= 1.0 - 1e-9) {
        TailClass::Infinite
    } else if ratios.iter().all(|&r| r < 0.9) {
        TailClass::Finite
    } else {
        TailClass::Inconclusive
    };
    Ok(TailReport {
        class,
        partial_integrals: partial,
    })
}

/// ∫_{lo < |x| < hi} ω(x) |x|^(-sp) dx.
fn radial_shell(w: &Weight, sp: f64, lo: f64, hi: f64) -> f64 {
    let n = w.dim();
    // ∫_lo^hi r^b dr
    let pow_int = |b: f64| {
        if (b + 1.0).abs() < 1e-14 {
            (hi / lo).ln()
        } else {
            (hi.powf(b + 1.0) - lo.powf(b + 1.0)) / (b + 1.0)
        }
    };
    let sphere = if n == 1 { 2.0 } else { 2.0 * PI };
    let shell = |b: f64| sphere * pow_int(b + n as f64 - 1.0);
    match w.kind() {
        WeightKind::Constant { c } => c * shell(-sp),
        WeightKind::PowerOrigin { .. } => shell(w.exponent().unwrap() - sp),
        WeightKind::PowerDist { set, .. } => {
            let a = w.exponent().unwrap();
            if n == 1 {
                // both half-lines, cutting where the integrand is singular
                let mut total = 0.0;
                for sign in [1.0, -1.0] {
                    let g = |r: f64| w.value_at([sign * r, 0.0]) * r.powf(-sp);
                    let mut cuts: Vec<f64> = set
                        .iter()
                        .map(|e| sign * e[0])
                        .filter(|&x| x > lo && x < hi)
                        .collect();
                    cuts.push(lo);
                    cuts.push(hi);
                    cuts.sort_by(f64::total_cmp);
                    for seg in cuts.windows(2) {
                        let (u, v) = (seg[0], seg[1]);
                        let m = 0.5 * (u + v);
                        total += graded_left(u, m, a.min(0.0), &|x| g(x))
                            + graded_left(-v, -m, a.min(0.0), &|x| g(-x));
                    }
                }
                total
            } else {
                let rule = gl20();
                let mut total = 0.0;
                let mut a0 = lo;
                while a0 < hi {
                    let b0 = (2.0 * a0).min(hi);
                    total += rule.integrate(a0, b0, |r| {
                        let k = 256;
                        let ang: f64 = (0..k)
                            .map(|j| {
                                let t = 2.0 * PI * (j as f64 + 0.5) / k as f64;
                                w.value_at([r * t.cos(), r * t.sin()]).min(1e300)
                            })
                            .sum::<f64>()
                            * (2.0 * PI / k as f64);
                        ang * r * r.powf(-sp)
                    });
                    a0 = b0;
                }
                total
            }
        }
    }
}
