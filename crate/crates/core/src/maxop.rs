//! The local maximal operator M_R and its relatives.
//!
//! At an inside node x,
//!
//! ```text
//! M_R f(x) = max over r in S(x) of  mean{ |f(y)| : y inside, |y - x| <= r },
//! S(x) = {0} ∪ {k h : 1 <= k <= floor(R(x)/h)} ∪ {R(x)}.
//! ```
//!
//! `local_maximal` grows each ball shell by shell and is the reference.
//! `local_maximal_fast` reads window sums off compensated prefix sums (rows
//! of a summed-area table in 2D); the two agree to rounding.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{check_same_mask, DomainMask, RadiusField, ScalarField, CELL_TOL};

#[derive(Clone, Debug)]
pub struct MaximalResult {
    pub values: ScalarField,
    /// Radius attaining the maximum at each inside node (the smallest one on ties).
    pub argmax_radius: Vec<f64>,
}

/// The radius set S(x) for a node with radius `r` on spacing `h`.
pub fn radius_set(r: f64, h: f64) -> Vec<f64> {
    let cells = cell_radii(r / h);
    cells.into_iter().map(|c| c * h).collect()
}

fn int_radius(rho: f64) -> usize {
    (rho + CELL_TOL).floor().max(0.0) as usize
}

/// S(x) in cell units.
fn cell_radii(rho: f64) -> Vec<f64> {
    let k = int_radius(rho);
    let mut v: Vec<f64> = (0..=k).map(|i| i as f64).collect();
    if rho > k as f64 + CELL_TOL {
        v.push(rho);
    }
    v
}

/// Squared-distance bound for membership in the closed ball of radius `rho` cells.
fn ball_bound(rho: f64) -> f64 {
    rho * rho * (1.0 + 1e-10) + 1e-10
}

/// Compensated running sum, kept as an unevaluated pair.
#[derive(Clone, Copy, Default)]
struct TwoSum {
    hi: f64,
    lo: f64,
}

impl TwoSum {
    fn add(self, x: f64) -> TwoSum {
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        TwoSum { hi: s, lo: self.lo + err }
    }

    fn minus(self, o: TwoSum) -> f64 {
        (self.hi - o.hi) + (self.lo - o.lo)
    }
}

fn check_radius(f: &ScalarField, r: &RadiusField) -> Result<()> {
    check_same_mask(f.mask(), r.mask())
}

fn cell_radius_of(r: &RadiusField, h: f64) -> impl Fn(usize) -> f64 + '_ {
    move |i| r.get(i) / h
}

/// Reference evaluation of M_R f.
pub fn local_maximal(f: &ScalarField, r: &RadiusField) -> Result<MaximalResult> {
    check_radius(f, r)?;
    let h = f.grid().h();
    Ok(reference_engine(f, cell_radius_of(r, h)))
}

/// Prefix-sum evaluation of M_R f.
pub fn local_maximal_fast(f: &ScalarField, r: &RadiusField) -> Result<MaximalResult> {
    check_radius(f, r)?;
    let h = f.grid().h();
    Ok(fast_engine(f, cell_radius_of(r, h)))
}

/// Centred Hardy–Littlewood maximal function on a whole-space window: every
/// radius up to the window diameter.
pub fn hardy_littlewood(f: &ScalarField) -> Result<ScalarField> {
    require_whole_space(f.mask())?;
    let g = f.grid();
    let diam = ((g.nx() - 1).pow(2) as f64 + (g.ny() - 1).pow(2) as f64).sqrt();
    Ok(fast_engine(f, |_| diam).values)
}

/// Maximal function with radii at most one, on a whole-space window.
pub fn truncated_maximal(f: &ScalarField) -> Result<ScalarField> {
    require_whole_space(f.mask())?;
    let rho = 1.0 / f.grid().h();
    Ok(fast_engine(f, |_| rho).values)
}

fn require_whole_space(mask: &Arc<DomainMask>) -> Result<()> {
    if mask.represents_whole_space() {
        Ok(())
    } else {
        Err(Error::invalid("this operator needs a whole-space window"))
    }
}

fn finish(f: &ScalarField, vals: Vec<f64>, arg: Vec<f64>) -> MaximalResult {
    MaximalResult {
        values: ScalarField::new(f.mask(), vals).expect("averages of finite values are finite"),
        argmax_radius: arg,
    }
}

fn reference_engine(f: &ScalarField, rho_of: impl Fn(usize) -> f64) -> MaximalResult {
    let mask = f.mask();
    let g = f.grid();
    let h = g.h();
    let n = g.len();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mut vals = vec![0.0; n];
    let mut arg = vec![0.0; n];
    if g.dim() == 1 {
        for &i in mask.nodes() {
            let radii = cell_radii(rho_of(i));
            let (mut sum, mut cnt) = (abs[i], 1usize);
            let mut best = abs[i];
            let mut best_r = 0.0;
            let mut k = 0usize;
            for &rho in &radii[1..] {
                let kk = int_radius(rho);
                while k < kk {
                    k += 1;
                    for j in [i.checked_sub(k), Some(i + k).filter(|&j| j < n)].into_iter().flatten() {
                        if mask.is_inside(j) {
                            sum += abs[j];
                            cnt += 1;
                        }
                    }
                }
                let avg = sum / cnt as f64;
                if avg > best {
                    best = avg;
                    best_r = rho * h;
                }
            }
            vals[i] = best;
            arg[i] = best_r;
        }
        return finish(f, vals, arg);
    }
    // offsets sorted by length, enough to cover the largest ball
    let kmax = mask
        .nodes()
        .iter()
        .map(|&i| int_radius(rho_of(i)))
        .max()
        .unwrap_or(0) as isize;
    let mut offsets: Vec<(i64, isize, isize)> = Vec::new();
    for dy in -kmax..=kmax {
        for dx in -kmax..=kmax {
            let d2 = (dx * dx + dy * dy) as i64;
            if d2 > 0 && d2 <= (kmax * kmax + 2 * kmax + 1) as i64 {
                offsets.push((d2, dx, dy));
            }
        }
    }
    offsets.sort();
    for &i in mask.nodes() {
        let [ix, iy] = g.cell(i);
        let radii = cell_radii(rho_of(i));
        let (mut sum, mut cnt) = (abs[i], 1usize);
        let mut best = abs[i];
        let mut best_r = 0.0;
        let mut next = 0usize;
        for &rho in &radii[1..] {
            let bound = ball_bound(rho);
            while next < offsets.len() && (offsets[next].0 as f64) <= bound {
                let (_, dx, dy) = offsets[next];
                if let Some(j) = g.checked_index(ix as isize + dx, iy as isize + dy) {
                    if mask.is_inside(j) {
                        sum += abs[j];
                        cnt += 1;
                    }
                }
                next += 1;
            }
            let avg = sum / cnt as f64;
            if avg > best {
                best = avg;
                best_r = rho * h;
            }
        }
        vals[i] = best;
        arg[i] = best_r;
    }
    finish(f, vals, arg)
}

fn fast_engine(f: &ScalarField, rho_of: impl Fn(usize) -> f64) -> MaximalResult {
    let mask = f.mask();
    let g = f.grid();
    let h = g.h();
    let (nx, ny) = (g.nx(), g.ny());
    // per-row compensated prefix sums of |f| and of the inside indicator
    let mut ps = vec![TwoSum::default(); (nx + 1) * ny];
    let mut pc = vec![0u32; (nx + 1) * ny];
    for row in 0..ny {
        let base = row * (nx + 1);
        for ix in 0..nx {
            let i = g.index(ix, row);
            let inside = mask.is_inside(i);
            ps[base + ix + 1] = ps[base + ix].add(if inside { f.get(i).abs() } else { 0.0 });
            pc[base + ix + 1] = pc[base + ix] + u32::from(inside);
        }
    }
    let row_sum = |row: usize, a: usize, b: usize| -> (f64, u32) {
        let base = row * (nx + 1);
        (ps[base + b + 1].minus(ps[base + a]), pc[base + b + 1] - pc[base + a])
    };
    let mut vals = vec![0.0; g.len()];
    let mut arg = vec![0.0; g.len()];
    let mut spans: Vec<usize> = Vec::new();
    for &i in mask.nodes() {
        let [ix, iy] = g.cell(i);
        let radii = cell_radii(rho_of(i));
        let mut best = f.get(i).abs();
        let mut best_r = 0.0;
        for &rho in &radii[1..] {
            let k = int_radius(rho);
            let (mut sum, mut cnt) = (0.0, 0u32);
            if g.dim() == 1 {
                let (s, c) = row_sum(0, ix.saturating_sub(k), (ix + k).min(nx - 1));
                sum = s;
                cnt = c;
            } else {
                let bound = ball_bound(rho);
                spans.clear();
                for dy in 0..=k {
                    let w2 = bound - (dy * dy) as f64;
                    spans.push(if w2 >= 0.0 { w2.sqrt().floor() as usize } else { usize::MAX });
                }
                for dy in -(k as isize)..=(k as isize) {
                    let w = spans[dy.unsigned_abs()];
                    let row = iy as isize + dy;
                    if w == usize::MAX || row < 0 || row >= ny as isize {
                        continue;
                    }
                    let (s, c) = row_sum(row as usize, ix.saturating_sub(w), (ix + w).min(nx - 1));
                    sum += s;
                    cnt += c;
                }
            }
            let avg = sum / cnt as f64;
            if avg > best {
                best = avg;
                best_r = rho * h;
            }
        }
        vals[i] = best;
        arg[i] = best_r;
    }
    finish(f, vals, arg)
}

/// A function on G × G for a one-dimensional G, zero wherever either
/// argument is an outside node. Entry `(x, y)` sits at `x * m + y`.
#[derive(Clone, Debug)]
pub struct ProductField {
    base: Arc<DomainMask>,
    values: Vec<f64>,
}

impl ProductField {
    pub fn new(base: &Arc<DomainMask>, mut values: Vec<f64>) -> Result<Self> {
        if base.grid().dim() != 1 {
            return Err(Error::invalid("product fields need a one-dimensional base grid"));
        }
        let m = base.grid().len();
        if values.len() != m * m {
            return Err(Error::invalid(format!("expected {} values, got {}", m * m, values.len())));
        }
        for x in 0..m {
            for y in 0..m {
                let v = &mut values[x * m + y];
                if !(base.is_inside(x) && base.is_inside(y)) {
                    *v = 0.0;
                } else if v.is_nan() {
                    return Err(Error::invalid(format!("NaN at ({x}, {y})")));
                }
            }
        }
        Ok(ProductField {
            base: base.clone(),
            values,
        })
    }

    pub fn from_fn(base: &Arc<DomainMask>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let m = base.grid().len();
        let mut values = vec![0.0; m * m];
        for x in 0..m {
            for y in 0..m {
                if base.is_inside(x) && base.is_inside(y) {
                    values[x * m + y] = f(x, y);
                }
            }
        }
        Self::new(base, values)
    }

    pub fn base(&self) -> &Arc<DomainMask> {
        &self.base
    }

    pub fn side(&self) -> usize {
        self.base.grid().len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.side() + y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(x, y) -> F(y, x)`.
    pub fn transpose(&self) -> ProductField {
        let m = self.side();
        let mut v = vec![0.0; m * m];
        for x in 0..m {
            for y in 0..m {
                v[y * m + x] = self.values[x * m + y];
            }
        }
        ProductField {
            base: self.base.clone(),
            values: v,
        }
    }

    pub(crate) fn zip_with(&self, other: &ProductField, f: impl Fn(f64, f64) -> f64) -> Result<ProductField> {
        check_same_mask(&self.base, &other.base)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ProductField {
            base: self.base.clone(),
            values,
        })
    }
}

/// Maximum over k of the mean of |g| on the window [q - k, q + k] ∩ [0, L).
fn line_maximal(g: &[f64], out: &mut [f64], prefix: &mut Vec<f64>) {
    let len = g.len();
    prefix.clear();
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in g {
        acc += v.abs();
        prefix.push(acc);
    }
    for q in 0..len {
        let mut best = g[q].abs();
        let kmax = q.max(len - 1 - q);
        for k in 1..=kmax {
            let a = q.saturating_sub(k);
            let b = (q + k).min(len - 1);
            let avg = (prefix[b + 1] - prefix[a]) / (b - a + 1) as f64;
            if avg > best {
                best = avg;
            }
        }
        out[q] = best;
    }
}

/// M_ij F(x, y) = sup_r mean over |z| <= r of |F(x + i z, y + j z)|, where the
/// mean runs over the z keeping both shifted points on the grid.
pub fn directional_maximal(field: &ProductField, i: u8, j: u8) -> Result<ProductField> {
    if i > 1 || j > 1 {
        return Err(Error::invalid(format!("direction ({i}, {j}) is not in {{0,1}}^2")));
    }
    let m = field.side();
    let mut out = vec![0.0; m * m];
    let mut line = Vec::with_capacity(m);
    let mut res = vec![0.0; m];
    let mut prefix = Vec::with_capacity(m + 1);
    match (i, j) {
        (0, 0) => {
            for (o, v) in out.iter_mut().zip(field.values()) {
                *o = v.abs();
            }
        }
        (1, 0) => {
            for y in 0..m {
                line.clear();
                line.extend((0..m).map(|x| field.values[x * m + y]));
                line_maximal(&line, &mut res, &mut prefix);
                for x in 0..m {
                    out[x * m + y] = res[x];
                }
            }
        }
        (0, 1) => {
            for x in 0..m {
                line_maximal(&field.values[x * m..(x + 1) * m], &mut res, &mut prefix);
                out[x * m..(x + 1) * m].copy_from_slice(&res);
            }
        }
        _ => {
            // diagonals y - x = d
            for d in -(m as isize - 1)..=(m as isize - 1) {
                let (x0, y0) = if d >= 0 { (0, d as usize) } else { ((-d) as usize, 0) };
                let len = m - x0.max(y0);
                line.clear();
                line.extend((0..len).map(|t| field.values[(x0 + t) * m + y0 + t]));
                line_maximal(&line, &mut res[..len], &mut prefix);
                for t in 0..len {
                    out[(x0 + t) * m + y0 + t] = res[t];
                }
            }
        }
    }
    ProductField::new(&field.base, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn line_mask(n: usize, h: f64) -> Arc<DomainMask> {
        DomainMask::full(Grid::line(0.0, h, n).unwrap())
    }

    #[test]
    fn radius_set_contents() {
        assert_eq!(radius_set(0.0, 0.1), vec![0.0]);
        let s = radius_set(0.25, 0.1);
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.25).abs() < 1e-15);
        // R a multiple of h is not duplicated, even when R/h rounds low
        assert_eq!(radius_set(0.3, 0.1).len(), 4);
    }

    #[test]
    fn zero_radius_is_absolute_value() {
        let mask = line_mask(9, 0.1);
        let f = ScalarField::from_fn(&mask, |p| (p[0] * 7.0).sin() - 0.3).unwrap();
        let r = RadiusField::zero(&mask);
        let m = local_maximal(&f, &r).unwrap();
        for &i in mask.nodes() {
            assert_eq!(m.values.get(i), f.get(i).abs());
        }
    }

    #[test]
    fn impulse_with_radius_one_cell() {
        let mask = line_mask(5, 1.0);
        let f = ScalarField::new(&mask, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = RadiusField::new(&mask, vec![1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let m = local_maximal(&f, &r).unwrap();
        let expect = [0.0, 1.0 / 3.0, 1.0, 1.0 / 3.0, 0.0];
        for i in 0..5 {
            assert!((m.values.get(i) - expect[i]).abs() < 1e-15, "{i}");
        }
        // the fast path agrees
        let m2 = local_maximal_fast(&f, &r).unwrap();
        for i in 0..5 {
            assert!((m2.values.get(i) - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_function_is_fixed() {
        let mask = DomainMask::full(Grid::plane([0.0, 0.0], 0.1, [7, 6]).unwrap());
        let f = ScalarField::from_fn(&mask, |_| -2.5).unwrap();
        let r = RadiusField::boundary(&mask).unwrap();
        for m in [local_maximal(&f, &r).unwrap(), local_maximal_fast(&f, &r).unwrap()] {
            for &i in mask.nodes() {
                assert!((m.values.get(i) - 2.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fast_matches_reference_in_the_plane() {
        let g = Grid::plane([0.0, 0.0], 0.05, [23, 19]).unwrap();
        let mask = DomainMask::from_predicate(g, |p| (p[0] - 0.55).powi(2) + (p[1] - 0.45).powi(2) < 0.2).unwrap();
        let f = ScalarField::from_fn(&mask, |p| (9.0 * p[0]).sin() * (5.0 * p[1]).cos() + 0.2).unwrap();
        let r = RadiusField::boundary(&mask).unwrap();
        let a = local_maximal(&f, &r).unwrap();
        let b = local_maximal_fast(&f, &r).unwrap();
        for &i in mask.nodes() {
            assert!((a.values.get(i) - b.values.get(i)).abs() <= 1e-12 * a.values.get(i).max(1e-300));
            assert_eq!(a.argmax_radius[i], b.argmax_radius[i]);
        }
    }

    #[test]
    fn mask_mismatch_is_reported() {
        let f = ScalarField::zeros(&line_mask(5, 0.1));
        let r = RadiusField::zero(&line_mask(6, 0.1));
        assert!(matches!(local_maximal(&f, &r), Err(Error::MaskMismatch)));
    }

    #[test]
    fn truncated_and_full_maximal() {
        let mask = DomainMask::whole_space(Grid::line(-2.0, 0.25, 17).unwrap());
        let f = ScalarField::from_fn(&mask, |p| if p[0] == 0.0 { 1.0 } else { 0.0 }).unwrap();
        let t = truncated_maximal(&f).unwrap();
        let hl = hardy_littlewood(&f).unwrap();
        // balls are clipped to the window, so from x = 2 the best ball is [0, 2]
        assert_eq!(t.get(16), 0.0);
        assert!((hl.get(16) - 1.0 / 9.0).abs() < 1e-15);
        assert!((t.get(12) - 1.0 / 9.0).abs() < 1e-15);
        assert!(truncated_maximal(&ScalarField::zeros(&line_mask(3, 1.0))).is_err());
    }

    #[test]
    fn directional_slices_match_hardy_littlewood() {
        let base = DomainMask::whole_space(Grid::line(0.0, 0.1, 11).unwrap());
        let f = ProductField::from_fn(&base, |x, y| ((x * 3 + y * 7) % 5) as f64 - 1.5).unwrap();
        let m10 = directional_maximal(&f, 1, 0).unwrap();
        let m01 = directional_maximal(&f, 0, 1).unwrap();
        for y in 0..11 {
            let col: Vec<f64> = (0..11).map(|x| f.get(x, y)).collect();
            let hl = hardy_littlewood(&ScalarField::new(&base, col).unwrap()).unwrap();
            for x in 0..11 {
                assert!((m10.get(x, y) - hl.get(x)).abs() < 1e-14);
            }
        }
        let ft = f.transpose();
        let mt = directional_maximal(&ft, 1, 0).unwrap();
        for x in 0..11 {
            for y in 0..11 {
                assert_eq!(m01.get(x, y), mt.get(y, x));
            }
        }
        let m00 = directional_maximal(&f, 0, 0).unwrap();
        assert_eq!(m00.get(3, 4), f.get(3, 4).abs());
        assert!(directional_maximal(&f, 2, 0).is_err());
    }

    #[test]
    fn diagonal_direction_brute_force() {
        let base = DomainMask::full(Grid::line(0.0, 1.0, 6).unwrap());
        let f = ProductField::from_fn(&base, |x, y| (x as f64 - 2.0 * y as f64).sin()).unwrap();
        let m = directional_maximal(&f, 1, 1).unwrap();
        for x in 0..6isize {
            for y in 0..6isize {
                let mut best = 0.0f64;
                for k in 0..6isize {
                    let pts: Vec<f64> = (-k..=k)
                        .filter(|z| (0..6).contains(&(x + z)) && (0..6).contains(&(y + z)))
                        .map(|z| f.get((x + z) as usize, (y + z) as usize).abs())
                        .collect();
                    best = best.max(pts.iter().sum::<f64>() / pts.len() as f64);
                }
                assert!((m.get(x as usize, y as usize) - best).abs() < 1e-14);
            }
        }
    }
}
