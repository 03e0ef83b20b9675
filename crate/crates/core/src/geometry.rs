//! Test sets: the dyadic gap set behind the sharpness counterexample, Cantor
//! sets, porosity and covering numbers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{boundary_distance, distance_to_set, squared_cell_distance, DomainMask, Grid, NodeSet, RadiusField, CELL_TOL};
use crate::quad::ls_slope;

/// One removed interval `I_{N,j} = (2^-N + (j-1) 2^-MN, 2^-N + j 2^-MN)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    pub n: u32,
    pub j: u64,
    pub lo: f64,
    pub hi: f64,
}

impl GapInterval {
    /// The concentric half `Î_{N,j}`.
    pub fn half(&self) -> (f64, f64) {
        let c = 0.5 * (self.lo + self.hi);
        let w = 0.25 * (self.hi - self.lo);
        (c - w, c + w)
    }
}

/// `E = G ∖ ∪_{N <= N_max} ∪_j I_{N,j}` on a one-dimensional domain G.
#[derive(Clone, Debug)]
pub struct DyadicGapSet {
    pub m: u32,
    pub n_max: u32,
    pub mask: Arc<DomainMask>,
    pub set: NodeSet,
    pub intervals: Vec<GapInterval>,
}

impl DyadicGapSet {
    /// Hölder exponent `1/M` of the companion radius.
    pub fn alpha(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `R = 2^(2α+1) dist(·, E)^α`, clipped to the boundary distance. The flag
    /// reports whether the clip changed any node.
    pub fn radius(&self) -> Result<(RadiusField, bool)> {
        let a = self.alpha();
        let dist = distance_to_set(&self.mask, &self.set)?;
        let bd = boundary_distance(&self.mask);
        let c = 2f64.powf(2.0 * a + 1.0);
        let mut clipped = false;
        let values: Vec<f64> = (0..dist.values().len())
            .map(|i| {
                if !self.mask.is_inside(i) {
                    return 0.0;
                }
                let r = c * dist.get(i).powf(a);
                if r > bd.get(i) {
                    clipped = true;
                    bd.get(i)
                } else {
                    r
                }
            })
            .collect();
        Ok((RadiusField::new(&self.mask, values)?, clipped))
    }

    /// The standard domain `G = (-8, 9)` sampled at spacing `h`.
    pub fn standard_domain(h: f64) -> Result<Arc<DomainMask>> {
        DomainMask::open_interval(-8.0, 9.0, h)
    }
}

/// Builds the gap set for `M >= 2` and levels `1..=n_max` on `mask`, which
/// must be one-dimensional and contain `(0, 1)`.
pub fn build_gap_set(m: u32, n_max: u32, mask: &Arc<DomainMask>) -> Result<DyadicGapSet> {
    if m < 2 || n_max == 0 {
        return Err(Error::invalid(format!("gap set needs M >= 2 and N_max >= 1, got M={m}, N_max={n_max}")));
    }
    if m * n_max > 14 {
        return Err(Error::invalid("M * N_max above 14 needs more nodes than a desk-scale grid holds"));
    }
    let g = mask.grid();
    if g.dim() != 1 {
        return Err(Error::invalid("the gap set lives on a line"));
    }
    let finest = 2f64.powi(-((m * n_max) as i32));
    if g.h() > finest / 4.0 {
        return Err(Error::ResolutionInsufficient(format!(
            "h = {} does not resolve intervals of length 2^-{}",
            g.h(),
            m * n_max
        )));
    }
    let (lo, hi) = mask.bounding_box();
    if lo[0] > 0.0 || hi[0] < 1.0 {
        return Err(Error::invalid("the domain must contain [0, 1]"));
    }
    let mut intervals = Vec::new();
    for n in 1..=n_max {
        let base = 2f64.powi(-(n as i32));
        let w = 2f64.powi(-((m * n) as i32));
        let count = 1u64 << ((m - 1) * n);
        for j in 1..=count {
            intervals.push(GapInterval {
                n,
                j,
                lo: base + (j - 1) as f64 * w,
                hi: base + j as f64 * w,
            });
        }
    }
    let tol = CELL_TOL * g.h();
    let removed = |x: f64| -> bool {
        for n in 1..=n_max {
            let base = 2f64.powi(-(n as i32));
            if x > base + tol && x < 2.0 * base - tol {
                let w = 2f64.powi(-((m * n) as i32));
                let u = (x - base) / w;
                let k = u.floor();
                return (u - k) * w > tol && (k + 1.0 - u) * w > tol;
            }
        }
        false
    };
    let set = NodeSet::from_predicate(mask, |p| !removed(p[0]));
    Ok(DyadicGapSet {
        m,
        n_max,
        mask: mask.clone(),
        set,
        intervals,
    })
}

/// Nodes of the level-`level` Cantor set built on `[a, b]`: the union of the
/// closed intervals whose ternary addresses avoid the digit 1.
pub fn build_cantor(level: u32, grid: &Grid, a: f64, b: f64) -> Result<NodeSet> {
    if grid.dim() != 1 {
        return Err(Error::invalid("Cantor sets are built on a line"));
    }
    if !(a < b) || level > 30 {
        return Err(Error::invalid("need a < b and level <= 30"));
    }
    let scale = 3f64.powi(level as i32);
    if grid.h() > (b - a) / scale / 2.0 {
        return Err(Error::ResolutionInsufficient(format!(
            "h = {} does not resolve level {level} of the Cantor set",
            grid.h()
        )));
    }
    let in_cantor = |i: u64| -> bool {
        let mut k = i;
        for _ in 0..level {
            if k % 3 == 1 {
                return false;
            }
            k /= 3;
        }
        true
    };
    let tol = 1e-7;
    let top = scale as u64;
    let mut members = Vec::new();
    for idx in 0..grid.len() {
        let x = grid.coord(idx)[0];
        let u = (x - a) / (b - a) * scale;
        if u < -tol || u > scale + tol {
            continue;
        }
        let lo = (u - tol).floor().max(0.0) as u64;
        let hi = ((u + tol).floor() as u64).min(top - 1);
        if (lo..=hi).any(|i| {
            let (s, e) = (i as f64, (i + 1) as f64);
            u >= s - tol && u <= e + tol && in_cantor(i)
        }) {
            members.push(idx);
        }
    }
    NodeSet::from_indices(grid.len(), members)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorosityReport {
    pub kappa: f64,
    /// Largest κ' (to 1/256, by bisection) with every tested (x, r) κ'-porous.
    pub kappa_estimate: f64,
    pub scales_tested: Vec<f64>,
    /// Pairs (node, r) where no E-free ball of radius κ r sits inside B(x, r).
    pub witness_failures: Vec<(usize, f64)>,
    pub holds: bool,
}

/// Tests κ-porosity of `e` at every node of `e` and every scale: each ball
/// B(x, r) must contain a ball B(y, κ r) missing `e`. Witnesses y range over
/// the grid nodes.
pub fn porosity_check(e: &NodeSet, grid: &Grid, kappa: f64, scales: &[f64]) -> Result<PorosityReport> {
    if e.is_empty() || e.universe() != grid.len() {
        return Err(Error::invalid("porosity needs a nonempty set on this grid"));
    }
    if scales.is_empty() || scales.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("porosity scales must be positive"));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::invalid(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let h = grid.h();
    let d2 = squared_cell_distance(grid, e);
    let mut best_per_pair = Vec::new();
    for x in e.iter() {
        let [ix, iy] = grid.cell(x);
        for &r in scales {
            let rc = r / h;
            let k = rc.ceil() as isize;
            let ky = if grid.dim() == 2 { k } else { 0 };
            let mut best = 0.0f64;
            for dy in -ky..=ky {
                for dx in -k..=k {
                    let off = ((dx * dx + dy * dy) as f64).sqrt();
                    if off >= rc {
                        continue;
                    }
                    if let Some(y) = grid.checked_index(ix as isize + dx, iy as isize + dy) {
                        let rho = d2[y].sqrt().min(rc - off);
                        best = best.max(rho / rc);
                    }
                }
            }
            best_per_pair.push((x, r, best));
        }
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        if best_per_pair.iter().all(|t| t.2 >= mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let witness_failures: Vec<(usize, f64)> = best_per_pair
        .iter()
        .filter(|t| t.2 < kappa)
        .map(|t| (t.0, t.1))
        .collect();
    Ok(PorosityReport {
        kappa,
        kappa_estimate: lo,
        scales_tested: scales.to_vec(),
        holds: witness_failures.is_empty(),
        witness_failures,
    })
}

/// Greedy count of open balls of radius `r`, centred in `a`, covering `a`.
/// On a line each ball is centred at the farthest point within `r` of the
/// leftmost uncovered one, which is optimal.
pub fn covering_number(a: &NodeSet, grid: &Grid, r: f64) -> Result<usize> {
    if !(r > 0.0) || a.universe() != grid.len() {
        return Err(Error::invalid("covering needs r > 0 and a set on this grid"));
    }
    let rc = r / grid.h() - CELL_TOL;
    let pts: Vec<[f64; 2]> = a
        .iter()
        .map(|i| {
            let [x, y] = grid.cell(i);
            [x as f64, y as f64]
        })
        .collect();
    if pts.is_empty() {
        return Ok(0);
    }
    if grid.dim() == 1 {
        let mut count = 0;
        let mut i = 0;
        while i < pts.len() {
            let start = pts[i][0];
            let mut c = i;
            while c + 1 < pts.len() && pts[c + 1][0] - start < rc {
                c += 1;
            }
            let reach = pts[c][0] + rc;
            count += 1;
            while i < pts.len() && pts[i][0] < reach {
                i += 1;
            }
        }
        return Ok(count);
    }
    let mut covered = vec![false; pts.len()];
    let mut count = 0;
    for i in 0..pts.len() {
        if covered[i] {
            continue;
        }
        count += 1;
        let c = pts[i];
        for (j, q) in pts.iter().enumerate() {
            if !covered[j] && ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt() < rc {
                covered[j] = true;
            }
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub estimate: f64,
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Least-squares slope of `log N(r)` against `log(1/r)`. Needs at least four
/// radii spanning a factor of four.
pub fn box_dimension_estimate(a: &NodeSet, grid: &Grid, radii: &[f64]) -> Result<BoxDimension> {
    if radii.len() < 4 {
        return Err(Error::invalid("box dimension needs at least four radii"));
    }
    let (rmin, rmax) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if rmax / rmin < 4.0 {
        return Err(Error::invalid("radii must span at least two dyadic scales"));
    }
    let counts = radii
        .iter()
        .map(|&r| covering_number(a, grid, r))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = radii.iter().map(|r| -r.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    Ok(BoxDimension {
        estimate: ls_slope(&x, &y),
        radii: radii.to_vec(),
        counts,
    })
}
