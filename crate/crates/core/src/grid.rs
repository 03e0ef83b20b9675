//! Uniform grids in one and two dimensions, node masks and the fields that
//! live on them, plus exact Euclidean distance transforms.
//!
//! Node `idx` of a grid with shape `[nx, ny]` sits at cell `(idx % nx, idx / nx)`
//! and coordinate `origin + h * cell`. One-dimensional grids use `ny = 1`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane. One-dimensional code leaves the second entry at zero.
pub type Point = [f64; 2];

/// Relative guard used when comparing a length against a multiple of `h`.
pub(crate) const CELL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    h: f64,
    origin: Vec<f64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(h: f64, origin: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let dim = shape.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if origin.len() != dim {
            return Err(Error::invalid("origin and shape have different lengths"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {h}")));
        }
        if shape.iter().any(|&n| n == 0) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("grid needs at least one node per axis and a finite origin"));
        }
        Ok(Grid { dim, h, origin, shape })
    }

    pub fn line(origin: f64, h: f64, nodes: usize) -> Result<Self> {
        Grid::new(h, vec![origin], vec![nodes])
    }

    pub fn plane(origin: [f64; 2], h: f64, shape: [usize; 2]) -> Result<Self> {
        Grid::new(h, origin.to_vec(), shape.to_vec())
    }

    /// Line grid on the lattice `h * Z`, covering `[lo, hi]`.
    pub fn line_covering(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("empty interval ({lo}, {hi})")));
        }
        let k0 = (lo / h - CELL_TOL).ceil();
        let k1 = (hi / h + CELL_TOL).floor();
        if k1 < k0 {
            return Err(Error::invalid("interval contains no lattice node"));
        }
        Grid::line(k0 * h, h, (k1 - k0) as usize + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn nx(&self) -> usize {
        self.shape[0]
    }

    pub fn ny(&self) -> usize {
        if self.dim == 2 {
            self.shape[1]
        } else {
            1
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell(&self, idx: usize) -> [usize; 2] {
        let nx = self.nx();
        [idx % nx, idx / nx]
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx() * iy
    }

    /// Index of the cell `(ix, iy)` if it lies on the grid.
    pub fn checked_index(&self, ix: isize, iy: isize) -> Option<usize> {
        if ix < 0 || iy < 0 || ix as usize >= self.nx() || iy as usize >= self.ny() {
            None
        } else {
            Some(self.index(ix as usize, iy as usize))
        }
    }

    pub fn coord(&self, idx: usize) -> Point {
        let [ix, iy] = self.cell(idx);
        let x = self.origin[0] + self.h * ix as f64;
        let y = if self.dim == 2 {
            self.origin[1] + self.h * iy as f64
        } else {
            0.0
        };
        [x, y]
    }

    /// Coordinates of the last node along each axis.
    pub fn upper(&self) -> Point {
        let mut p = [0.0; 2];
        for (a, q) in p.iter_mut().enumerate().take(self.dim) {
            *q = self.origin[a] + self.h * (self.shape[a] - 1) as f64;
        }
        p
    }

    /// Nearest node to `x`, if `x` is within half a cell of the grid.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut cell = [0isize; 2];
        for a in 0..self.dim {
            let c = ((x.get(a).copied().unwrap_or(0.0) - self.origin[a]) / self.h).round();
            if !c.is_finite() {
                return None;
            }
            cell[a] = c as isize;
        }
        self.checked_index(cell[0], cell[1])
    }

    /// Same spacing-halved grid over the same box.
    pub fn refined(&self) -> Grid {
        Grid {
            dim: self.dim,
            h: self.h / 2.0,
            origin: self.origin.clone(),
            shape: self.shape.iter().map(|&n| 2 * n - 1).collect(),
        }
    }
}

/// The set of grid nodes belonging to the domain G.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    nodes: Vec<usize>,
    whole_space: bool,
}

impl DomainMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Arc<Self>> {
        Self::build(grid, inside, false)
    }

    fn build(grid: Grid, inside: Vec<bool>, whole_space: bool) -> Result<Arc<Self>> {
        if inside.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} flags for a grid of {} nodes",
                inside.len(),
                grid.len()
            )));
        }
        let nodes: Vec<usize> = (0..inside.len()).filter(|&i| inside[i]).collect();
        if nodes.is_empty() {
            return Err(Error::invalid("domain mask has no inside node"));
        }
        if whole_space && nodes.len() != grid.len() {
            return Err(Error::invalid("a whole-space window must contain every node"));
        }
        Ok(Arc::new(DomainMask {
            grid,
            inside,
            nodes,
            whole_space,
        }))
    }

    /// Every node inside, and the rest of space counted as outside.
    pub fn full(grid: Grid) -> Arc<Self> {
        let n = grid.len();
        Self::build(grid, vec![true; n], false).expect("nonempty grid")
    }

    /// Every node inside, standing in for all of R^n: there is no boundary.
    pub fn whole_space(grid: Grid) -> Arc<Self> {
        let n = grid.len();
        Self::build(grid, vec![true; n], true).expect("nonempty grid")
    }

    pub fn from_predicate(grid: Grid, pred: impl Fn(Point) -> bool) -> Result<Arc<Self>> {
        let inside = (0..grid.len()).map(|i| pred(grid.coord(i))).collect();
        Self::new(grid, inside)
    }

    /// Lattice nodes `k h` strictly inside `(lo, hi)`, on a grid that also
    /// carries the two endpoints when they are lattice points.
    pub fn open_interval(lo: f64, hi: f64, h: f64) -> Result<Arc<Self>> {
        let grid = Grid::line_covering(lo, hi, h)?;
        let tol = CELL_TOL * h;
        Self::from_predicate(grid, |p| p[0] > lo + tol && p[0] < hi - tol)
    }

    /// Cell-centred sampling of `[0, 1]`: `nodes` points at `(k + 1/2) / nodes`.
    pub fn unit_interval(nodes: usize) -> Result<Arc<Self>> {
        if nodes == 0 {
            return Err(Error::invalid("need at least one node"));
        }
        let h = 1.0 / nodes as f64;
        Ok(Self::full(Grid::line(h / 2.0, h, nodes)?))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn flags(&self) -> &[bool] {
        &self.inside
    }

    /// Inside node indices in increasing order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn represents_whole_space(&self) -> bool {
        self.whole_space
    }

    /// Smallest box holding the inside nodes.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &i in &self.nodes {
            let p = self.grid.coord(i);
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }
}

fn same_mask(a: &Arc<DomainMask>, b: &Arc<DomainMask>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same_mask(a: &Arc<DomainMask>, b: &Arc<DomainMask>) -> Result<()> {
    if same_mask(a, b) {
        Ok(())
    } else {
        Err(Error::MaskMismatch)
    }
}

/// Real values on the inside nodes of a mask; outside nodes hold zero.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mask: Arc<DomainMask>,
    values: Vec<f64>,
}

impl ScalarField {
    /// `values` has one entry per grid node. Entries at outside nodes are
    /// replaced by zero.
    pub fn new(mask: &Arc<DomainMask>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != mask.grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                mask.grid.len()
            )));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !mask.inside[i] {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value {v} at node {i}")));
            }
        }
        Ok(ScalarField {
            mask: mask.clone(),
            values,
        })
    }

    /// Values listed per inside node, in node order.
    pub fn from_inside(mask: &Arc<DomainMask>, inside: &[f64]) -> Result<Self> {
        if inside.len() != mask.count() {
            return Err(Error::invalid(format!(
                "expected {} inside values, got {}",
                mask.count(),
                inside.len()
            )));
        }
        let mut values = vec![0.0; mask.grid.len()];
        for (&i, &v) in mask.nodes.iter().zip(inside) {
            values[i] = v;
        }
        Self::new(mask, values)
    }

    pub fn from_fn(mask: &Arc<DomainMask>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let g = &mask.grid;
        let values = (0..g.len())
            .map(|i| if mask.inside[i] { f(g.coord(i)) } else { 0.0 })
            .collect();
        Self::new(mask, values)
    }

    pub fn zeros(mask: &Arc<DomainMask>) -> Self {
        ScalarField {
            mask: mask.clone(),
            values: vec![0.0; mask.grid.len()],
        }
    }

    /// Skips the finiteness check. Only distance fields use this, to carry
    /// `+inf` on whole-space windows.
    pub(crate) fn raw(mask: &Arc<DomainMask>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mask.grid.len());
        ScalarField {
            mask: mask.clone(),
            values,
        }
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn grid(&self) -> &Grid {
        &self.mask.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn inside_values(&self) -> Vec<f64> {
        self.mask.nodes.iter().map(|&i| self.values[i]).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::new(&self.mask, values)
    }

    pub fn max_inside(&self) -> f64 {
        self.mask
            .nodes
            .iter()
            .map(|&i| self.values[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_inside(&self) -> f64 {
        self.mask
            .nodes
            .iter()
            .map(|&i| self.values[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_document(&self) -> FieldDocument {
        FieldDocument {
            grid: self.mask.grid.clone(),
            inside: self.mask.inside.clone(),
            values: self.inside_values(),
            whole_space: self.mask.whole_space,
        }
    }

    pub fn from_document(doc: FieldDocument) -> Result<Self> {
        let mask = if doc.whole_space {
            if doc.inside.iter().any(|&b| !b) {
                return Err(Error::invalid("whole-space field with outside nodes"));
            }
            DomainMask::whole_space(doc.grid)
        } else {
            DomainMask::new(doc.grid, doc.inside)?
        };
        Self::from_inside(&mask, &doc.values)
    }

    /// Reads a field and checks that it lives on `mask`.
    pub fn from_document_on(doc: FieldDocument, mask: &Arc<DomainMask>) -> Result<Self> {
        if doc.grid != mask.grid || doc.inside != mask.inside {
            return Err(Error::MaskMismatch);
        }
        Self::from_inside(mask, &doc.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::from_json(&text)
    }
}

/// On-disk form of a field: `{grid, inside, values}` with `values` listed per
/// inside node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub grid: Grid,
    pub inside: Vec<bool>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub whole_space: bool,
}

/// A nonnegative radius at each inside node, never reaching past the boundary.
#[derive(Clone, Debug)]
pub struct RadiusField {
    field: ScalarField,
}

impl RadiusField {
    pub fn new(mask: &Arc<DomainMask>, values: Vec<f64>) -> Result<Self> {
        let field = ScalarField::new(mask, values)?;
        let dist = boundary_distance(mask);
        for &i in mask.nodes() {
            let r = field.values[i];
            let d = dist.values[i];
            if r < 0.0 {
                return Err(Error::invalid(format!("negative radius {r} at node {i}")));
            }
            if r > d + 1e-12 * d.max(1.0) {
                return Err(Error::RadiusExceedsBoundary {
                    node: i,
                    radius: r,
                    dist: d,
                });
            }
        }
        Ok(RadiusField { field })
    }

    pub fn zero(mask: &Arc<DomainMask>) -> Self {
        RadiusField {
            field: ScalarField::zeros(mask),
        }
    }

    /// R = dist(x, boundary). Not defined on whole-space windows.
    pub fn boundary(mask: &Arc<DomainMask>) -> Result<Self> {
        if mask.whole_space {
            return Err(Error::invalid("boundary radius needs a bounded domain"));
        }
        Ok(RadiusField {
            field: boundary_distance(mask),
        })
    }

    /// `min(values, dist(x, boundary))` at each node.
    pub fn clipped(mask: &Arc<DomainMask>, values: Vec<f64>) -> Result<Self> {
        let dist = boundary_distance(mask);
        let mut v = values;
        if v.len() != mask.grid.len() {
            return Err(Error::invalid("radius has the wrong number of values"));
        }
        for &i in mask.nodes() {
            if !(v[i] >= 0.0) {
                return Err(Error::invalid(format!("radius {} at node {i} is not >= 0", v[i])));
            }
            v[i] = v[i].min(dist.values[i]);
        }
        Ok(RadiusField {
            field: ScalarField::new(mask, v)?,
        })
    }

    pub fn constant(mask: &Arc<DomainMask>, c: f64) -> Result<Self> {
        Self::clipped(mask, vec![c; mask.grid.len()])
    }

    pub fn from_fn_clipped(mask: &Arc<DomainMask>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let g = mask.grid();
        let values = (0..g.len())
            .map(|i| if mask.inside[i] { f(g.coord(i)) } else { 0.0 })
            .collect();
        Self::clipped(mask, values)
    }

    /// `min(dist(x, boundary), l * |x - centre|^alpha)`.
    pub fn holder(mask: &Arc<DomainMask>, centre: Point, alpha: f64, l: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0 && l >= 0.0) {
            return Err(Error::invalid(format!("holder radius needs 0 < alpha <= 1, L >= 0; got {alpha}, {l}")));
        }
        Self::from_fn_clipped(mask, |p| l * dist2(p, centre).sqrt().powf(alpha))
    }

    /// `min(dist(x, boundary), l * dist(x, anchors))`, a Lipschitz radius.
    pub fn lipschitz(mask: &Arc<DomainMask>, anchors: &[Point], l: f64) -> Result<Self> {
        if anchors.is_empty() || !(l >= 0.0) {
            return Err(Error::invalid("lipschitz radius needs anchors and L >= 0"));
        }
        Self::from_fn_clipped(mask, |p| {
            l * anchors.iter().map(|&a| dist2(p, a)).fold(f64::INFINITY, f64::min).sqrt()
        })
    }

    /// Parses a radius mode: `zero`, `const:c`, `boundary`, `holder:alpha,L`
    /// (centred at the middle of the domain), `lipschitz:L` (anchored at the
    /// quarter points) or `file:path` (a field document on the same mask).
    pub fn parse_mode(spec: &str, mask: &Arc<DomainMask>) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = || -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("radius '{spec}': {e}"))))
                .collect()
        };
        let (lo, hi) = mask.bounding_box();
        let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        match kind {
            "zero" => Ok(Self::zero(mask)),
            "boundary" => Self::boundary(mask),
            "const" => match nums()?.as_slice() {
                [c] => Self::constant(mask, *c),
                _ => Err(Error::Parse(format!("radius '{spec}': expected const:c"))),
            },
            "holder" => match nums()?.as_slice() {
                [alpha, l] => Self::holder(mask, centre, *alpha, *l),
                _ => Err(Error::Parse(format!("radius '{spec}': expected holder:alpha,L"))),
            },
            "lipschitz" => match nums()?.as_slice() {
                [l] => {
                    let anchors: Vec<Point> = (1..4)
                        .map(|k| {
                            let t = k as f64 / 4.0;
                            [lo[0] + t * (hi[0] - lo[0]), centre[1]]
                        })
                        .collect();
                    Self::lipschitz(mask, &anchors, *l)
                }
                _ => Err(Error::Parse(format!("radius '{spec}': expected lipschitz:L"))),
            },
            "file" => {
                let text = std::fs::read_to_string(rest).map_err(|e| Error::io(rest, e))?;
                let f = ScalarField::from_document_on(serde_json::from_str(&text)?, mask)?;
                Self::new(mask, f.values().to_vec())
            }
            _ => Err(Error::Parse(format!("unknown radius mode '{spec}'"))),
        }
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        self.field.mask()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.field.get(idx)
    }

    pub fn as_field(&self) -> &ScalarField {
        &self.field
    }

    pub fn max_inside(&self) -> f64 {
        self.field.max_inside()
    }
}

/// A subset of the nodes of a grid, stored as sorted indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSet {
    universe: usize,
    members: Vec<usize>,
}

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        NodeSet {
            universe,
            members: Vec::new(),
        }
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i >= universe) {
            return Err(Error::invalid(format!("node {bad} outside a grid of {universe} nodes")));
        }
        members.sort_unstable();
        members.dedup();
        Ok(NodeSet { universe, members })
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        NodeSet {
            universe: flags.len(),
            members: (0..flags.len()).filter(|&i| flags[i]).collect(),
        }
    }

    /// Inside nodes of `mask` where `pred` holds.
    pub fn from_predicate(mask: &DomainMask, pred: impl Fn(Point) -> bool) -> Self {
        let g = mask.grid();
        NodeSet {
            universe: g.len(),
            members: mask.nodes().iter().copied().filter(|&i| pred(g.coord(i))).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.binary_search(&idx).is_ok()
    }

    pub fn flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.universe];
        for &i in &self.members {
            f[i] = true;
        }
        f
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut members = self.members.clone();
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        members.dedup();
        NodeSet {
            universe: self.universe.max(other.universe),
            members,
        }
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            universe: self.universe,
            members: self.members.iter().copied().filter(|&i| other.contains(i)).collect(),
        }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet {
            universe: self.universe,
            members: self.members.iter().copied().filter(|&i| !other.contains(i)).collect(),
        }
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    /// True when every member is an inside node of `mask`.
    pub fn within(&self, mask: &DomainMask) -> bool {
        self.universe == mask.grid().len() && self.members.iter().all(|&i| mask.is_inside(i))
    }
}

pub(crate) fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Squared distance transform along one line (Felzenszwalb and Huttenlocher).
/// `f` holds squared distances so far, `+inf` where unknown.
fn lower_envelope(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance, in cell units, from every node of an
/// `nx * ny` array to the nearest feature node. `+inf` if there is none.
pub(crate) fn squared_edt(nx: usize, ny: usize, features: &[bool]) -> Vec<f64> {
    let mut d: Vec<f64> = features
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let mut v = Vec::new();
    let mut z = Vec::new();
    let mut out = vec![0.0; nx.max(ny)];
    for row in 0..ny {
        let line = &mut d[row * nx..(row + 1) * nx];
        lower_envelope(line, &mut out[..nx], &mut v, &mut z);
        line.copy_from_slice(&out[..nx]);
    }
    if ny > 1 {
        let mut col = vec![0.0; ny];
        for c in 0..nx {
            for r in 0..ny {
                col[r] = d[r * nx + c];
            }
            lower_envelope(&col, &mut out[..ny], &mut v, &mut z);
            for r in 0..ny {
                d[r * nx + c] = out[r];
            }
        }
    }
    d
}

/// Distance from each inside node to the nearest node outside the domain.
///
/// Every non-inside node of the grid counts as outside, and so does a
/// one-node frame around the grid. A whole-space mask has no boundary, and
/// the distance is `+inf`.
pub fn boundary_distance(mask: &Arc<DomainMask>) -> ScalarField {
    let g = mask.grid();
    let n = g.len();
    if mask.whole_space {
        return ScalarField::raw(mask, vec![f64::INFINITY; n]);
    }
    let (nx, ny) = (g.nx(), g.ny());
    let (ex, ey) = if g.dim() == 2 { (nx + 2, ny + 2) } else { (nx + 2, 1) };
    let off_y = usize::from(g.dim() == 2);
    let mut features = vec![true; ex * ey];
    for &i in mask.nodes() {
        let [ix, iy] = g.cell(i);
        features[(ix + 1) + ex * (iy + off_y)] = false;
    }
    let d2 = squared_edt(ex, ey, &features);
    let mut values = vec![0.0; n];
    for &i in mask.nodes() {
        let [ix, iy] = g.cell(i);
        values[i] = d2[(ix + 1) + ex * (iy + off_y)].sqrt() * g.h();
    }
    ScalarField::raw(mask, values)
}

/// Squared cell distances from every grid node to `target`.
pub(crate) fn squared_cell_distance(grid: &Grid, target: &NodeSet) -> Vec<f64> {
    squared_edt(grid.nx(), grid.ny(), &target.flags())
}

/// Distance from each inside node to the nearest node of `target`.
pub fn distance_to_set(mask: &Arc<DomainMask>, target: &NodeSet) -> Result<ScalarField> {
    let g = mask.grid();
    if target.universe() != g.len() {
        return Err(Error::invalid("target set belongs to a different grid"));
    }
    if target.is_empty() {
        return Err(Error::invalid("distance to an empty set"));
    }
    let d2 = squared_cell_distance(g, target);
    let mut values = vec![0.0; g.len()];
    for &i in mask.nodes() {
        values[i] = d2[i].sqrt() * g.h();
    }
    ScalarField::new(mask, values)
}

/// Inside nodes where the field is strictly below `threshold`. Values within
/// a relative `1e-12` of the threshold count as ties and are left out.
pub fn sublevel_mask(field: &ScalarField, threshold: f64) -> NodeSet {
    let cut = threshold - 1e-12 * threshold.abs();
    let mask = field.mask();
    NodeSet {
        universe: mask.grid().len(),
        members: mask
            .nodes()
            .iter()
            .copied()
            .filter(|&i| field.values[i] < cut)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_boundary(mask: &DomainMask) -> Vec<f64> {
        let g = mask.grid();
        let h = g.h();
        // outside nodes plus the frame
        let mut outside: Vec<Point> = Vec::new();
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let yr = if g.dim() == 2 { -1..=ny } else { 0..=0 };
        for iy in yr {
            for ix in -1..=nx {
                let on = g.checked_index(ix, iy).map(|i| mask.is_inside(i)).unwrap_or(false);
                if !on {
                    outside.push([ix as f64 * h, iy as f64 * h]);
                }
            }
        }
        (0..g.len())
            .map(|i| {
                if !mask.is_inside(i) {
                    return 0.0;
                }
                let [ix, iy] = g.cell(i);
                let p = [ix as f64 * h, iy as f64 * h];
                outside.iter().map(|&q| dist2(p, q)).fold(f64::INFINITY, f64::min).sqrt()
            })
            .collect()
    }

    #[test]
    fn line_boundary_distance_matches_formula() {
        let mask = DomainMask::full(Grid::line(0.0, 0.1, 11).unwrap());
        let d = boundary_distance(&mask);
        for i in 0..11 {
            let expect = 0.1 * (i.min(10 - i) + 1) as f64;
            assert!((d.get(i) - expect).abs() < 1e-15, "{i}: {} vs {expect}", d.get(i));
        }
    }

    #[test]
    fn single_node_domain() {
        let mask = DomainMask::full(Grid::line(0.0, 0.1, 1).unwrap());
        let d = boundary_distance(&mask);
        assert!((d.get(0) - 0.1).abs() < 1e-15);
        let t = distance_to_set(&mask, &NodeSet::from_flags(&[true])).unwrap();
        assert_eq!(t.get(0), 0.0);
    }

    #[test]
    fn whole_space_boundary_is_infinite() {
        let mask = DomainMask::whole_space(Grid::line(0.0, 0.5, 4).unwrap());
        assert!(boundary_distance(&mask).values().iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn plane_edt_matches_brute_force() {
        let g = Grid::plane([0.0, 0.0], 0.25, [9, 7]).unwrap();
        let mask = DomainMask::from_predicate(g, |p| {
            let (x, y) = (p[0] - 1.0, p[1] - 0.75);
            x * x + 2.0 * y * y < 0.9 && !(x > 0.2 && y.abs() < 0.3)
        })
        .unwrap();
        let fast = boundary_distance(&mask);
        let slow = brute_boundary(&mask);
        for i in 0..fast.values().len() {
            assert!((fast.get(i) - slow[i]).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn distance_to_set_brute_force_2d() {
        let g = Grid::plane([0.0, 0.0], 1.0, [6, 5]).unwrap();
        let mask = DomainMask::full(g.clone());
        let target = NodeSet::from_indices(g.len(), [3, 17, 28]).unwrap();
        let d = distance_to_set(&mask, &target).unwrap();
        for i in 0..g.len() {
            let brute = target
                .iter()
                .map(|t| dist2(g.coord(i), g.coord(t)))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            assert!((d.get(i) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn sublevel_of_constant_field() {
        let mask = DomainMask::full(Grid::line(0.0, 1.0, 5).unwrap());
        let f = ScalarField::from_fn(&mask, |_| 1.0).unwrap();
        assert!(sublevel_mask(&f, 1.0).is_empty());
        assert_eq!(sublevel_mask(&f, 2.0).len(), 5);
    }

    #[test]
    fn radius_beyond_boundary_rejected() {
        let mask = DomainMask::full(Grid::line(0.0, 0.1, 5).unwrap());
        let err = RadiusField::new(&mask, vec![0.0, 0.0, 0.31, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::RadiusExceedsBoundary { node: 2, .. }));
        assert!(RadiusField::new(&mask, vec![0.1, 0.2, 0.3, 0.2, 0.1]).is_ok());
        assert!(RadiusField::boundary(&DomainMask::whole_space(Grid::line(0.0, 1.0, 3).unwrap())).is_err());
    }

    #[test]
    fn field_json_round_trip_is_bit_exact() {
        let g = Grid::plane([-0.3, 0.7], 1.0 / 3.0, [4, 3]).unwrap();
        let mask = DomainMask::from_predicate(g, |p| p[0] + p[1] > 0.6).unwrap();
        let f = ScalarField::from_fn(&mask, |p| (p[0] * 17.1).sin() / 3.0 + p[1].exp()).unwrap();
        let back = ScalarField::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back.mask().flags(), f.mask().flags());
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn open_interval_is_lattice_aligned() {
        let mask = DomainMask::open_interval(-8.0, 9.0, 0.25).unwrap();
        assert_eq!(mask.grid().len(), 69);
        assert_eq!(mask.count(), 67);
        assert_eq!(mask.grid().coord(0)[0], -8.0);
        let d = boundary_distance(&mask);
        assert!((d.get(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn node_set_algebra() {
        let a = NodeSet::from_indices(10, [1, 3, 5]).unwrap();
        let b = NodeSet::from_indices(10, [5, 3, 7, 3]).unwrap();
        assert_eq!(a.union(&b).members(), &[1, 3, 5, 7]);
        assert_eq!(a.intersection(&b).members(), &[3, 5]);
        assert_eq!(a.difference(&b).members(), &[1]);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(NodeSet::from_indices(3, [3]).is_err());
    }
}
