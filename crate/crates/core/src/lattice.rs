//! Triangular-lattice geometry.
//!
//! Sites are addressed by axial coordinates `(x, y)` meaning the complex
//! point `x + y·e^{iπ/3}`. Each site is also viewed as the regular hexagon of
//! inradius 1/2 centred on it (a face of the dual hexagonal lattice).
//!
//! Finite pieces of the lattice are indexed through a [`Window`], which is a
//! plane-rectangular block of rows stored in "offset" column coordinates
//! `col = x + ⌊y/2⌋`. Nothing in this crate ever materializes the infinite
//! lattice: every enumeration is bounded by a caller-supplied window or box.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;
/// Vertical distance between consecutive rows.
pub const ROW_HEIGHT: f64 = SQRT3 / 2.0;
/// Circumradius of a site hexagon.
pub const HEX_CIRCUMRADIUS: f64 = 1.0 / SQRT3;

/// Neighbor offsets in counterclockwise order, starting from angle 0.
pub const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// `r·e^{iθ}`.
    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Rotation by `-θ`, i.e. multiplication by `e^{-iθ}`.
    pub fn unrotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x + s * self.y, -s * self.x + c * self.y)
    }

    pub fn rotate(self, theta: f64) -> Point {
        self.unrotate(-theta)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// A site of the triangular lattice in axial coordinates.
///
/// Sites are totally ordered lexicographically by `(y, x)`; this order breaks
/// every tie in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SiteCoord {
    pub x: i32,
    pub y: i32,
}

impl Ord for SiteCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for SiteCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SiteCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl SiteCoord {
    pub const ORIGIN: SiteCoord = SiteCoord { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        SiteCoord { x, y }
    }

    /// Plane position `(x + y/2, y·√3/2)`.
    pub fn embed(self) -> Point {
        Point::new(self.x as f64 + self.y as f64 / 2.0, self.y as f64 * ROW_HEIGHT)
    }

    pub fn offset(self, d: usize) -> SiteCoord {
        let (dx, dy) = DIRECTIONS[d];
        SiteCoord::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors(self) -> [SiteCoord; 6] {
        std::array::from_fn(|d| self.offset(d))
    }

    pub fn is_neighbor(self, other: SiteCoord) -> bool {
        let d = (other.x - self.x, other.y - self.y);
        DIRECTIONS.contains(&d)
    }

    /// Direction index `d` with `self.offset(d) == other`, if adjacent.
    pub fn direction_to(self, other: SiteCoord) -> Option<usize> {
        let d = (other.x - self.x, other.y - self.y);
        DIRECTIONS.iter().position(|&o| o == d)
    }

    /// Rotation by 60° about the origin: `(x, y) ↦ (−y, x + y)`.
    pub fn rotate60(self) -> SiteCoord {
        SiteCoord::new(-self.y, self.x + self.y)
    }

    /// The six corners of the site hexagon, counterclockwise from angle 30°.
    pub fn hexagon(self) -> [Point; 6] {
        let c = self.embed();
        std::array::from_fn(|k| c + Point::polar(HEX_CIRCUMRADIUS, PI / 6.0 + k as f64 * PI / 3.0))
    }

    /// Whether `z` lies in the closed hexagon of this site.
    pub fn hexagon_contains(self, z: Point) -> bool {
        let d = z - self.embed();
        (0..6).all(|k| d.dot(Point::polar(1.0, k as f64 * PI / 3.0)) <= 0.5)
    }

    /// Whether `z` lies in the open hexagon of this site.
    pub fn hexagon_interior_contains(self, z: Point) -> bool {
        let d = z - self.embed();
        (0..6).all(|k| d.dot(Point::polar(1.0, k as f64 * PI / 3.0)) < 0.5)
    }
}

/// The site closest to `z`; ties go to the lexicographically smaller site.
pub fn closest_site(z: Point) -> SiteCoord {
    debug_assert!(z.is_finite());
    let yf = z.y / ROW_HEIGHT;
    let xf = z.x - yf / 2.0;
    let (x0, y0) = (xf.floor() as i32, yf.floor() as i32);
    let mut best: Option<(f64, SiteCoord)> = None;
    for dy in -1..=2 {
        for dx in -1..=2 {
            let v = SiteCoord::new(x0 + dx, y0 + dy);
            let d = (v.embed() - z).norm2();
            best = match best {
                None => Some((d, v)),
                Some((bd, bv)) if d < bd || (d == bd && v < bv) => Some((d, v)),
                b => b,
            };
        }
    }
    best.expect("candidate set is nonempty").1
}

/// Norm used by annuli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    LInf,
    Euclidean,
}

/// Axis-parallel closed box `center + [−half_width, half_width] × [−half_height, half_height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub center: Point,
    pub half_width: f64,
    pub half_height: f64,
}

impl AxisBox {
    pub fn new(center: Point, half_width: f64, half_height: f64) -> Self {
        AxisBox { center, half_width, half_height }
    }

    /// The box `[x0, x1] × [y0, y1]`.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        AxisBox {
            center: Point::new((x0 + x1) / 2.0, (y0 + y1) / 2.0),
            half_width: (x1 - x0).abs() / 2.0,
            half_height: (y1 - y0).abs() / 2.0,
        }
    }

    pub fn square(center: Point, half: f64) -> Self {
        AxisBox::new(center, half, half)
    }

    pub fn x_min(&self) -> f64 {
        self.center.x - self.half_width
    }
    pub fn x_max(&self) -> f64 {
        self.center.x + self.half_width
    }
    pub fn y_min(&self) -> f64 {
        self.center.y - self.half_height
    }
    pub fn y_max(&self) -> f64 {
        self.center.y + self.half_height
    }

    pub fn contains(&self, z: Point) -> bool {
        (z.x - self.center.x).abs() <= self.half_width && (z.y - self.center.y).abs() <= self.half_height
    }

    pub fn expand(&self, margin: f64) -> AxisBox {
        AxisBox::new(self.center, self.half_width + margin, self.half_height + margin)
    }

    pub fn is_finite(&self) -> bool {
        self.center.is_finite() && self.half_width.is_finite() && self.half_height.is_finite()
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_min(), self.y_min()),
            Point::new(self.x_max(), self.y_min()),
            Point::new(self.x_max(), self.y_max()),
            Point::new(self.x_min(), self.y_max()),
        ]
    }

    /// Whether the open hexagon of `v` meets this closed box.
    pub fn meets_hexagon_interior(&self, v: SiteCoord) -> bool {
        geometry::convex_overlap_open_closed(&v.hexagon(), &self.corners())
    }
}

/// Regions of the plane, with closed-boundary membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    AxisBox(AxisBox),
    /// `origin + e^{iθ}·([0, width] × [0, height])`.
    RotatedBox { origin: Point, theta: f64, width: f64, height: f64 },
    /// `{w : inner ≤ ‖w − center‖ ≤ outer}` in the chosen norm.
    Annulus { center: Point, inner: f64, outer: f64, norm: Norm },
    /// `e^{iθ}·(ℝ × [−half_height, half_height])`. Site membership uses the
    /// open-hexagon rule, see [`Region::contains_site`].
    Strip { theta: f64, half_height: f64 },
    Disk { center: Point, radius: f64 },
    /// `center + e^{iθ}·{w : |arg w| ≤ π/4, inner ≤ |w| ≤ outer}`.
    Sector { center: Point, theta: f64, inner: f64, outer: f64 },
}

impl Region {
    pub fn contains(&self, z: Point) -> bool {
        match *self {
            Region::AxisBox(b) => b.contains(z),
            Region::RotatedBox { origin, theta, width, height } => {
                let w = (z - origin).unrotate(theta);
                (0.0..=width).contains(&w.x) && (0.0..=height).contains(&w.y)
            }
            Region::Annulus { center, inner, outer, norm } => {
                let d = z - center;
                let r = match norm {
                    Norm::LInf => d.norm_inf(),
                    Norm::Euclidean => d.norm(),
                };
                inner <= r && r <= outer
            }
            Region::Strip { theta, half_height } => z.unrotate(theta).y.abs() <= half_height,
            Region::Disk { center, radius } => (z - center).norm2() <= radius * radius,
            Region::Sector { center, theta, inner, outer } => {
                let w = (z - center).unrotate(theta);
                let r2 = w.norm2();
                // |arg w| ≤ π/4  ⇔  x ≥ |y|
                w.x >= w.y.abs() && inner * inner <= r2 && r2 <= outer * outer
            }
        }
    }

    /// Site membership. For strips a site belongs iff the interior of its
    /// hexagon meets the closed strip; every other region tests the site centre.
    pub fn contains_site(&self, v: SiteCoord) -> bool {
        match *self {
            Region::Strip { theta, half_height } => {
                let normal = Point::polar(1.0, theta + PI / 2.0);
                let c = v.embed().dot(normal);
                let extent = v
                    .hexagon()
                    .iter()
                    .map(|&q| (q - v.embed()).dot(normal).abs())
                    .fold(0.0, f64::max);
                c - extent < half_height && c + extent > -half_height
            }
            _ => self.contains(v.embed()),
        }
    }
}

/// All sites of `r` whose centre lies in `bound`, in lexicographic order.
pub fn sites_in_region(r: &Region, bound: &AxisBox) -> Vec<SiteCoord> {
    assert!(bound.is_finite(), "enumeration bound must be finite");
    let y_lo = (bound.y_min() / ROW_HEIGHT).ceil() as i32;
    let y_hi = (bound.y_max() / ROW_HEIGHT).floor() as i32;
    let mut out = Vec::new();
    for y in y_lo..=y_hi {
        let x_lo = (bound.x_min() - y as f64 / 2.0).ceil() as i32;
        let x_hi = (bound.x_max() - y as f64 / 2.0).floor() as i32;
        for x in x_lo..=x_hi {
            let v = SiteCoord::new(x, y);
            if bound.contains(v.embed()) && r.contains_site(v) {
                out.push(v);
            }
        }
    }
    out
}

/// A finite rectangular block of sites.
///
/// Rows are `row_min..=row_max` (the axial `y`), columns are offset columns
/// `col = x + ⌊y/2⌋` in `col_min..=col_max`. Site indices run row-major, which
/// coincides with the lexicographic site order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub col_min: i32,
    pub col_max: i32,
    pub row_min: i32,
    pub row_max: i32,
}

pub const NO_SITE: usize = usize::MAX;

impl Window {
    pub fn new(col_min: i32, col_max: i32, row_min: i32, row_max: i32) -> Result<Self> {
        if col_min > col_max || row_min > row_max {
            return Err(Error::arg(format!(
                "window bounds must be ordered, got cols {col_min}..={col_max}, rows {row_min}..={row_max}"
            )));
        }
        Ok(Window { col_min, col_max, row_min, row_max })
    }

    /// Smallest window containing every site whose centre lies in `b`.
    pub fn covering(b: &AxisBox) -> Self {
        let row_min = (b.y_min() / ROW_HEIGHT).ceil() as i32;
        let row_max = ((b.y_max() / ROW_HEIGHT).floor() as i32).max(row_min);
        // plane x of (col, row) is col + (row mod 2)/2
        let col_min = (b.x_min() - 0.5).ceil() as i32;
        let col_max = (b.x_max().floor() as i32).max(col_min);
        Window { col_min, col_max, row_min, row_max }
    }

    pub fn width(&self) -> usize {
        (self.col_max - self.col_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.row_max - self.row_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn col_of(v: SiteCoord) -> i32 {
        v.x + v.y.div_euclid(2)
    }

    pub fn site_at(col: i32, row: i32) -> SiteCoord {
        SiteCoord::new(col - row.div_euclid(2), row)
    }

    pub fn contains(&self, v: SiteCoord) -> bool {
        let c = Self::col_of(v);
        (self.row_min..=self.row_max).contains(&v.y) && (self.col_min..=self.col_max).contains(&c)
    }

    pub fn index(&self, v: SiteCoord) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let c = Self::col_of(v);
        Some((v.y - self.row_min) as usize * self.width() + (c - self.col_min) as usize)
    }

    pub fn site(&self, idx: usize) -> SiteCoord {
        let w = self.width();
        let row = self.row_min + (idx / w) as i32;
        let col = self.col_min + (idx % w) as i32;
        Self::site_at(col, row)
    }

    /// Indices of the six neighbours in direction order, `NO_SITE` outside.
    #[inline]
    pub fn neighbor_indices(&self, idx: usize) -> [usize; 6] {
        let w = self.width();
        let h = self.height();
        let r = idx / w;
        let c = idx % w;
        let odd = (self.row_min + r as i32).rem_euclid(2) == 1;
        let mut out = [NO_SITE; 6];
        // same row
        if c + 1 < w {
            out[0] = idx + 1;
        }
        if c > 0 {
            out[3] = idx - 1;
        }
        // (0, 1) sits at col + odd, (-1, 1) at col + odd - 1 on the next row;
        // (0, -1) sits at col - even, (1, -1) at col - even + 1 on the previous row.
        let (up_a, up_b) = if odd { (c as isize + 1, c as isize) } else { (c as isize, c as isize - 1) };
        if r + 1 < h {
            let base = (r + 1) * w;
            if up_a >= 0 && (up_a as usize) < w {
                out[1] = base + up_a as usize;
            }
            if up_b >= 0 && (up_b as usize) < w {
                out[2] = base + up_b as usize;
            }
        }
        let (dn_a, dn_b) = if odd { (c as isize, c as isize + 1) } else { (c as isize - 1, c as isize) };
        if r > 0 {
            let base = (r - 1) * w;
            if dn_a >= 0 && (dn_a as usize) < w {
                out[4] = base + dn_a as usize;
            }
            if dn_b >= 0 && (dn_b as usize) < w {
                out[5] = base + dn_b as usize;
            }
        }
        out
    }

    /// Whether the site lies on the outermost ring of the window.
    pub fn on_edge(&self, idx: usize) -> bool {
        let w = self.width();
        let r = idx / w;
        let c = idx % w;
        r == 0 || c == 0 || r + 1 == self.height() || c + 1 == w
    }

    /// Whether every site with centre in `b` belongs to the window.
    pub fn covers_box(&self, b: &AxisBox) -> bool {
        let y_lo = (b.y_min() / ROW_HEIGHT).ceil() as i32;
        let y_hi = (b.y_max() / ROW_HEIGHT).floor() as i32;
        for y in y_lo..=y_hi {
            if y < self.row_min || y > self.row_max {
                return false;
            }
            let x_lo = (b.x_min() - y as f64 / 2.0).ceil() as i32;
            let x_hi = (b.x_max() - y as f64 / 2.0).floor() as i32;
            if x_lo > x_hi {
                continue;
            }
            if !self.contains(SiteCoord::new(x_lo, y)) || !self.contains(SiteCoord::new(x_hi, y)) {
                return false;
            }
        }
        true
    }

    /// The smaller plane box fully covered by the window.
    pub fn inner_box(&self) -> AxisBox {
        AxisBox::from_corners(
            self.col_min as f64 + 0.5,
            self.row_min as f64 * ROW_HEIGHT,
            self.col_max as f64,
            self.row_max as f64 * ROW_HEIGHT,
        )
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }
}

/// One step of counterclockwise boundary tracing around a set `inside`.
///
/// An oriented boundary edge is `(v, k)` with `v` inside and `v + d_k`
/// outside; the set lies to the left of the walk.
pub(crate) fn next_boundary_edge(v: SiteCoord, k: usize, inside: &impl Fn(SiteCoord) -> bool) -> (SiteCoord, usize) {
    let u = v.offset((k + 1) % 6);
    if inside(u) {
        (u, (k + 5) % 6)
    } else {
        (v, (k + 1) % 6)
    }
}

/// Traces the outer boundary of the component of `inside` containing the
/// lexicographically smallest site `start`. Returns the oriented edges.
pub(crate) fn trace_outer_boundary(start: SiteCoord, inside: &impl Fn(SiteCoord) -> bool) -> Vec<(SiteCoord, usize)> {
    debug_assert!(inside(start) && !inside(start.offset(4)));
    let first = (start, 4usize);
    let mut edges = vec![first];
    let mut cur = next_boundary_edge(first.0, first.1, inside);
    while cur != first {
        edges.push(cur);
        cur = next_boundary_edge(cur.0, cur.1, inside);
    }
    edges
}

/// Removes consecutive repeats from a cyclic sequence.
pub(crate) fn dedup_cyclic(seq: impl IntoIterator<Item = SiteCoord>) -> Vec<SiteCoord> {
    let mut out: Vec<SiteCoord> = Vec::new();
    for v in seq {
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// A discrete quad: a site set whose inner boundary is a single circuit,
/// with four marked boundary sites in counterclockwise order.
#[derive(Debug, Clone)]
pub struct DiscreteQuad {
    sites: BTreeSet<SiteCoord>,
    marks: [SiteCoord; 4],
    boundary: Vec<SiteCoord>,
    mark_pos: [usize; 4],
}

impl DiscreteQuad {
    pub fn new(sites: impl IntoIterator<Item = SiteCoord>, marks: [SiteCoord; 4]) -> Result<Self> {
        let sites: BTreeSet<SiteCoord> = sites.into_iter().collect();
        let boundary = jordan_boundary(&sites)?;
        let pos_of = |m: SiteCoord| boundary.iter().position(|&b| b == m);
        let mut mark_pos = [0usize; 4];
        for (k, &m) in marks.iter().enumerate() {
            mark_pos[k] = pos_of(m).ok_or_else(|| Error::arg(format!("mark {m} is not on the inner boundary")))?;
        }
        let n = boundary.len();
        let rel: Vec<usize> = mark_pos.iter().map(|&p| (p + n - mark_pos[0]) % n).collect();
        if !(rel[0] < rel[1] && rel[1] < rel[2] && rel[2] < rel[3]) {
            return Err(Error::arg("marks must be distinct and in counterclockwise order"));
        }
        Ok(DiscreteQuad { sites, marks, boundary, mark_pos })
    }

    /// Builds a quad from a set and four boundary positions (indices into the
    /// counterclockwise inner boundary starting at its smallest site).
    pub fn from_boundary_positions(sites: impl IntoIterator<Item = SiteCoord>, pos: [usize; 4]) -> Result<Self> {
        let sites: BTreeSet<SiteCoord> = sites.into_iter().collect();
        let boundary = jordan_boundary(&sites)?;
        let n = boundary.len();
        if pos.iter().any(|&p| p >= n) {
            return Err(Error::arg(format!("boundary position out of range (boundary has {n} sites)")));
        }
        let marks = pos.map(|p| boundary[p]);
        DiscreteQuad::new(sites, marks)
    }

    pub fn sites(&self) -> &BTreeSet<SiteCoord> {
        &self.sites
    }

    pub fn marks(&self) -> [SiteCoord; 4] {
        self.marks
    }

    /// Inner boundary in counterclockwise order.
    pub fn boundary(&self) -> &[SiteCoord] {
        &self.boundary
    }

    /// Arc `(v_k v_{k+1})` for `k ∈ 0..4` (marks indexed from zero), endpoints included.
    pub fn arc(&self, k: usize) -> Vec<SiteCoord> {
        let n = self.boundary.len();
        let (a, b) = (self.mark_pos[k % 4], self.mark_pos[(k + 1) % 4]);
        let len = (b + n - a) % n;
        (0..=len).map(|i| self.boundary[(a + i) % n]).collect()
    }

    pub fn contains(&self, v: SiteCoord) -> bool {
        self.sites.contains(&v)
    }
}

/// Validates a discrete Jordan set and returns its inner boundary as a
/// counterclockwise circuit starting at its smallest site.
fn jordan_boundary(sites: &BTreeSet<SiteCoord>) -> Result<Vec<SiteCoord>> {
    let start = *sites.first().ok_or_else(|| Error::arg("discrete quad needs a nonempty site set"))?;
    // connectivity
    let mut seen: HashSet<SiteCoord> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for u in v.neighbors() {
            if sites.contains(&u) && seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    if seen.len() != sites.len() {
        return Err(Error::arg("site set is not connected"));
    }
    // simple connectivity: the complement within a frame is connected
    let (mut x0, mut x1, mut y0, mut y1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for v in sites {
        x0 = x0.min(v.x);
        x1 = x1.max(v.x);
        y0 = y0.min(v.y);
        y1 = y1.max(v.y);
    }
    let in_frame = |v: SiteCoord| v.x >= x0 - 2 && v.x <= x1 + 2 && v.y >= y0 - 2 && v.y <= y1 + 2;
    let outside_start = SiteCoord::new(x0 - 2, y0 - 2);
    let mut outer: HashSet<SiteCoord> = HashSet::from([outside_start]);
    let mut queue = VecDeque::from([outside_start]);
    while let Some(v) = queue.pop_front() {
        for u in v.neighbors() {
            if in_frame(u) && !sites.contains(&u) && outer.insert(u) {
                queue.push_back(u);
            }
        }
    }
    let frame_size = ((x1 - x0 + 5) as usize) * ((y1 - y0 + 5) as usize);
    if outer.len() + sites.len() != frame_size {
        return Err(Error::arg("site set is not simply connected"));
    }
    let inside = |v: SiteCoord| sites.contains(&v);
    let edges = trace_outer_boundary(start, &inside);
    let cyc = dedup_cyclic(edges.iter().map(|&(v, _)| v));
    let inner: BTreeSet<SiteCoord> = sites
        .iter()
        .copied()
        .filter(|v| v.neighbors().iter().any(|u| !sites.contains(u)))
        .collect();
    let distinct: BTreeSet<SiteCoord> = cyc.iter().copied().collect();
    if cyc.len() < 3 || distinct.len() != cyc.len() || distinct != inner {
        return Err(Error::arg("inner boundary is not a single circuit"));
    }
    Ok(cyc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_neighbors_are_the_six_offsets() {
        let got: BTreeSet<SiteCoord> = SiteCoord::ORIGIN.neighbors().into_iter().collect();
        let want: BTreeSet<SiteCoord> = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
            .into_iter()
            .map(|(x, y)| SiteCoord::new(x, y))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_are_at_unit_distance_and_symmetric() {
        for v in [SiteCoord::new(3, -7), SiteCoord::new(-2, 5), SiteCoord::ORIGIN] {
            for u in v.neighbors() {
                assert!(((u.embed() - v.embed()).norm() - 1.0).abs() < 1e-12);
                assert!(u.neighbors().contains(&v));
            }
        }
    }

    #[test]
    fn rotation_permutes_neighbor_sets() {
        let v = SiteCoord::new(2, -3);
        let rotated: BTreeSet<SiteCoord> = v.neighbors().iter().map(|u| u.rotate60()).collect();
        let expected: BTreeSet<SiteCoord> = v.rotate60().neighbors().into_iter().collect();
        assert_eq!(rotated, expected);
        let p = v.embed().rotate(PI / 3.0);
        assert!((p - v.rotate60().embed()).norm() < 1e-12);
    }

    #[test]
    fn closest_site_of_embedded_site_is_itself() {
        for y in -5..5 {
            for x in -5..5 {
                let v = SiteCoord::new(x, y);
                assert_eq!(closest_site(v.embed()), v);
            }
        }
    }

    #[test]
    fn closest_site_tie_goes_to_smaller_site() {
        // midpoint between (0,0) and (1,0)
        assert_eq!(closest_site(Point::new(0.5, 0.0)), SiteCoord::new(0, 0));
        // midpoint between (0,0) and (0,1): (0.25, √3/4); (0,0) < (0,1)
        let m = (SiteCoord::new(0, 0).embed() + SiteCoord::new(0, 1).embed()) * 0.5;
        assert_eq!(closest_site(m), SiteCoord::new(0, 0));
        let m = (SiteCoord::new(2, 3).embed() + SiteCoord::new(3, 3).embed()) * 0.5;
        assert_eq!(closest_site(m), SiteCoord::new(2, 3));
    }

    #[test]
    fn closest_site_agrees_with_tie_resolved_hexagon_cells() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let z = Point::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let v = closest_site(z);
            assert!(v.hexagon_contains(z));
            // no smaller site's closed cell contains z
            let yf = (z.y / ROW_HEIGHT).floor() as i32;
            let xf = (z.x - z.y / SQRT3).floor() as i32;
            for dy in -2..=2 {
                for dx in -2..=2 {
                    let u = SiteCoord::new(xf + dx, yf + dy);
                    if u.hexagon_contains(z) {
                        assert!(v <= u, "{z:?}: {v} vs {u}");
                    }
                }
            }
        }
    }

    #[test]
    fn tiny_disk_holds_only_the_origin() {
        let r = Region::Disk { center: Point::ORIGIN, radius: 0.4 };
        let b = AxisBox::square(Point::ORIGIN, 5.0);
        assert_eq!(sites_in_region(&r, &b), vec![SiteCoord::ORIGIN]);
    }

    #[test]
    fn box_count_matches_brute_force_scan() {
        let inner = AxisBox::new(Point::new(0.3, -0.2), 1.0, 1.0);
        let r = Region::AxisBox(inner);
        let got = sites_in_region(&r, &AxisBox::square(Point::ORIGIN, 10.0));
        let mut want = Vec::new();
        for y in -20..=20 {
            for x in -20..=20 {
                let v = SiteCoord::new(x, y);
                if inner.contains(v.embed()) {
                    want.push(v);
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
        assert!(got.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_height_strip_uses_open_hexagon_rule() {
        let r = Region::Strip { theta: 0.0, half_height: 0.0 };
        let bound = AxisBox::new(Point::ORIGIN, 10.0, 4.0);
        let got = sites_in_region(&r, &bound);
        // brute force: does the open hexagon meet the line y = 0?
        let mut want = Vec::new();
        for v in sites_in_region(&Region::AxisBox(bound), &bound) {
            let c = v.embed();
            let hit = (-400..=400).any(|i| {
                let z = Point::new(c.x + i as f64 / 400.0, 0.0);
                v.hexagon_interior_contains(z)
            });
            if hit {
                want.push(v);
            }
        }
        assert_eq!(got, want);
        assert!(got.iter().all(|v| v.y == 0));
        assert_eq!(got.len(), 21);
    }

    #[test]
    fn strip_membership_counts_rows_touching_the_band() {
        // hexagon half-extent in y is 1/√3 ≈ 0.577; rows at y·0.866
        let r = Region::Strip { theta: 0.0, half_height: 0.5 };
        assert!(r.contains_site(SiteCoord::new(0, 1)));
        assert!(!r.contains_site(SiteCoord::new(0, 2)));
        let r = Region::Strip { theta: PI / 2.0, half_height: 0.0 };
        assert!(r.contains_site(SiteCoord::new(0, 0)));
        assert!(!r.contains_site(SiteCoord::new(1, 0)));
    }

    #[test]
    fn sector_and_rotated_box_membership() {
        let s = Region::Sector { center: Point::ORIGIN, theta: 0.0, inner: 1.0, outer: 3.0 };
        assert!(s.contains(Point::new(2.0, 0.0)));
        assert!(s.contains(Point::new(2.0, 2.0 - 1e-12)));
        assert!(!s.contains(Point::new(2.0, 2.1)));
        assert!(!s.contains(Point::new(0.5, 0.0)));
        let b = Region::RotatedBox { origin: Point::ORIGIN, theta: PI / 2.0, width: 2.0, height: 1.0 };
        assert!(b.contains(Point::new(-0.5, 1.0)));
        assert!(!b.contains(Point::new(0.5, 1.0)));
        let a = Region::Annulus { center: Point::ORIGIN, inner: 1.0, outer: 2.0, norm: Norm::LInf };
        assert!(a.contains(Point::new(1.0, 0.0)) && a.contains(Point::new(2.0, 2.0)));
        assert!(!a.contains(Point::new(0.5, 0.5)));
    }

    #[test]
    fn window_indexing_round_trips_and_neighbors_match() {
        let w = Window::new(-3, 4, -2, 3).unwrap();
        for i in 0..w.len() {
            let v = w.site(i);
            assert_eq!(w.index(v), Some(i));
            let nb = w.neighbor_indices(i);
            for d in 0..6 {
                let u = v.offset(d);
                assert_eq!(w.index(u).unwrap_or(NO_SITE), nb[d], "site {v} dir {d}");
            }
        }
        let sorted: Vec<SiteCoord> = w.sites().collect();
        assert!(sorted.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn covering_window_covers_its_box() {
        for (cx, cy, hw, hh) in [(0.0, 0.0, 5.0, 3.0), (7.3, -2.1, 11.2, 4.4), (-1.0, 9.0, 0.3, 0.2)] {
            let b = AxisBox::new(Point::new(cx, cy), hw, hh);
            let w = Window::covering(&b);
            assert!(w.covers_box(&b));
            let shrunk = Window { col_max: w.col_max - 3, ..w };
            assert!(!shrunk.covers_box(&b) || hw < 2.0);
        }
    }

    fn parallelogram(a: i32, b: i32) -> Vec<SiteCoord> {
        (0..b).flat_map(|y| (0..a).map(move |x| SiteCoord::new(x, y))).collect()
    }

    #[test]
    fn parallelogram_quad_is_valid_with_counterclockwise_arcs() {
        let sites = parallelogram(4, 3);
        let q = DiscreteQuad::new(
            sites.clone(),
            [SiteCoord::new(0, 0), SiteCoord::new(3, 0), SiteCoord::new(3, 2), SiteCoord::new(0, 2)],
        )
        .unwrap();
        assert_eq!(q.boundary().len(), 10);
        assert_eq!(q.arc(0), (0..4).map(|x| SiteCoord::new(x, 0)).collect::<Vec<_>>());
        assert_eq!(q.arc(1), vec![SiteCoord::new(3, 0), SiteCoord::new(3, 1), SiteCoord::new(3, 2)]);
        // clockwise marks are rejected
        assert!(DiscreteQuad::new(
            sites,
            [SiteCoord::new(0, 0), SiteCoord::new(0, 2), SiteCoord::new(3, 2), SiteCoord::new(3, 0)],
        )
        .is_err());
    }

    #[test]
    fn quad_with_a_hole_or_pinch_is_rejected() {
        let mut ring: Vec<SiteCoord> = SiteCoord::ORIGIN.neighbors().to_vec();
        let marks = [ring[0], ring[1], ring[2], ring[3]];
        assert!(DiscreteQuad::new(ring.clone(), marks).is_err());
        ring.push(SiteCoord::ORIGIN);
        // filled hexagon: inner boundary is the ring, which is a circuit
        let q = DiscreteQuad::new(ring, [SiteCoord::new(0, -1), SiteCoord::new(1, -1), SiteCoord::new(1, 0), SiteCoord::new(0, 1)]);
        assert!(q.is_ok(), "{q:?}");
        // a straight line is one site wide: boundary revisits sites
        let line: Vec<SiteCoord> = (0..5).map(|x| SiteCoord::new(x, 0)).collect();
        assert!(DiscreteQuad::new(line.clone(), [line[0], line[1], line[2], line[3]]).is_err());
    }
}
