//! Correlation lengths, crossing probabilities and the box-graph
//! approximation of boundary-touching cluster pieces.
//!
//! Box-graph quantities are expressed relative to an ambient square `Λ`: a
//! point at lattice position `w` has relative position `(w − centre)/s` where
//! `s` is the half-side of `Λ`, so `Λ` becomes `[−1, 1]²`. At exponent `n` the
//! square is tiled by `2·3ⁿ × 2·3ⁿ` boxes of relative side `ε = 3⁻ⁿ`.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arms::{estimate_arm_probability, ArmEventSpec, ArmKind};
use crate::clusters::{label_clusters, Color};
use crate::config::{trial_seed, Configuration};
use crate::error::{Error, Result};
use crate::fpp::has_blue_crossing;
use crate::lattice::{AxisBox, Point, SiteCoord, Window};
use crate::stats::MCEstimate;
use crate::P_C;

/// Box that a window must cover for a crossing of `[0, R]²`.
pub fn crossing_bound(big_r: f64) -> AxisBox {
    AxisBox::from_corners(0.0, 0.0, big_r, big_r).expand(2.0)
}

/// Probability of a blue left-right crossing of `[0, R]²`.
///
/// Trial `t` uses seed `trial_seed(seed, t)`, so estimates at different `p`
/// and `R` with the same seed are coupled.
pub fn crossing_probability(p: f64, big_r: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    if !(big_r >= 1.0) || !big_r.is_finite() {
        return Err(Error::arg(format!("crossing probability needs R ≥ 1, got {big_r}")));
    }
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    let window = Window::covering(&crossing_bound(big_r));
    let hits = (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            Ok(u64::from(has_blue_crossing(&c, big_r, big_r, 0.0, Point::ORIGIN)?))
        })
        .collect::<Result<Vec<u64>>>()?;
    MCEstimate::from_counts(hits.iter().sum(), samples)
}

/// Largest radius `correlation_length_eps` explores by default.
pub const DEFAULT_MAX_RADIUS: f64 = 4096.0;

/// `L_ε(p)`: smallest `R ≥ 1` with crossing probability at most `ε`.
pub fn correlation_length_eps(p: f64, eps: f64, samples: u64, seed: u64) -> Result<f64> {
    correlation_length_eps_within(p, eps, samples, seed, DEFAULT_MAX_RADIUS)
}

/// [`correlation_length_eps`] with an explicit search budget on `R`.
///
/// Scans `R = 2^{k/4}` until the estimate drops to `ε`, then bisects
/// geometrically to a relative bracket width of 5%.
pub fn correlation_length_eps_within(p: f64, eps: f64, samples: u64, seed: u64, max_radius: f64) -> Result<f64> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(Error::arg(format!("L_ε needs 0 < ε < 1/2, got {eps}")));
    }
    if !(0.0..P_C).contains(&p) {
        return Err(Error::arg(format!("L_ε needs 0 ≤ p < 1/2, got {p}")));
    }
    let below = |r: f64| crossing_probability(p, r, samples, seed).map(|e| e.mean <= eps);
    if below(1.0)? {
        return Ok(1.0);
    }
    let ratio = 2f64.powf(0.25);
    let mut lo = 1.0;
    let mut hi = ratio;
    loop {
        if hi > max_radius {
            return Err(Error::Budget(format!(
                "crossing probability at p={p} stays above ε={eps} up to R={max_radius}"
            )));
        }
        if below(hi)? {
            break;
        }
        lo = hi;
        hi *= ratio;
    }
    while hi - lo > 0.05 * hi {
        let mid = (lo * hi).sqrt();
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

const PI4_MAGIC: &str = "# trifpp pi4-table v1";

/// One row of a [`Pi4Table`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pi4Row {
    #[serde(rename = "R")]
    pub radius: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

/// Four-arm probabilities `π̂₄(1, R)` at `p = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pi4Table {
    rows: Vec<Pi4Row>,
}

impl Pi4Table {
    pub fn new(rows: Vec<Pi4Row>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::arg("a π₄ table needs at least one radius"));
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.radius >= 1.0) || !r.radius.is_finite() {
                return Err(Error::arg(format!("row {i}: radius must be finite and ≥ 1, got {}", r.radius)));
            }
            if !(0.0..=1.0).contains(&r.mean) || !(r.stderr >= 0.0) || !r.stderr.is_finite() || r.n == 0 {
                return Err(Error::arg(format!("row {i}: need mean in [0,1], finite stderr ≥ 0 and n ≥ 1")));
            }
            if i > 0 && r.radius <= rows[i - 1].radius {
                return Err(Error::arg(format!("row {i}: radii must be strictly increasing")));
            }
        }
        Ok(Pi4Table { rows })
    }

    /// Estimates `π̂₄(1, R)` at criticality for each radius, with trials
    /// coupled across radii.
    pub fn build(radii: &[f64], samples: u64, seed: u64) -> Result<Self> {
        let rows = radii
            .iter()
            .map(|&r| {
                let spec = ArmEventSpec::new(Point::ORIGIN, 1.0, r, ArmKind::Alternating(4));
                let e = estimate_arm_probability(&spec, P_C, samples, seed)?;
                Ok(Pi4Row { radius: r, mean: e.mean, stderr: e.stderr, n: e.n, seed })
            })
            .collect::<Result<Vec<_>>>()?;
        Pi4Table::new(rows)
    }

    pub fn rows(&self) -> &[Pi4Row] {
        &self.rows
    }

    /// Indices `i` where `R²π̂₄` drops from row `i` to row `i + 1` by more
    /// than `k` combined standard errors.
    pub fn monotonicity_violations(&self, k: f64) -> Vec<usize> {
        self.rows
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                let (a, b) = (w[0], w[1]);
                let ga = a.radius * a.radius * a.mean;
                let gb = b.radius * b.radius * b.mean;
                let s = (a.radius.powi(4) * a.stderr.powi(2) + b.radius.powi(4) * b.stderr.powi(2)).sqrt();
                gb < ga - k * s
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy with every mean shifted by `k` standard errors, clamped to [0, 1].
    pub fn shifted(&self, k: f64) -> Pi4Table {
        let rows = self.rows.iter().map(|r| Pi4Row { mean: (r.mean + k * r.stderr).clamp(0.0, 1.0), ..*r }).collect();
        Pi4Table { rows }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "{PI4_MAGIC}")?;
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        if first.trim_end_matches(['\r', '\n']) != PI4_MAGIC {
            return Err(Error::parse(format!("π₄ table must start with `{PI4_MAGIC}`")));
        }
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = rd.headers().map_err(|e| Error::parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["R", "mean", "stderr", "n", "seed"] {
            return Err(Error::parse("π₄ table columns must be R,mean,stderr,n,seed"));
        }
        let rows = rd
            .deserialize()
            .map(|r| r.map_err(|e| Error::parse(e.to_string())))
            .collect::<Result<Vec<Pi4Row>>>()?;
        Pi4Table::new(rows).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Pi4Table::read_csv(text.as_bytes())
    }
}

/// `L(p)`: smallest `R` with `R²·π̂₄(1, R) ≥ 1/(1/2 − p)`, interpolating
/// `log(R²π̂₄)` linearly in `log R` between table radii.
#[allow(non_snake_case)]
pub fn correlation_length_L(p: f64, table: &Pi4Table) -> Result<f64> {
    if !(p < P_C) || !p.is_finite() {
        return Err(Error::arg(format!("L(p) needs p < 1/2, got {p}")));
    }
    let target = 1.0 / (P_C - p);
    let g = |r: &Pi4Row| r.radius * r.radius * r.mean;
    let rows = table.rows();
    let i = rows.iter().position(|r| g(r) >= target).ok_or_else(|| {
        Error::Range(format!(
            "R²π̂₄ never reaches 1/(1/2 − p) = {target:.3} on the table (max R = {})",
            rows.last().map_or(0.0, |r| r.radius)
        ))
    })?;
    if i == 0 {
        if rows[0].radius == 1.0 {
            return Ok(1.0);
        }
        return Err(Error::Range(format!(
            "R²π̂₄ already exceeds {target:.3} at the smallest tabulated radius {}",
            rows[0].radius
        )));
    }
    let (a, b) = (rows[i - 1], rows[i]);
    let (ga, gb) = (g(&a), g(&b));
    if ga > 0.0 {
        let (la, lb) = (a.radius.ln(), b.radius.ln());
        let t = (target.ln() - ga.ln()) / (gb.ln() - ga.ln());
        Ok((la + t * (lb - la)).exp())
    } else {
        let t = (target - ga) / (gb - ga);
        Ok(a.radius + t * (b.radius - a.radius))
    }
}

/// `L(p)` evaluated on the table shifted by `∓k` standard errors, giving a
/// `(low, high)` interval. Either end may be a range error.
#[allow(non_snake_case)]
pub fn correlation_length_L_interval(p: f64, table: &Pi4Table, k: f64) -> (Result<f64>, Result<f64>) {
    (correlation_length_L(p, &table.shifted(k)), correlation_length_L(p, &table.shifted(-k)))
}

/// Tiling of an ambient square by `2·3ⁿ × 2·3ⁿ` boxes, indexed row-major
/// from the bottom-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    ambient: AxisBox,
    exponent: u32,
    per_side: usize,
}

impl BoxGrid {
    pub fn new(ambient: AxisBox, exponent: u32) -> Result<Self> {
        if exponent == 0 || exponent > 8 {
            return Err(Error::arg(format!("box exponent must be in 1..=8, got {exponent}")));
        }
        if !ambient.is_finite() || ambient.half_width <= 0.0 || (ambient.half_width - ambient.half_height).abs() > 1e-9 {
            return Err(Error::arg("the ambient region must be a finite nondegenerate square"));
        }
        Ok(BoxGrid { ambient, exponent, per_side: 2 * 3usize.pow(exponent) })
    }

    pub fn ambient(&self) -> &AxisBox {
        &self.ambient
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Relative side `ε = 3⁻ⁿ`.
    pub fn eps(&self) -> f64 {
        3f64.powi(-(self.exponent as i32))
    }

    /// Box side in lattice units.
    pub fn side(&self) -> f64 {
        2.0 * self.ambient.half_width / self.per_side as f64
    }

    pub fn per_side(&self) -> usize {
        self.per_side
    }

    pub fn len(&self) -> usize {
        self.per_side * self.per_side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell(&self, idx: usize) -> (usize, usize) {
        (idx % self.per_side, idx / self.per_side)
    }

    pub fn rect(&self, idx: usize) -> AxisBox {
        let (i, j) = self.cell(idx);
        let s = self.side();
        let x0 = self.ambient.x_min() + i as f64 * s;
        let y0 = self.ambient.y_min() + j as f64 * s;
        AxisBox::from_corners(x0, y0, x0 + s, y0 + s)
    }

    /// Whether two boxes are at L∞ grid distance exactly 1.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let (ai, aj) = self.cell(a);
        let (bi, bj) = self.cell(b);
        ai.abs_diff(bi).max(aj.abs_diff(bj)) == 1
    }

    pub fn on_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.cell(idx);
        i == 0 || j == 0 || i + 1 == self.per_side || j + 1 == self.per_side
    }

    /// Boxes meeting the open hexagon of `v`.
    pub fn boxes_meeting(&self, v: SiteCoord) -> Vec<usize> {
        let s = self.side();
        let p = v.embed();
        let r = crate::lattice::HEX_CIRCUMRADIUS;
        let m = self.per_side as f64;
        let lo_i = (((p.x - 0.5 - self.ambient.x_min()) / s).floor() - 1.0).clamp(0.0, m - 1.0) as usize;
        let hi_i = (((p.x + 0.5 - self.ambient.x_min()) / s).floor() + 1.0).clamp(0.0, m - 1.0) as usize;
        let lo_j = (((p.y - r - self.ambient.y_min()) / s).floor() - 1.0).clamp(0.0, m - 1.0) as usize;
        let hi_j = (((p.y + r - self.ambient.y_min()) / s).floor() + 1.0).clamp(0.0, m - 1.0) as usize;
        let mut out = Vec::new();
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let idx = j * self.per_side + i;
                if self.rect(idx).meets_hexagon_interior(v) {
                    out.push(idx);
                }
            }
        }
        out
    }

    /// `K_ε`: boxes meeting the interior of some hexagon of `sites`, sorted.
    pub fn cover(&self, sites: &[SiteCoord]) -> Vec<usize> {
        let set: BTreeSet<usize> = sites.iter().flat_map(|&v| self.boxes_meeting(v)).collect();
        set.into_iter().collect()
    }

    /// Relative Euclidean diameter of the union of the given boxes.
    pub fn union_diameter(&self, boxes: &[usize]) -> f64 {
        let pts: Vec<Point> = boxes.iter().flat_map(|&b| self.rect(b).corners()).collect();
        point_set_diameter(&pts) / self.ambient.half_width
    }
}

/// Euclidean diameter of a finite point set via its convex hull.
pub fn point_set_diameter(points: &[Point]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            best = best.max((*a - *b).norm());
        }
    }
    best
}

fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && (hull[hull.len() - 1] - hull[hull.len() - 2]).cross(p - hull[hull.len() - 2]) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Relative diameter of the union of the hexagons of `sites`.
fn hexagon_union_diameter(sites: &[SiteCoord], scale: f64) -> f64 {
    let pts: Vec<Point> = sites.iter().flat_map(|v| v.hexagon()).collect();
    point_set_diameter(&pts) / scale
}

/// A connected component of the blue sites inside the discretized ambient square.
#[derive(Debug, Clone)]
pub struct AmbientComponent {
    pub sites: Vec<SiteCoord>,
    /// `K_ε` of the component.
    pub boxes: Vec<usize>,
    pub touches_boundary: bool,
    /// Relative diameter of the union of hexagons.
    pub diameter: f64,
}

/// `G_ε`: boxes joined when L∞-adjacent or blue-connected inside the ambient
/// square. Blue connections are stored as the box sets of the blue components
/// (each such set is a clique).
#[derive(Debug, Clone)]
pub struct BoxGraph {
    grid: BoxGrid,
    components: Vec<AmbientComponent>,
    memberships: Vec<Vec<u32>>,
}

/// Box that a window must cover for [`box_graph`] on `ambient`.
pub fn box_graph_bound(ambient: &AxisBox) -> AxisBox {
    ambient.expand(1.5)
}

/// Builds `G_ε` at `ε = 3⁻ⁿ` over the sites whose open hexagon meets `ambient`.
pub fn box_graph(c: &Configuration, n: u32, ambient: &AxisBox) -> Result<BoxGraph> {
    let grid = BoxGrid::new(*ambient, n)?;
    if !c.window().covers_box(&box_graph_bound(ambient)) {
        return Err(Error::window("box_graph needs the ambient square with a margin of 1.5 inside the window"));
    }
    let w = *c.window();
    let inside: Vec<bool> = (0..w.len()).map(|i| ambient.meets_hexagon_interior(w.site(i))).collect();
    let restricted = Configuration::from_fn(w, |v| {
        let i = w.index(v).expect("site of the window");
        inside[i] && c.is_blue_idx(i)
    })?;
    let lab = label_clusters(&restricted, Color::Blue);
    let mut components = Vec::with_capacity(lab.len());
    let mut memberships = vec![Vec::new(); grid.len()];
    for (id, sites) in lab.all_sites().into_iter().enumerate() {
        let boxes = grid.cover(&sites);
        for &b in &boxes {
            memberships[b].push(id as u32);
        }
        let touches_boundary = sites.iter().any(|v| v.neighbors().iter().any(|&u| w.index(u).is_some_and(|j| !inside[j])));
        let diameter = hexagon_union_diameter(&sites, ambient.half_width);
        components.push(AmbientComponent { sites, boxes, touches_boundary, diameter });
    }
    Ok(BoxGraph { grid, components, memberships })
}

impl BoxGraph {
    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    pub fn components(&self) -> &[AmbientComponent] {
        &self.components
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        if self.grid.adjacent(a, b) {
            return true;
        }
        let (ma, mb) = (&self.memberships[a], &self.memberships[b]);
        ma.iter().any(|x| mb.contains(x))
    }

    /// Sorted neighbours of box `a`.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        let (i, j) = self.grid.cell(a);
        let m = self.grid.per_side as i64;
        for dj in -1..=1i64 {
            for di in -1..=1i64 {
                let (x, y) = (i as i64 + di, j as i64 + dj);
                if (di, dj) != (0, 0) && (0..m).contains(&x) && (0..m).contains(&y) {
                    set.insert((y * m + x) as usize);
                }
            }
        }
        for &id in &self.memberships[a] {
            set.extend(self.components[id as usize].boxes.iter().copied());
        }
        set.remove(&a);
        set.into_iter().collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|a| self.neighbors(a).len()).sum::<usize>() / 2
    }
}

/// Good subgraphs: vertex sets that are complete, maximal, contain a box on
/// the ambient boundary and whose union has relative diameter at least `δ`.
/// Each set is sorted; the list is sorted.
pub fn good_subgraphs(g: &BoxGraph, delta: f64) -> Result<Vec<Vec<usize>>> {
    if !(10.0 * g.grid.eps() < delta) {
        return Err(Error::arg(format!("good subgraphs need 10ε < δ, got ε={}, δ={delta}", g.grid.eps())));
    }
    // A clique without a blue-connected box spans at most 2×2 boxes, too small
    // for δ > 10ε, so every good clique contains a box of some component.
    // Visiting those boxes first lets the outer loop stop there.
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).filter(|&b| !g.memberships[b].is_empty()).collect();
    let lead = order.len();
    order.extend((0..n).filter(|&b| g.memberships[b].is_empty()));
    let mut rank = vec![0usize; n];
    for (k, &b) in order.iter().enumerate() {
        rank[b] = k;
    }
    let mut out = Vec::new();
    for &v in &order[..lead] {
        let nb = g.neighbors(v);
        let p: Vec<usize> = nb.iter().copied().filter(|&u| rank[u] > rank[v]).collect();
        let x: Vec<usize> = nb.iter().copied().filter(|&u| rank[u] < rank[v]).collect();
        let mut r = vec![v];
        bron_kerbosch(g, &mut r, p, x, &mut |clique| {
            let mut h = clique.to_vec();
            h.sort_unstable();
            if h.iter().any(|&b| g.grid.on_boundary(b)) && g.grid.union_diameter(&h) >= delta {
                out.push(h);
            }
        });
    }
    out.sort();
    Ok(out)
}

fn bron_kerbosch(g: &BoxGraph, r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if p.is_empty() {
        if x.is_empty() {
            emit(r);
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&w| g.has_edge(u, w)).count())
        .expect("p is nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&u| !g.has_edge(pivot, u)).collect();
    let mut p = p;
    for v in candidates {
        let np = p.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
        let nx = x.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
        r.push(v);
        bron_kerbosch(g, r, np, nx, emit);
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// Outcome of comparing good subgraphs with boundary-touching components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BijectionReport {
    /// Boundary-touching components of diameter `≥ δ`.
    pub components: usize,
    pub good_subgraphs: usize,
    /// Components whose `K_ε` is one of the good subgraphs.
    pub matched: usize,
}

impl BijectionReport {
    /// `matched / max(components, good_subgraphs)`, or 1 when both are empty.
    pub fn rate(&self) -> f64 {
        let d = self.components.max(self.good_subgraphs);
        if d == 0 {
            1.0
        } else {
            self.matched as f64 / d as f64
        }
    }

    pub fn is_bijection(&self) -> bool {
        self.matched == self.components && self.matched == self.good_subgraphs
    }
}

pub fn bijection_report(g: &BoxGraph, delta: f64) -> Result<BijectionReport> {
    let good = good_subgraphs(g, delta)?;
    let set: HashSet<&[usize]> = good.iter().map(|h| h.as_slice()).collect();
    let big: Vec<&AmbientComponent> = g.components.iter().filter(|c| c.touches_boundary && c.diameter >= delta).collect();
    let mut seen = HashSet::new();
    let matched = big.iter().filter(|c| set.contains(c.boxes.as_slice()) && seen.insert(c.boxes.as_slice())).count();
    Ok(BijectionReport { components: big.len(), good_subgraphs: good.len(), matched })
}

/// Regular sample of the union of hexagons of `sites`: each hexagon is split
/// into six triangles sampled on a barycentric grid of resolution `k`.
pub fn sample_hexagons(sites: &[SiteCoord], k: usize) -> Vec<Point> {
    let k = k.max(1);
    let mut out = Vec::new();
    for v in sites {
        let c = v.embed();
        let h = v.hexagon();
        out.push(c);
        for t in 0..6 {
            let (a, b) = (h[t] - c, h[(t + 1) % 6] - c);
            for u in 0..=k {
                for w in 0..=(k - u) {
                    if u == 0 && w == 0 {
                        continue;
                    }
                    out.push(c + a * (u as f64 / k as f64) + b * (w as f64 / k as f64));
                }
            }
        }
    }
    out
}

/// Regular `(k+1) × (k+1)` sample of each box.
pub fn sample_boxes(grid: &BoxGrid, boxes: &[usize], k: usize) -> Vec<Point> {
    let k = k.max(1);
    let mut out = Vec::new();
    for &b in boxes {
        let r = grid.rect(b);
        for j in 0..=k {
            for i in 0..=k {
                let x = r.x_min() + (r.x_max() - r.x_min()) * i as f64 / k as f64;
                let y = r.y_min() + (r.y_max() - r.y_min()) * j as f64 / k as f64;
                out.push(Point::new(x, y));
            }
        }
    }
    out
}

fn dist_inf(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

/// `max_{a∈A} min_{b∈B} ‖a − b‖_∞` for finite sets, pruning by sorted x.
fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let mut bs = b.to_vec();
    bs.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut worst: f64 = 0.0;
    for &p in a {
        let mid = bs.partition_point(|q| q.x < p.x);
        let mut best = f64::INFINITY;
        for q in bs[mid..].iter() {
            if q.x - p.x >= best {
                break;
            }
            best = best.min(dist_inf(p, *q));
        }
        for q in bs[..mid].iter().rev() {
            if p.x - q.x >= best {
                break;
            }
            best = best.min(dist_inf(p, *q));
        }
        worst = worst.max(best);
    }
    worst
}

/// L∞ Hausdorff distance between two finite point sets.
pub fn hausdorff_linf(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Boxes `K_ε` covering a cluster together with the relative L∞ Hausdorff
/// distance between the cluster and the cover, both sampled at resolution `k`.
pub fn box_cover(cluster: &[SiteCoord], grid: &BoxGrid, k: usize) -> Result<(Vec<usize>, f64)> {
    if cluster.is_empty() {
        return Err(Error::arg("box_cover needs a nonempty cluster"));
    }
    if cluster.iter().any(|&v| !grid.ambient.meets_hexagon_interior(v)) {
        return Err(Error::arg("box_cover needs the cluster inside the ambient square"));
    }
    let boxes = grid.cover(cluster);
    let d = hausdorff_linf(&sample_hexagons(cluster, k), &sample_boxes(grid, &boxes, k));
    Ok((boxes, d / grid.ambient.half_width))
}
