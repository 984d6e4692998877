//! First-passage times with site weights `t(v) ∈ {0, 1}`.
//!
//! `T(γ)` sums the weights of all sites of `γ`, endpoints included, so on an
//! all-yellow configuration `T(0, n) = n + 1`. Every search here is a bucket
//! (Dial) shortest-path search over the configuration's window; nothing
//! outside the window is ever visited.

use crate::clusters::{outermost_surrounding_cluster, SurroundingCluster};
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{self, EPS};
use crate::lattice::{closest_site, sites_in_region, AxisBox, Point, Region, SiteCoord, Window, NO_SITE};

pub(crate) const INF: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Outcome of a set-to-set search. `time` is `u64::MAX` when `reached` is false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageResult {
    pub time: u64,
    pub geodesic: Option<Vec<SiteCoord>>,
    pub reached: bool,
}

impl PassageResult {
    fn unreached() -> Self {
        PassageResult { time: u64::MAX, geodesic: None, reached: false }
    }
}

pub(crate) struct Search {
    pub dist: Vec<u32>,
    pub pred: Vec<u32>,
    /// Smallest-index target at minimal distance, if any target was reached.
    pub hit: Option<usize>,
}

/// Bucket shortest-path search. `sources` carry their initial distances.
/// With `targets`, the search stops once the minimal target level is complete.
/// Predecessors prefer the smaller (lexicographically earlier) site on ties.
pub(crate) fn search<F: Fn(usize) -> bool>(
    c: &Configuration,
    sources: &[(usize, u32)],
    allowed: F,
    targets: Option<&[bool]>,
    track_pred: bool,
) -> Search {
    let w = c.window();
    let n = w.len();
    let mut dist = vec![INF; n];
    let mut pred = if track_pred { vec![NONE; n] } else { Vec::new() };
    let mut done = vec![false; n];
    let mut buckets: Vec<Vec<u32>> = Vec::new();
    let push = |buckets: &mut Vec<Vec<u32>>, d: u32, i: usize| {
        let d = d as usize;
        if buckets.len() <= d {
            buckets.resize_with(d + 1, Vec::new);
        }
        buckets[d].push(i as u32);
    };
    for &(s, d0) in sources {
        if allowed(s) && d0 < dist[s] {
            dist[s] = d0;
            push(&mut buckets, d0, s);
        }
    }
    let mut hit: Option<usize> = None;
    let mut level = 0usize;
    while level < buckets.len() {
        while let Some(u) = buckets[level].pop() {
            let u = u as usize;
            if done[u] || dist[u] as usize != level {
                continue;
            }
            done[u] = true;
            if let Some(t) = targets {
                if t[u] && hit.map_or(true, |h| u < h) {
                    hit = Some(u);
                }
            }
            for v in w.neighbor_indices(u) {
                if v == NO_SITE || done[v] || !allowed(v) {
                    continue;
                }
                let nd = level as u32 + c.weight_idx(v);
                if nd < dist[v] {
                    dist[v] = nd;
                    if track_pred {
                        pred[v] = u as u32;
                    }
                    push(&mut buckets, nd, v);
                } else if track_pred && nd == dist[v] && pred[v] != NONE && (u as u32) < pred[v] {
                    pred[v] = u as u32;
                }
            }
        }
        if hit.is_some() {
            break;
        }
        level += 1;
    }
    Search { dist, pred, hit }
}

fn trace_back(w: &Window, pred: &[u32], end: usize) -> Vec<SiteCoord> {
    let mut path = vec![w.site(end)];
    let mut cur = end;
    while pred[cur] != NONE {
        cur = pred[cur] as usize;
        path.push(w.site(cur));
    }
    path.reverse();
    path
}

fn indices(c: &Configuration, set: &[SiteCoord], name: &str) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::arg(format!("site set {name} must be nonempty")));
    }
    set.iter()
        .map(|&v| c.window().index(v).ok_or_else(|| Error::window(format!("site {v} of {name} lies outside the window"))))
        .collect()
}

/// `T(A, B)` over paths whose sites all satisfy `allowed`.
pub fn passage_time_within(
    c: &Configuration,
    a: &[SiteCoord],
    b: &[SiteCoord],
    allowed: impl Fn(SiteCoord) -> bool,
) -> Result<PassageResult> {
    let w = *c.window();
    let mask: Vec<bool> = (0..w.len()).map(|i| allowed(w.site(i))).collect();
    passage_time_masked(c, a, b, &mask)
}

pub(crate) fn passage_time_masked(c: &Configuration, a: &[SiteCoord], b: &[SiteCoord], mask: &[bool]) -> Result<PassageResult> {
    let ai = indices(c, a, "A")?;
    let bi = indices(c, b, "B")?;
    if !ai.iter().any(|&i| mask[i]) || !bi.iter().any(|&i| mask[i]) {
        return Err(Error::arg("the constraint must contain a site of A and a site of B"));
    }
    let w = c.window();
    let sources: Vec<(usize, u32)> = ai.iter().map(|&i| (i, c.weight_idx(i))).collect();
    let mut targets = vec![false; w.len()];
    for &i in &bi {
        targets[i] = true;
    }
    let s = search(c, &sources, |i| mask[i], Some(&targets), true);
    Ok(match s.hit {
        Some(t) => PassageResult { time: s.dist[t] as u64, geodesic: Some(trace_back(w, &s.pred, t)), reached: true },
        None => PassageResult::unreached(),
    })
}

/// `T(A, B)`, optionally constrained to the sites of a region.
pub fn passage_time(c: &Configuration, a: &[SiteCoord], b: &[SiteCoord], constraint: Option<&Region>) -> Result<PassageResult> {
    match constraint {
        None => {
            let mask = vec![true; c.window().len()];
            passage_time_masked(c, a, b, &mask)
        }
        Some(r) => passage_time_within(c, a, b, |v| r.contains_site(v)),
    }
}

/// Passage times from a source set to every site of the window.
pub struct DistanceField {
    window: Window,
    dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, v: SiteCoord) -> Option<u32> {
        self.window.index(v).map(|i| self.dist[i]).filter(|&d| d != INF)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }
}

/// Passage times from `sources` to all reachable sites, optionally restricted
/// to sites whose centre lies in `region`.
pub fn distances_from(c: &Configuration, sources: &[SiteCoord], region: Option<&Region>) -> Result<DistanceField> {
    let si = indices(c, sources, "sources")?;
    let src: Vec<(usize, u32)> = si.iter().map(|&i| (i, c.weight_idx(i))).collect();
    let w = *c.window();
    let s = match region {
        None => search(c, &src, |_| true, None, false),
        Some(r) => {
            let mask: Vec<bool> = (0..w.len()).map(|i| r.contains_site(w.site(i))).collect();
            search(c, &src, |i| mask[i], None, false)
        }
    };
    Ok(DistanceField { window: w, dist: s.dist })
}

/// Box that a window must cover for `a0n`: `[−n/2, 3n/2] × [−n/2, n/2]`.
pub fn a0n_bound(n: u32) -> AxisBox {
    let m = n as f64 / 2.0;
    AxisBox::from_corners(-m, -m, n as f64 + m, m)
}

/// `a_{0,n} = T(closest_site(0), closest_site(n))` in the whole window.
pub fn a0n(c: &Configuration, n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::arg("a0n needs n ≥ 1"));
    }
    if !c.window().covers_box(&a0n_bound(n)) {
        return Err(Error::window(format!("a0n({n}) needs the window to cover [-n/2, 3n/2] x [-n/2, n/2]")));
    }
    let r = passage_time(c, &[SiteCoord::ORIGIN], &[SiteCoord::new(n as i32, 0)], None)?;
    Ok(r.time)
}

/// `T(closest_site(z1), closest_site(z2))` in the whole window.
pub fn point_to_point(c: &Configuration, z1: Point, z2: Point) -> Result<PassageResult> {
    passage_time(c, &[closest_site(z1)], &[closest_site(z2)], None)
}

/// Domains with two marked sides, for the crossing convention: interior
/// sites `v_1..v_{k-1}` lie in the domain and the segments `v_0v_1`,
/// `v_{k-1}v_k` meet the start and end sides.
pub(crate) trait CrossingDomain {
    fn contains(&self, z: Point) -> bool;
    fn hits_start(&self, a: Point, b: Point) -> bool;
    fn hits_end(&self, a: Point, b: Point) -> bool;
    fn bound(&self) -> AxisBox;
}

/// `origin + e^{iθ}·([0, width] × [0, height])`; start = left side, end = right side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BoxDomain {
    pub origin: Point,
    pub theta: f64,
    pub width: f64,
    pub height: f64,
}

impl BoxDomain {
    fn corner(&self, x: f64, y: f64) -> Point {
        self.origin + Point::new(x, y).rotate(self.theta)
    }
}

impl CrossingDomain for BoxDomain {
    fn contains(&self, z: Point) -> bool {
        let q = (z - self.origin).unrotate(self.theta);
        q.x >= -EPS && q.x <= self.width + EPS && q.y >= -EPS && q.y <= self.height + EPS
    }
    fn hits_start(&self, a: Point, b: Point) -> bool {
        geometry::segments_intersect(a, b, self.corner(0.0, 0.0), self.corner(0.0, self.height))
    }
    fn hits_end(&self, a: Point, b: Point) -> bool {
        geometry::segments_intersect(a, b, self.corner(self.width, 0.0), self.corner(self.width, self.height))
    }
    fn bound(&self) -> AxisBox {
        let cs = [
            self.corner(0.0, 0.0),
            self.corner(self.width, 0.0),
            self.corner(self.width, self.height),
            self.corner(0.0, self.height),
        ];
        let (x0, x1) = cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
        let (y0, y1) = cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
        AxisBox::from_corners(x0, y0, x1, y1)
    }
}

/// `center + e^{iθ}·{w : |arg w| ≤ π/4, r1 ≤ |w| ≤ r2}`; start = inner arc, end = outer arc.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SectorDomain {
    pub center: Point,
    pub theta: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CrossingDomain for SectorDomain {
    fn contains(&self, z: Point) -> bool {
        let q = (z - self.center).unrotate(self.theta);
        let r = q.norm();
        q.x >= q.y.abs() - EPS && r >= self.r1 - EPS && r <= self.r2 + EPS
    }
    fn hits_start(&self, a: Point, b: Point) -> bool {
        geometry::segment_hits_arc(a, b, self.center, self.r1, self.theta, std::f64::consts::FRAC_PI_4)
    }
    fn hits_end(&self, a: Point, b: Point) -> bool {
        geometry::segment_hits_arc(a, b, self.center, self.r2, self.theta, std::f64::consts::FRAC_PI_4)
    }
    fn bound(&self) -> AxisBox {
        AxisBox::square(self.center, self.r2)
    }
}

/// Minimal `T(γ)` over crossings of the domain, or `None` when no crossing
/// exists in the window. With `zero_only`, the search stops after level 0 and
/// only answers whether a blue crossing exists (`Some(0)` or `None`).
pub(crate) fn solve_crossing(c: &Configuration, dom: &impl CrossingDomain, zero_only: bool) -> Result<Option<u64>> {
    let w = *c.window();
    let bound = dom.bound();
    if !w.covers_box(&bound.expand(1.0)) {
        return Err(Error::window("the window must cover the crossing domain with a margin of one site spacing"));
    }
    let near = sites_in_region(&Region::AxisBox(bound.expand(1.0)), &bound.expand(1.0));
    let mut interior = vec![false; w.len()];
    for &v in &near {
        if dom.contains(v.embed()) {
            interior[w.index(v).expect("covered")] = true;
        }
    }
    let mut best = u64::MAX;
    // k = 1: a single step crossing both sides
    for &v in &near {
        let i = w.index(v).expect("covered");
        for (d, u) in w.neighbor_indices(i).into_iter().enumerate() {
            if u == NO_SITE {
                continue;
            }
            let (a, b) = (v.embed(), v.offset(d).embed());
            if dom.hits_start(a, b) && dom.hits_end(a, b) {
                best = best.min((c.weight_idx(i) + c.weight_idx(u)) as u64);
            }
        }
    }
    let mut sources = Vec::new();
    let mut end_cost = vec![INF; w.len()];
    for &v in &near {
        let i = w.index(v).expect("covered");
        if !interior[i] {
            continue;
        }
        let mut start = INF;
        for (d, u) in w.neighbor_indices(i).into_iter().enumerate() {
            if u == NO_SITE {
                continue;
            }
            let q = v.offset(d).embed();
            if dom.hits_start(q, v.embed()) {
                start = start.min(c.weight_idx(u));
            }
            if dom.hits_end(v.embed(), q) {
                end_cost[i] = end_cost[i].min(c.weight_idx(u));
            }
        }
        if start != INF {
            sources.push((i, c.weight_idx(i) + start));
        }
    }
    if zero_only {
        if best == 0 {
            return Ok(Some(0));
        }
        let zero_sources: Vec<(usize, u32)> = sources.into_iter().filter(|&(_, d)| d == 0).collect();
        let targets: Vec<bool> = end_cost.iter().map(|&e| e == 0).collect();
        let s = search(c, &zero_sources, |i| interior[i] && c.is_blue_idx(i), Some(&targets), false);
        return Ok(s.hit.map(|_| 0));
    }
    let s = search(c, &sources, |i| interior[i], None, false);
    for (i, &e) in end_cost.iter().enumerate() {
        if e != INF && s.dist[i] != INF {
            best = best.min((s.dist[i] + e) as u64);
        }
    }
    Ok((best != u64::MAX).then_some(best))
}

/// `l_{w,h}`: minimal passage time of left-right crossings of
/// `z + e^{iθ}·([0, w] × [0, h])`.
pub fn line_to_line(c: &Configuration, w: f64, h: f64, theta: f64, z: Point) -> Result<Option<u64>> {
    if !(w >= 1.0 && h >= 1.0) || !w.is_finite() || !h.is_finite() || !theta.is_finite() || !z.is_finite() {
        return Err(Error::arg(format!("line_to_line needs finite w, h ≥ 1, got w={w}, h={h}")));
    }
    solve_crossing(c, &BoxDomain { origin: z, theta, width: w, height: h }, false)
}

/// Whether a blue left-right crossing of `z + e^{iθ}·([0, w] × [0, h])` exists.
pub fn has_blue_crossing(c: &Configuration, w: f64, h: f64, theta: f64, z: Point) -> Result<bool> {
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::arg("crossing box needs positive sides"));
    }
    Ok(solve_crossing(c, &BoxDomain { origin: z, theta, width: w, height: h }, true)?.is_some())
}

/// `X^θ(z; r1, r2)`: minimal passage time of crossings between the curved
/// sides of the sector. `None` when no crossing exists in the window.
pub fn sector_crossing(c: &Configuration, z: Point, theta: f64, r1: f64, r2: f64) -> Result<Option<u64>> {
    if !(0.0 < r1 && r1 < r2) || !r2.is_finite() {
        return Err(Error::arg(format!("sector crossing needs 0 < r1 < r2, got r1={r1}, r2={r2}")));
    }
    solve_crossing(c, &SectorDomain { center: z, theta, r1, r2 }, false)
}

/// Box that a window must cover for `point_to_line(n)`.
pub fn point_to_line_bound(n: u32) -> AxisBox {
    let m = n as f64 / 2.0;
    AxisBox::from_corners(-m, -m, n as f64 + 1.0, m)
}

/// `b_{0,n}`: minimal passage time from the origin to a site with `Re ≥ n`.
pub fn point_to_line(c: &Configuration, n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::arg("point_to_line needs n ≥ 1"));
    }
    if !c.window().covers_box(&point_to_line_bound(n)) {
        return Err(Error::window(format!("point_to_line({n}) needs the window to cover [-n/2, n+1] x [-n/2, n/2]")));
    }
    let w = c.window();
    let targets: Vec<bool> = (0..w.len()).map(|i| w.site(i).embed().x >= n as f64).collect();
    let o = w.index(SiteCoord::ORIGIN).expect("covered");
    let s = search(c, &[(o, c.weight_idx(o))], |_| true, Some(&targets), false);
    let t = s.hit.expect("the window contains targets connected to the origin");
    Ok(s.dist[t] as u64)
}

/// `T_{m,n}(h)`: passage time inside the discrete strip of half-height `h`
/// and direction `θ`, between the endpoint clusters of `m·e^{iθ}` and
/// `n·e^{iθ}` chosen with disk radius `radius`. The strip is truncated to
/// the window.
pub fn strip_passage(c: &Configuration, m: f64, n: f64, theta: f64, h: f64, radius: f64) -> Result<PassageResult> {
    if !(m < n) || !(h >= 1.0) || !h.is_finite() {
        return Err(Error::arg(format!("strip_passage needs m < n and h ≥ 1, got m={m}, n={n}, h={h}")));
    }
    let ends = [Point::polar(m, theta), Point::polar(n, theta)];
    let sets: Vec<Vec<SiteCoord>> = ends
        .iter()
        .map(|&z| outermost_surrounding_cluster(c, z, radius).map(SurroundingCluster::into_sites))
        .collect::<Result<_>>()?;
    let strip = Region::Strip { theta, half_height: h };
    let a: Vec<SiteCoord> = sets[0].iter().copied().filter(|&v| strip.contains_site(v)).collect();
    let b: Vec<SiteCoord> = sets[1].iter().copied().filter(|&v| strip.contains_site(v)).collect();
    if a.is_empty() || b.is_empty() {
        return Ok(PassageResult::unreached());
    }
    passage_time(c, &a, &b, Some(&strip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;

    fn win(n: i32) -> Window {
        Window::new(-n, n, -n, n).unwrap()
    }

    #[test]
    fn all_blue_times_are_zero() {
        let c = Configuration::uniform_color(win(12), true).unwrap();
        let r = passage_time(&c, &[SiteCoord::ORIGIN], &[SiteCoord::new(5, 3)], None).unwrap();
        assert_eq!(r.time, 0);
        assert_eq!(a0n(&c, 6).unwrap(), 0);
        assert_eq!(point_to_line(&c, 6).unwrap(), 0);
        assert_eq!(line_to_line(&c, 3.0, 3.0, 0.4, Point::ORIGIN).unwrap(), Some(0));
        assert_eq!(sector_crossing(&c, Point::ORIGIN, 1.0, 1.0, 4.0).unwrap(), Some(0));
    }

    #[test]
    fn all_yellow_counts_sites_with_endpoints() {
        let c = Configuration::uniform_color(win(12), false).unwrap();
        let r = passage_time(&c, &[SiteCoord::ORIGIN], &[SiteCoord::new(3, 0)], None).unwrap();
        assert_eq!(r.time, 4);
        let g = r.geodesic.unwrap();
        assert_eq!(g, (0..4).map(|x| SiteCoord::new(x, 0)).collect::<Vec<_>>());
        for n in 1..=8 {
            assert_eq!(a0n(&c, n).unwrap(), n as u64 + 1);
            assert_eq!(point_to_line(&c, n).unwrap(), n as u64 + 1);
        }
    }

    #[test]
    fn geodesic_prefers_smaller_predecessors() {
        let c = Configuration::uniform_color(win(6), false).unwrap();
        let r = passage_time(&c, &[SiteCoord::ORIGIN], &[SiteCoord::new(1, 1)], None).unwrap();
        // both (1,0) and (0,1) are optimal middles; (1,0) is lexicographically smaller
        assert_eq!(r.time, 3);
        assert_eq!(r.geodesic.unwrap(), vec![SiteCoord::ORIGIN, SiteCoord::new(1, 0), SiteCoord::new(1, 1)]);
    }

    #[test]
    fn unreachable_targets_are_reported() {
        let c = Configuration::uniform_color(win(6), false).unwrap();
        let r = passage_time_within(&c, &[SiteCoord::ORIGIN], &[SiteCoord::new(3, 0)], |v| v.x != 2).unwrap();
        assert!(!r.reached);
        assert!(passage_time(&c, &[], &[SiteCoord::ORIGIN], None).is_err());
        assert!(passage_time(&c, &[SiteCoord::new(40, 0)], &[SiteCoord::ORIGIN], None).is_err());
    }

    #[test]
    fn small_windows_are_rejected() {
        let c = Configuration::uniform_color(win(3), false).unwrap();
        assert!(matches!(a0n(&c, 8), Err(Error::Window(_))));
        assert!(matches!(point_to_line(&c, 8), Err(Error::Window(_))));
        assert!(matches!(line_to_line(&c, 5.0, 5.0, 0.0, Point::ORIGIN), Err(Error::Window(_))));
        assert!(line_to_line(&c, 0.5, 5.0, 0.0, Point::ORIGIN).is_err());
    }

    #[test]
    fn line_to_line_on_yellow_box_counts_a_row() {
        let c = Configuration::uniform_color(win(12), false).unwrap();
        // v0 = (0,0) lies on the left side, v_k = (5,0) on the right side
        assert_eq!(line_to_line(&c, 5.0, 5.0, 0.0, Point::ORIGIN).unwrap(), Some(6));
    }

    #[test]
    fn blue_crossing_detection_matches_zero_time() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for t in 0..200 {
            let c = Configuration::sample(win(14), rng.gen_range(0.3..0.7), t).unwrap();
            let theta = rng.gen_range(0.0..1.0);
            let z = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let l = line_to_line(&c, 6.0, 5.0, theta, z).unwrap().unwrap();
            assert_eq!(has_blue_crossing(&c, 6.0, 5.0, theta, z).unwrap(), l == 0);
        }
    }

    #[test]
    fn point_to_line_never_exceeds_a0n() {
        for seed in 0..50 {
            let c = Configuration::sample(win(16), 0.4, seed).unwrap();
            for n in [2, 5, 9] {
                assert!(point_to_line(&c, n).unwrap() <= a0n(&c, n).unwrap());
            }
        }
    }
}
