//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use trifpp::arms::{Annulus, SiteKind};
use trifpp::scaling::BoxGrid;
use trifpp::{Configuration, Point, SiteCoord};

/// Graph distance on the triangular lattice in axial coordinates.
pub fn hex_distance(a: SiteCoord, b: SiteCoord) -> u64 {
    let (dx, dy) = ((b.x - a.x) as i64, (b.y - a.y) as i64);
    dx.abs().max(dy.abs()).max((dx + dy).abs()) as u64
}

/// Dijkstra over the window with site weights, counting both endpoints.
pub fn dijkstra(c: &Configuration, a: &[SiteCoord], b: &[SiteCoord]) -> Option<u64> {
    let w = c.window();
    let targets: BTreeSet<SiteCoord> = b.iter().copied().collect();
    let mut best: HashMap<SiteCoord, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for &s in a {
        let d = c.weight(s)? as u64;
        if best.get(&s).map_or(true, |&x| d < x) {
            best.insert(s, d);
            heap.push(Reverse((d, s)));
        }
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if best[&v] < d {
            continue;
        }
        if targets.contains(&v) {
            return Some(d);
        }
        for u in v.neighbors() {
            if !w.contains(u) {
                continue;
            }
            let du = d + c.weight(u).unwrap() as u64;
            if best.get(&u).map_or(true, |&x| du < x) {
                best.insert(u, du);
                heap.push(Reverse((du, u)));
            }
        }
    }
    None
}

/// Components of ring sites of one color that touch both the hole and the
/// exterior.
fn crossing_clusters(c: &Configuration, ann: &Annulus, blue: bool) -> usize {
    let ring: BTreeSet<SiteCoord> =
        ann.ring_sites().into_iter().filter(|&v| c.is_blue(v) == Some(blue)).collect();
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &s in &ring {
        if !seen.insert(s) {
            continue;
        }
        let (mut inner, mut outer) = (false, false);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for u in v.neighbors() {
                match ann.kind(u) {
                    SiteKind::Hole => inner = true,
                    SiteKind::Exterior => outer = true,
                    _ => {}
                }
                if ring.contains(&u) && seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        if inner && outer {
            count += 1;
        }
    }
    count
}

/// Largest `k` such that the annulus carries `k` alternating arms, found by
/// counting crossing clusters of each color: `j` distinct blue crossing
/// clusters are separated by `j` disjoint yellow crossings and vice versa.
pub fn alternating_arms_oracle(c: &Configuration, center: Point, r: f64, big_r: f64) -> u32 {
    let ann = Annulus::new(center, r, big_r, None);
    let nb = crossing_clusters(c, &ann, true);
    let ny = crossing_clusters(c, &ann, false);
    2 * nb.min(ny) as u32
}

/// Whether some blue ring path joins the hole to the exterior.
pub fn blue_crossing_oracle(c: &Configuration, center: Point, r: f64, big_r: f64) -> bool {
    crossing_clusters(c, &Annulus::new(center, r, big_r, None), true) > 0
}

/// Directed Hausdorff in both directions by exhaustive search, L∞ metric.
pub fn hausdorff_brute(a: &[Point], b: &[Point]) -> f64 {
    let d = |p: &Point, q: &Point| (p.x - q.x).abs().max((p.y - q.y).abs());
    let dir = |xs: &[Point], ys: &[Point]| {
        xs.iter().map(|p| ys.iter().map(|q| d(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}

/// Edge set of the box graph from the definition: boxes at L∞ grid distance
/// one, or both meeting the hexagons of one blue component of the sites
/// whose open hexagon meets the ambient square.
pub fn box_graph_edges_brute(c: &Configuration, grid: &BoxGrid) -> BTreeSet<(usize, usize)> {
    let ambient = *grid.ambient();
    let sites: Vec<SiteCoord> =
        c.window().sites().filter(|&v| c.is_blue(v) == Some(true) && ambient.meets_hexagon_interior(v)).collect();
    let set: BTreeSet<SiteCoord> = sites.iter().copied().collect();
    let mut comp: HashMap<SiteCoord, usize> = HashMap::new();
    let mut n = 0;
    for &s in &sites {
        if comp.contains_key(&s) {
            continue;
        }
        comp.insert(s, n);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for u in v.neighbors() {
                if set.contains(&u) && !comp.contains_key(&u) {
                    comp.insert(u, n);
                    stack.push(u);
                }
            }
        }
        n += 1;
    }
    let mut boxes_of = vec![BTreeSet::new(); n];
    for (&v, &k) in &comp {
        for b in 0..grid.len() {
            if grid.rect(b).meets_hexagon_interior(v) {
                boxes_of[k].insert(b);
            }
        }
    }
    let m = grid.per_side();
    let mut edges = BTreeSet::new();
    for a in 0..grid.len() {
        for b in a + 1..grid.len() {
            let (ai, aj, bi, bj) = (a % m, a / m, b % m, b / m);
            if ai.abs_diff(bi) <= 1 && aj.abs_diff(bj) <= 1 {
                edges.insert((a, b));
            }
        }
    }
    for bs in &boxes_of {
        let v: Vec<usize> = bs.iter().copied().collect();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                edges.insert((v[i], v[j]));
            }
        }
    }
    edges
}
