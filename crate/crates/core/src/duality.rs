//! Min-passage-time / max-disjoint-separator dualities, each side computed
//! by an algorithm that shares no code with the other.
//!
//! * quads: passage time between two opposite arcs versus a Menger count of
//!   disjoint yellow crossings between the other two arcs;
//! * clusters: passage time versus the number of yellow circuits peeled off
//!   around the two clusters;
//! * strips: passage time versus an exhaustive packing of minimal yellow
//!   separators (toy sizes only).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clusters::{blue_flood, fill_holes, hull_circuit, label_clusters, Circuit, Color};
use crate::config::{trial_seed, Configuration};
use crate::error::{Error, Result};
use crate::flow::max_vertex_disjoint_paths;
use crate::fpp::{passage_time, passage_time_within};
use crate::lattice::{DiscreteQuad, Region, SiteCoord, Window, NO_SITE, ROW_HEIGHT};

fn quad_indices(c: &Configuration, q: &DiscreteQuad) -> Result<()> {
    if q.sites().iter().any(|&v| !c.window().contains(v)) {
        return Err(Error::window("the quad must lie inside the configuration window"));
    }
    Ok(())
}

/// Maximum number of vertex-disjoint yellow paths in `D` from arc `(v2 v3)`
/// to arc `(v4 v1)`, by unit-capacity max flow.
pub fn max_disjoint_yellow_crossings(c: &Configuration, q: &DiscreteQuad) -> Result<u32> {
    quad_indices(c, q)?;
    let yellow: Vec<SiteCoord> = q.sites().iter().copied().filter(|&v| c.is_blue(v) == Some(false)).collect();
    let local: HashMap<SiteCoord, usize> = yellow.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, v) in yellow.iter().enumerate() {
        for d in 0..3 {
            if let Some(&j) = local.get(&v.offset(d)) {
                edges.push((i, j));
            }
        }
    }
    let pick = |arc: Vec<SiteCoord>| -> Vec<usize> { arc.iter().filter_map(|v| local.get(v).copied()).collect() };
    let sources = pick(q.arc(1));
    let sinks = pick(q.arc(3));
    Ok(max_vertex_disjoint_paths(yellow.len(), &edges, &sources, &sinks, u32::MAX))
}

/// `T((v1 v2), (v3 v4))(D)`: passage time between two opposite arcs inside `D`.
pub fn quad_passage_time(c: &Configuration, q: &DiscreteQuad) -> Result<u64> {
    quad_indices(c, q)?;
    let r = passage_time_within(c, &q.arc(0), &q.arc(2), |v| q.contains(v))?;
    Ok(r.time)
}

/// Result of peeling yellow circuits between two clusters.
#[derive(Debug, Clone, PartialEq)]
pub enum Peeling {
    /// Circuits peeled around the first and the second cluster.
    Count { first: Vec<Circuit>, second: Vec<Circuit> },
    /// Growth reached the window edge, or neither side could be peeled.
    Indeterminate,
}

impl Peeling {
    pub fn total(&self) -> Option<u32> {
        match self {
            Peeling::Count { first, second } => Some((first.len() + second.len()) as u32),
            Peeling::Indeterminate => None,
        }
    }
}

fn touching(c: &Configuration, x: &[bool], y: &[bool]) -> bool {
    let w = c.window();
    (0..w.len()).any(|i| x[i] && (y[i] || w.neighbor_indices(i).iter().any(|&j| j != NO_SITE && y[j])))
}

/// One peeling step on `x`: the innermost yellow circuit around the hull of
/// `x` (holes holding `other` stay open). `None` if that circuit would
/// enclose `other`.
fn peel(c: &Configuration, x: &mut Vec<bool>, other: &[bool]) -> Option<Circuit> {
    let w = c.window();
    let hull = fill_holes(w, x, Some(other));
    let sites = hull_circuit(w, &hull)?;
    let mut grown = hull;
    for v in &sites {
        grown[w.index(*v)?] = true;
    }
    let closed = fill_holes(w, &grown, None);
    if (0..w.len()).any(|i| other[i] && closed[i]) {
        return None;
    }
    let circuit = Circuit::new(sites).ok()?;
    *x = grown;
    Some(circuit)
}

/// Number of disjoint yellow circuits separating two blue clusters, built
/// constructively: grow each cluster through blue sites, then repeatedly peel
/// the innermost yellow circuit around one side until the grown regions touch.
pub fn max_disjoint_separating_circuits(c: &Configuration, a: &[SiteCoord], b: &[SiteCoord]) -> Result<Peeling> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::arg("both clusters must be nonempty"));
    }
    let w = c.window();
    let mut x = vec![false; w.len()];
    let mut y = vec![false; w.len()];
    for (set, mask) in [(a, &mut x), (b, &mut y)] {
        for &v in set {
            let i = w.index(v).ok_or_else(|| Error::window(format!("cluster site {v} lies outside the window")))?;
            if !c.is_blue_idx(i) {
                return Err(Error::arg(format!("cluster site {v} is not blue")));
            }
            mask[i] = true;
        }
    }
    let (mut first, mut second) = (Vec::new(), Vec::new());
    loop {
        if blue_flood(c, &mut x).is_none() || blue_flood(c, &mut y).is_none() {
            return Ok(Peeling::Indeterminate);
        }
        if touching(c, &x, &y) {
            return Ok(Peeling::Count { first, second });
        }
        // peel the smaller side first to keep both regions compact
        let x_first = x.iter().filter(|&&b| b).count() <= y.iter().filter(|&&b| b).count();
        let order: [bool; 2] = [x_first, !x_first];
        let mut done = false;
        for side_x in order {
            let r = if side_x { peel(c, &mut x, &y) } else { peel(c, &mut y, &x) };
            if let Some(circ) = r {
                if side_x { first.push(circ) } else { second.push(circ) }
                done = true;
                break;
            }
        }
        if !done {
            return Ok(Peeling::Indeterminate);
        }
    }
}

/// Largest site set accepted by the exhaustive separator search.
pub const MAX_BRUTE_FORCE_SITES: usize = 26;

/// All minimal connected separators between two sites of a small site set.
///
/// A separator is a set `S` of sites other than `a` and `b` meeting every
/// path from `a` to `b` inside the set; it is minimal when every site of `S`
/// borders both the component of `a` and the component of `b` in the
/// complement of `S`. Only connected separators are kept: those are the
/// yellow circuits and paths that can separate two clusters.
#[derive(Debug, Clone)]
pub struct SeparatorTable {
    sites: Vec<SiteCoord>,
    a: usize,
    b: usize,
    separators: Vec<u32>,
    by_lowest: Vec<Vec<u32>>,
}

fn reach(start: u32, allowed: u32, nbr: &[u32]) -> u32 {
    let mut seen = start & allowed;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        let mut f = frontier;
        while f != 0 {
            let i = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= nbr[i];
        }
        next &= allowed & !seen;
        seen |= next;
        frontier = next;
    }
    seen
}

impl SeparatorTable {
    pub fn new(sites: &[SiteCoord], a: SiteCoord, b: SiteCoord) -> Result<Self> {
        let n = sites.len();
        if n > MAX_BRUTE_FORCE_SITES {
            return Err(Error::arg(format!("exhaustive separator search is limited to {MAX_BRUTE_FORCE_SITES} sites, got {n}")));
        }
        let pos = |v: SiteCoord| sites.iter().position(|&u| u == v);
        let ai = pos(a).ok_or_else(|| Error::arg(format!("site {a} is not in the site set")))?;
        let bi = pos(b).ok_or_else(|| Error::arg(format!("site {b} is not in the site set")))?;
        if ai == bi {
            return Err(Error::arg("the two endpoints must differ"));
        }
        let nbr: Vec<u32> = sites
            .iter()
            .map(|v| v.neighbors().iter().filter_map(|&u| pos(u)).fold(0u32, |m, j| m | (1 << j)))
            .collect();
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let others: Vec<usize> = (0..n).filter(|&i| i != ai && i != bi).collect();
        let mut separators = Vec::new();
        for sub in 0u64..(1u64 << others.len()) {
            let mut s = 0u32;
            let mut bits = sub;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                s |= 1 << others[k];
            }
            let free = full & !s;
            let ra = reach(1 << ai, free, &nbr);
            if ra & (1 << bi) != 0 || s == 0 {
                continue;
            }
            let rb = reach(1 << bi, free, &nbr);
            let mut minimal = true;
            let mut bits = s;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if nbr[i] & ra == 0 || nbr[i] & rb == 0 {
                    minimal = false;
                    break;
                }
            }
            if minimal && reach(s & s.wrapping_neg(), s, &nbr) == s {
                separators.push(s);
            }
        }
        let mut by_lowest = vec![Vec::new(); n];
        for &s in &separators {
            by_lowest[s.trailing_zeros() as usize].push(s);
        }
        Ok(SeparatorTable { sites: sites.to_vec(), a: ai, b: bi, separators, by_lowest })
    }

    pub fn separators(&self) -> &[u32] {
        &self.separators
    }

    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    /// Maximum number of pairwise disjoint separators made of yellow sites.
    pub fn count(&self, c: &Configuration) -> Result<u32> {
        let mut yellow = 0u32;
        for (i, &v) in self.sites.iter().enumerate() {
            let blue = c.is_blue(v).ok_or_else(|| Error::window(format!("site {v} lies outside the window")))?;
            if (i == self.a || i == self.b) && !blue {
                return Err(Error::arg(format!("endpoint {v} must be blue")));
            }
            if !blue {
                yellow |= 1 << i;
            }
        }
        // exact set packing: decide the lowest undecided yellow site, either
        // leaving it unused or covering it with a separator through it
        let cands: Vec<Vec<u32>> = self.by_lowest.iter().map(|l| l.iter().copied().filter(|&s| s & !yellow == 0).collect()).collect();
        let mut memo: HashMap<u32, u32> = HashMap::new();
        Ok(pack(yellow, 0, &cands, &mut memo))
    }
}

fn pack(universe: u32, decided: u32, cands: &[Vec<u32>], memo: &mut HashMap<u32, u32>) -> u32 {
    let open = universe & !decided;
    if open == 0 {
        return 0;
    }
    if let Some(&r) = memo.get(&decided) {
        return r;
    }
    let e = open.trailing_zeros() as usize;
    let mut best = pack(universe, decided | (1 << e), cands, memo);
    for &s in &cands[e] {
        if s & decided == 0 {
            best = best.max(1 + pack(universe, decided | s, cands, memo));
        }
    }
    memo.insert(decided, best);
    best
}

/// Exhaustive maximum number of disjoint yellow separators between the
/// clusters of blue sites `a` and `b` inside the window part of the strip
/// `Strip(θ, h)`.
pub fn strip_separator_count_bruteforce(c: &Configuration, a: SiteCoord, b: SiteCoord, theta: f64, h: f64) -> Result<u32> {
    let strip = Region::Strip { theta, half_height: h };
    let sites: Vec<SiteCoord> = c.window().sites().filter(|&v| strip.contains_site(v)).collect();
    SeparatorTable::new(&sites, a, b)?.count(c)
}

/// Tally of one verification suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub checked: u64,
    pub skipped: u64,
    pub mismatches: u64,
}

impl SuiteReport {
    fn record(&mut self, lhs: u64, rhs: u64) {
        self.checked += 1;
        if lhs != rhs {
            self.mismatches += 1;
        }
    }

    pub fn skip_rate(&self) -> f64 {
        let total = self.checked + self.skipped;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }
}

/// Densities used by the random verification suites.
pub const SUITE_DENSITIES: [f64; 5] = [0.2, 0.35, 0.5, 0.65, 0.8];

fn parallelogram(w: i32, h: i32) -> Vec<SiteCoord> {
    (0..h).flat_map(|y| (0..w).map(move |x| SiteCoord::new(x, y))).collect()
}

fn offset_rectangle(w: i32, h: i32) -> Vec<SiteCoord> {
    (0..h).flat_map(|r| (0..w).map(move |c| Window::site_at(c, r))).collect()
}

/// A random quad with sides between 4 and 12: a parallelogram or an offset
/// rectangle with four distinct random marks on its boundary.
pub fn random_quad(rng: &mut impl Rng) -> DiscreteQuad {
    let (w, h) = (rng.gen_range(4..=12), rng.gen_range(4..=12));
    let sites = if rng.gen_bool(0.5) { parallelogram(w, h) } else { offset_rectangle(w, h) };
    let boundary_len = DiscreteQuad::from_boundary_positions(sites.clone(), [0, 1, 2, 3]).expect("valid shape").boundary().len();
    let mut pos: Vec<usize> = rand::seq::index::sample(rng, boundary_len, 4).into_vec();
    pos.sort_unstable();
    DiscreteQuad::from_boundary_positions(sites, [pos[0], pos[1], pos[2], pos[3]]).expect("distinct sorted marks")
}

/// Quad duality on random quads: passage time between arcs `(v1v2)` and
/// `(v3v4)` against the number of disjoint yellow crossings between the
/// other two arcs.
pub fn verify_quads(instances: u64, seed: u64) -> Result<SuiteReport> {
    let results: Vec<(u64, u64)> = (0..instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
            let q = random_quad(&mut rng);
            let p = SUITE_DENSITIES[rng.gen_range(0..SUITE_DENSITIES.len())];
            let c = Configuration::sample(Window::new(-1, 18, -1, 13)?, p, rng.gen())?;
            Ok((quad_passage_time(&c, &q)?, max_disjoint_yellow_crossings(&c, &q)? as u64))
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::default();
    for (a, b) in results {
        rep.record(a, b);
    }
    Ok(rep)
}

/// Cluster duality on random `size × size` windows: passage time between two
/// distinct blue clusters against the peeled circuit count. Instances whose
/// peeling reaches the window edge are skipped.
pub fn verify_circuits(instances: u64, size: i32, seed: u64) -> Result<SuiteReport> {
    let w = Window::new(0, size - 1, 0, size - 1)?;
    let results: Vec<Option<(u64, u64)>> = (0..instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
            let p = SUITE_DENSITIES[rng.gen_range(0..SUITE_DENSITIES.len())];
            let c = Configuration::sample(w, p, rng.gen())?;
            let lab = label_clusters(&c, Color::Blue);
            // two clusters away from the window edge, within six steps of each other
            let inner: Vec<usize> = (0..lab.len()).filter(|&k| !lab.touches_window_edge(k)).collect();
            let mut pair = None;
            for _ in 0..(if inner.is_empty() { 0 } else { 30 }) {
                let i = inner[rng.gen_range(0..inner.len())];
                let s = lab.sites(i);
                let u = s[rng.gen_range(0..s.len())];
                let v = Window::site_at(Window::col_of(u) + rng.gen_range(-6..=6), u.y + rng.gen_range(-6..=6));
                if let Some(j) = lab.label(v) {
                    if j != i && !lab.touches_window_edge(j) {
                        pair = Some((i, j));
                        break;
                    }
                }
            }
            let Some((i, j)) = pair else { return Ok(None) };
            let (a, b) = (lab.sites(i), lab.sites(j));
            let peel = max_disjoint_separating_circuits(&c, &a, &b)?;
            Ok(match peel.total() {
                Some(k) => Some((passage_time(&c, &a, &b, None)?.time, k as u64)),
                None => None,
            })
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::default();
    for r in results {
        match r {
            Some((a, b)) => rep.record(a, b),
            None => rep.skipped += 1,
        }
    }
    Ok(rep)
}

/// Strip duality on every coloring of a `4 × 4` block: the window holds six
/// offset columns of four rows, the outer columns are blue and the end sites
/// sit on them. Passage time inside the strip is compared with the
/// exhaustive separator packing.
pub fn verify_strip_exhaustive() -> Result<SuiteReport> {
    let w = Window::new(0, 5, 0, 3)?;
    let strip = Region::Strip { theta: 0.0, half_height: 4.0 * ROW_HEIGHT };
    let a = Window::site_at(0, 1);
    let b = Window::site_at(5, 1);
    let sites: Vec<SiteCoord> = w.sites().filter(|&v| strip.contains_site(v)).collect();
    let free: Vec<SiteCoord> = sites.iter().copied().filter(|&v| !matches!(Window::col_of(v), 0 | 5)).collect();
    let table = SeparatorTable::new(&sites, a, b)?;
    let results: Vec<(u64, u64)> = (0u32..(1 << free.len()))
        .into_par_iter()
        .map(|mask| {
            let c = Configuration::from_fn(w, |v| match free.iter().position(|&u| u == v) {
                Some(k) => mask & (1 << k) != 0,
                None => true,
            })?;
            let t = passage_time(&c, &[a], &[b], Some(&strip))?.time;
            Ok((t, table.count(&c)? as u64))
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::default();
    for (x, y) in results {
        rep.record(x, y);
    }
    Ok(rep)
}
