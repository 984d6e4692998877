//! Monochromatic clusters, surrounding tests, the endpoint cluster of a
//! point, innermost yellow circuits and the cluster graph.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::lattice::{closest_site, dedup_cyclic, sites_in_region, trace_outer_boundary, AxisBox, Point, Region, SiteCoord, Window, NO_SITE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Yellow,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Blue => Color::Yellow,
            Color::Yellow => Color::Blue,
        }
    }
}

/// Summary of one cluster. `bbox` is `(x_min, x_max, y_min, y_max)` of the
/// embedded sites and `diameter` their L∞ diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterInfo {
    pub size: usize,
    pub bbox: (f64, f64, f64, f64),
    pub diameter: f64,
    pub representative: SiteCoord,
}

/// Clusters of one color on a window. Ids follow the order of the
/// representatives (the lexicographically smallest site of each cluster).
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    window: Window,
    color: Color,
    labels: Vec<u32>,
    clusters: Vec<ClusterInfo>,
}

const UNLABELED: u32 = u32::MAX;

impl ClusterLabeling {
    pub fn label(&self, v: SiteCoord) -> Option<usize> {
        self.window.index(v).and_then(|i| self.label_idx(i))
    }

    pub(crate) fn label_idx(&self, i: usize) -> Option<usize> {
        let l = self.labels[i];
        (l != UNLABELED).then_some(l as usize)
    }

    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Sites of cluster `id` in lexicographic order.
    pub fn sites(&self, id: usize) -> Vec<SiteCoord> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == id as u32).map(|i| self.window.site(i)).collect()
    }

    /// All clusters' site lists, indexed by id.
    pub fn all_sites(&self) -> Vec<Vec<SiteCoord>> {
        let mut out = vec![Vec::new(); self.clusters.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l != UNLABELED {
                out[l as usize].push(self.window.site(i));
            }
        }
        out
    }

    /// Whether the cluster contains a site on the outermost ring of the window.
    pub fn touches_window_edge(&self, id: usize) -> bool {
        (0..self.labels.len()).any(|i| self.labels[i] == id as u32 && self.window.on_edge(i))
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        parent[i as usize] = parent[parent[i as usize] as usize];
        i = parent[i as usize];
    }
    i
}

/// Labels the clusters of `color` by union-find.
pub fn label_clusters(c: &Configuration, color: Color) -> ClusterLabeling {
    let w = *c.window();
    let n = w.len();
    let want = color == Color::Blue;
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for i in 0..n {
        if c.is_blue_idx(i) != want {
            continue;
        }
        // neighbours 0, 1, 2 come later in index order; joining them covers every edge once
        let nb = w.neighbor_indices(i);
        for &j in &nb[..3] {
            if j != NO_SITE && c.is_blue_idx(j) == want {
                let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi as usize] = lo;
                }
            }
        }
    }
    let mut labels = vec![UNLABELED; n];
    let mut id_of_root: HashMap<u32, u32> = HashMap::new();
    let mut clusters: Vec<ClusterInfo> = Vec::new();
    for i in 0..n {
        if c.is_blue_idx(i) != want {
            continue;
        }
        let r = find(&mut parent, i as u32);
        let v = w.site(i);
        let p = v.embed();
        let id = *id_of_root.entry(r).or_insert_with(|| {
            clusters.push(ClusterInfo { size: 0, bbox: (p.x, p.x, p.y, p.y), diameter: 0.0, representative: v });
            (clusters.len() - 1) as u32
        });
        labels[i] = id;
        let info = &mut clusters[id as usize];
        info.size += 1;
        info.bbox = (info.bbox.0.min(p.x), info.bbox.1.max(p.x), info.bbox.2.min(p.y), info.bbox.3.max(p.y));
    }
    for info in &mut clusters {
        info.diameter = (info.bbox.1 - info.bbox.0).max(info.bbox.3 - info.bbox.2);
    }
    ClusterLabeling { window: w, color, labels, clusters }
}

/// Whether the union of the hexagons of `s` surrounds `z`, i.e. `z` lies in a
/// bounded component of the complement.
pub fn surrounds(s: &HashSet<SiteCoord>, z: Point) -> bool {
    if s.is_empty() {
        return false;
    }
    let start = closest_site(z);
    if s.contains(&start) || start.neighbors().iter().any(|u| s.contains(u) && u.hexagon_contains(z)) {
        return false;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for v in s {
        x0 = x0.min(v.x);
        x1 = x1.max(v.x);
        y0 = y0.min(v.y);
        y1 = y1.max(v.y);
    }
    let in_frame = |v: SiteCoord| v.x > x0 - 2 && v.x < x1 + 2 && v.y > y0 - 2 && v.y < y1 + 2;
    if !in_frame(start) {
        return false;
    }
    let mut seen: HashSet<SiteCoord> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for u in v.neighbors() {
            if s.contains(&u) || seen.contains(&u) {
                continue;
            }
            if !in_frame(u) {
                return false;
            }
            seen.insert(u);
            queue.push_back(u);
        }
    }
    true
}

/// Largest distance from `z` to a hexagon corner of the set.
pub fn outer_radius<'a>(sites: impl IntoIterator<Item = &'a SiteCoord>, z: Point) -> f64 {
    sites.into_iter().flat_map(|v| v.hexagon()).map(|q| (q - z).norm()).fold(0.0, f64::max)
}

/// The endpoint cluster of a point: either a blue cluster or the fallback hexagon.
#[derive(Debug, Clone, PartialEq)]
pub enum SurroundingCluster {
    Cluster {
        /// Cluster sites in lexicographic order.
        sites: Vec<SiteCoord>,
        /// Sites added to make the cluster surround the point (empty when it already does).
        augmentation: Vec<SiteCoord>,
        outer_radius: f64,
    },
    Hexagon(SiteCoord),
}

impl SurroundingCluster {
    pub fn into_sites(self) -> Vec<SiteCoord> {
        match self {
            SurroundingCluster::Cluster { sites, .. } => sites,
            SurroundingCluster::Hexagon(v) => vec![v],
        }
    }

    pub fn sites(&self) -> Vec<SiteCoord> {
        self.clone().into_sites()
    }
}

/// Blue clusters of `c` whose site centres all lie in `Disk(z, radius)`,
/// each as a lexicographically sorted site list, in order of representative.
pub fn clusters_in_disk(c: &Configuration, z: Point, radius: f64) -> Result<Vec<Vec<SiteCoord>>> {
    let bound = AxisBox::square(z, radius + 2.0);
    if !c.window().covers_box(&bound) {
        return Err(Error::window(format!("the window must cover the disk of radius {radius} around the point with a margin of 2")));
    }
    let disk = Region::Disk { center: z, radius };
    let w = c.window();
    let mut seen = vec![false; w.len()];
    let mut out = Vec::new();
    for v in sites_in_region(&disk, &AxisBox::square(z, radius)) {
        let i = w.index(v).expect("covered");
        if seen[i] || !c.is_blue_idx(i) {
            continue;
        }
        seen[i] = true;
        let mut comp = vec![i];
        let mut escaped = false;
        let mut k = 0;
        while k < comp.len() {
            let u = comp[k];
            k += 1;
            for j in w.neighbor_indices(u) {
                if j == NO_SITE {
                    escaped = true;
                    continue;
                }
                if seen[j] || !c.is_blue_idx(j) {
                    continue;
                }
                if !disk.contains(w.site(j).embed()) {
                    escaped = true;
                    continue;
                }
                seen[j] = true;
                comp.push(j);
            }
        }
        if !escaped {
            comp.sort_unstable();
            out.push(comp.into_iter().map(|j| w.site(j)).collect());
        }
    }
    out.sort_by_key(|s: &Vec<SiteCoord>| s[0]);
    Ok(out)
}

/// `Ĉ(z)` for a cluster: the cluster if it surrounds `z`, otherwise the
/// cluster plus every site whose addition makes it surround `z`. `None` when
/// `Ĉ(z)` does not surround `z`.
pub fn augmented_cluster(sites: &[SiteCoord], z: Point) -> Option<Vec<SiteCoord>> {
    let set: HashSet<SiteCoord> = sites.iter().copied().collect();
    if surrounds(&set, z) {
        return Some(Vec::new());
    }
    // a single extra hexagon can only close a gap next to the cluster
    let mut boundary: Vec<SiteCoord> = sites.iter().flat_map(|v| v.neighbors()).filter(|u| !set.contains(u)).collect();
    boundary.sort_unstable();
    boundary.dedup();
    let mut aug = Vec::new();
    let mut trial = set.clone();
    for v in boundary {
        trial.insert(v);
        if surrounds(&trial, z) {
            aug.push(v);
        }
        trial.remove(&v);
    }
    (!aug.is_empty()).then_some(aug)
}

/// `𝒞ᵖ(z)`: among blue clusters inside `Disk(z, radius)` whose augmentation
/// surrounds `z`, the one of largest outer radius (ties: smaller
/// representative); the hexagon containing `z` when there is none.
pub fn outermost_surrounding_cluster(c: &Configuration, z: Point, radius: f64) -> Result<SurroundingCluster> {
    if !(radius > 0.0) || !radius.is_finite() || !z.is_finite() {
        return Err(Error::arg(format!("disk radius must be positive and finite, got {radius}")));
    }
    let mut best: Option<SurroundingCluster> = None;
    let mut best_rad = f64::NEG_INFINITY;
    for sites in clusters_in_disk(c, z, radius)? {
        // hexagon bounding box, grown by one site, must contain z
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for v in &sites {
            let p = v.embed();
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        if z.x < x0 - 1.6 || z.x > x1 + 1.6 || z.y < y0 - 1.6 || z.y > y1 + 1.6 {
            continue;
        }
        let Some(aug) = augmented_cluster(&sites, z) else { continue };
        let rad = outer_radius(sites.iter().chain(aug.iter()), z);
        // clusters arrive in representative order, so strict > keeps the smaller one on ties
        if rad > best_rad {
            best_rad = rad;
            best = Some(SurroundingCluster::Cluster { sites, augmentation: aug, outer_radius: rad });
        }
    }
    Ok(best.unwrap_or_else(|| SurroundingCluster::Hexagon(closest_site(z))))
}

/// A cyclic sequence of distinct sites, consecutive ones adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    sites: Vec<SiteCoord>,
}

impl Circuit {
    pub fn new(sites: Vec<SiteCoord>) -> Result<Self> {
        let n = sites.len();
        if n < 3 {
            return Err(Error::arg("a circuit needs at least three sites"));
        }
        let distinct: HashSet<SiteCoord> = sites.iter().copied().collect();
        if distinct.len() != n {
            return Err(Error::arg("circuit sites must be distinct"));
        }
        if (0..n).any(|i| !sites[i].is_neighbor(sites[(i + 1) % n])) {
            return Err(Error::arg("consecutive circuit sites must be neighbours"));
        }
        Ok(Circuit { sites })
    }

    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Whether the circuit (as a union of hexagons) surrounds `z`.
    pub fn surrounds(&self, z: Point) -> bool {
        surrounds(&self.sites.iter().copied().collect(), z)
    }
}

/// Grows `region` through blue sites. `None` if it reaches the window edge.
pub(crate) fn blue_flood(c: &Configuration, region: &mut [bool]) -> Option<()> {
    let w = c.window();
    let mut stack: Vec<usize> = (0..w.len()).filter(|&i| region[i]).collect();
    if stack.iter().any(|&i| w.on_edge(i)) {
        return None;
    }
    while let Some(u) = stack.pop() {
        for j in w.neighbor_indices(u) {
            if j != NO_SITE && !region[j] && c.is_blue_idx(j) {
                if w.on_edge(j) {
                    return None;
                }
                region[j] = true;
                stack.push(j);
            }
        }
    }
    Some(())
}

/// Fills the holes of `region` (which must avoid the window edge). Holes that
/// contain a site of `keep_open` stay open.
pub(crate) fn fill_holes(w: &Window, region: &[bool], keep_open: Option<&[bool]>) -> Vec<bool> {
    let n = w.len();
    let mut outside = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&i| !region[i] && (w.on_edge(i) || keep_open.is_some_and(|k| k[i])))
        .collect();
    for &i in &stack {
        outside[i] = true;
    }
    while let Some(u) = stack.pop() {
        for j in w.neighbor_indices(u) {
            if j != NO_SITE && !region[j] && !outside[j] {
                outside[j] = true;
                stack.push(j);
            }
        }
    }
    outside.iter().map(|&o| !o).collect()
}

/// The circuit formed by the outside neighbours of a hull: trace its outer
/// boundary counterclockwise, collect the outside sites, then erase loops
/// chronologically starting from the site below the lowest hull site.
pub(crate) fn hull_circuit(w: &Window, hull: &[bool]) -> Option<Vec<SiteCoord>> {
    let start = (0..w.len()).find(|&i| hull[i])?;
    let inside = |v: SiteCoord| w.index(v).is_some_and(|i| hull[i]);
    let edges = trace_outer_boundary(w.site(start), &inside);
    let walk = dedup_cyclic(edges.iter().map(|&(v, k)| v.offset(k)));
    let mut out: Vec<SiteCoord> = Vec::new();
    let mut pos: HashMap<SiteCoord, usize> = HashMap::new();
    for v in walk {
        if let Some(&p) = pos.get(&v) {
            for u in out.drain(p + 1..) {
                pos.remove(&u);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    (out.len() >= 3).then_some(out)
}

/// The innermost yellow circuit surrounding `s`: grow `s` through blue sites,
/// fill holes, and take the circuit of outside neighbours. `None` when the
/// growth reaches the window edge or `s` has a site outside the window.
pub fn innermost_yellow_circuit(c: &Configuration, s: &[SiteCoord]) -> Option<Circuit> {
    let w = c.window();
    let mut region = vec![false; w.len()];
    for v in s {
        region[w.index(*v)?] = true;
    }
    if s.is_empty() {
        return None;
    }
    blue_flood(c, &mut region)?;
    let hull = fill_holes(w, &region, None);
    let sites = hull_circuit(w, &hull)?;
    if sites.iter().any(|&v| c.is_blue(v) != Some(false)) {
        return None;
    }
    Circuit::new(sites).ok()
}

/// Blue clusters as nodes; an edge joins two clusters touched by a common yellow site.
#[derive(Debug, Clone)]
pub struct ClusterGraph {
    labeling: ClusterLabeling,
    adj: Vec<Vec<usize>>,
}

impl ClusterGraph {
    pub fn labeling(&self) -> &ClusterLabeling {
        &self.labeling
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.adj[id]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// The node containing blue site `v`.
    pub fn node_of(&self, v: SiteCoord) -> Option<usize> {
        self.labeling.label(v)
    }
}

/// Builds the cluster graph from the yellow sites whose centre lies in
/// `region` (all yellow sites of the window when `None`).
pub fn build_cluster_graph(c: &Configuration, region: Option<&Region>) -> ClusterGraph {
    let labeling = label_clusters(c, Color::Blue);
    let w = *c.window();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); labeling.len()];
    for i in 0..w.len() {
        if c.is_blue_idx(i) || region.is_some_and(|r| !r.contains(w.site(i).embed())) {
            continue;
        }
        let mut ids: Vec<usize> = w.neighbor_indices(i).into_iter().filter(|&j| j != NO_SITE).filter_map(|j| labeling.label_idx(j)).collect();
        ids.sort_unstable();
        ids.dedup();
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                adj[ids[a]].push(ids[b]);
                adj[ids[b]].push(ids[a]);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    ClusterGraph { labeling, adj }
}

/// Number of edges on a shortest chain between two clusters; `None` if unreachable.
pub fn chain_distance(g: &ClusterGraph, a: usize, b: usize) -> Result<Option<u32>> {
    let n = g.node_count();
    if a >= n || b >= n {
        return Err(Error::arg(format!("cluster ids must be below {n}")));
    }
    let mut dist = vec![u32::MAX; n];
    dist[a] = 0;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        if u == b {
            return Ok(Some(dist[u]));
        }
        for &v in &g.adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    Ok(None)
}
