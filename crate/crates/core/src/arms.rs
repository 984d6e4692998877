//! Arm events in box annuli `A(z; r, R) = z + (Λ_R \ Λ_r)`.
//!
//! A site belongs to the annulus when its closed hexagon meets
//! `Λ_R(z) \ int Λ_r(z)`; sites whose hexagon lies in `int Λ_r(z)` form the
//! hole and the remaining sites the exterior. An arm is a monochromatic path
//! of annulus sites from a neighbour of the hole to a neighbour of the
//! exterior. Alternating arms are detected by counting blue/yellow interfaces
//! (hexagonal-lattice edge paths) that run from the hole to the exterior;
//! monochromatic arms by unit-capacity max flow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clusters::Color;
use crate::config::{trial_seed, Configuration};
use crate::error::{Error, Result};
use crate::flow::max_vertex_disjoint_paths;
use crate::geometry::convex_overlap_closed;
use crate::lattice::{closest_site, dedup_cyclic, trace_outer_boundary, AxisBox, Point, SiteCoord, Window, NO_SITE};
use crate::stats::MCEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArmKind {
    /// `k` arms of alternating colors in cyclic order.
    Alternating(u32),
    /// `k` disjoint arms of one color.
    Monochromatic(Color, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmEventSpec {
    pub center: Point,
    pub r: f64,
    pub big_r: f64,
    pub kind: ArmKind,
    /// Restricts arms to the closed half-plane `z + e^{iθ}·{Im ≥ 0}`.
    pub half_plane: Option<f64>,
}

impl ArmEventSpec {
    pub fn new(center: Point, r: f64, big_r: f64, kind: ArmKind) -> Self {
        ArmEventSpec { center, r, big_r, kind, half_plane: None }
    }

    fn validate(&self) -> Result<()> {
        if !(1.0 <= self.r && self.r <= self.big_r) || !self.big_r.is_finite() || !self.center.is_finite() {
            return Err(Error::arg(format!("arm events need 1 ≤ r ≤ R, got r={}, R={}", self.r, self.big_r)));
        }
        let k = match self.kind {
            ArmKind::Alternating(k) | ArmKind::Monochromatic(_, k) => k,
        };
        if k == 0 {
            return Err(Error::arg("arm count k must be at least 1"));
        }
        if let (ArmKind::Alternating(k), None) = (self.kind, self.half_plane) {
            if k % 2 == 1 {
                return Err(Error::Unsupported(format!(
                    "alternating({k}) in a full annulus is not a cyclically alternating sequence; only even k is supported"
                )));
            }
        }
        Ok(())
    }

    /// Window a configuration must cover for this event.
    pub fn required_box(&self) -> AxisBox {
        AxisBox::square(self.center, self.big_r + 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Hole,
    Exterior,
    /// Annulus site outside the half-plane restriction.
    Excluded,
    Ring,
}

/// Classification of the sites around one annulus.
#[derive(Debug, Clone)]
pub struct Annulus {
    window: Window,
    kind: Vec<SiteKind>,
}

impl Annulus {
    pub fn new(center: Point, r: f64, big_r: f64, half_plane: Option<f64>) -> Self {
        let window = Window::covering(&AxisBox::square(center, big_r + 2.0));
        let outer = AxisBox::square(center, big_r).corners();
        let mut kind: Vec<SiteKind> = (0..window.len())
            .map(|i| {
                let v = window.site(i);
                let hex = v.hexagon();
                if hex.iter().all(|q| (q.x - center.x).abs() < r && (q.y - center.y).abs() < r) {
                    SiteKind::Hole
                } else if window.on_edge(i) || !convex_overlap_closed(&hex, &outer) {
                    SiteKind::Exterior
                } else if half_plane.is_some_and(|t| (v.embed() - center).unrotate(t).y < 0.0) {
                    SiteKind::Excluded
                } else {
                    SiteKind::Ring
                }
            })
            .collect();
        if !kind.contains(&SiteKind::Hole) {
            let i = window.index(closest_site(center)).expect("centre lies in the window");
            kind[i] = SiteKind::Hole;
        }
        Annulus { window, kind }
    }

    pub fn kind(&self, v: SiteCoord) -> SiteKind {
        self.window.index(v).map_or(SiteKind::Exterior, |i| self.kind[i])
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn ring_sites(&self) -> Vec<SiteCoord> {
        (0..self.window.len()).filter(|&i| self.kind[i] == SiteKind::Ring).map(|i| self.window.site(i)).collect()
    }

    pub fn touches(&self, v: SiteCoord, k: SiteKind) -> bool {
        v.neighbors().iter().any(|&u| self.kind(u) == k)
    }

    /// Sites bordering the hole, in counterclockwise order of the hole's
    /// outer boundary (a site may repeat at pinch points).
    pub fn inner_ring_order(&self) -> Vec<SiteCoord> {
        let start = (0..self.window.len()).find(|&i| self.kind[i] == SiteKind::Hole).expect("hole is nonempty");
        let inside = |v: SiteCoord| self.kind(v) == SiteKind::Hole;
        let edges = trace_outer_boundary(self.window.site(start), &inside);
        dedup_cyclic(edges.iter().map(|&(v, k)| v.offset(k)))
    }
}

fn covered(c: &Configuration, b: &AxisBox) -> Result<()> {
    if !c.window().covers_box(b) {
        return Err(Error::window("the annulus with a margin of 2 must lie inside the window"));
    }
    Ok(())
}

struct Interfaces<'a> {
    ann: &'a Annulus,
    blue: Vec<bool>,
}

impl Interfaces<'_> {
    fn kind(&self, v: SiteCoord) -> (SiteKind, bool) {
        match self.ann.window.index(v) {
            Some(i) => (self.ann.kind[i], self.blue[i]),
            None => (SiteKind::Exterior, false),
        }
    }

    /// Follows the interface through edge `(v, k)` (blue `v`, yellow
    /// `v + d_k`) to its end and returns the boundary kind reached there.
    fn trace(&self, mut v: SiteCoord, mut k: usize, forward: bool) -> SiteKind {
        let step = if forward { 1 } else { 5 };
        let cap = 6 * self.ann.window.len() + 6;
        for _ in 0..cap {
            let u = v.offset((k + step) % 6);
            match self.kind(u) {
                (SiteKind::Ring, true) => {
                    v = u;
                    k = (k + 6 - step) % 6;
                }
                (SiteKind::Ring, false) => k = (k + step) % 6,
                (other, _) => return other,
            }
        }
        unreachable!("interfaces starting on the boundary end on the boundary")
    }
}

/// Number of blue/yellow interface curves crossing the annulus from the hole
/// to the exterior.
pub fn count_crossing_interfaces(c: &Configuration, z: Point, r: f64, big_r: f64) -> Result<u32> {
    let spec = ArmEventSpec::new(z, r, big_r, ArmKind::Alternating(2));
    spec.validate()?;
    covered(c, &spec.required_box())?;
    Ok(interface_count(c, &Annulus::new(z, r, big_r, None)))
}

fn interface_count(c: &Configuration, ann: &Annulus) -> u32 {
    let w = ann.window;
    let blue: Vec<bool> = (0..w.len()).map(|i| ann.kind[i] == SiteKind::Ring && c.is_blue(w.site(i)) == Some(true)).collect();
    let it = Interfaces { ann, blue };
    let mut count = 0;
    for i in 0..w.len() {
        if ann.kind[i] != SiteKind::Ring || !it.blue[i] {
            continue;
        }
        let v = w.site(i);
        for (k, j) in w.neighbor_indices(i).into_iter().enumerate() {
            if j == NO_SITE || ann.kind[j] != SiteKind::Ring || it.blue[j] {
                continue;
            }
            if it.kind(v.offset((k + 5) % 6)).0 == SiteKind::Hole && it.trace(v, k, true) == SiteKind::Exterior {
                count += 1;
            }
            if it.kind(v.offset((k + 1) % 6)).0 == SiteKind::Hole && it.trace(v, k, false) == SiteKind::Exterior {
                count += 1;
            }
        }
    }
    count
}

/// Maximum number of disjoint arms of one color.
pub fn max_monochromatic_arms(c: &Configuration, ann: &Annulus, color: Color, limit: u32) -> u32 {
    let want = color == Color::Blue;
    let w = ann.window;
    let nodes: Vec<usize> = (0..w.len())
        .filter(|&i| ann.kind[i] == SiteKind::Ring && c.is_blue(w.site(i)) == Some(want))
        .collect();
    let mut local = vec![usize::MAX; w.len()];
    for (k, &i) in nodes.iter().enumerate() {
        local[i] = k;
    }
    let mut edges = Vec::new();
    let (mut sources, mut sinks) = (Vec::new(), Vec::new());
    for (k, &i) in nodes.iter().enumerate() {
        let nb = w.neighbor_indices(i);
        for &j in &nb[..3] {
            if j != NO_SITE && local[j] != usize::MAX {
                edges.push((k, local[j]));
            }
        }
        if nb.iter().any(|&j| j != NO_SITE && ann.kind[j] == SiteKind::Hole) {
            sources.push(k);
        }
        if nb.iter().any(|&j| j == NO_SITE || ann.kind[j] == SiteKind::Exterior) {
            sinks.push(k);
        }
    }
    max_vertex_disjoint_paths(nodes.len(), &edges, &sources, &sinks, limit)
}

/// Whether the configuration realizes the arm event.
pub fn detect_arm_event(c: &Configuration, spec: &ArmEventSpec) -> Result<bool> {
    spec.validate()?;
    if spec.r == spec.big_r {
        return Ok(true);
    }
    covered(c, &spec.required_box())?;
    let ann = Annulus::new(spec.center, spec.r, spec.big_r, spec.half_plane);
    Ok(match spec.kind {
        ArmKind::Alternating(k) => {
            // k alternating arms need k interfaces around a full annulus, k − 1 in a half-annulus
            let need = if spec.half_plane.is_some() { k - 1 } else { k };
            interface_count(c, &ann) >= need
        }
        ArmKind::Monochromatic(color, k) => max_monochromatic_arms(c, &ann, color, k) >= k,
    })
}

/// Monte Carlo probability of an arm event at density `p`.
pub fn estimate_arm_probability(spec: &ArmEventSpec, p: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    spec.validate()?;
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    if spec.r == spec.big_r {
        return Ok(MCEstimate { mean: 1.0, stderr: 0.0, n: samples });
    }
    let window = Window::covering(&spec.required_box());
    let hits: Vec<bool> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            detect_arm_event(&c, spec)
        })
        .collect::<Result<_>>()?;
    MCEstimate::from_counts(hits.iter().filter(|&&h| h).count() as u64, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win() -> Window {
        Window::covering(&AxisBox::square(Point::ORIGIN, 12.0))
    }

    #[test]
    fn monochromatic_annulus_has_no_interfaces() {
        for blue in [true, false] {
            let c = Configuration::uniform_color(win(), blue).unwrap();
            assert_eq!(count_crossing_interfaces(&c, Point::ORIGIN, 1.0, 6.0).unwrap(), 0);
        }
    }

    #[test]
    fn split_annulus_has_two_interfaces() {
        let c = Configuration::from_fn(win(), |v| v.embed().y > 0.1).unwrap();
        assert_eq!(count_crossing_interfaces(&c, Point::ORIGIN, 1.0, 6.0).unwrap(), 2);
        let d = Configuration::from_fn(win(), |v| v.embed().x > 0.1).unwrap();
        assert_eq!(count_crossing_interfaces(&d, Point::new(0.3, 0.2), 2.0, 7.0).unwrap(), 2);
    }

    #[test]
    fn four_quadrants_give_four_interfaces() {
        let c = Configuration::from_fn(win(), |v| {
            let p = v.embed();
            (p.x > 0.1) == (p.y > 0.1)
        })
        .unwrap();
        assert_eq!(count_crossing_interfaces(&c, Point::ORIGIN, 1.0, 8.0).unwrap(), 4);
        let spec = ArmEventSpec::new(Point::ORIGIN, 1.0, 8.0, ArmKind::Alternating(4));
        assert!(detect_arm_event(&c, &spec).unwrap());
        let spec6 = ArmEventSpec::new(Point::ORIGIN, 1.0, 8.0, ArmKind::Alternating(6));
        assert!(!detect_arm_event(&c, &spec6).unwrap());
    }

    #[test]
    fn degenerate_annulus_is_certain() {
        let c = Configuration::uniform_color(win(), false).unwrap();
        let spec = ArmEventSpec::new(Point::ORIGIN, 4.0, 4.0, ArmKind::Monochromatic(Color::Blue, 3));
        assert!(detect_arm_event(&c, &spec).unwrap());
        let e = estimate_arm_probability(&spec, 0.1, 10, 1).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn all_blue_arms() {
        let c = Configuration::uniform_color(win(), true).unwrap();
        let blue1 = ArmEventSpec::new(Point::ORIGIN, 1.0, 6.0, ArmKind::Monochromatic(Color::Blue, 1));
        let yellow1 = ArmEventSpec::new(Point::ORIGIN, 1.0, 6.0, ArmKind::Monochromatic(Color::Yellow, 1));
        assert!(detect_arm_event(&c, &blue1).unwrap());
        assert!(!detect_arm_event(&c, &yellow1).unwrap());
        assert_eq!(estimate_arm_probability(&yellow1, 1.0, 20, 3).unwrap().mean, 0.0);
    }

    #[test]
    fn odd_alternating_is_unsupported() {
        let c = Configuration::uniform_color(win(), true).unwrap();
        let spec = ArmEventSpec::new(Point::ORIGIN, 1.0, 6.0, ArmKind::Alternating(3));
        assert!(matches!(detect_arm_event(&c, &spec), Err(Error::Unsupported(_))));
        assert!(detect_arm_event(&c, &ArmEventSpec::new(Point::ORIGIN, 0.5, 6.0, ArmKind::Alternating(2))).is_err());
    }

    #[test]
    fn interface_count_is_even_for_random_configurations() {
        for seed in 0..200 {
            let c = Configuration::sample(win(), 0.5, seed).unwrap();
            let n = count_crossing_interfaces(&c, Point::ORIGIN, 1.0, 7.0).unwrap();
            assert_eq!(n % 2, 0, "seed {seed}");
        }
    }
}
