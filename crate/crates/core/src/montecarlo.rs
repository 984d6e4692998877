//! Experiment harness: time constants, limit-shape anisotropy, the CCD
//! ratio `L_ε(p)·μ(p)`, correlation-exponent fits and renormalized good bonds.
//!
//! Trial `t` of an experiment with master seed `s` samples its configuration
//! with seed `trial_seed(s, t)`. Sub-experiments that need an independent
//! stream use master seed `trial_seed(s, STREAM_*)`. Reductions run in trial
//! order, so results do not depend on the thread count.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::arms::{estimate_arm_probability, ArmEventSpec, ArmKind};
use crate::clusters::{outermost_surrounding_cluster, Color};
use crate::config::{trial_seed, Configuration};
use crate::error::{Error, Result};
use crate::fpp::{distances_from, passage_time, point_to_line, point_to_line_bound, strip_passage};
use crate::lattice::{closest_site, AxisBox, Point, Region, SiteCoord, Window};
use crate::records::{parse_list, ResultRecord, SweepConfig};
use crate::scaling::{correlation_length_L, correlation_length_L_interval, correlation_length_eps_within, crossing_probability, Pi4Table, DEFAULT_MAX_RADIUS};
use crate::stats::{bootstrap_replicates, linear_fit, percentile_interval, std_dev, MCEstimate};
use crate::P_C;

pub const STREAM_MU: u64 = u64::MAX;
pub const STREAM_BOOTSTRAP: u64 = u64::MAX - 1;

/// Half-side of the square window, centred at the origin, used for passage
/// times to targets at distance up to `n`.
pub fn mu_window(n: u32) -> Window {
    Window::covering(&AxisBox::square(Point::ORIGIN, 1.5 * n as f64 + 2.0))
}

/// Reflection of the lattice in the real axis.
pub fn reflect(v: SiteCoord) -> SiteCoord {
    SiteCoord::new(v.x + v.y, -v.y)
}

/// The twelve images of `v` under the lattice symmetries fixing the origin
/// (with repeats when `v` lies on a symmetry axis).
pub fn symmetry_images(v: SiteCoord) -> [SiteCoord; 12] {
    let mut out = [v; 12];
    let mut a = v;
    let mut b = reflect(v);
    for m in 0..6 {
        out[2 * m] = a;
        out[2 * m + 1] = b;
        a = a.rotate60();
        b = b.rotate60();
    }
    out
}

/// Per-trial passage times from the origin: `targets[g]` is a group of sites
/// whose times are averaged. Returns one row per trial.
fn trial_times(p: f64, targets: &[Vec<SiteCoord>], window: Window, samples: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    for v in targets.iter().flatten() {
        if !window.contains(*v) {
            return Err(Error::window(format!("target {v} lies outside the passage-time window")));
        }
    }
    (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            let d = distances_from(&c, &[SiteCoord::ORIGIN], None)?;
            Ok(targets
                .iter()
                .map(|g| g.iter().map(|&v| d.get(v).expect("window sites are reachable") as f64).sum::<f64>() / g.len() as f64)
                .collect())
        })
        .collect()
}

/// Estimates of `μ(p, θ)` along a ladder of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuEstimate {
    pub p: f64,
    pub theta: f64,
    /// `(n, T(0, n e^{iθ})/n)` per rung.
    pub rungs: Vec<(u32, MCEstimate)>,
    /// Value at the largest rung.
    pub mu_hat: MCEstimate,
    /// `(μ, c)` of `E T = μ n + c` through the two largest rungs.
    pub two_point: Option<(f64, f64)>,
    /// Whether `E[a(0,2n)]/2n ≤ E[a(0,n)]/n` within two standard errors for
    /// every pair of rungs `(n, 2n)` on the ladder.
    pub subadditive: bool,
}

impl MuEstimate {
    /// Warning when the largest rung is below `8·length_unit`.
    pub fn ladder_warning(&self, length_unit: f64) -> Option<String> {
        let n = self.rungs.last().map_or(0, |r| r.0);
        ((n as f64) < 8.0 * length_unit).then(|| format!("largest n = {n} is below 8·L = {:.1}", 8.0 * length_unit))
    }
}

fn check_ladder(ladder: &[u32]) -> Result<()> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("the n ladder must be nonempty, positive and strictly increasing"));
    }
    Ok(())
}

/// `T(0, n·e^{iθ})/n` for every rung of the ladder, with targets at the
/// closest sites, one BFS per trial.
pub fn estimate_mu(p: f64, theta: f64, ladder: &[u32], samples: u64, seed: u64) -> Result<MuEstimate> {
    Ok(estimate_mu_directions(p, &[theta], ladder, samples, seed)?.remove(0))
}

/// [`estimate_mu`] for several directions sharing each trial's BFS.
pub fn estimate_mu_directions(p: f64, thetas: &[f64], ladder: &[u32], samples: u64, seed: u64) -> Result<Vec<MuEstimate>> {
    check_ladder(ladder)?;
    if thetas.is_empty() || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::arg("at least one finite direction is needed"));
    }
    let n_max = *ladder.last().expect("nonempty");
    let targets: Vec<Vec<SiteCoord>> = thetas
        .iter()
        .flat_map(|&t| ladder.iter().map(move |&n| vec![closest_site(Point::polar(n as f64, t))]))
        .collect();
    let rows = trial_times(p, &targets, mu_window(n_max), samples, seed)?;
    let mut out = Vec::with_capacity(thetas.len());
    for (k, &theta) in thetas.iter().enumerate() {
        let rungs: Vec<(u32, MCEstimate)> = ladder
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let col: Vec<f64> = rows.iter().map(|r| r[k * ladder.len() + j] / n as f64).collect();
                Ok((n, MCEstimate::from_samples(&col)?))
            })
            .collect::<Result<_>>()?;
        let two_point = (rungs.len() >= 2).then(|| {
            let (n1, e1) = rungs[rungs.len() - 2];
            let (n2, e2) = rungs[rungs.len() - 1];
            let (t1, t2) = (e1.mean * n1 as f64, e2.mean * n2 as f64);
            let mu = (t2 - t1) / (n2 - n1) as f64;
            (mu, t1 - mu * n1 as f64)
        });
        let subadditive = rungs.iter().all(|&(n, e)| {
            rungs.iter().find(|r| r.0 == 2 * n).map_or(true, |&(_, e2)| e2.mean <= e.mean + 2.0 * (e.stderr.powi(2) + e2.stderr.powi(2)).sqrt())
        });
        out.push(MuEstimate { p, theta, mu_hat: rungs.last().expect("nonempty").1, rungs, two_point, subadditive });
    }
    Ok(out)
}

/// Limit-shape anisotropy `max_k μ̂(θ_k) / min_k μ̂(θ_k)` with a bootstrap
/// interval over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anisotropy {
    pub thetas: Vec<f64>,
    /// Symmetrized `μ̂(p, θ_k)` at `n`.
    pub per_direction: Vec<MCEstimate>,
    pub ratio: f64,
    pub interval: (f64, f64),
    pub level: f64,
    /// Standard deviation of the bootstrap replicates.
    pub stderr: f64,
}

fn ratio_of_means(rows: &[Vec<f64>], idx: impl Iterator<Item = usize> + Clone) -> f64 {
    let k = rows[0].len();
    let means: Vec<f64> = (0..k).map(|j| idx.clone().map(|i| rows[i][j]).sum::<f64>()).collect();
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Directions `θ_k = πk/(3K)`, `k = 0..K`. Each direction's passage time is
/// averaged over the twelve symmetric images of its target site.
pub fn shape_anisotropy(p: f64, k: u32, n: u32, samples: u64, seed: u64, level: f64) -> Result<Anisotropy> {
    if !(0.0..P_C).contains(&p) {
        return Err(Error::arg(format!("shape anisotropy needs 0 ≤ p < 1/2 (μ vanishes above), got {p}")));
    }
    if k < 6 {
        return Err(Error::arg(format!("shape anisotropy needs K ≥ 6 directions, got {k}")));
    }
    if n == 0 || !(0.0 < level && level < 1.0) {
        return Err(Error::arg("shape anisotropy needs n ≥ 1 and a level in (0, 1)"));
    }
    let thetas: Vec<f64> = (0..k).map(|j| std::f64::consts::PI * j as f64 / (3.0 * k as f64)).collect();
    let targets: Vec<Vec<SiteCoord>> =
        thetas.iter().map(|&t| symmetry_images(closest_site(Point::polar(n as f64, t))).to_vec()).collect();
    let rows: Vec<Vec<f64>> = trial_times(p, &targets, mu_window(n), samples, seed)?
        .into_iter()
        .map(|r| r.into_iter().map(|x| x / n as f64).collect())
        .collect();
    let per_direction = (0..thetas.len())
        .map(|j| MCEstimate::from_samples(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let ratio = ratio_of_means(&rows, 0..rows.len());
    let reps = bootstrap_replicates(rows.len(), 1000, trial_seed(seed, STREAM_BOOTSTRAP), |idx| {
        ratio_of_means(&rows, idx.iter().copied())
    });
    let interval = percentile_interval(&reps, level);
    Ok(Anisotropy { thetas, per_direction, ratio, interval, level, stderr: std_dev(&reps) })
}

/// `L̂_ε(p)·μ̂(p, 0)` with `μ̂` measured at `n = ⌈8·L̂_ε(p)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcdRatio {
    pub p: f64,
    pub length: f64,
    pub n: u32,
    pub mu: MCEstimate,
    pub ratio: f64,
    /// `L̂·stderr(μ̂)`; the uncertainty of `L̂` is not propagated.
    pub stderr: f64,
}

pub fn ccd_ratio(p: f64, eps: f64, samples: u64, seed: u64, max_radius: f64) -> Result<CcdRatio> {
    if !(0.0..P_C).contains(&p) {
        return Err(Error::arg(format!("the CCD ratio needs 0 ≤ p < 1/2, got {p}")));
    }
    let length = correlation_length_eps_within(p, eps, samples, seed, max_radius)?;
    ccd_ratio_at(p, length, samples, seed)
}

/// [`ccd_ratio`] with `L̂_ε(p)` already computed.
pub fn ccd_ratio_at(p: f64, length: f64, samples: u64, seed: u64) -> Result<CcdRatio> {
    if !(length >= 1.0) || !length.is_finite() {
        return Err(Error::arg(format!("correlation length must be finite and at least 1, got {length}")));
    }
    let n = (8.0 * length).ceil() as u32;
    let mu = estimate_mu(p, 0.0, &[n], samples, trial_seed(seed, STREAM_MU))?.mu_hat;
    Ok(CcdRatio { p, length, n, mu, ratio: length * mu.mean, stderr: length * mu.stderr })
}

/// Least-squares slope of `log L̂_ε(p)` against `log 1/(1/2 − p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub interval: (f64, f64),
    pub level: f64,
    pub stderr: f64,
}

/// Slope with a residual-bootstrap interval.
pub fn fit_exponent_points(points: &[(f64, f64)], level: f64, seed: u64) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::arg(format!("the exponent fit needs at least 4 values of p, got {}", points.len())));
    }
    let mut ps: Vec<f64> = points.iter().map(|q| q.0).collect();
    ps.sort_by(f64::total_cmp);
    if ps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::arg("the exponent fit needs distinct values of p"));
    }
    if points.iter().any(|&(p, l)| !(0.0..P_C).contains(&p) || !(l >= 1.0) || !l.is_finite()) {
        return Err(Error::arg("the exponent fit needs 0 ≤ p < 1/2 and finite lengths ≥ 1"));
    }
    let xs: Vec<f64> = points.iter().map(|&(p, _)| (1.0 / (P_C - p)).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, l)| l.ln()).collect();
    let (a, b, res) = linear_fit(&xs, &ys)?;
    let reps = bootstrap_replicates(xs.len(), 2000, trial_seed(seed, STREAM_BOOTSTRAP), |idx| {
        let y: Vec<f64> = xs.iter().zip(idx).map(|(x, &i)| a + b * x + res[i]).collect();
        linear_fit(&xs, &y).map_or(b, |f| f.1)
    });
    Ok(ExponentFit {
        points: points.to_vec(),
        slope: b,
        intercept: a,
        interval: percentile_interval(&reps, level),
        level,
        stderr: std_dev(&reps),
    })
}

/// Estimates `L̂_ε(p)` for each `p` (shared seed) and fits the exponent.
pub fn fit_correlation_exponent(ps: &[f64], eps: f64, samples: u64, seed: u64, max_radius: f64, level: f64) -> Result<ExponentFit> {
    if ps.len() < 4 {
        return Err(Error::arg(format!("the exponent fit needs at least 4 values of p, got {}", ps.len())));
    }
    let points = ps
        .iter()
        .map(|&p| Ok((p, correlation_length_eps_within(p, eps, samples, seed, max_radius)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_exponent_points(&points, level, seed)
}

/// Box that a window must cover for one renormalized bond of length `n`.
pub fn good_bond_bound(n: f64, length_unit: f64) -> AxisBox {
    AxisBox::from_corners(-n / 4.0, -n / 4.0, n + n / 4.0, n / 4.0).expand(length_unit / 2.0 + 3.0)
}

/// Per-trial passage times between `𝒞ᵖ(0)` and `𝒞ᵖ(n)` (disk radius
/// `length_unit/2`) inside `Box(0, n; n/4)`.
pub fn good_bond_times(p: f64, n: f64, length_unit: f64, samples: u64, seed: u64) -> Result<Vec<u64>> {
    if !(n >= 4.0) || !n.is_finite() || !(length_unit >= 1.0) || !length_unit.is_finite() {
        return Err(Error::arg("good bonds need n ≥ 4 and a length unit ≥ 1"));
    }
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    let window = Window::covering(&good_bond_bound(n, length_unit));
    let bx = Region::AxisBox(AxisBox::from_corners(-n / 4.0, -n / 4.0, n + n / 4.0, n / 4.0));
    (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            let a = outermost_surrounding_cluster(&c, Point::ORIGIN, length_unit / 2.0)?.into_sites();
            let b = outermost_surrounding_cluster(&c, Point::new(n, 0.0), length_unit / 2.0)?.into_sites();
            Ok(passage_time(&c, &a, &b, Some(&bx))?.time)
        })
        .collect()
}

/// Fraction of bonds with `T ≤ (ν̂ + ε)·n/L`, where `n` and the length unit
/// `L` are in lattice units.
pub fn good_bond_fraction(p: f64, n: f64, eps: f64, nu: f64, length_unit: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    if !(eps > 0.0) || !(nu >= 0.0) {
        return Err(Error::arg("good bonds need ε > 0 and ν̂ ≥ 0"));
    }
    let times = good_bond_times(p, n, length_unit, samples, seed)?;
    let threshold = (nu + eps) * n / length_unit;
    MCEstimate::from_counts(times.iter().filter(|&&t| t as f64 <= threshold).count() as u64, samples)
}

/// `T_{0,n}(h)/n` in the horizontal strip of half-height `h`.
pub fn strip_time_constant(p: f64, h: f64, n: f64, radius: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    let window = Window::covering(&AxisBox::from_corners(-h - radius - 3.0, -h - 3.0, n + h + radius + 3.0, h + 3.0));
    let xs = (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            let r = strip_passage(&c, 0.0, n, 0.0, h, radius)?;
            if !r.reached {
                return Err(Error::window("strip endpoints fell outside the strip"));
            }
            Ok(r.time as f64 / n)
        })
        .collect::<Result<Vec<_>>>()?;
    MCEstimate::from_samples(&xs)
}

/// `b_{0,n}/n`: point-to-line passage time per unit length.
pub fn estimate_point_to_line(p: f64, n: u32, samples: u64, seed: u64) -> Result<MCEstimate> {
    if samples == 0 {
        return Err(Error::arg("samples must be at least 1"));
    }
    let window = Window::covering(&point_to_line_bound(n));
    let xs = (0..samples)
        .into_par_iter()
        .map(|t| {
            let c = Configuration::sample(window, p, trial_seed(seed, t))?;
            Ok(point_to_line(&c, n)? as f64 / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    MCEstimate::from_samples(&xs)
}

/// Estimands understood by [`run_experiment`].
pub const ESTIMANDS: [&str; 11] = [
    "mu",
    "shape",
    "corr-length-eps",
    "corr-length-L",
    "crossing",
    "arm-prob",
    "ccd",
    "fit-exponent",
    "good-bonds",
    "strip-nu",
    "point-to-line",
];

/// A fully specified experiment. Which fields matter depends on the estimand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub estimand: String,
    pub ps: Vec<f64>,
    pub thetas: Vec<f64>,
    pub ns: Vec<u32>,
    pub samples: u64,
    pub master_seed: u64,
    pub eps: f64,
    pub output: Option<PathBuf>,
    /// Number of directions `K` for shape estimation.
    pub directions: u32,
    /// Outer radius `R` (crossing, arm events) or strip half-height.
    pub radius: f64,
    pub inner_radius: f64,
    pub arms: ArmKind,
    /// Length unit `L` in lattice sites (good bonds, strips).
    pub length_unit: f64,
    pub nu: f64,
    pub level: f64,
    pub max_radius: f64,
    pub pi4_table: Option<Pi4Table>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            estimand: "mu".to_string(),
            ps: Vec::new(),
            thetas: vec![0.0],
            ns: vec![64],
            samples: 100,
            master_seed: 0,
            eps: 0.1,
            output: None,
            directions: 6,
            radius: 64.0,
            inner_radius: 1.0,
            arms: ArmKind::Alternating(4),
            length_unit: 1.0,
            nu: 0.0,
            level: 0.9,
            max_radius: DEFAULT_MAX_RADIUS,
            pi4_table: None,
        }
    }
}

const SUBCRITICAL: [&str; 5] = ["shape", "corr-length-eps", "corr-length-L", "ccd", "fit-exponent"];

/// Parses `alternating:k`, `blue:k` or `yellow:k`.
pub fn parse_arm_kind(s: &str) -> Result<ArmKind> {
    let (kind, k) = s.split_once(':').ok_or_else(|| Error::parse(format!("arm kind {s:?} must look like alternating:4")))?;
    let k: u32 = k.trim().parse().map_err(|_| Error::parse(format!("arm count in {s:?} is not an integer")))?;
    match kind.trim() {
        "alternating" => Ok(ArmKind::Alternating(k)),
        "blue" => Ok(ArmKind::Monochromatic(Color::Blue, k)),
        "yellow" => Ok(ArmKind::Monochromatic(Color::Yellow, k)),
        other => Err(Error::parse(format!("unknown arm kind {other:?}"))),
    }
}

pub fn arm_kind_name(k: ArmKind) -> String {
    match k {
        ArmKind::Alternating(k) => format!("alternating:{k}"),
        ArmKind::Monochromatic(Color::Blue, k) => format!("blue:{k}"),
        ArmKind::Monochromatic(Color::Yellow, k) => format!("yellow:{k}"),
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !ESTIMANDS.contains(&self.estimand.as_str()) {
            return Err(Error::arg(format!("unknown estimand {:?}; expected one of {}", self.estimand, ESTIMANDS.join(", "))));
        }
        if self.ps.is_empty() || self.ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::arg("p values must be given and lie in [0, 1]"));
        }
        if SUBCRITICAL.contains(&self.estimand.as_str()) && self.ps.iter().any(|&p| p >= P_C) {
            return Err(Error::arg(format!("estimand {} needs every p < 1/2", self.estimand)));
        }
        check_ladder(&self.ns)?;
        if self.samples == 0 {
            return Err(Error::arg("samples must be at least 1"));
        }
        Ok(())
    }

    /// One spec per section of a sweep config.
    pub fn from_sweep(cfg: &SweepConfig) -> Result<Vec<ExperimentSpec>> {
        const KEYS: [&str; 16] = [
            "p", "theta", "n", "samples", "seed", "eps", "out", "k", "r", "r_inner", "arms", "unit", "nu", "level", "max_radius", "table",
        ];
        for key in cfg.defaults.keys().chain(cfg.sections.iter().flat_map(|(_, m)| m.keys())) {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::parse(format!("unknown sweep key `{key}`")));
            }
        }
        cfg.sections
            .iter()
            .map(|(name, _)| {
                let get = |k: &str| cfg.get(name, k);
                let mut s = ExperimentSpec { estimand: name.clone(), ..Default::default() };
                let one = |k: &str, v: &str| -> Result<f64> {
                    v.trim().parse::<f64>().map_err(|_| Error::parse(format!("[{name}] `{k}`: cannot parse {v:?}")))
                };
                if let Some(v) = get("p") {
                    s.ps = parse_list("p", v)?;
                }
                if let Some(v) = get("theta") {
                    s.thetas = parse_list("theta", v)?;
                }
                if let Some(v) = get("n") {
                    s.ns = parse_list("n", v)?;
                }
                if let Some(v) = get("samples") {
                    s.samples = v.parse().map_err(|_| Error::parse(format!("[{name}] `samples` must be an integer")))?;
                }
                if let Some(v) = get("seed") {
                    s.master_seed = v.parse().map_err(|_| Error::parse(format!("[{name}] `seed` must be an integer")))?;
                }
                if let Some(v) = get("k") {
                    s.directions = v.parse().map_err(|_| Error::parse(format!("[{name}] `k` must be an integer")))?;
                }
                if let Some(v) = get("eps") {
                    s.eps = one("eps", v)?;
                }
                if let Some(v) = get("r") {
                    s.radius = one("r", v)?;
                }
                if let Some(v) = get("r_inner") {
                    s.inner_radius = one("r_inner", v)?;
                }
                if let Some(v) = get("unit") {
                    s.length_unit = one("unit", v)?;
                }
                if let Some(v) = get("nu") {
                    s.nu = one("nu", v)?;
                }
                if let Some(v) = get("level") {
                    s.level = one("level", v)?;
                }
                if let Some(v) = get("max_radius") {
                    s.max_radius = one("max_radius", v)?;
                }
                if let Some(v) = get("arms") {
                    s.arms = parse_arm_kind(v)?;
                }
                if let Some(v) = get("out") {
                    s.output = Some(PathBuf::from(v));
                }
                if let Some(v) = get("table") {
                    let text = std::fs::read_to_string(v).map_err(|e| Error::Io(format!("{v}: {e}")))?;
                    s.pi4_table = Some(Pi4Table::parse(&text)?);
                }
                s.validate()?;
                Ok(s)
            })
            .collect()
    }
}

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("params are built from object literals"),
    }
}

/// Runs an experiment, returning one record per `(p, parameter tuple)`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let seed = spec.master_seed;
    let n_max = *spec.ns.last().expect("validated");
    let mut out = Vec::new();
    if spec.estimand == "fit-exponent" {
        let start = Instant::now();
        let f = fit_correlation_exponent(&spec.ps, spec.eps, spec.samples, seed, spec.max_radius, spec.level)?;
        let p_max = spec.ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lengths: Vec<f64> = f.points.iter().map(|q| q.1).collect();
        let prm = json!({"ps": spec.ps, "eps": spec.eps, "lengths": lengths, "intercept": f.intercept,
                         "level": f.level, "ci_lo": f.interval.0, "ci_hi": f.interval.1});
        let mut r = ResultRecord::new("fit-exponent", p_max, params(prm), f.slope, f.stderr, spec.samples, seed);
        r.wall_time = Some(start.elapsed().as_secs_f64());
        return Ok(vec![r]);
    }
    for &p in &spec.ps {
        let start = Instant::now();
        let mut recs: Vec<ResultRecord> = match spec.estimand.as_str() {
            "mu" => {
                let ests = estimate_mu_directions(p, &spec.thetas, &spec.ns, spec.samples, seed)?;
                ests.iter()
                    .flat_map(|m| {
                        m.rungs.iter().map(move |&(n, e)| {
                            ResultRecord::new("mu", p, params(json!({"n": n, "theta": m.theta})), e.mean, e.stderr, e.n, seed)
                        })
                    })
                    .collect()
            }
            "shape" => {
                let a = shape_anisotropy(p, spec.directions, n_max, spec.samples, seed, spec.level)?;
                let prm = json!({"k": spec.directions, "n": n_max, "level": a.level, "ci_lo": a.interval.0, "ci_hi": a.interval.1});
                vec![ResultRecord::new("shape", p, params(prm), a.ratio, a.stderr, spec.samples, seed)]
            }
            "corr-length-eps" => {
                let l = correlation_length_eps_within(p, spec.eps, spec.samples, seed, spec.max_radius)?;
                vec![ResultRecord::new("corr-length-eps", p, params(json!({"eps": spec.eps})), l, 0.0, spec.samples, seed)]
            }
            "corr-length-L" => {
                let table = spec.pi4_table.as_ref().ok_or_else(|| Error::arg("corr-length-L needs a π₄ table"))?;
                let l = correlation_length_L(p, table)?;
                let (lo, hi) = correlation_length_L_interval(p, table, 1.0);
                let half = match (lo, hi) {
                    (Ok(a), Ok(b)) => (b - a) / 2.0,
                    _ => f64::NAN,
                };
                let n = table.rows().iter().map(|r| r.n).min().unwrap_or(0);
                let seed = table.rows()[0].seed;
                vec![ResultRecord::new("corr-length-L", p, Map::new(), l, half, n, seed)]
            }
            "crossing" => {
                let e = crossing_probability(p, spec.radius, spec.samples, seed)?;
                vec![ResultRecord::new("crossing", p, params(json!({"r": spec.radius})), e.mean, e.stderr, e.n, seed)]
            }
            "arm-prob" => {
                let arm = ArmEventSpec::new(Point::ORIGIN, spec.inner_radius, spec.radius, spec.arms);
                let e = estimate_arm_probability(&arm, p, spec.samples, seed)?;
                let prm = json!({"r": spec.inner_radius, "R": spec.radius, "arms": arm_kind_name(spec.arms)});
                vec![ResultRecord::new("arm-prob", p, params(prm), e.mean, e.stderr, e.n, seed)]
            }
            "ccd" => {
                let c = ccd_ratio(p, spec.eps, spec.samples, seed, spec.max_radius)?;
                let prm = json!({"eps": spec.eps, "L": c.length, "n": c.n, "mu": c.mu.mean});
                vec![ResultRecord::new("ccd", p, params(prm), c.ratio, c.stderr, spec.samples, seed)]
            }
            "good-bonds" => {
                let e = good_bond_fraction(p, n_max as f64, spec.eps, spec.nu, spec.length_unit, spec.samples, seed)?;
                let prm = json!({"n": n_max, "eps": spec.eps, "nu": spec.nu, "unit": spec.length_unit});
                vec![ResultRecord::new("good-bonds", p, params(prm), e.mean, e.stderr, e.n, seed)]
            }
            "strip-nu" => {
                let e = strip_time_constant(p, spec.radius, n_max as f64, spec.length_unit / 2.0, spec.samples, seed)?;
                let prm = json!({"h": spec.radius, "n": n_max, "unit": spec.length_unit});
                vec![ResultRecord::new("strip-nu", p, params(prm), e.mean, e.stderr, e.n, seed)]
            }
            "point-to-line" => {
                let e = estimate_point_to_line(p, n_max, spec.samples, seed)?;
                vec![ResultRecord::new("point-to-line", p, params(json!({"n": n_max})), e.mean, e.stderr, e.n, seed)]
            }
            _ => unreachable!("validated estimand"),
        };
        let dt = start.elapsed().as_secs_f64() / recs.len().max(1) as f64;
        for r in &mut recs {
            r.wall_time = Some(dt);
        }
        out.extend(recs);
    }
    Ok(out)
}
