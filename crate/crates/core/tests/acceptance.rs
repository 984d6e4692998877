//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use trifpp::arms::{detect_arm_event, ArmEventSpec, ArmKind};
use trifpp::config::trial_seed;
use trifpp::duality::{verify_circuits, verify_quads, verify_strip_exhaustive};
use trifpp::fpp::{a0n_bound, distances_from, passage_time};
use trifpp::montecarlo::{ccd_ratio_at, estimate_mu, fit_exponent_points, run_experiment, shape_anisotropy, ExperimentSpec};
use trifpp::records::to_csv_string;
use trifpp::scaling::{correlation_length_eps_within, crossing_probability, DEFAULT_MAX_RADIUS};
use trifpp::{AxisBox, Configuration, Point, SiteCoord, Window};

const SEED: u64 = 1;

const DUALITY_INSTANCES: u64 = 10_000;
const CIRCUIT_SIZE: i32 = 20;
const QUAD_SECS: f64 = 120.0;
const CIRCUIT_SECS: f64 = 300.0;
const STRIP_SECS: f64 = 120.0;

const EXACT_TOL: f64 = 1e-9;
const SUBADDITIVE_TRIPLES: u64 = 100_000;

const CROSSING_R: f64 = 64.0;
const CROSSING_SAMPLES: u64 = 10_000;
const CROSSING_TOL: f64 = 0.02;
const CROSSING_SECS: f64 = 180.0;

const EPS: f64 = 0.1;
const CCD_PS: [f64; 3] = [0.30, 0.40, 0.45];
const CCD_SAMPLES: u64 = 500;
const CCD_MAX_RATIO: f64 = 3.0;
const CCD_SECS: f64 = 1800.0;

const EXPONENT_PS: [f64; 4] = [0.40, 0.44, 0.46, 0.47];
const EXPONENT_RANGE: (f64, f64) = (1.05, 1.60);
const EXPONENT_SECS: f64 = 2700.0;

const SHAPE_LOW: f64 = 0.30;
const SHAPE_HIGH: f64 = 0.46;
const SHAPE_K: u32 = 6;
const SHAPE_SAMPLES: u64 = 300;
const SHAPE_LEVEL: f64 = 0.9;
const SHAPE_MAX: f64 = 1.10;
const SHAPE_SECS: f64 = 3600.0;

const ARM_ANNULI: u64 = 1_000;
const ARM_MAX_R: i32 = 8;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

/// `L̂_ε(p)` for every p used below, shared across criteria (one seed).
struct Lengths {
    cache: BTreeMap<u64, (f64, f64)>,
}

impl Lengths {
    fn get(&mut self, p: f64) -> (f64, f64) {
        *self.cache.entry(p.to_bits()).or_insert_with(|| {
            let (l, secs) = timed(|| correlation_length_eps_within(p, EPS, CCD_SAMPLES, SEED, DEFAULT_MAX_RADIUS).unwrap());
            println!("  L_eps({p}) = {l:.3} ({secs:.1} s)");
            (l, secs)
        })
    }
}

fn main() {
    let mut rep = Report { failed: 0 };
    let mut lengths = Lengths { cache: BTreeMap::new() };

    let (quads, secs) = timed(|| verify_quads(DUALITY_INSTANCES, SEED).unwrap());
    rep.line(
        "duality-quads",
        quads.checked == DUALITY_INSTANCES && quads.mismatches == 0 && secs < QUAD_SECS,
        format!("{} quads, {} mismatches, {secs:.1} s (limit {QUAD_SECS} s)", quads.checked, quads.mismatches),
    );

    let (circ, secs) = timed(|| verify_circuits(DUALITY_INSTANCES, CIRCUIT_SIZE, SEED).unwrap());
    rep.line(
        "duality-circuits",
        circ.checked > 0 && circ.mismatches == 0 && secs < CIRCUIT_SECS,
        format!(
            "{} instances, {} checked, {} skipped (skip rate {:.3}), {} mismatches, {secs:.1} s (limit {CIRCUIT_SECS} s)",
            DUALITY_INSTANCES,
            circ.checked,
            circ.skipped,
            circ.skip_rate(),
            circ.mismatches
        ),
    );

    let (strip, secs) = timed(|| verify_strip_exhaustive().unwrap());
    rep.line(
        "duality-strip",
        strip.checked == 1 << 16 && strip.mismatches == 0 && secs < STRIP_SECS,
        format!("{} colorings, {} mismatches, {secs:.1} s (limit {STRIP_SECS} s)", strip.checked, strip.mismatches),
    );

    {
        let ladder: Vec<u32> = (1..=64).collect();
        let m = estimate_mu(0.0, 0.0, &ladder, 1, SEED).unwrap();
        let axial_exact = m.rungs.iter().all(|&(n, e)| e.mean == (n + 1) as f64 / n as f64);
        let c = Configuration::uniform_color(Window::covering(&AxisBox::square(Point::ORIGIN, 70.0)), false).unwrap();
        let t = |v: SiteCoord| passage_time(&c, &[SiteCoord::ORIGIN], &[v], None).unwrap().time;
        // on-ray sites (k, k) nearest to distance 30 and 60
        let (k1, k2) = ((30.0 / 3f64.sqrt()).round() as i32, (60.0 / 3f64.sqrt()).round() as i32);
        let (d1, d2) = (SiteCoord::new(k1, k1), SiteCoord::new(k2, k2));
        let diag_exact = t(d1) == common::hex_distance(SiteCoord::ORIGIN, d1) + 1
            && t(d2) == common::hex_distance(SiteCoord::ORIGIN, d2) + 1;
        let diag = (t(d2) - t(d1)) as f64 / (d2.embed().norm() - d1.embed().norm());
        let axial = (t(SiteCoord::new(60, 0)) - t(SiteCoord::new(30, 0))) as f64 / 30.0;
        let ratio = diag / axial;
        rep.line(
            "exact-mu-p0",
            axial_exact && diag_exact && (ratio - 2.0 / 3f64.sqrt()).abs() < EXACT_TOL,
            format!(
                "T/n = 1 + 1/n for n = 1..64: {axial_exact}; diagonal times exact: {diag_exact}; mu(pi/6)/mu(0) = {ratio:.12} (2/sqrt3 = {:.12})",
                2.0 / 3f64.sqrt()
            ),
        );
    }

    {
        let violations: u64 = (0..SUBADDITIVE_TRIPLES)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(SEED, t));
                let p: f64 = rng.gen();
                let n: u32 = rng.gen_range(2..=40);
                let m: i32 = rng.gen_range(1..n as i32);
                let c = Configuration::sample_box(&a0n_bound(n), p, rng.gen()).unwrap();
                let from0 = distances_from(&c, &[SiteCoord::ORIGIN], None).unwrap();
                let fromm = distances_from(&c, &[SiteCoord::new(m, 0)], None).unwrap();
                let end = SiteCoord::new(n as i32, 0);
                let lhs = from0.get(end).unwrap();
                let rhs = from0.get(SiteCoord::new(m, 0)).unwrap() + fromm.get(end).unwrap();
                u64::from(lhs > rhs)
            })
            .sum();
        rep.line(
            "subadditivity",
            violations == 0,
            format!("{SUBADDITIVE_TRIPLES} random (p, n, m) triples, {violations} violations"),
        );
    }

    {
        let (e, secs) = timed(|| crossing_probability(0.5, CROSSING_R, CROSSING_SAMPLES, SEED).unwrap());
        rep.line(
            "critical-crossing",
            (e.mean - 0.5).abs() <= CROSSING_TOL && secs < CROSSING_SECS,
            format!("P(cross [0,{CROSSING_R}]^2) = {:.4} ± {:.4} (target 0.50 ± {CROSSING_TOL}), {secs:.1} s", e.mean, e.stderr),
        );
    }

    {
        let mut secs = 0.0;
        let mut ratios = Vec::new();
        for p in CCD_PS {
            let (l, s) = lengths.get(p);
            let (c, s2) = timed(|| ccd_ratio_at(p, l, CCD_SAMPLES, SEED).unwrap());
            secs += s + s2;
            println!("  p = {p}: L = {l:.3}, n = {}, mu = {:.5}, L*mu = {:.4} ± {:.4}", c.n, c.mu.mean, c.ratio, c.stderr);
            ratios.push(c.ratio);
        }
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        rep.line(
            "ccd-ratio",
            max / min <= CCD_MAX_RATIO && secs < CCD_SECS,
            format!("max/min of L*mu over p in {CCD_PS:?} = {:.3} (limit {CCD_MAX_RATIO}), {secs:.1} s", max / min),
        );
    }

    {
        let mut secs = 0.0;
        let points: Vec<(f64, f64)> = EXPONENT_PS
            .iter()
            .map(|&p| {
                let (l, s) = lengths.get(p);
                secs += s;
                (p, l)
            })
            .collect();
        let f = fit_exponent_points(&points, 0.9, SEED).unwrap();
        rep.line(
            "correlation-exponent",
            (EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&f.slope) && secs < EXPONENT_SECS,
            format!(
                "slope = {:.4} (90% CI {:.3}..{:.3}), required in [{}, {}], {secs:.1} s",
                f.slope, f.interval.0, f.interval.1, EXPONENT_RANGE.0, EXPONENT_RANGE.1
            ),
        );
    }

    {
        let mut secs = 0.0;
        let mut run = |p: f64| {
            let (l, s) = lengths.get(p);
            let n = (8.0 * l).ceil() as u32;
            let (a, s2) = timed(|| shape_anisotropy(p, SHAPE_K, n, SHAPE_SAMPLES, SEED, SHAPE_LEVEL).unwrap());
            secs += s + s2;
            println!("  p = {p}: n = {n}, A = {:.4}, 90% CI {:.4}..{:.4}", a.ratio, a.interval.0, a.interval.1);
            a
        };
        let lo = run(SHAPE_LOW);
        let hi = run(SHAPE_HIGH);
        rep.line(
            "shape-circularization",
            hi.ratio < lo.ratio && hi.interval.1 < lo.interval.0 && hi.ratio < SHAPE_MAX && secs < SHAPE_SECS,
            format!(
                "A({SHAPE_HIGH}) = {:.4} [{:.4}, {:.4}] vs A({SHAPE_LOW}) = {:.4} [{:.4}, {:.4}], A({SHAPE_HIGH}) < {SHAPE_MAX}, {secs:.1} s",
                hi.ratio, hi.interval.0, hi.interval.1, lo.ratio, lo.interval.0, lo.interval.1
            ),
        );
    }

    {
        let mismatches: u64 = (0..ARM_ANNULI)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(SEED, t));
                let big_r = rng.gen_range(2..=ARM_MAX_R) as f64;
                let r = rng.gen_range(1..big_r as i32) as f64;
                let center = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let p = rng.gen_range(0.3..0.7);
                let c = Configuration::sample_box(&AxisBox::square(center, big_r + 3.0), p, rng.gen()).unwrap();
                let spec = ArmEventSpec::new(center, r, big_r, ArmKind::Alternating(4));
                u64::from(detect_arm_event(&c, &spec).unwrap() != (common::alternating_arms_oracle(&c, center, r, big_r) >= 4))
            })
            .sum();
        rep.line("arm-oracle", mismatches == 0, format!("{ARM_ANNULI} annuli with R <= {ARM_MAX_R}, {mismatches} mismatches"));
    }

    {
        let specs = [
            ExperimentSpec { estimand: "mu".into(), ps: vec![0.2, 0.4], thetas: vec![0.0, 0.3], ns: vec![8, 16], samples: 40, master_seed: 9, ..Default::default() },
            ExperimentSpec { estimand: "crossing".into(), ps: vec![0.5], radius: 16.0, samples: 200, master_seed: 9, ..Default::default() },
            ExperimentSpec { estimand: "shape".into(), ps: vec![0.3], ns: vec![12], samples: 30, master_seed: 9, ..Default::default() },
            ExperimentSpec { estimand: "arm-prob".into(), ps: vec![0.5], radius: 8.0, samples: 200, master_seed: 9, ..Default::default() },
        ];
        let csv_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| specs.iter().map(|s| to_csv_string(&run_experiment(s).unwrap())).collect::<Vec<_>>())
        };
        let one = csv_with(1);
        let again = csv_with(1);
        let four = csv_with(4);
        rep.line(
            "determinism",
            one == again && one == four,
            format!("{} experiments: rerun identical {}, 1 vs 4 threads identical {}", specs.len(), one == again, one == four),
        );
    }

    println!("{} criteria failed", rep.failed);
    if rep.failed > 0 {
        std::process::exit(1);
    }
}
