//! Bernoulli site configurations under the standard monotone coupling.
//!
//! Each site carries a uniform `U(v) ∈ [0, 1)` computed by a keyed hash of
//! `(seed, x, y)`; the site is blue (weight 0) iff `U(v) < p`. Colors are kept
//! as a bitmap and uniforms are recomputed when needed, so a configuration
//! costs one bit per site and can be recolored at any `p′` under one coupling.

use crate::error::{Error, Result};
use crate::lattice::{AxisBox, SiteCoord, Window};

/// Upper bound on the number of sites in a single configuration.
pub const MAX_SITES: usize = 1 << 31;

const DUMP_MAGIC: &[u8; 8] = b"TFPPCFG1";
const DUMP_HEADER_LEN: usize = 8 + 16 + 8 + 8 + 1;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn site_hash(seed_key: u64, v: SiteCoord) -> u64 {
    let key = ((v.x as u32 as u64) << 32) | (v.y as u32 as u64);
    mix64(mix64(seed_key ^ key.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

#[inline]
fn seed_key(seed: u64) -> u64 {
    mix64(seed ^ 0x6a09_e667_f3bc_c909)
}

/// The uniform attached to site `v` under `seed`.
pub fn uniform(seed: u64, v: SiteCoord) -> f64 {
    (site_hash(seed_key(seed), v) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed of trial `trial` derived from a master seed.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix64(master_seed ^ mix64(trial.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// An immutable colored sample on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    window: Window,
    p: f64,
    seed: u64,
    seeded: bool,
    bits: Vec<u64>,
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_capacity(window: &Window) -> Result<()> {
    let n = (window.width() as u128) * (window.height() as u128);
    if n > MAX_SITES as u128 {
        return Err(Error::Capacity(format!("window has {n} sites, limit is {MAX_SITES}")));
    }
    Ok(())
}

impl Configuration {
    /// Samples colors on `window` at density `p`.
    pub fn sample(window: Window, p: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        check_capacity(&window)?;
        let mut c = Configuration { window, p, seed, seeded: true, bits: vec![0; words(window.len())] };
        c.fill_from_uniforms();
        Ok(c)
    }

    /// Samples colors on the smallest window covering `bound`.
    pub fn sample_box(bound: &AxisBox, p: f64, seed: u64) -> Result<Self> {
        Self::sample(Window::covering(bound), p, seed)
    }

    /// An explicit fixture; `blue` decides each site's color.
    pub fn from_fn(window: Window, blue: impl Fn(SiteCoord) -> bool) -> Result<Self> {
        check_capacity(&window)?;
        let mut bits = vec![0u64; words(window.len())];
        for i in 0..window.len() {
            if blue(window.site(i)) {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(Configuration { window, p: f64::NAN, seed: 0, seeded: false, bits })
    }

    pub fn uniform_color(window: Window, blue: bool) -> Result<Self> {
        Self::from_fn(window, |_| blue)
    }

    fn fill_from_uniforms(&mut self) {
        let key = seed_key(self.seed);
        let threshold = self.p;
        let w = self.window;
        for word in self.bits.iter_mut() {
            *word = 0;
        }
        let width = w.width();
        for r in 0..w.height() {
            let row = w.row_min + r as i32;
            let shift = row.div_euclid(2);
            for c in 0..width {
                let v = SiteCoord::new(w.col_min + c as i32 - shift, row);
                let u = (site_hash(key, v) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                if u < threshold {
                    let i = r * width + c;
                    self.bits[i / 64] |= 1 << (i % 64);
                }
            }
        }
    }

    /// Same uniforms, threshold `p′`.
    pub fn recolor(&self, p: f64) -> Result<Self> {
        check_p(p)?;
        if !self.seeded {
            return Err(Error::arg("recolor needs a sampled configuration, not an explicit fixture"));
        }
        if p == self.p {
            return Ok(self.clone());
        }
        let mut c = self.clone();
        c.p = p;
        c.fill_from_uniforms();
        Ok(c)
    }

    /// A copy with one site's color overridden. The result is a fixture.
    pub fn with_color(&self, v: SiteCoord, blue: bool) -> Result<Self> {
        let i = self.window.index(v).ok_or_else(|| Error::window(format!("site {v} lies outside the window")))?;
        let mut c = self.clone();
        c.seeded = false;
        if blue {
            c.bits[i / 64] |= 1 << (i % 64);
        } else {
            c.bits[i / 64] &= !(1 << (i % 64));
        }
        Ok(c)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Density used to sample; NaN for fixtures.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_seeded(&self) -> bool {
        self.seeded
    }

    #[inline]
    pub fn is_blue_idx(&self, i: usize) -> bool {
        (self.bits[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Site weight `t(v)`: 0 for blue, 1 for yellow.
    #[inline]
    pub fn weight_idx(&self, i: usize) -> u32 {
        1 - ((self.bits[i / 64] >> (i % 64)) & 1) as u32
    }

    /// Color of `v`, `None` outside the window.
    pub fn is_blue(&self, v: SiteCoord) -> Option<bool> {
        self.window.index(v).map(|i| self.is_blue_idx(i))
    }

    pub fn weight(&self, v: SiteCoord) -> Option<u32> {
        self.window.index(v).map(|i| self.weight_idx(i))
    }

    /// The sampling uniform of `v`, when the configuration was sampled.
    pub fn uniform(&self, v: SiteCoord) -> Option<f64> {
        (self.seeded && self.window.contains(v)).then(|| uniform(self.seed, v))
    }

    pub fn blue_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Binary dump: magic `TFPPCFG1`, window bounds as four little-endian
    /// `i32` (`col_min, col_max, row_min, row_max`), `p` as little-endian
    /// `f64`, seed as little-endian `u64`, one flag byte (bit 0 = sampled),
    /// then the row-major color bitmap packed least-significant-bit first
    /// (1 = blue).
    pub fn encode(&self) -> Vec<u8> {
        let n = self.window.len();
        let mut out = Vec::with_capacity(DUMP_HEADER_LEN + n.div_ceil(8));
        out.extend_from_slice(DUMP_MAGIC);
        for b in [self.window.col_min, self.window.col_max, self.window.row_min, self.window.row_max] {
            out.extend_from_slice(&b.to_le_bytes());
        }
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.push(self.seeded as u8);
        for byte in 0..n.div_ceil(8) {
            out.push((self.bits[byte / 8] >> ((byte % 8) * 8)) as u8);
        }
        out
    }

    pub fn decode(data: &[u8]) -> Result<Self> {
        if data.len() < DUMP_HEADER_LEN || &data[..8] != DUMP_MAGIC {
            return Err(Error::parse("configuration dump: missing TFPPCFG1 header"));
        }
        let i32_at = |o: usize| i32::from_le_bytes(data[o..o + 4].try_into().expect("4 bytes"));
        let window = Window::new(i32_at(8), i32_at(12), i32_at(16), i32_at(20))
            .map_err(|e| Error::parse(format!("configuration dump: {e}")))?;
        let p = f64::from_le_bytes(data[24..32].try_into().expect("8 bytes"));
        let seed = u64::from_le_bytes(data[32..40].try_into().expect("8 bytes"));
        let flags = data[40];
        if flags > 1 {
            return Err(Error::parse(format!("configuration dump: unknown flag byte {flags}")));
        }
        let seeded = flags == 1;
        if seeded {
            check_p(p).map_err(|e| Error::parse(format!("configuration dump: {e}")))?;
        }
        check_capacity(&window)?;
        let n = window.len();
        let body = &data[DUMP_HEADER_LEN..];
        if body.len() != n.div_ceil(8) {
            return Err(Error::parse(format!(
                "configuration dump: bitmap has {} bytes, window needs {}",
                body.len(),
                n.div_ceil(8)
            )));
        }
        if n % 8 != 0 && body[body.len() - 1] >> (n % 8) != 0 {
            return Err(Error::parse("configuration dump: padding bits must be zero"));
        }
        let mut bits = vec![0u64; words(n)];
        for (byte, &b) in body.iter().enumerate() {
            bits[byte / 8] |= (b as u64) << ((byte % 8) * 8);
        }
        Ok(Configuration { window, p: if seeded { p } else { f64::NAN }, seed, seeded, bits })
    }
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}
