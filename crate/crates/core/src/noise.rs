//! Impulsive noise models with counter-based, order-independent randomness.
//!
//! Every random number is a pure function of `(seed, x, y, channel, draw)`,
//! computed by chaining the SplitMix64 finalizer over those fields. The
//! mixing below is part of the benchmark contract: changing it changes every
//! noisy image and every result row.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Slot used instead of a channel index for per-pixel draws.
const PIXEL_SLOT: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    Uncorrelated,
    Correlated,
}

impl NoiseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::Uncorrelated => "uncorrelated",
            NoiseModel::Correlated => "correlated",
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncorrelated" => Ok(NoiseModel::Uncorrelated),
            "correlated" => Ok(NoiseModel::Correlated),
            _ => Err(Error::NoiseConfig(format!(
                "unknown model `{s}` (expected uncorrelated or correlated)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub model: NoiseModel,
    /// Channel (uncorrelated) or pixel (correlated) corruption probability.
    pub phi: f64,
    /// Single-channel shares of the correlated model; the remainder
    /// `1 − Σφ_k` corrupts all three channels.
    pub phi_k: [f64; 3],
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(model: NoiseModel, phi: f64, seed: u64) -> Self {
        NoiseConfig {
            model,
            phi,
            phi_k: [0.25; 3],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::NoiseConfig(m));
        if !(0.0..=1.0).contains(&self.phi) {
            return bad(format!("corruption probability {} outside [0, 1]", self.phi));
        }
        if self.phi_k.iter().any(|&p| p.is_nan() || p < 0.0) {
            return bad(format!("channel shares {:?} must be non-negative", self.phi_k));
        }
        if self.phi_k.iter().sum::<f64>() > 1.0 + 1e-12 {
            return bad(format!("channel shares {:?} sum above 1", self.phi_k));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random word for one draw.
#[inline]
pub fn counter_hash(seed: u64, x: usize, y: usize, slot: u64, draw: u64) -> u64 {
    let mut h = mix64(seed);
    for v in [x as u64, y as u64, slot, draw] {
        h = mix64(h ^ v);
    }
    h
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// An impulse in `[0, 10] ∪ [245, 255]`: subrange from `pick`, then one of
/// the 11 values by multiply-shift on the high half of `value`.
#[inline]
pub fn impulse_value(pick: u64, value: u64) -> u8 {
    let offset = (((value >> 32) * 11) >> 32) as u8;
    if pick >> 63 == 0 {
        offset
    } else {
        245 + offset
    }
}

#[inline]
fn impulse_at(seed: u64, x: usize, y: usize, channel: u64) -> u8 {
    impulse_value(
        counter_hash(seed, x, y, channel, 1),
        counter_hash(seed, x, y, channel, 2),
    )
}

/// Each channel independently replaced by an impulse with probability `phi`.
pub fn corrupt_uncorrelated(img: &Image, phi: f64, seed: u64) -> Result<Image> {
    NoiseConfig::new(NoiseModel::Uncorrelated, phi, seed).validate()?;
    Ok(map_pixels(img, |x, y, mut px| {
        for (c, v) in px.iter_mut().enumerate() {
            let c = c as u64;
            if unit_f64(counter_hash(seed, x, y, c, 0)) < phi {
                *v = impulse_at(seed, x, y, c);
            }
        }
        px
    }))
}

/// One categorical draw per pixel: clean, one channel `k` (probability
/// `φ_k·φ`), or all three channels (`(1 − Σφ_k)·φ`).
pub fn corrupt_correlated(img: &Image, cfg: &NoiseConfig) -> Result<Image> {
    cfg.validate()?;
    let NoiseConfig { phi, phi_k, seed, .. } = *cfg;
    let bounds = [phi * phi_k[0], phi * (phi_k[0] + phi_k[1]), phi * (phi_k[0] + phi_k[1] + phi_k[2])];
    Ok(map_pixels(img, |x, y, mut px| {
        let u = unit_f64(counter_hash(seed, x, y, PIXEL_SLOT, 0));
        if u >= phi {
            return px;
        }
        match bounds.iter().position(|&b| u < b) {
            Some(c) => px[c] = impulse_at(seed, x, y, c as u64),
            None => {
                for (c, v) in px.iter_mut().enumerate() {
                    *v = impulse_at(seed, x, y, c as u64);
                }
            }
        }
        px
    }))
}

pub fn corrupt(img: &Image, cfg: &NoiseConfig) -> Result<Image> {
    match cfg.model {
        NoiseModel::Uncorrelated => corrupt_uncorrelated(img, cfg.phi, cfg.seed),
        NoiseModel::Correlated => corrupt_correlated(img, cfg),
    }
}

fn map_pixels(img: &Image, f: impl Fn(usize, usize, [u8; 3]) -> [u8; 3]) -> Image {
    let w = img.width();
    let px = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &p)| f(i % w, i / w, p))
        .collect();
    Image::new(w, img.height(), px).expect("dimensions come from a valid image")
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of one noise realization, derived from the master seed, the image
/// name, the model and the level, so adding images or levels never changes
/// existing realizations.
pub fn derive_seed(master: u64, image: &str, model: NoiseModel, level: f64) -> u64 {
    let mut h = mix64(master);
    for v in [fnv1a(image.as_bytes()), model as u64, level.to_bits()] {
        h = mix64(h ^ v);
    }
    h
}

pub fn is_impulse(v: u8) -> bool {
    v <= 10 || v >= 245
}
