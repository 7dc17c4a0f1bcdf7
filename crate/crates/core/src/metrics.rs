//! Quality metrics (MAE, MSE, NCD) and filter timing.
//!
//! NCD is computed in CIE 1976 L*a*b* from sRGB under D65: sRGB decoding with
//! the 0.04045 breakpoint, the sRGB→XYZ matrix below, and the white point
//! taken as the matrix row sums so that (255, 255, 255) maps to exactly
//! (100, 0, 0).

use std::sync::LazyLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{filter_image_sequential, Image};
use crate::registry::{build, FilterSpec};

/// Linear sRGB → XYZ, D65.
pub const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// D65 reference white in XYZ, the row sums of [`SRGB_TO_XYZ`].
pub const WHITE: [f64; 3] = [
    0.4124564 + 0.3575761 + 0.1804375,
    0.2126729 + 0.7151522 + 0.0721750,
    0.0193339 + 0.1191920 + 0.9503041,
];

const LAB_EPSILON: f64 = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// sRGB transfer function inverse for one 8-bit channel.
pub fn srgb_decode(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

static DECODE: LazyLock<[f64; 256]> = LazyLock::new(|| std::array::from_fn(|i| srgb_decode(i as u8)));

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        t / (3.0 * (6.0 / 29.0) * (6.0 / 29.0)) + 4.0 / 29.0
    }
}

pub fn srgb_to_lab(rgb: [u8; 3]) -> Lab {
    let lin = rgb.map(|v| DECODE[v as usize]);
    let xyz: [f64; 3] = std::array::from_fn(|r| {
        SRGB_TO_XYZ[r][0] * lin[0] + SRGB_TO_XYZ[r][1] * lin[1] + SRGB_TO_XYZ[r][2] * lin[2]
    });
    let [fx, fy, fz]: [f64; 3] = std::array::from_fn(|i| lab_f(xyz[i] / WHITE[i]));
    Lab {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

fn channel_sum(reference: &Image, test: &Image, f: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
    reference.ensure_same_size(test)?;
    let total: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .flat_map(|(a, b)| (0..3).map(move |c| f(a[c] as f64 - b[c] as f64)))
        .sum();
    Ok(total / (3 * reference.len()) as f64)
}

/// Mean absolute error over all channels.
pub fn mae(reference: &Image, test: &Image) -> Result<f64> {
    channel_sum(reference, test, f64::abs)
}

/// Mean squared error over all channels.
pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    channel_sum(reference, test, |d| d * d)
}

/// Normalized color distance: summed L*a*b* error over summed L*a*b*
/// magnitude of the reference. Not symmetric.
pub fn ncd(reference: &Image, test: &Image) -> Result<f64> {
    reference.ensure_same_size(test)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&r, &t) in reference.pixels().iter().zip(test.pixels()) {
        let a = srgb_to_lab(r);
        let norm = (a.l * a.l + a.a * a.a + a.b * a.b).sqrt();
        den += norm;
        if r != t {
            let b = srgb_to_lab(t);
            num += ((a.l - b.l).powi(2) + (a.a - b.a).powi(2) + (a.b - b.b).powi(2)).sqrt();
        }
    }
    match (num == 0.0, den > 0.0) {
        (true, _) => Ok(0.0),
        (false, true) => Ok(num / den),
        (false, false) => Err(Error::NcdUndefined),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
    pub time_ms: f64,
}

pub fn evaluate(reference: &Image, test: &Image) -> Result<MetricReport> {
    Ok(MetricReport {
        mae: mae(reference, test)?,
        mse: mse(reference, test)?,
        ncd: ncd(reference, test)?,
        time_ms: 0.0,
    })
}

/// Filters `img` on the calling thread and returns the wall time of the
/// filtering pass in milliseconds. Building the filter (tables, kernel
/// width estimates) is not timed.
pub fn time_filter(img: &Image, spec: &FilterSpec, side: usize) -> Result<(Image, f64)> {
    let f = build(spec, img, side)?;
    let start = Instant::now();
    let out = filter_image_sequential(img, f.as_ref(), side)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((out, ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |_, _| rng.gen()).unwrap()
    }

    #[test]
    fn exact_ground_truths() {
        let zero = Image::filled(8, 8, [0; 3]).unwrap();
        let one = Image::filled(8, 8, [1; 3]).unwrap();
        let two = Image::filled(8, 8, [2; 3]).unwrap();
        assert_eq!(mae(&zero, &one).unwrap(), 1.0);
        assert_eq!(mse(&zero, &two).unwrap(), 4.0);
        assert_eq!(ncd(&one, &one).unwrap(), 0.0);
        assert_eq!(ncd(&zero, &zero).unwrap(), 0.0);
        assert!(matches!(ncd(&zero, &one), Err(Error::NcdUndefined)));
        assert!(ncd(&one, &zero).unwrap() > 0.0);
    }

    #[test]
    fn lab_reference_points() {
        let w = srgb_to_lab([255, 255, 255]);
        assert!((w.l - 100.0).abs() < 1e-3 && w.a.abs() < 1e-3 && w.b.abs() < 1e-3);
        assert_eq!(srgb_to_lab([0, 0, 0]), Lab { l: 0.0, a: 0.0, b: 0.0 });
        // scikit-image 0.25 rgb2lab, which normalizes by a rounded D65 white.
        for (rgb, want) in [
            ([255, 0, 0], [53.2405879437449, 80.0923082256922, 67.2027510444287]),
            ([0, 255, 0], [87.73509948831895, -86.18302974439501, 83.17970317538452]),
        ] {
            let got = srgb_to_lab(rgb);
            for (g, w) in [got.l, got.a, got.b].into_iter().zip(want) {
                assert!((g - w).abs() < 1e-3, "{rgb:?}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn decoding_is_strictly_increasing() {
        for v in 0..255u8 {
            assert!(srgb_decode(v) < srgb_decode(v + 1));
        }
    }

    #[test]
    fn oracles_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            let a = random_image(&mut rng, 13, 7);
            let b = random_image(&mut rng, 13, 7);
            let (mut abs, mut sq) = (0.0f64, 0.0f64);
            for y in 0..7 {
                for x in 0..13 {
                    for c in 0..3 {
                        let d = a.get(x, y)[c] as f64 - b.get(x, y)[c] as f64;
                        abs += d.abs();
                        sq += d * d;
                    }
                }
            }
            let n = (13 * 7 * 3) as f64;
            assert!((mae(&a, &b).unwrap() - abs / n).abs() < 1e-12);
            assert!((mse(&a, &b).unwrap() - sq / n).abs() < 1e-9);
            assert!(mse(&a, &b).unwrap() >= mae(&a, &b).unwrap().powi(2));
            assert_eq!(mae(&a, &b).unwrap(), mae(&b, &a).unwrap());

            let (mut num, mut den) = (0.0f64, 0.0f64);
            for (p, q) in a.pixels().iter().zip(b.pixels()) {
                let (l1, l2) = (srgb_to_lab(*p), srgb_to_lab(*q));
                num += ((l1.l - l2.l).powi(2) + (l1.a - l2.a).powi(2) + (l1.b - l2.b).powi(2)).sqrt();
                den += (l1.l.powi(2) + l1.a.powi(2) + l1.b.powi(2)).sqrt();
            }
            let got = ncd(&a, &b).unwrap();
            assert!((got - num / den).abs() <= 1e-9 * got);
        }
    }

    #[test]
    fn ncd_is_asymmetric() {
        let dark = Image::filled(4, 4, [20, 20, 20]).unwrap();
        let bright = Image::filled(4, 4, [200, 200, 200]).unwrap();
        assert!(ncd(&dark, &bright).unwrap() > ncd(&bright, &dark).unwrap());
    }

    #[test]
    fn doubling_differences() {
        let base = Image::filled(6, 6, [100; 3]).unwrap();
        let d1 = Image::from_fn(6, 6, |x, _| [100 + x as u8; 3]).unwrap();
        let d2 = Image::from_fn(6, 6, |x, _| [100 + 2 * x as u8; 3]).unwrap();
        assert_eq!(mae(&base, &d2).unwrap(), 2.0 * mae(&base, &d1).unwrap());
        assert_eq!(mse(&base, &d2).unwrap(), 4.0 * mse(&base, &d1).unwrap());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = Image::filled(2, 2, [0; 3]).unwrap();
        let b = Image::filled(2, 3, [0; 3]).unwrap();
        assert!(mae(&a, &b).is_err());
        assert!(ncd(&a, &b).is_err());
    }

    #[test]
    fn timing_returns_the_filtered_image() {
        let img = Image::from_fn(20, 20, |x, y| [(x * 12) as u8, (y * 12) as u8, 50]).unwrap();
        let spec = FilterSpec::new("vmf");
        let (out, ms) = time_filter(&img, &spec, 3).unwrap();
        assert!(ms >= 0.0);
        assert_eq!(out, crate::registry::apply_filter(&img, &spec, 3).unwrap());
    }
}
