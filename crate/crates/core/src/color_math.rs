//! Distance and similarity primitives shared by every filter.
//!
//! Pixels are lifted to [`Vec3`] (three `f64` channels) before any distance is
//! taken, so integer inputs are represented exactly. The angular family goes
//! through [`AcosMode`], which selects either the libm `acos` or a piecewise
//! cubic minimax approximation that is roughly an order of magnitude cheaper.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Index, Mul, Sub};

/// A color vector with real-valued channels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    #[inline]
    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Vec3([c1, c2, c3])
    }

    #[inline]
    pub fn splat(v: f64) -> Self {
        Vec3([v; 3])
    }

    #[inline]
    pub fn from_rgb(rgb: [u8; 3]) -> Self {
        Vec3([rgb[0] as f64, rgb[1] as f64, rgb[2] as f64])
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Rounds each channel half away from zero and clamps to `[0, 255]`.
    pub fn to_rgb(self) -> [u8; 3] {
        self.0.map(|c| {
            if c.is_nan() {
                0
            } else {
                c.round().clamp(0.0, 255.0) as u8
            }
        })
    }

    /// Arithmetic mean of a non-empty set of vectors.
    pub fn mean<'a, I>(vs: I) -> Vec3
    where
        I: IntoIterator<Item = &'a Vec3>,
    {
        let mut acc = Vec3::ZERO;
        let mut count = 0usize;
        for v in vs {
            acc += *v;
            count += 1;
        }
        debug_assert!(count > 0, "mean of an empty set");
        acc / count as f64
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.0[0] += o.0[0];
        self.0[1] += o.0[1];
        self.0[2] += o.0[2];
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }
}

/// Which inverse cosine the angular distances use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AcosMode {
    /// Piecewise cubic minimax approximation ([`acos_fast`]).
    #[default]
    Approximate,
    /// The platform `f64::acos`.
    Reference,
}

impl AcosMode {
    #[inline]
    pub fn acos(self, x: f64) -> f64 {
        match self {
            AcosMode::Approximate => acos_fast(x),
            AcosMode::Reference => x.clamp(-1.0, 1.0).acos(),
        }
    }
}

/// The distance used to build cumulative distances and rankings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistanceKind {
    /// `L_p`, `p >= 1`.
    Minkowski { p: f64 },
    /// Angle between the two vectors, in radians.
    Angular,
    /// Product-of-powers blend of angular (weight `gamma`) and `L_p` sums.
    Directional { gamma: f64, p: f64 },
}

impl DistanceKind {
    pub const L2: DistanceKind = DistanceKind::Minkowski { p: 2.0 };

    /// Distance between two vectors. For the directional kind this is the
    /// pairwise form `A^γ · L_p^(1-γ)`.
    #[inline]
    pub fn pair(self, a: Vec3, b: Vec3, mode: AcosMode) -> f64 {
        match self {
            DistanceKind::Minkowski { p } => minkowski_distance(a, b, p),
            DistanceKind::Angular => angular_distance(a, b, mode),
            DistanceKind::Directional { gamma, p } => {
                directional_pair_distance(a, b, gamma, p, mode)
            }
        }
    }
}

/// `(Σ_k |a_k − b_k|^p)^(1/p)`. `p = 1` and `p = 2` take exact fast paths.
#[inline]
pub fn minkowski_distance(a: Vec3, b: Vec3, p: f64) -> f64 {
    debug_assert!(p >= 1.0, "Minkowski exponent must be >= 1");
    let d = a - b;
    if p == 2.0 {
        d.norm()
    } else if p == 1.0 {
        d.0[0].abs() + d.0[1].abs() + d.0[2].abs()
    } else if p.is_infinite() {
        d.0[0].abs().max(d.0[1].abs()).max(d.0[2].abs())
    } else {
        let s: f64 = d.0.iter().map(|c| c.abs().powf(p)).sum();
        s.powf(1.0 / p)
    }
}

// Cubic minimax fits on [0, 0.5]; max error ~6.8e-5 each.
const ASIN_C0: f64 = -0.67921302e-4;
const ASIN_C1: f64 = 1.003729762;
const ASIN_C2: f64 = -0.309031329e-1;
const ASIN_C3: f64 = 0.2356774247;

const ACOS_C0: f64 = 1.570864248;
const ACOS_C1: f64 = -1.003729768;
const ACOS_C2: f64 = 0.309031763e-1;
const ACOS_C3: f64 = -0.2356774861;

/// Cubic minimax approximation of `asin` on `[0, 0.5]`.
///
/// Only meaningful on `[0, 0.5]`; [`acos_fast`] never calls it outside.
#[inline]
pub fn asin_fast(x: f64) -> f64 {
    debug_assert!(
        (0.0..=0.5).contains(&x),
        "asin_fast argument {x} outside [0, 0.5]"
    );
    ASIN_C0 + (ASIN_C1 + (ASIN_C2 + ASIN_C3 * x) * x) * x
}

/// Fast inverse cosine.
///
/// The argument is clamped to `[-1, 1]`. On `[0, 0.5]` a direct cubic is
/// used; above 0.5 the singularity at 1 is avoided through
/// `acos(x) = 2·asin(sqrt((1 − x)/2))`. Negative arguments reflect through
/// `π − acos(−x)`. Absolute error stays below 1.5e-4.
#[inline]
pub fn acos_fast(x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    if x < 0.0 {
        return PI - acos_fast(-x);
    }
    if x <= 0.5 {
        ACOS_C0 + (ACOS_C1 + (ACOS_C2 + ACOS_C3 * x) * x) * x
    } else {
        2.0 * asin_fast(((1.0 - x) * 0.5).sqrt())
    }
}

/// Angle between two pixel vectors.
///
/// A zero vector has no direction; any angle involving one is 0. The cosine
/// is clamped before the inverse cosine, and the approximate path's small
/// negative values near `cos = 1` are floored at 0.
#[inline]
pub fn angular_distance(a: Vec3, b: Vec3, mode: AcosMode) -> f64 {
    let na = a.norm_sq();
    let nb = b.norm_sq();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let cos = a.dot(b) / (na * nb).sqrt();
    mode.acos(cos.clamp(-1.0, 1.0)).max(0.0)
}

/// `base^exp` with `0^0 = 1`.
#[inline]
pub(crate) fn pow_or_one(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else if exp == 1.0 {
        base
    } else {
        base.powf(exp)
    }
}

/// Blend of two already-computed angular and magnitude quantities:
/// `angle^γ · magnitude^(1−γ)`.
#[inline]
pub fn directional_blend(angle: f64, magnitude: f64, gamma: f64) -> f64 {
    pow_or_one(angle, gamma) * pow_or_one(magnitude, 1.0 - gamma)
}

/// `A(a, b)^γ · L_p(a, b)^(1−γ)`.
#[inline]
pub fn directional_pair_distance(a: Vec3, b: Vec3, gamma: f64, p: f64, mode: AcosMode) -> f64 {
    debug_assert!((0.0..=1.0).contains(&gamma));
    directional_blend(
        angular_distance(a, b, mode),
        minkowski_distance(a, b, p),
        gamma,
    )
}

/// Combined direction/magnitude dissimilarity used by ANNMF.
///
/// `1 − cos(θ)·(1 − |‖a‖ − ‖b‖| / max(‖a‖, ‖b‖))`. Two zero vectors are
/// identical (0); a zero and a non-zero vector are maximally apart (1).
pub fn composite_distance(a: Vec3, b: Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    match (na == 0.0, nb == 0.0) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return 1.0,
        _ => {}
    }
    let cos = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
    let magnitude = 1.0 - (na - nb).abs() / na.max(nb);
    1.0 - cos * magnitude
}

/// Commonality/totality ratio of CBRF.
///
/// Evaluated through the law of cosines,
/// `sqrt((‖a‖² + ‖b‖² − 2‖a‖‖b‖cos θ) / (‖a‖² + ‖b‖² + 2‖a‖‖b‖cos θ))`,
/// which is `‖a − b‖ / ‖a + b‖`.
pub fn cbrf_similarity(a: Vec3, b: Vec3) -> f64 {
    let sq = a.norm_sq() + b.norm_sq();
    let cross = 2.0 * a.dot(b);
    let total = sq + cross;
    if total <= 0.0 {
        return 0.0;
    }
    ((sq - cross).max(0.0) / total).sqrt()
}

/// Multiplicative fuzzy similarity
/// `M(a, b) = Π_k ((min(a_k, b_k) + K) / (max(a_k, b_k) + K))^α`.
///
/// For 8-bit channels every per-channel factor can come from a 256×256 table,
/// which is built on demand by [`FuzzyMetric::with_table`]. Both paths multiply
/// the same three factors in the same order, so they agree bit for bit.
#[derive(Clone, Debug)]
pub struct FuzzyMetric {
    k: f64,
    alpha: f64,
    table: Option<Box<[f64]>>,
}

impl FuzzyMetric {
    pub fn new(k: f64, alpha: f64) -> Self {
        debug_assert!(k > 0.0 && alpha > 0.0);
        FuzzyMetric {
            k,
            alpha,
            table: None,
        }
    }

    /// Same metric with the precomputed `Q^α` table attached.
    pub fn with_table(k: f64, alpha: f64) -> Self {
        let mut table = vec![0.0; 256 * 256].into_boxed_slice();
        for a in 0..256usize {
            for b in 0..256usize {
                table[a * 256 + b] = Self::factor(k, alpha, a as f64, b as f64);
            }
        }
        FuzzyMetric {
            k,
            alpha,
            table: Some(table),
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    #[inline]
    fn factor(k: f64, alpha: f64, a: f64, b: f64) -> f64 {
        ((a.min(b) + k) / (a.max(b) + k)).powf(alpha)
    }

    /// Direct evaluation, valid for any non-negative real channels.
    #[inline]
    pub fn direct(&self, a: Vec3, b: Vec3) -> f64 {
        let f = |c: usize| Self::factor(self.k, self.alpha, a.0[c], b.0[c]);
        f(0) * f(1) * f(2)
    }

    /// Uses the table when present and both vectors hold integer channels
    /// in `[0, 255]`; otherwise falls back to [`FuzzyMetric::direct`].
    #[inline]
    pub fn similarity(&self, a: Vec3, b: Vec3) -> f64 {
        match &self.table {
            Some(table) => match (byte_channels(a), byte_channels(b)) {
                (Some(ia), Some(ib)) => {
                    let q = |c: usize| table[ia[c] * 256 + ib[c]];
                    q(0) * q(1) * q(2)
                }
                _ => self.direct(a, b),
            },
            None => self.direct(a, b),
        }
    }
}

#[inline]
fn byte_channels(v: Vec3) -> Option<[usize; 3]> {
    let mut out = [0usize; 3];
    for (o, &c) in out.iter_mut().zip(v.0.iter()) {
        if !(0.0..=255.0).contains(&c) || c.fract() != 0.0 {
            return None;
        }
        *o = c as usize;
    }
    Some(out)
}

/// Free-function form of [`FuzzyMetric::direct`].
pub fn fuzzy_metric(a: Vec3, b: Vec3, k: f64, alpha: f64) -> f64 {
    FuzzyMetric::new(k, alpha).direct(a, b)
}
