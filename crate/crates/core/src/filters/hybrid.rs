//! Hybrid vector filters: outputs formed by combining several sub-filters.

use smallvec::SmallVec;

use crate::color_math::{
    angular_distance, directional_pair_distance, minkowski_distance, AcosMode, DistanceKind, Vec3,
};
use crate::filters::basic::{bvdf, vmf};
use crate::filters::fuzzy::weighted_mean;
use crate::image::{argmin, cumulative_distance, Image, Window};

/// Coefficients of the rational hybrid filters. `alpha` must sum to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalParams {
    pub alpha: [f64; 3],
    pub beta1: f64,
    pub beta2: f64,
    /// Exponent applied to cumulative distances in the fuzzy weights.
    pub gamma_fuzzy: f64,
    /// Angular share of the directional distance (FDDRHF).
    pub gamma_dd: f64,
    pub p: f64,
}

impl Default for RationalParams {
    fn default() -> Self {
        RationalParams {
            alpha: [1.0, -2.0, 1.0],
            beta1: 3.0,
            beta2: 3.0,
            gamma_fuzzy: 1.0,
            gamma_dd: 0.5,
            p: 2.0,
        }
    }
}

/// Which of the four rational hybrids to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RationalFlavor {
    Vmrhf,
    Fvmrhf,
    Fvdrhf,
    Fddrhf,
}

/// Sub-filter masks over the central 3×3 of the window, row-major.
/// Non-zero entries select pixels; the center-weighted mask weights the
/// center by 3.
pub struct SubfilterMasks;

impl SubfilterMasks {
    pub const PLUS: [u8; 9] = [0, 1, 0, 1, 1, 1, 0, 1, 0];
    pub const CENTER3: [u8; 9] = [1, 1, 1, 1, 3, 1, 1, 1, 1];
    pub const CROSS: [u8; 9] = [1, 0, 1, 0, 1, 0, 1, 0, 1];

    /// Window indices of the central 3×3 block, row-major.
    pub fn central_indices(win: &Window) -> [usize; 9] {
        let s = win.side();
        let c = s / 2;
        let mut out = [0usize; 9];
        let mut k = 0;
        for dy in 0..3 {
            for dx in 0..3 {
                out[k] = (c + dy - 1) * s + (c + dx - 1);
                k += 1;
            }
        }
        out
    }

    /// Selected pixels and their mask coefficients.
    pub fn select(win: &Window, mask: &[u8; 9]) -> (SmallVec<[Vec3; 9]>, SmallVec<[f64; 9]>) {
        let idx = Self::central_indices(win);
        let mut px = SmallVec::new();
        let mut coef = SmallVec::new();
        for (k, &m) in mask.iter().enumerate() {
            if m != 0 {
                px.push(win.get(idx[k]));
                coef.push(m as f64);
            }
        }
        (px, coef)
    }
}

/// Laplacian-kernel KVMF parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub beta: f64,
    pub h: f64,
}

/// Smallest kernel width; a constant image would otherwise give `h = 0`.
pub const KERNEL_WIDTH_FLOOR: f64 = 1e-6;

/// Extended VMF: the window mean if its cumulative distance does not exceed
/// the vector median's, otherwise the vector median.
pub fn exvmf(win: &Window, p: f64) -> Vec3 {
    let kind = DistanceKind::Minkowski { p };
    let mean = win.mean();
    let median = vmf(win, p);
    if cumulative_distance(mean, win, kind, AcosMode::Reference)
        <= cumulative_distance(median, win, kind, AcosMode::Reference)
    {
        mean
    } else {
        median
    }
}

/// Rescales `direction` to the norm `magnitude`; `None` if `direction` is zero.
fn rescale(direction: Vec3, magnitude: f64) -> Option<Vec3> {
    let n = direction.norm();
    (n > 0.0).then(|| direction * (magnitude / n))
}

/// Hybrid directional filter: the BVDF direction with the VMF magnitude.
pub fn hdf(win: &Window, p: f64, mode: AcosMode) -> Vec3 {
    let v = vmf(win, p);
    let b = bvdf(win, mode);
    if v == b {
        return v;
    }
    rescale(b, v.norm()).unwrap_or(v)
}

/// Adaptive hybrid directional filter: the BVDF direction with either the
/// VMF or the mean magnitude, whichever lands closer to the window.
pub fn ahdf(win: &Window, p: f64, mode: AcosMode) -> Vec3 {
    let v = vmf(win, p);
    let b = bvdf(win, mode);
    if v == b {
        return v;
    }
    let Some(out1) = rescale(b, v.norm()) else {
        return v;
    };
    let out2 = rescale(b, win.mean().norm()).unwrap_or(out1);
    let kind = DistanceKind::Minkowski { p };
    if cumulative_distance(out1, win, kind, mode) <= cumulative_distance(out2, win, kind, mode) {
        out1
    } else {
        out2
    }
}

/// Center-weighted vector median over a pixel subset:
/// argmin of `Σ_j c_j·‖x_i − x_j‖`.
fn weighted_vector_median(px: &[Vec3], coef: &[f64], p: f64) -> Vec3 {
    let sums: SmallVec<[f64; 9]> = px
        .iter()
        .map(|&a| {
            px.iter()
                .zip(coef)
                .map(|(&b, &c)| c * minkowski_distance(a, b, p))
                .sum()
        })
        .collect();
    px[argmin(&sums)]
}

fn subset_cumulative(px: &[Vec3], kind: DistanceKind, mode: AcosMode) -> SmallVec<[f64; 9]> {
    let win_like = |i: usize| -> f64 {
        match kind {
            DistanceKind::Directional { gamma, p } => {
                let a: f64 = px.iter().map(|&b| angular_distance(px[i], b, mode)).sum();
                let l: f64 = px.iter().map(|&b| minkowski_distance(px[i], b, p)).sum();
                crate::color_math::directional_blend(a, l, gamma)
            }
            _ => px.iter().map(|&b| kind.pair(px[i], b, mode)).sum(),
        }
    };
    (0..px.len()).map(win_like).collect()
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic fuzzy weights `w_i = c_i · 2 / (1 + exp(l(i)^γ))`, returned
/// rescaled so the largest is 1. Evaluated in the log domain; the rescaling
/// leaves every weight ratio intact, so normalized outputs are unchanged.
pub(crate) fn logistic_weights(cumulative: &[f64], coef: &[f64], gamma: f64) -> SmallVec<[f64; 9]> {
    let logs: SmallVec<[f64; 9]> = cumulative
        .iter()
        .zip(coef)
        .map(|(&l, &c)| c.ln() - softplus(l.powf(gamma)))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|&v| (v - max).exp()).collect()
}

/// Fuzzy weighted average over a pixel subset with logistic weights.
fn fuzzy_subfilter(px: &[Vec3], coef: &[f64], kind: DistanceKind, gamma: f64, mode: AcosMode) -> Vec3 {
    let l = subset_cumulative(px, kind, mode);
    let w = logistic_weights(&l, coef, gamma);
    weighted_mean(px, &w)
}

/// The three sub-filter outputs `(φ1, φc, φ2)` of a rational hybrid.
pub fn rational_subfilters(
    win: &Window,
    flavor: RationalFlavor,
    params: &RationalParams,
    mode: AcosMode,
) -> (Vec3, Vec3, Vec3) {
    let (plus, plus_c) = SubfilterMasks::select(win, &SubfilterMasks::PLUS);
    let (full, full_c) = SubfilterMasks::select(win, &SubfilterMasks::CENTER3);
    let (cross, cross_c) = SubfilterMasks::select(win, &SubfilterMasks::CROSS);
    let p = params.p;
    let kind = match flavor {
        RationalFlavor::Vmrhf => {
            return (
                weighted_vector_median(&plus, &plus_c, p),
                weighted_vector_median(&full, &full_c, p),
                weighted_vector_median(&cross, &cross_c, p),
            )
        }
        RationalFlavor::Fvmrhf => DistanceKind::Minkowski { p },
        RationalFlavor::Fvdrhf => DistanceKind::Angular,
        RationalFlavor::Fddrhf => DistanceKind::Directional {
            gamma: params.gamma_dd,
            p,
        },
    };
    let g = params.gamma_fuzzy;
    (
        fuzzy_subfilter(&plus, &plus_c, kind, g, mode),
        fuzzy_subfilter(&full, &full_c, kind, g, mode),
        fuzzy_subfilter(&cross, &cross_c, kind, g, mode),
    )
}

/// Rational hybrid filters (VMRHF and its fuzzy counterparts):
/// `φc + (α1·φ1 + α2·φc + α3·φ2) / (β1 + β2·δ(φ1, φ2))`.
pub fn rational_hybrid(
    win: &Window,
    flavor: RationalFlavor,
    params: &RationalParams,
    mode: AcosMode,
) -> Vec3 {
    let (phi1, phic, phi2) = rational_subfilters(win, flavor, params, mode);
    let edge = match flavor {
        RationalFlavor::Vmrhf | RationalFlavor::Fvmrhf => (phi1 - phi2).norm(),
        RationalFlavor::Fvdrhf => angular_distance(phi1, phi2, mode),
        RationalFlavor::Fddrhf => {
            directional_pair_distance(phi1, phi2, params.gamma_dd, 2.0, mode)
        }
    };
    let [a1, a2, a3] = params.alpha;
    let numerator = phi1 * a1 + phic * a2 + phi2 * a3;
    phic + numerator / (params.beta1 + params.beta2 * edge)
}

/// Kernel VMF: `μ·x_C + (1 − μ)·x_VMF` with `μ = exp(−‖x_C − x_VMF‖ / h)`.
pub fn kvmf(win: &Window, params: KernelParams, p: f64) -> Vec3 {
    let c = win.center();
    let v = vmf(win, p);
    let d = (c - v).norm();
    let mu = (-d / params.h.max(KERNEL_WIDTH_FLOOR)).exp();
    c * mu + v * (1.0 - mu)
}

/// Kernel width from the global pixel scatter:
/// `h = β · sqrt(Σ_i ‖x_i − x̄‖² / (8N))`, floored at [`KERNEL_WIDTH_FLOOR`].
pub fn estimate_kernel_width(img: &Image, beta: f64) -> f64 {
    let n = img.len() as f64;
    let mean = Vec3::mean(
        img.pixels()
            .iter()
            .map(|&p| Vec3::from_rgb(p))
            .collect::<Vec<_>>()
            .iter(),
    );
    let scatter: f64 = img
        .pixels()
        .iter()
        .map(|&p| (Vec3::from_rgb(p) - mean).norm_sq())
        .sum();
    (beta * (scatter / (8.0 * n)).sqrt()).max(KERNEL_WIDTH_FLOOR)
}
