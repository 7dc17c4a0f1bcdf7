//! Filters that fit no single family: VSDROMF, AMNF, FMVMF, AVMF/ABVDF and
//! FFNRF.

use smallvec::SmallVec;

use crate::color_math::{minkowski_distance, AcosMode, DistanceKind, FuzzyMetric, Vec3};
use crate::filters::fuzzy::weighted_mean;
use crate::image::{argmin, cumulative_distances, rank_by, Window};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiscParams {
    pub sdrom_t: [f64; 4],
    pub amnf_k: f64,
    pub amnf_c: i32,
    pub fmvmf_t: f64,
    pub avmf_t: f64,
    pub abvdf_t: f64,
    /// `None` means `⌈n/2⌉`.
    pub avmf_k: Option<usize>,
    pub ffnrf_k: f64,
    pub ffnrf_alpha: f64,
}

impl Default for MiscParams {
    fn default() -> Self {
        MiscParams {
            sdrom_t: [35.0, 40.0, 45.0, 50.0],
            amnf_k: 0.33,
            amnf_c: 3,
            fmvmf_t: 0.75,
            avmf_t: 100.0,
            abvdf_t: 0.16,
            avmf_k: None,
            ffnrf_k: 1024.0,
            ffnrf_alpha: 3.5,
        }
    }
}

/// Vector signal-dependent rank-ordered mean filter.
pub fn vsdromf(win: &Window, t: [f64; 4], p: f64) -> Vec3 {
    let kind = DistanceKind::Minkowski { p };
    let order = rank_by(&cumulative_distances(win, kind, AcosMode::Reference));
    let xc = win.center();
    let noisy = order
        .iter()
        .zip(t)
        .any(|(&i, t)| minkowski_distance(xc, win.get(i), p) > t);
    if noisy {
        win.get(order[0])
    } else {
        xc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmnfKernel {
    Exponential,
    Gaussian,
}

impl AmnfKernel {
    #[inline]
    pub fn eval(self, z: Vec3) -> f64 {
        match self {
            AmnfKernel::Exponential => (-z.norm()).exp(),
            AmnfKernel::Gaussian => (-0.5 * z.norm_sq()).exp(),
        }
    }
}

pub const AMNF_WIDTH_FLOOR: f64 = 1e-6;

/// Adaptive multichannel nonparametric filter: a kernel-weighted mean with
/// per-pixel bandwidths from the L1 cumulative distances.
pub fn amnf(win: &Window, kernel: AmnfKernel, k: f64, c: i32) -> Vec3 {
    let px = win.pixels();
    let n = px.len() as f64;
    let scale = n.powf(-k / c as f64);
    let l1 = cumulative_distances(win, DistanceKind::Minkowski { p: 1.0 }, AcosMode::Reference);
    let xc = win.center();
    let u: SmallVec<[f64; 9]> = px
        .iter()
        .zip(l1.iter())
        .map(|(&x, &l)| {
            let h = (scale * l).max(AMNF_WIDTH_FLOOR);
            h.powi(-c) * kernel.eval((xc - x) / h)
        })
        .collect();
    weighted_mean(px, &u)
}

/// Sums `Σ_{i≠C} ‖x_k − x_i‖` for every candidate `k`.
fn center_excluded_sums(win: &Window, p: f64) -> SmallVec<[f64; 9]> {
    let px = win.pixels();
    let c = win.center_index();
    px.iter()
        .map(|&a| {
            px.iter()
                .enumerate()
                .filter(|&(i, _)| i != c)
                .map(|(_, &b)| minkowski_distance(a, b, p))
                .sum()
        })
        .collect()
}

/// Fast modified vector median filter.
pub fn fmvmf(win: &Window, t: f64, p: f64) -> Vec3 {
    let sums = center_excluded_sums(win, p);
    let best = argmin(&sums);
    let xc = win.center();
    // The center's own term is zero, so its excluded sum is its full sum.
    if sums[win.center_index()] - sums[best] > t {
        win.get(best)
    } else {
        xc
    }
}

/// Adaptive VMF (Minkowski kind) or adaptive BVDF (angular kind).
///
/// The center is replaced by the vector median of the kind when its
/// distance to the mean of the `k` lowest-ranked pixels exceeds `t`.
pub fn avf_adaptive(win: &Window, kind: DistanceKind, t: f64, k: usize, mode: AcosMode) -> Vec3 {
    debug_assert!(!matches!(kind, DistanceKind::Directional { .. }));
    let order = rank_by(&cumulative_distances(win, kind, mode));
    let k = k.clamp(1, win.len());
    let mu = Vec3::mean(order[..k].iter().map(|&i| &win.pixels()[i]));
    if kind.pair(win.center(), mu, mode) > t {
        win.get(order[0])
    } else {
        win.center()
    }
}

/// Default `k = ⌈n/2⌉` for [`avf_adaptive`].
pub fn avmf_default_k(n: usize) -> usize {
    n.div_ceil(2)
}

/// Fast fuzzy noise reduction filter.
///
/// The candidate sums skip the center term and keep the candidate's own
/// unit term, while the center sum runs over the whole window.
pub fn ffnrf(win: &Window, metric: &FuzzyMetric) -> Vec3 {
    let px = win.pixels();
    let c = win.center_index();
    let xc = win.center();
    let mut best = 0;
    let mut best_sum = f64::NEG_INFINITY;
    for (k, &a) in px.iter().enumerate() {
        let s: f64 = px
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != c)
            .map(|(_, &b)| metric.similarity(a, b))
            .sum();
        if s > best_sum {
            best_sum = s;
            best = k;
        }
    }
    let center_sum: f64 = px.iter().map(|&b| metric.similarity(xc, b)).sum();
    if center_sum < best_sum {
        px[best]
    } else {
        xc
    }
}
