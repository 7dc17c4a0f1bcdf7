//! Center-weighted vector filters and the adaptive switching filters built
//! on them (MCWVMF, ACWVMF, ACWVDF, ACWDDF).

use smallvec::SmallVec;

use crate::color_math::{directional_blend, AcosMode, DistanceKind, Vec3};
use crate::filters::basic::argmin_index;
use crate::image::{argmin, cumulative_distance, Window};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterWeightParams {
    pub lambda: usize,
    pub threshold: f64,
    pub w_mcw: f64,
    pub gamma_dd: f64,
}

impl CenterWeightParams {
    pub const ACWVMF_THRESHOLD: f64 = 80.0;
    pub const ACWVDF_THRESHOLD: f64 = 0.19;
    pub const ACWDDF_THRESHOLD: f64 = 10.8;
}

impl Default for CenterWeightParams {
    fn default() -> Self {
        CenterWeightParams {
            lambda: 2,
            threshold: Self::ACWVMF_THRESHOLD,
            w_mcw: 0.5,
            gamma_dd: 0.5,
        }
    }
}

/// Center weight for smoothing level `k`: `n − 2k + 2`.
#[inline]
pub fn center_weight(n: usize, k: usize) -> f64 {
    (n + 2 - 2 * k) as f64
}

/// Weighted cumulative sums `Σ_j w_j·dist(x_i, x_j)`, center weight `wc`,
/// all others 1. Directional kinds combine the weighted angular and weighted
/// Minkowski sums at the aggregate level.
fn weighted_cumulative(win: &Window, wc: f64, kind: DistanceKind, mode: AcosMode) -> SmallVec<[f64; 9]> {
    let px = win.pixels();
    let c = win.center_index();
    let sums = |d: DistanceKind| -> SmallVec<[f64; 9]> {
        px.iter()
            .map(|&a| {
                px.iter()
                    .enumerate()
                    .map(|(j, &b)| {
                        let w = if j == c { wc } else { 1.0 };
                        w * d.pair(a, b, mode)
                    })
                    .sum()
            })
            .collect()
    };
    match kind {
        DistanceKind::Directional { gamma, p } => {
            let a = sums(DistanceKind::Angular);
            let l = sums(DistanceKind::Minkowski { p });
            a.iter()
                .zip(l.iter())
                .map(|(&a, &l)| directional_blend(a, l, gamma))
                .collect()
        }
        _ => sums(kind),
    }
}

/// Center-weighted vector filter at smoothing level `k ∈ [1, C]`
/// (`C = (n+1)/2`). `k = 1` is the identity, `k = C` the plain
/// VMF/BVDF/DDF for the matching distance kind.
pub fn cwvf(win: &Window, k: usize, kind: DistanceKind, mode: AcosMode) -> Vec3 {
    let n = win.len();
    debug_assert!(k >= 1 && k <= n.div_ceil(2));
    let sums = weighted_cumulative(win, center_weight(n, k), kind, mode);
    win.get(argmin(&sums))
}

/// Modified CWVMF: the VMF output replaces the center only when
/// `l(x_VMF) < w·l(C)`.
pub fn mcwvmf(win: &Window, w: f64, p: f64) -> Vec3 {
    let kind = DistanceKind::Minkowski { p };
    let l = crate::image::cumulative_distances(win, kind, AcosMode::Reference);
    let best = argmin(&l);
    if l[best] < w * l[win.center_index()] {
        win.get(best)
    } else {
        win.center()
    }
}

/// Sum over `k = λ, λ+1, λ+2` of the distance between the CWVF output and
/// the center pixel.
pub fn acw_statistic(win: &Window, kind: DistanceKind, lambda: usize, mode: AcosMode) -> f64 {
    let c = win.center();
    (lambda..=lambda + 2)
        .map(|k| kind.pair(cwvf(win, k, kind, mode), c, mode))
        .sum()
}

/// Adaptive center-weighted vector filter. Replaces the center by the basic
/// filter of the same distance kind when [`acw_statistic`] exceeds `threshold`.
pub fn acwvf(win: &Window, kind: DistanceKind, lambda: usize, threshold: f64, mode: AcosMode) -> Vec3 {
    debug_assert!(lambda >= 1 && lambda + 2 <= win.len().div_ceil(2));
    if acw_statistic(win, kind, lambda, mode) > threshold {
        win.get(argmin_index(win, kind, mode))
    } else {
        win.center()
    }
}

/// Cumulative distance of the center pixel, used by the tests as an oracle
/// for the MCWVMF rule.
#[allow(dead_code)]
pub(crate) fn center_cumulative(win: &Window, p: f64) -> f64 {
    cumulative_distance(win.center(), win, DistanceKind::Minkowski { p }, AcosMode::Reference)
}
