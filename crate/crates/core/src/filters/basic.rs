//! Basic order-statistics vector filters: VMF, ATVMF, BVDF, GVDF, DDF, CBRF.

use crate::color_math::{cbrf_similarity, AcosMode, DistanceKind, Vec3};
use crate::image::{argmin, cumulative_distances, rank_by, Window};

/// Parameters of the basic family. Window-size dependent defaults come from
/// [`BasicParams::for_window`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasicParams {
    pub alpha_trim: usize,
    pub gamma_ddf: f64,
    pub k_gvdf: usize,
    pub p: f64,
}

impl BasicParams {
    pub fn for_window(n: usize) -> Self {
        BasicParams {
            alpha_trim: n / 2,
            gamma_ddf: 0.5,
            k_gvdf: n.div_ceil(2),
            p: 2.0,
        }
    }
}

/// Index of the vector median under `kind`.
pub fn argmin_index(win: &Window, kind: DistanceKind, mode: AcosMode) -> usize {
    argmin(&cumulative_distances(win, kind, mode))
}

/// Mean of the `k` lowest-ranked pixels under `kind`.
pub fn low_rank_mean(win: &Window, kind: DistanceKind, k: usize, mode: AcosMode) -> Vec3 {
    let order = rank_by(&cumulative_distances(win, kind, mode));
    let k = k.clamp(1, win.len());
    Vec3::mean(order[..k].iter().map(|&i| &win.pixels()[i]))
}

/// Vector median: the pixel with the smallest cumulative `L_p` distance.
pub fn vmf(win: &Window, p: f64) -> Vec3 {
    win.get(argmin_index(win, DistanceKind::Minkowski { p }, AcosMode::Reference))
}

/// Mean of the `1 + alpha` lowest-ranked pixels.
pub fn atvmf(win: &Window, alpha: usize, p: f64) -> Vec3 {
    debug_assert!(alpha < win.len());
    low_rank_mean(win, DistanceKind::Minkowski { p }, alpha + 1, AcosMode::Reference)
}

/// Basic vector directional filter: smallest cumulative angle.
pub fn bvdf(win: &Window, mode: AcosMode) -> Vec3 {
    win.get(argmin_index(win, DistanceKind::Angular, mode))
}

/// Generalized vector directional filter.
///
/// Keeps the `k` pixels with the smallest cumulative angles and passes them
/// through an arithmetic mean.
pub fn gvdf(win: &Window, k: usize, mode: AcosMode) -> Vec3 {
    low_rank_mean(win, DistanceKind::Angular, k, mode)
}

/// Directional distance filter: minimizes `a(i)^γ · l(i)^(1−γ)`.
pub fn ddf(win: &Window, gamma: f64, p: f64, mode: AcosMode) -> Vec3 {
    win.get(argmin_index(win, DistanceKind::Directional { gamma, p }, mode))
}

/// Content-based rank filter.
pub fn cbrf(win: &Window) -> Vec3 {
    let px = win.pixels();
    let sums: smallvec::SmallVec<[f64; 9]> = px
        .iter()
        .map(|&a| px.iter().map(|&b| cbrf_similarity(a, b)).sum())
        .collect();
    win.get(argmin(&sums))
}
