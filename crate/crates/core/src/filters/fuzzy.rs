//! Adaptive fuzzy vector filters: weighted averages whose weights are fuzzy
//! transformations of cumulative distances (FVMF, FVDF, ANNF, ANNMF) and the
//! ordered variants that keep only the strongest weights (FOVMF, FOVDF).

use smallvec::SmallVec;

use crate::color_math::{composite_distance, AcosMode, DistanceKind, Vec3};
use crate::image::{cumulative_distances, Cumulative, Window};

/// Membership function turning cumulative distances into weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FuzzyWeightKind {
    /// `w_i = exp(−l(i)^γ / β)` over cumulative `L_p` distances.
    Exponential { gamma: f64, beta: f64, p: f64 },
    /// `w_i = β / (1 + exp(a(i)))^γ` over cumulative angles.
    Sigmoidal { gamma: f64, beta: f64 },
    /// `w_i = (D_max − D_i) / (D_max − D_min)` for the chosen distance.
    NearestNeighbor(DistanceKind),
    /// Nearest-neighbor rule over the composite distance.
    CompositeNearestNeighbor,
}

impl FuzzyWeightKind {
    pub const fn exponential() -> Self {
        FuzzyWeightKind::Exponential {
            gamma: 0.5,
            beta: 1.0,
            p: 2.0,
        }
    }

    pub const fn sigmoidal() -> Self {
        FuzzyWeightKind::Sigmoidal {
            gamma: 1.0,
            beta: 2.0,
        }
    }
}

/// Fuzzy weights with their normalized copy.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyWeights {
    pub raw: SmallVec<[f64; 9]>,
    pub normalized: SmallVec<[f64; 9]>,
}

impl FuzzyWeights {
    /// Normalizes `raw`; an all-zero (or non-finite) sum yields uniform weights.
    pub fn from_raw(raw: SmallVec<[f64; 9]>) -> Self {
        let sum: f64 = raw.iter().sum();
        let normalized = if sum > 0.0 && sum.is_finite() {
            raw.iter().map(|w| w / sum).collect()
        } else {
            let n = raw.len() as f64;
            raw.iter().map(|_| 1.0 / n).collect()
        };
        FuzzyWeights { raw, normalized }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Nearest-neighbor weights `(D_max − D_i) / (D_max − D_min)`; uniform when
/// all distances coincide.
fn nearest_neighbor(d: &[f64]) -> SmallVec<[f64; 9]> {
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    if span <= 0.0 {
        return d.iter().map(|_| 1.0).collect();
    }
    d.iter().map(|&v| (max - v) / span).collect()
}

/// Computes the fuzzy weights of every window pixel.
///
/// Exponential weights are shifted by the smallest `l(i)^γ` before
/// exponentiation: the ratios between weights, and therefore every output,
/// are unchanged while underflow on large distance sums is avoided.
pub fn fuzzy_weights(win: &Window, kind: FuzzyWeightKind, mode: AcosMode) -> FuzzyWeights {
    let raw = match kind {
        FuzzyWeightKind::Exponential { gamma, beta, p } => {
            let l = cumulative_distances(win, DistanceKind::Minkowski { p }, mode);
            exponential_weights(&l, gamma, beta)
        }
        FuzzyWeightKind::Sigmoidal { gamma, beta } => {
            let a = cumulative_distances(win, DistanceKind::Angular, mode);
            a.iter()
                .map(|&ai| beta / (1.0 + ai.exp()).powf(gamma))
                .collect()
        }
        FuzzyWeightKind::NearestNeighbor(d) => nearest_neighbor(&cumulative_distances(win, d, mode)),
        FuzzyWeightKind::CompositeNearestNeighbor => {
            let px = win.pixels();
            let d: Cumulative = px
                .iter()
                .map(|&a| px.iter().map(|&b| composite_distance(a, b)).sum())
                .collect();
            nearest_neighbor(&d)
        }
    };
    FuzzyWeights::from_raw(raw)
}

pub(crate) fn exponential_weights(l: &[f64], gamma: f64, beta: f64) -> SmallVec<[f64; 9]> {
    let powered: SmallVec<[f64; 9]> = l.iter().map(|&v| v.powf(gamma)).collect();
    let min = powered.iter().copied().fold(f64::INFINITY, f64::min);
    powered.iter().map(|&v| (-(v - min) / beta).exp()).collect()
}

/// `Σ w_i x_i / Σ w_i` over the listed pixels.
///
/// Accumulates offsets from the first pixel, so equal pixels come back
/// exactly.
pub(crate) fn weighted_mean(px: &[Vec3], weights: &[f64]) -> Vec3 {
    let origin = px[0];
    let mut acc = Vec3::ZERO;
    let mut total = 0.0;
    for (&x, &w) in px.iter().zip(weights) {
        acc += (x - origin) * w;
        total += w;
    }
    if total > 0.0 && total.is_finite() {
        origin + acc / total
    } else {
        Vec3::mean(px.iter())
    }
}

/// Fuzzy weighted average filter.
///
/// Exponential weights give FVMF, sigmoidal FVDF, angular nearest-neighbor
/// ANNF, composite nearest-neighbor ANNMF.
pub fn fwaf(win: &Window, kind: FuzzyWeightKind, mode: AcosMode) -> Vec3 {
    let w = fuzzy_weights(win, kind, mode);
    weighted_mean(win.pixels(), &w.normalized)
}

/// Number of pixels FOVF keeps: those whose normalized weight exceeds `1/n`,
/// at least one.
pub fn fovf_count(weights: &FuzzyWeights) -> usize {
    let threshold = 1.0 / weights.len() as f64;
    weights
        .normalized
        .iter()
        .filter(|&&w| w > threshold)
        .count()
        .max(1)
}

/// Fuzzy ordered vector filter: weighted average of the `k` pixels with the
/// largest weights, `k` chosen adaptively by [`fovf_count`]. Weight ties are
/// broken towards the lower window index.
pub fn fovf(win: &Window, kind: FuzzyWeightKind, mode: AcosMode) -> Vec3 {
    let w = fuzzy_weights(win, kind, mode);
    let k = fovf_count(&w);
    fovf_top_k(win, &w, k)
}

/// Weighted average over the `k` largest-weight pixels.
pub fn fovf_top_k(win: &Window, w: &FuzzyWeights, k: usize) -> Vec3 {
    let mut order: SmallVec<[usize; 9]> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w.normalized[b].total_cmp(&w.normalized[a]));
    let chosen = &order[..k.clamp(1, w.len())];
    let px: SmallVec<[Vec3; 9]> = chosen.iter().map(|&i| win.get(i)).collect();
    let ws: SmallVec<[f64; 9]> = chosen.iter().map(|&i| w.normalized[i]).collect();
    weighted_mean(&px, &ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::test_support::{impulse_window, random_window};
    use rand::SeedableRng;

    const ALL_KINDS: [FuzzyWeightKind; 5] = [
        FuzzyWeightKind::exponential(),
        FuzzyWeightKind::sigmoidal(),
        FuzzyWeightKind::NearestNeighbor(DistanceKind::Angular),
        FuzzyWeightKind::NearestNeighbor(DistanceKind::L2),
        FuzzyWeightKind::CompositeNearestNeighbor,
    ];

    #[test]
    fn constant_window_weights() {
        let win = Window::new(vec![Vec3::new(5.0, 6.0, 7.0); 9]).unwrap();
        let e = fuzzy_weights(&win, FuzzyWeightKind::exponential(), AcosMode::Reference);
        assert!(e.raw.iter().all(|&w| w == 1.0));
        let nn = fuzzy_weights(
            &win,
            FuzzyWeightKind::NearestNeighbor(DistanceKind::Angular),
            AcosMode::Reference,
        );
        assert!(nn.normalized.iter().all(|&w| (w - 1.0 / 9.0).abs() < 1e-15));
        for kind in ALL_KINDS {
            assert_eq!(fwaf(&win, kind, AcosMode::Approximate).to_rgb(), [5, 6, 7]);
        }
        for kind in [FuzzyWeightKind::exponential(), FuzzyWeightKind::sigmoidal()] {
            assert_eq!(fovf(&win, kind, AcosMode::Approximate), win.center());
        }
    }

    #[test]
    fn impulse_gets_zero_nn_weight() {
        let win = impulse_window();
        let w = fuzzy_weights(
            &win,
            FuzzyWeightKind::NearestNeighbor(DistanceKind::L2),
            AcosMode::Reference,
        );
        for (i, &wi) in w.raw.iter().enumerate() {
            assert_eq!(wi, if i == 4 { 0.0 } else { 1.0 });
        }
        assert_eq!(
            fwaf(
                &win,
                FuzzyWeightKind::NearestNeighbor(DistanceKind::L2),
                AcosMode::Reference
            ),
            Vec3::splat(10.0)
        );
        assert_eq!(
            fovf(&win, FuzzyWeightKind::exponential(), AcosMode::Reference),
            Vec3::splat(10.0)
        );
    }

    #[test]
    fn dominant_weight_with_k_one() {
        let mut px = vec![Vec3::splat(200.0); 9];
        for (i, p) in px.iter_mut().enumerate() {
            p.0[0] = 20.0 * i as f64;
        }
        let win = Window::new(px).unwrap();
        let raw = (0..9).map(|i| if i == 6 { 5.0 } else { 0.1 }).collect();
        let w = FuzzyWeights::from_raw(raw);
        assert_eq!(fovf_count(&w), 1);
        assert_eq!(fovf_top_k(&win, &w, 1), win.get(6));
    }

    #[test]
    fn fwaf_matches_direct_evaluation() {
        // Independent re-evaluation: raw weights straight from the formulas,
        // no stabilization, accumulation in a different order.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let win = random_window(&mut rng);
            let px = win.pixels();
            let l: Vec<f64> = px
                .iter()
                .map(|&a| px.iter().map(|&b| (a - b).norm()).sum())
                .collect();
            let a: Vec<f64> = px
                .iter()
                .map(|&u| {
                    px.iter()
                        .map(|&v| {
                            let c = u.dot(v) / (u.norm() * v.norm());
                            c.clamp(-1.0, 1.0).acos()
                        })
                        .sum()
                })
                .collect();
            let check = |weights: Vec<f64>, kind: FuzzyWeightKind| {
                let total: f64 = weights.iter().rev().sum();
                let mut expect = [0.0f64; 3];
                for (x, w) in px.iter().zip(&weights).rev() {
                    for c in 0..3 {
                        expect[c] += w * x.0[c] / total;
                    }
                }
                let got = fwaf(&win, kind, AcosMode::Reference);
                for c in 0..3 {
                    // acos is ill-conditioned near 1, so the two angle sums differ in the 8th digit
                    assert!((got.0[c] - expect[c]).abs() < 1e-6, "{kind:?} {} {}", got.0[c], expect[c]);
                }
            };
            // Raw exp(−l^0.5) stays representable for l <= a few thousand.
            check(
                l.iter().map(|v| (-v.sqrt()).exp()).collect(),
                FuzzyWeightKind::exponential(),
            );
            check(
                a.iter().map(|v| 2.0 / (1.0 + v.exp())).collect(),
                FuzzyWeightKind::sigmoidal(),
            );
            let (amin, amax) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            check(
                a.iter().map(|v| (amax - v) / (amax - amin)).collect(),
                FuzzyWeightKind::NearestNeighbor(DistanceKind::Angular),
            );
        }
    }

    #[test]
    fn stabilized_exponential_agrees_with_naive_on_small_distances() {
        // Windows with cumulative distances <= 50, where exp(−l^γ) is safe.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        use rand::Rng;
        for _ in 0..300 {
            let base: [u8; 3] = [rng.gen_range(10..240), rng.gen_range(10..240), rng.gen_range(10..240)];
            let px: Vec<Vec3> = (0..9)
                .map(|_| {
                    Vec3::from_rgb(base.map(|c| (c as i32 + rng.gen_range(-2..=2)) as u8))
                })
                .collect();
            let win = Window::new(px).unwrap();
            let l = cumulative_distances(&win, DistanceKind::L2, AcosMode::Reference);
            assert!(l.iter().all(|&v| v <= 50.0));
            let naive: Vec<f64> = l.iter().map(|&v| (-v.powf(0.5) / 1.0).exp()).collect();
            let total: f64 = naive.iter().sum();
            let mut expect = Vec3::ZERO;
            for (x, w) in win.pixels().iter().zip(&naive) {
                expect += *x * (w / total);
            }
            let got = fwaf(&win, FuzzyWeightKind::exponential(), AcosMode::Reference);
            for c in 0..3 {
                assert!((got.0[c] - expect.0[c]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn outputs_in_convex_hull_and_weights_normalized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let win = random_window(&mut rng);
            for kind in ALL_KINDS {
                let w = fuzzy_weights(&win, kind, AcosMode::Approximate);
                let s: f64 = w.normalized.iter().sum();
                assert!((s - 1.0).abs() <= 1e-12);
                for out in [fwaf(&win, kind, AcosMode::Approximate), fovf(&win, kind, AcosMode::Approximate)] {
                    for c in 0..3 {
                        let lo = win.pixels().iter().map(|p| p.0[c]).fold(f64::INFINITY, f64::min);
                        let hi = win.pixels().iter().map(|p| p.0[c]).fold(f64::NEG_INFINITY, f64::max);
                        assert!(out.0[c] >= lo - 1e-9 && out.0[c] <= hi + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn fovf_with_all_pixels_is_fwaf() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let win = random_window(&mut rng);
            for kind in [FuzzyWeightKind::exponential(), FuzzyWeightKind::sigmoidal()] {
                let w = fuzzy_weights(&win, kind, AcosMode::Approximate);
                let full = fovf_top_k(&win, &w, 9);
                let avg = fwaf(&win, kind, AcosMode::Approximate);
                for c in 0..3 {
                    assert!((full.0[c] - avg.0[c]).abs() < 1e-9);
                }
            }
        }
    }
}
