//! Switching filters driven by local statistics: entropy, peer group and
//! vector sigma filters.

use smallvec::SmallVec;

use crate::color_math::{directional_blend, AcosMode, DistanceKind, Vec3};
use crate::filters::basic::argmin_index;
use crate::image::{argmin, cumulative_distance, cumulative_distances, Window};

/// Statistics below this are treated as zero by the switching rules.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Local contrast probabilities `P_i` and entropy fractions `T_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyState {
    pub p: SmallVec<[f64; 9]>,
    pub t: SmallVec<[f64; 9]>,
}

impl EntropyState {
    /// `None` for a flat window, where every deviation from the mean is 0.
    pub fn new(win: &Window, kind: DistanceKind, mode: AcosMode) -> Option<Self> {
        let mean = win.mean();
        let dev: SmallVec<[f64; 9]> = win.pixels().iter().map(|&x| kind.pair(x, mean, mode)).collect();
        let total: f64 = dev.iter().sum();
        if total < DEGENERATE_EPS {
            return None;
        }
        let p: SmallVec<[f64; 9]> = dev.iter().map(|d| d / total).collect();
        let h: SmallVec<[f64; 9]> = p
            .iter()
            .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
            .collect();
        let h_total: f64 = h.iter().sum();
        let t = if h_total > 0.0 {
            h.iter().map(|h| h / h_total).collect()
        } else {
            SmallVec::from_elem(0.0, p.len())
        };
        Some(EntropyState { p, t })
    }
}

/// Entropy vector filter (EVMF, EBVDF, EDDF by distance kind).
pub fn entropy_vf(win: &Window, kind: DistanceKind, mode: AcosMode) -> Vec3 {
    let Some(state) = EntropyState::new(win, kind, mode) else {
        return win.center();
    };
    let c = win.center_index();
    if state.p[c] > state.t[c] {
        win.get(argmin_index(win, kind, mode))
    } else {
        win.center()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeerGroupParams {
    pub t: f64,
    /// `None` selects the filter's own default.
    pub m: Option<usize>,
    pub p: f64,
}

impl Default for PeerGroupParams {
    fn default() -> Self {
        PeerGroupParams {
            t: 45.0,
            m: None,
            p: 2.0,
        }
    }
}

/// PGF gap count `m = (√n + 1) / 2`.
pub fn pgf_default_m(side: usize) -> usize {
    side.div_ceil(2)
}

pub const FPGF_DEFAULT_M: usize = 3;

/// Peer group filter: flags the center when one of the first `m` gaps of the
/// sorted distances to the center exceeds `t`.
pub fn pgf(win: &Window, t: f64, m: usize, p: f64) -> Vec3 {
    let kind = DistanceKind::Minkowski { p };
    let xc = win.center();
    let mut c: SmallVec<[f64; 9]> = win
        .pixels()
        .iter()
        .map(|&x| kind.pair(xc, x, AcosMode::Reference))
        .collect();
    c.sort_by(f64::total_cmp);
    let m = m.min(c.len() - 1);
    if c.windows(2).take(m).any(|w| w[1] - w[0] > t) {
        win.get(argmin_index(win, kind, AcosMode::Reference))
    } else {
        xc
    }
}

/// Fast peer group filter: keeps the center once `m` neighbors lie within `t`.
pub fn fpgf(win: &Window, t: f64, m: usize, p: f64) -> Vec3 {
    let kind = DistanceKind::Minkowski { p };
    let xc = win.center();
    let c = win.center_index();
    let mut found = 0;
    for (i, &x) in win.pixels().iter().enumerate() {
        if i != c && kind.pair(xc, x, AcosMode::Reference) <= t {
            found += 1;
            if found >= m {
                return xc;
            }
        }
    }
    win.get(argmin_index(win, kind, AcosMode::Reference))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaReference {
    Mean,
    Rank,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaParams {
    pub lambda: f64,
    pub reference: SigmaReference,
    pub adaptive: bool,
}

impl SigmaParams {
    pub fn new(reference: SigmaReference, adaptive: bool) -> Self {
        SigmaParams {
            lambda: 4.0,
            reference,
            adaptive,
        }
    }
}

/// `σ` for the adaptive rules: root of the mean squared distance to `r`.
/// Directional kinds combine the angular and magnitude means with `γ`.
pub fn sigma_estimate(win: &Window, r: Vec3, kind: DistanceKind, divisor: f64, mode: AcosMode) -> f64 {
    let mean_sq = |d: DistanceKind| -> f64 {
        win.pixels()
            .iter()
            .map(|&x| {
                let v = d.pair(x, r, mode);
                v * v
            })
            .sum::<f64>()
            / divisor
    };
    let var = match kind {
        DistanceKind::Directional { gamma, p } => {
            directional_blend(mean_sq(DistanceKind::Angular), mean_sq(DistanceKind::Minkowski { p }), gamma)
        }
        _ => mean_sq(kind),
    };
    var.sqrt()
}

/// Vector sigma filter. The four variants (mean/rank reference, fixed or
/// adaptive threshold) combine with the distance kind to give the twelve
/// sigma filters.
pub fn sigma_vf(win: &Window, kind: DistanceKind, params: SigmaParams, mode: AcosMode) -> Vec3 {
    let n = win.len() as f64;
    let cum = cumulative_distances(win, kind, mode);
    let best = argmin(&cum);
    let c = win.center_index();
    let noisy = match (params.adaptive, params.reference) {
        (false, SigmaReference::Mean) => {
            let rhs = cumulative_distance(win.mean(), win, kind, mode);
            rhs >= DEGENERATE_EPS && cum[c] >= (1.0 + params.lambda / n) * rhs
        }
        (false, SigmaReference::Rank) => {
            let rhs = cum[best];
            rhs >= DEGENERATE_EPS && cum[c] >= (1.0 + params.lambda / (n - 1.0)) * rhs
        }
        (true, reference) => {
            let (r, divisor) = match reference {
                SigmaReference::Mean => (win.mean(), n),
                SigmaReference::Rank => (win.get(best), n - 1.0),
            };
            let sigma = sigma_estimate(win, r, kind, divisor, mode);
            sigma >= DEGENERATE_EPS && kind.pair(win.center(), r, mode) >= sigma
        }
    };
    if noisy {
        win.get(best)
    } else {
        win.center()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::basic::{bvdf, ddf, vmf};
    use crate::filters::test_support::{impulse_window, random_window};
    use rand::{Rng, SeedableRng};

    const DDF: DistanceKind = DistanceKind::Directional { gamma: 0.5, p: 2.0 };
    const KINDS: [DistanceKind; 3] = [DistanceKind::L2, DistanceKind::Angular, DDF];
    const M: AcosMode = AcosMode::Approximate;

    fn sigma_variants() -> impl Iterator<Item = SigmaParams> {
        [SigmaReference::Mean, SigmaReference::Rank]
            .into_iter()
            .flat_map(|r| [false, true].map(|a| SigmaParams::new(r, a)))
    }

    fn basic(win: &Window, kind: DistanceKind) -> Vec3 {
        match kind {
            DistanceKind::Angular => bvdf(win, M),
            DistanceKind::Directional { gamma, p } => ddf(win, gamma, p, M),
            DistanceKind::Minkowski { p } => vmf(win, p),
        }
    }

    #[test]
    fn constant_window_identity() {
        let w = Window::new(vec![Vec3::new(7.0, 8.0, 9.0); 9]).unwrap();
        for kind in KINDS {
            assert_eq!(entropy_vf(&w, kind, M), w.center());
            for s in sigma_variants() {
                assert_eq!(sigma_vf(&w, kind, s, M), w.center());
            }
        }
        assert_eq!(pgf(&w, 45.0, 2, 2.0), w.center());
        assert_eq!(fpgf(&w, 45.0, 3, 2.0), w.center());
    }

    #[test]
    fn entropy_impulse_values() {
        let w = impulse_window();
        let s = EntropyState::new(&w, DistanceKind::L2, M).unwrap();
        assert!((s.p[4] - 0.5).abs() < 1e-12);
        assert!((s.t[4] - 0.2).abs() < 1e-12);
        assert!((s.t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(entropy_vf(&w, DistanceKind::L2, M), Vec3::splat(10.0));
    }

    #[test]
    fn entropy_oracle_on_random_windows() {
        // Direct evaluation with log2 instead of ln: T_i is base-independent.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..300 {
            let w = random_window(&mut rng);
            for kind in KINDS {
                let mean = w.mean();
                let d: Vec<f64> = w.pixels().iter().map(|&x| kind.pair(x, mean, M)).collect();
                let sum: f64 = d.iter().sum();
                let p: Vec<f64> = d.iter().map(|v| v / sum).collect();
                let h: Vec<f64> = p.iter().map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 }).collect();
                let tc = h[4] / h.iter().sum::<f64>();
                if (p[4] - tc).abs() < 1e-9 {
                    continue;
                }
                let want = if p[4] > tc { basic(&w, kind) } else { w.center() };
                assert_eq!(entropy_vf(&w, kind, M), want);
            }
        }
    }

    #[test]
    fn entropy_balanced_two_population() {
        let a = Vec3::new(60.0, 80.0, 100.0);
        let b = Vec3::new(90.0, 70.0, 40.0);
        let w = Window::new(vec![a, b, a, b, a, b, a, b, a]).unwrap();
        // Deviations from the mean: 4/9·‖a−b‖ for a's, 5/9·‖a−b‖ for b's.
        let s = EntropyState::new(&w, DistanceKind::L2, M).unwrap();
        assert!((s.p[4] - 4.0 / 40.0).abs() < 1e-12);
        assert!(s.p[4] <= s.t[4]);
        assert_eq!(entropy_vf(&w, DistanceKind::L2, M), a);
    }

    #[test]
    fn ebvdf_decision_scale_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let w = random_window(&mut rng);
            let k = DistanceKind::Angular;
            let base = entropy_vf(&w, k, AcosMode::Reference) == w.center();
            let scaled = w.map(|x| x * 2.0);
            assert_eq!(entropy_vf(&scaled, k, AcosMode::Reference) == scaled.center(), base);
        }
    }

    #[test]
    fn pgf_examples() {
        assert_eq!(pgf_default_m(3), 2);
        let w = impulse_window();
        assert_eq!(pgf(&w, 45.0, 2, 2.0), Vec3::splat(10.0));
        // Smooth gradient: distances to the center grow in steps of 10√3 < 45.
        let w = Window::new((0..9).map(|i| Vec3::splat(100.0 + 10.0 * i as f64))).unwrap();
        assert_eq!(pgf(&w, 45.0, 2, 2.0), w.center());
    }

    #[test]
    fn pgf_gap_beyond_m_is_ignored() {
        let c = Vec3::splat(100.0);
        let near = Vec3::splat(110.0);
        let far = Vec3::splat(200.0);
        // Sorted distances: 0, 10√3, 10√3, 100√3, ... First gaps are small.
        let w = Window::new(vec![near, far, far, far, c, near, far, far, far]).unwrap();
        assert_eq!(pgf(&w, 45.0, 2, 2.0), c);
        assert_eq!(pgf(&w, 45.0, 3, 2.0), vmf(&w, 2.0));
    }

    #[test]
    fn fpgf_examples() {
        let w = impulse_window();
        assert_eq!(fpgf(&w, 45.0, 3, 2.0), Vec3::splat(10.0));
        let c = Vec3::splat(100.0);
        let near = Vec3::splat(120.0);
        let far = Vec3::splat(200.0);
        // Exactly m−1 = 2 neighbors within T.
        let w = Window::new(vec![near, far, far, far, c, near, far, far, far]).unwrap();
        assert_eq!(fpgf(&w, 45.0, 3, 2.0), vmf(&w, 2.0));
        assert_ne!(vmf(&w, 2.0), c);
        let w = Window::new(vec![near, far, near, far, c, near, far, far, far]).unwrap();
        assert_eq!(fpgf(&w, 45.0, 3, 2.0), c);
    }

    #[test]
    fn fpgf_matches_full_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..2000 {
            // Clustered windows so both branches occur.
            let base: [f64; 3] = [rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0)];
            let w = Window::new((0..9).map(|_| {
                Vec3(base.map(|b| (b + rng.gen_range(0.0..60.0)).round()))
            }))
            .unwrap();
            let xc = w.center();
            for m in 1..=5 {
                let count = w
                    .pixels()
                    .iter()
                    .enumerate()
                    .filter(|&(i, &x)| i != 4 && (x - xc).norm() <= 45.0)
                    .count();
                let want = if count >= m { xc } else { vmf(&w, 2.0) };
                assert_eq!(fpgf(&w, 45.0, m, 2.0), want);
            }
        }
    }

    #[test]
    fn sigma_impulse() {
        let w = impulse_window();
        let bg = Vec3::splat(10.0);
        for s in sigma_variants() {
            assert_eq!(sigma_vf(&w, DistanceKind::L2, s, M), bg, "{s:?}");
        }
        let l = cumulative_distances(&w, DistanceKind::L2, M);
        assert!((l[4] - 3325.5).abs() < 0.1);
        assert!((l[0] * 1.5 - 623.5).abs() < 0.1);
    }

    #[test]
    fn asvmf_mean_direct_arithmetic() {
        let w = impulse_window();
        // mean = 36.67·(1,1,1); deviations 213.33√3 (center), 26.67√3 (others).
        let d_c = (250.0 - 330.0 / 9.0) * 3f64.sqrt();
        let d_o = (330.0 / 9.0 - 10.0) * 3f64.sqrt();
        let sigma = ((d_c * d_c + 8.0 * d_o * d_o) / 9.0).sqrt();
        let est = sigma_estimate(&w, w.mean(), DistanceKind::L2, 9.0, M);
        assert!((est - sigma).abs() < 1e-9);
        assert!(d_c >= sigma);
    }

    #[test]
    fn sigma_relabel_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        for _ in 0..200 {
            let w = random_window(&mut rng);
            let mut px: Vec<Vec3> = w.pixels().to_vec();
            px.swap(0, 8);
            px.swap(1, 6);
            let r = Window::new(px).unwrap();
            for kind in KINDS {
                for reference in [SigmaReference::Mean, SigmaReference::Rank] {
                    let s = SigmaParams::new(reference, false);
                    let a = sigma_vf(&w, kind, s, AcosMode::Reference) == w.center();
                    let b = sigma_vf(&r, kind, s, AcosMode::Reference) == r.center();
                    // Summation order changes, so skip near-threshold cases.
                    let cum = cumulative_distances(&w, kind, AcosMode::Reference);
                    let n = 9.0;
                    let rhs = match reference {
                        SigmaReference::Mean => {
                            cumulative_distance(w.mean(), &w, kind, AcosMode::Reference) * (1.0 + 4.0 / n)
                        }
                        SigmaReference::Rank => cum[argmin(&cum)] * (1.0 + 4.0 / (n - 1.0)),
                    };
                    if (cum[4] - rhs).abs() > 1e-6 * rhs {
                        assert_eq!(a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn switching_membership() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(45);
        for _ in 0..500 {
            let w = random_window(&mut rng);
            for kind in KINDS {
                let alt = basic(&w, kind);
                let ok = |v: Vec3| v == w.center() || v == alt;
                assert!(ok(entropy_vf(&w, kind, M)));
                for s in sigma_variants() {
                    assert!(ok(sigma_vf(&w, kind, s, M)));
                }
            }
            let alt = vmf(&w, 2.0);
            for out in [pgf(&w, 45.0, 2, 2.0), fpgf(&w, 45.0, 3, 2.0)] {
                assert!(out == w.center() || out == alt);
            }
        }
    }
}
