//! Images, filtering windows, and the sliding-window driver.
//!
//! Borders are handled by replicate padding: coordinates outside the image
//! are clamped to the nearest valid one, so every pixel sees a full `w×w`
//! window. Filtering is non-recursive; each output pixel is computed from
//! the input image only.

use smallvec::SmallVec;

use crate::color_math::{directional_blend, AcosMode, DistanceKind, Vec3};
use crate::error::{Error, Result};

/// An 8-bit RGB image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::PixelCount {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<[u8; 3]> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Pixel at signed coordinates, clamped into the image.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> [u8; 3] {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn ensure_same_size(&self, other: &Image) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::DimensionMismatch {
                left: self.dimensions(),
                right: other.dimensions(),
            });
        }
        Ok(())
    }
}

/// How windows are completed at the image border. Only replication exists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BorderPolicy {
    #[default]
    Replicate,
}

/// A square `side×side` neighborhood in row-major order. The center element
/// (index `len()/2`) is the pixel being filtered.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    side: usize,
    pixels: SmallVec<[Vec3; 9]>,
}

impl Window {
    /// Builds a window from row-major pixels; `pixels.len()` must be the
    /// square of an odd side of at least 3.
    pub fn new(pixels: impl IntoIterator<Item = Vec3>) -> Result<Self> {
        let pixels: SmallVec<[Vec3; 9]> = pixels.into_iter().collect();
        let side = (pixels.len() as f64).sqrt().round() as usize;
        if side * side != pixels.len() || side < 3 || side.is_multiple_of(2) {
            return Err(Error::WindowSize(side));
        }
        Ok(Window { side, pixels })
    }

    /// A 3×3 window from nine pixels.
    pub fn from_rgb9(px: [[u8; 3]; 9]) -> Self {
        Window {
            side: 3,
            pixels: px.iter().map(|&p| Vec3::from_rgb(p)).collect(),
        }
    }

    fn with_side(side: usize) -> Self {
        Window {
            side,
            pixels: SmallVec::from_elem(Vec3::ZERO, side * side),
        }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of pixels `n`.
    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    /// Zero-based index of the center pixel.
    #[inline]
    pub fn center_index(&self) -> usize {
        self.pixels.len() / 2
    }

    #[inline]
    pub fn center(&self) -> Vec3 {
        self.pixels[self.center_index()]
    }

    #[inline]
    pub fn pixels(&self) -> &[Vec3] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, i: usize) -> Vec3 {
        self.pixels[i]
    }

    pub fn mean(&self) -> Vec3 {
        Vec3::mean(self.pixels.iter())
    }

    /// Applies `f` to every pixel.
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Window {
        Window {
            side: self.side,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    fn fill_from(&mut self, img: &Image, x: usize, y: usize) {
        let r = (self.side / 2) as isize;
        let (x, y) = (x as isize, y as isize);
        let mut k = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                self.pixels[k] = Vec3::from_rgb(img.get_clamped(x + dx, y + dy));
                k += 1;
            }
        }
    }
}

/// Extracts the `side×side` window centred on `(x, y)` with replicate padding.
///
/// # Panics
/// If `(x, y)` lies outside the image or `side` is not an odd number >= 3.
pub fn extract_window(img: &Image, x: usize, y: usize, side: usize) -> Window {
    assert!(
        x < img.width() && y < img.height(),
        "({x}, {y}) outside {}x{} image",
        img.width(),
        img.height()
    );
    assert!(side >= 3 && side % 2 == 1, "window side must be odd and >= 3");
    let mut win = Window::with_side(side);
    win.fill_from(img, x, y);
    win
}

/// Per-pixel cumulative distances for a window: `Σ_j dist(x_i, x_j)`.
pub type Cumulative = SmallVec<[f64; 9]>;

/// Cumulative distance of every window pixel to all window pixels.
///
/// Each pair is evaluated once. Because every distance here is bitwise
/// symmetric, entry `i` equals the plain left-to-right sum over `j`.
/// For the directional kind the angular and Minkowski sums are formed
/// separately and blended afterwards, not summed pairwise.
pub fn cumulative_distances(win: &Window, kind: DistanceKind, mode: AcosMode) -> Cumulative {
    match kind {
        DistanceKind::Directional { gamma, p } => {
            let angular = pairwise_sums(win, DistanceKind::Angular, mode);
            let magnitude = pairwise_sums(win, DistanceKind::Minkowski { p }, mode);
            angular
                .iter()
                .zip(magnitude.iter())
                .map(|(&a, &l)| directional_blend(a, l, gamma))
                .collect()
        }
        _ => pairwise_sums(win, kind, mode),
    }
}

/// Pairwise cumulative sums for a non-directional kind.
pub(crate) fn pairwise_sums(win: &Window, kind: DistanceKind, mode: AcosMode) -> Cumulative {
    let px = win.pixels();
    let n = px.len();
    let mut sums: Cumulative = SmallVec::from_elem(0.0, n);
    let acc = sums.as_mut_slice();
    match kind {
        DistanceKind::Angular => {
            // Norms are shared by all pairs a pixel takes part in.
            let norms: SmallVec<[f64; 9]> = px.iter().map(|p| p.norm_sq()).collect();
            let norms = norms.as_slice();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = if norms[i] == 0.0 || norms[j] == 0.0 {
                        0.0
                    } else {
                        let cos = px[i].dot(px[j]) / (norms[i] * norms[j]).sqrt();
                        mode.acos(cos.clamp(-1.0, 1.0)).max(0.0)
                    };
                    acc[i] += d;
                    acc[j] += d;
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = kind.pair(px[i], px[j], mode);
                    acc[i] += d;
                    acc[j] += d;
                }
            }
        }
    }
    sums
}

/// Cumulative distance of an arbitrary vector `v` to all window pixels.
///
/// For the directional kind returns `(Σ A)^γ · (Σ L_p)^(1−γ)`.
pub fn cumulative_distance(v: Vec3, win: &Window, kind: DistanceKind, mode: AcosMode) -> f64 {
    match kind {
        DistanceKind::Directional { gamma, p } => {
            let a = cumulative_distance(v, win, DistanceKind::Angular, mode);
            let l = cumulative_distance(v, win, DistanceKind::Minkowski { p }, mode);
            directional_blend(a, l, gamma)
        }
        _ => win.pixels().iter().map(|&x| kind.pair(v, x, mode)).sum(),
    }
}

/// Index of the smallest value; ties go to the lowest index.
#[inline]
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Indices ordered by ascending value; ties keep ascending index order.
pub fn rank_by(values: &[f64]) -> SmallVec<[usize; 9]> {
    let mut idx: SmallVec<[usize; 9]> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Window indices sorted by cumulative distance (the reduced ordering).
/// The first entry is the vector-median-style argmin.
pub fn rank_window(win: &Window, kind: DistanceKind, mode: AcosMode) -> SmallVec<[usize; 9]> {
    rank_by(&cumulative_distances(win, kind, mode))
}

/// Anything that maps a window to an output color.
pub trait WindowFilter: Send + Sync {
    fn filter(&self, win: &Window) -> Vec3;
}

impl<F> WindowFilter for F
where
    F: Fn(&Window) -> Vec3 + Send + Sync,
{
    fn filter(&self, win: &Window) -> Vec3 {
        self(win)
    }
}

fn check_side(side: usize) -> Result<()> {
    if side < 3 || side.is_multiple_of(2) {
        return Err(Error::WindowSize(side));
    }
    Ok(())
}

fn filter_row(img: &Image, f: &dyn WindowFilter, side: usize, y: usize, out: &mut [[u8; 3]]) {
    let mut win = Window::with_side(side);
    for (x, px) in out.iter_mut().enumerate() {
        win.fill_from(img, x, y);
        *px = f.filter(&win).to_rgb();
    }
}

/// Filters every pixel on the calling thread.
pub fn filter_image_sequential(img: &Image, f: &dyn WindowFilter, side: usize) -> Result<Image> {
    check_side(side)?;
    let mut out = vec![[0u8; 3]; img.len()];
    for (y, row) in out.chunks_mut(img.width()).enumerate() {
        filter_row(img, f, side, y, row);
    }
    Image::new(img.width(), img.height(), out)
}

/// Filters every pixel, row-parallel when the `parallel` feature is on.
/// Output is bit-identical to [`filter_image_sequential`].
#[cfg(feature = "parallel")]
pub fn filter_image(img: &Image, f: &dyn WindowFilter, side: usize) -> Result<Image> {
    use rayon::prelude::*;

    check_side(side)?;
    let mut out = vec![[0u8; 3]; img.len()];
    out.par_chunks_mut(img.width())
        .enumerate()
        .for_each(|(y, row)| filter_row(img, f, side, y, row));
    Image::new(img.width(), img.height(), out)
}

#[cfg(not(feature = "parallel"))]
pub fn filter_image(img: &Image, f: &dyn WindowFilter, side: usize) -> Result<Image> {
    filter_image_sequential(img, f, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ramp(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| [(x * 10) as u8, (y * 10) as u8, (x + y) as u8]).unwrap()
    }

    #[test]
    fn image_construction_errors() {
        assert!(matches!(
            Image::new(0, 3, vec![]),
            Err(Error::EmptyImage { .. })
        ));
        assert!(matches!(
            Image::new(2, 2, vec![[0; 3]; 3]),
            Err(Error::PixelCount { .. })
        ));
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(vec![Vec3::ZERO; 8]).is_err());
        assert!(Window::new(vec![Vec3::ZERO; 4]).is_err());
        assert!(Window::new(vec![Vec3::ZERO; 1]).is_err());
        let w = Window::new(vec![Vec3::ZERO; 25]).unwrap();
        assert_eq!((w.side(), w.center_index()), (5, 12));
    }

    #[test]
    fn single_pixel_image_replicates() {
        let img = Image::filled(1, 1, [9, 8, 7]).unwrap();
        let w = extract_window(&img, 0, 0, 3);
        assert!(w.pixels().iter().all(|&p| p == Vec3::new(9.0, 8.0, 7.0)));
    }

    #[test]
    fn interior_window_is_literal_neighborhood() {
        let img = ramp(5, 5);
        let w = extract_window(&img, 2, 2, 3);
        let mut k = 0;
        for y in 1..=3 {
            for x in 1..=3 {
                assert_eq!(w.get(k), Vec3::from_rgb(img.get(x, y)));
                k += 1;
            }
        }
        assert_eq!(w.center(), Vec3::from_rgb(img.get(2, 2)));
    }

    #[test]
    fn corner_window_clamps() {
        let img = ramp(5, 5);
        let w = extract_window(&img, 0, 0, 3);
        // Clamped coordinates enumerated by hand, row-major from (-1,-1).
        let coords = [
            (0, 0),
            (0, 0),
            (1, 0),
            (0, 0),
            (0, 0),
            (1, 0),
            (0, 1),
            (0, 1),
            (1, 1),
        ];
        for (k, &(x, y)) in coords.iter().enumerate() {
            assert_eq!(w.get(k), Vec3::from_rgb(img.get(x, y)));
        }
        let distinct: BTreeSet<_> = w.pixels().iter().map(|p| p.to_rgb()).collect();
        assert_eq!(distinct.len(), 4);
        // 5 of the 9 entries are duplicates created by clamping
        assert_eq!(9 - distinct.len(), 5);
    }

    #[test]
    fn cumulative_distance_examples() {
        let mut px = vec![Vec3::splat(10.0); 9];
        px[4] = Vec3::splat(250.0);
        let win = Window::new(px).unwrap();
        let l = cumulative_distance(Vec3::splat(250.0), &win, DistanceKind::L2, AcosMode::Reference);
        assert!((l - 8.0 * 240.0 * 3f64.sqrt()).abs() < 1e-9);
        assert!((l - 3325.54).abs() < 0.01);

        let flat = Window::new(vec![Vec3::splat(77.0); 9]).unwrap();
        assert_eq!(
            cumulative_distance(Vec3::splat(77.0), &flat, DistanceKind::L2, AcosMode::Reference),
            0.0
        );
        let dir = DistanceKind::Directional { gamma: 0.5, p: 2.0 };
        assert_eq!(
            cumulative_distance(Vec3::splat(250.0), &win, dir, AcosMode::Approximate),
            0.0
        );
    }

    #[test]
    fn rank_window_examples() {
        let flat = Window::new(vec![Vec3::splat(3.0); 9]).unwrap();
        assert_eq!(
            rank_window(&flat, DistanceKind::L2, AcosMode::Reference).to_vec(),
            (0..9).collect::<Vec<_>>()
        );
        let mut px = vec![Vec3::splat(10.0); 9];
        px[4] = Vec3::splat(250.0);
        let win = Window::new(px).unwrap();
        let r = rank_window(&win, DistanceKind::L2, AcosMode::Reference);
        assert_eq!(r[8], 4);
        assert_eq!(&r[..8], &[0, 1, 2, 3, 5, 6, 7, 8]);
    }

    #[test]
    fn pairwise_sums_equal_plain_sums() {
        let img = ramp(7, 7);
        let win = extract_window(&img, 3, 3, 5);
        for kind in [
            DistanceKind::L2,
            DistanceKind::Minkowski { p: 1.0 },
            DistanceKind::Angular,
        ] {
            let fast = cumulative_distances(&win, kind, AcosMode::Approximate);
            for (i, &c) in fast.iter().enumerate() {
                let plain: f64 = win
                    .pixels()
                    .iter()
                    .map(|&x| kind.pair(win.get(i), x, AcosMode::Approximate))
                    .sum();
                assert_eq!(c, plain);
            }
        }
    }

    #[test]
    fn identity_filter_round_trips() {
        let img = ramp(13, 9);
        let out = filter_image(&img, &|w: &Window| w.center(), 3).unwrap();
        assert_eq!(out, img);
        assert!(matches!(
            filter_image(&img, &|w: &Window| w.center(), 4),
            Err(Error::WindowSize(4))
        ));
    }

    #[test]
    fn parallel_matches_sequential() {
        let img = ramp(21, 17);
        let f = |w: &Window| w.mean();
        assert_eq!(
            filter_image(&img, &f, 5).unwrap(),
            filter_image_sequential(&img, &f, 5).unwrap()
        );
    }
}
