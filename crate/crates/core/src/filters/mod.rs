//! The per-window filter implementations, grouped by family.
//!
//! Every function here maps one [`Window`](crate::image::Window) to one
//! output vector. Building a named filter with its default parameters is the
//! job of the [`registry`](crate::registry).

pub mod basic;
pub mod fuzzy;
pub mod hybrid;
pub mod misc;
pub mod switching;
pub mod weighted;

#[cfg(test)]
pub(crate) mod test_support {
    use rand::Rng;

    use crate::color_math::Vec3;
    use crate::image::Window;

    /// Eight pixels at 10 around a center at 250.
    pub fn impulse_window() -> Window {
        let mut px = vec![Vec3::splat(10.0); 9];
        px[4] = Vec3::splat(250.0);
        Window::new(px).unwrap()
    }

    pub fn random_window(rng: &mut impl Rng) -> Window {
        Window::new((0..9).map(|_| Vec3::from_rgb(rng.gen()))).unwrap()
    }
}
