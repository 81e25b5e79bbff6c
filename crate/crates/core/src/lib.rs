//! Numerical laboratory for Riemannian cones and asymptotically conical
//! manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: real spherical harmonics, quadrature grids and fields on S².
//! * [`link`]: the cross-section `(L, g_L)`: area, Ricci bounds, Laplace
//!   spectra, isoperimetric profiles.
//! * [`cone`]: cone metrics `dr² + r² g_L` and their asymptotically conical
//!   perturbations, curvature, slice geometry, volumes and decay norms.
//! * [`cmc`]: radial graphs, their mean curvature, the Newton solver for
//!   constant mean curvature leaves, the foliation and Jacobi spectra.
//! * [`iso`]: isoperimetric ratio, cone angle, Willmore-type functionals and
//!   the profile comparison on the link.
//!
//! Everything is a pure function of immutable inputs; all types are `Send + Sync`.

// `!(x > 0.0)` is used on purpose so NaN is rejected; tensor code indexes.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cmc;
pub mod cone;
pub mod dual;
mod error;
pub mod io;
pub mod iso;
pub mod link;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

/// (n)-dimensional area of the unit sphere Sⁿ ⊂ Rⁿ⁺¹; `sphere_area(2) = 4π`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_area(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0 * PI);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }
}
