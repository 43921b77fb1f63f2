//! greenlab: a numerical laboratory for Green's functions of the comparison
//! operator `-Δ + n(n-2)k/4` on closed rotationally symmetric manifolds with
//! `Ric ≥ (n-1)k`.
//!
//! The crate solves the singular radial equation for the Green's function,
//! builds the distance-like reparametrization `b = 2 arcsn_k(G^{1/(2-n)}/2)`
//! and its derived pointwise fields, evaluates the monotone functionals
//! `A, V, A_β, V_β, V_∞` on level grids, and runs a verification battery
//! covering the sharp gradient bound, the monotonicity formulas with their
//! explicit derivative identities, and the volume comparisons they imply
//! (including the dimension-4 Bishop inequality).
//!
//! Module map:
//! - [`curvature`]: curvature-adapted trig and model-space closed forms
//! - [`manifold`]: warped-product profiles, Ricci admissibility, volume
//! - [`solver`]: the radial Green's function solve and `b`
//! - [`fields`]: pointwise derived fields and identity residuals
//! - [`functionals`]: level-set functionals, derivatives, monotonicity data
//! - [`verify`]: the check battery and its report
//! - [`config`] / [`output`]: CLI configuration and file emission

pub mod config;
pub mod curvature;
pub mod expr;
pub mod fields;
pub mod functionals;
pub mod manifold;
mod numeric;
pub mod output;
pub mod solver;
pub mod verify;

// The guide's code samples double as doctests so the book can never drift
// from the crate.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/getting-started.md")]
    pub mod getting_started {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    pub mod curvature {}
    #[doc = include_str!("../../../book/src/manifolds.md")]
    pub mod manifolds {}
    #[doc = include_str!("../../../book/src/greens-function.md")]
    pub mod greens_function {}
    #[doc = include_str!("../../../book/src/gradient-bound.md")]
    pub mod gradient_bound {}
    #[doc = include_str!("../../../book/src/monotonicity.md")]
    pub mod monotonicity {}
    #[doc = include_str!("../../../book/src/applications.md")]
    pub mod applications {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
}
