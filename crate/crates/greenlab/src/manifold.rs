//! Closed rotationally symmetric manifolds as warped products over `[0, L]`.
//!
//! The metric is `dρ² + f(ρ)² g_{S^{n-1}}` with warp factor `f` vanishing to
//! first order at both poles. Ricci eigenvalues in this gauge are
//! `-(n-1) f''/f` radially and `-f''/f + (n-2)(1 - f'²)/f²` tangentially;
//! the largest admissible constant in `Ric ≥ (n-1)k g` is read off a dense
//! scan of both.

use crate::curvature::{omega, Trig};
use crate::expr::Expr;
use crate::numeric::adaptive_quad;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile error: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ProfileError>;

/// Which family a profile was built from; carries the construction parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyTag {
    /// Round sphere of sectional curvature `k`: `f = sn_k`, `L = π/√k`.
    Model { k: f64 },
    /// Unit round 3-sphere paired with a comparison constant `k ∈ (0, 1]`.
    ScaledS3 { k: f64 },
    /// `f(ρ) = sin(ρ)(1 + ε sin²ρ)` on `[0, π]`, a smooth Ricci-positive
    /// deformation of the unit sphere for `|ε| ≤ 0.2`.
    PerturbedSphere { eps: f64 },
    /// User-supplied expressions for `f`, `f'`, `f''`.
    Custom,
}

impl FamilyTag {
    pub fn label(&self) -> String {
        match self {
            FamilyTag::Model { k } => format!("model(k={k})"),
            FamilyTag::ScaledS3 { k } => format!("s3(k={k})"),
            FamilyTag::PerturbedSphere { eps } => format!("perturbed(eps={eps})"),
            FamilyTag::Custom => "custom".into(),
        }
    }
}

#[derive(Debug, Clone)]
enum WarpKind {
    Model { trig: Trig },
    Perturbed { eps: f64 },
    Custom { f: Expr, f1: Expr, f2: Expr },
}

/// A closed rotationally symmetric n-manifold.
#[derive(Debug, Clone)]
pub struct WarpProfile {
    pub n: u32,
    pub length: f64,
    pub family: FamilyTag,
    kind: WarpKind,
}

/// Outcome of the Ricci lower-bound scan. Eigenvalues are normalized by
/// `(n-1)`, so `k_star` is directly the largest admissible `k`.
#[derive(Debug, Clone, Copy)]
pub struct RicciAdmissibility {
    pub k_star: f64,
    pub radial_min: f64,
    pub tangential_min: f64,
    pub witness_rho: f64,
}

impl RicciAdmissibility {
    pub fn admissible(&self) -> bool {
        self.k_star > 0.0
    }
}

const POLE_TOL: f64 = 1e-8;
const RICCI_SCAN_POINTS: usize = 4096;

impl WarpProfile {
    /// Round sphere of curvature `k` in dimension `n`.
    pub fn model(n: u32, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(ProfileError::Invalid(format!("model requires k > 0, got {k}")));
        }
        let profile = Self {
            n,
            length: std::f64::consts::PI / k.sqrt(),
            family: FamilyTag::Model { k },
            kind: WarpKind::Model { trig: Trig::new(k) },
        };
        profile.validated()
    }

    /// Unit round 3-sphere, tagged with the comparison constant `k` that the
    /// solver will pair it with.
    pub fn scaled_s3(k: f64) -> Result<Self> {
        if !(k > 0.0 && k <= 1.0) {
            return Err(ProfileError::Invalid(format!("s3 requires k in (0, 1], got {k}")));
        }
        let profile = Self {
            n: 3,
            length: std::f64::consts::PI,
            family: FamilyTag::ScaledS3 { k },
            kind: WarpKind::Model { trig: Trig::new(1.0) },
        };
        profile.validated()
    }

    /// `f(ρ) = sin(ρ)(1 + ε sin²ρ)` on `[0, π]`.
    pub fn perturbed_sphere(n: u32, eps: f64) -> Result<Self> {
        if !(eps.abs() <= 0.2) || !eps.is_finite() {
            return Err(ProfileError::Invalid(format!(
                "perturbed sphere requires |eps| ≤ 0.2, got {eps}"
            )));
        }
        let profile = Self {
            n,
            length: std::f64::consts::PI,
            family: FamilyTag::PerturbedSphere { eps },
            kind: WarpKind::Perturbed { eps },
        };
        profile.validated()
    }

    /// Custom warp from expressions for `f`, `f'`, `f''`. The derivative
    /// expressions are cross-checked against finite differences of `f`.
    pub fn custom(n: u32, length: f64, f: Expr, f1: Expr, f2: Expr) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(ProfileError::Invalid(format!("length must be positive, got {length}")));
        }
        let profile = Self {
            n,
            length,
            family: FamilyTag::Custom,
            kind: WarpKind::Custom { f, f1, f2 },
        };
        profile.check_custom_derivatives()?;
        profile.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n < 3 {
            return Err(ProfileError::Invalid(format!("n must be ≥ 3, got {}", self.n)));
        }
        let l = self.length;
        let checks: [(&str, f64, f64); 6] = [
            ("f(0) = 0", self.f(0.0), 0.0),
            ("f(L) = 0", self.f(l), 0.0),
            ("f'(0) = 1", self.fp(0.0), 1.0),
            ("f'(L) = -1", self.fp(l), -1.0),
            ("f''(0) = 0", self.fpp(0.0), 0.0),
            ("f''(L) = 0", self.fpp(l), 0.0),
        ];
        for (name, got, want) in checks {
            if !got.is_finite() || (got - want).abs() > POLE_TOL * l.max(1.0) {
                return Err(ProfileError::Invalid(format!(
                    "pole smoothness violated: {name} (got {got})"
                )));
            }
        }
        for i in 1..512 {
            let rho = l * i as f64 / 512.0;
            let v = self.f(rho);
            if !(v > 0.0) || !v.is_finite() {
                return Err(ProfileError::Invalid(format!(
                    "warp factor must be positive on (0, L); f({rho}) = {v}"
                )));
            }
        }
        Ok(self)
    }

    fn check_custom_derivatives(&self) -> Result<()> {
        let l = self.length;
        let h = 1e-5 * l;
        for i in 1..64 {
            let rho = l * i as f64 / 64.0;
            if rho - h <= 0.0 || rho + h >= l {
                continue;
            }
            let fd1 = (self.f(rho + h) - self.f(rho - h)) / (2.0 * h);
            let fd2 = (self.fp(rho + h) - self.fp(rho - h)) / (2.0 * h);
            let scale = 1.0 + self.f(rho).abs() / l;
            if (fd1 - self.fp(rho)).abs() > 1e-4 * scale {
                return Err(ProfileError::Invalid(format!(
                    "custom f' disagrees with d/dρ f near ρ = {rho}: expression {}, finite difference {fd1}",
                    self.fp(rho)
                )));
            }
            if (fd2 - self.fpp(rho)).abs() > 1e-3 * scale {
                return Err(ProfileError::Invalid(format!(
                    "custom f'' disagrees with d/dρ f' near ρ = {rho}: expression {}, finite difference {fd2}",
                    self.fpp(rho)
                )));
            }
        }
        Ok(())
    }

    pub fn f(&self, rho: f64) -> f64 {
        match &self.kind {
            WarpKind::Model { trig } => trig.sn(rho),
            WarpKind::Perturbed { eps } => {
                let s = rho.sin();
                s * (1.0 + eps * s * s)
            }
            WarpKind::Custom { f, .. } => f.eval(rho),
        }
    }

    pub fn fp(&self, rho: f64) -> f64 {
        match &self.kind {
            WarpKind::Model { trig } => trig.cs(rho),
            WarpKind::Perturbed { eps } => {
                let s = rho.sin();
                rho.cos() * (1.0 + 3.0 * eps * s * s)
            }
            WarpKind::Custom { f1, .. } => f1.eval(rho),
        }
    }

    pub fn fpp(&self, rho: f64) -> f64 {
        match &self.kind {
            WarpKind::Model { trig } => -trig.k * trig.sn(rho),
            WarpKind::Perturbed { eps } => {
                let (s, c) = rho.sin_cos();
                -s * (1.0 + 3.0 * eps * s * s - 6.0 * eps * c * c)
            }
            WarpKind::Custom { f2, .. } => f2.eval(rho),
        }
    }

    /// Third derivative of `f` at the two poles, used by the series start of
    /// the radial solver.
    pub fn fppp_at_poles(&self) -> (f64, f64) {
        match &self.kind {
            WarpKind::Model { trig } => (-trig.k, trig.k),
            WarpKind::Perturbed { eps } => (-(1.0 - 6.0 * eps), 1.0 - 6.0 * eps),
            WarpKind::Custom { .. } => {
                let d = 1e-4 * self.length;
                (self.fpp(d) / d, -self.fpp(self.length - d) / d)
            }
        }
    }

    /// Radial Ricci eigenvalue divided by `(n-1)`, i.e. `-f''/f`, in a form
    /// that is finite at the poles.
    pub fn ricci_radial_hat(&self, rho: f64) -> f64 {
        match &self.kind {
            WarpKind::Model { trig } => trig.k,
            WarpKind::Perturbed { eps } => {
                let (s, c) = rho.sin_cos();
                (1.0 + 3.0 * eps * s * s - 6.0 * eps * c * c) / (1.0 + eps * s * s)
            }
            WarpKind::Custom { .. } => {
                let rho = self.clamp_off_poles(rho);
                -self.fpp(rho) / self.f(rho)
            }
        }
    }

    /// `(1 - f'²)/f²`, cancellation-free per family; equals `k` on the model.
    pub fn ricci_q(&self, rho: f64) -> f64 {
        match &self.kind {
            WarpKind::Model { trig } => trig.k,
            WarpKind::Perturbed { eps } => {
                let (s, c) = rho.sin_cos();
                let num = 1.0 - 6.0 * eps * c * c - 9.0 * eps * eps * s * s * c * c;
                let den = 1.0 + eps * s * s;
                num / (den * den)
            }
            WarpKind::Custom { .. } => {
                let rho = self.clamp_off_poles(rho);
                let fp = self.fp(rho);
                let f = self.f(rho);
                (1.0 - fp * fp) / (f * f)
            }
        }
    }

    fn clamp_off_poles(&self, rho: f64) -> f64 {
        let guard = 1e-4 * self.length;
        rho.clamp(guard, self.length - guard)
    }

    /// Tangential Ricci eigenvalue divided by `(n-1)`.
    pub fn ricci_tangential_hat(&self, rho: f64) -> f64 {
        let n = self.n as f64;
        (self.ricci_radial_hat(rho) + (n - 2.0) * self.ricci_q(rho)) / (n - 1.0)
    }

    /// Largest `k` with `Ric ≥ (n-1)k g`, from a Chebyshev-spaced scan of
    /// both Ricci eigenvalues including the pole limits.
    pub fn ricci_admissibility(&self) -> RicciAdmissibility {
        let l = self.length;
        let m = RICCI_SCAN_POINTS;
        let mut radial_min = f64::INFINITY;
        let mut tangential_min = f64::INFINITY;
        let mut witness_rho = 0.0;
        let mut k_star = f64::INFINITY;
        for i in 0..=m {
            let rho = 0.5 * l * (1.0 - (std::f64::consts::PI * i as f64 / m as f64).cos());
            let r = self.ricci_radial_hat(rho);
            let t = self.ricci_tangential_hat(rho);
            radial_min = radial_min.min(r);
            tangential_min = tangential_min.min(t);
            if r.min(t) < k_star {
                k_star = r.min(t);
                witness_rho = rho;
            }
        }
        RicciAdmissibility { k_star, radial_min, tangential_min, witness_rho }
    }

    /// Riemannian volume `ω_{n-1} ∫_0^L f^{n-1} dρ`.
    pub fn volume(&self) -> f64 {
        let n = self.n;
        let rough = gauss_rough(self, 256);
        let tol = 1e-11 * rough.abs().max(1.0);
        omega(n) * adaptive_quad(&|rho| self.f(rho).powi(n as i32 - 1), 0.0, self.length, tol)
    }

    pub fn diameter(&self) -> f64 {
        self.length
    }
}

fn gauss_rough(w: &WarpProfile, panels: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..panels {
        let a = w.length * i as f64 / panels as f64;
        let b = w.length * (i + 1) as f64 / panels as f64;
        acc += crate::numeric::gauss7(|rho| w.f(rho).powi(w.n as i32 - 1), a, b);
    }
    acc
}
