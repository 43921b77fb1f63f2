//! Curvature-adapted trigonometry and model-space closed forms.
//!
//! For curvature scale `k > 0` the generalized sine and cosine are
//! `sn_k(x) = sin(x√k)/√k` and `cs_k(x) = cos(x√k)`, defined on
//! `[0, π/√k]`. The round sphere of sectional curvature `k` has Green's
//! function `(2 sn_k(d/2))^{2-n}` for the operator `-Δ + n(n-2)k/4` with the
//! normalization `L G = (n-2) ω_{n-1} δ_p`; everything else in this crate is
//! tested against these closed forms.

use thiserror::Error;

/// Errors from the curvature-adapted trig layer.
#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("singularity: {0}")]
    Singularity(String),
}

type Result<T> = std::result::Result<T, CurvatureError>;

/// Curvature scale and dimension, the two constants the whole lab is keyed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParam {
    pub k: f64,
    pub n: u32,
}

impl CurvatureParam {
    pub fn new(n: u32, k: f64) -> Result<Self> {
        if n < 3 {
            return Err(CurvatureError::Argument(format!("n must be ≥ 3, got {n}")));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(CurvatureError::Argument(format!("k must be a positive real, got {k}")));
        }
        Ok(Self { k, n })
    }

    /// Maximal diameter `π/√k` of a manifold with `Ric ≥ (n-1)k`.
    pub fn diameter_max(&self) -> f64 {
        std::f64::consts::PI / self.k.sqrt()
    }

    /// Zeroth-order coefficient `n(n-2)k/4` of the comparison operator.
    pub fn potential(&self) -> f64 {
        let n = self.n as f64;
        n * (n - 2.0) * self.k / 4.0
    }
}

/// Unchecked curvature trig for hot paths; domains are the callers' business.
#[derive(Debug, Clone, Copy)]
pub struct Trig {
    pub k: f64,
    sqrt_k: f64,
}

impl Trig {
    pub fn new(k: f64) -> Self {
        Self { k, sqrt_k: k.sqrt() }
    }

    /// sn_k(x) = sin(x√k)/√k, with a short Taylor series below x√k < 1e-4
    /// so that ratios sn_k(x)/x stay clean for tiny x.
    pub fn sn(&self, x: f64) -> f64 {
        let t = x * self.sqrt_k;
        if t.abs() < 1e-4 {
            let t2 = t * t;
            // sin(t)/t to five terms
            let series = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)));
            x * series
        } else {
            t.sin() / self.sqrt_k
        }
    }

    pub fn cs(&self, x: f64) -> f64 {
        (x * self.sqrt_k).cos()
    }

    pub fn tn(&self, x: f64) -> f64 {
        self.sn(x) / self.cs(x)
    }

    pub fn ct(&self, x: f64) -> f64 {
        self.cs(x) / self.sn(x)
    }

    /// Principal inverse of sn_k, mapping [0, 1/√k] onto [0, π/(2√k)].
    pub fn arcsn(&self, y: f64) -> f64 {
        (y * self.sqrt_k).min(1.0).asin() / self.sqrt_k
    }
}

fn check_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    // tolerate rounding-level excursions past the endpoints
    let slack = 1e-12 * hi.abs().max(1.0);
    if !x.is_finite() || x < lo - slack || x > hi + slack {
        return Err(CurvatureError::Argument(format!(
            "{name} out of range: {x} not in [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// sn_k(x) = sin(x√k)/√k on [0, π/√k].
pub fn sn_k(k: f64, x: f64) -> Result<f64> {
    let p = positive_k(k)?;
    check_range("x", x, 0.0, std::f64::consts::PI / k.sqrt())?;
    let _ = p;
    Ok(Trig::new(k).sn(x.max(0.0)))
}

/// cs_k(x) = cos(x√k) on [0, π/√k].
pub fn cs_k(k: f64, x: f64) -> Result<f64> {
    positive_k(k)?;
    check_range("x", x, 0.0, std::f64::consts::PI / k.sqrt())?;
    Ok(Trig::new(k).cs(x))
}

/// tn_k = sn_k/cs_k.
pub fn tn_k(k: f64, x: f64) -> Result<f64> {
    Ok(sn_k(k, x)? / cs_k(k, x)?)
}

/// ct_k = cs_k/sn_k.
pub fn ct_k(k: f64, x: f64) -> Result<f64> {
    Ok(cs_k(k, x)? / sn_k(k, x)?)
}

/// Principal inverse of sn_k: [0, 1/√k] → [0, π/(2√k)].
pub fn arcsn_k(k: f64, y: f64) -> Result<f64> {
    positive_k(k)?;
    check_range("y", y, 0.0, 1.0 / k.sqrt())?;
    Ok(Trig::new(k).arcsn(y.max(0.0)))
}

fn positive_k(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(CurvatureError::Argument(format!("k must be positive, got {k}")));
    }
    Ok(k)
}

/// Green's function of the round sphere of curvature `k`:
/// `(2 sn_k(dist/2))^{2-n}`, decreasing from the pole to its minimum
/// `(2/√k)^{2-n}` at the antipode.
pub fn model_green(p: CurvatureParam, dist: f64) -> Result<f64> {
    if dist == 0.0 {
        return Err(CurvatureError::Singularity(
            "model Green's function blows up at distance 0".into(),
        ));
    }
    check_range("dist", dist, 0.0, p.diameter_max())?;
    let t = Trig::new(p.k);
    Ok((2.0 * t.sn(0.5 * dist)).powi(2 - p.n as i32))
}

/// Green's function on the unit round 3-sphere for the operator `-Δ + 3k/4`
/// with `0 < k ≤ 1`. At `k = 1` this reduces exactly to the constant
/// curvature closed form `1/(2 sin(r/2))`.
pub fn s3_scaled_green(k: f64, r: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(CurvatureError::Argument(format!("k must lie in (0, 1], got {k}")));
    }
    if !(r > 0.0 && r < std::f64::consts::PI) {
        return Err(CurvatureError::Argument(format!("r must lie in (0, π), got {r}")));
    }
    let alpha = (1.0 - 0.75 * k).sqrt();
    // cos(αr) - cot(πα) sin(αr), written as a sine ratio so the k → 0 end
    // stays finite in intermediate terms
    let pi = std::f64::consts::PI;
    Ok((alpha * (pi - r)).sin() / ((pi * alpha).sin() * r.sin()))
}

/// Γ(j/2) for integer j ≥ 1 by the half-integer recursion.
fn gamma_half(j: u32) -> f64 {
    match j {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (j as f64 / 2.0 - 1.0) * gamma_half(j - 2),
    }
}

/// Volume `2 π^{n/2} / Γ(n/2)` of the unit (n-1)-sphere in ℝ^n.
pub fn omega(n: u32) -> f64 {
    assert!(n >= 2, "omega requires n ≥ 2");
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Volume of the round n-sphere of curvature k:
/// `ω_{n-1} ∫_0^{π/√k} sn_k^{n-1}(r) dr = ω_n k^{-n/2}`.
pub fn model_sphere_volume(p: CurvatureParam) -> f64 {
    omega(p.n + 1) * p.k.powf(-(p.n as f64) / 2.0)
}
