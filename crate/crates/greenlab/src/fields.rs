//! Pointwise fields derived from the solved Green's function, and the
//! residuals of the identities that tie them together.
//!
//! With `y := u^{1/(2-n)} = 2 sn_k(b/2)` everything reduces to algebra in
//! `(y, y', y'', ...)`: `ψ = sn_k²(b/2) = y²/4`, `‖∇sn_k(b/2)‖ = y'/2`, the
//! gradient-bound field `v² = y'² + k y²/4`, and the traceless Hessian of ψ,
//! whose radial eigenvalue drives every monotonicity formula. Official field
//! values substitute `u''`, `u'''` from the equation; identity checks
//! re-derive the differential side from interpolants anchored only to node
//! values and first derivatives, so each check compares two genuinely
//! different routes and its residual shrinks at the interpolation order
//! under grid refinement.

use crate::numeric::{hermite_newton, newton_eval_jet3};
use crate::solver::{RadialGreen, UJet};

/// All derived pointwise quantities at one radius.
#[derive(Debug, Clone, Copy)]
pub struct FieldJet {
    pub rho: f64,
    pub u: f64,
    pub up: f64,
    /// `y = u^{1/(2-n)} = 2 sn_k(b/2)` and its ρ-derivatives.
    pub y: f64,
    pub yp: f64,
    pub ypp: f64,
    pub yppp: f64,
    /// `ψ = sn_k²(b/2)` and derivatives.
    pub psi: f64,
    pub psi_p: f64,
    pub psi_pp: f64,
    pub lap_psi: f64,
    /// `‖∇ sn_k(b/2)‖ = y'/2`.
    pub grad_sn: f64,
    pub v_sq: f64,
    pub v: f64,
    /// Radial eigenvalue `B(ν,ν)` of the traceless Hessian of ψ.
    pub b_nu_nu: f64,
    /// Tangential eigenvalue; `B(ν,ν) + (n-1) B_tan = 0`.
    pub b_tan: f64,
    pub norm_b_sq: f64,
    /// Mean curvature `(n-1) f'/f` of the level sphere.
    pub mean_curv: f64,
    /// `Ric(ν, ν) = -(n-1) f''/f`.
    pub ric_nu: f64,
    pub f: f64,
    pub fp: f64,
    /// `ln(sn_k(b/2)) = ln(y/2)`, the kernel of the log-weighted functional.
    pub log_sn_half: f64,
}

impl FieldJet {
    /// `(v²)' = 2 y' y'' + k y y'/2`.
    pub fn v_sq_p(&self, k: f64) -> f64 {
        2.0 * self.yp * self.ypp + 0.5 * k * self.y * self.yp
    }

    /// `v' = (v²)'/(2v)`.
    pub fn v_p(&self, k: f64) -> f64 {
        self.v_sq_p(k) / (2.0 * self.v)
    }

    /// Integrand core of the monotonicity formulas:
    /// `Q = ‖B‖² + (Ric(ν,ν) - (n-1)k) ‖∇ψ‖²`.
    pub fn q_excess(&self, n: u32, k: f64) -> f64 {
        self.norm_b_sq + (self.ric_nu - (n as f64 - 1.0) * k) * self.psi_p * self.psi_p
    }
}

/// Pointwise residual together with the local scale it is measured against
/// (the largest participating term, floored at the natural unit of the
/// identity so exact-zero cases stay meaningful).
#[derive(Debug, Clone, Copy)]
pub struct ResidualSample {
    pub residual: f64,
    pub scale: f64,
}

impl ResidualSample {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

/// A scalar field sampled on the solver grid with its first derivative;
/// evaluation anywhere uses a three-node Hermite quintic whose second
/// derivative supplies the independent differential route of the identity
/// checks.
struct NodeField {
    xs: Vec<f64>,
    s: Vec<f64>,
    sp: Vec<f64>,
}

impl NodeField {
    fn with_capacity(xs: Vec<f64>) -> Self {
        let n = xs.len();
        Self { xs, s: Vec::with_capacity(n), sp: Vec::with_capacity(n) }
    }

    fn jet(&self, rho: f64) -> [f64; 3] {
        let n = self.xs.len();
        let j = match self.xs.binary_search_by(|x| x.partial_cmp(&rho).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .clamp(1, n - 3);
        let xs = [self.xs[j - 1], self.xs[j], self.xs[j + 1], self.xs[j + 2]];
        let data: Vec<[f64; 2]> =
            (j - 1..=j + 2).map(|i| [self.s[i], self.sp[i]]).collect();
        let slices: Vec<&[f64]> = data.iter().map(|d| d.as_slice()).collect();
        let (z, c) = hermite_newton(&xs, &slices);
        let jet = newton_eval_jet3(&z, &c, rho);
        [jet[0], jet[1], jet[2]]
    }
}

/// Derived fields of one solved manifold.
pub struct RadialFieldTable<'a> {
    green: &'a RadialGreen,
    psi: NodeField,
    vsq: NodeField,
    v: NodeField,
    grad_sn_sq: NodeField,
}

impl<'a> RadialFieldTable<'a> {
    pub fn build(green: &'a RadialGreen) -> Self {
        let xs: Vec<f64> = green.grid().to_vec();
        let mut psi = NodeField::with_capacity(xs.clone());
        let mut vsq = NodeField::with_capacity(xs.clone());
        let mut v = NodeField::with_capacity(xs.clone());
        let mut g2 = NodeField::with_capacity(xs);
        let k = green.k;
        for &rho in green.grid() {
            let jet = field_jet(green, green.jet_ode(rho));
            psi.s.push(jet.psi);
            psi.sp.push(jet.psi_p);
            vsq.s.push(jet.v_sq);
            vsq.sp.push(jet.v_sq_p(k));
            v.s.push(jet.v);
            v.sp.push(jet.v_p(k));
            g2.s.push(jet.grad_sn * jet.grad_sn);
            g2.sp.push(0.5 * jet.yp * jet.ypp);
        }
        Self { green, psi, vsq, v, grad_sn_sq: g2 }
    }

    pub fn green(&self) -> &RadialGreen {
        self.green
    }

    /// Official field values at any radius (equation-substituted route).
    pub fn jet(&self, rho: f64) -> FieldJet {
        field_jet(self.green, self.green.jet_ode(rho))
    }

    /// The coefficient gating the β-family monotonicity:
    /// `β̃ = 1 + (β-1)(n-1) + (n-1)(2-β) k ψ / v²`.
    pub fn beta_tilde(&self, beta: f64, rho: f64) -> f64 {
        let jet = self.jet(rho);
        beta_tilde_of(self.green.n, self.green.k, beta, &jet)
    }

    /// Interior zone where pointwise identities are asserted; the pole
    /// neighbourhoods are covered by asymptotic checks instead.
    pub fn interior_zone(&self) -> (f64, f64) {
        let l = self.green.profile().length;
        (1e-3 * l, l * (1.0 - 1e-3))
    }

    /// Midpoints of grid intervals inside the interior zone.
    pub fn probe_points(&self) -> Vec<f64> {
        let (lo, hi) = self.interior_zone();
        let grid = self.green.grid();
        (0..grid.len() - 1)
            .map(|i| 0.5 * (grid[i] + grid[i + 1]))
            .filter(|&rho| rho >= lo && rho <= hi)
            .collect()
    }

    /// Residual of `Δψ = 2n ‖∇sn_k(b/2)‖² - (nk/2) ψ`.
    pub fn laplace_psi_residual(&self, rho: f64) -> ResidualSample {
        let nf = self.green.n as f64;
        let k = self.green.k;
        let jet = self.jet(rho);
        let a = self.psi.jet(rho);
        let t1 = a[2];
        let t2 = (nf - 1.0) * (jet.fp / jet.f) * a[1];
        let t3 = 2.0 * nf * jet.grad_sn * jet.grad_sn;
        let t4 = 0.5 * nf * k * jet.psi;
        let residual = t1 + t2 - (t3 - t4);
        let scale = t1.abs().max(t2.abs()).max(t3.abs()).max(t4.abs()).max(k);
        ResidualSample { residual, scale }
    }

    /// Residual of the drift-Laplacian identity
    /// `𝓛 v² = (8/(2 sn_k(b/2))²)(‖B‖² + Ric(∇ψ,∇ψ) - (n-1)k ‖∇ψ‖²)`,
    /// where `𝓛 = Δ + (2-n)/ψ ⟨∇ψ, ∇·⟩` is the drift Laplacian induced by
    /// the square of the Green's function.
    pub fn drift_laplacian_v_sq_residual(&self, rho: f64) -> ResidualSample {
        let nf = self.green.n as f64;
        let k = self.green.k;
        let jet = self.jet(rho);
        let a = self.vsq.jet(rho);
        let t1 = a[2];
        let t2 = (nf - 1.0) * (jet.fp / jet.f) * a[1];
        let t3 = (2.0 - nf) / jet.psi * jet.psi_p * a[1];
        let rhs = 2.0 / jet.psi * jet.q_excess(self.green.n, k);
        let residual = t1 + t2 + t3 - rhs;
        let scale = t1.abs().max(t2.abs()).max(t3.abs()).max(rhs.abs()).max(k);
        ResidualSample { residual, scale }
    }

    /// Residual of `‖∇v‖² = (1/ψ - k/v²) ‖B(ν)‖²` (radially
    /// `‖B(ν)‖² = B(ν,ν)²` since the tangential part of `B(ν)` vanishes).
    pub fn grad_v_residual(&self, rho: f64) -> ResidualSample {
        let k = self.green.k;
        let jet = self.jet(rho);
        let a = self.v.jet(rho);
        let lhs = a[1] * a[1];
        let rhs = (1.0 / jet.psi - k / jet.v_sq) * jet.b_nu_nu * jet.b_nu_nu;
        ResidualSample { residual: lhs - rhs, scale: lhs.abs().max(rhs.abs()).max(k) }
    }

    /// Residual of
    /// `∇‖∇sn_k(b/2)‖² = (‖∇sn_k(b/2)‖/sn_k(b/2)) B(ν) - (k/2) sn_k(b/2) ∇sn_k(b/2)`
    /// in its radial scalar form.
    pub fn grad_norm_sq_residual(&self, rho: f64) -> ResidualSample {
        let k = self.green.k;
        let jet = self.jet(rho);
        let a = self.grad_sn_sq.jet(rho);
        let lhs = a[1];
        let t1 = (jet.yp / jet.y) * jet.b_nu_nu;
        let t2 = 0.125 * k * jet.y * jet.yp;
        let residual = lhs - (t1 - t2);
        let scale = lhs.abs().max(t1.abs()).max(t2.abs()).max(k.powf(1.5));
        ResidualSample { residual, scale }
    }

    /// Residual of the β-family Laplacian identity
    /// `Δv^β = 4β v^{β-2} ‖∇sn_k(b/2)‖² (‖II̊‖² + Ric(ν,ν) - (n-1)k)
    ///        + (n-2)/ψ ⟨∇ψ, ∇v^β⟩
    ///        + β v^{β-2}/((n-1)ψ) (β̃ ‖B(ν)‖² + (n-2)‖B(ν)^⊤‖²)`,
    /// with `II̊ ≡ 0` and `B(ν)^⊤ ≡ 0` in the rotationally symmetric
    /// reduction.
    pub fn laplace_v_beta_residual(&self, vbeta: &VBetaField, rho: f64) -> ResidualSample {
        let nf = self.green.n as f64;
        let k = self.green.k;
        let beta = vbeta.beta;
        let jet = self.jet(rho);
        let a = vbeta.nodes.jet(rho);
        let lhs1 = a[2];
        let lhs2 = (nf - 1.0) * (jet.fp / jet.f) * a[1];
        let w_p = beta * jet.v.powf(beta - 1.0) * jet.v_p(k);
        let vbm2 = jet.v.powf(beta - 2.0);
        let r1 = 4.0 * beta * vbm2 * jet.grad_sn * jet.grad_sn * (jet.ric_nu - (nf - 1.0) * k);
        let r2 = (nf - 2.0) / jet.psi * jet.psi_p * w_p;
        let bt = beta_tilde_of(self.green.n, k, beta, &jet);
        let r3 = beta * vbm2 / ((nf - 1.0) * jet.psi) * bt * jet.b_nu_nu * jet.b_nu_nu;
        let residual = lhs1 + lhs2 - (r1 + r2 + r3);
        let scale =
            lhs1.abs().max(lhs2.abs()).max(r1.abs()).max(r2.abs()).max(r3.abs()).max(k);
        ResidualSample { residual, scale }
    }

    /// `v^β` sampled on the grid, reused across one β's probe sweep.
    pub fn v_beta_field(&self, beta: f64) -> VBetaField {
        let k = self.green.k;
        let mut nodes = NodeField::with_capacity(self.green.grid().to_vec());
        for &rho in self.green.grid() {
            let jet = self.jet(rho);
            nodes.s.push(jet.v.powf(beta));
            nodes.sp.push(beta * jet.v.powf(beta - 1.0) * jet.v_p(k));
        }
        VBetaField { beta, nodes }
    }

    /// `B(ν,ν) + (n-1) B_tan`, zero because `B` is trace-free.
    pub fn trace_free_residual(&self, rho: f64) -> ResidualSample {
        let nf = self.green.n as f64;
        let jet = self.jet(rho);
        let residual = jet.b_nu_nu + (nf - 1.0) * jet.b_tan;
        let scale = jet.b_nu_nu.abs().max((nf - 1.0) * jet.b_tan.abs()).max(1e-2);
        ResidualSample { residual, scale }
    }

    /// `‖∇ψ‖² ‖II̊‖²` recovered from
    /// `‖B‖² - n/(n-1) ‖B(ν)‖² - (n-2)/(n-1) ‖B(ν)^⊤‖²`; identically zero
    /// radially since the level spheres are umbilic.
    pub fn ii_ring_sq(&self, rho: f64) -> ResidualSample {
        let nf = self.green.n as f64;
        let jet = self.jet(rho);
        let residual = jet.norm_b_sq - nf / (nf - 1.0) * jet.b_nu_nu * jet.b_nu_nu;
        let scale = jet.norm_b_sq.max(1e-2);
        ResidualSample { residual, scale }
    }
}

fn beta_tilde_of(n: u32, k: f64, beta: f64, jet: &FieldJet) -> f64 {
    let nf = n as f64;
    1.0 + (beta - 1.0) * (nf - 1.0) + (nf - 1.0) * (2.0 - beta) * k * jet.psi / jet.v_sq
}

/// `v^β` node field for the β-family identity check.
pub struct VBetaField {
    pub beta: f64,
    nodes: NodeField,
}

fn field_jet(green: &RadialGreen, ujet: UJet) -> FieldJet {
    let nf = green.n as f64;
    let k = green.k;
    let rho = ujet.rho;
    let profile = green.profile();
    let q = green.y_exponent();

    let y = ujet.u.powf(q);
    let r = y / ujet.u; // u^{q-1}
    let yp = q * r * ujet.up;
    let ypp = q * (q - 1.0) * (r / ujet.u) * ujet.up * ujet.up + q * r * ujet.upp;
    let yppp = q * (q - 1.0) * (q - 2.0) * (r / (ujet.u * ujet.u)) * ujet.up.powi(3)
        + 3.0 * q * (q - 1.0) * (r / ujet.u) * ujet.up * ujet.upp
        + q * r * ujet.uppp;

    let psi = 0.25 * y * y;
    let psi_p = 0.5 * y * yp;
    let psi_pp = 0.5 * (yp * yp + y * ypp);
    let f = profile.f(rho);
    let fp = profile.fp(rho);
    let lap_psi = psi_pp + (nf - 1.0) * (fp / f) * psi_p;
    let grad_sn = 0.5 * yp;
    let v_sq = yp * yp + 0.25 * k * y * y;
    let b_nu_nu = psi_pp - lap_psi / nf;
    let b_tan = psi_p * fp / f - lap_psi / nf;
    FieldJet {
        rho,
        u: ujet.u,
        up: ujet.up,
        y,
        yp,
        ypp,
        yppp,
        psi,
        psi_p,
        psi_pp,
        lap_psi,
        grad_sn,
        v_sq,
        v: v_sq.sqrt(),
        b_nu_nu,
        b_tan,
        norm_b_sq: b_nu_nu * b_nu_nu + (nf - 1.0) * b_tan * b_tan,
        mean_curv: (nf - 1.0) * fp / f,
        ric_nu: (nf - 1.0) * profile.ricci_radial_hat(rho),
        f,
        fp,
        log_sn_half: (0.5 * y).ln(),
    }
}
