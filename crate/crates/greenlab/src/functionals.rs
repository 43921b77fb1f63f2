//! Level-set functionals of the Green's function and their monotone
//! combinations.
//!
//! For a weight field `w` the three generic functionals reduce radially to
//!
//! ```text
//! I_w(r) = (2 sn_k(r/2))^{1-n} cs_k(r/2) ∫_{b=r} w ‖∇b‖ + (nk/4) ∫_{b≤r} w G
//! J_w(r) = (2 sn_k(r/2))^{-n} ∫_{b≤r} w (4‖∇sn_k(b/2)‖² - k sn_k²(b/2)) + (k/4) ∫_{b≤r} w G
//! W_w(r) = (2 sn_k(r/2))^{2-n} ∫_{b≤r} w/(2 sn_k(b/2))² (4‖∇sn_k(b/2)‖² - nk/(n-2) sn_k²(b/2))
//!          + nk/(4(n-2)) ∫_{b≤r} w G
//! ```
//!
//! plus the log-weighted tail functional `J_w^∞`. The named series are
//! `A = I_{v²}`, `V = J_{v²}`, `A_β = I_{v^β}`, `V_β = W_{v^β}`,
//! `V_∞ = J^∞_{v²}`; `I_1 ≡ ω_{n-1}`, `J_1 ≡ ω_{n-1}/n`, and
//! `W_1 ≡ ω_{n-1}/(n-2)` are the built-in calibration rows. Every monotone
//! series comes with the closed-form expression for its derivative, so the
//! numeric difference quotients can be cross-checked against the structure
//! that proves monotonicity.

use crate::curvature::omega;
use crate::fields::{FieldJet, RadialFieldTable};
use crate::numeric::{GAUSS7_NODES, GAUSS7_WEIGHTS};

/// A functional sampled on the level grid.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    pub name: String,
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

/// Quadrature-backed evaluator over one solved manifold.
pub struct Evaluator<'a> {
    table: &'a RadialFieldTable<'a>,
    /// Gauss-point jets per grid panel, weights premultiplied by the panel
    /// half-width and the volume factor `f^{n-1}`.
    jets: Vec<FieldJet>,
    wf: Vec<f64>,
    n: u32,
    k: f64,
    pub omega: f64,
    pub m: f64,
}

/// Node-aligned prefix integrals of one volume integrand.
pub struct VolumeIntegral {
    prefix: Vec<f64>,
}

impl VolumeIntegral {
    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(table: &'a RadialFieldTable<'a>) -> Self {
        let green = table.green();
        let grid = green.grid();
        let n = green.n;
        let mut jets = Vec::with_capacity((grid.len() - 1) * 7);
        let mut wf = Vec::with_capacity((grid.len() - 1) * 7);
        for i in 0..grid.len() - 1 {
            let mid = 0.5 * (grid[i] + grid[i + 1]);
            let half = 0.5 * (grid[i + 1] - grid[i]);
            for (x, w) in GAUSS7_NODES.iter().zip(GAUSS7_WEIGHTS.iter()) {
                let jet = table.jet(mid + half * x);
                wf.push(w * half * jet.f.powi(n as i32 - 1));
                jets.push(jet);
            }
        }
        Self { table, jets, wf, n, k: green.k, omega: omega(n), m: green.m }
    }

    pub fn table(&self) -> &RadialFieldTable<'a> {
        self.table
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Prefix integrals `∫_0^{ρ_i} w f^{n-1} dρ` at every grid node. The
    /// head segment `[0, ρ_min]` below the grid is integrated analytically
    /// from a local power fit at the two innermost nodes; weights like the
    /// `W` integrand tend to a nonzero constant at the pole, so dropping the
    /// head would poison the small-level values behind the `(2 sn_k(r/2))^{2-n}`
    /// prefactors.
    pub fn integral<F: Fn(&FieldJet) -> f64>(&self, w: F) -> VolumeIntegral {
        let grid = self.table.green().grid();
        let mut prefix = Vec::with_capacity(grid.len());
        prefix.push(self.head(&w));
        let mut acc = prefix[0];
        for i in 0..grid.len() - 1 {
            for g in 0..7 {
                let idx = i * 7 + g;
                acc += self.wf[idx] * w(&self.jets[idx]);
            }
            prefix.push(acc);
        }
        VolumeIntegral { prefix }
    }

    fn head<F: Fn(&FieldJet) -> f64>(&self, w: &F) -> f64 {
        let grid = self.table.green().grid();
        let (x0, x1) = (grid[0], grid[1]);
        let density = |rho: f64| {
            let jet = self.table.jet(rho);
            w(&jet) * jet.f.powi(self.n as i32 - 1)
        };
        let g0 = density(x0);
        let g1 = density(x1);
        if g0 == 0.0 || !g0.is_finite() || !g1.is_finite() || g0 * g1 <= 0.0 {
            return 0.0;
        }
        let p = (g1 / g0).ln() / (x1 / x0).ln();
        if !p.is_finite() || p <= -0.95 {
            return 0.0;
        }
        g0 * x0 / (p + 1.0)
    }

    /// `∫_0^ρ w f^{n-1} dρ`, finishing the last partial panel with a fresh
    /// Gauss rule.
    pub fn partial<F: Fn(&FieldJet) -> f64>(&self, vi: &VolumeIntegral, w: &F, rho: f64) -> f64 {
        let grid = self.table.green().grid();
        let j = match grid.binary_search_by(|x| x.partial_cmp(&rho).unwrap()) {
            Ok(i) => return vi.prefix[i],
            Err(i) => i.saturating_sub(1).min(grid.len() - 2),
        };
        let mut acc = vi.prefix[j];
        let a = grid[j];
        if rho > a {
            let mid = 0.5 * (a + rho);
            let half = 0.5 * (rho - a);
            for (x, gw) in GAUSS7_NODES.iter().zip(GAUSS7_WEIGHTS.iter()) {
                let jet = self.table.jet(mid + half * x);
                acc += gw * half * jet.f.powi(self.n as i32 - 1) * w(&jet);
            }
        }
        acc
    }

    pub fn tail<F: Fn(&FieldJet) -> f64>(&self, vi: &VolumeIntegral, w: &F, rho: f64) -> f64 {
        vi.total() - self.partial(vi, w, rho)
    }

    /// Default level grid: uniform in the level value on `[m/count, m]`.
    pub fn level_grid(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|i| self.m * i as f64 / count as f64).collect()
    }

    pub fn sn_r(&self, r: f64) -> f64 {
        2.0 * self.table.green().trig.sn(0.5 * r)
    }

    pub fn cs_r(&self, r: f64) -> f64 {
        self.table.green().trig.cs(0.5 * r)
    }

    /// Boundary term of `I_w`:
    /// `(2 sn_k(r/2))^{1-n} cs_k(r/2) ∫_{b=r} w ‖∇b‖
    ///  = ω (2 sn_k(r/2))^{1-n} w y' f^{n-1}` at `ρ(r)`.
    pub fn boundary_i<F: Fn(&FieldJet) -> f64>(&self, w: &F, r: f64, rho: f64) -> f64 {
        let jet = self.table.jet(rho);
        self.omega
            * self.sn_r(r).powi(1 - self.n as i32)
            * w(&jet)
            * jet.yp
            * jet.f.powi(self.n as i32 - 1)
    }
}

/// One manifold's complete functional data: named series, their scaled and
/// combined forms, and the closed-form derivative expressions.
pub struct FunctionalSet {
    pub omega: f64,
    pub m: f64,
    pub n: u32,
    pub k: f64,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub i1: Vec<f64>,
    pub j1: Vec<f64>,
    pub w1: Vec<f64>,
    pub a: Vec<f64>,
    pub v: Vec<f64>,
    pub v_infty: Vec<f64>,
    /// `(2 sn_k(r/2))^{2-n} (A - ω)`.
    pub a_scaled: Vec<f64>,
    /// `A - 2(n-1)V`.
    pub amv: Vec<f64>,
    pub betas: Vec<f64>,
    pub a_beta: Vec<Vec<f64>>,
    pub v_beta: Vec<Vec<f64>>,
    /// `A_β - 2(n-2)V_β`.
    pub abmv: Vec<Vec<f64>>,
    pub d_a_formula: Vec<f64>,
    pub d_a_scaled_formula: Vec<f64>,
    pub d_amv_formula: Vec<f64>,
    pub d_v_relation: Vec<f64>,
    pub d_vinf_relation: Vec<f64>,
    pub d_a_beta_formula: Vec<Vec<f64>>,
    pub d_abmv_formula: Vec<Vec<f64>>,
    pub d_v_beta_relation: Vec<Vec<f64>>,
    /// `(nk/4) ∫_M G`, equal to ω on every admissible manifold.
    pub g_total: f64,
}

impl FunctionalSet {
    /// Default β list: the monotonicity threshold `(n-2)/(n-1)` plus 1, 2, 3.
    pub fn default_betas(n: u32) -> Vec<f64> {
        vec![(n as f64 - 2.0) / (n as f64 - 1.0), 1.0, 2.0, 3.0]
    }

    pub fn compute(ev: &Evaluator, r_grid: &[f64], betas: &[f64]) -> Self {
        let n = ev.n;
        let nf = n as f64;
        let k = ev.k;
        let om = ev.omega;
        let green = ev.table.green();
        let rho: Vec<f64> = r_grid.iter().map(|&r| green.rho_of_b(r)).collect();

        let w_one = |_: &FieldJet| 1.0;
        let w_vsq = |jet: &FieldJet| jet.v_sq;
        let g_one = |jet: &FieldJet| jet.u;
        let g_vsq = |jet: &FieldJet| jet.v_sq * jet.u;
        let j_core = move |jet: &FieldJet| jet.yp * jet.yp - 0.25 * k * jet.y * jet.y;
        let j_vsq = move |jet: &FieldJet| jet.v_sq * j_core(jet);
        let w_core = move |jet: &FieldJet| {
            (jet.yp * jet.yp - 0.25 * nf * k / (nf - 2.0) * jet.y * jet.y) / (jet.y * jet.y)
        };
        let jinf_tail =
            move |jet: &FieldJet| jet.y.powi(-(n as i32)) * (1.0 - jet.v_sq) * jet.yp * jet.yp;
        let g_vsq_log = move |jet: &FieldJet| (jet.v_sq - 1.0) * jet.u * jet.log_sn_half;
        let q22 = move |jet: &FieldJet| jet.y.powi(2 - 2 * n as i32) * jet.q_excess(n, k);
        let qn = move |jet: &FieldJet| jet.y.powi(-(n as i32)) * jet.q_excess(n, k);
        let qp = move |jet: &FieldJet| jet.q_excess(n, k);

        let t_g1 = ev.integral(g_one);
        let t_gv = ev.integral(g_vsq);
        let t_j1 = ev.integral(j_core);
        let t_jv = ev.integral(j_vsq);
        let t_w1 = ev.integral(w_core);
        let t_tail = ev.integral(jinf_tail);
        let t_glog = ev.integral(g_vsq_log);
        let t_q22 = ev.integral(q22);
        let t_qn = ev.integral(qn);
        let t_qp = ev.integral(qp);

        let pot_i = 0.25 * nf * k;
        let mut set = FunctionalSet {
            omega: om,
            m: ev.m,
            n,
            k,
            r: r_grid.to_vec(),
            rho: rho.clone(),
            i1: Vec::new(),
            j1: Vec::new(),
            w1: Vec::new(),
            a: Vec::new(),
            v: Vec::new(),
            v_infty: Vec::new(),
            a_scaled: Vec::new(),
            amv: Vec::new(),
            betas: betas.to_vec(),
            a_beta: vec![Vec::new(); betas.len()],
            v_beta: vec![Vec::new(); betas.len()],
            abmv: vec![Vec::new(); betas.len()],
            d_a_formula: Vec::new(),
            d_a_scaled_formula: Vec::new(),
            d_amv_formula: Vec::new(),
            d_v_relation: Vec::new(),
            d_vinf_relation: Vec::new(),
            d_a_beta_formula: vec![Vec::new(); betas.len()],
            d_abmv_formula: vec![Vec::new(); betas.len()],
            d_v_beta_relation: vec![Vec::new(); betas.len()],
            g_total: pot_i * om * t_g1.total(),
        };

        for (&r, &rr) in r_grid.iter().zip(rho.iter()) {
            let snr = ev.sn_r(r);
            let csr = ev.cs_r(r);
            let tn2 = snr / (2.0 * csr); // tn_k(r/2)

            let i1 = ev.boundary_i(&w_one, r, rr) + pot_i * om * ev.partial(&t_g1, &g_one, rr);
            let a = ev.boundary_i(&w_vsq, r, rr) + pot_i * om * ev.partial(&t_gv, &g_vsq, rr);
            let j1 = snr.powi(-(n as i32)) * om * ev.partial(&t_j1, &j_core, rr)
                + 0.25 * k * om * ev.partial(&t_g1, &g_one, rr);
            let v = snr.powi(-(n as i32)) * om * ev.partial(&t_jv, &j_vsq, rr)
                + 0.25 * k * om * ev.partial(&t_gv, &g_vsq, rr);
            let w1 = snr.powi(2 - n as i32) * om * ev.partial(&t_w1, &w_core, rr)
                + pot_i / (nf - 2.0) * om * ev.partial(&t_g1, &g_one, rr);
            let v_infty = om * ev.tail(&t_tail, &jinf_tail, rr)
                + pot_i
                    * om
                    * ((0.5 * snr).ln()
                        * (ev.partial(&t_gv, &g_vsq, rr) - ev.partial(&t_g1, &g_one, rr))
                        - ev.partial(&t_glog, &g_vsq_log, rr));

            set.i1.push(i1);
            set.j1.push(j1);
            set.w1.push(w1);
            set.a.push(a);
            set.v.push(v);
            set.v_infty.push(v_infty);
            set.a_scaled.push(snr.powi(2 - n as i32) * (a - om));
            set.amv.push(a - 2.0 * (nf - 1.0) * v);

            set.d_a_formula
                .push(-8.0 * snr.powi(n as i32 - 3) * csr * om * ev.tail(&t_q22, &q22, rr));
            set.d_a_scaled_formula
                .push(8.0 * snr.powi(1 - n as i32) * csr * om * ev.partial(&t_qn, &qn, rr));
            set.d_amv_formula
                .push(8.0 * csr / snr.powi(n as i32 + 1) * om * ev.partial(&t_qp, &qp, rr));
            set.d_v_relation.push((a - nf * v) / (2.0 * tn2));
            set.d_vinf_relation.push((a - om) / (2.0 * tn2));
        }

        for (bi, &beta) in betas.iter().enumerate() {
            let w_vb = move |jet: &FieldJet| jet.v_sq.powf(0.5 * beta);
            let g_vb = move |jet: &FieldJet| jet.v_sq.powf(0.5 * beta) * jet.u;
            let w_vb_core = move |jet: &FieldJet| jet.v_sq.powf(0.5 * beta) * w_core(jet);
            let beta_tilde = move |jet: &FieldJet| {
                1.0 + (beta - 1.0) * (nf - 1.0)
                    + (nf - 1.0) * (2.0 - beta) * k * jet.psi / jet.v_sq
            };
            let ab_outer = move |jet: &FieldJet| {
                jet.y.powi(4 - 2 * n as i32)
                    * jet.v.powf(beta - 2.0)
                    * jet.grad_sn
                    * jet.grad_sn
                    * (jet.ric_nu - (nf - 1.0) * k)
            };
            let ab_inner = move |jet: &FieldJet| {
                jet.y.powi(2 - 2 * n as i32)
                    * jet.v.powf(beta - 2.0)
                    * beta_tilde(jet)
                    * jet.b_nu_nu
                    * jet.b_nu_nu
            };
            let e_outer = move |jet: &FieldJet| {
                jet.v.powf(beta - 2.0) * jet.grad_sn * jet.grad_sn * (jet.ric_nu - (nf - 1.0) * k)
            };
            let e_inner = move |jet: &FieldJet| {
                jet.v.powf(beta - 2.0) / jet.psi * beta_tilde(jet) * jet.b_nu_nu * jet.b_nu_nu
            };
            let t_gvb = ev.integral(g_vb);
            let t_wvb = ev.integral(w_vb_core);
            let t_ab1 = ev.integral(ab_outer);
            let t_ab2 = ev.integral(ab_inner);
            let t_e1 = ev.integral(e_outer);
            let t_e2 = ev.integral(e_inner);

            for (&r, &rr) in r_grid.iter().zip(rho.iter()) {
                let snr = ev.sn_r(r);
                let csr = ev.cs_r(r);
                let tn2 = snr / (2.0 * csr);
                let ab = ev.boundary_i(&w_vb, r, rr) + pot_i * om * ev.partial(&t_gvb, &g_vb, rr);
                let vb = snr.powi(2 - n as i32) * om * ev.partial(&t_wvb, &w_vb_core, rr)
                    + pot_i / (nf - 2.0) * om * ev.partial(&t_gvb, &g_vb, rr);
                set.a_beta[bi].push(ab);
                set.v_beta[bi].push(vb);
                set.abmv[bi].push(ab - 2.0 * (nf - 2.0) * vb);
                // the integrals run over the superlevel set {b ≥ r}: only the
                // tail form is compatible with A_2 = A and the A' expression
                let d_ab = -snr.powi(n as i32 - 3)
                    * csr
                    * (4.0 * beta * om * ev.tail(&t_ab1, &ab_outer, rr)
                        + 4.0 * beta / (nf - 1.0) * om * ev.tail(&t_ab2, &ab_inner, rr));
                set.d_a_beta_formula[bi].push(d_ab);
                let d_abmv = 4.0 * beta * csr / snr.powi(n as i32 - 1)
                    * om
                    * ev.partial(&t_e1, &e_outer, rr)
                    + beta * csr / ((nf - 1.0) * snr.powi(n as i32 - 1))
                        * om
                        * ev.partial(&t_e2, &e_inner, rr);
                set.d_abmv_formula[bi].push(d_abmv);
                set.d_v_beta_relation[bi].push((ab - (nf - 2.0) * vb) / (2.0 * tn2));
            }
        }
        set
    }

    /// Quadratic extrapolation of the three smallest-level values to `r = 0`.
    pub fn limit_at_origin(&self, series: &[f64]) -> f64 {
        let (x0, x1, x2) = (self.r[0], self.r[1], self.r[2]);
        let (y0, y1, y2) = (series[0], series[1], series[2]);
        y0 * (x1 * x2) / ((x1 - x0) * (x2 - x0))
            + y1 * (x0 * x2) / ((x0 - x1) * (x2 - x1))
            + y2 * (x0 * x1) / ((x0 - x2) * (x1 - x2))
    }
}

/// Largest adjacent increase of a series; at most rounding for a
/// non-increasing series.
pub fn max_adjacent_increase(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest adjacent decrease; at most rounding for a non-decreasing series.
pub fn max_adjacent_decrease(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max)
}

/// Difference-quotient derivative on a uniform grid: fourth-order central in
/// the interior, second-order one-sided near the ends.
pub fn numeric_derivative(r: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let h = r[1] - r[0];
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = if i >= 2 && i + 2 < n {
            (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2])
                / (12.0 * h)
        } else if i + 2 < n {
            (-3.0 * values[i] + 4.0 * values[i + 1] - values[i + 2]) / (2.0 * h)
        } else {
            (3.0 * values[i] - 4.0 * values[i - 1] + values[i - 2]) / (2.0 * h)
        };
    }
    d
}

/// Indices safe for derivative cross-checks: the one-sided stencils at the
/// grid ends are excluded.
pub fn derivative_check_range(len: usize) -> std::ops::Range<usize> {
    2..len.saturating_sub(2)
}
