//! Shared numerical kernels: Gauss panels, Hermite dense output in Newton
//! form, Richardson extrapolation, and bracketed root finding.

/// 7-point Gauss-Legendre nodes on [-1, 1].
pub const GAUSS7_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_17,
    0.0,
    0.405_845_151_377_397_17,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];

/// 7-point Gauss-Legendre weights on [-1, 1].
pub const GAUSS7_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_95,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_95,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Integrate `f` over `[a, b]` with a single 7-point Gauss panel.
pub fn gauss7<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GAUSS7_NODES.iter().zip(GAUSS7_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive quadrature by panel bisection; the error estimate of a panel is
/// the difference between the whole-panel and split-panel 7-point rules.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gauss7(f, a, mid);
        let right = gauss7(f, mid, b);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= tol {
            return split;
        }
        recurse(f, a, mid, left, 0.5 * tol, depth - 1) + recurse(f, mid, b, right, 0.5 * tol, depth - 1)
    }
    let whole = gauss7(f, a, b);
    recurse(f, a, b, whole, tol, 48)
}

/// Newton-form Hermite interpolant through nodes with derivative data.
///
/// `data[i]` holds `[s, s', s'', ...]` at `xs[i]`; any number of derivatives
/// per node. Returns the expanded knot vector and Newton coefficients.
pub fn hermite_newton(xs: &[f64], data: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let total: usize = data.iter().map(|d| d.len()).sum();
    let mut z = Vec::with_capacity(total);
    let mut owner = Vec::with_capacity(total);
    for (i, d) in data.iter().enumerate() {
        for _ in 0..d.len() {
            z.push(xs[i]);
            owner.push(i);
        }
    }
    let mut c: Vec<f64> = owner.iter().map(|&i| data[i][0]).collect();
    let mut fact = 1.0;
    for j in 1..total {
        fact *= j as f64;
        for i in (j..total).rev() {
            c[i] = if z[i] == z[i - j] {
                data[owner[i]][j] / fact
            } else {
                (c[i] - c[i - 1]) / (z[i] - z[i - j])
            };
        }
    }
    (z, c)
}

/// Evaluate a Newton-form polynomial and its first three derivatives.
pub fn newton_eval_jet3(z: &[f64], c: &[f64], x: f64) -> [f64; 4] {
    let m = c.len();
    let mut p = c[m - 1];
    let (mut dp, mut d2p, mut d3p) = (0.0, 0.0, 0.0);
    for i in (0..m - 1).rev() {
        let dx = x - z[i];
        d3p = d3p * dx + 3.0 * d2p;
        d2p = d2p * dx + 2.0 * dp;
        dp = dp * dx + p;
        p = p * dx + c[i];
    }
    [p, dp, d2p, d3p]
}

/// Richardson tableau on a value sequence at step ratios of 2, eliminating
/// error terms of the given orders in turn. Returns the diagonal.
pub fn richardson_diagonal(vals: &[f64], orders: &[u32]) -> Vec<f64> {
    let mut col = vals.to_vec();
    let mut diag = vec![*col.last().expect("non-empty sequence")];
    for (level, &p) in orders.iter().enumerate() {
        if col.len() < 2 {
            break;
        }
        let fac = (2.0f64).powi(p as i32) - 1.0;
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            // col[i] at step h, col[i+1] at step h/2
            next.push(col[i + 1] + (col[i + 1] - col[i]) / fac);
        }
        col = next;
        diag.push(*col.last().unwrap());
        let _ = level;
    }
    diag
}

/// Bisection for a root of `f` on `[a, b]`; assumes a sign change and a
/// monotone-enough function. Tolerance is on `|f|`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, ftol: f64, max_iter: u32) -> f64 {
    let mut fa = f(a);
    if fa.abs() <= ftol {
        return a;
    }
    let fb = f(b);
    if fb.abs() <= ftol {
        return b;
    }
    if fa.signum() == fb.signum() {
        // No bracket: return the endpoint with the smaller residual.
        return if fa.abs() < fb.abs() { a } else { b };
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= ftol || 0.5 * (b - a) < f64::EPSILON * mid.abs() {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
