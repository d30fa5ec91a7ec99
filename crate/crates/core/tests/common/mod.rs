//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library: profiles come from fixed-step RK4,
//! the tangential disc from a one-dimensional bisection on the endpoint aspect
//! ratio, and `h` from a second-order finite-difference boundary value solve.
#![allow(dead_code)]

use std::f64::consts::PI;

fn rhs(c: f64, y: [f64; 3]) -> [f64; 3] {
    let (r, z, phi) = (y[0], y[1], y[2]);
    [
        -phi.cos(),
        -phi.sin(),
        2.0 * phi.cos() / z + phi.sin() / r - 2.0 * c,
    ]
}

fn rk4(c: f64, y: [f64; 3], h: f64) -> [f64; 3] {
    let add =
        |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = rhs(c, y);
    let k2 = rhs(c, add(y, k1, 0.5 * h));
    let k3 = rhs(c, add(y, k2, 0.5 * h));
    let k4 = rhs(c, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Leading-order axis series, accurate to `O(τ³)`.
fn series(c: f64, z0: f64, tau: f64) -> [f64; 3] {
    let a = 1.0 / z0 + c;
    [tau, z0 - 0.5 * a * tau * tau, PI - a * tau]
}

/// Samples on the uniform grid `τ_k = k ℓ / n`, `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct OracleCurve {
    pub c: f64,
    pub z0: f64,
    pub ell: f64,
    pub tau: Vec<f64>,
    pub y: Vec<[f64; 3]>,
}

const SEED: f64 = 1e-5;

/// Arc length at which the tangent first becomes horizontal.
pub fn horizontal_tangent_length(c: f64, z0: f64) -> f64 {
    let t0 = SEED * z0.abs();
    let h = 2e-4 * z0.abs().min(1.0 / c);
    let mut y = series(c, z0, t0);
    let mut t = t0;
    loop {
        let next = rk4(c, y, h);
        if next[2] <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if rk4(c, y, mid)[2] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return t + 0.5 * (lo + hi);
        }
        y = next;
        t += h;
        assert!(t < 1e3 * z0.abs(), "no horizontal tangent");
    }
}

pub fn oracle_curve(c: f64, z0: f64, n: usize) -> OracleCurve {
    let ell = horizontal_tangent_length(c, z0);
    let h = ell / n as f64;
    let t0 = SEED * z0.abs();
    let mut y = vec![[0.0, z0, PI]];
    let mut state = rk4(c, series(c, z0, t0), h - t0);
    y.push(state);
    for _ in 2..=n {
        state = rk4(c, state, h);
        y.push(state);
    }
    OracleCurve {
        c,
        z0,
        ell,
        tau: (0..=n).map(|k| k as f64 * h).collect(),
        y,
    }
}

/// State after arc length `ell` from the axis, in `n` RK4 steps.
pub fn state_after(c: f64, z0: f64, ell: f64, n: usize) -> [f64; 3] {
    let h = ell / n as f64;
    let t0 = SEED * z0.abs();
    let mut y = rk4(c, series(c, z0, t0), h - t0);
    for _ in 1..n {
        y = rk4(c, y, h);
    }
    y
}

/// Boundary point `(r, z)` of the profile with horizontal end tangent.
pub fn endpoint(c: f64, z0: f64) -> [f64; 2] {
    let y = oracle_curve(c, z0, 4000).y;
    let last = y[y.len() - 1];
    [last[0], last[1]]
}

/// `(c_o, z_o)` of the tangential disc spanning `(R, Z)`.
///
/// Profiles for `(c, z_o)` are those for `(1, c z_o)` scaled by `1/c`, so the
/// aspect ratio `Z/R` fixes `k = -c z_o` and `R` then fixes `c`.
pub fn sigma0(radius: f64, height: f64) -> (f64, f64) {
    let target = height / radius;
    let ratio = |k: f64| {
        let e = endpoint(1.0, -k);
        e[1] / e[0] - target
    };
    let ks: Vec<f64> = (0..60).map(|i| 1.0 + 1e-3 * 1.2f64.powi(i)).collect();
    let mut bracket = None;
    for w in ks.windows(2) {
        if ratio(w[0]).signum() != ratio(w[1]).signum() {
            assert!(bracket.is_none(), "aspect ratio not monotone");
            bracket = Some((w[0], w[1]));
        }
    }
    let (mut lo, mut hi) = bracket.expect("aspect ratio bracketed");
    let f_lo = ratio(lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    let c = endpoint(1.0, -k)[0] / radius;
    (c, -k / c)
}

/// Second-order finite-difference solution of `P[u] = -2`, `u'(0) = 0`,
/// `u(ℓ) = 0` on the oracle grid; returns the samples and `h_ς(0) = -u'(ℓ)`.
pub fn solve_h_fd(curve: &OracleCurve) -> (Vec<f64>, f64) {
    let n = curve.tau.len() - 1;
    let h = curve.ell / n as f64;
    let (c, z0) = (curve.c, curve.z0);
    let a = 1.0 / z0 + c;
    let mut lower = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    let mut rhs_v = vec![-2.0; n + 1];

    diag[0] = -4.0 / (h * h) + 2.0 * a * a - 2.0 / (z0 * z0);
    upper[0] = 4.0 / (h * h);
    for k in 1..n {
        let [r, z, phi] = curve.y[k];
        let (s, co) = phi.sin_cos();
        let dphi = 2.0 * co / z + s / r - 2.0 * c;
        let drift = -co / r + 2.0 * s / z;
        let v = s * s / (r * r) + dphi * dphi - 2.0 * co * co / (z * z);
        lower[k] = 1.0 / (h * h) - drift / (2.0 * h);
        diag[k] = -2.0 / (h * h) + v;
        upper[k] = 1.0 / (h * h) + drift / (2.0 * h);
    }
    diag[n] = 1.0;
    rhs_v[n] = 0.0;

    // Thomas algorithm
    for k in 1..=n {
        let w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs_v[k] -= w * rhs_v[k - 1];
    }
    let mut u = vec![0.0; n + 1];
    u[n] = rhs_v[n] / diag[n];
    for k in (0..n).rev() {
        u[k] = (rhs_v[k] - upper[k] * u[k + 1]) / diag[k];
    }
    let slope = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
    (u, -slope)
}

/// `h_ς(0)` from grids with `n` and `2n` intervals, Richardson extrapolated.
pub fn h_prime_boundary(c: f64, z0: f64, n: usize) -> f64 {
    let coarse = solve_h_fd(&oracle_curve(c, z0, n)).1;
    let fine = solve_h_fd(&oracle_curve(c, z0, 2 * n)).1;
    (4.0 * fine - coarse) / 3.0
}

/// Sup norm of a slice.
pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
