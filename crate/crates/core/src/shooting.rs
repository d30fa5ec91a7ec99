//! Boundary matching: the tangential disc `Σ₀` spanning a prescribed circle,
//! and the fixed-boundary family obtained by varying the spontaneous curvature.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, TraceEntry};
use crate::profile::{
    integrate_profile, IntegratorSettings, ModelParams, ProfileCurve, StopCondition,
};
use crate::roots::brent;

/// The boundary circle `{r = radius, z = height}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCircle {
    radius: f64,
    height: f64,
}

impl BoundaryCircle {
    pub fn new(radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParams(format!("R must be > 0, got {radius}")));
        }
        if !(height < 0.0 && height.is_finite()) {
            return Err(Error::InvalidParams(format!("Z must be < 0, got {height}")));
        }
        Ok(Self { radius, height })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn scale(&self) -> f64 {
        self.radius.max(self.height.abs())
    }

    pub fn scaled(&self, mu: f64) -> Result<Self> {
        Self::new(mu * self.radius, mu * self.height)
    }
}

#[derive(Debug, Clone)]
pub struct Sigma0Solution {
    pub params: ModelParams,
    pub curve: ProfileCurve,
    pub circle: BoundaryCircle,
    /// Tangent angle at the boundary; zero up to event tolerance.
    pub boundary_phi: f64,
    /// Distance from the curve endpoint to the boundary circle.
    pub match_residual: f64,
    pub iterations: usize,
    /// Whether the coarse grid restart was needed.
    pub used_grid_restart: bool,
}

/// A fixed-boundary family member: the curve for spontaneous curvature `c`
/// through the boundary point, truncated at its first passage.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub c: f64,
    pub z_o: f64,
    pub curve: ProfileCurve,
    pub contact_angle: f64,
    pub match_residual: f64,
    /// `c z_o < −1`; family members are not required to satisfy it.
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Finite-difference step in the log coordinates of the Newton iteration.
    pub jacobian_step: f64,
    /// Success threshold for the endpoint mismatch, relative to `max(R, |Z|)`.
    pub match_tol: f64,
    /// Grid size per axis of the restart scan.
    pub grid: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            max_halvings: 8,
            jacobian_step: 1e-6,
            match_tol: 1e-10,
            grid: 32,
        }
    }
}

/// Newton works in `u = ln c_o`, `v = ln(−c_o z_o − 1)`, which covers exactly
/// the admissible region.
fn to_log(p: &ModelParams) -> [f64; 2] {
    [p.c_o().ln(), (-p.c_o() * p.z_o() - 1.0).ln()]
}

fn from_log(x: [f64; 2]) -> Result<ModelParams> {
    let c = x[0].exp();
    ModelParams::new(c, -(1.0 + x[1].exp()) / c)
}

fn sigma0_mismatch(
    x: [f64; 2],
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
) -> Result<([f64; 2], ProfileCurve)> {
    let params = from_log(x)?;
    let curve = integrate_profile(&params, &StopCondition::horizontal_tangent(), settings)?;
    let end = curve.endpoint();
    Ok(([end.r - circle.radius, end.z - circle.height], curve))
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

struct NewtonOutcome {
    x: [f64; 2],
    residual: f64,
    curve: Option<ProfileCurve>,
    iterations: usize,
}

fn newton_sigma0(
    x0: [f64; 2],
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
    opts: &ShootingOptions,
    trace: &mut Vec<TraceEntry>,
) -> NewtonOutcome {
    let scale = circle.scale();
    let target = 1e-12 * scale;
    let mut x = x0;
    let (mut f, mut curve) = match sigma0_mismatch(x, circle, settings) {
        Ok((f, c)) => (f, Some(c)),
        Err(_) => {
            return NewtonOutcome {
                x,
                residual: f64::INFINITY,
                curve: None,
                iterations: 0,
            }
        }
    };
    let mut res = norm(f);
    let mut iterations = 0;
    let record = |trace: &mut Vec<TraceEntry>, it: usize, x: [f64; 2], res: f64| {
        if let Ok(p) = from_log(x) {
            trace.push(TraceEntry {
                iteration: it,
                c_o: p.c_o(),
                z_o: p.z_o(),
                mismatch: res,
            });
        }
    };
    record(trace, 0, x, res);

    while iterations < opts.max_iterations && res > target {
        iterations += 1;
        let mut jac = [[0.0; 2]; 2];
        let mut ok = true;
        for k in 0..2 {
            let mut xp = x;
            xp[k] += opts.jacobian_step;
            match sigma0_mismatch(xp, circle, settings) {
                Ok((fp, _)) => {
                    jac[0][k] = (fp[0] - f[0]) / opts.jacobian_step;
                    jac[1][k] = (fp[1] - f[1]) / opts.jacobian_step;
                }
                Err(_) => ok = false,
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !ok || det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..=opts.max_halvings {
            let xt = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
            if let Ok((ft, ct)) = sigma0_mismatch(xt, circle, settings) {
                if norm(ft) < res {
                    x = xt;
                    f = ft;
                    res = norm(ft);
                    curve = Some(ct);
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        record(trace, iterations, x, res);
        if !improved {
            // stagnation at round-off level
            break;
        }
    }
    NewtonOutcome {
        x,
        residual: res,
        curve,
        iterations,
    }
}

fn default_seed(circle: &BoundaryCircle) -> ModelParams {
    let c = 1.5 * (1.0 / circle.height.abs()).max(1.0 / circle.radius);
    let mut z = circle.height - circle.radius;
    if c * z >= -1.0 {
        z = -2.0 / c;
    }
    ModelParams::new(c, z).expect("seed is valid")
}

/// Finds `(c_o, z_o)` whose tangential disc ends on `circle`.
pub fn shoot_sigma0(
    circle: &BoundaryCircle,
    seed: Option<ModelParams>,
    settings: &IntegratorSettings,
    opts: &ShootingOptions,
) -> Result<Sigma0Solution> {
    let scale = circle.scale();
    let accept = opts.match_tol * scale;
    let mut trace = Vec::new();
    let seed = match seed {
        Some(p) if p.sigma0_admissible() => p,
        _ => default_seed(circle),
    };

    let mut outcome = newton_sigma0(to_log(&seed), circle, settings, opts, &mut trace);
    let mut used_grid_restart = false;
    if outcome.residual > accept {
        used_grid_restart = true;
        let n = opts.grid.max(2);
        let (u_lo, u_hi) = ((0.05 / scale).ln(), (50.0 / scale).ln());
        let (v_lo, v_hi) = (1e-3f64.ln(), 1e2f64.ln());
        let nodes: Vec<[f64; 2]> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                [
                    u_lo + (u_hi - u_lo) * i as f64 / (n - 1) as f64,
                    v_lo + (v_hi - v_lo) * j as f64 / (n - 1) as f64,
                ]
            })
            .collect();
        let mut scored: Vec<(f64, [f64; 2])> = nodes
            .par_iter()
            .filter_map(|&x| {
                sigma0_mismatch(x, circle, settings)
                    .ok()
                    .map(|(f, _)| (norm(f), x))
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, x) in scored.iter().take(4) {
            let retry = newton_sigma0(x, circle, settings, opts, &mut trace);
            if retry.residual < outcome.residual {
                outcome = retry;
            }
            if outcome.residual <= accept {
                break;
            }
        }
    }

    match outcome.curve {
        Some(curve) if outcome.residual <= accept => Ok(Sigma0Solution {
            params: from_log(outcome.x)?,
            boundary_phi: curve.endpoint().phi,
            curve,
            circle: *circle,
            match_residual: outcome.residual,
            iterations: outcome.iterations,
            used_grid_restart,
        }),
        _ => Err(Error::NoConvergence {
            reason: format!(
                "endpoint mismatch {:e} above {:e} after Newton and grid restart",
                outcome.residual, accept
            ),
            trace,
        }),
    }
}

/// Signed normal offset of the boundary point from the curve at its first
/// closest approach.
fn member_offset(
    c: f64,
    z_o: f64,
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
) -> Result<f64> {
    let params = ModelParams::new(c, z_o)?;
    let stop = StopCondition::point(circle.radius, circle.height, f64::INFINITY);
    let curve = integrate_profile(&params, &stop, settings)?;
    let e = curve.endpoint();
    Ok(-(e.r - circle.radius) * e.phi.sin() + (e.z - circle.height) * e.phi.cos())
}

fn solve_member_z(
    c: f64,
    z_guess: f64,
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
) -> Result<f64> {
    let scale = circle.scale();
    let target = 1e-12 * scale;
    let eval = |z: f64| member_offset(c, z, circle, settings);

    let mut z = z_guess;
    let mut f = eval(z)?;
    for _ in 0..30 {
        if f.abs() <= target {
            return Ok(z);
        }
        let dz = 1e-7 * z.abs();
        let fp = eval(z + dz)?;
        let slope = (fp - f) / dz;
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let step = -f / slope;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..=8 {
            let zt = z + lambda * step;
            if zt < 0.0 {
                if let Ok(ft) = eval(zt) {
                    if ft.abs() < f.abs() {
                        z = zt;
                        f = ft;
                        improved = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if f.abs() <= 1e-10 * scale {
        return Ok(z);
    }

    // bracket scan around the guess
    let f0 = eval(z_guess)?;
    let mut width = 1e-3 * scale;
    for _ in 0..12 {
        for side in [1.0, -1.0] {
            let zb = z_guess + side * width;
            if zb >= 0.0 {
                continue;
            }
            if let Ok(fb) = eval(zb) {
                if fb.signum() != f0.signum() {
                    let mut failed = false;
                    let root = brent(
                        |t| {
                            eval(t).unwrap_or_else(|_| {
                                failed = true;
                                f64::NAN
                            })
                        },
                        z_guess,
                        zb,
                        f0,
                        fb,
                        1e-15 * scale,
                    );
                    if !failed {
                        return Ok(root);
                    }
                }
            }
        }
        width *= 2.0;
    }
    Err(Error::NoConvergence {
        reason: format!("no axis height found for family member c = {c}"),
        trace: vec![TraceEntry {
            iteration: 0,
            c_o: c,
            z_o: z,
            mismatch: f,
        }],
    })
}

fn finish_member(
    c: f64,
    z_o: f64,
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
) -> Result<FamilyMember> {
    let params = ModelParams::new(c, z_o)?;
    let stop = StopCondition::point(circle.radius, circle.height, 1e-8 * circle.radius);
    let curve = integrate_profile(&params, &stop, settings)?;
    let end = curve.endpoint();
    Ok(FamilyMember {
        c,
        z_o,
        contact_angle: end.phi,
        match_residual: (end.r - circle.radius).hypot(end.z - circle.height),
        admissible: params.sigma0_admissible(),
        curve,
    })
}

/// Relative size of a continuation substep in `c`.
const MAX_RELATIVE_SUBSTEP: f64 = 0.005;

/// Continues the member at `(c_from, z_from)` to curvature `c`.
fn continue_member(
    c_from: f64,
    z_from: f64,
    c: f64,
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
) -> Result<FamilyMember> {
    let span = c - c_from;
    let steps = (span.abs() / (MAX_RELATIVE_SUBSTEP * c_from.min(c)))
        .ceil()
        .max(1.0) as usize;
    let mut prev: Option<(f64, f64)> = None;
    let (mut ck, mut zk) = (c_from, z_from);
    for k in 1..=steps {
        let cn = if k == steps {
            c
        } else {
            c_from + span * k as f64 / steps as f64
        };
        let guess = match prev {
            Some((cp, zp)) => zk + (zk - zp) / (ck - cp) * (cn - ck),
            None => zk,
        };
        let zn = solve_member_z(cn, guess, circle, settings)
            .or_else(|_| solve_member_z(cn, zk, circle, settings))?;
        prev = Some((ck, zk));
        ck = cn;
        zk = zn;
    }
    finish_member(c, zk, circle, settings)
}

/// Family member at curvature `c`, continued from `seed`.
pub fn shoot_family_member(
    c: f64,
    seed: &Sigma0Solution,
    settings: &IntegratorSettings,
) -> Result<FamilyMember> {
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("c must be > 0, got {c}")));
    }
    continue_member(
        seed.params.c_o(),
        seed.params.z_o(),
        c,
        &seed.circle,
        settings,
    )
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub c: f64,
    pub member: std::result::Result<FamilyMember, String>,
}

#[derive(Debug, Clone)]
pub struct FamilySweep {
    pub sigma0: Sigma0Solution,
    pub entries: Vec<SweepEntry>,
}

impl FamilySweep {
    pub fn members(&self) -> impl Iterator<Item = &FamilyMember> {
        self.entries.iter().filter_map(|e| e.member.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &str)> {
        self.entries
            .iter()
            .filter_map(|e| e.member.as_ref().err().map(|m| (e.c, m.as_str())))
    }
}

fn march(nodes: &[f64], sigma0: &Sigma0Solution, settings: &IntegratorSettings) -> Vec<SweepEntry> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut from = (sigma0.params.c_o(), sigma0.params.z_o());
    for &c in nodes {
        let member =
            continue_member(from.0, from.1, c, &sigma0.circle, settings).map_err(|e| e.to_string());
        if let Ok(m) = &member {
            from = (m.c, m.z_o);
        }
        out.push(SweepEntry { c, member });
    }
    out
}

/// `n` members with `c` evenly spaced in `[c_min, c_max]`, continued outward
/// from `Σ₀` in both directions.
pub fn family_sweep(
    circle: &BoundaryCircle,
    c_min: f64,
    c_max: f64,
    n: usize,
    settings: &IntegratorSettings,
) -> Result<FamilySweep> {
    if n == 0 || !(c_min > 0.0) || !(c_max >= c_min) {
        return Err(Error::InvalidParams(format!(
            "sweep needs n >= 1 and 0 < c_min <= c_max, got n = {n}, [{c_min}, {c_max}]"
        )));
    }
    let sigma0 = shoot_sigma0(circle, None, settings, &ShootingOptions::default())?;
    family_sweep_from(&sigma0, c_min, c_max, n, settings)
}

/// As [`family_sweep`] with a known `Σ₀`.
pub fn family_sweep_from(
    sigma0: &Sigma0Solution,
    c_min: f64,
    c_max: f64,
    n: usize,
    settings: &IntegratorSettings,
) -> Result<FamilySweep> {
    if n == 0 || !(c_min > 0.0) || !(c_max >= c_min) {
        return Err(Error::InvalidParams(format!(
            "sweep needs n >= 1 and 0 < c_min <= c_max, got n = {n}, [{c_min}, {c_max}]"
        )));
    }
    let c0 = sigma0.params.c_o();
    let grid: Vec<f64> = if n == 1 {
        vec![c_min]
    } else {
        (0..n)
            .map(|k| c_min + (c_max - c_min) * k as f64 / (n - 1) as f64)
            .collect()
    };
    let up: Vec<f64> = grid.iter().copied().filter(|&c| c >= c0).collect();
    let down: Vec<f64> = grid.iter().rev().copied().filter(|&c| c < c0).collect();
    let (up_entries, mut down_entries) = rayon::join(
        || march(&up, sigma0, settings),
        || march(&down, sigma0, settings),
    );
    down_entries.reverse();
    down_entries.extend(up_entries);
    Ok(FamilySweep {
        sigma0: sigma0.clone(),
        entries: down_entries,
    })
}
