//! Generating curves of axially symmetric solutions of `H + c_o = -ν₃/z`.
//!
//! Curves are parameterized by arc length `tau` measured from the rotation
//! axis; the boundary-oriented arc length is `sigma = ell - tau`. In `tau`
//! the profile system is
//!
//! ```text
//! r' = -cos φ      z' = -sin φ      φ' = 2 cos φ / z + sin φ / r - 2 c_o
//! ```
//!
//! with `r(0) = 0`, `z(0) = z_o`, `φ(0) = π`. The point `r = 0` is singular,
//! so integration starts a short distance `tau0` off the axis from the
//! second-order Taylor germ of the smooth solution.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Crossing, Dop853Options, Event, Termination, Trajectory};
use crate::quadrature;
use crate::resample::Resample;
use crate::roots::brent;

/// Spontaneous curvature and axis height of one solution germ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    c_o: f64,
    z_o: f64,
}

impl ModelParams {
    /// Requires `c_o > 0` and `z_o < 0`.
    pub fn new(c_o: f64, z_o: f64) -> Result<Self> {
        if !(c_o > 0.0 && c_o.is_finite()) {
            return Err(Error::InvalidParams(format!("c_o must be > 0, got {c_o}")));
        }
        Self::new_allowing_zero_curvature(c_o, z_o)
    }

    /// Diagnostic override admitting `c_o = 0`, whose solutions are circular
    /// arcs. Not a physical configuration for the disc problem.
    pub fn new_allowing_zero_curvature(c_o: f64, z_o: f64) -> Result<Self> {
        if !(c_o >= 0.0 && c_o.is_finite()) {
            return Err(Error::InvalidParams(format!("c_o must be >= 0, got {c_o}")));
        }
        if !(z_o < 0.0 && z_o.is_finite()) {
            return Err(Error::InvalidParams(format!("z_o must be < 0, got {z_o}")));
        }
        Ok(Self { c_o, z_o })
    }

    pub fn c_o(&self) -> f64 {
        self.c_o
    }

    pub fn z_o(&self) -> f64 {
        self.z_o
    }

    /// `1/z_o + c_o`, the profile curvature `φ_ς` at the axis.
    pub fn axis_slope(&self) -> f64 {
        1.0 / self.z_o + self.c_o
    }

    /// Whether the curve closes into a tangential disc, i.e. `z_o < -1/c_o`.
    pub fn sigma0_admissible(&self) -> bool {
        self.c_o * self.z_o < -1.0
    }

    pub fn length_scale(&self) -> f64 {
        self.z_o.abs()
    }

    /// Parameters of the solution scaled by `mu` in space.
    pub fn scaled(&self, mu: f64) -> Result<Self> {
        Self::new_allowing_zero_curvature(self.c_o / mu, self.z_o * mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub tau: f64,
    pub r: f64,
    pub z: f64,
    pub phi: f64,
}

impl ProfileState {
    fn from_vec(tau: f64, y: [f64; 3]) -> Self {
        Self {
            tau,
            r: y[0],
            z: y[1],
            phi: y[2],
        }
    }
}

/// Integrator knobs. Lengths are relative to `|z_o|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Axis offset as a multiple of `|z_o|`.
    pub tau0_factor: f64,
    /// Largest step as a multiple of `|z_o|`; bounds the sample spacing.
    pub max_step_factor: f64,
    /// Event location tolerance in `tau` as a multiple of `|z_o|`.
    pub event_tol_factor: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            tau0_factor: 1e-6,
            max_step_factor: 0.01,
            event_tol_factor: 1e-12,
        }
    }
}

impl IntegratorSettings {
    pub fn tau0(&self, params: &ModelParams) -> f64 {
        self.tau0_factor * params.length_scale()
    }

    /// Tolerances and axis offset all divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            tau0_factor: self.tau0_factor / factor,
            ..*self
        }
    }

    pub(crate) fn ode_options(&self, params: &ModelParams) -> Dop853Options {
        Dop853Options {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step_factor * params.length_scale(),
            first_step: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopKind {
    /// First crossing of the tangent angle through the given value.
    PhiReaches(f64),
    /// First local minimum of the distance to `(r, z)`; it must be within
    /// `tolerance` (which may be infinite).
    Point { r: f64, z: f64, tolerance: f64 },
    /// Fixed arc length from the axis.
    ArcLength(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub kind: StopKind,
    /// Defaults to `100 (|z_o| + 1/c_o)`.
    pub max_arc_length: Option<f64>,
    /// Defaults to `1e-8 |z_o|`.
    pub min_abs_z: Option<f64>,
}

impl StopCondition {
    pub fn new(kind: StopKind) -> Self {
        Self {
            kind,
            max_arc_length: None,
            min_abs_z: None,
        }
    }

    pub fn phi_reaches(value: f64) -> Self {
        Self::new(StopKind::PhiReaches(value))
    }

    /// Horizontal tangent, the boundary of a tangential disc.
    pub fn horizontal_tangent() -> Self {
        Self::phi_reaches(0.0)
    }

    pub fn point(r: f64, z: f64, tolerance: f64) -> Self {
        Self::new(StopKind::Point { r, z, tolerance })
    }

    pub fn arc_length(limit: f64) -> Self {
        Self::new(StopKind::ArcLength(limit))
    }

    fn max_arc(&self, params: &ModelParams) -> f64 {
        self.max_arc_length.unwrap_or_else(|| {
            let curvature_len = if params.c_o > 0.0 {
                1.0 / params.c_o
            } else {
                0.0
            };
            100.0 * (params.length_scale() + curvature_len)
        })
    }

    fn min_abs_z(&self, params: &ModelParams) -> f64 {
        self.min_abs_z.unwrap_or(1e-8 * params.length_scale())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    TangentHorizontal,
    TargetPointHit,
    ArcLimit,
    Singularity,
}

/// Geometric quantities of the surface of revolution at one profile point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryPoint {
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub nu3: f64,
    pub kappa: f64,
    /// Support function `X·ν`.
    pub support: f64,
    /// `‖dν‖² = 4H² − 2K`.
    pub sff_norm2: f64,
    /// `H + ν₃/z`; equals `−c_o` on solutions.
    pub xi: f64,
}

/// `φ_ς` from the profile system (the arc length derivative towards the axis).
pub(crate) fn phi_sigma(c_o: f64, r: f64, z: f64, phi: f64) -> f64 {
    -2.0 * phi.cos() / z - phi.sin() / r + 2.0 * c_o
}

/// Geometry at a state; `r = 0` is treated as the axis.
pub fn geometry_of(params: &ModelParams, s: &ProfileState) -> GeometryPoint {
    let (sin_over_r, phi_s) = if s.r == 0.0 {
        let a = params.axis_slope();
        (a, a)
    } else {
        let sr = s.phi.sin() / s.r;
        (sr, phi_sigma(params.c_o, s.r, s.z, s.phi))
    };
    let h = -0.5 * (phi_s + sin_over_r);
    let k = phi_s * sin_over_r;
    let nu3 = -s.phi.cos();
    GeometryPoint {
        mean_curvature: h,
        gauss_curvature: k,
        nu3,
        kappa: -phi_s,
        support: s.r * s.phi.sin() - s.z * s.phi.cos(),
        sff_norm2: sin_over_r * sin_over_r + phi_s * phi_s,
        xi: h + nu3 / s.z,
    }
}

/// Taylor germ of the smooth solution at arc length `tau0` from the axis.
///
/// `r ≈ tau0`, `z ≈ z_o − a tau0²/2`, `φ ≈ π − a tau0` with `a = 1/z_o + c_o`;
/// the truncation error is `O(tau0³)`.
pub fn axis_seed(params: &ModelParams, tau0: f64) -> Result<ProfileState> {
    let a = params.axis_slope();
    if a.abs() <= 1e-14 * (params.c_o + 1.0 / params.z_o.abs()) {
        return Err(Error::DegenerateAxis {
            c_o: params.c_o,
            z_o: params.z_o,
        });
    }
    let limit = 1e-3 * params.length_scale();
    if !(0.0..=limit).contains(&tau0) {
        return Err(Error::InvalidOffset { tau0, limit });
    }
    Ok(ProfileState {
        tau: tau0,
        r: tau0,
        z: params.z_o - 0.5 * a * tau0 * tau0,
        phi: PI - a * tau0,
    })
}

fn seed_derivative(params: &ModelParams, tau: f64) -> [f64; 3] {
    let a = params.axis_slope();
    [1.0, -a * tau, -a]
}

fn profile_rhs(c_o: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    move |_t, y| {
        let (r, z, phi) = (y[0], y[1], y[2]);
        let (s, c) = phi.sin_cos();
        [-c, -s, 2.0 * c / z + s / r - 2.0 * c_o]
    }
}

/// A generating curve from the axis to its stop event, with dense output.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    params: ModelParams,
    settings: IntegratorSettings,
    samples: Vec<ProfileState>,
    traj: Trajectory<3>,
    ell: f64,
    stop_reason: StopReason,
}

/// Integrates the profile system from the axis until `stop` fires.
pub fn integrate_profile(
    params: &ModelParams,
    stop: &StopCondition,
    settings: &IntegratorSettings,
) -> Result<ProfileCurve> {
    let scale = params.length_scale();
    let tau0 = settings.tau0(params);
    if !(tau0 > 0.0) {
        return Err(Error::InvalidOffset {
            tau0,
            limit: 1e-3 * scale,
        });
    }
    let seed = axis_seed(params, tau0)?;
    let max_arc = stop.max_arc(params);
    let min_abs_z = stop.min_abs_z(params);
    let r_floor = 1e-3 * tau0;

    let t_end = match stop.kind {
        StopKind::ArcLength(limit) => {
            if !(limit > tau0) {
                return Err(Error::InvalidParams(format!(
                    "arc length {limit} not beyond the axis offset {tau0}"
                )));
            }
            limit.min(max_arc)
        }
        _ => max_arc,
    };

    let phi_target = |_t: f64, y: &[f64; 3]| match stop.kind {
        StopKind::PhiReaches(v) => y[2] - v,
        _ => 0.0,
    };
    let closest_approach = |_t: f64, y: &[f64; 3]| match stop.kind {
        StopKind::Point { r, z, .. } => -(y[0] - r) * y[2].cos() - (y[1] - z) * y[2].sin(),
        _ => 0.0,
    };
    let z_guard = |_t: f64, y: &[f64; 3]| y[1] + min_abs_z;
    let r_guard = |_t: f64, y: &[f64; 3]| y[0] - r_floor;

    let mut events: Vec<Event<'_, 3>> = Vec::with_capacity(3);
    let primary = match stop.kind {
        StopKind::PhiReaches(_) => {
            events.push(Event::new(&phi_target, Crossing::Either));
            true
        }
        StopKind::Point { .. } => {
            events.push(Event::new(&closest_approach, Crossing::Rising));
            true
        }
        StopKind::ArcLength(_) => false,
    };
    let guard_base = events.len();
    events.push(Event::new(&z_guard, Crossing::Rising));
    events.push(Event::new(&r_guard, Crossing::Falling));

    let traj = ode::integrate(
        profile_rhs(params.c_o),
        tau0,
        [seed.r, seed.z, seed.phi],
        t_end,
        &settings.ode_options(params),
        &events,
        settings.event_tol_factor * scale,
    )?;

    let ell = traj.t_final();
    let stop_reason = match traj.termination {
        Termination::Event { index } if primary && index == 0 => match stop.kind {
            StopKind::Point { r, z, tolerance } => {
                let end = traj.final_state();
                let distance = (end[0] - r).hypot(end[1] - z);
                if distance > tolerance {
                    return Err(Error::TargetMissed {
                        distance,
                        tolerance,
                    });
                }
                StopReason::TargetPointHit
            }
            _ => StopReason::TangentHorizontal,
        },
        Termination::Event { index } => {
            let what = if index == guard_base {
                "z reached 0"
            } else {
                "r reached 0 away from the axis"
            };
            return Err(Error::SingularityHit { tau: ell, what });
        }
        Termination::ReachedEnd => match stop.kind {
            StopKind::ArcLength(limit) if limit <= max_arc => StopReason::ArcLimit,
            _ => return Err(Error::ArcLimit { limit: max_arc }),
        },
    };

    let mut samples = Vec::with_capacity(traj.times.len() + 1);
    samples.push(ProfileState {
        tau: 0.0,
        r: 0.0,
        z: params.z_o,
        phi: PI,
    });
    samples.extend(
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(&t, &y)| ProfileState::from_vec(t, y)),
    );

    Ok(ProfileCurve {
        params: *params,
        settings: *settings,
        samples,
        traj,
        ell,
        stop_reason,
    })
}

impl ProfileCurve {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }

    /// Samples ordered by `tau`; the first one is the exact axis point.
    pub fn samples(&self) -> &[ProfileState] {
        &self.samples
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    pub fn tau0(&self) -> f64 {
        self.traj.t_start()
    }

    pub fn endpoint(&self) -> ProfileState {
        *self.samples.last().unwrap()
    }

    fn check_range(&self, tau: f64) -> Result<()> {
        let slack = 1e-12 * self.params.length_scale();
        if tau < -slack || tau > self.ell + slack || tau.is_nan() {
            return Err(Error::OutOfRange { tau, ell: self.ell });
        }
        Ok(())
    }

    /// Interpolated state at arc length `tau` from the axis.
    pub fn state_at(&self, tau: f64) -> Result<ProfileState> {
        self.check_range(tau)?;
        let tau = tau.clamp(0.0, self.ell);
        if tau == 0.0 {
            return Ok(self.samples[0]);
        }
        if tau < self.tau0() {
            let mut s = axis_seed(&self.params, tau)?;
            // keep any vertical offset applied to the curve
            s.z += self.samples[0].z - self.params.z_o;
            return Ok(s);
        }
        Ok(ProfileState::from_vec(tau, self.traj.eval(tau)))
    }

    /// `(r, z, φ)` derivatives with respect to `tau`, from the interpolant.
    pub fn derivative_at(&self, tau: f64) -> Result<[f64; 3]> {
        self.check_range(tau)?;
        let tau = tau.clamp(0.0, self.ell);
        if tau < self.tau0() {
            return Ok(seed_derivative(&self.params, tau));
        }
        Ok(self.traj.eval_with_derivative(tau).1)
    }

    pub fn geometry_at(&self, tau: f64) -> Result<GeometryPoint> {
        geometry_at(self, tau)
    }

    /// Uniform resample with `n` intervals over `[0, ell]`.
    pub fn resample_uniform(&self, n: usize) -> Resample {
        let step = self.ell / n as f64;
        let mut tau = Vec::with_capacity(n + 1);
        let mut r = Vec::with_capacity(n + 1);
        let mut z = Vec::with_capacity(n + 1);
        let mut phi = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = if i == n { self.ell } else { i as f64 * step };
            let s = self.state_at(t).expect("inside range");
            tau.push(t);
            r.push(s.r);
            z.push(s.z);
            phi.push(s.phi);
        }
        Resample {
            c_o: self.params.c_o,
            step,
            tau,
            r,
            z,
            phi,
        }
    }

    /// Same curve, sampled uniformly at `n + 1` points.
    pub fn with_uniform_samples(&self, n: usize) -> ProfileCurve {
        let mut out = self.clone();
        out.samples = (0..=n)
            .map(|i| {
                let t = if i == n {
                    self.ell
                } else {
                    self.ell * i as f64 / n as f64
                };
                self.state_at(t).expect("inside range")
            })
            .collect();
        out
    }

    /// Same curve with `samples` replaced by states at the given arc lengths.
    pub fn with_samples_at(&self, taus: &[f64]) -> Result<ProfileCurve> {
        let mut out = self.clone();
        out.samples = taus
            .iter()
            .map(|&t| self.state_at(t))
            .collect::<Result<_>>()?;
        Ok(out)
    }

    /// The curve shifted vertically by `dz`. The result no longer solves the
    /// profile system; it exists for negative controls of the residual checks.
    pub fn with_z_offset(&self, dz: f64) -> ProfileCurve {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.z += dz;
        }
        for st in &mut out.traj.states {
            st[1] += dz;
        }
        for seg in &mut out.traj.segments {
            seg.shift_component(1, dz);
        }
        out
    }
}

/// Geometry of the surface of revolution at arc length `tau` from the axis.
pub fn geometry_at(curve: &ProfileCurve, tau: f64) -> Result<GeometryPoint> {
    let s = curve.state_at(tau)?;
    Ok(geometry_of(&curve.params, &s))
}

/// `φ_ς` at the axis, extrapolated from a tightly integrated arc next to it.
///
/// `φ_ς` is even in `tau`, so two Richardson levels over `h, 2h, 4h` remove the
/// `tau²` and `tau⁴` terms. Near the axis `sin φ / r` divides the absolute error
/// of `φ` by a small `r`, so the arc is integrated with at least `rtol = 1e-13`.
pub fn axis_curvature_extrapolated(
    params: &ModelParams,
    settings: &IntegratorSettings,
) -> Result<f64> {
    let scale = params
        .z_o
        .abs()
        .min(1.0 / params.c_o.abs().max(f64::MIN_POSITIVE));
    let h = 1e-2 * scale;
    let tight = IntegratorSettings {
        rtol: settings.rtol.min(1e-13),
        atol: settings.atol.min(1e-15 * params.length_scale()),
        ..*settings
    };
    let curve = integrate_profile(params, &StopCondition::arc_length(4.0 * h), &tight)?;
    let d = |t: f64| {
        curve
            .state_at(t)
            .map(|s| phi_sigma(params.c_o, s.r, s.z, s.phi))
    };
    let (d1, d2, d4) = (d(h)?, d(2.0 * h)?, d(4.0 * h)?);
    let e1 = (4.0 * d1 - d2) / 3.0;
    let e2 = (4.0 * d2 - d4) / 3.0;
    Ok((16.0 * e1 - e2) / 15.0)
}

fn first_integral_integrand(s: &ProfileState) -> f64 {
    let c = s.phi.cos();
    -2.0 * c * c / s.z * s.r
}

/// Largest violation along the curve of
/// `c_o r² − r sin φ − ∫₀^τ (−2 cos²φ / z) r dτ' = 0`.
pub fn first_integral_residual(curve: &ProfileCurve) -> f64 {
    let c_o = curve.params.c_o;
    let scale = curve.params.length_scale();
    let tol = 1e-15 * scale * scale;
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for w in curve.samples.windows(2) {
        let (a, b) = (w[0].tau, w[1].tau);
        integral += quadrature::integrate(
            |t| first_integral_integrand(&curve.state_at(t).expect("inside range")),
            a,
            b,
            tol,
        );
        let s = &w[1];
        let res = c_o * s.r * s.r - s.r * s.phi.sin() - integral;
        worst = worst.max(res.abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeDiagnostics {
    /// Profile curvature strictly negative at every sample.
    pub convex: bool,
    pub vertical_tangent_r: Option<f64>,
    pub vertical_tangent_tau: Option<f64>,
    /// `sin φ ≥ (1/z_o + c_o) r` on the arc from the axis to the vertical tangent.
    pub sin_phi_bound_ok: bool,
}

/// First arc length where `φ` crosses `value`, if any.
pub(crate) fn first_phi_crossing(curve: &ProfileCurve, value: f64) -> Option<f64> {
    let samples = curve.samples();
    let k = samples
        .iter()
        .position(|s| (s.phi - value) * (samples[0].phi - value) <= 0.0)?;
    if k == 0 {
        return Some(0.0);
    }
    let (a, b) = (samples[k - 1], samples[k]);
    let f = |t: f64| curve.state_at(t).expect("inside range").phi - value;
    Some(brent(
        f,
        a.tau,
        b.tau,
        a.phi - value,
        b.phi - value,
        1e-14 * curve.params.length_scale(),
    ))
}

pub fn shape_diagnostics(curve: &ProfileCurve) -> Result<ShapeDiagnostics> {
    let p = curve.params;
    if !p.sigma0_admissible() {
        return Err(Error::NotAdmissible(p.c_o * p.z_o));
    }
    let convex = curve.samples.iter().all(|s| geometry_of(&p, s).kappa < 0.0);
    let vt_tau = first_phi_crossing(curve, FRAC_PI_2);
    let vt_r = vt_tau.map(|t| curve.state_at(t).expect("inside range").r);
    let a = p.axis_slope();
    let limit = vt_tau.unwrap_or(curve.ell);
    let sin_phi_bound_ok = curve
        .samples
        .iter()
        .filter(|s| s.tau <= limit)
        .all(|s| s.phi.sin() >= a * s.r - 1e-9);
    Ok(ShapeDiagnostics {
        convex,
        vertical_tangent_r: vt_r,
        vertical_tangent_tau: vt_tau,
        sin_phi_bound_ok,
    })
}

pub const DEFAULT_RESAMPLE: usize = 4000;

/// Sup over the interior window of the fourth-order Euler–Lagrange residual
/// `ΔH + 2(H + c_o)(H(H − c_o) − K)`.
///
/// `H` is taken from the reduced relation `H = −c_o − ν₃/z` on the sampled
/// data, `K` and the Laplacian from finite differences, so the check confirms
/// that curves of the reduced equation solve the full one.
pub fn fourth_order_residual(curve: &ProfileCurve) -> Result<f64> {
    fourth_order_residual_on(&curve.resample_uniform(DEFAULT_RESAMPLE))
}

pub fn fourth_order_residual_on(rs: &Resample) -> Result<f64> {
    rs.require_points(16)?;
    let c = rs.c_o;
    let h: Vec<f64> = (0..rs.len())
        .map(|i| -c + rs.phi[i].cos() / rs.z[i])
        .collect();
    let mut worst: f64 = 0.0;
    for i in rs.window(0.02, 0.98) {
        let lap = rs.d2(&h, i) - rs.phi[i].cos() / rs.r[i] * rs.d1(&h, i);
        let k = rs.gauss_curvature(i);
        let res = lap + 2.0 * (h[i] + c) * (h[i] * (h[i] - c) - k);
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// `2π ∫₀^ℓ (1/z² + 2 c_o ν₃/z) r dτ`.
pub fn energy(curve: &ProfileCurve) -> f64 {
    let c_o = curve.params.c_o;
    let integrand = |t: f64| {
        let s = curve.state_at(t).expect("inside range");
        let nu3 = -s.phi.cos();
        (1.0 / (s.z * s.z) + 2.0 * c_o * nu3 / s.z) * s.r
    };
    let pieces = (curve.samples.len() - 1).max(1) as f64;
    let tol = 1e-9 / (2.0 * PI * pieces);
    let sum: f64 = curve
        .samples
        .windows(2)
        .map(|w| quadrature::integrate(integrand, w[0].tau, w[1].tau, tol))
        .sum();
    2.0 * PI * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma0(c: f64, z: f64) -> ProfileCurve {
        integrate_profile(
            &ModelParams::new(c, z).unwrap(),
            &StopCondition::horizontal_tangent(),
            &IntegratorSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, -1.0).is_err());
        assert!(ModelParams::new(1.0, 0.5).is_err());
        assert!(ModelParams::new(-1.0, -1.0).is_err());
        assert!(ModelParams::new_allowing_zero_curvature(0.0, -1.0).is_ok());
        let p = ModelParams::new(2.0, -0.6).unwrap();
        assert!(p.sigma0_admissible());
        assert!(!ModelParams::new(2.0, -0.2).unwrap().sigma0_admissible());
    }

    #[test]
    fn seed_examples() {
        let p = ModelParams::new(2.0, -1.0).unwrap();
        let s = axis_seed(&p, 1e-4).unwrap();
        assert_eq!(s.r, 1e-4);
        assert!((s.z - (-1.0 - 5e-9)).abs() < 1e-16);
        assert!((s.phi - (PI - 1e-4)).abs() < 1e-16);

        let s0 = axis_seed(&p, 0.0).unwrap();
        assert_eq!((s0.r, s0.z, s0.phi), (0.0, -1.0, PI));

        let degenerate = ModelParams::new(2.0, -0.5).unwrap();
        assert!(matches!(
            axis_seed(&degenerate, 1e-6),
            Err(Error::DegenerateAxis { .. })
        ));
        assert!(matches!(
            axis_seed(&p, 2e-3),
            Err(Error::InvalidOffset { .. })
        ));
        assert!(matches!(
            axis_seed(&p, -1e-9),
            Err(Error::InvalidOffset { .. })
        ));
    }

    #[test]
    fn sigma0_curve_stops_at_horizontal_tangent() {
        let c = sigma0(2.0, -0.6);
        assert_eq!(c.stop_reason(), StopReason::TangentHorizontal);
        let end = c.endpoint();
        assert!(end.phi.abs() < 1e-10);
        assert!(end.r > 0.0);
        for w in c.samples().windows(2) {
            assert!(w[1].tau > w[0].tau);
            assert!(w[1].tau - w[0].tau <= 0.01 * 0.6 + 1e-15);
        }
    }

    #[test]
    fn unit_speed_from_interpolant() {
        let c = sigma0(2.0, -0.6);
        for s in c.samples().iter().skip(1) {
            let d = c.derivative_at(s.tau).unwrap();
            assert!((d[0] * d[0] + d[1] * d[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn axis_geometry() {
        let c = sigma0(2.0, -0.6);
        let g = c.geometry_at(0.0).unwrap();
        let a = 1.0 / -0.6 + 2.0;
        assert_eq!(g.nu3, 1.0);
        assert!((g.mean_curvature + a).abs() < 1e-15);
        assert!((g.gauss_curvature - a * a).abs() < 1e-15);
        assert!((g.xi + 2.0).abs() < 1e-14);
    }

    #[test]
    fn xi_constant_along_curve() {
        let c = sigma0(2.0, -0.6);
        for s in c.samples() {
            let g = geometry_of(c.params(), s);
            assert!((g.xi + 2.0).abs() < 1e-9);
        }
        assert!(c.geometry_at(c.ell() + 1.0).is_err());
    }

    #[test]
    fn vertical_tangent_geometry() {
        let c = sigma0(2.0, -0.6);
        let tau = first_phi_crossing(&c, FRAC_PI_2).unwrap();
        let s = c.state_at(tau).unwrap();
        let g = c.geometry_at(tau).unwrap();
        assert!(g.nu3.abs() < 1e-12);
        assert!((g.support - s.r).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_shape_diagnostics_rejected() {
        let p = ModelParams::new(2.0, -0.2).unwrap();
        let c = integrate_profile(
            &p,
            &StopCondition::arc_length(0.1),
            &IntegratorSettings::default(),
        )
        .unwrap();
        assert!(matches!(
            shape_diagnostics(&c),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn arc_guard_reports_error() {
        let p = ModelParams::new(2.0, -0.6).unwrap();
        let stop = StopCondition {
            kind: StopKind::PhiReaches(0.0),
            max_arc_length: Some(0.5),
            min_abs_z: None,
        };
        assert!(matches!(
            integrate_profile(&p, &stop, &IntegratorSettings::default()),
            Err(Error::ArcLimit { .. })
        ));
    }

    #[test]
    fn z_guard_reports_singularity() {
        // c_o = 0 arcs are circles centred at the origin: z reaches 0 at tau = pi/2
        let p = ModelParams::new_allowing_zero_curvature(0.0, -1.0).unwrap();
        let r = integrate_profile(
            &p,
            &StopCondition::arc_length(3.0),
            &IntegratorSettings::default(),
        );
        assert!(matches!(r, Err(Error::SingularityHit { .. })), "{r:?}");
    }

    #[test]
    fn first_integral_axis_only_is_zero() {
        let c = sigma0(2.0, -0.6);
        let axis_only = c.with_samples_at(&[0.0]).unwrap();
        assert_eq!(first_integral_residual(&axis_only), 0.0);
    }
}
