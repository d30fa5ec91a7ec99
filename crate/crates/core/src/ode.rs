//! Dormand–Prince 8(5,3) integrator with 7th-order dense output.
//!
//! Steps are accepted on the combined 5th/3rd order error estimate of Hairer's
//! DOP853. Every accepted step keeps its interpolant, so a [`Trajectory`] can be
//! evaluated (and differentiated) anywhere inside its span. Events are detected
//! by a sign change of a user function across a step and located on the
//! interpolant with Brent's method.

use crate::error::{Error, Result};
use crate::roots::brent;

const C: [f64; 16] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
    1.0,
    0.1,
    0.2,
    0.7777777777777778,
];

#[rustfmt::skip]
const A: [[f64; 16]; 16] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259, 0.0, 0.0, 0.0, 0.0],
    [0.056167502283047954, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25350021021662483, -0.2462390374708025, -0.12419142326381637, 0.15329179827876568, 0.00820105229563469, 0.007567897660545699, -0.008298, 0.0, 0.0, 0.0],
    [0.03183464816350214, 0.0, 0.0, 0.0, 0.0, 0.028300909672366776, 0.053541988307438566, -0.05492374857139099, 0.0, 0.0, -0.00010834732869724932, 0.0003825710908356584, -0.00034046500868740456, 0.1413124436746325, 0.0, 0.0],
    [-0.42889630158379194, 0.0, 0.0, 0.0, 0.0, -4.697621415361164, 7.683421196062599, 4.06898981839711, 0.3567271874552811, 0.0, 0.0, 0.0, -0.0013990241651590145, 2.9475147891527724, -9.15095847217987, 0.0],
];

const E3: [f64; 13] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
    0.0,
];
const E5: [f64; 13] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
];

#[rustfmt::skip]
const D: [[f64; 16]; 4] = [
    [-8.428938276109013, 0.0, 0.0, 0.0, 0.0, 0.5667149535193777, -3.0689499459498917, 2.38466765651207, 2.117034582445028, -0.871391583777973, 2.2404374302607883, 0.6315787787694688, -0.08899033645133331, 18.148505520854727, -9.194632392478356, -4.436036387594894],
    [10.427508642579134, 0.0, 0.0, 0.0, 0.0, 242.28349177525817, 165.20045171727028, -374.5467547226902, -22.113666853125306, 7.733432668472264, -30.674084731089398, -9.332130526430229, 15.697238121770845, -31.139403219565178, -9.35292435884448, 35.81684148639408],
    [19.985053242002433, 0.0, 0.0, 0.0, 0.0, -387.0373087493518, -189.17813819516758, 527.8081592054236, -11.57390253995963, 6.8812326946963, -1.0006050966910838, 0.7777137798053443, -2.778205752353508, -60.19669523126412, 84.32040550667716, 11.99229113618279],
    [-25.69393346270375, 0.0, 0.0, 0.0, 0.0, -154.18974869023643, -231.5293791760455, 357.6391179106141, 93.40532418362432, -37.45832313645163, 104.0996495089623, 29.8402934266605, -43.53345659001114, 96.32455395918828, -39.17726167561544, -149.72683625798564],
];

const N_STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for Dop853Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            first_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// g goes from negative to non-negative.
    Rising,
    /// g goes from positive to non-positive.
    Falling,
    Either,
}

pub struct Event<'a, const N: usize> {
    pub g: &'a dyn Fn(f64, &[f64; N]) -> f64,
    pub crossing: Crossing,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(g: &'a dyn Fn(f64, &[f64; N]) -> f64, crossing: Crossing) -> Self {
        Self { g, crossing }
    }

    fn triggered(&self, g_old: f64, g_new: f64) -> bool {
        let rising = g_old < 0.0 && g_new >= 0.0;
        let falling = g_old > 0.0 && g_new <= 0.0;
        match self.crossing {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Either => rising || falling,
        }
    }
}

/// Interpolant of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment<const N: usize> {
    t0: f64,
    h: f64,
    y0: [f64; N],
    coeffs: [[f64; N]; 7],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        self.eval_with_derivative(t).0
    }

    /// Value and time derivative of the interpolant at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> ([f64; N], [f64; N]) {
        let x = (t - self.t0) / self.h;
        let mut y = [0.0; N];
        let mut dy = [0.0; N];
        for (i, f) in self.coeffs.iter().rev().enumerate() {
            for k in 0..N {
                y[k] += f[k];
                if i % 2 == 0 {
                    dy[k] = dy[k] * x + y[k];
                    y[k] *= x;
                } else {
                    dy[k] = dy[k] * (1.0 - x) - y[k];
                    y[k] *= 1.0 - x;
                }
            }
        }
        for k in 0..N {
            y[k] += self.y0[k];
            dy[k] /= self.h;
        }
        (y, dy)
    }

    /// Adds `delta` to component `k` everywhere on the segment.
    pub(crate) fn shift_component(&mut self, k: usize, delta: f64) {
        self.y0[k] += delta;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    Event { index: usize },
}

/// Accepted steps of one integration together with their interpolants.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub segments: Vec<DenseSegment<N>>,
    pub termination: Termination,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> [f64; N] {
        *self.states.last().unwrap()
    }

    fn segment_for(&self, t: f64) -> &DenseSegment<N> {
        let idx = self.segments.partition_point(|s| s.t_end() < t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    /// Interpolated state; `t` is clamped into the integrated span.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.segments.is_empty() {
            return self.states[0];
        }
        let t = t.clamp(self.t_start(), self.t_final());
        self.segment_for(t).eval(t)
    }

    pub fn eval_with_derivative(&self, t: f64) -> ([f64; N], [f64; N]) {
        let t = t.clamp(self.t_start(), self.t_final());
        self.segment_for(t).eval_with_derivative(t)
    }
}

fn rms_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b).powi(2)).sum();
    (s / N as f64).sqrt()
}

fn select_initial_step<const N: usize, F>(
    rhs: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    opts: &Dop853Options,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut scale = [0.0; N];
    for k in 0..N {
        scale[k] = opts.atol + y0[k].abs() * opts.rtol;
    }
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = [0.0; N];
    for k in 0..N {
        y1[k] = y0[k] + h0 * f0[k];
    }
    let f1 = rhs(t0 + h0, &y1);
    let mut df = [0.0; N];
    for k in 0..N {
        df[k] = f1[k] - f0[k];
    }
    let d2 = rms_norm(&df, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

struct StepOutput<const N: usize> {
    y_new: [f64; N],
    f_new: [f64; N],
    k: [[f64; N]; 16],
}

fn rk_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], f: &[f64; N], h: f64) -> StepOutput<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 16];
    k[0] = *f;
    for s in 1..N_STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for c in 0..N {
                    ys[c] += h * a * kj[c];
                }
            }
        }
        k[s] = rhs(t + C[s] * h, &ys);
    }
    let mut y_new = *y;
    for (j, kj) in k.iter().enumerate().take(N_STAGES) {
        let b = A[N_STAGES][j];
        if b != 0.0 {
            for c in 0..N {
                y_new[c] += h * b * kj[c];
            }
        }
    }
    let f_new = rhs(t + h, &y_new);
    k[N_STAGES] = f_new;
    StepOutput { y_new, f_new, k }
}

fn error_norm<const N: usize>(k: &[[f64; N]; 16], h: f64, scale: &[f64; N]) -> f64 {
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    for c in 0..N {
        let mut s5 = 0.0;
        let mut s3 = 0.0;
        for j in 0..=N_STAGES {
            s5 += k[j][c] * E5[j];
            s3 += k[j][c] * E3[j];
        }
        e5 += (s5 / scale[c]).powi(2);
        e3 += (s3 / scale[c]).powi(2);
    }
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    let denom = e5 + 0.01 * e3;
    h.abs() * e5 / (denom * N as f64).sqrt()
}

fn dense_segment<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    h: f64,
    step: &mut StepOutput<N>,
) -> DenseSegment<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    for s in (N_STAGES + 1)..16 {
        let mut ys = *y;
        for j in 0..s {
            let a = A[s][j];
            if a != 0.0 {
                for c in 0..N {
                    ys[c] += h * a * step.k[j][c];
                }
            }
        }
        step.k[s] = rhs(t + C[s] * h, &ys);
    }
    let mut coeffs = [[0.0; N]; 7];
    for c in 0..N {
        let dy = step.y_new[c] - y[c];
        let f_old = step.k[0][c];
        coeffs[0][c] = dy;
        coeffs[1][c] = h * f_old - dy;
        coeffs[2][c] = 2.0 * dy - h * (step.f_new[c] + f_old);
        for (row, d) in D.iter().enumerate() {
            let mut s = 0.0;
            for j in 0..16 {
                s += d[j] * step.k[j][c];
            }
            coeffs[3 + row][c] = h * s;
        }
    }
    DenseSegment {
        t0: t,
        h,
        y0: *y,
        coeffs,
    }
}

/// Integrates `y' = rhs(t, y)` forward from `t0` to `t_end`, stopping early at
/// the first triggered event, which is located to `event_tol` in `t`.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Dop853Options,
    events: &[Event<'_, N>],
    event_tol: f64,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(t_end > t0) {
        return Err(Error::Integrator(format!("empty interval [{t0}, {t_end}]")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integrator(format!(
            "non-finite derivative at t = {t0}"
        )));
    }
    let mut h_abs = opts
        .first_step
        .unwrap_or_else(|| select_initial_step(&rhs, t0, &y0, &f, opts));
    let mut g_old: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        segments: Vec::new(),
        termination: Termination::ReachedEnd,
    };

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(traj);
        }
        let min_step = 10.0 * (next_up(t) - t);
        h_abs = h_abs.min(opts.max_step);
        let mut rejected = false;

        let (h, mut step) = loop {
            if h_abs < min_step {
                return Err(Error::Integrator(format!("step size underflow at t = {t}")));
            }
            let mut h = h_abs;
            if t + h > t_end {
                h = t_end - t;
            }
            let step = rk_step(&rhs, t, &y, &f, h);
            let finite = step.y_new.iter().chain(&step.f_new).all(|v| v.is_finite());
            let err = if finite {
                let mut scale = [0.0; N];
                for c in 0..N {
                    scale[c] = opts.atol + y[c].abs().max(step.y_new[c].abs()) * opts.rtol;
                }
                error_norm(&step.k, h, &scale)
            } else {
                f64::INFINITY
            };
            if err < 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                };
                if rejected {
                    factor = factor.min(1.0);
                }
                h_abs *= factor;
                break (h, step);
            }
            let shrink = if err.is_finite() {
                MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT))
            } else {
                0.25
            };
            h_abs *= shrink;
            rejected = true;
        };

        let segment = dense_segment(&rhs, t, &y, h, &mut step);
        let t_new = t + h;

        // earliest triggered event on this step
        let mut hit: Option<(usize, f64)> = None;
        let mut g_new = Vec::with_capacity(events.len());
        for (i, ev) in events.iter().enumerate() {
            let gn = (ev.g)(t_new, &step.y_new);
            g_new.push(gn);
            if ev.triggered(g_old[i], gn) {
                let root = brent(
                    |s| (ev.g)(s, &segment.eval(s)),
                    t,
                    t_new,
                    g_old[i],
                    gn,
                    event_tol,
                );
                if hit.is_none_or(|(_, r)| root < r) {
                    hit = Some((i, root));
                }
            }
        }

        if let Some((index, t_ev)) = hit {
            let y_ev = segment.eval(t_ev);
            traj.segments.push(segment);
            traj.times.push(t_ev);
            traj.states.push(y_ev);
            traj.termination = Termination::Event { index };
            return Ok(traj);
        }

        traj.segments.push(segment);
        traj.times.push(t_new);
        traj.states.push(step.y_new);
        t = t_new;
        y = step.y_new;
        f = step.f_new;
        g_old = g_new;
    }
    Err(Error::Integrator(format!(
        "exceeded {} steps before t = {t_end}",
        opts.max_steps
    )))
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}
