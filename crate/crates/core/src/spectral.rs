//! Mode-by-mode spectra of the Jacobi operator and the bifurcation certificate.
//!
//! Separating `ψ = u(τ) cos mθ`, each mode solves the weighted
//! Sturm–Liouville problem
//!
//! ```text
//! −(p u')' + (m² / (r z²) − r U) u = λ r u,   p = r / z²,   U = V / z²
//! ```
//!
//! with `u = 0` on the boundary. On the axis `m = 0` has zero flux and
//! `m ≥ 1` a Dirichlet condition. The discretization is a vertex-centred
//! finite volume scheme on a mesh graded towards the axis; eigenvalues of the
//! generalized tridiagonal problem are isolated by Sturm counts.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearized::{potential_v, potential_v_axis, solve_h, LinearizedSolution};
use crate::profile::{IntegratorSettings, ProfileCurve, DEFAULT_RESAMPLE};
use crate::shooting::{
    family_sweep_from, shoot_sigma0, BoundaryCircle, ShootingOptions, Sigma0Solution,
};

pub const MIN_GRID: usize = 200;
pub const DEFAULT_GRID: usize = 1000;
const GRADING: f64 = 1.5;

/// Generalized symmetric tridiagonal problem `A u = λ M u` with diagonal `M`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeOperator {
    pub m: u32,
    /// Full mesh `τ_0 = 0 < … < τ_n = ℓ`.
    pub mesh: Vec<f64>,
    /// Mesh indices of the unknowns.
    pub nodes: Vec<usize>,
    pub diag: Vec<f64>,
    /// `off[k]` couples unknowns `k` and `k + 1`.
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Coefficient densities of one mode, evaluated on the curve.
struct Coefficients<'a> {
    curve: &'a ProfileCurve,
    m2: f64,
}

impl Coefficients<'_> {
    fn flux(&self, tau: f64) -> f64 {
        let s = self.curve.state_at(tau).expect("mesh inside curve");
        s.r / (s.z * s.z)
    }

    /// Mass density `r` and potential density `m²/(r z²) − r U` at `tau > 0`.
    fn densities(&self, tau: f64) -> (f64, f64) {
        let s = self.curve.state_at(tau).expect("mesh inside curve");
        let z2 = s.z * s.z;
        let v = if s.r == 0.0 {
            potential_v_axis(self.curve.params())
        } else {
            potential_v(self.curve.params().c_o(), s.r, s.z, s.phi)
        };
        let centrifugal = if self.m2 == 0.0 {
            0.0
        } else {
            self.m2 / (s.r * z2)
        };
        (s.r, centrifugal - s.r * v / z2)
    }
}

pub fn graded_mesh(ell: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if k == n {
                ell
            } else {
                ell * (k as f64 / n as f64).powf(GRADING)
            }
        })
        .collect()
}

/// Conservative discretization of mode `m` on `n` mesh intervals.
pub fn assemble_mode(curve: &ProfileCurve, m: u32, n: usize) -> Result<ModeOperator> {
    if n < MIN_GRID {
        return Err(Error::GridTooCoarse {
            got: n,
            need: MIN_GRID,
        });
    }
    let mesh = graded_mesh(curve.ell(), n);
    let coeffs = Coefficients {
        curve,
        m2: (m * m) as f64,
    };
    let first = if m == 0 { 0 } else { 1 };
    let nodes: Vec<usize> = (first..n).collect();

    // flux coefficients p(τ_{k+1/2}) / (τ_{k+1} − τ_k)
    let conductance: Vec<f64> = (0..n)
        .map(|k| {
            let mid = 0.5 * (mesh[k] + mesh[k + 1]);
            coeffs.flux(mid) / (mesh[k + 1] - mesh[k])
        })
        .collect();

    let mut diag = Vec::with_capacity(nodes.len());
    let mut mass = Vec::with_capacity(nodes.len());
    for &k in &nodes {
        let mut a = conductance[k];
        if k > 0 {
            a += conductance[k - 1];
        }
        let mut mk = 0.0;
        // half cells on each side, one midpoint (quarter point) each
        let halves = [
            (k > 0).then(|| (0.5 * (mesh[k - 1] + mesh[k]), mesh[k])),
            Some((mesh[k], 0.5 * (mesh[k] + mesh[k + 1]))),
        ];
        for (lo, hi) in halves.into_iter().flatten() {
            let (rho, q) = coeffs.densities(0.5 * (lo + hi));
            mk += rho * (hi - lo);
            a += q * (hi - lo);
        }
        diag.push(a);
        mass.push(mk);
    }
    let off = nodes[..nodes.len() - 1]
        .iter()
        .map(|&k| -conductance[k])
        .collect();
    Ok(ModeOperator {
        m,
        mesh,
        nodes,
        diag,
        off,
        mass,
    })
}

impl ModeOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut d = 0.0;
        let tiny = f64::MIN_POSITIVE.sqrt();
        for k in 0..self.dim() {
            let t = self.diag[k] - lambda * self.mass[k];
            d = if k == 0 {
                t
            } else {
                t - self.off[k - 1] * self.off[k - 1] / d
            };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..self.dim() {
            let mut radius = 0.0;
            if k > 0 {
                radius += self.off[k - 1].abs() / (self.mass[k] * self.mass[k - 1]).sqrt();
            }
            if k + 1 < self.dim() {
                radius += self.off[k].abs() / (self.mass[k] * self.mass[k + 1]).sqrt();
            }
            let centre = self.diag[k] / self.mass[k];
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }

    /// The `j`-th eigenvalue (from 0) by bisection on Sturm counts.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        if j >= self.dim() {
            return Err(Error::SolverFailure(format!(
                "eigenvalue {j} requested from a problem of size {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::SolverFailure("bisection diverged".into()));
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let mut s = self.diag[k] * u[k];
                if k > 0 {
                    s += self.off[k - 1] * u[k - 1];
                }
                if k + 1 < self.dim() {
                    s += self.off[k] * u[k + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(A − σM) x = b` by the Thomas algorithm.
    fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let tiny = f64::EPSILON * self.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let sub = if k > 0 { self.off[k - 1] } else { 0.0 };
            let mut piv = self.diag[k] - sigma * self.mass[k];
            let mut rhs = b[k];
            if k > 0 {
                piv -= sub * c[k - 1];
                rhs -= sub * d[k - 1];
            }
            if piv.abs() < tiny {
                piv = tiny;
            }
            if k + 1 < n {
                c[k] = self.off[k] / piv;
            }
            d[k] = rhs / piv;
        }
        for k in (0..n - 1).rev() {
            d[k] -= c[k] * d[k + 1];
        }
        d
    }

    /// Eigenvector for an eigenvalue, normalized to `uᵀ M u = 1` with a
    /// positive largest entry.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let shift = lambda + 1e-12 * lambda.abs().max(1.0);
        let mut x = vec![1.0; self.dim()];
        for _ in 0..4 {
            let b: Vec<f64> = x.iter().zip(&self.mass).map(|(u, m)| u * m).collect();
            x = self.shifted_solve(shift, &b);
            let norm = x
                .iter()
                .zip(&self.mass)
                .map(|(u, m)| u * u * m)
                .sum::<f64>()
                .sqrt();
            x.iter_mut().for_each(|u| *u /= norm);
        }
        let peak = x
            .iter()
            .copied()
            .fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
        if peak < 0.0 {
            x.iter_mut().for_each(|u| *u = -*u);
        }
        x
    }

    /// `‖(A − λM)u‖ / (‖|A||u|‖ + |λ| ‖Mu‖)`, a backward error that stays
    /// meaningful for eigenvalues near zero.
    pub fn relative_residual(&self, lambda: f64, u: &[f64]) -> f64 {
        let au = self.apply(u);
        let mut num = 0.0;
        let mut a_norm = 0.0;
        let mut m_norm = 0.0;
        for k in 0..self.dim() {
            let mu = self.mass[k] * u[k];
            let mut abs_row = (self.diag[k] * u[k]).abs();
            if k > 0 {
                abs_row += (self.off[k - 1] * u[k - 1]).abs();
            }
            if k + 1 < self.dim() {
                abs_row += (self.off[k] * u[k + 1]).abs();
            }
            num += (au[k] - lambda * mu).powi(2);
            a_norm += abs_row * abs_row;
            m_norm += mu * mu;
        }
        num.sqrt() / (a_norm.sqrt() + lambda.abs() * m_norm.sqrt())
    }

    /// Unknowns spread onto the full mesh with zeros at Dirichlet nodes.
    pub fn on_mesh(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.mesh.len()];
        for (&k, &v) in self.nodes.iter().zip(u) {
            full[k] = v;
        }
        full
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub m: u32,
    /// Richardson extrapolation from meshes with `n` and `2n` intervals.
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_coarse: Vec<f64>,
    pub eigenvalues_fine: Vec<f64>,
    /// Eigenfunctions on `mesh`, weighted-normalized.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// The finer mesh.
    pub mesh: Vec<f64>,
    /// Largest relative residual of the discrete eigenpairs.
    pub discrete_residual: f64,
}

/// Lowest `count` eigenpairs of mode `m`, from meshes with `n` and `2n` intervals.
pub fn eigen_solve(curve: &ProfileCurve, m: u32, count: usize, n: usize) -> Result<EigenResult> {
    let (coarse, fine) = rayon::join(
        || assemble_mode(curve, m, n),
        || assemble_mode(curve, m, 2 * n),
    );
    let (coarse, fine) = (coarse?, fine?);
    let lam_c = (0..count)
        .map(|j| coarse.eigenvalue(j))
        .collect::<Result<Vec<_>>>()?;
    let lam_f = (0..count)
        .map(|j| fine.eigenvalue(j))
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues: Vec<f64> = lam_c
        .iter()
        .zip(&lam_f)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::SolverFailure(format!(
            "mode {m}: eigenvalues not strictly increasing: {eigenvalues:?}"
        )));
    }
    let mut discrete_residual: f64 = 0.0;
    let eigenfunctions = lam_f
        .iter()
        .map(|&l| {
            let u = fine.eigenvector(l);
            discrete_residual = discrete_residual.max(fine.relative_residual(l, &u));
            fine.on_mesh(&u)
        })
        .collect();
    Ok(EigenResult {
        m,
        eigenvalues,
        eigenvalues_coarse: lam_c,
        eigenvalues_fine: lam_f,
        eigenfunctions,
        mesh: fine.mesh,
        discrete_residual,
    })
}

/// Modes `0..=max_m` solved in parallel.
pub fn eigen_solve_modes(
    curve: &ProfileCurve,
    max_m: u32,
    count: usize,
    n: usize,
) -> Result<Vec<EigenResult>> {
    (0..=max_m)
        .into_par_iter()
        .map(|m| eigen_solve(curve, m, count, n))
        .collect()
}

/// Interior sup of the `m = 1`, `λ = 0` equation `P[u] − u/r²` for `u = z_ς = sin φ`.
pub fn kernel_residual_m1(curve: &ProfileCurve) -> Result<f64> {
    let rs = curve.resample_uniform(DEFAULT_RESAMPLE);
    let u: Vec<f64> = rs.phi.iter().map(|p| p.sin()).collect();
    mode_residual_on(&rs, &u, 1)
}

/// Interior sup of `P[u] − m² u / r²` for sampled `u`.
pub fn mode_residual_on(rs: &crate::resample::Resample, u: &[f64], m: u32) -> Result<f64> {
    rs.require_points(16)?;
    let m2 = (m * m) as f64;
    Ok(rs
        .window(0.02, 0.98)
        .map(|i| (rs.apply_jacobi(u, i) - m2 * u[i] / (rs.r[i] * rs.r[i])).abs())
        .fold(0.0, f64::max))
}

/// Largest deviation between the `m = 1` eigenfunction closest to zero and
/// `z_ς = sin φ`, both scaled to unit sup norm.
pub fn m1_kernel_shape_error(curve: &ProfileCurve, m1: &EigenResult) -> Result<f64> {
    let j = closest_to_zero(&m1.eigenvalues);
    let u = &m1.eigenfunctions[j];
    let reference: Vec<f64> = m1
        .mesh
        .iter()
        .map(|&t| curve.state_at(t).map(|s| s.phi.sin()))
        .collect::<Result<_>>()?;
    let su = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sr = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(u.iter()
        .zip(&reference)
        .map(|(a, b)| (a / su - b / sr).abs())
        .fold(0.0, f64::max))
}

fn closest_to_zero(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conditions {
    /// The fixed-boundary family exists across the swept curvature range.
    pub i: bool,
    /// Within θ-even functions the kernel is one-dimensional.
    pub ii: bool,
    /// `h_ς(0) ≠ 0`.
    pub iii: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BifurcationCertificate {
    pub c_o: f64,
    pub z_o: f64,
    pub kernel_dim_even: usize,
    pub h_prime_boundary: f64,
    pub m1_zero_eigenvalue: f64,
    pub m1_zero_residual: f64,
    pub m1_kernel_shape_error: f64,
    pub m0_lowest: f64,
    pub m0_gap: f64,
    pub m2_gap: f64,
    pub zero_threshold: f64,
    pub grid: usize,
    pub conditions: Conditions,
    pub diagnostics: Vec<String>,
    pub verdict: Verdict,
}

/// Outcome of the family sweep used for condition (i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyEvidence {
    pub c_min: f64,
    pub c_max: f64,
    pub members: usize,
    pub failures: usize,
}

/// Everything `certify` needs; missing pieces are reported, not recomputed.
#[derive(Debug, Clone, Default)]
pub struct CertificateEvidence {
    pub curve: Option<ProfileCurve>,
    pub linearized: Option<LinearizedSolution>,
    /// Spectra for `m = 0, 1, 2` in any order.
    pub spectra: Vec<EigenResult>,
    pub family: Option<FamilyEvidence>,
    pub grid: usize,
}

/// Residual bound for the transversality scalar to count as nonzero.
const SOLVER_TOL: f64 = 1e-10;

pub fn certify(evidence: &CertificateEvidence) -> Result<BifurcationCertificate> {
    let mut missing = Vec::new();
    let spectrum = |m: u32| evidence.spectra.iter().find(|e| e.m == m);
    if evidence.curve.is_none() {
        missing.push("profile".to_string());
    }
    let admissible = evidence
        .curve
        .as_ref()
        .map(|c| c.params().sigma0_admissible());
    if admissible == Some(false) {
        let p = evidence.curve.as_ref().unwrap().params();
        return Ok(BifurcationCertificate {
            c_o: p.c_o(),
            z_o: p.z_o(),
            kernel_dim_even: 0,
            h_prime_boundary: f64::NAN,
            m1_zero_eigenvalue: f64::NAN,
            m1_zero_residual: f64::NAN,
            m1_kernel_shape_error: f64::NAN,
            m0_lowest: f64::NAN,
            m0_gap: f64::NAN,
            m2_gap: f64::NAN,
            zero_threshold: f64::NAN,
            grid: evidence.grid,
            conditions: Conditions {
                i: false,
                ii: false,
                iii: false,
            },
            diagnostics: vec![format!(
                "c_o * z_o = {} >= -1: not a tangential disc",
                p.c_o() * p.z_o()
            )],
            verdict: Verdict::NotApplicable,
        });
    }
    if evidence.linearized.is_none() {
        missing.push("linearized solution".to_string());
    }
    for m in 0..=2 {
        if spectrum(m).is_none() {
            missing.push(format!("spectrum m={m}"));
        }
    }
    if evidence.family.is_none() {
        missing.push("family sweep".to_string());
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteEvidence(missing));
    }
    let curve = evidence.curve.as_ref().unwrap();
    let lin = evidence.linearized.as_ref().unwrap();
    let family = evidence.family.unwrap();
    let (m0, m1, m2) = (
        spectrum(0).unwrap(),
        spectrum(1).unwrap(),
        spectrum(2).unwrap(),
    );
    let mut diagnostics = Vec::new();

    let j1 = closest_to_zero(&m1.eigenvalues);
    let m1_zero = m1.eigenvalues[j1];
    // the gap scale is the distance from zero to the rest of the m = 1 spectrum
    let gap_scale = m1
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != j1)
        .map(|(_, l)| l.abs())
        .fold(f64::INFINITY, f64::min);
    if !gap_scale.is_finite() {
        return Err(Error::IncompleteEvidence(vec![
            "at least two m=1 eigenvalues".to_string(),
        ]));
    }
    let threshold = 1e-6 * gap_scale;
    let near_zero = |e: &EigenResult| e.eigenvalues.iter().filter(|l| l.abs() < threshold).count();
    let kernel_dim_even = near_zero(m0) + near_zero(m1) + near_zero(m2);
    let m0_gap = m0
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min);
    let m2_gap = m2
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min);
    let m1_zero_residual = kernel_residual_m1(curve)?;
    let shape_error = m1_kernel_shape_error(curve, m1)?;

    let cond_i = family.members > 0 && family.failures == 0 && family.c_min < family.c_max;
    if !cond_i {
        diagnostics.push(format!(
            "family sweep over [{}, {}]: {} members, {} failures",
            family.c_min, family.c_max, family.members, family.failures
        ));
    }
    let cond_ii = kernel_dim_even == 1
        && near_zero(m1) == 1
        && m0_gap > threshold
        && m2_gap > threshold
        && m0.eigenvalues[0] < 0.0;
    if !cond_ii {
        diagnostics.push(format!(
            "kernel dimension {kernel_dim_even}, m0 gap {m0_gap:e}, m2 gap {m2_gap:e}, threshold {threshold:e}"
        ));
    }
    let cond_iii = lin.h_prime_boundary.abs() > 1e3 * SOLVER_TOL;
    if !cond_iii {
        diagnostics.push(format!(
            "h_prime_boundary {:e} indistinguishable from 0",
            lin.h_prime_boundary
        ));
    }
    let verdict = if cond_i && cond_ii && cond_iii {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(BifurcationCertificate {
        c_o: curve.params().c_o(),
        z_o: curve.params().z_o(),
        kernel_dim_even,
        h_prime_boundary: lin.h_prime_boundary,
        m1_zero_eigenvalue: m1_zero,
        m1_zero_residual,
        m1_kernel_shape_error: shape_error,
        m0_lowest: m0.eigenvalues[0],
        m0_gap,
        m2_gap,
        zero_threshold: threshold,
        grid: evidence.grid,
        conditions: Conditions {
            i: cond_i,
            ii: cond_ii,
            iii: cond_iii,
        },
        diagnostics,
        verdict,
    })
}

/// Runs every solve behind the certificate for the disc spanning `circle`:
/// shooting, the linearized solution, spectra for `m ≤ 2` on `grid` intervals
/// and a family sweep over `c_o (1 ± 5%)`.
pub fn certify_circle(
    circle: &BoundaryCircle,
    settings: &IntegratorSettings,
    grid: usize,
) -> Result<(Sigma0Solution, BifurcationCertificate)> {
    let sigma0 = shoot_sigma0(circle, None, settings, &ShootingOptions::default())?;
    let c0 = sigma0.params.c_o();
    let (c_min, c_max) = (0.95 * c0, 1.05 * c0);
    let ((lin, spectra), sweep) = rayon::join(
        || {
            rayon::join(
                || solve_h(&sigma0.curve),
                || eigen_solve_modes(&sigma0.curve, 2, 4, grid),
            )
        },
        || family_sweep_from(&sigma0, c_min, c_max, 5, settings),
    );
    let sweep = sweep?;
    let evidence = CertificateEvidence {
        curve: Some(sigma0.curve.clone()),
        linearized: Some(lin?),
        spectra: spectra?,
        family: Some(FamilyEvidence {
            c_min,
            c_max,
            members: sweep.members().count(),
            failures: sweep.failures().count(),
        }),
        grid,
    };
    let cert = certify(&evidence)?;
    Ok((sigma0, cert))
}
