//! Triangulated surfaces of revolution and their first-order perturbations.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearized::LinearizedSolution;
use crate::profile::{ProfileCurve, StopReason};

pub const MIN_THETA: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices, counter-clockwise seen from the normal side.
    pub faces: Vec<[usize; 3]>,
    /// Normal displacement applied at each vertex.
    pub displacement: Vec<f64>,
    pub meta: BTreeMap<String, String>,
    pub n_theta: usize,
}

fn theta(j: usize, n_theta: usize) -> f64 {
    2.0 * PI * j as f64 / n_theta as f64
}

/// Builds the mesh with vertex `(k, j)` moved by `disp(k, θ_j)` along the unit
/// normal `(sin φ cos θ, sin φ sin θ, −cos φ)`.
fn build<F>(curve: &ProfileCurve, n_theta: usize, disp: F) -> Result<SurfaceMesh>
where
    F: Fn(usize, f64) -> f64,
{
    if n_theta < MIN_THETA {
        return Err(Error::InvalidParams(format!(
            "n_theta must be >= {MIN_THETA}, got {n_theta}"
        )));
    }
    let samples = curve.samples();
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: 2,
        });
    }
    let mut vertices = Vec::with_capacity((samples.len() - 1) * n_theta + 1);
    let mut displacement = Vec::with_capacity(vertices.capacity());

    // apex: the normal there is vertical and any θ-dependent term vanishes
    let apex = samples[0];
    let d0 = disp(0, 0.0);
    vertices.push([0.0, 0.0, apex.z - d0 * apex.phi.cos()]);
    displacement.push(d0);

    for (k, s) in samples.iter().enumerate().skip(1) {
        let (sp, cp) = s.phi.sin_cos();
        for j in 0..n_theta {
            let th = theta(j, n_theta);
            let (st, ct) = th.sin_cos();
            let d = disp(k, th);
            vertices.push([(s.r + d * sp) * ct, (s.r + d * sp) * st, s.z - d * cp]);
            displacement.push(d);
        }
    }

    let ring = |k: usize, j: usize| 1 + (k - 1) * n_theta + (j % n_theta);
    let mut faces = Vec::with_capacity((2 * samples.len() - 3) * n_theta);
    for j in 0..n_theta {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for k in 1..samples.len() - 1 {
        for j in 0..n_theta {
            let (a, b) = (ring(k, j), ring(k, j + 1));
            let (c, d) = (ring(k + 1, j), ring(k + 1, j + 1));
            faces.push([a, c, d]);
            faces.push([a, d, b]);
        }
    }

    let params = curve.params();
    let mut meta = BTreeMap::new();
    meta.insert("c_o".into(), format!("{:.16e}", params.c_o()));
    meta.insert("z_o".into(), format!("{:.16e}", params.z_o()));
    meta.insert("samples".into(), samples.len().to_string());
    meta.insert("n_theta".into(), n_theta.to_string());
    Ok(SurfaceMesh {
        vertices,
        faces,
        displacement,
        meta,
        n_theta,
    })
}

/// Triangulated surface of revolution with a fan at the apex.
pub fn revolve(curve: &ProfileCurve, n_theta: usize) -> Result<SurfaceMesh> {
    let mut mesh = build(curve, n_theta, |_, _| 0.0)?;
    mesh.meta.insert("kind".into(), "revolution".into());
    Ok(mesh)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SurfaceMesh {
    /// Twice-area normal of face `f`.
    pub fn face_normal(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f];
        let (va, vb, vc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        cross(sub(vb, va), sub(vc, va))
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| 0.5 * dot(self.face_normal(f), self.face_normal(f)).sqrt())
            .sum()
    }

    pub fn min_face_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| 0.5 * dot(self.face_normal(f), self.face_normal(f)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// `V − E + F`; a disc has 1.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Indices of the outermost ring of vertices.
    pub fn boundary_vertices(&self) -> std::ops::Range<usize> {
        let n = self.vertices.len();
        n - self.n_theta..n
    }

    /// Index of the vertex at `θ → −θ` of `v`.
    pub fn mirror_of(&self, v: usize) -> usize {
        if v == 0 {
            return 0;
        }
        let ring = (v - 1) / self.n_theta;
        let j = (v - 1) % self.n_theta;
        1 + ring * self.n_theta + (self.n_theta - j) % self.n_theta
    }
}

/// Rejects perturbations that flip or collapse faces of `base`.
fn check_against(
    base: &SurfaceMesh,
    moved: &SurfaceMesh,
    amplitude: f64,
    scale: f64,
) -> Result<()> {
    let min_area = 1e-12 * scale * scale;
    for f in 0..base.faces.len() {
        let n0 = base.face_normal(f);
        let n1 = moved.face_normal(f);
        let a0 = 0.5 * dot(n0, n0).sqrt();
        let a1 = 0.5 * dot(n1, n1).sqrt();
        if dot(n0, n1) <= 0.0 || (a1 < min_area && a0 >= min_area) {
            return Err(Error::AmplitudeTooLarge(amplitude));
        }
    }
    Ok(())
}

fn boundary_scale(curve: &ProfileCurve) -> f64 {
    curve.endpoint().r.max(curve.params().length_scale())
}

/// Linear approximation `X₀ + s z_ς cos θ ν` of the bifurcating branch.
pub fn branch_linear_mesh(curve: &ProfileCurve, s: f64, n_theta: usize) -> Result<SurfaceMesh> {
    let base = revolve(curve, n_theta)?;
    let samples = curve.samples();
    let last = samples.len() - 1;
    let tangential = curve.stop_reason() == StopReason::TangentHorizontal;
    let mut mesh = build(curve, n_theta, |k, th| {
        // z_ς = sin φ vanishes on a tangential boundary; keep it exactly fixed
        if k == last && tangential {
            0.0
        } else {
            s * samples[k].phi.sin() * th.cos()
        }
    })?;
    check_against(&base, &mesh, s, boundary_scale(curve))?;
    mesh.meta.insert("kind".into(), "branch_linear".into());
    mesh.meta.insert("amplitude".into(), format!("{s:.16e}"));
    Ok(mesh)
}

/// Linear approximation `X₀ + t h ν` of the fixed-boundary family.
pub fn family_linear_mesh(
    curve: &ProfileCurve,
    lin: &LinearizedSolution,
    t: f64,
    n_theta: usize,
) -> Result<SurfaceMesh> {
    let base = revolve(curve, n_theta)?;
    let samples = curve.samples();
    let ell = curve.ell();
    let mut mesh = build(curve, n_theta, |k, _| {
        // the boundary condition is exact: h vanishes there
        if samples[k].tau == ell {
            0.0
        } else {
            t * lin.h_at(samples[k].tau)
        }
    })?;
    check_against(&base, &mesh, t, boundary_scale(curve))?;
    mesh.meta.insert("kind".into(), "family_linear".into());
    mesh.meta.insert("amplitude".into(), format!("{t:.16e}"));
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{integrate_profile, IntegratorSettings, ModelParams, StopCondition};

    fn curve() -> ProfileCurve {
        integrate_profile(
            &ModelParams::new(2.0, -0.6).unwrap(),
            &StopCondition::horizontal_tangent(),
            &IntegratorSettings::default(),
        )
        .unwrap()
        .with_uniform_samples(60)
    }

    #[test]
    fn counts_and_topology() {
        let c = curve();
        let m = revolve(&c, 32).unwrap();
        assert_eq!(m.vertices.len(), 60 * 32 + 1);
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.min_face_area() > 1e-12);
        assert!(revolve(&c, 8).is_err());
    }

    #[test]
    fn zero_amplitude_is_base() {
        let c = curve();
        let base = revolve(&c, 24).unwrap();
        let b = branch_linear_mesh(&c, 0.0, 24).unwrap();
        assert_eq!(base.vertices, b.vertices);
        assert_eq!(base.faces, b.faces);
    }

    #[test]
    fn large_amplitude_rejected() {
        let c = curve();
        assert!(matches!(
            branch_linear_mesh(&c, 50.0, 24),
            Err(Error::AmplitudeTooLarge(_))
        ));
    }

    #[test]
    fn mirror_index() {
        let m = revolve(&curve(), 16).unwrap();
        assert_eq!(m.mirror_of(0), 0);
        assert_eq!(m.mirror_of(1), 1);
        assert_eq!(m.mirror_of(2), 16);
        assert_eq!(m.mirror_of(m.mirror_of(37)), 37);
    }
}
