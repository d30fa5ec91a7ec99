//! File formats: profile, family and table CSVs, OBJ meshes and JSON run records.
//!
//! Floating point values are written with 17 significant digits so that every
//! file round-trips exactly. Output depends only on the inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearized::TableRow;
use crate::profile::{geometry_of, ProfileCurve};
use crate::shooting::FamilyMember;
use crate::surfaces::SurfaceMesh;

pub const PROFILE_HEADER: &str = "tau,sigma,r,z,phi,H,K,nu3,kappa,q,xi";
pub const FAMILY_HEADER: &str = "c,z_o,contact_angle,ell,match_residual";
pub const TABLE_HEADER: &str = "c_o,z_o,h_prime_boundary";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_line(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

pub fn profile_csv(curve: &ProfileCurve) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    let ell = curve.ell();
    for s in curve.samples() {
        let g = geometry_of(curve.params(), s);
        out.push_str(&csv_line(&[
            s.tau,
            ell - s.tau,
            s.r,
            s.z,
            s.phi,
            g.mean_curvature,
            g.gauss_curvature,
            g.nu3,
            g.kappa,
            g.support,
            g.xi,
        ]));
        out.push('\n');
    }
    out
}

pub fn family_csv(members: &[&FamilyMember]) -> String {
    let mut out = String::from(FAMILY_HEADER);
    out.push('\n');
    for m in members {
        out.push_str(&csv_line(&[
            m.c,
            m.z_o,
            m.contact_angle,
            m.curve.ell(),
            m.match_residual,
        ]));
        out.push('\n');
    }
    out
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(&[r.c_o, r.z_o, r.h_prime_boundary]));
        out.push('\n');
    }
    out
}

/// ASCII OBJ with `v` and `f` records only; face indices are 1-based.
pub fn mesh_obj(mesh: &SurfaceMesh) -> String {
    let mut out = String::with_capacity(64 * mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", num(v[0]), num(v[1]), num(v[2]));
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

/// Parsed CSV: header names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn parse_csv(text: &str, context: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse {
            context: context.to_string(),
            message: "empty file".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("{context}:{}", i + 2),
                    message: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse {
                context: format!("{context}:{}", i + 2),
                message: format!("expected {} fields, got {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

/// Vertices and one-based triangle indices read from an OBJ file.
pub type ObjData = (Vec<[f64; 3]>, Vec<[usize; 3]>);

/// Vertices and 1-based faces of an OBJ file.
pub fn parse_obj(text: &str, context: &str) -> Result<ObjData> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let err = |line: usize, message: String| Error::Parse {
        context: format!("{context}:{line}"),
        message,
    };
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let v: Vec<f64> = parts
                    .map(|p| p.parse::<f64>().map_err(|e| err(i + 1, e.to_string())))
                    .collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(err(i + 1, "vertex needs 3 coordinates".into()));
                }
                vertices.push([v[0], v[1], v[2]]);
            }
            Some("f") => {
                let f: Vec<usize> = parts
                    .map(|p| p.parse::<usize>().map_err(|e| err(i + 1, e.to_string())))
                    .collect::<Result<_>>()?;
                if f.len() != 3 {
                    return Err(err(i + 1, "face needs 3 indices".into()));
                }
                faces.push([f[0], f[1], f[2]]);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

/// Inputs, tolerances, derived scalars and artifacts of one command run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub derived: BTreeMap<String, f64>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

impl RunRecord {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.display().to_string(),
                source,
            })?;
        }
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Collects files into an output directory and lists them in a [`RunRecord`].
#[derive(Debug)]
pub struct ArtifactWriter {
    pub dir: std::path::PathBuf,
    pub record: RunRecord,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<std::path::PathBuf>, command: &str) -> Self {
        Self {
            dir: dir.into(),
            record: RunRecord::new(command),
        }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_text(&self.dir.join(name), contents)?;
        self.record.artifacts.push(name.to_string());
        Ok(())
    }

    /// Writes `run.json` and returns the record.
    pub fn finish(mut self) -> Result<RunRecord> {
        self.record.artifacts.push("run.json".to_string());
        write_text(&self.dir.join("run.json"), &self.record.to_json())?;
        Ok(self.record)
    }
}
