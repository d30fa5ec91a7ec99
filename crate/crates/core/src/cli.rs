//! Command-line front end.
//!
//! ```text
//! membrane <command> [--config FILE] [--key value]...
//! membrane --recipe fig1|fig2|fig3|table1 [--out DIR]
//! ```
//!
//! Every configuration key is also a flag. A config file holds `key = value`
//! lines (`#` starts a comment); flags override file values, and a repeated
//! key keeps its last value with a warning. Each run writes its artifacts, the
//! resolved `config.txt` and a `run.json` record into one output directory,
//! by default `$MEMBRANE_OUT_DIR/<command>` or `membrane-out/<command>`.
//!
//! Exit status: 0 on success, 1 on usage or validation errors, 2 when the
//! numerics fail to converge.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Arg, ArgAction};

use crate::error::{Error, Result};
use crate::export::{self, ArtifactWriter, RunRecord};
use crate::linearized::{self, h_from_support, residual_pnu3, solve_h, TABLE1_Z};
use crate::profile::{
    energy, first_integral_residual, fourth_order_residual, integrate_profile, shape_diagnostics,
    IntegratorSettings, ModelParams, ProfileCurve, StopCondition,
};
use crate::shooting::{
    family_sweep, shoot_family_member, shoot_sigma0, BoundaryCircle, ShootingOptions,
    Sigma0Solution,
};
use crate::spectral::{certify_circle, eigen_solve_modes, Verdict};
use crate::surfaces::{branch_linear_mesh, family_linear_mesh, revolve, SurfaceMesh};

pub const OUT_DIR_ENV: &str = "MEMBRANE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Trace,
    Sigma0,
    Family,
    Linearize,
    Table1,
    Eigen,
    Certify,
    Mesh,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Trace,
        Command::Sigma0,
        Command::Family,
        Command::Linearize,
        Command::Table1,
        Command::Eigen,
        Command::Certify,
        Command::Mesh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::Sigma0 => "sigma0",
            Command::Family => "family",
            Command::Linearize => "linearize",
            Command::Table1 => "table1",
            Command::Eigen => "eigen",
            Command::Certify => "certify",
            Command::Mesh => "mesh",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Trace => "Integrate one generating curve from the axis",
            Command::Sigma0 => "Shoot the tangential disc spanning a boundary circle",
            Command::Family => "Sweep the fixed-boundary family over a curvature range",
            Command::Linearize => "Solve for the axisymmetric kernel and the function h",
            Command::Table1 => "Boundary derivative of h for the standard axis heights",
            Command::Eigen => "Fourier-mode spectra of the linearized operator",
            Command::Certify => "Check the bifurcation conditions on a boundary circle",
            Command::Mesh => "Triangulate the disc or a first-order perturbation",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Float,
    Count,
    Flag,
    Choice(&'static [&'static str]),
    Path,
}

struct KeyDef {
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    commands: &'static [Command],
}

use Command::*;

const ALL_COMMANDS: &[Command] = &[
    Trace, Sigma0, Family, Linearize, Table1, Eigen, Certify, Mesh,
];
const CIRCLE_COMMANDS: &[Command] = &[Sigma0, Family, Eigen, Certify, Mesh];

const KEYS: &[KeyDef] = &[
    KeyDef {
        name: "c_o",
        kind: Kind::Float,
        default: None,
        commands: &[Trace, Linearize, Table1],
    },
    KeyDef {
        name: "z_o",
        kind: Kind::Float,
        default: None,
        commands: &[Trace, Linearize],
    },
    KeyDef {
        name: "R",
        kind: Kind::Float,
        default: None,
        commands: CIRCLE_COMMANDS,
    },
    KeyDef {
        name: "Z",
        kind: Kind::Float,
        default: None,
        commands: CIRCLE_COMMANDS,
    },
    KeyDef {
        name: "rtol",
        kind: Kind::Float,
        default: Some("1e-10"),
        commands: ALL_COMMANDS,
    },
    KeyDef {
        name: "atol",
        kind: Kind::Float,
        default: Some("1e-12"),
        commands: ALL_COMMANDS,
    },
    KeyDef {
        name: "tau0_factor",
        kind: Kind::Float,
        default: Some("1e-6"),
        commands: ALL_COMMANDS,
    },
    KeyDef {
        name: "max_step_factor",
        kind: Kind::Float,
        default: Some("0.01"),
        commands: ALL_COMMANDS,
    },
    KeyDef {
        name: "stop",
        kind: Kind::Choice(&["phi", "arc"]),
        default: Some("phi"),
        commands: &[Trace],
    },
    KeyDef {
        name: "arc_length",
        kind: Kind::Float,
        default: None,
        commands: &[Trace],
    },
    KeyDef {
        name: "c_min",
        kind: Kind::Float,
        default: None,
        commands: &[Family],
    },
    KeyDef {
        name: "c_max",
        kind: Kind::Float,
        default: None,
        commands: &[Family],
    },
    KeyDef {
        name: "n",
        kind: Kind::Count,
        default: Some("13"),
        commands: &[Family],
    },
    KeyDef {
        name: "grid",
        kind: Kind::Count,
        default: Some("1000"),
        commands: &[Eigen, Certify],
    },
    KeyDef {
        name: "modes",
        kind: Kind::Count,
        default: Some("2"),
        commands: &[Eigen],
    },
    KeyDef {
        name: "count",
        kind: Kind::Count,
        default: Some("4"),
        commands: &[Eigen],
    },
    KeyDef {
        name: "eigenfunctions",
        kind: Kind::Flag,
        default: Some("false"),
        commands: &[Eigen],
    },
    KeyDef {
        name: "kind",
        kind: Kind::Choice(&["revolve", "branch", "family"]),
        default: Some("revolve"),
        commands: &[Mesh],
    },
    KeyDef {
        name: "amplitude",
        kind: Kind::Float,
        default: Some("0"),
        commands: &[Mesh],
    },
    KeyDef {
        name: "n_theta",
        kind: Kind::Count,
        default: Some("64"),
        commands: &[Mesh],
    },
    KeyDef {
        name: "samples",
        kind: Kind::Count,
        default: Some("200"),
        commands: &[Mesh],
    },
    KeyDef {
        name: "out",
        kind: Kind::Path,
        default: None,
        commands: ALL_COMMANDS,
    },
];

fn key_def(key: &str) -> Option<&'static KeyDef> {
    KEYS.iter().find(|k| k.name == key)
}

fn check_value(key: &KeyDef, value: &str, context: &str) -> Result<()> {
    let bad = |message: String| Error::Parse {
        context: context.to_string(),
        message,
    };
    match key.kind {
        Kind::Float => value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|_| ())
            .ok_or_else(|| bad(format!("{}: expected a number, got {value:?}", key.name))),
        Kind::Count => value.parse::<usize>().map(|_| ()).map_err(|_| {
            bad(format!(
                "{}: expected a non-negative integer, got {value:?}",
                key.name
            ))
        }),
        Kind::Flag => match value {
            "true" | "false" => Ok(()),
            _ => Err(bad(format!(
                "{}: expected true or false, got {value:?}",
                key.name
            ))),
        },
        Kind::Choice(options) => {
            if options.contains(&value) {
                Ok(())
            } else {
                Err(bad(format!(
                    "{}: expected one of {options:?}, got {value:?}",
                    key.name
                )))
            }
        }
        Kind::Path => Ok(()),
    }
}

/// A validated command with every key resolved to a string value.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandConfig {
    pub command: Command,
    pub values: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl CommandConfig {
    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Usage(format!("{}: missing required key {key}", self.command)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        Ok(self.raw(key)?.parse().expect("validated"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.raw(key)?.parse().expect("validated"))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.raw(key)? == "true")
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    pub fn settings(&self) -> Result<IntegratorSettings> {
        Ok(IntegratorSettings {
            rtol: self.f64("rtol")?,
            atol: self.f64("atol")?,
            tau0_factor: self.f64("tau0_factor")?,
            max_step_factor: self.f64("max_step_factor")?,
            ..IntegratorSettings::default()
        })
    }

    fn circle(&self) -> Result<BoundaryCircle> {
        BoundaryCircle::new(self.f64("R")?, self.f64("Z")?)
    }

    /// `key = value` lines for every resolved key except the output directory.
    pub fn to_config_text(&self) -> String {
        let mut out = format!("# {}\n", self.command);
        for (k, v) in &self.values {
            if k != "out" {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn out_dir(&self) -> PathBuf {
        match self.values.get("out") {
            Some(p) => PathBuf::from(p),
            None => default_out_dir(self.command.name()),
        }
    }
}

pub fn default_out_dir(name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("membrane-out"));
    base.join(name)
}

/// Parses `key = value` lines. Returns the pairs in file order.
pub fn parse_config_text(text: &str, context: &str) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("{context}:{}", i + 1);
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            context: at.clone(),
            message: format!("expected key = value, got {line:?}"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse {
                context: at,
                message: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.to_string(), at));
    }
    Ok(out)
}

/// Resolves a command from config-file entries followed by flag entries.
pub fn load_config(
    command: Command,
    file_entries: &[(String, String, String)],
    flag_entries: &[(String, String, String)],
) -> Result<CommandConfig> {
    let mut values = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut from_flags = std::collections::BTreeSet::new();
    for (is_flag, entries) in [(false, file_entries), (true, flag_entries)] {
        for (k, v, at) in entries {
            let key = key_def(k).ok_or_else(|| Error::Parse {
                context: at.clone(),
                message: format!("unknown key {k:?}"),
            })?;
            if !key.commands.contains(&command) {
                return Err(Error::Parse {
                    context: at.clone(),
                    message: format!("key {k:?} does not apply to {command}"),
                });
            }
            check_value(key, v, at)?;
            let seen_here = if is_flag {
                !from_flags.insert(k.clone())
            } else {
                values.contains_key(k)
            };
            if seen_here {
                warnings.push(format!("{at}: duplicate key {k}, last value {v:?} wins"));
            }
            values.insert(k.clone(), v.clone());
        }
    }
    for key in KEYS {
        if key.commands.contains(&command) && !values.contains_key(key.name) {
            if let Some(d) = key.default {
                values.insert(key.name.to_string(), d.to_string());
            }
        }
    }
    if command == Table1 && !values.contains_key("c_o") {
        values.insert("c_o".into(), "2".into());
    }
    let config = CommandConfig {
        command,
        values,
        warnings,
    };
    validate(&config)?;
    Ok(config)
}

fn require(config: &CommandConfig, keys: &[&str]) -> Result<()> {
    let missing: Vec<&str> = keys
        .iter()
        .copied()
        .filter(|k| !config.values.contains_key(*k))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "{}: missing required key(s) {}",
            config.command,
            missing.join(", ")
        )))
    }
}

/// Command-specific checks that need no computation.
fn validate(config: &CommandConfig) -> Result<()> {
    match config.command {
        Trace => {
            require(config, &["c_o", "z_o"])?;
            let params = ModelParams::new(config.f64("c_o")?, config.f64("z_o")?)?;
            if config.str("stop")? == "phi" {
                if !params.sigma0_admissible() {
                    return Err(Error::NotAdmissible(params.c_o() * params.z_o()));
                }
            } else {
                require(config, &["arc_length"])?;
            }
        }
        Linearize => {
            require(config, &["c_o", "z_o"])?;
            let params = ModelParams::new(config.f64("c_o")?, config.f64("z_o")?)?;
            if !params.sigma0_admissible() {
                return Err(Error::NotAdmissible(params.c_o() * params.z_o()));
            }
        }
        Table1 => {
            ModelParams::new(config.f64("c_o")?, -1.0)?;
        }
        Family => {
            require(config, &["R", "Z", "c_min", "c_max"])?;
            config.circle()?;
            let (lo, hi) = (config.f64("c_min")?, config.f64("c_max")?);
            if !(lo > 0.0 && hi >= lo) || config.usize("n")? == 0 {
                return Err(Error::InvalidParams(format!(
                    "family needs 0 < c_min <= c_max and n >= 1, got [{lo}, {hi}], n = {}",
                    config.usize("n")?
                )));
            }
        }
        Sigma0 | Eigen | Certify | Mesh => {
            require(config, &["R", "Z"])?;
            config.circle()?;
        }
    }
    Ok(())
}

/// What a command line asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run(CommandConfig),
    Recipe { name: String, out: PathBuf },
    Help(String),
}

pub const RECIPES: [&str; 4] = ["fig1", "fig2", "fig3", "table1"];

/// The argument parser; every configuration key of a command is a flag.
pub fn command_line() -> clap::Command {
    let mut cmd = clap::Command::new("membrane")
        .about("Axisymmetric membrane discs, their linearization and symmetry-breaking bifurcation")
        .version(env!("CARGO_PKG_VERSION"))
        .args_conflicts_with_subcommands(true)
        .arg(
            Arg::new("recipe")
                .long("recipe")
                .value_parser(RECIPES)
                .help("Run a built-in figure or table recipe"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("DIR")
                .requires("recipe")
                .help("Output directory"),
        );
    for command in Command::ALL {
        let mut sub = clap::Command::new(command.name())
            .about(command.about())
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("key = value configuration file"),
            );
        for key in KEYS.iter().filter(|k| k.commands.contains(&command)) {
            let mut arg = Arg::new(key.name)
                .long(key.name)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .action(ArgAction::Append);
            if let Some(d) = key.default {
                arg = arg.help(format!("default {d}"));
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

pub fn parse_args<I, S>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let argv = std::iter::once("membrane".to_string())
        .chain(args.into_iter().map(|s| s.as_ref().to_string()));
    let matches = match command_line().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Invocation::Help(e.render().to_string()))
                }
                _ => Err(Error::Usage(e.render().to_string().trim_end().to_string())),
            }
        }
    };

    if let Some(name) = matches.get_one::<String>("recipe") {
        let out = matches
            .get_one::<String>("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| default_out_dir(name));
        return Ok(Invocation::Recipe {
            name: name.clone(),
            out,
        });
    }

    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| Error::Usage(command_line().render_usage().to_string()))?;
    let command: Command = name.parse()?;
    let mut flags = Vec::new();
    for key in KEYS.iter().filter(|k| k.commands.contains(&command)) {
        if let Some(values) = sub.get_many::<String>(key.name) {
            for v in values {
                flags.push((key.name.to_string(), v.clone(), format!("--{}", key.name)));
            }
        }
    }
    let file_entries = match sub.get_one::<String>("config") {
        Some(p) => parse_config_text(&export::read_text(Path::new(p))?, p)?,
        None => Vec::new(),
    };
    Ok(Invocation::Run(load_config(
        command,
        &file_entries,
        &flags,
    )?))
}

fn record_settings(record: &mut RunRecord, s: &IntegratorSettings) {
    record.tolerances.insert("rtol".into(), s.rtol);
    record.tolerances.insert("atol".into(), s.atol);
    record
        .tolerances
        .insert("tau0_factor".into(), s.tau0_factor);
    record
        .tolerances
        .insert("max_step_factor".into(), s.max_step_factor);
    record
        .tolerances
        .insert("event_tol_factor".into(), s.event_tol_factor);
}

fn bool_num(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn sigma0_for(config: &CommandConfig, settings: &IntegratorSettings) -> Result<Sigma0Solution> {
    shoot_sigma0(
        &config.circle()?,
        None,
        settings,
        &ShootingOptions::default(),
    )
}

fn profile_scalars(w: &mut ArtifactWriter, prefix: &str, curve: &ProfileCurve) -> Result<()> {
    let end = curve.endpoint();
    let d = &mut w.record.derived;
    d.insert(format!("{prefix}ell"), curve.ell());
    d.insert(format!("{prefix}r_end"), end.r);
    d.insert(format!("{prefix}z_end"), end.z);
    d.insert(format!("{prefix}phi_end"), end.phi);
    d.insert(format!("{prefix}energy"), energy(curve));
    d.insert(
        format!("{prefix}first_integral_residual"),
        first_integral_residual(curve),
    );
    d.insert(
        format!("{prefix}fourth_order_residual"),
        fourth_order_residual(curve)?,
    );
    Ok(())
}

fn linearized_csv(curve: &ProfileCurve) -> Result<(String, linearized::LinearizedSolution, f64)> {
    let lin = solve_h(curve)?;
    let hs = h_from_support(curve, &lin.psi)?;
    let h_max = lin.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = lin
        .h
        .iter()
        .zip(&hs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut text = String::from("tau,sigma,psi,h,w,h_support\n");
    let ell = curve.ell();
    for k in 0..lin.tau.len() {
        let row = [
            lin.tau[k],
            ell - lin.tau[k],
            lin.psi[k],
            lin.h[k],
            lin.w[k],
            hs[k],
        ];
        text.push_str(
            &row.iter()
                .map(|v| format!("{v:.16e}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        text.push('\n');
    }
    Ok((text, lin, diff / h_max))
}

/// Executes a command; artifacts go to its output directory.
pub fn run(config: &CommandConfig) -> Result<RunRecord> {
    let settings = config.settings()?;
    let mut w = ArtifactWriter::new(config.out_dir(), config.command.name());
    w.record.inputs = config
        .values
        .iter()
        .filter(|(k, _)| k.as_str() != "out")
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    record_settings(&mut w.record, &settings);
    w.write("config.txt", &config.to_config_text())?;

    match config.command {
        Trace => {
            let params = ModelParams::new(config.f64("c_o")?, config.f64("z_o")?)?;
            let stop = if config.str("stop")? == "phi" {
                StopCondition::horizontal_tangent()
            } else {
                StopCondition::arc_length(config.f64("arc_length")?)
            };
            let curve = integrate_profile(&params, &stop, &settings)?;
            w.write("profile.csv", &export::profile_csv(&curve))?;
            profile_scalars(&mut w, "", &curve)?;
            if params.sigma0_admissible() {
                let diag = shape_diagnostics(&curve)?;
                w.record
                    .derived
                    .insert("convex".into(), bool_num(diag.convex));
                w.record
                    .derived
                    .insert("sin_phi_bound_ok".into(), bool_num(diag.sin_phi_bound_ok));
                if let Some(r) = diag.vertical_tangent_r {
                    w.record.derived.insert("vertical_tangent_r".into(), r);
                }
            }
        }
        Sigma0 => {
            let sol = sigma0_for(config, &settings)?;
            w.write("profile.csv", &export::profile_csv(&sol.curve))?;
            let d = &mut w.record.derived;
            d.insert("c_o".into(), sol.params.c_o());
            d.insert("z_o".into(), sol.params.z_o());
            d.insert("boundary_phi".into(), sol.boundary_phi);
            d.insert("match_residual".into(), sol.match_residual);
            d.insert("iterations".into(), sol.iterations as f64);
            profile_scalars(&mut w, "", &sol.curve)?;
        }
        Family => {
            let sweep = family_sweep(
                &config.circle()?,
                config.f64("c_min")?,
                config.f64("c_max")?,
                config.usize("n")?,
                &settings,
            )?;
            let members: Vec<_> = sweep.members().collect();
            if members.is_empty() {
                return Err(Error::NoConvergence {
                    reason: "no family member converged".into(),
                    trace: Vec::new(),
                });
            }
            for (c, why) in sweep.failures() {
                eprintln!("warning: family member c = {c} failed: {why}");
            }
            w.write("family.csv", &export::family_csv(&members))?;
            for (k, m) in members.iter().enumerate() {
                w.write(
                    &format!("member_{k:02}.csv"),
                    &export::profile_csv(&m.curve),
                )?;
            }
            let d = &mut w.record.derived;
            d.insert("sigma0_c_o".into(), sweep.sigma0.params.c_o());
            d.insert("sigma0_z_o".into(), sweep.sigma0.params.z_o());
            d.insert("members".into(), members.len() as f64);
            d.insert("failures".into(), sweep.failures().count() as f64);
            d.insert(
                "contact_angle_sign_changes".into(),
                members
                    .windows(2)
                    .filter(|p| p[0].contact_angle.signum() != p[1].contact_angle.signum())
                    .count() as f64,
            );
        }
        Linearize => {
            let params = ModelParams::new(config.f64("c_o")?, config.f64("z_o")?)?;
            let curve =
                integrate_profile(&params, &StopCondition::horizontal_tangent(), &settings)?;
            let (text, lin, oracle) = linearized_csv(&curve)?;
            w.write("linearized.csv", &text)?;
            let d = &mut w.record.derived;
            d.insert("h_prime_boundary".into(), lin.h_prime_boundary);
            d.insert("alpha".into(), lin.alpha);
            d.insert("support_oracle_rel_diff".into(), oracle);
            d.insert("residual_pnu3".into(), residual_pnu3(&curve)?);
            d.insert("ell".into(), curve.ell());
        }
        Table1 => {
            let c_o = config.f64("c_o")?;
            let rows = linearized::transversality_table(c_o, &TABLE1_Z, &settings)?;
            w.write("table1.csv", &export::table_csv(&rows))?;
            let meta = serde_json::json!({
                "rows": rows,
                "settings": settings,
                "tau0": rows.iter().map(|r| settings.tau0_factor * r.z_o.abs()).collect::<Vec<_>>(),
                "refinement": "axis offset and tolerances halved",
            });
            w.write("table1.json", &export::to_json(&meta))?;
            for r in &rows {
                w.record.derived.insert(
                    format!("h_prime_boundary[z_o={}]", r.z_o),
                    r.h_prime_boundary,
                );
            }
        }
        Eigen => {
            let sol = sigma0_for(config, &settings)?;
            let max_m = u32::try_from(config.usize("modes")?)
                .map_err(|_| Error::InvalidParams("modes too large".into()))?;
            let spectra = eigen_solve_modes(
                &sol.curve,
                max_m,
                config.usize("count")?,
                config.usize("grid")?,
            )?;
            let summary: Vec<_> = spectra
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "m": e.m,
                        "eigenvalues": e.eigenvalues,
                        "eigenvalues_coarse": e.eigenvalues_coarse,
                        "eigenvalues_fine": e.eigenvalues_fine,
                        "discrete_residual": e.discrete_residual,
                        "mesh_intervals": e.mesh.len() - 1,
                    })
                })
                .collect();
            w.write("eigen.json", &export::to_json(&summary))?;
            if config.flag("eigenfunctions")? {
                for e in &spectra {
                    let mut text = String::from("tau");
                    for j in 0..e.eigenfunctions.len() {
                        text.push_str(&format!(",u{j}"));
                    }
                    text.push('\n');
                    for (k, t) in e.mesh.iter().enumerate() {
                        text.push_str(&format!("{t:.16e}"));
                        for u in &e.eigenfunctions {
                            text.push_str(&format!(",{:.16e}", u[k]));
                        }
                        text.push('\n');
                    }
                    w.write(&format!("eigen_m{}.csv", e.m), &text)?;
                }
            }
            for e in &spectra {
                w.record
                    .derived
                    .insert(format!("lowest_eigenvalue[m={}]", e.m), e.eigenvalues[0]);
            }
        }
        Certify => {
            let (sol, cert) = certify_circle(&config.circle()?, &settings, config.usize("grid")?)?;
            w.write("certificate.json", &export::to_json(&cert))?;
            let d = &mut w.record.derived;
            d.insert("c_o".into(), sol.params.c_o());
            d.insert("z_o".into(), sol.params.z_o());
            d.insert("h_prime_boundary".into(), cert.h_prime_boundary);
            d.insert(
                "verdict_pass".into(),
                bool_num(cert.verdict == Verdict::Pass),
            );
            println!("verdict: {:?}", cert.verdict);
        }
        Mesh => {
            let sol = sigma0_for(config, &settings)?;
            let curve = sol.curve.with_uniform_samples(config.usize("samples")?);
            let n_theta = config.usize("n_theta")?;
            let amplitude = config.f64("amplitude")?;
            let mesh = match config.str("kind")? {
                "revolve" => revolve(&curve, n_theta)?,
                "branch" => branch_linear_mesh(&curve, amplitude, n_theta)?,
                _ => family_linear_mesh(&curve, &solve_h(&sol.curve)?, amplitude, n_theta)?,
            };
            w.write("mesh.obj", &export::mesh_obj(&mesh))?;
            mesh_scalars(&mut w.record, "", &mesh);
        }
    }
    w.finish()
}

fn mesh_scalars(record: &mut RunRecord, prefix: &str, mesh: &SurfaceMesh) {
    record
        .derived
        .insert(format!("{prefix}vertices"), mesh.vertices.len() as f64);
    record
        .derived
        .insert(format!("{prefix}faces"), mesh.faces.len() as f64);
    record.derived.insert(format!("{prefix}area"), mesh.area());
}

pub const FIG1_Z: [f64; 6] = [-0.55, -0.6, -0.7, -0.9, -1.2, -2.0];
pub const FIG2_CIRCLE: (f64, f64) = (0.5, -3.0);
pub const FIG2_PANELS: [(&str, f64); 3] = [("A", 1.8), ("C", 1.3), ("D", 1.2)];
pub const FIG3_AMPLITUDE: f64 = 0.25;
pub const RECIPE_SAMPLES: usize = 120;
pub const RECIPE_THETA: usize = 48;

/// Runs one of the built-in figure or table recipes into `out`.
pub fn run_recipe(name: &str, out: &Path) -> Result<RunRecord> {
    let settings = IntegratorSettings::default();
    let mut w = ArtifactWriter::new(out, &format!("recipe:{name}"));
    w.record.inputs.insert("recipe".into(), name.to_string());
    record_settings(&mut w.record, &settings);
    match name {
        "fig1" => {
            let c_o = 2.0;
            w.record.inputs.insert("c_o".into(), c_o.to_string());
            let mut convex = 0;
            for (k, &z_o) in FIG1_Z.iter().enumerate() {
                let params = ModelParams::new(c_o, z_o)?;
                let curve =
                    integrate_profile(&params, &StopCondition::horizontal_tangent(), &settings)?;
                if shape_diagnostics(&curve)?.convex {
                    convex += 1;
                }
                w.write(&format!("profile_{k}.csv"), &export::profile_csv(&curve))?;
                let mesh = revolve(&curve.with_uniform_samples(RECIPE_SAMPLES), RECIPE_THETA)?;
                w.write(&format!("surface_{k}.obj"), &export::mesh_obj(&mesh))?;
                w.record.derived.insert(format!("z_o[{k}]"), z_o);
                w.record.derived.insert(format!("ell[{k}]"), curve.ell());
            }
            w.record
                .derived
                .insert("convex_profiles".into(), convex as f64);
            w.record.derived.insert("dashed_line_z".into(), -1.0 / c_o);
        }
        "fig2" => {
            let circle = BoundaryCircle::new(FIG2_CIRCLE.0, FIG2_CIRCLE.1)?;
            let sweep = family_sweep(&circle, 1.2, 1.8, 13, &settings)?;
            let members: Vec<_> = sweep.members().collect();
            w.write("family.csv", &export::family_csv(&members))?;
            for (k, m) in members.iter().enumerate() {
                w.write(
                    &format!("member_{k:02}.csv"),
                    &export::profile_csv(&m.curve),
                )?;
            }
            let sigma0 = &sweep.sigma0;
            let b = revolve(
                &sigma0.curve.with_uniform_samples(RECIPE_SAMPLES),
                RECIPE_THETA,
            )?;
            w.write("panel_B.obj", &export::mesh_obj(&b))?;
            w.write("panel_B.csv", &export::profile_csv(&sigma0.curve))?;
            for (panel, c) in FIG2_PANELS {
                let m = shoot_family_member(c, sigma0, &settings)?;
                let mesh = revolve(&m.curve.with_uniform_samples(RECIPE_SAMPLES), RECIPE_THETA)?;
                w.write(&format!("panel_{panel}.obj"), &export::mesh_obj(&mesh))?;
                w.write(
                    &format!("panel_{panel}.csv"),
                    &export::profile_csv(&m.curve),
                )?;
                w.record
                    .derived
                    .insert(format!("contact_angle[{panel}]"), m.contact_angle);
            }
            let d = &mut w.record.derived;
            d.insert("sigma0_c_o".into(), sigma0.params.c_o());
            d.insert("sigma0_z_o".into(), sigma0.params.z_o());
            d.insert("failures".into(), sweep.failures().count() as f64);
            d.insert(
                "contact_angle_sign_changes".into(),
                members
                    .windows(2)
                    .filter(|p| p[0].contact_angle.signum() != p[1].contact_angle.signum())
                    .count() as f64,
            );
        }
        "fig3" => {
            let circle = BoundaryCircle::new(FIG2_CIRCLE.0, FIG2_CIRCLE.1)?;
            let sigma0 = shoot_sigma0(&circle, None, &settings, &ShootingOptions::default())?;
            let curve = sigma0.curve.with_uniform_samples(RECIPE_SAMPLES);
            w.write("sigma0.csv", &export::profile_csv(&sigma0.curve))?;
            w.write(
                "sigma0.obj",
                &export::mesh_obj(&revolve(&curve, RECIPE_THETA)?),
            )?;
            for (label, s) in [("plus", FIG3_AMPLITUDE), ("minus", -FIG3_AMPLITUDE)] {
                let mesh = branch_linear_mesh(&curve, s, RECIPE_THETA)?;
                w.write(&format!("branch_{label}.obj"), &export::mesh_obj(&mesh))?;
                mesh_scalars(&mut w.record, &format!("branch_{label}_"), &mesh);
            }
            let d = &mut w.record.derived;
            d.insert("amplitude".into(), FIG3_AMPLITUDE);
            d.insert("sigma0_c_o".into(), sigma0.params.c_o());
            d.insert("sigma0_z_o".into(), sigma0.params.z_o());
        }
        "table1" => {
            let rows = linearized::transversality_table(2.0, &TABLE1_Z, &settings)?;
            w.write("table1.csv", &export::table_csv(&rows))?;
            for r in &rows {
                w.record.derived.insert(
                    format!("h_prime_boundary[z_o={}]", r.z_o),
                    r.h_prime_boundary,
                );
            }
        }
        other => return Err(Error::Usage(format!("unknown recipe {other:?}"))),
    }
    w.finish()
}

/// Exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses and runs a command line, reporting to standard streams.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let result = parse_args(args).and_then(|inv| match inv {
        Invocation::Help(text) => {
            print!("{text}");
            Ok(None)
        }
        Invocation::Recipe { name, out } => run_recipe(&name, &out).map(|r| Some((r, out))),
        Invocation::Run(config) => {
            for warning in &config.warnings {
                eprintln!("warning: {warning}");
            }
            let out = config.out_dir();
            run(&config).map(|r| Some((r, out)))
        }
    });
    match result {
        Ok(Some((record, out))) => {
            println!(
                "{}: wrote {} artifacts to {}",
                record.command,
                record.artifacts.len(),
                out.display()
            );
            0
        }
        Ok(None) => 0,
        Err(e) => {
            match &e {
                Error::Usage(text) => eprintln!("{text}"),
                _ => eprintln!("error: {e}"),
            }
            if let Error::NoConvergence { trace, .. } = &e {
                for t in trace {
                    eprintln!(
                        "  iteration {}: c_o = {}, z_o = {}, mismatch = {:e}",
                        t.iteration, t.c_o, t.z_o, t.mismatch
                    );
                }
            }
            exit_code(&e)
        }
    }
}
