//! Run configuration.
//!
//! The file is plain `key = value` text grouped in sections:
//!
//! ```text
//! [physical]        mu, eps, rho0, eta, sigma, drift
//! [grid.ions]       nx, nv, v_min, v_max
//! [grid.electrons]  nx, nv, v_min, v_max
//! [numerics]        d, dt, t_final, v_scheme, equilibrium_n
//! [io]              output_dir, snapshot_interval, checkpoint_interval, resume_path
//! ```
//!
//! Every key is optional; an empty file gives the full-resolution deuterium
//! setup. The syntax is TOML, so strings are quoted (`v_scheme = "lagrange"`).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SheathError};
use crate::mesh::{make_phase_grid, PhaseGrid, PhysicalParams};
use crate::transport::{SplitConfig, VelocityScheme};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesGrid {
    pub nx: usize,
    pub nv: usize,
    pub v_min: f64,
    pub v_max: f64,
}

impl SpeciesGrid {
    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        make_phase_grid(self.nx, self.nv, self.v_min, self.v_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawGrids")]
pub struct Grids {
    pub ions: SpeciesGrid,
    pub electrons: SpeciesGrid,
}

// Species sections may list only some keys; the rest fall back per species.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RawGrids {
    ions: RawSpeciesGrid,
    electrons: RawSpeciesGrid,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RawSpeciesGrid {
    nx: Option<usize>,
    nv: Option<usize>,
    v_min: Option<f64>,
    v_max: Option<f64>,
}

impl RawSpeciesGrid {
    fn over(self, base: SpeciesGrid) -> SpeciesGrid {
        SpeciesGrid {
            nx: self.nx.unwrap_or(base.nx),
            nv: self.nv.unwrap_or(base.nv),
            v_min: self.v_min.unwrap_or(base.v_min),
            v_max: self.v_max.unwrap_or(base.v_max),
        }
    }
}

impl From<RawGrids> for Grids {
    fn from(raw: RawGrids) -> Self {
        let base = Grids::default();
        Grids { ions: raw.ions.over(base.ions), electrons: raw.electrons.over(base.electrons) }
    }
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            ions: SpeciesGrid { nx: 2048, nv: 4096, v_min: -5.0, v_max: 5.0 },
            electrons: SpeciesGrid { nx: 2048, nv: 4096, v_min: -200.0, v_max: 500.0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SchemeName {
    Spline,
    Lagrange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub d: usize,
    pub dt: f64,
    pub t_final: f64,
    #[serde(with = "scheme_serde")]
    pub v_scheme: VelocityScheme,
    /// Cells of the equilibrium potential grid.
    pub equilibrium_n: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { d: 8, dt: 1e-5, t_final: 8.03478, v_scheme: VelocityScheme::PeriodicSpline, equilibrium_n: 2048 }
    }
}

mod scheme_serde {
    use super::{SchemeName, VelocityScheme};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &VelocityScheme, s: S) -> Result<S::Ok, S::Error> {
        match v {
            VelocityScheme::PeriodicSpline => SchemeName::Spline,
            VelocityScheme::Lagrange => SchemeName::Lagrange,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<VelocityScheme, D::Error> {
        Ok(match SchemeName::deserialize(d)? {
            SchemeName::Spline => VelocityScheme::PeriodicSpline,
            SchemeName::Lagrange => VelocityScheme::Lagrange,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub output_dir: PathBuf,
    pub snapshot_interval: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_interval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resume_path: Option<PathBuf>,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig { output_dir: PathBuf::from("output"), snapshot_interval: 0.01, checkpoint_interval: None, resume_path: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalParams,
    pub grid: Grids,
    pub numerics: Numerics,
    pub io: IoConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        let (gi, ge) = (&self.grid.ions, &self.grid.electrons);
        if gi.nx != ge.nx {
            return Err(SheathError::Config(format!(
                "grid.ions.nx = {} and grid.electrons.nx = {} must agree",
                gi.nx, ge.nx
            )));
        }
        gi.phase_grid()?;
        ge.phase_grid()?;
        self.split().validate()?;
        crate::boundary::check_stencil_reach(gi.nx, self.numerics.d)?;
        if self.numerics.equilibrium_n < 2 {
            return Err(SheathError::Config("numerics.equilibrium_n must be at least 2".into()));
        }
        if !(self.io.snapshot_interval > 0.0 && self.io.snapshot_interval.is_finite()) {
            return Err(SheathError::Config(format!(
                "io.snapshot_interval must be positive, got {}",
                self.io.snapshot_interval
            )));
        }
        if let Some(c) = self.io.checkpoint_interval {
            if !(c > 0.0 && c.is_finite()) {
                return Err(SheathError::Config(format!("io.checkpoint_interval must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn split(&self) -> SplitConfig {
        let n = &self.numerics;
        SplitConfig { d: n.d, v_scheme: n.v_scheme, dt: n.dt, t_final: n.t_final, freeze_field: false }
    }

    pub fn cadence(&self) -> crate::transport::Cadence {
        crate::transport::Cadence {
            dt: self.numerics.dt,
            snapshot_interval: Some(self.io.snapshot_interval),
            checkpoint_interval: self.io.checkpoint_interval,
        }
    }

    /// SHA-256 of everything that shapes the trajectory: physics, grids and
    /// numerics except `t_final`, so a run can be resumed to a later time.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut numerics = self.numerics;
        numerics.t_final = 0.0;
        let key = RunConfig { numerics, io: IoConfig::default(), ..self.clone() };
        Sha256::digest(key.serialize().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Canonical text form; `parse_config(&c.serialize())` returns `c`.
    pub fn serialize(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_error(text: &str, err: toml::de::Error) -> SheathError {
    let line = err.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    SheathError::Parse { line, msg: err.message().to_string() }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_with_overrides(text, &[])
}

/// Parses `text`, then applies `section.key=value` overrides (for example
/// `numerics.d=0` or `grid.ions.nx=256`) before validating.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().map_err(|e| parse_error(text, e))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let cfg = if overrides.is_empty() {
        toml::from_str::<RunConfig>(text).map_err(|e| parse_error(text, e))?
    } else {
        RunConfig::deserialize(table).map_err(|e| SheathError::Config(format!("after overrides: {}", e.message())))?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| SheathError::Config(format!("override '{item}' is not of the form section.key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(SheathError::Config(format!("override key '{path}' must be section.key")));
    }
    let raw = raw.trim();
    // unquoted words such as `lagrange` are taken as strings
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, sections) = keys.split_last().expect("at least two keys");
    let mut node = table;
    for key in sections {
        let entry = node.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| SheathError::Config(format!("override '{path}': '{key}' is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.numerics.d, 8);
        assert_eq!(c.numerics.dt, 1e-5);
        assert_eq!(c.io.snapshot_interval, 0.01);
        assert_eq!(c.grid.electrons, SpeciesGrid { nx: 2048, nv: 4096, v_min: -200.0, v_max: 500.0 });
        assert_eq!(c.grid.ions, SpeciesGrid { nx: 2048, nv: 4096, v_min: -5.0, v_max: 5.0 });
        assert_eq!(c.physical.mu, 1.0 / 3672.0);
    }

    #[test]
    fn sections_and_integer_literals() {
        let text = "[physical]\neps = 0.02\n\n[grid.ions]\nnx = 256\nnv = 512\nv_min = -10\nv_max = 10\n\n\
                    [grid.electrons]\nnx = 256\nnv = 512\nv_min = -500\nv_max = 500\n\n\
                    [numerics]\nd = 0\nv_scheme = \"lagrange\"\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.physical.eps, 0.02);
        let partial = parse_config("[grid.ions]\nnx = 64\n[grid.electrons]\nnx = 64\nv_min = -500\n").unwrap();
        assert_eq!(partial.grid.ions, SpeciesGrid { nx: 64, nv: 4096, v_min: -5.0, v_max: 5.0 });
        assert_eq!(partial.grid.electrons.v_min, -500.0);
        assert!(parse_config("[grid.ions]\nn = 3\n").is_err());
        assert_eq!(c.grid.ions.v_min, -10.0);
        assert_eq!(c.numerics.d, 0);
        assert_eq!(c.numerics.v_scheme, VelocityScheme::Lagrange);
    }

    #[test]
    fn overrides_win() {
        let sets = vec!["numerics.d=0".to_string(), "numerics.v_scheme=lagrange".to_string(), "io.checkpoint_interval = 0.5".into()];
        let c = parse_with_overrides("[numerics]\nd = 3\n", &sets).unwrap();
        assert_eq!(c.numerics.d, 0);
        assert_eq!(c.numerics.v_scheme, VelocityScheme::Lagrange);
        assert_eq!(c.io.checkpoint_interval, Some(0.5));
        let c = parse_with_overrides("", &["grid.ions.nx=64".into(), "grid.electrons.nx=64".into()]).unwrap();
        assert_eq!(c.grid.ions.nx, 64);
        assert_eq!(c.grid.ions.nv, 4096);
    }

    #[test]
    fn malformed_number_cites_line() {
        let err = parse_config("[numerics]\nd = 2\ndt = 1e-5x\n").unwrap_err();
        match err {
            SheathError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("[numerics]\n\nstep = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("step"), "{msg}");
        assert!(matches!(err, SheathError::Parse { line: 3, .. }), "{err:?}");
        assert!(parse_config("[plasma]\nx = 1\n").is_err());
        assert!(parse_with_overrides("", &["numerics.nope=1".into()]).unwrap_err().to_string().contains("nope"));
    }

    #[test]
    fn invariant_violations() {
        assert!(parse_config("[numerics]\ndt = 0.0\n").is_err());
        assert!(parse_config("[numerics]\nt_final = -1.0\n").is_err());
        assert!(parse_config("[io]\nsnapshot_interval = 0.0\n").is_err());
        assert!(parse_config("[physical]\neps = -1.0\n").is_err());
        assert!(parse_with_overrides("", &["grid.ions.nx=64".into()]).is_err());
        assert!(parse_with_overrides("", &["grid.ions.nx=8".into(), "grid.electrons.nx=8".into()]).is_err());
        assert!(parse_with_overrides("", &["numerics".into()]).is_err());
    }

    #[test]
    fn digest_ignores_end_time_and_io() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.numerics.t_final = 1.0;
        b.io.output_dir = "elsewhere".into();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        b.numerics.dt = 2e-5;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn serialize_round_trip_default() {
        let c = RunConfig::default();
        assert_eq!(parse_config(&c.serialize()).unwrap(), c);
    }

    proptest! {
        #[test]
        fn serialize_round_trip(
            mu in 1e-5f64..1.0,
            eps in 1e-3f64..1.0,
            drift in -2.0f64..3.0,
            nx in 20usize..400,
            nv_i in 4usize..600,
            vmin in -600.0f64..-1.0,
            d in 0usize..8,
            dt in 1e-7f64..1e-2,
            lagrange in any::<bool>(),
            chk in proptest::option::of(1e-3f64..1.0),
        ) {
            let mut c = RunConfig::default();
            c.physical.mu = mu;
            c.physical.eps = eps;
            c.physical.drift = drift;
            c.grid.ions.nx = nx;
            c.grid.electrons.nx = nx;
            c.grid.ions.nv = nv_i;
            c.grid.electrons.v_min = vmin;
            c.numerics.d = d;
            c.numerics.dt = dt;
            c.numerics.v_scheme = if lagrange { VelocityScheme::Lagrange } else { VelocityScheme::PeriodicSpline };
            c.io.checkpoint_interval = chk;
            prop_assert_eq!(parse_config(&c.serialize()).unwrap(), c);
        }
    }
}
