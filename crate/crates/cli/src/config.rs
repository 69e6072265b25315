//! Plain-text run configuration: one `key = value` pair per line, `#`
//! starts a comment.
//!
//! ```text
//! grid.dim = 1
//! grid.points = 128
//! grid.lengths = 6.283185307179586
//! grid.order = 2
//! medium.n = 1.5                  # or sine(n0, amplitude[, axis])
//! medium.lambda = 0.5             # flat engine only
//! medium.mu = 1
//! engine = flat                   # flat | gordon
//! init.kind = random              # random | plane_wave | file
//! init.seed = 1
//! init.kmax = 8
//! evolution.cfl = 0.25
//! evolution.t_end = 1
//! evolution.sample_every = 1
//! output.dir = out
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use proca_core::modes::ModeKind;
use proca_core::{GridSpec, MediumSpec, RefractiveIndex, ScalarField, StencilOrder};

use crate::error::CliError;
use crate::snapshot::SnapshotFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Flat,
    Gordon,
}

impl EngineKind {
    fn name(self) -> &'static str {
        match self {
            EngineKind::Flat => "flat",
            EngineKind::Gordon => "gordon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dim: usize,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub order: usize,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec, CliError> {
        let order = StencilOrder::from_int(self.order)
            .ok_or_else(|| CliError::Config(format!("grid.order must be 2 or 4, got {}", self.order)))?;
        Ok(GridSpec::new(&self.points, &self.lengths, order)?)
    }
}

/// Refractive index profile.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexProfile {
    Constant(f64),
    /// `n0 + amplitude * sin(2 pi x_axis / L_axis)`
    Sine { n0: f64, amplitude: f64, axis: usize },
}

impl IndexProfile {
    pub fn sample(&self, grid: &GridSpec) -> Result<RefractiveIndex, CliError> {
        match *self {
            IndexProfile::Constant(n) => Ok(RefractiveIndex::Constant(n)),
            IndexProfile::Sine { n0, amplitude, axis } => {
                if axis >= grid.dim() {
                    return Err(CliError::Config(format!(
                        "medium.n: axis {axis} is not active in a {}-dimensional grid",
                        grid.dim()
                    )));
                }
                let k = 2.0 * PI / grid.lengths()[axis];
                Ok(RefractiveIndex::Field(ScalarField::from_fn(grid, |x| {
                    n0 + amplitude * (k * x[axis]).sin()
                })))
            }
        }
    }
}

impl fmt::Display for IndexProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexProfile::Constant(n) => write!(f, "{n}"),
            IndexProfile::Sine { n0, amplitude, axis } => write!(f, "sine({n0}, {amplitude}, {axis})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumConfig {
    pub n: IndexProfile,
    /// Absent for the Gordon engine, which always uses the optical metric.
    pub lambda: Option<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitConfig {
    Random { seed: u64, kmax: usize },
    PlaneWave { sector: ModeKind, mode: [i64; 3], amplitude: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

/// Grid-point probe recorded at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub component: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    pub snapshot_format: SnapshotFormat,
    pub probe: Option<Probe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub medium: MediumConfig,
    pub engine: EngineKind,
    pub init: InitConfig,
    pub evolution: EvolutionConfig,
    pub output: OutputConfig,
}

pub const PROBE_COMPONENTS: [&str; 5] = ["a0", "ax", "ay", "az", "phi"];

struct Table {
    entries: BTreeMap<String, String>,
}

impl Table {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String, CliError> {
        self.take(key)
            .ok_or_else(|| CliError::Config(format!("missing key {key}")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    fn parsed_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.take(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<T>()
                            .map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
                    })
                    .collect()
            })
            .transpose()
    }
}

fn parse_profile(v: &str) -> Result<IndexProfile, CliError> {
    let v = v.trim();
    if let Ok(n) = v.parse::<f64>() {
        return Ok(IndexProfile::Constant(n));
    }
    let bad = || CliError::Config(format!("medium.n: expected a number or sine(n0, amplitude[, axis]), got {v:?}"));
    let args = v
        .strip_prefix("sine(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let n0 = parts[0].parse().map_err(|_| bad())?;
    let amplitude = parts[1].parse().map_err(|_| bad())?;
    let axis = match parts.get(2) {
        Some(a) => a.parse().map_err(|_| bad())?,
        None => 0,
    };
    Ok(IndexProfile::Sine { n0, amplitude, axis })
}

/// Broadcasts a single value to every active axis.
fn per_axis<T: Clone>(key: &str, mut v: Vec<T>, dim: usize) -> Result<Vec<T>, CliError> {
    if v.len() == 1 {
        v = vec![v[0].clone(); dim];
    }
    if v.len() != dim {
        return Err(CliError::Config(format!(
            "{key}: expected 1 or {dim} values, got {}",
            v.len()
        )));
    }
    Ok(v)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key {key}")));
            }
        }
        let mut t = Table { entries };

        let dim = t.parsed_or("grid.dim", 1usize)?;
        let points = per_axis("grid.points", t.list("grid.points")?.ok_or_else(|| CliError::Config("missing key grid.points".into()))?, dim)?;
        let lengths = per_axis("grid.lengths", t.list("grid.lengths")?.unwrap_or(vec![2.0 * PI]), dim)?;
        let grid = GridConfig {
            dim,
            points,
            lengths,
            order: t.parsed_or("grid.order", 2usize)?,
        };

        let engine = match t.take("engine").as_deref() {
            None | Some("flat") => EngineKind::Flat,
            Some("gordon") => EngineKind::Gordon,
            Some(other) => {
                return Err(CliError::Config(format!("engine must be flat or gordon, got {other:?}")))
            }
        };
        let n = parse_profile(&t.required("medium.n")?)?;
        let lambda: Option<f64> = t.parsed("medium.lambda")?;
        match (engine, &n, lambda) {
            (EngineKind::Flat, IndexProfile::Sine { .. }, _) => {
                return Err(CliError::Config(
                    "the flat engine needs a constant medium.n".into(),
                ))
            }
            (EngineKind::Flat, _, None) => {
                return Err(CliError::Config("the flat engine needs medium.lambda".into()))
            }
            (EngineKind::Gordon, _, Some(_)) => {
                return Err(CliError::Config(
                    "the gordon engine fixes the mass metric to the optical metric; remove medium.lambda".into(),
                ))
            }
            _ => {}
        }
        let medium = MediumConfig {
            n,
            lambda,
            mu: t.parsed_or("medium.mu", 1.0)?,
        };

        let init = match t.take("init.kind").as_deref() {
            None | Some("random") => InitConfig::Random {
                seed: t.parsed_or("init.seed", 0u64)?,
                kmax: t.parsed_or("init.kmax", 8usize)?,
            },
            Some("plane_wave") => {
                let sector_name = t.take("init.sector").unwrap_or_else(|| "transverse".into());
                let sector = ModeKind::parse(&sector_name).ok_or_else(|| {
                    CliError::Config(format!("init.sector must be transverse or longitudinal, got {sector_name:?}"))
                })?;
                let m: Vec<i64> = t.list("init.mode")?.unwrap_or(vec![1]);
                if m.is_empty() || m.len() > 3 {
                    return Err(CliError::Config("init.mode takes 1 to 3 integers".into()));
                }
                let mut mode = [0i64; 3];
                mode[..m.len()].copy_from_slice(&m);
                InitConfig::PlaneWave {
                    sector,
                    mode,
                    amplitude: t.parsed_or("init.amplitude", 1.0)?,
                }
            }
            Some("file") => InitConfig::File {
                path: PathBuf::from(t.required("init.path")?),
            },
            Some(other) => {
                return Err(CliError::Config(format!(
                    "init.kind must be random, plane_wave or file, got {other:?}"
                )))
            }
        };

        let evolution = EvolutionConfig {
            cfl: t.parsed_or("evolution.cfl", 0.25)?,
            t_end: t.parsed("evolution.t_end")?.ok_or_else(|| CliError::Config("missing key evolution.t_end".into()))?,
            sample_every: t.parsed_or("evolution.sample_every", 1usize)?,
        };
        if !(evolution.t_end.is_finite() && evolution.t_end >= 0.0) {
            return Err(CliError::Config(format!("evolution.t_end must be non-negative, got {}", evolution.t_end)));
        }

        let snapshot_format = match t.take("output.snapshot_format").as_deref() {
            None | Some("binary") => SnapshotFormat::Binary,
            Some("csv") => SnapshotFormat::Csv,
            Some(other) => {
                return Err(CliError::Config(format!("output.snapshot_format must be binary or csv, got {other:?}")))
            }
        };
        let probe = t
            .take("output.probe")
            .map(|v| {
                let bad = || CliError::Config(format!("output.probe: expected component:index, got {v:?}"));
                let (c, i) = v.split_once(':').ok_or_else(bad)?;
                let component = c.trim().to_string();
                if !PROBE_COMPONENTS.contains(&component.as_str()) {
                    return Err(CliError::Config(format!(
                        "output.probe: component must be one of {PROBE_COMPONENTS:?}"
                    )));
                }
                Ok(Probe {
                    component,
                    index: i.trim().parse().map_err(|_| bad())?,
                })
            })
            .transpose()?;
        let output = OutputConfig {
            dir: PathBuf::from(t.take("output.dir").unwrap_or_else(|| "out".into())),
            snapshot_every: t.parsed_or("output.snapshot_every", 0usize)?,
            snapshot_format,
            probe,
        };

        if let Some(key) = t.entries.keys().next() {
            return Err(CliError::Config(format!("unknown key {key}")));
        }
        Ok(RunConfig {
            grid,
            medium,
            engine,
            init,
            evolution,
            output,
        })
    }

    /// Canonical text form; [`RunConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.dim", self.grid.dim.to_string());
        kv("grid.points", join(&self.grid.points.iter().map(|p| p.to_string()).collect::<Vec<_>>()));
        kv("grid.lengths", join(&self.grid.lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>()));
        kv("grid.order", self.grid.order.to_string());
        kv("engine", self.engine.name().into());
        kv("medium.n", self.medium.n.to_string());
        if let Some(l) = self.medium.lambda {
            kv("medium.lambda", l.to_string());
        }
        kv("medium.mu", self.medium.mu.to_string());
        match &self.init {
            InitConfig::Random { seed, kmax } => {
                kv("init.kind", "random".into());
                kv("init.seed", seed.to_string());
                kv("init.kmax", kmax.to_string());
            }
            InitConfig::PlaneWave { sector, mode, amplitude } => {
                kv("init.kind", "plane_wave".into());
                kv("init.sector", sector.name().into());
                kv("init.mode", join(&mode.iter().map(|m| m.to_string()).collect::<Vec<_>>()));
                kv("init.amplitude", amplitude.to_string());
            }
            InitConfig::File { path } => {
                kv("init.kind", "file".into());
                kv("init.path", path.display().to_string());
            }
        }
        kv("evolution.cfl", self.evolution.cfl.to_string());
        kv("evolution.t_end", self.evolution.t_end.to_string());
        kv("evolution.sample_every", self.evolution.sample_every.to_string());
        kv("output.dir", self.output.dir.display().to_string());
        kv("output.snapshot_every", self.output.snapshot_every.to_string());
        kv("output.snapshot_format", self.output.snapshot_format.name().into());
        if let Some(p) = &self.output.probe {
            kv("output.probe", format!("{}:{}", p.component, p.index));
        }
        s
    }

    pub fn medium_spec(&self, grid: &GridSpec) -> Result<MediumSpec, CliError> {
        let n = self.medium.n.sample(grid)?;
        Ok(match self.engine {
            EngineKind::Flat => MediumSpec::new(n, self.medium.lambda.unwrap_or(0.0), self.medium.mu)?,
            EngineKind::Gordon => MediumSpec::gordon(n, self.medium.mu)?,
        })
    }

    /// Copy with every axis refined by `factor`, writing to `dir`.
    pub fn refined(&self, factor: usize, dir: PathBuf) -> RunConfig {
        let mut c = self.clone();
        for p in &mut c.grid.points {
            *p *= factor;
        }
        c.evolution.sample_every *= factor;
        if let Some(p) = &mut c.output.probe {
            // same physical point: scale each axis index, x fastest
            let old = &self.grid.points;
            let (mut rest, mut index, mut stride) = (p.index, 0, 1);
            for (&n, &m) in old.iter().zip(&c.grid.points) {
                index += (rest % n) * factor * stride;
                rest /= n;
                stride *= m;
            }
            p.index = index;
        }
        c.output.snapshot_every *= factor;
        c.output.dir = dir;
        c
    }
}
