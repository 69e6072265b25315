//! Single runs: free data, engine construction, evolution and output files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use proca_core::grid::random_bandlimited;
use proca_core::integrator::System;
use proca_core::modes::{plane_wave_free_data, wavevector, DispersionMode};
use proca_core::{
    FlatEngine, FlatState, GordonEngine, GordonMonitorReport, GordonState, GridSpec,
    MediumSpec, MonitorReport, ScalarField,
};

use crate::config::{EngineKind, InitConfig, Probe, RunConfig};
use crate::error::CliError;
use crate::snapshot::Snapshot;

pub const MONITOR_FILE: &str = "monitors.csv";
pub const PROBE_FILE: &str = "probe.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub steps: usize,
    pub dt: f64,
    pub min_spacing: f64,
    pub header: Vec<String>,
    /// Monitor rows in CSV column order.
    pub monitors: Vec<Vec<f64>>,
    /// `(t, value)` samples of the configured probe.
    pub probe: Vec<(f64, f64)>,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.monitors.iter().map(|r| r[i]).collect())
    }
}

type FreeData = ([ScalarField; 3], [ScalarField; 3]);

pub fn free_data(config: &RunConfig, grid: &GridSpec, medium: &MediumSpec) -> Result<FreeData, CliError> {
    match &config.init {
        InitConfig::Random { seed, kmax } => {
            let f = |k: u64| random_bandlimited(seed.wrapping_mul(6).wrapping_add(k), *kmax, grid);
            Ok((
                [f(0)?, f(1)?, f(2)?],
                [f(3)?, f(4)?, f(5)?],
            ))
        }
        InitConfig::PlaneWave { sector, mode, amplitude } => {
            let m = DispersionMode::new(*sector, wavevector(grid, *mode), medium)?;
            Ok(plane_wave_free_data(&m, *amplitude, grid)?)
        }
        InitConfig::File { path } => {
            let snap = Snapshot::read(path)?;
            let f = |name: &str| snap.field(name, grid);
            Ok((
                [f("ax")?, f("ay")?, f("az")?],
                [f("dax")?, f("day")?, f("daz")?],
            ))
        }
    }
}

/// What the driver needs from an engine beyond evolution.
trait Driven {
    type State;
    type Report;
    const HEADER: &'static str;
    fn init(&self, ai: [ScalarField; 3], dai: [ScalarField; 3]) -> proca_core::Result<Self::State>;
    fn run(
        &self,
        s: &Self::State,
        t_end: f64,
        sample_every: usize,
        observer: impl FnMut(usize, &Self::State) -> proca_core::Result<()>,
    ) -> proca_core::Result<Vec<Self::Report>>;
    fn max_dt(&self) -> f64;
    fn row(r: &Self::Report) -> Vec<f64>;
    fn probe(&self, s: &Self::State, component: &str, index: usize) -> f64;
    fn snapshot(&self, s: &Self::State) -> Snapshot;
    fn time(s: &Self::State) -> f64;
}

impl Driven for FlatEngine {
    type State = FlatState;
    type Report = MonitorReport;
    const HEADER: &'static str = MonitorReport::CSV_HEADER;

    fn init(&self, ai: [ScalarField; 3], dai: [ScalarField; 3]) -> proca_core::Result<FlatState> {
        self.init_from_free_data(ai, dai)
    }

    fn run(
        &self,
        s: &FlatState,
        t_end: f64,
        sample_every: usize,
        observer: impl FnMut(usize, &FlatState) -> proca_core::Result<()>,
    ) -> proca_core::Result<Vec<MonitorReport>> {
        let dt = System::max_dt(self);
        Ok(self.evolve_observed(s, t_end, dt, sample_every, false, observer)?.reports)
    }

    fn max_dt(&self) -> f64 {
        System::max_dt(self)
    }

    fn row(r: &MonitorReport) -> Vec<f64> {
        r.values().to_vec()
    }

    fn probe(&self, s: &FlatState, component: &str, index: usize) -> f64 {
        let f = match component {
            "a0" => &s.a0,
            "ax" => &s.ai[0],
            "ay" => &s.ai[1],
            "az" => &s.ai[2],
            _ => &s.phi,
        };
        f.values()[index]
    }

    fn snapshot(&self, s: &FlatState) -> Snapshot {
        Snapshot::new(
            self.grid(),
            s.t,
            vec![
                ("a0", &s.a0),
                ("ax", &s.ai[0]),
                ("ay", &s.ai[1]),
                ("az", &s.ai[2]),
                ("da0", &s.da0),
                ("dax", &s.dai[0]),
                ("day", &s.dai[1]),
                ("daz", &s.dai[2]),
                ("phi", &s.phi),
                ("dphi", &s.dphi),
            ],
        )
    }

    fn time(s: &FlatState) -> f64 {
        s.t
    }
}

impl Driven for GordonEngine {
    type State = GordonState;
    type Report = GordonMonitorReport;
    const HEADER: &'static str = GordonMonitorReport::CSV_HEADER;

    fn init(&self, ai: [ScalarField; 3], dai: [ScalarField; 3]) -> proca_core::Result<GordonState> {
        self.init_from_free_data(ai, dai)
    }

    fn run(
        &self,
        s: &GordonState,
        t_end: f64,
        sample_every: usize,
        observer: impl FnMut(usize, &GordonState) -> proca_core::Result<()>,
    ) -> proca_core::Result<Vec<GordonMonitorReport>> {
        let dt = System::max_dt(self);
        Ok(self.evolve_observed(s, t_end, dt, sample_every, false, observer)?.reports)
    }

    fn max_dt(&self) -> f64 {
        System::max_dt(self)
    }

    fn row(r: &GordonMonitorReport) -> Vec<f64> {
        r.values().to_vec()
    }

    fn probe(&self, s: &GordonState, component: &str, index: usize) -> f64 {
        let a = match component {
            "a0" => 0,
            "ax" => 1,
            "ay" => 2,
            _ => 3,
        };
        s.atld[a].values()[index] / self.n().values()[index]
    }

    fn snapshot(&self, s: &GordonState) -> Snapshot {
        let n = self.n();
        let a = s.potential(n);
        let da: Vec<ScalarField> = (0..4).map(|i| s.pi[i].zip_map(n, |v, n| v / n)).collect();
        Snapshot::new(
            self.grid(),
            s.t,
            vec![
                ("a0", &a[0]),
                ("ax", &a[1]),
                ("ay", &a[2]),
                ("az", &a[3]),
                ("da0", &da[0]),
                ("dax", &da[1]),
                ("day", &da[2]),
                ("daz", &da[3]),
            ],
        )
    }

    fn time(s: &GordonState) -> f64 {
        s.t
    }
}

struct Recorder<'a, E: Driven> {
    engine: &'a E,
    config: &'a RunConfig,
    steps: usize,
    probe: Vec<(f64, f64)>,
}

impl<E: Driven> Recorder<'_, E> {
    fn observe(&mut self, step: usize, s: &E::State) -> Result<(), CliError> {
        let every = self.config.evolution.sample_every;
        let sampled = step == 0 || step == self.steps || (every > 0 && step.is_multiple_of(every));
        if let (true, Some(Probe { component, index })) = (sampled, &self.config.output.probe) {
            self.probe.push((E::time(s), self.engine.probe(s, component, *index)));
        }
        let snap_every = self.config.output.snapshot_every;
        if snap_every > 0 && (step.is_multiple_of(snap_every) || step == self.steps) {
            let format = self.config.output.snapshot_format;
            let path = self
                .config
                .output
                .dir
                .join(format!("snapshot_{step:06}.{}", format.extension()));
            self.engine.snapshot(s).write(&path, format)?;
        }
        Ok(())
    }
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let grid = config.grid.spec()?;
    if let Some(p) = &config.output.probe {
        if p.index >= grid.len() {
            return Err(CliError::Config(format!(
                "output.probe index {} outside a grid of {} points",
                p.index,
                grid.len()
            )));
        }
        if config.engine == EngineKind::Gordon && p.component == "phi" {
            return Err(CliError::Config("the gordon engine has no phi field".into()));
        }
    }
    let medium = config.medium_spec(&grid)?;
    let (ai, dai) = free_data(config, &grid, &medium)?;
    fs::create_dir_all(&config.output.dir)?;

    let mut summary = match config.engine {
        EngineKind::Flat => {
            let engine = FlatEngine::new(&medium, &grid)?.with_cfl(config.evolution.cfl)?;
            drive(&engine, config, &grid, ai, dai)?
        }
        EngineKind::Gordon => {
            let engine = GordonEngine::new(&medium, &grid)?.with_cfl(config.evolution.cfl)?;
            drive(&engine, config, &grid, ai, dai)?
        }
    };
    summary.wall_seconds = start.elapsed().as_secs_f64();
    write_manifest(config, &summary)?;
    Ok(summary)
}

fn drive<E: Driven>(
    engine: &E,
    config: &RunConfig,
    grid: &GridSpec,
    ai: [ScalarField; 3],
    dai: [ScalarField; 3],
) -> Result<RunSummary, CliError> {
    let state = engine.init(ai, dai)?;
    let t_end = config.evolution.t_end;
    let steps = proca_core::integrator::step_count(0.0, t_end, engine.max_dt());
    let dt = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let mut recorder = Recorder {
        engine,
        config,
        steps,
        probe: Vec::new(),
    };
    // output failures inside the evolution callback are kept with their
    // original type and reported in preference to the wrapped core error
    let mut output_error: Option<CliError> = None;
    let reports = engine.run(&state, t_end, config.evolution.sample_every, |step, s| {
        recorder.observe(step, s).map_err(|e| {
            let msg = e.to_string();
            output_error = Some(e);
            proca_core::ProcaError::Snapshot(msg)
        })
    });
    if let Some(e) = output_error {
        return Err(e);
    }
    let monitors: Vec<Vec<f64>> = reports?.iter().map(E::row).collect();
    write_rows(
        &config.output.dir.join(MONITOR_FILE),
        E::HEADER,
        monitors.iter().cloned(),
    )?;
    if config.output.probe.is_some() {
        write_rows(
            &config.output.dir.join(PROBE_FILE),
            "t,value",
            recorder.probe.iter().map(|&(t, v)| vec![t, v]),
        )?;
    }
    Ok(RunSummary {
        dir: config.output.dir.clone(),
        steps,
        dt,
        min_spacing: grid.min_spacing(),
        header: E::HEADER.split(',').map(str::to_string).collect(),
        monitors,
        probe: recorder.probe,
        wall_seconds: 0.0,
    })
}

fn write_manifest(config: &RunConfig, s: &RunSummary) -> Result<(), CliError> {
    let mut text = config.to_text();
    text.push_str(&format!("# version {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# steps {}\n", s.steps));
    text.push_str(&format!("# dt {}\n", s.dt));
    text.push_str(&format!("# wall_seconds {:.3}\n", s.wall_seconds));
    fs::write(config.output.dir.join(MANIFEST_FILE), text)?;
    Ok(())
}
