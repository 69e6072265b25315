//! Resolution ladders: the same configuration run at successively doubled
//! resolution, with least-squares convergence orders of the constraint norms.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use proca_core::convergence::{fit_order, OrderFit, DEFAULT_FLOOR};
use rayon::prelude::*;

use crate::config::{EngineKind, RunConfig};
use crate::error::CliError;
use crate::run::{run, RunSummary};

pub const LADDER_FILE: &str = "ladder.csv";
pub const ORDERS_FILE: &str = "convergence.csv";

/// Monitored quantities per engine and the amplitude column that sets the
/// noise floor.
fn quantities(engine: EngineKind) -> (&'static [&'static str], &'static str) {
    match engine {
        EngineKind::Flat => (&["c1_l2", "c2_l2", "gauss_l2"], "ai_l2"),
        EngineKind::Gordon => (&["lorenz_l2", "gauss_l2"], "atldi_l2"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityOrder {
    pub quantity: String,
    /// `sup_t` of the quantity at each level, coarse to fine.
    pub values: Vec<f64>,
    pub fit: OrderFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub points: Vec<usize>,
    pub spacings: Vec<f64>,
    pub orders: Vec<QuantityOrder>,
}

/// Runs `levels` refinements of `base`, each doubling the points per axis,
/// on a pool of `workers` threads (all cores when `None`).
pub fn converge(base: &RunConfig, levels: usize, workers: Option<usize>) -> Result<ConvergenceTable, CliError> {
    if levels < 3 {
        return Err(CliError::Config(format!(
            "a convergence ladder needs at least 3 levels, got {levels}"
        )));
    }
    let configs: Vec<RunConfig> = (0..levels)
        .map(|l| base.refined(1 << l, base.output.dir.join(format!("level_{l}"))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunSummary, CliError>> = pool.install(|| configs.par_iter().map(run).collect());
    let mut summaries = Vec::with_capacity(levels);
    for r in results {
        summaries.push(r?);
    }

    let (names, amplitude) = quantities(base.engine);
    let scale = summaries
        .iter()
        .filter_map(|s| s.column(amplitude).and_then(|c| c.first().copied()))
        .fold(0.0, f64::max);
    let floor = DEFAULT_FLOOR * scale.max(f64::MIN_POSITIVE);
    let spacings: Vec<f64> = summaries.iter().map(|s| s.min_spacing).collect();
    let mut orders = Vec::new();
    for &name in names {
        let values: Vec<f64> = summaries
            .iter()
            .map(|s| s.column(name).expect("known column").into_iter().fold(0.0, f64::max))
            .collect();
        let fit = fit_order(&spacings, &values, floor)?;
        orders.push(QuantityOrder {
            quantity: name.to_string(),
            values,
            fit,
        });
    }
    let table = ConvergenceTable {
        points: configs.iter().map(|c| c.grid.points[0]).collect(),
        spacings,
        orders,
    };
    write_table(&base.output.dir, &table)?;
    Ok(table)
}

fn write_table(dir: &PathBuf, table: &ConvergenceTable) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut ladder = fs::File::create(dir.join(LADDER_FILE))?;
    writeln!(ladder, "quantity,points,h,value")?;
    for q in &table.orders {
        for ((p, h), v) in table.points.iter().zip(&table.spacings).zip(&q.values) {
            writeln!(ladder, "{},{p},{h},{v}", q.quantity)?;
        }
    }
    let mut orders = fs::File::create(dir.join(ORDERS_FILE))?;
    writeln!(orders, "quantity,order,residual")?;
    for q in &table.orders {
        match q.fit {
            OrderFit::Measured { order, residual, .. } => {
                writeln!(orders, "{},{order},{residual}", q.quantity)?
            }
            OrderFit::BelowFloor => writeln!(orders, "{},below floor,", q.quantity)?,
        }
    }
    Ok(())
}
