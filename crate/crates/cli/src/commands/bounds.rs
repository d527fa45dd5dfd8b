use sphericity_core::bounds::{minimize_bounds, BoundChoice, BoundReport, DEFAULT_GRID_STEP};
use sphericity_core::MonotoneDesign;

use super::{order, pick, DesignFields};
use crate::args::BoundsArgs;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};
use crate::replay::read_designs;

pub(super) const BOUND_COLUMNS: [&str; 21] = [
    "p1", "p2", "n", "n1", "BOUND1", "v1", "cv1", "BOUND2", "v2", "c2", "cv2", "BOUND3", "v3", "c3", "cv3", "BOUND4",
    "v4", "c4", "cv4", "kappa2", "m",
];

pub fn run(args: &BoundsArgs, config: &Config) -> CliResult<Report> {
    let order = order(args.order, config)?;
    let step = grid_step(args.grid_step, config)?;
    let designs = designs(args, config)?;
    let mut table = Table::new(&BOUND_COLUMNS);
    for design in designs {
        table.push(bound_cells(&minimize_bounds(&design, order, step)?));
    }
    Ok(Report::table(table))
}

pub(super) fn grid_step(flag: Option<f64>, config: &Config) -> CliResult<f64> {
    Ok(pick(flag, config, "grid-step")?.unwrap_or(DEFAULT_GRID_STEP))
}

fn designs(args: &BoundsArgs, config: &Config) -> CliResult<Vec<MonotoneDesign>> {
    let fields = DesignFields::resolve(&args.design, config)?;
    match pick(args.input.clone(), config, "input")? {
        Some(path) if fields.is_empty() => Ok(read_designs(&path)?.into_iter().map(|r| r.design).collect()),
        Some(_) => Err(CliError::Usage("--input replaces the design flags; give one or the other".into())),
        None => Ok(vec![fields.design()?]),
    }
}

/// One row in the `BOUND_COLUMNS` layout.
pub(super) fn bound_cells(r: &BoundReport) -> Vec<Cell> {
    let mut row = vec![Cell::Int(r.p1 as u64), Cell::Int(r.p2 as u64), Cell::Int(r.n as u64), Cell::Int(r.n1 as u64)];
    row.extend([Cell::Float(r.bound1.value, 4), Cell::Float(r.bound1.v, 2), Cell::Float(r.bound1.c_v, 2)]);
    row.extend(choice_cells(Some(&r.bound2)));
    row.extend(choice_cells(r.bound3.as_ref()));
    row.extend(choice_cells(r.bound4.as_ref()));
    row.extend([Cell::Float(r.kappa2, 3), Cell::Float(r.m, 2)]);
    row
}

fn choice_cells(choice: Option<&BoundChoice>) -> [Cell; 4] {
    match choice {
        Some(b) => [
            Cell::Float(b.value, 4),
            Cell::Float(b.v, 2),
            Cell::opt(b.c, 2),
            Cell::Float(b.c_v, 2),
        ],
        None => [Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty],
    }
}
