use sphericity_core::classical::TailApproximations;
use sphericity_core::cumulants::CumulantSet;
use sphericity_core::mc::{self, AlphaOutcome, ExperimentPlan, DEFAULT_REPS};
use sphericity_core::{tables, MonotoneDesign};

use super::bounds::{bound_cells, grid_step, BOUND_COLUMNS};
use super::{order, pick, seed};
use crate::args::ReproduceArgs;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};

const TYPE1_COLUMNS: [&str; 16] = [
    "table", "alpha", "N1", "N2", "p1", "p2", "n", "n1", "reps", "seed", "alpha1", "std_error", "a_prop", "a_sys",
    "b_prop", "b_sys",
];

struct Settings {
    table: u8,
    reps: u64,
    seed: u64,
    order: usize,
    grid_step: f64,
    monte_carlo: bool,
}

pub fn run(args: &ReproduceArgs, config: &Config) -> CliResult<Report> {
    let settings = Settings {
        table: parse_table_id(&args.table)?,
        reps: pick(args.reps, config, "reps")?.unwrap_or(DEFAULT_REPS),
        seed: seed(args.seed, config)?,
        order: order(args.order, config)?,
        grid_step: grid_step(args.grid_step, config)?,
        monte_carlo: !(args.no_mc || config.flag("no-mc")?),
    };
    let table = if tables::is_bound_table(settings.table) {
        bound_table(&settings)?
    } else {
        type1_table(&settings)?
    };
    Ok(Report::table(table))
}

fn parse_table_id(id: &str) -> CliResult<u8> {
    let digits = id.strip_prefix("table").unwrap_or(id);
    match digits.parse::<u8>() {
        Ok(k) if tables::is_bound_table(k) || tables::is_type1_table(k) => Ok(k),
        _ => Err(CliError::Usage(format!("unknown table id {id:?}; expected table1 ... table9"))),
    }
}

/// Bounds for every row; tables 1-4 also carry the Monte Carlo MAE.
fn bound_table(s: &Settings) -> CliResult<Table> {
    let mut columns = vec!["table"];
    columns.extend(BOUND_COLUMNS);
    columns.extend(["mae", "reps", "seed"]);
    let mut table = Table::new(&columns);
    let with_mae = s.monte_carlo && s.table <= 4;
    for design in tables::bound_table(s.table)? {
        let report = sphericity_core::bounds::minimize_bounds(&design, s.order, s.grid_step)?;
        let mut row = vec![Cell::Int(s.table as u64)];
        row.extend(bound_cells(&report));
        if with_mae {
            let mut plan = ExperimentPlan::new(design, s.reps, s.seed);
            plan.order = s.order;
            let mae = mc::run_mae(&plan)?.mae;
            row.extend([Cell::opt(mae, 4), Cell::Int(s.reps), Cell::Int(s.seed)]);
        } else {
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
        }
        table.push(row);
    }
    Ok(table)
}

/// Type I error rows; the Monte Carlo runs once per design, covering all of its α levels.
fn type1_table(s: &Settings) -> CliResult<Table> {
    let rows = tables::type1_table(s.table)?;
    let mut groups: Vec<(MonotoneDesign, Vec<f64>)> = Vec::new();
    for &(alpha, design) in &rows {
        match groups.iter_mut().find(|(d, _)| *d == design) {
            Some((_, alphas)) => alphas.push(alpha),
            None => groups.push((design, vec![alpha])),
        }
    }
    let mut outcomes: Vec<(MonotoneDesign, AlphaOutcome)> = Vec::new();
    if s.monte_carlo {
        for (design, alphas) in groups {
            let mut plan = ExperimentPlan::new(design, s.reps, s.seed);
            plan.order = s.order;
            plan.alphas = alphas;
            outcomes.extend(mc::run_type1(&plan)?.alpha1.into_iter().map(|o| (design, o)));
        }
    }

    let mut table = Table::new(&TYPE1_COLUMNS);
    for (alpha, design) in rows {
        let mut row = vec![
            Cell::Int(s.table as u64),
            Cell::Float(alpha, 2),
            Cell::Int(design.n_complete() as u64),
            Cell::Int(design.n_partial() as u64),
            Cell::Int(design.p1() as u64),
            Cell::Int(design.p2() as u64),
            Cell::Int(design.n() as u64),
            Cell::Int(design.n1() as u64),
        ];
        match outcomes.iter().find(|(d, o)| *d == design && o.alpha == alpha) {
            Some((_, o)) => row.extend([
                Cell::Int(s.reps),
                Cell::Int(s.seed),
                Cell::Float(o.alpha1, 3),
                Cell::Float(o.std_error, 4),
                Cell::Float(o.a_prop, 3),
                Cell::Float(o.a_sys, 3),
                Cell::Float(o.b_prop, 3),
                Cell::Float(o.b_sys, 3),
            ]),
            None => {
                let cset = CumulantSet::new(&design, (s.order + 2).max(4))?;
                let approx = TailApproximations::with_order(&design, &cset, alpha, s.order)?;
                row.extend([
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Float(approx.a_prop, 3),
                    Cell::Float(approx.a_sys, 3),
                    Cell::Empty,
                    Cell::Empty,
                ]);
            }
        }
        table.push(row);
    }
    Ok(table)
}
