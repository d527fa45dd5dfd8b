use sphericity_core::mc::{self, ExperimentPlan, ExperimentResult, SamplerKind, DEFAULT_ALPHAS, DEFAULT_REPS};
use sphericity_core::MonotoneDesign;

use super::{order, pick, seed, DesignFields};
use crate::args::SimulateArgs;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};
use crate::replay::read_designs;

const COLUMNS: [&str; 22] = [
    "N1",
    "N2",
    "p1",
    "p2",
    "n",
    "n1",
    "reps",
    "seed",
    "order",
    "sampler",
    "alpha",
    "critical",
    "rejections",
    "alpha1",
    "std_error",
    "a_prop",
    "a_sys",
    "b_prop",
    "b_sys",
    "kappa1",
    "kappa2",
    "mae",
];

pub fn run(args: &SimulateArgs, config: &Config) -> CliResult<Report> {
    let reps = pick(args.reps, config, "reps")?.unwrap_or(DEFAULT_REPS);
    let seed = seed(args.seed, config)?;
    let order = order(args.order, config)?;
    let sampler = match args.sampler {
        Some(s) => s,
        None => config.get::<SamplerKind>("sampler")?.unwrap_or(SamplerKind::Summary),
    };
    let alphas = if args.alpha.is_empty() {
        config.get_list::<f64>("alpha")?.unwrap_or_else(|| DEFAULT_ALPHAS.to_vec())
    } else {
        args.alpha.clone()
    };

    let mut results = Vec::new();
    for (design, design_alphas) in jobs(args, config, &alphas)? {
        let mut plan = ExperimentPlan::new(design, reps, seed);
        plan.sampler = sampler;
        plan.order = order;
        plan.alphas = design_alphas;
        results.push(mc::run(&plan)?);
    }

    let mut table = Table::new(&COLUMNS);
    for r in &results {
        push_rows(&mut table, r);
    }
    let json = serde_json::to_value(&results).map_err(std::io::Error::from)?;
    Ok(Report { table, json: Some(json) })
}

/// Designs with their α levels; replayed rows that carry an `alpha` are grouped by design.
fn jobs(args: &SimulateArgs, config: &Config, alphas: &[f64]) -> CliResult<Vec<(MonotoneDesign, Vec<f64>)>> {
    let fields = DesignFields::resolve(&args.design, config)?;
    let Some(path) = pick(args.input.clone(), config, "input")? else {
        return Ok(vec![(fields.design()?, alphas.to_vec())]);
    };
    if !fields.is_empty() {
        return Err(CliError::Usage("--input replaces the design flags; give one or the other".into()));
    }
    let mut jobs: Vec<(MonotoneDesign, Vec<f64>)> = Vec::new();
    for row in read_designs(&path)? {
        let position = jobs.iter().position(|(d, _)| *d == row.design);
        match (row.alpha, position) {
            (Some(a), Some(i)) => {
                if !jobs[i].1.contains(&a) {
                    jobs[i].1.push(a);
                }
            }
            (Some(a), None) => jobs.push((row.design, vec![a])),
            (None, Some(_)) => {}
            (None, None) => jobs.push((row.design, alphas.to_vec())),
        }
    }
    Ok(jobs)
}

fn push_rows(table: &mut Table, r: &ExperimentResult) {
    let d = &r.design;
    let sampler = match r.sampler {
        SamplerKind::Summary => "summary",
        SamplerKind::Raw => "raw",
    };
    for a in &r.alpha1 {
        table.push(vec![
            Cell::Int(d.n_complete() as u64),
            Cell::Int(d.n_partial() as u64),
            Cell::Int(d.p1() as u64),
            Cell::Int(d.p2() as u64),
            Cell::Int(d.n() as u64),
            Cell::Int(d.n1() as u64),
            Cell::Int(r.reps),
            Cell::Int(r.seed),
            Cell::Int(r.order as u64),
            Cell::Text(sampler.into()),
            Cell::Float(a.alpha, 2),
            Cell::Float(a.critical, 4),
            Cell::Int(a.rejections),
            Cell::Float(a.alpha1, 3),
            Cell::Float(a.std_error, 4),
            Cell::Float(a.a_prop, 3),
            Cell::Float(a.a_sys, 3),
            Cell::Float(a.b_prop, 3),
            Cell::Float(a.b_sys, 3),
            Cell::Float(r.kappa1, 4),
            Cell::Float(r.kappa2, 3),
            Cell::opt(r.mae, 4),
        ]);
    }
}
