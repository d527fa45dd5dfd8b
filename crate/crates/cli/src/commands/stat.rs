use std::io::BufReader;

use serde::Serialize;
use sphericity_core::classical::{AsymptoticCoefficients, Statistic};
use sphericity_core::cumulants::CumulantSet;
use sphericity_core::edgeworth::EdgeworthExpansion;
use sphericity_core::model::{lr_lambda, MonotoneSample, WishartSummary};
use sphericity_core::specfun::chi2_sf;

use super::{order, DesignFields};
use crate::args::StatArgs;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};

#[derive(Debug, Serialize)]
struct StatReport {
    #[serde(rename = "N1")]
    big_n1: usize,
    #[serde(rename = "N2")]
    big_n2: usize,
    p1: usize,
    p2: usize,
    n: usize,
    n1: usize,
    lambda: f64,
    log_lambda: f64,
    minus_two_log_lambda: f64,
    /// −(2/N) log λ.
    scaled: f64,
    /// Standardized statistic (scaled − κ1)/√κ2.
    t: f64,
    kappa1: f64,
    kappa2: f64,
    order: usize,
    df: u32,
    /// Upper tail of the Edgeworth expansion at t.
    p_value_edgeworth: f64,
    /// Upper tail of the chi-square expansion of −2 log λ.
    p_value_chi2_expansion: f64,
    /// Upper tail of the limiting chi-square.
    p_value_chi2: f64,
}

const COLUMNS: [&str; 18] = [
    "N1",
    "N2",
    "p1",
    "p2",
    "n",
    "n1",
    "lambda",
    "log_lambda",
    "minus_two_log_lambda",
    "scaled",
    "t",
    "kappa1",
    "kappa2",
    "order",
    "df",
    "p_value_edgeworth",
    "p_value_chi2_expansion",
    "p_value_chi2",
];

pub fn run(args: &StatArgs, config: &Config) -> CliResult<Report> {
    let fields = DesignFields::resolve(&args.design, config)?;
    let p1 = fields.p1.ok_or_else(|| CliError::Usage("--p1 is required".into()))?;
    let n_complete = match (fields.big_n1, fields.n1) {
        (Some(a), Some(b)) if a != b + 1 => {
            return Err(CliError::Usage(format!("--N1 {a} and --n1 {b} disagree")));
        }
        (Some(a), _) => Some(a),
        (None, b) => b.map(|b| b + 1),
    };
    let file = std::fs::File::open(&args.data).map_err(|e| CliError::io(&args.data, e))?;
    let sample = MonotoneSample::read_csv(BufReader::new(file), p1, n_complete).map_err(|e| CliError::Parse {
        path: args.data.clone(),
        message: e.to_string(),
    })?;
    let design = sample.design()?;
    if let Some(p2) = fields.p2.filter(|&p2| p2 != design.p2()) {
        return Err(CliError::Usage(format!("--p2 {p2} but the file has p2 = {}", design.p2())));
    }
    let expected_total = fields.n.map(|n| n + 1).or(fields.big_n2.map(|n2| design.n_complete() + n2));
    if let Some(total) = expected_total.filter(|&t| t != design.n_total()) {
        return Err(CliError::Usage(format!("design flags give N = {total} but the file has N = {}", design.n_total())));
    }

    let order = order(args.order, config)?;
    let lr = lr_lambda(&WishartSummary::from_sample(&sample)?, &design)?;
    let cset = CumulantSet::new(&design, (order + 2).max(4))?;
    let t = cset.standardize(lr.scaled);
    let expansion = EdgeworthExpansion::new(&cset, order)?;
    let x = lr.minus_two_log_lambda();
    let df = design.chi2_dof();
    let report = StatReport {
        big_n1: design.n_complete(),
        big_n2: design.n_partial(),
        p1: design.p1(),
        p2: design.p2(),
        n: design.n(),
        n1: design.n1(),
        lambda: lr.log_lambda.exp(),
        log_lambda: lr.log_lambda,
        minus_two_log_lambda: x,
        scaled: lr.scaled,
        t,
        kappa1: cset.kappa1(),
        kappa2: cset.kappa2(),
        order,
        df,
        p_value_edgeworth: 1.0 - expansion.cdf_clamped(t),
        p_value_chi2_expansion: 1.0 - AsymptoticCoefficients::new(&design).cdf(x, Statistic::Lrt)?,
        p_value_chi2: chi2_sf(x, df)?,
    };

    let mut table = Table::new(&COLUMNS);
    let f = |v: f64| Cell::Float(v, 6);
    table.push(vec![
        Cell::Int(report.big_n1 as u64),
        Cell::Int(report.big_n2 as u64),
        Cell::Int(report.p1 as u64),
        Cell::Int(report.p2 as u64),
        Cell::Int(report.n as u64),
        Cell::Int(report.n1 as u64),
        f(report.lambda),
        f(report.log_lambda),
        f(report.minus_two_log_lambda),
        f(report.scaled),
        f(report.t),
        f(report.kappa1),
        f(report.kappa2),
        Cell::Int(order as u64),
        Cell::Int(df as u64),
        Cell::Float(report.p_value_edgeworth, 4),
        Cell::Float(report.p_value_chi2_expansion, 4),
        Cell::Float(report.p_value_chi2, 4),
    ]);
    let json = serde_json::to_value(&report).map_err(std::io::Error::from)?;
    Ok(Report { table, json: Some(json) })
}
