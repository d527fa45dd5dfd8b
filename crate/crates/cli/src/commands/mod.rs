mod bounds;
mod reproduce;
mod simulate;
mod stat;

use std::path::PathBuf;
use std::str::FromStr;

use sphericity_core::MonotoneDesign;

use crate::args::{Command, CommonArgs, DesignArgs, Format};
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{emit, Report};

pub const SEED_ENV: &str = "SPHERICITY_SEED";
pub const DEFAULT_SEED: u64 = 1;

pub fn run(command: Command) -> CliResult<()> {
    let (common, default_format) = match &command {
        Command::Stat(a) => (&a.common, Format::Json),
        Command::Bounds(a) => (&a.common, Format::Csv),
        Command::Simulate(a) => (&a.common, Format::Json),
        Command::Reproduce(a) => (&a.common, Format::Csv),
    };
    let config = Config::load(common.config.as_deref())?;
    let output = OutputSettings::resolve(common, &config, default_format)?;
    configure_threads(pick(common.threads, &config, "threads")?)?;

    let report = match &command {
        Command::Stat(a) => stat::run(a, &config)?,
        Command::Bounds(a) => bounds::run(a, &config)?,
        Command::Simulate(a) => simulate::run(a, &config)?,
        Command::Reproduce(a) => reproduce::run(a, &config)?,
    };
    write(&report, &output)
}

struct OutputSettings {
    format: Format,
    out: Option<PathBuf>,
    pretty: bool,
}

impl OutputSettings {
    fn resolve(common: &CommonArgs, config: &Config, default_format: Format) -> CliResult<Self> {
        let format = match common.format {
            Some(f) => f,
            None => match config.get::<String>("format")?.as_deref() {
                None => default_format,
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => return Err(CliError::Usage(format!("unknown format {other:?}"))),
            },
        };
        Ok(Self {
            format,
            out: pick(common.out.clone(), config, "out")?,
            pretty: common.pretty || config.flag("pretty")?,
        })
    }
}

fn write(report: &Report, settings: &OutputSettings) -> CliResult<()> {
    emit(report, settings.format, settings.out.as_deref(), settings.pretty)
}

/// The flag value if given, else the config value.
fn pick<T: FromStr>(flag: Option<T>, config: &Config, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

fn seed(flag: Option<u64>, config: &Config) -> CliResult<u64> {
    if let Some(s) = pick(flag, config, "seed")? {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={raw:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        None => Ok(()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Flag/config values of the design fields, not yet validated.
#[derive(Debug, Default)]
struct DesignFields {
    n: Option<usize>,
    n1: Option<usize>,
    big_n1: Option<usize>,
    big_n2: Option<usize>,
    p1: Option<usize>,
    p2: Option<usize>,
}

impl DesignFields {
    fn resolve(args: &DesignArgs, config: &Config) -> CliResult<Self> {
        Ok(Self {
            n: pick(args.n, config, "n")?,
            n1: pick(args.n1, config, "n1")?,
            big_n1: pick(args.big_n1, config, "N1")?,
            big_n2: pick(args.big_n2, config, "N2")?,
            p1: pick(args.p1, config, "p1")?,
            p2: pick(args.p2, config, "p2")?,
        })
    }

    fn is_empty(&self) -> bool {
        self.n.is_none()
            && self.n1.is_none()
            && self.big_n1.is_none()
            && self.big_n2.is_none()
            && self.p1.is_none()
            && self.p2.is_none()
    }

    fn design(&self) -> CliResult<MonotoneDesign> {
        let p1 = self.p1.ok_or_else(|| CliError::Usage("--p1 is required".into()))?;
        let p2 = self.p2.unwrap_or(0);
        let by_dof = self.n.is_some() || self.n1.is_some();
        let by_count = self.big_n1.is_some() || self.big_n2.is_some();
        let design = match (by_dof, by_count) {
            (true, true) => return Err(CliError::Usage("give either --n/--n1 or --N1/--N2, not both".into())),
            (false, false) => return Err(CliError::Usage("give the sample sizes via --n/--n1 or --N1/--N2".into())),
            (true, false) => {
                let n1 = self.n1.ok_or_else(|| CliError::Usage("--n1 is required with --n".into()))?;
                MonotoneDesign::from_dof(self.n.unwrap_or(n1), n1, p1, p2)?
            }
            (false, true) => {
                let big_n1 = self.big_n1.ok_or_else(|| CliError::Usage("--N1 is required with --N2".into()))?;
                MonotoneDesign::new(big_n1, self.big_n2.unwrap_or(0), p1, p2)?
            }
        };
        Ok(design)
    }
}

fn order(flag: Option<usize>, config: &Config) -> CliResult<usize> {
    let order = pick(flag, config, "order")?.unwrap_or(sphericity_core::bounds::DEFAULT_ORDER);
    if order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    Ok(order)
}
