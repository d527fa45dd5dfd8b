use std::io::Read;
use std::path::Path;

use sphericity_core::MonotoneDesign;

use crate::error::{CliError, CliResult};

/// A design read back from a CSV row, with the row's `alpha` if present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayRow {
    pub design: MonotoneDesign,
    pub alpha: Option<f64>,
}

/// Reads designs from the `p1,p2` columns plus either `n,n1` or `N1,N2`.
/// Other columns are ignored, so any CSV this tool writes can be replayed.
pub fn read_designs(path: &Path) -> CliResult<Vec<ReplayRow>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse(file).map_err(|message| CliError::Parse { path: path.to_path_buf(), message })
}

fn parse<R: Read>(reader: R) -> Result<Vec<ReplayRow>, String> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers().map_err(|e| e.to_string())?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let need = |name: &str| column(name).ok_or_else(|| format!("missing column {name:?}"));
    let p1 = need("p1")?;
    let p2 = need("p2")?;
    let sizes = match (column("N1"), column("N2"), column("n"), column("n1")) {
        (Some(a), Some(b), _, _) => Sizes::Counts(a, b),
        (_, _, Some(a), Some(b)) => Sizes::Dof(a, b),
        _ => return Err("need columns N1,N2 or n,n1".into()),
    };
    let alpha = column("alpha");

    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("row {line}: {e}"))?;
        let int = |idx: usize| -> Result<usize, String> {
            let raw = record.get(idx).unwrap_or("").trim();
            raw.parse().map_err(|_| format!("row {line}, column {:?}: expected an integer, got {raw:?}", &headers[idx]))
        };
        let (a, b) = match sizes {
            Sizes::Counts(x, y) | Sizes::Dof(x, y) => (int(x)?, int(y)?),
        };
        let design = match sizes {
            Sizes::Counts(..) => MonotoneDesign::new(a, b, int(p1)?, int(p2)?),
            Sizes::Dof(..) => MonotoneDesign::from_dof(a, b, int(p1)?, int(p2)?),
        }
        .map_err(|e| format!("row {line}: {e}"))?;
        let alpha = match alpha.map(|idx| record.get(idx).unwrap_or("").trim()) {
            None | Some("") => None,
            Some(raw) => Some(raw.parse().map_err(|_| format!("row {line}: bad alpha {raw:?}"))?),
        };
        rows.push(ReplayRow { design, alpha });
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

#[derive(Clone, Copy)]
enum Sizes {
    Counts(usize, usize),
    Dof(usize, usize),
}
