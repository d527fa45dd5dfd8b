use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::design::MonotoneDesign;
use crate::error::{Error, Result};

/// Observed two-step monotone data.
///
/// `complete` is `N1 × p`; `partial` is `N2 × p1` and holds the rows that
/// are missing their last `p2` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSample {
    p1: usize,
    p2: usize,
    complete: DMatrix<f64>,
    partial: DMatrix<f64>,
}

impl MonotoneSample {
    pub fn new(p1: usize, p2: usize, complete: DMatrix<f64>, partial: DMatrix<f64>) -> Result<Self> {
        if p1 == 0 {
            return Err(Error::InvalidSample("p1 must be at least 1".into()));
        }
        if complete.ncols() != p1 + p2 {
            return Err(Error::InvalidSample(format!(
                "complete block has {} columns, expected {}",
                complete.ncols(),
                p1 + p2
            )));
        }
        if partial.nrows() > 0 && partial.ncols() != p1 {
            return Err(Error::InvalidSample(format!(
                "partial block has {} columns, expected {p1}",
                partial.ncols()
            )));
        }
        if complete.nrows() < 2 {
            return Err(Error::InvalidSample("need at least two complete rows".into()));
        }
        if complete.iter().chain(partial.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSample("non-finite entry".into()));
        }
        let partial = if partial.nrows() == 0 { DMatrix::zeros(0, p1) } else { partial };
        Ok(Self { p1, p2, complete, partial })
    }

    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    pub fn complete(&self) -> &DMatrix<f64> {
        &self.complete
    }

    pub fn partial(&self) -> &DMatrix<f64> {
        &self.partial
    }

    pub fn n_complete(&self) -> usize {
        self.complete.nrows()
    }

    pub fn n_partial(&self) -> usize {
        self.partial.nrows()
    }

    /// The design this sample realises, if it satisfies the design constraints.
    pub fn design(&self) -> Result<MonotoneDesign> {
        MonotoneDesign::new(self.n_complete(), self.n_partial(), self.p1, self.p2)
    }

    /// Reads a sample from CSV with header `x1,…,xp`.
    ///
    /// Complete rows come first; partial rows leave the last `p2` cells empty.
    /// When `n_complete` is given, rows past it must be partial; otherwise the
    /// leading run of complete rows is taken as the complete block.
    pub fn read_csv<R: BufRead>(reader: R, p1: usize, n_complete: Option<usize>) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line.map_err(|e| Error::InvalidSample(e.to_string()))?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::InvalidSample("empty input".into())),
            }
        };
        let p = header.split(',').count();
        for (j, name) in header.split(',').enumerate() {
            if name.trim() != format!("x{}", j + 1) {
                return Err(Error::InvalidSample(format!(
                    "header column {} is {:?}, expected \"x{}\"",
                    j + 1,
                    name.trim(),
                    j + 1
                )));
            }
        }
        if p1 == 0 || p1 > p {
            return Err(Error::InvalidSample(format!("p1 = {p1} incompatible with {p} columns")));
        }
        let p2 = p - p1;

        let mut complete: Vec<f64> = Vec::new();
        let mut partial: Vec<f64> = Vec::new();
        let mut n1 = 0usize;
        let mut n2 = 0usize;
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::InvalidSample(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = idx + 1;
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != p {
                return Err(Error::InvalidSample(format!(
                    "row {row}: expected {p} cells, found {}",
                    cells.len()
                )));
            }
            let mut values = Vec::with_capacity(p);
            for (j, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    values.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::InvalidSample(format!("row {row}, column {}: cannot parse {cell:?}", j + 1))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::InvalidSample(format!(
                            "row {row}, column {}: non-finite value",
                            j + 1
                        )));
                    }
                    values.push(Some(v));
                }
            }
            if let Some(j) = values[..p1].iter().position(Option::is_none) {
                return Err(Error::InvalidSample(format!(
                    "row {row}, column {}: first p1 = {p1} cells must be present",
                    j + 1
                )));
            }
            let tail_present = values[p1..].iter().filter(|v| v.is_some()).count();
            let is_complete = tail_present == p2;
            if tail_present != 0 && tail_present != p2 {
                return Err(Error::InvalidSample(format!(
                    "row {row}: last p2 = {p2} cells must be all present or all empty"
                )));
            }
            let expect_complete = match n_complete {
                Some(k) => n1 + n2 < k,
                None => n2 == 0,
            };
            let misplaced = if n_complete.is_some() {
                is_complete != expect_complete
            } else {
                is_complete && !expect_complete
            };
            if p2 > 0 && misplaced {
                return Err(Error::InvalidSample(format!(
                    "row {row}: {} row found where a {} row was expected",
                    if is_complete { "complete" } else { "partial" },
                    if is_complete { "partial" } else { "complete" }
                )));
            }
            if is_complete {
                complete.extend(values.iter().map(|v| v.unwrap()));
                n1 += 1;
            } else {
                partial.extend(values[..p1].iter().map(|v| v.unwrap()));
                n2 += 1;
            }
        }
        let complete = DMatrix::from_row_slice(n1, p, &complete);
        let partial = DMatrix::from_row_slice(n2, p1, &partial);
        Self::new(p1, p2, complete, partial)
    }

    /// Writes the sample in the format accepted by [`MonotoneSample::read_csv`].
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let p = self.p1 + self.p2;
        let header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n_complete() {
            let row: Vec<String> = (0..p).map(|j| format!("{:e}", self.complete[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        for i in 0..self.n_partial() {
            let mut row: Vec<String> = (0..self.p1).map(|j| format!("{:e}", self.partial[(i, j)])).collect();
            row.extend(std::iter::repeat_n(String::new(), self.p2));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "x1,x2,x3\n1,2,3\n4,5,7\n0.5,1,-2\n2,,\n-1,,\n";

    #[test]
    fn reads_and_round_trips() {
        let s = MonotoneSample::read_csv(TEXT.as_bytes(), 1, None).unwrap();
        assert_eq!((s.n_complete(), s.n_partial(), s.p1(), s.p2()), (3, 2, 1, 2));
        assert_eq!(s.partial()[(1, 0)], -1.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = MonotoneSample::read_csv(buf.as_slice(), 1, None).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn filled_partial_rows_are_rejected() {
        let text = "x1,x2\n1,2\n3,4\n5,6\n7,8\n";
        let err = MonotoneSample::read_csv(text.as_bytes(), 1, Some(2)).unwrap_err();
        assert!(err.to_string().contains("row 4"), "{err}");
    }

    #[test]
    fn complete_row_after_partial_is_rejected() {
        let text = "x1,x2\n1,2\n3,4\n5,\n7,8\n";
        let err = MonotoneSample::read_csv(text.as_bytes(), 1, None).unwrap_err();
        assert!(err.to_string().contains("row 5"), "{err}");
    }

    #[test]
    fn malformed_cells() {
        assert!(MonotoneSample::read_csv("x1,x2\n1,abc\n".as_bytes(), 1, None).is_err());
        assert!(MonotoneSample::read_csv("x1,x2\n,1\n".as_bytes(), 1, None).is_err());
        assert!(MonotoneSample::read_csv("a,b\n1,1\n".as_bytes(), 1, None).is_err());
        assert!(MonotoneSample::read_csv("x1,x2\n1,2,3\n".as_bytes(), 1, None).is_err());
    }
}
