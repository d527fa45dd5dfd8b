//! Design lists of the reference tables: bound tables 1–5 and Type I error
//! tables 6–9.

use crate::error::{Error, Result};
use crate::model::MonotoneDesign;

/// Sample-size pairs (N1, N2) of the Type I error tables, in table order.
pub const TYPE1_SAMPLE_SIZES: [(usize, usize); 9] = [
    (50, 50),
    (100, 100),
    (200, 200),
    (50, 100),
    (100, 200),
    (200, 400),
    (50, 25),
    (100, 50),
    (200, 100),
];

pub fn is_bound_table(table: u8) -> bool {
    (1..=5).contains(&table)
}

pub fn is_type1_table(table: u8) -> bool {
    (6..=9).contains(&table)
}

/// Designs of bound tables 1–5 as `(n, n1, p1, p2)`.
pub fn bound_table(table: u8) -> Result<Vec<MonotoneDesign>> {
    let block = |n: usize, n1: usize| -> Vec<(usize, usize, usize, usize)> {
        let mut v = Vec::new();
        for p1 in [5, 10, 15] {
            for p2 in [5, 10, 15] {
                v.push((n, n1, p1, p2));
            }
        }
        v
    };
    let rows = match table {
        1 => block(60, 40),
        2 => block(60, 50),
        3 => block(120, 80),
        4 => vec![(50, 40, 20, 10), (100, 80, 20, 10), (500, 400, 20, 10), (5000, 4000, 20, 10)],
        5 => vec![(50, 40, 20, 10), (100, 80, 40, 20), (1000, 800, 400, 200), (5000, 4000, 2000, 1000)],
        _ => return Err(Error::Domain(format!("no bound table {table}"))),
    };
    rows.into_iter()
        .map(|(n, n1, p1, p2)| MonotoneDesign::from_dof(n, n1, p1, p2))
        .collect()
}

/// Significance level of Type I error tables 7–9.
pub fn type1_table_alpha(table: u8) -> Option<f64> {
    match table {
        7 => Some(0.10),
        8 => Some(0.05),
        9 => Some(0.01),
        _ => None,
    }
}

/// Rows of Type I error tables 6–9 as `(α, design)`, in table order.
///
/// Table 6 fixes p1 = p2 = 2 and runs α over 0.10, 0.05, 0.01. Tables 7–9
/// fix α and vary p/N1 ∈ {0.2, 0.4, 0.8} and p1/p2 ∈ {1/4, 1, 4}.
pub fn type1_table(table: u8) -> Result<Vec<(f64, MonotoneDesign)>> {
    let mut rows = Vec::new();
    match table {
        6 => {
            for alpha in [0.10, 0.05, 0.01] {
                for (n1, n2) in TYPE1_SAMPLE_SIZES {
                    rows.push((alpha, MonotoneDesign::new(n1, n2, 2, 2)?));
                }
            }
        }
        7..=9 => {
            let alpha = type1_table_alpha(table).expect("table 7–9");
            for (n1, n2) in TYPE1_SAMPLE_SIZES {
                for frac in [1, 2, 4] {
                    // p = 0.2·N1, 0.4·N1, 0.8·N1
                    let p = n1 * frac / 5;
                    for (p1, p2) in [(p / 5, 4 * p / 5), (p / 2, p / 2), (4 * p / 5, p / 5)] {
                        rows.push((alpha, MonotoneDesign::new(n1, n2, p1, p2)?));
                    }
                }
            }
        }
        _ => return Err(Error::Domain(format!("no Type I error table {table}"))),
    }
    Ok(rows)
}
