//! Plain-text parameter checkpoints.
//!
//! ```text
//! gcn d=<d> h=<h> c=<C>
//! <w1: d rows of h comma-separated values>
//! <w2: h rows of C values>
//! <b2: one row of C values>
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};

use super::GcnParams;
use crate::error::{CegaError, Result};
use crate::graph::io::{fmt_real, write_atomic};

pub fn save_params(path: &Path, p: &GcnParams) -> Result<()> {
    let mut out = format!("gcn d={} h={} c={}\n", p.input_dim(), p.hidden_dim(), p.num_classes());
    let mut push_row = |row: &mut dyn Iterator<Item = &f64>| {
        let cells: Vec<String> = row.map(|&v| fmt_real(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    };
    for r in p.w1.rows() {
        push_row(&mut r.iter());
    }
    for r in p.w2.rows() {
        push_row(&mut r.iter());
    }
    push_row(&mut p.b2.iter());
    write_atomic(path, &out)
}

pub fn load_params(path: &Path) -> Result<GcnParams> {
    let text = std::fs::read_to_string(path).map_err(|e| CegaError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let err = |line: usize, msg: String| CegaError::load(path, line, msg);
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty checkpoint".into()))?;
    let mut dims = [0usize; 3];
    let mut toks = header.split_whitespace();
    if toks.next() != Some("gcn") {
        return Err(err(1, "header must start with 'gcn'".into()));
    }
    for (slot, key) in dims.iter_mut().zip(["d=", "h=", "c="]) {
        *slot = toks
            .next()
            .and_then(|t| t.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .filter(|&v: &usize| v > 0)
            .ok_or_else(|| err(1, format!("header needs {key}<positive int>")))?;
    }
    let [d, h, c] = dims;
    let mut read_rows = |rows: usize, cols: usize| -> Result<Vec<f64>> {
        let mut vals = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (i, line) = lines
                .next()
                .ok_or_else(|| err(0, "checkpoint ends early".into()))?;
            let row: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(i + 1, format!("bad number: {e}")))?;
            if row.len() != cols {
                return Err(err(i + 1, format!("expected {cols} values, found {}", row.len())));
            }
            vals.extend(row);
        }
        Ok(vals)
    };
    let w1 = Array2::from_shape_vec((d, h), read_rows(d, h)?).expect("sized");
    let w2 = Array2::from_shape_vec((h, c), read_rows(h, c)?).expect("sized");
    let b2 = Array1::from(read_rows(1, c)?);
    let p = GcnParams { w1, w2, b2 };
    p.validate()?;
    Ok(p)
}
