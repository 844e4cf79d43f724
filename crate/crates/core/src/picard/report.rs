use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Finite,
    Limit,
    CAlpha,
    Contraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub t1: f64,
    pub t2: f64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
    pub kind: CovarianceKind,
}

/// Table of exact moments, exported as CSV with columns
/// `alpha,N,t1,t2,n,re,im,kind`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CovarianceReport {
    rows: Vec<CovarianceRow>,
}

impl CovarianceReport {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, kind: CovarianceKind, alpha: f64, n_max: usize, t1: f64, t2: f64, n: i64, value: Complex64) {
        self.rows.push(CovarianceRow {
            alpha,
            n_max,
            t1,
            t2,
            n,
            re: value.re,
            im: value.im,
            kind,
        });
    }

    pub fn rows(&self) -> &[CovarianceRow] {
        &self.rows
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns() {
        let mut r = CovarianceReport::new();
        r.push(CovarianceKind::CAlpha, 0.0, 8, 1.0, 1.0, 1, Complex64::new(0.9, 0.0));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("alpha,N,t1,t2,n,re,im,kind"));
        assert!(text.lines().nth(1).unwrap().ends_with(",c_alpha"));
    }
}
