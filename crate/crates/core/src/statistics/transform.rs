use serde::{Deserialize, Serialize};

use super::{CitationKind, StatKind};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};

/// Square-root and standardization settings for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub kind: StatKind,
    pub sqrt: bool,
    pub standardize: bool,
    pub mean: f64,
    pub sd: f64,
    /// Constant column after the square root; maps to all zeros.
    #[serde(default)]
    pub degenerate: bool,
}

impl ColumnTransform {
    pub fn identity(kind: StatKind) -> Self {
        ColumnTransform { kind, sqrt: false, standardize: false, mean: 0.0, sd: 1.0, degenerate: false }
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        let v = if self.sqrt {
            if x < 0.0 {
                return Err(Error::InvalidQuery(format!(
                    "negative raw value {x} for square-root column `{}`",
                    self.kind
                )));
            }
            x.sqrt()
        } else {
            x
        };
        if !self.standardize {
            return Ok(v);
        }
        if self.degenerate {
            return Ok(0.0);
        }
        Ok((v - self.mean) / self.sd)
    }
}

/// Per-column transform for a design, in column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub columns: Vec<ColumnTransform>,
    #[serde(default)]
    pub fitted: bool,
}

impl TransformSpec {
    pub fn identity(kinds: &[StatKind]) -> Self {
        TransformSpec { columns: kinds.iter().map(|&k| ColumnTransform::identity(k)).collect(), fitted: true }
    }

    /// Square root and standardization for every endogenous statistic,
    /// identity for the exogenous ones. Constants are filled by [`fit`](Self::fit).
    pub fn sqrt_standardize(kinds: &[StatKind]) -> Self {
        let columns = kinds
            .iter()
            .map(|&kind| {
                let endo = !kind.is_exogenous();
                ColumnTransform { kind, sqrt: endo, standardize: endo, mean: 0.0, sd: 1.0, degenerate: false }
            })
            .collect();
        TransformSpec { columns, fitted: false }
    }

    /// Standardization only (no square root) on endogenous columns.
    pub fn standardize_only(kinds: &[StatKind]) -> Self {
        let mut spec = Self::sqrt_standardize(kinds);
        for c in &mut spec.columns {
            c.sqrt = false;
        }
        spec
    }

    /// Toggles the square root on the citation-repetition column.
    pub fn with_citation_repetition_sqrt(mut self, on: bool) -> Self {
        for c in &mut self.columns {
            if c.kind == StatKind::Citation(CitationKind::CitationRepetition) {
                c.sqrt = on;
            }
        }
        self
    }

    pub fn kinds(&self) -> Vec<StatKind> {
        self.columns.iter().map(|c| c.kind).collect()
    }

    pub fn column(&self, kind: StatKind) -> Option<&ColumnTransform> {
        self.columns.iter().find(|c| c.kind == kind)
    }

    fn check(&self) -> Result<()> {
        for c in &self.columns {
            if c.kind.is_exogenous() && c.sqrt {
                return Err(Error::Config(format!("exogenous column `{}` cannot be square-rooted", c.kind)));
            }
            if c.sd < 0.0 {
                return Err(Error::Config(format!("negative sd for `{}`", c.kind)));
            }
        }
        Ok(())
    }

    fn check_columns(&self, design: &DesignMatrix) -> Result<()> {
        if self.kinds() != design.columns {
            return Err(Error::Config("transform columns do not match design columns".into()));
        }
        Ok(())
    }

    /// Fits mean and sample sd of each standardized column over every row of
    /// the design (events and controls alike).
    pub fn fit(&self, design: &DesignMatrix) -> Result<TransformSpec> {
        self.check()?;
        self.check_columns(design)?;
        let p = self.columns.len();
        let mut out = self.clone();
        for (c, col) in out.columns.iter_mut().enumerate() {
            if !col.standardize {
                col.mean = 0.0;
                col.sd = 1.0;
                col.degenerate = false;
                continue;
            }
            let pre = ColumnTransform { standardize: false, ..col.clone() };
            let mut n = 0usize;
            let mut sum = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in &design.strata {
                for r in 0..s.rows {
                    let v = pre.apply(s.values[r * p + c])?;
                    n += 1;
                    sum += v;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            if n == 0 {
                return Err(Error::Config("cannot fit a transform on an empty design".into()));
            }
            let mean = sum / n as f64;
            let mut ss = 0.0;
            for s in &design.strata {
                for r in 0..s.rows {
                    let d = pre.apply(s.values[r * p + c])? - mean;
                    ss += d * d;
                }
            }
            let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
            col.mean = mean;
            if lo == hi || sd == 0.0 {
                col.sd = 0.0;
                col.degenerate = true;
            } else {
                col.sd = sd;
                col.degenerate = false;
            }
        }
        out.fitted = true;
        Ok(out)
    }

    pub fn degenerate_columns(&self) -> Vec<StatKind> {
        self.columns.iter().filter(|c| c.standardize && c.degenerate).map(|c| c.kind).collect()
    }

    /// Transforms one raw row in place.
    pub fn apply_row(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension { expected: self.columns.len(), got: row.len() });
        }
        for (x, col) in row.iter_mut().zip(&self.columns) {
            *x = col.apply(*x)?;
        }
        Ok(())
    }

    pub fn apply_in_place(&self, design: &mut DesignMatrix) -> Result<()> {
        if !self.fitted {
            return Err(Error::Config("transform applied before fitting".into()));
        }
        self.check()?;
        self.check_columns(design)?;
        let p = self.columns.len();
        for s in &mut design.strata {
            for row in s.values.chunks_mut(p) {
                self.apply_row(row)?;
            }
        }
        design.transformed = true;
        Ok(())
    }

    pub fn apply_matrix(&self, design: &DesignMatrix) -> Result<DesignMatrix> {
        let mut out = design.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignMatrix, DesignStratum};
    use crate::statistics::{AuthorKind, ModelTag};

    fn one_column(kind: StatKind, values: &[f64]) -> DesignMatrix {
        DesignMatrix {
            model: kind.model(),
            columns: vec![kind],
            strata: vec![DesignStratum::from_values(0, values.len(), values.to_vec())],
            ..DesignMatrix::empty(ModelTag::Author, vec![kind])
        }
    }

    const PAIR: StatKind = StatKind::Author(AuthorKind::CoauthorPairRep);

    #[test]
    fn sqrt_then_standardize() {
        let d = one_column(PAIR, &[0.0, 1.0, 4.0]);
        let spec = TransformSpec::sqrt_standardize(&[PAIR]).fit(&d).unwrap();
        assert_eq!(spec.columns[0].mean, 1.0);
        assert_eq!(spec.columns[0].sd, 1.0);
        let t = spec.apply_matrix(&d).unwrap();
        assert_eq!(t.strata[0].values, vec![-1.0, 0.0, 1.0]);
        let mut row = [4.0];
        spec.apply_row(&mut row).unwrap();
        assert_eq!(row, [1.0]);
    }

    #[test]
    fn constant_column_is_degenerate() {
        let d = one_column(PAIR, &[0.1, 0.1, 0.1, 0.1]);
        let spec = TransformSpec::sqrt_standardize(&[PAIR]).fit(&d).unwrap();
        assert!(spec.columns[0].degenerate);
        assert_eq!(spec.degenerate_columns(), vec![PAIR]);
        let t = spec.apply_matrix(&d).unwrap();
        assert!(t.strata[0].values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sqrt_only() {
        let mut spec = TransformSpec::sqrt_standardize(&[PAIR]);
        spec.columns[0].standardize = false;
        let d = one_column(PAIR, &[4.0]);
        let spec = spec.fit(&d).unwrap();
        let mut row = [4.0];
        spec.apply_row(&mut row).unwrap();
        assert_eq!(row, [2.0]);
    }

    #[test]
    fn identity_and_exogenous() {
        let ratio = StatKind::Author(AuthorKind::RatioChilean);
        let d = one_column(ratio, &[0.5, 1.0, 0.0]);
        let spec = TransformSpec::sqrt_standardize(&[ratio]).fit(&d).unwrap();
        assert_eq!(spec.apply_matrix(&d).unwrap().strata[0].values, vec![0.5, 1.0, 0.0]);
        let id = TransformSpec::identity(&[ratio]);
        assert_eq!(id.apply_matrix(&d).unwrap().strata[0].values, vec![0.5, 1.0, 0.0]);

        let mut bad = TransformSpec::sqrt_standardize(&[ratio]);
        bad.columns[0].sqrt = true;
        assert!(bad.fit(&d).is_err());
    }

    #[test]
    fn negative_raw_value_is_a_fault() {
        let d = one_column(PAIR, &[1.0, -1.0]);
        assert!(TransformSpec::sqrt_standardize(&[PAIR]).fit(&d).is_err());
    }

    #[test]
    fn unfitted_spec_refused() {
        let d = one_column(PAIR, &[1.0, 2.0]);
        assert!(TransformSpec::sqrt_standardize(&[PAIR]).apply_matrix(&d).is_err());
    }

    #[test]
    fn citation_repetition_toggle() {
        let rep = StatKind::Citation(CitationKind::CitationRepetition);
        let spec = TransformSpec::sqrt_standardize(&[rep]);
        assert!(spec.columns[0].sqrt);
        assert!(!spec.with_citation_repetition_sqrt(false).columns[0].sqrt);
    }
}
