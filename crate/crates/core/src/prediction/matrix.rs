use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major feature table with a missing-value mask.
///
/// Rows are cascades, columns named features. Missing cells hold `NaN` in
/// `values`; `imputed` marks cells filled in by [`Imputer`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<F> {
    names: Vec<String>,
    row_ids: Vec<String>,
    values: Vec<F>,
    missing: Vec<bool>,
    imputed: Vec<bool>,
}

impl<F: Scalar> FeatureMatrix<F> {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::Contract(format!("duplicate feature name {n:?}")));
            }
        }
        Ok(FeatureMatrix {
            names,
            row_ids: Vec::new(),
            values: Vec::new(),
            missing: Vec::new(),
            imputed: Vec::new(),
        })
    }

    pub fn push_row(&mut self, id: impl Into<String>, row: &[Option<F>]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::Contract(format!(
                "row has {} values for {} features",
                row.len(),
                self.names.len()
            )));
        }
        self.row_ids.push(id.into());
        for v in row {
            self.values.push(v.unwrap_or_else(F::nan));
            self.missing.push(v.is_none());
            self.imputed.push(false);
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn value(&self, r: usize, c: usize) -> F {
        self.values[r * self.names.len() + c]
    }

    pub fn get(&self, r: usize, c: usize) -> Option<F> {
        let i = r * self.names.len() + c;
        (!self.missing[i]).then_some(self.values[i])
    }

    pub fn is_missing(&self, r: usize, c: usize) -> bool {
        self.missing[r * self.names.len() + c]
    }

    pub fn is_imputed(&self, r: usize, c: usize) -> bool {
        self.imputed[r * self.names.len() + c]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn row(&self, r: usize) -> &[F] {
        let p = self.names.len();
        &self.values[r * p..(r + 1) * p]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let p = self.names.len();
        let mut out = FeatureMatrix {
            names: self.names.clone(),
            row_ids: Vec::with_capacity(rows.len()),
            values: Vec::with_capacity(rows.len() * p),
            missing: Vec::with_capacity(rows.len() * p),
            imputed: Vec::with_capacity(rows.len() * p),
        };
        for &r in rows {
            out.row_ids.push(self.row_ids[r].clone());
            out.values.extend_from_slice(&self.values[r * p..(r + 1) * p]);
            out.missing.extend_from_slice(&self.missing[r * p..(r + 1) * p]);
            out.imputed.extend_from_slice(&self.imputed[r * p..(r + 1) * p]);
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let p = self.names.len();
        let mut out = FeatureMatrix {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            row_ids: self.row_ids.clone(),
            values: Vec::with_capacity(self.n_rows() * cols.len()),
            missing: Vec::with_capacity(self.n_rows() * cols.len()),
            imputed: Vec::with_capacity(self.n_rows() * cols.len()),
        };
        for r in 0..self.n_rows() {
            for &c in cols {
                out.values.push(self.values[r * p + c]);
                out.missing.push(self.missing[r * p + c]);
                out.imputed.push(self.imputed[r * p + c]);
            }
        }
        out
    }

    /// Columns whose names satisfy `keep`.
    pub fn filter_columns(&self, keep: impl Fn(&str) -> bool) -> Self {
        let cols: Vec<usize> = (0..self.n_cols()).filter(|&c| keep(&self.names[c])).collect();
        self.select_columns(&cols)
    }

    /// Side-by-side concatenation; both matrices must list the same rows.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.row_ids != other.row_ids {
            return Err(Error::Contract("hstack needs identical rows".into()));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut out = FeatureMatrix::new(names)?;
        out.row_ids = self.row_ids.clone();
        let (p, q) = (self.n_cols(), other.n_cols());
        for r in 0..self.n_rows() {
            out.values.extend_from_slice(&self.values[r * p..(r + 1) * p]);
            out.values.extend_from_slice(&other.values[r * q..(r + 1) * q]);
            out.missing.extend_from_slice(&self.missing[r * p..(r + 1) * p]);
            out.missing.extend_from_slice(&other.missing[r * q..(r + 1) * q]);
            out.imputed.extend_from_slice(&self.imputed[r * p..(r + 1) * p]);
            out.imputed.extend_from_slice(&other.imputed[r * q..(r + 1) * q]);
        }
        Ok(out)
    }
}

/// Column means learned on one matrix and applied to another.
#[derive(Clone, Debug, PartialEq)]
pub struct Imputer<F> {
    /// Mean per column, `None` if the column had no observed value.
    pub means: Vec<Option<F>>,
}

impl<F: Scalar> Imputer<F> {
    pub fn fit(m: &FeatureMatrix<F>) -> Self {
        let means = (0..m.n_cols())
            .map(|c| {
                let obs: Vec<F> = (0..m.n_rows()).filter_map(|r| m.get(r, c)).collect();
                (!obs.is_empty()).then(|| crate::scalar::mean(&obs))
            })
            .collect();
        Imputer { means }
    }

    /// Fills missing cells with the learned means and drops columns that had
    /// no observed value when fitted. Returns the names of dropped columns.
    pub fn transform(&self, m: &FeatureMatrix<F>) -> (FeatureMatrix<F>, Vec<String>) {
        let keep: Vec<usize> = (0..m.n_cols()).filter(|&c| self.means[c].is_some()).collect();
        let dropped: Vec<String> = (0..m.n_cols())
            .filter(|&c| self.means[c].is_none())
            .map(|c| m.names[c].clone())
            .collect();
        let mut out = m.select_columns(&keep);
        let q = keep.len();
        for r in 0..out.n_rows() {
            for (j, &c) in keep.iter().enumerate() {
                let i = r * q + j;
                if out.missing[i] {
                    out.values[i] = self.means[c].expect("kept column has a mean");
                    out.missing[i] = false;
                    out.imputed[i] = true;
                }
            }
        }
        (out, dropped)
    }
}

/// Replaces missing cells by their column's observed mean. Columns with no
/// observed value are dropped with a warning.
pub fn impute_missing<F: Scalar>(m: &FeatureMatrix<F>) -> FeatureMatrix<F> {
    let (out, dropped) = Imputer::fit(m).transform(m);
    for name in dropped {
        log::debug!("feature {name:?} has no observed values and was dropped");
    }
    out
}

/// Appends squares of every column, then products of every column pair.
pub fn polynomial_features<F: Scalar>(m: &FeatureMatrix<F>, order: usize) -> Result<FeatureMatrix<F>> {
    if order != 2 {
        return Err(Error::Config(format!("only order 2 polynomial features are supported, got {order}")));
    }
    let p = m.n_cols();
    let mut names = m.names.clone();
    for a in &m.names {
        names.push(format!("{a}^2"));
    }
    for i in 0..p {
        for j in (i + 1)..p {
            names.push(format!("{}*{}", m.names[i], m.names[j]));
        }
    }
    let mut out = FeatureMatrix::new(names)?;
    for r in 0..m.n_rows() {
        let base: Vec<Option<F>> = (0..p).map(|c| m.get(r, c)).collect();
        let mut row = base.clone();
        row.extend(base.iter().map(|v| v.map(|x| x * x)));
        for i in 0..p {
            for j in (i + 1)..p {
                row.push(base[i].zip(base[j]).map(|(a, b)| a * b));
            }
        }
        out.push_row(m.row_ids[r].clone(), &row)?;
    }
    Ok(out)
}
