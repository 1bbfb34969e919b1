//! Sparse exact Gaussian elimination over the rationals.
//!
//! Rows are reduced one at a time against the pivots found so far; the pivot of
//! a new row is its smallest surviving column. The pivot set is therefore the set
//! of columns not spanned by earlier columns, independent of row order, and the
//! returned particular solution sets every free column to zero.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::algebra::Rational;

pub type SparseRow = BTreeMap<usize, Rational>;

#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    columns: usize,
    rows: Vec<(SparseRow, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Particular solution with free columns set to zero. When the system is
    /// inconsistent this solves only the consistent rows.
    pub values: Vec<Rational>,
    pub consistent: bool,
    pub rank: usize,
    /// Dimension of the solution space of the homogeneous system.
    pub nullity: usize,
}

impl LinearSystem {
    pub fn new(columns: usize) -> Self {
        LinearSystem { columns, rows: Vec::new() }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn push(&mut self, row: SparseRow, rhs: Rational) {
        debug_assert!(row.keys().all(|&c| c < self.columns));
        self.rows.push((row, rhs));
    }

    pub fn solve(&self) -> Solution {
        // pivot column -> (row, rhs), each row normalised to 1 at its pivot
        let mut pivots: BTreeMap<usize, (SparseRow, Rational)> = BTreeMap::new();
        let mut consistent = true;
        for (row, rhs) in &self.rows {
            let mut row: SparseRow = row.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect();
            let mut rhs = rhs.clone();
            // eliminate existing pivots
            let hits: Vec<usize> = row.keys().filter(|c| pivots.contains_key(c)).copied().collect();
            for c in hits {
                let Some(factor) = row.get(&c).cloned() else { continue };
                let (prow, prhs) = &pivots[&c];
                axpy(&mut row, &-factor.clone(), prow);
                rhs -= &factor * prhs;
            }
            let Some((&lead, lead_val)) = row.iter().next() else {
                if !rhs.is_zero() {
                    consistent = false;
                }
                continue;
            };
            let inv = lead_val.recip();
            for v in row.values_mut() {
                *v *= &inv;
            }
            rhs *= &inv;
            // back-substitute into earlier pivot rows
            for (prow, prhs) in pivots.values_mut() {
                if let Some(factor) = prow.get(&lead).cloned() {
                    axpy(prow, &-factor.clone(), &row);
                    *prhs -= &factor * &rhs;
                }
            }
            pivots.insert(lead, (row, rhs));
        }
        let mut values = vec![Rational::zero(); self.columns];
        for (c, (_, rhs)) in &pivots {
            values[*c] = rhs.clone();
        }
        Solution { values, consistent, rank: pivots.len(), nullity: self.columns - pivots.len() }
    }
}

fn axpy(target: &mut SparseRow, factor: &Rational, source: &SparseRow) {
    for (c, v) in source {
        let entry = target.entry(*c).or_insert_with(Rational::zero);
        *entry += factor * v;
        if entry.is_zero() {
            target.remove(c);
        }
    }
}
