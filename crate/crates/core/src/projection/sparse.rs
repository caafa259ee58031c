use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::linalg::{DenseMatrix, SymOperator};
use crate::{Error, Result};

/// Symmetric sparse matrix holding only its upper triangle `(i <= j)`, sorted by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    row_start: Vec<usize>,
}

impl SparseSymMatrix {
    /// Sums triplets into canonical upper-triangle keys; `(i, j)` and `(j, i)` coincide.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        Self::from_sorted_upper(n, acc.into_iter().filter(|&(_, v)| v != 0.0))
    }

    fn from_sorted_upper(n: usize, upper: impl Iterator<Item = ((usize, usize), f64)>) -> Self {
        let entries: Vec<(usize, usize, f64)> = upper.map(|((i, j), v)| (i, j, v)).collect();
        let mut row_start = vec![0; n + 1];
        for &(i, _, _) in &entries {
            row_start[i + 1] += 1;
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        SparseSymMatrix {
            n,
            entries,
            row_start,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn upper_entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let row = &self.entries[self.row_start[i]..self.row_start[i + 1]];
        row.binary_search_by_key(&j, |&(_, c, _)| c)
            .map_or(0.0, |k| row[k].2)
    }

    /// `Σ_j A_ij` for every row.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            s[i] += v;
            if i != j {
                s[j] += v;
            }
        }
        s
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
        d
    }

    /// Coordinate dump: `% symmetric n <n> nnz <k>` then `i j value`, 1-based, upper triangle.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "% symmetric n {} nnz {}", self.n, self.entries.len())?;
        for &(i, j, v) in &self.entries {
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let (n, nnz) = match toks.as_slice() {
            ["%", "symmetric", "n", n, "nnz", k] => (
                n.parse::<usize>().map_err(|_| Error::parse(1, "bad n"))?,
                k.parse::<usize>().map_err(|_| Error::parse(1, "bad nnz"))?,
            ),
            _ => return Err(Error::parse(1, "expected `% symmetric n <n> nnz <k>`")),
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::parse(no + 2, format!("bad entry `{line}`"));
            let mut it = line.split_whitespace();
            let i: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let j: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let v: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            if i == 0 || j == 0 || i > n || j > n || i > j {
                return Err(bad());
            }
            triplets.push((i - 1, j - 1, v));
        }
        if triplets.len() != nnz {
            return Err(Error::parse(0, format!("expected {nnz} entries, found {}", triplets.len())));
        }
        Ok(Self::from_triplets(n, triplets))
    }
}

impl SymOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
    }
}

/// `A - B` as an operator.
pub struct Difference<'a, A: ?Sized, B: ?Sized> {
    pub left: &'a A,
    pub right: &'a B,
}

impl<A: SymOperator + ?Sized, B: SymOperator + ?Sized> SymOperator for Difference<'_, A, B> {
    fn dim(&self) -> usize {
        self.left.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; y.len()];
        self.left.apply(x, y);
        self.right.apply(x, &mut tmp);
        y.iter_mut().zip(&tmp).for_each(|(a, b)| *a -= b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_symmetrised() {
        let a = SparseSymMatrix::from_triplets(3, [(2, 0, 1.5), (0, 2, 0.5), (1, 1, 2.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 2), 2.0);
        assert_eq!(a.get(2, 0), 2.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.row_sums(), vec![2.0, 2.0, 2.0]);
        let mut y = vec![0.0; 3];
        a.apply(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![6.0, 4.0, 2.0]);
        assert!(a.to_dense().is_symmetric(0.0));
    }

    #[test]
    fn coordinate_dump_round_trips() {
        let a = SparseSymMatrix::from_triplets(4, [(0, 1, 2.0 / 3.0), (3, 3, 0.1), (1, 3, 1e-17)]);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("% symmetric n 4 nnz 3\n1 2 0.6666666666666666\n"));
        assert_eq!(SparseSymMatrix::read_coordinate(&buf[..]).unwrap(), a);
        assert!(SparseSymMatrix::read_coordinate(&b"% symmetric n 2 nnz 1\n2 1 1.0\n"[..]).is_err());
    }
}
