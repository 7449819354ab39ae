//! Compressed sparse row storage for symmetric matrices.
//!
//! Both triangles and the diagonal are stored explicitly, so a row slice is
//! the full row and `matvec` is a plain CSR product.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SymCsr {
    /// Assemble from a diagonal and an upper-triangle entry list `(i, j, v)`
    /// with `i < j`. Duplicate off-diagonal positions are summed.
    pub fn from_parts(diag: &[f64], upper: &[(usize, usize, f64)]) -> Self {
        let n = diag.len();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, diag[i])]).collect();
        for &(i, j, v) in upper {
            debug_assert!(i < j && j < n);
            rows[i].push((j, v));
            rows[j].push((i, v));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(&vec![1.0; n], &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let span = self.indptr[i]..self.indptr[i + 1];
            *yi = self.indices[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on `nodes` (ascending), renumbered `0..nodes.len()`.
    pub fn principal_submatrix(&self, nodes: &[usize]) -> SymCsr {
        let mut local = vec![usize::MAX; self.n];
        for (k, &i) in nodes.iter().enumerate() {
            local[i] = k;
        }
        let mut indptr = Vec::with_capacity(nodes.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for &i in nodes {
            for (j, v) in self.row(i) {
                if local[j] != usize::MAX {
                    indices.push(local[j]);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SymCsr {
            n: nodes.len(),
            indptr,
            indices,
            values,
        }
    }

    /// Connected components of the off-diagonal pattern (explicit zeros
    /// count as structure). Labels are assigned in order of lowest node.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for (v, _) in self.row(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// Group node indices by component label; groups ordered by label.
pub fn component_groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let n_groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n_groups];
    for (i, &c) in labels.iter().enumerate() {
        groups[c].push(i);
    }
    groups
}
