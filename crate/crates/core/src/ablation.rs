//! Balanced histogram binning on φ_min.

use std::io::Write;

use crate::data::DataMatrix;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FallbackEvent {
    /// Bin `bin` had no unused member left for one of its picks; `chosen`
    /// was the nearest unused feature to the bin centre.
    NearestToCentre { bin: usize, chosen: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Sorted retained feature indices.
    pub indices: Vec<usize>,
    /// Bin edges `b_0 < … < b_n`; empty when a guard branch returned early.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub quotas: Vec<usize>,
    pub fallback_events: Vec<FallbackEvent>,
}

impl SelectionResult {
    fn guard(indices: Vec<usize>) -> Self {
        Self {
            indices,
            edges: Vec::new(),
            counts: Vec::new(),
            quotas: Vec::new(),
            fallback_events: Vec::new(),
        }
    }

    /// `bin,count,quota` rows followed by `selected,<i;j;…>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin,count,quota")?;
        for (k, (c, q)) in self.counts.iter().zip(&self.quotas).enumerate() {
            writeln!(out, "{k},{c},{q}")?;
        }
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        writeln!(out, "selected,{}", idx.join(";"))?;
        Ok(())
    }
}

/// Proportional quotas `round(n·c_k/D)`, adjusted to sum to `n`.
///
/// Rounding is half away from zero. Surplus or deficit is moved one unit at
/// a time through the bins in descending count order (ties: lowest index);
/// a bin is never pushed below zero.
pub fn quotas(counts: &[usize], n: usize, d: usize) -> Vec<usize> {
    if counts.is_empty() || d == 0 {
        return vec![0; counts.len()];
    }
    let mut q: Vec<usize> = counts
        .iter()
        .map(|&c| ((n * c) as f64 / d as f64).round() as usize)
        .collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let mut total: usize = q.iter().sum();
    while total < n {
        for &k in &order {
            if total == n {
                break;
            }
            q[k] += 1;
            total += 1;
        }
    }
    while total > n {
        for &k in &order {
            if total == n {
                break;
            }
            if q[k] > 0 {
                q[k] -= 1;
                total -= 1;
            }
        }
    }
    q
}

/// Evenly spaced ranks `round(t·(len−1)/(q−1))`, `t = 0..q`; a single pick
/// takes rank 0. Duplicates (when `q > len`) are dropped.
fn spread_ranks(len: usize, q: usize) -> Vec<usize> {
    if q == 0 || len == 0 {
        return Vec::new();
    }
    if q == 1 {
        return vec![0];
    }
    let mut r: Vec<usize> = (0..q)
        .map(|t| ((t * (len - 1)) as f64 / (q - 1) as f64).round() as usize)
        .collect();
    r.dedup();
    r
}

pub fn select_features(phi: &[f64], n: usize) -> Result<SelectionResult> {
    if phi.iter().any(|v| !v.is_finite()) {
        return invalid("φ contains non-finite entries");
    }
    let d = phi.len();
    if n == 0 {
        return Ok(SelectionResult::guard(Vec::new()));
    }
    if n >= d {
        return Ok(SelectionResult::guard((0..d).collect()));
    }
    let a_min = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let a_max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if a_min == a_max {
        return Ok(SelectionResult::guard((0..n).collect()));
    }

    let width = (a_max - a_min) / n as f64;
    let edges: Vec<f64> = (0..=n)
        .map(|k| if k == n { a_max } else { a_min + k as f64 * width })
        .collect();
    let bin_of = |v: f64| -> usize { (((v - a_min) / width).floor() as usize).min(n - 1) };
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &v) in phi.iter().enumerate() {
        members[bin_of(v)].push(i);
    }
    let counts: Vec<usize> = members.iter().map(Vec::len).collect();
    let q = quotas(&counts, n, d);

    let mut used = vec![false; d];
    let mut picked = Vec::with_capacity(n);
    let mut events = Vec::new();
    for k in 0..n {
        if q[k] == 0 {
            continue;
        }
        let mut free: Vec<usize> = members[k].iter().copied().filter(|&i| !used[i]).collect();
        free.sort_by(|&a, &b| phi[a].total_cmp(&phi[b]).then(a.cmp(&b)));
        let mut taken = 0;
        for r in spread_ranks(free.len(), q[k]) {
            used[free[r]] = true;
            picked.push(free[r]);
            taken += 1;
        }
        let centre = 0.5 * (edges[k] + edges[k + 1]);
        while taken < q[k] {
            let j = (0..d)
                .filter(|&j| !used[j])
                .min_by(|&a, &b| {
                    (phi[a] - centre)
                        .abs()
                        .total_cmp(&(phi[b] - centre).abs())
                        .then(a.cmp(&b))
                })
                .expect("quota total never exceeds D");
            used[j] = true;
            picked.push(j);
            events.push(FallbackEvent::NearestToCentre { bin: k, chosen: j });
            taken += 1;
        }
    }
    picked.sort_unstable();
    Ok(SelectionResult {
        indices: picked,
        edges,
        counts,
        quotas: q,
        fallback_events: events,
    })
}

/// Keep the selected columns of `x`, in ascending index order.
pub fn reduce_matrix(x: &DataMatrix, selection: &SelectionResult) -> Result<DataMatrix> {
    x.select_columns(&selection.indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quota_examples() {
        assert_eq!(quotas(&[2, 2, 2], 3, 6), vec![1, 1, 1]);
        assert_eq!(quotas(&[5, 1], 2, 6), vec![2, 0]);
        assert_eq!(quotas(&[1, 1, 1, 1], 2, 4), vec![0, 0, 1, 1]);
        // 0.5 rounds up, then the surplus leaves the largest bin first
        assert_eq!(quotas(&[3, 1], 2, 4), vec![1, 1]);
        assert_eq!(quotas(&[0, 4, 4], 3, 8), vec![0, 1, 2]);
    }

    #[test]
    fn hand_traced_example() {
        let phi = [0.0, 0.1, 0.5, 0.55, 0.9, 1.0];
        let s = select_features(&phi, 3).unwrap();
        assert_eq!(s.counts, vec![2, 2, 2]);
        assert_eq!(s.quotas, vec![1, 1, 1]);
        assert_eq!(s.indices, vec![0, 2, 4]);
        assert!(s.fallback_events.is_empty());
    }

    #[test]
    fn guard_branches() {
        let phi = [0.3, 0.1, 0.2];
        assert!(select_features(&phi, 0).unwrap().indices.is_empty());
        assert_eq!(select_features(&phi, 3).unwrap().indices, vec![0, 1, 2]);
        assert_eq!(select_features(&phi, 7).unwrap().indices, vec![0, 1, 2]);
        assert_eq!(select_features(&[0.5; 4], 2).unwrap().indices, vec![0, 1]);
        assert!(select_features(&[0.0, f64::NAN], 1).is_err());
    }

    #[test]
    fn crowded_bin_spreads_its_picks() {
        // nine values near 0 and one at 1: bin 0 gets both picks, spread
        // across its sorted members including both ends
        let mut phi: Vec<f64> = (0..9).map(|i| i as f64 * 0.01).collect();
        phi.push(1.0);
        let s = select_features(&phi, 2).unwrap();
        assert_eq!(s.quotas, vec![2, 0]);
        assert_eq!(s.indices, vec![0, 8]);
    }

    #[test]
    fn fallback_fills_short_bins() {
        // one feature in bin 0 but quota rounding gives it more than one pick
        let phi = [0.0, 0.9, 0.95, 1.0];
        let s = select_features(&phi, 2).unwrap();
        assert_eq!(s.indices.len(), 2);
        let phi = [0.0, 0.0, 0.0, 1.0, 1.0];
        let s = select_features(&phi, 4).unwrap();
        assert_eq!(s.indices.len(), 4);
        assert_eq!(s.quotas.iter().sum::<usize>(), 4);
    }

    #[test]
    fn reduce_keeps_selected_columns() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]]).unwrap();
        let mut s = SelectionResult::guard(vec![1, 3]);
        let r = reduce_matrix(&x, &s).unwrap();
        assert_eq!(r.values(), &[2.0, 4.0, 6.0, 8.0]);
        s.indices = vec![0, 1, 2, 3];
        assert_eq!(reduce_matrix(&x, &s).unwrap(), x);
        s.indices.clear();
        assert_eq!(reduce_matrix(&x, &s).unwrap().cols(), 0);
        s.indices = vec![4];
        assert!(reduce_matrix(&x, &s).is_err());
    }

    #[test]
    fn csv_export() {
        let s = select_features(&[0.0, 0.1, 0.5, 0.55, 0.9, 1.0], 3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin,count,quota\n0,2,1\n1,2,1\n2,2,1\nselected,0;2;4\n"
        );
    }
}
