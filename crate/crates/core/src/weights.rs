//! Sparse signed synaptic weight matrices.
//!
//! Entry `w_ij` is the connection from pre-synaptic neuron `i` (row) to
//! post-synaptic neuron `j` (column). The sign of every entry is determined
//! by the pre-synaptic neuron alone — negative iff it is inhibitory — so the
//! storage keeps non-negative magnitudes plus one excitatory flag per row.
//! No update can flip a sign; a magnitude driven to zero is a pruned synapse.

use crate::error::{Error, Result};

/// CSR-style float-magnitude weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeights {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    mag: Vec<f64>,
    excitatory: Vec<bool>,
}

impl SparseWeights {
    /// Build from per-row `(column, magnitude)` lists. Rows must be sorted by
    /// column with no duplicates and no self-connections.
    pub fn from_rows(excitatory: Vec<bool>, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let n = excitatory.len();
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut mag = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for &(j, m) in row {
                debug_assert!((j as usize) < n && j as usize != i && m >= 0.0);
                col_idx.push(j);
                mag.push(m);
            }
            row_ptr.push(col_idx.len());
        }
        SparseWeights {
            n,
            row_ptr,
            col_idx,
            mag,
            excitatory,
        }
    }

    /// Build from a dense signed matrix; the sign pattern must be consistent
    /// per row. Rows whose entries are all zero default to excitatory unless
    /// a mask is given.
    pub fn from_dense(dense: &[Vec<f64>], excitatory: Option<Vec<bool>>) -> Result<Self> {
        let n = dense.len();
        let mask = match excitatory {
            Some(m) => m,
            None => dense
                .iter()
                .map(|row| !row.iter().any(|&w| w < 0.0))
                .collect(),
        };
        let mut rows = Vec::with_capacity(n);
        for (i, row) in dense.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "from_dense row",
                    expected: n,
                    actual: row.len(),
                });
            }
            let mut entries = Vec::new();
            for (j, &w) in row.iter().enumerate() {
                if w == 0.0 || i == j {
                    continue;
                }
                if (w > 0.0) != mask[i] {
                    return Err(Error::InvalidParameter(format!(
                        "sign of w[{i}][{j}] contradicts the row's excitatory flag"
                    )));
                }
                entries.push((j as u32, w.abs()));
            }
            rows.push(entries);
        }
        Ok(SparseWeights::from_rows(mask, rows))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn excitatory(&self) -> &[bool] {
        &self.excitatory
    }

    pub fn is_excitatory(&self, i: usize) -> bool {
        self.excitatory[i]
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.mag[span])
    }

    pub fn row_mut(&mut self, i: usize) -> (&[u32], &mut [f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &mut self.mag[span])
    }

    /// Signed value at (i, j); 0 when the synapse does not exist.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, mags) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => {
                if self.excitatory[i] {
                    mags[k]
                } else {
                    -mags[k]
                }
            }
            Err(_) => 0.0,
        }
    }

    /// Scatter the signed rows of the spiking neurons into `drive`.
    pub fn accumulate_drive(&self, spiking: &[u32], drive: &mut [f64]) {
        debug_assert_eq!(drive.len(), self.n);
        for &i in spiking {
            let sign = if self.excitatory[i as usize] { 1.0 } else { -1.0 };
            let (cols, mags) = self.row(i as usize);
            for (&j, &m) in cols.iter().zip(mags) {
                drive[j as usize] += sign * m;
            }
        }
    }

    /// y = |W|^T x, the matvec used for the spectral radius of the
    /// entrywise-absolute matrix (same radius as |W| itself).
    pub fn abs_matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let (cols, mags) = self.row(i);
            for (&j, &m) in cols.iter().zip(mags) {
                y[j as usize] += m * xi;
            }
        }
    }

    /// Multiply every magnitude by `factor`.
    pub fn scale_all(&mut self, factor: f64) {
        for m in &mut self.mag {
            *m *= factor;
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.mag.iter().cloned().fold(0.0, f64::max)
    }

    /// Set every existing synapse's magnitude. A control knob for forced
    /// super/subcritical regimes.
    pub fn force_magnitudes(&mut self, value: f64) {
        assert!(value >= 0.0);
        self.mag.fill(value);
    }

    /// Mean over nonzero magnitudes of excitatory rows; `None` when every
    /// excitatory synapse is pruned or absent.
    pub fn mean_nonzero_excitatory(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.n {
            if !self.excitatory[i] {
                continue;
            }
            let (_, mags) = self.row(i);
            for &m in mags {
                if m > 0.0 {
                    sum += m;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    /// Out-neighbour lists (the anatomical post-synaptic target sets).
    pub fn adjacency_out(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|i| self.row(i).0.to_vec()).collect()
    }

    /// Signed edge list `(pre, post, weight)` in row order.
    pub fn signed_edges(&self) -> Vec<(u32, u32, f64)> {
        let mut edges = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let sign = if self.excitatory[i] { 1.0 } else { -1.0 };
            let (cols, mags) = self.row(i);
            for (&j, &m) in cols.iter().zip(mags) {
                edges.push((i as u32, j, sign * m));
            }
        }
        edges
    }
}

/// Map a float magnitude in [0, 1] to the 8-bit hardware range, saturating at
/// the top of the half-open interval.
pub fn quantize(w: f64) -> u8 {
    debug_assert!((0.0..=1.0).contains(&w));
    let q = (w.max(0.0) * 256.0).round() as i64;
    q.min(255) as u8
}

/// Inverse map back to the unit range.
pub fn dequantize(q: u8) -> f64 {
    q as f64 / 256.0
}

/// The same sparse structure with sign + 8-bit integer magnitudes, emulating
/// a hardware weight memory.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedWeights {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    mag: Vec<u8>,
    excitatory: Vec<bool>,
}

impl QuantizedWeights {
    pub fn from_float(w: &SparseWeights) -> Self {
        QuantizedWeights {
            n: w.n,
            row_ptr: w.row_ptr.clone(),
            col_idx: w.col_idx.clone(),
            mag: w.mag.iter().map(|&m| quantize(m)).collect(),
            excitatory: w.excitatory.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn excitatory(&self) -> &[bool] {
        &self.excitatory
    }

    pub fn row(&self, i: usize) -> (&[u32], &[u8]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.mag[span])
    }

    pub fn row_mut(&mut self, i: usize) -> (&[u32], &mut [u8]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &mut self.mag[span])
    }

    /// Scatter signed integer magnitudes (as f64 currents in hardware units).
    pub fn accumulate_drive(&self, spiking: &[u32], drive: &mut [f64]) {
        debug_assert_eq!(drive.len(), self.n);
        for &i in spiking {
            let sign = if self.excitatory[i as usize] { 1.0 } else { -1.0 };
            let (cols, mags) = self.row(i as usize);
            for (&j, &m) in cols.iter().zip(mags) {
                drive[j as usize] += sign * m as f64;
            }
        }
    }

    /// Mean of nonzero excitatory magnitudes reported in dequantized units.
    pub fn mean_nonzero_excitatory(&self) -> Option<f64> {
        let mut sum = 0u64;
        let mut count = 0usize;
        for i in 0..self.n {
            if !self.excitatory[i] {
                continue;
            }
            let (_, mags) = self.row(i);
            for &m in mags {
                if m > 0 {
                    sum += m as u64;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| dequantize_mean(sum, count))
    }

    pub fn adjacency_out(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|i| self.row(i).0.to_vec()).collect()
    }

    /// Dequantized signed edge list `(pre, post, weight)`.
    pub fn signed_edges(&self) -> Vec<(u32, u32, f64)> {
        let mut edges = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let sign = if self.excitatory[i] { 1.0 } else { -1.0 };
            let (cols, mags) = self.row(i);
            for (&j, &m) in cols.iter().zip(mags) {
                edges.push((i as u32, j, sign * dequantize(m)));
            }
        }
        edges
    }

    pub fn magnitudes(&self) -> &[u8] {
        &self.mag
    }
}

fn dequantize_mean(sum: u64, count: usize) -> f64 {
    sum as f64 / count as f64 / 256.0
}
