//! Complex amplitudes, sparse state vectors, and small unitaries.
//!
//! Everything here works in double precision. The protocol amplitudes are
//! drawn from `{0, ±1, 1/√N, ω^k/√N}`, so rounding stays far below the
//! default tolerance for the step counts the engine runs.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

pub type Amplitude = Complex64;

/// Default tolerance for unitarity and probability checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Default squared-magnitude cutoff below which entries are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-12;

pub const ZERO: Amplitude = Complex64::new(0.0, 0.0);
pub const ONE: Amplitude = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("non-finite amplitude")]
    NonFinite,
}

pub fn amp(re: f64, im: f64) -> Amplitude {
    Complex64::new(re, im)
}

/// `1/√n` as a real amplitude.
pub fn inv_sqrt(n: usize) -> Amplitude {
    amp(1.0 / (n as f64).sqrt(), 0.0)
}

/// `exp(2πι·j·l/N)/√N`, the QFT entry for 1-based indices `j`, `l`.
pub fn fourier_entry(n: usize, j: usize, l: usize) -> Amplitude {
    let phase = 2.0 * PI * ((j * l) % n) as f64 / n as f64;
    Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl DenseUnitary {
    pub fn from_rows(rows: Vec<Vec<Amplitude>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::InvalidDimension("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::InvalidDimension(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(LinalgError::NonFinite);
            }
            entries.extend(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Amplitude) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Amplitude]> {
        self.entries.chunks(self.dim)
    }

    /// Max-norm of `U†U − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                let mut acc = ZERO;
                for r in 0..d {
                    acc += self.get(r, a).conj() * self.get(r, b);
                }
                if a == b {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let v = self.get(r, c);
                if v != ZERO {
                    m.push(c, r, v);
                }
            }
        }
        m
    }
}

/// The N×N quantum Fourier transform with entry `(l, j) = exp(2πι·jl/N)/√N`,
/// indices `j, l ∈ [1, N]` stored at 0-based row `l−1`, column `j−1`.
pub fn make_qft(n: usize) -> Result<DenseUnitary, LinalgError> {
    if n == 0 {
        return Err(LinalgError::InvalidDimension("QFT dimension must be ≥ 1".into()));
    }
    let rows = (1..=n)
        .map(|l| (1..=n).map(|j| fourier_entry(n, j, l)).collect())
        .collect();
    DenseUnitary::from_rows(rows)
}

/// True iff `‖U†U − I‖_max ≤ tau`.
pub fn check_unitary(u: &DenseUnitary, tau: f64) -> bool {
    u.unitarity_defect() <= tau
}

/// Column-sparse square matrix. Column `c` lists `(row, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    dim: usize,
    cols: Vec<Vec<(usize, Amplitude)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` at `(row, col)`, merging with an existing entry.
    pub fn push(&mut self, col: usize, row: usize, value: Amplitude) {
        let column = &mut self.cols[col];
        if let Some(slot) = column.iter_mut().find(|(r, _)| *r == row) {
            slot.1 += value;
        } else {
            column.push((row, value));
        }
    }

    pub fn column(&self, col: usize) -> &[(usize, Amplitude)] {
        &self.cols[col]
    }

    pub fn set_column(&mut self, col: usize, entries: Vec<(usize, Amplitude)>) {
        self.cols[col] = entries;
    }

    pub fn clear_column(&mut self, col: usize) {
        self.cols[col].clear();
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column_norm_sq(&self, col: usize) -> f64 {
        self.cols[col].iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Amplitude)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, a)| (r, c, a)))
    }

    pub fn to_dense(&self) -> DenseUnitary {
        let mut d = DenseUnitary {
            dim: self.dim,
            entries: vec![ZERO; self.dim * self.dim],
        };
        for (r, c, a) in self.entries() {
            d.entries[r * self.dim + c] += a;
        }
        d
    }

    fn gram(&self) -> HashMap<(usize, usize), Amplitude> {
        let mut by_row: Vec<Vec<(usize, Amplitude)>> = vec![Vec::new(); self.dim];
        for (r, c, a) in self.entries() {
            by_row[r].push((c, a));
        }
        let mut gram = HashMap::new();
        for row in &by_row {
            for (i, &(ca, a)) in row.iter().enumerate() {
                for &(cb, b) in &row[i..] {
                    let (key, v) = if ca <= cb {
                        ((ca, cb), a.conj() * b)
                    } else {
                        ((cb, ca), b.conj() * a)
                    };
                    *gram.entry(key).or_insert(ZERO) += v;
                }
            }
        }
        gram
    }

    /// Entries of `U†U − I` whose magnitude exceeds `tau`, as
    /// `(col_a, col_b, value)` with `col_a ≤ col_b`, sorted.
    pub fn gram_defects(&self, tau: f64) -> Vec<(usize, usize, Amplitude)> {
        let gram = self.gram();
        let mut defects: Vec<_> = (0..self.dim)
            .map(|c| (c, c, gram.get(&(c, c)).copied().unwrap_or(ZERO) - ONE))
            .chain(
                gram.iter()
                    .filter(|((a, b), _)| a != b)
                    .map(|(&(a, b), &v)| (a, b, v)),
            )
            .filter(|(_, _, v)| v.norm() > tau)
            .collect();
        defects.sort_by_key(|&(a, b, _)| (a, b));
        defects
    }

    /// Max-norm of `U†U − I`.
    pub fn unitarity_defect(&self) -> f64 {
        self.gram_defects(0.0)
            .iter()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Sparse vector over basis indices `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: BTreeMap<usize, Amplitude>,
    prune_threshold: f64,
}

impl SparseVector {
    pub fn zeros(dim: usize, prune_threshold: f64) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
            prune_threshold,
        }
    }

    pub fn basis(dim: usize, index: usize, prune_threshold: f64) -> Result<Self, LinalgError> {
        let mut v = Self::zeros(dim, prune_threshold);
        v.set(index, ONE)?;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn set(&mut self, index: usize, value: Amplitude) -> Result<(), LinalgError> {
        if index >= self.dim {
            return Err(LinalgError::IndexOutOfRange { index, dim: self.dim });
        }
        if value.norm_sqr() < self.prune_threshold || value == ZERO {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
        Ok(())
    }

    pub fn get(&self, index: usize) -> Amplitude {
        self.entries.get(&index).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Amplitude)> + '_ {
        self.entries.iter().map(|(&i, &a)| (i, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Applies `u` on the subspace spanned by `labels` (basis `labels[j]` plays
/// the role of column `j`), acting as the identity elsewhere.
pub fn vec_apply(
    u: &DenseUnitary,
    labels: &[usize],
    v: &SparseVector,
) -> Result<SparseVector, LinalgError> {
    if labels.len() != u.dim() {
        return Err(LinalgError::InvalidDimension(format!(
            "{} labels for a {}-dimensional operator",
            labels.len(),
            u.dim()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= v.dim()) {
        return Err(LinalgError::IndexOutOfRange { index: bad, dim: v.dim() });
    }
    let mut slot = BTreeMap::new();
    for (j, &l) in labels.iter().enumerate() {
        if slot.insert(l, j).is_some() {
            return Err(LinalgError::InvalidDimension(format!("label {l} repeated")));
        }
    }
    let mut acc: BTreeMap<usize, Amplitude> = BTreeMap::new();
    for (idx, a) in v.iter() {
        match slot.get(&idx) {
            Some(&j) => {
                for (l, &target) in labels.iter().enumerate() {
                    let m = u.get(l, j);
                    if m != ZERO {
                        *acc.entry(target).or_insert(ZERO) += m * a;
                    }
                }
            }
            None => *acc.entry(idx).or_insert(ZERO) += a,
        }
    }
    let mut out = SparseVector::zeros(v.dim(), v.prune_threshold());
    for (i, a) in acc {
        out.set(i, a)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Amplitude, b: Amplitude) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn qft_one_is_trivial() {
        let q = make_qft(1).unwrap();
        assert!(close(q.get(0, 0), ONE));
    }

    #[test]
    fn qft_two_matches_direct_evaluation() {
        // exp(2πι·jl/2) for j,l ∈ {1,2}: (1,1) → −1, (1,2),(2,1),(2,2) → 1.
        let q = make_qft(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(close(q.get(0, 0), amp(-s, 0.0)));
        assert!(close(q.get(0, 1), amp(s, 0.0)));
        assert!(close(q.get(1, 0), amp(s, 0.0)));
        assert!(close(q.get(1, 1), amp(s, 0.0)));
    }

    #[test]
    fn qft_zero_is_rejected() {
        assert!(matches!(make_qft(0), Err(LinalgError::InvalidDimension(_))));
    }

    #[test]
    fn qft_is_unitary_up_to_sixteen() {
        for n in 1..=16 {
            assert!(check_unitary(&make_qft(n).unwrap(), 1e-9), "N={n}");
        }
        assert!(check_unitary(&make_qft(3).unwrap(), 1e-9));
    }

    #[test]
    fn check_unitary_cases() {
        assert!(check_unitary(&DenseUnitary::identity(5), 1e-12));
        let mut m = DenseUnitary::identity(3);
        m.set(1, 1, amp(0.5, 0.0));
        assert!(!check_unitary(&m, 1e-9));
    }

    #[test]
    fn non_square_input_is_an_error() {
        let rows = vec![vec![ONE, ZERO], vec![ONE]];
        assert!(matches!(
            DenseUnitary::from_rows(rows),
            Err(LinalgError::InvalidDimension(_))
        ));
    }

    #[test]
    fn sparse_defect_agrees_with_dense() {
        let q = make_qft(5).unwrap();
        let s = q.to_sparse();
        assert!((s.unitarity_defect() - q.unitarity_defect()).abs() < 1e-12);
        assert!(s.gram_defects(1e-9).is_empty());
        let mut broken = s.clone();
        broken.clear_column(2);
        let defects = broken.gram_defects(1e-9);
        assert!(defects.iter().any(|&(a, b, _)| a == 2 && b == 2));
    }

    #[test]
    fn vec_apply_cases() {
        let id = DenseUnitary::identity(3);
        let mut v = SparseVector::zeros(3, 0.0);
        v.set(0, amp(0.6, 0.0)).unwrap();
        v.set(2, amp(0.0, 0.8)).unwrap();
        assert_eq!(vec_apply(&id, &[0, 1, 2], &v).unwrap(), v);

        // Basis |j=1⟩ is column 0; read off the first column of QFT(2).
        let q = make_qft(2).unwrap();
        let e = SparseVector::basis(2, 0, 0.0).unwrap();
        let out = vec_apply(&q, &[0, 1], &e).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(close(out.get(0), amp(-s, 0.0)));
        assert!(close(out.get(1), amp(s, 0.0)));

        let z = SparseVector::zeros(4, 0.0);
        assert!(vec_apply(&q, &[1, 3], &z).unwrap().is_empty());
        assert!(matches!(
            vec_apply(&q, &[1, 7], &z),
            Err(LinalgError::IndexOutOfRange { index: 7, .. })
        ));
    }
}
