//! Complex labeled-tensor arithmetic.
//!
//! Every Hilbert space in a circuit carries a unique symbolic label (for
//! example `L_O` or `S_I^L`) together with a finite dimension. States and
//! operators are dense complex arrays indexed by ordered lists of such
//! [`Space`]s, and all contractions are driven by label matching rather
//! than positional index bookkeeping. Basis index 0 always denotes the
//! vacuum `|0⟩`, index 1 the single excitation `|1⟩`.
//!
//! The central primitive is [`partial_inner`], the partial scalar product
//! `⟨bra|ket⟩` over the bra's labels. It conjugates its bra argument, so
//! callers pass kets on both sides and the kernel supplies the single
//! conjugation site.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default absolute tolerance for approximate amplitude comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid dimension {dim} for `{label}`")]
    InvalidDimension { label: String, dim: usize },
    #[error("basis index {index} out of range for `{label}` (dim {dim})")]
    IndexOutOfRange {
        label: String,
        index: usize,
        dim: usize,
    },
    #[error("label collision on `{0}`")]
    LabelCollision(String),
    #[error("label `{0}` not present")]
    LabelMismatch(String),
    #[error("dimension mismatch on `{label}`: {left} vs {right}")]
    DimensionMismatch {
        label: String,
        left: usize,
        right: usize,
    },
    #[error("amplitude count {got} does not match space dimensions (expected {expected})")]
    ShapeMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// A named finite-dimensional Hilbert space: the unit of all tensor
/// bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Space {
    label: String,
    dim: usize,
}

impl Space {
    pub fn new(label: impl Into<String>, dim: usize) -> Result<Self> {
        let label = label.into();
        if dim == 0 {
            return Err(TensorError::InvalidDimension { label, dim });
        }
        Ok(Space { label, dim })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True for one-dimensional (scalar, `ℂ`) spaces.
    pub fn is_trivial(&self) -> bool {
        self.dim == 1
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.dim)
    }
}

/// Tracks declared labels so each is registered at most once per context.
#[derive(Debug, Default)]
pub struct SpaceRegistry {
    declared: HashSet<String>,
}

impl SpaceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a fresh labeled space of dimension `dim`.
    pub fn declare(&mut self, label: impl Into<String>, dim: usize) -> Result<Space> {
        let label = label.into();
        if self.declared.contains(&label) {
            return Err(TensorError::DuplicateLabel(label));
        }
        let space = Space::new(label.clone(), dim)?;
        self.declared.insert(label);
        Ok(space)
    }
}

fn check_unique_labels(spaces: &[Space]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in spaces {
        if !seen.insert(s.label.as_str()) {
            return Err(TensorError::DuplicateLabel(s.label.clone()));
        }
    }
    Ok(())
}

fn total_dim(spaces: &[Space]) -> usize {
    spaces.iter().map(Space::dim).product()
}

/// Row-major strides for an ordered space list (first space most
/// significant).
fn strides(spaces: &[Space]) -> Vec<usize> {
    let mut strides = vec![1usize; spaces.len()];
    for i in (0..spaces.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * spaces[i + 1].dim;
    }
    strides
}

/// A complex amplitude array indexed by an ordered list of labeled spaces.
///
/// Basis indices are encoded row-major over the space list. Equality of two
/// vectors is label-driven: [`LabeledVector::approx_eq`] aligns the space
/// orders first, so results are insensitive to how callers happened to
/// order their factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    spaces: Vec<Space>,
    amps: Vec<C64>,
}

impl LabeledVector {
    pub fn new(spaces: Vec<Space>, amps: Vec<C64>) -> Result<Self> {
        check_unique_labels(&spaces)?;
        let expected = total_dim(&spaces);
        if amps.len() != expected {
            return Err(TensorError::ShapeMismatch {
                expected,
                got: amps.len(),
            });
        }
        Ok(LabeledVector { spaces, amps })
    }

    /// A vector over the empty space list holding a single amplitude.
    pub fn scalar(value: C64) -> Self {
        LabeledVector {
            spaces: Vec::new(),
            amps: vec![value],
        }
    }

    /// The zero vector over the given spaces.
    pub fn zero(spaces: Vec<Space>) -> Result<Self> {
        check_unique_labels(&spaces)?;
        let len = total_dim(&spaces);
        Ok(LabeledVector {
            spaces,
            amps: vec![C64::ZERO; len],
        })
    }

    /// Unit basis vector `|index⟩` of a single space.
    pub fn basis_state(space: &Space, index: usize) -> Result<Self> {
        if index >= space.dim {
            return Err(TensorError::IndexOutOfRange {
                label: space.label.clone(),
                index,
                dim: space.dim,
            });
        }
        let mut amps = vec![C64::ZERO; space.dim];
        amps[index] = C64::ONE;
        Ok(LabeledVector {
            spaces: vec![space.clone()],
            amps,
        })
    }

    pub fn spaces(&self) -> &[Space] {
        &self.spaces
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn space_by_label(&self, label: &str) -> Option<&Space> {
        self.spaces.iter().find(|s| s.label == label)
    }

    /// The amplitude at a fully specified basis configuration, given as
    /// `(label, index)` pairs in any order.
    pub fn amp_at(&self, assignment: &[(&str, usize)]) -> Result<C64> {
        let strides = strides(&self.spaces);
        let mut flat = 0usize;
        let mut covered = 0usize;
        for &(label, index) in assignment {
            let pos = self
                .spaces
                .iter()
                .position(|s| s.label == label)
                .ok_or_else(|| TensorError::LabelMismatch(label.to_string()))?;
            if index >= self.spaces[pos].dim {
                return Err(TensorError::IndexOutOfRange {
                    label: label.to_string(),
                    index,
                    dim: self.spaces[pos].dim,
                });
            }
            flat += index * strides[pos];
            covered += 1;
        }
        if covered != self.spaces.len() {
            return Err(TensorError::ShapeMismatch {
                expected: self.spaces.len(),
                got: covered,
            });
        }
        Ok(self.amps[flat])
    }

    /// Tensor product. The label sets must be disjoint; the result's space
    /// list is `self`'s followed by `other`'s.
    pub fn tensor(&self, other: &LabeledVector) -> Result<LabeledVector> {
        for s in &other.spaces {
            if self.space_by_label(&s.label).is_some() {
                return Err(TensorError::LabelCollision(s.label.clone()));
            }
        }
        let mut spaces = self.spaces.clone();
        spaces.extend(other.spaces.iter().cloned());
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(LabeledVector { spaces, amps })
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> LabeledVector {
        LabeledVector {
            spaces: self.spaces.clone(),
            amps: self.amps.iter().map(C64::conj).collect(),
        }
    }

    /// Rename spaces, preserving amplitudes. Each `(old, new)` target label
    /// must be fresh.
    pub fn relabel(&self, renames: &[(&str, &str)]) -> Result<LabeledVector> {
        let mut spaces = self.spaces.clone();
        for &(old, new) in renames {
            let pos = spaces
                .iter()
                .position(|s| s.label == old)
                .ok_or_else(|| TensorError::LabelMismatch(old.to_string()))?;
            spaces[pos].label = new.to_string();
        }
        check_unique_labels(&spaces).map_err(|_| {
            TensorError::LabelCollision(
                renames
                    .iter()
                    .map(|&(_, n)| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            )
        })?;
        Ok(LabeledVector {
            spaces,
            amps: self.amps.clone(),
        })
    }

    /// Σ |amp|².
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn scale(&self, factor: C64) -> LabeledVector {
        LabeledVector {
            spaces: self.spaces.clone(),
            amps: self.amps.iter().map(|&a| factor * a).collect(),
        }
    }

    pub fn add(&self, other: &LabeledVector) -> Result<LabeledVector> {
        let aligned = other.reorder_like(&self.spaces)?;
        let amps = self
            .amps
            .iter()
            .zip(aligned.amps.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(LabeledVector {
            spaces: self.spaces.clone(),
            amps,
        })
    }

    /// The scalar amplitude of a zero-rank vector.
    pub fn scalar_value(&self) -> Option<C64> {
        if self.spaces.is_empty() {
            Some(self.amps[0])
        } else {
            None
        }
    }

    /// Drop all one-dimensional spaces; amplitudes are unchanged.
    pub fn without_trivial_spaces(&self) -> LabeledVector {
        let spaces: Vec<Space> = self
            .spaces
            .iter()
            .filter(|s| !s.is_trivial())
            .cloned()
            .collect();
        LabeledVector {
            spaces,
            amps: self.amps.clone(),
        }
    }

    /// Permute the space list into the given target order (same label set).
    pub fn reorder_like(&self, target: &[Space]) -> Result<LabeledVector> {
        if target.len() != self.spaces.len() {
            return Err(TensorError::ShapeMismatch {
                expected: self.spaces.len(),
                got: target.len(),
            });
        }
        let mut perm = Vec::with_capacity(target.len());
        for t in target {
            let pos = self
                .spaces
                .iter()
                .position(|s| s.label == t.label)
                .ok_or_else(|| TensorError::LabelMismatch(t.label.clone()))?;
            if self.spaces[pos].dim != t.dim {
                return Err(TensorError::DimensionMismatch {
                    label: t.label.clone(),
                    left: self.spaces[pos].dim,
                    right: t.dim,
                });
            }
            perm.push(pos);
        }
        if self.spaces.is_empty() {
            return Ok(self.clone());
        }
        let old_strides = strides(&self.spaces);
        let new_spaces: Vec<Space> = perm.iter().map(|&p| self.spaces[p].clone()).collect();
        let dims: Vec<usize> = new_spaces.iter().map(Space::dim).collect();
        let mut amps = vec![C64::ZERO; self.amps.len()];
        let mut digits = vec![0usize; dims.len()];
        for (new_flat, slot) in amps.iter_mut().enumerate() {
            let mut old_flat = 0usize;
            for (k, &d) in digits.iter().enumerate() {
                old_flat += d * old_strides[perm[k]];
            }
            *slot = self.amps[old_flat];
            // increment the row-major digit counter
            let _ = new_flat;
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(LabeledVector {
            spaces: new_spaces,
            amps,
        })
    }

    /// Canonical form: spaces sorted by label.
    pub fn canonicalized(&self) -> LabeledVector {
        let mut sorted = self.spaces.clone();
        sorted.sort_by(|a, b| a.label.cmp(&b.label));
        self.reorder_like(&sorted).expect("same label set")
    }

    /// Label-order-insensitive approximate equality with absolute
    /// tolerance `tol` per amplitude.
    pub fn approx_eq(&self, other: &LabeledVector, tol: f64) -> bool {
        if self.spaces.len() != other.spaces.len() {
            return false;
        }
        let aligned = match other.reorder_like(&self.spaces) {
            Ok(v) => v,
            Err(_) => return false,
        };
        self.amps
            .iter()
            .zip(aligned.amps.iter())
            .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Partial inner product `⟨bra|ket⟩` over the bra's labels.
///
/// The bra's label set must be a subset of the ket's; its amplitudes are
/// conjugated here. The result ranges over the ket's remaining labels (in
/// the ket's order); when the bra covers every label the result is a
/// scalar vector over the empty list.
pub fn partial_inner(bra: &LabeledVector, ket: &LabeledVector) -> Result<LabeledVector> {
    // Positions of each bra space inside the ket.
    let mut ket_pos_of_bra = Vec::with_capacity(bra.spaces.len());
    for bs in &bra.spaces {
        let pos = ket
            .spaces
            .iter()
            .position(|ks| ks.label == bs.label)
            .ok_or_else(|| TensorError::LabelMismatch(bs.label.clone()))?;
        if ket.spaces[pos].dim != bs.dim {
            return Err(TensorError::DimensionMismatch {
                label: bs.label.clone(),
                left: bs.dim,
                right: ket.spaces[pos].dim,
            });
        }
        ket_pos_of_bra.push(pos);
    }

    let rest_spaces: Vec<Space> = ket
        .spaces
        .iter()
        .enumerate()
        .filter(|(i, _)| !ket_pos_of_bra.contains(i))
        .map(|(_, s)| s.clone())
        .collect();
    let rest_strides_out = strides(&rest_spaces);

    // For each ket axis, the stride it contributes to either the bra flat
    // index or the rest flat index.
    let bra_strides = strides(&bra.spaces);
    let mut bra_coeff = vec![0usize; ket.spaces.len()];
    let mut rest_coeff = vec![0usize; ket.spaces.len()];
    let mut rest_axis = 0usize;
    for (ket_axis, _) in ket.spaces.iter().enumerate() {
        if let Some(b_axis) = ket_pos_of_bra.iter().position(|&p| p == ket_axis) {
            bra_coeff[ket_axis] = bra_strides[b_axis];
        } else {
            rest_coeff[ket_axis] = rest_strides_out[rest_axis];
            rest_axis += 1;
        }
    }

    let dims: Vec<usize> = ket.spaces.iter().map(Space::dim).collect();
    let mut out = vec![C64::ZERO; total_dim(&rest_spaces)];
    let mut digits = vec![0usize; dims.len()];
    for &amp in ket.amps.iter() {
        let mut bra_flat = 0usize;
        let mut rest_flat = 0usize;
        for (k, &d) in digits.iter().enumerate() {
            bra_flat += d * bra_coeff[k];
            rest_flat += d * rest_coeff[k];
        }
        out[rest_flat] += bra.amps[bra_flat].conj() * amp;
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    LabeledVector::new(rest_spaces, out)
}

/// A complex matrix mapping an ordered list of input spaces to an ordered
/// list of output spaces.
///
/// Entries are row-major `entries[out_flat * in_dim + in_flat]`. Input and
/// output labels may coincide (an endomorphism such as a ladder operator)
/// or differ (a gate `G_I → G_O`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    out_spaces: Vec<Space>,
    in_spaces: Vec<Space>,
    entries: Vec<C64>,
}

impl LabeledOperator {
    pub fn new(out_spaces: Vec<Space>, in_spaces: Vec<Space>, entries: Vec<C64>) -> Result<Self> {
        check_unique_labels(&out_spaces)?;
        check_unique_labels(&in_spaces)?;
        let expected = total_dim(&out_spaces) * total_dim(&in_spaces);
        if entries.len() != expected {
            return Err(TensorError::ShapeMismatch {
                expected,
                got: entries.len(),
            });
        }
        Ok(LabeledOperator {
            out_spaces,
            in_spaces,
            entries,
        })
    }

    /// Build from a function of `(out_flat, in_flat)`.
    pub fn from_fn(
        out_spaces: Vec<Space>,
        in_spaces: Vec<Space>,
        f: impl Fn(usize, usize) -> C64,
    ) -> Result<Self> {
        let out_dim = total_dim(&out_spaces);
        let in_dim = total_dim(&in_spaces);
        let mut entries = Vec::with_capacity(out_dim * in_dim);
        for r in 0..out_dim {
            for c in 0..in_dim {
                entries.push(f(r, c));
            }
        }
        LabeledOperator::new(out_spaces, in_spaces, entries)
    }

    /// Build from per-input-basis action columns. All columns must share
    /// one space list, which becomes the output space list.
    pub fn from_columns(in_spaces: Vec<Space>, columns: &[LabeledVector]) -> Result<Self> {
        let in_dim = total_dim(&in_spaces);
        if columns.len() != in_dim {
            return Err(TensorError::ShapeMismatch {
                expected: in_dim,
                got: columns.len(),
            });
        }
        let out_spaces = columns[0].spaces().to_vec();
        let out_dim = total_dim(&out_spaces);
        let mut entries = vec![C64::ZERO; out_dim * in_dim];
        for (c, col) in columns.iter().enumerate() {
            let aligned = col.reorder_like(&out_spaces)?;
            for (r, &amp) in aligned.amps().iter().enumerate() {
                entries[r * in_dim + c] = amp;
            }
        }
        LabeledOperator::new(out_spaces, in_spaces, entries)
    }

    pub fn identity(spaces: Vec<Space>) -> Result<Self> {
        LabeledOperator::from_fn(spaces.clone(), spaces, |r, c| {
            if r == c {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
    }

    pub fn out_spaces(&self) -> &[Space] {
        &self.out_spaces
    }

    pub fn in_spaces(&self) -> &[Space] {
        &self.in_spaces
    }

    pub fn in_dim(&self) -> usize {
        total_dim(&self.in_spaces)
    }

    pub fn out_dim(&self) -> usize {
        total_dim(&self.out_spaces)
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entry(&self, out_flat: usize, in_flat: usize) -> C64 {
        self.entries[out_flat * self.in_dim() + in_flat]
    }

    /// Entrywise complex conjugate (not the adjoint).
    pub fn conjugate(&self) -> LabeledOperator {
        LabeledOperator {
            out_spaces: self.out_spaces.clone(),
            in_spaces: self.in_spaces.clone(),
            entries: self.entries.iter().map(C64::conj).collect(),
        }
    }

    /// Transpose: swaps the roles (and space lists) of inputs and outputs.
    pub fn transposed(&self) -> LabeledOperator {
        let out_dim = self.out_dim();
        let in_dim = self.in_dim();
        let mut entries = vec![C64::ZERO; self.entries.len()];
        for r in 0..out_dim {
            for c in 0..in_dim {
                entries[c * out_dim + r] = self.entries[r * in_dim + c];
            }
        }
        LabeledOperator {
            out_spaces: self.in_spaces.clone(),
            in_spaces: self.out_spaces.clone(),
            entries,
        }
    }

    pub fn adjoint(&self) -> LabeledOperator {
        self.transposed().conjugate()
    }

    pub fn scale(&self, factor: C64) -> LabeledOperator {
        LabeledOperator {
            out_spaces: self.out_spaces.clone(),
            in_spaces: self.in_spaces.clone(),
            entries: self.entries.iter().map(|&e| factor * e).collect(),
        }
    }

    pub fn add(&self, other: &LabeledOperator) -> Result<LabeledOperator> {
        let aligned = other.align_like(&self.out_spaces, &self.in_spaces)?;
        let entries = self
            .entries
            .iter()
            .zip(aligned.entries.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(LabeledOperator {
            out_spaces: self.out_spaces.clone(),
            in_spaces: self.in_spaces.clone(),
            entries,
        })
    }

    /// Composition `self ∘ other`: `other`'s outputs feed `self`'s inputs,
    /// matched by label.
    pub fn compose(&self, other: &LabeledOperator) -> Result<LabeledOperator> {
        let aligned = other.align_out_like(&self.in_spaces)?;
        let m = self.out_dim();
        let k = self.in_dim();
        let n = aligned.in_dim();
        let mut entries = vec![C64::ZERO; m * n];
        for r in 0..m {
            for t in 0..k {
                let a = self.entries[r * k + t];
                if a == C64::ZERO {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * aligned.entries[t * n + c];
                }
            }
        }
        LabeledOperator::new(self.out_spaces.clone(), aligned.in_spaces.clone(), entries)
    }

    /// Kronecker product with label-disjoint space lists.
    pub fn tensor_op(&self, other: &LabeledOperator) -> Result<LabeledOperator> {
        for s in other.in_spaces.iter().chain(other.out_spaces.iter()) {
            if self.in_spaces.iter().any(|t| t.label == s.label)
                || self.out_spaces.iter().any(|t| t.label == s.label)
            {
                return Err(TensorError::LabelCollision(s.label.clone()));
            }
        }
        let mut out_spaces = self.out_spaces.clone();
        out_spaces.extend(other.out_spaces.iter().cloned());
        let mut in_spaces = self.in_spaces.clone();
        in_spaces.extend(other.in_spaces.iter().cloned());
        let (m1, n1) = (self.out_dim(), self.in_dim());
        let (m2, n2) = (other.out_dim(), other.in_dim());
        let mut entries = vec![C64::ZERO; m1 * m2 * n1 * n2];
        for r1 in 0..m1 {
            for r2 in 0..m2 {
                for c1 in 0..n1 {
                    for c2 in 0..n2 {
                        entries[(r1 * m2 + r2) * (n1 * n2) + (c1 * n2 + c2)] =
                            self.entries[r1 * n1 + c1] * other.entries[r2 * n2 + c2];
                    }
                }
            }
        }
        LabeledOperator::new(out_spaces, in_spaces, entries)
    }

    fn align_out_like(&self, target_out: &[Space]) -> Result<LabeledOperator> {
        if target_out.len() != self.out_spaces.len() {
            return Err(TensorError::ShapeMismatch {
                expected: self.out_spaces.len(),
                got: target_out.len(),
            });
        }
        // Permutation sending target axis -> current axis.
        let mut perm = Vec::with_capacity(target_out.len());
        for t in target_out {
            let pos = self
                .out_spaces
                .iter()
                .position(|s| s.label == t.label)
                .ok_or_else(|| TensorError::LabelMismatch(t.label.clone()))?;
            if self.out_spaces[pos].dim != t.dim {
                return Err(TensorError::DimensionMismatch {
                    label: t.label.clone(),
                    left: self.out_spaces[pos].dim,
                    right: t.dim,
                });
            }
            perm.push(pos);
        }
        let old_strides = strides(&self.out_spaces);
        let new_spaces: Vec<Space> = perm.iter().map(|&p| self.out_spaces[p].clone()).collect();
        let dims: Vec<usize> = new_spaces.iter().map(Space::dim).collect();
        let in_dim = self.in_dim();
        let out_dim = self.out_dim();
        let mut entries = vec![C64::ZERO; self.entries.len()];
        let mut digits = vec![0usize; dims.len()];
        for new_r in 0..out_dim {
            let mut old_r = 0usize;
            for (k, &d) in digits.iter().enumerate() {
                old_r += d * old_strides[perm[k]];
            }
            entries[new_r * in_dim..(new_r + 1) * in_dim]
                .copy_from_slice(&self.entries[old_r * in_dim..(old_r + 1) * in_dim]);
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        LabeledOperator::new(new_spaces, self.in_spaces.clone(), entries)
    }

    fn align_like(&self, target_out: &[Space], target_in: &[Space]) -> Result<LabeledOperator> {
        let out_aligned = self.align_out_like(target_out)?;
        // Align inputs by transposing, aligning as outputs, transposing back.
        let t = out_aligned.transposed().align_out_like(target_in)?;
        Ok(t.transposed())
    }

    /// Frobenius-normalized unitarity check: ‖U†U − I‖_max ≤ tol.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if self.in_dim() != self.out_dim() {
            return false;
        }
        let n = self.in_dim();
        for r in 0..n {
            for c in 0..n {
                let mut acc = C64::ZERO;
                for k in 0..n {
                    acc += self.entries[k * n + r].conj() * self.entries[k * n + c];
                }
                let expect = if r == c { C64::ONE } else { C64::ZERO };
                if (acc - expect).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Apply an operator to the matching subsystems of a vector.
///
/// The operator's input spaces must all be present in `v` (matched by
/// label and dimension); untouched subsystems pass through, and the output
/// labels replace the input labels in the result.
pub fn apply_op(op: &LabeledOperator, v: &LabeledVector) -> Result<LabeledVector> {
    let mut v_pos_of_in = Vec::with_capacity(op.in_spaces.len());
    for is in &op.in_spaces {
        let pos = v
            .spaces
            .iter()
            .position(|s| s.label == is.label)
            .ok_or_else(|| TensorError::LabelMismatch(is.label.clone()))?;
        if v.spaces[pos].dim != is.dim {
            return Err(TensorError::DimensionMismatch {
                label: is.label.clone(),
                left: is.dim,
                right: v.spaces[pos].dim,
            });
        }
        v_pos_of_in.push(pos);
    }
    let rest_spaces: Vec<Space> = v
        .spaces
        .iter()
        .enumerate()
        .filter(|(i, _)| !v_pos_of_in.contains(i))
        .map(|(_, s)| s.clone())
        .collect();
    // Output labels must not collide with the untouched remainder.
    for os in &op.out_spaces {
        if rest_spaces.iter().any(|s| s.label == os.label) {
            return Err(TensorError::LabelCollision(os.label.clone()));
        }
    }

    let in_strides = strides(&op.in_spaces);
    let rest_strides_out = strides(&rest_spaces);
    let mut in_coeff = vec![0usize; v.spaces.len()];
    let mut rest_coeff = vec![0usize; v.spaces.len()];
    let mut rest_axis = 0usize;
    for (axis, _) in v.spaces.iter().enumerate() {
        if let Some(k) = v_pos_of_in.iter().position(|&p| p == axis) {
            in_coeff[axis] = in_strides[k];
        } else {
            rest_coeff[axis] = rest_strides_out[rest_axis];
            rest_axis += 1;
        }
    }

    let out_dim = op.out_dim();
    let in_dim = op.in_dim();
    let rest_dim = total_dim(&rest_spaces);
    let dims: Vec<usize> = v.spaces.iter().map(Space::dim).collect();
    let mut out = vec![C64::ZERO; out_dim * rest_dim];
    let mut digits = vec![0usize; dims.len()];
    for &amp in v.amps.iter() {
        let mut in_flat = 0usize;
        let mut rest_flat = 0usize;
        for (k, &d) in digits.iter().enumerate() {
            in_flat += d * in_coeff[k];
            rest_flat += d * rest_coeff[k];
        }
        if amp != C64::ZERO {
            for r in 0..out_dim {
                let coeff = op.entries[r * in_dim + in_flat];
                if coeff != C64::ZERO {
                    out[r * rest_dim + rest_flat] += coeff * amp;
                }
            }
        }
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    let mut out_spaces = op.out_spaces.clone();
    out_spaces.extend(rest_spaces);
    LabeledVector::new(out_spaces, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(label: &str, dim: usize) -> Space {
        Space::new(label, dim).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn declare_space_rejects_duplicates_and_zero_dim() {
        let mut reg = SpaceRegistry::new();
        let lo = reg.declare("L_O", 2).unwrap();
        assert_eq!(lo.label(), "L_O");
        assert_eq!(lo.dim(), 2);
        let trivial = reg.declare("X", 1).unwrap();
        assert!(trivial.is_trivial());
        assert_eq!(
            reg.declare("L_O", 2),
            Err(TensorError::DuplicateLabel("L_O".into()))
        );
        assert!(matches!(
            reg.declare("Y", 0),
            Err(TensorError::InvalidDimension { .. })
        ));
    }

    #[test]
    fn basis_state_examples() {
        let lo = sp("L_O", 2);
        let one = LabeledVector::basis_state(&lo, 1).unwrap();
        assert_eq!(one.amps(), &[C64::ZERO, C64::ONE]);
        let vo = sp("V_O", 2);
        let zero = LabeledVector::basis_state(&vo, 0).unwrap();
        assert_eq!(zero.amps(), &[C64::ONE, C64::ZERO]);
        assert!(matches!(
            LabeledVector::basis_state(&lo, 2),
            Err(TensorError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tensor_product_basis_product() {
        let one = LabeledVector::basis_state(&sp("L_O", 2), 1).unwrap();
        let zero = LabeledVector::basis_state(&sp("V_O", 2), 0).unwrap();
        let prod = one.tensor(&zero).unwrap();
        assert_eq!(prod.amps(), &[C64::ZERO, C64::ZERO, C64::ONE, C64::ZERO]);
        assert!(matches!(
            one.tensor(&one),
            Err(TensorError::LabelCollision(_))
        ));
    }

    fn transport(a: &Space, b: &Space) -> LabeledVector {
        // Σ_i |i⟩|i⟩, test-local oracle for the maximally entangled pairing
        let mut v = LabeledVector::zero(vec![a.clone(), b.clone()]).unwrap();
        for i in 0..a.dim() {
            let term = LabeledVector::basis_state(a, i)
                .unwrap()
                .tensor(&LabeledVector::basis_state(b, i).unwrap())
                .unwrap();
            v = v.add(&term).unwrap();
        }
        v
    }

    #[test]
    fn tensor_of_two_transports_has_four_unit_entries() {
        // Direct expansion oracle: Σ_{i,j} |ii⟩|jj⟩ has exactly the four
        // unit amplitudes at (i,i,j,j).
        let t1 = transport(&sp("A", 2), &sp("B", 2));
        let t2 = transport(&sp("C", 2), &sp("D", 2));
        let prod = t1.tensor(&t2).unwrap();
        assert_eq!(prod.dim(), 16);
        let mut nonzero = 0;
        for i in 0..2 {
            for j in 0..2 {
                let amp = prod
                    .amp_at(&[("A", i), ("B", i), ("C", j), ("D", j)])
                    .unwrap();
                assert_eq!(amp, C64::ONE);
                nonzero += 1;
            }
        }
        assert_eq!(nonzero, 4);
        assert_eq!(prod.amps().iter().filter(|a| a.norm() > 0.0).count(), 4);
    }

    #[test]
    fn partial_inner_lemma1_shape() {
        // ⟨Ψ*| on a transport vector transports Ψ to the far label.
        let xo = sp("X_O", 2);
        let yi = sp("Y_I", 2);
        let psi = LabeledVector::new(vec![xo.clone()], vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let t = transport(&xo, &yi);
        let out = partial_inner(&psi.conjugate(), &t).unwrap();
        let expected = LabeledVector::new(vec![yi], vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(out.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn partial_inner_full_coverage_gives_scalar() {
        let a = sp("X_I", 2);
        let b = sp("X_I'", 2);
        let t = transport(&a, &b);
        let s = partial_inner(&t, &t).unwrap();
        assert_eq!(s.scalar_value().unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn partial_inner_errors() {
        let t = transport(&sp("A", 2), &sp("B", 2));
        let bad = LabeledVector::basis_state(&sp("Z", 2), 0).unwrap();
        assert!(matches!(
            partial_inner(&bad, &t),
            Err(TensorError::LabelMismatch(_))
        ));
        let wrong_dim = LabeledVector::basis_state(&sp("A", 3), 0).unwrap();
        assert!(matches!(
            partial_inner(&wrong_dim, &t),
            Err(TensorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_op_passthrough_and_relabeling() {
        let ai = sp("A_I", 2);
        let ao = sp("A_O", 2);
        // A with a=1: diag(1, -1), |1⟩ → -|1⟩ with the label moved to A_O.
        let op = LabeledOperator::from_fn(vec![ao.clone()], vec![ai.clone()], |r, c_| {
            if r != c_ {
                C64::ZERO
            } else if r == 1 {
                -C64::ONE
            } else {
                C64::ONE
            }
        })
        .unwrap();
        let v = LabeledVector::basis_state(&ai, 1).unwrap();
        let out = apply_op(&op, &v).unwrap();
        let expected = LabeledVector::basis_state(&ao, 1).unwrap().scale(-C64::ONE);
        assert!(out.approx_eq(&expected, 1e-14));

        let id = LabeledOperator::identity(vec![ai.clone()]).unwrap();
        let round = apply_op(&id, &v).unwrap();
        assert!(round.approx_eq(&v, 1e-15));
    }

    #[test]
    fn conjugate_and_relabel() {
        let x = sp("X", 2);
        let v = LabeledVector::new(vec![x], vec![c(0.0, 1.0), C64::ZERO]).unwrap();
        let w = v.conjugate();
        assert_eq!(w.amps()[0], c(0.0, -1.0));
        assert!(w.conjugate().approx_eq(&v, 0.0));

        let lo = LabeledVector::basis_state(&sp("L_O", 2), 1).unwrap();
        let moved = lo.relabel(&[("L_O", "S_I^L")]).unwrap();
        assert_eq!(moved.spaces()[0].label(), "S_I^L");
        assert_eq!(moved.amps(), lo.amps());

        let t = transport(&sp("A", 2), &sp("B", 2));
        assert!(matches!(
            t.relabel(&[("A", "B")]),
            Err(TensorError::LabelCollision(_))
        ));
    }

    #[test]
    fn norm_examples() {
        let t = transport(&sp("A", 2), &sp("B", 2));
        assert_eq!(t.norm_sq(), 2.0);
        let z = LabeledVector::zero(vec![sp("A", 3)]).unwrap();
        assert_eq!(z.norm_sq(), 0.0);
        let s = 1.0 / 2f64.sqrt();
        let bell = LabeledVector::new(
            vec![sp("A", 2), sp("B", 2)],
            vec![C64::ZERO, c(s, 0.0), c(s, 0.0), C64::ZERO],
        )
        .unwrap();
        assert!((bell.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reorder_is_amplitude_preserving() {
        let a = sp("A", 2);
        let b = sp("B", 3);
        let amps: Vec<C64> = (0..6).map(|k| c(k as f64, -(k as f64))).collect();
        let v = LabeledVector::new(vec![a.clone(), b.clone()], amps).unwrap();
        let w = v.reorder_like(&[b.clone(), a.clone()]).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(
                    v.amp_at(&[("A", i), ("B", j)]).unwrap(),
                    w.amp_at(&[("A", i), ("B", j)]).unwrap()
                );
            }
        }
        assert!(v.approx_eq(&w, 0.0));
    }

    #[test]
    fn operator_compose_and_tensor() {
        let a = sp("A", 2);
        let b = sp("B", 2);
        let cc = sp("C", 2);
        let h = 1.0 / 2f64.sqrt();
        let had = LabeledOperator::new(
            vec![b.clone()],
            vec![a.clone()],
            vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        )
        .unwrap();
        let had2 = LabeledOperator::new(
            vec![cc.clone()],
            vec![b.clone()],
            vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        )
        .unwrap();
        let composed = had2.compose(&had).unwrap();
        // H∘H = I
        let id = LabeledOperator::identity(vec![a.clone()]).unwrap();
        for r in 0..2 {
            for c_ in 0..2 {
                assert!((composed.entry(r, c_) - id.entry(r, c_)).norm() < 1e-14);
            }
        }
        assert!(had.is_unitary(1e-12));

        let kron = had.tensor_op(&had2).unwrap();
        assert_eq!(kron.in_dim(), 4);
        assert_eq!(kron.out_dim(), 4);
    }
}
