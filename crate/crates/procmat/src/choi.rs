//! Transport vectors, Choi–Jamiołkowski representations of instruments,
//! process vectors built from wirings, probability evaluation, and the
//! process-matrix axiom checks.
//!
//! A wire between two gates is encoded by the unnormalized maximally
//! entangled state `|𝟙⟩⟩ = Σ_i |i⟩|i⟩` over the pair of connected spaces;
//! a full wiring is the tensor product of one such transport vector per
//! wire. For pure instruments the outcome probability is
//!
//! ```text
//! p = ‖ (⟨⟨M₁*| ⊗ ⟨⟨M₂*| ⊗ …) |W⟩⟩ ‖²
//! ```
//!
//! evaluated here by iterated partial inner products, which keeps every
//! intermediate small even when the fully expanded `|W⟩⟩` would not fit in
//! memory. The process vector is therefore stored in factored form; call
//! [`ProcessVector::materialize`] only for small wirings.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tensor::{
    apply_op, partial_inner, LabeledOperator, LabeledVector, Space, TensorError,
};

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("gate spaces do not cover the process spaces: {0}")]
    Coverage(String),
    #[error("process matrix is not square on its declared spaces")]
    Shape,
    #[error("operator is not unitary within tolerance {0:e}")]
    NonUnitary(f64),
    #[error("duplicate particle-number sector {0}")]
    DuplicateSector(usize),
    #[error("wiring too large to materialize ({amps} amplitudes)")]
    MaterializeTooLarge { amps: usize },
}

pub type Result<T> = std::result::Result<T, ProcessError>;

/// The transport vector `Σ_i |i⟩^{from} |i⟩^{to}` encoding an identity
/// wire between two equal-dimension spaces.
pub fn transport_vector(from: &Space, to: &Space) -> Result<LabeledVector> {
    if from.dim() != to.dim() {
        return Err(TensorError::DimensionMismatch {
            label: format!("{} -> {}", from.label(), to.label()),
            left: from.dim(),
            right: to.dim(),
        }
        .into());
    }
    let mut v = LabeledVector::zero(vec![from.clone(), to.clone()])?;
    for i in 0..from.dim() {
        let term = LabeledVector::basis_state(from, i)?
            .tensor(&LabeledVector::basis_state(to, i)?)?;
        v = v.add(&term)?;
    }
    Ok(v)
}

/// CJ vector `|op*⟩⟩ = [I ⊗ op*] |𝟙⟩⟩` of a linear instrument, a vector
/// over the operator's input spaces followed by its output spaces.
pub fn cj_vector(op: &LabeledOperator) -> Result<LabeledVector> {
    for s in op.out_spaces() {
        if op.in_spaces().iter().any(|t| t.label() == s.label()) {
            return Err(TensorError::LabelCollision(s.label().to_string()).into());
        }
    }
    let in_dim = op.in_dim();
    let out_dim = op.out_dim();
    let mut spaces = op.in_spaces().to_vec();
    spaces.extend(op.out_spaces().iter().cloned());
    let mut amps = vec![C64::ZERO; in_dim * out_dim];
    for i in 0..in_dim {
        for j in 0..out_dim {
            amps[i * out_dim + j] = op.entry(j, i).conj();
        }
    }
    Ok(LabeledVector::new(spaces, amps)?)
}

/// CJ matrix `[(ℐ ⊗ ℳ)(|𝟙⟩⟩⟨⟨𝟙|)]^T` of a completely positive map given
/// by Kraus-style terms, a square operator on input ⊗ output space.
pub fn cj_matrix(kraus_terms: &[LabeledOperator]) -> Result<LabeledOperator> {
    assert!(!kraus_terms.is_empty(), "channel needs at least one term");
    let first = &kraus_terms[0];
    let in_dim = first.in_dim();
    let out_dim = first.out_dim();
    let joint = in_dim * out_dim;
    let mut joint_spaces = first.in_spaces().to_vec();
    joint_spaces.extend(first.out_spaces().iter().cloned());
    for term in kraus_terms.iter().skip(1) {
        if term.in_spaces() != first.in_spaces() || term.out_spaces() != first.out_spaces() {
            return Err(ProcessError::Coverage(
                "Kraus terms must share input/output spaces".into(),
            ));
        }
    }
    // Accumulate Σ_K (I ⊗ K)|𝟙⟩⟩⟨⟨𝟙|(I ⊗ K)†, then transpose entrywise.
    let mut acc = vec![C64::ZERO; joint * joint];
    for term in kraus_terms {
        // (I ⊗ K)|𝟙⟩⟩ has component K[j, i] at joint index (i, j).
        let mut col = vec![C64::ZERO; joint];
        for i in 0..in_dim {
            for j in 0..out_dim {
                col[i * out_dim + j] = term.entry(j, i);
            }
        }
        for r in 0..joint {
            for c in 0..joint {
                acc[r * joint + c] += col[r] * col[c].conj();
            }
        }
    }
    let mut transposed = vec![C64::ZERO; joint * joint];
    for r in 0..joint {
        for c in 0..joint {
            transposed[c * joint + r] = acc[r * joint + c];
        }
    }
    Ok(LabeledOperator::new(
        joint_spaces.clone(),
        joint_spaces,
        transposed,
    )?)
}

/// A connection from one gate's output space to another gate's input
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct Wire {
    pub from: Space,
    pub to: Space,
}

impl Wire {
    pub fn new(from: Space, to: Space) -> Self {
        Wire { from, to }
    }
}

/// A process vector: the tensor product of one transport vector per wire,
/// kept in factored form.
#[derive(Debug, Clone)]
pub struct ProcessVector {
    wires: Vec<Wire>,
    factors: Vec<LabeledVector>,
}

/// Refuse to expand anything bigger than this many amplitudes.
const MATERIALIZE_CAP: usize = 1 << 22;

impl ProcessVector {
    /// Build from a wiring; wire spaces must be pairwise label-disjoint
    /// and each wire's endpoint dimensions must match.
    pub fn from_wiring(wires: Vec<Wire>) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        for w in &wires {
            for label in [w.from.label(), w.to.label()] {
                if seen.contains(&label) {
                    return Err(TensorError::LabelCollision(label.to_string()).into());
                }
                seen.push(label);
            }
        }
        let factors = wires
            .iter()
            .map(|w| transport_vector(&w.from, &w.to))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProcessVector { wires, factors })
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn factors(&self) -> &[LabeledVector] {
        &self.factors
    }

    /// All spaces covered by the wiring.
    pub fn spaces(&self) -> Vec<Space> {
        self.wires
            .iter()
            .flat_map(|w| [w.from.clone(), w.to.clone()])
            .collect()
    }

    /// `‖W‖² = ∏ dims` over the wires, exactly.
    pub fn norm_sq(&self) -> f64 {
        self.wires.iter().map(|w| w.from.dim() as f64).product()
    }

    /// Expand the full tensor product. Use only for small wirings; the
    /// probability rules below never need this.
    pub fn materialize(&self) -> Result<LabeledVector> {
        let amps: usize = self.wires.iter().map(|w| w.from.dim() * w.to.dim()).product();
        if amps > MATERIALIZE_CAP {
            return Err(ProcessError::MaterializeTooLarge { amps });
        }
        let mut v = LabeledVector::scalar(C64::ONE);
        for f in &self.factors {
            v = v.tensor(f)?;
        }
        Ok(v)
    }
}

/// The CJ data of one gate, conditioned on its classical inputs and
/// declared outcomes.
#[derive(Debug, Clone)]
pub struct InstrumentCJ {
    pub gate: String,
    pub form: CjForm,
    /// Classical inputs this instrument was conditioned on (name, value).
    pub inputs: Vec<(String, u8)>,
    /// Measurement outcomes this instrument post-selects (name, value).
    pub outcomes: Vec<(String, u8)>,
}

#[derive(Debug, Clone)]
pub enum CjForm {
    /// CJ vector of a pure (linear) instrument.
    Vector(LabeledVector),
    /// CJ matrix of a general channel on input ⊗ output space.
    Matrix(LabeledOperator),
}

impl InstrumentCJ {
    pub fn pure(gate: impl Into<String>, cj: LabeledVector) -> Self {
        InstrumentCJ {
            gate: gate.into(),
            form: CjForm::Vector(cj),
            inputs: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn with_input(mut self, name: impl Into<String>, value: u8) -> Self {
        self.inputs.push((name.into(), value));
        self
    }

    pub fn with_outcome(mut self, name: impl Into<String>, value: u8) -> Self {
        self.outcomes.push((name.into(), value));
        self
    }

    pub fn vector(&self) -> Option<&LabeledVector> {
        match &self.form {
            CjForm::Vector(v) => Some(v),
            CjForm::Matrix(_) => None,
        }
    }
}

fn check_coverage(gate_spaces: &[Vec<Space>], w: &ProcessVector) -> Result<()> {
    let mut needed: Vec<(String, usize)> = w
        .spaces()
        .iter()
        .map(|s| (s.label().to_string(), s.dim()))
        .collect();
    needed.sort();
    let mut provided: Vec<(String, usize)> = gate_spaces
        .iter()
        .flatten()
        .map(|s| (s.label().to_string(), s.dim()))
        .collect();
    provided.sort();
    if needed != provided {
        let missing: Vec<_> = needed
            .iter()
            .filter(|x| !provided.contains(x))
            .map(|(l, _)| l.clone())
            .collect();
        let extra: Vec<_> = provided
            .iter()
            .filter(|x| !needed.contains(x))
            .map(|(l, _)| l.clone())
            .collect();
        return Err(ProcessError::Coverage(format!(
            "missing {missing:?}, extra {extra:?}"
        )));
    }
    Ok(())
}

/// Incremental contraction of gate CJ vectors against a factored process
/// vector. Wire factors are absorbed lazily, so intermediates stay small
/// when gates are contracted in causal order.
#[derive(Debug, Clone)]
pub struct Contraction {
    current: LabeledVector,
    pending: Vec<LabeledVector>,
}

impl Contraction {
    pub fn new(w: &ProcessVector) -> Self {
        Contraction {
            current: LabeledVector::scalar(C64::ONE),
            pending: w.factors().to_vec(),
        }
    }

    /// Absorb every pending wire factor sharing a label with `cj`, then
    /// take the partial inner product with `cj` as the bra.
    pub fn contract_gate(&mut self, cj: &LabeledVector) -> Result<()> {
        let labels: Vec<&str> = cj.spaces().iter().map(Space::label).collect();
        let mut i = 0;
        while i < self.pending.len() {
            let touches = self.pending[i]
                .spaces()
                .iter()
                .any(|s| labels.contains(&s.label()));
            if touches {
                let factor = self.pending.swap_remove(i);
                self.current = self.current.tensor(&factor)?;
            } else {
                i += 1;
            }
        }
        self.current = partial_inner(cj, &self.current)?;
        Ok(())
    }

    /// The state so far, including the not-yet-touched transport factors.
    pub fn state(&self) -> Result<LabeledVector> {
        let mut v = self.current.clone();
        for f in &self.pending {
            v = v.tensor(f)?;
        }
        Ok(v)
    }

    /// Marginal probability that the given spaces hold anything other
    /// than the all-vacuum configuration, in the normalized current state.
    pub fn occupancy_probability(&self, labels: &[&str]) -> Result<f64> {
        let state = self.state()?;
        let total = state.norm_sq();
        if total == 0.0 {
            return Ok(0.0);
        }
        let positions: Vec<usize> = labels
            .iter()
            .map(|l| {
                state
                    .spaces()
                    .iter()
                    .position(|s| s.label() == *l)
                    .ok_or_else(|| TensorError::LabelMismatch(l.to_string()))
            })
            .collect::<std::result::Result<_, _>>()?;
        let dims: Vec<usize> = state.spaces().iter().map(Space::dim).collect();
        let mut occupied = 0.0;
        let mut digits = vec![0usize; dims.len()];
        for &amp in state.amps() {
            if positions.iter().any(|&p| digits[p] != 0) {
                occupied += amp.norm_sqr();
            }
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(occupied / total)
    }

    /// The final scalar amplitude once every space has been contracted.
    pub fn amplitude(&self) -> Result<C64> {
        if !self.pending.is_empty() {
            return Err(ProcessError::Coverage(format!(
                "{} wire factor(s) left untouched",
                self.pending.len()
            )));
        }
        self.current
            .scalar_value()
            .ok_or_else(|| {
                ProcessError::Coverage(format!(
                    "{} space(s) left uncontracted",
                    self.current.spaces().len()
                ))
            })
    }
}

/// The probability amplitude `(⊗ ⟨⟨gate*|) |W⟩⟩` for pure gates.
pub fn amplitude_from_vectors(gates: &[InstrumentCJ], w: &ProcessVector) -> Result<C64> {
    let gate_spaces: Vec<Vec<Space>> = gates
        .iter()
        .map(|g| match &g.form {
            CjForm::Vector(v) => Ok(v.spaces().to_vec()),
            CjForm::Matrix(_) => Err(ProcessError::Coverage(format!(
                "gate {} is not in vector form",
                g.gate
            ))),
        })
        .collect::<Result<_>>()?;
    check_coverage(&gate_spaces, w)?;
    let mut contraction = Contraction::new(w);
    for g in gates {
        match &g.form {
            CjForm::Vector(v) => contraction.contract_gate(v)?,
            CjForm::Matrix(_) => unreachable!("checked above"),
        }
    }
    contraction.amplitude()
}

/// Born rule in vector form: `‖(⊗ ⟨⟨gate*|)|W⟩⟩‖²`.
pub fn probability_from_vectors(gates: &[InstrumentCJ], w: &ProcessVector) -> Result<f64> {
    Ok(amplitude_from_vectors(gates, w)?.norm_sqr())
}

/// A process matrix, either dense or as the rank-1 projector onto a
/// process vector.
#[derive(Debug, Clone)]
pub enum ProcessMatrix {
    Dense(LabeledOperator),
    /// `W = |w⟩⟩⟨⟨w|` for the given (possibly factored) process vector.
    Pure(ProcessVector),
}

/// Born rule in matrix form: `Tr[(⊗ M_gate) W]`.
pub fn probability_from_matrices(gates: &[InstrumentCJ], w: &ProcessMatrix) -> Result<f64> {
    let gate_ops: Vec<&LabeledOperator> = gates
        .iter()
        .map(|g| match &g.form {
            CjForm::Matrix(m) => Ok(m),
            CjForm::Vector(_) => Err(ProcessError::Coverage(format!(
                "gate {} is not in matrix form",
                g.gate
            ))),
        })
        .collect::<Result<_>>()?;
    match w {
        ProcessMatrix::Pure(pv) => {
            let gate_spaces: Vec<Vec<Space>> = gate_ops
                .iter()
                .map(|m| m.in_spaces().to_vec())
                .collect();
            check_coverage(&gate_spaces, pv)?;
            // Tr[(⊗M)|w⟩⟩⟨⟨w|] = ⟨⟨w|(⊗M)|w⟩⟩, via factored application.
            let v = pv.materialize()?;
            let mut acted = v.clone();
            for m in &gate_ops {
                acted = apply_op(m, &acted)?;
            }
            let val = partial_inner(&v, &acted)?
                .scalar_value()
                .expect("full contraction");
            Ok(val.re)
        }
        ProcessMatrix::Dense(dense) => {
            if dense.in_spaces() != dense.out_spaces() {
                return Err(ProcessError::Shape);
            }
            // Apply each gate matrix on the row side, then take the trace.
            let n = dense.in_dim();
            let mut mat = DMatrix::from_fn(n, n, |r, c| dense.entry(r, c));
            let spaces = dense.in_spaces().to_vec();
            for m in &gate_ops {
                mat = apply_on_rows(m, &mat, &spaces)?;
            }
            let mut trace = C64::ZERO;
            for i in 0..n {
                trace += mat[(i, i)];
            }
            Ok(trace.re)
        }
    }
}

/// Apply `op` to the row (output) indices of `mat`, where rows are indexed
/// row-major by `spaces`. The operator must be an endomorphism of a subset
/// of those spaces.
fn apply_on_rows(
    op: &LabeledOperator,
    mat: &DMatrix<C64>,
    spaces: &[Space],
) -> Result<DMatrix<C64>> {
    if op.in_spaces().len() != op.out_spaces().len() {
        return Err(ProcessError::Shape);
    }
    // Row index = Σ digit_k * stride_k over `spaces`.
    let mut strides = vec![1usize; spaces.len()];
    for i in (0..spaces.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * spaces[i + 1].dim();
    }
    let positions: Vec<usize> = op
        .in_spaces()
        .iter()
        .map(|s| {
            spaces
                .iter()
                .position(|t| t.label() == s.label())
                .ok_or_else(|| TensorError::LabelMismatch(s.label().to_string()))
        })
        .collect::<std::result::Result<_, _>>()?;
    let sub_dims: Vec<usize> = positions.iter().map(|&p| spaces[p].dim()).collect();
    let sub_total: usize = sub_dims.iter().product();
    let n = mat.nrows();
    let mut out = DMatrix::from_element(n, n, C64::ZERO);
    // Enumerate rows by (sub index, rest residue).
    for row in 0..n {
        // Decompose the row into the operator's input flat index.
        let mut sub_flat = 0usize;
        for (k, &p) in positions.iter().enumerate() {
            let digit = (row / strides[p]) % spaces[p].dim();
            sub_flat = sub_flat * sub_dims[k] + digit;
            let _ = k;
        }
        let base = {
            // Row with the operator's subsystems zeroed out.
            let mut b = row;
            for &p in &positions {
                let digit = (row / strides[p]) % spaces[p].dim();
                b -= digit * strides[p];
            }
            b
        };
        for out_flat in 0..sub_total {
            let coeff = op.entry(out_flat, sub_flat);
            if coeff == C64::ZERO {
                continue;
            }
            // Rebuild the target row from the output sub index.
            let mut target = base;
            let mut rem = out_flat;
            for k in (0..positions.len()).rev() {
                let digit = rem % sub_dims[k];
                rem /= sub_dims[k];
                target += digit * strides[positions[k]];
            }
            for c in 0..n {
                out[(target, c)] += coeff * mat[(row, c)];
            }
        }
    }
    Ok(out)
}

/// Result of the process-matrix axiom checks of the positivity and trace
/// conditions. The projector condition is intentionally not implemented.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AxiomReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub trace_value: f64,
    pub expected_trace: f64,
    pub trace_ok: bool,
}

/// Check positivity (via eigenvalues) and the trace condition
/// `Tr W = ∏ dim G_O` against the given gate output dimensions.
pub fn check_process_axioms(
    w: &ProcessMatrix,
    gate_output_dims: &[usize],
    tol: f64,
) -> Result<AxiomReport> {
    let expected_trace: f64 = gate_output_dims.iter().map(|&d| d as f64).product();
    let (min_eigenvalue, scale, trace_value) = match w {
        ProcessMatrix::Pure(pv) => {
            // Eigenvalues of |w⟩⟩⟨⟨w| are {‖w‖², 0, …}.
            let n = pv.norm_sq();
            (0.0_f64.min(n), n.max(1.0), n)
        }
        ProcessMatrix::Dense(dense) => {
            if dense.in_spaces() != dense.out_spaces() {
                return Err(ProcessError::Shape);
            }
            let n = dense.in_dim();
            let mat = DMatrix::from_fn(n, n, |r, c| dense.entry(r, c));
            // Hermitize before the eigensolve; report against the original
            // trace.
            let herm = (mat.clone() + mat.adjoint()) * C64::new(0.5, 0.0);
            let eigs = herm.symmetric_eigenvalues();
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_abs = eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
            let mut trace = C64::ZERO;
            for i in 0..n {
                trace += mat[(i, i)];
            }
            (min, max_abs.max(1.0), trace.re)
        }
    };
    Ok(AxiomReport {
        positive: min_eigenvalue >= -1e-9 * scale,
        min_eigenvalue,
        trace_value,
        expected_trace,
        trace_ok: (trace_value - expected_trace).abs() <= tol * expected_trace.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Space;

    fn sp(label: &str, dim: usize) -> Space {
        Space::new(label, dim).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn transport_vector_examples() {
        let t = transport_vector(&sp("in", 2), &sp("out", 2)).unwrap();
        assert_eq!(t.amps(), &[C64::ONE, C64::ZERO, C64::ZERO, C64::ONE]);
        let t1 = transport_vector(&sp("a", 1), &sp("b", 1)).unwrap();
        assert_eq!(t1.amps(), &[C64::ONE]);
        let t3 = transport_vector(&sp("x", 3), &sp("y", 3)).unwrap();
        assert_eq!(t3.norm_sq(), 3.0);
        assert!(transport_vector(&sp("p", 2), &sp("q", 3)).is_err());
    }

    #[test]
    fn cj_vector_of_identity_is_transport() {
        let gi = sp("G_I", 2);
        let go = sp("G_O", 2);
        let id = LabeledOperator::from_fn(vec![go.clone()], vec![gi.clone()], |r, c_| {
            if r == c_ {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let cj = cj_vector(&id).unwrap();
        let t = transport_vector(&gi, &go).unwrap();
        assert_eq!(cj, t);
    }

    #[test]
    fn cj_vector_of_phase_flip() {
        // A with a=1 = |0⟩⟨0| - |1⟩⟨1| → |0⟩|0⟩ - |1⟩|1⟩ by direct
        // expansion of the CJ definition.
        let gi = sp("A_I", 2);
        let go = sp("A_O", 2);
        let a = LabeledOperator::from_fn(vec![go], vec![gi], |r, c_| {
            if r != c_ {
                C64::ZERO
            } else if r == 1 {
                -C64::ONE
            } else {
                C64::ONE
            }
        })
        .unwrap();
        let cj = cj_vector(&a).unwrap();
        assert_eq!(
            cj.amps(),
            &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE]
        );
    }

    #[test]
    fn cj_vector_conjugates_entries() {
        let gi = sp("G_I", 2);
        let go = sp("G_O", 2);
        let phase = LabeledOperator::from_fn(vec![go], vec![gi], |r, c_| {
            if r != c_ {
                C64::ZERO
            } else if r == 1 {
                c(0.0, 1.0)
            } else {
                C64::ONE
            }
        })
        .unwrap();
        let cj = cj_vector(&phase).unwrap();
        // [I ⊗ op*]|𝟙⟩⟩: the i entry must be conjugated.
        assert_eq!(cj.amp_at(&[("G_I", 1), ("G_O", 1)]).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn cj_matrix_of_unitary_is_outer_product_of_cj_vector() {
        let gi = sp("G_I", 2);
        let go = sp("G_O", 2);
        let h = 1.0 / 2f64.sqrt();
        let had = LabeledOperator::new(
            vec![go.clone()],
            vec![gi.clone()],
            vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        )
        .unwrap();
        let m = cj_matrix(std::slice::from_ref(&had)).unwrap();
        let v = cj_vector(&had).unwrap();
        for r in 0..4 {
            for c_ in 0..4 {
                let expect = v.amps()[r] * v.amps()[c_].conj();
                assert!((m.entry(r, c_) - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cj_matrix_identity_channel_trace() {
        let gi = sp("G_I", 2);
        let go = sp("G_O", 2);
        let id = LabeledOperator::from_fn(vec![go], vec![gi], |r, c_| {
            if r == c_ {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let m = cj_matrix(std::slice::from_ref(&id)).unwrap();
        let trace: C64 = (0..4).map(|i| m.entry(i, i)).sum();
        assert!((trace - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cj_matrix_reset_channel_brute_force() {
        // Kraus {|0⟩⟨0|, |0⟩⟨1|}: brute-force Eq.-style construction of
        // Σ (I⊗K)|𝟙⟩⟩⟨⟨𝟙|(I⊗K)† then transpose, computed here with plain
        // loops as the oracle.
        let gi = sp("G_I", 2);
        let go = sp("G_O", 2);
        let k0 = LabeledOperator::from_fn(vec![go.clone()], vec![gi.clone()], |r, c_| {
            if r == 0 && c_ == 0 {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let k1 = LabeledOperator::from_fn(vec![go.clone()], vec![gi.clone()], |r, c_| {
            if r == 0 && c_ == 1 {
                C64::ONE
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let m = cj_matrix(&[k0.clone(), k1.clone()]).unwrap();

        let mut oracle = vec![C64::ZERO; 16];
        for term in [&k0, &k1] {
            let mut col = vec![C64::ZERO; 4];
            for i in 0..2 {
                for j in 0..2 {
                    col[i * 2 + j] = term.entry(j, i);
                }
            }
            for r in 0..4 {
                for c_ in 0..4 {
                    // transposed accumulation
                    oracle[c_ * 4 + r] += col[r] * col[c_].conj();
                }
            }
        }
        for (idx, &o) in oracle.iter().enumerate() {
            assert!((m.entries()[idx] - o).norm() < 1e-14);
        }
        let trace: C64 = (0..4).map(|i| m.entry(i, i)).sum();
        assert!((trace - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn wiring_small_cases() {
        let w =
            ProcessVector::from_wiring(vec![Wire::new(sp("a", 2), sp("b", 2))]).unwrap();
        let v = w.materialize().unwrap();
        let t = transport_vector(&sp("a", 2), &sp("b", 2)).unwrap();
        assert_eq!(v, t);

        let shared = ProcessVector::from_wiring(vec![
            Wire::new(sp("a", 2), sp("b", 2)),
            Wire::new(sp("b", 2), sp("c", 2)),
        ]);
        assert!(matches!(
            shared,
            Err(ProcessError::Tensor(TensorError::LabelCollision(_)))
        ));
    }

    #[test]
    fn probability_of_zero_vector_is_zero() {
        // A wire contracted against orthogonal preparations.
        let a = sp("a", 2);
        let b = sp("b", 2);
        let w = ProcessVector::from_wiring(vec![Wire::new(a.clone(), b.clone())]).unwrap();
        let prep = InstrumentCJ::pure("P", LabeledVector::basis_state(&a, 0).unwrap());
        let meas = InstrumentCJ::pure("M", LabeledVector::basis_state(&b, 1).unwrap());
        let p = probability_from_vectors(&[prep, meas], &w).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn coverage_errors() {
        let a = sp("a", 2);
        let b = sp("b", 2);
        let w = ProcessVector::from_wiring(vec![Wire::new(a.clone(), b.clone())]).unwrap();
        let prep = InstrumentCJ::pure("P", LabeledVector::basis_state(&a, 0).unwrap());
        assert!(matches!(
            probability_from_vectors(std::slice::from_ref(&prep), &w),
            Err(ProcessError::Coverage(_))
        ));
        let extra = InstrumentCJ::pure(
            "X",
            LabeledVector::basis_state(&sp("z", 2), 0).unwrap(),
        );
        let meas = InstrumentCJ::pure("M", LabeledVector::basis_state(&b, 1).unwrap());
        assert!(matches!(
            probability_from_vectors(&[prep, meas, extra], &w),
            Err(ProcessError::Coverage(_))
        ));
    }

    #[test]
    fn axioms_negative_identity_not_positive() {
        let s = sp("g", 2);
        let neg = LabeledOperator::from_fn(vec![s.clone()], vec![s], |r, c_| {
            if r == c_ {
                -C64::ONE
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let report =
            check_process_axioms(&ProcessMatrix::Dense(neg), &[2], 1e-10).unwrap();
        assert!(!report.positive);
    }

    #[test]
    fn axioms_wrong_trace_flagged() {
        let s = sp("g", 2);
        let half = LabeledOperator::from_fn(vec![s.clone()], vec![s], |r, c_| {
            if r == c_ {
                c(0.5, 0.0)
            } else {
                C64::ZERO
            }
        })
        .unwrap();
        let report =
            check_process_axioms(&ProcessMatrix::Dense(half), &[2], 1e-10).unwrap();
        assert!(report.positive);
        assert!(!report.trace_ok);
        assert!((report.trace_value - 1.0).abs() < 1e-14);
    }
}
