//! Gate sequences: named gates, dense embedding, adjoints, and expansion of
//! two-qubit phase/swap gates into the {one-qubit, CNOT} alphabet.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat};

pub fn gate_matrix_h() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(FRAC_1_SQRT_2), cr(FRAC_1_SQRT_2), cr(FRAC_1_SQRT_2), cr(-FRAC_1_SQRT_2)])
}

pub fn gate_matrix_x() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn gate_matrix_y() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn gate_matrix_z() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

pub fn gate_matrix_s() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)])
}

pub fn gate_matrix_t() -> CMat {
    let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), e])
}

pub fn gate_matrix_rx(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[cr(co), c(0.0, -s), c(0.0, -s), cr(co)])
}

pub fn gate_matrix_ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[cr(co), cr(-s), cr(s), cr(co)])
}

pub fn gate_matrix_rz(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -theta / 2.0),
            cr(0.0),
            cr(0.0),
            Complex64::from_polar(1.0, theta / 2.0),
        ],
    )
}

pub fn gate_matrix_cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = cr(1.0);
    m[(1, 1)] = cr(1.0);
    m[(2, 3)] = cr(1.0);
    m[(3, 2)] = cr(1.0);
    m
}

pub fn gate_matrix_swap() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = cr(1.0);
    m[(1, 2)] = cr(1.0);
    m[(2, 1)] = cr(1.0);
    m[(3, 3)] = cr(1.0);
    m
}

pub fn gate_matrix_cphase(phi: f64) -> CMat {
    let mut m = linalg::identity(4);
    m[(3, 3)] = Complex64::from_polar(1.0, phi);
    m
}

/// e^{-i a3 σy/2} e^{-i a2 σz/2} e^{-i a1 σy/2}: the trainable one-qubit block.
pub fn gate_matrix_rot_yzy(a1: f64, a2: f64, a3: f64) -> CMat {
    gate_matrix_ry(a3) * gate_matrix_rz(a2) * gate_matrix_ry(a1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// Trainable block Ry(a3)·Rz(a2)·Ry(a1).
    RotYzy(f64, f64, f64),
    Cnot,
    Swap,
    CPhase(f64),
    /// Arbitrary dense unitary on `targets.len()` qubits.
    Unitary(CMat),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Swap | Gate::CPhase(_) => 2,
            Gate::Unitary(m) => {
                let dim = m.nrows();
                (usize::BITS - 1 - dim.leading_zeros()) as usize
            }
            _ => 1,
        }
    }

    pub fn matrix(&self) -> CMat {
        match self {
            Gate::H => gate_matrix_h(),
            Gate::X => gate_matrix_x(),
            Gate::Y => gate_matrix_y(),
            Gate::Z => gate_matrix_z(),
            Gate::S => gate_matrix_s(),
            Gate::Sdg => gate_matrix_s().adjoint(),
            Gate::T => gate_matrix_t(),
            Gate::Tdg => gate_matrix_t().adjoint(),
            Gate::Rx(t) => gate_matrix_rx(*t),
            Gate::Ry(t) => gate_matrix_ry(*t),
            Gate::Rz(t) => gate_matrix_rz(*t),
            Gate::RotYzy(a1, a2, a3) => gate_matrix_rot_yzy(*a1, *a2, *a3),
            Gate::Cnot => gate_matrix_cnot(),
            Gate::Swap => gate_matrix_swap(),
            Gate::CPhase(phi) => gate_matrix_cphase(*phi),
            Gate::Unitary(m) => m.clone(),
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::Rx(t) => Gate::Rx(-t),
            Gate::Ry(t) => Gate::Ry(-t),
            Gate::Rz(t) => Gate::Rz(-t),
            Gate::RotYzy(a1, a2, a3) => Gate::RotYzy(-a3, -a2, -a1),
            Gate::CPhase(phi) => Gate::CPhase(-phi),
            Gate::Unitary(m) => Gate::Unitary(CMat::from(m.adjoint())),
            g => g.clone(),
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot)
    }
}

/// One gate bound to concrete target qubits. `slots` carries the parameter
/// slot ids a trainable block was bound from, if any.
#[derive(Clone, Debug)]
pub struct GateOp {
    pub gate: Gate,
    pub targets: Vec<usize>,
    pub slots: Option<[usize; 3]>,
}

impl GateOp {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets, slots: None }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            gate: self.gate.adjoint(),
            targets: self.targets.clone(),
            slots: self.slots,
        }
    }
}

/// Ordered gate list over an n-qubit register; its product defines the
/// unitary the sequence represents.
#[derive(Clone, Debug)]
pub struct GateSequence {
    n: usize,
    ops: Vec<GateOp>,
}

impl GateSequence {
    pub fn new(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    pub fn from_ops(n: usize, ops: Vec<GateOp>) -> Result<Self> {
        let mut seq = Self::new(n);
        for op in ops {
            seq.push_op(op)?;
        }
        Ok(seq)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        self.push_op(GateOp::new(gate, targets.to_vec()))
    }

    pub fn push_op(&mut self, op: GateOp) -> Result<()> {
        if op.targets.len() != op.gate.arity() {
            return Err(Error::Dimension(format!(
                "gate arity {} given {} targets",
                op.gate.arity(),
                op.targets.len()
            )));
        }
        let mut seen = 0u64;
        for &t in &op.targets {
            if t >= self.n {
                return Err(Error::Dimension(format!("target {t} out of range")));
            }
            if seen & (1 << t) != 0 {
                return Err(Error::Dimension("duplicate target qubit".into()));
            }
            seen |= 1 << t;
        }
        if let Gate::Unitary(m) = &op.gate {
            if m.nrows() != m.ncols() || !m.nrows().is_power_of_two() {
                return Err(Error::Dimension("gate matrix must be square power-of-two".into()));
            }
            linalg::require_unitary(m, 1e-10, "gate matrix")?;
        }
        self.ops.push(op);
        Ok(())
    }

    /// Reverse order with each gate adjointed, i.e. the sequence of U†.
    pub fn adjoint(&self) -> GateSequence {
        GateSequence {
            n: self.n,
            ops: self.ops.iter().rev().map(GateOp::adjoint).collect(),
        }
    }

    /// Dense 2^n × 2^n product of the sequence.
    pub fn dense(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut u = linalg::identity(dim);
        for op in &self.ops {
            u = embed(&op.gate.matrix(), self.n, &op.targets) * u;
        }
        u
    }

    /// Replace CPhase and Swap gates by their CNOT decompositions so the
    /// sequence uses only one-qubit gates and CNOTs (up to global phase).
    pub fn expand_to_cnots(&self) -> Result<GateSequence> {
        let mut out = GateSequence::new(self.n);
        for op in &self.ops {
            match (&op.gate, op.targets.as_slice()) {
                (Gate::Swap, [a, b]) => {
                    out.push(Gate::Cnot, &[*a, *b])?;
                    out.push(Gate::Cnot, &[*b, *a])?;
                    out.push(Gate::Cnot, &[*a, *b])?;
                }
                (Gate::CPhase(phi), [ctrl, tgt]) => {
                    out.push(Gate::Rz(phi / 2.0), &[*ctrl])?;
                    out.push(Gate::Rz(phi / 2.0), &[*tgt])?;
                    out.push(Gate::Cnot, &[*ctrl, *tgt])?;
                    out.push(Gate::Rz(-phi / 2.0), &[*tgt])?;
                    out.push(Gate::Cnot, &[*ctrl, *tgt])?;
                }
                (Gate::Cnot, _) => out.push_op(op.clone())?,
                (g, _) if g.arity() == 1 => out.push_op(op.clone())?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "sequence contains a multi-qubit gate with no CNOT expansion".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// True when the sequence is already in the {one-qubit, CNOT} alphabet.
    pub fn is_cnot_dialect(&self) -> bool {
        self.ops
            .iter()
            .all(|op| op.gate.arity() == 1 || matches!(op.gate, Gate::Cnot))
    }
}

/// Embed a 2^k × 2^k gate on the given targets of an n-qubit register.
/// Qubit 0 is the most significant basis-index bit; target order maps the
/// gate's own most significant bit to `targets[0]`.
pub fn embed(gate: &CMat, n: usize, targets: &[usize]) -> CMat {
    let dim = 1usize << n;
    let k = targets.len();
    let kdim = 1usize << k;
    debug_assert_eq!(gate.nrows(), kdim);
    let masks: Vec<usize> = targets.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let joint: usize = masks.iter().sum();
    let mut out = CMat::zeros(dim, dim);
    let local_of = |idx: usize| -> usize {
        let mut l = 0;
        for (i, &m) in masks.iter().enumerate() {
            if idx & m != 0 {
                l |= 1 << (k - 1 - i);
            }
        }
        l
    };
    for col in 0..dim {
        // Row indices reachable from this column differ only on target bits.
        let col_rest = col & !joint;
        let lc = local_of(col);
        for lr in 0..kdim {
            let mut row = col_rest;
            for (i, &m) in masks.iter().enumerate() {
                if lr & (1 << (k - 1 - i)) != 0 {
                    row |= m;
                }
            }
            let amp = gate[(lr, lc)];
            if amp.norm_sqr() != 0.0 {
                out[(row, col)] = amp;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn embedding_matches_kron_for_contiguous_targets() {
        let h = gate_matrix_h();
        let id = linalg::identity(2);
        let lhs = embed(&h, 2, &[0]);
        assert!(max_abs_diff(&lhs, &linalg::kron(&h, &id)) < 1e-14);
        let rhs = embed(&h, 2, &[1]);
        assert!(max_abs_diff(&rhs, &linalg::kron(&id, &h)) < 1e-14);
    }

    #[test]
    fn embedding_handles_reversed_two_qubit_targets() {
        // CNOT with control = qubit 1, target = qubit 0 on a 2-qubit register.
        let cx = gate_matrix_cnot();
        let m = embed(&cx, 2, &[1, 0]);
        // |01> -> |11>, |11> -> |01>.
        assert!((m[(3, 1)] - cr(1.0)).norm() < 1e-14);
        assert!((m[(1, 3)] - cr(1.0)).norm() < 1e-14);
        assert!((m[(0, 0)] - cr(1.0)).norm() < 1e-14);
        assert!((m[(2, 2)] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn sequence_dense_builds_bell_preparation() {
        let mut seq = GateSequence::new(2);
        seq.push(Gate::H, &[0]).unwrap();
        seq.push(Gate::Cnot, &[0, 1]).unwrap();
        let u = seq.dense();
        let col0: Vec<Complex64> = (0..4).map(|i| u[(i, 0)]).collect();
        assert!((col0[0] - cr(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((col0[3] - cr(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!(col0[1].norm() < 1e-12 && col0[2].norm() < 1e-12);
    }

    #[test]
    fn adjoint_reverses_and_inverts() {
        let mut seq = GateSequence::new(2);
        seq.push(Gate::H, &[0]).unwrap();
        seq.push(Gate::T, &[1]).unwrap();
        seq.push(Gate::Cnot, &[0, 1]).unwrap();
        let u = seq.dense();
        let udag = seq.adjoint().dense();
        assert!(max_abs_diff(&(udag * u), &linalg::identity(4)) < 1e-12);
    }

    #[test]
    fn cphase_expansion_matches_up_to_global_phase() {
        let phi = 1.234;
        let mut seq = GateSequence::new(2);
        seq.push(Gate::CPhase(phi), &[0, 1]).unwrap();
        let exact = seq.dense();
        let expanded = seq.expand_to_cnots().unwrap().dense();
        // Compare via the phase-invariant overlap |Tr(A† B)|/dim.
        let overlap = (exact.adjoint() * expanded).trace().norm() / 4.0;
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_expansion_is_exact() {
        let mut seq = GateSequence::new(2);
        seq.push(Gate::Swap, &[0, 1]).unwrap();
        let expanded = seq.expand_to_cnots().unwrap().dense();
        assert!(max_abs_diff(&expanded, &gate_matrix_swap()) < 1e-12);
    }

    #[test]
    fn rejects_duplicate_targets_and_range() {
        let mut seq = GateSequence::new(2);
        assert!(seq.push(Gate::Cnot, &[1, 1]).is_err());
        assert!(seq.push(Gate::H, &[2]).is_err());
    }
}
