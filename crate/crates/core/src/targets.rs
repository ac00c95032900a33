//! Reference three-qubit target circuits: Toffoli, QFT, and W-state
//! preparation. Every constructor is verified against an independent dense
//! oracle in the tests; the gate lists themselves are standard.

use std::f64::consts::PI;

use crate::circuit::{Gate, GateSequence};
use crate::error::Result;

/// Toffoli on (control, control, target) = (0, 1, 2) as the standard
/// six-CNOT, nine-single-qubit-gate decomposition.
pub fn toffoli() -> GateSequence {
    let mut seq = GateSequence::new(3);
    let (c1, c2, t) = (0usize, 1usize, 2usize);
    let ops: [(Gate, Vec<usize>); 15] = [
        (Gate::H, vec![t]),
        (Gate::Cnot, vec![c2, t]),
        (Gate::Tdg, vec![t]),
        (Gate::Cnot, vec![c1, t]),
        (Gate::T, vec![t]),
        (Gate::Cnot, vec![c2, t]),
        (Gate::Tdg, vec![t]),
        (Gate::Cnot, vec![c1, t]),
        (Gate::T, vec![c2]),
        (Gate::T, vec![t]),
        (Gate::H, vec![t]),
        (Gate::Cnot, vec![c1, c2]),
        (Gate::T, vec![c1]),
        (Gate::Tdg, vec![c2]),
        (Gate::Cnot, vec![c1, c2]),
    ];
    for (g, targets) in ops {
        seq.push(g, &targets).expect("static gate list");
    }
    seq
}

/// Textbook quantum Fourier transform with the final qubit-reversal swaps,
/// so the dense matrix equals the DFT F_{jk} = ω^{jk} / √(2^n).
pub fn qft(n: usize) -> Result<GateSequence> {
    if n < 1 {
        return Err(crate::error::Error::InvalidParameter("qft needs n >= 1".into()));
    }
    let mut seq = GateSequence::new(n);
    for i in 0..n {
        seq.push(Gate::H, &[i])?;
        for m in 2..=(n - i) {
            let phi = 2.0 * PI / (1u64 << m) as f64;
            seq.push(Gate::CPhase(phi), &[i + m - 1, i])?;
        }
    }
    for i in 0..n / 2 {
        seq.push(Gate::Swap, &[i, n - 1 - i])?;
    }
    Ok(seq)
}

/// Three-qubit W-state preparation: an excitation on the first qubit is
/// split down the register by two controlled-Ry blocks with angles
/// 2·arccos(√(1/3)) and π/2, each expanded into CNOTs.
pub fn w_state_prep() -> GateSequence {
    let mut seq = GateSequence::new(3);
    let beta1 = 2.0 * (1.0f64 / 3.0).sqrt().acos();
    let beta2 = PI / 2.0;
    seq.push(Gate::X, &[0]).expect("static gate list");
    push_split_block(&mut seq, 0, 1, beta1);
    push_split_block(&mut seq, 1, 2, beta2);
    seq
}

/// |1>|0> -> cos(θ/2)|1>|0> + sin(θ/2)|0>|1>: a controlled-Ry(θ) from `a`
/// to `b` followed by a CNOT from `b` back to `a`.
fn push_split_block(seq: &mut GateSequence, a: usize, b: usize, theta: f64) {
    seq.push(Gate::Ry(theta / 2.0), &[b]).expect("static gate list");
    seq.push(Gate::Cnot, &[a, b]).expect("static gate list");
    seq.push(Gate::Ry(-theta / 2.0), &[b]).expect("static gate list");
    seq.push(Gate::Cnot, &[a, b]).expect("static gate list");
    seq.push(Gate::Cnot, &[b, a]).expect("static gate list");
}
