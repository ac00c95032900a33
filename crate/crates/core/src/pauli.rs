//! Phase-exact algebra of n-qubit Pauli words in the X-before-Z normal form,
//! Pauli-basis expansion of dense operators, and Clifford conjugation.
//!
//! A word is `phase · X^l Z^k` with `l`, `k` bit-vectors over the register.
//! Multiplication stays in integer arithmetic: the only phase bookkeeping is
//! the commutation rule `Z^k X^l = (-1)^{k·l} X^l Z^k`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Phase factor from the group {+1, +i, -1, -i}, stored as the exponent of i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_i_exponent(e: u8) -> Self {
        Phase(e % 4)
    }

    pub fn i_exponent(self) -> u8 {
        self.0
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    /// Snap a complex number of unit modulus to the nearest group element.
    pub fn from_complex(z: Complex64, tol: f64) -> Option<Phase> {
        for e in 0..4u8 {
            if (z - Phase(e).value()).norm() <= tol {
                return Some(Phase(e));
            }
        }
        None
    }
}

/// Phase-tracked n-qubit Pauli word `phase · X^l Z^k`.
///
/// Bit i of a mask refers to the qubit whose basis-index bit is i, i.e.
/// qubit q of an n-qubit register owns bit `n-1-q`. With that convention
/// `X^l Z^k |j> = (-1)^{k·j} |j xor l>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x_bits: u64,
    z_bits: u64,
    phase: Phase,
}

impl PauliString {
    pub fn new(n: usize, x_bits: u64, z_bits: u64, phase: Phase) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::Dimension(format!("unsupported qubit count {n}")));
        }
        let mask = (1u64 << n) - 1;
        if x_bits & !mask != 0 || z_bits & !mask != 0 {
            return Err(Error::Dimension("bit-vector longer than register".into()));
        }
        Ok(Self { n, x_bits, z_bits, phase })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, x_bits: 0, z_bits: 0, phase: Phase::ONE }
    }

    /// Single-qubit X/Y/Z embedded on `qubit` of an n-qubit register.
    pub fn x(n: usize, qubit: usize) -> Self {
        Self { n, x_bits: qubit_mask(n, qubit), z_bits: 0, phase: Phase::ONE }
    }

    pub fn z(n: usize, qubit: usize) -> Self {
        Self { n, x_bits: 0, z_bits: qubit_mask(n, qubit), phase: Phase::ONE }
    }

    /// Y = i·XZ.
    pub fn y(n: usize, qubit: usize) -> Self {
        let m = qubit_mask(n, qubit);
        Self { n, x_bits: m, z_bits: m, phase: Phase::I }
    }

    /// Build from per-qubit letters, e.g. `from_letters("XZ")` = X⊗Z.
    pub fn from_letters(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut x_bits = 0u64;
        let mut z_bits = 0u64;
        let mut phase = Phase::ONE;
        for (q, ch) in s.chars().enumerate() {
            let m = 1u64 << (n - 1 - q);
            match ch {
                'I' => {}
                'X' => x_bits |= m,
                'Z' => z_bits |= m,
                'Y' => {
                    x_bits |= m;
                    z_bits |= m;
                    phase = phase.mul(Phase::I);
                }
                _ => return Err(Error::InvalidParameter(format!("unknown Pauli letter {ch}"))),
            }
        }
        Self::new(n, x_bits, z_bits, phase)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x_bits
    }

    pub fn z_bits(&self) -> u64 {
        self.z_bits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn is_identity_word(&self) -> bool {
        self.x_bits == 0 && self.z_bits == 0
    }

    /// Hermitian adjoint: (φ X^l Z^k)† = φ* (-1)^{l·k} X^l Z^k.
    pub fn adjoint(&self) -> Self {
        let sign = ((self.x_bits & self.z_bits).count_ones() % 2) as u8;
        Self {
            n: self.n,
            x_bits: self.x_bits,
            z_bits: self.z_bits,
            phase: self.phase.conj().mul(Phase::from_i_exponent(2 * sign)),
        }
    }

    /// Embed on the listed qubits of a larger register (identity elsewhere).
    pub fn embed(&self, n_total: usize, targets: &[usize]) -> Result<Self> {
        if targets.len() != self.n {
            return Err(Error::Dimension("target list does not match word arity".into()));
        }
        let mut x_bits = 0u64;
        let mut z_bits = 0u64;
        for (i, &q) in targets.iter().enumerate() {
            if q >= n_total {
                return Err(Error::Dimension(format!("target {q} out of range")));
            }
            let local = 1u64 << (self.n - 1 - i);
            let global = 1u64 << (n_total - 1 - q);
            if self.x_bits & local != 0 {
                x_bits |= global;
            }
            if self.z_bits & local != 0 {
                z_bits |= global;
            }
        }
        PauliString::new(n_total, x_bits, z_bits, self.phase)
    }

    /// Dense 2^n × 2^n matrix of the word.
    pub fn dense(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        let ph = self.phase.value();
        for j in 0..dim as u64 {
            let sign = if (self.z_bits & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[((j ^ self.x_bits) as usize, j as usize)] = ph * sign;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.i_exponent() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            let m = 1u64 << (self.n - 1 - q);
            let ch = match (self.x_bits & m != 0, self.z_bits & m != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                // XZ on one qubit prints as its own symbol to keep the
                // X-before-Z normal form visible.
                (true, true) => 'W',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

fn qubit_mask(n: usize, qubit: usize) -> u64 {
    assert!(qubit < n, "qubit index out of range");
    1u64 << (n - 1 - qubit)
}

/// Normal-form product with the phase (-1)^{k_a · l_b} absorbed.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n != b.n {
        return Err(Error::Dimension(format!(
            "pauli product of words over {} and {} qubits",
            a.n, b.n
        )));
    }
    let swap_sign = ((a.z_bits & b.x_bits).count_ones() % 2) as u8;
    let phase = a
        .phase
        .mul(b.phase)
        .mul(Phase::from_i_exponent(2 * swap_sign));
    PauliString::new(a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, phase)
}

/// Expansion of a dense operator over the X^l Z^k basis.
#[derive(Clone, Debug)]
pub struct PauliExpansion {
    n: usize,
    coeffs: BTreeMap<(u64, u64), Complex64>,
}

impl PauliExpansion {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, x_bits: u64, z_bits: u64) -> Complex64 {
        self.coeffs
            .get(&(x_bits, z_bits))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &BTreeMap<(u64, u64), Complex64> {
        &self.coeffs
    }

    pub fn reconstruct(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (&(l, k), &coef) in &self.coeffs {
            let p = PauliString::new(self.n, l, k, Phase::ONE).expect("valid word");
            m += p.dense() * coef;
        }
        m
    }
}

/// Coefficients via the trace-orthogonality inner product
/// coeff(l,k) = Tr[(X^l Z^k)† op] / 2^n.
pub fn pauli_expand(op: &CMat, n: usize) -> Result<PauliExpansion> {
    let dim = 1usize << n;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut coeffs = BTreeMap::new();
    for l in 0..dim as u64 {
        for k in 0..dim as u64 {
            // Tr[(X^l Z^k)† op] = Σ_j (-1)^{k·j} <j| op |j^l> conjugated
            // appropriately; derive from (X^l Z^k)|j> = (-1)^{k·j} |j^l>.
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim as u64 {
                let sign = if (k & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                acc += op[((j ^ l) as usize, j as usize)] * sign;
            }
            let coef = acc / dim as f64;
            if coef.norm() > 1e-15 {
                coeffs.insert((l, k), coef);
            }
        }
    }
    Ok(PauliExpansion { n, coeffs })
}

/// Does `c` normalize the Pauli group? Checked on the 2n generators.
pub fn is_clifford(c: &CMat, n: usize, tol: f64) -> bool {
    if c.nrows() != (1 << n) || c.ncols() != (1 << n) || !linalg::is_unitary(c, 1e-10) {
        return false;
    }
    for q in 0..n {
        for gen in [PauliString::x(n, q), PauliString::z(n, q)] {
            if conjugate_to_pauli(c, &gen, tol).is_none() {
                return false;
            }
        }
    }
    true
}

fn conjugate_to_pauli(c: &CMat, p: &PauliString, tol: f64) -> Option<PauliString> {
    let image = c * p.dense() * c.adjoint();
    let expansion = pauli_expand(&image, p.n()).ok()?;
    let mut found: Option<PauliString> = None;
    for (&(l, k), &coef) in expansion.coeffs() {
        if coef.norm() <= tol {
            continue;
        }
        if found.is_some() {
            return None;
        }
        let phase = Phase::from_complex(coef, tol)?;
        found = Some(PauliString::new(p.n(), l, k, phase).ok()?);
    }
    found
}

/// Exact conjugation q = c · p · c† for a Clifford unitary `c`.
pub fn clifford_conjugate(c: &CMat, p: &PauliString) -> Result<PauliString> {
    let n = p.n();
    if c.nrows() != (1 << n) || c.ncols() != (1 << n) {
        return Err(Error::Dimension(format!(
            "unitary is {}x{}, word has {n} qubits",
            c.nrows(),
            c.ncols()
        )));
    }
    linalg::require_unitary(c, 1e-10, "clifford conjugation input")?;
    if !is_clifford(c, n, 1e-10) {
        return Err(Error::NotClifford(
            "a Pauli generator is not mapped to a Pauli word".into(),
        ));
    }
    conjugate_to_pauli(c, p, 1e-10).ok_or_else(|| {
        Error::NotClifford("image of the word is not a single Pauli".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cr, max_abs_diff};
    use crate::rng::RngStream;

    fn dense_exact(p: &PauliString) -> CMat {
        p.dense()
    }

    #[test]
    fn identity_is_neutral() {
        let x = PauliString::from_letters("XI").unwrap();
        let id = PauliString::identity(2);
        let prod = pauli_mul(&x, &id).unwrap();
        assert_eq!(prod, x);
        assert_eq!(pauli_mul(&id, &x).unwrap(), x);
    }

    #[test]
    fn zx_anticommutes() {
        let z = PauliString::from_letters("Z").unwrap();
        let x = PauliString::from_letters("X").unwrap();
        let zx = pauli_mul(&z, &x).unwrap();
        // ZX = -XZ: normal form X-before-Z with phase -1.
        assert_eq!(zx.phase(), Phase::MINUS_ONE);
        assert_eq!(zx.x_bits(), 1);
        assert_eq!(zx.z_bits(), 1);
        assert!(max_abs_diff(&zx.dense(), &(z.dense() * x.dense())) < 1e-12);
    }

    #[test]
    fn xz_squared_is_minus_identity() {
        let w = PauliString::new(1, 1, 1, Phase::ONE).unwrap(); // XZ
        let sq = pauli_mul(&w, &w).unwrap();
        assert!(sq.is_identity_word());
        assert_eq!(sq.phase(), Phase::MINUS_ONE);
        let oracle = w.dense() * w.dense();
        assert!(max_abs_diff(&sq.dense(), &oracle) < 1e-12);
    }

    #[test]
    fn product_matches_dense_exhaustively_one_qubit() {
        for xa in 0..2u64 {
            for za in 0..2u64 {
                for xb in 0..2u64 {
                    for zb in 0..2u64 {
                        for pa in 0..4u8 {
                            let a = PauliString::new(1, xa, za, Phase::from_i_exponent(pa)).unwrap();
                            let b = PauliString::new(1, xb, zb, Phase::ONE).unwrap();
                            let prod = pauli_mul(&a, &b).unwrap();
                            let oracle = dense_exact(&a) * dense_exact(&b);
                            assert!(max_abs_diff(&prod.dense(), &oracle) < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_matches_dense_random_three_qubits() {
        use rand::Rng;
        let mut rng = RngStream::from_seed(42).rng();
        for _ in 0..200 {
            let n = rng.random_range(1..=3usize);
            let mask = (1u64 << n) - 1;
            let a = PauliString::new(
                n,
                rng.random::<u64>() & mask,
                rng.random::<u64>() & mask,
                Phase::from_i_exponent(rng.random_range(0..4)),
            )
            .unwrap();
            let b = PauliString::new(
                n,
                rng.random::<u64>() & mask,
                rng.random::<u64>() & mask,
                Phase::from_i_exponent(rng.random_range(0..4)),
            )
            .unwrap();
            let prod = pauli_mul(&a, &b).unwrap();
            assert!(max_abs_diff(&prod.dense(), &(a.dense() * b.dense())) < 1e-12);
        }
    }

    #[test]
    fn mul_is_associative() {
        use rand::Rng;
        let mut rng = RngStream::from_seed(9).rng();
        for _ in 0..100 {
            let n = 2;
            let mask = 3u64;
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                PauliString::new(
                    n,
                    rng.random::<u64>() & mask,
                    rng.random::<u64>() & mask,
                    Phase::from_i_exponent(rng.random_range(0..4)),
                )
                .unwrap()
            };
            let (a, b, c) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            let left = pauli_mul(&pauli_mul(&a, &b).unwrap(), &c).unwrap();
            let right = pauli_mul(&a, &pauli_mul(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = PauliString::identity(1);
        let b = PauliString::identity(2);
        assert!(matches!(pauli_mul(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn expand_identity() {
        let e = pauli_expand(&linalg::identity(2), 1).unwrap();
        assert_eq!(e.coeffs().len(), 1);
        assert!((e.coeff(0, 0) - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn expand_zero_projector() {
        let mut p0 = CMat::zeros(2, 2);
        p0[(0, 0)] = cr(1.0);
        let e = pauli_expand(&p0, 1).unwrap();
        assert!((e.coeff(0, 0) - cr(0.5)).norm() < 1e-12);
        assert!((e.coeff(0, 1) - cr(0.5)).norm() < 1e-12);
        assert_eq!(e.coeffs().len(), 2);
    }

    #[test]
    fn expand_bell_pair() {
        // |Φ+><Φ+| = (1/4) Σ_{l,k} X^l Z^k ⊗ X^l Z^k on qubits (A,B).
        let mut phi = CMat::zeros(4, 4);
        for (a, b) in [(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            phi[(a, b)] = cr(0.5);
        }
        let e = pauli_expand(&phi, 2).unwrap();
        for l in 0..2u64 {
            for k in 0..2u64 {
                let bits_x = l << 1 | l;
                let bits_z = k << 1 | k;
                assert!(
                    (e.coeff(bits_x, bits_z) - cr(0.25)).norm() < 1e-12,
                    "coefficient at l={l} k={k}"
                );
            }
        }
        assert_eq!(e.coeffs().len(), 4);
        assert!(max_abs_diff(&e.reconstruct(), &phi) < 1e-12);
    }

    #[test]
    fn expand_round_trips_random_hermitian() {
        for n in 1..=3usize {
            let h = linalg::random_hermitian(1 << n, &RngStream::from_seed(100 + n as u64));
            let e = pauli_expand(&h, n).unwrap();
            assert!(max_abs_diff(&e.reconstruct(), &h) < 1e-12);
        }
    }

    #[test]
    fn expand_rejects_bad_dimension() {
        let m = CMat::zeros(3, 3);
        assert!(matches!(pauli_expand(&m, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn hadamard_exchanges_x_and_z() {
        let h = crate::circuit::gate_matrix_h();
        let q = clifford_conjugate(&h, &PauliString::from_letters("X").unwrap()).unwrap();
        assert_eq!(q, PauliString::from_letters("Z").unwrap());
    }

    #[test]
    fn cnot_propagates_control_x() {
        let cx = crate::circuit::gate_matrix_cnot();
        let q = clifford_conjugate(&cx, &PauliString::from_letters("XI").unwrap()).unwrap();
        let oracle = cx.clone() * PauliString::from_letters("XI").unwrap().dense() * cx.adjoint();
        assert!(max_abs_diff(&q.dense(), &oracle) < 1e-10);
        assert_eq!(q, PauliString::from_letters("XX").unwrap());
    }

    #[test]
    fn s_turns_x_into_y() {
        let s = crate::circuit::gate_matrix_s();
        let q = clifford_conjugate(&s, &PauliString::from_letters("X").unwrap()).unwrap();
        // S X S† = Y = +i XZ.
        assert_eq!(q.x_bits(), 1);
        assert_eq!(q.z_bits(), 1);
        assert_eq!(q.phase(), Phase::I);
        let oracle = s.clone() * PauliString::from_letters("X").unwrap().dense() * s.adjoint();
        assert!(max_abs_diff(&q.dense(), &oracle) < 1e-10);
    }

    #[test]
    fn t_gate_is_not_clifford() {
        let t = crate::circuit::gate_matrix_t();
        let err = clifford_conjugate(&t, &PauliString::from_letters("X").unwrap());
        assert!(matches!(err, Err(Error::NotClifford(_))));
    }

    #[test]
    fn random_two_qubit_cliffords_agree_with_dense_conjugation() {
        use rand::Rng;
        let mut rng = RngStream::from_seed(77).rng();
        let h = crate::circuit::gate_matrix_h();
        let s = crate::circuit::gate_matrix_s();
        let id2 = linalg::identity(2);
        let cx = crate::circuit::gate_matrix_cnot();
        for _ in 0..25 {
            // Random word in the generators {H_0, H_1, S_0, S_1, CNOT}.
            let mut c = linalg::identity(4);
            for _ in 0..rng.random_range(1..8) {
                let g = match rng.random_range(0..5) {
                    0 => linalg::kron(&h, &id2),
                    1 => linalg::kron(&id2, &h),
                    2 => linalg::kron(&s, &id2),
                    3 => linalg::kron(&id2, &s),
                    _ => cx.clone(),
                };
                c = g * c;
            }
            let mask = 3u64;
            let p = PauliString::new(
                2,
                rng.random::<u64>() & mask,
                rng.random::<u64>() & mask,
                Phase::ONE,
            )
            .unwrap();
            let q = clifford_conjugate(&c, &p).unwrap();
            let oracle = &c * p.dense() * c.adjoint();
            assert!(max_abs_diff(&q.dense(), &oracle) < 1e-10);
        }
    }
}
