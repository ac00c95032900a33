//! CPTP channel constructors and algebra: depolarizing, Pauli, non-unital
//! Pauli, thermal relaxation, measurement noise, plus Pauli-transfer
//! coefficient extraction and commutation through Clifford unitaries.

use once_cell::sync::OnceCell;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::pauli::{clifford_conjugate, is_clifford, pauli_expand, PauliString, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    Depolarizing,
    Pauli,
    NonunitalPauli,
    Unitary,
    Thermal,
    General,
}

#[derive(Clone, Debug)]
enum Repr {
    /// ρ ↦ Σ p_t P_t ρ P_t†, phases normalized away.
    PauliMix(Vec<(PauliString, f64)>),
    /// ρ ↦ p ρ + (1-p) 1/2^arity ⊗ Tr ρ.
    Depolarizing(f64),
    /// Explicit Kraus set.
    Kraus(Vec<CMat>),
    /// Tensor product of one-qubit channels, applied factor by factor.
    Product(Vec<Channel>),
}

/// Borrowed view used by the simulator's dispatch.
pub enum FastRepr<'a> {
    PauliMix(&'a [(PauliString, f64)]),
    Depolarizing(f64),
    Kraus(&'a [CMat]),
}

/// Diagonal (c) and identity-image (d) Pauli-transfer coefficients,
/// indexed by `(l << arity) | k`.
#[derive(Clone, Debug)]
pub struct TransferData {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    /// Largest off-diagonal residue seen when extracting c from a dense
    /// representation; zero for structurally diagonal constructions.
    pub max_cross: f64,
}

#[derive(Clone, Debug)]
pub struct Channel {
    arity: usize,
    kind: ChannelKind,
    repr: Repr,
    strict: bool,
    transfer: OnceCell<TransferData>,
}

impl Channel {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// True when the construction validated all transfer coefficients c ≥ 0.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn pauli_terms(&self) -> Option<&[(PauliString, f64)]> {
        match &self.repr {
            Repr::PauliMix(terms) => Some(terms),
            _ => None,
        }
    }

    pub fn fast_repr(&self) -> FastRepr<'_> {
        match &self.repr {
            Repr::PauliMix(t) => FastRepr::PauliMix(t),
            Repr::Depolarizing(p) => FastRepr::Depolarizing(*p),
            Repr::Kraus(k) => FastRepr::Kraus(k),
            Repr::Product(_) => unreachable!("products dispatch through factors()"),
        }
    }

    /// Factors of a product channel, if this is one.
    pub fn factors(&self) -> Option<&[Channel]> {
        match &self.repr {
            Repr::Product(f) => Some(f),
            _ => None,
        }
    }

    /// Materialized Kraus operators (dense, 2^arity).
    pub fn kraus(&self) -> Vec<CMat> {
        match &self.repr {
            Repr::Kraus(k) => k.clone(),
            Repr::PauliMix(terms) => terms
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(w, p)| w.dense() * cr(p.sqrt()))
                .collect(),
            Repr::Depolarizing(p) => {
                // Uniform non-identity weight (1-p)/4^m on every Pauli word.
                let m = self.arity;
                let dim = 1usize << m;
                let uniform = (1.0 - p) / (dim * dim) as f64;
                let mut out = Vec::new();
                for l in 0..dim as u64 {
                    for k in 0..dim as u64 {
                        let w = PauliString::new(m, l, k, Phase::ONE).expect("word");
                        let weight = if l == 0 && k == 0 { p + uniform } else { uniform };
                        if weight > 0.0 {
                            out.push(w.dense() * cr(weight.sqrt()));
                        }
                    }
                }
                out
            }
            Repr::Product(factors) => {
                let mut acc: Vec<CMat> = vec![linalg::identity(1)];
                for f in factors {
                    let mut next = Vec::new();
                    for a in &acc {
                        for k in f.kraus() {
                            next.push(linalg::kron(a, &k));
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }

    /// Action on a dense operator, E(m) = Σ K m K†.
    pub fn apply_to_dense(&self, m: &CMat) -> CMat {
        match &self.repr {
            Repr::Depolarizing(p) => {
                let dim = m.nrows();
                let tr = linalg::trace(m);
                m * cr(*p) + linalg::identity(dim) * (tr * cr((1.0 - p) / dim as f64))
            }
            _ => {
                let mut out = CMat::zeros(m.nrows(), m.ncols());
                for k in self.kraus() {
                    out += &k * m * k.adjoint();
                }
                out
            }
        }
    }

    pub fn superoperator(&self) -> CMat {
        linalg::kraus_superoperator(&self.kraus())
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let dim = 1usize << self.arity;
        let image = self.apply_to_dense(&linalg::identity(dim));
        linalg::max_abs_diff(&image, &linalg::identity(dim)) <= tol
    }

    /// Transfer data; cached at construction for arity ≤ 2, lazily above.
    pub fn transfer(&self) -> &TransferData {
        self.transfer.get_or_init(|| compute_transfer(self))
    }

    /// Diagonal transfer coefficient c_{l,k}.
    pub fn transfer_coefficient(&self, l: u64, k: u64) -> f64 {
        self.transfer().c[transfer_index(self.arity, l, k)]
    }

    /// Identity-image affine coefficient d_{l,k}.
    pub fn affine_coefficient(&self, l: u64, k: u64) -> f64 {
        self.transfer().d[transfer_index(self.arity, l, k)]
    }

    /// Composition: self first, then `after`.
    pub fn then(&self, after: &Channel) -> Result<Channel> {
        if self.arity != after.arity {
            return Err(Error::Dimension("composition arity mismatch".into()));
        }
        let mut kraus = Vec::new();
        for kb in after.kraus() {
            for ka in self.kraus() {
                let prod = &kb * &ka;
                if linalg::max_abs(&prod) > 1e-14 {
                    kraus.push(prod);
                }
            }
        }
        from_kraus(kraus, self.arity, ChannelKind::General)
    }

    fn cache_transfer_if_small(self) -> Self {
        if self.arity <= 2 {
            let _ = self.transfer();
        }
        self
    }
}

fn transfer_index(arity: usize, l: u64, k: u64) -> usize {
    ((l as usize) << arity) | k as usize
}

fn compute_transfer(ch: &Channel) -> TransferData {
    let m = ch.arity;
    let dim = 1usize << m;
    let size = dim * dim;
    match &ch.repr {
        Repr::Depolarizing(p) => {
            let mut c = vec![*p; size];
            c[0] = 1.0;
            TransferData { c, d: vec![0.0; size], max_cross: 0.0 }
        }
        Repr::PauliMix(terms) => {
            // c_{a,b} = Σ_{l,k} (-1)^{a·k + b·l} p_{l,k}, over the support.
            let mut c = vec![0.0; size];
            for a in 0..dim as u64 {
                for b in 0..dim as u64 {
                    let mut acc = 0.0;
                    for (w, p) in terms {
                        let sign = ((a & w.z_bits()).count_ones() + (b & w.x_bits()).count_ones()) % 2;
                        acc += if sign == 1 { -p } else { *p };
                    }
                    c[transfer_index(m, a, b)] = acc;
                }
            }
            TransferData { c, d: vec![0.0; size], max_cross: 0.0 }
        }
        Repr::Product(factors) => {
            let mut c = vec![1.0; size];
            let mut d = vec![1.0; size];
            for l in 0..dim as u64 {
                for k in 0..dim as u64 {
                    let idx = transfer_index(m, l, k);
                    for (j, f) in factors.iter().enumerate() {
                        let bit = 1u64 << (m - 1 - j);
                        let lj = u64::from(l & bit != 0);
                        let kj = u64::from(k & bit != 0);
                        let t = f.transfer();
                        c[idx] *= t.c[transfer_index(1, lj, kj)];
                        // Identity slots contribute their identity component.
                        d[idx] *= if lj == 0 && kj == 0 {
                            1.0
                        } else {
                            t.d[transfer_index(1, lj, kj)]
                        };
                    }
                }
            }
            d[0] = 0.0;
            let max_cross = factors.iter().map(|f| f.transfer().max_cross).fold(0.0, f64::max);
            TransferData { c, d, max_cross }
        }
        Repr::Kraus(_) => {
            // Dense extraction; only used for small arities.
            let mut c = vec![0.0; size];
            let mut d = vec![0.0; size];
            let mut max_cross = 0.0f64;
            for l in 0..dim as u64 {
                for k in 0..dim as u64 {
                    let word = PauliString::new(m, l, k, Phase::ONE).expect("word");
                    let image = ch.apply_to_dense(&word.dense());
                    let expansion = pauli_expand(&image, m).expect("expansion");
                    let idx = transfer_index(m, l, k);
                    if l == 0 && k == 0 {
                        for (&(gl, gk), &coef) in expansion.coeffs() {
                            if gl == 0 && gk == 0 {
                                c[0] = coef.re;
                            } else {
                                d[transfer_index(m, gl, gk)] = coef.re;
                            }
                        }
                    } else {
                        for (&(gl, gk), &coef) in expansion.coeffs() {
                            if gl == l && gk == k {
                                c[idx] = coef.re;
                                max_cross = max_cross.max(coef.im.abs());
                            } else {
                                max_cross = max_cross.max(coef.norm());
                            }
                        }
                    }
                }
            }
            TransferData { c, d, max_cross }
        }
    }
}

fn validate_kraus_completeness(kraus: &[CMat], dim: usize) -> Result<()> {
    let mut acc = CMat::zeros(dim, dim);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    if linalg::max_abs_diff(&acc, &linalg::identity(dim)) > 1e-10 {
        return Err(Error::InvalidChannel("Kraus set is not trace preserving".into()));
    }
    Ok(())
}

fn validate_choi_psd(kraus: &[CMat], dim: usize) -> Result<()> {
    // Choi matrix Σ_{ij} |i><j| ⊗ E(|i><j|).
    let mut choi = CMat::zeros(dim * dim, dim * dim);
    for k in kraus {
        // vec(K) vec(K)† assembles the same matrix as the |i><j| sum.
        let v = linalg::vectorize(&CMat::from(k.transpose()));
        choi += &v * v.adjoint();
    }
    if linalg::min_eigenvalue(&choi) < -1e-9 {
        return Err(Error::InvalidChannel("Choi matrix has a negative eigenvalue".into()));
    }
    Ok(())
}

fn from_kraus(kraus: Vec<CMat>, arity: usize, kind: ChannelKind) -> Result<Channel> {
    let dim = 1usize << arity;
    for k in &kraus {
        if k.nrows() != dim || k.ncols() != dim {
            return Err(Error::Dimension("Kraus operator dimension mismatch".into()));
        }
    }
    validate_kraus_completeness(&kraus, dim)?;
    validate_choi_psd(&kraus, dim)?;
    Ok(Channel {
        arity,
        kind,
        repr: Repr::Kraus(kraus),
        strict: false,
        transfer: OnceCell::new(),
    }
    .cache_transfer_if_small())
}

/// Definition-1 depolarizing channel: ρ ↦ p ρ + (1-p) 1/2^arity.
pub fn depolarizing(p: f64, arity: usize) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("depolarizing p = {p}")));
    }
    Ok(Channel {
        arity,
        kind: ChannelKind::Depolarizing,
        repr: Repr::Depolarizing(p),
        strict: true,
        transfer: OnceCell::new(),
    }
    .cache_transfer_if_small())
}

/// Probabilistic Pauli mix. With `strict` set the constructor rejects any
/// negative transfer coefficient, which the resilience proofs assume.
pub fn pauli_channel(terms: &[(PauliString, f64)], strict: bool) -> Result<Channel> {
    if terms.is_empty() {
        return Err(Error::InvalidChannel("empty Pauli mix".into()));
    }
    let n = terms[0].0.n();
    let mut sum = 0.0;
    let mut clean: Vec<(PauliString, f64)> = Vec::with_capacity(terms.len());
    for (w, p) in terms {
        if w.n() != n {
            return Err(Error::Dimension("mixed word sizes in Pauli mix".into()));
        }
        if *p < -1e-12 {
            return Err(Error::InvalidProbability(format!("negative weight {p}")));
        }
        sum += p;
        // Phases cancel under conjugation; merge duplicate words.
        let word = w.with_phase(Phase::ONE);
        if let Some(entry) = clean.iter_mut().find(|(v, _)| *v == word) {
            entry.1 += p.max(0.0);
        } else {
            clean.push((word, p.max(0.0)));
        }
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("Pauli mix sums to {sum}")));
    }
    let ch = Channel {
        arity: n,
        kind: ChannelKind::Pauli,
        repr: Repr::PauliMix(clean),
        strict: false,
        transfer: OnceCell::new(),
    };
    let mut ch = ch.cache_transfer_if_small();
    if strict {
        let t = ch.transfer();
        if let Some(&bad) = t.c.iter().find(|&&c| c < -1e-12) {
            return Err(Error::InvalidChannel(format!(
                "transfer coefficient {bad} < 0 under strict Pauli-channel construction"
            )));
        }
        ch.strict = true;
    }
    Ok(ch)
}

/// Conjugation by a fixed unitary as a channel.
pub fn unitary_channel(u: CMat) -> Result<Channel> {
    let dim = u.nrows();
    if !dim.is_power_of_two() || u.ncols() != dim {
        return Err(Error::Dimension("unitary must be square power-of-two".into()));
    }
    linalg::require_unitary(&u, 1e-10, "unitary channel")?;
    let arity = dim.trailing_zeros() as usize;
    Ok(Channel {
        arity,
        kind: ChannelKind::Unitary,
        repr: Repr::Kraus(vec![u]),
        strict: false,
        transfer: OnceCell::new(),
    })
}

/// One-qubit amplitude damping with decay probability γ.
pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidProbability(format!("damping γ = {gamma}")));
    }
    let k0 = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - gamma).sqrt())]);
    let k1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(gamma.sqrt()), cr(0.0), cr(0.0)]);
    let mut ch = from_kraus(vec![k0, k1], 1, ChannelKind::NonunitalPauli)?;
    ch.strict = true;
    Ok(ch)
}

/// One-qubit dephasing: ρ ↦ (1-p) ρ + p Z ρ Z.
pub fn dephasing(p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("dephasing p = {p}")));
    }
    pauli_channel(
        &[
            (PauliString::identity(1), 1.0 - p),
            (PauliString::z(1, 0), p),
        ],
        true,
    )
}

/// Thermal relaxation over `gate_time`: amplitude damping with
/// γ = 1 - e^{-t/T1} composed with enough extra dephasing that the total
/// off-diagonal decay is e^{-t/T2}. Requires T2 ≤ 2·T1.
pub fn thermal_relaxation(t1: f64, t2: f64, gate_time: f64) -> Result<Channel> {
    if t1 <= 0.0 || t2 <= 0.0 || gate_time < 0.0 {
        return Err(Error::InvalidParameter("times must be positive".into()));
    }
    if t2 > 2.0 * t1 {
        return Err(Error::InvalidParameter(format!("T2 = {t2} exceeds 2·T1 = {}", 2.0 * t1)));
    }
    let gamma = 1.0 - (-gate_time / t1).exp();
    // Off-diagonal decay from damping alone is e^{-t/2T1}; top up to e^{-t/T2}.
    let lambda_phi = (-gate_time / t2 + gate_time / (2.0 * t1)).exp();
    let pz = ((1.0 - lambda_phi) / 2.0).clamp(0.0, 1.0);
    let mut ch = amplitude_damping(gamma)?.then(&dephasing(pz)?)?;
    ch.kind = ChannelKind::Thermal;
    Ok(ch)
}

/// Definition-3 channel built as a tensor product of one-qubit channels with
/// diagonal Pauli action (amplitude damping, dephasing, Pauli mixes, or
/// compositions of those).
pub fn nonunital_pauli_from_locals(locals: Vec<Channel>) -> Result<Channel> {
    if locals.is_empty() {
        return Err(Error::InvalidChannel("empty local channel list".into()));
    }
    let m = locals.len();
    for local in &locals {
        if local.arity() != 1 {
            return Err(Error::InvalidChannel("local factors must be one-qubit".into()));
        }
        let t = local.transfer();
        if t.max_cross > 1e-10 {
            return Err(Error::InvalidChannel(
                "local channel does not act diagonally on the Pauli basis".into(),
            ));
        }
        if t.c.iter().any(|&c| c < -1e-12) {
            return Err(Error::InvalidChannel(
                "local channel has a negative diagonal transfer coefficient".into(),
            ));
        }
    }
    let strict = true;
    let ch = Channel {
        arity: m,
        kind: ChannelKind::NonunitalPauli,
        repr: Repr::Product(locals),
        strict,
        transfer: OnceCell::new(),
    };
    Ok(ch.cache_transfer_if_small())
}

/// Lemma-1 commutation: returns Q with W·P(ρ)·W† = Q(W ρ W†) exactly.
pub fn commute_through_clifford(p: &Channel, w: &CMat) -> Result<Channel> {
    let terms = p
        .pauli_terms()
        .ok_or_else(|| Error::InvalidChannel("channel is not a Pauli mix".into()))?;
    if !is_clifford(w, p.arity(), 1e-10) {
        return Err(Error::NotClifford("commutation requires a Clifford unitary".into()));
    }
    let mut conjugated = Vec::with_capacity(terms.len());
    for (word, prob) in terms {
        let q = clifford_conjugate(w, word)?;
        conjugated.push((q.with_phase(Phase::ONE), *prob));
    }
    let mut out = pauli_channel(&conjugated, false)?;
    out.strict = p.strict;
    Ok(out)
}

/// Per-qubit readout confusion rows (p00, p11); Definition-5 noise.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyPovm {
    rows: Vec<(f64, f64)>,
}

impl NoisyPovm {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn ideal(n: usize) -> Self {
        Self { rows: vec![(1.0, 1.0); n] }
    }

    pub fn subset(&self, qubits: &[usize]) -> Result<NoisyPovm> {
        let mut rows = Vec::with_capacity(qubits.len());
        for &q in qubits {
            if q >= self.rows.len() {
                return Err(Error::Dimension(format!("readout row {q} out of range")));
            }
            rows.push(self.rows[q]);
        }
        Ok(NoisyPovm { rows })
    }

    /// Diagonal of the effect operator for outcome string `z` (bit i of `z`
    /// is qubit i's outcome, qubit 0 most significant).
    pub fn effect_diagonal(&self, z: u64) -> Vec<f64> {
        let n = self.rows.len();
        let dim = 1usize << n;
        let mut diag = vec![1.0; dim];
        for (q, &(p00, p11)) in self.rows.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            let zq = (z >> (n - 1 - q)) & 1;
            // p_{z,b}: probability of outcome z given basis state b.
            let (on_zero, on_one) = if zq == 0 { (p00, 1.0 - p11) } else { (1.0 - p00, p11) };
            for b in 0..dim {
                diag[b] *= if b & bit == 0 { on_zero } else { on_one };
            }
        }
        diag
    }

    pub fn effect_matrix(&self, z: u64) -> CMat {
        let diag = self.effect_diagonal(z);
        let dim = diag.len();
        let mut m = CMat::zeros(dim, dim);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        m
    }

    /// §II effective observable for one measured qubit.
    pub fn effective_z(&self, qubit: usize) -> Result<CMat> {
        if qubit >= self.rows.len() {
            return Err(Error::Dimension(format!("qubit {qubit} not measured by this POVM")));
        }
        let (p00, p11) = self.rows[qubit];
        let (p10, p01) = (1.0 - p00, 1.0 - p11);
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cr(p00 - p10);
        m[(1, 1)] = cr(-(p11 - p01));
        Ok(m)
    }
}

/// Definition-5 measurement noise with strict diagonal dominance.
pub fn measurement_noise(rows: &[(f64, f64)]) -> Result<NoisyPovm> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no readout rows".into()));
    }
    for &(p00, p11) in rows {
        if !(0.0..=1.0).contains(&p00) || !(0.0..=1.0).contains(&p11) {
            return Err(Error::InvalidProbability(format!("readout rows ({p00}, {p11})")));
        }
        if p00 <= 1.0 - p11 || p11 <= 1.0 - p00 {
            return Err(Error::InvalidParameter(format!(
                "readout rows ({p00}, {p11}) violate diagonal dominance"
            )));
        }
    }
    Ok(NoisyPovm { rows: rows.to_vec() })
}
