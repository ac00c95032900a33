//! Dense density-matrix simulation: gate application, Kraus channels,
//! partial trace, POVM probabilities, and seeded shot sampling.
//!
//! Gates are embedded by index permutation rather than by building full
//! register-sized matrices; the optimization loops live or die on this.

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, ZERO};
use crate::pauli::PauliString;
use crate::rng::RngStream;

/// Dense density matrix over an ordered, labelled qubit register.
#[derive(Clone, Debug)]
pub struct DensityState {
    n: usize,
    labels: Vec<String>,
    mat: CMat,
}

impl DensityState {
    /// |0...0><0...0| with default labels q0..q{n-1}.
    pub fn zero(n: usize) -> Self {
        Self::zero_labelled(n, (0..n).map(|i| format!("q{i}")).collect())
    }

    pub fn zero_labelled(n: usize, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), n);
        let dim = 1usize << n;
        let mut mat = CMat::zeros(dim, dim);
        mat[(0, 0)] = cr(1.0);
        Self { n, labels, mat }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            n,
            labels: (0..n).map(|i| format!("q{i}")).collect(),
            mat: linalg::identity(dim) * cr(1.0 / dim as f64),
        }
    }

    pub fn from_matrix(mat: CMat, labels: Vec<String>) -> Result<Self> {
        let dim = mat.nrows();
        if !dim.is_power_of_two() || mat.ncols() != dim {
            return Err(Error::Dimension("density matrix must be square power-of-two".into()));
        }
        let n = dim.trailing_zeros() as usize;
        if labels.len() != n {
            return Err(Error::Dimension("label count does not match qubit count".into()));
        }
        let state = Self { n, labels, mat };
        state.validate(1e-9)?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.mat)
    }

    /// Hermiticity, unit trace, and eigenvalue positivity checks.
    pub fn validate(&self, psd_tol: f64) -> Result<()> {
        if !linalg::is_hermitian(&self.mat, 1e-10) {
            return Err(Error::Numerical("state is not Hermitian".into()));
        }
        if (self.trace().re - 1.0).abs() > 1e-10 || self.trace().im.abs() > 1e-10 {
            return Err(Error::Numerical(format!("state trace {} != 1", self.trace())));
        }
        if linalg::min_eigenvalue(&self.mat) < -psd_tol {
            return Err(Error::Numerical("state has a negative eigenvalue".into()));
        }
        Ok(())
    }

    fn masks_for(&self, targets: &[usize]) -> Result<Vec<usize>> {
        let mut seen = 0u64;
        let mut masks = Vec::with_capacity(targets.len());
        for &q in targets {
            if q >= self.n {
                return Err(Error::Dimension(format!("target qubit {q} out of range")));
            }
            if seen & (1 << q) != 0 {
                return Err(Error::Dimension("duplicate target qubit".into()));
            }
            seen |= 1 << q;
            masks.push(1usize << (self.n - 1 - q));
        }
        Ok(masks)
    }

    /// ρ ← (U ⊗ 1) ρ (U ⊗ 1)† with U embedded on `targets`.
    pub fn apply_unitary(&mut self, u: &CMat, targets: &[usize]) -> Result<()> {
        let kdim = 1usize << targets.len();
        if u.nrows() != kdim || u.ncols() != kdim {
            return Err(Error::Dimension(format!(
                "gate is {}x{} but acts on {} qubits",
                u.nrows(),
                u.ncols(),
                targets.len()
            )));
        }
        linalg::require_unitary(u, 1e-10, "apply_unitary input")?;
        let masks = self.masks_for(targets)?;
        left_mul_embedded(&mut self.mat, u, &masks);
        right_mul_adjoint_embedded(&mut self.mat, u, &masks);
        debug_assert!((self.trace().re - 1.0).abs() < 1e-9);
        Ok(())
    }

    /// ρ ← Σᵢ Kᵢ ρ Kᵢ† with the Kraus set embedded on `targets`.
    pub fn apply_channel(&mut self, ch: &Channel, targets: &[usize]) -> Result<()> {
        if ch.arity() != targets.len() {
            return Err(Error::Dimension(format!(
                "channel arity {} given {} targets",
                ch.arity(),
                targets.len()
            )));
        }
        let masks = self.masks_for(targets)?;
        match ch.fast_repr() {
            crate::channel::FastRepr::PauliMix(terms) => {
                apply_pauli_mix(&mut self.mat, self.n, terms, targets)?;
            }
            crate::channel::FastRepr::Depolarizing(p) => {
                apply_depolarizing(&mut self.mat, p, &masks);
            }
            crate::channel::FastRepr::Kraus(kraus) => {
                apply_kraus(&mut self.mat, kraus, &masks);
            }
        }
        debug_assert!((self.trace().re - 1.0).abs() < 1e-8);
        Ok(())
    }

    /// Conjugate by a phase-tracked Pauli word on the full register.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::Dimension("Pauli word size mismatch".into()));
        }
        apply_pauli_conjugation(&mut self.mat, p);
        Ok(())
    }

    /// Tr[effect · ρ], clamped to [0,1] only within numerical slack.
    pub fn povm_probability(&self, effect: &PovmEffect) -> Result<f64> {
        if effect.matrix.nrows() != self.dim() {
            return Err(Error::Dimension("effect dimension mismatch".into()));
        }
        let mut acc = ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += effect.matrix[(i, j)] * self.mat[(j, i)];
            }
        }
        clamp_probability(acc.re, acc.im)
    }

    /// Tr[diag(d) · ρ] for diagonal effects; the readout fast path.
    pub fn diagonal_probability(&self, diag: &[f64]) -> Result<f64> {
        if diag.len() != self.dim() {
            return Err(Error::Dimension("diagonal effect dimension mismatch".into()));
        }
        let p: f64 = (0..self.dim()).map(|i| diag[i] * self.mat[(i, i)].re).sum();
        clamp_probability(p, 0.0)
    }

    /// Reduced state on `keep`, in the listed order, labels preserved.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityState> {
        if keep.is_empty() {
            return Err(Error::Dimension("keep list must be nonempty".into()));
        }
        let keep_masks = self.masks_for(keep)?;
        let k = keep.len();
        let traced: Vec<usize> = (0..self.n)
            .filter(|q| !keep.contains(q))
            .map(|q| 1usize << (self.n - 1 - q))
            .collect();
        let out_dim = 1usize << k;
        let tdim = 1usize << traced.len();
        let spread = |bits: usize, masks: &[usize], width: usize| -> usize {
            let mut idx = 0;
            for (i, &m) in masks.iter().enumerate() {
                if bits & (1 << (width - 1 - i)) != 0 {
                    idx |= m;
                }
            }
            idx
        };
        let mut out = CMat::zeros(out_dim, out_dim);
        for ro in 0..out_dim {
            let base_r = spread(ro, &keep_masks, k);
            for co in 0..out_dim {
                let base_c = spread(co, &keep_masks, k);
                let mut acc = ZERO;
                for t in 0..tdim {
                    let ext = spread(t, &traced, traced.len());
                    acc += self.mat[(base_r | ext, base_c | ext)];
                }
                out[(ro, co)] = acc;
            }
        }
        Ok(DensityState {
            n: k,
            labels: keep.iter().map(|&q| self.labels[q].clone()).collect(),
            mat: out,
        })
    }
}

fn clamp_probability(re: f64, im: f64) -> Result<f64> {
    if im.abs() > 1e-8 {
        return Err(Error::Numerical(format!("probability has imaginary part {im}")));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&re) {
        return Err(Error::Numerical(format!("probability {re} outside [0,1]")));
    }
    Ok(re.clamp(0.0, 1.0))
}

/// Positive-semidefinite effect operator 0 ≤ E ≤ 1 with an outcome label.
#[derive(Clone, Debug)]
pub struct PovmEffect {
    pub matrix: CMat,
    pub label: String,
}

impl PovmEffect {
    pub fn new(matrix: CMat, label: impl Into<String>) -> Result<Self> {
        if !linalg::is_hermitian(&matrix, 1e-10) {
            return Err(Error::InvalidParameter("effect must be Hermitian".into()));
        }
        let eigs = linalg::hermitian_eigenvalues(&matrix);
        if eigs.iter().any(|&e| e < -1e-10 || e > 1.0 + 1e-10) {
            return Err(Error::InvalidParameter("effect eigenvalues outside [0,1]".into()));
        }
        Ok(Self { matrix, label: label.into() })
    }

    /// Projector onto a computational basis string over n qubits.
    pub fn basis_projector(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = cr(1.0);
        Self { matrix: m, label: format!("{index:0width$b}", width = n) }
    }
}

/// Multinomial draw by conditional binomials; deterministic for a fixed seed.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let mut sum = 0.0;
    for &p in probs {
        if p < -1e-9 {
            return Err(Error::InvalidProbability(format!("negative probability {p}")));
        }
        sum += p.max(0.0);
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("probabilities sum to {sum}")));
    }
    let mut rng = RngStream::from_seed(seed).rng();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut tail = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = (p.max(0.0) / tail).clamp(0.0, 1.0);
        let draw = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q)
                .map_err(|e| Error::Numerical(format!("binomial: {e}")))?
                .sample(&mut rng)
        };
        counts[i] = draw;
        remaining -= draw;
        tail = (tail - p.max(0.0)).max(0.0);
    }
    Ok(counts)
}

/// Frequency of successes in a Bernoulli(p) experiment with `shots` draws.
pub fn sample_frequency(p: f64, shots: u64, stream: &RngStream) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::InvalidProbability(format!("probability {p} outside [0,1]")));
    }
    let p = p.clamp(0.0, 1.0);
    let mut rng = stream.rng();
    let hits = if p <= 0.0 {
        0
    } else if p >= 1.0 {
        shots
    } else {
        Binomial::new(shots, p)
            .map_err(|e| Error::Numerical(format!("binomial: {e}")))?
            .sample(&mut rng)
    };
    Ok(hits as f64 / shots as f64)
}

// ---- low-level kernels ------------------------------------------------

fn spread_table(masks: &[usize]) -> Vec<usize> {
    let k = masks.len();
    let kdim = 1usize << k;
    (0..kdim)
        .map(|l| {
            let mut idx = 0;
            for (i, &m) in masks.iter().enumerate() {
                if l & (1 << (k - 1 - i)) != 0 {
                    idx |= m;
                }
            }
            idx
        })
        .collect()
}

/// mat ← U_emb · mat with U on the qubits given by `masks`.
pub(crate) fn left_mul_embedded(mat: &mut CMat, u: &CMat, masks: &[usize]) {
    let dim = mat.nrows();
    let kdim = 1usize << masks.len();
    let joint: usize = masks.iter().sum();
    let spread = spread_table(masks);
    let data = mat.as_mut_slice();
    let mut buf = vec![ZERO; kdim];
    for col in 0..dim {
        let off = col * dim;
        for base in 0..dim {
            if base & joint != 0 {
                continue;
            }
            for lc in 0..kdim {
                buf[lc] = data[off + (base | spread[lc])];
            }
            for lr in 0..kdim {
                let mut acc = ZERO;
                for lc in 0..kdim {
                    acc += u[(lr, lc)] * buf[lc];
                }
                data[off + (base | spread[lr])] = acc;
            }
        }
    }
}

/// mat ← mat · U_emb† with U on the qubits given by `masks`.
pub(crate) fn right_mul_adjoint_embedded(mat: &mut CMat, u: &CMat, masks: &[usize]) {
    let dim = mat.nrows();
    let kdim = 1usize << masks.len();
    let joint: usize = masks.iter().sum();
    let spread = spread_table(masks);
    let data = mat.as_mut_slice();
    let mut buf = vec![ZERO; kdim];
    for row in 0..dim {
        for base in 0..dim {
            if base & joint != 0 {
                continue;
            }
            for lc in 0..kdim {
                buf[lc] = data[(base | spread[lc]) * dim + row];
            }
            // (ρ U†)[r, c] = Σ_x ρ[r, x] · conj(U[c, x])
            for lc in 0..kdim {
                let mut acc = ZERO;
                for lx in 0..kdim {
                    acc += buf[lx] * u[(lc, lx)].conj();
                }
                data[(base | spread[lc]) * dim + row] = acc;
            }
        }
    }
}

/// ρ ← P ρ P† for a full-register Pauli word, in place.
fn apply_pauli_conjugation(mat: &mut CMat, p: &PauliString) {
    let dim = mat.nrows();
    let l = p.x_bits() as usize;
    let k = p.z_bits() as usize;
    let data = mat.as_mut_slice();
    for col in 0..dim {
        let col2 = col ^ l;
        if col2 < col {
            continue;
        }
        for row in 0..dim {
            let row2 = row ^ l;
            if col2 == col && row2 < row {
                continue;
            }
            let sign = if ((row ^ col) & k).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let a = data[col * dim + row];
            let b = data[col2 * dim + row2];
            data[col2 * dim + row2] = a * sign;
            data[col * dim + row] = b * sign;
        }
    }
}

/// ρ ← Σ_t p_t (P_t ρ P_t†) for a probabilistic Pauli mix on `targets`.
fn apply_pauli_mix(
    mat: &mut CMat,
    n: usize,
    terms: &[(PauliString, f64)],
    targets: &[usize],
) -> Result<()> {
    let dim = mat.nrows();
    let mut out = CMat::zeros(dim, dim);
    {
        let src = mat.as_slice();
        let dst = out.as_mut_slice();
        for (word, prob) in terms {
            let embedded = word.embed(n, targets)?;
            let l = embedded.x_bits() as usize;
            let k = embedded.z_bits() as usize;
            for col in 0..dim {
                let c2 = (col ^ l) * dim;
                for row in 0..dim {
                    let sign = if ((row ^ col) & k).count_ones() % 2 == 1 { -*prob } else { *prob };
                    dst[c2 + (row ^ l)] += src[col * dim + row] * sign;
                }
            }
        }
    }
    *mat = out;
    Ok(())
}

/// ρ ← p ρ + (1-p) · (1/2^k ⊗ Tr_targets ρ) on the target subset.
fn apply_depolarizing(mat: &mut CMat, p: f64, masks: &[usize]) {
    let dim = mat.nrows();
    let joint: usize = masks.iter().sum();
    if joint == dim - 1 {
        // Full register: ρ ← p ρ + (1-p) Tr[ρ]/dim.
        let tr = linalg::trace(mat);
        *mat *= cr(p);
        let add = tr * cr((1.0 - p) / dim as f64);
        for i in 0..dim {
            mat[(i, i)] += add;
        }
        return;
    }
    let kdim = 1usize << masks.len();
    let spread = spread_table(masks);
    // Reduced matrix over the untouched qubits, stored at target-bits = 0.
    let mut reduced = CMat::zeros(dim, dim);
    for col in 0..dim {
        if col & joint != 0 {
            continue;
        }
        for row in 0..dim {
            if row & joint != 0 {
                continue;
            }
            let mut acc = ZERO;
            for &s in &spread {
                acc += mat[(row | s, col | s)];
            }
            reduced[(row, col)] = acc;
        }
    }
    let uniform = cr((1.0 - p) / kdim as f64);
    *mat *= cr(p);
    for col in 0..dim {
        let cres = col & !joint;
        let ct = col & joint;
        for row in 0..dim {
            if row & joint != ct {
                continue;
            }
            mat[(row, col)] += uniform * reduced[(row & !joint, cres)];
        }
    }
}

fn apply_kraus(mat: &mut CMat, kraus: &[CMat], masks: &[usize]) {
    let dim = mat.nrows();
    let mut acc = CMat::zeros(dim, dim);
    for k in kraus {
        let mut term = mat.clone();
        left_mul_embedded(&mut term, k, masks);
        right_mul_adjoint_embedded(&mut term, k, masks);
        acc += term;
    }
    *mat = acc;
}
