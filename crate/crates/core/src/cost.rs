//! The four compiling cost functions and their evaluation circuits.
//!
//! Full-matrix compiling uses a 2n-qubit register A₁..Aₙ B₁..Bₙ: an
//! entangling layer E (Hadamard on each A_j, then CNOT A_j→B_j) prepares
//! maximally entangled pairs, the target U and trainable V† act on A, and
//! either the full register is disentangled and measured (HST) or a single
//! pair is (LHST). Fixed-input compiling acts on n qubits: U then V† on
//! |0...0> with all qubits (LET) or one qubit (LLET) measured. Costs are
//! reported as 1 - fidelity throughout.
//!
//! A [`NoiseSchedule`] inserts channels at the circuit epochs; exact mode
//! reads probabilities off the final density matrix, sampled mode draws
//! binomial counts from them.

use num_complex::Complex64;

use crate::channel::NoisyPovm;
use crate::circuit::{embed, GateOp, GateSequence};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::noise::{GateNoise, NoiseSchedule, Scope};
use crate::rng::RngStream;
use crate::state::{sample_frequency, DensityState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    Hst,
    Lhst,
    Let,
    Llet,
}

impl CostKind {
    pub fn is_full_matrix(self) -> bool {
        matches!(self, CostKind::Hst | CostKind::Lhst)
    }

    pub fn is_local(self) -> bool {
        matches!(self, CostKind::Lhst | CostKind::Llet)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum EvalMode {
    Exact,
    Shots { shots: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug)]
pub struct CostEstimate {
    pub value: f64,
    pub mode: EstimateMode,
    pub shots_used: u64,
    pub std_error: Option<f64>,
}

impl CostEstimate {
    fn exact(value: f64) -> Self {
        Self { value, mode: EstimateMode::Exact, shots_used: 0, std_error: None }
    }
}

/// Evaluation byproducts used by the verifier: the exact fidelity, the
/// product of all full-register depolarizing factors applied, and the mean
/// normalized trace of the measurement effect.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EvalMeta {
    pub depol_weight: f64,
    pub effect_trace_frac: f64,
}

struct EvalCtx<'a> {
    reg: usize,
    n: usize,
    schedule: Option<&'a NoiseSchedule>,
    global_layer: Option<crate::channel::Channel>,
    depol_weight: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum StepClass {
    Entangling,
    Compiled,
}

impl<'a> EvalCtx<'a> {
    fn new(kind: CostKind, n: usize, schedule: Option<&'a NoiseSchedule>) -> Result<Self> {
        let reg = if kind.is_full_matrix() { 2 * n } else { n };
        let global_layer = match schedule {
            Some(s) if s.global_depol_per_step < 1.0 => {
                Some(crate::channel::depolarizing(s.global_depol_per_step, reg)?)
            }
            _ => None,
        };
        Ok(Self { reg, n, schedule, global_layer, depol_weight: 1.0 })
    }

    fn all_qubits(&self) -> Vec<usize> {
        (0..self.reg).collect()
    }

    fn scope_targets(&self, scope: Scope, kind: CostKind) -> Result<Vec<usize>> {
        match (scope, kind.is_full_matrix()) {
            (Scope::Full, _) => Ok(self.all_qubits()),
            (Scope::SystemA, _) => Ok((0..self.n).collect()),
            (Scope::SystemB, true) => Ok((self.n..2 * self.n).collect()),
            (Scope::SystemB, false) => Err(Error::InvalidSchedule(
                "system B does not exist in fixed-input circuits".into(),
            )),
        }
    }

    fn global_layer_step(&mut self, state: &mut DensityState) -> Result<()> {
        if let Some(layer) = &self.global_layer {
            let targets = self.all_qubits();
            state.apply_channel(layer, &targets)?;
            self.depol_weight *= self.schedule.unwrap().global_depol_per_step;
        }
        Ok(())
    }

    fn apply_gate(
        &mut self,
        state: &mut DensityState,
        op: &GateOp,
        class: StepClass,
        kind: CostKind,
    ) -> Result<()> {
        let gate_noise = self.schedule.and_then(|s| s.gate_noise.as_ref());
        if let Some(GateNoise::PauliSandwich { pre, .. }) = gate_noise {
            if class == StepClass::Entangling {
                let t = self.all_qubits();
                state.apply_channel(pre, &t)?;
            }
        }
        state.apply_unitary(&op.gate.matrix(), &op.targets)?;
        match gate_noise {
            Some(GateNoise::PauliSandwich { post, .. }) if class == StepClass::Entangling => {
                let t = self.all_qubits();
                state.apply_channel(post, &t)?;
            }
            Some(GateNoise::HardwareLocal { depol_1q, depol_2q, thermal_1q, thermal_2q }) => {
                let arity = op.targets.len();
                let keep = if arity == 1 { *depol_1q } else { *depol_2q };
                let dep = crate::channel::depolarizing(keep, arity)?;
                state.apply_channel(&dep, &op.targets)?;
                let thermal = if arity == 1 { thermal_1q } else { thermal_2q };
                for &q in &op.targets {
                    state.apply_channel(thermal, &[q])?;
                }
            }
            _ => {}
        }
        if class == StepClass::Compiled {
            if let Some(s) = self.schedule {
                for ch in &s.during_w_a {
                    let t = self.scope_targets(Scope::SystemA, kind)?;
                    state.apply_channel(ch, &t)?;
                }
                for ch in &s.during_w_b {
                    let t = self.scope_targets(Scope::SystemB, kind)?;
                    state.apply_channel(ch, &t)?;
                }
            }
        }
        self.global_layer_step(state)
    }

    fn apply_epoch(
        &mut self,
        state: &mut DensityState,
        placed: &[crate::noise::PlacedChannel],
        kind: CostKind,
    ) -> Result<()> {
        for pc in placed {
            let targets = self.scope_targets(pc.scope, kind)?;
            if pc.channel.kind() == crate::channel::ChannelKind::Depolarizing
                && targets.len() == self.reg
            {
                // Full-register depolarizing counts toward the affine weight.
                if let crate::channel::FastRepr::Depolarizing(p) = pc.channel.fast_repr() {
                    self.depol_weight *= p;
                }
            }
            state.apply_channel(&pc.channel, &targets)?;
        }
        self.global_layer_step(state)?;
        self.validate_state(state)
    }

    fn validate_state(&self, state: &DensityState) -> Result<()> {
        if self.schedule.map(|s| s.validate_states).unwrap_or(false) {
            state.validate(1e-9)?;
        }
        Ok(())
    }
}

fn entangling_ops(n: usize) -> Vec<GateOp> {
    let mut ops = Vec::with_capacity(2 * n);
    for j in 0..n {
        ops.push(GateOp::new(crate::circuit::Gate::H, vec![j]));
    }
    for j in 0..n {
        ops.push(GateOp::new(crate::circuit::Gate::Cnot, vec![j, n + j]));
    }
    ops
}

fn compiled_ops(u: &GateSequence, v: &GateSequence) -> Vec<GateOp> {
    let mut ops: Vec<GateOp> = u.ops().to_vec();
    ops.extend(v.adjoint().ops().iter().cloned());
    ops
}

fn fumc_labels(n: usize) -> Vec<String> {
    (1..=n)
        .map(|j| format!("A{j}"))
        .chain((1..=n).map(|j| format!("B{j}")))
        .collect()
}

fn validate_inputs(
    kind: CostKind,
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
) -> Result<()> {
    if u.n() != v.n() {
        return Err(Error::Dimension(format!(
            "target acts on {} qubits, trainable sequence on {}",
            u.n(),
            v.n()
        )));
    }
    if kind.is_full_matrix() && u.n() > 3 {
        return Err(Error::Dimension("full-matrix costs support at most 3 qubits".into()));
    }
    if let Some(s) = noise {
        if s.n() != u.n() {
            return Err(Error::InvalidSchedule(format!(
                "schedule built for n = {}, circuits have n = {}",
                s.n(),
                u.n()
            )));
        }
        if !kind.is_full_matrix() {
            if !s.tau2.is_empty() {
                return Err(Error::InvalidSchedule(
                    "τ₂ epoch is not present in fixed-input circuits".into(),
                ));
            }
            if !s.during_w_b.is_empty() {
                return Err(Error::InvalidSchedule(
                    "system B does not exist in fixed-input circuits".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Diagonal of the all-zeros readout effect over the full register: ideal
/// projectors on unmeasured qubits are replaced by the identity factor.
fn zero_effect_diag(reg: usize, measured: &[usize], povm: Option<&NoisyPovm>) -> Vec<f64> {
    let dim = 1usize << reg;
    let mut diag = vec![1.0; dim];
    for &q in measured {
        let bit = 1usize << (reg - 1 - q);
        let (on_zero, on_one) = match povm {
            Some(p) => {
                let (p00, p11) = p.rows()[q];
                (p00, 1.0 - p11)
            }
            None => (1.0, 0.0),
        };
        for b in 0..dim {
            diag[b] *= if b & bit == 0 { on_zero } else { on_one };
        }
    }
    diag
}

/// Exact outcome probabilities for one cost evaluation, one entry per local
/// index j (a single entry for the global kinds).
fn exact_fidelities(
    kind: CostKind,
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    j: Option<usize>,
) -> Result<(Vec<f64>, EvalMeta)> {
    validate_inputs(kind, u, v, noise)?;
    let n = u.n();
    let mut ctx = EvalCtx::new(kind, n, noise)?;
    let readout = match noise {
        Some(s) => s.readout_for(ctx.reg)?,
        None => None,
    };
    let js: Vec<usize> = match (kind.is_local(), j) {
        (true, Some(idx)) => {
            if idx >= n {
                return Err(Error::Dimension(format!("local index {idx} out of range")));
            }
            vec![idx]
        }
        (true, None) => (0..n).collect(),
        (false, _) => vec![0],
    };

    let mut state = if kind.is_full_matrix() {
        DensityState::zero_labelled(ctx.reg, fumc_labels(n))
    } else {
        DensityState::zero_labelled(n, (1..=n).map(|j| format!("A{j}")).collect())
    };

    if kind.is_full_matrix() {
        for op in entangling_ops(n) {
            ctx.apply_gate(&mut state, &op, StepClass::Entangling, kind)?;
        }
        ctx.validate_state(&state)?;
    }
    if let Some(s) = noise {
        let tau1 = s.tau1.clone();
        ctx.apply_epoch(&mut state, &tau1, kind)?;
    }
    for op in compiled_ops(u, v) {
        ctx.apply_gate(&mut state, &op, StepClass::Compiled, kind)?;
    }
    ctx.validate_state(&state)?;
    if let Some(s) = noise {
        let tau2 = s.tau2.clone();
        ctx.apply_epoch(&mut state, &tau2, kind)?;
    }

    let mut fids = Vec::with_capacity(js.len());
    let mut effect_trace_frac = 0.0;
    match kind {
        CostKind::Hst => {
            for op in entangling_ops(n).iter().rev() {
                ctx.apply_gate(&mut state, &op.adjoint(), StepClass::Entangling, kind)?;
            }
            ctx.validate_state(&state)?;
            let measured = ctx.all_qubits();
            let diag = zero_effect_diag(ctx.reg, &measured, readout.as_ref());
            effect_trace_frac = diag.iter().sum::<f64>() / (1 << ctx.reg) as f64;
            fids.push(state.diagonal_probability(&diag)?);
        }
        CostKind::Lhst => {
            for &jj in &js {
                let mut branch = state.clone();
                // (E^{(j)})†: CNOT then Hadamard on the single pair.
                let pair = [jj, n + jj];
                let ops = [
                    GateOp::new(crate::circuit::Gate::Cnot, vec![pair[0], pair[1]]),
                    GateOp::new(crate::circuit::Gate::H, vec![pair[0]]),
                ];
                // The branch shares the accumulated depolarizing weight.
                let weight_before = ctx.depol_weight;
                for op in ops {
                    ctx.apply_gate(&mut branch, &op, StepClass::Entangling, kind)?;
                }
                if js.len() > 1 {
                    ctx.depol_weight = weight_before;
                }
                ctx.validate_state(&branch)?;
                let diag = zero_effect_diag(ctx.reg, &pair, readout.as_ref());
                effect_trace_frac += diag.iter().sum::<f64>() / (1 << ctx.reg) as f64;
                fids.push(branch.diagonal_probability(&diag)?);
            }
            effect_trace_frac /= js.len() as f64;
        }
        CostKind::Let => {
            let measured = ctx.all_qubits();
            let diag = zero_effect_diag(ctx.reg, &measured, readout.as_ref());
            effect_trace_frac = diag.iter().sum::<f64>() / (1 << ctx.reg) as f64;
            fids.push(state.diagonal_probability(&diag)?);
        }
        CostKind::Llet => {
            for &jj in &js {
                let diag = zero_effect_diag(ctx.reg, &[jj], readout.as_ref());
                effect_trace_frac += diag.iter().sum::<f64>() / (1 << ctx.reg) as f64;
                fids.push(state.diagonal_probability(&diag)?);
            }
            effect_trace_frac /= js.len() as f64;
        }
    }
    let meta = EvalMeta { depol_weight: ctx.depol_weight, effect_trace_frac };
    Ok((fids, meta))
}

pub(crate) fn evaluate_with_meta(
    kind: CostKind,
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
) -> Result<(f64, EvalMeta)> {
    let (fids, meta) = exact_fidelities(kind, u, v, noise, None)?;
    let f = fids.iter().sum::<f64>() / fids.len() as f64;
    Ok((1.0 - f, meta))
}

fn estimate(
    kind: CostKind,
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
    j: Option<usize>,
) -> Result<CostEstimate> {
    let (fids, _) = exact_fidelities(kind, u, v, noise, j)?;
    match mode {
        EvalMode::Exact => {
            let f = fids.iter().sum::<f64>() / fids.len() as f64;
            Ok(CostEstimate::exact(1.0 - f))
        }
        EvalMode::Shots { shots, seed } => {
            if shots == 0 {
                return Err(Error::InvalidParameter("shots must be >= 1".into()));
            }
            let root = RngStream::from_seed(seed);
            let mut mean = 0.0;
            let mut var = 0.0;
            for (idx, &f) in fids.iter().enumerate() {
                let freq = sample_frequency(f, shots, &root.derive(&[kind as u64, idx as u64]))?;
                mean += freq;
                var += freq * (1.0 - freq) / shots as f64;
            }
            let m = fids.len() as f64;
            mean /= m;
            var /= m * m;
            Ok(CostEstimate {
                value: 1.0 - mean,
                mode: EstimateMode::Sampled,
                shots_used: shots * fids.len() as u64,
                std_error: Some(var.sqrt()),
            })
        }
    }
}

/// Hilbert-Schmidt test cost; noiseless exact value is 1 - |Tr(V†U)|²/d².
pub fn hst_cost(
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
) -> Result<CostEstimate> {
    estimate(CostKind::Hst, u, v, noise, mode, None)
}

/// Local Hilbert-Schmidt test cost, averaged over pairs unless `j` is given.
pub fn lhst_cost(
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
    j: Option<usize>,
) -> Result<CostEstimate> {
    estimate(CostKind::Lhst, u, v, noise, mode, j)
}

/// Loschmidt echo test cost; noiseless exact value is 1 - |<0|V†U|0>|².
pub fn let_cost(
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
) -> Result<CostEstimate> {
    estimate(CostKind::Let, u, v, noise, mode, None)
}

/// Local Loschmidt echo test cost, averaged over qubits unless `j` is given.
pub fn llet_cost(
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
    j: Option<usize>,
) -> Result<CostEstimate> {
    estimate(CostKind::Llet, u, v, noise, mode, j)
}

/// Dispatch by kind with local indices averaged.
pub fn cost(
    kind: CostKind,
    u: &GateSequence,
    v: &GateSequence,
    noise: Option<&NoiseSchedule>,
    mode: EvalMode,
) -> Result<CostEstimate> {
    estimate(kind, u, v, noise, mode, None)
}

/// Convex combination q·a + (1-q)·b with sampled errors combined in
/// quadrature.
pub fn weighted_cost(q: f64, a: &CostEstimate, b: &CostEstimate) -> Result<CostEstimate> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("weight q = {q} outside [0,1]")));
    }
    let std_error = match (a.std_error, b.std_error) {
        (Some(ea), Some(eb)) => Some(((q * ea).powi(2) + ((1.0 - q) * eb).powi(2)).sqrt()),
        (Some(ea), None) => Some(q * ea),
        (None, Some(eb)) => Some((1.0 - q) * eb),
        (None, None) => None,
    };
    let mode = if a.mode == EstimateMode::Sampled || b.mode == EstimateMode::Sampled {
        EstimateMode::Sampled
    } else {
        EstimateMode::Exact
    };
    Ok(CostEstimate {
        value: q * a.value + (1.0 - q) * b.value,
        mode,
        shots_used: a.shots_used + b.shots_used,
        std_error,
    })
}

/// Monte-Carlo average fidelity over Haar-random pure states; returns the
/// estimate and its standard error.
pub fn average_fidelity_detailed(
    u: &GateSequence,
    v: &GateSequence,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    if u.n() != v.n() {
        return Err(Error::Dimension("qubit count mismatch".into()));
    }
    let dim = 1usize << u.n();
    let w = v.dense().adjoint() * u.dense();
    let mut rng = RngStream::from_seed(seed).rng();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..samples {
        let mut norm = 0.0;
        for a in psi.iter_mut() {
            *a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            norm += a.norm_sqr();
        }
        let scale = norm.sqrt();
        let mut overlap = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                acc += w[(r, c)] * psi[c];
            }
            overlap += psi[r].conj() * acc;
        }
        let f = (overlap / (scale * scale)).norm_sqr();
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64;
    Ok((mean, var.sqrt()))
}

pub fn average_fidelity(u: &GateSequence, v: &GateSequence, samples: usize, seed: u64) -> Result<f64> {
    average_fidelity_detailed(u, v, samples, seed).map(|(m, _)| m)
}

/// Effective Hamiltonians whose expectation values reproduce the costs on
/// |ψ(α)> = V|0> (fixed-input kinds) or |χ(α)> = (V ⊗ 1)|Φ> (full-matrix
/// kinds). Ground-state energy is zero with the exact compilations as the
/// ground space.
pub fn effective_hamiltonian(kind: CostKind, u: &GateSequence) -> Result<CMat> {
    let n = u.n();
    if kind.is_full_matrix() && n > 3 {
        return Err(Error::Dimension("full-matrix Hamiltonians support at most 3 qubits".into()));
    }
    let u_dense = u.dense();
    match kind {
        CostKind::Let => {
            let dim = 1usize << n;
            let mut p0 = CMat::zeros(dim, dim);
            p0[(0, 0)] = cr(1.0);
            Ok(linalg::identity(dim) - &u_dense * p0 * u_dense.adjoint())
        }
        CostKind::Llet => {
            let dim = 1usize << n;
            let mut acc = CMat::zeros(dim, dim);
            let mut p0 = CMat::zeros(2, 2);
            p0[(0, 0)] = cr(1.0);
            for j in 0..n {
                acc += embed(&p0, n, &[j]);
            }
            acc /= cr(n as f64);
            Ok(linalg::identity(dim) - &u_dense * acc * u_dense.adjoint())
        }
        CostKind::Hst => {
            let reg = 2 * n;
            let dim = 1usize << reg;
            let phi = bell_projector_full(n);
            let u_emb = embed(&u_dense, reg, &(0..n).collect::<Vec<_>>());
            Ok(linalg::identity(dim) - &u_emb * phi * u_emb.adjoint())
        }
        CostKind::Lhst => {
            let reg = 2 * n;
            let dim = 1usize << reg;
            let pair = bell_pair_projector();
            let mut acc = CMat::zeros(dim, dim);
            for j in 0..n {
                acc += embed(&pair, reg, &[j, n + j]);
            }
            acc /= cr(n as f64);
            let u_emb = embed(&u_dense, reg, &(0..n).collect::<Vec<_>>());
            Ok(linalg::identity(dim) - &u_emb * acc * u_emb.adjoint())
        }
    }
}

/// |Φ+><Φ+| on one (A_j, B_j) pair.
fn bell_pair_projector() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for (a, b) in [(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
        m[(a, b)] = cr(0.5);
    }
    m
}

/// Projector onto E|0...0> over the A₁..Aₙ B₁..Bₙ register.
fn bell_projector_full(n: usize) -> CMat {
    let reg = 2 * n;
    let mut seq = GateSequence::new(reg);
    for op in entangling_ops(n) {
        seq.push_op(op).expect("entangling layer");
    }
    let u = seq.dense();
    let phi = u.column(0).into_owned();
    &phi * phi.adjoint()
}

/// The Choi state |χ> = (V ⊗ 1) E |0...0> used by the Hamiltonian checks.
pub fn choi_state(v: &GateSequence) -> CMat {
    let n = v.n();
    let reg = 2 * n;
    let mut seq = GateSequence::new(reg);
    for op in entangling_ops(n) {
        seq.push_op(op).expect("entangling layer");
    }
    let v_emb = embed(&v.dense(), reg, &(0..n).collect::<Vec<_>>());
    let chi = v_emb * seq.dense().column(0).into_owned();
    &chi * chi.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    fn seq1(gates: &[(Gate, &[usize])], n: usize) -> GateSequence {
        let mut s = GateSequence::new(n);
        for (g, t) in gates {
            s.push(g.clone(), t).unwrap();
        }
        s
    }

    fn random_sequence(n: usize, seed: u64) -> GateSequence {
        let u = linalg::haar_unitary(1 << n, &RngStream::from_seed(seed));
        let mut s = GateSequence::new(n);
        s.push(Gate::Unitary(u), &(0..n).collect::<Vec<_>>()).unwrap();
        s
    }

    #[test]
    fn hst_is_zero_for_equal_sequences() {
        let u = random_sequence(2, 1);
        let c = hst_cost(&u, &u, None, EvalMode::Exact).unwrap();
        assert!(c.value.abs() < 1e-10);
    }

    #[test]
    fn hst_of_traceless_v_is_one() {
        let u = seq1(&[], 1);
        let v = seq1(&[(Gate::Rz(PI), &[0])], 1);
        let c = hst_cost(&u, &v, None, EvalMode::Exact).unwrap();
        assert!((c.value - 1.0).abs() < 1e-10);
        let vx = seq1(&[(Gate::X, &[0])], 1);
        let cx = hst_cost(&u, &vx, None, EvalMode::Exact).unwrap();
        assert!((cx.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hst_matches_trace_formula_on_random_pairs() {
        for n in 1..=3usize {
            let u = random_sequence(n, 10 + n as u64);
            let v = random_sequence(n, 20 + n as u64);
            let d = (1usize << n) as f64;
            let overlap = (v.dense().adjoint() * u.dense()).trace().norm_sqr() / (d * d);
            let c = hst_cost(&u, &v, None, EvalMode::Exact).unwrap();
            assert!((c.value - (1.0 - overlap)).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn lhst_splits_for_single_qubit_flip() {
        let u = seq1(&[], 2);
        let v = seq1(&[(Gate::X, &[0])], 2);
        let f1 = 1.0 - lhst_cost(&u, &v, None, EvalMode::Exact, Some(0)).unwrap().value;
        let f2 = 1.0 - lhst_cost(&u, &v, None, EvalMode::Exact, Some(1)).unwrap().value;
        assert!(f1.abs() < 1e-10);
        assert!((f2 - 1.0).abs() < 1e-10);
        let avg = lhst_cost(&u, &v, None, EvalMode::Exact, None).unwrap();
        assert!((avg.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn lhst_matches_entanglement_fidelity_oracle() {
        // Independent oracle: F^(j) = <Φ+| ρ_pair |Φ+> with ρ_pair the
        // reduced state of (W ⊗ 1)|Φ_2n> on the pair (A_j, B_j).
        for seed in [3u64, 4, 5] {
            let n = 2;
            let u = random_sequence(n, 100 + seed);
            let v = random_sequence(n, 200 + seed);
            let w = v.dense().adjoint() * u.dense();
            let reg = 2 * n;
            let mut full = GateSequence::new(reg);
            for op in entangling_ops(n) {
                full.push_op(op).unwrap();
            }
            let w_emb = embed(&w, reg, &(0..n).collect::<Vec<_>>());
            let chi = w_emb * full.dense().column(0).into_owned();
            let rho = DensityState::from_matrix(
                &chi * chi.adjoint(),
                fumc_labels(n),
            )
            .unwrap();
            let bell = bell_pair_projector();
            for j in 0..n {
                let pair_state = rho.partial_trace(&[j, n + j]).unwrap();
                let mut oracle = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        oracle += (bell[(a, b)] * pair_state.matrix()[(b, a)]).re;
                    }
                }
                let f = 1.0 - lhst_cost(&u, &v, None, EvalMode::Exact, Some(j)).unwrap().value;
                assert!((f - oracle).abs() < 1e-10, "seed {seed} j {j}");
            }
        }
    }

    #[test]
    fn let_cost_examples() {
        let u = seq1(&[], 1);
        let v = seq1(&[(Gate::X, &[0])], 1);
        assert!((let_cost(&u, &v, None, EvalMode::Exact).unwrap().value - 1.0).abs() < 1e-10);
        let id = let_cost(&u, &u, None, EvalMode::Exact).unwrap();
        assert!(id.value.abs() < 1e-10);
        // Phase gates fix |0> and are degenerate optima of the echo cost.
        for phi in [0.3, 1.2, 2.9] {
            let vp = seq1(&[(Gate::Rz(phi), &[0])], 1);
            let c = let_cost(&u, &vp, None, EvalMode::Exact).unwrap();
            assert!(c.value.abs() < 1e-10);
        }
    }

    #[test]
    fn let_matches_amplitude_formula() {
        for n in 1..=3usize {
            let u = random_sequence(n, 30 + n as u64);
            let v = random_sequence(n, 40 + n as u64);
            let w = v.dense().adjoint() * u.dense();
            let g = w[(0, 0)].norm_sqr();
            let c = let_cost(&u, &v, None, EvalMode::Exact).unwrap();
            assert!((c.value - (1.0 - g)).abs() < 1e-10);
        }
    }

    #[test]
    fn llet_splits_and_matches_partial_trace_oracle() {
        let u = seq1(&[], 2);
        let v = seq1(&[(Gate::X, &[0])], 2);
        let g1 = 1.0 - llet_cost(&u, &v, None, EvalMode::Exact, Some(0)).unwrap().value;
        let g2 = 1.0 - llet_cost(&u, &v, None, EvalMode::Exact, Some(1)).unwrap().value;
        assert!(g1.abs() < 1e-10);
        assert!((g2 - 1.0).abs() < 1e-10);
        assert!((llet_cost(&u, &v, None, EvalMode::Exact, None).unwrap().value - 0.5).abs() < 1e-10);

        // Partial-trace oracle on random pairs.
        for seed in [7u64, 8] {
            let n = 2;
            let u = random_sequence(n, 300 + seed);
            let v = random_sequence(n, 400 + seed);
            let w = v.dense().adjoint() * u.dense();
            let psi = w.column(0).into_owned();
            let rho = DensityState::from_matrix(
                &psi * psi.adjoint(),
                vec!["A1".into(), "A2".into()],
            )
            .unwrap();
            for j in 0..n {
                let red = rho.partial_trace(&[j]).unwrap();
                let oracle = red.matrix()[(0, 0)].re;
                let g = 1.0 - llet_cost(&u, &v, None, EvalMode::Exact, Some(j)).unwrap().value;
                assert!((g - oracle).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sandwich_inequalities_hold_on_random_pairs() {
        for n in [2usize, 3] {
            for seed in 0..25u64 {
                let u = random_sequence(n, 1000 + seed);
                let v = random_sequence(n, 2000 + seed);
                let chst = hst_cost(&u, &v, None, EvalMode::Exact).unwrap().value;
                let clhst = lhst_cost(&u, &v, None, EvalMode::Exact, None).unwrap().value;
                assert!(clhst <= chst + 1e-12);
                assert!(chst <= n as f64 * clhst + 1e-12);
                let clet = let_cost(&u, &v, None, EvalMode::Exact).unwrap().value;
                let cllet = llet_cost(&u, &v, None, EvalMode::Exact, None).unwrap().value;
                assert!(cllet <= clet + 1e-12);
                assert!(clet <= n as f64 * cllet + 1e-12);
            }
        }
    }

    #[test]
    fn global_phase_never_changes_costs() {
        let n = 2;
        let u = random_sequence(n, 77);
        let v = random_sequence(n, 78);
        let phase = Complex64::from_polar(1.0, 1.125);
        let mut v_phased = GateSequence::new(n);
        v_phased
            .push(Gate::Unitary(v.dense() * phase), &(0..n).collect::<Vec<_>>())
            .unwrap();
        for kind in [CostKind::Hst, CostKind::Lhst, CostKind::Let, CostKind::Llet] {
            let a = cost(kind, &u, &v, None, EvalMode::Exact).unwrap().value;
            let b = cost(kind, &u, &v_phased, None, EvalMode::Exact).unwrap().value;
            assert!((a - b).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn weighted_cost_combines() {
        let a = CostEstimate::exact(0.2);
        let b = CostEstimate::exact(0.4);
        assert!((weighted_cost(1.0, &a, &b).unwrap().value - 0.2).abs() < 1e-15);
        assert!((weighted_cost(0.0, &a, &b).unwrap().value - 0.4).abs() < 1e-15);
        assert!((weighted_cost(0.5, &a, &b).unwrap().value - 0.3).abs() < 1e-15);
        assert!(weighted_cost(1.5, &a, &b).is_err());
    }

    #[test]
    fn sampled_estimates_agree_with_exact_within_five_sigma() {
        let n = 2;
        let u = random_sequence(n, 55);
        let v = random_sequence(n, 56);
        for kind in [CostKind::Hst, CostKind::Lhst, CostKind::Let, CostKind::Llet] {
            let exact = cost(kind, &u, &v, None, EvalMode::Exact).unwrap().value;
            let sampled = cost(
                kind,
                &u,
                &v,
                None,
                EvalMode::Shots { shots: 100_000, seed: 99 },
            )
            .unwrap();
            let sigma = sampled.std_error.unwrap().max(1e-6);
            assert!(
                (sampled.value - exact).abs() <= 5.0 * sigma,
                "{kind:?}: sampled {} vs exact {exact}",
                sampled.value
            );
        }
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let u = random_sequence(2, 60);
        let v = random_sequence(2, 61);
        let mode = EvalMode::Shots { shots: 5000, seed: 4242 };
        let a = hst_cost(&u, &v, None, mode).unwrap().value;
        let b = hst_cost(&u, &v, None, mode).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn average_fidelity_of_bit_flip_is_one_third() {
        let u = seq1(&[], 1);
        let v = seq1(&[(Gate::X, &[0])], 1);
        let f = average_fidelity(&u, &v, 100_000, 7).unwrap();
        assert!((f - 1.0 / 3.0).abs() < 0.01, "f = {f}");
    }

    #[test]
    fn average_fidelity_identity_is_exactly_one() {
        let u = random_sequence(2, 90);
        let (f, se) = average_fidelity_detailed(&u, &u, 50, 3).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn hst_relates_to_average_fidelity() {
        for n in [1usize, 2] {
            let u = random_sequence(n, 500 + n as u64);
            let v = random_sequence(n, 600 + n as u64);
            let d = (1usize << n) as f64;
            let c = hst_cost(&u, &v, None, EvalMode::Exact).unwrap().value;
            let (fbar, se) = average_fidelity_detailed(&u, &v, 100_000, 11).unwrap();
            let predicted = (d + 1.0) / d * (1.0 - fbar);
            let tol = 3.0 * (d + 1.0) / d * se;
            assert!((c - predicted).abs() <= tol, "n = {n}: {c} vs {predicted} ± {tol}");
        }
    }

    #[test]
    fn effective_hamiltonian_let_of_identity() {
        let u = seq1(&[], 1);
        let h = effective_hamiltonian(CostKind::Let, &u).unwrap();
        let mut p1 = CMat::zeros(2, 2);
        p1[(1, 1)] = cr(1.0);
        assert!(max_abs_diff(&h, &p1) < 1e-12);
    }

    #[test]
    fn effective_hamiltonians_reproduce_costs() {
        let n = 2;
        for seed in 0..20u64 {
            let u = random_sequence(n, 700 + seed);
            let v = random_sequence(n, 800 + seed);
            // Fixed-input kinds on |ψ> = V|0>.
            let psi = v.dense().column(0).into_owned();
            for kind in [CostKind::Let, CostKind::Llet] {
                let h = effective_hamiltonian(kind, &u).unwrap();
                let e = (psi.adjoint() * &h * &psi)[(0, 0)].re;
                let c = cost(kind, &u, &v, None, EvalMode::Exact).unwrap().value;
                assert!((e - c).abs() < 1e-10, "{kind:?} seed {seed}");
            }
            // Full-matrix kinds on the Choi state.
            let chi = choi_state(&v);
            for kind in [CostKind::Hst, CostKind::Lhst] {
                let h = effective_hamiltonian(kind, &u).unwrap();
                let mut e = 0.0;
                for a in 0..h.nrows() {
                    for b in 0..h.ncols() {
                        e += (h[(a, b)] * chi[(b, a)]).re;
                    }
                }
                let c = cost(kind, &u, &v, None, EvalMode::Exact).unwrap().value;
                assert!((e - c).abs() < 1e-10, "{kind:?} seed {seed}");
            }
        }
    }

    #[test]
    fn effective_hamiltonian_ground_space_is_exact_compilation() {
        let n = 2;
        let u = random_sequence(n, 900);
        for kind in [CostKind::Let, CostKind::Llet, CostKind::Hst, CostKind::Lhst] {
            let h = effective_hamiltonian(kind, &u).unwrap();
            let eigs = linalg::hermitian_eigenvalues(&h);
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min.abs() < 1e-10, "{kind:?} ground energy {min}");
            // The compilation V = U sits in the ground space.
            let ground = match kind {
                CostKind::Let | CostKind::Llet => {
                    let psi = u.dense().column(0).into_owned();
                    (psi.adjoint() * &h * &psi)[(0, 0)].re
                }
                _ => {
                    let chi = choi_state(&u);
                    let mut e = 0.0;
                    for a in 0..h.nrows() {
                        for b in 0..h.ncols() {
                            e += (h[(a, b)] * chi[(b, a)]).re;
                        }
                    }
                    e
                }
            };
            assert!(ground.abs() < 1e-10);
        }
    }

    #[test]
    fn identity_noise_schedule_changes_nothing() {
        use crate::channel::{pauli_channel, NoisyPovm};
        use crate::pauli::PauliString;
        let n = 2;
        let u = random_sequence(n, 1100);
        let v = random_sequence(n, 1200);
        let sched = crate::noise::noise_model_1(crate::noise::Nm1Params {
            n,
            global_depol_per_step: 1.0,
            pauli_tau1: pauli_channel(&[(PauliString::identity(2 * n), 1.0)], true).unwrap(),
            pauli_tau2: pauli_channel(&[(PauliString::identity(2 * n), 1.0)], true).unwrap(),
            depol_a_per_step: 1.0,
            nupn_b_per_step: None,
            gate_pre: pauli_channel(&[(PauliString::identity(2 * n), 1.0)], true).unwrap(),
            gate_post: pauli_channel(&[(PauliString::identity(2 * n), 1.0)], true).unwrap(),
            readout: NoisyPovm::ideal(2 * n),
        })
        .unwrap()
        .with_state_validation(true);
        for kind in [CostKind::Hst, CostKind::Lhst] {
            let clean = cost(kind, &u, &v, None, EvalMode::Exact).unwrap().value;
            let noisy = cost(kind, &u, &v, Some(&sched), EvalMode::Exact).unwrap().value;
            assert!((clean - noisy).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_only_schedule_follows_affine_law() {
        let n = 1;
        let u = random_sequence(n, 1300);
        let v = random_sequence(n, 1400);
        let mut sched = NoiseSchedule::custom(n);
        sched.set_global_depol(0.9).unwrap();
        // HST: one layer per step; F̃ = p_tot F + (1 - p_tot)/2^{2n}.
        let (noisy, meta) = evaluate_with_meta(CostKind::Hst, &u, &v, Some(&sched)).unwrap();
        let (clean, _) = evaluate_with_meta(CostKind::Hst, &u, &v, None).unwrap();
        let p_tot = meta.depol_weight;
        let predicted = p_tot * clean + (1.0 - p_tot) * (1.0 - meta.effect_trace_frac);
        assert!((noisy - predicted).abs() < 1e-12);
        assert!((meta.effect_trace_frac - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fisc_rejects_tau2_and_system_b() {
        use crate::channel::pauli_channel;
        use crate::pauli::PauliString;
        let n = 1;
        let u = random_sequence(n, 1);
        let v = random_sequence(n, 2);
        let mut sched = NoiseSchedule::custom(n);
        sched.push_tau2(
            pauli_channel(&[(PauliString::identity(1), 1.0)], true).unwrap(),
            Scope::Full,
        );
        assert!(matches!(
            let_cost(&u, &v, Some(&sched), EvalMode::Exact),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn lhst_rejects_out_of_range_pair() {
        let u = random_sequence(2, 5);
        assert!(lhst_cost(&u, &u, None, EvalMode::Exact, Some(2)).is_err());
    }

    use crate::rng::RngStream;
}
