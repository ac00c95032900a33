//! Composite noise schedules: channel insertions at named circuit epochs
//! (τ₁, τ₂, per-gate, during the compiled unitary, readout).
//!
//! The three formal models place their clauses as follows. Noise model 1:
//! global depolarizing throughout, global Pauli at τ₁ and τ₂, depolarizing on
//! system A and non-unital Pauli on system B between τ₁ and τ₂, Pauli gate
//! noise on the entangling/disentangling gates, and measurement noise. Noise
//! model 2 swaps the non-unital channel to system A at τ₁ and keeps only
//! unital Pauli noise on B. Noise model 3 (fixed-input-state circuits) has
//! depolarizing throughout, Pauli at τ₁, and measurement noise; there is no
//! τ₂ epoch because readout follows the compiled unitary immediately.

use crate::channel::{Channel, ChannelKind, NoisyPovm};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModelTag {
    Nm1,
    Nm2,
    Nm3,
    Hardware,
    Custom,
}

/// Subsystem a placed channel acts on. For the two-register tests system A
/// holds qubits 0..n and system B qubits n..2n; for single-register tests
/// system A is the whole register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Full,
    SystemA,
    SystemB,
}

#[derive(Clone, Debug)]
pub struct PlacedChannel {
    pub channel: Channel,
    pub scope: Scope,
}

#[derive(Clone, Debug)]
pub enum GateNoise {
    /// Global Pauli channels before and after each entangling-layer gate.
    PauliSandwich { pre: Channel, post: Channel },
    /// Per-gate local noise on the touched qubits: depolarizing followed by
    /// thermal relaxation, applied after every gate in the circuit.
    HardwareLocal {
        depol_1q: f64,
        depol_2q: f64,
        thermal_1q: Channel,
        thermal_2q: Channel,
    },
}

#[derive(Clone, Copy, Debug)]
pub enum Readout {
    None,
    /// Same confusion rows on every measured qubit.
    Uniform(f64, f64),
}

#[derive(Clone, Debug)]
pub struct NoiseSchedule {
    pub(crate) tag: NoiseModelTag,
    /// Logical qubit count of the compiled unitary (register is n or 2n).
    pub(crate) n: usize,
    /// Keep-probability of one global depolarizing layer per circuit step.
    pub(crate) global_depol_per_step: f64,
    pub(crate) tau1: Vec<PlacedChannel>,
    pub(crate) tau2: Vec<PlacedChannel>,
    /// Applied on system A after every gate of the compiled unitary.
    pub(crate) during_w_a: Vec<Channel>,
    /// Applied on system B after every gate of the compiled unitary.
    pub(crate) during_w_b: Vec<Channel>,
    pub(crate) gate_noise: Option<GateNoise>,
    pub(crate) readout_uniform: Readout,
    pub(crate) readout_rows: Option<NoisyPovm>,
    pub(crate) strict: bool,
    /// Run Hermiticity/positivity assertions on the state at every epoch.
    pub(crate) validate_states: bool,
}

impl NoiseSchedule {
    pub fn tag(&self) -> NoiseModelTag {
        self.tag
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True when every Pauli-diagonal component passed the nonnegative
    /// transfer-coefficient check the resilience theorems assume.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn with_state_validation(mut self, on: bool) -> Self {
        self.validate_states = on;
        self
    }

    /// Readout rows for a register of `size` qubits, if measurement noise
    /// is part of the schedule.
    pub fn readout_for(&self, size: usize) -> Result<Option<NoisyPovm>> {
        match (&self.readout_rows, self.readout_uniform) {
            (Some(povm), _) => {
                if povm.n() != size {
                    return Err(Error::InvalidSchedule(format!(
                        "readout has {} rows, register has {size} qubits",
                        povm.n()
                    )));
                }
                Ok(Some(povm.clone()))
            }
            (None, Readout::Uniform(p00, p11)) => {
                Ok(Some(crate::channel::measurement_noise(&vec![(p00, p11); size])?))
            }
            (None, Readout::None) => Ok(None),
        }
    }

    fn empty(tag: NoiseModelTag, n: usize) -> Self {
        Self {
            tag,
            n,
            global_depol_per_step: 1.0,
            tau1: Vec::new(),
            tau2: Vec::new(),
            during_w_a: Vec::new(),
            during_w_b: Vec::new(),
            gate_noise: None,
            readout_uniform: Readout::None,
            readout_rows: None,
            strict: true,
            validate_states: false,
        }
    }

    /// Free-form schedule; no clause structure is enforced beyond arity
    /// checks at evaluation time.
    pub fn custom(n: usize) -> Self {
        Self::empty(NoiseModelTag::Custom, n)
    }

    pub fn set_global_depol(&mut self, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(format!("depolarizing p = {p}")));
        }
        self.global_depol_per_step = p;
        Ok(())
    }

    pub fn push_tau1(&mut self, channel: Channel, scope: Scope) {
        self.tau1.push(PlacedChannel { channel, scope });
        self.strict = self.recompute_strict();
    }

    pub fn push_tau2(&mut self, channel: Channel, scope: Scope) {
        self.tau2.push(PlacedChannel { channel, scope });
        self.strict = self.recompute_strict();
    }

    pub fn push_during_w_a(&mut self, channel: Channel) {
        self.during_w_a.push(channel);
        self.strict = self.recompute_strict();
    }

    pub fn push_during_w_b(&mut self, channel: Channel) {
        self.during_w_b.push(channel);
        self.strict = self.recompute_strict();
    }

    pub fn set_gate_noise(&mut self, noise: GateNoise) {
        self.gate_noise = Some(noise);
        self.strict = self.recompute_strict();
    }

    pub fn set_readout_rows(&mut self, povm: NoisyPovm) {
        self.readout_rows = Some(povm);
    }

    pub fn set_readout_uniform(&mut self, p00: f64, p11: f64) -> Result<()> {
        crate::channel::measurement_noise(&[(p00, p11)])?;
        self.readout_uniform = Readout::Uniform(p00, p11);
        Ok(())
    }

    fn recompute_strict(&self) -> bool {
        let placed_ok = self
            .tau1
            .iter()
            .chain(self.tau2.iter())
            .all(|p| p.channel.is_strict());
        let during_ok = self
            .during_w_a
            .iter()
            .chain(self.during_w_b.iter())
            .all(Channel::is_strict);
        let gate_ok = match &self.gate_noise {
            None => true,
            Some(GateNoise::PauliSandwich { pre, post }) => pre.is_strict() && post.is_strict(),
            Some(GateNoise::HardwareLocal { .. }) => false,
        };
        placed_ok && during_ok && gate_ok
    }

    /// True when nothing in the schedule maps identity to anything else
    /// (readout noise aside, which modifies the POVM rather than the state).
    pub fn is_unital_circuit_noise(&self) -> bool {
        let all_unital = |chs: &[PlacedChannel]| chs.iter().all(|p| p.channel.is_unital(1e-10));
        all_unital(&self.tau1)
            && all_unital(&self.tau2)
            && self.during_w_a.iter().all(|ch| ch.is_unital(1e-10))
            && self.during_w_b.iter().all(|ch| ch.is_unital(1e-10))
            && match &self.gate_noise {
                None => true,
                Some(GateNoise::PauliSandwich { .. }) => true,
                Some(GateNoise::HardwareLocal { .. }) => false,
            }
    }

    /// Copy with every depolarizing contribution removed; the affine-law
    /// verifier compares against this baseline.
    pub fn without_global_depol(&self) -> NoiseSchedule {
        let mut out = self.clone();
        out.global_depol_per_step = 1.0;
        out.tau1.retain(|p| p.channel.kind() != ChannelKind::Depolarizing);
        out.tau2.retain(|p| p.channel.kind() != ChannelKind::Depolarizing);
        out.during_w_a.retain(|ch| ch.kind() != ChannelKind::Depolarizing);
        out.during_w_b.retain(|ch| ch.kind() != ChannelKind::Depolarizing);
        out
    }
}

pub struct Nm1Params {
    pub n: usize,
    pub global_depol_per_step: f64,
    /// Global Pauli channels over the 2n-qubit register at τ₁ and τ₂.
    pub pauli_tau1: Channel,
    pub pauli_tau2: Channel,
    /// Keep-probability of the depolarizing layer on A per compiled-gate step.
    pub depol_a_per_step: f64,
    /// Non-unital Pauli channel on the B register per compiled-gate step.
    pub nupn_b_per_step: Option<Channel>,
    /// Pauli gate noise around every entangling/disentangling gate.
    pub gate_pre: Channel,
    pub gate_post: Channel,
    /// Per-qubit readout rows over the 2n-qubit register.
    pub readout: NoisyPovm,
}

fn expect_kind(ch: &Channel, kinds: &[ChannelKind], what: &str) -> Result<()> {
    if !kinds.contains(&ch.kind()) {
        return Err(Error::InvalidSchedule(format!(
            "{what} must be one of {kinds:?}, got {:?}",
            ch.kind()
        )));
    }
    Ok(())
}

fn expect_arity(ch: &Channel, arity: usize, what: &str) -> Result<()> {
    if ch.arity() != arity {
        return Err(Error::InvalidSchedule(format!(
            "{what} has arity {}, expected {arity}",
            ch.arity()
        )));
    }
    Ok(())
}

/// Definition of noise model 1 as a schedule (two-register circuits).
pub fn noise_model_1(params: Nm1Params) -> Result<NoiseSchedule> {
    let n = params.n;
    expect_kind(&params.pauli_tau1, &[ChannelKind::Pauli], "τ₁ channel")?;
    expect_kind(&params.pauli_tau2, &[ChannelKind::Pauli], "τ₂ channel")?;
    expect_kind(&params.gate_pre, &[ChannelKind::Pauli], "gate pre-channel")?;
    expect_kind(&params.gate_post, &[ChannelKind::Pauli], "gate post-channel")?;
    expect_arity(&params.pauli_tau1, 2 * n, "τ₁ channel")?;
    expect_arity(&params.pauli_tau2, 2 * n, "τ₂ channel")?;
    expect_arity(&params.gate_pre, 2 * n, "gate pre-channel")?;
    expect_arity(&params.gate_post, 2 * n, "gate post-channel")?;
    if params.readout.n() != 2 * n {
        return Err(Error::InvalidSchedule("readout rows must cover 2n qubits".into()));
    }
    let mut sched = NoiseSchedule::empty(NoiseModelTag::Nm1, n);
    sched.global_depol_per_step = validated_prob(params.global_depol_per_step)?;
    sched.tau1.push(PlacedChannel { channel: params.pauli_tau1, scope: Scope::Full });
    sched.tau2.push(PlacedChannel { channel: params.pauli_tau2, scope: Scope::Full });
    sched
        .during_w_a
        .push(crate::channel::depolarizing(validated_prob(params.depol_a_per_step)?, n)?);
    if let Some(nupn) = params.nupn_b_per_step {
        expect_kind(&nupn, &[ChannelKind::NonunitalPauli, ChannelKind::Pauli], "B-side channel")?;
        expect_arity(&nupn, n, "B-side channel")?;
        sched.during_w_b.push(nupn);
    }
    sched.gate_noise = Some(GateNoise::PauliSandwich {
        pre: params.gate_pre,
        post: params.gate_post,
    });
    sched.readout_rows = Some(params.readout);
    sched.strict = sched.recompute_strict();
    Ok(sched)
}

pub struct Nm2Params {
    pub n: usize,
    pub global_depol_per_step: f64,
    pub pauli_tau1: Channel,
    /// Non-unital Pauli channel on the A register at τ₁ (after the Pauli).
    pub nupn_a_tau1: Channel,
    pub pauli_tau2: Channel,
    pub depol_a_per_step: f64,
    /// Unital Pauli channel on the B register per compiled-gate step.
    pub pauli_b_per_step: Option<Channel>,
    pub gate_pre: Channel,
    pub gate_post: Channel,
    pub readout: NoisyPovm,
}

/// Definition of noise model 2 as a schedule (two-register circuits).
pub fn noise_model_2(params: Nm2Params) -> Result<NoiseSchedule> {
    let n = params.n;
    expect_kind(&params.pauli_tau1, &[ChannelKind::Pauli], "τ₁ channel")?;
    expect_kind(&params.pauli_tau2, &[ChannelKind::Pauli], "τ₂ channel")?;
    expect_kind(
        &params.nupn_a_tau1,
        &[ChannelKind::NonunitalPauli, ChannelKind::Pauli],
        "A-side τ₁ channel",
    )?;
    expect_kind(&params.gate_pre, &[ChannelKind::Pauli], "gate pre-channel")?;
    expect_kind(&params.gate_post, &[ChannelKind::Pauli], "gate post-channel")?;
    expect_arity(&params.pauli_tau1, 2 * n, "τ₁ channel")?;
    expect_arity(&params.pauli_tau2, 2 * n, "τ₂ channel")?;
    expect_arity(&params.nupn_a_tau1, n, "A-side τ₁ channel")?;
    expect_arity(&params.gate_pre, 2 * n, "gate pre-channel")?;
    expect_arity(&params.gate_post, 2 * n, "gate post-channel")?;
    if params.readout.n() != 2 * n {
        return Err(Error::InvalidSchedule("readout rows must cover 2n qubits".into()));
    }
    if let Some(b) = &params.pauli_b_per_step {
        // The model only admits unital Pauli noise on B between τ₁ and τ₂.
        expect_kind(b, &[ChannelKind::Pauli, ChannelKind::Depolarizing], "B-side channel")?;
        expect_arity(b, n, "B-side channel")?;
        if !b.is_unital(1e-10) {
            return Err(Error::InvalidSchedule(
                "non-unital channel on B is outside noise model 2".into(),
            ));
        }
    }
    let mut sched = NoiseSchedule::empty(NoiseModelTag::Nm2, n);
    sched.global_depol_per_step = validated_prob(params.global_depol_per_step)?;
    sched.tau1.push(PlacedChannel { channel: params.pauli_tau1, scope: Scope::Full });
    sched.tau1.push(PlacedChannel { channel: params.nupn_a_tau1, scope: Scope::SystemA });
    sched.tau2.push(PlacedChannel { channel: params.pauli_tau2, scope: Scope::Full });
    sched
        .during_w_a
        .push(crate::channel::depolarizing(validated_prob(params.depol_a_per_step)?, n)?);
    if let Some(b) = params.pauli_b_per_step {
        sched.during_w_b.push(b);
    }
    sched.gate_noise = Some(GateNoise::PauliSandwich {
        pre: params.gate_pre,
        post: params.gate_post,
    });
    sched.readout_rows = Some(params.readout);
    sched.strict = sched.recompute_strict();
    Ok(sched)
}

pub struct Nm3Params {
    pub n: usize,
    pub global_depol_per_step: f64,
    /// Global Pauli channel over the n-qubit register at τ₁.
    pub pauli_tau1: Channel,
    /// Per-qubit readout rows over the n-qubit register.
    pub readout: NoisyPovm,
}

/// Definition of noise model 3 as a schedule (single-register circuits).
/// There is no τ₂ slot: measurement follows the compiled unitary directly.
pub fn noise_model_3(params: Nm3Params) -> Result<NoiseSchedule> {
    let n = params.n;
    expect_kind(&params.pauli_tau1, &[ChannelKind::Pauli], "τ₁ channel")?;
    expect_arity(&params.pauli_tau1, n, "τ₁ channel")?;
    if params.readout.n() != n {
        return Err(Error::InvalidSchedule("readout rows must cover n qubits".into()));
    }
    let mut sched = NoiseSchedule::empty(NoiseModelTag::Nm3, n);
    sched.global_depol_per_step = validated_prob(params.global_depol_per_step)?;
    sched.tau1.push(PlacedChannel { channel: params.pauli_tau1, scope: Scope::Full });
    sched.readout_rows = Some(params.readout);
    sched.strict = sched.recompute_strict();
    Ok(sched)
}

#[derive(Clone, Copy, Debug)]
pub struct HardwareParams {
    /// Depolarizing error probability attached to one-qubit gates.
    pub depol_error_1q: f64,
    /// Depolarizing error probability attached to two-qubit gates.
    pub depol_error_2q: f64,
    pub t1: f64,
    pub t2: f64,
    pub gate_time_1q: f64,
    pub gate_time_2q: f64,
    pub readout: (f64, f64),
}

impl Default for HardwareParams {
    /// Synthetic defaults of superconducting-hardware magnitude.
    fn default() -> Self {
        Self {
            depol_error_1q: 1e-3,
            depol_error_2q: 2e-2,
            t1: 50e-6,
            t2: 70e-6,
            gate_time_1q: 100e-9,
            gate_time_2q: 300e-9,
            readout: (0.97, 0.97),
        }
    }
}

impl HardwareParams {
    /// Multiply gate and readout error rates by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.depol_error_1q = (self.depol_error_1q * factor).clamp(0.0, 1.0);
        self.depol_error_2q = (self.depol_error_2q * factor).clamp(0.0, 1.0);
        self.gate_time_1q *= factor;
        self.gate_time_2q *= factor;
        let flip0 = ((1.0 - self.readout.0) * factor).clamp(0.0, 0.49);
        let flip1 = ((1.0 - self.readout.1) * factor).clamp(0.0, 0.49);
        self.readout = (1.0 - flip0, 1.0 - flip1);
        self
    }
}

/// Per-gate depolarizing-plus-thermal-relaxation noise with readout error,
/// applied to every gate in the circuit (entangling layers included).
pub fn hardware_like(n: usize, params: HardwareParams) -> Result<NoiseSchedule> {
    for e in [params.depol_error_1q, params.depol_error_2q] {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidProbability(format!("depolarizing error {e}")));
        }
    }
    let thermal_1q = crate::channel::thermal_relaxation(params.t1, params.t2, params.gate_time_1q)?;
    let thermal_2q = crate::channel::thermal_relaxation(params.t1, params.t2, params.gate_time_2q)?;
    let mut sched = NoiseSchedule::empty(NoiseModelTag::Hardware, n);
    sched.gate_noise = Some(GateNoise::HardwareLocal {
        depol_1q: 1.0 - params.depol_error_1q,
        depol_2q: 1.0 - params.depol_error_2q,
        thermal_1q,
        thermal_2q,
    });
    crate::channel::measurement_noise(&[params.readout])?;
    sched.readout_uniform = Readout::Uniform(params.readout.0, params.readout.1);
    sched.strict = false;
    Ok(sched)
}

fn validated_prob(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("probability {p}")));
    }
    Ok(p)
}
