//! Physical schemes, parameter validation and the engine-agnostic description
//! of drive, coupling and delay consumed by both engines.
//!
//! Every rate, time and phase is expressed in units of the reference rate
//! `γ = γ_L1 + γ_R1` (times as `t·γ`, drives as `Ω/γ`). Rabi amplitudes and
//! rates are therefore plain numbers; for the symmetric default
//! `γ_L1 = γ_R1 = 0.5` the free-space decay is `e^{−t}`.
//!
//! Waveguide orientation is shared by both engines: radiation enters a
//! delay line at its *entry* slot and leaves at its *output* slot `l` coarse
//! steps later. In the MPS picture the entry slot is the fresh time bin and
//! the output slot the feedback bin; in the SDW picture they are boxes
//! `N − 1` and `0`.

use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{kron, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// One TLS radiating into both directions of an open waveguide.
    InfiniteWaveguide,
    /// One TLS in front of a mirror; emission returns after the round trip.
    Feedback,
    /// Two TLSs separated by a propagation delay.
    TwoTls,
}

impl Scheme {
    pub fn tls_count(self) -> usize {
        match self {
            Scheme::TwoTls => 2,
            _ => 1,
        }
    }

    pub fn system_dim(self) -> usize {
        1 << self.tls_count()
    }

    /// Waveguide rows in the SDW picture.
    pub fn rows(self) -> usize {
        match self {
            Scheme::Feedback => 1,
            _ => 2,
        }
    }

    pub fn has_delay(self) -> bool {
        !matches!(self, Scheme::InfiniteWaveguide)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::InfiniteWaveguide => "infinite",
            Scheme::Feedback => "feedback",
            Scheme::TwoTls => "two_tls",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "infinite" | "infinite_waveguide" => Some(Scheme::InfiniteWaveguide),
            "feedback" => Some(Scheme::Feedback),
            "two_tls" | "twotls" => Some(Scheme::TwoTls),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Level {
    #[default]
    Ground,
    Excited,
}

impl Level {
    pub fn is_excited(self) -> bool {
        self == Level::Excited
    }
}

/// Initial product state. The waveguide always starts in vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct InitialState {
    pub tls1: Level,
    pub tls2: Level,
}

impl InitialState {
    pub fn excited() -> Self {
        Self { tls1: Level::Excited, tls2: Level::Ground }
    }

    pub fn both_excited() -> Self {
        Self { tls1: Level::Excited, tls2: Level::Excited }
    }

    /// Index into the system basis: `e1 + 2·e2`.
    pub fn system_index(self) -> usize {
        self.tls1.is_excited() as usize + 2 * self.tls2.is_excited() as usize
    }

    pub fn excitations(self) -> usize {
        self.tls1.is_excited() as usize + self.tls2.is_excited() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub gamma_l1: f64,
    pub gamma_r1: f64,
    pub gamma_l2: f64,
    pub gamma_r2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub tau: f64,
    pub phi: f64,
    /// Off-chip decay, per TLS.
    pub gamma0: f64,
    /// Pure dephasing, per TLS.
    pub gamma_p: f64,
    pub dt: f64,
    pub sub_steps: usize,
    pub t_max: f64,
    pub initial: InitialState,
    /// Upper bound on waveguide photons in the SDW basis.
    pub photon_cap: usize,
    /// SDW box count for the open waveguide; the delay fixes it otherwise.
    pub boxes: Option<usize>,
    /// `Some(true)` forces `H = (Ω/2)(σ⁺+σ⁻)`, `Some(false)` forces
    /// `H = Ω(σ⁺+σ⁻)`; `None` picks the scheme default.
    pub drive_half_convention: Option<bool>,
    /// Drive detuning; only resonant driving is supported.
    pub detuning: f64,
}

pub const DEFAULT_OPEN_BOXES: usize = 10;

impl SchemeConfig {
    /// Symmetric unit-rate defaults for the scheme with the first TLS excited.
    pub fn new(scheme: Scheme) -> Self {
        let two = scheme == Scheme::TwoTls;
        let has_delay = scheme.has_delay();
        Self {
            scheme,
            gamma_l1: 0.5,
            gamma_r1: 0.5,
            gamma_l2: if two { 0.5 } else { 0.0 },
            gamma_r2: if two { 0.5 } else { 0.0 },
            omega1: 0.0,
            omega2: 0.0,
            tau: if has_delay { 1.0 } else { 0.0 },
            phi: if scheme == Scheme::Feedback { std::f64::consts::PI } else { 0.0 },
            gamma0: 0.0,
            gamma_p: 0.0,
            dt: 0.05,
            sub_steps: 1,
            t_max: 5.0,
            initial: InitialState::excited(),
            photon_cap: 1,
            boxes: None,
            drive_half_convention: None,
            detuning: 0.0,
        }
    }

    /// `γ = γ_L1 + γ_R1`, the unit of every rate in the config.
    pub fn normalization_rate(&self) -> f64 {
        self.gamma_l1 + self.gamma_r1
    }

    pub fn fine_dt(&self) -> f64 {
        self.dt / self.sub_steps as f64
    }

    /// Fine steps per coarse step when none are requested: strong drives
    /// (`Ω ≥ 2π`) need `δt = Δt/10`.
    pub fn default_sub_steps(&self) -> usize {
        if self.omega1.max(self.omega2) >= 2.0 * std::f64::consts::PI - 1e-12 {
            10
        } else {
            1
        }
    }

    pub fn uses_half_drive(&self) -> bool {
        self.drive_half_convention.unwrap_or(self.scheme == Scheme::TwoTls)
    }

    /// Total waveguide decay rate of each TLS.
    pub fn waveguide_rates(&self) -> Vec<f64> {
        match self.scheme {
            Scheme::TwoTls => vec![self.gamma_l1 + self.gamma_r1, self.gamma_l2 + self.gamma_r2],
            _ => vec![self.gamma_l1 + self.gamma_r1],
        }
    }
}

/// Discretization of the delay line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DelayGeometry {
    /// Coarse steps spanned by the delay, `τ / Δt`.
    pub l: usize,
    /// SDW boxes per row. With a delay, `N = l + 1` so that a photon needs
    /// exactly `l` shifts from entry to output.
    pub boxes_n: usize,
    pub photon_cap_m: usize,
    /// Coarse steps needed to reach `t_max`.
    pub steps: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("dt must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("sub_steps must be at least 1")]
    ZeroSubSteps,
    #[error("tau = {tau} is not an integer multiple of dt = {dt}")]
    NonCommensurate { tau: f64, dt: f64 },
    #[error("the {0} scheme needs a delay of at least one step")]
    MissingDelay(Scheme),
    #[error("the infinite-waveguide scheme has no delay, got tau = {0}")]
    UnexpectedDelay(f64),
    #[error("photon cap must be 1 or 2, got {0}")]
    PhotonCap(usize),
    #[error("box count must be at least 1 and is only configurable for the infinite waveguide")]
    Boxes,
    #[error("only resonant drive is supported, got detuning {0}")]
    Detuned(f64),
    #[error("{0} given for a single-emitter scheme")]
    SecondEmitter(&'static str),
}

fn check_rate(name: &'static str, value: f64) -> Result<(), SchemeError> {
    if !value.is_finite() {
        return Err(SchemeError::NonFinite { name, value });
    }
    if value < 0.0 {
        return Err(SchemeError::Negative { name, value });
    }
    Ok(())
}

const COMMENSURATE_TOL: f64 = 1e-9;

pub fn validate(config: &SchemeConfig) -> Result<DelayGeometry, SchemeError> {
    let c = config;
    for (name, v) in [
        ("gamma_l1", c.gamma_l1),
        ("gamma_r1", c.gamma_r1),
        ("gamma_l2", c.gamma_l2),
        ("gamma_r2", c.gamma_r2),
        ("omega1", c.omega1),
        ("omega2", c.omega2),
        ("tau", c.tau),
        ("gamma0", c.gamma0),
        ("gamma_p", c.gamma_p),
        ("t_max", c.t_max),
    ] {
        check_rate(name, v)?;
    }
    if !c.phi.is_finite() {
        return Err(SchemeError::NonFinite { name: "phi", value: c.phi });
    }
    if !c.detuning.is_finite() {
        return Err(SchemeError::NonFinite { name: "detuning", value: c.detuning });
    }
    if c.detuning != 0.0 {
        return Err(SchemeError::Detuned(c.detuning));
    }
    if !(c.dt.is_finite() && c.dt > 0.0) {
        return Err(SchemeError::NonPositiveStep(c.dt));
    }
    if c.sub_steps == 0 {
        return Err(SchemeError::ZeroSubSteps);
    }
    if !(1..=2).contains(&c.photon_cap) {
        return Err(SchemeError::PhotonCap(c.photon_cap));
    }
    if c.scheme != Scheme::TwoTls {
        for (name, v) in [("gamma_l2", c.gamma_l2), ("gamma_r2", c.gamma_r2), ("omega2", c.omega2)] {
            if v != 0.0 {
                return Err(SchemeError::SecondEmitter(name));
            }
        }
        if c.initial.tls2.is_excited() {
            return Err(SchemeError::SecondEmitter("an excited second emitter"));
        }
    }

    let steps = ((c.t_max / c.dt) - COMMENSURATE_TOL).ceil().max(0.0) as usize;
    let (l, boxes_n) = if c.scheme.has_delay() {
        if c.boxes.is_some() {
            return Err(SchemeError::Boxes);
        }
        let l = (c.tau / c.dt).round();
        if (l * c.dt - c.tau).abs() > COMMENSURATE_TOL * c.tau.max(c.dt) {
            return Err(SchemeError::NonCommensurate { tau: c.tau, dt: c.dt });
        }
        if l < 1.0 {
            return Err(SchemeError::MissingDelay(c.scheme));
        }
        (l as usize, l as usize + 1)
    } else {
        if c.tau != 0.0 {
            return Err(SchemeError::UnexpectedDelay(c.tau));
        }
        let n = c.boxes.unwrap_or(DEFAULT_OPEN_BOXES);
        if n == 0 {
            return Err(SchemeError::Boxes);
        }
        (0, n)
    };
    Ok(DelayGeometry { l, boxes_n, photon_cap_m: c.photon_cap, steps })
}

/// Single-TLS ladder operators in the `(g, e)` basis.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])
}

pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// Lowering operator of emitter `n` (0 or 1) on the joint space of
/// `tls_count` emitters, joint index `e1 + 2·e2`.
pub fn lowering(tls_count: usize, n: usize) -> ComplexMatrix {
    let s = sigma_minus();
    let id = ComplexMatrix::identity(2);
    match (tls_count, n) {
        (1, 0) => s,
        (2, 0) => kron(&id, &s),
        (2, 1) => kron(&s, &id),
        _ => panic!("no emitter {n} among {tls_count}"),
    }
}

/// Rotating-frame system Hamiltonian at resonance.
pub fn system_hamiltonian(config: &SchemeConfig) -> ComplexMatrix {
    let k = config.scheme.tls_count();
    let factor = if config.uses_half_drive() { 0.5 } else { 1.0 };
    let omegas = [config.omega1, config.omega2];
    let mut h = ComplexMatrix::zeros(1 << k, 1 << k);
    for (n, &om) in omegas.iter().enumerate().take(k) {
        if om == 0.0 {
            continue;
        }
        let lo = lowering(k, n);
        let sx = &lo + &lo.adjoint();
        h = &h + &sx.scale_real(factor * om);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Row {
    /// The single folded row of the mirror scheme.
    Loop,
    Left,
    Right,
}

impl Row {
    /// Row index in the SDW basis.
    pub fn index(self) -> usize {
        match self {
            Row::Loop | Row::Left => 0,
            Row::Right => 1,
        }
    }
}

/// One term `λ σ_tls⁺ b_{row,box} + h.c.` of the interaction Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub tls: usize,
    pub row: Row,
    pub box_index: usize,
    /// `√(rate/Δt)` times a phase.
    pub amplitude: C64,
}

impl Coupling {
    pub fn is_entry(&self, geometry: &DelayGeometry) -> bool {
        self.box_index == geometry.boxes_n - 1
    }
}

/// Interaction terms in the box picture.
///
/// Mirror: fresh emission enters at the entry box with `√γ_R`; the reflected
/// field returns at the output box with `e^{−iφ}√γ_L`. Two emitters: TLS 1
/// emits into the left row and absorbs from the right row after the delay,
/// TLS 2 the reverse, with `e^{iφ}` on the delayed absorption.
pub fn coupling_pattern(config: &SchemeConfig, geometry: &DelayGeometry) -> Vec<Coupling> {
    let c = config;
    let entry = geometry.boxes_n - 1;
    let amp = |rate: f64, phase: f64| C64::from_polar((rate / c.dt).sqrt(), phase);
    let raw = match c.scheme {
        Scheme::InfiniteWaveguide => vec![
            Coupling { tls: 0, row: Row::Left, box_index: entry, amplitude: amp(c.gamma_l1, 0.0) },
            Coupling { tls: 0, row: Row::Right, box_index: entry, amplitude: amp(c.gamma_r1, 0.0) },
        ],
        Scheme::Feedback => vec![
            Coupling { tls: 0, row: Row::Loop, box_index: entry, amplitude: amp(c.gamma_r1, 0.0) },
            Coupling { tls: 0, row: Row::Loop, box_index: 0, amplitude: amp(c.gamma_l1, -c.phi) },
        ],
        Scheme::TwoTls => vec![
            Coupling { tls: 0, row: Row::Left, box_index: entry, amplitude: amp(c.gamma_l1, 0.0) },
            Coupling { tls: 0, row: Row::Right, box_index: 0, amplitude: amp(c.gamma_r1, c.phi) },
            Coupling { tls: 1, row: Row::Left, box_index: 0, amplitude: amp(c.gamma_l2, c.phi) },
            Coupling { tls: 1, row: Row::Right, box_index: entry, amplitude: amp(c.gamma_r2, 0.0) },
        ],
    };
    raw.into_iter().filter(|k| k.amplitude.norm() > 0.0).collect()
}
