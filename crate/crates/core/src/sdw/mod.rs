//! Space-discretized waveguide: quantum trajectories over a truncated
//! box-occupation basis.
//!
//! Per coarse step of length `Δt`:
//! 1. `sub_steps` fine steps, each a Lindblad jump check followed by the
//!    non-Hermitian propagator and a renormalization;
//! 2. projective measurement of the output boxes (box 0 of each row);
//! 3. every row moves one box towards its output, a vacuum box enters at
//!    `N − 1`;
//! 4. renormalization.
//!
//! Amplitudes are stored with the system index fastest:
//! `index = w · dim(system) + s`.

mod basis;
mod ensemble;
mod propagator;

pub use basis::{expected_size, WaveguideBasis, MAX_MODES};
pub use ensemble::{ensemble_average, trajectory_rng, EnsembleResult, ENSEMBLE_BLOCK};
pub use propagator::{build_effective_propagator, dense_effective_hamiltonian, joint_index, SPARSE_THRESHOLD};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, CsrMatrix, LinalgError};
use crate::schemes::{lowering, validate, DelayGeometry, Row, Scheme, SchemeConfig, SchemeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdwError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("photon cap must be 1 or 2, got {0}")]
    PhotonCap(usize),
    #[error("{rows} rows of {boxes} boxes do not fit the {MAX_MODES}-mode basis")]
    Modes { boxes: usize, rows: usize },
    #[error("state norm collapsed to {norm:e} at step {step}")]
    NormCollapse { step: usize, norm: f64 },
    #[error("output-box probabilities sum to {0}, state not normalized")]
    Normalization(f64),
    #[error("output boxes must be empty before shifting")]
    OccupiedOutput,
    #[error("ensemble needs at least one trajectory")]
    NoTrajectories,
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Lindblad operator on the system factor (identity on the waveguide).
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel {
    pub tls: usize,
    pub kind: ChannelKind,
    pub operator: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    /// `√γ₀ σ⁻`
    OffChip,
    /// `√(γ′/2) σ_z`
    Dephasing,
}

pub fn jump_channels(config: &SchemeConfig) -> Vec<JumpChannel> {
    let k = config.scheme.tls_count();
    let mut out = Vec::new();
    for tls in 0..k {
        let lo = lowering(k, tls);
        if config.gamma0 > 0.0 {
            out.push(JumpChannel { tls, kind: ChannelKind::OffChip, operator: lo.scale_real(config.gamma0.sqrt()) });
        }
        if config.gamma_p > 0.0 {
            let n = &lo.adjoint() * &lo;
            let sz = &n.scale_real(2.0) - &ComplexMatrix::identity(1 << k);
            out.push(JumpChannel {
                tls,
                kind: ChannelKind::Dephasing,
                operator: sz.scale_real((config.gamma_p / 2.0).sqrt()),
            });
        }
    }
    out
}

pub fn build_basis(geometry: &DelayGeometry, scheme: Scheme) -> Result<WaveguideBasis, SdwError> {
    WaveguideBasis::new(geometry.boxes_n, scheme.rows(), geometry.photon_cap_m)
}

/// Photon detected in the output boxes during one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detection {
    One(Row),
    /// Both output boxes at once (two rows, `M = 2`).
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Emission {
    pub step: usize,
    pub t: f64,
    pub detection: Detection,
}

/// Jump probabilities above this per fine step flag a too-coarse `δt`.
pub const LARGE_JUMP_PROBABILITY: f64 = 0.1;
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SdwState {
    pub amplitudes: Vec<C64>,
    pub rng: ChaCha8Rng,
    pub t: f64,
}

impl SdwState {
    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64], step: usize) -> Result<(), SdwError> {
    let n = norm(v);
    // Written so that a NaN norm also counts as collapse.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(n > NORM_FLOOR) {
        return Err(SdwError::NormCollapse { step, norm: n });
    }
    let inv = 1.0 / n;
    v.iter_mut().for_each(|z| *z *= inv);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpCheck {
    pub probability: f64,
    pub jumped: Option<usize>,
}

/// Everything that is fixed for a given configuration: basis, propagator
/// and the index maps used by measurement and shifting.
#[derive(Clone, Debug)]
pub struct SdwEngine {
    pub config: SchemeConfig,
    pub geometry: DelayGeometry,
    pub basis: WaveguideBasis,
    pub propagator: CsrMatrix,
    pub channels: Vec<JumpChannel>,
    system_dim: usize,
    /// Output-box occupation of each waveguide state: bit r for row r.
    output_pattern: Vec<u8>,
    /// Waveguide index with the output boxes emptied.
    cleared: Vec<usize>,
    /// Waveguide index after one shift, for states with empty outputs.
    shifted: Vec<Option<usize>>,
}

/// Per-step observables of one trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    /// `populations[k][n]` is `⟨σ_n⁺σ_n⁻⟩` after step `k` (step 0 initial).
    pub populations: Vec<Vec<f64>>,
    /// Expected photon number inside the waveguide after each step.
    pub photons: Vec<f64>,
    /// Photons detected up to and including each step.
    pub detected: Vec<usize>,
    pub emissions: Vec<Emission>,
    pub jumps: usize,
    /// Fine steps whose jump probability exceeded `LARGE_JUMP_PROBABILITY`.
    pub large_jump_steps: usize,
}

impl SdwEngine {
    pub fn new(config: &SchemeConfig) -> Result<Self, SdwError> {
        let geometry = validate(config)?;
        let basis = build_basis(&geometry, config.scheme)?;
        let channels = jump_channels(config);
        let propagator = build_effective_propagator(config, &geometry, &basis, &channels)?;
        let out = basis.output_mask();
        let output_pattern = basis
            .states()
            .iter()
            .map(|&m| (0..basis.rows()).fold(0u8, |p, r| p | (((m >> basis.mode(r, 0)) & 1) as u8) << r))
            .collect();
        let cleared =
            basis.states().iter().map(|&m| basis.index_of(m & !out).expect("subset stays in basis")).collect();
        let shifted = basis
            .states()
            .iter()
            .map(|&m| (m & out == 0).then(|| basis.index_of(basis.shifted(m)).expect("shift keeps photon count")))
            .collect();
        Ok(Self {
            config: config.clone(),
            geometry,
            basis,
            propagator,
            channels,
            system_dim: config.scheme.system_dim(),
            output_pattern,
            cleared,
            shifted,
        })
    }

    pub fn dim(&self) -> usize {
        self.propagator.rows()
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn initial_state(&self, rng: ChaCha8Rng) -> SdwState {
        let mut amplitudes = vec![C64::new(0.0, 0.0); self.dim()];
        amplitudes[joint_index(0, self.config.initial.system_index(), self.system_dim)] = C64::new(1.0, 0.0);
        SdwState { amplitudes, rng, t: 0.0 }
    }

    /// `⟨σ_n⁺σ_n⁻⟩` for each emitter.
    pub fn populations(&self, state: &SdwState) -> Vec<f64> {
        let ds = self.system_dim;
        let k = self.config.scheme.tls_count();
        let mut p = vec![0.0; k];
        for (i, z) in state.amplitudes.iter().enumerate() {
            let s = i % ds;
            for (n, pn) in p.iter_mut().enumerate() {
                if s >> n & 1 == 1 {
                    *pn += z.norm_sqr();
                }
            }
        }
        p
    }

    pub fn photon_number(&self, state: &SdwState) -> f64 {
        let ds = self.system_dim;
        state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * self.basis.mask(i / ds).count_ones() as f64)
            .sum()
    }

    fn channel_weights(&self, state: &SdwState) -> Vec<f64> {
        let ds = self.system_dim;
        self.channels
            .iter()
            .map(|ch| {
                state
                    .amplitudes
                    .chunks_exact(ds)
                    .map(|v| ch.operator.apply(v).iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    /// Draws at most one Lindblad jump with probability `dt · Σ⟨C†C⟩`; a
    /// single uniform draw picks both whether and which channel jumps.
    pub fn lindblad_jump_check(&self, state: &mut SdwState, dt: f64) -> Result<JumpCheck, SdwError> {
        if self.channels.is_empty() {
            return Ok(JumpCheck { probability: 0.0, jumped: None });
        }
        let weights: Vec<f64> = self.channel_weights(state).into_iter().map(|w| w * dt).collect();
        let probability: f64 = weights.iter().sum();
        let r: f64 = state.rng.random();
        if r >= probability {
            return Ok(JumpCheck { probability, jumped: None });
        }
        let mut acc = 0.0;
        let mut chosen = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if r < acc {
                chosen = i;
                break;
            }
        }
        let op = &self.channels[chosen].operator;
        for v in state.amplitudes.chunks_exact_mut(self.system_dim) {
            let out = op.apply(v);
            v.copy_from_slice(&out);
        }
        normalize(&mut state.amplitudes, 0)?;
        Ok(JumpCheck { probability, jumped: Some(chosen) })
    }

    /// Projective measurement of box 0 of every row. Outcomes are sampled
    /// with one uniform draw against the cumulative order none, L, R, both;
    /// the state is projected, the output boxes emptied and renormalized.
    pub fn measure_output_boxes(&self, state: &mut SdwState) -> Result<Option<Detection>, SdwError> {
        let ds = self.system_dim;
        let mut p = [0.0f64; 4];
        for (i, z) in state.amplitudes.iter().enumerate() {
            p[self.output_pattern[i / ds] as usize] += z.norm_sqr();
        }
        let total: f64 = p.iter().sum();
        if p[1..].iter().sum::<f64>() > 1.0 + 1e-8 || !total.is_finite() {
            return Err(SdwError::Normalization(total));
        }
        let r: f64 = state.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = (0..4).rev().find(|&o| p[o] > 0.0).unwrap_or(0);
        for (o, &po) in p.iter().enumerate() {
            acc += po;
            if r < acc {
                outcome = o;
                break;
            }
        }
        if outcome != 0 {
            let mut next = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
            for (i, z) in state.amplitudes.iter().enumerate() {
                let w = i / ds;
                if self.output_pattern[w] as usize == outcome {
                    next[joint_index(self.cleared[w], i % ds, ds)] = *z;
                }
            }
            state.amplitudes = next;
        } else {
            for (i, z) in state.amplitudes.iter_mut().enumerate() {
                if self.output_pattern[i / ds] != 0 {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
        normalize(&mut state.amplitudes, 0)?;
        let single_row = self.basis.rows() == 1;
        Ok(match outcome {
            0 => None,
            1 if single_row => Some(Detection::One(Row::Loop)),
            1 => Some(Detection::One(Row::Left)),
            2 => Some(Detection::One(Row::Right)),
            _ => Some(Detection::Both),
        })
    }

    /// Pure index permutation moving each row one box towards its output.
    pub fn shift_boxes(&self, state: &mut SdwState) -> Result<(), SdwError> {
        let ds = self.system_dim;
        let mut next = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
        for (i, z) in state.amplitudes.iter().enumerate() {
            if *z == C64::new(0.0, 0.0) {
                continue;
            }
            let target = self.shifted[i / ds].ok_or(SdwError::OccupiedOutput)?;
            next[joint_index(target, i % ds, ds)] = *z;
        }
        state.amplitudes = next;
        Ok(())
    }

    /// One coarse step; returns the detection, if any.
    pub fn step(
        &self,
        state: &mut SdwState,
        step: usize,
        traj: &mut Trajectory,
    ) -> Result<Option<Detection>, SdwError> {
        let dt = self.config.fine_dt();
        let mut buf = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
        for _ in 0..self.config.sub_steps {
            let check = self.lindblad_jump_check(state, dt)?;
            if check.probability > LARGE_JUMP_PROBABILITY {
                traj.large_jump_steps += 1;
            }
            traj.jumps += check.jumped.is_some() as usize;
            self.propagator.matvec_into(&state.amplitudes, &mut buf);
            std::mem::swap(&mut state.amplitudes, &mut buf);
            normalize(&mut state.amplitudes, step)?;
        }
        let detection = self.measure_output_boxes(state)?;
        self.shift_boxes(state)?;
        normalize(&mut state.amplitudes, step)?;
        state.t = step as f64 * self.config.dt;
        Ok(detection)
    }

    fn record(&self, state: &SdwState, traj: &mut Trajectory, photons_out: usize) {
        traj.populations.push(self.populations(state));
        traj.photons.push(self.photon_number(state));
        traj.detected.push(photons_out);
    }

    pub fn run_trajectory(&self, rng: ChaCha8Rng) -> Result<Trajectory, SdwError> {
        let mut state = self.initial_state(rng);
        let steps = self.geometry.steps;
        let mut traj = Trajectory {
            populations: Vec::with_capacity(steps + 1),
            photons: Vec::with_capacity(steps + 1),
            detected: Vec::with_capacity(steps + 1),
            ..Trajectory::default()
        };
        let mut photons_out = 0;
        self.record(&state, &mut traj, photons_out);
        for step in 1..=steps {
            if let Some(detection) = self.step(&mut state, step, &mut traj)? {
                traj.emissions.push(Emission { step, t: state.t, detection });
                photons_out += if detection == Detection::Both { 2 } else { 1 };
            }
            self.record(&state, &mut traj, photons_out);
        }
        Ok(traj)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.geometry.steps).map(|k| k as f64 * self.config.dt).collect()
    }
}

#[cfg(test)]
mod tests;
