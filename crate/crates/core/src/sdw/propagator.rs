use num_complex::Complex64 as C64;

use super::{JumpChannel, SdwError, WaveguideBasis};
use crate::linalg::{matexp, ComplexMatrix, CsrMatrix};
use crate::schemes::{coupling_pattern, lowering, system_hamiltonian, DelayGeometry, SchemeConfig};

/// Entries of the propagator below this modulus are dropped.
pub const SPARSE_THRESHOLD: f64 = 1e-14;

/// Joint index of system state `s` and waveguide state `w`.
#[inline]
pub fn joint_index(w: usize, s: usize, system_dim: usize) -> usize {
    w * system_dim + s
}

/// Mode index and amplitude of each coupling term.
fn coupled_modes(config: &SchemeConfig, geometry: &DelayGeometry, basis: &WaveguideBasis) -> Vec<(usize, usize, C64)> {
    coupling_pattern(config, geometry)
        .into_iter()
        .map(|c| (c.tls, basis.mode(c.row.index(), c.box_index), c.amplitude))
        .collect()
}

/// `H_eff = H_S + Σ (λ σ⁺ b + h.c.) − (i/2) Σ C†C` restricted to the
/// system and the listed waveguide patterns. Patterns must be closed under
/// removing a coupled photon.
fn local_hamiltonian(
    config: &SchemeConfig,
    couplings: &[(usize, usize, C64)],
    channels: &[JumpChannel],
    patterns: &[u128],
) -> ComplexMatrix {
    let k = config.scheme.tls_count();
    let ds = 1 << k;
    let mut hs = system_hamiltonian(config);
    for ch in channels {
        let cc = &ch.operator.adjoint() * &ch.operator;
        hs = &hs + &cc.scale(C64::new(0.0, -0.5));
    }
    let dim = ds * patterns.len();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for p in 0..patterns.len() {
        for a in 0..ds {
            for b in 0..ds {
                h[(p * ds + a, p * ds + b)] = hs[(a, b)];
            }
        }
    }
    for &(tls, mode, lambda) in couplings {
        let raise = lowering(k, tls).adjoint();
        let bit = 1u128 << mode;
        for (p, &mask) in patterns.iter().enumerate() {
            if mask & bit == 0 {
                continue;
            }
            let q = patterns.iter().position(|&m| m == mask & !bit).expect("patterns closed under removal");
            for a in 0..ds {
                for b in 0..ds {
                    let v = raise[(a, b)] * lambda;
                    if v != C64::new(0.0, 0.0) {
                        // λ σ⁺ b: photon absorbed, emitter raised.
                        h[(q * ds + a, p * ds + b)] += v;
                        h[(p * ds + b, q * ds + a)] += v.conj();
                    }
                }
            }
        }
    }
    h
}

/// `exp(−i H_eff δt)` on the full system ⊗ waveguide space.
///
/// `H_eff` only touches the system and the coupled boxes; photons in the
/// other boxes are spectators whose pattern is conserved. For each
/// spectator pattern the photon cap leaves `M − |spectators|` photons for
/// the coupled boxes, so one small exponential per residual cap suffices.
pub fn build_effective_propagator(
    config: &SchemeConfig,
    geometry: &DelayGeometry,
    basis: &WaveguideBasis,
    channels: &[JumpChannel],
) -> Result<CsrMatrix, SdwError> {
    let ds = config.scheme.system_dim();
    let couplings = coupled_modes(config, geometry, basis);
    let mut coupled: Vec<usize> = couplings.iter().map(|c| c.1).collect();
    coupled.sort_unstable();
    coupled.dedup();
    let coupled_mask = coupled.iter().fold(0u128, |m, &b| m | 1u128 << b);

    let subsets: Vec<u128> = (0u32..1 << coupled.len())
        .map(|sel| coupled.iter().enumerate().filter(|(i, _)| sel >> i & 1 == 1).fold(0, |m, (_, &b)| m | 1u128 << b))
        .collect();
    let dt = C64::new(0.0, -config.fine_dt());
    let mut blocks = Vec::with_capacity(basis.cap() + 1);
    for cap in 0..=basis.cap() {
        let patterns: Vec<u128> = subsets.iter().copied().filter(|m| m.count_ones() as usize <= cap).collect();
        let h = local_hamiltonian(config, &couplings, channels, &patterns);
        blocks.push((patterns, matexp(&h.scale(dt))?));
    }

    let dim = ds * basis.len();
    let mut triplets = Vec::new();
    for &spectators in basis.states().iter().filter(|&&m| m & coupled_mask == 0) {
        let (patterns, u) = &blocks[basis.cap() - spectators.count_ones() as usize];
        let global: Vec<usize> =
            patterns.iter().map(|&p| basis.index_of(spectators | p).expect("pattern within the photon cap")).collect();
        for (pi, &gi) in global.iter().enumerate() {
            for (pj, &gj) in global.iter().enumerate() {
                for a in 0..ds {
                    for b in 0..ds {
                        let v = u[(pi * ds + a, pj * ds + b)];
                        if v.norm() >= SPARSE_THRESHOLD {
                            triplets.push((joint_index(gi, a, ds), joint_index(gj, b, ds), v));
                        }
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dim, dim, triplets, SPARSE_THRESHOLD)?)
}

/// Dense `H_eff` over the whole basis, assembled mode by mode; reference
/// for the block construction.
pub fn dense_effective_hamiltonian(
    config: &SchemeConfig,
    geometry: &DelayGeometry,
    basis: &WaveguideBasis,
    channels: &[JumpChannel],
) -> ComplexMatrix {
    let couplings = coupled_modes(config, geometry, basis);
    local_hamiltonian(config, &couplings, channels, basis.states())
}
