use num_complex::Complex64 as C64;

use crate::linalg::{kron_all, matexp, ComplexMatrix};
use crate::schemes::{coupling_pattern, lowering, system_hamiltonian, DelayGeometry, Row, Scheme, SchemeConfig};

/// One-step propagator `exp(−i·H·Δt)` on adjacent sites, joint index in
/// site order (row-major over `dims`).
#[derive(Clone, Debug)]
pub struct EvolutionGate {
    /// Physical dimension of each site the gate acts on, left to right.
    pub dims: Vec<usize>,
    pub matrix: ComplexMatrix,
}

impl EvolutionGate {
    pub fn sites(&self) -> usize {
        self.dims.len()
    }
}

/// Bin annihilation operator truncated to one photon.
fn bin_lowering() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// Step Hamiltonian `H·Δt`, per site order.
///
/// * open waveguide: `sys ⊗ fresh`, both directions folded into one
///   collective bin of rate `γ_L + γ_R`;
/// * mirror: `feedback ⊗ sys ⊗ fresh`;
/// * two emitters: `feedback ⊗ sys ⊗ fresh` with dim-4 bins `(i_L, i_R)`.
///
/// Couplings come from the box picture: entry box ↔ fresh bin, output box ↔
/// feedback bin, `λ σ⁺ b + h.c.` integrated over `Δt` gives `λΔt σ⁺ b`.
pub fn step_hamiltonian(config: &SchemeConfig, geometry: &DelayGeometry) -> (Vec<usize>, ComplexMatrix) {
    let dt = config.dt;
    let hs = system_hamiltonian(config).scale_real(dt);
    let k = config.scheme.tls_count();
    let pattern = coupling_pattern(config, geometry);
    let id2 = ComplexMatrix::identity(2);
    let b = bin_lowering();

    match config.scheme {
        Scheme::InfiniteWaveguide => {
            let w: f64 = pattern.iter().map(|c| c.amplitude.norm_sqr()).sum::<f64>().sqrt() * dt;
            let sm = lowering(1, 0);
            let up = kron_all(&[&sm.adjoint(), &b]).scale_real(w);
            let h = &(&kron_all(&[&hs, &id2]) + &up) + &up.adjoint();
            (vec![2, 2], h)
        }
        Scheme::Feedback | Scheme::TwoTls => {
            let db = if k == 1 { 2 } else { 4 };
            let ds = 1 << k;
            let id_b = ComplexMatrix::identity(db);
            let bin_op = |row: Row| match row {
                Row::Loop => b.clone(),
                Row::Left => kron_all(&[&b, &id2]),
                Row::Right => kron_all(&[&id2, &b]),
            };
            let mut h = kron_all(&[&id_b, &hs, &id_b]);
            for c in &pattern {
                let sp = lowering(k, c.tls).adjoint();
                let op = bin_op(c.row);
                let term =
                    if c.is_entry(geometry) { kron_all(&[&id_b, &sp, &op]) } else { kron_all(&[&op, &sp, &id_b]) };
                let term = term.scale(c.amplitude * dt);
                h = &(&h + &term) + &term.adjoint();
            }
            (vec![db, ds, db], h)
        }
    }
}

pub fn build_gate(config: &SchemeConfig, geometry: &DelayGeometry) -> EvolutionGate {
    let (dims, h) = step_hamiltonian(config, geometry);
    let matrix = matexp(&h.scale(C64::new(0.0, -1.0))).expect("step Hamiltonian is square and finite");
    EvolutionGate { dims, matrix }
}
