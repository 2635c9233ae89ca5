//! Time-bin matrix product state engine.
//!
//! Chain layout for the delayed schemes: sites `0..l` are vacuum bins that
//! play the feedback role during the first round trip, site `l` holds the
//! system, and fresh bins follow. At step `k` the system sits at `l + k`, the
//! bin due to return sits at `k` and the fresh bin at `l + k + 1`. The open
//! waveguide uses the same layout with `l = 0`.

mod gate;

pub use gate::{build_gate, step_hamiltonian, EvolutionGate};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{entropy_bits, lq, matmul_into, qr, svd_truncate, ComplexMatrix, LinalgError};
use crate::schemes::{lowering, DelayGeometry, Scheme, SchemeConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("bond cap must be at least 1")]
    ZeroBondCap,
    #[error("orthogonality center at {found}, expected {expected}")]
    OcMisplaced { expected: usize, found: usize },
    #[error("chain exhausted after {0} steps")]
    ChainExhausted(usize),
    #[error("gate acts on {gate} sites, the {scheme} scheme needs {needed}")]
    GateMismatch { scheme: Scheme, gate: usize, needed: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteRole {
    System,
    TimeBin,
    FeedbackBin,
}

/// Rank-3 site tensor `A[left, phys, right]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub phys: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl SiteTensor {
    fn product(amplitudes: &[C64]) -> Self {
        Self { left: 1, phys: amplitudes.len(), right: 1, data: amplitudes.to_vec() }
    }

    fn vacuum(phys: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); phys];
        v[0] = C64::new(1.0, 0.0);
        Self::product(&v)
    }

    #[inline]
    fn at(&self, a: usize, i: usize, b: usize) -> C64 {
        self.data[(a * self.phys + i) * self.right + b]
    }

    /// `(left·phys) × right` view.
    fn as_left_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.left * self.phys, self.right, self.data.clone()).expect("consistent site shape")
    }

    /// `left × (phys·right)` view.
    fn as_right_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.left, self.phys * self.right, self.data.clone()).expect("consistent site shape")
    }
}

/// Options for one MPS run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsOptions {
    pub chi_max: usize,
    pub rel_tol: f64,
    /// Record entropy every this many steps; 0 disables it.
    pub entropy_every: usize,
}

impl MpsOptions {
    /// Bond caps by regime: 2 without drive for one emitter, 8 for two
    /// emitters, 32 when driven.
    pub fn for_config(config: &SchemeConfig) -> Self {
        let driven = config.omega1 > 0.0 || config.omega2 > 0.0;
        let chi_max = match (driven, config.scheme) {
            (true, _) => 32,
            (false, Scheme::TwoTls) => 8,
            (false, _) => 2,
        };
        Self { chi_max, rel_tol: 1e-12, entropy_every: 1 }
    }
}

/// Observables after a coarse step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub populations: Vec<f64>,
    /// System/waveguide entanglement in bits, if measured this step.
    pub entropy: Option<f64>,
    pub discarded_weight: f64,
    pub max_bond: usize,
}

#[derive(Clone, Debug)]
pub struct MpsState {
    pub sites: Vec<SiteTensor>,
    pub roles: Vec<SiteRole>,
    pub oc: usize,
    pub chi_max: usize,
    pub rel_tol: f64,
    scheme: Scheme,
    l: usize,
    step: usize,
    /// Σ discarded weight over every truncating SVD.
    pub discarded_weight: f64,
    cached: Option<Measured>,
}

/// System observables captured while the OC sat on the system site.
#[derive(Clone, Debug)]
struct Measured {
    step: usize,
    populations: Vec<f64>,
    entropy: f64,
}

impl MpsState {
    /// Product state: vacuum bins around the system, bond dimension 1, OC on
    /// the system.
    pub fn init(config: &SchemeConfig, geometry: &DelayGeometry, options: &MpsOptions) -> Result<Self, MpsError> {
        if options.chi_max == 0 {
            return Err(MpsError::ZeroBondCap);
        }
        let l = geometry.l;
        let bin_dim = if config.scheme == Scheme::TwoTls { 4 } else { 2 };
        let sys_dim = config.scheme.system_dim();
        let n = l + 1 + geometry.steps;
        let mut sites = Vec::with_capacity(n);
        let mut roles = Vec::with_capacity(n);
        for _ in 0..l {
            sites.push(SiteTensor::vacuum(bin_dim));
            roles.push(SiteRole::FeedbackBin);
        }
        let mut sys = vec![C64::new(0.0, 0.0); sys_dim];
        sys[config.initial.system_index()] = C64::new(1.0, 0.0);
        sites.push(SiteTensor::product(&sys));
        roles.push(SiteRole::System);
        for _ in 0..geometry.steps {
            sites.push(SiteTensor::vacuum(bin_dim));
            roles.push(SiteRole::TimeBin);
        }
        Ok(Self {
            sites,
            roles,
            oc: l,
            chi_max: options.chi_max,
            rel_tol: options.rel_tol,
            scheme: config.scheme,
            l,
            step: 0,
            discarded_weight: 0.0,
            cached: None,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn system_position(&self) -> usize {
        self.l + self.step
    }

    pub fn max_bond(&self) -> usize {
        self.sites.iter().map(|s| s.right).max().unwrap_or(1)
    }

    pub fn move_oc(&mut self, target: usize) -> Result<(), MpsError> {
        while self.oc < target {
            let j = self.oc;
            let (q, r) = qr(&self.sites[j].as_left_matrix());
            let s = &self.sites[j];
            self.sites[j] = SiteTensor { left: s.left, phys: s.phys, right: q.cols(), data: q.into_vec() };
            let next = &self.sites[j + 1];
            let merged = &r * &next.as_right_matrix();
            self.sites[j + 1] =
                SiteTensor { left: merged.rows(), phys: next.phys, right: next.right, data: merged.into_vec() };
            self.oc += 1;
        }
        while self.oc > target {
            let j = self.oc;
            let (lm, q) = lq(&self.sites[j].as_right_matrix());
            let s = &self.sites[j];
            self.sites[j] = SiteTensor { left: q.rows(), phys: s.phys, right: s.right, data: q.into_vec() };
            let prev = &self.sites[j - 1];
            let merged = &prev.as_left_matrix() * &lm;
            self.sites[j - 1] =
                SiteTensor { left: prev.left, phys: prev.phys, right: merged.cols(), data: merged.into_vec() };
            self.oc -= 1;
        }
        Ok(())
    }

    /// `θ[a, i, j, b]` for sites `j, j+1`, flattened row-major.
    fn merge_two(&self, j: usize) -> (Vec<C64>, [usize; 4]) {
        let (a, b) = (&self.sites[j], &self.sites[j + 1]);
        debug_assert_eq!(a.right, b.left, "bond mismatch at {j}");
        let mut out = vec![C64::new(0.0, 0.0); a.left * a.phys * b.phys * b.right];
        matmul_into(&a.data, &b.data, &mut out, a.left * a.phys, a.right, b.phys * b.right);
        (out, [a.left, a.phys, b.phys, b.right])
    }

    /// Splits `θ[(a, i), (j, b)]` into sites `j, j+1`, truncating and
    /// renormalizing; the OC ends on the right site if `oc_right`.
    fn split_two(
        &mut self,
        j: usize,
        theta: Vec<C64>,
        [dl, d1, d2, dr]: [usize; 4],
        oc_right: bool,
    ) -> Result<(), MpsError> {
        let m = ComplexMatrix::from_vec(dl * d1, d2 * dr, theta)?;
        let svd = svd_truncate(&m, self.chi_max, self.rel_tol)?;
        let norm: f64 = svd.s.iter().map(|s| s * s).sum::<f64>().sqrt();
        self.discarded_weight += svd.discarded_weight / (norm * norm + svd.discarded_weight);
        let k = svd.rank();
        let s: Vec<f64> = svd.s.iter().map(|x| x / norm).collect();
        let (left, right) = if oc_right {
            let r = ComplexMatrix::from_fn(k, d2 * dr, |i, c| svd.vh[(i, c)] * s[i]);
            (svd.u, r)
        } else {
            let l = ComplexMatrix::from_fn(dl * d1, k, |r, i| svd.u[(r, i)] * s[i]);
            (l, svd.vh)
        };
        self.sites[j] = SiteTensor { left: dl, phys: d1, right: k, data: left.into_vec() };
        self.sites[j + 1] = SiteTensor { left: k, phys: d2, right: dr, data: right.into_vec() };
        self.oc = if oc_right { j + 1 } else { j };
        Ok(())
    }

    /// Exchanges sites `j` and `j+1`. The OC must be on one of them and ends
    /// on `j+1` if `oc_right`, else on `j`.
    pub fn swap(&mut self, j: usize, oc_right: bool) -> Result<(), MpsError> {
        if self.oc != j && self.oc != j + 1 {
            return Err(MpsError::OcMisplaced { expected: j, found: self.oc });
        }
        let (theta, [dl, d1, d2, dr]) = self.merge_two(j);
        let mut swapped = vec![C64::new(0.0, 0.0); theta.len()];
        for a in 0..dl {
            for i in 0..d1 {
                for k in 0..d2 {
                    let src = ((a * d1 + i) * d2 + k) * dr;
                    let dst = ((a * d2 + k) * d1 + i) * dr;
                    swapped[dst..dst + dr].copy_from_slice(&theta[src..src + dr]);
                }
            }
        }
        self.split_two(j, swapped, [dl, d2, d1, dr], oc_right)?;
        self.roles.swap(j, j + 1);
        Ok(())
    }

    /// Applies `G` to the joint physical index of a flattened
    /// `θ[a, p, b]` with `p` of extent `gate.rows()`.
    fn apply_gate(theta: &[C64], dl: usize, dr: usize, gate: &ComplexMatrix) -> Vec<C64> {
        let p = gate.rows();
        let mut out = vec![C64::new(0.0, 0.0); theta.len()];
        for a in 0..dl {
            let blk = a * p * dr..(a + 1) * p * dr;
            matmul_into(gate.as_slice(), &theta[blk.clone()], &mut out[blk], p, p, dr);
        }
        out
    }

    fn check_gate(&self, gate: &EvolutionGate) -> Result<(), MpsError> {
        let needed = if self.scheme == Scheme::InfiniteWaveguide { 2 } else { 3 };
        if gate.sites() != needed {
            return Err(MpsError::GateMismatch { scheme: self.scheme, gate: gate.sites(), needed });
        }
        if self.system_position() + 1 >= self.len() {
            return Err(MpsError::ChainExhausted(self.step));
        }
        Ok(())
    }

    /// Open-waveguide step: gate on (system, fresh), then the system hops
    /// past the used bin; OC stays on the system.
    pub fn step_no_feedback(&mut self, gate: &EvolutionGate) -> Result<(), MpsError> {
        self.check_gate(gate)?;
        let p = self.system_position();
        self.move_oc(p)?;
        let (theta, [dl, ds, db, dr]) = self.merge_two(p);
        let evolved = Self::apply_gate(&theta, dl, dr, &gate.matrix);
        let mut swapped = vec![C64::new(0.0, 0.0); evolved.len()];
        for a in 0..dl {
            for s in 0..ds {
                for n in 0..db {
                    let src = ((a * ds + s) * db + n) * dr;
                    let dst = ((a * db + n) * ds + s) * dr;
                    swapped[dst..dst + dr].copy_from_slice(&evolved[src..src + dr]);
                }
            }
        }
        self.split_two(p, swapped, [dl, db, ds, dr], true)?;
        self.roles.swap(p, p + 1);
        self.step += 1;
        self.cached = None;
        Ok(())
    }

    /// Delayed step (mirror or two emitters): the returning bin is swapped up
    /// to the system, the three-site gate is applied, the system moves past
    /// the fresh bin and the returning bin is swapped back home.
    pub fn step_feedback(&mut self, gate: &EvolutionGate) -> Result<(), MpsError> {
        self.check_gate(gate)?;
        let k = self.step;
        let p = self.system_position();

        self.move_oc(k)?;
        for j in k..p - 1 {
            self.swap(j, true)?;
        }
        debug_assert_eq!(self.oc, p - 1);

        // θ[a, f, s, n, b] over sites p−1, p, p+1.
        let (f, s, n) = (&self.sites[p - 1], &self.sites[p], &self.sites[p + 1]);
        let (dl, df, ds, dn, dr) = (f.left, f.phys, s.phys, n.phys, n.right);
        let mut fs = vec![C64::new(0.0, 0.0); dl * df * ds * s.right];
        matmul_into(&f.data, &s.data, &mut fs, dl * df, f.right, ds * s.right);
        let mut theta = vec![C64::new(0.0, 0.0); dl * df * ds * dn * dr];
        matmul_into(&fs, &n.data, &mut theta, dl * df * ds, s.right, dn * dr);
        let evolved = Self::apply_gate(&theta, dl, dr, &gate.matrix);

        // Reorder to θ[a, f, n, s, b] so the system lands right of the fresh bin.
        let mut reordered = vec![C64::new(0.0, 0.0); evolved.len()];
        for a in 0..dl {
            for fi in 0..df {
                for si in 0..ds {
                    for ni in 0..dn {
                        let src = (((a * df + fi) * ds + si) * dn + ni) * dr;
                        let dst = (((a * df + fi) * dn + ni) * ds + si) * dr;
                        reordered[dst..dst + dr].copy_from_slice(&evolved[src..src + dr]);
                    }
                }
            }
        }
        let m = ComplexMatrix::from_vec(dl * df, dn * ds * dr, reordered)?;
        let svd = svd_truncate(&m, self.chi_max, self.rel_tol)?;
        let norm: f64 = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.discarded_weight += svd.discarded_weight / (norm * norm + svd.discarded_weight);
        let k1 = svd.rank();
        self.sites[p - 1] = SiteTensor { left: dl, phys: df, right: k1, data: svd.u.into_vec() };
        let rest: Vec<C64> =
            (0..k1 * dn * ds * dr).map(|idx| svd.vh.as_slice()[idx] * (svd.s[idx / (dn * ds * dr)] / norm)).collect();
        self.split_two(p, rest, [k1, dn, ds, dr], true)?;
        self.roles.swap(p, p + 1);
        debug_assert_eq!(self.oc, p + 1);

        self.cached = Some(self.measure_here(p + 1, self.step + 1)?);

        self.move_oc(p - 1)?;
        for j in (k..p - 1).rev() {
            self.swap(j, false)?;
        }
        // The spent bin leaves the loop and the fresh one joins it.
        self.roles[k] = SiteRole::TimeBin;
        self.roles[p] = SiteRole::FeedbackBin;
        self.step += 1;
        Ok(())
    }

    pub fn step_two_tls(&mut self, gate: &EvolutionGate) -> Result<(), MpsError> {
        self.step_feedback(gate)
    }

    /// Dispatches on the scheme.
    pub fn step(&mut self, gate: &EvolutionGate) -> Result<(), MpsError> {
        match self.scheme {
            Scheme::InfiniteWaveguide => self.step_no_feedback(gate),
            Scheme::Feedback => self.step_feedback(gate),
            Scheme::TwoTls => self.step_two_tls(gate),
        }
    }

    /// Later swaps act on bins only, so the system's reduced state is the
    /// same at the end of the step.
    fn measure_here(&self, p: usize, step: usize) -> Result<Measured, MpsError> {
        Ok(Measured { step, populations: self.local_populations(p), entropy: self.local_entropy(p)? })
    }

    fn local_entropy(&self, p: usize) -> Result<f64, MpsError> {
        debug_assert_eq!(self.oc, p);
        let s = &self.sites[p];
        // Rows: physical index; columns: (left, right) environment.
        let m = ComplexMatrix::from_fn(s.phys, s.left * s.right, |i, c| s.at(c / s.right, i, c % s.right));
        let svd = svd_truncate(&m, s.phys, 0.0)?;
        Ok(entropy_bits(&svd.s))
    }

    /// Excited populations of each emitter from the OC-resident system site.
    fn local_populations(&self, p: usize) -> Vec<f64> {
        debug_assert_eq!(self.oc, p);
        let s = &self.sites[p];
        let mut probs = vec![0.0; s.phys];
        for a in 0..s.left {
            for (i, p) in probs.iter_mut().enumerate() {
                for b in 0..s.right {
                    *p += s.at(a, i, b).norm_sqr();
                }
            }
        }
        let total: f64 = probs.iter().sum();
        let tls = if s.phys == 4 { 2 } else { 1 };
        (0..tls)
            .map(|n| probs.iter().enumerate().filter(|(i, _)| (i >> n) & 1 == 1).map(|(_, p)| p).sum::<f64>() / total)
            .collect()
    }

    fn measured(&mut self) -> Result<&Measured, MpsError> {
        if self.cached.as_ref().is_none_or(|m| m.step != self.step) {
            let p = self.system_position();
            self.move_oc(p)?;
            self.cached = Some(self.measure_here(p, self.step)?);
        }
        Ok(self.cached.as_ref().expect("filled above"))
    }

    /// `⟨σ_n⁺σ_n⁻⟩` for every emitter. Uses the value measured during the
    /// last step when the OC has moved away from the system since.
    pub fn populations(&mut self) -> Result<Vec<f64>, MpsError> {
        Ok(self.measured()?.populations.clone())
    }

    pub fn population(&mut self, which_tls: usize) -> Result<f64, MpsError> {
        Ok(self.populations()?[which_tls])
    }

    /// System/waveguide von Neumann entropy in bits.
    pub fn entanglement_entropy(&mut self) -> Result<f64, MpsError> {
        Ok(self.measured()?.entropy)
    }

    /// `⟨ψ|ψ⟩` by a full left-to-right transfer contraction.
    pub fn norm_squared(&self) -> f64 {
        let mut env = vec![C64::new(1.0, 0.0)];
        for s in &self.sites {
            env = transfer_left(&env, s, None);
        }
        env[0].re
    }

    /// `‖Σ_{a,i} A*[a,i,b] A[a,i,b'] − δ_{bb'}‖_F` for site `j`.
    pub fn left_normalization_error(&self, j: usize) -> f64 {
        let m = self.sites[j].as_left_matrix();
        (&m.adjoint() * &m).distance(&ComplexMatrix::identity(m.cols()))
    }

    /// `‖Σ_{i,b} A[a,i,b] A*[a',i,b] − δ_{aa'}‖_F` for site `j`.
    pub fn right_normalization_error(&self, j: usize) -> f64 {
        let m = self.sites[j].as_right_matrix();
        (&m * &m.adjoint()).distance(&ComplexMatrix::identity(m.rows()))
    }

    /// Largest canonical-form violation over all non-OC sites.
    pub fn canonical_error(&self) -> f64 {
        let left = (0..self.oc).map(|j| self.left_normalization_error(j));
        let right = (self.oc + 1..self.len()).map(|j| self.right_normalization_error(j));
        left.chain(right).fold(0.0, f64::max)
    }

    /// Photon-number expectation of every bin (system entries are 0).
    pub fn bin_photon_numbers(&self) -> Vec<f64> {
        let n = self.len();
        let mut lefts = Vec::with_capacity(n + 1);
        lefts.push(vec![C64::new(1.0, 0.0)]);
        for s in &self.sites {
            let next = transfer_left(lefts.last().unwrap(), s, None);
            lefts.push(next);
        }
        let mut rights = vec![vec![C64::new(1.0, 0.0)]; n + 1];
        for j in (0..n).rev() {
            rights[j] = transfer_right(&rights[j + 1], &self.sites[j]);
        }
        (0..n)
            .map(|j| {
                if self.roles[j] == SiteRole::System {
                    return 0.0;
                }
                let s = &self.sites[j];
                let number: Vec<f64> = (0..s.phys).map(|i| i.count_ones() as f64).collect();
                let env = transfer_left(&lefts[j], s, Some(&number));
                let r = &rights[j + 1];
                env.iter().zip(r).map(|(a, b)| a * b).sum::<C64>().re
            })
            .collect()
    }

    /// Full state vector over all sites, site 0 most significant. Only for
    /// short chains.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut rows = 1;
        for s in &self.sites {
            let mut next = vec![C64::new(0.0, 0.0); rows * s.phys * s.right];
            matmul_into(&acc, &s.data, &mut next, rows, s.left, s.phys * s.right);
            acc = next;
            rows *= s.phys;
        }
        acc
    }

    /// Reduced system density matrix from the OC-resident site.
    pub fn system_density_matrix(&mut self) -> Result<ComplexMatrix, MpsError> {
        let p = self.system_position();
        self.move_oc(p)?;
        let s = &self.sites[p];
        Ok(ComplexMatrix::from_fn(s.phys, s.phys, |i, k| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..s.left {
                for b in 0..s.right {
                    acc += s.at(a, i, b) * s.at(a, k, b).conj();
                }
            }
            acc
        }))
    }
}

/// `E'[b, b'] = Σ E[a, a'] A[a,i,b] A*[a',i,b'] w_i`, flattened row-major.
fn transfer_left(env: &[C64], s: &SiteTensor, weights: Option<&[f64]>) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); s.right * s.right];
    for a in 0..s.left {
        for ap in 0..s.left {
            let e = env[a * s.left + ap];
            if e.norm_sqr() == 0.0 {
                continue;
            }
            for i in 0..s.phys {
                let w = weights.map_or(1.0, |w| w[i]);
                if w == 0.0 {
                    continue;
                }
                for b in 0..s.right {
                    let x = e * s.at(a, i, b) * w;
                    for bp in 0..s.right {
                        out[b * s.right + bp] += x * s.at(ap, i, bp).conj();
                    }
                }
            }
        }
    }
    out
}

/// `E'[a, a'] = Σ A[a,i,b] A*[a',i,b'] E[b, b']`, flattened row-major.
fn transfer_right(env: &[C64], s: &SiteTensor) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); s.left * s.left];
    for a in 0..s.left {
        for ap in 0..s.left {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..s.phys {
                for b in 0..s.right {
                    for bp in 0..s.right {
                        acc += s.at(a, i, b) * s.at(ap, i, bp).conj() * env[b * s.right + bp];
                    }
                }
            }
            out[a * s.left + ap] = acc;
        }
    }
    out
}

/// Outcome of a full MPS run.
#[derive(Clone, Debug)]
pub struct MpsRun {
    pub records: Vec<StepRecord>,
    pub discarded_weight: f64,
    pub max_bond: usize,
}

/// Evolves from `t = 0` to `t_max`, calling `sink` with the record of
/// every step including the initial state.
pub fn run_with_sink(
    config: &SchemeConfig,
    geometry: &DelayGeometry,
    options: &MpsOptions,
    mut sink: impl FnMut(&StepRecord),
) -> Result<MpsRun, MpsError> {
    let gate = build_gate(config, geometry);
    let mut state = MpsState::init(config, geometry, options)?;
    let mut records = Vec::with_capacity(geometry.steps + 1);
    let mut max_bond = 1;
    for step in 0..=geometry.steps {
        if step > 0 {
            state.step(&gate)?;
        }
        let populations = state.populations()?;
        let entropy = if options.entropy_every > 0 && step % options.entropy_every == 0 {
            Some(state.entanglement_entropy()?)
        } else {
            None
        };
        max_bond = max_bond.max(state.max_bond());
        let rec = StepRecord {
            step,
            t: step as f64 * config.dt,
            populations,
            entropy,
            discarded_weight: state.discarded_weight,
            max_bond,
        };
        sink(&rec);
        records.push(rec);
    }
    Ok(MpsRun { records, discarded_weight: state.discarded_weight, max_bond })
}

pub fn run(config: &SchemeConfig, geometry: &DelayGeometry, options: &MpsOptions) -> Result<MpsRun, MpsError> {
    run_with_sink(config, geometry, options, |_| {})
}

/// `⟨σ_n⁺σ_n⁻⟩` operator on the joint system space, for external checks.
pub fn population_operator(scheme: Scheme, n: usize) -> ComplexMatrix {
    let lo = lowering(scheme.tls_count(), n);
    &lo.adjoint() * &lo
}
