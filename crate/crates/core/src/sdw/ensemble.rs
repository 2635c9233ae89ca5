use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Emission, SdwEngine, SdwError, Trajectory};

/// Trajectories per partial sum. Fixed so that the merge tree, and hence
/// the floating-point result, does not depend on the worker count.
pub const ENSEMBLE_BLOCK: usize = 16;

/// Independent stream `index` of the generator seeded by `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// `pop1`, `pop2` (two emitters), `photons`, `detected`.
    pub observables: Vec<String>,
    /// `mean[o][k]` for observable `o` at time `k`.
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// `(trajectory, emission)` in trajectory order.
    pub emissions: Vec<(usize, Emission)>,
    pub jumps: usize,
    pub large_jump_steps: usize,
}

impl EnsembleResult {
    pub fn observable(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|o| o == name)
    }
}

struct Partial {
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
    emissions: Vec<(usize, Emission)>,
    jumps: usize,
    large_jump_steps: usize,
}

impl Partial {
    fn new(observables: usize, times: usize) -> Self {
        Self {
            sum: vec![vec![0.0; times]; observables],
            sum_sq: vec![vec![0.0; times]; observables],
            emissions: Vec::new(),
            jumps: 0,
            large_jump_steps: 0,
        }
    }

    fn add(&mut self, index: usize, traj: &Trajectory) {
        for (t, pops) in traj.populations.iter().enumerate() {
            let values = pops.iter().copied().chain([traj.photons[t], traj.detected[t] as f64]);
            for (o, v) in values.enumerate() {
                self.sum[o][t] += v;
                self.sum_sq[o][t] += v * v;
            }
        }
        self.emissions.extend(traj.emissions.iter().map(|&e| (index, e)));
        self.jumps += traj.jumps;
        self.large_jump_steps += traj.large_jump_steps;
    }

    fn merge(&mut self, other: Partial) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum).chain(self.sum_sq.iter_mut().zip(&other.sum_sq)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.emissions.extend(other.emissions);
        self.jumps += other.jumps;
        self.large_jump_steps += other.large_jump_steps;
    }
}

/// Mean and standard error over `n_trajectories` trajectories, trajectory
/// `i` driven by `trajectory_rng(master_seed, i)`. Output is bit-identical
/// for any `workers`.
pub fn ensemble_average(
    engine: &SdwEngine,
    n_trajectories: usize,
    master_seed: u64,
    workers: usize,
) -> Result<EnsembleResult, SdwError> {
    if n_trajectories == 0 {
        return Err(SdwError::NoTrajectories);
    }
    let times = engine.times();
    let k = engine.config.scheme.tls_count();
    let mut observables: Vec<String> = (1..=k).map(|n| format!("pop{n}")).collect();
    observables.extend(["photons".to_string(), "detected".to_string()]);
    let n_obs = observables.len();

    let blocks = n_trajectories.div_ceil(ENSEMBLE_BLOCK);
    let run_block = |b: usize| -> Result<Partial, SdwError> {
        let mut part = Partial::new(n_obs, times.len());
        let lo = b * ENSEMBLE_BLOCK;
        for i in lo..(lo + ENSEMBLE_BLOCK).min(n_trajectories) {
            let traj = engine.run_trajectory(trajectory_rng(master_seed, i as u64))?;
            part.add(i, &traj);
        }
        Ok(part)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SdwError::Pool(e.to_string()))?;
    let partials: Vec<Result<Partial, SdwError>> =
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect());

    let mut total = Partial::new(n_obs, times.len());
    for p in partials {
        total.merge(p?);
    }
    let n = n_trajectories as f64;
    let mean: Vec<Vec<f64>> = total.sum.iter().map(|s| s.iter().map(|x| x / n).collect()).collect();
    let std_error =
        total
            .sum
            .iter()
            .zip(&total.sum_sq)
            .map(|(s, s2)| {
                s.iter()
                    .zip(s2)
                    .map(|(x, x2)| {
                        if n_trajectories < 2 {
                            0.0
                        } else {
                            ((x2 - x * x / n) / (n - 1.0)).max(0.0).sqrt() / n.sqrt()
                        }
                    })
                    .collect()
            })
            .collect();
    Ok(EnsembleResult {
        times,
        observables,
        mean,
        std_error,
        n_trajectories,
        master_seed,
        emissions: total.emissions,
        jumps: total.jumps,
        large_jump_steps: total.large_jump_steps,
    })
}
