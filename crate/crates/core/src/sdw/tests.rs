use super::*;
use crate::schemes::InitialState;

fn engine(c: &SchemeConfig) -> SdwEngine {
    SdwEngine::new(c).unwrap()
}

fn open() -> SchemeConfig {
    SchemeConfig::new(Scheme::InfiniteWaveguide)
}

fn state_with(e: &SdwEngine, w: u128, s: usize) -> SdwState {
    let mut st = e.initial_state(trajectory_rng(0, 0));
    st.amplitudes.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    st.amplitudes[joint_index(e.basis.index_of(w).unwrap(), s, e.system_dim())] = C64::new(1.0, 0.0);
    st
}

#[test]
fn no_channels_never_jump() {
    let e = engine(&open());
    let mut st = e.initial_state(trajectory_rng(1, 0));
    let check = e.lindblad_jump_check(&mut st, 0.05).unwrap();
    assert_eq!(check, JumpCheck { probability: 0.0, jumped: None });
}

#[test]
fn ground_state_has_no_decay_jump() {
    let c = SchemeConfig { gamma0: 0.7, initial: InitialState::default(), ..open() };
    let e = engine(&c);
    let mut st = e.initial_state(trajectory_rng(1, 0));
    assert_eq!(e.lindblad_jump_check(&mut st, 0.05).unwrap().probability, 0.0);
}

#[test]
fn jump_probability_is_expectation_times_step() {
    let c = SchemeConfig { gamma0: 0.1, ..open() };
    let e = engine(&c);
    let mut st = e.initial_state(trajectory_rng(1, 0));
    let p = e.lindblad_jump_check(&mut st, 0.05).unwrap().probability;
    assert!((p - 0.005).abs() < 1e-15);
    // Dephasing has ⟨σ_z²⟩ = 1 in any state.
    let c = SchemeConfig { gamma_p: 0.2, ..open() };
    let e = engine(&c);
    let mut st = e.initial_state(trajectory_rng(1, 0));
    assert!((e.lindblad_jump_check(&mut st, 0.05).unwrap().probability - 0.005).abs() < 1e-15);
}

#[test]
fn vacuum_output_never_detects() {
    let e = engine(&SchemeConfig { photon_cap: 2, ..open() });
    for seed in 0..20 {
        let mut st = e.initial_state(trajectory_rng(seed, 0));
        let before = st.amplitudes.clone();
        assert_eq!(e.measure_output_boxes(&mut st).unwrap(), None);
        assert_eq!(st.amplitudes, before);
    }
}

#[test]
fn photon_in_output_box_is_always_detected() {
    let e = engine(&open());
    let b = &e.basis;
    for seed in 0..20 {
        let mut st = state_with(&e, 1u128 << b.mode(1, 0), 0);
        st.rng = trajectory_rng(seed, 3);
        assert_eq!(e.measure_output_boxes(&mut st).unwrap(), Some(Detection::One(Row::Right)));
        assert_eq!(st.amplitudes[joint_index(0, 0, 2)], C64::new(1.0, 0.0));
    }
}

#[test]
fn double_output_occupation_detected_together() {
    let e = engine(&SchemeConfig { photon_cap: 2, ..open() });
    let b = &e.basis;
    let mut st = state_with(&e, (1u128 << b.mode(0, 0)) | (1u128 << b.mode(1, 0)), 1);
    assert_eq!(e.measure_output_boxes(&mut st).unwrap(), Some(Detection::Both));
    assert_eq!(st.amplitudes[joint_index(0, 1, 2)], C64::new(1.0, 0.0));
}

#[test]
fn shift_moves_photon_one_box() {
    let e = engine(&open());
    let b = &e.basis;
    let mut st = state_with(&e, 1u128 << b.mode(1, 3), 1);
    e.shift_boxes(&mut st).unwrap();
    let i = joint_index(b.index_of(1u128 << b.mode(1, 2)).unwrap(), 1, 2);
    assert_eq!(st.amplitudes[i], C64::new(1.0, 0.0));
    let mut vac = e.initial_state(trajectory_rng(0, 0));
    let before = vac.amplitudes.clone();
    e.shift_boxes(&mut vac).unwrap();
    assert_eq!(vac.amplitudes, before);
}

#[test]
fn shift_rejects_occupied_output() {
    let e = engine(&open());
    let mut st = state_with(&e, 1u128 << e.basis.mode(0, 0), 0);
    assert_eq!(e.shift_boxes(&mut st), Err(SdwError::OccupiedOutput));
}

#[test]
fn frozen_emitter_stays_excited() {
    let c = SchemeConfig { gamma_l1: 0.0, gamma_r1: 0.0, ..open() };
    let traj = engine(&c).run_trajectory(trajectory_rng(5, 0)).unwrap();
    assert!(traj.populations.iter().all(|p| p[0] == 1.0));
    assert!(traj.emissions.is_empty());
}

#[test]
fn open_trajectory_shows_delayed_conditioning() {
    let c = SchemeConfig { t_max: 8.0, ..open() };
    let e = engine(&c);
    let n = e.geometry.boxes_n;
    let cos2 = c.dt.sqrt().cos().powi(2);
    for seed in 0..10 {
        let traj = e.run_trajectory(trajectory_rng(seed, 0)).unwrap();
        // Nothing can be detected until the first photon reaches box 0.
        for k in 0..n {
            assert!((traj.populations[k][0] - cos2.powi(k as i32)).abs() < 1e-12);
        }
        assert!(traj.emissions.len() <= 1);
        if let Some(em) = traj.emissions.first() {
            assert!(em.step >= n - 1);
            assert!(traj.populations[em.step..].iter().all(|p| p[0] == 0.0));
        }
    }
}

#[test]
fn trapped_trajectories_lock_or_collapse() {
    let c = SchemeConfig { t_max: 10.0, ..SchemeConfig::new(Scheme::Feedback) };
    let e = engine(&c);
    let (mut locked, mut collapsed) = (0, 0);
    for seed in 0..40 {
        let traj = e.run_trajectory(trajectory_rng(9, seed)).unwrap();
        let last = traj.populations.len() - 1;
        if traj.emissions.is_empty() {
            let late = &traj.populations[last - 80..];
            let spread = late.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
                - late.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-3, "{spread}");
            assert!(traj.populations[last][0] > 0.3);
            locked += 1;
        } else {
            assert_eq!(traj.populations[last][0], 0.0);
            collapsed += 1;
        }
    }
    assert!(locked > 0 && collapsed > 0);
}

#[test]
fn norm_is_one_after_every_step() {
    let c = SchemeConfig {
        omega1: 3.0,
        photon_cap: 2,
        gamma0: 0.2,
        tau: 0.5,
        t_max: 3.0,
        sub_steps: 4,
        ..SchemeConfig::new(Scheme::Feedback)
    };
    let e = engine(&c);
    let mut st = e.initial_state(trajectory_rng(3, 1));
    let mut traj = Trajectory::default();
    for k in 1..=e.geometry.steps {
        e.step(&mut st, k, &mut traj).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn single_trajectory_ensemble_is_stream_zero() {
    let c = SchemeConfig { t_max: 2.0, ..SchemeConfig::new(Scheme::Feedback) };
    let e = engine(&c);
    let ens = ensemble_average(&e, 1, 77, 2).unwrap();
    let traj = e.run_trajectory(trajectory_rng(77, 0)).unwrap();
    let pop: Vec<f64> = traj.populations.iter().map(|p| p[0]).collect();
    assert_eq!(ens.mean[0], pop);
    assert!(ens.std_error[0].iter().all(|&s| s == 0.0));
}

#[test]
fn ensemble_independent_of_worker_count() {
    let c = SchemeConfig { omega1: 2.0, tau: 0.5, t_max: 2.0, photon_cap: 2, ..SchemeConfig::new(Scheme::TwoTls) };
    let e = engine(&c);
    let reference = ensemble_average(&e, 50, 11, 1).unwrap();
    for workers in [2, 3, 8] {
        assert_eq!(ensemble_average(&e, 50, 11, workers).unwrap(), reference);
    }
    assert_ne!(ensemble_average(&e, 50, 12, 1).unwrap().mean, reference.mean);
}

#[test]
fn empty_ensemble_rejected() {
    let e = engine(&open());
    assert_eq!(ensemble_average(&e, 0, 1, 1), Err(SdwError::NoTrajectories));
}

#[test]
fn excitation_accounted_for_in_every_trajectory() {
    let c = SchemeConfig { tau: 0.5, t_max: 4.0, ..SchemeConfig::new(Scheme::Feedback) };
    let e = engine(&c);
    for seed in 0..20 {
        let traj = e.run_trajectory(trajectory_rng(seed, 0)).unwrap();
        for k in 0..traj.populations.len() {
            let total = traj.populations[k][0] + traj.photons[k] + traj.detected[k] as f64;
            assert!((total - 1.0).abs() < 1e-10, "{total}");
        }
    }
}

#[test]
fn mean_detection_time_matches_waiting_time_oracle() {
    let c = SchemeConfig { t_max: 10.0, ..open() };
    let e = engine(&c);
    let ens = ensemble_average(&e, 2000, 2024, 1).unwrap();
    let n = e.geometry.boxes_n;
    let steps = e.geometry.steps;
    // Emission during step s is detected at step s + N − 1.
    let cos2 = c.dt.sqrt().cos().powi(2);
    let pop = |k: usize| cos2.powi(k as i32);
    let (mut weight, mut moment) = (0.0, 0.0);
    for s in 1..=steps + 1 - n {
        let p = pop(s - 1) - pop(s);
        weight += p;
        moment += p * (s + n - 1) as f64 * c.dt;
    }
    let expect = moment / weight;
    let times: Vec<f64> = ens.emissions.iter().map(|(_, em)| em.t).collect();
    let m = times.len() as f64;
    let mean = times.iter().sum::<f64>() / m;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    assert!((mean - expect).abs() < 3.0 * se, "{mean} vs {expect} ± {se}");
    assert!((expect - (1.0 + n as f64 * c.dt)).abs() < 0.1);
}

#[test]
fn variance_of_mean_scales_inversely_with_ensemble_size() {
    let c = SchemeConfig { t_max: 2.0, ..open() };
    let e = engine(&c);
    let mut scaled = Vec::new();
    for n in [100, 400, 1600] {
        let ens = ensemble_average(&e, n, 5, 1).unwrap();
        let mean_var: f64 = ens.std_error[0].iter().map(|s| s * s).sum::<f64>() / ens.times.len() as f64;
        scaled.push(mean_var * n as f64);
    }
    for w in scaled.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.7..1.4).contains(&ratio), "{scaled:?}");
    }
}

#[test]
fn single_excitation_runs_ignore_the_photon_cap() {
    let c = SchemeConfig { t_max: 3.0, tau: 0.5, ..SchemeConfig::new(Scheme::Feedback) };
    let one = ensemble_average(&engine(&c), 200, 8, 1).unwrap();
    let two = ensemble_average(&engine(&SchemeConfig { photon_cap: 2, ..c }), 200, 8, 1).unwrap();
    for k in 0..one.times.len() {
        let se = one.std_error[0][k].hypot(two.std_error[0][k]);
        assert!((one.mean[0][k] - two.mean[0][k]).abs() <= 3.0 * se + 1e-12);
    }
    // The two-photon sector is never reached, so the trajectories coincide.
    assert!(one.mean[0].iter().zip(&two.mean[0]).all(|(a, b)| (a - b).abs() < 1e-10));
}
