//! Independent reference solutions: closed-form decay, the resonant optical
//! Bloch equations, and the single-excitation delay equations.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::schemes::{lowering, system_hamiltonian, validate, Scheme, SchemeConfig, SchemeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    ClosedForm,
    BlochOde,
    DelayOde,
}

/// Reference populations; `series[n][k]` is emitter `n` at `times[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCurve {
    pub method: OracleMethod,
    pub times: Vec<f64>,
    pub series: Vec<Vec<f64>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Config(#[from] SchemeError),
    #[error("rate must be non-negative and finite, got {0}")]
    BadRate(f64),
    #[error("the Bloch oracle covers the infinite waveguide only")]
    NotOpenWaveguide,
    #[error("the delay oracle needs a delayed scheme")]
    NoDelay,
    #[error("the delay oracle is linear in the amplitudes and needs omega = 0")]
    Driven,
    #[error("the delay oracle holds at most one excitation")]
    TooManyExcitations,
    #[error("the delay oracle has no Lindblad channels")]
    Dissipative,
    #[error("times must be finite, non-negative and non-decreasing")]
    BadTimes,
    #[error("adaptive integrator step size underflow at t = {0}")]
    StepUnderflow(f64),
}

fn check_times(times: &[f64]) -> Result<(), OracleError> {
    let ok = times.iter().all(|t| t.is_finite() && *t >= 0.0) && times.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(OracleError::BadTimes)
    }
}

/// `e^{−γt}`.
pub fn exp_decay(gamma: f64, times: &[f64]) -> Result<OracleCurve, OracleError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(OracleError::BadRate(gamma));
    }
    check_times(times)?;
    Ok(OracleCurve {
        method: OracleMethod::ClosedForm,
        times: times.to_vec(),
        series: vec![times.iter().map(|t| (-gamma * t).exp()).collect()],
    })
}

/// Steady excited population of `H = Ω(σ⁺+σ⁻)` with total decay `γ`.
pub fn bloch_steady_population(omega: f64, gamma: f64) -> f64 {
    omega * omega / (gamma * gamma / 4.0 + 2.0 * omega * omega)
}

/// Excited population of a resonantly driven TLS with waveguide decay,
/// off-chip decay and pure dephasing, integrated as a master equation with
/// an adaptive Dormand–Prince scheme at `tol` local tolerance.
pub fn bloch(config: &SchemeConfig, times: &[f64], tol: f64) -> Result<OracleCurve, OracleError> {
    if config.scheme != Scheme::InfiniteWaveguide {
        return Err(OracleError::NotOpenWaveguide);
    }
    validate(config)?;
    check_times(times)?;

    let h = system_hamiltonian(config);
    let sm = lowering(1, 0);
    let sz = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]]);
    let mut jumps = Vec::new();
    for (rate, op) in [(config.gamma_l1 + config.gamma_r1, &sm), (config.gamma0, &sm), (config.gamma_p / 2.0, &sz)] {
        if rate > 0.0 {
            jumps.push(op.scale_real(rate.sqrt()));
        }
    }
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let rho = unpack(y);
        let comm = &(&h * &rho) - &(&rho * &h);
        let mut d = comm.scale(C64::new(0.0, -1.0));
        for l in &jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            let sandwich = &(l * &rho) * &ld;
            let anti = &(&ldl * &rho) + &(&rho * &ldl);
            d = &d + &(&sandwich - &anti.scale_real(0.5));
        }
        pack(&d, dy);
    };

    let mut y0 = vec![0.0; 8];
    let s = config.initial.system_index();
    let mut rho0 = ComplexMatrix::zeros(2, 2);
    rho0[(s, s)] = C64::new(1.0, 0.0);
    pack(&rho0, &mut y0);
    let ys = dormand_prince(rhs, &y0, times, tol)?;
    Ok(OracleCurve {
        method: OracleMethod::BlochOde,
        times: times.to_vec(),
        series: vec![ys.iter().map(|y| y[6]).collect()],
    })
}

fn pack(m: &ComplexMatrix, out: &mut [f64]) {
    for (k, z) in m.as_slice().iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unpack(y: &[f64]) -> ComplexMatrix {
    let data = y.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    ComplexMatrix::from_vec(2, 2, data).expect("2x2 density matrix")
}

/// Adaptive 5(4) Runge–Kutta with the Dormand–Prince tableau; returns the
/// state at each requested output time (steps are clipped to land on them).
pub fn dormand_prince<F>(mut f: F, y0: &[f64], times: &[f64], tol: f64) -> Result<Vec<Vec<f64>>, OracleError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] =
        [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t: f64 = 0.0;
    let mut h: f64 = 1e-3;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut out = Vec::with_capacity(times.len());

    for &target in times {
        while t < target {
            let clipped = h > target - t;
            let step = if clipped { target - t } else { h };
            if step < 1e-14 * target.max(1.0) {
                t = target;
                break;
            }
            f(t, &y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    tmp[i] = y[i] + step * (0..s).map(|j| A[s - 1][j] * k[j][i]).sum::<f64>();
                }
                f(t + C[s] * step, &tmp, &mut k[s]);
            }
            let mut err: f64 = 0.0;
            for i in 0..n {
                y5[i] = y[i] + step * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>();
                let e = step * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
                err = err.max((e / scale).abs());
            }
            if err <= 1.0 {
                t += step;
                y.copy_from_slice(&y5);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to hit an output time says nothing about
            // the admissible step size.
            h = if clipped && err <= 1.0 { h.max(step * factor) } else { step * factor };
            if h < 1e-14 {
                return Err(OracleError::StepUnderflow(t));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Default fine steps per delay interval.
pub const DELAY_STEPS_PER_TAU: usize = 1000;

/// Single-excitation amplitudes under delayed self-coupling, integrated by
/// the method of steps with fixed-step classical RK4.
///
/// Mirror: `ċ = −(γ/2)c − √(γ_Lγ_R) e^{−iφ} c(t−τ)`.
/// Two emitters: `ċ₁ = −(γ₁/2)c₁ − √(γ_R1γ_R2) e^{iφ} c₂(t−τ)` and
/// `ċ₂ = −(γ₂/2)c₂ − √(γ_L1γ_L2) e^{iφ} c₁(t−τ)`. Delayed terms vanish for
/// `t < τ`. The step is `τ / steps_per_tau` so the delay is an exact
/// multiple; midpoint history comes from cubic Hermite interpolation.
pub fn delay_amplitude(config: &SchemeConfig, times: &[f64], steps_per_tau: usize) -> Result<OracleCurve, OracleError> {
    let c = config;
    if !c.scheme.has_delay() {
        return Err(OracleError::NoDelay);
    }
    validate(c)?;
    check_times(times)?;
    if c.omega1 != 0.0 || c.omega2 != 0.0 {
        return Err(OracleError::Driven);
    }
    if c.gamma0 != 0.0 || c.gamma_p != 0.0 {
        return Err(OracleError::Dissipative);
    }
    if c.initial.excitations() > 1 {
        return Err(OracleError::TooManyExcitations);
    }

    let (a, b): (Vec<C64>, [[C64; 2]; 2]) = match c.scheme {
        Scheme::Feedback => (
            vec![C64::new(-(c.gamma_l1 + c.gamma_r1) / 2.0, 0.0)],
            [[-C64::from_polar((c.gamma_l1 * c.gamma_r1).sqrt(), -c.phi), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0); 2]],
        ),
        Scheme::TwoTls => (
            vec![C64::new(-(c.gamma_l1 + c.gamma_r1) / 2.0, 0.0), C64::new(-(c.gamma_l2 + c.gamma_r2) / 2.0, 0.0)],
            [
                [C64::new(0.0, 0.0), -C64::from_polar((c.gamma_r1 * c.gamma_r2).sqrt(), c.phi)],
                [-C64::from_polar((c.gamma_l1 * c.gamma_l2).sqrt(), c.phi), C64::new(0.0, 0.0)],
            ],
        ),
        Scheme::InfiniteWaveguide => unreachable!(),
    };
    let dim = a.len();
    let mut c0 = vec![C64::new(0.0, 0.0); dim];
    if c.initial.tls1.is_excited() {
        c0[0] = C64::new(1.0, 0.0);
    }
    if dim == 2 && c.initial.tls2.is_excited() {
        c0[1] = C64::new(1.0, 0.0);
    }

    let steps_per_tau = steps_per_tau.max(1);
    let h = c.tau / steps_per_tau as f64;
    let t_end = times.last().copied().unwrap_or(0.0);
    let total = (t_end / h).ceil() as usize + 1;

    let deriv = |now: &[C64], delayed: &[C64], out: &mut [C64]| {
        for i in 0..dim {
            out[i] = a[i] * now[i] + (0..dim).map(|j| b[i][j] * delayed[j]).sum::<C64>();
        }
    };
    let zero = vec![C64::new(0.0, 0.0); dim];

    // hist[k] = c(k h); right[k]/left[k] = one-sided derivatives at k h.
    let mut hist: Vec<Vec<C64>> = Vec::with_capacity(total + 1);
    let mut right: Vec<Vec<C64>> = Vec::with_capacity(total + 1);
    let mut left: Vec<Vec<C64>> = Vec::with_capacity(total + 1);
    let mut d = vec![C64::new(0.0, 0.0); dim];
    hist.push(c0.clone());
    deriv(&c0, &zero, &mut d);
    right.push(d.clone());
    left.push(d.clone());

    let delayed_at = |hist: &[Vec<C64>], right: &[Vec<C64>], left: &[Vec<C64>], k: usize, half: bool| -> Vec<C64> {
        // Value at (k + ½·half)·h − τ.
        if k < steps_per_tau {
            return zero.clone();
        }
        let j = k - steps_per_tau;
        if !half {
            return hist[j].clone();
        }
        (0..dim).map(|i| (hist[j][i] + hist[j + 1][i]) * 0.5 + (right[j][i] - left[j + 1][i]) * (h / 8.0)).collect()
    };

    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for k in 0..total {
        let y = hist[k].clone();
        let d0 = delayed_at(&hist, &right, &left, k, false);
        let dm = delayed_at(&hist, &right, &left, k, true);
        // Left limit at the end of the step: forcing is still off at t = τ⁻.
        let d1 = if k + 1 == steps_per_tau { zero.clone() } else { delayed_at(&hist, &right, &left, k + 1, false) };
        deriv(&y, &d0, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + k1[i] * (h / 2.0);
        }
        deriv(&tmp, &dm, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + k2[i] * (h / 2.0);
        }
        deriv(&tmp, &dm, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + k3[i] * h;
        }
        deriv(&tmp, &d1, &mut k4);
        let next: Vec<C64> = (0..dim).map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)).collect();
        // The delayed forcing switches on at t = τ, so the derivative there
        // is one-sided; every other grid point is smooth enough for cubic
        // Hermite interpolation.
        let mut dl = vec![C64::new(0.0, 0.0); dim];
        let mut dr = vec![C64::new(0.0, 0.0); dim];
        let on = delayed_at(&hist, &right, &left, k + 1, false);
        deriv(&next, &on, &mut dr);
        if k + 1 == steps_per_tau {
            deriv(&next, &zero, &mut dl);
        } else {
            dl.copy_from_slice(&dr);
        }
        hist.push(next);
        right.push(dr);
        left.push(dl);
    }

    let series = (0..dim)
        .map(|i| {
            times
                .iter()
                .map(|&t| {
                    let x = t / h;
                    let j = (x.floor() as usize).min(total - 1);
                    let s = x - j as f64;
                    let (p0, p1) = (hist[j][i], hist[j + 1][i]);
                    let (m0, m1) = (right[j][i] * h, left[j + 1][i] * h);
                    let s2 = s * s;
                    let s3 = s2 * s;
                    let v = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                        + m0 * (s3 - 2.0 * s2 + s)
                        + p1 * (-2.0 * s3 + 3.0 * s2)
                        + m1 * (s3 - s2);
                    v.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(OracleCurve { method: OracleMethod::DelayOde, times: times.to_vec(), series })
}

/// Long-time trapped population of the symmetric mirror scheme at `φ = π`,
/// `1 / (1 + γτ/2)²` for `γ_L = γ_R = γ/2`.
pub fn mirror_plateau(gamma: f64, tau: f64) -> f64 {
    1.0 / (1.0 + gamma * tau / 2.0).powi(2)
}
