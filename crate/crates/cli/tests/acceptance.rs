//! End-to-end acceptance checks, one verdict line per criterion.
//!
//! Runs as a plain binary so that the verdicts are printed in order. The
//! strong-drive case is extended and only runs with `--ignored` or
//! `--include-ignored`; a bare word argument selects criteria by id.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use wgqed::mps::{self, build_gate, MpsOptions, MpsState};
use wgqed::oracles::{delay_amplitude, exp_decay, DELAY_STEPS_PER_TAU};
use wgqed::schemes::{validate, InitialState, Level, Scheme, SchemeConfig};
use wgqed::sdw::{build_basis, ensemble_average, trajectory_rng, EnsembleResult, SdwEngine};

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.to_string(), pass, detail }
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    extended: bool,
    /// Informational criteria print a verdict but never fail the run.
    informational: bool,
    run: fn() -> Vec<Check>,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "1", title: "basis sizes", extended: false, informational: false, run: c1_basis_sizes },
    Criterion { id: "2", title: "open waveguide decay", extended: false, informational: false, run: c2_open_decay },
    Criterion { id: "3", title: "feedback trapping", extended: false, informational: false, run: c3_feedback_trapping },
    Criterion {
        id: "4",
        title: "dissipation breaks trapping",
        extended: false,
        informational: false,
        run: c4_dissipation,
    },
    Criterion { id: "5a", title: "photon cap under drive", extended: false, informational: false, run: c5a_photon_cap },
    Criterion { id: "5b", title: "strong drive envelope", extended: true, informational: false, run: c5b_strong_drive },
    Criterion {
        id: "6",
        title: "two emitters in vacuum",
        extended: false,
        informational: false,
        run: c6_two_tls_vacuum,
    },
    Criterion { id: "7", title: "two emitters driven", extended: false, informational: false, run: c7_two_tls_driven },
    Criterion { id: "8", title: "entanglement entropy", extended: false, informational: false, run: c8_entropy },
    Criterion { id: "9", title: "property suites", extended: false, informational: false, run: c9_properties },
    Criterion { id: "10", title: "benchmark direction", extended: false, informational: true, run: c10_benchmark },
];

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for c in CRITERIA {
            println!("criterion_{}: test", c.id);
        }
        return ExitCode::SUCCESS;
    }
    let extended = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for c in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| c.id == f.as_str() || format!("criterion_{}", c.id) == **f) {
            continue;
        }
        if c.extended && !extended {
            println!("criterion {:<3} SKIP  {} (extended, run with --ignored)", c.id, c.title);
            continue;
        }
        let start = Instant::now();
        let checks = (c.run)();
        let pass = checks.iter().all(|k| k.pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = if c.informational { " [informational]" } else { "" };
        println!("criterion {:<3} {verdict}  {}{note} ({:.1} s)", c.id, c.title, start.elapsed().as_secs_f64());
        for k in &checks {
            println!("    {} {}: {}", if k.pass { "ok  " } else { "FAIL" }, k.name, k.detail);
        }
        if !pass && !c.informational {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- helpers

fn config(scheme: Scheme, f: impl FnOnce(&mut SchemeConfig)) -> SchemeConfig {
    let mut c = SchemeConfig::new(scheme);
    f(&mut c);
    c.sub_steps = c.default_sub_steps();
    c
}

fn times(c: &SchemeConfig) -> Vec<f64> {
    let g = validate(c).expect("valid config");
    (0..=g.steps).map(|k| k as f64 * c.dt).collect()
}

/// `pops[n][k]` of every emitter.
fn mps_populations(c: &SchemeConfig, opts: &MpsOptions) -> Vec<Vec<f64>> {
    let g = validate(c).expect("valid config");
    let run = mps::run(c, &g, opts).expect("mps run");
    (0..c.scheme.tls_count()).map(|n| run.records.iter().map(|r| r.populations[n]).collect()).collect()
}

fn mps_default(c: &SchemeConfig) -> Vec<Vec<f64>> {
    mps_populations(c, &MpsOptions::for_config(c))
}

fn sdw(c: &SchemeConfig, n: usize, seed: u64) -> EnsembleResult {
    let e = SdwEngine::new(c).expect("sdw engine");
    ensemble_average(&e, n, seed, 1).expect("ensemble")
}

fn series<'a>(e: &'a EnsembleResult, name: &str) -> (&'a [f64], &'a [f64]) {
    let i = e.observable(name).expect("observable");
    (&e.mean[i], &e.std_error[i])
}

fn oracle(c: &SchemeConfig) -> Vec<Vec<f64>> {
    delay_amplitude(c, &times(c), DELAY_STEPS_PER_TAU).expect("oracle").series
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Indices with `lo ≤ t ≤ hi`.
fn window(ts: &[f64], lo: f64, hi: f64) -> std::ops::Range<usize> {
    let a = ts.partition_point(|&t| t < lo - 1e-9);
    let b = ts.partition_point(|&t| t <= hi + 1e-9);
    a..b
}

fn spread(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x.iter().copied().fold(f64::INFINITY, f64::min)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pointwise agreement up to three standard errors.
///
/// Points where every trajectory coincides (`se` at roundoff level) carry
/// no sampling error; they are held to `|a − b| ≤ det_tol` instead.
struct Pointwise {
    /// Worst `|a − b| / (3·se)` over stochastic points; ≤ 1 passes.
    worst: f64,
    deterministic: usize,
    det_dev: f64,
    det_tol: f64,
}

impl Pointwise {
    fn pass(&self) -> bool {
        self.worst <= 1.0 && self.det_dev <= self.det_tol
    }

    fn describe(&self) -> String {
        format!(
            "worst |Δ|/3SE = {:.3} (≤ 1); {} deterministic points, max |Δ| {:.2e} (≤ {:.0e})",
            self.worst, self.deterministic, self.det_dev, self.det_tol
        )
    }
}

const SE_FLOOR: f64 = 1e-8;

fn pointwise(a: &[f64], b: &[f64], se: &[f64], det_tol: f64) -> Pointwise {
    let mut p = Pointwise { worst: 0.0, deterministic: 0, det_dev: 0.0, det_tol };
    for k in 0..a.len() {
        let d = (a[k] - b[k]).abs();
        if se[k] > SE_FLOOR {
            p.worst = p.worst.max(d / (3.0 * se[k]));
        } else {
            p.deterministic += 1;
            p.det_dev = p.det_dev.max(d);
        }
    }
    p
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Least-squares slope of the local maxima of `y` past `t_start`.
fn envelope_slope(ts: &[f64], y: &[f64], t_start: f64) -> (f64, usize) {
    let peaks: Vec<(f64, f64)> = (1..y.len() - 1)
        .filter(|&k| ts[k] >= t_start && y[k] > y[k - 1] && y[k] >= y[k + 1])
        .map(|k| (ts[k], y[k]))
        .collect();
    let n = peaks.len() as f64;
    if peaks.len() < 2 {
        return (f64::NAN, peaks.len());
    }
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
    let my = peaks.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxy / sxx, peaks.len())
}

// --------------------------------------------------------------- criteria

fn c1_basis_sizes() -> Vec<Check> {
    let geometry = |n: usize| wgqed::schemes::DelayGeometry { l: n, boxes_n: n, photon_cap_m: 2, steps: 1 };
    let one = build_basis(&geometry(20), Scheme::Feedback).unwrap().len() * Scheme::Feedback.system_dim();
    let two = build_basis(&geometry(20), Scheme::TwoTls).unwrap().len() * Scheme::TwoTls.system_dim();
    vec![
        check("one row, N=20, M=2, system dim 2", one == 422, format!("{one} (want 422)")),
        check("two rows, N=20, M=2, system dim 4", two == 3284, format!("{two} (want 3284)")),
    ]
}

fn c2_open_decay() -> Vec<Check> {
    let c = config(Scheme::InfiniteWaveguide, |_| {});
    let exact = |c: &SchemeConfig| exp_decay(c.normalization_rate(), &times(c)).unwrap().series.remove(0);
    let err = |c: &SchemeConfig| sup_diff(&mps_default(c)[0], &exact(c));
    let coarse = err(&c);
    let fine = err(&SchemeConfig { dt: c.dt / 2.0, ..c.clone() });
    let ens = sdw(&c, 2000, 2);
    let (m, se) = series(&ens, "pop1");
    let reference = exact(&c);
    let sdw_sup = sup_diff(m, &reference);
    let z = pointwise(m, &reference, se, 0.01);
    vec![
        check("MPS sup-norm at dt 0.05", coarse <= 0.01, format!("{coarse:.2e} (≤ 0.01)")),
        check("MPS error ratio on halving dt", coarse / fine >= 1.8, format!("{:.3} (≥ 1.8)", coarse / fine)),
        check("SDW(2000, M=1) sup-norm", sdw_sup <= 0.05, format!("{sdw_sup:.4} (≤ 0.05)")),
        check("SDW(2000, M=1) inside 3 SE pointwise", z.pass(), z.describe()),
    ]
}

fn c3_feedback_trapping() -> Vec<Check> {
    let mut out = Vec::new();
    for (label, phi) in [("phi=pi", PI), ("phi=0", 0.0)] {
        let c = config(Scheme::Feedback, |c| {
            c.phi = phi;
            c.tau = 1.0;
            c.t_max = 10.0;
        });
        let ts = times(&c);
        let m = mps_default(&c).remove(0);
        let o = oracle(&c).remove(0);
        let ens = sdw(&c, 2000, 3);
        let (s, _) = series(&ens, "pop1");
        if phi == PI {
            let w = window(&ts, 5.0, 10.0);
            let var = spread(&m[w.clone()]);
            let dm = sup_diff(&m[w.clone()], &o[w.clone()]);
            let ds = sup_diff(&s[w.clone()], &o[w.clone()]);
            out.push(check(
                "phi=pi MPS plateau flat on [5,10]",
                var < 0.01,
                format!("spread {var:.2e} (< 0.01), level {:.4}", mean(&m[w])),
            ));
            out.push(check("phi=pi MPS vs delay oracle on plateau", dm <= 0.01, format!("{dm:.2e} (≤ 0.01)")));
            out.push(check("phi=pi SDW(2000) vs delay oracle on plateau", ds <= 0.05, format!("{ds:.4} (≤ 0.05)")));
        } else {
            let k5 = window(&ts, 5.0, 5.0).start;
            let dm = sup_diff(&m, &o);
            let ds = sup_diff(s, &o);
            out.push(check(&format!("{label} MPS population at t=5"), m[k5] < 0.02, format!("{:.2e} (< 0.02)", m[k5])));
            out.push(check(&format!("{label} SDW population at t=5"), s[k5] < 0.02, format!("{:.2e} (< 0.02)", s[k5])));
            out.push(check(&format!("{label} MPS vs delay oracle"), dm <= 0.01, format!("{dm:.2e} (≤ 0.01)")));
            out.push(check(&format!("{label} SDW(2000) vs delay oracle"), ds <= 0.05, format!("{ds:.4} (≤ 0.05)")));
        }
    }
    out
}

fn c4_dissipation() -> Vec<Check> {
    let mut out = Vec::new();
    for (label, g0, gp) in [("gamma0=0.1", 0.1, 0.0), ("gamma_p=0.1", 0.0, 0.1)] {
        let c = config(Scheme::Feedback, |c| {
            c.t_max = 20.0;
            c.gamma0 = g0;
            c.gamma_p = gp;
        });
        let ts = times(&c);
        let ens = sdw(&c, 1000, 4);
        let (s, _) = series(&ens, "pop1");
        let p5 = s[window(&ts, 5.0, 5.0).start];
        let p20 = *s.last().unwrap();
        let drop = 1.0 - p20 / p5;
        out.push(check(
            &format!("{label} SDW(1000) relative drop t=5 to t=20"),
            drop > 0.2,
            format!("{p5:.4} to {p20:.4}, drop {:.1}% (> 20%)", 100.0 * drop),
        ));
    }
    out
}

fn c5a_photon_cap() -> Vec<Check> {
    let c = config(Scheme::Feedback, |c| {
        c.omega1 = 2.0 * PI;
        c.tau = 2.0;
        c.t_max = 10.0;
    });
    let m = mps_default(&c).remove(0);
    let two = sdw(&SchemeConfig { photon_cap: 2, ..c.clone() }, 3000, 5);
    let one = sdw(&SchemeConfig { photon_cap: 1, ..c.clone() }, 3000, 5);
    let d2 = sup_diff(series(&two, "pop1").0, &m);
    let d1 = sup_diff(series(&one, "pop1").0, &m);
    vec![
        check("M=2 SDW(3000) vs MPS", d2 <= 0.05, format!("{d2:.4} (≤ 0.05)")),
        check("M=1 SDW(3000) deviates from MPS", d1 > 0.05, format!("{d1:.4} (> 0.05)")),
    ]
}

fn c5b_strong_drive() -> Vec<Check> {
    let c = config(Scheme::Feedback, |c| {
        c.omega1 = 8.0 * PI;
        c.tau = 1.0;
        c.dt = 0.02;
        c.t_max = 10.0;
    });
    let ts = times(&c);
    let t_start = 2.0 * c.tau;
    let m = mps_default(&c).remove(0);
    let one = sdw(&SchemeConfig { photon_cap: 1, ..c.clone() }, 3000, 6);
    let two = sdw(&SchemeConfig { photon_cap: 2, ..c.clone() }, 1000, 6);
    let (sm, nm) = envelope_slope(&ts, &m, t_start);
    let (s1, n1) = envelope_slope(&ts, series(&one, "pop1").0, t_start);
    let (s2, n2) = envelope_slope(&ts, series(&two, "pop1").0, t_start);
    vec![
        check("MPS envelope decays", sm < 0.0, format!("slope {sm:.3e} over {nm} maxima (< 0)")),
        check("M=2 SDW(1000) envelope decays", s2 < 0.0, format!("slope {s2:.3e} over {n2} maxima (< 0)")),
        check(
            "M=1 SDW(3000) envelope trapped",
            s1.abs() < 1e-3,
            format!("slope {s1:.3e} over {n1} maxima (|.| < 1e-3)"),
        ),
    ]
}

fn two_tls(tau: f64, t_max: f64, initial: InitialState) -> SchemeConfig {
    config(Scheme::TwoTls, |c| {
        c.tau = tau;
        c.t_max = t_max;
        c.initial = initial;
        c.photon_cap = 2;
    })
}

fn eg() -> InitialState {
    InitialState { tls1: Level::Excited, tls2: Level::Ground }
}

fn c6_two_tls_vacuum() -> Vec<Check> {
    let mut out = Vec::new();
    let ee = two_tls(0.5, 10.0, InitialState::both_excited());
    let m = mps_default(&ee);
    let d = sup_diff(&m[0], &m[1]);
    out.push(check("both excited, MPS pop1 = pop2", d <= 1e-6, format!("{d:.2e} (≤ 1e-6)")));
    let ens = sdw(&ee, 1000, 7);
    let (p1, se1) = series(&ens, "pop1");
    let (p2, se2) = series(&ens, "pop2");
    let se: Vec<f64> = se1.iter().zip(se2).map(|(a, b)| a.hypot(*b)).collect();
    let z = pointwise(p1, p2, &se, 1e-9);
    out.push(check("both excited, SDW(1000) pop1 = pop2 within 3 SE", z.pass(), z.describe()));
    let ds = sup_diff(p1, &m[0]).max(sup_diff(p2, &m[1]));
    out.push(check("both excited, SDW(1000, M=2) vs MPS", ds <= 0.05, format!("{ds:.4} (≤ 0.05)")));

    let mut plateaus = Vec::new();
    // The exchange transient lasts many round trips at the longer delay.
    for (tau, t_max) in [(0.5, 10.0), (2.5, 40.0)] {
        let c = two_tls(tau, t_max, eg());
        let ts = times(&c);
        let w = window(&ts, t_max - 2.0 * tau.max(1.0), t_max);
        let m = mps_default(&c);
        let o = oracle(&c);
        let (a, b) = (mean(&m[0][w.clone()]), mean(&m[1][w.clone()]));
        out.push(check(
            &format!("one excited, tau={tau}, common nonzero plateau"),
            a > 0.01 && (a - b).abs() <= 0.01,
            format!("pop1 {a:.4}, pop2 {b:.4}"),
        ));
        let dm = sup_diff(&m[0], &o[0]).max(sup_diff(&m[1], &o[1]));
        out.push(check(
            &format!("one excited, tau={tau}, MPS vs delay oracle"),
            dm <= 0.01,
            format!("{dm:.2e} (≤ 0.01)"),
        ));
        if tau == 0.5 {
            let ens = sdw(&c, 1000, 8);
            let ds = sup_diff(series(&ens, "pop1").0, &m[0]).max(sup_diff(series(&ens, "pop2").0, &m[1]));
            out.push(check("one excited, tau=0.5, SDW(1000, M=2) vs MPS", ds <= 0.05, format!("{ds:.4} (≤ 0.05)")));
        }
        plateaus.push(0.5 * (a + b));
    }
    out.push(check(
        "plateau lower at tau=2.5 than at tau=0.5",
        plateaus[1] < plateaus[0],
        format!("{:.4} < {:.4}", plateaus[1], plateaus[0]),
    ));
    out
}

fn c7_two_tls_driven() -> Vec<Check> {
    let c = config(Scheme::TwoTls, |c| {
        c.tau = 0.5;
        c.t_max = 10.0;
        c.omega1 = 0.5 * PI;
        c.initial = InitialState { tls1: Level::Ground, tls2: Level::Ground };
        c.photon_cap = 2;
    });
    let ts = times(&c);
    let w = window(&ts, 8.0, 10.0);
    let m = mps_default(&c);
    let ens = sdw(&c, 3000, 9);
    let steady = mean(&m[1][w]);
    let d = sup_diff(series(&ens, "pop1").0, &m[0]).max(sup_diff(series(&ens, "pop2").0, &m[1]));
    vec![
        check("undriven emitter steady population (MPS)", steady > 0.01, format!("{steady:.4} (> 0.01)")),
        check("MPS vs SDW(3000, M=2), both emitters", d <= 0.05, format!("{d:.4} (≤ 0.05)")),
    ]
}

fn c8_entropy() -> Vec<Check> {
    let mut values = Vec::new();
    for tau in [0.5, 1.0, 1.5] {
        let c = two_tls(tau, 10.0, eg());
        let g = validate(&c).unwrap();
        let run = mps::run(&c, &g, &MpsOptions::for_config(&c)).unwrap();
        let tail: Vec<f64> = run.records.iter().filter(|r| r.t >= 8.0 - 1e-9).filter_map(|r| r.entropy).collect();
        values.push((tau, mean(&tail), spread(&tail)));
    }
    let decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);
    let bounded = values.iter().all(|v| (0.0..=2.0).contains(&v.1));
    let text: Vec<String> = values.iter().map(|(t, s, d)| format!("tau {t}: {s:.4} (±{d:.1e})")).collect();
    vec![
        check("steady entropy strictly decreasing in tau", decreasing, text.join(", ")),
        check("entropies within [0, 2] bits", bounded, String::new()),
    ]
}

fn c9_properties() -> Vec<Check> {
    let mut out = Vec::new();

    let driven = config(Scheme::Feedback, |c| {
        c.omega1 = PI;
        c.tau = 0.5;
        c.t_max = 3.0;
    });
    let g = validate(&driven).unwrap();
    let gate = build_gate(&driven, &g);
    let mut st = MpsState::init(&driven, &g, &MpsOptions::for_config(&driven)).unwrap();
    let (mut norm_err, mut canon_err) = (0.0f64, 0.0f64);
    for _ in 0..g.steps {
        st.step(&gate).unwrap();
        norm_err = norm_err.max((st.norm_squared() - 1.0).abs());
        canon_err = canon_err.max(st.canonical_error());
    }
    out.push(check("MPS norm after every step", norm_err < 1e-10, format!("{norm_err:.1e}")));
    out.push(check("MPS canonical form after every step", canon_err < 1e-10, format!("{canon_err:.1e}")));

    let mut unitarity = 0.0f64;
    for c in [
        config(Scheme::InfiniteWaveguide, |c| c.omega1 = 1.0),
        driven.clone(),
        config(Scheme::TwoTls, |c| {
            c.omega1 = 1.0;
            c.tau = 0.5;
        }),
    ] {
        let g = validate(&c).unwrap();
        unitarity = unitarity.max(build_gate(&c, &g).matrix.unitarity_error());
        let e = SdwEngine::new(&SchemeConfig { photon_cap: 2, ..c.clone() }).unwrap();
        unitarity = unitarity.max(e.propagator.to_dense().unitarity_error());
    }
    out.push(check("MPS gates and lossless SDW propagators unitary", unitarity < 1e-10, format!("{unitarity:.1e}")));

    let short = config(Scheme::Feedback, |c| {
        c.omega1 = PI;
        c.tau = 0.25;
        c.t_max = 0.25;
    });
    let g = validate(&short).unwrap();
    let gate = build_gate(&short, &g);
    let mut st = MpsState::init(&short, &g, &MpsOptions::for_config(&short)).unwrap();
    for _ in 0..3 {
        st.step(&gate).unwrap();
    }
    let j = st.oc.min(st.len() - 2);
    let before = st.to_dense();
    st.swap(j, true).unwrap();
    st.swap(j, false).unwrap();
    let after = st.to_dense();
    let diff = before.iter().zip(&after).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.push(check("swap applied twice is the identity", diff < 1e-10, format!("{diff:.1e} on {} sites", st.len())));

    let vacuum = config(Scheme::Feedback, |c| {
        c.tau = 0.5;
        c.t_max = 4.0;
    });
    let g = validate(&vacuum).unwrap();
    let gate = build_gate(&vacuum, &g);
    let mut st = MpsState::init(&vacuum, &g, &MpsOptions::for_config(&vacuum)).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..g.steps {
        st.step(&gate).unwrap();
        let total = st.population(0).unwrap() + st.bin_photon_numbers().iter().sum::<f64>();
        worst = worst.max((total - 1.0).abs());
    }
    let e = SdwEngine::new(&vacuum).unwrap();
    for seed in 0..20 {
        let traj = e.run_trajectory(trajectory_rng(seed, 0)).unwrap();
        for k in 0..traj.populations.len() {
            worst = worst.max((traj.populations[k][0] + traj.photons[k] + traj.detected[k] as f64 - 1.0).abs());
        }
    }
    out.push(check("single excitation conserved (MPS and SDW trajectories)", worst < 1e-9, format!("{worst:.1e}")));

    let c = config(Scheme::TwoTls, |c| {
        c.omega1 = 2.0;
        c.tau = 0.5;
        c.t_max = 2.0;
        c.photon_cap = 2;
    });
    let e = SdwEngine::new(&c).unwrap();
    let reference = ensemble_average(&e, 40, 11, 1).unwrap();
    let same = [2, 3, 8].iter().all(|&w| ensemble_average(&e, 40, 11, w).unwrap() == reference);
    out.push(check("ensemble identical for 1, 2, 3, 8 workers", same, String::new()));

    let open = config(Scheme::InfiniteWaveguide, |c| c.t_max = 2.0);
    let e = SdwEngine::new(&open).unwrap();
    let scaled: Vec<f64> = [100usize, 400, 1600]
        .iter()
        .map(|&n| {
            let ens = ensemble_average(&e, n, 5, 1).unwrap();
            ens.std_error[0].iter().map(|s| s * s).sum::<f64>() / ens.times.len() as f64 * n as f64
        })
        .collect();
    let ratios: Vec<f64> = scaled.windows(2).map(|w| w[1] / w[0]).collect();
    out.push(check(
        "variance of the mean scales as 1/N_T",
        ratios.iter().all(|r| (0.7..1.4).contains(r)),
        format!("N·var ratios {:.3}, {:.3}", ratios[0], ratios[1]),
    ));
    out
}

fn c10_benchmark() -> Vec<Check> {
    let open = config(Scheme::InfiniteWaveguide, |_| {});
    let (_, t_mps) = timed(|| mps_default(&open));
    let (_, t_sdw) = timed(|| sdw(&open, 2000, 10));
    let fb = |tau: f64, cap: usize| {
        config(Scheme::Feedback, |c| {
            c.tau = tau;
            c.omega1 = PI;
            c.t_max = 5.0;
            c.photon_cap = cap;
        })
    };
    let (_, short) = timed(|| sdw(&fb(0.5, 1), 200, 10));
    let (_, long) = timed(|| sdw(&fb(2.0, 1), 200, 10));
    let (_, two) = timed(|| sdw(&fb(2.0, 2), 200, 10));
    vec![
        check("scheme (i): MPS faster than SDW(2000)", t_mps < t_sdw, format!("MPS {t_mps:.3} s, SDW {t_sdw:.3} s")),
        check("SDW slows with tau (0.5 to 2)", long > short, format!("{short:.3} s to {long:.3} s")),
        check("SDW slows with M (1 to 2, tau 2)", two > long, format!("{long:.3} s to {two:.3} s")),
    ]
}
