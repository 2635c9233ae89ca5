use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use wgqed::mps;
use wgqed::oracles::{bloch, delay_amplitude, exp_decay, OracleCurve, DELAY_STEPS_PER_TAU};
use wgqed::schemes::{validate, Row, Scheme, SchemeConfig};
use wgqed::sdw::{ensemble_average, Detection, EnsembleResult, SdwEngine};

use crate::manifest::{Observable, RunManifest};
use crate::table::Table;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance of the adaptive Bloch integrator.
const BLOCH_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// `(suffix, table)`; written as `<output>.<suffix>.csv`.
    pub tables: Vec<(&'static str, Table)>,
    /// Non-reproducible facts about the run: timings, truncation, sizes.
    pub facts: Vec<(String, String)>,
}

impl RunOutput {
    pub fn table(&self, suffix: &str) -> Option<&Table> {
        self.tables.iter().find(|(s, _)| *s == suffix).map(|(_, t)| t)
    }
}

fn pop_columns(k: usize) -> Vec<String> {
    (1..=k).map(|n| format!("pop{n}")).collect()
}

fn base_table(m: &RunManifest, engine: &str, columns: Vec<String>) -> Table {
    Table::new(columns)
        .with_meta("wgqed", VERSION)
        .with_meta("engine", engine)
        .with_meta("scheme", m.config.scheme.name())
}

pub fn run_mps(m: &RunManifest) -> Result<(Table, mps::MpsRun), CliError> {
    let c = &m.config;
    let g = validate(c).map_err(|e| CliError::Usage(e.to_string()))?;
    let result = mps::run(c, &g, &m.mps_options())?;
    let entropy = m.observables.contains(&Observable::Entropy);
    let mut cols = vec!["t".to_string()];
    cols.extend(pop_columns(c.scheme.tls_count()));
    if entropy {
        cols.push("entropy".into());
    }
    let mut t =
        base_table(m, "mps", cols).with_meta("chi_max", m.chi_max).with_meta("rel_tol", format!("{:e}", m.rel_tol));
    for r in &result.records {
        let mut row = vec![r.t];
        row.extend(&r.populations);
        if entropy {
            row.push(r.entropy.unwrap_or(f64::NAN));
        }
        t.push(row);
    }
    Ok((t, result))
}

pub fn run_sdw(m: &RunManifest) -> Result<(Table, EnsembleResult, SdwEngine), CliError> {
    let engine = SdwEngine::new(&m.config)?;
    let ens = ensemble_average(&engine, m.trajectories, m.master_seed, m.workers)?;
    let mut cols = vec!["t".to_string()];
    for o in &ens.observables {
        cols.push(o.clone());
        cols.push(format!("{o}_se"));
    }
    let mut t = base_table(m, "sdw", cols)
        .with_meta("trajectories", m.trajectories)
        .with_meta("master_seed", m.master_seed)
        .with_meta("photon_cap", m.config.photon_cap);
    for (k, &time) in ens.times.iter().enumerate() {
        let mut row = vec![time];
        for o in 0..ens.observables.len() {
            row.push(ens.mean[o][k]);
            row.push(ens.std_error[o][k]);
        }
        t.push(row);
    }
    Ok((t, ens, engine))
}

/// Reference curve for the configuration: closed form, Bloch equations or
/// the delay equations.
pub fn oracle_curve(c: &SchemeConfig, times: &[f64]) -> Result<OracleCurve, CliError> {
    let lossless = c.gamma0 == 0.0 && c.gamma_p == 0.0;
    Ok(match c.scheme {
        Scheme::InfiniteWaveguide if c.omega1 == 0.0 && lossless && c.initial.tls1.is_excited() => {
            exp_decay(c.gamma_l1 + c.gamma_r1, times)?
        }
        Scheme::InfiniteWaveguide => bloch(c, times, BLOCH_TOL)?,
        _ => delay_amplitude(c, times, DELAY_STEPS_PER_TAU)?,
    })
}

pub fn run_oracle(m: &RunManifest) -> Result<Table, CliError> {
    let c = &m.config;
    let g = validate(c).map_err(|e| CliError::Usage(e.to_string()))?;
    let times: Vec<f64> = (0..=g.steps).map(|k| k as f64 * c.dt).collect();
    let curve = oracle_curve(c, &times)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(pop_columns(curve.series.len()));
    let mut t = base_table(m, "oracle", cols).with_meta("method", format!("{:?}", curve.method));
    for (k, &time) in times.iter().enumerate() {
        let mut row = vec![time];
        row.extend(curve.series.iter().map(|s| s[k]));
        t.push(row);
    }
    Ok(t)
}

/// Row code in the emission table: 0 left (or the mirror loop), 1 right,
/// 2 both at once.
pub fn detection_code(d: Detection) -> f64 {
    match d {
        Detection::One(Row::Loop) | Detection::One(Row::Left) => 0.0,
        Detection::One(Row::Right) => 1.0,
        Detection::Both => 2.0,
    }
}

fn emission_table(m: &RunManifest, ens: &EnsembleResult) -> Table {
    let cols = ["trajectory", "step", "t", "row"].iter().map(|s| s.to_string()).collect();
    let mut t = base_table(m, "sdw", cols).with_meta("master_seed", m.master_seed);
    for &(traj, e) in &ens.emissions {
        t.push(vec![traj as f64, e.step as f64, e.t, detection_code(e.detection)]);
    }
    t
}

fn seconds(d: Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

pub fn execute(m: &RunManifest) -> Result<RunOutput, CliError> {
    let mut tables = Vec::new();
    let mut facts = vec![("wgqed".to_string(), VERSION.to_string())];
    if m.engine.runs_mps() {
        let start = Instant::now();
        let (t, run) = run_mps(m)?;
        facts.push(("wall_clock_mps_s".into(), seconds(start.elapsed())));
        facts.push(("mps_discarded_weight".into(), format!("{:e}", run.discarded_weight)));
        facts.push(("mps_max_bond".into(), run.max_bond.to_string()));
        tables.push(("mps", t));
    }
    if m.engine.runs_sdw() {
        let start = Instant::now();
        let (t, ens, engine) = run_sdw(m)?;
        facts.push(("wall_clock_sdw_s".into(), seconds(start.elapsed())));
        facts.push(("sdw_dimension".into(), engine.dim().to_string()));
        facts.push(("sdw_propagator_nnz".into(), engine.propagator.nnz().to_string()));
        facts.push(("sdw_jumps".into(), ens.jumps.to_string()));
        facts.push(("sdw_large_jump_steps".into(), ens.large_jump_steps.to_string()));
        tables.push(("sdw", t));
        if m.observables.contains(&Observable::EmissionRecord) {
            tables.push(("emissions", emission_table(m, &ens)));
        }
    }
    if m.engine == crate::manifest::Engine::Oracle {
        let start = Instant::now();
        tables.push(("oracle", run_oracle(m)?));
        facts.push(("wall_clock_oracle_s".into(), seconds(start.elapsed())));
    }
    Ok(RunOutput { tables, facts })
}

pub fn table_path(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}.{suffix}.csv", prefix.display()))
}

pub fn meta_path(prefix: &Path) -> PathBuf {
    PathBuf::from(format!("{}.meta", prefix.display()))
}

/// Sidecar record: facts as comments, then the resolved manifest. The
/// file is itself a valid configuration reproducing the run.
pub fn metadata_text(m: &RunManifest, out: &RunOutput) -> String {
    let mut s = String::new();
    for (k, v) in &out.facts {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s.push_str(&m.to_text());
    s
}

/// Writes every table and the sidecar; returns the paths written.
pub fn write_outputs(m: &RunManifest, prefix: &Path, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut written = Vec::new();
    for (suffix, t) in &out.tables {
        let p = table_path(prefix, suffix);
        t.write(&p)?;
        written.push(p);
    }
    let p = meta_path(prefix);
    std::fs::write(&p, metadata_text(m, out)).map_err(|e| CliError::io(&p, e))?;
    written.push(p);
    Ok(written)
}
