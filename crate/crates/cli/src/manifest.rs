//! Flat `key = value` run configuration.
//!
//! `#` starts a comment, blank lines are ignored, every key may appear at
//! most once and unknown keys are errors. Command-line flags `--key value`
//! override file entries.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use thiserror::Error;
use wgqed::mps::MpsOptions;
use wgqed::schemes::{validate, InitialState, Level, Scheme, SchemeConfig};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Manifest,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => write!(f, "command line"),
            Origin::Manifest => write!(f, "manifest"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Mps,
    Sdw,
    Both,
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Mps => "mps",
            Engine::Sdw => "sdw",
            Engine::Both => "both",
            Engine::Oracle => "oracle",
        }
    }

    pub fn runs_mps(self) -> bool {
        matches!(self, Engine::Mps | Engine::Both)
    }

    pub fn runs_sdw(self) -> bool {
        matches!(self, Engine::Sdw | Engine::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observable {
    Population,
    Entropy,
    EmissionRecord,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Population => "population",
            Observable::Entropy => "entropy",
            Observable::EmissionRecord => "emission_record",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: SchemeConfig,
    pub engine: Engine,
    pub trajectories: usize,
    pub chi_max: usize,
    pub rel_tol: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub observables: BTreeSet<Observable>,
}

/// Coarse step when a drive is on and none is given.
pub const DRIVEN_DT: f64 = 0.02;

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "scheme",
    "engine",
    "gamma_l1",
    "gamma_r1",
    "gamma_l2",
    "gamma_r2",
    "omega1",
    "omega2",
    "tau",
    "phi",
    "gamma0",
    "gamma_p",
    "detuning",
    "dt",
    "sub_steps",
    "t_max",
    "initial",
    "photon_cap",
    "boxes",
    "drive_half_convention",
    "trajectories",
    "chi_max",
    "rel_tol",
    "master_seed",
    "workers",
    "output",
    "observables",
];

#[derive(Clone, Debug)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

fn err(origin: Origin, message: impl Into<String>) -> ConfigError {
    ConfigError { origin, message: message.into() }
}

/// Splits a config file into entries; rejects malformed lines, unknown and
/// repeated keys.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::Line(i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err(origin, format!("expected key = value, got '{line}'")))?;
        let key = k.trim().to_string();
        check_key(&key, origin)?;
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(err(origin, format!("'{key}' already set at {}", prev.origin)));
        }
        out.push(Entry { key, value: v.trim().to_string(), origin });
    }
    Ok(out)
}

fn check_key(key: &str, origin: Origin) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(err(origin, format!("unknown key '{key}'")))
    }
}

/// Reads `--key value` and `--key=value` pairs.
pub fn parse_flags(args: &[String]) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let body = a.strip_prefix("--").ok_or_else(|| err(Origin::Flag, format!("expected --key, got '{a}'")))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| err(Origin::Flag, format!("--{body} needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        let key = key.replace('-', "_");
        check_key(&key, Origin::Flag)?;
        out.push(Entry { key, value, origin: Origin::Flag });
    }
    Ok(out)
}

/// Real number, optionally a multiple of π: `0.5`, `pi`, `2pi`, `-0.25*pi`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(coef) = s.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().ok()?,
        };
        return Some(c * std::f64::consts::PI);
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_initial(s: &str, scheme: Scheme) -> Option<InitialState> {
    let level = |c: char| match c {
        'e' => Some(Level::Excited),
        'g' => Some(Level::Ground),
        _ => None,
    };
    let chars: Vec<char> = s.trim().chars().collect();
    match (scheme.tls_count(), chars.as_slice()) {
        (1, [a]) => Some(InitialState { tls1: level(*a)?, tls2: Level::Ground }),
        (2, [a, b]) => Some(InitialState { tls1: level(*a)?, tls2: level(*b)? }),
        _ => None,
    }
}

fn initial_text(s: InitialState, scheme: Scheme) -> String {
    let c = |l: Level| if l.is_excited() { 'e' } else { 'g' };
    if scheme.tls_count() == 1 {
        c(s.tls1).to_string()
    } else {
        format!("{}{}", c(s.tls1), c(s.tls2))
    }
}

impl RunManifest {
    /// File entries first, then flags; a flag replaces the file value.
    pub fn from_sources(file: &str, flags: &[String]) -> Result<Self, ConfigError> {
        let mut entries = parse_entries(file)?;
        for f in parse_flags(flags)? {
            entries.retain(|e| e.key != f.key);
            entries.push(f);
        }
        Self::from_entries(&entries)
    }

    pub fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let get = |k: &str| entries.iter().find(|e| e.key == k);
        let scheme_entry = get("scheme").ok_or_else(|| err(Origin::Manifest, "missing required key 'scheme'"))?;
        let scheme = Scheme::from_name(&scheme_entry.value).ok_or_else(|| {
            err(
                scheme_entry.origin,
                format!("scheme must be infinite, feedback or two_tls, got '{}'", scheme_entry.value),
            )
        })?;
        let mut c = SchemeConfig::new(scheme);
        let mut m = RunManifest {
            engine: Engine::Mps,
            trajectories: 1000,
            chi_max: 0,
            rel_tol: 1e-12,
            master_seed: 1,
            workers: 1,
            output: None,
            observables: [Observable::Population].into_iter().collect(),
            config: c.clone(),
        };
        let mut chi = None;
        let mut sub_steps = None;
        let mut dt = None;

        for e in entries {
            let o = e.origin;
            let v = e.value.as_str();
            let real = || parse_real(v).ok_or_else(|| err(o, format!("{}: expected a number, got '{v}'", e.key)));
            let count = || {
                v.parse::<usize>().map_err(|_| err(o, format!("{}: expected a non-negative integer, got '{v}'", e.key)))
            };
            match e.key.as_str() {
                "scheme" => {}
                "engine" => {
                    m.engine = match v {
                        "mps" => Engine::Mps,
                        "sdw" => Engine::Sdw,
                        "both" => Engine::Both,
                        "oracle" => Engine::Oracle,
                        _ => return Err(err(o, format!("engine must be mps, sdw, both or oracle, got '{v}'"))),
                    }
                }
                "gamma_l1" => c.gamma_l1 = real()?,
                "gamma_r1" => c.gamma_r1 = real()?,
                "gamma_l2" => c.gamma_l2 = real()?,
                "gamma_r2" => c.gamma_r2 = real()?,
                "omega1" => c.omega1 = real()?,
                "omega2" => c.omega2 = real()?,
                "tau" => c.tau = real()?,
                "phi" => c.phi = real()?,
                "gamma0" => c.gamma0 = real()?,
                "gamma_p" => c.gamma_p = real()?,
                "detuning" => c.detuning = real()?,
                "dt" => dt = Some(real()?),
                "sub_steps" => sub_steps = Some(count()?),
                "t_max" => c.t_max = real()?,
                "initial" => {
                    c.initial = parse_initial(v, scheme).ok_or_else(|| {
                        err(
                            o,
                            format!(
                                "initial: one e/g letter per emitter ({} for {scheme}), got '{v}'",
                                scheme.tls_count()
                            ),
                        )
                    })?
                }
                "photon_cap" => c.photon_cap = count()?,
                "boxes" => c.boxes = Some(count()?),
                "drive_half_convention" => {
                    c.drive_half_convention = match v {
                        "true" => Some(true),
                        "false" => Some(false),
                        "auto" => None,
                        _ => {
                            return Err(err(o, format!("drive_half_convention must be true, false or auto, got '{v}'")))
                        }
                    }
                }
                "trajectories" => m.trajectories = count()?,
                "chi_max" => chi = Some(count()?),
                "rel_tol" => m.rel_tol = real()?,
                "master_seed" => {
                    m.master_seed = v
                        .parse()
                        .map_err(|_| err(o, format!("master_seed: expected an unsigned integer, got '{v}'")))?
                }
                "workers" => m.workers = count()?,
                "output" => m.output = Some(PathBuf::from(v)),
                "observables" => {
                    let mut set = BTreeSet::new();
                    for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        set.insert(match name {
                            "population" => Observable::Population,
                            "entropy" => Observable::Entropy,
                            "emission_record" => Observable::EmissionRecord,
                            _ => return Err(err(o, format!("unknown observable '{name}'"))),
                        });
                    }
                    m.observables = set;
                }
                other => return Err(err(o, format!("unknown key '{other}'"))),
            }
        }
        let driven = c.omega1 > 0.0 || c.omega2 > 0.0;
        c.dt = dt.unwrap_or(if driven { DRIVEN_DT } else { c.dt });
        c.sub_steps = sub_steps.unwrap_or_else(|| c.default_sub_steps());
        let origin_of = |k: &str| get(k).map_or(Origin::Manifest, |e| e.origin);
        validate(&c).map_err(|e| err(Origin::Manifest, e.to_string()))?;
        m.chi_max = chi.unwrap_or_else(|| MpsOptions::for_config(&c).chi_max);
        m.config = c;

        if m.chi_max == 0 {
            return Err(err(origin_of("chi_max"), "chi_max must be at least 1"));
        }
        if !(0.0..1.0).contains(&m.rel_tol) {
            return Err(err(origin_of("rel_tol"), "rel_tol must lie in [0, 1)"));
        }
        if m.trajectories == 0 {
            return Err(err(origin_of("trajectories"), "trajectories must be at least 1"));
        }
        if m.workers == 0 {
            return Err(err(origin_of("workers"), "workers must be at least 1"));
        }
        if m.observables.contains(&Observable::Entropy) && !m.engine.runs_mps() {
            return Err(err(origin_of("observables"), "entropy is only available from the mps engine"));
        }
        if m.observables.contains(&Observable::EmissionRecord) && !m.engine.runs_sdw() {
            return Err(err(origin_of("observables"), "emission_record is only available from the sdw engine"));
        }
        Ok(m)
    }

    pub fn mps_options(&self) -> MpsOptions {
        MpsOptions {
            chi_max: self.chi_max,
            rel_tol: self.rel_tol,
            entropy_every: self.observables.contains(&Observable::Entropy) as usize,
        }
    }

    /// Fully resolved settings; parsing the text yields an equal manifest.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("scheme", c.scheme.name().into());
        put("engine", self.engine.name().into());
        put("gamma_l1", c.gamma_l1.to_string());
        put("gamma_r1", c.gamma_r1.to_string());
        if c.scheme == Scheme::TwoTls {
            put("gamma_l2", c.gamma_l2.to_string());
            put("gamma_r2", c.gamma_r2.to_string());
        }
        put("omega1", c.omega1.to_string());
        if c.scheme == Scheme::TwoTls {
            put("omega2", c.omega2.to_string());
        }
        put("tau", c.tau.to_string());
        put("phi", c.phi.to_string());
        put("gamma0", c.gamma0.to_string());
        put("gamma_p", c.gamma_p.to_string());
        put("detuning", c.detuning.to_string());
        put("dt", c.dt.to_string());
        put("sub_steps", c.sub_steps.to_string());
        put("t_max", c.t_max.to_string());
        put("initial", initial_text(c.initial, c.scheme));
        put("photon_cap", c.photon_cap.to_string());
        if let Some(b) = c.boxes {
            put("boxes", b.to_string());
        }
        put("drive_half_convention", c.drive_half_convention.map_or("auto".into(), |b| b.to_string()));
        put("trajectories", self.trajectories.to_string());
        put("chi_max", self.chi_max.to_string());
        put("rel_tol", format!("{:e}", self.rel_tol));
        put("master_seed", self.master_seed.to_string());
        put("workers", self.workers.to_string());
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        put("observables", self.observables.iter().map(|o| o.name()).collect::<Vec<_>>().join(","));
        s
    }
}
