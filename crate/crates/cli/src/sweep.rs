use std::path::{Path, PathBuf};

use crate::manifest::{parse_flags, ConfigError, Origin, RunManifest, KEYS};
use crate::run::{execute, write_outputs};
use crate::CliError;

/// One swept key and its values, from `key=v1,v2,...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_axis(arg: &str) -> Result<Axis, ConfigError> {
    let bad = |m: String| ConfigError { origin: Origin::Flag, message: m };
    let (k, v) = arg.split_once('=').ok_or_else(|| bad(format!("grid '{arg}' must look like key=v1,v2")))?;
    let key = k.trim().to_string();
    if !KEYS.contains(&key.as_str()) || key == "output" {
        return Err(bad(format!("cannot sweep '{key}'")));
    }
    let values: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if values.is_empty() {
        return Err(bad(format!("grid '{key}' has no values")));
    }
    Ok(Axis { key, values })
}

/// Cartesian product, last axis fastest.
pub fn grid_points(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

/// Builds every manifest first so that a bad grid value fails before any
/// run starts.
pub fn sweep_manifests(base: &str, flags: &[String], axes: &[Axis]) -> Result<Vec<RunManifest>, ConfigError> {
    parse_flags(flags)?;
    grid_points(axes)
        .into_iter()
        .map(|point| {
            let mut all = flags.to_vec();
            for (k, v) in point {
                all.push(format!("--{k}={v}"));
            }
            RunManifest::from_sources(base, &all)
        })
        .collect()
}

/// Runs every point, writing `<prefix>_<i>.*` and the index
/// `<prefix>.sweep.csv` mapping indices to swept values.
pub fn run_sweep(base: &str, flags: &[String], axes: &[Axis], prefix: &Path) -> Result<Vec<PathBuf>, CliError> {
    let manifests = sweep_manifests(base, flags, axes)?;
    let points = grid_points(axes);
    let mut written = Vec::new();
    let mut index = String::from("index");
    for a in axes {
        index.push(',');
        index.push_str(&a.key);
    }
    index.push('\n');
    for (i, (mut m, point)) in manifests.into_iter().zip(points).enumerate() {
        let out_prefix = PathBuf::from(format!("{}_{i}", prefix.display()));
        m.output = Some(out_prefix.clone());
        let out = execute(&m)?;
        written.extend(write_outputs(&m, &out_prefix, &out)?);
        let values: Vec<String> = point.into_iter().map(|(_, v)| v).collect();
        index.push_str(&format!("{i},{}\n", values.join(",")));
    }
    let p = PathBuf::from(format!("{}.sweep.csv", prefix.display()));
    std::fs::write(&p, index).map_err(|e| CliError::io(&p, e))?;
    written.push(p);
    Ok(written)
}
