use std::time::Instant;

use crate::manifest::{Engine, RunManifest};
use crate::run::{run_mps, run_oracle, run_sdw};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub engine: Engine,
    /// Wall-clock seconds of each repetition.
    pub seconds: Vec<f64>,
}

impl BenchRow {
    pub fn median(&self) -> f64 {
        let mut s = self.seconds.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        }
    }
}

fn time_engine(m: &RunManifest, engine: Engine) -> Result<f64, CliError> {
    let start = Instant::now();
    match engine {
        Engine::Mps => {
            run_mps(m)?;
        }
        Engine::Sdw => {
            run_sdw(m)?;
        }
        Engine::Oracle => {
            run_oracle(m)?;
        }
        Engine::Both => unreachable!("split before timing"),
    }
    Ok(start.elapsed().as_secs_f64())
}

/// Times every engine of every manifest `repeats` times. `Both` is timed
/// as two separate rows.
pub fn benchmark(manifests: &[(String, RunManifest)], repeats: usize) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for (name, m) in manifests {
        let engines = match m.engine {
            Engine::Both => vec![Engine::Mps, Engine::Sdw],
            e => vec![e],
        };
        for engine in engines {
            let seconds = (0..repeats.max(1)).map(|_| time_engine(m, engine)).collect::<Result<_, _>>()?;
            rows.push(BenchRow { name: name.clone(), engine, seconds });
        }
    }
    Ok(rows)
}

pub fn render(rows: &[BenchRow]) -> String {
    let mut s = String::from("name,engine,median_s,runs_s\n");
    for r in rows {
        let runs: Vec<String> = r.seconds.iter().map(|x| format!("{x:.6}")).collect();
        s.push_str(&format!("{},{},{:.6},{}\n", r.name, r.engine.name(), r.median(), runs.join(";")));
    }
    s
}
