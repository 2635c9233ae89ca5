use crate::table::{Table, TableError};

/// Distances between one observable of two tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Distance {
    pub observable: String,
    pub sup: f64,
    pub rms: f64,
    /// Largest `|a − b| / √(se_a² + se_b²)` where standard errors exist.
    pub max_z: Option<f64>,
    /// Fraction of points with `|a − b| ≤ 3·√(se_a² + se_b²)`.
    pub within_3se: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub tolerance: f64,
    pub points: usize,
    pub distances: Vec<Distance>,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.distances.iter().all(|d| d.pass)
    }

    pub fn render(&self) -> String {
        let mut s =
            format!("{:<12} {:>12} {:>12} {:>10} {:>10}  result\n", "observable", "sup", "rms", "max_z", "in_3se");
        for d in &self.distances {
            let z = d.max_z.map_or("-".to_string(), |z| format!("{z:.3}"));
            let w = d.within_3se.map_or("-".to_string(), |w| format!("{w:.3}"));
            let verdict = if d.pass { "pass" } else { "FAIL" };
            s.push_str(&format!(
                "{:<12} {:>12.4e} {:>12.4e} {:>10} {:>10}  {verdict}\n",
                d.observable, d.sup, d.rms, z, w
            ));
        }
        s.push_str(&format!(
            "tolerance {} over {} points: {}\n",
            self.tolerance,
            self.points,
            if self.pass() { "pass" } else { "FAIL" }
        ));
        s
    }
}

const GRID_TOL: f64 = 1e-9;

fn value_columns(t: &Table) -> Vec<&str> {
    t.columns.iter().map(String::as_str).filter(|c| *c != "t" && !c.ends_with("_se")).collect()
}

/// Linear interpolation of `(xs, ys)` at `x`; `x` must lie inside the span.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let last = xs.len().checked_sub(1)?;
    if x < xs[0] - GRID_TOL || x > xs[last] + GRID_TOL {
        return None;
    }
    let j = xs.partition_point(|&v| v < x - GRID_TOL);
    if j <= last && (xs[j] - x).abs() <= GRID_TOL {
        return Some(ys[j]);
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    Some(ys[j - 1] * (1.0 - w) + ys[j] * w)
}

/// Resamples `column` of `t` onto `grid`.
fn resample(t: &Table, column: &str, grid: &[f64]) -> Result<Option<Vec<f64>>, TableError> {
    if t.column_index(column).is_none() {
        return Ok(None);
    }
    let xs = t.column("t")?;
    let ys = t.column(column)?;
    Ok(grid.iter().map(|&x| interpolate(&xs, &ys, x)).collect())
}

/// Compares the common observables of two tables on the coarser grid.
///
/// Symmetric in its arguments: the target grid is the one with fewer
/// points, ties broken by comparing the grids themselves.
pub fn compare(a: &Table, b: &Table, tolerance: f64, only: Option<&[String]>) -> Result<CompareReport, TableError> {
    let ta = a.column("t")?;
    let tb = b.column("t")?;
    let grid = match ta.len().cmp(&tb.len()) {
        std::cmp::Ordering::Less => ta.clone(),
        std::cmp::Ordering::Greater => tb.clone(),
        std::cmp::Ordering::Equal => {
            if ta.iter().zip(&tb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater)
            {
                tb.clone()
            } else {
                ta.clone()
            }
        }
    };
    let names_b = value_columns(b);
    let mut names: Vec<String> =
        value_columns(a).into_iter().filter(|c| names_b.contains(c)).map(str::to_string).collect();
    if let Some(only) = only {
        for o in only {
            if !names.contains(o) {
                return Err(TableError::MissingColumn(o.clone()));
            }
        }
        names.retain(|n| only.contains(n));
    }
    let mut distances = Vec::new();
    for name in names {
        let missing = || TableError::MissingColumn(format!("{name} (time grids do not overlap)"));
        let va = resample(a, &name, &grid)?.ok_or_else(missing)?;
        let vb = resample(b, &name, &grid)?.ok_or_else(missing)?;
        let se_name = format!("{name}_se");
        let sa = resample(a, &se_name, &grid)?;
        let sb = resample(b, &se_name, &grid)?;
        let diffs: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).collect();
        let sup = diffs.iter().copied().fold(0.0, f64::max);
        let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len().max(1) as f64).sqrt();
        let (max_z, within_3se) = if sa.is_some() || sb.is_some() {
            let zero = vec![0.0; grid.len()];
            let sa = sa.as_deref().unwrap_or(&zero);
            let sb = sb.as_deref().unwrap_or(&zero);
            let mut max_z = 0.0f64;
            let mut inside = 0;
            for k in 0..grid.len() {
                let se = sa[k].hypot(sb[k]);
                if diffs[k] <= 3.0 * se || diffs[k] == 0.0 {
                    inside += 1;
                }
                if se > 0.0 {
                    max_z = max_z.max(diffs[k] / se);
                }
            }
            (Some(max_z), Some(inside as f64 / grid.len().max(1) as f64))
        } else {
            (None, None)
        };
        distances.push(Distance { observable: name, sup, rms, max_z, within_3se, pass: sup <= tolerance });
    }
    Ok(CompareReport { tolerance, points: grid.len(), distances })
}
