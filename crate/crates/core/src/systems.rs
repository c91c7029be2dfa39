//! Sample vector fields: planar ODE systems and time series.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cmf::VectorCloud;
use crate::error::{Error, Result};
use crate::grid::{make_grid_points, GridSpec};

/// A planar system `(dx/dt, dy/dt) = F(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// `dx = −y + x(4 − x² − y²)`, `dy = −x + y(4 − x² − y²)`.
    ///
    /// As printed, `dy` carries `−x`; with `corrected_sign` it becomes `+x`,
    /// which makes the circle of radius 2 an attracting periodic orbit
    /// around a repelling rest point.
    Orbit {
        #[serde(default)]
        corrected_sign: bool,
    },
    /// Attracting rest point at the origin inside two periodic orbits.
    TwoOrbits,
    /// Prey (`x`) and predator (`y`) biomass model.
    PreyPredator { alpha: f64, c: f64, beta: f64, delta: f64, gamma: f64, zeta: f64 },
    /// Constant zero field.
    Zero,
}

impl SystemSpec {
    /// Prey-predator system with the fixed `β, δ, γ, ζ` of the parameter
    /// plane study and the given `(α, c)`.
    pub fn prey_predator(alpha: f64, c: f64) -> Self {
        SystemSpec::PreyPredator { alpha, c, beta: 0.15, delta: 0.08, gamma: 4.0, zeta: 0.2 }
    }

    /// Builds a spec from a kind name and a parameter map.
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |name: &str| {
            params
                .get(name)
                .copied()
                .ok_or_else(|| Error::validation(format!("prey_predator needs parameter {name}")))
        };
        let no_params = |spec: SystemSpec, allowed: &[&str]| {
            match params.keys().find(|k| !allowed.contains(&k.as_str())) {
                Some(k) => Err(Error::validation(format!("{kind} takes no parameter {k}"))),
                None => Ok(spec),
            }
        };
        match kind {
            "orbit" => {
                let corrected = params.get("corrected_sign").map_or(false, |&v| v != 0.0);
                no_params(SystemSpec::Orbit { corrected_sign: corrected }, &["corrected_sign"])
            }
            "two_orbits" => no_params(SystemSpec::TwoOrbits, &[]),
            "zero" => no_params(SystemSpec::Zero, &[]),
            "prey_predator" => {
                // β, δ, γ, ζ default to the standard constants; α and c are required.
                let SystemSpec::PreyPredator { beta, delta, gamma, zeta, .. } = SystemSpec::prey_predator(0.0, 0.0) else {
                    unreachable!()
                };
                let or = |name: &str, default: f64| params.get(name).copied().unwrap_or(default);
                let spec = SystemSpec::PreyPredator {
                    alpha: get("alpha")?,
                    c: get("c")?,
                    beta: or("beta", beta),
                    delta: or("delta", delta),
                    gamma: or("gamma", gamma),
                    zeta: or("zeta", zeta),
                };
                no_params(spec, &["alpha", "c", "beta", "delta", "gamma", "zeta"])
            }
            other => Err(Error::validation(format!(
                "unknown system {other:?} (expected orbit, two_orbits, prey_predator or zero)"
            ))),
        }
    }
}

/// Right-hand side of the system at `(x, y)`.
pub fn eval_system(spec: &SystemSpec, x: f64, y: f64) -> Result<[f64; 2]> {
    match *spec {
        SystemSpec::Orbit { corrected_sign } => {
            let s = 4.0 - x * x - y * y;
            let dy_x = if corrected_sign { x } else { -x };
            Ok([-y + x * s, dy_x + y * s])
        }
        SystemSpec::TwoOrbits => {
            let q = x * x + y * y - 1.0;
            let rot = q - q * q;
            let radial = 3.0 - 6.0 * q + q * q;
            Ok([-0.3 * y * rot - x * radial, 0.3 * x * rot - y * radial])
        }
        SystemSpec::PreyPredator { alpha, c, beta, delta, gamma, zeta } => {
            let denom = 1.0 + alpha * zeta + x;
            if denom == 0.0 {
                return Err(Error::validation(format!("prey_predator denominator 1 + alpha*zeta + x vanishes at x = {x}")));
            }
            let dx = x * (1.0 - x / gamma) - (1.0 - c) * x * y / denom;
            let dy = beta * ((1.0 - c) * x + zeta) * y / denom - delta * y;
            Ok([dx, dy])
        }
        SystemSpec::Zero => Ok([0.0, 0.0]),
    }
}

/// Evaluates the system at every grid point.
pub fn sample_field(spec: &SystemSpec, grid: &GridSpec) -> Result<VectorCloud> {
    let points = make_grid_points(grid)?;
    let vectors = points.iter().map(|p| eval_system(spec, p[0], p[1])).collect::<Result<Vec<_>>>()?;
    Ok(VectorCloud { points, vectors, grid: *grid })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub label: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        TimeSeries { values, label: None }
    }
}

/// Affine rescaling onto `[−1, 1]`; a constant series maps to zeros.
pub fn minmax_scale(ts: &TimeSeries) -> TimeSeries {
    let lo = ts.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        ts.values.iter().map(|t| 2.0 * (t - lo) / (hi - lo) - 1.0).collect()
    } else {
        vec![0.0; ts.values.len()]
    };
    TimeSeries { values, label: ts.label.clone() }
}

/// Field on the `n × n` index grid with `v_ij = (cos a_ij, sin a_ij)`,
/// `a_ij = arccos t_i + arccos t_j`.
pub fn ts_to_field(ts: &TimeSeries) -> Result<VectorCloud> {
    let n = ts.values.len();
    if n < 2 {
        return Err(Error::validation(format!("time series needs at least 2 values, got {n}")));
    }
    if let Some((i, t)) = ts.values.iter().enumerate().find(|(_, t)| !(-1.0..=1.0).contains(*t)) {
        return Err(Error::validation(format!(
            "value {t} at index {i} lies outside [-1, 1]; min-max scale the series first"
        )));
    }
    let grid = GridSpec::square(0.0, (n - 1) as f64, n)?;
    let angles: Vec<f64> = ts.values.iter().map(|t| t.acos()).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let a = angles[i] + angles[j];
            vectors.push([a.cos(), a.sin()]);
        }
    }
    Ok(VectorCloud { points: make_grid_points(&grid)?, vectors, grid })
}

/// Parses UCR-style text: one series per nonempty line, the class label
/// first, tokens separated by commas and/or whitespace.
pub fn parse_ucr(text: &str, path: &Path) -> Result<Vec<TimeSeries>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tokens: Vec<&str> =
            line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if tokens.is_empty() {
            continue;
        }
        let parse = |t: &str| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: format!("non-numeric token {t:?}"),
            })
        };
        parse(tokens[0])?;
        let values = tokens[1..].iter().map(|t| parse(t)).collect::<Result<Vec<_>>>()?;
        out.push(TimeSeries { values, label: Some(tokens[0].to_owned()) });
    }
    Ok(out)
}

pub fn read_ucr(path: &Path) -> Result<Vec<TimeSeries>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ucr(&text, path)
}
