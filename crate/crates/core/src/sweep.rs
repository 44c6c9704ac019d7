//! Grid sweeps over one or two scenario parameters.
//!
//! A parameter argument reads `name=start:stop:steps[:log]`; `start` and `stop`
//! may carry a unit (`R=70nm:180nm:3`). Points run on a worker pool sized by
//! `LEVITRAP_THREADS`; rows come back in grid order whatever the schedule.
//! A point that fails keeps its row with the message in the `error` column.

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::pipeline::{evaluate, Evaluation};
use crate::report::csv_string;
use crate::scenario::{DetectionSpec, FeedbackPlan, GainRule, Scenario, Scheme};
use crate::units::parse_quantity;

pub const THREADS_VAR: &str = "LEVITRAP_THREADS";

/// Accepted parameter names with what they set.
pub const PARAMETERS: &[(&str, &str)] = &[
    ("P_L", "mean laser power"),
    ("R", "particle radius"),
    ("NA", "numerical aperture"),
    ("P_am", "ambient pressure"),
    ("gamma_fb_1", "feedback rate on axis 1"),
    ("gamma_fb_2", "feedback rate on axis 2"),
    ("gamma_fb_3", "feedback rate on axis 3"),
    ("opt_factor", "Coulomb-axis gain as a multiple of its optimum"),
    ("Z", "effective detector distance, areas kept at their bounds"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let usage = |why: &str| Error::Usage(format!("bad sweep spec {spec:?}: {why}"));
        let (name, range) = spec.split_once('=').ok_or_else(|| usage("expected name=start:stop:steps[:log]"))?;
        let name = name.trim();
        if !PARAMETERS.iter().any(|(n, _)| *n == name) {
            let known: Vec<&str> = PARAMETERS.iter().map(|(n, _)| *n).collect();
            return Err(Error::Usage(format!(
                "unknown sweep parameter {name:?}; known: {}",
                known.join(", ")
            )));
        }
        let parts: Vec<&str> = range.split(':').collect();
        let (log, parts) = match parts.as_slice() {
            [a, b, n, "log"] => (true, [*a, *b, *n]),
            [a, b, n] => (false, [*a, *b, *n]),
            _ => return Err(usage("expected start:stop:steps[:log]")),
        };
        let start = parse_quantity(parts[0]).map_err(|e| usage(&e.to_string()))?;
        let stop = parse_quantity(parts[1]).map_err(|e| usage(&e.to_string()))?;
        let steps: usize = parts[2].trim().parse().map_err(|_| usage("steps must be a positive integer"))?;
        if steps == 0 {
            return Err(usage("steps must be a positive integer"));
        }
        if log && (start <= 0.0 || stop <= 0.0) {
            return Err(usage("log spacing needs positive bounds"));
        }
        let values = (0..steps)
            .map(|i| {
                if steps == 1 {
                    return start;
                }
                let f = i as f64 / (steps - 1) as f64;
                if log {
                    (start.ln() + f * (stop.ln() - start.ln())).exp()
                } else {
                    start + f * (stop - start)
                }
            })
            .collect();
        Ok(SweepAxis {
            name: name.to_string(),
            values,
        })
    }
}

fn plan_of(s: &Scenario, name: &str) -> Result<FeedbackPlan> {
    s.feedback
        .filter(|p| p.scheme != Scheme::None)
        .ok_or_else(|| Error::Usage(format!("sweeping {name} needs a feedback plan in the scenario")))
}

/// Applies one parameter value to a scenario.
pub fn apply(s: &mut Scenario, name: &str, value: f64) -> Result<()> {
    match name {
        "P_L" => s.beam.mean_power = value,
        "R" => s.particle.radius = value,
        "NA" => s.beam.numerical_aperture = value,
        "P_am" => s.gas = s.gas.with_pressure(value),
        "Z" => s.detection = DetectionSpec::pinned(s.beam.wavelength, value, s.detection.filtered),
        "gamma_fb_1" | "gamma_fb_2" | "gamma_fb_3" => {
            let axis = name.as_bytes()[9] as usize - b'1' as usize;
            let mut plan = plan_of(s, name)?;
            plan.axes[axis] = GainRule::Gain(value);
            s.feedback = Some(plan);
        }
        "opt_factor" => {
            let mut plan = plan_of(s, name)?;
            let k = plan
                .scheme
                .coulomb_axis()
                .ok_or_else(|| Error::Usage("opt_factor needs a hybrid scheme".into()))?;
            plan.axes[k] = GainRule::OptimumFactor(value);
            s.feedback = Some(plan);
        }
        other => return Err(Error::Usage(format!("unknown sweep parameter {other:?}"))),
    }
    Ok(())
}

/// Report scalars of one evaluation, in fixed column order; `None` gives
/// the column names with NaN values.
pub fn scalars(ev: Option<&Evaluation>) -> Vec<(String, f64)> {
    let nan3 = [f64::NAN; 3];
    let r = ev.map(|e| &e.inputs.rates);
    let fb = ev.and_then(|e| e.feedback.as_ref());
    let opt = fb.and_then(|f| f.optimum);
    let mut out = Vec::new();
    let mut axes = |name: &str, v: [f64; 3]| {
        for (i, x) in v.iter().enumerate() {
            out.push((format!("{name}_{}", i + 1), *x));
        }
    };
    axes("omega", r.map_or(nan3, |r| r.frequencies));
    axes("gamma_g", r.map_or(nan3, |r| r.gradient));
    axes("gamma_r", r.map_or(nan3, |r| r.recoil));
    axes("m_th", r.map_or(nan3, |r| r.thermal_occupation));
    axes("m", ev.map_or(nan3, |e| e.occupations));
    axes("s_n", ev.map_or(nan3, |e| e.inputs.noise.floors));
    axes("gamma_fb", fb.map_or(nan3, |f| f.rates.gains));
    axes("gamma_fb_cr", fb.map_or(nan3, |f| f.critical.map(|c| c.value())));
    axes("m_fb", fb.map_or(nan3, |f| f.occupations));
    let one = |f: &dyn Fn(&Evaluation) -> f64| ev.map_or(f64::NAN, f);
    out.push(("gamma".into(), one(&|e| e.inputs.rates.damping)));
    out.push(("gamma_cr".into(), one(&|e| e.inputs.rates.critical_damping)));
    out.push(("p_am_cr".into(), one(&|e| e.critical_pressure)));
    out.push(("t_s".into(), one(&|e| e.inputs.thermal.surface_temperature)));
    out.push(("t".into(), one(&|e| e.inputs.thermal.effective_temperature)));
    out.push(("gamma_fb_opt".into(), opt.map_or(f64::NAN, |o| o.gain)));
    out.push(("m_min".into(), opt.map_or(f64::NAN, |o| o.min_occupation)));
    out.push(("operable".into(), one(&|e| if e.ledger.operable { 1.0 } else { 0.0 })));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub errors: Vec<Option<String>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.push("error".into());
        w.write_record(&header)?;
        for (row, err) in self.rows.iter().zip(&self.errors) {
            let mut rec: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Some(x) if x.is_finite() => format!("{x:.12e}"),
                    Some(x) if *x == f64::INFINITY => "unbounded".to_string(),
                    _ => String::new(),
                })
                .collect();
            rec.push(err.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        csv_string(w)
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .zip(&self.errors)
            .map(|(row, err)| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.clone(), v.filter(|x| x.is_finite()).map_or(Value::Null, Value::from));
                }
                m.insert("error".into(), err.clone().map_or(Value::Null, Value::from));
                Value::Object(m)
            })
            .collect();
        Value::Array(rows)
    }
}

pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("{THREADS_VAR} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(e.to_string()))
}

fn grid(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, ax| {
        acc.into_iter()
            .flat_map(|prefix| {
                ax.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Evaluates every grid point. At most two axes.
pub fn sweep(s: &Scenario, axes: &[SweepAxis]) -> Result<SweepTable> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Usage("sweep takes one or two parameters".into()));
    }
    // bad parameter/scenario combinations are usage errors, not row errors
    let mut probe = s.clone();
    for ax in axes {
        apply(&mut probe, &ax.name, ax.values[0])?;
    }
    let points = grid(axes);
    let pool = worker_pool()?;
    let results: Vec<Result<Evaluation>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let mut sc = s.clone();
                for (ax, &v) in axes.iter().zip(p) {
                    apply(&mut sc, &ax.name, v)?;
                }
                evaluate(&sc)
            })
            .collect()
    });
    let scalar_names: Vec<String> = scalars(None).into_iter().map(|(n, _)| n).collect();
    let mut columns: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    columns.extend(scalar_names.iter().cloned());
    let mut rows = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for (p, res) in points.iter().zip(results) {
        let mut row: Vec<Option<f64>> = p.iter().map(|&v| Some(v)).collect();
        match res {
            Ok(ev) => {
                row.extend(scalars(Some(&ev)).into_iter().map(|(_, v)| Some(v)));
                errors.push(None);
            }
            Err(e) => {
                row.extend(scalar_names.iter().map(|_| None));
                errors.push(Some(format!("{}: {e}", e.class().name())));
            }
        }
        rows.push(row);
    }
    Ok(SweepTable { columns, rows, errors })
}
