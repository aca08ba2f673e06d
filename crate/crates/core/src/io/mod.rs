//! File formats: sample CSV, JSON descriptors for hypotheses, classes,
//! profiles, games, and distributions, trace CSV, and atomic writes.
//!
//! Scalar values in JSON are written as strings ("0.5", "1/3") and accepted
//! as either strings or JSON numbers; number literals are parsed from their
//! exact decimal text, so rational mode round-trips decimals without
//! binary-float artifacts.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::arith::Scalar;
use crate::dynamics::DynamicsTrace;
use crate::error::{Error, Result};
use crate::model::{
    ClassKind, EmpiricalGame, Hypothesis, HypothesisClass, Sample, StrategyProfile, UserPoint,
};
use crate::scenarios::{DistributionSpec, Segment};

// ---------------------------------------------------------------------------
// Scalar <-> JSON

pub fn scalar_to_value<S: Scalar>(v: &S) -> Value {
    Value::String(v.canonical_text())
}

pub fn scalar_from_value<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::String(s) => Ok(S::parse_text(s)?),
        // With arbitrary precision enabled the display form is the literal
        // text from the document.
        Value::Number(n) => Ok(S::parse_text(&n.to_string())?),
        other => Err(Error::Parse(format!(
            "expected a numeric value, found {other}"
        ))),
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_object(v: &Value, what: &str) -> Result<Map<String, Value>> {
    v.as_object()
        .cloned()
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON object")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON array")))
}

fn as_bool(v: &Value, what: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::Parse(format!("{what} must be a boolean")))
}

// ---------------------------------------------------------------------------
// Hypotheses

pub fn hypothesis_to_value<S: Scalar>(h: &Hypothesis<S>) -> Value {
    match h {
        Hypothesis::Linear { coefficients } => json!({
            "form": "linear",
            "coefficients": coefficients.iter().map(scalar_to_value).collect::<Vec<_>>(),
        }),
        Hypothesis::Constant { value } => json!({
            "form": "constant",
            "value": scalar_to_value(value),
        }),
        Hypothesis::IntervalIndicator {
            lo,
            hi,
            inclusive_lo,
            inclusive_hi,
        } => json!({
            "form": "interval_indicator",
            "lo": scalar_to_value(lo),
            "hi": scalar_to_value(hi),
            "inclusive_lo": inclusive_lo,
            "inclusive_hi": inclusive_hi,
        }),
        Hypothesis::SampleOverride { base, overrides } => json!({
            "form": "sample_override",
            "base": hypothesis_to_value(base),
            "overrides": overrides
                .iter()
                .map(|(x, v)| json!({
                    "x": x.iter().map(scalar_to_value).collect::<Vec<_>>(),
                    "value": scalar_to_value(v),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn hypothesis_from_value<S: Scalar>(v: &Value) -> Result<Hypothesis<S>> {
    let map = as_object(v, "hypothesis")?;
    let form = field(&map, "form")?
        .as_str()
        .ok_or_else(|| Error::Parse("hypothesis form must be a string".into()))?;
    match form {
        "linear" => {
            let coefficients = as_array(field(&map, "coefficients")?, "coefficients")?
                .iter()
                .map(scalar_from_value)
                .collect::<Result<Vec<S>>>()?;
            Ok(Hypothesis::Linear { coefficients })
        }
        "constant" => Ok(Hypothesis::Constant {
            value: scalar_from_value(field(&map, "value")?)?,
        }),
        "interval_indicator" => Ok(Hypothesis::IntervalIndicator {
            lo: scalar_from_value(field(&map, "lo")?)?,
            hi: scalar_from_value(field(&map, "hi")?)?,
            inclusive_lo: as_bool(field(&map, "inclusive_lo")?, "inclusive_lo")?,
            inclusive_hi: as_bool(field(&map, "inclusive_hi")?, "inclusive_hi")?,
        }),
        "sample_override" => {
            let base = hypothesis_from_value(field(&map, "base")?)?;
            let overrides = as_array(field(&map, "overrides")?, "overrides")?
                .iter()
                .map(|entry| -> Result<(Vec<S>, S)> {
                    let entry = as_object(entry, "override entry")?;
                    let x = as_array(field(&entry, "x")?, "override x")?
                        .iter()
                        .map(scalar_from_value)
                        .collect::<Result<Vec<S>>>()?;
                    let value = scalar_from_value(field(&entry, "value")?)?;
                    Ok((x, value))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Hypothesis::SampleOverride {
                base: Box::new(base),
                overrides,
            })
        }
        other => Err(Error::Parse(format!("unknown hypothesis form {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Profiles

pub fn profile_to_value<S: Scalar>(p: &StrategyProfile<S>) -> Value {
    json!({
        "strategies": p.strategies.iter().map(hypothesis_to_value).collect::<Vec<_>>(),
    })
}

pub fn profile_from_value<S: Scalar>(v: &Value) -> Result<StrategyProfile<S>> {
    let map = as_object(v, "profile")?;
    let strategies = as_array(field(&map, "strategies")?, "strategies")?
        .iter()
        .map(hypothesis_from_value)
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyProfile::new(strategies))
}

// ---------------------------------------------------------------------------
// Samples

pub fn sample_to_value<S: Scalar>(sample: &Sample<S>) -> Value {
    json!({
        "points": sample
            .points()
            .iter()
            .map(|z| json!({
                "x": z.features.iter().map(scalar_to_value).collect::<Vec<_>>(),
                "y": scalar_to_value(&z.label),
                "t": scalar_to_value(&z.tolerance),
            }))
            .collect::<Vec<_>>(),
    })
}

pub fn sample_from_value<S: Scalar>(v: &Value) -> Result<Sample<S>> {
    let map = as_object(v, "sample")?;
    let points = as_array(field(&map, "points")?, "points")?
        .iter()
        .map(|p| -> Result<UserPoint<S>> {
            let p = as_object(p, "point")?;
            let features = as_array(field(&p, "x")?, "x")?
                .iter()
                .map(scalar_from_value)
                .collect::<Result<Vec<S>>>()?;
            UserPoint::new(
                features,
                scalar_from_value(field(&p, "y")?)?,
                scalar_from_value(field(&p, "t")?)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Sample::new(points)
}

/// Read a sample from CSV with header `x1,...,xn,y,t`. Lines starting with
/// `#` are skipped.
pub fn read_sample_csv<S: Scalar>(reader: impl std::io::Read) -> Result<Sample<S>> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let cols = headers.len();
    if cols < 3 {
        return Err(Error::Parse(
            "sample CSV needs columns x1,...,xn,y,t".into(),
        ));
    }
    let n = cols - 2;
    for (i, name) in headers.iter().take(n).enumerate() {
        if name != format!("x{}", i + 1) {
            return Err(Error::Parse(format!(
                "expected column x{} at position {}, found {name:?}",
                i + 1,
                i
            )));
        }
    }
    if &headers[n] != "y" || &headers[n + 1] != "t" {
        return Err(Error::Parse("last two columns must be y,t".into()));
    }
    let mut points = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != cols {
            return Err(Error::Parse(format!(
                "row has {} fields, expected {cols}",
                record.len()
            )));
        }
        let features = (0..n)
            .map(|i| S::parse_text(&record[i]).map_err(Error::from))
            .collect::<Result<Vec<S>>>()?;
        points.push(UserPoint::new(
            features,
            S::parse_text(&record[n])?,
            S::parse_text(&record[n + 1])?,
        )?);
    }
    Sample::new(points)
}

pub fn read_sample_csv_path<S: Scalar>(path: &Path) -> Result<Sample<S>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    read_sample_csv(file)
}

/// Write a sample as CSV; `comment` lines (when given) are prefixed with
/// `#` ahead of the header.
pub fn write_sample_csv<S: Scalar>(sample: &Sample<S>, comment: Option<&str>) -> Result<String> {
    let mut out = String::new();
    if let Some(comment) = comment {
        for line in comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let n = sample.dimension();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    header.push("t".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for z in sample.points() {
        let mut row: Vec<String> = z.features.iter().map(|v| v.canonical_text()).collect();
        row.push(z.label.canonical_text());
        row.push(z.tolerance.canonical_text());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Classes and games

pub fn class_to_value<S: Scalar>(class: &HypothesisClass<S>) -> Value {
    let mut map = match &class.kind {
        ClassKind::FiniteList { members } => json!({
            "kind": "finite_list",
            "members": members.iter().map(hypothesis_to_value).collect::<Vec<_>>(),
        }),
        ClassKind::Linear {
            dimension,
            with_bias,
        } => json!({
            "kind": "linear",
            "n": dimension,
            "with_bias": with_bias,
        }),
        ClassKind::Example41 { support } => json!({
            "kind": "example41_class1",
            "support": sample_to_value(support),
        }),
    };
    if let Some(pdim) = class.declared_pdim {
        map.as_object_mut()
            .expect("class value is an object")
            .insert("pdim".into(), json!(pdim));
    }
    map
}

pub fn class_from_value<S: Scalar>(v: &Value) -> Result<HypothesisClass<S>> {
    let map = as_object(v, "class")?;
    let kind = field(&map, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("class kind must be a string".into()))?;
    let declared_pdim = match map.get("pdim") {
        Some(Value::Null) | None => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| Error::Parse("pdim must be a nonnegative integer".into()))?,
        ),
    };
    let kind = match kind {
        "finite_list" => ClassKind::FiniteList {
            members: as_array(field(&map, "members")?, "members")?
                .iter()
                .map(hypothesis_from_value)
                .collect::<Result<Vec<_>>>()?,
        },
        "linear" => ClassKind::Linear {
            dimension: field(&map, "n")?
                .as_u64()
                .ok_or_else(|| Error::Parse("linear class n must be an integer".into()))?
                as usize,
            with_bias: map
                .get("with_bias")
                .map(|v| as_bool(v, "with_bias"))
                .transpose()?
                .unwrap_or(false),
        },
        "example41_class1" => ClassKind::Example41 {
            support: sample_from_value(field(&map, "support")?)?,
        },
        other => return Err(Error::Parse(format!("unknown class kind {other:?}"))),
    };
    Ok(HypothesisClass {
        kind,
        declared_pdim,
    })
}

pub fn game_to_value<S: Scalar>(game: &EmpiricalGame<S>) -> Value {
    json!({
        "sample": sample_to_value(game.sample()),
        "classes": game.classes().iter().map(class_to_value).collect::<Vec<_>>(),
    })
}

pub fn game_from_value<S: Scalar>(v: &Value) -> Result<EmpiricalGame<S>> {
    let map = as_object(v, "game")?;
    let sample = sample_from_value(field(&map, "sample")?)?;
    let classes = as_array(field(&map, "classes")?, "classes")?
        .iter()
        .map(class_from_value)
        .collect::<Result<Vec<_>>>()?;
    EmpiricalGame::new(sample, classes)
}

// ---------------------------------------------------------------------------
// Distributions

pub fn distribution_to_value<S: Scalar>(dist: &DistributionSpec<S>) -> Value {
    match dist {
        DistributionSpec::UniformSegments { segments } => json!({
            "kind": "uniform_segments",
            "segments": segments
                .iter()
                .map(|s| json!({
                    "x_lo": scalar_to_value(&s.x_lo),
                    "x_hi": scalar_to_value(&s.x_hi),
                    "y": scalar_to_value(&s.label),
                    "t": scalar_to_value(&s.tolerance),
                    "mass": scalar_to_value(&s.mass),
                }))
                .collect::<Vec<_>>(),
        }),
        DistributionSpec::PointMass { z } => json!({
            "kind": "point_mass",
            "z": {
                "x": z.features.iter().map(scalar_to_value).collect::<Vec<_>>(),
                "y": scalar_to_value(&z.label),
                "t": scalar_to_value(&z.tolerance),
            },
        }),
        DistributionSpec::GaussianRegression {
            x_lo,
            x_hi,
            slope,
            intercept,
            noise_sd,
            tolerance,
        } => json!({
            "kind": "gaussian_regression",
            "x_lo": scalar_to_value(x_lo),
            "x_hi": scalar_to_value(x_hi),
            "slope": scalar_to_value(slope),
            "intercept": scalar_to_value(intercept),
            "noise_sd": scalar_to_value(noise_sd),
            "t": scalar_to_value(tolerance),
        }),
        DistributionSpec::UniformOverSample { sample } => json!({
            "kind": "uniform_over_sample",
            "sample": sample_to_value(sample),
        }),
    }
}

pub fn distribution_from_value<S: Scalar>(v: &Value) -> Result<DistributionSpec<S>> {
    let map = as_object(v, "distribution")?;
    let kind = field(&map, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("distribution kind must be a string".into()))?;
    let dist = match kind {
        "uniform_segments" => DistributionSpec::UniformSegments {
            segments: as_array(field(&map, "segments")?, "segments")?
                .iter()
                .map(|s| -> Result<Segment<S>> {
                    let s = as_object(s, "segment")?;
                    Ok(Segment {
                        x_lo: scalar_from_value(field(&s, "x_lo")?)?,
                        x_hi: scalar_from_value(field(&s, "x_hi")?)?,
                        label: scalar_from_value(field(&s, "y")?)?,
                        tolerance: scalar_from_value(field(&s, "t")?)?,
                        mass: scalar_from_value(field(&s, "mass")?)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        },
        "point_mass" => {
            let z = as_object(field(&map, "z")?, "point")?;
            DistributionSpec::PointMass {
                z: UserPoint::new(
                    as_array(field(&z, "x")?, "x")?
                        .iter()
                        .map(scalar_from_value)
                        .collect::<Result<Vec<S>>>()?,
                    scalar_from_value(field(&z, "y")?)?,
                    scalar_from_value(field(&z, "t")?)?,
                )?,
            }
        }
        "gaussian_regression" => DistributionSpec::GaussianRegression {
            x_lo: scalar_from_value(field(&map, "x_lo")?)?,
            x_hi: scalar_from_value(field(&map, "x_hi")?)?,
            slope: scalar_from_value(field(&map, "slope")?)?,
            intercept: scalar_from_value(field(&map, "intercept")?)?,
            noise_sd: scalar_from_value(field(&map, "noise_sd")?)?,
            tolerance: scalar_from_value(field(&map, "t")?)?,
        },
        "uniform_over_sample" => DistributionSpec::UniformOverSample {
            sample: sample_from_value(field(&map, "sample")?)?,
        },
        other => return Err(Error::Parse(format!("unknown distribution kind {other:?}"))),
    };
    dist.validate()?;
    Ok(dist)
}

// ---------------------------------------------------------------------------
// Traces

/// Trace CSV with columns `step,player,old_payoff,new_payoff,potential`;
/// `comment` lines are prefixed with `#` ahead of the header.
pub fn write_trace_csv<S: Scalar>(trace: &DynamicsTrace<S>, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(comment) = comment {
        for line in comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("step,player,old_payoff,new_payoff,potential\n");
    for (i, step) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            step.player,
            step.old_payoff.canonical_text(),
            step.new_payoff.canonical_text(),
            step.potential_after.canonical_text(),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Files

/// Write bytes to `path` atomically: write a sibling temp file, then rename
/// over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| std::path::PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!("{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_pretty_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}
