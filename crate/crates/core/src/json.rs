//! JSON encodings for spaces, functions, free vectors, pair systems,
//! subspaces, and the reports built on them. Exact scalars are written as
//! strings (`"p/q"`, `"3/4*sqrt(2)"`), floats as numbers.
//!
//! Wherever a `"space"` is expected it may be an inline object or a path to a
//! space file, resolved against a directory supplied by the caller.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::Float;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::free::{DualityCertificate, FreeVector};
use crate::geom::Claim5Outcome;
use crate::lip::LipFunction;
use crate::metric::{PointedMetricSpace, TriangleCheck};
use crate::pairs::{LemmaReport, PairSystem, Verdict};
use crate::scalar::{Scalar, Surd};
use crate::smooth::{ExtensionCertificate, ExtensionJob};

fn field<'v>(v: &'v Value, key: &str) -> Result<&'v Value> {
    v.get(key)
        .ok_or_else(|| Error::Invalid(format!("missing field {key:?}")))
}

fn array<'v>(v: &'v Value, what: &str) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Invalid(format!("{what} must be an array")))
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|i| i as usize)
        .ok_or_else(|| Error::Invalid(format!("{what} must be a non-negative integer")))
}

fn scalar_row<T: Scalar>(v: &Value) -> Result<Vec<T>> {
    array(v, "row")?
        .iter()
        .map(|x| T::from_json(x).map_err(Error::from))
        .collect()
}

fn float<F: Float>(v: &Value, what: &str) -> Result<F> {
    v.as_f64()
        .and_then(F::from)
        .ok_or_else(|| Error::Invalid(format!("{what} must be a number")))
}

fn float_json<F: Float>(x: F) -> Value {
    json!(x.to_f64().unwrap_or(f64::NAN))
}

pub fn space_to_json<T: Scalar>(space: &PointedMetricSpace<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("labels".into(), json!(space.labels()));
    if let Some(coords) = space.coords() {
        let rows: Vec<Value> = coords
            .iter()
            .map(|c| Value::Array(c.iter().map(Scalar::to_json).collect()))
            .collect();
        obj.insert("coords".into(), Value::Array(rows));
    }
    let dist: Vec<Value> = space
        .distance_rows()
        .iter()
        .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
        .collect();
    obj.insert("dist".into(), Value::Array(dist));
    obj.insert("base".into(), json!(space.base()));
    if let Some(tags) = space.summands() {
        obj.insert("summands".into(), json!(tags));
    }
    Value::Object(obj)
}

pub fn space_from_json<T: Scalar>(v: &Value) -> Result<PointedMetricSpace<T>> {
    space_from_json_with(v, TriangleCheck::Always)
}

pub fn space_from_json_with<T: Scalar>(v: &Value, check: TriangleCheck) -> Result<PointedMetricSpace<T>> {
    let labels = array(field(v, "labels")?, "labels")?
        .iter()
        .map(|l| {
            l.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Invalid("labels must be strings".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let dist = array(field(v, "dist")?, "dist")?
        .iter()
        .map(scalar_row)
        .collect::<Result<Vec<Vec<T>>>>()?;
    let base = index(field(v, "base")?, "base")?;
    let coords = match v.get("coords") {
        None | Some(Value::Null) => None,
        Some(c) => Some(array(c, "coords")?.iter().map(scalar_row).collect::<Result<Vec<Vec<T>>>>()?),
    };
    let summands = match v.get("summands") {
        None | Some(Value::Null) => None,
        Some(s) => Some(
            array(s, "summands")?
                .iter()
                .map(|t| if t.is_null() { Ok(None) } else { index(t, "summand tag").map(Some) })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    PointedMetricSpace::build_with(labels, dist, base, check)?
        .with_coords(coords)?
        .with_summands(summands)
}

/// Resolves a `"space"` entry: inline object, or a file path relative to `dir`.
pub fn space_from_ref<T: Scalar>(v: &Value, dir: Option<&Path>) -> Result<PointedMetricSpace<T>> {
    match v {
        Value::String(path) => {
            let p = match dir {
                Some(d) => d.join(path),
                None => path.into(),
            };
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", p.display())))?;
            space_from_json(&serde_json::from_str(&text)?)
        }
        other => space_from_json(other),
    }
}

fn point_ref<T: Scalar>(space: &PointedMetricSpace<T>, v: &Value) -> Result<usize> {
    match v {
        Value::String(l) => space
            .index_of(l)
            .ok_or_else(|| Error::Invalid(format!("unknown label {l:?}"))),
        other => {
            let i = index(other, "point")?;
            if i >= space.len() {
                return Err(Error::IndexOutOfRange(i));
            }
            Ok(i)
        }
    }
}

pub fn function_to_json<T: Scalar>(f: &LipFunction<'_, T>, space: Value) -> Value {
    json!({
        "space": space,
        "values": f.values().iter().map(Scalar::to_json).collect::<Vec<_>>(),
    })
}

pub fn function_from_json<'a, T: Scalar>(space: &'a PointedMetricSpace<T>, v: &Value) -> Result<LipFunction<'a, T>> {
    LipFunction::new(space, scalar_row(field(v, "values")?)?)
}

fn coeffs_json<T: Scalar>(mu: &FreeVector<'_, T>) -> Value {
    let space = mu.space();
    let map: Map<String, Value> = mu
        .coeffs()
        .iter()
        .map(|(&i, a)| (space.label(i).to_string(), a.to_json()))
        .collect();
    Value::Object(map)
}

pub fn free_vector_to_json<T: Scalar>(mu: &FreeVector<'_, T>, space: Value) -> Value {
    json!({ "space": space, "coeffs": coeffs_json(mu) })
}

/// Reads the `"coeffs"` of a free-vector object against `space`.
pub fn free_vector_from_json<'a, T: Scalar>(space: &'a PointedMetricSpace<T>, v: &Value) -> Result<FreeVector<'a, T>> {
    let coeffs = field(v, "coeffs")?
        .as_object()
        .ok_or_else(|| Error::Invalid("coeffs must be an object".into()))?;
    let mut out = Vec::with_capacity(coeffs.len());
    for (label, a) in coeffs {
        let i = space
            .index_of(label)
            .ok_or_else(|| Error::Invalid(format!("unknown label {label:?}")))?;
        out.push((i, T::from_json(a)?));
    }
    FreeVector::new(space, out)
}

pub fn certificate_to_json<T: Scalar>(cert: &DualityCertificate<'_, T>) -> Value {
    let space = cert.dual.space();
    let terms: Vec<Value> = cert
        .primal
        .terms
        .iter()
        .map(|(a, y, z)| json!([a.to_json(), space.label(*y), space.label(*z)]))
        .collect();
    json!({
        "value": cert.value.to_json(),
        "primal_terms": terms,
        "dual_values": cert.dual.values().iter().map(Scalar::to_json).collect::<Vec<_>>(),
        "gap": cert.gap.to_json(),
    })
}

pub fn pair_system_to_json<T: Scalar>(sys: &PairSystem<'_, T>, space: Value) -> Value {
    let m = sys.space();
    let pairs: Vec<Value> = sys
        .pairs()
        .iter()
        .map(|&(x, y)| json!([m.label(x), m.label(y)]))
        .collect();
    json!({ "space": space, "pairs": pairs, "K": sys.k().to_json() })
}

/// Pairs may name points by label or by index.
pub fn pair_system_from_json<'a, T: Scalar>(space: &'a PointedMetricSpace<T>, v: &Value) -> Result<(Vec<(usize, usize)>, T)> {
    let pairs = array(field(v, "pairs")?, "pairs")?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([x, y]) => Ok((point_ref(space, x)?, point_ref(space, y)?)),
            _ => Err(Error::Invalid("each pair must have two entries".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let k = T::from_json(field(v, "K")?)?;
    Ok((pairs, k))
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Pass => json!({ "verdict": "pass" }),
        Verdict::Fail(w) => json!({
            "verdict": "fail",
            "witness": w.indices,
            "inequality": w.inequality,
        }),
    }
}

pub fn lemma_report_to_json(r: &LemmaReport) -> Value {
    json!({
        "distinct": verdict_json(&r.distinct),
        "exclusion": verdict_json(&r.exclusion),
        "disjoint": verdict_json(&r.disjoint),
        "disjoint_sum": verdict_json(&r.disjoint_sum),
        "passed": r.passed(),
    })
}

pub fn subspace_to_json<T: Scalar>(vectors: &[FreeVector<'_, T>], space: Value) -> Value {
    let vs: Vec<Value> = vectors.iter().map(|mu| json!({ "coeffs": coeffs_json(mu) })).collect();
    json!({ "space": space, "vectors": vs })
}

pub fn subspace_from_json<'a, T: Scalar>(space: &'a PointedMetricSpace<T>, v: &Value) -> Result<Vec<FreeVector<'a, T>>> {
    array(field(v, "vectors")?, "vectors")?
        .iter()
        .map(|mu| free_vector_from_json(space, mu))
        .collect()
}

pub fn matrix_to_json<T: Scalar>(m: &[Vec<T>]) -> Value {
    json!({
        "matrix": m
            .iter()
            .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
            .collect::<Vec<_>>()
    })
}

pub fn matrix_from_json<T: Scalar>(v: &Value) -> Result<Vec<Vec<T>>> {
    array(field(v, "matrix")?, "matrix")?.iter().map(scalar_row).collect()
}

pub fn claim5_to_json(o: &Claim5Outcome) -> Value {
    let d = Surd::from_integer(1) / o.d_inverse.clone();
    json!({
        "n": o.n,
        "epsilon": o.epsilon.to_json(),
        "delta": o.delta.to_json(),
        "D": d.to_json(),
        "D_float": o.d,
        "D_vertex_route": o.d_vertex_route,
        "per_vector_error": o.per_vector_error.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        "error_ok": o.error_ok,
        "bm_upper": o.bm_upper,
        "bm_ok": o.bm_ok,
        "snapped_points": o.snapped.labels(),
        "passed": o.passed(),
    })
}

pub fn extension_job_from_json<F: Float>(v: &Value) -> Result<ExtensionJob<F>> {
    let points = array(field(v, "points")?, "points")?
        .iter()
        .map(|p| array(p, "point")?.iter().map(|x| float(x, "coordinate")).collect())
        .collect::<Result<Vec<Vec<F>>>>()?;
    let values = array(field(v, "values")?, "values")?
        .iter()
        .map(|x| float(x, "value"))
        .collect::<Result<Vec<F>>>()?;
    let mut job = ExtensionJob::new(
        points,
        values,
        float(field(v, "epsilon")?, "epsilon")?,
        float(field(v, "gridstep")?, "gridstep")?,
    );
    if let Some(d) = v.get("delta").filter(|d| !d.is_null()) {
        job.delta = Some(float(d, "delta")?);
    }
    if let Some(r) = v.get("kernel_radius").filter(|r| !r.is_null()) {
        job.kernel_radius = Some(float(r, "kernel_radius")?);
    }
    Ok(job)
}

pub fn extension_job_to_json<F: Float>(job: &ExtensionJob<F>) -> Value {
    let mut obj = Map::new();
    let points: Vec<Value> = job
        .points
        .iter()
        .map(|p| Value::Array(p.iter().map(|&x| float_json(x)).collect()))
        .collect();
    obj.insert("points".into(), Value::Array(points));
    obj.insert("values".into(), Value::Array(job.values.iter().map(|&x| float_json(x)).collect()));
    obj.insert("epsilon".into(), float_json(job.epsilon));
    obj.insert("gridstep".into(), float_json(job.gridstep));
    if let Some(d) = job.delta {
        obj.insert("delta".into(), float_json(d));
    }
    if let Some(r) = job.kernel_radius {
        obj.insert("kernel_radius".into(), float_json(r));
    }
    Value::Object(obj)
}

pub fn extension_certificate_to_json<F: Float>(c: &ExtensionCertificate<F>) -> Value {
    let checks: Map<String, Value> = c
        .checks()
        .into_iter()
        .map(|(k, ok)| (k.to_string(), json!(ok)))
        .collect();
    json!({
        "dim": c.dim,
        "points": c.points,
        "epsilon": float_json(c.epsilon),
        "delta": float_json(c.delta),
        "gridstep": float_json(c.gridstep),
        "lipschitz": float_json(c.lipschitz),
        "tau_k": float_json(c.tau_k),
        "kernel_radius": float_json(c.kernel_radius),
        "mollification_target": float_json(c.mollification_target),
        "mollification_achieved": float_json(c.mollification_achieved),
        "mollification_sampled": float_json(c.mollification_sampled),
        "residual": float_json(c.residual),
        "f_sup": float_json(c.f_sup),
        "g_sup": float_json(c.g_sup),
        "grad_max": float_json(c.grad_max),
        "partial_max": float_json(c.partial_max),
        "c1_norm": float_json(c.c1_norm),
        "h_sup": float_json(c.h_sup),
        "h_lip": float_json(c.h_lip),
        "fd_slack": float_json(c.fd_slack),
        "disjoint": c.disjoint,
        "samples": c.samples,
        "checks": checks,
        "passed": c.passed(),
    })
}

/// One row per sample: coordinates `x1..xd`, then `g`.
pub fn samples_to_csv<F: Float>(samples: &[(Vec<F>, F)]) -> String {
    let dim = samples.first().map_or(0, |(x, _)| x.len());
    let mut out = String::new();
    let header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).chain(["g".to_string()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, g) in samples {
        for v in x {
            let _ = write!(out, "{},", v.to_f64().unwrap_or(f64::NAN));
        }
        let _ = writeln!(out, "{}", g.to_f64().unwrap_or(f64::NAN));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::check_duality;
    use crate::scalar::Rational;

    #[test]
    fn space_round_trip() {
        let g = PointedMetricSpace::<Surd>::grid_an(2).unwrap();
        let k = PointedMetricSpace::amalgam(&[&g, &g]).unwrap();
        for s in [&g, &k] {
            let v = space_to_json(s);
            let back: PointedMetricSpace<Surd> = space_from_json(&v).unwrap();
            assert_eq!(&back, s);
            assert_eq!(space_to_json(&back).to_string(), v.to_string());
        }
    }

    #[test]
    fn rational_and_float_parsing() {
        let v: Value = serde_json::from_str(r#"{"labels":["0","a","b"],"dist":[[0,"1/2",1],["1/2",0,0.5],[1,"1/2",0]],"base":0}"#).unwrap();
        let q: PointedMetricSpace<Rational> = space_from_json(&v).unwrap();
        assert_eq!(*q.d(1, 2), Rational::ratio(1, 2));
        let f: PointedMetricSpace<f64> = space_from_json(&v).unwrap();
        assert_eq!(*f.d(0, 2), 1.0);
        let bad: Value = serde_json::from_str(r#"{"labels":["0","a","b"],"dist":[[0,1,3],[1,0,1],[3,1,0]],"base":0}"#).unwrap();
        assert!(matches!(space_from_json::<Rational>(&bad), Err(Error::MetricViolation { .. })));
    }

    #[test]
    fn free_vector_and_certificate() {
        let g = PointedMetricSpace::<Surd>::grid_an(2).unwrap();
        let v: Value = serde_json::from_str(r#"{"coeffs":{"(1/4,0)":"1","(0,1/4)":"-1"}}"#).unwrap();
        let mu = free_vector_from_json(&g, &v).unwrap();
        let out = free_vector_to_json(&mu, json!("a2.json"));
        assert_eq!(free_vector_from_json(&g, &out).unwrap(), mu);
        let cert = check_duality(&mu).unwrap();
        let c = certificate_to_json(&cert);
        assert_eq!(c["value"], json!("1/4*sqrt(2)"));
        assert_eq!(c["gap"], json!("0"));
    }

    #[test]
    fn job_round_trip() {
        let v: Value = serde_json::from_str(r#"{"points":[[0,0],[1,0]],"values":[0,1],"epsilon":0.1,"gridstep":0.01}"#).unwrap();
        let job: ExtensionJob<f64> = extension_job_from_json(&v).unwrap();
        assert_eq!(job.points[1], vec![1.0, 0.0]);
        let again: ExtensionJob<f64> = extension_job_from_json(&extension_job_to_json(&job)).unwrap();
        assert_eq!(again, job);
        let csv = samples_to_csv(&[(vec![0.0, 0.5], 0.25)]);
        assert_eq!(csv, "x1,x2,g\n0,0.5,0.25\n");
    }
}
