use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use lipfree::acceptance;
use lipfree::error::Error;
use lipfree::free::{kr_norm_dual, kr_norm_primal};
use lipfree::geom::{amalgam_l1_check, claim5_grid_approximation, scaling_isometry_map, SubspaceBasis};
use lipfree::json::*;
use lipfree::pairs::{select_pairs_cluster, select_pairs_discrete, select_pairs_unbounded};
use lipfree::random::{random_metric, random_vector, rng};
use lipfree::{
    c1_extend, check_duality_tol, kr_norm, FreeVector, PairSystem, PointedMetricSpace, Rational, Scalar, Surd,
};

use crate::{ApproxCmd, Cli, Command, Format, LemmaCmd, Method, Mode, SpaceCmd, Strategy};

/// Runs the command; `Ok(false)` means a check failed and was reported.
pub fn run(cli: &Cli) -> Result<bool> {
    if !(cli.tol > 0.0) {
        bail!(Error::Invalid(format!("--tol must be positive, got {}", cli.tol)));
    }
    if let Some(cap) = cli.cap {
        std::env::set_var("LIPFREE_CAP", cap.to_string());
    }
    match (&cli.command, cli.mode) {
        (Command::Space { cmd }, Mode::Rational) => space::<Surd>(cli, cmd),
        (Command::Space { cmd }, Mode::Float) => space::<f64>(cli, cmd),
        (Command::Norm { file, random, points, method }, Mode::Rational) => {
            norm::<Surd>(cli, file.as_deref(), *random, *points, *method)
        }
        (Command::Norm { file, random, points, method }, Mode::Float) => {
            norm::<f64>(cli, file.as_deref(), *random, *points, *method)
        }
        (Command::Lemma { cmd }, Mode::Rational) => lemma::<Surd>(cli, cmd),
        (Command::Lemma { cmd }, Mode::Float) => lemma::<f64>(cli, cmd),
        (Command::Approx { cmd }, Mode::Rational) => approx::<Surd>(cli, cmd),
        (Command::Approx { cmd }, Mode::Float) => approx::<f64>(cli, cmd),
        (Command::Extend { file, csv }, _) => extend(cli, file, csv.as_deref()),
        (Command::Accept, _) => accept(cli),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(v)
}

fn dir_of(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty())
}

/// Loads the space referenced by the `"space"` field of a file.
fn space_of<T: Scalar>(doc: &Value, path: &Path) -> Result<PointedMetricSpace<T>> {
    let v = doc
        .get("space")
        .ok_or_else(|| Error::Invalid(format!("{} has no \"space\" field", path.display())))?;
    Ok(space_from_ref(v, dir_of(path))?)
}

/// Writes to stdout; a closed pipe ends output quietly.
fn stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout(text),
    }
}

fn emit_json(cli: &Cli, v: &Value) -> Result<()> {
    if cli.format == Some(Format::Csv) {
        bail!(Error::Invalid("this command has no CSV output".into()));
    }
    emit(cli, &format!("{}\n", serde_json::to_string_pretty(v)?))
}

fn space<T: Scalar>(cli: &Cli, cmd: &SpaceCmd) -> Result<bool> {
    let m: PointedMetricSpace<T> = match cmd {
        SpaceCmd::Grid { n } => PointedMetricSpace::<Surd>::grid_an(*n)?.map_scalar(),
        SpaceCmd::Scaled { n } => PointedMetricSpace::<Surd>::scaled_grid_nan(*n)?.map_scalar(),
        SpaceCmd::Amalgam { files } => {
            let parts = files
                .iter()
                .map(|f| Ok(space_from_json::<T>(&read_json(f)?)?))
                .collect::<Result<Vec<_>>>()?;
            PointedMetricSpace::amalgam(&parts.iter().collect::<Vec<_>>())?
        }
        SpaceCmd::Euclid { file } => {
            let doc = read_json(file)?;
            let points = doc
                .get("points")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("\"points\" must be an array".into()))?
                .iter()
                .map(|p| {
                    p.as_array()
                        .ok_or_else(|| Error::Invalid("each point must be an array".into()))?
                        .iter()
                        .map(|x| T::from_json(x).map_err(Error::from))
                        .collect::<Result<Vec<T>, Error>>()
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let base = doc.get("base").and_then(Value::as_u64).unwrap_or(0) as usize;
            match doc.get("labels").and_then(Value::as_array) {
                Some(ls) => {
                    let labels = ls.iter().map(|l| l.as_str().unwrap_or_default().to_string()).collect();
                    PointedMetricSpace::from_labeled_points(labels, points, base)?
                }
                None => PointedMetricSpace::from_points_euclidean(points, base)?,
            }
        }
        SpaceCmd::Verify { file } => {
            let doc = read_json(file)?;
            return match space_from_json::<T>(&doc) {
                Ok(m) => {
                    emit(cli, &format!("ok ({} points)\n", m.len()))?;
                    Ok(true)
                }
                Err(Error::MetricViolation { kind, witness }) => {
                    emit(cli, &format!("{kind} violation at {}\n", witness.join(" ")))?;
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            };
        }
    };
    emit_json(cli, &space_to_json(&m))?;
    Ok(true)
}

fn norm_report<T: Scalar>(mu: &FreeVector<'_, T>, method: Method, tol: f64) -> Result<Value> {
    let m = mu.space();
    Ok(match method {
        Method::Primal => {
            let (v, dec) = kr_norm_primal(mu)?;
            let terms: Vec<Value> = dec
                .terms
                .iter()
                .map(|(a, y, z)| json!([a.to_json(), m.label(*y), m.label(*z)]))
                .collect();
            json!({ "value": v.to_json(), "primal_terms": terms })
        }
        Method::Dual => {
            let (v, f) = kr_norm_dual(mu)?;
            json!({ "value": v.to_json(), "dual_values": f.values().iter().map(Scalar::to_json).collect::<Vec<_>>() })
        }
        Method::Both => certificate_to_json(&check_duality_tol(mu, tol)?),
    })
}

fn norm<T: Scalar>(cli: &Cli, file: Option<&Path>, random: Option<usize>, points: usize, method: Method) -> Result<bool> {
    let mut rows: Vec<(Value, Value)> = Vec::new();
    match (file, random) {
        (Some(path), None) => {
            let doc = read_json(path)?;
            let m = space_of::<T>(&doc, path)?;
            let mu = free_vector_from_json(&m, &doc)?;
            rows.push((Value::Null, norm_report(&mu, method, cli.tol)?));
        }
        (None, Some(count)) => {
            if points < 2 {
                bail!(Error::Invalid("--points must be at least 2".into()));
            }
            let mut r = rng(cli.seed);
            for _ in 0..count {
                let m = random_metric(&mut r, points).map_scalar::<T>();
                let mu = random_vector(&mut r, &m, points)?;
                let input = free_vector_to_json(&mu, space_to_json(&m));
                rows.push((input, norm_report(&mu, method, cli.tol)?));
            }
        }
        _ => bail!(Error::Invalid("give either a free-vector file or --random".into())),
    }
    if cli.format == Some(Format::Csv) {
        let mut s = String::from("index,value,gap\n");
        for (i, (_, rep)) in rows.iter().enumerate() {
            let cell = |k: &str| rep.get(k).map_or(String::new(), |v| v.as_str().map_or(v.to_string(), String::from));
            let _ = writeln!(s, "{i},{},{}", cell("value"), cell("gap"));
        }
        emit(cli, &s)?;
    } else if random.is_some() {
        let items: Vec<Value> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (input, rep))| json!({ "index": i, "input": input, "report": rep }))
            .collect();
        emit_json(cli, &json!({ "seed": cli.seed, "items": items }))?;
    } else {
        emit_json(cli, &rows[0].1)?;
    }
    Ok(true)
}

fn parse_scalar<T: Scalar>(flag: &str, text: &str) -> Result<T> {
    T::parse_value(text).map_err(|e| anyhow!(Error::Invalid(format!("{flag}: {e}"))))
}

fn lemma<T: Scalar>(cli: &Cli, cmd: &LemmaCmd) -> Result<bool> {
    match cmd {
        LemmaCmd::Verify { file } => {
            let doc = read_json(file)?;
            let m = space_of::<T>(&doc, file)?;
            let (pairs, k) = pair_system_from_json(&m, &doc)?;
            let sys = PairSystem::new(&m, pairs, k)?;
            let mut out = pair_system_to_json(&sys, doc["space"].clone());
            out["report"] = lemma_report_to_json(sys.report());
            out["passed"] = json!(sys.report().passed());
            emit_json(cli, &out)?;
            Ok(sys.report().passed())
        }
        LemmaCmd::Select { strategy, space, c, d, a } => {
            let m: PointedMetricSpace<T> = space_from_json(&read_json(space)?)?;
            let sys = match strategy {
                Strategy::Unbounded => select_pairs_unbounded(&m)?,
                Strategy::Discrete => {
                    let c = c
                        .as_deref()
                        .ok_or_else(|| Error::Invalid("discrete selection needs --c".into()))?;
                    let c = parse_scalar::<T>("--c", c)?;
                    let d = match d {
                        Some(d) => parse_scalar::<T>("--d", d)?,
                        None => m.diameter(),
                    };
                    select_pairs_discrete(&m, &c, &d)?
                }
                Strategy::Cluster => {
                    let a = match a {
                        Some(l) => m
                            .index_of(l)
                            .ok_or_else(|| Error::Invalid(format!("unknown label {l:?}")))?,
                        None => m.base(),
                    };
                    select_pairs_cluster(&m, a)?
                }
            };
            let mut out = pair_system_to_json(&sys, space_to_json(&m));
            out["report"] = lemma_report_to_json(sys.report());
            out["passed"] = json!(sys.report().passed());
            emit_json(cli, &out)?;
            Ok(sys.report().passed())
        }
    }
}

fn approx<T: Scalar>(cli: &Cli, cmd: &ApproxCmd) -> Result<bool> {
    match cmd {
        ApproxCmd::Claim5 { file, eps } => {
            if !T::EXACT {
                bail!(Error::Invalid("claim5 runs in rational mode only".into()));
            }
            let eps: Rational = parse_scalar("--eps", eps)?;
            let doc = read_json(file)?;
            let m = space_of::<Surd>(&doc, file)?;
            let basis = SubspaceBasis::new(subspace_from_json(&m, &doc)?)?;
            let outcome = claim5_grid_approximation(&basis, &eps)?;
            emit_json(cli, &claim5_to_json(&outcome))?;
            Ok(outcome.passed())
        }
        ApproxCmd::Amalgam { file } => {
            let doc = read_json(file)?;
            let m = space_of::<T>(&doc, file)?;
            let mu = free_vector_from_json(&m, &doc)?;
            let split = amalgam_l1_check(&mu)?;
            emit_json(
                cli,
                &json!({
                    "total": split.total.to_json(),
                    "parts": split.parts.iter().map(Scalar::to_json).collect::<Vec<_>>(),
                    "additive": split.additive,
                }),
            )?;
            Ok(split.additive)
        }
        ApproxCmd::Scaling { file, n } => {
            let doc = read_json(file)?;
            let m = space_of::<T>(&doc, file)?;
            let mu = free_vector_from_json(&m, &doc)?;
            let target: PointedMetricSpace<T> = PointedMetricSpace::<Surd>::grid_an(*n)?.map_scalar();
            let nu = scaling_isometry_map(&mu, *n, &target)?;
            let (a, b) = (kr_norm(&mu)?, kr_norm(&nu)?);
            let equal = a.cmp_tol(&b) == std::cmp::Ordering::Equal;
            emit_json(
                cli,
                &json!({
                    "n": n,
                    "source_norm": a.to_json(),
                    "target_norm": b.to_json(),
                    "equal": equal,
                    "image": free_vector_to_json(&nu, space_to_json(&target))["coeffs"],
                }),
            )?;
            Ok(equal)
        }
    }
}

fn extend(cli: &Cli, file: &Path, csv: Option<&Path>) -> Result<bool> {
    let job = extension_job_from_json::<f64>(&read_json(file)?)?;
    let (g, cert) = c1_extend(&job)?;
    let samples = || -> Result<String> { Ok(samples_to_csv(&g.samples(job.gridstep)?)) };
    if let Some(path) = csv {
        std::fs::write(path, samples()?).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.format == Some(Format::Csv) {
        emit(cli, &samples()?)?;
    } else {
        emit_json(cli, &extension_certificate_to_json(&cert))?;
    }
    Ok(cert.passed())
}

/// The table always goes to stdout; a JSON or CSV report goes to `--out`
/// (or replaces the table when `--format` is given without `--out`).
fn accept(cli: &Cli) -> Result<bool> {
    let report = acceptance::run(cli.seed);
    let doc = match cli.format {
        Some(Format::Csv) => report.csv(),
        _ => format!("{}\n", serde_json::to_string_pretty(&report.to_json())?),
    };
    match (&cli.out, cli.format) {
        (Some(_), _) => {
            emit(cli, &doc)?;
            stdout(&report.table())?;
        }
        (None, Some(_)) => stdout(&doc)?,
        (None, None) => stdout(&report.table())?,
    }
    Ok(report.passed())
}
