use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use selfdual::construction::{construct, presets, CanonicalChoice, ConstructionSpec};
use selfdual::estimator::{dim_survey_with, DimSurvey};
use selfdual::formulas::{moduli_dim, DimReport};
use selfdual::gale::{gale_transform, verify_translation, GaleConvention};
use selfdual::io::{certificate_to_json, export_obj, polygon_to_json, AnyPolygon};
use selfdual::numeric::{Complex64, GaussRat, Scalar};
use selfdual::pentagram::{conjecture_sweep, pentagram_iterate, ConjectureTrial, MultiIndexPair};
use selfdual::polygon::Polygon;
use selfdual::selfdual::{check_self_dual, classify_form, SelfDuality};
use selfdual::Error;
use serde_json::{json, Value};

use crate::{Cli, CliError, Command, ConventionArg, Format, RunConfig, Verdict};

type Outcome = Result<Verdict, CliError>;

const DEFAULT_DIM_TRIALS: usize = 10;
const DEFAULT_CONJECTURE_TRIALS: usize = 20;

pub fn run(cli: &Cli) -> Outcome {
    let cfg = &cli.run;
    if !cfg.exact && !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    match &cli.command {
        Command::Construct {
            m,
            n,
            k,
            canonical,
            preset,
            complex,
            output,
            certificate,
        } => {
            let (m, n, k, choice) = match preset {
                Some(name) => {
                    let (_, m, n, k, c) = presets()
                        .into_iter()
                        .find(|p| p.0 == name)
                        .ok_or_else(|| CliError::Usage(format!("unknown preset {name:?}; known: {}", preset_names())))?;
                    (m, n, k, Some(c))
                }
                None => (m.expect("clap"), n.expect("clap"), k.expect("clap"), canonical.clone()),
            };
            let seed = need_seed(cfg)?;
            let mut spec = match choice {
                Some(c) => ConstructionSpec::new(m, n, k, c, seed),
                None => ConstructionSpec::default_for(m, n, k, seed)?,
            };
            spec.real = !complex;
            spec.retries = cfg.retries;
            spec.tol = cfg.tol;
            let (poly, cert) = if cfg.exact {
                construct_docs::<GaussRat>(&spec)?
            } else {
                construct_docs::<Complex64>(&spec)?
            };
            match output {
                Some(path) => {
                    write_json(&poly, Some(path))?;
                    write_json(&cert, certificate.as_deref())?;
                }
                None => {
                    if let Some(path) = certificate {
                        write_json(&cert, Some(path))?;
                    }
                    write_json(&json!({ "polygon": poly, "certificate": cert }), None)?;
                }
            }
            Ok(Verdict::Pass)
        }
        Command::Dual { input, output } => {
            let doc = match read_polygon(input, cfg)? {
                AnyPolygon::Approx(p) => polygon_to_json(&p.dual(cfg.tol)?.as_polygon()?),
                AnyPolygon::Exact(p) => polygon_to_json(&p.dual(cfg.tol)?.as_polygon()?),
            };
            write_json(&doc, output.as_deref())?;
            Ok(Verdict::Pass)
        }
        Command::Check { m, input } => match read_polygon(input, cfg)? {
            AnyPolygon::Approx(p) => check_doc(&p, *m, cfg.tol, false),
            AnyPolygon::Exact(p) => check_doc(&p, *m, cfg.tol, false),
        },
        Command::Classify { m, input } => match read_polygon(input, cfg)? {
            AnyPolygon::Approx(p) => check_doc(&p, *m, cfg.tol, true),
            AnyPolygon::Exact(p) => check_doc(&p, *m, cfg.tol, true),
        },
        Command::Dim {
            m,
            n,
            k,
            sweep,
            nmax,
            kmax,
        } => {
            if *sweep {
                return dim_sweep(*nmax, *kmax);
            }
            let report = moduli_dim(m.expect("clap"), n.expect("clap"), k.expect("clap"))?;
            match cfg.format.unwrap_or(Format::Text) {
                Format::Json => {
                    let mut v = serde_json::to_value(&report).expect("serializable");
                    v["dim"] = json!(report.largest().map(|c| c.dim));
                    write_json(&v, None)?;
                }
                Format::Csv => {
                    let mut out = String::from("m,n,k,source,component,dim\n");
                    for c in &report.components {
                        out.push_str(&format!("{},{},{},{},{},{}\n", report.m, report.n, report.k, report.source, c.label, c.dim));
                    }
                    write_text(&out, None)?;
                }
                Format::Text => write_text(&dim_text(&report), None)?,
            }
            Ok(Verdict::Pass)
        }
        Command::EstimateDim {
            m,
            n,
            k,
            canonical,
            compare,
        } => estimate_dim(cfg, *m, *n, *k, canonical.clone(), *compare),
        Command::Gale {
            input,
            convention,
            output,
        } => match read_polygon(input, cfg)? {
            AnyPolygon::Approx(p) => gale_doc(&p, *convention, cfg.tol, output.as_deref()),
            AnyPolygon::Exact(p) => gale_doc(&p, *convention, cfg.tol, output.as_deref()),
        },
        Command::Pentagram {
            input,
            i,
            j,
            iterations,
            output,
        } => {
            let poly = read_polygon(input, cfg)?;
            let k = match &poly {
                AnyPolygon::Approx(p) => p.ambient_dim(),
                AnyPolygon::Exact(p) => p.ambient_dim(),
            };
            let pair = match (i, j) {
                (None, None) => MultiIndexPair::conjecture(k)?,
                (Some(i), None) => MultiIndexPair::new(i.clone(), vec![1; i.len()])?,
                (None, Some(j)) => {
                    let mut pair = MultiIndexPair::conjecture(k)?;
                    pair.j.clone_from(j);
                    MultiIndexPair::new(pair.i, pair.j)?
                }
                (Some(i), Some(j)) => MultiIndexPair::new(i.clone(), j.clone())?,
            };
            if pair.k() != k {
                return Err(CliError::Usage(format!(
                    "I and J have length {}, polygon lives in P^{k} and needs {}",
                    pair.k() - 1,
                    k - 1
                )));
            }
            let doc = match poly {
                AnyPolygon::Approx(p) => polygon_to_json(&pentagram_iterate(&p, &pair, *iterations, cfg.tol)?),
                AnyPolygon::Exact(p) => polygon_to_json(&pentagram_iterate(&p, &pair, *iterations, cfg.tol)?),
            };
            write_json(&doc, output.as_deref())?;
            Ok(Verdict::Pass)
        }
        Command::Conjecture { kmin, kmax, exact_max } => {
            let seed = need_seed(cfg)?;
            let trials = cfg.trials.unwrap_or(DEFAULT_CONJECTURE_TRIALS);
            let exact_max = if cfg.exact { *kmax } else { *exact_max };
            let rows = conjecture_sweep(*kmin, *kmax, trials, seed, exact_max, cfg.tol)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => write_json(&serde_json::to_value(&rows).expect("serializable"), None)?,
                Format::Csv | Format::Text => write_text(&conjecture_csv(&rows), None)?,
            }
            eprint!("{}", residual_histogram(&rows));
            Ok(if rows.iter().all(|r| r.pass) { Verdict::Pass } else { Verdict::Fail })
        }
        Command::ExportObj { input, output } => {
            let obj = match read_polygon(input, cfg)? {
                AnyPolygon::Approx(p) => export_obj(&p, cfg.tol)?,
                AnyPolygon::Exact(p) => export_obj(&p, cfg.tol)?,
            };
            write_text(&obj, output.as_deref())?;
            Ok(Verdict::Pass)
        }
    }
}

fn need_seed(cfg: &RunConfig) -> Result<u64, CliError> {
    cfg.seed
        .ok_or_else(|| CliError::Usage("this command is randomized; pass --seed".into()))
}

fn preset_names() -> String {
    presets().iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
}

fn read_polygon(path: &Path, cfg: &RunConfig) -> Result<AnyPolygon, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let poly = AnyPolygon::parse(&text)?;
    if cfg.exact && matches!(poly, AnyPolygon::Approx(_)) {
        return Err(CliError::Usage(format!(
            "{} holds approximate coordinates; --exact needs an exact document",
            path.display()
        )));
    }
    Ok(poly)
}

fn write_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // a closed reader (`| head`) is not an error
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn write_json(v: &Value, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    write_text(&text, path)
}

fn construct_docs<S: Scalar>(spec: &ConstructionSpec) -> Result<(Value, Value), CliError> {
    let rep = construct::<S>(spec)?;
    Ok((
        polygon_to_json(&rep.polygon),
        certificate_to_json(&rep.certificate, Some(&rep.canonical)),
    ))
}

/// Shared by `check` and `classify`; the latter adds the canonical form.
fn check_doc<S: Scalar>(p: &Polygon<S>, m: i64, tol: f64, classify: bool) -> Outcome {
    match check_self_dual(p, m, tol)? {
        SelfDuality::SelfDual(cert) => {
            let canonical = if classify { Some(classify_form(&cert, tol)?) } else { None };
            let mut doc = certificate_to_json(&cert, canonical.as_ref());
            doc["self_dual"] = json!(true);
            write_json(&doc, None)?;
            Ok(Verdict::Pass)
        }
        SelfDuality::NotSelfDual { residual, detail } => {
            write_json(&json!({ "self_dual": false, "m": m, "residual": residual, "detail": detail }), None)?;
            Ok(Verdict::Fail)
        }
    }
}

fn dim_text(report: &DimReport) -> String {
    let mut out = format!("m {} n {} k {} source {}\n", report.m, report.n, report.k, report.source);
    for c in &report.components {
        out.push_str(&format!("component {} dim {}\n", c.label, c.dim));
    }
    match report.largest() {
        Some(c) => out.push_str(&format!("dim {}\n", c.dim)),
        None => out.push_str("dim unknown\n"),
    }
    out
}

fn dim_sweep(nmax: usize, kmax: usize) -> Outcome {
    let mut out = String::from("m,n,k,source,component,dim\n");
    for k in 1..=kmax {
        for n in k + 3..=nmax {
            // m and k-1 share parity
            for m in (((k + 1) % 2) as i64..2 * n as i64).step_by(2) {
                let report = moduli_dim(m, n, k)?;
                if report.components.is_empty() {
                    out.push_str(&format!("{m},{n},{k},{},,\n", report.source));
                }
                for c in &report.components {
                    out.push_str(&format!("{m},{n},{k},{},{},{}\n", report.source, c.label, c.dim));
                }
            }
        }
    }
    write_text(&out, None)?;
    Ok(Verdict::Pass)
}

/// Component of `report` matching the requested class; the largest one
/// when nothing matches.
fn predicted(report: &DimReport, choice: &CanonicalChoice) -> Option<(String, i64)> {
    let label = match choice {
        CanonicalChoice::Identity => "identity".to_string(),
        CanonicalChoice::FullSymplectic => "symplectic".to_string(),
        CanonicalChoice::Symplectic(f) => format!("f={f}"),
        CanonicalChoice::OrderThree { s1, s2 } => format!("s=({s1},{s2})"),
        CanonicalChoice::Angles(_) => String::new(),
    };
    report
        .components
        .iter()
        .find(|c| c.label == label)
        .or_else(|| report.largest())
        .map(|c| (c.label.clone(), c.dim))
}

fn estimate_dim(cfg: &RunConfig, m: i64, n: usize, k: usize, canonical: Option<CanonicalChoice>, compare: bool) -> Outcome {
    let seed = need_seed(cfg)?;
    let trials = cfg.trials.unwrap_or(DEFAULT_DIM_TRIALS);
    let choice = match canonical {
        Some(c) => c,
        None => ConstructionSpec::default_for(m, n, k, seed)?.canonical,
    };
    if cfg.exact {
        // surface ExactUnsupported as a usage error instead of ten trial failures
        if let Err(e @ Error::ExactUnsupported(_)) = construct::<GaussRat>(&ConstructionSpec::new(m, n, k, choice.clone(), seed)) {
            return Err(e.into());
        }
    }
    let survey: DimSurvey = if cfg.exact {
        dim_survey_with::<GaussRat>(m, n, k, &choice, trials, seed, cfg.tol)
    } else {
        dim_survey_with::<Complex64>(m, n, k, &choice, trials, seed, cfg.tol)
    };
    if survey.modal.is_none() {
        let reason = survey.failures.first().cloned().unwrap_or_default();
        return Err(CliError::Degenerate(format!("no trial produced an estimate: {reason}")));
    }
    let mut doc = serde_json::to_value(&survey).expect("serializable");
    let mut verdict = Verdict::Pass;
    if compare {
        let report = moduli_dim(m, n, k)?;
        let predicted = predicted(&report, &choice);
        let pass = predicted.as_ref().map(|p| p.1) == survey.modal && survey.unanimous();
        if !pass {
            verdict = Verdict::Fail;
        }
        doc["compare"] = json!({
            "source": report.source,
            "component": predicted.as_ref().map(|p| p.0.clone()),
            "formula": predicted.map(|p| p.1),
            "estimate": survey.modal,
            "verdict": if pass { "PASS" } else { "FAIL" },
        });
    }
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&doc, None)?,
        Format::Csv | Format::Text => {
            let hist: Vec<String> = survey.histogram.iter().map(|(d, c)| format!("{d}x{c}")).collect();
            let mut line = format!(
                "m {m} n {n} k {k} class {} trials {} modal {} histogram {} failures {}",
                survey.canonical,
                survey.trials,
                survey.modal.map_or("none".into(), |d| d.to_string()),
                hist.join(" "),
                survey.failures.len()
            );
            if let Some(c) = doc.get("compare") {
                line.push_str(&format!(" formula {} {}", c["formula"], c["verdict"].as_str().unwrap_or("")));
            }
            line.push('\n');
            write_text(&line, None)?;
        }
    }
    Ok(verdict)
}

fn gale_doc<S: Scalar>(p: &Polygon<S>, convention: ConventionArg, tol: f64, output: Option<&Path>) -> Outcome {
    let n = p.n() as i64;
    let chosen = match convention {
        ConventionArg::Plain => GaleConvention::Plain,
        ConventionArg::Alternating => GaleConvention::Alternating,
        ConventionArg::Auto => {
            let parity = ((p.ambient_dim() + 1) % 2) as i64;
            let mut shift = None;
            for m in (parity..2 * n).step_by(2) {
                if check_self_dual(p, m, tol)?.is_self_dual() {
                    shift = Some(m);
                    break;
                }
            }
            match shift {
                Some(m) => {
                    let mut passing = Vec::new();
                    for c in [GaleConvention::CALIBRATED, GaleConvention::Alternating, GaleConvention::Plain] {
                        if !passing.contains(&c) && verify_translation(p, m, c, tol)? {
                            passing.push(c);
                        }
                    }
                    eprintln!(
                        "selfdual: input is {m}-self-dual; conventions translating it: {}",
                        passing.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                    );
                    passing.first().copied().unwrap_or(GaleConvention::CALIBRATED)
                }
                None => GaleConvention::CALIBRATED,
            }
        }
    };
    let image = gale_transform(p, chosen, tol)?;
    eprintln!("selfdual: gale convention {chosen}");
    write_json(&polygon_to_json(&image), output)?;
    Ok(Verdict::Pass)
}

fn conjecture_csv(rows: &[ConjectureTrial]) -> String {
    let mut out = String::from("k,trial,shift,residual,verdict,runner_up,tolerance,arithmetic,reflected_verdict,resamples\n");
    let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:e},{},{:e},{:e},{},{},{}\n",
            r.k,
            r.trial,
            r.shift,
            r.residual,
            verdict(r.pass),
            r.runner_up,
            r.tolerance,
            if r.exact { "exact" } else { "approx" },
            verdict(r.reflected_pass),
            r.resamples
        ));
    }
    out
}

/// Residuals bucketed by decade; exact zeros get their own bucket.
fn residual_histogram(rows: &[ConjectureTrial]) -> String {
    let mut buckets: BTreeMap<i32, usize> = BTreeMap::new();
    for r in rows {
        let key = if r.residual == 0.0 {
            i32::MIN
        } else {
            r.residual.log10().floor() as i32
        };
        *buckets.entry(key).or_insert(0) += 1;
    }
    let mut out = format!(
        "residuals over {} trials, {} FAIL\n",
        rows.len(),
        rows.iter().filter(|r| !r.pass).count()
    );
    for (key, count) in buckets {
        let label = if key == i32::MIN { "0".to_string() } else { format!("1e{key}") };
        out.push_str(&format!("  {label:>6} {count}\n"));
    }
    out
}
