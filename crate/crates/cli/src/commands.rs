use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ipsample::dataset::format_scaled;
use ipsample::eval::{
    diversity_eq_classes, jaccard_cdf, mean_curve, measure_curve, plausibility, rejection_sample_in_band,
    tail_fraction, timing_run, EvalError, MetricRecord, TailReference,
};
use ipsample::oracle::enumerate_all;
use ipsample::patterns::to_json_line;
use ipsample::{iph, nip, parse_csv, seeded_rng, HipsState, IntervalPattern, Measure, NumericalDataset, Sampler};
use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};

use crate::manifest::{sidecar, RunManifest};
use crate::{CliError, EnumerateArgs, EvalArgs, EvalCommand, MeasureArg, SampleArgs, StatsArgs};

fn load(path: &Path) -> Result<(Vec<u8>, NumericalDataset), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let dataset = parse_csv(bytes.as_slice())?;
    Ok((bytes, dataset))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn stats(args: &StatsArgs, command_line: &[String]) -> Result<(), CliError> {
    let (bytes, ds) = load(&args.input.input)?;
    let mut manifest = RunManifest::start(command_line, &args.input.input, &bytes);
    let report = manifest.phase("stats", || stats_report(&ds));
    let mut text = String::new();
    text.push_str(&format!("|M| = {}\n|G| = {}\n", ds.n_attributes(), ds.n_objects()));
    text.push_str(&format!("distinct values = {}\n", ds.total_distinct_values()));
    for (name, idx) in ds.attribute_names().iter().zip(ds.indexes()) {
        text.push_str(&format!("|W({name})| = {}\n", idx.len()));
    }
    text.push_str(&format!("search space = {}\n", report["search_space"].as_str().unwrap_or("")));
    text.push_str(&format!("Z_f = {}\n", report["z_f"].as_str().unwrap_or("")));
    match report["z_hf"].as_str() {
        Some(z) => text.push_str(&format!("Z_hf = {z}\n")),
        None => text.push_str(&format!("Z_hf undefined: {}\n", report["volume_note"].as_str().unwrap_or(""))),
    }
    print!("{text}");
    if let Some(out) = &args.output {
        fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
        manifest.outputs.push(out.display().to_string());
        manifest.finish(Some(&sidecar(out)))?;
    }
    Ok(())
}

fn stats_report(ds: &NumericalDataset) -> Value {
    let z_f: BigUint = (0..ds.n_objects()).map(|g| nip(ds, g)).sum();
    let (z_hf, note) = match HipsState::new(ds) {
        Ok(_) => {
            let z: BigUint = (0..ds.n_objects()).map(|g| iph(ds, g)).sum();
            (Some(format_scaled(&BigInt::from(z), ds.volume_scale_exponent())), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let attributes: Vec<Value> = ds
        .attribute_names()
        .iter()
        .zip(ds.indexes())
        .map(|(name, idx)| json!({ "name": name, "distinct": idx.len() }))
        .collect();
    json!({
        "attributes": ds.n_attributes(),
        "objects": ds.n_objects(),
        "distinct_values": ds.total_distinct_values(),
        "per_attribute": attributes,
        "search_space": ds.search_space_size().to_string(),
        "z_f": z_f.to_string(),
        "z_hf": z_hf,
        "volume_note": note,
    })
}

pub fn sample(args: &SampleArgs, command_line: &[String]) -> Result<(), CliError> {
    let (bytes, ds) = load(&args.input.input)?;
    let (seed, source) = args.seed.resolve();
    let mut manifest = RunManifest::start(command_line, &args.input.input, &bytes).seeded(seed, source);
    manifest.parameters = json!({ "method": args.method.name(), "k": args.k, "workers": args.workers });
    let sampler = manifest.phase("preprocessing", || Sampler::prepare(args.method, &ds))?;
    let patterns = manifest.phase("sampling", || sampler.sample_parallel(args.k, seed, args.workers));
    let text: String = patterns.iter().map(|p| to_json_line(p, &ds) + "\n").collect();
    write_or_print(args.output.as_deref(), &text)?;
    match &args.output {
        Some(out) => {
            manifest.outputs.push(out.display().to_string());
            manifest.finish(Some(&sidecar(out)))
        }
        None => manifest.finish(None),
    }
}

pub fn enumerate(args: &EnumerateArgs, command_line: &[String]) -> Result<(), CliError> {
    let (bytes, ds) = load(&args.input.input)?;
    let mut manifest = RunManifest::start(command_line, &args.input.input, &bytes);
    manifest.parameters = json!({ "cap": args.cap });
    let space = manifest.phase("enumeration", || enumerate_all(&ds, args.cap))?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ds
        .attribute_names()
        .iter()
        .flat_map(|n| [format!("{n}_lo"), format!("{n}_hi")])
        .collect();
    header.extend(["freq".to_string(), "vol".to_string()]);
    writer.write_record(&header)?;
    let exp = ds.volume_scale_exponent();
    for p in &space.patterns {
        let mut row: Vec<String> = p
            .pattern
            .bounds()
            .iter()
            .enumerate()
            .flat_map(|(m, &(a, b))| [ds.format_value(m, a), ds.format_value(m, b)])
            .collect();
        row.push(p.freq.to_string());
        row.push(format_scaled(&BigInt::from(p.vol.clone()), exp));
        writer.write_record(&row)?;
    }
    let text = writer.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    match &args.output {
        Some(out) => {
            fs::write(out, text)?;
            manifest.outputs.push(out.display().to_string());
            manifest.finish(Some(&sidecar(out)))
        }
        None => {
            std::io::stdout().lock().write_all(&text)?;
            manifest.finish(None)
        }
    }
}

/// Runs `f(rep)` for every repetition, spread over `workers` threads, in repetition order.
fn run_reps<T: Send>(
    reps: u64,
    workers: usize,
    f: impl Fn(u64) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let workers = workers.clamp(1, reps.max(1) as usize);
    if workers == 1 {
        return (0..reps).map(&f).collect();
    }
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| scope.spawn(move || (w..reps).step_by(workers).map(|r| (r, f(r))).collect::<Vec<_>>()))
            .collect();
        let mut all: Vec<(u64, Result<T, CliError>)> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("evaluation worker panicked"))
            .collect();
        all.sort_by_key(|(r, _)| *r);
        all.into_iter().map(|(_, res)| res).collect()
    })
}

fn records(patterns: &[IntervalPattern], ds: &NumericalDataset, args: &EvalArgs, seed: u64) -> Vec<MetricRecord> {
    patterns
        .iter()
        .enumerate()
        .map(|(i, p)| MetricRecord::new(args.method, i, p, ds, None, seed))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

struct RepOutput {
    records: Vec<MetricRecord>,
    summary: Value,
    timed_out: bool,
}

fn rep(records: Vec<MetricRecord>, summary: Value) -> RepOutput {
    RepOutput {
        records,
        summary,
        timed_out: false,
    }
}

pub fn eval(command: &EvalCommand, command_line: &[String]) -> Result<(), CliError> {
    let (metric, args) = match command {
        EvalCommand::FreqCurve(a) => ("freq-curve", a),
        EvalCommand::VolfreqCurve(a) => ("volfreq-curve", a),
        EvalCommand::Tail { common, .. } => ("tail", common),
        EvalCommand::Diversity(a) => ("diversity", a),
        EvalCommand::JaccardCdf { common, .. } => ("jaccard-cdf", common),
        EvalCommand::Plausibility { common, .. } => ("plausibility", common),
        EvalCommand::DrawsInBand { common, .. } => ("draws-in-band", common),
        EvalCommand::Timing(a) => ("timing", a),
    };
    let (bytes, ds) = load(&args.input.input)?;
    let (seed, source) = args.seed.resolve();
    let mut manifest = RunManifest::start(command_line, &args.input.input, &bytes).seeded(seed, source);
    let sampler = manifest.phase("preprocessing", || Sampler::prepare(args.method, &ds))?;
    let ds = &ds;
    let sampler = &sampler;
    let k = args.k;
    let draw = move |r: u64| sampler.sample_k(k, &mut seeded_rng(seed.wrapping_add(r)));

    let mut extra = serde_json::Map::new();
    let eval_start = std::time::Instant::now();
    let outputs: Vec<RepOutput> = match command {
        EvalCommand::FreqCurve(_) | EvalCommand::VolfreqCurve(_) => {
            let measure = if metric == "freq-curve" { Measure::Frequency } else { Measure::VolumeFrequency };
            let reps = run_reps(args.reps, args.workers, |r| {
                let patterns = draw(r);
                let curve = measure_curve(&patterns, ds, measure);
                Ok(rep(records(&patterns, ds, args, seed.wrapping_add(r)), json!(curve)))
            })?;
            let curves: Vec<Vec<f64>> = reps
                .iter()
                .map(|o| serde_json::from_value(o.summary.clone()).unwrap_or_default())
                .collect();
            extra.insert("mean_curve".into(), json!(mean_curve(&curves)));
            reps
        }
        EvalCommand::Tail {
            measure,
            threshold,
            reference,
            ..
        } => {
            let measure = match measure {
                MeasureArg::Freq => Measure::Frequency,
                MeasureArg::VolFreq => Measure::VolumeFrequency,
            };
            let reference: TailReference = (*reference).into();
            extra.insert("threshold".into(), json!(threshold));
            extra.insert("measure".into(), json!(format!("{measure:?}")));
            extra.insert("reference".into(), json!(format!("{reference:?}")));
            run_reps(args.reps, args.workers, |r| {
                let patterns = draw(r);
                let value = tail_fraction(&patterns, ds, measure, *threshold, reference);
                Ok(rep(records(&patterns, ds, args, seed.wrapping_add(r)), json!(value)))
            })?
        }
        EvalCommand::Diversity(_) => run_reps(args.reps, args.workers, |r| {
            let patterns = draw(r);
            let value = diversity_eq_classes(&patterns, ds)?;
            Ok(rep(records(&patterns, ds, args, seed.wrapping_add(r)), json!(value)))
        })?,
        EvalCommand::JaccardCdf { steps, .. } => {
            let steps = (*steps).max(1);
            let thresholds: Vec<f64> = (0..=steps).map(|i| f64::from(i) / f64::from(steps)).collect();
            extra.insert("thresholds".into(), json!(thresholds));
            extra.insert("empty_pair_convention".into(), json!("jaccard of two empty covers is 1"));
            let reps = run_reps(args.reps, args.workers, |r| {
                let patterns = draw(r);
                let cdf = jaccard_cdf(&patterns, ds, &thresholds)?;
                Ok(rep(records(&patterns, ds, args, seed.wrapping_add(r)), json!(cdf)))
            })?;
            let cdfs: Vec<Vec<f64>> = reps
                .iter()
                .map(|o| serde_json::from_value(o.summary.clone()).unwrap_or_default())
                .collect();
            extra.insert("mean_cdf".into(), json!(mean_curve(&cdfs)));
            reps
        }
        EvalCommand::Plausibility {
            r: repetitions,
            swaps,
            band,
            time_limit,
            ..
        } => {
            let swaps = swaps.unwrap_or(ds.n_objects());
            extra.insert("R".into(), json!(repetitions));
            extra.insert("swaps_per_attribute".into(), json!(swaps));
            extra.insert("band".into(), json!(band.map(|(lo, hi)| [lo, hi])));
            let limit = seconds(*time_limit)?;
            run_reps(args.reps, args.workers, |r| {
                let rep_seed = seed.wrapping_add(r);
                let mut rng = seeded_rng(rep_seed);
                let patterns = match band {
                    Some(b) => rejection_sample_in_band(sampler, *b, k, limit, &mut rng)?.patterns,
                    None => sampler.sample_k(k, &mut rng),
                };
                let report = plausibility(&patterns, ds, *repetitions, &mut rng, swaps)?;
                Ok(rep(
                    records(&patterns, ds, args, rep_seed),
                    json!({ "value": report.value, "numerator": report.numerator, "denominator": report.denominator }),
                ))
            })?
        }
        EvalCommand::DrawsInBand { band, time_limit, .. } => {
            extra.insert("band".into(), json!([band.0, band.1]));
            let limit = seconds(*time_limit)?;
            run_reps(args.reps, args.workers, |r| {
                let rep_seed = seed.wrapping_add(r);
                let (sample, timed_out) =
                    match rejection_sample_in_band(sampler, *band, k, limit, &mut seeded_rng(rep_seed)) {
                        Ok(s) => (s, false),
                        Err(EvalError::TimeLimitExceeded { partial }) => (*partial, true),
                        Err(e) => return Err(e.into()),
                    };
                Ok(RepOutput {
                    records: records(&sample.patterns, ds, args, rep_seed),
                    summary: json!({
                        "draws": sample.draws,
                        "accepted": sample.patterns.len(),
                        "timed_out": timed_out,
                    }),
                    timed_out,
                })
            })?
        }
        EvalCommand::Timing(_) => {
            // one thread only, so repetitions do not contend
            (0..args.reps)
                .map(|r| {
                    let rep_seed = seed.wrapping_add(r);
                    let report = timing_run(args.method, ds, k, &mut seeded_rng(rep_seed))?;
                    let records = report
                        .patterns
                        .iter()
                        .zip(&report.per_draw)
                        .enumerate()
                        .map(|(i, (p, t))| MetricRecord::new(args.method, i, p, ds, Some(*t), rep_seed))
                        .collect();
                    Ok(rep(
                        records,
                        json!({
                            "preprocessing_s": report.preprocessing.as_secs_f64(),
                            "mean_draw_us": report.mean_draw().as_secs_f64() * 1e6,
                            "total_s": report.total.as_secs_f64(),
                        }),
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };
    manifest.record("evaluation", eval_start.elapsed());

    let per_rep: Vec<Value> = outputs.iter().map(|o| o.summary.clone()).collect();
    let scalar: Vec<f64> = per_rep
        .iter()
        .filter_map(|v| v.as_f64().or_else(|| v.get("value").and_then(Value::as_f64)))
        .collect();
    let mut summary = serde_json::Map::new();
    summary.insert("metric".into(), json!(metric));
    summary.insert("method".into(), json!(args.method.name()));
    summary.insert("k".into(), json!(k));
    summary.insert("reps".into(), json!(args.reps));
    summary.insert("seed".into(), json!(seed));
    if scalar.len() == per_rep.len() && !scalar.is_empty() {
        summary.insert("mean".into(), json!(mean(&scalar)));
    }
    if metric == "draws-in-band" {
        let draws: Vec<f64> = per_rep.iter().filter_map(|v| v["draws"].as_f64()).collect();
        summary.insert("mean_draws".into(), json!(mean(&draws)));
    }
    let mut parameters = serde_json::Map::new();
    parameters.insert("metric".into(), json!(metric));
    parameters.insert("method".into(), json!(args.method.name()));
    parameters.insert("k".into(), json!(k));
    parameters.insert("reps".into(), json!(args.reps));
    parameters.insert("workers".into(), json!(args.workers));
    for (key, value) in &extra {
        if !key.starts_with("mean_") {
            parameters.insert(key.clone(), value.clone());
        }
    }
    manifest.parameters = Value::Object(parameters);
    summary.extend(extra);
    summary.insert("per_rep".into(), Value::Array(per_rep));
    let summary_text = serde_json::to_string_pretty(&Value::Object(summary))? + "\n";


    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let metrics = dir.join("metrics.csv");
            let mut writer = csv::Writer::from_path(&metrics)?;
            for record in outputs.iter().flat_map(|o| &o.records) {
                writer.serialize(record)?;
            }
            writer.flush()?;
            let summary_path = dir.join("summary.json");
            fs::write(&summary_path, &summary_text)?;
            manifest.outputs = [metrics, summary_path].iter().map(|p: &PathBuf| p.display().to_string()).collect();
            manifest.finish(Some(&dir.join("manifest.json")))?;
        }
        None => {
            print!("{summary_text}");
            manifest.finish(None)?;
        }
    }
    if outputs.iter().any(|o| o.timed_out) {
        return Err(CliError::TimeLimit(format!("{metric} stopped before {k} patterns were accepted")));
    }
    Ok(())
}

fn seconds(s: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("invalid time limit {s}")))
}
