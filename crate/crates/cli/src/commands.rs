use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use contextrec::experiment::{
    augment, reports_from_json, reports_to_json, run_experiment, run_suite, ExperimentReport, ExperimentSpec,
    ImprovementTable, Vocabularies,
};
use contextrec::forest::{train_forest, tune_depth, ForestParams, LabeledMatrix};
use contextrec::graph::ContextGraph;
use contextrec::ingest::{
    impute, parse_annotations, parse_sensor_log, window_records, Dataset, FeatureRecipe, ImputePolicy,
    MedianImputer, SensorCatalog,
};
use contextrec::ontology::{load_default_ontology, load_ontology};
use contextrec::synth::{sample_dataset, GeneratorParams, SynthManifest};
use contextrec::{AspectId, Ontology};
use log::info;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    ExperimentArgs, ForestArgs, GenerateArgs, GraphArgs, IngestArgs, ReportArgs, ReportFormat, TrainArgs,
    ValidateArgs,
};
use crate::manifest::{manifest_path, write_with_manifest};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn ontology_from(path: Option<&Path>, strict: bool) -> Result<Ontology> {
    match path {
        Some(p) => Ok(load_ontology(&read(p)?, strict).with_context(|| format!("loading {}", p.display()))?),
        None => Ok(load_default_ontology()),
    }
}

fn read_records(path: &Path) -> Result<Dataset> {
    Ok(Dataset::from_csv(&read(path)?).with_context(|| format!("loading {}", path.display()))?)
}

pub fn validate(args: &ValidateArgs) -> Result<()> {
    let ontology = ontology_from(Some(&args.ontology), args.strict)?;
    println!(
        "ontology {} ok: {} labels, {} time rules, {} geofences",
        ontology.version,
        ontology.label_count(),
        ontology.time_rules.len(),
        ontology.geofences.len()
    );
    if let Some(path) = &args.annotations {
        let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        let events = parse_annotations(file, &ontology).with_context(|| format!("checking {}", path.display()))?;
        println!("annotations ok: {} events", events.len());
    }
    if let Some(path) = &args.records {
        let ds = read_records(path)?;
        for (row, r) in ds.records.iter().enumerate() {
            for aspect in AspectId::RECOGNIZED {
                let label = r.labels.get(aspect).unwrap_or_default();
                if !ontology.validate_label(aspect, label) {
                    bail!(contextrec::Error::Ontology(format!(
                        "record {row}: `{label}` is not a {aspect} label"
                    )));
                }
            }
        }
        println!("records ok: {} rows, width {}", ds.len(), ds.width());
    }
    Ok(())
}

pub fn ingest(args: &IngestArgs, workers: Option<usize>) -> Result<()> {
    let ontology = ontology_from(args.ontology.as_deref(), args.strict)?;
    let catalog = match &args.catalog {
        Some(p) => SensorCatalog::from_toml(&read(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => SensorCatalog::default_catalog(),
    };
    let recipe = match &args.recipe {
        Some(p) => FeatureRecipe::from_toml(&read(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => FeatureRecipe::default_recipe(),
    }
    .compile(&catalog)?;
    let log_file = fs::File::open(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let log = parse_sensor_log(std::io::BufReader::new(log_file), &catalog, args.strict)
        .with_context(|| format!("parsing {}", args.log.display()))?;
    let ann_file = fs::File::open(&args.annotations).with_context(|| format!("reading {}", args.annotations.display()))?;
    let events = parse_annotations(ann_file, &ontology).with_context(|| format!("parsing {}", args.annotations.display()))?;
    let windowing = window_records(&log.readings, &events, i64::from(args.window_minutes) * 60_000);
    let mut ds = recipe.build_dataset(&windowing.windows);
    if args.impute {
        ds = impute(
            &ds,
            ImputePolicy {
                append_mask: args.mask_columns,
            },
        )?;
    }
    eprintln!(
        "{} readings ({} unknown, {} invalid skipped), {} windows ({} dropped, {} truncated)",
        log.readings.len(),
        log.skipped_unknown,
        log.skipped_invalid,
        windowing.windows.len(),
        windowing.dropped,
        windowing.truncated
    );
    let summary = json!({
        "readings": log.readings.len(),
        "skipped_unknown": log.skipped_unknown,
        "skipped_invalid": log.skipped_invalid,
        "windows": windowing.windows.len(),
        "dropped": windowing.dropped,
        "truncated": windowing.truncated,
        "records": ds.len(),
        "width": ds.width(),
    });
    write_with_manifest(&args.out, ds.to_csv().as_bytes(), "ingest", args, workers, Some(("summary", summary)))
}

pub fn generate(args: &GenerateArgs, workers: Option<usize>) -> Result<()> {
    let params = GeneratorParams {
        users: args.users,
        records_per_user: args.records_per_user,
        we_labels: args.we_labels,
        wa_labels: args.wa_labels,
        wo_labels: args.wo_labels,
        rho: args.rho,
        width: args.width,
        prototype_scale: args.prototype_scale,
        noise_scale: args.noise,
        seed: args.seed,
    };
    let ds = sample_dataset(&params)?;
    let synth = SynthManifest::new(&params, &ds);
    eprintln!("{} records x {} features, digest {}", ds.len(), ds.width(), synth.digest);
    write_with_manifest(
        &args.out,
        ds.to_csv().as_bytes(),
        "generate",
        args,
        workers,
        Some(("synth", serde_json::to_value(&synth)?)),
    )
}

/// Label sets for experiments: the ontology's when given, else the generator
/// vocabularies from the records' manifest, else the labels observed in the
/// records.
fn vocabularies(records: &Path, ds: &Dataset, ontology: Option<&Path>) -> Result<Vocabularies> {
    let observed = Vocabularies::observed(ds);
    let chosen = if let Some(path) = ontology {
        let o = ontology_from(Some(path), false)?;
        let ids = |a: AspectId| o.vocabulary(a).iter().map(|l| l.id.clone()).collect::<Vec<_>>();
        Vocabularies {
            we: ids(AspectId::We),
            wa: ids(AspectId::Wa),
            wo: ids(AspectId::Wo),
        }
    } else if let Some(v) = manifest_vocabularies(records)? {
        v
    } else {
        return Ok(observed);
    };
    for aspect in AspectId::RECOGNIZED {
        let known: BTreeSet<&String> = chosen.get(aspect)?.iter().collect();
        if let Some(missing) = observed.get(aspect)?.iter().find(|l| !known.contains(l)) {
            bail!(contextrec::Error::Experiment(format!(
                "record label `{missing}` is not in the {aspect} vocabulary"
            )));
        }
    }
    Ok(chosen)
}

fn manifest_vocabularies(records: &Path) -> Result<Option<Vocabularies>> {
    let path = manifest_path(records);
    if !path.exists() {
        return Ok(None);
    }
    let value: serde_json::Value =
        serde_json::from_str(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    match value.pointer("/synth/vocabularies") {
        Some(v) => Ok(Some(
            serde_json::from_value(v.clone()).with_context(|| format!("vocabularies in {}", path.display()))?,
        )),
        None => Ok(None),
    }
}

fn forest_params(f: &ForestArgs, seed: u64) -> ForestParams {
    ForestParams {
        trees: f.trees,
        min_samples_split: f.min_samples_split,
        seed,
        ..ForestParams::default()
    }
}

pub fn train(args: &TrainArgs, workers: Option<usize>) -> Result<()> {
    let ds = read_records(&args.records)?;
    let vocab = vocabularies(&args.records, &ds, args.ontology.as_deref())?;
    let spec = ExperimentSpec {
        forest: forest_params(&args.forest, args.seed),
        depth_grid: args.forest.depth_grid.clone(),
        seed: args.seed,
        ..ExperimentSpec::baseline(args.target, args.seed).with_inputs(&args.with_aspects)
    };
    spec.validate()?;
    let imputer = MedianImputer::fit(&ds.records, &ds.feature_names, ImputePolicy::default())?;
    let filled = imputer.apply(&ds);
    let classes = vocab.get(args.target)?.to_vec();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0;
    for (row, r) in filled.records.iter().enumerate() {
        let x = augment(r, &spec.inputs, &vocab).with_context(|| format!("record {row}"))?;
        width = x.len();
        features.extend(x);
        let label = r.labels.get(args.target).unwrap_or_default();
        labels.push(vocab.index_of(args.target, label).with_context(|| format!("record {row}"))?);
    }
    let data = LabeledMatrix::new(features, width, labels, classes.len())?;
    let depth = match spec.depth_grid.as_slice() {
        [only] => *only,
        grid => tune_depth(&data, &classes, grid, &spec.forest, args.seed)?.chosen,
    };
    let forest = train_forest(&data, &classes, &spec.forest.with_depth(depth))?;
    eprintln!("trained {} trees, depth {depth}, width {width}", forest.trees.len());
    let extra = json!({
        "depth": depth,
        "inputs": spec.inputs,
        "vocabularies": vocab,
        "medians": imputer.medians(),
        "dataset_digest": ds.digest(),
    });
    write_with_manifest(&args.out, forest.to_json().as_bytes(), "train", args, workers, Some(("model", extra)))
}

pub fn experiment(args: &ExperimentArgs, workers: Option<usize>) -> Result<()> {
    let ds = read_records(&args.records)?;
    let vocab = vocabularies(&args.records, &ds, args.ontology.as_deref())?;
    let target = args.target.unwrap_or(AspectId::Wa);
    let spec = ExperimentSpec {
        inputs: Vec::new(),
        protocol: args.protocol.into(),
        forest: forest_params(&args.forest, 0),
        depth_grid: args.forest.depth_grid.clone(),
        folds: args.folds,
        label_source: args.label_source.into(),
        ..ExperimentSpec::baseline(target, args.seed)
    }
    .with_inputs(&args.with_aspects);
    let start = Instant::now();
    let text = if args.suite {
        let reports = run_suite(&ds, &spec, &vocab, !args.independent_depth)?;
        for r in &reports {
            eprintln!("{:<24} micro-F1 {:.4}", r.spec.arm_name(), r.score());
        }
        reports_to_json(&reports)
    } else {
        let report = run_experiment(&ds, &spec, &vocab)?;
        eprintln!("{:<24} micro-F1 {:.4}", report.spec.arm_name(), report.score());
        report.to_json()
    };
    let elapsed = start.elapsed();
    eprintln!("runtime {:.1}s", elapsed.as_secs_f64());
    info!("experiment finished in {elapsed:?}");
    write_with_manifest(&args.out, text.as_bytes(), "experiment", args, workers, None)
}

fn plotdata(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("arm,target,inputs,label,user_mean_f1,pooled_f1,support,supported\n");
    for r in reports {
        let inputs: Vec<&str> = r.spec.inputs.iter().map(|a| a.as_str()).collect();
        for l in &r.per_label {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.spec.arm_name(),
                r.spec.target,
                inputs.join("+"),
                l.label,
                l.user_mean_f1,
                l.pooled_f1,
                l.support,
                l.supported
            );
        }
    }
    out
}

#[derive(Serialize)]
struct ArmSummary {
    arm: String,
    target: AspectId,
    inputs: Vec<AspectId>,
    mean_micro_f1: f64,
    pooled_micro_f1: f64,
    fold_mean_micro_f1: f64,
}

pub fn report(args: &ReportArgs, workers: Option<usize>) -> Result<()> {
    let reports = reports_from_json(&read(&args.input)?).with_context(|| format!("loading {}", args.input.display()))?;
    let text = match args.format {
        ReportFormat::Table => ImprovementTable::from_reports(&reports)?.render(),
        ReportFormat::Csv => ImprovementTable::from_reports(&reports)?.to_csv(),
        ReportFormat::Plotdata => plotdata(&reports),
        ReportFormat::Json => {
            let arms: Vec<ArmSummary> = reports
                .iter()
                .map(|r| ArmSummary {
                    arm: r.spec.arm_name(),
                    target: r.spec.target,
                    inputs: r.spec.inputs.clone(),
                    mean_micro_f1: r.per_user.mean_micro_f1,
                    pooled_micro_f1: r.per_user.pooled_micro_f1,
                    fold_mean_micro_f1: r.per_user.fold_mean_micro_f1,
                })
                .collect();
            let table = ImprovementTable::from_reports(&reports)?;
            let mut s = serde_json::to_string_pretty(&json!({ "arms": arms, "table": table }))?;
            s.push('\n');
            s
        }
    };
    match &args.out {
        Some(path) => write_with_manifest(path, text.as_bytes(), "report", args, workers, None),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn graph(args: &GraphArgs, workers: Option<usize>) -> Result<()> {
    let g = match &args.input {
        Some(p) => ContextGraph::import(&read(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => ContextGraph::lesson_scene(),
    };
    println!("{} entities, {} relations", g.len(), g.relation_count());
    if let Some(p) = &args.ontology {
        g.check_against(&ontology_from(Some(p), false)?)?;
        println!("subjective labels ok");
    }
    if let Some(aspect) = args.aspect {
        for e in g.query_context(aspect) {
            let related: Vec<String> = g.outgoing(&e.id).map(|r| format!("{} {}", r.label, r.target)).collect();
            println!("{}\t{}\t{}", e.id, e.category, related.join("; "));
        }
    }
    if let Some(out) = &args.out {
        write_with_manifest(out, g.export().as_bytes(), "graph", args, workers, None)?;
    }
    Ok(())
}
