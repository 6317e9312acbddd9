use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use emtk_core::bench::{render_csv, render_table, run_benchmark, synthetic_corpus, BenchmarkOptions};
use emtk_core::corpus::{format_row, parse_corpus, Delimiter, Document};
use emtk_core::features::{load_wordspace, FeatureConfig, WordSpace};
use emtk_core::learner::{
    classify_emotions, classify_polarity, evaluate_polarity, train_emotion_suite, train_polarity, write_classification,
    EmotionClassifier, PolarityClassifier, PolarityOptions, SuiteOptions,
};
use emtk_core::pipeline::{available_cores, PipelineConfig};
use emtk_core::textproc::read_list;

use crate::paths::Workspace;
use crate::{
    BenchArgs, BenchTask, Command, EmotionsClassifyArgs, EmotionsCommand, EmotionsTrainArgs, PolarityArgs,
    PolarityFeatures, PolarityTrainArgs,
};

pub(crate) fn execute(command: Command) -> Result<()> {
    let ws = Workspace::from_env()?;
    match command {
        Command::Polarity(a) => polarity(&ws, a),
        Command::PolarityTrain(a) => polarity_train(&ws, a),
        Command::Emotions { command: EmotionsCommand::Train(a) } => emotions_train(&ws, a),
        Command::Emotions { command: EmotionsCommand::Classify(a) } => emotions_classify(&ws, a),
        Command::Bench(a) => bench(&ws, a),
    }
}

fn read_corpus(path: &Path, delimiter: Option<Delimiter>, labeled: bool) -> Result<(Vec<Document>, Delimiter)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let d = delimiter.unwrap_or_else(|| Delimiter::sniff(&bytes));
    let docs = match parse_corpus(&bytes, d, labeled) {
        Ok(docs) => docs,
        // a labeled file classified without scoring: keep id and text
        Err(e) if !labeled => match parse_corpus(&bytes, d, true) {
            Ok(docs) => {
                eprintln!("note: {} has a label column; it is ignored without the labeled flag", path.display());
                docs.into_iter().map(|doc| Document { label: None, ..doc }).collect()
            }
            Err(_) => return Err(e).with_context(|| format!("in {}", path.display())),
        },
        Err(e) => return Err(e).with_context(|| format!("in {}", path.display())),
    };
    Ok((docs, d))
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .with_context(|| format!("{} does not name a file", path.display()))
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn pipeline_config(workers: Option<usize>) -> Result<PipelineConfig> {
    let config = PipelineConfig::with_workers(workers.unwrap_or_else(available_cores));
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn allow_list(ws: &Workspace, path: &Option<PathBuf>) -> Result<Option<BTreeSet<String>>> {
    match path {
        Some(p) => {
            let p = ws.resolve(p)?;
            Ok(Some(read_list(&p)?.into_iter().collect()))
        }
        None => Ok(None),
    }
}

fn feature_config(ws: &Workspace, f: &PolarityFeatures, politeness: bool) -> Result<FeatureConfig> {
    let mut config = FeatureConfig::polarity(f.mode, f.vector_dim)
        .with_allow_lists(allow_list(ws, &f.unigram_list)?, allow_list(ws, &f.bigram_list)?);
    config.politeness_mood = politeness;
    Ok(config)
}

fn wordspace(ws: &Workspace, f: &PolarityFeatures) -> Result<Option<WordSpace>> {
    let Some(path) = &f.wordspace else { return Ok(None) };
    let path = ws.resolve(path)?;
    let bytes = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let space = load_wordspace(&bytes).with_context(|| format!("in {}", path.display()))?;
    if space.dim() != f.vector_dim {
        bail!("word space {} has dimension {}, but -vd {} was given", path.display(), space.dim(), f.vector_dim);
    }
    Ok(Some(space))
}

fn polarity(ws: &Workspace, a: PolarityArgs) -> Result<()> {
    let input = ws.resolve(&a.input)?;
    let output = ws.resolve(&a.output)?;
    let (docs, _) = read_corpus(&input, a.features.delimiter, a.labeled)?;
    let classifier = match &a.model {
        Some(dir) => {
            if a.features.wordspace.is_some() {
                eprintln!("warning: -W is ignored with -m; the model's own word space is used");
            }
            let config = feature_config(ws, &a.features, false)?;
            PolarityClassifier::load(&ws.resolve(dir)?, &config)?
        }
        None => {
            let config = feature_config(ws, &a.features, false)?;
            PolarityClassifier::bundled(&config, wordspace(ws, &a.features)?, a.features.seed)?
        }
    };
    let predictions = classify_polarity(&classifier, &docs, &pipeline_config(a.workers)?)?;
    let unseen: usize = predictions.iter().map(|p| p.unseen).sum();
    if unseen > 0 {
        eprintln!("warning: {unseen} feature occurrences unknown to the model were ignored");
    }
    let mut csv = format_row(&["id", "predicted"], Delimiter::Comma);
    for (d, p) in docs.iter().zip(&predictions) {
        csv.push_str(&format_row(&[d.id.as_str(), p.label.as_str()], Delimiter::Comma));
    }
    write(&output, &csv)?;
    if a.labeled {
        let report = evaluate_polarity(&docs, &predictions)?;
        let path = performance_path(&output);
        write(&path, &report.render("polarity"))?;
        eprintln!("performance report: {}", path.display());
    }
    eprintln!("{} predictions written to {}", docs.len(), output.display());
    Ok(())
}

/// `out.csv` -> `out_performance.txt` in the same directory.
pub(crate) fn performance_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "output".into());
    output.with_file_name(format!("{stem}_performance.txt"))
}

fn polarity_train(ws: &Workspace, a: PolarityTrainArgs) -> Result<()> {
    let input = ws.resolve(&a.input)?;
    let model_dir = ws.resolve(&a.model)?;
    let (docs, _) = read_corpus(&input, a.features.delimiter, true)?;
    let config = feature_config(ws, &a.features, a.politeness)?;
    let options =
        PolarityOptions { seed: a.features.seed, wordspace: wordspace(ws, &a.features)?, ..Default::default() };
    let (classifier, report) = train_polarity(&docs, &config, &options)?;
    classifier.save(&model_dir)?;
    write(&model_dir.join("performance_polarity.txt"), &report.render("polarity"))?;
    println!("{}", report.render("polarity"));
    eprintln!("model written to {}", model_dir.display());
    Ok(())
}

fn emotions_train(ws: &Workspace, a: EmotionsTrainArgs) -> Result<()> {
    if a.legacy_g {
        eprintln!("warning: -g is accepted for compatibility and has no effect");
    }
    let input = ws.resolve(&a.input)?;
    let root = match &a.out_dir {
        Some(d) => ws.resolve(d)?,
        None => parent_dir(&input),
    };
    let (docs, d) = read_corpus(&input, Some(a.delimiter), true)?;
    let mut options = SuiteOptions::new(a.emotion, file_name(&input)?, root);
    options.politeness_mood = a.politeness;
    options.delimiter = d;
    options.seed = a.seed;
    if let Some(w) = a.workers {
        options.workers = w;
    }
    let artifacts = train_emotion_suite(&docs, &options)?;
    println!("{}", artifacts.root.display());
    Ok(())
}

fn emotions_classify(ws: &Workspace, a: EmotionsClassifyArgs) -> Result<()> {
    let input = ws.resolve(&a.input)?;
    let root = match &a.out_dir {
        Some(d) => ws.resolve(d)?,
        None => parent_dir(&input),
    };
    let (docs, d) = read_corpus(&input, Some(a.delimiter), a.labeled)?;
    let classifier = match (&a.model, &a.idfs, &a.ngrams) {
        (Some(m), Some(f), Some(o)) => {
            EmotionClassifier::load(a.emotion, &ws.resolve(m)?, &ws.resolve(f)?, &ws.resolve(o)?, a.politeness)?
        }
        _ => EmotionClassifier::bundled(a.emotion, a.politeness, a.seed)?,
    };
    let run = classify_emotions(&classifier, &docs, &pipeline_config(a.workers)?)?;
    let unseen = run.unseen_features();
    if unseen > 0 {
        eprintln!("warning: {unseen} feature occurrences unknown to the model were ignored");
    }
    let gold = a.labeled.then_some(docs.as_slice());
    let dir = write_classification(&root, &file_name(&input)?, a.emotion, &run, gold, d)?;
    println!("{}", dir.display());
    Ok(())
}

fn bench(ws: &Workspace, a: BenchArgs) -> Result<()> {
    let docs = match (&a.input, a.synthetic) {
        (Some(p), _) => read_corpus(&ws.resolve(p)?, None, a.labeled)?.0,
        (None, Some(n)) => synthetic_corpus(n, a.seed),
        (None, None) => unreachable!("clap requires one corpus source"),
    };
    let options = BenchmarkOptions { worker_counts: a.workers.clone(), repetitions: a.reps, batch_size: a.batch_size };
    let results = match a.task {
        BenchTask::Polarity => {
            let config = FeatureConfig::polarity(a.mode, a.vector_dim);
            let classifier = PolarityClassifier::bundled(&config, None, a.seed)?;
            run_benchmark(
                "polarity",
                &docs,
                |d: Document| Ok((d.id.clone(), classifier.classify(&d.text).label)),
                |(id, label)| format!("{id},{label}"),
                &options,
            )?
        }
        BenchTask::Emotions => {
            let classifier = EmotionClassifier::bundled(a.emotion, false, a.seed)?;
            run_benchmark(
                "emotions",
                &docs,
                |d: Document| Ok((d.id.clone(), classifier.classify(&d.text).present)),
                |(id, present)| format!("{id};{}", if *present { "YES" } else { "NO" }),
                &options,
            )?
        }
    };
    print!("{}", render_table(&results));
    let csv = ws.resolve(&a.csv)?;
    write(&csv, &render_csv(&results))?;
    eprintln!("{} documents, report written to {}", docs.len(), csv.display());
    Ok(())
}
