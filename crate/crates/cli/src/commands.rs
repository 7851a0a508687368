use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use pertext_core::analytics::{keyword_enrich, SentimentLexicon};
use pertext_core::corpus::open_corpus;
use pertext_core::index::{list_corpus_files, load_dir, update_dir, IndexDir, IngestOptions, ENCODER_FILE};
use pertext_core::normalize::{CoherencyScorer, NGramModel, ProcessScorer, WordDictionary};
use pertext_core::perturb::perturb_corpus;
use pertext_core::textcore::{encode, EncoderConfig};
use pertext_core::{Error, Result};
use pertext_service::api::{
    index_level, perturb_request, to_json, FlatScorer, LookupRequest, NormalizeRequest, PerturbRequestBody,
    TimelineRequest,
};
use pertext_service::ApiConfig;
use serde_json::json;

use crate::{Cli, Command, Format, TextInput};

pub enum Failure {
    Usage(String),
    Op(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Op(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Op(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn encoder_from(path: Option<&Path>) -> Result<Arc<EncoderConfig>> {
    Ok(Arc::new(match path {
        Some(p) => EncoderConfig::from_file(p)?,
        None => EncoderConfig::default(),
    }))
}

fn texts(input: &TextInput) -> Result<Vec<String>> {
    if let Some(t) = &input.text {
        return Ok(vec![t.clone()]);
    }
    let path = input.input.as_deref().expect("clap requires one input");
    let reader: Box<dyn BufRead> = if path == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        Box::new(BufReader::new(File::open(path)?))
    };
    Ok(reader.lines().collect::<io::Result<_>>()?)
}

fn expand_corpus(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            files.extend(list_corpus_files(p)?);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn seed_for(seed: Option<u64>, format: Format) -> std::result::Result<u64, Failure> {
    match (seed, format) {
        (Some(s), _) => Ok(s),
        (None, Format::Json) => Err(Failure::Usage(
            "--seed is required with --format json so that output is reproducible".into(),
        )),
        (None, Format::Tsv) => {
            let s = rand::random();
            eprintln!("seed: {s}");
            Ok(s)
        }
    }
}

fn emit_json(out: &mut impl Write, bytes: &[u8]) -> io::Result<()> {
    out.write_all(bytes)?;
    out.write_all(b"\n")
}

fn load_index(dir: &Path) -> Result<IndexDir> {
    let ix = load_dir(dir)?;
    if ix.levels.is_empty() {
        return Err(Error::InvalidConfig(format!("no index files in {}", dir.display())));
    }
    Ok(ix)
}

pub fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::BuildIndex {
            corpus,
            levels,
            out: dir,
            encoder_config,
            update,
        } => {
            let existing = dir.join(ENCODER_FILE).exists();
            if existing && !update {
                return Err(Failure::Usage(format!(
                    "{} already holds an index; pass --update to merge into it",
                    dir.display()
                )));
            }
            let encoder = match (&encoder_config, existing) {
                (None, true) => encoder_from(Some(&dir.join(ENCODER_FILE)))?,
                (p, _) => encoder_from(p.as_deref())?,
            };
            let opts = IngestOptions {
                encoder,
                ..IngestOptions::default()
            };
            let files = expand_corpus(&corpus)?;
            let (report, ingested) = update_dir(&dir, &files, &levels, &opts)?;
            let stats = load_index(&dir)?;
            for s in &report.malformed {
                eprintln!("skipped line {}: {}", s.line, s.reason);
            }
            match format {
                Format::Json => {
                    let levels: serde_json::Map<_, _> = stats
                        .levels
                        .iter()
                        .map(|(k, ix)| (k.to_string(), serde_json::to_value(ix.stats()).expect("stats")))
                        .collect();
                    let body = json!({"report": report, "files": ingested, "levels": levels});
                    emit_json(&mut out, &to_json(&body))?;
                }
                Format::Tsv => {
                    writeln!(out, "files\t{}", ingested.len())?;
                    writeln!(out, "documents\t{}", report.documents)?;
                    writeln!(out, "tokens\t{}", report.tokens)?;
                    writeln!(out, "rejected_tokens\t{}", report.rejected_tokens)?;
                    writeln!(out, "malformed\t{}", report.malformed.len())?;
                    for (k, ix) in &stats.levels {
                        let s = ix.stats();
                        writeln!(out, "k{k}\t{}\t{}", s.token_count, s.bucket_count)?;
                    }
                }
            }
        }
        Command::Encode {
            token,
            k,
            encoder_config,
        } => {
            let key = encode(&token, k, &*encoder_from(encoder_config.as_deref())?)?;
            match format {
                Format::Json => emit_json(&mut out, &to_json(&json!({"token": token, "k": k, "key": key})))?,
                Format::Tsv => writeln!(out, "{token}\t{key}")?,
            }
        }
        Command::Lookup {
            token,
            index,
            level,
            case_sensitive,
            min_count,
            exclude_query,
        } => {
            let req = LookupRequest {
                case_sensitive,
                min_count,
                include_query: !exclude_query,
                ..LookupRequest::new(token, level.k, level.d)
            };
            let set = req.run(&load_index(&index)?)?;
            match format {
                Format::Json => emit_json(&mut out, &to_json(&set))?,
                Format::Tsv => {
                    for m in &set.members {
                        writeln!(out, "{}\t{}\t{}", m.raw, m.count, m.distance)?;
                    }
                }
            }
        }
        Command::Normalize {
            input,
            dict,
            model,
            scorer_cmd,
            encoder_config,
            level,
            top_n,
        } => {
            let encoder = encoder_from(encoder_config.as_deref())?;
            let (dict, report) = WordDictionary::from_file(&dict, &[level.k], encoder)?;
            if !report.rejected.is_empty() {
                eprintln!("dictionary: {} entries rejected", report.rejected.len());
            }
            let scorer: Box<dyn CoherencyScorer> = match (&model, scorer_cmd.split_first()) {
                (Some(m), _) => Box::new(NGramModel::load(m)?),
                (None, Some((prog, args))) => Box::new(ProcessScorer::spawn(prog, args)?),
                (None, None) => Box::new(FlatScorer),
            };
            for text in texts(&input)? {
                let req = NormalizeRequest {
                    k: level.k,
                    d: level.d,
                    top_n,
                    ..NormalizeRequest::new(text)
                };
                let result = req.run(&dict, scorer.as_ref())?;
                match format {
                    Format::Json => emit_json(&mut out, &to_json(&result))?,
                    Format::Tsv => writeln!(out, "{}", result.output_text)?,
                }
            }
        }
        Command::Perturb {
            input,
            index,
            ratio,
            seed,
            case_sensitive,
            level,
        } => {
            let seed = seed_for(seed, format)?;
            let index = load_index(&index)?;
            for text in texts(&input)? {
                let req = PerturbRequestBody {
                    case_sensitive,
                    k: level.k,
                    d: level.d,
                    ..PerturbRequestBody::new(text, ratio, seed)
                };
                let result = req.run(&index)?;
                match format {
                    Format::Json => emit_json(&mut out, &to_json(&result))?,
                    Format::Tsv => writeln!(out, "{}", result.output_text)?,
                }
            }
        }
        Command::PerturbCorpus {
            input,
            out: out_path,
            manifest,
            index,
            ratio,
            seed,
            case_sensitive,
            level,
        } => {
            let seed = seed_for(seed, format)?;
            let index = load_index(&index)?;
            let request = perturb_request(ratio, seed, case_sensitive, level.k, level.d);
            let result = perturb_corpus(open_corpus(&input)?, index_level(&index, level.k)?, &request)?;
            let mut w = BufWriter::new(File::create(&out_path)?);
            for d in &result.documents {
                writeln!(w, "{}", d.to_line())?;
            }
            w.flush()?;
            let manifest = manifest.unwrap_or_else(|| {
                let mut p = out_path.clone().into_os_string();
                p.push(".manifest.jsonl");
                PathBuf::from(p)
            });
            let mut w = BufWriter::new(File::create(&manifest)?);
            for row in &result.manifest {
                emit_json(&mut w, &to_json(row))?;
            }
            w.flush()?;
            let s = &result.summary;
            for sk in &s.skipped {
                eprintln!("skipped line {}: {}", sk.line, sk.reason);
            }
            match format {
                Format::Json => emit_json(&mut out, &to_json(s))?,
                Format::Tsv => {
                    writeln!(out, "documents\t{}", s.documents)?;
                    writeln!(out, "words\t{}", s.words)?;
                    writeln!(out, "requested\t{}", s.requested)?;
                    writeln!(out, "eligible\t{}", s.eligible)?;
                    writeln!(out, "achieved\t{}", s.achieved)?;
                    writeln!(out, "achieved_ratio\t{:.6}", s.achieved_ratio)?;
                }
            }
        }
        Command::Timeline {
            word,
            corpus,
            index,
            from,
            to,
            granularity,
            lexicon,
            combine,
            level,
        } => {
            let req = TimelineRequest {
                from,
                to,
                granularity,
                k: level.k,
                d: level.d,
                split_variants: !combine,
                ..TimelineRequest::new(word)
            };
            req.query()?;
            let index = load_index(&index)?;
            let lex = lexicon.as_ref().map(SentimentLexicon::from_file).transpose()?;
            let mut docs = Vec::new();
            for p in expand_corpus(&corpus)? {
                for item in open_corpus(&p)? {
                    match item {
                        Ok(d) => docs.push(d),
                        Err(Error::MalformedDocument { line, reason }) => {
                            eprintln!("{}: skipped line {line}: {reason}", p.display())
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            let series = req.run(&index, docs, lex.as_ref())?;
            for w in &series.warnings {
                eprintln!("warning: {w}");
            }
            match format {
                Format::Json => emit_json(&mut out, &to_json(&series))?,
                Format::Tsv => {
                    for b in &series.buckets {
                        let counts: Vec<String> = b.counts.iter().map(|(v, c)| format!("{v}:{c}")).collect();
                        let sentiment = b.mean_sentiment.map(|s| format!("{s:.6}")).unwrap_or_default();
                        writeln!(
                            out,
                            "{}\t{}\t{}\t{}",
                            b.bucket_start.format("%Y-%m-%d"),
                            b.document_total,
                            sentiment,
                            counts.join(",")
                        )?;
                    }
                    let r = &series.report;
                    eprintln!(
                        "scanned {} matched {} out_of_range {} missing_timestamp {} unparseable_timestamp {}",
                        r.scanned, r.matched, r.out_of_range, r.missing_timestamp, r.unparseable_timestamp
                    );
                }
            }
        }
        Command::TrainLm {
            corpus,
            order,
            alpha,
            out: path,
            encoder_config,
        } => {
            let encoder = encoder_from(encoder_config.as_deref())?;
            let mut docs = Vec::new();
            for p in expand_corpus(&corpus)? {
                docs.extend(open_corpus(&p)?.filter_map(|d| d.ok()));
            }
            let model = NGramModel::train(docs, order, alpha, &encoder)?;
            model.save(&path)?;
            let vocab = model.vocab().count();
            match format {
                Format::Json => emit_json(
                    &mut out,
                    &to_json(&json!({"order": order, "alpha": alpha, "vocab": vocab})),
                )?,
                Format::Tsv => writeln!(out, "order\t{order}\nalpha\t{alpha}\nvocab\t{vocab}")?,
            }
        }
        Command::Enrich { words, index, level } => {
            let index = load_index(&index)?;
            let params = pertext_core::query::LookupParams::with_kd(level.k, level.d);
            let enriched = keyword_enrich(index_level(&index, level.k)?, &words, &params)?;
            match format {
                Format::Json => emit_json(&mut out, &to_json(&enriched))?,
                Format::Tsv => {
                    for (w, variants) in &enriched {
                        writeln!(out, "{w}\t{}", variants.join(","))?;
                    }
                }
            }
        }
        Command::Watch {
            folder,
            index,
            levels,
            interval_secs,
            once,
        } => {
            let encoder = encoder_from(
                index
                    .join(ENCODER_FILE)
                    .exists()
                    .then(|| index.join(ENCODER_FILE))
                    .as_deref(),
            )?;
            let opts = IngestOptions {
                encoder,
                ..IngestOptions::default()
            };
            loop {
                let files = list_corpus_files(&folder)?;
                let (report, ingested) = update_dir(&index, &files, &levels, &opts)?;
                if !ingested.is_empty() {
                    match format {
                        Format::Json => emit_json(&mut out, &to_json(&json!({"files": ingested, "report": report})))?,
                        Format::Tsv => {
                            for f in &ingested {
                                writeln!(out, "{}\t{}", f.display(), report.documents)?;
                            }
                        }
                    }
                    out.flush()?;
                }
                if once {
                    break;
                }
                std::thread::sleep(Duration::from_secs(interval_secs.max(1)));
            }
        }
        Command::Serve { config } => {
            tracing_subscriber::fmt().with_writer(io::stderr).init();
            let cfg = ApiConfig::from_file(&config)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(pertext_service::serve(cfg))?;
        }
    }
    out.flush()?;
    Ok(())
}
