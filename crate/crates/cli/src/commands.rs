use std::io::Write;
use std::path::{Path, PathBuf};

use amr_incoherence::config::{Config, ConfigError};
use amr_incoherence::dataset::{Mode, NegativeSampler, Pair};
use amr_incoherence::dialogue::{to_line, Conversation, CorpusError, CorpusReader};
use amr_incoherence::knowledge::AntonymLexicon;
use amr_incoherence::proxy::{self, Hyper, LinearModel, ProxyError};
use amr_incoherence::stats::{self, Aspect, Benchmark, Dataset, ScoreTable, StatsError};

use crate::io::{corpus_failure, create, open, ordered_map, pool, read_all, write_failure};
use crate::{Failure, ManipulateArgs};

pub fn validate(input: &Path) -> Result<(), Failure> {
    let (mut total, mut bad) = (0usize, 0usize);
    for item in CorpusReader::new(open(input)?) {
        total += 1;
        match item {
            Ok(_) => {}
            Err(CorpusError::Io(e)) => return Err(Failure::usage(format!("cannot read {}: {e}", input.display()))),
            Err(e) => {
                bad += 1;
                eprintln!("{}: {e}", input.display());
            }
        }
    }
    println!("{total} conversations, {bad} invalid");
    if bad > 0 {
        return Err(Failure::data(format!("{} has {bad} invalid conversations", input.display())));
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else { return Ok(Config::default()) };
    Config::load(path).map_err(|e| match e {
        ConfigError::Io { .. } => Failure::usage(e.to_string()),
        e => Failure::usage(format!("{}: {e}", path.display())),
    })
}

fn load_lexicon(path: Option<&Path>) -> Result<AntonymLexicon, Failure> {
    let Some(path) = path else { return Ok(AntonymLexicon::bundled()) };
    AntonymLexicon::load(open(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

enum Outcome {
    Written(String),
    /// Nothing applied; `manipulate` passes the conversation through.
    Unchanged(String),
    /// Nothing applied; `gen-dataset` leaves the positive out.
    Dropped,
}

/// `manipulate`, or `gen-dataset` when `paired`.
pub fn manipulate(args: &ManipulateArgs, paired: bool) -> Result<(), Failure> {
    let config = load_config(args.config.as_deref())?;
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let pool = pool(args.jobs)?;
    // Splice donors and widened irrelevancy need the whole corpus up front;
    // otherwise conversations stream through.
    let whole = args.mode == Mode::Baseline || config.deam.widen_donors;
    let corpus = if whole { read_all(&args.input)? } else { Vec::new() };
    let sampler = NegativeSampler::new(args.mode, &config, &lexicon, &corpus, args.seed);
    let items: Box<dyn Iterator<Item = Result<Conversation, Failure>>> = if whole {
        Box::new(corpus.iter().cloned().map(Ok))
    } else {
        let input = args.input.clone();
        Box::new(CorpusReader::new(open(&args.input)?).map(move |r| r.map_err(|e| corpus_failure(&input, e))))
    };
    let failed = |conv: &Conversation, e: amr_incoherence::semantic::ManipulationError| {
        Failure::data(format!("conversation `{}`: {e}", conv.id))
    };

    let step = |conv: &Conversation| -> Result<Outcome, Failure> {
        if paired {
            return match sampler.pair(conv).map_err(|e| failed(conv, e))? {
                Pair::Both(pos, neg) => Ok(Outcome::Written(format!("{}\n{}\n", to_line(&pos), to_line(&neg)))),
                Pair::Skipped(_) => Ok(Outcome::Dropped),
            };
        }
        let (negative, record) = sampler.manipulate(conv).map_err(|e| failed(conv, e))?;
        if record.steps.is_empty() {
            return Ok(Outcome::Unchanged(format!("{}\n", to_line(conv))));
        }
        Ok(Outcome::Written(format!("{}\n", to_line(&negative))))
    };

    let mut out = create(args.out.as_deref())?;
    let (mut written, mut skipped) = (0usize, 0usize);
    ordered_map(&pool, items, step, |outcome| {
        let line = match outcome {
            Outcome::Written(l) => {
                written += 1;
                l
            }
            Outcome::Unchanged(l) => {
                skipped += 1;
                l
            }
            Outcome::Dropped => {
                skipped += 1;
                return Ok(());
            }
        };
        out.write_all(line.as_bytes()).map_err(write_failure)
    })?;
    out.flush().map_err(write_failure)?;
    let noun = if paired { "pairs" } else { "manipulated conversations" };
    eprintln!("wrote {written} {noun}; {skipped} conversations had nothing to manipulate");
    Ok(())
}

pub fn train_proxy(input: &Path, out: &Path, hyper: &Hyper) -> Result<(), Failure> {
    let corpus = read_all(input)?;
    let model = proxy::train(&corpus, hyper).map_err(|e| Failure::data(format!("{}: {e}", input.display())))?;
    let mut w = create(Some(out))?;
    model.write_to(&mut w).map_err(write_failure)?;
    w.flush().map_err(write_failure)?;
    eprintln!("trained on {} conversations, {} buckets", corpus.len(), model.dim());
    Ok(())
}

pub fn score(model: &Path, input: &Path, out: Option<&Path>, jobs: usize) -> Result<(), Failure> {
    let model = LinearModel::read_from(open(model)?).map_err(|e| match e {
        ProxyError::Io(e) => Failure::data(format!("{}: truncated or unreadable model: {e}", model.display())),
        e => Failure::data(format!("{}: {e}", model.display())),
    })?;
    let pool = pool(jobs)?;
    let items = CorpusReader::new(open(input)?).map(|r| r.map_err(|e| corpus_failure(input, e)));
    let mut out = create(out)?;
    ordered_map(
        &pool,
        items,
        |c| Ok(format!("{}\t{}\n", c.id, model.score(c))),
        |line| out.write_all(line.as_bytes()).map_err(write_failure),
    )?;
    out.flush().map_err(write_failure)
}

fn stats_failure(path: &Path, e: StatsError) -> Failure {
    match e {
        StatsError::Io(e) => Failure::usage(format!("cannot read {}: {e}", path.display())),
        e => Failure::data(format!("{}: {e}", path.display())),
    }
}

pub fn eval_corr(scores: &Path, benchmark: Option<Benchmark>, out: Option<&Path>) -> Result<(), Failure> {
    let table = ScoreTable::read(open(scores)?, benchmark).map_err(|e| stats_failure(scores, e))?;
    if table.rows.is_empty() {
        return Err(Failure::data(format!("{}: no score rows", scores.display())));
    }
    let mut report = String::from("aspect\tn\tspearman\n");
    for aspect in [Aspect::Coherence, Aspect::Overall] {
        let rows = table.aspect(aspect);
        if rows.rows.is_empty() {
            continue;
        }
        let averaged = stats::aggregate_annotations(&rows).map_err(|e| stats_failure(scores, e))?;
        let rho = match stats::table_spearman(&averaged) {
            Ok(Some(rho)) => format!("{rho:.6}"),
            Ok(None) | Err(StatsError::TooShort { .. }) => "undefined".to_string(),
            Err(e) => return Err(stats_failure(scores, e)),
        };
        report.push_str(&format!("{aspect}\t{}\t{rho}\n", rows.rows.len()));
    }
    let mut w = create(out)?;
    w.write_all(report.as_bytes()).and_then(|()| w.flush()).map_err(write_failure)
}

pub fn cross_matrix(
    train: &[(String, PathBuf)],
    test: &[(String, PathBuf)],
    out: Option<&Path>,
    hyper: &Hyper,
) -> Result<(), Failure> {
    let load = |sets: &[(String, PathBuf)]| -> Result<Vec<Dataset>, Failure> {
        sets.iter().map(|(name, path)| Ok(Dataset::new(name, read_all(path)?))).collect()
    };
    let (train, test) = (load(train)?, load(test)?);
    let matrix = stats::cross_manipulation_matrix(&train, &test, hyper).map_err(|e| Failure::data(e.to_string()))?;
    for name in &matrix.warnings {
        eprintln!("warning: dataset `{name}` is unbalanced");
    }
    let mut w = create(out)?;
    w.write_all(matrix.to_tsv().as_bytes()).and_then(|()| w.flush()).map_err(write_failure)
}

/// Corpus statistics: utterance length is in words when every utterance has
/// text, in graph nodes otherwise.
pub fn stats(inputs: &[PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let mut report = String::from("dataset\tsize\tavg_conversation_length\tavg_utterance_length\tunit\n");
    for path in inputs {
        let (mut size, mut utterances, mut words, mut nodes, mut with_text) = (0usize, 0usize, 0usize, 0usize, 0usize);
        for conv in CorpusReader::new(open(path)?) {
            let conv = conv.map_err(|e| corpus_failure(path, e))?;
            size += 1;
            for u in &conv.utterances {
                utterances += 1;
                nodes += u.amr.nodes().len();
                if let Some(text) = &u.text {
                    with_text += 1;
                    words += text.split_whitespace().count();
                }
            }
        }
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        let (length, unit) = if with_text == utterances { (words, "words") } else { (nodes, "nodes") };
        let avg =
            |num: usize, den: usize| if den == 0 { "-".to_string() } else { format!("{:.2}", num as f64 / den as f64) };
        report.push_str(&format!("{name}\t{size}\t{}\t{}\t{unit}\n", avg(utterances, size), avg(length, utterances)));
    }
    let mut w = create(out)?;
    w.write_all(report.as_bytes()).and_then(|()| w.flush()).map_err(write_failure)
}
