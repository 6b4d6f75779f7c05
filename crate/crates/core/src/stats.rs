//! Correlation and accuracy harness.
//!
//! Score tables are TSV with one row per conversation:
//! `conversation_id<TAB>model_score<TAB>human_scores<TAB>aspect`, human
//! scores comma-separated. A header line starting with `conversation_id` and
//! `#` comments are skipped.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dialogue::{Conversation, Label};
use crate::proxy::{self, Hyper, ProxyError};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("empty table")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset `{name}`: {source}")]
    Training { name: String, source: ProxyError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Coherence,
    Overall,
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aspect::Coherence => "coherence",
            Aspect::Overall => "overall",
        })
    }
}

impl std::str::FromStr for Aspect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coherence" => Ok(Aspect::Coherence),
            "overall" => Ok(Aspect::Overall),
            _ => Err(format!("unknown aspect `{s}`")),
        }
    }
}

/// Rating range of a human-judgment benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Fed,
    Dstc9,
}

impl Benchmark {
    pub fn range(self, aspect: Aspect) -> (f64, f64) {
        match (self, aspect) {
            (Benchmark::Fed, Aspect::Coherence) => (0.0, 2.0),
            (Benchmark::Fed, Aspect::Overall) => (0.0, 4.0),
            (Benchmark::Dstc9, Aspect::Coherence) => (1.0, 3.0),
            (Benchmark::Dstc9, Aspect::Overall) => (1.0, 5.0),
        }
    }
}

impl std::str::FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fed" => Ok(Benchmark::Fed),
            "dstc9" => Ok(Benchmark::Dstc9),
            _ => Err(format!("unknown benchmark `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub id: String,
    pub model_score: f64,
    pub human: Vec<f64>,
    pub aspect: Aspect,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    /// Reads a table, checking ids are unique within each aspect and, with `benchmark`, that
    /// human scores fall in its range.
    pub fn read<R: BufRead>(reader: R, benchmark: Option<Benchmark>) -> Result<Self, StatsError> {
        let mut rows = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            let bad = |message: String| StatsError::Malformed { line: n, message };
            if line.trim().is_empty() || line.starts_with('#') || line.starts_with("conversation_id\t") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 columns, found {}", cols.len())));
            }
            let model_score: f64 = cols[1].trim().parse().map_err(|_| bad(format!("bad model score `{}`", cols[1])))?;
            let human = cols[2]
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad human score `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let aspect: Aspect = cols[3].trim().parse().map_err(bad)?;
            if !model_score.is_finite() || human.iter().any(|h| !h.is_finite()) {
                return Err(bad("non-finite score".into()));
            }
            if let Some(b) = benchmark {
                let (lo, hi) = b.range(aspect);
                if let Some(h) = human.iter().find(|h| **h < lo || **h > hi) {
                    return Err(bad(format!("human score {h} outside {lo}..={hi}")));
                }
            }
            if !ids.insert((cols[0].to_string(), aspect)) {
                return Err(bad(format!("duplicate id `{}` for {aspect}", cols[0])));
            }
            rows.push(ScoreRow { id: cols[0].to_string(), model_score, human, aspect });
        }
        Ok(ScoreTable { rows })
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "conversation_id\tmodel_score\thuman_scores\taspect")?;
        for r in &self.rows {
            let human: Vec<String> = r.human.iter().map(f64::to_string).collect();
            writeln!(w, "{}\t{}\t{}\t{}", r.id, r.model_score, human.join(","), r.aspect)?;
        }
        Ok(())
    }

    /// Rows of one aspect.
    pub fn aspect(&self, aspect: Aspect) -> ScoreTable {
        ScoreTable { rows: self.rows.iter().filter(|r| r.aspect == aspect).cloned().collect() }
    }
}

/// Replaces each row's human scores by their mean.
pub fn aggregate_annotations(table: &ScoreTable) -> Result<ScoreTable, StatsError> {
    if table.rows.is_empty() {
        return Err(StatsError::Empty);
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            if r.human.is_empty() {
                return Err(StatsError::Malformed { line: 0, message: format!("`{}` has no human score", r.id) });
            }
            let mean = r.human.iter().sum::<f64>() / r.human.len() as f64;
            Ok(ScoreRow { human: vec![mean], ..r.clone() })
        })
        .collect::<Result<_, _>>()?;
    Ok(ScoreTable { rows })
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation; `None` when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Option<f64>, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Spearman's rho with average ranks for ties; `None` for constant input.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Option<f64>, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Spearman between model scores and mean human scores.
pub fn table_spearman(table: &ScoreTable) -> Result<Option<f64>, StatsError> {
    let agg = aggregate_annotations(table)?;
    let model: Vec<f64> = agg.rows.iter().map(|r| r.model_score).collect();
    let human: Vec<f64> = agg.rows.iter().map(|r| r.human[0]).collect();
    spearman(&model, &human)
}

/// Fraction of rows where `score >= threshold` agrees with `coherent`.
pub fn accuracy(scores: &[f64], coherent: &[bool], threshold: f64) -> Result<f64, StatsError> {
    if scores.len() != coherent.len() {
        return Err(StatsError::LengthMismatch(scores.len(), coherent.len()));
    }
    if scores.is_empty() {
        return Err(StatsError::TooShort { needed: 1, got: 0 });
    }
    let right = scores.iter().zip(coherent).filter(|(s, c)| (**s >= threshold) == **c).count();
    Ok(right as f64 / scores.len() as f64)
}

/// A named, labelled corpus.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub conversations: Vec<Conversation>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, conversations: Vec<Conversation>) -> Self {
        Dataset { name: name.into(), conversations }
    }

    /// Coherent and incoherent counts; unlabelled conversations are skipped.
    pub fn balance(&self) -> (usize, usize) {
        let coherent = self.conversations.iter().filter(|c| c.label == Some(Label::Coherent)).count();
        let incoherent = self.conversations.iter().filter(|c| c.label == Some(Label::Incoherent)).count();
        (coherent, incoherent)
    }
}

/// Test accuracy for every (train, test) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMatrix {
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// `cells[i][j]`: trained on `train[i]`, tested on `test[j]`.
    pub cells: Vec<Vec<f64>>,
    /// Names of datasets whose classes are unbalanced.
    pub warnings: Vec<String>,
}

impl AccuracyMatrix {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("train\\test");
        for t in &self.test {
            out.push('\t');
            out.push_str(t);
        }
        out.push('\n');
        for (name, row) in self.train.iter().zip(&self.cells) {
            out.push_str(name);
            for cell in row {
                out.push_str(&format!("\t{cell:.4}"));
            }
            out.push('\n');
        }
        out
    }
}

fn accuracy_on(model: &proxy::LinearModel, data: &Dataset) -> Result<f64, StatsError> {
    let labelled: Vec<&Conversation> = data.conversations.iter().filter(|c| c.label.is_some()).collect();
    let scores: Vec<f64> = labelled.iter().map(|c| model.score(c)).collect();
    let truth: Vec<bool> = labelled.iter().map(|c| c.label == Some(Label::Coherent)).collect();
    accuracy(&scores, &truth, 0.5)
}

/// Trains one proxy model per training set and tests it on every test set.
pub fn cross_manipulation_matrix(
    train: &[Dataset],
    test: &[Dataset],
    hyper: &Hyper,
) -> Result<AccuracyMatrix, StatsError> {
    let mut warnings = Vec::new();
    for d in train.iter().chain(test) {
        let (pos, neg) = d.balance();
        if pos != neg && !warnings.contains(&d.name) {
            warnings.push(d.name.clone());
        }
    }
    let mut cells = Vec::with_capacity(train.len());
    for d in train {
        let model = proxy::train(&d.conversations, hyper)
            .map_err(|source| StatsError::Training { name: d.name.clone(), source })?;
        let row = test.iter().map(|t| accuracy_on(&model, t)).collect::<Result<Vec<_>, _>>()?;
        cells.push(row);
    }
    Ok(AccuracyMatrix {
        train: train.iter().map(|d| d.name.clone()).collect(),
        test: test.iter().map(|d| d.name.clone()).collect(),
        cells,
        warnings,
    })
}
