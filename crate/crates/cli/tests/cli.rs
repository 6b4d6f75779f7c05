use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amr_incoherence::dialogue::{read_corpus, write_corpus, Conversation, Label};
use amr_incoherence::{fixtures, synth};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_amr-incoherence"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, conversations: &[Conversation]) -> PathBuf {
    let path = dir.path().join(name);
    write_corpus(conversations, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Vec<Conversation> {
    read_corpus(std::io::BufReader::new(std::fs::File::open(p).unwrap())).unwrap()
}

#[test]
fn stats_reports_table_columns() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "sesame.jsonl", &[fixtures::sesame_street()]);
    let out = run(&["stats", "--in", s(&input)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset\tsize\tavg_conversation_length\tavg_utterance_length\tunit");
    let cols: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(&cols[..3], ["sesame", "1", "4.00"]);
}

#[test]
fn manipulate_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.jsonl", &synth::corpus(40, 3));
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for (out, jobs) in [(&a, "1"), (&b, "4")] {
        let o = run(&["manipulate", "--seed", "9", "--in", s(&input), "--out", s(out), "--jobs", jobs]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let manipulated = read(&a);
    assert_eq!(manipulated.len(), 40);
    assert!(manipulated.iter().all(|c| c.label == Some(Label::Incoherent) && c.record.is_some()));
}

#[test]
fn gen_dataset_is_balanced() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.jsonl", &synth::corpus(25, 4));
    for mode in ["deam", "baseline"] {
        let out = dir.path().join(format!("{mode}.jsonl"));
        let o = run(&["gen-dataset", "--mode", mode, "--seed", "1", "--in", s(&input), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let data = read(&out);
        assert_eq!(data.len(), 50);
        for pair in data.chunks(2) {
            assert_eq!(pair[0].label, Some(Label::Coherent));
            assert_eq!(pair[1].label, Some(Label::Incoherent));
        }
    }
}

#[test]
fn train_score_and_cross_matrix() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.jsonl", &synth::corpus(30, 6));
    let data = dir.path().join("data.jsonl");
    assert_eq!(code(&run(&["gen-dataset", "--seed", "2", "--in", s(&input), "--out", s(&data)])), 0);
    let model = dir.path().join("m.bin");
    let o = run(&["train-proxy", "--in", s(&data), "--out", s(&model), "--bits", "12", "--epochs", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::metadata(&model).unwrap().len(), 7 + 16 + 8 * 4096);

    let o = run(&["score", "--model", s(&model), "--in", s(&data)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 60);
    for line in text.lines() {
        let (_, score) = line.split_once('\t').unwrap();
        let score: f64 = score.parse().unwrap();
        assert!(score > 0.0 && score < 1.0);
    }

    let arg = format!("deam={}", s(&data));
    let o = run(&["cross-matrix", "--train", &arg, "--test", &arg, "--bits", "12", "--epochs", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("train\\test\tdeam\ndeam\t"), "{text}");
}

#[test]
fn eval_corr_reports_each_aspect() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("scores.tsv");
    std::fs::write(
        &path,
        "conversation_id\tmodel_score\thuman_scores\taspect\n\
         a\t0.1\t0,1\tcoherence\nb\t0.5\t1,1\tcoherence\nc\t0.9\t2,2\tcoherence\n\
         a\t0.1\t2\toverall\nb\t0.2\t2\toverall\n",
    )
    .unwrap();
    let o = run(&["eval-corr", "--scores", s(&path), "--benchmark", "fed"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "aspect\tn\tspearman\ncoherence\t3\t1.000000\noverall\t2\tundefined\n"
    );

    // 3 is outside the FED coherence range
    std::fs::write(&path, "a\t0.1\t3\tcoherence\nb\t0.2\t1\tcoherence\n").unwrap();
    assert_eq!(code(&run(&["eval-corr", "--scores", s(&path), "--benchmark", "fed"])), 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["validate", "--in", "/nonexistent/corpus.jsonl"])), 2);

    let good = write(&dir, "good.jsonl", &synth::corpus(5, 1));
    assert_eq!(code(&run(&["validate", "--in", s(&good)])), 0);

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"id\":\"x\",\"utterances\":[{\"speaker\":\"A\",\"amr\":\"(a / b :ARG0 (c / d :ARG1 a))\"}]}\n",
    )
    .unwrap();
    let o = run(&["validate", "--in", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle"), "{}", String::from_utf8_lossy(&o.stderr));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[deam]\nmin_ops = 5\nmax_ops = 2\n").unwrap();
    assert_eq!(code(&run(&["manipulate", "--config", s(&config), "--in", s(&good)])), 2);

    let model = dir.path().join("junk.bin");
    std::fs::write(&model, b"not a model").unwrap();
    assert_eq!(code(&run(&["score", "--model", s(&model), "--in", s(&good)])), 1);

    // unlabelled data cannot train
    assert_eq!(code(&run(&["train-proxy", "--in", s(&good), "--out", s(&dir.path().join("m"))])), 1);
}
