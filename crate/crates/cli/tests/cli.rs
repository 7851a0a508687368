use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const CAPTION: &str = "the dirrty republicans\nthee dirty repubLIEcans\nthe dirty republic@@ns\n";

fn pertext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pertext")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn caption_dir() -> TempDir {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("caption.txt"), CAPTION).unwrap();
    let idx = dir.path().join("idx");
    let o = pertext(&[
        "build-index",
        "--corpus",
        p(&dir.path().join("caption.txt")),
        "--out",
        p(&idx),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_index_reports_and_refuses_to_clobber() {
    let dir = caption_dir();
    let idx = dir.path().join("idx");
    for f in ["encoder.conf", "k0.idx", "k1.idx", "k2.idx", "ingested.log"] {
        assert!(idx.join(f).exists(), "{f}");
    }
    let corpus = dir.path().join("caption.txt");
    let again = pertext(&["build-index", "--corpus", p(&corpus), "--out", p(&idx)]);
    assert_eq!(again.status.code(), Some(2));

    let o = pertext(&["build-index", "--corpus", p(&corpus), "--out", p(&idx), "--update"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("files\t0\n"),
        "already ingested files are skipped"
    );

    std::fs::write(dir.path().join("more.txt"), "thhe end\n").unwrap();
    let o = pertext(&[
        "--format",
        "json",
        "build-index",
        "--corpus",
        p(dir.path()),
        "--out",
        p(&idx),
        "--update",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["documents"], 1);
}

#[test]
fn lookup_tsv_rows_and_usage_errors() {
    let dir = caption_dir();
    let idx = dir.path().join("idx");
    let o = pertext(&[
        "lookup",
        "republicans",
        "--index",
        p(&idx),
        "--k",
        "1",
        "--d",
        "1",
        "--format",
        "tsv",
    ]);
    assert!(o.status.success());
    let mut rows: Vec<String> = stdout(&o).lines().map(String::from).collect();
    rows.sort();
    assert_eq!(rows, ["repubLIEcans\t1\t1", "republicans\t1\t0"]);

    assert_eq!(pertext(&["lookup", "--index", p(&idx)]).status.code(), Some(2));
    assert_eq!(
        pertext(&["lookup", "x", "--index", p(&idx), "--d", "-2"]).status.code(),
        Some(2)
    );
    assert_eq!(pertext(&["lookup", "--help"]).status.code(), Some(0));

    let o = pertext(&["lookup", "2%&69", "--index", p(&idx)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[EmptyToken]"), "{}", stderr(&o));
    let o = pertext(&["lookup", "the", "--index", p(&dir.path().join("absent"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[IoError]"));
}

#[test]
fn every_subcommand_has_help() {
    for cmd in [
        "build-index",
        "encode",
        "lookup",
        "normalize",
        "perturb",
        "perturb-corpus",
        "timeline",
        "train-lm",
        "enrich",
        "watch",
        "serve",
    ] {
        let o = pertext(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        assert!(stdout(&o).contains("Usage"), "{cmd}");
    }
}

#[test]
fn perturb_seed_contract_and_determinism() {
    let dir = caption_dir();
    let idx = dir.path().join("idx");
    let text = "the dirty republicans, again!";
    let o = pertext(&["perturb", "--text", text, "--index", p(&idx), "--ratio", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), format!("{text}\n"));

    let o = pertext(&[
        "--format",
        "json",
        "perturb",
        "--text",
        text,
        "--index",
        p(&idx),
        "--ratio",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));

    let run = || {
        pertext(&[
            "--format",
            "json",
            "perturb",
            "--text",
            text,
            "--index",
            p(&idx),
            "--ratio",
            "1",
            "--seed",
            "9",
        ])
    };
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["achieved"], 3);

    let o = pertext(&[
        "perturb",
        "--text",
        text,
        "--index",
        p(&idx),
        "--ratio",
        "1.5",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[RatioOutOfRange]"));
    assert_eq!(
        pertext(&["perturb", "--index", p(&idx), "--ratio", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn train_and_normalize() {
    let dir = caption_dir();
    let lm = dir.path().join("lm.txt");
    let words = dir.path().join("words.txt");
    std::fs::write(&words, "the\ndirty\nrepublicans\n").unwrap();
    let o = pertext(&[
        "train-lm",
        "--corpus",
        p(&dir.path().join("caption.txt")),
        "--out",
        p(&lm),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = pertext(&[
        "normalize",
        "--text",
        "Thee dirrty repubLIEcans",
        "--dict",
        p(&words),
        "--model",
        p(&lm),
    ]);
    assert_eq!(stdout(&o), "The dirty republicans\n");

    let input = dir.path().join("in.txt");
    std::fs::write(&input, "thee dirty\nthe dirrty\n").unwrap();
    let o = pertext(&["--format", "json", "normalize", "--in", p(&input), "--dict", p(&words)]);
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["output_text"], "the dirty");
}

#[test]
fn perturb_corpus_writes_outputs_and_manifest() {
    let dir = caption_dir();
    let out = dir.path().join("out.txt");
    let o = pertext(&[
        "perturb-corpus",
        "--in",
        p(&dir.path().join("caption.txt")),
        "--out",
        p(&out),
        "--index",
        p(&dir.path().join("idx")),
        "--ratio",
        "0.34",
        "--seed",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    let manifest = std::fs::read_to_string(dir.path().join("out.txt.manifest.jsonl")).unwrap();
    for line in manifest.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["rng"], "chacha8");
    }
    assert!(stdout(&o).contains("documents\t3\n"));
}

#[test]
fn timeline_enrich_encode_and_watch() {
    let dir = caption_dir();
    let idx = dir.path().join("idx");
    let corpus = dir.path().join("tl.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\":\"a\",\"text\":\"the cat\",\"timestamp\":\"2021-11-01T10:00:00Z\"}\n\
         {\"id\":\"b\",\"text\":\"thee dog\",\"timestamp\":\"2021-11-03T10:00:00Z\"}\n\
         {\"id\":\"c\",\"text\":\"the\",\"timestamp\":\"2021-11-09T10:00:00Z\"}\n",
    )
    .unwrap();
    let o = pertext(&[
        "timeline",
        "--word",
        "the",
        "--corpus",
        p(&corpus),
        "--index",
        p(&idx),
        "--d",
        "1",
        "--granularity",
        "week",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "2021-11-01\t2\t\tthe:1,thee:1\n2021-11-08\t1\t\tthe:1\n");
    let o = pertext(&[
        "timeline",
        "--word",
        "the",
        "--corpus",
        p(&corpus),
        "--index",
        p(&idx),
        "--granularity",
        "year",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = pertext(&["enrich", "--words", "dirty,the", "--index", p(&idx), "--d", "1"]);
    assert_eq!(stdout(&o), "dirty\tdirty,dirrty\nthe\tthe,thee\n");

    let o = pertext(&["encode", "lesbian", "--k", "0"]);
    assert_eq!(stdout(&o), "lesbian\tL215\n");

    let inbox = dir.path().join("inbox");
    std::fs::create_dir(&inbox).unwrap();
    std::fs::write(inbox.join("1.txt"), "thhe news\n").unwrap();
    let o = pertext(&["watch", "--folder", p(&inbox), "--index", p(&idx), "--once"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = pertext(&["lookup", "the", "--index", p(&idx), "--d", "1"]);
    assert!(stdout(&o).contains("thhe\t1\t1"));
}
