use std::fs;
use std::path::{Path, PathBuf};

use gacrf_cli::dispatch;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_raw.tsv")
}

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("gacrf").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_search_train_tag_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (cols, tpl, hist, model, tagged, eval) = (
        d.join("corpus.txt"),
        d.join("best.tpl"),
        d.join("history.csv"),
        d.join("model.txt"),
        d.join("tagged.txt"),
        d.join("eval.csv"),
    );
    let raw_before = fs::read(fixture()).unwrap();

    assert_eq!(run(&["encode", s(&fixture()), "--out", s(&cols)]), 0);
    let encoded = fs::read_to_string(&cols).unwrap();
    assert_eq!(encoded.split("\n\n").count(), 50);
    assert!(encoded.lines().filter(|l| !l.is_empty()).all(|l| l.split(' ').count() == 23));

    let args = ["ga-search", s(&cols), "--generations", "3", "--population", "6", "--seed", "3"];
    assert_eq!(run(&[&args[..], &["--out", s(&tpl), "--history", s(&hist)]].concat()), 0);
    let history = fs::read_to_string(&hist).unwrap();
    assert!(history.starts_with("generation,best_fitness,mean_fitness,best_bits\n"));
    assert!(history.lines().count() <= 4);

    assert_eq!(run(&["train", s(&cols), "--template", s(&tpl), "--model", s(&model)]), 0);
    assert_eq!(run(&["tag", s(&cols), "--model", s(&model), "--out", s(&tagged)]), 0);
    assert_eq!(run(&["eval", s(&cols), s(&tagged), "--out", s(&eval)]), 0);
    let report = fs::read_to_string(&eval).unwrap();
    let row: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "span");
    assert!(row[6].parse::<f64>().unwrap() > 0.0, "{report}");

    assert_eq!(run(&["report", s(&hist)]), 0);
    assert_eq!(fs::read(fixture()).unwrap(), raw_before);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("stems.tsv");
    let words = dir.path().join("words.txt");
    fs::write(&words, "pusinhənjərəmgədəbənidəko\nlaibak\n").unwrap();
    fs::write(dir.path().join("pre.txt"), "# none\n").unwrap();
    fs::write(dir.path().join("suf.txt"), "sin\nhən\njə\nrəm\ngə\ndə\nbə\nni\nko\n").unwrap();
    fs::write(
        &conf,
        format!(
            "prefixes = {}\nsuffixes = {}\nout = /nonexistent/dir/x\n",
            s(&dir.path().join("pre.txt")),
            s(&dir.path().join("suf.txt"))
        ),
    )
    .unwrap();
    // an empty prefix list is rejected
    assert_eq!(run(&["stem", s(&words), "--config", s(&conf), "--out", s(&out)]), 1);
    fs::write(dir.path().join("pre.txt"), "xy\n").unwrap();
    assert_eq!(run(&["stem", s(&words), "--config", s(&conf), "--out", s(&out)]), 0);
    let text = fs::read_to_string(&out).unwrap();
    let first: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    assert_eq!(first[1], "pu");
    assert_eq!(first[5], "10");
    assert!(text.lines().nth(1).unwrap().starts_with("laibak\tlaibak\t0\t0\t0\t0"));

    fs::write(&conf, "populaton_size = 4\n").unwrap();
    assert_eq!(run(&["stem", s(&words), "--config", s(&conf)]), 1);
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a b c d e\n").unwrap();
    let tpl = dir.path().join("t.tpl");
    fs::write(&tpl, "U00:%x[0,0]\nB\n").unwrap();
    let model = dir.path().join("m.txt");
    assert_eq!(run(&["train", s(&bad), "--template", s(&tpl), "--model", s(&model)]), 1);
    assert!(!model.exists());
    fs::write(&bad, "word\n").unwrap();
    assert_eq!(run(&["encode", s(&bad)]), 1);
}
