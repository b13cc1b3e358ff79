use std::fs;
use std::path::Path;

use batchcut::cli::run;
use batchcut::dataset::load_dataset;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("batchcut").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_fixture(dir: &Path) -> String {
    let path = dir.join("fixture.jsonl");
    fs::write(
        &path,
        "{\"id\": 10, \"descriptions\": [1, 2]}\n{\"id\": 11, \"descriptions\": [1, 2]}\n\
         {\"id\": 12, \"descriptions\": [3, 4]}\n{\"id\": 13, \"descriptions\": [3]}\n",
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn zero_k_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let (code, _, err) = call(&["partition", "--input", &input, "--k", "0", "--out", "x"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn k_and_batch_size_are_exclusive() {
    let (code, _, _) = call(&["partition", "--input", "a", "--k", "2", "--batch-size", "2", "--out", "x"]);
    assert_eq!(code, 2);
    let (code, _, _) = call(&["partition", "--input", "a", "--out", "x"]);
    assert_eq!(code, 2);
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.jsonl").display().to_string();
    let (code, _, err) = call(&["partition", "--input", &missing, "--k", "1", "--out", "x"]);
    assert_eq!(code, 1);
    assert!(err.contains("error"));
}

#[test]
fn k_above_n_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let out = dir.path().join("o").display().to_string();
    let (code, _, _) = call(&["partition", "--input", &input, "--k", "5", "--out", &out]);
    assert_eq!(code, 1);
}

#[test]
fn partition_writes_optimal_fixture_split() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let out = dir.path().join("out");
    let graph = dir.path().join("g.txt");
    let emb = dir.path().join("e.csv");
    let (code, stdout, err) = call(&[
        "partition",
        "--input",
        &input,
        "--batch-size",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--graph-out",
        graph.to_str().unwrap(),
        "--embedding-out",
        emb.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("objective=4"));

    let partition: serde_json::Value = serde_json::from_slice(&fs::read(out.join("partition.json")).unwrap()).unwrap();
    let mut batches: Vec<Vec<u64>> = serde_json::from_value(partition["batches"].clone()).unwrap();
    for b in &mut batches {
        b.sort_unstable();
    }
    batches.sort();
    assert_eq!(batches, vec![vec![10, 11], vec![12, 13]]);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["objective"], 4);
    assert_eq!(report["cut_weight"], 0);
    assert_eq!(report["coefficient"], "corrected_s_minus_1");
    assert!(report.get("theorem1_bound").is_some());
    assert!(report.get("eq5_value").is_some());

    let edges = fs::read_to_string(graph).unwrap();
    assert_eq!(edges.lines().next(), Some("4 2"));
    assert_eq!(fs::read_to_string(emb).unwrap().lines().count(), 4);
}

#[test]
fn oversized_k_prime_is_clamped_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let out = dir.path().join("out").display().to_string();
    let (code, _, err) = call(&["partition", "--input", &input, "--k", "2", "--k-prime", "9", "--out", &out]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("warning"));
}

#[test]
fn compare_lists_methods() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let csv_out = dir.path().join("cmp.csv");
    let (code, stdout, err) = call(&[
        "compare",
        "--input",
        &input,
        "--k",
        "2",
        "--seeds",
        "5",
        "--csv-out",
        csv_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    for m in ["spectral", "random", "greedy", "brute"] {
        assert!(stdout.contains(m), "{stdout}");
    }
    assert_eq!(fs::read_to_string(csv_out).unwrap().lines().count(), 5);
}

#[test]
fn compare_skips_brute_force_when_too_large() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("big.jsonl");
    let (code, _, _) = call(&["generate", "--n", "60", "--clusters", "6", "--out", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, stdout, _) = call(&["compare", "--input", input.to_str().unwrap(), "--k", "6", "--methods", "brute"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("skipped"), "{stdout}");
}

#[test]
fn trace_reports_undefined_correlation_on_short_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let (code, stdout, err) = call(&["trace", "--input", &input, "--k", "1"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("iteration,mean_centroid_distance,distinct_descriptions_total"));
    assert!(err.contains("undefined"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.jsonl");
    call(&["generate", "--n", "64", "--clusters", "8", "--noise", "0.1", "--out", input.to_str().unwrap()]);
    let (code, stdout, err) = call(&["sweep", "--input", input.to_str().unwrap(), "--batch-sizes", "4,8", "--seeds", "3"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.lines().count(), 3);
    let (code, stdout, err) = call(&["sweep", "--input", input.to_str().unwrap(), "--caps", "5,100", "--k", "8"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("description_cap"));
    let (code, _, _) = call(&["sweep", "--input", input.to_str().unwrap(), "--caps", "5"]);
    assert_eq!(code, 2);
}

#[test]
fn generate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let truth = dir.path().join("t.json");
    let (code, _, _) = call(&[
        "generate",
        "--n",
        "30",
        "--clusters",
        "3",
        "--out",
        data.to_str().unwrap(),
        "--truth-out",
        truth.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let ds = load_dataset(&data).unwrap();
    assert_eq!(ds.len(), 30);
    let t: serde_json::Value = serde_json::from_slice(&fs::read(truth).unwrap()).unwrap();
    assert_eq!(t["k"], 3);
}

#[test]
fn retrieve_matches_phrases() {
    let dir = tempfile::tempdir().unwrap();
    let texts = dir.path().join("t.txt");
    let lex = dir.path().join("l.tsv");
    let out = dir.path().join("o.jsonl");
    fs::write(&texts, "The New York skyline.\nnothing here\nA york pie\n").unwrap();
    fs::write(&lex, "new york\t7\nyork\t8\n").unwrap();
    let (code, stdout, err) = call(&[
        "retrieve",
        "--texts",
        texts.to_str().unwrap(),
        "--lexicon",
        lex.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("2/3"));
    let ds = load_dataset(&out).unwrap();
    assert_eq!(ds.len(), 3);
}
