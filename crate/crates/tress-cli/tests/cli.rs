//! End-to-end tests of the command-line surface: outputs, exit codes, and
//! determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tress"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawning tress")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

fn parse_ess_table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split('\t')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| l.split('\t').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn ess_fixed_n_reports_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("chain.trees");
    write(
        &trees,
        "# a comment line\n(A,B,(C,D));\n\n(A,C,(B,D));\n(A,B,(C,D));\n",
    );
    let out_path = dir.path().join("ess.tsv");
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "fixedN",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (header, rows) = parse_ess_table(&fs::read_to_string(&out_path).unwrap());
    assert_eq!(header, vec!["chain", "fixedN"]);
    assert_eq!(rows, vec![vec![3.0]]);
}

#[test]
fn ess_duplicate_chain_files_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--target",
        data("target6.tsv").to_str().unwrap(),
        "--iterations",
        "4000",
        "--thin",
        "4",
        "--chains",
        "1",
        "--seed",
        "5",
        "--out-dir",
        sim.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let chain = sim.join("chain_00.trees");
    let copy = dir.path().join("copy.trees");
    fs::copy(&chain, &copy).unwrap();

    let table = dir.path().join("ess.tsv");
    let out = run(&[
        "ess",
        "--trees",
        chain.to_str().unwrap(),
        copy.to_str().unwrap(),
        "--methods",
        "frechetCorrelation,medianPseudo,minPseudo,splitFrequency",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (_, rows) = parse_ess_table(&fs::read_to_string(&table).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn low_mixing_target_yields_low_ess_everywhere() {
    // four replicate chains from the bimodal target: the Fréchet,
    // frequency, and reference-projection measures all stay at or below
    // 0.3 n. The total-distance projection is exempt: its row-sum series
    // goes mode-blind whenever the chain's realized occupancy makes the two
    // modes' mean total distances coincide, so it is only bound-checked.
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--target",
        data("target6_bimodal.tsv").to_str().unwrap(),
        "--iterations",
        "20000",
        "--thin",
        "20",
        "--chains",
        "4",
        "--seed",
        "11",
        "--out-dir",
        sim.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let chains: Vec<String> = (0..4)
        .map(|i| {
            sim.join(format!("chain_{i:02}.trees"))
                .display()
                .to_string()
        })
        .collect();
    let table = dir.path().join("ess.tsv");
    let out = run(&[
        "ess",
        "--trees",
        &chains[0],
        &chains[1],
        &chains[2],
        &chains[3],
        "--methods",
        "frechetCorrelation,splitFrequency,medianPseudo,minPseudo,foldedRankMedoid,cmds,totalDistance",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (header, rows) = parse_ess_table(&fs::read_to_string(&table).unwrap());
    assert_eq!(rows.len(), 4);
    for row in rows {
        for (name, v) in header[1..].iter().zip(&row) {
            if name == "totalDistance" {
                assert!((1.0..=1000.0).contains(v));
            } else {
                assert!(
                    *v <= 300.0,
                    "{name} ESS {v} exceeds 0.3 n on the low-mixing target"
                );
            }
        }
    }
}

#[test]
fn compare_writes_rows_and_pair_summary() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_ok(&run(&[
        "simulate",
        "--target",
        data("target6.tsv").to_str().unwrap(),
        "--iterations",
        "8000",
        "--thin",
        "8",
        "--chains",
        "2",
        "--seed",
        "9",
        "--out-dir",
        sim.to_str().unwrap(),
    ]));
    let rows_path = dir.path().join("cmp.tsv");
    let out = run(&[
        "compare",
        "--trees",
        sim.join("chain_00.trees").to_str().unwrap(),
        sim.join("chain_01.trees").to_str().unwrap(),
        "--method",
        "frechetCorrelation",
        "--out",
        rows_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let rows = fs::read_to_string(&rows_path).unwrap();
    assert!(rows.starts_with("chain_i\tchain_j\tsplit_id\t"));
    assert!(rows.lines().count() > 1);
    let pairs = fs::read_to_string(dir.path().join("cmp.pairs.tsv")).unwrap();
    assert!(pairs.starts_with("chain_i\tchain_j\tasdsf\tmsdsf\tn_fail\n"));
    assert_eq!(pairs.lines().count(), 2);
}

#[test]
fn simulate_single_topology_target_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("point.tsv");
    write(&target, "newick\tprobability\n((A,B),(C,D),E);\t1.0\n");
    let sim = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--target",
        target.to_str().unwrap(),
        "--iterations",
        "50",
        "--chains",
        "1",
        "--seed",
        "1",
        "--out-dir",
        sim.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let trees = fs::read_to_string(sim.join("chain_00.trees")).unwrap();
    let lines: Vec<&str> = trees.lines().collect();
    assert_eq!(lines.len(), 50);
    assert!(lines.iter().all(|l| *l == lines[0]));
}

#[test]
fn log_posterior_needs_log_files_and_uses_them() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_ok(&run(&[
        "simulate",
        "--target",
        data("target6.tsv").to_str().unwrap(),
        "--iterations",
        "2000",
        "--thin",
        "2",
        "--chains",
        "1",
        "--seed",
        "3",
        "--out-dir",
        sim.to_str().unwrap(),
    ]));
    let trees = sim.join("chain_00.trees");
    let log = sim.join("chain_00.log");
    let table = dir.path().join("ess.tsv");

    // without the trace: usage error
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "logPosterior",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--log-files",
        log.to_str().unwrap(),
        "--methods",
        "logPosterior",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (_, rows) = parse_ess_table(&fs::read_to_string(&table).unwrap());
    assert!(rows[0][0] >= 1.0 && rows[0][0] <= 1000.0);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("out.tsv");

    // unknown method: usage error
    let trees = dir.path().join("ok.trees");
    write(&trees, "(A,B,(C,D));\n(A,B,(C,D));\n");
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "noSuchMethod",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // jump methods without a seed: usage error
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "jumpDistanceBootstrap",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // malformed newick: data error
    let bad = dir.path().join("bad.trees");
    write(&bad, "(A,B,(C,D;\n");
    let out = run(&[
        "ess",
        "--trees",
        bad.to_str().unwrap(),
        "--methods",
        "fixedN",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // unreadable file: data error
    let out = run(&[
        "ess",
        "--trees",
        dir.path().join("missing.trees").to_str().unwrap(),
        "--methods",
        "fixedN",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // taxon mismatch across chains: data error
    let other = dir.path().join("other.trees");
    write(&other, "(A,B,(C,E));\n");
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        other.to_str().unwrap(),
        "--methods",
        "fixedN",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // degenerate statistics: warning normally, exit 3 under --strict
    let constant = dir.path().join("constant.trees");
    write(&constant, "(A,B,(C,D));\n".repeat(20).as_str());
    let out = run(&[
        "ess",
        "--trees",
        constant.to_str().unwrap(),
        "--methods",
        "frechetCorrelation",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "--strict",
        "ess",
        "--trees",
        constant.to_str().unwrap(),
        "--methods",
        "frechetCorrelation",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn burnin_and_thin_apply_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("chain.trees");
    // 10 trees: 4 of one topology then 6 of another
    let a = "(A,B,(C,D));\n".repeat(4);
    let b = "(A,C,(B,D));\n".repeat(6);
    write(&trees, &format!("{a}{b}"));
    let table = dir.path().join("ess.tsv");
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "fixedN",
        "--burnin",
        "4",
        "--thin",
        "2",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (_, rows) = parse_ess_table(&fs::read_to_string(&table).unwrap());
    assert_eq!(rows[0][0], 3.0); // samples 4, 6, 8
}

#[test]
fn matrix_dump_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("chain.trees");
    write(&trees, "(A,B,(C,D));\n(A,C,(B,D));\n(A,B,(C,D));\n");
    let table = dir.path().join("ess.tsv");
    let prefix = dir.path().join("mat_");
    let splits = dir.path().join("splits.tsv");
    let topos = dir.path().join("trees_summary.tsv");
    let out = run(&[
        "ess",
        "--trees",
        trees.to_str().unwrap(),
        "--methods",
        "fixedN",
        "--out",
        table.to_str().unwrap(),
        "--dump-matrix",
        prefix.to_str().unwrap(),
        "--split-summary",
        splits.to_str().unwrap(),
        "--tree-summary",
        topos.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let matrix = fs::read_to_string(dir.path().join("mat_0.tsv")).unwrap();
    assert_eq!(matrix, "0\t2\t0\n2\t0\t2\n0\t2\t0\n");
    let splits = fs::read_to_string(&splits).unwrap();
    assert!(splits.starts_with("split_id\tprobability\tcount\n"));
    assert!(splits.contains("C;D"));
    let topos = fs::read_to_string(&topos).unwrap();
    assert!(topos.starts_with("newick\tprobability\tcount\n"));
}

#[test]
fn bootstrap_trace_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_ok(&run(&[
        "simulate",
        "--target",
        data("target6.tsv").to_str().unwrap(),
        "--iterations",
        "3000",
        "--thin",
        "3",
        "--chains",
        "1",
        "--seed",
        "2",
        "--out-dir",
        sim.to_str().unwrap(),
    ]));
    let trace = dir.path().join("trace.tsv");
    let out = run(&[
        "bootstrap",
        "--trees",
        sim.join("chain_00.trees").to_str().unwrap(),
        "--kind",
        "consensus_rf",
        "--replicates",
        "20",
        "--seed",
        "4",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("n_i\tprefix_split_frequency_ess\tkind\tthreshold\tq05\tq50\tq95\n"));
    // three thresholds per prefix size
    let body = text.lines().skip(1).count();
    assert_eq!(body % 3, 0);
    assert!(body > 0);
}

#[test]
fn benchmark_smoke_and_normal_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.tsv");
    let out = run(&[
        "benchmark",
        "--target",
        data("target6.tsv").to_str().unwrap(),
        "--m",
        "4",
        "--iterations",
        "1600",
        "--thin",
        "2",
        "--methods",
        "fixedN,frechetCorrelation",
        "--seed",
        "17",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains(
        "method\tsummary_kind\titem_id\titem_prob\tse_mcmc\tse_mcess\trmce\titmce\tmean_ess"
    ));
    assert!(text
        .lines()
        .any(|l| l.starts_with("frechetCorrelation\tmrc\t")));

    let cal = dir.path().join("cal.tsv");
    let out = run(&[
        "benchmark",
        "--normal-calibration",
        "--n-lengths",
        "3",
        "--min-length",
        "1000",
        "--max-length",
        "4000",
        "--kept",
        "250",
        "--m",
        "10",
        "--seed",
        "3",
        "--out",
        cal.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&cal).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("chain_length\tthin\tmean_ess\tse_mcmc\tse_mcess\trmce\titmce\n"));
}

#[test]
fn bundled_targets_are_well_formed() {
    // loading applies the full validation path (sum, parsing, connectivity)
    let dir = tempfile::tempdir().unwrap();
    for name in ["target6.tsv", "target6_bimodal.tsv"] {
        let sim = dir.path().join(format!("sim_{name}"));
        assert_ok(&run(&[
            "simulate",
            "--target",
            data(name).to_str().unwrap(),
            "--iterations",
            "100",
            "--chains",
            "1",
            "--seed",
            "0",
            "--out-dir",
            sim.to_str().unwrap(),
        ]));
    }
    // corrupting the probability sum is a data error
    let broken = dir.path().join("broken.tsv");
    let mut text = fs::read_to_string(data("target6.tsv")).unwrap();
    text.push_str("((t1,t3),(t2,t4),(t5,t6));\t0.5\n");
    write(&broken, &text);
    let out = run(&[
        "simulate",
        "--target",
        broken.to_str().unwrap(),
        "--iterations",
        "100",
        "--chains",
        "1",
        "--seed",
        "0",
        "--out-dir",
        dir.path().join("sim_broken").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
