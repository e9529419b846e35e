use std::process::Command;

use idws::bench::{run_workload, BenchError, BenchOptions, BenchRun, Workload};
use idws::cli::{
    parse_args, run_matrix, run_matrix_with, CellRunner, EXIT_FAILURE, EXIT_OK, EXIT_USAGE,
};
use idws::format::{read_states_file, CSV_HEADER};
use idws::Team;
use idws_core::{gen_states, Distribution, ExactlyOnceBitmap, SchedulerKind, WorkloadSpec};

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_idws-bench"))
        .args(args)
        .output()
        .unwrap()
}

fn config(args: &str) -> idws::cli::CliConfig {
    parse_args(std::iter::once("idws-bench").chain(args.split_whitespace())).unwrap()
}

#[test]
fn csv_has_one_line_per_repeat() {
    let out = bench(&[
        "--scheduler",
        "static,dynamic",
        "--dist",
        "regular,periodic",
        "--n",
        "2000",
        "--threads",
        "3",
        "--repeats",
        "2",
        "--format",
        "csv",
        "--work",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 11, "{line}");
        assert_eq!(fields[2], "2000");
        assert_eq!(fields[3], "3");
        assert_eq!(fields[4], "poll");
        fields[6].parse::<f64>().unwrap();
    }
}

#[test]
fn single_cell_csv_is_two_lines() {
    let out = bench(&[
        "--scheduler",
        "idws",
        "--dist",
        "dense-begin",
        "--n",
        "500",
        "--threads",
        "2",
        "--repeats",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["--threads", "0"][..],
        &["--repeats", "0"],
        &["--n", "ten"],
        &["--bogus"],
        &["--scheduler", "fifo"],
        &["--transport", "pigeon"],
    ] {
        let out = bench(args);
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing-dir").join("report.csv");
    let out = bench(&[
        "--scheduler",
        "static",
        "--dist",
        "regular",
        "--n",
        "100",
        "--threads",
        "1",
        "--repeats",
        "1",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_FAILURE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write report"));
}

#[test]
fn report_goes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("r.csv");
    let out = bench(&[
        "--scheduler",
        "guided",
        "--dist",
        "random",
        "--n",
        "300",
        "--threads",
        "2",
        "--repeats",
        "1",
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with(CSV_HEADER));
}

/// Runs the real scheduler but drops the last index from the verified body.
struct DropsLastIndex;

impl CellRunner for DropsLastIndex {
    fn run_cell(
        &self,
        kind: SchedulerKind,
        workload: &Workload,
        team: &Team,
        repeats: usize,
        opts: BenchOptions<'_>,
    ) -> Result<Vec<BenchRun>, BenchError> {
        let mut runs = run_workload(
            kind,
            workload,
            team,
            repeats,
            BenchOptions {
                verify: false,
                ..opts
            },
        )?;
        let n = workload.n();
        for run in &mut runs {
            let bitmap = ExactlyOnceBitmap::new(n);
            for i in 0..n.saturating_sub(1) {
                bitmap.mark(i);
            }
            run.verification = Some(bitmap.report());
        }
        Ok(runs)
    }
}

#[test]
fn broken_scheduler_fails_the_matrix() {
    let cfg = config("--scheduler static,dynamic --dist regular,random --n 400 --threads 2 --repeats 2 --verify --work 2");
    let report = run_matrix_with(&cfg, &DropsLastIndex).unwrap();
    // the matrix completes before failing
    assert_eq!(report.cells.len(), 4);
    assert!(report.cells.iter().all(|c| c.runs.len() == 2));
    assert_eq!(report.exit_status(), EXIT_FAILURE);

    let ok = run_matrix(&cfg).unwrap();
    assert_eq!(ok.exit_status(), EXIT_OK);
    assert!(ok.cells.iter().all(|c| c.verified() == Some(true)));
}

#[test]
fn checksums_agree_across_schedulers() {
    let cfg =
        config("--scheduler all --dist all --n 3000 --threads 3 --repeats 1 --work 8 --verify");
    let report = run_matrix(&cfg).unwrap();
    assert_eq!(report.cells.len(), 30);
    assert_eq!(report.exit_status(), EXIT_OK);
    for d in Distribution::ALL {
        let sums: Vec<u64> = report
            .cells
            .iter()
            .filter(|c| c.distribution == d)
            .map(|c| c.checksum())
            .collect();
        assert!(sums.windows(2).all(|w| w[0] == w[1]), "{d}: {sums:?}");
    }
}

#[test]
fn mirrored_dense_workloads_carry_equal_work() {
    // The kernel value depends on the index, so the two checksums differ;
    // the amount of work per state does not.
    let histogram = |d| {
        let mut h = [0usize; 4];
        for &s in gen_states(&WorkloadSpec::new(d, 12_345, 42))
            .unwrap()
            .as_slice()
        {
            h[s as usize] += 1;
        }
        h
    };
    assert_eq!(
        histogram(Distribution::DenseBegin),
        histogram(Distribution::DenseEnd)
    );
}

#[test]
fn repeated_poll_runs_differ_only_in_timing_columns() {
    let args = [
        "--scheduler",
        "all",
        "--dist",
        "random,dense-end",
        "--n",
        "2000",
        "--threads",
        "3",
        "--repeats",
        "1",
        "--format",
        "csv",
        "--work",
        "4",
    ];
    let strip = |o: std::process::Output| -> Vec<String> {
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                [&f[..6], &f[10..]].concat().join(",")
            })
            .collect()
    };
    assert_eq!(strip(bench(&args)), strip(bench(&args)));
}

#[test]
fn table_and_csv_cover_the_same_cells() {
    let cfg = config("--scheduler idws,static1 --dist periodic,dense-end --n 1000 --threads 2 --repeats 3 --work 2");
    let report = run_matrix(&cfg).unwrap();
    let rows = report.rows();
    let summaries = report.summaries();
    assert_eq!(rows.len(), 12);
    assert_eq!(summaries.len(), 4);
    for s in &summaries {
        let mine: Vec<_> = rows
            .iter()
            .filter(|r| r.scheduler == s.scheduler && r.distribution == s.distribution)
            .collect();
        assert_eq!(mine.len(), 3);
        assert!(mine.iter().all(|r| r.checksum == s.checksum));
        let mut walls: Vec<f64> = mine.iter().map(|r| r.wall_s).collect();
        walls.sort_by(f64::total_cmp);
        assert_eq!(walls[1], s.median_wall_s);
    }
    let mut table = Vec::new();
    report.write(&mut table).unwrap();
    let table = String::from_utf8(table).unwrap();
    assert!(table.contains("static1") && table.contains("dense-end"));
}

#[test]
fn exported_states_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "--scheduler",
        "static",
        "--dist",
        "dense-begin,random",
        "--n",
        "777",
        "--seed",
        "5",
        "--threads",
        "1",
        "--repeats",
        "1",
        "--export-states",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    for d in [Distribution::DenseBegin, Distribution::Random] {
        let raw = std::fs::read(dir.path().join(format!("{d}.states"))).unwrap();
        assert_eq!(raw.len(), 8 + 777);
        assert_eq!(u64::from_le_bytes(raw[..8].try_into().unwrap()), 777);
        let back = read_states_file(&dir.path().join(format!("{d}.states"))).unwrap();
        assert_eq!(back, gen_states(&WorkloadSpec::new(d, 777, 5)).unwrap());
    }
}

#[test]
fn serial_time_grows_with_work() {
    use std::time::Instant;
    let time_for = |work: usize| {
        let w =
            Workload::generate(WorkloadSpec::new(Distribution::Random, 4000, 1).with_work(work))
                .unwrap();
        let mut v: Vec<f64> = (0..5)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(w.serial_checksum());
                t.elapsed().as_secs_f64()
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v[2]
    };
    let t: Vec<f64> = [4, 16, 64].into_iter().map(time_for).collect();
    assert!(t[0] <= t[1] * 1.1 && t[1] <= t[2] * 1.1, "{t:?}");
}
