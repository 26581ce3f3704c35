use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use donation_ca::pbm::parse_pbm;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_donation-ca"))
}

fn invoke(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("DONATION_CA_THREADS", t),
        None => cmd.env_remove("DONATION_CA_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = invoke(args, None);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn prefix(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn csv_rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    read(path)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_bitmap_has_steps_plus_one_rows() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "fig");
    let res = ok(&[
        "run", "--rule", "RBA:both", "--n", "50", "--steps", "50", "--seed", "7", "--out", &out,
    ]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("Wolfram 251"));
    let bitmap = parse_pbm(&read(format!("{out}.pbm"))).unwrap();
    assert_eq!((bitmap.width(), bitmap.height()), (50, 51));
    assert!(read(format!("{out}.pbm")).starts_with("P1\n50 51\n"));

    let metrics = read(format!("{out}.metrics.csv"));
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next(),
        Some("agent_id,rule,high_count,donations_received,donations_made")
    );
    assert_eq!(lines.count(), 50);
}

/// Rule 90 from a single seed against a bitmap produced outside this crate.
#[test]
fn rule_90_matches_golden_bitmap() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "sierpinski");
    ok(&[
        "run",
        "--raw-rule",
        "90",
        "--init",
        "single",
        "--n",
        "65",
        "--steps",
        "32",
        "--out",
        &out,
    ]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/rule90_single_65x32.pbm");
    assert_eq!(read(format!("{out}.pbm")), read(golden));
}

/// Same bitmap, checked against the closed form: row t is the mod-2 Pascal
/// row of width 2t centered on the seed.
#[test]
fn rule_90_matches_pascal_triangle() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "pascal");
    ok(&[
        "run",
        "--raw-rule",
        "90",
        "--init",
        "single",
        "--n",
        "65",
        "--steps",
        "32",
        "--out",
        &out,
    ]);
    let bitmap = parse_pbm(&read(format!("{out}.pbm"))).unwrap();
    for t in 0..=32usize {
        for x in 0..65usize {
            let offset = x as i64 - 32;
            let d = offset + t as i64;
            let expected = offset.unsigned_abs() as usize <= t && d % 2 == 0 && {
                let k = (d / 2) as usize;
                k & t == k
            };
            assert_eq!(bitmap.row(t)[x].is_high(), expected, "t={t} x={x}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = prefix(&dir, "a");
    let b = prefix(&dir, "b");
    let args = |out: &str| {
        vec![
            "run".to_string(),
            "--rule".into(),
            "IGB:left".into(),
            "--swap".into(),
            "3".into(),
            "--er".into(),
            "0.1".into(),
            "--ea".into(),
            "0.05".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    for ext in [".pbm", ".metrics.csv"] {
        assert_eq!(read(format!("{a}{ext}")), read(format!("{b}{ext}")));
    }
}

#[test]
fn meta_json_reproduces_every_command() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, Vec<&str>, &[&str]); 4] = [
        (
            "run",
            vec![
                "--rule",
                "FS:both:h",
                "--n",
                "30",
                "--steps",
                "40",
                "--swap",
                "2",
                "--seed",
                "3",
            ],
            &[".pbm", ".metrics.csv"],
        ),
        (
            "sweep",
            vec![
                "--rule",
                "RBA:left,IGB:both",
                "--n",
                "20",
                "--steps",
                "20",
                "--replicates",
                "3",
                "--axis",
                "er",
                "--values",
                "0,0.5",
            ],
            &[".sweep.csv"],
        ),
        (
            "evolve",
            vec![
                "--n",
                "20",
                "--generations",
                "5",
                "--gen-iters",
                "10",
                "--sites",
                "--seed",
                "11",
            ],
            &[".evolve.csv", ".evolve.pbm"],
        ),
        (
            "imagescore",
            vec!["--n", "20", "--rounds", "200", "--replicates", "2"],
            &[".imagescore.csv"],
        ),
    ];
    for (cmd, flags, exts) in cases {
        let first = prefix(&dir, &format!("{cmd}-1"));
        let second = prefix(&dir, &format!("{cmd}-2"));
        let mut args = vec![cmd];
        args.extend(&flags);
        args.extend(["--out", first.as_str()]);
        ok(&args);
        let meta = format!("{first}.meta.json");
        ok(&[cmd, "--config", &meta, "--out", &second]);
        for ext in exts {
            assert_eq!(
                read(format!("{first}{ext}")),
                read(format!("{second}{ext}")),
                "{cmd} {ext}"
            );
        }
    }
}

#[test]
fn explicit_initial_states_from_file() {
    let dir = TempDir::new().unwrap();
    let init = dir.path().join("init.txt");
    fs::write(&init, "0001000\n").unwrap();
    let out = prefix(&dir, "f");
    ok(&[
        "run",
        "--raw-rule",
        "90",
        "--init-file",
        init.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        &out,
    ]);
    assert_eq!(read(format!("{out}.pbm")), "P1\n7 2\n0001000\n0010100\n");
}

#[test]
fn sweep_has_one_row_per_rule_and_value() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "sw");
    ok(&[
        "sweep",
        "--rule",
        "all",
        "--axis",
        "swap",
        "--values",
        "0:100:5",
        "--n",
        "100",
        "--steps",
        "10",
        "--replicates",
        "1",
        "--out",
        &out,
    ]);
    let text = read(format!("{out}.sweep.csv"));
    assert!(text.starts_with(
        "rule,axis_value,mean_median_reputation,mean_median_donations,replicates,stddev\n"
    ));
    let rows = csv_rows(format!("{out}.sweep.csv"));
    assert_eq!(rows.len(), 21 * 12);
    assert_eq!(rows[0][0], "IGB:both");
    assert_eq!(rows[20][1], "100");
    assert_eq!(rows[21][0], "IGB:left");
}

#[test]
fn swapping_collapses_rule_72() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "r72");
    ok(&[
        "sweep",
        "--rule",
        "RBA:both:h",
        "--axis",
        "swap",
        "--values",
        "20:60:20",
        "--replicates",
        "10",
        "--out",
        &out,
    ]);
    for row in csv_rows(format!("{out}.sweep.csv")) {
        let m: f64 = row[2].parse().unwrap();
        assert!(m < 5.0, "swap {} gave {m}", row[1]);
    }
}

#[test]
fn altruists_are_always_high() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "alt");
    ok(&[
        "sweep",
        "--rule",
        "ALT",
        "--axis",
        "er",
        "--values",
        "0,0.5,1",
        "--steps",
        "80",
        "--replicates",
        "3",
        "--out",
        &out,
    ]);
    for row in csv_rows(format!("{out}.sweep.csv")) {
        assert_eq!(row[2], "80");
        assert_eq!(row[5], "0");
    }
}

#[test]
fn evolve_rows_cover_every_generation() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "ev");
    ok(&[
        "evolve",
        "--n",
        "40",
        "--generations",
        "12",
        "--gen-iters",
        "30",
        "--seed",
        "5",
        "--out",
        &out,
    ]);
    let text = read(format!("{out}.evolve.csv"));
    assert!(text.starts_with(
        "generation,r219,r195,r153,r50,r48,r34,r251,r243,r187,r90,r72,r18,mean_fitness\n"
    ));
    let rows = csv_rows(format!("{out}.evolve.csv"));
    assert_eq!(rows.len(), 13);
    for (g, row) in rows.iter().enumerate() {
        assert_eq!(row[0], g.to_string());
        let total: u32 = row[1..13].iter().map(|c| c.parse::<u32>().unwrap()).sum();
        assert_eq!(total, 40);
        assert_eq!(row[13].is_empty(), g == 12);
    }
    assert!(!Path::new(&format!("{out}.evolve.pbm")).exists());
}

#[test]
fn evolve_without_mutation_keeps_a_homogeneous_population() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "hom");
    ok(&[
        "evolve",
        "--rule",
        "FS:right",
        "--pm",
        "0",
        "--n",
        "30",
        "--generations",
        "8",
        "--gen-iters",
        "20",
        "--sites",
        "--out",
        &out,
    ]);
    let rows = csv_rows(format!("{out}.evolve.csv"));
    assert_eq!(rows.len(), 9);
    for row in &rows {
        // r34 is column 6.
        assert_eq!(row[6], "30");
    }
    let sites = parse_pbm(&read(format!("{out}.evolve.pbm"))).unwrap();
    assert_eq!((sites.width(), sites.height()), (30, 8 * 21));
}

#[test]
fn imagescore_grid_and_zero_rounds() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "img");
    ok(&[
        "imagescore",
        "--n",
        "30",
        "--rounds",
        "0",
        "--replicates",
        "2",
        "--out",
        &out,
    ]);
    let text = read(format!("{out}.imagescore.csv"));
    assert!(text.starts_with("pairing,a_p,a_e,swap,mean_payoff,replicates\n"));
    let rows = csv_rows(format!("{out}.imagescore.csv"));
    assert_eq!(rows.len(), 8);
    let keys: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| (r[0].clone(), r[1].clone(), r[3].clone()))
        .collect();
    assert_eq!(keys[0], ("local".into(), "0".into(), "0".into()));
    assert_eq!(keys[3], ("local".into(), "0.2".into(), "10".into()));
    assert_eq!(keys[4], ("random".into(), "0".into(), "0".into()));
    assert!(rows.iter().all(|r| r[4] == "0"));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let mut outputs: Vec<(String, String)> = Vec::new();
    for threads in ["1", "3", "8"] {
        let sw = prefix(&dir, &format!("sw{threads}"));
        let img = prefix(&dir, &format!("img{threads}"));
        let args_sw = [
            "sweep",
            "--rule",
            "all",
            "--n",
            "30",
            "--steps",
            "30",
            "--replicates",
            "4",
            "--axis",
            "swap",
            "--values",
            "0,2,8",
            "--out",
            &sw,
        ];
        let args_img = [
            "imagescore",
            "--n",
            "30",
            "--rounds",
            "500",
            "--replicates",
            "4",
            "--out",
            &img,
        ];
        for args in [&args_sw[..], &args_img[..]] {
            let res = invoke(args, Some(threads));
            assert!(
                res.status.success(),
                "{}",
                String::from_utf8_lossy(&res.stderr)
            );
        }
        outputs.push((
            read(format!("{sw}.sweep.csv")),
            read(format!("{img}.imagescore.csv")),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let out = prefix(&dir, "bad");
    let bad_json: PathBuf = dir.path().join("bad.json");
    fs::write(&bad_json, r#"{"n": "many"}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--rule", "XYZ:both", "--out", &out],
        vec!["run", "--raw-rule", "256", "--out", &out],
        vec!["run", "--out", &out],
        vec![
            "run",
            "--rule",
            "IGB:both",
            "--directed",
            "--n",
            "51",
            "--out",
            &out,
        ],
        vec!["run", "--rule", "IGB:both", "--er", "1.5", "--out", &out],
        vec!["sweep", "--rule", "IGB:both", "--out", &out],
        vec![
            "sweep", "--rule", "IGB:both", "--values", "0.5", "--out", &out,
        ],
        vec!["evolve", "--raw-rule", "255", "--out", &out],
        vec!["imagescore", "--cost", "2", "--out", &out],
        vec!["run", "--config", bad_json.to_str().unwrap(), "--out", &out],
        vec!["run", "--init", "diagonal"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let res = invoke(&args, None);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
    }
    let res = invoke(
        &[
            "sweep", "--rule", "IGB:both", "--values", "0", "--out", &out,
        ],
        Some("zero"),
    );
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_not_a_config_error() {
    let res = invoke(
        &["run", "--rule", "IGB:both", "--out", "/nonexistent-dir/x/y"],
        None,
    );
    assert_eq!(res.status.code(), Some(1));
}
