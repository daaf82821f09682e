use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dyadic-walsh"));
    c.env_remove("DYADIC_WALSH_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn index_profile_of_five() {
    let o = run(&["index", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "low=0 high=2 rho=2 V=4");
}

#[test]
fn dirichlet_norm_of_three() {
    let o = run(&["dirichlet", "--n", "3", "--norm"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("L1=3/2 "), "{}", stdout(&o));
}

#[test]
fn dirichlet_kernel_is_a_fixture() {
    let o = run(&["dirichlet", "--n", "4", "--resolution", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let f = dyadic_walsh::fixture::parse_step_function(&stdout(&o)).unwrap();
    assert_eq!(f.resolution(), 3);
    assert_eq!(
        dyadic_walsh::haar_integral(&f),
        dyadic_walsh::DyadicRational::one()
    );
}

#[test]
fn witness_blowup_of_order_eight() {
    let o = run(&["blowup", "--nk", "8", "--mode", "witness"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // The witness indices give (n_k + 3)/8 exactly.
    assert!(out.contains("ratio=11/8 "), "{out}");
    assert!(out.contains("exact=11/2^3"), "{out}");
}

#[test]
fn exit_codes() {
    let zero = run(&["index", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    assert!(stderr(&zero).contains("<n>"));

    let order = run(&["blowup", "--nk", "2"]);
    assert_eq!(order.status.code(), Some(2));
    assert!(stderr(&order).contains("--nk"));

    let big = run(&["dirichlet", "--n", "3", "--resolution", "99"]);
    assert_eq!(big.status.code(), Some(2));
    assert!(stderr(&big).contains("--resolution"));

    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("frobnicate"));

    let range = run(&["blowup", "--nk", "99999999999"]);
    assert_eq!(range.status.code(), Some(2));
    assert!(stderr(&range).contains("--nk"));

    let missing = run(&["hpnorm", "--input", "/nonexistent/f.txt"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("--input"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "index",
        "blocks",
        "boundary",
        "dirichlet",
        "partial-sum",
        "hpnorm",
        "atom-check",
        "weaktype-sweep",
        "lebesgue-sweep",
        "snorm-sweep",
        "blowup",
        "conjecture",
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn fixture_commands() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "N=2\n3/2^0\n1/2^0\n-1/2^0\n-1/2^0\n");

    let o = run(&["partial-sum", "--input", &f, "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "N=2\n1/2^1\n1/2^1\n1/2^1\n1/2^1\n");

    let out = dir.path().join("s.txt");
    let o = run(&[
        "partial-sum",
        "--input",
        &f,
        "--n",
        "4",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let back = std::fs::read_to_string(&out).unwrap();
    assert_eq!(back, "N=2\n3/2^0\n1/2^0\n-1/2^0\n-1/2^0\n");

    let o = run(&["partial-sum", "--input", &f, "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"));

    // Levels 1/2, then (2, -1) on halves, then f: the maximal function is 3, 2, 1, 1.
    let o = run(&["hpnorm", "--input", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Hp=7/4 "), "{}", stdout(&o));

    let bad = write(dir.path(), "bad.txt", "N=2\n1/2^0\n");
    let o = run(&["hpnorm", "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--input"));
}

#[test]
fn atom_check() {
    let dir = tempfile::tempdir().unwrap();
    // Mean zero on I_1 = {x_0 = 0}, height 2 = mu(I_1)^-1.
    let a = write(dir.path(), "a.txt", "N=2\n2/2^0\n-2/2^0\n0/2^0\n0/2^0\n");
    let o = run(&["atom-check", "--input", &a, "--depth", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("valid=true"));
    assert!(stdout(&o).contains("weak_statistic="));

    let o = run(&["atom-check", "--input", &a, "--depth", "1", "--anchor", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("support"), "{}", stderr(&o));
}

#[test]
fn sweeps_write_identical_csv_for_equal_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let sweeps: &[&[&str]] = &[
        &[
            "weaktype-sweep",
            "--count",
            "20",
            "--depths",
            "2,3",
            "--resolution",
            "5",
        ],
        &["lebesgue-sweep", "--n-max", "64", "--samples", "10"],
        &["snorm-sweep", "--n-max", "16", "--trials", "4"],
        &[
            "conjecture",
            "--families",
            "powers,random",
            "--resolution",
            "5",
            "--functions",
            "2",
        ],
    ];
    for sweep in sweeps {
        let mut texts = Vec::new();
        for run_dir in ["a", "b"] {
            let out = dir.path().join(run_dir);
            let o = bin()
                .env("DYADIC_WALSH_OUT", &out)
                .args(["--seed", "7", "--timestamp", "100"])
                .args(*sweep)
                .output()
                .unwrap();
            assert_eq!(o.status.code(), Some(0), "{sweep:?}: {}", stderr(&o));
            let name = format!("{}-100.csv", sweep[0]);
            assert!(stdout(&o).contains(&name), "{}", stdout(&o));
            texts.push((
                stdout(&o).lines().next().unwrap().to_string(),
                std::fs::read(out.join(name)).unwrap(),
            ));
        }
        assert_eq!(texts[0], texts[1], "{sweep:?}");
        let csv = String::from_utf8(texts[0].1.clone()).unwrap();
        assert!(csv.starts_with("experiment,seed,"), "{csv}");
    }
}

#[test]
fn out_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("env");
    let flag_dir = dir.path().join("flag");
    let o = bin()
        .env("DYADIC_WALSH_OUT", &env_dir)
        .args([
            "lebesgue-sweep",
            "--n-max",
            "8",
            "--samples",
            "0",
            "--timestamp",
            "1",
            "--out",
        ])
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("lebesgue-sweep-1.csv").exists());
    assert!(!env_dir.exists());
}
