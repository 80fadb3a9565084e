use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nbqec-sim"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("nbqec-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const BASE: &[&str] = &["--build", "4,6,16,3", "--fm", "0.04,0.02", "--trials", "300", "--seed", "5"];

#[test]
fn prints_csv_with_one_row_per_point() {
    let out = stdout(&run(BASE));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("fm,pd,R,n,trials,strict_fail,degen_success,undetected_fail,trapI_seen,trapI_fixed,trapII_seen,trapIII_seen,trapIII_fixed,ident_fail,post_fail,fer_strict,fer_final,ci_lo,ci_hi,hashing_rate"));
    assert!(lines[1].starts_with("0.04,0.06,0.333333,384,300,"));
    assert!(lines[2].starts_with("0.02,0.03,"));
}

#[test]
fn output_files_and_worker_counts_agree() {
    let d = scratch("workers");
    let mut csvs = Vec::new();
    for w in ["1", "8"] {
        let out = d.join(format!("w{w}.csv"));
        let caps = d.join(format!("caps{w}"));
        let mut args = BASE.to_vec();
        args.extend(["--workers", w, "--out", out.to_str().unwrap(), "--capture-dir", caps.to_str().unwrap()]);
        assert_eq!(stdout(&run(&args)), "");
        assert!(out.with_extension("dat").exists());
        let mut names: Vec<String> = std::fs::read_dir(&caps).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        csvs.push((std::fs::read(&out).unwrap(), names));
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = scratch("config");
    let cfg = d.join("run.cfg");
    std::fs::write(&cfg, "# small run\nbuild = 4,6,16,3\npd = 0.06\ntrials = 50\nseed = 5\n").unwrap();
    let from_file = stdout(&run(&["--config", cfg.to_str().unwrap()]));
    assert!(from_file.lines().nth(1).unwrap().starts_with("0.04,0.06,0.333333,384,50,"));
    let overridden = stdout(&run(&["--config", cfg.to_str().unwrap(), "--trials", "300", "--fm", "0.04,0.02"]));
    assert_eq!(overridden, stdout(&run(BASE)));
}

#[test]
fn dumped_code_gives_the_same_sweep() {
    let d = scratch("dump");
    let code = d.join("code.txt");
    let o = run(&["--build", "4,6,16,3", "--dump-code", code.to_str().unwrap()]);
    assert!(o.status.success());
    let mut args = vec!["--code", code.to_str().unwrap()];
    args.extend(&BASE[2..]);
    assert_eq!(stdout(&run(&args)), stdout(&run(BASE)));
}

#[test]
fn postprocessing_never_hurts() {
    let with = stdout(&run(BASE));
    let mut args = BASE.to_vec();
    args.push("--no-postprocess");
    let without = stdout(&run(&args));
    let col = |csv: &str, name: &str| -> Vec<f64> {
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        let k = header.iter().position(|h| *h == name).unwrap();
        csv.lines().skip(1).map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
    };
    assert_eq!(col(&with, "fer_strict"), col(&without, "fer_strict"));
    for (a, b) in col(&with, "fer_final").iter().zip(col(&without, "fer_final")) {
        assert!(*a <= b);
    }
    assert!(col(&without, "trapI_fixed").iter().all(|&x| x == 0.0));
}

fn fails(args: &[&str]) -> String {
    let o = run(args);
    assert!(!o.status.success(), "{args:?} succeeded");
    String::from_utf8(o.stderr).unwrap()
}

#[test]
fn bad_input_exits_nonzero() {
    fails(&["--fm", "0.1"]);
    fails(&["--build", "4,6,16,3"]);
    fails(&["--build", "4,6,16,3", "--fm", "0.1", "--pd", "0.1"]);
    fails(&["--build", "4,6,16", "--fm", "0.1"]);
    fails(&["--build", "4,6,16,3", "--fm", "0.9"]);
    fails(&["--build", "4,6,16,3", "--fm", "x"]);
    fails(&["--build", "4,6,16,3", "--fm", "0.1", "--trials", "0"]);
    assert!(fails(&["--code", "/nonexistent/code.txt", "--fm", "0.1"]).contains("/nonexistent/code.txt"));
    fails(&["--config", "/nonexistent.cfg"]);
    let d = scratch("bad");
    let cfg = d.join("bad.cfg");
    std::fs::write(&cfg, "build = 4,6,16,3\nfm = 0.1\ncolour = red\n").unwrap();
    assert!(fails(&["--config", cfg.to_str().unwrap()]).contains("line 3"));
    let garbage = d.join("garbage.txt");
    std::fs::write(&garbage, "not a code\n").unwrap();
    fails(&["--code", garbage.to_str().unwrap(), "--fm", "0.1"]);
    fails(&["--build", "4,6,16,3", "--fm", "0.1", "--out", Path::new("/nonexistent/dir/x.csv").to_str().unwrap()]);
}
