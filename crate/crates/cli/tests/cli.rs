use std::path::Path;
use std::process::{Command, Output};

fn matvar(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_matvar"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn apconst_identity_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "a.toml",
        "[grid]\ndim = 1\ncells = 64\n[weight]\nkind = \"identity\"\nd = 2\n[family]\nlevels = [0, 3]\n",
    );
    let o = matvar(&["apconst"], Some(&cfg), Some(&tmp.path().join("out")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().next().unwrap().to_string();
    let sup: f64 = line.strip_prefix("sup = ").unwrap().parse().unwrap();
    assert!((sup - 1.0).abs() < 1e-9, "{line}");
    let csv = std::fs::read_to_string(tmp.path().join("out/apconst.csv")).unwrap();
    assert!(csv.starts_with("# matvar "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 15);
    let manifest = std::fs::read_to_string(tmp.path().join("out/apconst.manifest.toml")).unwrap();
    assert!(manifest.contains("wall_time_s"));
    assert!(!csv.contains("wall_time"));
}

#[test]
fn avgbound_power_weight_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "b.toml",
        "seed = 11\n[grid]\ndim = 1\ncells = 64\noffset = true\n[exponent]\nkind = \"affine\"\nbase = 2.0\nslope = 0.5\n\
         [weight]\nkind = \"power\"\na = 0.5\n[avgbound]\ntrials = 50\n",
    );
    let o = matvar(&["avgbound"], Some(&cfg), Some(tmp.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains(": 0 violations"), "{}", stdout(&o));
}

#[test]
fn randomized_operation_needs_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[grid]\ndim = 1\ncells = 16\n");
    let o = matvar(&["avgbound"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn hw_beyond_resolution_exits_3_naming_shell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.toml",
        "[grid]\ndim = 1\ncells = 64\n[exponent]\nkind = \"affine\"\nbase = 2.0\nslope = 0.5\n\
         [weight]\nkind = \"power\"\na = 0.25\n[function]\nkind = \"abs\"\ncenter = 0.5\n[hw]\nepsilon = 1e-6\n",
    );
    let o = matvar(&["hw"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("sobolev::smooth_approximate"), "{err}");
    assert!(err.contains("shell"), "{err}");
}

#[test]
fn missing_subcommand_prints_usage() {
    let o = matvar(&[], None, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "e.toml", "[grid]\ndim = 1\ncells = 16\n[weight]\nkind = \"spiral\"\n");
    let o = matvar(&["apconst"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let cfg = write(tmp.path(), "f.toml", "[grid]\ndim = 1\ncells = 12\n");
    let o = matvar(&["apconst"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("family.levels"), "{}", stderr(&o));

    let o = matvar(&["apconst"], None, None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "g.toml",
        "seed = 5\n[grid]\ndim = 2\ncells = 16\noffset = true\n[exponent]\nkind = \"sine\"\nbase = 2.0\namplitude = 0.4\nfrequency = 3.0\n\
         [weight]\nkind = \"rotating\"\na = 0.3\nb = -0.2\nrate = 2.0\n[family]\nlevels = [0, 2]\n",
    );
    for op in ["apconst", "reducing", "mollify"] {
        let one = matvar(&[op, "--threads", "1"], Some(&cfg), None);
        let four = matvar(&[op, "--threads", "4"], Some(&cfg), None);
        assert_eq!(one.status.code(), Some(0), "{op}: {}", stderr(&one));
        assert_eq!(one.stdout, four.stdout, "{op}");
    }
}

#[test]
fn truncate_reports_envelope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "h.toml",
        "[grid]\ndim = 1\nlower = -8.0\nupper = 8.0\ncells = 256\n[function]\nkind = \"gaussian\"\n",
    );
    let o = matvar(&["truncate"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("# monotone = true"), "{}", stdout(&o));
}

#[test]
fn tampered_holder_constant() {
    let tmp = tempfile::tempdir().unwrap();
    // the measured ratio stays below 1, so 3.9 still passes; a constant below it must fail
    let cfg = write(tmp.path(), "i.toml", "[suite]\nholder_constant = 0.5\n");
    let o = matvar(&["suite"], Some(&cfg), Some(tmp.path()));
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("[FAIL]  2 holder-constant")), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("[FAIL]")).count(), 1, "{out}");
}

#[test]
fn holder_constant_above_the_sharp_one_cannot_fail() {
    use matvar_cli::suite::{run_criterion, SuiteOptions};
    let c = run_criterion(2, &SuiteOptions { holder_constant: 3.9 }).unwrap();
    assert!(c.pass);
    assert!(c.measured <= 2.0);
}
