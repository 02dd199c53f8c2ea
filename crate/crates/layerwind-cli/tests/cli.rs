use std::process::{Command, Output};

fn layerwind(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layerwind"))
        .args(args)
        .env_remove("LAYERWIND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn converge_table3_reproduces_first_difference() {
    let o = layerwind(&[
        "converge", "--preset", "table3", "--n", "32,64", "--eps", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "eps,D_32,p_32,D_64");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "2^-0");
    let d: f64 = cells[1].parse().unwrap();
    assert!((d - 2.610e-1).abs() / 2.610e-1 < 0.01, "{d}");
    assert!(lines[2].starts_with("uniform,"));
}

#[test]
fn solve_constant_preset_yields_ones() {
    let o = layerwind(&["solve", "--preset", "constant", "--n", "8", "--m", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,t,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 5);
    for row in rows {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 1.0);
    }
}

#[test]
fn check_reports_incompatible_corner_and_succeeds() {
    let o = layerwind(&["check", "--preset", "incompatible"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let r0: f64 = out
        .lines()
        .next()
        .unwrap()
        .strip_prefix("r0,")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(r0, 1.0);
    assert!(out.contains("classification,discontinuous"));
    let o = layerwind(&["check", "--preset", "smooth"]);
    assert!(stdout(&o).contains("classification,C2-smooth"));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path, threads: &'static str| {
        let mut v = vec![
            "converge",
            "--preset",
            "table2",
            "--n",
            "16,32",
            "--eps",
            "1,2^-4,2^-8",
            "--threads",
            threads,
        ];
        v.push("--out");
        v.push(Box::leak(p.to_str().unwrap().to_string().into_boxed_str()));
        v
    };
    assert!(layerwind(&args(&a, "1")).status.success());
    assert!(layerwind(&args(&b, "3")).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn inline_config_file_and_gnuplot_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(
        &cfg,
        "[problem]\na = 1\nphi = 2*x\npsi = -2*t\n[scheme]\nkind = classical-upwind\nn = 4\nm = 2\n",
    )
    .unwrap();
    let o = layerwind(&["solve", "--config", cfg.to_str().unwrap(), "--gnuplot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let blocks: Vec<&str> = out.split("\n\n").collect();
    assert_eq!(blocks.len(), 3);
    for line in out.lines().filter(|l| !l.is_empty()) {
        let v: Vec<f64> = line.split(' ').map(|c| c.parse().unwrap()).collect();
        assert!((v[2] - 2.0 * (v[0] - v[1])).abs() < 1e-14, "{line}");
    }
}

#[test]
fn fluid_particle_with_constant_speed_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fp.ini");
    std::fs::write(&cfg, "[fluid-particle]\nomega0 = 1\n").unwrap();
    let o = layerwind(&[
        "fluid-particle",
        "--config",
        cfg.to_str().unwrap(),
        "--eps",
        "2^-4",
        "--n",
        "32",
        "--probe",
        "11",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("x,t,value,exact\n"));
    assert_eq!(out.lines().count(), 1 + 11 * 11);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max |field - exact|"));
}

#[test]
fn exit_codes_follow_categories() {
    assert_eq!(
        layerwind(&["solve", "--preset", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(layerwind(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        layerwind(&["solve", "--preset", "smooth", "--n", "0"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, "[problem]\na = 1 + (x\n").unwrap();
    let o = layerwind(&["solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:5"));
    let missing = dir.path().join("missing.ini");
    assert_eq!(
        layerwind(&["solve", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        layerwind(&[
            "solve",
            "--preset",
            "constant",
            "--n",
            "4",
            "--out",
            unwritable.to_str().unwrap()
        ])
        .status
        .code(),
        Some(4)
    );
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blowup.ini");
    std::fs::write(&cfg, "[problem]\nf = 1/(x - 0.2)\n[scheme]\nn = 5\nm = 4\n").unwrap();
    let o = layerwind(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
