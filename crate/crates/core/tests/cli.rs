mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::four_pi_cones;
use penner::io::commands::load_mesh;
use penner::io::lambda::{format_lambda, read_lambda};
use penner::io::runlog::RunLog;
use penner::io::{cones, obj};
use penner::mapping::shear_coords;
use penner::mesh::shapes;
use serde_json::Value;
use tempfile::TempDir;

fn penner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_penner"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
    input: PathBuf,
    cones: PathBuf,
}

impl Fixture {
    fn sphere(n: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (m, p) = shapes::fibonacci_sphere::<f64>(n);
        let input = dir.path().join("sphere.obj");
        let cones = dir.path().join("sphere.cones");
        std::fs::write(&input, obj::format_obj(&p, &m.faces())).unwrap();
        std::fs::write(&cones, cones::format_cones(&four_pi_cones(&p))).unwrap();
        Fixture { dir, input, cones }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, cmd: &str, out: &str, extra: &[&str]) -> Output {
        let out = self.path(out);
        let mut args = vec![
            cmd,
            "--input",
            s(&self.input),
            "--cones",
            s(&self.cones),
            "--output",
            s(&out),
        ];
        args.extend_from_slice(extra);
        penner(&args)
    }

    fn summary(&self, out: &str) -> Value {
        serde_json::from_str(
            &std::fs::read_to_string(self.path(&format!("{out}.summary.json"))).unwrap(),
        )
        .unwrap()
    }
}

fn error_kind(o: &Output) -> String {
    let line = String::from_utf8_lossy(&o.stderr);
    let v: Value =
        serde_json::from_str(line.lines().next().expect("error line on stderr")).unwrap();
    assert!(v["message"].is_string());
    v["error"].as_str().unwrap().to_string()
}

const OUTPUTS: [&str; 6] = [
    ".lambda",
    ".runlog.jsonl",
    ".obj",
    ".stretch.csv",
    ".scale.csv",
    ".summary.json",
];

#[test]
fn optimize_writes_every_artifact() {
    let fx = Fixture::sphere(120);
    let o = fx.run("optimize", "a", &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let listed = String::from_utf8(o.stdout).unwrap();
    for suffix in OUTPUTS {
        let p = fx.path(&format!("a{suffix}"));
        assert!(p.exists(), "missing {suffix}");
        assert!(listed.contains(s(&p)));
    }
    let log = RunLog::parse(&std::fs::read_to_string(fx.path("a.runlog.jsonl")).unwrap()).unwrap();
    assert_eq!(log.header.command, "optimize");
    assert_eq!(log.result.status, "Converged");
    assert!(log.result.max_residual <= 1e-10);
    let csv = std::fs::read_to_string(fx.path("a.stretch.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("bin_lo,bin_hi,count"));
    assert_eq!(csv.lines().count(), 21);
    // no stray temporaries from the atomic writes
    let names: Vec<String> = std::fs::read_dir(fx.dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 2 + OUTPUTS.len(), "{names:?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let fx = Fixture::sphere(120);
    assert_eq!(fx.run("optimize", "a", &[]).status.code(), Some(0));
    assert_eq!(fx.run("optimize", "b", &[]).status.code(), Some(0));
    for suffix in OUTPUTS {
        let a = std::fs::read(fx.path(&format!("a{suffix}"))).unwrap();
        let b = std::fs::read(fx.path(&format!("b{suffix}"))).unwrap();
        assert!(a == b, "{suffix} differs");
    }
    let lam = fx.path("a.lambda");
    for out in ["m1", "m2"] {
        let o = fx.run(
            "map-sample",
            out,
            &[
                "--lambda",
                s(&lam),
                "--set",
                "samples=200",
                "--set",
                "seed=7",
            ],
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let a = std::fs::read(fx.path("m1.map.csv")).unwrap();
    assert_eq!(a, std::fs::read(fx.path("m2.map.csv")).unwrap());
}

#[test]
fn project_has_larger_scale_distortion_than_log_scale_optimization() {
    let fx = Fixture::sphere(200);
    assert_eq!(fx.run("project", "conf", &[]).status.code(), Some(0));
    let o = fx.run("optimize", "opt", &["--energy", "log_scale"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (conf, opt) = (fx.summary("conf"), fx.summary("opt"));
    let rms = |v: &Value| v["rms_u"].as_f64().unwrap();
    let max = |v: &Value| v["max_abs_u"].as_f64().unwrap();
    assert!(
        rms(&conf) > 100.0 * rms(&opt),
        "rms u {} vs {}",
        rms(&conf),
        rms(&opt)
    );
    assert!(
        max(&conf) > max(&opt),
        "max |u| {} vs {}",
        max(&conf),
        max(&opt)
    );
}

#[test]
fn interpolate_reproduces_an_endpoint_up_to_conformal_class() {
    let fx = Fixture::sphere(100);
    assert_eq!(fx.run("optimize", "opt", &[]).status.code(), Some(0));
    let m = load_mesh(&fx.input).unwrap();
    let base = fx.path("base.lambda");
    std::fs::write(&base, format_lambda(&m.mesh, &m.lambda0)).unwrap();
    let opt = read_lambda(&fx.path("opt.lambda"), &m.mesh).unwrap();
    for (weights, target) in [("1,0", &opt), ("0,1", &m.lambda0)] {
        let metrics = format!("metrics={},{}", s(&fx.path("opt.lambda")), s(&base));
        let o = fx.run(
            "interpolate",
            "mix",
            &["--set", &metrics, "--set", &format!("weights={weights}")],
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let mix = read_lambda(&fx.path("mix.lambda"), &m.mesh).unwrap();
        let (a, b) = (shear_coords(&m.mesh, &mix), shear_coords(&m.mesh, target));
        let gap = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-9, "weights {weights}: shear gap {gap:e}");
    }
}

#[test]
fn stats_reads_the_written_files() {
    let fx = Fixture::sphere(100);
    assert_eq!(fx.run("optimize", "opt", &[]).status.code(), Some(0));
    let lam = fx.path("opt.lambda");
    let o = fx.run("stats", "again", &["--lambda", s(&lam)]);
    assert_eq!(o.status.code(), Some(0));
    for suffix in [".stretch.csv", ".scale.csv", ".summary.json"] {
        let a = std::fs::read(fx.path(&format!("opt{suffix}"))).unwrap();
        assert_eq!(
            a,
            std::fs::read(fx.path(&format!("again{suffix}"))).unwrap(),
            "{suffix}"
        );
    }
    let summary = fx.summary("again");
    assert!(summary["max_stretch"].as_f64().unwrap() >= summary["mean_stretch"].as_f64().unwrap());
    assert_eq!(summary["vertices"].as_u64(), Some(100));
}

#[test]
fn map_sample_writes_barycentric_rows() {
    let fx = Fixture::sphere(100);
    assert_eq!(fx.run("optimize", "opt", &[]).status.code(), Some(0));
    let lam = fx.path("opt.lambda");
    let o = fx.run(
        "map-sample",
        "map",
        &["--lambda", s(&lam), "--set", "samples=300"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(fx.path("map.map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("src_face,w_i,w_j,w_k,dst_face,w'_i,w'_j,w'_k")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 300);
    for r in rows {
        for w in [&r[1..4], &r[5..8]] {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x >= -1e-10));
        }
    }
}

#[test]
fn open_input_is_doubled_and_laid_out() {
    let dir = tempfile::tempdir().unwrap();
    let n = 4;
    let mut pos = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            pos.push([i as f64, j as f64, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let input = dir.path().join("square.obj");
    std::fs::write(&input, obj::format_obj(&pos, &faces)).unwrap();
    let corners = [id(0, 0), id(n, 0), id(0, n), id(n, n)];
    let cone_text: String = corners
        .iter()
        .map(|c| format!("{c} {}\n", std::f64::consts::PI))
        .collect();
    let cone_path = dir.path().join("square.cones");
    std::fs::write(&cone_path, cone_text).unwrap();
    let out = dir.path().join("sq");
    let o = penner(&[
        "optimize",
        "--input",
        s(&input),
        "--cones",
        s(&cone_path),
        "--output",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let m = load_mesh(&input).unwrap();
    assert!(m.doubled);
    assert_eq!(m.mesh.n_faces(), 2 * faces.len());
    // already flat with these cones: the optimum is the input metric
    let lam = read_lambda(&dir.path().join("sq.lambda"), &m.mesh).unwrap();
    let gap = lam
        .iter()
        .zip(&m.lambda0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-9, "{gap:e}");
    let written = obj::read_obj(&dir.path().join("sq.obj")).unwrap();
    assert_eq!(written.face_uvs.unwrap().len(), 2 * faces.len());
}

#[test]
fn validation_errors_exit_2_with_json() {
    let fx = Fixture::sphere(40);
    let o = fx.run("optimize", "x", &["--set", "colour=blue"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "InvalidInput");

    let quad = fx.path("quad.obj");
    std::fs::write(&quad, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
    let o = penner(&[
        "optimize",
        "--input",
        s(&quad),
        "--output",
        s(&fx.path("q")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "NonTriangleFace");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));

    // a sphere needs 4π of cone curvature
    let flat = fx.path("none.cones");
    std::fs::write(&flat, "# nothing\n").unwrap();
    let o = penner(&[
        "optimize",
        "--input",
        s(&fx.input),
        "--cones",
        s(&flat),
        "--output",
        s(&fx.path("g")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "GaussBonnetViolation");
    assert!(!fx.path("g.lambda").exists());
}

#[test]
fn missing_input_exits_1() {
    let fx = Fixture::sphere(40);
    let o = penner(&[
        "optimize",
        "--input",
        s(&fx.path("absent.obj")),
        "--output",
        s(&fx.path("x")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "Io");
}

#[test]
fn unconverged_run_exits_3_and_still_writes() {
    let fx = Fixture::sphere(120);
    let o = fx.run(
        "optimize",
        "short",
        &["--set", "max_iterations=1", "--set", "continuation_steps=1"],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let log =
        RunLog::parse(&std::fs::read_to_string(fx.path("short.runlog.jsonl")).unwrap()).unwrap();
    assert_ne!(log.result.status, "Converged");
}

#[test]
fn batch_configs_match_single_runs() {
    let fx = Fixture::sphere(80);
    let mut configs = Vec::new();
    for (name, energy) in [("e1", "log_length"), ("e2", "log_length_p"), ("e3", "sdq")] {
        let c = fx.path(&format!("{name}.conf"));
        std::fs::write(
            &c,
            format!("# batch entry\ninput = sphere.obj\ncones = sphere.cones\noutput = {name}\nenergy = {energy}\n"),
        )
        .unwrap();
        configs.push(c);
    }
    let mut args = vec!["optimize", "--jobs", "3"];
    for c in &configs {
        args.extend(["--config", s(c)]);
    }
    let o = penner(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let single = penner(&[
        "optimize",
        "--config",
        s(&configs[1]),
        "--output",
        s(&fx.path("solo")),
    ]);
    assert_eq!(single.status.code(), Some(0));
    let a = std::fs::read(fx.path("e2.lambda")).unwrap();
    assert_eq!(a, std::fs::read(fx.path("solo.lambda")).unwrap());
    for name in ["e1", "e3"] {
        assert!(fx.path(&format!("{name}.obj")).exists());
    }
}

#[test]
fn written_cones_round_trip() {
    let fx = Fixture::sphere(60);
    let m = load_mesh(&fx.input).unwrap();
    let read = cones::read_cone_file(&fx.cones, &m.mesh).unwrap();
    let (_, p) = shapes::fibonacci_sphere::<f64>(60);
    assert_eq!(read.angles, four_pi_cones(&p));
}
