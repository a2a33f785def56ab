//! End-to-end tests of the `berryflux` binary: exit codes, artifacts,
//! and the strict config surface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_berryflux"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const MINIMAL_WINDING: &str = "\
command = winding

[domain]
lx = 4.0
ly = 4.0

[vortices]
core = 2.0 2.0 1

[loop]
vertex = 1.5 1.5
vertex = 2.5 1.5
vertex = 2.5 2.5
vertex = 1.5 2.5
";

#[test]
fn winding_subcommand_reports_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "winding.cfg", MINIMAL_WINDING);
    let out = dir.path().join("out");
    let status = bin()
        .args(["winding", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["winding"], 1);
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["command"], "winding");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        "command = winding\nnot a key value line\n",
    );
    let status = bin()
        .args(["winding", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // unknown keys are rejected at parse time
    let cfg = write(
        dir.path(),
        "typo.cfg",
        &MINIMAL_WINDING.replace("lx = 4.0", "lx = 4.0\nxl = 4.0"),
    );
    let status = bin()
        .args(["winding", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // missing config file
    let status = bin()
        .args(["winding", "--config", "/nonexistent/nope.cfg"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invariant_violations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // mixture probabilities that do not sum to 1
    let cfg = write(
        dir.path(),
        "mixture.cfg",
        "\
command = manybody-check

[grid]
nx = 16
ny = 16
h = 0.5

[case]
kind = plane-wave
kx = 1.0
ky = 0.0

[mixture]
probabilities = 0.6 0.6
",
    );
    let output = bin()
        .args(["manybody-check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("sum"),
        "stderr should name the invariant: {stderr}"
    );

    // even winding violates the vortex invariant
    let cfg = write(
        dir.path(),
        "even.cfg",
        &MINIMAL_WINDING.replace("core = 2.0 2.0 1", "core = 2.0 2.0 2"),
    );
    let status = bin()
        .args(["winding", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // subcommand/config mismatch
    let cfg = write(dir.path(), "mismatch.cfg", MINIMAL_WINDING);
    let status = bin()
        .args(["quantize", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // stochastic command without a seed
    let cfg = write(
        dir.path(),
        "noseed.cfg",
        "\
command = nernst

[scenario]
lx = 10
ly = 10
n_meron = 1
n_antimeron = 2
v0 = 1
dt = 0.0125
steps = 100
temperature_gradient = 1
realizations = 2
",
    );
    let status = bin()
        .args(["nernst", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn quantize_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "quantize.cfg",
        &MINIMAL_WINDING.replace("command = winding", "command = quantize\ntol = 1e-10"),
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["quantize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["nearest_quantum"], -1);
    assert!(summary["deviation"].as_f64().unwrap() < 1e-8);
    assert!((summary["numeric_integral"].as_f64().unwrap() + std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn nernst_writes_trace_sweep_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nernst.cfg",
        "\
command = nernst
seed = 11

[scenario]
lx = 10
ly = 10
n_meron = 0.5
n_antimeron = 1.0
v0 = 1
dt = 0.025
steps = 80
temperature_gradient = 1
realizations = 12

[sweep]
density_diff = -0.5 -0.25 0 0.25 0.5
",
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["nernst", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["e_y_measured"].is_f64());
    assert!(summary["e_y_predicted"].is_f64());
    assert!(summary["e_n_measured"].is_f64());
    assert_eq!(summary["realizations"], 12);

    let trace = std::fs::read_to_string(out.join("emf_trace.csv")).unwrap();
    assert!(trace.starts_with("realization,step,time,emf\n"));
    // 12 realizations x 80 steps plus the header
    assert_eq!(trace.lines().count(), 1 + 12 * 80);

    let sweep = std::fs::read_to_string(out.join("nernst_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 5);
    // measured E_y is monotone in the density difference for this seed
    let e_y: Vec<f64> = sweep
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(
        e_y.windows(2).all(|p| p[0] < p[1]),
        "sweep not monotone: {e_y:?}"
    );
}

#[test]
fn faraday_writes_decomposition_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "faraday.cfg",
        "\
command = faraday

[field]
family = linear_x
gamma = 0.6

[loop]
vertex = 0.3 -0.1
vertex = 1.8 -0.1
vertex = 1.8 0.7
vertex = 0.3 0.7

[motion]
vx = 1.2
dt = 1e-3
t1 = 0.5
samples = 6
",
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["faraday", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let trace = std::fs::read_to_string(out.join("faraday_decomposition.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 6);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    // EMF = -gamma v0 L W = -0.6 * 1.2 * 0.8 * 1.5
    let expected = -0.6 * 1.2 * 0.8 * 1.5;
    assert!((summary["emf_total"].as_f64().unwrap() - expected).abs() < 1e-8);
}

#[test]
fn berry_emf_subcommand_runs_both_engines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "emf.cfg",
        "\
command = berry-emf

[domain]
lx = 10
ly = 10

[vortices]
core = 4.25 5.0 1

[loop]
vertex = 2 2
vertex = 4 2
vertex = 4 8
vertex = 2 8

[motion]
vx = 1.0
dt = 0.5
",
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["berry-emf", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    let flux = summary["flux_rule_emf"].as_f64().unwrap();
    assert!((flux - std::f64::consts::PI / 0.5).abs() < 1e-9);
    assert!(summary["engine_difference"].as_f64().unwrap() < 1e-6);
    assert_eq!(summary["winding_after"], 1);
}

#[test]
fn manybody_check_loads_wave_function_files() {
    use berryflux::geometry::Vec2;
    use berryflux::manybody::{Grid2, GridWaveFunction};

    let dir = tempfile::tempdir().unwrap();
    let grid = Grid2::centered(21, 21, 0.4).unwrap();
    let psi =
        GridWaveFunction::gaussian_plane_wave(grid, Vec2::new(0.9, -0.3), Vec2::ZERO, 1.5).unwrap();
    let mut file = std::fs::File::create(dir.path().join("psi.gwf")).unwrap();
    psi.write_binary(&mut file).unwrap();
    drop(file);

    let cfg = write(
        dir.path(),
        "file.cfg",
        "\
command = manybody-check

[case]
kind = file
path = psi.gwf
",
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["manybody-check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["nx"], 21);
    assert_eq!(summary["n_electrons"], 1);
    // the loaded packet's connection magnitude is |k| up to O(h^2)
    let norm = summary["max_connection_norm"].as_f64().unwrap();
    let k = (0.9f64 * 0.9 + 0.3 * 0.3).sqrt();
    assert!((norm - k).abs() < 0.2 * k, "norm {norm} vs |k| {k}");
    assert!(summary.get("max_connection_error").is_none());

    // a truncated file is a parse failure
    std::fs::write(dir.path().join("bad.gwf"), b"GWF1\x01\x00").unwrap();
    let cfg = write(
        dir.path(),
        "bad_file.cfg",
        "\
command = manybody-check

[case]
kind = file
path = bad.gwf
",
    );
    let status = bin()
        .args(["manybody-check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn vortex_and_loop_files_are_loadable() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cores.txt",
        "# two cores\n4.0 4.0\n1.0 1.0 1\n3.0 3.0 -1\n",
    );
    write(
        dir.path(),
        "loop.txt",
        "0.5 0.5\n3.5 0.5\n3.5 3.5\n0.5 3.5\n",
    );
    let cfg = write(
        dir.path(),
        "files.cfg",
        "\
command = winding

[domain]
lx = 4.0
ly = 4.0

[vortices]
file = cores.txt

[loop]
file = loop.txt
",
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["winding", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["winding"], 0);
    assert_eq!(summary["cores"], 2);
}
