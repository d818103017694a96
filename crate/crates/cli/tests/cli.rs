use std::path::{Path, PathBuf};
use std::process::Command;

use slag_toric_cli::documents::to_json;
use slag_toric_cli::reports::{Outputs, ReportDocument};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slag-toric"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn report(r: &Run) -> ReportDocument {
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn temp_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn gorenstein_reports_degree_and_smoothness() {
    let Outputs::Gorenstein(o) = report(&run(&["gorenstein", &data("example_2_3.json")])).outputs else { panic!() };
    assert_eq!(o.m0, strs(&["1", "1", "1"]));
    assert!(o.smooth);
    assert_eq!(o.crepant, Some(true));
    assert_eq!(o.ray_map_kernel, Some(vec![strs(&["1", "1", "1", "-3"])]));

    let Outputs::Gorenstein(o) = report(&run(&["gorenstein", &data("delpezzo6.json")])).outputs else { panic!() };
    assert_eq!(o.m0, strs(&["0", "0", "1"]));
    assert_eq!(o.fan.max_cones.len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_file(&dir, "bad.json", "{ not json");
    assert_eq!(run(&["gorenstein", &bad]).code, 1);
    let oob = temp_file(&dir, "oob.json", r#"{"schema_version":1,"rays":[["1","0"],["0","1"]],"cones":[[0,2]]}"#);
    assert_eq!(run(&["gorenstein", &oob]).code, 1);
    let ng = temp_file(&dir, "ng.json", r#"{"schema_version":1,"rays":[["1","0","1"],["0","1","1"],["-1","0","1"],["0","-1","2"]]}"#);
    assert_eq!(run(&["gorenstein", &ng]).code, 2);
    assert_eq!(run(&["discriminant", &data("example_2_3.json"), "--class", "0"]).code, 3);
    let big = temp_file(&dir, "big.json", r#"{"schema_version":1,"vertices":[[0,0],[10,0],[10,10],[0,10]]}"#);
    assert_eq!(run(&["smooth", &big]).code, 4);
    let dh = temp_file(&dir, "dh.json", r#"{"schema_version":1,"support":[[1,0],[1,0]],"phi":["0","1"]}"#);
    assert_eq!(run(&["mirror", &dh]).code, 5);
    assert_eq!(run(&["no-such-command"]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn discriminant_graphs_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("g.svg");
    let r = run(&["discriminant", &data("example_2_3.json"), "--svg", svg.to_str().unwrap()]);
    let Outputs::Discriminant(o) = report(&r).outputs else { panic!() };
    assert_eq!((o.graph.vertices.len(), o.graph.bounded_edges.len(), o.graph.rays.len()), (3, 3, 3));
    assert!(o.consistent);
    assert_eq!(o.polytope.vertices.len(), 3);
    let dual = o.dual.unwrap();
    assert!(dual.graph.vertex_types.iter().all(|t| t == "(2,1)"));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 3);
    assert_eq!(text.matches("marker-end").count(), 3);
    assert_eq!(text.matches("T=[").count(), 6);

    let Outputs::Discriminant(o) = report(&run(&["discriminant", &data("delpezzo6.json")])).outputs else { panic!() };
    assert_eq!((o.graph.vertices.len(), o.graph.bounded_edges.len(), o.graph.rays.len()), (6, 6, 6));

    let Outputs::Discriminant(o) = report(&run(&["discriminant", &data("square_odp.json")])).outputs else { panic!() };
    assert_eq!((o.graph.vertices.len(), o.graph.bounded_edges.len(), o.graph.rays.len()), (2, 1, 4));
}

#[test]
fn class_override_scales_the_graph() {
    let Outputs::Discriminant(o) = report(&run(&["discriminant", &data("example_2_3.json"), "--class", "6"])).outputs else { panic!() };
    assert!(o.graph.vertices.contains(&strs(&["4", "-2"])), "{:?}", o.graph.vertices);
    assert_eq!(o.class, strs(&["6"]));
}

#[test]
fn smoothing_census() {
    let counts = |name: &str| -> Vec<usize> {
        let Outputs::Smooth(o) = report(&run(&["smooth", &data(name)])).outputs else { panic!() };
        o.decompositions.iter().map(|d| d.smoothing.components.len()).collect()
    };
    assert_eq!(counts("hexagon.json"), vec![3, 6]);
    assert_eq!(counts("square.json"), vec![2]);
    assert!(counts("triangle.json").is_empty());
}

#[test]
fn smoothing_parameters_from_the_command_line() {
    let r = run(&["smooth", &data("square.json"), "--x", "0,0", "--x", "0,0"]);
    let Outputs::Smooth(o) = report(&r).outputs else { panic!() };
    assert_eq!(o.decompositions[0].smoothing.distinct_planes, 1);
    assert!(!o.decompositions[0].smoothing.generic);
    assert_eq!(run(&["smooth", &data("square.json"), "--x", "0,1"]).code, 1);
}

#[test]
fn mirror_spine_and_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&["mirror", &data("example_4_2_curve.json"), "--compare", &data("example_2_3.json"), "--out", out]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: ReportDocument = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let Outputs::Mirror(o) = rep.outputs else { panic!() };
    assert_eq!(o.spine.vertices.len(), 3);
    assert!(o.fattening.contained >= 0.99 && o.fattening.covers >= 0.99);
    assert!(o.comparison.unwrap().isomorphic);
    let csv = std::fs::read_to_string(dir.path().join("cloud.csv")).unwrap();
    assert_eq!(csv.lines().count(), o.cloud.points + 1);
    assert!(dir.path().join("spine.json").exists());
    assert!(dir.path().join("mirror.svg").exists());

    let Outputs::Mirror(o) = report(&run(&["mirror", &data("binomial_curve.json"), "--resolution", "40", "--angles", "16"])).outputs
    else {
        panic!()
    };
    assert!(o.spine.vertices.is_empty());
    assert_eq!(o.spine.lines.len(), 1);
    assert_eq!(o.spine.lines[0].point, strs(&["0", "0"]));
}

#[test]
fn verify_pass_and_negative_control() {
    let Outputs::Verify(o) = report(&run(&["verify", "--n", "3", "--variant", "affine", "--samples", "20"])).outputs else { panic!() };
    assert!(o.pass && o.max_omega < 1e-6 && o.max_im_omega < 1e-6);
    let Outputs::Verify(o) = report(&run(&["verify", "--variant", "proper", "--tol", "1e-5", "--samples", "20"])).outputs else { panic!() };
    assert!(o.pass);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&["verify", "--corrupt", "wrong-phase", "--samples", "20", "--out", out]);
    assert_eq!(r.code, 6);
    let rep: ReportDocument = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let Outputs::Verify(o) = rep.outputs else { panic!() };
    assert!(!o.pass && o.max_im_omega > 1e-2);
}

fn all_reports() -> Vec<Vec<String>> {
    vec![
        strs(&["gorenstein", &data("example_2_3.json")]),
        strs(&["gorenstein", &data("square_odp.json")]),
        strs(&["discriminant", &data("example_2_3.json")]),
        strs(&["discriminant", &data("delpezzo6.json")]),
        strs(&["smooth", &data("hexagon.json")]),
        strs(&["mirror", &data("example_4_2_curve.json"), "--resolution", "60", "--angles", "16"]),
        strs(&["verify", "--potential", "quadratic", "--samples", "10", "--seed", "3"]),
    ]
}

#[test]
fn reports_round_trip() {
    for args in all_reports() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = run(&args);
        let rep = report(&r);
        assert_eq!(to_json(&rep), r.stdout, "{args:?}");
        let again: ReportDocument = serde_json::from_str(&to_json(&rep)).unwrap();
        assert_eq!(again, rep);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in all_reports() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
    let dirs: Vec<PathBuf> = (0..2).map(|_| tempfile::tempdir().unwrap().keep()).collect();
    for d in &dirs {
        let r = run(&["mirror", &data("example_4_2_curve.json"), "--resolution", "60", "--angles", "16", "--out", d.to_str().unwrap()]);
        assert_eq!(r.code, 0);
    }
    for f in ["report.json", "cloud.csv", "spine.json", "mirror.svg"] {
        assert_eq!(std::fs::read(dirs[0].join(f)).unwrap(), std::fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
    for d in dirs {
        std::fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn thread_cap_and_sequential_mode_do_not_change_output() {
    let args = ["mirror", &data("example_4_2_curve.json"), "--resolution", "60", "--angles", "16"];
    let base = run(&args).stdout;
    assert_eq!(run_env(&args, &[("SLAG_TORIC_THREADS", "1")]).stdout, base);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(run(&seq).stdout, base);
}

#[test]
fn timing_only_when_requested() {
    let plain = report(&run(&["gorenstein", &data("example_2_3.json")]));
    assert!(plain.timing_ms.is_none());
    let timed = report(&run(&["gorenstein", &data("example_2_3.json"), "--timing"]));
    assert!(timed.timing_ms.is_some());
}

#[test]
fn cloud_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&["mirror", &data("binomial_curve.json"), "--resolution", "20", "--angles", "8", "--format", "json", "--out", out]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let pts: Vec<[f64; 2]> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cloud.json")).unwrap()).unwrap();
    assert!(!pts.is_empty());
}
