use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use femnet::compiler::compile_fem_deep;
use femnet::io;
use femnet::mesh::structured_triangles;
use femnet::{AffineFunc, ReluNetwork};

fn femnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_femnet")).args(args).output().expect("run femnet")
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("femnet-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).display().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn hat_files(s: &Scratch) -> (String, String) {
    let mesh = structured_triangles(2, 2);
    let mut c = vec![0.0; mesh.vertex_count()];
    c[4] = 1.0;
    io::save_mesh(s.0.join("mesh.json").as_path(), &mesh).unwrap();
    fs::write(s.0.join("c.csv"), io::values_to_csv(&c)).unwrap();
    (s.path("mesh.json"), s.path("c.csv"))
}

#[test]
fn compile_then_verify() {
    let s = Scratch::new("verify");
    let (mesh, c) = hat_files(&s);
    let net = s.path("net.json");
    for pathway in ["deep", "shallow"] {
        let out = femnet(&["compile-fem", "--mesh", &mesh, "--coeffs", &c, "--pathway", pathway, "-o", &net, "--report", &s.path("r.json")]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(s.path("r.json")).unwrap()).unwrap();
        assert!(report["actual_depth"].as_u64().unwrap() <= report["predicted_depth"].as_u64().unwrap());
        assert_eq!(femnet(&["verify", "--net", &net, "--mesh", &mesh, "--coeffs", &c]).status.code(), Some(0));
        assert_eq!(femnet(&["verify", "--net", &net, "--against", &mesh, "--coeffs", &c]).status.code(), Some(0));
    }
}

#[test]
fn flipped_weight_exits_2_with_diff() {
    let s = Scratch::new("flip");
    let (mesh, c) = hat_files(&s);
    let m = io::load_mesh(s.0.join("mesh.json").as_path()).unwrap();
    let coeffs = io::load_values(s.0.join("c.csv").as_path()).unwrap();
    let (mut net, _) = compile_fem_deep(&m, &coeffs).unwrap();
    let w = net.weight_mut(0, 0, 0).unwrap();
    w.1 = -w.1;
    io::save_network(s.0.join("bad.json").as_path(), &net).unwrap();
    let out = femnet(&["verify", "--net", &s.path("bad.json"), "--mesh", &mesh, "--coeffs", &c]);
    assert_eq!(out.status.code(), Some(2));
    let diff: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diff["status"], "mismatch");
    assert_eq!(diff["worst_point"].as_array().unwrap().len(), 2);
    assert!(diff["max_error"].as_f64().unwrap() > 1e-9);
}

#[test]
fn usage_and_io_errors_exit_1() {
    assert_eq!(femnet(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(femnet(&["verify", "--net", "/nonexistent/net.json", "--cpwl", "/nonexistent/f.json"]).status.code(), Some(1));
    assert_eq!(femnet(&["quantize", "--net", "x.json", "--grid", "0,1", "-o", "y.json"]).status.code(), Some(1));
    assert_eq!(femnet(&["--help"]).status.code(), Some(0));
}

#[test]
fn version_lists_schemas() {
    let out = femnet(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for (_, schema) in io::schema_versions() {
        assert!(text.contains(schema), "{text}");
    }
}

#[test]
fn eval_writes_csv() {
    let s = Scratch::new("eval");
    let net = ReluNetwork::from_affine(&AffineFunc::new(vec![1.0, -2.0], 0.5));
    io::save_network(s.0.join("net.json").as_path(), &net).unwrap();
    fs::write(s.0.join("p.csv"), "x,y\n1,1\n0,0.25\n").unwrap();
    let out = femnet(&["eval", "--net", &s.path("net.json"), "--points", &s.path("p.csv")]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "-0.5\n0.0\n");
}

#[test]
fn check_structured_and_quantize() {
    let s = Scratch::new("quant");
    let (mesh, c) = hat_files(&s);
    let net = s.path("net.json");
    assert!(femnet(&["compile-fem", "--mesh", &mesh, "--coeffs", &c, "-o", &net]).status.success());
    assert_eq!(femnet(&["check-structured", "--net", &net, "--report", &s.path("r.json")]).status.code(), Some(0));
    let odd = ReluNetwork::new(
        1,
        vec![
            femnet::AffineLayer::new(1, vec![vec![(0, 1.0)]], vec![0.0]).unwrap(),
            femnet::AffineLayer::new(1, vec![vec![(0, 0.3)]], vec![0.0]).unwrap(),
        ],
    )
    .unwrap();
    io::save_network(s.0.join("odd.json").as_path(), &odd).unwrap();
    assert_eq!(femnet(&["check-structured", "--net", &s.path("odd.json")]).status.code(), Some(2));
    assert!(femnet(&["quantize", "--net", &s.path("odd.json"), "--grid", "0,3", "-o", &s.path("q.json")]).status.success());
    assert_eq!(femnet(&["check-structured", "--net", &s.path("q.json")]).status.code(), Some(0));
    let q = io::load_network(s.0.join("q.json").as_path()).unwrap();
    assert_eq!(q.eval_scalar(&[2.0]).unwrap(), 1.0);
}

#[test]
fn report_layout() {
    let s = Scratch::new("report");
    let out = femnet(&["report", "--N", "23,37", "--out", &s.path("t.md"), &s.path("t.csv")]);
    assert!(out.status.success());
    let md = fs::read_to_string(s.path("t.md")).unwrap();
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].replace("\\|", "").matches('|').count(), 8);
    assert!(lines[2].starts_with("| 23 |") && lines[3].starts_with("| 37 |"));
    let csv = fs::read_to_string(s.path("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn solve_bvp_outputs() {
    let s = Scratch::new("bvp");
    let out = femnet(&[
        "solve-bvp", "--N", "9", "--max-iter", "5", "--out", &s.path("st.json"), "--trace", &s.path("tr.csv"),
        "--knots", &s.path("k.csv"), "--net", &s.path("n.json"),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let knots = fs::read_to_string(s.path("k.csv")).unwrap();
    assert!(knots.lines().next().unwrap().starts_with("step,t0,"));
    let state: serde_json::Value = serde_json::from_str(&fs::read_to_string(s.path("st.json")).unwrap()).unwrap();
    let t: Vec<f64> = state["t"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(t.len(), 9);
    let net = io::load_network(s.0.join("n.json").as_path()).unwrap();
    assert!(net.eval_scalar(&[1.0]).unwrap().abs() < 1e-12);
}

fn labels(csv: &str) -> Vec<usize> {
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn region_plot_is_seeded_and_bounded() {
    let a = femnet(&["demo-region-plot", "--random", "2,5,5,1", "--res", "60", "--seed", "4"]);
    let b = femnet(&["demo-region-plot", "--random", "2,5,5,1", "--res", "60", "--seed", "4"]);
    let c = femnet(&["demo-region-plot", "--random", "2,5,5,1", "--res", "60", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let l = labels(&String::from_utf8_lossy(&a.stdout));
    assert_eq!(l.len(), 3600);
    let distinct: HashSet<usize> = l.into_iter().collect();
    assert!(distinct.len() <= 1 << 10);
}

#[test]
fn region_plot_of_affine_net_has_one_label() {
    let s = Scratch::new("affine");
    let net = ReluNetwork::from_affine(&AffineFunc::new(vec![1.0, 1.0], 0.0));
    io::save_network(s.0.join("net.json").as_path(), &net).unwrap();
    let out = femnet(&["demo-region-plot", "--net", &s.path("net.json"), "--res", "10", "--domain=-2,2"]);
    assert!(out.status.success());
    assert!(labels(&String::from_utf8_lossy(&out.stdout)).iter().all(|&l| l == 0));
    let one_d = ReluNetwork::from_affine(&AffineFunc::new(vec![1.0], 0.0));
    io::save_network(s.0.join("1d.json").as_path(), &one_d).unwrap();
    assert_eq!(femnet(&["demo-region-plot", "--net", &s.path("1d.json")]).status.code(), Some(1));
}

#[test]
fn run_report_hashes_inputs() {
    let s = Scratch::new("runreport");
    let (mesh, c) = hat_files(&s);
    let out = femnet(&["compile-fem", "--mesh", &mesh, "--coeffs", &c, "-o", &s.path("n.json"), "--run-report", &s.path("rr.json")]);
    assert!(out.status.success());
    let rr: serde_json::Value = serde_json::from_str(&fs::read_to_string(s.path("rr.json")).unwrap()).unwrap();
    assert_eq!(rr["command"], "compile-fem");
    assert_eq!(rr["inputs"][&mesh].as_str().unwrap().len(), 64);
    assert_eq!(rr["config"]["compile-fem"]["pathway"], "deep");
    assert!(rr["results"]["bound"]["predicted_depth"].is_u64());
}
