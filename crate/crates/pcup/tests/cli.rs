use std::fs;
use std::path::Path;

use pcup::cli::main_with;
use pcup::io::{format_off, parse_xyz, read_xyz};
use pcup_core::mesh::shapes;
use tempfile::TempDir;

const SMALL: &str = "\
n = 32
r = 2
batch = 2
patches_per_mesh = 4
min_patches_per_mesh = 4
c = 24
c_prime = 8
k = 4
regression_hidden = 8
c_d = 8
c_d_prime = 16
d_head_hidden = 8
uniform_seeds = 5
checkpoint_every = 2
";

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("pcup").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A temp dir with `meshes/` holding two meshes and `small.txt`.
fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    let meshes = dir.path().join("meshes");
    fs::create_dir(&meshes).unwrap();
    fs::write(meshes.join("ball.off"), format_off(&shapes::icosphere(2))).unwrap();
    fs::write(meshes.join("tet.off"), format_off(&shapes::tetrahedron())).unwrap();
    fs::write(dir.path().join("small.txt"), SMALL).unwrap();
    dir
}

#[test]
fn prepare_train_upsample_eval() {
    let ws = workspace();
    let root = ws.path();
    let (cfg, data, run_dir) = (root.join("small.txt"), root.join("data"), root.join("run"));
    assert_eq!(run(&["prepare", "--meshes", path(&root.join("meshes")), "--out", path(&data), "--config", path(&cfg)]), 0);
    assert!(data.join("manifest.json").is_file());
    assert!(data.join("mesh_000_ball/patch_0003_gt.xyz").is_file());
    assert_eq!(read_xyz(&data.join("mesh_001_tet/patch_0000_input.xyz")).unwrap().len(), 32);
    assert_eq!(read_xyz(&data.join("mesh_001_tet/patch_0000_gt.xyz")).unwrap().len(), 64);

    let code = run(&["train", "--data", path(&data), "--out", path(&run_dir), "--config", path(&cfg), "--iterations", "4"]);
    assert_eq!(code, 0);
    let log = fs::read_to_string(run_dir.join("loss_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 5);
    assert!(run_dir.join("ckpt_000002/generator.ckpt").is_file());
    let ckpt = run_dir.join("ckpt_000004");
    assert!(ckpt.join("discriminator.ckpt").is_file());

    let gt = data.join("mesh_000_ball/patch_0000_gt.xyz");
    let input = data.join("mesh_000_ball/patch_0000_input.xyz");
    let pred = root.join("pred.xyz");
    assert_eq!(run(&["upsample", "--in", path(&input), "--ckpt", path(&ckpt), "--out", path(&pred)]), 0);
    assert_eq!(read_xyz(&pred).unwrap().len(), 64);

    let report = root.join("report.csv");
    let mesh = root.join("meshes/ball.off");
    let code = run(&[
        "eval", "--pred", path(&pred), "--mesh", path(&mesh), "--gt", path(&gt), "--out", path(&report), "--seeds", "20",
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("pred,1,"));
    assert_eq!(lines[1].split(',').count(), 11);
}

#[test]
fn ablated_training_skips_the_discriminator() {
    let ws = workspace();
    let root = ws.path();
    let (cfg, data, run_dir) = (root.join("small.txt"), root.join("data"), root.join("run"));
    assert_eq!(run(&["prepare", "--meshes", path(&root.join("meshes")), "--out", path(&data), "--config", path(&cfg)]), 0);
    let code = run(&[
        "train", "--data", path(&data), "--out", path(&run_dir), "--config", path(&cfg), "--iterations", "2", "--ablate",
        "discriminator", "--ablate", "uniform-loss",
    ]);
    assert_eq!(code, 0);
    assert!(!run_dir.join("ckpt_000002/discriminator.ckpt").exists());
    let log = fs::read_to_string(run_dir.join("loss_log.csv")).unwrap();
    let row: Vec<&str> = log.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "0.0");
}

#[test]
fn uniformity_demo_writes_outputs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["uniformity-demo", "--out", path(dir.path())]), 0);
    let csv = fs::read_to_string(dir.path().join("uniformity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let svgs = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "svg");
    assert_eq!(svgs.count(), 3);
}

#[test]
fn usage_errors_exit_with_two() {
    let ws = workspace();
    let root = ws.path();
    let missing = root.join("missing");
    assert_eq!(run(&["prepare", "--meshes", path(&missing), "--out", path(&root.join("d"))]), 2);
    assert_eq!(run(&["train", "--data", path(&missing), "--out", path(&root.join("r"))]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["prepare", "--bogus"]), 2);
    assert_eq!(run(&["train", "--data", "x", "--out", "y", "--ablate", "wings"]), 2);
    fs::write(root.join("bad.txt"), "n = many\n").unwrap();
    assert_eq!(run(&["prepare", "--meshes", path(&root.join("meshes")), "--out", "z", "--config", path(&root.join("bad.txt"))]), 2);
}

#[test]
fn runtime_errors_exit_with_one() {
    let ws = workspace();
    let root = ws.path();
    let bad = root.join("bad.xyz");
    fs::write(&bad, "0 0 0\n1 1\n").unwrap();
    let code = run(&["upsample", "--in", path(&bad), "--ckpt", path(root), "--out", path(&root.join("o.xyz"))]);
    assert_eq!(code, 1);
    let err = parse_xyz("0 0 0\n\n1 1 x\n", Path::new("cloud.xyz")).unwrap_err();
    assert!(err.to_string().starts_with("cloud.xyz:3:"), "{err}");
}
