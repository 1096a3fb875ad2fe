//! On-disk training patches.
//!
//! ```text
//! <out>/manifest.json
//! <out>/mesh_000_<stem>/meta.json
//! <out>/mesh_000_<stem>/patch_0000_input.xyz   (N points)
//! <out>/mesh_000_<stem>/patch_0000_gt.xyz      (rN points)
//! ```
//!
//! `manifest.json` lists the mesh directories and the preparation settings;
//! each `meta.json` records the source mesh, its seed stream and the
//! normalization of the mesh and of every patch.

use std::path::{Path, PathBuf};

use pcup_core::geometry::{Normalization, Point3};
use pcup_core::rng::derive;
use pcup_core::train::{build_mesh_patches, PatchPair, TrainConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{load_mesh, read_xyz, write_xyz};
use crate::{create_dir, read_text, write_file, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub centroid: [f64; 3],
    pub scale: f64,
}

impl From<Normalization> for NormalizationRecord {
    fn from(n: Normalization) -> Self {
        Self { centroid: n.centroid.to_array(), scale: n.scale }
    }
}

impl From<&NormalizationRecord> for Normalization {
    fn from(r: &NormalizationRecord) -> Self {
        Normalization { centroid: Point3::from_array(r.centroid), scale: r.scale }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub r: usize,
    pub patch_fraction: f64,
    pub patches_per_mesh: usize,
    pub seed: u64,
    pub meshes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMeta {
    pub source: String,
    pub mesh_id: usize,
    pub seed: u64,
    /// Stream of the seeded generator used for this mesh.
    pub rng_stream: u64,
    pub patch_fraction: f64,
    pub n: usize,
    pub r: usize,
    pub mesh_normalization: NormalizationRecord,
    pub patches: Vec<NormalizationRecord>,
    pub failed_patches: Vec<String>,
}

/// What happened to one mesh during preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshOutcome {
    pub source: String,
    pub patches: usize,
    pub failed_patches: usize,
    /// Set when the whole mesh failed.
    pub error: Option<String>,
}

/// Mesh files (`.off`, `.ply`) in `dir`, sorted by name.
pub fn mesh_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("off" | "ply")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds patches for every mesh in `meshes_dir` (in parallel, one seed
/// stream per mesh) and writes the archive. Meshes that fail entirely are
/// reported and left out.
pub fn prepare(meshes_dir: &Path, out_dir: &Path, cfg: &TrainConfig) -> Result<Vec<MeshOutcome>> {
    if !meshes_dir.is_dir() {
        return Err(Error::Usage(format!("mesh directory {} does not exist", meshes_dir.display())));
    }
    let files = mesh_files(meshes_dir)?;
    if files.is_empty() {
        return Err(Error::Usage(format!("no .off or .ply meshes in {}", meshes_dir.display())));
    }
    let built: Vec<_> = files
        .par_iter()
        .enumerate()
        .map(|(id, path)| -> Result<_> {
            let mesh = load_mesh(path)?;
            let patches = build_mesh_patches(&mesh, id, cfg, &mut derive(cfg.seed, id as u64))?;
            Ok((mesh.normalization(), patches))
        })
        .collect();

    create_dir(out_dir)?;
    let mut outcomes = Vec::new();
    let mut written = Vec::new();
    for (id, (path, result)) in files.iter().zip(built).enumerate() {
        let source = file_name(path);
        let (mesh_norm, patches) = match result {
            Ok(ok) => ok,
            Err(e) => {
                outcomes.push(MeshOutcome { source, patches: 0, failed_patches: 0, error: Some(e.to_string()) });
                continue;
            }
        };
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let dir_name = format!("mesh_{id:03}_{stem}");
        let dir = out_dir.join(&dir_name);
        create_dir(&dir)?;
        for (k, pair) in patches.pairs.iter().enumerate() {
            write_xyz(&dir.join(format!("patch_{k:04}_input.xyz")), &pair.input)?;
            write_xyz(&dir.join(format!("patch_{k:04}_gt.xyz")), &pair.target)?;
        }
        let meta = MeshMeta {
            source: source.clone(),
            mesh_id: id,
            seed: cfg.seed,
            rng_stream: id as u64,
            patch_fraction: cfg.patch_fraction,
            n: cfg.n,
            r: cfg.r,
            mesh_normalization: mesh_norm.into(),
            patches: patches.pairs.iter().map(|p| p.normalization.into()).collect(),
            failed_patches: patches.failures.iter().map(|e| e.to_string()).collect(),
        };
        write_file(&dir.join("meta.json"), to_json(&meta)?)?;
        outcomes.push(MeshOutcome {
            source,
            patches: patches.pairs.len(),
            failed_patches: patches.failures.len(),
            error: None,
        });
        written.push(dir_name);
    }
    let manifest = Manifest {
        n: cfg.n,
        r: cfg.r,
        patch_fraction: cfg.patch_fraction,
        patches_per_mesh: cfg.patches_per_mesh,
        seed: cfg.seed,
        meshes: written,
    };
    write_file(&out_dir.join("manifest.json"), to_json(&manifest)?)?;
    Ok(outcomes)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path, e.to_string()))
}

/// Reads every patch pair of an archive, in manifest order.
pub fn read_archive(dir: &Path) -> Result<(Manifest, Vec<PatchPair>)> {
    if !dir.is_dir() {
        return Err(Error::Usage(format!("data directory {} does not exist", dir.display())));
    }
    let manifest: Manifest = from_json(&dir.join("manifest.json"))?;
    let mut pairs = Vec::new();
    for name in &manifest.meshes {
        let mesh_dir = dir.join(name);
        let meta: MeshMeta = from_json(&mesh_dir.join("meta.json"))?;
        for (k, norm) in meta.patches.iter().enumerate() {
            let input_path = mesh_dir.join(format!("patch_{k:04}_input.xyz"));
            let gt_path = mesh_dir.join(format!("patch_{k:04}_gt.xyz"));
            let input = read_xyz(&input_path)?;
            let target = read_xyz(&gt_path)?;
            if input.len() != manifest.n {
                return Err(Error::format(&input_path, format!("expected {} points, found {}", manifest.n, input.len())));
            }
            if target.len() != manifest.n * manifest.r {
                return Err(Error::format(
                    &gt_path,
                    format!("expected {} points, found {}", manifest.n * manifest.r, target.len()),
                ));
            }
            pairs.push(PatchPair { input, target, mesh_id: meta.mesh_id, normalization: norm.into() });
        }
    }
    if pairs.is_empty() {
        return Err(Error::format(dir, "archive holds no patches"));
    }
    Ok((manifest, pairs))
}
