//! Whole-model evaluation reports.
//!
//! Prediction and ground truth are mapped into the mesh's unit-sphere frame
//! before measuring, so every value is in normalized units.

use std::path::Path;

use pcup_core::geometry::PointCloud;
use pcup_core::mesh::TriangleMesh;
use pcup_core::metrics::{
    chamfer_distance, hausdorff_distance, p2f_distances, uniformity_report_mesh, UNIFORMITY_PERCENTAGES,
};

use crate::{write_file, Result};

/// Seeds of the mesh uniformity report.
pub const EVAL_SEEDS: usize = 1000;

/// Fixed CSV header: model, value scale, uniformity at the five
/// percentages, P2F mean and max, Chamfer and Hausdorff distances.
pub const REPORT_HEADER: &str = "model,scale,uni_0.4%,uni_0.6%,uni_0.8%,uni_1.0%,uni_1.2%,p2f_mean,p2f_max,cd,hd";

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub name: String,
    pub uniformity: [f64; 5],
    pub p2f_mean: f64,
    pub p2f_max: f64,
    pub cd: f64,
    pub hd: f64,
}

impl EvalReport {
    fn values(&self) -> Vec<f64> {
        let mut v = self.uniformity.to_vec();
        v.extend([self.p2f_mean, self.p2f_max, self.cd, self.hd]);
        v
    }

    /// Header, the raw row and a row with every value times 10^3.
    pub fn to_csv(&self) -> String {
        let row = |scale: &str, factor: f64| {
            let cells: Vec<String> = self.values().iter().map(|v| format!("{:?}", v * factor)).collect();
            format!("{},{scale},{}\n", self.name, cells.join(","))
        };
        format!("{REPORT_HEADER}\n{}{}", row("1", 1.0), row("1e3", 1e3))
    }
}

/// Metrics of `pred` against the mesh and the ground-truth points, both
/// given in the mesh's original coordinates.
pub fn evaluate(
    name: &str,
    pred: &PointCloud,
    mesh: &TriangleMesh,
    gt: &PointCloud,
    seeds: usize,
    seed: u64,
) -> Result<EvalReport> {
    let frame = mesh.normalization();
    let pred = frame.apply_cloud(pred);
    let gt = frame.apply_cloud(gt);
    let uniformity = uniformity_report_mesh(&pred, mesh, seeds, seed)?;
    debug_assert_eq!(uniformity.percentages, UNIFORMITY_PERCENTAGES);
    let (_, p2f) = p2f_distances(&pred, mesh)?;
    Ok(EvalReport {
        name: name.to_string(),
        uniformity: uniformity.values,
        p2f_mean: p2f.mean,
        p2f_max: p2f.max,
        cd: chamfer_distance(&pred, &gt)?,
        hd: hausdorff_distance(&pred, &gt)?,
    })
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_file(path, report.to_csv())
}
