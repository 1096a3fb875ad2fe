//! The uniformity comparison: clustered, random and hexagonal patterns of
//! 625 points in the unit disk, scored by the uniform loss at `p = 1%` and
//! drawn as SVG scatter plots.

use std::path::Path;

use pcup_core::geometry::{Point3, PointCloud};
use pcup_core::metrics::uniformity_loss_value;
use pcup_core::patterns::{clustered, hexagonal, uniform_random, PATTERN_POINTS};
use pcup_core::rng::derive;

use crate::{create_dir, write_file, Error, Result};

pub const DEMO_PERCENTAGE: f64 = 0.01;
pub const DEMO_SEEDS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub name: &'static str,
    pub points: Vec<Point3>,
    pub loss: f64,
}

/// The three patterns with their uniform loss values, in the order
/// clustered, random, hexagonal.
pub fn patterns(seed: u64) -> Result<[Pattern; 3]> {
    let make = |name, points: Vec<Point3>| -> Result<Pattern> {
        let loss = uniformity_loss_value(&PointCloud::new(points.clone())?, DEMO_PERCENTAGE, DEMO_SEEDS)?;
        Ok(Pattern { name, points, loss })
    };
    Ok([
        make("clustered", clustered(PATTERN_POINTS, 25, 0.05, &mut derive(seed, 1)))?,
        make("random", uniform_random(PATTERN_POINTS, &mut derive(seed, 2)))?,
        make("hexagonal", hexagonal(PATTERN_POINTS))?,
    ])
}

/// A square scatter plot of the xy coordinates over `[-1, 1]^2`.
pub fn scatter_svg(title: &str, points: &[Point3]) -> String {
    let size = 400.0;
    let map = |v: f64| (v + 1.05) / 2.1 * size;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{h}\" viewBox=\"0 0 {size} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <circle cx=\"{c}\" cy=\"{c}\" r=\"{r}\" fill=\"none\" stroke=\"#bbbbbb\"/>\n\
         <text x=\"{c}\" y=\"{ty}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        h = size + 30.0,
        c = size / 2.0,
        r = size / 2.1,
        ty = size + 22.0,
    );
    for p in points {
        svg.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"black\"/>\n", map(p.x), size - map(p.y)));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `uniformity.csv` and one SVG per pattern into `out`, and fails
/// unless clustered > random > hexagonal.
pub fn run(out: &Path, seed: u64) -> Result<[Pattern; 3]> {
    let pats = patterns(seed)?;
    create_dir(out)?;
    let mut csv = String::from("pattern,points,p,l_uni\n");
    for p in &pats {
        csv.push_str(&format!("{},{},{},{:?}\n", p.name, p.points.len(), DEMO_PERCENTAGE, p.loss));
        let title = format!("{} (L_uni = {:.4})", p.name, p.loss);
        write_file(&out.join(format!("{}.svg", p.name)), scatter_svg(&title, &p.points))?;
    }
    write_file(&out.join("uniformity.csv"), csv)?;
    let [c, r, h] = &pats;
    if !(c.loss > r.loss && r.loss > h.loss) {
        return Err(Error::Check(format!(
            "ordering violated: clustered {} random {} hexagonal {}",
            c.loss, r.loss, h.loss
        )));
    }
    Ok(pats)
}
