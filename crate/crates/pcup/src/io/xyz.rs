use std::path::Path;

use pcup_core::geometry::{Point3, PointCloud};

use crate::{read_text, write_file, Error, Result};

/// Parses XYZ text: one point per line as three whitespace-separated reals.
/// Blank lines and lines starting with `#` are skipped; six-column lines
/// (position and normal) keep the position.
pub fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 6 {
            return Err(parse_err(format!("expected 3 coordinates, found {} fields", fields.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field.parse::<f64>().map_err(|_| parse_err(format!("invalid number '{field}'")))?;
            if !slot.is_finite() {
                return Err(parse_err(format!("non-finite coordinate '{field}'")));
            }
        }
        points.push(Point3::from_array(xyz));
    }
    if points.is_empty() {
        return Err(Error::format(path, "no points"));
    }
    Ok(PointCloud::new(points)?)
}

pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    parse_xyz(&read_text(path)?, path)
}

/// A real with six significant digits, in the style of C's `%g`.
pub fn format_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim(mantissa))
    } else {
        trim(&format!("{:.*}", (5 - exp) as usize, v))
    }
}

pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 32);
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", format_g6(p.x), format_g6(p.y), format_g6(p.z)));
    }
    out
}

pub fn write_xyz(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_file(path, format_xyz(cloud))
}
