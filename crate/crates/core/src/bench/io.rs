//! Plain-text correspondence files.
//!
//! One record per line, whitespace separated, `#` starts a comment:
//!
//! ```text
//! # px py pz  bx by bz
//! 1.0 2.0 8.0  0.12 0.25 0.96
//! ```
//!
//! In pixel mode a record is `px py pz  u v` and the pixel is lifted to a
//! bearing with the given pinhole intrinsics.

use std::io::Write;
use std::path::Path;

use crate::error::{PoseError, Result};
use crate::geometry::Vec3;
use crate::pairing::Correspondence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordFormat {
    Bearings,
    Pixels { focal: f64, cx: f64, cy: f64 },
}

pub fn parse_correspondences(text: &str, format: RecordFormat) -> Result<Vec<Correspondence>> {
    let expected = match format {
        RecordFormat::Bearings => 6,
        RecordFormat::Pixels { focal, .. } => {
            if !(focal > 0.0) {
                return Err(PoseError::InvalidConfig(format!("focal length must be positive, got {focal}")));
            }
            5
        }
    };

    let mut corrs = Vec::new();
    let mut line_count = 0;
    for (idx, raw) in text.lines().enumerate() {
        line_count = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| PoseError::Parse { line: idx + 1, message };
        let fields = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| parse_err(format!("'{tok}' is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != expected {
            return Err(parse_err(format!("expected {expected} fields, found {}", fields.len())));
        }
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(parse_err("non-finite value".into()));
        }
        let p = Vec3::new(fields[0], fields[1], fields[2]);
        let bearing = match format {
            RecordFormat::Bearings => Vec3::new(fields[3], fields[4], fields[5]),
            RecordFormat::Pixels { focal, cx, cy } => {
                Vec3::new((fields[3] - cx) / focal, (fields[4] - cy) / focal, 1.0)
            }
        };
        let id = corrs.len();
        corrs.push(Correspondence::new(id, p, bearing).map_err(|_| parse_err("bearing has zero length".into()))?);
    }
    if corrs.is_empty() {
        return Err(PoseError::Parse { line: line_count.max(1), message: "no correspondences found".into() });
    }
    Ok(corrs)
}

pub fn read_correspondences(path: &Path, format: RecordFormat) -> Result<Vec<Correspondence>> {
    let text = std::fs::read_to_string(path)?;
    parse_correspondences(&text, format)
}

/// Writes records in the bearing format; values round-trip exactly.
pub fn write_correspondences<W: Write>(mut out: W, corrs: &[Correspondence]) -> std::io::Result<()> {
    writeln!(out, "# px py pz bx by bz")?;
    for c in corrs {
        let q = c.q.into_inner();
        writeln!(out, "{} {} {} {} {} {}", c.p.x, c.p.y, c.p.z, q.x, q.y, q.z)?;
    }
    Ok(())
}
