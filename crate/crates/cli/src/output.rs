use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use affine_ensemble::geometry::{cayley, cayley_inv, group_mul};
use affine_ensemble::sampler::PointConfiguration;
use affine_ensemble::{Disk, Point};
use num_complex::Complex64;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "AFFINE_ENSEMBLE_OUT";

pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

const SIZE: f64 = 480.0;

fn to_px(u: Complex64) -> (f64, f64) {
    (SIZE / 2.0 * (1.0 + 0.95 * u.re), SIZE / 2.0 * (1.0 - 0.95 * u.im))
}

/// The sample in the Cayley disc model: unit circle, region boundary, points.
pub fn svg(cfg: &PointConfiguration) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(
        s,
        r#"<circle cx="{0}" cy="{0}" r="{1}" fill="none" stroke="black" stroke-width="1"/>"#,
        SIZE / 2.0,
        SIZE / 2.0 * 0.95
    );
    // D(c, R) = c . D(i, R), and D(i, R) is the Euclidean disc |u| < R
    let boundary: Vec<String> = (0..256)
        .map(|k| {
            let u = Complex64::from_polar(cfg.region.radius, 2.0 * std::f64::consts::PI * k as f64 / 256.0);
            let w: Point = group_mul(cfg.region.center, cayley_inv(Disk { u }));
            let (x, y) = to_px(cayley(w).u);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="steelblue" stroke-width="1"/>"#, boundary.join(" "));
    for p in &cfg.points {
        let (x, y) = to_px(cayley(*p).u);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2.5" fill="firebrick"/>"#);
    }
    s.push_str("</svg>\n");
    s
}
