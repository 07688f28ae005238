//! Bit-stable file outputs: CSV time series, JSON summaries and SVG plots.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

use crate::dynamics::{Trajectory, TrajectoryRow};
use crate::error::{Error, Result};

/// Fixed columns of a trajectory table; one `norm_<i>` column per recorded
/// norm is inserted before the flags.
pub const LEADING_COLUMNS: [&str; 13] = [
    "t",
    "w",
    "in_event",
    "mass_mu",
    "mass_theta",
    "l2_theta",
    "second_moment",
    "boundary_warning",
    "resolution_fraction",
    "audit_log_norm",
    "audit_energy_rate",
    "audit_dissipation",
    "audit_nonlinear",
];

pub const TRAILING_COLUMNS: [&str; 3] = ["overflow", "blowup", "resolution_loss"];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn trajectory_header(n_norms: usize) -> Vec<String> {
    LEADING_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((0..n_norms).map(|i| format!("norm_{i}")))
        .chain(TRAILING_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

fn row_record(r: &TrajectoryRow) -> Vec<String> {
    let a = r.audit.as_ref();
    let mut out = vec![
        fmt_f64(r.t),
        fmt_f64(r.w),
        flag(r.in_event),
        fmt_f64(r.mass_mu),
        fmt_f64(r.mass_theta),
        fmt_f64(r.l2_theta),
        fmt_opt(r.second_moment),
        flag(r.boundary_warning),
        fmt_f64(r.resolution_fraction),
        fmt_opt(a.map(|a| a.log_norm)),
        fmt_opt(a.map(|a| a.energy_rate)),
        fmt_opt(a.and_then(|a| a.dissipation)),
        fmt_opt(a.and_then(|a| a.nonlinear)),
    ];
    out.extend(r.norms.iter().map(|x| fmt_f64(*x)));
    out.extend([flag(r.overflow), flag(r.blowup), flag(r.resolution_loss)]);
    out
}

/// Serializes rows with a header to CSV (comma, LF).
pub fn csv_string<I, R>(header: &[String], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn trajectory_csv(tr: &Trajectory) -> Result<String> {
    let n = tr.rows.first().map_or(0, |r| r.norms.len());
    csv_string(&trajectory_header(n), tr.rows.iter().map(row_record))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a CSV produced by this module into its header and numeric columns;
/// empty cells become NaN.
pub fn read_columns(csv_text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        for (j, cell) in rec.iter().enumerate() {
            cols[j].push(cell.trim().parse().unwrap_or(f64::NAN));
        }
    }
    Ok((header, cols))
}

/// Self-contained SVG line plot of `y` against `x`. Non-finite points are
/// skipped.
pub fn svg_line_plot(title: &str, x: &[f64], y: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 56.0;
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    let range = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), z| {
            (l.min(z), h.max(z))
        });
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = range(&mut pts.iter().map(|p| p.1));
    let sx = |v: f64| M + (v - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |v: f64| H - M - (v - y0) / (y1 - y0) * (H - 2.0 * M);
    let poly: Vec<String> = pts
        .iter()
        .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
        .collect();
    let esc = title
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;");
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
            "<rect x=\"{m}\" y=\"{m}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n",
            "<text x=\"{m}\" y=\"{by}\" font-family=\"sans-serif\" font-size=\"11\">{x0}</text>\n",
            "<text x=\"{rx}\" y=\"{by}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{x1}</text>\n",
            "<text x=\"4\" y=\"{ly}\" font-family=\"sans-serif\" font-size=\"11\">{y0}</text>\n",
            "<text x=\"4\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{y1}</text>\n",
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{pts}\"/>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        cx = W / 2.0,
        m = M,
        pw = W - 2.0 * M,
        ph = H - 2.0 * M,
        by = H - M + 16.0,
        rx = W - M,
        ly = H - M,
        ty = M + 10.0,
        x0 = format_args!("{x0:.4e}"),
        x1 = format_args!("{x1:.4e}"),
        y0 = format_args!("{y0:.4e}"),
        y1 = format_args!("{y1:.4e}"),
        title = esc,
        pts = poly.join(" "),
    )
}

/// One SVG per column of `csv_text` other than `x_column`, keyed by column
/// name. Columns without finite values are omitted.
pub fn svg_plots_from_csv(csv_text: &str, x_column: &str) -> Result<Vec<(String, String)>> {
    let (header, cols) = read_columns(csv_text)?;
    let xi = header
        .iter()
        .position(|h| h == x_column)
        .ok_or_else(|| Error::Config(format!("no column {x_column:?}")))?;
    Ok(header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != xi && cols[*j].iter().any(|v| v.is_finite()))
        .map(|(j, name)| (name.clone(), svg_line_plot(name, &cols[xi], &cols[j])))
        .collect())
}

/// Writes `<prefix>.csv`, `<prefix>.json` and, when `plot` is set,
/// `<prefix>.<column>.svg` for every series.
pub fn write_bundle<T: Serialize>(
    dir: &Path,
    prefix: &str,
    csv_text: &str,
    summary: &T,
    plot: bool,
    x_column: &str,
) -> Result<()> {
    write_atomic(&dir.join(format!("{prefix}.csv")), csv_text.as_bytes())?;
    write_atomic(&dir.join(format!("{prefix}.json")), to_json(summary)?.as_bytes())?;
    if plot {
        for (name, svg) in svg_plots_from_csv(csv_text, x_column)? {
            write_atomic(&dir.join(format!("{prefix}.{name}.svg")), svg.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn header_layout() {
        let h = trajectory_header(2);
        assert_eq!(h.len(), 18);
        assert_eq!(h[0], "t");
        assert_eq!(h[13], "norm_0");
        assert_eq!(h[17], "resolution_loss");
    }

    #[test]
    fn csv_and_columns_round_trip() {
        let header = vec!["t".to_string(), "y".to_string()];
        let text = csv_string(&header, [["0", "1.5"], ["1", ""]]).unwrap();
        assert_eq!(text, "t,y\n0,1.5\n1,\n");
        let (h, c) = read_columns(&text).unwrap();
        assert_eq!(h, header);
        assert_eq!(c[1][0], 1.5);
        assert!(c[1][1].is_nan());
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = svg_line_plot("a<b", &[0.0, 1.0, 2.0], &[1.0, f64::NAN, 3.0]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("points=").count(), 1);
        assert!(!svg.contains("href"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
