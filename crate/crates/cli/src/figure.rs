//! Sample-path figure for the submartingale coin: the `ϑₙ` path, the coin
//! outcomes and the running proportion of ones.

use std::fmt::Write as _;
use std::io::{self, Write};

use disintegration::models::{LatentPath, ObservedPath};
use disintegration::stats::format_real;

use crate::error::CliError;

pub const COLUMNS: [&str; 4] = ["n", "theta_n", "coin_outcome", "running_mean"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub n: usize,
    pub theta_n: f64,
    pub coin_outcome: f64,
    /// Proportion of ones among outcomes `0..=n`.
    pub running_mean: f64,
}

pub fn figure_rows(
    latent: &LatentPath,
    observed: &ObservedPath,
) -> Result<Vec<FigureRow>, CliError> {
    let mut ones = 0.0;
    latent
        .measures
        .iter()
        .zip(&observed.points)
        .enumerate()
        .map(|(n, (m, &x))| {
            ones += x;
            let theta_n = m.mean().map_err(|e| CliError::Invariant(e.to_string()))?;
            Ok(FigureRow {
                n,
                theta_n,
                coin_outcome: x,
                running_mean: ones / (n + 1) as f64,
            })
        })
        .collect()
}

pub fn write_figure_csv<W: Write>(rows: &[FigureRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.n,
            format_real(r.theta_n),
            r.coin_outcome as u8,
            format_real(r.running_mean)
        )?;
    }
    Ok(())
}

pub fn read_figure_csv(text: &str) -> Result<Vec<FigureRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(e.to_string()))?
        .clone();
    let mut slots = [0usize; 4];
    for (slot, column) in slots.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| CliError::Parse(format!("figure data is missing column {column:?}")))?;
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let field = |k: usize| -> Result<f64, CliError> {
            let raw = record.get(slots[k]).unwrap_or("");
            raw.parse().map_err(|_| {
                CliError::Parse(format!(
                    "row {}: column {} is not a number: {raw:?}",
                    line + 1,
                    COLUMNS[k]
                ))
            })
        };
        rows.push(FigureRow {
            n: field(0)? as usize,
            theta_n: field(1)?,
            coin_outcome: field(2)?,
            running_mean: field(3)?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Invariant(
            "figure data has no rows; nothing to plot".into(),
        ));
    }
    Ok(rows)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;

struct Frame {
    n_max: f64,
}

impl Frame {
    fn x(&self, n: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT)
            * if self.n_max > 0.0 {
                n / self.n_max
            } else {
                0.5
            }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - v)
    }
}

fn polyline(
    out: &mut String,
    frame: &Frame,
    points: impl Iterator<Item = (f64, f64)>,
    color: &str,
) {
    let coords: Vec<String> = points
        .map(|(n, v)| format!("{:.3},{:.3}", frame.x(n), frame.y(v)))
        .collect();
    let _ = writeln!(
        out,
        r#"  <polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    );
}

/// SVG text for the rows. Coordinates are printed with fixed precision, so
/// equal input gives byte-identical output.
pub fn render_svg(rows: &[FigureRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Invariant(
            "figure data has no rows; nothing to plot".into(),
        ));
    }
    let frame = Frame {
        n_max: rows.iter().map(|r| r.n).max().unwrap_or(0) as f64,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let (x0, x1) = (frame.x(0.0), frame.x(frame.n_max));
    let (y0, y1) = (frame.y(0.0), frame.y(1.0));
    let _ = writeln!(out, r#"  <g stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        out,
        r#"    <line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y0:.3}"/>"#
    );
    let _ = writeln!(
        out,
        r#"    <line x1="{x0:.3}" y1="{y0:.3}" x2="{x0:.3}" y2="{y1:.3}"/>"#
    );
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(
        out,
        r#"  <g font-family="sans-serif" font-size="12" fill="black">"#
    );
    for v in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            out,
            r#"    <text x="{:.3}" y="{:.3}" text-anchor="end">{v:.1}</text>"#,
            x0 - 6.0,
            frame.y(v) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"    <text x="{x0:.3}" y="{:.3}" text-anchor="middle">0</text>"#,
        y0 + 18.0
    );
    let _ = writeln!(
        out,
        r#"    <text x="{x1:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        y0 + 18.0,
        frame.n_max
    );
    let _ = writeln!(
        out,
        r#"    <text x="{:.3}" y="{:.3}" text-anchor="middle">n</text>"#,
        (x0 + x1) / 2.0,
        y0 + 32.0
    );
    let _ = writeln!(out, "  </g>");
    polyline(
        &mut out,
        &frame,
        rows.iter().map(|r| (r.n as f64, r.theta_n)),
        "#1f5fbf",
    );
    polyline(
        &mut out,
        &frame,
        rows.iter().map(|r| (r.n as f64, r.running_mean)),
        "#d9731a",
    );
    let _ = writeln!(out, r#"  <g fill="black">"#);
    for r in rows {
        let _ = writeln!(
            out,
            r#"    <circle cx="{:.3}" cy="{:.3}" r="3"/>"#,
            frame.x(r.n as f64),
            frame.y(r.coin_outcome)
        );
    }
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use disintegration::models::{sample_observed, ProductDisintegration, SubmartingaleCoin};
    use disintegration::Stream;

    fn forced_ones(n: usize) -> Vec<FigureRow> {
        let latent = SubmartingaleCoin
            .sample_latent(n, &mut Stream::constant(1.0))
            .unwrap();
        let observed = sample_observed(&latent, &mut Stream::constant(1.0));
        figure_rows(&latent, &observed).unwrap()
    }

    #[test]
    fn forced_one_uniforms_climb_toward_one() {
        let rows = forced_ones(21);
        assert!(rows.windows(2).all(|w| w[1].theta_n > w[0].theta_n));
        assert_eq!(rows[20].theta_n, 1.0 - 0.5f64.powi(21));
        assert!(rows
            .iter()
            .all(|r| r.coin_outcome == 1.0 && r.running_mean == 1.0));
    }

    #[test]
    fn csv_round_trip() {
        let rows = forced_ones(21);
        let mut buf = Vec::new();
        write_figure_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            read_figure_csv(std::str::from_utf8(&buf).unwrap()).unwrap(),
            rows
        );
    }

    #[test]
    fn svg_is_deterministic() {
        let rows = forced_ones(21);
        let a = render_svg(&rows).unwrap();
        assert_eq!(a, render_svg(&rows).unwrap());
        assert_eq!(a.matches("<circle").count(), 21);
        assert_eq!(a.matches("<polyline").count(), 2);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            read_figure_csv("n,theta_n,coin_outcome,running_mean\n"),
            Err(CliError::Invariant(_))
        ));
        assert!(matches!(
            read_figure_csv("n,theta_n,running_mean\n0,0.1,0.0\n"),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(render_svg(&[]), Err(CliError::Invariant(_))));
    }
}
