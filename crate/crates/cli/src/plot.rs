//! Minimal self-contained SVG line/step plots for the CSV traces the other
//! verbs emit. Known headers get tailored series; anything else falls back
//! to plotting the last numeric column against the row index.

use dal_core::error::{Error, Result};

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Split one CSV line honoring double-quoted fields.
fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut field)),
            _ => field.push(c),
        }
    }
    out.push(field);
    out
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .map(split_csv)
        .ok_or_else(|| Error::Domain("empty input: no CSV header".into()))?;
    let mut rows = Vec::new();
    for line in lines {
        let row = split_csv(line);
        if row.len() != header.len() {
            return Err(Error::Domain(format!(
                "malformed CSV row (expected {} fields): {line}",
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn col(table: &Table, name: &str) -> Option<usize> {
    table.header.iter().position(|h| h == name)
}

fn num(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Turn a CSV trace into an SVG document.
pub fn plot_csv(text: &str, title: &str) -> Result<String> {
    let table = parse_table(text)?;
    let header = table.header.join(",");
    let (series, x_label, y_label) = if header == "nu,t_start,t_end,psi_lo,psi_hi" {
        (psi_series(&table)?, "t", "psi(t)")
    } else if header == dal_core::measure::TRACE_CSV_HEADER {
        (ratio_series(&table)?, "n", "G_n/n")
    } else if header == dal_core::dynamics::ORBIT_CSV_HEADER {
        (orbit_series(&table)?, "step", "value")
    } else {
        (generic_series(&table), "row", "value")
    };
    Ok(render_svg(&series, title, x_label, y_label))
}

/// Step plot of the measure function: one horizontal run per segment,
/// breakpoints exactly at the segment boundaries.
fn psi_series(table: &Table) -> Result<Vec<Series>> {
    let (t0, t1, lo, hi) = (
        col(table, "t_start").unwrap(),
        col(table, "t_end").unwrap(),
        col(table, "psi_lo").unwrap(),
        col(table, "psi_hi").unwrap(),
    );
    let mut points = Vec::new();
    for row in &table.rows {
        let (a, b) = (num(&row[t0]), num(&row[t1]));
        let v = match (num(&row[lo]), num(&row[hi])) {
            (Some(l), Some(h)) => Some(0.5 * (l + h)),
            _ => None,
        };
        if let (Some(a), Some(b), Some(v)) = (a, b, v) {
            points.push((a, v));
            points.push((b, v));
        }
    }
    Ok(vec![Series {
        label: "psi".into(),
        points,
    }])
}

fn ratio_series(table: &Table) -> Result<Vec<Series>> {
    let (nu, g_lo, g_hi) = (
        col(table, "nu").unwrap(),
        col(table, "G_nu_lo").unwrap(),
        col(table, "G_nu_hi").unwrap(),
    );
    let mut points = Vec::new();
    for row in &table.rows {
        if let (Some(n), Some(l), Some(h)) = (num(&row[nu]), num(&row[g_lo]), num(&row[g_hi])) {
            if n > 0.0 {
                points.push((n, 0.5 * (l + h) / n));
            }
        }
    }
    Ok(vec![Series {
        label: "G_n/n".into(),
        points,
    }])
}

fn orbit_series(table: &Table) -> Result<Vec<Series>> {
    let (nu, yn, yd, f_lo, f_hi) = (
        col(table, "nu").unwrap(),
        col(table, "y_num").unwrap(),
        col(table, "y_den").unwrap(),
        col(table, "f_lo").unwrap(),
        col(table, "f_hi").unwrap(),
    );
    let mut y_pts = Vec::new();
    let mut f_pts = Vec::new();
    for row in &table.rows {
        if let (Some(n), Some(a), Some(b)) = (num(&row[nu]), num(&row[yn]), num(&row[yd])) {
            if b != 0.0 {
                y_pts.push((n, a / b));
            }
        }
        if let (Some(n), Some(l), Some(h)) = (num(&row[nu]), num(&row[f_lo]), num(&row[f_hi])) {
            f_pts.push((n, 0.5 * (l + h)));
        }
    }
    Ok(vec![
        Series {
            label: "y".into(),
            points: y_pts,
        },
        Series {
            label: "f".into(),
            points: f_pts,
        },
    ])
}

/// Fallback: last numeric column against the row index.
fn generic_series(table: &Table) -> Vec<Series> {
    let mut best: Option<usize> = None;
    for c in 0..table.header.len() {
        if table.rows.iter().all(|r| num(&r[c]).is_some()) && !table.rows.is_empty() {
            best = Some(c);
        }
    }
    let Some(c) = best else {
        return vec![];
    };
    let points = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| num(&r[c]).map(|v| (i as f64, v)))
        .collect();
    vec![Series {
        label: table.header[c].clone(),
        points,
    }]
}

const PALETTE: [&str; 4] = ["#1f6fb2", "#c23b22", "#2e8b57", "#8b5a2b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Render series on labeled axes; empty input yields just the axes.
pub fn render_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (800.0, 500.0);
    let (ml, mr, mt, mb) = (80.0, 24.0, 46.0, 60.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if x0 == x1 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y0 == y1 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let ypad = 0.05 * (y1 - y0);
        y0 -= ypad;
        y1 += ypad;
    }
    let sx = move |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = move |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        w / 2.0,
        esc(title)
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + ph,
        ml + pw,
        mt + ph
    ));
    out.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + ph
    ));
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let px = sx(fx);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            mt + ph,
            mt + ph + 5.0,
            mt + ph + 20.0,
            fmt_tick(fx)
        ));
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let py = sy(fy);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ml}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            ml - 5.0,
            ml - 8.0,
            py + 4.0,
            fmt_tick(fy)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        ml + pw / 2.0,
        h - 14.0,
        esc(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        mt + ph / 2.0,
        mt + ph / 2.0,
        esc(y_label)
    ));
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            ml + pw - 90.0,
            mt + 16.0 + 16.0 * i as f64,
            esc(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_yields_axes_only() {
        let svg = plot_csv("nu,t_start,t_end,psi_lo,psi_hi\n", "empty").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("</svg>"));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn psi_trace_produces_step_points() {
        let csv = "nu,t_start,t_end,psi_lo,psi_hi\n1,1,2,0.38,0.382\n2,2,3,0.23,0.24\n";
        let svg = plot_csv(csv, "steps").unwrap();
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn quoted_fields_are_handled() {
        let csv = "a,b\n\"1,2,3\",4\n";
        let svg = plot_csv(csv, "generic").unwrap();
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(plot_csv("a,b\n1\n", "bad").is_err());
    }
}
