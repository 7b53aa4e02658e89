use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiments::{FirstLastResult, SweepRow, WindowSize};
use super::significance::SignificanceResult;
use crate::error::{Error, Result};
use crate::trials::Difficulty;

/// One model × encoding × difficulty evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub model: String,
    pub encoding: String,
    pub difficulty: String,
    pub n_trials: usize,
    pub auc: Option<f64>,
    pub auc_se: Option<f64>,
    pub eer: Option<f64>,
    pub eer_se: Option<f64>,
    pub resamples: usize,
    pub seed: u64,
    pub redraws: usize,
}

pub const REPORT_HEADER: &str = "model,encoding,difficulty,n_trials,auc,auc_se,eer,eer_se,resamples,seed,redraws";
pub const SWEEP_HEADER: &str = "model,window,n_trials,short_sides,auc,auc_se,resamples,seed";

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{:.6}", v + 0.0)).unwrap_or_default()
}

fn field(s: &str) -> Result<&str> {
    if s.contains([',', '\n', '"']) {
        Err(Error::Config(format!("report field {s:?} must not contain commas, quotes or newlines")))
    } else {
        Ok(s)
    }
}

fn comments(provenance: &[(String, String)]) -> String {
    provenance.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

/// CSV text for evaluation rows, preceded by `# key: value` provenance lines.
pub fn report_csv(rows: &[EvalRow], provenance: &[(String, String)]) -> Result<String> {
    let mut out = comments(provenance);
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            field(&r.model)?,
            field(&r.encoding)?,
            field(&r.difficulty)?,
            r.n_trials,
            num(r.auc),
            num(r.auc_se),
            num(r.eer),
            num(r.eer_se),
            r.resamples,
            r.seed,
            r.redraws
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn write_report_csv(rows: &[EvalRow], provenance: &[(String, String)], path: &Path) -> Result<()> {
    fs::write(path, report_csv(rows, provenance)?).map_err(|e| Error::io(path, e))
}

/// A parsed report or sweep table.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Report(Vec<EvalRow>),
    Sweep(Vec<SweepPoint>),
}

/// One row of a sweep table as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub model: String,
    pub window: WindowSize,
    pub n_trials: usize,
    pub short_sides: usize,
    pub auc: f64,
    pub auc_se: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl From<&SweepRow> for SweepPoint {
    fn from(r: &SweepRow) -> Self {
        SweepPoint {
            model: r.scorer.clone(),
            window: r.window,
            n_trials: r.n_trials,
            short_sides: r.short_sides,
            auc: r.auc.mean,
            auc_se: r.auc.standard_error,
            resamples: r.auc.n_resamples(),
            seed: r.auc.seed,
        }
    }
}

pub fn sweep_csv(points: &[SweepPoint], provenance: &[(String, String)]) -> Result<String> {
    let mut out = comments(provenance);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{},{}",
            field(&p.model)?,
            p.window,
            p.n_trials,
            p.short_sides,
            p.auc,
            p.auc_se,
            p.resamples,
            p.seed
        )
        .expect("writing to a String");
    }
    Ok(out)
}

/// CSV for the first/last comparison: one row per scorer and window.
pub fn first_last_csv(result: &FirstLastResult, provenance: &[(String, String)]) -> Result<String> {
    let mut out = comments(provenance);
    writeln!(out, "# k: {}\n# min_len: {}\n# n_trials: {}", result.k, result.min_len, result.n_trials)
        .expect("writing to a String");
    if let Some(note) = &result.note {
        writeln!(out, "# note: {note}").expect("writing to a String");
    }
    out.push_str("model,window,auc,auc_se,resamples,seed\n");
    for r in &result.rows {
        for (name, b) in [("first", &r.first), ("last", &r.last)] {
            writeln!(
                out,
                "{},{name},{:.6},{:.6},{},{}",
                field(&r.scorer)?,
                b.mean,
                b.standard_error,
                b.n_resamples(),
                b.seed
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

/// One pairwise model comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model_a: String,
    pub model_b: String,
    pub metric: String,
    pub result: SignificanceResult,
}

pub fn significance_csv(rows: &[ComparisonRow], provenance: &[(String, String)]) -> Result<String> {
    let mut out = comments(provenance);
    out.push_str("model_a,model_b,metric,test,statistic,p_value,n_pairs,flagged\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6e},{},{}",
            field(&r.model_a)?,
            field(&r.model_b)?,
            r.metric,
            r.result.test,
            r.result.statistic + 0.0,
            r.result.p_value,
            r.result.n_pairs,
            r.result.flagged
        )
        .expect("writing to a String");
    }
    Ok(out)
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Format {
        path: None,
        line: Some(line),
        message: format!("invalid number {s:?}"),
    })
}

fn parse_req<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format {
        path: None,
        line: Some(line),
        message: format!("invalid value {s:?}"),
    })
}

/// Parse a report or sweep CSV written by this module.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::format("empty table"))?;
    match header {
        REPORT_HEADER => {
            let mut rows = Vec::new();
            for (i, l) in lines {
                let f: Vec<&str> = l.split(',').collect();
                let line = i + 1;
                if f.len() != 11 {
                    return Err(Error::Format {
                        path: None,
                        line: Some(line),
                        message: format!("expected 11 fields, found {}", f.len()),
                    });
                }
                rows.push(EvalRow {
                    model: f[0].into(),
                    encoding: f[1].into(),
                    difficulty: f[2].into(),
                    n_trials: parse_req(f[3], line)?,
                    auc: parse_opt(f[4], line)?,
                    auc_se: parse_opt(f[5], line)?,
                    eer: parse_opt(f[6], line)?,
                    eer_se: parse_opt(f[7], line)?,
                    resamples: parse_req(f[8], line)?,
                    seed: parse_req(f[9], line)?,
                    redraws: parse_req(f[10], line)?,
                });
            }
            Ok(Table::Report(rows))
        }
        SWEEP_HEADER => {
            let mut points = Vec::new();
            for (i, l) in lines {
                let f: Vec<&str> = l.split(',').collect();
                let line = i + 1;
                if f.len() != 8 {
                    return Err(Error::Format {
                        path: None,
                        line: Some(line),
                        message: format!("expected 8 fields, found {}", f.len()),
                    });
                }
                points.push(SweepPoint {
                    model: f[0].into(),
                    window: parse_req(f[1], line)?,
                    n_trials: parse_req(f[2], line)?,
                    short_sides: parse_req(f[3], line)?,
                    auc: parse_req(f[4], line)?,
                    auc_se: parse_req(f[5], line)?,
                    resamples: parse_req(f[6], line)?,
                    seed: parse_req(f[7], line)?,
                });
            }
            Ok(Table::Sweep(points))
        }
        other => Err(Error::format(format!("unrecognized table header {other:?}"))),
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text).map_err(|e| e.at_path(path))
}

fn difficulty_rank(d: &str) -> (usize, String) {
    match d.parse::<Difficulty>() {
        Ok(x) => (x as usize, String::new()),
        Err(_) => (usize::MAX, d.to_string()),
    }
}

/// Markdown tables with one row per model and one column per encoding ×
/// difficulty; cells hold the bootstrapped value and its standard error.
pub fn report_markdown(rows: &[EvalRow]) -> String {
    let mut models: Vec<&str> = Vec::new();
    for r in rows {
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
    }
    let mut columns: Vec<(&str, &str)> = rows.iter().map(|r| (r.encoding.as_str(), r.difficulty.as_str())).collect();
    columns.sort_by_key(|&(e, d)| (e.to_string(), difficulty_rank(d)));
    columns.dedup();
    let cells: BTreeMap<(&str, &str, &str), &EvalRow> = rows
        .iter()
        .map(|r| ((r.model.as_str(), r.encoding.as_str(), r.difficulty.as_str()), r))
        .collect();

    let mut out = String::new();
    let metrics: [(&str, fn(&EvalRow) -> (Option<f64>, Option<f64>)); 2] =
        [("AUC", |r| (r.auc, r.auc_se)), ("EER", |r| (r.eer, r.eer_se))];
    for (name, get) in metrics {
        if !rows.iter().any(|r| get(r).0.is_some()) {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        writeln!(out, "**{name}** (bootstrap mean, standard error in parentheses)\n").expect("string");
        out.push_str("| Model |");
        for (e, d) in &columns {
            write!(out, " {e} {d} |").expect("string");
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(columns.len()));
        out.push('\n');
        for m in &models {
            write!(out, "| {m} |").expect("string");
            for (e, d) in &columns {
                match cells.get(&(*m, *e, *d)).map(|r| get(r)) {
                    Some((Some(v), se)) => {
                        write!(out, " {v:.3} ({:.4}) |", se.unwrap_or(0.0)).expect("string");
                    }
                    _ => out.push_str(" – |"),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Markdown table of a sweep: one row per model, one column per window.
pub fn sweep_markdown(points: &[SweepPoint]) -> String {
    let mut windows: Vec<WindowSize> = points.iter().map(|p| p.window).collect();
    windows.sort();
    windows.dedup();
    let mut models: Vec<&str> = Vec::new();
    for p in points {
        if !models.contains(&p.model.as_str()) {
            models.push(&p.model);
        }
    }
    let mut out = String::from("**AUC by utterances per side** (bootstrap mean, standard error in parentheses)\n\n| Model |");
    for w in &windows {
        write!(out, " {w} |").expect("string");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(windows.len()));
    out.push('\n');
    for m in &models {
        write!(out, "| {m} |").expect("string");
        for w in &windows {
            match points.iter().find(|p| p.model == *m && p.window == *w) {
                Some(p) => write!(out, " {:.3} ({:.4}) |", p.auc, p.auc_se).expect("string"),
                None => out.push_str(" – |"),
            }
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static SVG line plot of AUC against utterance count, one line per model.
pub fn sweep_svg(points: &[SweepPoint]) -> String {
    let mut windows: Vec<WindowSize> = points.iter().map(|p| p.window).collect();
    windows.sort();
    windows.dedup();
    let mut models: Vec<&str> = Vec::new();
    for p in points {
        if !models.contains(&p.model.as_str()) {
            models.push(&p.model);
        }
    }
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 160.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let lo = points.iter().map(|p| p.auc - p.auc_se).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.auc + p.auc_se).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() {
        let pad = ((hi - lo) * 0.1).max(0.01);
        ((lo - pad).max(0.0), (hi + pad).min(1.0))
    } else {
        (0.0, 1.0)
    };
    let x = |win: WindowSize| {
        let i = windows.iter().position(|&v| v == win).unwrap_or(0) as f64;
        let n = (windows.len().max(2) - 1) as f64;
        left + pw * i / n
    };
    let y = |v: f64| top + ph * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .expect("string");
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).expect("string");
    writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + ph,
        left + pw,
        top + ph
    )
    .expect("string");
    writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + ph).expect("string");
    for &win in &windows {
        let xv = x(win);
        writeln!(
            s,
            r#"<text x="{xv:.1}" y="{:.1}" text-anchor="middle">{win}</text>"#,
            top + ph + 18.0
        )
        .expect("string");
    }
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            left - 6.0,
            y(v) + 4.0
        )
        .expect("string");
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">utterances per side</text>"#,
        left + pw / 2.0,
        h - 15.0
    )
    .expect("string");
    writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">AUC</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .expect("string");
    for (mi, m) in models.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()];
        let mut series: Vec<&SweepPoint> = points.iter().filter(|p| p.model == *m).collect();
        series.sort_by_key(|p| p.window);
        let path: Vec<String> = series.iter().map(|p| format!("{:.1},{:.1}", x(p.window), y(p.auc))).collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        )
        .expect("string");
        for p in &series {
            let (xv, yv) = (x(p.window), y(p.auc));
            writeln!(
                s,
                r#"<line x1="{xv:.1}" y1="{:.1}" x2="{xv:.1}" y2="{:.1}" stroke="{color}"/>"#,
                y(p.auc - p.auc_se),
                y(p.auc + p.auc_se)
            )
            .expect("string");
            writeln!(s, r#"<circle cx="{xv:.1}" cy="{yv:.1}" r="3" fill="{color}"/>"#).expect("string");
        }
        let ly = top + 10.0 + 18.0 * mi as f64;
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            left + pw + 15.0,
            left + pw + 35.0,
            left + pw + 40.0,
            ly + 4.0,
            escape(m)
        )
        .expect("string");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, diff: &str, auc: f64) -> EvalRow {
        EvalRow {
            model: model.into(),
            encoding: "NormLDC".into(),
            difficulty: diff.into(),
            n_trials: 100,
            auc: Some(auc),
            auc_se: Some(0.01),
            eer: None,
            eer_se: None,
            resamples: 1000,
            seed: 0,
            redraws: 0,
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("tfidf", "base", 0.75), row("tfidf", "hard", 0.66)];
        let text = report_csv(&rows, &[("seed".into(), "0".into())]).unwrap();
        assert!(text.starts_with("# seed: 0\n"));
        assert_eq!(parse_table(&text).unwrap(), Table::Report(rows));
    }

    #[test]
    fn markdown_orders_difficulties() {
        let rows = vec![row("tfidf", "harder", 0.5), row("tfidf", "base", 0.75), row("char4", "hard", 0.6)];
        let md = report_markdown(&rows);
        assert!(md.contains("| Model | NormLDC base | NormLDC hard | NormLDC harder |"));
        assert!(md.contains("| tfidf | 0.750 (0.0100) | – | 0.500 (0.0100) |"));
        assert!(!md.contains("EER"));
    }

    #[test]
    fn rejects_commas_in_names() {
        assert!(report_csv(&[row("a,b", "base", 0.5)], &[]).is_err());
    }

    #[test]
    fn sweep_svg_has_one_line_per_model() {
        let p = |m: &str, w, auc| SweepPoint {
            model: m.into(),
            window: w,
            n_trials: 10,
            short_sides: 0,
            auc,
            auc_se: 0.01,
            resamples: 10,
            seed: 0,
        };
        let pts = vec![
            p("a", WindowSize::Count(25), 0.6),
            p("a", WindowSize::Full, 0.7),
            p("b", WindowSize::Count(25), 0.55),
            p("b", WindowSize::Full, 0.65),
        ];
        let svg = sweep_svg(&pts);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">full</text>"));
        let text = sweep_csv(&pts, &[]).unwrap();
        assert_eq!(parse_table(&text).unwrap(), Table::Sweep(pts));
    }
}
