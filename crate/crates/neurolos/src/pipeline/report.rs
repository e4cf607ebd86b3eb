//! report: Markdown summary, CSV tables and the window/step plot.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use neurolos_core::eval::Metric;
use neurolos_core::{Executor, LosClass};

use super::evaluate::{load_results, read_importance, Family, ImportanceRow, ModelResult};
use super::{Run, Stage};
use crate::io::csv_writer;

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn family(r: &ModelResult) -> &'static str {
    match r.family {
        Family::Classic => "classic",
        Family::Sequence => "sequence",
        Family::Baseline => "baseline",
        Family::Reference => "reference",
    }
}

fn opt(v: Option<usize>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// Importance rows sorted by decreasing mean; ties keep column order.
fn ranked(mut rows: Vec<ImportanceRow>) -> Vec<ImportanceRow> {
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean));
    rows
}

pub(super) fn report<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let dir = run.dir(Stage::Report);
    let results = load_results(&run.root)?;
    let metrics: Vec<Metric> = cfg.eval.metrics.clone();

    let mut w = csv_writer(&dir.join("model_comparison.csv"))?;
    let mut header = vec!["model", "family", "arch", "window", "step", "support"];
    header.extend(metrics.iter().map(|m| m.name()));
    w.write_record(&header)?;
    for r in &results {
        let mut rec = vec![
            r.name.clone(),
            family(r).into(),
            r.arch.clone().unwrap_or_default(),
            opt(r.window),
            opt(r.step),
            r.metrics.confusion.total().to_string(),
        ];
        rec.extend(metrics.iter().map(|m| f(m.of(&r.metrics))));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("per_class.csv"))?;
    w.write_record(["model", "class", "precision", "recall", "f1", "support"])?;
    for r in &results {
        for (c, m) in r.metrics.per_class.iter().enumerate() {
            w.write_record([
                r.name.clone(),
                LosClass::ALL[c].name().into(),
                f(m.precision),
                f(m.recall),
                f(m.f1),
                m.support.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("confusion.csv"))?;
    let mut header = vec!["model".to_string(), "true".into()];
    header.extend(LosClass::ALL.iter().map(|c| format!("pred_{}", c.name())));
    w.write_record(&header)?;
    for r in &results {
        for (c, row) in r.metrics.confusion.counts.iter().enumerate() {
            let mut rec = vec![r.name.clone(), LosClass::ALL[c].name().to_string()];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;

    let imp_dir = run.dir(Stage::Importance);
    let mut importance = Vec::new();
    for r in &results {
        let path = imp_dir.join(format!("{}.csv", r.name));
        if path.is_file() {
            importance.push((r.name.clone(), ranked(read_importance(&path)?)));
        }
    }
    let mut w = csv_writer(&dir.join("importance.csv"))?;
    w.write_record(["model", "rank", "feature", "mean", "std"])?;
    for (name, rows) in &importance {
        for (i, row) in rows.iter().enumerate() {
            w.write_record([
                name.clone(),
                (i + 1).to_string(),
                row.feature.clone(),
                f(row.mean),
                f(row.std),
            ])?;
        }
    }
    w.flush()?;

    let seq: Vec<&ModelResult> = results.iter().filter(|r| r.family == Family::Sequence).collect();
    let mut w = csv_writer(&dir.join("window_grid.csv"))?;
    w.write_record([
        "arch",
        "window",
        "step",
        "accuracy",
        "macro_precision",
        "macro_recall",
        "macro_f1",
        "support",
    ])?;
    for r in &seq {
        let m = &r.metrics;
        w.write_record([
            r.arch.clone().unwrap_or_default(),
            opt(r.window),
            opt(r.step),
            f(m.accuracy),
            f(m.macro_avg.precision),
            f(m.macro_avg.recall),
            f(m.macro_avg.f1),
            m.confusion.total().to_string(),
        ])?;
    }
    w.flush()?;
    if !seq.is_empty() {
        std::fs::write(dir.join("window_grid.svg"), window_plot(&seq))?;
    }

    std::fs::write(
        dir.join("report.md"),
        markdown(&results, &metrics, &importance, !seq.is_empty()),
    )?;
    write_tuning(run, &dir)?;
    log::info!("report: written to {}", dir.display());
    Ok(())
}

fn write_tuning<E: Executor>(run: &Run<'_, E>, dir: &Path) -> Result<()> {
    let mut w = csv_writer(&dir.join("tuning.csv"))?;
    w.write_record(["model", "parameter", "value"])?;
    for block in &run.cfg.models {
        let params = super::train::final_params(&run.root, block)?;
        for (k, v) in &params {
            w.write_record([block.name(), k.clone(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn markdown(
    results: &[ModelResult],
    metrics: &[Metric],
    importance: &[(String, Vec<ImportanceRow>)],
    grid: bool,
) -> String {
    let mut md = String::from("# Length-of-stay benchmark\n\n## Model comparison\n\n| model | family | support |");
    for m in metrics {
        write!(md, " {} |", m.name()).unwrap();
    }
    md.push_str("\n|---|---|---:|");
    md.push_str(&"---:|".repeat(metrics.len()));
    md.push('\n');
    for r in results {
        write!(md, "| {} | {} | {} |", r.name, family(r), r.metrics.confusion.total()).unwrap();
        for m in metrics {
            write!(md, " {:.4} |", m.of(&r.metrics)).unwrap();
        }
        md.push('\n');
    }

    md.push_str("\n## Per-class metrics\n\n| model | class | precision | recall | F1 | support |\n|---|---|---:|---:|---:|---:|\n");
    for r in results
        .iter()
        .filter(|r| matches!(r.family, Family::Classic | Family::Sequence))
    {
        for (c, m) in r.metrics.per_class.iter().enumerate() {
            writeln!(
                md,
                "| {} | {} | {:.4} | {:.4} | {:.4} | {} |",
                r.name,
                LosClass::ALL[c].name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            )
            .unwrap();
        }
    }

    md.push_str("\n## Confusion matrices\n\nRows are true classes, columns predicted classes (short, medium, long).\n");
    for r in results
        .iter()
        .filter(|r| matches!(r.family, Family::Classic | Family::Sequence))
    {
        write!(
            md,
            "\n**{}**\n\n| | short | medium | long |\n|---|---:|---:|---:|\n",
            r.name
        )
        .unwrap();
        for (c, row) in r.metrics.confusion.counts.iter().enumerate() {
            write!(md, "| {} |", LosClass::ALL[c].name()).unwrap();
            for v in row {
                write!(md, " {v} |").unwrap();
            }
            md.push('\n');
        }
    }

    if !importance.is_empty() {
        md.push_str("\n## Permutation importance (top 10)\n");
        for (name, rows) in importance {
            write!(
                md,
                "\n**{name}**\n\n| rank | feature | mean drop | std |\n|---:|---|---:|---:|\n"
            )
            .unwrap();
            for (i, row) in rows.iter().take(10).enumerate() {
                writeln!(md, "| {} | {} | {:.4} | {:.4} |", i + 1, row.feature, row.mean, row.std).unwrap();
            }
        }
    }

    if grid {
        md.push_str("\n## Window and step sizes\n\n| model | window | step | accuracy | macro precision | macro recall | macro F1 |\n|---|---:|---:|---:|---:|---:|---:|\n");
        for r in results.iter().filter(|r| r.family == Family::Sequence) {
            let m = &r.metrics;
            writeln!(
                md,
                "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
                r.arch.as_deref().unwrap_or(""),
                opt(r.window),
                opt(r.step),
                m.accuracy,
                m.macro_avg.precision,
                m.macro_avg.recall,
                m.macro_avg.f1
            )
            .unwrap();
        }
        md.push_str("\n![metrics by window and step](window_grid.svg)\n");
    }
    md
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

/// Accuracy and macro F1 against window size, one line per (arch, step).
fn window_plot(seq: &[&ModelResult]) -> String {
    let mut windows: Vec<usize> = seq.iter().filter_map(|r| r.window).collect();
    windows.sort_unstable();
    windows.dedup();
    let mut series: Vec<(String, usize)> = Vec::new();
    for r in seq {
        let key = (r.arch.clone().unwrap_or_default(), r.step.unwrap_or(0));
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let (pw, ph, margin) = (360.0, 240.0, 50.0);
    let width = 2.0 * (pw + margin) + margin + 160.0;
    let height = ph + 2.0 * margin;
    let x_of = |w: usize| {
        let i = windows.iter().position(|&v| v == w).unwrap_or(0);
        if windows.len() == 1 {
            pw / 2.0
        } else {
            i as f64 * pw / (windows.len() - 1) as f64
        }
    };
    let y_of = |v: f64| ph - v.clamp(0.0, 1.0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    type Panel = (&'static str, fn(&ModelResult) -> f64);
    let panels: [Panel; 2] = [
        ("accuracy", |r| r.metrics.accuracy),
        ("macro F1", |r| r.metrics.macro_avg.f1),
    ];
    for (p, (title, value)) in panels.iter().enumerate() {
        let ox = margin + p as f64 * (pw + margin);
        writeln!(s, r#"<g transform="translate({ox},{margin})">"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="-18" text-anchor="middle" font-size="13">{title}</text>"#,
            pw / 2.0
        )
        .unwrap();
        for t in 0..=5 {
            let v = t as f64 / 5.0;
            let y = y_of(v);
            writeln!(s, r##"<line x1="0" y1="{y}" x2="{pw}" y2="{y}" stroke="#e0e0e0"/>"##).unwrap();
            writeln!(s, r#"<text x="-6" y="{}" text-anchor="end">{v:.1}</text>"#, y + 4.0).unwrap();
        }
        for &w in &windows {
            let x = x_of(w);
            writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{w}</text>"#, ph + 16.0).unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">window size</text>"#,
            pw / 2.0,
            ph + 34.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<rect x="0" y="0" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        for (k, (arch, step)) in series.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let mut pts: Vec<(f64, f64)> = seq
                .iter()
                .filter(|r| r.arch.as_deref() == Some(arch.as_str()) && r.step == Some(*step))
                .map(|r| (x_of(r.window.unwrap_or(0)), y_of(value(r))))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
                path.join(" ")
            )
            .unwrap();
            for (x, y) in &pts {
                writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{colour}"/>"#).unwrap();
            }
        }
        s.push_str("</g>\n");
    }
    let lx = 2.0 * (pw + margin) + margin;
    for (k, (arch, step)) in series.iter().enumerate() {
        let y = margin + 16.0 * k as f64;
        let colour = PALETTE[k % PALETTE.len()];
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{arch}, step {step}</text>"#,
            lx + 24.0,
            y + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use neurolos_core::eval::compute_metrics;

    fn result(arch: &str, window: usize, step: usize) -> ModelResult {
        ModelResult {
            name: format!("{arch}_w{window}_s{step}"),
            family: Family::Sequence,
            arch: Some(arch.into()),
            window: Some(window),
            step: Some(step),
            metrics: compute_metrics(&[0, 1, 2, 1], &[0, 1, 1, 1], 3).unwrap(),
        }
    }

    #[test]
    fn plot_has_a_line_per_series_in_each_panel() {
        let rs = [
            result("lstm", 16, 8),
            result("lstm", 32, 8),
            result("encoder", 16, 8),
            result("encoder", 32, 8),
        ];
        let refs: Vec<&ModelResult> = rs.iter().collect();
        let svg = window_plot(&refs);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches("<circle").count(), 8);
    }

    #[test]
    fn importance_ranks_by_mean_then_column_order() {
        let row = |f: &str, m: f64| ImportanceRow {
            feature: f.into(),
            mean: m,
            std: 0.0,
        };
        let r = ranked(vec![row("a", 0.1), row("b", 0.3), row("c", 0.1)]);
        let names: Vec<&str> = r.iter().map(|r| r.feature.as_str()).collect();
        assert_eq!(names, ["b", "a", "c"]);
    }
}
