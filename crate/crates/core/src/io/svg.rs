//! Self-contained SVG charts built from rectangles and text.

use std::fmt::Write;

use crate::simdec::Decomposition;
use crate::types::SensitivityReport;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#FFFFFF\"/>\n"
    )
}

/// Horizontal bars of combined indices, largest first.
pub fn combined_bar_chart(report: &SensitivityReport) -> String {
    let k = report.n_inputs();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| report.combined[b].total_cmp(&report.combined[a]));
    let (label_w, plot_w, row_h, top): (f64, f64, f64, f64) = (140.0, 420.0, 26.0, 40.0);
    let width = label_w + plot_w + 80.0;
    let height = top + row_h * k as f64 + 40.0;
    let lo = report.combined.iter().cloned().fold(0.0f64, f64::min);
    let hi = report
        .combined
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(lo + 1e-9);
    let x_of = |v: f64| label_w + (v - lo) / (hi - lo) * plot_w;
    let mut s = open(width, height);
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"22\" {FONT} font-weight=\"bold\">Combined sensitivity indices</text>",
        label_w
    );
    for (row, &i) in order.iter().enumerate() {
        let y = top + row as f64 * row_h;
        let v = report.combined[i];
        let (x0, x1) = (x_of(0.0_f64.min(v)), x_of(0.0_f64.max(v)));
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" {FONT} text-anchor=\"end\">{}</text>",
            label_w - 8.0,
            y + row_h * 0.65,
            escape(&report.names[i])
        );
        let _ = writeln!(
            s,
            "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#0008B1\"/>",
            y + 4.0,
            x1 - x0,
            row_h - 8.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" {FONT}>{:.3}</text>",
            x1 + 6.0,
            y + row_h * 0.65,
            v
        );
    }
    let zero = x_of(0.0);
    let _ = writeln!(
        s,
        "<line x1=\"{zero:.2}\" y1=\"{:.2}\" x2=\"{zero:.2}\" y2=\"{:.2}\" stroke=\"#000000\"/>",
        top - 4.0,
        top + row_h * k as f64 + 4.0
    );
    s.push_str("</svg>\n");
    s
}

/// Output histogram with one stacked layer per scenario and a legend of
/// scenario colours and state labels.
pub fn stacked_histogram(d: &Decomposition, output_label: &str) -> String {
    let h = &d.histogram;
    let (left, top, plot_w, plot_h): (f64, f64, f64, f64) = (60.0, 40.0, 560.0, 320.0);
    let legend_x = left + plot_w + 30.0;
    let legend_row = 18.0;
    let width = legend_x + 260.0;
    let height = (top + plot_h + 50.0).max(top + legend_row * (d.scenarios.len() as f64 + 2.0));
    let totals = h.totals();
    let peak = totals.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar_w = plot_w / h.n_bins() as f64;
    let mut s = open(width, height);
    let _ = writeln!(
        s,
        "<text x=\"{left:.2}\" y=\"22\" {FONT} font-weight=\"bold\">Decomposition of {}</text>",
        escape(output_label)
    );
    for b in 0..h.n_bins() {
        let x = left + b as f64 * bar_w;
        let mut base = 0u64;
        for (sc, counts) in d.scenarios.iter().zip(&h.counts) {
            let c = counts[b];
            if c == 0 {
                continue;
            }
            let y1 = top + plot_h - base as f64 / peak * plot_h;
            let y0 = top + plot_h - (base + c) as f64 / peak * plot_h;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y0:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                y1 - y0,
                sc.color
            );
            base += c;
        }
    }
    let axis_y = top + plot_h;
    let _ = writeln!(
        s,
        "<line x1=\"{left:.2}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"#000000\"/>",
        left + plot_w
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left:.2}\" y1=\"{top:.2}\" x2=\"{left:.2}\" y2=\"{axis_y:.2}\" stroke=\"#000000\"/>"
    );
    let n = h.edges.len() - 1;
    for (frac, v) in [
        (0.0, h.edges[0]),
        (0.5, 0.5 * (h.edges[0] + h.edges[n])),
        (1.0, h.edges[n]),
    ] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" {FONT} text-anchor=\"middle\">{}</text>",
            left + frac * plot_w,
            axis_y + 16.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" {FONT} text-anchor=\"end\">{}</text>",
        left - 6.0,
        top + 10.0,
        peak as u64
    );
    let _ = writeln!(
        s,
        "<text x=\"{legend_x:.2}\" y=\"{:.2}\" {FONT} font-weight=\"bold\">{}</text>",
        top,
        escape(&d.inputs.join(" / "))
    );
    for (r, sc) in d.scenarios.iter().enumerate() {
        let y = top + (r as f64 + 1.0) * legend_row;
        let _ = writeln!(
            s,
            "<rect x=\"{legend_x:.2}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{}\"/>",
            y - 10.0,
            sc.color
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{y:.2}\" {FONT}>sc{}: {} ({:.1}%)</text>",
            legend_x + 18.0,
            sc.id,
            escape(&sc.state_labels.join(", ")),
            100.0 * sc.probability
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simdec::{decompose, State, StateDefinition};
    use crate::types::{Dataset, InputSpec, Matrix};

    fn decomposition() -> Decomposition {
        let x: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let ds = Dataset::new(
            Matrix::from_columns(&[x]).unwrap(),
            y,
            vec![InputSpec::uniform("a<b", 0.0, 1.0)],
        )
        .unwrap();
        let def = StateDefinition {
            input: "a<b".into(),
            states: vec![
                State::range("low", 0.0, 0.5),
                State::range("high", 0.5, 1.0),
            ],
        };
        decompose(&ds, &[def], 20).unwrap()
    }

    #[test]
    fn histogram_is_well_formed_and_deterministic() {
        let d = decomposition();
        let a = stacked_histogram(&d, "Y");
        assert_eq!(a, stacked_histogram(&d, "Y"));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;b"));
        assert!(a.contains(&d.scenarios[1].color));
        assert!(a.contains("sc2: high"));
    }

    #[test]
    fn bar_chart_lists_every_input() {
        let r = SensitivityReport {
            names: vec!["p".into(), "q".into()],
            first_order: vec![0.6, -0.01],
            second_order: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            combined: vec![0.6, -0.01],
            var_y: 1.0,
            n_bins_first: 10,
            n_bins_second_per_dim: 3,
            warnings: vec![],
        };
        let svg = combined_bar_chart(&r);
        assert!(svg.contains(">p</text>") && svg.contains(">q</text>"));
        assert!(svg.contains("-0.010"));
        assert_eq!(svg.matches("<rect").count(), 3);
    }
}
