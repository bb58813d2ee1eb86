//! Self-contained SVG figures. Coordinates are printed with fixed precision
//! so identical input gives byte-identical output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::anyhow;

use ptkr::io as pio;
use ptkr::stats::{goe_surmise, spacing_histogram};
use ptkr::sweep::{read_sweep_csv, SweepRow};

use crate::commands::{sidecar_path, Failure};
use crate::{PlotArgs, PlotKind};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn usage(e: anyhow::Error) -> Failure {
    Failure::Usage(e)
}

pub fn run(args: &PlotArgs, out: Option<&Path>) -> Result<(), Failure> {
    let svg = match args.kind {
        PlotKind::Heatmap => {
            let [input] = args.input.as_slice() else {
                return Err(usage(anyhow!("heatmap takes exactly one sweep CSV")));
            };
            let rows = read_sweep_csv(open(input)?)?;
            heatmap(&rows, args.value.as_deref().unwrap_or("clsr"))?
        }
        PlotKind::OtocLines => {
            let column = args.value.as_deref().unwrap_or("c_norm");
            let mut series = Vec::new();
            for path in &args.input {
                series.push(read_otoc_curve(path, column)?);
            }
            otoc_lines(&series, column)?
        }
        PlotKind::Histogram => {
            let [input] = args.input.as_slice() else {
                return Err(usage(anyhow!("histogram takes exactly one spacing CSV")));
            };
            let spacings = pio::read_column_csv(open(input)?, "s")?;
            histogram(&spacings, args.bins)?
        }
    };
    let result = match out {
        Some(path) => std::fs::write(path, svg.as_bytes()),
        None => std::io::stdout().lock().write_all(svg.as_bytes()),
    };
    result.map_err(|e| Failure::Compute(e.into()))
}

fn open(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::open(path).map_err(|e| usage(anyhow!("opening {}: {e}", path.display())))
}

/// One OTOC curve with a legend label.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn read_otoc_curve(path: &Path, column: &str) -> Result<Curve, Failure> {
    let j = pio::OTOC_COLUMNS
        .iter()
        .position(|c| *c == column && *c != "t")
        .ok_or_else(|| usage(anyhow!("unknown OTOC column '{column}'; expected c_raw, norm or c_norm")))?;
    let rows = pio::read_table(open(path)?, &pio::OTOC_COLUMNS)?;
    let label = match std::fs::read(sidecar_path(path)) {
        Ok(bytes) => {
            let meta: pio::OtocMetadata = pio::read_json(bytes.as_slice())?;
            format!("K={} λ={}", meta.params.kick_strength, meta.params.lambda)
        }
        Err(_) => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    Ok(Curve {
        label,
        points: rows.iter().map(|r| (r[0], r[j])).collect(),
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_width() / 2.0,
        escape(title)
    );
    s
}

fn plot_width() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_height() -> f64 {
    HEIGHT - TOP - BOTTOM
}

/// Maps `[lo, hi]` onto the horizontal plot range.
fn x_map(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    move |v| LEFT + (v - lo) / span * plot_width()
}

/// Maps `[lo, hi]` onto the vertical plot range, upwards.
fn y_map(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    move |v| TOP + plot_height() - (v - lo) / span * plot_height()
}

fn axes(s: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (LEFT, TOP, LEFT + plot_width(), TOP + plot_height());
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn x_tick(s: &mut String, x: f64, label: &str) {
    let y = TOP + plot_height();
    let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y + 5.0);
    let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y + 18.0, escape(label));
}

fn y_tick(s: &mut String, y: f64, label: &str) {
    let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, escape(label));
}

/// Short numeric label.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let t = format!("{v:.3}");
        t.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn viridis(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let c = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Cell boundaries around sorted axis positions.
fn cell_edges(pos: &[f64]) -> Vec<(f64, f64)> {
    if pos.len() == 1 {
        return vec![(pos[0] - 0.5, pos[0] + 0.5)];
    }
    let n = pos.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 {
                pos[0] - 0.5 * (pos[1] - pos[0])
            } else {
                0.5 * (pos[i - 1] + pos[i])
            };
            let hi = if i == n - 1 {
                pos[n - 1] + 0.5 * (pos[n - 1] - pos[n - 2])
            } else {
                0.5 * (pos[i] + pos[i + 1])
            };
            (lo, hi)
        })
        .collect()
}

/// `log10 λ` positions; `λ = 0` sits one grid step left of the smallest
/// positive value.
fn lambda_positions(lambdas: &[f64]) -> Result<Vec<f64>, Failure> {
    if lambdas.iter().any(|l| *l < 0.0) {
        return Err(usage(anyhow!("negative lambda cannot go on a log axis")));
    }
    let logs: Vec<f64> = lambdas.iter().filter(|l| **l > 0.0).map(|l| l.log10()).collect();
    let step = if logs.len() > 1 {
        (logs[logs.len() - 1] - logs[0]) / (logs.len() - 1) as f64
    } else {
        1.0
    };
    let zero = logs.first().map_or(0.0, |l| l - step);
    Ok(lambdas.iter().map(|l| if *l > 0.0 { l.log10() } else { zero }).collect())
}

pub fn heatmap(rows: &[SweepRow], value: &str) -> Result<String, Failure> {
    let pick: fn(&SweepRow) -> Option<f64> = match value {
        "clsr" => |r| r.clsr,
        "neg_cos" => |r| r.neg_cos,
        "alpha" => |r| r.alpha,
        other => return Err(usage(anyhow!("unknown heatmap value '{other}'; expected clsr, neg_cos or alpha"))),
    };
    if rows.is_empty() {
        return Err(usage(anyhow!("sweep table has no records")));
    }
    let ks = unique_sorted(rows.iter().map(|r| r.kick_strength));
    let ls = unique_sorted(rows.iter().map(|r| r.lambda));
    let lpos = lambda_positions(&ls)?;
    let (xe, ye) = (cell_edges(&lpos), cell_edges(&ks));
    let fx = x_map(xe[0].0, xe[xe.len() - 1].1);
    let fy = y_map(ye[0].0, ye[ye.len() - 1].1);
    let finite: Vec<f64> = rows.iter().filter_map(pick).filter(|v| v.is_finite()).collect();
    let vmin = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };

    let mut s = header(&format!("{value} over (K, λ)"));
    for r in rows {
        let i = ks.iter().position(|k| *k == r.kick_strength).unwrap_or(0);
        let j = ls.iter().position(|l| *l == r.lambda).unwrap_or(0);
        let (x0, x1) = (fx(xe[j].0), fx(xe[j].1));
        let (y0, y1) = (fy(ye[i].1), fy(ye[i].0));
        let v = pick(r).filter(|v| v.is_finite());
        let fill = v.map_or_else(|| "#bbbbbb".to_owned(), |v| viridis((v - vmin) / span));
        let shown = v.map_or_else(|| "missing".to_owned(), |v| format!("{v:.6}"));
        let _ = writeln!(
            s,
            r#"<rect class="cell" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>K={} λ={} {value}={shown}</title></rect>"#,
            x1 - x0,
            y1 - y0,
            r.kick_strength,
            r.lambda
        );
    }
    axes(&mut s, "λ (log scale)", "K");
    for (l, p) in ls.iter().zip(&lpos) {
        if *l == 0.0 {
            x_tick(&mut s, fx(*p), "0");
        }
    }
    let positive: Vec<f64> = lpos.iter().zip(&ls).filter(|(_, l)| **l > 0.0).map(|(p, _)| *p).collect();
    if let (Some(lo), Some(hi)) = (positive.first(), positive.last()) {
        for d in (lo.ceil() as i32)..=(hi.floor() as i32) {
            x_tick(&mut s, fx(d as f64), &format!("1e{d}"));
        }
    }
    let every = ks.len().div_ceil(8).max(1);
    for k in ks.iter().step_by(every) {
        y_tick(&mut s, fy(*k), &num(*k));
    }
    // colour bar
    let bx = LEFT + plot_width() + 30.0;
    let steps = 20;
    let h = plot_height() / steps as f64;
    for n in 0..steps {
        let y = TOP + plot_height() - (n + 1) as f64 * h;
        let _ = writeln!(
            s,
            r#"<rect x="{bx:.2}" y="{y:.2}" width="20" height="{h:.2}" fill="{}"/>"#,
            viridis((n as f64 + 0.5) / steps as f64)
        );
    }
    if !finite.is_empty() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bx + 26.0, TOP + plot_height(), num(vmin));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bx + 26.0, TOP + 10.0, num(vmax));
    }
    let _ = writeln!(s, r#"<text x="{bx:.2}" y="{:.2}">{}</text>"#, TOP - 8.0, escape(value));
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn otoc_lines(curves: &[Curve], column: &str) -> Result<String, Failure> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let all: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.points.iter().copied()).filter(|p| positive(p.1)).collect();
    if all.is_empty() {
        return Err(usage(anyhow!("no positive values to draw on a log axis")));
    }
    let tmax = all.iter().map(|p| p.0).fold(0.0, f64::max);
    let lmin = all.iter().map(|p| p.1.log10()).fold(f64::INFINITY, f64::min).floor();
    let mut lmax = all.iter().map(|p| p.1.log10()).fold(f64::NEG_INFINITY, f64::max).ceil();
    if lmax <= lmin {
        lmax = lmin + 1.0;
    }
    let fx = x_map(0.0, tmax.max(1.0));
    let fy = y_map(lmin, lmax);

    let mut s = header(&format!("{column}(t)"));
    axes(&mut s, "t", &format!("{column} (log scale)"));
    let every = ((lmax - lmin) as usize).div_ceil(8).max(1);
    for d in ((lmin as i64)..=(lmax as i64)).step_by(every) {
        y_tick(&mut s, fy(d as f64), &format!("1e{d}"));
    }
    let tstep = (tmax / 8.0).ceil().max(1.0);
    let mut t = 0.0;
    while t <= tmax {
        x_tick(&mut s, fx(t), &num(t));
        t += tstep;
    }
    for (n, c) in curves.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" stroke="{color}" fill="none" stroke-width="1.5">"#);
        // nonpositive values break the line
        for run in c.points.split(|p| !positive(p.1)).filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|p| format!("{:.2},{:.2}", fx(p.0), fy(p.1.log10()))).collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        s.push_str("</g>\n");
        let y = TOP + 12.0 + 16.0 * n as f64;
        let x = LEFT + plot_width() + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            y - 4.0,
            x + 18.0,
            y - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 22.0, escape(&c.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn histogram(spacings: &[f64], bins: usize) -> Result<String, Failure> {
    let h = spacing_histogram(spacings, bins)?;
    let smax = h.edges[h.edges.len() - 1];
    let samples = 200;
    let curve: Vec<(f64, f64)> = (0..=samples)
        .map(|n| {
            let x = smax * n as f64 / samples as f64;
            (x, goe_surmise(x))
        })
        .collect();
    let dmax = h.density.iter().cloned().chain(curve.iter().map(|p| p.1)).fold(0.0, f64::max) * 1.1;
    let fx = x_map(0.0, smax);
    let fy = y_map(0.0, dmax);

    let mut s = header(&format!("spacing distribution ({} spacings)", h.count));
    for (w, d) in h.edges.windows(2).zip(&h.density) {
        let _ = writeln!(
            s,
            r##"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd"/>"##,
            fx(w[0]),
            fy(*d),
            fx(w[1]) - fx(w[0]),
            fy(0.0) - fy(*d)
        );
    }
    let pts: Vec<String> = curve.iter().map(|p| format!("{:.2},{:.2}", fx(p.0), fy(p.1))).collect();
    let _ = writeln!(
        s,
        r##"<polyline class="surmise" points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
        pts.join(" ")
    );
    axes(&mut s, "s", "P(s)");
    for n in 0..=5 {
        let x = smax * n as f64 / 5.0;
        x_tick(&mut s, fx(x), &num(x));
        let y = dmax * n as f64 / 5.0;
        y_tick(&mut s, fy(y), &num(y));
    }
    let x = LEFT + plot_width() + 10.0;
    let _ = writeln!(
        s,
        r##"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="2"/>"##,
        TOP + 8.0,
        x + 18.0,
        TOP + 8.0
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">GOE surmise</text>"#, x + 22.0, TOP + 12.0);
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptkr::sweep::Phase;

    fn row(k: f64, l: f64, clsr: Option<f64>) -> SweepRow {
        SweepRow {
            kick_strength: k,
            lambda: l,
            clsr,
            neg_cos: None,
            alpha: Some(0.0),
            phase: Some(Phase::PtIntegrable),
        }
    }

    #[test]
    fn heatmap_has_one_cell_per_record() {
        let rows: Vec<SweepRow> = [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&k| [0.0, 1e-3, 1e-2, 1e-1].map(|l| row(k, l, if l == 1e-2 { None } else { Some(0.5 + k / 10.0) })))
            .collect();
        let svg = heatmap(&rows, "clsr").unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), rows.len());
        assert!(svg.contains("#bbbbbb"));
        assert!(svg.contains(">1e-2<"));
        assert_eq!(svg, heatmap(&rows, "clsr").unwrap());
        assert!(heatmap(&rows, "bogus").is_err());
    }

    #[test]
    fn lambda_axis_is_logarithmic() {
        let p = lambda_positions(&[0.0, 1e-3, 1e-2, 1e-1]).unwrap();
        assert_eq!(p, vec![-4.0, -3.0, -2.0, -1.0]);
        assert!(lambda_positions(&[-1.0, 1.0]).is_err());
    }

    #[test]
    fn otoc_lines_one_group_per_curve() {
        let curves = vec![
            Curve {
                label: "a".into(),
                points: (0..10).map(|t| (t as f64, (t as f64).exp())).collect(),
            },
            Curve {
                label: "b".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0), (2.0, 10.0), (3.0, 0.0), (4.0, 100.0), (5.0, 1000.0)],
            },
        ];
        let svg = otoc_lines(&curves, "c_norm").unwrap();
        assert_eq!(svg.matches(r#"class="series""#).count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn histogram_overlays_surmise() {
        let s: Vec<f64> = (1..500).map(|i| i as f64 / 250.0).collect();
        let svg = histogram(&s, 20).unwrap();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 20);
        assert_eq!(svg.matches(r#"class="surmise""#).count(), 1);
    }
}
