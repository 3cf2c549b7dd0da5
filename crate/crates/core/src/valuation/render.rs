//! Text, CSV and SVG output for grids and histograms. Every format starts
//! with a metadata comment; output is a pure function of the input.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{GridScale, GridSource, HeatmapGrid, Histogram, HISTOGRAM_RANGE};
use crate::board::Square;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Csv,
    Svg,
}

impl RenderFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RenderFormat::Text => "txt",
            RenderFormat::Csv => "csv",
            RenderFormat::Svg => "svg",
        }
    }
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(RenderFormat::Text),
            "csv" => Ok(RenderFormat::Csv),
            "svg" => Ok(RenderFormat::Svg),
            _ => Err(format!("unknown format '{s}' (expected text, csv or svg)")),
        }
    }
}

const FILES: &str = "abcdefgh";

fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn grid_meta(g: &HeatmapGrid) -> String {
    let source = match g.source {
        GridSource::Empirical => "empirical",
        GridSource::Model => "model",
    };
    let scale = match g.scale {
        GridScale::Pawns => "pawns",
        GridScale::WinProbability => "winprob",
    };
    format!(
        "squareval heatmap source={source} color={} piece={} scale={scale} examples={} model={}",
        g.color,
        g.piece,
        g.examples,
        g.model_hash.as_deref().unwrap_or("none")
    )
}

fn histogram_meta(h: &Histogram) -> String {
    format!(
        "squareval histogram color={} piece={} square={} n={} bin_width={} range=[{},{}]",
        h.state.color,
        h.state.piece,
        h.state.square,
        h.n,
        h.bin_width(),
        -HISTOGRAM_RANGE,
        HISTOGRAM_RANGE
    )
}

pub fn render_heatmap(g: &HeatmapGrid, format: RenderFormat) -> String {
    match format {
        RenderFormat::Text => heatmap_text(g),
        RenderFormat::Csv => heatmap_csv(g),
        RenderFormat::Svg => heatmap_svg(g),
    }
}

pub fn render_histogram(h: &Histogram, format: RenderFormat) -> String {
    match format {
        RenderFormat::Text => histogram_text(h),
        RenderFormat::Csv => histogram_csv(h),
        RenderFormat::Svg => histogram_svg(h),
    }
}

fn heatmap_text(g: &HeatmapGrid) -> String {
    let mut out = format!("# {}\n  ", grid_meta(g));
    for f in FILES.chars() {
        let _ = write!(out, "{f:>8}");
    }
    out.push('\n');
    for rank in (0..8u8).rev() {
        let _ = write!(out, "{} ", rank + 1);
        for file in 0..8u8 {
            let cell = g.value(Square::new(file, rank)).map_or_else(|| ".".to_string(), fmt3);
            let _ = write!(out, "{cell:>8}");
        }
        out.push('\n');
    }
    out
}

fn heatmap_csv(g: &HeatmapGrid) -> String {
    let mut out = format!("# {}\nrank,a,b,c,d,e,f,g,h\n", grid_meta(g));
    for rank in (0..8u8).rev() {
        let _ = write!(out, "{}", rank + 1);
        for file in 0..8u8 {
            out.push(',');
            if let Some(v) = g.value(Square::new(file, rank)) {
                out.push_str(&fmt3(v));
            }
        }
        out.push('\n');
    }
    out
}

/// Reads the cell values back from [`render_heatmap`]'s CSV output.
pub fn parse_heatmap_csv(text: &str) -> Result<[Option<f64>; 64], String> {
    let mut rows = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match rows.next() {
        Some(h) if h.trim() == "rank,a,b,c,d,e,f,g,h" => {}
        other => return Err(format!("expected header 'rank,a,b,c,d,e,f,g,h', found {other:?}")),
    }
    let mut values = [None; 64];
    let mut seen = [false; 8];
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("row '{row}' has {} fields, expected 9", fields.len()));
        }
        let rank: u8 = match fields[0].trim().parse() {
            Ok(r @ 1..=8) => r,
            _ => return Err(format!("invalid rank label '{}'", fields[0])),
        };
        if std::mem::replace(&mut seen[usize::from(rank - 1)], true) {
            return Err(format!("rank {rank} appears twice"));
        }
        for (file, field) in fields[1..].iter().enumerate() {
            let field = field.trim();
            if !field.is_empty() {
                let v: f64 = field.parse().map_err(|_| format!("invalid value '{field}'"))?;
                values[Square::new(file as u8, rank - 1).index()] = Some(v);
            }
        }
    }
    if seen.contains(&false) {
        return Err("expected 8 rank rows".into());
    }
    Ok(values)
}

/// Blue below the centre, red above, white at the centre; `t` in [-1, 1].
fn diverging(t: f64) -> String {
    const NEG: [f64; 3] = [49.0, 54.0, 149.0];
    const MID: [f64; 3] = [247.0, 247.0, 247.0];
    const POS: [f64; 3] = [165.0, 0.0, 38.0];
    let t = t.clamp(-1.0, 1.0);
    let end = if t < 0.0 { NEG } else { POS };
    let a = t.abs();
    let c: Vec<u8> = (0..3).map(|i| (MID[i] + (end[i] - MID[i]) * a).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn svg_header(out: &mut String, width: u32, height: u32, meta: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, "<!-- {meta} -->");
    let _ = writeln!(out, "<metadata>{meta}</metadata>");
}

const CELL: u32 = 56;
const MARGIN: u32 = 28;

fn heatmap_svg(g: &HeatmapGrid) -> String {
    let center = g.scale.center();
    let spread = g.present().map(|(_, v)| (v - center).abs()).fold(0.0, f64::max);
    let spread = if spread > 0.0 {
        spread
    } else {
        match g.scale {
            GridScale::Pawns => 1.0,
            GridScale::WinProbability => 0.5,
        }
    };
    let board = 8 * CELL;
    let legend_top = MARGIN + board + 24;
    let (width, height) = (MARGIN * 2 + board, legend_top + 48);
    let mut out = String::new();
    svg_header(&mut out, width, height, &grid_meta(g));
    out.push_str(concat!(
        r#"<defs><pattern id="absent" patternUnits="userSpaceOnUse" width="8" height="8" patternTransform="rotate(45)">"#,
        r##"<rect width="8" height="8" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="8" stroke="#9a9a9a" stroke-width="2"/>"##,
        "</pattern></defs>\n"
    ));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" font-size="14" text-anchor="middle">{} {} ({})</text>"#,
        width / 2,
        g.color,
        g.piece,
        match g.scale {
            GridScale::Pawns => "pawns",
            GridScale::WinProbability => "win probability",
        }
    );
    for rank in (0..8u8).rev() {
        let y = MARGIN + u32::from(7 - rank) * CELL;
        for file in 0..8u8 {
            let x = MARGIN + u32::from(file) * CELL;
            let sq = Square::new(file, rank);
            match g.value(sq) {
                Some(v) => {
                    let fill = diverging((v - center) / spread);
                    let ink = if ((v - center) / spread).abs() > 0.6 { "#ffffff" } else { "#000000" };
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#444444" stroke-width="0.5"><title>{sq} {}</title></rect>"##,
                        fmt3(v)
                    );
                    let _ = writeln!(
                        out,
                        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" fill="{ink}">{}</text>"#,
                        x + CELL / 2,
                        y + CELL / 2 + 4,
                        fmt3(v)
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="url(#absent)" stroke="#444444" stroke-width="0.5"><title>{sq} no data</title></rect>"##
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            MARGIN / 2,
            y + CELL / 2 + 4,
            rank + 1
        );
    }
    for (file, name) in FILES.chars().enumerate() {
        let x = MARGIN + file as u32 * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="middle">{name}</text>"#,
            MARGIN + board + 16
        );
    }
    const SWATCHES: u32 = 11;
    let swatch = board / SWATCHES;
    for i in 0..SWATCHES {
        let t = -1.0 + 2.0 * f64::from(i) / f64::from(SWATCHES - 1);
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{legend_top}" width="{swatch}" height="14" fill="{}" stroke="#444444" stroke-width="0.5"/>"##,
            MARGIN + i * swatch,
            diverging(t)
        );
    }
    let label_y = legend_top + 30;
    let right = MARGIN + SWATCHES * swatch;
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{label_y}" font-size="11" text-anchor="start">{}</text>"#,
        fmt3(center - spread)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{label_y}" font-size="11" text-anchor="middle">{}</text>"#,
        (MARGIN + right) / 2,
        fmt3(center)
    );
    let _ = writeln!(
        out,
        r#"<text x="{right}" y="{label_y}" font-size="11" text-anchor="end">{}</text>"#,
        fmt3(center + spread)
    );
    out.push_str("</svg>\n");
    out
}

fn histogram_text(h: &Histogram) -> String {
    let mut out = format!("# {}\n", histogram_meta(h));
    let peak = h.counts.iter().copied().max().unwrap_or(0);
    if peak == 0 {
        out.push_str("(no data)\n");
        return out;
    }
    for (i, &count) in h.counts.iter().enumerate().filter(|c| *c.1 > 0) {
        let bar = "#".repeat(((count * 40).div_ceil(peak)) as usize);
        let _ = writeln!(out, "[{:>7}, {:>7}) {count:>7} {bar}", fmt3(h.bin_edges[i]), fmt3(h.bin_edges[i + 1]));
    }
    out
}

fn histogram_csv(h: &Histogram) -> String {
    let mut out = format!("# {}\nlower,upper,count\n", histogram_meta(h));
    for (i, count) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{count}", fmt3(h.bin_edges[i]), fmt3(h.bin_edges[i + 1]));
    }
    out
}

fn histogram_svg(h: &Histogram) -> String {
    let (plot_w, plot_h) = (640u32, 240u32);
    let (left, top) = (48u32, 32u32);
    let (width, height) = (left + plot_w + 16, top + plot_h + 40);
    let mut out = String::new();
    svg_header(&mut out, width, height, &histogram_meta(h));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" font-size="14" text-anchor="middle">{} {} on {} (n = {})</text>"#,
        width / 2,
        h.state.color,
        h.state.piece,
        h.state.square,
        h.n
    );
    let lo = h.bin_edges[0];
    let hi = *h.bin_edges.last().expect("at least two edges");
    let x_of = |v: f64| f64::from(left) + (v - lo) / (hi - lo) * f64::from(plot_w);
    let peak = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let base = f64::from(top + plot_h);
    for (i, &count) in h.counts.iter().enumerate().filter(|c| *c.1 > 0) {
        let x0 = x_of(h.bin_edges[i]);
        let x1 = x_of(h.bin_edges[i + 1]);
        let bar = count as f64 / peak * f64::from(plot_h);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{bar:.2}" fill="#3b6fb6"><title>[{}, {}) {count}</title></rect>"##,
            base - bar,
            x1 - x0,
            fmt3(h.bin_edges[i]),
            fmt3(h.bin_edges[i + 1])
        );
    }
    let _ = writeln!(out, r##"<line x1="{left}" y1="{base}" x2="{}" y2="{base}" stroke="#000000"/>"##, left + plot_w);
    let _ = writeln!(out, r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{base}" stroke="#000000"/>"##);
    for tick in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let x = x_of(tick);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{}" stroke="#000000"/>"##, base + 5.0);
        let _ =
            writeln!(out, r#"<text x="{x:.2}" y="{}" font-size="11" text-anchor="middle">{tick}</text>"#, base + 18.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">advantage (pawns)</text>"#,
        left + plot_w / 2,
        base + 34.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
        left - 4,
        top + 4,
        peak as u64
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Color, PieceKind, PieceState};
    use crate::dataset::LabeledExample;
    use crate::model::ModelParams;
    use crate::valuation::{empirical_heatmap, model_heatmap, square_histogram, winprob_grid};

    fn sample_grid() -> HeatmapGrid {
        let examples: Vec<LabeledExample> =
            [("f5", 0.5), ("f5", 0.7), ("a1", -1.23456), ("h8", 0.0004), ("d4", -0.0004)]
                .iter()
                .map(|&(sq, t)| LabeledExample {
                    state: PieceState { color: Color::White, piece: PieceKind::Knight, square: sq.parse().unwrap() },
                    target_pawns: t,
                    game_id: 1,
                    ply: 1,
                })
                .collect();
        empirical_heatmap(&examples, Color::White, PieceKind::Knight)
    }

    #[test]
    fn text_layout() {
        let text = render_heatmap(&sample_grid(), RenderFormat::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# squareval heatmap source=empirical color=white piece=knight"));
        assert_eq!(lines.len(), 10);
        assert!(lines[2].starts_with("8 "));
        assert!(lines[2].ends_with("   0.000"));
        assert!(lines[9].starts_with("1   -1.235"));
        assert!(lines[5].contains("0.600"));
        assert!(!text.contains("-0.000"));
    }

    #[test]
    fn csv_round_trip() {
        let g = sample_grid();
        let csv = render_heatmap(&g, RenderFormat::Csv);
        assert_eq!(csv.lines().nth(1), Some("rank,a,b,c,d,e,f,g,h"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 9);
        let back = parse_heatmap_csv(&csv).unwrap();
        for sq in Square::all() {
            match (g.value(sq), back[sq.index()]) {
                (None, None) => {}
                (Some(a), Some(b)) => assert!((a - b).abs() <= 5e-4, "{sq}: {a} vs {b}"),
                other => panic!("{sq}: {other:?}"),
            }
        }
        assert!(parse_heatmap_csv("rank,a\n").is_err());
    }

    #[test]
    fn all_absent_grid() {
        let g = empirical_heatmap(&[], Color::Black, PieceKind::Queen);
        let csv = render_heatmap(&g, RenderFormat::Csv);
        assert!(csv.lines().skip(2).all(|l| l.ends_with(",,,,,,,")));
        assert!(parse_heatmap_csv(&csv).unwrap().iter().all(Option::is_none));
        let svg = render_heatmap(&g, RenderFormat::Svg);
        assert_eq!(svg.matches(r#"fill="url(#absent)""#).count(), 64);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn svg_structure_and_determinism() {
        let mut g = sample_grid();
        g.model_hash = Some("abc123".into());
        let svg = render_heatmap(&g, RenderFormat::Svg);
        assert_eq!(svg, render_heatmap(&g.clone(), RenderFormat::Svg));
        assert_eq!(svg.matches("<title>").count(), 64);
        assert_eq!(svg.matches(r#"fill="url(#absent)""#).count(), 60);
        assert!(svg.contains("model=abc123"));
        assert!(svg.contains("examples=5"));
        // Legend runs from blue through white to red.
        assert!(svg.contains(&diverging(-1.0)) && svg.contains(&diverging(1.0)) && svg.contains("#f7f7f7"));

        let mut params = ModelParams::zeros();
        params.set_output_bias(0.2);
        let w = winprob_grid(&model_heatmap(&params, Color::White, PieceKind::Pawn).unwrap());
        let svg = render_heatmap(&w, RenderFormat::Svg);
        assert!(svg.contains("scale=winprob"));
        assert!(svg.contains(">0.500<"), "legend centred on one half");
    }

    #[test]
    fn palette() {
        assert_eq!(diverging(0.0), "#f7f7f7");
        assert_eq!(diverging(-1.0), "#313695");
        assert_eq!(diverging(1.0), "#a50026");
        assert_eq!(diverging(7.0), diverging(1.0));
    }

    #[test]
    fn histogram_outputs() {
        let state = PieceState { color: Color::White, piece: PieceKind::Knight, square: "f5".parse().unwrap() };
        let examples: Vec<LabeledExample> =
            [0.1, 0.1, 0.3].iter().map(|&t| LabeledExample { state, target_pawns: t, game_id: 0, ply: 0 }).collect();
        let h = square_histogram(&examples, state, 0.25).unwrap();
        let text = render_histogram(&h, RenderFormat::Text);
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("[  0.000,   0.250)       2"));
        assert!(text.contains("[  0.250,   0.500)       1"));
        let csv = render_histogram(&h, RenderFormat::Csv);
        assert_eq!(csv.lines().count(), 2 + 80);
        let svg = render_histogram(&h, RenderFormat::Svg);
        assert_eq!(svg, render_histogram(&h, RenderFormat::Svg));
        assert!(svg.contains("square=f5 n=3 bin_width=0.25"));
        let empty = square_histogram(&[], state, 0.25).unwrap();
        assert!(render_histogram(&empty, RenderFormat::Text).contains("(no data)"));
    }

    #[test]
    fn format_names() {
        assert_eq!("SVG".parse::<RenderFormat>(), Ok(RenderFormat::Svg));
        assert_eq!("txt".parse::<RenderFormat>(), Ok(RenderFormat::Text));
        assert!("png".parse::<RenderFormat>().is_err());
    }
}
