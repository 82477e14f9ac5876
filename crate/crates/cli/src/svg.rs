//! Minimal SVG plotting: axes, polylines, polygons and straight lines are
//! all the experiment figures need.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

enum Item {
    Polyline { points: Vec<(f64, f64)>, color: usize, marker: bool },
    Polygon { points: Vec<(f64, f64)>, color: usize },
    Line { a: (f64, f64), b: (f64, f64), color: usize, dashed: bool },
}

pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    items: Vec<Item>,
    legend: Vec<(usize, String)>,
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Self {
            title: title.to_string(),
            xlabel: xlabel.to_string(),
            ylabel: ylabel.to_string(),
            items: Vec::new(),
            legend: Vec::new(),
        }
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], label: &str) -> &mut Self {
        let color = self.next_color();
        if !label.is_empty() {
            self.legend.push((color, label.to_string()));
        }
        self.items.push(Item::Polyline { points: points.to_vec(), color, marker: true });
        self
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], label: &str) -> &mut Self {
        let color = self.next_color();
        if !label.is_empty() {
            self.legend.push((color, label.to_string()));
        }
        self.items.push(Item::Polygon { points: points.to_vec(), color });
        self
    }

    /// Straight overlay line through two points (e.g. a strip boundary).
    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), label: &str) -> &mut Self {
        let color = self.next_color();
        if !label.is_empty() {
            self.legend.push((color, label.to_string()));
        }
        self.items.push(Item::Line { a, b, color, dashed: true });
        self
    }

    fn next_color(&self) -> usize {
        self.items.len() % COLORS.len()
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut take = |p: (f64, f64)| {
            if p.0.is_finite() && p.1.is_finite() {
                b.0 = b.0.min(p.0);
                b.1 = b.1.max(p.0);
                b.2 = b.2.min(p.1);
                b.3 = b.3.max(p.1);
            }
        };
        for item in &self.items {
            match item {
                Item::Polyline { points, .. } | Item::Polygon { points, .. } => {
                    points.iter().for_each(|&p| take(p))
                }
                Item::Line { a, b: q, .. } => {
                    take(*a);
                    take(*q);
                }
            }
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).abs().max(1e-12 * (lo.abs() + hi.abs()).max(1.0));
            (lo - 0.08 * span, hi + 0.08 * span)
        };
        let (x0, x1) = pad(b.0, b.1);
        let (y0, y1) = pad(b.2, b.3);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
        let map = |p: (f64, f64)| {
            (MARGIN + (p.0 - x0) * sx, HEIGHT - MARGIN - (p.1 - y0) * sy)
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            WIDTH / 2.0,
            xml_escape(&self.title)
        );
        // Axes with ticks.
        let _ = writeln!(
            s,
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x0 + t * (x1 - x0);
            let yv = y0 + t * (y1 - y0);
            let (px, _) = map((xv, y0));
            let (_, py) = map((x0, yv));
            let _ = writeln!(
                s,
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>",
                HEIGHT - MARGIN,
                HEIGHT - MARGIN + 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
                HEIGHT - MARGIN + 18.0,
                format_tick(xv)
            );
            let _ = writeln!(
                s,
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{MARGIN}\" y2=\"{py}\" stroke=\"black\"/>",
                MARGIN - 5.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>",
                MARGIN - 8.0,
                py + 4.0,
                format_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
            WIDTH / 2.0,
            HEIGHT - 12.0,
            xml_escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>",
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            xml_escape(&self.ylabel)
        );

        for item in &self.items {
            match item {
                Item::Polyline { points, color, marker } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|&p| {
                            let (x, y) = map(p);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                        pts.join(" "),
                        COLORS[*color]
                    );
                    if *marker {
                        for &p in points {
                            let (x, y) = map(p);
                            let _ = writeln!(
                                s,
                                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>",
                                COLORS[*color]
                            );
                        }
                    }
                }
                Item::Polygon { points, color } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|&p| {
                            let (x, y) = map(p);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.25\" stroke=\"{}\"/>",
                        pts.join(" "),
                        COLORS[*color],
                        COLORS[*color]
                    );
                }
                Item::Line { a, b, color, dashed } => {
                    let (x1p, y1p) = map(*a);
                    let (x2p, y2p) = map(*b);
                    let dash = if *dashed { " stroke-dasharray=\"6 4\"" } else { "" };
                    let _ = writeln!(
                        s,
                        "<line x1=\"{x1p:.2}\" y1=\"{y1p:.2}\" x2=\"{x2p:.2}\" y2=\"{y2p:.2}\" stroke=\"{}\"{dash}/>",
                        COLORS[*color]
                    );
                }
            }
        }
        for (i, (color, label)) in self.legend.iter().enumerate() {
            let y = MARGIN + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{}\"/>",
                WIDTH - MARGIN - 150.0,
                y - 4.0,
                COLORS[*color]
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{y}\" font-size=\"11\">{}</text>",
                WIDTH - MARGIN - 132.0,
                xml_escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.render())
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
