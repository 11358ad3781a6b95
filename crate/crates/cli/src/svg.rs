//! Deterministic SVG figures: pattern scatters, orientation arrows, and
//! detection overlays.

use texplane::detect::MaximaSet;
use texplane::geometry::{ObservationWindow, Point2};
use texplane::imaging::ProbabilityMap;
use texplane::simulate::PointPattern;

const CANVAS_W: f64 = 800.0;

/// Window-to-canvas mapping: the window fills an 800-wide canvas of matching
/// aspect ratio with the vertical axis flipped to image convention.
struct Canvas {
    window: ObservationWindow,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(window: ObservationWindow) -> Self {
        let aspect = window.width() / window.height();
        Self {
            window,
            width: CANVAS_W,
            height: (CANVAS_W / aspect).round(),
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        let x = (p[0] - self.window.a1) / self.window.width() * self.width;
        let y = (self.window.b2 - p[1]) / self.window.height() * self.height;
        (x, y)
    }

    fn open(&self, extra: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
             viewBox=\"0 0 {:.0} {:.0}\">\n\
             <!-- window [{}, {}] x [{}, {}] mapped to the canvas with the \
             vertical axis flipped (window x2 up, canvas y down) -->\n{extra}\
             <rect x=\"0\" y=\"0\" width=\"{:.0}\" height=\"{:.0}\" fill=\"white\" \
             stroke=\"black\" stroke-width=\"1\"/>\n",
            self.width,
            self.height,
            self.width,
            self.height,
            fmt(self.window.a1),
            fmt(self.window.a2),
            fmt(self.window.b1),
            fmt(self.window.b2),
            self.width,
            self.height,
        )
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

/// Scatter plot of a point pattern.
pub fn scatter(pattern: &PointPattern) -> String {
    let canvas = Canvas::new(*pattern.window());
    let mut out = canvas.open("");
    for &p in pattern.points() {
        let (x, y) = canvas.map(p);
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>\n",
            fmt(x),
            fmt(y)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot plus the projected surface normal: an arrow from the window
/// center along the tilt direction with length proportional to `sin(eta1)`.
pub fn orientation(pattern: &PointPattern, eta1: f64, eta2: f64) -> String {
    let canvas = Canvas::new(*pattern.window());
    let marker = "<defs><marker id=\"tip\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" \
                  markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">\
                  <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"crimson\"/></marker></defs>\n";
    let mut out = canvas.open(marker);
    for &p in pattern.points() {
        let (x, y) = canvas.map(p);
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\" fill-opacity=\"0.6\"/>\n",
            fmt(x),
            fmt(y)
        ));
    }
    let w = pattern.window();
    let center = w.center();
    let reach = 0.45 * w.width().min(w.height());
    let tip = [
        center[0] + reach * eta1.sin() * eta2.cos(),
        center[1] + reach * eta1.sin() * eta2.sin(),
    ];
    let (x1, y1) = canvas.map(center);
    let (x2, y2) = canvas.map(tip);
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"crimson\" \
         stroke-width=\"4\" marker-end=\"url(#tip)\"/>\n",
        fmt(x1),
        fmt(y1),
        fmt(x2),
        fmt(y2)
    ));
    out.push_str("</svg>\n");
    out
}

/// Detection overlay: all windowed maxima, the neighbourhood edges inside
/// components, and the chosen representatives.
pub fn detect_overlay(
    map: &ProbabilityMap,
    maxima: &MaximaSet,
    comps: &[Vec<usize>],
    pattern: &PointPattern,
) -> String {
    let canvas = Canvas::new(*map.window());
    let mut out = canvas.open("");
    for comp in comps {
        for pair in comp.windows(2) {
            let a = &maxima.maxima[pair[0]];
            let b = &maxima.maxima[pair[1]];
            let (x1, y1) = canvas.map(map.pixel_to_window(a.col as f64, a.row as f64));
            let (x2, y2) = canvas.map(map.pixel_to_window(b.col as f64, b.row as f64));
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"steelblue\" \
                 stroke-width=\"1\"/>\n",
                fmt(x1),
                fmt(y1),
                fmt(x2),
                fmt(y2)
            ));
        }
    }
    for m in &maxima.maxima {
        let (x, y) = canvas.map(map.pixel_to_window(m.col as f64, m.row as f64));
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"steelblue\"/>\n",
            fmt(x),
            fmt(y)
        ));
    }
    for &p in pattern.points() {
        let (x, y) = canvas.map(p);
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"none\" stroke=\"crimson\" \
             stroke-width=\"2\"/>\n",
            fmt(x),
            fmt(y)
        ));
    }
    out.push_str("</svg>\n");
    out
}
