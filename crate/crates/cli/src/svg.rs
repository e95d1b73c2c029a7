//! Self-contained polyline plots: axes, ticks, legend, nothing external.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#444444", "#c02d2d", "#2d62c0", "#2d9a44", "#b07c1e", "#7a3fb5", "#c04d9a", "#1e9a9a",
];

const W: f64 = 860.0;
const H: f64 = 560.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 58.0;

/// One plot, all series over common axes scaled to the joint data range.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in finite {
        xr = (xr.0.min(*x), xr.1.max(*x));
        yr = (yr.0.min(*y), yr.1.max(*y));
    }
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
        yr = (0.0, 1.0);
    }
    let pad = |r: (f64, f64)| {
        let w = (r.1 - r.0).abs();
        let p = if w > 0.0 { 0.04 * w } else { 1.0 };
        (r.0 - p, r.1 + p)
    };
    let (x0, x1) = pad(xr);
    let (y0, y1) = pad(yr);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    let _ = write!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n");
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        escape(title)
    );

    // frame
    let _ = write!(
        s,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#888\"/>\n",
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    // ticks and labels
    for k in 0..=6 {
        let x = x0 + (x1 - x0) * k as f64 / 6.0;
        let xp = px(x);
        let _ = write!(
            s,
            "<line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#888\"/>\n",
            H - BOTTOM,
            H - BOTTOM + 5.0
        );
        let _ = write!(
            s,
            "<text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            H - BOTTOM + 20.0,
            tick(x)
        );
    }
    for k in 0..=5 {
        let y = y0 + (y1 - y0) * k as f64 / 5.0;
        let yp = py(y);
        let _ = write!(
            s,
            "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{LEFT}\" y2=\"{yp:.1}\" stroke=\"#888\"/>\n",
            LEFT - 5.0
        );
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 9.0,
            yp + 4.0,
            tick(y)
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 14.0,
        escape(x_label)
    );
    let _ = write!(
        s,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &ser.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
            }
        }
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.trim_end()
        );
        let ly = TOP + 16.0 + 22.0 * i as f64;
        let _ = write!(
            s,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>\n",
            W - RIGHT + 14.0,
            W - RIGHT + 44.0
        );
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            W - RIGHT + 52.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.01..10000.0).contains(&a) {
        let t = format!("{v:.3}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
