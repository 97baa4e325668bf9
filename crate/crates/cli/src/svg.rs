//! Minimal deterministic SVG writer for log-log box-count plots:
//! scatter of (log10 1/delta, log10 N), the fitted line over the window, and
//! a slope annotation. No external plotting dependency.

use dunkl_core::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if max - min < 1e-9 {
            min -= 0.5;
            max += 0.5;
        }
        Axis { min, max }
    }

    fn map(&self, v: f64, lo: f64, hi: f64) -> f64 {
        lo + (v - self.min) / (self.max - self.min) * (hi - lo)
    }
}

/// Scatter + fitted line. `counts[i]` belongs to `scales[i]`; the fit line is
/// drawn over `window` (half-open index range) with the given slope.
pub fn write_loglog_plot(
    path: &Path,
    title: &str,
    scales: &[f64],
    counts: &[u64],
    slope: f64,
    window: (usize, usize),
) -> Result<()> {
    let xs: Vec<f64> = scales.iter().map(|s| (1.0 / s).log10()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).log10()).collect();
    let ax = Axis::new(xs.iter().copied());
    let ay = Axis::new(ys.iter().copied());
    let px = |v: f64| ax.map(v, MARGIN, W - MARGIN);
    let py = |v: f64| ay.map(v, H - MARGIN, MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-family="monospace" font-size="14">{}</text>"#,
        MARGIN, title
    );
    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        MARGIN,
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        MARGIN,
        H - MARGIN,
        MARGIN,
        MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="12">log10(1/scale)</text>"#,
        W / 2.0 - 50.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-family="monospace" font-size="12" transform="rotate(-90 14 {:.1})">log10 N</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="10">{:.2}</text>"#,
        MARGIN - 10.0,
        H - MARGIN + 14.0,
        ax.min
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="10">{:.2}</text>"#,
        W - MARGIN - 10.0,
        H - MARGIN + 14.0,
        ax.max
    );

    // fitted line over the window (intercept recomputed in log10 space)
    let (lo, hi) = window;
    if hi > lo && hi <= xs.len() {
        let n = (hi - lo) as f64;
        let xbar = xs[lo..hi].iter().sum::<f64>() / n;
        let ybar = ys[lo..hi].iter().sum::<f64>() / n;
        let (x0, x1) = (xs[lo], xs[hi - 1]);
        let y_at = |x: f64| ybar + slope * (x - xbar);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c02020" stroke-width="1.5"/>"##,
            px(x0),
            py(y_at(x0)),
            px(x1),
            py(y_at(x1))
        );
    }

    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        let fill = if i >= lo && i < hi { "#2040c0" } else { "#9090a0" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{}"/>"#,
            px(x),
            py(y),
            fill
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="44" font-family="monospace" font-size="13">slope = {:.4}</text>"#,
        MARGIN, slope
    );
    let _ = writeln!(s, "</svg>");
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_deterministic_svg() {
        let dir = std::env::temp_dir().join("dunkl-svg-test");
        std::fs::create_dir_all(&dir).unwrap();
        let scales = [0.01, 0.02, 0.04, 0.08, 0.16];
        let counts = [100, 50, 25, 12, 6];
        let (f1, f2) = (dir.join("a.svg"), dir.join("b.svg"));
        write_loglog_plot(&f1, "test", &scales, &counts, 1.0, (0, 5)).unwrap();
        write_loglog_plot(&f2, "test", &scales, &counts, 1.0, (0, 5)).unwrap();
        let a = std::fs::read(&f1).unwrap();
        assert_eq!(a, std::fs::read(&f2).unwrap());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("slope = 1.0000"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
