//! Minimal static SVG of log y against log t.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

/// Plot the positive-time samples on log–log axes. With `tau`, a reference
/// line of slope −τ is drawn through the last sample.
pub fn write_decay_svg(path: impl AsRef<Path>, times: &[f64], values: &[f64], tau: Option<f64>, title: &str) -> Result<()> {
    std::fs::write(path, decay_svg(times, values, tau, title))?;
    Ok(())
}

pub fn decay_svg(times: &[f64], values: &[f64], tau: Option<f64>, title: &str) -> String {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, y)| **t > 0.0 && **y > 0.0)
        .map(|(t, y)| (t.log10(), y.log10()))
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    if pts.len() < 2 {
        s.push_str("</svg>\n");
        return s;
    }
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(d as f64);
        let _ = writeln!(s, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#, H - PAD, H - PAD + 5.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, H - PAD + 18.0);
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(d as f64);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{PAD}" y2="{y}" stroke="black"/>"#, PAD - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, PAD - 8.0, y + 4.0);
    }
    let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, line.join(" "));
    if let Some(tau) = tau {
        let (xe, ye) = *pts.last().expect("nonempty");
        let xs = x0.max(xe - (y1 - ye) / tau.max(1e-12));
        let ys = ye + tau * (xe - xs);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(xs),
            sy(ys),
            sx(xe),
            sy(ye)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="firebrick" text-anchor="end">slope −{tau:.3}</text>"#, W - PAD - 6.0, PAD + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, W / 2.0, H - 12.0);
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_curve_and_reference() {
        let t: Vec<f64> = (0..20).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 + t)).collect();
        let s = decay_svg(&t, &y, Some(1.0), "a < b");
        assert!(s.contains("<polyline") && s.contains("stroke-dasharray") && s.contains("a &lt; b"));
    }
}
