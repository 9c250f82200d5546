use std::fmt::Write;

use crate::mds::Embedding;

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    /// Written as a leading comment when set; leave `None` for byte-stable output.
    pub timestamp: Option<String>,
    pub title: String,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 640.0, height: 520.0, timestamp: None, title: "Model space".into() }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Scatter of the first two embedding coordinates with the candidate models,
/// the projection estimate `m̂`, the true projection `M` and the model average.
/// One-dimensional embeddings are drawn on a horizontal line.
pub fn model_space_svg(
    e: &Embedding,
    m_hat: &[f64],
    true_m: Option<&[f64]>,
    average: &[f64],
    opts: &SvgOptions,
) -> String {
    let xy = |p: &[f64]| (p[0], p.get(1).copied().unwrap_or(0.0));
    let mut pts: Vec<(f64, f64)> = (0..e.len()).map(|i| xy(&e.point(i))).collect();
    pts.push(xy(m_hat));
    pts.push(xy(average));
    if let Some(m) = true_m {
        pts.push(xy(m));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let margin = 60.0;
    let plot = (opts.width - 2.0 * margin - 140.0).min(opts.height - 2.0 * margin);
    let scale = plot / span;
    let ox = margin + plot / 2.0;
    let oy = margin + plot / 2.0;
    let map = |(x, y): (f64, f64)| (ox + (x - cx) * scale, oy - (y - cy) * scale);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(ts) = &opts.timestamp {
        let _ = writeln!(s, "<!-- generated {} -->", escape(ts));
    }
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>", opts.width, opts.height);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
        margin,
        escape(&opts.title)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{plot:.2}\" height=\"{plot:.2}\" fill=\"none\" stroke=\"#bbb\"/>"
    );
    for i in 0..e.len() {
        let (x, y) = map(xy(&e.point(i)));
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3.5\" fill=\"#555\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#333\">{}</text>",
            x + 5.0,
            y - 4.0,
            escape(&e.names[i])
        );
    }
    let (ax, ay) = map(xy(average));
    let _ = writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"9\" height=\"9\" fill=\"#2a7fd4\"/>",
        ax - 4.5,
        ay - 4.5
    );
    let (mx, my) = map(xy(m_hat));
    let _ = writeln!(s, "<circle cx=\"{mx:.2}\" cy=\"{my:.2}\" r=\"6\" fill=\"none\" stroke=\"#d43a2a\" stroke-width=\"2.5\"/>");
    if let Some(m) = true_m {
        let (tx, ty) = map(xy(m));
        let _ = writeln!(
            s,
            "<path d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\" stroke=\"#1f9d55\" stroke-width=\"2.5\"/>",
            tx - 6.0,
            ty - 6.0,
            tx + 6.0,
            ty + 6.0,
            tx - 6.0,
            ty + 6.0,
            tx + 6.0,
            ty - 6.0
        );
    }

    let lx = margin + plot + 24.0;
    let mut ly = margin + 10.0;
    let mut legend = |s: &mut String, marker: String, label: &str| {
        s.push_str(&marker.replace("{X}", &format!("{lx:.2}")).replace("{Y}", &format!("{ly:.2}")));
        s.push('\n');
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 14.0,
            ly + 4.0,
            label
        );
        ly += 22.0;
    };
    legend(&mut s, "<circle cx=\"{X}\" cy=\"{Y}\" r=\"3.5\" fill=\"#555\"/>".into(), "candidate model");
    legend(
        &mut s,
        "<circle cx=\"{X}\" cy=\"{Y}\" r=\"6\" fill=\"none\" stroke=\"#d43a2a\" stroke-width=\"2.5\"/>".into(),
        "projection estimate",
    );
    if true_m.is_some() {
        legend(
            &mut s,
            "<path d=\"M{X},{Y} m-5,-5 l10,10 m-10,0 l10,-10\" stroke=\"#1f9d55\" stroke-width=\"2.5\"/>".into(),
            "true projection",
        );
    }
    legend(
        &mut s,
        "<rect x=\"{X}\" y=\"{Y}\" width=\"9\" height=\"9\" transform=\"translate(-4.5,-4.5)\" fill=\"#2a7fd4\"/>".into(),
        "model average",
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn embedding() -> Embedding {
        let coords = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        Embedding::from_coords(vec!["a".into(), "b<c".into(), "d".into()], coords).unwrap()
    }

    #[test]
    fn well_formed_and_escaped() {
        let svg = model_space_svg(&embedding(), &[0.3, 0.3], Some(&[0.2, 0.4]), &[0.1, 0.1], &SvgOptions::default());
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("b&lt;c"));
        assert_eq!(svg.matches("<circle").count(), 3 + 1 + 2);
        assert_eq!(svg.matches("model average").count(), 1);
        assert!(!svg.contains("<!--"));
    }

    #[test]
    fn timestamp_is_the_only_difference() {
        let e = embedding();
        let plain = model_space_svg(&e, &[0.3, 0.3], None, &[0.1, 0.1], &SvgOptions::default());
        let stamped = SvgOptions { timestamp: Some("2024-01-01T00:00:00Z".into()), ..Default::default() };
        let with = model_space_svg(&e, &[0.3, 0.3], None, &[0.1, 0.1], &stamped);
        let stripped: String = with.lines().filter(|l| !l.starts_with("<!--")).map(|l| format!("{l}\n")).collect();
        assert_eq!(stripped, plain);
    }
}
