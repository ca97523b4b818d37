//! Minimal SVG writers: a point scatter and a grayscale heatmap.

use num_complex::Complex64;

const SIZE: f64 = 512.0;

/// Points as small dots, y axis pointing up.
pub fn scatter(points: &[Complex64]) -> String {
    let finite: Vec<&Complex64> = points.iter().filter(|z| z.re.is_finite() && z.im.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for z in &finite {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let mut s = header();
    for z in finite {
        let px = (z.re - x0) / span * SIZE;
        let py = SIZE - (z.im - y0) / span * SIZE;
        s.push_str(&format!("<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"0.6\"/>\n"));
    }
    s.push_str("</svg>\n");
    s
}

/// Row-major `nx × ny` values (row 0 at the bottom), block-summed to at most 256 per side.
pub fn heatmap(values: &[f64], nx: usize, ny: usize) -> String {
    let block = nx.max(ny).div_ceil(256).max(1);
    let (bx, by) = (nx.div_ceil(block), ny.div_ceil(block));
    let mut coarse = vec![0.0; bx * by];
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            if v.is_finite() {
                coarse[(j / block) * bx + i / block] += v;
            }
        }
    }
    let max = coarse.iter().copied().fold(0.0, f64::max);
    let cell = SIZE / bx.max(by) as f64;
    let mut s = header();
    for j in 0..by {
        for i in 0..bx {
            let v = coarse[j * bx + i];
            if v <= 0.0 || max <= 0.0 {
                continue;
            }
            let shade = (255.0 * (1.0 - v / max)).round() as u8;
            s.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({shade},{shade},{shade})\"/>\n",
                i as f64 * cell,
                SIZE - (j + 1) as f64 * cell
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}
