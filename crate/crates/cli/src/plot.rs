//! PNG rendering of the CSV outputs.

use std::collections::BTreeMap;
use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};

use crate::error::{CliError, CliResult};

const MARGIN: f64 = 40.0;
const MAX_CURVES: usize = 64;
const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const FRAME: Rgb<u8> = Rgb([90, 90, 90]);
const GRID: Rgb<u8> = Rgb([225, 225, 225]);
const PALETTE: [Rgb<u8>; 6] = [
    Rgb([31, 119, 180]),
    Rgb([214, 39, 40]),
    Rgb([44, 160, 44]),
    Rgb([255, 127, 14]),
    Rgb([148, 103, 189]),
    Rgb([140, 86, 75]),
];

fn bad(msg: impl Into<String>) -> CliError {
    iirnet::Error::Format(msg.into()).into()
}

fn rows(text: &str) -> CliResult<(String, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty CSV"))?.trim().to_string();
    let width = header.split(',').count();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(|c| c.trim().to_string()).collect()).collect();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(bad(format!("row {} has the wrong number of columns", i + 2)));
    }
    Ok((header, rows))
}

fn num(s: &str) -> CliResult<f64> {
    s.parse().map_err(|_| bad(format!("`{s}` is not a number")))
}

/// Chooses the plot from the CSV header.
pub fn render_png(text: &str, width: u32, height: u32) -> CliResult<Vec<u8>> {
    if width < 4 * MARGIN as u32 || height < 4 * MARGIN as u32 {
        return Err(CliError::usage("image is too small"));
    }
    let (header, rows) = rows(text)?;
    let img = match header.as_str() {
        "freq_hz,mag_db" => {
            let c = rows.iter().map(|r| Ok((num(&r[0])?, num(&r[1])?))).collect::<CliResult<_>>()?;
            curves(&[c], width, height)
        }
        "freq_hz,target_db,fit_db" => {
            let mut t = Vec::new();
            let mut f = Vec::new();
            for r in &rows {
                let x = num(&r[0])?;
                t.push((x, num(&r[1])?));
                f.push((x, num(&r[2])?));
            }
            curves(&[t, f], width, height)
        }
        "index,family,freq_hz,mag_db" => {
            let mut by_index: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
            for r in &rows {
                let i = num(&r[0])? as u64;
                if by_index.len() < MAX_CURVES || by_index.contains_key(&i) {
                    by_index.entry(i).or_default().push((num(&r[2])?, num(&r[3])?));
                }
            }
            curves(&by_index.into_values().collect::<Vec<_>>(), width, height)
        }
        "index,family,kind,re,im" => {
            let pts = rows
                .iter()
                .map(|r| Ok((r[2] == "pole", num(&r[3])?, num(&r[4])?)))
                .collect::<CliResult<Vec<_>>>()?;
            scatter(&pts, width, height)
        }
        other => return Err(bad(format!("no plot for CSV header `{other}`"))),
    };
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| bad(format!("PNG encoding failed: {e}")))?;
    Ok(buf.into_inner())
}

/// dB curves over a log-frequency axis; the 0 Hz bin is dropped.
fn curves(series: &[Vec<(f64, f64)>], width: u32, height: u32) -> RgbImage {
    let pts = || series.iter().flatten().filter(|(f, v)| *f > 0.0 && v.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(f, v) in pts() {
        x0 = x0.min(f.log10());
        x1 = x1.max(f.log10());
        y0 = y0.min(v);
        y1 = y1.max(v);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (1.0, 4.0, -1.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 2.0 {
        let mid = 0.5 * (y0 + y1);
        (y0, y1) = (mid - 1.0, mid + 1.0);
    }
    let pad = 0.05 * (y1 - y0);
    (y0, y1) = (y0 - pad, y1 + pad);

    let mut img = RgbImage::from_pixel(width, height, WHITE);
    let (w, h) = (width as f64 - 2.0 * MARGIN, height as f64 - 2.0 * MARGIN);
    let px = |x: f64| (MARGIN + (x - x0) / (x1 - x0) * w) as f32;
    let py = |y: f64| (MARGIN + (y1 - y) / (y1 - y0) * h) as f32;

    let step = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
        .into_iter()
        .find(|s| (y1 - y0) / s <= 12.0)
        .unwrap_or(200.0);
    let mut y = (y0 / step).ceil() * step;
    while y <= y1 {
        draw_line(&mut img, (px(x0), py(y)), (px(x1), py(y)), GRID);
        y += step;
    }
    for decade in x0.ceil() as i32..=x1.floor() as i32 {
        for k in 1..10 {
            let x = decade as f64 + (k as f64).log10();
            if x >= x0 && x <= x1 {
                let c = if k == 1 { FRAME } else { GRID };
                draw_line(&mut img, (px(x), py(y0)), (px(x), py(y1)), c);
            }
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let valid: Vec<_> = s.iter().filter(|(f, v)| *f > 0.0 && v.is_finite()).collect();
        for pair in valid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            draw_line(&mut img, (px(a.0.log10()), py(a.1)), (px(b.0.log10()), py(b.1)), color);
        }
    }
    frame(&mut img);
    img
}

/// Root positions in the z-plane with the unit circle; poles red, zeros blue.
/// Far outliers fall outside the view.
fn scatter(pts: &[(bool, f64, f64)], width: u32, height: u32) -> RgbImage {
    let mut mags: Vec<f64> = pts.iter().map(|p| p.1.hypot(p.2)).filter(|v| v.is_finite()).collect();
    mags.sort_by(f64::total_cmp);
    let q98 = mags.get(mags.len() * 98 / 100).copied().unwrap_or(1.0);
    let extent = q98.clamp(1.25, 4.0) * 1.05;
    let mut img = RgbImage::from_pixel(width, height, WHITE);
    let side = (width.min(height) as f64 - 2.0 * MARGIN) / 2.0;
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let scale = side / extent;
    let to_px = |x: f64, y: f64| (cx + x * scale, cy - y * scale);
    draw_line(&mut img, ((cx - side) as f32, cy as f32), ((cx + side) as f32, cy as f32), GRID);
    draw_line(&mut img, (cx as f32, (cy - side) as f32), (cx as f32, (cy + side) as f32), GRID);
    draw_circle(&mut img, (cx as i32, cy as i32), scale.round() as i32, FRAME);
    for &(pole, x, y) in pts {
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        let (u, v) = to_px(x, y);
        if (u - cx).abs() > side || (v - cy).abs() > side {
            continue;
        }
        let c = if pole { PALETTE[1] } else { PALETTE[0] };
        draw_disc(&mut img, (u.round() as i32, v.round() as i32), 2, c);
    }
    let s = (2.0 * side) as u32;
    draw_rect(&mut img, (cx - side) as i32, (cy - side) as i32, s, s, FRAME);
    img
}

fn frame(img: &mut RgbImage) {
    let (w, h) = (img.width() - 2 * MARGIN as u32, img.height() - 2 * MARGIN as u32);
    draw_rect(img, MARGIN as i32, MARGIN as i32, w, h, FRAME);
}

fn put(img: &mut RgbImage, x: i32, y: i32, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn draw_line(img: &mut RgbImage, a: (f32, f32), b: (f32, f32), c: Rgb<u8>) {
    let n = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as i32;
    for i in 0..=n {
        let t = i as f32 / n as f32;
        let x = a.0 + t * (b.0 - a.0);
        let y = a.1 + t * (b.1 - a.1);
        put(img, x.round() as i32, y.round() as i32, c);
    }
}

fn draw_rect(img: &mut RgbImage, x: i32, y: i32, w: u32, h: u32, c: Rgb<u8>) {
    let (x0, y0, x1, y1) = (x as f32, y as f32, (x + w as i32 - 1) as f32, (y + h as i32 - 1) as f32);
    draw_line(img, (x0, y0), (x1, y0), c);
    draw_line(img, (x1, y0), (x1, y1), c);
    draw_line(img, (x1, y1), (x0, y1), c);
    draw_line(img, (x0, y1), (x0, y0), c);
}

fn draw_circle(img: &mut RgbImage, center: (i32, i32), r: i32, c: Rgb<u8>) {
    let n = (8 * r).max(16);
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let x = center.0 as f64 + r as f64 * t.cos();
        let y = center.1 as f64 + r as f64 * t.sin();
        put(img, x.round() as i32, y.round() as i32, c);
    }
}

fn draw_disc(img: &mut RgbImage, center: (i32, i32), r: i32, c: Rgb<u8>) {
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                put(img, center.0 + dx, center.1 + dy, c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_kind() {
        let resp = "freq_hz,mag_db\n0,1\n100,2\n1000,-3\n10000,0\n";
        let overlay = "freq_hz,target_db,fit_db\n0,0,0\n10,1,1.5\n100,2,1\n";
        let set = "index,family,freq_hz,mag_db\n0,A,0,0\n0,A,10,1\n1,B,0,2\n1,B,10,3\n";
        let roots = "index,family,kind,re,im\n0,B,zero,0.5,0.2\n0,B,pole,-1.5,0\n";
        for csv in [resp, overlay, set, roots] {
            let png = render_png(csv, 320, 240).unwrap();
            let img = image::load_from_memory(&png).unwrap();
            assert_eq!((img.width(), img.height()), (320, 240));
        }
        assert!(render_png("a,b\n1,2\n", 320, 240).is_err());
        assert!(render_png("freq_hz,mag_db\n1,x\n", 320, 240).is_err());
    }
}
