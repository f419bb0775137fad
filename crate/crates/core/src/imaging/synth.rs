//! Deterministic grayscale test images, quantized to 8 bits.
//!
//! They cover the regimes a graph denoiser cares about: flat regions with
//! sharp boundaries, thin strokes, smooth ramps and a periodic texture.

use super::ImageBuffer;

pub const TEST_IMAGE_SIZE: usize = 144;

/// Names accepted by [`test_image`].
pub const TEST_IMAGE_NAMES: [&str; 4] = ["shapes", "text", "gradient", "checker"];

pub fn standard_test_images() -> Vec<(&'static str, ImageBuffer)> {
    TEST_IMAGE_NAMES
        .iter()
        .map(|&name| (name, test_image(name, TEST_IMAGE_SIZE).expect("known name")))
        .collect()
}

pub fn test_image(name: &str, size: usize) -> Option<ImageBuffer> {
    let f: fn(f64, f64) -> f64 = match name {
        "shapes" => shapes,
        "text" => return Some(text(size)),
        "gradient" => gradient,
        "checker" => checker,
        _ => return None,
    };
    let s = size as f64;
    let samples = (0..size * size)
        .map(|i| quantize(f((i / size) as f64 / s, (i % size) as f64 / s)))
        .collect();
    Some(ImageBuffer::new(size, size, 1, samples).expect("valid shape"))
}

fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

fn shapes(y: f64, x: f64) -> f64 {
    let disc = (y - 0.33).powi(2) + (x - 0.33).powi(2) < 0.2f64.powi(2);
    let rect = (0.55..0.9).contains(&y) && (0.5..0.92).contains(&x);
    let triangle = y > 0.6 && y < 0.95 && (x - 0.22).abs() < (y - 0.6) * 0.5;
    if disc {
        0.2
    } else if rect {
        0.95
    } else if triangle {
        0.45
    } else {
        0.72
    }
}

fn gradient(y: f64, x: f64) -> f64 {
    let ramp = 0.15 + 0.6 * x;
    let band = if (0.4..0.6).contains(&y) { 0.2 } else { 0.0 };
    let blob = 0.15 * (-((y - 0.75).powi(2) + (x - 0.7).powi(2)) / 0.01).exp();
    ramp + band + blob
}

fn checker(y: f64, x: f64) -> f64 {
    let cell = ((y * 12.0).floor() as i64 + (x * 12.0).floor() as i64) % 2;
    if cell == 0 {
        0.3
    } else {
        0.7
    }
}

const GLYPHS: [(char, [u8; 7]); 6] = [
    (
        'G',
        [
            0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111,
        ],
    ),
    (
        'T',
        [
            0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100,
        ],
    ),
    (
        'V',
        [
            0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100,
        ],
    ),
    (
        'A',
        [
            0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001,
        ],
    ),
    (
        'P',
        [
            0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000,
        ],
    ),
    (
        'H',
        [
            0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001,
        ],
    ),
];

/// Dark strokes on a light background: two lines of blocky capitals.
fn text(size: usize) -> ImageBuffer {
    let scale = (size / 36).max(1);
    let mut samples = vec![quantize(0.88); size * size];
    let lines = ["GTV", "PATH"];
    for (line_idx, line) in lines.iter().enumerate() {
        let top = scale * 4 + line_idx * scale * 10;
        for (ch_idx, ch) in line.chars().enumerate() {
            let left = scale * 3 + ch_idx * scale * 7;
            let rows = GLYPHS
                .iter()
                .find(|(c, _)| *c == ch)
                .map(|(_, g)| g)
                .unwrap();
            for (gr, bits) in rows.iter().enumerate() {
                for gc in 0..5 {
                    if bits & (1 << (4 - gc)) == 0 {
                        continue;
                    }
                    for dy in 0..scale {
                        for dx in 0..scale {
                            let (r, c) = (top + gr * scale + dy, left + gc * scale + dx);
                            if r < size && c < size {
                                samples[r * size + c] = quantize(0.12);
                            }
                        }
                    }
                }
            }
        }
    }
    ImageBuffer::new(size, size, 1, samples).expect("valid shape")
}
