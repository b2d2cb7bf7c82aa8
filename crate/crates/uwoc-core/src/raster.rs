//! Constellation rendering and image preprocessing.
//!
//! Symbols are scattered onto a fixed-extent I/Q plane at 656×656, each one
//! stamped as a filled disc. The plot is monochrome white-on-black, so the
//! grayscale conversion collapses to the intensity channel, and the result
//! is downsampled by fractional-area box filtering to the classifier input
//! resolution. The extent is deliberately fixed (±3 normalized amplitude
//! units) rather than auto-scaled: auto-scaling would erase fading-amplitude
//! information, and ±3 contains every supported alphabet plus heavy noise.
//!
//! Images persist as binary 8-bit PGM ("P5"), which reproduces bit-exactly
//! and parses trivially.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::signal::IQFrame;
use crate::{Error, Result};

/// Render resolution of the scatter stage.
pub const RENDER_RESOLUTION: usize = 656;

/// Input resolutions the classifier accepts.
pub const ALLOWED_RESOLUTIONS: [usize; 4] = [16, 28, 32, 64];

/// Plot half-width in normalized amplitude units.
pub const DEFAULT_EXTENT: f64 = 3.0;

/// Disc radius of one symbol stamp, in pixels of the render stage.
const STAMP_RADIUS: i64 = 2;

/// Intensity added by one stamp; overlaps accumulate and clip at 255.
const STAMP_INTENSITY: u32 = 255;

/// An RGB scatter render. The color stage is monochrome (equal channels),
/// kept separate so the grayscale conversion stays an explicit step.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub resolution: usize,
    pub extent: f64,
    /// Symbols that fell outside the extent and were clamped to the border.
    pub clipped: usize,
    /// Row-major (R, G, B) triples.
    pub pixels: Vec<[u8; 3]>,
}

/// A grayscale constellation image.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstellationImage {
    pub resolution: usize,
    pub extent: f64,
    pub clipped: usize,
    /// Row-major 8-bit intensities, `resolution²` of them.
    pub pixels: Vec<u8>,
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Nearest-integer pixel coordinate; ties round toward the larger index.
fn round_coord(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Scatter-render a frame. Each symbol (I, Q) maps linearly from
/// [-extent, extent] onto [0, resolution-1] with the row axis inverted
/// (positive Q up), then stamps a filled disc of radius 2. Stamp overlaps
/// accumulate and clip at full intensity. Symbols outside the extent clamp
/// to the border and are counted in `clipped`.
pub fn render(frame: &IQFrame, resolution: usize, extent: f64) -> Result<RgbImage> {
    if frame.is_empty() {
        return Err(Error::invalid_argument("cannot render an empty frame"));
    }
    if resolution < 2 || !(extent > 0.0) {
        return Err(Error::invalid_argument(format!(
            "bad render geometry: resolution {resolution}, extent {extent}"
        )));
    }
    let n = resolution as i64;
    let span = (resolution - 1) as f64;
    let mut accum = vec![0u32; resolution * resolution];
    let mut clipped = 0usize;

    for s in &frame.symbols {
        let mut col = round_coord((s.re + extent) / (2.0 * extent) * span);
        let mut row = round_coord((extent - s.im) / (2.0 * extent) * span);
        if col < 0 || col >= n || row < 0 || row >= n {
            clipped += 1;
            col = col.clamp(0, n - 1);
            row = row.clamp(0, n - 1);
        }
        for dy in -STAMP_RADIUS..=STAMP_RADIUS {
            for dx in -STAMP_RADIUS..=STAMP_RADIUS {
                if dx * dx + dy * dy > STAMP_RADIUS * STAMP_RADIUS {
                    continue;
                }
                let (r, c) = (row + dy, col + dx);
                if r < 0 || r >= n || c < 0 || c >= n {
                    continue;
                }
                accum[(r * n + c) as usize] += STAMP_INTENSITY;
            }
        }
    }

    let pixels = accum
        .iter()
        .map(|&v| {
            let g = v.min(255) as u8;
            [g, g, g]
        })
        .collect();
    Ok(RgbImage {
        resolution,
        extent,
        clipped,
        pixels,
    })
}

/// Rec. 601 luma conversion, Y = round(0.299 R + 0.587 G + 0.114 B).
/// On the monochrome renders this is the identity on the intensity channel.
pub fn to_grayscale(rgb: &RgbImage) -> ConstellationImage {
    let pixels = rgb
        .pixels
        .iter()
        .map(|&[r, g, b]| {
            let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            (y + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    ConstellationImage {
        resolution: rgb.resolution,
        extent: rgb.extent,
        clipped: rgb.clipped,
        pixels,
    }
}

/// Per-axis fractional-area weights of one output cell over source cells.
fn axis_weights(out_idx: usize, scale: f64, source: usize) -> Vec<(usize, f64)> {
    let lo = out_idx as f64 * scale;
    let hi = (out_idx as f64 + 1.0) * scale;
    let first = lo.floor() as usize;
    let last = (hi.ceil() as usize).min(source);
    let mut weights = Vec::with_capacity(last - first);
    for j in first..last {
        let overlap = (hi.min(j as f64 + 1.0) - lo.max(j as f64)).max(0.0);
        if overlap > 0.0 {
            weights.push((j, overlap));
        }
    }
    weights
}

/// Area-average (box-filter) downsampling. Each output pixel is the
/// fractional-area weighted mean of its source footprint, rounded to the
/// nearest integer, so total intensity mass is preserved within rounding.
pub fn downsample(image: &ConstellationImage, target: usize) -> Result<ConstellationImage> {
    if target == 0 || target > image.resolution {
        return Err(Error::invalid_argument(format!(
            "downsample target {target} exceeds source {}",
            image.resolution
        )));
    }
    let source = image.resolution;
    let scale = source as f64 / target as f64;
    let rows: Vec<Vec<(usize, f64)>> = (0..target).map(|i| axis_weights(i, scale, source)).collect();
    let mut pixels = vec![0u8; target * target];
    for (r, row_w) in rows.iter().enumerate() {
        for (c, col_w) in rows.iter().enumerate() {
            let mut acc = 0.0;
            let mut area = 0.0;
            for &(sr, wr) in row_w {
                let base = sr * source;
                for &(sc, wc) in col_w {
                    acc += wr * wc * image.pixels[base + sc] as f64;
                    area += wr * wc;
                }
            }
            pixels[r * target + c] = ((acc / area) + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(ConstellationImage {
        resolution: target,
        extent: image.extent,
        clipped: image.clipped,
        pixels,
    })
}

/// Full preprocessing chain: 656×656 render → grayscale → downsample to
/// `resolution` → scale to [0, 1]. Returns the row-major normalized grid.
pub fn preprocess(frame: &IQFrame, resolution: usize) -> Result<Vec<f64>> {
    if !ALLOWED_RESOLUTIONS.contains(&resolution) {
        return Err(Error::invalid_argument(format!(
            "resolution {resolution} not in {ALLOWED_RESOLUTIONS:?}"
        )));
    }
    let gray = rasterize(frame, resolution)?;
    Ok(gray.pixels.iter().map(|&p| p as f64 / 255.0).collect())
}

/// Render + grayscale + downsample, keeping 8-bit output (the on-disk form).
pub fn rasterize(frame: &IQFrame, resolution: usize) -> Result<ConstellationImage> {
    let rgb = render(frame, RENDER_RESOLUTION, DEFAULT_EXTENT)?;
    downsample(&to_grayscale(&rgb), resolution)
}

// ---------------------------------------------------------------------------
// PGM persistence
// ---------------------------------------------------------------------------

/// Write a binary 8-bit PGM (magic "P5").
pub fn write_pgm(path: &Path, image: &ConstellationImage) -> Result<()> {
    let mut out = Vec::with_capacity(image.pixels.len() + 32);
    write!(
        out,
        "P5\n{} {}\n255\n",
        image.resolution, image.resolution
    )?;
    out.extend_from_slice(&image.pixels);
    fs::write(path, out)?;
    Ok(())
}

/// Read a binary 8-bit PGM. Comments (`#` to end of line) are tolerated in
/// the header. The extent is not stored in PGM and defaults.
pub fn read_pgm(path: &Path) -> Result<ConstellationImage> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<ConstellationImage, String> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err("missing P5 magic".into());
    }
    let mut pos = 2usize;
    let mut fields = [0usize; 3]; // width, height, maxval
    for field in &mut fields {
        // skip whitespace and comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err("truncated header".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| "bad header encoding".to_string())?
            .parse::<usize>()
            .map_err(|_| "bad header number".to_string())?;
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let (width, height, maxval) = (fields[0], fields[1], fields[2]);
    if width != height {
        return Err(format!("non-square image {width}x{height}"));
    }
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    let expected = width * height;
    let data = &bytes[pos..];
    if data.len() != expected {
        return Err(format!(
            "raster size {} does not match {width}x{height}",
            data.len()
        ));
    }
    Ok(ConstellationImage {
        resolution: width,
        extent: DEFAULT_EXTENT,
        clipped: 0,
        pixels: data.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{constellation_points, generate_prbs, map_symbols, ModulationFormat};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn frame_of(symbols: Vec<Complex64>) -> IQFrame {
        IQFrame {
            format: ModulationFormat::Qam16,
            symbols,
        }
    }

    #[test]
    fn center_symbol_stamp_position() {
        let img = render(&frame_of(vec![Complex64::new(0.0, 0.0)]), 656, 3.0).unwrap();
        // (0,0) maps to 327.5 on both axes; ties round up to 328.
        let center = img.pixels[328 * 656 + 328][0];
        assert_eq!(center, 255);
        assert_eq!(img.clipped, 0);
        // The disc has radius 2: pixel 3 away is dark.
        assert_eq!(img.pixels[328 * 656 + 332][0], 0);
    }

    #[test]
    fn ideal_16qam_has_16_clusters() {
        let bits = generate_prbs(9, 4000).unwrap();
        let frame = map_symbols(&bits, ModulationFormat::Qam16).unwrap();
        let img = to_grayscale(&render(&frame, 656, 3.0).unwrap());
        // Count connected components of lit pixels with a flood fill.
        let n = img.resolution;
        let mut seen = vec![false; n * n];
        let mut components = 0;
        for start in 0..n * n {
            if img.pixels[start] == 0 || seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(p) = stack.pop() {
                let (r, c) = (p / n, p % n);
                for (dr, dc) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= n as i64 || nc >= n as i64 {
                        continue;
                    }
                    let q = nr as usize * n + nc as usize;
                    if img.pixels[q] > 0 && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        assert_eq!(components, 16);
    }

    #[test]
    fn clipping_is_counted() {
        let points = constellation_points(ModulationFormat::Qam16);
        let inside = frame_of(points.clone());
        assert_eq!(render(&inside, 656, 3.0).unwrap().clipped, 0);

        let outside = frame_of(vec![Complex64::new(5.0, 0.0), Complex64::new(0.0, -4.0)]);
        assert_eq!(render(&outside, 656, 3.0).unwrap().clipped, 2);
    }

    #[test]
    fn render_rejects_empty() {
        assert!(render(&frame_of(vec![]), 656, 3.0).is_err());
    }

    #[test]
    fn grayscale_fixed_points() {
        let mut rgb = render(&frame_of(vec![Complex64::new(0.0, 0.0)]), 16, 3.0).unwrap();
        rgb.pixels[0] = [255, 255, 255];
        rgb.pixels[1] = [0, 0, 0];
        rgb.pixels[2] = [100, 100, 100];
        let gray = to_grayscale(&rgb);
        assert_eq!(gray.pixels[0], 255);
        assert_eq!(gray.pixels[1], 0);
        assert_eq!(gray.pixels[2], 100);
    }

    #[test]
    fn downsample_constant_image() {
        let img = ConstellationImage {
            resolution: 41,
            extent: 3.0,
            clipped: 0,
            pixels: vec![200; 41 * 41],
        };
        for target in [1, 2, 7, 40] {
            let out = downsample(&img, target).unwrap();
            assert!(out.pixels.iter().all(|&p| p == 200));
        }
    }

    #[test]
    fn downsample_block_aligned() {
        // 4×4 image of 2×2 tiles {0, 255} collapses exactly.
        let mut pixels = vec![0u8; 16];
        for r in 0..4 {
            for c in 0..4 {
                if (r / 2 + c / 2) % 2 == 1 {
                    pixels[r * 4 + c] = 255;
                }
            }
        }
        let img = ConstellationImage {
            resolution: 4,
            extent: 3.0,
            clipped: 0,
            pixels,
        };
        let out = downsample(&img, 2).unwrap();
        assert_eq!(out.pixels, vec![0, 255, 255, 0]);
    }

    /// Brute-force fractional-area reference: integrate the source image as
    /// a piecewise-constant function over each output cell on a fine grid.
    fn downsample_reference(pixels: &[u8], source: usize, target: usize) -> Vec<f64> {
        let sub = 64; // subdivisions per output cell axis
        let scale = source as f64 / target as f64;
        let mut out = vec![0.0; target * target];
        for r in 0..target {
            for c in 0..target {
                let mut acc = 0.0;
                for i in 0..sub {
                    let y = (r as f64 + (i as f64 + 0.5) / sub as f64) * scale;
                    let sr = (y.floor() as usize).min(source - 1);
                    for j in 0..sub {
                        let x = (c as f64 + (j as f64 + 0.5) / sub as f64) * scale;
                        let sc = (x.floor() as usize).min(source - 1);
                        acc += pixels[sr * source + sc] as f64;
                    }
                }
                out[r * target + c] = acc / (sub * sub) as f64;
            }
        }
        out
    }

    #[test]
    fn downsample_fractional_matches_reference() {
        let mut rng = crate::rng::Prng::new(77);
        for (source, target) in [(7usize, 3usize), (13, 4), (41, 4)] {
            let pixels: Vec<u8> = (0..source * source)
                .map(|_| (rng.next_u64() % 256) as u8)
                .collect();
            let img = ConstellationImage {
                resolution: source,
                extent: 3.0,
                clipped: 0,
                pixels: pixels.clone(),
            };
            let got = downsample(&img, target).unwrap();
            let want = downsample_reference(&pixels, source, target);
            for (g, w) in got.pixels.iter().zip(&want) {
                // Sub-sampling reference has its own discretization error.
                assert!(
                    (*g as f64 - w).abs() <= 1.0,
                    "{source}->{target}: {g} vs {w}"
                );
            }
        }
    }

    #[test]
    fn downsample_preserves_mass() {
        let bits = generate_prbs(21, 4000).unwrap();
        let frame = map_symbols(&bits, ModulationFormat::Qam16).unwrap();
        let gray = to_grayscale(&render(&frame, 656, 3.0).unwrap());
        let source_mass: f64 = gray.pixels.iter().map(|&p| p as f64).sum();
        for target in ALLOWED_RESOLUTIONS {
            let out = downsample(&gray, target).unwrap();
            let cell_area = (656.0 / target as f64).powi(2);
            let out_mass: f64 = out.pixels.iter().map(|&p| p as f64 * cell_area).sum();
            let budget = 0.5 * cell_area * (target * target) as f64;
            assert!(
                (out_mass - source_mass).abs() <= budget,
                "target {target}: {out_mass} vs {source_mass}"
            );
        }
    }

    #[test]
    fn downsample_rejects_upscale() {
        let img = ConstellationImage {
            resolution: 4,
            extent: 3.0,
            clipped: 0,
            pixels: vec![0; 16],
        };
        assert!(downsample(&img, 8).is_err());
    }

    #[test]
    fn translation_moves_centroid() {
        let centroid_col = |img: &ConstellationImage| -> f64 {
            let mut num = 0.0;
            let mut den = 0.0;
            for r in 0..img.resolution {
                for c in 0..img.resolution {
                    let v = img.pixels[r * img.resolution + c] as f64;
                    num += v * c as f64;
                    den += v;
                }
            }
            num / den
        };
        let base = frame_of(vec![Complex64::new(-0.25, 0.4); 40]);
        let shifted = frame_of(vec![Complex64::new(0.25, 0.4); 40]);
        let a = to_grayscale(&render(&base, 656, 3.0).unwrap());
        let b = to_grayscale(&render(&shifted, 656, 3.0).unwrap());
        let moved = centroid_col(&b) - centroid_col(&a);
        let expected = 0.5 / 6.0 * 655.0;
        assert!((moved - expected).abs() <= 1.0, "moved {moved}, want {expected}");
    }

    #[test]
    fn preprocess_contract() {
        let bits = generate_prbs(33, 4000).unwrap();
        let frame = map_symbols(&bits, ModulationFormat::Qam16).unwrap();
        let a = preprocess(&frame, 64).unwrap();
        let b = preprocess(&frame, 64).unwrap();
        assert_eq!(a.len(), 64 * 64);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(a.iter().any(|&v| v > 0.0));
        assert!(preprocess(&frame, 100).is_err());
    }

    #[test]
    fn pgm_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let bits = generate_prbs(3, 4000).unwrap();
        let frame = map_symbols(&bits, ModulationFormat::Qam16).unwrap();
        let img = rasterize(&frame, 64).unwrap();
        let path = dir.path().join("img.pgm");
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.resolution, 64);
        assert_eq!(back.pixels, img.pixels);

        std::fs::write(dir.path().join("bad.pgm"), b"P6\n2 2\n255\n0000").unwrap();
        assert!(matches!(
            read_pgm(&dir.path().join("bad.pgm")),
            Err(Error::Parse(_))
        ));
        std::fs::write(dir.path().join("short.pgm"), b"P5\n4 4\n255\n00").unwrap();
        assert!(read_pgm(&dir.path().join("short.pgm")).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn downsample_mass_budget(seed in any::<u64>()) {
            let mut rng = crate::rng::Prng::new(seed);
            let source = 37usize;
            let pixels: Vec<u8> = (0..source * source).map(|_| (rng.next_u64() % 256) as u8).collect();
            let img = ConstellationImage { resolution: source, extent: 3.0, clipped: 0, pixels };
            let target = 9usize;
            let out = downsample(&img, target).unwrap();
            let cell = (source as f64 / target as f64).powi(2);
            let src_mass: f64 = img.pixels.iter().map(|&p| p as f64).sum();
            let out_mass: f64 = out.pixels.iter().map(|&p| p as f64 * cell).sum();
            prop_assert!((out_mass - src_mass).abs() <= 0.5 * cell * (target * target) as f64);
        }
    }
}
