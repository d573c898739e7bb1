//! Grayscale deblurring as a box-constrained least-squares problem.
//!
//! The blur is a separable Gaussian with replicate boundary, `C = C_y (x) C_x`
//! on row-major pixels. Each 1-D factor is stored by columns, so a column of
//! `C` is the outer product of two short vectors and normal SOR touches
//! `O(k^2)` pixels per update for a kernel of `k` taps.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::linalg::ColumnAction;
use crate::model::NnlsProblem;
use crate::solvers::{normal_psor_solve_observed, NormalMode, SolveResult, SolverConfig};

/// Row-major grayscale image with real pixel values.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("image must have positive size".into()));
        }
        check_len(width * height, pixels.len())?;
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("pixel values must be finite".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn clamp_unit(&mut self) {
        for p in &mut self.pixels {
            *p = p.clamp(0.0, 1.0);
        }
    }
}

/// `||x - truth|| / ||truth||`.
pub fn relative_error(x: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = truth.iter().map(|t| t * t).sum();
    (num / den).sqrt()
}

/// Peak signal-to-noise ratio in dB for peak value 1.
pub fn psnr(x: &[f64], truth: &[f64]) -> f64 {
    let mse = x.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
    -10.0 * mse.log10()
}

/// Normalized Gaussian taps with standard deviation `sigma`, truncated at
/// radius `ceil(4 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel width must be positive, got {sigma}")));
    }
    let radius = (4.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= total;
    }
    // exact mirror symmetry despite the division
    let len = taps.len();
    for j in 0..len / 2 {
        taps[len - 1 - j] = taps[j];
    }
    Ok(taps)
}

/// One axis of the blur, stored by columns: column `j` has entries
/// `values` at rows `start..start + values.len()`.
#[derive(Debug, Clone, PartialEq)]
struct AxisBlur {
    starts: Vec<usize>,
    values: Vec<Vec<f64>>,
}

impl AxisBlur {
    fn new(len: usize, taps: &[f64]) -> Self {
        let r = taps.len() / 2;
        let mut starts = Vec::with_capacity(len);
        let mut values = Vec::with_capacity(len);
        for j in 0..len {
            let lo = j.saturating_sub(r);
            let hi = (j + r).min(len - 1);
            let col = (lo..=hi)
                .map(|i| {
                    taps.iter()
                        .enumerate()
                        .filter(|&(a, _)| (i + a).saturating_sub(r).min(len - 1) == j)
                        .map(|(_, t)| t)
                        .sum()
                })
                .collect();
            starts.push(lo);
            values.push(col);
        }
        Self { starts, values }
    }

    fn sq_norm(&self, j: usize) -> f64 {
        self.values[j].iter().map(|v| v * v).sum()
    }

    /// `out = M x` on strided lines.
    fn forward(&self, x: &[f64], xs: usize, out: &mut [f64], os: usize) {
        for k in 0..self.starts.len() {
            out[k * os] = 0.0;
        }
        for (j, (&s, col)) in self.starts.iter().zip(&self.values).enumerate() {
            let xj = x[j * xs];
            if xj != 0.0 {
                for (k, v) in col.iter().enumerate() {
                    out[(s + k) * os] += v * xj;
                }
            }
        }
    }

    /// `out = M^T y` on strided lines.
    fn transpose(&self, y: &[f64], ys: usize, out: &mut [f64], os: usize) {
        for (j, (&s, col)) in self.starts.iter().zip(&self.values).enumerate() {
            out[j * os] = col.iter().enumerate().map(|(k, v)| v * y[(s + k) * ys]).sum();
        }
    }
}

/// Separable Gaussian blur with replicate boundary on `width x height` images.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurOperator {
    width: usize,
    height: usize,
    taps: Vec<f64>,
    x_axis: AxisBlur,
    y_axis: AxisBlur,
}

impl BlurOperator {
    /// Gaussian blur with standard deviation `sigma` pixels.
    pub fn gaussian(width: usize, height: usize, sigma: f64) -> Result<Self> {
        Self::with_taps(width, height, gaussian_kernel(sigma)?)
    }

    /// Blur with arbitrary taps: odd length, positive, symmetric, summing to 1.
    pub fn with_taps(width: usize, height: usize, taps: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("image must have positive size".into()));
        }
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("blur taps {msg}")));
        if taps.len().is_multiple_of(2) {
            return bad("must have odd length");
        }
        if taps.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("must be positive");
        }
        if (0..taps.len()).any(|j| taps[j] != taps[taps.len() - 1 - j]) {
            return bad("must be symmetric");
        }
        if (taps.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return bad("must sum to 1");
        }
        Ok(Self { width, height, x_axis: AxisBlur::new(width, &taps), y_axis: AxisBlur::new(height, &taps), taps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    fn check(&self, img: &GrayImage) -> Result<()> {
        if img.width != self.width || img.height != self.height {
            return Err(Error::DimensionMismatch { expected: self.width * self.height, got: img.width * img.height });
        }
        Ok(())
    }

    /// `C img`. The result is not clamped.
    pub fn blur_apply(&self, img: &GrayImage) -> Result<GrayImage> {
        self.check(img)?;
        let mut out = vec![0.0; img.pixels.len()];
        self.apply_into(&img.pixels, &mut out);
        Ok(GrayImage { pixels: out, ..*img })
    }

    /// `C^T img`, the exact adjoint of [`BlurOperator::blur_apply`].
    pub fn transpose_apply(&self, img: &GrayImage) -> Result<GrayImage> {
        self.check(img)?;
        let mut out = vec![0.0; img.pixels.len()];
        self.apply_transpose_into(&img.pixels, &mut out);
        Ok(GrayImage { pixels: out, ..*img })
    }

    fn split(&self, j: usize) -> (usize, usize) {
        (j / self.width, j % self.width)
    }
}

impl ColumnAction for BlurOperator {
    fn rows(&self) -> usize {
        self.width * self.height
    }

    fn cols(&self) -> usize {
        self.width * self.height
    }

    fn col_sq_norm(&self, j: usize) -> f64 {
        let (r, c) = self.split(j);
        self.y_axis.sq_norm(r) * self.x_axis.sq_norm(c)
    }

    fn col_dot(&self, j: usize, res: &[f64]) -> f64 {
        let (r, c) = self.split(j);
        let (ys, yv) = (self.y_axis.starts[r], &self.y_axis.values[r]);
        let (xs, xv) = (self.x_axis.starts[c], &self.x_axis.values[c]);
        yv.iter()
            .enumerate()
            .map(|(a, wy)| {
                let row = &res[(ys + a) * self.width + xs..][..xv.len()];
                wy * xv.iter().zip(row).map(|(wx, v)| wx * v).sum::<f64>()
            })
            .sum()
    }

    fn col_axpy(&self, j: usize, alpha: f64, res: &mut [f64]) {
        let (r, c) = self.split(j);
        let (ys, yv) = (self.y_axis.starts[r], &self.y_axis.values[r]);
        let (xs, xv) = (self.x_axis.starts[c], &self.x_axis.values[c]);
        for (a, wy) in yv.iter().enumerate() {
            let s = alpha * wy;
            let row = &mut res[(ys + a) * self.width + xs..][..xv.len()];
            for (v, wx) in row.iter_mut().zip(xv) {
                *v += s * wx;
            }
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        for r in 0..h {
            self.x_axis.forward(&x[r * w..], 1, &mut tmp[r * w..], 1);
        }
        for c in 0..w {
            self.y_axis.forward(&tmp[c..], w, &mut out[c..], w);
        }
    }

    fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        for c in 0..w {
            self.y_axis.transpose(&y[c..], w, &mut tmp[c..], w);
        }
        for r in 0..h {
            self.x_axis.transpose(&tmp[r * w..], 1, &mut out[r * w..], 1);
        }
    }
}

/// Adds i.i.d. normal noise with standard deviation `sigma` and clamps to
/// `[0, 1]`.
pub fn add_noise(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels =
        img.pixels.iter().map(|&p| (p + sigma * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0)).collect();
    Ok(GrayImage { pixels, ..*img })
}

/// Restores `blurred` by solving `min ||C x - d||^2` subject to
/// `0 <= x <= 1` with normal SOR, starting from the blurred image.
pub fn deblur(blurred: &GrayImage, op: &BlurOperator, cfg: &SolverConfig, mode: NormalMode) -> Result<GrayImage> {
    deblur_observed(blurred, op, cfg, mode, &mut |_| {}).map(|(img, _)| img)
}

/// As [`deblur`], also returning the solver result and calling `observe`
/// with every iterate.
pub fn deblur_observed(
    blurred: &GrayImage,
    op: &BlurOperator,
    cfg: &SolverConfig,
    mode: NormalMode,
    observe: &mut dyn FnMut(&[f64]),
) -> Result<(GrayImage, SolveResult)> {
    op.check(blurred)?;
    let n = blurred.pixels.len();
    let q = NnlsProblem::with_bounds(op, blurred.pixels.clone(), vec![0.0; n], vec![1.0; n])?;
    let x0 = blurred.pixels.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let result = normal_psor_solve_observed(&q, mode, cfg, Some(x0), observe)?;
    let img = GrayImage { pixels: result.x.clone(), ..*blurred };
    Ok((img, result))
}

/// `size x size` checkerboard of 8-pixel squares with values 0 and 1.
pub fn test_pattern(size: usize) -> Result<GrayImage> {
    let pixels =
        (0..size * size).map(|k| if (k / size / 8 + k % size / 8).is_multiple_of(2) { 1.0 } else { 0.0 }).collect();
    GrayImage::new(size, size, pixels)
}

/// Pixel encoding for [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P5`, one byte per pixel.
    Binary,
    /// `P2`, decimal values.
    Ascii,
}

fn quantize(p: f64) -> u8 {
    (p.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit PGM. Pixels are clamped to `[0, 1]` and rounded.
pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>, format: PgmFormat) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        PgmFormat::Binary => {
            write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
            let bytes: Vec<u8> = img.pixels.iter().map(|&p| quantize(p)).collect();
            out.write_all(&bytes)?;
        }
        PgmFormat::Ascii => {
            write!(out, "P2\n{} {}\n255\n", img.width, img.height)?;
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(|&p| quantize(p).to_string()).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a `P5` or `P2` PGM (maxval up to 65535) into `[0, 1]` pixels.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let mut reader = BufReader::new(std::fs::File::open(path)?);
    let magic = header_token(&mut reader)?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::MalformedHeader(format!("unsupported PGM magic `{other}`"))),
    };
    let mut field = |name: &str| -> Result<usize> {
        let tok = header_token(&mut reader)?;
        tok.parse().map_err(|_| Error::MalformedHeader(format!("bad {name} `{tok}`")))
    };
    let (width, height, maxval) = (field("width")?, field("height")?, field("maxval")?);
    if !(1..=65535).contains(&maxval) {
        return Err(Error::MalformedHeader(format!("maxval {maxval} out of range")));
    }
    let n = width * height;
    let scale = maxval as f64;
    let raw: Vec<usize> = if binary {
        let wide = maxval > 255;
        let mut bytes = vec![0u8; if wide { 2 * n } else { n }];
        reader.read_exact(&mut bytes)?;
        if wide {
            bytes.chunks(2).map(|b| usize::from(u16::from_be_bytes([b[0], b[1]]))).collect()
        } else {
            bytes.into_iter().map(usize::from).collect()
        }
    } else {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let vals = text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse { line: 0, msg: format!("bad pixel `{t}`") }))
            .collect::<Result<Vec<_>>>()?;
        check_len(n, vals.len())?;
        vals
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(Error::Parse { line: 0, msg: format!("pixel {v} exceeds maxval {maxval}") });
    }
    GrayImage::new(width, height, raw.into_iter().map(|v| v as f64 / scale).collect())
}

/// Next whitespace-delimited header token, skipping `#` comments. Consumes
/// exactly one whitespace byte after the token.
fn header_token<R: BufRead>(reader: &mut R) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte)? == 0 {
            return if tok.is_empty() {
                Err(Error::MalformedHeader("unexpected end of PGM header".into()))
            } else {
                Ok(tok)
            };
        }
        match byte[0] {
            b'#' if tok.is_empty() => {
                let mut skip = Vec::new();
                reader.read_until(b'\n', &mut skip)?;
            }
            b if b.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    return Ok(tok);
                }
            }
            b => tok.push(b as char),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_width_two() {
        let k = gaussian_kernel(2.0).unwrap();
        assert_eq!(k.len(), 17);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for j in 0..8 {
            assert_eq!(k[8 - j], k[8 + j]);
        }
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
    }

    #[test]
    fn narrow_kernel_concentrates() {
        let k = gaussian_kernel(0.1).unwrap();
        assert_eq!(k.len(), 3);
        assert!(k[1] >= 0.999);
    }

    #[test]
    fn constant_image_is_preserved() {
        let op = BlurOperator::gaussian(9, 7, 1.5).unwrap();
        let img = GrayImage::filled(9, 7, 0.37).unwrap();
        let out = op.blur_apply(&img).unwrap();
        assert!(out.pixels().iter().all(|p| (p - 0.37).abs() < 1e-15));
    }

    #[test]
    fn interior_impulse_gives_stamp() {
        let op = BlurOperator::gaussian(21, 21, 1.0).unwrap();
        let t = op.taps().to_vec();
        let r = t.len() / 2;
        let mut px = vec![0.0; 21 * 21];
        px[10 * 21 + 10] = 1.0;
        let img = GrayImage::new(21, 21, px).unwrap();
        let fwd = op.blur_apply(&img).unwrap();
        let bwd = op.transpose_apply(&img).unwrap();
        for a in 0..t.len() {
            for b in 0..t.len() {
                let (row, col) = (10 + a - r, 10 + b - r);
                assert!((fwd.get(row, col) - t[a] * t[b]).abs() < 1e-16);
            }
        }
        assert_eq!(fwd.pixels().iter().filter(|&&v| v != 0.0).count(), t.len() * t.len());
        for (f, g) in fwd.pixels().iter().zip(bwd.pixels()) {
            assert!((f - g).abs() < 1e-16);
        }
    }

    #[test]
    fn corner_column_accumulates_boundary_taps() {
        let t = vec![0.25, 0.5, 0.25];
        let axis = AxisBlur::new(4, &t);
        // row 0 of the 1-D blur reads x[0] with taps 0 and 1
        assert_eq!(axis.starts[0], 0);
        assert_eq!(axis.values[0], vec![0.75, 0.25]);
        assert_eq!(axis.values[1], vec![0.25, 0.5, 0.25]);
        assert_eq!(axis.values[3], vec![0.25, 0.75]);
    }

    #[test]
    fn column_actions_match_impulses() {
        let op = BlurOperator::gaussian(6, 5, 0.8).unwrap();
        let n = 30;
        let probe: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = op.apply(&e).unwrap();
            let sq: f64 = col.iter().map(|v| v * v).sum();
            assert!((op.col_sq_norm(j) - sq).abs() < 1e-15);
            let d: f64 = col.iter().zip(&probe).map(|(a, b)| a * b).sum();
            assert!((op.col_dot(j, &probe) - d).abs() < 1e-14);
            let mut r = probe.clone();
            op.col_axpy(j, -0.5, &mut r);
            for i in 0..n {
                assert!((r[i] - (probe[i] - 0.5 * col[i])).abs() < 1e-15);
            }
            let tcol = op.apply_transpose(&col).unwrap();
            assert!((tcol[j] - sq).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = test_pattern(8).unwrap();
        assert_eq!(add_noise(&img, 0.0, 4).unwrap(), img);
        assert!(add_noise(&img, -0.1, 4).is_err());
        assert_eq!(add_noise(&img, 0.2, 4).unwrap(), add_noise(&img, 0.2, 4).unwrap());
    }

    #[test]
    fn noise_level_on_mid_gray() {
        let img = GrayImage::filled(256, 256, 0.5).unwrap();
        let noisy = add_noise(&img, 0.1, 11).unwrap();
        let diffs: Vec<f64> = noisy.pixels().iter().map(|p| p - 0.5).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((0.09..=0.11).contains(&sd), "sd {sd}");
    }

    #[test]
    fn identity_blur_returns_input() {
        let op = BlurOperator::with_taps(8, 8, vec![1.0]).unwrap();
        let img = test_pattern(8).unwrap();
        let (out, res) =
            deblur_observed(&img, &op, &SolverConfig::default(), NormalMode::Fixed(1.0), &mut |_| {}).unwrap();
        assert_eq!(out, img);
        assert_eq!(res.iterations, 1);
        assert!(res.converged());
    }

    #[test]
    fn rejects_bad_taps() {
        assert!(BlurOperator::with_taps(4, 4, vec![0.5, 0.5]).is_err());
        assert!(BlurOperator::with_taps(4, 4, vec![0.2, 0.5, 0.3]).is_err());
        assert!(BlurOperator::with_taps(4, 4, vec![0.25, 0.25, 0.25]).is_err());
        assert!(BlurOperator::with_taps(4, 4, vec![-0.5, 2.0, -0.5]).is_err());
        let op = BlurOperator::gaussian(4, 4, 1.0).unwrap();
        assert!(op.blur_apply(&GrayImage::filled(4, 5, 0.0).unwrap()).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = test_pattern(12).unwrap();
        for (name, fmt) in [("a.pgm", PgmFormat::Binary), ("b.pgm", PgmFormat::Ascii)] {
            let path = dir.path().join(name);
            write_pgm(&img, &path, fmt).unwrap();
            let back = read_pgm(&path).unwrap();
            assert_eq!((back.width(), back.height()), (12, 12));
            for (a, b) in back.pixels().iter().zip(img.pixels()) {
                assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
            }
            write_pgm(&back, &path, fmt).unwrap();
            assert_eq!(read_pgm(&path).unwrap(), back);
        }
    }

    #[test]
    fn pgm_header_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        std::fs::write(&path, "P2\n# made by hand\n2 1\n# max\n10\n0 10\n").unwrap();
        let img = read_pgm(&path).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
        std::fs::write(&path, "P3\n1 1\n255\n0 0 0\n").unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::MalformedHeader(_))));
    }
}
