//! Grayscale radiance images and depth maps.
//!
//! Radiance is stored as f64 in [0, 1] and quantized to 8 bits only at
//! export. Depth maps hold the camera-axial distance in meters, with
//! `f64::INFINITY` marking pixels that no geometry covers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pgm: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadianceImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RadianceImage {
    pub fn new(width: usize, height: usize) -> Self {
        RadianceImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = RadianceImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn add(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn count_above(&self, threshold: f64) -> usize {
        self.data.iter().filter(|&&v| v > threshold).count()
    }

    /// Bilinear sample at continuous pixel coordinates; outside the image
    /// the radiance is zero.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let xf = x - 0.5;
        let yf = y - 0.5;
        let x0 = xf.floor();
        let y0 = yf.floor();
        let tx = xf - x0;
        let ty = yf - y0;
        let fetch = |xi: i64, yi: i64| -> f64 {
            if xi < 0 || yi < 0 || xi >= self.width as i64 || yi >= self.height as i64 {
                0.0
            } else {
                self.data[yi as usize * self.width + xi as usize]
            }
        };
        let x0i = x0 as i64;
        let y0i = y0 as i64;
        let a = fetch(x0i, y0i);
        let b = fetch(x0i + 1, y0i);
        let c = fetch(x0i, y0i + 1);
        let d = fetch(x0i + 1, y0i + 1);
        a * (1.0 - tx) * (1.0 - ty) + b * tx * (1.0 - ty) + c * (1.0 - tx) * ty + d * tx * ty
    }

    /// Quantizes each pixel to the nearest of 256 levels, in place.
    pub fn quantize_8bit(&mut self) {
        for v in &mut self.data {
            let q = (v.clamp(0.0, 1.0) * 255.0).round();
            *v = q / 255.0;
        }
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Self {
        assert_eq!(bytes.len(), width * height);
        RadianceImage {
            width,
            height,
            data: bytes.iter().map(|&b| b as f64 / 255.0).collect(),
        }
    }

    /// Binary PGM (P5), 8-bit.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_gray8());
        out
    }

    pub fn write_pgm(&self, path: &std::path::Path) -> Result<(), ImageError> {
        std::fs::write(path, self.to_pgm_bytes())?;
        Ok(())
    }

    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut pos = 0usize;
        let mut token = || -> Result<String, ImageError> {
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
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(ImageError::Format("unexpected end of header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let magic = token()?;
        if magic != "P5" {
            return Err(ImageError::Format(format!("expected P5, got {magic}")));
        }
        let width: usize = token()?
            .parse()
            .map_err(|e| ImageError::Format(format!("bad width: {e}")))?;
        let height: usize = token()?
            .parse()
            .map_err(|e| ImageError::Format(format!("bad height: {e}")))?;
        let maxval: usize = token()?
            .parse()
            .map_err(|e| ImageError::Format(format!("bad maxval: {e}")))?;
        if maxval != 255 {
            return Err(ImageError::Format(format!(
                "only 8-bit PGM supported, maxval {maxval}"
            )));
        }
        // single whitespace byte after maxval
        pos += 1;
        let need = width * height;
        if bytes.len() < pos + need {
            return Err(ImageError::Format(format!(
                "truncated pixel data: need {need} bytes, have {}",
                bytes.len().saturating_sub(pos)
            )));
        }
        Ok(RadianceImage::from_gray8(
            width,
            height,
            &bytes[pos..pos + need],
        ))
    }

    pub fn read_pgm(path: &std::path::Path) -> Result<Self, ImageError> {
        RadianceImage::from_pgm_bytes(&std::fs::read(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize) -> Self {
        DepthMap {
            width,
            height,
            data: vec![f64::INFINITY; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Depth in meters, or None where no geometry was rasterized.
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let v = self.data[y * self.width + x];
        v.is_finite().then_some(v)
    }

    pub fn raw(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, depth: f64) {
        self.data[y * self.width + x] = depth;
    }

    pub fn covered_pixels(&self) -> usize {
        self.data.iter().filter(|v| v.is_finite()).count()
    }

    /// Smallest finite depth, if any pixel is covered.
    pub fn min_depth(&self) -> Option<f64> {
        let m = self.data.iter().copied().fold(f64::INFINITY, f64::min);
        m.is_finite().then_some(m)
    }
}
