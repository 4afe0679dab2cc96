//! Basin pictures on a complex line through two anchor points.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{classify_basin, BasinLabel};
use crate::error::{Error, Result};
use crate::map::PolynomialMap;
use crate::point::{ProjectivePoint, RationalPoint};
use crate::symmetry::enumerate_superattractors;

/// Colors for attractor indices, taken modulo 16. Black is reserved for
/// unresolved points.
pub const PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
];

pub const UNRESOLVED_COLOR: [u8; 3] = [0, 0, 0];

/// Upper bound on `width * height`.
pub const MAX_PIXELS: u64 = 100_000_000;

pub fn color_of(label: &BasinLabel) -> [u8; 3] {
    match label.attractor() {
        Some(i) => PALETTE[i % PALETTE.len()],
        None => UNRESOLVED_COLOR,
    }
}

/// A rectangle `[re_min, re_max] × [im_min, im_max]` of the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn square(r: f64) -> Window {
        Window { re_min: -r, re_max: r, im_min: -r, im_max: r }
    }

    /// Parses `"re_min,re_max,im_min,im_max"`.
    pub fn parse(s: &str) -> Result<Window> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("window {s:?}: {e}")))?;
        let [re_min, re_max, im_min, im_max] = v[..] else {
            return Err(Error::InvalidArgument(format!("window {s:?} needs four numbers")));
        };
        let w = Window { re_min, re_max, im_min, im_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("empty or non-finite window {self:?}")))
        }
    }

    /// Parameter at the center of pixel `(row, col)`; row 0 is the top edge
    /// `im_max`.
    pub fn pixel_center(&self, row: usize, col: usize, width: usize, height: usize) -> Complex64 {
        let re = self.re_min + (col as f64 + 0.5) / width as f64 * (self.re_max - self.re_min);
        let im = self.im_max - (row as f64 + 0.5) / height as f64 * (self.im_max - self.im_min);
        Complex64::new(re, im)
    }
}

/// A complex line `anchor0 + t · anchor1` in P^k, sampled over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    pub anchors: [Vec<Complex64>; 2],
    pub window: Window,
    pub width: usize,
    pub height: usize,
}

impl SliceSpec {
    /// The line through `[1:0:...:0]` and `[0:1:...:1]` over `[-2, 2]^2`.
    pub fn default_for(k: usize) -> SliceSpec {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let a0 = (0..=k).map(|i| if i == 0 { one } else { zero }).collect();
        let a1 = (0..=k).map(|i| if i == 0 { zero } else { one }).collect();
        SliceSpec { anchors: [a0, a1], window: Window::square(2.0), width: 400, height: 400 }
    }

    /// Parses `"1,0,0;0,1,1"`; entries may be complex, e.g. `0.5+1i`.
    pub fn parse_anchors(s: &str) -> Result<[Vec<Complex64>; 2]> {
        let parsed: Vec<Vec<Complex64>> = s
            .split(';')
            .map(|p| {
                p.split(',')
                    .map(|t| t.trim().parse::<Complex64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::InvalidArgument(format!("anchor {p:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        match <[Vec<Complex64>; 2]>::try_from(parsed) {
            Ok(a) => Ok(a),
            Err(v) => Err(Error::InvalidArgument(format!("expected two anchors, got {}", v.len()))),
        }
    }

    /// Parses `"WxH"`.
    pub fn parse_resolution(s: &str) -> Result<(usize, usize)> {
        let bad = || Error::InvalidArgument(format!("resolution {s:?} is not WxH"));
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let w: usize = w.trim().parse().map_err(|_| bad())?;
        let h: usize = h.trim().parse().map_err(|_| bad())?;
        Ok((w, h))
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be positive".into()));
        }
        if self.width as u64 * self.height as u64 > MAX_PIXELS {
            return Err(Error::InvalidArgument(format!("more than {MAX_PIXELS} pixels")));
        }
        self.window.validate()?;
        for a in &self.anchors {
            if a.len() != k + 1 {
                return Err(Error::DimensionMismatch { expected: k + 1, got: a.len() });
            }
        }
        let p0 = ProjectivePoint::new(self.anchors[0].clone())
            .map_err(|_| Error::InvalidArgument("anchor 0 is the zero vector".into()))?;
        let p1 = ProjectivePoint::new(self.anchors[1].clone())
            .map_err(|_| Error::InvalidArgument("anchor 1 is the zero vector".into()))?;
        if p0.approx_eq(&p1) {
            return Err(Error::InvalidArgument("anchors coincide in P^k".into()));
        }
        Ok(())
    }

    pub fn point_at(&self, t: Complex64) -> Result<ProjectivePoint> {
        ProjectivePoint::new(self.anchors[0].iter().zip(&self.anchors[1]).map(|(a, b)| a + t * b).collect())
    }
}

/// Row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl ImageBuffer {
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&self.to_ppm())?;
        f.flush()
    }

    pub fn write_png(&self, path: &Path) -> std::result::Result<(), image::ImageError> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        image::save_buffer(path, &raw, self.width as u32, self.height as u32, image::ColorType::Rgb8)
    }
}

/// A rendered slice with the label behind every pixel.
#[derive(Clone, Debug)]
pub struct Render {
    pub image: ImageBuffer,
    pub labels: Vec<BasinLabel>,
    pub attractors: Vec<RationalPoint>,
}

/// Classifies the center of every pixel of the slice. Pixels are
/// independent, so the image does not depend on the thread count.
pub fn render_slice(map: &PolynomialMap, spec: &SliceSpec, max_iter: usize, capture_tol: f64) -> Result<Render> {
    spec.validate(map.k())?;
    let attractors = enumerate_superattractors(map.k());
    let targets: Vec<ProjectivePoint> = attractors.iter().map(RationalPoint::to_float).collect();
    let fmap = map.to_float();
    let (w, h) = (spec.width, spec.height);
    let labels: Vec<BasinLabel> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let t = spec.window.pixel_center(i / w, i % w, w, h);
            match spec.point_at(t) {
                Ok(p) => classify_basin(&fmap, &p, &targets, max_iter, capture_tol),
                // t is exactly where the line degenerates; only possible for
                // anchors that are scalar multiples, which validate rejects
                Err(_) => Ok(BasinLabel::Unresolved { max_iterations: max_iter }),
            }
        })
        .collect::<Result<_>>()?;
    let image = ImageBuffer { width: w, height: h, pixels: labels.iter().map(color_of).collect() };
    Ok(Render { image, labels, attractors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;

    #[test]
    fn parsing() {
        let a = SliceSpec::parse_anchors("1,0,0; 0,1+2i,1").unwrap();
        assert_eq!(a[1][1], Complex64::new(1.0, 2.0));
        assert!(SliceSpec::parse_anchors("1,0").is_err());
        assert_eq!(SliceSpec::parse_resolution("30x20").unwrap(), (30, 20));
        assert!(SliceSpec::parse_resolution("30").is_err());
        assert!(Window::parse("1,0,0,1").is_err());
        assert_eq!(Window::parse("-2,2,-1,1").unwrap().im_min, -1.0);
    }

    #[test]
    fn ppm_layout() {
        let img = ImageBuffer { width: 2, height: 1, pixels: vec![[1, 2, 3], [4, 5, 6]] };
        assert_eq!(img.to_ppm(), b"P6\n2 1\n255\n\x01\x02\x03\x04\x05\x06");
    }

    #[test]
    fn single_pixel_is_anchor_zero() {
        let g = build_equivariant_map(2).unwrap();
        let mut spec = SliceSpec::default_for(2);
        spec.width = 1;
        spec.height = 1;
        let r = render_slice(&g, &spec, 100, 1e-8).unwrap();
        let i = r.labels[0].attractor().unwrap();
        assert_eq!(r.attractors[i].to_ints(), Some(vec![1, 0, 0]));
        assert_eq!(r.image.pixels[0], PALETTE[i]);
    }

    #[test]
    fn coincident_anchors_rejected() {
        let g = build_equivariant_map(1).unwrap();
        let mut spec = SliceSpec::default_for(1);
        spec.anchors = [vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)], vec![Complex64::new(2.0, 0.0), Complex64::new(4.0, 0.0)]];
        assert!(render_slice(&g, &spec, 10, 1e-8).is_err());
    }
}
