//! Dense optical flow: brightness-constancy gradients, Horn-Schunck
//! estimation, and backwarping along a flow field.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Grid};
use crate::scalar::Scalar;
use std::io::{Read, Write};
use std::path::Path;

/// Per-pixel displacement field, pixels/frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField<T> {
    pub width: usize,
    pub height: usize,
    pub u: Grid<T>,
    pub v: Grid<T>,
}

impl<T: Scalar> FlowField<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            u: Grid::zeros(width, height),
            v: Grid::zeros(width, height),
        }
    }

    pub fn constant(width: usize, height: usize, u: T, v: T) -> Self {
        Self {
            width,
            height,
            u: Grid::filled(width, height, u),
            v: Grid::filled(width, height, v),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (T, T) {
        (self.u.at(x, y), self.v.at(x, y))
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .data
            .iter()
            .chain(self.v.data.iter())
            .all(|x| x.is_finite())
    }

    pub fn same_size(&self, other: &FlowField<T>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Binary codec: magic "PHOF", u32 LE width/height, row-major LE f32 (u, v) pairs.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(b"PHOF")?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.width * self.height * 8);
        for i in 0..self.width * self.height {
            buf.extend_from_slice(&(self.u.data[i].into_f64() as f32).to_le_bytes());
            buf.extend_from_slice(&(self.v.data[i].into_f64() as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"PHOF" {
            return Err(Error::Parse {
                line: 0,
                msg: "bad flow-file magic".into(),
            });
        }
        let mut n = [0u8; 4];
        r.read_exact(&mut n)?;
        let width = u32::from_le_bytes(n) as usize;
        r.read_exact(&mut n)?;
        let height = u32::from_le_bytes(n) as usize;
        let mut field = Self::zeros(width, height);
        let mut pair = [0u8; 8];
        for i in 0..width * height {
            r.read_exact(&mut pair)?;
            field.u.data[i] =
                T::from_f64(f32::from_le_bytes(pair[0..4].try_into().unwrap()) as f64);
            field.v.data[i] =
                T::from_f64(f32::from_le_bytes(pair[4..8].try_into().unwrap()) as f64);
        }
        Ok(field)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_binary(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary(std::fs::File::open(path)?)
    }
}

/// Horn-Schunck parameters. `smoothness_weight` is the regularizer
/// alpha^2, on the scale of squared [0,1] intensity gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams<T> {
    pub smoothness_weight: T,
    pub max_iterations: usize,
    pub convergence_eps: T,
}

impl<T: Scalar> Default for FlowParams<T> {
    fn default() -> Self {
        Self {
            smoothness_weight: T::from_f64(0.01),
            max_iterations: 1000,
            convergence_eps: T::from_f64(1e-6),
        }
    }
}

impl<T: Scalar> FlowParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.smoothness_weight <= T::zero() || !self.smoothness_weight.is_finite() {
            return Err(Error::Config("smoothness_weight must be > 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if self.convergence_eps <= T::zero() || self.convergence_eps.is_nan() {
            return Err(Error::Config("convergence_eps must be > 0".into()));
        }
        Ok(())
    }
}

fn check_same_size<T: Scalar>(a: &GrayImage<T>, b: &GrayImage<T>) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            expected_w: a.width(),
            expected_h: a.height(),
            got_w: b.width(),
            got_h: b.height(),
        });
    }
    Ok(())
}

/// Central difference along x, one-sided at the borders.
fn grad_x<T: Scalar>(img: &GrayImage<T>) -> Grid<T> {
    let (w, h) = (img.width(), img.height());
    let half = T::from_f64(0.5);
    let mut g = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = if w == 1 {
                T::zero()
            } else if x == 0 {
                img.at(1, y) - img.at(0, y)
            } else if x == w - 1 {
                img.at(w - 1, y) - img.at(w - 2, y)
            } else {
                (img.at(x + 1, y) - img.at(x - 1, y)) * half
            };
            g.set(x, y, v);
        }
    }
    g
}

fn grad_y<T: Scalar>(img: &GrayImage<T>) -> Grid<T> {
    let (w, h) = (img.width(), img.height());
    let half = T::from_f64(0.5);
    let mut g = Grid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = if h == 1 {
                T::zero()
            } else if y == 0 {
                img.at(x, 1) - img.at(x, 0)
            } else if y == h - 1 {
                img.at(x, h - 1) - img.at(x, h - 2)
            } else {
                (img.at(x, y + 1) - img.at(x, y - 1)) * half
            };
            g.set(x, y, v);
        }
    }
    g
}

/// Spatial gradients averaged over the two frames, plus the temporal
/// difference It = b - a.
pub fn image_gradients<T: Scalar>(
    a: &GrayImage<T>,
    b: &GrayImage<T>,
) -> Result<(Grid<T>, Grid<T>, Grid<T>)> {
    check_same_size(a, b)?;
    let half = T::from_f64(0.5);
    let (ax, ay) = (grad_x(a), grad_y(a));
    let (bx, by) = (grad_x(b), grad_y(b));
    let n = a.width() * a.height();
    let mut ix = Grid::zeros(a.width(), a.height());
    let mut iy = Grid::zeros(a.width(), a.height());
    let mut it = Grid::zeros(a.width(), a.height());
    for i in 0..n {
        ix.data[i] = (ax.data[i] + bx.data[i]) * half;
        iy.data[i] = (ay.data[i] + by.data[i]) * half;
        it.data[i] = b.grid().data[i] - a.grid().data[i];
    }
    Ok((ix, iy, it))
}

/// Horn-Schunck neighbourhood average with the standard 6/12 kernel,
/// edge-clamped.
fn neighbour_avg<T: Scalar>(g: &Grid<T>, out: &mut Grid<T>) {
    let (w, h) = (g.width, g.height);
    let w6 = T::from_f64(1.0 / 6.0);
    let w12 = T::from_f64(1.0 / 12.0);
    for y in 0..h {
        for x in 0..w {
            let xi = x as isize;
            let yi = y as isize;
            let s = (g.at_clamped(xi - 1, yi)
                + g.at_clamped(xi + 1, yi)
                + g.at_clamped(xi, yi - 1)
                + g.at_clamped(xi, yi + 1))
                * w6
                + (g.at_clamped(xi - 1, yi - 1)
                    + g.at_clamped(xi + 1, yi - 1)
                    + g.at_clamped(xi - 1, yi + 1)
                    + g.at_clamped(xi + 1, yi + 1))
                    * w12;
            out.set(x, y, s);
        }
    }
}

/// Dense Horn-Schunck flow from frame `a` to frame `b`.
///
/// Jacobi iteration on the regularized brightness-constancy constraint;
/// stops at `max_iterations` or when the mean absolute update over both
/// components drops below `convergence_eps`.
pub fn estimate_flow<T: Scalar>(
    a: &GrayImage<T>,
    b: &GrayImage<T>,
    params: &FlowParams<T>,
) -> Result<FlowField<T>> {
    check_same_size(a, b)?;
    params.validate()?;
    let (w, h) = (a.width(), a.height());
    if w < 8 || h < 8 {
        return Err(Error::InvalidInput(format!(
            "flow estimation needs at least 8x8 pixels, got {w}x{h}"
        )));
    }
    let (ix, iy, it) = image_gradients(a, b)?;
    let n = w * h;
    let alpha2 = params.smoothness_weight;
    let mut denom = Grid::zeros(w, h);
    for i in 0..n {
        denom.data[i] = alpha2 + ix.data[i] * ix.data[i] + iy.data[i] * iy.data[i];
    }
    let mut flow = FlowField::zeros(w, h);
    let mut ubar = Grid::zeros(w, h);
    let mut vbar = Grid::zeros(w, h);
    let inv_n = T::from_f64(1.0 / (2 * n) as f64);
    for _ in 0..params.max_iterations {
        neighbour_avg(&flow.u, &mut ubar);
        neighbour_avg(&flow.v, &mut vbar);
        let mut update = T::zero();
        for i in 0..n {
            let t = (ix.data[i] * ubar.data[i] + iy.data[i] * vbar.data[i] + it.data[i])
                / denom.data[i];
            let un = ubar.data[i] - ix.data[i] * t;
            let vn = vbar.data[i] - iy.data[i] * t;
            update = update + (un - flow.u.data[i]).abs() + (vn - flow.v.data[i]).abs();
            flow.u.data[i] = un;
            flow.v.data[i] = vn;
        }
        if update * inv_n < params.convergence_eps {
            break;
        }
    }
    debug_assert!(flow.is_finite());
    Ok(flow)
}

/// Backwarp a flow field along another flow:
/// out(x, y) = field(x + flow.u, y + flow.v), bilinear, edge-clamped.
pub fn warp_field<T: Scalar>(field: &FlowField<T>, flow: &FlowField<T>) -> Result<FlowField<T>> {
    if !field.same_size(flow) {
        return Err(Error::DimensionMismatch {
            expected_w: flow.width,
            expected_h: flow.height,
            got_w: field.width,
            got_h: field.height,
        });
    }
    let mut out = FlowField::zeros(field.width, field.height);
    for y in 0..field.height {
        for x in 0..field.width {
            let (dx, dy) = flow.at(x, y);
            let sx = T::from_usize(x) + dx;
            let sy = T::from_usize(y) + dy;
            out.u.set(x, y, field.u.sample_bilinear(sx, sy));
            out.v.set(x, y, field.v.sample_bilinear(sx, sy));
        }
    }
    Ok(out)
}

/// Backwarp an image along a flow; same sampling rule as [`warp_field`].
pub fn warp_image<T: Scalar>(image: &GrayImage<T>, flow: &FlowField<T>) -> Result<GrayImage<T>> {
    if image.width() != flow.width || image.height() != flow.height {
        return Err(Error::DimensionMismatch {
            expected_w: flow.width,
            expected_h: flow.height,
            got_w: image.width(),
            got_h: image.height(),
        });
    }
    GrayImage::from_fn(image.width(), image.height(), |x, y| {
        let (dx, dy) = flow.at(x, y);
        let sx = T::from_usize(x) + dx;
        let sy = T::from_usize(y) + dy;
        image.sample_bilinear(sx, sy).max(T::zero()).min(T::one())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::translated_texture_pair;

    #[test]
    fn gradients_of_constant_are_zero() {
        let a = GrayImage::<f64>::constant(8, 8, 0.5).unwrap();
        let (ix, iy, it) = image_gradients(&a, &a).unwrap();
        assert!(ix.data.iter().all(|&v| v == 0.0));
        assert!(iy.data.iter().all(|&v| v == 0.0));
        assert!(it.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_of_ramp() {
        let w = 16usize;
        let a = GrayImage::<f64>::from_fn(w, 8, |x, _| x as f64 / w as f64).unwrap();
        let (ix, _, it) = image_gradients(&a, &a).unwrap();
        for y in 0..8 {
            for x in 1..w - 1 {
                assert!((ix.at(x, y) - 1.0 / w as f64).abs() < 1e-12);
            }
        }
        assert!(it.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_of_temporal_step() {
        let a = GrayImage::<f64>::constant(8, 8, 0.0).unwrap();
        let b = GrayImage::<f64>::constant(8, 8, 1.0).unwrap();
        let (ix, iy, it) = image_gradients(&a, &b).unwrap();
        assert!(ix.data.iter().all(|&v| v == 0.0));
        assert!(iy.data.iter().all(|&v| v == 0.0));
        assert!(it.data.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gradients_dimension_mismatch() {
        let a = GrayImage::<f64>::constant(8, 8, 0.0).unwrap();
        let b = GrayImage::<f64>::constant(9, 8, 0.0).unwrap();
        assert!(matches!(
            image_gradients(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let (a, _) = translated_texture_pair::<f64>(7, 32, 1.0, 0.0);
        let flow = estimate_flow(&a, &a, &FlowParams::default()).unwrap();
        for v in flow.u.data.iter().chain(flow.v.data.iter()) {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn constant_frames_give_zero_flow() {
        let a = GrayImage::<f64>::constant(16, 16, 0.3).unwrap();
        let flow = estimate_flow(&a, &a, &FlowParams::default()).unwrap();
        for v in flow.u.data.iter().chain(flow.v.data.iter()) {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_translation() {
        let (a, b) = translated_texture_pair::<f64>(3, 64, 1.0, 0.0);
        let flow = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        let m = 4;
        let mut sum = 0.0;
        let mut count = 0usize;
        for y in m..64 - m {
            for x in m..64 - m {
                let (u, v) = flow.at(x, y);
                sum += ((u - 1.0).powi(2) + v.powi(2)).sqrt();
                count += 1;
            }
        }
        let epe = sum / count as f64;
        assert!(epe <= 0.25, "mean endpoint error {epe} > 0.25");
    }

    #[test]
    fn rejects_tiny_images() {
        let a = GrayImage::<f64>::constant(4, 4, 0.5).unwrap();
        assert!(estimate_flow(&a, &a, &FlowParams::default()).is_err());
    }

    #[test]
    fn zero_flow_warp_is_identity() {
        let (a, _) = translated_texture_pair::<f64>(11, 16, 0.0, 0.0);
        let flow = FlowField::zeros(16, 16);
        assert_eq!(warp_image(&a, &flow).unwrap(), a);
    }

    #[test]
    fn constant_input_invariant_under_warp() {
        let a = GrayImage::<f64>::constant(16, 16, 0.7).unwrap();
        let flow = FlowField::constant(16, 16, 1.3, -0.8);
        assert_eq!(warp_image(&a, &flow).unwrap(), a);
    }

    #[test]
    fn warp_ramp_by_unit_flow() {
        let w = 32usize;
        let img = GrayImage::<f64>::from_fn(w, 8, |x, _| x as f64 / w as f64).unwrap();
        let flow = FlowField::constant(w, 8, 1.0, 0.0);
        let out = warp_image(&img, &flow).unwrap();
        for y in 0..8 {
            for x in 0..w - 1 {
                assert!((out.at(x, y) - (x + 1) as f64 / w as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flow_file_roundtrip() {
        let mut f = FlowField::<f64>::zeros(3, 2);
        for i in 0..6 {
            f.u.data[i] = i as f64 * 0.5;
            f.v.data[i] = -(i as f64) * 0.25;
        }
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"PHOF");
        let back = FlowField::<f64>::read_binary(&buf[..]).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn deterministic_flow() {
        let (a, b) = translated_texture_pair::<f64>(5, 32, 0.7, -0.4);
        let f1 = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        let f2 = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        assert_eq!(f1, f2);
    }
}
