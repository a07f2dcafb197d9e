//! Flow analysis: attention masking against a velocity prior, masked
//! velocity aggregation, and acceleration from consecutive flows.

use crate::error::{Error, Result};
use crate::flow::{warp_field, FlowField};
use crate::kalman::Acceleration;
use crate::scalar::Scalar;
use std::io::Write;
use std::path::Path;

/// Flow-direction velocity, pixels/frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Velocity2<T> {
    pub vx: T,
    pub vy: T,
}

impl<T: Scalar> Velocity2<T> {
    pub fn new(vx: T, vy: T) -> Self {
        Self { vx, vy }
    }

    pub fn zero() -> Self {
        Self {
            vx: T::zero(),
            vy: T::zero(),
        }
    }

    pub fn norm(self) -> T {
        (self.vx * self.vx + self.vy * self.vy).sqrt()
    }
}

/// Threshold rule for the attention mask: a pixel's flow must stay
/// within `max(|v| * angle_fraction, floor)` of the velocity prior.
/// The floor keeps stationary targets maskable (the proportional rule
/// alone degenerates to zero threshold at zero speed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurnConstraint<T> {
    pub angle_fraction: T,
    pub floor: T,
}

impl<T: Scalar> Default for TurnConstraint<T> {
    fn default() -> Self {
        Self {
            angle_fraction: T::FRAC_PI_6(),
            floor: T::from_f64(0.5),
        }
    }
}

impl<T: Scalar> TurnConstraint<T> {
    pub fn validate(&self) -> Result<()> {
        if self.angle_fraction <= T::zero() || self.angle_fraction.is_nan() {
            return Err(Error::Config("angle_fraction must be > 0".into()));
        }
        if self.floor < T::zero() {
            return Err(Error::Config("floor must be >= 0".into()));
        }
        Ok(())
    }

    pub fn threshold(&self, prior: Velocity2<T>) -> T {
        (prior.norm() * self.angle_fraction).max(self.floor)
    }
}

/// Per-pixel boolean gate over a flow field.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl AttentionMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, b: bool) {
        self.bits[y * self.width + x] = b;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Keep only pixels inside [x0, x1) x [y0, y1).
    pub fn restrict_to_window(&mut self, x0: usize, y0: usize, x1: usize, y1: usize) {
        for y in 0..self.height {
            for x in 0..self.width {
                if x < x0 || x >= x1 || y < y0 || y >= y1 {
                    self.set(x, y, false);
                }
            }
        }
    }

    /// Serialize as binary PBM (P4); set bits are black.
    pub fn write_pbm(&self, mut w: impl Write) -> Result<()> {
        write!(w, "P4\n{} {}\n", self.width, self.height)?;
        let row_bytes = self.width.div_ceil(8);
        let mut buf = vec![0u8; row_bytes * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    buf[y * row_bytes + x / 8] |= 0x80 >> (x % 8);
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn save_pbm(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_pbm(std::fs::File::create(path)?)
    }
}

/// Mask pixels whose flow stays within the turn constraint of the
/// velocity prior.
pub fn attention_mask<T: Scalar>(
    flow: &FlowField<T>,
    prior_vel: Velocity2<T>,
    g: &TurnConstraint<T>,
) -> Result<AttentionMask> {
    g.validate()?;
    if !flow.is_finite() || !prior_vel.vx.is_finite() || !prior_vel.vy.is_finite() {
        return Err(Error::InvalidInput(
            "non-finite flow or velocity prior".into(),
        ));
    }
    let thresh = g.threshold(prior_vel);
    let mut mask = AttentionMask::empty(flow.width, flow.height);
    for y in 0..flow.height {
        for x in 0..flow.width {
            let (u, v) = flow.at(x, y);
            let dx = u - prior_vel.vx;
            let dy = v - prior_vel.vy;
            mask.set(x, y, (dx * dx + dy * dy).sqrt() <= thresh);
        }
    }
    Ok(mask)
}

/// Component-wise mean flow over masked-in pixels; `None` when the mask
/// is empty (caller falls back to the predicted velocity).
pub fn velocity_from_flow<T: Scalar>(
    flow: &FlowField<T>,
    mask: &AttentionMask,
) -> Result<Option<Velocity2<T>>> {
    if flow.width != mask.width || flow.height != mask.height {
        return Err(Error::DimensionMismatch {
            expected_w: flow.width,
            expected_h: flow.height,
            got_w: mask.width,
            got_h: mask.height,
        });
    }
    let mut sum_u = T::zero();
    let mut sum_v = T::zero();
    let mut count = 0usize;
    for y in 0..flow.height {
        for x in 0..flow.width {
            if mask.get(x, y) {
                let (u, v) = flow.at(x, y);
                sum_u += u;
                sum_v += v;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Ok(None);
    }
    let n = T::from_usize(count);
    Ok(Some(Velocity2::new(sum_u / n, sum_v / n)))
}

/// Masked-mean acceleration from two consecutive flows: the later flow
/// is backwarped along the earlier one so each pixel compares the
/// velocity of the same scene point, then per-pixel differences are
/// averaged over the mask. Zero when the mask is empty.
pub fn estimate_acceleration<T: Scalar>(
    flow_t: &FlowField<T>,
    flow_t1: &FlowField<T>,
    mask: &AttentionMask,
) -> Result<Acceleration<T>> {
    if !flow_t.same_size(flow_t1) {
        return Err(Error::DimensionMismatch {
            expected_w: flow_t.width,
            expected_h: flow_t.height,
            got_w: flow_t1.width,
            got_h: flow_t1.height,
        });
    }
    if flow_t.width != mask.width || flow_t.height != mask.height {
        return Err(Error::DimensionMismatch {
            expected_w: flow_t.width,
            expected_h: flow_t.height,
            got_w: mask.width,
            got_h: mask.height,
        });
    }
    let aligned = warp_field(flow_t1, flow_t)?;
    let mut sum_x = T::zero();
    let mut sum_y = T::zero();
    let mut count = 0usize;
    for y in 0..flow_t.height {
        for x in 0..flow_t.width {
            if mask.get(x, y) {
                let (u0, v0) = flow_t.at(x, y);
                let (u1, v1) = aligned.at(x, y);
                sum_x += u1 - u0;
                sum_y += v1 - v0;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Ok(Acceleration::zero());
    }
    let n = T::from_usize(count);
    Ok(Acceleration::new(sum_x / n, sum_y / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::type_complexity)]
    fn flow_from(vals: &[((usize, usize), (f64, f64))], w: usize, h: usize) -> FlowField<f64> {
        let mut f = FlowField::zeros(w, h);
        for &((x, y), (u, v)) in vals {
            f.u.set(x, y, u);
            f.v.set(x, y, v);
        }
        f
    }

    #[test]
    fn mask_keeps_flow_matching_prior() {
        let g = TurnConstraint {
            angle_fraction: std::f64::consts::FRAC_PI_6,
            floor: 0.0,
        };
        let prior = Velocity2::new(2.0, 0.0);
        // threshold = 2 * pi/6 ~ 1.047
        let f = flow_from(&[((0, 0), (2.0, 0.0)), ((1, 0), (0.0, 0.0))], 2, 1);
        let m = attention_mask(&f, prior, &g).unwrap();
        assert!(m.get(0, 0), "matching flow must be masked in");
        assert!(!m.get(1, 0), "difference 2 > 1.047 must be masked out");
    }

    #[test]
    fn floor_governs_stationary_prior() {
        let g = TurnConstraint {
            angle_fraction: std::f64::consts::FRAC_PI_6,
            floor: 0.5,
        };
        let prior = Velocity2::zero();
        let mut f = FlowField::zeros(3, 3);
        let speeds = [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 3.0];
        for (i, &s) in speeds.iter().enumerate() {
            f.u.data[i] = s;
        }
        let m = attention_mask(&f, prior, &g).unwrap();
        for (i, &s) in speeds.iter().enumerate() {
            assert_eq!(m.bits[i], s <= 0.5, "speed {s}");
        }
    }

    #[test]
    fn mask_monotone_in_threshold() {
        let f = flow_from(
            &[
                ((0, 0), (1.0, 0.5)),
                ((1, 0), (-0.5, 2.0)),
                ((2, 0), (0.1, 0.1)),
            ],
            3,
            1,
        );
        let prior = Velocity2::new(0.5, 0.5);
        let small = TurnConstraint {
            angle_fraction: 0.3,
            floor: 0.2,
        };
        let large = TurnConstraint {
            angle_fraction: 0.9,
            floor: 1.5,
        };
        let ms = attention_mask(&f, prior, &small).unwrap();
        let ml = attention_mask(&f, prior, &large).unwrap();
        for i in 0..3 {
            assert!(!ms.bits[i] || ml.bits[i]);
        }
    }

    #[test]
    fn velocity_mean_over_constant_region() {
        let f = FlowField::constant(4, 4, 3.0, -1.0);
        let mut mask = AttentionMask::empty(4, 4);
        mask.set(1, 1, true);
        mask.set(2, 2, true);
        let v = velocity_from_flow(&f, &mask).unwrap().unwrap();
        assert_eq!(v, Velocity2::new(3.0, -1.0));
    }

    #[test]
    fn velocity_absent_for_empty_mask() {
        let f = FlowField::<f64>::zeros(4, 4);
        let mask = AttentionMask::empty(4, 4);
        assert!(velocity_from_flow(&f, &mask).unwrap().is_none());
    }

    #[test]
    fn velocity_hand_mean() {
        let f = flow_from(&[((0, 0), (1.0, 0.0)), ((1, 0), (3.0, 0.0))], 2, 1);
        let mask = AttentionMask::full(2, 1);
        let v = velocity_from_flow(&f, &mask).unwrap().unwrap();
        assert_eq!(v, Velocity2::new(2.0, 0.0));
    }

    #[test]
    fn acceleration_zero_for_equal_constant_flows() {
        let f = FlowField::constant(8, 8, 1.5, -0.5);
        let mask = AttentionMask::full(8, 8);
        let a = estimate_acceleration(&f, &f, &mask).unwrap();
        assert_eq!(a, Acceleration::zero());
    }

    #[test]
    fn acceleration_of_constant_fields_is_difference() {
        let f0 = FlowField::constant(8, 8, 1.0f64, 0.0);
        let f1 = FlowField::constant(8, 8, 2.0, 0.0);
        let mut mask = AttentionMask::empty(8, 8);
        mask.set(3, 4, true);
        let a = estimate_acceleration(&f0, &f1, &mask).unwrap();
        assert!((a.ax - 1.0).abs() < 1e-12);
        assert!(a.ay.abs() < 1e-12);
    }

    #[test]
    fn acceleration_empty_mask_is_zero() {
        let f0 = FlowField::constant(8, 8, 1.0, 0.0);
        let f1 = FlowField::constant(8, 8, 5.0, 0.0);
        let a = estimate_acceleration(&f0, &f1, &AttentionMask::empty(8, 8)).unwrap();
        assert_eq!(a, Acceleration::zero());
    }

    #[test]
    fn acceleration_matches_per_pixel_oracle() {
        // spatially varying fields on an 8x8 grid, brute-force warp-and-subtract
        let mut f0 = FlowField::zeros(8, 8);
        let mut f1 = FlowField::zeros(8, 8);
        for y in 0..8 {
            for x in 0..8 {
                f0.u.set(x, y, 0.5 + 0.05 * x as f64);
                f0.v.set(x, y, -0.3 + 0.02 * y as f64);
                f1.u.set(x, y, 0.8 - 0.03 * y as f64);
                f1.v.set(x, y, 0.1 + 0.04 * x as f64);
            }
        }
        let mut mask = AttentionMask::empty(8, 8);
        for y in 2..6 {
            for x in 2..6 {
                mask.set(x, y, true);
            }
        }
        let a = estimate_acceleration(&f0, &f1, &mask).unwrap();
        // oracle: independent bilinear sample + subtract per pixel
        let bilerp = |g: &crate::image::Grid<f64>, sx: f64, sy: f64| -> f64 {
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let cl = |x: isize, y: isize| g.at(x.clamp(0, 7) as usize, y.clamp(0, 7) as usize);
            let (x0, y0) = (x0 as isize, y0 as isize);
            (1.0 - fy) * ((1.0 - fx) * cl(x0, y0) + fx * cl(x0 + 1, y0))
                + fy * ((1.0 - fx) * cl(x0, y0 + 1) + fx * cl(x0 + 1, y0 + 1))
        };
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut n = 0.0;
        for y in 2..6 {
            for x in 2..6 {
                let (u0, v0) = f0.at(x, y);
                let px = x as f64 + u0;
                let py = y as f64 + v0;
                sx += bilerp(&f1.u, px, py) - u0;
                sy += bilerp(&f1.v, px, py) - v0;
                n += 1.0;
            }
        }
        assert!((a.ax - sx / n).abs() < 1e-12);
        assert!((a.ay - sy / n).abs() < 1e-12);
    }

    #[test]
    fn pbm_header_and_bits() {
        let mut m = AttentionMask::empty(9, 2);
        m.set(0, 0, true);
        m.set(8, 1, true);
        let mut buf = Vec::new();
        m.write_pbm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P4\n9 2\n"));
        let payload = &buf[7..];
        assert_eq!(payload.len(), 4); // 2 bytes per row
        assert_eq!(payload[0], 0x80);
        assert_eq!(payload[3], 0x80);
    }
}
