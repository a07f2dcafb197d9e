//! Virtual-sensor abstraction and the fused tracking loop: sense
//! position, sense flow, mask, estimate acceleration, predict, update.

use crate::analysis::{
    attention_mask, estimate_acceleration, velocity_from_flow, AttentionMask, TurnConstraint,
    Velocity2,
};
use crate::error::{Error, Result};
use crate::flow::{estimate_flow, FlowField, FlowParams};
use crate::image::GrayImage;
use crate::kalman::{
    predict, update, Acceleration, Covariance4, MotionModel, StateEstimate, StateVector,
};
use crate::scalar::Scalar;

/// Axis-aligned box, center + extent, pixels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundingBox<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > T::zero() && self.h > T::zero())
            || !self.cx.is_finite()
            || !self.cy.is_finite()
            || !self.w.is_finite()
            || !self.h.is_finite()
        {
            return Err(Error::InvalidInput(format!(
                "bounding box must have finite center and positive extent, got {:?}",
                (
                    self.cx.into_f64(),
                    self.cy.into_f64(),
                    self.w.into_f64(),
                    self.h.into_f64()
                )
            )));
        }
        Ok(())
    }

    pub fn left(&self) -> T {
        self.cx - self.w * T::from_f64(0.5)
    }

    pub fn top(&self) -> T {
        self.cy - self.h * T::from_f64(0.5)
    }

    pub fn right(&self) -> T {
        self.cx + self.w * T::from_f64(0.5)
    }

    pub fn bottom(&self) -> T {
        self.cy + self.h * T::from_f64(0.5)
    }

    pub fn inflate(&self, factor: T) -> Self {
        Self {
            cx: self.cx,
            cy: self.cy,
            w: self.w * factor,
            h: self.h * factor,
        }
    }

    pub fn contains_point(&self, x: T, y: T) -> bool {
        x >= self.left() && x <= self.right() && y >= self.top() && y <= self.bottom()
    }

    /// Integer pixel rect (x0, y0, w, h) covering the box, clamped to a
    /// frame of the given size. The rect spans sample points
    /// x0 .. x0+w-1 whose centroid is the box center.
    pub fn int_rect(&self, frame_w: usize, frame_h: usize) -> (usize, usize, usize, usize) {
        let w = (self.w.into_f64().round() as usize).max(1).min(frame_w);
        let h = (self.h.into_f64().round() as usize).max(1).min(frame_h);
        let x0 = (self.cx.into_f64() - (w as f64 - 1.0) / 2.0).round() as isize;
        let y0 = (self.cy.into_f64() - (h as f64 - 1.0) / 2.0).round() as isize;
        let x0 = x0.clamp(0, (frame_w - w) as isize) as usize;
        let y0 = y0.clamp(0, (frame_h - h) as isize) as usize;
        (x0, y0, w, h)
    }

    /// Clamp the center so the box stays inside the frame.
    pub fn clamp_to_frame(&self, frame_w: usize, frame_h: usize) -> Self {
        let half_w = self.w * T::from_f64(0.5);
        let half_h = self.h * T::from_f64(0.5);
        let max_x = T::from_usize(frame_w.saturating_sub(1));
        let max_y = T::from_usize(frame_h.saturating_sub(1));
        Self {
            cx: self
                .cx
                .max(half_w.min(max_x))
                .min((max_x - half_w).max(T::zero())),
            cy: self
                .cy
                .max(half_h.min(max_y))
                .min((max_y - half_h).max(T::zero())),
            w: self.w,
            h: self.h,
        }
    }
}

/// Zero-normalized cross-correlation template match inside a search box.
///
/// Returns the box of the best placement (template extent) and the peak
/// score in [-1, 1]. Ties break toward the smallest (y, x) placement.
pub fn ncc_template_match<T: Scalar>(
    frame: &GrayImage<T>,
    template: &GrayImage<T>,
    search: &BoundingBox<T>,
) -> Result<(BoundingBox<T>, T)> {
    search.validate()?;
    let (sx0, sy0, sw, sh) = search.int_rect(frame.width(), frame.height());
    let (tw, th) = (template.width(), template.height());
    if tw > sw || th > sh {
        return Err(Error::InvalidInput(format!(
            "template {tw}x{th} larger than search region {sw}x{sh}"
        )));
    }
    let n = T::from_usize(tw * th);
    // template statistics
    let mut t_sum = T::zero();
    for y in 0..th {
        for x in 0..tw {
            t_sum += template.at(x, y);
        }
    }
    let t_mean = t_sum / n;
    let mut t_var = T::zero();
    for y in 0..th {
        for x in 0..tw {
            let d = template.at(x, y) - t_mean;
            t_var += d * d;
        }
    }
    if t_var <= T::from_f64(1e-12) {
        return Err(Error::DegenerateTemplate);
    }
    let mut best_score = T::neg_infinity();
    let mut best = (0usize, 0usize);
    for oy in 0..=(sh - th) {
        for ox in 0..=(sw - tw) {
            let mut w_sum = T::zero();
            for y in 0..th {
                for x in 0..tw {
                    w_sum += frame.at(sx0 + ox + x, sy0 + oy + y);
                }
            }
            let w_mean = w_sum / n;
            let mut cross = T::zero();
            let mut w_var = T::zero();
            for y in 0..th {
                for x in 0..tw {
                    let tv = template.at(x, y) - t_mean;
                    let wv = frame.at(sx0 + ox + x, sy0 + oy + y) - w_mean;
                    cross += tv * wv;
                    w_var += wv * wv;
                }
            }
            let score = if w_var <= T::from_f64(1e-12) {
                T::zero()
            } else {
                cross / (t_var * w_var).sqrt()
            };
            if score > best_score {
                best_score = score;
                best = (ox, oy);
            }
        }
    }
    let cx = T::from_f64((sx0 + best.0) as f64 + (tw as f64 - 1.0) / 2.0);
    let cy = T::from_f64((sy0 + best.1) as f64 + (th as f64 - 1.0) / 2.0);
    Ok((
        BoundingBox::new(cx, cy, T::from_usize(tw), T::from_usize(th))?,
        best_score,
    ))
}

/// Anything that turns a frame plus a prior region into an optional
/// position observation. Implementations may keep internal state.
pub trait PositionSensor<T: Scalar> {
    fn observe(
        &mut self,
        frame_index: usize,
        frame: &GrayImage<T>,
        prior_box: &BoundingBox<T>,
    ) -> Result<Option<BoundingBox<T>>>;
}

/// Classical template-matching sensor: NCC against the initial template
/// within the inflated prior box.
pub struct NccSensor<T> {
    template: GrayImage<T>,
    min_score: T,
    inflation: T,
}

impl<T: Scalar> NccSensor<T> {
    pub fn from_init_frame(
        frame: &GrayImage<T>,
        init: &BoundingBox<T>,
        min_score: T,
        inflation: T,
    ) -> Result<Self> {
        let (x0, y0, w, h) = init.int_rect(frame.width(), frame.height());
        Ok(Self {
            template: frame.crop(x0, y0, w, h),
            min_score,
            inflation,
        })
    }
}

impl<T: Scalar> PositionSensor<T> for NccSensor<T> {
    fn observe(
        &mut self,
        _frame_index: usize,
        frame: &GrayImage<T>,
        prior_box: &BoundingBox<T>,
    ) -> Result<Option<BoundingBox<T>>> {
        let search = prior_box
            .inflate(self.inflation)
            .clamp_to_frame(frame.width(), frame.height());
        let (sx0, sy0, sw, sh) = search.int_rect(frame.width(), frame.height());
        if self.template.width() > sw || self.template.height() > sh {
            return Ok(None);
        }
        let _ = (sx0, sy0);
        match ncc_template_match(frame, &self.template, &search) {
            Ok((b, score)) => {
                if score >= self.min_score {
                    Ok(Some(b.clamp_to_frame(frame.width(), frame.height())))
                } else {
                    Ok(None)
                }
            }
            Err(Error::DegenerateTemplate) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Replays a pre-computed observation stream (external tracker output).
pub struct StreamSensor<T> {
    observations: Vec<Option<BoundingBox<T>>>,
}

impl<T: Scalar> StreamSensor<T> {
    pub fn new(observations: Vec<Option<BoundingBox<T>>>) -> Self {
        Self { observations }
    }
}

impl<T: Scalar> PositionSensor<T> for StreamSensor<T> {
    fn observe(
        &mut self,
        frame_index: usize,
        frame: &GrayImage<T>,
        _prior_box: &BoundingBox<T>,
    ) -> Result<Option<BoundingBox<T>>> {
        Ok(self
            .observations
            .get(frame_index)
            .cloned()
            .flatten()
            .map(|b| b.clamp_to_frame(frame.width(), frame.height())))
    }
}

/// Position-sensor selection.
#[derive(Clone, Debug, PartialEq)]
pub enum SensorKind<T> {
    /// NCC template matching against the init-frame template.
    Ncc { min_score: T },
    /// Pre-computed observation stream, one entry per frame.
    Stream(Vec<Option<BoundingBox<T>>>),
}

/// Velocity-sensor selection.
#[derive(Clone, Debug, PartialEq)]
pub enum VelocitySource<T> {
    /// Masked dense optical flow between consecutive frames.
    Flow,
    /// Pre-computed velocity stream (e.g. an external flow network).
    Stream(Vec<Option<Velocity2<T>>>),
    /// No velocity sensing; the filter falls back to its own prediction.
    Disabled,
}

/// How observations are turned into output boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionMode {
    /// Kalman fusion of position and velocity sensors.
    Fused,
    /// Pass the raw position sensor through, holding the last box
    /// during gaps. No motion model.
    RawOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig<T> {
    pub model: MotionModel<T>,
    /// Initial covariance scale: P0 = init_cov * I.
    pub init_cov: T,
    pub flow_params: FlowParams<T>,
    pub turn: TurnConstraint<T>,
    /// Search-window inflation factor relative to the current box.
    pub inflation: T,
    pub sensor: SensorKind<T>,
    pub velocity: VelocitySource<T>,
    pub fusion: FusionMode,
}

impl<T: Scalar> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            model: MotionModel::default(),
            init_cov: T::from_f64(10.0),
            flow_params: FlowParams::default(),
            turn: TurnConstraint::default(),
            inflation: T::from_f64(2.0),
            sensor: SensorKind::Ncc {
                min_score: T::from_f64(0.3),
            },
            velocity: VelocitySource::Flow,
            fusion: FusionMode::Fused,
        }
    }
}

/// One tracked frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryEntry<T> {
    pub frame_index: u64,
    pub bbox: BoundingBox<T>,
    pub estimate: StateEstimate<T>,
    pub observed: bool,
    /// The raw position observation, when one was produced.
    pub observation: Option<BoundingBox<T>>,
}

/// Per-sequence tracking result; frame indices run 0..n.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    entries: Vec<TrajectoryEntry<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn from_entries(entries: Vec<TrajectoryEntry<T>>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.frame_index != i as u64 {
                return Err(Error::InvalidInput(format!(
                    "trajectory frame indices must increase from 0, got {} at position {i}",
                    e.frame_index
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TrajectoryEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn boxes(&self) -> impl Iterator<Item = BoundingBox<T>> + '_ {
        self.entries.iter().map(|e| e.bbox)
    }
}

/// Assemble a full-state observation. Position is mandatory; a missing
/// velocity is filled from the prior so the fusion stays full-rank.
pub fn observe_full_state<T: Scalar>(
    bbox: Option<BoundingBox<T>>,
    vel: Option<Velocity2<T>>,
    prior: &StateEstimate<T>,
) -> Option<StateVector<T>> {
    let b = bbox?;
    let (vx, vy) = match vel {
        Some(v) => (v.vx, v.vy),
        None => (prior.state.vx, prior.state.vy),
    };
    Some(StateVector::new(b.cx, b.cy, vx, vy))
}

fn make_sensor<T: Scalar>(
    config: &TrackerConfig<T>,
    first_frame: &GrayImage<T>,
    init: &BoundingBox<T>,
) -> Result<Box<dyn PositionSensor<T>>> {
    Ok(match &config.sensor {
        SensorKind::Ncc { min_score } => Box::new(NccSensor::from_init_frame(
            first_frame,
            init,
            *min_score,
            config.inflation,
        )?),
        SensorKind::Stream(obs) => Box::new(StreamSensor::new(obs.clone())),
    })
}

/// Flow for the current step, restricted to the search window around
/// `around`. Returns the full-frame field (zero outside the window)
/// plus the window rect.
/// x0, y0, width, height of a pixel-aligned window.
type WindowRect = (usize, usize, usize, usize);

fn windowed_flow<T: Scalar>(
    prev: &GrayImage<T>,
    curr: &GrayImage<T>,
    around: &BoundingBox<T>,
    config: &TrackerConfig<T>,
) -> Result<(FlowField<T>, WindowRect)> {
    let window = around
        .inflate(config.inflation)
        .clamp_to_frame(prev.width(), prev.height());
    let (mut x0, mut y0, mut w, mut h) = window.int_rect(prev.width(), prev.height());
    // flow needs at least 8x8
    if w < 8 {
        w = 8.min(prev.width());
        x0 = x0.min(prev.width() - w);
    }
    if h < 8 {
        h = 8.min(prev.height());
        y0 = y0.min(prev.height() - h);
    }
    let crop_a = prev.crop(x0, y0, w, h);
    let crop_b = curr.crop(x0, y0, w, h);
    let local = estimate_flow(&crop_a, &crop_b, &config.flow_params)?;
    let mut full = FlowField::zeros(prev.width(), prev.height());
    for y in 0..h {
        for x in 0..w {
            let (u, v) = local.at(x, y);
            full.u.set(x0 + x, y0 + y, u);
            full.v.set(x0 + x, y0 + y, v);
        }
    }
    Ok((full, (x0, y0, w, h)))
}

/// Run the full sensing-and-fusion loop over a frame sequence.
pub fn track_sequence<T: Scalar>(
    frames: &[GrayImage<T>],
    init: BoundingBox<T>,
    config: &TrackerConfig<T>,
) -> Result<Trajectory<T>> {
    if frames.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "tracking needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    init.validate()?;
    let (fw, fh) = (frames[0].width(), frames[0].height());
    if !init.contains_point(init.cx, init.cy)
        || init.cx < T::zero()
        || init.cy < T::zero()
        || init.cx > T::from_usize(fw - 1)
        || init.cy > T::from_usize(fh - 1)
    {
        return Err(Error::InvalidInput("init box outside frame 0".into()));
    }
    for f in frames.iter().skip(1) {
        if f.width() != fw || f.height() != fh {
            return Err(Error::DimensionMismatch {
                expected_w: fw,
                expected_h: fh,
                got_w: f.width(),
                got_h: f.height(),
            });
        }
    }
    let mut sensor = make_sensor(config, &frames[0], &init)?;

    let init_est = StateEstimate::new(
        StateVector::new(init.cx, init.cy, T::zero(), T::zero()),
        Covariance4::scaled_identity(config.init_cov),
        0,
    );
    let mut entries = vec![TrajectoryEntry {
        frame_index: 0,
        bbox: init,
        estimate: init_est,
        observed: true,
        observation: Some(init),
    }];

    match config.fusion {
        FusionMode::RawOnly => {
            let mut last_box = init;
            for (t, frame) in frames.iter().enumerate().skip(1) {
                let obs = sensor.observe(t, frame, &last_box)?;
                if let Some(b) = obs {
                    last_box = b;
                }
                entries.push(TrajectoryEntry {
                    frame_index: t as u64,
                    bbox: last_box,
                    estimate: StateEstimate::new(
                        StateVector::new(last_box.cx, last_box.cy, T::zero(), T::zero()),
                        Covariance4::scaled_identity(config.init_cov),
                        t as u64,
                    ),
                    observed: obs.is_some(),
                    observation: obs,
                });
            }
        }
        FusionMode::Fused => {
            let mut est = init_est;
            let mut extent = (init.w, init.h);
            let mut cur_box = init;
            let mut prev_flow: Option<FlowField<T>> = None;
            let mut prev_mask: Option<AttentionMask> = None;
            let mut prev_vel_obs: Option<Velocity2<T>> = None;
            for t in 1..frames.len() {
                let prior_vel = Velocity2::new(est.state.vx, est.state.vy);
                // velocity sensing and acceleration estimation
                let (vel_obs, accel) = match &config.velocity {
                    VelocitySource::Flow => {
                        let (flow, rect) =
                            windowed_flow(&frames[t - 1], &frames[t], &cur_box, config)?;
                        let mut mask = attention_mask(&flow, prior_vel, &config.turn)?;
                        mask.restrict_to_window(rect.0, rect.1, rect.0 + rect.2, rect.1 + rect.3);
                        let vel = velocity_from_flow(&flow, &mask)?;
                        let accel = match (&prev_flow, &prev_mask) {
                            (Some(pf), Some(pm)) => estimate_acceleration(pf, &flow, pm)?,
                            _ => Acceleration::zero(),
                        };
                        prev_flow = Some(flow);
                        prev_mask = Some(mask);
                        (vel, accel)
                    }
                    VelocitySource::Stream(stream) => {
                        let vel = stream.get(t).cloned().flatten();
                        let accel = match (vel, prev_vel_obs) {
                            (Some(v1), Some(v0)) => Acceleration::new(v1.vx - v0.vx, v1.vy - v0.vy),
                            _ => Acceleration::zero(),
                        };
                        prev_vel_obs = vel;
                        (vel, accel)
                    }
                    VelocitySource::Disabled => (None, Acceleration::zero()),
                };
                let prior = predict(&est, accel, &config.model)?;
                let sensor_prior = BoundingBox {
                    cx: prior.state.px,
                    cy: prior.state.py,
                    w: extent.0,
                    h: extent.1,
                }
                .clamp_to_frame(fw, fh);
                let obs_box = sensor.observe(t, &frames[t], &sensor_prior)?;
                if let Some(b) = obs_box {
                    extent = (b.w, b.h);
                }
                est = match observe_full_state(obs_box, vel_obs, &prior) {
                    Some(z) => update(&prior, z, &config.model)?,
                    // with no position fix the target is not visible, so
                    // window flow describes whatever hides it; coast on
                    // the model instead of the estimated acceleration
                    None => predict(&est, Acceleration::zero(), &config.model)?,
                };
                cur_box = BoundingBox {
                    cx: est.state.px,
                    cy: est.state.py,
                    w: extent.0,
                    h: extent.1,
                };
                entries.push(TrajectoryEntry {
                    frame_index: t as u64,
                    bbox: cur_box,
                    estimate: est,
                    observed: obs_box.is_some(),
                    observation: obs_box,
                });
            }
        }
    }
    Trajectory::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat4;

    fn textured_frame(w: usize, h: usize) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| {
            0.5 + 0.3 * ((x as f64 * 0.7).sin() * (y as f64 * 1.3).cos()).clamp(-1.0, 1.0) * 0.9
        })
        .unwrap()
    }

    #[test]
    fn ncc_self_match_scores_one() {
        let frame = textured_frame(32, 32);
        let template = frame.crop(10, 12, 6, 6);
        let search = BoundingBox::new(12.5, 14.5, 20.0, 20.0).unwrap();
        let (b, score) = ncc_template_match(&frame, &template, &search).unwrap();
        assert!((score - 1.0).abs() < 1e-9);
        assert!((b.cx - 12.5).abs() < 1e-9);
        assert!((b.cy - 14.5).abs() < 1e-9);
    }

    #[test]
    fn ncc_negated_patch_scores_minus_one() {
        let frame = textured_frame(32, 32);
        let patch = frame.crop(10, 12, 6, 6);
        let negated = GrayImage::from_fn(6, 6, |x, y| 1.0 - patch.at(x, y)).unwrap();
        // search region admitting exactly the one placement
        let search = BoundingBox::new(12.5, 14.5, 6.0, 6.0).unwrap();
        let (b, score) = ncc_template_match(&frame, &negated, &search).unwrap();
        assert!((score + 1.0).abs() < 1e-9);
        assert!((b.cx - 12.5).abs() < 1e-9);
    }

    #[test]
    fn ncc_tie_breaks_lexicographically() {
        // identical 4x4 patch at (2,2) and (12,2); scan order prefers smaller (y,x)
        let mut img = GrayImage::<f64>::constant(24, 12, 0.2).unwrap();
        let patch = |img: &mut GrayImage<f64>, ox: usize| {
            let g = GrayImage::from_fn(24, 12, |x, y| {
                if (ox..ox + 4).contains(&x) && (2..6).contains(&y) {
                    0.2 + 0.1 * ((x - ox) as f64 + (y - 2) as f64)
                } else {
                    img.at(x, y)
                }
            })
            .unwrap();
            *img = g;
        };
        patch(&mut img, 2);
        patch(&mut img, 12);
        let template = img.crop(2, 2, 4, 4);
        let search = BoundingBox::new(11.5, 5.5, 24.0, 12.0).unwrap();
        let (b, score) = ncc_template_match(&img, &template, &search).unwrap();
        assert!((score - 1.0).abs() < 1e-9);
        assert!(
            (b.cx - 3.5).abs() < 1e-9,
            "expected leftmost match, got cx={}",
            b.cx
        );
    }

    #[test]
    fn ncc_rejects_flat_template() {
        let frame = textured_frame(16, 16);
        let template = GrayImage::<f64>::constant(4, 4, 0.5).unwrap();
        let search = BoundingBox::new(8.0, 8.0, 12.0, 12.0).unwrap();
        assert!(matches!(
            ncc_template_match(&frame, &template, &search),
            Err(Error::DegenerateTemplate)
        ));
    }

    #[test]
    fn observe_full_state_concatenates() {
        let prior = StateEstimate::new(
            StateVector::new(0., 0., 2., 0.),
            Covariance4::scaled_identity(1.0),
            3,
        );
        let b = BoundingBox::new(10., 20., 4., 4.).unwrap();
        let z = observe_full_state(Some(b), Some(Velocity2::new(1., -1.)), &prior).unwrap();
        assert_eq!(z, StateVector::new(10., 20., 1., -1.));
        let z = observe_full_state(Some(b), None, &prior).unwrap();
        assert_eq!(z, StateVector::new(10., 20., 2., 0.));
        assert!(observe_full_state(None, Some(Velocity2::new(1., 1.)), &prior).is_none());
    }

    fn blank_frames(n: usize) -> Vec<GrayImage<f64>> {
        (0..n).map(|_| textured_frame(64, 64)).collect()
    }

    /// Exact full-state stream sensors, Q = R = 0: the trajectory must
    /// reproduce ground truth.
    #[test]
    fn noiseless_exact_sensors_track_truth() {
        let n = 30;
        let (px0, py0, vx, vy) = (20.0, 30.0, 0.8, 0.4);
        let boxes: Vec<Option<BoundingBox<f64>>> = (0..n)
            .map(|t| {
                Some(BoundingBox::new(px0 + vx * t as f64, py0 + vy * t as f64, 8.0, 8.0).unwrap())
            })
            .collect();
        let vels: Vec<Option<Velocity2<f64>>> =
            (0..n).map(|_| Some(Velocity2::new(vx, vy))).collect();
        let config = TrackerConfig {
            model: MotionModel::with_noise(Mat4::zeros(), Mat4::zeros()),
            sensor: SensorKind::Stream(boxes),
            velocity: VelocitySource::Stream(vels),
            ..TrackerConfig::default()
        };
        let traj = track_sequence(&blank_frames(n), *config_init(), &config).unwrap();
        for (t, e) in traj.entries().iter().enumerate() {
            let tx = px0 + vx * t as f64;
            let ty = py0 + vy * t as f64;
            assert!(
                (e.bbox.cx - tx).abs() < 1e-6 && (e.bbox.cy - ty).abs() < 1e-6,
                "frame {t}: got ({}, {}), want ({tx}, {ty})",
                e.bbox.cx,
                e.bbox.cy
            );
        }
    }

    fn config_init() -> &'static BoundingBox<f64> {
        static INIT: BoundingBox<f64> = BoundingBox {
            cx: 20.0,
            cy: 30.0,
            w: 8.0,
            h: 8.0,
        };
        &INIT
    }

    /// Observation gap on constant-velocity motion: positions continue
    /// linearly through the gap.
    #[test]
    fn gap_extrapolates_linearly() {
        let n = 15;
        let (px0, py0, vx, vy) = (15.0, 15.0, 1.0, 0.5);
        let boxes: Vec<Option<BoundingBox<f64>>> = (0..n)
            .map(|t| {
                if (5..=8).contains(&t) {
                    None
                } else {
                    Some(
                        BoundingBox::new(px0 + vx * t as f64, py0 + vy * t as f64, 8.0, 8.0)
                            .unwrap(),
                    )
                }
            })
            .collect();
        let vels: Vec<Option<Velocity2<f64>>> =
            (0..n).map(|_| Some(Velocity2::new(vx, vy))).collect();
        let config = TrackerConfig {
            model: MotionModel::with_noise(Mat4::zeros(), Mat4::zeros()),
            sensor: SensorKind::Stream(boxes),
            velocity: VelocitySource::Stream(vels),
            ..TrackerConfig::default()
        };
        let init = BoundingBox::new(px0, py0, 8.0, 8.0).unwrap();
        let traj = track_sequence(&blank_frames(n), init, &config).unwrap();
        for t in 5..=8 {
            let e = &traj.entries()[t];
            assert!(!e.observed);
            let tx = px0 + vx * t as f64;
            let ty = py0 + vy * t as f64;
            assert!((e.bbox.cx - tx).abs() < 1e-6, "gap frame {t} drifted");
            assert!((e.bbox.cy - ty).abs() < 1e-6);
        }
    }

    /// With exact acceleration input, predict-only tracking of an
    /// accelerating target beats the constant-velocity baseline.
    #[test]
    fn acceleration_beats_constant_velocity_through_dropout() {
        let n = 20;
        let a = 0.15;
        // discrete dynamics: p += v; v += a
        let mut truth = Vec::new();
        let (mut px, mut vx) = (10.0, 0.5);
        for _ in 0..n {
            truth.push(px);
            px += vx;
            vx += a;
        }
        // positions observed only before frame 8
        let boxes: Vec<Option<BoundingBox<f64>>> = (0..n)
            .map(|t| {
                if t < 8 {
                    Some(BoundingBox::new(truth[t], 30.0, 8.0, 8.0).unwrap())
                } else {
                    None
                }
            })
            .collect();
        let vels: Vec<Option<Velocity2<f64>>> = (0..n)
            .map(|t| Some(Velocity2::new(0.5 + a * t as f64, 0.0)))
            .collect();
        let model = MotionModel::with_noise(Mat4::zeros(), Mat4::zeros());
        let init = BoundingBox::new(10.0, 30.0, 8.0, 8.0).unwrap();
        let frames = blank_frames(n);
        let run = |velocity: VelocitySource<f64>| {
            let config = TrackerConfig {
                model,
                sensor: SensorKind::Stream(boxes.clone()),
                velocity,
                ..TrackerConfig::default()
            };
            let traj = track_sequence(&frames, init, &config).unwrap();
            traj.entries()
                .iter()
                .enumerate()
                .map(|(t, e)| (e.bbox.cx - truth[t]).abs())
                .sum::<f64>()
                / n as f64
        };
        let with_accel = run(VelocitySource::Stream(vels));
        let const_vel = run(VelocitySource::Disabled);
        assert!(
            with_accel < const_vel,
            "accel-driven error {with_accel} not below constant-velocity {const_vel}"
        );
    }

    /// Identical observation streams through the NCC path and the
    /// stream path produce identical fusion output.
    #[test]
    fn sensor_agnostic_fusion() {
        use crate::sim::{generate_trajectory, render_scene, MotionKind, ScenarioSpec};
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::ConstantVelocity,
            init: StateVector::new(40.0, 40.0, 1.0, 0.5),
            frames: 12,
            width: 96,
            height: 96,
            target_w: 14.0,
            target_h: 14.0,
            texture_seed: 9,
            distractors: 0,
            occlusions: vec![],
            seed: 9,
        };
        let truth = generate_trajectory(&spec).unwrap();
        let frames = render_scene(&truth.trajectory, &spec).unwrap();
        let init = truth.trajectory.entries()[0].bbox;
        let ncc_config = TrackerConfig::<f64> {
            velocity: VelocitySource::Disabled,
            ..TrackerConfig::default()
        };
        let traj_ncc = track_sequence(&frames, init, &ncc_config).unwrap();
        let stream: Vec<Option<BoundingBox<f64>>> =
            traj_ncc.entries().iter().map(|e| e.observation).collect();
        let stream_config = TrackerConfig {
            sensor: SensorKind::Stream(stream),
            ..ncc_config
        };
        let traj_stream = track_sequence(&frames, init, &stream_config).unwrap();
        for (a, b) in traj_ncc.entries().iter().zip(traj_stream.entries()) {
            assert_eq!(a.estimate.state, b.estimate.state);
            assert_eq!(a.bbox, b.bbox);
        }
    }

    #[test]
    fn rejects_short_sequences_and_bad_init() {
        let frames = blank_frames(1);
        let init = BoundingBox::new(10.0, 10.0, 4.0, 4.0).unwrap();
        assert!(track_sequence(&frames, init, &TrackerConfig::default()).is_err());
        let frames = blank_frames(3);
        let outside = BoundingBox::new(500.0, 10.0, 4.0, 4.0).unwrap();
        assert!(track_sequence(&frames, outside, &TrackerConfig::default()).is_err());
    }
}
