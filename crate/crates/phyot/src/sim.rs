//! Synthetic scenario generation: ground-truth kinematics, rendered
//! grayscale scenes with clutter/distractors/occluders, and corrupted
//! sensor observations.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::kalman::{Acceleration, Covariance4, StateEstimate, StateVector};
use crate::scalar::Scalar;
use crate::tracker::{BoundingBox, Trajectory, TrajectoryEntry};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MotionKind<T> {
    ConstantVelocity,
    ConstantAcceleration {
        ax: T,
        ay: T,
    },
    /// Velocity rotated by `turn_rate` radians each frame.
    Turning {
        turn_rate: T,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec<T> {
    pub motion: MotionKind<T>,
    pub init: StateVector<T>,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub target_w: T,
    pub target_h: T,
    pub texture_seed: u64,
    pub distractors: usize,
    /// Inclusive frame ranges during which the target is occluded.
    pub occlusions: Vec<(usize, usize)>,
    pub seed: u64,
}

impl<T: Scalar> Default for ScenarioSpec<T> {
    fn default() -> Self {
        Self {
            motion: MotionKind::ConstantVelocity,
            init: StateVector::new(T::from_f64(64.0), T::from_f64(64.0), T::one(), T::zero()),
            frames: 40,
            width: 128,
            height: 128,
            target_w: T::from_f64(16.0),
            target_h: T::from_f64(16.0),
            texture_seed: 1,
            distractors: 0,
            occlusions: vec![],
            seed: 1,
        }
    }
}

impl<T: Scalar> ScenarioSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::Config("scenario needs at least 2 frames".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("frame size must be positive".into()));
        }
        if !(self.target_w > T::zero() && self.target_h > T::zero()) {
            return Err(Error::Config("target extent must be positive".into()));
        }
        if let MotionKind::Turning { turn_rate } = self.motion {
            if turn_rate.abs() > T::FRAC_PI_6() + T::from_f64(1e-12) {
                return Err(Error::Config(
                    "turn rate must not exceed pi/6 per frame".into(),
                ));
            }
        }
        for &(a, b) in &self.occlusions {
            if a > b || b >= self.frames {
                return Err(Error::Config(format!(
                    "occlusion interval [{a},{b}] outside 0..{}",
                    self.frames
                )));
            }
        }
        Ok(())
    }

    pub fn is_occluded(&self, frame: usize) -> bool {
        self.occlusions
            .iter()
            .any(|&(a, b)| frame >= a && frame <= b)
    }
}

/// Observation corruption: Gaussian position noise, random dropouts,
/// and distractor swaps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec<T> {
    pub sigma: T,
    pub dropout: f64,
    pub swap: f64,
}

impl<T: Scalar> Default for NoiseSpec<T> {
    fn default() -> Self {
        Self {
            sigma: T::zero(),
            dropout: 0.0,
            swap: 0.0,
        }
    }
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.sigma < T::zero() {
            return Err(Error::Config("sigma must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.dropout) || !(0.0..=1.0).contains(&self.swap) {
            return Err(Error::Config("probabilities must lie in [0,1]".into()));
        }
        Ok(())
    }
}

/// Ground truth: the trajectory plus the acceleration that drove each
/// transition, so the recursion can be replayed exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth<T> {
    pub trajectory: Trajectory<T>,
    /// accelerations[t] acts on the transition from frame t to t+1.
    pub accelerations: Vec<Acceleration<T>>,
}

/// Iterate the discrete dynamics (position += velocity, velocity +=
/// acceleration) so downstream filter-consistency checks have an exact
/// oracle.
pub fn generate_trajectory<T: Scalar>(spec: &ScenarioSpec<T>) -> Result<GroundTruth<T>> {
    spec.validate()?;
    let mut state = spec.init;
    let mut entries = Vec::with_capacity(spec.frames);
    let mut accels = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        entries.push(TrajectoryEntry {
            frame_index: t as u64,
            bbox: BoundingBox {
                cx: state.px,
                cy: state.py,
                w: spec.target_w,
                h: spec.target_h,
            },
            estimate: StateEstimate::new(state, Covariance4::zeros(), t as u64),
            observed: true,
            observation: None,
        });
        let accel = match spec.motion {
            MotionKind::ConstantVelocity => Acceleration::zero(),
            MotionKind::ConstantAcceleration { ax, ay } => Acceleration::new(ax, ay),
            MotionKind::Turning { turn_rate } => {
                let (s, c) = (turn_rate.sin(), turn_rate.cos());
                let nvx = c * state.vx - s * state.vy;
                let nvy = s * state.vx + c * state.vy;
                Acceleration::new(nvx - state.vx, nvy - state.vy)
            }
        };
        accels.push(accel);
        state = StateVector::new(
            state.px + state.vx,
            state.py + state.vy,
            state.vx + accel.ax,
            state.vy + accel.ay,
        );
    }
    Ok(GroundTruth {
        trajectory: Trajectory::from_entries(entries)?,
        accelerations: accels,
    })
}

/// Smooth band-limited texture built from random Gaussian blobs,
/// affinely mapped into an intensity range.
#[derive(Clone, Debug)]
struct BlobTexture {
    blobs: Vec<(f64, f64, f64, f64)>, // cx, cy, amplitude, sigma
    offset: f64,
    scale: f64,
    lo: f64,
}

impl BlobTexture {
    fn new(seed: u64, extent_x: f64, extent_y: f64, blob_count: usize, lo: f64, hi: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let margin = 0.15 * extent_x.max(extent_y).max(4.0);
        let blobs: Vec<_> = (0..blob_count)
            .map(|_| {
                let cx = rng.gen_range(-margin..extent_x + margin);
                let cy = rng.gen_range(-margin..extent_y + margin);
                let amp = rng.gen_range(-1.0..1.0f64);
                let sigma = rng.gen_range(0.06..0.2) * extent_x.max(extent_y).max(8.0);
                (cx, cy, amp, sigma)
            })
            .collect();
        let mut tex = Self {
            blobs,
            offset: 0.0,
            scale: 1.0,
            lo,
        };
        // normalize over a sampling of the domain
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let steps = 48;
        for j in 0..=steps {
            for i in 0..=steps {
                let v = tex.raw(
                    extent_x * i as f64 / steps as f64,
                    extent_y * j as f64 / steps as f64,
                );
                min = min.min(v);
                max = max.max(v);
            }
        }
        let span = (max - min).max(1e-9);
        tex.offset = min;
        tex.scale = (hi - lo) / span;
        tex
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        self.blobs
            .iter()
            .map(|&(cx, cy, amp, sigma)| {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                amp * (-d2 / (2.0 * sigma * sigma)).exp()
            })
            .sum()
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        (self.lo + (self.raw(x, y) - self.offset) * self.scale).clamp(0.0, 1.0)
    }
}

/// A pair of frames sampling the same smooth texture, the second
/// translated by (dx, dy). Exact samples of a continuous function, so
/// flow recovery has an analytic ground truth.
pub fn translated_texture_pair<T: Scalar>(
    seed: u64,
    size: usize,
    dx: f64,
    dy: f64,
) -> (GrayImage<T>, GrayImage<T>) {
    let tex = BlobTexture::new(seed, size as f64, size as f64, 40, 0.1, 0.9);
    let a = GrayImage::from_fn(size, size, |x, y| {
        T::from_f64(tex.value(x as f64, y as f64))
    })
    .unwrap();
    let b = GrayImage::from_fn(size, size, |x, y| {
        T::from_f64(tex.value(x as f64 - dx, y as f64 - dy))
    })
    .unwrap();
    (a, b)
}

fn box_in_frame<T: Scalar>(b: &BoundingBox<T>, w: usize, h: usize) -> bool {
    b.left() >= T::zero()
        && b.top() >= T::zero()
        && b.right() <= T::from_usize(w)
        && b.bottom() <= T::from_usize(h)
}

/// Constant-velocity distractor paths derived from the scenario seed,
/// reflecting off the frame borders so they stay visible.
pub fn distractor_trajectories<T: Scalar>(spec: &ScenarioSpec<T>) -> Vec<Trajectory<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_d157);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let (tw, th) = (spec.target_w.into_f64(), spec.target_h.into_f64());
    (0..spec.distractors)
        .map(|_| {
            let mut px = rng.gen_range(tw / 2.0..w - tw / 2.0);
            let mut py = rng.gen_range(th / 2.0..h - th / 2.0);
            let mut vx = rng.gen_range(-1.5..1.5f64);
            let mut vy = rng.gen_range(-1.5..1.5f64);
            let entries = (0..spec.frames)
                .map(|t| {
                    let e = TrajectoryEntry {
                        frame_index: t as u64,
                        bbox: BoundingBox {
                            cx: T::from_f64(px),
                            cy: T::from_f64(py),
                            w: spec.target_w,
                            h: spec.target_h,
                        },
                        estimate: StateEstimate::new(
                            StateVector::new(
                                T::from_f64(px),
                                T::from_f64(py),
                                T::from_f64(vx),
                                T::from_f64(vy),
                            ),
                            Covariance4::zeros(),
                            t as u64,
                        ),
                        observed: true,
                        observation: None,
                    };
                    px += vx;
                    py += vy;
                    if px < tw / 2.0 || px > w - tw / 2.0 {
                        vx = -vx;
                        px = px.clamp(tw / 2.0, w - tw / 2.0);
                    }
                    if py < th / 2.0 || py > h - th / 2.0 {
                        vy = -vy;
                        py = py.clamp(th / 2.0, h - th / 2.0);
                    }
                    e
                })
                .collect();
            Trajectory::from_entries(entries).expect("indices are sequential")
        })
        .collect()
}

fn draw_textured_box<T: Scalar>(
    canvas: &mut [f64],
    width: usize,
    height: usize,
    b: &BoundingBox<T>,
    tex: &BlobTexture,
) {
    let left = b.left().into_f64();
    let top = b.top().into_f64();
    let right = b.right().into_f64();
    let bottom = b.bottom().into_f64();
    let x0 = left.floor().max(0.0) as usize;
    let y0 = top.floor().max(0.0) as usize;
    let x1 = (right.ceil() as usize).min(width);
    let y1 = (bottom.ceil() as usize).min(height);
    for y in y0..y1 {
        for x in x0..x1 {
            let fx = x as f64;
            let fy = y as f64;
            if fx >= left && fx < right && fy >= top && fy < bottom {
                canvas[y * width + x] = tex.value(fx - left, fy - top);
            }
        }
    }
}

/// Render the scene: static cluttered background, textured target,
/// identically textured distractors, and occluder rectangles over the
/// target during occlusion intervals.
pub fn render_scene<T: Scalar>(
    traj: &Trajectory<T>,
    spec: &ScenarioSpec<T>,
) -> Result<Vec<GrayImage<T>>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    for e in traj.entries() {
        if !box_in_frame(&e.bbox, w, h) {
            return Err(Error::Config(format!(
                "target out of frame at frame {}",
                e.frame_index
            )));
        }
    }
    let background = BlobTexture::new(
        spec.texture_seed ^ 0xbac6_0000,
        w as f64,
        h as f64,
        60,
        0.30,
        0.45,
    );
    let target_tex = BlobTexture::new(
        spec.texture_seed,
        spec.target_w.into_f64(),
        spec.target_h.into_f64(),
        24,
        0.05,
        0.95,
    );
    let distractors = distractor_trajectories(spec);
    let mut bg = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            bg[y * w + x] = background.value(x as f64, y as f64);
        }
    }
    let occluder_intensity = 0.82;
    let mut frames = Vec::with_capacity(traj.len());
    for (t, e) in traj.entries().iter().enumerate() {
        let mut canvas = bg.clone();
        for d in &distractors {
            draw_textured_box(&mut canvas, w, h, &d.entries()[t].bbox, &target_tex);
        }
        draw_textured_box(&mut canvas, w, h, &e.bbox, &target_tex);
        if spec.is_occluded(t) {
            let occ = e.bbox.inflate(T::from_f64(1.3));
            let x0 = occ.left().into_f64().floor().max(0.0) as usize;
            let y0 = occ.top().into_f64().floor().max(0.0) as usize;
            let x1 = (occ.right().into_f64().ceil() as usize).min(w);
            let y1 = (occ.bottom().into_f64().ceil() as usize).min(h);
            for y in y0..y1 {
                for x in x0..x1 {
                    canvas[y * w + x] = occluder_intensity;
                }
            }
        }
        frames.push(GrayImage::from_fn(w, h, |x, y| {
            T::from_f64(canvas[y * w + x])
        })?);
    }
    Ok(frames)
}

/// Corrupt ground truth into a synthetic position-sensor stream.
///
/// Per frame, in order: dropout draw, swap draw, distractor pick, two
/// Gaussian draws. All draws happen every frame so the stream for frame
/// t never depends on which branch earlier frames took.
pub fn corrupt_observations<T: Scalar>(
    truth: &Trajectory<T>,
    distractors: &[Trajectory<T>],
    noise: &NoiseSpec<T>,
    seed: u64,
) -> Result<Vec<Option<BoundingBox<T>>>> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut out = Vec::with_capacity(truth.len());
    for e in truth.entries() {
        let drop_u: f64 = rng.gen();
        let swap_u: f64 = rng.gen();
        let pick: usize = rng.gen_range(0..distractors.len().max(1));
        let gx: f64 = normal.sample(&mut rng);
        let gy: f64 = normal.sample(&mut rng);
        if drop_u < noise.dropout {
            out.push(None);
        } else if swap_u < noise.swap && !distractors.is_empty() {
            out.push(Some(
                distractors[pick].entries()[e.frame_index as usize].bbox,
            ));
        } else {
            let sigma = noise.sigma;
            out.push(Some(BoundingBox {
                cx: e.bbox.cx + sigma * T::from_f64(gx),
                cy: e.bbox.cy + sigma * T::from_f64(gy),
                w: e.bbox.w,
                h: e.bbox.h,
            }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_velocity_positions() {
        let spec = ScenarioSpec::<f64> {
            init: StateVector::new(0.0, 0.0, 1.0, 0.0),
            frames: 4,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        let xs: Vec<f64> = truth
            .trajectory
            .entries()
            .iter()
            .map(|e| e.bbox.cx)
            .collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn constant_acceleration_discrete_recursion() {
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::ConstantAcceleration { ax: 1.0, ay: 0.0 },
            init: StateVector::new(0.0, 0.0, 1.0, 0.0),
            frames: 4,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        let xs: Vec<f64> = truth
            .trajectory
            .entries()
            .iter()
            .map(|e| e.bbox.cx)
            .collect();
        // discrete recursion, not 1/2 a t^2
        assert_eq!(xs, vec![0.0, 1.0, 3.0, 6.0]);
    }

    #[test]
    fn turning_rotates_velocity() {
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::Turning {
                turn_rate: std::f64::consts::FRAC_PI_6,
            },
            init: StateVector::new(0.0, 0.0, 1.0, 0.0),
            frames: 3,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        let v1 = truth.trajectory.entries()[1].estimate.state;
        assert!((v1.vx - 30f64.to_radians().cos()).abs() < 1e-12);
        assert!((v1.vy - 30f64.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn truth_satisfies_recursion_with_recorded_accelerations() {
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::Turning { turn_rate: 0.2 },
            init: StateVector::new(40.0, 40.0, 1.5, 0.0),
            frames: 30,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        for t in 0..29 {
            let s = truth.trajectory.entries()[t].estimate.state;
            let n = truth.trajectory.entries()[t + 1].estimate.state;
            let a = truth.accelerations[t];
            assert_eq!(n.px, s.px + s.vx);
            assert_eq!(n.py, s.py + s.vy);
            assert_eq!(n.vx, s.vx + a.ax);
            assert_eq!(n.vy, s.vy + a.ay);
        }
    }

    #[test]
    fn turning_bound_enforced() {
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::Turning { turn_rate: 1.0 },
            ..ScenarioSpec::default()
        };
        assert!(generate_trajectory(&spec).is_err());
        // and within bound the per-frame direction change stays <= pi/6
        let spec = ScenarioSpec::<f64> {
            motion: MotionKind::Turning {
                turn_rate: std::f64::consts::FRAC_PI_6,
            },
            init: StateVector::new(64.0, 64.0, 1.0, 0.0),
            frames: 20,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        for t in 0..19 {
            let a = truth.trajectory.entries()[t].estimate.state;
            let b = truth.trajectory.entries()[t + 1].estimate.state;
            let dot = a.vx * b.vx + a.vy * b.vy;
            let na = (a.vx * a.vx + a.vy * a.vy).sqrt();
            let nb = (b.vx * b.vx + b.vy * b.vy).sqrt();
            let angle = (dot / (na * nb)).clamp(-1.0, 1.0).acos();
            assert!(angle <= std::f64::consts::FRAC_PI_6 + 1e-9);
        }
    }

    fn small_spec() -> ScenarioSpec<f64> {
        ScenarioSpec {
            init: StateVector::new(32.0, 32.0, 1.0, 0.5),
            frames: 12,
            width: 64,
            height: 64,
            target_w: 10.0,
            target_h: 10.0,
            ..ScenarioSpec::default()
        }
    }

    #[test]
    fn render_places_target_texture() {
        let spec = small_spec();
        let truth = generate_trajectory(&spec).unwrap();
        let frames = render_scene(&truth.trajectory, &spec).unwrap();
        assert_eq!(frames.len(), 12);
        let b0 = truth.trajectory.entries()[0].bbox;
        let (x0, y0, w, h) = b0.int_rect(64, 64);
        // pixel range is wider inside the target than the background band
        let mut inside_min = 1.0f64;
        let mut inside_max = 0.0f64;
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                inside_min = inside_min.min(frames[0].at(x, y));
                inside_max = inside_max.max(frames[0].at(x, y));
            }
        }
        assert!(
            inside_max - inside_min > 0.3,
            "target should be high contrast"
        );
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn occlusion_overwrites_target() {
        let mut spec = small_spec();
        spec.occlusions = vec![(5, 8)];
        let truth = generate_trajectory(&spec).unwrap();
        let frames = render_scene(&truth.trajectory, &spec).unwrap();
        for t in 5..=8 {
            let b = truth.trajectory.entries()[t].bbox;
            let (x0, y0, w, h) = b.int_rect(64, 64);
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    assert!((frames[t].at(x, y) - 0.82).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn distractors_share_target_texture() {
        let mut spec = small_spec();
        spec.distractors = 2;
        let truth = generate_trajectory(&spec).unwrap();
        let frames = render_scene(&truth.trajectory, &spec).unwrap();
        let ds = distractor_trajectories(&spec);
        assert_eq!(ds.len(), 2);
        // each distractor box region must contain high-contrast texture too
        for d in &ds {
            let b = d.entries()[0].bbox;
            let (x0, y0, w, h) = b.int_rect(64, 64);
            let mut min = 1.0f64;
            let mut max = 0.0f64;
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    min = min.min(frames[0].at(x, y));
                    max = max.max(frames[0].at(x, y));
                }
            }
            assert!(max - min > 0.2, "distractor region should be textured");
        }
    }

    #[test]
    fn render_rejects_out_of_frame_target() {
        let spec = ScenarioSpec::<f64> {
            init: StateVector::new(60.0, 32.0, 3.0, 0.0),
            frames: 12,
            width: 64,
            height: 64,
            target_w: 10.0,
            target_h: 10.0,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        assert!(render_scene(&truth.trajectory, &spec).is_err());
    }

    #[test]
    fn clean_observations_equal_truth() {
        let spec = small_spec();
        let truth = generate_trajectory(&spec).unwrap();
        let obs = corrupt_observations(&truth.trajectory, &[], &NoiseSpec::default(), 7).unwrap();
        for (o, e) in obs.iter().zip(truth.trajectory.entries()) {
            assert_eq!(o.unwrap(), e.bbox);
        }
    }

    #[test]
    fn full_dropout_gives_no_observations() {
        let spec = small_spec();
        let truth = generate_trajectory(&spec).unwrap();
        let noise = NoiseSpec {
            dropout: 1.0,
            ..NoiseSpec::default()
        };
        let obs = corrupt_observations(&truth.trajectory, &[], &noise, 7).unwrap();
        assert!(obs.iter().all(|o| o.is_none()));
    }

    #[test]
    fn noise_sigma_matches_sample_std() {
        let spec = ScenarioSpec::<f64> {
            init: StateVector::new(500.0, 500.0, 0.0, 0.0),
            frames: 1000,
            width: 1000,
            height: 1000,
            ..ScenarioSpec::default()
        };
        let truth = generate_trajectory(&spec).unwrap();
        let noise = NoiseSpec {
            sigma: 2.0,
            ..NoiseSpec::default()
        };
        let obs = corrupt_observations(&truth.trajectory, &[], &noise, 42).unwrap();
        for axis in 0..2 {
            let devs: Vec<f64> = obs
                .iter()
                .zip(truth.trajectory.entries())
                .map(|(o, e)| {
                    let o = o.unwrap();
                    if axis == 0 {
                        o.cx - e.bbox.cx
                    } else {
                        o.cy - e.bbox.cy
                    }
                })
                .collect();
            let mean = devs.iter().sum::<f64>() / devs.len() as f64;
            let var =
                devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (devs.len() - 1) as f64;
            let std = var.sqrt();
            assert!((1.8..=2.2).contains(&std), "axis {axis} sample std {std}");
        }
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let mut spec = small_spec();
        spec.distractors = 2;
        spec.occlusions = vec![(3, 5)];
        let t1 = generate_trajectory(&spec).unwrap();
        let t2 = generate_trajectory(&spec).unwrap();
        assert_eq!(t1, t2);
        let f1 = render_scene(&t1.trajectory, &spec).unwrap();
        let f2 = render_scene(&t2.trajectory, &spec).unwrap();
        assert_eq!(f1, f2);
        let noise = NoiseSpec {
            sigma: 1.0,
            dropout: 0.1,
            swap: 0.1,
        };
        let ds = distractor_trajectories(&spec);
        let o1 = corrupt_observations(&t1.trajectory, &ds, &noise, 5).unwrap();
        let o2 = corrupt_observations(&t2.trajectory, &ds, &noise, 5).unwrap();
        assert_eq!(o1, o2);
    }
}
