//! Augmented-state linear-Gaussian filter.
//!
//! State is [px, py, vx, vy]; the dynamics shift position by velocity
//! each frame and drive velocity by an external acceleration input.
//! Observations cover the full state (position from a tracker sensor,
//! velocity from optical flow), so H = I and the gain reduces to
//! K = P (P + R)^-1.

use crate::error::{Error, Result};
use crate::linalg::{Mat4, Mat4x2, Vec2, Vec4};
use crate::scalar::Scalar;

/// Position + velocity state, pixel units, per-frame time base.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateVector<T> {
    pub px: T,
    pub py: T,
    pub vx: T,
    pub vy: T,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(px: T, py: T, vx: T, vy: T) -> Self {
        Self { px, py, vx, vy }
    }

    pub fn to_vec4(self) -> Vec4<T> {
        Vec4([self.px, self.py, self.vx, self.vy])
    }

    pub fn from_vec4(v: Vec4<T>) -> Self {
        Self {
            px: v.0[0],
            py: v.0[1],
            vx: v.0[2],
            vy: v.0[3],
        }
    }

    pub fn is_finite(self) -> bool {
        self.to_vec4().is_finite()
    }
}

/// 4x4 state covariance. Must stay symmetric and PSD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covariance4<T>(pub Mat4<T>);

impl<T: Scalar> Default for Covariance4<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Scalar> Covariance4<T> {
    pub fn zeros() -> Self {
        Self(Mat4::zeros())
    }

    pub fn scaled_identity(s: T) -> Self {
        Self(Mat4::scaled_identity(s))
    }

    /// Relative asymmetry: max |P - P^T| / max(1, max |P|).
    pub fn asymmetry(&self) -> T {
        let scale = T::one().max(self.0.max_abs());
        self.0.sub(&self.0.transpose()).max_abs() / scale
    }

    pub fn min_eigenvalue(&self) -> T {
        let (vals, _) = self.0.sym_eigen();
        vals.0.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// Symmetric within 1e-9 relative, eigenvalues >= -1e-9 * trace.
    pub fn is_healthy(&self) -> bool {
        if !self.0.is_finite() {
            return false;
        }
        let sym_tol = T::from_f64(1e-9);
        if self.asymmetry() > sym_tol {
            return false;
        }
        let floor = -sym_tol * self.0.trace().abs().max(T::one());
        self.min_eigenvalue() >= floor
    }
}

/// Acceleration input, pixels/frame^2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Acceleration<T> {
    pub ax: T,
    pub ay: T,
}

impl<T: Scalar> Acceleration<T> {
    pub fn new(ax: T, ay: T) -> Self {
        Self { ax, ay }
    }

    pub fn zero() -> Self {
        Self {
            ax: T::zero(),
            ay: T::zero(),
        }
    }

    pub fn is_finite(self) -> bool {
        self.ax.is_finite() && self.ay.is_finite()
    }
}

/// Transition/input matrices and noise covariances of the motion model.
///
/// The default constructor pins A and B to the unit-timestep constants:
/// position gains velocity, velocity gains acceleration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionModel<T> {
    pub a: Mat4<T>,
    pub b: Mat4x2<T>,
    pub q: Mat4<T>,
    pub r: Mat4<T>,
    /// Fixed at one frame; velocities and accelerations are per-frame.
    pub dt: T,
}

impl<T: Scalar> Default for MotionModel<T> {
    fn default() -> Self {
        Self::with_noise(
            Mat4::scaled_identity(T::from_f64(1e-2)),
            Mat4::diag([T::one(), T::one(), T::from_f64(0.25), T::from_f64(0.25)]),
        )
    }
}

impl<T: Scalar> MotionModel<T> {
    pub fn transition_matrix() -> Mat4<T> {
        let o = T::zero();
        let l = T::one();
        Mat4([[l, o, l, o], [o, l, o, l], [o, o, l, o], [o, o, o, l]])
    }

    pub fn input_matrix() -> Mat4x2<T> {
        let o = T::zero();
        let l = T::one();
        Mat4x2([[o, o], [o, o], [l, o], [o, l]])
    }

    pub fn with_noise(q: Mat4<T>, r: Mat4<T>) -> Self {
        Self {
            a: Self::transition_matrix(),
            b: Self::input_matrix(),
            q,
            r,
            dt: T::one(),
        }
    }

    /// Diagonal noise shorthand: Q = q_scale * I, R = diag(r_pos, r_pos, r_vel, r_vel).
    pub fn diagonal_noise(q_scale: T, r_pos: T, r_vel: T) -> Self {
        Self::with_noise(
            Mat4::scaled_identity(q_scale),
            Mat4::diag([r_pos, r_pos, r_vel, r_vel]),
        )
    }
}

/// Filter belief at a frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateEstimate<T> {
    pub state: StateVector<T>,
    pub cov: Covariance4<T>,
    pub frame_index: u64,
}

impl<T: Scalar> StateEstimate<T> {
    pub fn new(state: StateVector<T>, cov: Covariance4<T>, frame_index: u64) -> Self {
        Self {
            state,
            cov,
            frame_index,
        }
    }
}

/// Time update: state' = A state + B accel, cov' = A cov A^T + Q.
pub fn predict<T: Scalar>(
    prev: &StateEstimate<T>,
    accel: Acceleration<T>,
    model: &MotionModel<T>,
) -> Result<StateEstimate<T>> {
    if !prev.state.is_finite() || !prev.cov.0.is_finite() {
        return Err(Error::InvalidInput("non-finite state estimate".into()));
    }
    if !accel.is_finite() {
        return Err(Error::InvalidInput("non-finite acceleration".into()));
    }
    if !model.a.is_finite() || !model.q.is_finite() {
        return Err(Error::InvalidInput("non-finite motion model".into()));
    }
    let state = model
        .a
        .mul_vec(prev.state.to_vec4())
        .add(model.b.mul_vec2(Vec2::new(accel.ax, accel.ay)));
    let cov = model
        .a
        .mul(&prev.cov.0)
        .mul(&model.a.transpose())
        .add(&model.q);
    Ok(StateEstimate {
        state: StateVector::from_vec4(state),
        cov: Covariance4(cov.symmetrize()),
        frame_index: prev.frame_index + 1,
    })
}

/// Kalman gain for a full-state observation: K = P (P + R)^+.
///
/// The innovation covariance P + R is PSD, and range(P) always lies in
/// range(P + R), so the pseudo-inverse yields the exact gain even when
/// P + R is singular (e.g. both noise-free). A genuinely indefinite or
/// non-finite innovation covariance is reported as a singularity error.
pub fn gain<T: Scalar>(prior_cov: &Covariance4<T>, model: &MotionModel<T>) -> Result<Mat4<T>> {
    let s = prior_cov.0.add(&model.r).symmetrize();
    if !s.is_finite() {
        return Err(Error::NumericalSingularity(
            "non-finite innovation covariance".into(),
        ));
    }
    let (vals, _) = s.sym_eigen();
    let max_eig = vals.0.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let neg_floor = -T::from_f64(1e-9) * max_eig.max(T::one());
    if vals.0.iter().any(|&v| v < neg_floor) {
        return Err(Error::NumericalSingularity(
            "innovation covariance is not positive semidefinite".into(),
        ));
    }
    let k = prior_cov.0.mul(&s.pinv_sym(T::from_f64(1e-12)));
    if !k.is_finite() {
        return Err(Error::NumericalSingularity("non-finite gain".into()));
    }
    Ok(k)
}

/// Measurement update with a full-state observation.
pub fn update<T: Scalar>(
    prior: &StateEstimate<T>,
    obs: StateVector<T>,
    model: &MotionModel<T>,
) -> Result<StateEstimate<T>> {
    if !obs.is_finite() {
        return Err(Error::InvalidInput("non-finite observation".into()));
    }
    let k = gain(&prior.cov, model)?;
    let innovation = obs.to_vec4().sub(prior.state.to_vec4());
    let state = prior.state.to_vec4().add(k.mul_vec(innovation));
    let cov = Mat4::identity().sub(&k).mul(&prior.cov.0).symmetrize();
    Ok(StateEstimate {
        state: StateVector::from_vec4(state),
        cov: Covariance4(cov),
        frame_index: prior.frame_index,
    })
}

/// One filter cycle: predict, then update when an observation is present.
pub fn step<T: Scalar>(
    prev: &StateEstimate<T>,
    accel: Acceleration<T>,
    obs: Option<StateVector<T>>,
    model: &MotionModel<T>,
) -> Result<StateEstimate<T>> {
    let prior = predict(prev, accel, model)?;
    match obs {
        Some(z) => update(&prior, z, model),
        None => Ok(prior),
    }
}
