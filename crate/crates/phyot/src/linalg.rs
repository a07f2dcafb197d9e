//! Small fixed-size linear algebra for the 4-state filter.
//!
//! Hand-rolled on purpose: the filter only ever needs 4x4 and 4x2
//! arithmetic plus a symmetric eigensolver for gain computation and
//! covariance health checks.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec4<T>(pub [T; 4]);

impl<T: Scalar> Vec4<T> {
    pub fn zeros() -> Self {
        Self([T::zero(); 4])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..4 {
            r.0[i] += o.0[i];
        }
        r
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..4 {
            r.0[i] -= o.0[i];
        }
        r
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Row-major 4x4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

impl<T: Scalar> Default for Mat4<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Scalar> Mat4<T> {
    pub fn zeros() -> Self {
        Self([[T::zero(); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn diag(d: [T; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, &v) in d.iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn scaled_identity(s: T) -> Self {
        Self::diag([s; 4])
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] -= o.0[i][j];
            }
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = T::zero();
                for k in 0..4 {
                    s += self.0[i][k] * o.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: Vec4<T>) -> Vec4<T> {
        let mut r = Vec4::zeros();
        for i in 0..4 {
            let mut s = T::zero();
            for k in 0..4 {
                s += self.0[i][k] * v.0[k];
            }
            r.0[i] = s;
        }
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for row in &self.0 {
            for &v in row {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|v| v.is_finite()))
    }

    /// (M + M^T) / 2
    pub fn symmetrize(&self) -> Self {
        let half = T::from_f64(0.5);
        self.add(&self.transpose()).scale(half)
    }

    /// Eigenvalues and eigenvectors of a symmetric matrix via cyclic Jacobi.
    /// Eigenvectors are the columns of the returned matrix.
    pub fn sym_eigen(&self) -> (Vec4<T>, Mat4<T>) {
        let mut a = *self;
        let mut v = Mat4::identity();
        let eps = T::from_f64(1e-30);
        for _sweep in 0..50 {
            let mut off = T::zero();
            for p in 0..4 {
                for q in (p + 1)..4 {
                    off += a.0[p][q] * a.0[p][q];
                }
            }
            if off <= eps * (T::one() + a.max_abs() * a.max_abs()) {
                break;
            }
            for p in 0..4 {
                for q in (p + 1)..4 {
                    let apq = a.0[p][q];
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a.0[p][p];
                    let aqq = a.0[q][q];
                    let theta = (aqq - app) / (T::from_f64(2.0) * apq);
                    let t = {
                        let sign = if theta >= T::zero() {
                            T::one()
                        } else {
                            -T::one()
                        };
                        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // rotate rows/cols p, q
                    for k in 0..4 {
                        let akp = a.0[k][p];
                        let akq = a.0[k][q];
                        a.0[k][p] = c * akp - s * akq;
                        a.0[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a.0[p][k];
                        let aqk = a.0[q][k];
                        a.0[p][k] = c * apk - s * aqk;
                        a.0[q][k] = s * apk + c * aqk;
                    }
                    for k in 0..4 {
                        let vkp = v.0[k][p];
                        let vkq = v.0[k][q];
                        v.0[k][p] = c * vkp - s * vkq;
                        v.0[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        (Vec4([a.0[0][0], a.0[1][1], a.0[2][2], a.0[3][3]]), v)
    }

    /// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
    /// Eigenvalues below `rel_tol * max_eig` are treated as zero.
    #[allow(clippy::needless_range_loop)]
    pub fn pinv_sym(&self, rel_tol: T) -> Self {
        let (vals, vecs) = self.sym_eigen();
        let max_eig = vals.0.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = rel_tol * max_eig;
        let mut inv_d = [T::zero(); 4];
        for i in 0..4 {
            if vals.0[i].abs() > tol {
                inv_d[i] = T::one() / vals.0[i];
            }
        }
        // V * D^+ * V^T
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = T::zero();
                for k in 0..4 {
                    s += vecs.0[i][k] * inv_d[k] * vecs.0[j][k];
                }
                m.0[i][j] = s;
            }
        }
        m
    }
}

/// Row-major 4x2 matrix (the filter's input matrix shape).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat4x2<T>(pub [[T; 2]; 4]);

impl<T: Scalar> Mat4x2<T> {
    pub fn mul_vec2(&self, v: Vec2<T>) -> Vec4<T> {
        let mut r = Vec4::zeros();
        for i in 0..4 {
            r.0[i] = self.0[i][0] * v.x + self.0[i][1] * v.y;
        }
        r
    }
}
