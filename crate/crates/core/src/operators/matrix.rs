use serde::{Deserialize, Serialize};

/// Symmetric 2x2 matrix, stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl SymMat2 {
    pub const fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Self { m11, m12, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    /// `mu_1 v1 v1^T + mu_2 v2 v2^T` with `v1 = (cos t, sin t)` and `v2` its
    /// counterclockwise normal.
    pub fn from_eigen(mu1: f64, mu2: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(mu1 * c * c + mu2 * s * s, (mu1 - mu2) * c * s, mu1 * s * s + mu2 * c * c)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11.mul_add(self.m22, -self.m12 * self.m12)
    }

    /// Ordered eigenvalues `(mu1, mu2)` with `mu1 <= mu2`.
    ///
    /// The eigenvalue of larger magnitude comes from the closed form and the
    /// other one from the determinant, which keeps the product accurate when
    /// the two have very different sizes.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.m11 + self.m22);
        let radius = (0.5 * (self.m11 - self.m22)).hypot(self.m12);
        let det = self.det();
        let (a, b) = if mean >= 0.0 {
            let big = mean + radius;
            (if big != 0.0 { det / big } else { 0.0 }, big)
        } else {
            let big = mean - radius;
            (big, det / big)
        };
        (a.min(b), a.max(b))
    }

    /// Angle of the eigenvector belonging to the larger eigenvalue.
    pub fn principal_angle(&self) -> f64 {
        0.5 * (2.0 * self.m12).atan2(self.m11 - self.m22)
    }

    /// `O^T M O` for the counterclockwise rotation `O` by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let (a, b, d) = (self.m11, self.m12, self.m22);
        Self::new(
            c * c * a + 2.0 * c * s * b + s * s * d,
            -c * s * a + (c * c - s * s) * b + c * s * d,
            s * s * a - 2.0 * c * s * b + c * c * d,
        )
    }

    /// `tr(self * other)`.
    pub fn frobenius_dot(&self, other: &SymMat2) -> f64 {
        self.m11 * other.m11 + 2.0 * self.m12 * other.m12 + self.m22 * other.m22
    }

    pub fn spectral_norm(&self) -> f64 {
        let (a, b) = self.eigenvalues();
        a.abs().max(b.abs())
    }

    pub fn scale(&self, t: f64) -> Self {
        Self::new(t * self.m11, t * self.m12, t * self.m22)
    }

    pub fn add(&self, other: &SymMat2) -> Self {
        Self::new(self.m11 + other.m11, self.m12 + other.m12, self.m22 + other.m22)
    }
}
