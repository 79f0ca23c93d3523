use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

use crate::geometry::{Pixel, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanParams {
    /// Diagonal process noise for `(x, y, vx, vy)`, px².
    pub process: [f64; 4],
    /// Diagonal noise of position measurements, px².
    pub measurement: [f64; 2],
    /// Diagonal noise of velocity observations, (px/frame)².
    pub velocity_measurement: [f64; 2],
    /// Initial diagonal covariance.
    pub initial: [f64; 4],
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self {
            process: [1.0, 1.0, 4.0, 4.0],
            measurement: [4.0, 4.0],
            velocity_measurement: [1.0, 1.0],
            initial: [10.0, 10.0, 100.0, 100.0],
        }
    }
}

/// One quadrilateral corner with its constant-velocity filter.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerState {
    /// Reported position: the measurement when one was available, the
    /// filtered estimate otherwise.
    pub position: Pixel,
    /// `(x, y, vx, vy)`.
    pub x: Vector4<f64>,
    pub p: Matrix4<f64>,
    pub visible: bool,
}

impl CornerState {
    pub fn new(position: Pixel, params: &KalmanParams) -> Self {
        Self {
            position,
            x: Vector4::new(position.u, position.v, 0.0, 0.0),
            p: Matrix4::from_diagonal(&Vector4::from(params.initial)),
            visible: true,
        }
    }

    pub fn with_velocity(mut self, v: Vec2) -> Self {
        self.x[2] = v.x;
        self.x[3] = v.y;
        self
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.x[2], self.x[3])
    }

    pub fn filtered_position(&self) -> Pixel {
        Pixel::new(self.x[0], self.x[1])
    }
}

fn update(x: &mut Vector4<f64>, p: &mut Matrix4<f64>, h: &Matrix2x4<f64>, z: Vector2<f64>, r: &Matrix2<f64>) {
    let s = h * *p * h.transpose() + r;
    let Some(s_inv) = s.try_inverse() else { return };
    let k = *p * h.transpose() * s_inv;
    *x += k * (z - h * *x);
    // Joseph form keeps the covariance symmetric positive semi-definite.
    let i_kh = Matrix4::identity() - k * h;
    let np = i_kh * *p * i_kh.transpose() + k * r * k.transpose();
    *p = (np + np.transpose()) * 0.5;
}

/// Advances a corner by one frame under a constant-velocity model.
///
/// With a position `measurement` the state is predicted and then corrected.
/// A `velocity_obs` (used only when no measurement is given) describes the
/// displacement over the frame being predicted, so it corrects the velocity
/// first and the prediction then carries the corrected velocity.
pub fn kalman_step(
    c: &CornerState,
    measurement: Option<Pixel>,
    velocity_obs: Option<Vec2>,
    params: &KalmanParams,
) -> CornerState {
    #[rustfmt::skip]
    let f = Matrix4::new(
        1.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    let q = Matrix4::from_diagonal(&Vector4::from(params.process));
    let (mut x, mut p) = (c.x, c.p);
    if let (None, Some(v)) = (measurement, velocity_obs) {
        let h = Matrix2x4::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let r = Matrix2::from_diagonal(&Vector2::from(params.velocity_measurement));
        update(&mut x, &mut p, &h, Vector2::new(v.x, v.y), &r);
    }
    x = f * x;
    p = f * p * f.transpose() + q;
    if let Some(m) = measurement {
        let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let r = Matrix2::from_diagonal(&Vector2::from(params.measurement));
        update(&mut x, &mut p, &h, Vector2::new(m.u, m.v), &r);
    }
    CornerState { position: Pixel::new(x[0], x[1]), x, p, visible: c.visible }
}

/// Blends each group's velocity with the mean of all four:
/// `v_corner_i = α·v_i + (1 − α)·mean(v)`.
pub fn corner_velocity(group_velocities: &[Vec2; 4], alpha: f64) -> [Vec2; 4] {
    let mean = group_velocities.iter().sum::<Vec2>() / 4.0;
    group_velocities.map(|v| v * alpha + mean * (1.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_psd(p: &Matrix4<f64>) -> bool {
        (p - p.transpose()).norm() < 1e-9 && p.symmetric_eigenvalues().iter().all(|&e| e >= -1e-9)
    }

    #[test]
    fn constant_velocity_prediction() {
        let k = KalmanParams::default();
        let c = CornerState::new(Pixel::new(0.0, 0.0), &k).with_velocity(Vec2::new(3.0, 0.0));
        let n = kalman_step(&c, None, None, &k);
        assert_eq!(n.position, Pixel::new(3.0, 0.0));
        assert!(is_psd(&n.p));
    }

    #[test]
    fn repeated_measurements_converge() {
        let k = KalmanParams::default();
        let mut c = CornerState::new(Pixel::new(0.0, 0.0), &k);
        let target = Pixel::new(10.0, -4.0);
        let mut last_var = f64::INFINITY;
        for i in 0..60 {
            c = kalman_step(&c, Some(target), None, &k);
            assert!(is_psd(&c.p));
            if i > 0 {
                assert!(c.p[(0, 0)] <= last_var + 1e-12);
            }
            last_var = c.p[(0, 0)];
        }
        assert!(c.filtered_position().distance(target) < 1e-2);
    }

    #[test]
    fn velocity_updates_approach_observation() {
        let k = KalmanParams::default();
        let mut c = CornerState::new(Pixel::new(0.0, 0.0), &k);
        let obs = Vec2::new(5.0, 0.0);
        let mut err = (c.velocity() - obs).norm();
        for _ in 0..30 {
            c = kalman_step(&c, None, Some(obs), &k);
            let e = (c.velocity() - obs).norm();
            assert!(e <= err + 1e-12);
            err = e;
            assert!(is_psd(&c.p));
        }
        assert!(err < 1e-2);
    }

    #[test]
    fn eq8_examples() {
        let v = [Vec2::new(2.0, 1.0); 4];
        for a in [0.1, 0.5, 0.9] {
            assert!(corner_velocity(&v, a).iter().all(|c| (c - Vec2::new(2.0, 1.0)).norm() < 1e-15));
        }
        let v = [Vec2::new(4.0, 0.0), Vec2::zeros(), Vec2::zeros(), Vec2::zeros()];
        let c = corner_velocity(&v, 0.8);
        assert!((c[0] - Vec2::new(3.4, 0.0)).norm() < 1e-12);
        for ci in &c[1..] {
            assert!((ci - Vec2::new(0.2, 0.0)).norm() < 1e-12);
        }
        assert_eq!(corner_velocity(&v, 1.0), v);
    }
}
