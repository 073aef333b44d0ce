use nalgebra::{Matrix3, Point2, Point3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::session::{SCREEN_H, SCREEN_W};

/// Native resolution of the IR camera.
pub const SENSOR_W: f64 = 570.0;
pub const SENSOR_H: f64 = 300.0;

/// Axis-aligned rectangle in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, PipelineError> {
        let r = Rect { x, y, w, h };
        r.check()?;
        Ok(r)
    }

    pub fn sensor() -> Self {
        Rect { x: 0.0, y: 0.0, w: SENSOR_W, h: SENSOR_H }
    }

    pub fn screen() -> Self {
        Rect { x: 0.0, y: 0.0, w: SCREEN_W as f64, h: SCREEN_H as f64 }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if !(self.w > 0.0 && self.h > 0.0) || !self.x.is_finite() || !self.y.is_finite() {
            return Err(PipelineError::InvalidConfig(format!("rect must have positive extent, got {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point2<f64>) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }

    pub fn clamp(&self, p: Point2<f64>) -> Point2<f64> {
        Point2::new(p.x.clamp(self.x, self.x + self.w), p.y.clamp(self.y, self.y + self.h))
    }

    pub fn center(&self) -> Point2<f64> {
        Point2::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

/// Maps the sensing area onto the screen so that corners meet corners.
pub fn absolute_map(p: Point2<f64>, s: &Rect, scr: &Rect) -> Result<Point2<f64>, PipelineError> {
    if !s.contains(p) {
        return Err(PipelineError::OutOfRange { x: p.x, y: p.y });
    }
    let u = (p.x - s.x) / s.w;
    let v = (p.y - s.y) / s.h;
    Ok(Point2::new(scr.x + u * scr.w, scr.y + v * scr.h))
}

/// Rectified, parallel-axis stereo pair. The left camera sits at the origin
/// looking down +z; the right camera is translated by `baseline` along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoRig {
    /// Focal length in pixels, shared by both cameras.
    pub f: f64,
    /// Baseline in mm.
    pub baseline: f64,
    pub principal_left: [f64; 2],
    pub principal_right: [f64; 2],
}

impl Default for StereoRig {
    fn default() -> Self {
        let c = [SENSOR_W / 2.0, SENSOR_H / 2.0];
        StereoRig { f: 800.0, baseline: 60.0, principal_left: c, principal_right: c }
    }
}

impl StereoRig {
    pub fn check(&self) -> Result<(), PipelineError> {
        if !(self.f > 0.0 && self.baseline > 0.0) {
            return Err(PipelineError::InvalidConfig(format!(
                "stereo rig needs f > 0 and baseline > 0, got f={} B={}",
                self.f, self.baseline
            )));
        }
        Ok(())
    }

    /// Projects a point (mm, left-camera frame) into both images.
    pub fn project(&self, p: Point3<f64>) -> (Point2<f64>, Point2<f64>) {
        let [lx, ly] = self.principal_left;
        let [rx, ry] = self.principal_right;
        let left = Point2::new(self.f * p.x / p.z + lx, self.f * p.y / p.z + ly);
        let right = Point2::new(self.f * (p.x - self.baseline) / p.z + rx, self.f * p.y / p.z + ry);
        (left, right)
    }
}

pub fn triangulate(left: Point2<f64>, right: Point2<f64>, rig: &StereoRig) -> Result<Point3<f64>, PipelineError> {
    let xl = left.x - rig.principal_left[0];
    let xr = right.x - rig.principal_right[0];
    let disparity = xl - xr;
    if !(disparity > 0.0) {
        return Err(PipelineError::NoDepth { disparity });
    }
    let z = rig.f * rig.baseline / disparity;
    let yl = left.y - rig.principal_left[1];
    Ok(Point3::new(xl * z / rig.f, yl * z / rig.f, z))
}

/// Plane `{p : normal·p + d = 0}` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchPlane {
    pub normal: [f64; 3],
    pub d: f64,
    pub fit_rms: f64,
}

impl TouchPlane {
    pub fn normal(&self) -> Vector3<f64> {
        Vector3::from(self.normal)
    }

    /// Orthonormal in-plane basis (u, v): the camera x and y axes projected
    /// onto the plane.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal();
        let project = |a: Vector3<f64>| a - n * a.dot(&n);
        let mut u = project(Vector3::x());
        if u.norm() < 1e-9 {
            u = project(Vector3::z());
        }
        let u = u.normalize();
        let y = project(Vector3::y());
        let v = (y - u * y.dot(&u)).try_normalize(1e-12).unwrap_or_else(|| n.cross(&u));
        (u, v)
    }

    /// In-plane coordinates of `p` in mm.
    pub fn to_plane_coords(&self, p: Point3<f64>) -> [f64; 2] {
        let (u, v) = self.basis();
        [p.coords.dot(&u), p.coords.dot(&v)]
    }
}

/// Total-least-squares plane through `cloud`.
///
/// The normal points toward `viewpoint` when given (pass the camera
/// position); otherwise it is chosen with a non-negative z component.
pub fn fit_touch_plane(cloud: &[Point3<f64>], viewpoint: Option<Point3<f64>>) -> Result<TouchPlane, PipelineError> {
    if cloud.len() < 3 {
        return Err(PipelineError::DegenerateGeometry(format!(
            "need at least 3 points, got {}",
            cloud.len()
        )));
    }
    let n = cloud.len() as f64;
    let centroid = cloud.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let mut scatter = Matrix3::zeros();
    for p in cloud {
        let r = p.coords - centroid;
        scatter += r * r.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (mid, hi) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(hi > 0.0) || mid <= hi * 1e-12 {
        return Err(PipelineError::DegenerateGeometry("points are collinear or coincident".into()));
    }
    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let flip = match viewpoint {
        Some(v) => normal.dot(&(v.coords - centroid)) < 0.0,
        None => normal.z < 0.0,
    };
    if flip {
        normal = -normal;
    }
    let d = -normal.dot(&centroid);
    let ss: f64 = cloud.iter().map(|p| (normal.dot(&p.coords) + d).powi(2)).sum();
    Ok(TouchPlane { normal: normal.into(), d, fit_rms: (ss / n).sqrt() })
}

/// Signed distance, positive on the side the normal points to.
pub fn plane_distance(p: Point3<f64>, plane: &TouchPlane) -> f64 {
    plane.normal().dot(&p.coords) + plane.d
}
