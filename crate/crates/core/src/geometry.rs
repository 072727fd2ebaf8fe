//! Smooth closed boundary curves given as trigonometric polynomials.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::Vec2;

/// Grid used for the construction-time checks.
const CHECK_GRID: usize = 4096;
/// Vertex count of the polygon used for interior tests and distances.
const POLYGON_VERTICES: usize = 2048;
/// Grid used for the radii cached at construction.
pub const RADII_GRID: usize = 4096;
const MIN_SPEED: f64 = 1e-9;

/// Closed curve `x(t) = (x1(t), x2(t))`, `t ∈ [0, 2π)`, with
///
/// ```text
/// x1(t) = Σ_j x1_cos[j] cos(j t) + x1_sin[j] sin(j t)
/// ```
///
/// and likewise for `x2`. Entry 0 of each sine table is ignored.
///
/// Construction checks that the curve is regular, counterclockwise and
/// winds once around the origin.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    name: String,
    x1_cos: Vec<f64>,
    x1_sin: Vec<f64>,
    x2_cos: Vec<f64>,
    x2_sin: Vec<f64>,
    polygon: Vec<Vec2>,
    radii: DomainRadii,
}

/// Fourier coefficient tables, as accepted by [`BoundaryCurve::from_fourier`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub x1_cos: Vec<f64>,
    #[serde(default)]
    pub x1_sin: Vec<f64>,
    #[serde(default)]
    pub x2_cos: Vec<f64>,
    pub x2_sin: Vec<f64>,
}

fn eval_series(cos: &[f64], sin: &[f64], t: f64) -> f64 {
    let c: f64 = cos
        .iter()
        .enumerate()
        .map(|(j, a)| a * (j as f64 * t).cos())
        .sum();
    let s: f64 = sin
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, b)| b * (j as f64 * t).sin())
        .sum();
    c + s
}

fn eval_series_derivative(cos: &[f64], sin: &[f64], t: f64) -> f64 {
    let c: f64 = cos
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, a)| -a * j as f64 * (j as f64 * t).sin())
        .sum();
    let s: f64 = sin
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, b)| b * j as f64 * (j as f64 * t).cos())
        .sum();
    c + s
}

fn is_left(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)
}

/// Winding number of a closed polygon about `p`.
fn polygon_winding(vertices: &[Vec2], p: Vec2) -> i64 {
    let mut wn = 0i64;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && is_left(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && is_left(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (a + ab * s - p).norm()
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

impl BoundaryCurve {
    pub fn from_fourier(coefficients: FourierCoefficients) -> Result<Self> {
        Self::with_name("fourier", coefficients)
    }

    fn with_name(name: &str, c: FourierCoefficients) -> Result<Self> {
        let all = c
            .x1_cos
            .iter()
            .chain(&c.x1_sin)
            .chain(&c.x2_cos)
            .chain(&c.x2_sin);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(FbmError::InvalidParameter(
                "curve coefficients must be finite".into(),
            ));
        }
        let mut curve = Self {
            name: name.to_string(),
            x1_cos: c.x1_cos,
            x1_sin: c.x1_sin,
            x2_cos: c.x2_cos,
            x2_sin: c.x2_sin,
            polygon: Vec::new(),
            radii: DomainRadii {
                r_in_max: 0.0,
                r_ex_min: 0.0,
                tau_min: 0.0,
            },
        };
        curve.polygon = (0..POLYGON_VERTICES)
            .map(|j| curve.point(2.0 * PI * j as f64 / POLYGON_VERTICES as f64))
            .collect();
        curve.validate()?;
        curve.radii = curve.compute_radii(RADII_GRID)?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        for j in 0..CHECK_GRID {
            let t = 2.0 * PI * j as f64 / CHECK_GRID as f64;
            let speed = self.derivative(t).norm();
            if !(speed > MIN_SPEED) {
                return Err(FbmError::NotRegular { t, speed });
            }
        }
        let area = self.signed_area();
        if !(area > 0.0) {
            return Err(FbmError::NotCounterclockwise { area });
        }
        let winding = polygon_winding(&self.polygon, Vec2::zeros());
        if winding != 1 {
            return Err(FbmError::OriginNotInterior { winding });
        }
        Ok(())
    }

    /// `(cos t + 0.65 cos 2t − 0.65, 1.5 sin t)`.
    pub fn kite() -> Self {
        Self::with_name(
            "kite",
            FourierCoefficients {
                x1_cos: vec![-0.65, 1.0, 0.65],
                x1_sin: vec![],
                x2_cos: vec![],
                x2_sin: vec![0.0, 1.5],
            },
        )
        .expect("kite is a valid curve")
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::ellipse(radius, radius).map(|mut c| {
            c.name = format!("circle:{radius}");
            c
        })
    }

    /// Axis-aligned ellipse with semi-axes `a` (along x1) and `b` (along x2).
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(FbmError::InvalidParameter(format!(
                "semi-axes must be positive, got ({a}, {b})"
            )));
        }
        Self::with_name(
            &format!("ellipse:{a},{b}"),
            FourierCoefficients {
                x1_cos: vec![0.0, a],
                x1_sin: vec![],
                x2_cos: vec![],
                x2_sin: vec![0.0, b],
            },
        )
    }

    /// Parses `"kite"`, `"circle:R"` or `"ellipse:a,b"`.
    pub fn named(spec: &str) -> Result<Self> {
        let bad = || FbmError::config("unknown_curve", format!("cannot parse curve {spec:?}"));
        let spec = spec.trim();
        if spec == "kite" {
            return Ok(Self::kite());
        }
        if let Some(r) = spec.strip_prefix("circle:") {
            let r: f64 = r.trim().parse().map_err(|_| bad())?;
            return Self::circle(r);
        }
        if let Some(ab) = spec.strip_prefix("ellipse:") {
            let mut parts = ab.split(',');
            let a: f64 = parts
                .next()
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())?;
            let b: f64 = parts
                .next()
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())?;
            if parts.next().is_some() {
                return Err(bad());
            }
            return Self::ellipse(a, b);
        }
        Err(bad())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Radii computed at construction on a [`RADII_GRID`]-point grid.
    pub fn radii(&self) -> DomainRadii {
        self.radii
    }

    pub fn coefficients(&self) -> FourierCoefficients {
        FourierCoefficients {
            x1_cos: self.x1_cos.clone(),
            x1_sin: self.x1_sin.clone(),
            x2_cos: self.x2_cos.clone(),
            x2_sin: self.x2_sin.clone(),
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        Vec2::new(
            eval_series(&self.x1_cos, &self.x1_sin, t),
            eval_series(&self.x2_cos, &self.x2_sin, t),
        )
    }

    pub fn derivative(&self, t: f64) -> Vec2 {
        Vec2::new(
            eval_series_derivative(&self.x1_cos, &self.x1_sin, t),
            eval_series_derivative(&self.x2_cos, &self.x2_sin, t),
        )
    }

    /// Unit normal pointing out of the enclosed domain.
    pub fn outward_normal(&self, t: f64) -> Result<Vec2> {
        let d = self.derivative(t);
        let speed = d.norm();
        if !(speed > MIN_SPEED) {
            return Err(FbmError::NotRegular { t, speed });
        }
        Ok(Vec2::new(d.y, -d.x) / speed)
    }

    /// `½ ∮ (x1 x2' − x2 x1') dt` by the trapezoidal rule, exact for these
    /// trigonometric polynomials once the grid resolves their degree.
    pub fn signed_area(&self) -> f64 {
        let h = 2.0 * PI / CHECK_GRID as f64;
        let sum: f64 = (0..CHECK_GRID)
            .map(|j| {
                let t = j as f64 * h;
                let x = self.point(t);
                let d = self.derivative(t);
                x.x * d.y - x.y * d.x
            })
            .sum();
        0.5 * sum * h
    }

    /// Vertices of the polygonal approximation used by [`Self::is_interior`].
    pub fn polygon(&self) -> &[Vec2] {
        &self.polygon
    }

    /// Winding-number test against the polygonal approximation.
    pub fn is_interior(&self, point: Vec2) -> bool {
        polygon_winding(&self.polygon, point) != 0
    }

    /// Distance from `point` to the polygonal approximation of the curve.
    pub fn distance_to_boundary(&self, point: Vec2) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|i| segment_distance(self.polygon[i], self.polygon[(i + 1) % n], point))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest origin-centred disc inside the curve and smallest one
    /// containing it.
    pub fn compute_radii(&self, grid_size: usize) -> Result<DomainRadii> {
        if grid_size < 1024 {
            return Err(FbmError::Size(format!(
                "radius search grid must have at least 1024 samples, got {grid_size}"
            )));
        }
        let winding = polygon_winding(&self.polygon, Vec2::zeros());
        if winding != 1 {
            return Err(FbmError::OriginNotInterior { winding });
        }
        let h = 2.0 * PI / grid_size as f64;
        let dist2 = |t: f64| self.point(t).norm_squared();
        let samples: Vec<f64> = (0..grid_size).map(|j| dist2(j as f64 * h)).collect();
        let (mut i_min, mut i_max) = (0, 0);
        for (i, &v) in samples.iter().enumerate() {
            if v < samples[i_min] {
                i_min = i;
            }
            if v > samples[i_max] {
                i_max = i;
            }
        }
        let tol = 1e-10;
        let t_min = golden_min(
            dist2,
            (i_min as f64 - 1.0) * h,
            (i_min as f64 + 1.0) * h,
            tol,
        );
        let t_max = golden_min(
            |t| -dist2(t),
            (i_max as f64 - 1.0) * h,
            (i_max as f64 + 1.0) * h,
            tol,
        );
        let r_in = dist2(t_min).min(samples[i_min]).sqrt();
        let r_ex = dist2(t_max).max(samples[i_max]).sqrt();
        DomainRadii::new(r_in, r_ex)
    }

    /// Uniform periodic trapezoidal rule with `size` nodes.
    pub fn build_quadrature(&self, size: usize) -> Result<QuadratureRule> {
        if size < 8 || !size.is_multiple_of(2) {
            return Err(FbmError::Size(format!(
                "quadrature size must be even and at least 8, got {size}"
            )));
        }
        let weight = 2.0 * PI / size as f64;
        let nodes: Vec<f64> = (0..size).map(|j| j as f64 * weight).collect();
        let points = nodes.iter().map(|&t| self.point(t)).collect();
        let speeds: Vec<f64> = nodes.iter().map(|&t| self.derivative(t).norm()).collect();
        let normals = nodes
            .iter()
            .map(|&t| self.outward_normal(t))
            .collect::<Result<Vec<_>>>()?;
        let row_scale = speeds.iter().map(|s| (weight * s).sqrt()).collect();
        Ok(QuadratureRule {
            nodes,
            weight,
            speeds,
            points,
            normals,
            row_scale,
        })
    }
}

/// Quadrature size used when the configuration says `"auto"`.
pub fn default_quadrature_size(truncation: usize) -> usize {
    256.max(16 * truncation + 64)
}

/// Extremal distances from the origin to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainRadii {
    pub r_in_max: f64,
    pub r_ex_min: f64,
    pub tau_min: f64,
}

impl DomainRadii {
    pub fn new(r_in_max: f64, r_ex_min: f64) -> Result<Self> {
        if !(r_in_max > 0.0 && r_in_max <= r_ex_min && r_ex_min.is_finite()) {
            return Err(FbmError::InvalidParameter(format!(
                "radii must satisfy 0 < r_in_max <= r_ex_min, got ({r_in_max}, {r_ex_min})"
            )));
        }
        Ok(Self {
            r_in_max,
            r_ex_min,
            tau_min: r_ex_min / r_in_max,
        })
    }
}

/// Periodic trapezoidal rule on a boundary curve.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weight: f64,
    pub speeds: Vec<f64>,
    pub points: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    row_scale: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sqrt(w_j |x'(t_j)|)` per node.
    pub fn row_scale(&self) -> &[f64] {
        &self.row_scale
    }

    pub fn length(&self) -> f64 {
        self.weight * self.speeds.iter().sum::<f64>()
    }

    /// Discrete `L²(Γ)` norm of node samples.
    pub fn l2_norm(&self, samples: &[Complex64]) -> f64 {
        samples
            .iter()
            .zip(&self.speeds)
            .map(|(g, s)| self.weight * s * g.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn kite_points() {
        let kite = BoundaryCurve::kite();
        assert!(close(kite.point(0.0), Vec2::new(1.0, 0.0), 1e-15));
        assert!(close(kite.point(PI / 2.0), Vec2::new(-1.3, 1.5), 1e-15));
        assert!(close(kite.derivative(0.0), Vec2::new(0.0, 1.5), 1e-15));
        let circle = BoundaryCurve::circle(1.0).unwrap();
        assert!(close(circle.point(PI), Vec2::new(-1.0, 0.0), 1e-15));
        assert!(close(circle.derivative(0.0), Vec2::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let kite = BoundaryCurve::kite();
        let h = 1e-5;
        for j in 0..50 {
            let t = 0.13 * j as f64;
            let fd = (kite.point(t + h) - kite.point(t - h)) / (2.0 * h);
            assert!(close(fd, kite.derivative(t), 1e-8));
        }
    }

    #[test]
    fn circle_normals() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        assert!(close(
            c.outward_normal(0.0).unwrap(),
            Vec2::new(1.0, 0.0),
            1e-15
        ));
        assert!(close(
            c.outward_normal(PI / 2.0).unwrap(),
            Vec2::new(0.0, 1.0),
            1e-15
        ));
    }

    #[test]
    fn radii_examples() {
        let c = BoundaryCurve::circle(2.0)
            .unwrap()
            .compute_radii(1024)
            .unwrap();
        assert!((c.r_in_max - 2.0).abs() < 1e-9 && (c.r_ex_min - 2.0).abs() < 1e-9);
        let e = BoundaryCurve::ellipse(1.0, 1.5)
            .unwrap()
            .compute_radii(2048)
            .unwrap();
        assert!((e.r_in_max - 1.0).abs() < 1e-9);
        assert!((e.r_ex_min - 1.5).abs() < 1e-9);
        // dense-sampling reference: min |x| = 0.92281, max |x| = 2.06567
        let k = BoundaryCurve::kite().compute_radii(4096).unwrap();
        assert!((k.r_in_max - 0.9228136).abs() < 1e-6, "{}", k.r_in_max);
        assert!((k.r_ex_min - 2.0656710).abs() < 1e-6, "{}", k.r_ex_min);
        assert_eq!(BoundaryCurve::kite().radii(), k);
        assert!(BoundaryCurve::kite().compute_radii(512).is_err());
    }

    #[test]
    fn quadrature_basics() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        for m in [8, 64, 130] {
            let rule = c.build_quadrature(m).unwrap();
            assert!((rule.length() - 2.0 * PI).abs() < 1e-12);
            assert!((rule.weight * rule.len() as f64 - 2.0 * PI).abs() < 1e-12);
            let ones = vec![Complex64::new(1.0, 0.0); m];
            assert!((rule.l2_norm(&ones) - (2.0 * PI).sqrt()).abs() < 1e-12);
        }
        assert!(c.build_quadrature(6).is_err());
        assert!(c.build_quadrature(33).is_err());
    }

    #[test]
    fn kite_length_self_convergence() {
        let kite = BoundaryCurve::kite();
        let a = kite.build_quadrature(256).unwrap().length();
        let b = kite.build_quadrature(512).unwrap().length();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn interior_tests() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        assert!(c.is_interior(Vec2::zeros()));
        assert!(!c.is_interior(Vec2::new(2.0, 0.0)));
        let kite = BoundaryCurve::kite();
        assert!(kite.is_interior(Vec2::new(0.5, 0.0)));
        // inside the notch of the kite, outside the domain
        assert!(!kite.is_interior(Vec2::new(-1.2, 0.0)));
    }

    #[test]
    fn construction_failures() {
        let clockwise = FourierCoefficients {
            x1_cos: vec![0.0, 1.0],
            x1_sin: vec![],
            x2_cos: vec![],
            x2_sin: vec![0.0, -1.0],
        };
        assert!(matches!(
            BoundaryCurve::from_fourier(clockwise),
            Err(FbmError::NotCounterclockwise { .. })
        ));
        let shifted = FourierCoefficients {
            x1_cos: vec![3.0, 1.0],
            x1_sin: vec![],
            x2_cos: vec![],
            x2_sin: vec![0.0, 1.0],
        };
        assert!(matches!(
            BoundaryCurve::from_fourier(shifted),
            Err(FbmError::OriginNotInterior { .. })
        ));
        let degenerate = FourierCoefficients {
            x1_cos: vec![1.0],
            x1_sin: vec![],
            x2_cos: vec![],
            x2_sin: vec![],
        };
        assert!(matches!(
            BoundaryCurve::from_fourier(degenerate),
            Err(FbmError::NotRegular { .. })
        ));
    }

    #[test]
    fn named_curves() {
        assert_eq!(BoundaryCurve::named("kite").unwrap().name(), "kite");
        let c = BoundaryCurve::named("circle:2.5").unwrap();
        assert!((c.point(0.0).x - 2.5).abs() < 1e-15);
        let e = BoundaryCurve::named("ellipse:1, 1.5").unwrap();
        assert!((e.point(PI / 2.0).y - 1.5).abs() < 1e-15);
        for bad in [
            "square",
            "circle:x",
            "ellipse:1",
            "ellipse:1,2,3",
            "circle:-1",
        ] {
            assert!(BoundaryCurve::named(bad).is_err(), "{bad}");
        }
    }
}
