use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Regularity modulus `phi(s) = c * s^alpha` bounding the excess of geodesic
/// over Euclidean distance for nearby points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub c: f64,
    pub alpha: f64,
}

impl Modulus {
    pub const ZERO: Modulus = Modulus { c: 0.0, alpha: 2.0 };

    pub fn phi(&self, s: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * s.powf(self.alpha)
        }
    }

    /// `sup_{0 < s <= h} phi(s) / s`, which is `c * h^(alpha - 1)` for `alpha > 1`.
    pub fn sigma_phi(&self, h: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * h.powf(self.alpha - 1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// Strictly convex, counterclockwise.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    /// `{ |x1|^(2/3) + |x2|^(2/3) <= 1 }`.
    LpStar,
}

/// A closed bounded region with its regularity data.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    modulus: Modulus,
    r_omega: f64,
}

/// Default constant in the star-domain modulus `phi(s) = C s^(3/2)`.
pub const STAR_MODULUS_CONSTANT: f64 = 3.0;

const STAR_EXPONENT: f64 = 2.0 / 3.0;

impl Domain {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("box corners must have the same positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid("box needs lo < hi in every coordinate"));
        }
        Ok(Self::convex(Shape::Box { lo, hi }))
    }

    /// `[0, 1]^dim`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::boxed(vec![0.0; dim], vec![1.0; dim]).expect("unit cube is valid")
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("ball needs a center and a positive radius"));
        }
        Ok(Self::convex(Shape::Ball { center, radius }))
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![0.0; dim], 1.0).expect("unit ball is valid")
    }

    pub fn convex_polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(invalid("polygon needs at least three vertices"));
        }
        let mut turning = 0.0;
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            let c = vertices[(i + 2) % m];
            let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            if !(cross > 0.0) {
                return Err(invalid(format!(
                    "polygon is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % m
                )));
            }
            turning += cross.atan2(e1[0] * e2[0] + e1[1] * e2[1]);
        }
        // left turns summing to more than one revolution: self-intersecting
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(invalid("polygon winds more than once"));
        }
        Ok(Self::convex(Shape::ConvexPolygon { vertices }))
    }

    /// The `l_{2/3}` unit ball with modulus `phi(s) = 3 s^(3/2)`, `r_omega = 1`.
    pub fn lp_star() -> Self {
        Self {
            shape: Shape::LpStar,
            modulus: Modulus { c: STAR_MODULUS_CONSTANT, alpha: 1.5 },
            r_omega: 1.0,
        }
    }

    fn convex(shape: Shape) -> Self {
        let mut d = Self { shape, modulus: Modulus::ZERO, r_omega: 1.0 };
        d.r_omega = d.diameter();
        d
    }

    /// Replaces the modulus constant. Convex domains keep `phi = 0`.
    pub fn with_modulus_constant(mut self, c: f64) -> Result<Self> {
        if self.is_convex() {
            return Err(invalid("convex domains have phi = 0"));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid(format!("modulus constant must be nonnegative, got {c}")));
        }
        self.modulus.c = c;
        Ok(self)
    }

    pub fn with_r_omega(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("r_omega must be positive, got {r}")));
        }
        self.r_omega = r;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn r_omega(&self) -> f64 {
        self.r_omega
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.shape, Shape::LpStar)
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::ConvexPolygon { .. } | Shape::LpStar => 2,
        }
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b),
            Shape::Ball { center, radius } => crate::spatial::dist2(x, center) <= radius * radius,
            Shape::ConvexPolygon { vertices } => {
                let m = vertices.len();
                (0..m).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0
                })
            }
            Shape::LpStar => star_gauge(x) <= 1.0,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Shape::ConvexPolygon { vertices } => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Shape::LpStar => (vec![-1.0, -1.0], vec![1.0, 1.0]),
        }
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi } => crate::spatial::dist(lo, hi),
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::ConvexPolygon { vertices } => {
                let mut best: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        best = best.max(crate::spatial::dist(a, b));
                    }
                }
                best
            }
            Shape::LpStar => 2.0,
        }
    }
}

/// `|x1|^(2/3) + |x2|^(2/3)`.
pub(crate) fn star_gauge(x: &[f64]) -> f64 {
    x[0].abs().powf(STAR_EXPONENT) + x[1].abs().powf(STAR_EXPONENT)
}

/// Textual domain selector: `box`, `ball`, `star` or `polygon:<file>`.
///
/// `box` is the unit square, `ball` the unit disk, and the polygon file holds
/// one `x,y` vertex per line (counterclockwise, optional header).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainSpec {
    UnitSquare,
    UnitDisk,
    Star,
    Polygon(PathBuf),
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::UnitSquare => Ok(Domain::unit_cube(2)),
            DomainSpec::UnitDisk => Ok(Domain::unit_ball(2)),
            DomainSpec::Star => Ok(Domain::lp_star()),
            DomainSpec::Polygon(path) => Domain::convex_polygon(read_polygon(path)?),
        }
    }
}

fn read_polygon(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut parts = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format { path: Some(path.into()), reason: format!("expected `x,y`, got `{line}`") });
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => out.push([x, y]),
            // header line
            _ if out.is_empty() => continue,
            _ => return Err(Error::Format { path: Some(path.into()), reason: format!("bad vertex `{line}`") }),
        }
    }
    Ok(out)
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "box" => Ok(DomainSpec::UnitSquare),
            "ball" => Ok(DomainSpec::UnitDisk),
            "star" => Ok(DomainSpec::Star),
            other => match other.split_once(':') {
                Some(("polygon", file)) if !file.is_empty() => Ok(DomainSpec::Polygon(file.into())),
                _ => Err(invalid(format!("unknown domain `{other}`"))),
            },
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::UnitSquare => write!(f, "box"),
            DomainSpec::UnitDisk => write!(f, "ball"),
            DomainSpec::Star => write!(f, "star"),
            DomainSpec::Polygon(p) => write!(f, "polygon:{}", p.display()),
        }
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
