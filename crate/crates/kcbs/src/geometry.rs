//! Pentagram geometry on the unit sphere.
//!
//! Five measurement directions sit on a horizontal circle at height
//! 5^(-1/4), labelled 1..5 and placed at azimuths 4π(k-1)/5. Walking the
//! labels in order traces a pentagram, and the height is chosen as the
//! largest one for which cyclically adjacent directions are exactly
//! orthogonal. Each adjacent pair spans a measurement context; the third
//! basis vector of a context is the cross product of the pair.

use std::fmt;

use crate::{Error, Result};

/// Plain 3-vector with the handful of operations the construction needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vector3) -> Vector3 {
        Vector3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, factor: f64) -> Vector3 {
        Vector3::new(self.x * factor, self.y * factor, self.z * factor)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rotated_z(self, angle: f64) -> Vector3 {
        let (sin, cos) = angle.sin_cos();
        Vector3::new(
            cos * self.x - sin * self.y,
            sin * self.x + cos * self.y,
            self.z,
        )
    }

    /// Rotation about the x axis by `angle` radians.
    pub fn rotated_x(self, angle: f64) -> Vector3 {
        let (sin, cos) = angle.sin_cos();
        Vector3::new(
            self.x,
            cos * self.y - sin * self.z,
            sin * self.y + cos * self.z,
        )
    }
}

/// A 3-vector validated to have unit norm.
///
/// All measurement directions are unit vectors; keeping the check in the
/// constructor lets the rest of the crate treat dot products as cosines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3);

impl UnitVector3 {
    /// Accepts `v` only if it is finite and already unit length.
    pub fn new(v: Vector3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > crate::DEFAULT_TOL {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self(v))
    }

    /// Rescales `v` to unit length; fails on near-zero or non-finite input.
    pub fn normalized(v: Vector3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if norm < 1e-9 {
            return Err(Error::DegenerateCross);
        }
        Ok(Self(v.scale(1.0 / norm)))
    }

    pub fn vector(self) -> Vector3 {
        self.0
    }

    pub fn components(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(self, other: UnitVector3) -> f64 {
        self.0.dot(other.0)
    }

    pub fn rotated_z(self, angle: f64) -> UnitVector3 {
        Self(self.0.rotated_z(angle))
    }

    pub fn rotated_x(self, angle: f64) -> UnitVector3 {
        Self(self.0.rotated_x(angle))
    }
}

/// Angle in radians between two unit vectors, clamped against rounding.
pub fn angle_between(a: UnitVector3, b: UnitVector3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Vertex label 1..=5 on the pentagram, cyclic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u8);

impl VertexId {
    pub fn new(label: u8) -> Result<Self> {
        if (1..=5).contains(&label) {
            Ok(Self(label))
        } else {
            Err(Error::VertexOutOfRange(label))
        }
    }

    /// Label in 1..=5.
    pub const fn label(self) -> u8 {
        self.0
    }

    /// Zero-based index in 0..5.
    pub const fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index < 5 {
            Ok(Self(index as u8 + 1))
        } else {
            Err(Error::VertexOutOfRange(index as u8))
        }
    }

    pub fn all() -> [VertexId; 5] {
        [Self(1), Self(2), Self(3), Self(4), Self(5)]
    }

    /// Cyclic neighbour `steps` labels away (negative steps go backwards).
    pub fn step(self, steps: i8) -> VertexId {
        let idx = (self.index() as i8 + steps).rem_euclid(5);
        Self(idx as u8 + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Relation between two vertex labels under the cyclic order.
///
/// `Pentagram` pairs are label-adjacent and geometrically orthogonal (they
/// share a context); `Pentagon` pairs are two labels apart and subtend the
/// wide angle of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Same,
    Pentagram,
    Pentagon,
}

pub fn edge_kind(a: VertexId, b: VertexId) -> EdgeKind {
    let d = (a.index() + 5 - b.index()) % 5;
    match d {
        0 => EdgeKind::Same,
        1 | 4 => EdgeKind::Pentagram,
        _ => EdgeKind::Pentagon,
    }
}

/// The five contexts as ordered label pairs: (1,2), (2,3), .., (5,1).
pub fn pentagram_edges() -> [(VertexId, VertexId); 5] {
    VertexId::all().map(|v| (v, v.step(1)))
}

/// The five wide-angle pairs in canonical order: (1,4), (4,2), (2,5), (5,3), (3,1).
///
/// The order walks the pentagon by repeatedly stepping three labels forward,
/// so consecutive pairs share an endpoint.
pub fn pentagon_edges() -> [(VertexId, VertexId); 5] {
    let mut edges = [(VertexId(1), VertexId(4)); 5];
    let mut a = VertexId(1);
    for edge in edges.iter_mut() {
        *edge = (a, a.step(3));
        a = a.step(3);
    }
    edges
}

/// Orthonormal basis of one measurement context.
///
/// The first two vectors are the pentagram-adjacent directions spanning the
/// context; the third completes the basis and is measured implicitly.
#[derive(Debug, Clone, Copy)]
pub struct ContextBasis {
    pub edge: (VertexId, VertexId),
    pub vectors: [UnitVector3; 3],
}

/// The five directions, the symmetry axis, and the derived scalars.
#[derive(Debug, Clone)]
pub struct PentagramFrame {
    vertices: [UnitVector3; 5],
    axis: UnitVector3,
    circle_height: f64,
    circle_radius: f64,
    axis_angle: f64,
    pentagon_angle: f64,
}

/// Builds the canonical frame: axis = +z, vertex k at azimuth 4π(k-1)/5 on
/// the circle of height 5^(-1/4).
pub fn build_pentagram() -> PentagramFrame {
    let height = 5f64.powf(-0.25);
    let radius = (1.0 - height * height).sqrt();
    let vertices = std::array::from_fn(|k| {
        let azimuth = 4.0 * std::f64::consts::PI * k as f64 / 5.0;
        let (sin, cos) = azimuth.sin_cos();
        UnitVector3::new(Vector3::new(radius * cos, radius * sin, height))
            .expect("unit by construction")
    });
    let axis = UnitVector3::new(Vector3::new(0.0, 0.0, 1.0)).expect("unit by construction");
    let vertices: [UnitVector3; 5] = vertices;
    let axis_angle = angle_between(axis, vertices[0]);
    let pentagon_angle = angle_between(vertices[0], vertices[2]);
    PentagramFrame {
        vertices,
        axis,
        circle_height: height,
        circle_radius: radius,
        axis_angle,
        pentagon_angle,
    }
}

impl PentagramFrame {
    pub fn vertex(&self, v: VertexId) -> UnitVector3 {
        self.vertices[v.index()]
    }

    pub fn vertices(&self) -> &[UnitVector3; 5] {
        &self.vertices
    }

    /// Symmetry axis; also the single-particle state direction.
    pub fn axis(&self) -> UnitVector3 {
        self.axis
    }

    /// Height of the vertex circle above the equator (cosine of [`axis_angle`](Self::axis_angle)).
    pub fn circle_height(&self) -> f64 {
        self.circle_height
    }

    /// Radius of the vertex circle.
    pub fn circle_radius(&self) -> f64 {
        self.circle_radius
    }

    /// Angle between the axis and each vertex direction.
    pub fn axis_angle(&self) -> f64 {
        self.axis_angle
    }

    /// Angle subtended by a pentagon edge (two labels apart).
    pub fn pentagon_angle(&self) -> f64 {
        self.pentagon_angle
    }

    /// Completes each context pair to an orthonormal basis via the cross
    /// product. The degeneracy error cannot fire for a frame built by
    /// [`build_pentagram`]; it is checked anyway so the type never holds a
    /// junk basis.
    pub fn context_bases(&self) -> Result<[ContextBasis; 5]> {
        let mut bases = Vec::with_capacity(5);
        for (a, b) in pentagram_edges() {
            let va = self.vertex(a);
            let vb = self.vertex(b);
            let third = UnitVector3::normalized(va.vector().cross(vb.vector()))?;
            bases.push(ContextBasis {
                edge: (a, b),
                vectors: [va, vb, third],
            });
        }
        Ok(bases.try_into().expect("five contexts"))
    }
}
