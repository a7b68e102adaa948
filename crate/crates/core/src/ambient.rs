//! Space-form models and ambient vector fields.
//!
//! Euclidean space is `ℝⁿ⁺¹` itself. Hyperbolic space is the upper sheet of
//! `⟨x,x⟩₁ = −1` in Lorentzian `ℝⁿ⁺²₁` (index 0 is timelike) and the sphere
//! is the unit sphere of `ℝⁿ⁺²`. In all three models the last embedding
//! coordinate is the one that vanishes on the reference hyperplane `P`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance for "point lies on the model surface".
pub const ON_MODEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean,
    Hyperbolic,
    Spherical,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Hyperbolic => "hyperbolic",
            SpaceKind::Spherical => "spherical",
        }
    }

    /// Sectional curvature `c̄`.
    pub fn curvature(self) -> f64 {
        match self {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => -1.0,
            SpaceKind::Spherical => 1.0,
        }
    }

    /// `co(t)`: the coefficient of the base point along a unit-speed geodesic.
    pub fn co(self, t: f64) -> f64 {
        match self {
            SpaceKind::Euclidean => 1.0,
            SpaceKind::Hyperbolic => t.cosh(),
            SpaceKind::Spherical => t.cos(),
        }
    }

    /// `sn(t)`: the coefficient of the initial direction.
    pub fn sn(self, t: f64) -> f64 {
        match self {
            SpaceKind::Euclidean => t,
            SpaceKind::Hyperbolic => t.sinh(),
            SpaceKind::Spherical => t.sin(),
        }
    }

    pub fn co_prime(self, t: f64) -> f64 {
        match self {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => t.sinh(),
            SpaceKind::Spherical => -t.sin(),
        }
    }

    pub fn sn_prime(self, t: f64) -> f64 {
        match self {
            SpaceKind::Euclidean => 1.0,
            SpaceKind::Hyperbolic => t.cosh(),
            SpaceKind::Spherical => t.cos(),
        }
    }

    /// Principal curvature of a geodesic sphere of radius `t` (inward normal).
    pub fn sphere_curvature(self, t: f64) -> f64 {
        self.sn_prime(t) / self.sn(t)
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(SpaceKind::Euclidean),
            "hyperbolic" => Ok(SpaceKind::Hyperbolic),
            "spherical" => Ok(SpaceKind::Spherical),
            other => Err(Error::Configuration(format!("unknown space kind `{other}`"))),
        }
    }
}

/// One of the three space-form models, for hypersurfaces of dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub kind: SpaceKind,
    pub n: usize,
}

impl AmbientSpace {
    pub fn new(kind: SpaceKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("hypersurface dimension must be at least 1"));
        }
        Ok(Self { kind, n })
    }

    pub fn euclidean(n: usize) -> Self {
        Self {
            kind: SpaceKind::Euclidean,
            n,
        }
    }

    pub fn hyperbolic(n: usize) -> Self {
        Self {
            kind: SpaceKind::Hyperbolic,
            n,
        }
    }

    pub fn spherical(n: usize) -> Self {
        Self {
            kind: SpaceKind::Spherical,
            n,
        }
    }

    pub fn is_curved(&self) -> bool {
        self.kind != SpaceKind::Euclidean
    }

    pub fn embed_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Euclidean => self.n + 1,
            _ => self.n + 2,
        }
    }

    pub fn curvature(&self) -> f64 {
        self.kind.curvature()
    }

    pub fn signature(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.embed_dim()];
        if self.kind == SpaceKind::Hyperbolic {
            s[0] = -1.0;
        }
        s
    }

    /// Metric sign of embedding coordinate `i`.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if i == 0 && self.kind == SpaceKind::Hyperbolic {
            -1.0
        } else {
            1.0
        }
    }

    /// Index of the coordinate normal to `P`.
    pub fn last(&self) -> usize {
        self.embed_dim() - 1
    }

    /// Embedding index of the `k`-th horizontal direction (tangent to `P` at the origin).
    pub fn horizontal(&self, k: usize) -> usize {
        match self.kind {
            SpaceKind::Euclidean => k,
            _ => k + 1,
        }
    }

    pub fn basis(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.embed_dim());
        e[i] = 1.0;
        e
    }

    /// The origin `o` of the model: `0` in Euclidean space, `e_0` otherwise.
    pub fn origin(&self) -> DVector<f64> {
        match self.kind {
            SpaceKind::Euclidean => DVector::zeros(self.embed_dim()),
            _ => self.basis(0),
        }
    }

    /// Unit normal of `P` (the last basis vector).
    pub fn p_normal(&self) -> DVector<f64> {
        self.basis(self.last())
    }

    /// Model inner product without dimension checks.
    #[inline]
    pub fn ip(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let mut s = u.dot(v);
        if self.kind == SpaceKind::Hyperbolic {
            s -= 2.0 * u[0] * v[0];
        }
        s
    }

    /// Multiply by the metric signature.
    pub fn lower(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut w = v.clone();
        if self.kind == SpaceKind::Hyperbolic {
            w[0] = -w[0];
        }
        w
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let d = self.embed_dim();
        if u.len() != d || v.len() != d {
            return Err(invalid(format!(
                "expected vectors of length {d}, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        Ok(self.ip(u, v))
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.ip(v, v).max(0.0).sqrt()
    }

    /// How far `p` is from the model surface.
    pub fn model_residual(&self, p: &DVector<f64>) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => {
                let r = (self.ip(p, p) + 1.0).abs();
                if p[0] > 0.0 {
                    r
                } else {
                    r.max(1.0)
                }
            }
            SpaceKind::Spherical => (self.ip(p, p) - 1.0).abs(),
        }
    }

    pub fn check_point(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.embed_dim() {
            return Err(invalid(format!(
                "point has length {}, expected {}",
                p.len(),
                self.embed_dim()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(invalid("point is not finite"));
        }
        let r = self.model_residual(p);
        if r > ON_MODEL_TOL {
            return Err(invalid(format!(
                "point is off the {} model by {r:.3e}",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Pull a nearby point back onto the model surface.
    pub fn normalize_point(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        match self.kind {
            SpaceKind::Euclidean => Ok(p.clone()),
            SpaceKind::Spherical => {
                let n = p.norm();
                if n == 0.0 {
                    return Err(invalid("cannot normalize the zero vector onto the sphere"));
                }
                Ok(p / n)
            }
            SpaceKind::Hyperbolic => {
                let q = -self.ip(p, p);
                if q <= 0.0 || p[0] <= 0.0 {
                    return Err(invalid("vector is not future timelike"));
                }
                Ok(p / q.sqrt())
            }
        }
    }

    pub fn project_tangent(&self, p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(p)?;
        if v.len() != self.embed_dim() {
            return Err(invalid("tangent vector has wrong length"));
        }
        Ok(self.project_unchecked(p, v))
    }

    pub(crate) fn project_unchecked(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            SpaceKind::Euclidean => v.clone(),
            SpaceKind::Spherical => v - p * self.ip(v, p),
            SpaceKind::Hyperbolic => v + p * self.ip(v, p),
        }
    }

    pub fn geodesic_distance(&self, p: &DVector<f64>, q: &DVector<f64>) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => (p - q).norm(),
            SpaceKind::Spherical => {
                if p == q {
                    return 0.0;
                }
                // atan2 form keeps accuracy for nearby points
                let c = self.ip(p, q).clamp(-1.0, 1.0);
                let s = (q - p * c).norm();
                s.atan2(c)
            }
            SpaceKind::Hyperbolic => {
                if p == q {
                    return 0.0;
                }
                let c = (-self.ip(p, q)).max(1.0);
                if c > 2.0 {
                    c.acosh()
                } else {
                    self.norm(&(q - p * c)).asinh()
                }
            }
        }
    }

    /// Point at distance `t` along the geodesic from `p` with unit initial velocity `w`.
    pub fn geodesic(&self, p: &DVector<f64>, w: &DVector<f64>, t: f64) -> DVector<f64> {
        p * self.kind.co(t) + w * self.kind.sn(t)
    }

    /// Exponential map for an arbitrary tangent vector `v` at `p`.
    pub fn exp(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let len = self.norm(v);
        if len == 0.0 {
            return p.clone();
        }
        self.geodesic(p, &(v / len), len)
    }

    /// Unit initial direction and length of the geodesic from `a` to `q`.
    pub fn log_direction(&self, a: &DVector<f64>, q: &DVector<f64>) -> (DVector<f64>, f64) {
        let rho = self.distance_unchecked(a, q);
        let w = match self.kind {
            SpaceKind::Euclidean => q - a,
            _ => q - a * self.kind.co(rho),
        };
        let len = self.norm(&w);
        if len == 0.0 {
            (w, 0.0)
        } else {
            (w / len, rho)
        }
    }

    /// Radial conformal field about `a`; points away from `a`, with length `sn(dist)`.
    pub fn radial_field(&self, a: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            SpaceKind::Euclidean => p - a,
            SpaceKind::Spherical => p * self.ip(a, p) - a,
            SpaceKind::Hyperbolic => -(a + p * self.ip(a, p)),
        }
    }

    /// Ambient covariant derivative `∇̄_u Y` at `p`.
    ///
    /// Central difference of `Y` along the geodesic through `p` with velocity
    /// `u`, followed by tangent projection. With `richardson` the steps `h`
    /// and `h/2` are combined to fourth order.
    pub fn ambient_covariant<F>(
        &self,
        field: F,
        p: &DVector<f64>,
        u: &DVector<f64>,
        h: f64,
        richardson: bool,
    ) -> Result<DVector<f64>>
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        self.check_point(p)?;
        if !(h > 0.0) {
            return Err(invalid("finite-difference step must be positive"));
        }
        let central = |h: f64| {
            let fwd = field(&self.exp(p, &(u * h)));
            let bwd = field(&self.exp(p, &(u * -h)));
            (fwd - bwd) / (2.0 * h)
        };
        let d = if richardson {
            let d1 = central(h);
            let d2 = central(h / 2.0);
            (d2 * 4.0 - d1) / 3.0
        } else {
            central(h)
        };
        Ok(self.project_unchecked(p, &d))
    }
}

/// Default step for [`AmbientSpace::ambient_covariant`].
pub const COVARIANT_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    /// Constant field (Euclidean only).
    Translation { v: Vec<f64> },
    /// `Y(p) = ⟨p,u⟩v − ⟨p,v⟩u`, a Killing field in every model.
    Rotation { u: Vec<f64>, v: Vec<f64> },
    /// `Y(p) = p − center` (Euclidean only).
    Homothety { center: Vec<f64> },
    /// Radial conformal field about `a`.
    PositionConformal { a: Vec<f64> },
}

/// A Killing or closed conformal vector field on a space form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientField {
    pub space: AmbientSpace,
    pub kind: FieldKind,
}

fn dv(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

impl AmbientField {
    fn checked(space: AmbientSpace, kind: FieldKind) -> Result<Self> {
        let d = space.embed_dim();
        let lens: Vec<usize> = match &kind {
            FieldKind::Translation { v } => vec![v.len()],
            FieldKind::Rotation { u, v } => vec![u.len(), v.len()],
            FieldKind::Homothety { center } => vec![center.len()],
            FieldKind::PositionConformal { a } => vec![a.len()],
        };
        if lens.iter().any(|&l| l != d) {
            return Err(invalid(format!("field parameters must have length {d}")));
        }
        match (&kind, space.kind) {
            (FieldKind::Translation { .. } | FieldKind::Homothety { .. }, k)
                if k != SpaceKind::Euclidean =>
            {
                return Err(Error::Configuration(format!(
                    "translations and homotheties are Euclidean fields, not {}",
                    k.name()
                )))
            }
            (FieldKind::PositionConformal { a }, _) => space.check_point(&dv(a))?,
            _ => {}
        }
        Ok(Self { space, kind })
    }

    pub fn translation(space: AmbientSpace, v: DVector<f64>) -> Result<Self> {
        Self::checked(space, FieldKind::Translation { v: v.as_slice().to_vec() })
    }

    pub fn rotation(space: AmbientSpace, u: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        Self::checked(
            space,
            FieldKind::Rotation {
                u: u.as_slice().to_vec(),
                v: v.as_slice().to_vec(),
            },
        )
    }

    pub fn homothety(space: AmbientSpace, center: DVector<f64>) -> Result<Self> {
        Self::checked(
            space,
            FieldKind::Homothety {
                center: center.as_slice().to_vec(),
            },
        )
    }

    pub fn conformal(space: AmbientSpace, a: DVector<f64>) -> Result<Self> {
        Self::checked(space, FieldKind::PositionConformal { a: a.as_slice().to_vec() })
    }

    /// Killing field orthogonal to `P` along `P`, centered at `a ∈ P`.
    ///
    /// Euclidean: the constant field `e_last`. Curved models: the rotation
    /// that restricts to `co(dist(a,p))·e_last` on `P`.
    pub fn p_orthogonal_killing(space: AmbientSpace, a: DVector<f64>) -> Result<Self> {
        let e = space.p_normal();
        match space.kind {
            SpaceKind::Euclidean => Self::translation(space, e),
            SpaceKind::Hyperbolic => Self::rotation(space, a, -e),
            SpaceKind::Spherical => Self::rotation(space, a, e),
        }
    }

    pub fn is_killing(&self) -> bool {
        matches!(
            self.kind,
            FieldKind::Translation { .. } | FieldKind::Rotation { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FieldKind::Translation { .. } => "translation",
            FieldKind::Rotation { .. } => "rotation",
            FieldKind::Homothety { .. } => "homothety",
            FieldKind::PositionConformal { .. } => "conformal",
        }
    }

    pub fn eval(&self, p: &DVector<f64>) -> DVector<f64> {
        let s = &self.space;
        match &self.kind {
            FieldKind::Translation { v } => dv(v),
            FieldKind::Rotation { u, v } => {
                let (u, v) = (dv(u), dv(v));
                &v * s.ip(p, &u) - &u * s.ip(p, &v)
            }
            FieldKind::Homothety { center } => p - dv(center),
            FieldKind::PositionConformal { a } => s.radial_field(&dv(a), p),
        }
    }

    /// Conformal factor `φ`: `∇̄_X Y = φX` plus a skew part.
    pub fn phi(&self, p: &DVector<f64>) -> f64 {
        match &self.kind {
            FieldKind::Translation { .. } | FieldKind::Rotation { .. } => 0.0,
            FieldKind::Homothety { .. } => 1.0,
            FieldKind::PositionConformal { a } => match self.space.kind {
                SpaceKind::Euclidean => 1.0,
                SpaceKind::Spherical => self.space.ip(&dv(a), p),
                SpaceKind::Hyperbolic => -self.space.ip(&dv(a), p),
            },
        }
    }
}

/// `|⟨∇̄_uY, v⟩ + ⟨u, ∇̄_vY⟩ − 2φ(p)⟨u,v⟩|`.
pub fn conformal_residual(
    field: &AmbientField,
    p: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    let s = &field.space;
    let du = s.ambient_covariant(|q| field.eval(q), p, u, h, false)?;
    let dv_ = s.ambient_covariant(|q| field.eval(q), p, v, h, false)?;
    Ok((s.ip(&du, v) + s.ip(u, &dv_) - 2.0 * field.phi(p) * s.ip(u, v)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_products() {
        let e = AmbientSpace::euclidean(2);
        assert_eq!(e.inner(&e.basis(0), &e.basis(0)).unwrap(), 1.0);
        let h = AmbientSpace::hyperbolic(2);
        assert_eq!(h.inner(&h.basis(0), &h.basis(0)).unwrap(), -1.0);
        assert!(h.inner(&h.basis(0), &e.basis(0)).is_err());
    }

    #[test]
    fn hyperbolic_projection_example() {
        let h = AmbientSpace::hyperbolic(2);
        let p = h.basis(0);
        let v = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let t = h.project_tangent(&p, &v).unwrap();
        assert_eq!(t, DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn distances() {
        let h = AmbientSpace::hyperbolic(2);
        let p = h.basis(0);
        let q = DVector::from_vec(vec![1f64.cosh(), 1f64.sinh(), 0.0, 0.0]);
        assert!((h.geodesic_distance(&p, &q).unwrap() - 1.0).abs() < 1e-14);
        let s = AmbientSpace::spherical(2);
        let a = s.basis(1);
        assert!((s.geodesic_distance(&a, &-&a).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(s.geodesic_distance(&a, &a).unwrap(), 0.0);
        assert!(s.geodesic_distance(&a, &(&a * 2.0)).is_err());
    }

    #[test]
    fn radial_field_length() {
        let h = AmbientSpace::hyperbolic(2);
        let a = h.origin();
        let w = DVector::from_vec(vec![0.0, 0.6, 0.0, 0.8]);
        let p = h.geodesic(&a, &w, 1.3);
        let y = h.radial_field(&a, &p);
        assert!((h.norm(&y) - 1.3f64.sinh()).abs() < 1e-12);
    }
}
