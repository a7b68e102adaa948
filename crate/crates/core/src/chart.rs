//! Closed-form chart maps.
//!
//! Every map is written once over [`Real`] so it can be evaluated on plain
//! floats or on [`Jet2`] for exact first and second derivatives.

use nalgebra::DVector;

use crate::ambient::SpaceKind;
use crate::jet::{Jet2, Real};

/// Generic chart map `u ↦ ψ(u)`.
pub trait ChartFn: Send + Sync + std::fmt::Debug {
    fn param_dim(&self) -> usize;
    fn embed_dim(&self) -> usize;
    fn map<T: Real>(&self, u: &[T]) -> Vec<T>;
}

/// Object-safe view of a [`ChartFn`].
pub trait ChartMap: Send + Sync + std::fmt::Debug {
    fn param_dim(&self) -> usize;
    fn embed_dim(&self) -> usize;
    fn eval_f64(&self, u: &[f64]) -> Vec<f64>;
    fn eval_jet(&self, u: &[Jet2]) -> Vec<Jet2>;
    fn as_any(&self) -> &dyn std::any::Any;
}

impl<C: ChartFn + 'static> ChartMap for C {
    fn param_dim(&self) -> usize {
        ChartFn::param_dim(self)
    }
    fn embed_dim(&self) -> usize {
        ChartFn::embed_dim(self)
    }
    fn eval_f64(&self, u: &[f64]) -> Vec<f64> {
        self.map(u)
    }
    fn eval_jet(&self, u: &[Jet2]) -> Vec<Jet2> {
        self.map(u)
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

fn co<T: Real>(kind: SpaceKind, t: T) -> T {
    match kind {
        SpaceKind::Euclidean => T::cst(1.0),
        SpaceKind::Hyperbolic => t.cosh(),
        SpaceKind::Spherical => t.cos(),
    }
}

fn sn<T: Real>(kind: SpaceKind, t: T) -> T {
    match kind {
        SpaceKind::Euclidean => t,
        SpaceKind::Hyperbolic => t.sinh(),
        SpaceKind::Spherical => t.sin(),
    }
}

/// Unit vector in `ℝᵐ` from `m − 1` angles.
///
/// `m = 1`: `(1)`; `m = 2`: `(cos φ, sin φ)`;
/// `m = 3`: `(sin θ cos φ, sin θ sin φ, cos θ)` with angles `(θ, φ)`.
pub fn unit_direction<T: Real>(angles: &[T]) -> Vec<T> {
    match angles.len() {
        0 => vec![T::cst(1.0)],
        1 => vec![angles[0].cos(), angles[0].sin()],
        2 => {
            let (th, ph) = (angles[0], angles[1]);
            vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
        }
        m => panic!("unit_direction supports at most 2 angles, got {m}"),
    }
}

fn combine<T: Real>(terms: &[(T, &[f64])], d: usize) -> Vec<T> {
    let mut out = vec![T::cst(0.0); d];
    for (coef, v) in terms {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            if x != 0.0 {
                *o = *o + coef.scale(x);
            }
        }
    }
    out
}

/// Smooth bump used to perturb caps; vanishes on the boundary face.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialBump {
    pub amplitude: f64,
    pub s_max: f64,
    /// Horizontal weights `w` in `1 + ½ sin(s)⟨Θ, w⟩`.
    pub weights: Vec<f64>,
}

impl RadialBump {
    fn eval<T: Real>(&self, s: T, theta: &[T]) -> T {
        let one = T::cst(1.0);
        let q = s / T::cst(self.s_max);
        let mut lin = T::cst(0.0);
        for (t, &w) in theta.iter().zip(&self.weights) {
            lin = lin + t.scale(w);
        }
        ((one - q * q) * (one + s.sin() * lin.scale(0.5))).scale(self.amplitude)
    }
}

/// Piece of a geodesic sphere of radius `radius` about `center`, in polar
/// coordinates `(s, angles…)` measured from the pole `co(R)c + sn(R)·axis`.
///
/// `ψ = co(R)c + sn(R)(cos s·axis + sin s·Σ Θ_k E_k)` with `E_k` the horizontal
/// basis directions. An optional bump perturbs `R` pointwise.
#[derive(Clone, Debug)]
pub struct SphereCapChart {
    pub kind: SpaceKind,
    pub n: usize,
    pub radius: f64,
    pub center: DVector<f64>,
    pub axis: DVector<f64>,
    pub horizontal: Vec<DVector<f64>>,
    pub bump: Option<RadialBump>,
}

impl SphereCapChart {
    /// Sphere radius after the bump at parameter `u`.
    pub fn effective_radius(&self, u: &[f64]) -> f64 {
        match &self.bump {
            Some(b) => self.radius + b.eval(u[0], &unit_direction(&u[1..])),
            None => self.radius,
        }
    }
}

impl ChartFn for SphereCapChart {
    fn param_dim(&self) -> usize {
        self.n
    }
    fn embed_dim(&self) -> usize {
        self.center.len()
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let s = u[0];
        let theta = unit_direction(&u[1..]);
        let rad = match &self.bump {
            Some(b) => T::cst(self.radius) + b.eval(s, &theta),
            None => T::cst(self.radius),
        };
        let (c, r) = (co(self.kind, rad), sn(self.kind, rad));
        let mut terms: Vec<(T, &[f64])> = vec![
            (c, self.center.as_slice()),
            (r * s.cos(), self.axis.as_slice()),
        ];
        let rs = r * s.sin();
        for (t, e) in theta.iter().zip(&self.horizontal) {
            terms.push((rs * *t, e.as_slice()));
        }
        combine(&terms, ChartFn::embed_dim(self))
    }
}

/// Geodesic ball of dimension `m` about `center`, spanned by the orthonormal
/// directions `basis`: `ψ = co(t)c + sn(t)·Σ Θ_k E_k`, parameters `(t, angles…)`.
#[derive(Clone, Debug)]
pub struct GeodesicBallChart {
    pub kind: SpaceKind,
    pub center: DVector<f64>,
    pub basis: Vec<DVector<f64>>,
}

impl ChartFn for GeodesicBallChart {
    fn param_dim(&self) -> usize {
        self.basis.len()
    }
    fn embed_dim(&self) -> usize {
        self.center.len()
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let t = u[0];
        let theta = unit_direction(&u[1..]);
        let r = sn(self.kind, t);
        let mut terms: Vec<(T, &[f64])> = vec![(co(self.kind, t), self.center.as_slice())];
        for (th, e) in theta.iter().zip(&self.basis) {
            terms.push((r * *th, e.as_slice()));
        }
        combine(&terms, ChartFn::embed_dim(self))
    }
}

/// Horosphere piece in the hyperboloid model:
/// `ψ = αℓ + (1 + t²)/(4α)·m + t·Θ` with `ℓ = e_0 + e_last`, `m = e_0 − e_last`.
#[derive(Clone, Debug)]
pub struct HorosphereChart {
    pub n: usize,
    pub alpha: f64,
}

impl ChartFn for HorosphereChart {
    fn param_dim(&self) -> usize {
        self.n
    }
    fn embed_dim(&self) -> usize {
        self.n + 2
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let t = u[0];
        let theta = unit_direction(&u[1..]);
        let one = T::cst(1.0);
        let a = T::cst(self.alpha);
        let b = (one + t * t).scale(0.25 / self.alpha);
        let mut out = vec![T::cst(0.0); self.n + 2];
        out[0] = a + b;
        out[self.n + 1] = a - b;
        for (k, th) in theta.iter().enumerate() {
            out[k + 1] = t * *th;
        }
        out
    }
}

/// Equidistant hypersurface piece at distance `d` from the totally geodesic
/// hyperplane through `q0` with unit normal `v`:
/// `ψ = cosh d·(cosh t·q0 + sinh t·Θ) + sinh d·v`.
#[derive(Clone, Debug)]
pub struct EquidistantChart {
    pub n: usize,
    pub d: f64,
    pub q0: DVector<f64>,
    pub v: DVector<f64>,
}

impl ChartFn for EquidistantChart {
    fn param_dim(&self) -> usize {
        self.n
    }
    fn embed_dim(&self) -> usize {
        self.n + 2
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let t = u[0];
        let theta = unit_direction(&u[1..]);
        let (cd, sd) = (self.d.cosh(), self.d.sinh());
        let mut out = combine(
            &[
                (t.cosh().scale(cd), self.q0.as_slice()),
                (T::cst(sd), self.v.as_slice()),
            ],
            self.n + 2,
        );
        let st = t.sinh().scale(cd);
        for (k, th) in theta.iter().enumerate() {
            out[k + 1] = out[k + 1] + st * *th;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphProfile {
    /// `x² − y²`.
    Saddle,
    /// `c(ρ² − |x|²)²`: meets the base plane tangentially.
    Tangent,
    /// `c(ρ² − |x|²)(1 + 0.3x₀ + 0.2x₁²)`.
    Poly,
}

/// Euclidean graph `x ↦ (x, f(x))` over a ball of radius `rho`, polar parameters.
#[derive(Clone, Debug)]
pub struct GraphChart {
    pub n: usize,
    pub rho: f64,
    pub scale: f64,
    pub profile: GraphProfile,
}

impl GraphChart {
    pub fn height<T: Real>(&self, x: &[T]) -> T {
        let c = self.scale;
        let mut r2 = T::cst(0.0);
        for &xi in x {
            r2 = r2 + xi * xi;
        }
        let gap = T::cst(self.rho * self.rho) - r2;
        match self.profile {
            GraphProfile::Saddle => (x[0] * x[0] - x[1] * x[1]).scale(c),
            GraphProfile::Tangent => (gap * gap).scale(c),
            GraphProfile::Poly => {
                let w = T::cst(1.0) + x[0].scale(0.3) + (x[1] * x[1]).scale(0.2);
                (gap * w).scale(c)
            }
        }
    }
}

impl ChartFn for GraphChart {
    fn param_dim(&self) -> usize {
        self.n
    }
    fn embed_dim(&self) -> usize {
        self.n + 1
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let t = u[0];
        let theta = unit_direction(&u[1..]);
        let mut x: Vec<T> = theta.iter().map(|&th| t * th).collect();
        let z = self.height(&x);
        x.push(z);
        x
    }
}

/// A chart restricted to the face `u_0 = value`.
#[derive(Clone, Debug)]
pub struct FaceChart<C> {
    pub inner: C,
    pub value: f64,
}

impl<C: ChartFn> ChartFn for FaceChart<C> {
    fn param_dim(&self) -> usize {
        self.inner.param_dim() - 1
    }
    fn embed_dim(&self) -> usize {
        self.inner.embed_dim()
    }
    fn map<T: Real>(&self, u: &[T]) -> Vec<T> {
        let mut full = Vec::with_capacity(u.len() + 1);
        full.push(T::cst(self.value));
        full.extend_from_slice(u);
        self.inner.map(&full)
    }
}

/// Type-erased chart restricted to the face `u_0 = value`.
#[derive(Clone, Debug)]
pub struct SharedFace {
    pub inner: std::sync::Arc<dyn ChartMap>,
    pub value: f64,
}

impl SharedFace {
    fn full<T: Copy>(&self, u: &[T], first: T) -> Vec<T> {
        let mut v = Vec::with_capacity(u.len() + 1);
        v.push(first);
        v.extend_from_slice(u);
        v
    }
}

impl ChartMap for SharedFace {
    fn param_dim(&self) -> usize {
        self.inner.param_dim() - 1
    }
    fn embed_dim(&self) -> usize {
        self.inner.embed_dim()
    }
    fn eval_f64(&self, u: &[f64]) -> Vec<f64> {
        self.inner.eval_f64(&self.full(u, self.value))
    }
    fn eval_jet(&self, u: &[Jet2]) -> Vec<Jet2> {
        self.inner.eval_jet(&self.full(u, Jet2::constant(self.value)))
    }
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_directions_are_unit() {
        for a in [0.1, 1.3, 2.9] {
            let d = unit_direction(&[a, 0.7]);
            let n: f64 = d.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn horosphere_on_hyperboloid() {
        let c = HorosphereChart { n: 2, alpha: 0.8 };
        let p = c.map(&[0.4, 1.1]);
        let q = -p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
        assert!((q + 1.0).abs() < 1e-14);
    }
}
