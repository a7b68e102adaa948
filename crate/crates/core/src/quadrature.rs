//! Tensor-product Gauss–Legendre quadrature over charts and star-shaped solids.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::ambient::AmbientSpace;
use crate::chart::{ChartMap, SharedFace};
use crate::error::{invalid, Error, Result};
use crate::immersion::{Immersion, ParamBox};
use crate::jet::Jet2;
use crate::linalg::pairwise_sum;

/// Default per-axis order: 32 for charts of dimension ≤ 2, 16 above.
pub fn default_order(dim: usize) -> usize {
    if dim <= 2 {
        32
    } else {
        16
    }
}

pub fn default_orders(dim: usize) -> Vec<usize> {
    vec![default_order(dim); dim]
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(order).ok_or_else(|| invalid("quadrature order must be ≥ 1"))?;
        let rule = GaussLegendre::new(deg);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            order,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        (
            self.nodes.iter().map(|x| m + r * x).collect(),
            self.weights.iter().map(|w| w * r).collect(),
        )
    }

    /// `∫_a^b f`.
    pub fn integrate_1d(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = self.on_interval(a, b);
        let vals: Vec<f64> = x.iter().zip(&w).map(|(x, w)| f(*x) * w).collect();
        pairwise_sum(&vals)
    }
}

/// Tensor-product nodes over a box, in lexicographic order (last axis fastest).
#[derive(Clone, Debug)]
pub struct TensorGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub fn tensor_grid(bx: &ParamBox, orders: &[usize]) -> Result<TensorGrid> {
    if orders.len() != bx.dim() {
        return Err(invalid(format!(
            "{} quadrature orders for a {}-dimensional box",
            orders.len(),
            bx.dim()
        )));
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> = orders
        .iter()
        .enumerate()
        .map(|(i, &o)| Ok(QuadratureRule::gauss_legendre(o)?.on_interval(bx.lo[i], bx.hi[i])))
        .collect::<Result<_>>()?;
    let mut points = vec![vec![]];
    let mut weights = vec![1.0];
    for (x, w) in &axes {
        let mut np = Vec::with_capacity(points.len() * x.len());
        let mut nw = Vec::with_capacity(points.len() * x.len());
        for (p, pw) in points.iter().zip(&weights) {
            for (xi, wi) in x.iter().zip(w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        points = np;
        weights = nw;
    }
    Ok(TensorGrid { points, weights })
}

/// `∫_box f`, evaluating nodes in parallel and summing in a fixed order.
pub fn integrate_box<F>(bx: &ParamBox, orders: &[usize], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    Ok(integrate_box_vec(bx, orders, 1, |u| Ok(vec![f(u)?]))?[0])
}

/// Several integrals over the same nodes.
pub fn integrate_box_vec<F>(bx: &ParamBox, orders: &[usize], k: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let grid = tensor_grid(bx, orders)?;
    let vals: Vec<Vec<f64>> = grid
        .points
        .par_iter()
        .map(|u| {
            let v = f(u)?;
            if v.len() != k || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Integration { node: u.clone() });
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok((0..k)
        .map(|j| {
            let terms: Vec<f64> = vals.iter().zip(&grid.weights).map(|(v, w)| v[j] * w).collect();
            pairwise_sum(&terms)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    SurfaceM,
    BoundaryDM,
    DiskD,
}

/// A parametrized region of dimension `k` together with its volume element.
#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub space: AmbientSpace,
    pub chart: Arc<dyn ChartMap>,
    pub domain: ParamBox,
}

impl RegionSpec {
    pub fn surface(imm: &Immersion) -> Self {
        Self {
            kind: RegionKind::SurfaceM,
            space: imm.space,
            chart: imm.map.clone(),
            domain: imm.domain.clone(),
        }
    }

    pub fn disk(imm: &Immersion) -> Self {
        Self {
            kind: RegionKind::DiskD,
            ..Self::surface(imm)
        }
    }

    /// The boundary face `u_0 = hi_0` of an immersion.
    pub fn boundary(imm: &Immersion) -> Result<Self> {
        let domain = imm
            .domain
            .face()
            .ok_or_else(|| invalid("a one-dimensional chart has no boundary face"))?;
        Ok(Self {
            kind: RegionKind::BoundaryDM,
            space: imm.space,
            chart: Arc::new(SharedFace {
                inner: imm.map.clone(),
                value: imm.domain.hi[0],
            }),
            domain,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn position(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.chart.eval_f64(u))
    }

    /// `√det(⟨ψ_i, ψ_j⟩)`.
    pub fn metric_factor(&self, u: &[f64]) -> f64 {
        let vars: Vec<Jet2> = u.iter().enumerate().map(|(i, &x)| Jet2::var(x, i)).collect();
        let out = self.chart.eval_jet(&vars);
        let k = u.len();
        let cols: Vec<DVector<f64>> = (0..k)
            .map(|i| DVector::from_iterator(out.len(), out.iter().map(|j| j.g[i])))
            .collect();
        let g = DMatrix::from_fn(k, k, |i, j| self.space.ip(&cols[i], &cols[j]));
        g.determinant().max(0.0).sqrt()
    }
}

/// `∫_region f dV` with `f` receiving the parameter and the point.
pub fn integrate<F>(region: &RegionSpec, f: F, orders: &[usize]) -> Result<f64>
where
    F: Fn(&[f64], &DVector<f64>) -> Result<f64> + Sync,
{
    integrate_box(&region.domain, orders, |u| {
        let m = region.metric_factor(u);
        if !(m > 0.0) {
            return Err(Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: "vanishing volume element".into(),
            });
        }
        Ok(f(u, &region.position(u))? * m)
    })
}

/// `k`-volume of a region.
pub fn volume(region: &RegionSpec, orders: &[usize]) -> Result<f64> {
    integrate(region, |_, _| Ok(1.0), orders)
}

/// Solid region bounded by pieces whose normals point into it, star-shaped
/// with respect to `apex` along geodesics.
#[derive(Clone, Debug)]
pub struct SolidRegion {
    pub space: AmbientSpace,
    pub apex: DVector<f64>,
    pub pieces: Vec<Immersion>,
}

/// Slack allowed on `⟨dir, n_out⟩` before a piece is declared not star-shaped.
const STAR_TOL: f64 = 1e-9;

impl SolidRegion {
    /// `∫_Ω f` for several integrands at once, in geodesic polar coordinates about the apex.
    pub fn integrals<F>(&self, k: usize, f: F, orders: &[usize]) -> Result<Vec<f64>>
    where
        F: Fn(&DVector<f64>) -> Vec<f64> + Sync,
    {
        let space = self.space;
        let kind = space.kind;
        let n = space.n as i32;
        let radial = QuadratureRule::gauss_legendre(orders[0])?;
        let mut total = vec![0.0; k];
        for piece in &self.pieces {
            let part = integrate_box_vec(&piece.domain, orders, k, |u| {
                let fr = piece.evaluate_frame(u)?;
                let da = piece.volume_element(u)?;
                let (w, rho) = space.log_direction(&self.apex, &fr.p);
                if rho == 0.0 {
                    return Ok(vec![0.0; k]);
                }
                let dir = &self.apex * kind.co_prime(rho) + &w * kind.sn_prime(rho);
                let cosang = -space.ip(&dir, &fr.normal);
                if cosang < -STAR_TOL {
                    return Err(Error::UnsupportedRegion(format!(
                        "solid is not star-shaped from the apex (u = {u:?}, cos = {cosang:.3e})"
                    )));
                }
                let (x, wts) = radial.on_interval(0.0, rho);
                let mut acc = vec![Vec::with_capacity(x.len()); k];
                for (r, wr) in x.iter().zip(&wts) {
                    let q = space.geodesic(&self.apex, &w, *r);
                    let jac = kind.sn(*r).powi(n) * wr;
                    for (a, v) in acc.iter_mut().zip(f(&q)) {
                        a.push(v * jac);
                    }
                }
                let scale = cosang.max(0.0) * da / kind.sn(rho).powi(n);
                Ok(acc.iter().map(|a| pairwise_sum(a) * scale).collect())
            })?;
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        Ok(total)
    }

    pub fn integral<F>(&self, f: F, orders: &[usize]) -> Result<f64>
    where
        F: Fn(&DVector<f64>) -> f64 + Sync,
    {
        Ok(self.integrals(1, |q| vec![f(q)], orders)?[0])
    }
}

/// `(vol(Ω), ∫_Ω φ)`.
pub fn solid_volume_terms<F>(omega: &SolidRegion, phi: F, orders: &[usize]) -> Result<(f64, f64)>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    let v = omega.integrals(2, |q| vec![1.0, phi(q)], orders)?;
    Ok((v[0], v[1]))
}
