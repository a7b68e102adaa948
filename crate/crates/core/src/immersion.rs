//! Chart-parametrized hypersurfaces and their curvature.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::ambient::AmbientSpace;
use crate::chart::ChartMap;
use crate::error::{invalid, Error, Result};
use crate::jet::{Jet2, MAX_VARS};
use crate::linalg::sym_eigen;
use crate::symfun::{newton_transforms, NewtonSeq};

/// Polar charts are kept this far away from their singular loci.
pub const POLAR_MARGIN: f64 = 1e-6;

/// Default finite-difference step for the metric in [`Immersion::newton_field_divergence`].
pub const DIVERGENCE_STEP: f64 = 1e-4;

/// Rectangular parameter domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("parameter box bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid(format!("degenerate parameter box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Distance from `u` to the nearest face; negative when outside.
    pub fn margin(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (a, b))| (x - a).min(b - x))
            .fold(f64::INFINITY, f64::min)
    }

    /// The box with axis 0 removed (the boundary face `u_0 = hi_0`).
    pub fn face(&self) -> Option<ParamBox> {
        if self.dim() < 2 {
            return None;
        }
        Some(ParamBox {
            lo: self.lo[1..].to_vec(),
            hi: self.hi[1..].to_vec(),
        })
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Map from `[0,1]ⁿ` coordinates into the box.
    pub fn lerp(&self, t: &[f64]) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(t)
            .map(|((a, b), s)| a + (b - a) * s)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference(f64),
}

/// Rule fixing the sign of the unit normal.
#[derive(Clone, Debug, PartialEq)]
pub enum Orientation {
    /// `⟨N, q − p⟩ > 0`.
    Toward(DVector<f64>),
    /// `⟨N, q − p⟩ < 0`.
    Away(DVector<f64>),
    /// `⟨N, v⟩ > 0`.
    Along(DVector<f64>),
    /// `⟨N, v⟩ < 0`.
    Against(DVector<f64>),
}

impl Orientation {
    pub fn flipped(&self) -> Self {
        match self {
            Orientation::Toward(q) => Orientation::Away(q.clone()),
            Orientation::Away(q) => Orientation::Toward(q.clone()),
            Orientation::Along(v) => Orientation::Against(v.clone()),
            Orientation::Against(v) => Orientation::Along(v.clone()),
        }
    }

    fn sign(&self, space: &AmbientSpace, p: &DVector<f64>, n: &DVector<f64>) -> f64 {
        let s = match self {
            Orientation::Toward(q) => space.ip(n, &(q - p)),
            Orientation::Away(q) => -space.ip(n, &(q - p)),
            Orientation::Along(v) => space.ip(n, v),
            Orientation::Against(v) => -space.ip(n, v),
        };
        if s < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Position and first two derivatives of the chart at a point.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub p: DVector<f64>,
    pub d1: Vec<DVector<f64>>,
    pub d2: Vec<Vec<DVector<f64>>>,
}

/// Point, chart tangents and oriented unit normal.
#[derive(Clone, Debug)]
pub struct Frame {
    pub p: DVector<f64>,
    pub tangents: Vec<DVector<f64>>,
    pub normal: DVector<f64>,
}

/// Pointwise curvature of an immersion.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub u: Vec<f64>,
    pub point: DVector<f64>,
    pub tangents: Vec<DVector<f64>>,
    pub normal: DVector<f64>,
    pub g: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Cholesky factor, `g = L·Lᵀ`.
    pub l: DMatrix<f64>,
    /// Orthonormal tangent frame `e_a = Σ_i ψ_i (L⁻ᵀ)_{ia}`.
    pub frame: Vec<DVector<f64>>,
    /// Shape operator in the orthonormal frame.
    pub a_frame: DMatrix<f64>,
    /// Principal curvatures, descending.
    pub kappa: Vec<f64>,
    pub newton: NewtonSeq,
    space: AmbientSpace,
}

impl CurvatureData {
    pub fn n(&self) -> usize {
        self.newton.n
    }

    pub fn s(&self, r: usize) -> f64 {
        self.newton.s.get(r).copied().unwrap_or(0.0)
    }

    pub fn h(&self, r: usize) -> f64 {
        self.newton.h.get(r).copied().unwrap_or(0.0)
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    /// Components `⟨X, e_a⟩` of a tangent vector in the orthonormal frame.
    pub fn frame_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.frame.iter().map(|e| self.space.ip(x, e)))
    }

    pub fn from_frame(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.point.len());
        for (e, &ci) in self.frame.iter().zip(c.iter()) {
            out += e * ci;
        }
        out
    }

    /// `T_r X` as an embedding vector.
    pub fn apply_newton(&self, r: usize, x: &DVector<f64>) -> DVector<f64> {
        self.from_frame(&(&self.newton.t[r] * self.frame_coords(x)))
    }

    /// `⟨T_r X, Y⟩`.
    pub fn newton_form(&self, r: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let (cx, cy) = (self.frame_coords(x), self.frame_coords(y));
        cy.dot(&(&self.newton.t[r] * cx))
    }

    /// `⟨A X, Y⟩`.
    pub fn shape_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let (cx, cy) = (self.frame_coords(x), self.frame_coords(y));
        cy.dot(&(&self.a_frame * cx))
    }

    /// `T_r` as a (1,1)-tensor on the chart basis: `T ψ_j = Σ_i (T_chart)_{ij} ψ_i`.
    pub fn t_chart(&self, r: usize) -> DMatrix<f64> {
        let lt = self.l.transpose();
        let lt_inv = lt
            .clone()
            .solve_upper_triangular(&DMatrix::identity(self.n(), self.n()))
            .expect("cholesky factor is invertible");
        lt_inv * &self.newton.t[r] * lt
    }

    /// Riemannian volume element `√det g`.
    pub fn volume_element(&self) -> f64 {
        self.l.diagonal().product()
    }
}

/// Chart divergence of a Newton transformation.
#[derive(Clone, Debug)]
pub struct Divergence {
    /// Chart components of the vector field `div T_r`.
    pub components: Vec<f64>,
    /// Its length in the induced metric.
    pub norm_g: f64,
}

/// A chart-parametrized hypersurface (possibly with boundary) in a space form.
///
/// The boundary, when present, is the face `u_0 = hi_0` of the parameter box.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub space: AmbientSpace,
    pub domain: ParamBox,
    pub map: Arc<dyn ChartMap>,
    pub mode: DerivativeMode,
    pub orientation: Orientation,
}

impl Immersion {
    pub fn new(
        space: AmbientSpace,
        domain: ParamBox,
        map: Arc<dyn ChartMap>,
        orientation: Orientation,
    ) -> Result<Self> {
        if map.embed_dim() != space.embed_dim() {
            return Err(invalid(format!(
                "chart embeds in dimension {}, ambient needs {}",
                map.embed_dim(),
                space.embed_dim()
            )));
        }
        if map.param_dim() != domain.dim() {
            return Err(invalid("chart and domain dimensions differ"));
        }
        if domain.dim() > MAX_VARS {
            return Err(invalid(format!("at most {MAX_VARS} chart parameters supported")));
        }
        Ok(Self {
            space,
            domain,
            map,
            mode: DerivativeMode::Analytic,
            orientation,
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.orientation = self.orientation.flipped();
        out
    }

    /// Dimension of the parameter domain.
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn position(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.map.eval_f64(u))
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(invalid(format!(
                "parameter has {} entries, expected {}",
                u.len(),
                self.dim()
            )));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(invalid("parameter is not finite"));
        }
        // allow tiny roundoff outside the box
        if self.domain.margin(u) < -1e-12 {
            return Err(Error::OutOfDomain {
                u: u.to_vec(),
                margin: 0.0,
            });
        }
        Ok(())
    }

    pub fn derivatives(&self, u: &[f64]) -> Result<Derivatives> {
        self.check_u(u)?;
        let n = self.dim();
        let d = match self.mode {
            DerivativeMode::Analytic => {
                let vars: Vec<Jet2> = u.iter().enumerate().map(|(i, &x)| Jet2::var(x, i)).collect();
                let out = self.map.eval_jet(&vars);
                let p = DVector::from_iterator(out.len(), out.iter().map(|j| j.v));
                let d1 = (0..n)
                    .map(|i| DVector::from_iterator(out.len(), out.iter().map(|j| j.g[i])))
                    .collect();
                let d2 = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|k| {
                                DVector::from_iterator(out.len(), out.iter().map(|j| j.h[i][k]))
                            })
                            .collect()
                    })
                    .collect();
                Derivatives { p, d1, d2 }
            }
            DerivativeMode::FiniteDifference(h) => self.fd_derivatives(u, h),
        };
        if d.p.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: "chart value is not finite".into(),
            });
        }
        Ok(d)
    }

    fn fd_derivatives(&self, u: &[f64], h: f64) -> Derivatives {
        let n = self.dim();
        let f = |du: &[(usize, f64)]| {
            let mut v = u.to_vec();
            for &(i, s) in du {
                v[i] += s;
            }
            self.position(&v)
        };
        let p = self.position(u);
        let d1 = (0..n)
            .map(|i| (f(&[(i, h)]) - f(&[(i, -h)])) / (2.0 * h))
            .collect();
        let mut d2 = vec![vec![DVector::zeros(p.len()); n]; n];
        for i in 0..n {
            d2[i][i] = (f(&[(i, h)]) - &p * 2.0 + f(&[(i, -h)])) / (h * h);
            for k in (i + 1)..n {
                let v = (f(&[(i, h), (k, h)]) - f(&[(i, h), (k, -h)]) - f(&[(i, -h), (k, h)])
                    + f(&[(i, -h), (k, -h)]))
                    / (4.0 * h * h);
                d2[i][k] = v.clone();
                d2[k][i] = v;
            }
        }
        Derivatives { p, d1, d2 }
    }

    /// Induced metric `g_ij = ⟨ψ_i, ψ_j⟩` from first derivatives.
    pub fn metric(&self, d1: &[DVector<f64>]) -> DMatrix<f64> {
        let n = d1.len();
        DMatrix::from_fn(n, n, |i, j| self.space.ip(&d1[i], &d1[j]))
    }

    fn normal_from(&self, u: &[f64], d: &Derivatives) -> Result<DVector<f64>> {
        let dim = self.space.embed_dim();
        let mut rows: Vec<DVector<f64>> = d.d1.iter().map(|v| self.space.lower(v)).collect();
        if self.space.is_curved() {
            rows.push(self.space.lower(&d.p));
        }
        debug_assert_eq!(rows.len(), dim - 1);
        // generalized cross product: cofactor expansion along a formal last row
        let mut raw = DVector::zeros(dim);
        for k in 0..dim {
            let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
                let col = if c < k { c } else { c + 1 };
                rows[r][col]
            });
            let sgn = if (k + dim - 1) % 2 == 0 { 1.0 } else { -1.0 };
            raw[k] = sgn * minor.determinant();
        }
        let scale: f64 = d.d1.iter().map(|v| v.norm()).product::<f64>().max(f64::MIN_POSITIVE);
        let q = self.space.ip(&raw, &raw);
        if !(q > 1e-20 * scale * scale) {
            return Err(Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: "tangent vectors are linearly dependent".into(),
            });
        }
        let nrm = raw / q.sqrt();
        Ok(&nrm * self.orientation.sign(&self.space, &d.p, &nrm))
    }

    pub fn evaluate_frame(&self, u: &[f64]) -> Result<Frame> {
        let d = self.derivatives(u)?;
        let normal = self.normal_from(u, &d)?;
        Ok(Frame {
            p: d.p,
            tangents: d.d1,
            normal,
        })
    }

    /// Smallest singular value of the chart differential in the model metric.
    pub fn min_singular_value(&self, u: &[f64]) -> Result<f64> {
        let d = self.derivatives(u)?;
        let e = sym_eigen(&self.metric(&d.d1))?;
        Ok(e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }

    pub fn curvature_at(&self, u: &[f64]) -> Result<CurvatureData> {
        let d = self.derivatives(u)?;
        let normal = self.normal_from(u, &d)?;
        let n = self.dim();
        let g = self.metric(&d.d1);
        let b = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (self.space.ip(&d.d2[i][j], &normal) + self.space.ip(&d.d2[j][i], &normal))
        });
        let chol = g.clone().cholesky().ok_or_else(|| Error::DegenerateImmersion {
            u: u.to_vec(),
            reason: "induced metric is not positive definite".into(),
        })?;
        let l = chol.l();
        let ident = DMatrix::identity(n, n);
        let l_inv = l
            .clone()
            .solve_lower_triangular(&ident)
            .ok_or_else(|| Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: "singular cholesky factor".into(),
            })?;
        let a = &l_inv * &b * l_inv.transpose();
        let a_frame = (&a + a.transpose()) * 0.5;
        let frame = (0..n)
            .map(|c| {
                let mut e = DVector::zeros(d.p.len());
                for (i, t) in d.d1.iter().enumerate() {
                    e += t * l_inv[(c, i)];
                }
                e
            })
            .collect();
        let newton = newton_transforms(&a_frame)?;
        Ok(CurvatureData {
            u: u.to_vec(),
            point: d.p,
            tangents: d.d1,
            normal,
            g,
            b,
            l,
            frame,
            kappa: newton.eigenvalues.clone(),
            a_frame,
            newton,
            space: self.space,
        })
    }

    /// `√det g` at `u`.
    pub fn volume_element(&self, u: &[f64]) -> Result<f64> {
        let d = self.derivatives(u)?;
        let g = self.metric(&d.d1);
        let chol = g.cholesky().ok_or_else(|| Error::DegenerateImmersion {
            u: u.to_vec(),
            reason: "induced metric is not positive definite".into(),
        })?;
        Ok(chol.l().diagonal().product())
    }

    /// `n(n − 1)(c̄ + H_2)`.
    pub fn scalar_curvature(&self, u: &[f64]) -> Result<f64> {
        let c = self.curvature_at(u)?;
        let n = c.n() as f64;
        Ok(n * (n - 1.0) * (self.space.curvature() + c.h(2)))
    }

    /// `(‖div T_r‖ at h, ‖div T_r‖ at 2h, log2 of their ratio)`.
    pub fn divergence_slope(&self, u: &[f64], r: usize, h: f64) -> Result<(f64, f64, f64)> {
        let fine = self.newton_field_divergence(u, r, h)?.norm_g;
        let coarse = self.newton_field_divergence(u, r, 2.0 * h)?.norm_g;
        Ok((fine, coarse, (coarse / fine).log2()))
    }

    /// `div T_r` by finite differences of the metric and of the chart
    /// components of `T_r`, with step `h`.
    pub fn newton_field_divergence(&self, u: &[f64], r: usize, h: f64) -> Result<Divergence> {
        let n = self.dim();
        if r > n {
            return Err(invalid(format!("r = {r} exceeds n = {n}")));
        }
        if !(h > 0.0) {
            return Err(invalid("finite-difference step must be positive"));
        }
        if u.len() != n || self.domain.margin(u) < 2.0 * h {
            return Err(Error::OutOfDomain {
                u: u.to_vec(),
                margin: 2.0 * h,
            });
        }
        let c0 = self.curvature_at(u)?;
        if r == 0 {
            return Ok(Divergence {
                components: vec![0.0; n],
                norm_g: 0.0,
            });
        }
        let g_inv = c0
            .g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateImmersion {
                u: u.to_vec(),
                reason: "metric not invertible".into(),
            })?;
        let mut dg = Vec::with_capacity(n);
        let mut dt = Vec::with_capacity(n);
        for k in 0..n {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[k] += h;
            dn[k] -= h;
            let (cp, cm) = (self.curvature_at(&up)?, self.curvature_at(&dn)?);
            dg.push((&cp.g - &cm.g) / (2.0 * h));
            dt.push((cp.t_chart(r) - cm.t_chart(r)) / (2.0 * h));
        }
        // Γ^k_ij
        let gamma = |k: usize, i: usize, j: usize| -> f64 {
            (0..n)
                .map(|m| g_inv[(k, m)] * (dg[i][(j, m)] + dg[j][(i, m)] - dg[m][(i, j)]))
                .sum::<f64>()
                * 0.5
        };
        let t = c0.t_chart(r);
        // (div T)_j = ∂_i T^i_j + Γ^i_il T^l_j − Γ^l_ij T^i_l
        let mut w = DVector::zeros(n);
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += dt[i][(i, j)];
                for l in 0..n {
                    acc += gamma(i, i, l) * t[(l, j)];
                    acc -= gamma(l, i, j) * t[(i, l)];
                }
            }
            w[j] = acc;
        }
        let vv = &g_inv * &w;
        let norm_g = w.dot(&vv).max(0.0).sqrt();
        let v: Vec<f64> = vv.iter().copied().collect();
        Ok(Divergence {
            components: v,
            norm_g,
        })
    }
}
