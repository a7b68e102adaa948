//! Boundary geometry of a hypersurface whose boundary lies on a hypersurface `P`.
//!
//! Along `∂M` the frame is `(ν, N)` in `TM^⊥(∂M)` and `(η, ξ)` with `η` normal
//! to `Σ = ψ(∂M)` inside `P` and `ξ` the normal of `P`. The orientation of `ξ`
//! is tied to the others by `⟨η,ν⟩ = ⟨ξ,N⟩` and `⟨η,N⟩ = −⟨ξ,ν⟩`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::ambient::{AmbientSpace, SpaceKind};
use crate::error::{invalid, Error, Result};
use crate::immersion::{CurvatureData, Immersion};
use crate::linalg::sym_eigen;
use crate::quadrature::tensor_grid;
use crate::symfun::{binom, bordered_invariants, elem_sym_without, expand};

/// Tolerance for "boundary point lies on `P`".
pub const ON_P_TOL: f64 = 1e-8;

/// The hypersurface containing the boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum HypersurfaceP {
    /// `{⟨x, normal⟩ = offset}`. In the curved models the offset must be zero,
    /// which makes `P` totally geodesic.
    Hyperplane { normal: DVector<f64>, offset: f64 },
    /// Euclidean round sphere.
    RoundSphere { center: DVector<f64>, radius: f64 },
}

impl HypersurfaceP {
    /// `{x_last = 0}`.
    pub fn coordinate_plane(space: &AmbientSpace) -> Self {
        HypersurfaceP::Hyperplane {
            normal: space.p_normal(),
            offset: 0.0,
        }
    }

    pub fn validate(&self, space: &AmbientSpace) -> Result<()> {
        match self {
            HypersurfaceP::Hyperplane { normal, offset } => {
                if normal.len() != space.embed_dim() {
                    return Err(invalid("P normal has the wrong length"));
                }
                if (space.ip(normal, normal) - 1.0).abs() > 1e-12 {
                    return Err(invalid("P normal must be a unit spacelike vector"));
                }
                if space.is_curved() && *offset != 0.0 {
                    return Err(Error::Configuration(
                        "only totally geodesic hyperplanes are supported in curved models".into(),
                    ));
                }
            }
            HypersurfaceP::RoundSphere { center, radius } => {
                if space.kind != SpaceKind::Euclidean {
                    return Err(Error::Configuration(
                        "round-sphere P is only supported in Euclidean space".into(),
                    ));
                }
                if center.len() != space.embed_dim() || !(*radius > 0.0) {
                    return Err(invalid("bad round-sphere P"));
                }
            }
        }
        Ok(())
    }

    /// Signed defining function of `P`.
    pub fn level(&self, space: &AmbientSpace, p: &DVector<f64>) -> f64 {
        match self {
            HypersurfaceP::Hyperplane { normal, offset } => space.ip(p, normal) - offset,
            HypersurfaceP::RoundSphere { center, radius } => (p - center).norm() - radius,
        }
    }

    /// Unit normal `ξ_P` of `P` at `p` (outward for spheres).
    pub fn unit_normal(&self, _space: &AmbientSpace, p: &DVector<f64>) -> DVector<f64> {
        match self {
            HypersurfaceP::Hyperplane { normal, .. } => normal.clone(),
            HypersurfaceP::RoundSphere { center, radius } => (p - center) / *radius,
        }
    }

    /// Umbilicity factor of `P` with respect to [`unit_normal`](Self::unit_normal).
    pub fn lambda(&self) -> f64 {
        match self {
            HypersurfaceP::Hyperplane { .. } => 0.0,
            HypersurfaceP::RoundSphere { radius, .. } => -1.0 / radius,
        }
    }

    pub fn is_totally_geodesic(&self) -> bool {
        matches!(self, HypersurfaceP::Hyperplane { .. })
    }
}

/// `P` plus the user-declared reference point of the domain `D ⊂ P` bounded by `Σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConfig {
    pub p: HypersurfaceP,
    pub d_center: DVector<f64>,
}

/// Boundary data at one point of `∂M`.
#[derive(Clone, Debug)]
pub struct BoundaryFrame {
    /// Boundary parameter (the chart face `u_0 = hi_0`).
    pub t: Vec<f64>,
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
    pub nu: DVector<f64>,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
    /// Principal curvatures of `Σ ⊂ P` with respect to `η`, descending.
    pub tau: Vec<f64>,
    /// Orthonormal eigenvectors of `A_Σ`, matching `tau`.
    pub sigma_frame: Vec<DVector<f64>>,
    pub lambda: f64,
    /// Line or area element of `∂M` at this point.
    pub ds: f64,
    pub curvature: CurvatureData,
}

impl BoundaryFrame {
    pub fn xi_nu(&self) -> f64 {
        self.curvature.space().ip(&self.xi, &self.nu)
    }

    pub fn xi_n(&self) -> f64 {
        self.curvature.space().ip(&self.xi, &self.normal)
    }

    /// `s_j(τ)`, zero for `j ≥ n`.
    pub fn s_tau(&self, j: usize) -> f64 {
        expand(&self.tau).get(j)
    }

    /// Normalized `h_j = s_j / binom(n−1, j)`.
    pub fn h_tau(&self, j: usize) -> f64 {
        let m = self.tau.len();
        if j > m {
            0.0
        } else {
            self.s_tau(j) / binom(m, j)
        }
    }
}

/// Curvature, outward conormal and boundary volume element at the boundary parameter `t`.
pub fn conormal(imm: &Immersion, t: &[f64]) -> Result<(CurvatureData, DVector<f64>, f64)> {
    let n = imm.dim();
    if n < 2 || t.len() != n - 1 {
        return Err(invalid("boundary parameter has the wrong length"));
    }
    let mut u = vec![imm.domain.hi[0]];
    u.extend_from_slice(t);
    let c = imm.curvature_at(&u)?;
    let (nu, ds) = conormal_from(imm, &c)?;
    Ok((c, nu, ds))
}

fn conormal_from(imm: &Immersion, c: &CurvatureData) -> Result<(DVector<f64>, f64)> {
    let n = c.n();
    let m = n - 1;
    let gs = c.g.view((1, 1), (m, m)).into_owned();
    let rhs = DVector::from_iterator(m, (0..m).map(|a| c.g[(0, a + 1)]));
    let chol = gs.cholesky().ok_or_else(|| Error::DegenerateImmersion {
        u: c.u.clone(),
        reason: "boundary metric is not positive definite".into(),
    })?;
    let coef = chol.solve(&rhs);
    let mut nu = c.tangents[0].clone();
    for a in 0..m {
        nu -= &c.tangents[a + 1] * coef[a];
    }
    let len = imm.space.norm(&nu);
    if !(len > 0.0) {
        return Err(Error::DegenerateImmersion {
            u: c.u.clone(),
            reason: "conormal vanishes".into(),
        });
    }
    Ok((nu / len, chol.l().diagonal().product()))
}

/// Build the boundary frame at boundary parameter `t`.
pub fn build_frame(imm: &Immersion, cfg: &BoundaryConfig, t: &[f64]) -> Result<BoundaryFrame> {
    let space = imm.space;
    cfg.p.validate(&space)?;
    let inner_level = cfg.p.level(&space, &imm.position(&imm.domain.center()));
    if inner_level.abs() < 1e-9 {
        return Err(Error::Precondition(
            "the hypersurface lies in P; the boundary configuration is degenerate".into(),
        ));
    }
    let (c, nu, ds) = conormal(imm, t)?;
    let p = c.point.clone();
    let off = cfg.p.level(&space, &p);
    if off.abs() > ON_P_TOL {
        return Err(Error::Configuration(format!(
            "boundary point at t = {t:?} is off P by {off:.3e}"
        )));
    }
    let n_vec = c.normal.clone();
    let xi_p = cfg.p.unit_normal(&space, &p);
    let mut eta = &nu * space.ip(&xi_p, &n_vec) - &n_vec * space.ip(&xi_p, &nu);
    let len = space.norm(&eta);
    if !(len > 1e-12) {
        return Err(Error::DegenerateImmersion {
            u: c.u.clone(),
            reason: "P normal is not in span{ν, N}".into(),
        });
    }
    eta /= len;
    if space.ip(&eta, &space.radial_field(&cfg.d_center, &p)) < 0.0 {
        eta = -eta;
    }
    let xi = &nu * -space.ip(&eta, &n_vec) + &n_vec * space.ip(&eta, &nu);
    let lambda = cfg.p.lambda() * space.ip(&xi, &xi_p);

    let (tau, sigma_frame) = sigma_curvature(imm, &c.u, &eta)?;
    Ok(BoundaryFrame {
        t: t.to_vec(),
        point: p,
        normal: n_vec,
        nu,
        xi,
        eta,
        tau,
        sigma_frame,
        lambda,
        ds,
        curvature: c,
    })
}

/// Principal curvatures and directions of the boundary face inside `P`, w.r.t. `eta`.
fn sigma_curvature(
    imm: &Immersion,
    u: &[f64],
    eta: &DVector<f64>,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let space = imm.space;
    let d = imm.derivatives(u)?;
    let m = imm.dim() - 1;
    let gs = DMatrix::from_fn(m, m, |a, b| space.ip(&d.d1[a + 1], &d.d1[b + 1]));
    let bs = DMatrix::from_fn(m, m, |a, b| space.ip(&d.d2[a + 1][b + 1], eta));
    let chol = gs.cholesky().ok_or_else(|| Error::DegenerateImmersion {
        u: u.to_vec(),
        reason: "boundary metric is not positive definite".into(),
    })?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(m, m))
        .expect("cholesky factor is invertible");
    let a = &l_inv * bs * l_inv.transpose();
    let eig = sym_eigen(&a)?;
    // e_i = Σ_a ψ_a (L⁻ᵀ V)_{a i}
    let coef = l_inv.transpose() * &eig.vectors;
    let frame = (0..m)
        .map(|i| {
            let mut e = DVector::zeros(d.p.len());
            for a in 0..m {
                e += &d.d1[a + 1] * coef[(a, i)];
            }
            e
        })
        .collect();
    Ok((eig.values, frame))
}

/// `|⟨η,ν⟩ − ⟨ξ,N⟩| + |⟨η,N⟩ + ⟨ξ,ν⟩|`.
pub fn nueta_residual(f: &BoundaryFrame) -> f64 {
    let s = f.curvature.space();
    (s.ip(&f.eta, &f.nu) - s.ip(&f.xi, &f.normal)).abs()
        + (s.ip(&f.eta, &f.normal) + s.ip(&f.xi, &f.nu)).abs()
}

/// Lhs, rhs and residual of
/// `⟨T_rν,ν⟩ = Σ_j (−1)^j binom(n−1−j, r−j) λ^{r−j} ⟨ξ,N⟩^{r−j} ⟨ξ,ν⟩^j s_j(τ)`.
pub fn identity_umbilic(f: &BoundaryFrame, curv: &CurvatureData, r: usize) -> Result<(f64, f64, f64)> {
    let n = curv.n();
    if r == 0 || r >= n {
        return Err(invalid(format!("r must satisfy 1 ≤ r ≤ n − 1 = {}", n - 1)));
    }
    let lhs = curv.newton_form(r, &f.nu, &f.nu);
    let (xn, xnu) = (f.xi_n(), f.xi_nu());
    let s = expand(&f.tau);
    let rhs: f64 = (0..=r)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom(n - 1 - j, r - j)
                * (f.lambda * xn).powi((r - j) as i32)
                * xnu.powi(j as i32)
                * s.get(j)
        })
        .sum();
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Residual of the boundary expansion of `S_r` in the frame `(e_1 … e_{n−1}, ν)`
/// that diagonalizes `A_Σ` (totally geodesic `P` only).
pub fn identity_sr(f: &BoundaryFrame, curv: &CurvatureData, r: usize) -> Result<f64> {
    let n = curv.n();
    if r == 0 || r > n {
        return Err(invalid(format!("r must satisfy 1 ≤ r ≤ n = {n}")));
    }
    if f.lambda != 0.0 {
        return Err(Error::Precondition(
            "the S_r boundary expansion needs a totally geodesic P".into(),
        ));
    }
    let x = f.xi_nu();
    let a_nn = curv.shape_form(&f.nu, &f.nu);
    let c: Vec<f64> = f.sigma_frame.iter().map(|e| curv.shape_form(&f.nu, e)).collect();
    let s = expand(&f.tau);
    let pw = |k: usize| x.powi(k as i32);
    let sg = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let expansion = match r {
        1 => -s.get(1) * x + a_nn,
        2 => s.get(2) * x * x - s.get(1) * x * a_nn - c.iter().map(|v| v * v).sum::<f64>(),
        _ => {
            let tail: f64 = c
                .iter()
                .enumerate()
                .map(|(i, ci)| elem_sym_without(&f.tau, i).get(r - 2) * ci * ci)
                .sum();
            sg(r) * s.get(r) * pw(r) + sg(r - 1) * s.get(r - 1) * pw(r - 1) * a_nn
                - sg(r - 2) * pw(r - 2) * tail
        }
    };
    Ok((curv.s(r) - expansion).abs())
}

/// `max_ij |⟨Ae_i,e_j⟩ + ⟨A_Σe_i,e_j⟩⟨ξ,ν⟩ − λ⟨ξ,N⟩δ_ij|`.
pub fn forma_a2_residual(f: &BoundaryFrame, curv: &CurvatureData) -> f64 {
    let (x, xn) = (f.xi_nu(), f.xi_n());
    let mut worst: f64 = 0.0;
    for (i, ei) in f.sigma_frame.iter().enumerate() {
        for (j, ej) in f.sigma_frame.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = curv.shape_form(ei, ej) + delta * f.tau[i] * x - f.lambda * xn * delta;
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// `max_r |S_r − S_r(bordered)|` with the bordered matrix read off the boundary frame.
pub fn bordered_residual(f: &BoundaryFrame, curv: &CurvatureData) -> Result<f64> {
    let gamma: Vec<f64> = f.sigma_frame.iter().map(|e| curv.shape_form(e, e)).collect();
    let c: Vec<f64> = f.sigma_frame.iter().map(|e| curv.shape_form(&f.nu, e)).collect();
    let corner = curv.shape_form(&f.nu, &f.nu);
    let s = bordered_invariants(&gamma, &c, corner)?;
    Ok((1..=curv.n())
        .map(|r| (s.get(r) - curv.s(r)).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    pub r: usize,
    pub min_abs_xi_nu: f64,
    pub min_newton_eigen: f64,
    pub min_s2: f64,
    pub min_abs_sn: f64,
    pub threshold: f64,
    pub transverse: bool,
    pub boundary_samples: usize,
    pub interior_samples: usize,
}

/// Default threshold on `min |⟨ξ,ν⟩|`.
pub const TRANSVERSE_THRESHOLD: f64 = 1e-6;

/// Sample `|⟨ξ,ν⟩|` along `∂M` and the ellipticity data of `T_r` inside `M`.
pub fn transversality_report(
    imm: &Immersion,
    cfg: &BoundaryConfig,
    r: usize,
    samples: usize,
    threshold: f64,
) -> Result<TransversalityReport> {
    let n = imm.dim();
    if r > n {
        return Err(invalid(format!("r = {r} exceeds n = {n}")));
    }
    let face = imm.domain.face().ok_or_else(|| invalid("no boundary face"))?;
    let bgrid = tensor_grid(&face, &vec![samples; n - 1])?;
    let mut min_xn = f64::INFINITY;
    for t in &bgrid.points {
        let f = build_frame(imm, cfg, t)?;
        min_xn = min_xn.min(f.xi_nu().abs());
    }
    let igrid = tensor_grid(&imm.domain, &vec![samples; n])?;
    let (mut min_eig, mut min_s2, mut min_sn) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for u in &igrid.points {
        let c = imm.curvature_at(u)?;
        min_eig = min_eig.min(c.newton.min_eigen(r));
        min_s2 = min_s2.min(c.s(2));
        min_sn = min_sn.min(c.s(n).abs());
    }
    Ok(TransversalityReport {
        r,
        min_abs_xi_nu: min_xn,
        min_newton_eigen: min_eig,
        min_s2,
        min_abs_sn: min_sn,
        threshold,
        transverse: min_xn > threshold,
        boundary_samples: bgrid.points.len(),
        interior_samples: igrid.points.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticPoint {
    pub u: Vec<f64>,
    /// `min_i |κ_i|` at the point.
    pub margin: f64,
}

/// First grid point where all principal curvatures share a strict sign.
pub fn elliptic_point_scan(imm: &Immersion, samples: usize) -> Result<Option<EllipticPoint>> {
    const STRICT: f64 = 1e-10;
    let grid = tensor_grid(&imm.domain, &vec![samples; imm.dim()])?;
    for u in &grid.points {
        let c = imm.curvature_at(u)?;
        let (lo, hi) = (
            c.kappa.iter().copied().fold(f64::INFINITY, f64::min),
            c.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        if lo > STRICT || hi < -STRICT {
            let margin = c.kappa.iter().map(|k| k.abs()).fold(f64::INFINITY, f64::min);
            return Ok(Some(EllipticPoint {
                u: u.clone(),
                margin,
            }));
        }
    }
    Ok(None)
}
