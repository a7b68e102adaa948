//! Flux formulas, volume bounds and `H_r` estimates.
//!
//! Orientation conventions: `N` points into the solid `Ω` bounded by `M ∪ D`,
//! and `D` is oriented by `n_D = −ξ`, also pointing into `Ω`. With these
//! choices the flux formula for a conformal field `Y` with factor `φ` reads
//!
//! ```text
//! ∮⟨T_{r−1}ν, Y⟩ = r·binom(n,r)·[∫_M φH_{r−1} − H_r∫_D⟨Y,n_D⟩ + σ_Ω(n+1)H_r∫_Ω φ],   σ_Ω = −1.
//! ```

use nalgebra::DVector;
use serde::Serialize;

use crate::ambient::{AmbientField, SpaceKind};
use crate::boundary::{build_frame, conormal, BoundaryConfig};
use crate::catalog::CatalogEntry;
use crate::error::{invalid, Error, Result};
use crate::immersion::Immersion;
use crate::quadrature::{default_order, integrate_box, tensor_grid, volume, RegionSpec, SolidRegion};
use crate::symfun::binom;

pub const SCHEMA: &str = "newtonflux/1";

/// Orientation sign of the `Ω` term.
pub const SIGMA_OMEGA: f64 = -1.0;

/// Relative spread allowed on sampled `H_r` before it is declared non-constant.
pub const CONSTANCY_TOL: f64 = 1e-6;

/// `|H_r|` below which a hypersurface counts as `r`-minimal.
pub const MINIMAL_TOL: f64 = 1e-8;

const GATE_SAMPLES: usize = 7;
const DIVERGENCE_ASSUMPTION: &str = "div T_{r-1} = 0 (space-form ambient), term dropped";

#[derive(Clone, Debug)]
pub struct FluxOptions {
    /// Per-axis Gauss order; `None` picks the default for the chart dimension.
    pub order: Option<usize>,
    pub gate_tol: f64,
    /// Also evaluate at doubled order and record the change of `lhs − rhs`.
    pub refine: bool,
    /// Descriptor recorded in the report.
    pub descriptor: String,
}

impl Default for FluxOptions {
    fn default() -> Self {
        Self {
            order: None,
            gate_tol: CONSTANCY_TOL,
            refine: false,
            descriptor: String::new(),
        }
    }
}

impl FluxOptions {
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = Some(order);
        self
    }

    pub fn refined(mut self) -> Self {
        self.refine = true;
        self
    }

    fn order_for(&self, dim: usize) -> usize {
        self.order.unwrap_or_else(|| default_order(dim))
    }

    fn orders(&self, dim: usize) -> Vec<usize> {
        vec![self.order_for(dim); dim]
    }

    fn doubled(&self, dim: usize) -> Self {
        Self {
            order: Some(2 * self.order_for(dim)),
            refine: false,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureMeta {
    pub orders: Vec<usize>,
    pub refine_delta: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportConfig {
    pub descriptor: String,
    pub field: String,
    pub sigma_omega: f64,
    pub assumptions: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub schema: String,
    pub formula: String,
    pub r: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub quadrature: QuadratureMeta,
    pub config: ReportConfig,
    /// Sample mean of `H_r`.
    pub h_r: f64,
}

pub fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs())
}

impl FluxReport {
    fn new(formula: &str, r: usize, lhs: f64, rhs: f64, h_r: f64, orders: Vec<usize>, config: ReportConfig) -> Self {
        Self {
            schema: SCHEMA.into(),
            formula: formula.into(),
            r,
            lhs,
            rhs,
            abs_residual: (lhs - rhs).abs(),
            rel_residual: rel_residual(lhs, rhs),
            quadrature: QuadratureMeta {
                orders,
                refine_delta: None,
            },
            config,
            h_r,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_r(imm: &Immersion, r: usize) -> Result<()> {
    let n = imm.dim();
    if r == 0 || r > n {
        return Err(invalid(format!("r must satisfy 1 ≤ r ≤ n = {n}, got {r}")));
    }
    Ok(())
}

/// `(min, max, mean)` of `H_r` over an interior sample grid.
pub fn sample_hr(imm: &Immersion, r: usize, samples: usize) -> Result<(f64, f64, f64)> {
    let grid = tensor_grid(&imm.domain, &vec![samples; imm.dim()])?;
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for u in &grid.points {
        let h = imm.curvature_at(u)?.h(r);
        lo = lo.min(h);
        hi = hi.max(h);
        sum += h;
    }
    Ok((lo, hi, sum / grid.points.len() as f64))
}

/// Sampled `H_r`, failing with a precondition error when it is not constant.
pub fn constant_hr(imm: &Immersion, r: usize, tol: f64) -> Result<f64> {
    let (lo, hi, mean) = sample_hr(imm, r, GATE_SAMPLES)?;
    if !(hi - lo < tol * (1.0 + mean.abs())) {
        return Err(Error::Precondition(format!(
            "H_{r} is not constant: sampled range [{lo:.6e}, {hi:.6e}] exceeds tolerance {tol:e}"
        )));
    }
    Ok(mean)
}

/// `∮_{∂M} ⟨T_{r−1}ν, Y⟩ ds`.
pub fn boundary_flux(imm: &Immersion, field: &AmbientField, r: usize, orders: &[usize]) -> Result<f64> {
    let face = imm.domain.face().ok_or_else(|| invalid("no boundary face"))?;
    integrate_box(&face, orders, |t| {
        let (c, nu, ds) = conormal(imm, t)?;
        let y = field.eval(&c.point);
        Ok(c.newton_form(r - 1, &nu, &y) * ds)
    })
}

/// `∫_M φ H_{r−1} dM`.
pub fn surface_phi_h(imm: &Immersion, field: &AmbientField, r: usize, orders: &[usize]) -> Result<f64> {
    integrate_box(&imm.domain, orders, |u| {
        let c = imm.curvature_at(u)?;
        Ok(field.phi(&c.point) * c.h(r - 1) * c.volume_element())
    })
}

/// `∫_D ⟨Y, n_D⟩ dD` with `n_D` the normal of the disk immersion.
pub fn disk_flux(disk: &Immersion, field: &AmbientField, orders: &[usize]) -> Result<f64> {
    integrate_box(&disk.domain, orders, |u| {
        let f = disk.evaluate_frame(u)?;
        Ok(disk.space.ip(&field.eval(&f.p), &f.normal) * disk.volume_element(u)?)
    })
}

fn config(opts: &FluxOptions, field: &AmbientField, assumptions: Vec<String>) -> ReportConfig {
    ReportConfig {
        descriptor: opts.descriptor.clone(),
        field: field.name().into(),
        sigma_omega: SIGMA_OMEGA,
        assumptions,
    }
}

fn with_refinement<F>(opts: &FluxOptions, dim: usize, eval: F) -> Result<FluxReport>
where
    F: Fn(&FluxOptions) -> Result<FluxReport>,
{
    let mut rep = eval(opts)?;
    if opts.refine {
        let fine = eval(&opts.doubled(dim))?;
        rep.quadrature.refine_delta = Some(((rep.lhs - rep.rhs) - (fine.lhs - fine.rhs)).abs());
    }
    Ok(rep)
}

/// Killing flux: `∮⟨T_{r−1}ν,Y⟩ = −r·binom(n,r)·H_r·∫_D⟨Y,n_D⟩`.
pub fn flux_killing(
    imm: &Immersion,
    disk: Option<&Immersion>,
    field: &AmbientField,
    r: usize,
    opts: &FluxOptions,
) -> Result<FluxReport> {
    check_r(imm, r)?;
    if !field.is_killing() {
        return Err(invalid(format!("field `{}` is not Killing", field.name())));
    }
    let n = imm.dim();
    let h_r = constant_hr(imm, r, opts.gate_tol)?;
    with_refinement(opts, n, |o| {
        let lhs = boundary_flux(imm, field, r, &o.orders(n - 1))?;
        let d = match disk {
            Some(d) => disk_flux(d, field, &o.orders(n))?,
            None if h_r.abs() < MINIMAL_TOL => 0.0,
            None => return Err(Error::Configuration("the entry has no spanning domain D".into())),
        };
        let rhs = -(r as f64) * binom(n, r) * h_r * d;
        Ok(FluxReport::new(
            "killing",
            r,
            lhs,
            rhs,
            h_r,
            o.orders(n),
            config(o, field, vec![DIVERGENCE_ASSUMPTION.into()]),
        ))
    })
}

/// Conformal flux with the `Ω` term; a Killing field skips `Ω` and reduces to [`flux_killing`].
pub fn flux_conformal(
    imm: &Immersion,
    disk: Option<&Immersion>,
    omega: Option<&SolidRegion>,
    field: &AmbientField,
    r: usize,
    opts: &FluxOptions,
) -> Result<FluxReport> {
    if field.is_killing() {
        let mut rep = flux_killing(imm, disk, field, r, opts)?;
        rep.formula = "conformal".into();
        return Ok(rep);
    }
    check_r(imm, r)?;
    let n = imm.dim();
    let h_r = constant_hr(imm, r, opts.gate_tol)?;
    let needs_solid = h_r.abs() >= MINIMAL_TOL;
    with_refinement(opts, n, |o| {
        let orders = o.orders(n);
        let lhs = boundary_flux(imm, field, r, &o.orders(n - 1))?;
        let phi_h = surface_phi_h(imm, field, r, &orders)?;
        let (d, w) = if needs_solid {
            let disk = disk
                .ok_or_else(|| Error::Configuration("the entry has no spanning domain D".into()))?;
            let omega =
                omega.ok_or_else(|| Error::Configuration("the entry has no solid region Ω".into()))?;
            (
                disk_flux(disk, field, &orders)?,
                omega.integral(|q| field.phi(q), &orders)?,
            )
        } else {
            (0.0, 0.0)
        };
        let rhs = r as f64
            * binom(n, r)
            * (phi_h - h_r * d + SIGMA_OMEGA * (n as f64 + 1.0) * h_r * w);
        let mut assumptions = vec![DIVERGENCE_ASSUMPTION.to_string()];
        if needs_solid {
            assumptions.push("Ω star-shaped from its apex".into());
        }
        Ok(FluxReport::new("conformal", r, lhs, rhs, h_r, orders, config(o, field, assumptions)))
    })
}

/// Flux of an `r`-minimal hypersurface: `∮⟨T_{r−1}ν,Y⟩ = r·binom(n,r)·∫_M φH_{r−1}`.
pub fn flux_minimal(imm: &Immersion, field: &AmbientField, r: usize, opts: &FluxOptions) -> Result<FluxReport> {
    check_r(imm, r)?;
    let n = imm.dim();
    let (lo, hi, mean) = sample_hr(imm, r, GATE_SAMPLES)?;
    if lo.abs().max(hi.abs()) >= MINIMAL_TOL {
        return Err(Error::Precondition(format!(
            "H_{r} does not vanish: sampled range [{lo:.6e}, {hi:.6e}]"
        )));
    }
    with_refinement(opts, n, |o| {
        let orders = o.orders(n);
        let lhs = boundary_flux(imm, field, r, &o.orders(n - 1))?;
        let rhs = r as f64 * binom(n, r) * surface_phi_h(imm, field, r, &orders)?;
        Ok(FluxReport::new(
            "minimal",
            r,
            lhs,
            rhs,
            mean,
            orders,
            config(o, field, vec![DIVERGENCE_ASSUMPTION.into()]),
        ))
    })
}

/// Distances from `center` to the boundary nodes of `imm`.
fn boundary_distances(imm: &Immersion, center: &DVector<f64>, samples: usize) -> Result<Vec<f64>> {
    let face = imm.domain.face().ok_or_else(|| invalid("no boundary face"))?;
    let grid = tensor_grid(&face, &vec![samples; imm.dim() - 1])?;
    grid.points
        .iter()
        .map(|t| {
            let mut u = vec![imm.domain.hi[0]];
            u.extend_from_slice(t);
            imm.space.geodesic_distance(center, &imm.position(&u))
        })
        .collect()
}

fn interior_distances(imm: &Immersion, center: &DVector<f64>, samples: usize) -> Result<Vec<f64>> {
    let grid = tensor_grid(&imm.domain, &vec![samples; imm.dim()])?;
    grid.points
        .iter()
        .map(|u| imm.space.geodesic_distance(center, &imm.position(u)))
        .collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeBoundReport {
    pub schema: String,
    pub space: String,
    pub vol_m: f64,
    pub vol_boundary: f64,
    /// Radius of the geodesic sphere containing `∂M`.
    pub rho: f64,
    /// `max dist(a, M)`, spherical case only.
    pub rho0: Option<f64>,
    pub bound: f64,
    pub slack: f64,
    pub equality: bool,
    pub orders: Vec<usize>,
}

/// Relative slack below which a volume bound counts as attained.
pub const VOLUME_EQUALITY_TOL: f64 = 1e-7;

/// Volume bound for a minimal hypersurface whose boundary lies on the geodesic
/// sphere about `center`.
pub fn volume_bound(
    imm: &Immersion,
    center: &DVector<f64>,
    opts: &FluxOptions,
) -> Result<VolumeBoundReport> {
    let n = imm.dim();
    let (lo, hi, _) = sample_hr(imm, 1, GATE_SAMPLES)?;
    if lo.abs().max(hi.abs()) >= MINIMAL_TOL {
        return Err(Error::Precondition(format!(
            "hypersurface is not minimal: sampled H_1 in [{lo:.3e}, {hi:.3e}]"
        )));
    }
    let order = opts.order_for(n);
    let bd = boundary_distances(imm, center, order)?;
    let rho = max_of(&bd);
    if max_of(&bd) - min_of(&bd) > 1e-7 * (1.0 + rho) {
        return Err(Error::Configuration(format!(
            "boundary is not on a geodesic sphere about the centre (radii in [{:.6}, {:.6}])",
            min_of(&bd),
            rho
        )));
    }
    let orders = opts.orders(n);
    let vol_m = volume(&RegionSpec::surface(imm), &orders)?;
    let vol_boundary = volume(&RegionSpec::boundary(imm)?, &opts.orders(n - 1))?;
    let kind = imm.space.kind;
    let (rho0, factor) = match kind {
        SpaceKind::Euclidean => (None, rho),
        SpaceKind::Hyperbolic => (None, rho.sinh()),
        SpaceKind::Spherical => {
            let r0 = max_of(&interior_distances(imm, center, order)?).max(rho);
            if !(r0 < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Configuration(
                    "spherical volume bound needs M inside the open hemisphere about the centre".into(),
                ));
            }
            (Some(r0), rho.sin() / r0.cos())
        }
    };
    let bound = factor / n as f64 * vol_boundary;
    let slack = bound - vol_m;
    Ok(VolumeBoundReport {
        schema: SCHEMA.into(),
        space: kind.name().into(),
        vol_m,
        vol_boundary,
        rho,
        rho0,
        bound,
        slack,
        equality: slack.abs() < VOLUME_EQUALITY_TOL * bound,
        orders,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub schema: String,
    pub space: String,
    pub r: usize,
    pub h_r: f64,
    /// `C·∮|h_{r−1}| / (n·vol D)`.
    pub bound: f64,
    /// `1/ϱ^r`, `coth^r ϱ` or `cot^r ϱ`.
    pub closed_form: f64,
    pub slack: f64,
    pub closed_form_slack: f64,
    /// `|H_r|` attains the closed-form bound within [`ESTIMATE_EQUALITY_TOL`].
    pub equality: bool,
    pub c: f64,
    pub rho: f64,
    pub vol_d: f64,
    pub boundary_integral: f64,
    /// `n·H_r·∫_D⟨Y,n_D⟩` against `(−1)^r ∮ h_{r−1}⟨Y,ξ⟩⟨ξ,ν⟩^r ds`.
    pub identity_lhs: f64,
    pub identity_rhs: f64,
    pub identity_residual: f64,
    pub samples: usize,
}

pub const ESTIMATE_EQUALITY_TOL: f64 = 1e-8;

/// `|H_r|` against the boundary-curvature bound for a catalog configuration with
/// `Σ` in a totally geodesic `P`.
pub fn hr_estimate(entry: &CatalogEntry, r: usize, opts: &FluxOptions) -> Result<EstimateReport> {
    let imm = &entry.immersion;
    check_r(imm, r)?;
    let n = imm.dim();
    let cfg: &BoundaryConfig = &entry.boundary;
    if !cfg.p.is_totally_geodesic() {
        return Err(Error::Configuration("estimate needs Σ in a totally geodesic P".into()));
    }
    let disk = entry
        .disk
        .as_ref()
        .ok_or_else(|| Error::Configuration("the entry has no spanning domain D".into()))?;
    let kind = entry.space.kind;
    if kind == SpaceKind::Spherical && !entry.in_hemisphere {
        return Err(Error::Configuration(
            "spherical estimate needs the configuration inside an open hemisphere".into(),
        ));
    }
    let h_r = constant_hr(imm, r, opts.gate_tol)?;
    let field = AmbientField::p_orthogonal_killing(entry.space, cfg.d_center.clone())?;
    let order = opts.order_for(n);
    let orders = opts.orders(n);

    let face = imm.domain.face().ok_or_else(|| invalid("no boundary face"))?;
    let b_orders = opts.orders(n - 1);
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let parts = crate::quadrature::integrate_box_vec(&face, &b_orders, 2, |t| {
        let f = build_frame(imm, cfg, t)?;
        let h = f.h_tau(r - 1);
        let y = field.eval(&f.point);
        let s = entry.space;
        Ok(vec![
            h.abs() * f.ds,
            sign * h * s.ip(&y, &f.xi) * f.xi_nu().powi(r as i32) * f.ds,
        ])
    })?;
    let (abs_int, identity_rhs) = (parts[0], parts[1]);
    let vol_d = volume(&RegionSpec::disk(disk), &orders)?;
    let identity_lhs = n as f64 * h_r * disk_flux(disk, &field, &orders)?;

    let bd = boundary_distances(imm, &cfg.d_center, order)?;
    let rho = max_of(&bd);
    let c = match kind {
        SpaceKind::Euclidean => 1.0,
        SpaceKind::Hyperbolic => max_of(&bd).cosh(),
        SpaceKind::Spherical => {
            let mut all = interior_distances(disk, &cfg.d_center, order)?;
            all.extend_from_slice(&bd);
            max_of(&bd).cos() / max_of(&all).cos()
        }
    };
    let bound = c * abs_int / (n as f64 * vol_d);
    let closed_form = match kind {
        SpaceKind::Euclidean => rho.recip(),
        SpaceKind::Hyperbolic => rho.tanh().recip(),
        SpaceKind::Spherical => rho.tan().recip(),
    }
    .powi(r as i32);
    let closed_form_slack = closed_form - h_r.abs();
    Ok(EstimateReport {
        schema: SCHEMA.into(),
        space: kind.name().into(),
        r,
        h_r,
        bound,
        closed_form,
        slack: bound - h_r.abs(),
        closed_form_slack,
        equality: closed_form_slack.abs() < ESTIMATE_EQUALITY_TOL,
        c,
        rho,
        vol_d,
        boundary_integral: abs_int,
        identity_lhs,
        identity_rhs,
        identity_residual: (identity_lhs - identity_rhs).abs(),
        samples: bd.len(),
    })
}

/// Flux report for a catalog entry; the evaluator follows the field kind.
pub fn entry_flux(entry: &CatalogEntry, field: &AmbientField, r: usize, opts: &FluxOptions) -> Result<FluxReport> {
    let mut o = opts.clone();
    if o.descriptor.is_empty() {
        o.descriptor = entry.id.clone();
    }
    if field.is_killing() {
        return flux_killing(&entry.immersion, entry.disk.as_ref(), field, r, &o);
    }
    if entry.is_minimal() {
        return flux_minimal(&entry.immersion, field, r, &o);
    }
    flux_conformal(&entry.immersion, entry.disk.as_ref(), entry.omega.as_ref(), field, r, &o)
}
