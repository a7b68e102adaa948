//! Closed-form model configurations.
//!
//! Entries are addressed by descriptors `family:key=val,key=val`, e.g.
//! `euclidean_cap:n=2,R=2,rho=1` or `hyperbolic_cap:kind=horosphere,n=2,rho=0.8`.
//!
//! | family | keys |
//! |---|---|
//! | `euclidean_cap` | `n`, `R`, `rho`, `large` |
//! | `euclidean_cap_sphere_boundary` | `n` |
//! | `hyperbolic_cap` | `kind` (`geodesic_sphere`, `horosphere`, `equidistant`, `totally_geodesic`), `n`, `R`, `rho`, `d`, `large` |
//! | `spherical_cap` | `kind` (`geodesic_sphere`, `totally_geodesic`), `n`, `R`, `rho`, `large`, `hemisphere` |
//! | `flat_disk` | `n`, `rho`, `offset` |
//! | `perturbed_graph` | `base` (a cap family), `amplitude`, `seed`, plus the base keys |
//! | `graph` | `kind` (`saddle`, `tangent`, `poly`), `rho`, `scale` |
//!
//! Caps are oriented so that `N` points into the solid `Ω` bounded by `M ∪ D`;
//! with this choice every umbilic cap has positive principal curvature.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambient::{AmbientField, AmbientSpace, SpaceKind};
use crate::boundary::{BoundaryConfig, HypersurfaceP};
use crate::chart::{
    ChartMap, EquidistantChart, GeodesicBallChart, GraphChart, GraphProfile, HorosphereChart,
    RadialBump, SphereCapChart,
};
use crate::error::{Error, Result};
use crate::immersion::{Immersion, Orientation, ParamBox, POLAR_MARGIN};
use crate::quadrature::{tensor_grid, SolidRegion};

/// Closed-form values attached to a catalog entry.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AnalyticReference {
    /// Common principal curvature of an umbilic entry.
    pub kappa: Option<f64>,
    /// Common principal curvature `τ` of `Σ ⊂ P` w.r.t. the outward `η`.
    pub tau: Option<f64>,
    /// `⟨ξ,ν⟩` along the boundary.
    pub xi_nu: Option<f64>,
    /// Geodesic radius of `Σ` about the centre of `D`.
    pub boundary_radius: Option<f64>,
    pub vol_m: Option<f64>,
    pub vol_boundary: Option<f64>,
    pub vol_d: Option<f64>,
}

impl AnalyticReference {
    /// `H_r = κ^r` for umbilic entries.
    pub fn h(&self, r: usize) -> Option<f64> {
        self.kappa.map(|k| k.powi(r as i32))
    }
}

/// A model hypersurface with its boundary configuration.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub family: String,
    pub space: AmbientSpace,
    pub immersion: Immersion,
    pub boundary: BoundaryConfig,
    /// The domain `D ⊂ P` bounded by `Σ`, oriented into `Ω`.
    pub disk: Option<Immersion>,
    pub omega: Option<SolidRegion>,
    pub reference: AnalyticReference,
    /// Whether `M ∪ D` lies in the open hemisphere `{x_0 > 0}` (spherical entries).
    pub in_hemisphere: bool,
}

impl CatalogEntry {
    pub fn n(&self) -> usize {
        self.space.n
    }

    /// Centre of `D` (and of the boundary sphere for minimal disks).
    pub fn center(&self) -> &DVector<f64> {
        &self.boundary.d_center
    }

    pub fn is_minimal(&self) -> bool {
        self.reference.kappa == Some(0.0)
    }
}

/// Parsed descriptor: family name plus key/value pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl Descriptor {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = match s.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (s, ""),
        };
        if family.is_empty() || !family.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Configuration(format!("malformed family name in `{s}`")));
        }
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::Configuration(format!("expected key=value, got `{kv}`"))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Configuration(format!("empty key or value in `{kv}`")));
            }
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Configuration(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self {
            family: family.to_string(),
            params,
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Configuration(format!(
                    "unknown key `{k}` for family `{}` (allowed: {})",
                    self.family,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn float(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.params.get(key) {
            Some(v) => v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                Error::Configuration(format!("field `{key}`: `{v}` is not a finite number"))
            }),
            None => default
                .ok_or_else(|| Error::Configuration(format!("missing required field `{key}`"))),
        }
    }

    pub fn uint(&self, key: &str, default: Option<u64>) -> Result<u64> {
        match self.params.get(key) {
            Some(v) => v.parse::<u64>().map_err(|_| {
                Error::Configuration(format!("field `{key}`: `{v}` is not a non-negative integer"))
            }),
            None => default
                .ok_or_else(|| Error::Configuration(format!("missing required field `{key}`"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key).map(String::as_str) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(Error::Configuration(format!(
                "field `{key}`: `{v}` is not a boolean"
            ))),
        }
    }

    pub fn text<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.params.get(key).map(String::as_str).unwrap_or(default)
    }

    fn dim(&self) -> Result<usize> {
        let n = self.uint("n", Some(2))? as usize;
        if !(2..=3).contains(&n) {
            return Err(Error::Configuration(format!(
                "field `n`: catalog hypersurfaces have n ∈ {{2, 3}}, got {n}"
            )));
        }
        Ok(n)
    }

    /// Re-serialize with `key` replaced.
    pub fn with(&self, key: &str, value: f64) -> Self {
        let mut d = self.clone();
        d.params.insert(key.to_string(), format!("{value:?}"));
        d
    }

    pub fn to_descriptor(&self) -> String {
        let kv: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}:{}", self.family, kv.join(","))
    }
}

/// Build a catalog entry from a descriptor string.
pub fn from_descriptor(s: &str) -> Result<CatalogEntry> {
    let d = Descriptor::parse(s)?;
    let mut e = build(&d)?;
    e.id = s.trim().to_string();
    Ok(e)
}

pub fn build(d: &Descriptor) -> Result<CatalogEntry> {
    match d.family.as_str() {
        "euclidean_cap" => {
            d.check_keys(&["n", "R", "rho", "large"])?;
            euclidean_cap(d.dim()?, d.float("R", None)?, d.float("rho", None)?, d.flag("large")?)
        }
        "euclidean_cap_sphere_boundary" => {
            d.check_keys(&["n"])?;
            euclidean_cap_sphere_boundary(d.dim()?)
        }
        "hyperbolic_cap" => {
            d.check_keys(&["kind", "n", "R", "rho", "d", "large"])?;
            let n = d.dim()?;
            let rho = d.float("rho", None)?;
            match d.text("kind", "geodesic_sphere") {
                "geodesic_sphere" => {
                    umbilic_cap(AmbientSpace::hyperbolic(n), d.float("R", None)?, rho, d.flag("large")?)
                }
                "horosphere" => horosphere_cap(n, rho),
                "equidistant" => equidistant_cap(n, d.float("d", None)?, rho),
                "totally_geodesic" => geodesic_disk(AmbientSpace::hyperbolic(n), rho),
                k => Err(Error::Configuration(format!("field `kind`: unknown hyperbolic cap kind `{k}`"))),
            }
        }
        "spherical_cap" => {
            d.check_keys(&["kind", "n", "R", "rho", "large", "hemisphere"])?;
            let n = d.dim()?;
            let rho = d.float("rho", None)?;
            let e = match d.text("kind", "geodesic_sphere") {
                "geodesic_sphere" => {
                    umbilic_cap(AmbientSpace::spherical(n), d.float("R", None)?, rho, d.flag("large")?)?
                }
                "totally_geodesic" => geodesic_disk(AmbientSpace::spherical(n), rho)?,
                k => {
                    return Err(Error::Configuration(format!(
                        "field `kind`: unknown spherical cap kind `{k}`"
                    )))
                }
            };
            if d.flag("hemisphere")? && !e.in_hemisphere {
                return Err(Error::InvalidParameters(
                    "cap is not contained in the open hemisphere x_0 > 0".into(),
                ));
            }
            Ok(e)
        }
        "flat_disk" => {
            d.check_keys(&["n", "rho", "offset"])?;
            flat_disk(d.dim()?, d.float("rho", None)?, d.float("offset", Some(0.0))?)
        }
        "perturbed_graph" => {
            let base_family = d.text("base", "euclidean_cap").to_string();
            let amplitude = d.float("amplitude", None)?;
            let seed = d.uint("seed", Some(0))?;
            let mut base = d.clone();
            base.family = base_family;
            for k in ["base", "amplitude", "seed"] {
                base.params.remove(k);
            }
            perturbed(&build(&base)?, amplitude, seed)
        }
        "graph" => {
            d.check_keys(&["kind", "n", "rho", "scale"])?;
            let profile = match d.text("kind", "poly") {
                "saddle" => GraphProfile::Saddle,
                "tangent" => GraphProfile::Tangent,
                "poly" => GraphProfile::Poly,
                k => return Err(Error::Configuration(format!("field `kind`: unknown graph kind `{k}`"))),
            };
            let n = d.uint("n", Some(2))? as usize;
            if n != 2 {
                return Err(Error::Configuration("field `n`: graphs are two-dimensional".into()));
            }
            graph(profile, d.float("rho", Some(1.0))?, d.float("scale", Some(0.3))?)
        }
        f => Err(Error::Configuration(format!("unknown catalog family `{f}`"))),
    }
}

fn area_of_unit_sphere(n: usize) -> f64 {
    // S^{n-1}
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// `∫_0^ρ sn(t)^{n−1} dt` in closed form.
fn radial_volume(kind: SpaceKind, n: usize, rho: f64) -> f64 {
    match (kind, n) {
        (SpaceKind::Euclidean, _) => rho.powi(n as i32) / n as f64,
        (SpaceKind::Hyperbolic, 2) => rho.cosh() - 1.0,
        (SpaceKind::Hyperbolic, 3) => 0.5 * (rho.sinh() * rho.cosh() - rho),
        (SpaceKind::Spherical, 2) => 1.0 - rho.cos(),
        (SpaceKind::Spherical, 3) => 0.5 * (rho - rho.sin() * rho.cos()),
        _ => f64::NAN,
    }
}

/// Parameter box `[ε, hi] × angles`.
fn polar_box(n: usize, hi: f64) -> Result<ParamBox> {
    let e = POLAR_MARGIN;
    let (lo, hi) = match n {
        2 => (vec![e, 0.0], vec![hi, 2.0 * PI]),
        3 => (vec![e, e, 0.0], vec![hi, PI - e, 2.0 * PI]),
        _ => return Err(Error::Configuration(format!("unsupported dimension {n}"))),
    };
    ParamBox::new(lo, hi)
}

fn horizontal_basis(space: &AmbientSpace) -> Vec<DVector<f64>> {
    (0..space.n).map(|k| space.basis(space.horizontal(k))).collect()
}

fn midpoint(space: &AmbientSpace, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    match space.kind {
        SpaceKind::Euclidean => Ok((a + b) * 0.5),
        _ => space.normalize_point(&(a + b)),
    }
}

/// Geodesic ball `D ⊂ P` of radius `rho` about the origin, oriented towards `apex`.
fn disk_in_p(space: &AmbientSpace, rho: f64, apex: &DVector<f64>) -> Result<Immersion> {
    let chart = GeodesicBallChart {
        kind: space.kind,
        center: space.origin(),
        basis: horizontal_basis(space),
    };
    Immersion::new(
        *space,
        polar_box(space.n, rho)?,
        Arc::new(chart),
        Orientation::Toward(apex.clone()),
    )
}

/// Whether every sampled point of the given immersions has `x_0 > 0`.
fn inside_hemisphere(pieces: &[&Immersion]) -> Result<bool> {
    for imm in pieces {
        let grid = tensor_grid(&imm.domain, &vec![12; imm.dim()])?;
        let mut corners = grid.points;
        corners.push(imm.domain.hi.clone());
        corners.push(imm.domain.lo.clone());
        for u in &corners {
            if imm.position(u)[0] <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cap of a geodesic sphere of radius `radius` over a geodesic sphere of radius
/// `rho` in the totally geodesic `P = {x_last = 0}`; small cap unless `large`.
pub fn umbilic_cap(space: AmbientSpace, radius: f64, rho: f64, large: bool) -> Result<CatalogEntry> {
    let kind = space.kind;
    let n = space.n;
    if !(rho > 0.0) || !(radius >= rho) {
        return Err(Error::InvalidParameters(format!(
            "need 0 < rho ≤ R, got rho = {rho}, R = {radius}"
        )));
    }
    if kind == SpaceKind::Spherical && !(radius <= PI / 2.0) {
        return Err(Error::InvalidParameters(format!(
            "spherical caps need R ≤ π/2, got R = {radius}"
        )));
    }
    let sign = if large { 1.0 } else { -1.0 };
    // signed height of the centre above P
    let h = sign
        * match kind {
            SpaceKind::Euclidean => (radius * radius - rho * rho).max(0.0).sqrt(),
            SpaceKind::Hyperbolic => (radius.cosh() / rho.cosh()).max(1.0).acosh(),
            SpaceKind::Spherical => (radius.cos() / rho.cos()).clamp(-1.0, 1.0).acos(),
        };
    let cos_smax = -kind.co(radius) * kind.sn(h) / (kind.sn(radius) * kind.co(h));
    let s_max = cos_smax.clamp(-1.0, 1.0).acos();
    let o = space.origin();
    let e = space.p_normal();
    let center = &o * kind.co(h) + &e * kind.sn(h);
    let axis = &o * kind.co_prime(h) + &e * kind.sn_prime(h);
    let chart = SphereCapChart {
        kind,
        n,
        radius,
        center: center.clone(),
        axis: axis.clone(),
        horizontal: horizontal_basis(&space),
        bump: None,
    };
    let pole = &center * kind.co(radius) + &axis * kind.sn(radius);
    let apex = midpoint(&space, &o, &pole)?;
    let immersion = Immersion::new(
        space,
        polar_box(n, s_max)?,
        Arc::new(chart),
        Orientation::Toward(center),
    )?;
    let disk = disk_in_p(&space, rho, &apex)?;
    let vol_sphere = area_of_unit_sphere(n);
    let vol_m = vol_sphere
        * kind.sn(radius).powi(n as i32)
        * match n {
            2 => 1.0 - s_max.cos(),
            _ => 0.5 * (s_max - s_max.sin() * s_max.cos()),
        };
    let in_hemisphere = match kind {
        SpaceKind::Spherical => inside_hemisphere(&[&immersion, &disk])?,
        _ => false,
    };
    let reference = AnalyticReference {
        kappa: Some(kind.sphere_curvature(radius)),
        tau: Some(-kind.sphere_curvature(rho)),
        xi_nu: (kind == SpaceKind::Euclidean).then(|| s_max.sin()),
        boundary_radius: Some(rho),
        vol_m: Some(vol_m),
        vol_boundary: Some(vol_sphere * kind.sn(rho).powi(n as i32 - 1)),
        vol_d: Some(vol_sphere * radial_volume(kind, n, rho)),
    };
    let family = match kind {
        SpaceKind::Euclidean => "euclidean_cap",
        SpaceKind::Hyperbolic => "hyperbolic_cap",
        SpaceKind::Spherical => "spherical_cap",
    };
    Ok(CatalogEntry {
        id: String::new(),
        family: family.into(),
        space,
        boundary: BoundaryConfig {
            p: HypersurfaceP::coordinate_plane(&space),
            d_center: o,
        },
        omega: Some(SolidRegion {
            space,
            apex,
            pieces: vec![immersion.clone(), disk.clone()],
        }),
        immersion,
        disk: Some(disk),
        reference,
        in_hemisphere,
    })
}

pub fn euclidean_cap(n: usize, radius: f64, rho: f64, large: bool) -> Result<CatalogEntry> {
    umbilic_cap(AmbientSpace::euclidean(n), radius, rho, large)
}

/// Unit sphere about `e_last` cut by the unit sphere `P` about the origin
/// (`Σ` is the circle at height 1/2); `P` is umbilic but not totally geodesic.
pub fn euclidean_cap_sphere_boundary(n: usize) -> Result<CatalogEntry> {
    let space = AmbientSpace::euclidean(n);
    let e = space.p_normal();
    let s_max = 2.0 * PI / 3.0;
    let chart = SphereCapChart {
        kind: space.kind,
        n,
        radius: 1.0,
        center: e.clone(),
        axis: e.clone(),
        horizontal: horizontal_basis(&space),
        bump: None,
    };
    let immersion = Immersion::new(
        space,
        polar_box(n, s_max)?,
        Arc::new(chart),
        Orientation::Toward(e.clone()),
    )?;
    Ok(CatalogEntry {
        id: String::new(),
        family: "euclidean_cap_sphere_boundary".into(),
        space,
        immersion,
        boundary: BoundaryConfig {
            p: HypersurfaceP::RoundSphere {
                center: DVector::zeros(space.embed_dim()),
                radius: 1.0,
            },
            d_center: e,
        },
        disk: None,
        omega: None,
        reference: AnalyticReference {
            kappa: Some(1.0),
            tau: Some(-1.0 / (PI / 3.0).tan()),
            ..Default::default()
        },
        in_hemisphere: false,
    })
}

/// Horosphere cap over a geodesic sphere of radius `rho` in `P ⊂ ℍⁿ⁺¹`.
pub fn horosphere_cap(n: usize, rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameters(format!("need rho > 0, got {rho}")));
    }
    let space = AmbientSpace::hyperbolic(n);
    let alpha = 0.5 * rho.cosh();
    let chart = HorosphereChart { n, alpha };
    let pole = DVector::from_vec(crate::chart::ChartFn::map(&chart, &vec![0.0; n]));
    let o = space.origin();
    let apex = midpoint(&space, &o, &pole)?;
    let immersion = Immersion::new(
        space,
        polar_box(n, rho.sinh())?,
        Arc::new(chart),
        Orientation::Toward(apex.clone()),
    )?;
    special_cap(space, immersion, apex, rho, 1.0, "hyperbolic_cap")
}

/// Cap of the equidistant hypersurface at distance `d` over a geodesic sphere
/// of radius `rho` in `P ⊂ ℍⁿ⁺¹`.
pub fn equidistant_cap(n: usize, d: f64, rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need rho > 0 and d > 0, got rho = {rho}, d = {d}"
        )));
    }
    let space = AmbientSpace::hyperbolic(n);
    let a = (-d.sinh() / rho.cosh()).asinh();
    let o = space.origin();
    let e = space.p_normal();
    let v = &o * a.sinh() + &e * a.cosh();
    let q0 = &o * a.cosh() + &e * a.sinh();
    let t_b = ((rho.cosh().powi(2) + d.sinh().powi(2)).sqrt() / d.cosh()).acosh();
    let pole = &q0 * d.cosh() + &v * d.sinh();
    let apex = midpoint(&space, &o, &pole)?;
    let chart = EquidistantChart { n, d, q0, v };
    let immersion = Immersion::new(
        space,
        polar_box(n, t_b)?,
        Arc::new(chart),
        Orientation::Toward(apex.clone()),
    )?;
    special_cap(space, immersion, apex, rho, d.tanh(), "hyperbolic_cap")
}

fn special_cap(
    space: AmbientSpace,
    immersion: Immersion,
    apex: DVector<f64>,
    rho: f64,
    kappa: f64,
    family: &str,
) -> Result<CatalogEntry> {
    let n = space.n;
    let kind = space.kind;
    let disk = disk_in_p(&space, rho, &apex)?;
    let vol_sphere = area_of_unit_sphere(n);
    Ok(CatalogEntry {
        id: String::new(),
        family: family.into(),
        space,
        boundary: BoundaryConfig {
            p: HypersurfaceP::coordinate_plane(&space),
            d_center: space.origin(),
        },
        omega: Some(SolidRegion {
            space,
            apex,
            pieces: vec![immersion.clone(), disk.clone()],
        }),
        immersion,
        disk: Some(disk),
        reference: AnalyticReference {
            kappa: Some(kappa),
            tau: Some(-kind.sphere_curvature(rho)),
            boundary_radius: Some(rho),
            vol_boundary: Some(vol_sphere * kind.sn(rho).powi(n as i32 - 1)),
            vol_d: Some(vol_sphere * radial_volume(kind, n, rho)),
            ..Default::default()
        },
        in_hemisphere: false,
    })
}

/// Totally geodesic disk of radius `rho` about the origin of a curved model.
pub fn geodesic_disk(space: AmbientSpace, rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) || (space.kind == SpaceKind::Spherical && !(rho < PI / 2.0)) {
        return Err(Error::InvalidParameters(format!("inadmissible disk radius {rho}")));
    }
    let n = space.n;
    let kind = space.kind;
    let chart = GeodesicBallChart {
        kind,
        center: space.origin(),
        basis: horizontal_basis(&space),
    };
    let immersion = Immersion::new(
        space,
        polar_box(n, rho)?,
        Arc::new(chart),
        Orientation::Along(space.p_normal()),
    )?;
    let vol_sphere = area_of_unit_sphere(n);
    let vol_d = vol_sphere * radial_volume(kind, n, rho);
    let in_hemisphere = kind == SpaceKind::Spherical && inside_hemisphere(&[&immersion])?;
    Ok(CatalogEntry {
        id: String::new(),
        family: match kind {
            SpaceKind::Hyperbolic => "hyperbolic_cap",
            SpaceKind::Spherical => "spherical_cap",
            SpaceKind::Euclidean => "flat_disk",
        }
        .into(),
        space,
        immersion,
        boundary: BoundaryConfig {
            p: HypersurfaceP::coordinate_plane(&space),
            d_center: space.origin(),
        },
        disk: None,
        omega: None,
        reference: AnalyticReference {
            kappa: Some(0.0),
            boundary_radius: Some(rho),
            vol_m: Some(vol_d),
            vol_boundary: Some(vol_sphere * kind.sn(rho).powi(n as i32 - 1)),
            vol_d: Some(vol_d),
            ..Default::default()
        },
        in_hemisphere,
    })
}

/// Planar disk `{x_last = offset}` inside the sphere of radius `rho` about the origin.
pub fn flat_disk(n: usize, rho: f64, offset: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) || !(offset.abs() < rho) {
        return Err(Error::InvalidParameters(format!(
            "need rho > 0 and |offset| < rho, got rho = {rho}, offset = {offset}"
        )));
    }
    let space = AmbientSpace::euclidean(n);
    let e = space.p_normal();
    let radius = (rho * rho - offset * offset).sqrt();
    let chart = GeodesicBallChart {
        kind: space.kind,
        center: &e * offset,
        basis: horizontal_basis(&space),
    };
    let immersion = Immersion::new(
        space,
        polar_box(n, radius)?,
        Arc::new(chart),
        Orientation::Along(e.clone()),
    )?;
    let vol_sphere = area_of_unit_sphere(n);
    Ok(CatalogEntry {
        id: String::new(),
        family: "flat_disk".into(),
        space,
        immersion,
        boundary: BoundaryConfig {
            p: HypersurfaceP::Hyperplane { normal: e, offset },
            d_center: space.origin(),
        },
        disk: None,
        omega: None,
        reference: AnalyticReference {
            kappa: Some(0.0),
            boundary_radius: Some(rho),
            vol_m: Some(vol_sphere * radius.powi(n as i32) / n as f64),
            vol_boundary: Some(vol_sphere * radius.powi(n as i32 - 1)),
            ..Default::default()
        },
        in_hemisphere: false,
    })
}

/// Cap with its radius bumped by `amplitude·b(u)`; the bump vanishes on `∂M`.
pub fn perturbed(base: &CatalogEntry, amplitude: f64, seed: u64) -> Result<CatalogEntry> {
    let chart = base
        .immersion
        .map
        .clone();
    let cap = downcast_cap(&chart).ok_or_else(|| {
        Error::Configuration(format!(
            "perturbed_graph needs a geodesic-sphere cap base, got `{}`",
            base.family
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..base.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut chart = cap.clone();
    chart.bump = (amplitude != 0.0).then(|| RadialBump {
        amplitude,
        s_max: base.immersion.domain.hi[0],
        weights,
    });
    let upper = match base.space.kind {
        SpaceKind::Spherical => PI,
        _ => f64::INFINITY,
    };
    let dense = tensor_grid(&base.immersion.domain, &vec![24; base.n()])?;
    if let Some(u) = dense.points.iter().find(|u| {
        let r = chart.effective_radius(u);
        !(r > 0.0 && r < upper)
    }) {
        return Err(Error::InvalidParameters(format!(
            "perturbation amplitude {amplitude} pushes the radius out of range near u = {u:?}"
        )));
    }
    let mut immersion = base.immersion.clone();
    immersion.map = Arc::new(chart);
    let grid = tensor_grid(&immersion.domain, &vec![10; immersion.dim()])?;
    for u in &grid.points {
        let sv = immersion
            .min_singular_value(u)
            .map_err(|e| Error::InvalidParameters(format!("perturbation degenerates the chart: {e}")))?;
        if !(sv > 1e-3 * POLAR_MARGIN) || immersion.curvature_at(u).is_err() {
            return Err(Error::InvalidParameters(format!(
                "perturbation amplitude {amplitude} degenerates the immersion near u = {u:?}"
            )));
        }
    }
    let mut out = base.clone();
    out.family = "perturbed_graph".into();
    if amplitude != 0.0 {
        out.reference = AnalyticReference {
            tau: base.reference.tau,
            boundary_radius: base.reference.boundary_radius,
            vol_boundary: base.reference.vol_boundary,
            vol_d: base.reference.vol_d,
            ..Default::default()
        };
    }
    if let Some(omega) = out.omega.as_mut() {
        omega.pieces[0] = immersion.clone();
    }
    out.immersion = immersion;
    Ok(out)
}

fn downcast_cap(chart: &Arc<dyn ChartMap>) -> Option<&SphereCapChart> {
    let any: &dyn std::any::Any = chart.as_any();
    any.downcast_ref::<SphereCapChart>()
}

/// Euclidean graph over the disk of radius `rho` in `P`, normal pointing down.
pub fn graph(profile: GraphProfile, rho: f64, scale: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameters(format!("need rho > 0, got {rho}")));
    }
    let space = AmbientSpace::euclidean(2);
    let e = space.p_normal();
    let chart = GraphChart {
        n: 2,
        rho,
        scale,
        profile,
    };
    let immersion = Immersion::new(
        space,
        polar_box(2, rho)?,
        Arc::new(chart),
        Orientation::Against(e),
    )?;
    let apex = &space.p_normal() * (0.5 * scale * rho * rho);
    let disk = disk_in_p(&space, rho, &apex)?;
    Ok(CatalogEntry {
        id: String::new(),
        family: "graph".into(),
        space,
        immersion,
        boundary: BoundaryConfig {
            p: HypersurfaceP::coordinate_plane(&space),
            d_center: space.origin(),
        },
        disk: Some(disk),
        omega: None,
        reference: AnalyticReference {
            tau: Some(-1.0 / rho),
            boundary_radius: Some(rho),
            ..Default::default()
        },
        in_hemisphere: false,
    })
}

/// Named ambient fields relative to an entry.
///
/// - `normal_killing`: the Killing field orthogonal to `P` about the centre of `D`.
/// - `translation`: `e_last` (Euclidean).
/// - `rotation`: rotation in the first two horizontal directions.
/// - `homothety`: `p − o` (Euclidean).
/// - `conformal`: radial conformal field about the centre of `D`.
pub fn field_for(entry: &CatalogEntry, name: &str) -> Result<AmbientField> {
    let s = entry.space;
    let o = entry.center().clone();
    match name {
        "normal_killing" => AmbientField::p_orthogonal_killing(s, o),
        "translation" => AmbientField::translation(s, s.p_normal()),
        "rotation" => AmbientField::rotation(s, s.basis(s.horizontal(0)), s.basis(s.horizontal(1))),
        "homothety" => AmbientField::homothety(s, o),
        "conformal" => AmbientField::conformal(s, o),
        other => Err(Error::Configuration(format!(
            "unknown field `{other}` (expected normal_killing, translation, rotation, homothety or conformal)"
        ))),
    }
}
