mod common;

use std::f64::consts::PI;

use common::{binom, entry};
use newtonflux::catalog::field_for;
use newtonflux::flux::{
    entry_flux, flux_conformal, flux_killing, flux_minimal, hr_estimate, volume_bound, FluxOptions, SCHEMA,
};
use newtonflux::Error;

#[test]
fn spec_examples_for_the_killing_flux() {
    for (d, field, r) in [
        ("euclidean_cap:n=2,R=1,rho=1", "normal_killing", 1),
        ("euclidean_cap:n=2,R=1,rho=0.8660254037844386", "normal_killing", 2),
        ("spherical_cap:kind=geodesic_sphere,n=2,R=1,rho=0.7", "rotation", 1),
    ] {
        let e = entry(d);
        let f = field_for(&e, field).unwrap();
        let rep = flux_killing(&e.immersion, e.disk.as_ref(), &f, r, &FluxOptions::default()).unwrap();
        assert!(rep.rel_residual < 1e-7, "{d}: {rep:?}");
        assert_eq!(rep.formula, "killing");
    }
}

#[test]
fn killing_flux_closed_form_for_euclidean_caps() {
    // Y = e_last, n_D = e_last on D: rhs = −r·binom(n,r)·R^{−r}·vol(D)
    let e = entry("euclidean_cap:n=2,R=2,rho=1");
    let f = field_for(&e, "translation").unwrap();
    for r in 1..=2 {
        let rep = flux_killing(&e.immersion, e.disk.as_ref(), &f, r, &FluxOptions::default()).unwrap();
        let want = -(r as f64) * binom(2, r) * 0.5f64.powi(r as i32) * PI;
        assert!((rep.rhs - want).abs() < 1e-10, "{}", rep.rhs);
        assert!((rep.lhs - want).abs() < 1e-9, "{}", rep.lhs);
    }
}

#[test]
fn conformal_with_a_killing_field_reduces_to_killing() {
    let e = entry("hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8");
    let f = field_for(&e, "normal_killing").unwrap();
    let opts = FluxOptions::default();
    let k = flux_killing(&e.immersion, e.disk.as_ref(), &f, 1, &opts).unwrap();
    let c = flux_conformal(&e.immersion, e.disk.as_ref(), e.omega.as_ref(), &f, 1, &opts).unwrap();
    assert_eq!(k.lhs.to_bits(), c.lhs.to_bits());
    assert!((k.rhs - c.rhs).abs() < 1e-12);
}

#[test]
fn conformal_examples() {
    for (d, field) in [
        ("euclidean_cap:n=2,R=2,rho=1", "homothety"),
        ("euclidean_cap:n=3,R=1,rho=1", "homothety"),
        ("hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8", "conformal"),
        ("hyperbolic_cap:kind=equidistant,n=2,d=0.5,rho=0.8", "conformal"),
        ("spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7", "conformal"),
    ] {
        let e = entry(d);
        let f = field_for(&e, field).unwrap();
        for r in 1..=e.n() {
            let rep = entry_flux(&e, &f, r, &FluxOptions::default()).unwrap();
            assert!(rep.rel_residual < 1e-6, "{d} r = {r}: {rep:?}");
            assert_eq!(rep.config.sigma_omega, -1.0);
            assert!(!rep.config.assumptions.is_empty());
        }
    }
}

#[test]
fn minimal_flux_examples() {
    let disk = entry("flat_disk:n=2,rho=1.5");
    let y = field_for(&disk, "homothety").unwrap();
    let rep = flux_minimal(&disk.immersion, &y, 1, &FluxOptions::default()).unwrap();
    assert!((rep.lhs - 2.0 * PI * 1.5 * 1.5).abs() < 1e-8);
    assert!((rep.rhs - 2.0 * PI * 1.5 * 1.5).abs() < 1e-8);

    let sph = entry("spherical_cap:kind=totally_geodesic,n=3,rho=0.8");
    let y = field_for(&sph, "conformal").unwrap();
    let rep = flux_minimal(&sph.immersion, &y, 1, &FluxOptions::default()).unwrap();
    assert!(rep.rel_residual < 1e-6, "{rep:?}");
    // r = 1 with the homothety: rhs = n·vol(M)
    let d3 = entry("flat_disk:n=3,rho=1,offset=0.3");
    let y = field_for(&d3, "homothety").unwrap();
    let rep = flux_minimal(&d3.immersion, &y, 1, &FluxOptions::default()).unwrap();
    let area = 4.0 / 3.0 * PI * (1.0f64 - 0.09).powf(1.5);
    assert!((rep.rhs - 3.0 * area).abs() < 1e-8);
    assert!(rep.rel_residual < 1e-9);
}

#[test]
fn gates_fire() {
    let cap = entry("euclidean_cap:n=2,R=2,rho=1");
    let y = field_for(&cap, "homothety").unwrap();
    assert!(matches!(
        flux_minimal(&cap.immersion, &y, 1, &FluxOptions::default()),
        Err(Error::Precondition(_))
    ));
    let bumped = entry("perturbed_graph:base=euclidean_cap,n=2,R=1,rho=1,amplitude=0.05,seed=7");
    let k = field_for(&bumped, "normal_killing").unwrap();
    assert!(matches!(
        flux_killing(&bumped.immersion, bumped.disk.as_ref(), &k, 1, &FluxOptions::default()),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        flux_killing(&cap.immersion, cap.disk.as_ref(), &y, 1, &FluxOptions::default()),
        Err(Error::InvalidInput(_))
    ));
    let k = field_for(&cap, "normal_killing").unwrap();
    assert!(flux_killing(&cap.immersion, cap.disk.as_ref(), &k, 0, &FluxOptions::default()).is_err());
    assert!(flux_killing(&cap.immersion, cap.disk.as_ref(), &k, 3, &FluxOptions::default()).is_err());
}

#[test]
fn report_json_schema() {
    let e = entry("euclidean_cap:n=2,R=2,rho=1");
    let f = field_for(&e, "normal_killing").unwrap();
    let rep = entry_flux(&e, &f, 1, &FluxOptions::default().refined()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(v["schema"], SCHEMA);
    for key in ["formula", "r", "lhs", "rhs", "abs_residual", "rel_residual", "quadrature", "config"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["quadrature"]["orders"], serde_json::json!([32, 32]));
    assert!(v["quadrature"]["refine_delta"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["config"]["descriptor"], "euclidean_cap:n=2,R=2,rho=1");
    assert_eq!(rep.to_json(), entry_flux(&e, &f, 1, &FluxOptions::default().refined()).unwrap().to_json());
}

#[test]
fn estimates() {
    let hemi = entry("euclidean_cap:n=3,R=1.3,rho=1.3");
    for r in 1..=3 {
        let rep = hr_estimate(&hemi, r, &FluxOptions::default()).unwrap();
        assert!(rep.equality, "{rep:?}");
        assert!((rep.bound - rep.h_r).abs() < 1e-8);
        assert!(rep.identity_residual < 1e-9);
    }
    for d in [
        "hyperbolic_cap:kind=horosphere,n=2,rho=0.8",
        "hyperbolic_cap:kind=equidistant,n=3,d=0.5,rho=0.8",
        "spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7",
        "euclidean_cap:n=2,R=3,rho=1,large=true",
    ] {
        let e = entry(d);
        for r in 1..=e.n() {
            let rep = hr_estimate(&e, r, &FluxOptions::default()).unwrap();
            assert!(rep.h_r.abs() <= rep.closed_form + 1e-9 && rep.closed_form <= rep.bound + 1e-9, "{d}: {rep:?}");
            assert!(!rep.equality);
            assert!(rep.identity_residual < 1e-8 * (1.0 + rep.identity_lhs.abs()), "{d}: {rep:?}");
        }
    }
    let off_sphere = entry("euclidean_cap_sphere_boundary:n=2");
    assert!(matches!(hr_estimate(&off_sphere, 1, &FluxOptions::default()), Err(Error::Configuration(_))));
}

#[test]
fn volume_bound_errors() {
    let cap = entry("euclidean_cap:n=2,R=2,rho=1");
    assert!(matches!(
        volume_bound(&cap.immersion, cap.center(), &FluxOptions::default()),
        Err(Error::Precondition(_))
    ));
    let disk = entry("flat_disk:n=2,rho=1");
    let off_center = disk.space.basis(0) * 0.3;
    assert!(matches!(
        volume_bound(&disk.immersion, &off_center, &FluxOptions::default()),
        Err(Error::Configuration(_))
    ));
}
