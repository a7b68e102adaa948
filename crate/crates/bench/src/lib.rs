//! Fixtures shared by the criterion benchmarks.

use newtonflux::catalog::{self, CatalogEntry};

/// Catalog entries exercised by the benchmarks.
pub fn fixtures() -> Vec<CatalogEntry> {
    [
        "euclidean_cap:n=2,R=2,rho=1",
        "hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8",
        "spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7",
    ]
    .iter()
    .map(|d| catalog::from_descriptor(d).expect("fixture descriptor is valid"))
    .collect()
}
