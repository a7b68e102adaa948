#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use newtonflux::catalog::{from_descriptor, CatalogEntry};
use newtonflux::quadrature::tensor_grid;
use newtonflux::{AmbientSpace, Immersion};

pub fn entry(d: &str) -> CatalogEntry {
    from_descriptor(d).unwrap_or_else(|e| panic!("{d}: {e}"))
}

/// `s_r` by summing products over all `r`-subsets.
pub fn subset_sym(values: &[f64], r: usize) -> f64 {
    let m = values.len();
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == r)
        .map(|mask| {
            (0..m)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| values[j])
                .product::<f64>()
        })
        .sum()
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ip(space: &AmbientSpace, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let mut s = a.dot(b);
    if space.kind == newtonflux::SpaceKind::Hyperbolic {
        s -= 2.0 * a[0] * b[0];
    }
    s
}

/// Principal curvatures from central differences of the chart position alone.
///
/// The unit normal is the null vector of the lowered tangents (and position,
/// in the curved models), signed to agree with `reference`.
pub fn fd_curvatures(imm: &Immersion, u: &[f64], h: f64, reference: &DVector<f64>) -> Vec<f64> {
    let space = imm.space;
    let n = u.len();
    let pos = |v: &[f64]| imm.position(v);
    let shift = |i: usize, a: f64, j: usize, b: f64| {
        let mut v = u.to_vec();
        v[i] += a;
        v[j] += b;
        pos(&v)
    };
    let d1: Vec<DVector<f64>> = (0..n)
        .map(|i| (shift(i, h, i, 0.0) - shift(i, -h, i, 0.0)) / (2.0 * h))
        .collect();
    let d2 = |i: usize, j: usize| {
        if i == j {
            (shift(i, h, i, 0.0) - pos(u) * 2.0 + shift(i, -h, i, 0.0)) / (h * h)
        } else {
            (shift(i, h, j, h) - shift(i, h, j, -h) - shift(i, -h, j, h) + shift(i, -h, j, -h))
                / (4.0 * h * h)
        }
    };
    let p = pos(u);
    let lower = |v: &DVector<f64>| {
        let mut w = v.clone();
        if space.kind == newtonflux::SpaceKind::Hyperbolic {
            w[0] = -w[0];
        }
        w
    };
    let mut rows: Vec<DVector<f64>> = d1.iter().map(lower).collect();
    if space.is_curved() {
        rows.push(lower(&p));
    }
    let m = DMatrix::from_fn(rows.len(), p.len(), |i, j| rows[i][j]);
    let gram = (m.transpose() * &m).symmetric_eigen();
    let (k, _) = gram
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let mut normal: DVector<f64> = gram.eigenvectors.column(k).into_owned();
    // eigenvectors come out unit in the Euclidean sense; rescale to the model norm
    normal /= ip(&space, &normal, &normal).abs().sqrt();
    if ip(&space, &normal, reference) < 0.0 {
        normal = -normal;
    }
    let g = DMatrix::from_fn(n, n, |i, j| ip(&space, &d1[i], &d1[j]));
    let b = DMatrix::from_fn(n, n, |i, j| ip(&space, &d2(i, j), &normal));
    let w = g.clone().try_inverse().unwrap() * b;
    let mut k: Vec<f64> = w.complex_eigenvalues().iter().map(|c| c.re).collect();
    k.sort_by(|a, b| b.total_cmp(a));
    k
}

pub fn interior_points(imm: &Immersion, per_axis: usize) -> Vec<Vec<f64>> {
    tensor_grid(&imm.domain, &vec![per_axis; imm.dim()]).unwrap().points
}

pub fn boundary_points(imm: &Immersion, per_axis: usize) -> Vec<Vec<f64>> {
    let face = imm.domain.face().unwrap();
    tensor_grid(&face, &vec![per_axis; imm.dim() - 1]).unwrap().points
}
