//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use newtonflux::boundary::{
    build_frame, identity_sr, identity_umbilic, transversality_report, TRANSVERSE_THRESHOLD,
};
use newtonflux::catalog::{field_for, from_descriptor, CatalogEntry};
use newtonflux::flux::{flux_conformal, flux_killing, flux_minimal, hr_estimate, volume_bound, FluxOptions};
use newtonflux::quadrature::{default_order, tensor_grid};
use newtonflux::symfun::{bordered_invariants, newton_transforms, shifted_sym};
use newtonflux::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---- oracles -------------------------------------------------------------

/// `s_r` by summing products over all `r`-subsets.
fn subset_sym(values: &[f64], r: usize) -> f64 {
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

/// Eigenvalues from nalgebra's own symmetric solver.
fn eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    a.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn max_abs_row_sum(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn entry(d: &str) -> CatalogEntry {
    from_descriptor(d).unwrap_or_else(|e| panic!("{d}: {e}"))
}

/// Boundary parameters on the interior Gauss nodes of the boundary face.
fn boundary_samples(e: &CatalogEntry, per_axis: usize) -> Vec<Vec<f64>> {
    let face = e.immersion.domain.face().unwrap();
    tensor_grid(&face, &vec![per_axis; e.n() - 1]).unwrap().points
}

fn interior_samples(e: &CatalogEntry, per_axis: usize) -> Vec<Vec<f64>> {
    tensor_grid(&e.immersion.domain, &vec![per_axis; e.n()]).unwrap().points
}

// ---- harness -------------------------------------------------------------

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = budget.map_or(true, |b| elapsed <= b);
    let pass = o.pass && in_time;
    let budget_note = budget.map_or(String::new(), |b| format!(", budget {:.0}s", b.as_secs_f64()));
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{} criterion {id:>2}: {name}: {} [{:.2}s{budget_note}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    )
    .expect("stdout is writable");
    pass
}

// ---- criteria ------------------------------------------------------------

fn cayley_hamilton() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let n = 1 + trial % 6;
        let a = random_symmetric(&mut rng, n);
        let seq = newton_transforms(&a).unwrap();
        let tol = 1e-9 * (1.0 + max_abs_row_sum(&a)).powi(n as i32);
        worst = worst.max(seq.t[n].amax() / tol);
    }
    outcome(worst < 1.0, format!("max |T_n| / tol = {worst:.2e} over 1000 trials, n ≤ 6"))
}

fn trace_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let n = 1 + trial % 6;
        let a = random_symmetric(&mut rng, n);
        let seq = newton_transforms(&a).unwrap();
        let ev = eigenvalues(&a);
        let s: Vec<f64> = (0..=n + 1).map(|r| if r <= n { subset_sym(&ev, r) } else { 0.0 }).collect();
        for r in 0..=n {
            let tr = seq.t[r].trace();
            let tr_a = (&a * &seq.t[r]).trace();
            worst = worst.max(rel(tr, (n - r) as f64 * s[r]));
            worst = worst.max(rel(tr_a, (r + 1) as f64 * s[r + 1]));
        }
    }
    outcome(worst < 1e-10, format!("max relative error {worst:.2e}, tolerance 1e-10"))
}

fn binomial_shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let m = 1 + trial % 8;
        let alpha: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let beta = rng.random_range(-2.0..2.0);
        let shifted: Vec<f64> = alpha.iter().map(|a| a + beta).collect();
        let s = shifted_sym(&alpha, beta).unwrap();
        for r in 0..=m {
            let direct = subset_sym(&shifted, r);
            let scale: f64 = 1.0 + subset_sym(&shifted.iter().map(|x| x.abs()).collect::<Vec<_>>(), r);
            worst = worst.max((s.get(r) - direct).abs() / scale);
        }
    }
    outcome(worst < 1e-12, format!("max relative error {worst:.2e}, tolerance 1e-12"))
}

fn bordered() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let n = 2 + trial % 5;
        let gamma: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.5..1.5)).collect();
        let c: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = rng.random_range(-1.5..1.5);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i)] = gamma[i];
            m[(i, n - 1)] = c[i];
            m[(n - 1, i)] = c[i];
        }
        m[(n - 1, n - 1)] = d;
        let ev = eigenvalues(&m);
        let s = bordered_invariants(&gamma, &c, d).unwrap();
        for r in 0..=n {
            worst = worst.max(rel(s.get(r), subset_sym(&ev, r)));
        }
    }
    outcome(worst < 1e-9, format!("max relative error {worst:.2e} over 500 matrices, n ≤ 6"))
}

fn boundary_identities() -> Outcome {
    let caps = [
        "euclidean_cap:n=2,R=1,rho=1",
        "euclidean_cap:n=3,R=1,rho=1",
        "euclidean_cap:n=2,R=1,rho=0.8660254037844386",
        "euclidean_cap:n=3,R=1,rho=0.8660254037844386",
        "euclidean_cap:n=3,R=2,rho=1,large=true",
        "hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8",
        "hyperbolic_cap:kind=geodesic_sphere,n=3,R=1,rho=0.8",
        "hyperbolic_cap:kind=horosphere,n=3,rho=0.8",
        "hyperbolic_cap:kind=equidistant,n=3,d=0.5,rho=0.8",
        "spherical_cap:kind=geodesic_sphere,n=2,R=1,rho=0.7",
        "spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7",
        "euclidean_cap_sphere_boundary:n=2",
        "euclidean_cap_sphere_boundary:n=3",
    ];
    let mut worst: f64 = 0.0;
    let mut samples = 0usize;
    for d in caps {
        let e = entry(d);
        let n = e.n();
        for t in boundary_samples(&e, 12) {
            let f = build_frame(&e.immersion, &e.boundary, &t).unwrap();
            for r in 1..n {
                worst = worst.max(identity_umbilic(&f, &f.curvature, r).unwrap().2);
                if f.lambda == 0.0 {
                    worst = worst.max(identity_sr(&f, &f.curvature, r).unwrap());
                }
            }
            samples += 1;
        }
    }
    outcome(
        worst < 1e-7,
        format!("max residual {worst:.2e} over {samples} boundary samples on {} caps", caps.len()),
    )
}

fn divergence_free() -> Outcome {
    let charts = [
        ("euclidean_cap:n=2,R=2,rho=1", true),
        ("euclidean_cap:n=3,R=1,rho=1", true),
        ("hyperbolic_cap:kind=geodesic_sphere,n=3,R=1,rho=0.8", true),
        ("hyperbolic_cap:kind=horosphere,n=2,rho=0.8", true),
        ("spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7", true),
        ("perturbed_graph:base=euclidean_cap,n=2,R=1,rho=1,amplitude=0.05,seed=1", false),
        ("perturbed_graph:base=euclidean_cap,n=3,R=2,rho=1,amplitude=0.05,seed=2", false),
        ("perturbed_graph:base=hyperbolic_cap,n=3,R=1,rho=0.8,amplitude=0.05,seed=3", false),
        ("perturbed_graph:base=spherical_cap,n=2,R=1,rho=0.7,amplitude=0.05,seed=4", false),
        ("perturbed_graph:base=spherical_cap,n=3,R=1,rho=0.7,amplitude=0.05,seed=5", false),
        ("graph:kind=poly,rho=1,scale=0.3", false),
        ("graph:kind=saddle,rho=1,scale=0.3", false),
    ];
    let (mut worst, mut min_slope) = (0.0f64, f64::INFINITY);
    for (d, umbilic) in charts {
        let e = entry(d);
        let imm = &e.immersion;
        for u in interior_samples(&e, 3) {
            for r in 1..e.n() {
                let norm = imm.newton_field_divergence(&u, r, 1e-4).unwrap().norm_g;
                worst = worst.max(norm);
                if !umbilic {
                    let (_, _, slope) = imm.divergence_slope(&u, r, 4e-4).unwrap();
                    min_slope = min_slope.min(slope);
                }
            }
        }
    }
    outcome(
        worst < 1e-5 && min_slope >= 1.9,
        format!("max ‖div T_r‖ = {worst:.2e} at h = 1e-4; min Richardson slope {min_slope:.3} (8e-4 → 4e-4)"),
    )
}

fn flux_formula() -> Outcome {
    let configs = [
        "euclidean_cap:n=2,R=1,rho=1",
        "euclidean_cap:n=3,R=1,rho=0.8660254037844386",
        "euclidean_cap:n=2,R=2,rho=1,large=true",
        "hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8",
        "hyperbolic_cap:kind=geodesic_sphere,n=3,R=1,rho=0.8",
        "hyperbolic_cap:kind=horosphere,n=2,rho=0.8",
        "hyperbolic_cap:kind=equidistant,n=2,d=0.5,rho=0.8",
        "spherical_cap:kind=geodesic_sphere,n=2,R=1,rho=0.7",
        "spherical_cap:kind=geodesic_sphere,n=3,R=1,rho=0.7",
    ];
    let (mut worst_default, mut worst_doubled, mut worst_conf) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for d in configs {
        let e = entry(d);
        let n = e.n();
        let doubled = FluxOptions::default().with_order(2 * default_order(n));
        for fname in ["normal_killing", "rotation"] {
            let field = field_for(&e, fname).unwrap();
            for r in 1..=2 {
                let a = flux_killing(&e.immersion, e.disk.as_ref(), &field, r, &FluxOptions::default()).unwrap();
                let b = flux_killing(&e.immersion, e.disk.as_ref(), &field, r, &doubled).unwrap();
                worst_default = worst_default.max(a.rel_residual);
                worst_doubled = worst_doubled.max(b.rel_residual);
                count += 1;
            }
        }
        let conf = if e.space.is_curved() { "conformal" } else { "homothety" };
        let field = field_for(&e, conf).unwrap();
        for r in 1..=2 {
            let rep = flux_conformal(
                &e.immersion,
                e.disk.as_ref(),
                e.omega.as_ref(),
                &field,
                r,
                &FluxOptions::default(),
            )
            .unwrap();
            worst_conf = worst_conf.max(rep.rel_residual);
        }
    }
    outcome(
        worst_default < 1e-6 && worst_doubled < 1e-8 && worst_conf < 1e-6,
        format!(
            "Killing rel residual {worst_default:.2e} (default) / {worst_doubled:.2e} (doubled) over {count} reports; conformal {worst_conf:.2e}"
        ),
    )
}

fn minimal_flux() -> Outcome {
    let e = entry("flat_disk:n=2,rho=1");
    let field = field_for(&e, "homothety").unwrap();
    let rep = flux_minimal(&e.immersion, &field, 1, &FluxOptions::default()).unwrap();
    let expected = 2.0 * PI;
    let (dl, dr) = ((rep.lhs - expected).abs(), (rep.rhs - expected).abs());
    outcome(
        dl < 1e-8 && dr < 1e-8,
        format!("lhs {:.12}, rhs {:.12}, 2π = {expected:.12}", rep.lhs, rep.rhs),
    )
}

fn volume_bounds() -> Outcome {
    let opts = FluxOptions::default();
    let report = |d: &str| {
        let e = entry(d);
        volume_bound(&e.immersion, e.center(), &opts).unwrap()
    };
    let flat = report("flat_disk:n=2,rho=1");
    let flat3 = report("flat_disk:n=3,rho=1");
    let tilted = report("flat_disk:n=2,rho=1,offset=0.4");
    let hyp = report("hyperbolic_cap:kind=totally_geodesic,n=2,rho=0.8");
    let sph = report("spherical_cap:kind=totally_geodesic,n=2,rho=0.8");
    // closed forms
    let (c, s) = (0.8f64.cosh(), 0.8f64.sinh());
    let hyp_ok = rel(hyp.vol_m, 2.0 * PI * (c - 1.0)) < 1e-10 && rel(hyp.bound, PI * s * s) < 1e-10;
    let (cs, ss) = (0.8f64.cos(), 0.8f64.sin());
    let sph_ok = rel(sph.vol_m, 2.0 * PI * (1.0 - cs)) < 1e-10 && rel(sph.bound, PI * ss * ss / cs) < 1e-10;
    let tilt_area = PI * (1.0 - 0.16);
    let pass = flat.equality
        && flat.slack.abs() < 1e-7 * flat.bound
        && flat3.equality
        && !tilted.equality
        && tilted.slack > 0.0
        && rel(tilted.vol_m, tilt_area) < 1e-10
        && hyp.slack > 0.0
        && sph.slack > 0.0
        && hyp_ok
        && sph_ok;
    outcome(
        pass,
        format!(
            "central disk slack {:.1e}; tilted slack {:.4}; hyperbolic slack {:.4}; spherical slack {:.4}",
            flat.slack / flat.bound,
            tilted.slack,
            hyp.slack,
            sph.slack
        ),
    )
}

fn estimates() -> Outcome {
    let opts = FluxOptions::default();
    let steps = 20;
    let mut violations = 0;
    let mut general_violations = 0;
    let mut checks = 0;
    let mut hemisphere_gap = f64::INFINITY;
    let mut monotone = true;
    let rho: f64 = 0.8;
    let sweeps: [(&str, f64, f64, Box<dyn Fn(f64) -> f64>); 3] = [
        ("euclidean_cap", rho, 4.0, Box::new(|x: f64| 1.0 / x)),
        ("hyperbolic_cap:kind=geodesic_sphere", rho, 3.0, Box::new(|x: f64| 1.0 / x.tanh())),
        ("spherical_cap:kind=geodesic_sphere", rho, PI / 2.0 - 0.05, Box::new(|x: f64| 1.0 / x.tan())),
    ];
    for (family, lo, hi, closed) in &sweeps {
        let sep = if family.contains(':') { "," } else { ":" };
        for r in 1..=2usize {
            let mut last = f64::INFINITY;
            for k in 0..steps {
                let radius = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
                let e = entry(&format!("{family}{sep}n=2,R={radius:?},rho={rho:?}"));
                let rep = hr_estimate(&e, r, &opts).unwrap();
                let bound = closed(rho).powi(r as i32);
                checks += 1;
                if rep.h_r.abs() > bound + 1e-9 {
                    violations += 1;
                }
                if rep.h_r.abs() > rep.bound + 1e-9 {
                    general_violations += 1;
                }
                if family.starts_with("euclidean") {
                    if k == 0 {
                        hemisphere_gap = hemisphere_gap.min((bound - rep.h_r.abs()).abs());
                    }
                    monotone &= rep.h_r < last;
                    last = rep.h_r;
                }
            }
        }
    }
    outcome(
        violations == 0 && general_violations == 0 && hemisphere_gap < 1e-8 && monotone,
        format!(
            "{checks} sweep points, {violations} closed-form and {general_violations} general violations; hemisphere gap {hemisphere_gap:.1e}; euclidean H_r monotone: {monotone}"
        ),
    )
}

fn negative_controls() -> Outcome {
    let e = entry("perturbed_graph:base=euclidean_cap,n=2,R=1,rho=1,amplitude=0.05,seed=7");
    let field = field_for(&e, "normal_killing").unwrap();
    let gate = flux_killing(&e.immersion, e.disk.as_ref(), &field, 1, &FluxOptions::default());
    let gated = matches!(gate, Err(Error::Precondition(_)));
    let t = entry("graph:kind=tangent,rho=1,scale=0.3");
    let rep = transversality_report(&t.immersion, &t.boundary, 1, 12, TRANSVERSE_THRESHOLD).unwrap();
    let cap = entry("euclidean_cap:n=2,R=2,rho=1");
    let ok = transversality_report(&cap.immersion, &cap.boundary, 1, 12, TRANSVERSE_THRESHOLD).unwrap();
    outcome(
        gated && !rep.transverse && ok.transverse,
        format!(
            "perturbed hemisphere gated: {gated}; tangent graph min |⟨ξ,ν⟩| = {:.1e} (transverse: {}); cap transverse: {}",
            rep.min_abs_xi_nu, rep.transverse, ok.transverse
        ),
    )
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "Cayley-Hamilton T_n = 0", Some(secs(5)), cayley_hamilton),
        run(2, "trace identities", None, trace_identities),
        run(3, "binomial shift", None, binomial_shift),
        run(4, "bordered invariants", None, bordered),
        run(5, "boundary identities on caps", Some(secs(30)), boundary_identities),
        run(6, "divergence-free Newton transformations", None, divergence_free),
        run(7, "flux formula", None, flux_formula),
        run(8, "minimal flux on the flat disk", None, minimal_flux),
        run(9, "volume bounds", None, volume_bounds),
        run(10, "H_r estimates", Some(secs(60)), estimates),
        run(11, "negative controls", None, negative_controls),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
