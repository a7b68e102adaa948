//! Elementary symmetric functions and Newton transformations.
//!
//! `σ_r` is always built by expanding `∏(t + x_i)` one factor at a time, so
//! integer inputs give exact results and no subset enumeration is needed.
//! The Newton transformations of a symmetric matrix `A` are
//!
//! ```text
//! T_0 = I,    T_r = S_r I − A T_{r−1},
//! ```
//!
//! where `S_r = σ_r(κ_1, …, κ_n)` is taken from the eigenvalues of `A`.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg::{check_square_finite, norm_inf, sym_eigen, symmetrize};

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Coefficients `σ_0 = 1, σ_1, …, σ_n` of `∏(t + x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymCoeffs {
    sigma: Vec<f64>,
}

impl SymCoeffs {
    /// Number of variables.
    pub fn n(&self) -> usize {
        self.sigma.len() - 1
    }

    /// `σ_r`, with `σ_r = 0` for `r > n` (e.g. `s_n = 0` when only `n − 1`
    /// boundary curvatures exist).
    pub fn get(&self, r: usize) -> f64 {
        self.sigma.get(r).copied().unwrap_or(0.0)
    }

    /// Like [`get`](Self::get) but accepting negative indices, which are zero.
    pub fn get_signed(&self, r: isize) -> f64 {
        if r < 0 {
            0.0
        } else {
            self.get(r as usize)
        }
    }

    /// Normalized mean `σ_r / binom(n, r)`.
    pub fn mean(&self, r: usize) -> f64 {
        if r > self.n() {
            0.0
        } else {
            self.get(r) / binom(self.n(), r)
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sigma
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.sigma
    }
}

pub(crate) fn expand(values: &[f64]) -> SymCoeffs {
    let mut c = vec![0.0; values.len() + 1];
    c[0] = 1.0;
    for (k, &x) in values.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            c[r] += x * c[r - 1];
        }
    }
    SymCoeffs { sigma: c }
}

/// Elementary symmetric functions of `values`.
pub fn elem_sym(values: &[f64]) -> Result<SymCoeffs> {
    if values.is_empty() {
        return Err(invalid("elem_sym needs at least one value"));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(invalid("elem_sym input is not finite"));
    }
    Ok(expand(values))
}

/// `σ_m` of `values` with entry `skip` removed.
pub fn elem_sym_without(values: &[f64], skip: usize) -> SymCoeffs {
    let rest: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &x)| x)
        .collect();
    expand(&rest)
}

/// Newton transformations of a symmetric matrix together with its
/// curvature invariants.
#[derive(Clone, Debug)]
pub struct NewtonSeq {
    pub n: usize,
    /// `T_0 … T_n`.
    pub t: Vec<DMatrix<f64>>,
    /// `S_0 = 1 … S_n`.
    pub s: Vec<f64>,
    /// `H_r = S_r / binom(n, r)`.
    pub h: Vec<f64>,
    /// Eigenvalues of `A`, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of `A`, one per column, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl NewtonSeq {
    /// Eigenvalue `μ_{i,r}` of `T_r` on the `i`-th eigenvector of `A`:
    /// `σ_r` of the eigenvalues with `κ_i` omitted.
    pub fn mu(&self, i: usize, r: usize) -> f64 {
        elem_sym_without(&self.eigenvalues, i).get(r)
    }

    /// Smallest eigenvalue of `T_r`.
    pub fn min_eigen(&self, r: usize) -> f64 {
        (0..self.n)
            .map(|i| self.mu(i, r))
            .fold(f64::INFINITY, f64::min)
    }

    /// Scale `(1 + ‖A‖_∞)^n` used to normalize residuals.
    pub fn scale(&self, a: &DMatrix<f64>) -> f64 {
        (1.0 + norm_inf(a)).powi(self.n as i32)
    }
}

/// Newton transformations of `a` (symmetrized internally).
pub fn newton_transforms(a: &DMatrix<f64>) -> Result<NewtonSeq> {
    check_square_finite(a)?;
    let a = symmetrize(a);
    let n = a.nrows();
    let eig = sym_eigen(&a)?;
    let s = expand(&eig.values).into_vec();
    let h = (0..=n).map(|r| s[r] / binom(n, r)).collect();
    let mut t = Vec::with_capacity(n + 1);
    t.push(DMatrix::identity(n, n));
    for r in 1..=n {
        let next = DMatrix::identity(n, n) * s[r] - &a * &t[r - 1];
        t.push(next);
    }
    Ok(NewtonSeq {
        n,
        t,
        s,
        h,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

/// Residuals of `trace(T_r) = (n − r) S_r` and `trace(A T_r) = (r + 1) S_{r+1}`,
/// maximized over `0 ≤ r ≤ n`.
pub fn trace_identities(seq: &NewtonSeq, a: &DMatrix<f64>) -> (f64, f64) {
    let a = symmetrize(a);
    let n = seq.n;
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for r in 0..=n {
        let tr = seq.t[r].trace();
        first = first.max((tr - (n - r) as f64 * seq.s[r]).abs());
        let s_next = if r < n { seq.s[r + 1] } else { 0.0 };
        let tr_at = (&a * &seq.t[r]).trace();
        second = second.max((tr_at - (r + 1) as f64 * s_next).abs());
    }
    (first, second)
}

/// `s_r(γ)` of the shifted values `γ_i = α_i + β`, through
/// `s_r(γ) = Σ_j binom(m − j, r − j) β^{r−j} s_j(α)` with `m = len(α)`.
pub fn shifted_sym(alpha: &[f64], beta: f64) -> Result<SymCoeffs> {
    if alpha.iter().any(|x| !x.is_finite()) || !beta.is_finite() {
        return Err(invalid("shifted_sym input is not finite"));
    }
    let m = alpha.len();
    let s_alpha = expand(alpha);
    let sigma = (0..=m)
        .map(|r| {
            (0..=r)
                .map(|j| binom(m - j, r - j) * beta.powi((r - j) as i32) * s_alpha.get(j))
                .sum()
        })
        .collect();
    Ok(SymCoeffs { sigma })
}

/// Invariants `S_0 … S_n` of the bordered matrix
///
/// ```text
/// ⎡ diag(γ)  c ⎤
/// ⎣   cᵀ     d ⎦
/// ```
///
/// read off its characteristic polynomial:
/// `S_r = s_r(γ) + s_{r−1}(γ) d − Σ_i s_{r−2}(γ̂_i) c_i²`.
pub fn bordered_invariants(gamma: &[f64], offdiag: &[f64], corner: f64) -> Result<SymCoeffs> {
    if gamma.len() != offdiag.len() {
        return Err(invalid(format!(
            "bordered_invariants: {} diagonal entries but {} border entries",
            gamma.len(),
            offdiag.len()
        )));
    }
    if gamma.iter().chain(offdiag).any(|x| !x.is_finite()) || !corner.is_finite() {
        return Err(invalid("bordered_invariants input is not finite"));
    }
    let n = gamma.len() + 1;
    let s_gamma = expand(gamma);
    let hats: Vec<SymCoeffs> = (0..gamma.len())
        .map(|i| elem_sym_without(gamma, i))
        .collect();
    let mut sigma = vec![1.0; n + 1];
    for (r, slot) in sigma.iter_mut().enumerate().skip(1) {
        let base = s_gamma.get(r) + s_gamma.get(r - 1) * corner;
        *slot = match r {
            1 => base,
            2 => base - offdiag.iter().map(|c| c * c).sum::<f64>(),
            _ => {
                base - hats
                    .iter()
                    .zip(offdiag)
                    .map(|(h, c)| h.get(r - 2) * c * c)
                    .sum::<f64>()
            }
        };
    }
    Ok(SymCoeffs { sigma })
}

/// Assemble the bordered matrix used by [`bordered_invariants`].
pub fn bordered_matrix(gamma: &[f64], offdiag: &[f64], corner: f64) -> DMatrix<f64> {
    let n = gamma.len() + 1;
    let mut m = DMatrix::zeros(n, n);
    for (i, (&g, &c)) in gamma.iter().zip(offdiag).enumerate() {
        m[(i, i)] = g;
        m[(i, n - 1)] = c;
        m[(n - 1, i)] = c;
    }
    m[(n - 1, n - 1)] = corner;
    m
}
