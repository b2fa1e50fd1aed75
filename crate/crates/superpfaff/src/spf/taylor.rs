//! Taylor coefficients of `exp(μ(X, v))` and the expansions of `Spf` built from them.

use crate::berezin::{gaussian_moment, integrate, GaussianIntegrand};
use crate::superlinalg::{pfaffian, submatrix_j, SuperMatrix, WeilMatrix};
use crate::superspace::{eps_sign, full_mask, moment_polynomial, MultiIndexPair, SuperPolynomial};
use crate::weil::{Scalar, WeilElement};
use crate::{Error, Result};

/// Largest `k` for which `μ^k/k!` is expanded.
pub const TAYLOR_DEGREE_CAP: u32 = 8;

/// The coefficient `c_{I,J}(X)` of `ξ^J x^I` in `exp(μ(X, v)) = Σ ξ^J x^I c_{I,J}(X)`.
///
/// `μ` is homogeneous of degree 2, so only `μ^k/k!` with `2k = |I| + |J|` contributes.
pub fn taylor_c<S: Scalar>(x: &SuperMatrix<S>, i: &[u32], j: u64) -> Result<WeilElement<S>> {
    let (m, n) = (x.space().m(), x.space().n());
    if i.len() != m || j & !full_mask(n) != 0 {
        return Err(Error::Structure("multi-index does not match (m, n)".into()));
    }
    let deg = i.iter().sum::<u32>() + j.count_ones();
    if deg % 2 == 1 {
        return Ok(WeilElement::zero(x.n_gen()));
    }
    let k = deg / 2;
    if k > TAYLOR_DEGREE_CAP {
        return Err(Error::Capacity(format!("Taylor degree {deg} exceeds the cap {}", 2 * TAYLOR_DEGREE_CAP)));
    }
    let mu = moment_polynomial(x)?;
    let mut power = SuperPolynomial::one(m, n, x.n_gen());
    for t in 1..=k {
        power = power.try_mul(&mu)?.scale(&(S::one() / S::from_i64(t as i64)));
    }
    Ok(power.coefficient(&MultiIndexPair::from_mask(i.to_vec(), j, n)))
}

/// `∫_V P(v) exp(μ(X, v) + ℓ·x)` with `ℓ` an optional even linear term in the even coordinates.
pub fn integrate_against_exp_mu<S: Scalar>(
    x: &SuperMatrix<S>,
    p: &SuperPolynomial<S>,
    linear: Option<Vec<WeilElement<S>>>,
) -> Result<WeilElement<S>> {
    let space = *x.space();
    let (n, nw) = (space.n(), x.n_gen());
    let a_body = x.a().body_matrix();
    let x0 = SuperMatrix::block_diag(space, a_body.clone(), WeilMatrix::zeros(n, n, nw))?;
    let rest = moment_polynomial(&x.try_sub(&x0)?)?.exp_nilpotent()?;
    integrate(&GaussianIntegrand::new(space, a_body.j_left(), linear, p.try_mul(&rest)?)?)
}

/// `c̃_{I,J}(X) = ∫_V ξ^J x^I exp(μ(X, v))` for `X` with body in `𝒱⁺`.
pub fn taylor_c_tilde<S: Scalar>(x: &SuperMatrix<S>, i: &[u32], j: u64) -> Result<WeilElement<S>> {
    let (m, n) = (x.space().m(), x.space().n());
    let mono = SuperPolynomial::monomial(m, n, &MultiIndexPair::from_mask(i.to_vec(), j, n), &WeilElement::one(x.n_gen()))?;
    integrate_against_exp_mu(x, &mono, None)
}

/// `c̃_I(A) = ∫_{V₀} x^I exp(−½ B(v₀, Av₀))` for `A ∈ sp` with body in `𝒰⁺`.
pub fn c_tilde_even<S: Scalar>(a: &WeilMatrix<S>, i: &[u32]) -> Result<WeilElement<S>> {
    gaussian_moment(i, &a.j_left())
}

/// `Σ_{|J| even} ε(J, J′) Pfaff(X_J) Pfaff(Y_{J′})`, which equals `Pfaff(X + Y)`.
pub fn taylor_pfaff_expand<S: Scalar>(x: &WeilMatrix<S>, y: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    let n = x.rows();
    if y.rows() != n || x.cols() != n || y.cols() != n {
        return Err(Error::Structure("Pfaffian expansion needs two square matrices of one size".into()));
    }
    let full = full_mask(n);
    let mut total = WeilElement::zero(x.n_gen());
    for j in 0..=full {
        if j.count_ones() % 2 == 1 {
            continue;
        }
        let px = pfaffian(&submatrix_j(x, j))?;
        if px.is_zero() {
            continue;
        }
        let py = pfaffian(&submatrix_j(y, full & !j))?;
        let term = &px * &py;
        total = if eps_sign(j, n) > 0 { &total + &term } else { &total - &term };
    }
    Ok(total)
}

/// All `I ∈ ℕ^m` with `|I| = r`.
pub fn multi_indices(m: usize, r: u32) -> Vec<Vec<u32>> {
    if m == 0 {
        return if r == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=r).rev() {
        for mut rest in multi_indices(m - 1, r - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Σ_{|I| = |J| even} (−1)^{|J|(|J|−1)/2} ε(J, J′) c_{I,J}(Y) Pfaff(D_{J′}) c̃_I(A)` with
/// `Y = [0 B; C 0]` and `c_{I,J}(Y)` the Taylor coefficients of `exp(μ(Y))`.
pub fn taylor_spf2_sum<S: Scalar>(x: &SuperMatrix<S>) -> Result<WeilElement<S>> {
    let space = *x.space();
    let (m, n, nw) = (space.m(), space.n(), x.n_gen());
    let y = SuperMatrix::new(space, WeilMatrix::zeros(m, m, nw), x.b().clone(), x.c().clone(), WeilMatrix::zeros(n, n, nw))?;
    let full = full_mask(n);
    let mut total = WeilElement::zero(nw);
    for j in 0..=full {
        let r = j.count_ones();
        if r % 2 == 1 {
            continue;
        }
        let pd = pfaffian(&submatrix_j(x.d(), full & !j))?;
        if pd.is_zero() {
            continue;
        }
        let sign = eps_sign(j, n) * if (r * r.saturating_sub(1) / 2) % 2 == 1 { -1 } else { 1 };
        for i in multi_indices(m, r) {
            let c = taylor_c(&y, &i, j)?;
            if c.is_zero() {
                continue;
            }
            let term = &(&c * &pd) * &c_tilde_even(x.a(), &i)?;
            total = if sign > 0 { &total + &term } else { &total - &term };
        }
    }
    Ok(total.scale(&S::from_i64(space.orientation() as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{point_rng, random_spo, SpoOptions};
    use crate::superlinalg::c_ij_submatrix;
    use crate::superspace::SymplecticSuperSpace;
    use crate::weil::Rational;

    type Q = Rational;

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(0, 0), vec![Vec::<u32>::new()]);
    }

    fn factorial(i: &[u32]) -> i64 {
        i.iter().map(|&e| (1..=e as i64).product::<i64>()).product()
    }

    #[test]
    fn off_diagonal_coefficients_match_the_submatrix_formula() {
        let sp = SymplecticSuperSpace::new(4, 3).unwrap();
        for seed in 0..4 {
            let mut rng = point_rng(seed, 0);
            let x = random_spo(&mut rng, sp, 10, SpoOptions::default());
            let y = SuperMatrix::new(sp, WeilMatrix::zeros(4, 4, 10), x.b().clone(), x.c().clone(), WeilMatrix::zeros(3, 3, 10)).unwrap();
            for j in 0..8u64 {
                for r in 0..=3u32 {
                    for i in multi_indices(4, r) {
                        let true_c = taylor_c(&y, &i, j).unwrap();
                        let formula = c_ij_submatrix(x.c(), &i, j).unwrap();
                        assert_eq!(true_c.scale(&Q::from_i64(factorial(&i))), formula, "I={i:?} J={j:b}");
                    }
                }
            }
        }
    }

    #[test]
    fn constant_term_is_one() {
        let sp = SymplecticSuperSpace::new(2, 2).unwrap();
        let x = random_spo(&mut point_rng(3, 0), sp, 4, SpoOptions::default());
        assert_eq!(taylor_c(&x, &[0, 0], 0).unwrap(), WeilElement::one(4));
    }
}
