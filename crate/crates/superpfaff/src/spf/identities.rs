//! Two-sided checks of the identities satisfied by `Spf`.
//!
//! Every check computes both sides along independent paths and returns them unchanged;
//! callers decide on exact equality or a relative tolerance.

use crate::berezin::integrate_exp_mu;
use crate::superlinalg::{even_det, pfaffian, submatrix_j, SuperMatrix, WeilMatrix};
use crate::superspace::{bilinear_b, eps_sign, full_mask, MultiIndexPair, SuperPolynomial, SymplecticSuperSpace};
use crate::weil::{Scalar, WeilElement};
use crate::{Error, Result};

use super::taylor::{c_tilde_even, integrate_against_exp_mu, multi_indices, taylor_c};
use super::{spf, spf_closed, spf_closed_with_unit};

/// Both sides of an identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome<S: Scalar> {
    pub lhs: WeilElement<S>,
    pub rhs: WeilElement<S>,
}

impl<S: Scalar> CheckOutcome<S> {
    pub fn new(lhs: WeilElement<S>, rhs: WeilElement<S>) -> Self {
        CheckOutcome { lhs, rhs }
    }

    pub fn rel_err(&self) -> f64 {
        self.lhs.relative_error(&self.rhs)
    }

    pub fn holds_exactly(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn sign<S: Scalar>(negative: bool) -> S {
    if negative {
        -S::one()
    } else {
        S::one()
    }
}

/// `λ^k` for a possibly negative integer `k`.
fn int_pow<S: Scalar>(lambda: &S, k: i64) -> Result<S> {
    if k < 0 && lambda.is_zero() {
        return Err(Error::SingularBody("negative power of zero".into()));
    }
    let mut out = S::one();
    for _ in 0..k.unsigned_abs() {
        out = out * lambda.clone();
    }
    Ok(if k < 0 { S::one() / out } else { out })
}

fn factorial(i: &[u32]) -> i64 {
    i.iter().map(|&e| (1..=e as i64).product::<i64>()).product()
}

fn value<S: Scalar>(x: &SuperMatrix<S>) -> Result<WeilElement<S>> {
    Ok(spf(x)?.value)
}

/// `Spf(g*Xg)·Ber₍₁,₀₎(g)` against `Spf(X)` for an even Weil point `g` of `GL(V)`.
pub fn covariance_check<S: Scalar>(x: &SuperMatrix<S>, g: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let y = g.adjoint_star().try_mul(x)?.try_mul(g)?;
    let lhs = &value(&y)? * &g.berezinian_10()?;
    Ok(CheckOutcome::new(lhs, value(x)?))
}

/// `Spf(g⁻¹Xg)` against `det(body(g)|V₁)·Spf(X)` for `g ∈ SpO`.
pub fn spo_covariance_check<S: Scalar>(x: &SuperMatrix<S>, g: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let y = g.inverse()?.try_mul(x)?.try_mul(g)?;
    let det_odd = even_det(&g.d().body_matrix())?;
    Ok(CheckOutcome::new(value(&y)?, &det_odd * &value(x)?))
}

/// `Spf(X)²` against `Ber⁻(X)`.
pub fn square_check<S: Scalar>(x: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let v = value(x)?;
    let ber = if x.space().m() == 0 { even_det(x.d())? } else { x.berezinian_minus()? };
    Ok(CheckOutcome::new(&v * &v, ber))
}

/// `Spf(λX)` against `λ^{(n−m)/2}·Spf(X)` for `λ > 0`.
pub fn homogeneity_check<S: Scalar>(x: &SuperMatrix<S>, lambda: &S) -> Result<CheckOutcome<S>> {
    if lambda.real_sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain("homogeneity is checked for real λ > 0".into()));
    }
    let (m, n) = (x.space().m() as i64, x.space().n() as i64);
    let rhs = value(x)?.scale(&int_pow(lambda, (n - m).div_euclid(2))?);
    Ok(CheckOutcome::new(value(&x.scale(lambda))?, rhs))
}

/// The factorization `X = (1 A⁻¹B; 0 1)* diag(A, D − CA⁻¹B) (1 A⁻¹B; 0 1)`, checked with the
/// integral oracle on both sides: `∫exp μ(X)` against `∫exp μ(diag(A, D − CA⁻¹B))`.
pub fn decomposition_check<S: Scalar>(x: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    let schur = if space.m() == 0 { x.d().clone() } else { x.schur_d()? };
    let (anti, _) = schur.antisymmetrize();
    let diag = SuperMatrix::block_diag(space, x.a().clone(), anti)?;
    Ok(CheckOutcome::new(integrate_exp_mu(x)?, integrate_exp_mu(&diag)?))
}

/// The second factorization, for invertible `D`: `∫exp μ(X)` against
/// `Pfaff(D)·∫_{V₀} exp μ(A − BD⁻¹C)` (times the orientation).
pub fn decomposition_d_check<S: Scalar>(x: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    let even = SymplecticSuperSpace::new(space.m(), 0)?;
    let a2 = if space.n() == 0 { x.a().clone() } else { x.schur_a()? };
    let even_part = integrate_exp_mu(&SuperMatrix::block_diag(even, a2, WeilMatrix::zeros(0, 0, x.n_gen()))?)?;
    let rhs = (&pfaffian(x.d())? * &even_part).scale(&S::from_i64(space.orientation() as i64));
    Ok(CheckOutcome::new(integrate_exp_mu(x)?, rhs))
}

fn generic_point<S: Scalar>(m: usize, n: usize, nw: u32) -> Vec<SuperPolynomial<S>> {
    (0..m).map(|a| SuperPolynomial::x(m, n, nw, a)).chain((0..n).map(|k| SuperPolynomial::xi(m, n, nw, k))).collect()
}

fn apply_rows<S: Scalar>(rows: &[Vec<WeilElement<S>>], v: &[WeilElement<S>]) -> Vec<WeilElement<S>> {
    let nw = v.first().map_or(0, |e| e.n_gen());
    rows.iter().map(|r| r.iter().zip(v).fold(WeilElement::zero(nw), |acc, (a, b)| &acc + &(a * b))).collect()
}

/// `∫_V exp(μ(X, v) + λB(v, w))` against `Spf(X)·exp(−λ²/2·B(w, X⁻¹w))` for invertible `X`
/// with body in `𝒱⁺` and a Weil point `w` of `V`.
pub fn shifted_gaussian<S: Scalar>(x: &SuperMatrix<S>, w: &[WeilElement<S>], lambda: &S) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    let (m, n, nw) = (space.m(), space.n(), x.n_gen());
    if w.len() != m + n {
        return Err(Error::Structure(format!("w has {} coordinates, expected {}", w.len(), m + n)));
    }
    for (k, c) in w.iter().enumerate() {
        if (k < m && !c.is_even()) || (k >= m && !c.is_odd()) || c.n_gen() != nw {
            return Err(Error::Parity(format!("coordinate {} of w has the wrong parity", k + 1)));
        }
    }
    let v = generic_point::<S>(m, n, nw);
    let wp: Vec<SuperPolynomial<S>> = w.iter().map(|c| SuperPolynomial::constant(m, n, c)).collect::<Result<_>>()?;
    let pairing = bilinear_b(m, &v, &wp, &SuperPolynomial::zero(m, n, nw)).scale(lambda);
    let mut linear = Vec::with_capacity(m);
    let mut odd_part = pairing.clone();
    for a in 0..m {
        let mut e = vec![0; m];
        e[a] = 1;
        let l = pairing.coefficient(&MultiIndexPair::from_mask(e.clone(), 0, n));
        odd_part = odd_part.try_sub(&SuperPolynomial::monomial(m, n, &MultiIndexPair::from_mask(e, 0, n), &l)?)?;
        linear.push(l);
    }
    let lhs = integrate_against_exp_mu(x, &odd_part.exp_nilpotent()?, Some(linear))?;

    let xinv_w = apply_rows(&x.inverse()?.full_rows(), w);
    let quad = bilinear_b(m, w, &xinv_w, &WeilElement::zero(nw));
    let factor = quad.scale(&(-(lambda.clone() * lambda.clone()) / S::from_i64(2))).exp_even()?;
    Ok(CheckOutcome::new(lhs, &value(x)? * &factor))
}

/// `D^# = B^#(e^I f^J)` as a polynomial on `V`: `B^#(e₂ᵢ) = x²ⁱ⁺¹`, `B^#(e₂ᵢ₊₁) = −x²ⁱ` and
/// `B^#(f_k) = −ξ^k`, the odd factors taken in increasing order.
pub fn sharp<S: Scalar>(space: &SymplecticSuperSpace, i: &[u32], j: u64, nw: u32) -> SuperPolynomial<S> {
    let (m, n) = (space.m(), space.n());
    let mut out = SuperPolynomial::one(m, n, nw);
    for (a, &e) in i.iter().enumerate() {
        let partner = SuperPolynomial::x(m, n, nw, a ^ 1);
        let factor = if a % 2 == 0 { partner } else { -&partner };
        for _ in 0..e {
            out = &out * &factor;
        }
    }
    for k in 0..n {
        if j >> k & 1 == 1 {
            out = &out * &SuperPolynomial::xi(m, n, nw, k);
        }
    }
    out
}

/// Wick: `c̃_{D^#}(X)` against `c̄_D(X⁻¹)·Spf(X)` for `D = e^I f^J`, where
/// `c̄_{D_{I,J}} = I!·(−1)^{|J|(|J|+1)/2}·c_{I,J}`.
pub fn wick_check<S: Scalar>(x: &SuperMatrix<S>, i: &[u32], j: u64) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    if i.len() != space.m() || j & !full_mask(space.n()) != 0 {
        return Err(Error::Structure("multi-index does not match (m, n)".into()));
    }
    let lhs = integrate_against_exp_mu(x, &sharp(&space, i, j, x.n_gen()), None)?;
    let r = j.count_ones();
    let c = taylor_c(&x.inverse()?, i, j)?;
    let cbar = c.scale(&(S::from_i64(factorial(i)) * sign::<S>((r * (r + 1) / 2) % 2 == 1)));
    Ok(CheckOutcome::new(lhs, &cbar * &value(x)?))
}

/// `Spf(X)·Spf(λ²X⁻¹)` against `(−λ²)^{(n−m)/2}`, for `Re λ² < 0`.
pub fn k_lambda_check<S: Scalar>(x: &SuperMatrix<S>, lambda: &S) -> Result<CheckOutcome<S>> {
    let l2 = lambda.clone() * lambda.clone();
    if l2.to_c64().re >= 0.0 {
        return Err(Error::Domain("K_λ needs Re λ² < 0".into()));
    }
    let (m, n) = (x.space().m() as i64, x.space().n() as i64);
    let lhs = &value(x)? * &value(&x.inverse()?.scale(&l2))?;
    let rhs = if (n - m) % 2 == 0 {
        WeilElement::constant(x.n_gen(), int_pow(&-l2, (n - m) / 2)?)
    } else {
        WeilElement::zero(x.n_gen())
    };
    Ok(CheckOutcome::new(lhs, rhs))
}

/// `Σ_{|I|=|J|} (−1)^{|J|/2} c̃_I(A) c_{I,J}(C)` against
/// `(−1)^{|J|(|J|−1)/2} Pfaff((CA⁻¹B)_J)/√det A`, for `|J|` even and `c_{I,J}` the Taylor
/// coefficients of `exp μ([0 B; C 0])`.
pub fn corollary_eq1<S: Scalar>(x: &SuperMatrix<S>, j: u64) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    let (m, n, nw) = (space.m(), space.n(), x.n_gen());
    let r = j.count_ones();
    if r % 2 == 1 || j & !full_mask(n) != 0 {
        return Err(Error::Structure("corollary needs an even odd multi-index".into()));
    }
    let y = SuperMatrix::new(space, WeilMatrix::zeros(m, m, nw), x.b().clone(), x.c().clone(), WeilMatrix::zeros(n, n, nw))?;
    let mut lhs = WeilElement::zero(nw);
    for i in multi_indices(m, r) {
        let c = taylor_c(&y, &i, j)?;
        if !c.is_zero() {
            lhs = &lhs + &(&c_tilde_even(x.a(), &i)? * &c);
        }
    }
    lhs = lhs.scale(&sign::<S>((r / 2) % 2 == 1));
    let even = SymplecticSuperSpace::new(m, 0)?;
    let inv_root = spf_closed(&SuperMatrix::block_diag(even, x.a().clone(), WeilMatrix::zeros(0, 0, nw))?)?.value;
    let cab = x.c().try_mul(&crate::superlinalg::even_inverse(x.a())?.try_mul(x.b())?)?;
    let pf = pfaffian(&submatrix_j(&cab.antisymmetrize().0, j))?;
    let rhs = (&pf * &inv_root).scale(&sign::<S>((r * r.saturating_sub(1) / 2) % 2 == 1));
    Ok(CheckOutcome::new(lhs, rhs))
}

/// `Σ_{|J|=|I|} ε(J,J′)(−1)^{|J|(|J|−1)/2} Pfaff(D_{J′}) c_{I,J}(C)` against
/// `Pfaff(D)·c_I(BD⁻¹C)`, with `c_I(M)` the `x^I` coefficient of `exp(−μ(M))` on `V₀`.
pub fn corollary_eq2<S: Scalar>(x: &SuperMatrix<S>, i: &[u32]) -> Result<CheckOutcome<S>> {
    let space = *x.space();
    let (m, n, nw) = (space.m(), space.n(), x.n_gen());
    if i.len() != m {
        return Err(Error::Structure("multi-index does not match m".into()));
    }
    let r: u32 = i.iter().sum();
    let y = SuperMatrix::new(space, WeilMatrix::zeros(m, m, nw), x.b().clone(), x.c().clone(), WeilMatrix::zeros(n, n, nw))?;
    let full = full_mask(n);
    let mut lhs = WeilElement::zero(nw);
    for j in (0..=full).filter(|j| j.count_ones() == r) {
        let c = taylor_c(&y, i, j)?;
        if c.is_zero() {
            continue;
        }
        let s = eps_sign(j, n) < 0;
        let s = s ^ ((r * r.saturating_sub(1) / 2) % 2 == 1);
        let term = (&pfaffian(&submatrix_j(x.d(), full & !j))? * &c).scale(&sign::<S>(s));
        lhs = &lhs + &term;
    }
    let bdc = x.b().try_mul(&crate::superlinalg::even_inverse(x.d())?.try_mul(x.c())?)?;
    let even = SymplecticSuperSpace::new(m, 0)?;
    let c_i = taylor_c(&SuperMatrix::block_diag(even, bdc, WeilMatrix::zeros(0, 0, nw))?, i, 0)?
        .scale(&sign::<S>((r / 2) % 2 == 1));
    Ok(CheckOutcome::new(lhs, &pfaffian(x.d())? * &c_i))
}

/// `Spf` on the space with reversed orientation against `−Spf`.
pub fn orientation_flip_check<S: Scalar>(x: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    let flipped = x.with_space(x.space().flipped())?;
    Ok(CheckOutcome::new(value(&flipped)?, -&value(x)?))
}

/// `Spf` computed with `−𝒊` in place of `𝒊` against the conjugate of `Spf`, for real inputs.
pub fn conj_check<S: Scalar>(x: &SuperMatrix<S>) -> Result<CheckOutcome<S>> {
    if x.blocks().iter().any(|b| b.entries().any(|(_, _, e)| e.terms().iter().any(|t| t.1.real_sign().is_none()))) {
        return Err(Error::Domain("conjugation check needs real entries".into()));
    }
    Ok(CheckOutcome::new(spf_closed_with_unit(x, -1)?.value, spf_closed(x)?.value.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{point_rng, random_gl, random_spo, random_spo_group, SoulDensity, SpoOptions};
    use crate::weil::{GaussRational, Rational};

    type Q = Rational;
    type G = GaussRational;

    fn gauss(x: &SuperMatrix<Q>) -> SuperMatrix<G> {
        x.map_ring(|e| Ok(e.map_scalars(G::from_rational))).unwrap()
    }

    fn positive(seed: u64, m: usize, n: usize, nw: u32, invertible_d: bool) -> SuperMatrix<Q> {
        let sp = SymplecticSuperSpace::new(m, n).unwrap();
        random_spo(&mut point_rng(seed, 0), sp, nw, SpoOptions { stratum: Some((m, 0)), invertible_d, ..Default::default() })
    }

    #[test]
    fn square_and_covariance_exact() {
        for seed in 0..6 {
            for &(p, q) in &[(2, 0), (1, 1), (0, 2)] {
                let sp = SymplecticSuperSpace::new(2, 2).unwrap();
                let x = random_spo(&mut point_rng(seed, 1), sp, 6, SpoOptions { stratum: Some((p, q)), ..Default::default() });
                let xg = gauss(&x);
                let out = square_check(&xg).unwrap();
                assert!(out.holds_exactly(), "square {p},{q}: {out:?}");
                let g = gauss(&random_gl(&mut point_rng(seed, 2), sp, 6, SoulDensity::default()));
                let out = covariance_check(&xg, &g).unwrap();
                assert!(out.holds_exactly(), "covariance {p},{q}: {out:?}");
                let h = gauss(&random_spo_group(&mut point_rng(seed, 3), sp, 6, seed % 2 == 1, SoulDensity::default()));
                let out = spo_covariance_check(&xg, &h).unwrap();
                assert!(out.holds_exactly(), "SpO covariance {p},{q}: {out:?}");
            }
        }
    }

    #[test]
    fn homogeneity_and_signs() {
        for seed in 0..5 {
            let x = gauss(&positive(seed, 4, 2, 6, false));
            assert!(homogeneity_check(&x, &G::new(Q::new(9.into(), 4.into()), Q::from_i64(0))).unwrap().holds_exactly());
            assert!(orientation_flip_check(&x).unwrap().holds_exactly());
            let sp = SymplecticSuperSpace::new(2, 2).unwrap();
            let y = random_spo(&mut point_rng(seed, 9), sp, 6, SpoOptions { stratum: Some((1, 1)), ..Default::default() });
            let out = conj_check(&gauss(&y)).unwrap();
            assert!(out.holds_exactly(), "{out:?}");
        }
    }

    #[test]
    fn decompositions_agree_with_the_oracle() {
        for seed in 0..4 {
            let x = positive(seed, 2, 2, 6, true);
            assert!(decomposition_check(&x).unwrap().holds_exactly());
            assert!(decomposition_d_check(&x).unwrap().holds_exactly());
        }
    }

    #[test]
    fn shifted_gaussian_holds() {
        let real = |e: &WeilElement<Q>| e.map_scalars(|q| q.to_c64().re);
        for seed in 0..4 {
            let x = positive(seed, 2, 2, 6, true).map_ring(|e| Ok(real(e))).unwrap();
            let mut rng = point_rng(seed, 5);
            let w: Vec<WeilElement<f64>> = (0..4)
                .map(|k| {
                    let soul = crate::random::random_soul(&mut rng, 6, k >= 2, SoulDensity { fill: 1.0, max_terms: 2 });
                    real(&if k < 2 { &soul + &WeilElement::from_i64(6, k as i64 + 1) } else { soul })
                })
                .collect();
            for lambda in [0.0, 1.0, 0.5] {
                let out = shifted_gaussian(&x, &w, &lambda).unwrap();
                assert!(out.rel_err() < 1e-10, "seed {seed} λ {lambda}: {out:?}");
            }
        }
    }

    #[test]
    fn wick_scalar_example() {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        let x = SuperMatrix::<Q>::block_diag(sp, WeilMatrix::from_i64(2, 2, 0, &[0, -2, 2, 0]), WeilMatrix::zeros(0, 0, 0)).unwrap();
        let out = wick_check(&x, &[2, 0], 0).unwrap();
        assert_eq!(out.lhs, WeilElement::constant(0, Q::new(1.into(), 4.into())));
        assert!(out.holds_exactly());
    }

    #[test]
    fn wick_with_odd_directions() {
        for seed in 0..4 {
            let x = positive(seed, 2, 2, 6, true);
            for j in 0..4u64 {
                for r in 0..=2u32 {
                    for i in multi_indices(2, r) {
                        let out = wick_check(&x, &i, j).unwrap();
                        assert!(out.holds_exactly(), "seed {seed} I={i:?} J={j:b}: {out:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn k_lambda_at_i() {
        for seed in 0..4 {
            let x = gauss(&positive(seed, 4, 2, 6, true));
            let out = k_lambda_check(&x, &G::new(Q::from_i64(0), Q::from_i64(1))).unwrap();
            assert!(out.holds_exactly(), "{out:?}");
        }
    }

    #[test]
    fn corollaries() {
        for seed in 0..4 {
            let x = positive(seed, 2, 2, 8, true);
            for j in [0u64, 0b11] {
                let out = corollary_eq1(&x, j).unwrap();
                assert!(out.holds_exactly(), "eq1 J={j:b}: {out:?}");
            }
            for r in 0..=2 {
                for i in multi_indices(2, r) {
                    let out = corollary_eq2(&x, &i).unwrap();
                    assert!(out.holds_exactly(), "eq2 I={i:?}: {out:?}");
                }
            }
        }
    }
}
