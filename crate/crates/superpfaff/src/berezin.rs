//! Liouville-normalized Gaussian–Berezin integration over `V = V₀ ⊕ V₁`.
//!
//! Integrands are `P(x, ξ) · exp(−½ xᵀSx + ℓᵀx)` with `P` a super polynomial. The odd variables
//! are integrated first by top-coefficient extraction, then each even monomial is integrated
//! against the Gaussian by Isserlis' rule. Nothing here knows the closed form of the
//! superPfaffian, so [`integrate_exp_mu`] serves as its independent oracle.

use std::collections::HashMap;

use crate::superlinalg::{even_det, even_inverse, inertia, SuperMatrix, WeilMatrix};
use crate::superspace::{full_mask, moment_polynomial, SuperPolynomial, SymplecticSuperSpace};
use crate::weil::{Scalar, WeilElement};
use crate::{Error, Result};

/// Largest total even degree accepted by the moment recursion.
pub const WICK_DEGREE_CAP: u32 = 12;

/// `∫_{V₁} dξ P`: the coefficient of `ξ¹⋯ξⁿ`, times `(−1)^{n(n−1)/2}` and the orientation.
/// The result is a polynomial in `x` alone (`n = 0`).
pub fn odd_top_integral<S: Scalar>(space: &SymplecticSuperSpace, p: &SuperPolynomial<S>) -> Result<SuperPolynomial<S>> {
    let (m, n) = (space.m(), space.n());
    if p.m() != m || p.n() != n {
        return Err(Error::Structure("integrand does not live on this space".into()));
    }
    let top = full_mask(n);
    let flip = (n * n.saturating_sub(1) / 2) % 2 == 1;
    let sign = if flip { -space.orientation() } else { space.orientation() };
    let sign = S::from_i64(sign as i64);
    let raw = p.raw_terms().iter().map(|(i, w)| {
        let ts: Vec<(u64, S)> = w
            .terms()
            .iter()
            .filter(|(mask, _)| mask & top == top)
            .map(|(mask, c)| (mask >> n, c.clone() * sign.clone()))
            .collect();
        (i.clone(), WeilElement::from_terms(p.n_weil(), ts).expect("shifted blades fit"))
    });
    Ok(SuperPolynomial::from_raw(m, 0, p.n_weil(), raw))
}

/// Whether every body entry is real.
fn body_is_real<S: Scalar>(s: &WeilMatrix<S>) -> bool {
    s.entries().all(|(_, _, e)| e.body().real_sign().is_some())
}

/// Checks that `s` is symmetric with positive definite body (real part, for complex bodies).
pub fn check_positive_body<S: Scalar>(s: &WeilMatrix<S>) -> Result<()> {
    if s.rows() != s.cols() || s.transpose() != *s {
        return Err(Error::Structure("Gaussian exponent must be a symmetric matrix".into()));
    }
    let m = s.rows();
    let sig = if body_is_real(s) {
        inertia(&s.body())
    } else {
        let re: Vec<Vec<f64>> = s.body().iter().map(|r| r.iter().map(|v| v.to_c64().re).collect()).collect();
        inertia(&re)
    };
    match sig {
        Ok((p, _)) if p == m => Ok(()),
        Ok((p, q)) => Err(Error::Domain(format!("Gaussian exponent has signature ({p},{q}), not positive definite"))),
        Err(_) => Err(Error::Domain("Gaussian exponent is degenerate".into())),
    }
}

/// `det(S)^{−1/2}` for symmetric `S` with positive definite (real part of the) body.
///
/// Real bodies take the positive root of the determinant. Complex bodies use the product of
/// principal roots of the pivots of an unpivoted LDLᵀ, which is the continuous branch on the
/// convex set `Re S > 0` that is positive on real points.
pub fn inv_sqrt_det<S: Scalar>(s: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    check_positive_body(s)?;
    if body_is_real(s) {
        return even_det(s)?.sqrt_even()?.inverse_even();
    }
    let m = s.rows();
    let mut a = s.clone();
    let mut root = WeilElement::one(s.n_gen());
    for k in 0..m {
        let d = a.get(k, k).clone();
        root = &root * &d.sqrt_even()?;
        let dinv = d.inverse_even()?;
        for i in k + 1..m {
            let f = a.get(i, k) * &dinv;
            for j in k + 1..m {
                let v = a.get(i, j) - &(&f * a.get(k, j));
                a.set(i, j, v);
            }
        }
    }
    root.inverse_even()
}

/// Isserlis moments `E[x^I]` of a centered Gaussian with covariance `cov`, memoized.
pub struct Isserlis<'a, S: Scalar> {
    cov: &'a WeilMatrix<S>,
    memo: HashMap<Vec<u32>, WeilElement<S>>,
}

impl<'a, S: Scalar> Isserlis<'a, S> {
    pub fn new(cov: &'a WeilMatrix<S>) -> Self {
        Isserlis { cov, memo: HashMap::new() }
    }

    /// Sum over pairings, via `E[x_a f] = Σ_b cov_ab E[∂_b f]`.
    pub fn moment(&mut self, i: &[u32]) -> Result<WeilElement<S>> {
        let deg: u32 = i.iter().sum();
        if deg > WICK_DEGREE_CAP {
            return Err(Error::Capacity(format!("moment of degree {deg} exceeds the cap {WICK_DEGREE_CAP}")));
        }
        let n_gen = self.cov.n_gen();
        if deg % 2 == 1 {
            return Ok(WeilElement::zero(n_gen));
        }
        if deg == 0 {
            return Ok(WeilElement::one(n_gen));
        }
        if let Some(v) = self.memo.get(i) {
            return Ok(v.clone());
        }
        let a = i.iter().position(|&e| e > 0).expect("nonzero degree");
        let mut rest = i.to_vec();
        rest[a] -= 1;
        let mut total = WeilElement::zero(n_gen);
        for b in 0..i.len() {
            if rest[b] == 0 || self.cov.get(a, b).is_zero() {
                continue;
            }
            let mult = S::from_i64(rest[b] as i64);
            let mut next = rest.clone();
            next[b] -= 1;
            let sub = self.moment(&next)?;
            total = &total + &(self.cov.get(a, b) * &sub).scale(&mult);
        }
        self.memo.insert(i.to_vec(), total.clone());
        Ok(total)
    }
}

/// `∫ x^I exp(−½xᵀSx) dx/(2π)^{m/2}`.
pub fn gaussian_moment<S: Scalar>(i: &[u32], s: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    if i.len() != s.rows() {
        return Err(Error::Structure("multi-index length differs from the matrix size".into()));
    }
    if i.iter().sum::<u32>() % 2 == 1 {
        check_positive_body(s)?;
        return Ok(WeilElement::zero(s.n_gen()));
    }
    let base = inv_sqrt_det(s)?;
    let cov = even_inverse(s)?;
    Ok(&Isserlis::new(&cov).moment(i)? * &base)
}

/// `P(x, ξ) · exp(−½ xᵀSx + ℓᵀx)` on `V`.
#[derive(Clone, Debug)]
pub struct GaussianIntegrand<S: Scalar> {
    space: SymplecticSuperSpace,
    quadratic: WeilMatrix<S>,
    linear: Option<Vec<WeilElement<S>>>,
    prefactor: SuperPolynomial<S>,
}

impl<S: Scalar> GaussianIntegrand<S> {
    pub fn new(
        space: SymplecticSuperSpace,
        quadratic: WeilMatrix<S>,
        linear: Option<Vec<WeilElement<S>>>,
        prefactor: SuperPolynomial<S>,
    ) -> Result<Self> {
        let m = space.m();
        if quadratic.rows() != m {
            return Err(Error::Structure(format!("quadratic part must be {m}×{m}")));
        }
        check_positive_body(&quadratic)?;
        if prefactor.m() != m || prefactor.n() != space.n() || prefactor.n_weil() != quadratic.n_gen() {
            return Err(Error::Structure("prefactor shape does not match the space".into()));
        }
        if let Some(l) = &linear {
            if l.len() != m || l.iter().any(|e| !e.is_even() || e.n_gen() != quadratic.n_gen()) {
                return Err(Error::Structure("linear term must be m even Weil elements".into()));
            }
        }
        Ok(GaussianIntegrand { space, quadratic, linear, prefactor })
    }

    pub fn space(&self) -> &SymplecticSuperSpace {
        &self.space
    }
}

fn binomial<S: Scalar>(n: u32, k: u32) -> S {
    let mut v = S::one();
    for t in 0..k {
        v = v * S::from_i64((n - t) as i64) / S::from_i64((t + 1) as i64);
    }
    v
}

/// Exact finite evaluation of the integral.
pub fn integrate<S: Scalar>(g: &GaussianIntegrand<S>) -> Result<WeilElement<S>> {
    let n_gen = g.quadratic.n_gen();
    let even = odd_top_integral(&g.space, &g.prefactor)?;
    let cov = even_inverse(&g.quadratic)?;
    let base = inv_sqrt_det(&g.quadratic)?;
    let mut wick = Isserlis::new(&cov);
    let m = g.space.m();

    let (mean, factor) = match &g.linear {
        Some(l) if l.iter().any(|e| !e.is_zero()) => {
            let mean: Vec<WeilElement<S>> = (0..m)
                .map(|a| (0..m).fold(WeilElement::zero(n_gen), |acc, b| &acc + &(cov.get(a, b) * &l[b])))
                .collect();
            let quad = (0..m).fold(WeilElement::zero(n_gen), |acc, a| &acc + &(&l[a] * &mean[a]));
            (Some(mean), quad.scale(&S::from_ratio(1, 2)).exp_even()?)
        }
        _ => (None, WeilElement::one(n_gen)),
    };

    let mut total = WeilElement::zero(n_gen);
    for (i, c) in even.raw_terms() {
        let value = match &mean {
            None => wick.moment(i)?,
            Some(mean) => shifted_moment(&mut wick, i, mean)?,
        };
        total = &total + &(&value * c);
    }
    Ok(&(&factor * &base) * &total)
}

/// `E[(y + μ)^I] = Σ_{K ≤ I} C(I, K) μ^{I−K} E[y^K]`.
fn shifted_moment<S: Scalar>(wick: &mut Isserlis<'_, S>, i: &[u32], mean: &[WeilElement<S>]) -> Result<WeilElement<S>> {
    let n_gen = mean.first().map_or(0, |e| e.n_gen());
    let mut total = WeilElement::zero(n_gen);
    let mut k = vec![0u32; i.len()];
    loop {
        if k.iter().sum::<u32>() % 2 == 0 {
            let mut coeff = S::one();
            let mut shift = WeilElement::one(n_gen);
            for a in 0..i.len() {
                coeff = coeff * binomial::<S>(i[a], k[a]);
                shift = &shift * &mean[a].pow(i[a] - k[a]);
            }
            if !shift.is_zero() {
                total = &total + &(&shift * &wick.moment(&k)?).scale(&coeff);
            }
        }
        // Odometer over 0 ≤ k ≤ i.
        let mut a = 0;
        loop {
            if a == i.len() {
                return Ok(total);
            }
            if k[a] < i[a] {
                k[a] += 1;
                break;
            }
            k[a] = 0;
            a += 1;
        }
    }
}

/// `∫_V exp(μ(X, v))` for `X ∈ spo` whose even quadratic form has positive definite body
/// (or positive definite real part, for complex points).
///
/// `X` is split as `X₀ + R` with `X₀` the body of the `A` block; `exp(μ(R))` is nilpotent
/// apart from the odd-odd body and is expanded exactly before integration.
pub fn integrate_exp_mu<S: Scalar>(x: &SuperMatrix<S>) -> Result<WeilElement<S>> {
    x.check_parity()?;
    let space = *x.space();
    let n_gen = x.n_gen();
    let a_body = x.a().body_matrix();
    let s = a_body.j_left();
    check_positive_body(&s)?;
    let x0 = SuperMatrix::block_diag(space, a_body, WeilMatrix::zeros(space.n(), space.n(), n_gen))?;
    let rest = x.try_sub(&x0)?;
    let prefactor = moment_polynomial(&rest)?.exp_nilpotent()?;
    integrate(&GaussianIntegrand::new(space, s, None, prefactor)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superspace::MultiIndexPair;
    use crate::weil::Rational;

    type Q = Rational;
    type W = WeilElement<Q>;
    type P = SuperPolynomial<Q>;

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    #[test]
    fn odd_top_examples() {
        // (0,1): a + ξb ↦ b, with a, b Weil constants.
        let sp = SymplecticSuperSpace::new(0, 1).unwrap();
        let nw = 2;
        let a = W::generator(nw, 0);
        let b = &W::generator(nw, 0) * &W::generator(nw, 1);
        let phi = &P::constant(0, 1, &a).unwrap() + &P::monomial(0, 1, &MultiIndexPair::new(vec![], &[1]), &b).unwrap();
        let r = odd_top_integral(&sp, &phi).unwrap();
        assert_eq!(r.coefficient(&MultiIndexPair::new(vec![], &[])), b);
        // (0,2): 1 − cξη ↦ c.
        let sp = SymplecticSuperSpace::new(0, 2).unwrap();
        let phi = &P::one(0, 2, 0) - &(&P::xi(0, 2, 0, 0) * &P::xi(0, 2, 0, 1)).scale(&q(7));
        let r = odd_top_integral(&sp, &phi).unwrap();
        assert_eq!(r.coefficient(&MultiIndexPair::new(vec![], &[])), W::from_i64(0, 7));
        let r = odd_top_integral(&sp.flipped(), &phi).unwrap();
        assert_eq!(r.coefficient(&MultiIndexPair::new(vec![], &[])), W::from_i64(0, -7));
    }

    #[test]
    fn moments_of_scaled_identity() {
        let s = WeilMatrix::<Q>::from_i64(2, 2, 0, &[3, 0, 0, 3]);
        assert_eq!(gaussian_moment(&[0, 0], &s).unwrap(), W::constant(0, Q::new(1.into(), 3.into())));
        assert_eq!(gaussian_moment(&[2, 0], &s).unwrap(), W::constant(0, Q::new(1.into(), 9.into())));
        assert!(gaussian_moment(&[1, 2], &s).unwrap().is_zero());
        // E[x⁴] = 3σ⁴ with σ² = 1/3.
        assert_eq!(gaussian_moment(&[4, 0], &s).unwrap(), W::constant(0, Q::new(1.into(), 9.into())));
        assert!(matches!(gaussian_moment(&[14, 0], &s), Err(Error::Capacity(_))));
        let neg = WeilMatrix::<Q>::from_i64(2, 2, 0, &[-1, 0, 0, 1]);
        assert!(matches!(gaussian_moment(&[0, 0], &neg), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_mu_on_the_two_basic_examples() {
        for c in [1i64, 2, 3] {
            let sp = SymplecticSuperSpace::new(2, 0).unwrap();
            let a = WeilMatrix::from_i64(2, 2, 0, &[0, -c, c, 0]);
            let x = SuperMatrix::<Q>::block_diag(sp, a, WeilMatrix::zeros(0, 0, 0)).unwrap();
            assert_eq!(integrate_exp_mu(&x).unwrap(), W::constant(0, Q::new(1.into(), c.into())));
        }
        for c in [1i64, -2, 5] {
            let sp = SymplecticSuperSpace::new(0, 2).unwrap();
            let d = WeilMatrix::from_i64(2, 2, 0, &[0, -c, c, 0]);
            let x = SuperMatrix::<Q>::block_diag(sp, WeilMatrix::zeros(0, 0, 0), d).unwrap();
            assert_eq!(integrate_exp_mu(&x).unwrap(), W::from_i64(0, c));
        }
    }

    #[test]
    fn linear_term_prefactor_one() {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        let s = WeilMatrix::<f64>::from_i64(2, 2, 0, &[3, 0, 0, 3]);
        let l = vec![WeilElement::constant(0, 0.5), WeilElement::constant(0, -1.0)];
        let g = GaussianIntegrand::new(sp, s, Some(l), SuperPolynomial::one(2, 0, 0)).unwrap();
        let expect = (0.5f64 * (0.25 + 1.0) / 3.0).exp() / 3.0;
        assert!((integrate(&g).unwrap().body() - expect).abs() < 1e-14);
    }
}
