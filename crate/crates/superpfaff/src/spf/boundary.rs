//! Boundary values of the holomorphic extension, the sl(2) orbit identity and the closed
//! spo(2,2) formula.

use num_complex::Complex64;

use super::spf_complex;
use crate::superlinalg::SuperMatrix;
use crate::weil::{GaussRational, Rational, Scalar, WeilElement};
use crate::{Error, Result};

/// Probe values `𝒊^{(m−n)/2}·Spf(𝒊(X + 𝒊εY))` and their extrapolated limit as `ε → 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryProbe {
    pub eps: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit: Complex64,
    /// Difference between the last two diagonal entries of the Richardson table.
    pub error_estimate: f64,
}

/// `ε_k = 0.1·2^{−k}` for `k = 0..8`.
pub fn default_eps() -> Vec<f64> {
    (0..8).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

/// Richardson extrapolation of `f(ε) = L + a₁ε + a₂ε² + …` sampled at `ε₀·2^{−k}`.
pub fn richardson(values: &[Complex64]) -> (Complex64, f64) {
    let mut row: Vec<Complex64> = Vec::new();
    let mut last_err = f64::INFINITY;
    for v in values {
        let mut next = vec![*v];
        for (j, prev) in row.iter().enumerate() {
            let f = 2f64.powi(j as i32 + 1);
            next.push((next[j] * f - prev) / (f - 1.0));
        }
        if let (Some(a), Some(b)) = (next.last(), next.iter().rev().nth(1)) {
            last_err = (a - b).norm();
        }
        row = next;
    }
    (*row.last().unwrap_or(&Complex64::new(0.0, 0.0)), last_err)
}

/// Probes the boundary value at a scalar point `X` from the direction `Y ∈ 𝒱⁻`.
pub fn boundary_probe(x: &SuperMatrix<Complex64>, y: &SuperMatrix<Complex64>, eps: &[f64]) -> Result<BoundaryProbe> {
    if x.n_gen() != 0 || y.n_gen() != 0 {
        return Err(Error::Structure("boundary probes take scalar points".into()));
    }
    if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| *e <= 0.0) {
        return Err(Error::Domain("ε must be a decreasing list of positive numbers".into()));
    }
    let (m, n) = (x.space().m() as f64, x.space().n() as f64);
    let i = Complex64::new(0.0, 1.0);
    let phase = i.powf((m - n) / 2.0);
    let mut values = Vec::with_capacity(eps.len());
    for &e in eps {
        let z = x.try_add(&y.scale(&Complex64::new(0.0, e)))?.scale(&i);
        values.push(phase * spf_complex(&z)?.value.body());
    }
    let (limit, error_estimate) = richardson(&values);
    Ok(BoundaryProbe { eps: eps.to_vec(), values, limit, error_estimate })
}

/// `(Spf(H), 2·𝓕_Ω(H))` for the Cartan element `H = [[0, −c], [c, 0]]`, using
/// `Spf(H) = 1/c` and `𝓕_Ω(H) = 𝒊/α(H)` with `α(H) = 2𝒊c`.
pub fn sl2_orbit_identity(c: &Rational) -> Result<(GaussRational, GaussRational)> {
    if Scalar::is_zero(c) {
        return Err(Error::SingularBody("the Cartan element must be regular (c ≠ 0)".into()));
    }
    let i = GaussRational::imag_unit().expect("Gaussian rationals carry 𝒊");
    let cg = GaussRational::from_rational(c);
    let spf = GaussRational::one() / cg.clone();
    let alpha = GaussRational::from_i64(2) * i.clone() * cg;
    let orbit = GaussRational::from_i64(2) * (i / alpha);
    Ok((spf, orbit))
}

/// The closed spo(2,2) expression
/// `(d − (a(αδ+βγ) − bαγ + cβδ)/(a²+bc))·Spf₀([[a, b], [c, −a]])`, reading
/// `a, b, c, d, α, β, γ, δ` from their positions in the standard parametrization.
pub fn spo22_formula<S: Scalar>(x: &SuperMatrix<S>) -> Result<WeilElement<S>> {
    let sp = x.space();
    if (sp.m(), sp.n()) != (2, 2) {
        return Err(Error::Structure("the spo(2,2) formula needs m = n = 2".into()));
    }
    let (a, b, c) = (x.a().get(0, 0), x.a().get(0, 1), x.a().get(1, 0));
    let d = x.d().get(1, 0);
    let alpha = -x.c().get(0, 0);
    let beta = x.b().get(0, 0);
    let gamma = -x.c().get(1, 0);
    let delta = x.b().get(0, 1);
    let q = &(a * a) + &(b * c);
    let num = &(&(a * &(&(&alpha * delta) + &(beta * &gamma))) - &(b * &(&alpha * &gamma))) + &(c * &(beta * delta));
    let prefactor = d - &(&num * &q.inverse_even()?);

    let spf0 = match (q.body().real_sign(), c.body().real_sign()) {
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Greater)) => (-&q).sqrt_even()?.inverse_even()?,
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Less)) => -&(-&q).sqrt_even()?.inverse_even()?,
        (Some(std::cmp::Ordering::Greater), _) => {
            let i = S::imag_unit().ok_or_else(|| Error::Inexact("𝒰_{1,1} needs 𝒊; use a complex ring".into()))?;
            q.sqrt_even()?.inverse_even()?.scale(&i)
        }
        (Some(_), _) => return Err(Error::StratumBoundary("a² + bc has zero body".into())),
        (None, _) => return Err(Error::Domain("the spo(2,2) formula is stated for real bodies".into())),
    };
    Ok((&prefactor * &spf0).scale(&S::from_i64(sp.orientation() as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superlinalg::WeilMatrix;
    use crate::superspace::SymplecticSuperSpace;

    fn cartan(c: f64) -> SuperMatrix<Complex64> {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        let z = |v: f64| Complex64::new(v, 0.0);
        SuperMatrix::block_diag(sp, WeilMatrix::from_scalars(2, 2, 0, &[z(0.0), z(-c), z(c), z(0.0)]), WeilMatrix::zeros(0, 0, 0)).unwrap()
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let vals: Vec<Complex64> = (0..6).map(|k| {
            let e = 0.5f64.powi(k);
            Complex64::new(1.0 + 3.0 * e - 2.0 * e * e + e * e * e, 0.0)
        }).collect();
        let (l, _) = richardson(&vals);
        assert!((l - 1.0).norm() < 1e-12);
    }

    #[test]
    fn cartan_probe_values() {
        for c in [1.0, 2.0, -1.5] {
            // J₂ lies in 𝒱⁻ for our orientation of B.
            let probe = boundary_probe(&cartan(c), &cartan(-1.0), &default_eps()).unwrap();
            for (e, v) in probe.eps.iter().zip(&probe.values) {
                let expect = 1.0 / Complex64::new(c, -e);
                assert!((v - expect).norm() < 1e-12, "c={c} ε={e}: {v} vs {expect}");
            }
            assert!((probe.limit - 1.0 / c).norm() < 1e-9, "{:?}", probe.limit);
        }
    }

    #[test]
    fn orbit_identity_examples() {
        let (a, b) = sl2_orbit_identity(&Rational::from_i64(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, GaussRational::new(Rational::new(1.into(), 2.into()), Rational::from_i64(0)));
        let (a, b) = sl2_orbit_identity(&Rational::from_i64(-1)).unwrap();
        assert_eq!((a.clone(), b), (GaussRational::from_i64(-1), a));
        assert!(sl2_orbit_identity(&Rational::from_i64(0)).is_err());
    }
}
