//! The superPfaffian `Spf` on `spo(V)`.
//!
//! On the stratum `𝒱_{p,q}` where `v ↦ B(v, Xv)` has signature `(p, q)`,
//! `Spf(X) = o · 𝒊^q · Pfaff(D − CA⁻¹B) / √|det A|` with `o` the orientation of the space.
//! On the tube `𝒱⁺ + 𝒊·spo(V)` the holomorphic extension replaces `√|det A|` by the branch of
//! `√det A` continued from the positive root on the real part.

use num_complex::Complex64;

use crate::superlinalg::{even_det, inertia, pfaffian, SuperMatrix, WeilMatrix};
use crate::weil::{Scalar, WeilElement};
use crate::{Error, Result};

pub mod boundary;
pub mod harmonic;
pub mod identities;
pub mod suite;
pub mod taylor;

pub use boundary::{boundary_probe, default_eps, richardson, sl2_orbit_identity, spo22_formula, BoundaryProbe};
pub use harmonic::{harmonicity_check, HarmonicReport};
pub use identities::*;
pub use suite::{run_suite, CheckReport, Failure, ScalarMode, SuiteConfig, SUITES};
pub use taylor::{c_tilde_even, taylor_c, taylor_c_tilde, taylor_pfaff_expand, taylor_spf2_sum};

/// Largest relative asymmetry of `D − CA⁻¹B` tolerated in float rings before antisymmetrizing.
pub const ANTISYMMETRY_TOL: f64 = 1e-6;

/// A superPfaffian value with the stratum of its argument.
#[derive(Clone, Debug, PartialEq)]
pub struct SpfValue<S: Scalar> {
    pub value: WeilElement<S>,
    /// Signature of the even quadratic form (of its real part, on the complex tube).
    pub stratum: (usize, usize),
    /// How the square-root branch was fixed, for complex arguments.
    pub branch_note: Option<String>,
}

/// `𝒊^k` in the ring, with `unit = ±1` selecting `𝒊` or `−𝒊`.
pub fn i_power<S: Scalar>(k: usize, unit: i8) -> Result<S> {
    let k = k % 4;
    if k.is_multiple_of(2) {
        return Ok(if k == 0 { S::one() } else { -S::one() });
    }
    let i = S::imag_unit().ok_or_else(|| Error::Inexact("an odd power of 𝒊 is needed; use a complex ring".into()))?;
    let i = if unit < 0 { -i } else { i };
    Ok(if k == 1 { i } else { -i })
}

/// `(D − CA⁻¹B)`, antisymmetrized, with the defect checked against the ring's tolerance.
fn odd_schur<S: Scalar>(x: &SuperMatrix<S>) -> Result<WeilMatrix<S>> {
    let schur = if x.space().m() == 0 { x.d().clone() } else { x.schur_d()? };
    let (anti, defect) = schur.antisymmetrize();
    let limit = if S::KIND.is_exact() { 0.0 } else { ANTISYMMETRY_TOL * schur.norm_inf().max(1.0) };
    if defect > limit {
        return Err(Error::Structure(format!("D − CA⁻¹B is not antisymmetric (defect {defect:.3e}); is X in spo?")));
    }
    Ok(anti)
}

fn stratum_of<S: Scalar>(x: &SuperMatrix<S>) -> Result<(usize, usize)> {
    if x.space().m() == 0 {
        return Ok((0, 0));
    }
    inertia(&x.quadratic_form_body()).map_err(|e| match e {
        Error::StratumBoundary(_) => Error::StratumBoundary("body of the A block is singular".into()),
        Error::Domain(_) => Error::Domain("the A block has a complex body; use spf_complex".into()),
        other => other,
    })
}

/// Closed form on the real strata.
pub fn spf_closed<S: Scalar>(x: &SuperMatrix<S>) -> Result<SpfValue<S>> {
    spf_closed_with_unit(x, 1)
}

/// Closed form with the fixed square root of `−1` replaced by `unit·𝒊`.
pub fn spf_closed_with_unit<S: Scalar>(x: &SuperMatrix<S>, unit: i8) -> Result<SpfValue<S>> {
    x.check_parity()?;
    let stratum = stratum_of(x)?;
    let n_gen = x.n_gen();
    let pf = pfaffian(&odd_schur(x)?)?;
    if pf.is_zero() {
        return Ok(SpfValue { value: pf, stratum, branch_note: None });
    }
    let root = if x.space().m() == 0 {
        WeilElement::one(n_gen)
    } else {
        even_det(x.a())?.abs_even()?.sqrt_even()?
    };
    let factor = i_power::<S>(stratum.1, unit)? * S::from_i64(x.space().orientation() as i64);
    let value = (&pf * &root.inverse_even()?).scale(&factor);
    Ok(SpfValue { value, stratum, branch_note: None })
}

/// Determinant of a small complex matrix by partial pivoting.
fn det_c64(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let r = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..r {
        let p = (k..r).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..r {
            let f = a[i][k] / a[k][k];
            for j in k..r {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

/// Continues `√det(Re A + t·𝒊 Im A)` from the positive root at `t = 0` to `t = 1`.
/// Cap on evaluations along one continuation path.
const MAX_CONTINUATION_STEPS: usize = 200_000;

fn continue_sqrt_det(body: &[Vec<Complex64>]) -> Result<(Complex64, usize)> {
    let re: Vec<Vec<Complex64>> = body.iter().map(|r| r.iter().map(|z| Complex64::new(z.re, 0.0)).collect()).collect();
    let im: Vec<Vec<Complex64>> = body.iter().map(|r| r.iter().map(|z| Complex64::new(0.0, z.im)).collect()).collect();
    let at = |t: f64| -> Vec<Vec<Complex64>> {
        re.iter().zip(&im).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * t).collect()).collect()
    };
    let d0 = det_c64(at(0.0));
    if !(d0.re > 0.0) {
        return Err(Error::Branch("real part of the argument is not in the positive stratum".into()));
    }
    // Adaptive steps: halve on an ambiguous root, grow again after acceptance.
    let (mut t, mut h, mut root, mut steps) = (0.0f64, 1.0 / 32.0, d0.sqrt(), 0usize);
    while t < 1.0 {
        if steps >= MAX_CONTINUATION_STEPS || h < 1e-14 {
            return Err(Error::Branch(format!("square-root continuation did not settle within {steps} steps")));
        }
        steps += 1;
        let next = (t + h).min(1.0);
        let d = det_c64(at(next));
        if d.norm() == 0.0 {
            return Err(Error::Branch("determinant vanishes along the continuation path".into()));
        }
        let c = d.sqrt();
        let (near, far) = ((c - root).norm(), (c + root).norm());
        if near.min(far) > 0.5 * c.norm() {
            h *= 0.5;
            continue;
        }
        root = if near <= far { c } else { -c };
        t = next;
        h = (h * 2.0).min(1.0 / 32.0);
    }
    Ok((root, steps))
}

/// Holomorphic extension to `𝒱⁺ + 𝒊·spo(V)`.
pub fn spf_complex<S: Scalar>(x: &SuperMatrix<S>) -> Result<SpfValue<S>> {
    x.check_parity()?;
    let m = x.space().m();
    if m > 0 {
        let s = x.a().body_matrix().j_left();
        let re: Vec<Vec<f64>> = s.body().iter().map(|r| r.iter().map(|v| v.to_c64().re).collect()).collect();
        match inertia(&re) {
            Ok((p, _)) if p == m => {}
            _ => return Err(Error::Domain("real part of the argument is outside 𝒱⁺".into())),
        }
    }
    let pf = pfaffian(&odd_schur(x)?)?;
    let orient = S::from_i64(x.space().orientation() as i64);
    if m == 0 || pf.is_zero() {
        return Ok(SpfValue { value: pf.scale(&orient), stratum: (m, 0), branch_note: None });
    }
    let det = even_det(x.a())?;
    let body: Vec<Vec<Complex64>> = x.a().body().iter().map(|r| r.iter().map(Scalar::to_c64).collect()).collect();
    let (root_f, steps) = continue_sqrt_det(&body)?;
    let principal = det
        .body()
        .sqrt()
        .ok_or_else(|| Error::Inexact(format!("√det A is not representable in {:?}", S::KIND)))?;
    let p = principal.to_c64();
    let root = if (p - root_f).norm() <= (p + root_f).norm() { principal } else { -principal };
    let sqrt_det = det.sqrt_with_root(&root)?;
    let value = (&pf * &sqrt_det.inverse_even()?).scale(&orient);
    let note = format!("√det A continued along the segment from Re A in {steps} steps; body root {root_f:.6}");
    Ok(SpfValue { value, stratum: (m, 0), branch_note: Some(note) })
}

/// `spf_closed` for real bodies, `spf_complex` otherwise.
pub fn spf<S: Scalar>(x: &SuperMatrix<S>) -> Result<SpfValue<S>> {
    let real = x.a().entries().all(|(_, _, e)| e.body().real_sign().is_some());
    if real {
        spf_closed(x)
    } else {
        spf_complex(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superspace::SymplecticSuperSpace;
    use crate::weil::{GaussRational, Rational};

    type Q = Rational;

    fn sl2(c: i64) -> SuperMatrix<Q> {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        SuperMatrix::block_diag(sp, WeilMatrix::from_i64(2, 2, 0, &[0, -c, c, 0]), WeilMatrix::zeros(0, 0, 0)).unwrap()
    }

    #[test]
    fn basic_values() {
        let v = spf_closed(&sl2(3)).unwrap();
        assert_eq!(v.value, WeilElement::constant(0, Q::new(1.into(), 3.into())));
        assert_eq!(v.stratum, (2, 0));
        let v = spf_closed(&sl2(-3)).unwrap();
        assert_eq!(v.value, WeilElement::constant(0, Q::new((-1).into(), 3.into())));
        assert_eq!(v.stratum, (0, 2));
        let sp = SymplecticSuperSpace::new(0, 2).unwrap();
        let x = SuperMatrix::<Q>::block_diag(sp, WeilMatrix::zeros(0, 0, 0), WeilMatrix::from_i64(2, 2, 0, &[0, -5, 5, 0])).unwrap();
        assert_eq!(spf_closed(&x).unwrap().value, WeilElement::from_i64(0, 5));
        assert!(matches!(spf_closed(&sl2(0)), Err(Error::StratumBoundary(_))));
    }

    #[test]
    fn mixed_stratum_needs_i() {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        let a = WeilMatrix::<Q>::from_i64(2, 2, 0, &[3, 0, 0, -3]);
        let x = SuperMatrix::block_diag(sp, a, WeilMatrix::zeros(0, 0, 0)).unwrap();
        assert!(matches!(spf_closed(&x), Err(Error::Inexact(_))));
        let xg = x.map_ring(|e| e.to_ring::<GaussRational>()).unwrap();
        let v = spf_closed(&xg).unwrap();
        assert_eq!(v.stratum, (1, 1));
        assert_eq!(v.value.body(), GaussRational::new(Q::from_i64(0), Q::new(1.into(), 3.into())));
    }

    #[test]
    fn complex_continuation_small_t() {
        let sp = SymplecticSuperSpace::new(2, 0).unwrap();
        for t in [0.0, 0.3, 2.0, 40.0] {
            let z = Complex64::new(1.0, t);
            let a = WeilMatrix::from_scalars(2, 2, 0, &[Complex64::new(0.0, 0.0), -z, z, Complex64::new(0.0, 0.0)]);
            let x = SuperMatrix::block_diag(sp, a, WeilMatrix::zeros(0, 0, 0)).unwrap();
            let v = spf_complex(&x).unwrap().value.body();
            assert!((v - 1.0 / z).norm() < 1e-14, "t={t}: {v}");
        }
    }
}
