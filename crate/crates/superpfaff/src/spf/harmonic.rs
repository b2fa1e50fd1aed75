//! The Laplacian `□_K` of the supertrace form, applied to `Spf` through Weil 2-jets.
//!
//! Second derivatives along `E, E′` are read off as the `ε ε′` coefficient of
//! `Spf(X + εE + ε′E′)` with `ε = θ₁θ₂`, `ε′ = θ₃θ₄`; odd directions use two odd generators.

use num_complex::Complex64;

use super::spf_closed;
use crate::superlinalg::{even_inverse, SuperMatrix, WeilMatrix};
use crate::superspace::SymplecticSuperSpace;
use crate::weil::WeilElement;
use crate::{Error, Result};

type C = Complex64;
type W = WeilElement<C>;
type M = WeilMatrix<C>;

/// Even and odd contributions to `□_K Spf(X)` and the normalized residual.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicReport {
    pub even: C,
    pub odd: C,
    /// `|even + odd|` over the sum of the magnitudes of all second-derivative terms.
    pub residual: f64,
    pub stratum: (usize, usize),
}

fn unit(rows: usize, cols: usize, i: usize, j: usize) -> M {
    let mut out = M::zeros(rows, cols, 0);
    out.set(i, j, W::one(0));
    out
}

/// Structured basis of the even part: `−J(E_ab + E_ba)` in `sp(m)` and `E_kl − E_lk` in `so(n)`.
fn even_basis(space: SymplecticSuperSpace) -> Result<Vec<SuperMatrix<C>>> {
    let (m, n) = (space.m(), space.n());
    let mut out = Vec::new();
    for a in 0..m {
        for b in a..m {
            let s = unit(m, m, a, b).try_add(&unit(m, m, b, a))?;
            out.push(SuperMatrix::block_diag(space, s.j_left().neg(), M::zeros(n, n, 0))?);
        }
    }
    for k in 0..n {
        for l in k + 1..n {
            let d = unit(n, n, k, l).try_sub(&unit(n, n, l, k))?;
            out.push(SuperMatrix::block_diag(space, M::zeros(m, m, 0), d)?);
        }
    }
    Ok(out)
}

/// Odd basis elements as `(B, C)` pairs with `B = E_ak` and `C = BᵀJ`.
fn odd_basis(space: SymplecticSuperSpace) -> Vec<(M, M)> {
    let (m, n) = (space.m(), space.n());
    let mut out = Vec::new();
    for a in 0..m {
        for k in 0..n {
            let b = unit(m, n, a, k);
            let c = b.transpose().j_right();
            out.push((b, c));
        }
    }
    out
}

fn trace(m: &M) -> C {
    (0..m.rows()).map(|i| m.get(i, i).body()).sum()
}

fn inverse(g: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let r = g.len();
    let flat: Vec<C> = g.iter().flatten().copied().collect();
    let inv = even_inverse(&M::from_scalars(r, r, 0, &flat))
        .map_err(|_| Error::Structure("supertrace form is degenerate on the chosen basis".into()))?;
    Ok(inv.body())
}

fn lift(x: &SuperMatrix<C>, nw: u32) -> Result<SuperMatrix<C>> {
    x.embed(0, nw)
}

/// `body(E) ⊗ blade` as a matrix over `Λ(ℝ^nw)`.
fn tensor(e: &M, nw: u32, blade: u64) -> M {
    let mut out = M::zeros(e.rows(), e.cols(), nw);
    for (i, j, v) in e.entries() {
        if !v.is_zero() {
            out.set(i, j, W::blade(nw, blade, v.body()));
        }
    }
    out
}

fn even_jet(space: SymplecticSuperSpace, e: &SuperMatrix<C>, blade: u64) -> Result<SuperMatrix<C>> {
    let (m, n) = (space.m(), space.n());
    SuperMatrix::new(space, tensor(e.a(), 4, blade), M::zeros(m, n, 4), M::zeros(n, m, 4), tensor(e.d(), 4, blade))
}

/// The Weil point of `spo` attached to the odd element `(B, C)` and odd generator `θ`:
/// blocks `−Bθ` and `Cθ`.
fn odd_jet(space: SymplecticSuperSpace, f: &(M, M), blade: u64) -> Result<SuperMatrix<C>> {
    let (m, n) = (space.m(), space.n());
    let p = SuperMatrix::new(space, M::zeros(m, m, 2), tensor(&f.0, 2, blade).neg(), tensor(&f.1, 2, blade), M::zeros(n, n, 2))?;
    if !p.is_spo() {
        return Err(Error::Structure("odd jet direction is not in spo".into()));
    }
    Ok(p)
}

/// `□_K Spf(X)` at a scalar point `X` of the analytic stratum.
pub fn harmonicity_check(x: &SuperMatrix<C>) -> Result<HarmonicReport> {
    if x.n_gen() != 0 {
        return Err(Error::Structure("harmonicity is checked at scalar points".into()));
    }
    let space = *x.space();
    let stratum = spf_closed(x)?.stratum;

    let basis = even_basis(space)?;
    let gram: Vec<Vec<C>> = basis
        .iter()
        .map(|ei| basis.iter().map(|ej| ei.try_mul(ej).and_then(|p| p.supertrace()).map(|s| s.body())).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let gram_inv = inverse(&gram)?;
    let x4 = lift(x, 4)?;
    let mut even = C::new(0.0, 0.0);
    let mut scale = 0.0;
    for (i, ei) in basis.iter().enumerate() {
        let xi = x4.try_add(&even_jet(space, ei, 0b0011)?)?;
        for (j, ej) in basis.iter().enumerate() {
            if gram_inv[j][i] == C::new(0.0, 0.0) {
                continue;
            }
            let pt = xi.try_add(&even_jet(space, ej, 0b1100)?)?;
            let h = spf_closed(&pt)?.value.coefficient(0b1111);
            let term = gram_inv[j][i] * h;
            even += term;
            scale += term.norm();
        }
    }

    let fs = odd_basis(space);
    let mut odd = C::new(0.0, 0.0);
    if !fs.is_empty() {
        // L_kl = str(F_k F_l) = tr(B_k C_l) − tr(C_k B_l).
        let l: Vec<Vec<C>> = fs
            .iter()
            .map(|fk| {
                fs.iter()
                    .map(|fl| Ok(trace(&fk.0.try_mul(&fl.1)?) - trace(&fk.1.try_mul(&fl.0)?)))
                    .collect::<Result<Vec<C>>>()
            })
            .collect::<Result<_>>()?;
        let l_inv = inverse(&l)?;
        let x2 = lift(x, 2)?;
        for (k, fk) in fs.iter().enumerate() {
            let xk = x2.try_add(&odd_jet(space, fk, 0b01)?)?;
            for (li, fl) in fs.iter().enumerate() {
                if l_inv[li][k] == C::new(0.0, 0.0) {
                    continue;
                }
                let pt = xk.try_add(&odd_jet(space, fl, 0b10)?)?;
                let h = spf_closed(&pt)?.value.coefficient(0b11);
                let term = l_inv[li][k] * h;
                odd += term;
                scale += term.norm();
            }
        }
    }
    let total = (even + odd).norm();
    let residual = if scale > 0.0 { total / scale } else { total };
    Ok(HarmonicReport { even, odd, residual, stratum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{point_rng, random_spo, SoulDensity, SpoOptions};

    fn scalar_point(seed: u64, m: usize, n: usize, stratum: (usize, usize)) -> SuperMatrix<C> {
        let sp = SymplecticSuperSpace::new(m, n).unwrap();
        let opts = SpoOptions { stratum: Some(stratum), invertible_d: false, density: SoulDensity::NONE };
        random_spo(&mut point_rng(seed, 0), sp, 0, opts).map_ring(|e| e.to_ring::<C>()).unwrap()
    }

    #[test]
    fn sl2_is_harmonic() {
        for seed in 0..5 {
            for st in [(2, 0), (1, 1), (0, 2)] {
                let r = harmonicity_check(&scalar_point(seed, 2, 0, st)).unwrap();
                assert!(r.residual < 1e-10, "{st:?}: {r:?}");
            }
        }
    }

    #[test]
    fn odd_only_is_linear() {
        let r = harmonicity_check(&scalar_point(1, 0, 2, (0, 0))).unwrap();
        assert_eq!(r.even, C::new(0.0, 0.0));
    }

    #[test]
    fn super_cases_are_harmonic() {
        for seed in 0..4 {
            for (m, n, st) in [(2, 2, (2, 0)), (2, 2, (1, 1)), (4, 2, (3, 1)), (4, 2, (4, 0))] {
                let r = harmonicity_check(&scalar_point(seed, m, n, st)).unwrap();
                assert!(r.residual < 1e-9, "({m},{n}) {st:?}: {r:?}");
            }
        }
    }
}
