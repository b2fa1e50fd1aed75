//! Deterministic random Weil points for the property suites and the CLI.
//!
//! Every point is drawn from its own ChaCha8 stream: the run seed selects the key and the
//! point index selects the stream, so serial and parallel runs see identical points.
//! Points are built over exact rationals and converted afterwards when a float ring is wanted.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::superlinalg::{even_inverse, SuperMatrix, WeilMatrix};
use crate::superspace::SymplecticSuperSpace;
use crate::weil::{Rational, Scalar, WeilElement};
use crate::Result;

type Q = Rational;
type W = WeilElement<Q>;
type M = WeilMatrix<Q>;

/// The generator for point `index` of a run seeded with `seed`.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How dense the nilpotent parts of generated points are.
#[derive(Debug, Clone, Copy)]
pub struct SoulDensity {
    /// Probability that an entry receives any soul at all.
    pub fill: f64,
    /// Maximum number of blades in one entry's soul.
    pub max_terms: usize,
}

impl Default for SoulDensity {
    fn default() -> Self {
        SoulDensity { fill: 0.5, max_terms: 2 }
    }
}

impl SoulDensity {
    pub const NONE: SoulDensity = SoulDensity { fill: 0.0, max_terms: 0 };
}

fn small_rational(rng: &mut impl Rng) -> Q {
    let num = loop {
        let v = rng.gen_range(-3i64..=3);
        if v != 0 {
            break v;
        }
    };
    let den = if rng.gen_bool(0.25) { 2 } else { 1 };
    Q::new(num.into(), den.into())
}

fn random_blade(rng: &mut impl Rng, n_gen: u32, degree: u32) -> Option<u64> {
    if degree > n_gen {
        return None;
    }
    let mut idx: Vec<u32> = (0..n_gen).collect();
    idx.shuffle(rng);
    Some(idx[..degree as usize].iter().fold(0u64, |m, &i| m | 1 << i))
}

/// A nilpotent Weil element of the given parity (degree 2 or 4 blades if even, 1 or 3 if odd).
pub fn random_soul(rng: &mut impl Rng, n_gen: u32, odd: bool, density: SoulDensity) -> W {
    if density.max_terms == 0 || !rng.gen_bool(density.fill) {
        return W::zero(n_gen);
    }
    let count = rng.gen_range(1..=density.max_terms);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let degree = match (odd, rng.gen_bool(0.8)) {
            (true, true) => 1,
            (true, false) => 3,
            (false, true) => 2,
            (false, false) => 4,
        };
        if let Some(mask) = random_blade(rng, n_gen, degree) {
            terms.push((mask, small_rational(rng)));
        }
    }
    W::from_terms(n_gen, terms).expect("blades fit")
}

/// Symmetric integer matrix `Lᵀ Δ L` with `L` unit upper triangular and `Δ` of signature `(p, q)`.
///
/// The pivots are `±1` or `±4`, so `|det|` is a perfect square and `√|det A|` stays rational.
pub fn random_symmetric_with_signature(rng: &mut impl Rng, p: usize, q: usize) -> Vec<Vec<Q>> {
    let m = p + q;
    let mut signs: Vec<i64> = std::iter::repeat_n(1, p).chain(std::iter::repeat_n(-1, q)).collect();
    signs.shuffle(rng);
    let delta: Vec<i64> = signs.iter().map(|s| s * if rng.gen_bool(0.5) { 1 } else { 4 }).collect();
    let mut l = vec![vec![0i64; m]; m];
    for i in 0..m {
        l[i][i] = 1;
        for j in i + 1..m {
            l[i][j] = rng.gen_range(-2..=2);
        }
    }
    let mut s = vec![vec![<Q as Scalar>::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let v: i64 = (0..m).map(|k| l[k][i] * delta[k] * l[k][j]).sum();
            s[i][j] = Q::from_integer(v.into());
        }
    }
    s
}

/// `A = −J S`, the element of `sp` whose quadratic form `J·A` is `S`.
pub fn sp_from_form(s: &[Vec<Q>], n_gen: u32) -> M {
    let m = s.len();
    let flat: Vec<Q> = s.iter().flatten().cloned().collect();
    M::from_scalars(m, m, n_gen, &flat).j_left().neg()
}

fn soul_matrix(rng: &mut impl Rng, rows: usize, cols: usize, n_gen: u32, odd: bool, density: SoulDensity) -> M {
    let mut out = M::zeros(rows, cols, n_gen);
    for i in 0..rows {
        for j in 0..cols {
            out.set(i, j, random_soul(rng, n_gen, odd, density));
        }
    }
    out
}

fn random_antisymmetric_body(rng: &mut impl Rng, n: usize, n_gen: u32) -> M {
    let mut d = M::zeros(n, n, n_gen);
    for i in 0..n {
        for j in i + 1..n {
            let v = W::from_i64(n_gen, rng.gen_range(-3..=3));
            d.set(i, j, v.clone());
            d.set(j, i, -v);
        }
    }
    d
}

/// Options for [`random_spo`].
#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct SpoOptions {
    /// Signature of the even quadratic form; `None` draws an arbitrary (possibly singular) body.
    pub stratum: Option<(usize, usize)>,
    /// Redraw until the odd-odd body is invertible.
    pub invertible_d: bool,
    pub density: SoulDensity,
}


/// A random point of `spo(V) ⊗ Λ(ℝ^N)`, exact over the rationals.
pub fn random_spo(rng: &mut impl Rng, space: SymplecticSuperSpace, n_gen: u32, opts: SpoOptions) -> SuperMatrix<Q> {
    let (m, n) = (space.m(), space.n());
    let a_body = match opts.stratum {
        Some((p, q)) => sp_from_form(&random_symmetric_with_signature(rng, p, q), n_gen),
        None => {
            let vals: Vec<i64> = (0..m * m).map(|_| rng.gen_range(-3..=3)).collect();
            M::from_i64(m, m, n_gen, &vals)
        }
    };
    let d_body = loop {
        let d = random_antisymmetric_body(rng, n, n_gen);
        if !opts.invertible_d || n % 2 == 1 || n == 0 || pfaffian_body_nonzero(&d) {
            break d;
        }
    };
    let a = a_body.try_add(&soul_matrix(rng, m, m, n_gen, false, opts.density)).expect("shape");
    let d = d_body.try_add(&soul_matrix(rng, n, n, n_gen, false, opts.density)).expect("shape");
    let b = soul_matrix(rng, m, n, n_gen, true, opts.density);
    let c = soul_matrix(rng, n, m, n_gen, true, opts.density);
    SuperMatrix::new(space, a, b, c, d).expect("parities by construction").project_spo()
}

fn pfaffian_body_nonzero(d: &M) -> bool {
    crate::superlinalg::pfaffian(&d.body_matrix()).is_ok_and(|p| !p.body().is_zero())
}

/// Unit lower times unit upper times `diag(±1, ±2, …)`: an integer matrix with known nonzero
/// determinant, redrawn until `‖M‖∞·‖M⁻¹‖∞ ≤ 4` entrywise.
fn random_invertible_body(rng: &mut impl Rng, r: usize, n_gen: u32) -> M {
    loop {
        let mut lower = M::identity(r, n_gen);
        let mut upper = M::identity(r, n_gen);
        for i in 0..r {
            for j in 0..i {
                lower.set(i, j, W::from_i64(n_gen, rng.gen_range(-1..=1)));
                upper.set(j, i, W::from_i64(n_gen, rng.gen_range(-1..=1)));
            }
        }
        let mut diag = M::zeros(r, r, n_gen);
        for i in 0..r {
            let mag = rng.gen_range(1..=2);
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            diag.set(i, i, W::from_i64(n_gen, sign * mag));
        }
        let m = lower.try_mul(&upper).and_then(|lu| lu.try_mul(&diag)).expect("square");
        if even_inverse(&m).is_ok_and(|inv| inv.norm_inf() * m.norm_inf() <= 4.0) {
            return m;
        }
    }
}

/// A random even Weil point of `GL(V)` with invertible body.
pub fn random_gl(rng: &mut impl Rng, space: SymplecticSuperSpace, n_gen: u32, density: SoulDensity) -> SuperMatrix<Q> {
    let (m, n) = (space.m(), space.n());
    let a = random_invertible_body(rng, m, n_gen).try_add(&soul_matrix(rng, m, m, n_gen, false, density)).expect("shape");
    let d = random_invertible_body(rng, n, n_gen).try_add(&soul_matrix(rng, n, n, n_gen, false, density)).expect("shape");
    let b = soul_matrix(rng, m, n, n_gen, true, density);
    let c = soul_matrix(rng, n, m, n_gen, true, density);
    SuperMatrix::new(space, a, b, c, d).expect("parities by construction")
}

/// Cayley transform `(1 − Y)⁻¹(1 + Y)`, which maps `spo` into `SpO` wherever `1 − Y` is invertible.
pub fn cayley<S: Scalar>(y: &SuperMatrix<S>) -> Result<SuperMatrix<S>> {
    let one = SuperMatrix::identity(*y.space(), y.n_gen());
    one.try_sub(y)?.inverse()?.try_mul(&one.try_add(y)?)
}

/// `diag(1, R)` with `R` the reflection of the first odd axis; an `SpO` point with odd determinant −1.
pub fn odd_reflection<S: Scalar>(space: SymplecticSuperSpace, n_gen: u32) -> SuperMatrix<S> {
    let id = SuperMatrix::<S>::identity(space, n_gen);
    if space.n() == 0 {
        return id;
    }
    let mut d = id.d().clone();
    d.set(0, 0, -WeilElement::<S>::one(n_gen));
    SuperMatrix::new(space, id.a().clone(), id.b().clone(), id.c().clone(), d).expect("same parities")
}

/// A random exact point of `SpO(V) ⊗ Λ(ℝ^N)`: a Cayley transform, optionally times an odd reflection.
pub fn random_spo_group(
    rng: &mut impl Rng,
    space: SymplecticSuperSpace,
    n_gen: u32,
    reflect: bool,
    density: SoulDensity,
) -> SuperMatrix<Q> {
    let quarter = Q::new(1.into(), 4.into());
    loop {
        let y = random_spo(rng, space, n_gen, SpoOptions { density, ..Default::default() }).scale(&quarter);
        // Reject near-poles of the Cayley map so float-mode checks stay well conditioned.
        let g = match cayley(&y) {
            Ok(g) if g.blocks().iter().all(|b| b.norm_inf() <= 4.0) => g,
            _ => continue,
        };
        return if reflect { g.try_mul(&odd_reflection(space, n_gen)).expect("shape") } else { g };
    }
}

/// `exp(Y)` by scaling and squaring with a truncated Taylor series.
pub fn exp_supermatrix(y: &SuperMatrix<f64>) -> SuperMatrix<f64> {
    let norm = y.blocks().iter().map(|b| b.norm_inf()).fold(0.0, f64::max) * (y.space().dim().max(1) as f64);
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.5 {
        squarings += 1;
    }
    let scaled = y.scale(&f64::powi(2.0, -squarings));
    let id = SuperMatrix::identity(*y.space(), y.n_gen());
    let mut sum = id.clone();
    let mut term = id;
    for k in 1..=24 {
        term = term.try_mul(&scaled).expect("shape").scale(&(1.0 / k as f64));
        sum = sum.try_add(&term).expect("shape");
    }
    for _ in 0..squarings {
        sum = sum.try_mul(&sum).expect("shape");
    }
    sum
}

/// A random floating point of `SpO(V) ⊗ Λ(ℝ^N)` as `exp(Y)` for random `Y ∈ spo`.
pub fn random_spo_group_float(
    rng: &mut impl Rng,
    space: SymplecticSuperSpace,
    n_gen: u32,
    density: SoulDensity,
) -> SuperMatrix<f64> {
    let y = random_spo(rng, space, n_gen, SpoOptions { density, ..Default::default() });
    let y = y.map_ring(|e| e.to_ring::<f64>()).expect("rationals embed").scale(&0.5);
    exp_supermatrix(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superlinalg::inertia;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = point_rng(7, 3).gen();
        let b: u64 = point_rng(7, 3).gen();
        let c: u64 = point_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stratum_is_respected() {
        for (i, &(p, q)) in [(4, 0), (2, 2), (0, 4), (3, 1)].iter().enumerate() {
            let mut rng = point_rng(1, i as u64);
            let sp = SymplecticSuperSpace::new(4, 2).unwrap();
            let x = random_spo(&mut rng, sp, 6, SpoOptions { stratum: Some((p, q)), ..Default::default() });
            assert!(x.is_spo());
            assert_eq!(inertia(&x.quadratic_form_body()).unwrap(), (p, q));
        }
    }

    #[test]
    fn group_points_satisfy_the_relation() {
        let sp = SymplecticSuperSpace::new(2, 2).unwrap();
        for i in 0..5 {
            let mut rng = point_rng(11, i);
            let g = random_spo_group(&mut rng, sp, 4, i % 2 == 0, SoulDensity::default());
            assert!(g.is_spo_group());
            let h = random_spo_group_float(&mut rng, sp, 4, SoulDensity::default());
            assert!(h.spo_group_defect() < 1e-10, "{}", h.spo_group_defect());
        }
    }
}
