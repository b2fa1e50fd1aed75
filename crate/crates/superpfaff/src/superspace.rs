//! Symplectic supervector spaces, super polynomials on them, the moment map and the
//! Poisson bracket.
//!
//! A [`SuperPolynomial`] in even coordinates `x¹…xᵐ` and odd coordinates `ξ¹…ξⁿ` with Weil
//! coefficients is stored as a map from the even exponent `I` to an element of
//! `Λ(ξ¹…ξⁿ, θ₁…θ_N)`, with the `ξ` as the lowest generators. A blade `ξ^J θ^W` therefore reads
//! as the monomial `ξ^J` with coefficient `θ^W` written to its right.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::superlinalg::SuperMatrix;
use crate::weil::{blade_product_negative, Scalar, WeilElement, MAX_GENERATORS};
use crate::{Error, Result};

/// `V = V₀ ⊕ V₁` with `dim V₀ = m` (even), `dim V₁ = n`, the standard symplectic Gram on `V₀`
/// and the identity Gram on `V₁` in its complexified orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticSuperSpace {
    m: usize,
    n: usize,
    odd_signature: (usize, usize),
    orientation: i8,
}

impl SymplecticSuperSpace {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::with_signature(m, n, (n, 0), 1)
    }

    pub fn with_signature(m: usize, n: usize, odd_signature: (usize, usize), orientation: i8) -> Result<Self> {
        if !m.is_multiple_of(2) {
            return Err(Error::Structure(format!("even dimension must be even, got m = {m}")));
        }
        if odd_signature.0 + odd_signature.1 != n {
            return Err(Error::Structure(format!(
                "odd signature {odd_signature:?} does not add up to n = {n}"
            )));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::Structure(format!("orientation must be ±1, got {orientation}")));
        }
        Ok(SymplecticSuperSpace { m, n, odd_signature, orientation })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn odd_signature(&self) -> (usize, usize) {
        self.odd_signature
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// The same space with the opposite orientation of `V₁`.
    pub fn flipped(&self) -> Self {
        SymplecticSuperSpace { orientation: -self.orientation, ..*self }
    }

    /// Entry `J_ab` of the even Gram matrix.
    pub fn gram_even(&self, a: usize, b: usize) -> i64 {
        gram_even(a, b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "n": self.n,
            "odd_signature": [self.odd_signature.0, self.odd_signature.1],
            "orientation": self.orientation,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("space needs integer \"{k}\"")))
        };
        let (m, n) = (get("m")?, get("n")?);
        let sig = match v.get("odd_signature") {
            Some(Value::Array(a)) if a.len() == 2 => {
                let p = a[0].as_u64().ok_or_else(|| Error::Parse("bad odd_signature".into()))?;
                let q = a[1].as_u64().ok_or_else(|| Error::Parse("bad odd_signature".into()))?;
                (p as usize, q as usize)
            }
            None => (n, 0),
            Some(_) => return Err(Error::Parse("odd_signature must be [p, q]".into())),
        };
        let orientation = match v.get("orientation") {
            None => 1,
            Some(o) => o.as_i64().ok_or_else(|| Error::Parse("orientation must be ±1".into()))? as i8,
        };
        Self::with_signature(m, n, sig, orientation)
    }
}

/// `J₂ ⊕ ⋯ ⊕ J₂` with `J₂ = [[0,1],[−1,0]]`.
pub fn gram_even(a: usize, b: usize) -> i64 {
    if a / 2 != b / 2 || a == b {
        0
    } else if a.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Multi-index `(I, J)` labelling the monomial `ξ^J x^I`; `J` is a bitmask over `n` odd slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndexPair {
    pub i: Vec<u32>,
    pub j: u64,
    pub n: usize,
}

impl MultiIndexPair {
    pub fn new(i: Vec<u32>, j: &[u8]) -> Self {
        let mask = j.iter().enumerate().fold(0u64, |acc, (k, &b)| acc | ((b as u64 & 1) << k));
        MultiIndexPair { i, j: mask, n: j.len() }
    }

    pub fn from_mask(i: Vec<u32>, j: u64, n: usize) -> Self {
        MultiIndexPair { i, j, n }
    }

    pub fn i_len(&self) -> u32 {
        self.i.iter().sum()
    }

    pub fn j_len(&self) -> u32 {
        self.j.count_ones()
    }

    /// `J′`, the complement of `J` in `{1..n}`.
    pub fn j_complement(&self) -> u64 {
        full_mask(self.n) & !self.j
    }
}

pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `ε(J, J′)` defined by `ε(J, J′) ξ^J ξ^{J′} = ξ¹⋯ξⁿ`.
pub fn eps_sign(j: u64, n: usize) -> i32 {
    let jc = full_mask(n) & !j;
    if blade_product_negative(j, jc) {
        -1
    } else {
        1
    }
}

/// Polynomial in commuting `x` and anticommuting `ξ` with Weil coefficients on the right.
#[derive(Clone, PartialEq)]
pub struct SuperPolynomial<S> {
    m: usize,
    n: usize,
    n_weil: u32,
    terms: BTreeMap<Vec<u32>, WeilElement<S>>,
}

impl<S: Scalar> SuperPolynomial<S> {
    pub fn zero(m: usize, n: usize, n_weil: u32) -> Self {
        assert!(n as u32 + n_weil <= MAX_GENERATORS, "too many odd generators");
        SuperPolynomial { m, n, n_weil, terms: BTreeMap::new() }
    }

    pub fn for_space(space: &SymplecticSuperSpace, n_weil: u32) -> Self {
        Self::zero(space.m(), space.n(), n_weil)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_weil(&self) -> u32 {
        self.n_weil
    }

    fn n_big(&self) -> u32 {
        self.n as u32 + self.n_weil
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.m, self.n, self.n_weil) != (other.m, other.n, other.n_weil) {
            return Err(Error::Structure(format!(
                "polynomial shapes differ: (m,n,N) = {:?} vs {:?}",
                (self.m, self.n, self.n_weil),
                (other.m, other.n, other.n_weil)
            )));
        }
        Ok(())
    }

    fn insert(&mut self, i: Vec<u32>, w: WeilElement<S>) {
        if w.is_zero() {
            return;
        }
        match self.terms.remove(&i) {
            Some(old) => {
                let sum = &old + &w;
                if !sum.is_zero() {
                    self.terms.insert(i, sum);
                }
            }
            None => {
                self.terms.insert(i, w);
            }
        }
    }

    /// The Weil constant `c` (over `N` generators) as a polynomial.
    pub fn constant(m: usize, n: usize, c: &WeilElement<S>) -> Result<Self> {
        let mut out = Self::zero(m, n, c.n_gen());
        out.insert(vec![0; m], c.embed(n as u32, out.n_big())?);
        Ok(out)
    }

    pub fn scalar(m: usize, n: usize, n_weil: u32, c: S) -> Self {
        let mut out = Self::zero(m, n, n_weil);
        out.insert(vec![0; m], WeilElement::constant(out.n_big(), c));
        out
    }

    pub fn one(m: usize, n: usize, n_weil: u32) -> Self {
        Self::scalar(m, n, n_weil, S::one())
    }

    /// The even coordinate `x^{a+1}`.
    pub fn x(m: usize, n: usize, n_weil: u32, a: usize) -> Self {
        assert!(a < m);
        let mut out = Self::zero(m, n, n_weil);
        let mut i = vec![0; m];
        i[a] = 1;
        out.insert(i, WeilElement::one(out.n_big()));
        out
    }

    /// The odd coordinate `ξ^{k+1}`.
    pub fn xi(m: usize, n: usize, n_weil: u32, k: usize) -> Self {
        assert!(k < n);
        let mut out = Self::zero(m, n, n_weil);
        out.insert(vec![0; m], WeilElement::generator(out.n_big(), k as u32));
        out
    }

    /// `ξ^J x^I · c` with `c` over `N` generators.
    pub fn monomial(m: usize, n: usize, idx: &MultiIndexPair, c: &WeilElement<S>) -> Result<Self> {
        if idx.i.len() != m || idx.n != n {
            return Err(Error::Structure("multi-index does not match (m, n)".into()));
        }
        let mut out = Self::zero(m, n, c.n_gen());
        let xi_j = WeilElement::blade(out.n_big(), idx.j, S::one());
        out.insert(idx.i.clone(), &xi_j * &c.embed(n as u32, out.n_big())?);
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient `c` of `ξ^J x^I` in the expansion `Σ ξ^J x^I c`.
    pub fn coefficient(&self, idx: &MultiIndexPair) -> WeilElement<S> {
        let low = full_mask(self.n);
        let mut out = Vec::new();
        if let Some(w) = self.terms.get(&idx.i) {
            for (mask, c) in w.terms() {
                if mask & low == idx.j {
                    out.push((mask >> self.n, c.clone()));
                }
            }
        }
        WeilElement::from_terms(self.n_weil, out).expect("shifted blades fit")
    }

    /// All nonzero `(I, J) ↦ c` entries, `I` lexicographic then `J` by mask value.
    pub fn terms(&self) -> Vec<(MultiIndexPair, WeilElement<S>)> {
        let low = full_mask(self.n);
        let mut out = Vec::new();
        for (i, w) in &self.terms {
            let mut by_j: BTreeMap<u64, Vec<(u64, S)>> = BTreeMap::new();
            for (mask, c) in w.terms() {
                by_j.entry(mask & low).or_default().push((mask >> self.n, c.clone()));
            }
            for (j, ts) in by_j {
                let c = WeilElement::from_terms(self.n_weil, ts).expect("shifted blades fit");
                out.push((MultiIndexPair::from_mask(i.clone(), j, self.n), c));
            }
        }
        out
    }

    /// Raw storage: even exponent to coefficient in `Λ(ξ, θ)`.
    pub fn raw_terms(&self) -> &BTreeMap<Vec<u32>, WeilElement<S>> {
        &self.terms
    }

    pub(crate) fn from_raw(m: usize, n: usize, n_weil: u32, raw: impl IntoIterator<Item = (Vec<u32>, WeilElement<S>)>) -> Self {
        let mut out = Self::zero(m, n, n_weil);
        for (i, w) in raw {
            debug_assert_eq!(w.n_gen(), out.n_big());
            out.insert(i, w);
        }
        out
    }

    pub fn max_x_degree(&self) -> u32 {
        self.terms.keys().map(|i| i.iter().sum()).max().unwrap_or(0)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let mut out = self.clone();
        for (i, w) in &rhs.terms {
            out.insert(i.clone(), w.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&-rhs)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        let mut out = Self::zero(self.m, self.n, self.n_weil);
        for (i1, w1) in &self.terms {
            for (i2, w2) in &rhs.terms {
                let i: Vec<u32> = i1.iter().zip(i2).map(|(a, b)| a + b).collect();
                out.insert(i, w1 * w2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        let raw = self.terms.iter().map(|(i, w)| (i.clone(), w.scale(c)));
        Self::from_raw(self.m, self.n, self.n_weil, raw)
    }

    /// Multiplies every coefficient on the right by the Weil element `c`.
    pub fn mul_weil(&self, c: &WeilElement<S>) -> Result<Self> {
        self.try_mul(&Self::constant(self.m, self.n, c)?)
    }

    /// `exp(P)` for `P` whose every term carries a Grassmann generator (so `P` is nilpotent).
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if self.terms.values().any(|w| !w.body().is_zero()) {
            return Err(Error::Domain("exp of a polynomial with a non-nilpotent part".into()));
        }
        let mut out = Self::one(self.m, self.n, self.n_weil);
        let mut power = out.clone();
        for k in 1.. {
            power = power.try_mul(self)?.scale(&(S::one() / S::from_i64(k)));
            if power.is_zero() {
                break;
            }
            out = out.try_add(&power)?;
        }
        Ok(out)
    }

    /// `∂/∂x^{a+1}`.
    pub fn d_x(&self, a: usize) -> Self {
        let raw = self.terms.iter().filter(|(i, _)| i[a] > 0).map(|(i, w)| {
            let mut j = i.clone();
            j[a] -= 1;
            (j, w.scale(&S::from_i64(i[a] as i64)))
        });
        Self::from_raw(self.m, self.n, self.n_weil, raw)
    }

    fn odd_derivative(&self, k: usize, left: bool) -> Self {
        let bit = 1u64 << k;
        let raw = self.terms.iter().map(|(i, w)| {
            let ts = w.terms().iter().filter(|(mask, _)| mask & bit != 0).map(|(mask, c)| {
                let passed = if left { mask & (bit - 1) } else { mask >> (k + 1) };
                let c = if passed.count_ones() % 2 == 1 { -c.clone() } else { c.clone() };
                (mask & !bit, c)
            });
            (i.clone(), WeilElement::from_terms(self.n_big(), ts.collect::<Vec<_>>()).expect("fits"))
        });
        Self::from_raw(self.m, self.n, self.n_weil, raw)
    }

    /// Left derivative `∂⃗/∂ξ^{k+1}` (the generator is brought to the front).
    pub fn d_xi_left(&self, k: usize) -> Self {
        self.odd_derivative(k, true)
    }

    /// Right derivative `P ∂⃖/∂ξ^{k+1}` (the generator is brought to the back, past Weil factors).
    pub fn d_xi_right(&self, k: usize) -> Self {
        self.odd_derivative(k, false)
    }

    /// Algebra morphism `x^a ↦ xs[a]`, `ξ^k ↦ xis[k]`, fixing Weil coefficients.
    pub fn substitute(&self, xs: &[Self], xis: &[Self]) -> Result<Self> {
        if xs.len() != self.m || xis.len() != self.n {
            return Err(Error::Structure("substitution needs m even and n odd images".into()));
        }
        let target = xs.first().or(xis.first()).cloned().unwrap_or_else(|| self.clone());
        let (tm, tn) = (target.m, target.n);
        if target.n_weil != self.n_weil || xs.iter().chain(xis).any(|p| (p.m, p.n, p.n_weil) != (tm, tn, self.n_weil)) {
            return Err(Error::Structure("substitution images must share one shape and N".into()));
        }
        let mut out = Self::zero(tm, tn, self.n_weil);
        let low = full_mask(self.n);
        for (i, w) in &self.terms {
            let mut xpart = Self::one(tm, tn, self.n_weil);
            for (a, &e) in i.iter().enumerate() {
                for _ in 0..e {
                    xpart = xpart.try_mul(&xs[a])?;
                }
            }
            let mut by_j: BTreeMap<u64, Vec<(u64, S)>> = BTreeMap::new();
            for (mask, c) in w.terms() {
                by_j.entry(mask & low).or_default().push((mask >> self.n, c.clone()));
            }
            for (j, ts) in by_j {
                let mut term = xpart.clone();
                for (k, img) in xis.iter().enumerate() {
                    if j >> k & 1 == 1 {
                        term = term.try_mul(img)?;
                    }
                }
                let c = WeilElement::from_terms(self.n_weil, ts)?;
                term = term.try_mul(&Self::constant(tm, tn, &c)?)?;
                out = out.try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// Value at a Weil point `v = (x-values, ξ-values)`; the result is a Weil element.
    pub fn evaluate(&self, v: &[WeilElement<S>]) -> Result<WeilElement<S>> {
        if v.len() != self.m + self.n {
            return Err(Error::Structure("point has the wrong dimension".into()));
        }
        let imgs = v
            .iter()
            .map(|c| Self::constant(0, 0, c))
            .collect::<Result<Vec<_>>>()?;
        let p = self.substitute(&imgs[..self.m], &imgs[self.m..])?;
        Ok(p.coefficient(&MultiIndexPair::from_mask(vec![], 0, 0)))
    }
}

impl<S: Scalar> fmt::Debug for SuperPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (idx, c)) in self.terms().iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let xi: String = (0..self.n).filter(|b| idx.j >> b & 1 == 1).map(|b| format!("ξ{}", b + 1)).collect();
            let x: String = idx
                .i
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(a, e)| if *e == 1 { format!("x{}", a + 1) } else { format!("x{}^{}", a + 1, e) })
                .collect();
            write!(f, "{xi}{x}[{c}]")?;
        }
        Ok(())
    }
}

impl<S: Scalar> std::ops::Neg for &SuperPolynomial<S> {
    type Output = SuperPolynomial<S>;
    fn neg(self) -> SuperPolynomial<S> {
        self.scale(&-S::one())
    }
}

macro_rules! poly_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl<S: Scalar> std::ops::$trait<&SuperPolynomial<S>> for &SuperPolynomial<S> {
            type Output = SuperPolynomial<S>;
            /// Panics on mismatched shapes; use the `try_` form to get an error.
            fn $method(self, rhs: &SuperPolynomial<S>) -> SuperPolynomial<S> {
                match self.$inner(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);

/// Minimal ring interface shared by Weil elements and super polynomials, so the bilinear
/// form and the moment map are written once.
pub trait RingLike: Clone {
    fn r_add(&self, o: &Self) -> Self;
    fn r_sub(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
}

impl<S: Scalar> RingLike for WeilElement<S> {
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl<S: Scalar> RingLike for SuperPolynomial<S> {
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// `B(v, w) = Σ_i (v₂ᵢ w₂ᵢ₊₁ − v₂ᵢ₊₁ w₂ᵢ) − Σ_k v₁ᵏ w₁ᵏ` on coordinate columns.
pub fn bilinear_b<R: RingLike>(m: usize, v: &[R], w: &[R], zero: &R) -> R {
    let mut acc = zero.clone();
    for i in (0..m).step_by(2) {
        acc = acc.r_add(&v[i].r_mul(&w[i + 1])).r_sub(&v[i + 1].r_mul(&w[i]));
    }
    for k in m..v.len() {
        acc = acc.r_sub(&v[k].r_mul(&w[k]));
    }
    acc
}

fn apply_matrix<R: RingLike>(x: &[Vec<R>], v: &[R], zero: &R) -> Vec<R> {
    x.iter()
        .map(|row| row.iter().zip(v).fold(zero.clone(), |acc, (a, b)| acc.r_add(&a.r_mul(b))))
        .collect()
}

/// `μ(X, v) = −½ B(v, Xv)` at a Weil point `v` of `V`.
pub fn moment<S: Scalar>(x: &SuperMatrix<S>, v: &[WeilElement<S>]) -> Result<WeilElement<S>> {
    x.check_parity()?;
    let (m, n) = (x.space().m(), x.space().n());
    if v.len() != m + n {
        return Err(Error::Structure(format!("point has {} coordinates, expected {}", v.len(), m + n)));
    }
    for (k, c) in v.iter().enumerate() {
        let ok = if k < m { c.is_even() } else { c.is_odd() };
        if !ok {
            return Err(Error::Parity(format!("coordinate {} of the point has the wrong parity", k + 1)));
        }
        if c.n_gen() != x.n_gen() {
            return Err(Error::Structure("point and matrix use different Weil algebras".into()));
        }
    }
    let zero = WeilElement::zero(x.n_gen());
    let full = x.full_rows();
    let xv = apply_matrix(&full, v, &zero);
    Ok(bilinear_b(m, v, &xv, &zero).scale(&S::from_ratio(-1, 2)))
}

/// The moment map at the generic point `v = Σ g_i z^i`, as a super polynomial.
pub fn moment_polynomial<S: Scalar>(x: &SuperMatrix<S>) -> Result<SuperPolynomial<S>> {
    x.check_parity()?;
    let (m, n, nw) = (x.space().m(), x.space().n(), x.n_gen());
    let mut v = Vec::with_capacity(m + n);
    v.extend((0..m).map(|a| SuperPolynomial::x(m, n, nw, a)));
    v.extend((0..n).map(|k| SuperPolynomial::xi(m, n, nw, k)));
    let full: Vec<Vec<SuperPolynomial<S>>> = x
        .full_rows()
        .iter()
        .map(|row| row.iter().map(|c| SuperPolynomial::constant(m, n, c)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let zero = SuperPolynomial::zero(m, n, nw);
    let xv = apply_matrix(&full, &v, &zero);
    Ok(bilinear_b(m, &v, &xv, &zero).scale(&S::from_ratio(-1, 2)))
}

/// Poisson bracket `{P, Q} = Σ ∂ₐP J_ab ∂_bQ + Σ_k (P∂⃖_k)(∂⃗_k Q)`, the biderivation extending
/// `{f, g} = B(v_f, v_g)` on linear forms (so `{x¹, x²} = 1` and `{ξᵏ, ξˡ} = δ_kl`).
pub fn poisson_bracket<S: Scalar>(p: &SuperPolynomial<S>, q: &SuperPolynomial<S>) -> Result<SuperPolynomial<S>> {
    p.same_shape(q)?;
    let mut out = SuperPolynomial::zero(p.m, p.n, p.n_weil);
    for i in (0..p.m).step_by(2) {
        out = out.try_add(&p.d_x(i).try_mul(&q.d_x(i + 1))?)?;
        out = out.try_sub(&p.d_x(i + 1).try_mul(&q.d_x(i))?)?;
    }
    for k in 0..p.n {
        out = out.try_add(&p.d_xi_right(k).try_mul(&q.d_xi_left(k))?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::Rational;

    type Q = Rational;
    type P = SuperPolynomial<Q>;

    #[test]
    fn eps_sign_examples() {
        let m = |bits: &[u8]| MultiIndexPair::new(vec![], bits).j;
        assert_eq!(eps_sign(m(&[1, 1, 0, 0]), 4), 1);
        assert_eq!(eps_sign(m(&[0, 1, 1, 0]), 4), 1);
        assert_eq!(eps_sign(m(&[0, 1, 0, 1]), 4), -1);
    }

    /// Oracle: inversion count of the concatenated index sequence (J ascending, then J′).
    fn eps_by_inversions(j: u64, n: usize) -> i32 {
        let mut seq: Vec<usize> = (0..n).filter(|k| j >> k & 1 == 1).collect();
        seq.extend((0..n).filter(|k| j >> k & 1 == 0));
        let inv = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| seq[a] > seq[b]).count();
        if inv % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn eps_sign_exhaustive() {
        for n in 0..=8 {
            for j in 0..1u64 << n {
                assert_eq!(eps_sign(j, n), eps_by_inversions(j, n));
                let jc = full_mask(n) & !j;
                let swapped = if blade_product_negative(jc, j) { -1 } else { 1 };
                let expect = if (j.count_ones() * jc.count_ones()).is_multiple_of(2) { 1 } else { -1 };
                assert_eq!(eps_sign(j, n) * swapped, expect);
            }
        }
    }

    #[test]
    fn x_y_bracket_is_one() {
        let (x, y) = (P::x(2, 0, 0, 0), P::x(2, 0, 0, 1));
        assert_eq!(poisson_bracket(&x, &y).unwrap(), P::one(2, 0, 0));
        assert_eq!(poisson_bracket(&y, &x).unwrap(), -&P::one(2, 0, 0));
        let xi = P::xi(0, 2, 0, 0);
        let eta = P::xi(0, 2, 0, 1);
        assert_eq!(poisson_bracket(&xi, &xi).unwrap(), P::one(0, 2, 0));
        assert!(poisson_bracket(&xi, &eta).unwrap().is_zero());
    }

    #[test]
    fn koszul_sign_matches_blade_product() {
        let (m, n, nw) = (1, 6, 2);
        for j1 in 0..1u64 << n {
            for j2 in [0b000011u64, 0b101000, 0b010110, 0b111111] {
                let a = P::monomial(m, n, &MultiIndexPair::from_mask(vec![1], j1, n), &WeilElement::generator(nw, 0)).unwrap();
                let b = P::monomial(m, n, &MultiIndexPair::from_mask(vec![2], j2, n), &WeilElement::generator(nw, 1)).unwrap();
                let prod = &a * &b;
                // ξ^{j1} θ₁ ξ^{j2} θ₂ = (−1)^{|j2|} ξ^{j1} ξ^{j2} θ₁θ₂
                let expect = if j1 & j2 != 0 {
                    P::zero(m, n, nw)
                } else {
                    let mut s = 1;
                    if blade_product_negative(j1, j2) {
                        s = -s;
                    }
                    if j2.count_ones() % 2 == 1 {
                        s = -s;
                    }
                    let c = WeilElement::blade(nw, 0b11, Q::from_i64(s));
                    P::monomial(m, n, &MultiIndexPair::from_mask(vec![3], j1 | j2, n), &c).unwrap()
                };
                assert_eq!(prod, expect, "j1={j1:b} j2={j2:b}");
            }
        }
    }

    #[test]
    fn odd_derivatives_on_a_blade() {
        // ξ1 ξ2 θ1: left ∂/∂ξ2 = −ξ1 θ1, right ∂/∂ξ2 = −ξ1 θ1 (passes θ1), right ∂/∂ξ1 = ξ2 θ1.
        let (n, nw) = (2, 1);
        let th = WeilElement::<Q>::generator(nw, 0);
        let p = P::monomial(0, n, &MultiIndexPair::new(vec![], &[1, 1]), &th).unwrap();
        let xi1 = P::monomial(0, n, &MultiIndexPair::new(vec![], &[1, 0]), &th).unwrap();
        let xi2 = P::monomial(0, n, &MultiIndexPair::new(vec![], &[0, 1]), &th).unwrap();
        assert_eq!(p.d_xi_left(1), -&xi1);
        assert_eq!(p.d_xi_right(1), -&xi1);
        assert_eq!(p.d_xi_left(0), xi2.clone());
        assert_eq!(p.d_xi_right(0), xi2);
    }

    #[test]
    fn space_json_and_validation() {
        let s = SymplecticSuperSpace::with_signature(2, 2, (1, 1), -1).unwrap();
        assert_eq!(SymplecticSuperSpace::from_json(&s.to_json()).unwrap(), s);
        assert!(SymplecticSuperSpace::new(3, 2).is_err());
    }
}
