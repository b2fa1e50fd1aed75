//! Grassmann (Weil) algebras `Λ(ℝ^N)` over a pluggable scalar ring.
//!
//! A [`WeilElement`] is a finite sum of blades `c·θ_{i₁}⋯θ_{i_k}` with `i₁ < ⋯ < i_k`.
//! Blades are stored as bitmasks (bit `i` is generator `θ_{i+1}`), sorted by mask value,
//! with no zero coefficients. Generators anticommute, so the product of two blades is
//! zero when they share a generator and otherwise carries the sign of the merge permutation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::{Error, Result};

/// Exact rational scalars.
pub type Rational = BigRational;
/// Exact Gaussian rationals `p + q𝒊`, used where `𝒊` is forced but no irrational root is.
pub type GaussRational = Complex<BigRational>;

/// Which scalar ring a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Rational,
    GaussRational,
    Real,
    Complex,
}

impl ScalarKind {
    pub fn is_exact(self) -> bool {
        matches!(self, ScalarKind::Rational | ScalarKind::GaussRational)
    }
}

/// A commutative scalar field usable as Weil coefficients.
///
/// Complex rings carry the fixed square root `𝒊` of `−1` as their imaginary unit.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex64;
    /// Exact embedding of a Gaussian rational; `None` if the ring is real and `z` is not.
    fn from_gauss(z: &GaussRational) -> Option<Self>;
    /// Nearest representable value; exact rings convert the binary float exactly.
    fn from_c64(z: Complex64) -> Option<Self>;
    /// Sign of a real value, `None` when the value has a nonzero imaginary part.
    fn real_sign(&self) -> Option<Ordering>;
    /// Principal square root, `None` if not representable in the ring.
    fn sqrt(&self) -> Option<Self>;
    /// `exp`, `None` if not representable in the ring.
    fn exp(&self) -> Option<Self>;
    fn imag_unit() -> Option<Self>;
    fn conj(&self) -> Self;
    fn json_parts(&self) -> (Value, Option<Value>);
    fn from_json_parts(re: &Value, im: Option<&Value>) -> Result<Self>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn from_rational(r: &Rational) -> Self {
        Self::from_gauss(&Complex::new(r.clone(), <Rational as Zero>::zero())).expect("real embeds in every ring")
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

fn exact_sqrt_int(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

fn exact_sqrt_rational(r: &Rational) -> Option<Rational> {
    let n = exact_sqrt_int(r.numer())?;
    let d = exact_sqrt_int(r.denom())?;
    Some(Rational::new(n, d))
}

fn rational_to_json(r: &Rational) -> Value {
    let num = match r.numer().to_i64() {
        Some(v) => json!(v),
        None => json!(r.numer().to_string()),
    };
    let den = match r.denom().to_i64() {
        Some(v) => json!(v),
        None => json!(r.denom().to_string()),
    };
    json!({"num": num, "den": den})
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("expected an integer, got {n}"))),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}"))),
        other => Err(Error::Parse(format!("expected an integer, got {other}"))),
    }
}

fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Object(map) => {
            let num = bigint_from_json(map.get("num").ok_or_else(|| Error::Parse("missing \"num\"".into()))?)?;
            let den = bigint_from_json(map.get("den").ok_or_else(|| Error::Parse("missing \"den\"".into()))?)?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Rational::new(num, den))
        }
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(Error::Parse(format!("non-integer {n} in exact mode; use {{\"num\",\"den\"}}"))),
        },
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

fn f64_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::Object(_) => rational_from_json(v)?
            .to_f64()
            .ok_or_else(|| Error::Parse("rational out of range".into())),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_gauss(z: &GaussRational) -> Option<Self> {
        Zero::is_zero(&z.im).then(|| z.re.clone())
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        if z.im != 0.0 {
            return None;
        }
        Rational::from_float(z.re)
    }
    fn real_sign(&self) -> Option<Ordering> {
        Some(self.cmp(&Zero::zero()))
    }
    fn sqrt(&self) -> Option<Self> {
        exact_sqrt_rational(self)
    }
    fn exp(&self) -> Option<Self> {
        Zero::is_zero(self).then(One::one)
    }
    fn imag_unit() -> Option<Self> {
        None
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn json_parts(&self) -> (Value, Option<Value>) {
        (rational_to_json(self), None)
    }
    fn from_json_parts(re: &Value, im: Option<&Value>) -> Result<Self> {
        if let Some(im) = im {
            if !Zero::is_zero(&rational_from_json(im)?) {
                return Err(Error::Parse("imaginary part in a real ring".into()));
            }
        }
        rational_from_json(re)
    }
}

impl Scalar for GaussRational {
    const KIND: ScalarKind = ScalarKind::GaussRational;

    fn zero() -> Self {
        Complex::new(Zero::zero(), Zero::zero())
    }
    fn one() -> Self {
        Complex::new(One::one(), Zero::zero())
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(Rational::from_i64(v), Zero::zero())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn from_gauss(z: &GaussRational) -> Option<Self> {
        Some(z.clone())
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        Some(Complex::new(Rational::from_float(z.re)?, Rational::from_float(z.im)?))
    }
    fn real_sign(&self) -> Option<Ordering> {
        Zero::is_zero(&self.im).then(|| self.re.cmp(&Zero::zero()))
    }
    fn sqrt(&self) -> Option<Self> {
        // p + q𝒊 with p ≥ 0: p² = (a + |z|)/2, q = b/(2p) (or p = 0, q² = −a).
        let (a, b) = (&self.re, &self.im);
        let modulus = exact_sqrt_rational(&(a * a + b * b))?;
        let two = Rational::from_i64(2);
        let p = exact_sqrt_rational(&((a + &modulus) / &two))?;
        if Zero::is_zero(&p) {
            let q = exact_sqrt_rational(&(-a.clone()))?;
            return Some(Complex::new(p, q));
        }
        let q = b / (&two * &p);
        Some(Complex::new(p, q))
    }
    fn exp(&self) -> Option<Self> {
        Scalar::is_zero(self).then(<Self as Scalar>::one)
    }
    fn imag_unit() -> Option<Self> {
        Some(Complex::new(Zero::zero(), One::one()))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn json_parts(&self) -> (Value, Option<Value>) {
        let im = (!Zero::is_zero(&self.im)).then(|| rational_to_json(&self.im));
        (rational_to_json(&self.re), im)
    }
    fn from_json_parts(re: &Value, im: Option<&Value>) -> Result<Self> {
        let im = match im {
            Some(v) => rational_from_json(v)?,
            None => Zero::zero(),
        };
        Ok(Complex::new(rational_from_json(re)?, im))
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn from_gauss(z: &GaussRational) -> Option<Self> {
        Zero::is_zero(&z.im).then(|| z.re.to_f64().unwrap_or(f64::NAN))
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    fn real_sign(&self) -> Option<Ordering> {
        self.partial_cmp(&0.0)
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
    fn imag_unit() -> Option<Self> {
        None
    }
    fn conj(&self) -> Self {
        *self
    }
    fn json_parts(&self) -> (Value, Option<Value>) {
        (json!(self), None)
    }
    fn from_json_parts(re: &Value, im: Option<&Value>) -> Result<Self> {
        if let Some(im) = im {
            if f64_from_json(im)? != 0.0 {
                return Err(Error::Parse("imaginary part in a real ring".into()));
            }
        }
        f64_from_json(re)
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn from_gauss(z: &GaussRational) -> Option<Self> {
        Some(Complex64::new(
            z.re.to_f64().unwrap_or(f64::NAN),
            z.im.to_f64().unwrap_or(f64::NAN),
        ))
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }
    fn real_sign(&self) -> Option<Ordering> {
        if self.im == 0.0 {
            self.re.partial_cmp(&0.0)
        } else {
            None
        }
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Complex64::sqrt(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(Complex64::exp(*self))
    }
    fn imag_unit() -> Option<Self> {
        Some(Complex64::new(0.0, 1.0))
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn json_parts(&self) -> (Value, Option<Value>) {
        let im = (self.im != 0.0).then(|| json!(self.im));
        (json!(self.re), im)
    }
    fn from_json_parts(re: &Value, im: Option<&Value>) -> Result<Self> {
        let im = match im {
            Some(v) => f64_from_json(v)?,
            None => 0.0,
        };
        Ok(Complex64::new(f64_from_json(re)?, im))
    }
}

/// `true` when `θ^a · θ^b = −θ^{a∪b}` for disjoint blades `a`, `b`.
#[inline]
pub fn blade_product_negative(a: u64, b: u64) -> bool {
    let mut a = a >> 1;
    let mut count = 0u32;
    while a != 0 {
        count += (a & b).count_ones();
        a >>= 1;
    }
    count & 1 == 1
}

/// Parity of a homogeneous element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// An element of `Λ(ℝ^N) ⊗ S` in canonical form.
#[derive(Clone, PartialEq)]
pub struct WeilElement<S> {
    n_gen: u32,
    terms: Vec<(u64, S)>,
}

/// Hard cap on the number of generators (one bit each in a `u64` mask).
pub const MAX_GENERATORS: u32 = 64;

impl<S: Scalar> WeilElement<S> {
    pub fn zero(n_gen: u32) -> Self {
        assert!(n_gen <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        WeilElement { n_gen, terms: Vec::new() }
    }

    pub fn one(n_gen: u32) -> Self {
        Self::constant(n_gen, S::one())
    }

    pub fn constant(n_gen: u32, c: S) -> Self {
        Self::blade(n_gen, 0, c)
    }

    pub fn from_i64(n_gen: u32, v: i64) -> Self {
        Self::constant(n_gen, S::from_i64(v))
    }

    /// The generator `θ_{i+1}` (zero-based index `i`).
    pub fn generator(n_gen: u32, i: u32) -> Self {
        assert!(i < n_gen, "generator {i} out of range for N = {n_gen}");
        Self::blade(n_gen, 1 << i, S::one())
    }

    /// `c · θ^mask`.
    pub fn blade(n_gen: u32, mask: u64, c: S) -> Self {
        let mut out = Self::zero(n_gen);
        assert!(mask_fits(mask, n_gen), "blade {mask:#b} exceeds N = {n_gen}");
        if !c.is_zero() {
            out.terms.push((mask, c));
        }
        out
    }

    /// Builds an element from arbitrary (mask, coefficient) pairs, merging duplicates.
    pub fn from_terms(n_gen: u32, terms: impl IntoIterator<Item = (u64, S)>) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some((mask, _)) = terms.iter().find(|(m, _)| !mask_fits(*m, n_gen)) {
            return Err(Error::Structure(format!("blade {mask:#b} exceeds N = {n_gen}")));
        }
        Ok(Self::canonical(n_gen, terms))
    }

    fn canonical(n_gen: u32, mut terms: Vec<(u64, S)>) -> Self {
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(u64, S)> = Vec::with_capacity(terms.len());
        for (mask, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == mask => {
                    last.1 = last.1.clone() + c;
                }
                _ => out.push((mask, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        WeilElement { n_gen, terms: out }
    }

    pub fn n_gen(&self) -> u32 {
        self.n_gen
    }

    pub fn terms(&self) -> &[(u64, S)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> S {
        match self.terms.binary_search_by_key(&mask, |t| t.0) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => S::zero(),
        }
    }

    /// Coefficient of the empty blade; a unital ring homomorphism to `S`.
    pub fn body(&self) -> S {
        match self.terms.first() {
            Some((0, c)) => c.clone(),
            _ => S::zero(),
        }
    }

    pub fn soul(&self) -> Self {
        let terms = self.terms.iter().filter(|t| t.0 != 0).cloned().collect();
        WeilElement { n_gen: self.n_gen, terms }
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.iter().all(|t| t.0 == 0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.0.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.iter().all(|t| t.0.count_ones() % 2 == 1)
    }

    /// Parity of a homogeneous nonzero element; `None` for zero or mixed elements.
    pub fn parity(&self) -> Option<Parity> {
        if self.is_zero() {
            None
        } else if self.is_even() {
            Some(Parity::Even)
        } else if self.is_odd() {
            Some(Parity::Odd)
        } else {
            None
        }
    }

    pub fn has_parity(&self, p: Parity) -> bool {
        match p {
            Parity::Even => self.is_even(),
            Parity::Odd => self.is_odd(),
        }
    }

    fn check_same(&self, rhs: &Self) -> Result<()> {
        if self.n_gen != rhs.n_gen {
            return Err(Error::Structure(format!(
                "generator count mismatch: {} vs {}",
                self.n_gen, rhs.n_gen
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        Ok(self.add_unchecked(rhs))
    }

    fn add_unchecked(&self, rhs: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &rhs.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a[i].1.clone() + b[j].1.clone();
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        WeilElement { n_gen: self.n_gen, terms: out }
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        Ok(self.add_unchecked(&rhs.neg_ref()))
    }

    fn neg_ref(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect();
        WeilElement { n_gen: self.n_gen, terms }
    }

    /// Graded-commutative product.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return Self::zero(self.n_gen);
        }
        if rhs.is_scalar() {
            return self.scale(&rhs.terms[0].1);
        }
        if self.is_scalar() {
            return rhs.scale(&self.terms[0].1);
        }
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                if ka & kb != 0 {
                    continue;
                }
                let p = va.clone() * vb.clone();
                let p = if blade_product_negative(*ka, *kb) { -p } else { p };
                out.push((ka | kb, p));
            }
        }
        Self::canonical(self.n_gen, out)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.n_gen);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (*m, v.clone() * c.clone()))
            .filter(|t| !t.1.is_zero())
            .collect();
        WeilElement { n_gen: self.n_gen, terms }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.n_gen);
        for _ in 0..k {
            out = out.mul_unchecked(self);
        }
        out
    }

    /// Re-embeds into `Λ(ℝ^{new_n})`, sending `θ_i` to `θ_{i+offset}`.
    pub fn embed(&self, offset: u32, new_n: u32) -> Result<Self> {
        if offset + self.n_gen > new_n {
            return Err(Error::Structure(format!(
                "cannot embed N = {} at offset {offset} into N = {new_n}",
                self.n_gen
            )));
        }
        let terms = self.terms.iter().map(|(m, c)| (m << offset, c.clone())).collect();
        Ok(WeilElement { n_gen: new_n, terms })
    }

    /// Converts coefficients into another ring.
    pub fn map_scalars<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> WeilElement<T> {
        let terms = self.terms.iter().map(|(m, c)| (*m, f(c))).collect();
        WeilElement::canonical(self.n_gen, terms)
    }

    /// Converts into another ring through the complex double image.
    pub fn to_ring<T: Scalar>(&self) -> Result<WeilElement<T>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let t = T::from_c64(c.to_c64())
                .ok_or_else(|| Error::Domain(format!("{c:?} is not representable in {:?}", T::KIND)))?;
            terms.push((*m, t));
        }
        Ok(WeilElement::canonical(self.n_gen, terms))
    }

    pub fn to_c64(&self) -> WeilElement<Complex64> {
        self.map_scalars(|c| c.to_c64())
    }

    /// Complex conjugation of the coefficients (the effect of `𝒊 ↦ −𝒊`).
    pub fn conj(&self) -> Self {
        self.map_scalars(|c| c.conj())
    }

    /// `Σ_k soul^k/k! · f⁽ᵏ⁾(body)`; `deriv(k)` is called only while `soul^k ≠ 0`.
    pub fn smooth_apply(&self, mut deriv: impl FnMut(usize) -> Result<S>) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("smooth_apply needs an even element".into()));
        }
        let soul = self.soul();
        let mut out = Self::constant(self.n_gen, deriv(0)?);
        let mut power = Self::one(self.n_gen);
        let mut factorial = S::one();
        for k in 1..=(self.n_gen as usize / 2 + 1) {
            power = power.mul_unchecked(&soul);
            if power.is_zero() {
                break;
            }
            factorial = factorial * S::from_i64(k as i64);
            let c = deriv(k)? / factorial.clone();
            out = out.add_unchecked(&power.scale(&c));
        }
        Ok(out)
    }

    pub fn exp_even(&self) -> Result<Self> {
        let b = self.body();
        let e = b
            .exp()
            .ok_or_else(|| Error::Inexact(format!("exp({b:?}) is not representable in {:?}", S::KIND)))?;
        self.smooth_apply(|_| Ok(e.clone()))
    }

    /// Square root with a prescribed body root `r0` (`r0² = body`), used by branch tracking.
    pub fn sqrt_with_root(&self, r0: &S) -> Result<Self> {
        let z0 = self.body();
        if z0.is_zero() {
            return Err(Error::SingularBody("square root of an element with zero body".into()));
        }
        // d^k/dz^k z^{1/2} = (1/2)(1/2−1)⋯(1/2−k+1) · r0 / z0^k
        let half = S::from_ratio(1, 2);
        self.smooth_apply(|k| {
            let mut c = r0.clone();
            for j in 0..k {
                c = c * (half.clone() - S::from_i64(j as i64)) / z0.clone();
            }
            Ok(c)
        })
    }

    /// Principal square root of an even element.
    pub fn sqrt_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("sqrt_even needs an even element".into()));
        }
        let b = self.body();
        if b.is_zero() {
            return Err(Error::SingularBody("square root of an element with zero body".into()));
        }
        let r0 = match b.sqrt() {
            Some(r) => r,
            None if b.real_sign() == Some(Ordering::Less) && S::imag_unit().is_none() => {
                return Err(Error::Domain(format!("square root of negative body {b:?} in a real ring")))
            }
            None => return Err(Error::Inexact(format!("√{b:?} is not representable in {:?}", S::KIND))),
        };
        self.sqrt_with_root(&r0)
    }

    /// `|a| = sign(body(a))·a` for real bodies.
    pub fn abs_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("abs_even needs an even element".into()));
        }
        match self.body().real_sign() {
            None => Err(Error::Domain("abs_even needs a real body".into())),
            Some(Ordering::Equal) => Err(Error::SingularBody("abs of an element with zero body".into())),
            Some(Ordering::Greater) => Ok(self.clone()),
            Some(Ordering::Less) => Ok(self.neg_ref()),
        }
    }

    /// Inverse by the geometric series `a⁻¹ = Σ_k (−s)^k / b^{k+1}`.
    pub fn inverse_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("inverse_even needs an even element".into()));
        }
        let b = self.body();
        if b.is_zero() {
            return Err(Error::SingularBody("inverse of an element with zero body".into()));
        }
        let binv = S::one() / b;
        let step = self.soul().scale(&(-binv.clone()));
        let mut out = Self::constant(self.n_gen, S::one());
        let mut power = Self::one(self.n_gen);
        loop {
            power = power.mul_unchecked(&step);
            if power.is_zero() {
                break;
            }
            out = out.add_unchecked(&power);
        }
        Ok(out.scale(&binv))
    }

    /// Largest coefficient magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.terms.iter().map(|t| t.1.magnitude()).fold(0.0, f64::max)
    }

    /// `‖a − b‖∞ / max(‖a‖∞, ‖b‖∞)`, or the absolute difference when both are below `1e−14`.
    pub fn relative_error(&self, other: &Self) -> f64 {
        let diff = match self.try_sub(other) {
            Ok(d) => d.norm_inf(),
            Err(_) => return f64::INFINITY,
        };
        let scale = self.norm_inf().max(other.norm_inf());
        if scale > 1e-14 {
            diff / scale
        } else {
            diff
        }
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(mask, c)| {
                let gens: Vec<u32> = (0..self.n_gen).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
                let (re, im) = c.json_parts();
                let mut obj = json!({"gens": gens, "re": re});
                if let Some(im) = im {
                    obj["im"] = im;
                }
                obj
            })
            .collect();
        json!({"n_gen": self.n_gen, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n_gen = v
            .get("n_gen")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("Weil element needs integer \"n_gen\"".into()))?;
        if n_gen > MAX_GENERATORS as u64 {
            return Err(Error::Capacity(format!("n_gen {n_gen} exceeds {MAX_GENERATORS}")));
        }
        let n_gen = n_gen as u32;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("Weil element needs a \"terms\" array".into()))?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let gens = t
                .get("gens")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term needs a \"gens\" array".into()))?;
            let mut mask = 0u64;
            let mut prev = 0u64;
            for g in gens {
                let g = g.as_u64().ok_or_else(|| Error::Parse(format!("bad generator index {g}")))?;
                if g == 0 || g > n_gen as u64 {
                    return Err(Error::Parse(format!("generator {g} outside 1..={n_gen}")));
                }
                if g <= prev {
                    return Err(Error::Parse("generator indices must be strictly increasing".into()));
                }
                prev = g;
                mask |= 1 << (g - 1);
            }
            let re = t.get("re").ok_or_else(|| Error::Parse("term needs \"re\"".into()))?;
            out.push((mask, S::from_json_parts(re, t.get("im"))?));
        }
        Ok(Self::canonical(n_gen, out))
    }
}

fn mask_fits(mask: u64, n_gen: u32) -> bool {
    n_gen >= 64 || mask >> n_gen == 0
}

impl<S: Scalar> fmt::Debug for WeilElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Scalar> fmt::Display for WeilElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mask, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})")?;
            for i in 0..self.n_gen {
                if mask >> i & 1 == 1 {
                    write!(f, "θ{}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

macro_rules! weil_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl<S: Scalar> $trait<&WeilElement<S>> for &WeilElement<S> {
            type Output = WeilElement<S>;
            /// Panics on mismatched generator counts; use the `try_` form to get an error.
            fn $method(self, rhs: &WeilElement<S>) -> WeilElement<S> {
                match self.$inner(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl<S: Scalar> $trait<WeilElement<S>> for WeilElement<S> {
            type Output = WeilElement<S>;
            fn $method(self, rhs: WeilElement<S>) -> WeilElement<S> {
                (&self).$method(&rhs)
            }
        }
        impl<S: Scalar> $trait<&WeilElement<S>> for WeilElement<S> {
            type Output = WeilElement<S>;
            fn $method(self, rhs: &WeilElement<S>) -> WeilElement<S> {
                (&self).$method(rhs)
            }
        }
        impl<S: Scalar> $trait<WeilElement<S>> for &WeilElement<S> {
            type Output = WeilElement<S>;
            fn $method(self, rhs: WeilElement<S>) -> WeilElement<S> {
                self.$method(&rhs)
            }
        }
    };
}

weil_binop!(Add, add, try_add);
weil_binop!(Sub, sub, try_sub);
weil_binop!(Mul, mul, try_mul);

impl<S: Scalar> Neg for WeilElement<S> {
    type Output = WeilElement<S>;
    fn neg(self) -> WeilElement<S> {
        self.neg_ref()
    }
}

impl<S: Scalar> Neg for &WeilElement<S> {
    type Output = WeilElement<S>;
    fn neg(self) -> WeilElement<S> {
        self.neg_ref()
    }
}
