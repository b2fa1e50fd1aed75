//! Block supermatrices over Weil scalars.
//!
//! A [`SuperMatrix`] `[A B; C D]` is a Weil point of `gl(V)`: `A`, `D` have even entries and
//! `B`, `C` odd ones. It acts on coordinate columns by the ordinary matrix product, so products
//! and Schur complements keep the left-to-right order of entries.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::superspace::SymplecticSuperSpace;
use crate::weil::{Parity, Scalar, WeilElement};
use crate::{Error, Result};

/// Dense matrix of Weil elements sharing one generator count.
#[derive(Clone, PartialEq, Debug)]
pub struct WeilMatrix<S: Scalar> {
    rows: usize,
    cols: usize,
    n_gen: u32,
    data: Vec<WeilElement<S>>,
}

impl<S: Scalar> WeilMatrix<S> {
    pub fn zeros(rows: usize, cols: usize, n_gen: u32) -> Self {
        WeilMatrix { rows, cols, n_gen, data: vec![WeilElement::zero(n_gen); rows * cols] }
    }

    pub fn identity(r: usize, n_gen: u32) -> Self {
        let mut out = Self::zeros(r, r, n_gen);
        for i in 0..r {
            out.set(i, i, WeilElement::one(n_gen));
        }
        out
    }

    pub fn from_rows(rows: Vec<Vec<WeilElement<S>>>, n_gen: u32) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Structure("ragged matrix rows".into()));
            }
            for e in row {
                if e.n_gen() != n_gen {
                    return Err(Error::Structure(format!(
                        "entry over N = {} in a matrix over N = {n_gen}",
                        e.n_gen()
                    )));
                }
                data.push(e);
            }
        }
        Ok(WeilMatrix { rows: r, cols: c, n_gen, data })
    }

    /// Scalar matrix from row-major values.
    pub fn from_scalars(rows: usize, cols: usize, n_gen: u32, vals: &[S]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        let data = vals.iter().map(|v| WeilElement::constant(n_gen, v.clone())).collect();
        WeilMatrix { rows, cols, n_gen, data }
    }

    pub fn from_i64(rows: usize, cols: usize, n_gen: u32, vals: &[i64]) -> Self {
        let vals: Vec<S> = vals.iter().map(|&v| S::from_i64(v)).collect();
        Self::from_scalars(rows, cols, n_gen, &vals)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_gen(&self) -> u32 {
        self.n_gen
    }

    pub fn get(&self, i: usize, j: usize) -> &WeilElement<S> {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: WeilElement<S>) {
        assert_eq!(v.n_gen(), self.n_gen, "entry over the wrong Weil algebra");
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &WeilElement<S>)> {
        self.data.iter().enumerate().map(move |(k, e)| (k / self.cols.max(1), k % self.cols.max(1), e))
    }

    pub fn row_vecs(&self) -> Vec<Vec<WeilElement<S>>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    pub fn map(&self, f: impl Fn(&WeilElement<S>) -> WeilElement<S>) -> Self {
        WeilMatrix { data: self.data.iter().map(f).collect(), ..self.clone() }
    }

    pub fn map_ring<T: Scalar>(&self, f: impl Fn(&WeilElement<S>) -> Result<WeilElement<T>>) -> Result<WeilMatrix<T>> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        let n_gen = data.first().map_or(self.n_gen, |e| e.n_gen());
        Ok(WeilMatrix { rows: self.rows, cols: self.cols, n_gen, data })
    }

    /// Re-embeds all entries into `Λ(ℝ^{new_n})` shifted by `offset`.
    pub fn embed(&self, offset: u32, new_n: u32) -> Result<Self> {
        let data = self.data.iter().map(|e| e.embed(offset, new_n)).collect::<Result<Vec<_>>>()?;
        Ok(WeilMatrix { rows: self.rows, cols: self.cols, n_gen: new_n, data })
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, self.n_gen);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if (self.rows, self.cols, self.n_gen) != (o.rows, o.cols, o.n_gen) {
            return Err(Error::Structure(format!(
                "matrix shapes differ: {}×{} (N={}) vs {}×{} (N={})",
                self.rows, self.cols, self.n_gen, o.rows, o.cols, o.n_gen
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(WeilMatrix { data, ..self.clone() })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        Ok(WeilMatrix { data, ..self.clone() })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows || self.n_gen != o.n_gen {
            return Err(Error::Structure(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols, self.n_gen);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = WeilElement::zero(self.n_gen);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|e| e.scale(c))
    }

    /// `J·M` with the even Gram matrix.
    pub fn j_left(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.cols, self.n_gen);
        for i in (0..self.rows).step_by(2) {
            for j in 0..self.cols {
                out.set(i, j, self.get(i + 1, j).clone());
                out.set(i + 1, j, -self.get(i, j));
            }
        }
        out
    }

    /// `M·J` with the even Gram matrix.
    pub fn j_right(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.cols, self.n_gen);
        for i in 0..self.rows {
            for j in (0..self.cols).step_by(2) {
                out.set(i, j + 1, self.get(i, j).clone());
                out.set(i, j, -self.get(i, j + 1));
            }
        }
        out
    }

    pub fn body(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).body()).collect()).collect()
    }

    pub fn body_matrix(&self) -> Self {
        self.map(|e| WeilElement::constant(self.n_gen, e.body()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(WeilElement::is_zero)
    }

    pub fn all_have_parity(&self, p: Parity) -> bool {
        self.data.iter().all(|e| e.has_parity(p))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| *self.get(i, j) == -self.get(j, i)))
    }

    /// `(M − Mᵀ)/2` and the largest entry of `M + Mᵀ`.
    pub fn antisymmetrize(&self) -> (Self, f64) {
        let t = self.transpose();
        let half = S::from_ratio(1, 2);
        let anti = self.try_sub(&t).expect("square").scale(&half);
        let defect = self.try_add(&t).expect("square").data.iter().map(WeilElement::norm_inf).fold(0.0, f64::max);
        (anti, defect)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(WeilElement::norm_inf).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        self.map(|e| e.conj())
    }

    /// Rows and columns whose index lies in the bitmask `keep`.
    pub fn principal_submatrix(&self, keep: u64) -> Self {
        let idx: Vec<usize> = (0..self.rows).filter(|&i| keep >> i & 1 == 1).collect();
        self.select(&idx, &idx)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len(), self.n_gen);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }
}

fn require_square_even<S: Scalar>(m: &WeilMatrix<S>, what: &str) -> Result<()> {
    if m.rows != m.cols {
        return Err(Error::Structure(format!("{what} needs a square matrix, got {}×{}", m.rows, m.cols)));
    }
    if !m.all_have_parity(Parity::Even) {
        return Err(Error::Parity(format!("{what} needs even entries")));
    }
    Ok(())
}

fn pivot_row<S: Scalar>(m: &WeilMatrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best = None;
    let mut best_mag = 0.0;
    for i in from..m.rows {
        let b = m.get(i, col).body();
        if b.is_zero() {
            continue;
        }
        let mag = b.magnitude();
        if best.is_none() || mag > best_mag {
            best = Some(i);
            best_mag = mag;
        }
    }
    best
}

fn swap_rows<S: Scalar>(m: &mut WeilMatrix<S>, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}

/// Determinant of a matrix with even (hence commuting) entries, by elimination with
/// body-invertible pivots; falls back to the Leibniz sum for size ≤ 6 when pivoting stalls.
pub fn even_det<S: Scalar>(m: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    require_square_even(m, "even_det")?;
    let r = m.rows;
    let mut a = m.clone();
    let mut det = WeilElement::one(m.n_gen);
    for k in 0..r {
        let p = match pivot_row(&a, k, k) {
            Some(p) => p,
            None if r <= 6 => return Ok(even_det_leibniz(m)),
            None => return Err(Error::SingularBody(format!("no body-invertible pivot in column {}", k + 1))),
        };
        if p != k {
            swap_rows(&mut a, p, k);
            det = -det;
        }
        let piv = a.get(k, k).clone();
        det = &det * &piv;
        let inv = piv.inverse_even()?;
        for i in k + 1..r {
            if a.get(i, k).is_zero() {
                continue;
            }
            let f = a.get(i, k) * &inv;
            for j in k + 1..r {
                let v = a.get(i, j) - &(&f * a.get(k, j));
                a.set(i, j, v);
            }
        }
    }
    Ok(det)
}

/// Leibniz sum over all permutations (the oracle for [`even_det`]).
pub fn even_det_leibniz<S: Scalar>(m: &WeilMatrix<S>) -> WeilElement<S> {
    let r = m.rows;
    let mut total = WeilElement::zero(m.n_gen);
    for (perm, sign) in permutations(r) {
        let mut prod = WeilElement::one(m.n_gen);
        for (i, &j) in perm.iter().enumerate() {
            prod = &prod * m.get(i, j);
            if prod.is_zero() {
                break;
            }
        }
        total = if sign > 0 { &total + &prod } else { &total - &prod };
    }
    total
}

/// All permutations of `0..r` with their signs (Heap's algorithm).
pub fn permutations(r: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..r).collect();
    let mut c = vec![0usize; r];
    let mut sign = 1;
    out.push((a.clone(), sign));
    let mut i = 0;
    while i < r {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Inverse of a matrix with even entries (Gauss–Jordan with body-invertible pivots).
pub fn even_inverse<S: Scalar>(m: &WeilMatrix<S>) -> Result<WeilMatrix<S>> {
    require_square_even(m, "even_inverse")?;
    let r = m.rows;
    let mut a = m.clone();
    let mut inv = WeilMatrix::identity(r, m.n_gen);
    for k in 0..r {
        let p = pivot_row(&a, k, k)
            .ok_or_else(|| Error::SingularBody(format!("matrix body is singular (column {})", k + 1)))?;
        swap_rows(&mut a, p, k);
        swap_rows(&mut inv, p, k);
        let pinv = a.get(k, k).inverse_even()?;
        for j in 0..r {
            a.set(k, j, a.get(k, j) * &pinv);
            inv.set(k, j, inv.get(k, j) * &pinv);
        }
        for i in 0..r {
            if i == k || a.get(i, k).is_zero() {
                continue;
            }
            let f = a.get(i, k).clone();
            for j in 0..r {
                a.set(i, j, a.get(i, j) - &(&f * a.get(k, j)));
                inv.set(i, j, inv.get(i, j) - &(&f * inv.get(k, j)));
            }
        }
    }
    Ok(inv)
}

/// Largest size handled by the exact perfect-matching expansion.
pub const PFAFFIAN_MATCHING_MAX: usize = 12;

/// Pfaffian normalized so that `Pfaff([[0,−c],[c,0]]) = c`; this is the usual Pfaffian of
/// `−M`, i.e. `(−1)^{r/2}` times the usual one. Zero for odd size.
pub fn pfaffian<S: Scalar>(m: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    if m.rows != m.cols {
        return Err(Error::Structure("Pfaffian needs a square matrix".into()));
    }
    if !m.is_antisymmetric() {
        return Err(Error::Structure("Pfaffian needs an antisymmetric matrix".into()));
    }
    if !m.all_have_parity(Parity::Even) {
        return Err(Error::Parity("Pfaffian needs even entries".into()));
    }
    let r = m.rows;
    if r % 2 == 1 {
        return Ok(WeilElement::zero(m.n_gen));
    }
    let std = if r <= PFAFFIAN_MATCHING_MAX {
        pfaffian_std_matching(m)
    } else {
        pfaffian_std_elimination(m)?
    };
    Ok(if (r / 2) % 2 == 1 { -std } else { std })
}

/// Usual Pfaffian by expansion along the first row (sum over perfect matchings).
pub fn pfaffian_std_matching<S: Scalar>(m: &WeilMatrix<S>) -> WeilElement<S> {
    fn rec<S: Scalar>(m: &WeilMatrix<S>, idx: &[usize]) -> WeilElement<S> {
        if idx.is_empty() {
            return WeilElement::one(m.n_gen);
        }
        let i0 = idx[0];
        let mut total = WeilElement::zero(m.n_gen);
        for t in 1..idx.len() {
            let a = m.get(i0, idx[t]);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx[1..].iter().enumerate().filter(|(s, _)| s + 1 != t).map(|(_, &v)| v).collect();
            let term = a * &rec(m, &rest);
            total = if t % 2 == 1 { &total + &term } else { &total - &term };
        }
        total
    }
    let idx: Vec<usize> = (0..m.rows).collect();
    rec(m, &idx)
}

/// Usual Pfaffian by skew Gaussian elimination with pivoting on body magnitude.
pub fn pfaffian_std_elimination<S: Scalar>(m: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    let r = m.rows;
    let mut a = m.clone();
    let mut pf = WeilElement::one(m.n_gen);
    for k in (0..r.saturating_sub(1)).step_by(2) {
        let kp = match pivot_row(&a, k, k + 1) {
            Some(p) => p,
            None if (k + 1..r).all(|i| a.get(i, k).is_zero()) => return Ok(WeilElement::zero(m.n_gen)),
            None => return Err(Error::SingularBody("Pfaffian elimination stalled on a nilpotent column".into())),
        };
        if kp != k + 1 {
            swap_rows(&mut a, kp, k + 1);
            let t = a.transpose();
            let mut t2 = t;
            swap_rows(&mut t2, kp, k + 1);
            a = t2.transpose();
            pf = -pf;
        }
        let piv = a.get(k, k + 1).clone();
        pf = &pf * &piv;
        if k + 2 < r {
            let pinv = piv.inverse_even()?;
            let tau: Vec<WeilElement<S>> = (k + 2..r).map(|i| a.get(k, i) * &pinv).collect();
            for (ii, i) in (k + 2..r).enumerate() {
                for (jj, j) in (k + 2..r).enumerate() {
                    let v = &(a.get(i, j) + &(&tau[ii] * a.get(j, k + 1))) - &(a.get(i, k + 1) * &tau[jj]);
                    a.set(i, j, v);
                }
            }
        }
    }
    Ok(pf)
}

/// `D_J`: rows and columns of `d` where `J` has a one.
pub fn submatrix_j<S: Scalar>(d: &WeilMatrix<S>, j: u64) -> WeilMatrix<S> {
    d.principal_submatrix(j)
}

/// `C_{J,I}`: rows `k` of `c` with `j_k = 1`, and column `a` repeated `i_a` times.
pub fn repeated_submatrix<S: Scalar>(c: &WeilMatrix<S>, j: u64, i: &[u32]) -> Result<WeilMatrix<S>> {
    if i.len() != c.cols {
        return Err(Error::Structure(format!("I has {} slots but C has {} columns", i.len(), c.cols)));
    }
    let rows: Vec<usize> = (0..c.rows).filter(|&k| j >> k & 1 == 1).collect();
    let cols: Vec<usize> = i.iter().enumerate().flat_map(|(a, &e)| std::iter::repeat_n(a, e as usize)).collect();
    Ok(c.select(&rows, &cols))
}

/// `φ_r(M) = Σ_σ a_{1σ(1)}⋯a_{rσ(r)}` for a square matrix of odd entries (products in row order).
pub fn phi_r<S: Scalar>(m: &WeilMatrix<S>) -> Result<WeilElement<S>> {
    if m.rows != m.cols {
        return Err(Error::Structure(format!("φ_r needs a square matrix, got {}×{}", m.rows, m.cols)));
    }
    if !m.all_have_parity(Parity::Odd) {
        return Err(Error::Parity("φ_r needs odd entries".into()));
    }
    let mut total = WeilElement::zero(m.n_gen);
    for (perm, _) in permutations(m.rows) {
        let mut prod = WeilElement::one(m.n_gen);
        for (i, &j) in perm.iter().enumerate() {
            prod = &prod * m.get(i, j);
            if prod.is_zero() {
                break;
            }
        }
        total = &total + &prod;
    }
    Ok(total)
}

/// The submatrix formula `(−1)^{|J|(|J|−1)/2} φ_{|J|}(C_{J,I})` for `|I| = |J|`, zero otherwise.
///
/// For the off-diagonal point `Y = [0 B; C 0]` this is `I!` times the coefficient of `ξ^J x^I`
/// in `exp(μ(Y, v))`, since `φ` sums over all column permutations including those that only
/// permute repeated columns.
pub fn c_ij_submatrix<S: Scalar>(c: &WeilMatrix<S>, i: &[u32], j: u64) -> Result<WeilElement<S>> {
    let r = j.count_ones();
    if i.iter().sum::<u32>() != r {
        return Ok(WeilElement::zero(c.n_gen));
    }
    let phi = phi_r(&repeated_submatrix(c, j, i)?)?;
    Ok(if (r * r.saturating_sub(1) / 2) % 2 == 1 { -phi } else { phi })
}

/// Signature `(p, q)` of a real symmetric scalar matrix by LDLᵀ with symmetric pivoting
/// (1×1 pivots on the largest diagonal entry, 2×2 pivots when the diagonal vanishes).
/// Exact for exact rings; floats treat entries below `1e−12` of the largest as zero.
pub fn inertia<S: Scalar>(sym: &[Vec<S>]) -> Result<(usize, usize)> {
    let r = sym.len();
    let mut s: Vec<Vec<S>> = sym.to_vec();
    let scale = s.iter().flatten().map(S::magnitude).fold(0.0, f64::max);
    let thr = if S::KIND.is_exact() { 0.0 } else { 1e-12 * scale };
    let sign = |v: &S| -> Result<Ordering> {
        v.real_sign().ok_or_else(|| Error::Domain("signature needs a real symmetric form".into()))
    };
    for row in &s {
        for v in row {
            sign(v)?;
        }
    }
    let mut live: Vec<usize> = (0..r).collect();
    let (mut p, mut q) = (0, 0);
    while !live.is_empty() {
        let diag = live.iter().copied().max_by(|&a, &b| s[a][a].magnitude().total_cmp(&s[b][b].magnitude())).unwrap();
        let dmag = s[diag][diag].magnitude();
        if dmag > thr && !s[diag][diag].is_zero() {
            match sign(&s[diag][diag])? {
                Ordering::Greater => p += 1,
                _ => q += 1,
            }
            live.retain(|&x| x != diag);
            let piv = s[diag][diag].clone();
            for &k in &live {
                for &l in &live {
                    let v = s[k][l].clone() - s[k][diag].clone() * s[diag][l].clone() / piv.clone();
                    s[k][l] = v;
                }
            }
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        let mut best_mag = thr;
        for (a, &i) in live.iter().enumerate() {
            for &j in &live[a + 1..] {
                let mag = s[i][j].magnitude();
                if mag > best_mag && !s[i][j].is_zero() {
                    best = Some((i, j));
                    best_mag = mag;
                }
            }
        }
        let (i, j) = best.ok_or_else(|| Error::StratumBoundary("degenerate quadratic form".into()))?;
        // The 2×2 block has negative determinant: one positive and one negative direction.
        p += 1;
        q += 1;
        live.retain(|&x| x != i && x != j);
        let (a, b, d) = (s[i][i].clone(), s[i][j].clone(), s[j][j].clone());
        let det = a.clone() * d.clone() - b.clone() * b.clone();
        for &k in &live {
            for &l in &live {
                let (ki, kj, il, jl) = (s[k][i].clone(), s[k][j].clone(), s[i][l].clone(), s[j][l].clone());
                let corr = (ki.clone() * (d.clone() * il.clone() - b.clone() * jl.clone())
                    + kj * (a.clone() * jl - b.clone() * il))
                    / det.clone();
                s[k][l] = s[k][l].clone() - corr;
            }
        }
    }
    Ok((p, q))
}

/// A Weil point `[A B; C D]` of `gl(V)`.
#[derive(Clone, PartialEq, Debug)]
pub struct SuperMatrix<S: Scalar> {
    space: SymplecticSuperSpace,
    n_gen: u32,
    a: WeilMatrix<S>,
    b: WeilMatrix<S>,
    c: WeilMatrix<S>,
    d: WeilMatrix<S>,
}

impl<S: Scalar> SuperMatrix<S> {
    /// Builds a supermatrix, checking block shapes and parities.
    pub fn new(
        space: SymplecticSuperSpace,
        a: WeilMatrix<S>,
        b: WeilMatrix<S>,
        c: WeilMatrix<S>,
        d: WeilMatrix<S>,
    ) -> Result<Self> {
        let (m, n) = (space.m(), space.n());
        let shapes = [(&a, m, m, "A"), (&b, m, n, "B"), (&c, n, m, "C"), (&d, n, n, "D")];
        for (blk, r, co, name) in shapes {
            if blk.rows != r || blk.cols != co {
                return Err(Error::Structure(format!(
                    "block {name} is {}×{}, expected {r}×{co}",
                    blk.rows, blk.cols
                )));
            }
        }
        let n_gen = a.n_gen;
        if [b.n_gen, c.n_gen, d.n_gen].iter().any(|&g| g != n_gen) {
            return Err(Error::Structure("blocks use different Weil algebras".into()));
        }
        let out = SuperMatrix { space, n_gen, a, b, c, d };
        out.check_parity()?;
        Ok(out)
    }

    pub fn identity(space: SymplecticSuperSpace, n_gen: u32) -> Self {
        let (m, n) = (space.m(), space.n());
        SuperMatrix {
            space,
            n_gen,
            a: WeilMatrix::identity(m, n_gen),
            b: WeilMatrix::zeros(m, n, n_gen),
            c: WeilMatrix::zeros(n, m, n_gen),
            d: WeilMatrix::identity(n, n_gen),
        }
    }

    pub fn zero(space: SymplecticSuperSpace, n_gen: u32) -> Self {
        let (m, n) = (space.m(), space.n());
        SuperMatrix {
            space,
            n_gen,
            a: WeilMatrix::zeros(m, m, n_gen),
            b: WeilMatrix::zeros(m, n, n_gen),
            c: WeilMatrix::zeros(n, m, n_gen),
            d: WeilMatrix::zeros(n, n, n_gen),
        }
    }

    /// `diag(A, D)`.
    pub fn block_diag(space: SymplecticSuperSpace, a: WeilMatrix<S>, d: WeilMatrix<S>) -> Result<Self> {
        let n_gen = a.n_gen;
        let (m, n) = (space.m(), space.n());
        Self::new(space, a, WeilMatrix::zeros(m, n, n_gen), WeilMatrix::zeros(n, m, n_gen), d)
    }

    pub fn space(&self) -> &SymplecticSuperSpace {
        &self.space
    }

    pub fn n_gen(&self) -> u32 {
        self.n_gen
    }

    pub fn a(&self) -> &WeilMatrix<S> {
        &self.a
    }
    pub fn b(&self) -> &WeilMatrix<S> {
        &self.b
    }
    pub fn c(&self) -> &WeilMatrix<S> {
        &self.c
    }
    pub fn d(&self) -> &WeilMatrix<S> {
        &self.d
    }

    pub fn blocks(&self) -> [&WeilMatrix<S>; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Same entries over another space descriptor of equal dimensions (e.g. flipped orientation).
    pub fn with_space(&self, space: SymplecticSuperSpace) -> Result<Self> {
        if (space.m(), space.n()) != (self.space.m(), self.space.n()) {
            return Err(Error::Structure("space dimensions differ".into()));
        }
        Ok(SuperMatrix { space, ..self.clone() })
    }

    /// Block coordinates (block name, row, column; one-based) of entries with the wrong parity.
    pub fn parity_violations(&self) -> Vec<(char, usize, usize)> {
        let mut out = Vec::new();
        for (name, blk, p) in [
            ('A', &self.a, Parity::Even),
            ('B', &self.b, Parity::Odd),
            ('C', &self.c, Parity::Odd),
            ('D', &self.d, Parity::Even),
        ] {
            for (i, j, e) in blk.entries() {
                if !e.has_parity(p) {
                    out.push((name, i + 1, j + 1));
                }
            }
        }
        out
    }

    pub fn check_parity(&self) -> Result<()> {
        match self.parity_violations().first() {
            None => Ok(()),
            Some((blk, i, j)) => Err(Error::Parity(format!(
                "entry ({i},{j}) of block {blk} has the wrong parity"
            ))),
        }
    }

    /// The full `(m+n)×(m+n)` array of entries.
    pub fn full_rows(&self) -> Vec<Vec<WeilElement<S>>> {
        let (m, n) = (self.space.m(), self.space.n());
        let mut rows = Vec::with_capacity(m + n);
        for i in 0..m {
            let mut r: Vec<_> = (0..m).map(|j| self.a.get(i, j).clone()).collect();
            r.extend((0..n).map(|j| self.b.get(i, j).clone()));
            rows.push(r);
        }
        for i in 0..n {
            let mut r: Vec<_> = (0..m).map(|j| self.c.get(i, j).clone()).collect();
            r.extend((0..n).map(|j| self.d.get(i, j).clone()));
            rows.push(r);
        }
        rows
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if (self.space.m(), self.space.n(), self.n_gen) != (o.space.m(), o.space.n(), o.n_gen) {
            return Err(Error::Structure("supermatrix shapes differ".into()));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(SuperMatrix {
            a: self.a.try_add(&o.a)?,
            b: self.b.try_add(&o.b)?,
            c: self.c.try_add(&o.c)?,
            d: self.d.try_add(&o.d)?,
            ..self.clone()
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&o.a, &o.b, &o.c, &o.d);
        Ok(SuperMatrix {
            a: a.try_mul(a2)?.try_add(&b.try_mul(c2)?)?,
            b: a.try_mul(b2)?.try_add(&b.try_mul(d2)?)?,
            c: c.try_mul(a2)?.try_add(&d.try_mul(c2)?)?,
            d: c.try_mul(b2)?.try_add(&d.try_mul(d2)?)?,
            ..self.clone()
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|e| e.scale(s))
    }

    /// Entrywise map (must preserve parity).
    pub fn map(&self, f: impl Fn(&WeilElement<S>) -> WeilElement<S>) -> Self {
        SuperMatrix {
            a: self.a.map(&f),
            b: self.b.map(&f),
            c: self.c.map(&f),
            d: self.d.map(&f),
            ..self.clone()
        }
    }

    /// Entrywise conversion into another ring or Weil algebra.
    pub fn map_ring<T: Scalar>(&self, f: impl Fn(&WeilElement<S>) -> Result<WeilElement<T>>) -> Result<SuperMatrix<T>> {
        SuperMatrix::new(self.space, self.a.map_ring(&f)?, self.b.map_ring(&f)?, self.c.map_ring(&f)?, self.d.map_ring(&f)?)
    }

    pub fn to_c64(&self) -> SuperMatrix<num_complex::Complex64> {
        self.map_ring(|e| Ok(e.to_c64())).expect("conversion preserves shape")
    }

    /// Re-embeds all entries into `Λ(ℝ^{new_n})` shifted by `offset`.
    pub fn embed(&self, offset: u32, new_n: u32) -> Result<Self> {
        let [a, b, c, d] = self.blocks().map(|m| m.embed(offset, new_n));
        SuperMatrix::new(self.space, a?, b?, c?, d?)
    }

    pub fn conj(&self) -> Self {
        self.map(|e| e.conj())
    }

    /// Supercommutator of two even points, `XY − YX`.
    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.try_mul(o)?.try_sub(&o.try_mul(self)?)
    }

    /// Body of every entry, as a scalar supermatrix (odd blocks vanish).
    pub fn body(&self) -> Self {
        self.map(|e| WeilElement::constant(self.n_gen, e.body()))
    }

    /// `tr(A) − tr(D)`.
    pub fn supertrace(&self) -> Result<WeilElement<S>> {
        self.check_parity()?;
        let mut t = WeilElement::zero(self.n_gen);
        for i in 0..self.space.m() {
            t = &t + self.a.get(i, i);
        }
        for i in 0..self.space.n() {
            t = &t - self.d.get(i, i);
        }
        Ok(t)
    }

    /// The adjoint with respect to `B`: `B(Xv, w) = B(v, X*w)` for all even Weil points.
    /// Blockwise `X* = [J⁻¹AᵀJ, −J⁻¹Cᵀ; BᵀJ, Dᵀ]`.
    pub fn adjoint_star(&self) -> Self {
        SuperMatrix {
            a: self.a.transpose().j_right().j_left().neg(),
            b: self.c.transpose().j_left(),
            c: self.b.transpose().j_right(),
            d: self.d.transpose(),
            ..self.clone()
        }
    }

    /// `X* = −X`, exactly.
    pub fn is_spo(&self) -> bool {
        self.adjoint_star() == self.neg()
    }

    /// Largest entry of `X* + X`.
    pub fn spo_defect(&self) -> f64 {
        let s = self.adjoint_star().try_add(self).expect("same shape");
        s.blocks().iter().map(|b| b.norm_inf()).fold(0.0, f64::max)
    }

    /// `g* g = 1`, exactly.
    pub fn is_spo_group(&self) -> bool {
        self.adjoint_star().try_mul(self).is_ok_and(|p| p == Self::identity(self.space, self.n_gen))
    }

    /// Largest entry of `g* g − 1`.
    pub fn spo_group_defect(&self) -> f64 {
        let p = self.adjoint_star().try_mul(self).expect("same shape");
        let e = p.try_sub(&Self::identity(self.space, self.n_gen)).expect("same shape");
        e.blocks().iter().map(|b| b.norm_inf()).fold(0.0, f64::max)
    }

    /// `(X − X*)/2`, which always lies in `spo(V)`.
    pub fn project_spo(&self) -> Self {
        let half = S::from_ratio(1, 2);
        self.try_sub(&self.adjoint_star()).expect("same shape").scale(&half)
    }

    /// Inverse via the Schur complement of `A`.
    pub fn inverse(&self) -> Result<Self> {
        let ainv = even_inverse(&self.a)?;
        let ainv_b = ainv.try_mul(&self.b)?;
        let c_ainv = self.c.try_mul(&ainv)?;
        let sd = self.d.try_sub(&self.c.try_mul(&ainv_b)?)?;
        let sdinv = even_inverse(&sd)?;
        let b_blk = ainv_b.try_mul(&sdinv)?.neg();
        let c_blk = sdinv.try_mul(&c_ainv)?.neg();
        let a_blk = ainv.try_add(&ainv_b.try_mul(&sdinv)?.try_mul(&c_ainv)?)?;
        Ok(SuperMatrix { a: a_blk, b: b_blk, c: c_blk, d: sdinv, ..self.clone() })
    }

    /// `D − C A⁻¹ B`.
    pub fn schur_d(&self) -> Result<WeilMatrix<S>> {
        let ainv = even_inverse(&self.a)?;
        self.d.try_sub(&self.c.try_mul(&ainv)?.try_mul(&self.b)?)
    }

    /// `A − B D⁻¹ C`.
    pub fn schur_a(&self) -> Result<WeilMatrix<S>> {
        let dinv = even_inverse(&self.d)?;
        self.a.try_sub(&self.b.try_mul(&dinv)?.try_mul(&self.c)?)
    }

    /// `Ber(M) = det(A − BD⁻¹C) det(D)⁻¹`.
    pub fn berezinian(&self) -> Result<WeilElement<S>> {
        let num = even_det(&self.schur_a()?)?;
        Ok(&num * &even_det(&self.d)?.inverse_even()?)
    }

    /// `Ber⁻(M) = det(A)⁻¹ det(D − CA⁻¹B)`.
    pub fn berezinian_minus(&self) -> Result<WeilElement<S>> {
        let num = even_det(&self.schur_d()?)?;
        Ok(&num * &even_det(&self.a)?.inverse_even()?)
    }

    /// `Ber₍₁,₀₎(M) = |det(A − BD⁻¹C)| det(D)⁻¹`.
    pub fn berezinian_10(&self) -> Result<WeilElement<S>> {
        let num = even_det(&self.schur_a()?)?.abs_even()?;
        Ok(&num * &even_det(&self.d)?.inverse_even()?)
    }

    /// `Ber⁻₍₁,₀₎(M) = |det(A)⁻¹| det(D − CA⁻¹B)`.
    pub fn berezinian_minus_10(&self) -> Result<WeilElement<S>> {
        let num = even_det(&self.schur_d()?)?;
        Ok(&num * &even_det(&self.a)?.inverse_even()?.abs_even()?)
    }

    /// `S_ij = B(e_i, body(A) e_j)`, i.e. `J · body(A)`.
    pub fn quadratic_form_body(&self) -> Vec<Vec<S>> {
        self.a.body_matrix().j_left().body()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "space": self.space.to_json(),
            "A": self.a.to_json(),
            "B": self.b.to_json(),
            "C": self.c.to_json(),
            "D": self.d.to_json(),
        })
    }

    /// Parses the JSON form; parity is *not* checked here so callers can report violations.
    pub fn from_json_unchecked(v: &Value) -> Result<Self> {
        let space = SymplecticSuperSpace::from_json(v.get("space").ok_or_else(|| Error::Parse("missing \"space\"".into()))?)?;
        let (m, n) = (space.m(), space.n());
        let mut n_gen: Option<u32> = None;
        let mut read = |key: &str, r: usize, c: usize| -> Result<Vec<Vec<WeilElement<S>>>> {
            let rows = match v.get(key) {
                Some(Value::Array(rows)) => rows.clone(),
                None if r == 0 || c == 0 => vec![Value::Array(vec![]); r],
                _ => return Err(Error::Parse(format!("block \"{key}\" must be an array of rows"))),
            };
            if rows.len() != r {
                return Err(Error::Structure(format!("block {key} has {} rows, expected {r}", rows.len())));
            }
            let mut out = Vec::with_capacity(r);
            for (i, row) in rows.iter().enumerate() {
                let row = row.as_array().ok_or_else(|| Error::Parse(format!("row {} of {key} is not an array", i + 1)))?;
                if row.len() != c {
                    return Err(Error::Structure(format!(
                        "row {} of block {key} has {} entries, expected {c}",
                        i + 1,
                        row.len()
                    )));
                }
                let mut parsed = Vec::with_capacity(c);
                for e in row {
                    let w = WeilElement::<S>::from_json(e)?;
                    match n_gen {
                        None => n_gen = Some(w.n_gen()),
                        Some(g) if g != w.n_gen() => {
                            return Err(Error::Structure(format!(
                                "entries use different generator counts ({g} and {})",
                                w.n_gen()
                            )))
                        }
                        _ => {}
                    }
                    parsed.push(w);
                }
                out.push(parsed);
            }
            Ok(out)
        };
        let (a, b, c, d) = (read("A", m, m)?, read("B", m, n)?, read("C", n, m)?, read("D", n, n)?);
        let g = n_gen.unwrap_or(0);
        let mk = |rows: Vec<Vec<WeilElement<S>>>, r: usize, c: usize| -> Result<WeilMatrix<S>> {
            if r == 0 || c == 0 {
                Ok(WeilMatrix::zeros(r, c, g))
            } else {
                WeilMatrix::from_rows(rows, g)
            }
        };
        Ok(SuperMatrix { space, n_gen: g, a: mk(a, m, m)?, b: mk(b, m, n)?, c: mk(c, n, m)?, d: mk(d, n, n)? })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let x = Self::from_json_unchecked(v)?;
        x.check_parity()?;
        Ok(x)
    }
}

/// `diag(1,…,1,𝒊,…,𝒊)` change of frame on the odd part: converts a matrix written in a real
/// basis where `B|V₁ = diag(1,…,1,−1,…,−1)` to the orthonormal complex frame used internally.
pub fn to_orthonormal_frame<S: Scalar>(x: &SuperMatrix<S>) -> Result<SuperMatrix<S>> {
    let (p1, _) = x.space().odd_signature();
    let n = x.space().n();
    if p1 == n {
        return Ok(x.clone());
    }
    let i = S::imag_unit().ok_or_else(|| Error::Inexact("negative odd signature needs a complex ring".into()))?;
    let mi = -i.clone();
    // X_new = T⁻¹ X T with T = diag(1,…,1,𝒊,…,𝒊) on V₁.
    let t = |k: usize| if k < p1 { S::one() } else { i.clone() };
    let tinv = |k: usize| if k < p1 { S::one() } else { mi.clone() };
    let mut b = x.b().clone();
    let mut c = x.c().clone();
    let mut d = x.d().clone();
    for r in 0..b.rows() {
        for k in 0..n {
            b.set(r, k, b.get(r, k).scale(&t(k)));
        }
    }
    for k in 0..n {
        for col in 0..c.cols() {
            c.set(k, col, c.get(k, col).scale(&tinv(k)));
        }
        for l in 0..n {
            d.set(k, l, d.get(k, l).scale(&(tinv(k) * t(l))));
        }
    }
    SuperMatrix::new(*x.space(), x.a().clone(), b, c, d)
}

/// Symmetric matrix of the form `K(X, Y) = str(XY)` restricted to a list of scalar matrices
/// given as full `(m+n)×(m+n)` arrays (real super-linear maps, plain matrix products).
pub fn supertrace_form(m: usize, mats: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let k = mats.len();
    let size = mats.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut s = 0.0;
            for i in 0..size {
                let mut diag = 0.0;
                for l in 0..size {
                    diag += mats[a][i][l] * mats[b][l][i];
                }
                s += if i < m { diag } else { -diag };
            }
            out[a][b] = s;
        }
    }
    out
}
