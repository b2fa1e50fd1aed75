//! Randomized identity suites with deterministic per-point seeding and JSON reports.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::boundary::{boundary_probe, default_eps, sl2_orbit_identity, spo22_formula};
use super::harmonic::harmonicity_check;
use super::identities::*;
use super::taylor::{multi_indices, taylor_pfaff_expand, taylor_spf2_sum};
use super::{spf, spf_closed};
use crate::berezin::integrate_exp_mu;
use crate::random::{point_rng, random_gl, random_spo, random_spo_group, random_symmetric_with_signature, sp_from_form, SoulDensity, SpoOptions};
use crate::superlinalg::{pfaffian, SuperMatrix, WeilMatrix};
use crate::superspace::{full_mask, moment_polynomial, poisson_bracket, SymplecticSuperSpace};
use crate::weil::{GaussRational, Rational, Scalar, WeilElement};
use crate::{Error, Result};

/// Every suite name accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "square",
    "covariance",
    "homogeneity",
    "taylor-pfaff",
    "taylor-spf2",
    "wick",
    "klambda",
    "harmonic",
    "corollaries",
    "oracle",
    "poisson",
    "boundary",
    "sl2-orbit",
    "spo22",
];

/// Scalar ring the suites run in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMode {
    /// Gaussian rationals: exact, with `𝒊` available.
    Rational,
    /// Complex doubles.
    Complex,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Rational => "rational",
            ScalarMode::Complex => "complex",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub points: usize,
    /// Pass threshold on `max_rel_err`; `None` takes the suite default.
    pub tol: Option<f64>,
    /// Weil generators per point; `None` uses `n + 4`.
    pub n_gen: Option<u32>,
    pub mode: ScalarMode,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, points: 20, tol: None, n_gen: None, mode: ScalarMode::Rational }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub point: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub points: usize,
    pub max_rel_err: f64,
    pub tol: f64,
    pub mode: ScalarMode,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.max_rel_err <= self.tol
    }

    pub fn to_json(&self) -> Value {
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({"point": f.point, "lhs": f.lhs, "rhs": f.rhs, "rel_err": finite(f.rel_err)}))
            .collect();
        json!({
            "check": self.check,
            "points": self.points,
            "max_rel_err": finite(self.max_rel_err),
            "tol": self.tol,
            "mode": self.mode.name(),
            "failures": failures,
        })
    }
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

/// Outcome of one point.
struct PointResult {
    rel_err: f64,
    point: Value,
    lhs: Value,
    rhs: Value,
}

impl PointResult {
    fn from_outcome<S: Scalar>(point: Value, out: &CheckOutcome<S>) -> Self {
        PointResult { rel_err: out.rel_err(), point, lhs: out.lhs.to_json(), rhs: out.rhs.to_json() }
    }

    fn worst(mut items: Vec<PointResult>) -> PointResult {
        items.sort_by(|a, b| b.rel_err.total_cmp(&a.rel_err));
        items.into_iter().next().expect("at least one sub-check")
    }
}

fn default_tol(suite: &str, mode: ScalarMode) -> f64 {
    match (suite, mode) {
        ("boundary", _) => 1e-6,
        ("harmonic", _) => 1e-8,
        // Both compare products of two soul-heavy evaluations whose souls cancel exactly.
        ("covariance" | "klambda", ScalarMode::Complex) => 1e-6,
        (_, ScalarMode::Rational) => 0.0,
        (_, ScalarMode::Complex) => 1e-9,
    }
}

/// Runs `cfg.points` instances of a suite. Unknown names give [`Error::Parse`].
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<CheckReport> {
    if !SUITES.contains(&name) {
        return Err(Error::Parse(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", "))));
    }
    let run = |idx: usize| -> PointResult {
        let mut rng = point_rng(cfg.seed, idx as u64);
        let res = match cfg.mode {
            ScalarMode::Rational => run_point::<GaussRational>(name, idx, &mut rng, cfg),
            ScalarMode::Complex => run_point::<Complex64>(name, idx, &mut rng, cfg),
        };
        res.unwrap_or_else(|e| PointResult {
            rel_err: f64::INFINITY,
            point: json!({"index": idx}),
            lhs: json!({"error": e.to_string()}),
            rhs: Value::Null,
        })
    };
    #[cfg(feature = "parallel")]
    let results: Vec<PointResult> = {
        use rayon::prelude::*;
        (0..cfg.points).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<PointResult> = (0..cfg.points).map(run).collect();

    let tol = cfg.tol.unwrap_or_else(|| default_tol(name, cfg.mode));
    let max_rel_err = results.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let failures = results
        .into_iter()
        .filter(|r| !(r.rel_err <= tol))
        .map(|r| Failure { point: r.point, lhs: r.lhs, rhs: r.rhs, rel_err: r.rel_err })
        .collect();
    Ok(CheckReport { check: name.to_string(), points: cfg.points, max_rel_err, tol, mode: cfg.mode, failures })
}

fn convert<S: Scalar>(x: &SuperMatrix<Rational>) -> SuperMatrix<S> {
    x.map_ring(|e| Ok(e.map_scalars(S::from_rational))).expect("rationals embed in every ring")
}

fn space(m: usize, n: usize) -> SymplecticSuperSpace {
    SymplecticSuperSpace::new(m, n).expect("m is even")
}

fn pick<T: Copy>(items: &[T], idx: usize) -> T {
    items[idx % items.len()]
}

fn random_stratum(rng: &mut ChaCha8Rng, m: usize) -> (usize, usize) {
    let p = rng.gen_range(0..=m);
    (p, m - p)
}

fn n_gen(cfg: &SuiteConfig, n: usize) -> u32 {
    cfg.n_gen.unwrap_or(n as u32 + 4)
}

fn spo_point(rng: &mut ChaCha8Rng, m: usize, n: usize, nw: u32, stratum: (usize, usize), invertible_d: bool) -> SuperMatrix<Rational> {
    random_spo(rng, space(m, n), nw, SpoOptions { stratum: Some(stratum), invertible_d, ..Default::default() })
}

fn run_point<S: Scalar>(name: &str, idx: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Result<PointResult> {
    let shapes_all = [(2, 0), (2, 2), (4, 2)];
    match name {
        "square" => {
            let (m, n) = pick(&shapes_all, idx);
            let st = random_stratum(rng, m);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n), st, false));
            Ok(PointResult::from_outcome(x.to_json(), &square_check(&x)?))
        }
        "covariance" => {
            let (m, n) = pick(&shapes_all, idx);
            let st = random_stratum(rng, m);
            let nw = n_gen(cfg, n);
            // A nonzero value keeps relative errors meaningful in float mode.
            let x = convert::<S>(&spo_point(rng, m, n, nw, st, true));
            let general = covariance_check(&x, &convert(&random_gl(rng, space(m, n), nw, SoulDensity::default())))?;
            let g = convert(&random_spo_group(rng, space(m, n), nw, idx % 2 == 1, SoulDensity::default()));
            let special = spo_covariance_check(&x, &g)?;
            Ok(PointResult::worst(vec![
                PointResult::from_outcome(x.to_json(), &general),
                PointResult::from_outcome(json!({"X": x.to_json(), "g": g.to_json()}), &special),
            ]))
        }
        "homogeneity" => {
            let (m, n) = pick(&shapes_all, idx);
            let st = random_stratum(rng, m);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n), st, false));
            let lambda = pick(&[(1, 2), (2, 1), (9, 4), (3, 1)], idx / 3);
            let out = homogeneity_check(&x, &S::from_ratio(lambda.0, lambda.1))?;
            Ok(PointResult::from_outcome(x.to_json(), &out))
        }
        "taylor-pfaff" => {
            let n = pick(&[2, 4, 6, 8], idx);
            let nw = cfg.n_gen.unwrap_or(4);
            let x = convert::<S>(&random_spo(rng, space(0, n), nw, SpoOptions::default()));
            let y = convert::<S>(&random_spo(rng, space(0, n), nw, SpoOptions::default()));
            let lhs = taylor_pfaff_expand(x.d(), y.d())?;
            let rhs = pfaffian(&x.d().try_add(y.d())?)?;
            let point = json!({"X": x.d().to_json(), "Y": y.d().to_json()});
            Ok(PointResult::from_outcome(point, &CheckOutcome::new(lhs, rhs)))
        }
        "taylor-spf2" => {
            let (m, n) = pick(&[(2, 2), (4, 2), (2, 4)], idx);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n), (m, 0), false));
            let out = CheckOutcome::new(taylor_spf2_sum(&x)?, spf(&x)?.value);
            Ok(PointResult::from_outcome(x.to_json(), &out))
        }
        "wick" => {
            let (m, n) = pick(&shapes_all, idx);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n), (m, 0), true));
            let j = rng.gen_range(0..=full_mask(n));
            let r = j.count_ones();
            let extra = rng.gen_range(0..=1u32) * 2;
            let total = r + extra + (r % 2);
            let i = multi_indices(m, total - r);
            let i = if i.is_empty() { vec![0; m] } else { i[rng.gen_range(0..i.len())].clone() };
            let out = wick_check(&x, &i, j)?;
            Ok(PointResult::from_outcome(json!({"X": x.to_json(), "I": i, "J": j}), &out))
        }
        "klambda" => {
            let (m, n) = pick(&shapes_all, idx);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n), (m, 0), true));
            let i = S::imag_unit().expect("both suite rings carry 𝒊");
            let lambda = match S::from_c64(Complex64::new(0.3, 1.1)) {
                Some(l) if idx % 2 == 1 && !S::KIND.is_exact() => l,
                _ => i,
            };
            let out = k_lambda_check(&x, &lambda)?;
            Ok(PointResult::from_outcome(json!({"X": x.to_json(), "lambda": lambda.to_c64().to_string()}), &out))
        }
        "harmonic" => {
            let (m, n) = pick(&[(2, 0), (0, 2), (2, 2), (4, 2)], idx);
            let st = random_stratum(rng, m);
            let opts = SpoOptions { stratum: Some(st), invertible_d: false, density: SoulDensity::NONE };
            let x = convert::<Complex64>(&random_spo(rng, space(m, n), 0, opts));
            let r = harmonicity_check(&x)?;
            Ok(PointResult {
                rel_err: r.residual,
                point: x.to_json(),
                lhs: json!({"even": [r.even.re, r.even.im], "odd": [r.odd.re, r.odd.im]}),
                rhs: json!(0),
            })
        }
        "corollaries" => {
            let (m, n) = pick(&[(2, 2), (4, 2), (2, 4)], idx);
            let x = convert::<S>(&spo_point(rng, m, n, n_gen(cfg, n) + 2, (m, 0), true));
            let even_js: Vec<u64> = (0..=full_mask(n)).filter(|j| j.count_ones() % 2 == 0).collect();
            let j = even_js[rng.gen_range(0..even_js.len())];
            let r = rng.gen_range(0..=n as u32);
            let is = multi_indices(m, r);
            let i = is[rng.gen_range(0..is.len())].clone();
            let point = json!({"X": x.to_json(), "I": i, "J": j});
            Ok(PointResult::worst(vec![
                PointResult::from_outcome(point.clone(), &corollary_eq1(&x, j)?),
                PointResult::from_outcome(point, &corollary_eq2(&x, &i)?),
            ]))
        }
        "oracle" => {
            let (m, n) = pick(&[(2, 0), (0, 2), (2, 2), (4, 2)], idx);
            let nw = n_gen(cfg, n);
            let mut x = convert::<S>(&spo_point(rng, m, n, nw, (m, 0), false));
            if !S::KIND.is_exact() && idx % 2 == 1 {
                // Move into the tube 𝒱⁺ + 𝒊·spo.
                let y = convert::<S>(&random_spo(rng, space(m, n), nw, SpoOptions { density: SoulDensity::NONE, ..Default::default() }));
                let i = S::imag_unit().expect("complex ring");
                x = x.try_add(&y.scale(&(i * S::from_ratio(1, 3))))?;
            }
            let out = CheckOutcome::new(integrate_exp_mu(&x)?, spf(&x)?.value);
            Ok(PointResult::from_outcome(x.to_json(), &out))
        }
        "poisson" => {
            let (m, n) = pick(&[(2, 0), (0, 2), (2, 2), (4, 2)], idx);
            let nw = n_gen(cfg, n);
            let x = convert::<S>(&random_spo(rng, space(m, n), nw, SpoOptions::default()));
            let y = convert::<S>(&random_spo(rng, space(m, n), nw, SpoOptions::default()));
            let lhs = poisson_bracket(&moment_polynomial(&x)?, &moment_polynomial(&y)?)?;
            let rhs = moment_polynomial(&x.commutator(&y)?)?;
            let diff = lhs.try_sub(&rhs)?;
            let scale = lhs.terms().iter().chain(rhs.terms().iter()).map(|t| t.1.norm_inf()).fold(0.0, f64::max);
            let worst = diff.terms().iter().map(|t| t.1.norm_inf()).fold(0.0, f64::max);
            Ok(PointResult {
                rel_err: if scale > 1e-14 { worst / scale } else { worst },
                point: json!({"X": x.to_json(), "Y": y.to_json()}),
                lhs: json!(format!("{lhs:?}")),
                rhs: json!(format!("{rhs:?}")),
            })
        }
        "boundary" => boundary_point(idx, rng),
        "sl2-orbit" => {
            let c = Rational::new(rng.gen_range(-9i64..=9).max(1).into(), rng.gen_range(1i64..=5).into());
            let c = if idx % 2 == 1 { -c } else { c };
            let (a, b) = sl2_orbit_identity(&c)?;
            let to_s = |z: &GaussRational| WeilElement::<S>::constant(0, S::from_gauss(z).expect("finite"));
            let out = CheckOutcome::new(to_s(&a), to_s(&b));
            Ok(PointResult::from_outcome(json!({"c": c.to_string()}), &out))
        }
        "spo22" => spo22_point::<S>(rng),
        _ => unreachable!("suite names are validated"),
    }
}

fn boundary_point(idx: usize, rng: &mut ChaCha8Rng) -> Result<PointResult> {
    let y = convert::<Complex64>(&SuperMatrix::block_diag(space(2, 0), WeilMatrix::from_i64(2, 2, 0, &[0, 1, -1, 0]), WeilMatrix::zeros(0, 0, 0))?);
    if idx.is_multiple_of(2) {
        let c = pick(&[1i64, 2, -1, 3, -2], idx / 2);
        let x = convert::<Complex64>(&SuperMatrix::block_diag(space(2, 0), WeilMatrix::from_i64(2, 2, 0, &[0, -c, c, 0]), WeilMatrix::zeros(0, 0, 0))?);
        let probe = boundary_probe(&x, &y, &default_eps())?;
        let expect = Complex64::new(1.0 / c as f64, 0.0);
        let out = CheckOutcome::new(WeilElement::constant(0, probe.limit), WeilElement::constant(0, expect));
        return Ok(PointResult::from_outcome(json!({"c": c}), &out));
    }
    // A scalar spo(2,2) point on 𝒱_{1,1}, probed from 𝒱⁻ with zero odd-odd direction.
    let opts = SpoOptions { stratum: Some((1, 1)), invertible_d: false, density: SoulDensity::NONE };
    let x = convert::<Complex64>(&random_spo(rng, space(2, 2), 0, opts));
    let y22 = SuperMatrix::block_diag(space(2, 2), y.a().clone(), WeilMatrix::zeros(2, 2, 0))?;
    let probe = boundary_probe(&x, &y22, &default_eps())?;
    let out = CheckOutcome::new(WeilElement::constant(0, probe.limit), spf_closed(&x)?.value);
    Ok(PointResult::from_outcome(x.to_json(), &out))
}

/// A point of the standard spo(2,2) parametrization with `α, β, γ, δ` independent odd
/// generators and nilpotent parts on `a, b, c, d`.
fn spo22_point<S: Scalar>(rng: &mut ChaCha8Rng) -> Result<PointResult> {
    let nw = 12;
    let st = random_stratum(rng, 2);
    let body = sp_from_form(&random_symmetric_with_signature(rng, st.0, st.1), 0).body();
    let th = |i: u32| WeilElement::<Rational>::generator(nw, i);
    let soul = |rng: &mut ChaCha8Rng, i: u32| {
        let k = Rational::from_i64(rng.gen_range(-2..=2));
        (&th(i) * &th(i + 1)).scale(&k)
    };
    let lift = |v: &Rational| WeilElement::constant(nw, v.clone());
    let a = &lift(&body[0][0]) + &soul(rng, 4);
    let b = &lift(&body[0][1]) + &soul(rng, 6);
    let c = &lift(&body[1][0]) + &soul(rng, 8);
    let d = &WeilElement::from_i64(nw, rng.gen_range(-3..=3)) + &soul(rng, 10);
    let (al, be, ga, de) = (th(0), th(1), th(2), th(3));
    let am = WeilMatrix::from_rows(vec![vec![a.clone(), b], vec![c, -&a]], nw)?;
    let bm = WeilMatrix::from_rows(vec![vec![be.clone(), de.clone()], vec![-&al, -&ga]], nw)?;
    let cm = WeilMatrix::from_rows(vec![vec![-&al, -&be], vec![-&ga, -&de]], nw)?;
    let dm = WeilMatrix::from_rows(vec![vec![WeilElement::zero(nw), -&d], vec![d, WeilElement::zero(nw)]], nw)?;
    let x = convert::<S>(&SuperMatrix::new(space(2, 2), am, bm, cm, dm)?);
    let out = CheckOutcome::new(spf_closed(&x)?.value, spo22_formula(&x)?);
    Ok(PointResult::from_outcome(x.to_json(), &out))
}
