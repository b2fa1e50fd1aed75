//! Randomized invariants of the linear-algebra, Poisson, Gaussian and superPfaffian layers.
//!
//! Points come from the crate's own seeded generators, so proptest drives the seed and the
//! shape while the identities are checked exactly over the rationals.

use proptest::prelude::*;
use superpfaff::berezin::{gaussian_moment, integrate, GaussianIntegrand};
use superpfaff::random::{
    point_rng, random_gl, random_soul, random_spo, random_spo_group, random_symmetric_with_signature, SoulDensity,
    SpoOptions,
};
use superpfaff::spf::{
    conj_check, homogeneity_check, k_lambda_check, orientation_flip_check, spf, spf_closed, square_check,
};
use superpfaff::superlinalg::{even_det, even_det_leibniz, even_inverse, inertia, pfaffian, SuperMatrix, WeilMatrix};
use superpfaff::superspace::{moment, moment_polynomial, poisson_bracket, SuperPolynomial, SymplecticSuperSpace};
use superpfaff::{GaussRational, Rational, Scalar, WeilElement};

type Q = Rational;
type G = GaussRational;
type W = WeilElement<Q>;

const SHAPES: [(usize, usize); 4] = [(2, 0), (0, 2), (2, 2), (4, 2)];

fn space(m: usize, n: usize) -> SymplecticSuperSpace {
    SymplecticSuperSpace::new(m, n).unwrap()
}

fn gauss(x: &SuperMatrix<Q>) -> SuperMatrix<G> {
    x.map_ring(|e| Ok(e.map_scalars(G::from_rational))).unwrap()
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(SHAPES.to_vec())
}

/// A Weil point of `V`: even coordinates with nonzero bodies, odd coordinates odd.
fn weil_vector(seed: u64, m: usize, n: usize, nw: u32) -> Vec<W> {
    let mut rng = point_rng(seed, 77);
    let dense = SoulDensity { fill: 1.0, max_terms: 2 };
    (0..m + n)
        .map(|k| {
            let soul = random_soul(&mut rng, nw, k >= m, dense);
            if k < m {
                &soul + &W::from_i64(nw, k as i64 - 1)
            } else {
                soul
            }
        })
        .collect()
}

fn apply(g: &SuperMatrix<Q>, v: &[W]) -> Vec<W> {
    let nw = g.n_gen();
    g.full_rows().iter().map(|r| r.iter().zip(v).fold(W::zero(nw), |acc, (a, b)| &acc + &(a * b))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moment_is_natural_under_the_adjoint(seed in any::<u64>(), (m, n) in shape()) {
        let nw = n as u32 + 3;
        let x = random_spo(&mut point_rng(seed, 0), space(m, n), nw, SpoOptions::default());
        let g = random_gl(&mut point_rng(seed, 1), space(m, n), nw, SoulDensity::default());
        let v = weil_vector(seed, m, n, nw);
        let twisted = g.adjoint_star().try_mul(&x).unwrap().try_mul(&g).unwrap();
        prop_assert_eq!(moment(&x, &apply(&g, &v)).unwrap(), moment(&twisted, &v).unwrap());
    }

    #[test]
    fn poisson_bracket_of_moments(seed in any::<u64>(), (m, n) in shape()) {
        let nw = 4;
        let pts: Vec<SuperMatrix<Q>> = (0..3).map(|k| random_spo(&mut point_rng(seed, k), space(m, n), nw, SpoOptions::default())).collect();
        let mus: Vec<SuperPolynomial<Q>> = pts.iter().map(|x| moment_polynomial(x).unwrap()).collect();
        let br = |a: &SuperPolynomial<Q>, b: &SuperPolynomial<Q>| poisson_bracket(a, b).unwrap();
        let (p, q, r) = (&mus[0], &mus[1], &mus[2]);

        // Graded antisymmetry and Jacobi on even quadratics.
        prop_assert_eq!(br(p, q), -&br(q, p));
        let jacobi = br(p, &br(q, r)).try_add(&br(q, &br(r, p))).unwrap().try_add(&br(r, &br(p, q))).unwrap();
        prop_assert!(jacobi.is_zero());
        // Leibniz.
        let qr = q.try_mul(r).unwrap();
        prop_assert_eq!(br(p, &qr), br(p, q).try_mul(r).unwrap().try_add(&q.try_mul(&br(p, r)).unwrap()).unwrap());
        // Morphism onto the moment of the commutator.
        prop_assert_eq!(br(p, q), moment_polynomial(&pts[0].commutator(&pts[1]).unwrap()).unwrap());
    }

    #[test]
    fn pfaffian_transforms_by_the_determinant(seed in any::<u64>(), half in 1usize..=3) {
        let r = 2 * half;
        let nw = 4;
        let x = random_spo(&mut point_rng(seed, 0), space(0, r), nw, SpoOptions::default());
        let g = random_gl(&mut point_rng(seed, 1), space(0, r), nw, SoulDensity::default());
        let (mm, gg) = (x.d(), g.d());
        let lhs = pfaffian(&gg.transpose().try_mul(mm).unwrap().try_mul(gg).unwrap()).unwrap();
        prop_assert_eq!(lhs, &even_det(gg).unwrap() * &pfaffian(mm).unwrap());
    }

    #[test]
    fn determinant_routes_agree(seed in any::<u64>(), r in 1usize..=4) {
        let g = random_gl(&mut point_rng(seed, 2), space(0, r), 5, SoulDensity::default());
        let a = g.d();
        prop_assert_eq!(even_det(a).unwrap(), even_det_leibniz(a));
        prop_assert_eq!(even_inverse(a).unwrap().try_mul(a).unwrap(), WeilMatrix::identity(r, 5));
    }

    #[test]
    fn berezinians_are_adjoint_invariant(seed in any::<u64>(), (m, n) in shape()) {
        let g = random_gl(&mut point_rng(seed, 3), space(m, n), n as u32 + 3, SoulDensity::default());
        let gs = g.adjoint_star();
        prop_assert_eq!(gs.berezinian().unwrap(), g.berezinian().unwrap());
        prop_assert_eq!(gs.berezinian_10().unwrap(), g.berezinian_10().unwrap());
        prop_assert_eq!(gs.adjoint_star(), g);
    }

    #[test]
    fn group_points_have_unit_berezinian(seed in any::<u64>(), (m, n) in shape(), reflect in any::<bool>()) {
        let nw = n as u32 + 2;
        let g = random_spo_group(&mut point_rng(seed, 4), space(m, n), nw, reflect, SoulDensity::default());
        prop_assert!(g.is_spo_group());
        let odd_det = even_det(&g.d().body_matrix()).unwrap();
        let expect = W::from_i64(nw, if reflect && n > 0 { -1 } else { 1 });
        prop_assert_eq!(&odd_det, &expect);
        prop_assert_eq!(g.berezinian().unwrap(), expect.clone());
        prop_assert_eq!(g.berezinian_10().unwrap(), expect);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), (m, n) in shape()) {
        let g = random_gl(&mut point_rng(seed, 5), space(m, n), 4, SoulDensity::default());
        let p = g.project_spo();
        prop_assert!(p.is_spo());
        prop_assert_eq!(p.project_spo(), p);
    }

    #[test]
    fn signature_is_a_congruence_invariant(seed in any::<u64>(), half in 1usize..=2, p_frac in 0usize..=4) {
        let m = 2 * half;
        let p = p_frac.min(m);
        let s = random_symmetric_with_signature(&mut point_rng(seed, 6), p, m - p);
        let g = random_spo_group(&mut point_rng(seed, 7), space(m, 0), 0, false, SoulDensity::NONE);
        let sm = WeilMatrix::from_scalars(m, m, 0, &s.iter().flatten().cloned().collect::<Vec<_>>());
        let conj = g.a().transpose().try_mul(&sm).unwrap().try_mul(g.a()).unwrap().body();
        prop_assert_eq!(inertia(&s).unwrap(), (p, m - p));
        prop_assert_eq!(inertia(&conj).unwrap(), (p, m - p));
    }

    #[test]
    fn gaussian_normalization_and_isserlis(seed in any::<u64>(), half in 1usize..=2) {
        let m = 2 * half;
        let nw = 4;
        let form = random_symmetric_with_signature(&mut point_rng(seed, 8), m, 0);
        let mut s = WeilMatrix::from_scalars(m, m, nw, &form.iter().flatten().cloned().collect::<Vec<_>>());
        let mut rng = point_rng(seed, 9);
        for a in 0..m {
            for b in a..m {
                let e = &s.get(a, b).clone() + &random_soul(&mut rng, nw, false, SoulDensity::default());
                s.set(a, b, e.clone());
                s.set(b, a, e);
            }
        }
        let z = gaussian_moment(&vec![0; m], &s).unwrap();
        prop_assert_eq!(&(&z * &z) * &even_det(&s).unwrap(), W::one(nw));
        let cov = even_inverse(&s).unwrap();
        for (a, b) in [(0, 1), (0, 0), (1, m - 1)] {
            let mut i = vec![0u32; m];
            i[a] += 1;
            i[b] += 1;
            prop_assert_eq!(gaussian_moment(&i, &s).unwrap(), cov.get(a, b) * &z);
        }
    }

    #[test]
    fn integration_is_linear_in_the_prefactor(seed in any::<u64>(), (m, n) in shape()) {
        let nw = n as u32 + 2;
        let sp = space(m, n);
        let form = random_symmetric_with_signature(&mut point_rng(seed, 10), m, 0);
        let s = WeilMatrix::from_scalars(m, m, nw, &form.iter().flatten().cloned().collect::<Vec<_>>());
        let x = random_spo(&mut point_rng(seed, 11), sp, nw, SpoOptions::default());
        let y = random_spo(&mut point_rng(seed, 12), sp, nw, SpoOptions::default());
        let (p, q) = (moment_polynomial(&x).unwrap(), moment_polynomial(&y).unwrap());
        let c = Q::new(3.into(), 5.into());
        let int = |f: SuperPolynomial<Q>| integrate(&GaussianIntegrand::new(sp, s.clone(), None, f).unwrap()).unwrap();
        let lhs = int(p.try_add(&q.scale(&c)).unwrap());
        prop_assert_eq!(lhs, &int(p) + &int(q).scale(&c));
    }

    #[test]
    fn superpfaffian_square_and_signs(seed in any::<u64>(), (m, n) in shape(), p_frac in 0usize..=4) {
        let p = p_frac.min(m);
        let opts = SpoOptions { stratum: Some((p, m - p)), ..Default::default() };
        let x = gauss(&random_spo(&mut point_rng(seed, 13), space(m, n), n as u32 + 4, opts));
        prop_assert!(square_check(&x).unwrap().holds_exactly());
        prop_assert!(orientation_flip_check(&x).unwrap().holds_exactly());
        prop_assert!(conj_check(&x).unwrap().holds_exactly());
        let lambda = G::new(Q::new(9.into(), 4.into()), Q::from_i64(0));
        prop_assert!(homogeneity_check(&x, &lambda).unwrap().holds_exactly());
        prop_assert_eq!(spf(&x).unwrap().stratum, (p, m - p));
    }

    #[test]
    fn k_lambda_at_i_is_one(seed in any::<u64>(), (m, n) in shape()) {
        let opts = SpoOptions { stratum: Some((m, 0)), invertible_d: true, ..Default::default() };
        let x = gauss(&random_spo(&mut point_rng(seed, 14), space(m, n), n as u32 + 4, opts));
        let out = k_lambda_check(&x, &G::new(Q::from_i64(0), Q::from_i64(1))).unwrap();
        prop_assert!(out.holds_exactly());
        prop_assert_eq!(out.rhs, WeilElement::one(x.n_gen()));
    }

    #[test]
    fn closed_form_matches_the_oracle(seed in any::<u64>(), (m, n) in shape()) {
        let opts = SpoOptions { stratum: Some((m, 0)), ..Default::default() };
        let x = gauss(&random_spo(&mut point_rng(seed, 15), space(m, n), n as u32 + 4, opts));
        prop_assert_eq!(superpfaff::berezin::integrate_exp_mu(&x).unwrap(), spf_closed(&x).unwrap().value);
    }
}
