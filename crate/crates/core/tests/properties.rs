mod common;

use std::sync::Arc;

use gersten::abgroup::{smith_normal_form, AbHom, FgAbGroup, IntMatrix, Subquotient};
use gersten::cyclecx::{
    chain_from_json, chain_to_json, check_square_zero_random, chow, differential, pushforward,
    ChowMode, CycleChain,
};
use gersten::cyclemod::{check_premodule_coherences, report_passed, CycleModuleInstance};
use gersten::gfield::{canonical_field, norm_map, places_up_to, Embedding, Fe, Place, RatFunc};
use gersten::milnor::{
    lift_k2_to_symbols, normalize, residue_support, specialize, tame_symbol, Coefficients,
    FieldRef, MilnorElement, Symbol,
};
use gersten::schememod::{PointId, SchemeDescription};
use gersten::spectra::{random_filtered_complex, ExactCoupleData};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{b, field, poly};

fn matrix() -> impl Strategy<Value = IntMatrix> {
    (0usize..5, 0usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-6i64..=6, c), r).prop_map(move |rows| {
            if rows.is_empty() {
                IntMatrix::zeros(0, c)
            } else {
                IntMatrix::from_rows(&rows)
            }
        })
    })
}

fn orders() -> impl Strategy<Value = Vec<BigInt>> {
    prop::collection::vec(prop_oneof![Just(0i64), 2i64..7], 0..4)
        .prop_map(|v| v.into_iter().map(b).collect())
}

/// A nonzero rational function over `F_q(t)` from raw coefficients.
fn ratfunc() -> impl Strategy<Value = (u64, Vec<u32>, Vec<u32>)> {
    (
        prop::sample::select(vec![2u64, 3, 4, 5, 7, 9]),
        prop::collection::vec(any::<u32>(), 1..5),
        prop::collection::vec(any::<u32>(), 1..4),
    )
}

fn coeff_pair() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (
        prop::collection::vec(any::<u32>(), 1..4),
        prop::collection::vec(any::<u32>(), 1..3),
    )
}

fn build(k: &Arc<gersten::gfield::FiniteField>, num: &[u32], den: &[u32]) -> Option<RatFunc> {
    let (n, d) = (poly(k, num), poly(k, den));
    (!n.is_zero() && !d.is_zero()).then(|| RatFunc::new(n, d))
}

fn element(k: &Arc<gersten::gfield::FiniteField>, fs: Vec<RatFunc>) -> MilnorElement {
    normalize(&Symbol::new(FieldRef::Function(Arc::clone(k)), fs).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(m in matrix()) {
        let h = AbHom::new(FgAbGroup::free(m.cols()), FgAbGroup::free(m.rows()), m.clone()).unwrap();
        let (ker, _) = h.kernel();
        let (im, _) = h.image();
        prop_assert_eq!(ker.rank() + im.rank(), m.cols());
    }

    #[test]
    fn cokernel_two_ways(m in matrix()) {
        let h = AbHom::new(FgAbGroup::free(m.cols()), FgAbGroup::free(m.rows()), m.clone()).unwrap();
        let (coker, _) = h.cokernel();
        let inv = smith_normal_form(&m).invariants();
        let mut expected: Vec<BigInt> = inv.iter().filter(|d| **d != b(1)).cloned().collect();
        expected.extend(std::iter::repeat_n(b(0), m.rows() - inv.len()));
        prop_assert_eq!(&coker, &FgAbGroup::from_orders(&expected));
        let unit: Vec<Vec<BigInt>> = IntMatrix::identity(m.rows()).columns();
        let quotient = Subquotient::new(m.rows(), &unit, &m.columns()).unwrap();
        prop_assert_eq!(quotient.group(), &coker);
    }

    #[test]
    fn smith_is_idempotent(m in matrix()) {
        let s = smith_normal_form(&m);
        let again = smith_normal_form(&s.d);
        prop_assert_eq!(again.invariants(), s.invariants());
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    }

    #[test]
    fn presentations_are_canonical(o in orders()) {
        let g = FgAbGroup::from_orders(&o);
        let h = FgAbGroup::from_orders(&g.orders());
        prop_assert_eq!(g, h);
    }

    #[test]
    fn factorization_reassembles((q, c, _) in ratfunc()) {
        let k = field(q);
        let f = poly(&k, &c);
        prop_assume!(!f.is_zero());
        let (unit, factors) = f.factor().unwrap();
        let mut g = gersten::gfield::Poly::constant(&k, unit);
        for (pi, e) in &factors {
            prop_assert!(pi.is_monic() && pi.is_irreducible());
            g = g.mul(&pi.pow(*e));
        }
        prop_assert_eq!(g, f);
    }

    #[test]
    fn symbols_are_bilinear((q, a, d) in ratfunc(), (a2, d2) in coeff_pair(), (c, e) in coeff_pair()) {
        let k = field(q);
        let (Some(x), Some(y), Some(z)) = (build(&k, &a, &d), build(&k, &a2, &d2), build(&k, &c, &e)) else {
            return Ok(());
        };
        let lhs = element(&k, vec![x.mul(&y), z.clone()]);
        let rhs = element(&k, vec![x.clone(), z.clone()]).add(&element(&k, vec![y.clone(), z.clone()])).unwrap();
        prop_assert_eq!(lhs, rhs);
        let skew = element(&k, vec![x.clone(), z.clone()]).add(&element(&k, vec![z, x.clone()])).unwrap();
        prop_assert!(skew.is_zero());
        prop_assert!(element(&k, vec![x.clone(), x.neg()]).is_zero());
    }

    #[test]
    fn residues_vanish_off_the_support((q, a, d) in ratfunc(), (c, e) in coeff_pair()) {
        let k = field(q);
        let (Some(f), Some(g)) = (build(&k, &a, &d), build(&k, &c, &e)) else { return Ok(()); };
        for x in [element(&k, vec![f.clone()]), element(&k, vec![f, g])] {
            let support = residue_support(&x).unwrap();
            let mut probe = places_up_to(&k, 2);
            probe.push(Place::Infinity);
            for v in probe {
                let r = tame_symbol(&v, &x).unwrap();
                prop_assert_eq!(r.is_zero(), !support.contains(&v), "{} at {:?}", x, v);
            }
        }
    }

    #[test]
    fn elements_are_determined_by_residues((q, a, d) in ratfunc(), (c, e) in coeff_pair()) {
        let k = field(q);
        let (Some(f), Some(g)) = (build(&k, &a, &d), build(&k, &c, &e)) else { return Ok(()); };
        for x in [element(&k, vec![f.clone()]), element(&k, vec![f, g])] {
            let constant = specialize(&Place::Infinity, &x).unwrap().constant();
            let residues = residue_support(&x)
                .unwrap()
                .into_iter()
                .filter_map(|v| match &v {
                    Place::Finite(pi) => Some((pi.clone(), tame_symbol(&v, &x).unwrap().constant())),
                    Place::Infinity => None,
                })
                .collect();
            let rebuilt = MilnorElement::function(&k, x.degree(), constant, residues, Coefficients::Integral);
            prop_assert_eq!(&rebuilt, &x);
            if x.degree() == 2 {
                let again = lift_k2_to_symbols(&x)
                    .unwrap()
                    .into_iter()
                    .map(|(u, pi)| element(&k, vec![u, pi]))
                    .fold(MilnorElement::zero(x.field(), 2, Coefficients::Integral), |acc, y| acc.add(&y).unwrap());
                prop_assert_eq!(again, x);
            }
        }
    }

    #[test]
    fn norms_of_residues_cancel((q, a, d) in ratfunc(), (c, e) in coeff_pair()) {
        let k = field(q);
        let (Some(f), Some(g)) = (build(&k, &a, &d), build(&k, &c, &e)) else { return Ok(()); };
        let x = element(&k, vec![f, g]);
        let phi = CycleModuleInstance::milnor();
        let fq = FieldRef::Finite(Arc::clone(&k));
        let mut total = MilnorElement::finite(&k, 1, 0, Coefficients::Integral);
        for v in residue_support(&x).unwrap() {
            total = total.add(&phi.norm(&fq, &phi.residue(&v, &x).unwrap()).unwrap()).unwrap();
        }
        prop_assert!(total.is_zero(), "{}: {}", x, total);
    }

    #[test]
    fn reduction_commutes_with_structure_maps((q, a, d) in ratfunc(), (c, e) in coeff_pair(), l in 2u64..6) {
        let k = field(q);
        let (Some(f), Some(g)) = (build(&k, &a, &d), build(&k, &c, &e)) else { return Ok(()); };
        let (int, modl) = (CycleModuleInstance::milnor(), CycleModuleInstance::milnor_mod(l));
        let s = Symbol::new(FieldRef::Function(Arc::clone(&k)), vec![f, g]).unwrap();
        let x = int.normalize(&s).unwrap();
        prop_assert_eq!(modl.normalize(&s).unwrap(), modl.reduce(&x));
        let fq = FieldRef::Finite(Arc::clone(&k));
        for v in residue_support(&x).unwrap() {
            let r = int.residue(&v, &x).unwrap();
            prop_assert_eq!(modl.residue(&v, &modl.reduce(&x)).unwrap(), modl.reduce(&r));
            prop_assert_eq!(modl.norm(&fq, &modl.reduce(&r)).unwrap(), modl.reduce(&int.norm(&fq, &r).unwrap()));
            prop_assert_eq!(modl.specialize(&v, &modl.reduce(&x)).unwrap(), modl.reduce(&int.specialize(&v, &x).unwrap()));
        }
    }

    #[test]
    fn pushforward_kills_boundaries((q, a, d) in ratfunc(), (c, e) in coeff_pair()) {
        let k = field(q);
        let (Some(f), Some(g)) = (build(&k, &a, &d), build(&k, &c, &e)) else { return Ok(()); };
        let p1 = Arc::new(SchemeDescription::projective_line(&k));
        let phi = CycleModuleInstance::milnor();
        for x in [element(&k, vec![f.clone()]), element(&k, vec![f, g])] {
            let c = CycleChain::zero(&p1, &phi, 0, x.degree() as i64).with(PointId::Generic, x.clone()).unwrap();
            let dc = differential(&c).unwrap();
            prop_assert!(pushforward(&dc).unwrap().is_zero(), "{}", x);
            let back = chain_from_json(&chain_to_json(&dc), &p1, &phi).unwrap();
            prop_assert_eq!(back, dc);
        }
    }

    #[test]
    fn witnesses_are_sound(q in prop::sample::select(vec![2u64, 3, 5, 9]), coeffs in prop::collection::vec(-5i64..=5, 1..6)) {
        let k = field(q);
        let phi = CycleModuleInstance::milnor();
        let fq = FieldRef::Finite(Arc::clone(&k));
        for x in [SchemeDescription::projective_line(&k), SchemeDescription::affine_line(&k)] {
            let x = Arc::new(x);
            let places = places_up_to(&k, 2);
            let mut c = CycleChain::zero(&x, &phi, 1, 1);
            for (v, m) in places.iter().zip(&coeffs) {
                let term = CycleChain::zero(&x, &phi, 1, 1)
                    .with(PointId::Closed(v.clone()), MilnorElement::integer(&fq, *m, Coefficients::Integral))
                    .unwrap();
                c = c.add(&term).unwrap();
            }
            let r = chow(&x, &phi, 1, 1, ChowMode::Exact).unwrap();
            if let Some(w) = r.witness(&c).unwrap() {
                prop_assert_eq!(differential(&w).unwrap(), c);
            }
        }
    }

    #[test]
    fn line_configurations_square_to_zero(seed in any::<u64>()) {
        let report = check_square_zero_random(2, 4, &[3, 5], 3, seed).unwrap();
        prop_assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn coherences_hold_mod_l(seed in any::<u64>(), l in 2u64..5) {
        let report = check_premodule_coherences(&CycleModuleInstance::milnor_mod(l), 15, seed);
        prop_assert!(report_passed(&report), "{:?}", report);
    }

    #[test]
    fn spectral_pages_are_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fc = random_filtered_complex(&mut rng, 5, 3, 3);
        let s = fc.pages().unwrap();
        prop_assert!(s.converges());
        for w in s.pages.windows(2) {
            w[0].check_square_zero().unwrap();
            w[0].check_next(&w[1]).unwrap();
        }
        for k in fc.degrees() {
            for (p, g) in common::graded_by_images(&fc, k) {
                prop_assert_eq!(s.e_infinity().entry(p, k - p), g);
            }
        }
        let mut couple = ExactCoupleData::from_filtered(&fc).unwrap();
        for page in &s.pages {
            let derived = couple.page().unwrap();
            prop_assert_eq!(derived.entries(), page.entries());
            couple = couple.derive().unwrap();
        }
    }
}

#[test]
fn norm_of_inclusion_is_a_power() {
    for (p, e) in [(2u64, 12u32), (3, 6), (5, 4), (7, 2)] {
        let large = canonical_field(p, e).unwrap();
        for s in (1..=e).filter(|s| e % s == 0) {
            let small = canonical_field(p, s).unwrap();
            let emb = Embedding::new(&small, &large).unwrap();
            for x in small.elements().filter(|x| !x.is_zero()) {
                let n = norm_map(&small, &large, emb.apply(x)).unwrap();
                assert_eq!(n, small.pow(x, (e / s) as u64), "F_{p}^{s} in F_{p}^{e}");
            }
        }
    }
    assert_eq!(Fe::ONE, field(2).pow(Fe::ONE, 3));
}
