use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use super::*;
use crate::abgroup::FgAbGroup;
use crate::gfield::{canonical_field, Fe, Place, Poly, RatFunc};
use crate::parse::parse_ratfunc;
use crate::schememod::parse_linear_form;

fn k(q: u64) -> Arc<FiniteField> {
    crate::gfield::field_of_order(q).unwrap()
}

fn km() -> CycleModuleInstance {
    CycleModuleInstance::milnor()
}

fn k1(base: &Arc<FiniteField>, f: &str) -> MilnorElement {
    let f = parse_ratfunc(f, base, "t").unwrap();
    km().normalize(&Symbol::new(FieldRef::Function(Arc::clone(base)), vec![f]).unwrap())
        .unwrap()
}

fn generic_chain(x: &Arc<SchemeDescription>, i: i64, v: MilnorElement) -> CycleChain {
    CycleChain::zero(x, &km(), 0, i)
        .with(PointId::Generic, v)
        .unwrap()
}

fn closed(base: &Arc<FiniteField>, s: &str) -> PointId {
    PointId::Closed(crate::parse::parse_place(s, base, "t").unwrap())
}

fn k0(base: &Arc<FiniteField>, m: i64) -> ChainValue {
    ChainValue::Milnor(MilnorElement::finite(base, 0, m, Coefficients::Integral))
}

use crate::milnor::Coefficients;

fn lines(base: &Arc<FiniteField>, forms: &[&str]) -> Vec<LinearForm> {
    forms
        .iter()
        .map(|f| parse_linear_form(f, base, &["x", "y", "z"]).unwrap())
        .collect()
}

#[test]
fn valuation_at_a_closed_point() {
    let base = k(3);
    let a1 = SchemeDescription::affine_line(&base);
    let xi = ChainValue::Milnor(k1(&base, "t^2 - 1"));
    let y = closed(&base, "t - 1");
    let r = point_differential(&a1, &km(), &PointId::Generic, &y, &xi)
        .unwrap()
        .unwrap();
    assert_eq!(
        r,
        MilnorElement::finite(&base, 0, 1, Coefficients::Integral)
    );
}

#[test]
fn non_specialization_is_zero() {
    let base = k(3);
    let x = SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap();
    let lx = PointId::Line(lines(&base, &["x"])[0]);
    let off = PointId::Plane(crate::schememod::ProjPoint([Fe::ONE, Fe::ZERO, Fe::ZERO]));
    let xi = ChainValue::Milnor(k1(&base, "t"));
    let r = point_differential(&x, &km(), &lx, &off, &xi)
        .unwrap()
        .unwrap();
    assert!(r.is_zero());
}

#[test]
fn line_to_point_is_the_parameter_valuation() {
    // on V(x) the parameter is s with [0 : s : 1], so y/z restricts to s
    let base = k(3);
    let x = SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap();
    let l = lines(&base, &["x"])[0];
    let y_over_z = PlaneFunction::ratio(&base, lines(&base, &["y"])[0], lines(&base, &["z"])[0]);
    let restricted = y_over_z.restrict(&l);
    assert_eq!(restricted, RatFunc::t(&base));
    let xi = ChainValue::Milnor(k1(&base, "t"));
    let origin = PointId::Plane(crate::schememod::ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]));
    let r = point_differential(&x, &km(), &PointId::Line(l), &origin, &xi)
        .unwrap()
        .unwrap();
    assert_eq!(r.constant(), 1);
}

#[test]
fn divisors_on_lines() {
    let base = k(3);
    let a1 = Arc::new(SchemeDescription::affine_line(&base));
    let d = differential(&generic_chain(&a1, 1, k1(&base, "t^2 - 1"))).unwrap();
    let expect = CycleChain::zero(&a1, &km(), 1, 1)
        .with(closed(&base, "t - 1"), k0(&base, 1))
        .unwrap()
        .with(closed(&base, "t + 1"), k0(&base, 1))
        .unwrap();
    assert_eq!(d, expect);

    let p1 = Arc::new(SchemeDescription::projective_line(&base));
    let d = differential(&generic_chain(&p1, 1, k1(&base, "t^2 - 1"))).unwrap();
    let expect = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&base, "t - 1"), k0(&base, 1))
        .unwrap()
        .with(closed(&base, "t + 1"), k0(&base, 1))
        .unwrap()
        .with(PointId::Closed(Place::Infinity), k0(&base, -2))
        .unwrap();
    assert_eq!(d, expect);

    let top = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&base, "t"), k0(&base, 3))
        .unwrap();
    assert!(differential(&top).unwrap().is_zero());
}

#[test]
fn square_zero_on_coordinate_triangle() {
    let base = k(3);
    let x =
        Arc::new(SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap());
    let xi = parse_plane_symbol("{x/z, y/z}", &base).unwrap();
    let c = CycleChain::zero(&x, &km(), 0, 2)
        .with(PointId::Generic, ChainValue::Plane(xi))
        .unwrap();
    let ledger = square_zero_ledger(&c).unwrap();
    assert!(ledger.iter().all(|(_, _, total)| *total == 0));
    let origin = PointId::Plane(crate::schememod::ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]));
    let (_, parts, _) = ledger.iter().find(|(y, _, _)| *y == origin).unwrap();
    let mut values: Vec<i64> = parts.iter().map(|(_, v)| *v).collect();
    values.sort();
    assert_eq!(values, vec![-1, 1]);
    assert!(differential(&differential(&c).unwrap()).unwrap().is_zero());
}

#[test]
fn steinberg_symbol_has_zero_differential() {
    let base = k(3);
    let x = Arc::new(
        SchemeDescription::line_config(&base, lines(&base, &["x", "y", "x + 2y", "z"])).unwrap(),
    );
    let f = PlaneFunction::ratio(&base, lines(&base, &["x"])[0], lines(&base, &["y"])[0]);
    let g = f.one_minus().unwrap();
    let xi = PlaneSymbols::symbol(&base, vec![f, g]);
    let c = CycleChain::zero(&x, &km(), 0, 2)
        .with(PointId::Generic, ChainValue::Plane(xi))
        .unwrap();
    assert!(differential(&c).unwrap().is_zero());
}

#[test]
fn square_zero_random_configs() {
    let r = check_square_zero_random(40, 5, &[3, 5], 2, 7).unwrap();
    assert!(r.passed(), "{:?}", r.failures.first());
    assert!(r.checked_points > 0);
}

#[test]
fn square_zero_on_the_loaded_fixture() {
    let x = Arc::new(
        crate::schememod::load_abstract(include_str!("../../fixtures/A2_local_origin.json"))
            .unwrap(),
    );
    let r = check_square_zero(&x, &km(), 30, 3).unwrap();
    assert!(r.user_certified);
    assert!(r.passed());
    assert!(r.checked_points > 0);
}

#[test]
fn flipped_fixture_still_squares_to_zero() {
    let base = k(5);
    let x = Arc::new(
        SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z", "x + y + z"])).unwrap(),
    );
    let r = check_square_zero(&x, &CycleModuleInstance::flipped_residue_fixture(), 20, 1).unwrap();
    assert!(r.passed());
}

#[test]
fn chow_of_curves() {
    for q in [3u64, 5, 9] {
        let base = k(q);
        let p1 = Arc::new(SchemeDescription::projective_line(&base));
        let a1 = Arc::new(SchemeDescription::affine_line(&base));
        let r = chow(&p1, &km(), 1, 1, ChowMode::Exact).unwrap();
        assert_eq!(r.group, FgAbGroup::free(1));
        assert_eq!(r.to_string(), "Z (degree map)");
        assert_eq!(r.class(&r.generators[0]).unwrap(), vec![BigInt::from(1)]);
        assert!(chow(&a1, &km(), 1, 1, ChowMode::Exact)
            .unwrap()
            .group
            .is_trivial());
        assert_eq!(
            chow(&p1, &km(), 0, 1, ChowMode::Exact).unwrap().group,
            FgAbGroup::cyclic(q as i64 - 1)
        );
        assert_eq!(
            chow(&a1, &km(), 0, 0, ChowMode::Exact).unwrap().group,
            FgAbGroup::free(1)
        );
        assert_eq!(
            chow(&a1, &km(), 0, 1, ChowMode::Exact).unwrap().group,
            FgAbGroup::cyclic(q as i64 - 1)
        );
        assert!(chow(&a1, &km(), 0, 2, ChowMode::Exact)
            .unwrap()
            .group
            .is_trivial());
        assert_eq!(
            chow(&p1, &km(), 1, 2, ChowMode::Exact).unwrap().group,
            FgAbGroup::cyclic(q as i64 - 1)
        );
    }
}

#[test]
fn affine_witness_is_the_defining_polynomial() {
    let base = k(5);
    let a1 = Arc::new(SchemeDescription::affine_line(&base));
    let r = chow(&a1, &km(), 1, 1, ChowMode::Exact).unwrap();
    let c = CycleChain::zero(&a1, &km(), 1, 1)
        .with(closed(&base, "t - 2"), k0(&base, 3))
        .unwrap()
        .with(closed(&base, "t^2 + 2"), k0(&base, -1))
        .unwrap();
    let w = r.witness(&c).unwrap().unwrap();
    assert_eq!(differential(&w).unwrap(), c);
    let f = parse_ratfunc("(t - 2)^3 / (t^2 + 2)", &base, "t").unwrap();
    let expect = km()
        .normalize(&Symbol::new(FieldRef::Function(Arc::clone(&base)), vec![f]).unwrap())
        .unwrap();
    assert_eq!(
        w.components()[&PointId::Generic]
            .as_milnor()
            .unwrap()
            .residues(),
        expect.residues()
    );
}

#[test]
fn projective_witnesses_need_degree_zero() {
    let base = k(3);
    let p1 = Arc::new(SchemeDescription::projective_line(&base));
    let r = chow(&p1, &km(), 1, 1, ChowMode::Exact).unwrap();
    let deg0 = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&base, "t^2 + 1"), k0(&base, 1))
        .unwrap()
        .with(PointId::Closed(Place::Infinity), k0(&base, -2))
        .unwrap();
    let w = r.witness(&deg0).unwrap().unwrap();
    assert_eq!(differential(&w).unwrap(), deg0);
    let deg1 = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&base, "t"), k0(&base, 1))
        .unwrap();
    assert!(r.witness(&deg1).unwrap().is_none());
}

#[test]
fn dimension_two_exact_is_unsupported() {
    let base = k(3);
    let x =
        Arc::new(SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap());
    assert!(matches!(
        chow(&x, &km(), 2, 2, ChowMode::Exact),
        Err(CycleError::UnsupportedDimension(2))
    ));
    let r = chow(&x, &km(), 2, 2, ChowMode::Approximate).unwrap();
    assert_eq!(r.group, FgAbGroup::free(1));
    assert!(r.caveat.is_some());
}

#[test]
fn unramified_examples() {
    let f5 = k(5);
    let p1 = Arc::new(SchemeDescription::projective_line(&f5));
    let pt = Arc::new(SchemeDescription::point(&f5, 1));
    assert_eq!(
        unramified(&p1, &CycleModuleInstance::milnor_mod(2), 1).unwrap(),
        FgAbGroup::cyclic(2)
    );
    assert_eq!(unramified(&p1, &km(), 0).unwrap(), FgAbGroup::free(1));
    assert_eq!(unramified(&pt, &km(), 1).unwrap(), FgAbGroup::cyclic(4));
    let a1 = Arc::new(SchemeDescription::affine_line(&f5));
    assert!(matches!(
        unramified(&a1, &km(), 1),
        Err(CycleError::UnsupportedScheme(_))
    ));
}

#[test]
fn pushforward_examples() {
    let f5 = k(5);
    let p1 = Arc::new(SchemeDescription::projective_line(&f5));
    let t = parse_ratfunc("t", &f5, "t").unwrap();
    let t2 = parse_ratfunc("t - 2", &f5, "t").unwrap();
    let xi = km()
        .normalize(&Symbol::new(FieldRef::Function(Arc::clone(&f5)), vec![t, t2]).unwrap())
        .unwrap();
    let d = differential(&generic_chain(&p1, 2, xi)).unwrap();
    assert!(!d.is_zero());
    assert!(pushforward(&d).unwrap().is_zero());

    let one = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&f5, "t - 1"), k0(&f5, 1))
        .unwrap();
    let pushed = pushforward(&one).unwrap();
    assert_eq!(
        pushed.components()[&PointId::Generic]
            .as_milnor()
            .unwrap()
            .constant(),
        1
    );

    let kappa = canonical_field(5, 3).unwrap();
    let pi = crate::gfield::irreducibles_of_degree(&f5, 3)[0].clone();
    let v = ChainValue::Milnor(MilnorElement::finite(&kappa, 0, 1, Coefficients::Integral));
    let c = CycleChain::zero(&p1, &km(), 1, 1)
        .with(PointId::Closed(Place::Finite(pi)), v)
        .unwrap();
    assert_eq!(
        pushforward(&c).unwrap().components()[&PointId::Generic]
            .as_milnor()
            .unwrap()
            .constant(),
        3
    );

    let generic = generic_chain(
        &p1,
        0,
        MilnorElement::integer(
            &FieldRef::Function(Arc::clone(&f5)),
            1,
            Coefficients::Integral,
        ),
    );
    assert!(matches!(
        pushforward(&generic),
        Err(CycleError::UnsupportedMorphism(_))
    ));
}

#[test]
fn pullback_examples() {
    let f5 = k(5);
    let pt = Arc::new(SchemeDescription::point(&f5, 1));
    let a1 = Arc::new(SchemeDescription::affine_line(&f5));
    let c = CycleChain::zero(&pt, &km(), 0, 1)
        .with(
            PointId::Generic,
            MilnorElement::finite(&f5, 1, 3, Coefficients::Integral),
        )
        .unwrap();
    let pulled = pullback_flat(&a1, &c).unwrap();
    let v = pulled.components()[&PointId::Generic].as_milnor().unwrap();
    assert_eq!(v.constant(), 3);
    assert!(v.residues().is_empty());
    assert!(differential(&pulled).unwrap().is_zero());

    let origin = Place::rational(&f5, Fe::ZERO);
    let u = Arc::new(SchemeDescription::affine_line_minus(
        &f5,
        vec![origin.clone()],
    ));
    let c = CycleChain::zero(&a1, &km(), 1, 1)
        .with(PointId::Closed(origin), k0(&f5, 1))
        .unwrap()
        .with(closed(&f5, "t - 1"), k0(&f5, 2))
        .unwrap();
    let r = pullback_flat(&u, &c).unwrap();
    assert_eq!(r.components().len(), 1);
    assert!(r.components().contains_key(&closed(&f5, "t - 1")));

    // pullback then pushforward of a generic class is rejected
    let p1 = Arc::new(SchemeDescription::projective_line(&f5));
    let one = CycleChain::zero(&pt, &km(), 0, 0)
        .with(
            PointId::Generic,
            MilnorElement::finite(&f5, 0, 1, Coefficients::Integral),
        )
        .unwrap();
    let up = pullback_flat(&p1, &one).unwrap();
    assert!(matches!(
        pushforward(&up),
        Err(CycleError::UnsupportedMorphism(_))
    ));
}

#[test]
fn pullback_commutes_with_d_on_open_immersion() {
    let f3 = k(3);
    let a1 = Arc::new(SchemeDescription::affine_line(&f3));
    let u = Arc::new(SchemeDescription::affine_line_minus(
        &f3,
        vec![Place::rational(&f3, Fe::ZERO)],
    ));
    let c = generic_chain(&a1, 1, k1(&f3, "t^3 (t + 1) / (t^2 + 1)"));
    let lhs = differential(&pullback_flat(&u, &c).unwrap()).unwrap();
    let rhs = pullback_flat(&u, &differential(&c).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn action_of_points() {
    let f3 = k(3);
    let p1 = Arc::new(SchemeDescription::projective_line(&f3));
    let fundamental = generic_chain(
        &p1,
        0,
        MilnorElement::integer(
            &FieldRef::Function(Arc::clone(&f3)),
            1,
            Coefficients::Integral,
        ),
    );
    let pt = CycleChain::zero(&p1, &km(), 1, 1)
        .with(closed(&f3, "t - 1"), k0(&f3, 1))
        .unwrap();
    assert_eq!(ch_action(&pt, &fundamental).unwrap(), pt);

    let pt2 = CycleChain::zero(&p1, &km(), 1, 1)
        .with(PointId::Closed(Place::Infinity), k0(&f3, 2))
        .unwrap();
    let sum = pt.add(&pt2).unwrap();
    let lhs = ch_action(&sum, &fundamental).unwrap();
    let rhs = ch_action(&pt, &fundamental)
        .unwrap()
        .add(&ch_action(&pt2, &fundamental).unwrap())
        .unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn action_of_principal_divisors_lands_in_boundaries() {
    let f5 = k(5);
    let p1 = Arc::new(SchemeDescription::projective_line(&f5));
    let div = differential(&generic_chain(&p1, 1, k1(&f5, "(t^2 + 2) / (t - 3)^2"))).unwrap();
    let constant = generic_chain(
        &p1,
        1,
        MilnorElement::function(&f5, 1, 3, BTreeMap::new(), Coefficients::Integral),
    );
    let acted = ch_action(&div, &constant).unwrap();
    assert!(!acted.is_zero());
    let r = chow(&p1, &km(), 1, 2, ChowMode::Exact).unwrap();
    let w = r.witness(&acted).unwrap().expect("boundary");
    assert_eq!(differential(&w).unwrap(), acted);
}

#[test]
fn bounded_complex_of_p1() {
    let f3 = k(3);
    let p1 = Arc::new(SchemeDescription::projective_line(&f3));
    let bc = bounded_complex(&p1, &km(), 1, 2).unwrap();
    assert_eq!(bc.cohomology(0).unwrap(), FgAbGroup::cyclic(2));
    assert_eq!(bc.cohomology(1).unwrap(), FgAbGroup::free(1));
    // the matrix agrees with the differential on each basis vector
    for (j, (p, e)) in bc.terms[0].basis.iter().enumerate() {
        let d = differential(
            &CycleChain::zero(&p1, &km(), 0, 1)
                .with(p.clone(), e.clone())
                .unwrap(),
        )
        .unwrap();
        for (i, (target, _)) in bc.terms[1].basis.iter().enumerate() {
            let v = d
                .components()
                .get(target)
                .map(|v| v.as_milnor().unwrap().constant())
                .unwrap_or(0);
            assert_eq!(bc.differentials[0].get(i, j), &BigInt::from(v));
        }
    }
}

#[test]
fn chain_json_round_trip() {
    let f9 = k(9);
    let p1 = Arc::new(SchemeDescription::projective_line(&f9));
    let c = generic_chain(&p1, 1, k1(&f9, "(t^2 + a) / t^3"));
    let d = differential(&c).unwrap();
    for chain in [&c, &d] {
        let text = chain_to_json(chain);
        assert_eq!(&chain_from_json(&text, &p1, &km()).unwrap(), chain);
    }
    let base = k(5);
    let x =
        Arc::new(SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap());
    let xi = parse_plane_symbol("{x/z, 2y/z}", &base).unwrap();
    let c = CycleChain::zero(&x, &km(), 0, 2)
        .with(PointId::Generic, ChainValue::Plane(xi))
        .unwrap();
    for chain in [
        c.clone(),
        differential(&c).unwrap(),
        differential(&differential(&c).unwrap()).unwrap(),
    ] {
        let text = chain_to_json(&chain);
        assert_eq!(chain_from_json(&text, &x, &km()).unwrap(), chain);
    }
}

#[test]
fn rejects_foreign_lines() {
    let base = k(3);
    let x =
        Arc::new(SchemeDescription::line_config(&base, lines(&base, &["x", "y", "z"])).unwrap());
    let xi = parse_plane_symbol("{x/(x + y), y/z}", &base).unwrap();
    assert!(CycleChain::zero(&x, &km(), 0, 2)
        .with(PointId::Generic, ChainValue::Plane(xi))
        .is_err());
}

#[test]
fn missing_fiber_is_reported() {
    let doc = r#"{"dimension":1,
        "points":[{"id":"g","codim":0,"residue_field":{"function_field_over":{"p":3,"e":1},"vars":["t"]}},
                  {"id":"c","codim":1,"residue_field":{"p":3,"e":1}}],
        "incidences":[{"x":"g","y":"c"}]}"#;
    let x = Arc::new(crate::schememod::load_abstract(doc).unwrap());
    let base = k(3);
    let c = CycleChain::zero(&x, &km(), 0, 1)
        .with(PointId::Named("g".into()), k1(&base, "t"))
        .unwrap();
    assert!(matches!(
        differential(&c),
        Err(CycleError::MissingFiber(..))
    ));
    let _ = Poly::x(&base);
}
