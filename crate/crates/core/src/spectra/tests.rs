use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::abgroup::{homology_at, Subquotient};
use crate::gfield::field_of_order;
use crate::schememod::SchemeDescription;

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

/// `gr^p H^k` via images of `H^k(F^p C) -> H^k(C)`, computed on the
/// subcomplexes themselves.
fn graded_by_images(fc: &FilteredComplex, k: i64) -> Vec<(i64, FgAbGroup)> {
    let (lo, hi) = fc.level_range().unwrap_or((0, 0));
    let ranks = |j: i64| fc.term(j).map_or(0, |t| t.rank());
    let total = homology_at(
        &vec![b(0); ranks(k)],
        &fc.d(k - 1),
        &fc.d(k),
        &vec![b(0); ranks(k + 1)],
    )
    .unwrap();
    let keep = |j: i64, p: i64| -> Vec<usize> {
        fc.term(j).map_or(Vec::new(), |t| {
            (0..t.rank()).filter(|&i| t.levels[i] >= p).collect()
        })
    };
    let restrict = |m: &IntMatrix, rows: &[usize], cols: &[usize]| {
        let mut out = IntMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                out.set(a, c, m.get(i, j).clone());
            }
        }
        out
    };
    let mut images = Vec::new();
    for p in lo..=hi + 1 {
        let (c0, c1, c2) = (keep(k - 1, p), keep(k, p), keep(k + 1, p));
        let sub = homology_at(
            &vec![b(0); c1.len()],
            &restrict(&fc.d(k - 1), &c1, &c0),
            &restrict(&fc.d(k), &c2, &c1),
            &vec![b(0); c2.len()],
        )
        .unwrap();
        let mut incl = IntMatrix::zeros(ranks(k), c1.len());
        for (c, &i) in c1.iter().enumerate() {
            incl.set(i, c, b(1));
        }
        let h = AbHom::between(&sub, &total, &incl).unwrap();
        images.push((p, h.image_subgroup()));
    }
    let n = total.group().num_gens();
    let rel = total.group().relation_vectors();
    (0..images.len())
        .map(|j| {
            let mut s = images[j].1.generators();
            s.extend(rel.iter().cloned());
            let mut r = images.get(j + 1).map_or(Vec::new(), |x| x.1.generators());
            r.extend(rel.iter().cloned());
            (
                images[j].0,
                Subquotient::new(n, &s, &r).unwrap().group().clone(),
            )
        })
        .collect()
}

#[test]
fn one_step_filtration() {
    let d = IntMatrix::from_rows(&[vec![2i64, 0], vec![0, 3]]);
    let fc = FilteredComplex::new(
        0,
        vec![
            FilteredTerm::free(vec![0, 0]),
            FilteredTerm::free(vec![0, 0]),
        ],
        vec![d],
    )
    .unwrap();
    let s = fc.pages().unwrap();
    assert_eq!(s.pages.len(), 1);
    assert_eq!(s.pages[0].entry(0, 1), FgAbGroup::cyclic(6));
    assert_eq!(s.pages[0].entry(0, 0), FgAbGroup::zero());
    assert_eq!(fc.homology(1).unwrap(), FgAbGroup::cyclic(6));
    assert!(s.converges());
}

#[test]
fn two_step_filtration_has_a_d1() {
    // Z(level 0) --2--> Z(level 1)
    let fc = FilteredComplex::new(
        0,
        vec![FilteredTerm::free(vec![0]), FilteredTerm::free(vec![1])],
        vec![IntMatrix::from_rows(&[vec![2i64]])],
    )
    .unwrap();
    let s = fc.pages().unwrap();
    assert_eq!(s.pages[0].entry(0, 0), FgAbGroup::free(1));
    assert_eq!(s.pages[0].entry(1, 0), FgAbGroup::free(1));
    assert!(!s.pages[0].all_differentials_zero());
    assert_eq!(s.pages[1].entry(1, 0), FgAbGroup::cyclic(2));
    assert_eq!(s.pages[1].entry(0, 0), FgAbGroup::zero());
}

#[test]
fn d2_appears_across_two_levels() {
    // a at level 0, b at level 1, c at level 2 in degree 0; d sends a to e
    // at level 2 in degree 1 and nothing else: a d_2
    let d = IntMatrix::from_rows(&[vec![1i64]]);
    let fc = FilteredComplex::new(
        0,
        vec![FilteredTerm::free(vec![0]), FilteredTerm::free(vec![2])],
        vec![d],
    )
    .unwrap();
    let s = fc.pages().unwrap();
    assert_eq!(s.pages.len(), 3);
    assert!(s.pages[0].all_differentials_zero());
    assert!(!s.pages[1].all_differentials_zero());
    assert!(s.e_infinity().entries().is_empty());
}

#[test]
fn torsion_terms() {
    // Z/4 --2--> Z/4 with levels 0 and 1
    let fc = FilteredComplex::new(
        0,
        vec![
            FilteredTerm {
                orders: vec![b(4)],
                levels: vec![0],
            },
            FilteredTerm {
                orders: vec![b(4)],
                levels: vec![1],
            },
        ],
        vec![IntMatrix::from_rows(&[vec![2i64]])],
    )
    .unwrap();
    let s = fc.pages().unwrap();
    assert_eq!(s.e_infinity().entry(0, 0), FgAbGroup::cyclic(2));
    assert_eq!(s.e_infinity().entry(1, 0), FgAbGroup::cyclic(2));
    assert!(s.converges());
}

#[test]
fn random_complexes_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut higher = 0;
    for _ in 0..60 {
        let fc = random_filtered_complex(&mut rng, 6, 4, 4);
        let s = fc.pages().unwrap();
        assert!(s.converges());
        higher += s
            .pages
            .iter()
            .skip(1)
            .filter(|p| !p.all_differentials_zero())
            .count();
        for k in fc.degrees() {
            for (p, g) in graded_by_images(&fc, k) {
                assert_eq!(s.e_infinity().entry(p, k - p), g, "degree {k}, level {p}");
            }
            assert_eq!(s.abutment[&k].total(), Some(&fc.homology(k).unwrap()));
        }
    }
    assert!(higher > 0);
}

#[test]
fn derived_couples_reproduce_pages() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..25 {
        let fc = random_filtered_complex(&mut rng, 4, 3, 3);
        let s = fc.pages().unwrap();
        let mut couple = ExactCoupleData::from_filtered(&fc).unwrap();
        for page in &s.pages {
            let from_couple = couple.page().unwrap();
            assert_eq!(from_couple.entries(), page.entries(), "page {}", page.r);
            couple = couple.derive().unwrap();
        }
    }
}

#[test]
fn couple_with_zero_differential() {
    let fc = FilteredComplex::new(
        0,
        vec![
            FilteredTerm::free(vec![0, 1]),
            FilteredTerm::free(vec![0, 1]),
        ],
        vec![IntMatrix::zeros(2, 2)],
    )
    .unwrap();
    let c = ExactCoupleData::from_filtered(&fc).unwrap();
    let e1 = c.page().unwrap();
    assert!(e1.all_differentials_zero());
    let e2 = c.derive().unwrap().page().unwrap();
    assert_eq!(e1.entries(), e2.entries());
}

#[test]
fn broken_couple_is_rejected() {
    // D = Z at (0,0), E = Z at (0,0), beta = 2: not exact at E
    let window = [(0, 0), (1, -1), (1, 0)].into_iter().collect();
    let mut d = BTreeMap::new();
    d.insert((0, 0), FgAbGroup::free(1));
    let mut e = BTreeMap::new();
    e.insert((0, 0), FgAbGroup::free(1));
    let mut beta = BTreeMap::new();
    beta.insert(
        (0, 0),
        AbHom::new(
            FgAbGroup::free(1),
            FgAbGroup::free(1),
            IntMatrix::from_rows(&[vec![2i64]]),
        )
        .unwrap(),
    );
    let r = ExactCoupleData::new(1, window, d, e, BTreeMap::new(), beta, BTreeMap::new());
    assert!(matches!(r, Err(SpectraError::ExactnessViolation { .. })));
}

#[test]
fn shifted_filtration_shifts_pages() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fc = random_filtered_complex(&mut rng, 5, 3, 3);
    let a = fc.pages().unwrap();
    let b = fc.shifted(2).pages().unwrap();
    assert_eq!(a.pages.len(), b.pages.len());
    for (x, y) in a.pages.iter().zip(&b.pages) {
        let moved: BTreeMap<_, _> = x
            .entries()
            .iter()
            .map(|(&(p, q), g)| ((p + 2, q - 2), g.clone()))
            .collect();
        assert_eq!(&moved, y.entries());
    }
}

#[test]
fn invalid_complexes() {
    let one = || FilteredTerm::free(vec![0]);
    let dd = FilteredComplex::new(
        0,
        vec![one(), one(), one()],
        vec![
            IntMatrix::from_rows(&[vec![1i64]]),
            IntMatrix::from_rows(&[vec![1i64]]),
        ],
    );
    assert!(matches!(dd, Err(SpectraError::NotAComplex(_))));
    let down = FilteredComplex::new(
        0,
        vec![FilteredTerm::free(vec![1]), FilteredTerm::free(vec![0])],
        vec![IntMatrix::from_rows(&[vec![1i64]])],
    );
    assert!(matches!(down, Err(SpectraError::NotFiltered(_))));
    let missing = FilteredComplex::new(
        0,
        vec![FilteredTerm {
            orders: vec![b(0), b(0)],
            levels: vec![0],
        }],
        vec![],
    );
    assert!(matches!(missing, Err(SpectraError::NotExhaustive(_))));
}

fn curve(q: u64, projective: bool) -> Arc<SchemeDescription> {
    let k = field_of_order(q).unwrap();
    Arc::new(if projective {
        SchemeDescription::projective_line(&k)
    } else {
        SchemeDescription::affine_line(&k)
    })
}

#[test]
fn coniveau_of_the_projective_line() {
    for q in [2u64, 3, 5] {
        let x = curve(q, true);
        let s = assemble_coniveau(&x, Realization::Motivic, 1, 2).unwrap();
        assert_eq!(s.pages.len(), 2);
        let e2 = &s.pages[1];
        assert_eq!(e2.entry(1, 1), FgAbGroup::free(1));
        assert_eq!(e2.entry(0, 1), FgAbGroup::cyclic(q as i64 - 1));
        for p in 0..3 {
            for qq in 2..4 {
                assert!(s.pages[0].entry(p, qq).is_trivial());
            }
        }
        for (p, t) in s.row.terms.iter().enumerate() {
            assert_eq!(s.pages[0].entry(p as i64, 1), t.group());
        }
        assert!(s.caveats.is_empty());
        let f = coniveau_filtration_report(&s.pages, 2, "N").unwrap();
        assert_eq!(f.step(1).unwrap().group, Some(FgAbGroup::free(1)));
        assert_eq!(f.step(2).unwrap().group, Some(FgAbGroup::zero()));
        assert!(coniveau_filtration_report(&s.pages[..1], 2, "N").is_err());
    }
}

#[test]
fn coniveau_agrees_with_the_filtered_complex() {
    let x = curve(3, true);
    let fc = coniveau_filtered_complex(&x, 1, 2).unwrap();
    let direct = fc.pages().unwrap();
    let s = assemble_coniveau(&x, Realization::Motivic, 1, 2).unwrap();
    for (a, b) in direct.pages.iter().zip(&s.pages) {
        assert_eq!(a.entries(), b.entries());
    }
    let e2 = ExactCoupleData::from_filtered(&fc)
        .unwrap()
        .derive()
        .unwrap()
        .page()
        .unwrap();
    assert_eq!(e2.entry(1, 1), FgAbGroup::free(1));
}

#[test]
fn coniveau_of_the_affine_line_and_a_point() {
    let x = curve(5, false);
    let s = assemble_coniveau(&x, Realization::Motivic, 1, 2).unwrap();
    assert!(s.pages.last().unwrap().entry(1, 1).is_trivial());
    let f = coniveau_filtration_report(&s.pages, 2, "N").unwrap();
    assert_eq!(f.total(), Some(&FgAbGroup::zero()));

    let k = field_of_order(9).unwrap();
    let pt = Arc::new(SchemeDescription::point(&k, 1));
    for n in 0..3 {
        let s = assemble_coniveau(&pt, Realization::Motivic, n, 1).unwrap();
        assert_eq!(s.pages.len(), 1);
        assert!(s.pages[0].entries().keys().all(|&(p, _)| p == 0));
        let f = coniveau_filtration_report(&s.pages, n, "N").unwrap();
        assert_eq!(f.step(1).unwrap().group, Some(FgAbGroup::zero()));
    }
    assert_eq!(
        assemble_coniveau(&pt, Realization::Motivic, 1, 1)
            .unwrap()
            .pages[0]
            .entry(0, 1),
        FgAbGroup::cyclic(8)
    );
    assert!("etale".parse::<Realization>().is_err());
}

#[test]
fn page_json_layout() {
    let s = assemble_coniveau(&curve(3, true), Realization::Motivic, 1, 1).unwrap();
    let v = s.pages[1].to_json();
    assert_eq!(v["r"], 2);
    let entries = v["entries"].as_array().unwrap();
    assert!(entries
        .iter()
        .any(|e| e["p"] == 1 && e["q"] == 1 && e["rank"] == 1));
    assert!(entries
        .iter()
        .any(|e| e["p"] == 0 && e["q"] == 1 && e["torsion"] == serde_json::json!([2])));
    let d1 = s.pages[0].to_json();
    let d = &d1["differentials"][0];
    assert_eq!(d["from"], serde_json::json!([0, 1]));
    assert_eq!(d["to"], serde_json::json!([1, 1]));
}
