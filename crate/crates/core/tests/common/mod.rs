#![allow(dead_code)]

use std::sync::Arc;

use gersten::abgroup::{homology_at, AbHom, FgAbGroup, IntMatrix, Subquotient};
use gersten::gfield::{field_of_order, norm_map, Fe, FiniteField, Place, Poly, RatFunc};
use gersten::spectra::FilteredComplex;
use num_bigint::BigInt;
use rand::Rng;

pub fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn field(q: u64) -> Arc<FiniteField> {
    field_of_order(q).unwrap()
}

pub fn poly(k: &Arc<FiniteField>, coeffs: &[u32]) -> Poly {
    Poly::new(
        Arc::clone(k),
        coeffs.iter().map(|&c| Fe(c % k.order())).collect(),
    )
}

pub fn random_poly(k: &Arc<FiniteField>, rng: &mut impl Rng, max_deg: usize) -> Poly {
    loop {
        let d = rng.gen_range(0..=max_deg);
        let c: Vec<u32> = (0..=d).map(|_| rng.gen_range(0..k.order())).collect();
        let p = poly(k, &c);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_ratfunc(k: &Arc<FiniteField>, rng: &mut impl Rng, max_deg: usize) -> RatFunc {
    RatFunc::new(random_poly(k, rng, max_deg), random_poly(k, rng, max_deg))
}

/// Valuation by repeated division.
pub fn valuation(v: &Place, f: &RatFunc) -> i64 {
    match v {
        Place::Infinity => f.den().deg() as i64 - f.num().deg() as i64,
        Place::Finite(pi) => {
            let count = |g: &Poly| {
                let mut g = g.clone();
                let mut n = 0;
                loop {
                    let (quo, rem) = g.divrem(pi);
                    if !rem.is_zero() {
                        return n;
                    }
                    g = quo;
                    n += 1;
                }
            };
            count(f.num()) - count(f.den())
        }
    }
}

/// The monic irreducible factors of the entries, as places.
pub fn factor_places(fs: &[RatFunc]) -> Vec<Place> {
    let mut out = Vec::new();
    for f in fs {
        for g in [f.num(), f.den()] {
            if g.deg() == 0 {
                continue;
            }
            for (pi, _) in g.factor().unwrap().1 {
                let v = Place::Finite(pi);
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// `(-1)^{ab} f^b / g^a` reduced at `v`, where `a = v(f)`, `b = v(g)`.
pub fn tame_pair(
    k: &Arc<FiniteField>,
    v: &Place,
    f: &RatFunc,
    g: &RatFunc,
) -> (Arc<FiniteField>, Fe) {
    let (a, bv) = (valuation(v, f), valuation(v, g));
    let mut u = f.pow(bv).div(&g.pow(a));
    if (a * bv) % 2 != 0 {
        u = u.neg();
    }
    let kappa = v.residue_field(k).unwrap();
    (kappa, v.reduce(&u).unwrap())
}

/// `N_{kappa/F_q}` of the tame symbol of `{f, g}` at `v`.
pub fn tame_pair_norm(k: &Arc<FiniteField>, v: &Place, f: &RatFunc, g: &RatFunc) -> Fe {
    let (kappa, x) = tame_pair(k, v, f, g);
    norm_map(k, &kappa, x).unwrap()
}

/// `gr^p H^k` from the images of `H^k(F^p C) -> H^k(C)`, each computed on
/// its own subcomplex.
pub fn graded_by_images(fc: &FilteredComplex, k: i64) -> Vec<(i64, FgAbGroup)> {
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
    let g = total.group();
    let n = g.num_gens();
    let rel: Vec<Vec<BigInt>> = g
        .orders()
        .iter()
        .enumerate()
        .filter(|(_, o)| *o != &b(0))
        .map(|(i, o)| {
            let mut v = vec![b(0); n];
            v[i] = o.clone();
            v
        })
        .collect();
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
