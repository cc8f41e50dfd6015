//! Milnor K-theory of `F_q` and `F_q(t)` in normal form, with residues,
//! corestrictions, norms, the `K^M`-action and specializations.
//!
//! Residues follow the tame symbol
//! `d_v{a, b} = (-1)^(v(a) v(b)) a^v(b) / b^v(a)` reduced at `v`.

mod element;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

#[cfg(test)]
use element::reduce_value;
pub use element::{Coefficients, FieldRef, MilnorElement, Symbol};

use crate::gfield::{Embedding, Fe, FieldError, FiniteField, Place, Poly, RatFunc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilnorError {
    #[error("symbol entry is zero")]
    ZeroEntry,
    #[error("field or degree mismatch")]
    FieldMismatch,
    #[error("unsupported extension: {0}")]
    UnsupportedExtension(String),
    #[error("residue of a degree-0 element")]
    NegativeDegree,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Valuation of `f` at `v` and the reduction of `f / pi^v(f)`.
pub fn unit_part(v: &Place, f: &RatFunc) -> Result<(i64, Fe), MilnorError> {
    if f.is_zero() {
        return Err(MilnorError::ZeroEntry);
    }
    match v {
        Place::Infinity => Ok((v.valuation(f), f.leading_ratio())),
        Place::Finite(pi) => {
            let data = v.data(f.field())?;
            let strip = |p: &Poly| {
                let mut g = p.clone();
                let mut m = 0i64;
                loop {
                    let (q, r) = g.divrem(pi);
                    if !r.is_zero() {
                        return (m, g);
                    }
                    g = q;
                    m += 1;
                }
            };
            let (mn, n) = strip(f.num());
            let (md, d) = strip(f.den());
            let k = data.residue();
            Ok((mn - md, k.div(data.reduce_poly(&n), data.reduce_poly(&d))))
        }
    }
}

/// `d_v{a, b}` as an element of `kappa(v)^x`.
pub fn tame_pair(v: &Place, a: &RatFunc, b: &RatFunc) -> Result<Fe, MilnorError> {
    let (va, ua) = unit_part(v, a)?;
    let (vb, ub) = unit_part(v, b)?;
    let k = v.residue_field(a.field())?;
    let mut h = k.div(k.pow_signed(ua, vb), k.pow_signed(ub, va));
    if (va * vb) % 2 != 0 {
        h = k.neg(h);
    }
    Ok(h)
}

fn support_polys(entries: &[&RatFunc]) -> Result<Vec<Poly>, MilnorError> {
    let mut out = Vec::new();
    for f in entries {
        for p in [f.num(), f.den()] {
            for (g, _) in p.factor()?.1 {
                out.push(g);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Image of a symbol in normal form with integral coefficients.
pub fn normalize(s: &Symbol) -> Result<MilnorElement, MilnorError> {
    normalize_with(s, Coefficients::Integral)
}

pub fn normalize_with(s: &Symbol, coeffs: Coefficients) -> Result<MilnorElement, MilnorError> {
    let s = Symbol::new(s.field.clone(), s.entries.clone())?;
    let n = s.len() as u32;
    let base = s.field.base();
    match (&s.field, s.len()) {
        (field, 0) => Ok(MilnorElement::integer(field, 1, coeffs)),
        (FieldRef::Finite(k), 1) => {
            let c = s.entries[0]
                .as_constant()
                .ok_or(MilnorError::FieldMismatch)?;
            MilnorElement::unit(k, c, coeffs)
        }
        (field @ FieldRef::Finite(_), _) => Ok(MilnorElement::zero(field, n, coeffs)),
        (FieldRef::Function(_), 1) => {
            let f = &s.entries[0];
            let constant = base.dlog(f.leading_ratio())? as i64;
            let mut residues = BTreeMap::new();
            for pi in support_polys(&[f])? {
                residues.insert(pi.clone(), Place::Finite(pi).valuation(f));
            }
            Ok(MilnorElement::function(base, 1, constant, residues, coeffs))
        }
        (FieldRef::Function(_), 2) => {
            let (a, b) = (&s.entries[0], &s.entries[1]);
            let mut residues = BTreeMap::new();
            for pi in support_polys(&[a, b])? {
                let place = Place::Finite(pi.clone());
                let h = tame_pair(&place, a, b)?;
                let k = place.residue_field(base)?;
                residues.insert(pi, k.dlog(h)? as i64);
            }
            Ok(MilnorElement::function(base, 2, 0, residues, coeffs))
        }
        (field, _) => Ok(MilnorElement::zero(field, n, coeffs)),
    }
}

fn require_function_field(x: &MilnorElement) -> Result<&Arc<FiniteField>, MilnorError> {
    match x.field() {
        FieldRef::Function(k) => Ok(k),
        FieldRef::Finite(_) => Err(MilnorError::FieldMismatch),
    }
}

/// `sum_k {u_k, pi_k}` equal to a `K_2` element, with `deg u_k < deg pi_k`.
pub fn lift_k2_to_symbols(x: &MilnorElement) -> Result<Vec<(RatFunc, RatFunc)>, MilnorError> {
    let base = require_function_field(x)?;
    if x.degree() != 2 {
        return Err(MilnorError::FieldMismatch);
    }
    let mut rest = x.with_coefficients(Coefficients::Integral);
    let mut out = Vec::new();
    while let Some((pi, r)) = rest
        .residues()
        .iter()
        .next_back()
        .map(|(p, r)| (p.clone(), *r))
    {
        let place = Place::Finite(pi.clone());
        let k = place.residue_field(base)?;
        let u = RatFunc::from_poly(place.lift(base, k.exp(r))?);
        let pi_f = RatFunc::from_poly(pi);
        let sym = normalize(&Symbol::new(
            x.field().clone(),
            vec![u.clone(), pi_f.clone()],
        )?)?;
        rest = rest.sub(&sym)?;
        out.push((u, pi_f));
    }
    Ok(out)
}

/// Residue at `v`, of degree one less.
pub fn tame_symbol(v: &Place, x: &MilnorElement) -> Result<MilnorElement, MilnorError> {
    let base = require_function_field(x)?;
    let coeffs = x.coefficients();
    let degree = x
        .degree()
        .checked_sub(1)
        .ok_or(MilnorError::NegativeDegree)?;
    let kappa = v.residue_field(base)?;
    let value = match (v, x.degree()) {
        (Place::Finite(pi), 1 | 2) => x.residues().get(pi).copied().unwrap_or(0),
        (Place::Infinity, 1) => -x
            .residues()
            .iter()
            .map(|(pi, m)| pi.deg() as i64 * m)
            .sum::<i64>(),
        (Place::Infinity, 2) => {
            let mut acc = 0i64;
            for (u, pi) in lift_k2_to_symbols(x)? {
                acc += base.dlog(tame_pair(&Place::Infinity, &u, &pi)?)? as i64;
            }
            acc
        }
        _ => 0,
    };
    Ok(MilnorElement::finite(&kappa, degree, value, coeffs))
}

/// Places where the residue is nonzero; finite by construction.
pub fn residue_support(x: &MilnorElement) -> Result<Vec<Place>, MilnorError> {
    require_function_field(x)?;
    let mut out: Vec<Place> = x.residues().keys().cloned().map(Place::Finite).collect();
    if x.degree() > 0 && !tame_symbol(&Place::Infinity, x)?.is_zero() {
        out.push(Place::Infinity);
    }
    Ok(out)
}

/// `s_v(x) = d_v(x . {-pi_v})`; identity on constants.
pub fn specialize(v: &Place, x: &MilnorElement) -> Result<MilnorElement, MilnorError> {
    let base = require_function_field(x)?;
    let coeffs = x.coefficients();
    let kappa = v.residue_field(base)?;
    let value = match (v, x.degree()) {
        (_, 0) => x.constant(),
        (Place::Infinity, 1) => x.constant(),
        (Place::Finite(pi), 1) => {
            let place = Place::Finite(pi.clone());
            let data = place.data(base)?;
            let mut acc =
                x.constant() * kappa.dlog(data.embedding().apply(base.generator()))? as i64;
            for (other, m) in x.residues() {
                if other != pi {
                    acc += m * kappa.dlog(data.reduce_poly(other))? as i64;
                }
            }
            acc
        }
        _ => 0,
    };
    Ok(MilnorElement::finite(&kappa, x.degree(), value, coeffs))
}

fn image_of_generator(emb: &Embedding) -> Result<i64, MilnorError> {
    Ok(emb.target().dlog(emb.apply(emb.source().generator()))? as i64)
}

/// Covariant map along `E -> L` for the supported inclusions.
pub fn corestriction(target: &FieldRef, x: &MilnorElement) -> Result<MilnorElement, MilnorError> {
    let coeffs = x.coefficients();
    let n = x.degree();
    let unsupported = || MilnorError::UnsupportedExtension(format!("{} -> {}", x.field(), target));
    if x.field() == target {
        return Ok(x.clone());
    }
    match (x.field(), target) {
        (FieldRef::Finite(e), FieldRef::Finite(l)) => {
            let emb = Embedding::new(e, l).map_err(|_| unsupported())?;
            let value = match n {
                0 => x.constant(),
                1 => x.constant() * image_of_generator(&emb)?,
                _ => 0,
            };
            Ok(MilnorElement::finite(l, n, value, coeffs))
        }
        (FieldRef::Finite(e), FieldRef::Function(l)) if e == l => Ok(MilnorElement::function(
            l,
            n,
            x.constant(),
            BTreeMap::new(),
            coeffs,
        )),
        (FieldRef::Function(e), FieldRef::Function(l)) => {
            let emb = Embedding::new(e, l).map_err(|_| unsupported())?;
            let constant = match n {
                0 => x.constant(),
                1 => x.constant() * image_of_generator(&emb)?,
                _ => 0,
            };
            let mut residues = BTreeMap::new();
            if n == 1 || n == 2 {
                for (pi, r) in x.residues() {
                    let lifted = Poly::new(
                        Arc::clone(l),
                        pi.coeffs().iter().map(|&c| emb.apply(c)).collect(),
                    );
                    let place = Place::Finite(pi.clone());
                    let gen_lift = if n == 2 {
                        let k = place.residue_field(e)?;
                        let u = place.lift(e, k.generator())?;
                        Some(Poly::new(
                            Arc::clone(l),
                            u.coeffs().iter().map(|&c| emb.apply(c)).collect(),
                        ))
                    } else {
                        None
                    };
                    for (factor, _) in lifted.factor()?.1 {
                        let value = match &gen_lift {
                            None => *r,
                            Some(u) => {
                                let fp = Place::Finite(factor.clone());
                                let data = fp.data(l)?;
                                r * data.residue().dlog(data.reduce_poly(u))? as i64
                            }
                        };
                        *residues.entry(factor).or_insert(0) += value;
                    }
                }
            }
            Ok(MilnorElement::function(l, n, constant, residues, coeffs))
        }
        _ => Err(unsupported()),
    }
}

/// `N_{L/E}` for `L = F_{q^d}` over `E = F_q`.
pub fn norm(target: &FieldRef, y: &MilnorElement) -> Result<MilnorElement, MilnorError> {
    let coeffs = y.coefficients();
    let n = y.degree();
    if y.field() == target {
        return Ok(y.clone());
    }
    match (y.field(), target) {
        (FieldRef::Finite(l), FieldRef::Finite(e)) => {
            let emb = Embedding::new(e, l).map_err(|_| {
                MilnorError::UnsupportedExtension(format!("{} / {}", y.field(), target))
            })?;
            let value = match n {
                0 => y.constant() * emb.degree() as i64,
                1 => {
                    let x = l.exp(y.constant());
                    e.dlog(crate::gfield::norm_element(&emb, x)?)? as i64
                }
                _ => 0,
            };
            Ok(MilnorElement::finite(e, n, value, coeffs))
        }
        _ => Err(MilnorError::UnsupportedExtension(format!(
            "{} / {}",
            y.field(),
            target
        ))),
    }
}

/// `sigma . x` in degree `|sigma| + deg x`.
pub fn km_action(sigma: &Symbol, x: &MilnorElement) -> Result<MilnorElement, MilnorError> {
    if &sigma.field != x.field() {
        return Err(MilnorError::FieldMismatch);
    }
    let coeffs = x.coefficients();
    let total = x.degree() + sigma.len() as u32;
    if sigma.is_empty() {
        return Ok(x.clone());
    }
    if x.degree() == 0 {
        return Ok(normalize_with(sigma, coeffs)?.scale(x.constant()));
    }
    let field = x.field();
    if total >= 3 || !field.is_function_field() {
        return Ok(MilnorElement::zero(field, total, coeffs));
    }
    // total == 2: {a} . ({c} + sum m_pi {pi})
    let base = field.base();
    let a = sigma.entries[0].clone();
    let c = RatFunc::constant(base, base.exp(x.constant()));
    let mut acc = normalize_with(&Symbol::new(field.clone(), vec![a.clone(), c])?, coeffs)?;
    for (pi, m) in x.residues() {
        let s = Symbol::new(
            field.clone(),
            vec![a.clone(), RatFunc::from_poly(pi.clone())],
        )?;
        acc = acc.add(&normalize_with(&s, coeffs)?.scale(*m))?;
    }
    Ok(acc)
}
