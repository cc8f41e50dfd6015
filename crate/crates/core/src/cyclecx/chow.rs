use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{differential, CycleChain, CycleError};
use crate::abgroup::{homology_at, Elem, FgAbGroup, IntMatrix};
use crate::cyclemod::CycleModuleInstance;
use crate::gfield::{places_up_to, Place};
use crate::milnor::{FieldRef, MilnorElement};
use crate::schememod::{PointId, ResidueField, SchemeDescription, SchemeKind, SupportHint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChowMode {
    Exact,
    /// Restrict supports to the points of the description (line configurations).
    Approximate,
}

/// `A^p(X; phi)_i` with representative generators and a principality solver.
#[derive(Clone)]
pub struct ChowResult {
    pub p: usize,
    pub i: i64,
    pub group: FgAbGroup,
    pub generators: Vec<CycleChain>,
    pub description: String,
    pub caveat: Option<String>,
    scheme: Arc<SchemeDescription>,
    module: CycleModuleInstance,
}

impl fmt::Display for ChowResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.group, self.description)?;
        if let Some(c) = &self.caveat {
            write!(f, " [approximate: {c}]")?;
        }
        Ok(())
    }
}

fn summand_order(phi: &CycleModuleInstance, field_order: u32, n: i64) -> BigInt {
    match phi.milnor_degree(n) {
        None => BigInt::one(),
        Some(d) => BigInt::from(phi.coefficients().modulus(field_order, d)),
    }
}

fn is_curve(x: &SchemeDescription) -> Option<bool> {
    match x.kind() {
        SchemeKind::Curve { projective, .. } => Some(*projective),
        _ => None,
    }
}

/// `A^p(X; phi)_i`. Exact for points and curves; line configurations only
/// in approximate mode and only for `p = 2`.
pub fn chow(
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
    p: usize,
    i: i64,
    mode: ChowMode,
) -> Result<ChowResult, CycleError> {
    let k = x.base();
    let q = k.order();
    let coeffs = phi.coefficients();
    let mut out = ChowResult {
        p,
        i,
        group: FgAbGroup::zero(),
        generators: Vec::new(),
        description: "zero".into(),
        caveat: None,
        scheme: Arc::clone(x),
        module: phi.clone(),
    };
    let n = i - p as i64;
    match x.kind() {
        SchemeKind::Point { .. } => {
            if p == 0 {
                let ResidueField::Finite(kk) = x.residue_field(&PointId::Generic)? else {
                    unreachable!("points have finite residue fields")
                };
                out.group = FgAbGroup::from_orders(&[summand_order(phi, kk.order(), n)]);
                if let Some(d) = phi.milnor_degree(n).filter(|_| !out.group.is_trivial()) {
                    let g = CycleChain::zero(x, phi, 0, i)
                        .with(PointId::Generic, MilnorElement::finite(&kk, d, 1, coeffs))?;
                    out.generators.push(g);
                }
                out.description = format!("phi_{n}(F{})", kk.order());
            }
        }
        SchemeKind::Curve {
            projective,
            removed,
        } => match p {
            0 => {
                let mut orders = vec![summand_order(phi, q, n)];
                let d = phi.milnor_degree(n);
                if let Some(d) = d.filter(|_| !orders[0].is_one()) {
                    let c = MilnorElement::function(k, d, 1, BTreeMap::new(), coeffs);
                    out.generators
                        .push(CycleChain::zero(x, phi, 0, i).with(PointId::Generic, c)?);
                }
                for v in removed {
                    let pi = v.poly().expect("removed places are finite");
                    let o = summand_order(phi, v.residue_field(k)?.order(), n - 1);
                    if let Some(d) = d.filter(|_| !o.is_one()) {
                        let res = BTreeMap::from([(pi.clone(), 1)]);
                        let c = MilnorElement::function(k, d, 0, res, coeffs);
                        out.generators
                            .push(CycleChain::zero(x, phi, 0, i).with(PointId::Generic, c)?);
                    }
                    orders.push(o);
                }
                out.group = FgAbGroup::from_orders(&orders);
                out.description = if removed.is_empty() {
                    "constants".into()
                } else {
                    "constants and residues at removed points".into()
                };
            }
            1 if *projective => {
                out.group = FgAbGroup::from_orders(&[summand_order(phi, q, n)]);
                if let Some(d) = phi.milnor_degree(n).filter(|_| !out.group.is_trivial()) {
                    let origin = PointId::Closed(Place::rational(k, crate::gfield::Fe::ZERO));
                    let g = CycleChain::zero(x, phi, 1, i)
                        .with(origin, MilnorElement::finite(k, d, 1, coeffs))?;
                    out.generators.push(g);
                }
                out.description = if n == 0 {
                    "degree map".into()
                } else {
                    "sum of norms".into()
                };
            }
            1 => out.description = "every cycle is a boundary".into(),
            _ => {}
        },
        SchemeKind::Union(parts) => {
            let mut groups = Vec::new();
            for (j, part) in parts.iter().enumerate() {
                let r = chow(&Arc::new(part.clone()), phi, p, i, mode)?;
                for g in &r.generators {
                    let mut c = CycleChain::zero(x, phi, p, i);
                    for (pt, v) in g.components() {
                        c.insert(PointId::Component(j, Box::new(pt.clone())), v.clone())?;
                    }
                    out.generators.push(c);
                }
                groups.push(r.group);
            }
            out.group = FgAbGroup::direct_sum(&groups);
            out.description = "direct sum over components".into();
        }
        SchemeKind::Lines { forms, local } => {
            if mode == ChowMode::Exact || p != 2 {
                return Err(CycleError::UnsupportedDimension(2));
            }
            let points = x.points_of_codim(2, None)?;
            let m = summand_order(phi, q, n);
            let orders = vec![m.clone(); points.len()];
            let mut rel: Vec<Vec<BigInt>> = Vec::new();
            for l in forms {
                let on: Vec<usize> = (0..points.len())
                    .filter(|&j| {
                        !x.fibers(&PointId::Line(*l), &points[j])
                            .map(|f| f.is_empty())
                            .unwrap_or(true)
                    })
                    .collect();
                let unit = |j: usize| {
                    let mut v = vec![BigInt::zero(); points.len()];
                    v[j] = BigInt::one();
                    v
                };
                if *local {
                    rel.extend(on.iter().map(|&j| unit(j)));
                } else {
                    for w in on.windows(2) {
                        let mut v = unit(w[1]);
                        v[w[0]] = BigInt::from(-1);
                        rel.push(v);
                    }
                }
            }
            let d_in = IntMatrix::from_columns(points.len(), &rel);
            let d_out = IntMatrix::zeros(0, points.len());
            let h = homology_at(&orders, &d_in, &d_out, &[])
                .map_err(|e| CycleError::InvalidChain(e.to_string()))?;
            out.group = h.group().clone();
            if let Some(d) = phi.milnor_degree(n) {
                for g in h.generators() {
                    let mut c = CycleChain::zero(x, phi, 2, i);
                    for (j, v) in g.iter().enumerate() {
                        if !v.is_zero() {
                            let val = i64::try_from(v).expect("small coordinate");
                            c.insert(
                                points[j].clone(),
                                MilnorElement::finite(k, d, val, coeffs).into(),
                            )?;
                        }
                    }
                    out.generators.push(c);
                }
            }
            out.description = "cycles on the configuration points".into();
            out.caveat =
                Some("supports restricted to the intersection points of the configuration".into());
        }
        SchemeKind::Abstract(_) => {
            return Err(CycleError::UnsupportedScheme(format!(
                "Chow groups of {}",
                x.name()
            )));
        }
    }
    Ok(out)
}

impl ChowResult {
    pub fn scheme(&self) -> &Arc<SchemeDescription> {
        &self.scheme
    }

    /// A codimension-0 chain `w` with `d(w) = c`, if `c` is a boundary. Only
    /// for `A^1` of curves.
    pub fn witness(&self, c: &CycleChain) -> Result<Option<CycleChain>, CycleError> {
        let x = &self.scheme;
        if is_curve(x).is_none() || self.p != 1 {
            return Err(CycleError::UnsupportedScheme(format!(
                "principality solver on {}",
                x.name()
            )));
        }
        if c.codim() != 1 || c.grading() != self.i || c.module() != &self.module {
            return Err(CycleError::InvalidChain(
                "chain is not in C^1 of this group".into(),
            ));
        }
        let k = x.base();
        let Some(d) = self.module.milnor_degree(self.i) else {
            return Ok(c.is_zero().then(|| c.clone()));
        };
        let mut residues = BTreeMap::new();
        for (pt, v) in c.components() {
            if let (PointId::Closed(Place::Finite(pi)), Some(m)) = (pt, v.as_milnor()) {
                residues.insert(pi.clone(), m.constant());
            }
        }
        let w = MilnorElement::function(k, d, 0, residues, self.module.coefficients());
        let chain = CycleChain::zero(x, &self.module, 0, self.i).with(PointId::Generic, w)?;
        Ok((differential(&chain)? == *c).then_some(chain))
    }

    /// Class of a codimension-`p` chain in `group`: the sum of norms for
    /// `A^1(P^1)`, zero on affine curves.
    pub fn class(&self, c: &CycleChain) -> Result<Elem, CycleError> {
        let x = &self.scheme;
        match (is_curve(x), self.p) {
            (Some(false), 1) => Ok(Vec::new()),
            (Some(true), 1) => {
                let k = x.base();
                let target = FieldRef::Finite(Arc::clone(k));
                let n = self.i - 1;
                let Some(d) = self.module.milnor_degree(n) else {
                    return Ok(Vec::new());
                };
                let mut acc = MilnorElement::finite(k, d, 0, self.module.coefficients());
                for v in c.components().values() {
                    let m = v
                        .as_milnor()
                        .ok_or_else(|| CycleError::InvalidChain("plane value on a curve".into()))?;
                    acc = acc.add(&self.module.norm(&target, m)?)?;
                }
                Ok(self.module.coords(&acc))
            }
            _ => Err(CycleError::UnsupportedScheme(format!(
                "class map on {}",
                x.name()
            ))),
        }
    }
}

/// `A^0(X; phi)_i` for proper built-ins.
pub fn unramified(
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
    i: i64,
) -> Result<FgAbGroup, CycleError> {
    if matches!(x.kind(), SchemeKind::Lines { .. } | SchemeKind::Abstract(_)) || !x.is_proper() {
        return Err(CycleError::UnsupportedScheme(format!(
            "unramified groups of {}",
            x.name()
        )));
    }
    Ok(chow(x, phi, 0, i, ChowMode::Exact)?.group)
}

/// One term of a support-bounded cycle complex, presented as
/// `Z^n / diag(orders)` on the listed basis.
#[derive(Clone, Debug)]
pub struct BoundedTerm {
    pub codim: usize,
    pub orders: Vec<BigInt>,
    pub basis: Vec<(PointId, MilnorElement)>,
    pub labels: Vec<String>,
}

impl BoundedTerm {
    pub fn group(&self) -> FgAbGroup {
        FgAbGroup::from_orders(&self.orders)
    }
}

/// `C^0 -> C^1` of a curve with supports in places of degree at most the
/// bound, as integer matrices against explicit bases.
#[derive(Clone, Debug)]
pub struct BoundedComplex {
    pub grading: i64,
    pub support_bound: usize,
    pub terms: Vec<BoundedTerm>,
    /// `differentials[p]` maps `terms[p]` to `terms[p + 1]`.
    pub differentials: Vec<IntMatrix>,
}

impl BoundedComplex {
    pub fn cohomology(&self, p: usize) -> Result<FgAbGroup, CycleError> {
        let t = &self.terms[p];
        let n = t.orders.len();
        let d_in = if p == 0 {
            IntMatrix::zeros(n, 0)
        } else {
            self.differentials[p - 1].clone()
        };
        let (d_out, out_orders) = match self.differentials.get(p) {
            Some(d) => (d.clone(), self.terms[p + 1].orders.clone()),
            None => (IntMatrix::zeros(0, n), Vec::new()),
        };
        let h = homology_at(&t.orders, &d_in, &d_out, &out_orders)
            .map_err(|e| CycleError::InvalidChain(e.to_string()))?;
        Ok(h.group().clone())
    }
}

/// The complex `C^*(X; phi)_i` of a point or curve, truncated to supports of
/// degree at most `bound`.
pub fn bounded_complex(
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
    i: i64,
    bound: usize,
) -> Result<BoundedComplex, CycleError> {
    let k = x.base();
    let q = k.order();
    let coeffs = phi.coefficients();
    let mut out = BoundedComplex {
        grading: i,
        support_bound: bound,
        terms: Vec::new(),
        differentials: Vec::new(),
    };
    let mut c0 = BoundedTerm {
        codim: 0,
        orders: Vec::new(),
        basis: Vec::new(),
        labels: Vec::new(),
    };
    match x.kind() {
        SchemeKind::Point { .. } => {
            let ResidueField::Finite(kk) = x.residue_field(&PointId::Generic)? else {
                unreachable!("points have finite residue fields")
            };
            if let Some(d) = phi.milnor_degree(i) {
                let o = summand_order(phi, kk.order(), i);
                if !o.is_one() {
                    c0.orders.push(o);
                    c0.basis
                        .push((PointId::Generic, MilnorElement::finite(&kk, d, 1, coeffs)));
                    c0.labels.push("generic".into());
                }
            }
            out.terms.push(c0);
            return Ok(out);
        }
        SchemeKind::Curve { removed, .. } => {
            let Some(d) = phi.milnor_degree(i) else {
                out.terms.push(c0);
                out.terms.push(BoundedTerm {
                    codim: 1,
                    orders: Vec::new(),
                    basis: Vec::new(),
                    labels: Vec::new(),
                });
                out.differentials.push(IntMatrix::zeros(0, 0));
                return Ok(out);
            };
            let o = summand_order(phi, q, i);
            if !o.is_one() {
                c0.orders.push(o);
                c0.basis.push((
                    PointId::Generic,
                    MilnorElement::function(k, d, 1, BTreeMap::new(), coeffs),
                ));
                c0.labels.push("const".into());
            }
            let mut places = places_up_to(k, bound);
            places.extend(removed.iter().cloned());
            places.sort();
            places.dedup();
            for v in places {
                let pi = v.poly().expect("finite place").clone();
                let o = summand_order(phi, v.residue_field(k)?.order(), i - 1);
                if o.is_one() {
                    continue;
                }
                c0.orders.push(o);
                c0.labels.push(format!("res ({})", pi.format("t")));
                let res = BTreeMap::from([(pi, 1)]);
                c0.basis.push((
                    PointId::Generic,
                    MilnorElement::function(k, d, 0, res, coeffs),
                ));
            }
            let mut c1 = BoundedTerm {
                codim: 1,
                orders: Vec::new(),
                basis: Vec::new(),
                labels: Vec::new(),
            };
            let d1 = phi.milnor_degree(i - 1);
            for pt in x.points_of_codim(1, Some(&SupportHint::DegreeBound(bound)))? {
                let PointId::Closed(v) = &pt else { continue };
                let kk = v.residue_field(k)?;
                let o = summand_order(phi, kk.order(), i - 1);
                if o.is_one() {
                    continue;
                }
                let d1 = d1.expect("nontrivial summand has a degree");
                c1.orders.push(o);
                c1.labels.push(x.point_label(&pt));
                c1.basis
                    .push((pt.clone(), MilnorElement::finite(&kk, d1, 1, coeffs)));
            }
            let mut cols = Vec::new();
            for (pt, e) in &c0.basis {
                let chain = CycleChain::zero(x, phi, 0, i).with(pt.clone(), e.clone())?;
                let dc = differential(&chain)?;
                let mut col = vec![BigInt::zero(); c1.basis.len()];
                for (target, v) in dc.components() {
                    let j = c1
                        .basis
                        .iter()
                        .position(|(b, _)| b == target)
                        .ok_or_else(|| {
                            CycleError::InvalidChain(format!(
                                "{} outside the support bound",
                                x.point_label(target)
                            ))
                        })?;
                    col[j] = BigInt::from(
                        v.as_milnor()
                            .expect("closed points carry Milnor values")
                            .constant(),
                    );
                }
                cols.push(col);
            }
            out.differentials
                .push(IntMatrix::from_columns(c1.basis.len(), &cols));
            out.terms.push(c0);
            out.terms.push(c1);
        }
        _ => {
            return Err(CycleError::UnsupportedScheme(format!(
                "bounded complex of {}",
                x.name()
            )))
        }
    }
    Ok(out)
}
