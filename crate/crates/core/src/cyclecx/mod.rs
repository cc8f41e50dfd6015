//! Cycle complexes `C^p(X; phi)_i` with the residue differentials, the
//! `d o d = 0` harness, Chow groups with coefficients and the functorialities
//! available for the built-in schemes.

mod chow;
mod functorial;
mod json;
mod square;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cyclemod::{CycleModError, CycleModuleInstance};
use crate::gfield::FiniteField;
use crate::milnor::{FieldRef, MilnorElement, MilnorError, Symbol};
use crate::parse::ParseError;
use crate::schememod::{
    parse_plane_function, EmbeddingKind, LinearForm, PlaneFunction, PointId, ResidueField,
    SchemeDescription, SchemeError, Valuation,
};

pub use chow::{bounded_complex, chow, unramified, BoundedComplex, ChowMode, ChowResult};
pub use functorial::{ch_action, pullback_flat, pushforward};
pub use json::{chain_document, chain_from_json, chain_to_json, ChainDocument};
pub use square::{
    check_square_zero, check_square_zero_random, square_zero_ledger, Contribution, LedgerRow,
    SquareZeroFailure, SquareZeroReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleError {
    #[error("no fiber data for the incidence {0} -> {1}")]
    MissingFiber(String, String),
    #[error("codimension-{0} points form an infinite family; a support hint is required")]
    NeedSupportHint(usize),
    #[error("exact Chow groups are not available in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),
    #[error("unsupported morphism: {0}")]
    UnsupportedMorphism(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error(transparent)]
    Scheme(SchemeError),
    #[error(transparent)]
    Module(#[from] CycleModError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<SchemeError> for CycleError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::MissingFiber(x, y) => CycleError::MissingFiber(x, y),
            SchemeError::NeedSupportHint(p) => CycleError::NeedSupportHint(p),
            other => CycleError::Scheme(other),
        }
    }
}

impl From<crate::gfield::FieldError> for CycleError {
    fn from(e: crate::gfield::FieldError) -> Self {
        CycleError::Scheme(SchemeError::Field(e))
    }
}

impl From<MilnorError> for CycleError {
    fn from(e: MilnorError) -> Self {
        CycleError::Module(CycleModError::Milnor(e))
    }
}

/// A formal sum of symbols in linear-form ratios, for the generic point of a
/// surface.
#[derive(Clone, PartialEq, Eq)]
pub struct PlaneSymbols {
    base: Arc<FiniteField>,
    degree: u32,
    terms: Vec<(i64, Vec<PlaneFunction>)>,
}

impl PlaneSymbols {
    pub fn new(base: &Arc<FiniteField>, degree: u32) -> Self {
        PlaneSymbols {
            base: Arc::clone(base),
            degree,
            terms: Vec::new(),
        }
    }

    pub fn symbol(base: &Arc<FiniteField>, entries: Vec<PlaneFunction>) -> Self {
        let mut s = PlaneSymbols::new(base, entries.len() as u32);
        s.terms.push((1, entries));
        s
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(i64, Vec<PlaneFunction>)] {
        &self.terms
    }

    pub fn add(&self, o: &Self) -> Result<Self, CycleError> {
        if self.degree != o.degree || self.base != o.base {
            return Err(CycleError::InvalidChain(
                "adding plane symbols of different shapes".into(),
            ));
        }
        let mut out = self.clone();
        for (m, e) in &o.terms {
            match out.terms.iter_mut().find(|(_, f)| f == e) {
                Some(t) => t.0 += m,
                None => out.terms.push((*m, e.clone())),
            }
        }
        out.terms.retain(|(m, _)| *m != 0);
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.0 *= k;
        }
        out.terms.retain(|(m, _)| *m != 0);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every linear form occurring in some entry.
    pub fn forms(&self) -> Vec<LinearForm> {
        let mut v: Vec<LinearForm> = self
            .terms
            .iter()
            .flat_map(|(_, e)| e.iter().flat_map(|f| f.factors().keys().copied()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Residue along the line `l`, as an element over the line's parameter field.
    pub fn residue(
        &self,
        phi: &CycleModuleInstance,
        l: &LinearForm,
    ) -> Result<Option<MilnorElement>, CycleError> {
        let field = FieldRef::Function(Arc::clone(&self.base));
        let coeffs = phi.coefficients();
        let Some(target) = self.degree.checked_sub(1) else {
            return Ok(None);
        };
        let mut acc = MilnorElement::zero(&field, target, coeffs);
        for (m, entries) in &self.terms {
            let r = match entries.as_slice() {
                [f] => MilnorElement::integer(&field, f.valuation(l), coeffs),
                [f, g] => {
                    let (a, b) = (f.valuation(l), g.valuation(l));
                    let mut h = f.pow(b).div(&g.pow(a));
                    if (a * b) % 2 != 0 {
                        h = h.neg();
                    }
                    let sym = Symbol::new(field.clone(), vec![h.restrict(l)])?;
                    phi.normalize(&sym)?
                }
                _ => {
                    return Err(CycleError::UnsupportedScheme(format!(
                        "residues of degree-{} symbols on a surface",
                        self.degree
                    )))
                }
            };
            acc = acc.add(&r.scale(*m))?;
        }
        Ok(Some(acc.scale(phi.residue_sign())))
    }

    pub fn format(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, e)| {
                let s = format!(
                    "{{{}}}",
                    e.iter().map(|f| f.format()).collect::<Vec<_>>().join(", ")
                );
                if *m == 1 {
                    s
                } else {
                    format!("{m}*{s}")
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for PlaneSymbols {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format())
    }
}

/// Parse `{f, g}` with entries products of linear forms in `x, y, z`.
pub fn parse_plane_symbol(s: &str, base: &Arc<FiniteField>) -> Result<PlaneSymbols, ParseError> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| ParseError::Invalid(format!("{s} is not a symbol")))?;
    let mut entries = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes: Vec<char> = inner.chars().collect();
    for (i, c) in bytes.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                entries.push(bytes[start..i].iter().collect::<String>());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last: String = bytes[start..].iter().collect();
    if !last.trim().is_empty() || !entries.is_empty() {
        entries.push(last);
    }
    let funcs = entries
        .iter()
        .map(|e| parse_plane_function(e, base, &["x", "y", "z"]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PlaneSymbols::symbol(base, funcs))
}

/// A component value: an element of `phi` over the residue field, or a
/// formal symbol sum at the generic point of a surface.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChainValue {
    Milnor(MilnorElement),
    Plane(PlaneSymbols),
}

impl ChainValue {
    pub fn is_zero(&self) -> bool {
        match self {
            ChainValue::Milnor(m) => m.is_zero(),
            ChainValue::Plane(p) => p.is_zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, CycleError> {
        match (self, o) {
            (ChainValue::Milnor(a), ChainValue::Milnor(b)) => Ok(ChainValue::Milnor(a.add(b)?)),
            (ChainValue::Plane(a), ChainValue::Plane(b)) => Ok(ChainValue::Plane(a.add(b)?)),
            _ => Err(CycleError::InvalidChain("mixed component kinds".into())),
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        match self {
            ChainValue::Milnor(a) => ChainValue::Milnor(a.scale(k)),
            ChainValue::Plane(a) => ChainValue::Plane(a.scale(k)),
        }
    }

    pub fn as_milnor(&self) -> Option<&MilnorElement> {
        match self {
            ChainValue::Milnor(m) => Some(m),
            ChainValue::Plane(_) => None,
        }
    }

    pub fn format(&self) -> String {
        match self {
            ChainValue::Milnor(m) => m.to_string(),
            ChainValue::Plane(p) => p.format(),
        }
    }
}

impl From<MilnorElement> for ChainValue {
    fn from(m: MilnorElement) -> Self {
        ChainValue::Milnor(m)
    }
}

/// An element of `C^p(X; phi)_i`: finitely many points of codimension `p`
/// with values in `phi_{i-p}` of their residue fields.
#[derive(Clone)]
pub struct CycleChain {
    scheme: Arc<SchemeDescription>,
    module: CycleModuleInstance,
    codim: usize,
    grading: i64,
    components: BTreeMap<PointId, ChainValue>,
}

impl PartialEq for CycleChain {
    fn eq(&self, o: &Self) -> bool {
        self.scheme.name() == o.scheme.name()
            && self.module == o.module
            && self.codim == o.codim
            && self.grading == o.grading
            && self.components == o.components
    }
}

impl fmt::Debug for CycleChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format())
    }
}

/// Field on which component values at `p` live, with the Milnor degree.
fn value_field(x: &SchemeDescription, p: &PointId) -> Result<Option<FieldRef>, CycleError> {
    Ok(match x.residue_field(p)? {
        ResidueField::Finite(k) => Some(FieldRef::Finite(k)),
        ResidueField::Function { base, vars } if vars.len() == 1 => Some(FieldRef::Function(base)),
        ResidueField::Function { .. } => None,
    })
}

impl CycleChain {
    pub fn zero(
        scheme: &Arc<SchemeDescription>,
        module: &CycleModuleInstance,
        codim: usize,
        grading: i64,
    ) -> Self {
        CycleChain {
            scheme: Arc::clone(scheme),
            module: module.clone(),
            codim,
            grading,
            components: BTreeMap::new(),
        }
    }

    /// Milnor degree of the component values, `None` when `phi_{i-p} = 0`.
    pub fn value_degree(&self) -> Option<u32> {
        self.module.milnor_degree(self.grading - self.codim as i64)
    }

    pub fn scheme(&self) -> &Arc<SchemeDescription> {
        &self.scheme
    }

    pub fn module(&self) -> &CycleModuleInstance {
        &self.module
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn grading(&self) -> i64 {
        self.grading
    }

    pub fn components(&self) -> &BTreeMap<PointId, ChainValue> {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// The zero value at `p` in this chain's degree.
    pub fn zero_value(&self, p: &PointId) -> Result<Option<ChainValue>, CycleError> {
        let Some(d) = self.value_degree() else {
            return Ok(None);
        };
        Ok(Some(match value_field(&self.scheme, p)? {
            Some(f) => ChainValue::Milnor(MilnorElement::zero(&f, d, self.module.coefficients())),
            None => ChainValue::Plane(PlaneSymbols::new(self.scheme.base(), d)),
        }))
    }

    fn check_value(&self, p: &PointId, v: &ChainValue) -> Result<(), CycleError> {
        let bad = |why: &str| {
            CycleError::InvalidChain(format!(
                "component at {}: {why}",
                self.scheme.point_label(p)
            ))
        };
        if self.scheme.codim(p) != Some(self.codim) {
            return Err(bad("not a point of this codimension"));
        }
        let d = self
            .value_degree()
            .ok_or_else(|| bad("the module vanishes in this degree"))?;
        match (v, value_field(&self.scheme, p)?) {
            (ChainValue::Milnor(m), Some(f)) => {
                if m.field() != &f || m.degree() != d {
                    return Err(bad(&format!(
                        "expected degree {d} over {f}, got degree {} over {}",
                        m.degree(),
                        m.field()
                    )));
                }
            }
            (ChainValue::Plane(s), None) => {
                if s.degree() != d || s.base != *self.scheme.base() {
                    return Err(bad("plane symbol of the wrong degree"));
                }
                let lines: Vec<LinearForm> = self
                    .scheme
                    .divisor_points(p)
                    .into_iter()
                    .filter_map(|(_, v)| match v {
                        Valuation::Line(l) => Some(l),
                        Valuation::Place(_) => None,
                    })
                    .collect();
                let z = LinearForm([
                    crate::gfield::Fe::ZERO,
                    crate::gfield::Fe::ZERO,
                    crate::gfield::Fe::ONE,
                ]);
                let local = self.scheme.lines_of().is_none_or(|(_, local)| local);
                if let Some(l) = s
                    .forms()
                    .iter()
                    .find(|l| !lines.contains(l) && !(local && **l == z))
                {
                    return Err(bad(&format!(
                        "{} is not a line of the scheme",
                        l.format(self.scheme.base())
                    )));
                }
            }
            _ => return Err(bad("value of the wrong kind")),
        }
        Ok(())
    }

    /// Add `v` to the component at `p`.
    /// Degree-0 values are integers and get moved to the residue field at `p`.
    pub fn insert(&mut self, p: PointId, v: ChainValue) -> Result<(), CycleError> {
        let v = match (&v, value_field(&self.scheme, &p)?) {
            (ChainValue::Milnor(m), Some(f))
                if m.degree() == 0 && m.residues().is_empty() && m.field() != &f =>
            {
                ChainValue::Milnor(MilnorElement::integer(&f, m.constant(), m.coefficients()))
            }
            _ => v,
        };
        self.check_value(&p, &v)?;
        let v = match &v {
            ChainValue::Milnor(m) => ChainValue::Milnor(self.module.reduce(m)),
            other => other.clone(),
        };
        let sum = match self.components.remove(&p) {
            Some(old) => old.add(&v)?,
            None => v,
        };
        if !sum.is_zero() {
            self.components.insert(p, sum);
        }
        Ok(())
    }

    pub fn with(mut self, p: PointId, v: impl Into<ChainValue>) -> Result<Self, CycleError> {
        self.insert(p, v.into())?;
        Ok(self)
    }

    fn check_same_group(&self, o: &Self) -> Result<(), CycleError> {
        if self.scheme.name() != o.scheme.name()
            || self.module != o.module
            || self.codim != o.codim
            || self.grading != o.grading
        {
            return Err(CycleError::InvalidChain(
                "chains live in different groups".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, CycleError> {
        self.check_same_group(o)?;
        let mut out = self.clone();
        for (p, v) in &o.components {
            out.insert(p.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.components = self
            .components
            .iter()
            .map(|(p, v)| (p.clone(), v.scale(k)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, CycleError> {
        self.add(&o.neg())
    }

    pub fn format(&self) -> String {
        if self.components.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(p, v)| format!("{} @ {}", v.format(), self.scheme.point_label(p)))
            .collect();
        parts.join(" + ")
    }
}

/// `d_y^x(xi) = sum_t N_{kappa(t)/kappa(y)} d_{v_t}(xi)`; zero unless `y`
/// specializes `x`.
pub fn point_differential(
    x: &SchemeDescription,
    phi: &CycleModuleInstance,
    from: &PointId,
    to: &PointId,
    xi: &ChainValue,
) -> Result<Option<MilnorElement>, CycleError> {
    let degree = match xi {
        ChainValue::Milnor(m) => m.degree(),
        ChainValue::Plane(s) => s.degree(),
    };
    let Some(target_degree) = degree.checked_sub(1) else {
        return Ok(None);
    };
    let target_field = value_field(x, to)?.ok_or_else(|| {
        CycleError::InvalidChain(format!("{} carries plane symbols", x.point_label(to)))
    })?;
    let mut acc = MilnorElement::zero(&target_field, target_degree, phi.coefficients());
    for entry in x.fibers(from, to)? {
        let r = match (&entry.valuation, xi) {
            (Valuation::Place(v), ChainValue::Milnor(m)) => phi.residue(v, m)?,
            (Valuation::Line(l), ChainValue::Plane(s)) => match s.residue(phi, l)? {
                Some(r) => r,
                None => continue,
            },
            _ => {
                return Err(CycleError::InvalidChain(format!(
                    "value at {} does not match the valuation kind",
                    x.point_label(from)
                )))
            }
        };
        let r = match (entry.phi, r.field() == &target_field) {
            (_, true) => r,
            (EmbeddingKind::Canonical, false) => phi.norm(&target_field, &r)?,
            (EmbeddingKind::Identity, false) => {
                return Err(CycleError::InvalidChain(format!(
                    "identity fiber between {} and {}",
                    r.field(),
                    target_field
                )))
            }
        };
        acc = acc.add(&r)?;
    }
    Ok(Some(acc))
}

/// Points of codimension `p + 1` where `d(xi)` may be nonzero.
fn targets(
    x: &SchemeDescription,
    phi: &CycleModuleInstance,
    from: &PointId,
    xi: &ChainValue,
) -> Result<Vec<PointId>, CycleError> {
    if let PointId::Component(i, inner) = from {
        let Some(part) = x.parts().get(*i) else {
            return Ok(Vec::new());
        };
        return Ok(targets(part, phi, inner, xi)?
            .into_iter()
            .map(|p| PointId::Component(*i, Box::new(p)))
            .collect());
    }
    if let PointId::Named(name) = from {
        return Ok(x
            .incidences_from(name)
            .into_iter()
            .map(PointId::Named)
            .collect());
    }
    Ok(match xi {
        ChainValue::Plane(_) => x.divisor_points(from).into_iter().map(|(p, _)| p).collect(),
        ChainValue::Milnor(m) if m.field().is_function_field() => {
            let mut out = Vec::new();
            for v in crate::cyclemod::check_fd(phi, m)? {
                if let Some(p) = x.point_at_place(from, &v) {
                    out.push(p);
                }
            }
            out
        }
        ChainValue::Milnor(_) => Vec::new(),
    })
}

/// `d^p`, computed componentwise with finite support.
pub fn differential(c: &CycleChain) -> Result<CycleChain, CycleError> {
    let x = &c.scheme;
    let mut out = CycleChain::zero(x, &c.module, c.codim + 1, c.grading);
    if out.value_degree().is_none() {
        return Ok(out);
    }
    for (from, xi) in &c.components {
        for to in targets(x, &c.module, from, xi)? {
            if let Some(r) = point_differential(x, &c.module, from, &to, xi)? {
                if !r.is_zero() {
                    out.insert(to, ChainValue::Milnor(r))?;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
