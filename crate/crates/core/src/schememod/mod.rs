//! Explicit schemes of dimension at most 2: graded points, residue fields,
//! specializations and normalization fibers.

mod json;
pub mod plane;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gfield::{canonical_field, places_up_to, Fe, FieldError, FiniteField, Place, Poly};
use crate::parse::ParseError;

pub use json::{export, load_abstract, SchemeDocument};
pub use plane::{parse_linear_form, parse_plane_function, LinearForm, PlaneFunction, ProjPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),
    #[error("codimension-{0} points form an infinite family; a support hint is required")]
    NeedSupportHint(usize),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("inconsistent scheme: {0}")]
    Inconsistency(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("no fiber data for the incidence {0} -> {1}")]
    MissingFiber(String, String),
    #[error("unsupported scheme: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointId {
    Generic,
    Closed(Place),
    Line(LinearForm),
    Plane(ProjPoint),
    LinePlace(LinearForm, Poly),
    Component(usize, Box<PointId>),
    Named(String),
}

impl fmt::Debug for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointId::Generic => write!(f, "generic"),
            PointId::Closed(v) => write!(f, "{}", v.label("t")),
            PointId::Line(l) => write!(f, "V({:?})", l.0.map(|c| c.0)),
            PointId::Plane(p) => write!(f, "{:?}", p.0.map(|c| c.0)),
            PointId::LinePlace(l, pi) => {
                write!(f, "V({:?})@({})", l.0.map(|c| c.0), pi.format("s"))
            }
            PointId::Component(i, p) => write!(f, "#{i}:{p:?}"),
            PointId::Named(s) => write!(f, "{s}"),
        }
    }
}

/// Residue field of a point: finite, or a rational function field in the
/// listed variables (three variables are homogeneous plane coordinates).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ResidueField {
    Finite(Arc<FiniteField>),
    Function {
        base: Arc<FiniteField>,
        vars: Vec<String>,
    },
}

impl ResidueField {
    pub fn base(&self) -> &Arc<FiniteField> {
        match self {
            ResidueField::Finite(k) => k,
            ResidueField::Function { base, .. } => base,
        }
    }

    pub fn transcendence_degree(&self) -> usize {
        match self {
            ResidueField::Finite(_) => 0,
            ResidueField::Function { vars, .. } => vars.len().min(2),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ResidueField::Finite(k) => format!("F{}", k.order()),
            ResidueField::Function { base, vars } => {
                format!("F{}({})", base.order(), vars.join(","))
            }
        }
    }
}

/// How `kappa(y)` maps into `kappa(t)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EmbeddingKind {
    Identity,
    Canonical,
}

/// The valuation `v_t` on `kappa(x)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Valuation {
    /// A place of the one-variable function field `kappa(x)`.
    Place(Place),
    /// Order of vanishing along a line of the plane.
    Line(LinearForm),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiberEntry {
    pub t_field: ResidueField,
    pub phi: EmbeddingKind,
    pub valuation: Valuation,
}

/// Bounds enumeration of infinite point families.
#[derive(Clone, Debug)]
pub enum SupportHint {
    /// Points on the zero loci of these polynomials.
    Polys(Vec<Poly>),
    /// All places of degree at most this bound.
    DegreeBound(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct AbstractScheme {
    pub dimension: usize,
    pub points: BTreeMap<String, (usize, ResidueField)>,
    pub incidences: BTreeMap<(String, String), Option<Vec<FiberEntry>>>,
}

#[derive(Clone, Debug)]
pub(crate) enum SchemeKind {
    Point {
        degree: u32,
    },
    Curve {
        projective: bool,
        removed: Vec<Place>,
    },
    Union(Vec<SchemeDescription>),
    Lines {
        forms: Vec<LinearForm>,
        local: bool,
    },
    Abstract(AbstractScheme),
}

#[derive(Clone, Debug)]
pub struct SchemeDescription {
    name: String,
    base: Arc<FiniteField>,
    kind: SchemeKind,
}

fn origin() -> ProjPoint {
    ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE])
}

impl SchemeDescription {
    /// `Spec F_{q^d}`.
    pub fn point(base: &Arc<FiniteField>, degree: u32) -> Self {
        SchemeDescription {
            name: if degree == 1 {
                format!("point/F{}", base.order())
            } else {
                format!("point/F{}^{degree}", base.order())
            },
            base: Arc::clone(base),
            kind: SchemeKind::Point { degree },
        }
    }

    pub fn affine_line(base: &Arc<FiniteField>) -> Self {
        SchemeDescription {
            name: format!("A1/F{}", base.order()),
            base: Arc::clone(base),
            kind: SchemeKind::Curve {
                projective: false,
                removed: Vec::new(),
            },
        }
    }

    pub fn projective_line(base: &Arc<FiniteField>) -> Self {
        SchemeDescription {
            name: format!("P1/F{}", base.order()),
            base: Arc::clone(base),
            kind: SchemeKind::Curve {
                projective: true,
                removed: Vec::new(),
            },
        }
    }

    /// `A^1` with finitely many closed points removed.
    pub fn affine_line_minus(base: &Arc<FiniteField>, removed: Vec<Place>) -> Self {
        let mut removed: Vec<Place> = removed.into_iter().filter(|p| !p.is_infinite()).collect();
        removed.sort();
        removed.dedup();
        let labels: Vec<String> = removed.iter().map(|p| p.label("t")).collect();
        SchemeDescription {
            name: format!("A1/F{}-{{{}}}", base.order(), labels.join(",")),
            base: Arc::clone(base),
            kind: SchemeKind::Curve {
                projective: false,
                removed,
            },
        }
    }

    pub fn union(parts: Vec<SchemeDescription>) -> Result<Self, SchemeError> {
        let base = parts
            .first()
            .map(|p| Arc::clone(&p.base))
            .ok_or_else(|| SchemeError::Schema("empty union".into()))?;
        if parts.iter().any(|p| p.base != base) {
            return Err(SchemeError::Inconsistency(
                "union over different base fields".into(),
            ));
        }
        let names: Vec<&str> = parts.iter().map(|p| p.name.as_str()).collect();
        Ok(SchemeDescription {
            name: format!("({})", names.join(" + ")),
            base,
            kind: SchemeKind::Union(parts),
        })
    }

    /// A configuration of distinct lines in `P^2`.
    pub fn line_config(
        base: &Arc<FiniteField>,
        forms: Vec<LinearForm>,
    ) -> Result<Self, SchemeError> {
        Self::lines(base, forms, false)
    }

    /// Lines through the origin `[0:0:1]`, in the local scheme at the origin.
    pub fn line_config_local(
        base: &Arc<FiniteField>,
        forms: Vec<LinearForm>,
    ) -> Result<Self, SchemeError> {
        if let Some(l) = forms.iter().find(|l| !l.contains(base, &origin())) {
            return Err(SchemeError::DegenerateConfig(format!(
                "{} misses the origin",
                l.format(base)
            )));
        }
        Self::lines(base, forms, true)
    }

    fn lines(
        base: &Arc<FiniteField>,
        forms: Vec<LinearForm>,
        local: bool,
    ) -> Result<Self, SchemeError> {
        let mut seen = BTreeSet::new();
        for l in &forms {
            if !seen.insert(*l) {
                return Err(SchemeError::DegenerateConfig(format!(
                    "repeated line {}",
                    l.format(base)
                )));
            }
        }
        let labels: Vec<String> = forms.iter().map(|l| l.format(base)).collect();
        let name = if local {
            "line_config_local"
        } else {
            "line_config"
        };
        Ok(SchemeDescription {
            name: format!("{name}/F{}{{{}}}", base.order(), labels.join(", ")),
            base: Arc::clone(base),
            kind: SchemeKind::Lines { forms, local },
        })
    }

    /// Built-ins by name: `point`, `A1`, `P1`, `line_config`, `line_config_local`.
    /// `params` are the extension degree for `point` and linear forms in
    /// `x, y, z` for line configurations.
    pub fn builtin(name: &str, q: u64, params: &[String]) -> Result<Self, SchemeError> {
        let base = crate::gfield::field_of_order(q)?;
        match name {
            "point" => {
                let d = match params.first() {
                    None => 1,
                    Some(s) => s
                        .parse()
                        .map_err(|_| SchemeError::Schema(format!("bad degree {s}")))?,
                };
                if d == 0 {
                    return Err(SchemeError::Schema("degree must be positive".into()));
                }
                canonical_field(base.characteristic() as u64, base.degree() * d)?;
                Ok(SchemeDescription::point(&base, d))
            }
            "A1" => Ok(SchemeDescription::affine_line(&base)),
            "P1" => Ok(SchemeDescription::projective_line(&base)),
            "line_config" | "line_config_local" => {
                let forms = params
                    .iter()
                    .map(|s| parse_linear_form(s, &base, &["x", "y", "z"]))
                    .collect::<Result<Vec<_>, _>>()?;
                if name == "line_config" {
                    SchemeDescription::line_config(&base, forms)
                } else {
                    SchemeDescription::line_config_local(&base, forms)
                }
            }
            other => Err(SchemeError::Unsupported(other.to_string())),
        }
    }

    pub(crate) fn from_abstract(
        name: String,
        base: Arc<FiniteField>,
        data: AbstractScheme,
    ) -> Self {
        SchemeDescription {
            name,
            base,
            kind: SchemeKind::Abstract(data),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Arc<FiniteField> {
        &self.base
    }

    pub(crate) fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            SchemeKind::Point { .. } => 0,
            SchemeKind::Curve { .. } => 1,
            SchemeKind::Union(parts) => parts.iter().map(|p| p.dimension()).max().unwrap_or(0),
            SchemeKind::Lines { .. } => 2,
            SchemeKind::Abstract(a) => a.dimension,
        }
    }

    /// Fibers supplied by the user rather than computed.
    pub fn is_user_certified(&self) -> bool {
        match &self.kind {
            SchemeKind::Abstract(_) => true,
            SchemeKind::Union(parts) => parts.iter().any(|p| p.is_user_certified()),
            _ => false,
        }
    }

    pub fn is_proper(&self) -> bool {
        match &self.kind {
            SchemeKind::Point { .. } => true,
            SchemeKind::Curve { projective, .. } => *projective,
            SchemeKind::Union(parts) => parts.iter().all(|p| p.is_proper()),
            SchemeKind::Lines { local, .. } => !local,
            SchemeKind::Abstract(_) => false,
        }
    }

    pub fn is_projective_line(&self) -> bool {
        matches!(
            self.kind,
            SchemeKind::Curve {
                projective: true,
                ..
            }
        )
    }

    pub fn is_affine_line(&self) -> bool {
        matches!(&self.kind, SchemeKind::Curve { projective: false, removed } if removed.is_empty())
    }

    pub fn removed_places(&self) -> &[Place] {
        match &self.kind {
            SchemeKind::Curve { removed, .. } => removed,
            _ => &[],
        }
    }

    /// The lines of a configuration, in the given order.
    pub fn lines_of(&self) -> Option<(&[LinearForm], bool)> {
        match &self.kind {
            SchemeKind::Lines { forms, local } => Some((forms, *local)),
            _ => None,
        }
    }

    fn curve_has(&self, v: &Place) -> bool {
        match &self.kind {
            SchemeKind::Curve {
                projective,
                removed,
            } => {
                if v.is_infinite() {
                    *projective
                } else {
                    !removed.contains(v)
                }
            }
            _ => false,
        }
    }

    fn config_points(&self) -> Vec<ProjPoint> {
        match &self.kind {
            SchemeKind::Lines { local: true, .. } => vec![origin()],
            SchemeKind::Lines {
                forms,
                local: false,
            } => {
                let mut pts = BTreeSet::new();
                for (i, a) in forms.iter().enumerate() {
                    for b in &forms[i + 1..] {
                        if let Some(p) = a.intersect(&self.base, b) {
                            pts.insert(p);
                        }
                    }
                }
                pts.into_iter().collect()
            }
            _ => Vec::new(),
        }
    }

    /// Whether `p` is a point of this scheme.
    pub fn contains(&self, p: &PointId) -> bool {
        self.codim(p).is_some()
    }

    pub fn codim(&self, p: &PointId) -> Option<usize> {
        let k = &self.base;
        match (&self.kind, p) {
            (_, PointId::Generic)
                if !matches!(self.kind, SchemeKind::Union(_) | SchemeKind::Abstract(_)) =>
            {
                Some(0)
            }
            (SchemeKind::Curve { .. }, PointId::Closed(v)) if self.curve_has(v) => Some(1),
            (SchemeKind::Lines { forms, .. }, PointId::Line(l)) if forms.contains(l) => Some(1),
            (SchemeKind::Lines { local, .. }, PointId::Plane(pt)) => {
                let ok = if *local { *pt == origin() } else { true };
                ok.then_some(2)
            }
            (
                SchemeKind::Lines {
                    forms,
                    local: false,
                },
                PointId::LinePlace(l, pi),
            ) => (forms.contains(l) && pi.deg() >= 2 && pi.is_monic() && pi.field() == k)
                .then_some(2),
            (SchemeKind::Union(parts), PointId::Component(i, q)) => parts.get(*i)?.codim(q),
            (SchemeKind::Abstract(a), PointId::Named(s)) => a.points.get(s).map(|(c, _)| *c),
            _ => None,
        }
    }

    pub fn residue_field(&self, p: &PointId) -> Result<ResidueField, SchemeError> {
        let unknown = || SchemeError::UnknownPoint(format!("{p:?}"));
        if !self.contains(p) {
            return Err(unknown());
        }
        let k = &self.base;
        let function = |vars: &[&str]| ResidueField::Function {
            base: Arc::clone(k),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        };
        Ok(match (&self.kind, p) {
            (SchemeKind::Point { degree }, _) => ResidueField::Finite(canonical_field(
                k.characteristic() as u64,
                k.degree() * degree,
            )?),
            (SchemeKind::Curve { .. }, PointId::Generic) => function(&["t"]),
            (SchemeKind::Curve { .. }, PointId::Closed(v)) => {
                ResidueField::Finite(v.residue_field(k)?)
            }
            (SchemeKind::Lines { .. }, PointId::Generic) => function(&["x", "y", "z"]),
            (SchemeKind::Lines { .. }, PointId::Line(_)) => function(&["s"]),
            (SchemeKind::Lines { .. }, PointId::Plane(_)) => ResidueField::Finite(Arc::clone(k)),
            (SchemeKind::Lines { .. }, PointId::LinePlace(_, pi)) => {
                ResidueField::Finite(Place::Finite(pi.clone()).residue_field(k)?)
            }
            (SchemeKind::Union(parts), PointId::Component(i, q)) => parts[*i].residue_field(q)?,
            (SchemeKind::Abstract(a), PointId::Named(s)) => a.points[s].1.clone(),
            _ => return Err(unknown()),
        })
    }

    /// Points of codimension `p` in canonical order.
    pub fn points_of_codim(
        &self,
        p: usize,
        hint: Option<&SupportHint>,
    ) -> Result<Vec<PointId>, SchemeError> {
        let k = &self.base;
        let mut out = match (&self.kind, p) {
            (SchemeKind::Union(parts), _) => {
                let mut out = Vec::new();
                for (i, part) in parts.iter().enumerate() {
                    for q in part.points_of_codim(p, hint)? {
                        out.push(PointId::Component(i, Box::new(q)));
                    }
                }
                out
            }
            (SchemeKind::Abstract(a), _) => a
                .points
                .iter()
                .filter(|(_, (c, _))| *c == p)
                .map(|(id, _)| PointId::Named(id.clone()))
                .collect(),
            (_, 0) => vec![PointId::Generic],
            (SchemeKind::Curve { projective, .. }, 1) => {
                let mut places: Vec<Place> = match hint {
                    None => return Err(SchemeError::NeedSupportHint(1)),
                    Some(SupportHint::DegreeBound(b)) => places_up_to(k, *b),
                    Some(SupportHint::Polys(polys)) => {
                        let mut v = Vec::new();
                        for f in polys {
                            if f.is_zero() {
                                continue;
                            }
                            v.extend(f.factor()?.1.into_iter().map(|(g, _)| Place::Finite(g)));
                        }
                        v
                    }
                };
                if *projective {
                    places.push(Place::Infinity);
                }
                places.sort();
                places.dedup();
                places
                    .into_iter()
                    .filter(|v| self.curve_has(v))
                    .map(PointId::Closed)
                    .collect()
            }
            (SchemeKind::Lines { forms, .. }, 1) => {
                let mut v: Vec<PointId> = forms.iter().map(|l| PointId::Line(*l)).collect();
                v.sort();
                v
            }
            (SchemeKind::Lines { .. }, 2) => self
                .config_points()
                .into_iter()
                .map(PointId::Plane)
                .collect(),
            _ => Vec::new(),
        };
        out.sort();
        Ok(out)
    }

    /// Normalization fiber of the closure of `x` above `y`; empty unless `y`
    /// specializes `x`.
    pub fn fibers(&self, x: &PointId, y: &PointId) -> Result<Vec<FiberEntry>, SchemeError> {
        let k = &self.base;
        let (Some(cx), Some(cy)) = (self.codim(x), self.codim(y)) else {
            return Err(SchemeError::UnknownPoint(format!("{x:?} or {y:?}")));
        };
        if cy != cx + 1 {
            return Ok(Vec::new());
        }
        Ok(match (&self.kind, x, y) {
            (SchemeKind::Curve { .. }, PointId::Generic, PointId::Closed(v)) => vec![FiberEntry {
                t_field: ResidueField::Finite(v.residue_field(k)?),
                phi: EmbeddingKind::Identity,
                valuation: Valuation::Place(v.clone()),
            }],
            (SchemeKind::Lines { .. }, PointId::Generic, PointId::Line(l)) => vec![FiberEntry {
                t_field: ResidueField::Function {
                    base: Arc::clone(k),
                    vars: vec!["s".into()],
                },
                phi: EmbeddingKind::Canonical,
                valuation: Valuation::Line(*l),
            }],
            (SchemeKind::Lines { .. }, PointId::Line(l), PointId::Plane(pt)) => {
                if l.contains(k, pt) {
                    vec![FiberEntry {
                        t_field: ResidueField::Finite(Arc::clone(k)),
                        phi: EmbeddingKind::Identity,
                        valuation: Valuation::Place(l.place_of(k, pt)),
                    }]
                } else {
                    Vec::new()
                }
            }
            (SchemeKind::Lines { .. }, PointId::Line(l), PointId::LinePlace(m, pi)) => {
                if l == m {
                    let v = Place::Finite(pi.clone());
                    vec![FiberEntry {
                        t_field: ResidueField::Finite(v.residue_field(k)?),
                        phi: EmbeddingKind::Identity,
                        valuation: Valuation::Place(v),
                    }]
                } else {
                    Vec::new()
                }
            }
            (SchemeKind::Union(parts), PointId::Component(i, a), PointId::Component(j, b)) => {
                if i == j {
                    parts[*i].fibers(a, b)?
                } else {
                    Vec::new()
                }
            }
            (SchemeKind::Abstract(a), PointId::Named(xs), PointId::Named(ys)) => {
                match a.incidences.get(&(xs.clone(), ys.clone())) {
                    None => Vec::new(),
                    Some(None) => return Err(SchemeError::MissingFiber(xs.clone(), ys.clone())),
                    Some(Some(f)) => f.clone(),
                }
            }
            _ => Vec::new(),
        })
    }

    /// The codimension-`p + 1` point at a place of the closure of `x`, when
    /// that place is a point of this scheme.
    pub fn point_at_place(&self, x: &PointId, v: &Place) -> Option<PointId> {
        let k = &self.base;
        match (&self.kind, x) {
            (SchemeKind::Curve { .. }, PointId::Generic) => {
                self.curve_has(v).then(|| PointId::Closed(v.clone()))
            }
            (SchemeKind::Lines { local, .. }, PointId::Line(l)) => {
                let id = match l.point_at(k, v) {
                    Some(pt) => PointId::Plane(pt),
                    None => PointId::LinePlace(*l, v.poly()?.clone()),
                };
                if *local && id != PointId::Plane(origin()) {
                    return None;
                }
                self.contains(&id).then_some(id)
            }
            (SchemeKind::Union(parts), PointId::Component(i, q)) => parts
                .get(*i)?
                .point_at_place(q, v)
                .map(|p| PointId::Component(*i, Box::new(p))),
            (SchemeKind::Abstract(a), PointId::Named(xs)) => a
                .incidences
                .iter()
                .filter(|((from, _), _)| from == xs)
                .find(|(_, fib)| {
                    fib.as_ref().is_some_and(|f| {
                        f.iter().any(|e| e.valuation == Valuation::Place(v.clone()))
                    })
                })
                .map(|((_, to), _)| PointId::Named(to.clone())),
            _ => None,
        }
    }

    /// Codimension-one points along which a plane function at the generic
    /// point may have a nonzero residue, with their valuations.
    pub fn divisor_points(&self, x: &PointId) -> Vec<(PointId, Valuation)> {
        match (&self.kind, x) {
            (SchemeKind::Lines { forms, .. }, PointId::Generic) => forms
                .iter()
                .map(|l| (PointId::Line(*l), Valuation::Line(*l)))
                .collect(),
            (SchemeKind::Abstract(a), PointId::Named(xs)) => a
                .incidences
                .iter()
                .filter(|((from, _), _)| from == xs)
                .flat_map(|((_, to), fib)| {
                    fib.iter()
                        .flatten()
                        .filter(|e| matches!(e.valuation, Valuation::Line(_)))
                        .map(|e| (PointId::Named(to.clone()), e.valuation.clone()))
                        .collect::<Vec<_>>()
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Inverse of `point_label`.
    pub fn parse_point_label(&self, label: &str) -> Result<PointId, SchemeError> {
        let k = &self.base;
        let label = label.trim();
        let unknown = || SchemeError::UnknownPoint(label.to_string());
        let p = match &self.kind {
            SchemeKind::Abstract(_) => PointId::Named(label.to_string()),
            SchemeKind::Union(parts) => {
                let rest = label.strip_prefix('#').ok_or_else(unknown)?;
                let (i, inner) = rest.split_once(':').ok_or_else(unknown)?;
                let i: usize = i.parse().map_err(|_| unknown())?;
                let part = parts.get(i).ok_or_else(unknown)?;
                PointId::Component(i, Box::new(part.parse_point_label(inner)?))
            }
            _ if label == "generic" => PointId::Generic,
            SchemeKind::Curve { .. } if label == "inf" => PointId::Closed(Place::Infinity),
            SchemeKind::Curve { .. } => {
                let inner = label
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(unknown)?;
                PointId::Closed(crate::parse::parse_place(inner, k, "t")?)
            }
            SchemeKind::Lines { .. } => {
                if let Some(inner) = label.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                    let coords: Vec<&str> = inner.split(':').collect();
                    if coords.len() != 3 {
                        return Err(unknown());
                    }
                    let mut v = [Fe::ZERO; 3];
                    for (slot, c) in v.iter_mut().zip(coords) {
                        let e = crate::parse::parse_expr(c)?;
                        *slot = crate::parse::field_element(k, &e)?;
                    }
                    PointId::Plane(ProjPoint::new(k, v).ok_or_else(unknown)?)
                } else {
                    let rest = label.strip_prefix("V(").ok_or_else(unknown)?;
                    match rest.split_once(")@(") {
                        Some((l, pi)) => {
                            let l = parse_linear_form(l, k, &["x", "y", "z"])?;
                            let pi = pi.strip_suffix(')').ok_or_else(unknown)?;
                            let v = crate::parse::parse_place(pi, k, "s")?;
                            PointId::LinePlace(l, v.poly().ok_or_else(unknown)?.clone())
                        }
                        None => {
                            let l = rest.strip_suffix(')').ok_or_else(unknown)?;
                            PointId::Line(parse_linear_form(l, k, &["x", "y", "z"])?)
                        }
                    }
                }
            }
            SchemeKind::Point { .. } => return Err(unknown()),
        };
        if self.contains(&p) {
            Ok(p)
        } else {
            Err(unknown())
        }
    }

    pub fn parts(&self) -> &[SchemeDescription] {
        match &self.kind {
            SchemeKind::Union(parts) => parts,
            _ => &[],
        }
    }

    /// Ids of the points specializing the named point of an abstract scheme.
    pub fn incidences_from(&self, name: &str) -> Vec<String> {
        match &self.kind {
            SchemeKind::Abstract(a) => a
                .incidences
                .keys()
                .filter(|(from, _)| from == name)
                .map(|(_, to)| to.clone())
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn point_label(&self, p: &PointId) -> String {
        let k = &self.base;
        match p {
            PointId::Generic => "generic".into(),
            PointId::Closed(v) => match v {
                Place::Infinity => "inf".into(),
                Place::Finite(pi) => format!("({})", pi.format("t")),
            },
            PointId::Line(l) => format!("V({})", l.format(k)),
            PointId::Plane(pt) => pt.format(k),
            PointId::LinePlace(l, pi) => format!("V({})@({})", l.format(k), pi.format("s")),
            PointId::Component(i, q) => match &self.kind {
                SchemeKind::Union(parts) => format!("#{i}:{}", parts[*i].point_label(q)),
                _ => format!("#{i}:{q:?}"),
            },
            PointId::Named(s) => s.clone(),
        }
    }
}
