use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    parse_linear_form, AbstractScheme, EmbeddingKind, FiberEntry, LinearForm, PointId,
    ResidueField, SchemeDescription, SchemeError, SchemeKind, SupportHint, Valuation,
};
use crate::gfield::{canonical_field, Fe, FiniteField, Place};
use crate::parse::parse_place;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    pub e: u32,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum FieldDoc {
    Function {
        function_field_over: FieldSpec,
        vars: Vec<String>,
    },
    Finite(FieldSpec),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    pub codim: usize,
    pub residue_field: FieldDoc,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FiberDoc {
    pub t_field: FieldDoc,
    pub phi_t: String,
    pub uniformizer: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct IncidenceDoc {
    pub x: String,
    pub y: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<Vec<FiberDoc>>,
}

/// On-disk form of an explicit scheme.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SchemeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub points: Vec<PointDoc>,
    pub incidences: Vec<IncidenceDoc>,
}

fn spec_of(k: &FiniteField) -> FieldSpec {
    FieldSpec {
        p: k.characteristic() as u64,
        e: k.degree(),
    }
}

fn field_doc(f: &ResidueField) -> FieldDoc {
    match f {
        ResidueField::Finite(k) => FieldDoc::Finite(spec_of(k)),
        ResidueField::Function { base, vars } => FieldDoc::Function {
            function_field_over: spec_of(base),
            vars: vars.clone(),
        },
    }
}

fn field_from_doc(d: &FieldDoc) -> Result<ResidueField, SchemeError> {
    Ok(match d {
        FieldDoc::Finite(s) => ResidueField::Finite(canonical_field(s.p, s.e)?),
        FieldDoc::Function {
            function_field_over: s,
            vars,
        } => {
            if vars.is_empty() || vars.len() > 3 {
                return Err(SchemeError::Schema(format!(
                    "function field with {} variables",
                    vars.len()
                )));
            }
            ResidueField::Function {
                base: canonical_field(s.p, s.e)?,
                vars: vars.clone(),
            }
        }
    })
}

fn affine_form(k: &FiniteField, l: &LinearForm, vars: &[String]) -> String {
    let mut terms = Vec::new();
    for (i, c) in l.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let coeff = k.format(*c);
        let coeff = if coeff.contains('+') {
            format!("({coeff})")
        } else {
            coeff
        };
        terms.push(match vars.get(i) {
            Some(v) if *c == Fe::ONE => v.clone(),
            Some(v) => format!("{coeff}*{v}"),
            None => coeff,
        });
    }
    terms.join(" + ")
}

fn place_descriptor(v: &Place, var: &str) -> String {
    match v {
        Place::Infinity => format!("1/{var}"),
        Place::Finite(pi) => pi.format(var),
    }
}

fn embedding_descriptor(e: EmbeddingKind) -> String {
    match e {
        EmbeddingKind::Identity => "id".into(),
        EmbeddingKind::Canonical => "canonical".into(),
    }
}

/// Serialize a scheme with finitely many points (or a support hint bounding
/// them) as pretty-printed JSON.
pub fn export(x: &SchemeDescription, hint: Option<&SupportHint>) -> Result<String, SchemeError> {
    let doc = to_document(x, hint)?;
    serde_json::to_string_pretty(&doc).map_err(|e| SchemeError::Schema(e.to_string()))
}

fn to_document(
    x: &SchemeDescription,
    hint: Option<&SupportHint>,
) -> Result<SchemeDocument, SchemeError> {
    if let SchemeKind::Union(_) = x.kind() {
        return Err(SchemeError::Unsupported("export of disjoint unions".into()));
    }
    let k = x.base();
    let affine = matches!(x.kind(), SchemeKind::Lines { local: true, .. });
    let generic_vars: Vec<String> = if affine {
        vec!["t".into(), "u".into()]
    } else {
        vec!["x".into(), "y".into(), "z".into()]
    };
    let rename = |f: ResidueField| match (&f, x.kind()) {
        (ResidueField::Function { base, vars }, SchemeKind::Lines { .. }) if vars.len() == 3 => {
            ResidueField::Function {
                base: Arc::clone(base),
                vars: generic_vars.clone(),
            }
        }
        _ => f,
    };
    let label = |p: &PointId| match p {
        PointId::Line(l) if affine => format!("V({})", affine_form(k, l, &generic_vars)),
        PointId::Plane(_) if affine => "origin".to_string(),
        _ => x.point_label(p),
    };
    let mut points = Vec::new();
    let mut ids = Vec::new();
    for c in 0..=x.dimension() {
        for p in x.points_of_codim(c, hint)? {
            let rf = rename(x.residue_field(&p)?);
            points.push(PointDoc {
                id: label(&p),
                codim: c,
                residue_field: field_doc(&rf),
            });
            ids.push((c, p, rf));
        }
    }
    points.sort_by(|a, b| (a.codim, &a.id).cmp(&(b.codim, &b.id)));
    let mut incidences = Vec::new();
    for (cx, px, fx) in &ids {
        for (cy, py, _) in &ids {
            if *cy != cx + 1 {
                continue;
            }
            let fib = x.fibers(px, py)?;
            if fib.is_empty() {
                continue;
            }
            let var = match fx {
                ResidueField::Function { vars, .. } => vars.clone(),
                ResidueField::Finite(_) => Vec::new(),
            };
            let fiber = fib
                .iter()
                .map(|e| FiberDoc {
                    t_field: field_doc(&e.t_field),
                    phi_t: embedding_descriptor(e.phi),
                    uniformizer: match &e.valuation {
                        Valuation::Place(v) => {
                            place_descriptor(v, var.first().map_or("t", |s| s.as_str()))
                        }
                        Valuation::Line(l) => affine_form(k, l, &var),
                    },
                })
                .collect();
            incidences.push(IncidenceDoc {
                x: label(px),
                y: label(py),
                fiber: Some(fiber),
            });
        }
    }
    incidences.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
    Ok(SchemeDocument {
        name: Some(x.name().to_string()),
        dimension: x.dimension(),
        points,
        incidences,
    })
}

fn inconsistent(msg: String) -> SchemeError {
    SchemeError::Inconsistency(msg)
}

/// Load and validate an explicit scheme. Fibers are taken on trust and the
/// result is marked user-certified.
pub fn load_abstract(text: &str) -> Result<SchemeDescription, SchemeError> {
    let doc: SchemeDocument =
        serde_json::from_str(text).map_err(|e| SchemeError::Schema(e.to_string()))?;
    if doc.points.is_empty() {
        return Err(SchemeError::Schema("empty point set".into()));
    }
    if doc.dimension > 2 {
        return Err(SchemeError::Schema(format!(
            "dimension {} exceeds 2",
            doc.dimension
        )));
    }
    let mut points: BTreeMap<String, (usize, ResidueField)> = BTreeMap::new();
    for p in &doc.points {
        let rf = field_from_doc(&p.residue_field)?;
        if p.codim > doc.dimension {
            return Err(SchemeError::Schema(format!(
                "{} has codimension {} > dimension",
                p.id, p.codim
            )));
        }
        if rf.transcendence_degree() != doc.dimension - p.codim {
            return Err(inconsistent(format!(
                "dimension formula: {} of codimension {} has residue field {}",
                p.id,
                p.codim,
                rf.label()
            )));
        }
        if points.insert(p.id.clone(), (p.codim, rf)).is_some() {
            return Err(SchemeError::Schema(format!("duplicate point id {}", p.id)));
        }
    }
    let base = points
        .values()
        .filter(|(c, _)| *c == 0)
        .map(|(_, f)| Arc::clone(f.base()))
        .next()
        .ok_or_else(|| SchemeError::Schema("no codimension-0 point".into()))?;
    for (id, (_, f)) in &points {
        let ok = match f {
            ResidueField::Function { base: b, .. } => *b == base,
            ResidueField::Finite(k) => {
                k.characteristic() == base.characteristic() && k.degree() % base.degree() == 0
            }
        };
        if !ok {
            return Err(inconsistent(format!(
                "residue field of {id} is not an extension of F{}",
                base.order()
            )));
        }
    }
    let mut incidences = BTreeMap::new();
    for inc in &doc.incidences {
        let (cx, fx) = points
            .get(&inc.x)
            .ok_or_else(|| SchemeError::Schema(format!("unknown point id {}", inc.x)))?;
        let (cy, fy) = points
            .get(&inc.y)
            .ok_or_else(|| SchemeError::Schema(format!("unknown point id {}", inc.y)))?;
        if *cy != cx + 1 {
            return Err(inconsistent(format!(
                "specialization {} -> {} must raise codimension by one",
                inc.x, inc.y
            )));
        }
        let fiber = match &inc.fiber {
            None => None,
            Some(entries) => Some(
                entries
                    .iter()
                    .map(|e| fiber_entry(e, fx, fy, &inc.x, &inc.y))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        if incidences
            .insert((inc.x.clone(), inc.y.clone()), fiber)
            .is_some()
        {
            return Err(SchemeError::Schema(format!(
                "duplicate incidence {} -> {}",
                inc.x, inc.y
            )));
        }
    }
    let name = doc.name.clone().unwrap_or_else(|| "abstract".into());
    Ok(SchemeDescription::from_abstract(
        name,
        base,
        AbstractScheme {
            dimension: doc.dimension,
            points,
            incidences,
        },
    ))
}

fn fiber_entry(
    e: &FiberDoc,
    fx: &ResidueField,
    fy: &ResidueField,
    x: &str,
    y: &str,
) -> Result<FiberEntry, SchemeError> {
    let t_field = field_from_doc(&e.t_field)?;
    let phi = match e.phi_t.as_str() {
        "id" => EmbeddingKind::Identity,
        "canonical" => EmbeddingKind::Canonical,
        other => {
            return Err(SchemeError::Schema(format!(
                "unknown embedding descriptor {other}"
            )))
        }
    };
    let extends = match (fy, &t_field) {
        (ResidueField::Finite(ky), ResidueField::Finite(kt)) => {
            ky.characteristic() == kt.characteristic()
                && kt.degree() % ky.degree() == 0
                && (phi == EmbeddingKind::Canonical || ky.degree() == kt.degree())
        }
        (
            ResidueField::Function { base: by, vars: vy },
            ResidueField::Function { base: bt, vars: vt },
        ) => by == bt && vy.len() == vt.len(),
        _ => false,
    };
    if !extends {
        return Err(inconsistent(format!(
            "fiber of {x} -> {y}: {} does not extend {} via {}",
            t_field.label(),
            fy.label(),
            e.phi_t
        )));
    }
    let valuation = match fx {
        ResidueField::Finite(_) => {
            return Err(inconsistent(format!(
                "{x} has a finite residue field and no valuations"
            )));
        }
        ResidueField::Function { base, vars } if vars.len() >= 2 => {
            let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            Valuation::Line(parse_linear_form(&e.uniformizer, base, &names)?)
        }
        ResidueField::Function { base, vars } => {
            let var = vars[0].as_str();
            let v = if e.uniformizer.replace(' ', "") == format!("1/{var}") {
                Place::Infinity
            } else {
                parse_place(&e.uniformizer, base, var)?
            };
            let kt = v.residue_field(base)?;
            if ResidueField::Finite(kt) != t_field {
                return Err(inconsistent(format!(
                    "fiber of {x} -> {y}: the residue field of {} is not {}",
                    e.uniformizer,
                    t_field.label()
                )));
            }
            Valuation::Place(v)
        }
    };
    Ok(FiberEntry {
        t_field,
        phi,
        valuation,
    })
}
