use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ChainValue, CycleChain, CycleError, PlaneSymbols};
use crate::cyclemod::CycleModuleInstance;
use crate::milnor::{FieldRef, MilnorElement};
use crate::parse::{parse_field_ref, parse_place};
use crate::schememod::{parse_plane_function, SchemeDescription};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ResidueDoc {
    pub place: String,
    pub value: i64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SymbolDoc {
    pub coeff: i64,
    pub entries: Vec<String>,
}

/// Component value: normal-form coordinates of a Milnor element, or a
/// formal sum of plane symbols.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum ElementDoc {
    Milnor {
        field: String,
        degree: u32,
        constant: i64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        residues: Vec<ResidueDoc>,
        text: String,
    },
    Plane {
        degree: u32,
        symbols: Vec<SymbolDoc>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub point: String,
    pub element: ElementDoc,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub scheme: String,
    pub codim: usize,
    pub grading: i64,
    pub components: Vec<ComponentDoc>,
}

fn element_doc(v: &ChainValue) -> ElementDoc {
    match v {
        ChainValue::Milnor(m) => ElementDoc::Milnor {
            field: m.field().to_string(),
            degree: m.degree(),
            constant: m.constant(),
            residues: m
                .residues()
                .iter()
                .map(|(pi, v)| ResidueDoc {
                    place: pi.format("t"),
                    value: *v,
                })
                .collect(),
            text: m.to_string(),
        },
        ChainValue::Plane(s) => ElementDoc::Plane {
            degree: s.degree(),
            symbols: s
                .terms()
                .iter()
                .map(|(c, e)| SymbolDoc {
                    coeff: *c,
                    entries: e.iter().map(|f| f.format()).collect(),
                })
                .collect(),
        },
    }
}

pub fn chain_document(c: &CycleChain) -> ChainDocument {
    ChainDocument {
        scheme: c.scheme().name().to_string(),
        codim: c.codim(),
        grading: c.grading(),
        components: c
            .components()
            .iter()
            .map(|(p, v)| ComponentDoc {
                point: c.scheme().point_label(p),
                element: element_doc(v),
            })
            .collect(),
    }
}

pub fn chain_to_json(c: &CycleChain) -> String {
    serde_json::to_string_pretty(&chain_document(c)).expect("chain documents serialize")
}

/// Read a chain on `x` back from its JSON form.
pub fn chain_from_json(
    text: &str,
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
) -> Result<CycleChain, CycleError> {
    let doc: ChainDocument =
        serde_json::from_str(text).map_err(|e| CycleError::InvalidChain(e.to_string()))?;
    if doc.scheme != x.name() {
        return Err(CycleError::InvalidChain(format!(
            "chain lives on {}, not {}",
            doc.scheme,
            x.name()
        )));
    }
    let mut c = CycleChain::zero(x, phi, doc.codim, doc.grading);
    let coeffs = phi.coefficients();
    for comp in &doc.components {
        let p = x.parse_point_label(&comp.point)?;
        let v = match &comp.element {
            ElementDoc::Milnor {
                field,
                degree,
                constant,
                residues,
                ..
            } => match parse_field_ref(field)? {
                FieldRef::Finite(k) => {
                    ChainValue::Milnor(MilnorElement::finite(&k, *degree, *constant, coeffs))
                }
                FieldRef::Function(k) => {
                    let mut map = BTreeMap::new();
                    for r in residues {
                        let v = parse_place(&r.place, &k, "t")?;
                        let pi = v
                            .poly()
                            .ok_or_else(|| CycleError::InvalidChain("residue at infinity".into()))?
                            .clone();
                        map.insert(pi, r.value);
                    }
                    ChainValue::Milnor(MilnorElement::function(&k, *degree, *constant, map, coeffs))
                }
            },
            ElementDoc::Plane { degree, symbols } => {
                let mut s = PlaneSymbols::new(x.base(), *degree);
                for sym in symbols {
                    let entries = sym
                        .entries
                        .iter()
                        .map(|e| parse_plane_function(e, x.base(), &["x", "y", "z"]))
                        .collect::<Result<Vec<_>, _>>()?;
                    if entries.len() as u32 != *degree {
                        return Err(CycleError::InvalidChain(
                            "symbol length differs from degree".into(),
                        ));
                    }
                    s = s.add(&PlaneSymbols::symbol(x.base(), entries).scale(sym.coeff))?;
                }
                ChainValue::Plane(s)
            }
        };
        c.insert(p, v)?;
    }
    Ok(c)
}
