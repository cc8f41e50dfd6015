use std::sync::Arc;

use super::{ChainValue, CycleChain, CycleError};
use crate::milnor::FieldRef;
use crate::schememod::{PointId, ResidueField, SchemeDescription, SchemeKind};

fn point_of(x: &SchemeDescription) -> Arc<SchemeDescription> {
    Arc::new(SchemeDescription::point(x.base(), 1))
}

/// Push a closed-point chain forward along the structure map of a proper
/// built-in: `sum_x N_{kappa(x)/F_q}(c_x)`.
pub fn pushforward(c: &CycleChain) -> Result<CycleChain, CycleError> {
    let x = c.scheme();
    if !x.is_proper() || matches!(x.kind(), SchemeKind::Abstract(_)) {
        return Err(CycleError::UnsupportedMorphism(format!(
            "{} is not a proper built-in",
            x.name()
        )));
    }
    let target = point_of(x);
    let k = FieldRef::Finite(Arc::clone(x.base()));
    let dim = x.dimension();
    let codim = c.codim().checked_sub(dim).ok_or_else(|| {
        CycleError::UnsupportedMorphism("pushforward needs closed-point support".into())
    })?;
    let mut out = CycleChain::zero(&target, c.module(), codim, c.grading() - dim as i64);
    for (p, v) in c.components() {
        let closed =
            matches!(x.residue_field(p)?, ResidueField::Finite(_)) && x.codim(p) == Some(dim);
        let m = v.as_milnor().filter(|_| closed).ok_or_else(|| {
            CycleError::UnsupportedMorphism("pushforward needs closed-point support".into())
        })?;
        out.insert(
            PointId::Generic,
            ChainValue::Milnor(c.module().norm(&k, m)?),
        )?;
    }
    Ok(out)
}

/// Flat pullback to `source` along the structure map to a point, or along an
/// open immersion of built-in curves.
pub fn pullback_flat(
    source: &Arc<SchemeDescription>,
    c: &CycleChain,
) -> Result<CycleChain, CycleError> {
    let y = c.scheme();
    let unsupported =
        || CycleError::UnsupportedMorphism(format!("{} -> {}", source.name(), y.name()));
    if source.base() != y.base() {
        return Err(unsupported());
    }
    let mut out = CycleChain::zero(source, c.module(), c.codim(), c.grading());
    match (source.kind(), y.kind()) {
        (SchemeKind::Point { .. } | SchemeKind::Curve { .. }, SchemeKind::Point { degree: 1 }) => {
            let field = match source.residue_field(&PointId::Generic)? {
                ResidueField::Finite(k) => FieldRef::Finite(k),
                ResidueField::Function { base, .. } => FieldRef::Function(base),
            };
            for (p, v) in c.components() {
                let m = v.as_milnor().ok_or_else(unsupported)?;
                if *p != PointId::Generic {
                    return Err(unsupported());
                }
                out.insert(
                    PointId::Generic,
                    ChainValue::Milnor(c.module().corestriction(&field, m)?),
                )?;
            }
        }
        (
            SchemeKind::Curve {
                projective: false,
                removed: small,
            },
            SchemeKind::Curve { removed: big, .. },
        ) if big.iter().all(|v| small.contains(v)) => {
            for (p, v) in c.components() {
                if source.contains(p) {
                    out.insert(p.clone(), v.clone())?;
                }
            }
        }
        _ => return Err(unsupported()),
    }
    Ok(out)
}

/// Intersection with a 0-cycle on a built-in curve: `[x] . xi = s_x(xi)` at
/// the generic point, zero on closed points.
pub fn ch_action(alpha: &CycleChain, c: &CycleChain) -> Result<CycleChain, CycleError> {
    let x = c.scheme();
    if !matches!(x.kind(), SchemeKind::Curve { .. }) {
        return Err(CycleError::UnsupportedScheme(format!(
            "action of cycles on {}",
            x.name()
        )));
    }
    if alpha.scheme().name() != x.name() || alpha.codim() != 1 || alpha.value_degree() != Some(0) {
        return Err(CycleError::InvalidChain(
            "the acting chain must be a 0-cycle on the same curve".into(),
        ));
    }
    let mut out = CycleChain::zero(x, c.module(), c.codim() + 1, c.grading() + 1);
    if c.codim() > 0 {
        return Ok(out);
    }
    for (p, a) in alpha.components() {
        let PointId::Closed(v) = p else { continue };
        let m = a.as_milnor().map(|m| m.constant()).unwrap_or(0);
        for xi in c.components().values() {
            let xi = xi
                .as_milnor()
                .ok_or_else(|| CycleError::InvalidChain("plane value on a curve".into()))?;
            let s = c.module().specialize(v, xi)?;
            out.insert(PointId::Closed(v.clone()), ChainValue::Milnor(s.scale(m)))?;
        }
    }
    Ok(out)
}
