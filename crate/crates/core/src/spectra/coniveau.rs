use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use super::{AbutmentFiltration, FilteredComplex, FilteredTerm, SpectraError, SpectralPage};
use crate::abgroup::{AbHom, FgAbGroup, Subquotient};
use crate::cyclecx::{bounded_complex, chow, BoundedComplex, ChowMode};
use crate::cyclemod::CycleModuleInstance;
use crate::schememod::{SchemeDescription, SchemeKind};

/// Coefficient tables for the `E_1` terms `H^{q-p, n-p}(kappa(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realization {
    /// Milnor K-theory on the diagonal `q = n`, zero above it.
    Motivic,
}

impl FromStr for Realization {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "motivic" => Ok(Realization::Motivic),
            other => Err(SpectraError::UnsupportedRealization(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConiveauSequence {
    pub scheme: String,
    pub weight: i64,
    pub support_bound: usize,
    pub pages: Vec<SpectralPage>,
    /// The row `q = n` as built from cycle complexes.
    pub row: BoundedComplex,
    pub caveats: Vec<String>,
}

fn check_scheme(x: &SchemeDescription) -> Result<(), SpectraError> {
    match x.kind() {
        SchemeKind::Point { .. } | SchemeKind::Curve { .. } => Ok(()),
        _ => Err(SpectraError::UnsupportedScheme(format!(
            "{}: coniveau pages are assembled for points and curves",
            x.name()
        ))),
    }
}

/// The support-bounded row `q = n` as a complex filtered by codimension,
/// placed in total degrees `n, n + 1, ...`.
pub fn coniveau_filtered_complex(
    x: &Arc<SchemeDescription>,
    n: i64,
    bound: usize,
) -> Result<FilteredComplex, SpectraError> {
    check_scheme(x)?;
    let bc = bounded_complex(x, &CycleModuleInstance::milnor(), n, bound)?;
    let terms = bc
        .terms
        .iter()
        .map(|t| FilteredTerm {
            orders: t.orders.clone(),
            levels: vec![t.codim as i64; t.orders.len()],
        })
        .collect();
    FilteredComplex::new(n, terms, bc.differentials.clone())
}

/// `E_1^{p,q}(X, n) = sum over x in X^(p) of H^{q-p, n-p}(kappa(x))`, with
/// `d_1` the cycle-complex differential, through `E_infinity`.
pub fn assemble_coniveau(
    x: &Arc<SchemeDescription>,
    realization: Realization,
    n: i64,
    bound: usize,
) -> Result<ConiveauSequence, SpectraError> {
    check_scheme(x)?;
    let Realization::Motivic = realization;
    let phi = CycleModuleInstance::milnor();
    let row = bounded_complex(x, &phi, n, bound)?;
    let mut caveats = Vec::new();
    if n >= 2 {
        caveats.push(format!(
            "rows q < {n} are not modeled; only the Milnor row q = {n} is assembled"
        ));
    }
    let pres: Vec<Subquotient> = row
        .terms
        .iter()
        .map(|t| Subquotient::presentation(&t.orders))
        .collect();
    let mut entries = BTreeMap::new();
    let mut differentials = BTreeMap::new();
    for (p, sq) in pres.iter().enumerate() {
        entries.insert((p as i64, n), sq.group().clone());
        if let Some(next) = pres.get(p + 1) {
            differentials.insert(
                (p as i64, n),
                AbHom::between(sq, next, &row.differentials[p])?,
            );
        }
    }
    let e1 = SpectralPage::new(1, entries, differentials);
    let mut pages = vec![e1];
    if !pages[0].all_differentials_zero() {
        let e1 = &pages[0];
        let mut entries = BTreeMap::new();
        for p in 0..row.terms.len() as i64 {
            entries.insert((p, n), e1.homology(p, n)?);
        }
        if (0..=x.dimension() as i64).contains(&n) {
            let exact = chow(x, &phi, n as usize, n, ChowMode::Exact)?.group;
            let bounded = entries
                .get(&(n, n))
                .cloned()
                .unwrap_or_else(FgAbGroup::zero);
            if bounded != exact {
                caveats.push(format!("support bound {bound} gives {bounded} at ({n},{n}); the exact value is {exact}"));
            }
            entries.insert((n, n), exact);
        }
        pages.push(SpectralPage::new(2, entries, BTreeMap::new()));
    }
    Ok(ConiveauSequence {
        scheme: x.name().to_string(),
        weight: n,
        support_bound: bound,
        pages,
        row,
        caveats,
    })
}

/// The filtration on `H^degree` read off from the last page, which must
/// admit no further differentials.
pub fn coniveau_filtration_report(
    pages: &[SpectralPage],
    degree: i64,
    label: &str,
) -> Result<AbutmentFiltration, SpectraError> {
    let last = pages
        .last()
        .ok_or_else(|| SpectraError::NotStabilized("no pages".into()))?;
    if !last.all_differentials_zero() {
        return Err(SpectraError::NotStabilized(format!(
            "d_{} is nonzero",
            last.r
        )));
    }
    let spots: Vec<_> = last.entries().keys().copied().collect();
    for a in &spots {
        for b in &spots {
            let s = b.0 - a.0;
            if s > last.r as i64 && b.1 - a.1 == 1 - s {
                return Err(SpectraError::NotStabilized(format!(
                    "d_{s} from {a:?} to {b:?} may be nonzero"
                )));
            }
        }
    }
    let ps = pages[0].entries().keys().map(|k| k.0);
    let (lo, hi) = (ps.clone().min().unwrap_or(0), ps.max().unwrap_or(0));
    let graded = (lo..=hi + 1)
        .map(|p| (p, last.entry(p, degree - p)))
        .collect();
    Ok(AbutmentFiltration::from_graded(degree, label, graded))
}
