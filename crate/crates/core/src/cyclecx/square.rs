use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    differential, point_differential, targets, ChainValue, CycleChain, CycleError, PlaneSymbols,
};
use crate::cyclemod::CycleModuleInstance;
use crate::gfield::{field_of_order, Fe, FiniteField};
use crate::schememod::{LinearForm, PlaneFunction, PointId, SchemeDescription, Valuation};

/// One line's share of `d(d(xi))` at a point.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Contribution {
    pub line: String,
    pub value: i64,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SquareZeroFailure {
    pub scheme: String,
    pub symbol: String,
    pub point: String,
    pub contributions: Vec<Contribution>,
    pub total: i64,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SquareZeroReport {
    pub schemes: usize,
    pub samples: usize,
    pub checked_points: usize,
    pub user_certified: bool,
    pub failures: Vec<SquareZeroFailure>,
}

impl SquareZeroReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, o: SquareZeroReport) {
        self.schemes += o.schemes;
        self.samples += o.samples;
        self.checked_points += o.checked_points;
        self.user_certified |= o.user_certified;
        self.failures.extend(o.failures);
    }
}

/// A codimension-2 point, the contribution of each codimension-1 point to
/// `d(d(c))` there, and their sum.
pub type LedgerRow = (PointId, Vec<(PointId, i64)>, i64);

pub fn square_zero_ledger(c: &CycleChain) -> Result<Vec<LedgerRow>, CycleError> {
    let x = c.scheme();
    let dc = differential(c)?;
    let mut ledger: BTreeMap<PointId, Vec<(PointId, i64)>> = BTreeMap::new();
    for (line, r) in dc.components() {
        for y in targets(x, c.module(), line, r)? {
            if let Some(v) = point_differential(x, c.module(), line, &y, r)? {
                ledger
                    .entry(y)
                    .or_default()
                    .push((line.clone(), v.constant()));
            }
        }
    }
    let dd = differential(&dc)?;
    Ok(ledger
        .into_iter()
        .map(|(y, parts)| {
            let total = dd
                .components()
                .get(&y)
                .and_then(|v| v.as_milnor())
                .map(|m| m.constant())
                .unwrap_or(0);
            (y, parts, total)
        })
        .collect())
}

fn generic_and_lines(x: &SchemeDescription) -> Result<(PointId, Vec<LinearForm>), CycleError> {
    let generic = x
        .points_of_codim(0, None)?
        .into_iter()
        .next()
        .ok_or_else(|| CycleError::UnsupportedScheme("no generic point".into()))?;
    let lines: Vec<LinearForm> = x
        .divisor_points(&generic)
        .into_iter()
        .filter_map(|(_, v)| match v {
            Valuation::Line(l) => Some(l),
            Valuation::Place(_) => None,
        })
        .collect();
    Ok((generic, lines))
}

fn random_unit(k: &FiniteField, rng: &mut ChaCha8Rng) -> Fe {
    k.exp(rng.gen_range(0..k.unit_order() as i64))
}

fn random_ratio(k: &Arc<FiniteField>, lines: &[LinearForm], rng: &mut ChaCha8Rng) -> PlaneFunction {
    let mut f = PlaneFunction::constant(k, random_unit(k, rng));
    for _ in 0..rng.gen_range(1..=2) {
        let pair: Vec<&LinearForm> = lines.choose_multiple(rng, 2).collect();
        let e = if rng.gen_bool(0.8) { 1 } else { 2 };
        f = f.mul(&PlaneFunction::ratio(k, *pair[0], *pair[1]).pow(e));
    }
    f
}

/// Random degree-2 symbol sums in ratios of the scheme's lines.
pub(crate) fn random_plane_symbols(
    k: &Arc<FiniteField>,
    lines: &[LinearForm],
    rng: &mut ChaCha8Rng,
) -> PlaneSymbols {
    let mut s = PlaneSymbols::new(k, 2);
    for _ in 0..rng.gen_range(1..=2) {
        let f = random_ratio(k, lines, rng);
        let g = random_ratio(k, lines, rng);
        let m = [1, 1, -1, 2][rng.gen_range(0..4)];
        s = s
            .add(&PlaneSymbols::symbol(k, vec![f, g]).scale(m))
            .expect("same shape");
    }
    s
}

/// Check `d o d = 0` on `samples` random degree-2 chains at the generic
/// point of a surface.
pub fn check_square_zero(
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
    samples: usize,
    seed: u64,
) -> Result<SquareZeroReport, CycleError> {
    if x.dimension() != 2 {
        return Err(CycleError::UnsupportedScheme(format!(
            "{} is not a surface",
            x.name()
        )));
    }
    let (generic, lines) = generic_and_lines(x)?;
    let mut report = SquareZeroReport {
        schemes: 1,
        samples: 0,
        checked_points: 0,
        user_certified: x.is_user_certified(),
        failures: Vec::new(),
    };
    if lines.len() < 2 {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let xi = random_plane_symbols(x.base(), &lines, &mut rng);
        let c =
            CycleChain::zero(x, phi, 0, 2).with(generic.clone(), ChainValue::Plane(xi.clone()))?;
        report.samples += 1;
        for (y, parts, total) in square_zero_ledger(&c)? {
            report.checked_points += 1;
            if total != 0 {
                report.failures.push(SquareZeroFailure {
                    scheme: x.name().to_string(),
                    symbol: xi.format(),
                    point: x.point_label(&y),
                    contributions: parts
                        .into_iter()
                        .map(|(l, value)| Contribution {
                            line: x.point_label(&l),
                            value,
                        })
                        .collect(),
                    total,
                });
            }
        }
    }
    Ok(report)
}

/// Random line configurations in `P^2` of at most `max_lines` lines over
/// each field order in `fields`, with `samples` chains each.
pub fn check_square_zero_random(
    configs: usize,
    max_lines: usize,
    fields: &[u64],
    samples: usize,
    seed: u64,
) -> Result<SquareZeroReport, CycleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SquareZeroReport {
        schemes: 0,
        samples: 0,
        checked_points: 0,
        user_certified: false,
        failures: Vec::new(),
    };
    let phi = CycleModuleInstance::milnor();
    for j in 0..configs {
        let q = fields[j % fields.len()];
        let k = field_of_order(q).map_err(|e| CycleError::InvalidChain(e.to_string()))?;
        let n = rng.gen_range(2..=max_lines.max(2));
        let mut forms: Vec<LinearForm> = Vec::new();
        while forms.len() < n {
            let v = [0, 1, 2].map(|_| Fe(rng.gen_range(0..k.order())));
            if let Some(l) = LinearForm::new(&k, v) {
                if !forms.contains(&l) {
                    forms.push(l);
                }
            }
        }
        let x = Arc::new(SchemeDescription::line_config(&k, forms)?);
        report.absorb(check_square_zero(&x, &phi, samples, rng.gen())?);
    }
    Ok(report)
}
