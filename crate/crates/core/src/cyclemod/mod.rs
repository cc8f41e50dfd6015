//! Cycle premodules: Milnor K-theory and its reductions mod `l`, with the
//! four structural maps and a randomized coherence harness.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{Elem, FgAbGroup};
use crate::gfield::{canonical_field, Embedding, Fe, FiniteField, Place, Poly, RatFunc};
use crate::milnor::{self, Coefficients, FieldRef, MilnorElement, MilnorError, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleModError {
    #[error("unsupported field {0}")]
    UnsupportedField(String),
    #[error(transparent)]
    Milnor(#[from] MilnorError),
}

/// Value of `phi_n(E)`: a finitely generated group over finite fields, a
/// structural description over `F_q(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Finite(FgAbGroup),
    Structural {
        constant: FgAbGroup,
        residues: String,
    },
}

impl std::fmt::Display for Evaluation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Evaluation::Finite(g) => write!(f, "{g}"),
            Evaluation::Structural { constant, residues } => write!(f, "{constant} + {residues}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleModuleInstance {
    name: String,
    coeffs: Coefficients,
    grading_offset: i32,
    residue_sign: i64,
}

impl CycleModuleInstance {
    /// `K^M`.
    pub fn milnor() -> Self {
        CycleModuleInstance {
            name: "KM".into(),
            coeffs: Coefficients::Integral,
            grading_offset: 0,
            residue_sign: 1,
        }
    }

    /// `K^M / l`.
    pub fn milnor_mod(l: u64) -> Self {
        assert!(l >= 2, "reduction modulus must be at least 2");
        CycleModuleInstance {
            name: format!("KM/{l}"),
            coeffs: Coefficients::ModL(l),
            grading_offset: 0,
            residue_sign: 1,
        }
    }

    /// `K^M` with negated residues; violates the Steinberg consistency check.
    pub fn flipped_residue_fixture() -> Self {
        CycleModuleInstance {
            name: "KM-flipped-residue".into(),
            coeffs: Coefficients::Integral,
            grading_offset: 0,
            residue_sign: -1,
        }
    }

    /// The same module with `phi_n = K_{n + offset}`.
    pub fn regraded(&self, offset: i32) -> Self {
        let mut out = self.clone();
        out.grading_offset = offset;
        out.name = format!("{}[{offset}]", self.name);
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coeffs
    }

    pub fn grading_offset(&self) -> i32 {
        self.grading_offset
    }

    pub(crate) fn residue_sign(&self) -> i64 {
        self.residue_sign
    }

    /// Milnor degree carrying `phi_n`, if nonnegative.
    pub fn milnor_degree(&self, n: i64) -> Option<u32> {
        u32::try_from(n + self.grading_offset as i64).ok()
    }

    /// `K_n(F_Q) (x) coefficients`.
    pub fn finite_group(&self, order: u32, n: i64) -> FgAbGroup {
        match self.milnor_degree(n) {
            None => FgAbGroup::zero(),
            Some(d) => match self.coeffs.modulus(order, d) {
                0 => FgAbGroup::free(1),
                m => FgAbGroup::cyclic(BigInt::from(m)),
            },
        }
    }

    pub fn evaluate(&self, field: &FieldRef, n: i64) -> Result<Evaluation, CycleModError> {
        let q = field.base().order();
        Ok(match field {
            FieldRef::Finite(_) => Evaluation::Finite(self.finite_group(q, n)),
            FieldRef::Function(_) => {
                let residues = match self.milnor_degree(n) {
                    Some(d) if d >= 1 => format!("(+)_pi {}_{}(kappa(pi))", self.name, d - 1),
                    _ => "0".into(),
                };
                Evaluation::Structural {
                    constant: self.finite_group(q, n),
                    residues,
                }
            }
        })
    }

    /// Coordinates of a finite-field element in `finite_group`.
    pub fn coords(&self, x: &MilnorElement) -> Elem {
        let g = self.finite_group(
            x.field().base().order(),
            x.degree() as i64 - self.grading_offset as i64,
        );
        if g.num_gens() == 0 {
            Vec::new()
        } else {
            g.reduced(vec![BigInt::from(x.constant())])
        }
    }

    /// Element over `F_Q` with the given coordinates.
    pub fn from_coords(&self, field: &Arc<FiniteField>, n: i64, c: &Elem) -> MilnorElement {
        let d = self.milnor_degree(n).expect("nonnegative Milnor degree");
        let v = c
            .first()
            .map(|b| i64::try_from(b).expect("coordinate fits in i64"))
            .unwrap_or(0);
        MilnorElement::finite(field, d, v, self.coeffs)
    }

    pub fn normalize(&self, s: &Symbol) -> Result<MilnorElement, CycleModError> {
        Ok(milnor::normalize_with(s, self.coeffs)?)
    }

    pub fn reduce(&self, x: &MilnorElement) -> MilnorElement {
        x.with_coefficients(self.coeffs)
    }

    pub fn corestriction(
        &self,
        target: &FieldRef,
        x: &MilnorElement,
    ) -> Result<MilnorElement, CycleModError> {
        let y = milnor::corestriction(target, &self.reduce(x))?;
        assert_eq!(
            y.degree(),
            x.degree(),
            "corestriction is homogeneous of degree 0"
        );
        Ok(y)
    }

    pub fn norm(
        &self,
        target: &FieldRef,
        y: &MilnorElement,
    ) -> Result<MilnorElement, CycleModError> {
        let x = milnor::norm(target, &self.reduce(y))?;
        assert_eq!(x.degree(), y.degree(), "norm is homogeneous of degree 0");
        Ok(x)
    }

    pub fn km_action(
        &self,
        sigma: &Symbol,
        x: &MilnorElement,
    ) -> Result<MilnorElement, CycleModError> {
        let y = milnor::km_action(sigma, &self.reduce(x))?;
        assert_eq!(y.degree(), x.degree() + sigma.len() as u32, "action degree");
        Ok(y)
    }

    pub fn residue(&self, v: &Place, x: &MilnorElement) -> Result<MilnorElement, CycleModError> {
        let r = milnor::tame_symbol(v, &self.reduce(x))?.scale(self.residue_sign);
        assert_eq!(
            r.degree() + 1,
            x.degree(),
            "residue is homogeneous of degree -1"
        );
        Ok(r)
    }

    pub fn specialize(&self, v: &Place, x: &MilnorElement) -> Result<MilnorElement, CycleModError> {
        Ok(milnor::specialize(v, &self.reduce(x))?)
    }
}

/// Places where the residue of `x` is nonzero.
pub fn check_fd(m: &CycleModuleInstance, x: &MilnorElement) -> Result<Vec<Place>, CycleModError> {
    let x = m.reduce(x);
    let mut out = Vec::new();
    for v in milnor::residue_support(&x)? {
        if !m.residue(&v, &x)?.is_zero() {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub samples: usize,
    pub failures: Vec<String>,
}

pub type CoherenceReport = Vec<CheckResult>;

pub fn report_passed(report: &[CheckResult]) -> bool {
    report.iter().all(|c| c.failures.is_empty())
}

const SAMPLE_FIELDS: [(u64, u32); 4] = [(2, 1), (3, 1), (5, 1), (3, 2)];

fn random_fe(k: &FiniteField, rng: &mut ChaCha8Rng, nonzero: bool) -> Fe {
    let lo = u32::from(nonzero);
    Fe(rng.gen_range(lo..k.order()))
}

fn random_poly(k: &Arc<FiniteField>, rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    loop {
        let d = rng.gen_range(0..=max_deg);
        let p = Poly::new(
            Arc::clone(k),
            (0..=d).map(|_| random_fe(k, rng, false)).collect(),
        );
        if !p.is_zero() {
            return p;
        }
    }
}

pub(crate) fn random_ratfunc(
    k: &Arc<FiniteField>,
    rng: &mut ChaCha8Rng,
    max_deg: usize,
) -> RatFunc {
    RatFunc::new(random_poly(k, rng, max_deg), random_poly(k, rng, max_deg))
}

fn random_finite_element(
    m: &CycleModuleInstance,
    k: &Arc<FiniteField>,
    rng: &mut ChaCha8Rng,
) -> MilnorElement {
    let n = rng.gen_range(0..=2u32);
    let v = rng.gen_range(-20..20i64);
    MilnorElement::finite(k, n, v, m.coefficients())
}

fn sample_tower(rng: &mut ChaCha8Rng) -> (u64, u32, u32, u32) {
    let (p, e) = SAMPLE_FIELDS[rng.gen_range(0..SAMPLE_FIELDS.len())];
    // total extension degree at most 4
    let (a, b) = [
        (1, 1),
        (1, 2),
        (2, 1),
        (2, 2),
        (1, 3),
        (3, 1),
        (1, 4),
        (4, 1),
    ][rng.gen_range(0..8)];
    (p, e, a, b)
}

type Check<'a> =
    dyn Fn(&CycleModuleInstance, &mut ChaCha8Rng) -> Result<Option<String>, CycleModError> + 'a;

/// Randomized premodule coherences; failures carry witnesses.
pub fn check_premodule_coherences(
    m: &CycleModuleInstance,
    samples: usize,
    seed: u64,
) -> CoherenceReport {
    let checks: Vec<(&str, Box<Check>)> = vec![
        ("corestriction_functoriality", Box::new(check_functoriality)),
        ("norm_corestriction_degree", Box::new(check_norm_degree)),
        ("projection_formula", Box::new(check_projection)),
        (
            "residue_corestriction",
            Box::new(check_residue_corestriction),
        ),
        (
            "steinberg_residue_consistency",
            Box::new(check_steinberg_residue),
        ),
    ];
    let mut out = Vec::new();
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 40));
        let mut failures = Vec::new();
        for _ in 0..samples {
            match check(m, &mut rng) {
                Ok(None) => {}
                Ok(Some(w)) => failures.push(w),
                Err(e) => failures.push(format!("error: {e}")),
            }
        }
        out.push(CheckResult {
            check: name.into(),
            samples,
            failures,
        });
    }
    out
}

fn check_functoriality(
    m: &CycleModuleInstance,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>, CycleModError> {
    let (p, e, a, b) = sample_tower(rng);
    let k0 = canonical_field(p, e).map_err(MilnorError::from)?;
    let k1 = canonical_field(p, e * a).map_err(MilnorError::from)?;
    let k2 = canonical_field(p, e * a * b).map_err(MilnorError::from)?;
    let function = rng.gen_bool(0.25);
    let wrap = |k: &Arc<FiniteField>| {
        if function {
            FieldRef::Function(Arc::clone(k))
        } else {
            FieldRef::Finite(Arc::clone(k))
        }
    };
    let x = if function {
        let n = rng.gen_range(1..=2);
        let entries = (0..n).map(|_| random_ratfunc(&k0, rng, 2)).collect();
        m.normalize(&Symbol::new(wrap(&k0), entries)?)?
    } else {
        random_finite_element(m, &k0, rng)
    };
    let direct = m.corestriction(&wrap(&k2), &x)?;
    let stepwise = m.corestriction(&wrap(&k2), &m.corestriction(&wrap(&k1), &x)?)?;
    Ok((direct != stepwise).then(|| format!("x = {x} over {}: {direct} vs {stepwise}", x.field())))
}

fn check_norm_degree(
    m: &CycleModuleInstance,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>, CycleModError> {
    let (p, e, a, b) = sample_tower(rng);
    let small = canonical_field(p, e).map_err(MilnorError::from)?;
    let large = canonical_field(p, e * a * b).map_err(MilnorError::from)?;
    let x = random_finite_element(m, &small, rng);
    let up = m.corestriction(&FieldRef::Finite(Arc::clone(&large)), &x)?;
    let back = m.norm(x.field(), &up)?;
    let expected = x.scale((a * b) as i64);
    Ok((back != expected).then(|| {
        format!(
            "x = {x} in F{}, [L:E] = {}: N(cor x) = {back}",
            small.order(),
            a * b
        )
    }))
}

fn check_projection(
    m: &CycleModuleInstance,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>, CycleModError> {
    let (p, e, a, b) = sample_tower(rng);
    let small = canonical_field(p, e).map_err(MilnorError::from)?;
    let large = canonical_field(p, e * a * b).map_err(MilnorError::from)?;
    let (fe, fl) = (
        FieldRef::Finite(Arc::clone(&small)),
        FieldRef::Finite(Arc::clone(&large)),
    );
    let unit = random_fe(&small, rng, true);
    let sigma = Symbol::new(fe.clone(), vec![RatFunc::constant(&small, unit)])?;
    let emb = Embedding::new(&small, &large).map_err(MilnorError::from)?;
    let sigma_up = Symbol::new(fl.clone(), vec![RatFunc::constant(&large, emb.apply(unit))])?;
    let y = MilnorElement::integer(&fl, rng.gen_range(-9..10), m.coefficients());
    let lhs = m.norm(&fe, &m.km_action(&sigma_up, &y)?)?;
    let rhs = m.km_action(&sigma, &m.norm(&fe, &y)?)?;
    Ok((lhs != rhs).then(|| {
        format!(
            "sigma = {{{}}}, y = {y}: {lhs} vs {rhs}",
            small.format(unit)
        )
    }))
}

fn check_residue_corestriction(
    m: &CycleModuleInstance,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>, CycleModError> {
    let (p, e) = SAMPLE_FIELDS[rng.gen_range(0..SAMPLE_FIELDS.len())];
    let d = rng.gen_range(1..=2u32);
    let k = canonical_field(p, e).map_err(MilnorError::from)?;
    let l = canonical_field(p, e * d).map_err(MilnorError::from)?;
    let emb = Embedding::new(&k, &l).map_err(MilnorError::from)?;
    let up_poly = |f: &Poly| {
        Poly::new(
            Arc::clone(&l),
            f.coeffs().iter().map(|&c| emb.apply(c)).collect(),
        )
    };
    let up = |f: &RatFunc| RatFunc::new(up_poly(f.num()), up_poly(f.den()));
    let n = rng.gen_range(1..=2);
    let entries: Vec<RatFunc> = (0..n).map(|_| random_ratfunc(&k, rng, 2)).collect();
    let x = m.normalize(&Symbol::new(
        FieldRef::Function(Arc::clone(&k)),
        entries.clone(),
    )?)?;
    let y = m.corestriction(&FieldRef::Function(Arc::clone(&l)), &x)?;
    let lifted: Vec<RatFunc> = entries.iter().map(up).collect();
    let mut places: Vec<Place> = x.residues().keys().cloned().map(Place::Finite).collect();
    places.push(Place::Infinity);
    for v in places {
        let targets = match &v {
            Place::Infinity => vec![Place::Infinity],
            Place::Finite(pi) => {
                let fs = up_poly(pi).factor().map_err(MilnorError::from)?.1;
                fs.into_iter().map(|(f, _)| Place::Finite(f)).collect()
            }
        };
        for w in targets {
            let kappa = w.residue_field(&l).map_err(MilnorError::from)?;
            // unramified: the residue over L is the tame formula on the lifted entries
            let expected = match n {
                1 => MilnorElement::finite(&kappa, 0, w.valuation(&lifted[0]), m.coefficients()),
                _ => MilnorElement::unit(
                    &kappa,
                    milnor::tame_pair(&w, &lifted[0], &lifted[1])?,
                    m.coefficients(),
                )?,
            };
            let got = m.residue(&w, &y)?;
            if got != expected {
                return Ok(Some(format!(
                    "x = {x}, v = {v:?}, w = {w:?}: {got} vs {expected}"
                )));
            }
        }
    }
    Ok(None)
}

fn check_steinberg_residue(
    m: &CycleModuleInstance,
    rng: &mut ChaCha8Rng,
) -> Result<Option<String>, CycleModError> {
    let (p, e) = SAMPLE_FIELDS[rng.gen_range(0..SAMPLE_FIELDS.len())];
    let k = canonical_field(p, e).map_err(MilnorError::from)?;
    let field = FieldRef::Function(Arc::clone(&k));
    let a = random_ratfunc(&k, rng, 2);
    let b = random_ratfunc(&k, rng, 2);
    let x = m.normalize(&Symbol::new(field.clone(), vec![a.clone(), b.clone()])?)?;
    let mut places: Vec<Place> = x.residues().keys().cloned().map(Place::Finite).collect();
    places.push(Place::Infinity);
    let mut expected: BTreeMap<Place, MilnorElement> = BTreeMap::new();
    for v in &places {
        let kappa = v.residue_field(&k).map_err(MilnorError::from)?;
        let h = milnor::tame_pair(v, &a, &b)?;
        expected.insert(v.clone(), MilnorElement::unit(&kappa, h, m.coefficients())?);
    }
    for v in places {
        let got = m.residue(&v, &x)?;
        if got != expected[&v] {
            return Ok(Some(format!(
                "{{{}, {}}} at {}: residue {} but the tame formula gives {}",
                a.format("t"),
                b.format("t"),
                v.label("t"),
                got,
                expected[&v]
            )));
        }
    }
    // Steinberg relation itself
    if !a.is_one() {
        let s = Symbol::new(field, vec![a.clone(), RatFunc::one(&k).sub(&a)]);
        if let Ok(s) = s {
            let z = m.normalize(&s)?;
            if !z.is_zero() {
                return Ok(Some(format!("{{a, 1-a}} = {z} for a = {}", a.format("t"))));
            }
        }
    }
    Ok(None)
}
