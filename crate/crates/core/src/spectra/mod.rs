//! Spectral sequences of exact couples and filtered complexes over finitely
//! generated abelian groups, and the coniveau spectral sequence of points and
//! curves.
//!
//! Indexing is cohomological: `E_1^{p,q} = H^{p+q}(gr^p C)`, and `d_r` has
//! bidegree `(r, 1 - r)`. For a homological reader, `E^r_{p,q}` corresponds
//! to `E_r^{-p,-q}`.

mod coniveau;
mod couple;
mod filtered;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::abgroup::{homology_at, AbGroupError, AbHom, FgAbGroup, IntMatrix};
use crate::cyclecx::CycleError;

pub use coniveau::{
    assemble_coniveau, coniveau_filtered_complex, coniveau_filtration_report, ConiveauSequence,
    Realization,
};
pub use couple::ExactCoupleData;
pub use filtered::{random_filtered_complex, FilteredComplex, FilteredSequence, FilteredTerm};

pub type Bidegree = (i64, i64);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectraError {
    #[error("exact couple is not exact at {at:?} ({site})")]
    ExactnessViolation { at: Bidegree, site: String },
    #[error("filtration is not exhaustive: {0}")]
    NotExhaustive(String),
    #[error("not a filtered complex: {0}")]
    NotFiltered(String),
    #[error("not a complex: {0}")]
    NotAComplex(String),
    #[error("pages have not stabilized: {0}")]
    NotStabilized(String),
    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),
    #[error("unsupported realization: {0}")]
    UnsupportedRealization(String),
    #[error("page check failed: {0}")]
    PageMismatch(String),
    #[error(transparent)]
    Group(#[from] AbGroupError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

/// One page `E_r` with its differentials, keyed by source bidegree.
/// Missing entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralPage {
    pub r: usize,
    entries: BTreeMap<Bidegree, FgAbGroup>,
    differentials: BTreeMap<Bidegree, AbHom>,
}

impl SpectralPage {
    /// Zero entries and maps touching them are dropped.
    pub fn new(
        r: usize,
        entries: BTreeMap<Bidegree, FgAbGroup>,
        differentials: BTreeMap<Bidegree, AbHom>,
    ) -> Self {
        let entries: BTreeMap<Bidegree, FgAbGroup> = entries
            .into_iter()
            .filter(|(_, g)| !g.is_trivial())
            .collect();
        let differentials = differentials
            .into_iter()
            .filter(|(s, h)| entries.contains_key(s) && !h.target().is_trivial())
            .collect();
        SpectralPage {
            r,
            entries,
            differentials,
        }
    }

    pub fn bidegree(&self) -> Bidegree {
        (self.r as i64, 1 - self.r as i64)
    }

    pub fn entry(&self, p: i64, q: i64) -> FgAbGroup {
        self.entries
            .get(&(p, q))
            .cloned()
            .unwrap_or_else(FgAbGroup::zero)
    }

    pub fn entries(&self) -> &BTreeMap<Bidegree, FgAbGroup> {
        &self.entries
    }

    /// `d_r` out of `(p, q)`, if both ends are nonzero.
    pub fn differential(&self, p: i64, q: i64) -> Option<&AbHom> {
        self.differentials.get(&(p, q))
    }

    pub fn differentials(&self) -> &BTreeMap<Bidegree, AbHom> {
        &self.differentials
    }

    pub fn target_of(&self, s: Bidegree) -> Bidegree {
        let (a, b) = self.bidegree();
        (s.0 + a, s.1 + b)
    }

    pub fn all_differentials_zero(&self) -> bool {
        self.differentials.values().all(AbHom::is_zero)
    }

    /// `d_r o d_r = 0` at every source.
    pub fn check_square_zero(&self) -> Result<(), SpectraError> {
        for (s, d) in &self.differentials {
            if let Some(e) = self.differentials.get(&self.target_of(*s)) {
                if !d.then(e)?.is_zero() {
                    return Err(SpectraError::PageMismatch(format!(
                        "d_{} o d_{} != 0 at {s:?}",
                        self.r, self.r
                    )));
                }
            }
        }
        Ok(())
    }

    /// `ker d_r / im d_r` at `(p, q)`, computed by Smith normal form.
    pub fn homology(&self, p: i64, q: i64) -> Result<FgAbGroup, SpectraError> {
        let g = self.entry(p, q);
        let n = g.num_gens();
        let (a, b) = self.bidegree();
        let d_in = match self.differentials.get(&(p - a, q - b)) {
            Some(h) => h.matrix().clone(),
            None => IntMatrix::zeros(n, 0),
        };
        let (d_out, out_orders) = match self.differentials.get(&(p, q)) {
            Some(h) => (h.matrix().clone(), h.target().orders()),
            None => (IntMatrix::zeros(0, n), Vec::new()),
        };
        Ok(homology_at(&g.orders(), &d_in, &d_out, &out_orders)?
            .group()
            .clone())
    }

    /// Check that `next` is the homology of this page.
    pub fn check_next(&self, next: &SpectralPage) -> Result<(), SpectraError> {
        let mut spots: Vec<Bidegree> = self.entries.keys().copied().collect();
        spots.extend(next.entries.keys().copied());
        spots.sort();
        spots.dedup();
        for (p, q) in spots {
            let h = self.homology(p, q)?;
            if h != next.entry(p, q) {
                return Err(SpectraError::PageMismatch(format!(
                    "E_{}^({p},{q}) = {} but the homology of E_{} there is {h}",
                    next.r,
                    next.entry(p, q),
                    self.r
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<EntryDoc> = self
            .entries
            .iter()
            .map(|(&(p, q), g)| EntryDoc {
                p,
                q,
                rank: g.rank(),
                torsion: g.torsion().iter().map(big_json).collect(),
            })
            .collect();
        let differentials: Vec<DifferentialDoc> = self
            .differentials
            .iter()
            .map(|(&s, h)| {
                let t = self.target_of(s);
                DifferentialDoc {
                    from: [s.0, s.1],
                    to: [t.0, t.1],
                    matrix: (0..h.matrix().rows())
                        .map(|i| h.matrix().row(i).iter().map(big_json).collect())
                        .collect(),
                }
            })
            .collect();
        serde_json::to_value(PageDoc {
            r: self.r,
            entries,
            differentials,
        })
        .expect("page documents serialize")
    }
}

impl fmt::Display for SpectralPage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "E_{}:", self.r)?;
        if self.entries.is_empty() {
            writeln!(f, "  all entries vanish")?;
        }
        for ((p, q), g) in &self.entries {
            writeln!(f, "  E_{}^({p},{q}) = {g}", self.r)?;
        }
        for (s, h) in &self.differentials {
            if !h.is_zero() {
                let t = self.target_of(*s);
                writeln!(
                    f,
                    "  d_{}: ({},{}) -> ({},{}) {:?}",
                    self.r,
                    s.0,
                    s.1,
                    t.0,
                    t.1,
                    h.matrix()
                )?;
            }
        }
        Ok(())
    }
}

fn big_json(b: &BigInt) -> serde_json::Value {
    match b.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(b.to_string()),
    }
}

#[derive(Serialize)]
struct EntryDoc {
    p: i64,
    q: i64,
    rank: usize,
    torsion: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct DifferentialDoc {
    from: [i64; 2],
    to: [i64; 2],
    matrix: Vec<Vec<serde_json::Value>>,
}

#[derive(Serialize)]
struct PageDoc {
    r: usize,
    entries: Vec<EntryDoc>,
    differentials: Vec<DifferentialDoc>,
}

/// `F^p H`, or `None` when the graded pieces do not pin down the extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationStep {
    pub p: i64,
    pub group: Option<FgAbGroup>,
    pub graded: FgAbGroup,
}

/// A decreasing filtration `F^p H` of one abutment group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbutmentFiltration {
    pub degree: i64,
    pub label: String,
    pub steps: Vec<FiltrationStep>,
    /// `inclusions[j]` maps step `j + 1` into step `j`, when both are known.
    pub inclusions: Vec<Option<AbHom>>,
}

impl AbutmentFiltration {
    pub fn total(&self) -> Option<&FgAbGroup> {
        self.steps.first().and_then(|s| s.group.as_ref())
    }

    pub fn step(&self, p: i64) -> Option<&FiltrationStep> {
        self.steps.iter().find(|s| s.p == p)
    }

    /// The filtration read off from graded pieces alone.
    fn from_graded(degree: i64, label: &str, graded: Vec<(i64, FgAbGroup)>) -> Self {
        let mut steps = Vec::new();
        let mut inclusions = Vec::new();
        for j in 0..graded.len() {
            let tail: Vec<FgAbGroup> = graded[j..].iter().map(|(_, g)| g.clone()).collect();
            let nonzero: Vec<&FgAbGroup> = tail.iter().filter(|g| !g.is_trivial()).collect();
            let split = nonzero.len() <= 1 || nonzero.iter().all(|g| g.torsion().is_empty());
            steps.push(FiltrationStep {
                p: graded[j].0,
                group: split.then(|| FgAbGroup::direct_sum(&tail)),
                graded: graded[j].1.clone(),
            });
            if j > 0 {
                inclusions.push(None);
            }
        }
        AbutmentFiltration {
            degree,
            label: label.to_string(),
            steps,
            inclusions,
        }
    }
}

impl fmt::Display for AbutmentFiltration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| match &s.group {
                Some(g) => format!("{}^{} = {g}", self.label, s.p),
                None => format!("{}^{} = ? (graded {})", self.label, s.p, s.graded),
            })
            .collect();
        write!(f, "H^{}: {}", self.degree, parts.join(", "))
    }
}

#[cfg(test)]
mod tests;
