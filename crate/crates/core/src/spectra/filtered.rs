use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::{AbutmentFiltration, Bidegree, FiltrationStep, SpectraError, SpectralPage};
use crate::abgroup::{
    diagonal_relations, homology_at, kernel_basis, AbHom, FgAbGroup, IntMatrix, Subquotient,
};

/// `Z^n / diag(orders)` with a filtration level per basis vector; `F^p` is
/// spanned by the vectors of level at least `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredTerm {
    pub orders: Vec<BigInt>,
    pub levels: Vec<i64>,
}

impl FilteredTerm {
    pub fn free(levels: Vec<i64>) -> Self {
        FilteredTerm {
            orders: vec![BigInt::zero(); levels.len()],
            levels,
        }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }
}

/// A bounded cochain complex `C^start -> C^{start+1} -> ...` whose
/// filtration is adapted to the given bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredComplex {
    start: i64,
    terms: Vec<FilteredTerm>,
    /// `differentials[j]` maps term `j` to term `j + 1`.
    differentials: Vec<IntMatrix>,
}

const INF: i64 = i64::MAX;

fn unit(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

impl FilteredComplex {
    pub fn new(
        start: i64,
        terms: Vec<FilteredTerm>,
        differentials: Vec<IntMatrix>,
    ) -> Result<Self, SpectraError> {
        if differentials.len() + 1 != terms.len() && !(terms.is_empty() && differentials.is_empty())
        {
            return Err(SpectraError::NotAComplex(
                "need one differential between consecutive terms".into(),
            ));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.levels.len() != t.orders.len() {
                return Err(SpectraError::NotExhaustive(format!(
                    "term {} has {} generators but {} filtration levels",
                    start + j as i64,
                    t.orders.len(),
                    t.levels.len()
                )));
            }
        }
        for (j, d) in differentials.iter().enumerate() {
            let (s, t) = (&terms[j], &terms[j + 1]);
            if d.rows() != t.rank() || d.cols() != s.rank() {
                return Err(SpectraError::NotAComplex(format!(
                    "differential {} has the wrong shape",
                    start + j as i64
                )));
            }
            for c in 0..s.rank() {
                for r in 0..t.rank() {
                    let e = d.get(r, c);
                    let o = &t.orders[r];
                    let vanishes = if o.is_zero() {
                        e.is_zero()
                    } else {
                        e.is_multiple_of(o)
                    };
                    if t.levels[r] < s.levels[c] && !vanishes {
                        return Err(SpectraError::NotFiltered(format!(
                            "d^{} sends a generator of level {} to level {}",
                            start + j as i64,
                            s.levels[c],
                            t.levels[r]
                        )));
                    }
                    let a = &s.orders[c];
                    let respects = a.is_zero()
                        || if o.is_zero() {
                            e.is_zero()
                        } else {
                            (a * e).is_multiple_of(o)
                        };
                    if !respects {
                        return Err(SpectraError::NotAComplex(format!(
                            "d^{} is not a homomorphism",
                            start + j as i64
                        )));
                    }
                }
            }
        }
        for j in 1..differentials.len() {
            let dd = differentials[j].mul(&differentials[j - 1]);
            let orders = &terms[j + 1].orders;
            for c in 0..dd.cols() {
                for r in 0..dd.rows() {
                    let e = dd.get(r, c);
                    let ok = if orders[r].is_zero() {
                        e.is_zero()
                    } else {
                        e.is_multiple_of(&orders[r])
                    };
                    if !ok {
                        return Err(SpectraError::NotAComplex(format!(
                            "d o d != 0 out of degree {}",
                            start + j as i64 - 1
                        )));
                    }
                }
            }
        }
        Ok(FilteredComplex {
            start,
            terms,
            differentials,
        })
    }

    pub fn degrees(&self) -> std::ops::Range<i64> {
        self.start..self.start + self.terms.len() as i64
    }

    pub fn term(&self, k: i64) -> Option<&FilteredTerm> {
        usize::try_from(k - self.start)
            .ok()
            .and_then(|j| self.terms.get(j))
    }

    fn rank(&self, k: i64) -> usize {
        self.term(k).map_or(0, FilteredTerm::rank)
    }

    fn orders(&self, k: i64) -> Vec<BigInt> {
        self.term(k).map_or_else(Vec::new, |t| t.orders.clone())
    }

    fn levels(&self, k: i64) -> Vec<i64> {
        self.term(k).map_or_else(Vec::new, |t| t.levels.clone())
    }

    /// `d: C^k -> C^{k+1}`.
    pub fn d(&self, k: i64) -> IntMatrix {
        match usize::try_from(k - self.start)
            .ok()
            .and_then(|j| self.differentials.get(j))
        {
            Some(m) => m.clone(),
            None => IntMatrix::zeros(self.rank(k + 1), self.rank(k)),
        }
    }

    /// Smallest and largest filtration level in use.
    pub fn level_range(&self) -> Option<(i64, i64)> {
        let all = self.terms.iter().flat_map(|t| t.levels.iter().copied());
        let lo = all.clone().min()?;
        Some((lo, all.max()?))
    }

    pub fn shifted(&self, s: i64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            for l in &mut t.levels {
                *l += s;
            }
        }
        out
    }

    pub fn homology(&self, k: i64) -> Result<FgAbGroup, SpectraError> {
        let h = homology_at(
            &self.orders(k),
            &self.d(k - 1),
            &self.d(k),
            &self.orders(k + 1),
        )?;
        Ok(h.group().clone())
    }

    /// `{x in F^p C^k : dx in F^s C^{k+1}}`, plus every relation of `C^k`.
    fn z(&self, k: i64, p: i64, s: i64) -> Vec<Vec<BigInt>> {
        let n = self.rank(k);
        let levels = self.levels(k);
        let cols: Vec<usize> = (0..n).filter(|&j| levels[j] >= p).collect();
        let t_levels = self.levels(k + 1);
        let t_orders = self.orders(k + 1);
        let rows: Vec<usize> = (0..t_levels.len()).filter(|&i| t_levels[i] < s).collect();
        let mut out = diagonal_relations(&self.orders(k));
        if cols.is_empty() {
            return out;
        }
        if rows.is_empty() {
            out.extend(cols.iter().map(|&j| unit(n, j)));
            return out;
        }
        let d = self.d(k);
        let rel: Vec<&usize> = rows.iter().filter(|&&i| !t_orders[i].is_zero()).collect();
        let mut m = IntMatrix::zeros(rows.len(), cols.len() + rel.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, d.get(i, j).clone());
            }
        }
        for (b, &&i) in rel.iter().enumerate() {
            let a = rows
                .iter()
                .position(|&r| r == i)
                .expect("relation row is a kept row");
            m.set(a, cols.len() + b, t_orders[i].clone());
        }
        for v in kernel_basis(&m) {
            let mut x = vec![BigInt::zero(); n];
            for (b, &j) in cols.iter().enumerate() {
                x[j] = v[b].clone();
            }
            out.push(x);
        }
        out
    }

    fn boundaries(&self, k: i64, of: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
        let d = self.d(k - 1);
        of.iter().map(|y| d.mul_vec(y)).collect()
    }

    /// `E_r^{p, k-p} = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})` inside `C^k`.
    pub(crate) fn page_entry(&self, r: usize, p: i64, k: i64) -> Result<Subquotient, SpectraError> {
        let r = r as i64;
        let sub = self.z(k, p, p.saturating_add(r));
        let mut rel = self.z(k, p + 1, p.saturating_add(r));
        rel.extend(self.boundaries(k, self.z(k - 1, p - r + 1, p)));
        Ok(Subquotient::new(self.rank(k), &sub, &rel)?)
    }

    /// `D_1^{p, k-p} = H^k(F^p C)` inside `C^k`.
    pub(crate) fn filtered_homology(&self, p: i64, k: i64) -> Result<Subquotient, SpectraError> {
        let sub = self.z(k, p, INF);
        let mut rel = self.boundaries(k, self.z(k - 1, p, i64::MIN));
        rel.extend(diagonal_relations(&self.orders(k)));
        Ok(Subquotient::new(self.rank(k), &sub, &rel)?)
    }

    /// All boundaries in `C^k`, with the relations of `C^k`.
    fn all_boundaries(&self, k: i64) -> Vec<Vec<BigInt>> {
        let mut b = self.boundaries(k, self.z(k - 1, i64::MIN, i64::MIN));
        b.extend(diagonal_relations(&self.orders(k)));
        b
    }

    /// Image of `H^k(F^p C)` in `H^k(C)` for every level, with the graded
    /// pieces.
    pub fn abutment(&self, k: i64, label: &str) -> Result<AbutmentFiltration, SpectraError> {
        let (lo, hi) = self.level_range().unwrap_or((0, 0));
        let n = self.rank(k);
        let b = self.all_boundaries(k);
        let mut sqs = Vec::new();
        for p in lo..=hi + 1 {
            let mut sub = self.z(k, p, INF);
            sub.extend(b.iter().cloned());
            sqs.push((p, sub.clone(), Subquotient::new(n, &sub, &b)?));
        }
        let mut steps = Vec::new();
        let mut inclusions = Vec::new();
        for j in 0..sqs.len() {
            let (p, sub, sq) = &sqs[j];
            let graded = match sqs.get(j + 1) {
                Some((_, next, _)) => Subquotient::new(n, sub, next)?.group().clone(),
                None => sq.group().clone(),
            };
            steps.push(FiltrationStep {
                p: *p,
                group: Some(sq.group().clone()),
                graded,
            });
            if j > 0 {
                inclusions.push(Some(AbHom::between(
                    sq,
                    &sqs[j - 1].2,
                    &IntMatrix::identity(n),
                )?));
            }
        }
        Ok(AbutmentFiltration {
            degree: k,
            label: label.to_string(),
            steps,
            inclusions,
        })
    }

    fn page(&self, r: usize, lo: i64, hi: i64) -> Result<SpectralPage, SpectraError> {
        let mut sqs: BTreeMap<Bidegree, Subquotient> = BTreeMap::new();
        for k in self.degrees() {
            for p in lo..=hi {
                let sq = self.page_entry(r, p, k)?;
                if !sq.group().is_trivial() {
                    sqs.insert((p, k - p), sq);
                }
            }
        }
        let mut differentials = BTreeMap::new();
        let rr = r as i64;
        for (&(p, q), sq) in &sqs {
            if let Some(t) = sqs.get(&(p + rr, q + 1 - rr)) {
                differentials.insert((p, q), AbHom::between(sq, t, &self.d(p + q))?);
            }
        }
        let entries = sqs
            .into_iter()
            .map(|(s, sq)| (s, sq.group().clone()))
            .collect();
        Ok(SpectralPage::new(r, entries, differentials))
    }

    /// Pages `E_1, ..., E_{L+1}` where `L` is the filtration length; the last
    /// page is `E_infinity`. Each page is checked against the homology of the
    /// one before.
    pub fn pages(&self) -> Result<FilteredSequence, SpectraError> {
        let (lo, hi) = self.level_range().unwrap_or((0, 0));
        let mut pages: Vec<SpectralPage> = Vec::new();
        for r in 1..=(hi - lo + 1) as usize {
            let page = self.page(r, lo, hi)?;
            page.check_square_zero()?;
            if let Some(prev) = pages.last() {
                prev.check_next(&page)?;
            }
            pages.push(page);
        }
        let mut abutment = BTreeMap::new();
        for k in self.degrees() {
            abutment.insert(k, self.abutment(k, "F")?);
        }
        Ok(FilteredSequence { pages, abutment })
    }
}

/// Pages of a filtered complex together with the filtered cohomology.
#[derive(Clone, Debug)]
pub struct FilteredSequence {
    pub pages: Vec<SpectralPage>,
    pub abutment: BTreeMap<i64, AbutmentFiltration>,
}

impl FilteredSequence {
    pub fn e_infinity(&self) -> &SpectralPage {
        self.pages.last().expect("at least one page")
    }

    /// Whether `E_infinity^{p, k-p}` matches `gr^p H^k` everywhere.
    pub fn converges(&self) -> bool {
        let e = self.e_infinity();
        self.abutment
            .iter()
            .all(|(&k, f)| f.steps.iter().all(|s| e.entry(s.p, k - s.p) == s.graded))
    }
}

fn random_row(
    rng: &mut impl Rng,
    allowed: &[usize],
    basis: &[Vec<BigInt>],
    width: usize,
    max_entry: i64,
) -> Vec<BigInt> {
    let zero = vec![BigInt::zero(); width];
    if basis.is_empty() {
        return zero;
    }
    for _ in 0..8 {
        let mut v = vec![BigInt::zero(); allowed.len()];
        for b in basis {
            let c = BigInt::from(rng.gen_range(-1i64..=1));
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += &c * bi;
            }
        }
        if v.iter()
            .all(|x| x <= &BigInt::from(max_entry) && x >= &BigInt::from(-max_entry))
        {
            let mut out = zero.clone();
            for (&j, x) in allowed.iter().zip(v) {
                out[j] = x;
            }
            return out;
        }
    }
    zero
}

/// A random filtered complex of free groups in degrees `0..=3`, with ranks at
/// most `max_rank`, entries bounded by `max_entry` and at most `max_levels`
/// filtration levels.
pub fn random_filtered_complex(
    rng: &mut impl Rng,
    max_rank: usize,
    max_entry: i64,
    max_levels: i64,
) -> FilteredComplex {
    let terms: Vec<FilteredTerm> = (0..4)
        .map(|_| {
            let n = rng.gen_range(0..=max_rank);
            FilteredTerm::free(
                (0..n)
                    .map(|_| rng.gen_range(0..max_levels.max(1)))
                    .collect(),
            )
        })
        .collect();
    let mut differentials: Vec<IntMatrix> = Vec::new();
    for j in 0..3 {
        let (s, t) = (&terms[j], &terms[j + 1]);
        let mut m = IntMatrix::zeros(t.rank(), s.rank());
        for i in 0..t.rank() {
            let allowed: Vec<usize> = (0..s.rank())
                .filter(|&c| s.levels[c] <= t.levels[i])
                .collect();
            let row = match differentials.last() {
                None => {
                    let mut row = vec![BigInt::zero(); s.rank()];
                    for &c in &allowed {
                        if rng.gen_bool(0.6) {
                            row[c] = BigInt::from(rng.gen_range(-max_entry..=max_entry));
                        }
                    }
                    row
                }
                Some(prev) => {
                    // rows `v` with `v . prev = 0`, supported on `allowed`
                    let mut sub = IntMatrix::zeros(prev.cols(), allowed.len());
                    for (a, &c) in allowed.iter().enumerate() {
                        for b in 0..prev.cols() {
                            sub.set(b, a, prev.get(c, b).clone());
                        }
                    }
                    let basis = if allowed.is_empty() {
                        Vec::new()
                    } else {
                        kernel_basis(&sub)
                    };
                    random_row(rng, &allowed, &basis, s.rank(), max_entry)
                }
            };
            for (c, x) in row.into_iter().enumerate() {
                m.set(i, c, x);
            }
        }
        differentials.push(m);
    }
    FilteredComplex::new(0, terms, differentials).expect("generator builds filtered complexes")
}
