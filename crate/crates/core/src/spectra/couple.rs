use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use super::{Bidegree, FilteredComplex, SpectraError, SpectralPage};
use crate::abgroup::{homology_at, AbHom, FgAbGroup, IntMatrix, Subquotient};

const ALPHA: Bidegree = (-1, 1);
const GAMMA: Bidegree = (1, 0);

fn add(a: Bidegree, b: Bidegree) -> Bidegree {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Bidegree, b: Bidegree) -> Bidegree {
    (a.0 - b.0, a.1 - b.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Map {
    Alpha,
    Beta,
    Gamma,
}

/// An exact couple `D -a-> D -b-> E -g-> D` on a finite window of bidegrees.
///
/// `a` has bidegree `(-1, 1)`, `g` has `(1, 0)` and `b` has `(r - 1, 1 - r)`
/// on the `r`-th derived couple, so `d = b o g` has bidegree `(r, 1 - r)`.
/// Groups missing from the maps are zero; exactness is only asserted where
/// all three groups of a spot lie in the window.
#[derive(Clone, Debug)]
pub struct ExactCoupleData {
    r: usize,
    window: BTreeSet<Bidegree>,
    d: BTreeMap<Bidegree, FgAbGroup>,
    e: BTreeMap<Bidegree, FgAbGroup>,
    alpha: BTreeMap<Bidegree, AbHom>,
    beta: BTreeMap<Bidegree, AbHom>,
    gamma: BTreeMap<Bidegree, AbHom>,
}

impl ExactCoupleData {
    /// Maps are keyed by source bidegree.
    pub fn new(
        r: usize,
        window: BTreeSet<Bidegree>,
        d: BTreeMap<Bidegree, FgAbGroup>,
        e: BTreeMap<Bidegree, FgAbGroup>,
        alpha: BTreeMap<Bidegree, AbHom>,
        beta: BTreeMap<Bidegree, AbHom>,
        gamma: BTreeMap<Bidegree, AbHom>,
    ) -> Result<Self, SpectraError> {
        let c = ExactCoupleData {
            r: r.max(1),
            window,
            d,
            e,
            alpha,
            beta,
            gamma,
        };
        for (which, maps) in [
            (Map::Alpha, &c.alpha),
            (Map::Beta, &c.beta),
            (Map::Gamma, &c.gamma),
        ] {
            for (s, h) in maps {
                let t = add(*s, c.shift(which));
                let (src, tgt) = c.ends(which, *s);
                if !c.window.contains(s)
                    || !c.window.contains(&t)
                    || h.source() != &src
                    || h.target() != &tgt
                {
                    return Err(SpectraError::ExactnessViolation {
                        at: *s,
                        site: format!("{which:?} does not match the groups at its ends"),
                    });
                }
            }
        }
        c.check_exact()?;
        Ok(c)
    }

    /// The couple `D^{p,q} = H^{p+q}(F^p C)`, `E^{p,q} = H^{p+q}(gr^p C)`.
    pub fn from_filtered(fc: &FilteredComplex) -> Result<Self, SpectraError> {
        let (lo, hi) = fc.level_range().unwrap_or((0, 0));
        let degrees = fc.degrees();
        let mut window = BTreeSet::new();
        for k in degrees.start - 1..=degrees.end {
            for p in lo - (hi - lo) - 1..=hi + 1 {
                window.insert((p, k - p));
            }
        }
        let mut dsq = BTreeMap::new();
        let mut esq = BTreeMap::new();
        for &(p, q) in &window {
            dsq.insert((p, q), fc.filtered_homology(p, p + q)?);
            esq.insert((p, q), fc.page_entry(1, p, p + q)?);
        }
        let mut alpha = BTreeMap::new();
        let mut beta = BTreeMap::new();
        let mut gamma = BTreeMap::new();
        for &x in &window {
            let k = x.0 + x.1;
            let id = IntMatrix::identity(dsq[&x].ambient_dim());
            if let Some(t) = dsq.get(&add(x, ALPHA)) {
                alpha.insert(x, AbHom::between(&dsq[&x], t, &id)?);
            }
            beta.insert(x, AbHom::between(&dsq[&x], &esq[&x], &id)?);
            if let Some(t) = dsq.get(&add(x, GAMMA)) {
                gamma.insert(x, AbHom::between(&esq[&x], t, &fc.d(k))?);
            }
        }
        let d = dsq.iter().map(|(x, s)| (*x, s.group().clone())).collect();
        let e = esq.iter().map(|(x, s)| (*x, s.group().clone())).collect();
        ExactCoupleData::new(1, window, d, e, alpha, beta, gamma)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn window(&self) -> &BTreeSet<Bidegree> {
        &self.window
    }

    pub fn d_group(&self, x: Bidegree) -> FgAbGroup {
        self.d.get(&x).cloned().unwrap_or_else(FgAbGroup::zero)
    }

    pub fn e_group(&self, x: Bidegree) -> FgAbGroup {
        self.e.get(&x).cloned().unwrap_or_else(FgAbGroup::zero)
    }

    fn beta_shift(&self) -> Bidegree {
        (self.r as i64 - 1, 1 - self.r as i64)
    }

    fn shift(&self, which: Map) -> Bidegree {
        match which {
            Map::Alpha => ALPHA,
            Map::Beta => self.beta_shift(),
            Map::Gamma => GAMMA,
        }
    }

    fn ends(&self, which: Map, s: Bidegree) -> (FgAbGroup, FgAbGroup) {
        let t = add(s, self.shift(which));
        match which {
            Map::Alpha => (self.d_group(s), self.d_group(t)),
            Map::Beta => (self.d_group(s), self.e_group(t)),
            Map::Gamma => (self.e_group(s), self.d_group(t)),
        }
    }

    /// The map out of `s`, if both ends lie in the window.
    fn map(&self, which: Map, s: Bidegree) -> Option<AbHom> {
        let t = add(s, self.shift(which));
        if !self.window.contains(&s) || !self.window.contains(&t) {
            return None;
        }
        let stored = match which {
            Map::Alpha => self.alpha.get(&s),
            Map::Beta => self.beta.get(&s),
            Map::Gamma => self.gamma.get(&s),
        };
        Some(stored.cloned().unwrap_or_else(|| {
            let (a, b) = self.ends(which, s);
            AbHom::zero(a, b)
        }))
    }

    pub fn alpha(&self, s: Bidegree) -> Option<AbHom> {
        self.map(Map::Alpha, s)
    }

    pub fn beta(&self, s: Bidegree) -> Option<AbHom> {
        self.map(Map::Beta, s)
    }

    pub fn gamma(&self, s: Bidegree) -> Option<AbHom> {
        self.map(Map::Gamma, s)
    }

    /// `d = b o g` out of `s`.
    pub fn differential(&self, s: Bidegree) -> Result<Option<AbHom>, SpectraError> {
        let Some(g) = self.gamma(s) else {
            return Ok(None);
        };
        let Some(b) = self.beta(add(s, GAMMA)) else {
            return Ok(None);
        };
        Ok(Some(g.then(&b)?))
    }

    fn check_exact(&self) -> Result<(), SpectraError> {
        for &x in &self.window {
            let spots = [
                (
                    self.alpha(sub(x, ALPHA)),
                    self.beta(x),
                    "D, between alpha and beta",
                ),
                (
                    self.beta(sub(x, self.beta_shift())),
                    self.gamma(x),
                    "E, between beta and gamma",
                ),
                (
                    self.gamma(sub(x, GAMMA)),
                    self.alpha(x),
                    "D, between gamma and alpha",
                ),
            ];
            for (f, g, site) in spots {
                if let (Some(f), Some(g)) = (f, g) {
                    if !exact_at(&f, &g)? {
                        return Err(SpectraError::ExactnessViolation {
                            at: x,
                            site: site.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The derived couple: `D' = im(a)`, `E' = ker(d) / im(d)`.
    pub fn derive(&self) -> Result<Self, SpectraError> {
        let r = self.r as i64;
        let step = (r, 1 - r);
        let mut dsq: BTreeMap<Bidegree, Subquotient> = BTreeMap::new();
        let mut esq: BTreeMap<Bidegree, Subquotient> = BTreeMap::new();
        for &x in &self.window {
            let dg = self.d_group(x);
            let image = match self.alpha(sub(x, ALPHA)) {
                Some(a) => a.image_subgroup(),
                None => Subquotient::new(dg.num_gens(), &relations(&dg), &relations(&dg))?,
            };
            dsq.insert(x, image);
            let eg = self.e_group(x);
            let n = eg.num_gens();
            let d_in = match self.differential(sub(x, step))? {
                Some(h) => h.matrix().clone(),
                None => IntMatrix::zeros(n, 0),
            };
            let (d_out, out_orders) = match self.differential(x)? {
                Some(h) => (h.matrix().clone(), h.target().orders()),
                None => (IntMatrix::zeros(0, n), Vec::new()),
            };
            esq.insert(x, homology_at(&eg.orders(), &d_in, &d_out, &out_orders)?);
        }
        let violation = |x: Bidegree, what: &str| SpectraError::ExactnessViolation {
            at: x,
            site: what.to_string(),
        };
        let mut alpha = BTreeMap::new();
        let mut beta = BTreeMap::new();
        let mut gamma = BTreeMap::new();
        for &x in &self.window {
            if let (Some(a), Some(t)) = (self.alpha(x), dsq.get(&add(x, ALPHA))) {
                alpha.insert(
                    x,
                    AbHom::between(&dsq[&x], t, a.matrix())
                        .map_err(|_| violation(x, "derived alpha"))?,
                );
            }
            if let (Some(g), Some(t)) = (self.gamma(x), dsq.get(&add(x, GAMMA))) {
                gamma.insert(
                    x,
                    AbHom::between(&esq[&x], t, g.matrix())
                        .map_err(|_| violation(x, "derived gamma"))?,
                );
            }
            let y = sub(x, ALPHA);
            let t = add(x, (r, -r));
            if let (Some(a), Some(b), Some(tsq)) = (self.alpha(y), self.beta(y), esq.get(&t)) {
                let src = &dsq[&x];
                let mut cols = Vec::new();
                for gen in src.generators() {
                    let pre = a
                        .preimage(&gen)
                        .ok_or_else(|| violation(x, "derived beta"))?;
                    let col = tsq
                        .coords(&b.apply(&pre))
                        .ok_or_else(|| violation(x, "derived beta"))?;
                    cols.push(col);
                }
                let m = IntMatrix::from_columns(tsq.group().num_gens(), &cols);
                beta.insert(x, AbHom::new(src.group().clone(), tsq.group().clone(), m)?);
            }
        }
        let d = dsq.iter().map(|(x, s)| (*x, s.group().clone())).collect();
        let e = esq.iter().map(|(x, s)| (*x, s.group().clone())).collect();
        ExactCoupleData::new(self.r + 1, self.window.clone(), d, e, alpha, beta, gamma)
    }

    /// The page `E_r` with `d_r = b o g`.
    pub fn page(&self) -> Result<SpectralPage, SpectraError> {
        let mut differentials = BTreeMap::new();
        for &x in &self.window {
            if let Some(h) = self.differential(x)? {
                differentials.insert(x, h);
            }
        }
        Ok(SpectralPage::new(self.r, self.e.clone(), differentials))
    }
}

fn relations(g: &FgAbGroup) -> Vec<Vec<BigInt>> {
    g.relation_vectors()
}

/// `im f = ker g`, checked generator by generator.
fn exact_at(f: &AbHom, g: &AbHom) -> Result<bool, SpectraError> {
    if !f.then(g)?.is_zero() {
        return Ok(false);
    }
    let k = g.kernel_subgroup();
    Ok(k.generators()
        .iter()
        .all(|v| f.preimage(&f.target().reduced(v.clone())).is_some()))
}
