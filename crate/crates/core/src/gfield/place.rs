use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::field::{canonical_field, Embedding, Fe, FieldError, FiniteField};
use super::poly::Poly;
use super::ratfunc::RatFunc;

/// A place of `F_q(t)`: a monic irreducible `pi`, or infinity.
/// Finite places sort by degree and then coefficients from the top; infinity
/// comes last.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label("t"))
    }
}

/// Residue field of a finite place with the reduction map and its section.
pub struct PlaceData {
    residue: Arc<FiniteField>,
    embedding: Embedding,
    root: Fe,
    degree: usize,
    /// Inverse over `F_p` of the map `(c_ij) -> sum iota(c_ij a^j) root^i`.
    lift_matrix: Vec<Vec<u32>>,
}

type PlaceCache = Mutex<HashMap<(u32, Vec<u32>), Arc<PlaceData>>>;

fn place_cache() -> &'static PlaceCache {
    static CACHE: OnceLock<PlaceCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Place {
    /// Panics unless `pi` is monic irreducible.
    pub fn finite(pi: Poly) -> Self {
        assert!(
            pi.is_monic() && pi.is_irreducible(),
            "place needs a monic irreducible"
        );
        Place::Finite(pi)
    }

    /// `t - a`.
    pub fn rational(field: &Arc<FiniteField>, a: Fe) -> Self {
        Place::Finite(Poly::linear(field, a))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn poly(&self) -> Option<&Poly> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.deg(),
            Place::Infinity => 1,
        }
    }

    pub fn label(&self, var: &str) -> String {
        match self {
            Place::Finite(p) => p.format(var),
            Place::Infinity => "inf".into(),
        }
    }

    pub fn valuation(&self, f: &RatFunc) -> i64 {
        assert!(!f.is_zero(), "valuation of zero");
        match self {
            Place::Finite(pi) => {
                multiplicity(f.num(), pi) as i64 - multiplicity(f.den(), pi) as i64
            }
            Place::Infinity => f.den().deg() as i64 - f.num().deg() as i64,
        }
    }

    /// A uniformizer: `pi`, or `1/t` at infinity.
    pub fn uniformizer(&self, field: &Arc<FiniteField>) -> RatFunc {
        match self {
            Place::Finite(pi) => RatFunc::from_poly(pi.clone()),
            Place::Infinity => RatFunc::t(field).inv(),
        }
    }

    pub fn data(&self, field: &Arc<FiniteField>) -> Result<Arc<PlaceData>, FieldError> {
        match self {
            Place::Finite(pi) => PlaceData::get(pi),
            Place::Infinity => PlaceData::get(&Poly::x(field)).map(|d| {
                // same residue field and trivial section as a degree-one place
                Arc::new(PlaceData {
                    residue: Arc::clone(&d.residue),
                    embedding: d.embedding.clone(),
                    root: Fe::ZERO,
                    degree: 1,
                    lift_matrix: d.lift_matrix.clone(),
                })
            }),
        }
    }

    pub fn residue_field(&self, field: &Arc<FiniteField>) -> Result<Arc<FiniteField>, FieldError> {
        match self {
            Place::Infinity => Ok(Arc::clone(field)),
            Place::Finite(_) => Ok(Arc::clone(&self.data(field)?.residue)),
        }
    }

    /// Residue class of a unit at this place.
    pub fn reduce(&self, f: &RatFunc) -> Result<Fe, FieldError> {
        debug_assert_eq!(self.valuation(f), 0, "reduction of a non-unit");
        match self {
            Place::Infinity => Ok(f.leading_ratio()),
            Place::Finite(pi) => {
                let d = PlaceData::get(pi)?;
                let r = &d.residue;
                Ok(r.div(d.reduce_poly(f.num()), d.reduce_poly(f.den())))
            }
        }
    }

    /// Representative polynomial of degree below `deg pi` for a residue class.
    pub fn lift(&self, field: &Arc<FiniteField>, r: Fe) -> Result<Poly, FieldError> {
        match self {
            Place::Infinity => Ok(Poly::constant(field, r)),
            Place::Finite(pi) => Ok(PlaceData::get(pi)?.lift(r)),
        }
    }
}

pub(crate) fn multiplicity(f: &Poly, pi: &Poly) -> u32 {
    let mut g = f.clone();
    let mut m = 0;
    loop {
        let (q, r) = g.divrem(pi);
        if !r.is_zero() {
            return m;
        }
        g = q;
        m += 1;
    }
}

impl PlaceData {
    fn get(pi: &Poly) -> Result<Arc<PlaceData>, FieldError> {
        let base = pi.field();
        let key = (
            base.order(),
            pi.coeffs().iter().map(|c| c.0).collect::<Vec<_>>(),
        );
        if let Some(d) = place_cache()
            .lock()
            .expect("place cache poisoned")
            .get(&key)
        {
            return Ok(Arc::clone(d));
        }
        let data = Arc::new(PlaceData::build(pi)?);
        place_cache()
            .lock()
            .expect("place cache poisoned")
            .insert(key, Arc::clone(&data));
        Ok(data)
    }

    fn build(pi: &Poly) -> Result<Self, FieldError> {
        let base = pi.field();
        let d = pi.deg();
        let residue = canonical_field(base.characteristic() as u64, base.degree() * d as u32)?;
        let embedding = Embedding::new(base, &residue)?;
        let lifted = Poly::new(
            Arc::clone(&residue),
            pi.coeffs().iter().map(|&c| embedding.apply(c)).collect(),
        );
        let (_, roots) = lifted.factor()?;
        let root = roots
            .iter()
            .map(|(g, _)| residue.neg(g.coeff(0)))
            .min()
            .expect("an irreducible splits in its residue field");

        let p = base.characteristic();
        let e = base.degree() as usize;
        let n = e * d;
        let mut columns = Vec::with_capacity(n);
        let mut root_pow = Fe::ONE;
        for _ in 0..d {
            for j in 0..e {
                let mut basis = vec![0u32; e];
                basis[j] = 1;
                let img = embedding.apply(base.from_coefficients(&basis));
                columns.push(residue.coefficients(residue.mul(img, root_pow)));
            }
            root_pow = residue.mul(root_pow, root);
        }
        let lift_matrix = invert_mod_p(&columns, p);
        Ok(PlaceData {
            residue,
            embedding,
            root,
            degree: d,
            lift_matrix,
        })
    }

    pub fn residue(&self) -> &Arc<FiniteField> {
        &self.residue
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn root(&self) -> Fe {
        self.root
    }

    pub fn reduce_poly(&self, f: &Poly) -> Fe {
        let r = &self.residue;
        f.coeffs().iter().rev().fold(Fe::ZERO, |acc, &c| {
            r.add(r.mul(acc, self.root), self.embedding.apply(c))
        })
    }

    pub fn lift(&self, x: Fe) -> Poly {
        let base = self.embedding.source();
        let p = base.characteristic() as u64;
        let e = base.degree() as usize;
        let digits = self.residue.coefficients(x);
        let n = digits.len();
        let coords: Vec<u32> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| self.lift_matrix[i][k] as u64 * digits[k] as u64)
                    .sum::<u64>()
                    .rem_euclid(p) as u32
            })
            .collect();
        let coeffs = (0..self.degree)
            .map(|i| base.from_coefficients(&coords[i * e..(i + 1) * e]))
            .collect();
        Poly::new(Arc::clone(base), coeffs)
    }
}

/// Inverse of the square matrix with the given columns, as rows.
fn invert_mod_p(columns: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let n = columns.len();
    let p64 = p as u64;
    let mut a: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row: Vec<u64> = (0..n).map(|j| columns[j][i] as u64).collect();
            row.extend((0..n).map(|j| u64::from(i == j)));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| a[r][col] != 0)
            .expect("reduction basis is invertible");
        a.swap(col, piv);
        let inv = super::field::mod_inverse(a[col][col], p64);
        for v in a[col].iter_mut() {
            *v = *v * inv % p64;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let c = a[r][col];
                for k in 0..2 * n {
                    a[r][k] = (a[r][k] + (p64 - c) * a[col][k]) % p64;
                }
            }
        }
    }
    a.into_iter()
        .map(|row| row[n..].iter().map(|&v| v as u32).collect())
        .collect()
}

/// Monic irreducibles of degree `d` over `field`, sorted.
pub fn irreducibles_of_degree(field: &Arc<FiniteField>, d: usize) -> Vec<Poly> {
    let q = field.order() as u64;
    let count = q.checked_pow(d as u32).expect("enumeration bound");
    let mut out = Vec::new();
    for low in 0..count {
        let mut c = Vec::with_capacity(d + 1);
        let mut v = low;
        for _ in 0..d {
            c.push(Fe((v % q) as u32));
            v /= q;
        }
        c.push(Fe::ONE);
        let f = Poly::new(Arc::clone(field), c);
        if f.is_irreducible() {
            out.push(f);
        }
    }
    out.sort();
    out
}

/// Finite places of degree at most `bound`, sorted.
pub fn places_up_to(field: &Arc<FiniteField>, bound: usize) -> Vec<Place> {
    (1..=bound)
        .flat_map(|d| irreducibles_of_degree(field, d))
        .map(Place::Finite)
        .collect()
}
