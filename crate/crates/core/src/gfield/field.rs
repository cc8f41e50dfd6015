//! Canonical finite fields `F_{p^e}` with `p^e <= 2^20`.
//!
//! The modulus is the lexicographically smallest monic irreducible of degree
//! `e` and the multiplicative generator is the smallest primitive element in
//! packed order. Elements are packed base-`p` integers: digit `i` is the
//! coefficient of `t^i`.
//!
//! Embeddings `F_{p^m} -> F_{p^n}` come from a second, norm-compatible family
//! of primitive elements (the field's *anchor*): the anchor of `F_{p^n}`
//! raised to `(p^n-1)/(p^m-1)` is a conjugate-exact image of the anchor of
//! `F_{p^m}`. This makes embeddings compose exactly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use super::poly::Poly;

pub const MAX_FIELD_SIZE: u64 = 1 << 20;
const MAX_DEGREE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field of size {p}^{e} exceeds the bound 2^20")]
    SizeBound { p: u64, e: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("F_{{{p}^{small}}} is not a subfield of F_{{{p2}^{large}}}")]
    NotSubfield {
        p: u32,
        small: u32,
        p2: u32,
        large: u32,
    },
    #[error("zero has no discrete logarithm")]
    ZeroElement,
    #[error("polynomial is zero")]
    ZeroPolynomial,
}

/// Packed field element.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

pub struct FiniteField {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Fe,
    anchor: Fe,
    bsgs: OnceLock<Bsgs>,
}

struct Bsgs {
    step: u32,
    baby: HashMap<u32, u32>,
    giant: Fe,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}
impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.q)
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.q)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

type Registry = Mutex<HashMap<(u32, u32), Arc<FiniteField>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The canonical field `F_{p^e}`; constructed once and shared.
pub fn canonical_field(p: u64, e: u32) -> Result<Arc<FiniteField>, FieldError> {
    if e == 0 {
        return Err(FieldError::ZeroDegree);
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    let size = (p as u128).checked_pow(e);
    if size.is_none_or(|s| s > MAX_FIELD_SIZE as u128) {
        return Err(FieldError::SizeBound { p, e });
    }
    let key = (p as u32, e);
    if let Some(f) = registry()
        .lock()
        .expect("field registry poisoned")
        .get(&key)
    {
        return Ok(Arc::clone(f));
    }
    // built outside the lock: construction recurses into subfields
    let field = Arc::new(FiniteField::build(p as u32, e)?);
    let mut reg = registry().lock().expect("field registry poisoned");
    Ok(Arc::clone(reg.entry(key).or_insert(field)))
}

/// Field of order `q`, for `q` a prime power.
pub fn field_of_order(q: u64) -> Result<Arc<FiniteField>, FieldError> {
    if q < 2 {
        return Err(FieldError::NotPrime(q));
    }
    let p = prime_factors(q)[0];
    let mut e = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        e += 1;
    }
    if r != 1 {
        return Err(FieldError::NotPrime(q));
    }
    canonical_field(p, e)
}

impl FiniteField {
    fn build(p: u32, e: u32) -> Result<Self, FieldError> {
        let q = p.pow(e);
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, e)?
        };
        let mut field = FiniteField {
            p,
            e,
            q,
            modulus,
            generator: Fe::ONE,
            anchor: Fe::ONE,
            bsgs: OnceLock::new(),
        };
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let is_primitive =
            |f: &FiniteField, x: Fe| factors.iter().all(|r| f.pow(x, order / r) != Fe::ONE);
        field.generator = (1..q)
            .map(Fe)
            .find(|&x| is_primitive(&field, x))
            .expect("multiplicative group of a finite field is cyclic");
        field.anchor = if e == 1 {
            field.generator
        } else {
            let subfields: Vec<(u64, Vec<u32>)> = maximal_divisors(e)
                .into_iter()
                .map(|m| {
                    let sub = canonical_field(p as u64, m)?;
                    let exp = (q as u64 - 1) / (sub.q as u64 - 1);
                    Ok((exp, sub.minpoly_over_prime(sub.anchor)))
                })
                .collect::<Result<_, FieldError>>()?;
            (1..q)
                .map(Fe)
                .find(|&x| {
                    is_primitive(&field, x)
                        && subfields
                            .iter()
                            .all(|(exp, mp)| &field.minpoly_over_prime(field.pow(x, *exp)) == mp)
                })
                .expect("norm-compatible primitive elements exist")
        };
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Order of the unit group, `q - 1`.
    pub fn unit_order(&self) -> u64 {
        self.q as u64 - 1
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn anchor(&self) -> Fe {
        self.anchor
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.q).map(Fe)
    }

    fn digits(&self, x: Fe) -> [u32; MAX_DEGREE] {
        let mut d = [0u32; MAX_DEGREE];
        let mut v = x.0;
        for slot in d.iter_mut().take(self.e as usize) {
            *slot = v % self.p;
            v /= self.p;
        }
        d
    }

    fn pack(&self, d: &[u32]) -> Fe {
        let mut v = 0u32;
        for i in (0..self.e as usize).rev() {
            v = v * self.p + d[i];
        }
        Fe(v)
    }

    /// Coefficients of the representing polynomial, low degree first.
    pub fn coefficients(&self, x: Fe) -> Vec<u32> {
        self.digits(x)[..self.e as usize].to_vec()
    }

    pub fn from_coefficients(&self, c: &[u32]) -> Fe {
        let mut d = [0u32; MAX_DEGREE];
        for (i, &v) in c.iter().enumerate().take(self.e as usize) {
            d[i] = v % self.p;
        }
        self.pack(&d)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(self.p as i64) as u32)
    }

    /// The class of the polynomial variable (`t mod modulus`).
    pub fn variable(&self) -> Fe {
        if self.e == 1 {
            Fe::ZERO
        } else {
            Fe(self.p)
        }
    }

    pub fn contains(&self, x: Fe) -> bool {
        x.0 < self.q
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.e == 1 {
            return Fe((a.0 + b.0) % self.p);
        }
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut d = [0u32; MAX_DEGREE];
        for i in 0..self.e as usize {
            d[i] = (x[i] + y[i]) % self.p;
        }
        self.pack(&d)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.e == 1 {
            return Fe((self.p - a.0) % self.p);
        }
        if self.p == 2 {
            return a;
        }
        let x = self.digits(a);
        let mut d = [0u32; MAX_DEGREE];
        for i in 0..self.e as usize {
            d[i] = (self.p - x[i]) % self.p;
        }
        self.pack(&d)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if self.e == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let e = self.e as usize;
        let p = self.p as u64;
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..e {
            if x[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] += x[i] as u64 * y[j] as u64;
            }
        }
        for c in prod.iter_mut().take(2 * e - 1) {
            *c %= p;
        }
        for k in (e..2 * e - 1).rev() {
            let c = prod[k] % p;
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            // t^k = t^(k-e) * t^e and t^e = -(lower modulus terms)
            for (i, &m) in self.modulus[..e].iter().enumerate() {
                if m != 0 {
                    prod[k - e + i] = (prod[k - e + i] + (p - c) * m as u64) % p;
                }
            }
        }
        let mut d = [0u32; MAX_DEGREE];
        for i in 0..e {
            d[i] = (prod[i] % p) as u32;
        }
        self.pack(&d)
    }

    pub fn pow(&self, a: Fe, mut n: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    pub fn pow_signed(&self, a: Fe, n: i64) -> Fe {
        if n >= 0 {
            self.pow(a, n as u64)
        } else {
            self.inv(self.pow(a, n.unsigned_abs()))
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: Fe) -> Fe {
        assert!(!a.is_zero(), "inverse of zero in {self}");
        self.pow(a, self.q as u64 - 2)
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    /// `generator^k`.
    pub fn exp(&self, k: i64) -> Fe {
        self.pow(
            self.generator,
            k.rem_euclid(self.unit_order() as i64) as u64,
        )
    }

    /// Discrete logarithm to the canonical generator, in `[0, q-1)`.
    pub fn dlog(&self, x: Fe) -> Result<u64, FieldError> {
        if x.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        if self.q == 2 {
            return Ok(0);
        }
        let table = self.bsgs.get_or_init(|| {
            let n = self.unit_order();
            let step = (n as f64).sqrt().ceil() as u32;
            let mut baby = HashMap::with_capacity(step as usize);
            let mut cur = Fe::ONE;
            for j in 0..step {
                baby.entry(cur.0).or_insert(j);
                cur = self.mul(cur, self.generator);
            }
            let giant = self.inv(self.pow(self.generator, step as u64));
            Bsgs { step, baby, giant }
        });
        let mut y = x;
        for i in 0..=table.step {
            if let Some(&j) = table.baby.get(&y.0) {
                return Ok((i as u64 * table.step as u64 + j as u64) % self.unit_order());
            }
            y = self.mul(y, table.giant);
        }
        unreachable!("generator spans the unit group")
    }

    /// Frobenius-orbit minimal polynomial over `F_p`, coefficients low first.
    pub(crate) fn minpoly_over_prime(&self, x: Fe) -> Vec<u32> {
        let mut conj = vec![x];
        let mut y = self.pow(x, self.p as u64);
        while y != x {
            conj.push(y);
            y = self.pow(y, self.p as u64);
        }
        let mut poly = vec![Fe::ONE];
        for c in conj {
            // poly *= (X - c)
            let mut next = vec![Fe::ZERO; poly.len() + 1];
            for (i, &a) in poly.iter().enumerate() {
                next[i + 1] = self.add(next[i + 1], a);
                next[i] = self.sub(next[i], self.mul(a, c));
            }
            poly = next;
        }
        poly.into_iter()
            .map(|c| {
                debug_assert!(
                    c.0 < self.p,
                    "minimal polynomial has prime-field coefficients"
                );
                c.0
            })
            .collect()
    }

    pub fn format(&self, x: Fe) -> String {
        format_element(self, x, "a")
    }
}

pub(crate) fn format_element(field: &FiniteField, x: Fe, var: &str) -> String {
    if field.e == 1 {
        return x.0.to_string();
    }
    let c = field.coefficients(x);
    let mut terms = Vec::new();
    for (i, &v) in c.iter().enumerate().rev() {
        if v == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        terms.push(match (v, i) {
            (_, 0) => v.to_string(),
            (1, _) => mono,
            _ => format!("{v}*{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

fn maximal_divisors(e: u32) -> Vec<u32> {
    prime_factors(e as u64)
        .into_iter()
        .map(|r| e / r as u32)
        .collect()
}

fn smallest_irreducible(p: u32, e: u32) -> Result<Vec<u32>, FieldError> {
    let prime = canonical_field(p as u64, 1)?;
    let count = (p as u64).pow(e);
    for low in 0..count {
        let mut coeffs = Vec::with_capacity(e as usize + 1);
        let mut v = low;
        for _ in 0..e {
            coeffs.push(Fe((v % p as u64) as u32));
            v /= p as u64;
        }
        coeffs.push(Fe::ONE);
        if coeffs[0].is_zero() {
            continue;
        }
        let f = Poly::new(Arc::clone(&prime), coeffs.clone());
        if f.is_irreducible() {
            return Ok(coeffs.into_iter().map(|c| c.0).collect());
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// The canonical embedding `small -> large`.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: Arc<FiniteField>,
    target: Arc<FiniteField>,
    image_of_variable: Fe,
}

type EmbeddingCache = Mutex<HashMap<(u32, u32, u32), Fe>>;

fn embedding_cache() -> &'static EmbeddingCache {
    static CACHE: OnceLock<EmbeddingCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Embedding {
    pub fn new(source: &Arc<FiniteField>, target: &Arc<FiniteField>) -> Result<Self, FieldError> {
        if source.p != target.p || !target.e.is_multiple_of(source.e) {
            return Err(FieldError::NotSubfield {
                p: source.p,
                small: source.e,
                p2: target.p,
                large: target.e,
            });
        }
        let key = (source.p, source.e, target.e);
        let cached = embedding_cache()
            .lock()
            .expect("embedding cache poisoned")
            .get(&key)
            .copied();
        let image = match cached {
            Some(img) => img,
            None => {
                let img = if source.e == 1 {
                    Fe::ZERO
                } else {
                    let n = source.unit_order();
                    let dl_t = source.dlog(source.variable())?;
                    let dl_anchor = source.dlog(source.anchor)?;
                    let a = (dl_t as u128 * mod_inverse(dl_anchor, n) as u128 % n as u128) as u64;
                    let k = target.unit_order() / n;
                    target.pow(
                        target.anchor,
                        (a as u128 * k as u128 % target.unit_order() as u128) as u64,
                    )
                };
                embedding_cache()
                    .lock()
                    .expect("embedding cache poisoned")
                    .insert(key, img);
                img
            }
        };
        Ok(Embedding {
            source: Arc::clone(source),
            target: Arc::clone(target),
            image_of_variable: image,
        })
    }

    pub fn source(&self) -> &Arc<FiniteField> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteField> {
        &self.target
    }

    pub fn degree(&self) -> u32 {
        self.target.e / self.source.e
    }

    pub fn apply(&self, x: Fe) -> Fe {
        let c = self.source.coefficients(x);
        let mut acc = Fe::ZERO;
        for &ci in c.iter().rev() {
            acc = self
                .target
                .add(self.target.mul(acc, self.image_of_variable), Fe(ci));
        }
        acc
    }
}

pub(crate) fn mod_inverse(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "{a} is not invertible modulo {n}");
    old_s.rem_euclid(n as i128) as u64
}

/// `N_{L/E}(x) = x^((|L|-1)/(|E|-1))`, returned as an element of `E`.
pub fn norm_element(emb: &Embedding, x: Fe) -> Result<Fe, FieldError> {
    if x.is_zero() {
        return Err(FieldError::ZeroElement);
    }
    let (small, large) = (emb.source(), emb.target());
    let k = large.unit_order() / small.unit_order();
    let dl = large.dlog(x)?;
    // the image of the generator of E is g_L^(m k), so g_L^k = iota(g_E)^(1/m)
    let img = large.dlog(emb.apply(small.generator))?;
    let m = img / k;
    let m_inv = mod_inverse(m % small.unit_order().max(1), small.unit_order().max(1));
    let exponent = (dl as u128 * m_inv as u128 % small.unit_order().max(1) as u128) as i64;
    Ok(small.exp(exponent))
}
