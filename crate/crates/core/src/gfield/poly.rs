use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{format_element, Fe, FieldError, FiniteField};

/// Univariate polynomial over a canonical finite field, low degree first,
/// no trailing zeros.
#[derive(Clone)]
pub struct Poly {
    field: Arc<FiniteField>,
    coeffs: Vec<Fe>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}
impl Eq for Poly {}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.order().hash(state);
        self.coeffs.hash(state);
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree first, then coefficients from the top down.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.field
            .order()
            .cmp(&other.field.order())
            .then(self.coeffs.len().cmp(&other.coeffs.len()))
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format("t"))
    }
}

impl Poly {
    pub fn new(field: Arc<FiniteField>, mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn zero(field: &Arc<FiniteField>) -> Self {
        Poly::new(Arc::clone(field), Vec::new())
    }

    pub fn one(field: &Arc<FiniteField>) -> Self {
        Poly::constant(field, Fe::ONE)
    }

    pub fn constant(field: &Arc<FiniteField>, c: Fe) -> Self {
        Poly::new(Arc::clone(field), vec![c])
    }

    /// `t`.
    pub fn x(field: &Arc<FiniteField>) -> Self {
        Poly::new(Arc::clone(field), vec![Fe::ZERO, Fe::ONE])
    }

    /// `t - a`.
    pub fn linear(field: &Arc<FiniteField>, a: Fe) -> Self {
        Poly::new(Arc::clone(field), vec![field.neg(a), Fe::ONE])
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [Fe::ONE]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with `deg 0 = 0`.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Fe::ONE
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(self.leading());
        self.scale(inv)
    }

    pub fn scale(&self, c: Fe) -> Self {
        let f = &self.field;
        Poly::new(
            Arc::clone(f),
            self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            Arc::clone(f),
            (0..n)
                .map(|i| f.add(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            Arc::clone(f),
            (0..n)
                .map(|i| f.sub(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Poly::new(
            Arc::clone(f),
            self.coeffs.iter().map(|&a| f.neg(a)).collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(Arc::clone(f), out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one(&self.field);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let f = &self.field;
        let dd = d.deg();
        if self.coeffs.len() < d.coeffs.len() {
            return (Poly::zero(f), self.clone());
        }
        let inv = f.inv(d.leading());
        let mut r = self.coeffs.clone();
        let mut q = vec![Fe::ZERO; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = f.mul(r[k + dd], inv);
            q[k] = c;
            if c.is_zero() {
                continue;
            }
            for (i, &di) in d.coeffs.iter().enumerate() {
                r[k + i] = f.sub(r[k + i], f.mul(c, di));
            }
        }
        r.truncate(dd);
        (Poly::new(Arc::clone(f), q), Poly::new(Arc::clone(f), r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    pub fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn divides(&self, f: &Self) -> bool {
        f.rem(self).is_zero()
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
            .collect();
        Poly::new(Arc::clone(f), coeffs)
    }

    pub fn eval(&self, x: Fe) -> Fe {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn mulmod(&self, other: &Self, m: &Self) -> Self {
        self.mul(other).rem(m)
    }

    pub fn powmod(&self, mut n: u64, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = Poly::one(&self.field).rem(m);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mulmod(&base, m);
            }
            base = base.mulmod(&base, m);
            n >>= 1;
        }
        acc
    }

    /// `self^(q^k) mod m` by `k` successive `q`-th powers.
    fn frobenius_mod(&self, k: u32, m: &Self) -> Self {
        let q = self.field.order() as u64;
        let mut acc = self.rem(m);
        for _ in 0..k {
            acc = acc.powmod(q, m);
        }
        acc
    }

    /// Irreducibility certified by the absence of factors of degree at most
    /// half the degree.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        let x = Poly::x(&self.field);
        let mut h = x.rem(self);
        for _ in 1..=n / 2 {
            h = h.powmod(self.field.order() as u64, self);
            if !h.sub(&x).gcd(self).is_one() {
                return false;
            }
        }
        true
    }

    /// Monic irreducible factorization with multiplicities, sorted.
    pub fn factor(&self) -> Result<(Fe, Vec<(Poly, u32)>), FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroPolynomial);
        }
        let lc = self.leading();
        let mut out = Vec::new();
        for (g, m) in squarefree(&self.monic()) {
            for (h, d) in distinct_degree(&g) {
                for irr in equal_degree(&h, d) {
                    out.push((irr, m));
                }
            }
        }
        out.sort();
        // merge equal factors from different squarefree parts
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in out {
            match merged.last_mut() {
                Some((h, k)) if *h == g => *k += m,
                _ => merged.push((g, m)),
            }
        }
        Ok((lc, merged))
    }

    pub fn format(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = &self.field;
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coeff = format_element(f, c, "a");
            let coeff = if f.degree() > 1 && coeff.contains('+') {
                format!("({coeff})")
            } else {
                coeff
            };
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            terms.push(match i {
                0 => coeff,
                _ if c == Fe::ONE => mono,
                _ => format!("{coeff}*{mono}"),
            });
        }
        terms.join(" + ")
    }
}

/// `p`-th root of a polynomial whose derivative vanishes.
fn pth_root(f: &Poly) -> Poly {
    let field = f.field();
    let p = field.characteristic() as usize;
    let inv_frob = (field.order() / field.characteristic()) as u64;
    let coeffs = f
        .coeffs()
        .iter()
        .step_by(p)
        .map(|&c| field.pow(c, inv_frob))
        .collect();
    Poly::new(Arc::clone(field), coeffs)
}

fn squarefree(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let p = f.field().characteristic();
    let d = f.derivative();
    if d.is_zero() {
        for (g, m) in squarefree(&pth_root(f)) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = f.gcd(&d);
    let mut w = f.div_exact(&c);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.div_exact(&y);
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.div_exact(&w);
        i += 1;
    }
    if !c.is_one() {
        for (g, m) in squarefree(&pth_root(&c)) {
            out.push((g, m * p));
        }
    }
    out
}

fn distinct_degree(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let x = Poly::x(f.field());
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut i = 0u32;
    while rest.deg() >= 2 * (i as usize + 1) {
        i += 1;
        h = h.frobenius_mod(1, &rest);
        let g = h.sub(&x).gcd(&rest);
        if !g.is_one() {
            rest = rest.div_exact(&g);
            h = h.rem(&rest);
            out.push((g, i));
        }
    }
    if rest.deg() > 0 {
        let d = rest.deg() as u32;
        out.push((rest, d));
    }
    out
}

fn equal_degree(f: &Poly, d: u32) -> Vec<Poly> {
    let n = f.deg() as u32;
    if n == d {
        return vec![f.clone()];
    }
    let field = f.field();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (n as u64) << 8 ^ d as u64);
    loop {
        let a = Poly::new(
            Arc::clone(field),
            (0..n)
                .map(|_| Fe(rng.gen_range(0..field.order())))
                .collect(),
        );
        if a.deg() == 0 {
            continue;
        }
        let b = if field.characteristic() == 2 {
            // absolute trace down to F_2
            let k = field.degree() * d;
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..k {
                t = t.mulmod(&t, f);
                acc = acc.add(&t);
            }
            acc
        } else {
            // a^((q^d - 1)/2) = (a^(1 + q + ... + q^(d-1)))^((q-1)/2)
            let mut norm = a.rem(f);
            let mut conj = a.rem(f);
            for _ in 1..d {
                conj = conj.frobenius_mod(1, f);
                norm = norm.mulmod(&conj, f);
            }
            norm.powmod((field.order() as u64 - 1) / 2, f)
                .sub(&Poly::one(field))
        };
        let g = b.gcd(f);
        if g.deg() > 0 && g.deg() < f.deg() {
            let mut out = equal_degree(&g, d);
            out.extend(equal_degree(&f.div_exact(&g), d));
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::field::canonical_field;
    use super::*;

    fn poly(field: &Arc<FiniteField>, c: &[u32]) -> Poly {
        Poly::new(Arc::clone(field), c.iter().map(|&v| Fe(v)).collect())
    }

    #[test]
    fn factor_t2_plus_1_over_f5() {
        let f5 = canonical_field(5, 1).unwrap();
        let (lc, fs) = poly(&f5, &[1, 0, 1]).factor().unwrap();
        assert_eq!(lc, Fe::ONE);
        assert_eq!(fs, vec![(poly(&f5, &[2, 1]), 1), (poly(&f5, &[3, 1]), 1)]);
    }

    #[test]
    fn factor_zero_fails() {
        let f5 = canonical_field(5, 1).unwrap();
        assert_eq!(
            Poly::zero(&f5).factor().unwrap_err(),
            FieldError::ZeroPolynomial
        );
    }

    #[test]
    fn factor_with_multiplicity_and_char_p_powers() {
        let f2 = canonical_field(2, 1).unwrap();
        // (t+1)^2 * t^3 * (t^2+t+1)^2 = composite with p-th powers
        let t = poly(&f2, &[0, 1]);
        let t1 = poly(&f2, &[1, 1]);
        let q = poly(&f2, &[1, 1, 1]);
        let f = t1.pow(2).mul(&t.pow(3)).mul(&q.pow(2));
        let (_, fs) = f.factor().unwrap();
        assert_eq!(fs, vec![(t, 3), (t1, 2), (q, 2)]);
    }

    #[test]
    fn factor_products_roundtrip() {
        for (p, e) in [(3u64, 1u32), (2, 3), (7, 1), (3, 2)] {
            let field = canonical_field(p, e).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..20 {
                let deg = rng.gen_range(1..8);
                let c: Vec<u32> = (0..=deg).map(|_| rng.gen_range(0..field.order())).collect();
                let f = poly(&field, &c);
                if f.is_zero() {
                    continue;
                }
                let (lc, fs) = f.factor().unwrap();
                let mut prod = Poly::constant(&field, lc);
                for (g, m) in &fs {
                    assert!(g.is_irreducible() && g.is_monic());
                    prod = prod.mul(&g.pow(*m));
                }
                assert_eq!(prod, f);
            }
        }
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree n over F_q via Moebius
        let f3 = canonical_field(3, 1).unwrap();
        for (n, expected) in [(1usize, 3usize), (2, 3), (3, 8), (4, 18)] {
            let mut count = 0;
            for low in 0..3u32.pow(n as u32) {
                let mut c: Vec<u32> = (0..n).map(|i| (low / 3u32.pow(i as u32)) % 3).collect();
                c.push(1);
                if poly(&f3, &c).is_irreducible() {
                    count += 1;
                }
            }
            assert_eq!(count, expected);
        }
    }
}
