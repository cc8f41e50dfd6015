//! Lines, points and products of linear forms on `P^2` over `F_q`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::gfield::{Fe, FiniteField, Place, Poly, RatFunc};
use crate::parse::{parse_expr, Expr, ParseError};

/// A linear form `ax + by + cz` scaled so its first nonzero coefficient is 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearForm(pub [Fe; 3]);

/// A rational point `[a:b:c]` scaled so its first nonzero coordinate is 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProjPoint(pub [Fe; 3]);

fn normalize3(k: &FiniteField, v: [Fe; 3]) -> Option<(Fe, [Fe; 3])> {
    let lead = *v.iter().find(|c| !c.is_zero())?;
    let inv = k.inv(lead);
    Some((lead, v.map(|c| k.mul(c, inv))))
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn format3(k: &FiniteField, v: &[Fe; 3], names: &[&str; 3]) -> String {
    let mut terms = Vec::new();
    for (c, name) in v.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let coeff = k.format(*c);
        terms.push(if *c == Fe::ONE {
            name.to_string()
        } else if coeff.contains('+') {
            format!("({coeff})*{name}")
        } else {
            format!("{coeff}*{name}")
        });
    }
    terms.join(" + ")
}

impl LinearForm {
    pub fn new(k: &FiniteField, v: [Fe; 3]) -> Option<Self> {
        normalize3(k, v).map(|(_, f)| LinearForm(f))
    }

    pub fn eval(&self, k: &FiniteField, p: &[Fe; 3]) -> Fe {
        (0..3).fold(Fe::ZERO, |acc, i| k.add(acc, k.mul(self.0[i], p[i])))
    }

    pub fn contains(&self, k: &FiniteField, p: &ProjPoint) -> bool {
        self.eval(k, &p.0).is_zero()
    }

    pub fn format(&self, k: &FiniteField) -> String {
        format3(k, &self.0, &VARS)
    }

    /// `(p0, p1)` with the line parametrized by `s -> p0 + s p1`, `inf -> p1`.
    pub fn parametrization(&self, k: &FiniteField) -> ([Fe; 3], [Fe; 3]) {
        let pivot = self
            .0
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero form");
        let free: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
        let basis = |j: usize| {
            let mut v = [Fe::ZERO; 3];
            v[j] = Fe::ONE;
            v[pivot] = k.neg(self.0[j]);
            v
        };
        (basis(free[1]), basis(free[0]))
    }

    /// The place of the line's parameter at a rational point on it.
    pub fn place_of(&self, k: &Arc<FiniteField>, p: &ProjPoint) -> Place {
        debug_assert!(self.contains(k, p));
        let pivot = self
            .0
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero form");
        let free: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
        let (c1, c0) = (p.0[free[0]], p.0[free[1]]);
        if c0.is_zero() {
            Place::Infinity
        } else {
            Place::rational(k, k.div(c1, c0))
        }
    }

    /// The point of the line at a rational place of its parameter.
    pub fn point_at(&self, k: &FiniteField, v: &Place) -> Option<ProjPoint> {
        let (p0, p1) = self.parametrization(k);
        match v {
            Place::Infinity => ProjPoint::new(k, p1),
            Place::Finite(pi) if pi.deg() == 1 => {
                let s = k.neg(pi.coeff(0));
                ProjPoint::new(k, [0, 1, 2].map(|i| k.add(p0[i], k.mul(s, p1[i]))))
            }
            Place::Finite(_) => None,
        }
    }

    pub fn intersect(&self, k: &FiniteField, o: &LinearForm) -> Option<ProjPoint> {
        let (a, b) = (self.0, o.0);
        let cross = [
            k.sub(k.mul(a[1], b[2]), k.mul(a[2], b[1])),
            k.sub(k.mul(a[2], b[0]), k.mul(a[0], b[2])),
            k.sub(k.mul(a[0], b[1]), k.mul(a[1], b[0])),
        ];
        ProjPoint::new(k, cross)
    }
}

impl ProjPoint {
    pub fn new(k: &FiniteField, v: [Fe; 3]) -> Option<Self> {
        normalize3(k, v).map(|(_, p)| ProjPoint(p))
    }

    pub fn format(&self, k: &FiniteField) -> String {
        let c: Vec<String> = self.0.iter().map(|&x| k.format(x)).collect();
        format!("[{}]", c.join(":"))
    }
}

/// `scalar * prod l_j^m_j` with `sum m_j = 0`.
#[derive(Clone, PartialEq, Eq)]
pub struct PlaneFunction {
    base: Arc<FiniteField>,
    scalar: Fe,
    factors: BTreeMap<LinearForm, i64>,
}

impl fmt::Debug for PlaneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format())
    }
}

impl PlaneFunction {
    pub fn constant(base: &Arc<FiniteField>, c: Fe) -> Self {
        assert!(!c.is_zero(), "zero plane function");
        PlaneFunction {
            base: Arc::clone(base),
            scalar: c,
            factors: BTreeMap::new(),
        }
    }

    /// `num / den` for two linear forms.
    pub fn ratio(base: &Arc<FiniteField>, num: LinearForm, den: LinearForm) -> Self {
        let mut f = PlaneFunction::constant(base, Fe::ONE);
        f.bump(num, 1);
        f.bump(den, -1);
        f
    }

    pub fn from_parts(
        base: &Arc<FiniteField>,
        scalar: Fe,
        factors: BTreeMap<LinearForm, i64>,
    ) -> Self {
        let mut f = PlaneFunction::constant(base, scalar);
        for (l, m) in factors {
            f.bump(l, m);
        }
        f
    }

    fn bump(&mut self, l: LinearForm, m: i64) {
        let e = self.factors.entry(l).or_insert(0);
        *e += m;
        if *e == 0 {
            self.factors.remove(&l);
        }
    }

    pub fn base(&self) -> &Arc<FiniteField> {
        &self.base
    }

    pub fn scalar(&self) -> Fe {
        self.scalar
    }

    pub fn factors(&self) -> &BTreeMap<LinearForm, i64> {
        &self.factors
    }

    pub fn degree(&self) -> i64 {
        self.factors.values().sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.scalar = self.base.mul(self.scalar, o.scalar);
        for (l, m) in &o.factors {
            out.bump(*l, *m);
        }
        out
    }

    pub fn pow(&self, n: i64) -> Self {
        PlaneFunction {
            base: Arc::clone(&self.base),
            scalar: self.base.pow_signed(self.scalar, n),
            factors: self.factors.iter().map(|(l, m)| (*l, m * n)).collect(),
        }
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.scalar = self.base.neg(self.scalar);
        out
    }

    pub fn is_one(&self) -> bool {
        self.scalar == Fe::ONE && self.factors.is_empty()
    }

    /// `1 - f`, available when `f` has at most two distinct factors with
    /// exponents `+1` and `-1` (so `1 - f` is again a ratio of forms).
    pub fn one_minus(&self) -> Option<Self> {
        let k = &self.base;
        let (num, den) = match self.factors.len() {
            0 => {
                let c = k.sub(Fe::ONE, self.scalar);
                return (!c.is_zero()).then(|| PlaneFunction::constant(k, c));
            }
            2 => {
                let mut it = self.factors.iter();
                let (a, b) = (it.next()?, it.next()?);
                match (*a.1, *b.1) {
                    (1, -1) => (*a.0, *b.0),
                    (-1, 1) => (*b.0, *a.0),
                    _ => return None,
                }
            }
            _ => return None,
        };
        // (den - c num) / den
        let c = self.scalar;
        let v = [0, 1, 2].map(|i| k.sub(den.0[i], k.mul(c, num.0[i])));
        let (lead, form) = normalize3(k, v)?;
        let mut out = PlaneFunction::constant(k, lead);
        out.bump(LinearForm(form), 1);
        out.bump(den, -1);
        Some(out)
    }

    pub fn valuation(&self, l: &LinearForm) -> i64 {
        self.factors.get(l).copied().unwrap_or(0)
    }

    /// Restriction to a line along which the function is a unit.
    pub fn restrict(&self, l: &LinearForm) -> RatFunc {
        assert_eq!(self.valuation(l), 0, "restriction of a non-unit");
        let k = &self.base;
        let (p0, p1) = l.parametrization(k);
        let mut out = RatFunc::constant(k, self.scalar);
        for (m, e) in &self.factors {
            let lin = Poly::new(Arc::clone(k), vec![m.eval(k, &p0), m.eval(k, &p1)]);
            out = out.mul(&RatFunc::from_poly(lin).pow(*e));
        }
        out
    }

    pub fn format(&self) -> String {
        let k = &self.base;
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (l, m) in &self.factors {
            let f = l.format(k);
            let f = if f.contains(' ') { format!("({f})") } else { f };
            let term = if m.abs() == 1 {
                f
            } else {
                format!("{f}^{}", m.abs())
            };
            if *m > 0 {
                num.push(term)
            } else {
                den.push(term)
            }
        }
        let mut s = if self.scalar == Fe::ONE && !num.is_empty() {
            num.join("*")
        } else {
            let c = k.format(self.scalar);
            let c = if c.contains('+') { format!("({c})") } else { c };
            std::iter::once(c).chain(num).collect::<Vec<_>>().join("*")
        };
        if !den.is_empty() {
            s = format!(
                "{s}/{}",
                if den.len() == 1 {
                    den[0].clone()
                } else {
                    format!("({})", den.join("*"))
                }
            );
        }
        s
    }
}

enum Val {
    Lin([Fe; 3], Fe),
    Prod(PlaneFunction),
}

/// Parse a product of linear forms. With three names the coordinates are
/// homogeneous; with two, the third coordinate is 1.
pub fn parse_plane_function(
    s: &str,
    k: &Arc<FiniteField>,
    vars: &[&str],
) -> Result<PlaneFunction, ParseError> {
    let e = parse_expr(s)?;
    let homogeneous = vars.len() == 3;
    let prod = to_prod(eval(&e, k, vars)?, k, homogeneous)?;
    if homogeneous {
        if prod.degree() != 0 {
            return Err(ParseError::Invalid(format!(
                "{s} is not homogeneous of degree 0"
            )));
        }
        Ok(prod)
    } else {
        let d = prod.degree();
        let z = LinearForm([Fe::ZERO, Fe::ZERO, Fe::ONE]);
        let mut out = prod;
        out.bump(z, -d);
        Ok(out)
    }
}

/// Parse a linear form, returned normalized.
pub fn parse_linear_form(
    s: &str,
    k: &Arc<FiniteField>,
    vars: &[&str],
) -> Result<LinearForm, ParseError> {
    let e = parse_expr(s)?;
    match eval(&e, k, vars)? {
        Val::Lin(v, c) => {
            let v = if vars.len() == 3 {
                if !c.is_zero() {
                    return Err(ParseError::Invalid(format!("{s} is not homogeneous")));
                }
                v
            } else {
                [v[0], v[1], c]
            };
            LinearForm::new(k, v)
                .ok_or_else(|| ParseError::Invalid(format!("{s} is not a linear form")))
        }
        Val::Prod(p) if p.factors.len() == 1 && p.degree() == 1 => {
            Ok(*p.factors.keys().next().unwrap())
        }
        Val::Prod(_) => Err(ParseError::Invalid(format!("{s} is not a linear form"))),
    }
}

fn to_prod(v: Val, k: &Arc<FiniteField>, homogeneous: bool) -> Result<PlaneFunction, ParseError> {
    match v {
        Val::Prod(p) => Ok(p),
        Val::Lin(lin, c) => {
            if lin.iter().all(|x| x.is_zero()) {
                if c.is_zero() {
                    return Err(ParseError::DivisionByZero);
                }
                return Ok(PlaneFunction::constant(k, c));
            }
            let full = if homogeneous {
                if !c.is_zero() {
                    return Err(ParseError::Invalid("inhomogeneous linear term".into()));
                }
                lin
            } else {
                [lin[0], lin[1], c]
            };
            let (lead, form) = normalize3(k, full).expect("nonzero form");
            let mut p = PlaneFunction::constant(k, lead);
            p.bump(LinearForm(form), 1);
            Ok(p)
        }
    }
}

fn eval(e: &Expr, k: &Arc<FiniteField>, vars: &[&str]) -> Result<Val, ParseError> {
    let homogeneous = vars.len() == 3;
    let prod = |v: Val| to_prod(v, k, homogeneous);
    let lin = |v: Val| -> Result<([Fe; 3], Fe), ParseError> {
        match v {
            Val::Lin(l, c) => Ok((l, c)),
            Val::Prod(p) if p.factors.is_empty() => Ok(([Fe::ZERO; 3], p.scalar)),
            Val::Prod(p) if p.factors.len() == 1 && p.degree() == 1 => {
                let (l, _) = p.factors.iter().next().unwrap();
                let v = l.0.map(|c| k.mul(c, p.scalar));
                if homogeneous {
                    Ok((v, Fe::ZERO))
                } else {
                    Ok(([v[0], v[1], Fe::ZERO], v[2]))
                }
            }
            Val::Prod(p) => Err(ParseError::Invalid(format!("cannot add {}", p.format()))),
        }
    };
    Ok(match e {
        Expr::Num(n) => Val::Lin([Fe::ZERO; 3], k.from_int(*n)),
        Expr::Var(v) if v == "a" => Val::Lin([Fe::ZERO; 3], k.variable()),
        Expr::Var(v) => {
            let i = vars
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| ParseError::UnknownIdent(v.clone()))?;
            let mut l = [Fe::ZERO; 3];
            l[i] = Fe::ONE;
            Val::Lin(l, Fe::ZERO)
        }
        Expr::Neg(a) => match eval(a, k, vars)? {
            Val::Lin(l, c) => Val::Lin(l.map(|x| k.neg(x)), k.neg(c)),
            Val::Prod(p) => Val::Prod(p.neg()),
        },
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (la, ca) = lin(eval(a, k, vars)?)?;
            let (lb, cb) = lin(eval(b, k, vars)?)?;
            let sub = matches!(e, Expr::Sub(..));
            let op = |x: Fe, y: Fe| if sub { k.sub(x, y) } else { k.add(x, y) };
            Val::Lin([0, 1, 2].map(|i| op(la[i], lb[i])), op(ca, cb))
        }
        Expr::Mul(a, b) => Val::Prod(prod(eval(a, k, vars)?)?.mul(&prod(eval(b, k, vars)?)?)),
        Expr::Div(a, b) => Val::Prod(prod(eval(a, k, vars)?)?.div(&prod(eval(b, k, vars)?)?)),
        Expr::Pow(a, n) => Val::Prod(prod(eval(a, k, vars)?)?.pow(*n)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfield::canonical_field;

    #[test]
    fn parse_and_restrict() {
        let k = canonical_field(3, 1).unwrap();
        let f = parse_plane_function("y/z", &k, &VARS).unwrap();
        let x = parse_linear_form("x", &k, &VARS).unwrap();
        let r = f.restrict(&x);
        // on V(x) the parameter is y/z
        assert_eq!(r, RatFunc::t(&k));
        let origin = ProjPoint::new(&k, [Fe(0), Fe(0), Fe(1)]).unwrap();
        assert_eq!(x.place_of(&k, &origin), Place::rational(&k, Fe(0)));
        assert_eq!(x.point_at(&k, &Place::rational(&k, Fe(0))), Some(origin));
        assert!(parse_plane_function("x/z + 1", &k, &VARS).is_err());
        assert!(parse_plane_function("x", &k, &VARS).is_err());
        let g = parse_plane_function("(x + 2y)^2/(z x)", &k, &VARS).unwrap();
        assert_eq!(g.degree(), 0);
    }

    #[test]
    fn affine_forms_homogenize() {
        let k = canonical_field(5, 1).unwrap();
        let f = parse_plane_function("(t - u)/t", &k, &["t", "u"]).unwrap();
        assert_eq!(f.degree(), 0);
        let g = parse_plane_function("t", &k, &["t", "u"]).unwrap();
        assert_eq!(g.valuation(&LinearForm([Fe(0), Fe(0), Fe(1)])), -1);
        let l = parse_linear_form("t - u + 1", &k, &["t", "u"]).unwrap();
        assert_eq!(l.0, [Fe(1), Fe(4), Fe(1)]);
    }

    #[test]
    fn parametrization_covers_line() {
        let k = canonical_field(5, 1).unwrap();
        for v in [[1, 2, 3], [0, 1, 4], [0, 0, 1], [1, 0, 0]] {
            let l = LinearForm::new(&k, v.map(Fe)).unwrap();
            let mut pts = std::collections::BTreeSet::new();
            let mut places = vec![Place::Infinity];
            places.extend((0..5).map(|a| Place::rational(&k, Fe(a))));
            for pl in places {
                let p = l.point_at(&k, &pl).unwrap();
                assert!(l.contains(&k, &p));
                assert_eq!(l.place_of(&k, &p), pl);
                pts.insert(p);
            }
            assert_eq!(pts.len(), 6);
        }
    }

    #[test]
    fn one_minus() {
        let k = canonical_field(5, 1).unwrap();
        let f = parse_plane_function("2x/z", &k, &VARS).unwrap();
        let g = f.one_minus().unwrap();
        assert_eq!(g, parse_plane_function("(z - 2x)/z", &k, &VARS).unwrap());
    }
}
