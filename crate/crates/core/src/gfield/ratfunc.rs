use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::field::{Fe, FiniteField};
use super::poly::Poly;

/// Element of `F_q(t)` as `num / den` with `den` monic and coprime to `num`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl PartialOrd for RatFunc {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatFunc {
    fn cmp(&self, other: &Self) -> Ordering {
        self.den
            .cmp(&other.den)
            .then_with(|| self.num.cmp(&other.num))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format("t"))
    }
}

impl RatFunc {
    /// Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc {
                den: Poly::one(num.field()),
                num,
            };
        }
        let g = num.gcd(&den);
        let (num, den) = (num.div_exact(&g), den.div_exact(&g));
        let lc = den.leading();
        let inv = num.field().inv(lc);
        RatFunc {
            num: num.scale(inv),
            den: den.scale(inv),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        let one = Poly::one(p.field());
        RatFunc { num: p, den: one }
    }

    pub fn constant(field: &Arc<FiniteField>, c: Fe) -> Self {
        RatFunc::from_poly(Poly::constant(field, c))
    }

    pub fn one(field: &Arc<FiniteField>) -> Self {
        RatFunc::constant(field, Fe::ONE)
    }

    /// `t`.
    pub fn t(field: &Arc<FiniteField>) -> Self {
        RatFunc::from_poly(Poly::x(field))
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        self.num.field()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Constant value, if the function is constant.
    pub fn as_constant(&self) -> Option<Fe> {
        (self.den.is_one() && self.num.deg() == 0).then(|| self.num.coeff(0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "division by zero rational function");
        RatFunc::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn inv(&self) -> Self {
        RatFunc::one(self.field()).div(self)
    }

    pub fn add(&self, o: &Self) -> Self {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: Fe) -> Self {
        RatFunc::new(self.num.scale(c), self.den.clone())
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        RatFunc {
            num: base.num.pow(k),
            den: base.den.pow(k),
        }
    }

    /// Leading coefficient of `num` over that of `den`.
    pub fn leading_ratio(&self) -> Fe {
        self.field().div(self.num.leading(), self.den.leading())
    }

    pub fn format(&self, var: &str) -> String {
        let wrap = |p: &Poly| {
            let s = p.format(var);
            if s.contains(' ') {
                format!("({s})")
            } else {
                s
            }
        };
        if self.den.is_one() {
            self.num.format(var)
        } else {
            format!("{}/{}", wrap(&self.num), wrap(&self.den))
        }
    }
}
