use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_integer::Integer;

use crate::gfield::{Fe, FiniteField, Place, Poly, RatFunc};

use super::MilnorError;

/// A supported field: `F_q` or `F_q(t)`.
#[derive(Clone, PartialEq, Eq)]
pub enum FieldRef {
    Finite(Arc<FiniteField>),
    Function(Arc<FiniteField>),
}

impl Hash for FieldRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        self.base().order().hash(state);
    }
}

impl fmt::Debug for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldRef::Finite(k) => write!(f, "F{}", k.order()),
            FieldRef::Function(k) => write!(f, "F{}(t)", k.order()),
        }
    }
}

impl FieldRef {
    pub fn base(&self) -> &Arc<FiniteField> {
        match self {
            FieldRef::Finite(k) | FieldRef::Function(k) => k,
        }
    }

    pub fn is_function_field(&self) -> bool {
        matches!(self, FieldRef::Function(_))
    }
}

/// Coefficient ring of the K-groups: `Z` or `Z/l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Coefficients {
    #[default]
    Integral,
    ModL(u64),
}

impl Coefficients {
    /// Order of `K_n(F_Q) (x) coefficients` as a cyclic group, `0` for `Z`.
    pub fn modulus(self, field_order: u32, degree: u32) -> u64 {
        let units = field_order as u64 - 1;
        match (self, degree) {
            (Coefficients::Integral, 0) => 0,
            (Coefficients::ModL(l), 0) => l,
            (Coefficients::Integral, 1) => units,
            (Coefficients::ModL(l), 1) => l.gcd(&units),
            _ => 1,
        }
    }
}

pub(crate) fn reduce_value(v: i64, m: u64) -> i64 {
    if m == 0 {
        v
    } else {
        v.rem_euclid(m as i64)
    }
}

/// Element of `K_n^M(E) (x) coefficients` in normal form.
///
/// Over `F_q` the value is carried by `constant` (an integer in degree 0, a
/// discrete logarithm in degree 1, zero above). Over `F_q(t)`, `constant` is
/// the constant part and `residues[pi]` is the residue at `pi`, an element of
/// `K_{n-1}(kappa(pi))` encoded the same way.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MilnorElement {
    field: FieldRef,
    degree: u32,
    coeffs: Coefficients,
    constant: i64,
    residues: BTreeMap<Poly, i64>,
}

impl fmt::Debug for MilnorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MilnorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            FieldRef::Finite(k) => match self.degree {
                0 => write!(f, "{}", self.constant),
                1 => write!(f, "{}", k.format(k.exp(self.constant))),
                _ => write!(f, "0"),
            },
            FieldRef::Function(k) => {
                let mut parts = Vec::new();
                match self.degree {
                    0 => parts.push(self.constant.to_string()),
                    1 => parts.push(format!("const {}", k.format(k.exp(self.constant)))),
                    _ => {}
                }
                for (pi, v) in &self.residues {
                    parts.push(format!(
                        "({}): {}",
                        pi.format("t"),
                        self.residue_label(pi, *v)
                    ));
                }
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", parts.join("; "))
                }
            }
        }
    }
}

impl MilnorElement {
    pub fn zero(field: &FieldRef, degree: u32, coeffs: Coefficients) -> Self {
        MilnorElement {
            field: field.clone(),
            degree,
            coeffs,
            constant: 0,
            residues: BTreeMap::new(),
        }
    }

    /// `m` in `K_0`.
    pub fn integer(field: &FieldRef, m: i64, coeffs: Coefficients) -> Self {
        let mut x = MilnorElement::zero(field, 0, coeffs);
        x.constant = m;
        x.normalized()
    }

    /// Class of a unit of `F_q` in `K_1(F_q)`.
    pub fn unit(
        field: &Arc<FiniteField>,
        u: Fe,
        coeffs: Coefficients,
    ) -> Result<Self, MilnorError> {
        let dl = field.dlog(u).map_err(|_| MilnorError::ZeroEntry)?;
        Ok(MilnorElement::finite(field, 1, dl as i64, coeffs))
    }

    /// Element over `F_q` from its encoded value.
    pub fn finite(field: &Arc<FiniteField>, degree: u32, value: i64, coeffs: Coefficients) -> Self {
        let mut x = MilnorElement::zero(&FieldRef::Finite(Arc::clone(field)), degree, coeffs);
        x.constant = value;
        x.normalized()
    }

    /// Element over `F_q(t)` from constant part and residues.
    pub fn function(
        base: &Arc<FiniteField>,
        degree: u32,
        constant: i64,
        residues: BTreeMap<Poly, i64>,
        coeffs: Coefficients,
    ) -> Self {
        MilnorElement {
            field: FieldRef::Function(Arc::clone(base)),
            degree,
            coeffs,
            constant,
            residues,
        }
        .normalized()
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coeffs
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn residues(&self) -> &BTreeMap<Poly, i64> {
        &self.residues
    }

    /// Constant part as an element over `F_q`.
    pub fn constant_part(&self) -> MilnorElement {
        MilnorElement::finite(self.field.base(), self.degree, self.constant, self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.residues.is_empty()
    }

    fn constant_modulus(&self) -> u64 {
        self.coeffs.modulus(self.field.base().order(), self.degree)
    }

    pub(crate) fn residue_modulus(&self, pi: &Poly) -> u64 {
        if self.degree == 0 {
            return 1;
        }
        let order = (self.field.base().order() as u64).pow(pi.deg() as u32);
        let order = u32::try_from(order).unwrap_or(u32::MAX);
        self.coeffs.modulus(order, self.degree - 1)
    }

    fn normalized(mut self) -> Self {
        self.constant = reduce_value(self.constant, self.constant_modulus());
        if !self.field.is_function_field() {
            self.residues.clear();
            return self;
        }
        let moduli: Vec<u64> = self
            .residues
            .keys()
            .map(|pi| self.residue_modulus(pi))
            .collect();
        let mut out = BTreeMap::new();
        for ((pi, v), m) in std::mem::take(&mut self.residues).into_iter().zip(moduli) {
            let v = reduce_value(v, m);
            if v != 0 {
                out.insert(pi, v);
            }
        }
        self.residues = out;
        self
    }

    fn check_compatible(&self, o: &Self) -> Result<(), MilnorError> {
        if self.field != o.field || self.degree != o.degree || self.coeffs != o.coeffs {
            return Err(MilnorError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, MilnorError> {
        self.check_compatible(o)?;
        let mut out = self.clone();
        out.constant += o.constant;
        for (pi, v) in &o.residues {
            *out.residues.entry(pi.clone()).or_insert(0) += v;
        }
        Ok(out.normalized())
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.constant *= k;
        for v in out.residues.values_mut() {
            *v *= k;
        }
        out.normalized()
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, MilnorError> {
        self.add(&o.neg())
    }

    /// The same class with coefficients reduced further.
    pub fn with_coefficients(&self, coeffs: Coefficients) -> Self {
        let mut out = self.clone();
        out.coeffs = coeffs;
        out.normalized()
    }

    /// Residue at `pi` as an element over `kappa(pi)`.
    pub fn residue_at(&self, pi: &Poly) -> Result<MilnorElement, MilnorError> {
        let kappa = Place::Finite(pi.clone()).residue_field(self.field.base())?;
        let degree = self
            .degree
            .checked_sub(1)
            .ok_or(MilnorError::NegativeDegree)?;
        Ok(MilnorElement::finite(
            &kappa,
            degree,
            self.residues.get(pi).copied().unwrap_or(0),
            self.coeffs,
        ))
    }

    fn residue_label(&self, pi: &Poly, v: i64) -> String {
        if self.degree == 1 {
            return v.to_string();
        }
        match Place::Finite(pi.clone()).residue_field(self.field.base()) {
            Ok(k) => k.format(k.exp(v)),
            Err(_) => format!("g^{v}"),
        }
    }
}

/// A Milnor symbol `{a_1, ..., a_n}`; entries over `F_q` are constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub field: FieldRef,
    pub entries: Vec<RatFunc>,
}

impl Symbol {
    pub fn new(field: FieldRef, entries: Vec<RatFunc>) -> Result<Self, MilnorError> {
        for e in &entries {
            if e.is_zero() {
                return Err(MilnorError::ZeroEntry);
            }
            if e.field() != field.base() {
                return Err(MilnorError::FieldMismatch);
            }
            if !field.is_function_field() && e.as_constant().is_none() {
                return Err(MilnorError::FieldMismatch);
            }
        }
        Ok(Symbol { field, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
