//! Finitely generated abelian groups in canonical form and the homomorphisms
//! between them.
//!
//! Every group is stored as `Z/d_1 + ... + Z/d_k + Z^r` with `d_1 | ... | d_k`
//! and each `d_i >= 2`. Elements are coordinate vectors against those
//! generators (torsion first, then free), reduced modulo the orders.
//! Kernels, cokernels, images and subquotients are computed by lifting to a
//! free ambient lattice and reading off a Smith normal form.

mod lattice;
mod matrix;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lattice::Subquotient;
pub use matrix::{kernel_basis, smith_normal_form, solve, IntMatrix, Smith};

pub type Elem = Vec<BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbGroupError {
    #[error("relations are not contained in the subgroup generated by the given generators")]
    Containment,
    #[error("matrix does not define a homomorphism: {0}")]
    InvalidHom(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgAbGroup {
    torsion: Vec<BigInt>,
    rank: usize,
}

impl FgAbGroup {
    pub fn zero() -> Self {
        FgAbGroup {
            torsion: Vec::new(),
            rank: 0,
        }
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup {
            torsion: Vec::new(),
            rank,
        }
    }

    pub fn cyclic(order: impl Into<BigInt>) -> Self {
        Self::from_orders(&[order.into()])
    }

    /// Canonical form of `Z/o_1 + ... + Z/o_n`, where an order of `0` means a
    /// free summand.
    pub fn from_orders(orders: &[BigInt]) -> Self {
        Subquotient::presentation(orders).group().clone()
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_gens(&self) -> usize {
        self.torsion.len() + self.rank
    }

    pub fn is_trivial(&self) -> bool {
        self.num_gens() == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        if self.rank > 0 {
            None
        } else {
            Some(self.torsion.iter().fold(BigInt::one(), |a, b| a * b))
        }
    }

    /// Order of each generator, `0` for free generators.
    pub fn orders(&self) -> Vec<BigInt> {
        let mut o = self.torsion.clone();
        o.extend(std::iter::repeat_n(BigInt::zero(), self.rank));
        o
    }

    pub fn zero_elem(&self) -> Elem {
        vec![BigInt::zero(); self.num_gens()]
    }

    pub fn gen(&self, i: usize) -> Elem {
        let mut e = self.zero_elem();
        e[i] = BigInt::one();
        e
    }

    pub fn reduce(&self, x: &mut Elem) {
        assert_eq!(x.len(), self.num_gens(), "element has wrong length");
        for (xi, d) in x.iter_mut().zip(self.torsion.iter()) {
            *xi = xi.mod_floor(d);
        }
    }

    pub fn reduced(&self, mut x: Elem) -> Elem {
        self.reduce(&mut x);
        x
    }

    pub fn is_zero_elem(&self, x: &Elem) -> bool {
        self.reduced(x.clone()).iter().all(Zero::is_zero)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        self.reduced(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        self.reduced(a.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &Elem, k: &BigInt) -> Elem {
        self.reduced(a.iter().map(|x| x * k).collect())
    }

    /// Free ambient relations `order_i * e_i`.
    pub(crate) fn relation_vectors(&self) -> Vec<Vec<BigInt>> {
        let n = self.num_gens();
        self.torsion
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut v = vec![BigInt::zero(); n];
                v[i] = d.clone();
                v
            })
            .collect()
    }

    pub fn direct_sum(groups: &[FgAbGroup]) -> FgAbGroup {
        let orders: Vec<BigInt> = groups.iter().flat_map(|g| g.orders()).collect();
        Self::from_orders(&orders)
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FgAbGroup({self})")
    }
}

/// A homomorphism between canonical groups, stored as the matrix whose
/// column `j` is the image of source generator `j`.
#[derive(Clone, PartialEq, Eq)]
pub struct AbHom {
    source: FgAbGroup,
    target: FgAbGroup,
    matrix: IntMatrix,
}

impl AbHom {
    pub fn new(
        source: FgAbGroup,
        target: FgAbGroup,
        matrix: IntMatrix,
    ) -> Result<Self, AbGroupError> {
        if matrix.rows() != target.num_gens() || matrix.cols() != source.num_gens() {
            return Err(AbGroupError::Shape(format!(
                "expected {}x{}, got {}x{}",
                target.num_gens(),
                source.num_gens(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        let t_orders = target.orders();
        let mut m = matrix;
        for (j, a) in source.orders().iter().enumerate() {
            for (i, b) in t_orders.iter().enumerate() {
                let entry = m.get(i, j).clone();
                if a.is_positive() {
                    let ok = if b.is_zero() {
                        entry.is_zero()
                    } else {
                        (a * &entry).is_multiple_of(b)
                    };
                    if !ok {
                        return Err(AbGroupError::InvalidHom(format!(
                            "generator {j} of order {a} maps to {entry} in coordinate {i} of order {b}"
                        )));
                    }
                }
                if b.is_positive() {
                    m.set(i, j, entry.mod_floor(b));
                }
            }
        }
        Ok(AbHom {
            source,
            target,
            matrix: m,
        })
    }

    pub fn zero(source: FgAbGroup, target: FgAbGroup) -> Self {
        let m = IntMatrix::zeros(target.num_gens(), source.num_gens());
        AbHom {
            source,
            target,
            matrix: m,
        }
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        AbHom {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMatrix::identity(g.num_gens()),
        }
    }

    /// The homomorphism induced by an ambient-coordinate matrix between two
    /// presented groups.
    pub fn between(
        src: &Subquotient,
        tgt: &Subquotient,
        ambient: &IntMatrix,
    ) -> Result<Self, AbGroupError> {
        let g = src.group();
        let cols: Vec<Vec<BigInt>> = (0..g.num_gens())
            .map(|j| {
                let lifted = src.lift(&g.gen(j));
                let image = ambient.mul_vec(&lifted);
                tgt.coords(&image).ok_or(AbGroupError::Containment)
            })
            .collect::<Result<_, _>>()?;
        let m = IntMatrix::from_columns(tgt.group().num_gens(), &cols);
        AbHom::new(g.clone(), tgt.group().clone(), m)
    }

    pub fn source(&self) -> &FgAbGroup {
        &self.source
    }

    pub fn target(&self) -> &FgAbGroup {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        self.target.reduced(self.matrix.mul_vec(x))
    }

    pub fn is_zero(&self) -> bool {
        (0..self.source.num_gens()).all(|j| self.target.is_zero_elem(&self.matrix.column(j)))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &AbHom) -> Result<AbHom, AbGroupError> {
        if self.target != other.source {
            return Err(AbGroupError::Shape(
                "composition of non-matching homomorphisms".into(),
            ));
        }
        AbHom::new(
            self.source.clone(),
            other.target.clone(),
            other.matrix.mul(&self.matrix),
        )
    }

    /// Integer matrix `[M | diag(target torsion)]` used for equations in the target.
    fn augmented(&self) -> IntMatrix {
        let t = &self.target;
        let rel = IntMatrix::from_columns(t.num_gens(), &t.relation_vectors());
        self.matrix.hconcat(&rel)
    }

    /// Some `x` with `self(x) = y`, if `y` lies in the image.
    pub fn preimage(&self, y: &Elem) -> Option<Elem> {
        let sol = solve(&self.augmented(), y)?;
        Some(self.source.reduced(sol[..self.source.num_gens()].to_vec()))
    }

    /// Kernel with its inclusion into the source.
    pub fn kernel(&self) -> (FgAbGroup, AbHom) {
        let n = self.source.num_gens();
        let gens: Vec<Vec<BigInt>> = kernel_basis(&self.augmented())
            .into_iter()
            .map(|v| v[..n].to_vec())
            .collect();
        let sq = Subquotient::new(n, &gens, &self.source.relation_vectors())
            .expect("source relations lie in the kernel of a valid homomorphism");
        let inc = sq.inclusion_into(&self.source);
        (sq.group().clone(), inc)
    }

    /// Cokernel with its projection from the target.
    pub fn cokernel(&self) -> (FgAbGroup, AbHom) {
        let m = self.target.num_gens();
        let sub: Vec<Vec<BigInt>> = (0..m).map(|i| self.target.gen(i)).collect();
        let mut rel = self.target.relation_vectors();
        rel.extend(self.matrix.columns());
        let sq = Subquotient::new(m, &sub, &rel).expect("relations lie in the whole lattice");
        let proj = sq.projection_from(&self.target);
        (sq.group().clone(), proj)
    }

    /// Image with its inclusion into the target.
    pub fn image(&self) -> (FgAbGroup, AbHom) {
        let sq = self.image_subgroup();
        let inc = sq.inclusion_into(&self.target);
        (sq.group().clone(), inc)
    }

    /// The image as a subquotient of the target's ambient lattice.
    pub fn image_subgroup(&self) -> Subquotient {
        let rel = self.target.relation_vectors();
        let mut sub = self.matrix.columns();
        sub.extend(rel.iter().cloned());
        Subquotient::new(self.target.num_gens(), &sub, &rel)
            .expect("relations lie in image lattice")
    }

    /// The kernel as a subquotient of the source's ambient lattice.
    pub fn kernel_subgroup(&self) -> Subquotient {
        let n = self.source.num_gens();
        let gens: Vec<Vec<BigInt>> = kernel_basis(&self.augmented())
            .into_iter()
            .map(|v| v[..n].to_vec())
            .collect();
        Subquotient::new(n, &gens, &self.source.relation_vectors())
            .expect("source relations lie in the kernel")
    }
}

impl fmt::Debug for AbHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AbHom({} -> {}, {:?})",
            self.source, self.target, self.matrix
        )
    }
}

/// `<sub> / <rel>` inside `g`, both given as elements of `g`.
pub fn subquotient(g: &FgAbGroup, sub: &[Elem], rel: &[Elem]) -> Result<FgAbGroup, AbGroupError> {
    Ok(subquotient_of(g, sub, rel)?.group().clone())
}

pub fn subquotient_of(
    g: &FgAbGroup,
    sub: &[Elem],
    rel: &[Elem],
) -> Result<Subquotient, AbGroupError> {
    let n = g.num_gens();
    for v in sub.iter().chain(rel) {
        if v.len() != n {
            return Err(AbGroupError::Shape(
                "element length differs from generator count".into(),
            ));
        }
    }
    let ambient = g.relation_vectors();
    let mut s: Vec<Elem> = sub.to_vec();
    s.extend(ambient.iter().cloned());
    let mut r: Vec<Elem> = rel.to_vec();
    r.extend(ambient);
    Subquotient::new(n, &s, &r)
}

pub(crate) fn diagonal_relations(orders: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = orders.len();
    orders
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(i, d)| {
            let mut v = vec![BigInt::zero(); n];
            v[i] = d.clone();
            v
        })
        .collect()
}

/// `ker(d_out) / im(d_in)` at the term `Z^n / diag(orders)` of a complex of
/// presented groups (order 0 means a free summand). `d_in` is `n x m`,
/// `d_out` is `k x n` into `Z^k / diag(out_orders)`.
pub fn homology_at(
    orders: &[BigInt],
    d_in: &IntMatrix,
    d_out: &IntMatrix,
    out_orders: &[BigInt],
) -> Result<Subquotient, AbGroupError> {
    let n = orders.len();
    if d_in.rows() != n || d_out.cols() != n || d_out.rows() != out_orders.len() {
        return Err(AbGroupError::Shape("complex terms do not match".into()));
    }
    let out_rel = IntMatrix::from_columns(out_orders.len(), &diagonal_relations(out_orders));
    let kernel: Vec<Vec<BigInt>> = kernel_basis(&d_out.hconcat(&out_rel))
        .into_iter()
        .map(|v| v[..n].to_vec())
        .collect();
    let own = diagonal_relations(orders);
    let mut sub = kernel;
    sub.extend(own.iter().cloned());
    let mut rel = d_in.columns();
    rel.extend(own);
    Subquotient::new(n, &sub, &rel)
}

pub fn kernel(h: &AbHom) -> (FgAbGroup, AbHom) {
    h.kernel()
}

pub fn cokernel(h: &AbHom) -> (FgAbGroup, AbHom) {
    h.cokernel()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn hom(src: FgAbGroup, tgt: FgAbGroup, rows: &[Vec<i64>]) -> AbHom {
        AbHom::new(src, tgt, IntMatrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn homology_of_short_complex() {
        // Z --(2)--> Z --(0)--> Z/3: homology Z/2 in the middle
        let h = homology_at(
            &[b(0)],
            &IntMatrix::from_rows(&[vec![2]]),
            &IntMatrix::from_rows(&[vec![3]]),
            &[b(3)],
        )
        .unwrap();
        assert_eq!(h.group(), &FgAbGroup::cyclic(2));
        // Z/4 with no incoming map and d = 2 into Z/4: kernel {0, 2}
        let h = homology_at(
            &[b(4)],
            &IntMatrix::zeros(1, 0),
            &IntMatrix::from_rows(&[vec![2]]),
            &[b(4)],
        )
        .unwrap();
        assert_eq!(h.group(), &FgAbGroup::cyclic(2));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(FgAbGroup::from_orders(&[b(2), b(3)]), FgAbGroup::cyclic(6));
        assert_eq!(FgAbGroup::from_orders(&[b(1), b(0)]), FgAbGroup::free(1));
        assert_eq!(
            FgAbGroup::from_orders(&[b(4), b(6)]).torsion(),
            &[b(2), b(12)]
        );
        assert_eq!(FgAbGroup::cyclic(1), FgAbGroup::zero());
    }

    #[test]
    fn kernel_examples() {
        let h = hom(FgAbGroup::free(2), FgAbGroup::free(1), &[vec![2, 4]]);
        let (k, inc) = h.kernel();
        assert_eq!(k, FgAbGroup::free(1));
        let g = inc.apply(&k.gen(0));
        assert!(g == vec![b(2), b(-1)] || g == vec![b(-2), b(1)]);
        assert!(inc.then(&h).unwrap().is_zero());

        let z6 = FgAbGroup::cyclic(6);
        assert!(AbHom::identity(&z6).kernel().0.is_trivial());

        let zero = hom(FgAbGroup::free(1), FgAbGroup::free(1), &[vec![0]]);
        assert_eq!(zero.kernel().0, FgAbGroup::free(1));
    }

    #[test]
    fn cokernel_examples() {
        let h = hom(
            FgAbGroup::free(2),
            FgAbGroup::free(2),
            &[vec![2, 0], vec![0, 3]],
        );
        assert_eq!(h.cokernel().0, FgAbGroup::cyclic(6));
        let onto = hom(FgAbGroup::free(1), FgAbGroup::cyclic(5), &[vec![1]]);
        assert!(onto.cokernel().0.is_trivial());
        let zero = hom(FgAbGroup::free(1), FgAbGroup::free(1), &[vec![0]]);
        assert_eq!(zero.cokernel().0, FgAbGroup::free(1));
    }

    #[test]
    fn torsion_kernel() {
        // Z/4 -> Z/2, reduction: kernel Z/2
        let h = hom(FgAbGroup::cyclic(4), FgAbGroup::cyclic(2), &[vec![1]]);
        assert_eq!(h.kernel().0, FgAbGroup::cyclic(2));
        assert_eq!(h.image().0, FgAbGroup::cyclic(2));
        assert!(h.cokernel().0.is_trivial());
    }

    #[test]
    fn invalid_hom_rejected() {
        // Z/2 -> Z sending the generator to 1 is not a homomorphism
        let r = AbHom::new(
            FgAbGroup::cyclic(2),
            FgAbGroup::free(1),
            IntMatrix::from_rows(&[vec![1]]),
        );
        assert!(r.is_err());
        let r = AbHom::new(
            FgAbGroup::cyclic(4),
            FgAbGroup::cyclic(6),
            IntMatrix::from_rows(&[vec![3]]),
        );
        assert!(r.is_ok());
    }

    #[test]
    fn subquotient_examples() {
        let g = FgAbGroup::free(2);
        let sub = vec![vec![b(1), b(0)], vec![b(0), b(1)]];
        let q = subquotient(&g, &sub, &[vec![b(2), b(0)]]).unwrap();
        assert_eq!(q, FgAbGroup::from_orders(&[b(2), b(0)]));
        assert!(subquotient(&g, &sub, &sub).unwrap().is_trivial());
        assert_eq!(subquotient(&g, &sub, &[]).unwrap(), FgAbGroup::free(2));
        let err = subquotient(&g, &[vec![b(2), b(0)]], &[vec![b(1), b(0)]]);
        assert_eq!(err, Err(AbGroupError::Containment));
    }

    #[test]
    fn preimage_solves() {
        let h = hom(FgAbGroup::free(2), FgAbGroup::cyclic(6), &[vec![2, 3]]);
        let x = h.preimage(&vec![b(1)]).unwrap();
        assert_eq!(h.apply(&x), vec![b(1)]);
        let h2 = hom(FgAbGroup::free(1), FgAbGroup::cyclic(6), &[vec![2]]);
        assert!(h2.preimage(&vec![b(1)]).is_none());
    }
}
