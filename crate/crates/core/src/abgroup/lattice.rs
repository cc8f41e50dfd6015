use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::matrix::{smith_normal_form, IntMatrix, Smith};
use super::{AbGroupError, AbHom, Elem, FgAbGroup};

/// `<S> / <R>` for lattices `R ⊆ <S> ⊆ Z^n`, together with the coordinate
/// change to the canonical form of the quotient.
#[derive(Clone, Debug)]
pub struct Subquotient {
    ambient_dim: usize,
    /// Columns form a basis of `<S>`.
    basis: IntMatrix,
    /// SNF of the spanning matrix of `<S>`; used to read basis coordinates.
    span_smith: Smith,
    /// Unimodular change from basis coordinates to relation-SNF coordinates.
    rel_u: IntMatrix,
    rel_u_inv: IntMatrix,
    /// Relation-SNF coordinates that survive (order != 1), with their orders.
    kept: Vec<(usize, BigInt)>,
    group: FgAbGroup,
}

impl Subquotient {
    pub fn new(
        ambient_dim: usize,
        sub: &[Vec<BigInt>],
        rel: &[Vec<BigInt>],
    ) -> Result<Self, AbGroupError> {
        let spanning = IntMatrix::from_columns(ambient_dim, sub);
        let span_smith = smith_normal_form(&spanning);
        let k = span_smith.rank;
        let basis_cols: Vec<Vec<BigInt>> = (0..k)
            .map(|i| {
                let d = span_smith.d.get(i, i);
                span_smith.u_inv.column(i).iter().map(|x| x * d).collect()
            })
            .collect();
        let basis = IntMatrix::from_columns(ambient_dim, &basis_cols);

        let mut rel_cols = Vec::with_capacity(rel.len());
        for r in rel {
            rel_cols.push(basis_coords(&span_smith, r).ok_or(AbGroupError::Containment)?);
        }
        let rel_matrix = IntMatrix::from_columns(k, &rel_cols);
        let rs = smith_normal_form(&rel_matrix);
        let mut kept = Vec::new();
        let mut orders = Vec::new();
        for i in 0..k {
            let d = if i < rs.rank {
                rs.d.get(i, i).clone()
            } else {
                BigInt::zero()
            };
            if !d.is_one() {
                kept.push((i, d.clone()));
                orders.push(d);
            }
        }
        let torsion: Vec<BigInt> = orders.iter().filter(|d| !d.is_zero()).cloned().collect();
        let rank = orders.len() - torsion.len();
        Ok(Subquotient {
            ambient_dim,
            basis,
            span_smith,
            rel_u: rs.u,
            rel_u_inv: rs.u_inv,
            kept,
            group: FgAbGroup { torsion, rank },
        })
    }

    /// `Z^n / diag(orders)` presented on the standard basis.
    pub fn presentation(orders: &[BigInt]) -> Self {
        let n = orders.len();
        let sub: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut v = vec![BigInt::zero(); n];
                v[i] = BigInt::one();
                v
            })
            .collect();
        let rel: Vec<Vec<BigInt>> = orders
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_zero())
            .map(|(i, d)| {
                let mut v = vec![BigInt::zero(); n];
                v[i] = d.clone();
                v
            })
            .collect();
        Subquotient::new(n, &sub, &rel).expect("diagonal relations lie in Z^n")
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Canonical coordinates of an ambient vector, or `None` outside `<S>`.
    pub fn coords(&self, y: &[BigInt]) -> Option<Elem> {
        let c = basis_coords(&self.span_smith, y)?;
        let z = self.rel_u.mul_vec(&c);
        Some(
            self.kept
                .iter()
                .map(|(i, d)| {
                    if d.is_zero() {
                        z[*i].clone()
                    } else {
                        z[*i].mod_floor(d)
                    }
                })
                .collect(),
        )
    }

    pub fn contains(&self, y: &[BigInt]) -> bool {
        basis_coords(&self.span_smith, y).is_some()
    }

    /// An ambient representative of a canonical element.
    pub fn lift(&self, x: &Elem) -> Vec<BigInt> {
        let k = self.basis.cols();
        let mut z = vec![BigInt::zero(); k];
        for ((i, _), xi) in self.kept.iter().zip(x) {
            z[*i] = xi.clone();
        }
        let c = self.rel_u_inv.mul_vec(&z);
        self.basis.mul_vec(&c)
    }

    /// Ambient representatives of the canonical generators.
    pub fn generators(&self) -> Vec<Vec<BigInt>> {
        (0..self.group.num_gens())
            .map(|i| self.lift(&self.group.gen(i)))
            .collect()
    }

    /// When the ambient lattice is the lift of `g`, the map sending each
    /// canonical generator to its ambient representative.
    pub(crate) fn inclusion_into(&self, g: &FgAbGroup) -> AbHom {
        let cols = self.generators();
        let m = IntMatrix::from_columns(g.num_gens(), &cols);
        AbHom::new(self.group.clone(), g.clone(), m).expect("subgroup inclusion is a homomorphism")
    }

    /// When `<S>` is the whole lift of `g`, the quotient map `g -> self`.
    pub(crate) fn projection_from(&self, g: &FgAbGroup) -> AbHom {
        let cols: Vec<Vec<BigInt>> = (0..g.num_gens())
            .map(|j| {
                self.coords(&g.gen(j))
                    .expect("generator lies in the full lattice")
            })
            .collect();
        let m = IntMatrix::from_columns(self.group.num_gens(), &cols);
        AbHom::new(g.clone(), self.group.clone(), m).expect("quotient map is a homomorphism")
    }
}

fn basis_coords(s: &Smith, y: &[BigInt]) -> Option<Vec<BigInt>> {
    let uy = s.u.mul_vec(y);
    let mut c = Vec::with_capacity(s.rank);
    for (i, v) in uy.iter().enumerate() {
        if i < s.rank {
            // basis column i is d_i * u_inv[:, i]
            let (q, r) = v.div_rem(s.d.get(i, i));
            if !r.is_zero() {
                return None;
            }
            c.push(q);
        } else if !v.is_zero() {
            return None;
        }
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn lift_and_coords_roundtrip() {
        let sq = Subquotient::new(
            3,
            &[v(&[2, 0, 0]), v(&[0, 3, 3]), v(&[1, 1, 1])],
            &[v(&[4, 0, 0])],
        )
        .unwrap();
        for i in 0..sq.group().num_gens() {
            let g = sq.group().gen(i);
            assert_eq!(sq.coords(&sq.lift(&g)).unwrap(), sq.group().reduced(g));
        }
        assert!(sq.coords(&v(&[0, 1, 0])).is_none());
    }
}
