//! Finite fields, polynomials over them and places of `F_q(t)`.

mod field;
mod place;
mod poly;
mod ratfunc;

pub use field::{
    canonical_field, field_of_order, is_prime, norm_element, Embedding, Fe, FieldError,
    FiniteField, MAX_FIELD_SIZE,
};
pub use place::{irreducibles_of_degree, places_up_to, Place, PlaceData};
pub use poly::Poly;
pub use ratfunc::RatFunc;

use std::sync::Arc;

/// Discrete logarithm to the canonical generator.
pub fn dlog(field: &FiniteField, x: Fe) -> Result<u64, FieldError> {
    field.dlog(x)
}

/// `N_{large/small}(x)`.
pub fn norm_map(
    small: &Arc<FiniteField>,
    large: &Arc<FiniteField>,
    x: Fe,
) -> Result<Fe, FieldError> {
    norm_element(&Embedding::new(small, large)?, x)
}

/// Monic irreducible factorization of a nonzero polynomial.
pub fn factor(f: &Poly) -> Result<(Fe, Vec<(Poly, u32)>), FieldError> {
    f.factor()
}
