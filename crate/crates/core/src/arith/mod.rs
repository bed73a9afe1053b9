//! Exact arithmetic foundation: rationals extended by `inf`, the p-adic
//! valuation, dense polynomials over Q and over F_p, resultants, and
//! factorization over F_p.

pub mod fppoly;
pub mod qpoly;
pub mod rat;

pub use fppoly::{factor_mod_p, FpPoly};
pub use qpoly::{resultant, resultant_sylvester, root_valuation, QPoly};
pub use rat::{p_valuation, ExtRat, Rat};
