//! Binary BCH codes over GF(2^m) for m = 7, 8, 9.
//!
//! Three configurations are supported, addressed by name wherever an ECC is
//! selected:
//!
//! | name     | n   | k   | t  |
//! |----------|-----|-----|----|
//! | `bch127` | 127 | 64  | 10 |
//! | `bch255` | 255 | 123 | 19 |
//! | `bch511` | 511 | 241 | 30 |
//!
//! The (511, 241) narrow-sense code has designed distance 73 and could
//! correct 36 errors; the decoder is capped at 30 so that the code operates at
//! the advertised threshold.

mod bch;
mod gf;

pub use bch::{BchCode, Codeword, DecodeFailure, EccName};
pub use gf::GaloisField;
