pub mod derham;
pub mod error;
pub mod groebner;
pub mod h2fast;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod resolution;
pub mod saito;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
pub use poly::{Mono, Poly, Rat, Vars};
