pub mod congruence;
pub mod density;
pub mod envelope;
pub mod error;
pub mod factor;
pub mod forms;
pub mod group;
pub mod linalg;
pub mod modular;
pub mod params;
pub mod poly;
pub mod recognition;
pub(crate) mod serde_big;
pub mod sieves;
pub mod stabchain;
pub mod witness;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/surjectivity.md")]
    mod surjectivity {}
    #[doc = include_str!("../../../book/src/exceptional-primes.md")]
    mod exceptional_primes {}
    #[doc = include_str!("../../../book/src/transvections.md")]
    mod transvections {}
    #[doc = include_str!("../../../book/src/congruence.md")]
    mod congruence {}
    #[doc = include_str!("../../../book/src/witnesses.md")]
    mod witnesses {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
