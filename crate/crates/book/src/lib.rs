//! The guide in `book/`, compiled as documentation so that `cargo test`
//! runs every snippet in it.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/structures.md")]
pub mod structures {}
#[doc = include_str!("../../../book/src/transfer-matrices.md")]
pub mod transfer_matrices {}
#[doc = include_str!("../../../book/src/localization.md")]
pub mod localization {}
#[doc = include_str!("../../../book/src/two-photon-amplitude.md")]
pub mod two_photon_amplitude {}
#[doc = include_str!("../../../book/src/entanglement.md")]
pub mod entanglement {}
#[doc = include_str!("../../../book/src/superposition.md")]
pub mod superposition {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
