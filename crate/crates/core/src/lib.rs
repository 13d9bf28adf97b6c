//! Exact computations for the small quasi-quantum group Ũ_q at odd n > 2:
//! the algebra, its modules and tensor products, Hom spaces and syzygies,
//! and the Green ring as a normal-form ring.

pub mod cyclo;
pub mod greenring;
pub mod homalg;
pub mod hmodel;
pub mod linalg;
pub mod repcore;
pub mod verify;
