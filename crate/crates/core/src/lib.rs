//! Contravariant and covariant topos models of quantum theory over `M_n(ℂ)`.

pub mod contexts;
pub mod daseinise;
pub mod dynamics;
pub mod io;
pub mod linalg;
pub mod logic;
pub mod sample;
pub mod states;
pub mod suite;
pub mod tol;
pub mod valuemaps;
