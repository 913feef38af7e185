pub mod d1;
pub mod error;
pub mod rat;
pub mod series;
pub mod eplus;
pub mod verdict;
pub mod symbol;
pub mod zseries;
pub mod action;
pub mod growth;
pub mod sato;
pub mod dressing;
pub mod schur;
pub mod ba;
pub mod gallery;
