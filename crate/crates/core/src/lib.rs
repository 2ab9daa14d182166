pub mod base;
pub mod error;
pub mod series;
pub mod linalg;
pub mod layer;
pub mod local;
pub mod koszul;
pub mod milnor;
pub mod newton;
pub mod gf;
pub mod compactify;
pub mod determinacy;
