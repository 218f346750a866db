pub mod faddeeva;
pub mod quadrature;
pub mod model;
pub mod vacuum;
pub mod thermal;
pub mod measures;
pub mod squeezed;
pub mod coherent;
pub mod cli;
