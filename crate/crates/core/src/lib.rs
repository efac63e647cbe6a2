//! Knowledge compilation for Boolean and relational circuits, with
//! query compilation, provenance and probabilistic evaluation on top.

pub mod circuit;
pub mod cnf;
pub mod cq;
pub mod provenance;
pub mod queries;
pub mod relational;
pub mod tree;
pub mod value;
