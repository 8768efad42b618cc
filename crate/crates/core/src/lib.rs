pub mod catalan;
pub mod chem;
pub mod derivation_graph;
pub mod dpo;
pub mod dsl;
pub mod format;
pub mod graph;
pub mod lexer;
pub mod matcher;
pub mod repository;
pub mod rule;
pub mod strategy;
