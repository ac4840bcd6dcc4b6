//! Decision-theoretic selective game-tree search (MGSS2) with an alpha-beta
//! baseline and an Othello tournament harness.

pub mod alphabeta;
pub mod dist;
pub mod game;
pub mod harness;
pub mod scalar;
pub mod tree;
pub mod voc;

/// Scalar used by the Othello engines and the CLI.
pub type Value = f64;
pub type OrderStats64 = dist::OrderStats<Value>;
pub type NormalParams64 = dist::NormalParams<Value>;
pub type SearchTree64 = tree::SearchTree<Value>;
pub type VocParams64 = voc::VocParams<Value>;
