//! Truncated path signatures and the reduced path group.
//!
//! The crate computes signatures (iterated-integral series) of piecewise
//! linear paths in the truncated tensor algebra, reduces paths to their
//! unique minimal representatives, certifies triviality of free-group words
//! through graded `GL(2,C)` developments, develops paths into the
//! hyperboloid model of hyperbolic space to recover length from signature
//! coefficient asymptotics, and builds the R-tree quotient of a height
//! function on an interval.
//!
//! Modules mirror the layers of the theory:
//!
//! * [`tensor`]: dense truncated tensor algebra over `R^d`, shuffle product,
//!   coordinate pairings.
//! * [`signature`]: piecewise linear paths and their exact signatures.
//! * [`hyperbolic`]: Cartan development into `SO(I_d)`, chord estimates and
//!   length recovery.
//! * [`words`]: free-group words, lattice paths, and the vanishing
//!   certificate for triviality.
//! * [`treelike`]: height functions, tree-like verification, and path
//!   reduction.
//! * [`rtree`]: the pseudo-metric of a height function and its quotient
//!   R-tree.

pub mod hyperbolic;
pub mod rtree;
pub mod signature;
pub mod tensor;
pub mod treelike;
pub mod words;

#[cfg(test)]
pub(crate) mod testutil;

pub use signature::PiecewiseLinearPath;
pub use tensor::TruncatedTensor;
pub use treelike::HeightFunction;
pub use words::Word;
