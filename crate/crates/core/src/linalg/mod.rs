//! Dense kernels: eigentriples, group inverses, low-rank factorisations.

pub mod eig;
pub mod ginv;
pub mod lowrank;

pub use eig::{
    eig_pairs, eigenvalues, nearest_triple, nearest_triple_with, EigOptions, EigenTriple,
};
pub use ginv::{
    group_inverse, group_inverse_lowrank, pseudo_inverse, smw_solve, DenseInverse, GroupInverse,
    ShiftSolver, SpectralBasis, Woodbury,
};
pub use lowrank::{best_rank_k, BestRank, LowRank};
