//! Layered digraphs with bounded descent: generation from expansion systems,
//! the descent properties, ρ/σ structure, isomorphism and canonical forms up to
//! bounded depth, and finitely generated amalgamation.

pub mod amalgam;
pub mod audit;
pub mod canonical;
pub mod cli;
pub mod error;
pub mod format;
pub mod model;
pub mod properties;
pub mod selftest;
pub mod structure;

pub use amalgam::{
    apply_task, build_limit_approx, check_sub, check_subplus, clone_over, disjoint_witness, extend_task, free_amalgam,
    orbit_certificate, parse_schedule, separation_trace, Amalgam, Embedding, FgObject, Gamma, LimitApprox,
    OrbitCertificate, SeparationTrace, StepRecord, Task, TraceStep,
};
pub use canonical::{
    base_colour_bridge, canonical_form, compute_m, compute_n, decide_iso, extend_ball_iso, find_ball_iso, identity_ball,
    induced_group, iso_search, BallIso, Fingerprint, GroupOnBase, IsoConstraints, IsoDecision, IsoOutcome,
};
pub use error::{Error, Result};
pub use format::{parse_exs, parse_ldg, parse_ldgx, write_exs, write_ldg, write_ldgx};
pub use model::{
    ladder_system, tree_system, CellType, ChildSpec, ExpansionSystem, FrontierClass, Issue,
    LayeredDigraph, ValidationReport, VertexId,
};
pub use properties::{
    check_g0, check_g1, check_g2, check_p2, check_p2_prime, check_p3, compute_k, KOutcome, KReport,
    Status, Verdict, Witness,
};
pub use structure::{
    build_t, quotient, rho_partition, sigma_partition, t_gamma, Quotient, RhoClass, RhoPartition,
    SigmaPartition, TStructure,
};
