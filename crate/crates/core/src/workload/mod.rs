//! Job DAG model, synthesis, structural statistics and the job profile format.

mod dag;
mod profile;
mod structure;
mod synth;

pub use dag::{validate_dag, Edge, JobDag, PeId, TaskTemplate, Violation};
pub use profile::{adjacency_dump, parse_job_profile, parse_job_profile_for, write_job_profile, ProfileError};
pub use structure::{ccr, chain_ratio, edge_density, mean_degree, StructureError};
pub use synth::{synthesize_dag, DagGenParams, SynthError, SynthesizedDag};

pub(crate) use profile::{directives, expect_args, parse_nonneg, parse_num, syntax};

#[cfg(test)]
pub(crate) use dag::fixtures;
