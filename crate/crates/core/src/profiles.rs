//! Bundled profiles.
//!
//! The synthetic job has 10 tasks on 4 levels with a mean computation cost of
//! 13.3 and a mean edge weight of about 16; the matching platform has 4 PEs
//! joined by unit bandwidth, so its CCR is close to 1.

use crate::platform::{parse_resource_profile, Platform};
use crate::workload::{parse_job_profile_for, JobDag};

pub const SYNTHETIC_JOB: &str = include_str!("../profiles/synthetic_job.txt");
pub const SYNTHETIC_RESOURCE: &str = include_str!("../profiles/synthetic_resource.txt");

pub fn synthetic_platform() -> Platform {
    parse_resource_profile(SYNTHETIC_RESOURCE).expect("bundled resource profile is valid")
}

pub fn synthetic_job() -> JobDag {
    parse_job_profile_for(SYNTHETIC_JOB, &synthetic_platform()).expect("bundled job profile is valid")
}
