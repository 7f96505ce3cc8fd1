pub mod engine;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod platform;
pub mod profiles;
pub mod sched;
pub mod seeding;
pub mod workload;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/workloads.md")]
    pub mod workloads {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/schedulers.md")]
    pub mod schedulers {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/neural.md")]
    pub mod neural {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
