//! Brownian loop soups in a disk and the CLE carpets they produce.

mod cle;
mod soup;

pub use cle::{
    carpet_from_clusters, cle_from_soup, cluster_loops, disk_grid, kappa_of, sample_cle, segments_intersect,
    CleConfig, CleSample, Cluster,
};
pub use soup::{
    brownian_bridge_loop, expected_root_count, sample_loop_soup, thin_soup, BridgeResolution, BrownianLoop, Disk,
    LoopSoup,
};
