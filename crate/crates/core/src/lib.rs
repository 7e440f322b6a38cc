//! Acyclicity testing, meta-decompositions, exhaustive join-tree enumeration,
//! plan widths, and cost-based selection of optimal width-1 query plans, with
//! brute-force oracles and a small executor to check the theory end to end.

pub mod caps;
pub mod enumerate;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod jointree;
pub mod meta;
pub mod optimizer;
pub mod oracle;
pub mod plan;
pub mod set;
pub mod workload;

pub use caps::Caps;
pub use error::{Error, Result};
pub use hypergraph::{AttrId, Hypergraph, RelId};
pub use jointree::JoinTree;
pub use meta::{build_meta, MetaDecomposition};
pub use plan::{CardinalityProvider, QueryPlan};
