//! API method recommendation for Python from optimistic data-flow and token
//! features ranked by a random forest.
pub mod candidates;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod dataflow;
pub mod features;
pub mod forest;
pub mod frontend;
pub mod recommender;
pub use error::{Error, Result, Stage};

/// Maps in parallel when the `parallel` feature is on, keeping order.
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
