//! Libraries of behaviorally distinct programs and the state pools that
//! define behavior.

pub mod pool;
pub mod store;

pub use pool::{harvest_pool, PoolFileError, StatePool, DEFAULT_POOL_CAP};
pub use store::{
    build_library, InsertOutcome, Library, LibraryEntry, LibraryError, LibraryFileError, CLASSES,
};
