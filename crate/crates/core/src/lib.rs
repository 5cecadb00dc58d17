//! Compact routing in unit disk graphs.
//!
//! Preprocessing builds a hierarchical decomposition of the Euclidean minimum
//! spanning tree, a well-separated pair decomposition over it, and per-site
//! tables; the routing function then forwards packets using only the table of
//! the current site, the target label and a small header.

pub mod direct;
pub mod emst;
pub mod error;
pub mod geom;
pub mod heap;
pub mod hierarchy;
pub mod instance;
pub mod middle;
pub mod net;
pub mod router;
pub mod scheme;
pub mod strategy;
pub mod wspd;

pub use error::{GeomError, InstanceError, RouteError, SchemeError, WspdError};
pub use geom::{build_udg, DistanceMatrix, Point, Site, UnitDiskGraph};
pub use hierarchy::{Hierarchy, Interval, Label};
pub use router::{route, Header, RouteTrace};
pub use scheme::{build_scheme, BuildParams, BuiltScheme, RoutingScheme};
pub use strategy::{build_auto, AutoPolicy, Envelope, Registry, Router, SchemeSummary};
