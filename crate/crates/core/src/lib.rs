//! Numerical geodesic loops on affinely connected manifolds.
//!
//! The library integrates geodesics of an arbitrary chart connection
//! (torsion allowed), builds the Exp/Log maps and parallel transport on top
//! of them, exposes the odular operations — the geodesic loop
//! `L(x,a,y) = Exp_x tau^a_x Exp^-1_a y`, the scalar action `omega`, the
//! vector-space operation `Lambda` — reconstructs the connection back from
//! the loop, and solves and verifies the geodesic deviation (Jacobi)
//! equation against finite variation grids.
//!
//! Entry points:
//! - [`manifold::catalog`] — the built-in manifolds with closed-form oracles,
//! - [`geo`] — geodesics, Exp/Log, transport,
//! - [`loops`] — loop operations and connection reconstruction,
//! - [`jacobi`] — Jacobi fields and variation grids,
//! - [`verify`] — residual-report suites shared by the CLI and tests.

pub mod error;
pub mod geo;
pub mod jacobi;
pub mod linalg;
pub mod loops;
pub mod manifold;
pub mod report;
pub mod rk4;
pub mod sample;
pub mod verify;

pub use error::{GeoError, Result};
pub use geo::{exp_map, log_map, parallel_transport, GeoParams, GeodesicPath};
pub use jacobi::{jacobi_solve, natural_fields, JacobiField, VariationGrid};
pub use loops::{reconstruct_connection, LoopContext, OdularStructure};
pub use manifold::{catalog, CatalogEntry, Connection, Point, TangentVector, CATALOG_NAMES};
pub use report::{ReportEntry, ResidualReport};
pub use verify::{run_all, run_suite, SuiteConfig, SUITE_NAMES};
