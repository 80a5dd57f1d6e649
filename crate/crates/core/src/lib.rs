//! Desk-scale microwave imaging toolkit: synthesises Born-approximated
//! scattering parameters for small anomalies in a lossy disk, reconstructs
//! anomaly locations with a direct sampling indicator (single- and
//! multi-transmitter), and cross-checks the indicator against its
//! Bessel-series structure.

pub mod error;
pub mod forward;
pub mod geom;
pub mod imaging;
pub mod oracle;
pub mod scene;
pub mod specfun;

pub use error::{Error, Result};
pub use geom::Point;
