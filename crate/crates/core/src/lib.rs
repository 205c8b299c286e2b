//! Self-similar Antoine necklaces: construction and validation, linking
//! certificates, escape-time dynamics and export formats.

pub mod dynamics;
pub mod error;
pub mod geom3;
pub mod linking;
pub mod necklace;
pub mod report_io;

pub use error::{Error, Result};
pub use geom3::{Circle3, Rotation3, Similarity3, SolidTorus, Vec3};
pub use necklace::{Address, Necklace};
