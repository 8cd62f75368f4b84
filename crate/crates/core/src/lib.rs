//! Multifocal stereoscopic projection-mapping simulator.
//!
//! The library covers the full pipeline of a focal-sweep projection-mapping
//! system: thin-lens placement math ([`optics`]), the tunable lens'
//! drive-to-power model ([`etl`]), projector/shutter/illumination scheduling
//! ([`sync`]), the two-pass slice rendering pipeline ([`render`]), and a
//! simulated swept-lens eye used as a verification oracle ([`retinal`]).

pub mod config;
pub mod etl;
pub mod fixtures;
pub mod img;
pub mod optics;
pub mod render;
pub mod retinal;
pub mod scene;
pub mod sync;

/// Which eye of the stereo pair an image, shutter, or event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub fn other(self) -> Eye {
        match self {
            Eye::Left => Eye::Right,
            Eye::Right => Eye::Left,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Eye::Left => "left",
            Eye::Right => "right",
        }
    }
}

impl std::fmt::Display for Eye {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
