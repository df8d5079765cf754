use thiserror::Error;

use crate::constraints::ConstraintError;
use crate::control::ControlError;
use crate::engine::EngineError;
use crate::polytope::GeometryError;
use crate::pu_link::PuLinkError;
use crate::scenario::ConfigError;
use crate::sensing::SensingError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    PuLink(#[from] PuLinkError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
