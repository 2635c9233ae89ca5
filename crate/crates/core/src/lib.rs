pub mod linalg;
pub mod mps;
pub mod oracles;
pub mod schemes;
pub mod sdw;
