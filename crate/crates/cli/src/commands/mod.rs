pub mod ergodic;
pub mod flow;
pub mod limit;
pub mod model;
pub mod renorm;
pub mod surface;
