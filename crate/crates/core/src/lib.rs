pub mod design;
pub mod geom;
pub mod placement;
pub mod intersect;
pub mod joints;
pub mod output;
pub mod pipeline;
