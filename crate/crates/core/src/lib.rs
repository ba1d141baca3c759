//! Structured hexahedral mesh generation from blended boundary surfaces,
//! multiblock assembly with conforming interfaces, and a finite volume
//! pressure solver on the resulting meshes.

pub mod fvsolve;
pub mod geometry;
pub mod math;
pub mod multiblock;
pub mod projectors;
pub mod scene;
pub mod surfaces;
pub mod tfi;
pub mod vtk;
