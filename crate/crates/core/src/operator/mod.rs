//! Discretization: quadrature grids, sampled potentials and dense operators.

mod assemble;
mod grid;
mod potential;
mod symmetry;

pub use assemble::{
    assemble_kernel, assemble_m, assemble_m0, assemble_m_jump, assemble_p, assemble_t,
    assemble_vgv, assemble_vkv, lambda_limit, m_expansion, m_expansion_remainder, m_expansion_remainder_with,
    m_expansion_with, to_nodal,
    FnKernel, G0Kernel, G1Kernel, G2Kernel, G3Kernel, JumpKernel, RadialKernel,
    RegularResolventKernel, ResolventKernel, UnitKernel, VgvSet,
};
pub use grid::{build_grid, dist, equal_volume_radius, gauss_legendre, QuadratureGrid, MAX_GRID_NODES};
pub use potential::{Potential, Shape};
pub use symmetry::{commuting_axes, sector_basis, Parity};
