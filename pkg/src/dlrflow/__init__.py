"""Dynamical low-rank kinetic solver for weakly compressible 2D flow."""

from .grids import SpatialGrid, VelocityGrid, fft_2d, gradient_x, ifft_2d
from .lowrank import (
    LowRankState,
    MomentFields,
    evaluate_f,
    init_equilibrium,
    moments,
    qr_orthonormalize,
    total_mass,
    total_momentum,
)
from .maccormack import (
    FluidState,
    ViscosityParams,
    cfl_dt,
    maccormack_step,
    viscosity_from_epsilon,
)
from .scenarios import (
    ScenarioConfig,
    init_shear_flow,
    init_sound_wave,
    read_snapshot,
    run,
    vorticity,
    write_snapshot,
)
from .splitting import (
    PhaseFailure,
    SplittingConfig,
    StepReport,
    collision_flow,
    k_step,
    l_step,
    s_step,
    step,
)

__all__ = [
    "SpatialGrid", "VelocityGrid", "fft_2d", "ifft_2d", "gradient_x",
    "LowRankState", "MomentFields", "qr_orthonormalize", "init_equilibrium",
    "moments", "total_mass", "total_momentum", "evaluate_f",
    "FluidState", "ViscosityParams", "viscosity_from_epsilon",
    "maccormack_step", "cfl_dt",
    "ScenarioConfig", "init_sound_wave", "init_shear_flow", "vorticity",
    "run", "read_snapshot", "write_snapshot",
    "SplittingConfig", "StepReport", "PhaseFailure", "step",
    "k_step", "s_step", "l_step", "collision_flow",
]
