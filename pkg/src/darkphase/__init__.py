"""Geometric phases generated by cyclically modulated dissipation.

A multilevel atom in a broadband squeezed vacuum relaxes onto a pure dark
state fixed by the squeezing parameters.  Sweeping the squeezing phase slowly
around a closed loop drags the dark state along and leaves a purely geometric
phase 2*pi*sinh^2(r)/cosh(2r) on coherences protected from the noise, with no
Hamiltonian term anywhere in the dynamics.  The package integrates the full
time-dependent master equation, the exactly closed reduced coherence systems
that serve as independent oracles, and the discrete Berry-connection integrals
of the transported state families, and cross-validates all three.
"""

from . import bath, cli, fivelevel, fourlevel, geomphase, lindblad, qcore
from .bath import (BathMoments, LoopSchedule, SqueezingParams, bath_moments,
                   dark_state, dressed_operator, ladder_operator, make_squeezing,
                   orthogonal_state, phase_at)
from .errors import ArgumentError, NumericsError, ResolutionError
from .geomphase import (PhaseResult, SpinLoop, analytic_dark_phase, dark_state_loop,
                        discrete_berry_phase, extract_phase, spin_half_eigenstates,
                        unwrap_accumulated)
from .lindblad import (Channel, LindbladGenerator, SqueezedChannel, SteadyStateReport,
                       Trajectory, dissipator_apply, evolve_me, fidelity_pure,
                       steady_state_report)

__version__ = "0.1.0"
