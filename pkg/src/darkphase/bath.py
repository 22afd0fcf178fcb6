"""Broadband squeezed-vacuum reservoir: squeezing parameters, bath moments,
ladder and dressed operators, dark states, and phase-loop schedules.

The reservoir enters the atomic dynamics only through its second moments
N = sinh^2(r) and M = e^{i phi} sinh(r) cosh(r), and through the dressed jump
operator R = S cosh(r) + e^{i phi} S† sinh(r).  The pure state annihilated by
R,

    |psi_dark> = c|-1> - e^{i phi} s |1>,   c = cosh(r)/sqrt(cosh 2r),
                                            s = sinh(r)/sqrt(cosh 2r),

is decoherence free and plays the role of the ground state the dissipation
relaxes to.

Basis orders are fixed package-wide and every matrix uses them:

    3 levels: (|-1>, |0>, |1>)
    4 levels: (|-1>, |0>, |1>, |a>)            |a> is the decoupled reference
    5 levels: (|-1>, |0>, |1>, |-1'>, |1'>)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

# cosh(2r) loses accuracy long before it overflows; cap the amplitude.
R_MAX = 10.0


@dataclass(frozen=True)
class SqueezingParams:
    """Squeezing amplitude r, squeezing phase phi, bare decay rate gamma."""

    r: float
    phi: float
    gamma: float

    @property
    def c(self) -> float:
        return math.cosh(self.r) / math.sqrt(math.cosh(2.0 * self.r))

    @property
    def s(self) -> float:
        return math.sinh(self.r) / math.sqrt(math.cosh(2.0 * self.r))

    @property
    def gamma_tilde(self) -> float:
        """Effective dissipative gap gamma * cosh(2r) of the orthogonal state."""
        return self.gamma * math.cosh(2.0 * self.r)


@dataclass(frozen=True)
class BathMoments:
    """Second moments of the squeezed reservoir around the carrier."""

    n_thermal: float
    m_anomalous: complex


@dataclass(frozen=True)
class LoopSchedule:
    """Linear sweep of the squeezing phase, phi(t) = phi0 + phi_dot * t,
    closing after n_loops turns of 2*pi each."""

    phi0: float
    phi_dot: float
    n_loops: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.phi_dot) and self.phi_dot > 0):
            raise ArgumentError("phi_dot must be positive and finite")
        if self.n_loops < 1:
            raise ArgumentError("n_loops must be a positive integer")

    @property
    def duration(self) -> float:
        return self.n_loops * 2.0 * math.pi / self.phi_dot


def make_squeezing(r: float, phi: float, gamma: float) -> SqueezingParams:
    """Validated constructor for squeezing parameters."""
    if not (math.isfinite(r) and 0.0 <= r <= R_MAX):
        raise ArgumentError(f"squeezing amplitude must satisfy 0 <= r <= {R_MAX}, got {r}")
    if not math.isfinite(phi):
        raise ArgumentError("squeezing phase must be finite")
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise ArgumentError(f"decay rate must be positive, got {gamma}")
    return SqueezingParams(float(r), float(phi), float(gamma))


def bath_moments(p: SqueezingParams) -> BathMoments:
    """Thermal-like photon number N = sinh^2 r and anomalous moment
    M = e^{i phi} sinh r cosh r; a pure squeezed vacuum saturates
    |M|^2 = N(N+1)."""
    sh = math.sinh(p.r)
    ch = math.cosh(p.r)
    return BathMoments(sh * sh, complex(math.cos(p.phi), math.sin(p.phi)) * sh * ch)


def ladder_operator(level_count: int, channel: int = 1) -> np.ndarray:
    """Bare lowering operator of the chosen transition ladder.

    Three levels have the single ladder S = |-1><0| + |0><1|.  Five levels
    carry two ladders sharing |0>: channel 1 is the unprimed ladder, channel 2
    is S2 = |-1'><0| + |0><1'| acting on the primed pair.
    """
    if level_count == 3 and channel == 1:
        s = np.zeros((3, 3), dtype=complex)
        s[0, 1] = 1.0
        s[1, 2] = 1.0
        return s
    if level_count == 5 and channel == 1:
        s = np.zeros((5, 5), dtype=complex)
        s[0, 1] = 1.0
        s[1, 2] = 1.0
        return s
    if level_count == 5 and channel == 2:
        s = np.zeros((5, 5), dtype=complex)
        s[3, 1] = 1.0
        s[1, 4] = 1.0
        return s
    raise ArgumentError(
        f"unsupported ladder: level_count={level_count}, channel={channel}"
    )


def dressed_operator(p: SqueezingParams, s_op: np.ndarray) -> np.ndarray:
    """Jump operator dressed by the squeezed bath,
    R = S cosh(r) + e^{i phi} S† sinh(r)."""
    s_op = np.asarray(s_op, dtype=complex)
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return math.cosh(p.r) * s_op + phase * math.sinh(p.r) * s_op.conj().T


def dark_state(p: SqueezingParams) -> np.ndarray:
    """Normalized state annihilated by the dressed operator:
    c|-1> - e^{i phi} s|1>."""
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return np.array([p.c, 0.0, -phase * p.s], dtype=complex)


def orthogonal_state(p: SqueezingParams) -> np.ndarray:
    """State orthogonal to the dark state inside the coupled doublet:
    s|-1> + e^{i phi} c|1>; eigenstate of R†R with eigenvalue cosh(2r)."""
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return np.array([p.s, 0.0, phase * p.c], dtype=complex)


def dark_state_dphi(p: SqueezingParams) -> np.ndarray:
    """Derivative of the dark state with respect to the squeezing phase."""
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return np.array([0.0, 0.0, -1j * phase * p.s], dtype=complex)


def orthogonal_state_dphi(p: SqueezingParams) -> np.ndarray:
    """Derivative of the orthogonal state with respect to the squeezing phase."""
    phase = complex(math.cos(p.phi), math.sin(p.phi))
    return np.array([0.0, 0.0, 1j * phase * p.c], dtype=complex)


def phase_at(sched: LoopSchedule, t: float) -> float:
    """Squeezing phase at time t along the schedule (not reduced mod 2*pi)."""
    duration = sched.duration
    slack = 1e-9 * max(1.0, duration)
    if t < -slack or t > duration + slack:
        raise ArgumentError(f"t={t} outside schedule range [0, {duration}]")
    return sched.phi0 + sched.phi_dot * t
