"""Geometric-phase extraction and discrete Berry-connection integrals.

Two independent definitions are kept side by side and never silently
reconciled:

* the observable phase, arg of the ratio of a protected coherence after vs
  before the loop (what an interferometric measurement returns), and
* the discrete Berry connection integral of the transported ket family,
  computed as a gauge-invariant Pancharatnam product
  -arg prod_k <psi_k|psi_{k+1}>.

For the dark-state family c|-1> - e^{i phi} s|1> the connection integral
evaluates to -2*pi*s^2 while the coherence <a|rho|psi_dark> gains +2*pi*s^2;
the two always satisfy observed = -(connection integral of the ket family).
A spin-1/2 loop at fixed polar angle serves as the textbook reference.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import bath
from .errors import ArgumentError, NumericsError, ResolutionError

TWO_PI = 2.0 * math.pi

# Consecutive states in a discrete loop must overlap at least this much.
MIN_OVERLAP = 1e-8


def wrap_angle(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    return cmath.phase(complex(math.cos(x), math.sin(x)))


@dataclass(frozen=True)
class PhaseResult:
    """Measured geometric phase and visibility of a loop, with the reduced
    system's eigen-oracle predictions alongside for comparison.

    geometric_phase lies in (-pi, pi]; accumulated_phase is the unwrapped
    total over the run and agrees with it mod 2*pi.
    """

    geometric_phase: float
    visibility: float
    accumulated_phase: float
    prediction_phase: float = math.nan
    prediction_visibility: float = math.nan

    def __post_init__(self):
        if not self.visibility <= 1.0 + 1e-9:
            raise NumericsError(f"visibility {self.visibility} exceeds 1")
        if not -math.pi - 1e-12 < self.geometric_phase <= math.pi + 1e-12:
            raise NumericsError(
                f"geometric phase {self.geometric_phase} outside (-pi, pi]")
        mismatch = abs(wrap_angle(self.accumulated_phase - self.geometric_phase))
        if mismatch > 1e-9:
            raise NumericsError(
                f"accumulated phase disagrees with wrapped phase by {mismatch:.3e}")


@dataclass(frozen=True)
class SpinLoop:
    """Closed loop of spin-1/2 eigenstates at fixed polar angle theta, with
    the azimuth stepped through phi_samples equal segments of a full turn."""

    theta: float
    phi_samples: int

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ArgumentError("theta must lie in [0, pi]")
        if self.phi_samples < 3:
            raise ArgumentError("need at least 3 azimuth samples")

    def up_states(self) -> list[np.ndarray]:
        states = [spin_half_eigenstates(self.theta, TWO_PI * k / self.phi_samples)[0]
                  for k in range(self.phi_samples)]
        states.append(states[0].copy())
        return states

    def down_states(self) -> list[np.ndarray]:
        states = [spin_half_eigenstates(self.theta, TWO_PI * k / self.phi_samples)[1]
                  for k in range(self.phi_samples)]
        states.append(states[0].copy())
        return states


def spin_half_eigenstates(theta: float, phi: float):
    """Eigenstates of the spin projection along the (theta, phi) direction,
    returned as (up, down) in the z basis."""
    half = 0.5 * theta
    phase = complex(math.cos(phi), math.sin(phi))
    up = np.array([math.cos(half), phase * math.sin(half)], dtype=complex)
    down = np.array([math.sin(half), -phase * math.cos(half)], dtype=complex)
    return up, down


def discrete_berry_phase(states) -> float:
    """Pancharatnam phase of a closed ordered chain of states.

    Per-step arguments of the consecutive overlaps are summed, which keeps the
    result unwrapped and gauge invariant; a vanishing overlap means the chain
    is sampled too coarsely.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    if len(states) < 3:
        raise ArgumentError("need at least 3 states in the loop")
    if float(np.max(np.abs(states[0] - states[-1]))) > 1e-9:
        raise ArgumentError("loop is not closed: first and last states differ")
    total = 0.0
    for k in range(len(states) - 1):
        z = complex(np.vdot(states[k], states[k + 1]))
        if abs(z) < MIN_OVERLAP:
            raise ResolutionError(
                f"consecutive overlap {abs(z):.2e} below {MIN_OVERLAP:.0e} at segment {k}; "
                "increase the number of samples")
        total += cmath.phase(z)
    return -total


def dark_state_loop(r: float, samples: int, phi0: float = 0.0,
                    gamma: float = 1.0) -> list[np.ndarray]:
    """Closed chain of dark states as the squeezing phase sweeps one turn."""
    if samples < 3:
        raise ArgumentError("need at least 3 samples")
    states = [bath.dark_state(bath.make_squeezing(r, phi0 + TWO_PI * k / samples, gamma))
              for k in range(samples)]
    states.append(states[0].copy())
    return states


def analytic_dark_phase(r: float) -> float:
    """Closed-form geometric phase of one dark-state loop,
    2*pi*sinh^2(r)/cosh(2r) = pi*(1 - sech 2r), strictly inside [0, pi)."""
    if not (math.isfinite(r) and r >= 0.0):
        raise ArgumentError("squeezing amplitude must be non-negative")
    return math.pi * (1.0 - 1.0 / math.cosh(2.0 * r))


def extract_phase(v_initial: complex, v_final: complex) -> PhaseResult:
    """Phase and visibility of a coherence ratio after vs before a loop."""
    v_initial = complex(v_initial)
    v_final = complex(v_final)
    if v_initial == 0:
        raise ArgumentError("initial coherence must be nonzero")
    phase = cmath.phase(v_final / v_initial)
    visibility = abs(v_final) / abs(v_initial)
    return PhaseResult(geometric_phase=phase, visibility=visibility,
                       accumulated_phase=phase)


def unwrap_accumulated(series) -> float:
    """Total continuous argument change from the first to the last sample.

    Consecutive samples must stay within (-pi, pi) of each other in argument;
    a larger jump cannot be unwrapped unambiguously.
    """
    series = np.asarray(series, dtype=complex)
    if series.ndim != 1 or series.shape[0] < 2:
        raise ArgumentError("need a 1-D series of at least 2 samples")
    if np.any(series == 0):
        raise ResolutionError("series passes through zero; phase undefined")
    steps = np.angle(series[1:] / series[:-1])
    worst = float(np.max(np.abs(steps)))
    if worst > math.pi - 1e-6:
        raise ResolutionError(
            f"argument jump {worst:.6f} is too close to pi to unwrap; "
            "increase the sampling rate")
    return float(np.sum(steps))
