"""Lindblad dissipator and master-equation evolution for squeezed-bath channels.

The master equation is integrated in the interaction picture exactly as it
stands: there is no Hamiltonian commutator, the generator is the pure
dissipator

    drho/dt = -sum_i (gamma_i/2) { Ri†Ri rho + rho Ri†Ri - 2 Ri rho Ri† },

with jump operators Ri(t) = Si cosh(ri) + e^{i phi_i(t)} Si† sinh(ri) rebuilt
from the instantaneous squeezing phase at every integrator stage.  The
right-hand side acts on the density matrix directly through matrix products
(no vectorized superoperator); at dimensions 3-5 this is simple and fast.
The inner stepping loop is JIT-compiled, single-threaded and deterministic.

Physicality (trace, hermiticity, positivity) is checked at sampling points,
not at every stage, and a drift beyond tolerance aborts the run naming the
offending time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import bath
from .errors import ArgumentError, NumericsError
from .qcore import density_matrix_violation

# Mid-run physicality abort thresholds (looser than the reporting tolerances).
TRACE_DRIFT_LIMIT = 1e-6
EIGENVALUE_ABORT_FLOOR = -1e-6

DEFAULT_SAMPLE_CAP = 10_000


@dataclass(frozen=True)
class Channel:
    """One dissipation channel: rate and jump operator, frozen at an instant."""

    rate: float
    jump: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ArgumentError(f"channel rate must be positive and finite, got {self.rate}")


@dataclass(frozen=True)
class SqueezedChannel:
    """A squeezed-bath channel whose only time dependence is the linearly
    swept squeezing phase phi(t) = phi0 + phi_dot * t.

    The bare ladder operator must have real entries so its adjoint is its
    transpose (true for every ladder in this package).
    """

    gamma: float
    r: float
    phi0: float
    phi_dot: float
    ladder: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ArgumentError("gamma must be positive and finite")
        if not (0.0 <= self.r <= bath.R_MAX):
            raise ArgumentError(f"squeezing amplitude must satisfy 0 <= r <= {bath.R_MAX}")
        lad = np.asarray(self.ladder, dtype=complex)
        if lad.ndim != 2 or lad.shape[0] != lad.shape[1]:
            raise ArgumentError("ladder must be a square matrix")
        if np.max(np.abs(lad.imag)) > 0.0:
            raise ArgumentError("ladder must have real entries")
        object.__setattr__(self, "ladder", lad)

    def phase_at(self, t: float) -> float:
        return self.phi0 + self.phi_dot * t

    def jump_at(self, t: float) -> np.ndarray:
        p = bath.SqueezingParams(self.r, self.phase_at(t), self.gamma)
        return bath.dressed_operator(p, self.ladder)


@dataclass(frozen=True)
class LindbladGenerator:
    """Time-indexed family of dissipation channels on a fixed Hilbert space."""

    dim: int
    channels: tuple[SqueezedChannel, ...]

    def __post_init__(self):
        for ch in self.channels:
            if ch.ladder.shape[0] != self.dim:
                raise ArgumentError(
                    f"channel ladder dimension {ch.ladder.shape[0]} != generator dimension {self.dim}"
                )

    def channels_at(self, t: float) -> list[Channel]:
        return [Channel(ch.gamma, ch.jump_at(t)) for ch in self.channels]


@dataclass(frozen=True)
class Trajectory:
    """Sampled master-equation run: states, named coherences, and the worst
    physicality residuals seen at the sampling points."""

    times: np.ndarray
    states: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    max_trace_drift: float = 0.0
    max_hermiticity_residual: float = 0.0
    min_eigenvalue: float = 0.0


def dissipator_apply(rho: np.ndarray, channels) -> np.ndarray:
    """Apply the Lindblad dissipator for the given channels to rho.

    The result is traceless and Hermitian (up to roundoff) for any Hermitian
    input; the dark-state projector is annihilated exactly.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ArgumentError(f"rho must be square, got shape {rho.shape}")
    out = np.zeros_like(rho)
    for ch in channels:
        jump = np.asarray(ch.jump, dtype=complex)
        if jump.shape != rho.shape:
            raise ArgumentError(
                f"jump operator shape {jump.shape} does not match rho shape {rho.shape}"
            )
        jd = jump.conj().T
        jdj = jd @ jump
        out -= (0.5 * ch.rate) * (jdj @ rho + rho @ jdj - 2.0 * (jump @ rho @ jd))
    return out


@njit(cache=True)
def _mm(a, b, out):  # pragma: no cover - exercised through evolve_me
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(n):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


@njit(cache=True)
def _me_rhs(t, rho, ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots,
            rop, rdg, rr, w1, w2, out):  # pragma: no cover
    n = rho.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0.0 + 0.0j
    for ch in range(gammas.shape[0]):
        phi = phi0s[ch] + phi_dots[ch] * t
        z = complex(np.cos(phi), np.sin(phi))
        zc = np.conj(z)
        # Ladder entries are real: the adjoint is the transpose.
        for i in range(n):
            for j in range(n):
                rop[i, j] = cosh_r[ch] * ladders[ch, i, j] + z * sinh_r[ch] * ladders[ch, j, i]
                rdg[i, j] = cosh_r[ch] * ladders[ch, j, i] + zc * sinh_r[ch] * ladders[ch, i, j]
        _mm(rdg, rop, rr)
        _mm(rr, rho, w1)
        _mm(rho, rr, w2)
        half = 0.5 * gammas[ch]
        for i in range(n):
            for j in range(n):
                out[i, j] = out[i, j] - half * (w1[i, j] + w2[i, j])
        _mm(rop, rho, w1)
        _mm(w1, rdg, w2)
        g = gammas[ch]
        for i in range(n):
            for j in range(n):
                out[i, j] = out[i, j] + g * w2[i, j]


@njit(cache=True)
def _advance(rho, t_start, h, n_steps, ladders, gammas, cosh_r, sinh_r,
             phi0s, phi_dots, k1, k2, k3, k4, yt,
             rop, rdg, rr, w1, w2):  # pragma: no cover
    n = rho.shape[0]
    for m in range(n_steps):
        t = t_start + m * h
        _me_rhs(t, rho, ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots,
                rop, rdg, rr, w1, w2, k1)
        for i in range(n):
            for j in range(n):
                yt[i, j] = rho[i, j] + 0.5 * h * k1[i, j]
        _me_rhs(t + 0.5 * h, yt, ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots,
                rop, rdg, rr, w1, w2, k2)
        for i in range(n):
            for j in range(n):
                yt[i, j] = rho[i, j] + 0.5 * h * k2[i, j]
        _me_rhs(t + 0.5 * h, yt, ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots,
                rop, rdg, rr, w1, w2, k3)
        for i in range(n):
            for j in range(n):
                yt[i, j] = rho[i, j] + h * k3[i, j]
        _me_rhs(t + h, yt, ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots,
                rop, rdg, rr, w1, w2, k4)
        sixth = h / 6.0
        for i in range(n):
            for j in range(n):
                rho[i, j] = rho[i, j] + sixth * (
                    k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                )


def _kernel_arrays(gen: LindbladGenerator):
    nc = len(gen.channels)
    d = gen.dim
    ladders = np.zeros((nc, d, d), dtype=complex)
    gammas = np.zeros(nc)
    cosh_r = np.zeros(nc)
    sinh_r = np.zeros(nc)
    phi0s = np.zeros(nc)
    phi_dots = np.zeros(nc)
    for k, ch in enumerate(gen.channels):
        ladders[k] = ch.ladder
        gammas[k] = ch.gamma
        cosh_r[k] = math.cosh(ch.r)
        sinh_r[k] = math.sinh(ch.r)
        phi0s[k] = ch.phi0
        phi_dots[k] = ch.phi_dot
    return ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots


def evolve_me(gen: LindbladGenerator, rho0: np.ndarray, t0: float, t1: float,
              step: float, tracked=(), sample_cap: int = DEFAULT_SAMPLE_CAP,
              check_stride: int = 1) -> Trajectory:
    """Integrate the master equation with fixed-step RK4.

    tracked is a sequence of (name, bra_fn, ket_fn) entries; bra_fn(t) and
    ket_fn(t) return state vectors, so a coherence can follow the
    instantaneous dark or orthogonal state.  <bra(t)|rho(t)|ket(t)> is
    recorded at every sampling point.  The sampling stride is chosen so at
    most sample_cap points are kept regardless of the step count; the final
    RK4 step is shortened to land exactly on t1.
    """
    if step <= 0:
        raise ArgumentError("step must be positive")
    if not t1 > t0:
        raise ArgumentError("t1 must exceed t0")
    if check_stride < 1:
        raise ArgumentError("check_stride must be >= 1")
    rho = np.ascontiguousarray(np.asarray(rho0, dtype=complex)).copy()
    if rho.shape != (gen.dim, gen.dim):
        raise ArgumentError(f"rho0 shape {rho.shape} does not match dimension {gen.dim}")
    problem = density_matrix_violation(rho)
    if problem is not None:
        raise ArgumentError(f"invalid initial state: {problem}")

    span = t1 - t0
    n_full = int(math.floor(span / step + 1e-12))
    rem = span - n_full * step
    if rem <= step * 1e-12:
        rem = 0.0
    n_total = n_full + (1 if rem > 0.0 else 0)
    stride = max(1, -(-n_total // max(1, sample_cap)))

    ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots = _kernel_arrays(gen)
    d = gen.dim
    bufs = [np.zeros((d, d), dtype=complex) for _ in range(10)]

    names = [name for name, _, _ in tracked]
    if len(set(names)) != len(names):
        raise ArgumentError("tracked observable names must be unique")
    times = []
    states = []
    series = {name: [] for name in names}
    stats = {"trace": 0.0, "herm": 0.0, "eig": np.inf}

    sample_index = 0

    def record(t):
        nonlocal sample_index
        if not np.isfinite(rho).all():
            raise NumericsError(f"non-finite density matrix at t={t!r}", time=t)
        if sample_index % check_stride == 0:
            tr_drift = abs(rho.trace() - 1.0)
            herm = float(np.max(np.abs(rho - rho.conj().T)))
            w_min = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
            stats["trace"] = max(stats["trace"], tr_drift)
            stats["herm"] = max(stats["herm"], herm)
            stats["eig"] = min(stats["eig"], w_min)
            if tr_drift > TRACE_DRIFT_LIMIT:
                raise NumericsError(
                    f"trace drift {tr_drift:.3e} at t={t!r}", residual=tr_drift, time=t)
            if w_min < EIGENVALUE_ABORT_FLOOR:
                raise NumericsError(
                    f"negative eigenvalue {w_min:.3e} at t={t!r}", residual=w_min, time=t)
        times.append(t)
        states.append(rho.copy())
        for name, bra_fn, ket_fn in tracked:
            bra = np.asarray(bra_fn(t), dtype=complex)
            ket = np.asarray(ket_fn(t), dtype=complex)
            series[name].append(bra.conj() @ rho @ ket)
        sample_index += 1

    record(t0)
    done = 0
    while done < n_full:
        n_chunk = min(stride, n_full - done)
        _advance(rho, t0 + done * step, step, n_chunk,
                 ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots, *bufs)
        done += n_chunk
        if done == n_full and rem > 0.0:
            break  # sample after the shortened final step instead
        record(t0 + done * step)
    if rem > 0.0:
        _advance(rho, t0 + n_full * step, rem, 1,
                 ladders, gammas, cosh_r, sinh_r, phi0s, phi_dots, *bufs)
        record(t1)

    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        observables={name: np.asarray(vals) for name, vals in series.items()},
        max_trace_drift=float(stats["trace"]),
        max_hermiticity_residual=float(stats["herm"]),
        min_eigenvalue=float(stats["eig"]),
    )


def fidelity_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """Overlap <psi|rho|psi> with a normalized pure state, clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ArgumentError(f"rho must be square, got shape {rho.shape}")
    if psi.ndim != 1 or psi.shape[0] != rho.shape[0]:
        raise ArgumentError(
            f"state length {psi.shape} does not match rho dimension {rho.shape[0]}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ArgumentError("psi must be normalized")
    val = float(np.real(psi.conj() @ rho @ psi))
    return min(1.0, max(0.0, val))


@dataclass(frozen=True)
class SteadyStateReport:
    """Fidelity of the evolving state with the dark state, sampled over time."""

    times: np.ndarray
    fidelities: np.ndarray

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelities[-1])


def steady_state_report(p: bath.SqueezingParams, rho0: np.ndarray, t_max: float,
                        step: float, sample_cap: int = DEFAULT_SAMPLE_CAP) -> SteadyStateReport:
    """Relax a 3-level state under the static squeezed bath and report the
    fidelity with the dark state over time.

    The fidelity series is not asserted monotone; only the long-time value is
    meaningful (every state relaxes onto the dark state).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (3, 3):
        raise ArgumentError("steady-state relaxation is defined on the 3-level manifold")
    gen = LindbladGenerator(
        3, (SqueezedChannel(p.gamma, p.r, p.phi, 0.0, bath.ladder_operator(3, 1)),))
    psi = bath.dark_state(p)
    traj = evolve_me(gen, rho0, 0.0, t_max, step,
                     tracked=[("dark_fidelity", lambda t: psi, lambda t: psi)],
                     sample_cap=sample_cap)
    fids = np.clip(traj.observables["dark_fidelity"].real, 0.0, 1.0)
    return SteadyStateReport(times=traj.times, fidelities=fids)
