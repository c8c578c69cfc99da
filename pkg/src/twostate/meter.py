"""Von Neumann measurement with a Gaussian pointer.

The meter couples through H_int = -lambda(t) Q A. After the impulsive
interaction the pointer momentum P is shifted by lambda * a for each
eigenvalue a. The pointer amplitude is

    phi(P) = (2 pi Delta^2)^(-1/4) exp(-P^2 / (4 Delta^2)),

so a single spectral component contributes a normal density of standard
deviation Delta, exp(-(P - lambda a)^2 / (2 Delta^2)). Delta is the weakness
dial: Delta << eigenvalue gaps is an ideal measurement, Delta >> spectral span
a weak one.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AllAmplitudesZero, DimensionMismatch, IncompleteBasis
from .qcore import Observable, StateVector
from .tsv import ZERO_AMPLITUDE, PrePostEnsemble, path_amplitudes

GRID_SPAN_WIDTHS = 6.0
GRID_POINTS_PER_WIDTH = 20
SAMPLE_BLOCK = 4096
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class MeterConfig:
    """Pointer coupling `lam` (integrated lambda) and readout width `delta`."""

    delta: float
    lam: float = 1.0

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive and finite, got {self.delta}")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and non-negative, got {self.lam}")


@dataclass(frozen=True, eq=False)
class ReadoutDensity:
    grid: np.ndarray
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.shape != d.shape or g.ndim != 1:
            raise DimensionMismatch("grid and density must be 1-D arrays of equal length")
        if g.size >= 2 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(d < 0):
            raise ValueError("density must be non-negative")
        g.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def mean(self) -> float:
        return float(np.trapezoid(self.grid * self.density, self.grid) / self.integral())

    def std(self) -> float:
        m = self.mean()
        var = np.trapezoid((self.grid - m) ** 2 * self.density, self.grid) / self.integral()
        return float(np.sqrt(var))

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid integral, normalized to end at 1."""
        steps = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.grid)
        c = np.concatenate([[0.0], np.cumsum(steps)])
        return c / c[-1]

    def mass(self, lo: float, hi: float) -> float:
        """Probability mass on [lo, hi] (linear interpolation of the CDF)."""
        c = self.cdf()
        return float(np.interp(hi, self.grid, c) - np.interp(lo, self.grid, c))


@dataclass(frozen=True)
class SampleRecord:
    readout: float
    postselected: bool
    trial_index: int


def pointer_amplitude(p, delta: float):
    return (2 * np.pi * delta * delta) ** -0.25 * np.exp(-np.square(p) / (4 * delta * delta))


def readout_grid(positions: Sequence[float], cfg: MeterConfig) -> np.ndarray:
    """Uniform grid over [min - 6 Delta, max + 6 Delta].

    Step is min(Delta, smallest gap between distinct pointer positions) / 20.
    """
    pos = np.unique(np.round(np.asarray(positions, dtype=float), 12))
    gaps = np.diff(pos)
    gaps = gaps[gaps > 1e-9]
    width = min(cfg.delta, float(gaps.min())) if gaps.size else cfg.delta
    step = width / GRID_POINTS_PER_WIDTH
    lo = pos[0] - GRID_SPAN_WIDTHS * cfg.delta
    hi = pos[-1] + GRID_SPAN_WIDTHS * cfg.delta
    n = int(math.ceil((hi - lo) / step - 1e-9)) + 1
    return np.linspace(lo, hi, n)


def _normalized(grid: np.ndarray, raw: np.ndarray) -> ReadoutDensity:
    z = np.trapezoid(raw, grid)
    if not z > 0:
        raise AllAmplitudesZero("readout density vanishes on the grid")
    return ReadoutDensity(grid, raw / z)


def _coherent_density(components: Sequence[tuple[float, complex]], cfg: MeterConfig, grid) -> ReadoutDensity:
    """|sum_i amp_i phi(P - lam a_i)|^2 normalized on the grid."""
    positions = [cfg.lam * a for a, _ in components]
    grid = readout_grid(positions, cfg) if grid is None else np.asarray(grid, dtype=float)
    amp = np.zeros(grid.shape, dtype=complex)
    for x, (_, c) in zip(positions, components):
        if c != 0:
            amp += c * pointer_amplitude(grid - x, cfg.delta)
    return _normalized(grid, np.abs(amp) ** 2)


def _check_reachable(amps: Sequence[complex], scale: float) -> None:
    if max((abs(a) for a in amps), default=0.0) <= ZERO_AMPLITUDE * scale:
        raise AllAmplitudesZero("post-selection is orthogonal to every eigenspace")


def preonly_density(state: StateVector, obs: Observable, cfg: MeterConfig, grid=None) -> ReadoutDensity:
    """Pointer distribution without post-selection: a Gaussian mixture
    weighted by the Born probabilities of `state`."""
    if obs.dimension != state.dimension:
        raise DimensionMismatch("observable dimension does not match state")
    v = state.amplitudes
    weights = [float(np.vdot(v, e.projector @ v).real) / state.norm2 for e in obs.spectrum]
    positions = [cfg.lam * e.value for e in obs.spectrum]
    grid = readout_grid(positions, cfg) if grid is None else np.asarray(grid, dtype=float)
    raw = np.zeros(grid.shape)
    for x, w in zip(positions, weights):
        raw += w * pointer_amplitude(grid - x, cfg.delta) ** 2
    return _normalized(grid, raw)


def postselected_meter_distribution(
    ens: PrePostEnsemble, obs: Observable, cfg: MeterConfig, grid=None
) -> ReadoutDensity:
    """Pointer distribution conditioned on a successful post-selection."""
    comps = path_amplitudes(ens, obs)
    _check_reachable([c for _, c in comps], ens.pre.norm * ens.post.norm)
    return _coherent_density(comps, cfg, grid)


def collective_components(
    n: int, pre1: StateVector, post1: StateVector, obs1: Observable
) -> list[tuple[float, complex]]:
    """Pointer positions and amplitudes for the collective average (1/n) sum_i A_i.

    Uses the multinomial expansion of the product over particles: every
    assignment of occupation numbers k_j to the single-particle eigenspaces
    contributes multinomial(n; k) prod_j b_j^k_j at position sum_j k_j a_j / n,
    with b_j = <post1|P_j|pre1>. The 2^n space is never built.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (pre1.dimension == post1.dimension == obs1.dimension):
        raise DimensionMismatch("single-particle dimensions differ")
    single = path_amplitudes(PrePostEnsemble(pre1, post1), obs1)
    values = [a for a, _ in single]
    amps = [b for _, b in single]
    _check_reachable(amps, pre1.norm * post1.norm)
    m = len(single)
    out = []
    for combo in itertools.combinations_with_replacement(range(m), n):
        counts = [combo.count(j) for j in range(m)]
        coeff = math.factorial(n)
        for k in counts:
            coeff //= math.factorial(k)
        amp = complex(coeff)
        for b, k in zip(amps, counts):
            amp *= b**k
        pos = sum(k * a for k, a in zip(counts, values)) / n
        out.append((pos, amp))
    out.sort(key=lambda t: t[0])
    return out


def collective_density(
    n: int, pre1: StateVector, post1: StateVector, obs1: Observable, cfg: MeterConfig, grid=None
) -> ReadoutDensity:
    """Post-selected readout of (1/n) sum_i A_i on the product ensemble prod|pre1>, prod<post1|."""
    return _coherent_density(collective_components(n, pre1, post1, obs1), cfg, grid)


def disturbance_probability(state: StateVector, obs: Observable, lambda_q: float) -> float:
    """Probability that a coupling of strength lambda*q kicks `state` into its orthogonal complement."""
    x2 = float(lambda_q) ** 2
    var = obs.variance(state)
    second = Observable(obs.matrix @ obs.matrix).expectation(state)
    return x2 * var / (1.0 + x2 * second)


def postselection_probability(ens: PrePostEnsemble, obs: Observable, cfg: MeterConfig) -> float:
    """Probability that the post-selection succeeds after the meter interaction.

    Exact over the full pointer line: sum_ik conj(b_i) b_k exp(-lam^2 (a_i - a_k)^2 / (8 Delta^2)).
    Tends to |<post|pre>|^2 as lam -> 0.
    """
    comps = path_amplitudes(ens, obs)
    total = 0j
    for ai, bi in comps:
        for ak, bk in comps:
            gap = cfg.lam * (ai - ak)
            total += bi.conjugate() * bk * math.exp(-gap * gap / (8 * cfg.delta**2))
    return float(total.real) / (ens.pre.norm2 * ens.post.norm2)


class SampleRun(Sequence):
    """Result of `sample_run`: a sequence of SampleRecord backed by arrays."""

    def __init__(self, readouts: np.ndarray, accepted: np.ndarray, first_index: int = 0):
        self.readouts = np.asarray(readouts, dtype=float)
        self.accepted = np.asarray(accepted, dtype=bool)
        self.first_index = first_index

    def __len__(self) -> int:
        return self.readouts.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return SampleRecord(float(self.readouts[i]), bool(self.accepted[i]), self.first_index + i)

    @property
    def accepted_readouts(self) -> np.ndarray:
        return self.readouts[self.accepted]

    @property
    def n_accepted(self) -> int:
        return int(self.accepted.sum())

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / len(self)

    def accepted_mean(self) -> float:
        r = self.accepted_readouts
        return float(r.mean()) if r.size else float("nan")

    def standard_error(self) -> float:
        r = self.accepted_readouts
        return float(r.std(ddof=1) / np.sqrt(r.size)) if r.size > 1 else float("nan")


class _Sampler:
    """Vectorized trial kernel shared by the serial and parallel paths."""

    def __init__(self, ens: PrePostEnsemble, obs: Observable, cfg: MeterConfig, seed: int, grid=None):
        self.cfg = cfg
        self.seed = int(seed) & _U64
        fwd = ens.forward()
        self.bwd = ens.backward()
        self.bwd_norm2 = float(np.vdot(self.bwd, self.bwd).real)
        self.positions = np.array([cfg.lam * e.value for e in obs.spectrum])
        # components P_j U_pre |pre>, one row per eigenspace
        self.components = np.array([e.projector @ fwd for e in obs.spectrum])
        self.overlaps = self.components @ self.bwd.conj()
        marginal = preonly_density(StateVector(fwd), obs, cfg, grid)
        self.grid = marginal.grid
        self.cdf = marginal.cdf()

    def block(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        u = np.random.default_rng([self.seed, b]).random((SAMPLE_BLOCK, 2))
        p = np.interp(u[:, 0], self.cdf, self.grid)
        weights = pointer_amplitude(p[:, None] - self.positions[None, :], self.cfg.delta)
        psi = weights @ self.components
        num = np.abs(weights @ self.overlaps) ** 2
        den = np.sum(np.abs(psi) ** 2, axis=1) * self.bwd_norm2
        accept_prob = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return p, u[:, 1] < accept_prob

    def run(self, first: int, stop: int, workers: int = 1) -> SampleRun:
        blocks = range(first // SAMPLE_BLOCK, (stop - 1) // SAMPLE_BLOCK + 1)
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(self.block, blocks))
        else:
            parts = [self.block(b) for b in blocks]
        p = np.concatenate([x for x, _ in parts])
        acc = np.concatenate([y for _, y in parts])
        offset = blocks.start * SAMPLE_BLOCK
        return SampleRun(p[first - offset : stop - offset], acc[first - offset : stop - offset], first)


def sample_run(
    ens: PrePostEnsemble,
    obs: Observable,
    cfg: MeterConfig,
    trials: int,
    seed: int = 0,
    grid=None,
    workers: int = 1,
) -> SampleRun:
    """Monte Carlo realization of the meter experiment.

    Each trial draws a pointer reading from the pre-selected marginal
    (inverse CDF on the grid), collapses the system onto the conditional state
    for that reading and then applies the post-selection with the Born
    probability. Trial t depends only on (seed, t): blocks of SAMPLE_BLOCK
    trials each get an independent stream seeded by [seed, block], so
    ``workers > 1`` reproduces the serial result exactly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return _Sampler(ens, obs, cfg, seed, grid).run(0, trials, workers)


def sample_until_accepted(
    ens: PrePostEnsemble,
    obs: Observable,
    cfg: MeterConfig,
    accepted: int,
    seed: int = 0,
    max_trials: int = 10_000_000,
    grid=None,
) -> SampleRun:
    """Run trials in order until `accepted` post-selections succeed.

    The returned run is a prefix of ``sample_run(..., seed)`` ending at the
    trial that produced the last required acceptance.
    """
    sampler = _Sampler(ens, obs, cfg, seed, grid)
    ps, accs, have, b = [], [], 0, 0
    while have < accepted:
        if b * SAMPLE_BLOCK >= max_trials:
            raise RuntimeError(f"only {have} of {accepted} accepted within {max_trials} trials")
        p, acc = sampler.block(b)
        ps.append(p)
        accs.append(acc)
        have += int(acc.sum())
        b += 1
    p = np.concatenate(ps)
    acc = np.concatenate(accs)
    stop = int(np.flatnonzero(acc)[accepted - 1]) + 1 if accepted else 0
    return SampleRun(p[:stop], acc[:stop])


def _unit(v: StateVector) -> np.ndarray:
    return v.amplitudes / v.norm


def check_complete_basis(basis: Sequence[StateVector], dim: int, tol: float = 1e-10) -> None:
    if any(b.dimension != dim for b in basis):
        raise DimensionMismatch("basis vector dimension does not match")
    vecs = np.array([_unit(b) for b in basis]).T if basis else np.zeros((dim, 0))
    dev = np.max(np.abs(vecs @ vecs.conj().T - np.eye(dim)))
    if len(basis) != dim or dev > tol:
        raise IncompleteBasis(f"post-selection set does not resolve the identity (deviation {dev:.3g})")


def postselection_marginal(
    pre: StateVector, obs: Observable, cfg: MeterConfig, basis: Sequence[StateVector], grid=None
) -> ReadoutDensity:
    """sum_j Pr(j) density_j(P) for the complete post-selection `basis`."""
    check_complete_basis(basis, pre.dimension)
    positions = [cfg.lam * e.value for e in obs.spectrum]
    grid = readout_grid(positions, cfg) if grid is None else np.asarray(grid, dtype=float)
    weights = np.array([pointer_amplitude(grid - x, cfg.delta) for x in positions])
    comps = np.array([e.projector @ pre.amplitudes for e in obs.spectrum])
    per_outcome = []
    for f in basis:
        amp = (comps @ _unit(f).conj()) @ weights
        per_outcome.append(np.abs(amp) ** 2)
    z = np.array([np.trapezoid(d, grid) for d in per_outcome])
    total = z.sum()
    if not total > 0:
        raise AllAmplitudesZero("pre-selection has no weight on the grid")
    marginal = np.zeros(grid.shape)
    for zj, d in zip(z, per_outcome):
        if zj > 0:
            marginal += (zj / total) * (d / zj)
    return ReadoutDensity(grid, marginal)


def no_signaling_check(
    pre: StateVector,
    obs: Observable,
    cfg: MeterConfig,
    postselections: Sequence[Sequence[StateVector]],
    grid=None,
) -> float:
    """Largest pointwise gap between readout marginals of different post-selection bases.

    The pre-selected meter marginal must not depend on which complete basis is
    measured afterwards, so the result is expected to sit at rounding level.
    """
    if not postselections:
        raise ValueError("need at least one post-selection basis")
    positions = [cfg.lam * e.value for e in obs.spectrum]
    grid = readout_grid(positions, cfg) if grid is None else np.asarray(grid, dtype=float)
    marginals = [postselection_marginal(pre, obs, cfg, b, grid).density for b in postselections]
    return float(max(np.max(np.abs(m - marginals[0])) for m in marginals))


def peak_estimate(d: ReadoutDensity) -> float:
    """Argmax refined by a parabola through the three samples around it.

    On exact ties the smallest P wins (first maximum).
    """
    g, y = d.grid, d.density
    if g.size < 3:
        raise ValueError("need at least 3 grid samples")
    i = int(np.argmax(y))
    if i == 0 or i == g.size - 1:
        return float(g[i])
    x0, x1, x2 = g[i - 1 : i + 2]
    y0, y1, y2 = y[i - 1 : i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1)
    return float(-b / (2 * a))


def find_peaks(d: ReadoutDensity, rel_height: float = 0.0) -> list[tuple[float, float]]:
    """Local maxima as (P, density / global max), keeping those above `rel_height`."""
    y = d.density
    top = y.max()
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    return [(float(d.grid[i]), float(y[i] / top)) for i in idx if y[i] >= rel_height * top]
