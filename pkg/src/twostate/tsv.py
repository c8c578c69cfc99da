"""Two-state-vector formalism: pre/post-selected ensembles, ABL rule, weak values."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AllAmplitudesZero, DimensionMismatch, OrthogonalSelection
from .qcore import Observable, StateVector, UnitaryMap

EPS_ORTHO = 1e-10
# Relative size below which a path amplitude counts as exactly zero.
ZERO_AMPLITUDE = 1e-14


@dataclass(frozen=True, eq=False)
class PrePostEnsemble:
    """Pre-selected |pre> at t_in, post-selected <post| at t_fin.

    `u_pre` evolves from t_in to the measurement time, `u_post` from the
    measurement time to t_fin. Both default to the identity.
    """

    pre: StateVector
    post: StateVector
    u_pre: UnitaryMap | None = None
    u_post: UnitaryMap | None = None

    def __post_init__(self):
        d = self.pre.dimension
        if self.post.dimension != d:
            raise DimensionMismatch("pre and post must share dimension")
        for u in (self.u_pre, self.u_post):
            if u is not None and u.dimension != d:
                raise DimensionMismatch("unitary dimension does not match states")

    @property
    def dimension(self) -> int:
        return self.pre.dimension

    def forward(self) -> np.ndarray:
        """U_pre |pre>, the state propagated to the measurement time."""
        v = self.pre.amplitudes
        return v if self.u_pre is None else self.u_pre.matrix @ v

    def backward(self) -> np.ndarray:
        """U_post^dagger |post>, the post-selection propagated back."""
        v = self.post.amplitudes
        return v if self.u_post is None else self.u_post.matrix.conj().T @ v

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.backward(), self.forward()))

    @property
    def relative_overlap(self) -> float:
        return abs(self.overlap) / (self.pre.norm * self.post.norm)

    @property
    def degenerate(self) -> bool:
        """True when pre and post are orthogonal to within EPS_ORTHO."""
        return self.relative_overlap < EPS_ORTHO

    def time_reversed(self) -> PrePostEnsemble:
        """Swap the roles of pre and post (and invert the evolutions)."""
        return PrePostEnsemble(
            self.post,
            self.pre,
            None if self.u_post is None else self.u_post.dagger(),
            None if self.u_pre is None else self.u_pre.dagger(),
        )


def path_amplitudes(ens: PrePostEnsemble, obs: Observable) -> list[tuple[float, complex]]:
    """<post| U_post P_j U_pre |pre> for every eigenspace of `obs`."""
    if obs.dimension != ens.dimension:
        raise DimensionMismatch("observable dimension does not match ensemble")
    fwd, bwd = ens.forward(), ens.backward()
    return [(e.value, complex(np.vdot(bwd, e.projector @ fwd))) for e in obs.spectrum]


def _normalize(weights: dict, scale: float) -> dict:
    total = sum(weights.values())
    if total <= (ZERO_AMPLITUDE * scale) ** 2:
        raise AllAmplitudesZero("post-selection cannot be reached through any outcome")
    return {k: w / total for k, w in weights.items()}


def abl_probability(ens: PrePostEnsemble, obs: Observable) -> dict[float, float]:
    """Conditional outcome probabilities of an ideal measurement between selections."""
    weights = {a: abs(amp) ** 2 for a, amp in path_amplitudes(ens, obs)}
    return _normalize(weights, ens.pre.norm * ens.post.norm)


def outcome_probability(dist: dict, value, tol: float = 1e-9) -> float:
    """Look up an outcome by value; eigenvalues are floats, so match within `tol`.

    Tuple keys (from multi_time_abl) are matched componentwise. Missing outcomes give 0.
    """
    for k, p in dist.items():
        if isinstance(k, tuple):
            if len(k) == len(value) and all(abs(a - b) <= tol for a, b in zip(k, value)):
                return p
        elif abs(k - value) <= tol:
            return p
    return 0.0


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    """An ideal intermediate measurement; `time_index` only orders events."""

    time_index: int
    observable: Observable
    outcome_filter: float | None = None


def multi_time_abl(ens: PrePostEnsemble, events: Sequence[MeasurementEvent]) -> dict[tuple[float, ...], float]:
    """Joint probabilities of a time-ordered sequence of ideal measurements.

    Pr(a_1..a_k) is |<post| U_post P_{a_k} ... P_{a_1} U_pre |pre>|^2,
    normalized over every outcome tuple. Events carrying an `outcome_filter`
    restrict which tuples are returned; the normalization still runs over all
    tuples, so returned values are joint probabilities.
    """
    if not events:
        raise ValueError("need at least one measurement event")
    times = [e.time_index for e in events]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("event time indices must be strictly increasing")
    for e in events:
        if e.observable.dimension != ens.dimension:
            raise DimensionMismatch("event observable dimension does not match ensemble")

    fwd, bwd = ens.forward(), ens.backward()
    spectra = [e.observable.spectrum for e in events]
    weights = {}
    for combo in itertools.product(*spectra):
        v = fwd
        for space in combo:
            v = space.projector @ v
        weights[tuple(s.value for s in combo)] = abs(np.vdot(bwd, v)) ** 2
    probs = _normalize(weights, ens.pre.norm * ens.post.norm)

    def keep(outcome):
        return all(
            e.outcome_filter is None or abs(a - e.outcome_filter) < 1e-9
            for e, a in zip(events, outcome)
        )

    return {k: p for k, p in probs.items() if keep(k)}


def marginal(joint: dict[tuple[float, ...], float], position: int) -> dict[float, float]:
    out: dict[float, float] = {}
    for outcome, p in joint.items():
        out[outcome[position]] = out.get(outcome[position], 0.0) + p
    return out


def weak_value(ens: PrePostEnsemble, obs: Observable | np.ndarray) -> complex:
    """A_w = <post|U_post A U_pre|pre> / <post|U_post U_pre|pre>.

    Accepts a bare matrix so that non-Hermitian products can be evaluated.
    """
    m = obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if m.shape != (ens.dimension, ens.dimension):
        raise DimensionMismatch("operator dimension does not match ensemble")
    if ens.degenerate:
        raise OrthogonalSelection(
            f"relative overlap {ens.relative_overlap:.3g} below {EPS_ORTHO:g}; weak value diverges"
        )
    fwd, bwd = ens.forward(), ens.backward()
    return complex(np.vdot(bwd, m @ fwd) / np.vdot(bwd, fwd))


@dataclass(frozen=True, eq=False)
class GeneralizedTwoState:
    """Weighted superposition sum_i alpha_i <bra_i| |ket_i>."""

    terms: tuple[tuple[complex, StateVector, StateVector], ...]

    def __post_init__(self):
        terms = tuple((complex(a), b, k) for a, b, k in self.terms)
        if not terms:
            raise ValueError("generalized two-state needs at least one term")
        d = terms[0][1].dimension
        for _, b, k in terms:
            if b.dimension != d or k.dimension != d:
                raise DimensionMismatch("all terms must share dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension

    def contract(self, m: np.ndarray | None = None) -> complex:
        """sum_i alpha_i <bra_i| M |ket_i> (M = identity when omitted)."""
        total = 0j
        for a, b, k in self.terms:
            v = k.amplitudes if m is None else m @ k.amplitudes
            total += a * np.vdot(b.amplitudes, v)
        return complex(total)

    def scale(self) -> float:
        return float(sum(abs(a) * b.norm * k.norm for a, b, k in self.terms))


def weak_value_generalized(g: GeneralizedTwoState, obs: Observable | np.ndarray) -> complex:
    m = obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if m.shape != (g.dimension, g.dimension):
        raise DimensionMismatch("operator dimension does not match generalized state")
    denom = g.contract()
    if abs(denom) < EPS_ORTHO * g.scale():
        raise OrthogonalSelection("generalized two-state has vanishing normalization")
    return g.contract(m) / denom
