"""Worked pre- and post-selection paradoxes, each producing a checked report."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qcore as q
from .meter import MeterConfig, peak_estimate, postselected_meter_distribution
from .qcore import Observable, StateVector, ket, tensor_product
from .tsv import (
    MeasurementEvent,
    PrePostEnsemble,
    abl_probability,
    marginal,
    multi_time_abl,
    outcome_probability,
    weak_value,
)

REFERENCE, DERIVED, TRIVIAL = "REFERENCE", "DERIVED", "TRIVIAL"
EXACT = 1e-12
SQRT2 = float(np.sqrt(2.0))


@dataclass
class Entry:
    label: str
    computed: complex | float
    expected: complex | float
    provenance: str
    tolerance: float = EXACT

    @property
    def passed(self) -> bool:
        return bool(abs(complex(self.computed) - complex(self.expected)) <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "computed": _jsonable(self.computed),
            "expected": _jsonable(self.expected),
            "provenance": self.provenance,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _jsonable(x):
    z = complex(x)
    return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}


def _fmt(x) -> str:
    z = complex(x)
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


@dataclass
class ScenarioReport:
    name: str
    entries: list[Entry] = field(default_factory=list)

    def add(self, label, computed, expected, provenance, tolerance=EXACT) -> None:
        self.entries.append(Entry(label, computed, expected, provenance, tolerance))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[Entry]:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {"name": self.name, "entries": [e.to_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        w = max([len(e.label) for e in self.entries] + [5])
        head = f"{'label':<{w}}  {'computed':>22}  {'expected':>22}  {'prov':<9}  {'tol':>8}  {'ok':<4}"
        lines = [f"== {self.name} ==", head, "-" * len(head)]
        for e in self.entries:
            lines.append(
                f"{e.label:<{w}}  {_fmt(e.computed):>22}  {_fmt(e.expected):>22}  "
                f"{e.provenance:<9}  {e.tolerance:>8.1e}  {'PASS' if e.passed else 'FAIL'}"
            )
        return "\n".join(lines)


def _check_construction(states, observables) -> None:
    for s in states:
        assert s.norm2 > 0
    for o in observables:
        assert np.allclose(o.matrix, o.matrix.conj().T, atol=1e-12)


# --- three boxes ------------------------------------------------------------

BOXES = ("A", "B", "C")


def three_box_states() -> tuple[StateVector, StateVector]:
    r = 1 / np.sqrt(3)
    return ket(r, r, r, basis=BOXES), ket(r, r, -r, basis=BOXES)


def box_projector(box: str) -> Observable:
    e = np.zeros(3)
    e[BOXES.index(box)] = 1
    return Observable(np.diag(e), BOXES)


def run_three_box() -> ScenarioReport:
    pre, post = three_box_states()
    ens = PrePostEnsemble(pre, post)
    pa, pb, pc = (box_projector(b) for b in BOXES)
    _check_construction([pre, post], [pa, pb, pc])
    rep = ScenarioReport("three-box")
    rep.add("<post|pre>", ens.overlap, 1 / 3, REFERENCE)
    rep.add("ABL Pr(P_A=1)", outcome_probability(abl_probability(ens, pa), 1.0), 1.0, REFERENCE)
    rep.add("ABL Pr(P_B=1)", outcome_probability(abl_probability(ens, pb), 1.0), 1.0, REFERENCE)
    joint = multi_time_abl(ens, [MeasurementEvent(0, pa), MeasurementEvent(1, pb)])
    rep.add("Pr(P_A=1 then P_B=1)", outcome_probability(joint, (1.0, 1.0)), 0.0, REFERENCE)
    wa, wb, wc = (weak_value(ens, p) for p in (pa, pb, pc))
    rep.add("(P_A)_w", wa, 1.0, REFERENCE)
    rep.add("(P_B)_w", wb, 1.0, REFERENCE)
    rep.add("(P_C)_w", wc, -1.0, REFERENCE)
    rep.add("(P_A)_w+(P_B)_w+(P_C)_w", wa + wb + wc, 1.0, REFERENCE)
    rep.add("(P_A+P_B+P_C)_w", weak_value(ens, pa + pb + pc), 1.0, REFERENCE)
    return rep


# --- spin-1/2 with weak value sqrt(2) ------------------------------------------


def eccentric_postselection(angle: float, sign: int = +1) -> StateVector:
    """Eigenstate (eigenvalue `sign`) of cos(angle) sigma_x + sin(angle) sigma_z."""
    obs = q.sigma((np.cos(angle), 0.0, np.sin(angle)))
    space = obs.spectrum[-1 if sign > 0 else 0]
    w, v = np.linalg.eigh(space.projector)
    return StateVector(v[:, -1], q.SPIN_BASIS)


def qubit_weak_value_z(pre_bloch, post_bloch) -> complex:
    """(sigma_z)_w for pure qubit states given by unit Bloch vectors a (pre), b (post):
    (a + b + i a x b)_z / (1 + a . b)."""
    a, b = np.asarray(pre_bloch, float), np.asarray(post_bloch, float)
    return complex(a[2] + b[2], np.cross(a, b)[2]) / (1 + a @ b)


def run_spin_sqrt2() -> ScenarioReport:
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    sxi = q.sigma_xi(np.pi / 4)
    rep = ScenarioReport("spin-sqrt2")
    rep.add("(sigma_xi)_w", weak_value(ens, sxi), SQRT2, REFERENCE)
    rep.add("(sigma_z)_w", weak_value(ens, q.SIGMA_Z), 1j, DERIVED)
    rep.add("ABL Pr(sigma_x=+1)", outcome_probability(abl_probability(ens, q.SIGMA_X), 1.0), 1.0, REFERENCE)
    rep.add("ABL Pr(sigma_y=+1)", outcome_probability(abl_probability(ens, q.SIGMA_Y), 1.0), 1.0, REFERENCE)
    rep.add("ABL Pr(sigma_xi=+1)", outcome_probability(abl_probability(ens, sxi), 1.0), (1.5 + SQRT2) / 3, DERIVED)

    for angle, family in [(np.pi / 2, TRIVIAL), (0.2, REFERENCE), (0.02, REFERENCE)]:
        post = eccentric_postselection(angle, +1)
        wz = weak_value(PrePostEnsemble(q.UP_X, post), q.SIGMA_Z)
        rep.add(f"(sigma_z)_w post +1 @ alpha={angle:.4g}", wz, np.tan(angle / 2), family)
    for angle in (0.2, 0.02):
        post = eccentric_postselection(angle, -1)
        wz = weak_value(PrePostEnsemble(q.UP_X, post), q.SIGMA_Z)
        bloch = -np.array([np.cos(angle), 0.0, np.sin(angle)])
        oracle = qubit_weak_value_z([1.0, 0.0, 0.0], bloch)
        rep.add(f"(sigma_z)_w post -1 @ alpha={angle:.4g}", wz, oracle, DERIVED, 1e-9)
        rep.add(f"-cot(alpha/2) @ alpha={angle:.4g}", wz, -1 / np.tan(angle / 2), DERIVED, 1e-9)

    peak = peak_estimate(postselected_meter_distribution(ens, sxi, MeterConfig(delta=10.0)))
    rep.add("meter peak, Delta=10", peak, SQRT2, REFERENCE, 0.05)
    return rep


# --- Hardy's paradox -------------------------------------------------------------

ARMS = ("O", "NO")


def hardy_states() -> tuple[StateVector, StateVector]:
    """Positron factor first. Pre-selection after annihilation removes |O,O>."""
    o, no = ket(1, 0, basis=ARMS), ket(0, 1, basis=ARMS)
    pre_raw = (
        tensor_product(o, no).amplitudes + tensor_product(no, o).amplitudes + tensor_product(no, no).amplitudes
    )
    basis = tensor_product(o, no).basis
    pre = StateVector(pre_raw / np.sqrt(3), basis)
    dark = ket(1 / np.sqrt(2), -1 / np.sqrt(2), basis=ARMS)
    return pre, tensor_product(dark, dark)


def _arm(label: str) -> Observable:
    e = np.zeros(2)
    e[ARMS.index(label)] = 1
    return Observable(np.diag(e), ARMS)


def hardy_observables() -> dict[str, Observable]:
    eye = q.identity(2, ARMS)
    obs = {}
    for arm in ARMS:
        obs[f"N+_{arm}"] = tensor_product(_arm(arm), eye)
        obs[f"N-_{arm}"] = tensor_product(eye, _arm(arm))
    for pos, ele in itertools.product(ARMS, ARMS):
        obs[f"N+-_{pos},{ele}"] = tensor_product(_arm(pos), _arm(ele))
    return obs


def run_hardy() -> ScenarioReport:
    pre, post = hardy_states()
    ens = PrePostEnsemble(pre, post)
    obs = hardy_observables()
    _check_construction([pre, post], obs.values())
    assert pre.basis == ("O⊗O", "O⊗NO", "NO⊗O", "NO⊗NO")
    rep = ScenarioReport("hardy")
    rep.add("<post|pre>", ens.overlap, -1 / (2 * np.sqrt(3)), DERIVED)
    expected = {
        "N-_O": (1, REFERENCE), "N+_O": (1, REFERENCE),
        "N-_NO": (0, REFERENCE), "N+_NO": (0, REFERENCE),
        "N+-_O,O": (0, REFERENCE), "N+-_O,NO": (1, REFERENCE),
        "N+-_NO,O": (1, REFERENCE), "N+-_NO,NO": (-1, REFERENCE),
    }
    w = {name: weak_value(ens, obs[name]) for name in expected}
    for name, (value, prov) in expected.items():
        rep.add(f"({name})_w", w[name], value, prov)
    rep.add("ABL Pr(N-_O=1)", outcome_probability(abl_probability(ens, obs["N-_O"]), 1.0), 1.0, REFERENCE)
    rep.add("ABL Pr(N+_O=1)", outcome_probability(abl_probability(ens, obs["N+_O"]), 1.0), 1.0, REFERENCE)
    rep.add("ABL Pr(N+-_O,O=1)", outcome_probability(abl_probability(ens, obs["N+-_O,O"]), 1.0), 0.0, REFERENCE)
    rep.add("(N+_O)_w - (N+-_O,O)_w - (N+-_O,NO)_w", w["N+_O"] - w["N+-_O,O"] - w["N+-_O,NO"], 0.0, TRIVIAL)
    return rep


# --- Mermin square -------------------------------------------------------------


def mermin_square() -> list[list[tuple[str, np.ndarray]]]:
    """The nine two-qubit observables; factor 1 is the left tensor slot."""
    x, y, z = q.SIGMA_X.matrix, q.SIGMA_Y.matrix, q.SIGMA_Z.matrix
    i2 = np.eye(2)

    def two(a, b):
        return np.kron(a, b)

    return [
        [("x1", two(x, i2)), ("x2", two(i2, x)), ("x1x2", two(x, x))],
        [("y2", two(i2, y)), ("y1", two(y, i2)), ("y1y2", two(y, y))],
        [("x1y2", two(x, y)), ("x2y1", two(y, x)), ("z1z2", two(z, z))],
    ]


ROW_PRODUCTS = (1, 1, 1)
COLUMN_PRODUCTS = (1, 1, -1)


def count_consistent_assignments() -> int:
    """Exhaustive search over all 2^9 value assignments in {+1, -1}."""
    count = 0
    for values in itertools.product((1, -1), repeat=9):
        grid = np.array(values).reshape(3, 3)
        rows_ok = all(np.prod(grid[r]) == ROW_PRODUCTS[r] for r in range(3))
        cols_ok = all(np.prod(grid[:, c]) == COLUMN_PRODUCTS[c] for c in range(3))
        count += rows_ok and cols_ok
    return count


def run_mermin_square() -> ScenarioReport:
    sq = mermin_square()
    eye = np.eye(4)
    rep = ScenarioReport("mermin-square")
    for r, row in enumerate(sq):
        prod = row[0][1] @ row[1][1] @ row[2][1]
        rep.add(f"row {r + 1} product vs {ROW_PRODUCTS[r]:+d} I",
                np.max(np.abs(prod - ROW_PRODUCTS[r] * eye)), 0.0, REFERENCE)
    for c in range(3):
        prod = sq[0][c][1] @ sq[1][c][1] @ sq[2][c][1]
        rep.add(f"column {c + 1} product vs {COLUMN_PRODUCTS[c]:+d} I",
                np.max(np.abs(prod - COLUMN_PRODUCTS[c] * eye)), 0.0, REFERENCE)
    # each row/column must be a commuting context
    for line in [row for row in sq] + [[sq[r][c] for r in range(3)] for c in range(3)]:
        for (_, a), (_, b) in itertools.combinations(line, 2):
            assert np.allclose(a @ b, b @ a)
    rep.add("consistent +-1 assignments (of 512)", count_consistent_assignments(), 0, REFERENCE, 0)

    pre = tensor_product(q.UP_X, q.UP_X)
    post = tensor_product(q.UP_Y, q.UP_Y)
    ens = PrePostEnsemble(pre, post)
    x1y2, x2y1, z1z2 = sq[2][0][1], sq[2][1][1], sq[2][2][1]
    w1, w2, w3 = weak_value(ens, x1y2), weak_value(ens, x2y1), weak_value(ens, z1z2)
    rep.add("(x1 y2)_w", w1, 1.0, REFERENCE)
    rep.add("(x2 y1)_w", w2, 1.0, REFERENCE)
    rep.add("(z1 z2)_w", w3, -1.0, REFERENCE)
    rep.add("x1y2 . x2y1 == z1z2", np.max(np.abs(x1y2 @ x2y1 - z1z2)), 0.0, DERIVED)
    rep.add("product-rule gap (x1y2)_w(x2y1)_w - (z1z2)_w", w1 * w2 - w3, 2.0, DERIVED)
    return rep


# --- Cheshire cat ----------------------------------------------------------------

SIDES = ("L", "R")


def cheshire_states() -> tuple[StateVector, StateVector]:
    """Location factor first, then spin (up_z, down_z)."""
    left, right = ket(1, 0, basis=SIDES), ket(0, 1, basis=SIDES)
    pre = tensor_product(left, ket(1, 1, basis=q.SPIN_BASIS)).amplitudes + tensor_product(right, q.UP_Z).amplitudes
    basis = tensor_product(left, q.UP_Z).basis
    post = tensor_product(ket(1, -1, basis=SIDES), ket(1, -1, basis=q.SPIN_BASIS))
    return StateVector(pre / np.sqrt(3), basis), StateVector(post.amplitudes / 2, basis)


def run_cheshire_cat() -> ScenarioReport:
    pre, post = cheshire_states()
    ens = PrePostEnsemble(pre, post)
    side = {s: Observable(np.diag([1.0, 0.0] if s == "L" else [0.0, 1.0]), SIDES) for s in SIDES}
    spin_up = Observable(np.diag([1.0, 0.0]), q.SPIN_BASIS)
    spin_down = Observable(np.diag([0.0, 1.0]), q.SPIN_BASIS)
    eye = q.identity(2, q.SPIN_BASIS)
    p_l, p_r = tensor_product(side["L"], eye), tensor_product(side["R"], eye)
    p_l_sz, p_r_sz = tensor_product(side["L"], q.SIGMA_Z), tensor_product(side["R"], q.SIGMA_Z)
    n_l_up, n_l_down = tensor_product(side["L"], spin_up), tensor_product(side["L"], spin_down)
    _check_construction([pre, post], [p_l, p_r, p_l_sz, p_r_sz])

    rep = ScenarioReport("cheshire-cat")
    wl, wr = weak_value(ens, p_l), weak_value(ens, p_r)
    up, down = weak_value(ens, n_l_up), weak_value(ens, n_l_down)
    rep.add("(P_L)_w", wl, 0.0, REFERENCE)
    rep.add("(P_R)_w", wr, 1.0, TRIVIAL)
    rep.add("N_L(+1)+N_L(-1)", up + down, 0.0, REFERENCE)
    rep.add("|N_L(+1)-N_L(-1)|", abs(up - down), 2.0, DERIVED)
    rep.add("N_L(+1)-N_L(-1) (sign per printed states)", up - down, -2.0, DERIVED)
    rep.add("(P_L sigma_z)_w", weak_value(ens, p_l_sz), -2.0, DERIVED)
    rep.add("(P_R sigma_z)_w", weak_value(ens, p_r_sz), 1.0, DERIVED)
    return rep


# --- ordering of ideal measurements ------------------------------------------------


def run_order_dependence() -> ScenarioReport:
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    xy = multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_X), MeasurementEvent(1, q.SIGMA_Y)])
    yx = multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_Y), MeasurementEvent(1, q.SIGMA_X)])
    rep = ScenarioReport("order-dependence")
    rep.add("[x, y] Pr(+1,+1)", outcome_probability(xy, (1.0, 1.0)), 1.0, DERIVED)
    for outcome in itertools.product((-1.0, 1.0), repeat=2):
        rep.add(f"[y, x] Pr{outcome}", outcome_probability(yx, outcome), 0.25, DERIVED)
    first = marginal(xy, 0)
    single = outcome_probability(abl_probability(ens, q.SIGMA_X), 1.0)
    rep.add("[x, y] marginal Pr(sigma_x=+1)", outcome_probability(first, 1.0), single, TRIVIAL)
    return rep


SCENARIOS: dict[str, Callable[[], ScenarioReport]] = {
    "three-box": run_three_box,
    "spin-sqrt2": run_spin_sqrt2,
    "hardy": run_hardy,
    "mermin-square": run_mermin_square,
    "cheshire-cat": run_cheshire_cat,
    "order-dependence": run_order_dependence,
}


def run_all() -> list[ScenarioReport]:
    return [fn() for fn in SCENARIOS.values()]
