import json

import numpy as np
import pytest

from twostate import qcore as q
from twostate import scenarios as sc
from twostate.tsv import PrePostEnsemble, weak_value


@pytest.fixture(scope="module")
def reports():
    return {r.name: r for r in sc.run_all()}


def test_registry_names(reports):
    assert list(reports) == list(sc.SCENARIOS)
    assert set(sc.SCENARIOS) == {
        "three-box", "spin-sqrt2", "hardy", "mermin-square", "cheshire-cat", "order-dependence",
    }


@pytest.mark.parametrize("name", list(sc.SCENARIOS))
def test_every_entry_passes(reports, name):
    rep = reports[name]
    assert rep.entries
    assert rep.failures() == [], rep.to_table()


def test_entry_pass_invariant():
    e = sc.Entry("x", 1.0 + 1e-9, 1.0, sc.DERIVED, 1e-12)
    assert not e.passed
    assert sc.Entry("x", 1.0 + 1e-13, 1.0, sc.DERIVED, 1e-12).passed
    assert sc.Entry("z", 1j, 1j, sc.TRIVIAL).passed


def test_provenance_tags(reports):
    tags = {e.provenance for r in reports.values() for e in r.entries}
    assert tags <= {sc.REFERENCE, sc.DERIVED, sc.TRIVIAL}
    assert sc.REFERENCE in tags


def test_json_schema(reports):
    doc = json.loads(reports["three-box"].to_json())
    assert doc["name"] == "three-box"
    first = doc["entries"][0]
    assert set(first) == {"label", "computed", "expected", "provenance", "tolerance", "pass"}
    complex_entry = next(e for e in json.loads(reports["spin-sqrt2"].to_json())["entries"] if e["label"] == "(sigma_z)_w")
    assert complex_entry["computed"] == {"re": pytest.approx(0, abs=1e-12), "im": pytest.approx(1)}


def test_table_layout(reports):
    table = reports["hardy"].to_table()
    lines = table.splitlines()
    assert lines[0] == "== hardy =="
    assert all(line.endswith(("PASS", "FAIL")) for line in lines[3:])
    assert len({len(line) for line in lines[1:]}) == 1


def test_hardy_space_factors():
    pre, post = sc.hardy_states()
    assert [label.split(q.TENSOR_SEP) for label in pre.basis] == [["O", "O"], ["O", "NO"], ["NO", "O"], ["NO", "NO"]]
    assert pre.basis == post.basis
    assert abs(pre.amplitudes[0]) == 0
    assert PrePostEnsemble(pre, post).overlap == pytest.approx(-1 / (2 * np.sqrt(3)), abs=1e-15)


def test_hardy_bright_port_never_dark_for_single_particle():
    bright = q.ket(1, 1, basis=sc.ARMS)
    dark = q.ket(1, -1, basis=sc.ARMS)
    # a lone particle entering the interferometer leaves through the bright port
    assert abs(q.inner_product(dark, bright)) == 0


def test_cheshire_space_factors():
    pre, post = sc.cheshire_states()
    assert pre.basis == ("L⊗↑z", "L⊗↓z", "R⊗↑z", "R⊗↓z")
    assert pre.norm == pytest.approx(1) and post.norm == pytest.approx(1)


def test_mermin_search_is_sensitive_to_constraints(monkeypatch):
    assert sc.count_consistent_assignments() == 0
    monkeypatch.setattr(sc, "COLUMN_PRODUCTS", (1, 1, 1))
    # all-even constraints: free 2x2 block fixes the rest
    assert sc.count_consistent_assignments() == 16


def test_mermin_weak_value_single_spin_origin():
    # each spin alone has (sigma_z)_w = i, so the pair gives i * i = -1
    assert abs(weak_value(PrePostEnsemble(q.UP_X, q.UP_Y), q.SIGMA_Z) - 1j) <= 1e-12


def test_eccentric_postselection_states():
    for angle in (0.2, 0.02):
        for sign in (+1, -1):
            state = sc.eccentric_postselection(angle, sign)
            obs = q.sigma((np.cos(angle), 0, np.sin(angle)))
            np.testing.assert_allclose(obs.apply(state).amplitudes, sign * state.amplitudes, atol=1e-12)


def test_bloch_oracle_agrees_with_direct_evaluation():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.normal(size=3), rng.normal(size=3)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        if 1 + a @ b < 1e-3:
            continue
        pre = q.StateVector(np.linalg.eigh(q.sigma(a).matrix)[1][:, 1], q.SPIN_BASIS)
        post = q.StateVector(np.linalg.eigh(q.sigma(b).matrix)[1][:, 1], q.SPIN_BASIS)
        direct = weak_value(PrePostEnsemble(pre, post), q.SIGMA_Z)
        assert abs(direct - sc.qubit_weak_value_z(a, b)) <= 1e-9
