import csv
import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from foldplate.analysis import (
    CSV_COLUMNS,
    ExtrapolationError,
    dg_norm,
    energy_density,
    error_series,
    extrapolate,
    write_convergence_csv,
)
from foldplate.assembly import assemble, assemble_norm_matrix
from foldplate.experiments import PRESETS, problem_for_level
from foldplate.solver import solve_direct
from foldplate.spaces import SolutionField, interpolate
from conftest import TABLE1_CASES, mesh_at, preset_manifest, two_element_square


def test_extrapolate_examples():
    assert extrapolate(3.0, 2.25, 2.0625) == 2.0
    assert abs(extrapolate(8.0, 6.5, 5.75) - 5.0) <= 1e-13
    with pytest.raises(ExtrapolationError):
        extrapolate(1.0, 2.0, 3.0)


@settings(max_examples=300, deadline=None)
@given(
    limit=st.floats(0.5, 10.0),
    c=st.floats(0.5, 5.0),
    sign=st.sampled_from([-1.0, 1.0]),
    q=st.sampled_from([0.5, 0.25, 0.125]),
)
def test_extrapolate_exact_on_geometric_sequences(limit, c, sign, q):
    s = [limit + sign * c * q**i for i in range(3)]
    assert abs(extrapolate(*s) - limit) <= 1e-12 * limit


def test_error_series_recovers_injected_rate():
    s2 = 4.0
    norms = [math.sqrt(s2 - 0.5 * 4.0**-j) for j in range(6)]
    rows = error_series(norms, n_dofs=[192 * 4**j for j in range(6)])
    assert abs(rows[-1].s_tilde - 2.0) <= 1e-6
    for row in rows[1:]:
        assert abs(row.rate - 1.0) <= 0.02
    assert rows[0].s_tilde is None and rows[0].rate is None


def test_error_series_flags_identical_norms():
    rows = error_series([1.0, 2.0, 2.0])
    assert rows[2].s_tilde == 2.0
    assert rows[1].err == 0.0 and rows[2].err == 0.0
    for row in rows[1:]:
        assert math.isnan(row.rate) and "rate undefined" in row.flag


def test_converged_sequence_cannot_be_extrapolated():
    with pytest.raises(ExtrapolationError):
        error_series([1.0, 1.5, 1.875, 1.875, 1.875])


def test_error_series_needs_three_levels():
    with pytest.raises(ValueError):
        error_series([1.0, 2.0])


def test_dg_norm_of_zero():
    mesh = mesh_at("straight", 0)
    assert dg_norm(SolutionField(mesh, 2, np.zeros(mesh.n_elements * 6))) == 0.0


def test_dg_norm_of_constant_on_two_elements():
    mesh = two_element_square()
    one = lambda X: np.ones(len(X))
    # with h_S = |S| only the four unit boundary edges contribute gamma0 * 1 * 1
    unit = replace(mesh, penalty_length=mesh.edge_length, _cache={})
    assert abs(dg_norm(interpolate(unit, 2, one)) - math.sqrt(40.0)) <= 1e-12
    # default h_S is the element size sqrt(2) of the two half squares
    np.testing.assert_allclose(mesh.penalty_length, math.sqrt(2.0))
    assert abs(dg_norm(interpolate(mesh, 2, one)) - math.sqrt(40.0 / 2**1.5)) <= 1e-12


def test_dg_norm_deterministic():
    mesh = mesh_at("pwquadratic", 1)
    field = interpolate(mesh, 2, lambda X: np.sin(3 * X[:, 0]) * X[:, 1] ** 2)
    first = dg_norm(field)
    mesh._cache.clear()
    assert abs(dg_norm(field) - first) <= 1e-10


@pytest.mark.parametrize("case", TABLE1_CASES)
def test_dg_norm_is_a_norm(case):
    N = assemble_norm_matrix(mesh_at(case, 0), 2).toarray()
    assert sla.eigvalsh(N, subset_by_index=[0, 0])[0] > 0


def test_energy_density_of_paraboloid():
    mesh = mesh_at("nofold", 1)
    density = energy_density(interpolate(mesh, 2, lambda X: 0.5 * (X[:, 0] ** 2 + X[:, 1] ** 2)))
    np.testing.assert_allclose(density, 1.0, atol=1e-12)
    assert not energy_density(SolutionField(mesh, 2, np.zeros(mesh.n_elements * 6))).any()


def test_fig3_energy_peaks_at_boundary_of_left_subdomain():
    config = PRESETS["fig3-fold"]
    spec = problem_for_level(config)
    mesh = mesh_at("quadratic", 3, dirichlet=spec.dirichlet)
    x = solve_direct(assemble(mesh, spec))
    e = int(np.argmax(energy_density(SolutionField(mesh, 2, x))))
    verts = mesh.vertices[mesh.elements[e]]
    curve = config.interface_spec.curve_x(verts[:, 1])
    assert np.all(verts[:, 0] <= curve + 1e-12)  # left of the fold
    on_outer = (verts[:, 0] == 0) | (verts[:, 1] == 0) | (verts[:, 1] == 1)
    on_fold = np.abs(verts[:, 0] - curve) <= 1e-12
    assert np.any(on_outer | on_fold)


def test_convergence_csv_format(tmp_path):
    rows = error_series([1.0, 1.5, 1.75, 1.875], n_dofs=[192, 768, 3072, 12288], h_max=[0.35, 0.18, 0.09, 0.045])
    path = tmp_path / "c.csv"
    write_convergence_csv(rows, path)
    lines = list(csv.reader(open(path)))
    assert tuple(lines[0]) == CSV_COLUMNS
    assert lines[1][:3] == ["0", "192", "0.35"] and lines[1][4] == "" and lines[1][6] == ""
    assert lines[3][4] == "2" and lines[4][4] == "2"
    assert lines[4][5] == f"{math.sqrt(4 - 1.875**2):.12g}"
    assert float(lines[4][6]) == pytest.approx(rows[3].rate, rel=1e-11)


@pytest.mark.slow
def test_error_estimate_monotone_for_table1():
    for name in ("table1-nofold", "table1-straight", "table1-pwlinear", "table1-pwquadratic"):
        errs = [row["err"] for row in preset_manifest(name)["rows"]]
        assert np.all(np.diff(errs) < 0), (name, errs)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="estimated error stays 1.6-1.8x below the direct dG error on levels 2-5")
def test_error_estimate_tracks_direct_error():
    manifest = preset_manifest("manufactured-k2")
    est = np.array([row["err"] for row in manifest["rows"]])
    direct = np.array([lev["direct_error"] for lev in manifest["levels"]])
    ratio = est[2:] / direct[2:]
    assert np.all((ratio >= 1 / 1.5) & (ratio <= 1.5)), ratio
