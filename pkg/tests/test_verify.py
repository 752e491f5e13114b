import math

import numpy as np
import pytest

from dymlab import constant_rho as cr
from dymlab.errors import InvalidInputError
from dymlab.verify import (FieldSample, current_components, energy_density, fields_from_family,
                           fields_from_solution, residual_full, verify)


def grid(a, b, h):
    return a + h * np.arange(int(round((b - a) / h)) + 1)


def test_s1xs2_passes():
    sol = cr.s1xs2_solution_delta0(1.0, 8.0, grid(0.0, 2.0, 1e-3))
    rep = verify(fields_from_family(sol.sample), 1.0)
    assert rep.passed(1e-8)
    assert rep.coupled and rep.j_s_max < 0


def test_flat_connection_uncoupled():
    s = grid(0, 1, 0.01)
    z = np.full(len(s), np.exp(0.3j))
    f = fields_from_solution(s, z, 0 * z, 0 * z, np.full(len(s), 2.0))
    rep = verify(f, 1.0)
    assert rep.residuals.max < 1e-10
    assert not rep.coupled
    assert np.max(np.abs(energy_density(f))) < 1e-28


def test_detects_wrong_solution():
    sol = cr.s1xs2_solution_delta0(1.0, 8.0, grid(0.0, 1.0, 1e-3))
    bad = fields_from_family(sol.sample)
    bad.psi1 = bad.psi1 * 1.01
    assert residual_full(bad, 1.0).max > 1e-4
    assert residual_full(fields_from_family(sol.sample), 1.1).max > 1e-4


def test_fourth_order_convergence():
    errs = []
    for h in (0.02, 0.01):
        fam = cr.closed_form_rho1_delta0(1.0, 0.3, grid(-0.5, 0.5, h))
        errs.append(residual_full(fields_from_family(fam), 1.0).max)
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.25)


def test_roundtrip_and_validation():
    fam = cr.winfty_solution(1.0, 0.6, grid(0, 0.1, 0.01))
    f = fields_from_family(fam)
    z, c, h, r = f.to_solution()
    np.testing.assert_allclose(z, fam.z)
    np.testing.assert_allclose(h, fam.h)
    with pytest.raises(InvalidInputError):
        verify(fields_from_solution(np.array([0, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]), *([np.ones(9)] * 4)), 1.0)
    with pytest.raises(InvalidInputError):
        verify(fields_from_solution(grid(0, 0.05, 0.01), *([np.ones(6)] * 4)), 1.0)
    with pytest.raises(InvalidInputError):
        FieldSample(np.arange(3.0), np.ones(3), np.ones(3), np.ones(3), np.ones(3), np.ones(3), -np.ones(3))


def test_current_scale():
    fam = cr.closed_form_rho1_delta0(1.0, 0.0, grid(0, 0.1, 0.01))
    cur = current_components(fields_from_family(fam), 1.0)
    assert cur.coupled and np.all(cur.j_s < 0)
    assert math.isfinite(float(np.max(np.abs(cur.j_1))))
