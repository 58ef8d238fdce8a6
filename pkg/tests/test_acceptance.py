"""Exit criteria at their stated tolerances; each prints one PASS/FAIL line.

These are Monte Carlo runs of several minutes each.  Deselect them with
``pytest -m "not acceptance"``.
"""
import pytest

from kostlab.xplab.acceptance import run_criterion

pytestmark = pytest.mark.acceptance

NAMES = {
    1: "mean_zeros_circle", 2: "mean_zeros_planar", 3: "sqrt_law_slopes",
    4: "cusp_scaling", 5: "cartwright_sturmfels", 6: "morse_audit",
    7: "semicontinuity", 8: "coupled_convergence", 9: "covariance_and_rotation",
    10: "kac_rice_consistency", 11: "cw_cross_validation", 12: "betti_law_stabilization",
    13: "random_knots",
}


@pytest.mark.parametrize("number", sorted(NAMES), ids=[f"C{n}_{NAMES[n]}" for n in sorted(NAMES)])
def test_criterion(number):
    c = run_criterion(number)
    print(c.line())
    assert c.passed, c.line()
