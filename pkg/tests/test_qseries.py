from __future__ import annotations

import math

import mpmath
import pytest

from qecregimes import qseries


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_theta_against_mpmath(t):
    q = qseries.nome(t)
    for n, fn in ((2, qseries.theta2), (3, qseries.theta3), (4, qseries.theta4)):
        assert fn(q) == pytest.approx(float(mpmath.jtheta(n, 0, q)), rel=1e-14)


def test_jacobi_identity():
    q = qseries.nome(1.0)
    t2, t3, t4 = qseries.theta2(q), qseries.theta3(q), qseries.theta4(q)
    assert t3**4 == pytest.approx(t2**4 + t4**4, rel=1e-13)


def test_eta_product_identity():
    # 2 eta^3 = theta_2 theta_3 theta_4 at any nome.
    for t in (0.7, 1.0, 1.6):
        q = qseries.nome(t)
        lhs = 2 * qseries.dedekind_eta(q) ** 3
        rhs = qseries.theta2(q) * qseries.theta3(q) * qseries.theta4(q)
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_eta_at_i_closed_form():
    assert qseries.dedekind_eta(qseries.nome(1.0)) == pytest.approx(qseries.eta_i_closed_form(), rel=1e-14)
    assert qseries.eta_i_closed_form() == pytest.approx(0.76822542, rel=1e-8)


def test_self_dual_point():
    q = qseries.nome(1.0)
    assert qseries.theta2(q) == pytest.approx(qseries.theta4(q), rel=1e-14)


def test_nome_rejects_nonpositive():
    with pytest.raises(ValueError):
        qseries.nome(0.0)
