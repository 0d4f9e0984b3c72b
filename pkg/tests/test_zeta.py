import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnerr import zeta
from pnerr.errors import CoverageError, FormatError

# mpmath.zetazero, 20 digits
GAMMA_1 = 14.134725141734693790
GAMMA_2 = 21.022039638771554993
GAMMA_3 = 25.010857580145688763
GAMMA_100 = 236.52422966581620580
# mpmath.zeta(rho_1, derivative=1)
ZETA_PRIME_1 = complex(0.78329651186703092865, 0.12469982974817108941)
ZETA_PRIME_2 = complex(1.1092955634626715657, -0.24872978851649745822)
# mpmath.zeta(2 rho_1)
ZETA_2RHO_1 = complex(1.836735353402834188, -0.65119759652226867248)


def test_first_zeros():
    t = zeta.compute_zeros(3, 1e-10)
    assert t.gammas[0] == pytest.approx(GAMMA_1, abs=1e-9)
    assert t.gammas[2] == pytest.approx(GAMMA_3, abs=1e-9)
    assert 14 < t.gammas[0] < 15


def test_coarse_tolerance():
    t = zeta.compute_zeros(1, 1e-3, companions=False)
    assert 14.13 <= t.gammas[0] <= 14.14


def test_cached_table_against_reference(zeros10k):
    assert len(zeros10k) == 10_000
    assert zeros10k.gammas[99] == pytest.approx(GAMMA_100, abs=1e-9)
    assert np.all(np.diff(zeros10k.gammas) > 0)
    z = zeta.z_function(zeros10k.gammas[::97])
    assert np.max(np.abs(z)) < 1e-8


def test_companion_values():
    zp = zeta.compute_zeta_prime(np.array([GAMMA_1, GAMMA_2]))
    assert abs(zp[0] - ZETA_PRIME_1) < 1e-8
    assert abs(zp[1] - ZETA_PRIME_2) < 1e-8
    assert abs(zp[0]) == pytest.approx(0.793, abs=5e-4)
    assert 0.1 < abs(zp[1]) < 10
    z2 = zeta.compute_zeta_at_one_plus(GAMMA_1)
    assert abs(z2 - ZETA_2RHO_1) < 1e-8
    assert 0.1 < abs(z2) < 10


def test_zeta_prime_against_finite_difference(zeros10k):
    h = 1e-5
    for g, zp in zip(zeros10k.gammas[:100], zeros10k.zeta_prime[:100]):
        rho = mpmath.mpc(0.5, g)
        fd = complex((mpmath.zeta(rho + h) - mpmath.zeta(rho - h)) / (2 * h))
        assert abs(fd - zp) < 1e-5


def test_one_line_values_nonzero(zeros10k):
    assert np.all(np.abs(zeros10k.zeta_2rho) > 0)
    assert not zeros10k.flagged


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 5000.0))
def test_one_line_conjugate_symmetry(g):
    a = zeta.zeta_em(1.0 + 2j * g)
    b = zeta.zeta_em(1.0 - 2j * g)
    assert abs(a - np.conj(b)) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=30, deadline=None)
@given(st.floats(10.0, 3000.0))
def test_hardy_z_matches_zeta_modulus(t):
    z = zeta.z_function(t).item()
    ref = abs(complex(mpmath.zeta(mpmath.mpc(0.5, t))))
    assert abs(abs(z) - ref) < 1e-7 * max(1.0, ref)


@settings(max_examples=20, deadline=None)
@given(st.floats(900.0, 1100.0))
def test_branches_agree_near_cutoff(t):
    assert zeta.z_riemann_siegel(t).item() == pytest.approx(zeta.z_euler_maclaurin(t).item(), abs=1e-9)


def test_riemann_von_mangoldt_envelope(zeros10k):
    g = zeros10k.gammas
    Ts = np.concatenate([g, g - 1e-9, np.linspace(15, g[-1], 2000)])
    N = np.searchsorted(g, Ts, side="right")
    main = Ts / (2 * math.pi) * np.log(Ts / (2 * math.pi * math.e)) + 7 / 8
    assert np.all(np.abs(N - main) <= 1 + 0.14 * np.log(Ts))


def test_counting_functions(zeros10k):
    assert zeta.counting_function(zeros10k, 0) == 0
    assert zeta.counting_function(zeros10k, 14) == 0
    assert zeta.counting_function(zeros10k, 15) == 1
    assert zeta.short_interval_count(zeros10k, 14) == 1
    with pytest.raises(CoverageError):
        zeta.counting_function(zeros10k, 1e6)


def test_round_trip(tmp_path):
    t = zeta.compute_zeros(10)
    path = tmp_path / "z.csv"
    zeta.export_zeros(t, path)
    back = zeta.import_zeros(path, "zeta")
    assert np.array_equal(back.gammas, t.gammas)
    assert np.array_equal(back.zeta_prime, t.zeta_prime)
    assert np.array_equal(back.zeta_2rho, t.zeta_2rho)


def test_empty_body(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("# kind=external\n# count=0\n# precision=1e-9\n")
    assert len(zeta.import_zeros(path)) == 0


def test_kind_mismatch(tmp_path):
    path = tmp_path / "z.csv"
    zeta.export_zeros(zeta.compute_zeros(2), path)
    with pytest.raises(FormatError):
        zeta.import_zeros(path, "external")


def test_bad_rows_report_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# kind=external\n1,20.0,,,,\n2,15.0,,,,\n")
    with pytest.raises(FormatError) as err:
        zeta.import_zeros(path)
    assert err.value.line == 3
    path.write_text("# kind=external\n1,abc,,,,\n")
    with pytest.raises(FormatError) as err:
        zeta.import_zeros(path)
    assert err.value.line == 2


def test_missing_companions_can_be_filled(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text(f"# kind=zeta\n1,{GAMMA_1!r},,,,\n2,{GAMMA_2!r},,,,\n")
    t = zeta.import_zeros(path)
    assert not t.has_zeta_prime
    filled = t.with_companions()
    assert abs(filled.zeta_prime[0] - ZETA_PRIME_1) < 1e-8
