# test/test_qform.py
import gmpy2
import pytest

from regulator_factor_core.cf_engine import expand_sqrt
from regulator_factor_core.errors import (DegenerateFormError, DiscriminantMismatchError,
                                          DistanceBoundError)
from regulator_factor_core.qform import (DistForm, QForm, cycle_form, delta_step, discriminant,
                                         gauss_compose, giant_step, giant_step_detailed, is_reduced,
                                         normalize, principal_form, reduce, reduce_form,
                                         reduction_step_limit, rho, rho_inv)
from regulator_factor_core.utils import real_context

CTX = real_context(96)


def _cumulative(forms):
    dist, out = CTX.mpf(0), []
    for f in forms:
        out.append(dist)
        dist += delta_step(f, CTX)
    return out, dist


def test_principal_form():
    assert principal_form(21) == QForm(1, 8, -5)
    assert principal_form(2) == QForm(1, 2, -1)
    assert discriminant(principal_form(21)) == 84


def test_rho_walks_the_cycle(cycle_21):
    form = cycle_21[0]
    for expected in cycle_21[1:] + cycle_21[:1]:
        form = rho(form)
        assert form == expected


def test_rho_inv_undoes_rho(cycle_21):
    for form in cycle_21:
        assert is_reduced(form)
        assert rho_inv(rho(form)) == form
        assert rho(rho_inv(form)) == form


def test_orbit_matches_continued_fraction():
    for n in range(2, 500):
        if gmpy2.is_square(n):
            continue
        exp = expand_sqrt(n)
        form = principal_form(n)
        for m in range(2 * exp.tau + 1):
            assert form == cycle_form(exp, m), (n, m)
            assert is_reduced(form)
            form = rho(form)


def test_reduce_non_reduced_form():
    f = QForm(1, 2, -20)
    assert not is_reduced(f)
    assert reduction_step_limit(f) == 4
    g, steps = reduce(f)
    assert g == QForm(1, 8, -5)
    assert steps == 2
    assert rho(f) == QForm(-20, -2, 1)


def test_reduce_composed_form_without_normalizing(cycle_21):
    f = QForm(25, 122, 148)
    assert f.discriminant == 84
    assert reduction_step_limit(f) == 7
    g, steps = reduce(f)
    assert g == QForm(4, 2, -5)
    assert g in cycle_21
    assert steps == 3


def test_reduce_reduced_is_identity(cycle_21):
    g, steps, correction = reduce_form(cycle_21[2], CTX)
    assert g == cycle_21[2]
    assert steps == 0
    assert correction == 0


def test_compose_with_witnesses():
    f = QForm(-5, 2, 4)
    assert gauss_compose(f, f, witnesses=(1, 0, 3)) == QForm(25, 122, 148)
    with pytest.raises(DegenerateFormError):
        gauss_compose(f, f, witnesses=(1, 1, 1))


def test_compose_default_witnesses_stays_principal(cycle_21):
    for f in cycle_21:
        for g in cycle_21:
            composed = gauss_compose(f, g)
            assert composed.discriminant == 84
            reduced, _ = reduce(normalize(composed))
            assert reduced in cycle_21


def test_compose_rejects_mismatch():
    with pytest.raises(DiscriminantMismatchError):
        gauss_compose(QForm(1, 8, -5), QForm(1, 2, -1))


def test_normalize():
    assert normalize(QForm(25, 122, 148)) == QForm(25, 22, 4)
    assert normalize(QForm(1, 8, -5)) == QForm(1, 0, -21)


def test_delta_step_values(cycle_21):
    d0 = delta_step(cycle_21[0], CTX)
    assert float(d0) == pytest.approx(1.3450, abs=1e-3)
    expected = CTX.log(8 + CTX.sqrt(84)) - CTX.log(20) / 2
    assert abs(d0 - expected) < CTX.mpf(10) ** -25
    assert float(delta_step(cycle_21[1], CTX)) == pytest.approx(0.2218, abs=1e-3)
    assert float(delta_step(cycle_21[2], CTX)) == pytest.approx(0.7833, abs=1e-3)


def test_cycle_distance_is_regulator(cycle_21):
    cumulative, total = _cumulative(cycle_21)
    regulator = CTX.log(55 + 12 * CTX.sqrt(21))
    assert abs(total - regulator) / regulator < 1e-20
    assert float(total) == pytest.approx(4.70048, abs=1e-3)
    assert abs(cumulative[3] - total / 2) < 1e-20


def test_step_bounds_on_cycle(cycle_21):
    half_log = CTX.log(84) / 2
    for i, f in enumerate(cycle_21):
        one = delta_step(f, CTX)
        assert one < half_log
        assert one + delta_step(cycle_21[(i + 1) % 6], CTX) > CTX.ln2


def test_rho_rejects_zero_coefficient():
    with pytest.raises(DegenerateFormError):
        rho(QForm(1, 2, 0))


def test_giant_step_tracks_distance(cycle_21):
    cumulative, _ = _cumulative(cycle_21)
    f = DistForm(cycle_21[1], cumulative[1])
    step = giant_step_detailed(f, f, CTX)
    assert step.result.form == cycle_21[4]
    assert abs(step.result.dist - cumulative[4]) < 1e-20
    assert abs(step.correction) < 2 * CTX.log(84)
    assert float(step.correction) == pytest.approx(0.4436, abs=1e-3)


def test_giant_steps_land_on_cycle_distances(cycle_21):
    cumulative, total = _cumulative(cycle_21)
    entries = [DistForm(f, d) for f, d in zip(cycle_21, cumulative)]
    for f in entries:
        for g in entries:
            result = giant_step(f, g, CTX)
            index = cycle_21.index(result.form)
            offset = (result.dist - cumulative[index]) / total
            assert abs(offset - CTX.nint(offset)) < 1e-20


def test_distform_to_dict(cycle_21):
    entry = DistForm(cycle_21[0], CTX.mpf(0))
    assert entry.to_dict() == {"form": ["1", "8", "-5"], "dist": "0.0"}


def test_square_discriminant_rejected():
    with pytest.raises(DegenerateFormError):
        reduce_form(QForm(1, 4, 3))
    assert issubclass(DistanceBoundError, RuntimeError)
