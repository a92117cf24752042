import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from podbounds import oracles
from podbounds._logmath import safe_log
from podbounds.symfunc import (
    build_sym_table,
    lemma2_bound_coarse,
    lemma2_bound_fine,
    log_esp_row,
    log_stirling_factor,
)
from podbounds.verify import log_le, random_values
from podbounds.weights import Explicit, PolyDecay, Zero


class TestSymTable:
    def test_single_value(self):
        t = build_sym_table(Explicit([0.3]), 1, 1)
        assert math.exp(t.entry(1, 1)) == pytest.approx(0.3)

    def test_binomial_count(self):
        t = build_sym_table(Explicit([1, 1, 1]), 3, 2)
        assert math.exp(t.entry(3, 2)) == pytest.approx(3.0, rel=1e-15)

    def test_poly_decay_prefix_oracle(self):
        s = PolyDecay(1.0, 2.0)
        t = build_sym_table(s, 10, 3)
        ref = oracles.esp(list(s.terms(10)), 3)
        assert math.exp(t.entry(10, 3)) == pytest.approx(ref, rel=1e-13)

    def test_every_prefix_matches_enumeration(self):
        vals = [0.5, 0.0, 2.0, 1e-3, 0.7, 3.0]
        t = build_sym_table(Explicit(vals), 6, 6)
        for j in range(7):
            for ell in range(7):
                ref = oracles.esp(vals[:j], ell)
                got = math.exp(t.entry(j, ell))
                assert got == pytest.approx(ref, rel=1e-13, abs=0.0), (j, ell)

    def test_order_above_prefix_rejected(self):
        with pytest.raises(ValueError):
            build_sym_table(Explicit([1.0]), 1, 2)

    def test_row_equals_rolling_row(self):
        s = PolyDecay(2.0, 1.5)
        t = build_sym_table(s, 40, 12)
        np.testing.assert_array_equal(t.row(), log_esp_row(s.log_terms(40), 12))

    def test_no_overflow_in_log_domain(self):
        # e_ell of 500 copies of 1e300 is astronomically beyond float range
        row = log_esp_row(np.full(500, math.log(1e300)), 200)
        ref = math.lgamma(501) - math.lgamma(201) - math.lgamma(301) + 200 * math.log(1e300)
        assert row[200] == pytest.approx(ref, rel=1e-12)

    def test_underflow_free(self):
        row = log_esp_row(np.full(400, math.log(1e-300)), 300)
        assert math.isfinite(row[300])

    # exact zeros plus values whose products stay representable for the linear oracle
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 10.0)), min_size=1, max_size=10))
    def test_property_matches_enumeration(self, vals):
        row = log_esp_row(safe_log(vals), len(vals))
        for ell in range(len(vals) + 1):
            ref = oracles.esp(vals, ell)
            if ref == 0:
                assert row[ell] == -math.inf
            else:
                assert math.exp(row[ell]) == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1e-3, 10.0), min_size=2, max_size=12), st.integers(1, 6))
    def test_monotone_in_prefix_and_values(self, vals, ell):
        ell = min(ell, len(vals) - 1)
        base = log_esp_row(safe_log(vals), ell)[ell]
        longer = log_esp_row(safe_log(vals + [0.5]), ell)[ell]
        bigger = log_esp_row(safe_log([2 * v for v in vals]), ell)[ell]
        assert longer >= base
        assert bigger >= base


class TestFineBound:
    def test_single_atom(self):
        assert lemma2_bound_fine(Explicit([0.3]), 1) == pytest.approx(math.log(0.3), rel=1e-15)

    def test_zero(self):
        assert lemma2_bound_fine(Zero(), 1) == -math.inf

    def test_dominates_long_prefix(self):
        exact = build_sym_table(PolyDecay(1.0, 2.0), 2000, 4).entry(2000, 4)
        assert exact <= lemma2_bound_fine(PolyDecay(1.0, 2.0), 4)

    def test_ell_one_is_the_full_sum(self):
        # the fine bound at ell = 1 is Upsilon_1 + zeta_2 = zeta_1
        fine = lemma2_bound_fine(PolyDecay(1.0, 2.0), 1)
        assert math.exp(fine) == pytest.approx(math.pi**2 / 6, rel=1e-12)


class TestCoarseBound:
    def test_single_atom(self):
        assert lemma2_bound_coarse(Explicit([0.3]), 1) == pytest.approx(2 + math.log(0.3))

    def test_zero(self):
        assert lemma2_bound_coarse(Zero(), 2) == -math.inf

    def test_dominates_fine(self):
        s = PolyDecay(1.0, 2.0)
        assert lemma2_bound_fine(s, 4) <= lemma2_bound_coarse(s, 4)

    def test_chain_random(self):
        rng = random.Random(7)
        for _ in range(300):
            d = rng.randint(1, 30)
            vals = random_values(rng, d)
            ell = rng.randint(1, d)
            s = Explicit(vals)
            exact = log_esp_row(safe_log(vals), ell)[ell]
            fine = lemma2_bound_fine(s, ell)
            coarse = lemma2_bound_coarse(s, ell)
            assert log_le(exact, fine) and log_le(fine, coarse)


class TestStirling:
    @pytest.mark.parametrize("ell", [1, 2, 5, 50, 200])
    def test_product_form(self, ell):
        prod = math.fsum(math.log(J / (ell - J + 1) + 1) for J in range(1, ell + 1))
        assert log_stirling_factor(ell) == pytest.approx(prod, rel=1e-12)

    def test_below_e_power(self):
        assert all(log_stirling_factor(ell) <= ell + 1 for ell in range(1, 1001))
