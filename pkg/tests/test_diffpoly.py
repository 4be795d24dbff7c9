"""Differential polynomial ring: arithmetic, calculus, canonical form."""

import json
from fractions import Fraction

import pytest

from laxdual.diffpoly import (
    DiffPoly,
    NotATotalDerivative,
    PolyParseError,
    dp_arith,
    dp_derive,
    dp_scale,
    dp_substitute,
    equal_mod_total_derivative,
    euler_derivative,
    formal_integrate,
    parse_poly,
)

from conftest import P, fv, random_poly


class TestArithmetic:
    def test_difference_of_squares(self):
        assert dp_arith(P("b1 + c1"), P("b1 - c1"), "mul") == P("b1^2 - c1^2")

    def test_additive_identity(self, rng):
        for _ in range(20):
            p = random_poly(rng)
            assert dp_arith(p, DiffPoly.zero(), "add") == p

    def test_scalar_associativity(self):
        p = dp_scale(P("b1*c1"), Fraction(1, 2)) * dp_scale(P("b1*c1"), 2)
        assert p == P("b1^2*c1^2")

    def test_ring_axioms_randomized(self, rng):
        for _ in range(25):
            p, q, r = (random_poly(rng) for _ in range(3))
            assert (p + q) + r == p + (q + r)
            assert p + q == q + p
            assert p * q == q * p
            assert (p * q) * r == p * (q * r)
            assert p * (q + r) == p * q + p * r

    def test_scale_distributes(self, rng):
        for _ in range(10):
            p = random_poly(rng)
            assert dp_scale(p, Fraction(3, 7)) + dp_scale(p, Fraction(4, 7)) == p

    def test_zero_is_empty_table(self):
        assert (P("b1") - P("b1")).terms == {}
        assert DiffPoly.zero().is_zero()


class TestDerive:
    def test_leibniz_on_product(self):
        assert dp_derive(P("b1*c1")) == P("b1'*c1 + b1*c1'")

    def test_kills_constants(self):
        assert dp_derive(DiffPoly.const(5)).is_zero()

    def test_dorder_bookkeeping(self):
        assert dp_derive(P("b1"), 2) == P("b1''")

    def test_leibniz_randomized(self, rng):
        for _ in range(20):
            p, q = random_poly(rng), random_poly(rng)
            assert dp_derive(p * q) == dp_derive(p) * q + p * dp_derive(q)


class TestSubstitute:
    def test_rule_applies_to_derivatives(self):
        # b2 -> (1/2) d(b1) inside b2*c1
        rules = {fv("b", 2): P("1/2*b1'")}
        assert dp_substitute(P("b2*c1"), rules) == P("1/2*b1'*c1")

    def test_absent_variable_is_noop(self, rng):
        rules = {fv("b", 9): P("c1^2")}
        for _ in range(10):
            p = random_poly(rng)
            assert dp_substitute(p, rules) == p

    def test_identity_rule_is_noop(self, rng):
        rules = {fv("b", 1): P("b1")}
        for _ in range(10):
            p = random_poly(rng)
            assert dp_substitute(p, rules) == p

    def test_commutes_with_derivation(self, rng):
        rules = {fv("b", 1): P("c1^2 - 2*b2"), fv("c", 2): P("b1*c1'")}
        for _ in range(15):
            p = random_poly(rng)
            assert dp_substitute(p, rules).derive() == dp_substitute(p.derive(), rules)

    def test_rejects_derived_targets(self):
        with pytest.raises(ValueError):
            dp_substitute(P("b1"), {fv("b", 1, 1): P("c1")})


class TestEuler:
    def test_two_integrations_by_parts(self):
        assert euler_derivative(P("b1*c1''"), fv("c", 1)) == P("b1''")

    def test_annihilates_total_derivatives(self, rng):
        for _ in range(20):
            p = random_poly(rng)
            d = dp_derive(p)
            for u in d.generators():
                assert euler_derivative(d, u).is_zero()

    def test_nls_density_variation(self):
        # cross-checked against the t_2 flow of b1 after multiplying by the
        # bracket coefficient 4
        density = P("1/16*b1*c1'' + 1/16*c1*b1'' - 1/8*b1^2*c1^2")
        assert euler_derivative(density, fv("c", 1)) == P("1/8*b1'' - 1/4*b1^2*c1")


class TestFormalIntegrate:
    def test_inverse_of_leibniz(self):
        assert formal_integrate(P("b1'*c1 + b1*c1'")) == P("b1*c1")

    def test_zero(self):
        assert formal_integrate(DiffPoly.zero()).is_zero()

    def test_not_a_total_derivative(self):
        with pytest.raises(NotATotalDerivative):
            formal_integrate(P("b1*c1"))

    def test_constant_is_not_integrable(self):
        with pytest.raises(NotATotalDerivative):
            formal_integrate(DiffPoly.const(5))

    def test_roundtrip_randomized(self, rng):
        for _ in range(25):
            p = random_poly(rng)
            p = p - DiffPoly.const(p.constant_term())
            assert formal_integrate(dp_derive(p)) == p

    def test_high_order_mixed_terms(self):
        p = P("b1''*c1' + 3*b1*b1'^2 - c2'*c2'")
        assert formal_integrate(dp_derive(p)) == p


class TestEqualModTotalDerivative:
    def test_shift_by_total_derivative(self):
        p = P("b1^2*c1^2")
        assert equal_mod_total_derivative(p, p + dp_derive(P("b1*c1")))

    def test_integration_by_parts_twice(self):
        assert equal_mod_total_derivative(P("b1*c1''"), P("c1*b1''"))

    def test_nonzero_euler_image(self):
        assert not equal_mod_total_derivative(P("b1^2*c1^2"), DiffPoly.zero())


class TestCanonicalForm:
    def test_text_roundtrip_randomized(self, rng):
        for _ in range(30):
            p = random_poly(rng)
            assert parse_poly(p.to_text()) == p

    def test_json_roundtrip_randomized(self, rng):
        for _ in range(30):
            p = random_poly(rng)
            assert DiffPoly.from_json(json.loads(json.dumps(p.to_json()))) == p

    def test_fieldvar_ordering(self):
        assert fv("b", 1) < fv("b", 1, 1) < fv("b", 2) < fv("c", 1) < fv("c", 1, 2)

    def test_text_is_deterministic(self, rng):
        for _ in range(10):
            p = random_poly(rng)
            assert p.to_text() == parse_poly(p.to_text()).to_text()


class TestParser:
    def test_primes_and_powers(self):
        assert P("b1''^2") == DiffPoly.from_var(fv("b", 1, 2)) * DiffPoly.from_var(fv("b", 1, 2))

    def test_rationals(self):
        assert P("-3/4") == DiffPoly.const(Fraction(-3, 4))
        assert P("2*b1 - 1/2") == DiffPoly.from_var(fv("b", 1)).scale(2) + DiffPoly.const(Fraction(-1, 2))

    def test_bad_input(self):
        for text in ("", "b1 +", "b0", "b1^0", "*b1", "b1 ** c1"):
            with pytest.raises(PolyParseError):
                parse_poly(text)

    def test_extra_symbols(self):
        # letters-only tokens are constants, digit-bearing ones are fields
        p = P("e*b1s")
        assert p.derive() == P("e*b1s'")
        with pytest.raises(PolyParseError):
            parse_poly("e'")

    def test_latex_smoke(self):
        assert P("-1/2*b1''*c1^2").to_latex() == r"-\frac{1}{2} b_{1}'' {c_{1}}^{2}"
