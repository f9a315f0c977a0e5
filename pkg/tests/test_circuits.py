"""Circuit IR: angle expressions, gate validation, binding, folding."""

import pytest

from polarvqe.circuits import (
    AngleExpr,
    Circuit,
    Gate,
    ResourceCount,
    cnot,
    count_resources,
    fold_cnots,
    h,
    rz,
    s,
    sdg,
    x,
)


class TestAngleExpr:
    def test_evaluate_linear_combination(self):
        expr = AngleExpr(terms=(("a", 2.0), ("b", -0.5)), const=1.25)
        assert expr.evaluate({"a": 3.0, "b": 4.0}) == pytest.approx(1.25 + 6.0 - 2.0)

    def test_unbound_parameter_raises(self):
        with pytest.raises(KeyError):
            AngleExpr.of("a").evaluate({"b": 1.0})

    def test_plus_merges_existing_name(self):
        expr = AngleExpr.of("a", 1.0).plus("a", 0.5).plus("b", 2.0)
        assert dict(expr.terms) == {"a": 1.5, "b": 2.0}

    def test_duplicate_name_rejected(self):
        with pytest.raises(ValueError):
            AngleExpr(terms=(("a", 1.0), ("a", 2.0)))

    def test_format_is_stable(self):
        assert AngleExpr(terms=(("t", -2.0),), const=0.5).format() == "-2*t+0.5"
        assert AngleExpr(const=0.0).format() == "0"


class TestGateValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Gate("T", (0,))

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (0,))

    def test_duplicate_qubits(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (1, 1))

    def test_negative_index(self):
        with pytest.raises(ValueError):
            Gate("X", (-1,))

    def test_only_rz_carries_angle(self):
        with pytest.raises(ValueError):
            Gate("RZ", (0,))
        with pytest.raises(ValueError):
            Gate("H", (0,), 1.0)


class TestCircuit:
    def test_gate_out_of_register(self):
        with pytest.raises(ValueError):
            Circuit(1, (cnot(0, 1),))

    def test_undeclared_parameter(self):
        with pytest.raises(ValueError):
            Circuit(1, (rz(0, AngleExpr.of("t")),), ())

    def test_bind_produces_numeric_circuit(self):
        c = Circuit(2, (rz(0, AngleExpr.of("t", -2.0)), cnot(0, 1)), ("t",))
        assert not c.is_bound()
        b = c.bind({"t": 0.5})
        assert b.is_bound()
        assert b.gates[0].angle == pytest.approx(-1.0)
        assert b.params == ()

    def test_bind_missing_parameter(self):
        c = Circuit(1, (rz(0, AngleExpr.of("t")),), ("t",))
        with pytest.raises(KeyError):
            c.bind({})

    def test_dump_golden(self):
        c = Circuit(2, (x(0), h(1), sdg(0), s(1), rz(1, AngleExpr.of("t", 2.0)), cnot(1, 0)), ("t",))
        assert c.dump() == "X 0\nH 1\nSDG 0\nS 1\nRZ 1 2*t\nCNOT 1,0\n"


class TestFoldAndCount:
    def test_fold_one_is_identity(self):
        c = Circuit(2, (h(0), cnot(0, 1)), ())
        assert fold_cnots(c, 1) is c

    def test_fold_rejects_even_or_nonpositive(self):
        c = Circuit(2, (cnot(0, 1),), ())
        for m in (0, 2, -3):
            with pytest.raises(ValueError):
                fold_cnots(c, m)

    def test_fold_replicates_only_cnots(self):
        c = Circuit(2, (h(0), cnot(0, 1), x(1), cnot(1, 0)), ())
        folded = fold_cnots(c, 3)
        assert count_resources(folded).n_cnots == 6
        assert [g.kind for g in folded.gates] == ["H"] + ["CNOT"] * 3 + ["X"] + ["CNOT"] * 3

    def test_count_resources(self):
        c = Circuit(3, (h(0), cnot(0, 1), rz(2, AngleExpr.of("t")), cnot(1, 2)), ("t",))
        assert count_resources(c) == ResourceCount(3, 2, 1)
