import pytest

from gramfeas.ami import (
    ConstraintKind,
    OracleStatus,
    ami_interval_oracle,
    evaluate_ami,
    serialize_ami,
)
from gramfeas.generate import (
    contradiction_instance,
    generate,
    planted_instance,
    random_instance,
)


class TestPlanted:
    def test_assignment_satisfies_exactly(self):
        for seed in range(200):
            inst, a = planted_instance(seed, 1 + seed % 7, seed % 12)
            assert evaluate_ami(inst, a, 0)

    def test_x1_is_one(self):
        for seed in range(50):
            _, a = planted_instance(seed, 4, 6)
            assert a.values[0] == 1

    def test_deterministic(self):
        a = planted_instance(42, 5, 9)
        b = planted_instance(42, 5, 9)
        assert serialize_ami(a[0]) == serialize_ami(b[0])
        assert a[1] == b[1]

    def test_requested_shape(self):
        inst, a = planted_instance(3, 6, 11)
        assert inst.n == 6
        assert inst.m == 11
        assert len(a.values) == 6

    def test_not_all_const(self):
        # across a spread of seeds the generator must plant add/mul too
        kinds = set()
        for seed in range(30):
            inst, _ = planted_instance(seed, 6, 10)
            kinds.update(c.kind for c in inst.constraints)
        assert ConstraintKind.ADD in kinds
        assert ConstraintKind.MUL in kinds

    def test_invalid_shape(self):
        with pytest.raises(ValueError):
            planted_instance(0, 0, 1)


class TestContradiction:
    def test_oracle_refutes(self):
        for seed in range(40):
            inst = contradiction_instance(seed, 2 + seed % 4, 2 + seed % 5)
            result = ami_interval_oracle(inst, 100)
            assert result.status is OracleStatus.INFEASIBLE, serialize_ami(inst)

    def test_deterministic(self):
        assert serialize_ami(contradiction_instance(7, 4, 5)) == serialize_ami(
            contradiction_instance(7, 4, 5)
        )

    def test_minimum_shape(self):
        with pytest.raises(ValueError):
            contradiction_instance(0, 1, 2)
        with pytest.raises(ValueError):
            contradiction_instance(0, 2, 1)


class TestRandomAndDispatch:
    def test_random_deterministic(self):
        assert serialize_ami(random_instance(5, 4, 6)) == serialize_ami(
            random_instance(5, 4, 6)
        )

    def test_generate_modes(self):
        inst, a = generate(1, 3, 4, "planted")
        assert a is not None and evaluate_ami(inst, a, 0)
        inst, a = generate(1, 3, 4, "contradiction")
        assert a is None
        inst, a = generate(1, 3, 4, "random")
        assert a is None and inst.m == 4

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            generate(1, 3, 4, "bogus")
