import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from dstchoice.exceptions import (DomainError, InfeasibleModel, NormalizationError, ObjectiveUnsupported,
                                  PerceivedUtilityTie, UniverseTooLarge)
from dstchoice.listdesign import (CES, Customer, ListProblem, example_problem, list_demand, list_utility,
                                  optimize_exhaustive, optimize_lp, perceived_best, platform_utility,
                                  system_utilities, verify_list_structure)

EX = example_problem()


def _problem(rng, n, k=None):
    prods = [f"p{i}" for i in range(n)]
    pay = rng.sample(range(1, 1000), n)
    k = k or rng.randint(1, 3)
    sh = [rng.random() + 0.1 for _ in range(k)]
    t = sum(sh)
    sh = [s / t for s in sh]
    sh[-1] = 1 - sum(sh[:-1])
    custs = [Customer(s, rng.uniform(0.05, 0.95), tuple(sorted((rng.uniform(0.1, 5) for _ in range(n)), reverse=True)))
             for s in sh]
    boost = sorted((rng.uniform(0, 2) for _ in range(n)), reverse=True)
    return ListProblem(prods, {p: v / 1000 for p, v in zip(prods, pay)}, {p: rng.uniform(0, 3) for p in prods},
                       boost, custs)


def test_payoff_ordered_list():
    lst = EX.payoff_order()
    assert list(lst) == ["x1", "x2", "x3", "x4", "x5"]
    su = system_utilities(EX, lst)
    assert su["perceived_best"] == "x4"
    assert su["perceived_utility"] == F(17, 5)
    assert su["system1"] == F(11, 18)
    assert list_utility(EX, lst) == F(17, 36)


def test_optimal_list():
    sol = optimize_exhaustive(EX)
    assert list(sol.list) == ["x3", "x1", "x2", "x5", "x4"]
    assert sol.platform_utility == F(8, 15)
    assert sum(sol.demand.values()) == 1
    assert sol.blocks.passed
    assert sol.positions["x3"] == 1


def test_lp_matches_on_example():
    sol = optimize_lp(EX)
    assert sol.list == optimize_exhaustive(EX).list
    assert sol.diagnostics["search_complete"]


def test_degenerate_demand_gives_payoff():
    d = {p: 0 for p in EX.products}
    d["x2"] = 1
    assert platform_utility(EX, d) == EX.payoffs["x2"]


def test_ces_objective():
    rng = random.Random(3)
    pr = _problem(rng, 4)
    ces = ListProblem(pr.products, pr.payoffs, pr.utilities, pr.boost, pr.customers, CES(3.0))
    sol = optimize_exhaustive(ces)
    assert sol.platform_utility >= list_utility(ces, ces.payoff_order()) - 1e-12
    assert sol.platform_utility == pytest.approx(max(list_utility(ces, lst) for lst in sol.co_optimal))
    with pytest.raises(ObjectiveUnsupported):
        optimize_lp(ces)
    with pytest.raises(DomainError):
        CES(1.0)


def test_validation():
    good = dict(products=["a", "b"], payoffs={"a": 1, "b": 2}, utilities={"a": 0, "b": 0.5}, boost=[0.2, 0.1])
    with pytest.raises(DomainError):
        ListProblem(**good, customers=[Customer(1, 0.5, (1.0, 1.0))])
    with pytest.raises(NormalizationError):
        ListProblem(**good, customers=[Customer(0.5, 0.5, (2.0, 1.0))])
    with pytest.raises(DomainError):
        ListProblem(**{**good, "payoffs": {"a": 1, "b": 1}}, customers=[Customer(1, 0.5, (2.0, 1.0))])


def test_ties_rejected_unless_allowed():
    args = (["a", "b"], {"a": 1, "b": 2}, {"a": 0, "b": 0}, [0.1, 0.1], [Customer(1, 0.5, (2.0, 1.0))])
    with pytest.raises(PerceivedUtilityTie):
        ListProblem(*args)
    pr = ListProblem(*args, tie_break=True)
    assert perceived_best(pr, ["a", "b"]) == "a"
    with pytest.raises(InfeasibleModel):
        optimize_lp(pr)


def test_enumeration_guard():
    rng = random.Random(0)
    with pytest.raises(UniverseTooLarge):
        optimize_exhaustive(_problem(rng, 5), max_size=4)


def test_demand_sums_to_one():
    rng = random.Random(4)
    pr = _problem(rng, 5)
    for lst in itertools.islice(itertools.permutations(pr.products), 30):
        assert sum(list_demand(pr, lst).values()) == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_lp_equals_enumeration(seed, n):
    pr = _problem(random.Random(seed), n)
    ex, lp = optimize_exhaustive(pr), optimize_lp(pr)
    assert abs(ex.platform_utility - lp.platform_utility) < 1e-9
    assert lp.list in ex.co_optimal
    assert all(verify_list_structure(pr, c).passed for c in ex.co_optimal)
