import dataclasses

import pytest

from bestprox import (
    DeclarationError,
    Example1Params,
    InputError,
    NumericalError,
    StopKind,
    audit_proof_chain,
    audit_soundness,
    lp_norm,
    make_example1,
    rederive_distance,
    reference_best_proximity,
    reproduce_table,
)
from bestprox.oracle import (
    DEFAULT_EPS_LIST,
    DEFAULT_P_LIST,
    ReferenceMethod,
    load_reference_counts,
)

E1 = (1.0, 0.0)


def benchmark_map(lam=0.5, p=2.0):
    return make_example1(Example1Params(lam=lam, p=p))


@pytest.fixture(scope="module")
def default_grids():
    return {
        StopKind.APOSTERIORI: reproduce_table(StopKind.APOSTERIORI),
        StopKind.APRIORI: reproduce_table(StopKind.APRIORI),
    }


class TestReferenceBestProximity:
    def test_benchmark_scenario(self):
        ref = reference_best_proximity(benchmark_map(), (1000.0, 8.0))
        assert ref.xi == E1
        assert ref.t_xi == (-1.0, -0.0)
        assert ref.method is ReferenceMethod.EXACT
        assert abs(ref.achieved_gap) <= 1e-12

    def test_start_at_the_answer(self):
        ref = reference_best_proximity(benchmark_map(), E1)
        assert ref.xi == E1

    def test_answer_is_parameter_independent(self):
        ref = reference_best_proximity(benchmark_map(lam=0.9, p=5), (50.0, -20.0))
        assert ref.xi == E1

    def test_periodicity_invariant(self):
        spec = benchmark_map(lam=0.73, p=1.3)
        ref = reference_best_proximity(spec, (321.0, 55.0))
        double = spec.apply(spec.apply(ref.xi))
        assert lp_norm(spec.space, [a - b for a, b in zip(ref.xi, double)]) <= 1e-12

    def test_cap_exhaustion(self):
        with pytest.raises(NumericalError):
            reference_best_proximity(benchmark_map(lam=0.99), (1000.0, 8.0), cap=4)

    def test_input_validation(self):
        with pytest.raises(InputError):
            reference_best_proximity(benchmark_map(), (0.0, 0.0))
        with pytest.raises(InputError):
            reference_best_proximity(benchmark_map(), (1000.0, 8.0), tol=0.0)


class TestAuditSoundness:
    def test_benchmark_passes_with_loose_bounds(self):
        report = audit_soundness(benchmark_map(), (1000.0, 8.0), steps=100)
        assert report.passed and not report.failures
        # certificates are intentionally conservative: every finite
        # tightness ratio is far above 1
        finite = [r for _, r, _ in report.tightness if r != float("inf")]
        assert finite and all(r > 10 for r in finite)

    def test_small_p_scenario(self):
        report = audit_soundness(benchmark_map(p=1.1), (1000.0, 8.0), steps=100)
        assert report.passed

    def test_trivial_orbit(self):
        report = audit_soundness(benchmark_map(), E1, steps=20)
        assert report.passed

    def test_understated_k_is_caught(self):
        # declaring k = 0.2 for a map contracting at 0.9 makes the
        # certificates decay faster than the truth; the audit must fail
        spec = dataclasses.replace(benchmark_map(lam=0.9), k=0.2)
        report = audit_soundness(spec, (1000.0, 8.0), steps=100)
        assert not report.passed
        assert report.failures

    def test_steps_validation(self):
        with pytest.raises(InputError):
            audit_soundness(benchmark_map(), (1000.0, 8.0), steps=7)


class TestAuditProofChain:
    @pytest.mark.parametrize("p", [1.1, 2.0, 5.0])
    def test_benchmark_chain(self, p):
        report = audit_proof_chain(benchmark_map(p=p), (1000.0, 8.0), steps=60)
        assert report.passed, report.failures
        assert report.checks > 0

    def test_flat_orbit(self):
        report = audit_proof_chain(benchmark_map(), E1, steps=20)
        assert report.passed

    def test_steps_validation(self):
        with pytest.raises(InputError):
            audit_proof_chain(benchmark_map(), (1000.0, 8.0), steps=2)


class TestRederiveDistance:
    @pytest.mark.parametrize("p", [1.1, 1.5, 2.0])
    def test_matches_declaration(self, p):
        estimate = rederive_distance(benchmark_map(p=p), sample_count=200, seed=7)
        assert estimate == pytest.approx(2.0, abs=1e-6)

    def test_deterministic(self):
        spec = benchmark_map(p=1.5)
        first = rederive_distance(spec, sample_count=100, seed=21)
        second = rederive_distance(spec, sample_count=100, seed=21)
        assert first == second

    def test_overdeclared_distance_is_flagged(self):
        spec = dataclasses.replace(benchmark_map(), d=3.0)
        with pytest.raises(DeclarationError):
            rederive_distance(spec, sample_count=200, seed=7)


class TestReferenceGrids:
    def test_embedded_grids_load(self):
        eps_list, p_list, post = load_reference_counts(StopKind.APOSTERIORI)
        assert eps_list == DEFAULT_EPS_LIST
        assert p_list == DEFAULT_P_LIST
        assert post[0] == [34, 32, 30, 42, 66, 266]
        assert post[4] == [88, 84, 84, 122, 200, 798]
        _, _, pri = load_reference_counts(StopKind.APRIORI)
        assert pri[0] == [54, 50, 46, 64, 104, 428]
        assert pri[4] == [106, 104, 98, 144, 238, 960]
        assert all(c % 2 == 0 and c >= 2 for grid in (post, pri) for row in grid for c in row)


class TestReproduceTable:
    def test_single_aposteriori_cells(self):
        cell = reproduce_table(StopKind.APOSTERIORI, eps_list=[1e-6], p_list=[5.0])
        assert cell.counts == [[132]]
        cell = reproduce_table(StopKind.APOSTERIORI, eps_list=[1e-2], p_list=[20.0])
        assert cell.counts == [[266]]
        assert cell.reference_counts is None  # not the benchmark grid

    def test_single_apriori_cell_offset_is_recorded(self, default_grids):
        cell = reproduce_table(StopKind.APRIORI, eps_list=[1e-10], p_list=[20.0])
        assert cell.counts == [[988]]
        # the benchmark grid cell is 960; the +28 offset shows up in the
        # delta grid of the full reproduction, never silently absorbed
        full = default_grids[StopKind.APRIORI]
        i, j = full.eps_list.index(1e-10), full.p_list.index(20.0)
        assert full.reference_counts[i][j] == 960
        assert full.deltas[i][j] == 28

    def test_default_aposteriori_grid_matches_reference(self, default_grids):
        result = default_grids[StopKind.APOSTERIORI]
        assert result.reference_counts is not None
        assert result.counts == result.reference_counts
        assert all(d == 0 for row in result.deltas for d in row)

    def test_apriori_exact_below_p2_offset_above(self, default_grids):
        result = default_grids[StopKind.APRIORI]
        for j, p in enumerate(result.p_list):
            col_deltas = [row[j] for row in result.deltas]
            if p < 2:
                assert col_deltas == [0, 0, 0, 0, 0]
            else:
                assert all(d > 0 for d in col_deltas)

    def test_apriori_count_dominates_aposteriori(self, default_grids):
        pri = default_grids[StopKind.APRIORI]
        post = default_grids[StopKind.APOSTERIORI]
        for prow, qrow in zip(pri.counts, post.counts):
            assert all(a >= b for a, b in zip(prow, qrow))

    def test_columns_monotone_in_eps(self, default_grids):
        for result in default_grids.values():
            for j in range(len(result.p_list)):
                column = [row[j] for row in result.counts]
                assert column == sorted(column)

    def test_input_validation(self):
        with pytest.raises(InputError):
            reproduce_table(StopKind.MAX_STEPS)
        with pytest.raises(InputError):
            reproduce_table(StopKind.APRIORI, lam=1.0)
        with pytest.raises(InputError):
            reproduce_table(StopKind.APRIORI, eps_list=[0.0])
        with pytest.raises(InputError):
            reproduce_table(StopKind.APRIORI, p_list=[1.0])
