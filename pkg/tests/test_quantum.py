import numpy as np
import pytest

from conftest import random_mixed_qubit, random_projective_qubit_povm
from qbound import (
    InformationMatrix,
    OptimizerConfig,
    POVM,
    QubitPhaseModel,
    TestObservable as ObsEntry,
    TestObservableSet as ObsSet,
    ObservableKind,
    abel_bound_at_offsets,
    abel_set,
    barankin_set,
    bhattacharyya_set,
    bloch_to_density,
    bound_from_matrix,
    chi2_divergence,
    hcrb_classical_sup,
    omega_apply,
    pauli_components,
    probabilities,
    qcrb,
    quantum_chi2,
    quantum_info_function,
    quantum_info_matrix,
    qubit_q_entry,
    sup_over_testpoints,
)
from qbound.errors import (
    OptimizerBudgetExceededError,
    SingularStateError,
    SupportViolationError,
)

FAST = OptimizerConfig(grid_points=256, refine_iterations=40,
                       coarse_grid_points=32, refine_candidates=4, refine_sweeps=1)


class TestQuantumInfoMatrix:
    def test_base_state_normalization(self):
        model = QubitPhaseModel((0, 0.42, 0))
        rho = model.evaluate(0.0)
        base = ObsSet(entries=(ObsEntry(operator=rho, lam=0.0,
                                        kind=ObservableKind.BASE_STATE),), theta=0.0)
        info = quantum_info_matrix(base, rho)
        assert abs(info.matrix[0, 0] - 1.0) <= 1e-12

    def test_derivative_gives_fisher_information(self):
        model = QubitPhaseModel((0, 0.42, 0))
        obs = bhattacharyya_set(model, 0.0, 1)
        info = quantum_info_matrix(obs, model.evaluate(0.0))
        assert abs(info.matrix[0, 0] - 0.1764) <= 1e-12

    def test_barankin_pair_entry(self):
        model = QubitPhaseModel((0, 0.42, 0))
        rho = model.evaluate(0.0)
        obs = barankin_set(model, 0.0, [0.8, -1.4])
        info = quantum_info_matrix(obs, rho)
        direct = np.trace(model.evaluate(0.8) @ omega_apply(rho, model.evaluate(-1.4))).real
        assert abs(info.matrix[0, 1] - direct) <= 1e-12
        assert np.abs(info.matrix - info.matrix.T).max() <= 1e-12


class TestQubitEntry:
    def test_state_itself_normalizes(self):
        model = QubitPhaseModel((0, 0.42, 0))
        rt = model.bloch(0.0)
        assert qubit_q_entry(1.0, rt, 1.0, rt, rt) == pytest.approx(1.0, abs=1e-14)

    def test_derivative_gives_fisher_information(self):
        r = 0.42
        model = QubitPhaseModel((0, r, 0))
        dr = model.bloch_derivative(0.0, 1)
        assert qubit_q_entry(0.0, dr, 0.0, dr, model.bloch(0.0)) == pytest.approx(r * r, abs=1e-15)

    def test_matches_spectral_backend(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            model = random_mixed_qubit(rng)
            rho = model.evaluate(0.0)
            la, lb = rng.uniform(-np.pi, np.pi, size=2)
            ga = model.evaluate(la)
            gb = model.evaluate(lb)
            spectral = np.trace(ga @ omega_apply(rho, gb)).real
            g0a, va = pauli_components(ga)
            g0b, vb = pauli_components(gb)
            bloch = qubit_q_entry(g0a, va, g0b, vb, model.bloch(0.0))
            assert abs(spectral - bloch) <= 1e-10

    def test_pure_state_rejected_for_barankin_pair(self):
        model = QubitPhaseModel((0, 1.0, 0))
        g0, v = pauli_components(model.evaluate(1.0))
        with pytest.raises(SingularStateError):
            qubit_q_entry(g0, v, g0, v, model.bloch(0.0))

    def test_pure_equatorial_fisher_information(self):
        model = QubitPhaseModel((0, 1.0, 0))
        dr = model.bloch_derivative(0.0, 1)
        assert qubit_q_entry(0.0, dr, 0.0, dr, model.bloch(0.0)) == pytest.approx(1.0, abs=1e-12)


class TestBoundFromMatrix:
    def test_single_point_is_offset_squared_over_divergence(self):
        model = QubitPhaseModel((0, 0.42, 0))
        rho = model.evaluate(0.0)
        lam = 1.5
        obs = barankin_set(model, 0.0, [lam])
        info = quantum_info_matrix(obs, rho)
        res = bound_from_matrix(info, obs.lambdas, obs.f_vector)
        chi2 = quantum_chi2(model, 0.0, lam)
        assert res.value == pytest.approx(lam * lam / chi2, rel=1e-9)

    def test_first_order_derivative_is_lowest_bound(self):
        model = QubitPhaseModel((0, 0.42, 0))
        obs = bhattacharyya_set(model, 0.0, 1)
        info = quantum_info_matrix(obs, model.evaluate(0.0))
        res = bound_from_matrix(info, obs.lambdas, obs.f_vector)
        assert res.value == pytest.approx(qcrb(model, 0.0).value, rel=1e-12)

    def test_zero_constraints_give_zero(self):
        info = InformationMatrix(matrix=np.diag([2.0, 1.0]), kind="quantum")
        assert bound_from_matrix(info, [0.0, 0.0], [0.0, 0.0]).value == 0.0

    # a single-axis rotation keeps all state differences in one Bloch plane,
    # so at most two constraint rows (plus the implicit base) are feasible
    @pytest.mark.parametrize("offsets,s", [([0.9, 2.0], 0), ([0.9], 1)])
    def test_explicit_base_row_is_equivalent(self, offsets, s):
        model = QubitPhaseModel((0, 0.42, 0))
        rho = model.evaluate(0.0)
        obs = abel_set(model, 0.0, offsets, s)
        lam, f = obs.lambdas, obs.f_vector
        implicit = bound_from_matrix(quantum_info_matrix(obs, rho), lam, f)
        base = ObsEntry(operator=rho, lam=0.0, kind=ObservableKind.BASE_STATE)
        augmented = ObsSet(entries=(base,) + obs.entries, theta=0.0)
        explicit = bound_from_matrix(quantum_info_matrix(augmented, rho),
                                     np.concatenate(([0.0], lam)), np.zeros(len(lam) + 1))
        assert abs(implicit.value - explicit.value) <= 1e-9 * max(1.0, implicit.value)

    @pytest.mark.parametrize("offsets,s", [([0.9, 2.0], 0), ([0.9], 1)])
    def test_stable_assembly_matches_direct_subtraction(self, offsets, s):
        model = QubitPhaseModel((0, 0.42, 0))
        rho = model.evaluate(0.0)
        obs = abel_set(model, 0.0, offsets, s)
        lam, f = obs.lambdas, obs.f_vector
        direct = bound_from_matrix(quantum_info_matrix(obs, rho), lam, f)
        stable = abel_bound_at_offsets(model, 0.0, offsets, s)
        assert abs(direct.value - stable.value) <= 1e-9 * max(1.0, direct.value)

    def test_infeasible_planar_configuration_is_infinite(self):
        # three rows in a two-dimensional difference space: no measurement
        # and estimator can satisfy the constraints
        model = QubitPhaseModel((0, 0.42, 0))
        assert abel_bound_at_offsets(model, 0.0, [0.9, 2.0], 1).value == np.inf

    def test_pure_state_higher_derivatives_violate_support(self):
        pure = QubitPhaseModel((0, 1.0, 0))
        with pytest.raises(SupportViolationError):
            abel_bound_at_offsets(pure, 0.0, [], 2)
        # first derivative alone is fine (the lowest-order case)
        assert abel_bound_at_offsets(pure, 0.0, [], 1).value == pytest.approx(1.0, rel=1e-12)
        # regularization makes the higher-order configuration computable
        res = abel_bound_at_offsets(pure, 0.0, [], 2, regularize=True)
        assert np.isfinite(res.value)


class TestQcrb:
    def test_study_value(self):
        model = QubitPhaseModel((0, 0.42, 0))
        assert qcrb(model, 0.0).value == pytest.approx(1.0 / 0.1764, rel=1e-12)

    def test_additivity_over_copies(self):
        model = QubitPhaseModel((0, 0.42, 0))
        assert qcrb(model, 0.0, 7).value == pytest.approx(qcrb(model, 0.0).value / 7, rel=1e-12)

    def test_pure_equatorial(self):
        model = QubitPhaseModel((0, 1.0, 0))
        for m in (1, 3):
            assert qcrb(model, 0.0, m).value == pytest.approx(1.0 / m, rel=1e-12)

    def test_generic_backend_agrees(self):
        from qbound import CallableFamily

        model = QubitPhaseModel((0.1, 0.4, 0.2))
        generic = CallableFamily(model.evaluate, dim=2,
                                 derivative_fn=lambda th, k: model.derivative(th, k))
        assert qcrb(generic, 0.3).value == pytest.approx(qcrb(model, 0.3).value, rel=1e-10)


class TestQuantumChi2:
    def test_zero_offset(self):
        model = QubitPhaseModel((0, 0.42, 0))
        assert quantum_chi2(model, 0.0, 0.0) == 0.0

    def test_small_offset_limit_is_fisher_information(self):
        model = QubitPhaseModel((0, 0.42, 0))
        f1 = 0.1764
        errs = [abs(quantum_chi2(model, 0.0, lam) / lam ** 2 - f1) for lam in (1e-3, 1e-4)]
        assert errs[0] <= f1 * 1e-6
        assert errs[1] <= errs[0]

    def test_dominates_measured_divergence(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            model = random_mixed_qubit(rng)
            lam = rng.uniform(0.2, np.pi)
            qchi = quantum_chi2(model, 0.0, lam)
            povm = random_projective_qubit_povm(rng)
            chi = chi2_divergence(probabilities(povm, model.evaluate(lam)),
                                  probabilities(povm, model.evaluate(0.0)))
            assert chi <= qchi + 1e-9

    def test_pure_state_raises_without_regularization(self):
        model = QubitPhaseModel((0, 1.0, 0))
        with pytest.raises(SupportViolationError):
            quantum_chi2(model, 0.0, 1.0)

    def test_pure_state_regularized(self):
        model = QubitPhaseModel((0, 1.0, 0))
        value = quantum_chi2(model, 0.0, 1.0, regularize=True)
        assert np.isfinite(value) and value > 0


class TestSupOverTestpoints:
    def test_derivative_only_equals_lowest_bound(self):
        model = QubitPhaseModel((0, 0.42, 0))
        res = sup_over_testpoints(model, 0.0, 0, 1, FAST)
        assert res.value == qcrb(model, 0.0).value

    def test_single_point_study_state(self, study_model):
        res = sup_over_testpoints(study_model, 0.0, 1, 0, FAST)
        assert res.value > qcrb(study_model, 0.0).value
        assert res.optimal_offsets[0] == pytest.approx(np.pi, abs=1e-9)
        assert not res.attained_at_limit

    def test_hybrid_study_state(self, study_model):
        res = sup_over_testpoints(study_model, 0.0, 1, 1, FAST)
        assert res.optimal_offsets[0] == pytest.approx(np.pi, abs=1e-9)
        assert res.value > sup_over_testpoints(study_model, 0.0, 1, 0, FAST).value - 1e-12

    def test_limit_fallback_above_threshold(self, study_model):
        res = sup_over_testpoints(study_model, 0.0, 1, 0, FAST, m=4)
        assert res.attained_at_limit
        assert res.value == qcrb(study_model, 0.0, 4).value
        assert res.diagnostics["grid_best"] < res.value

    def test_at_least_lowest_bound_random_states(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            model = random_mixed_qubit(rng)
            base = qcrb(model, 0.0).value
            for (r, s) in ((1, 0), (1, 1)):
                assert sup_over_testpoints(model, 0.0, r, s, FAST).value >= base - 1e-8

    def test_budget_guard(self):
        model = QubitPhaseModel((0, 0.42, 0))
        with pytest.raises(OptimizerBudgetExceededError):
            sup_over_testpoints(model, 0.0, 5, 0, OptimizerConfig(grid_points=64,
                                                                  coarse_grid_points=64))

    def test_invalid_order(self):
        model = QubitPhaseModel((0, 0.42, 0))
        with pytest.raises(ValueError):
            sup_over_testpoints(model, 0.0, 0, 0, FAST)


class TestHcrbClassicalSup:
    def test_insensitive_measurement_diverges(self):
        model = QubitPhaseModel((0, 0.42, 0))
        povm = POVM(elements=(0.5 * np.eye(2), 0.5 * np.eye(2)))
        res = hcrb_classical_sup(povm, model, 0.0, FAST)
        assert res.value == np.inf

    def test_optimal_povm_saturates_at_the_optimal_offset(self, study_model):
        # the one-point-optimal measurement has zero Fisher information at the
        # working point, so its full offset supremum diverges; saturation is
        # a statement at the optimizing offset
        from qbound import classical_bound, classical_info_matrix, saturating_measurement

        rho = study_model.evaluate(0.0)
        target = sup_over_testpoints(study_model, 0.0, 1, 0, FAST)
        obs = barankin_set(study_model, 0.0, [target.optimal_offsets[0]])
        povm, _, _ = saturating_measurement(obs, rho)
        cb = classical_bound(classical_info_matrix(povm, obs, rho),
                             obs.lambdas, obs.f_vector)
        assert cb.value == pytest.approx(target.value, abs=1e-6)
        assert hcrb_classical_sup(povm, study_model, 0.0, FAST).value >= target.value - 1e-9

    def test_informationally_complete_measurement_finite_and_dominates(self, study_model):
        from qbound import equatorial_qubit_ket

        kets = [equatorial_qubit_ket(2 * np.pi * k / 3 + 0.4) for k in range(3)]
        povm = POVM(elements=tuple(2.0 / 3.0 * np.outer(k, k.conj()) for k in kets))
        res = hcrb_classical_sup(povm, study_model, 0.0, FAST)
        target = sup_over_testpoints(study_model, 0.0, 1, 0, FAST)
        assert np.isfinite(res.value)
        assert res.value >= target.value - 1e-9

    def test_bad_axis_measurement_is_looser(self, study_model):
        target = sup_over_testpoints(study_model, 0.0, 1, 0, FAST)
        e1 = bloch_to_density((0, 1, 0))
        povm = POVM(elements=(e1, np.eye(2) - e1))
        res = hcrb_classical_sup(povm, study_model, 0.0, FAST)
        assert res.value > target.value + 1e-6


@pytest.fixture(scope="module")
def qutrit():
    from scipy.linalg import expm

    from qbound import CallableFamily

    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0).real
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    gen = 0.5 * (g + g.conj().T)
    return CallableFamily(
        lambda th: expm(-1j * th * gen) @ rho0 @ expm(1j * th * gen), dim=3)


class TestQutritFamily:
    """Generic-dimension regression: a qutrit family built from a matrix
    exponential carries roundoff skew that the state constructors must absorb
    (its tiny-offset differences once tripped the Hermiticity check)."""

    def test_hierarchy(self, qutrit):
        cfg = OptimizerConfig(grid_points=128, refine_iterations=30,
                              coarse_grid_points=16, refine_candidates=3, refine_sweeps=1)
        base = qcrb(qutrit, 0.0).value
        v10 = sup_over_testpoints(qutrit, 0.0, 1, 0, cfg).value
        v11 = sup_over_testpoints(qutrit, 0.0, 1, 1, cfg).value
        assert base <= v10 + 1e-8 <= v11 + 2e-8
        assert np.isfinite(v11)

    def test_saturation(self, qutrit):
        from qbound import classical_bound, classical_info_matrix, saturating_measurement

        rho = qutrit.evaluate(0.0)
        obs = abel_set(qutrit, 0.0, [1.0], 1)
        lam, f = obs.lambdas, obs.f_vector
        quantum = bound_from_matrix(quantum_info_matrix(obs, rho), lam, f)
        povm, _, _ = saturating_measurement(obs, rho)
        assert len(povm) == 3
        classical = classical_bound(classical_info_matrix(povm, obs, rho), lam, f)
        assert abs(classical.value - quantum.value) <= 1e-7 * max(1.0, quantum.value)

    def test_tiny_offset_rows_stay_finite(self, qutrit):
        for lam in (1e-4, 1e-6):
            res = abel_bound_at_offsets(qutrit, 0.0, [lam], 0)
            assert np.isfinite(res.value)
            # vanishing-offset limit of the one-point bound is the lowest order
            assert res.value == pytest.approx(qcrb(qutrit, 0.0).value, rel=1e-4)


class TestConvexity:
    def test_information_function_convex_in_state(self):
        from qbound import CallableFamily

        rng = np.random.default_rng(3)
        offsets = [0.8, -1.1]
        for _ in range(10):
            fam1 = random_mixed_qubit(rng)
            fam2 = random_mixed_qubit(rng)
            w = rng.uniform(0.1, 0.9)
            mix = CallableFamily(
                lambda th, f1=fam1, f2=fam2, w=w: w * f1.evaluate(th) + (1 - w) * f2.evaluate(th),
                dim=2)
            a = rng.normal(size=2)
            lam = np.array(offsets)
            values = []
            for fam in (mix, fam1, fam2):
                obs = barankin_set(fam, 0.0, offsets)
                info = quantum_info_matrix(obs, fam.evaluate(0.0))
                values.append(quantum_info_function(info, a, lam))
            assert values[0] <= w * values[1] + (1 - w) * values[2] + 1e-8
